//! JSON wire formats.
//!
//! Purpose: the file and report shapes the binary reads and writes:
//! polytopes (vertex or halfspace form), covers (structured or compact
//! text), construction witnesses, and the NDJSON report lines emitted by
//! checks and sweeps. Conversions to and from kernel types live here so
//! the kernel stays serialization-free.

use std::collections::BTreeMap;

use btiso_core::covers::{validate_cover, Cover, IndexSet};
use btiso_core::geometry::{self, convex_hull, HPolytope, Point, VPolytope};
use btiso_core::hanner::{CertificateReport, HannerWitness, MinimalTuple};
use btiso_core::inequalities::{AuditReport, Body, InequalityReport};
use btiso_core::equality::{CharacterizationReport, ConditionReport};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Rounds to 12 significant digits; printed volumes go through this.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HalfspaceDto {
    pub a: Vec<f64>,
    pub b: f64,
}

/// Polytope file: vertex form or halfspace form, one of the two.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolytopeFile {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halfspaces: Option<Vec<HalfspaceDto>>,
}

impl PolytopeFile {
    pub fn from_vertices(n: usize, vertices: Vec<Point>) -> Self {
        PolytopeFile { n, vertices: Some(vertices), halfspaces: None }
    }

    /// Vertex set of the file: direct for vertex form, enumerated for
    /// halfspace form.
    pub fn vertex_set(&self) -> Result<Vec<Point>, CliError> {
        if self.n == 0 {
            return Err(CliError::Input("polytope dimension must be positive".into()));
        }
        match (&self.vertices, &self.halfspaces) {
            (Some(v), None) => {
                if v.is_empty() {
                    return Err(CliError::Input("empty vertex list".into()));
                }
                if v.iter().any(|p| p.len() != self.n) {
                    return Err(CliError::Input("vertex length does not match n".into()));
                }
                Ok(v.clone())
            }
            (None, Some(rows)) => {
                let mut normals = Vec::with_capacity(rows.len());
                let mut offsets = Vec::with_capacity(rows.len());
                for (i, row) in rows.iter().enumerate() {
                    if row.a.len() != self.n {
                        return Err(CliError::Input(format!(
                            "halfspace {i}: normal length does not match n"
                        )));
                    }
                    let norm = row.a.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if !(norm > 0.0) || !row.b.is_finite() {
                        return Err(CliError::Input(format!("halfspace {i}: degenerate row")));
                    }
                    normals.push(row.a.iter().map(|x| x / norm).collect());
                    offsets.push(row.b / norm);
                }
                let h = HPolytope { dim: self.n, normals, offsets };
                let verts = geometry::slice(&h, &[])?;
                if verts.is_empty() {
                    return Err(CliError::Input("halfspace system has no vertices".into()));
                }
                Ok(verts)
            }
            _ => Err(CliError::Input(
                "polytope file needs exactly one of \"vertices\" or \"halfspaces\"".into(),
            )),
        }
    }

    pub fn to_body(&self) -> Result<Body, CliError> {
        Ok(Body::new(self.n, self.vertex_set()?)?)
    }
}

/// Cover file shape: sigma plus parts, all 1-based element lists.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverFile {
    pub sigma: Vec<usize>,
    pub parts: Vec<Vec<usize>>,
}

/// Parses "1,2" or compact "12" into an index set over ground n.
pub fn parse_set(text: &str, n: usize) -> Result<IndexSet, CliError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(CliError::Input("empty index set".into()));
    }
    let elems: Vec<usize> = if text.contains(',') {
        text.split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Input(format!("bad element {p:?}")))
            })
            .collect::<Result<_, _>>()?
    } else if text.chars().all(|c| c.is_ascii_digit()) && n <= 9 {
        text.chars()
            .map(|c| c.to_digit(10).unwrap() as usize)
            .collect()
    } else {
        vec![text
            .parse::<usize>()
            .map_err(|_| CliError::Input(format!("bad index set {text:?}")))?]
    };
    Ok(IndexSet::from_elems(n, &elems)?)
}

/// Parses the compact cover text "1|2|12" over a fixed sigma.
pub fn parse_cover_text(text: &str, sigma: IndexSet) -> Result<Cover, CliError> {
    let n = sigma.ground_n();
    let parts: Vec<IndexSet> = text
        .split('|')
        .map(|p| parse_set(p, n))
        .collect::<Result<_, _>>()?;
    Ok(validate_cover(sigma, &parts)?)
}

pub fn cover_from_file(file: &CoverFile, n: usize) -> Result<Cover, CliError> {
    let sigma = IndexSet::from_elems(n, &file.sigma)?;
    let parts: Vec<IndexSet> = file
        .parts
        .iter()
        .map(|p| IndexSet::from_elems(n, p))
        .collect::<Result<_, _>>()
        .map_err(CliError::from)?;
    Ok(validate_cover(sigma, &parts)?)
}

pub fn set_elems(s: &IndexSet) -> Vec<usize> {
    s.iter().collect()
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CertificateDto {
    pub expected: f64,
    pub got: f64,
    pub error: f64,
    pub holds: bool,
}

impl From<&CertificateReport> for CertificateDto {
    fn from(r: &CertificateReport) -> Self {
        CertificateDto { expected: r.expected, got: r.got, error: r.error, holds: r.holds }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificatesDto {
    pub vol_equal: CertificateDto,
    pub block_volume: CertificateDto,
    pub projection_dominance: BTreeMap<String, CertificateDto>,
    pub closed_form_vs_hull: BTreeMap<String, CertificateDto>,
    pub all_hold: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockDto {
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<f64>>>,
}

/// Witness file for one construction: the tuple, the box and block data,
/// the built vertex set, and every certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessFile {
    pub sigma: Vec<usize>,
    /// Central box half-sides keyed by coordinate.
    pub c: BTreeMap<String, f64>,
    #[serde(rename = "L")]
    pub block: BlockDto,
    /// Tuple entries keyed by compact subset text.
    pub t: BTreeMap<String, f64>,
    pub lp_order: Vec<String>,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub product_residual: f64,
    pub escalated: bool,
    pub vertices: Vec<Vec<f64>>,
    pub block_vertices: Vec<Vec<f64>>,
    pub certificates: CertificatesDto,
}

pub fn witness_to_file(w: &HannerWitness) -> WitnessFile {
    let key = |s: &IndexSet| s.to_compact();
    let mut c = BTreeMap::new();
    for (coord, half) in &w.c {
        c.insert(coord.to_string(), *half);
    }
    let block = match &w.block_sides {
        Some(sides) => BlockDto {
            mode: "box".into(),
            b: Some(sides.iter().map(|(coord, half)| (coord.to_string(), *half)).collect()),
            vertices: None,
        },
        None => BlockDto {
            mode: "explicit".into(),
            b: None,
            vertices: Some(w.block_vertices.clone()),
        },
    };
    let mut t = BTreeMap::new();
    for tau in w.tuple.sigma.nonempty_subsets() {
        if let Some(v) = w.tuple.t_of(tau) {
            t.insert(key(&tau), v);
        }
    }
    WitnessFile {
        sigma: set_elems(&w.sigma),
        c,
        block,
        t,
        lp_order: w.tuple.order.iter().map(|s| key(s)).collect(),
        lower_bound: w.tuple.lower_bound,
        upper_bound: w.tuple.upper_bound,
        product_residual: w.tuple.product_residual,
        escalated: w.tuple.escalated,
        vertices: w.vertices.clone(),
        block_vertices: w.block_vertices.clone(),
        certificates: CertificatesDto {
            vol_equal: (&w.vol_equal).into(),
            block_volume: (&w.block_volume).into(),
            projection_dominance: w
                .projection_dominance
                .iter()
                .map(|(tau, r)| (key(tau), r.into()))
                .collect(),
            closed_form_vs_hull: w
                .closed_form_vs_hull
                .iter()
                .map(|(tau, r)| (key(tau), r.into()))
                .collect(),
            all_hold: w.all_hold(),
        },
    }
}

/// Rebuilds the tuple a witness claims, with singleton entries taken from
/// the recorded half-sides so that tampering with them is observable.
pub fn witness_tuple(file: &WitnessFile, n: usize) -> Result<MinimalTuple, CliError> {
    let sigma = IndexSet::from_elems(n, &file.sigma)?;
    let mut t = BTreeMap::new();
    for (k, v) in &file.t {
        let tau = parse_set(k, n)?;
        if !tau.is_subset(&sigma) {
            return Err(CliError::Input(format!("tuple key {k} is not inside sigma")));
        }
        t.insert(tau.bits(), *v);
    }
    for (k, half) in &file.c {
        let coord: usize = k
            .parse()
            .map_err(|_| CliError::Input(format!("bad coordinate key {k:?}")))?;
        let single = IndexSet::from_elems(n, &[coord])?;
        if !single.is_subset(&sigma) {
            return Err(CliError::Input(format!("half-side key {k} is not inside sigma")));
        }
        t.insert(single.bits(), 2.0 * *half);
    }
    let order: Vec<IndexSet> = file
        .lp_order
        .iter()
        .map(|k| parse_set(k, n))
        .collect::<Result<_, _>>()?;
    Ok(MinimalTuple {
        sigma,
        order,
        t,
        active: BTreeMap::new(),
        lower_bound: file.lower_bound,
        upper_bound: file.upper_bound,
        product_residual: file.product_residual,
        escalated: file.escalated,
    })
}

/// Block shape a witness claims, for re-running the construction.
pub fn witness_block(file: &WitnessFile, n: usize) -> Result<btiso_core::hanner::BlockMode, CliError> {
    match file.block.mode.as_str() {
        "box" => Ok(btiso_core::hanner::BlockMode::Box),
        "explicit" => {
            let verts = file
                .block
                .vertices
                .clone()
                .or_else(|| Some(file.block_vertices.clone()))
                .filter(|v| !v.is_empty())
                .ok_or_else(|| CliError::Input("explicit block without vertices".into()))?;
            Ok(btiso_core::hanner::BlockMode::Explicit(VPolytope { dim: n, vertices: verts }))
        }
        other => Err(CliError::Input(format!("unknown block mode {other:?}"))),
    }
}

/// One NDJSON report line for a bound check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportLine {
    pub name: String,
    pub context: serde_json::Value,
    pub lhs: f64,
    pub rhs: f64,
    pub log_slack: f64,
    pub tol: f64,
    pub holds: bool,
    pub seed: u64,
    pub config_hash: String,
}

pub fn report_line(
    name: &str,
    context: serde_json::Value,
    r: &InequalityReport,
    seed: u64,
    config_hash: &str,
) -> ReportLine {
    ReportLine {
        name: name.into(),
        context,
        lhs: sig12(r.lhs_log),
        rhs: sig12(r.rhs_log),
        log_slack: sig12(r.slack_log),
        tol: r.tol,
        holds: r.holds,
        seed,
        config_hash: config_hash.into(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditStepDto {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub log_slack: f64,
    pub std_error: f64,
    pub holds: bool,
}

/// One NDJSON line for a three-step derivation audit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditLine {
    pub name: String,
    pub context: serde_json::Value,
    pub steps: Vec<AuditStepDto>,
    pub sum_slack: f64,
    pub total_slack: f64,
    pub telescope_gap: f64,
    pub telescope_tol: f64,
    pub samples: usize,
    pub holds: bool,
    pub seed: u64,
    pub config_hash: String,
}

pub fn audit_line(
    context: serde_json::Value,
    r: &AuditReport,
    seed: u64,
    config_hash: &str,
) -> AuditLine {
    let names = ["slice-split", "holder", "moment"];
    AuditLine {
        name: "audit".into(),
        context,
        steps: r
            .steps
            .iter()
            .zip(names)
            .map(|(s, name)| AuditStepDto {
                name: name.into(),
                lhs: sig12(s.lhs_log),
                rhs: sig12(s.rhs_log),
                log_slack: sig12(s.slack_log),
                std_error: sig12(s.std_error),
                holds: s.holds,
            })
            .collect(),
        sum_slack: sig12(r.sum_slack_log),
        total_slack: sig12(r.total_slack_log),
        telescope_gap: sig12(r.telescope_gap),
        telescope_tol: sig12(r.telescope_tol),
        samples: r.samples,
        holds: r.holds,
        seed,
        config_hash: config_hash.into(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionDto {
    pub holds: bool,
    pub max_residual: f64,
    pub constants: Vec<f64>,
    pub fitted_translations: usize,
}

impl From<&ConditionReport> for ConditionDto {
    fn from(c: &ConditionReport) -> Self {
        ConditionDto {
            holds: c.holds,
            max_residual: sig12(c.max_residual),
            constants: c.constants.iter().map(|&v| sig12(v)).collect(),
            fitted_translations: c.fitted_translations.len(),
        }
    }
}

/// One NDJSON line for an equality characterization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EqualityLine {
    pub name: String,
    pub context: serde_json::Value,
    pub equality_slack: f64,
    pub slack_tol: f64,
    pub is_equality: bool,
    pub cond1: ConditionDto,
    pub cond2: ConditionDto,
    pub cond3: ConditionDto,
    pub conditions_hold: bool,
    pub verdict_consistent: bool,
    pub seed: u64,
    pub config_hash: String,
}

pub fn equality_line(
    context: serde_json::Value,
    r: &CharacterizationReport,
    seed: u64,
    config_hash: &str,
) -> EqualityLine {
    EqualityLine {
        name: "equality".into(),
        context,
        equality_slack: sig12(r.equality_slack),
        slack_tol: r.slack_tol,
        is_equality: r.is_equality(),
        cond1: (&r.cond1).into(),
        cond2: (&r.cond2).into(),
        cond3: (&r.cond3).into(),
        conditions_hold: r.conditions_hold(),
        verdict_consistent: r.verdict_consistent,
        seed,
        config_hash: config_hash.into(),
    }
}

/// Hull-reduces a point set for compact output.
pub fn hull_vertices(points: &[Point]) -> Result<Vec<Point>, CliError> {
    Ok(convex_hull(points)?.vpoly.vertices)
}
