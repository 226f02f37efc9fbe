//! Log-space checks of projection-volume inequalities over coordinate covers.
//!
//! Purpose: every comparison this crate certifies reduces to products of
//! coordinate-projection volumes against binomial weights. `Body` caches
//! those volumes per kept-coordinate set so a sweep over many covers pays
//! for each hull once. Checks report both sides in log space together with
//! the signed slack, so equality cases sit at slack zero instead of at a
//! ratio of huge products. The product-measure audit replays the proof of
//! the projection bound step by step (slice splitting, a Holder step, a
//! moment comparison per part) with one shared Monte Carlo stream so the
//! three step slacks telescope to the total slack exactly, and an exact
//! rational route recomputes both sides of the main bound for integer
//! inputs.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::covers::{Cover, CoverError, IndexSet};
use crate::geometry::{
    self, rational, GeomError, Point, SimplicialDecomposition,
};
use crate::mathx;
use crate::quadrature::{integrate_gauss, integrate_mc_multi, QuadratureSpec, SliceSampler};

/// Default slack tolerance in log space for float checks.
pub const DEFAULT_LOG_TOL: f64 = 1e-7;

/// Largest slice dimension the product-measure audit can measure per sample.
const MAX_AUDIT_SLICE_DIM: usize = 2;

/// Absolute rounding floor for audit comparisons, needed when a constant
/// integrand makes the sample variance exactly zero. Sized for the rounding
/// a six-figure sequential accumulation can leave behind in log space.
const AUDIT_ABS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InequalityError {
    Cover(CoverError),
    Geometry(GeomError),
    /// The check needs a nonempty index set.
    SigmaEmpty,
    /// The local check got the full coordinate set; the global check covers it.
    SigmaFull,
    /// The global check needs a cover of the full coordinate set.
    SigmaNotFull,
    /// Cover ground size and body dimension disagree.
    GroundMismatch { cover: usize, body: usize },
    /// The set on the left must be contained in the set on the right.
    NotSubset,
    /// The body or a required projection has zero volume.
    ZeroVolume,
    /// Every part equals sigma, so the audited exponents are undefined.
    DegenerateCover,
    /// The audit measures slices only up to this many free coordinates.
    SliceDimTooLarge(usize),
    /// Moment comparison needs exponents 0 < gamma1 < gamma2.
    BadExponents,
}

impl From<CoverError> for InequalityError {
    fn from(e: CoverError) -> Self {
        InequalityError::Cover(e)
    }
}

impl From<GeomError> for InequalityError {
    fn from(e: GeomError) -> Self {
        InequalityError::Geometry(e)
    }
}

impl core::fmt::Display for InequalityError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            InequalityError::Cover(e) => write!(f, "cover: {e}"),
            InequalityError::Geometry(e) => write!(f, "geometry: {e}"),
            InequalityError::SigmaEmpty => write!(f, "index set is empty"),
            InequalityError::SigmaFull => {
                write!(f, "index set equals the full coordinate set; use the global check")
            }
            InequalityError::SigmaNotFull => {
                write!(f, "global check needs a cover of the full coordinate set")
            }
            InequalityError::GroundMismatch { cover, body } => {
                write!(f, "cover ground {cover} does not match body dimension {body}")
            }
            InequalityError::NotSubset => write!(f, "index set is not a subset"),
            InequalityError::ZeroVolume => {
                write!(f, "body or required projection has zero volume")
            }
            InequalityError::DegenerateCover => {
                write!(f, "every part equals sigma; audit exponents undefined")
            }
            InequalityError::SliceDimTooLarge(d) => {
                write!(f, "audit slice dimension {d} above supported maximum")
            }
            InequalityError::BadExponents => {
                write!(f, "moment comparison needs 0 < gamma1 < gamma2")
            }
        }
    }
}

impl core::error::Error for InequalityError {}

/// A full-dimensional convex body given by points whose hull it is, plus a
/// cache of coordinate-projection volumes keyed by the kept coordinate set.
#[derive(Debug, Clone)]
pub struct Body {
    dim: usize,
    vertices: Vec<Point>,
    cache: BTreeMap<u16, f64>,
}

impl Body {
    pub fn new(dim: usize, vertices: Vec<Point>) -> Result<Self, InequalityError> {
        if dim == 0 || dim > crate::covers::MAX_GROUND {
            return Err(InequalityError::Geometry(GeomError::DimensionMismatch));
        }
        if vertices.is_empty() {
            return Err(InequalityError::Geometry(GeomError::Empty));
        }
        for v in &vertices {
            if v.len() != dim {
                return Err(InequalityError::Geometry(GeomError::DimensionMismatch));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(InequalityError::Geometry(GeomError::NonFinite));
            }
        }
        Ok(Body { dim, vertices, cache: BTreeMap::new() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Volume of the projection onto the coordinates in `keep`. The empty
    /// projection is a point with zero-dimensional volume one.
    pub fn vol_keep(&mut self, keep: IndexSet) -> Result<f64, InequalityError> {
        if keep.ground_n() != self.dim {
            return Err(InequalityError::GroundMismatch {
                cover: keep.ground_n(),
                body: self.dim,
            });
        }
        if keep.is_empty() {
            return Ok(1.0);
        }
        if let Some(&v) = self.cache.get(&keep.bits()) {
            return Ok(v);
        }
        let cols: Vec<usize> = keep.iter().map(|i| i - 1).collect();
        let pts = geometry::project(&self.vertices, &cols);
        let v = geometry::volume_in_dim(&pts, cols.len())?;
        self.cache.insert(keep.bits(), v);
        Ok(v)
    }

    /// Volume of the projection that drops the coordinates in `drop`.
    pub fn vol_drop(&mut self, drop: IndexSet) -> Result<f64, InequalityError> {
        self.vol_keep(drop.complement())
    }

    /// Ambient volume of the body itself.
    pub fn volume(&mut self) -> Result<f64, InequalityError> {
        let full = IndexSet::full(self.dim).map_err(InequalityError::Cover)?;
        self.vol_keep(full)
    }
}

/// Both sides of one product inequality in log space. `slack_log` is
/// `rhs_log - lhs_log`; the inequality holds when it is at least `-tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityReport {
    pub lhs_log: f64,
    pub rhs_log: f64,
    pub slack_log: f64,
    pub tol: f64,
    pub holds: bool,
}

impl InequalityReport {
    fn new(lhs_log: f64, rhs_log: f64, tol: f64) -> Self {
        let slack_log = rhs_log - lhs_log;
        InequalityReport { lhs_log, rhs_log, slack_log, tol, holds: slack_log >= -tol }
    }
}

fn positive_log(v: f64) -> Result<f64, InequalityError> {
    if v <= 0.0 || !v.is_finite() {
        return Err(InequalityError::ZeroVolume);
    }
    Ok(mathx::ln(v))
}

/// Global product bound: for an s-cover of the full coordinate set, the
/// body volume to the s-th power is at most the product of the projection
/// volumes onto the kept coordinates of each part.
pub fn check_bt(body: &mut Body, cover: &Cover, tol: f64) -> Result<InequalityReport, InequalityError> {
    let n = body.dim();
    if cover.sigma().ground_n() != n {
        return Err(InequalityError::GroundMismatch {
            cover: cover.sigma().ground_n(),
            body: n,
        });
    }
    let full = IndexSet::full(n)?;
    if cover.sigma() != full {
        return Err(InequalityError::SigmaNotFull);
    }
    let lhs_log = cover.s() as f64 * positive_log(body.volume()?)?;
    let mut rhs_log = 0.0;
    for part in cover.parts() {
        rhs_log += positive_log(body.vol_keep(*part)?)?;
    }
    Ok(InequalityReport::new(lhs_log, rhs_log, tol))
}

fn validate_local(body: &Body, cover: &Cover) -> Result<(), InequalityError> {
    let n = body.dim();
    let sigma = cover.sigma();
    if sigma.ground_n() != n {
        return Err(InequalityError::GroundMismatch { cover: sigma.ground_n(), body: n });
    }
    if sigma.is_empty() {
        return Err(InequalityError::SigmaEmpty);
    }
    if sigma.len() == n {
        return Err(InequalityError::SigmaFull);
    }
    Ok(())
}

/// Local product bound for an s-cover of a proper coordinate set sigma:
///
///   vol(K)^(m-s) vol(K drop sigma)^s
///     <= [prod_i C(n-|sigma_i|, n-|sigma|) / C(n, n-|sigma|)^(m-s)]
///        prod_i vol(K drop sigma_i).
pub fn check_local_bt(
    body: &mut Body,
    cover: &Cover,
    tol: f64,
) -> Result<InequalityReport, InequalityError> {
    validate_local(body, cover)?;
    let n = body.dim() as u32;
    let sigma = cover.sigma();
    let co_dim = n - sigma.len() as u32;
    let ms = (cover.m() as u32 - cover.s()) as f64;
    let lhs_log = ms * positive_log(body.volume()?)?
        + cover.s() as f64 * positive_log(body.vol_drop(sigma)?)?;
    let mut rhs_log = -ms * mathx::ln_binomial(n, co_dim);
    for part in cover.parts() {
        rhs_log += mathx::ln_binomial(n - part.len() as u32, co_dim);
        rhs_log += positive_log(body.vol_drop(*part)?)?;
    }
    Ok(InequalityReport::new(lhs_log, rhs_log, tol))
}

/// Normalized projection ratio `x_sigma`: the body volume against the
/// projection dropping sigma, scaled by C(n, n-|sigma|).
pub fn x_sigma(body: &mut Body, sigma: IndexSet) -> Result<f64, InequalityError> {
    let n = body.dim() as u32;
    if sigma.ground_n() != body.dim() {
        return Err(InequalityError::GroundMismatch { cover: sigma.ground_n(), body: body.dim() });
    }
    if sigma.is_empty() {
        return Err(InequalityError::SigmaEmpty);
    }
    if sigma.len() == body.dim() {
        return Err(InequalityError::SigmaFull);
    }
    let co_dim = n - sigma.len() as u32;
    let vol = body.volume()?;
    let base = body.vol_drop(sigma)?;
    if vol <= 0.0 || base <= 0.0 {
        return Err(InequalityError::ZeroVolume);
    }
    Ok(mathx::binomial(n, co_dim) as f64 * vol / base)
}

/// Normalized ratio cap `d_tau` for `tau` inside sigma: the projection
/// keeping the dropped-sigma block plus tau against the base projection,
/// scaled by C(n-|sigma|+|tau|, n-|sigma|). `d_empty` is one and `d_sigma`
/// equals `x_sigma`.
pub fn d_tau(body: &mut Body, sigma: IndexSet, tau: IndexSet) -> Result<f64, InequalityError> {
    let n = body.dim() as u32;
    if sigma.ground_n() != body.dim() || tau.ground_n() != body.dim() {
        return Err(InequalityError::GroundMismatch { cover: sigma.ground_n(), body: body.dim() });
    }
    if !tau.is_subset(&sigma) {
        return Err(InequalityError::NotSubset);
    }
    if tau.is_empty() {
        return Ok(1.0);
    }
    let co_dim = n - sigma.len() as u32;
    let base = body.vol_drop(sigma)?;
    let upper = body.vol_drop(sigma.difference(&tau))?;
    if base <= 0.0 || upper <= 0.0 {
        return Err(InequalityError::ZeroVolume);
    }
    Ok(mathx::binomial(co_dim + tau.len() as u32, co_dim) as f64 * upper / base)
}

/// The same local bound rearranged as a ratio inequality,
/// `x_sigma^(m-s) <= prod_j d_(sigma minus sigma_j)`, evaluated through the
/// normalized ratios instead of raw projection products. Its slack agrees
/// with `check_local_bt` on the same cover to rounding error, which gives a
/// second route through different bookkeeping.
pub fn check_local_bt_ratio_form(
    body: &mut Body,
    cover: &Cover,
    tol: f64,
) -> Result<InequalityReport, InequalityError> {
    validate_local(body, cover)?;
    let sigma = cover.sigma();
    let ms = (cover.m() as u32 - cover.s()) as f64;
    let lhs_log = ms * mathx::ln(x_sigma(body, sigma)?);
    let mut rhs_log = 0.0;
    for part in cover.parts() {
        rhs_log += mathx::ln(d_tau(body, sigma, sigma.difference(part))?);
    }
    Ok(InequalityReport::new(lhs_log, rhs_log, tol))
}

/// Chain bound for one subset tau of sigma, the singleton-cover instance of
/// the local bound on the projected body:
///
///   C(n-|sigma|+|tau|, n-|sigma|) vol(K drop (sigma minus tau)) / vol(K drop sigma)
///     <= prod_{j in tau} C(n-|sigma|+1, n-|sigma|)
///        vol(K drop (sigma minus {j})) / vol(K drop sigma).
///
/// Both sides are one when tau is empty.
pub fn check_tau_chain(
    body: &mut Body,
    sigma: IndexSet,
    tau: IndexSet,
    tol: f64,
) -> Result<InequalityReport, InequalityError> {
    let n = body.dim();
    if sigma.ground_n() != n || tau.ground_n() != n {
        return Err(InequalityError::GroundMismatch { cover: sigma.ground_n(), body: n });
    }
    if sigma.is_empty() {
        return Err(InequalityError::SigmaEmpty);
    }
    if sigma.len() == n {
        return Err(InequalityError::SigmaFull);
    }
    if !tau.is_subset(&sigma) {
        return Err(InequalityError::NotSubset);
    }
    if tau.is_empty() {
        return Ok(InequalityReport::new(0.0, 0.0, tol));
    }
    let lhs_log = mathx::ln(d_tau(body, sigma, tau)?);
    let mut rhs_log = 0.0;
    for j in tau.iter() {
        let single = IndexSet::from_elems(n, &[j])?;
        rhs_log += mathx::ln(d_tau(body, sigma, single)?);
    }
    Ok(InequalityReport::new(lhs_log, rhs_log, tol))
}

fn rational_binomial(n: u32, k: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(mathx::binomial(n, k)))
}

fn rational_pow(base: &BigRational, exp: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

fn rational_proj_volume(
    vertices: &[Vec<BigRational>],
    keep: IndexSet,
) -> Result<BigRational, InequalityError> {
    if keep.is_empty() {
        return Ok(BigRational::one());
    }
    let cols: Vec<usize> = keep.iter().map(|i| i - 1).collect();
    let pts = rational::rational_project(vertices, &cols);
    Ok(rational::rational_volume(&pts)?)
}

/// Exact rational evaluation of both sides of the local product bound.
/// Intended for integer or rational vertex data where the float route
/// needs an independent exact witness.
pub fn local_bt_sides_rational(
    vertices: &[Vec<BigRational>],
    cover: &Cover,
) -> Result<(BigRational, BigRational), InequalityError> {
    let sigma = cover.sigma();
    let n = sigma.ground_n();
    if vertices.is_empty() {
        return Err(InequalityError::Geometry(GeomError::Empty));
    }
    if vertices[0].len() != n {
        return Err(InequalityError::GroundMismatch { cover: n, body: vertices[0].len() });
    }
    if sigma.is_empty() {
        return Err(InequalityError::SigmaEmpty);
    }
    if sigma.len() == n {
        return Err(InequalityError::SigmaFull);
    }
    let nn = n as u32;
    let co_dim = nn - sigma.len() as u32;
    let ms = cover.m() as u32 - cover.s();
    let full = IndexSet::full(n)?;
    let vol = rational_proj_volume(vertices, full)?;
    let base = rational_proj_volume(vertices, sigma.complement())?;
    let lhs = rational_pow(&vol, ms) * rational_pow(&base, cover.s());
    let mut rhs = BigRational::one() / rational_pow(&rational_binomial(nn, co_dim), ms);
    for part in cover.parts() {
        rhs *= rational_binomial(nn - part.len() as u32, co_dim);
        rhs *= rational_proj_volume(vertices, part.complement())?;
    }
    Ok((lhs, rhs))
}

/// One audited step: both sides in log space, the slack, the Monte Carlo
/// standard error of the slack, and whether the slack clears `-4 se`
/// (or `|slack| <= 4 se` for the consistency rows).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditStep {
    pub lhs_log: f64,
    pub rhs_log: f64,
    pub slack_log: f64,
    pub std_error: f64,
    pub holds: bool,
}

/// Step-by-step audit of the product bound proof on one body and cover.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    /// Slice splitting, Holder, and the combined per-part moment step.
    pub steps: [AuditStep; 3],
    /// Per-part moment comparison before combination, in proof order.
    pub moment_parts: Vec<AuditStep>,
    /// Per-part slice-integral consistency against the hull projection
    /// volume, `|slack| <= 4 se` rows.
    pub fibration_parts: Vec<AuditStep>,
    /// Sum of the three step slacks; telescopes to the total by shared
    /// sampling, up to the slice-integral noise.
    pub sum_slack_log: f64,
    /// Total slack of the local product bound from hull volumes alone.
    pub total_slack_log: f64,
    /// Absolute gap between the slack sum and the hull total.
    pub telescope_gap: f64,
    /// Five times the combined standard error budget for that gap.
    pub telescope_tol: f64,
    pub samples: usize,
    pub holds: bool,
}

struct AuditPart {
    part: IndexSet,
    slice_dim: usize,
    sampler: SliceSampler,
    free_pos: Vec<usize>,
    holder_exp: f64,
    moment_exp: f64,
    vol_hull: f64,
}

/// Replays the proof of the local product bound on one body and cover with
/// a shared stratified Monte Carlo stream:
///
///   step 1  vol(K)^(m-s) against the integral of the per-slice projection
///           product over the base projection,
///   step 2  that integral against the split product of full moments, and
///   step 3  each full moment against the lower moment it bounds, combined
///           with the exact binomial weights.
///
/// Sharing one stream makes the three step slacks telescope to the total
/// slack exactly, except for the slice-integral noise that the fibration
/// rows measure.
pub fn audit_local_bt(
    body: &mut Body,
    cover: &Cover,
    samples: usize,
    seed: u64,
) -> Result<AuditReport, InequalityError> {
    validate_local(body, cover)?;
    let n = body.dim();
    let nn = n as u32;
    let sigma = cover.sigma();
    let sig_len = sigma.len() as f64;
    let co_dim = nn - sigma.len() as u32;
    let ms = cover.m() - cover.s() as usize;
    if ms == 0 {
        return Err(InequalityError::DegenerateCover);
    }
    let msf = ms as f64;

    // Base projection: drop every sigma coordinate, keep the rest.
    let base_cols: Vec<usize> = sigma.complement().iter().map(|i| i - 1).collect();
    let base_pts = geometry::project(&body.vertices, &base_cols);
    let base_hull = geometry::convex_hull(&base_pts)?;
    let vol_base = base_hull.decomposition.total_volume;
    let vol_body = body.volume()?;
    if vol_base <= 0.0 || vol_body <= 0.0 {
        return Err(InequalityError::ZeroVolume);
    }

    // Per part: hull of the projection keeping base plus the slice block,
    // and a slice sampler fixing the base coordinates.
    let mut parts: Vec<AuditPart> = Vec::new();
    for part in cover.parts() {
        let slice_set = sigma.difference(part);
        let slice_dim = slice_set.len();
        if slice_dim == 0 {
            // A part equal to sigma contributes a point slice with
            // zero-dimensional volume one; it drops out of every step.
            continue;
        }
        if slice_dim > MAX_AUDIT_SLICE_DIM {
            return Err(InequalityError::SliceDimTooLarge(slice_dim));
        }
        let keep = part.complement();
        let cols: Vec<usize> = keep.iter().map(|i| i - 1).collect();
        let pts = geometry::project(&body.vertices, &cols);
        let hull = geometry::convex_hull(&pts)?;
        let vol_hull = hull.decomposition.total_volume;
        if vol_hull <= 0.0 {
            return Err(InequalityError::ZeroVolume);
        }
        let fixed_pos: Vec<usize> = cols
            .iter()
            .enumerate()
            .filter(|(_, c)| !sigma.contains(**c + 1))
            .map(|(p, _)| p)
            .collect();
        let free_pos: Vec<usize> = cols
            .iter()
            .enumerate()
            .filter(|(_, c)| sigma.contains(**c + 1))
            .map(|(p, _)| p)
            .collect();
        let sampler = SliceSampler::new(&hull.hpoly, &fixed_pos)?;
        let sdf = slice_dim as f64;
        parts.push(AuditPart {
            part: *part,
            slice_dim,
            sampler,
            free_pos,
            // The slice-level product bound raises every factor to
            // 1/(m - s); the per-part slice dimension enters only through
            // the Holder weights d_i / ((m - s) |sigma|).
            holder_exp: 1.0 / msf,
            moment_exp: sig_len / sdf,
            vol_hull,
        });
    }
    let np = parts.len();

    // Shared stream: component 0 is the slice-product integrand, then per
    // part the full moment and the lower moment.
    let width = 1 + 2 * np;
    let mut scratch: Vec<Point> = Vec::new();
    let mut free1: Vec<f64> = Vec::new();
    let mut free2: Vec<Point> = Vec::new();
    let estimates = integrate_mc_multi(
        &base_hull.decomposition,
        samples,
        seed,
        width,
        |y, out| {
            out[0] = 1.0;
            for (k, p) in parts.iter().enumerate() {
                p.sampler.eval(y, &mut scratch);
                let v = match p.slice_dim {
                    1 => {
                        free1.clear();
                        free1.extend(scratch.iter().map(|q| q[p.free_pos[0]]));
                        let mut lo = f64::INFINITY;
                        let mut hi = f64::NEG_INFINITY;
                        for &x in &free1 {
                            lo = lo.min(x);
                            hi = hi.max(x);
                        }
                        if hi > lo { hi - lo } else { 0.0 }
                    }
                    _ => {
                        free2.clear();
                        free2.extend(
                            scratch
                                .iter()
                                .map(|q| alloc::vec![q[p.free_pos[0]], q[p.free_pos[1]]]),
                        );
                        geometry::convex_area_2d(&free2)
                    }
                };
                out[0] *= mathx::powf(v, p.holder_exp);
                out[1 + 2 * k] = mathx::powf(v, p.moment_exp);
                out[2 + 2 * k] = v;
            }
        },
    );

    let mix = &estimates[0];
    if mix.value <= 0.0 {
        return Err(InequalityError::ZeroVolume);
    }

    // Step 1: body volume against the slice-product integral, both to the
    // (m - s) power so the chain composes additively in log space.
    let lhs1 = msf * mathx::ln(vol_body);
    let rhs1 = msf * mathx::ln(mix.value);
    let se1 = msf * mix.std_error / mix.value;

    // Step 2: the split product of full moments.
    let ln_cn = mathx::ln_binomial(nn, co_dim);
    let mut rhs2 = 0.0;
    let mut se2_hi = 0.0;
    for (k, p) in parts.iter().enumerate() {
        let est = &estimates[1 + 2 * k];
        if est.value <= 0.0 {
            return Err(InequalityError::ZeroVolume);
        }
        let w = p.slice_dim as f64 / sig_len;
        rhs2 += w * mathx::ln(est.value);
        se2_hi += w * est.std_error / est.value;
    }
    let se2 = se1 + se2_hi;

    // Step 3: per-part moment comparison. The full-moment mean with weight
    // C(n, n-|sigma|) is bounded by the lower-moment mean with weight
    // C(n-|sigma_i|, n-|sigma|); combining with exponents |sigma|-|sigma_i|
    // turns the product of bounds into the total right-hand side.
    let mut rhs3 = 0.0;
    let mut se3 = 0.0;
    let mut moment_parts = Vec::with_capacity(np);
    let mut fibration_parts = Vec::with_capacity(np);
    let mut telescope_se = 0.0;
    for (k, p) in parts.iter().enumerate() {
        let full = &estimates[1 + 2 * k];
        let low = &estimates[2 + 2 * k];
        if low.value <= 0.0 {
            return Err(InequalityError::ZeroVolume);
        }
        let sdf = p.slice_dim as f64;
        let ln_ci = mathx::ln_binomial(nn - p.part.len() as u32, co_dim);
        let lhs_m = (ln_cn - mathx::ln(vol_base) + mathx::ln(full.value)) / sig_len;
        let rhs_m = (ln_ci - mathx::ln(vol_base) + mathx::ln(low.value)) / sdf;
        let se_m = full.std_error / full.value / sig_len + low.std_error / low.value / sdf;
        let slack_m = rhs_m - lhs_m;
        moment_parts.push(AuditStep {
            lhs_log: lhs_m,
            rhs_log: rhs_m,
            slack_log: slack_m,
            std_error: se_m,
            holds: slack_m >= -(4.0 * se_m + AUDIT_ABS_TOL),
        });
        rhs3 += sdf / sig_len * (mathx::ln(vol_base) - ln_cn) + ln_ci
            + mathx::ln(low.value)
            - mathx::ln(vol_base);
        se3 += sdf * se_m;

        let ln_low = mathx::ln(low.value);
        let ln_hull = mathx::ln(p.vol_hull);
        let se_f = low.std_error / low.value;
        let gap = ln_low - ln_hull;
        fibration_parts.push(AuditStep {
            lhs_log: ln_hull,
            rhs_log: ln_low,
            slack_log: gap,
            std_error: se_f,
            holds: f64::abs(gap) <= 4.0 * se_f + AUDIT_ABS_TOL,
        });
        telescope_se += se_f;
    }

    let slack1 = rhs1 - lhs1;
    let slack2 = rhs2 - rhs1;
    let slack3 = rhs3 - rhs2;
    let steps = [
        AuditStep {
            lhs_log: lhs1,
            rhs_log: rhs1,
            slack_log: slack1,
            std_error: se1,
            holds: slack1 >= -(4.0 * se1 + AUDIT_ABS_TOL),
        },
        AuditStep {
            lhs_log: rhs1,
            rhs_log: rhs2,
            slack_log: slack2,
            std_error: se2,
            holds: slack2 >= -(4.0 * se2 + AUDIT_ABS_TOL),
        },
        AuditStep {
            lhs_log: rhs2,
            rhs_log: rhs3,
            slack_log: slack3,
            std_error: se3,
            holds: slack3 >= -(4.0 * se3 + AUDIT_ABS_TOL),
        },
    ];

    let total = check_local_bt(body, cover, DEFAULT_LOG_TOL)?;
    let sum_slack = slack1 + slack2 + slack3;
    let telescope_gap = f64::abs(sum_slack - total.slack_log);
    let telescope_tol = 5.0 * telescope_se + AUDIT_ABS_TOL;
    let holds = steps.iter().all(|s| s.holds)
        && moment_parts.iter().all(|s| s.holds)
        && fibration_parts.iter().all(|s| s.holds)
        && telescope_gap <= telescope_tol;
    Ok(AuditReport {
        steps,
        moment_parts,
        fibration_parts,
        sum_slack_log: sum_slack,
        total_slack_log: total.slack_log,
        telescope_gap,
        telescope_tol,
        samples,
        holds,
    })
}

/// A moment-comparison report: the gamma2-normalized mean on the left, the
/// gamma1-normalized mean on the right, in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerwaldReport {
    pub lhs_log: f64,
    pub rhs_log: f64,
    pub slack_log: f64,
    pub std_error: f64,
    pub holds: bool,
}

/// Moment comparison for a nonnegative concave profile `f` on a convex
/// domain: for 0 < gamma1 < gamma2,
///
///   ( C(gamma2+d, d) mean of f^gamma2 )^(1/gamma2)
///     <= ( C(gamma1+d, d) mean of f^gamma1 )^(1/gamma1),
///
/// with equality exactly when the hypograph of f is a cone over the domain.
pub fn berwald_check<F>(
    domain: &SimplicialDecomposition,
    f: F,
    gamma1: f64,
    gamma2: f64,
    spec: QuadratureSpec,
    tol: f64,
) -> Result<BerwaldReport, InequalityError>
where
    F: Fn(&[f64]) -> f64,
{
    if !(gamma1 > 0.0 && gamma2 > gamma1) {
        return Err(InequalityError::BadExponents);
    }
    let d = domain.dim as u32;
    let vol = domain.total_volume;
    if vol <= 0.0 {
        return Err(InequalityError::ZeroVolume);
    }
    let (i1, i2, se1, se2) = match spec {
        QuadratureSpec::Gauss { order } => {
            let i1 = integrate_gauss(domain, order, |x| mathx::powf(f(x), gamma1))?;
            let i2 = integrate_gauss(domain, order, |x| mathx::powf(f(x), gamma2))?;
            (i1, i2, 0.0, 0.0)
        }
        QuadratureSpec::MonteCarlo { samples, seed } => {
            let est = integrate_mc_multi(domain, samples, seed, 2, |x, out| {
                let v = f(x);
                out[0] = mathx::powf(v, gamma1);
                out[1] = mathx::powf(v, gamma2);
            });
            (est[0].value, est[1].value, est[0].std_error, est[1].std_error)
        }
    };
    if i1 <= 0.0 || i2 <= 0.0 {
        return Err(InequalityError::ZeroVolume);
    }
    let ln_c1 = mathx::ln(mathx::binomial_real(gamma1, d));
    let ln_c2 = mathx::ln(mathx::binomial_real(gamma2, d));
    let lhs_log = (ln_c2 + mathx::ln(i2) - mathx::ln(vol)) / gamma2;
    let rhs_log = (ln_c1 + mathx::ln(i1) - mathx::ln(vol)) / gamma1;
    let std_error = se2 / i2 / gamma2 + se1 / i1 / gamma1;
    let slack_log = rhs_log - lhs_log;
    Ok(BerwaldReport {
        lhs_log,
        rhs_log,
        slack_log,
        std_error,
        holds: slack_log >= -(tol + 4.0 * std_error),
    })
}
