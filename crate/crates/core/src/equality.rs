//! Equality-case analysis for the local projection inequality.
//!
//! Purpose: decide, for a body and a cover of a proper coordinate set,
//! whether the product bound is attained, and verify the structural
//! characterization that equality forces: (1) every slice through the
//! complementary subspace splits as a translated sum of its atom
//! projections, (2) each partial sum is a translated scaling of the
//! reference slice at the peak point, with the scaling given by the gauge
//! of the base projection, and (3) normalized partial-sum volumes keep a
//! constant ratio across parts. The module also fits the conical-hypograph
//! form of a slice-volume profile, the one-subspace seed of condition (2).
//!
//! All shape tests are translation invariant: the fitted translations are
//! reported, never assumed. Residuals are halfspace-violation depths
//! normalized by the body's projection diameter, so a residual of zero is
//! exact set equality and thresholds transfer across scales.

use alloc::vec::Vec;

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::covers::{complement_cover, induced_one_cover, validate_cover, Cover, CoverError, IndexSet};
use crate::geometry::{
    self, convex_hull, minkowski_functional, minkowski_sum, volume_in_dim, GeomError, Hull,
    Point, VPolytope,
};
use crate::inequalities::{check_local_bt, Body, InequalityError, DEFAULT_LOG_TOL};
use crate::mathx;
use crate::quadrature::{grid_interior, SliceSampler};

/// Residual threshold for a condition to be reported as holding.
pub const RESIDUAL_TOL: f64 = 1e-5;

/// Stricter residual threshold used for the reverse consistency direction:
/// conditions this clean must be matched by equality of the bound.
pub const RESIDUAL_STRICT_TOL: f64 = 1e-7;

/// Threshold for the conical fit and its slice-scaling verdict. The peak
/// locator's precision is bounded by the slice machinery's 1e-7-relative
/// resolution, so the verdict threshold sits two decades above it.
pub const FIT_TOL: f64 = 1e-5;

/// Largest slice dimension the shape tests handle exactly.
const MAX_SLICE_DIM: usize = 4;

/// Fractional pull of sample nodes toward the base centroid, keeping every
/// slice full-dimensional.
const PULL_IN: f64 = 1e-6;

/// Seed for supplemental interior sample points; fixed so reports are a
/// pure function of the inputs.
const SAMPLE_SEED: u64 = 0x45514c;

#[derive(Debug, Clone, PartialEq)]
pub enum EqualityError {
    Inequality(InequalityError),
    Cover(CoverError),
    Geometry(GeomError),
    /// Shape tests are exact only up to this slice dimension.
    SliceDimTooLarge(usize),
    /// Every part equals the covered set; nothing is left to characterize.
    DegenerateCover,
    /// No usable sample nodes inside the base projection.
    EmptyBase,
}

impl From<InequalityError> for EqualityError {
    fn from(e: InequalityError) -> Self {
        EqualityError::Inequality(e)
    }
}

impl From<CoverError> for EqualityError {
    fn from(e: CoverError) -> Self {
        EqualityError::Cover(e)
    }
}

impl From<GeomError> for EqualityError {
    fn from(e: GeomError) -> Self {
        EqualityError::Geometry(e)
    }
}

impl core::fmt::Display for EqualityError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EqualityError::Inequality(e) => write!(f, "inequality: {e}"),
            EqualityError::Cover(e) => write!(f, "cover: {e}"),
            EqualityError::Geometry(e) => write!(f, "geometry: {e}"),
            EqualityError::SliceDimTooLarge(d) => {
                write!(f, "slice dimension {d} above shape-test limit {MAX_SLICE_DIM}")
            }
            EqualityError::DegenerateCover => {
                write!(f, "cover has no proper part, nothing to characterize")
            }
            EqualityError::EmptyBase => write!(f, "no sample nodes inside the base projection"),
        }
    }
}

impl core::error::Error for EqualityError {}

fn uniform01(rng: &mut ChaCha12Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

fn centroid(points: &[Point]) -> Point {
    let d = points[0].len();
    let k = points.len() as f64;
    (0..d).map(|c| points.iter().map(|p| p[c]).sum::<f64>() / k).collect()
}

/// Greedily merges points closer than the slice machinery's resolution.
/// Slice samplers emit one candidate per facet tuple under a 1e-7-relative
/// feasibility band, so a slice vertex on several facets appears as a
/// cluster of near-duplicates up to that band; unmerged they poison the
/// hull's extreme-point classification. The representative is a cluster
/// member, so points move by the cluster radius, not the full tolerance.
fn snap(points: Vec<Point>) -> Vec<Point> {
    let mut scale = 1e-12f64;
    for p in &points {
        for x in p {
            scale = scale.max(f64::abs(*x));
        }
    }
    let tol = 3e-7 * scale;
    let mut out: Vec<Point> = Vec::with_capacity(points.len());
    for p in points {
        if !out
            .iter()
            .any(|q| q.iter().zip(&p).all(|(a, b)| f64::abs(a - b) <= tol))
        {
            out.push(p);
        }
    }
    out
}

/// Deepest halfspace violation of the hulls of `a` and `b` against each
/// other after centering both at their extreme-point centroids, divided by
/// `scale`. Zero exactly when the hulls are translates.
fn translation_residual(a: &[Point], b: &[Point], scale: f64) -> Result<f64, GeomError> {
    let a = &snap(a.to_vec());
    let b = &snap(b.to_vec());
    let dim = a.first().map(|p| p.len()).unwrap_or(0);
    let degenerate = |pts: &[Point]| match convex_hull(pts) {
        Ok(h) => Ok(Some(h)),
        Err(GeomError::NotFullDimensional) => Ok(None),
        Err(e) => Err(e),
    };
    let ha = degenerate(a)?;
    let hb = degenerate(b)?;
    let depth = match (ha, hb) {
        (Some(ha), Some(hb)) => {
            let ca = centroid(&ha.vpoly.vertices);
            let cb = centroid(&hb.vpoly.vertices);
            let violation = |h: &Hull, c_h: &Point, v: &Point, c_v: &Point| -> f64 {
                // Centered point against centered halfspaces; shifting the
                // offsets is cheaper than shifting the vertices.
                let x: Point = (0..dim).map(|k| v[k] - c_v[k] + c_h[k]).collect();
                f64::max(0.0, -h.hpoly.margin(&x))
            };
            let mut worst = 0.0f64;
            for v in &ha.vpoly.vertices {
                worst = worst.max(violation(&hb, &cb, v, &ca));
            }
            for v in &hb.vpoly.vertices {
                worst = worst.max(violation(&ha, &ca, v, &cb));
            }
            worst
        }
        _ => {
            // Degenerate slice: compare raw generator sets by two-sided
            // nearest-point distance after centering.
            let ca = centroid(a);
            let cb = centroid(b);
            let shift = |pts: &[Point], c: &Point| -> Vec<Point> {
                pts.iter()
                    .map(|p| p.iter().zip(c).map(|(x, y)| x - y).collect())
                    .collect()
            };
            let sa = shift(a, &ca);
            let sb = shift(b, &cb);
            let one_sided = |from: &[Point], to: &[Point]| -> f64 {
                let mut worst = 0.0f64;
                for p in from {
                    let mut best = f64::INFINITY;
                    for q in to {
                        let d2: f64 =
                            p.iter().zip(q).map(|(x, y)| (x - y) * (x - y)).sum();
                        best = best.min(d2);
                    }
                    worst = worst.max(mathx::sqrt(best));
                }
                worst
            };
            f64::max(one_sided(&sa, &sb), one_sided(&sb, &sa))
        }
    };
    Ok(depth / scale)
}

/// Sample nodes inside a full-dimensional hull: a coarse interior grid
/// topped up with seeded uniform draws from the simplicial decomposition,
/// every node pulled slightly toward the centroid.
fn sample_nodes(hull: &Hull, samples: usize) -> Result<Vec<Point>, EqualityError> {
    let d = hull.vpoly.dim;
    let verts = &hull.vpoly.vertices;
    let mut lo = verts[0].clone();
    let mut hi = verts[0].clone();
    for v in verts {
        for c in 0..d {
            lo[c] = lo[c].min(v[c]);
            hi[c] = hi[c].max(v[c]);
        }
    }
    let target = samples.max(8);
    let mut per_axis = 2usize;
    while per_axis < 64 && {
        let mut total = 1usize;
        for _ in 0..d {
            total = total.saturating_mul(per_axis + 1);
        }
        total <= target
    } {
        per_axis += 1;
    }
    let mut nodes = grid_interior(&hull.hpoly, &lo, &hi, per_axis, 1e-3)?;
    let center = centroid(verts);
    nodes.push(center.clone());

    if nodes.len() < target {
        let mut rng = ChaCha12Rng::seed_from_u64(SAMPLE_SEED);
        let decomp = &hull.decomposition;
        while nodes.len() < target {
            // Pick a simplex with probability proportional to volume, then
            // a uniform point inside it via normalized exponentials.
            let mut pick = uniform01(&mut rng) * decomp.total_volume;
            let mut which = 0usize;
            for (i, v) in decomp.volumes.iter().enumerate() {
                which = i;
                if pick <= *v {
                    break;
                }
                pick -= *v;
            }
            let simplex = &decomp.simplices[which];
            let mut w: Vec<f64> =
                simplex.iter().map(|_| -mathx::ln(uniform01(&mut rng))).collect();
            let total: f64 = w.iter().sum();
            for x in &mut w {
                *x /= total;
            }
            let mut p = alloc::vec![0.0; d];
            for (wi, &vi) in w.iter().zip(simplex) {
                for c in 0..d {
                    p[c] += wi * decomp.points[vi][c];
                }
            }
            nodes.push(p);
        }
    }
    for p in &mut nodes {
        for c in 0..d {
            p[c] += PULL_IN * (center[c] - p[c]);
        }
    }
    if nodes.is_empty() {
        return Err(EqualityError::EmptyBase);
    }
    Ok(nodes)
}

/// Pattern search maximizing `f` from `start` inside `hull`, halving the
/// step until it is negligible against the bounding-box diameter.
fn refine_max<F: FnMut(&[f64]) -> f64>(
    hull: &Hull,
    start: &[f64],
    mut f: F,
) -> (Point, f64) {
    let d = hull.vpoly.dim;
    let mut diam = 0.0f64;
    for v in &hull.vpoly.vertices {
        for w in &hull.vpoly.vertices {
            let dist: f64 = v.iter().zip(w).map(|(x, y)| (x - y) * (x - y)).sum();
            diam = diam.max(dist);
        }
    }
    diam = mathx::sqrt(diam).max(1e-12);
    let mut best = start.to_vec();
    let mut best_val = f(&best);
    let mut step = 0.25 * diam;
    while step > 1e-10 * diam {
        let mut improved = false;
        for c in 0..d {
            for dir in [1.0, -1.0] {
                let mut probe = best.clone();
                probe[c] += dir * step;
                if !hull.hpoly.contains(&probe, 0.0) {
                    continue;
                }
                let val = f(&probe);
                if val > best_val + 1e-15 {
                    best = probe;
                    best_val = val;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, best_val)
}

/// Slice-scaling verdict attached to a conical fit: whether every sampled
/// slice is a translated gauge-scaling of the peak slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceScalingReport {
    pub max_residual: f64,
    pub holds: bool,
}

/// Fit of a slice-volume profile to the conical form
/// `f(y) = (1 - gauge(y - y0)) * sup`.
#[derive(Debug, Clone)]
pub struct ConicalFit {
    /// Projection of the body onto the profile coordinates.
    pub base: VPolytope,
    /// Fitted peak, in the profile coordinates.
    pub y0: Point,
    /// Profile value at the peak.
    pub sup_value: f64,
    /// Max deviation of the profile from the conical form over the sample
    /// nodes, relative to the peak value.
    pub residual: f64,
    pub holds: bool,
    pub slice_scaling: SliceScalingReport,
}

/// Fits the normalized slice-volume profile of `body` along the coordinates
/// in `h_set` to the conical form, and tests each sampled slice against a
/// translated gauge-scaling of the peak slice.
pub fn conical_hypograph_check(
    body: &Body,
    h_set: IndexSet,
    samples: usize,
    seed: u64,
) -> Result<ConicalFit, EqualityError> {
    let n = body.dim();
    if h_set.ground_n() != n {
        return Err(EqualityError::Inequality(InequalityError::GroundMismatch {
            cover: h_set.ground_n(),
            body: n,
        }));
    }
    if h_set.is_empty() || h_set.len() == n {
        return Err(EqualityError::Inequality(InequalityError::SigmaEmpty));
    }
    let slice_dim = n - h_set.len();
    if slice_dim > MAX_SLICE_DIM {
        return Err(EqualityError::SliceDimTooLarge(slice_dim));
    }
    let h_cols: Vec<usize> = h_set.iter().map(|i| i - 1).collect();
    let free_cols: Vec<usize> = h_set.complement().iter().map(|i| i - 1).collect();
    let base_pts = geometry::project(body.vertices(), &h_cols);
    let base = convex_hull(&base_pts)?;
    let body_hull = convex_hull(body.vertices())?;
    let sampler = SliceSampler::new(&body_hull.hpoly, &h_cols)?;

    let mut scratch: Vec<Point> = Vec::new();
    let slice_at = |y: &[f64], scratch: &mut Vec<Point>| -> Result<Vec<Point>, GeomError> {
        sampler.eval(y, scratch);
        Ok(snap(geometry::project(scratch, &free_cols)))
    };
    let profile = |y: &[f64], scratch: &mut Vec<Point>| -> Result<f64, GeomError> {
        let pts = slice_at(y, scratch)?;
        let vol = volume_in_dim(&pts, slice_dim)?;
        Ok(mathx::powf(vol, 1.0 / slice_dim as f64))
    };

    let mut nodes = sample_nodes(&base, samples)?;
    // Extra seeded nodes so the caller can vary coverage independently.
    if seed != SAMPLE_SEED {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let center = centroid(&base.vpoly.vertices);
        let extra = samples / 4;
        for _ in 0..extra {
            let vs = &base.vpoly.vertices;
            let v = &vs[(rng.next_u64() as usize) % vs.len()];
            let t = uniform01(&mut rng);
            nodes.push(
                center
                    .iter()
                    .zip(v)
                    .map(|(c, x)| c + (1.0 - PULL_IN) * t * (x - c))
                    .collect(),
            );
        }
    }

    let mut best_idx = 0usize;
    let mut best_val = f64::NEG_INFINITY;
    let mut values = Vec::with_capacity(nodes.len());
    for (i, y) in nodes.iter().enumerate() {
        let v = profile(y, &mut scratch)?;
        values.push(v);
        if v > best_val {
            best_val = v;
            best_idx = i;
        }
    }
    if !(best_val > 0.0) {
        return Err(EqualityError::Inequality(InequalityError::ZeroVolume));
    }
    let mut err: Option<GeomError> = None;
    let (y0, sup_value) = refine_max(&base, &nodes[best_idx], |y| {
        match profile(y, &mut scratch) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                f64::NEG_INFINITY
            }
        }
    });
    if let Some(e) = err {
        return Err(EqualityError::Geometry(e));
    }

    let gauge_base: Vec<Point> = base
        .vpoly
        .vertices
        .iter()
        .map(|v| v.iter().zip(&y0).map(|(x, c)| x - c).collect())
        .collect();
    let gauge = |y: &[f64]| -> Result<f64, GeomError> {
        let x: Point = y.iter().zip(&y0).map(|(a, c)| a - c).collect();
        Ok(minkowski_functional(&gauge_base, &x)?.unwrap_or(f64::INFINITY))
    };

    let peak_slice = slice_at(&y0, &mut scratch)?;
    let peak_vol = volume_in_dim(&peak_slice, slice_dim)?;
    let mut body_scale = 1e-12f64;
    for v in body.vertices() {
        for &c in &free_cols {
            body_scale = body_scale.max(2.0 * f64::abs(v[c]));
        }
    }

    let mut residual = 0.0f64;
    let mut shape_residual = 0.0f64;
    for (y, &fv) in nodes.iter().zip(&values) {
        let factor = f64::max(0.0, 1.0 - gauge(y)?);
        residual = residual.max(f64::abs(fv - factor * sup_value) / sup_value);
        // Shape test only where both slices are comfortably solid.
        let tiny = 1e-10 * peak_vol;
        let scaled_vol = peak_vol * mathx::powf(factor, slice_dim as f64);
        if scaled_vol <= tiny || mathx::powf(fv, slice_dim as f64) <= tiny {
            continue;
        }
        let here = slice_at(y, &mut scratch)?;
        let factors = alloc::vec![factor; slice_dim];
        let shift = alloc::vec![0.0; slice_dim];
        let reference = geometry::scale_translate(&peak_slice, &factors, &shift);
        shape_residual =
            shape_residual.max(translation_residual(&here, &reference, body_scale)?);
    }

    Ok(ConicalFit {
        base: base.vpoly,
        y0,
        sup_value,
        residual,
        holds: residual <= FIT_TOL,
        slice_scaling: SliceScalingReport {
            max_residual: shape_residual,
            holds: shape_residual <= FIT_TOL,
        },
    })
}

/// One characterization condition: the worst residual over samples, the
/// fitted translations, and the fitted constants. Which constants are
/// reported depends on the condition: the slice-sum test reports none, the
/// gauge-scaling test reports the peak profile values, and the ratio test
/// reports the fitted ratio constants.
#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub holds: bool,
    pub max_residual: f64,
    pub fitted_translations: Vec<Point>,
    pub constants: Vec<f64>,
}

/// Joint verdict for one body and cover.
#[derive(Debug, Clone)]
pub struct CharacterizationReport {
    pub cond1: ConditionReport,
    pub cond2: ConditionReport,
    pub cond3: ConditionReport,
    /// Log slack of the product bound; zero means equality.
    pub equality_slack: f64,
    /// Slack threshold used for the equality verdict.
    pub slack_tol: f64,
    /// False when equality of the bound and the three conditions disagree
    /// in either direction at their stated tolerances.
    pub verdict_consistent: bool,
}

impl CharacterizationReport {
    pub fn is_equality(&self) -> bool {
        f64::abs(self.equality_slack) <= self.slack_tol
    }

    pub fn conditions_hold(&self) -> bool {
        self.cond1.holds && self.cond2.holds && self.cond3.holds
    }
}

/// One atom of the induced partition with its slice machinery: the sampler
/// runs over the projection keeping the atom plus the complement, and the
/// frame map sends sampler outputs into sigma-frame coordinates.
struct AtomSlicer {
    sampler: SliceSampler,
    sigma_frame: Vec<(usize, usize)>,
}

impl AtomSlicer {
    fn eval_frame(&self, y: &[f64], scratch: &mut Vec<Point>, frame_dim: usize) -> Vec<Point> {
        self.sampler.eval(y, scratch);
        snap(
            scratch
                .iter()
                .map(|p| {
                    let mut v = alloc::vec![0.0; frame_dim];
                    for &(pos, slot) in &self.sigma_frame {
                        v[slot] = p[pos];
                    }
                    v
                })
                .collect(),
        )
    }
}

/// Shared machinery for the three condition checks.
struct Analysis {
    sigma: IndexSet,
    sig_cols: Vec<usize>,
    atoms: Vec<AtomSlicer>,
    /// Proper parts with their sub-frame column selections (indices into
    /// the sigma frame) and their slice samplers.
    parts: Vec<PartSlicer>,
    nodes: Vec<Point>,
    y0: Point,
    /// Gauge base: projection vertices centered at the peak.
    gauge_base: Vec<Point>,
    lhs: SliceSampler,
    body_scale: f64,
}

struct PartSlicer {
    sub_cols: Vec<usize>,
    sub_dim: usize,
    sampler: SliceSampler,
    free_pos: Vec<usize>,
    /// Atoms contained in the complement of this part, as indices into
    /// `Analysis::atoms`.
    members: Vec<usize>,
}

impl PartSlicer {
    fn eval_sub(&self, y: &[f64], scratch: &mut Vec<Point>) -> Vec<Point> {
        self.sampler.eval(y, scratch);
        snap(
            scratch
                .iter()
                .map(|p| self.free_pos.iter().map(|&pos| p[pos]).collect())
                .collect(),
        )
    }
}

impl Analysis {
    fn new(body: &Body, cover: &Cover, samples: usize) -> Result<Analysis, EqualityError> {
        let n = body.dim();
        let sigma = cover.sigma();
        if sigma.ground_n() != n {
            return Err(EqualityError::Inequality(InequalityError::GroundMismatch {
                cover: sigma.ground_n(),
                body: n,
            }));
        }
        if sigma.is_empty() {
            return Err(EqualityError::Inequality(InequalityError::SigmaEmpty));
        }
        if sigma.len() == n {
            return Err(EqualityError::Inequality(InequalityError::SigmaFull));
        }
        if sigma.len() > MAX_SLICE_DIM {
            return Err(EqualityError::SliceDimTooLarge(sigma.len()));
        }
        // Full parts add nothing: their complement is empty, their atom
        // signature is blank, and their partial sums are empty.
        let proper: Vec<IndexSet> =
            cover.parts().iter().copied().filter(|p| *p != sigma).collect();
        if proper.is_empty() {
            return Err(EqualityError::DegenerateCover);
        }
        let filtered = validate_cover(sigma, &proper)?;
        let complements = complement_cover(&filtered)?;
        let induced = induced_one_cover(&complements);

        let sig_cols: Vec<usize> = sigma.iter().map(|i| i - 1).collect();
        let co_cols: Vec<usize> = sigma.complement().iter().map(|i| i - 1).collect();
        let frame_slot = |col: usize| sig_cols.iter().position(|&c| c == col).unwrap();

        let body_hull = convex_hull(body.vertices())?;
        let base_pts = geometry::project(body.vertices(), &co_cols);
        let base = convex_hull(&base_pts)?;
        let lhs = SliceSampler::new(&body_hull.hpoly, &co_cols)?;

        let mut atoms = Vec::new();
        for atom in induced.parts() {
            let mut keep_cols: Vec<usize> = atom
                .iter()
                .map(|i| i - 1)
                .chain(co_cols.iter().copied())
                .collect();
            keep_cols.sort_unstable();
            let pts = geometry::project(body.vertices(), &keep_cols);
            let hull = convex_hull(&pts)?;
            let fixed: Vec<usize> = co_cols
                .iter()
                .map(|c| keep_cols.iter().position(|k| k == c).unwrap())
                .collect();
            let sampler = SliceSampler::new(&hull.hpoly, &fixed)?;
            let sigma_frame: Vec<(usize, usize)> = keep_cols
                .iter()
                .enumerate()
                .filter(|(_, c)| sigma.contains(**c + 1))
                .map(|(pos, c)| (pos, frame_slot(*c)))
                .collect();
            atoms.push(AtomSlicer { sampler, sigma_frame });
        }

        let mut parts = Vec::new();
        for part in &proper {
            let rest = sigma.difference(part);
            let mut keep_cols: Vec<usize> = rest
                .iter()
                .map(|i| i - 1)
                .chain(co_cols.iter().copied())
                .collect();
            keep_cols.sort_unstable();
            let pts = geometry::project(body.vertices(), &keep_cols);
            let hull = convex_hull(&pts)?;
            let fixed: Vec<usize> = co_cols
                .iter()
                .map(|c| keep_cols.iter().position(|k| k == c).unwrap())
                .collect();
            let sampler = SliceSampler::new(&hull.hpoly, &fixed)?;
            let free_pos: Vec<usize> = keep_cols
                .iter()
                .enumerate()
                .filter(|(_, c)| sigma.contains(**c + 1))
                .map(|(pos, _)| pos)
                .collect();
            let sub_cols: Vec<usize> =
                rest.iter().map(|i| frame_slot(i - 1)).collect();
            let members: Vec<usize> = induced
                .parts()
                .iter()
                .enumerate()
                .filter(|(_, a)| a.is_subset(&rest))
                .map(|(j, _)| j)
                .collect();
            // The partition property: every atom lies inside the part or
            // inside its complement, so the members tile the complement.
            debug_assert_eq!(
                members.iter().map(|&j| induced.parts()[j].len()).sum::<usize>(),
                rest.len()
            );
            parts.push(PartSlicer {
                sub_cols,
                sub_dim: rest.len(),
                sampler,
                free_pos,
                members,
            });
        }

        let nodes = sample_nodes(&base, samples)?;
        let mut body_scale = 1e-12f64;
        for v in body.vertices() {
            for &c in &sig_cols {
                body_scale = body_scale.max(2.0 * f64::abs(v[c]));
            }
        }

        // Peak point: joint maximizer of the normalized partial profiles,
        // located on the grid and refined by pattern search.
        let mut scratch: Vec<Point> = Vec::new();
        let score = |y: &[f64], scratch: &mut Vec<Point>| -> Result<f64, GeomError> {
            let mut total = 0.0f64;
            for part in &parts {
                let pts = part.eval_sub(y, scratch);
                let vol = volume_in_dim(&pts, part.sub_dim)?;
                if vol <= 0.0 {
                    return Ok(f64::NEG_INFINITY);
                }
                total += mathx::ln(vol) / part.sub_dim as f64;
            }
            Ok(total)
        };
        let mut best_idx = 0usize;
        let mut best_val = f64::NEG_INFINITY;
        for (i, y) in nodes.iter().enumerate() {
            let v = score(y, &mut scratch)?;
            if v > best_val {
                best_val = v;
                best_idx = i;
            }
        }
        if best_val == f64::NEG_INFINITY {
            return Err(EqualityError::EmptyBase);
        }
        let mut err: Option<GeomError> = None;
        let (y0, _) = refine_max(&base, &nodes[best_idx], |y| {
            match score(y, &mut scratch) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    f64::NEG_INFINITY
                }
            }
        });
        if let Some(e) = err {
            return Err(EqualityError::Geometry(e));
        }
        let gauge_base: Vec<Point> = base
            .vpoly
            .vertices
            .iter()
            .map(|v| v.iter().zip(&y0).map(|(x, c)| x - c).collect())
            .collect();

        Ok(Analysis {
            sigma,
            sig_cols,
            atoms,
            parts,
            nodes,
            y0,
            gauge_base,
            lhs,
            body_scale,
        })
    }

    fn gauge(&self, y: &[f64]) -> Result<f64, GeomError> {
        let x: Point = y.iter().zip(&self.y0).map(|(a, c)| a - c).collect();
        Ok(minkowski_functional(&self.gauge_base, &x)?.unwrap_or(f64::INFINITY))
    }

    /// Sigma-frame slice of the body at one node.
    fn lhs_slice(&self, y: &[f64], scratch: &mut Vec<Point>) -> Vec<Point> {
        self.lhs.eval(y, scratch);
        snap(
            scratch
                .iter()
                .map(|p| self.sig_cols.iter().map(|&c| p[c]).collect())
                .collect(),
        )
    }

    /// Minkowski sum of the atom slices listed in `which`, in the sigma
    /// frame. Atom slices are reduced to extreme points first to keep the
    /// product of generator counts small.
    fn atom_sum(
        &self,
        which: &[usize],
        y: &[f64],
        scratch: &mut Vec<Point>,
    ) -> Result<Vec<Point>, GeomError> {
        let frame_dim = self.sig_cols.len();
        let mut acc: Vec<Point> = alloc::vec![alloc::vec![0.0; frame_dim]];
        for &j in which {
            let slicer = &self.atoms[j];
            let raw = slicer.eval_frame(y, scratch, frame_dim);
            // Extreme points in the atom's own coordinates.
            let own: Vec<usize> =
                slicer.sigma_frame.iter().map(|&(_, slot)| slot).collect();
            let small = geometry::project(&raw, &own);
            let gens = match convex_hull(&small) {
                Ok(h) => {
                    let mut out = Vec::with_capacity(h.vpoly.vertices.len());
                    for v in &h.vpoly.vertices {
                        let mut p = alloc::vec![0.0; frame_dim];
                        for (&slot, &x) in own.iter().zip(v) {
                            p[slot] = x;
                        }
                        out.push(p);
                    }
                    out
                }
                Err(GeomError::NotFullDimensional) => raw,
                Err(e) => return Err(e),
            };
            acc = snap(minkowski_sum(&acc, &gens));
        }
        Ok(acc)
    }

    /// Embeds a sigma-frame translation into the ambient space, adding the
    /// bookkeeping offset of `k` summands along the complement.
    fn embed_translation(&self, frame: &[f64], y: &[f64], k: usize) -> Point {
        let n = self.sigma.ground_n();
        let mut z = alloc::vec![0.0; n];
        for (slot, &c) in self.sig_cols.iter().enumerate() {
            z[c] = frame[slot];
        }
        let co: Vec<usize> = self.sigma.complement().iter().map(|i| i - 1).collect();
        for (pos, &c) in co.iter().enumerate() {
            z[c] = (1.0 - k as f64) * y[pos];
        }
        z
    }
}

fn frame_diff(a: &[Point], b: &[Point]) -> Vec<f64> {
    let ca = centroid(a);
    let cb = centroid(b);
    ca.iter().zip(&cb).map(|(x, y)| x - y).collect()
}

fn cond1(analysis: &Analysis) -> Result<ConditionReport, EqualityError> {
    let all: Vec<usize> = (0..analysis.atoms.len()).collect();
    let mut scratch = Vec::new();
    let mut max_residual = 0.0f64;
    let mut fitted = Vec::with_capacity(analysis.nodes.len());
    for y in &analysis.nodes {
        let lhs = analysis.lhs_slice(y, &mut scratch);
        let rhs = analysis.atom_sum(&all, y, &mut scratch)?;
        let r = translation_residual(&lhs, &rhs, analysis.body_scale)?;
        max_residual = max_residual.max(r);
        fitted.push(analysis.embed_translation(&frame_diff(&lhs, &rhs), y, all.len()));
    }
    Ok(ConditionReport {
        holds: max_residual <= RESIDUAL_TOL,
        max_residual,
        fitted_translations: fitted,
        constants: Vec::new(),
    })
}

fn cond2(analysis: &Analysis) -> Result<ConditionReport, EqualityError> {
    let mut scratch = Vec::new();
    // Reference slices at the peak, one per proper part, with their
    // normalized peak volumes as the reported constants.
    let mut references = Vec::with_capacity(analysis.parts.len());
    let mut constants = Vec::with_capacity(analysis.parts.len());
    for part in &analysis.parts {
        let pts = part.eval_sub(&analysis.y0, &mut scratch);
        let vol = volume_in_dim(&pts, part.sub_dim)?;
        constants.push(mathx::powf(vol, 1.0 / part.sub_dim as f64));
        references.push(pts);
    }
    let mut max_residual = 0.0f64;
    let mut fitted = Vec::new();
    for y in &analysis.nodes {
        let factor = f64::max(0.0, 1.0 - analysis.gauge(y)?);
        for (part, reference) in analysis.parts.iter().zip(&references) {
            let sum = analysis.atom_sum(&part.members, y, &mut scratch)?;
            let lhs = geometry::project(&sum, &part.sub_cols);
            let factors = alloc::vec![factor; part.sub_dim];
            let shift = alloc::vec![0.0; part.sub_dim];
            let rhs = geometry::scale_translate(reference, &factors, &shift);
            let r = translation_residual(&lhs, &rhs, analysis.body_scale)?;
            max_residual = max_residual.max(r);
            // Translation in the part's sub-frame, widened to the sigma
            // frame before embedding.
            let diff = frame_diff(&lhs, &rhs);
            let mut frame = alloc::vec![0.0; analysis.sig_cols.len()];
            for (&slot, &v) in part.sub_cols.iter().zip(&diff) {
                frame[slot] = v;
            }
            fitted.push(analysis.embed_translation(&frame, y, part.members.len()));
        }
    }
    Ok(ConditionReport {
        holds: max_residual <= RESIDUAL_TOL,
        max_residual,
        fitted_translations: fitted,
        constants,
    })
}

fn cond3(analysis: &Analysis) -> Result<ConditionReport, EqualityError> {
    let mut scratch = Vec::new();
    let parts = &analysis.parts;
    // Normalized partial-sum volumes per node and part.
    let mut profiles: Vec<Vec<f64>> = Vec::with_capacity(analysis.nodes.len());
    for y in &analysis.nodes {
        let mut row = Vec::with_capacity(parts.len());
        for part in parts {
            let sum = analysis.atom_sum(&part.members, y, &mut scratch)?;
            let pts = geometry::project(&sum, &part.sub_cols);
            let vol = volume_in_dim(&pts, part.sub_dim)?;
            row.push(mathx::powf(vol, 1.0 / part.sub_dim as f64));
        }
        profiles.push(row);
    }
    let reference_peak = profiles
        .iter()
        .map(|row| row[0])
        .fold(0.0f64, f64::max);
    let usable = |row: &Vec<f64>| row[0] > 1e-9 * reference_peak;

    let mut constants = Vec::with_capacity(parts.len());
    let mut max_residual = 0.0f64;
    for i in 0..parts.len() {
        let mut ratios: Vec<f64> = profiles
            .iter()
            .filter(|row| usable(row))
            .map(|row| row[i] / row[0])
            .collect();
        if ratios.is_empty() {
            return Err(EqualityError::EmptyBase);
        }
        ratios.sort_by(|a, b| a.partial_cmp(b).expect("finite ratios"));
        let mid = ratios.len() / 2;
        let l_i = if ratios.len() % 2 == 1 {
            ratios[mid]
        } else {
            0.5 * (ratios[mid - 1] + ratios[mid])
        };
        for r in &ratios {
            max_residual = max_residual.max(f64::abs(r - l_i) / f64::max(l_i, 1e-12));
        }
        constants.push(l_i);
    }
    Ok(ConditionReport {
        holds: max_residual <= RESIDUAL_TOL,
        max_residual,
        fitted_translations: Vec::new(),
        constants,
    })
}

/// Tests the slice-sum condition alone.
pub fn charact1_check(
    body: &Body,
    cover: &Cover,
    samples: usize,
) -> Result<ConditionReport, EqualityError> {
    cond1(&Analysis::new(body, cover, samples)?)
}

/// Tests the gauge-scaling condition alone.
pub fn charact2_check(
    body: &Body,
    cover: &Cover,
    samples: usize,
) -> Result<ConditionReport, EqualityError> {
    cond2(&Analysis::new(body, cover, samples)?)
}

/// Tests the constant-ratio condition alone.
pub fn charact3_check(
    body: &Body,
    cover: &Cover,
    samples: usize,
) -> Result<ConditionReport, EqualityError> {
    cond3(&Analysis::new(body, cover, samples)?)
}

/// Runs the product bound and all three conditions, and cross-checks the
/// verdicts: equality must come with clean conditions, and clean conditions
/// must come with equality.
pub fn detect_equality(
    body: &mut Body,
    cover: &Cover,
    samples: usize,
    tol: f64,
) -> Result<CharacterizationReport, EqualityError> {
    let bound = check_local_bt(body, cover, DEFAULT_LOG_TOL)?;
    let analysis = Analysis::new(body, cover, samples)?;
    let cond1 = cond1(&analysis)?;
    let cond2 = cond2(&analysis)?;
    let cond3 = cond3(&analysis)?;
    let slack = bound.slack_log;
    let is_equality = f64::abs(slack) <= tol;
    let loose = cond1.max_residual <= RESIDUAL_TOL
        && cond2.max_residual <= RESIDUAL_TOL
        && cond3.max_residual <= RESIDUAL_TOL;
    let strict = cond1.max_residual <= RESIDUAL_STRICT_TOL
        && cond2.max_residual <= RESIDUAL_STRICT_TOL
        && cond3.max_residual <= RESIDUAL_STRICT_TOL;
    let forward_violation = is_equality && !loose;
    let reverse_violation = strict && f64::abs(slack) > RESIDUAL_TOL;
    Ok(CharacterizationReport {
        cond1,
        cond2,
        cond3,
        equality_slack: slack,
        slack_tol: tol,
        verdict_consistent: !forward_violation && !reverse_violation,
    })
}
