//! Integration over simplicial decompositions.
//!
//! Purpose: three deterministic integration tools used by the inequality
//! checks. Stratified Monte Carlo allocates samples to simplices by volume
//! share from a single root seed and reports standard errors per component,
//! so several integrands can share one sample stream and their comparison
//! slacks telescope exactly. Gauss-Legendre product rules on collapsed
//! simplex coordinates are exact for polynomial integrands up to the rule
//! degree. Slice samplers precompute, per facet subset, affine maps from
//! the fixed coordinates to candidate slice vertices, so repeated slicing
//! of one body at many offsets costs a few flops per candidate.

use alloc::vec::Vec;

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::geometry::{GeomError, HPolytope, Point, SimplicialDecomposition};
use crate::mathx;

/// How an integral should be evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureSpec {
    /// Stratified Monte Carlo with this many samples from this seed.
    MonteCarlo { samples: usize, seed: u64 },
    /// Gauss-Legendre product rule with this many nodes per axis.
    Gauss { order: usize },
}

/// A Monte Carlo integral estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

const MAX_GAUSS_DIM: usize = 4;
const MAX_GAUSS_ORDER: usize = 24;
const MAX_SLICE_CANDIDATES: usize = 200_000;
const MAX_GRID_NODES: usize = 2_000_000;

fn unit_f64(rng: &mut ChaCha12Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// Uniform point in the simplex spanned by `verts` via sorted uniform cuts
/// of [0,1] turned into barycentric weights.
fn simplex_point(rng: &mut ChaCha12Rng, verts: &[&Point], dim: usize, out: &mut [f64]) {
    debug_assert!(verts.len() == dim + 1);
    let mut cuts = [0.0f64; 10];
    for c in cuts.iter_mut().take(dim) {
        *c = unit_f64(rng);
    }
    cuts[..dim].sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    for x in out.iter_mut() {
        *x = 0.0;
    }
    let mut prev = 0.0;
    for (k, vert) in verts.iter().enumerate() {
        let next = if k < dim { cuts[k] } else { 1.0 };
        let w = next - prev;
        prev = next;
        for (x, v) in out.iter_mut().zip(vert.iter()) {
            *x += w * v;
        }
    }
}

/// Stratified sample counts per simplex: proportional shares, largest
/// remainders, then a floor of two samples per stratum so variances exist.
fn allocate(volumes: &[f64], total: f64, samples: usize) -> Vec<usize> {
    let m = volumes.len();
    let mut counts = alloc::vec![0usize; m];
    let mut fracs: Vec<(f64, usize)> = Vec::with_capacity(m);
    let mut assigned = 0usize;
    for (s, v) in volumes.iter().enumerate() {
        let share = samples as f64 * v / total;
        let fl = share as usize;
        counts[s] = fl;
        assigned += fl;
        fracs.push((share - fl as f64, s));
    }
    let mut rem = samples.saturating_sub(assigned);
    fracs.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    for &(_, s) in &fracs {
        if rem == 0 {
            break;
        }
        counts[s] += 1;
        rem -= 1;
    }
    for c in counts.iter_mut() {
        if *c < 2 {
            *c = 2;
        }
    }
    counts
}

/// Stratified Monte Carlo of a vector integrand over a decomposition. All
/// components share the same sample points, so differences of correlated
/// integrals keep their algebraic relations sample for sample.
pub fn integrate_mc_multi<F>(
    decomp: &SimplicialDecomposition,
    samples: usize,
    seed: u64,
    width: usize,
    mut integrand: F,
) -> Vec<McEstimate>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let zero = McEstimate { value: 0.0, std_error: 0.0, samples: 0 };
    if decomp.simplices.is_empty() || decomp.total_volume <= 0.0 || samples == 0 {
        return alloc::vec![zero; width];
    }
    let counts = allocate(&decomp.volumes, decomp.total_volume, samples);
    let dim = decomp.dim;
    let mut x = alloc::vec![0.0f64; dim];
    let mut fx = alloc::vec![0.0f64; width];
    let mut value = alloc::vec![0.0f64; width];
    let mut variance = alloc::vec![0.0f64; width];
    let mut total_n = 0usize;
    for (s, simplex) in decomp.simplices.iter().enumerate() {
        let verts: Vec<&Point> = simplex.iter().map(|&i| &decomp.points[i]).collect();
        let vol = decomp.volumes[s];
        let n = counts[s];
        total_n += n;
        let mut rng = ChaCha12Rng::seed_from_u64(mathx::splitmix64(seed ^ (s as u64 + 1)));
        let mut sum = alloc::vec![0.0f64; width];
        let mut sumsq = alloc::vec![0.0f64; width];
        for _ in 0..n {
            simplex_point(&mut rng, &verts, dim, &mut x);
            integrand(&x, &mut fx);
            for k in 0..width {
                sum[k] += fx[k];
                sumsq[k] += fx[k] * fx[k];
            }
        }
        let nf = n as f64;
        for k in 0..width {
            let mean = sum[k] / nf;
            value[k] += vol * mean;
            let var = ((sumsq[k] - sum[k] * mean) / (nf - 1.0)).max(0.0);
            variance[k] += vol * vol * var / nf;
        }
    }
    (0..width)
        .map(|k| McEstimate {
            value: value[k],
            std_error: mathx::sqrt(variance[k]),
            samples: total_n,
        })
        .collect()
}

/// Stratified Monte Carlo of a scalar integrand.
pub fn integrate_mc<F>(
    decomp: &SimplicialDecomposition,
    samples: usize,
    seed: u64,
    mut integrand: F,
) -> McEstimate
where
    F: FnMut(&[f64]) -> f64,
{
    integrate_mc_multi(decomp, samples, seed, 1, |x, out| out[0] = integrand(x))[0]
}

/// Gauss-Legendre nodes and weights on [0, 1]; weights sum to one.
fn gauss_legendre_unit(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = alloc::vec![0.0f64; n];
    let mut weights = alloc::vec![0.0f64; n];
    for i in 0..n {
        // Newton iteration on P_n over [-1, 1] from the Chebyshev guess.
        let mut x = mathx::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            dp = (n as f64) * (x * pn - p0) / (x * x - 1.0);
            let step = pn / dp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = 0.5 * (x + 1.0);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Gauss-Legendre product quadrature over a decomposition, exact for
/// polynomial integrands of degree below the rule degree. Dimensions up to
/// four; the collapsed coordinates map [0,1]^d onto each simplex.
pub fn integrate_gauss<F>(
    decomp: &SimplicialDecomposition,
    order: usize,
    mut integrand: F,
) -> Result<f64, GeomError>
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = decomp.dim;
    if dim == 0 || dim > MAX_GAUSS_DIM {
        return Err(GeomError::CapacityExceeded("gauss dimension"));
    }
    if order < 2 || order > MAX_GAUSS_ORDER {
        return Err(GeomError::CapacityExceeded("gauss order"));
    }
    let (nodes, weights) = gauss_legendre_unit(order);
    let mut dfact = 1.0f64;
    for k in 2..=dim {
        dfact *= k as f64;
    }
    let mut total = 0.0;
    let mut x = alloc::vec![0.0f64; dim];
    let mut bary = alloc::vec![0.0f64; dim + 1];
    for (s, simplex) in decomp.simplices.iter().enumerate() {
        let verts: Vec<&Point> = simplex.iter().map(|&i| &decomp.points[i]).collect();
        let vol = decomp.volumes[s];
        let mut acc = 0.0;
        let mut index = alloc::vec![0usize; dim];
        'nodes: loop {
            // Collapsed map: b_k = t_k prod_{j<k}(1 - t_j), b_0 closes to 1.
            let mut wprod = 1.0;
            let mut carry = 1.0;
            let mut jac = 1.0;
            for k in 0..dim {
                let t = nodes[index[k]];
                wprod *= weights[index[k]];
                bary[k + 1] = t * carry;
                carry *= 1.0 - t;
                for _ in k + 2..=dim {
                    jac *= 1.0 - t;
                }
            }
            bary[0] = carry;
            for c in 0..dim {
                x[c] = 0.0;
                for (b, v) in bary.iter().zip(verts.iter()) {
                    x[c] += b * v[c];
                }
            }
            acc += wprod * jac * integrand(&x);
            let mut k = 0;
            loop {
                if k == dim {
                    break 'nodes;
                }
                index[k] += 1;
                if index[k] < order {
                    break;
                }
                index[k] = 0;
                k += 1;
            }
        }
        let _ = s;
        total += dfact * vol * acc;
    }
    Ok(total)
}

/// Precomputed affine slice machinery: vertices of `h` cut by the plane
/// fixing the listed coordinates, as affine functions of the fixed values.
#[derive(Debug, Clone)]
pub struct SliceSampler {
    dim: usize,
    fixed: Vec<usize>,
    free: Vec<usize>,
    /// Per candidate: free-coordinate base (r values) then derivative rows
    /// (r x k, row major), flattened.
    base: Vec<f64>,
    deriv: Vec<f64>,
    /// Per candidate and plane: constant and k-vector of the slack form
    /// `e + f . y >= 0`, flattened.
    feas_e: Vec<f64>,
    feas_f: Vec<f64>,
    planes: usize,
    candidates: usize,
    tol: f64,
}

impl SliceSampler {
    pub fn new(h: &HPolytope, fixed: &[usize]) -> Result<Self, GeomError> {
        let d = h.dim;
        let mut seen = alloc::vec![false; d];
        for &c in fixed {
            if c >= d || seen[c] {
                return Err(GeomError::DimensionMismatch);
            }
            seen[c] = true;
        }
        let free: Vec<usize> = (0..d).filter(|c| !seen[*c]).collect();
        let r = free.len();
        let k = fixed.len();
        let f = h.normals.len();
        if r == 0 || f < r {
            return Err(GeomError::NotFullDimensional);
        }
        let scale = h.offsets.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        let tol = 1e-7 * scale;

        let mut base = Vec::new();
        let mut deriv = Vec::new();
        let mut feas_e = Vec::new();
        let mut feas_f = Vec::new();
        let mut candidates = 0usize;

        let mut idx: Vec<usize> = (0..r).collect();
        'combos: loop {
            // Invert the r x r free-coordinate system for this facet subset.
            let mut a = alloc::vec![0.0f64; r * r];
            let mut inv = alloc::vec![0.0f64; r * r];
            for (row, &j) in idx.iter().enumerate() {
                for (col, &c) in free.iter().enumerate() {
                    a[row * r + col] = h.normals[j][c];
                }
                inv[row * r + row] = 1.0;
            }
            if invert_in_place(&mut a, &mut inv, r) {
                // x_free(y) = inv * (b_sub - Nfix * y)
                let mut cand_base = alloc::vec![0.0f64; r];
                for row in 0..r {
                    for (col, &j) in idx.iter().enumerate() {
                        cand_base[row] += inv[row * r + col] * h.offsets[j];
                    }
                }
                let mut cand_deriv = alloc::vec![0.0f64; r * k];
                for row in 0..r {
                    for (kk, &fc) in fixed.iter().enumerate() {
                        let mut v = 0.0;
                        for (col, &j) in idx.iter().enumerate() {
                            v += inv[row * r + col] * h.normals[j][fc];
                        }
                        cand_deriv[row * k + kk] = -v;
                    }
                }
                // Slack of plane j at the candidate, affine in y.
                for j in 0..f {
                    let n = &h.normals[j];
                    let mut e = h.offsets[j];
                    for (row, &c) in free.iter().enumerate() {
                        e -= n[c] * cand_base[row];
                    }
                    feas_e.push(e);
                    for (kk, &fc) in fixed.iter().enumerate() {
                        let mut v = n[fc];
                        for (row, &c) in free.iter().enumerate() {
                            v += n[c] * cand_deriv[row * k + kk];
                        }
                        feas_f.push(-v);
                    }
                }
                base.extend_from_slice(&cand_base);
                deriv.extend_from_slice(&cand_deriv);
                candidates += 1;
                if candidates > MAX_SLICE_CANDIDATES {
                    return Err(GeomError::CapacityExceeded("slice sampler candidates"));
                }
            }
            // Next r-combination of 0..f.
            let mut i = r;
            loop {
                if i == 0 {
                    break 'combos;
                }
                i -= 1;
                if idx[i] != i + f - r {
                    break;
                }
            }
            idx[i] += 1;
            for j in i + 1..r {
                idx[j] = idx[j - 1] + 1;
            }
        }
        Ok(SliceSampler {
            dim: d,
            fixed: fixed.to_vec(),
            free,
            base,
            deriv,
            feas_e,
            feas_f,
            planes: f,
            candidates,
            tol,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn candidates(&self) -> usize {
        self.candidates
    }

    /// Slice vertices at fixed values `y` (aligned with the `fixed` list),
    /// written as full-dimensional points into `out`. Duplicates are kept;
    /// the outputs all lie on the slice boundary.
    pub fn eval(&self, y: &[f64], out: &mut Vec<Point>) {
        out.clear();
        let r = self.free.len();
        let k = self.fixed.len();
        debug_assert!(y.len() == k);
        for cand in 0..self.candidates {
            let fe = &self.feas_e[cand * self.planes..(cand + 1) * self.planes];
            let ff = &self.feas_f[cand * self.planes * k..(cand + 1) * self.planes * k];
            let mut ok = true;
            for j in 0..self.planes {
                let mut slack = fe[j];
                for (kk, yv) in y.iter().enumerate() {
                    slack += ff[j * k + kk] * yv;
                }
                if slack < -self.tol {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            let mut x = alloc::vec![0.0f64; self.dim];
            for (kk, &c) in self.fixed.iter().enumerate() {
                x[c] = y[kk];
            }
            let cb = &self.base[cand * r..(cand + 1) * r];
            let cd = &self.deriv[cand * r * k..(cand + 1) * r * k];
            for (row, &c) in self.free.iter().enumerate() {
                let mut v = cb[row];
                for (kk, yv) in y.iter().enumerate() {
                    v += cd[row * k + kk] * yv;
                }
                x[c] = v;
            }
            out.push(x);
        }
    }
}

/// Gauss-Jordan inversion with partial pivoting; false when near-singular.
fn invert_in_place(a: &mut [f64], inv: &mut [f64], n: usize) -> bool {
    for col in 0..n {
        let mut best = col;
        let mut mag = a[col * n + col].abs();
        for row in col + 1..n {
            let m = a[row * n + col].abs();
            if m > mag {
                mag = m;
                best = row;
            }
        }
        let row_scale = (0..n).fold(0.0f64, |acc, c| acc.max(a[best * n + c].abs()));
        if mag <= 1e-11 * row_scale.max(1.0) {
            return false;
        }
        if best != col {
            for c in 0..n {
                a.swap(col * n + c, best * n + c);
                inv.swap(col * n + c, best * n + c);
            }
        }
        let piv = a[col * n + col];
        for c in 0..n {
            a[col * n + c] /= piv;
            inv[col * n + c] /= piv;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let fct = a[row * n + col];
            if fct == 0.0 {
                continue;
            }
            for c in 0..n {
                a[row * n + c] -= fct * a[col * n + c];
                inv[row * n + c] -= fct * inv[col * n + c];
            }
        }
    }
    true
}

/// Interior grid nodes of `h` inside the box [lo, hi], pulled inward by
/// `pull_in` of each side length, ordered lexicographically by index.
pub fn grid_interior(
    h: &HPolytope,
    lo: &[f64],
    hi: &[f64],
    per_axis: usize,
    pull_in: f64,
) -> Result<Vec<Point>, GeomError> {
    let d = lo.len();
    if hi.len() != d || h.dim != d {
        return Err(GeomError::DimensionMismatch);
    }
    if per_axis == 0 {
        return Ok(Vec::new());
    }
    let mut total = 1usize;
    for _ in 0..d {
        total = total.saturating_mul(per_axis);
        if total > MAX_GRID_NODES {
            return Err(GeomError::CapacityExceeded("grid nodes"));
        }
    }
    let mut out = Vec::new();
    let mut index = alloc::vec![0usize; d];
    loop {
        let mut x = alloc::vec![0.0f64; d];
        for c in 0..d {
            let side = hi[c] - lo[c];
            let t = if per_axis == 1 {
                0.5
            } else {
                pull_in + (1.0 - 2.0 * pull_in) * index[c] as f64 / (per_axis - 1) as f64
            };
            x[c] = lo[c] + t * side;
        }
        if h.contains(&x, 0.0) {
            out.push(x);
        }
        let mut k = 0;
        loop {
            if k == d {
                return Ok(out);
            }
            index[k] += 1;
            if index[k] < per_axis {
                break;
            }
            index[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{convex_hull, volume_in_dim};
    use alloc::vec;

    fn segment() -> SimplicialDecomposition {
        convex_hull(&[vec![0.0], vec![1.0]]).unwrap().decomposition
    }

    fn square() -> SimplicialDecomposition {
        convex_hull(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]])
            .unwrap()
            .decomposition
    }

    #[test]
    fn gauss_is_exact_for_polynomials() {
        let d = segment();
        // degree-7 polynomial integrates exactly at order >= 4
        let exact = 1.0 / 8.0 + 2.0 / 5.0;
        let got = integrate_gauss(&d, 6, |x| x[0] * x[0] * x[0] * x[0] * x[0] * x[0] * x[0]
            + 2.0 * x[0] * x[0] * x[0] * x[0]).unwrap();
        assert!((got - exact).abs() < 1e-14, "got {got}");

        let sq = square();
        let got2 = integrate_gauss(&sq, 8, |x| x[0] * x[1] * x[1] + 3.0).unwrap();
        assert!((got2 - (1.0 / 6.0 + 3.0)).abs() < 1e-13, "got {got2}");
    }

    #[test]
    fn gauss_volume_recovery() {
        let tri = convex_hull(&[vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 2.0]])
            .unwrap()
            .decomposition;
        let got = integrate_gauss(&tri, 4, |_| 1.0).unwrap();
        assert!((got - 2.0).abs() < 1e-13);
    }

    #[test]
    fn mc_matches_known_integral_within_error() {
        let sq = square();
        let est = integrate_mc(&sq, 20_000, 7, |x| x[0] + x[1]);
        assert!((est.value - 1.0).abs() < 5.0 * est.std_error.max(1e-6));
        assert!(est.std_error < 0.01);
        // determinism
        let est2 = integrate_mc(&sq, 20_000, 7, |x| x[0] + x[1]);
        assert_eq!(est.value, est2.value);
        let est3 = integrate_mc(&sq, 20_000, 8, |x| x[0] + x[1]);
        assert!(est.value != est3.value);
    }

    #[test]
    fn mc_multi_shares_samples() {
        let sq = square();
        let ests = integrate_mc_multi(&sq, 5_000, 3, 3, |x, out| {
            out[0] = x[0];
            out[1] = x[1];
            out[2] = x[0] + x[1];
        });
        let diff = (ests[0].value + ests[1].value) - ests[2].value;
        assert!(diff.abs() < 1e-12, "shared samples must telescope, diff {diff}");
    }

    #[test]
    fn slice_sampler_matches_direct_slice() {
        let mut cube = Vec::new();
        for m in 0..8u32 {
            cube.push((0..3).map(|c| if m >> c & 1 == 1 { 1.0 } else { -1.0 }).collect());
        }
        let h = convex_hull(&cube).unwrap().hpoly;
        let sampler = SliceSampler::new(&h, &[2]).unwrap();
        let mut out = Vec::new();
        sampler.eval(&[0.25], &mut out);
        assert!(!out.is_empty());
        for p in &out {
            assert!((p[2] - 0.25).abs() < 1e-12);
            assert!(h.contains(p, 1e-6));
        }
        let area = volume_in_dim(&out, 2).unwrap();
        assert!((area - 4.0).abs() < 1e-9, "area {area}");
        // outside the body: no feasible candidates
        sampler.eval(&[4.0], &mut out);
        assert!(out.is_empty());
    }

    #[test]
    fn slice_sampler_tetrahedron_profile() {
        let tet = vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let h = convex_hull(&tet).unwrap().hpoly;
        let sampler = SliceSampler::new(&h, &[2]).unwrap();
        let mut out = Vec::new();
        for &z in &[0.0, 0.25, 0.5, 0.75] {
            sampler.eval(&[z], &mut out);
            let area = volume_in_dim(&out, 2).unwrap();
            let want = 0.5 * (1.0 - z) * (1.0 - z);
            assert!((area - want).abs() < 1e-9, "z={z} area={area} want={want}");
        }
    }

    #[test]
    fn grid_nodes_stay_interior() {
        let mut cube = Vec::new();
        for m in 0..8u32 {
            cube.push((0..3).map(|c| if m >> c & 1 == 1 { 1.0 } else { -1.0 }).collect());
        }
        let h = convex_hull(&cube).unwrap().hpoly;
        let nodes =
            grid_interior(&h, &[-1.0, -1.0, -1.0], &[1.0, 1.0, 1.0], 4, 1e-6).unwrap();
        assert_eq!(nodes.len(), 64);
        for x in &nodes {
            assert!(h.margin(x) > 0.0);
        }
        let mid = grid_interior(&h, &[-1.0, -1.0, -1.0], &[1.0, 1.0, 1.0], 1, 0.0).unwrap();
        assert_eq!(mid, vec![vec![0.0, 0.0, 0.0]]);
    }

    #[test]
    fn gauss_rejects_out_of_range_requests() {
        let d = segment();
        assert!(matches!(
            integrate_gauss(&d, 1, |_| 1.0),
            Err(GeomError::CapacityExceeded(_))
        ));
    }
}
