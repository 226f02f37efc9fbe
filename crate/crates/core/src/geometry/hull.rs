//! Incremental convex hull in dimension 1..=8.
//!
//! Combinatorial decisions (visibility, horizon) run on deterministically
//! perturbed copies of the points, which keeps every configuration in
//! general position, so facets stay simplicial and no merging logic is
//! needed. All reported quantities are then recomputed from the original
//! coordinates:
//!
//! * the volume is the signed sum of cone determinants over the oriented
//!   boundary complex, which is independent of the perturbation (folds
//!   introduced by degenerate inputs cancel in the signed sum);
//! * facet planes are refitted through well-spread supporting points and
//!   validated against the full point set, so coplanar boundary simplices
//!   collapse onto one supporting plane per true facet.
//!
//! A validation failure retries with the next perturbation magnitude/seed.
//! With exact scalars all tolerances are zero and the first rung succeeds.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::scalar::{det_in_place, dot, hyperplane_normal, rank_in_place, sub_vec, Scalar};

pub(crate) struct HullData<S: Scalar> {
    /// Indices of extreme input points, ascending.
    pub extreme: Vec<usize>,
    /// Supporting planes (normal, offset), outward (normal . x <= offset),
    /// normalized so the largest |coefficient| is 1.
    pub planes: Vec<(Vec<S>, S)>,
    /// Full-dimensional simplices (input indices) tiling the hull, each with
    /// positive volume; volumes sum to `volume`.
    pub simplices: Vec<Vec<usize>>,
    pub simplex_volumes: Vec<S>,
    pub volume: S,
}

#[derive(Debug)]
pub(crate) enum HullFail {
    NotFullDimensional,
    Failed(&'static str),
}

const FACET_CAP: usize = 500_000;

use crate::mathx::splitmix64 as splitmix;

/// Deterministic perturbation offsets in (-2^20, 2^20), scaled by mag/2^21.
fn perturb<S: Scalar>(pts: &[Vec<S>], mag: &S, seed: u64) -> Vec<Vec<S>> {
    pts.iter()
        .enumerate()
        .map(|(i, p)| {
            p.iter()
                .enumerate()
                .map(|(c, x)| {
                    let h = splitmix(seed ^ ((i as u64) << 20) ^ (c as u64));
                    let k = (h % ((1 << 21) - 1)) as i64 - (1 << 20) + 1;
                    x.add(&mag.mul(&S::ratio(k, 1 << 21)))
                })
                .collect()
        })
        .collect()
}

struct BFacet {
    /// Sorted vertex ids.
    verts: Vec<usize>,
    /// Outward normal and offset in perturbed coordinates.
    normal: Vec<f64>,
    offset: f64,
    /// Orientation: sign * det([v - o]) > 0 for interior o.
    sign: i8,
    alive: bool,
}

/// L1 bounding-box diameter, the scale for perturbations and tolerances.
fn l1_diameter<S: Scalar>(pts: &[Vec<S>]) -> S {
    let d = pts[0].len();
    let mut total = S::zero();
    for c in 0..d {
        let mut lo = pts[0][c].clone();
        let mut hi = pts[0][c].clone();
        for p in pts {
            if p[c] < lo {
                lo = p[c].clone();
            }
            if p[c] > hi {
                hi = p[c].clone();
            }
        }
        total = total.add(&hi.sub(&lo));
    }
    total
}

/// Greedy affinely independent d+1 points, maximizing orthogonal residuals.
fn greedy_simplex<S: Scalar>(pts: &[Vec<S>], d: usize, diam: &S) -> Result<Vec<usize>, HullFail> {
    let start = (0..pts.len())
        .min_by(|&a, &b| pts[a].partial_cmp(&pts[b]).unwrap_or(core::cmp::Ordering::Equal))
        .unwrap();
    let mut chosen = alloc::vec![start];
    let mut dirs: Vec<Vec<S>> = Vec::new();
    let eps = S::eps(diam);
    let eps_sq = eps.mul(&eps);
    for _ in 0..d {
        let mut best: Option<(usize, S, Vec<S>)> = None;
        for i in 0..pts.len() {
            if chosen.contains(&i) {
                continue;
            }
            let mut r = sub_vec(&pts[i], &pts[start]);
            for dir in &dirs {
                let den = dot(dir, dir);
                if den.is_zero() {
                    continue;
                }
                let f = dot(&r, dir).div(&den);
                for (x, y) in r.iter_mut().zip(dir) {
                    *x = x.sub(&f.mul(y));
                }
            }
            let rsq = dot(&r, &r);
            if best.as_ref().map_or(true, |(_, b, _)| rsq > *b) {
                best = Some((i, rsq, r));
            }
        }
        match best {
            Some((i, rsq, r)) if rsq > eps_sq => {
                chosen.push(i);
                dirs.push(r);
            }
            _ => return Err(HullFail::NotFullDimensional),
        }
    }
    Ok(chosen)
}

/// The perturbed-space work happens in f64 regardless of S: perturbation
/// margins (~1e-9 of the diameter) dwarf double-precision noise, and only
/// combinatorial decisions are taken here. Exact inputs are converted once.
struct Complex {
    facets: Vec<BFacet>,
}

fn signed_det(rows: &mut [Vec<f64>]) -> f64 {
    det_in_place(rows)
}

fn make_facet(
    pp: &[Vec<f64>],
    mut verts: Vec<usize>,
    interior: &[f64],
    scale: f64,
) -> Result<BFacet, HullFail> {
    verts.sort_unstable();
    let d = pp[0].len();
    let rows: Vec<&[f64]> = verts.iter().map(|&v| pp[v].as_slice()).collect();
    let mut normal = hyperplane_normal::<f64>(&rows);
    let nmax = normal.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut plane_scale = 1.0f64;
    for _ in 1..d {
        plane_scale *= scale.max(1.0);
    }
    if !(nmax > 1e-13 * plane_scale) {
        return Err(HullFail::Failed("degenerate facet normal"));
    }
    for x in normal.iter_mut() {
        *x /= nmax;
    }
    let mut offset = dot::<f64>(&normal, &pp[verts[0]]);
    let side = dot::<f64>(&normal, interior) - offset;
    if side.abs() <= 1e-13 * scale.max(1.0) {
        return Err(HullFail::Failed("interior point on facet plane"));
    }
    if side > 0.0 {
        for x in normal.iter_mut() {
            *x = -*x;
        }
        offset = -offset;
    }
    let mut rows: Vec<Vec<f64>> = verts.iter().map(|&v| sub_vec(&pp[v], interior)).collect();
    let dt = signed_det(&mut rows);
    if dt == 0.0 {
        return Err(HullFail::Failed("flat facet cone"));
    }
    Ok(BFacet { verts, normal, offset, sign: if dt > 0.0 { 1 } else { -1 }, alive: true })
}

fn build_complex(pp: &[Vec<f64>], d: usize, diam: f64) -> Result<Complex, HullFail> {
    let init = greedy_simplex(pp, d, &diam)?;
    let interior: Vec<f64> = (0..d)
        .map(|c| init.iter().map(|&v| pp[v][c]).sum::<f64>() / (d as f64 + 1.0))
        .collect();
    let mut facets: Vec<BFacet> = Vec::new();
    for omit in 0..init.len() {
        let verts: Vec<usize> =
            init.iter().enumerate().filter(|&(k, _)| k != omit).map(|(_, &v)| v).collect();
        facets.push(make_facet(pp, verts, &interior, diam)?);
    }

    let mut order: Vec<usize> = (0..pp.len()).filter(|i| !init.contains(i)).collect();
    order.sort_unstable();
    for idx in order {
        let p = &pp[idx];
        let mut visible: Vec<usize> = Vec::new();
        for (f, facet) in facets.iter().enumerate() {
            if facet.alive && dot::<f64>(&facet.normal, p) - facet.offset > 0.0 {
                visible.push(f);
            }
        }
        if visible.is_empty() {
            continue;
        }
        // Ridges appearing once among visible facets form the horizon.
        let mut ridges: BTreeMap<Vec<usize>, u32> = BTreeMap::new();
        for &f in &visible {
            let verts = &facets[f].verts;
            for omit in 0..verts.len() {
                let ridge: Vec<usize> = verts
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != omit)
                    .map(|(_, &v)| v)
                    .collect();
                *ridges.entry(ridge).or_insert(0) += 1;
            }
        }
        for &f in &visible {
            facets[f].alive = false;
        }
        let mut grew = false;
        for (ridge, count) in ridges {
            if count != 1 {
                continue;
            }
            let mut verts = ridge;
            verts.push(idx);
            facets.push(make_facet(pp, verts, &interior, diam)?);
            grew = true;
        }
        if !grew {
            return Err(HullFail::Failed("no horizon for visible point"));
        }
        if facets.len() > FACET_CAP {
            return Err(HullFail::Failed("facet cap exceeded"));
        }
    }
    facets.retain(|f| f.alive);
    Ok(Complex { facets })
}

fn factorial<S: Scalar>(k: usize) -> S {
    let mut v: i64 = 1;
    for i in 2..=k as i64 {
        v *= i;
    }
    S::from_int(v)
}

/// Signed cone volume of facet `verts` (ordered ascending) from `apex`,
/// with the facet's stored orientation sign applied.
fn cone_volume<S: Scalar>(pts: &[Vec<S>], verts: &[usize], sign: i8, apex: &[S]) -> S {
    let d = apex.len();
    let mut rows: Vec<Vec<S>> = verts.iter().map(|&v| sub_vec(&pts[v], apex)).collect();
    let dt = det_in_place(&mut rows);
    let v = dt.div(&factorial::<S>(d));
    if sign < 0 {
        v.neg()
    } else {
        v
    }
}

struct Attempt<S: Scalar> {
    extreme: Vec<usize>,
    planes: Vec<(Vec<S>, S)>,
    simplices: Vec<Vec<usize>>,
    simplex_volumes: Vec<S>,
    volume: S,
    folds: bool,
}

/// Canonical plane: scale so the largest |coefficient| is one, preserving
/// orientation.
fn canonical_plane<S: Scalar>(mut n: Vec<S>, b: S) -> (Vec<S>, S) {
    let mut mag = S::zero();
    for x in &n {
        if x.abs() > mag {
            mag = x.abs();
        }
    }
    if mag.is_zero() {
        return (n, b);
    }
    for x in n.iter_mut() {
        *x = x.div(&mag);
    }
    (n, b.div(&mag))
}

fn plane_close<S: Scalar>(a: &(Vec<S>, S), b: &(Vec<S>, S), tol: &S) -> bool {
    if a.1.sub(&b.1).abs() > *tol {
        return false;
    }
    a.0.iter().zip(&b.0).all(|(x, y)| x.sub(y).abs() <= *tol)
}

/// Refit a supporting plane through d well-spread points of the wide
/// support set; returns the canonical plane or None when the support cannot
/// span a facet.
fn polish_plane<S: Scalar>(
    pts: &[Vec<S>],
    support: &[usize],
    reference_normal: &[S],
    diam: &S,
) -> Option<(Vec<S>, S)> {
    let d = pts[0].len();
    if support.len() < d {
        return None;
    }
    // Greedy spread selection inside the support set.
    let start = support
        .iter()
        .copied()
        .min_by(|&a, &b| pts[a].partial_cmp(&pts[b]).unwrap_or(core::cmp::Ordering::Equal))?;
    let mut chosen = alloc::vec![start];
    let mut dirs: Vec<Vec<S>> = Vec::new();
    let eps = S::eps(diam);
    let eps_sq = eps.mul(&eps);
    for _ in 0..d - 1 {
        let mut best: Option<(usize, S, Vec<S>)> = None;
        for &i in support {
            if chosen.contains(&i) {
                continue;
            }
            let mut r = sub_vec(&pts[i], &pts[start]);
            for dir in &dirs {
                let den = dot(dir, dir);
                if den.is_zero() {
                    continue;
                }
                let f = dot(&r, dir).div(&den);
                for (x, y) in r.iter_mut().zip(dir) {
                    *x = x.sub(&f.mul(y));
                }
            }
            let rsq = dot(&r, &r);
            if best.as_ref().map_or(true, |(_, b, _)| rsq > *b) {
                best = Some((i, rsq, r));
            }
        }
        match best {
            Some((i, rsq, r)) if rsq > eps_sq => {
                chosen.push(i);
                dirs.push(r);
            }
            _ => return None,
        }
    }
    let rows: Vec<&[S]> = chosen.iter().map(|&v| pts[v].as_slice()).collect();
    let mut n = hyperplane_normal(&rows);
    if n.iter().all(|x| x.is_zero()) {
        return None;
    }
    if dot(&n, reference_normal) < S::zero() {
        for x in n.iter_mut() {
            *x = x.neg();
        }
    }
    let mut b = dot(&n, &pts[chosen[0]]);
    // Snap the offset to the true support value.
    for p in pts {
        let v = dot(&n, p);
        if v > b {
            b = v;
        }
    }
    Some(canonical_plane(n, b))
}

fn attempt<S: Scalar>(
    pts: &[Vec<S>],
    pp: &[Vec<f64>],
    d: usize,
    diam: &S,
) -> Result<Attempt<S>, HullFail> {
    let diam_f = diam.to_f64();
    let complex = build_complex(pp, d, diam_f)?;
    let scale = {
        let one = S::one();
        if *diam > one {
            diam.clone()
        } else {
            one
        }
    };
    let wide_tol = scale.mul(&S::ratio(1, 100_000_000)); // 1e-8 of scale, 0 if exact
    let wide_tol = if S::EXACT { S::zero() } else { wide_tol };
    let tight_tol = wide_tol.clone();

    // Candidate planes in original coordinates, largest simplices first.
    let mut cands: Vec<(usize, Vec<S>, S)> = Vec::new();
    for (f, facet) in complex.facets.iter().enumerate() {
        let rows: Vec<&[S]> = facet.verts.iter().map(|&v| pts[v].as_slice()).collect();
        let n = hyperplane_normal(&rows);
        let nsq = dot(&n, &n);
        if nsq.is_zero() {
            continue;
        }
        cands.push((f, n, nsq));
    }
    cands.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap_or(core::cmp::Ordering::Equal));

    let mut planes: Vec<(Vec<S>, S)> = Vec::new();
    let dedup_tol = if S::EXACT { S::zero() } else { S::eps(&scale).mul(&S::from_int(10_000)) };
    for (f, n, _) in &cands {
        let facet = &complex.facets[*f];
        // Orient so the facet's own simplex is tight at the support value.
        let c = dot(n, &pts[facet.verts[0]]);
        let mut bp = dot(n, &pts[0]);
        let mut bm = dot(n, &pts[0]).neg();
        for p in pts.iter().skip(1) {
            let v = dot(n, p);
            if v > bp {
                bp = v.clone();
            }
            let vn = v.neg();
            if vn > bm {
                bm = vn;
            }
        }
        let ntol = {
            // tolerance scaled by the raw normal magnitude
            let mut nmax = S::zero();
            for x in n {
                if x.abs() > nmax {
                    nmax = x.abs();
                }
            }
            if S::EXACT {
                S::zero()
            } else {
                wide_tol.mul(&nmax)
            }
        };
        let (norm, off) = if bp.sub(&c).abs() <= ntol {
            (n.clone(), bp)
        } else if bm.add(&c).abs() <= ntol {
            (n.iter().map(|x| x.neg()).collect(), bm)
        } else {
            continue; // fold simplex, supports nothing
        };
        // Wide support set and refit.
        let support: Vec<usize> = (0..pts.len())
            .filter(|&i| dot(&norm, &pts[i]) >= off.sub(&ntol))
            .collect();
        let Some(plane) = polish_plane(pts, &support, &norm, diam) else { continue };
        if planes.iter().any(|q| plane_close(q, &plane, &dedup_tol)) {
            continue;
        }
        // The tight set must span the plane (affine rank d-1).
        let tight: Vec<usize> = (0..pts.len())
            .filter(|&i| plane.1.sub(&dot(&plane.0, &pts[i])).abs() <= tight_tol)
            .collect();
        if tight.len() < d {
            continue;
        }
        let mut diffs: Vec<Vec<S>> =
            tight.iter().skip(1).map(|&i| sub_vec(&pts[i], &pts[tight[0]])).collect();
        let rk = rank_in_place(&mut diffs, &S::eps(diam));
        if rk != d - 1 {
            continue;
        }
        planes.push(plane);
    }

    // Validate: every point inside every plane.
    let val_tol = if S::EXACT { S::zero() } else { scale.mul(&S::ratio(1, 10_000_000)) };
    for p in pts {
        for (n, b) in &planes {
            if dot(n, p) > b.add(&val_tol) {
                return Err(HullFail::Failed("point outside polished plane"));
            }
        }
    }

    // Extreme points: candidates whose active plane normals span R^d.
    let act_tol = if S::EXACT { S::zero() } else { scale.mul(&S::ratio(1, 100_000_000)) };
    let mut cand_ids: Vec<usize> = complex.facets.iter().flat_map(|f| f.verts.clone()).collect();
    cand_ids.sort_unstable();
    cand_ids.dedup();
    let mut extreme = Vec::new();
    for &v in &cand_ids {
        let mut act: Vec<Vec<S>> = Vec::new();
        for (n, b) in &planes {
            if b.sub(&dot(n, &pts[v])).abs() <= act_tol {
                act.push(n.clone());
            }
        }
        if act.len() >= d && rank_in_place(&mut act, &S::eps(&S::one())) == d {
            extreme.push(v);
        }
    }
    if extreme.is_empty() {
        return Err(HullFail::Failed("no extreme points identified"));
    }

    // Decomposition: cones from the lexicographically smallest extreme point.
    let apex = *extreme
        .iter()
        .min_by(|&&a, &&b| pts[a].partial_cmp(&pts[b]).unwrap_or(core::cmp::Ordering::Equal))
        .unwrap();
    let mut signed_total = S::zero();
    let mut simplices = Vec::new();
    let mut simplex_volumes = Vec::new();
    let mut folds = false;
    let fold_tol = if S::EXACT {
        S::zero()
    } else {
        let mut t = S::ratio(1, 1_000_000_000_000);
        for _ in 0..d {
            t = t.mul(&scale);
        }
        t
    };
    for facet in &complex.facets {
        let sv = cone_volume(pts, &facet.verts, facet.sign, &pts[apex]);
        signed_total = signed_total.add(&sv);
        if sv < fold_tol.neg() {
            folds = true;
        }
        if sv > fold_tol {
            let mut simplex = alloc::vec![apex];
            simplex.extend_from_slice(&facet.verts);
            simplices.push(simplex);
            simplex_volumes.push(sv);
        }
    }
    let mut volume = S::zero();
    for v in &simplex_volumes {
        volume = volume.add(v);
    }
    // The positive-cone total must match the signed total unless folds
    // cancelled mass; then the extreme-only repass supplies the tiling.
    let sum_tol = if S::EXACT {
        S::zero()
    } else {
        let vs = if volume > S::one() { volume.clone() } else { S::one() };
        vs.mul(&S::ratio(1, 1_000_000_000))
    };
    if signed_total.abs().sub(&volume).abs() > sum_tol {
        folds = true;
    }
    Ok(Attempt { extreme, planes, simplices, simplex_volumes, volume, folds })
}

/// Full pipeline: perturbation ladder, one retry pass on the extreme subset
/// when the decomposition saw folds. `pts` must be full-dimensional and
/// deduplicated; d >= 1.
pub(crate) fn hull_pipeline<S: Scalar>(pts: &[Vec<S>]) -> Result<HullData<S>, HullFail> {
    let d = pts[0].len();
    if pts.len() < d + 1 {
        return Err(HullFail::NotFullDimensional);
    }
    let diam = l1_diameter(pts);
    if diam.is_zero() {
        return Err(HullFail::NotFullDimensional);
    }
    // Degeneracy must be judged on the original coordinates; the perturbed
    // copies are always in general position.
    greedy_simplex(pts, d, &diam)?;
    let ladder: [(i64, i64, u64); 4] = [
        (1, 1_000_000_000, 0x5eed_0001),
        (3, 100_000_000, 0x5eed_0002),
        (1, 1_000_000, 0x5eed_0003),
        (7, 10_000_000_000, 0x5eed_0004),
    ];
    let mut last_err = "hull failed";
    for &(num, den, seed) in &ladder {
        let mag = diam.mul(&S::ratio(num, den));
        let pp: Vec<Vec<f64>> = perturb(pts, &mag, seed)
            .into_iter()
            .map(|p| p.into_iter().map(|x| x.to_f64()).collect())
            .collect();
        let first = match attempt(pts, &pp, d, &diam) {
            Ok(a) => a,
            Err(HullFail::NotFullDimensional) => return Err(HullFail::NotFullDimensional),
            Err(HullFail::Failed(msg)) => {
                last_err = msg;
                continue;
            }
        };
        if !first.folds {
            return Ok(HullData {
                extreme: first.extreme,
                planes: first.planes,
                simplices: first.simplices,
                simplex_volumes: first.simplex_volumes,
                volume: first.volume,
            });
        }
        // Folds: rebuild the tiling from the extreme points only.
        let sub_pts: Vec<Vec<S>> = first.extreme.iter().map(|&i| pts[i].clone()).collect();
        let sub_pp: Vec<Vec<f64>> = perturb(&sub_pts, &mag, seed ^ 0xb0df00d)
            .into_iter()
            .map(|p| p.into_iter().map(|x| x.to_f64()).collect())
            .collect();
        match attempt(&sub_pts, &sub_pp, d, &diam) {
            Ok(second) if !second.folds => {
                let remap = |ids: &[usize]| -> Vec<usize> {
                    ids.iter().map(|&i| first.extreme[i]).collect()
                };
                return Ok(HullData {
                    extreme: remap(&second.extreme),
                    planes: second.planes,
                    simplices: second.simplices.iter().map(|s| remap(s)).collect(),
                    simplex_volumes: second.simplex_volumes,
                    volume: second.volume,
                });
            }
            Ok(_) => {
                last_err = "folds persisted on extreme subset";
                continue;
            }
            Err(HullFail::NotFullDimensional) => return Err(HullFail::NotFullDimensional),
            Err(HullFail::Failed(msg)) => {
                last_err = msg;
                continue;
            }
        }
    }
    Err(HullFail::Failed(last_err))
}
