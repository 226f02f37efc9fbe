//! Convex polytope kernel.
//!
//! Purpose: vertex hulls, supporting planes, simplicial decompositions,
//! volumes in the dimension of the affine hull, coordinate projections,
//! affine slices, Minkowski sums, gauges, and membership tests.
//!
//! Conventions: points are dense coordinate vectors; `volume_in_dim(P, k)`
//! measures k-dimensional volume inside the affine hull and is zero when
//! the affine hull has dimension below k; a single point has 0-volume 1 and
//! the empty set has volume 0 in every dimension. All operations are
//! deterministic for a fixed input.

mod hull;
pub mod rational;
pub(crate) mod scalar;

use alloc::vec::Vec;

use hull::{hull_pipeline, HullFail};

pub type Point = Vec<f64>;

/// Extreme points of a full-dimensional polytope, lexicographically sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct VPolytope {
    pub dim: usize,
    pub vertices: Vec<Point>,
}

/// Intersection of halfspaces `normal . x <= offset` with unit normals.
#[derive(Debug, Clone, PartialEq)]
pub struct HPolytope {
    pub dim: usize,
    pub normals: Vec<Point>,
    pub offsets: Vec<f64>,
}

impl HPolytope {
    /// Smallest slack `offset - normal . x` over all halfspaces; negative
    /// outside, and `+inf` when there are no halfspaces.
    pub fn margin(&self, x: &[f64]) -> f64 {
        let mut m = f64::INFINITY;
        for (n, b) in self.normals.iter().zip(&self.offsets) {
            let s = b - scalar::dot::<f64>(n, x);
            if s < m {
                m = s;
            }
        }
        m
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.margin(x) >= -tol
    }
}

/// Full-dimensional simplices tiling a polytope; `simplices` index into
/// `points`, every simplex has positive volume, and the volumes sum to
/// `total_volume`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialDecomposition {
    pub dim: usize,
    pub points: Vec<Point>,
    pub simplices: Vec<Vec<usize>>,
    pub volumes: Vec<f64>,
    pub total_volume: f64,
}

/// Hull of a full-dimensional point set: extreme points, supporting planes,
/// and a simplicial decomposition over the deduplicated input points.
#[derive(Debug, Clone, PartialEq)]
pub struct Hull {
    pub vpoly: VPolytope,
    pub hpoly: HPolytope,
    pub decomposition: SimplicialDecomposition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeomError {
    Empty,
    NonFinite,
    DimensionMismatch,
    NotFullDimensional,
    HullFailed(&'static str),
    CapacityExceeded(&'static str),
}

impl core::fmt::Display for GeomError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            GeomError::Empty => write!(f, "empty point set"),
            GeomError::NonFinite => write!(f, "non-finite coordinate"),
            GeomError::DimensionMismatch => write!(f, "coordinate dimension mismatch"),
            GeomError::NotFullDimensional => write!(f, "point set is not full-dimensional"),
            GeomError::HullFailed(msg) => write!(f, "hull construction failed: {msg}"),
            GeomError::CapacityExceeded(msg) => write!(f, "capacity exceeded: {msg}"),
        }
    }
}

impl core::error::Error for GeomError {}

fn validate(points: &[Point]) -> Result<usize, GeomError> {
    let Some(first) = points.first() else { return Err(GeomError::Empty) };
    let d = first.len();
    for p in points {
        if p.len() != d {
            return Err(GeomError::DimensionMismatch);
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(GeomError::NonFinite);
        }
    }
    Ok(d)
}

fn lex_cmp(a: &[f64], b: &[f64]) -> core::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(core::cmp::Ordering::Equal) => continue,
            Some(o) => return o,
            None => return core::cmp::Ordering::Equal,
        }
    }
    core::cmp::Ordering::Equal
}

fn l1_diameter(points: &[Point]) -> f64 {
    let d = points[0].len();
    let mut total = 0.0;
    for c in 0..d {
        let mut lo = points[0][c];
        let mut hi = points[0][c];
        for p in points {
            lo = lo.min(p[c]);
            hi = hi.max(p[c]);
        }
        total += hi - lo;
    }
    total
}

/// Lexicographic sort plus tolerance deduplication (first survivor kept).
fn sorted_dedup(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| lex_cmp(a, b));
    let tol = 1e-9 * l1_diameter(&pts).max(1.0);
    let mut keep: Vec<Point> = Vec::with_capacity(pts.len());
    'outer: for p in pts {
        for q in &keep {
            if p.iter().zip(q).all(|(x, y)| (x - y).abs() <= tol) {
                continue 'outer;
            }
        }
        keep.push(p);
    }
    keep
}

/// Orthonormal basis of the affine hull: (origin, basis, rank). The origin
/// is the lexicographically smallest point; basis vectors are chosen by
/// greedy residual pivoting.
fn affine_basis(pts: &[Point]) -> (Point, Vec<Point>, usize) {
    let d = pts[0].len();
    let tol = 1e-9 * l1_diameter(pts).max(1.0);
    let origin = pts
        .iter()
        .min_by(|a, b| lex_cmp(a, b))
        .expect("nonempty")
        .clone();
    let mut basis: Vec<Point> = Vec::new();
    loop {
        if basis.len() == d {
            break;
        }
        let mut best: Option<(f64, Point)> = None;
        for p in pts {
            let mut r: Point = p.iter().zip(&origin).map(|(x, o)| x - o).collect();
            // Two orthogonalization passes for stability.
            for _ in 0..2 {
                for b in &basis {
                    let f = scalar::dot::<f64>(&r, b);
                    for (x, y) in r.iter_mut().zip(b) {
                        *x -= f * y;
                    }
                }
            }
            let nrm = crate::mathx::norm(&r);
            if best.as_ref().map_or(true, |(bn, _)| nrm > *bn) {
                best = Some((nrm, r));
            }
        }
        match best {
            Some((nrm, mut r)) if nrm > tol => {
                for x in r.iter_mut() {
                    *x /= nrm;
                }
                basis.push(r);
            }
            _ => break,
        }
    }
    let rank = basis.len();
    (origin, basis, rank)
}

/// Dimension of the affine hull of the points.
pub fn affine_rank(points: &[Point]) -> Result<usize, GeomError> {
    validate(points)?;
    let pts = sorted_dedup(points);
    Ok(affine_basis(&pts).2)
}

/// Hull of a full-dimensional point set.
pub fn convex_hull(points: &[Point]) -> Result<Hull, GeomError> {
    let d = validate(points)?;
    if d == 0 {
        return Err(GeomError::DimensionMismatch);
    }
    let pts = sorted_dedup(points);
    if pts.len() < d + 1 {
        return Err(GeomError::NotFullDimensional);
    }
    let data = match hull_pipeline::<f64>(&pts) {
        Ok(data) => data,
        Err(HullFail::NotFullDimensional) => return Err(GeomError::NotFullDimensional),
        Err(HullFail::Failed(msg)) => return Err(GeomError::HullFailed(msg)),
    };
    let mut vertices: Vec<Point> = data.extreme.iter().map(|&i| pts[i].clone()).collect();
    vertices.sort_by(|a, b| lex_cmp(a, b));
    let mut normals = Vec::with_capacity(data.planes.len());
    let mut offsets = Vec::with_capacity(data.planes.len());
    for (n, b) in data.planes {
        let nrm = crate::mathx::norm(&n);
        if nrm == 0.0 {
            return Err(GeomError::HullFailed("zero facet normal"));
        }
        normals.push(n.iter().map(|x| x / nrm).collect());
        offsets.push(b / nrm);
    }
    Ok(Hull {
        vpoly: VPolytope { dim: d, vertices },
        hpoly: HPolytope { dim: d, normals, offsets },
        decomposition: SimplicialDecomposition {
            dim: d,
            points: pts,
            simplices: data.simplices,
            volumes: data.simplex_volumes,
            total_volume: data.volume,
        },
    })
}

/// k-dimensional volume of the hull inside its affine hull. Zero when the
/// affine hull has dimension below k, an error when it exceeds k.
pub fn volume_in_dim(points: &[Point], k: usize) -> Result<f64, GeomError> {
    if points.is_empty() {
        return Ok(0.0);
    }
    validate(points)?;
    let pts = sorted_dedup(points);
    if k == 0 {
        return Ok(1.0);
    }
    let (origin, basis, rank) = affine_basis(&pts);
    if rank < k {
        return Ok(0.0);
    }
    if rank > k {
        return Err(GeomError::DimensionMismatch);
    }
    let coords: Vec<Point> = pts
        .iter()
        .map(|p| {
            basis
                .iter()
                .map(|b| {
                    p.iter()
                        .zip(&origin)
                        .zip(b)
                        .map(|((x, o), v)| (x - o) * v)
                        .sum()
                })
                .collect()
        })
        .collect();
    match hull_pipeline::<f64>(&coords) {
        Ok(data) => Ok(data.volume),
        // Below the resolution of the rank tolerance: measure zero.
        Err(HullFail::NotFullDimensional) => Ok(0.0),
        Err(HullFail::Failed(msg)) => Err(GeomError::HullFailed(msg)),
    }
}

/// Ambient-dimensional volume; zero for sets that are not full-dimensional.
pub fn volume(points: &[Point]) -> Result<f64, GeomError> {
    if points.is_empty() {
        return Ok(0.0);
    }
    let d = validate(points)?;
    if d == 0 {
        return Ok(1.0);
    }
    volume_in_dim(points, d)
}

/// Coordinate projection keeping the listed coordinates in the given order.
pub fn project(points: &[Point], keep: &[usize]) -> Vec<Point> {
    points
        .iter()
        .map(|p| keep.iter().map(|&c| p[c]).collect())
        .collect()
}

/// Area of the convex polygon whose boundary passes through all the given
/// 2-dimensional points, by angular sort around the vertex centroid and the
/// shoelace formula. Every input must lie on the polygon boundary (interior
/// points would corrupt the angular order); duplicates and collinear edge
/// points are harmless. Returns 0 for degenerate clouds.
pub fn convex_area_2d(points: &[Point]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let mut ang: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (crate::mathx::atan2(p[1] - cy, p[0] - cx), i))
        .collect();
    ang.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    let mut twice = 0.0;
    for k in 0..ang.len() {
        let p = &points[ang[k].1];
        let q = &points[ang[(k + 1) % ang.len()].1];
        twice += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * twice.abs()
}

fn combinations(n: usize, k: usize) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u64)?;
        acc /= (i + 1) as u64;
    }
    Some(acc)
}

/// Vertices of the slice of `h` by the affine subspace fixing the listed
/// coordinates; empty when the slice is empty. Points carry full ambient
/// coordinates.
pub fn slice(h: &HPolytope, fixed: &[(usize, f64)]) -> Result<Vec<Point>, GeomError> {
    let d = h.dim;
    for &(c, v) in fixed {
        if c >= d {
            return Err(GeomError::DimensionMismatch);
        }
        if !v.is_finite() {
            return Err(GeomError::NonFinite);
        }
    }
    let mut seen = alloc::vec![false; d];
    for &(c, _) in fixed {
        if seen[c] {
            return Err(GeomError::DimensionMismatch);
        }
        seen[c] = true;
    }
    let free: Vec<usize> = (0..d).filter(|c| !seen[*c]).collect();
    let r = free.len();
    let scale = h.offsets.iter().fold(1.0f64, |a, b| a.max(b.abs()));
    let feas_tol = 1e-7 * scale;

    let assemble = |free_vals: &[f64]| -> Point {
        let mut x = alloc::vec![0.0; d];
        for &(c, v) in fixed {
            x[c] = v;
        }
        for (j, &c) in free.iter().enumerate() {
            x[c] = free_vals[j];
        }
        x
    };

    if r == 0 {
        let x = assemble(&[]);
        return Ok(if h.contains(&x, feas_tol) { alloc::vec![x] } else { Vec::new() });
    }

    let f = h.normals.len();
    match combinations(f, r) {
        Some(c) if c <= 2_000_000 => {}
        _ => return Err(GeomError::CapacityExceeded("slice facet subsets")),
    }
    if f < r {
        return Ok(Vec::new());
    }

    let mut out: Vec<Point> = Vec::new();
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        // Solve the r x r system over the free coordinates.
        let mut mat: Vec<Point> = Vec::with_capacity(r);
        let mut rhs: Point = Vec::with_capacity(r);
        for &j in &idx {
            let n = &h.normals[j];
            mat.push(free.iter().map(|&c| n[c]).collect());
            let mut b = h.offsets[j];
            for &(c, v) in fixed {
                b -= n[c] * v;
            }
            rhs.push(b);
        }
        if let Some(sol) = solve_linear(&mut mat, &mut rhs) {
            let x = assemble(&sol);
            if h.contains(&x, feas_tol) {
                out.push(x);
            }
        }
        // Next r-combination of 0..f in lexicographic order.
        let mut i = r;
        loop {
            if i == 0 {
                return Ok(dedup_points(out));
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
}

fn dedup_points(points: Vec<Point>) -> Vec<Point> {
    if points.is_empty() {
        return points;
    }
    sorted_dedup(&points)
}

/// Gaussian elimination with partial pivoting; None when near-singular.
fn solve_linear(mat: &mut [Point], rhs: &mut Point) -> Option<Point> {
    let n = rhs.len();
    let piv_tol = 1e-11;
    for col in 0..n {
        let (best, mag) = (col..n)
            .map(|row| (row, mat[row][col].abs()))
            .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let row_scale = mat[best].iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if mag <= piv_tol * row_scale.max(1.0) {
            return None;
        }
        mat.swap(col, best);
        rhs.swap(col, best);
        for row in col + 1..n {
            let fct = mat[row][col] / mat[col][col];
            if fct == 0.0 {
                continue;
            }
            for c in col..n {
                mat[row][c] -= fct * mat[col][c];
            }
            rhs[row] -= fct * rhs[col];
        }
    }
    let mut sol = alloc::vec![0.0; n];
    for row in (0..n).rev() {
        let mut v = rhs[row];
        for c in row + 1..n {
            v -= mat[row][c] * sol[c];
        }
        sol[row] = v / mat[row][row];
    }
    if sol.iter().all(|x| x.is_finite()) {
        Some(sol)
    } else {
        None
    }
}

/// Pairwise vertex sums; the hull of the result is the Minkowski sum of the
/// hulls.
pub fn minkowski_sum(a: &[Point], b: &[Point]) -> Vec<Point> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for p in a {
        for q in b {
            out.push(p.iter().zip(q).map(|(x, y)| x + y).collect());
        }
    }
    out
}

/// Coordinatewise `factors[c] * x[c] + shift[c]`.
pub fn scale_translate(points: &[Point], factors: &[f64], shift: &[f64]) -> Vec<Point> {
    points
        .iter()
        .map(|p| {
            p.iter()
                .enumerate()
                .map(|(c, x)| factors[c] * x + shift[c])
                .collect()
        })
        .collect()
}

/// Whether the hulls of two full-dimensional point sets coincide after
/// translating both so their extreme-point centroids sit at the origin.
pub fn equal_up_to_translation(a: &[Point], b: &[Point], tol: f64) -> Result<bool, GeomError> {
    let ha = convex_hull(a)?;
    let hb = convex_hull(b)?;
    let va = &ha.vpoly.vertices;
    let vb = &hb.vpoly.vertices;
    if va.len() != vb.len() {
        return Ok(false);
    }
    let d = ha.vpoly.dim;
    if d != hb.vpoly.dim {
        return Err(GeomError::DimensionMismatch);
    }
    let centroid = |vs: &Vec<Point>| -> Point {
        (0..d)
            .map(|c| vs.iter().map(|v| v[c]).sum::<f64>() / vs.len() as f64)
            .collect()
    };
    let ca = centroid(va);
    let cb = centroid(vb);
    let mut sa: Vec<Point> = va
        .iter()
        .map(|v| v.iter().zip(&ca).map(|(x, c)| x - c).collect())
        .collect();
    let mut sb: Vec<Point> = vb
        .iter()
        .map(|v| v.iter().zip(&cb).map(|(x, c)| x - c).collect())
        .collect();
    sa.sort_by(|x, y| lex_cmp(x, y));
    sb.sort_by(|x, y| lex_cmp(x, y));
    Ok(sa
        .iter()
        .zip(&sb)
        .all(|(p, q)| p.iter().zip(q).all(|(x, y)| (x - y).abs() <= tol)))
}

/// Gauge of the hull of `vertices` at `x`, assuming the origin belongs to
/// the hull: the least `t >= 0` with `x` in `t * hull`. None when `x` lies
/// outside every dilate.
pub fn minkowski_functional(vertices: &[Point], x: &[f64]) -> Result<Option<f64>, GeomError> {
    let d = validate(vertices)?;
    if x.len() != d {
        return Err(GeomError::DimensionMismatch);
    }
    let m = vertices.len();
    let mut p = crate::lp::LinearProgram::new(m);
    for mu in p.bounds.iter_mut() {
        mu.0 = 0.0;
    }
    p.objective = alloc::vec![1.0; m];
    for c in 0..d {
        p.eq_rows.push(crate::lp::LinearConstraint {
            coeffs: vertices.iter().map(|v| v[c]).collect(),
            rhs: x[c],
        });
    }
    match crate::lp::lp_solve(&p) {
        Ok(sol) => match sol.status {
            crate::lp::LpStatus::Optimal => Ok(Some(sol.objective_value)),
            crate::lp::LpStatus::Infeasible => Ok(None),
            crate::lp::LpStatus::Unbounded => Err(GeomError::HullFailed("unbounded gauge")),
        },
        Err(_) => Err(GeomError::HullFailed("gauge solve failed")),
    }
}

/// Membership of `x` in the hull of `vertices`, decided by a feasibility
/// program over convex weights.
pub fn contains_v(vertices: &[Point], x: &[f64]) -> Result<bool, GeomError> {
    let d = validate(vertices)?;
    if x.len() != d {
        return Err(GeomError::DimensionMismatch);
    }
    let m = vertices.len();
    let mut p = crate::lp::LinearProgram::new(m);
    for lam in p.bounds.iter_mut() {
        lam.0 = 0.0;
    }
    for c in 0..d {
        p.eq_rows.push(crate::lp::LinearConstraint {
            coeffs: vertices.iter().map(|v| v[c]).collect(),
            rhs: x[c],
        });
    }
    p.eq_rows.push(crate::lp::LinearConstraint { coeffs: alloc::vec![1.0; m], rhs: 1.0 });
    match crate::lp::lp_solve(&p) {
        Ok(sol) => Ok(matches!(sol.status, crate::lp::LpStatus::Optimal)),
        Err(_) => Err(GeomError::HullFailed("membership solve failed")),
    }
}
