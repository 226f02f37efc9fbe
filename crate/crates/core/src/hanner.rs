//! Extremal box-plus-block construction from projection ratios.
//!
//! Purpose: for a body K and a proper coordinate set sigma, reduce K to its
//! normalized projection ratios, minimize those ratios sequentially in log
//! space under the cover-product and chain-product constraint system, and
//! assemble the comparison polytope conv(central box over sigma, volume
//! block in the complementary subspace). The construction certifies three
//! facts: equal volume with K, projection dominance by K on every subspace
//! through the complement, and the block volume matching K's base
//! projection. Closed-form volumes of the construction are cross-checked
//! against the hull pipeline so the conv-of-union volume factor is
//! validated geometrically rather than trusted.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::covers::{
    enumerate_irreducible_covers, enumerate_irreducible_covers_default, Cover, CoverError,
    IndexSet, MAX_ENUM_SIGMA,
};
use crate::geometry::{self, GeomError, Point, VPolytope};
use crate::inequalities::{d_tau, x_sigma, Body, InequalityError};
use crate::lp::{sequential_min, LinearConstraint, LinearProgram, LpError};
use crate::mathx;

/// Relative tolerance for the product identity t_tau = prod t_singletons.
pub const PRODUCT_IDENTITY_TOL: f64 = 1e-8;

/// Absolute log-space tolerance for calling a constraint row tight.
const ACTIVE_ROW_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub enum HannerError {
    Inequality(InequalityError),
    Cover(CoverError),
    Geometry(GeomError),
    Lp(LpError),
    /// Sequential minimization only supports sets this enumeration handles.
    SigmaTooLarge(usize),
    /// Product identity still violated after escalating enumeration caps.
    ProductIdentity { residual: f64 },
    /// A tuple entry escaped the proven bracket [lower, upper].
    BoundsViolated { value: f64, lower: f64, upper: f64 },
    /// Explicit block volume does not match the base projection volume.
    BlockVolumeMismatch { expected: f64, got: f64 },
    /// Explicit block has nonzero coordinates inside sigma.
    BlockOutsideSubspace,
    /// Explicit block must contain the origin for the cone volume formula.
    BlockMissingOrigin,
}

impl From<InequalityError> for HannerError {
    fn from(e: InequalityError) -> Self {
        HannerError::Inequality(e)
    }
}

impl From<CoverError> for HannerError {
    fn from(e: CoverError) -> Self {
        HannerError::Cover(e)
    }
}

impl From<GeomError> for HannerError {
    fn from(e: GeomError) -> Self {
        HannerError::Geometry(e)
    }
}

impl From<LpError> for HannerError {
    fn from(e: LpError) -> Self {
        HannerError::Lp(e)
    }
}

impl core::fmt::Display for HannerError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            HannerError::Inequality(e) => write!(f, "inequality: {e}"),
            HannerError::Cover(e) => write!(f, "cover: {e}"),
            HannerError::Geometry(e) => write!(f, "geometry: {e}"),
            HannerError::Lp(e) => write!(f, "lp: {e}"),
            HannerError::SigmaTooLarge(k) => {
                write!(f, "sigma size {k} above sequential minimization limit {MAX_ENUM_SIGMA}")
            }
            HannerError::ProductIdentity { residual } => {
                write!(f, "product identity residual {residual} above tolerance after escalation")
            }
            HannerError::BoundsViolated { value, lower, upper } => {
                write!(f, "tuple entry {value} outside proven bracket [{lower}, {upper}]")
            }
            HannerError::BlockVolumeMismatch { expected, got } => {
                write!(f, "block volume {got} does not match base projection volume {expected}")
            }
            HannerError::BlockOutsideSubspace => {
                write!(f, "block has nonzero coordinates inside sigma")
            }
            HannerError::BlockMissingOrigin => {
                write!(f, "block does not contain the origin")
            }
        }
    }
}

impl core::error::Error for HannerError {}

/// Normalized projection ratios of one body for one coordinate set: the
/// pinned ratio `x_sigma` and the cap `d_tau` for every subset of sigma.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionRatios {
    pub sigma: IndexSet,
    pub x_sigma: f64,
    d: BTreeMap<u16, f64>,
}

impl ProjectionRatios {
    /// The cap for one subset of sigma; the empty set has cap one.
    pub fn d(&self, tau: IndexSet) -> Option<f64> {
        if tau.is_empty() {
            return Some(1.0);
        }
        self.d.get(&tau.bits()).copied()
    }

    /// Largest cap over all subsets, the upper end of the proven bracket.
    pub fn upper_bound(&self) -> f64 {
        let mut hi = 1.0f64;
        for &v in self.d.values() {
            hi = hi.max(v);
        }
        hi
    }

    /// Smallest floor x_sigma^|tau| / prod d over singleton complements,
    /// the lower end of the proven bracket.
    pub fn lower_bound(&self) -> f64 {
        let n = self.sigma.ground_n();
        let mut lo = 1.0f64;
        for tau in self.sigma.nonempty_subsets() {
            let mut c = 1.0;
            for i in tau.iter() {
                let single = IndexSet::from_elems(n, &[i]).expect("element of sigma");
                let drop = self.sigma.difference(&single);
                c *= self.x_sigma / self.d(drop).expect("subset of sigma");
            }
            lo = lo.min(c);
        }
        lo
    }
}

/// Computes the pinned ratio and every subset cap for one body and sigma.
pub fn projection_ratios(
    body: &mut Body,
    sigma: IndexSet,
) -> Result<ProjectionRatios, HannerError> {
    let x = x_sigma(body, sigma)?;
    let mut d = BTreeMap::new();
    for tau in sigma.nonempty_subsets() {
        d.insert(tau.bits(), d_tau(body, sigma, tau)?);
    }
    Ok(ProjectionRatios { sigma, x_sigma: x, d })
}

/// Which constraint row a linear-program row index refers to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowLabel {
    /// Product row from one cover: (m-s) u_sigma <= sum of complements.
    CoverProduct(usize),
    /// Chain row for one subset: u_tau <= sum of its singletons.
    ChainProduct(u16),
}

/// The log-space constraint system: one variable per nonempty subset of
/// sigma in minimization order (size, then bitmask), the pin on sigma,
/// subset caps as variable bounds, and one row per cover and per chained
/// subset.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    pub lp: LinearProgram,
    pub vars: Vec<IndexSet>,
    pub row_labels: Vec<RowLabel>,
}

impl ConstraintSystem {
    pub fn var_index(&self, tau: IndexSet) -> Option<usize> {
        self.vars.iter().position(|v| *v == tau)
    }

    /// True when `values` satisfies every row, bound, and pin within `tol`.
    pub fn feasible(&self, values: &[f64], tol: f64) -> bool {
        if values.len() != self.lp.num_vars {
            return false;
        }
        for (k, &(lo, hi)) in self.lp.bounds.iter().enumerate() {
            if values[k] < lo - tol || values[k] > hi + tol {
                return false;
            }
        }
        for row in &self.lp.le_rows {
            let lhs: f64 = row.coeffs.iter().zip(values).map(|(c, v)| c * v).sum();
            if lhs > row.rhs + tol {
                return false;
            }
        }
        for row in &self.lp.eq_rows {
            let lhs: f64 = row.coeffs.iter().zip(values).map(|(c, v)| c * v).sum();
            if f64::abs(lhs - row.rhs) > tol {
                return false;
            }
        }
        true
    }
}

/// Builds the constraint system for the given ratios and cover list.
pub fn build_constraints(ratios: &ProjectionRatios, covers: &[Cover]) -> ConstraintSystem {
    let sigma = ratios.sigma;
    let mut vars = sigma.nonempty_subsets();
    vars.sort_by_key(|t| (t.len(), t.bits()));
    let index: BTreeMap<u16, usize> =
        vars.iter().enumerate().map(|(k, t)| (t.bits(), k)).collect();
    let mut lp = LinearProgram::new(vars.len());
    for (k, tau) in vars.iter().enumerate() {
        lp.bounds[k] = (
            f64::NEG_INFINITY,
            mathx::ln(ratios.d(*tau).expect("subset of sigma")),
        );
    }
    let sigma_idx = index[&sigma.bits()];
    let mut pin = alloc::vec![0.0; vars.len()];
    pin[sigma_idx] = 1.0;
    lp.eq_rows.push(LinearConstraint::new(pin, mathx::ln(ratios.x_sigma)));

    let mut row_labels = Vec::new();
    for (ci, cover) in covers.iter().enumerate() {
        let ms = (cover.m() as u32 - cover.s()) as f64;
        let mut coeffs = alloc::vec![0.0; vars.len()];
        coeffs[sigma_idx] += ms;
        let mut nonzero = ms != 0.0;
        for part in cover.parts() {
            let rest = sigma.difference(part);
            if rest.is_empty() {
                continue;
            }
            coeffs[index[&rest.bits()]] -= 1.0;
            nonzero = true;
        }
        if !nonzero {
            continue;
        }
        lp.le_rows.push(LinearConstraint::new(coeffs, 0.0));
        row_labels.push(RowLabel::CoverProduct(ci));
    }
    for (k, tau) in vars.iter().enumerate() {
        if tau.len() < 2 {
            continue;
        }
        let mut coeffs = alloc::vec![0.0; vars.len()];
        coeffs[k] += 1.0;
        for i in tau.iter() {
            let single =
                IndexSet::from_elems(sigma.ground_n(), &[i]).expect("element of sigma");
            coeffs[index[&single.bits()]] -= 1.0;
        }
        lp.le_rows.push(LinearConstraint::new(coeffs, 0.0));
        row_labels.push(RowLabel::ChainProduct(tau.bits()));
    }
    ConstraintSystem { lp, vars, row_labels }
}

/// The sequentially minimized tuple with its provenance: minimization
/// order, tight rows per subset, the proven bracket, and the product
/// identity residual.
#[derive(Debug, Clone)]
pub struct MinimalTuple {
    pub sigma: IndexSet,
    pub order: Vec<IndexSet>,
    /// Tuple entries keyed by subset bitmask; read through `t_of`.
    pub t: BTreeMap<u16, f64>,
    pub active: BTreeMap<u16, Vec<String>>,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub product_residual: f64,
    pub escalated: bool,
}

impl MinimalTuple {
    /// Tuple entry for a subset of sigma; the empty set is one.
    pub fn t_of(&self, tau: IndexSet) -> Option<f64> {
        if tau.is_empty() {
            return Some(1.0);
        }
        self.t.get(&tau.bits()).copied()
    }

    /// Tuple entry for the singleton {i}.
    pub fn t_single(&self, i: usize) -> Option<f64> {
        let single = IndexSet::from_elems(self.sigma.ground_n(), &[i]).ok()?;
        self.t_of(single)
    }

    /// Closed-form volume of the construction's projection keeping the
    /// complement of sigma plus `tau`: prod of singleton entries over tau
    /// times the block volume over the binomial weight.
    pub fn closed_form_projection(
        &self,
        tau: IndexSet,
        block_vol: f64,
    ) -> Result<f64, HannerError> {
        if !tau.is_subset(&self.sigma) {
            return Err(HannerError::Inequality(InequalityError::NotSubset));
        }
        let n = self.sigma.ground_n() as u32;
        let co_dim = n - self.sigma.len() as u32;
        let mut prod = 1.0;
        for i in tau.iter() {
            prod *= self
                .t_single(i)
                .ok_or(HannerError::Inequality(InequalityError::NotSubset))?;
        }
        Ok(prod * block_vol / mathx::binomial(co_dim + tau.len() as u32, co_dim) as f64)
    }
}

fn product_residual(sigma: IndexSet, t: &BTreeMap<u16, f64>) -> f64 {
    let n = sigma.ground_n();
    let mut worst = 0.0f64;
    for tau in sigma.nonempty_subsets() {
        if tau.len() < 2 {
            continue;
        }
        let mut prod = 1.0;
        for i in tau.iter() {
            let single = IndexSet::from_elems(n, &[i]).expect("element of sigma");
            prod *= t[&single.bits()];
        }
        let v = t[&tau.bits()];
        worst = worst.max(f64::abs(v - prod) / f64::max(f64::abs(v), f64::MIN_POSITIVE));
    }
    worst
}

fn solve_tuple(
    ratios: &ProjectionRatios,
    covers: &[Cover],
) -> Result<(ConstraintSystem, Vec<f64>, BTreeMap<u16, f64>), HannerError> {
    let system = build_constraints(ratios, covers);
    let order: Vec<usize> = (0..system.vars.len()).collect();
    let values = sequential_min(&system.lp, &order)?;
    let mut t = BTreeMap::new();
    for (k, tau) in system.vars.iter().enumerate() {
        t.insert(tau.bits(), mathx::exp(values[k]));
    }
    Ok((system, values, t))
}

/// Sequentially minimizes the constrained ratio tuple for one body and
/// sigma: subsets in (size, bitmask) order, each pinned at its minimum
/// before the next is minimized. Escalates the cover enumeration caps once
/// if the product identity fails, and reports a diagnostic error if it
/// still fails, rather than returning an unverified tuple.
pub fn minimal_tuple(body: &mut Body, sigma: IndexSet) -> Result<MinimalTuple, HannerError> {
    if sigma.len() > MAX_ENUM_SIGMA {
        return Err(HannerError::SigmaTooLarge(sigma.len()));
    }
    let ratios = projection_ratios(body, sigma)?;
    let enumeration = enumerate_irreducible_covers_default(sigma)?;
    let (mut system, mut values, mut t) = solve_tuple(&ratios, &enumeration.covers)?;
    let mut covers = enumeration.covers;
    let mut escalated = false;
    let mut residual = product_residual(sigma, &t);
    if residual > PRODUCT_IDENTITY_TOL {
        // Wider caps can only add covers, hence add rows and raise minima.
        let wide = enumerate_irreducible_covers(
            sigma,
            2usize << sigma.len(),
            2 * sigma.len() as u32,
        )?;
        covers = wide.covers;
        let solved = solve_tuple(&ratios, &covers)?;
        system = solved.0;
        values = solved.1;
        t = solved.2;
        escalated = true;
        residual = product_residual(sigma, &t);
        if residual > PRODUCT_IDENTITY_TOL {
            return Err(HannerError::ProductIdentity { residual });
        }
    }

    let lower = ratios.lower_bound();
    let upper = ratios.upper_bound();
    let slack = 1e-9 * f64::max(1.0, upper);
    for &v in t.values() {
        if v < lower - slack || v > upper + slack {
            return Err(HannerError::BoundsViolated { value: v, lower, upper });
        }
    }

    // A row is recorded as active for every subset it involves.
    let mut active: BTreeMap<u16, Vec<String>> = BTreeMap::new();
    for (row, label) in system.lp.le_rows.iter().zip(&system.row_labels) {
        let lhs: f64 = row.coeffs.iter().zip(&values).map(|(c, v)| c * v).sum();
        if f64::abs(lhs - row.rhs) > ACTIVE_ROW_TOL {
            continue;
        }
        let desc = match label {
            RowLabel::CoverProduct(ci) => {
                let mut s = String::from("cover ");
                s.push_str(&covers[*ci].to_compact());
                s
            }
            RowLabel::ChainProduct(bits) => {
                let tau = IndexSet::from_bits(sigma.ground_n(), *bits).expect("stored bits");
                let mut s = String::from("chain ");
                s.push_str(&tau.to_compact());
                s
            }
        };
        for (k, c) in row.coeffs.iter().enumerate() {
            if *c != 0.0 {
                active.entry(system.vars[k].bits()).or_default().push(desc.clone());
            }
        }
    }
    for (k, tau) in system.vars.iter().enumerate() {
        if f64::abs(values[k] - system.lp.bounds[k].1) <= ACTIVE_ROW_TOL {
            active.entry(tau.bits()).or_default().push(String::from("cap"));
        }
    }

    Ok(MinimalTuple {
        sigma,
        order: system.vars.clone(),
        t,
        active,
        lower_bound: lower,
        upper_bound: upper,
        product_residual: residual,
        escalated,
    })
}

/// How the volume block in the complementary subspace is chosen.
#[derive(Debug, Clone)]
pub enum BlockMode {
    /// Equal-sided coordinate box matching the base projection volume.
    Box,
    /// Caller-supplied block: full-dimensional ambient vertices with zero
    /// sigma coordinates, containing the origin, of the right volume.
    Explicit(VPolytope),
}

/// One closed-form-versus-reference comparison inside a witness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateReport {
    pub expected: f64,
    pub got: f64,
    pub error: f64,
    pub holds: bool,
}

impl CertificateReport {
    fn relative(expected: f64, got: f64, tol: f64) -> Self {
        let error = f64::abs(got - expected) / f64::max(1.0, f64::abs(expected));
        CertificateReport { expected, got, error, holds: error <= tol }
    }

    /// Dominance: `got` (the construction) must not exceed `expected` (the
    /// body) beyond the additive tolerance.
    fn dominated(expected: f64, got: f64, tol: f64) -> Self {
        let error = got - expected;
        CertificateReport { expected, got, error, holds: error <= tol }
    }
}

/// The assembled construction with its certificates.
#[derive(Debug, Clone)]
pub struct HannerWitness {
    pub sigma: IndexSet,
    /// Central box half-sides, one per element of sigma.
    pub c: Vec<(usize, f64)>,
    /// Equal block half-sides per complementary coordinate in box mode.
    pub block_sides: Option<Vec<(usize, f64)>>,
    /// Block vertices embedded in the ambient space.
    pub block_vertices: Vec<Point>,
    /// Vertices of the full construction.
    pub vertices: Vec<Point>,
    pub tuple: MinimalTuple,
    /// Closed-form volume of the construction against the body volume.
    pub vol_equal: CertificateReport,
    /// Per subset tau: body projection versus construction projection.
    pub projection_dominance: Vec<(IndexSet, CertificateReport)>,
    /// Block volume against the base projection volume.
    pub block_volume: CertificateReport,
    /// Closed-form projection volumes against hull volumes of the built
    /// vertex set, validating the cone volume factor.
    pub closed_form_vs_hull: Vec<(IndexSet, CertificateReport)>,
}

impl HannerWitness {
    pub fn all_hold(&self) -> bool {
        self.vol_equal.holds
            && self.block_volume.holds
            && self.projection_dominance.iter().all(|(_, r)| r.holds)
            && self.closed_form_vs_hull.iter().all(|(_, r)| r.holds)
    }
}

/// Assembles the construction for a minimized tuple and certifies it.
pub fn build_hanner(
    body: &mut Body,
    tuple: &MinimalTuple,
    mode: BlockMode,
) -> Result<HannerWitness, HannerError> {
    let sigma = tuple.sigma;
    let n = sigma.ground_n();
    if n != body.dim() {
        return Err(HannerError::Inequality(InequalityError::GroundMismatch {
            cover: n,
            body: body.dim(),
        }));
    }
    let base_vol = body.vol_drop(sigma)?;
    if base_vol <= 0.0 {
        return Err(HannerError::Inequality(InequalityError::ZeroVolume));
    }
    let co: Vec<usize> = sigma.complement().iter().collect();
    let co_dim = co.len();

    // Block vertices, embedded with zero sigma coordinates.
    let (block_sides, block_vertices, block_vol) = match mode {
        BlockMode::Box => {
            let side = mathx::powf(
                base_vol / mathx::powf(2.0, co_dim as f64),
                1.0 / co_dim as f64,
            );
            let mut verts = Vec::with_capacity(1 << co_dim);
            for mask in 0u32..(1u32 << co_dim) {
                let mut v = alloc::vec![0.0; n];
                for (b, &coord) in co.iter().enumerate() {
                    v[coord - 1] = if (mask >> b) & 1 == 1 { side } else { -side };
                }
                verts.push(v);
            }
            let sides = co.iter().map(|&i| (i, side)).collect();
            (Some(sides), verts, base_vol)
        }
        BlockMode::Explicit(block) => {
            if block.dim != n {
                return Err(HannerError::Geometry(GeomError::DimensionMismatch));
            }
            let mut scale = 0.0f64;
            for v in &block.vertices {
                for x in v {
                    scale = scale.max(f64::abs(*x));
                }
            }
            for v in &block.vertices {
                for i in sigma.iter() {
                    if f64::abs(v[i - 1]) > 1e-12 * f64::max(1.0, scale) {
                        return Err(HannerError::BlockOutsideSubspace);
                    }
                }
            }
            let cols: Vec<usize> = co.iter().map(|&i| i - 1).collect();
            let flat = geometry::project(&block.vertices, &cols);
            let vol = geometry::volume_in_dim(&flat, co_dim)?;
            if f64::abs(vol - base_vol) > 1e-9 * f64::max(1.0, base_vol) {
                return Err(HannerError::BlockVolumeMismatch { expected: base_vol, got: vol });
            }
            let origin = alloc::vec![0.0; co_dim];
            if !geometry::contains_v(&flat, &origin)? {
                return Err(HannerError::BlockMissingOrigin);
            }
            (None, block.vertices, vol)
        }
    };

    // Central box vertices: half-side t_i / 2 on each sigma coordinate.
    let sig: Vec<usize> = sigma.iter().collect();
    let mut c = Vec::with_capacity(sig.len());
    for &i in &sig {
        let t = tuple
            .t_single(i)
            .ok_or(HannerError::Inequality(InequalityError::NotSubset))?;
        c.push((i, t / 2.0));
    }
    let mut vertices = Vec::with_capacity((1 << sig.len()) + block_vertices.len());
    for mask in 0u32..(1u32 << sig.len()) {
        let mut v = alloc::vec![0.0; n];
        for (b, &(coord, half)) in c.iter().enumerate() {
            v[coord - 1] = if (mask >> b) & 1 == 1 { half } else { -half };
        }
        vertices.push(v);
    }
    vertices.extend(block_vertices.iter().cloned());

    // Certificates: closed forms against the body, then against hulls of
    // the construction itself.
    let body_vol = body.volume()?;
    let built_vol = tuple.closed_form_projection(sigma, block_vol)?;
    let vol_equal = CertificateReport::relative(body_vol, built_vol, 1e-7);
    let block_volume = CertificateReport::relative(base_vol, block_vol, 1e-9);

    let mut projection_dominance = Vec::new();
    let mut closed_form_vs_hull = Vec::new();
    let mut subsets = sigma.nonempty_subsets();
    subsets.insert(0, IndexSet::empty(n)?);
    for tau in subsets {
        let closed = tuple.closed_form_projection(tau, block_vol)?;
        let keep = sigma.complement().union(&tau);
        let body_proj = body.vol_keep(keep)?;
        let scale = 1e-9 * f64::max(1.0, body_proj);
        projection_dominance.push((tau, CertificateReport::dominated(body_proj, closed, scale)));
        let cols: Vec<usize> = keep.iter().map(|i| i - 1).collect();
        let pts = geometry::project(&vertices, &cols);
        let hull_vol = geometry::volume_in_dim(&pts, cols.len())?;
        closed_form_vs_hull.push((tau, CertificateReport::relative(closed, hull_vol, 1e-8)));
    }

    Ok(HannerWitness {
        sigma,
        c,
        block_sides,
        block_vertices,
        vertices,
        tuple: tuple.clone(),
        vol_equal,
        projection_dominance,
        block_volume,
        closed_form_vs_hull,
    })
}

/// Closed-form projection volume of a witness construction, free-function
/// form of `MinimalTuple::closed_form_projection`.
pub fn hanner_closed_form(
    tuple: &MinimalTuple,
    tau: IndexSet,
    block_vol: f64,
) -> Result<f64, HannerError> {
    tuple.closed_form_projection(tau, block_vol)
}

fn unit_scale(rng: &mut ChaCha12Rng) -> f64 {
    // Scales in [1/2, 2], bounded away from degeneracy.
    0.5 + 1.5 * ((rng.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0))
}

fn gen_block(coords: &[usize], n: usize, rng: &mut ChaCha12Rng) -> Vec<Point> {
    if coords.len() == 1 {
        let s = unit_scale(rng);
        let mut lo = alloc::vec![0.0; n];
        let mut hi = alloc::vec![0.0; n];
        lo[coords[0]] = -s;
        hi[coords[0]] = s;
        return alloc::vec![lo, hi];
    }
    let cut = 1 + (rng.next_u64() as usize) % (coords.len() - 1);
    let left = gen_block(&coords[..cut], n, rng);
    let right = gen_block(&coords[cut..], n, rng);
    if rng.next_u64() & 1 == 0 {
        // Sup combination: vertex sums over the two blocks.
        let mut out = Vec::with_capacity(left.len() * right.len());
        for a in &left {
            for b in &right {
                out.push(a.iter().zip(b).map(|(x, y)| x + y).collect());
            }
        }
        out
    } else {
        // Sum-norm combination: hull of the union keeps both vertex sets.
        let mut out = left;
        out.extend(right);
        out
    }
}

/// Random recursive construction: segments on disjoint coordinate blocks
/// combined by vertex sums or hulls of unions, with bounded scalings. All
/// choices derive from the seed.
pub fn generate_hanner(n: usize, seed: u64) -> Result<VPolytope, HannerError> {
    if n == 0 || n > 6 {
        return Err(HannerError::Geometry(GeomError::DimensionMismatch));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let coords: Vec<usize> = (0..n).collect();
    let vertices = gen_block(&coords, n, &mut rng);
    Ok(VPolytope { dim: n, vertices })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_cube(n: usize) -> Vec<Point> {
        let mut pts = Vec::new();
        for mask in 0u32..(1 << n) {
            pts.push((0..n).map(|i| ((mask >> i) & 1) as f64).collect());
        }
        pts
    }

    fn boxed(sides: &[f64]) -> Vec<Point> {
        let n = sides.len();
        let mut pts = Vec::new();
        for mask in 0u32..(1 << n) {
            pts.push((0..n).map(|i| ((mask >> i) & 1) as f64 * sides[i]).collect());
        }
        pts
    }

    fn crosspolytope(n: usize) -> Vec<Point> {
        let mut pts = Vec::new();
        for i in 0..n {
            for s in [-1.0, 1.0] {
                let mut v = alloc::vec![0.0; n];
                v[i] = s;
                pts.push(v);
            }
        }
        pts
    }

    fn set(n: usize, elems: &[usize]) -> IndexSet {
        IndexSet::from_elems(n, elems).unwrap()
    }

    #[test]
    fn ratios_on_cube_and_crosspolytope() {
        let mut cube = Body::new(3, unit_cube(3)).unwrap();
        let sigma = set(3, &[1, 2]);
        let r = projection_ratios(&mut cube, sigma).unwrap();
        assert!((r.x_sigma - 3.0).abs() < 1e-12);
        assert!((r.d(set(3, &[1])).unwrap() - 2.0).abs() < 1e-12);
        assert!((r.d(set(3, &[2])).unwrap() - 2.0).abs() < 1e-12);
        assert!((r.d(sigma).unwrap() - 3.0).abs() < 1e-12);
        assert!((r.d(set(3, &[])).unwrap() - 1.0).abs() < 1e-12);
        assert!(r.d(set(3, &[3])).is_none(), "not a subset of sigma");

        let mut cross = Body::new(3, crosspolytope(3)).unwrap();
        let rc = projection_ratios(&mut cross, sigma).unwrap();
        // 3 * (4/3) / 2 and 2 * 2 / 2.
        assert!((rc.x_sigma - 2.0).abs() < 1e-9);
        assert!((rc.d(set(3, &[1])).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn minimal_tuple_on_cube_matches_hand_solve() {
        let mut cube = Body::new(3, unit_cube(3)).unwrap();
        let sigma = set(3, &[1, 2]);
        let t = minimal_tuple(&mut cube, sigma).unwrap();
        assert!((t.t_single(1).unwrap() - 1.5).abs() < 1e-9);
        assert!((t.t_single(2).unwrap() - 2.0).abs() < 1e-9);
        assert!((t.t_of(sigma).unwrap() - 3.0).abs() < 1e-9);
        assert!(t.product_residual < PRODUCT_IDENTITY_TOL);
        assert!(!t.escalated);
        assert_eq!(
            t.order,
            alloc::vec![set(3, &[1]), set(3, &[2]), set(3, &[1, 2])]
        );
        // The first coordinate's minimum is forced by the split cover row.
        let first = t.active.get(&set(3, &[1]).bits()).unwrap();
        assert!(first.iter().any(|s| s.starts_with("cover")), "{first:?}");
        // Floors: empty 1, each singleton 3/2, the pair 9/4; min is 1.
        assert!((t.lower_bound - 1.0).abs() < 1e-12);
        assert!((t.upper_bound - 3.0).abs() < 1e-12);
    }

    #[test]
    fn minimal_tuple_on_box_uses_cap_for_larger_side() {
        let mut bx = Body::new(3, boxed(&[1.0, 2.0, 3.0])).unwrap();
        let sigma = set(3, &[1, 2]);
        let t = minimal_tuple(&mut bx, sigma).unwrap();
        assert!((t.t_single(1).unwrap() - 1.5).abs() < 1e-9);
        assert!((t.t_single(2).unwrap() - 4.0).abs() < 1e-9);
        assert!((t.t_of(sigma).unwrap() - 6.0).abs() < 1e-9);
        let second = t.active.get(&set(3, &[2]).bits()).unwrap();
        assert!(second.iter().any(|s| s == "cap"), "{second:?}");
    }

    #[test]
    fn singleton_sigma_is_forced() {
        let mut cube = Body::new(3, unit_cube(3)).unwrap();
        let sigma = set(3, &[2]);
        let t = minimal_tuple(&mut cube, sigma).unwrap();
        // x_sigma = C(3,2) vol / vol_drop = 3.
        assert!((t.t_single(2).unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn tuple_is_sequentially_minimal() {
        let mut bx = Body::new(3, boxed(&[1.0, 2.0, 3.0])).unwrap();
        let sigma = set(3, &[1, 2]);
        let ratios = projection_ratios(&mut bx, sigma).unwrap();
        let covers = enumerate_irreducible_covers_default(sigma).unwrap().covers;
        let system = build_constraints(&ratios, &covers);
        let tuple = minimal_tuple(&mut bx, sigma).unwrap();
        let values: Vec<f64> = system
            .vars
            .iter()
            .map(|tau| mathx::ln(tuple.t_of(*tau).unwrap()))
            .collect();
        assert!(system.feasible(&values, 1e-9));
        for k in 0..values.len() {
            let mut probe = values.clone();
            probe[k] -= 1e-6;
            assert!(
                !system.feasible(&probe, 1e-9),
                "entry {k} could be reduced"
            );
        }
    }

    #[test]
    fn witness_on_cube_box_mode() {
        let mut cube = Body::new(3, unit_cube(3)).unwrap();
        let sigma = set(3, &[1, 2]);
        let tuple = minimal_tuple(&mut cube, sigma).unwrap();
        let w = build_hanner(&mut cube, &tuple, BlockMode::Box).unwrap();
        assert!(w.all_hold(), "{w:?}");
        assert!((w.c[0].1 - 0.75).abs() < 1e-9);
        assert!((w.c[1].1 - 1.0).abs() < 1e-9);
        let sides = w.block_sides.as_ref().unwrap();
        assert_eq!(sides[0].0, 3);
        assert!((sides[0].1 - 0.5).abs() < 1e-9, "block side from volume 1");
        assert!((w.vol_equal.expected - 1.0).abs() < 1e-9);
        assert!((w.vol_equal.got - 1.0).abs() < 1e-9);
        // tau = {2} is the tight dominance direction: 2 * 1 / 2 = 1.
        let tight = w
            .projection_dominance
            .iter()
            .find(|(tau, _)| *tau == set(3, &[2]))
            .unwrap();
        assert!((tight.1.got - 1.0).abs() < 1e-9);
        let loose = w
            .projection_dominance
            .iter()
            .find(|(tau, _)| *tau == set(3, &[1]))
            .unwrap();
        assert!((loose.1.got - 0.75).abs() < 1e-9);
    }

    #[test]
    fn witness_explicit_block_checks() {
        let mut cube = Body::new(3, unit_cube(3)).unwrap();
        let sigma = set(3, &[1, 2]);
        let tuple = minimal_tuple(&mut cube, sigma).unwrap();
        let good = VPolytope {
            dim: 3,
            vertices: alloc::vec![
                alloc::vec![0.0, 0.0, -0.25],
                alloc::vec![0.0, 0.0, 0.75]
            ],
        };
        let w = build_hanner(&mut cube, &tuple, BlockMode::Explicit(good)).unwrap();
        assert!(w.all_hold());
        let wrong_vol = VPolytope {
            dim: 3,
            vertices: alloc::vec![
                alloc::vec![0.0, 0.0, -0.25],
                alloc::vec![0.0, 0.0, 0.25]
            ],
        };
        assert!(matches!(
            build_hanner(&mut cube, &tuple, BlockMode::Explicit(wrong_vol)),
            Err(HannerError::BlockVolumeMismatch { .. })
        ));
        let off_origin = VPolytope {
            dim: 3,
            vertices: alloc::vec![
                alloc::vec![0.0, 0.0, 0.25],
                alloc::vec![0.0, 0.0, 1.25]
            ],
        };
        assert!(matches!(
            build_hanner(&mut cube, &tuple, BlockMode::Explicit(off_origin)),
            Err(HannerError::BlockMissingOrigin)
        ));
        let tilted = VPolytope {
            dim: 3,
            vertices: alloc::vec![
                alloc::vec![0.1, 0.0, -0.25],
                alloc::vec![0.0, 0.0, 0.75]
            ],
        };
        assert!(matches!(
            build_hanner(&mut cube, &tuple, BlockMode::Explicit(tilted)),
            Err(HannerError::BlockOutsideSubspace)
        ));
    }

    #[test]
    fn generated_bodies_are_symmetric_and_reproducible() {
        for n in 1..=5 {
            for seed in [1u64, 7, 42] {
                let p = generate_hanner(n, seed).unwrap();
                let q = generate_hanner(n, seed).unwrap();
                assert_eq!(p.vertices, q.vertices, "same seed, same body");
                for v in &p.vertices {
                    let neg: Point = v.iter().map(|x| -x).collect();
                    assert!(
                        p.vertices.iter().any(|w| w
                            .iter()
                            .zip(&neg)
                            .all(|(a, b)| (a - b).abs() < 1e-12)),
                        "vertex set closed under negation"
                    );
                }
                let hull = geometry::convex_hull(&p.vertices).unwrap();
                assert!(hull.decomposition.total_volume > 0.0);
            }
        }
    }

    #[test]
    fn witness_reproduces_box_plus_block_shape() {
        // A body already of the constructed shape: central square times
        // nothing, block segment; every certificate is tight.
        let shape = alloc::vec![
            alloc::vec![1.0, 1.0, 0.0],
            alloc::vec![1.0, -1.0, 0.0],
            alloc::vec![-1.0, 1.0, 0.0],
            alloc::vec![-1.0, -1.0, 0.0],
            alloc::vec![0.0, 0.0, 1.0],
            alloc::vec![0.0, 0.0, -1.0],
        ];
        let mut b = Body::new(3, shape).unwrap();
        let sigma = set(3, &[1, 2]);
        let tuple = minimal_tuple(&mut b, sigma).unwrap();
        assert!((tuple.t_single(1).unwrap() - 2.0).abs() < 1e-9);
        assert!((tuple.t_single(2).unwrap() - 2.0).abs() < 1e-9);
        let w = build_hanner(&mut b, &tuple, BlockMode::Box).unwrap();
        assert!(w.all_hold());
        // Equal volume and every dominance certificate tight.
        assert!(w.vol_equal.error < 1e-9);
        for (_, r) in &w.projection_dominance {
            assert!(f64::abs(r.got - r.expected) < 1e-9, "{r:?}");
        }
    }
}
