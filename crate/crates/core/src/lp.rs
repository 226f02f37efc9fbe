//! Dense two-phase simplex with Bland's rule.
//!
//! Problems are stated as: minimize c·u subject to le rows a·u <= b, eq rows
//! a·u == b, and per-variable bounds that may be infinite. Outcomes
//! (optimal / infeasible / unbounded) are data, not errors; errors are
//! reserved for malformed input and numerical stalls. Bland's rule makes the
//! pivot sequence deterministic, so identical inputs give identical output
//! bits.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

const EPS_PIVOT: f64 = 1e-9;
const EPS_RCOST: f64 = 1e-10;
const EPS_ACTIVE: f64 = 1e-8;
const MAX_PIVOTS: usize = 200_000;

#[derive(Clone, Debug)]
pub struct LinearConstraint {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

impl LinearConstraint {
    pub fn new(coeffs: Vec<f64>, rhs: f64) -> Self {
        LinearConstraint { coeffs, rhs }
    }
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub num_vars: usize,
    /// Minimized.
    pub objective: Vec<f64>,
    pub le_rows: Vec<LinearConstraint>,
    pub eq_rows: Vec<LinearConstraint>,
    /// One (lower, upper) pair per variable; infinities allowed.
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    /// A program with free variables, no rows, zero objective.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: vec![0.0; num_vars],
            le_rows: Vec::new(),
            eq_rows: Vec::new(),
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); num_vars],
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Empty unless status == Optimal.
    pub values: Vec<f64>,
    /// NaN unless status == Optimal.
    pub objective_value: f64,
    /// Indices of le rows tight at the optimum (within 1e-8), sorted.
    pub active_rows: Vec<usize>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum LpError {
    Shape(&'static str),
    NonFinite(&'static str),
    /// Pivot budget exhausted; should not happen with Bland's rule.
    Stalled,
    /// sequential_min hit a non-optimal subproblem.
    StepFailed { coordinate: usize, status_infeasible: bool },
    BadOrder(&'static str),
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpError::Shape(s) => write!(f, "malformed program: {s}"),
            LpError::NonFinite(s) => write!(f, "non-finite data: {s}"),
            LpError::Stalled => write!(f, "simplex pivot budget exhausted"),
            LpError::StepFailed { coordinate, status_infeasible } => write!(
                f,
                "coordinate minimization failed at variable {coordinate}: {}",
                if *status_infeasible { "infeasible" } else { "unbounded" }
            ),
            LpError::BadOrder(s) => write!(f, "bad coordinate order: {s}"),
        }
    }
}

impl core::error::Error for LpError {}

fn validate(p: &LinearProgram) -> Result<(), LpError> {
    if p.objective.len() != p.num_vars {
        return Err(LpError::Shape("objective length"));
    }
    if p.bounds.len() != p.num_vars {
        return Err(LpError::Shape("bounds length"));
    }
    for row in p.le_rows.iter().chain(&p.eq_rows) {
        if row.coeffs.len() != p.num_vars {
            return Err(LpError::Shape("row length"));
        }
        if !row.rhs.is_finite() || row.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(LpError::NonFinite("row"));
        }
    }
    if p.objective.iter().any(|c| !c.is_finite()) {
        return Err(LpError::NonFinite("objective"));
    }
    for &(l, u) in &p.bounds {
        if l.is_nan() || u.is_nan() || l == f64::INFINITY || u == f64::NEG_INFINITY {
            return Err(LpError::NonFinite("bounds"));
        }
        if l > u {
            return Err(LpError::Shape("lower bound above upper bound"));
        }
    }
    Ok(())
}

// Standard-form translation of one user variable.
#[derive(Clone, Copy)]
enum VarMap {
    /// u = l + y_k
    Lower { k: usize, l: f64 },
    /// u = u0 - y_k
    Upper { k: usize, u0: f64 },
    /// u = y_k - y_k2
    Free { k: usize, k2: usize },
}

struct Tableau {
    ncols: usize,
    rows: Vec<Vec<f64>>, // each length ncols + 1, last entry rhs
    cost: Vec<f64>,      // length ncols + 1, reduced costs; last = -value
    basis: Vec<usize>,
    n_real: usize, // columns 0..n_real are non-artificial
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c];
        let inv = 1.0 / piv;
        for x in self.rows[r].iter_mut() {
            *x *= inv;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (x, p) in row.iter_mut().zip(&prow) {
                    *x -= f * p;
                }
                row[c] = 0.0;
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for (x, p) in self.cost.iter_mut().zip(&prow) {
                *x -= f * p;
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Bland: entering = lowest-index eligible column; leaving = min ratio,
    /// ties broken by lowest basis variable index. `allowed` bounds the
    /// entering columns (artificials are excluded in phase 2).
    fn run(&mut self, allowed: usize, budget: &mut usize) -> Result<bool, LpError> {
        loop {
            let mut enter = None;
            for c in 0..allowed {
                if self.cost[c] < -EPS_RCOST {
                    enter = Some(c);
                    break;
                }
            }
            let Some(c) = enter else { return Ok(true) };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][c];
                if a > EPS_PIVOT {
                    let ratio = self.rows[r][self.ncols] / a;
                    match leave {
                        None => leave = Some((r, ratio)),
                        Some((br, bratio)) => {
                            if ratio < bratio - 1e-12
                                || ((ratio - bratio).abs() <= 1e-12
                                    && self.basis[r] < self.basis[br])
                            {
                                leave = Some((r, ratio));
                            }
                        }
                    }
                }
            }
            // No admissible pivot row. When the column is numerically null,
            // or its reduced cost sits inside the roundoff band of the cost
            // row, the descent ray is manufactured by rounding; retire the
            // column instead of declaring the program unbounded.
            let Some((r, _)) = leave else {
                let null = self.rows.iter().all(|row| row[c].abs() <= EPS_PIVOT);
                let cost_scale = 1.0
                    + self.cost[..allowed]
                        .iter()
                        .fold(0.0f64, |m, v| m.max(v.abs()));
                if null || self.cost[c] >= -1e-7 * cost_scale {
                    self.cost[c] = 0.0;
                    continue;
                }
                return Ok(false); // unbounded
            };
            self.pivot(r, c);
            *budget -= 1;
            if *budget == 0 {
                return Err(LpError::Stalled);
            }
        }
    }
}

/// Solves the program. Statuses are data; `Err` means malformed input or a
/// numerical stall.
pub fn lp_solve(p: &LinearProgram) -> Result<LpSolution, LpError> {
    validate(p)?;

    // Translate variables to y >= 0.
    let mut maps = Vec::with_capacity(p.num_vars);
    let mut ny = 0usize;
    let mut upper_rows: Vec<(usize, f64)> = Vec::new(); // (y index, cap)
    for (j, &(l, u)) in p.bounds.iter().enumerate() {
        if l.is_finite() {
            maps.push(VarMap::Lower { k: ny, l });
            if u.is_finite() {
                upper_rows.push((ny, u - l));
            }
            ny += 1;
        } else if u.is_finite() {
            maps.push(VarMap::Upper { k: ny, u0: u });
            ny += 1;
        } else {
            maps.push(VarMap::Free { k: ny, k2: ny + 1 });
            ny += 2;
        }
        let _ = j;
    }

    // Row assembly in y-space: eq rows, then le rows (slack), then bound caps
    // (slack). rhs normalized nonnegative afterwards.
    let n_le = p.le_rows.len() + upper_rows.len();
    let nrows = p.eq_rows.len() + n_le;
    let nslack = n_le;
    let nart = nrows;
    let ncols = ny + nslack + nart;

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(nrows);
    let to_y = |coeffs: &[f64], row: &mut [f64]| {
        for (j, &a) in coeffs.iter().enumerate() {
            match maps[j] {
                VarMap::Lower { k, .. } => row[k] += a,
                VarMap::Upper { k, .. } => row[k] -= a,
                VarMap::Free { k, k2 } => {
                    row[k] += a;
                    row[k2] -= a;
                }
            }
        }
    };
    // Constant shift of a row's rhs from the variable translation.
    let shift = |coeffs: &[f64]| -> f64 {
        let mut s = 0.0;
        for (j, &a) in coeffs.iter().enumerate() {
            match maps[j] {
                VarMap::Lower { l, .. } => s += a * l,
                VarMap::Upper { u0, .. } => s += a * u0,
                VarMap::Free { .. } => {}
            }
        }
        s
    };

    for row in &p.eq_rows {
        let mut r = vec![0.0; ncols + 1];
        to_y(&row.coeffs, &mut r);
        r[ncols] = row.rhs - shift(&row.coeffs);
        rows.push(r);
    }
    let mut slack_col = ny;
    for row in &p.le_rows {
        let mut r = vec![0.0; ncols + 1];
        to_y(&row.coeffs, &mut r);
        r[slack_col] = 1.0;
        slack_col += 1;
        r[ncols] = row.rhs - shift(&row.coeffs);
        rows.push(r);
    }
    for &(k, cap) in &upper_rows {
        let mut r = vec![0.0; ncols + 1];
        r[k] = 1.0;
        r[slack_col] = 1.0;
        slack_col += 1;
        r[ncols] = cap;
        rows.push(r);
    }

    // Normalize rhs >= 0 and install artificial basis.
    let mut basis = Vec::with_capacity(nrows);
    for (i, r) in rows.iter_mut().enumerate() {
        if r[ncols] < 0.0 {
            for x in r.iter_mut() {
                *x = -*x;
            }
        }
        let art = ny + nslack + i;
        r[art] = 1.0;
        basis.push(art);
    }

    // Phase 1 reduced costs: c = 1 on artificials, basis = artificials.
    let mut cost = vec![0.0; ncols + 1];
    for r in &rows {
        for (c, x) in cost.iter_mut().zip(r) {
            *c -= x;
        }
    }
    for a in ny + nslack..ncols {
        cost[a] += 1.0;
    }

    let mut t = Tableau { ncols, rows, cost, basis, n_real: ny + nslack };
    let mut budget = MAX_PIVOTS;
    let finished = t.run(t.ncols, &mut budget)?;
    debug_assert!(finished, "phase 1 objective is bounded below");
    let phase1 = -t.cost[ncols];
    let scale = 1.0 + p.le_rows.iter().chain(&p.eq_rows).map(|r| r.rhs.abs()).fold(0.0, f64::max);
    if phase1 > 1e-8 * scale {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            values: Vec::new(),
            objective_value: f64::NAN,
            active_rows: Vec::new(),
        });
    }

    // Drive zero-valued artificials out of the basis where possible.
    for r in 0..t.rows.len() {
        if t.basis[r] >= t.n_real {
            let c = (0..t.n_real).find(|&c| t.rows[r][c].abs() > EPS_PIVOT);
            if let Some(c) = c {
                t.pivot(r, c);
            }
            // Otherwise the row is redundant; it stays inert (all real
            // entries ~0) and never passes a ratio test.
        }
    }

    // Phase 2: real costs on y columns.
    let mut cy = vec![0.0; ncols + 1];
    for (j, &c) in p.objective.iter().enumerate() {
        match maps[j] {
            VarMap::Lower { k, .. } => cy[k] += c,
            VarMap::Upper { k, .. } => cy[k] -= c,
            VarMap::Free { k, k2 } => {
                cy[k] += c;
                cy[k2] -= c;
            }
        }
    }
    // Reduced costs relative to the current basis.
    let mut cost = cy.clone();
    for (r, row) in t.rows.iter().enumerate() {
        let cb = cy[t.basis[r]];
        if cb != 0.0 {
            for (x, a) in cost.iter_mut().zip(row) {
                *x -= cb * a;
            }
        }
    }
    t.cost = cost;
    let finished = t.run(t.n_real, &mut budget)?;
    if !finished {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            values: Vec::new(),
            objective_value: f64::NAN,
            active_rows: Vec::new(),
        });
    }

    // Recover user variables.
    let mut y = vec![0.0; ncols];
    for (r, &b) in t.basis.iter().enumerate() {
        y[b] = t.rows[r][ncols];
    }
    let mut u = vec![0.0; p.num_vars];
    for (j, m) in maps.iter().enumerate() {
        u[j] = match *m {
            VarMap::Lower { k, l } => l + y[k],
            VarMap::Upper { k, u0 } => u0 - y[k],
            VarMap::Free { k, k2 } => y[k] - y[k2],
        };
    }
    let objective_value = p.objective.iter().zip(&u).map(|(c, x)| c * x).sum();
    let mut active_rows = Vec::new();
    for (i, row) in p.le_rows.iter().enumerate() {
        let lhs: f64 = row.coeffs.iter().zip(&u).map(|(a, x)| a * x).sum();
        if (lhs - row.rhs).abs() <= EPS_ACTIVE * (1.0 + row.rhs.abs()) {
            active_rows.push(i);
        }
    }
    Ok(LpSolution { status: LpStatus::Optimal, values: u, objective_value, active_rows })
}

/// Minimizes coordinates one at a time in the given order, pinning each
/// optimum with an equality row before moving on. The program's own
/// objective is ignored. The order matters when the feasible set is not a
/// product; callers choose it deliberately.
pub fn sequential_min(p: &LinearProgram, order: &[usize]) -> Result<Vec<f64>, LpError> {
    validate(p)?;
    let mut seen = vec![false; p.num_vars];
    for &idx in order {
        if idx >= p.num_vars {
            return Err(LpError::BadOrder("index out of range"));
        }
        if seen[idx] {
            return Err(LpError::BadOrder("repeated index"));
        }
        seen[idx] = true;
    }
    let mut q = p.clone();
    q.objective = vec![0.0; q.num_vars];
    let mut last = None;
    for &idx in order {
        q.objective.iter_mut().for_each(|c| *c = 0.0);
        q.objective[idx] = 1.0;
        let sol = lp_solve(&q)?;
        if sol.status != LpStatus::Optimal {
            return Err(LpError::StepFailed {
                coordinate: idx,
                status_infeasible: sol.status == LpStatus::Infeasible,
            });
        }
        let val = sol.values[idx];
        let mut pin = vec![0.0; q.num_vars];
        pin[idx] = 1.0;
        q.eq_rows.push(LinearConstraint::new(pin, val));
        last = Some(sol.values);
    }
    match last {
        Some(v) => Ok(v),
        None => {
            let sol = lp_solve(&q)?;
            if sol.status != LpStatus::Optimal {
                return Err(LpError::StepFailed { coordinate: 0, status_infeasible: true });
            }
            Ok(sol.values)
        }
    }
}
