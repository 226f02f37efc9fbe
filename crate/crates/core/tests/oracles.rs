//! Independent numeric oracles for the kernel routines.
//!
//! Purpose: cross-check each approximate pipeline against a separately
//! written exact or statistical route: the float simplex against an exact
//! rational simplex, slice-integral volume recovery against direct hull
//! volume, the float hull volume against exact rational arithmetic, and
//! hull volume against Monte Carlo membership counting.

use btiso_core::geometry::rational::{ratio, rational_volume};
use btiso_core::geometry::{self, convex_hull, project, volume, volume_in_dim, Point};
use btiso_core::lp::{lp_solve, LinearConstraint, LinearProgram, LpStatus};
use btiso_core::quadrature::integrate_gauss;
use btiso_core::SimplicialDecomposition;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Deterministic generator for test data; the crate's own generators are
/// deliberately not reused here.
struct Mix(u64);

impl Mix {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Integer in [lo, hi] inclusive.
    fn int(&mut self, lo: i64, hi: i64) -> i64 {
        let span = (hi - lo + 1) as u64;
        lo + (self.next() % span) as i64
    }
}

/// Exact simplex with Bland's rule for `min c.x, A x <= b, x >= 0`.
/// Returns the optimum value, or None when infeasible. Unboundedness is a
/// caller error here: every generated program carries a capping row.
fn rational_simplex(
    a: &[Vec<BigRational>],
    b: &[BigRational],
    c: &[BigRational],
) -> Option<BigRational> {
    let m = a.len();
    let n = c.len();
    let zero = BigRational::zero();

    // Columns: n structural, m slacks, then one artificial per negative
    // right-hand side. Rows with negative rhs are negated first.
    let mut neg_rows: Vec<usize> = Vec::new();
    for (i, bi) in b.iter().enumerate() {
        if bi < &zero {
            neg_rows.push(i);
        }
    }
    let n_art = neg_rows.len();
    let cols = n + m + n_art;
    let mut t: Vec<Vec<BigRational>> = vec![vec![zero.clone(); cols + 1]; m];
    let mut basis: Vec<usize> = vec![0; m];
    let mut art_seen = 0usize;
    for i in 0..m {
        let flip = b[i] < zero;
        for j in 0..n {
            t[i][j] = if flip { -a[i][j].clone() } else { a[i][j].clone() };
        }
        t[i][n + i] = if flip { -BigRational::from(BigInt::from(1)) } else { BigRational::from(BigInt::from(1)) };
        t[i][cols] = if flip { -b[i].clone() } else { b[i].clone() };
        if flip {
            let col = n + m + art_seen;
            t[i][col] = BigRational::from(BigInt::from(1));
            basis[i] = col;
            art_seen += 1;
        } else {
            basis[i] = n + i;
        }
    }

    // One Bland-rule run over the current cost vector; pivots in place.
    // Only columns below `enter_limit` may enter, which bars the phase-one
    // artificials from coming back in phase two.
    let run = |t: &mut Vec<Vec<BigRational>>,
               basis: &mut Vec<usize>,
               cost: &[BigRational],
               enter_limit: usize| {
        loop {
            // Reduced costs from scratch: d_j = c_j - c_B . B^{-1} A_j.
            let mut entering = None;
            for j in 0..enter_limit {
                if basis.contains(&j) {
                    continue;
                }
                let mut d = cost[j].clone();
                for i in 0..t.len() {
                    if !cost[basis[i]].is_zero() && !t[i][j].is_zero() {
                        d -= cost[basis[i]].clone() * t[i][j].clone();
                    }
                }
                if d < BigRational::zero() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else { return true };
            let mut leave: Option<usize> = None;
            let mut best: Option<BigRational> = None;
            let rhs_col = t[0].len() - 1;
            for i in 0..t.len() {
                if t[i][j] > BigRational::zero() {
                    let r = t[i][rhs_col].clone() / t[i][j].clone();
                    let better = match &best {
                        None => true,
                        Some(bv) => {
                            r < *bv || (r == *bv && basis[i] < basis[leave.unwrap()])
                        }
                    };
                    if better {
                        best = Some(r);
                        leave = Some(i);
                    }
                }
            }
            let Some(li) = leave else { return false };
            let piv = t[li][j].clone();
            for v in t[li].iter_mut() {
                *v /= piv.clone();
            }
            for i in 0..t.len() {
                if i != li && !t[i][j].is_zero() {
                    let f = t[i][j].clone();
                    for k in 0..=rhs_col {
                        let delta = f.clone() * t[li][k].clone();
                        t[i][k] -= delta;
                    }
                }
            }
            basis[li] = j;
        }
    };

    if n_art > 0 {
        // Phase one: drive the artificial total to zero.
        let mut cost = vec![zero.clone(); cols];
        for j in n + m..cols {
            cost[j] = BigRational::from(BigInt::from(1));
        }
        assert!(run(&mut t, &mut basis, &cost, cols), "phase one cannot be unbounded");
        let mut total = zero.clone();
        for i in 0..m {
            if basis[i] >= n + m {
                total += t[i][cols].clone();
            }
        }
        if total.is_positive() {
            return None;
        }
        // Pivot any residual artificial out of the basis; an all-zero row
        // is redundant and can keep it at value zero harmlessly.
        for i in 0..m {
            if basis[i] >= n + m {
                if let Some(j) = (0..n + m).find(|&j| !t[i][j].is_zero()) {
                    let piv = t[i][j].clone();
                    for v in t[i].iter_mut() {
                        *v /= piv.clone();
                    }
                    for r in 0..m {
                        if r != i && !t[r][j].is_zero() {
                            let f = t[r][j].clone();
                            for k in 0..=cols {
                                let delta = f.clone() * t[i][k].clone();
                                t[r][k] -= delta;
                            }
                        }
                    }
                    basis[i] = j;
                }
            }
        }
    }

    let mut cost = vec![zero.clone(); cols];
    cost[..n].clone_from_slice(c);
    assert!(run(&mut t, &mut basis, &cost, n + m), "capped programs stay bounded");
    let mut obj = zero;
    for i in 0..m {
        if basis[i] < n {
            obj += c[basis[i]].clone() * t[i][cols].clone();
        }
    }
    Some(obj)
}

/// Random nonnegative programs with eighth-integer data: the float simplex
/// and the exact rational simplex must agree on feasibility and, when
/// feasible, on the optimum to 1e-9.
#[test]
fn float_simplex_matches_exact_rational_simplex() {
    let mut rng = Mix(0x5eed_0001);
    let mut feasible_seen = 0;
    let mut infeasible_seen = 0;
    for case in 0..40 {
        let n = rng.int(2, 4) as usize;
        let m = rng.int(2, 4) as usize;
        let mut a_rat: Vec<Vec<BigRational>> = Vec::new();
        let mut a_f: Vec<Vec<f64>> = Vec::new();
        let mut b_rat: Vec<BigRational> = Vec::new();
        let mut b_f: Vec<f64> = Vec::new();
        for _ in 0..m {
            let row: Vec<i64> = (0..n).map(|_| rng.int(-16, 16)).collect();
            a_rat.push(row.iter().map(|&k| ratio(k, 8)).collect());
            a_f.push(row.iter().map(|&k| k as f64 / 8.0).collect());
            let k = rng.int(-8, 16);
            b_rat.push(ratio(k, 8));
            b_f.push(k as f64 / 8.0);
        }
        // Capping row keeps every program bounded.
        a_rat.push(vec![ratio(1, 1); n]);
        a_f.push(vec![1.0; n]);
        b_rat.push(ratio(4, 1));
        b_f.push(4.0);
        let c_int: Vec<i64> = (0..n).map(|_| rng.int(-16, 16)).collect();
        let c_rat: Vec<BigRational> = c_int.iter().map(|&k| ratio(k, 8)).collect();
        let c_f: Vec<f64> = c_int.iter().map(|&k| k as f64 / 8.0).collect();

        let mut p = LinearProgram::new(n);
        p.objective = c_f;
        p.bounds = vec![(0.0, f64::INFINITY); n];
        for (row, &rhs) in a_f.iter().zip(&b_f) {
            p.le_rows.push(LinearConstraint::new(row.clone(), rhs));
        }
        let sol = lp_solve(&p).unwrap();
        let exact = rational_simplex(&a_rat, &b_rat, &c_rat);
        match exact {
            None => {
                infeasible_seen += 1;
                assert_eq!(sol.status, LpStatus::Infeasible, "case {case}");
            }
            Some(z) => {
                feasible_seen += 1;
                assert_eq!(sol.status, LpStatus::Optimal, "case {case}");
                let zf = z.to_f64().unwrap();
                assert!(
                    (sol.objective_value - zf).abs() <= 1e-9,
                    "case {case}: float {} vs exact {}",
                    sol.objective_value,
                    zf
                );
                // The float point must be feasible for the exact data.
                for (row, rhs) in a_f.iter().zip(&b_f) {
                    let lhs: f64 = row.iter().zip(&sol.values).map(|(a, x)| a * x).sum();
                    assert!(lhs <= rhs + 1e-9, "case {case}: row violated");
                }
                for x in &sol.values {
                    assert!(*x >= -1e-9, "case {case}: negativity");
                }
            }
        }
    }
    assert!(feasible_seen >= 10, "generator lost its feasible mix");
    assert!(infeasible_seen >= 3, "generator lost its infeasible mix");
}

fn boxed(sides: &[f64]) -> Vec<Point> {
    let n = sides.len();
    (0..1usize << n)
        .map(|mask| {
            (0..n)
                .map(|c| if mask >> c & 1 == 1 { sides[c] / 2.0 } else { -sides[c] / 2.0 })
                .collect()
        })
        .collect()
}

fn simplex_body(n: usize) -> Vec<Point> {
    let mut pts = vec![vec![0.0; n]];
    for c in 0..n {
        let mut v = vec![0.0; n];
        v[c] = 1.0;
        pts.push(v);
    }
    pts
}

fn crosspolytope(n: usize) -> Vec<Point> {
    let mut pts = Vec::new();
    for c in 0..n {
        for s in [-1.0, 1.0] {
            let mut v = vec![0.0; n];
            v[c] = s;
            pts.push(v);
        }
    }
    pts
}

/// Slice area of a 3-polytope at a fixed last coordinate.
fn slice_area(hull: &geometry::Hull, t: f64) -> f64 {
    let cut = geometry::slice(&hull.hpoly, &[(2, t)]).expect("slice");
    if cut.is_empty() {
        return 0.0;
    }
    let flat = project(&cut, &[0, 1]);
    volume_in_dim(&flat, 2).unwrap_or(0.0)
}

/// Integrating slice areas between consecutive vertex levels recovers the
/// volume: the area profile is polynomial on each panel, so panel-wise
/// Gauss quadrature is exact up to rounding.
#[test]
fn stacked_slice_areas_recover_the_volume() {
    let mut rng = Mix(0x5eed_0002);
    let mut cloud: Vec<Point> = boxed(&[2.0, 2.0, 2.0]);
    for p in cloud.iter_mut() {
        for x in p.iter_mut() {
            *x += rng.int(-30, 30) as f64 / 100.0;
        }
    }
    let cases: Vec<Vec<Point>> = vec![
        boxed(&[1.0, 1.0, 1.0]),
        boxed(&[1.0, 2.0, 3.0]),
        simplex_body(3),
        crosspolytope(3),
        cloud,
    ];
    for (k, pts) in cases.iter().enumerate() {
        let hull = convex_hull(pts).unwrap();
        let direct = hull.decomposition.total_volume;

        let mut levels: Vec<f64> = hull.vpoly.vertices.iter().map(|v| v[2]).collect();
        levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
        levels.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let points: Vec<Point> = levels.iter().map(|&t| vec![t]).collect();
        let mut simplices = Vec::new();
        let mut volumes = Vec::new();
        for i in 0..levels.len() - 1 {
            simplices.push(vec![i, i + 1]);
            volumes.push(levels[i + 1] - levels[i]);
        }
        let total: f64 = volumes.iter().sum();
        let panels = SimplicialDecomposition {
            dim: 1,
            points,
            simplices,
            volumes,
            total_volume: total,
        };
        let integrated = integrate_gauss(&panels, 12, |y| slice_area(&hull, y[0])).unwrap();
        assert!(
            (integrated - direct).abs() <= 1e-4 * direct.max(1.0),
            "case {k}: stacked {integrated} vs direct {direct}"
        );
    }
}

/// Two-dimensional base variant: integrate segment lengths of the unit
/// octahedron over an orthant-aligned triangulation of its square shadow.
#[test]
fn fibered_segment_lengths_recover_the_octahedron_volume() {
    let pts = crosspolytope(3);
    let hull = convex_hull(&pts).unwrap();
    let direct = hull.decomposition.total_volume;

    let points: Vec<Point> = vec![
        vec![0.0, 0.0],
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![-1.0, 0.0],
        vec![0.0, -1.0],
    ];
    let simplices = vec![vec![0, 1, 2], vec![0, 2, 3], vec![0, 3, 4], vec![0, 4, 1]];
    let volumes = vec![0.5; 4];
    let base = SimplicialDecomposition {
        dim: 2,
        points,
        simplices,
        volumes,
        total_volume: 2.0,
    };
    let integrated = integrate_gauss(&base, 10, |y| {
        let cut = geometry::slice(&hull.hpoly, &[(0, y[0]), (1, y[1])]).expect("slice");
        if cut.is_empty() {
            return 0.0;
        }
        let line = project(&cut, &[2]);
        volume_in_dim(&line, 1).unwrap_or(0.0)
    })
    .unwrap();
    assert!(
        (integrated - direct).abs() <= 1e-4 * direct,
        "fibered {integrated} vs direct {direct}"
    );
}

/// Float hull volumes against exact rational arithmetic on quarter-integer
/// bodies.
#[test]
fn hull_volume_matches_exact_rational_volume() {
    let mut rng = Mix(0x5eed_0003);
    for case in 0..6 {
        let n = if case % 2 == 0 { 3 } else { 2 };
        let mut num: Vec<Vec<i64>> = Vec::new();
        for mask in 0..1usize << n {
            let corner: Vec<i64> = (0..n)
                .map(|c| {
                    let base = if mask >> c & 1 == 1 { 4 } else { -4 };
                    base + rng.int(-2, 2)
                })
                .collect();
            num.push(corner);
        }
        for _ in 0..4 {
            num.push((0..n).map(|_| rng.int(-3, 3)).collect());
        }
        let rat_pts: Vec<Vec<BigRational>> =
            num.iter().map(|p| p.iter().map(|&k| ratio(k, 4)).collect()).collect();
        let f_pts: Vec<Point> =
            num.iter().map(|p| p.iter().map(|&k| k as f64 / 4.0).collect()).collect();
        let exact = rational_volume(&rat_pts).unwrap().to_f64().unwrap();
        let float = volume(&f_pts).unwrap();
        assert!(
            (float - exact).abs() <= 1e-10 * exact.max(1.0),
            "case {case}: float {float} vs exact {exact}"
        );
    }
}

/// Hull volume against Monte Carlo membership counting in the bounding box.
#[test]
fn hull_volume_agrees_with_membership_sampling() {
    let mut rng = Mix(0x5eed_0004);
    for case in 0..4 {
        let n = 3;
        let mut pts = boxed(&[2.0; 3]);
        for p in pts.iter_mut() {
            for x in p.iter_mut() {
                *x += rng.int(-40, 40) as f64 / 100.0;
            }
        }
        for _ in 0..3 {
            pts.push((0..n).map(|_| rng.int(-80, 80) as f64 / 100.0).collect());
        }
        let hull = convex_hull(&pts).unwrap();
        let vol = hull.decomposition.total_volume;

        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        for v in &hull.vpoly.vertices {
            for c in 0..n {
                lo[c] = lo[c].min(v[c]);
                hi[c] = hi[c].max(v[c]);
            }
        }
        let box_vol: f64 = (0..n).map(|c| hi[c] - lo[c]).product();
        let samples = 200_000usize;
        let mut inside = 0usize;
        let mut x = vec![0.0; n];
        for _ in 0..samples {
            for c in 0..n {
                let u = (rng.next() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                x[c] = lo[c] + u * (hi[c] - lo[c]);
            }
            if hull.hpoly.contains(&x, 0.0) {
                inside += 1;
            }
        }
        let p = inside as f64 / samples as f64;
        let estimate = p * box_vol;
        let sigma = box_vol * (p * (1.0 - p) / samples as f64).sqrt();
        assert!(
            (estimate - vol).abs() <= 3.0 * sigma,
            "case {case}: estimate {estimate} vs hull {vol} (sigma {sigma})"
        );
    }
}
