//! Scalar abstraction letting the hull pipeline run on f64 and on exact
//! rationals with one code path. Exact scalars use zero tolerances.

use alloc::vec::Vec;
use core::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

pub trait Scalar: Clone + PartialOrd + Debug {
    /// Exact arithmetic: comparisons need no slack.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(v: i64) -> Self;
    fn ratio(num: i64, den: i64) -> Self;

    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn abs(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn to_f64(&self) -> f64;

    /// Comparison slack appropriate for values of the given magnitude.
    fn eps(scale: &Self) -> Self;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn eps(scale: &Self) -> Self {
        1e-12 * f64::abs(*scale).max(1.0)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        <BigRational as num_traits::One>::one()
    }
    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn eps(_scale: &Self) -> Self {
        <BigRational as Zero>::zero()
    }
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut acc = S::zero();
    for (x, y) in a.iter().zip(b) {
        acc = acc.add(&x.mul(y));
    }
    acc
}

pub fn sub_vec<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
}

/// Determinant by Gaussian elimination with largest-pivot selection.
/// Destroys its input. det of the empty matrix is 1.
pub fn det_in_place<S: Scalar>(m: &mut [Vec<S>]) -> S {
    let n = m.len();
    let mut det = S::one();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[r][col].abs() > m[piv][col].abs() {
                piv = r;
            }
        }
        if m[piv][col].is_zero() {
            return S::zero();
        }
        if piv != col {
            m.swap(piv, col);
            det = det.neg();
        }
        let p = m[col][col].clone();
        det = det.mul(&p);
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].div(&p);
            for c in col..n {
                let delta = f.mul(&m[col][c]);
                m[r][c] = m[r][c].sub(&delta);
            }
        }
    }
    det
}

/// Normal of the hyperplane through d points in R^d via cofactor expansion
/// of the (d-1) x d edge matrix. Zero vector when the points are affinely
/// dependent.
pub fn hyperplane_normal<S: Scalar>(pts: &[&[S]]) -> Vec<S> {
    let d = pts[0].len();
    debug_assert_eq!(pts.len(), d);
    let mut normal = Vec::with_capacity(d);
    for j in 0..d {
        let mut minor: Vec<Vec<S>> = (0..d - 1)
            .map(|r| {
                let mut row = Vec::with_capacity(d - 1);
                for c in 0..d {
                    if c != j {
                        row.push(pts[r + 1][c].sub(&pts[0][c]));
                    }
                }
                row
            })
            .collect();
        let dt = det_in_place(&mut minor);
        normal.push(if j % 2 == 0 { dt } else { dt.neg() });
    }
    normal
}

/// Rank of the row span, destroying the input.
pub fn rank_in_place<S: Scalar>(m: &mut Vec<Vec<S>>, eps: &S) -> usize {
    if m.is_empty() {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    for col in 0..cols {
        let mut piv = None;
        for r in rank..m.len() {
            if m[r][col].abs() > *eps
                && piv.map_or(true, |p: usize| m[r][col].abs() > m[p][col].abs())
            {
                piv = Some(r);
            }
        }
        let Some(p) = piv else { continue };
        m.swap(rank, p);
        let pv = m[rank][col].clone();
        for r in rank + 1..m.len() {
            if !m[r][col].is_zero() {
                let f = m[r][col].div(&pv);
                for c in col..cols {
                    let delta = f.mul(&m[rank][c]);
                    m[r][c] = m[r][c].sub(&delta);
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}
