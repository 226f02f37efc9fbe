//! Exact-rational hulls and volumes.
//!
//! Purpose: ground-truth geometry free of rounding. Inputs are rational
//! vertex coordinates; hull combinatorics reuse the shared engine with all
//! tolerances collapsed to zero, so supporting planes and volumes come out
//! exact. Full ambient dimension is required; project first to measure
//! lower-dimensional coordinate shadows.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::hull::{hull_pipeline, HullFail};
use super::GeomError;

/// Convenience constructor for small rationals.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalHull {
    /// Extreme points, sorted ascending.
    pub vertices: Vec<Vec<BigRational>>,
    /// Supporting planes `normal . x <= offset`, outward, scaled so the
    /// largest |coefficient| is one.
    pub planes: Vec<(Vec<BigRational>, BigRational)>,
    pub volume: BigRational,
}

/// Exact hull of a full-dimensional rational point set.
pub fn rational_hull(points: &[Vec<BigRational>]) -> Result<RationalHull, GeomError> {
    let Some(first) = points.first() else { return Err(GeomError::Empty) };
    let d = first.len();
    if d == 0 {
        return Err(GeomError::DimensionMismatch);
    }
    if points.iter().any(|p| p.len() != d) {
        return Err(GeomError::DimensionMismatch);
    }
    let mut pts: Vec<Vec<BigRational>> = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() < d + 1 {
        return Err(GeomError::NotFullDimensional);
    }
    match hull_pipeline::<BigRational>(&pts) {
        Ok(data) => {
            let mut vertices: Vec<Vec<BigRational>> =
                data.extreme.iter().map(|&i| pts[i].clone()).collect();
            vertices.sort();
            Ok(RationalHull { vertices, planes: data.planes, volume: data.volume })
        }
        Err(HullFail::NotFullDimensional) => Err(GeomError::NotFullDimensional),
        Err(HullFail::Failed(msg)) => Err(GeomError::HullFailed(msg)),
    }
}

/// Exact volume of the hull (full ambient dimension required).
pub fn rational_volume(points: &[Vec<BigRational>]) -> Result<BigRational, GeomError> {
    rational_hull(points).map(|h| h.volume)
}

/// Coordinate projection keeping the listed coordinates in order.
pub fn rational_project(points: &[Vec<BigRational>], keep: &[usize]) -> Vec<Vec<BigRational>> {
    points
        .iter()
        .map(|p| keep.iter().map(|&c| p[c].clone()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn int_pt(coords: &[i64]) -> Vec<BigRational> {
        coords.iter().map(|&c| ratio(c, 1)).collect()
    }

    #[test]
    fn exact_cube_volume() {
        let mut pts = Vec::new();
        for sx in [-1, 1] {
            for sy in [-1, 1] {
                for sz in [-1, 1] {
                    pts.push(int_pt(&[sx, sy, sz]));
                }
            }
        }
        let h = rational_hull(&pts).unwrap();
        assert_eq!(h.vertices.len(), 8);
        assert_eq!(h.planes.len(), 6);
        assert_eq!(h.volume, ratio(8, 1));
    }

    #[test]
    fn exact_simplex_volume() {
        let pts = vec![
            int_pt(&[0, 0, 0]),
            int_pt(&[1, 0, 0]),
            int_pt(&[0, 1, 0]),
            int_pt(&[0, 0, 1]),
        ];
        assert_eq!(rational_volume(&pts).unwrap(), ratio(1, 6));
    }

    #[test]
    fn exact_cross_polytope_volume() {
        let mut pts = Vec::new();
        for c in 0..3 {
            for s in [-1i64, 1] {
                let mut p = vec![0i64; 3];
                p[c] = s;
                pts.push(int_pt(&p));
            }
        }
        assert_eq!(rational_volume(&pts).unwrap(), ratio(4, 3));
    }

    #[test]
    fn exact_square_pyramid_pair() {
        // conv([-1,1]^2 x {0} plus both poles): two pyramids over a square.
        let mut pts = Vec::new();
        for sx in [-1, 1] {
            for sy in [-1, 1] {
                pts.push(int_pt(&[sx, sy, 0]));
            }
        }
        pts.push(int_pt(&[0, 0, 1]));
        pts.push(int_pt(&[0, 0, -1]));
        assert_eq!(rational_volume(&pts).unwrap(), ratio(8, 3));
    }

    #[test]
    fn fractional_coordinates_stay_exact() {
        let pts = vec![
            vec![ratio(0, 1), ratio(0, 1)],
            vec![ratio(1, 3), ratio(0, 1)],
            vec![ratio(0, 1), ratio(1, 7)],
            vec![ratio(1, 3), ratio(1, 7)],
        ];
        assert_eq!(rational_volume(&pts).unwrap(), ratio(1, 21));
    }

    #[test]
    fn projection_and_degeneracy() {
        let square = vec![
            int_pt(&[0, 0, 5]),
            int_pt(&[1, 0, 5]),
            int_pt(&[0, 1, 5]),
            int_pt(&[1, 1, 5]),
        ];
        assert!(matches!(
            rational_volume(&square),
            Err(GeomError::NotFullDimensional)
        ));
        let shadow = rational_project(&square, &[0, 1]);
        assert_eq!(rational_volume(&shadow).unwrap(), ratio(1, 1));
    }

    #[test]
    fn interior_points_are_not_vertices() {
        let mut pts = Vec::new();
        for sx in [-2, 2] {
            for sy in [-2, 2] {
                pts.push(int_pt(&[sx, sy]));
            }
        }
        pts.push(int_pt(&[0, 0]));
        pts.push(int_pt(&[1, 1]));
        pts.push(vec![ratio(1, 2), ratio(-3, 2)]);
        let h = rational_hull(&pts).unwrap();
        assert_eq!(h.vertices.len(), 4);
        assert_eq!(h.volume, ratio(16, 1));
    }
}
