//! Body corpus generation.
//!
//! Purpose: deterministic families of test bodies written as polytope
//! files. Every body is derived from the root seed and its index alone, so
//! regenerating a corpus with the same arguments reproduces it byte for
//! byte.

use std::path::Path;

use btiso_core::geometry::{affine_rank, convex_hull, Point};
use btiso_core::hanner::generate_hanner;
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::config::derive_seed;
use crate::formats::PolytopeFile;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BodyKind {
    RandomHull,
    Box,
    Simplex,
    CrossPolytope,
    Hanner,
}

impl BodyKind {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        Ok(match text {
            "random-hull" => BodyKind::RandomHull,
            "box" => BodyKind::Box,
            "simplex" => BodyKind::Simplex,
            "crosspolytope" => BodyKind::CrossPolytope,
            "hanner" => BodyKind::Hanner,
            other => {
                return Err(CliError::Input(format!(
                    "unknown body kind {other:?}; expected random-hull, box, simplex, \
                     crosspolytope, or hanner"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            BodyKind::RandomHull => "random-hull",
            BodyKind::Box => "box",
            BodyKind::Simplex => "simplex",
            BodyKind::CrossPolytope => "crosspolytope",
            BodyKind::Hanner => "hanner",
        }
    }

    fn max_dim(&self) -> usize {
        match self {
            BodyKind::Hanner => 6,
            _ => 8,
        }
    }
}

fn unit01(rng: &mut ChaCha12Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn symmetric(rng: &mut ChaCha12Rng) -> f64 {
    2.0 * unit01(rng) - 1.0
}

/// Random per-axis sides in [0.5, 2.0]; shared by the box, simplex, and
/// cross-polytope families so their aspect ratios vary.
fn random_sides(n: usize, rng: &mut ChaCha12Rng) -> Vec<f64> {
    (0..n).map(|_| 0.5 + 1.5 * unit01(rng)).collect()
}

/// Hull of 2n+6 points drawn from the unit cube, redrawn until the cloud
/// is full-dimensional (a single redraw is already vanishingly unlikely).
fn random_hull(n: usize, rng: &mut ChaCha12Rng) -> Result<Vec<Point>, CliError> {
    for _ in 0..64 {
        let points: Vec<Point> = (0..2 * n + 6)
            .map(|_| (0..n).map(|_| symmetric(rng)).collect())
            .collect();
        if affine_rank(&points)? == n {
            let hull = convex_hull(&points)?;
            return Ok(hull.vpoly.vertices);
        }
    }
    Err(CliError::Input("random cloud never reached full rank".into()))
}

fn scaled_box(sides: &[f64]) -> Vec<Point> {
    let n = sides.len();
    (0..1usize << n)
        .map(|mask| {
            (0..n)
                .map(|i| if mask >> i & 1 == 1 { sides[i] } else { -sides[i] })
                .collect()
        })
        .collect()
}

fn scaled_simplex(sides: &[f64]) -> Vec<Point> {
    let n = sides.len();
    let mut verts = vec![vec![0.0; n]];
    for i in 0..n {
        let mut v = vec![0.0; n];
        v[i] = sides[i];
        verts.push(v);
    }
    verts
}

fn scaled_crosspolytope(sides: &[f64]) -> Vec<Point> {
    let n = sides.len();
    let mut verts = Vec::with_capacity(2 * n);
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut v = vec![0.0; n];
            v[i] = sign * sides[i];
            verts.push(v);
        }
    }
    verts
}

/// One body of the given kind, fully determined by (root seed, index).
pub fn generate_body(
    kind: BodyKind,
    n: usize,
    root_seed: u64,
    index: u64,
) -> Result<PolytopeFile, CliError> {
    if n == 0 || n > kind.max_dim() {
        return Err(CliError::Input(format!(
            "dimension {n} out of range for {} (max {})",
            kind.name(),
            kind.max_dim()
        )));
    }
    let seed = derive_seed(root_seed, index);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let vertices = match kind {
        BodyKind::RandomHull => random_hull(n, &mut rng)?,
        BodyKind::Box => scaled_box(&random_sides(n, &mut rng)),
        BodyKind::Simplex => scaled_simplex(&random_sides(n, &mut rng)),
        BodyKind::CrossPolytope => scaled_crosspolytope(&random_sides(n, &mut rng)),
        BodyKind::Hanner => generate_hanner(n, seed)?.vertices,
    };
    Ok(PolytopeFile::from_vertices(n, vertices))
}

/// Writes `count` bodies into `dir` as {kind}_n{n}_{index:03}.json and
/// returns the file names in index order.
pub fn write_corpus(
    dir: &Path,
    kind: BodyKind,
    n: usize,
    count: usize,
    root_seed: u64,
    start_index: u64,
) -> Result<Vec<String>, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut names = Vec::with_capacity(count);
    for k in 0..count {
        let index = start_index + k as u64;
        let file = generate_body(kind, n, root_seed, index)?;
        let name = format!("{}_n{}_{:03}.json", kind.name(), n, index);
        let text = serde_json::to_string_pretty(&file)?;
        std::fs::write(dir.join(&name), text + "\n")?;
        names.push(name);
    }
    Ok(names)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic_in_seed_and_index() {
        let a = generate_body(BodyKind::RandomHull, 3, 7, 4).unwrap();
        let b = generate_body(BodyKind::RandomHull, 3, 7, 4).unwrap();
        assert_eq!(a.vertices, b.vertices);
        let c = generate_body(BodyKind::RandomHull, 3, 7, 5).unwrap();
        assert_ne!(a.vertices, c.vertices);
    }

    #[test]
    fn every_kind_yields_a_full_dimensional_body() {
        for kind in [
            BodyKind::RandomHull,
            BodyKind::Box,
            BodyKind::Simplex,
            BodyKind::CrossPolytope,
            BodyKind::Hanner,
        ] {
            let file = generate_body(kind, 3, 11, 0).unwrap();
            let body = file.to_body().unwrap();
            assert_eq!(body.dim(), 3, "{}", kind.name());
        }
    }

    #[test]
    fn dimension_caps_are_enforced() {
        assert!(generate_body(BodyKind::Hanner, 7, 0, 0).is_err());
        assert!(generate_body(BodyKind::Box, 9, 0, 0).is_err());
        assert!(generate_body(BodyKind::Box, 0, 0, 0).is_err());
    }
}
