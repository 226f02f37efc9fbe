//! Geometry and combinatorics kernel for projection-volume inequalities on
//! convex polytopes.
//!
//! The crate is organized around six pieces:
//!
//! * [`covers`] — uniform s-covers of an index set, irreducibility,
//!   complement and induced covers, exhaustive enumeration under caps.
//! * [`geometry`] — a small convex-polytope kernel (hull, volume relative to
//!   the affine hull, coordinate projections, affine slices, Minkowski sums),
//!   with an exact-rational mode for rational-coordinate inputs.
//! * [`lp`] — a dense two-phase simplex solver with Bland's rule and the
//!   sequential coordinate-minimization driver built on it.
//! * [`inequalities`] — log-space checks of the product-type projection
//!   inequalities, a three-step audit that replays the bound's derivation
//!   with quadrature, and the moment comparison for concave profiles.
//! * [`hanner`] — projection ratios, the constraint system in log space,
//!   minimal tuples, and construction of the extremal cross-sum body.
//! * [`equality`] — conical-hypograph fitting and the three-condition
//!   characterization of equality cases.
//!
//! No IO lives here; everything is an in-memory computation. The crate
//! builds without `std` (it only needs `alloc`), with float transcendentals
//! provided by `libm` so results do not depend on the host libm.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod covers;
pub mod equality;
pub mod geometry;
pub mod hanner;
pub mod inequalities;
pub mod lp;
pub mod quadrature;

mod mathx;

pub use covers::{Cover, CoverError, CoverEnumeration, IndexSet};
pub use equality::{CharacterizationReport, ConditionReport, ConicalFit, EqualityError};
pub use geometry::{GeomError, HPolytope, Hull, Point, SimplicialDecomposition, VPolytope};
pub use hanner::{HannerError, HannerWitness, MinimalTuple, ProjectionRatios};
pub use inequalities::{AuditReport, Body, InequalityError, InequalityReport};
pub use lp::{LinearProgram, LpError, LpSolution, LpStatus};
