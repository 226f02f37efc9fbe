//! Command-line companion to the geometry kernel.
//!
//! Purpose: everything the binary needs that is not core mathematics:
//! JSON file formats and report shapes, run configuration with a stable
//! hash, deterministic corpus generation, and the command implementations
//! the thin binary dispatches to. All functions here are pure given their
//! inputs, so the integration suite drives them directly.

pub mod config;
pub mod corpus;
pub mod formats;
pub mod ops;

use btiso_core::covers::CoverError;
use btiso_core::equality::EqualityError;
use btiso_core::geometry::GeomError;
use btiso_core::hanner::HannerError;
use btiso_core::inequalities::InequalityError;
use btiso_core::lp::LpError;

/// Process exit codes: 0 holds, 1 violated, 2 bad input, 3 capacity.
pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

/// Driver-level failure, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Malformed files, flags, or mathematically invalid requests.
    Input(String),
    /// Requests beyond the enumeration or dimension caps.
    Capacity(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Capacity(_) => EXIT_CAPACITY,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Capacity(m) => m,
        }
    }
}

impl core::fmt::Display for CliError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.message())
    }
}

impl std::error::Error for CliError {}

fn geom_to_cli(e: GeomError) -> CliError {
    match e {
        GeomError::CapacityExceeded(what) => CliError::Capacity(format!("capacity: {what}")),
        other => CliError::Input(format!("geometry: {other}")),
    }
}

impl From<GeomError> for CliError {
    fn from(e: GeomError) -> Self {
        geom_to_cli(e)
    }
}

impl From<CoverError> for CliError {
    fn from(e: CoverError) -> Self {
        match e {
            CoverError::Capacity { what, limit } => {
                CliError::Capacity(format!("capacity: {what} (limit {limit})"))
            }
            other => CliError::Input(format!("cover: {other}")),
        }
    }
}

impl From<InequalityError> for CliError {
    fn from(e: InequalityError) -> Self {
        match e {
            InequalityError::Geometry(g) => geom_to_cli(g),
            InequalityError::Cover(c) => c.into(),
            other => CliError::Input(format!("inequality: {other}")),
        }
    }
}

impl From<HannerError> for CliError {
    fn from(e: HannerError) -> Self {
        match e {
            HannerError::Geometry(g) => geom_to_cli(g),
            HannerError::Cover(c) => c.into(),
            HannerError::Inequality(i) => i.into(),
            HannerError::SigmaTooLarge(k) => {
                CliError::Capacity(format!("capacity: sigma size {k} beyond the builder cap"))
            }
            other => CliError::Input(format!("builder: {other}")),
        }
    }
}

impl From<EqualityError> for CliError {
    fn from(e: EqualityError) -> Self {
        match e {
            EqualityError::Geometry(g) => geom_to_cli(g),
            EqualityError::Cover(c) => c.into(),
            EqualityError::Inequality(i) => i.into(),
            EqualityError::SliceDimTooLarge(k) => {
                CliError::Capacity(format!("capacity: slice dimension {k} beyond the analyzer cap"))
            }
            other => CliError::Input(format!("equality: {other}")),
        }
    }
}

impl From<LpError> for CliError {
    fn from(e: LpError) -> Self {
        CliError::Input(format!("solver: {e}"))
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(format!("io: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(format!("json: {e}"))
    }
}
