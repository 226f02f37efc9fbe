//! Run configuration.
//!
//! Purpose: one structure holding every knob a run depends on (seed,
//! tolerances, quadrature budget, enumeration caps, slice sample count),
//! loaded from JSON with defaults for every field, plus the stable hash of
//! the canonical form that reports embed so outputs are reproducible.

use serde::{Deserialize, Serialize};

use crate::CliError;

fn d_exact() -> f64 {
    1e-9
}
fn d_certificate() -> f64 {
    1e-7
}
fn d_sigma() -> f64 {
    4.0
}
fn d_method() -> String {
    "mc".into()
}
fn d_samples() -> usize {
    200_000
}
fn d_equality_samples() -> usize {
    200
}
fn d_sigma_len_max() -> usize {
    4
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Tolerances {
    /// Closed-form comparisons.
    #[serde(default = "d_exact")]
    pub exact: f64,
    /// Log-slack and certificate checks.
    #[serde(default = "d_certificate")]
    pub certificate: f64,
    /// Monte Carlo acceptance band in standard errors.
    #[serde(default = "d_sigma")]
    pub quadrature_sigma: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            exact: d_exact(),
            certificate: d_certificate(),
            quadrature_sigma: d_sigma(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct QuadratureConfig {
    /// "mc" or "grid".
    #[serde(default = "d_method")]
    pub method: String,
    #[serde(default = "d_samples")]
    pub n_samples: usize,
    /// Gauss order when the method is "grid".
    #[serde(default)]
    pub grid_order: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { method: d_method(), n_samples: d_samples(), grid_order: 0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
pub struct EnumerationConfig {
    /// Cap on parts per cover; zero means the kernel default.
    #[serde(default)]
    pub max_m: usize,
    /// Cap on coverage multiplicity; zero means the kernel default.
    #[serde(default)]
    pub max_mult: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunConfig {
    /// Root seed; every derived stream hashes this with its index.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub enumeration: EnumerationConfig,
    /// Slice nodes per axis in the equality analysis.
    #[serde(default = "d_equality_samples")]
    pub equality_samples: usize,
    /// Largest sigma a sweep will visit.
    #[serde(default = "d_sigma_len_max")]
    pub sigma_len_max: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            tolerances: Tolerances::default(),
            quadrature: QuadratureConfig::default(),
            enumeration: EnumerationConfig::default(),
            equality_samples: d_equality_samples(),
            sigma_len_max: d_sigma_len_max(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&std::path::Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let tols = [
            ("tolerances.exact", self.tolerances.exact),
            ("tolerances.certificate", self.tolerances.certificate),
            ("tolerances.quadrature_sigma", self.tolerances.quadrature_sigma),
        ];
        for (name, v) in tols {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CliError::Input(format!("{name} must be positive")));
            }
        }
        match self.quadrature.method.as_str() {
            "mc" => {}
            "grid" => {
                if self.quadrature.grid_order == 0 {
                    return Err(CliError::Input(
                        "quadrature.grid_order must be positive for the grid method".into(),
                    ));
                }
            }
            other => {
                return Err(CliError::Input(format!("unknown quadrature method {other:?}")));
            }
        }
        if self.quadrature.n_samples == 0 {
            return Err(CliError::Input("quadrature.n_samples must be positive".into()));
        }
        if self.equality_samples < 8 {
            return Err(CliError::Input("equality_samples must be at least 8".into()));
        }
        if self.sigma_len_max == 0 {
            return Err(CliError::Input("sigma_len_max must be positive".into()));
        }
        Ok(())
    }

    /// FNV-1a over the canonical JSON form, hex encoded. Canonical means
    /// every field serialized, defaults included, in declaration order.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in text.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }

    /// Enumeration caps, with zeros replaced by the kernel defaults.
    pub fn caps_for(&self, sigma_len: usize) -> (usize, u32) {
        let max_m = if self.enumeration.max_m == 0 {
            1usize << sigma_len
        } else {
            self.enumeration.max_m
        };
        let max_mult = if self.enumeration.max_mult == 0 {
            sigma_len as u32
        } else {
            self.enumeration.max_mult
        };
        (max_m, max_mult)
    }
}

/// Derives a per-item seed stream from the root seed: splitmix64 of the
/// root xored with the item index.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    let mut z = root ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Builds the global thread pool from BTISO_THREADS when set; silently
/// keeps the default when unset or already built.
pub fn init_threads() {
    if let Ok(text) = std::env::var("BTISO_THREADS") {
        if let Ok(n) = text.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}
