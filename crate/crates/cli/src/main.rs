//! Binary entry point.
//!
//! Purpose: argument parsing and exit-code mapping only; every operation
//! lives in the library so tests can drive it without a process boundary.

use std::io::Write;
use std::path::PathBuf;

use btiso::config::{init_threads, RunConfig};
use btiso::ops::{self, CheckKind, CheckRun, PolyOp, SweepRun};
use btiso::{CliError, EXIT_OK, EXIT_VIOLATED};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "btiso",
    version,
    about = "Projection-volume inequalities on convex polytopes: checks, \
             extremal constructions, and corpus sweeps"
)]
struct Cli {
    /// JSON config file overriding the run defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed; every derived random stream flows from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Polytope queries: info, volume, projection, slice.
    Poly {
        #[command(subcommand)]
        op: PolySub,
    },
    /// Enumerate the irreducible uniform covers of an index set.
    Covers {
        /// Index set, e.g. "1,2" or compact "12".
        #[arg(long)]
        sigma: String,
        /// Ambient dimension; defaults to the largest element of sigma.
        #[arg(long)]
        n: Option<usize>,
        /// Restrict to irreducible covers (the only supported mode).
        #[arg(long, default_value_t = true)]
        irreducible: bool,
        /// Cap on parts per cover.
        #[arg(long)]
        max_m: Option<usize>,
        /// Cap on coverage multiplicity.
        #[arg(long)]
        max_mult: Option<u32>,
    },
    /// Check a bound on a body; exit 0 iff every reported line holds.
    Check {
        /// bt, local-bt, ratio, or audit.
        kind: String,
        /// Polytope JSON file.
        body: PathBuf,
        /// Index set the cover lives on.
        #[arg(long)]
        sigma: Option<String>,
        /// Cover as compact text "1|2|12"; omitted means every
        /// irreducible cover of sigma.
        #[arg(long)]
        cover: Option<String>,
        /// Cover as a structured JSON file (alternative to --cover).
        #[arg(long)]
        cover_file: Option<PathBuf>,
        /// Write the NDJSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the extremal cross-sum body witnessing the bound for sigma.
    Build {
        /// Construction target; only "hanner" exists.
        target: String,
        /// Polytope JSON file.
        body: PathBuf,
        #[arg(long)]
        sigma: String,
        /// Block shape on the complement: "box" or "explicit".
        #[arg(long, default_value = "box")]
        l_mode: String,
        /// Polytope JSON file for the explicit block.
        #[arg(long)]
        block_file: Option<PathBuf>,
        /// Write the witness JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run every certificate a witness claims against a body.
    Verify {
        /// Witness JSON file from `build`.
        witness: PathBuf,
        /// Polytope JSON file the witness was built from.
        body: PathBuf,
        /// Write the NDJSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a deterministic corpus of body files.
    Corpus {
        /// Corpus action; only "generate" exists.
        action: String,
        /// random-hull, box, simplex, crosspolytope, or hanner.
        #[arg(long)]
        kind: String,
        /// Ambient dimension.
        #[arg(long)]
        n: usize,
        /// Number of bodies.
        #[arg(long)]
        count: usize,
        /// First body index; files are named by index.
        #[arg(long, default_value_t = 0)]
        start: u64,
        /// Output directory.
        #[arg(long, default_value = "corpus")]
        dir: PathBuf,
    },
    /// Check every body, sigma, and cover in a corpus directory.
    Sweep {
        /// Directory of polytope JSON files.
        dir: PathBuf,
        /// Check kind to sweep: bt, local-bt, ratio, or audit.
        #[arg(long, default_value = "local-bt")]
        check: String,
        /// Run the equality characterization instead of a bound check.
        #[arg(long, default_value_t = false)]
        detect_equality: bool,
        /// Write the NDJSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PolySub {
    /// Dimension, vertex and facet counts, and volume.
    Info { file: PathBuf },
    /// Volume of the hull of the body's vertices.
    Volume { file: PathBuf },
    /// Coordinate projection onto the coordinates in --tau.
    Project {
        file: PathBuf,
        #[arg(long)]
        tau: String,
    },
    /// Slice by fixing every coordinate outside --tau at its --base value.
    Slice {
        file: PathBuf,
        #[arg(long)]
        tau: String,
        /// Full-dimensional anchor point, comma-separated.
        #[arg(long)]
        base: String,
    },
}

fn open_out(path: Option<&PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    init_threads();
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    match cli.cmd {
        Cmd::Poly { op } => {
            let value = match &op {
                PolySub::Info { file } => ops::poly_cmd(PolyOp::Info, file, None, None)?,
                PolySub::Volume { file } => ops::poly_cmd(PolyOp::Volume, file, None, None)?,
                PolySub::Project { file, tau } => {
                    ops::poly_cmd(PolyOp::Project, file, Some(tau), None)?
                }
                PolySub::Slice { file, tau, base } => {
                    ops::poly_cmd(PolyOp::Slice, file, Some(tau), Some(base))?
                }
            };
            println!("{}", serde_json::to_string_pretty(&value)?);
            Ok(EXIT_OK)
        }
        Cmd::Covers { sigma, n, irreducible, max_m, max_mult } => {
            let value = ops::covers_cmd(&sigma, n, irreducible, max_m, max_mult)?;
            println!("{}", serde_json::to_string_pretty(&value)?);
            Ok(EXIT_OK)
        }
        Cmd::Check { kind, body, sigma, cover, cover_file, out } => {
            let run = CheckRun {
                kind: CheckKind::parse(&kind)?,
                body_path: &body,
                sigma: sigma.as_deref(),
                cover: cover.as_deref(),
                cover_file: cover_file.as_deref(),
                cfg: &cfg,
            };
            let mut sink = open_out(out.as_ref())?;
            let holds = ops::check_cmd(&run, &mut sink)?;
            Ok(if holds { EXIT_OK } else { EXIT_VIOLATED })
        }
        Cmd::Build { target, body, sigma, l_mode, block_file, out } => {
            if target != "hanner" {
                return Err(CliError::Input(format!(
                    "unknown build target {target:?}; expected hanner"
                )));
            }
            let (witness, holds) = ops::build_cmd(&body, &sigma, &l_mode, block_file.as_deref())?;
            let text = serde_json::to_string_pretty(&witness)?;
            match out {
                Some(p) => std::fs::write(p, text + "\n")?,
                None => println!("{text}"),
            }
            Ok(if holds { EXIT_OK } else { EXIT_VIOLATED })
        }
        Cmd::Verify { witness, body, out } => {
            let mut sink = open_out(out.as_ref())?;
            let holds = ops::verify_cmd(&witness, &body, &cfg, &mut sink)?;
            Ok(if holds { EXIT_OK } else { EXIT_VIOLATED })
        }
        Cmd::Corpus { action, kind, n, count, start, dir } => {
            if action != "generate" {
                return Err(CliError::Input(format!(
                    "unknown corpus action {action:?}; expected generate"
                )));
            }
            let value = ops::corpus_cmd(&dir, &kind, n, count, cfg.seed, start)?;
            println!("{}", serde_json::to_string_pretty(&value)?);
            Ok(EXIT_OK)
        }
        Cmd::Sweep { dir, check, detect_equality, out } => {
            let run = SweepRun {
                dir: &dir,
                kind: CheckKind::parse(&check)?,
                detect_equality,
                cfg: &cfg,
            };
            let mut sink = open_out(out.as_ref())?;
            let holds = ops::sweep_cmd(&run, &mut sink)?;
            Ok(if holds { EXIT_OK } else { EXIT_VIOLATED })
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
