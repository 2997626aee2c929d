//! `lmms` — command-line interface for finite Lorentzian metric measure
//! spaces. Exit codes: 0 success, 1 validation or computation failure,
//! 2 usage error. Output is a JSON envelope {manifest, result} on stdout
//! (CSV for distance batches with --csv); everything except the manifest's
//! wall-clock field is deterministic given --seed.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use lmms_cli::commands::{self, CmdOut, DistanceJob, MetricArg, SolverArg};
use lmms_cli::format::{RunManifest, TOOL_VERSION};

#[derive(Parser)]
#[command(name = "lmms", version, about = "Finite Lorentzian metric measure spaces: validation, distances, isomorphy, matrix laws, sprinkling")]
struct Cli {
    /// Worker threads for batch jobs (default: $LMMS_THREADS, else 1).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the axioms of an instance file (exit 1 if invalid).
    Validate {
        file: PathBuf,
        /// Absolute tolerance for the axiom checks.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Restrict to the support and merge indistinguishable points.
    Quotient {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Also write the quotient instance to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distance between two instances, or all pairs of three or more.
    Distance {
        /// Which distance to compute.
        #[arg(long, value_enum)]
        metric: MetricArg,
        /// Instance files (two or more).
        #[arg(required = true, num_args = 2..)]
        files: Vec<PathBuf>,
        /// Moment exponent for --metric lp (1 <= p; inf via linf).
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Entrywise power applied to both time-separation matrices first.
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        /// Deletion-mass scale for --metric box.
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Coupling solver for l0/lp/linf (box/lgh/intrinsic pick their own).
        #[arg(long, value_enum, default_value_t = SolverArg::Auto)]
        solver: SolverArg,
        /// Search budget overrides, e.g. "restarts=8,iter-cap=200".
        #[arg(long)]
        budget: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit a CSV table instead of JSON (manifest on a '#' comment line).
        #[arg(long)]
        csv: bool,
        /// Series depth for --metric intrinsic.
        #[arg(long, default_value_t = 3)]
        kmax: usize,
        /// Test-function family size per level for --metric intrinsic.
        #[arg(long, default_value_t = 64)]
        family: usize,
    },
    /// Decide measure-preserving time isometry exactly.
    Isomorphic {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// k-point distance-matrix law of an instance (exact, or sampled with --samples).
    MatrixLaw {
        file: PathBuf,
        #[arg(long)]
        k: usize,
        /// Estimate from this many sampled k-tuples instead of enumerating.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sample a causal-diamond instance (uniform iid or Poisson).
    Sprinkle {
        /// Spatial dimension d of the 1+d diamond.
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Diamond half-height T.
        #[arg(long = "T", default_value_t = 1.0)]
        half_height: f64,
        /// Draw exactly this many events.
        #[arg(long, conflicts_with = "intensity")]
        n: Option<usize>,
        /// Poisson intensity (events per unit volume).
        #[arg(long)]
        intensity: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Skip the zero-weight spacelike boundary point.
        #[arg(long)]
        drop_boundary: bool,
        /// Also write the instance to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare matrix laws against the exact isomorphy verdict.
    Reconstruct {
        a: PathBuf,
        b: PathBuf,
        /// Largest tuple size k to compare.
        #[arg(long, default_value_t = 3)]
        kmax: usize,
        /// Sample count per law when exact enumeration is too large.
        #[arg(long, default_value_t = 4096)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Disjoint union glued at the shared boundary point.
    Union {
        a: PathBuf,
        b: PathBuf,
        /// Weight fraction of the first space.
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Also write the union instance to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn resolve_threads(flag: Option<usize>) -> Result<usize, String> {
    let requested = match flag {
        Some(t) => Some(t),
        None => match std::env::var("LMMS_THREADS") {
            Ok(text) => Some(
                text.parse::<usize>()
                    .map_err(|_| format!("LMMS_THREADS={text:?} is not a number"))?,
            ),
            Err(_) => None,
        },
    };
    match requested {
        Some(0) => Err("thread count must be at least 1".to_string()),
        Some(t) => Ok(t),
        None => Ok(1),
    }
}

fn dispatch(command: &Command, threads: usize) -> anyhow::Result<CmdOut> {
    match command {
        Command::Validate { file, tol } => commands::cmd_validate(file, *tol),
        Command::Quotient { file, tol, out } => {
            commands::cmd_quotient(file, *tol, out.as_deref())
        }
        Command::Distance {
            metric,
            files,
            p,
            q,
            lambda,
            solver,
            budget,
            seed,
            csv,
            kmax,
            family,
        } => {
            let job = DistanceJob {
                metric: *metric,
                p: *p,
                q: *q,
                lambda: *lambda,
                solver: *solver,
                budget: commands::parse_budget(budget.as_deref())?,
                seed: *seed,
                kmax: *kmax,
                family: *family,
            };
            commands::cmd_distance(files, &job, *csv, threads)
        }
        Command::Isomorphic { a, b, tol } => commands::cmd_isomorphic(a, b, *tol),
        Command::MatrixLaw {
            file,
            k,
            samples,
            seed,
        } => commands::cmd_matrix_law(file, *k, *samples, *seed),
        Command::Sprinkle {
            dim,
            half_height,
            n,
            intensity,
            seed,
            drop_boundary,
            out,
        } => commands::cmd_sprinkle(
            *dim,
            *half_height,
            *n,
            *intensity,
            *seed,
            *drop_boundary,
            out.as_deref(),
        ),
        Command::Reconstruct {
            a,
            b,
            kmax,
            samples,
            seed,
        } => commands::cmd_reconstruct(a, b, *kmax, *samples, *seed),
        Command::Union { a, b, alpha, out } => {
            commands::cmd_union(a, b, *alpha, out.as_deref())
        }
    }
}

fn main() {
    let start = Instant::now();
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse(); // clap exits 2 on usage errors
    let threads = match resolve_threads(cli.threads) {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("lmms: {msg}");
            std::process::exit(2);
        }
    };
    match dispatch(&cli.command, threads) {
        Ok(out) => {
            let manifest = RunManifest {
                command: argv[1..].join(" "),
                inputs: out.inputs,
                seed: out.seed,
                version: TOOL_VERSION,
                wall_ms: start.elapsed().as_millis() as u64,
            };
            match out.csv {
                Some(body) => {
                    let compact = serde_json::to_string(&manifest)
                        .expect("manifest serializes");
                    print!("# manifest: {compact}\n{body}");
                }
                None => {
                    let envelope = serde_json::json!({
                        "manifest": manifest,
                        "result": out.result,
                    });
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&envelope)
                            .expect("envelope serializes")
                    );
                }
            }
            std::process::exit(out.exit);
        }
        Err(err) => {
            let usage = err
                .downcast_ref::<lmms_cli::commands::UsageError>()
                .is_some();
            eprintln!("lmms: {err:#}");
            std::process::exit(if usage { 2 } else { 1 });
        }
    }
}
