mod job;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use smoothaccel::instances::{self, InstanceKind, DEFAULT_FLIP_PROB};
use smoothaccel::objectives::ProblemKind;
use smoothaccel::report::Method;

use job::{exit_code, run_job, Job, Source};
use sweep::{run_all, summary_csv, ExperimentSpec};

#[derive(Parser)]
#[command(
    name = "smoothaccel",
    version,
    about = "Accelerated higher-order solvers for smoothed ℓ∞ regression and SVMs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem and write trace.csv and report.json.
    Solve {
        /// linf, l1svm or l4svm
        problem: ProblemKind,
        /// Matrix Market (.mtx) or CSV matrix, for linf
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Right-hand side, one value per line, for linf
        #[arg(long)]
        rhs: Option<PathBuf>,
        /// svmlight data set, for l1svm and l4svm
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        lambda: f64,
        #[arg(long, default_value_t = 1e-2)]
        eps: f64,
        #[arg(long, default_value = "accel")]
        method: Method,
        #[arg(long, default_value = "run")]
        out: PathBuf,
        #[arg(long)]
        max_iter: Option<usize>,
        /// ρ-search window factor
        #[arg(long, default_value_t = 2.0)]
        theta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate a seeded synthetic instance.
    Gen {
        /// linf-random, linf-interp, svm-separable or svm-noisy
        kind: InstanceKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Rows or samples (ignored by linf-interp)
        #[arg(long, default_value_t = 100)]
        m: usize,
        /// Columns or features
        #[arg(long, default_value_t = 10)]
        d: usize,
        /// Label flip probability for svm-noisy
        #[arg(long)]
        flip_prob: Option<f64>,
        #[arg(long, default_value = "instance")]
        out: PathBuf,
    },
    /// Run a grid of jobs described by a key = value spec file.
    Sweep {
        spec: PathBuf,
        /// Output directory; overrides `out` in the spec
        #[arg(long)]
        out: Option<PathBuf>,
        /// Jobs run concurrently
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Solve {
            problem,
            matrix,
            rhs,
            data,
            lambda,
            eps,
            method,
            out,
            max_iter,
            theta,
            seed,
        } => {
            let source = match (problem, matrix, rhs, data) {
                (ProblemKind::Linf, Some(matrix), Some(rhs), None) => Source::Linf { matrix, rhs },
                (ProblemKind::Linf, ..) => return fail("linf needs --matrix and --rhs"),
                (_, None, None, Some(data)) => Source::Svm { data },
                _ => return fail(format!("{problem} needs --data and no --matrix/--rhs")),
            };
            let job = Job {
                problem,
                source,
                lambda,
                eps,
                method,
                max_iter,
                theta,
                seed,
            };
            match run_job(&job, &out) {
                Ok(rec) => {
                    println!(
                        "{:?} after {} iterations: f = {}, f_mu = {}",
                        rec.status, rec.iterations, rec.final_f, rec.final_f_mu
                    );
                    ExitCode::from(exit_code(rec.status))
                }
                Err(e) => fail(e),
            }
        }
        Command::Gen {
            kind,
            seed,
            m,
            d,
            flip_prob,
            out,
        } => {
            let inst = match (kind, flip_prob) {
                (InstanceKind::SvmNoisy, p) => {
                    instances::svm_noisy(m, d, seed, p.unwrap_or(DEFAULT_FLIP_PROB))
                }
                (_, Some(_)) => return fail("--flip-prob applies to svm-noisy only"),
                (kind, None) => instances::generate(kind, m, d, seed),
            };
            match inst.and_then(|i| i.write(&out)) {
                Ok(()) => {
                    println!("wrote {kind} instance to {}", out.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Sweep { spec, out, jobs } => {
            let text = match std::fs::read_to_string(&spec) {
                Ok(t) => t,
                Err(e) => return fail(format!("{}: {e}", spec.display())),
            };
            let base = spec.parent().map(PathBuf::from).unwrap_or_default();
            let parsed = match ExperimentSpec::parse(&text, &base) {
                Ok(p) => p,
                Err(e) => return fail(format!("{}: {e}", spec.display())),
            };
            let out = out
                .or(parsed.out.clone())
                .unwrap_or_else(|| PathBuf::from("sweep"));
            if let Err(e) = std::fs::create_dir_all(&out) {
                return fail(format!("{}: {e}", out.display()));
            }
            let rows = run_all(&parsed, &out, jobs);
            let summary = out.join("summary.csv");
            if let Err(e) = std::fs::write(&summary, summary_csv(&rows)) {
                return fail(format!("{}: {e}", summary.display()));
            }
            let failed = rows.iter().filter(|r| !r.ok).count();
            println!(
                "{} jobs, {failed} failed; summary in {}",
                rows.len(),
                summary.display()
            );
            ExitCode::from(if failed > 0 { 2 } else { 0 })
        }
    }
}
