//! One (problem, method, ε) run: load or generate the data, build the
//! smoothed problem, run the solver, write `trace.csv` and `report.json`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use smoothaccel::accel::{self, epoch_budget, RunConfig};
use smoothaccel::baselines::{agd_run_with_sink, subgradient_run_with_sink, BaselineConfig};
use smoothaccel::dense::Matrix;
use smoothaccel::instances::{self, Instance, InstanceKind};
use smoothaccel::io::{read_matrix, read_svmlight, read_vector, Dataset};
use smoothaccel::objectives::{
    build_l1svm, build_l4svm, build_linf, certify_uniform_convexity, Objective, ProblemKind,
};
use smoothaccel::report::{CsvTrace, Method, RunRecord, SolverReport, Status};
use smoothaccel::{Error, Result};

/// Where the problem data comes from.
#[derive(Debug, Clone)]
pub enum Source {
    Linf {
        matrix: PathBuf,
        rhs: PathBuf,
    },
    Svm {
        data: PathBuf,
    },
    Generated {
        kind: InstanceKind,
        m: usize,
        d: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone)]
pub struct Job {
    pub problem: ProblemKind,
    pub source: Source,
    pub lambda: f64,
    pub eps: f64,
    pub method: Method,
    pub max_iter: Option<usize>,
    pub theta: f64,
    pub seed: u64,
}

enum Data {
    Linf(Matrix, Vec<f64>),
    Svm(Dataset),
}

fn load(job: &Job) -> Result<Data> {
    let data = match &job.source {
        Source::Linf { matrix, rhs } => Data::Linf(read_matrix(matrix)?, read_vector(rhs)?),
        Source::Svm { data } => Data::Svm(read_svmlight(data, None)?),
        Source::Generated { kind, m, d, seed } => {
            match instances::generate(*kind, *m, *d, *seed)? {
                Instance::Linf { a, b, .. } => Data::Linf(a, b),
                Instance::Svm { data, .. } => Data::Svm(data),
            }
        }
    };
    let fits = matches!(
        (&data, job.problem),
        (Data::Linf(..), ProblemKind::Linf)
            | (Data::Svm(_), ProblemKind::L1svm | ProblemKind::L4svm)
    );
    if !fits {
        return Err(Error::InvalidParameter(format!(
            "problem `{}` does not match the supplied data",
            job.problem
        )));
    }
    Ok(data)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Runs `job` with output in `out`. Errors are input or setup errors; a
/// run that starts always produces a report.
pub fn run_job(job: &Job, out: &Path) -> Result<RunRecord> {
    if !(job.eps > 0.0 && job.eps.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {}",
            job.eps
        )));
    }
    let data = load(job)?;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let mut echo: BTreeMap<String, Value> = BTreeMap::new();

    let problem: Box<dyn Objective> = match data {
        Data::Linf(a, b) => {
            echo.insert("m".into(), json!(a.rows()));
            echo.insert("d".into(), json!(a.cols()));
            let p = build_linf(a, b, job.eps)?;
            echo.insert("smoothing_gap".into(), json!(p.smoothing_gap()));
            Box::new(p)
        }
        Data::Svm(ds) => {
            echo.insert("m".into(), json!(ds.points.rows()));
            echo.insert("d".into(), json!(ds.points.cols()));
            echo.insert("lambda".into(), json!(job.lambda));
            let p = match job.problem {
                ProblemKind::L1svm => build_l1svm(&ds.points, &ds.labels, job.lambda, job.eps)?,
                _ => build_l4svm(&ds.points, &ds.labels, job.lambda, job.eps)?,
            };
            echo.insert("smoothing_gap".into(), json!(p.smoothing_gap()));
            if p.smoothing_gap() > job.eps / 2.0 {
                eprintln!(
                    "warning: smoothing can cost up to {:e}, more than eps/2; the final point may miss eps",
                    p.smoothing_gap()
                );
            }
            if job.problem == ProblemKind::L4svm {
                echo.insert("sigma4".into(), json!(p.sigma4()));
                echo.insert("kappa4".into(), json!(p.kappa4()));
            }
            Box::new(p)
        }
    };
    let mu = problem.mu().unwrap_or(f64::NAN);
    let x0 = vec![0.0; problem.dim()];
    if let Some(r) = problem.distance_bound(&x0) {
        echo.insert("distance_bound".into(), json!(r));
    }
    echo.insert("gap_target".into(), json!(job.eps / 2.0));
    match &job.source {
        Source::Linf { matrix, rhs } => {
            echo.insert("matrix".into(), json!(matrix));
            echo.insert("rhs".into(), json!(rhs));
        }
        Source::Svm { data } => {
            echo.insert("data".into(), json!(data));
        }
        Source::Generated { kind, m, d, seed } => {
            echo.insert(
                "instance".into(),
                json!({"kind": kind, "m": m, "d": d, "seed": seed}),
            );
        }
    }

    let trace_path = out.join("trace.csv");
    let mut sink = CsvTrace::create(&trace_path)?;
    let report: SolverReport = match job.method {
        Method::Accel => {
            let config = RunConfig {
                theta: job.theta,
                max_iters: job.max_iter.unwrap_or(RunConfig::default().max_iters),
                ..RunConfig::with_eps(job.eps)
            };
            echo.insert("theta".into(), json!(config.theta));
            echo.insert("max_iters".into(), json!(config.max_iters));
            echo.insert("max_bisections".into(), json!(config.max_bisections));
            echo.insert("inner_rel_tol".into(), json!(config.inner.rel_tol));
            echo.insert("inner_max_iters".into(), json!(config.inner.max_iters));
            echo.insert("armijo".into(), json!(config.inner.armijo));
            if job.problem == ProblemKind::L4svm {
                let sigma4 = echo["sigma4"].as_f64().expect("set above");
                // the σ₄ certificate is the only random step; it draws from the job seed
                certify_uniform_convexity(&*problem, sigma4, 1000, 2.0, job.seed)?;
                echo.insert("restart_constant".into(), json!(config.restart_constant));
                echo.insert("max_epochs".into(), json!(config.max_epochs));
                echo.insert(
                    "epoch_budget".into(),
                    json!(epoch_budget(problem.l3() / sigma4, config.restart_constant)),
                );
                accel::run_restarted_with(&*problem, sigma4, &config, &mut sink)?
            } else {
                accel::run_with_sink(&*problem, &config, &mut sink)?
            }
        }
        Method::Agd | Method::Subgradient => {
            let config = BaselineConfig {
                max_iters: job.max_iter.unwrap_or(BaselineConfig::default().max_iters),
                ..BaselineConfig::with_eps(job.eps)
            };
            echo.insert("max_iters".into(), json!(config.max_iters));
            if job.method == Method::Agd {
                let l1 = problem.l1().ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "agd needs a gradient Lipschitz constant, which {} lacks",
                        job.problem
                    ))
                })?;
                echo.insert("l1".into(), json!(l1));
                agd_run_with_sink(&*problem, &config, &mut sink)?
            } else {
                echo.insert("eta0".into(), json!(1.0));
                subgradient_run_with_sink(&*problem, &config, &mut sink)?
            }
        }
    };
    if let Some(msg) = &report.message {
        echo.insert("message".into(), json!(msg));
    }
    echo.insert("gap_est".into(), json!(report.gap_est));
    echo.insert("epochs".into(), json!(report.epochs));

    let record = RunRecord {
        problem: job.problem.to_string(),
        method: job.method.to_string(),
        eps: job.eps,
        mu,
        l3: problem.l3(),
        iterations: report.iterations,
        final_f: report.f,
        final_f_mu: report.f_mu,
        status: report.status,
        seed: Some(job.seed),
        config_echo: echo,
    };
    let report_path = out.join("report.json");
    fs::write(&report_path, record.to_json() + "\n").map_err(io_err(&report_path))?;
    Ok(record)
}

pub fn exit_code(status: Status) -> u8 {
    match status {
        Status::Converged => 0,
        Status::CapReached | Status::InnerFailure => 2,
    }
}
