//! `sweep`: a flat `key = value` experiment file expanded into a grid of
//! jobs.
//!
//! Recognised keys: `problem`, `matrix`, `rhs`, `data`, `gen`, `m`, `d`,
//! `seed`, `lambda`, `eps` (comma list), `methods` (comma list),
//! `max_iter`, `theta`, `out`.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use smoothaccel::instances::InstanceKind;
use smoothaccel::objectives::ProblemKind;
use smoothaccel::report::{Method, Status};

use crate::job::{run_job, Job, Source};

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub problem: ProblemKind,
    pub source: Source,
    pub lambda: f64,
    pub eps: Vec<f64>,
    pub methods: Vec<Method>,
    pub max_iter: Option<usize>,
    pub theta: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| format!("`{key}`: cannot parse `{s}`"))
        })
        .collect()
}

fn one<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .trim()
        .parse()
        .map_err(|_| format!("`{key}`: cannot parse `{value}`"))
}

impl ExperimentSpec {
    /// Parses the spec text; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, String> {
        let mut problem = None;
        let (mut matrix, mut rhs, mut data, mut gen) = (None, None, None, None);
        let (mut m, mut d) = (None, None);
        let mut seed = 0u64;
        let mut lambda = 0.1;
        let mut eps = Vec::new();
        let mut methods = Vec::new();
        let mut max_iter = None;
        let mut theta = 2.0;
        let mut out = None;

        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| format!("line {}: expected `key = value`", n + 1))?;
            let at = |e: String| format!("line {}: {e}", n + 1);
            match key {
                "problem" => problem = Some(one::<ProblemKind>(key, value).map_err(at)?),
                "matrix" => matrix = Some(base.join(value)),
                "rhs" => rhs = Some(base.join(value)),
                "data" => data = Some(base.join(value)),
                "gen" => gen = Some(one::<InstanceKind>(key, value).map_err(at)?),
                "m" => m = Some(one(key, value).map_err(at)?),
                "d" => d = Some(one(key, value).map_err(at)?),
                "seed" => seed = one(key, value).map_err(at)?,
                "lambda" => lambda = one(key, value).map_err(at)?,
                "eps" => eps = list(key, value).map_err(at)?,
                "methods" => methods = list(key, value).map_err(at)?,
                "max_iter" => max_iter = Some(one(key, value).map_err(at)?),
                "theta" => theta = one(key, value).map_err(at)?,
                "out" => out = Some(base.join(value)),
                other => return Err(at(format!("unknown key `{other}`"))),
            }
        }

        let problem = problem.ok_or("missing `problem`")?;
        let source = match (matrix, rhs, data, gen) {
            (Some(matrix), Some(rhs), None, None) => Source::Linf { matrix, rhs },
            (None, None, Some(data), None) => Source::Svm { data },
            (None, None, None, Some(kind)) => {
                let d = d.ok_or("`gen` needs `d`")?;
                Source::Generated {
                    kind,
                    m: m.unwrap_or(d),
                    d,
                    seed,
                }
            }
            _ => return Err("give exactly one of `matrix` + `rhs`, `data` or `gen`".into()),
        };
        if methods.is_empty() {
            return Err("method list is empty".into());
        }
        if eps.is_empty() {
            return Err("eps list is empty".into());
        }
        if let Some(bad) = eps.iter().find(|e: &&f64| !(**e > 0.0 && e.is_finite())) {
            return Err(format!("eps values must be positive, got {bad}"));
        }
        Ok(Self {
            problem,
            source,
            lambda,
            eps,
            methods,
            max_iter,
            theta,
            seed,
            out,
        })
    }

    /// Jobs in grid order: ε outer, method inner.
    pub fn jobs(&self) -> Vec<Job> {
        self.eps
            .iter()
            .flat_map(|&eps| {
                self.methods.iter().map(move |&method| Job {
                    problem: self.problem,
                    source: self.source.clone(),
                    lambda: self.lambda,
                    eps,
                    method,
                    max_iter: self.max_iter,
                    theta: self.theta,
                    seed: self.seed,
                })
            })
            .collect()
    }
}

pub struct Row {
    pub job: Job,
    pub iters: Option<usize>,
    pub final_f: Option<f64>,
    /// `Converged`, `CapReached`, `InnerFailure`, or `Error: ...`.
    pub status: String,
    pub ok: bool,
}

pub fn job_dir(job: &Job) -> String {
    format!("{}_eps{:e}", job.method, job.eps)
}

/// Runs every job with at most `jobs` in flight; rows come back in grid
/// order.
pub fn run_all(spec: &ExperimentSpec, out: &Path, jobs: usize) -> Vec<Row> {
    let grid = spec.jobs();
    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<Option<Row>>> = Mutex::new((0..grid.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, grid.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = grid.get(i) else { break };
                let row = match run_job(job, &out.join(job_dir(job))) {
                    Ok(rec) => Row {
                        job: job.clone(),
                        iters: Some(rec.iterations),
                        final_f: Some(rec.final_f),
                        status: format!("{:?}", rec.status),
                        ok: rec.status == Status::Converged,
                    },
                    Err(e) => Row {
                        job: job.clone(),
                        iters: None,
                        final_f: None,
                        status: format!("Error: {e}"),
                        ok: false,
                    },
                };
                rows.lock().expect("no job panics while holding the lock")[i] = Some(row);
            });
        }
    });
    rows.into_inner()
        .expect("workers joined")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn summary_csv(rows: &[Row]) -> String {
    let mut text = String::from("problem,method,eps,iters,final_f,status\n");
    for r in rows {
        let iters = r.iters.map(|v| v.to_string()).unwrap_or_default();
        let f = r.final_f.map(|v| v.to_string()).unwrap_or_default();
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.job.problem,
            r.job.method,
            r.job.eps,
            iters,
            f,
            csv_field(&r.status)
        ));
    }
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists_comments_and_relative_paths() {
        let spec = ExperimentSpec::parse(
            "# scaling run\nproblem = linf\nmatrix = A.mtx\nrhs = b.txt  # trailing\neps = 1e-2, 1e-3\nmethods = accel,agd\n",
            Path::new("/data"),
        )
        .unwrap();
        assert_eq!(spec.eps, vec![1e-2, 1e-3]);
        assert_eq!(spec.methods, vec![Method::Accel, Method::Agd]);
        assert!(
            matches!(&spec.source, Source::Linf { matrix, .. } if matrix == Path::new("/data/A.mtx"))
        );
        let jobs = spec.jobs();
        assert_eq!(jobs.len(), 4);
        assert_eq!((jobs[1].eps, jobs[1].method), (1e-2, Method::Agd));
    }

    #[test]
    fn rejects_bad_specs() {
        let base = Path::new(".");
        for text in [
            "problem = linf\ngen = linf-random\nd = 3\neps = 0.1\nmethods =\n",
            "problem = linf\ngen = linf-random\nd = 3\neps = -1\nmethods = accel\n",
            "problem = linf\ngen = linf-random\nd = 3\neps = 0.1\nmethods = accel\ncolour = red\n",
            "problem = linf\neps = 0.1\nmethods = accel\n",
            "problem = linf\ngen = linf-random\nd = 3\neps = 0.1\nmethods = newton\n",
            "just words\n",
        ] {
            assert!(ExperimentSpec::parse(text, base).is_err(), "{text}");
        }
    }

    #[test]
    fn summary_quotes_messages_with_commas() {
        assert_eq!(csv_field("Error: a, b"), "\"Error: a, b\"");
        assert_eq!(csv_field("Converged"), "Converged");
    }
}
