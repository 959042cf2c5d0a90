//! Seeded synthetic instances.
//!
//! Every generator draws from a single `ChaCha8Rng` seeded with the given
//! seed, so the same arguments always produce the same bytes on disk.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dense::{vec, Cholesky, Matrix};
use crate::error::{invalid, Error, Result};
use crate::io::{write_matrix_market, write_svmlight, write_vector, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    LinfRandom,
    LinfInterp,
    SvmSeparable,
    SvmNoisy,
}

impl std::str::FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linf-random" => Ok(Self::LinfRandom),
            "linf-interp" => Ok(Self::LinfInterp),
            "svm-separable" => Ok(Self::SvmSeparable),
            "svm-noisy" => Ok(Self::SvmNoisy),
            other => Err(invalid(format!("unknown instance kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::LinfRandom => "linf-random",
            Self::LinfInterp => "linf-interp",
            Self::SvmSeparable => "svm-separable",
            Self::SvmNoisy => "svm-noisy",
        })
    }
}

/// Written next to the instance files as `meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub kind: InstanceKind,
    pub seed: u64,
    pub m: usize,
    pub d: usize,
    /// Known optimal value, when the construction fixes it.
    pub optimum: Option<f64>,
    pub flip_prob: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Linf {
        a: Matrix,
        b: Vec<f64>,
        meta: Metadata,
    },
    Svm {
        data: Dataset,
        plant: Vec<f64>,
        meta: Metadata,
    },
}

fn normal(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn check_sizes(m: usize, d: usize) -> Result<()> {
    if m == 0 || d == 0 {
        return Err(invalid(format!(
            "sizes must be positive, got m = {m}, d = {d}"
        )));
    }
    Ok(())
}

/// `Ã` with i.i.d. standard normal entries, redrawn until `ÃᵀÃ ≻ 0`, and
/// standard normal `b̃`.
pub fn linf_random(m: usize, d: usize, seed: u64) -> Result<Instance> {
    check_sizes(m, d)?;
    if m < d {
        return Err(invalid(format!(
            "need m >= d for a full-rank system, got {m} x {d}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = loop {
        let a = Matrix::new(m, d, normal(&mut rng, m * d))?;
        if Cholesky::factor(&a.gram()).is_ok() {
            break a;
        }
    };
    let b = normal(&mut rng, m);
    Ok(Instance::Linf {
        a,
        b,
        meta: Metadata {
            kind: InstanceKind::LinfRandom,
            seed,
            m,
            d,
            optimum: None,
            flip_prob: None,
        },
    })
}

/// Identity system with standard normal right-hand side; the optimum is 0.
pub fn linf_interp(d: usize, seed: u64) -> Result<Instance> {
    check_sizes(d, d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(Instance::Linf {
        a: Matrix::identity(d),
        b: normal(&mut rng, d),
        meta: Metadata {
            kind: InstanceKind::LinfInterp,
            seed,
            m: d,
            d,
            optimum: Some(0.0),
            flip_prob: None,
        },
    })
}

/// Points with `bᵢ⟨aᵢ, x_plant⟩ ≥ 1` by rejection; with `flip_prob > 0`
/// each label is then flipped independently.
fn svm(m: usize, d: usize, seed: u64, flip_prob: f64) -> Result<Instance> {
    check_sizes(m, d)?;
    if !(0.0..=1.0).contains(&flip_prob) {
        return Err(invalid(format!(
            "flip probability must lie in [0, 1], got {flip_prob}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plant = normal(&mut rng, d);
    let mut points = Matrix::zeros(m, d);
    let mut labels = Vec::with_capacity(m);
    for i in 0..m {
        let (p, margin) = loop {
            let p = normal(&mut rng, d);
            let margin = vec::dot(&p, &plant);
            if margin.abs() >= 1.0 {
                break (p, margin);
            }
        };
        points.row_mut(i).copy_from_slice(&p);
        labels.push(margin.signum());
    }
    let kind = if flip_prob > 0.0 {
        for y in &mut labels {
            if rng.random::<f64>() < flip_prob {
                *y = -*y;
            }
        }
        InstanceKind::SvmNoisy
    } else {
        InstanceKind::SvmSeparable
    };
    Ok(Instance::Svm {
        data: Dataset { points, labels },
        plant,
        meta: Metadata {
            kind,
            seed,
            m,
            d,
            optimum: None,
            flip_prob: (flip_prob > 0.0).then_some(flip_prob),
        },
    })
}

pub fn svm_separable(m: usize, d: usize, seed: u64) -> Result<Instance> {
    svm(m, d, seed, 0.0)
}

pub fn svm_noisy(m: usize, d: usize, seed: u64, flip_prob: f64) -> Result<Instance> {
    if !(flip_prob > 0.0) {
        return Err(invalid("svm-noisy needs a positive flip probability"));
    }
    svm(m, d, seed, flip_prob)
}

pub const DEFAULT_FLIP_PROB: f64 = 0.1;

pub fn generate(kind: InstanceKind, m: usize, d: usize, seed: u64) -> Result<Instance> {
    match kind {
        InstanceKind::LinfRandom => linf_random(m, d, seed),
        InstanceKind::LinfInterp => linf_interp(d, seed),
        InstanceKind::SvmSeparable => svm_separable(m, d, seed),
        InstanceKind::SvmNoisy => svm_noisy(m, d, seed, DEFAULT_FLIP_PROB),
    }
}

impl Instance {
    pub fn meta(&self) -> &Metadata {
        match self {
            Instance::Linf { meta, .. } | Instance::Svm { meta, .. } => meta,
        }
    }

    /// Writes `A.mtx` and `b.txt`, or `data.svmlight` and `plant.txt`,
    /// plus `meta.json`, into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        match self {
            Instance::Linf { a, b, .. } => {
                write_matrix_market(&dir.join("A.mtx"), a)?;
                write_vector(&dir.join("b.txt"), b)?;
            }
            Instance::Svm { data, plant, .. } => {
                write_svmlight(&dir.join("data.svmlight"), data)?;
                write_vector(&dir.join("plant.txt"), plant)?;
            }
        }
        let meta = dir.join("meta.json");
        let text = serde_json::to_string_pretty(self.meta()).expect("metadata serializes");
        fs::write(&meta, text + "\n").map_err(|source| Error::Io { path: meta, source })
    }
}
