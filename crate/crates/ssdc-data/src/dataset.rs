//! Dense in-memory datasets, the libsvm text reader, and a seeded synthetic
//! generator.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::DataError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Classification,
    Regression,
}

/// A dense feature matrix with labels. Immutable after construction apart
/// from explicit feature scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<Vec<f64>>,
    labels: Vec<f64>,
    task: Task,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<f64>, task: Task) -> Result<Self, DataError> {
        if features.is_empty() {
            return Err(DataError::invalid("dataset needs at least one row"));
        }
        if features.len() != labels.len() {
            return Err(DataError::invalid(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        let d = features[0].len();
        if d == 0 {
            return Err(DataError::invalid("dataset needs at least one feature"));
        }
        for (i, row) in features.iter().enumerate() {
            if row.len() != d {
                return Err(DataError::invalid(format!(
                    "row {} has {} features, expected {d}",
                    i,
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(DataError::invalid(format!("row {i} has a non-finite feature")));
            }
        }
        for (i, &b) in labels.iter().enumerate() {
            if !b.is_finite() {
                return Err(DataError::invalid(format!("label {i} is not finite")));
            }
            if task == Task::Classification && b != 1.0 && b != -1.0 {
                return Err(DataError::invalid(format!(
                    "classification label {i} must be -1 or +1, got {b}"
                )));
            }
        }
        Ok(Dataset { features, labels, task })
    }

    pub fn n(&self) -> usize {
        self.features.len()
    }

    pub fn d(&self) -> usize {
        self.features[0].len()
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Largest row norm, a building block for smoothness and subgradient
    /// bounds.
    pub fn max_row_norm(&self) -> f64 {
        self.features
            .iter()
            .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn max_row_norm_sq(&self) -> f64 {
        let m = self.max_row_norm();
        m * m
    }

    /// Rescales each feature column by its max absolute value so entries lie
    /// in `[-1, 1]`. All-zero columns are left alone.
    pub fn scale_features_unit(&mut self) {
        let d = self.d();
        for j in 0..d {
            let m = self.features.iter().map(|r| r[j].abs()).fold(0.0, f64::max);
            if m > 0.0 {
                for row in &mut self.features {
                    row[j] /= m;
                }
            }
        }
    }
}

/// Feature preprocessing choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScaleMode {
    Off,
    /// Per-feature max-abs scaling to `[-1, 1]`; the default.
    #[default]
    MaxAbs,
}

impl ScaleMode {
    pub fn apply(&self, data: &mut Dataset) {
        if *self == ScaleMode::MaxAbs {
            data.scale_features_unit();
        }
    }
}

/// Reads the libsvm text format: one sample per line,
/// `label idx:val idx:val ...` with 1-based, strictly increasing indices.
/// The dimension is the largest index seen anywhere in the file.
pub fn read_libsvm(path: &Path, task: Task) -> Result<Dataset, DataError> {
    let text = fs::read_to_string(path)?;
    parse_libsvm(&text, task)
}

fn parse_libsvm(text: &str, task: Task) -> Result<Dataset, DataError> {
    let mut labels = Vec::new();
    let mut sparse_rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut d = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line_id = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let label_tok = parts.next().expect("non-empty line has a first token");
        let label: f64 = label_tok
            .parse()
            .map_err(|_| DataError::parse(line_id, format!("bad label '{label_tok}'")))?;
        let mut row = Vec::new();
        let mut last_idx = 0usize;
        for tok in parts {
            let (idx_s, val_s) = tok.split_once(':').ok_or_else(|| {
                DataError::parse(line_id, format!("expected index:value, got '{tok}'"))
            })?;
            let idx: usize = idx_s
                .parse()
                .map_err(|_| DataError::parse(line_id, format!("bad index '{idx_s}'")))?;
            if idx == 0 {
                return Err(DataError::parse(line_id, "indices are 1-based; got 0"));
            }
            if idx <= last_idx {
                return Err(DataError::parse(
                    line_id,
                    format!("index {idx} does not increase past {last_idx}"),
                ));
            }
            let val: f64 = val_s
                .parse()
                .map_err(|_| DataError::parse(line_id, format!("bad value '{val_s}'")))?;
            row.push((idx, val));
            last_idx = idx;
        }
        d = d.max(last_idx);
        labels.push(label);
        sparse_rows.push(row);
    }
    if labels.is_empty() {
        return Err(DataError::invalid("file contains no samples"));
    }
    if d == 0 {
        return Err(DataError::invalid("no sample carries any feature"));
    }
    let features = sparse_rows
        .into_iter()
        .map(|row| {
            let mut dense = vec![0.0; d];
            for (idx, val) in row {
                dense[idx - 1] = val;
            }
            dense
        })
        .collect();
    Dataset::new(features, labels, task)
}

/// Parameters for the synthetic generator.
#[derive(Debug, Clone, Copy)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub task: Task,
    /// Number of nonzero coordinates in the ground-truth weights.
    pub sparsity: usize,
    /// Noise scale added to the clean score.
    pub noise: f64,
    pub seed: u64,
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller on two uniforms; the first is kept away from zero.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Draws Gaussian features, a sparse ground-truth weight vector, and labels
/// from the noisy linear score. Deterministic in the seed.
pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<Dataset, DataError> {
    if spec.n == 0 || spec.d == 0 {
        return Err(DataError::invalid("synthetic spec needs n >= 1 and d >= 1"));
    }
    if spec.sparsity > spec.d {
        return Err(DataError::invalid(format!(
            "sparsity {} exceeds dimension {}",
            spec.sparsity, spec.d
        )));
    }
    if spec.noise < 0.0 || !spec.noise.is_finite() {
        return Err(DataError::invalid(format!("noise must be nonnegative, got {}", spec.noise)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut w_star = vec![0.0; spec.d];
    let mut support: Vec<usize> = (0..spec.d).collect();
    for pick in 0..spec.sparsity {
        let j = rng.gen_range(pick..spec.d);
        support.swap(pick, j);
        w_star[support[pick]] = standard_normal(&mut rng);
    }

    let mut features = Vec::with_capacity(spec.n);
    let mut labels = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let row: Vec<f64> = (0..spec.d).map(|_| standard_normal(&mut rng)).collect();
        let score: f64 = row.iter().zip(&w_star).map(|(a, w)| a * w).sum::<f64>()
            + spec.noise * standard_normal(&mut rng);
        let label = match spec.task {
            Task::Regression => score,
            Task::Classification => {
                if score >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        features.push(row);
        labels.push(label);
    }
    Dataset::new(features, labels, spec.task)
}
