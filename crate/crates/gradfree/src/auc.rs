//! Bipartite ranking benchmark: minimize the empirical AUC risk of a linear
//! scorer `s(x) = ⟨θ, x⟩` — the fraction of ordered positive/negative pairs
//! the scorer ranks wrongly. The risk is piecewise constant in θ, so
//! gradient-based methods get no signal; this module pits the smoothed
//! particle scheme against a Nelder–Mead baseline and an exact-evaluation
//! variant, with a data-access counter that separates full-pair evaluations
//! from minibatch ones.

use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Instant;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{pairwise_mean, pairwise_sum, Matrix};
use crate::objectives::{NoiseSource, ObjectiveHandle};
use crate::qmc::mix3;
use crate::special::inv_norm_cdf;

/// A standardized binary-labeled dataset, positives stored first.
#[derive(Debug, Clone)]
pub struct Dataset {
    /// Row-major feature matrix, one row per point, positives first.
    pub features: Matrix,
    /// 0/1 labels aligned with the rows (so `labels[..n_plus]` are all 1).
    pub labels: Vec<u8>,
    pub n_plus: usize,
    pub n_minus: usize,
    pub name: String,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.n_plus + self.n_minus
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    /// Builds a dataset from raw rows and labels: standardizes each feature
    /// column to mean 0 and population variance 1 (dropping zero-variance
    /// columns), and reorders rows so positives come first.
    pub fn from_rows(name: &str, rows: &[Vec<f64>], labels: &[u8]) -> Result<Self> {
        if rows.is_empty() || rows.len() != labels.len() {
            return Err(Error::Parse("empty dataset or label/row count mismatch".into()));
        }
        let d_raw = rows[0].len();
        if rows.iter().any(|r| r.len() != d_raw) {
            return Err(Error::Parse("ragged feature rows".into()));
        }
        let n_plus = labels.iter().filter(|&&y| y == 1).count();
        let n_minus = labels.len() - n_plus;
        if n_plus == 0 || n_minus == 0 {
            return Err(Error::SingleClass);
        }
        let n = rows.len();

        // Column statistics with population (1/n) variance.
        let mut keep = Vec::new();
        for j in 0..d_raw {
            let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            let mean = pairwise_mean(&col);
            let sq: Vec<f64> = col.iter().map(|v| (v - mean) * (v - mean)).collect();
            let var = pairwise_sum(&sq) / n as f64;
            if var > 0.0 {
                keep.push((j, mean, var.sqrt()));
            } else {
                eprintln!("warning: dropping zero-variance feature column {j} in {name}");
            }
        }
        if keep.is_empty() {
            return Err(Error::Parse("all feature columns have zero variance".into()));
        }

        let d = keep.len();
        let mut features = Matrix::zeros(n, d);
        let mut out_labels = vec![0u8; n];
        let order = labels
            .iter()
            .enumerate()
            .filter(|(_, &y)| y == 1)
            .chain(labels.iter().enumerate().filter(|(_, &y)| y == 0))
            .map(|(i, _)| i);
        for (row_out, row_in) in order.enumerate() {
            out_labels[row_out] = labels[row_in];
            for (jj, &(j, mean, sd)) in keep.iter().enumerate() {
                features.set(row_out, jj, (rows[row_in][j] - mean) / sd);
            }
        }
        let ds = Dataset {
            features,
            labels: out_labels,
            n_plus,
            n_minus,
            name: name.into(),
        };
        ds.check_standardization()?;
        Ok(ds)
    }

    fn check_standardization(&self) -> Result<()> {
        let n = self.n();
        for j in 0..self.dim() {
            let col: Vec<f64> = (0..n).map(|i| self.features.get(i, j)).collect();
            let mean = pairwise_mean(&col);
            let sq: Vec<f64> = col.iter().map(|v| (v - mean) * (v - mean)).collect();
            let var = pairwise_sum(&sq) / n as f64;
            if mean.abs() > 1e-9 || (var - 1.0).abs() > 1e-6 {
                return Err(Error::Parse(format!(
                    "standardization check failed for column {j}: mean {mean:.2e}, var {var}"
                )));
            }
        }
        Ok(())
    }

    fn scores(&self, theta: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let terms: Vec<f64> = self
                    .features
                    .row(i)
                    .iter()
                    .zip(theta)
                    .map(|(x, t)| x * t)
                    .collect();
                pairwise_sum(&terms)
            })
            .collect()
    }
}

/// Which CSV column carries the class label.
#[derive(Debug, Clone)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
    Last,
}

/// Loads a CSV (with or without a header row), maps the labels to {0, 1},
/// and standardizes the features. Accepted label encodings: {0, 1},
/// {−1, 1}, or exactly two distinct strings (first one seen maps to 1).
pub fn load_csv_standardized(path: &Path, label: &LabelColumn, name: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .from_path(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;

    let mut records: Vec<csv::StringRecord> = Vec::new();
    for rec in reader.records() {
        records.push(rec.map_err(|e| Error::Parse(e.to_string()))?);
    }
    if records.is_empty() {
        return Err(Error::Parse(format!("{}: no rows", path.display())));
    }

    // Header detection: a first row with any non-numeric cell outside the
    // label column is a header.
    let ncols = records[0].len();
    let label_idx = match label {
        LabelColumn::Index(i) => *i,
        LabelColumn::Last => ncols - 1,
        LabelColumn::Name(h) => records[0]
            .iter()
            .position(|c| c.trim() == h)
            .ok_or_else(|| Error::Parse(format!("label column '{h}' not found in header")))?,
    };
    if label_idx >= ncols {
        return Err(Error::Parse(format!("label column {label_idx} out of range")));
    }
    let is_header = matches!(label, LabelColumn::Name(_))
        || records[0]
            .iter()
            .enumerate()
            .any(|(j, c)| j != label_idx && c.trim().parse::<f64>().is_err());
    let body = if is_header { &records[1..] } else { &records[..] };
    if body.is_empty() {
        return Err(Error::Parse(format!("{}: header only, no data rows", path.display())));
    }

    let mut rows = Vec::with_capacity(body.len());
    let mut raw_labels: Vec<String> = Vec::with_capacity(body.len());
    for rec in body {
        if rec.len() != ncols {
            return Err(Error::Parse("inconsistent column count".into()));
        }
        let mut row = Vec::with_capacity(ncols - 1);
        for (j, cell) in rec.iter().enumerate() {
            if j == label_idx {
                raw_labels.push(cell.trim().to_string());
            } else {
                row.push(
                    cell.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("non-numeric feature '{cell}'")))?,
                );
            }
        }
        rows.push(row);
    }

    let mut distinct: Vec<&str> = Vec::new();
    for l in &raw_labels {
        if !distinct.contains(&l.as_str()) {
            distinct.push(l);
        }
    }
    if distinct.len() != 2 {
        if distinct.len() == 1 {
            return Err(Error::SingleClass);
        }
        return Err(Error::Parse(format!("expected two label values, got {}", distinct.len())));
    }
    let positive: &str = if distinct.contains(&"1") && (distinct.contains(&"0") || distinct.contains(&"-1")) {
        "1"
    } else {
        distinct[0]
    };
    let labels: Vec<u8> = raw_labels.iter().map(|l| u8::from(l == positive)).collect();

    Dataset::from_rows(name, &rows, &labels)
}

/// Counts individual data-point accesses: `n₊·n₋` per exact risk evaluation,
/// the batch size per minibatch evaluation.
#[derive(Debug, Default)]
pub struct AccessCounter {
    accesses: AtomicU64,
    evals: AtomicU64,
}

impl AccessCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, pairs: u64) {
        self.accesses.fetch_add(pairs, Ordering::Relaxed);
        self.evals.fetch_add(1, Ordering::Relaxed);
    }

    pub fn accesses(&self) -> u64 {
        self.accesses.load(Ordering::Relaxed)
    }

    pub fn evals(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }
}

/// Exact AUC risk of the linear scorer: twice the number of positive/negative
/// pairs ranked strictly wrongly (positive scored below negative; ties count
/// as correct), divided by n(n−1) — i.e. the fraction of all ordered pairs
/// that are discordant.
pub fn auc_risk(ds: &Dataset, theta: &[f64]) -> f64 {
    let s = ds.scores(theta);
    let n = ds.n();
    let mut discordant = 0u64;
    for i in 0..ds.n_plus {
        for j in ds.n_plus..n {
            if s[i] < s[j] {
                discordant += 1;
            }
        }
    }
    2.0 * discordant as f64 / (n as f64 * (n as f64 - 1.0))
}

/// Exact risk that also charges `n₊·n₋` to the access counter.
pub fn auc_risk_counted(ds: &Dataset, theta: &[f64], counter: &AccessCounter) -> f64 {
    counter.record(ds.n_plus as u64 * ds.n_minus as u64);
    auc_risk(ds, theta)
}

/// Unbiased minibatch estimate of the risk: draws `batch` positive/negative
/// pairs uniformly with replacement and rescales the discordance count by
/// `(2/(n(n−1)))·(n₊n₋/batch)`. Charges `batch` accesses.
pub fn auc_risk_minibatch(
    ds: &Dataset,
    theta: &[f64],
    batch: usize,
    noise: &NoiseSource,
    counter: &AccessCounter,
) -> f64 {
    counter.record(batch as u64);
    let mut rng = noise.rng();
    let mut discordant = 0u64;
    for _ in 0..batch {
        let i = (rng.next_u64() % ds.n_plus as u64) as usize;
        let j = ds.n_plus + (rng.next_u64() % ds.n_minus as u64) as usize;
        let si: Vec<f64> = ds.features.row(i).iter().zip(theta).map(|(x, t)| x * t).collect();
        let sj: Vec<f64> = ds.features.row(j).iter().zip(theta).map(|(x, t)| x * t).collect();
        if pairwise_sum(&si) < pairwise_sum(&sj) {
            discordant += 1;
        }
    }
    let n = ds.n() as f64;
    let scale = 2.0 / (n * (n - 1.0)) * (ds.n_plus as f64 * ds.n_minus as f64 / batch as f64);
    scale * discordant as f64
}

/// Nelder–Mead with the standard coefficients (reflection 1.0, expansion
/// 2.0, contraction 0.5, shrink 0.5). The initial simplex is `x0` plus unit
/// perturbations scaled by 0.5; iteration stops when the simplex diameter
/// falls below 1e-8 or after `max_iters` reflections.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    max_iters: usize,
) -> (Vec<f64>, f64, usize) {
    let d = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    simplex.push(x0.to_vec());
    for j in 0..d {
        let mut v = x0.to_vec();
        v[j] += 0.5;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let diameter = |s: &[Vec<f64>]| -> f64 {
        let mut dmax = 0.0f64;
        for a in 0..s.len() {
            for b in a + 1..s.len() {
                let dist: f64 = s[a]
                    .iter()
                    .zip(&s[b])
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                dmax = dmax.max(dist);
            }
        }
        dmax
    };

    let mut iters = 0;
    while iters < max_iters && diameter(&simplex) >= 1e-8 {
        iters += 1;
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let best = order[0];
        let worst = order[d];
        let second_worst = order[d - 1];

        // Centroid of all vertices but the worst.
        let mut centroid = vec![0.0; d];
        for (k, v) in simplex.iter().enumerate() {
            if k != worst {
                for j in 0..d {
                    centroid[j] += v[j] / d as f64;
                }
            }
        }
        let point_along = |t: f64| -> Vec<f64> {
            (0..d)
                .map(|j| centroid[j] + t * (centroid[j] - simplex[worst][j]))
                .collect()
        };

        let reflected = point_along(1.0);
        let fr = f(&reflected);
        if fr < values[best] {
            let expanded = point_along(2.0);
            let fe = f(&expanded);
            if fe < fr {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
        } else if fr < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = fr;
        } else {
            let contracted = if fr < values[worst] {
                point_along(0.5)
            } else {
                point_along(-0.5)
            };
            let fc = f(&contracted);
            if fc < values[worst].min(fr) {
                simplex[worst] = contracted;
                values[worst] = fc;
            } else {
                // Shrink toward the best vertex.
                let anchor = simplex[best].clone();
                for (k, v) in simplex.iter_mut().enumerate() {
                    if k != best {
                        for j in 0..d {
                            v[j] = anchor[j] + 0.5 * (v[j] - anchor[j]);
                        }
                        values[k] = f(v);
                    }
                }
            }
        }
    }

    let mut best_idx = 0;
    for k in 1..=d {
        if values[k] < values[best_idx] {
            best_idx = k;
        }
    }
    (simplex[best_idx].clone(), values[best_idx], iters)
}

/// Standard-normal random start, rejecting near-zero draws (‖x0‖ < 1e-6).
pub fn random_start(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix3(seed, 0x7374_6172, 0x7463));
    loop {
        let x: Vec<f64> = (0..dim)
            .map(|_| {
                let u = ((rng.next_u64() >> 11) as f64 * 2f64.powi(-53))
                    .clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
                inv_norm_cdf(u).expect("u clamped inside (0,1)")
            })
            .collect();
        if x.iter().map(|v| v * v).sum::<f64>().sqrt() >= 1e-6 {
            return x;
        }
    }
}

/// Scale-normalizes a scorer direction: θ/‖θ‖₂, with the sign fixed so the
/// first nonzero coordinate is positive. The risk is invariant under
/// positive rescaling, so runs are comparable only in this form.
pub fn normalize_direction(theta: &[f64]) -> Vec<f64> {
    let norm = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return theta.to_vec();
    }
    let mut out: Vec<f64> = theta.iter().map(|v| v / norm).collect();
    if let Some(first) = out.iter().find(|v| **v != 0.0) {
        if *first < 0.0 {
            for v in &mut out {
                *v = -*v;
            }
        }
    }
    out
}

/// Optimization methods compared by the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchMethod {
    /// Particle scheme on the exact risk.
    ParticleExact,
    /// Particle scheme on minibatch risk estimates.
    ParticleBatch,
    /// Nelder–Mead on the exact risk.
    NelderMead,
}

/// One benchmark run, reported in normalized form.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub dataset: String,
    pub method: BenchMethod,
    pub seed: u64,
    /// Exact risk of the normalized output direction.
    pub final_risk: f64,
    pub iterations: u64,
    pub data_accesses: u64,
    pub evaluations: u64,
    pub wall_ms: u64,
    pub direction: Vec<f64>,
}

/// Runs one method on one dataset. `iterations` is the particle iteration
/// budget (or the Nelder–Mead reflection budget) and `batch` the minibatch
/// size for [`BenchMethod::ParticleBatch`].
pub fn run_benchmark(
    ds: &Dataset,
    method: BenchMethod,
    seed: u64,
    iterations: usize,
    particles: usize,
    batch: usize,
) -> Result<RunRecord> {
    use crate::kernel::{KernelFamily, KernelSpec, NaturalParam};
    use crate::optimizer::{LambdaMode, OptimizerConfig, Schedule};
    use crate::qmc::QmcMode;

    let d = ds.dim();
    let counter = Arc::new(AccessCounter::new());
    let start = Instant::now();

    let record = |direction: Vec<f64>, iters: u64, counter: &AccessCounter| RunRecord {
        dataset: ds.name.clone(),
        method,
        seed,
        final_risk: auc_risk(ds, &direction),
        iterations: iters,
        data_accesses: counter.accesses(),
        evaluations: counter.evals(),
        wall_ms: start.elapsed().as_millis() as u64,
        direction,
    };

    match method {
        BenchMethod::NelderMead => {
            let c = Arc::clone(&counter);
            let ds_owned = ds.clone();
            let x0 = random_start(d, seed);
            let (x, _, iters) = nelder_mead(
                move |t| auc_risk_counted(&ds_owned, t, &c),
                &x0,
                iterations,
            );
            Ok(record(normalize_direction(&x), iters as u64, &counter))
        }
        BenchMethod::ParticleExact | BenchMethod::ParticleBatch => {
            let ds_owned = ds.clone();
            let c = Arc::clone(&counter);
            let obj = if method == BenchMethod::ParticleExact {
                let name = format!("auc_exact_{}", ds.name);
                ObjectiveHandle::deterministic(&name, d, move |t: &[f64]| {
                    auc_risk_counted(&ds_owned, t, &c)
                })
            } else {
                let name = format!("auc_batch_{}", ds.name);
                ObjectiveHandle::noisy(&name, d, move |t: &[f64], noise: &NoiseSource| {
                    auc_risk_minibatch(&ds_owned, t, batch, noise, &c)
                })
            };
            let config = OptimizerConfig {
                kernel: KernelSpec::new(KernelFamily::GaussianIso, d)?,
                schedule: Schedule::new(0.4, LambdaMode::Always, 1.0)?,
                particles,
                iterations: iterations as u64,
                seed,
                rqmc_mode: QmcMode::Sobol,
                target_logweight_var: 1.0,
                batch_size: Some(batch),
            };
            let init = NaturalParam(random_start(d, seed));
            let out = crate::optimizer::run(&config, &obj, init)?;
            Ok(record(
                normalize_direction(&out.output_point),
                out.trace.len() as u64,
                &counter,
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        // Four 1-D points; higher feature = positive class.
        let rows = vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]];
        let labels = vec![0, 1, 0, 1];
        Dataset::from_rows("toy4", &rows, &labels).unwrap()
    }

    #[test]
    fn risk_counts_strictly_discordant_ordered_pairs() {
        let ds = toy();
        // Scores = features (θ = 1 after standardization preserves order).
        // Positive/negative pairs: (2,1) ok, (2,3) discordant, (4,1) ok,
        // (4,3) ok → 1 discordant of 4 → risk = 2·1/(4·3) = 1/6.
        let r = auc_risk(&ds, &[1.0]);
        assert!((r - 1.0 / 6.0).abs() < 1e-15, "risk {r}");
        // Flipping the direction flips every comparison: 3 of 4 discordant.
        let r_neg = auc_risk(&ds, &[-1.0]);
        assert!((r_neg - 0.5).abs() < 1e-15, "risk {r_neg}");
    }

    #[test]
    fn ties_count_as_correct() {
        let ds = toy();
        let r = auc_risk(&ds, &[0.0]);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn risk_is_scale_invariant() {
        let ds = toy();
        for scale in [0.1, 1.0, 7.5, 1e6] {
            assert_eq!(auc_risk(&ds, &[scale]), auc_risk(&ds, &[1.0]));
        }
    }

    #[test]
    fn brute_force_definition_matches() {
        // Independent oracle: iterate over all ordered pairs (i, j) and count
        // discordance symmetrically — labels and scores strictly ordered in
        // opposite directions — then divide by n(n−1).
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|i| vec![(i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()])
            .collect();
        let labels: Vec<u8> = (0..12).map(|i| u8::from(i % 3 == 0)).collect();
        let ds = Dataset::from_rows("mixed", &rows, &labels).unwrap();
        let theta = [0.4, -1.1];
        let s = ds.scores(&theta);
        let n = ds.n();
        let mut count = 0u64;
        for i in 0..n {
            for j in 0..n {
                if (ds.labels[i] > ds.labels[j] && s[i] < s[j])
                    || (ds.labels[i] < ds.labels[j] && s[i] > s[j])
                {
                    count += 1;
                }
            }
        }
        let oracle = count as f64 / (n as f64 * (n as f64 - 1.0));
        assert!((auc_risk(&ds, &theta) - oracle).abs() < 1e-15);
    }

    #[test]
    fn minibatch_estimate_is_unbiased() {
        // 30-point fixture; average many batch estimates against the exact
        // risk within three standard errors.
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![(i as f64 * 0.31).sin() + 0.1 * i as f64, (i as f64 * 0.17).cos()])
            .collect();
        let labels: Vec<u8> = (0..30).map(|i| u8::from((i * 7) % 3 == 0)).collect();
        let ds = Dataset::from_rows("fix30", &rows, &labels).unwrap();
        let theta = [0.8, -0.5];
        let exact = auc_risk(&ds, &theta);
        let counter = AccessCounter::new();
        let reps = 4000usize;
        let batch = 16;
        let ests: Vec<f64> = (0..reps)
            .map(|k| {
                auc_risk_minibatch(&ds, &theta, batch, &NoiseSource::new(99, k as u64), &counter)
            })
            .collect();
        let mean = pairwise_mean(&ests);
        let var = ests.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (reps - 1) as f64;
        let se = (var / reps as f64).sqrt();
        assert!(
            (mean - exact).abs() <= 3.0 * se,
            "mean {mean}, exact {exact}, se {se}"
        );
        assert_eq!(counter.accesses(), (reps * batch) as u64);
    }

    #[test]
    fn standardization_reorders_and_normalizes() {
        let ds = toy();
        assert_eq!(ds.n_plus, 2);
        assert_eq!(ds.n_minus, 2);
        assert_eq!(&ds.labels, &[1, 1, 0, 0]);
        ds.check_standardization().unwrap();
    }

    #[test]
    fn single_class_is_fatal() {
        let rows = vec![vec![1.0], vec![2.0]];
        assert!(matches!(
            Dataset::from_rows("one", &rows, &[1, 1]),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn zero_variance_column_is_dropped() {
        let rows = vec![vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0], vec![4.0, 5.0]];
        let ds = Dataset::from_rows("const_col", &rows, &[0, 1, 0, 1]).unwrap();
        assert_eq!(ds.dim(), 1);
    }

    #[test]
    fn nelder_mead_minimizes_smooth_quadratic() {
        let (x, v, _) = nelder_mead(
            |t| (t[0] - 3.0).powi(2) + 2.0 * (t[1] + 1.0).powi(2),
            &[0.0, 0.0],
            10_000,
        );
        assert!(v < 1e-12);
        assert!((x[0] - 3.0).abs() < 1e-6 && (x[1] + 1.0).abs() < 1e-6);
    }

    #[test]
    fn normalization_fixes_scale_and_sign() {
        let d = normalize_direction(&[-3.0, 4.0]);
        assert!((d[0] - 0.6).abs() < 1e-15 && (d[1] + 0.8).abs() < 1e-15);
        let norm: f64 = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_start_is_reproducible_and_nonzero() {
        let a = random_start(5, 3);
        let b = random_start(5, 3);
        assert_eq!(a, b);
        assert!(a.iter().map(|v| v * v).sum::<f64>().sqrt() >= 1e-6);
    }

    #[test]
    fn particle_benchmark_solves_separable_toy() {
        // Linearly separable 1-D data: the particle scheme should reach
        // zero risk quickly.
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let labels: Vec<u8> = (0..10).map(|i| u8::from(i >= 5)).collect();
        let ds = Dataset::from_rows("sep10", &rows, &labels).unwrap();
        let rec = run_benchmark(&ds, BenchMethod::ParticleExact, 1, 200, 64, 16).unwrap();
        assert_eq!(rec.final_risk, 0.0, "direction {:?}", rec.direction);
        assert!(rec.data_accesses > 0 && rec.evaluations > 0);
    }
}
