//! Objective catalog: deterministic objectives `l(x)` and noisy objectives
//! `ℓ(x, U)` whose noise-average equals a deterministic counterpart.
//!
//! Noisy evaluators draw their randomness from a [`NoiseSource`] keyed by
//! `(seed, draw_index)` rather than from shared stream state, so a single
//! draw index can be replayed for every particle of a cloud (one shared U per
//! iteration) and runs stay reproducible.

use std::sync::Arc;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::qmc::mix3;
use crate::special::inv_norm_cdf;

/// Deterministic or noisy evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveKind {
    Deterministic,
    Noisy,
}

/// Reproducible, index-keyed randomness for noisy objectives.
#[derive(Debug, Clone, Copy)]
pub struct NoiseSource {
    pub seed: u64,
    pub draw_index: u64,
}

impl NoiseSource {
    pub fn new(seed: u64, draw_index: u64) -> Self {
        Self { seed, draw_index }
    }

    /// A fresh generator for this (seed, index) pair; the same pair always
    /// yields the same stream.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(mix3(self.seed, self.draw_index, 0x6e6f_6973))
    }

    /// One uniform draw in (0, 1).
    pub fn uniform(&self) -> f64 {
        let mut rng = self.rng();
        ((rng.next_u64() >> 11) as f64 * 2f64.powi(-53)).max(2f64.powi(-53))
    }

    /// One standard normal draw.
    pub fn standard_normal(&self) -> f64 {
        inv_norm_cdf(self.uniform()).expect("uniform draw is strictly inside (0,1)")
    }
}

type DetFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type NoisyFn = Arc<dyn Fn(&[f64], &NoiseSource) -> f64 + Send + Sync>;

/// A callable objective with its metadata.
#[derive(Clone)]
pub struct ObjectiveHandle {
    name: String,
    dim: usize,
    kind: ObjectiveKind,
    /// Known lower bound of the objective, when available.
    pub lower_bound_hint: Option<f64>,
    /// Set when the Gaussian-smoothed value of the objective is a known
    /// constant for every (θ, γ) — e.g. an objective that differs from that
    /// constant only on a Lebesgue-null set.
    pub smoothed_constant: Option<f64>,
    det: Option<DetFn>,
    noisy: Option<NoisyFn>,
}

impl std::fmt::Debug for ObjectiveHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ObjectiveHandle")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("kind", &self.kind)
            .finish()
    }
}

impl ObjectiveHandle {
    /// Wraps a deterministic evaluator.
    pub fn deterministic(
        name: impl Into<String>,
        dim: usize,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            kind: ObjectiveKind::Deterministic,
            lower_bound_hint: None,
            smoothed_constant: None,
            det: Some(Arc::new(f)),
            noisy: None,
        }
    }

    /// Wraps a noisy evaluator.
    pub fn noisy(
        name: impl Into<String>,
        dim: usize,
        f: impl Fn(&[f64], &NoiseSource) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            kind: ObjectiveKind::Noisy,
            lower_bound_hint: None,
            smoothed_constant: None,
            det: None,
            noisy: Some(Arc::new(f)),
        }
    }

    pub fn with_lower_bound(mut self, b: f64) -> Self {
        self.lower_bound_hint = Some(b);
        self
    }

    fn with_smoothed_constant(mut self, c: f64) -> Self {
        self.smoothed_constant = Some(c);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> ObjectiveKind {
        self.kind
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension(format!(
                "objective `{}` has dimension {}, point has length {}",
                self.name,
                self.dim,
                x.len()
            )));
        }
        Ok(())
    }

    /// Evaluates a deterministic objective.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        let f = self.det.as_ref().ok_or_else(|| {
            Error::Domain(format!("objective `{}` is noisy; use eval_noisy", self.name))
        })?;
        let v = f(x);
        // NaN and -inf are always errors; +inf is tolerated (lower
        // semicontinuous objectives may take the value +inf — the particle
        // just gets weight zero).
        if v.is_nan() || v == f64::NEG_INFINITY {
            return Err(Error::NonFinite(format!("objective `{}` returned {v}", self.name)));
        }
        Ok(v)
    }

    /// Evaluates a noisy objective at the indexed draw.
    pub fn eval_noisy(&self, x: &[f64], noise: &NoiseSource) -> Result<f64> {
        self.check_point(x)?;
        let f = self.noisy.as_ref().ok_or_else(|| {
            Error::Domain(format!("objective `{}` is deterministic; use eval", self.name))
        })?;
        let v = f(x, noise);
        if v.is_nan() || v == f64::NEG_INFINITY {
            return Err(Error::NonFinite(format!("objective `{}` returned {v}", self.name)));
        }
        Ok(v)
    }

    /// Evaluates with or without noise according to the handle's kind.
    pub fn eval_with(&self, x: &[f64], noise: Option<&NoiseSource>) -> Result<f64> {
        match (self.kind, noise) {
            (ObjectiveKind::Deterministic, _) => self.eval(x),
            (ObjectiveKind::Noisy, Some(ns)) => self.eval_noisy(x, ns),
            (ObjectiveKind::Noisy, None) => Err(Error::Domain(format!(
                "objective `{}` is noisy and requires a noise source",
                self.name
            ))),
        }
    }
}

/// Noise-averaged value of the `probability_unif` objective:
/// l(θ) = −P(θ + U < 0) for U ~ Unif[0, 1], i.e. −clamp(−θ, 0, 1).
pub fn probability_unif_mean(theta: f64) -> f64 {
    -(-theta).clamp(0.0, 1.0)
}

/// Looks up a catalog objective by name. Family entries (`epi_*`) use index 1;
/// see [`catalog_indexed`] to pick the family index n.
pub fn catalog(name: &str, dim: usize) -> Result<ObjectiveHandle> {
    catalog_indexed(name, dim, 1)
}

/// Looks up a catalog objective, with `index` selecting the member of the
/// indexed families `epi_pos` / `epi_neg` / `epi_alt` (fₙ(θ) = ±e^{−nθ²}).
pub fn catalog_indexed(name: &str, dim: usize, index: u64) -> Result<ObjectiveHandle> {
    if dim == 0 {
        return Err(Error::Dimension("objective dimension must be at least 1".into()));
    }
    let require_dim = |d: usize| -> Result<()> {
        if dim != d {
            Err(Error::Dimension(format!("objective `{name}` is {d}-dimensional, got dim {dim}")))
        } else {
            Ok(())
        }
    };
    let h = match name {
        "quadratic" => ObjectiveHandle::deterministic(name, dim, |x| {
            0.5 * x.iter().map(|v| v * v).sum::<f64>()
        })
        .with_lower_bound(0.0),
        "shifted_quadratic" => ObjectiveHandle::deterministic(name, dim, |x| {
            0.5 * x.iter().map(|v| (v - 1.0) * (v - 1.0)).sum::<f64>()
        })
        .with_lower_bound(0.0),
        "counterexample_diag" => {
            require_dim(2)?;
            // 'Invisible minimum': the objective dips below 1 only on the
            // diagonal x₁ = x₂, a Lebesgue-null set, so any absolutely
            // continuous smoothing sees the constant 1.
            ObjectiveHandle::deterministic(name, 2, |x| {
                if x[0] == x[1] {
                    x[0].abs().min(1.0)
                } else {
                    1.0
                }
            })
            .with_lower_bound(0.0)
            .with_smoothed_constant(1.0)
        }
        "staircase" => {
            require_dim(1)?;
            ObjectiveHandle::deterministic(name, 1, |x| x[0].ceil())
        }
        "step" => {
            require_dim(1)?;
            ObjectiveHandle::deterministic(name, 1, |x| if x[0] > 0.0 { 1.0 } else { 0.0 })
                .with_lower_bound(0.0)
        }
        "epi_pos" | "epi_neg" | "epi_alt" => {
            require_dim(1)?;
            let n = index.max(1) as f64;
            let sign = match name {
                "epi_pos" => 1.0,
                "epi_neg" => -1.0,
                _ => {
                    if index % 2 == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
            };
            ObjectiveHandle::deterministic(name, 1, move |x| sign * (-n * x[0] * x[0]).exp())
                .with_lower_bound(-1.0)
        }
        "probability_unif" => {
            require_dim(1)?;
            // ℓ(θ, U) = −1{θ + U < 0}, U ~ Unif[0,1]; mean −P(θ + U < 0).
            ObjectiveHandle::noisy(name, 1, |x, ns| {
                if x[0] + ns.uniform() < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            })
            .with_lower_bound(-1.0)
        }
        "noisy_quadratic" => ObjectiveHandle::noisy(name, dim, |x, ns| {
            0.5 * x.iter().map(|v| v * v).sum::<f64>() + ns.standard_normal()
        }),
        _ => return Err(Error::UnknownObjective(name.into())),
    };
    Ok(h)
}

/// Names accepted by [`catalog`].
pub const CATALOG_NAMES: &[&str] = &[
    "quadratic",
    "shifted_quadratic",
    "counterexample_diag",
    "staircase",
    "step",
    "epi_pos",
    "epi_neg",
    "epi_alt",
    "probability_unif",
    "noisy_quadratic",
];
