//! The optimization loops: sample → weigh → moment-match → shrink.
//!
//! Each iteration draws a fresh particle cloud from the current kernel
//! `π_{θₙ,γₙ}`, reweighs it by `exp(−λ l(x))` (a generalized Bayes update),
//! projects the tilted cloud back onto the family by moment matching, and
//! shrinks the dispersion along the schedule `γₙ = 1/(1+n)^β`. For the
//! Gaussian kernel the composite step is algebraically identical to
//! `θ_{n+1} = θₙ − γₙ ∇ĥₙ(θₙ)`: a time-inhomogeneous gradient descent on the
//! smoothed objective, executed without ever differentiating `l`.
//!
//! The deterministic loop evaluates `l` exactly; the stochastic loop
//! evaluates a noisy `ℓ(x, U)` with one shared draw `U` per iteration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{
    grad_log_partition, moment_match_update, sample_from_uniforms, KernelSpec, KernelState,
    NaturalParam,
};
use crate::linalg::{norm2, pairwise_mean};
use crate::objectives::{NoiseSource, ObjectiveHandle, ObjectiveKind};
use crate::qmc::{generate, QmcMode};
use crate::smoothing::{estimate_h, evaluate_cloud, weigh_values, ParticleCloud};

/// λ adaptation policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaMode {
    /// Keep λ at its initial value.
    Fixed,
    /// Re-adapt λ during the first k iterations only.
    FirstK(usize),
    /// Re-adapt λ at every iteration.
    Always,
}

/// Step-size / temperature schedule: `γₙ = 1/(1+n)^β`.
#[derive(Debug, Clone, Copy)]
pub struct Schedule {
    pub beta: f64,
    pub lambda_mode: LambdaMode,
    pub lambda_init: f64,
}

impl Schedule {
    pub fn new(beta: f64, lambda_mode: LambdaMode, lambda_init: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::Config(format!("beta must lie in (0,1), got {beta}")));
        }
        if !(lambda_init > 0.0 && lambda_init.is_finite()) {
            return Err(Error::Config(format!("lambda_init must be positive, got {lambda_init}")));
        }
        Ok(Self { beta, lambda_mode, lambda_init })
    }

    /// Shrink parameter at iteration n (0-based): strictly decreasing to 0.
    pub fn gamma_at(&self, n: u64) -> f64 {
        (1.0 + n as f64).powf(-self.beta)
    }

    fn adapt_now(&self, n: u64) -> bool {
        match self.lambda_mode {
            LambdaMode::Fixed => false,
            LambdaMode::FirstK(k) => n < k as u64,
            LambdaMode::Always => true,
        }
    }
}

/// Complete configuration of an optimization run.
#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    pub kernel: KernelSpec,
    pub schedule: Schedule,
    pub particles: usize,
    pub iterations: u64,
    pub seed: u64,
    pub rqmc_mode: QmcMode,
    /// Target variance of the log-weights for λ adaptation (default 1.0).
    pub target_logweight_var: f64,
    /// Mini-batch size hint for noisy mini-batch objectives (plumbed through
    /// to objective constructors; unused by the loop itself).
    pub batch_size: Option<usize>,
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.particles < 2 {
            return Err(Error::Config(format!(
                "at least 2 particles required, got {}",
                self.particles
            )));
        }
        if self.iterations < 1 {
            return Err(Error::Config("at least 1 iteration required".into()));
        }
        if !(self.target_logweight_var > 0.0) {
            return Err(Error::Config(format!(
                "target log-weight variance must be positive, got {}",
                self.target_logweight_var
            )));
        }
        Ok(())
    }
}

/// Per-iteration diagnostics. Serializes to the stable JSONL trace schema.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TraceRecord {
    /// Iteration index (0-based).
    pub n: u64,
    /// Natural parameter after this iteration's update.
    pub theta: Vec<f64>,
    /// Shrink parameter the cloud was drawn with.
    pub gamma: f64,
    /// Temperature the weights were computed with.
    pub lambda: f64,
    /// Estimate of the (λ-tempered) smoothed objective at θₙ.
    pub h: f64,
    /// Smallest objective value observed so far (non-increasing in n).
    pub best_value: f64,
    /// Particle achieving `best_value`.
    pub best_point: Vec<f64>,
    /// Smallest raw objective value in this iteration's cloud.
    pub min_l: f64,
    /// Largest raw objective value in this iteration's cloud.
    pub max_l: f64,
}

/// Running best-particle tracker shared across steps of a run.
#[derive(Debug, Clone)]
pub struct Progress {
    pub best_value: f64,
    pub best_point: Vec<f64>,
}

impl Progress {
    pub fn new() -> Self {
        Self { best_value: f64::INFINITY, best_point: Vec::new() }
    }
}

impl Default for Progress {
    fn default() -> Self {
        Self::new()
    }
}

/// Outcome of λ adaptation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdaptOutcome {
    Adapted,
    /// The objective was constant over the cloud; λ left unchanged.
    Degenerate,
}

/// Chooses λ so that `Var(−λ l(Xᵢ)) = target_var`, i.e.
/// `λ = sqrt(target_var / Var(l))` with the population (denominator-N)
/// variance. A zero-variance cloud leaves λ unchanged and reports
/// [`AdaptOutcome::Degenerate`].
pub fn adapt_lambda(l_values: &[f64], target_var: f64, prev: f64) -> (f64, AdaptOutcome) {
    let finite: Vec<f64> = l_values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.len() < 2 {
        return (prev, AdaptOutcome::Degenerate);
    }
    let mean = pairwise_mean(&finite);
    let var = pairwise_mean(&finite.iter().map(|v| (v - mean).powi(2)).collect::<Vec<_>>());
    if var <= 0.0 || !var.is_finite() {
        return (prev, AdaptOutcome::Degenerate);
    }
    ((target_var / var).sqrt(), AdaptOutcome::Adapted)
}

/// One iteration of the deterministic loop (exact objective evaluations).
pub fn step_deterministic(
    state: &KernelState,
    obj: &ObjectiveHandle,
    config: &OptimizerConfig,
    n: u64,
    progress: &mut Progress,
) -> Result<(KernelState, ParticleCloud, TraceRecord)> {
    if obj.kind() != ObjectiveKind::Deterministic {
        return Err(Error::Config(format!("objective `{}` is not deterministic", obj.name())));
    }
    step_inner(state, obj, config, n, None, progress)
}

/// One iteration of the stochastic loop: identical to the deterministic step
/// except that all particles share the single noise draw `noise`.
pub fn step_stochastic(
    state: &KernelState,
    obj: &ObjectiveHandle,
    config: &OptimizerConfig,
    n: u64,
    noise: NoiseSource,
    progress: &mut Progress,
) -> Result<(KernelState, ParticleCloud, TraceRecord)> {
    if obj.kind() != ObjectiveKind::Noisy {
        return Err(Error::Config(format!("objective `{}` is not noisy", obj.name())));
    }
    step_inner(state, obj, config, n, Some(noise), progress)
}

fn step_inner(
    state: &KernelState,
    obj: &ObjectiveHandle,
    config: &OptimizerConfig,
    n: u64,
    noise: Option<NoiseSource>,
    progress: &mut Progress,
) -> Result<(KernelState, ParticleCloud, TraceRecord)> {
    config.validate()?;
    let spec = config.kernel;
    let batch = generate(config.rqmc_mode, config.particles, spec.dim, config.seed, n)?;
    let points = sample_from_uniforms(&spec, state, &batch)?;
    let l_values = evaluate_cloud(&points, obj, noise.as_ref())?;

    // λ is adapted BEFORE weighing, from this cloud's raw objective values.
    let lambda = if config.schedule.adapt_now(n) {
        adapt_lambda(&l_values, config.target_logweight_var, state.lambda_scale).0
    } else {
        state.lambda_scale
    };

    let weigh_state = KernelState::new(state.theta.clone(), state.gamma, lambda)?;
    let cloud = weigh_values(points, l_values, &spec, &weigh_state)?;
    let h = estimate_h(&cloud)?;

    let mut min_l = f64::INFINITY;
    let mut max_l = f64::NEG_INFINITY;
    for (i, &l) in cloud.l_values.iter().enumerate() {
        if l < min_l {
            min_l = l;
        }
        if l > max_l {
            max_l = l;
        }
        if l < progress.best_value {
            progress.best_value = l;
            progress.best_point = cloud.points.row(i).to_vec();
        }
    }

    let theta_next = moment_match_update(&spec, &weigh_state, &cloud)?;
    let theta_norm = norm2(&theta_next.0);
    if !(theta_norm <= 1e8) {
        return Err(Error::Diverged(theta_norm));
    }

    let record = TraceRecord {
        n,
        theta: theta_next.0.clone(),
        gamma: state.gamma,
        lambda,
        h,
        best_value: progress.best_value,
        best_point: progress.best_point.clone(),
        min_l,
        max_l,
    };
    let next = KernelState::new(theta_next, config.schedule.gamma_at(n + 1), lambda)?;
    Ok((next, cloud, record))
}

/// Result of a full run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub final_state: KernelState,
    pub trace: Vec<TraceRecord>,
    /// Deterministic objectives: the particle with the smallest observed
    /// value of `l` over ALL iterations (running argmin). Noisy objectives:
    /// the mean parameter of the final state.
    pub output_point: Vec<f64>,
    /// Set when the run stopped early (repeated all-infinite weights or a
    /// diverged state); the trace up to the abort is kept.
    pub abort: Option<String>,
}

/// Runs the full loop from `theta0`.
pub fn run(config: &OptimizerConfig, obj: &ObjectiveHandle, theta0: NaturalParam) -> Result<RunOutput> {
    config.validate()?;
    if obj.dim() != config.kernel.dim {
        return Err(Error::Dimension(format!(
            "objective `{}` has dimension {}, kernel has {}",
            obj.name(),
            obj.dim(),
            config.kernel.dim
        )));
    }
    let noisy = obj.kind() == ObjectiveKind::Noisy;
    let mut state = KernelState::new(
        theta0,
        config.schedule.gamma_at(0),
        config.schedule.lambda_init,
    )?;
    let mut progress = Progress::new();
    let mut trace = Vec::with_capacity(config.iterations as usize);
    let mut all_infinite = 0u32;
    let mut abort = None;

    for n in 0..config.iterations {
        let step = if noisy {
            let noise = NoiseSource::new(config.seed, n);
            step_inner(&state, obj, config, n, Some(noise), &mut progress)
        } else {
            step_inner(&state, obj, config, n, None, &mut progress)
        };
        match step {
            Ok((next, _cloud, record)) => {
                trace.push(record);
                state = next;
            }
            Err(Error::AllInfinite) => {
                all_infinite += 1;
                if all_infinite > 3 {
                    abort = Some(format!(
                        "aborted at iteration {n}: all-infinite weights in {all_infinite} iterations"
                    ));
                    break;
                }
                // Keep θ, keep λ, advance the schedule.
                state = KernelState::new(
                    state.theta.clone(),
                    config.schedule.gamma_at(n + 1),
                    state.lambda_scale,
                )?;
            }
            Err(Error::Diverged(norm)) => {
                abort = Some(format!("aborted at iteration {n}: diverged (|theta| = {norm:.3e})"));
                break;
            }
            Err(e) => return Err(e),
        }
    }

    let output_point = if noisy {
        grad_log_partition(&config.kernel, &state.theta)?.0
    } else if progress.best_point.is_empty() {
        state.theta.0.clone()
    } else {
        progress.best_point.clone()
    };
    Ok(RunOutput { final_state: state, trace, output_point, abort })
}
