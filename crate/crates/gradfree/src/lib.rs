//! Gradient-free optimization by iterated Bayes updates on an exponential
//! family, plus a numeric verification suite and an AUC ranking benchmark.
//!
//! The core loop never differentiates the objective. Each iteration draws a
//! cloud of particles from a parametric kernel `π_{θ,γ}` (isotropic Gaussian
//! or a product of Gammas), reweighs the particles by `exp(−λ l(x))`, and
//! projects the reweighed cloud back onto the family by moment matching.
//! For the Gaussian kernel this composite step is algebraically identical to
//! a gradient-descent step on the smoothed objective
//! `h_γ(θ) = −log E[exp(−l(X))], X ~ π_{θ,γ}` — the algorithm performs
//! time-inhomogeneous gradient descent on a sequence of mollified surrogates
//! while only ever evaluating `l`. Shrinking the dispersion along
//! `γₙ = 1/(1+n)^β` lets the surrogates epi-converge to the lower
//! semicontinuous envelope of `l`, so discontinuous and noisy objectives are
//! fair game.
//!
//! The crate has three layers:
//!
//! * the library ([`kernel`], [`qmc`], [`objectives`], [`smoothing`],
//!   [`optimizer`]) — the scheme itself, driven by scrambled Sobol points for
//!   variance reduction;
//! * the certification suite ([`verifier`]) — numeric falsification probes
//!   for the analytic properties the scheme relies on (descent lemma,
//!   gradient identity, schedule drift bounds, epi-convergence);
//! * the benchmark ([`auc`]) — AUC risk minimization for linear scorers,
//!   where the objective is piecewise constant and classical gradients carry
//!   no information.
//!
//! The `gradfree` binary (see [`cli`]) exposes all three as subcommands.
//!
//! # Example
//!
//! ```
//! use gradfree::kernel::{KernelFamily, KernelSpec, NaturalParam};
//! use gradfree::objectives::catalog;
//! use gradfree::optimizer::{run, LambdaMode, OptimizerConfig, Schedule};
//! use gradfree::qmc::QmcMode;
//!
//! let config = OptimizerConfig {
//!     kernel: KernelSpec::new(KernelFamily::GaussianIso, 2).unwrap(),
//!     schedule: Schedule::new(0.4, LambdaMode::Always, 1.0).unwrap(),
//!     particles: 128,
//!     iterations: 300,
//!     seed: 1,
//!     rqmc_mode: QmcMode::Sobol,
//!     target_logweight_var: 1.0,
//!     batch_size: None,
//! };
//! let objective = catalog("quadratic", 2).unwrap();
//! let out = run(&config, &objective, NaturalParam(vec![3.0, -2.0])).unwrap();
//! assert!(out.output_point.iter().all(|c| c.abs() < 0.5));
//! ```

pub mod auc;
pub mod cli;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod objectives;
pub mod optimizer;
pub mod qmc;
pub mod smoothing;
pub mod special;
pub mod verifier;

pub use error::{Error, Result};
