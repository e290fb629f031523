//! Output-gap dynamics as a damped harmonic oscillator.
//!
//! The law of motion is `Ÿ + γ·Ẏ + α·Y = ε(t)` for the output gap `Y`.
//! The crate classifies damping regimes, solves the unforced system in
//! closed form, integrates the forced system (a faithful explicit Euler
//! scheme and classical RK4), builds seeded shock sequences, estimates
//! `(γ, α, σ)` from sampled series, and evaluates the household/firm
//! optimality conditions of a small DSGE block as residuals.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! `f64` aliases below are what most callers want.

pub mod dsge;
pub mod estimation;
pub mod integrators;
pub mod oscillator;
pub mod scalar;
pub mod shocks;

pub use dsge::{
    budget_residual, euler_residual, marginal_utility, production, profit, steady_state_rate,
    utility, DsgeError,
};
pub use estimation::{
    discretize_exact, estimate_ar2, estimate_mle, loglik_at, EstimationError, Method,
};
pub use integrators::{
    integrate_paper_euler, integrate_rk4, integrate_rk4_held, recovery_metrics, IntegrationError,
    DEFAULT_BAND,
};
pub use oscillator::{
    classify, solve_analytic, ParamError, Regime, SolveError, DEFAULT_CRITICAL_TOL,
};
pub use scalar::Scalar;
pub use shocks::{realize, realize_with, NoiseScaling, ShockError};

pub type OscillatorParams = oscillator::OscillatorParams<f64>;
pub type PhysicalOscillator = oscillator::PhysicalOscillator<f64>;
pub type OscState = oscillator::OscState<f64>;
pub type TimeGrid = integrators::TimeGrid<f64>;
pub type Trajectory = integrators::Trajectory<f64>;
pub type RecoveryMetrics = integrators::RecoveryMetrics<f64>;
pub type ShockSpec = shocks::ShockSpec<f64>;
pub type ObservedSeries = estimation::ObservedSeries<f64>;
pub type EstimationResult = estimation::EstimationResult<f64>;
pub type DsgeBlockParams = dsge::DsgeBlockParams<f64>;
pub type DsgePoint = dsge::DsgePoint<f64>;
