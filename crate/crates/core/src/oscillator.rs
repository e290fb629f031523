//! Output-gap oscillator: parameters, damping regimes and closed-form
//! homogeneous solutions of `Ÿ + γ·Ẏ + α·Y = 0`.
//!
//! The output gap `Y` is a dimensionless deviation from potential output;
//! time units are whatever the caller's sampling interval is expressed in.

use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

/// Default relative width of the band around `γ² = 4α` treated as critical.
pub const DEFAULT_CRITICAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("{name} violates {constraint}, got {value}")]
    OutOfRange {
        name: &'static str,
        constraint: &'static str,
        value: f64,
    },
}

impl ParamError {
    pub fn name(&self) -> &'static str {
        match self {
            ParamError::NonFinite { .. } => "NonFinite",
            ParamError::OutOfRange { .. } => "InvariantViolation",
        }
    }
}

pub(crate) fn check_finite<T: Scalar>(name: &'static str, v: T) -> Result<T, ParamError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ParamError::NonFinite {
            name,
            value: v.to_f64().unwrap_or(f64::NAN),
        })
    }
}

pub(crate) fn check_range<T: Scalar>(
    name: &'static str,
    constraint: &'static str,
    v: T,
    ok: bool,
) -> Result<T, ParamError> {
    check_finite(name, v)?;
    if ok {
        Ok(v)
    } else {
        Err(ParamError::OutOfRange {
            name,
            constraint,
            value: v.to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// Damping coefficient `γ ≥ 0` and squared natural adjustment frequency `α > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams<T> {
    gamma: T,
    alpha: T,
}

impl<T: Scalar> OscillatorParams<T> {
    pub fn new(gamma: T, alpha: T) -> Result<Self, ParamError> {
        check_range("gamma", "gamma >= 0", gamma, gamma >= T::zero())?;
        check_range("alpha", "alpha > 0", alpha, alpha > T::zero())?;
        Ok(Self { gamma, alpha })
    }

    /// Normalizes `m·ẍ + c·ẋ + k·x = F` by the mass: `γ = c/m`, `α = k/m`.
    pub fn from_physical(p: PhysicalOscillator<T>) -> Result<Self, ParamError> {
        let p = PhysicalOscillator::new(p.m, p.c, p.k)?;
        Self::new(p.c / p.m, p.k / p.m)
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// `γ² − 4α`.
    pub fn discriminant(&self) -> T {
        self.gamma * self.gamma - T::lit(4.0) * self.alpha
    }

    /// Regime with the default critical tolerance.
    pub fn regime(&self) -> Regime {
        classify(self, T::lit(DEFAULT_CRITICAL_TOL))
    }

    /// Parameters of the same system after rescaling time by `1/factor`
    /// (`γ → factor·γ`, `α → factor²·α`).
    pub fn time_rescaled(&self, factor: T) -> Result<Self, ParamError> {
        Self::new(factor * self.gamma, factor * factor * self.alpha)
    }
}

/// Physical form `m·ẍ + c·ẋ + k·x = F(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalOscillator<T> {
    pub m: T,
    pub c: T,
    pub k: T,
}

impl<T: Scalar> PhysicalOscillator<T> {
    pub fn new(m: T, c: T, k: T) -> Result<Self, ParamError> {
        check_range("m", "m > 0", m, m > T::zero())?;
        check_range("c", "c >= 0", c, c >= T::zero())?;
        check_range("k", "k > 0", k, k > T::zero())?;
        Ok(Self { m, c, k })
    }

    /// `c² − 4mk`.
    pub fn discriminant(&self) -> T {
        self.c * self.c - T::lit(4.0) * self.m * self.k
    }
}

/// Instantaneous output gap and its time derivative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OscState<T> {
    pub y: T,
    pub ydot: T,
}

impl<T: Scalar> OscState<T> {
    pub fn new(y: T, ydot: T) -> Self {
        Self { y, ydot }
    }

    pub fn rest() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn is_finite(&self) -> bool {
        self.y.is_finite() && self.ydot.is_finite()
    }

    pub fn validate(self) -> Result<Self, ParamError> {
        check_finite("y", self.y)?;
        check_finite("ydot", self.ydot)?;
        Ok(self)
    }

    /// `½Ẏ² + ½αY²`.
    pub fn energy(&self, alpha: T) -> T {
        T::half() * (self.ydot * self.ydot + alpha * self.y * self.y)
    }
}

impl<T: Scalar> std::ops::Add for OscState<T> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self::new(self.y + rhs.y, self.ydot + rhs.ydot)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    UnderDamped,
    CriticallyDamped,
    OverDamped,
}

impl Regime {
    /// Machine-facing name, e.g. `over-damped`.
    pub fn name(&self) -> &'static str {
        match self {
            Regime::UnderDamped => "under-damped",
            Regime::CriticallyDamped => "critically-damped",
            Regime::OverDamped => "over-damped",
        }
    }

    /// Human-facing label used in figure legends.
    pub fn label(&self) -> &'static str {
        match self {
            Regime::UnderDamped => "Under-damped",
            Regime::CriticallyDamped => "Critically-damped",
            Regime::OverDamped => "Over-damped",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Classifies by the sign of `d = γ² − 4α`; `|d| ≤ rel_tol·max(γ², 4α)` counts as critical.
pub fn classify<T: Scalar>(params: &OscillatorParams<T>, rel_tol: T) -> Regime {
    let g2 = params.gamma * params.gamma;
    let four_a = T::lit(4.0) * params.alpha;
    let d = g2 - four_a;
    if d.abs() <= rel_tol * g2.max(four_a) {
        Regime::CriticallyDamped
    } else if d < T::zero() {
        Regime::UnderDamped
    } else {
        Regime::OverDamped
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("time must be finite and non-negative, got {0}")]
    BadTime(f64),
    #[error(transparent)]
    Param(#[from] ParamError),
}

impl SolveError {
    pub fn name(&self) -> &'static str {
        match self {
            SolveError::BadTime(_) => "InvariantViolation",
            SolveError::Param(e) => e.name(),
        }
    }
}

/// Exact state at time `t` of the unforced system started from `init` at `t = 0`.
pub fn solve_analytic<T: Scalar>(
    params: &OscillatorParams<T>,
    init: OscState<T>,
    t: T,
) -> Result<OscState<T>, SolveError> {
    if !(t.is_finite() && t >= T::zero()) {
        return Err(SolveError::BadTime(t.to_f64().unwrap_or(f64::NAN)));
    }
    let init = init.validate()?;
    if t == T::zero() {
        return Ok(init);
    }
    let (g, a) = (params.gamma, params.alpha);
    let (y0, v0) = (init.y, init.ydot);
    let half_g = g * T::half();

    let state = match params.regime() {
        Regime::UnderDamped => {
            let wd = (a - half_g * half_g).sqrt();
            let b = (v0 + half_g * y0) / wd;
            let decay = (-half_g * t).exp();
            let (s, c) = (wd * t).sin_cos();
            let y = decay * (y0 * c + b * s);
            // d/dt of e^(−γt/2)(A cos + B sin)
            let ydot = decay * ((b * wd - half_g * y0) * c - (y0 * wd + half_g * b) * s);
            OscState::new(y, ydot)
        }
        Regime::CriticallyDamped => {
            let b = v0 + half_g * y0;
            let decay = (-half_g * t).exp();
            let y = (y0 + b * t) * decay;
            let ydot = (b - half_g * (y0 + b * t)) * decay;
            OscState::new(y, ydot)
        }
        Regime::OverDamped => {
            let root = params.discriminant().sqrt();
            let r_plus = (-g + root) * T::half();
            let r_minus = (-g - root) * T::half();
            // A + B = Y₀, A·r₊ + B·r₋ = Ẏ₀
            let coef_a = (v0 - r_minus * y0) / root;
            let coef_b = y0 - coef_a;
            let (ep, em) = ((r_plus * t).exp(), (r_minus * t).exp());
            OscState::new(
                coef_a * ep + coef_b * em,
                coef_a * r_plus * ep + coef_b * r_minus * em,
            )
        }
    };
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, FRAC_PI_2};

    fn p(g: f64, a: f64) -> OscillatorParams<f64> {
        OscillatorParams::new(g, a).unwrap()
    }

    #[test]
    fn from_physical_normalizes_by_mass() {
        let cases = [
            ((1.0, 0.5, 1.0), (0.5, 1.0)),
            ((2.0, 4.0, 2.0), (2.0, 1.0)),
            ((2.0, 8.0, 2.0), (4.0, 1.0)),
        ];
        for ((m, c, k), (g, a)) in cases {
            let phys = PhysicalOscillator::new(m, c, k).unwrap();
            let params = OscillatorParams::from_physical(phys).unwrap();
            assert_eq!(params.gamma(), g);
            assert_eq!(params.alpha(), a);
        }
    }

    #[test]
    fn from_physical_rejects_bad_inputs() {
        assert!(PhysicalOscillator::new(0.0, 1.0, 1.0).is_err());
        assert!(PhysicalOscillator::new(1.0, -1.0, 1.0).is_err());
        assert!(PhysicalOscillator::new(1.0, 1.0, f64::NAN).is_err());
        let raw = PhysicalOscillator {
            m: 1.0,
            c: 1.0,
            k: f64::INFINITY,
        };
        assert!(OscillatorParams::from_physical(raw).is_err());
    }

    #[test]
    fn params_reject_invalid() {
        assert!(OscillatorParams::new(-0.1, 1.0).is_err());
        assert!(OscillatorParams::new(0.5, 0.0).is_err());
        assert!(OscillatorParams::new(0.5, -1.0).is_err());
        assert!(OscillatorParams::new(f64::NAN, 1.0).is_err());
        let err = OscillatorParams::new(0.5, f64::INFINITY).unwrap_err();
        assert_eq!(err.name(), "NonFinite");
    }

    #[test]
    fn classify_paper_cases() {
        assert_eq!(p(0.5, 1.0).regime(), Regime::UnderDamped);
        assert_eq!(p(2.0, 1.0).regime(), Regime::CriticallyDamped);
        assert_eq!(p(4.0, 1.0).regime(), Regime::OverDamped);
        assert_eq!(p(0.0, 1.0).regime(), Regime::UnderDamped);
    }

    #[test]
    fn classify_tolerance_band() {
        let near = p(2.0 * (1.0 + 1e-12), 1.0);
        assert_eq!(near.regime(), Regime::CriticallyDamped);
        assert_eq!(classify(&near, 0.0), Regime::OverDamped);
        let outside = p(2.0 * (1.0 + 1e-6), 1.0);
        assert_eq!(outside.regime(), Regime::OverDamped);
    }

    #[test]
    fn analytic_examples() {
        let one = OscState::new(1.0, 0.0);
        let s = solve_analytic(&p(2.0, 1.0), one, 1.0).unwrap();
        assert!((s.y - 2.0 / E).abs() < 1e-15);

        let s = solve_analytic(&p(0.0, 1.0), one, FRAC_PI_2).unwrap();
        assert!(s.y.abs() < 1e-15);
        assert!((s.ydot + 1.0).abs() < 1e-15);

        // A = (2+√3)/(2√3), r₊ = −2+√3, r₋ = −2−√3
        let s = solve_analytic(&p(4.0, 1.0), one, 20.0).unwrap();
        assert!((s.y - 0.005069671397521481).abs() < 1e-12, "{}", s.y);

        for params in [p(0.5, 1.0), p(2.0, 1.0), p(4.0, 1.0)] {
            let s = solve_analytic(&params, OscState::rest(), 3.7).unwrap();
            assert_eq!(s, OscState::rest());
        }
    }

    #[test]
    fn analytic_at_zero_is_identity() {
        let init = OscState::new(0.3, -1.7);
        for params in [p(0.5, 1.0), p(2.0, 1.0), p(4.0, 1.0)] {
            assert_eq!(solve_analytic(&params, init, 0.0).unwrap(), init);
        }
    }

    #[test]
    fn analytic_rejects_bad_time() {
        let init = OscState::new(1.0, 0.0);
        assert!(matches!(
            solve_analytic(&p(1.0, 1.0), init, -1.0),
            Err(SolveError::BadTime(_))
        ));
        assert!(solve_analytic(&p(1.0, 1.0), init, f64::NAN).is_err());
        assert!(solve_analytic(&p(1.0, 1.0), OscState::new(f64::NAN, 0.0), 1.0).is_err());
    }

    #[test]
    fn analytic_velocity_matches_finite_difference() {
        let init = OscState::new(0.8, 0.4);
        let h = 1e-6;
        for params in [p(0.5, 1.0), p(2.0, 1.0), p(4.0, 1.0), p(0.0, 2.0)] {
            for &t in &[0.5, 2.0, 7.5] {
                let fwd = solve_analytic(&params, init, t + h).unwrap().y;
                let back = solve_analytic(&params, init, t - h).unwrap().y;
                let v = solve_analytic(&params, init, t).unwrap().ydot;
                assert!(((fwd - back) / (2.0 * h) - v).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn ode_residual_small_for_paper_cases() {
        let init = OscState::new(1.0, 0.0);
        let h = 1e-4;
        for params in [p(0.5, 1.0), p(2.0, 1.0), p(4.0, 1.0)] {
            for i in 1..200 {
                let t = i as f64 * 0.1;
                let yp = solve_analytic(&params, init, t + h).unwrap().y;
                let ym = solve_analytic(&params, init, t - h).unwrap().y;
                let s = solve_analytic(&params, init, t).unwrap();
                let acc = (yp - 2.0 * s.y + ym) / (h * h);
                let rhs = -params.gamma() * s.ydot - params.alpha() * s.y;
                assert!((acc - rhs).abs() < 1e-5, "t={t} residual={}", acc - rhs);
            }
        }
    }

    #[test]
    fn works_in_single_precision() {
        let params = OscillatorParams::<f32>::new(2.0, 1.0).unwrap();
        let s = solve_analytic(&params, OscState::new(1.0f32, 0.0), 1.0).unwrap();
        assert!((s.y - 2.0 / std::f32::consts::E).abs() < 1e-6);
        assert_eq!(params.regime(), Regime::CriticallyDamped);
    }
}
