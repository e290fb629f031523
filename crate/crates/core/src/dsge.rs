//! Household and firm optimality conditions evaluated as residuals.
//!
//! Utility is CRRA in consumption plus `ln(1 + leisure)`; production is
//! Cobb–Douglas `A·K^θ·N^(1−θ)`. The expectation in the consumption Euler
//! equation is dropped: residuals are evaluated on a deterministic path.

use thiserror::Error;

use crate::oscillator::{check_range, ParamError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DsgeError {
    #[error(transparent)]
    Param(#[from] ParamError),
}

impl DsgeError {
    pub fn name(&self) -> &'static str {
        match self {
            DsgeError::Param(e) => e.name(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DsgeBlockParams<T> {
    beta: T,
    sigma_c: T,
    theta: T,
    a_tfp: T,
}

impl<T: Scalar> DsgeBlockParams<T> {
    pub fn new(beta: T, sigma_c: T, theta: T, a_tfp: T) -> Result<Self, DsgeError> {
        check_range(
            "beta",
            "0 < beta <= 1",
            beta,
            beta > T::zero() && beta <= T::one(),
        )?;
        check_range("sigma_c", "sigma_c > 0", sigma_c, sigma_c > T::zero())?;
        check_range(
            "theta",
            "0 < theta < 1",
            theta,
            theta > T::zero() && theta < T::one(),
        )?;
        check_range("a_tfp", "a_tfp > 0", a_tfp, a_tfp > T::zero())?;
        Ok(Self {
            beta,
            sigma_c,
            theta,
            a_tfp,
        })
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn sigma_c(&self) -> T {
        self.sigma_c
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn a_tfp(&self) -> T {
        self.a_tfp
    }
}

/// One period's household and firm quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DsgePoint<T> {
    pub c: T,
    pub l: T,
    pub b: T,
    pub b_next: T,
    pub r: T,
    pub w: T,
    pub n: T,
    pub k: T,
    pub y: T,
    pub p: T,
    pub r_k: T,
}

impl<T: Scalar> DsgePoint<T> {
    pub fn validate(self) -> Result<Self, DsgeError> {
        let z = T::zero();
        check_range("c", "c > 0", self.c, self.c > z)?;
        check_range("l", "l >= 0", self.l, self.l >= z)?;
        check_range("b", "finite", self.b, true)?;
        check_range("b_next", "finite", self.b_next, true)?;
        check_range("r", "r > -1", self.r, self.r > -T::one())?;
        check_range("w", "w >= 0", self.w, self.w >= z)?;
        check_range("n", "n >= 0", self.n, self.n >= z)?;
        check_range("k", "k >= 0", self.k, self.k >= z)?;
        check_range("y", "y >= 0", self.y, self.y >= z)?;
        check_range("p", "p > 0", self.p, self.p > z)?;
        check_range("r_k", "r_k >= 0", self.r_k, self.r_k >= z)?;
        Ok(self)
    }
}

impl<T: Scalar> Default for DsgePoint<T> {
    /// Unit labor income fully consumed, unit output sold at unit price, no bonds or capital.
    fn default() -> Self {
        let (z, o) = (T::zero(), T::one());
        Self {
            c: o,
            l: z,
            b: z,
            b_next: z,
            r: z,
            w: o,
            n: o,
            k: z,
            y: o,
            p: o,
            r_k: z,
        }
    }
}

/// `c^(1−σ)/(1−σ) + ln(1 + l)`, with `ln c` at `σ = 1`.
pub fn utility<T: Scalar>(c: T, l: T, params: &DsgeBlockParams<T>) -> Result<T, DsgeError> {
    check_range("c", "c > 0", c, c > T::zero())?;
    check_range("l", "l >= 0", l, l >= T::zero())?;
    let s = params.sigma_c;
    let consumption = if s == T::one() {
        c.ln()
    } else {
        let e = T::one() - s;
        c.powf(e) / e
    };
    Ok(consumption + l.ln_1p())
}

/// `u'(c) = c^(−σ)`.
pub fn marginal_utility<T: Scalar>(c: T, params: &DsgeBlockParams<T>) -> T {
    c.powf(-params.sigma_c)
}

/// `c_now^(−σ) − β(1 + r_next)·c_next^(−σ)`; zero when the Euler equation holds.
pub fn euler_residual<T: Scalar>(
    c_now: T,
    c_next: T,
    r_next: T,
    params: &DsgeBlockParams<T>,
) -> Result<T, DsgeError> {
    check_range("c_now", "c_now > 0", c_now, c_now > T::zero())?;
    check_range("c_next", "c_next > 0", c_next, c_next > T::zero())?;
    check_range("r_next", "r_next > -1", r_next, r_next > -T::one())?;
    Ok(marginal_utility(c_now, params)
        - params.beta * (T::one() + r_next) * marginal_utility(c_next, params))
}

/// `c + b_next − (1 + r)·b − w·n`.
pub fn budget_residual<T: Scalar>(pt: &DsgePoint<T>) -> T {
    pt.c + pt.b_next - (T::one() + pt.r) * pt.b - pt.w * pt.n
}

/// `A·k^θ·n^(1−θ)`; zero inputs give zero output.
pub fn production<T: Scalar>(k: T, n: T, params: &DsgeBlockParams<T>) -> Result<T, DsgeError> {
    check_range("k", "k >= 0", k, k >= T::zero())?;
    check_range("n", "n >= 0", n, n >= T::zero())?;
    if k == T::zero() || n == T::zero() {
        return Ok(T::zero());
    }
    Ok(params.a_tfp * k.powf(params.theta) * n.powf(T::one() - params.theta))
}

/// `p·y − w·n − r_k·k`.
pub fn profit<T: Scalar>(pt: &DsgePoint<T>) -> T {
    pt.p * pt.y - pt.w * pt.n - pt.r_k * pt.k
}

/// `r* = 1/β − 1`, the rate at which constant consumption satisfies the Euler equation.
pub fn steady_state_rate<T: Scalar>(params: &DsgeBlockParams<T>) -> T {
    T::one() / params.beta - T::one()
}
