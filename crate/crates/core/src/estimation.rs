//! Recovering `(γ, α, σ)` from a sampled output-gap series.
//!
//! Both estimators work through the exact AR(2) representation of the
//! sampled homogeneous oscillator: if `λ₁, λ₂ = e^{r·dt}` for the continuous
//! roots of `r² + γr + α = 0`, then `Y[i] = φ₁Y[i−1] + φ₂Y[i−2]` with
//! `φ₁ = λ₁ + λ₂` and `φ₂ = −λ₁λ₂ = −e^{−γ·dt}`.
//!
//! Innovations are `N(0, σ²·dt)`, matching the diffusion scaling used when
//! simulating white-noise shocks.

use thiserror::Error;

use crate::oscillator::{solve_analytic, OscState, OscillatorParams, ParamError};
use crate::scalar::Scalar;
use crate::shocks::GaussianStream;

/// Residual root-mean-square below this fraction of the series' RMS is
/// treated as an exact fit when evaluating the likelihood.
pub const RESIDUAL_RESOLUTION: f64 = 1e-10;

/// Regressors whose orthogonal component is below this fraction of the
/// leading column norm are considered collinear.
const RANK_TOL: f64 = 1e-10;

pub const MLE_MAX_ITER: usize = 500;
pub const MLE_XTOL: f64 = 1e-8;
const GRID_POINTS: usize = 30;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimationError {
    #[error("series needs at least 3 observations, got {0}")]
    TooShort(usize),
    #[error("sampling interval must be positive and finite")]
    BadInterval,
    #[error("observation {0} is not finite")]
    NonFiniteValue(usize),
    #[error("regressors are rank-deficient")]
    Degenerate,
    #[error("fitted dynamics admit no damped continuous-time oscillator: {0}")]
    NonStationary(String),
    #[error(transparent)]
    Param(#[from] ParamError),
}

impl EstimationError {
    pub fn name(&self) -> &'static str {
        match self {
            EstimationError::TooShort(_) => "TooShort",
            EstimationError::BadInterval => "InvariantViolation",
            EstimationError::NonFiniteValue(_) => "NonFinite",
            EstimationError::Degenerate => "Degenerate",
            EstimationError::NonStationary(_) => "NonStationary",
            EstimationError::Param(e) => e.name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservedSeries<T> {
    dt: T,
    values: Vec<T>,
}

impl<T: Scalar> ObservedSeries<T> {
    pub fn new(dt: T, values: Vec<T>) -> Result<Self, EstimationError> {
        if !(dt.is_finite() && dt > T::zero()) {
            return Err(EstimationError::BadInterval);
        }
        if values.len() < 3 {
            return Err(EstimationError::TooShort(values.len()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(EstimationError::NonFiniteValue(i));
        }
        Ok(Self { dt, values })
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            dt: self.dt,
            values: self.values.iter().map(|&v| v * factor).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Ar2Ols,
    Mle,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Ar2Ols => "ar2",
            Method::Mle => "mle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationResult<T> {
    pub gamma_hat: T,
    pub alpha_hat: T,
    pub sigma_hat: T,
    pub loglik: T,
    pub method: Method,
    pub converged: bool,
    pub n_obs: usize,
}

impl<T: Scalar> EstimationResult<T> {
    pub fn params(&self) -> Result<OscillatorParams<T>, ParamError> {
        OscillatorParams::new(self.gamma_hat, self.alpha_hat)
    }
}

/// `cos(√−x)` for `x < 0`, `cosh(√x)` for `x ≥ 0`: an entire function of `x`.
fn cos_like<T: Scalar>(x: T) -> T {
    if x < T::zero() {
        (-x).sqrt().cos()
    } else {
        x.sqrt().cosh()
    }
}

/// Exact AR(2) coefficients `(φ₁, φ₂)` of the oscillator sampled every `dt`.
pub fn discretize_exact<T: Scalar>(params: &OscillatorParams<T>, dt: T) -> (T, T) {
    let decay = (-params.gamma() * dt * T::half()).exp();
    // (root half-gap · dt)², signed by the discriminant
    let x = params.discriminant() * dt * dt / T::lit(4.0);
    let phi1 = T::two() * decay * cos_like(x);
    let phi2 = -(-params.gamma() * dt).exp();
    (phi1, phi2)
}

/// Signed squared log-argument of the discrete roots: `acos(c)²` for a
/// complex pair, `−acosh(c)²` for a real pair, where `c = φ₁ / (2√−φ₂)`.
fn signed_arg_sq<T: Scalar>(c: T) -> T {
    if c < T::one() {
        let theta = c.acos();
        theta * theta
    } else {
        let kappa = c.acosh();
        -kappa * kappa
    }
}

/// Inverts [`discretize_exact`] via the modulus/argument form of the roots.
/// Returns `(γ, α)`; `α` may be non-positive when a discrete root exceeds 1.
fn invert_discretization<T: Scalar>(phi1: T, phi2: T, dt: T) -> Result<(T, T), EstimationError> {
    let modulus_sq = -phi2;
    if !(modulus_sq > T::zero() && modulus_sq < T::one()) {
        return Err(EstimationError::NonStationary(format!(
            "-phi2 = {modulus_sq} outside (0, 1)"
        )));
    }
    let modulus = modulus_sq.sqrt();
    let c = phi1 / (T::two() * modulus);
    if c <= -T::one() {
        return Err(EstimationError::NonStationary(format!(
            "discrete roots are negative reals (phi1 = {phi1})"
        )));
    }
    let log_mod = modulus.ln();
    let gamma = -modulus_sq.ln() / dt;
    let alpha = (log_mod * log_mod + signed_arg_sq(c)) / (dt * dt);
    Ok((gamma, alpha))
}

struct Design<T> {
    m: usize,
    yy: T,
}

fn design<T: Scalar>(series: &ObservedSeries<T>) -> Design<T> {
    let v = series.values();
    let m = v.len() - 2;
    let yy = v[2..].iter().fold(T::zero(), |acc, &y| acc + y * y);
    Design { m, yy }
}

fn dot<T: Scalar>(a: impl Iterator<Item = T>, b: impl Iterator<Item = T>) -> T {
    a.zip(b).fold(T::zero(), |acc, (x, y)| acc + x * y)
}

/// Least squares of `Y[i]` on `(Y[i−1], Y[i−2])` by Gram–Schmidt QR with one
/// reorthogonalization pass.
fn ols_ar2<T: Scalar>(series: &ObservedSeries<T>) -> Result<(T, T), EstimationError> {
    let v = series.values();
    let n = v.len();
    let x1 = &v[1..n - 1];
    let x2 = &v[..n - 2];
    let target = &v[2..];

    let r11 = dot(x1.iter().copied(), x1.iter().copied()).sqrt();
    if r11 <= T::zero() {
        return Err(EstimationError::Degenerate);
    }
    let q1: Vec<T> = x1.iter().map(|&x| x / r11).collect();
    let mut r12 = dot(q1.iter().copied(), x2.iter().copied());
    let mut resid: Vec<T> = x2.iter().zip(&q1).map(|(&x, &q)| x - r12 * q).collect();
    let correction = dot(q1.iter().copied(), resid.iter().copied());
    for (r, &q) in resid.iter_mut().zip(&q1) {
        *r -= correction * q;
    }
    r12 += correction;
    let r22 = dot(resid.iter().copied(), resid.iter().copied()).sqrt();
    let x2_norm = dot(x2.iter().copied(), x2.iter().copied()).sqrt();
    if r22 <= T::lit(RANK_TOL) * r11.max(x2_norm) {
        return Err(EstimationError::Degenerate);
    }
    let q2: Vec<T> = resid.iter().map(|&r| r / r22).collect();

    let b1 = dot(q1.iter().copied(), target.iter().copied());
    let b2 = dot(q2.iter().copied(), target.iter().copied());
    let phi2 = b2 / r22;
    let phi1 = (b1 - r12 * phi2) / r11;
    Ok((phi1, phi2))
}

fn rss<T: Scalar>(series: &ObservedSeries<T>, phi1: T, phi2: T) -> T {
    series
        .values()
        .windows(3)
        .map(|w| {
            let e = w[2] - phi1 * w[1] - phi2 * w[0];
            e * e
        })
        .fold(T::zero(), |acc, e| acc + e)
}

/// Conditional Gaussian log-likelihood with the innovation variance concentrated out.
fn concentrated_loglik<T: Scalar>(d: &Design<T>, rss: T) -> T {
    let m = T::from_usize(d.m).expect("count fits scalar");
    let floor = T::lit(RESIDUAL_RESOLUTION * RESIDUAL_RESOLUTION) * d.yy / m;
    let var = (rss / m).max(floor).max(T::min_positive_value());
    -m * T::half() * ((T::two() * T::PI() * var).ln() + T::one())
}

fn sigma_from_rss<T: Scalar>(d: &Design<T>, rss: T, dt: T) -> T {
    let m = T::from_usize(d.m).expect("count fits scalar");
    (rss / (m * dt)).sqrt()
}

/// Log-likelihood of the sampled series under `params`.
pub fn loglik_at<T: Scalar>(series: &ObservedSeries<T>, params: &OscillatorParams<T>) -> T {
    let (phi1, phi2) = discretize_exact(params, series.dt());
    concentrated_loglik(&design(series), rss(series, phi1, phi2))
}

pub fn estimate_ar2<T: Scalar>(
    series: &ObservedSeries<T>,
) -> Result<EstimationResult<T>, EstimationError> {
    let (phi1, phi2) = ols_ar2(series)?;
    let (gamma, alpha) = invert_discretization(phi1, phi2, series.dt())?;
    let d = design(series);
    let converged = alpha > T::zero() && gamma >= T::zero();

    let (loglik, fit_rss) = if converged {
        let params = OscillatorParams::new(gamma, alpha)?;
        let (p1, p2) = discretize_exact(&params, series.dt());
        let r = rss(series, p1, p2);
        (concentrated_loglik(&d, r), r)
    } else {
        let r = rss(series, phi1, phi2);
        (concentrated_loglik(&d, r), r)
    };

    Ok(EstimationResult {
        gamma_hat: gamma,
        alpha_hat: alpha,
        sigma_hat: sigma_from_rss(&d, fit_rss, series.dt()),
        loglik,
        method: Method::Ar2Ols,
        converged,
        n_obs: series.len(),
    })
}

/// Negative log-likelihood over `(ln γ, ln α)`.
struct Objective<'a, T> {
    series: &'a ObservedSeries<T>,
    design: Design<T>,
}

impl<T: Scalar> Objective<'_, T> {
    fn eval(&self, u: [T; 2]) -> T {
        let (gamma, alpha) = (u[0].exp(), u[1].exp());
        match OscillatorParams::new(gamma, alpha) {
            Ok(params) => {
                let (p1, p2) = discretize_exact(&params, self.series.dt());
                let value = -concentrated_loglik(&self.design, rss(self.series, p1, p2));
                if value.is_finite() {
                    value
                } else {
                    T::infinity()
                }
            }
            Err(_) => T::infinity(),
        }
    }
}

fn logspace<T: Scalar>(lo: f64, hi: f64, n: usize) -> Vec<T> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| T::lit(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

/// Best point of a log-spaced grid in the dimensionless `(γ·dt, α·dt²)`
/// plane, bounded above by Nyquist for the oscillation frequency.
fn grid_search<T: Scalar>(obj: &Objective<'_, T>) -> [T; 2] {
    let ln_dt = obj.series.dt().ln();
    let gammas = logspace::<T>(1e-4, 10.0, GRID_POINTS);
    let alphas = logspace::<T>(1e-6, 9.0, GRID_POINTS);
    let mut best = (
        [gammas[0] - ln_dt, alphas[0] - T::two() * ln_dt],
        T::infinity(),
    );
    for &lg in &gammas {
        for &la in &alphas {
            let u = [lg - ln_dt, la - T::two() * ln_dt];
            let f = obj.eval(u);
            if f < best.1 {
                best = (u, f);
            }
        }
    }
    best.0
}

struct SimplexOutcome<T> {
    point: [T; 2],
    value: T,
    converged: bool,
}

/// Nelder–Mead on two variables with standard coefficients. The returned
/// point is never worse than `start`.
fn nelder_mead<T: Scalar>(obj: &Objective<'_, T>, start: [T; 2], step: T) -> SimplexOutcome<T> {
    let (reflect, expand, contract, shrink) = (T::one(), T::two(), T::half(), T::half());
    let mut simplex = [
        start,
        [start[0] + step, start[1]],
        [start[0], start[1] + step],
    ];
    let mut values = simplex.map(|v| obj.eval(v));
    let lerp = |a: [T; 2], b: [T; 2], w: T| [a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])];

    let mut converged = false;
    for _ in 0..MLE_MAX_ITER {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| {
            values[i]
                .partial_cmp(&values[j])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);

        let spread = simplex[1..]
            .iter()
            .flat_map(|v| [(v[0] - simplex[0][0]).abs(), (v[1] - simplex[0][1]).abs()])
            .fold(T::zero(), T::max);
        if spread < T::lit(MLE_XTOL) {
            converged = true;
            break;
        }

        let centroid = [
            (simplex[0][0] + simplex[1][0]) * T::half(),
            (simplex[0][1] + simplex[1][1]) * T::half(),
        ];
        let worst = simplex[2];
        let reflected = lerp(centroid, worst, -reflect);
        let f_r = obj.eval(reflected);

        if f_r < values[0] {
            let expanded = lerp(centroid, worst, -expand);
            let f_e = obj.eval(expanded);
            if f_e < f_r {
                simplex[2] = expanded;
                values[2] = f_e;
            } else {
                simplex[2] = reflected;
                values[2] = f_r;
            }
            continue;
        }
        if f_r < values[1] {
            simplex[2] = reflected;
            values[2] = f_r;
            continue;
        }
        let (candidate, f_c) = if f_r < values[2] {
            let outside = lerp(centroid, reflected, contract);
            (outside, obj.eval(outside))
        } else {
            let inside = lerp(centroid, worst, contract);
            (inside, obj.eval(inside))
        };
        if f_c < values[2].min(f_r) {
            simplex[2] = candidate;
            values[2] = f_c;
            continue;
        }
        for i in 1..3 {
            simplex[i] = lerp(simplex[0], simplex[i], shrink);
            values[i] = obj.eval(simplex[i]);
        }
    }

    let best = (0..3)
        .min_by(|&i, &j| {
            values[i]
                .partial_cmp(&values[j])
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap_or(0);
    SimplexOutcome {
        point: simplex[best],
        value: values[best],
        converged,
    }
}

/// Maximizes the conditional Gaussian likelihood over `(γ, α)`.
///
/// Starts from `init` when given, otherwise from the AR(2) estimate when it
/// converges, otherwise from the best point of a coarse grid. A run that
/// exhausts [`MLE_MAX_ITER`] comes back with `converged = false` and the best
/// point found.
pub fn estimate_mle<T: Scalar>(
    series: &ObservedSeries<T>,
    init: Option<OscillatorParams<T>>,
) -> Result<EstimationResult<T>, EstimationError> {
    let obj = Objective {
        series,
        design: design(series),
    };
    let start = match init {
        Some(p) if p.gamma() > T::zero() => [p.gamma().ln(), p.alpha().ln()],
        Some(p) => [(T::lit(1e-8) / series.dt()).ln(), p.alpha().ln()],
        None => match estimate_ar2(series) {
            Ok(r) if r.converged && r.gamma_hat > T::zero() => [r.gamma_hat.ln(), r.alpha_hat.ln()],
            Ok(_) | Err(EstimationError::NonStationary(_)) => grid_search(&obj),
            Err(e) => return Err(e),
        },
    };

    let outcome = nelder_mead(&obj, start, T::lit(0.05));
    let (gamma, alpha) = (outcome.point[0].exp(), outcome.point[1].exp());
    let params = OscillatorParams::new(gamma, alpha)?;
    let (p1, p2) = discretize_exact(&params, series.dt());
    let fit_rss = rss(series, p1, p2);

    Ok(EstimationResult {
        gamma_hat: gamma,
        alpha_hat: alpha,
        sigma_hat: sigma_from_rss(&obj.design, fit_rss, series.dt()),
        loglik: -outcome.value,
        method: Method::Mle,
        converged: outcome.converged,
        n_obs: series.len(),
    })
}

/// Draws a series from the model the likelihood assumes: the exact AR(2)
/// recursion with i.i.d. `N(0, σ²·dt)` innovations. The first two samples are
/// the noise-free solution from `init`.
pub fn simulate_exact_ar2<T: Scalar>(
    params: &OscillatorParams<T>,
    init: OscState<T>,
    dt: T,
    n: usize,
    sigma: T,
    seed: u64,
) -> Result<ObservedSeries<T>, EstimationError> {
    if !(dt.is_finite() && dt > T::zero()) {
        return Err(EstimationError::BadInterval);
    }
    if n < 3 {
        return Err(EstimationError::TooShort(n));
    }
    let y1 = solve_analytic(params, init, dt).map_err(|e| match e {
        crate::oscillator::SolveError::Param(p) => EstimationError::Param(p),
        crate::oscillator::SolveError::BadTime(_) => EstimationError::BadInterval,
    })?;
    let (phi1, phi2) = discretize_exact(params, dt);
    let scale = sigma * dt.sqrt();
    let mut stream = GaussianStream::new(seed);
    let mut values = Vec::with_capacity(n);
    values.push(init.y);
    values.push(y1.y);
    for i in 2..n {
        let next =
            phi1 * values[i - 1] + phi2 * values[i - 2] + scale * T::lit(stream.next_gaussian());
        values.push(next);
    }
    ObservedSeries::new(dt, values)
}
