//! Time stepping of the forced oscillator `Ÿ + γẎ + αY = ε(t)`.

use thiserror::Error;

use crate::oscillator::{check_finite, solve_analytic, OscState, OscillatorParams, ParamError};
use crate::scalar::Scalar;

/// Used when deriving the sample count from a time span, so that spans that
/// are an integer number of steps up to rounding include their endpoint.
const SPAN_FUZZ: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("forcing has {got} samples but the grid has {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("state became non-finite at step {step}")]
    Divergence { step: usize },
    #[error("bad time grid: {0}")]
    BadGrid(String),
    #[error("band must be positive and finite")]
    BadBand,
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error(transparent)]
    Param(#[from] ParamError),
}

impl IntegrationError {
    pub fn name(&self) -> &'static str {
        match self {
            IntegrationError::LengthMismatch { .. } => "LengthMismatch",
            IntegrationError::Divergence { .. } => "Divergence",
            IntegrationError::BadGrid(_) => "InvariantViolation",
            IntegrationError::BadBand => "InvariantViolation",
            IntegrationError::EmptyTrajectory => "EmptyTrajectory",
            IntegrationError::Param(e) => e.name(),
        }
    }
}

/// Uniform grid `t0, t0 + dt, …, t0 + (n_steps − 1)·dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    t0: T,
    dt: T,
    n_steps: usize,
}

impl<T: Scalar> TimeGrid<T> {
    pub fn new(t0: T, dt: T, n_steps: usize) -> Result<Self, IntegrationError> {
        if !t0.is_finite() {
            return Err(IntegrationError::BadGrid("t0 must be finite".into()));
        }
        if !(dt.is_finite() && dt > T::zero()) {
            return Err(IntegrationError::BadGrid(
                "dt must be positive and finite".into(),
            ));
        }
        if n_steps == 0 {
            return Err(IntegrationError::BadGrid(
                "n_steps must be at least 1".into(),
            ));
        }
        Ok(Self { t0, dt, n_steps })
    }

    /// Grid on `[0, t_end]` with `floor(t_end/dt) + 1` samples.
    pub fn span(t_end: T, dt: T) -> Result<Self, IntegrationError> {
        if !(t_end.is_finite() && t_end > T::zero()) {
            return Err(IntegrationError::BadGrid(
                "t_end must be positive and finite".into(),
            ));
        }
        if !(dt.is_finite() && dt > T::zero() && dt <= t_end) {
            return Err(IntegrationError::BadGrid(
                "dt must satisfy 0 < dt <= t_end".into(),
            ));
        }
        let steps = (t_end / dt + T::lit(SPAN_FUZZ)).floor();
        let n = steps
            .to_usize()
            .ok_or_else(|| IntegrationError::BadGrid("too many samples".into()))?;
        Self::new(T::zero(), dt, n + 1)
    }

    pub fn t0(&self) -> T {
        self.t0
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn time(&self, i: usize) -> T {
        self.t0 + T::from_usize(i).expect("index fits scalar") * self.dt
    }

    pub fn t_end(&self) -> T {
        self.time(self.n_steps - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.n_steps).map(move |i| self.time(i))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    grid: TimeGrid<T>,
    states: Vec<OscState<T>>,
    forcing: Vec<T>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn new(
        grid: TimeGrid<T>,
        states: Vec<OscState<T>>,
        forcing: Vec<T>,
    ) -> Result<Self, IntegrationError> {
        if states.len() != grid.n_steps {
            return Err(IntegrationError::LengthMismatch {
                expected: grid.n_steps,
                got: states.len(),
            });
        }
        if forcing.len() != grid.n_steps {
            return Err(IntegrationError::LengthMismatch {
                expected: grid.n_steps,
                got: forcing.len(),
            });
        }
        if let Some(step) = states.iter().position(|s| !s.is_finite()) {
            return Err(IntegrationError::Divergence { step });
        }
        Ok(Self {
            grid,
            states,
            forcing,
        })
    }

    /// Samples the exact unforced solution on `grid`, measuring time from `grid.t0`.
    pub fn analytic(
        params: &OscillatorParams<T>,
        init: OscState<T>,
        grid: TimeGrid<T>,
    ) -> Result<Self, IntegrationError> {
        let states = (0..grid.n_steps)
            .map(|i| {
                let elapsed = grid.time(i) - grid.t0;
                solve_analytic(params, init, elapsed).map_err(|e| match e {
                    crate::oscillator::SolveError::Param(p) => IntegrationError::Param(p),
                    crate::oscillator::SolveError::BadTime(_) => {
                        IntegrationError::BadGrid("negative elapsed time".into())
                    }
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(grid, states, vec![T::zero(); grid.n_steps])
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn states(&self) -> &[OscState<T>] {
        &self.states
    }

    pub fn forcing(&self) -> &[T] {
        &self.forcing
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn ys(&self) -> Vec<T> {
        self.states.iter().map(|s| s.y).collect()
    }

    pub fn last(&self) -> OscState<T> {
        *self
            .states
            .last()
            .expect("trajectory has at least one sample")
    }

    /// `max_i |Y_i − other.Y_i|`; the grids must have equal length.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.len(), other.len(), "trajectories differ in length");
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| (a.y - b.y).abs())
            .fold(T::zero(), T::max)
    }
}

fn accel<T: Scalar>(params: &OscillatorParams<T>, y: T, ydot: T, eps: T) -> T {
    -params.gamma() * ydot - params.alpha() * y + eps
}

fn check_init<T: Scalar>(init: OscState<T>) -> Result<OscState<T>, IntegrationError> {
    check_finite("y0", init.y)?;
    check_finite("ydot0", init.ydot)?;
    Ok(init)
}

/// Explicit Euler in the exact update order of the reference listing:
///
/// ```text
/// a      = −γ·Ẏ[i−1] − α·Y[i−1] + ε[i−1]
/// Ẏ[i]   = Ẏ[i−1] + a·dt
/// Y[i]   = Y[i−1] + Ẏ[i−1]·dt      (previous velocity)
/// ```
pub fn integrate_paper_euler<T: Scalar>(
    params: &OscillatorParams<T>,
    init: OscState<T>,
    forcing: &[T],
    grid: TimeGrid<T>,
) -> Result<Trajectory<T>, IntegrationError> {
    if forcing.len() != grid.n_steps {
        return Err(IntegrationError::LengthMismatch {
            expected: grid.n_steps,
            got: forcing.len(),
        });
    }
    let init = check_init(init)?;
    let dt = grid.dt;
    let mut states = Vec::with_capacity(grid.n_steps);
    states.push(init);
    let mut prev = init;
    for i in 1..grid.n_steps {
        let a = accel(params, prev.y, prev.ydot, forcing[i - 1]);
        let next = OscState::new(prev.y + prev.ydot * dt, prev.ydot + a * dt);
        if !next.is_finite() {
            return Err(IntegrationError::Divergence { step: i });
        }
        states.push(next);
        prev = next;
    }
    Trajectory::new(grid, states, forcing.to_vec())
}

fn rk4_core<T: Scalar, F>(
    params: &OscillatorParams<T>,
    init: OscState<T>,
    grid: TimeGrid<T>,
    mut eps_at: F,
) -> Result<Vec<OscState<T>>, IntegrationError>
where
    F: FnMut(usize, T) -> T,
{
    let init = check_init(init)?;
    let h = grid.dt;
    let half_h = h * T::half();
    let sixth = T::one() / T::lit(6.0);
    let deriv = |s: OscState<T>, eps: T| OscState::new(s.ydot, accel(params, s.y, s.ydot, eps));
    let axpy =
        |s: OscState<T>, k: OscState<T>, w: T| OscState::new(s.y + w * k.y, s.ydot + w * k.ydot);

    let mut states = Vec::with_capacity(grid.n_steps);
    states.push(init);
    let mut s = init;
    for i in 1..grid.n_steps {
        let t = grid.time(i - 1);
        let k1 = deriv(s, eps_at(i - 1, t));
        let eps_mid = eps_at(i - 1, t + half_h);
        let k2 = deriv(axpy(s, k1, half_h), eps_mid);
        let k3 = deriv(axpy(s, k2, half_h), eps_mid);
        let k4 = deriv(axpy(s, k3, h), eps_at(i - 1, t + h));
        let two = T::two();
        s = OscState::new(
            s.y + h * sixth * (k1.y + two * k2.y + two * k3.y + k4.y),
            s.ydot + h * sixth * (k1.ydot + two * k2.ydot + two * k3.ydot + k4.ydot),
        );
        if !s.is_finite() {
            return Err(IntegrationError::Divergence { step: i });
        }
        states.push(s);
    }
    Ok(states)
}

/// Classical fourth-order Runge–Kutta with forcing evaluated at stage times.
pub fn integrate_rk4<T: Scalar, F>(
    params: &OscillatorParams<T>,
    init: OscState<T>,
    forcing_fn: F,
    grid: TimeGrid<T>,
) -> Result<Trajectory<T>, IntegrationError>
where
    F: Fn(T) -> T,
{
    let states = rk4_core(params, init, grid, |_, t| forcing_fn(t))?;
    let forcing = grid.times().map(&forcing_fn).collect();
    Trajectory::new(grid, states, forcing)
}

/// Fourth-order Runge–Kutta for a sampled forcing sequence held constant
/// over each step (`ε[i]` on `[tᵢ, tᵢ₊₁)`), the same left-endpoint convention
/// as [`integrate_paper_euler`].
pub fn integrate_rk4_held<T: Scalar>(
    params: &OscillatorParams<T>,
    init: OscState<T>,
    forcing: &[T],
    grid: TimeGrid<T>,
) -> Result<Trajectory<T>, IntegrationError> {
    if forcing.len() != grid.n_steps {
        return Err(IntegrationError::LengthMismatch {
            expected: grid.n_steps,
            got: forcing.len(),
        });
    }
    let states = rk4_core(params, init, grid, |step, _| forcing[step])?;
    Trajectory::new(grid, states, forcing.to_vec())
}

/// Recovery summary of a trajectory relative to a band around equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryMetrics<T> {
    /// Last grid time with `|Y| > band`, or 0 if the trajectory never leaves the band.
    pub settling_time: T,
    /// `|min Y|` when `Y₀ > 0` and the gap changes sign, else 0.
    pub overshoot: T,
    pub zero_crossings: usize,
    pub terminal_abs: T,
}

pub const DEFAULT_BAND: f64 = 0.05;

pub fn recovery_metrics<T: Scalar>(
    traj: &Trajectory<T>,
    band: T,
) -> Result<RecoveryMetrics<T>, IntegrationError> {
    if !(band.is_finite() && band > T::zero()) {
        return Err(IntegrationError::BadBand);
    }
    if traj.is_empty() {
        return Err(IntegrationError::EmptyTrajectory);
    }
    let ys = traj.ys();
    let settling_time = ys
        .iter()
        .rposition(|y| y.abs() > band)
        .map_or(T::zero(), |i| traj.grid.time(i));

    // sign changes between consecutive non-zero samples
    let mut zero_crossings = 0;
    let mut last_sign: Option<bool> = None;
    for &y in &ys {
        if y == T::zero() {
            continue;
        }
        let positive = y > T::zero();
        if let Some(prev) = last_sign {
            if prev != positive {
                zero_crossings += 1;
            }
        }
        last_sign = Some(positive);
    }

    let overshoot = if ys[0] > T::zero() && zero_crossings > 0 {
        ys.iter().copied().fold(T::infinity(), T::min).abs()
    } else {
        T::zero()
    };

    Ok(RecoveryMetrics {
        settling_time,
        overshoot,
        zero_crossings,
        terminal_abs: ys[ys.len() - 1].abs(),
    })
}
