use gapdyn::integrators::{
    integrate_paper_euler, integrate_rk4, integrate_rk4_held, recovery_metrics, TimeGrid,
    Trajectory,
};
use gapdyn::oscillator::{OscState, OscillatorParams};
use gapdyn::shocks::{realize, ShockSpec};
use proptest::prelude::*;

const PAPER_GAMMAS: [f64; 3] = [0.5, 2.0, 4.0];

fn p(g: f64, a: f64) -> OscillatorParams<f64> {
    OscillatorParams::new(g, a).unwrap()
}

fn euler_error(g: f64, dt: f64) -> f64 {
    let grid = TimeGrid::span(20.0, dt).unwrap();
    let init = OscState::new(1.0, 0.0);
    let zeros = vec![0.0; grid.n_steps()];
    let euler = integrate_paper_euler(&p(g, 1.0), init, &zeros, grid).unwrap();
    euler.max_abs_diff(&Trajectory::analytic(&p(g, 1.0), init, grid).unwrap())
}

fn rk4_error(g: f64, dt: f64) -> f64 {
    let grid = TimeGrid::span(20.0, dt).unwrap();
    let init = OscState::new(1.0, 0.0);
    let rk = integrate_rk4(&p(g, 1.0), init, |_| 0.0, grid).unwrap();
    rk.max_abs_diff(&Trajectory::analytic(&p(g, 1.0), init, grid).unwrap())
}

#[test]
fn paper_euler_is_first_order() {
    for g in PAPER_GAMMAS {
        let ratio = euler_error(g, 0.1) / euler_error(g, 0.05);
        assert!((1.7..=2.3).contains(&ratio), "gamma={g} ratio={ratio}");
    }
}

#[test]
fn rk4_is_fourth_order() {
    for g in PAPER_GAMMAS {
        let ratio = rk4_error(g, 0.1) / rk4_error(g, 0.05);
        assert!((12.0..=20.0).contains(&ratio), "gamma={g} ratio={ratio}");
    }
}

#[test]
fn critical_settles_first_on_analytic_paths() {
    let grid = TimeGrid::span(20.0, 0.1).unwrap();
    let init = OscState::new(1.0, 0.0);
    let settle = |g| {
        let traj = Trajectory::analytic(&p(g, 1.0), init, grid).unwrap();
        recovery_metrics(&traj, 0.05).unwrap().settling_time
    };
    let critical = settle(2.0);
    assert!(critical <= settle(0.5));
    assert!(critical <= settle(4.0));
}

fn rel_close(a: &[f64], b: &[f64], tol: f64) -> bool {
    let scale = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs())) + 1e-300;
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn superposition_holds_for_both_schemes(
        g in 0.0f64..5.0,
        a in 0.1f64..5.0,
        s1 in 0u64..1000,
        s2 in 0u64..1000,
    ) {
        let params = p(g, a);
        let grid = TimeGrid::span(10.0, 0.05).unwrap();
        let e1 = realize(&ShockSpec::WhiteNoise { sigma: 0.3, seed: s1 }, &grid).unwrap();
        let e2 = realize(&ShockSpec::Ar1 { rho: 0.6, sigma: 0.2, seed: s2 }, &grid).unwrap();
        let sum: Vec<f64> = e1.iter().zip(&e2).map(|(x, y)| x + y).collect();
        let rest = OscState::rest();

        let y = |f: &[f64]| integrate_paper_euler(&params, rest, f, grid).unwrap().ys();
        let combined: Vec<f64> = y(&e1).iter().zip(y(&e2)).map(|(x, y)| x + y).collect();
        prop_assert!(rel_close(&y(&sum), &combined, 1e-10));

        let r = |f: &[f64]| integrate_rk4_held(&params, rest, f, grid).unwrap().ys();
        let combined: Vec<f64> = r(&e1).iter().zip(r(&e2)).map(|(x, y)| x + y).collect();
        prop_assert!(rel_close(&r(&sum), &combined, 1e-10));
    }

    #[test]
    fn doubling_an_impulse_doubles_the_response(g in 0.0f64..5.0, a in 0.1f64..5.0, at in 0.0f64..15.0, m in -3.0f64..3.0) {
        let params = p(g, a);
        let grid = TimeGrid::span(20.0, 0.1).unwrap();
        let once = realize(&ShockSpec::Impulse { at, magnitude: m }, &grid).unwrap();
        let twice = realize(&ShockSpec::Impulse { at, magnitude: 2.0 * m }, &grid).unwrap();
        let y1 = integrate_paper_euler(&params, OscState::rest(), &once, grid).unwrap().ys();
        let y2 = integrate_paper_euler(&params, OscState::rest(), &twice, grid).unwrap().ys();
        for (a, b) in y1.iter().zip(&y2) {
            prop_assert!((b - 2.0 * a).abs() <= 1e-12 * (2.0 * a).abs());
        }
        let y1 = integrate_rk4_held(&params, OscState::rest(), &once, grid).unwrap().ys();
        let y2 = integrate_rk4_held(&params, OscState::rest(), &twice, grid).unwrap().ys();
        for (a, b) in y1.iter().zip(&y2) {
            prop_assert!((b - 2.0 * a).abs() <= 1e-12 * (2.0 * a).abs());
        }
    }
}

#[test]
fn single_precision_paper_run() {
    let grid = TimeGrid::<f32>::span(20.0, 0.1).unwrap();
    let params = OscillatorParams::<f32>::new(0.5, 1.0).unwrap();
    let zeros = vec![0.0f32; grid.n_steps()];
    let traj = integrate_paper_euler(&params, OscState::new(1.0, 0.0), &zeros, grid).unwrap();
    let m = recovery_metrics(&traj, 0.05).unwrap();
    assert_eq!(traj.len(), 201);
    assert!(m.zero_crossings >= 1);
}
