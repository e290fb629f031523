use gapdyn::integrators::TimeGrid;
use gapdyn::shocks::{realize, realize_with, NoiseScaling, ShockSpec};

fn moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

fn big_grid() -> TimeGrid<f64> {
    TimeGrid::new(0.0, 1.0, 1_000_000).unwrap()
}

#[test]
fn ar1_long_run_variance_matches_sigma_squared() {
    for (rho, sigma, seed) in [(0.5, 0.3, 11u64), (-0.3, 1.0, 12), (0.9, 0.05, 13)] {
        let draws = realize(&ShockSpec::Ar1 { rho, sigma, seed }, &big_grid()).unwrap();
        let (_, var) = moments(&draws);
        assert!(
            (var / (sigma * sigma) - 1.0).abs() < 0.02,
            "rho={rho} var={var}"
        );
    }
}

#[test]
fn white_noise_is_mean_zero() {
    let draws = realize_with(
        &ShockSpec::WhiteNoise {
            sigma: 1.0,
            seed: 2024,
        },
        &big_grid(),
        NoiseScaling::Literal,
    )
    .unwrap();
    let (mean, var) = moments(&draws);
    let se = (var / draws.len() as f64).sqrt();
    assert!(mean.abs() < 4.0 * se, "mean={mean} se={se}");
    assert!((var - 1.0).abs() < 0.01);
}

#[test]
fn equal_specs_are_bitwise_equal() {
    let grid = TimeGrid::span(50.0, 0.01).unwrap();
    for spec in [
        ShockSpec::WhiteNoise {
            sigma: 0.4,
            seed: 99,
        },
        ShockSpec::Ar1 {
            rho: 0.7,
            sigma: 0.4,
            seed: 99,
        },
    ] {
        let a = realize(&spec, &grid).unwrap();
        let b = realize(&spec, &grid).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }
}
