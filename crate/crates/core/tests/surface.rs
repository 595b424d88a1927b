use std::f64::consts::{PI, TAU};

use random_grating::config::RunConfig;
use random_grating::error::Error;
use random_grating::profile::ProfileSpec;
use random_grating::surface::{
    fourier_project, l2_norm, periodic_grid, sample_realization, Surface, SurfaceModel,
};

/// Modified Bessel function of the first kind by its power series.
fn bessel_i(n: u32, x: f64) -> f64 {
    let mut term = (x / 2.0).powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..40 {
        term *= (x / 2.0).powi(2) / (k as f64 * (k + n) as f64);
        sum += term;
    }
    sum
}

#[test]
fn profile_evaluation_examples() {
    assert_eq!(ProfileSpec::constant(0.0).eval(1.0), 0.0);
    let g2 = RunConfig::preset("ex2").unwrap().mean;
    assert!((g2.eval(0.0) - 1.9).abs() < 1e-15);
    let h1 = RunConfig::preset("ex1").unwrap().intensity;
    assert!((h1.eval(PI) + 1.0).abs() < 1e-15);
}

#[test]
fn zero_intensity_reproduces_mean() {
    let g = ProfileSpec::cosines(1.5, &[(0.2, 1)]);
    let model = SurfaceModel::new(g.clone(), ProfileSpec::zero(), 60).unwrap();
    let r = sample_realization(&model, 3, 7).unwrap();
    for (x, f) in model.node_positions().iter().zip(&r.node_values) {
        assert_eq!(*f, g.eval(*x));
    }
}

#[test]
fn realization_interpolates_between_nodes() {
    let model = RunConfig::preset("ex1").unwrap().model().unwrap();
    let r = sample_realization(&model, 11, 4).unwrap();
    let dx = model.node_spacing();
    let f = &r.node_values;
    assert_eq!(f[0], f[80]);
    assert!((r.height(3.0 * dx) - f[3]).abs() < 1e-15);
    assert!((r.height(3.5 * dx) - 0.5 * (f[3] + f[4])).abs() < 1e-15);
    assert_eq!(r.height(TAU), f[0]);
}

#[test]
fn l2_norm_examples() {
    assert!((l2_norm(&[1.0; 37]).unwrap() - TAU.sqrt()).abs() < 1e-14);
    let cos: Vec<f64> = periodic_grid(256).iter().map(|x| x.cos()).collect();
    assert!((l2_norm(&cos).unwrap() - PI.sqrt()).abs() < 1e-10);
    assert_eq!(l2_norm(&[0.0; 8]).unwrap(), 0.0);
    assert!(l2_norm(&[]).is_err());
}

#[test]
fn exponential_profile_projection_matches_bessel_expansion() {
    let g4 = RunConfig::preset("ex4").unwrap().mean;
    let c = fourier_project(&g4, 6, 256).unwrap();
    let (i0, i1, i2, i3) = (bessel_i(0, 1.0), bessel_i(1, 1.0), bessel_i(2, 1.0), bessel_i(3, 1.0));
    // e^{cos kx} = I_0(1) + 2 Σ_n I_n(1) cos(n k x)
    let exact = [
        (0, 1.2 + 0.09 * i0),
        (3, 0.1 * i1),
        (5, 0.08 * i1),
        (7, 0.1 * i2),
        (11, 0.1 * i3 + 0.08 * i2),
    ];
    for (p, v) in exact {
        assert!((c.coeffs()[p] - v).abs() < 1e-12, "c{p}");
    }
    for (p, v) in [(0, 1.3139), (3, 0.0565), (5, 0.0452), (7, 0.0136), (11, 0.0131)] {
        assert!((c.coeffs()[p] - v).abs() < 5e-5, "c{p}");
    }
    for p in [1, 2, 4, 6, 8, 9, 10, 12] {
        assert!(c.coeffs()[p].abs() < 1e-12);
    }
}

#[test]
fn projection_of_trig_profiles_is_exact() {
    let g2 = RunConfig::preset("ex2").unwrap().mean;
    let c = fourier_project(&g2, 2, 64).unwrap();
    for (a, b) in c.coeffs().iter().zip([1.5, 0.2, 0.0, 0.2, 0.0]) {
        assert!((a - b).abs() < 1e-14);
    }
    let z = fourier_project(&ProfileSpec::zero(), 3, 64).unwrap();
    assert!(z.coeffs().iter().all(|&v| v == 0.0));
}

#[test]
fn sampling_is_order_independent() {
    let model = RunConfig::preset("ex2").unwrap().model().unwrap();
    let forward: Vec<_> = (0..6).map(|m| sample_realization(&model, 5, m).unwrap()).collect();
    let backward: Vec<_> = (0..6).rev().map(|m| sample_realization(&model, 5, m).unwrap()).collect();
    for (a, b) in forward.iter().zip(backward.iter().rev()) {
        assert_eq!(a, b);
    }
    assert_ne!(forward[0], forward[1]);
}

#[test]
fn exhausted_retry_budget_names_the_sample() {
    let mut model =
        SurfaceModel::new(ProfileSpec::constant(0.01), ProfileSpec::constant(10.0), 40).unwrap();
    model.max_retries = 20;
    match sample_realization(&model, 1, 17) {
        Err(Error::AmplitudeAssumption { sample, retries }) => {
            assert_eq!((sample, retries), (17, 20));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn node_variance_matches_intensity() {
    let model = RunConfig::preset("ex1").unwrap().model().unwrap();
    let m = 100_000;
    let n = model.nodes;
    let dx = model.node_spacing();
    let mut sum = vec![0.0; n];
    let mut sum2 = vec![0.0; n];
    for k in 0..m {
        let r = sample_realization(&model, 2024, k as u64).unwrap();
        for i in 0..n {
            sum[i] += r.node_values[i];
            sum2[i] += r.node_values[i] * r.node_values[i];
        }
    }
    let mut worst = 0.0f64;
    for (i, x) in model.node_positions().iter().take(n).enumerate() {
        let mean = sum[i] / m as f64;
        let var = sum2[i] / m as f64 - mean * mean;
        let want = x.cos().powi(2) * dx;
        let se = want * (2.0 / m as f64).sqrt();
        worst = worst.max((var - want).abs() - 3.0 * se);
    }
    assert!(worst < 1e-12, "{worst}");
}
