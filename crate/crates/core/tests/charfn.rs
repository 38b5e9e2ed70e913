use proptest::prelude::*;
use rfharm::charfn::*;
use rfharm::levy::LevyMeasure;
use rfharm::quad::{integrate, Tolerance};
use rfharm::rng::StreamSet;
use rfharm::spectrum::{FrequencyDistribution, SpectralDistribution};
use rfharm::stats::{empirical_cf, Moments};
use rfharm::synthesis::{Generator, Model};

fn laplace_model() -> Model {
    let spec = SpectralDistribution::with_total_mass(1.5, FrequencyDistribution::uniform(0.0, 1.0).unwrap()).unwrap();
    Model::laplace(1.5, spec).unwrap()
}

#[test]
fn double_quadrature_matches_laplace_form() {
    let m = laplace_model();
    for u1 in [-2.0, -0.5, 0.0, 0.7, 1.5] {
        for u2 in [-1.0, 0.0, 0.3, 1.2, 2.0] {
            let a = fdd_cf(&[u1, u2], &[0.0, 1.0], &m).unwrap();
            let b = laplace_fdd_cf(&[u1, u2], &[0.0, 1.0], 1.5, &m.spectrum).unwrap();
            assert!((a - b).abs() < 1e-6, "({u1},{u2}): {a} vs {b}");
        }
    }
}

#[test]
fn laplace_fdd_reduces_and_decorrelates() {
    let spec = SpectralDistribution::with_total_mass(0.8, FrequencyDistribution::uniform(0.0, 1.0).unwrap()).unwrap();
    assert_eq!(laplace_fdd_cf(&[0.0], &[0.0], 1.2, &spec).unwrap(), 1.0);
    let one = laplace_fdd_cf(&[0.9], &[3.0], 1.2, &spec).unwrap();
    assert!((one - laplace_marginal_cf(0.9, 1.2, 0.8)).abs() < 1e-12);
    // At a large lag cos(λτ) acts like a uniform phase, but the weights are
    // shared, so the limit is the phase average (1/2π)∫ln(A + B cos θ)dθ =
    // ln((A + √(A² - B²))/2), not the product of the marginals.
    for (a, b) in [(0.5, 0.5), (1.0, -0.7), (2.0, 1.0)] {
        let joint = laplace_fdd_cf(&[a, b], &[0.0, 1000.0], 1.2, &spec).unwrap();
        let big_a = 1.0 + 1.2 * (a * a + b * b);
        let big_b = 2.0 * 1.2 * a * b;
        let limit = (-(0.8 / 1.2) * (0.5 * (big_a + (big_a * big_a - big_b * big_b).sqrt())).ln()).exp();
        assert!((joint - limit).abs() < 1e-3, "{joint} vs {limit}");
        let prod = laplace_marginal_cf(a, 1.2, 0.8) * laplace_marginal_cf(b, 1.2, 0.8);
        assert!((joint - prod).abs() > 1e-2);
    }
}

#[test]
fn density_is_normalized_and_symmetric() {
    let m = laplace_model();
    let grid: Vec<f64> = (-750..=750).map(|k| k as f64 * 0.02).collect();
    let d = marginal_density(&grid, &m).unwrap();
    assert_eq!(d.points.len(), grid.len());
    let n = d.points.len();
    for k in 0..n / 2 {
        assert!((d.points[k].1 - d.points[n - 1 - k].1).abs() < 1e-10);
    }
    let f0 = d.points[n / 2].1;
    let b = 1.5f64.sqrt();
    assert!(f0.is_finite() && (f0 - 1.0 / (2.0 * b)).abs() < 1e-4);
    // Trapezoid over the grid; the cusp at 0 costs ~h²/12, the tail past 15 below 1e-5.
    let mass: f64 = d.points.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum();
    assert!((mass - 1.0).abs() < 1e-4, "{mass}");
}

#[test]
fn slowly_decaying_cf_drops_the_origin() {
    // Gamma series with small total spectral mass: |cf| ~ u^{-2f/ν} decays
    // slower than 1/u, so the density is unbounded at 0.
    let spec = SpectralDistribution::with_total_mass(0.2, FrequencyDistribution::uniform(0.0, 1.0).unwrap()).unwrap();
    let m = Model::laplace(1.0, spec).unwrap();
    let d = marginal_density(&[-1.0, 0.0, 1.0], &m).unwrap();
    assert_eq!(d.points.len(), 2);
    assert!(!d.warnings.is_empty());
}

#[test]
fn autocovariance_matches_ensemble_products() {
    let m = laplace_model();
    let gen = Generator::GammaShotnoise { level: Some(30.0) };
    let root = StreamSet::new(77);
    let taus = [0.0, 0.7, 2.5];
    let mut acc = vec![Moments::default(); taus.len()];
    for k in 0..20_000u64 {
        let e = gen.generate(&m, &root.realization(k)).unwrap();
        let x0 = e.value_at(0.0);
        for (a, &t) in acc.iter_mut().zip(&taus) {
            a.push(x0 * e.value_at(t));
        }
    }
    for (a, &t) in acc.iter().zip(&taus) {
        let r = autocovariance(t, &m.spectrum).unwrap();
        assert!((a.mean - r).abs() < 3.0 * a.std_error(), "tau {t}: {} vs {r}", a.mean);
    }
}

#[test]
fn derivative_variance_from_finite_differences() {
    // Var X'(0) = -∂²φ/∂u₂² at 0 = σ₀² E λ² for a unit-mean measure.
    let m = laplace_model();
    let h = 1e-2;
    let c0 = value_derivative_cf(0.0, 0.0, &m).unwrap();
    let c1 = value_derivative_cf(0.0, h, &m).unwrap();
    let curvature = 2.0 * (c0 - c1) / (h * h);
    let expected = 3.0 / 3.0;
    assert!((curvature - expected).abs() < 1e-3, "{curvature}");
    let gen = Generator::GammaShotnoise { level: Some(30.0) };
    let root = StreamSet::new(78);
    for step in [0.1, 0.01] {
        let v: Moments = (0..20_000u64)
            .map(|k| {
                let e = gen.generate(&m, &root.realization(k)).unwrap();
                (e.value_at(step) - e.value_at(0.0)) / step
            })
            .collect();
        assert!((v.variance() - curvature).abs() < 0.1, "h={step}: {}", v.variance());
    }
}

#[test]
fn empirical_cf_within_envelope() {
    let m = laplace_model();
    let gen = Generator::InverseLevy { level: None };
    let root = StreamSet::new(79);
    let n = 100_000u64;
    let xs: Vec<f64> = (0..n).map(|k| gen.generate(&m, &root.realization(k)).unwrap().value_at(0.0)).collect();
    for k in -50..=50 {
        let u = k as f64 * 0.1;
        let phi = laplace_marginal_cf(u, 1.5, 1.5);
        let (re, _) = empirical_cf(&xs, u);
        let env = 3.0 * ((1.0 - phi * phi) / n as f64).sqrt() + 2e-3;
        assert!((re - phi).abs() <= env, "u={u}: {re} vs {phi}");
    }
}

#[test]
fn gil_pelaez_cdf_matches_laplace() {
    let m = laplace_model();
    let inv = CfInversion::new(|u| marginal_cf_fast(u, &m), 10.0).unwrap();
    let b = 1.5f64.sqrt();
    for x in [-4.0, -1.0, -0.2, 0.5, 3.0] {
        let exact = if x < 0.0 { 0.5 * (x / b).exp() } else { 1.0 - 0.5 * (-x / b).exp() };
        assert!((inv.cdf(x) - exact).abs() < 1e-5, "{x}");
    }
    // Density integrates to the CDF increment.
    let mass = integrate(|x| inv.density(x), -1.0, 2.0, Tolerance::rel(1e-9)).unwrap().value;
    assert!((mass - (inv.cdf(2.0) - inv.cdf(-1.0))).abs() < 1e-6);
}

#[test]
fn query_validation() {
    let m = laplace_model();
    assert!(fdd_cf(&[], &[], &m).is_err());
    assert!(laplace_fdd_cf(&[1.0, 2.0], &[0.0], 1.0, &m.spectrum).is_err());
    let g = LevyMeasure::gamma(1.0).unwrap();
    let spec = SpectralDistribution::new(1.0, FrequencyDistribution::exponential(2.0).unwrap()).unwrap();
    assert!(value_derivative_cf(0.3, 0.2, &Model::new(g, spec)).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cfs_are_bounded_and_even(u1 in -4.0f64..4.0, u2 in -4.0f64..4.0, t in 0.0f64..5.0) {
        let m = laplace_model();
        let a = laplace_fdd_cf(&[u1, u2], &[0.0, t], 1.5, &m.spectrum).unwrap();
        let b = laplace_fdd_cf(&[-u1, -u2], &[0.0, t], 1.5, &m.spectrum).unwrap();
        prop_assert!(a > 0.0 && a <= 1.0 + 1e-15);
        prop_assert!((a - b).abs() < 1e-14);
        let c = marginal_cf(u1, &m).unwrap();
        prop_assert!(c <= 1.0 + 1e-15 && (c - marginal_cf(-u1, &m).unwrap()).abs() < 1e-14);
        prop_assert!(quad_form(&[u1, u2], &[0.0, t], 0.4) >= 0.0);
    }
}
