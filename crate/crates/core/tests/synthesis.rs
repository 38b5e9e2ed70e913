use proptest::prelude::*;
use rfharm::levy::LevyMeasure;
use rfharm::rng::{labels, StreamSet};
use rfharm::spectrum::{FrequencyDistribution, SpectralDistribution};
use rfharm::stats::{empirical_cf, Moments};
use rfharm::synthesis::*;

fn uniform_spec(sigma0: f64) -> SpectralDistribution {
    SpectralDistribution::new(sigma0, FrequencyDistribution::uniform(0.0, 1.0).unwrap()).unwrap()
}

#[test]
fn atom_weights_follow_the_inverse() {
    let spec = uniform_spec(1.5);
    let streams = StreamSet::new(3);
    let two = LevyMeasure::atoms(&[(1.0, 2.0)]).unwrap();
    let e = expansion_from_arrivals(&two, &spec, &[0.4, 1.7], 2.0, &streams).unwrap();
    assert_eq!(e.terms.len(), 2);
    assert!(e.terms.iter().all(|t| t.weight == 1.0));
    let r = streams.stream(labels::RAYLEIGH).rayleigh();
    assert!((e.terms[0].amplitude - 1.5 * r).abs() < 1e-15);
    // Mass 1: the second arrival lies past the total mass.
    let one = LevyMeasure::atoms(&[(1.0, 1.0)]).unwrap();
    let e = expansion_from_arrivals(&one, &spec, &[0.4, 1.7], 2.0, &streams).unwrap();
    assert_eq!(e.terms.len(), 1);
}

#[test]
fn gamma_arrival_at_e1_of_one_has_unit_weight() {
    let g = LevyMeasure::gamma(1.0).unwrap();
    let e = expansion_from_arrivals(&g, &uniform_spec(1.0), &[0.219_383_934_4], 1.0, &StreamSet::new(0)).unwrap();
    assert!((e.terms[0].weight - 1.0).abs() < 1e-9);
}

#[test]
fn tiny_horizon_gives_empty_expansion() {
    let g = LevyMeasure::gamma(1.0).unwrap();
    let e = generate_inverse_levy(&g, &uniform_spec(1.0), 1e-12, &StreamSet::new(1)).unwrap();
    assert!(e.terms.is_empty());
    let p = evaluate(&e, 0.0, 0.1, 10).unwrap();
    assert!(p.values.iter().all(|&x| x == 0.0));
    assert!(generate_inverse_levy(&g, &uniform_spec(1.0), 0.0, &StreamSet::new(1)).is_err());
}

#[test]
fn shot_noise_weight_mean_is_one() {
    // E Σ ν V e^{-νΓ} = 1 - e^{-νL}.
    let spec = uniform_spec(1.0);
    let root = StreamSet::new(11);
    let m: Moments = (0..100_000u64)
        .map(|k| {
            let e = generate_gamma_shotnoise(1.0, &spec, 30.0, &root.realization(k)).unwrap();
            e.terms.iter().map(|t| t.weight).sum::<f64>()
        })
        .collect();
    assert!((m.mean - 1.0).abs() < 0.01, "{}", m.mean);
}

#[test]
fn shot_noise_residual_matches_exponential_bound() {
    // Weight carried by arrivals in (L, L'] against e^{-νL} - e^{-νL'}.
    let spec = uniform_spec(1.0);
    let (nu, l, l2) = (1.0, 2.0, 30.0);
    let root = StreamSet::new(12);
    let m: Moments = (0..50_000u64)
        .map(|k| {
            let s = root.realization(k);
            let full = generate_gamma_shotnoise(nu, &spec, l2, &s).unwrap();
            let part = generate_gamma_shotnoise(nu, &spec, l, &s).unwrap();
            full.terms[part.terms.len()..].iter().map(|t| t.weight).sum::<f64>()
        })
        .collect();
    let expected = (-nu * l).exp() - (-nu * l2).exp();
    assert!((m.mean - expected).abs() < 3.0 * m.std_error(), "{} vs {expected}", m.mean);
    let bound = (-20.0f64).exp();
    assert!(bound < 2.1e-9);
}

#[test]
fn conditioned_expansions() {
    let spec = uniform_spec(2.0);
    let atom = LevyMeasure::atoms(&[(1.0, 1.0)]).unwrap();
    let e = generate_conditioned(8, 1.0, &atom, &spec, &StreamSet::new(4)).unwrap();
    assert_eq!(e.terms.len(), 8);
    assert!(e.terms.iter().all(|t| t.weight == 1.0));
    assert!(generate_conditioned(0, 1.0, &atom, &spec, &StreamSet::new(4)).is_err());
    let s = generate_conditioned_shotnoise(5, 3.0, 1.0, &spec, &StreamSet::new(4)).unwrap();
    assert_eq!(s.terms.len(), 5);
}

#[test]
fn conditioned_second_moment_matches_quadrature() {
    let g = LevyMeasure::gamma(1.0).unwrap();
    let (sigma0, level) = (1.3, 5.0);
    let spec = uniform_spec(sigma0);
    // Oracle 1: (1/L) ∫₀^L Λ⁻¹(g) dg by quadrature of the inverse.
    let quad = rfharm::quad::integrate(|x: f64| g.tail_inverse(x).unwrap(), 0.0, level, rfharm::quad::Tolerance::rel(1e-9))
        .unwrap()
        .value
        / level;
    // Oracle 2: layer-cake identity, ∫₀^L Λ⁻¹ = ∫_{[c,∞)} x Λ(dx) = e^{-c}.
    let c = g.tail_inverse(level).unwrap();
    assert!((quad - (-c).exp() / level).abs() < 1e-8);
    let root = StreamSet::new(5);
    let m: Moments = (0..40_000u64)
        .flat_map(|k| {
            generate_conditioned(4, level, &g, &spec, &root.realization(k))
                .unwrap()
                .terms
                .into_iter()
                .map(|t| t.amplitude * t.amplitude)
        })
        .collect();
    let expected = 2.0 * sigma0 * sigma0 * quad;
    assert!((m.mean - expected).abs() < 3.0 * m.std_error(), "{} vs {expected}", m.mean);
}

#[test]
fn discrete_spectrum_variance() {
    let atoms = FrequencyDistribution::atoms(&[(0.5, 0.2), (1.0, 0.5), (3.0, 0.3)]).unwrap();
    let spec = SpectralDistribution::new(1.4, atoms).unwrap();
    let root = StreamSet::new(6);
    let m: Moments = (0..100_000u64)
        .map(|k| {
            let e = generate_discrete(&spec, &GammaIncrements { nu: 1.0 }, &root.realization(k)).unwrap();
            assert_eq!(e.terms.len(), 3);
            let x = e.value_at(0.0);
            x * x
        })
        .collect();
    assert!((m.mean - 1.96).abs() < 3.0 * m.std_error(), "{}", m.mean);
    let single = SpectralDistribution::new(2.0, FrequencyDistribution::atoms(&[(1.5, 1.0)]).unwrap()).unwrap();
    let e = generate_discrete(&single, &DeterministicIncrements, &StreamSet::new(9)).unwrap();
    assert_eq!(e.terms[0].frequency, 1.5);
    assert_eq!(e.terms[0].weight, 1.0);
    assert!(generate_discrete(&uniform_spec(1.0), &DeterministicIncrements, &StreamSet::new(9)).is_err());
}

#[test]
fn series_increments_have_unit_mean() {
    let sampler = SeriesIncrements {
        measure: LevyMeasure::gamma(1.0).unwrap(),
        level: 40.0,
    };
    let mut s = rfharm::RandomStream::new(8, "inc");
    let m: Moments = (0..20_000).map(|_| sampler.sample(0.3, &mut s).unwrap()).collect();
    // Gamma(shape 0.3, scale 1): mean 0.3, variance 0.3.
    assert!((m.mean - 0.3).abs() < 3.0 * m.std_error());
    assert!((m.variance() - 0.3).abs() < 0.03);
}

#[test]
fn gaussian_limit_at_unit_scale_is_the_base_series() {
    let g = LevyMeasure::gamma(1.0).unwrap();
    let spec = uniform_spec(1.0);
    let s = StreamSet::new(21);
    let a = generate_gaussian_limit(&g, &spec, 1.0, 6.0, &s).unwrap();
    let b = generate_inverse_levy(&g, &spec, 6.0, &s).unwrap();
    assert_eq!(a.terms, b.terms);
}

#[test]
fn ensemble_variance_matches_retained_fraction() {
    let spec = SpectralDistribution::with_total_mass(1.5, FrequencyDistribution::uniform(0.0, 1.0).unwrap()).unwrap();
    let model = Model::laplace(1.5, spec).unwrap();
    let level = 2.0;
    let frac = model.measure.retained_fraction(level).unwrap();
    let root = StreamSet::new(31);
    let m: Moments = (0..100_000u64)
        .map(|k| {
            let e = generate_inverse_levy(&model.measure, &model.spectrum, level, &root.realization(k)).unwrap();
            let x = e.value_at(0.0);
            x * x
        })
        .collect();
    let expected = 3.0 * frac;
    assert!(frac < 0.99);
    assert!((m.mean - expected).abs() < 3.0 * m.std_error(), "{} vs {expected}", m.mean);
}

#[test]
fn joint_cf_is_shift_invariant() {
    let spec = SpectralDistribution::with_total_mass(1.5, FrequencyDistribution::uniform(0.0, 1.0).unwrap()).unwrap();
    let model = Model::laplace(1.5, spec).unwrap();
    let gen = Generator::InverseLevy { level: None };
    let n = 20_000u64;
    let pairs = |root: StreamSet, s: f64| -> Vec<(f64, f64)> {
        (0..n)
            .map(|k| {
                let e = gen.generate(&model, &root.realization(k)).unwrap();
                (e.value_at(s), e.value_at(s + 1.0))
            })
            .collect()
    };
    let base = pairs(StreamSet::new(40), 0.0);
    for (seed, s) in [(41, 0.3), (42, 1.7)] {
        let shifted = pairs(StreamSet::new(seed), s);
        for (u1, u2) in [(0.5, 0.0), (0.3, 0.4), (-0.6, 0.2), (1.0, 1.0)] {
            let proj = |v: &[(f64, f64)]| v.iter().map(|&(a, b)| u1 * a + u2 * b).collect::<Vec<_>>();
            let (a, _) = empirical_cf(&proj(&base), 1.0);
            let (b, _) = empirical_cf(&proj(&shifted), 1.0);
            // Two independent estimates, each with variance ≤ 1/(2n).
            assert!((a - b).abs() < 4.0 / (n as f64).sqrt(), "s={s} u=({u1},{u2}): {a} vs {b}");
        }
    }
}

#[test]
fn expansion_json_round_trip() {
    let g = LevyMeasure::gamma(1.0).unwrap();
    let e = generate_inverse_levy(&g, &uniform_spec(1.0), 5.0, &StreamSet::new(2)).unwrap();
    let back = HarmonicExpansion::from_json(&e.to_json().unwrap()).unwrap();
    assert_eq!(back, e);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn inverse_levy_weights_are_non_increasing(seed in any::<u64>(), level in 0.5f64..20.0) {
        let g = LevyMeasure::gamma(1.5).unwrap();
        let e = generate_inverse_levy(&g, &uniform_spec(1.0), level, &StreamSet::new(seed)).unwrap();
        for w in e.terms.windows(2) {
            prop_assert!(w[0].weight >= w[1].weight);
        }
        for t in &e.terms {
            prop_assert!(t.amplitude >= 0.0 && t.amplitude.is_finite());
            prop_assert!((0.0..std::f64::consts::TAU).contains(&t.phase));
        }
    }

    #[test]
    fn truncations_are_prefixes(seed in any::<u64>(), l1 in 0.5f64..10.0, extra in 0.0f64..10.0) {
        let g = LevyMeasure::gamma(1.0).unwrap();
        let spec = uniform_spec(1.0);
        let s = StreamSet::new(seed);
        let short = generate_inverse_levy(&g, &spec, l1, &s).unwrap();
        let long = generate_inverse_levy(&g, &spec, l1 + extra, &s).unwrap();
        prop_assert_eq!(&long.terms[..short.terms.len()], &short.terms[..]);
        let short = generate_gamma_shotnoise(1.0, &spec, l1, &s).unwrap();
        let long = generate_gamma_shotnoise(1.0, &spec, l1 + extra, &s).unwrap();
        prop_assert_eq!(&long.terms[..short.terms.len()], &short.terms[..]);
    }

    #[test]
    fn paths_are_bounded_by_amplitude_sum(seed in any::<u64>(), t0 in -50.0f64..50.0) {
        let g = LevyMeasure::gamma(1.0).unwrap();
        let e = generate_inverse_levy(&g, &uniform_spec(2.0), 8.0, &StreamSet::new(seed)).unwrap();
        let bound = e.amplitude_sum();
        let p = evaluate(&e, t0, 0.37, 200).unwrap();
        prop_assert!(p.values.iter().all(|x| x.is_finite() && x.abs() <= bound * (1.0 + 1e-12)));
    }

    #[test]
    fn generation_is_reproducible(seed in any::<u64>()) {
        let g = LevyMeasure::gamma(1.0).unwrap();
        let spec = uniform_spec(1.0);
        let a = generate_inverse_levy(&g, &spec, 6.0, &StreamSet::new(seed)).unwrap();
        let b = generate_inverse_levy(&g, &spec, 6.0, &StreamSet::new(seed)).unwrap();
        let (mut x, mut y) = (Vec::new(), Vec::new());
        evaluate(&a, 0.0, 0.1, 64).unwrap().write_binary(&mut x).unwrap();
        evaluate(&b, 0.0, 0.1, 64).unwrap().write_binary(&mut y).unwrap();
        prop_assert_eq!(x, y);
    }
}
