//! Harmonic expansions `X(t) = Σ ξ_i cos(λ_i t + φ_i)` and their evaluation.
//!
//! Every generator draws its primitive variates from labelled substreams of
//! one [`StreamSet`], so the i-th retained term uses the i-th draw of each
//! stream whatever the truncation level. Raising `L` therefore only appends
//! terms.

use std::io::{self, Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::levy::LevyMeasure;
use crate::rng::{labels, PhaseLaw, RandomStream, StreamSet};
use crate::spectrum::{FrequencyDistribution, SpectralDistribution};

/// One harmonic. `weight` is the subordinator jump behind the amplitude,
/// `amplitude = σ₀ √weight · R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    InverseLevy,
    GammaShotnoise { nu: f64 },
    Conditioned { m: usize },
    ConditionedShotnoise { m: usize, nu: f64 },
    Discrete,
    GaussianLimit { scale: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionMeta {
    pub method: Method,
    /// Arrival horizon (or conditioning level) used.
    pub truncation: f64,
    pub sigma0: f64,
    pub measure: String,
    pub seed: u64,
    #[serde(default)]
    pub phase_law: PhaseLaw,
}

/// A realized finite harmonic sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicExpansion {
    pub terms: Vec<Term>,
    pub meta: ExpansionMeta,
}

/// Samples of a realization on the grid `t0 + j·dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalPath {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
    pub provenance: Option<ExpansionMeta>,
}

/// The measure/spectrum pair that defines a process.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub measure: LevyMeasure,
    pub spectrum: SpectralDistribution,
}

impl Model {
    pub fn new(measure: LevyMeasure, spectrum: SpectralDistribution) -> Self {
        Self { measure, spectrum }
    }

    /// Generalized Laplace model: marginal CF `(1 + ν u²)^{-F(0,∞)/ν}`.
    ///
    /// The series measure is the Lévy measure of `G(f)/f` with `f = F(0,∞)`,
    /// i.e. gamma with parameter `ν / f`.
    pub fn laplace(nu: f64, spectrum: SpectralDistribution) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(invalid(format!("laplace nu must be positive, got {nu}")));
        }
        let measure = LevyMeasure::gamma(nu / spectrum.total_mass())?;
        Ok(Self { measure, spectrum })
    }

    /// `E X(0)²` of the untruncated process, `σ₀² ∫ x Λ(dx)`.
    pub fn variance(&self) -> Result<f64> {
        Ok(self.spectrum.sigma0.powi(2) * self.measure.mean()?)
    }
}

struct TermDraws {
    freq: RandomStream,
    rayleigh: RandomStream,
    phase: RandomStream,
    phase_law: PhaseLaw,
}

impl TermDraws {
    fn new(streams: &StreamSet) -> Self {
        Self {
            freq: streams.stream(labels::FREQUENCY),
            rayleigh: streams.stream(labels::RAYLEIGH),
            phase: streams.stream(labels::PHASE),
            phase_law: streams.phase_law,
        }
    }

    fn term(&mut self, sigma0: f64, weight: f64, law: &FrequencyDistribution) -> Term {
        let frequency = law.quantile_unchecked(self.freq.uniform01());
        self.term_at(sigma0, weight, frequency)
    }

    fn term_at(&mut self, sigma0: f64, weight: f64, frequency: f64) -> Term {
        let r = self.rayleigh.rayleigh();
        let phase = self.phase_law.sample(&mut self.phase);
        Term {
            amplitude: sigma0 * weight.sqrt() * r,
            frequency,
            phase,
            weight,
        }
    }
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0) || !level.is_finite() {
        return Err(invalid(format!("truncation level must be positive and finite, got {level}")));
    }
    Ok(())
}

fn meta(method: Method, truncation: f64, spec: &SpectralDistribution, measure: String, streams: &StreamSet) -> ExpansionMeta {
    ExpansionMeta {
        method,
        truncation,
        sigma0: spec.sigma0,
        measure,
        seed: streams.seed,
        phase_law: streams.phase_law,
    }
}

/// Inverse Lévy measure series over the given arrivals. Zero weights (arrivals
/// past the total mass) are dropped.
pub fn expansion_from_arrivals(
    measure: &LevyMeasure,
    spec: &SpectralDistribution,
    arrivals: &[f64],
    level: f64,
    streams: &StreamSet,
) -> Result<HarmonicExpansion> {
    let mut draws = TermDraws::new(streams);
    let mut terms = Vec::with_capacity(arrivals.len());
    for &g in arrivals {
        let w = measure.tail_inverse(g)?;
        if w <= 0.0 {
            break;
        }
        terms.push(draws.term(spec.sigma0, w, &spec.freq));
    }
    Ok(HarmonicExpansion {
        terms,
        meta: meta(Method::InverseLevy, level, spec, measure.descriptor(), streams),
    })
}

/// `σ₀ Σ_{Γ_i ≤ L} √(Λ⁻¹(Γ_i)) R_i cos(λ_i t + φ_i)`.
pub fn generate_inverse_levy(
    measure: &LevyMeasure,
    spec: &SpectralDistribution,
    level: f64,
    streams: &StreamSet,
) -> Result<HarmonicExpansion> {
    check_level(level)?;
    let arrivals = streams.stream(labels::ARRIVALS).poisson_arrivals(level)?;
    expansion_from_arrivals(measure, spec, &arrivals.times, level, streams)
}

/// Gamma shot-noise series `σ₀ √ν Σ_{Γ_i ≤ L} e^{-νΓ_i/2} √V_i R_i cos(λ_i t + φ_i)`.
///
/// Truncation at `L` leaves `E Σ_{Γ_i > L} ν V_i e^{-νΓ_i} = e^{-νL}` of the weight.
pub fn generate_gamma_shotnoise(
    nu: f64,
    spec: &SpectralDistribution,
    level: f64,
    streams: &StreamSet,
) -> Result<HarmonicExpansion> {
    if !(nu > 0.0) {
        return Err(invalid(format!("nu must be positive, got {nu}")));
    }
    check_level(level)?;
    let arrivals = streams.stream(labels::ARRIVALS).poisson_arrivals(level)?;
    let mut shots = streams.stream(labels::SHOT);
    let mut draws = TermDraws::new(streams);
    let terms = arrivals
        .times
        .iter()
        .map(|&g| {
            let w = nu * (-nu * g).exp() * shots.exponential();
            draws.term(spec.sigma0, w, &spec.freq)
        })
        .collect();
    Ok(HarmonicExpansion {
        terms,
        meta: meta(Method::GammaShotnoise { nu }, level, spec, format!("gamma(nu={nu})"), streams),
    })
}

fn check_count(m: usize) -> Result<()> {
    if m == 0 {
        return Err(invalid("conditioned expansion needs m >= 1"));
    }
    Ok(())
}

/// The series conditioned on exactly `m` arrivals below `L`:
/// weights `Λ⁻¹(L U_i)` with i.i.d. uniform `U_i`.
pub fn generate_conditioned(
    m: usize,
    level: f64,
    measure: &LevyMeasure,
    spec: &SpectralDistribution,
    streams: &StreamSet,
) -> Result<HarmonicExpansion> {
    check_count(m)?;
    check_level(level)?;
    let mut us = streams.stream(labels::CONDITIONED);
    let mut draws = TermDraws::new(streams);
    let mut terms = Vec::with_capacity(m);
    for _ in 0..m {
        let w = measure.tail_inverse(level * us.uniform01())?;
        terms.push(draws.term(spec.sigma0, w, &spec.freq));
    }
    Ok(HarmonicExpansion {
        terms,
        meta: meta(Method::Conditioned { m }, level, spec, measure.descriptor(), streams),
    })
}

/// Gamma shot-noise form of the conditioned series: weights `ν e^{-LνU_i} V_i`.
pub fn generate_conditioned_shotnoise(
    m: usize,
    level: f64,
    nu: f64,
    spec: &SpectralDistribution,
    streams: &StreamSet,
) -> Result<HarmonicExpansion> {
    check_count(m)?;
    check_level(level)?;
    if !(nu > 0.0) {
        return Err(invalid(format!("nu must be positive, got {nu}")));
    }
    let mut us = streams.stream(labels::CONDITIONED);
    let mut shots = streams.stream(labels::SHOT);
    let mut draws = TermDraws::new(streams);
    let mut terms = Vec::with_capacity(m);
    for _ in 0..m {
        let w = nu * (-level * nu * us.uniform01()).exp() * shots.exponential();
        terms.push(draws.term(spec.sigma0, w, &spec.freq));
    }
    Ok(HarmonicExpansion {
        terms,
        meta: meta(Method::ConditionedShotnoise { m, nu }, level, spec, format!("gamma(nu={nu})"), streams),
    })
}

/// Increments `Y` of a subordinator over a time span `mass`, normalized so
/// that `E Y = mass` when the underlying measure has unit mean.
pub trait SubordinatorIncrements {
    fn sample(&self, mass: f64, stream: &mut RandomStream) -> Result<f64>;
    fn describe(&self) -> String;
}

/// `Y = mass`: the Gaussian case.
#[derive(Debug, Clone, Copy, Default)]
pub struct DeterministicIncrements;

impl SubordinatorIncrements for DeterministicIncrements {
    fn sample(&self, mass: f64, _: &mut RandomStream) -> Result<f64> {
        Ok(mass)
    }

    fn describe(&self) -> String {
        "deterministic".into()
    }
}

/// Gamma increments with shape `mass/ν` and scale `ν`.
#[derive(Debug, Clone, Copy)]
pub struct GammaIncrements {
    pub nu: f64,
}

impl SubordinatorIncrements for GammaIncrements {
    fn sample(&self, mass: f64, stream: &mut RandomStream) -> Result<f64> {
        stream.gamma(mass / self.nu, self.nu)
    }

    fn describe(&self) -> String {
        format!("gamma(nu={})", self.nu)
    }
}

/// Increments of an arbitrary measure by its own truncated inverse Lévy series.
#[derive(Debug, Clone)]
pub struct SeriesIncrements {
    pub measure: LevyMeasure,
    /// Arrival horizon per unit of mass.
    pub level: f64,
}

impl SubordinatorIncrements for SeriesIncrements {
    fn sample(&self, mass: f64, stream: &mut RandomStream) -> Result<f64> {
        let mut total = 0.0;
        let mut g = 0.0;
        loop {
            g += stream.exponential();
            if g > self.level * mass {
                return Ok(total);
            }
            let w = self.measure.tail_inverse(g / mass)?;
            if w <= 0.0 {
                return Ok(total);
            }
            total += w;
        }
    }

    fn describe(&self) -> String {
        format!("series({})", self.measure)
    }
}

/// Fixed frequencies `l_k` with amplitudes `σ₀ √Y_k R_k`, `Y_k` an increment
/// over mass `ν_k`.
pub fn generate_discrete(
    spec: &SpectralDistribution,
    sampler: &dyn SubordinatorIncrements,
    streams: &StreamSet,
) -> Result<HarmonicExpansion> {
    let FrequencyDistribution::Atoms { points } = &spec.freq else {
        return Err(invalid("discrete generator needs an atomic frequency law"));
    };
    let mut incr = streams.stream(labels::SUBORDINATOR);
    let mut draws = TermDraws::new(streams);
    let mut terms = Vec::with_capacity(points.len());
    for &(l, mass) in points {
        let y = sampler.sample(mass, &mut incr)?;
        terms.push(draws.term_at(spec.sigma0, y, l));
    }
    Ok(HarmonicExpansion {
        terms,
        meta: meta(Method::Discrete, 1.0, spec, sampler.describe(), streams),
    })
}

/// `X_L/√L`: the series of the measure `L·Λ` with arrivals up to
/// `horizon·L`, amplitudes divided by `√L`.
pub fn generate_gaussian_limit(
    measure: &LevyMeasure,
    spec: &SpectralDistribution,
    scale: f64,
    horizon: f64,
    streams: &StreamSet,
) -> Result<HarmonicExpansion> {
    check_level(horizon)?;
    let scaled = measure.scale(scale)?;
    let mut e = generate_inverse_levy(&scaled, spec, horizon * scale, streams)?;
    let k = scale.sqrt();
    for t in &mut e.terms {
        t.amplitude /= k;
        t.weight /= scale;
    }
    e.meta.method = Method::GaussianLimit { scale };
    e.meta.measure = measure.descriptor();
    Ok(e)
}

/// Law used to draw the discrete-spectrum increments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IncrementLaw {
    Deterministic,
    /// Gamma increments matching the model's gamma measure.
    Gamma,
    /// Inverse Lévy series of the model's measure.
    Series,
}

/// A generator with its truncation settings; `None` levels use the defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Generator {
    InverseLevy { level: Option<f64> },
    GammaShotnoise { level: Option<f64> },
    Conditioned { m: usize, level: Option<f64> },
    ConditionedShotnoise { m: usize, level: Option<f64> },
    Discrete { increments: IncrementLaw },
    GaussianLimit { scale: f64, level: Option<f64> },
}

/// Residual weight share left by the default shot-noise truncation.
const SHOT_RESIDUAL: f64 = 1e-3;

fn gamma_nu(model: &Model) -> Result<f64> {
    model
        .measure
        .gamma_nu()
        .ok_or_else(|| invalid(format!("shot-noise generators need a gamma measure, got {}", model.measure)))
}

impl Generator {
    /// Effective truncation level for `model`.
    pub fn level(&self, model: &Model) -> Result<f64> {
        match *self {
            Generator::InverseLevy { level }
            | Generator::Conditioned { level, .. }
            | Generator::GaussianLimit { level, .. } => match level {
                Some(l) => Ok(l),
                None => model.measure.default_truncation(),
            },
            Generator::GammaShotnoise { level } | Generator::ConditionedShotnoise { level, .. } => match level {
                Some(l) => Ok(l),
                None => Ok(-SHOT_RESIDUAL.ln() / gamma_nu(model)?),
            },
            Generator::Discrete { .. } => Ok(1.0),
        }
    }

    pub fn generate(&self, model: &Model, streams: &StreamSet) -> Result<HarmonicExpansion> {
        let level = self.level(model)?;
        let spec = &model.spectrum;
        match *self {
            Generator::InverseLevy { .. } => generate_inverse_levy(&model.measure, spec, level, streams),
            Generator::GammaShotnoise { .. } => generate_gamma_shotnoise(gamma_nu(model)?, spec, level, streams),
            Generator::Conditioned { m, .. } => generate_conditioned(m, level, &model.measure, spec, streams),
            Generator::ConditionedShotnoise { m, .. } => {
                generate_conditioned_shotnoise(m, level, gamma_nu(model)?, spec, streams)
            }
            Generator::Discrete { increments } => match increments {
                IncrementLaw::Deterministic => generate_discrete(spec, &DeterministicIncrements, streams),
                IncrementLaw::Gamma => generate_discrete(spec, &GammaIncrements { nu: gamma_nu(model)? }, streams),
                IncrementLaw::Series => {
                    let sampler = SeriesIncrements {
                        measure: model.measure.clone(),
                        level: model.measure.default_truncation()?,
                    };
                    generate_discrete(spec, &sampler, streams)
                }
            },
            Generator::GaussianLimit { scale, .. } => {
                generate_gaussian_limit(&model.measure, spec, scale, level, streams)
            }
        }
    }
}

/// Work size above which evaluation is split across threads.
const PARALLEL_WORK: usize = 1 << 16;

impl HarmonicExpansion {
    pub fn value_at(&self, t: f64) -> f64 {
        self.terms.iter().map(|h| h.amplitude * (h.frequency * t + h.phase).cos()).sum()
    }

    /// `Σ ξ_i`, a pointwise bound on `|X(t)|`.
    pub fn amplitude_sum(&self) -> f64 {
        self.terms.iter().map(|h| h.amplitude).sum()
    }

    pub fn max_frequency(&self) -> f64 {
        self.terms.iter().map(|h| h.frequency).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| invalid(format!("serializing expansion: {e}")))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| invalid(format!("parsing expansion: {e}")))
    }
}

/// Samples `expansion` at `t0 + j·dt`, `j = 0..n`, by direct summation.
pub fn evaluate(expansion: &HarmonicExpansion, t0: f64, dt: f64, n: usize) -> Result<SignalPath> {
    if n == 0 {
        return Err(invalid("evaluation grid needs n >= 1"));
    }
    if !(dt > 0.0) || !dt.is_finite() || !t0.is_finite() {
        return Err(invalid(format!("evaluation grid needs finite t0 and dt > 0, got t0={t0}, dt={dt}")));
    }
    let at = |j: usize| expansion.value_at(t0 + j as f64 * dt);
    let values = if n * expansion.terms.len() >= PARALLEL_WORK {
        (0..n).into_par_iter().map(at).collect()
    } else {
        (0..n).map(at).collect()
    };
    Ok(SignalPath {
        t0,
        dt,
        values,
        provenance: Some(expansion.meta.clone()),
    })
}

impl SignalPath {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt
    }

    /// Horizon `T = (n - 1)·dt`.
    pub fn horizon(&self) -> f64 {
        (self.values.len().saturating_sub(1)) as f64 * self.dt
    }

    /// CSV with header `t,x`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,x")?;
        for (j, x) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", self.time(j), x)?;
        }
        Ok(())
    }

    /// Little-endian `t0: f64, dt: f64, n: u64` followed by `n` f64 values.
    pub fn write_binary<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(&self.t0.to_le_bytes())?;
        w.write_all(&self.dt.to_le_bytes())?;
        w.write_all(&(self.values.len() as u64).to_le_bytes())?;
        for x in &self.values {
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> io::Result<Self> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        let t0 = f64::from_le_bytes(b);
        r.read_exact(&mut b)?;
        let dt = f64::from_le_bytes(b);
        r.read_exact(&mut b)?;
        let n = u64::from_le_bytes(b) as usize;
        let mut values = Vec::with_capacity(n.min(1 << 24));
        for _ in 0..n {
            r.read_exact(&mut b)?;
            values.push(f64::from_le_bytes(b));
        }
        Ok(Self {
            t0,
            dt,
            values,
            provenance: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn single(amplitude: f64, frequency: f64, phase: f64) -> HarmonicExpansion {
        HarmonicExpansion {
            terms: vec![Term {
                amplitude,
                frequency,
                phase,
                weight: 1.0,
            }],
            meta: ExpansionMeta {
                method: Method::InverseLevy,
                truncation: 1.0,
                sigma0: 1.0,
                measure: "test".into(),
                seed: 0,
                phase_law: PhaseLaw::Uniform,
            },
        }
    }

    #[test]
    fn evaluate_elementary_sums() {
        let p = evaluate(&single(1.0, 0.0, 0.0), 0.0, 0.1, 5).unwrap();
        assert!(p.values.iter().all(|&x| x == 1.0));
        let p = evaluate(&single(2.0, PI, 0.0), 1.0, 1.0, 1).unwrap();
        assert!((p.values[0] + 2.0).abs() < 1e-15);
        let mut e = single(1.0, 1.0, 0.0);
        e.terms.push(Term {
            phase: PI,
            ..e.terms[0]
        });
        let p = evaluate(&e, 0.0, 0.37, 50).unwrap();
        assert!(p.values.iter().all(|x| x.abs() < 1e-14));
        assert!(evaluate(&e, 0.0, 0.1, 0).is_err());
    }

    #[test]
    fn binary_round_trip() {
        let p = evaluate(&single(1.3, 0.7, 0.2), -1.0, 0.05, 33).unwrap();
        let mut buf = Vec::new();
        p.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 24 + 33 * 8);
        let q = SignalPath::read_binary(&buf[..]).unwrap();
        assert_eq!(q.values, p.values);
        assert_eq!((q.t0, q.dt), (p.t0, p.dt));
    }

    #[test]
    fn csv_layout() {
        let p = evaluate(&single(1.0, 0.0, 0.0), 0.0, 0.5, 3).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,x\n0,1\n0.5,1\n1,1\n");
    }
}
