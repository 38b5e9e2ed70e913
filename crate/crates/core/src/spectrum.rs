//! Frequency laws `F_λ` and the spectral distribution `F(0, λ] = σ₀²/2 · F_λ(λ)`.
//!
//! Continuous laws are handled through their quantile function: sampling is
//! inverse-CDF and every `E g(λ)` is computed as `∫₀¹ g(F_λ⁻¹(u)) du`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Result};
use crate::quad::{integrate_many, Tolerance};

/// Law of the (non-negative) harmonic frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrequencyDistribution {
    Uniform { a: f64, b: f64 },
    Exponential { rate: f64 },
    /// Point masses `(l_k, ν_k)`, sorted by location.
    Atoms { points: Vec<(f64, f64)> },
    /// Piecewise-linear quantile through `(u, λ)` knots.
    Table { quantile: Vec<(f64, f64)> },
}

const MASS_TOL: f64 = 1e-9;

impl FrequencyDistribution {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::Uniform { a, b }.validate()
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::Exponential { rate }.validate()
    }

    pub fn atoms(points: &[(f64, f64)]) -> Result<Self> {
        Self::Atoms { points: points.to_vec() }.validate()
    }

    pub fn table(quantile: &[(f64, f64)]) -> Result<Self> {
        Self::Table {
            quantile: quantile.to_vec(),
        }
        .validate()
    }

    /// Checks the invariants and returns the normalized law (atoms sorted).
    pub fn validate(self) -> Result<Self> {
        match self {
            Self::Uniform { a, b } => {
                if !(a >= 0.0) || !(b > a) || !b.is_finite() {
                    return Err(invalid(format!("uniform frequency law needs 0 <= a < b < inf, got [{a}, {b}]")));
                }
                Ok(Self::Uniform { a, b })
            }
            Self::Exponential { rate } => {
                if !(rate > 0.0) || !rate.is_finite() {
                    return Err(invalid(format!("exponential rate must be positive, got {rate}")));
                }
                Ok(Self::Exponential { rate })
            }
            Self::Atoms { mut points } => {
                if points.is_empty() {
                    return Err(invalid("discrete frequency law has no atoms"));
                }
                for (i, &(l, w)) in points.iter().enumerate() {
                    if !(l >= 0.0) || !l.is_finite() || !(w > 0.0) {
                        return Err(invalid(format!("atom {i}: need l >= 0 and weight > 0, got ({l}, {w})")));
                    }
                }
                points.sort_by(|x, y| x.0.total_cmp(&y.0));
                if points.windows(2).any(|w| w[0].0 == w[1].0) {
                    return Err(invalid("atom locations must be distinct"));
                }
                let total: f64 = points.iter().map(|p| p.1).sum();
                if (total - 1.0).abs() > MASS_TOL {
                    return Err(invalid(format!("atom weights must sum to 1, got {total}")));
                }
                Ok(Self::Atoms { points })
            }
            Self::Table { quantile } => {
                if quantile.len() < 2 {
                    return Err(invalid("quantile table needs at least two knots"));
                }
                for (i, &(u, l)) in quantile.iter().enumerate() {
                    if !(0.0..=1.0).contains(&u) || !(l >= 0.0) || !l.is_finite() {
                        return Err(invalid(format!("quantile knot {i}: need u in [0,1] and λ >= 0, got ({u}, {l})")));
                    }
                }
                for (i, w) in quantile.windows(2).enumerate() {
                    if w[1].0 <= w[0].0 || w[1].1 < w[0].1 {
                        return Err(invalid(format!(
                            "quantile knots {i}..{}: u must increase strictly and λ must not decrease",
                            i + 1
                        )));
                    }
                }
                Ok(Self::Table { quantile })
            }
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Self::Atoms { .. })
    }

    /// `F_λ⁻¹(u)` for `u ∈ (0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(domain(format!("quantile needs u in (0, 1), got {u}")));
        }
        Ok(self.quantile_unchecked(u))
    }

    pub(crate) fn quantile_unchecked(&self, u: f64) -> f64 {
        match self {
            Self::Uniform { a, b } => a + (b - a) * u,
            Self::Exponential { rate } => -(-u).ln_1p() / rate,
            Self::Atoms { points } => {
                let mut cum = 0.0;
                for &(l, w) in points {
                    cum += w;
                    if u <= cum {
                        return l;
                    }
                }
                points[points.len() - 1].0
            }
            Self::Table { quantile } => {
                let k = quantile.partition_point(|p| p.0 <= u);
                if k == 0 {
                    return quantile[0].1;
                }
                if k == quantile.len() {
                    return quantile[k - 1].1;
                }
                let (u0, l0) = quantile[k - 1];
                let (u1, l1) = quantile[k];
                l0 + (l1 - l0) * (u - u0) / (u1 - u0)
            }
        }
    }

    /// `F_λ(λ) = P(frequency <= λ)`.
    pub fn cdf(&self, lambda: f64) -> f64 {
        if lambda.is_nan() {
            return f64::NAN;
        }
        match self {
            Self::Uniform { a, b } => ((lambda - a) / (b - a)).clamp(0.0, 1.0),
            Self::Exponential { rate } => {
                if lambda <= 0.0 {
                    0.0
                } else {
                    -(-rate * lambda).exp_m1()
                }
            }
            Self::Atoms { points } => points.iter().take_while(|p| p.0 <= lambda).map(|p| p.1).sum::<f64>().min(1.0),
            Self::Table { quantile } => {
                if lambda < quantile[0].1 {
                    return 0.0;
                }
                let last = quantile[quantile.len() - 1];
                if lambda >= last.1 {
                    return 1.0;
                }
                // Largest u with Q(u) <= λ.
                let k = quantile.partition_point(|p| p.1 <= lambda);
                let (u0, l0) = quantile[k - 1];
                let (u1, l1) = quantile[k];
                u0 + (u1 - u0) * (lambda - l0) / (l1 - l0)
            }
        }
    }

    /// Largest frequency in the support, `None` when unbounded.
    pub fn max_frequency(&self) -> Option<f64> {
        match self {
            Self::Uniform { b, .. } => Some(*b),
            Self::Exponential { .. } => None,
            Self::Atoms { points } => Some(points[points.len() - 1].0),
            Self::Table { quantile } => Some(quantile[quantile.len() - 1].1),
        }
    }

    /// `E g(λ)`: atom sum, or quadrature over `u` after `λ = F_λ⁻¹(u)`.
    pub fn expect<G: Fn(f64) -> f64>(&self, g: G, tol: Tolerance) -> Result<f64> {
        match self {
            Self::Atoms { points } => Ok(points.iter().map(|&(l, w)| w * g(l)).sum()),
            _ => {
                let h = |u: f64| g(self.quantile_unchecked(u));
                let breaks: Vec<f64> = match self {
                    Self::Table { quantile } => {
                        let mut b = vec![0.0];
                        b.extend(quantile.iter().map(|p| p.0).filter(|&u| u > 0.0 && u < 1.0));
                        b.push(1.0);
                        b
                    }
                    Self::Exponential { .. } => vec![0.0, 0.5, 0.9, 0.99, 0.999, 0.9999, 1.0],
                    _ => vec![0.0, 0.5, 1.0],
                };
                Ok(integrate_many(&h, &breaks, tol)?.value)
            }
        }
    }

    /// `E λ²`, finite iff the mean-square derivative of the process exists.
    pub fn second_moment(&self) -> Result<f64> {
        match self {
            Self::Uniform { a, b } => Ok((a * a + a * b + b * b) / 3.0),
            Self::Exponential { rate } => Ok(2.0 / (rate * rate)),
            _ => self.expect(|l| l * l, Tolerance::default()),
        }
    }
}

/// `F(0, λ] = σ₀²/2 · F_λ(λ)`: scale `σ₀` and frequency law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDistribution {
    pub sigma0: f64,
    pub freq: FrequencyDistribution,
}

impl SpectralDistribution {
    pub fn new(sigma0: f64, freq: FrequencyDistribution) -> Result<Self> {
        if !(sigma0 > 0.0) || !sigma0.is_finite() {
            return Err(invalid(format!("sigma0 must be positive and finite, got {sigma0}")));
        }
        Ok(Self {
            sigma0,
            freq: freq.validate()?,
        })
    }

    /// Builds the spectrum with total mass `F(0, ∞) = f_total`.
    pub fn with_total_mass(f_total: f64, freq: FrequencyDistribution) -> Result<Self> {
        if !(f_total > 0.0) {
            return Err(invalid(format!("spectral mass must be positive, got {f_total}")));
        }
        Self::new((2.0 * f_total).sqrt(), freq)
    }

    /// `F(0, ∞) = σ₀²/2`.
    pub fn total_mass(&self) -> f64 {
        0.5 * self.sigma0 * self.sigma0
    }

    /// `F(0, λ]`; zero for `λ <= 0`, `σ₀²/2` at `+∞`.
    pub fn spectral_cdf(&self, lambda: f64) -> f64 {
        if !(lambda > 0.0) {
            return 0.0;
        }
        let at_zero = self.freq.cdf(0.0);
        self.total_mass() * (self.freq.cdf(lambda) - at_zero)
    }
}
