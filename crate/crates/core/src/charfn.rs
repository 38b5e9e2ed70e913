//! Characteristic functions, marginal density and autocovariance of the model.
//!
//! Conditionally on the weights and frequencies each harmonic is centred
//! normal, so for `q(λ) = |Σ_j u_j e^{iλt_j}|²`
//!
//! ```text
//! E exp(i Σ u_j X(t_j)) = exp(∫₀¹ ∫ (e^{-x f q(F_λ⁻¹(v))} - 1) Λ(dx) dv),   f = σ₀²/2.
//! ```

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, invalid, Result};
use crate::quad::{kronrod_nodes, Tolerance};
use crate::spectrum::SpectralDistribution;
use crate::synthesis::Model;

/// Tolerance of the outer (frequency) integrals.
pub const OUTER_TOL: f64 = 1e-8;
/// CF magnitude below which the inversion integral is cut.
pub const CF_CUTOFF: f64 = 1e-12;
/// Largest inversion cut-off.
pub const MAX_INVERSION_U: f64 = 1e4;

fn check_query(u: &[f64], times: &[f64]) -> Result<()> {
    if u.is_empty() || u.len() != times.len() {
        return Err(invalid(format!(
            "cf query needs equally long, non-empty u and times (got {} and {})",
            u.len(),
            times.len()
        )));
    }
    Ok(())
}

/// `(Σ u_j cos λt_j)² + (Σ u_j sin λt_j)²`.
pub fn quad_form(u: &[f64], times: &[f64], lambda: f64) -> f64 {
    let (mut c, mut s) = (0.0, 0.0);
    for (&uj, &tj) in u.iter().zip(times) {
        let (sn, cs) = (lambda * tj).sin_cos();
        c += uj * cs;
        s += uj * sn;
    }
    c * c + s * s
}

/// Joint CF of `(X(t_1), …, X(t_n))` by double quadrature.
pub fn fdd_cf(u: &[f64], times: &[f64], model: &Model) -> Result<f64> {
    check_query(u, times)?;
    if u.iter().all(|&x| x == 0.0) {
        return Ok(1.0);
    }
    exponent_cf(model, |lambda| quad_form(u, times, lambda))
}

/// `exp(-∫₀¹ ψ(f·q(F_λ⁻¹(v))) dv)` with `ψ` the Laplace exponent by quadrature.
fn exponent_cf<Q: Fn(f64) -> f64>(model: &Model, q: Q) -> Result<f64> {
    let f = model.spectrum.total_mass();
    let err = std::cell::Cell::new(None);
    let integrand = |lambda: f64| match model.measure.laplace_exponent_quad(f * q(lambda)) {
        Ok(v) => v,
        Err(e) => {
            err.set(Some(e));
            f64::NAN
        }
    };
    let value = model.spectrum.freq.expect(integrand, Tolerance::rel(OUTER_TOL).with_abs(1e-14));
    if let Some(e) = err.take() {
        return Err(e);
    }
    Ok((-value?).exp())
}

/// CF of `X(0)` through the same double-quadrature route.
pub fn marginal_cf(u: f64, model: &Model) -> Result<f64> {
    fdd_cf(&[u], &[0.0], model)
}

/// CF of `X(0)` using the measure's closed-form Laplace exponent when it has one.
pub fn marginal_cf_fast(u: f64, model: &Model) -> Result<f64> {
    let f = model.spectrum.total_mass();
    Ok((-model.measure.laplace_exponent(f * u * u)?).exp())
}

/// `(1 + ν u²)^{-f/ν}`.
pub fn laplace_marginal_cf(u: f64, nu: f64, f_total: f64) -> f64 {
    (1.0 + nu * u * u).powf(-f_total / nu)
}

/// Joint CF of the generalized Laplace model,
/// `exp(-(1/ν) ∫ ln(1 + ν q(λ)) F(dλ))` with `F` of mass `σ₀²/2`.
pub fn laplace_fdd_cf(u: &[f64], times: &[f64], nu: f64, spec: &SpectralDistribution) -> Result<f64> {
    check_query(u, times)?;
    if !(nu > 0.0) {
        return Err(invalid(format!("nu must be positive, got {nu}")));
    }
    if u.iter().all(|&x| x == 0.0) {
        return Ok(1.0);
    }
    let mean_log = spec.freq.expect(
        |lambda| (nu * quad_form(u, times, lambda)).ln_1p(),
        Tolerance::rel(OUTER_TOL).with_abs(1e-14),
    )?;
    Ok((-spec.total_mass() * mean_log / nu).exp())
}

/// Joint CF of `(X(0), X'(0))`: `q(λ) = u₁² + u₂² λ²`.
pub fn value_derivative_cf(u1: f64, u2: f64, model: &Model) -> Result<f64> {
    let m2 = model.spectrum.freq.second_moment()?;
    if !m2.is_finite() {
        return Err(domain("derivative CF needs a finite second frequency moment E λ²"));
    }
    if u1 == 0.0 && u2 == 0.0 {
        return Ok(1.0);
    }
    exponent_cf(model, |lambda| u1 * u1 + u2 * u2 * lambda * lambda)
}

/// `σ₀² E cos(λτ)`; equals the process autocovariance when `∫ x Λ(dx) = 1`.
pub fn autocovariance(tau: f64, spec: &SpectralDistribution) -> Result<f64> {
    let s2 = spec.sigma0 * spec.sigma0;
    if tau == 0.0 {
        return Ok(s2);
    }
    Ok(s2 * spec.freq.expect(|l| (l * tau).cos(), Tolerance::rel(OUTER_TOL).with_abs(1e-15))?)
}

/// Fourier inversion of a real, even characteristic function on `[0, U]`
/// with composite 61-point Kronrod panels; CF values are computed once.
#[derive(Debug, Clone)]
pub struct CfInversion {
    /// `(u, w · cf(u))` over the panels.
    nodes: Vec<(f64, f64)>,
    /// Upper limit `U` of the inversion integral.
    pub cutoff: f64,
    /// Estimate of `(1/π) ∫_U^∞ |cf|`.
    pub truncation_error: f64,
    /// Estimated power decay `|cf(u)| ~ u^{-p}` near the cut-off.
    pub decay_exponent: f64,
}

impl CfInversion {
    /// Prepares the inversion for arguments with `|x| ≤ x_max`.
    pub fn new<C: Fn(f64) -> Result<f64>>(cf: C, x_max: f64) -> Result<Self> {
        let mut cutoff = 1.0;
        while cf(cutoff)?.abs() >= CF_CUTOFF && cutoff < MAX_INVERSION_U {
            cutoff = (cutoff * 2.0).min(MAX_INVERSION_U);
        }
        let (a, b) = (cf(0.5 * cutoff)?.abs(), cf(cutoff)?.abs());
        let decay_exponent = if a > 0.0 && b > 0.0 { (a / b).log2() } else { f64::INFINITY };
        let truncation_error = if b < CF_CUTOFF {
            0.0
        } else if decay_exponent > 1.0 {
            cutoff * b / ((decay_exponent - 1.0) * PI)
        } else {
            f64::INFINITY
        };
        // Each panel spans at most a few periods of cos(u x_max).
        let width = (8.0 * PI / x_max.abs().max(1e-3)).min(1.0);
        let panels = (cutoff / width).ceil() as usize;
        let h = cutoff / panels as f64;
        let mut nodes = Vec::with_capacity(panels * 61);
        for k in 0..panels {
            for (u, w) in kronrod_nodes(k as f64 * h, (k + 1) as f64 * h) {
                nodes.push((u, w * cf(u)?));
            }
        }
        Ok(Self {
            nodes,
            cutoff,
            truncation_error,
            decay_exponent,
        })
    }

    /// `(1/π) ∫₀^U cf(u) cos(ux) du`.
    pub fn density(&self, x: f64) -> f64 {
        self.nodes.iter().map(|&(u, wc)| wc * (u * x).cos()).sum::<f64>() / PI
    }

    /// Gil-Pelaez: `1/2 + (1/π) ∫₀^U cf(u) sin(ux)/u du`.
    pub fn cdf(&self, x: f64) -> f64 {
        0.5 + self.nodes.iter().map(|&(u, wc)| wc * (u * x).sin() / u).sum::<f64>() / PI
    }

    /// Inverse of [`Self::cdf`] by bisection on `[-x_max, x_max]`.
    pub fn quantile(&self, p: f64, x_max: f64) -> f64 {
        let (mut lo, mut hi) = (-x_max, x_max);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-12 * x_max {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Tabulated marginal density.
#[derive(Debug, Clone, Serialize)]
pub struct MarginalDensity {
    pub points: Vec<(f64, f64)>,
    pub cutoff: f64,
    pub truncation_error: f64,
    pub warnings: Vec<String>,
}

/// Density of `X(0)` on `x_grid` by inversion of `cf`. When the CF decays too
/// slowly for the integral to converge at the origin, `x = 0` is dropped and a
/// warning recorded.
pub fn marginal_density_from_cf<C: Fn(f64) -> Result<f64>>(x_grid: &[f64], cf: C) -> Result<MarginalDensity> {
    if x_grid.is_empty() {
        return Err(invalid("density grid is empty"));
    }
    let x_max = x_grid.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let inv = CfInversion::new(cf, x_max)?;
    let mut warnings = Vec::new();
    if inv.truncation_error > 1e-6 {
        warnings.push(format!(
            "cf decays slowly (|cf| ~ u^-{:.2}); inversion cut at u = {} with truncation error {:.2e}",
            inv.decay_exponent, inv.cutoff, inv.truncation_error
        ));
    }
    let diverges = inv.decay_exponent <= 1.0 + 1e-2;
    let mut points = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        if x == 0.0 && diverges {
            warnings.push("density integral does not converge at x = 0; point omitted".into());
            continue;
        }
        points.push((x, inv.density(x)));
    }
    Ok(MarginalDensity {
        points,
        cutoff: inv.cutoff,
        truncation_error: inv.truncation_error,
        warnings,
    })
}

/// Density of `X(0)` for `model`.
pub fn marginal_density(x_grid: &[f64], model: &Model) -> Result<MarginalDensity> {
    marginal_density_from_cf(x_grid, |u| marginal_cf_fast(u, model))
}
