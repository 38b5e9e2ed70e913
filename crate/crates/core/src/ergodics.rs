//! Time averages over single realizations and their random limits.
//!
//! For a fixed expansion, `(1/T) ∫₀^T X(t) X(t+τ) dt → Σ ξ_i² cos(λ_i τ)/2`
//! as `T → ∞`. The limit depends on the realized amplitudes, so the process
//! is not ergodic in autocovariance.

use rayon::prelude::*;
use serde::Serialize;

use crate::charfn::{autocovariance, marginal_cf_fast};
use crate::error::{domain, invalid, Result};
use crate::rng::StreamSet;
use crate::stats::{empirical_cf, ks_normal_fit, KsResult, Moments};
use crate::synthesis::{evaluate, Generator, HarmonicExpansion, Model, SignalPath};

/// Largest admissible `λ_max · dt` for time averages.
pub const MAX_PHASE_STEP: f64 = 0.2;

/// Trapezoidal `(1/T) ∫₀^T X(t) dt` with `T = (n-1)·dt`.
pub fn time_average_mean(path: &SignalPath) -> Result<f64> {
    let n = path.values.len();
    if n < 2 {
        return Err(invalid("time average needs at least two samples"));
    }
    let v = &path.values;
    let inner: f64 = v[1..n - 1].iter().sum();
    Ok((inner + 0.5 * (v[0] + v[n - 1])) / (n - 1) as f64)
}

/// Grid offset of a lag, or a domain error when `τ` is off the grid.
pub fn lag_index(path: &SignalPath, tau: f64) -> Result<usize> {
    if !(tau >= 0.0) {
        return Err(domain(format!("lag must be non-negative, got {tau}")));
    }
    let k = (tau / path.dt).round();
    if (k * path.dt - tau).abs() > 1e-9 * tau.max(1.0) {
        return Err(domain(format!("lag {tau} is not a multiple of dt = {}", path.dt)));
    }
    Ok(k as usize)
}

/// Trapezoidal `(1/T') ∫₀^{T'} X(t) X(t+τ) dt` with `T' = T - τ`.
pub fn time_average_acov(path: &SignalPath, tau: f64) -> Result<f64> {
    let n = path.values.len();
    if n < 2 {
        return Err(invalid("time average needs at least two samples"));
    }
    let k = lag_index(path, tau)?;
    let steps = n - 1;
    if 2 * k >= steps {
        return Err(domain(format!("lag {tau} must be below half the horizon {}", path.horizon())));
    }
    let v = &path.values;
    let m = steps - k;
    let inner: f64 = (1..m).map(|j| v[j] * v[j + k]).sum();
    Ok((inner + 0.5 * (v[0] * v[k] + v[m] * v[m + k])) / m as f64)
}

/// `Σ ξ_i² cos(λ_i τ) / 2` from the realized terms.
pub fn random_limit_acov(expansion: &HarmonicExpansion, tau: f64) -> f64 {
    expansion
        .terms
        .iter()
        .map(|h| 0.5 * h.amplitude * h.amplitude * (h.frequency * tau).cos())
        .sum()
}

/// Large-`T` variance of the sample autocorrelation at lag `t` for `m`
/// harmonics normalized by `1/√(m/2)`, in the classical form
/// `e4/m + e4 r(2t)/(m e2) - r(t)²/m`.
pub fn kay_variance(e4: f64, e2: f64, m: usize, r_t: f64, r_2t: f64) -> f64 {
    let m = m as f64;
    e4 / m + e4 * r_2t / (m * e2) - r_t * r_t / m
}

/// Variance of the exact limit `(1/m) Σ ξ_i² cos(λ_i t)` in the same setting:
/// `e4 (1 + r(2t)/e2) / (2m) - r(t)²/m`.
pub fn harmonic_limit_variance(e4: f64, e2: f64, m: usize, r_t: f64, r_2t: f64) -> f64 {
    let m = m as f64;
    0.5 * e4 * (1.0 + r_2t / e2) / m - r_t * r_t / m
}

/// Rejects grids too coarse for the realized frequencies.
pub fn check_resolution(expansion: &HarmonicExpansion, dt: f64) -> Result<()> {
    let step = expansion.max_frequency() * dt;
    if step > MAX_PHASE_STEP {
        return Err(domain(format!(
            "dt = {dt} too coarse: max frequency {} gives phase step {step:.3} > {MAX_PHASE_STEP}",
            expansion.max_frequency()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct LagRow {
    pub tau: f64,
    pub time_avg: f64,
    pub random_limit: f64,
    pub abs_err: f64,
}

/// Time averages of one realization against their random limits.
#[derive(Debug, Clone, Serialize)]
pub struct TimeAverageReport {
    pub horizon: f64,
    pub time_avg_mean: f64,
    pub rows: Vec<LagRow>,
}

/// Evaluates `expansion` on `[0, T]` with step `dt` and compares the time
/// averages with their limits at each lag.
pub fn time_average_report(expansion: &HarmonicExpansion, horizon: f64, dt: f64, taus: &[f64]) -> Result<TimeAverageReport> {
    check_resolution(expansion, dt)?;
    let steps = (horizon / dt).round();
    if !(steps >= 1.0) || ((steps * dt) - horizon).abs() > 1e-9 * horizon.max(1.0) {
        return Err(domain(format!("horizon {horizon} is not a positive multiple of dt = {dt}")));
    }
    let path = evaluate(expansion, 0.0, dt, steps as usize + 1)?;
    path_report(expansion, &path, taus)
}

/// As [`time_average_report`] for an already evaluated path.
pub fn path_report(expansion: &HarmonicExpansion, path: &SignalPath, taus: &[f64]) -> Result<TimeAverageReport> {
    let rows = taus
        .iter()
        .map(|&tau| {
            let time_avg = time_average_acov(path, tau)?;
            let random_limit = random_limit_acov(expansion, tau);
            Ok(LagRow {
                tau,
                time_avg,
                random_limit,
                abs_err: (time_avg - random_limit).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TimeAverageReport {
        horizon: path.horizon(),
        time_avg_mean: time_average_mean(path)?,
        rows,
    })
}

/// Settings of an ensemble run.
#[derive(Debug, Clone)]
pub struct EnsembleSettings {
    pub generator: Generator,
    pub n_real: usize,
    pub taus: Vec<f64>,
    /// `(T, dt)` for time averages; `None` skips path evaluation.
    pub time_grid: Option<(f64, f64)>,
    pub u_grid: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LagSummary {
    pub tau: f64,
    pub autocovariance: f64,
    pub limit_mean: f64,
    pub limit_variance: f64,
    pub limit_std_error: f64,
    /// Mean and variance of the time averages, when a time grid was given.
    pub time_avg_mean: Option<f64>,
    pub time_avg_variance: Option<f64>,
    pub max_abs_err: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CfRow {
    pub u: f64,
    pub empirical: f64,
    pub theoretical: f64,
}

/// Cross-realization statistics.
#[derive(Debug, Clone, Serialize)]
pub struct EnsembleReport {
    pub realizations: usize,
    pub lags: Vec<LagSummary>,
    pub x0_variance: f64,
    pub x0_kurtosis: f64,
    pub ks_normal: KsResult,
    pub cf: Vec<CfRow>,
}

struct RealizationStats {
    x0: f64,
    limits: Vec<f64>,
    time_avgs: Option<Vec<f64>>,
}

/// Simulates `n_real` independent realizations (`streams.realization(k)`)
/// and summarizes them. Realizations run in parallel; reduction is in index
/// order, so the report does not depend on the thread count.
pub fn ensemble_diagnostics(model: &Model, settings: &EnsembleSettings, streams: &StreamSet) -> Result<EnsembleReport> {
    if settings.n_real < 2 {
        return Err(invalid("ensemble needs at least two realizations"));
    }
    let per: Vec<RealizationStats> = (0..settings.n_real as u64)
        .into_par_iter()
        .map(|k| {
            let e = settings.generator.generate(model, &streams.realization(k))?;
            let limits = settings.taus.iter().map(|&t| random_limit_acov(&e, t)).collect();
            let time_avgs = match settings.time_grid {
                Some((horizon, dt)) => Some(
                    time_average_report(&e, horizon, dt, &settings.taus)?
                        .rows
                        .iter()
                        .map(|r| r.time_avg)
                        .collect(),
                ),
                None => None,
            };
            Ok(RealizationStats {
                x0: e.value_at(0.0),
                limits,
                time_avgs,
            })
        })
        .collect::<Result<_>>()?;

    let mut lags = Vec::with_capacity(settings.taus.len());
    for (i, &tau) in settings.taus.iter().enumerate() {
        let lim: Moments = per.iter().map(|r| r.limits[i]).collect();
        let ta: Option<Moments> = settings.time_grid.map(|_| per.iter().filter_map(|r| r.time_avgs.as_ref().map(|v| v[i])).collect());
        let max_abs_err = settings.time_grid.map(|_| {
            per.iter()
                .filter_map(|r| r.time_avgs.as_ref().map(|v| (v[i] - r.limits[i]).abs()))
                .fold(0.0, f64::max)
        });
        lags.push(LagSummary {
            tau,
            autocovariance: model.measure.mean()? * autocovariance(tau, &model.spectrum)?,
            limit_mean: lim.mean,
            limit_variance: lim.variance(),
            limit_std_error: lim.std_error(),
            time_avg_mean: ta.map(|m| m.mean),
            time_avg_variance: ta.map(|m| m.variance()),
            max_abs_err,
        });
    }
    let x0: Vec<f64> = per.iter().map(|r| r.x0).collect();
    let m: Moments = x0.iter().copied().collect();
    let cf = settings
        .u_grid
        .iter()
        .map(|&u| {
            Ok(CfRow {
                u,
                empirical: empirical_cf(&x0, u).0,
                theoretical: marginal_cf_fast(u, model)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(EnsembleReport {
        realizations: settings.n_real,
        lags,
        x0_variance: m.variance(),
        x0_kurtosis: m.kurtosis(),
        ks_normal: ks_normal_fit(&x0),
        cf,
    })
}
