//! Histogram data contrasting one realization with a pooled ensemble.
//!
//! A single path samples its own conditional law (fixed amplitudes and
//! frequencies), so its histogram need not match the marginal density. Pooled
//! over independent realizations it does, once the χ² test accounts for the
//! clustering of samples within realizations.

use rayon::prelude::*;
use serde::Serialize;

use crate::charfn::{marginal_cf_fast, marginal_density_from_cf, CfInversion, MarginalDensity};
use crate::error::{invalid, Result};
use crate::rng::StreamSet;
use crate::stats::{bin_counts, chi_square_gof, chi_square_gof_clustered, ChiSquareResult};
use crate::synthesis::{Generator, Model};

#[derive(Debug, Clone, Serialize)]
pub struct FigureSettings {
    /// Samples per realization.
    pub samples: usize,
    /// Spacing of the samples in time.
    pub dt: f64,
    pub realizations: usize,
    /// Number of equiprobable bins.
    pub bins: usize,
    pub x_grid: Vec<f64>,
}

impl Default for FigureSettings {
    fn default() -> Self {
        Self {
            samples: 2000,
            dt: 0.5,
            realizations: 50,
            bins: 20,
            x_grid: (-120..=120).map(|k| k as f64 * 0.05).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HistogramRow {
    pub lo: f64,
    pub hi: f64,
    pub probability: f64,
    /// Relative frequencies; each column sums to 1.
    pub single: f64,
    pub pooled: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FigureData {
    pub density: MarginalDensity,
    pub histogram: Vec<HistogramRow>,
    /// Naive Pearson test of the single realization.
    pub single_test: ChiSquareResult,
    /// Naive Pearson test of the pooled sample, ignoring clustering.
    pub pooled_raw_test: ChiSquareResult,
    /// Design-effect corrected test of the pooled sample.
    pub pooled_test: ChiSquareResult,
}

pub fn figure_data(model: &Model, generator: &Generator, settings: &FigureSettings, streams: &StreamSet) -> Result<FigureData> {
    if settings.bins < 2 || settings.realizations < 2 || settings.samples < 2 {
        return Err(invalid("figures need at least two bins, realizations and samples"));
    }
    let cf = |u: f64| marginal_cf_fast(u, model);
    let density = marginal_density_from_cf(&settings.x_grid, cf)?;
    let sd = (model.spectrum.sigma0.powi(2) * model.measure.mean()?).sqrt();
    let x_max = 8.0 * sd;
    let inv = CfInversion::new(cf, x_max)?;
    let edges: Vec<f64> = (1..settings.bins)
        .map(|k| inv.quantile(k as f64 / settings.bins as f64, x_max))
        .collect();
    let mut cdf = vec![0.0];
    cdf.extend(edges.iter().map(|&x| inv.cdf(x)));
    cdf.push(1.0);
    let probs: Vec<f64> = cdf.windows(2).map(|w| w[1] - w[0]).collect();

    let clusters: Vec<Vec<f64>> = (0..settings.realizations as u64)
        .into_par_iter()
        .map(|k| {
            let e = generator.generate(model, &streams.realization(k))?;
            let xs: Vec<f64> = (0..settings.samples).map(|j| e.value_at(j as f64 * settings.dt)).collect();
            Ok(bin_counts(&xs, &edges))
        })
        .collect::<Result<_>>()?;
    let pooled: Vec<f64> = (0..settings.bins).map(|j| clusters.iter().map(|c| c[j]).sum()).collect();
    let single = &clusters[0];
    let (n1, n) = (settings.samples as f64, pooled.iter().sum::<f64>());
    let histogram = (0..settings.bins)
        .map(|j| HistogramRow {
            lo: if j == 0 { f64::NEG_INFINITY } else { edges[j - 1] },
            hi: if j + 1 == settings.bins { f64::INFINITY } else { edges[j] },
            probability: probs[j],
            single: single[j] / n1,
            pooled: pooled[j] / n,
        })
        .collect();
    Ok(FigureData {
        density,
        histogram,
        single_test: chi_square_gof(single, &probs)?,
        pooled_raw_test: chi_square_gof(&pooled, &probs)?,
        pooled_test: chi_square_gof_clustered(&clusters, &probs)?,
    })
}
