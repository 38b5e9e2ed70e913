//! Run configuration: one JSON document with model, generation, grid and
//! analysis blocks.

use std::fmt;

use rfharm::levy::LevyMeasure;
use rfharm::rng::{PhaseLaw, StreamSet};
use rfharm::spectrum::{FrequencyDistribution, SpectralDistribution};
use rfharm::synthesis::{Generator, Model};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureConfig {
    /// Gamma measure with parameter `nu`; `literal` selects the `E1(u)/ν` tail.
    Gamma {
        nu: f64,
        #[serde(default)]
        literal: bool,
    },
    /// Generalized Laplace process: the gamma parameter is derived from
    /// `nu` and the spectral mass `sigma0²/2`.
    Laplace { nu: f64 },
    /// `(location, mass)` pairs.
    Atoms { points: Vec<(f64, f64)> },
    /// `(x, density)` knots of a piecewise-linear density.
    Density { points: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub measure: MeasureConfig,
    pub freq: FrequencyDistribution,
    pub sigma0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    #[serde(flatten)]
    pub generator: Generator,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub phase_law: PhaseLaw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    #[serde(default)]
    pub t0: f64,
    pub dt: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub taus: Vec<f64>,
    pub u_grid: Vec<f64>,
    /// Ensemble size; below 2 the ergodic command skips the ensemble.
    pub n_real: usize,
    pub x_grid: Vec<f64>,
    pub bins: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            taus: vec![0.0, 1.0, 2.0],
            u_grid: (-50..=50).map(|k| k as f64 * 0.1).collect(),
            n_real: 200,
            x_grid: (-120..=120).map(|k| k as f64 * 0.05).collect(),
            bins: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub generation: GenerationConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

/// A configuration problem at a field path such as `model.freq.b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn at(path: impl Into<String>, message: impl fmt::Display) -> ConfigError {
    ConfigError {
        path: path.into(),
        message: message.to_string(),
    }
}

/// Everything a command needs, built from a validated config.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub model: Model,
    pub generator: Generator,
    pub streams: StreamSet,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." { "(root)".to_string() } else { path };
            at(path, e.into_inner())
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every block and builds the model, generator and streams.
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let m = &self.model;
        let freq = m.freq.clone().validate().map_err(|e| at("model.freq", e))?;
        let spectrum = SpectralDistribution::new(m.sigma0, freq).map_err(|e| at("model.sigma0", e))?;
        let model = match &m.measure {
            MeasureConfig::Gamma { nu, literal: false } => LevyMeasure::gamma(*nu).map(|g| Model::new(g, spectrum)),
            MeasureConfig::Gamma { nu, literal: true } => {
                LevyMeasure::gamma_literal(*nu).map(|g| Model::new(g, spectrum))
            }
            MeasureConfig::Laplace { nu } => Model::laplace(*nu, spectrum),
            MeasureConfig::Atoms { points } => LevyMeasure::atoms(points).map(|a| Model::new(a, spectrum)),
            MeasureConfig::Density { points } => LevyMeasure::density_table(points).map(|d| Model::new(d, spectrum)),
        }
        .map_err(|e| at("model.measure", e))?;

        let generator = self.generation.generator;
        match generator {
            Generator::InverseLevy { level: Some(l) }
            | Generator::GammaShotnoise { level: Some(l) }
            | Generator::Conditioned { level: Some(l), .. }
            | Generator::ConditionedShotnoise { level: Some(l), .. }
            | Generator::GaussianLimit { level: Some(l), .. }
                if !(l > 0.0 && l.is_finite()) =>
            {
                return Err(at("generation.level", format!("truncation level must be positive, got {l}")));
            }
            Generator::GaussianLimit { scale, .. } if !(scale > 0.0 && scale.is_finite()) => {
                return Err(at("generation.scale", format!("scale must be positive, got {scale}")));
            }
            _ => {}
        }
        generator.level(&model).map_err(|e| at("generation.method", e))?;
        if let PhaseLaw::Interval { lo, hi } = self.generation.phase_law {
            if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                return Err(at("generation.phase_law", format!("empty phase interval [{lo}, {hi})")));
            }
        }

        let g = &self.grid;
        if !(g.dt > 0.0 && g.dt.is_finite()) {
            return Err(at("grid.dt", format!("must be positive, got {}", g.dt)));
        }
        if !g.t0.is_finite() {
            return Err(at("grid.t0", "must be finite"));
        }
        if g.n == 0 {
            return Err(at("grid.n", "must be at least 1"));
        }
        let a = &self.analysis;
        for (i, &t) in a.taus.iter().enumerate() {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(at(format!("analysis.taus[{i}]"), format!("lag must be non-negative, got {t}")));
            }
        }
        for (name, grid) in [("u_grid", &a.u_grid), ("x_grid", &a.x_grid)] {
            if let Some(i) = grid.iter().position(|v| !v.is_finite()) {
                return Err(at(format!("analysis.{name}[{i}]"), "must be finite"));
            }
        }
        if a.bins < 2 {
            return Err(at("analysis.bins", format!("need at least 2 bins, got {}", a.bins)));
        }
        Ok(Resolved {
            model,
            generator,
            streams: StreamSet::new(self.generation.seed).with_phase_law(self.generation.phase_law),
        })
    }
}
