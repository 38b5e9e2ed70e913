use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rfharm::charfn::{autocovariance, marginal_cf, marginal_density};
use rfharm::ergodics::{ensemble_diagnostics, time_average_report, EnsembleReport, EnsembleSettings, TimeAverageReport};
use rfharm::figures::{figure_data, FigureSettings};
use rfharm::levy::MeasureKind;
use rfharm::synthesis::evaluate;
use serde::Serialize;

use crate::config::{ConfigError, Resolved, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn config(path: &str, message: &str) -> Self {
        Self::Config(ConfigError {
            path: path.to_string(),
            message: message.to_string(),
        })
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
            Self::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(e) => write!(f, "invalid config at {e}"),
            Self::Numerical(m) => write!(f, "numerical failure: {m}"),
            Self::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<rfharm::Error> for CliError {
    fn from(e: rfharm::Error) -> Self {
        match e {
            rfharm::Error::Numerical(m) => Self::Numerical(m),
            other => Self::Config(ConfigError {
                path: "(run)".to_string(),
                message: other.to_string(),
            }),
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(io_err(path))
}

fn write_table<R: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<(), CliError> {
    let csv_err = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(create(path)?);
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn simulate(config: &RunConfig, r: &Resolved, out: &Path) -> Result<(), CliError> {
    let expansion = r.generator.generate(&r.model, &r.streams)?;
    let g = &config.grid;
    let path = evaluate(&expansion, g.t0, g.dt, g.n)?;
    let csv_path = out.join("path.csv");
    let mut w = create(&csv_path)?;
    path.write_csv(&mut w).and_then(|_| w.flush()).map_err(io_err(&csv_path))?;
    let json_path = out.join("expansion.json");
    let mut w = create(&json_path)?;
    w.write_all(expansion.to_json()?.as_bytes())
        .and_then(|_| w.write_all(b"\n"))
        .and_then(|_| w.flush())
        .map_err(io_err(&json_path))
}

pub fn theory_cf(config: &RunConfig, r: &Resolved, out: &Path) -> Result<(), CliError> {
    let rows = config
        .analysis
        .u_grid
        .iter()
        .map(|&u| Ok((u, marginal_cf(u, &r.model)?)))
        .collect::<Result<Vec<_>, rfharm::Error>>()?;
    write_table(&out.join("cf.csv"), &["u", "value"], rows)
}

pub fn theory_density(config: &RunConfig, r: &Resolved, out: &Path) -> Result<(), CliError> {
    let density = marginal_density(&config.analysis.x_grid, &r.model)?;
    for w in &density.warnings {
        eprintln!("rfharm: warning: {w}");
    }
    write_table(&out.join("density.csv"), &["x", "value"], density.points)
}

pub fn theory_acov(config: &RunConfig, r: &Resolved, out: &Path) -> Result<(), CliError> {
    let rows = config
        .analysis
        .taus
        .iter()
        .map(|&t| Ok((t, autocovariance(t, &r.model.spectrum)?)))
        .collect::<Result<Vec<_>, rfharm::Error>>()?;
    write_table(&out.join("acov.csv"), &["tau", "value"], rows)
}

#[derive(Serialize)]
struct ErgodicOutput {
    time_average: TimeAverageReport,
    ensemble: Option<EnsembleReport>,
}

/// Lags must sit on the grid and leave at least half the window.
fn check_lags(config: &RunConfig) -> Result<(), CliError> {
    let g = &config.grid;
    let steps = g.n.saturating_sub(1);
    for (i, &tau) in config.analysis.taus.iter().enumerate() {
        let k = (tau / g.dt).round();
        let field = format!("analysis.taus[{i}]");
        if (k * g.dt - tau).abs() > 1e-9 * tau.max(1.0) {
            return Err(CliError::config(&field, &format!("lag {tau} is not a multiple of grid.dt = {}", g.dt)));
        }
        if 2 * (k as usize) >= steps {
            return Err(CliError::config(&field, &format!("lag {tau} needs a grid longer than {} steps", steps)));
        }
    }
    Ok(())
}

pub fn ergodic(config: &RunConfig, r: &Resolved, out: &Path) -> Result<(), CliError> {
    check_lags(config)?;
    let g = &config.grid;
    let horizon = (g.n - 1) as f64 * g.dt;
    if let Some(top) = r.model.spectrum.freq.max_frequency() {
        if top * g.dt > rfharm::ergodics::MAX_PHASE_STEP {
            return Err(CliError::config(
                "grid.dt",
                &format!("too coarse for frequencies up to {top}: phase step {} per sample", top * g.dt),
            ));
        }
    }
    let taus = &config.analysis.taus;
    let expansion = r.generator.generate(&r.model, &r.streams)?;
    let time_average = time_average_report(&expansion, horizon, g.dt, taus)?;
    let ensemble = if config.analysis.n_real >= 2 {
        let settings = EnsembleSettings {
            generator: r.generator,
            n_real: config.analysis.n_real,
            taus: taus.clone(),
            time_grid: Some((horizon, g.dt)),
            u_grid: config.analysis.u_grid.clone(),
        };
        Some(ensemble_diagnostics(&r.model, &settings, &r.streams)?)
    } else {
        None
    };
    let rows: Vec<_> = time_average
        .rows
        .iter()
        .map(|row| (row.tau, row.time_avg, row.random_limit, row.abs_err))
        .collect();
    write_table(&out.join("ergodic.csv"), &["tau", "time_avg", "random_limit", "abs_err"], rows)?;
    write_json(&out.join("ergodic.json"), &ErgodicOutput { time_average, ensemble })
}

pub fn figures(config: &RunConfig, r: &Resolved, out: &Path) -> Result<(), CliError> {
    if !matches!(r.model.measure.kind(), MeasureKind::Gamma { .. }) {
        return Err(CliError::config("model.measure", "figures need a gamma or laplace measure"));
    }
    let a = &config.analysis;
    if a.n_real < 2 {
        return Err(CliError::config("analysis.n_real", "figures need at least two realizations"));
    }
    let settings = FigureSettings {
        samples: config.grid.n,
        dt: config.grid.dt,
        realizations: a.n_real,
        bins: a.bins,
        x_grid: a.x_grid.clone(),
    };
    let data = figure_data(&r.model, &r.generator, &settings, &r.streams)?;
    write_table(&out.join("density.csv"), &["x", "value"], data.density.points.iter().copied())?;
    let rows: Vec<_> = data.histogram.iter().map(|h| (h.lo, h.hi, h.probability, h.single, h.pooled)).collect();
    write_table(&out.join("histogram.csv"), &["lo", "hi", "probability", "single", "pooled"], rows)?;
    write_json(&out.join("figures.json"), &data)
}

pub fn check_measure(r: &Resolved, out: &Path) -> Result<(), CliError> {
    let report = r.model.measure.check_normalization()?;
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Numerical(e.to_string()))?;
    println!("{text}");
    write_json(&out.join("normalization.json"), &report)
}
