//! Seeded, reproducible sources of the primitive variates.
//!
//! Every primitive sequence (arrival increments, frequency uniforms, Rayleigh
//! moduli, phases, shot-noise marks) lives on its own labelled substream. A
//! substream is a ChaCha generator keyed by the seed, with the label hashed
//! into the ChaCha stream id, so two labels never share key-stream blocks.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma, Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Result};

/// Substream labels used by the generators.
pub mod labels {
    pub const ARRIVALS: &str = "arrivals";
    pub const FREQUENCY: &str = "frequency";
    pub const RAYLEIGH: &str = "rayleigh";
    pub const PHASE: &str = "phase";
    pub const SHOT: &str = "shot";
    pub const CONDITIONED: &str = "conditioned";
    pub const SUBORDINATOR: &str = "subordinator";
}

/// Which primitive variate to draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariateKind {
    Uniform01,
    Rayleigh,
    Exponential,
    Normal,
    Phase,
}

/// Rayleigh variate with density `r exp(-r^2/2)` by inversion.
pub fn rayleigh_from_uniform(u: f64) -> f64 {
    (-2.0 * u.ln()).sqrt()
}

/// Unit-mean exponential variate by inversion.
pub fn exponential_from_uniform(u: f64) -> f64 {
    -u.ln()
}

fn fnv1a(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A single labelled, seeded stream of variates.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    label: String,
    rng: ChaCha12Rng,
}

impl RandomStream {
    pub fn new(seed: u64, label: &str) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(fnv1a(label));
        Self {
            seed,
            label: label.to_owned(),
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Uniform on the open interval (0, 1).
    pub fn uniform01(&mut self) -> f64 {
        Open01.sample(&mut self.rng)
    }

    pub fn exponential(&mut self) -> f64 {
        exponential_from_uniform(self.uniform01())
    }

    pub fn rayleigh(&mut self) -> f64 {
        rayleigh_from_uniform(self.uniform01())
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Uniform phase on [0, 2π).
    pub fn phase(&mut self) -> f64 {
        let p = TAU * self.rng.random::<f64>();
        if p >= TAU {
            0.0
        } else {
            p
        }
    }

    pub fn draw(&mut self, kind: VariateKind) -> f64 {
        match kind {
            VariateKind::Uniform01 => self.uniform01(),
            VariateKind::Rayleigh => self.rayleigh(),
            VariateKind::Exponential => self.exponential(),
            VariateKind::Normal => self.normal(),
            VariateKind::Phase => self.phase(),
        }
    }

    /// Gamma variate with the given shape and scale.
    pub fn gamma(&mut self, shape: f64, scale: f64) -> Result<f64> {
        let g = Gamma::new(shape, scale)
            .map_err(|e| invalid(format!("gamma(shape={shape}, scale={scale}): {e}")))?;
        Ok(g.sample(&mut self.rng))
    }

    /// Arrival times of a unit-rate Poisson process up to `horizon`.
    pub fn poisson_arrivals(&mut self, horizon: f64) -> Result<Arrivals> {
        check_horizon(horizon)?;
        let mut times = Vec::new();
        let mut t = 0.0;
        loop {
            t += self.exponential();
            if t > horizon {
                return Ok(Arrivals { times, next: t });
            }
            times.push(t);
        }
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(domain(format!("arrival horizon must be positive and finite, got {horizon}")));
    }
    Ok(())
}

/// Poisson arrivals `Γ_1 < Γ_2 < … ≤ L` and the first arrival past `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct Arrivals {
    pub times: Vec<f64>,
    pub next: f64,
}

impl Arrivals {
    /// Builds arrivals by cumulating the given exponential increments.
    ///
    /// Returns `None` when the increments run out before passing the horizon.
    pub fn from_increments<I>(increments: I, horizon: f64) -> Result<Option<Self>>
    where
        I: IntoIterator<Item = f64>,
    {
        check_horizon(horizon)?;
        let mut times = Vec::new();
        let mut t = 0.0;
        for e in increments {
            t += e;
            if t > horizon {
                return Ok(Some(Self { times, next: t }));
            }
            times.push(t);
        }
        Ok(None)
    }

    pub fn count(&self) -> usize {
        self.times.len()
    }
}

/// Law of the phases. Anything other than `Uniform` breaks stationarity and
/// exists to witness the "only if" direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhaseLaw {
    #[default]
    Uniform,
    /// Uniform on `[lo, hi)` reduced mod 2π.
    Interval { lo: f64, hi: f64 },
}

impl PhaseLaw {
    pub fn sample(&self, stream: &mut RandomStream) -> f64 {
        match *self {
            PhaseLaw::Uniform => stream.phase(),
            PhaseLaw::Interval { lo, hi } => {
                let p = (lo + (hi - lo) * stream.uniform01()).rem_euclid(TAU);
                if p >= TAU {
                    0.0
                } else {
                    p
                }
            }
        }
    }
}

/// Root seed of one realization: hands out the labelled substreams.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamSet {
    pub seed: u64,
    #[serde(default)]
    pub phase_law: PhaseLaw,
}

impl StreamSet {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            phase_law: PhaseLaw::Uniform,
        }
    }

    pub fn with_phase_law(mut self, law: PhaseLaw) -> Self {
        self.phase_law = law;
        self
    }

    pub fn stream(&self, label: &str) -> RandomStream {
        RandomStream::new(self.seed, label)
    }

    /// Independent stream set for realization `k` of an ensemble.
    pub fn realization(&self, k: u64) -> Self {
        Self {
            seed: splitmix64(self.seed ^ splitmix64(k.wrapping_add(0x5eed))),
            phase_law: self.phase_law,
        }
    }
}
