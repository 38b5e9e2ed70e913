//! Stationary signals as sums of harmonics with random frequencies,
//! amplitudes and phases.
//!
//! The frequency law fixes the spectrum; a Lévy measure fixes the marginal
//! law through the amplitudes `ξ_i = σ₀ √(Λ⁻¹(Γ_i)) R_i`.

pub mod charfn;
pub mod ergodics;
pub mod figures;
pub mod error;
pub mod levy;
pub mod quad;
pub mod rng;
pub mod special;
pub mod spectrum;
pub mod stats;
pub mod synthesis;

pub use error::{Error, Result};
pub use levy::LevyMeasure;
pub use rng::{PhaseLaw, RandomStream, StreamSet};
pub use spectrum::{FrequencyDistribution, SpectralDistribution};
pub use synthesis::{evaluate, Generator, HarmonicExpansion, Model, SignalPath};
