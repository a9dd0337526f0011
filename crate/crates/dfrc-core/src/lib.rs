//! Link-level simulator and analysis library for a dual-function
//! radar-communication downlink.
//!
//! A base station array transmits one continuous-phase/chirp waveform that
//! simultaneously serves downlink terminals and illuminates a radar target.
//! This crate provides the building blocks end to end:
//!
//! - [`config`]: system parameters with TOML round-tripping and validation.
//! - [`math`]: small dense complex linear algebra, quadrature, FFTs, and
//!   deterministic stream-derived RNG.
//! - [`waveform`]: bit mapping, continuous-phase modulation, chirp
//!   synthesis, pulse shaping, and per-antenna precoding.
//! - [`channel`]: array steering, pathloss/shadowing links, terminal
//!   reception, and the two-way target echo.
//! - [`frame`]: scan geometry, block timing, and terminal placement.
//! - [`radar`]: spectrum analysis, ambiguity surfaces, and the dechirp
//!   range/velocity estimator.
//! - [`optim`]: SINR/rate evaluation, water-filling, the alternating
//!   beam/power/combiner design, greedy terminal selection, and classical
//!   precoding baselines.
//! - [`ber`]: Monte Carlo bit-error-rate measurement with trellis
//!   detection, and the analytic upper-bound curve.

pub mod ber;
pub mod channel;
pub mod config;
pub mod error;
pub mod frame;
pub mod math;
pub mod optim;
pub mod radar;
pub mod waveform;

pub use config::SystemConfig;
pub use error::{Error, Result};
