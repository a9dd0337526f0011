//! Radar-side signal processing: Fresnel integrals, spectra and occupied
//! bandwidth, the narrowband ambiguity surface, and dechirp-based target
//! estimation.

pub mod ambiguity;
pub mod dechirp;
pub mod fresnel;
pub mod spectrum;

pub use ambiguity::{ambiguity, first_local_min, AmbiguitySurface};
pub use dechirp::{
    combine_rx, dechirp, estimate_beat, estimate_target, resolution_report, wipe_modulation,
    RadarEstimate, ResolutionReport,
};
pub use fresnel::{fresnel, fresnel_c, fresnel_s};
pub use spectrum::{
    lfm_spectrum_magnitude, mean_symbol_amplitude, signal_spectrum, SpectrumEstimate,
};
