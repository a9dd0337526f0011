//! System configuration: every physical and protocol parameter of the
//! simulated downlink in one validated struct.
//!
//! Configurations are loaded from TOML. Unknown keys are rejected so that a
//! typo cannot silently fall back to a default; missing keys take the
//! documented defaults, which describe a 16-element transmit array serving
//! four single-antenna terminals while a scanning beam carries the
//! radar pilot.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::SPEED_OF_LIGHT;

/// Transmit pulse shape used inside one symbol slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseKind {
    /// Unit-height rectangular pulse spanning exactly one symbol.
    Rect,
    /// Truncated raised-cosine (Nyquist) pulse; see `rolloff`.
    RaisedCosine,
}

/// Complete parameter set for one simulation scenario.
///
/// Field groups: array geometry, waveform, frame/scan plan, network
/// scenario, link budget, and quality-of-service floors. All quantities are
/// SI unless stated otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    // ── Array geometry ──
    /// Transmit array elements along x.
    pub n_tx_x: usize,
    /// Transmit array elements along y.
    pub n_tx_y: usize,
    /// Receive array elements along x.
    pub n_rx_x: usize,
    /// Receive array elements along y.
    pub n_rx_y: usize,
    /// Element spacing along x, in carrier wavelengths.
    pub spacing_x: f64,
    /// Element spacing along y, in carrier wavelengths.
    pub spacing_y: f64,

    // ── Waveform ──
    /// Carrier frequency, Hz.
    pub carrier_hz: f64,
    /// Chirp rate, Hz/s. The per-block sign alternates; this is the magnitude
    /// used by the up-chirp blocks.
    pub chirp_rate: f64,
    /// Symbol duration, s.
    pub symbol_time: f64,
    /// Symbols per block.
    pub symbols_per_block: usize,
    /// Amplitude-shift-keying alphabet size (power of two, ≥ 2).
    pub mask_order: u32,
    /// Modulation index numerator; the index is `mod_index_num/mod_index_den`.
    pub mod_index_num: u32,
    /// Modulation index denominator.
    pub mod_index_den: u32,
    /// Transmit pulse shape.
    pub pulse: PulseKind,
    /// Roll-off factor of the raised-cosine pulse (ignored for `rect`).
    pub rolloff: f64,
    /// Complex baseband sampling rate, Hz. `0.0` selects the default of
    /// 16 samples per symbol.
    pub sample_rate: f64,

    // ── Frame / scan plan ──
    /// Elevation beamwidth of one scan cell, degrees.
    pub beamwidth_elev_deg: f64,
    /// Azimuth beamwidth of one scan cell, degrees.
    pub beamwidth_azim_deg: f64,

    // ── Network scenario ──
    /// Number of simultaneously served terminals (K).
    pub users: usize,
    /// Number of candidate terminals the scheduler may choose from (U ≥ K).
    pub candidates: usize,
    /// Total transmit power budget, W.
    pub p_tot: f64,
    /// Path-loss exponent.
    pub pathloss_exp: f64,
    /// Reference distance of the path-loss model, m.
    pub ref_distance: f64,
    /// Cell radius, m. Terminals are spawned in `[ref_distance, cell_radius]`.
    pub cell_radius: f64,
    /// Standard deviation of the log-normal shadowing exponent
    /// (shadow factor is `exp(sigma·z)` with standard normal `z`).
    pub shadowing_sigma: f64,

    // ── Link budget ──
    /// Terminal-side noise power, W.
    pub noise_ue: f64,
    /// Base-station (radar receiver) noise power, W.
    pub noise_bs: f64,

    // ── Quality-of-service floors ──
    /// Minimum spectral efficiency per served terminal, bit/s/Hz.
    pub rate_floor_user: f64,
    /// Minimum spectral efficiency of the sensing stream, bit/s/Hz.
    pub rate_floor_target: f64,

    // ── Sensing target ──
    /// Radar cross-section of the probed target, m².
    pub target_rcs: f64,
    /// Target range, m.
    pub target_range: f64,
    /// Target radial speed, m/s (positive = approaching).
    pub target_speed: f64,

    /// Base seed for all pseudo-random draws.
    pub seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            n_tx_x: 4,
            n_tx_y: 4,
            n_rx_x: 2,
            n_rx_y: 2,
            spacing_x: 0.5,
            spacing_y: 0.5,
            carrier_hz: 2.4e9,
            chirp_rate: 1.0e10,
            symbol_time: 5.0e-6,
            symbols_per_block: 20,
            mask_order: 2,
            mod_index_num: 1,
            mod_index_den: 2,
            pulse: PulseKind::Rect,
            rolloff: 0.35,
            sample_rate: 0.0,
            beamwidth_elev_deg: 10.0,
            beamwidth_azim_deg: 10.0,
            users: 4,
            candidates: 30,
            p_tot: 1.0,
            pathloss_exp: 3.0,
            ref_distance: 100.0,
            cell_radius: 1000.0,
            shadowing_sigma: 1.6,
            noise_ue: 0.1,
            noise_bs: 1e-15,
            rate_floor_user: 0.2,
            rate_floor_target: 0.1,
            target_rcs: 1.0,
            target_range: 1500.0,
            target_speed: 62.5,
            seed: 1,
        }
    }
}

impl SystemConfig {
    /// Parses a TOML document and validates the result.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SystemConfig =
            toml::from_str(text).map_err(|e| Error::config(format!("TOML parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Serializes to canonical TOML (used for config hashing).
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialization cannot fail")
    }

    /// Total number of transmit elements.
    pub fn n_tx(&self) -> usize {
        self.n_tx_x * self.n_tx_y
    }

    /// Total number of receive elements.
    pub fn n_rx(&self) -> usize {
        self.n_rx_x * self.n_rx_y
    }

    /// Carrier wavelength, m.
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    /// Modulation index as a float.
    pub fn mod_index(&self) -> f64 {
        self.mod_index_num as f64 / self.mod_index_den as f64
    }

    /// Block duration `N·T_s`, s.
    pub fn block_time(&self) -> f64 {
        self.symbols_per_block as f64 * self.symbol_time
    }

    /// Frequency excursion swept by the chirp over one block, Hz.
    pub fn sweep_bandwidth(&self) -> f64 {
        self.chirp_rate.abs() * self.block_time()
    }

    /// Bandwidth contribution of the transmit pulse, Hz.
    pub fn pulse_bandwidth(&self) -> f64 {
        match self.pulse {
            PulseKind::Rect => 1.0 / self.symbol_time,
            PulseKind::RaisedCosine => (1.0 + self.rolloff) / (2.0 * self.symbol_time),
        }
    }

    /// Effective sampling rate (resolves the 16-samples-per-symbol default).
    pub fn effective_sample_rate(&self) -> f64 {
        if self.sample_rate > 0.0 {
            self.sample_rate
        } else {
            16.0 / self.symbol_time
        }
    }

    /// Number of scan cells in elevation.
    pub fn blocks_elev(&self) -> usize {
        (90.0 / self.beamwidth_elev_deg).round() as usize
    }

    /// Number of scan cells in azimuth.
    pub fn blocks_azim(&self) -> usize {
        (360.0 / self.beamwidth_azim_deg).round() as usize
    }

    /// Total scan blocks per frame.
    pub fn m_blocks(&self) -> usize {
        self.blocks_elev() * self.blocks_azim()
    }

    /// Bits per modulation symbol.
    pub fn bits_per_symbol(&self) -> u32 {
        self.mask_order.trailing_zeros()
    }

    /// Checks every invariant the rest of the crate relies on.
    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be positive, got {v}")))
            }
        }
        if self.n_tx_x * self.n_tx_y == 0 {
            return Err(Error::config("transmit array must have at least one element"));
        }
        if self.n_rx_x * self.n_rx_y == 0 {
            return Err(Error::config("receive array must have at least one element"));
        }
        positive("spacing_x", self.spacing_x)?;
        positive("spacing_y", self.spacing_y)?;
        positive("carrier_hz", self.carrier_hz)?;
        positive("symbol_time", self.symbol_time)?;
        if self.chirp_rate < 0.0 || !self.chirp_rate.is_finite() {
            return Err(Error::config(format!(
                "chirp_rate must be non-negative and finite, got {}",
                self.chirp_rate
            )));
        }
        if self.symbols_per_block == 0 {
            return Err(Error::config("symbols_per_block must be at least 1"));
        }
        if self.mask_order < 2 || !self.mask_order.is_power_of_two() {
            return Err(Error::config(format!(
                "mask_order must be a power of two ≥ 2, got {}",
                self.mask_order
            )));
        }
        if self.mod_index_num == 0 || self.mod_index_den == 0 {
            return Err(Error::config("modulation index must be a positive rational"));
        }
        if gcd(self.mod_index_num, self.mod_index_den) != 1 {
            return Err(Error::config(format!(
                "modulation index {}/{} must be in lowest terms",
                self.mod_index_num, self.mod_index_den
            )));
        }
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(Error::config(format!(
                "rolloff must lie in [0, 1], got {}",
                self.rolloff
            )));
        }
        if self.sample_rate < 0.0 {
            return Err(Error::config("sample_rate must be ≥ 0 (0 selects the default)"));
        }
        let nyquist_need = 2.0 * (self.sweep_bandwidth() + 1.0 / self.symbol_time);
        if self.effective_sample_rate() < nyquist_need {
            return Err(Error::config(format!(
                "sample_rate {} is below the required {} (twice sweep plus pulse bandwidth)",
                self.effective_sample_rate(),
                nyquist_need
            )));
        }
        for (name, bw, span) in [
            ("beamwidth_elev_deg", self.beamwidth_elev_deg, 90.0),
            ("beamwidth_azim_deg", self.beamwidth_azim_deg, 360.0),
        ] {
            positive(name, bw)?;
            let cells = span / bw;
            if (cells - cells.round()).abs() > 1e-9 || cells.round() < 1.0 {
                return Err(Error::config(format!(
                    "{name} = {bw}° must divide {span}° into a whole number of cells"
                )));
            }
        }
        if self.users == 0 {
            return Err(Error::config("users must be at least 1"));
        }
        if self.candidates < self.users {
            return Err(Error::config(format!(
                "candidates ({}) must be ≥ users ({})",
                self.candidates, self.users
            )));
        }
        positive("p_tot", self.p_tot)?;
        positive("pathloss_exp", self.pathloss_exp)?;
        positive("ref_distance", self.ref_distance)?;
        if self.cell_radius <= self.ref_distance {
            return Err(Error::config(format!(
                "cell_radius ({}) must exceed ref_distance ({})",
                self.cell_radius, self.ref_distance
            )));
        }
        if self.shadowing_sigma < 0.0 {
            return Err(Error::config("shadowing_sigma must be ≥ 0"));
        }
        positive("noise_ue", self.noise_ue)?;
        positive("noise_bs", self.noise_bs)?;
        if self.rate_floor_user < 0.0 || self.rate_floor_target < 0.0 {
            return Err(Error::config("rate floors must be ≥ 0"));
        }
        positive("target_rcs", self.target_rcs)?;
        positive("target_range", self.target_range)?;
        if !self.target_speed.is_finite() {
            return Err(Error::config("target_speed must be finite"));
        }
        Ok(())
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_derive_expected_quantities() {
        // 1. The default parameter set is self-consistent and reproduces the
        //    headline derived quantities.
        let cfg = SystemConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.n_tx(), 16);
        assert_eq!(cfg.n_rx(), 4);
        assert!((cfg.wavelength() - 0.125).abs() < 1e-12);
        assert!((cfg.block_time() - 1.0e-4).abs() < 1e-16);
        assert!((cfg.sweep_bandwidth() - 1.0e6).abs() < 1e-4);
        assert_eq!(cfg.m_blocks(), 324);
        assert!((cfg.effective_sample_rate() - 3.2e6).abs() < 1e-6);
        assert_eq!(cfg.bits_per_symbol(), 1);
    }

    #[test]
    fn coarser_elevation_cells_shrink_the_frame() {
        // 2. 15° elevation cells with 10° azimuth cells give 6·36 blocks.
        let cfg = SystemConfig {
            beamwidth_elev_deg: 15.0,
            ..SystemConfig::default()
        };
        cfg.validate().unwrap();
        assert_eq!(cfg.m_blocks(), 216);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        // 3. A typo like `chirp_rte` must not silently vanish.
        let err = SystemConfig::from_toml_str("chirp_rte = 1e10").unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)), "{err}");
    }

    #[test]
    fn partial_toml_takes_defaults() {
        // 4. Only overriding one key keeps everything else at the default.
        let cfg = SystemConfig::from_toml_str("users = 2").unwrap();
        assert_eq!(cfg.users, 2);
        assert_eq!(cfg.candidates, SystemConfig::default().candidates);
    }

    #[test]
    fn validation_catches_bad_fields() {
        // 5. Each guard fires with a config error naming the field class.
        let base = SystemConfig::default();
        let cases: Vec<SystemConfig> = vec![
            SystemConfig { mask_order: 3, ..base.clone() },
            SystemConfig { mod_index_num: 2, mod_index_den: 4, ..base.clone() },
            SystemConfig { beamwidth_elev_deg: 7.0, ..base.clone() },
            SystemConfig { candidates: 1, ..base.clone() },
            SystemConfig { cell_radius: 50.0, ..base.clone() },
            SystemConfig { sample_rate: 1.0e5, ..base.clone() },
            SystemConfig { noise_ue: 0.0, ..base.clone() },
        ];
        for bad in cases {
            assert!(bad.validate().is_err(), "expected rejection: {bad:?}");
        }
    }

    #[test]
    fn toml_roundtrip_is_stable() {
        // 6. Serialize → parse → serialize is a fixed point (needed for
        //    reproducible config hashing).
        let cfg = SystemConfig::default();
        let text = cfg.to_toml_string();
        let back = SystemConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(text, back.to_toml_string());
    }
}
