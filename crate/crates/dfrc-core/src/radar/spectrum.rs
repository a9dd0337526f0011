//! Spectrum analysis: windowless DFT magnitude estimates, the closed-form
//! sweep spectrum via Fresnel integrals, and the printed mean symbol
//! amplitude.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::math::{fft_bin_freq, fft_forward};
use crate::radar::fresnel::fresnel;
use crate::waveform::ComplexSignal;

/// Magnitude drop that delimits the occupied band, as a linear factor
/// (−20 dB from peak).
const OCCUPIED_BAND_DROP: f64 = 0.1;

/// Width of the local RMS average used to locate the occupied-band edges,
/// Hz. Band-edge detection on the raw bin magnitudes would be at the mercy
/// of single-bin fades and spikes; a short RMS window preserves the local
/// spectral level while making the edge crossings stable.
const OCCUPIED_BAND_SMOOTHING_HZ: f64 = 5.0e4;

/// One-sided magnitude spectrum on a signed frequency grid.
#[derive(Debug, Clone)]
pub struct SpectrumEstimate {
    /// Signed frequency grid, Hz, ascending.
    pub freq_grid: Vec<f64>,
    /// Fourier magnitude `|𝓢(f)|` per grid point (continuous-time scale:
    /// `Σ|mag|²·Δf` equals the time-domain energy).
    pub magnitude: Vec<f64>,
    /// Width of the band where the magnitude holds within −20 dB of the
    /// peak, measured between the edge crossings nearest the peak, Hz.
    pub occupied_bandwidth: f64,
}

impl SpectrumEstimate {
    /// Grid spacing, Hz.
    pub fn df(&self) -> f64 {
        if self.freq_grid.len() < 2 {
            0.0
        } else {
            self.freq_grid[1] - self.freq_grid[0]
        }
    }

    /// Spectral-domain energy `Σ|mag|²·Δf`.
    pub fn energy(&self) -> f64 {
        let df = self.df();
        self.magnitude.iter().map(|m| m * m).sum::<f64>() * df
    }

    /// Frequency of the largest magnitude sample.
    pub fn peak_freq(&self) -> f64 {
        let mut best = 0;
        for (i, m) in self.magnitude.iter().enumerate() {
            if *m > self.magnitude[best] {
                best = i;
            }
        }
        self.freq_grid[best]
    }
}

/// Windowless zero-padded DFT magnitude of `sig`, scaled by the sample
/// spacing so that discrete and continuous-time energies agree exactly
/// (Parseval). The grid is zero-padded 8× (rounded up to a power of two).
pub fn signal_spectrum(sig: &ComplexSignal) -> Result<SpectrumEstimate> {
    if sig.is_empty() {
        return Err(Error::arg("cannot estimate the spectrum of an empty signal"));
    }
    let n = sig.len();
    let nfft = (8 * n).next_power_of_two();
    let mut buf = vec![C64::new(0.0, 0.0); nfft];
    buf[..n].copy_from_slice(&sig.samples);
    fft_forward(&mut buf);

    let dt = sig.dt();
    let mut pairs: Vec<(f64, f64)> = buf
        .iter()
        .enumerate()
        .map(|(i, v)| (fft_bin_freq(i, nfft, sig.sample_rate), v.norm() * dt))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let freq_grid: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let magnitude: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let occupied_bandwidth = occupied_bandwidth(&freq_grid, &magnitude);
    Ok(SpectrumEstimate { freq_grid, magnitude, occupied_bandwidth })
}

/// Width of the band holding within −20 dB of the peak magnitude.
///
/// The threshold is one tenth of the largest raw bin. The crossings are
/// located on a locally RMS-averaged profile, walking outward from its
/// maximum until the level first falls below the threshold on each side,
/// so that isolated fades inside the band and isolated spikes outside it
/// do not move the edges.
fn occupied_bandwidth(freqs: &[f64], magnitude: &[f64]) -> f64 {
    let n = magnitude.len();
    let peak = magnitude.iter().cloned().fold(0.0_f64, f64::max);
    if peak <= 0.0 || n < 2 {
        return 0.0;
    }
    let thresh = peak * OCCUPIED_BAND_DROP;
    let df = freqs[1] - freqs[0];
    let half = ((OCCUPIED_BAND_SMOOTHING_HZ / (2.0 * df)).round() as usize).max(1);
    let mut prefix = vec![0.0_f64; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + magnitude[i] * magnitude[i];
    }
    let smooth = |i: usize| -> f64 {
        let a = i.saturating_sub(half);
        let b = (i + half + 1).min(n);
        ((prefix[b] - prefix[a]) / (b - a) as f64).sqrt()
    };
    let peak_idx = (0..n).max_by(|&a, &b| smooth(a).total_cmp(&smooth(b))).unwrap_or(0);
    if smooth(peak_idx) < thresh {
        return 0.0;
    }
    let mut lo = peak_idx;
    while lo > 0 && smooth(lo - 1) >= thresh {
        lo -= 1;
    }
    let mut hi = peak_idx;
    while hi + 1 < n && smooth(hi + 1) >= thresh {
        hi += 1;
    }
    freqs[hi] - freqs[lo]
}

/// Closed-form magnitude of the sweep-only spectrum
/// `|∫₀^{T_B} e^{jπ(μt² − 2ft)} dt|` evaluated through Fresnel integrals.
///
/// For `μ > 0` completing the square gives
/// `|G(f)| = √((C(v₂)−C(v₁))² + (S(v₂)−S(v₁))²) / √(2μ)` with
/// `v₁ = −f·√(2/μ)` and `v₂ = √(2μ)·(T_B − f/μ)`. A negative rate reflects
/// the frequency axis (`|G₋μ(f)| = |Gμ(−f)|`), and `μ = 0` degenerates to
/// the rectangular-window transform `T_B·|sinc(πfT_B)|`.
pub fn lfm_spectrum_magnitude(f: f64, chirp_rate: f64, block_time: f64) -> f64 {
    if chirp_rate == 0.0 {
        let x = PI * f * block_time;
        return if x.abs() < 1e-12 { block_time } else { block_time * (x.sin() / x).abs() };
    }
    if chirp_rate < 0.0 {
        return lfm_spectrum_magnitude(-f, -chirp_rate, block_time);
    }
    let mu = chirp_rate;
    let v1 = -f * (2.0 / mu).sqrt();
    let v2 = (2.0 * mu).sqrt() * (block_time - f / mu);
    let (c1, s1) = fresnel(v1);
    let (c2, s2) = fresnel(v2);
    ((c2 - c1).powi(2) + (s2 - s1).powi(2)).sqrt() / (2.0 * mu).sqrt()
}

/// Printed mean amplitude of the `n`-th transmit symbol on one antenna:
/// `|w_T + Σ_k w_k| · (n/𝓜) · Σ_{ξ odd, |ξ|<𝓜} e^{jξhπ/𝓜}`.
///
/// `weights` holds the antenna's row of the precoding matrix (sensing and
/// terminal entries together). The formula is evaluated exactly as stated;
/// its `n/𝓜` factor grows without bound in `n`, which a mean of a bounded
/// variable cannot do — see the companion test that quantifies the gap
/// against a Monte-Carlo average.
pub fn mean_symbol_amplitude(weights: &[C64], order: u32, h: f64, n: usize) -> Result<C64> {
    if order < 2 || !order.is_power_of_two() {
        return Err(Error::arg(format!("alphabet size must be a power of two ≥ 2, got {order}")));
    }
    let m = order as f64;
    let mut level_sum = C64::new(0.0, 0.0);
    let mut xi = -(order as i32) + 1;
    while xi <= order as i32 - 1 {
        let phase = xi as f64 * h * PI / m;
        level_sum += C64::from_polar(1.0, phase);
        xi += 2;
    }
    let w_sum: C64 = weights.iter().sum();
    Ok(level_sum * w_sum.norm() * (n as f64 / m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{PulseKind, SystemConfig};
    use crate::math::{cdot, derive_rng, integrate_gl};
    use crate::waveform::{cpm_modulate, mask_map, synthesize_chirp};
    use rand::Rng;

    fn table_config() -> SystemConfig {
        SystemConfig::default()
    }

    /// CPM-LFM block from seeded data bits on a single unit stream.
    fn data_block(cfg: &SystemConfig, mu: f64, seed: u64) -> ComplexSignal {
        let mut cfg = cfg.clone();
        cfg.chirp_rate = mu;
        let mut rng = derive_rng(seed, 0);
        let bits: Vec<u8> = (0..cfg.symbols_per_block * cfg.bits_per_symbol() as usize)
            .map(|_| rng.gen_range(0..2u8))
            .collect();
        let levels = mask_map(&bits, cfg.mask_order).unwrap();
        let cpm = cpm_modulate(&levels, cfg.mod_index());
        synthesize_chirp(&cpm.symbols, 1, &cfg).unwrap()
    }

    #[test]
    fn pure_tone_peaks_at_its_frequency() {
        // 1. A complex exponential at f₀ produces a single dominant line
        //    within one grid bin of f₀.
        let cfg = table_config();
        let fs = cfg.effective_sample_rate();
        let f0 = 2.0e5;
        let n = 320;
        let samples: Vec<C64> =
            (0..n).map(|i| C64::from_polar(1.0, 2.0 * PI * f0 * i as f64 / fs)).collect();
        let sig = ComplexSignal { samples, sample_rate: fs, t0: 0.0 };
        let spec = signal_spectrum(&sig).unwrap();
        assert!((spec.peak_freq() - f0).abs() <= spec.df(), "peak at {}", spec.peak_freq());
    }

    #[test]
    fn spectral_energy_matches_time_domain() {
        // 2. Parseval: Σ|mag|²·Δf equals Σ|s|²·Δt within 1e−6 relative.
        let cfg = table_config();
        let sig = data_block(&cfg, cfg.chirp_rate, 7);
        let spec = signal_spectrum(&sig).unwrap();
        let e_time = sig.energy();
        let e_freq = spec.energy();
        assert!(
            ((e_freq - e_time) / e_time).abs() < 1e-6,
            "freq {e_freq} vs time {e_time}"
        );
    }

    #[test]
    fn empty_signal_is_rejected() {
        let sig = ComplexSignal { samples: vec![], sample_rate: 1.0, t0: 0.0 };
        assert!(signal_spectrum(&sig).is_err());
    }

    /// Occupied bandwidth averaged over eight independently seeded blocks,
    /// damping the per-block speckle of the data-bearing spectrum.
    fn mean_occupied(cfg: &SystemConfig, mu: f64, seed: u64) -> f64 {
        let blocks = 8;
        (0..blocks)
            .map(|i| {
                signal_spectrum(&data_block(cfg, mu, seed + i)).unwrap().occupied_bandwidth
            })
            .sum::<f64>()
            / blocks as f64
    }

    #[test]
    fn occupied_bandwidth_is_sweep_plus_pulse_band() {
        // 3. Modulated up-chirp blocks: the −20 dB occupied band spans the
        //    sweep width plus the pulse bandwidth — B_w + 1/T_s = 1.2 MHz
        //    for the rectangular pulse, B_w + (1+β)/(2T_s) = 1.135 MHz for
        //    the raised-cosine pulse — within 15%.
        for pulse in [PulseKind::Rect, PulseKind::RaisedCosine] {
            let mut cfg = table_config();
            cfg.pulse = pulse;
            let got = mean_occupied(&cfg, cfg.chirp_rate, 11);
            let want = cfg.sweep_bandwidth() + cfg.pulse_bandwidth();
            assert!(
                (got - want).abs() < 0.15 * want,
                "{pulse:?}: occupied {got} vs {want}"
            );
        }
    }

    #[test]
    fn halving_the_sweep_rate_halves_the_sweep_contribution() {
        // 4. Halving μ removes ≈0.5 MHz of occupied band: the sweep share
        //    (occupied − pulse band) halves.
        let cfg = table_config();
        let full = mean_occupied(&cfg, 1.0e10, 13);
        let half = mean_occupied(&cfg, 0.5e10, 13);
        let shrink = full - half;
        assert!(
            (0.3e6..=0.7e6).contains(&shrink),
            "full {full} half {half} shrink {shrink}"
        );
        let bg = cfg.pulse_bandwidth();
        let ratio = (full - bg) / (half - bg);
        assert!((ratio - 2.0).abs() < 0.4, "sweep-share ratio {ratio}");
    }

    /// Brute-force `|∫₀^{T_B} e^{jπ(μt²−2ft)}dt|` with enough panels to
    /// resolve the total phase swing.
    fn sweep_transform_oracle(f: f64, mu: f64, t_b: f64) -> f64 {
        let span = (PI * mu * t_b * t_b).abs() + (2.0 * PI * f * t_b).abs();
        let panels = (span / PI).ceil() as usize + 8;
        let re = integrate_gl(|t| (PI * (mu * t * t - 2.0 * f * t)).cos(), 0.0, t_b, panels);
        let im = integrate_gl(|t| (PI * (mu * t * t - 2.0 * f * t)).sin(), 0.0, t_b, panels);
        (re * re + im * im).sqrt()
    }

    #[test]
    fn closed_form_matches_quadrature_oracle_everywhere() {
        // 5. The Fresnel closed form and direct quadrature agree to 1e−6
        //    absolute across the band and beyond it, for positive, negative,
        //    and zero sweep rates.
        let cfg = table_config();
        let t_b = cfg.block_time();
        for &mu in &[1.0e10_f64, 5.0e9, -1.0e10, 0.0] {
            for &f in &[-2.0e6, -7.5e5, -1.0e5, 0.0, 1.3e5, 5.0e5, 9.0e5, 1.1e6, 2.0e6] {
                let got = lfm_spectrum_magnitude(f, mu, t_b);
                let want = sweep_transform_oracle(f, mu, t_b);
                assert!(
                    (got - want).abs() < 1e-6,
                    "mu={mu} f={f}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn band_center_sits_on_the_plateau() {
        // 6. At the sweep-band center the magnitude is within 5% of the
        //    flat-top level 1/√μ; ten sweep-widths out it is below 5% of it.
        let cfg = table_config();
        let mu = cfg.chirp_rate;
        let t_b = cfg.block_time();
        let plateau = 1.0 / mu.sqrt();
        let center = lfm_spectrum_magnitude(cfg.sweep_bandwidth() / 2.0, mu, t_b);
        assert!((center - plateau).abs() < 0.05 * plateau, "center {center} vs {plateau}");
        let far = lfm_spectrum_magnitude(10.0 * cfg.sweep_bandwidth(), mu, t_b);
        assert!(far < 0.05 * plateau, "far {far}");
    }

    #[test]
    fn negative_rate_reflects_the_frequency_axis() {
        let t_b = 1e-4;
        for &f in &[-1.0e6, -2.0e5, 0.0, 3.0e5, 1.5e6] {
            let a = lfm_spectrum_magnitude(f, -1.0e10, t_b);
            let b = lfm_spectrum_magnitude(-f, 1.0e10, t_b);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn binary_half_index_level_sum_is_sqrt_two() {
        // 7. 𝓜=2, h=1/2: the alphabet sum is e^{jπ/4}+e^{−jπ/4} = √2, so the
        //    value is |Σ weights|·(n/2)·√2, purely real.
        let w = [C64::new(0.6, 0.2), C64::new(-0.1, 0.4)];
        let n = 6;
        let got = mean_symbol_amplitude(&w, 2, 0.5, n).unwrap();
        let w_sum_mag = (w[0] + w[1]).norm();
        let want = w_sum_mag * (n as f64 / 2.0) * 2.0_f64.sqrt();
        assert!((got.re - want).abs() < 1e-12 && got.im.abs() < 1e-12, "{got}");
    }

    #[test]
    fn alphabet_sum_is_real_for_unit_index() {
        // 8. h=1 with an even alphabet: conjugate-symmetric phases make the
        //    level sum real.
        for order in [2u32, 4, 8] {
            let w = [C64::new(1.0, 0.0)];
            let v = mean_symbol_amplitude(&w, order, 1.0, 5).unwrap();
            assert!(v.im.abs() < 1e-12, "order {order}: {v}");
        }
    }

    #[test]
    fn printed_amplitude_departs_from_monte_carlo_mean() {
        // 9. For one unit-modulus stream the empirical 𝔼|x_n| is exactly 1
        //    for every n, while the printed formula grows like n/𝓜; the test
        //    records that gap rather than hiding it.
        let order = 2u32;
        let h = 0.5;
        let n_symbol = 19; // inspect the last symbol of a 20-symbol block
        let weights = [C64::new(1.0, 0.0)];
        let mut rng = derive_rng(42, 9);
        let draws = 100_000;
        let mut acc = 0.0;
        for _ in 0..draws {
            let bits: Vec<u8> = (0..n_symbol + 1).map(|_| rng.gen_range(0..2u8)).collect();
            let levels = mask_map(&bits, order).unwrap();
            let cpm = cpm_modulate(&levels, h);
            let x = cdot(&weights, &[cpm.symbols[n_symbol]]);
            acc += x.norm();
        }
        let empirical = acc / draws as f64;
        assert!((empirical - 1.0).abs() < 1e-9, "unit-modulus mean is 1, got {empirical}");
        let printed = mean_symbol_amplitude(&weights, order, h, n_symbol).unwrap().norm();
        assert!(
            printed > 5.0 * empirical,
            "expected the printed value {printed} to overshoot the empirical mean {empirical}"
        );
    }

    #[test]
    fn amplitude_rejects_bad_alphabet() {
        assert!(mean_symbol_amplitude(&[C64::new(1.0, 0.0)], 3, 0.5, 1).is_err());
        assert!(mean_symbol_amplitude(&[C64::new(1.0, 0.0)], 1, 0.5, 1).is_err());
    }
}
