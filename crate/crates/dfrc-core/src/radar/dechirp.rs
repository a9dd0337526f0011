//! Dechirp processing: reference-sweep mixing, beat-tone estimation,
//! envelope wipe-off, and latency/Doppler inversion to range and velocity.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::channel::EchoBlock;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::math::{fft_forward, parabolic_peak_offset, SPEED_OF_LIGHT};
use crate::waveform::ComplexSignal;

/// Beat frequencies and the target parameters they imply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarEstimate {
    /// Up-sweep beat frequency, Hz (nonnegative).
    pub f_up: f64,
    /// Down-sweep beat frequency, Hz (nonnegative).
    pub f_down: f64,
    /// Round-trip latency estimate, s.
    pub tau_hat: f64,
    /// Doppler estimate, Hz.
    pub f_d_hat: f64,
    /// Range estimate `c·τ̂/2`, m.
    pub range_hat: f64,
    /// Radial velocity estimate `λ·f̂_d/2`, m/s.
    pub velocity_hat: f64,
}

/// Closed-form resolution figures of the sweep waveform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionReport {
    /// Time-bandwidth product `T_B·B_w` (pulse-compression gain).
    pub kappa: f64,
    /// Range resolution `c/(2·B_w)`, m.
    pub d_min: f64,
    /// Velocity resolution `λ/(2·T_B)`, m/s.
    pub v_min: f64,
    /// Latency null width `1/B_w`, s.
    pub tau_w: f64,
    /// Doppler null width `1/(N·T_s)`, Hz.
    pub fd_w: f64,
}

/// Mixes `rx` with the conjugate reference sweep `e^{−j·sign·πμt²}`,
/// leaving the beat tone at `±μτ + f_d` (sign per sweep direction). The
/// conjugate mix at complex baseband needs no explicit low-pass stage: no
/// image band exists.
pub fn dechirp(rx: &ComplexSignal, chirp_sign: i8, cfg: &SystemConfig) -> Result<ComplexSignal> {
    if chirp_sign != 1 && chirp_sign != -1 {
        return Err(Error::arg(format!("sweep sign must be ±1, got {chirp_sign}")));
    }
    let expected = (cfg.effective_sample_rate() * cfg.block_time()).round() as usize;
    if rx.len() != expected {
        return Err(Error::arg(format!(
            "dechirp needs one full block of {expected} samples, got {}",
            rx.len()
        )));
    }
    let mu = chirp_sign as f64 * cfg.chirp_rate;
    let dt = rx.dt();
    let samples = rx
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let t = i as f64 * dt;
            s * C64::from_polar(1.0, -PI * mu * t * t)
        })
        .collect();
    Ok(ComplexSignal { samples, sample_rate: rx.sample_rate, t0: rx.t0 })
}

/// Signed frequency of the dominant tone, from an 8×-zero-padded DFT with
/// three-point parabolic peak refinement.
pub fn estimate_beat(sig: &ComplexSignal) -> Result<f64> {
    if sig.is_empty() {
        return Err(Error::arg("cannot estimate a beat tone on an empty signal"));
    }
    let (peak_bin, offset, nfft) = padded_peak(&sig.samples)?;
    let k = if peak_bin as f64 > nfft as f64 / 2.0 {
        peak_bin as f64 - nfft as f64
    } else {
        peak_bin as f64
    };
    Ok((k + offset) * sig.sample_rate / nfft as f64)
}

/// Peak bin, sub-bin offset, and transform size of the zero-padded DFT.
fn padded_peak(samples: &[C64]) -> Result<(usize, f64, usize)> {
    let nfft = (8 * samples.len()).next_power_of_two();
    let mut buf = vec![C64::new(0.0, 0.0); nfft];
    buf[..samples.len()].copy_from_slice(samples);
    fft_forward(&mut buf);
    let mags: Vec<f64> = buf.iter().map(|v| v.norm()).collect();
    let mut peak = 0;
    for (i, m) in mags.iter().enumerate() {
        if *m > mags[peak] {
            peak = i;
        }
    }
    if mags[peak] == 0.0 {
        return Err(Error::numerical("all-zero signal has no spectral peak"));
    }
    let prev = mags[(peak + nfft - 1) % nfft];
    let next = mags[(peak + 1) % nfft];
    Ok((peak, parabolic_peak_offset(prev, mags[peak], next), nfft))
}

/// Largest padded-DFT magnitude — the figure of merit the wipe-off search
/// maximizes.
fn peak_magnitude(samples: &[C64]) -> f64 {
    let nfft = (8 * samples.len()).next_power_of_two();
    let mut buf = vec![C64::new(0.0, 0.0); nfft];
    buf[..samples.len()].copy_from_slice(samples);
    fft_forward(&mut buf);
    buf.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Combines the receive elements of one echo block with the given row of
/// weights: `y[i] = Σ_m v[m]·rx_m[i]` (weights applied as given, no implicit
/// conjugation).
pub fn combine_rx(block: &EchoBlock, v: &[C64]) -> Result<ComplexSignal> {
    if v.len() != block.samples.nr {
        return Err(Error::arg(format!(
            "expected {} combining weights, got {}",
            block.samples.nr,
            v.len()
        )));
    }
    let n = block.samples.nc;
    let mut samples = vec![C64::new(0.0, 0.0); n];
    for (m, w) in v.iter().enumerate() {
        for (i, out) in samples.iter_mut().enumerate() {
            *out += w * block.samples[(m, i)];
        }
    }
    Ok(ComplexSignal { samples, sample_rate: block.sample_rate, t0: 0.0 })
}

/// Removes the data-dependent phase of a dechirped signal by conjugating a
/// delayed copy of the known transmit envelope against it.
///
/// The envelope delay (in whole samples) is unknown at the receiver, so all
/// shifts `0..=max_shift` are tried and the one leaving the strongest
/// spectral line wins. Returns the corrected signal and the chosen shift.
pub fn wipe_modulation(
    sig: &ComplexSignal,
    envelope: &ComplexSignal,
    max_shift: usize,
) -> Result<(ComplexSignal, usize)> {
    if sig.is_empty() || envelope.len() != sig.len() {
        return Err(Error::arg("signal and envelope must share a nonempty length"));
    }
    let floor = 1e-6 * envelope.samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if floor == 0.0 {
        return Err(Error::arg("envelope is identically zero"));
    }
    let mut best: Option<(f64, usize, Vec<C64>)> = None;
    for shift in 0..=max_shift.min(sig.len() - 1) {
        let corrected: Vec<C64> = sig
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| {
                if i < shift {
                    return C64::new(0.0, 0.0);
                }
                let e = envelope.samples[i - shift];
                if e.norm() < floor {
                    C64::new(0.0, 0.0)
                } else {
                    s * (e.conj() / e.norm())
                }
            })
            .collect();
        let score = peak_magnitude(&corrected);
        if best.as_ref().map_or(true, |(s, _, _)| score > *s) {
            best = Some((score, shift, corrected));
        }
    }
    let (_, shift, samples) = best.expect("at least one shift evaluated");
    Ok((ComplexSignal { samples, sample_rate: sig.sample_rate, t0: sig.t0 }, shift))
}

/// Inverts a pair of nonnegative beat frequencies into latency, Doppler,
/// range, and velocity: `τ̂ = (f_up+f_down)/(2μ)`, `f̂_d = (f_down−f_up)/2`.
pub fn estimate_target(f_up: f64, f_down: f64, cfg: &SystemConfig) -> Result<RadarEstimate> {
    if cfg.chirp_rate == 0.0 {
        return Err(Error::arg("beat inversion requires a nonzero sweep rate"));
    }
    if f_up < 0.0 || f_down < 0.0 {
        return Err(Error::arg(format!(
            "beat frequencies must be nonnegative, got ({f_up}, {f_down})"
        )));
    }
    let tau_hat = (f_up + f_down) / (2.0 * cfg.chirp_rate);
    let f_d_hat = (f_down - f_up) / 2.0;
    Ok(RadarEstimate {
        f_up,
        f_down,
        tau_hat,
        f_d_hat,
        range_hat: SPEED_OF_LIGHT * tau_hat / 2.0,
        velocity_hat: cfg.wavelength() * f_d_hat / 2.0,
    })
}

/// Closed-form resolution figures for the configured sweep.
pub fn resolution_report(cfg: &SystemConfig) -> Result<ResolutionReport> {
    if cfg.chirp_rate == 0.0 {
        return Err(Error::arg("resolution figures are undefined without a sweep"));
    }
    let t_b = cfg.block_time();
    let b_w = cfg.sweep_bandwidth().abs();
    Ok(ResolutionReport {
        kappa: t_b * b_w,
        d_min: SPEED_OF_LIGHT / (2.0 * b_w),
        v_min: cfg.wavelength() / (2.0 * t_b),
        tau_w: 1.0 / b_w,
        fd_w: 1.0 / t_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{target_echo, EchoParams};
    use crate::frame::Direction;
    use crate::math::derive_rng;
    use crate::waveform::{beamspace_envelope, cpm_modulate, mask_map, synthesize_chirp};
    use crate::math::CMat;
    use rand::Rng;

    /// Single-antenna configuration: echoes reduce to scalar delay–Doppler
    /// copies of the transmit signal.
    fn scalar_config() -> SystemConfig {
        let mut cfg = SystemConfig::default();
        cfg.n_tx_x = 1;
        cfg.n_tx_y = 1;
        cfg.n_rx_x = 1;
        cfg.n_rx_y = 1;
        cfg
    }

    fn broadside() -> Direction {
        Direction { theta: 0.0, phi: 0.0 }
    }

    fn plain_chirp(cfg: &SystemConfig, sign: i8) -> ComplexSignal {
        let ones = vec![C64::new(1.0, 0.0); cfg.symbols_per_block];
        synthesize_chirp(&ones, sign, cfg).unwrap()
    }

    /// Scalar echo of `tx` with the given latency/Doppler, no noise.
    fn scalar_echo(cfg: &SystemConfig, tx: &ComplexSignal, tau: f64, f_d: f64) -> ComplexSignal {
        let echo = EchoParams { tau, f_d, gain: 1.0, rcs: 1.0 };
        let mut rng = derive_rng(1, 0);
        let block =
            target_echo(cfg, &[tx.clone()], &echo, broadside(), None, 0.0, &mut rng).unwrap();
        ComplexSignal { samples: block.element(0), sample_rate: block.sample_rate, t0: 0.0 }
    }

    #[test]
    fn zero_latency_echo_dechirps_to_dc() {
        // 1. τ=0, f_d=0: mixing with the conjugate reference leaves DC.
        let cfg = scalar_config();
        let tx = plain_chirp(&cfg, 1);
        let rx = scalar_echo(&cfg, &tx, 0.0, 0.0);
        let beat = estimate_beat(&dechirp(&rx, 1, &cfg).unwrap()).unwrap();
        let bin = cfg.effective_sample_rate() / 4096.0;
        assert!(beat.abs() <= bin, "beat {beat}");
    }

    #[test]
    fn latency_maps_to_sweep_rate_times_delay() {
        // 2. τ=10 μs, f_d=0, up-sweep: |beat| = μτ = 100 kHz within a bin.
        let cfg = scalar_config();
        let tx = plain_chirp(&cfg, 1);
        let rx = scalar_echo(&cfg, &tx, 1.0e-5, 0.0);
        let beat = estimate_beat(&dechirp(&rx, 1, &cfg).unwrap()).unwrap();
        assert!((beat.abs() - 1.0e5).abs() < 800.0, "beat {beat}");
    }

    #[test]
    fn doppler_splits_the_up_and_down_beats() {
        // 3. τ=10 μs, f_d=1 kHz: up beat 99 kHz, down beat 101 kHz.
        let cfg = scalar_config();
        let (tau, f_d) = (1.0e-5, 1.0e3);

        let up_rx = scalar_echo(&cfg, &plain_chirp(&cfg, 1), tau, f_d);
        let f_up = estimate_beat(&dechirp(&up_rx, 1, &cfg).unwrap()).unwrap().abs();
        assert!((f_up - 9.9e4).abs() < 800.0, "up beat {f_up}");

        let down_rx = scalar_echo(&cfg, &plain_chirp(&cfg, -1), tau, f_d);
        let f_down = estimate_beat(&dechirp(&down_rx, -1, &cfg).unwrap()).unwrap().abs();
        assert!((f_down - 1.01e5).abs() < 800.0, "down beat {f_down}");
    }

    #[test]
    fn beat_inversion_arithmetic() {
        // 4. (99 kHz, 101 kHz) at μ=1e10 → τ=10 μs, f_d=1 kHz, 1500 m,
        //    62.5 m/s; the all-zero case degenerates cleanly.
        let cfg = SystemConfig::default();
        let est = estimate_target(9.9e4, 1.01e5, &cfg).unwrap();
        assert!((est.tau_hat - 1.0e-5).abs() < 1e-18);
        assert!((est.f_d_hat - 1.0e3).abs() < 1e-9);
        assert!((est.range_hat - 1500.0).abs() < 1e-9);
        assert!((est.velocity_hat - 62.5).abs() < 1e-12);

        let zero = estimate_target(0.0, 0.0, &cfg).unwrap();
        assert_eq!(zero.range_hat, 0.0);
        assert_eq!(zero.velocity_hat, 0.0);

        assert!(estimate_target(-1.0, 0.0, &cfg).is_err());
        let mut degenerate = cfg.clone();
        degenerate.chirp_rate = 0.0;
        assert!(estimate_target(1.0, 1.0, &degenerate).is_err());
    }

    #[test]
    fn modulated_round_trip_recovers_range_and_velocity() {
        // 5. Full loop with data modulation: echo → dechirp → envelope
        //    wipe-off → beat inversion lands within 1% of 1500 m and a few
        //    m/s of 62.5 m/s, noiseless.
        let cfg = scalar_config();
        let mut rng = derive_rng(21, 0);
        let bits: Vec<u8> =
            (0..cfg.symbols_per_block).map(|_| rng.gen_range(0..2u8)).collect();
        let levels = mask_map(&bits, cfg.mask_order).unwrap();
        let cpm = cpm_modulate(&levels, cfg.mod_index());
        let x = CMat::from_rows(&[cpm.symbols.clone()]);
        let envelope = beamspace_envelope(&[C64::new(1.0, 0.0)], &x, &cfg).unwrap();

        let (range, speed) = (1500.0, 62.5);
        let echo = EchoParams::from_geometry(&cfg, range, speed, 1.0).unwrap();
        let mut beats = Vec::new();
        for sign in [1i8, -1] {
            let tx = synthesize_chirp(&cpm.symbols, sign, &cfg).unwrap();
            let block = target_echo(
                &cfg,
                &[tx],
                &EchoParams { gain: 1.0, ..echo },
                broadside(),
                None,
                0.0,
                &mut rng,
            )
            .unwrap();
            let rx = ComplexSignal {
                samples: block.element(0),
                sample_rate: block.sample_rate,
                t0: 0.0,
            };
            let mixed = dechirp(&rx, sign, &cfg).unwrap();
            let (clean, shift) = wipe_modulation(&mixed, &envelope, 160).unwrap();
            let expect_shift = (echo.tau * cfg.effective_sample_rate()).round() as usize;
            assert!(
                (shift as i64 - expect_shift as i64).abs() <= 1,
                "sign {sign}: shift {shift} vs {expect_shift}"
            );
            beats.push(estimate_beat(&clean).unwrap().abs());
        }
        let est = estimate_target(beats[0], beats[1], &cfg).unwrap();
        assert!(
            (est.range_hat - range).abs() < 0.01 * range,
            "range {} vs {range}",
            est.range_hat
        );
        assert!(
            (est.velocity_hat - speed).abs() < 50.0,
            "velocity {} vs {speed}",
            est.velocity_hat
        );
    }

    #[test]
    fn wipe_off_finds_the_envelope_shift() {
        // 6. A shifted envelope times a tone is restored to a clean tone at
        //    the planted shift.
        let cfg = scalar_config();
        let mut rng = derive_rng(33, 0);
        let bits: Vec<u8> =
            (0..cfg.symbols_per_block).map(|_| rng.gen_range(0..2u8)).collect();
        let levels = mask_map(&bits, cfg.mask_order).unwrap();
        let cpm = cpm_modulate(&levels, cfg.mod_index());
        let x = CMat::from_rows(&[cpm.symbols.clone()]);
        let envelope = beamspace_envelope(&[C64::new(1.0, 0.0)], &x, &cfg).unwrap();

        let planted = 37usize;
        let f0 = 5.0e4;
        let dt = envelope.dt();
        let samples: Vec<C64> = (0..envelope.len())
            .map(|i| {
                let e = if i >= planted {
                    envelope.samples[i - planted]
                } else {
                    C64::new(0.0, 0.0)
                };
                e * C64::from_polar(1.0, 2.0 * PI * f0 * i as f64 * dt)
            })
            .collect();
        let sig = ComplexSignal { samples, sample_rate: envelope.sample_rate, t0: 0.0 };
        let (clean, shift) = wipe_modulation(&sig, &envelope, 80).unwrap();
        assert_eq!(shift, planted);
        let beat = estimate_beat(&clean).unwrap();
        assert!((beat - f0).abs() < 800.0, "beat {beat}");
    }

    #[test]
    fn element_combining_is_the_stated_weighted_sum() {
        // 7. combine_rx applies the weights exactly as given.
        let cfg = SystemConfig::default();
        let mut rng = derive_rng(5, 1);
        let nr = cfg.n_rx();
        let n = 16;
        let mut mat = CMat::zeros(nr, n);
        for m in 0..nr {
            for i in 0..n {
                mat[(m, i)] = crate::math::complex_gaussian(&mut rng, 1.0);
            }
        }
        let block = EchoBlock { samples: mat.clone(), sample_rate: 1.0 };
        let v: Vec<C64> = (0..nr).map(|_| crate::math::complex_gaussian(&mut rng, 1.0)).collect();
        let y = combine_rx(&block, &v).unwrap();
        for i in 0..n {
            let mut want = C64::new(0.0, 0.0);
            for m in 0..nr {
                want += v[m] * mat[(m, i)];
            }
            assert!((y.samples[i] - want).norm() < 1e-12);
        }
        assert!(combine_rx(&block, &v[..nr - 1]).is_err());
    }

    #[test]
    fn resolution_figures_for_the_default_sweep() {
        // 8. κ=100, d_min=150 m, v_min=625 m/s, τ_w=1 μs, f_dw=10 kHz.
        let cfg = SystemConfig::default();
        let rep = resolution_report(&cfg).unwrap();
        assert!((rep.kappa - 100.0).abs() < 1e-9);
        assert!((rep.d_min - 150.0).abs() < 1e-9);
        assert!((rep.v_min - 625.0).abs() < 1e-9);
        assert!((rep.tau_w - 1.0e-6).abs() < 1e-18);
        assert!((rep.fd_w - 1.0e4).abs() < 1e-9);
    }

    #[test]
    fn doubling_the_block_at_fixed_sweep_width() {
        // 9. Twice the symbols at half the rate keeps B_w: the Doppler null
        //    width halves and the time-bandwidth product doubles.
        let cfg = SystemConfig::default();
        let mut doubled = cfg.clone();
        doubled.symbols_per_block *= 2;
        doubled.chirp_rate /= 2.0;
        let (a, b) = (resolution_report(&cfg).unwrap(), resolution_report(&doubled).unwrap());
        assert!((b.fd_w - a.fd_w / 2.0).abs() < 1e-9);
        assert!((b.kappa - 2.0 * a.kappa).abs() < 1e-9);

        let mut degenerate = cfg;
        degenerate.chirp_rate = 0.0;
        assert!(resolution_report(&degenerate).is_err());
    }

    #[test]
    fn dechirp_rejects_bad_inputs() {
        let cfg = scalar_config();
        let tx = plain_chirp(&cfg, 1);
        assert!(dechirp(&tx, 2, &cfg).is_err());
        let short = ComplexSignal {
            samples: tx.samples[..10].to_vec(),
            sample_rate: tx.sample_rate,
            t0: 0.0,
        };
        assert!(dechirp(&short, 1, &cfg).is_err());
    }
}
