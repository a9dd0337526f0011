//! Transmit waveform construction.
//!
//! The downlink signal carries every stream through the same three stages:
//! bits → Gray-coded amplitude levels → phase-accumulating modulation
//! (each level advances a running phase by `level·h·π`, so symbols are
//! unit-modulus), and finally the per-antenna baseband is the precoded
//! symbol sequence shaped by the transmit pulse and multiplied by a linear
//! chirp whose slope sign alternates block to block.

use num_complex::Complex64;

use crate::config::{PulseKind, SystemConfig};
use crate::error::{Error, Result};
use crate::math::{cdot, norm_sq, C64, CMat};

// ── Symbol mapping ──────────────────────────────────────────────────────────

/// Maps a bit string onto Gray-coded odd amplitude levels
/// `{±1, ±3, …, ±(order−1)}`.
///
/// Bits are consumed `log2(order)` at a time, most significant first;
/// adjacent levels differ in exactly one input bit. Errors when the bit
/// count is not a multiple of the group size.
pub fn mask_map(bits: &[u8], order: u32) -> Result<Vec<i32>> {
    if order < 2 || !order.is_power_of_two() {
        return Err(Error::arg(format!("alphabet size must be a power of two ≥ 2, got {order}")));
    }
    let g = order.trailing_zeros() as usize;
    if bits.len() % g != 0 {
        return Err(Error::arg(format!(
            "bit count {} is not a multiple of the {g}-bit group size",
            bits.len()
        )));
    }
    if let Some(&b) = bits.iter().find(|&&b| b > 1) {
        return Err(Error::arg(format!("bits must be 0 or 1, got {b}")));
    }
    Ok(bits
        .chunks(g)
        .map(|chunk| {
            let v = chunk.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
            let idx = gray_decode(v);
            2 * idx as i32 - (order as i32 - 1)
        })
        .collect())
}

/// Inverse of [`mask_map`] for one level: the bit group (MSB first) that
/// maps to `level`.
pub fn mask_demap(level: i32, order: u32) -> Result<Vec<u8>> {
    let g = order.trailing_zeros() as usize;
    let idx = (level + order as i32 - 1) / 2;
    if level.rem_euclid(2) == 0 || idx < 0 || idx >= order as i32 {
        return Err(Error::arg(format!(
            "level {level} is not an odd level of the size-{order} alphabet"
        )));
    }
    let v = gray_encode(idx as u32);
    Ok((0..g).rev().map(|b| ((v >> b) & 1) as u8).collect())
}

fn gray_encode(v: u32) -> u32 {
    v ^ (v >> 1)
}

fn gray_decode(mut v: u32) -> u32 {
    let mut out = 0;
    while v != 0 {
        out ^= v;
        v >>= 1;
    }
    out
}

// ── Phase-accumulating modulation ───────────────────────────────────────────

/// Modulated symbol sequence of one stream within one block.
#[derive(Debug, Clone, PartialEq)]
pub struct CpmBaseband {
    /// Amplitude levels driving the phase accumulator.
    pub levels: Vec<i32>,
    /// Accumulated phases `β_n = Σ_{i≤n} level_i·h·π` (block starts at 0).
    pub phases: Vec<f64>,
    /// Unit-modulus symbols `exp(j·β_n)`.
    pub symbols: Vec<C64>,
}

/// Runs the phase accumulator over `levels` with modulation index `h`.
///
/// The accumulator starts from phase 0 at every block, so the symbol for
/// slot `n` carries the running sum of all levels up to and including `n`.
pub fn cpm_modulate(levels: &[i32], h: f64) -> CpmBaseband {
    let mut phases = Vec::with_capacity(levels.len());
    let mut symbols = Vec::with_capacity(levels.len());
    let mut beta = 0.0;
    for &b in levels {
        beta += b as f64 * h * std::f64::consts::PI;
        phases.push(beta);
        symbols.push(Complex64::from_polar(1.0, beta));
    }
    CpmBaseband {
        levels: levels.to_vec(),
        phases,
        symbols,
    }
}

// ── Precoding ───────────────────────────────────────────────────────────────

/// Beamforming weights and per-stream powers for one block.
///
/// Streams are ordered terminals first (by id), then the sensing stream
/// last. Weight columns are unit-norm; all transmit power lives in
/// `p_user` / `p_target`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderState {
    /// One unit-norm weight column per served terminal.
    pub w_user: Vec<Vec<C64>>,
    /// Unit-norm weight column of the sensing stream.
    pub w_target: Vec<C64>,
    /// Power assigned to each terminal stream, W.
    pub p_user: Vec<f64>,
    /// Power assigned to the sensing stream, W.
    pub p_target: f64,
}

impl PrecoderState {
    /// Number of terminal streams.
    pub fn n_users(&self) -> usize {
        self.w_user.len()
    }

    /// Total allocated power.
    pub fn total_power(&self) -> f64 {
        self.p_user.iter().sum::<f64>() + self.p_target
    }

    /// Columns scaled by the square root of their power, terminals first,
    /// sensing stream last: the effective transmit matrix `W·√P`.
    pub fn weighted_columns(&self) -> CMat {
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(self.n_users() + 1);
        for (w, &p) in self.w_user.iter().zip(&self.p_user) {
            cols.push(w.iter().map(|x| x * p.sqrt()).collect());
        }
        cols.push(self.w_target.iter().map(|x| x * self.p_target.sqrt()).collect());
        CMat::from_cols(&cols)
    }

    /// Checks unit-norm columns and non-negative powers.
    pub fn validate(&self) -> Result<()> {
        if self.w_user.len() != self.p_user.len() {
            return Err(Error::arg("one power per terminal stream required"));
        }
        for (i, w) in self.w_user.iter().chain(std::iter::once(&self.w_target)).enumerate() {
            let n = norm_sq(w);
            if (n - 1.0).abs() > 1e-9 {
                return Err(Error::arg(format!(
                    "weight column {i} must be unit norm, got ‖w‖² = {n}"
                )));
            }
        }
        if self.p_user.iter().any(|&p| p < 0.0) || self.p_target < 0.0 {
            return Err(Error::arg("stream powers must be non-negative"));
        }
        Ok(())
    }
}

/// Precodes one block: `X = Σ_s √P_s · w_s · c_sᵀ`, one row per transmit
/// element and one column per symbol slot.
///
/// `streams` must hold one modulated sequence per terminal (id order)
/// followed by the sensing stream, all of equal length.
pub fn precode_block(state: &PrecoderState, streams: &[&CpmBaseband]) -> Result<CMat> {
    state.validate()?;
    if streams.len() != state.n_users() + 1 {
        return Err(Error::arg(format!(
            "expected {} streams (terminals + sensing), got {}",
            state.n_users() + 1,
            streams.len()
        )));
    }
    let n = streams[0].symbols.len();
    if streams.iter().any(|s| s.symbols.len() != n) {
        return Err(Error::arg("all streams must have the same block length"));
    }
    let nt = state.w_target.len();
    if state.w_user.iter().any(|w| w.len() != nt) {
        return Err(Error::arg("all weight columns must have the same element count"));
    }
    let mut x = CMat::zeros(nt, n);
    let cols: Vec<(&Vec<C64>, f64)> = state
        .w_user
        .iter()
        .zip(state.p_user.iter().copied())
        .chain(std::iter::once((&state.w_target, state.p_target)))
        .collect();
    for (s, (w, p)) in streams.iter().zip(cols) {
        let a = p.sqrt();
        for (row, &wv) in w.iter().enumerate() {
            let coef = a * wv;
            for (col, &c) in s.symbols.iter().enumerate() {
                x[(row, col)] += coef * c;
            }
        }
    }
    Ok(x)
}

// ── Pulse shaping and chirp synthesis ───────────────────────────────────────

/// Sampled complex baseband signal.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSignal {
    /// Complex samples.
    pub samples: Vec<C64>,
    /// Sampling rate, Hz.
    pub sample_rate: f64,
    /// Time of the first sample, s.
    pub t0: f64,
}

impl ComplexSignal {
    /// Number of samples.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// True when the signal holds no samples.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sample spacing, s.
    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    /// Covered time span, s.
    pub fn duration(&self) -> f64 {
        self.len() as f64 * self.dt()
    }

    /// Signal energy `Σ|s|²·dt`.
    pub fn energy(&self) -> f64 {
        norm_sq(&self.samples) * self.dt()
    }

    /// Time of sample `i`.
    pub fn time_at(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt()
    }
}

/// Transmit pulse value `g(t)` for a pulse anchored at slot start `t = 0`.
///
/// The rectangular pulse is 1 on `[0, T_s)`. The raised-cosine pulse is the
/// Nyquist pulse centered mid-slot, truncated to ±4 slots, and scaled so its
/// energy matches the rectangular pulse (`∫|g|² dt = T_s`); with that
/// convention stream power accounting is identical for both shapes.
pub fn pulse_value(kind: PulseKind, rolloff: f64, t: f64, ts: f64) -> f64 {
    match kind {
        PulseKind::Rect => {
            if (0.0..ts).contains(&t) {
                1.0
            } else {
                0.0
            }
        }
        PulseKind::RaisedCosine => {
            let tc = (t - 0.5 * ts) / ts; // slot-centered, in symbol units
            if tc.abs() > 4.0 {
                return 0.0;
            }
            raised_cosine(tc, rolloff) * rc_energy_scale(rolloff)
        }
    }
}

/// Raised-cosine Nyquist pulse in symbol units (peak 1 at 0).
fn raised_cosine(x: f64, a: f64) -> f64 {
    let sinc = |v: f64| {
        if v.abs() < 1e-12 {
            1.0
        } else {
            (std::f64::consts::PI * v).sin() / (std::f64::consts::PI * v)
        }
    };
    if a > 0.0 {
        let den = 1.0 - (2.0 * a * x) * (2.0 * a * x);
        if den.abs() < 1e-8 {
            // L'Hôpital limit at the roll-off singularity x = ±1/(2a).
            return (std::f64::consts::FRAC_PI_4) * sinc(1.0 / (2.0 * a));
        }
        sinc(x) * (std::f64::consts::PI * a * x).cos() / den
    } else {
        sinc(x)
    }
}

/// Scale that gives the truncated raised-cosine pulse energy `T_s`.
fn rc_energy_scale(rolloff: f64) -> f64 {
    // ∫ rc(x)² dx over the ±4-symbol truncation, in symbol units.
    let e = crate::math::integrate_gl(|x| raised_cosine(x, rolloff).powi(2), -4.0, 4.0, 64);
    (1.0 / e).sqrt()
}

/// Squared pulse norm `∫|g(t)|² dt`; both shapes are normalized to `T_s`.
pub fn pulse_norm_sq(cfg: &SystemConfig) -> f64 {
    match cfg.pulse {
        PulseKind::Rect => cfg.symbol_time,
        PulseKind::RaisedCosine => cfg.symbol_time,
    }
}

/// Synthesizes the sampled baseband of one block on one transmit element:
/// `s(t) = Σ_n x_n · g(t − n·T_s) · exp(j·sign·π·μ·t²)` over `[0, N·T_s)`.
///
/// `x_row` is that element's precoded symbol row; `sign` selects the up or
/// down chirp.
pub fn synthesize_chirp(x_row: &[C64], sign: i8, cfg: &SystemConfig) -> Result<ComplexSignal> {
    if x_row.len() != cfg.symbols_per_block {
        return Err(Error::arg(format!(
            "symbol row length {} does not match block length {}",
            x_row.len(),
            cfg.symbols_per_block
        )));
    }
    if sign != 1 && sign != -1 {
        return Err(Error::arg(format!("chirp sign must be ±1, got {sign}")));
    }
    let fs = cfg.effective_sample_rate();
    let dt = 1.0 / fs;
    let ts = cfg.symbol_time;
    let n_samp = (cfg.block_time() * fs).round() as usize;
    let mut samples = Vec::with_capacity(n_samp);
    // Pulse tail reach in whole slots on each side (rect: this slot only).
    let reach = match cfg.pulse {
        PulseKind::Rect => 0isize,
        PulseKind::RaisedCosine => 4,
    };
    for i in 0..n_samp {
        let t = i as f64 * dt;
        let slot = (t / ts) as isize;
        let mut env = Complex64::new(0.0, 0.0);
        let lo = (slot - reach).max(0);
        let hi = (slot + reach).min(cfg.symbols_per_block as isize - 1);
        for n in lo..=hi {
            let g = pulse_value(cfg.pulse, cfg.rolloff, t - n as f64 * ts, ts);
            if g != 0.0 {
                env += x_row[n as usize] * g;
            }
        }
        let chirp_phase = sign as f64 * std::f64::consts::PI * cfg.chirp_rate * t * t;
        samples.push(env * Complex64::from_polar(1.0, chirp_phase));
    }
    Ok(ComplexSignal {
        samples,
        sample_rate: fs,
        t0: 0.0,
    })
}

/// Beam-space envelope of a block through a combining row `a` (no chirp):
/// sample `i` of `Σ_n (a·X e_n) · g(t_i − n·T_s)`.
///
/// This is the modulation reference a receiver that knows the transmitted
/// data uses to strip symbol modulation before tone estimation.
pub fn beamspace_envelope(a: &[C64], x: &CMat, cfg: &SystemConfig) -> Result<ComplexSignal> {
    if a.len() != x.nr {
        return Err(Error::arg("combining row length must match transmit rows"));
    }
    let u: Vec<C64> = (0..x.nc).map(|n| cdot(a, &x.col(n))).collect();
    synthesize_chirp(&u, 1, &SystemConfig { chirp_rate: 0.0, ..cfg.clone() })
}
