//! Array geometry, downlink channels, and the sensing echo.
//!
//! Both ends of the link use uniform rectangular arrays in the x–y plane.
//! Downlink channels are line-of-sight steering vectors scaled by distance
//! pathloss and log-normal shadowing. The sensing echo applies round-trip
//! delay, Doppler, a radar-range-equation amplitude, the carrier phase of
//! the delay, and per-element receive steering; terminal transmissions
//! arriving at the base station enter as unit-power interference along
//! their steering columns.

use num_complex::Complex64;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::frame::{Direction, UserRecord};
use crate::math::{fft_forward, fft_inverse, C64, CMat, SPEED_OF_LIGHT};
use crate::waveform::ComplexSignal;

// ── Steering ────────────────────────────────────────────────────────────────

/// Unit-norm steering vector of an `nx × ny` rectangular array with element
/// spacings `dx`, `dy` in wavelengths.
///
/// Element (n_x, n_y) contributes phase
/// `2π·(n_x·dx·cosθ·cosφ + n_y·dy·cosθ·sinφ)`; the layout is x-major
/// (x index varies slowest) and the vector is scaled by `1/√(nx·ny)`.
pub fn steering_vector(nx: usize, ny: usize, dx: f64, dy: f64, dir: Direction) -> Vec<C64> {
    let ux = dir.theta.cos() * dir.phi.cos();
    let uy = dir.theta.cos() * dir.phi.sin();
    let scale = 1.0 / ((nx * ny) as f64).sqrt();
    let mut v = Vec::with_capacity(nx * ny);
    for ix in 0..nx {
        for iy in 0..ny {
            let phase = 2.0 * std::f64::consts::PI * (ix as f64 * dx * ux + iy as f64 * dy * uy);
            v.push(Complex64::from_polar(scale, phase));
        }
    }
    v
}

/// Transmit-array steering vector toward `dir`.
pub fn tx_steering(cfg: &SystemConfig, dir: Direction) -> Vec<C64> {
    steering_vector(cfg.n_tx_x, cfg.n_tx_y, cfg.spacing_x, cfg.spacing_y, dir)
}

/// Receive-array steering vector from `dir`.
pub fn rx_steering(cfg: &SystemConfig, dir: Direction) -> Vec<C64> {
    steering_vector(cfg.n_rx_x, cfg.n_rx_y, cfg.spacing_x, cfg.spacing_y, dir)
}

// ── Downlink channels ───────────────────────────────────────────────────────

/// Distance pathloss relative to the reference distance: `(d/d₀)^(−α)`.
pub fn pathloss(cfg: &SystemConfig, distance: f64) -> Result<f64> {
    if distance < cfg.ref_distance {
        return Err(Error::arg(format!(
            "distance {distance} m is below the reference distance {} m",
            cfg.ref_distance
        )));
    }
    Ok((distance / cfg.ref_distance).powf(-cfg.pathloss_exp))
}

/// Channel row of one terminal: `h = √((d/d₀)^(−α)·δ) · ā(dir)ᵀ` where `δ`
/// is the terminal's shadowing gain and `ā = √N_t·a(dir)` is the
/// element-phase array response (unit-modulus entries), so that
/// `‖h‖² = (d/d₀)^(−α)·δ·N_t` carries the full transmit array gain.
pub fn channel_row(cfg: &SystemConfig, user: &UserRecord) -> Result<Vec<C64>> {
    let gain = (pathloss(cfg, user.distance)? * user.shadowing * cfg.n_tx() as f64).sqrt();
    Ok(tx_steering(cfg, user.dir).iter().map(|a| a * gain).collect())
}

/// Channel rows referenced to the operating SNR, for rate-versus-SNR
/// experiments: each row keeps its terminal's direction response and shadow
/// fluctuation, while the deterministic distance loss — and the shadow's
/// mean `e^{σ_δ²/2}` — are absorbed into the `p_tot/σ²` axis. The squared
/// row norm is `N_t·δ/𝔼[δ]`, so the axis reads as the mean link budget.
pub fn snr_referenced_rows(cfg: &SystemConfig, users: &[UserRecord]) -> CMat {
    let mean_shadow = (0.5 * cfg.shadowing_sigma * cfg.shadowing_sigma).exp();
    let rows: Vec<Vec<C64>> = users
        .iter()
        .map(|u| {
            let gain = (cfg.n_tx() as f64 * u.shadowing / mean_shadow).sqrt();
            tx_steering(cfg, u.dir).iter().map(|a| a * gain).collect()
        })
        .collect();
    CMat::from_rows(&rows)
}

/// Downlink and sensing-side channel matrices for one scan block.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    /// `K × N_t` matrix whose k-th row is terminal k's channel.
    pub h: CMat,
    /// `N_r × N_t` rank-1 two-way scatterer response `ā_r·ā_tᵀ` built from
    /// element-phase responses (entries of unit modulus).
    pub a: CMat,
    /// `N_r × K` matrix of terminal-to-array element-phase steering
    /// columns, each of squared norm `N_r`.
    pub a_k: CMat,
    /// Per-terminal large-scale amplitude `√((d/d₀)^(−α)·δ)`.
    pub gains: Vec<f64>,
    /// The terminals the rows were built from.
    pub users: Vec<UserRecord>,
    /// Scatterer direction the rank-1 response points at.
    pub target_dir: Direction,
}

impl ChannelSet {
    /// Builds channel matrices for the given terminals and a scatterer in
    /// direction `target_dir`.
    pub fn build(cfg: &SystemConfig, users: &[UserRecord], target_dir: Direction) -> Result<Self> {
        let nt = cfg.n_tx();
        let nr = cfg.n_rx();
        let mut h = CMat::zeros(users.len(), nt);
        let mut gains = Vec::with_capacity(users.len());
        for (k, u) in users.iter().enumerate() {
            let row = channel_row(cfg, u)?;
            for (j, &v) in row.iter().enumerate() {
                h[(k, j)] = v;
            }
            gains.push((pathloss(cfg, u.distance)? * u.shadowing).sqrt());
        }
        let scale_t = (nt as f64).sqrt();
        let scale_r = (nr as f64).sqrt();
        let a_t: Vec<C64> = tx_steering(cfg, target_dir).iter().map(|v| v * scale_t).collect();
        let a_r: Vec<C64> = rx_steering(cfg, target_dir).iter().map(|v| v * scale_r).collect();
        let mut a = CMat::zeros(nr, nt);
        for m in 0..nr {
            for j in 0..nt {
                a[(m, j)] = a_r[m] * a_t[j];
            }
        }
        let mut a_k = CMat::zeros(nr, users.len());
        for (k, u) in users.iter().enumerate() {
            let col = rx_steering(cfg, u.dir);
            for m in 0..nr {
                a_k[(m, k)] = col[m] * scale_r;
            }
        }
        Ok(ChannelSet {
            h,
            a,
            a_k,
            gains,
            users: users.to_vec(),
            target_dir,
        })
    }

    /// Number of terminals.
    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    /// Channel row of terminal `k`.
    pub fn row(&self, k: usize) -> &[C64] {
        self.h.row(k)
    }

    /// Restriction to a subset of terminals (target response unchanged).
    pub fn subset(&self, cfg: &SystemConfig, ids: &[usize]) -> Result<Self> {
        let users: Vec<UserRecord> = ids
            .iter()
            .map(|&i| {
                self.users
                    .iter()
                    .find(|u| u.id == i)
                    .cloned()
                    .ok_or_else(|| Error::arg(format!("unknown terminal id {i}")))
            })
            .collect::<Result<_>>()?;
        ChannelSet::build(cfg, &users, self.target_dir)
    }
}

/// Terminal receive over one block: `y(t) = Σ_j h_j·s_j(t) + n(t)` with the
/// per-element transmit signals `s_j` and circular complex Gaussian noise
/// of per-sample variance `noise_var`.
pub fn ue_receive(
    element_signals: &[ComplexSignal],
    h: &[C64],
    noise_var: f64,
    rng: &mut rand_chacha::ChaCha12Rng,
) -> Result<ComplexSignal> {
    if h.len() != element_signals.len() {
        return Err(Error::arg("channel length must match element count"));
    }
    if element_signals.is_empty() {
        return Err(Error::arg("at least one element signal required"));
    }
    let n = element_signals[0].len();
    if element_signals.iter().any(|s| s.len() != n) {
        return Err(Error::arg("element signals must share one length"));
    }
    let mut samples = vec![Complex64::new(0.0, 0.0); n];
    for (hj, sig) in h.iter().zip(element_signals) {
        for (y, &s) in samples.iter_mut().zip(&sig.samples) {
            *y += hj * s;
        }
    }
    if noise_var > 0.0 {
        for y in &mut samples {
            *y += crate::math::complex_gaussian(rng, noise_var);
        }
    }
    Ok(ComplexSignal {
        samples,
        sample_rate: element_signals[0].sample_rate,
        t0: element_signals[0].t0,
    })
}

/// Per-slot symbol observations of a terminal: `y_n = h·x_n + n_n` with
/// noise variance `noise_var` per symbol. This is the symbol-rate form of
/// [`ue_receive`] used by detection chains; the chirp cancels because both
/// sides know the block's sweep.
pub fn ue_receive_symbols(
    h: &[C64],
    x: &CMat,
    noise_var: f64,
    rng: &mut rand_chacha::ChaCha12Rng,
) -> Result<Vec<C64>> {
    if h.len() != x.nr {
        return Err(Error::arg("channel length must match transmit rows"));
    }
    let mut y = Vec::with_capacity(x.nc);
    for n in 0..x.nc {
        let mut s = Complex64::new(0.0, 0.0);
        for (j, &hv) in h.iter().enumerate() {
            s += hv * x[(j, n)];
        }
        if noise_var > 0.0 {
            s += crate::math::complex_gaussian(rng, noise_var);
        }
        y.push(s);
    }
    Ok(y)
}

// ── Sensing echo ────────────────────────────────────────────────────────────

/// Delay, Doppler, and gain of one point scatterer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchoParams {
    /// Round-trip latency, s.
    pub tau: f64,
    /// Doppler shift, Hz.
    pub f_d: f64,
    /// Round-trip amplitude `√(𝓛_T·η_T)` combining two-way propagation
    /// attenuation and cross-section.
    pub gain: f64,
    /// Radar cross-section, m².
    pub rcs: f64,
}

impl EchoParams {
    /// Builds echo parameters from scatterer geometry: `τ = 2d/c`,
    /// `f_d = 2v/λ`, and the two-way attenuation `𝓛_T = λ²/((4π)³·d⁴)`.
    pub fn from_geometry(cfg: &SystemConfig, range: f64, speed: f64, rcs: f64) -> Result<Self> {
        if range <= 0.0 {
            return Err(Error::arg(format!("range must be positive, got {range}")));
        }
        if rcs < 0.0 {
            return Err(Error::arg(format!("cross-section must be non-negative, got {rcs}")));
        }
        let lambda = cfg.wavelength();
        let l_t = two_way_attenuation(lambda, range);
        Ok(EchoParams {
            tau: 2.0 * range / SPEED_OF_LIGHT,
            f_d: 2.0 * speed / lambda,
            gain: (l_t * rcs).sqrt(),
            rcs,
        })
    }

    /// Range implied by the latency: `c·τ/2`.
    pub fn range(&self) -> f64 {
        SPEED_OF_LIGHT * self.tau / 2.0
    }

    /// Scalar phase of the delayed carrier plus sweep,
    /// `2π·f_c·τ + π·μ·τ²`, used by the sensing-path response.
    pub fn carrier_phase(&self, cfg: &SystemConfig) -> f64 {
        2.0 * std::f64::consts::PI * cfg.carrier_hz * self.tau
            + std::f64::consts::PI * cfg.chirp_rate * self.tau * self.tau
    }
}

/// Two-way propagation attenuation `λ²/((4π)³·d⁴)`.
pub fn two_way_attenuation(lambda: f64, range: f64) -> f64 {
    let four_pi = 4.0 * std::f64::consts::PI;
    lambda * lambda / (four_pi.powi(3) * range.powi(4))
}

/// Rank-1 sensing-path response `Z = 𝓛·A·e^{j(2πf_cτ + πμτ²)}` used by the
/// sensing-quality quotient.
pub fn sensing_response(cfg: &SystemConfig, channels: &ChannelSet, echo: &EchoParams) -> CMat {
    let phase = Complex64::from_polar(echo.gain, echo.carrier_phase(cfg));
    channels.a.scaled(phase)
}

/// Applies a (possibly fractional) delay `tau` to `sig` by frequency-domain
/// phase rotation, zero-padding 2× to keep the shift linear rather than
/// circular. Samples shifted in from before the block start are zero.
pub fn fractional_delay(sig: &ComplexSignal, tau: f64) -> ComplexSignal {
    let n = sig.len();
    let n_pad = (2 * n).next_power_of_two();
    let mut buf = sig.samples.clone();
    buf.resize(n_pad, Complex64::new(0.0, 0.0));
    fft_forward(&mut buf);
    let fs = sig.sample_rate;
    for (k, v) in buf.iter_mut().enumerate() {
        let f = crate::math::fft_bin_freq(k, n_pad, fs);
        *v *= Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * f * tau);
    }
    fft_inverse(&mut buf);
    buf.truncate(n);
    ComplexSignal {
        samples: buf,
        sample_rate: fs,
        t0: sig.t0,
    }
}

/// Received echo block at the sensing receiver.
#[derive(Debug, Clone)]
pub struct EchoBlock {
    /// `N_r × n_samples` receive matrix (interference and noise included
    /// when requested).
    pub samples: CMat,
    /// Sampling rate, Hz.
    pub sample_rate: f64,
}

impl EchoBlock {
    /// Receive-element signal `m` as an owned sample vector.
    pub fn element(&self, m: usize) -> Vec<C64> {
        self.samples.row(m).to_vec()
    }
}

/// Builds the echo of one transmitted block from a point scatterer: receive
/// element `m` gets
/// `𝓛·e^{−j2πf_cτ}·ā_r[m]·(ā_tᵀs)(t−τ)·e^{j2πf_d t} + (A_K·i(t))_m + n_m(t)`
/// where `s` stacks the per-element transmit signals (precoder included)
/// and `ā` are the element-phase array responses, matching the rank-1
/// response held by [`ChannelSet`].
///
/// Terminal interference `i(t)` is a unit-power pseudo-random complex
/// sequence per terminal in `interferers`; pass an empty terminal set for a
/// clean echo. White noise of variance `noise_var` is added per receive
/// element when positive.
pub fn target_echo(
    cfg: &SystemConfig,
    element_signals: &[ComplexSignal],
    echo: &EchoParams,
    dir: Direction,
    interferers: Option<&ChannelSet>,
    noise_var: f64,
    rng: &mut rand_chacha::ChaCha12Rng,
) -> Result<EchoBlock> {
    if element_signals.len() != cfg.n_tx() {
        return Err(Error::arg(format!(
            "expected {} element signals, got {}",
            cfg.n_tx(),
            element_signals.len()
        )));
    }
    let n = element_signals[0].len();
    if element_signals.iter().any(|s| s.len() != n) {
        return Err(Error::arg("element signals must share one length"));
    }
    if echo.tau < 0.0 {
        return Err(Error::arg(format!("latency must be non-negative, got {}", echo.tau)));
    }
    if echo.tau >= element_signals[0].duration() {
        return Err(Error::arg(format!(
            "latency {} s falls outside the {} s block",
            echo.tau,
            element_signals[0].duration()
        )));
    }
    let fs = element_signals[0].sample_rate;
    let scale_t = (cfg.n_tx() as f64).sqrt();
    let a_t: Vec<C64> = tx_steering(cfg, dir).iter().map(|v| v * scale_t).collect();
    // Signal leaving the array toward the scatterer: ā_tᵀ·s(t), matching
    // the rank-1 ā_r·ā_tᵀ response used by the sensing-quality model.
    let mut outgoing = vec![Complex64::new(0.0, 0.0); n];
    for (j, sig) in element_signals.iter().enumerate() {
        let w = a_t[j];
        for (o, &s) in outgoing.iter_mut().zip(&sig.samples) {
            *o += w * s;
        }
    }
    let outgoing = ComplexSignal {
        samples: outgoing,
        sample_rate: fs,
        t0: element_signals[0].t0,
    };
    let delayed = fractional_delay(&outgoing, echo.tau);
    // Scalar carrier rotation of the delay.
    let carrier = Complex64::from_polar(
        1.0,
        -2.0 * std::f64::consts::PI * cfg.carrier_hz * echo.tau,
    );
    let nr = cfg.n_rx();
    let scale_r = (nr as f64).sqrt();
    let a_r: Vec<C64> = rx_steering(cfg, dir).iter().map(|v| v * scale_r).collect();
    let mut out = CMat::zeros(nr, n);
    let dt = 1.0 / fs;
    for i in 0..n {
        let t = delayed.t0 + i as f64 * dt;
        let dop = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * echo.f_d * t);
        let base = delayed.samples[i] * dop * carrier * echo.gain;
        for (m, &ar) in a_r.iter().enumerate() {
            out[(m, i)] = base * ar;
        }
    }
    if let Some(ch) = interferers {
        for k in 0..ch.n_users() {
            // One unit-power pseudo-random sequence per terminal.
            let seq: Vec<C64> = (0..n).map(|_| crate::math::complex_gaussian(rng, 1.0)).collect();
            for i in 0..n {
                for m in 0..nr {
                    out[(m, i)] += ch.a_k[(m, k)] * seq[i];
                }
            }
        }
    }
    if noise_var > 0.0 {
        for i in 0..n {
            for m in 0..nr {
                out[(m, i)] += crate::math::complex_gaussian(rng, noise_var);
            }
        }
    }
    Ok(EchoBlock {
        samples: out,
        sample_rate: fs,
    })
}
