//! Signal-to-interference-plus-noise ratios on both links and the rate
//! figures built from them.
//!
//! Downlink terminals see the sensing stream and every other terminal stream
//! as *coherent* interference: the interfering amplitudes add before the
//! magnitude is squared. The echo receiver applies a combining row `v` as
//! given (no implicit conjugation) to the sensing response of every transmit
//! stream, and is disturbed by uplink terminal leakage plus thermal noise.

use num_complex::Complex64 as C64;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::math::{cdot, norm_sq, CMat};
use crate::waveform::PrecoderState;

/// SINR of terminal `k`:
/// `γ_k = P_k|h_k·w_k|² / (|√P_T·h_k·w_T + Σ_{i≠k}√P_i·h_k·w_i|² + σ²)`.
pub fn sinr_user(h_k: &[C64], k: usize, state: &PrecoderState, noise_var: f64) -> Result<f64> {
    let n_users = state.n_users();
    if k >= n_users {
        return Err(Error::arg(format!("terminal index {k} out of range (K={n_users})")));
    }
    if h_k.len() != state.w_target.len() {
        return Err(Error::arg(format!(
            "channel row has {} entries but precoders have {}",
            h_k.len(),
            state.w_target.len()
        )));
    }
    if noise_var < 0.0 {
        return Err(Error::arg("noise variance must be nonnegative"));
    }
    let signal = state.p_user[k] * cdot(h_k, &state.w_user[k]).norm_sqr();
    let mut interferer = state.p_target.sqrt() * cdot(h_k, &state.w_target);
    for i in 0..n_users {
        if i != k {
            interferer += state.p_user[i].sqrt() * cdot(h_k, &state.w_user[i]);
        }
    }
    Ok(signal / (interferer.norm_sqr() + noise_var))
}

/// Echo SINR under combining row `v`:
/// `γ_T = E·Σ_s |v·(Z·w̃_s)|² / (Σ_k |v·a_k|² + σ²‖v‖²)`,
/// where `w̃_s` are the power-weighted transmit columns (terminals first,
/// sensing last), `Z` the sensing response, and the columns of `a_k` the
/// uplink leakage signatures (may have zero columns).
pub fn sinr_target(
    v: &[C64],
    z: &CMat,
    a_k: &CMat,
    state: &PrecoderState,
    e_rad: f64,
    noise_var: f64,
) -> Result<f64> {
    if v.len() != z.nr {
        return Err(Error::arg(format!(
            "combining row has {} entries but the sensing response has {} rows",
            v.len(),
            z.nr
        )));
    }
    if a_k.nc > 0 && a_k.nr != v.len() {
        return Err(Error::arg("leakage signatures and combining row disagree on size"));
    }
    if z.nc != state.w_target.len() {
        return Err(Error::arg("sensing response and precoders disagree on transmit size"));
    }
    let v_energy = norm_sq(v);
    if v_energy == 0.0 {
        return Err(Error::arg("combining row must be nonzero"));
    }
    if e_rad <= 0.0 || noise_var < 0.0 {
        return Err(Error::arg("need positive echo energy and nonnegative noise"));
    }
    let weighted = state.weighted_columns();
    let zw = z.mul(&weighted);
    let mut num = 0.0;
    for s in 0..zw.nc {
        num += cdot(v, &zw.col(s)).norm_sqr();
    }
    num *= e_rad;
    let mut den = noise_var * v_energy;
    for k in 0..a_k.nc {
        den += cdot(v, &a_k.col(k)).norm_sqr();
    }
    Ok(num / den)
}

/// Rates, SINRs, and constraint residuals of one operating point.
///
/// Residuals are signed slack: nonnegative means satisfied. `c1_residual` is
/// the worst terminal-floor slack `min_k(γ_k − γ̄_k)`, `c2_residual` the echo
/// floor slack `γ_T − γ̄_T`, and `c3_residual` the power budget slack
/// `p_tot − ΣP`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    /// Terminal SINRs, one per user.
    pub gamma_users: Vec<f64>,
    /// Echo SINR.
    pub gamma_target: f64,
    /// Downlink sum rate `Σ_k log2(1+γ_k)`, bit/s/Hz.
    pub r_com: f64,
    /// Echo rate `log2(1+γ_T)`, bit/s/Hz.
    pub r_rad: f64,
    /// Total `r_com + r_rad`.
    pub r_sum: f64,
    /// Worst terminal-floor slack.
    pub c1_residual: f64,
    /// Echo-floor slack.
    pub c2_residual: f64,
    /// Power-budget slack.
    pub c3_residual: f64,
}

impl RateReport {
    /// True when every constraint holds within `tol`.
    pub fn feasible(&self, tol: f64) -> bool {
        self.c1_residual >= -tol && self.c2_residual >= -tol && self.c3_residual >= -tol
    }
}

/// Number of echo blocks coherently accumulated per estimate; equals the
/// symbols per block, the per-block energy of the unit-amplitude waveform.
pub fn echo_energy(cfg: &SystemConfig) -> f64 {
    cfg.symbols_per_block as f64
}

/// SINR floor implied by a rate floor: `2^ρ − 1`.
pub fn sinr_floor(rate_floor: f64) -> f64 {
    (2.0f64).powf(rate_floor) - 1.0
}

/// Evaluates one operating point: channel rows `h` (one per terminal),
/// sensing response `z`, leakage signatures `a_k`, combining row `v`, and
/// the precoder/power state.
pub fn rate_from_state(
    h: &CMat,
    z: &CMat,
    a_k: &CMat,
    v: &[C64],
    state: &PrecoderState,
    cfg: &SystemConfig,
) -> Result<RateReport> {
    if h.nr != state.n_users() {
        return Err(Error::arg(format!(
            "channel has {} rows but the state carries {} terminal streams",
            h.nr,
            state.n_users()
        )));
    }
    let mut gamma_users = Vec::with_capacity(h.nr);
    for k in 0..h.nr {
        gamma_users.push(sinr_user(h.row(k), k, state, cfg.noise_ue)?);
    }
    let gamma_target = sinr_target(v, z, a_k, state, echo_energy(cfg), cfg.noise_bs)?;
    let r_com: f64 = gamma_users.iter().map(|g| (1.0 + g).log2()).sum();
    let r_rad = (1.0 + gamma_target).log2();
    let gamma_floor_user = sinr_floor(cfg.rate_floor_user);
    let c1_residual = gamma_users
        .iter()
        .map(|g| g - gamma_floor_user)
        .fold(f64::INFINITY, f64::min);
    Ok(RateReport {
        c1_residual,
        c2_residual: gamma_target - sinr_floor(cfg.rate_floor_target),
        c3_residual: cfg.p_tot - state.total_power(),
        gamma_users,
        gamma_target,
        r_com,
        r_rad,
        r_sum: r_com + r_rad,
    })
}
