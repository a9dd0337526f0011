//! Monte Carlo bit-error-rate measurement with trellis-based detection of
//! the continuous-phase data stream, plus the analytic upper-bound curve.
//!
//! Noise convention: a stated SNR of `s` dB fixes the *per-dimension* noise
//! variance `σ² = p_tot·10^{−s/10}`, i.e. the complex noise has total
//! variance `2σ²`. Under this convention the single-user matched-filter
//! error rate is `Q(√γ)` with `γ = |c|²/σ²`, which is exactly the Q-function
//! kernel the analytic bound integrates against.

use num_complex::Complex64 as C64;

use rayon::prelude::*;

use crate::channel::{sensing_response, tx_steering, ue_receive_symbols, ChannelSet, EchoParams};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::frame::{spawn_users, Direction};
use crate::math::{cdot, derive_rng, normalized, q_func, CMat};
use crate::optim::{baseline_precoders, mmlm, smi_select, BaselineKind, SelectionContext};
use crate::waveform::{cpm_modulate, mask_demap, mask_map, precode_block, PrecoderState};

use rand::Rng;

/// Expresses the modulation index as a reduced fraction `p/q`, required for
/// a finite phase trellis. Rejects values that are not close (1e−9) to a
/// fraction with denominator ≤ 64.
pub fn rationalize_mod_index(h: f64) -> Result<(u32, u32)> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::arg(format!("modulation index must be positive, got {h}")));
    }
    for q in 1..=64u32 {
        let p = (h * q as f64).round();
        if p >= 1.0 && (h - p / q as f64).abs() < 1e-9 {
            let p = p as u32;
            let g = gcd(p, q);
            return Ok((p / g, q / g));
        }
    }
    Err(Error::arg(format!(
        "modulation index {h} is not a fraction with denominator ≤ 64"
    )))
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Q-function kernel of the analytic error expression:
/// `Q(√(c·γ))` with `c = log2(𝓜)·(1 − sin(2πh)/(2πh))`.
pub fn ber_kernel(gamma: f64, order: u32, h: f64) -> f64 {
    let x = 2.0 * std::f64::consts::PI * h;
    let sinc = if x.abs() < 1e-12 { 1.0 } else { x.sin() / x };
    let c = (order as f64).log2() * (1.0 - sinc);
    q_func((c * gamma.max(0.0)).sqrt())
}

/// Odd amplitude levels of the `order`-ary alphabet: ±1, ±3, …, ±(order−1).
fn alphabet(order: u32) -> Result<Vec<i32>> {
    if order < 2 || !order.is_power_of_two() {
        return Err(Error::arg(format!("alphabet order must be a power of two ≥ 2, got {order}")));
    }
    Ok((0..order as i32).map(|i| 2 * i - (order as i32 - 1)).collect())
}

/// Maximum-likelihood sequence detection of a continuous-phase data stream
/// observed at one complex sample per symbol through the flat channel
/// `chan`. The trellis runs over the `2q` phase states of `h = p/q`; each
/// block starts at state 0 with no tail symbols. Returns hard bits
/// (log2(order) per symbol).
pub fn viterbi_cpm_detect(y: &[C64], chan: C64, order: u32, h: f64) -> Result<Vec<u8>> {
    let (p, q) = rationalize_mod_index(h)?;
    let levels = alphabet(order)?;
    if y.is_empty() {
        return Err(Error::arg("cannot detect an empty symbol stream"));
    }
    if chan.norm() == 0.0 {
        return Err(Error::arg("channel scalar must be nonzero"));
    }
    let n_states = (2 * q) as usize;
    // Emission table: the phase *after* the increment indexes the symbol.
    let emissions: Vec<C64> = (0..n_states)
        .map(|s| chan * C64::from_polar(1.0, std::f64::consts::PI * s as f64 / q as f64))
        .collect();
    let step = |s: usize, level: i32| -> usize {
        (s as i64 + level as i64 * p as i64).rem_euclid(n_states as i64) as usize
    };

    const INF: f64 = f64::INFINITY;
    let mut dist = vec![INF; n_states];
    dist[0] = 0.0;
    // Back-pointers: (previous state, level index) per symbol and state.
    let mut back: Vec<Vec<(u16, u8)>> = Vec::with_capacity(y.len());
    for &obs in y {
        let mut next = vec![INF; n_states];
        let mut bp = vec![(0u16, 0u8); n_states];
        for s in 0..n_states {
            if dist[s] == INF {
                continue;
            }
            for (li, &b) in levels.iter().enumerate() {
                let s2 = step(s, b);
                let cost = dist[s] + (obs - emissions[s2]).norm_sqr();
                if cost < next[s2] {
                    next[s2] = cost;
                    bp[s2] = (s as u16, li as u8);
                }
            }
        }
        back.push(bp);
        dist = next;
    }

    // Backtrack from the best terminal state.
    let mut state = (0..n_states).min_by(|&a, &b| dist[a].total_cmp(&dist[b])).unwrap();
    let mut level_idx = vec![0u8; y.len()];
    for n in (0..y.len()).rev() {
        let (prev, li) = back[n][state];
        level_idx[n] = li;
        state = prev as usize;
    }
    let mut bits = Vec::with_capacity(y.len() * order.trailing_zeros() as usize);
    for li in level_idx {
        bits.extend(mask_demap(levels[li as usize], order)?);
    }
    Ok(bits)
}

/// Symbol-by-symbol phase-difference detection: the reference for the first
/// symbol is the channel phase, thereafter the previous received sample.
/// Each phase increment is rounded to the nearest valid level.
pub fn phase_diff_detect(y: &[C64], chan: C64, order: u32, h: f64) -> Result<Vec<u8>> {
    let levels = alphabet(order)?;
    if y.is_empty() {
        return Err(Error::arg("cannot detect an empty symbol stream"));
    }
    if chan.norm() == 0.0 {
        return Err(Error::arg("channel scalar must be nonzero"));
    }
    let wrap = |x: f64| -> f64 {
        let mut v = x.rem_euclid(2.0 * std::f64::consts::PI);
        if v > std::f64::consts::PI {
            v -= 2.0 * std::f64::consts::PI;
        }
        v
    };
    let mut bits = Vec::with_capacity(y.len() * order.trailing_zeros() as usize);
    let mut prev = chan;
    for &obs in y {
        let theta = (obs * prev.conj()).arg();
        let best = levels
            .iter()
            .min_by(|&&a, &&b| {
                let da = wrap(theta - a as f64 * std::f64::consts::PI * h).abs();
                let db = wrap(theta - b as f64 * std::f64::consts::PI * h).abs();
                da.total_cmp(&db)
            })
            .copied()
            .unwrap();
        bits.extend(mask_demap(best, order)?);
        prev = obs;
    }
    Ok(bits)
}

/// One measured point of a BER curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPoint {
    /// `p_tot/σ²` in dB (per-dimension σ²).
    pub snr_db: f64,
    /// Estimated bit error ratio.
    pub ber: f64,
    /// Bits simulated at this point.
    pub bits_simulated: u64,
    /// 95% confidence half-width from the binomial variance.
    pub ci95: f64,
}

/// Transmit-side scheme measured by a BER curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecoderChoice {
    /// Conjugate-matched beams.
    Mrt,
    /// Channel inversion.
    Zf,
    /// Regularized inversion.
    Mmse,
    /// Beams from the joint design (powers still pinned by the options).
    Mmlm,
}

/// Monte Carlo controls for [`ber_curve`].
#[derive(Debug, Clone, Copy)]
pub struct BerOptions {
    /// Transmit scheme.
    pub kind: PrecoderChoice,
    /// Stop a point once this many bit errors are pooled.
    pub min_errors: u64,
    /// Hard cap on bits per point.
    pub max_bits: u64,
    /// Fraction of the budget pinned on the sensing stream.
    pub p_target_frac: f64,
    /// Base seed; every point and batch derives its own stream.
    pub seed: u64,
}

impl Default for BerOptions {
    fn default() -> Self {
        BerOptions {
            kind: PrecoderChoice::Mmlm,
            min_errors: 100,
            max_bits: 20_000_000,
            p_target_frac: 0.1,
            seed: 1,
        }
    }
}

/// Counts from one independent simulation batch.
#[derive(Default, Clone, Copy)]
struct Counts {
    errors: u64,
    bits: u64,
}

const BATCHES_PER_ROUND: u64 = 8;
const BLOCKS_PER_BATCH: usize = 16;

/// Transmit design for one channel draw: beams and pinned powers.
fn design_block(
    cfg: &SystemConfig,
    channels: &ChannelSet,
    w_t: &[C64],
    kind: PrecoderChoice,
    p_target_frac: f64,
) -> Result<PrecoderState> {
    let k_users = channels.n_users();
    let p_target = p_target_frac * cfg.p_tot;
    let p_user = vec![(cfg.p_tot - p_target) / k_users as f64; k_users];
    let w_user: Vec<Vec<C64>> = match kind {
        PrecoderChoice::Mrt | PrecoderChoice::Zf | PrecoderChoice::Mmse => {
            let base_kind = match kind {
                PrecoderChoice::Mrt => BaselineKind::Mrt,
                PrecoderChoice::Zf => BaselineKind::Zf,
                _ => BaselineKind::Mmse,
            };
            let w = baseline_precoders(
                &channels.h,
                base_kind,
                cfg.noise_ue * k_users as f64 / cfg.p_tot,
            )?;
            (0..k_users).map(|k| w.col(k)).collect()
        }
        PrecoderChoice::Mmlm => {
            // Joint-design beams; fall back to conjugate beams on an
            // infeasible draw so the curve never aborts mid-sweep.
            let echo = EchoParams::from_geometry(
                cfg,
                cfg.target_range,
                cfg.target_speed,
                cfg.target_rcs,
            )?;
            let z = sensing_response(cfg, channels, &echo);
            let a_k = CMat::zeros(cfg.n_rx(), 0);
            match mmlm(&channels.h, &z, &a_k, w_t, cfg, 15, 1e-3) {
                Ok(sol) => sol.state.w_user,
                Err(Error::Infeasible { .. }) => {
                    let w = baseline_precoders(&channels.h, BaselineKind::Mrt, 0.0)?;
                    (0..k_users).map(|k| w.col(k)).collect()
                }
                Err(e) => return Err(e),
            }
        }
    };
    Ok(PrecoderState { w_user, w_target: w_t.to_vec(), p_user, p_target })
}

/// One batch of independent channel draws and data blocks; returns pooled
/// error/bit counts over the terminal streams.
fn run_batch(
    cfg: &SystemConfig,
    noise_total: f64,
    opts: &BerOptions,
    stream: u64,
) -> Result<Counts> {
    let mut rng = derive_rng(opts.seed, stream);
    let dir = Direction { theta: 0.0, phi: 0.0 };
    let steer = tx_steering(cfg, dir);
    let w_t = normalized(&steer.iter().map(|x| x.conj()).collect::<Vec<_>>())?;
    let k_users = cfg.users;
    let bits_per_symbol = cfg.bits_per_symbol() as usize;
    let mut counts = Counts::default();

    for _ in 0..BLOCKS_PER_BATCH {
        // Fresh terminals each block; greedy selection when the candidate
        // pool is larger than the serving set.
        let pool = spawn_users(cfg, cfg.candidates.max(k_users), &mut rng);
        let all = ChannelSet::build(cfg, &pool, dir)?;
        let channels = if pool.len() > k_users {
            let echo = EchoParams::from_geometry(
                cfg,
                cfg.target_range,
                cfg.target_speed,
                cfg.target_rcs,
            )?;
            let z = sensing_response(cfg, &all, &echo);
            let a_k = CMat::zeros(cfg.n_rx(), 0);
            let ids: Vec<usize> = pool.iter().map(|u| u.id).collect();
            let ctx = SelectionContext::new(&all, &z, &a_k, &w_t, cfg);
            let mut chosen = smi_select(&ctx, &ids, k_users)?.chosen;
            // Selection may stop early; pad with the lowest unused ids so
            // the serving set always has K terminals.
            for id in &ids {
                if chosen.len() == k_users {
                    break;
                }
                if !chosen.contains(id) {
                    chosen.push(*id);
                }
            }
            all.subset(cfg, &chosen)?
        } else {
            all
        };
        let state = design_block(cfg, &channels, &w_t, opts.kind, opts.p_target_frac)?;

        // Independent data on every stream (terminals first, sensing last).
        let mut streams = Vec::with_capacity(k_users + 1);
        let mut tx_bits: Vec<Vec<u8>> = Vec::with_capacity(k_users);
        for s in 0..=k_users {
            let bits: Vec<u8> = (0..cfg.symbols_per_block * bits_per_symbol)
                .map(|_| rng.gen_range(0..2u8))
                .collect();
            let levels = mask_map(&bits, cfg.mask_order)?;
            streams.push(cpm_modulate(&levels, cfg.mod_index()));
            if s < k_users {
                tx_bits.push(bits);
            }
        }
        let stream_refs: Vec<&_> = streams.iter().collect();
        let x = precode_block(&state, &stream_refs)?;

        for k in 0..k_users {
            let y = ue_receive_symbols(channels.row(k), &x, noise_total, &mut rng)?;
            let chan = C64::from(state.p_user[k].sqrt()) * cdot(channels.row(k), &state.w_user[k]);
            let detected = viterbi_cpm_detect(&y, chan, cfg.mask_order, cfg.mod_index())?;
            counts.bits += detected.len() as u64;
            counts.errors += detected
                .iter()
                .zip(&tx_bits[k])
                .filter(|(a, b)| a != b)
                .count() as u64;
        }
    }
    Ok(counts)
}

/// Measured BER at each SNR point through the full link: terminal draw,
/// selection, precoding, flat-fading reception, trellis detection. Batches
/// run in parallel with derived seeds and merge by counts, so results are
/// reproducible regardless of thread scheduling.
pub fn ber_curve(cfg: &SystemConfig, snr_db: &[f64], opts: &BerOptions) -> Result<Vec<BerPoint>> {
    if snr_db.is_empty() {
        return Err(Error::arg("the SNR grid must be nonempty"));
    }
    if !(opts.p_target_frac >= 0.0 && opts.p_target_frac < 1.0) {
        return Err(Error::arg("the sensing power fraction must lie in [0, 1)"));
    }
    if cfg.users == 0 {
        return Err(Error::arg("BER measurement needs at least one terminal"));
    }
    let mut points = Vec::with_capacity(snr_db.len());
    for (pi, &snr) in snr_db.iter().enumerate() {
        let sigma_perdim_sq = cfg.p_tot * 10f64.powf(-snr / 10.0);
        let noise_total = 2.0 * sigma_perdim_sq;
        let mut pooled = Counts::default();
        let mut round = 0u64;
        loop {
            let base = pi as u64 * 1_000_000 + round * BATCHES_PER_ROUND;
            let batch: Vec<Counts> = (0..BATCHES_PER_ROUND)
                .into_par_iter()
                .map(|b| run_batch(cfg, noise_total, opts, 10_000 + base + b))
                .collect::<Result<Vec<_>>>()?;
            for c in batch {
                pooled.errors += c.errors;
                pooled.bits += c.bits;
            }
            round += 1;
            if pooled.errors >= opts.min_errors || pooled.bits >= opts.max_bits {
                break;
            }
        }
        let ber = pooled.errors as f64 / pooled.bits as f64;
        points.push(BerPoint {
            snr_db: snr,
            ber,
            bits_simulated: pooled.bits,
            ci95: 1.96 * (ber * (1.0 - ber) / pooled.bits as f64).sqrt(),
        });
    }
    Ok(points)
}

/// Per-dimension standard deviation of the multi-stream interference at a
/// terminal, estimated over `draws` independent channel instances with
/// conjugate-matched beams and pinned powers.
fn interference_std_perdim(
    cfg: &SystemConfig,
    p_target_frac: f64,
    draws: usize,
    seed: u64,
) -> Result<f64> {
    let dir = Direction { theta: 0.0, phi: 0.0 };
    let steer = tx_steering(cfg, dir);
    let w_t = normalized(&steer.iter().map(|x| x.conj()).collect::<Vec<_>>())?;
    let k_users = cfg.users;
    let p_target = p_target_frac * cfg.p_tot;
    let p_user = (cfg.p_tot - p_target) / k_users as f64;
    let mut rng = derive_rng(seed, 999);
    let mut acc = 0.0;
    let mut count = 0usize;
    for _ in 0..draws {
        let users = spawn_users(cfg, k_users, &mut rng);
        let set = ChannelSet::build(cfg, &users, dir)?;
        let w = baseline_precoders(&set.h, BaselineKind::Mrt, 0.0)?;
        for k in 0..k_users {
            let hk = set.row(k);
            let mut amp = C64::from(p_target.sqrt()) * cdot(hk, &w_t);
            for i in 0..k_users {
                if i != k {
                    amp += C64::from(p_user.sqrt()) * cdot(hk, &w.col(i));
                }
            }
            acc += amp.norm_sqr();
            count += 1;
        }
    }
    Ok((acc / (2.0 * count as f64)).sqrt())
}

/// Integral of the Q-kernel against the truncated heavy-tail SINR density,
/// after the substitution `u = γ^{−1/α}` that removes the singularity:
/// `∫ Q(√(c·γ)) D γ^{−1/α−1} dγ = αD ∫₀^{u_min} Q(√(c·u^{−α})) du`.
fn bound_integral(d: f64, alpha: f64, c_m: f64, gamma_min: f64, panels: usize) -> f64 {
    let u_min = gamma_min.powf(-1.0 / alpha);
    let f = |u: f64| -> f64 {
        if u <= 1e-30 {
            return 0.0;
        }
        q_func((c_m * u.powf(-alpha)).sqrt())
    };
    alpha * d * crate::math::integrate_gl(f, 0.0, u_min, panels)
}

/// Analytic upper bound on the average terminal BER across the SNR grid.
///
/// The received SINR is modeled through the pathloss/shadowing geometry as a
/// heavy-tailed density `D·γ^{−1/α−1}` truncated at the point `γ_min`
/// where it integrates to one; the constant folds the distance window (in
/// reference-distance units), the shadowing moments, and the pooled
/// interference-plus-noise power. The bound is clamped to 1/2.
pub fn ber_upper_bound(cfg: &SystemConfig, snr_db: &[f64], seed: u64) -> Result<Vec<BerPoint>> {
    if snr_db.is_empty() {
        return Err(Error::arg("the SNR grid must be nonempty"));
    }
    let alpha = cfg.pathloss_exp;
    if !(alpha > 1.0) {
        return Err(Error::arg("the pathloss exponent must exceed 1 for a finite bound"));
    }
    let d_window = (cfg.cell_radius - cfg.ref_distance) / cfg.ref_distance;
    if !(d_window > 0.0) {
        return Err(Error::arg("the cell must extend beyond the reference distance"));
    }
    let x = 2.0 * std::f64::consts::PI * cfg.mod_index();
    let sinc = if x.abs() < 1e-12 { 1.0 } else { x.sin() / x };
    let c_m = (cfg.mask_order as f64).log2() * (1.0 - sinc);
    if !(c_m > 0.0) {
        return Err(Error::arg("degenerate modulation: the error kernel vanishes"));
    }
    let sigma_i = interference_std_perdim(cfg, 0.1, 10_000, seed)?;
    let shadow_boost = (cfg.shadowing_sigma.powi(4) / (alpha * alpha)).exp();
    let tail_gamma = libm::tgamma(1.0 - 1.0 / alpha);
    let q_shadow = q_func(-cfg.shadowing_sigma / 2.0);

    let mut points = Vec::with_capacity(snr_db.len());
    for &snr in snr_db {
        let sigma_k = (cfg.p_tot * 10f64.powf(-snr / 10.0)).sqrt();
        let pooled = 2.0 * (sigma_i + sigma_k).powi(2);
        let d = pooled.powf(-1.0 / alpha) * shadow_boost / (alpha * d_window)
            * q_shadow
            * tail_gamma;
        let gamma_min = (alpha * d).powf(alpha);
        let ber = (2.0 * bound_integral(d, alpha, c_m, gamma_min, 256)).min(0.5);
        points.push(BerPoint { snr_db: snr, ber, bits_simulated: 0, ci95: 0.0 });
    }
    Ok(points)
}
