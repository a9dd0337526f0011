//! Joint transmit beamformer / receive combiner / power design by
//! alternating minorize-maximize steps with Lagrange-multiplier pressure on
//! the SINR floors.
//!
//! One outer iteration performs, in order: combiner update (a generalized
//! eigenproblem, globally optimal for fixed transmit state), beamformer
//! update (safeguarded gradient ascent on the Lagrangian, accepted only when
//! the true sum rate improves), multiplier update (projected subgradient),
//! and power reallocation (linear-objective water fill with floor
//! reservations, blended toward the previous powers when the raw step would
//! hurt the sum rate). The safeguards make the recorded sum rate
//! non-decreasing by construction; feasibility of the floors is checked once
//! at the end and reported honestly.

use num_complex::Complex64 as C64;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::math::{cdot, cdot_h, norm_sq, normalized, principal_generalized_eig, CMat};
use crate::optim::sinr::{echo_energy, rate_from_state, sinr_floor, RateReport};
use crate::optim::waterfill::water_fill;
use crate::waveform::PrecoderState;

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// Lagrange multipliers attached to the SINR floors, constrained to
/// `[-1, 0]` so the weights `1+η` interpolate between dropping a term and
/// counting it fully.
#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers {
    /// One multiplier per terminal floor.
    pub eta_user: Vec<f64>,
    /// Multiplier on the echo floor.
    pub eta_target: f64,
}

impl Multipliers {
    /// All multipliers at the neutral midpoint −1/2.
    pub fn neutral(n_users: usize) -> Self {
        Multipliers { eta_user: vec![-0.5; n_users], eta_target: -0.5 }
    }
}

/// Tangent-plane surrogate of the negated sum rate at anchor `gamma0`:
/// `S = −Σ log2(1+γ⁰_i) − Σ (γ_i−γ⁰_i)/(1+γ⁰_i)·log2e`.
///
/// This is the first-order expansion of `−Σ log2(1+γ_i)`, which is convex in
/// the SINRs, so the surrogate lower-bounds it everywhere and touches it at
/// the anchor.
pub fn surrogate_value(gamma: &[f64], gamma0: &[f64]) -> Result<f64> {
    if gamma.len() != gamma0.len() {
        return Err(Error::arg("surrogate needs matching SINR vectors"));
    }
    if gamma.iter().chain(gamma0).any(|g| !(*g >= 0.0)) {
        return Err(Error::arg("SINRs must be nonnegative"));
    }
    let mut s = 0.0;
    for (g, g0) in gamma.iter().zip(gamma0) {
        s -= (1.0 + g0).log2();
        s -= (g - g0) / (1.0 + g0) * LOG2_E;
    }
    Ok(s)
}

/// Per-terminal SINR pieces reused by the Lagrangian and its gradients:
/// `(numerator, interfering amplitude, denominator)` for each terminal.
fn terminal_parts(h: &CMat, state: &PrecoderState, noise_var: f64) -> Vec<(f64, C64, f64)> {
    let k_users = state.n_users();
    (0..k_users)
        .map(|i| {
            let hi = h.row(i);
            let num = state.p_user[i] * cdot(hi, &state.w_user[i]).norm_sqr();
            let mut amp = C64::from(state.p_target.sqrt()) * cdot(hi, &state.w_target);
            for j in 0..k_users {
                if j != i {
                    amp += C64::from(state.p_user[j].sqrt()) * cdot(hi, &state.w_user[j]);
                }
            }
            (num, amp, amp.norm_sqr() + noise_var)
        })
        .collect()
}

/// Echo-link pieces: the row `v·Z`, the per-stream received amplitudes
/// `v·Z·w̃_s`, and the interference-plus-noise denominator.
struct EchoParts {
    vz: Vec<C64>,
    stream_amp: Vec<C64>,
    den: f64,
}

fn echo_parts(z: &CMat, a_k: &CMat, v: &[C64], state: &PrecoderState, noise_var: f64) -> EchoParts {
    let mut vz = vec![C64::new(0.0, 0.0); z.nc];
    for r in 0..z.nr {
        for (c, out) in vz.iter_mut().enumerate() {
            *out += v[r] * z[(r, c)];
        }
    }
    let weighted = state.weighted_columns();
    let stream_amp: Vec<C64> = (0..weighted.nc).map(|s| cdot(&vz, &weighted.col(s))).collect();
    let mut den = noise_var * norm_sq(v);
    for k in 0..a_k.nc {
        den += cdot(v, &a_k.col(k)).norm_sqr();
    }
    EchoParts { vz, stream_amp, den }
}

/// Floor-pressure Lagrangian
/// `L = Σ_k (1+η_k)(γ_k−γ̄_k) + (1+η_T)(γ_T−γ̄_T)`.
pub fn lagrangian_value(
    h: &CMat,
    z: &CMat,
    a_k: &CMat,
    v: &[C64],
    state: &PrecoderState,
    eta: &Multipliers,
    cfg: &SystemConfig,
) -> Result<f64> {
    if eta.eta_user.len() != state.n_users() {
        return Err(Error::arg("one multiplier per terminal is required"));
    }
    let gamma_floor_user = sinr_floor(cfg.rate_floor_user);
    let gamma_floor_target = sinr_floor(cfg.rate_floor_target);
    let parts = terminal_parts(h, state, cfg.noise_ue);
    let mut l = 0.0;
    for (i, (num, _, den)) in parts.iter().enumerate() {
        l += (1.0 + eta.eta_user[i]) * (num / den - gamma_floor_user);
    }
    let echo = echo_parts(z, a_k, v, state, cfg.noise_bs);
    let num: f64 = echo.stream_amp.iter().map(|a| a.norm_sqr()).sum();
    let gamma_t = echo_energy(cfg) * num / echo.den;
    l += (1.0 + eta.eta_target) * (gamma_t - gamma_floor_target);
    Ok(l)
}

/// Wirtinger gradient of the Lagrangian in the `k`-th terminal beamformer
/// (derivative in the conjugate coordinates, so real-part perturbations of
/// `w_k` move `L` by twice the real part of the gradient).
pub fn kkt_grad_w(
    k: usize,
    h: &CMat,
    z: &CMat,
    a_k: &CMat,
    v: &[C64],
    state: &PrecoderState,
    eta: &Multipliers,
    cfg: &SystemConfig,
) -> Result<Vec<C64>> {
    let k_users = state.n_users();
    if k >= k_users {
        return Err(Error::arg(format!("terminal index {k} out of range")));
    }
    if eta.eta_user.len() != k_users {
        return Err(Error::arg("one multiplier per terminal is required"));
    }
    let nt = h.nc;
    let parts = terminal_parts(h, state, cfg.noise_ue);
    let echo = echo_parts(z, a_k, v, state, cfg.noise_bs);
    let e_rad = echo_energy(cfg);
    let mut grad = vec![C64::new(0.0, 0.0); nt];

    // Own-signal term through the numerator of γ_k.
    let hk = h.row(k);
    let own = cdot(hk, &state.w_user[k]);
    let c_own = (1.0 + eta.eta_user[k]) * state.p_user[k] / parts[k].2;
    for m in 0..nt {
        grad[m] += c_own * own * hk[m].conj();
    }

    // Interference terms: w_k leaks into every other terminal's denominator.
    let sqrt_pk = state.p_user[k].sqrt();
    for i in 0..k_users {
        if i == k {
            continue;
        }
        let (num, amp, den) = parts[i];
        let gamma_i = num / den;
        let c_int = -(1.0 + eta.eta_user[i]) * gamma_i / den * sqrt_pk;
        let hi = h.row(i);
        for m in 0..nt {
            grad[m] += c_int * amp * hi[m].conj();
        }
    }

    // Echo term: stream k reflects off the target.
    let c_echo = (1.0 + eta.eta_target) * e_rad * state.p_user[k] / echo.den;
    let vzw = cdot(&echo.vz, &state.w_user[k]);
    for m in 0..nt {
        grad[m] += c_echo * vzw * echo.vz[m].conj();
    }
    Ok(grad)
}

/// Wirtinger gradient of the Lagrangian in the combining row `v`.
pub fn kkt_grad_v(
    z: &CMat,
    a_k: &CMat,
    v: &[C64],
    state: &PrecoderState,
    eta_target: f64,
    cfg: &SystemConfig,
) -> Result<Vec<C64>> {
    if v.len() != z.nr {
        return Err(Error::arg("combining row and sensing response disagree on size"));
    }
    let echo = echo_parts(z, a_k, v, state, cfg.noise_bs);
    let e_rad = echo_energy(cfg);
    let weighted = state.weighted_columns();
    let zw = z.mul(&weighted);
    let num: f64 = echo.stream_amp.iter().map(|a| a.norm_sqr()).sum();
    let gamma_t = e_rad * num / echo.den;

    let nr = v.len();
    let mut grad = vec![C64::new(0.0, 0.0); nr];
    for s in 0..zw.nc {
        let amp = echo.stream_amp[s];
        for m in 0..nr {
            grad[m] += e_rad * amp * zw[(m, s)].conj();
        }
    }
    for k in 0..a_k.nc {
        let amp = cdot(v, &a_k.col(k));
        for m in 0..nr {
            grad[m] -= gamma_t * amp * a_k[(m, k)].conj();
        }
    }
    for m in 0..nr {
        grad[m] -= gamma_t * cfg.noise_bs * v[m];
        grad[m] *= (1.0 + eta_target) / echo.den;
    }
    Ok(grad)
}

/// Combiner maximizing the echo SINR for the current transmit state: the
/// principal generalized eigenvector of the signal/interference pencil.
pub fn solve_combiner(
    z: &CMat,
    a_k: &CMat,
    state: &PrecoderState,
    noise_var: f64,
) -> Result<Vec<C64>> {
    let nr = z.nr;
    let weighted = state.weighted_columns();
    let zw = z.mul(&weighted);
    let mut q1 = CMat::zeros(nr, nr);
    for s in 0..zw.nc {
        let col = zw.col(s);
        for i in 0..nr {
            for j in 0..nr {
                q1[(i, j)] += col[i] * col[j].conj();
            }
        }
    }
    let mut q2 = CMat::zeros(nr, nr);
    for k in 0..a_k.nc {
        let col = a_k.col(k);
        for i in 0..nr {
            for j in 0..nr {
                q2[(i, j)] += col[i] * col[j].conj();
            }
        }
    }
    let q2 = q2.add_diag(C64::new(noise_var, 0.0));
    let (u, _) = principal_generalized_eig(&q1, &q2)?;
    Ok(u.iter().map(|x| x.conj()).collect())
}

/// Effective linear gains and floor reservations for the power step, with
/// the interference frozen at the current operating point.
fn power_step_inputs(
    h: &CMat,
    z: &CMat,
    a_k: &CMat,
    v: &[C64],
    state: &PrecoderState,
    cfg: &SystemConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let k_users = state.n_users();
    let e_rad = echo_energy(cfg);
    let parts = terminal_parts(h, state, cfg.noise_ue);
    let echo = echo_parts(z, a_k, v, state, cfg.noise_bs);
    // Unit-power stream couplings into the echo receiver.
    let coupling: Vec<f64> = (0..=k_users)
        .map(|s| {
            let w = if s < k_users { &state.w_user[s] } else { &state.w_target };
            cdot(&echo.vz, w).norm_sqr()
        })
        .collect();
    let num: f64 = echo.stream_amp.iter().map(|a| a.norm_sqr()).sum();
    let gamma_t = e_rad * num / echo.den;
    let gamma_floor_user = sinr_floor(cfg.rate_floor_user);
    let gamma_floor_target = sinr_floor(cfg.rate_floor_target);

    let mut gains = Vec::with_capacity(k_users + 1);
    let mut floors = Vec::with_capacity(k_users + 1);
    for i in 0..k_users {
        let (num_i, _, den_i) = parts[i];
        let unit_gain = if state.p_user[i] > 0.0 { num_i / state.p_user[i] } else { 0.0 };
        let gamma_i = num_i / den_i;
        if unit_gain <= 0.0 && gamma_floor_user > 0.0 {
            return Err(Error::infeasible(
                "C1",
                format!("terminal {i} has zero beamforming gain but a positive SINR floor"),
            ));
        }
        let g = LOG2_E
            * (unit_gain / (den_i * (1.0 + gamma_i))
                + e_rad * coupling[i] / (echo.den * (1.0 + gamma_t)));
        gains.push(g.max(1e-300));
        floors.push(if unit_gain > 0.0 { gamma_floor_user * den_i / unit_gain } else { 0.0 });
    }
    let g_t = LOG2_E * e_rad * coupling[k_users] / (echo.den * (1.0 + gamma_t));
    gains.push(g_t.max(1e-300));
    // Echo floor with every terminal at its own floor power.
    let assisted: f64 = (0..k_users).map(|i| floors[i] * coupling[i]).sum();
    let needed = gamma_floor_target * echo.den / e_rad - assisted;
    let floor_t = if needed <= 0.0 {
        0.0
    } else if coupling[k_users] > 0.0 {
        needed / coupling[k_users]
    } else {
        return Err(Error::infeasible(
            "C2",
            "sensing stream has zero echo coupling but a positive echo floor".to_string(),
        ));
    };
    floors.push(floor_t);
    Ok((gains, floors))
}

/// Per-stream SINR slopes `dγ_i/dP_i` (interference frozen at the current
/// operating point) and the same floor reservations as the trace-form power
/// step. The trailing floor entry is the smallest sensing power that meets the
/// echo floor once the terminal reservations' reflections are credited; the
/// range-power trade study builds directly on it.
pub(crate) fn sinr_slope_inputs(
    h: &CMat,
    z: &CMat,
    a_k: &CMat,
    v: &[C64],
    state: &PrecoderState,
    cfg: &SystemConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let k_users = state.n_users();
    let e_rad = echo_energy(cfg);
    let parts = terminal_parts(h, state, cfg.noise_ue);
    let echo = echo_parts(z, a_k, v, state, cfg.noise_bs);
    let coupling: Vec<f64> = (0..=k_users)
        .map(|s| {
            let w = if s < k_users { &state.w_user[s] } else { &state.w_target };
            cdot(&echo.vz, w).norm_sqr()
        })
        .collect();
    let gamma_floor_user = sinr_floor(cfg.rate_floor_user);
    let gamma_floor_target = sinr_floor(cfg.rate_floor_target);

    let mut slopes = Vec::with_capacity(k_users + 1);
    let mut floors = Vec::with_capacity(k_users + 1);
    for i in 0..k_users {
        let (num_i, _, den_i) = parts[i];
        let unit_gain = if state.p_user[i] > 0.0 { num_i / state.p_user[i] } else { 0.0 };
        if unit_gain <= 0.0 && gamma_floor_user > 0.0 {
            return Err(Error::infeasible(
                "C1",
                format!("terminal {i} has zero beamforming gain but a positive SINR floor"),
            ));
        }
        slopes.push((unit_gain / den_i).max(1e-300));
        floors.push(if unit_gain > 0.0 { gamma_floor_user * den_i / unit_gain } else { 0.0 });
    }
    slopes.push((e_rad * coupling[k_users] / echo.den).max(1e-300));
    let assisted: f64 = (0..k_users).map(|i| floors[i] * coupling[i]).sum();
    let needed = gamma_floor_target * echo.den / e_rad - assisted;
    let floor_t = if needed <= 0.0 {
        0.0
    } else if coupling[k_users] > 0.0 {
        needed / coupling[k_users]
    } else {
        return Err(Error::infeasible(
            "C2",
            "sensing stream has zero echo coupling but a positive echo floor".to_string(),
        ));
    };
    floors.push(floor_t);
    Ok((slopes, floors))
}

/// How an alternating-design run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The iteration cap was reached first.
    MaxIter,
    /// Both update steps moved less than the convergence threshold.
    Converged,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Termination::MaxIter => write!(f, "max-iter"),
            Termination::Converged => write!(f, "W-converged-and-V-converged"),
        }
    }
}

/// One outer-iteration snapshot.
#[derive(Debug, Clone)]
pub struct MmlmRecord {
    /// 1-based outer iteration index.
    pub iteration: usize,
    /// Sum rate after this iteration's updates.
    pub r_sum: f64,
    /// Surrogate value of the new SINRs against this iteration's anchor.
    pub surrogate: f64,
    /// Worst terminal-floor slack.
    pub c1_residual: f64,
    /// Echo-floor slack.
    pub c2_residual: f64,
    /// Power-budget slack.
    pub c3_residual: f64,
    /// Squared beamformer movement `Σ_k ‖w_k − w_k_prev‖²`.
    pub dw_sq: f64,
    /// Squared combiner movement.
    pub dv_sq: f64,
    /// Transmit state after the iteration.
    pub state: PrecoderState,
    /// Combining row after the iteration.
    pub v: Vec<C64>,
}

/// Full history of an alternating-design run.
#[derive(Debug, Clone)]
pub struct MmlmTrace {
    /// One record per outer iteration, in order.
    pub records: Vec<MmlmRecord>,
    /// Outer iterations executed.
    pub iterations: usize,
    /// Why the loop stopped.
    pub termination: Termination,
}

impl MmlmTrace {
    /// CSV-style export: a header line followed by one line per iteration.
    pub fn to_lines(&self) -> Vec<String> {
        let mut lines =
            vec!["iteration,r_sum,surrogate,c1_residual,c2_residual,c3_residual,dw_sq,dv_sq"
                .to_string()];
        for r in &self.records {
            lines.push(format!(
                "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.6e},{:.6e}",
                r.iteration,
                r.r_sum,
                r.surrogate,
                r.c1_residual,
                r.c2_residual,
                r.c3_residual,
                r.dw_sq,
                r.dv_sq
            ));
        }
        lines
    }
}

/// Converged operating point of the joint design.
#[derive(Debug, Clone)]
pub struct MmlmSolution {
    /// Final beamformers and powers.
    pub state: PrecoderState,
    /// Final combining row.
    pub v: Vec<C64>,
    /// Final rates and residuals.
    pub report: RateReport,
    /// Per-iteration history.
    pub trace: MmlmTrace,
}

const INNER_STEPS: usize = 50;
const LINE_HALVINGS: usize = 30;

/// Joint beamformer / combiner / power design.
///
/// `h` holds one channel row per selected terminal (may have zero rows for a
/// sensing-only design), `z` the sensing response, `a_k` the uplink leakage
/// signatures at the echo receiver (zero columns when the terminals are
/// silent during the scan), and `w_target` the fixed sensing beam direction.
/// Returns the final state with its full iteration trace, or an
/// infeasibility error naming the binding constraint when the floors cannot
/// be met.
pub fn mmlm(
    h: &CMat,
    z: &CMat,
    a_k: &CMat,
    w_target: &[C64],
    cfg: &SystemConfig,
    nu_max: usize,
    epsilon: f64,
) -> Result<MmlmSolution> {
    let k_users = h.nr;
    let nt = w_target.len();
    if h.nr > 0 && h.nc != nt {
        return Err(Error::arg("channel rows and sensing beam disagree on array size"));
    }
    if z.nc != nt {
        return Err(Error::arg("sensing response and sensing beam disagree on array size"));
    }
    if a_k.nc > 0 && a_k.nr != z.nr {
        return Err(Error::arg("leakage signatures and sensing response disagree on size"));
    }
    if nu_max == 0 || !(epsilon > 0.0) {
        return Err(Error::arg("need nu_max ≥ 1 and a positive convergence threshold"));
    }
    if !(cfg.noise_bs > 0.0) {
        return Err(Error::arg("echo receiver noise must be positive"));
    }

    // Initial state: conjugate-matched terminal beams, equal powers.
    let share = cfg.p_tot / (k_users + 1) as f64;
    let mut state = PrecoderState {
        w_user: (0..k_users)
            .map(|k| normalized(&h.row(k).iter().map(|x| x.conj()).collect::<Vec<_>>()))
            .collect::<Result<Vec<_>>>()?,
        w_target: normalized(w_target)?,
        p_user: vec![share; k_users],
        p_target: share,
    };
    let mut eta = Multipliers::neutral(k_users);
    let mut v = solve_combiner(z, a_k, &state, cfg.noise_bs)?;
    let mut report = rate_from_state(h, z, a_k, &v, &state, cfg)?;

    let mut records: Vec<MmlmRecord> = Vec::with_capacity(nu_max);
    let mut termination = Termination::MaxIter;
    let mut iterations = 0;

    for iter in 1..=nu_max {
        iterations = iter;
        let mut anchor = Vec::with_capacity(k_users + 1);
        anchor.extend_from_slice(&report.gamma_users);
        anchor.push(report.gamma_target);

        // Combiner update: globally optimal for the frozen transmit state,
        // so the echo SINR (and with it the sum rate) cannot decrease.
        let v_new = solve_combiner(z, a_k, &state, cfg.noise_bs)?;
        let dv_sq: f64 = v_new
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        v = v_new;
        report = rate_from_state(h, z, a_k, &v, &state, cfg)?;

        // Beamformer update: gradient ascent on the Lagrangian, each step
        // accepted only if the true sum rate improves.
        let w_before = state.w_user.clone();
        if k_users > 0 {
            for _ in 0..INNER_STEPS {
                let mut grads = Vec::with_capacity(k_users);
                let mut residual_sq = 0.0;
                for k in 0..k_users {
                    let g = kkt_grad_w(k, h, z, a_k, &v, &state, &eta, cfg)?;
                    let w = &state.w_user[k];
                    let radial = cdot_h(w, &g).re / norm_sq(w).max(1e-300);
                    residual_sq += g
                        .iter()
                        .zip(w)
                        .map(|(gi, wi)| (gi - wi * radial).norm_sqr())
                        .sum::<f64>();
                    grads.push(g);
                }
                if residual_sq < 1e-18 {
                    break;
                }
                let mut accepted = false;
                let mut t = 1.0;
                for _ in 0..LINE_HALVINGS {
                    let mut cand = state.clone();
                    for k in 0..k_users {
                        let mut wk = cand.w_user[k].clone();
                        for (wi, gi) in wk.iter_mut().zip(&grads[k]) {
                            *wi += t * gi;
                        }
                        cand.w_user[k] = normalized(&wk)?;
                    }
                    if let Ok(rep) = rate_from_state(h, z, a_k, &v, &cand, cfg) {
                        if rep.r_sum > report.r_sum + 1e-15 {
                            state = cand;
                            report = rep;
                            accepted = true;
                            break;
                        }
                    }
                    t *= 0.5;
                }
                if !accepted {
                    break;
                }
            }
        }
        let dw_sq: f64 = state
            .w_user
            .iter()
            .zip(&w_before)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>())
            .sum();

        // Multiplier update: projected subgradient with a diminishing step,
        // clamped to the admissible interval.
        let step = 0.1 / (iter as f64).sqrt();
        let gamma_floor_user = sinr_floor(cfg.rate_floor_user);
        let gamma_floor_target = sinr_floor(cfg.rate_floor_target);
        for k in 0..k_users {
            eta.eta_user[k] = (eta.eta_user[k]
                - step * (report.gamma_users[k] - gamma_floor_user))
                .clamp(-1.0, 0.0);
        }
        eta.eta_target =
            (eta.eta_target - step * (report.gamma_target - gamma_floor_target)).clamp(-1.0, 0.0);

        // Power update: water fill on the frozen-interference gains, blended
        // back toward the previous powers if the raw step hurts the rate.
        let (gains, floors) = power_step_inputs(h, z, a_k, &v, &state, cfg)?;
        let p_new = water_fill(&gains, cfg.p_tot, &floors)?;
        let p_old: Vec<f64> = state
            .p_user
            .iter()
            .copied()
            .chain(std::iter::once(state.p_target))
            .collect();
        let mut t = 1.0;
        for _ in 0..=LINE_HALVINGS {
            let blend: Vec<f64> = p_new
                .iter()
                .zip(&p_old)
                .map(|(n, o)| t * n + (1.0 - t) * o)
                .collect();
            let mut cand = state.clone();
            cand.p_user = blend[..k_users].to_vec();
            cand.p_target = blend[k_users];
            if let Ok(rep) = rate_from_state(h, z, a_k, &v, &cand, cfg) {
                if rep.r_sum >= report.r_sum - 1e-15 {
                    state = cand;
                    report = rep;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-9 {
                break;
            }
        }

        let mut gamma_now = Vec::with_capacity(k_users + 1);
        gamma_now.extend_from_slice(&report.gamma_users);
        gamma_now.push(report.gamma_target);
        records.push(MmlmRecord {
            iteration: iter,
            r_sum: report.r_sum,
            surrogate: surrogate_value(&gamma_now, &anchor)?,
            c1_residual: report.c1_residual,
            c2_residual: report.c2_residual,
            c3_residual: report.c3_residual,
            dw_sq,
            dv_sq,
            state: state.clone(),
            v: v.clone(),
        });

        if dw_sq < epsilon && dv_sq < epsilon {
            termination = Termination::Converged;
            break;
        }
    }

    // Honest feasibility verdict on the final point.
    const FEAS_TOL: f64 = 1e-6;
    if !report.feasible(FEAS_TOL) {
        let (name, worst) = [
            ("C1", report.c1_residual),
            ("C2", report.c2_residual),
            ("C3", report.c3_residual),
        ]
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
        return Err(Error::infeasible(
            name,
            format!("final design violates the floor by {:.3e}", -worst),
        ));
    }

    Ok(MmlmSolution {
        state,
        v,
        report,
        trace: MmlmTrace { records, iterations, termination },
    })
}

/// Classic closed-form transmit beamformer families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    /// Conjugate match to each terminal's channel.
    Mrt,
    /// Channel inversion: zero cross-terminal leakage.
    Zf,
    /// Regularized inversion trading leakage against noise.
    Mmse,
}

/// Unit-norm columns of the requested baseline beamformer. `mmse_load` is
/// the diagonal loading `σ²K/p_tot` used by the regularized variant and
/// ignored otherwise. A singular Gram matrix falls back to a lightly loaded
/// inverse with a warning.
pub fn baseline_precoders(h: &CMat, kind: BaselineKind, mmse_load: f64) -> Result<CMat> {
    let cols = baseline_columns(h, kind, mmse_load)?;
    let cols: Vec<Vec<C64>> = cols.iter().map(|c| normalized(c)).collect::<Result<_>>()?;
    Ok(CMat::from_cols(&cols))
}

/// Raw (unnormalized) columns of the requested baseline beamformer; their
/// relative norms carry each family's natural per-terminal weighting (e.g.
/// the conjugate match scales with channel strength).
fn baseline_columns(h: &CMat, kind: BaselineKind, mmse_load: f64) -> Result<Vec<Vec<C64>>> {
    let k_users = h.nr;
    let nt = h.nc;
    if k_users == 0 {
        return Ok(Vec::new());
    }
    if k_users > nt {
        return Err(Error::arg("more terminals than transmit elements"));
    }
    let conj_cols: Vec<Vec<C64>> = (0..k_users)
        .map(|k| h.row(k).iter().map(|x| x.conj()).collect())
        .collect();
    let cols: Vec<Vec<C64>> = match kind {
        BaselineKind::Mrt => conj_cols,
        BaselineKind::Zf | BaselineKind::Mmse => {
            // Gram matrix G = H·Hᴴ, then columns of Hᴴ·(G + load·I)⁻¹.
            let mut gram = CMat::zeros(k_users, k_users);
            for i in 0..k_users {
                for j in 0..k_users {
                    gram[(i, j)] = cdot_h(h.row(j), h.row(i));
                }
            }
            let load = if kind == BaselineKind::Mmse { mmse_load.max(0.0) } else { 0.0 };
            let loaded = gram.add_diag(C64::new(load, 0.0));
            let solve_all = |g: &CMat| -> Result<Vec<Vec<C64>>> {
                (0..k_users)
                    .map(|k| {
                        let mut e = vec![C64::new(0.0, 0.0); k_users];
                        e[k] = C64::new(1.0, 0.0);
                        let y = g.solve(&e)?;
                        let mut col = vec![C64::new(0.0, 0.0); nt];
                        for (i, yi) in y.iter().enumerate() {
                            for m in 0..nt {
                                col[m] += conj_cols[i][m] * yi;
                            }
                        }
                        Ok(col)
                    })
                    .collect()
            };
            match solve_all(&loaded) {
                Ok(cols) => cols,
                Err(_) => {
                    let trace: f64 = (0..k_users).map(|i| gram[(i, i)].re).sum();
                    let tikhonov = loaded.add_diag(C64::new(1e-8 * trace / k_users as f64, 0.0));
                    log::warn!(
                        "singular terminal Gram matrix; falling back to a loaded inverse"
                    );
                    solve_all(&tikhonov)?
                }
            }
        }
    };
    Ok(cols)
}

/// Baseline operating point for like-for-like comparison against a finished
/// joint design: the classic beamformer replaces the per-terminal beams while
/// the sensing beam and the water-filled power vector are carried over from
/// the reference state, and the combiner is re-solved for the new beams. Only
/// the terminal beam directions differ between the two operating points, so a
/// rate difference is attributable to the beamformer family alone.
pub fn baseline_state(
    h: &CMat,
    z: &CMat,
    a_k: &CMat,
    reference: &PrecoderState,
    kind: BaselineKind,
    cfg: &SystemConfig,
) -> Result<(PrecoderState, Vec<C64>)> {
    let k_users = h.nr;
    if reference.p_user.len() != k_users {
        return Err(Error::arg("reference state sized for a different terminal count"));
    }
    let w = baseline_precoders(h, kind, cfg.noise_ue * k_users as f64 / cfg.p_tot)?;
    let state = PrecoderState {
        w_user: (0..k_users).map(|k| w.col(k)).collect(),
        w_target: reference.w_target.clone(),
        p_user: reference.p_user.clone(),
        p_target: reference.p_target,
    };
    let v = solve_combiner(z, a_k, &state, cfg.noise_bs)?;
    Ok((state, v))
}
