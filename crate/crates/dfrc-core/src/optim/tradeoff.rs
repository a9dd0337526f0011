//! Communication rate against required detection range: the sensing stream
//! is granted the smallest power that closes the detection link at the
//! requested range, and the remaining budget is water-filled across the
//! terminals.
//!
//! The terminal links follow the rate-experiment convention (rows referenced
//! to the operating budget so the `p_tot/σ²` axis is meaningful), while the
//! sensing link follows the physical two-way radar law over the swept range:
//! the study asks how much communication rate the radar's reach costs, so
//! absolute range must matter on the sensing side only.

use num_complex::Complex64 as C64;

use crate::channel::{sensing_response, snr_referenced_rows, tx_steering, ChannelSet, EchoParams};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::frame::{spawn_users, Direction};
use crate::math::{derive_rng, normalized, CMat};
use crate::optim::mmlm::{baseline_precoders, sinr_slope_inputs, solve_combiner, BaselineKind};
use crate::optim::sinr::rate_from_state;
use crate::optim::waterfill::water_fill;
use crate::waveform::PrecoderState;

/// Stream id used to derive the user draw for trade-study cells.
const TRADEOFF_STREAM: u64 = 91;

/// One evaluated cell of the range/rate trade study.
#[derive(Debug, Clone, Copy)]
pub struct TradeoffPoint {
    /// Served terminals' downlink sum rate in bits/s/Hz.
    pub r_com: f64,
    /// Sensing power reserved to close the detection link at the range.
    pub p_sensing: f64,
}

/// Evaluate one (range, cross-section) cell on one seeded terminal draw.
///
/// Returns `Ok(None)` when the detection requirement plus the terminals'
/// service floors exceed the power budget — the cell is marked infeasible
/// rather than failing the sweep. The terminal count and every link-budget
/// constant come from `cfg`.
pub fn tradeoff_cell(
    cfg: &SystemConfig,
    range_m: f64,
    rcs: f64,
    seed: u64,
) -> Result<Option<TradeoffPoint>> {
    if !(range_m > 0.0) {
        return Err(Error::arg("detection range must be positive"));
    }
    let k_users = cfg.users;
    let dir = Direction { theta: 0.0, phi: 0.0 };
    let mut rng = derive_rng(seed, TRADEOFF_STREAM);
    let users = spawn_users(cfg, k_users, &mut rng);
    let set = ChannelSet::build(cfg, &users, dir)?;
    let h = snr_referenced_rows(cfg, &users);
    let set = ChannelSet { h: h.clone(), ..set };
    let echo = EchoParams::from_geometry(cfg, range_m, cfg.target_speed, rcs)?;
    let z = sensing_response(cfg, &set, &echo);
    let a_k = CMat::zeros(cfg.n_rx(), 0);

    let steer = tx_steering(cfg, dir);
    let w_t = normalized(&steer.iter().map(|x| x.conj()).collect::<Vec<C64>>())?;
    let w = baseline_precoders(&h, BaselineKind::Mmse, cfg.noise_ue * k_users as f64 / cfg.p_tot)?;
    let share = cfg.p_tot / (k_users + 1) as f64;
    let reference = PrecoderState {
        w_user: (0..k_users).map(|k| w.col(k)).collect(),
        w_target: w_t,
        p_user: vec![share; k_users],
        p_target: share,
    };
    let v = solve_combiner(&z, &a_k, &reference, cfg.noise_bs)?;
    let (slopes, floors) = match sinr_slope_inputs(&h, &z, &a_k, &v, &reference, cfg) {
        Ok(pair) => pair,
        Err(Error::Infeasible { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let p_sensing = floors[k_users];
    let reserved: f64 = floors[..k_users].iter().sum();
    if p_sensing + reserved > cfg.p_tot {
        return Ok(None);
    }

    // Trace-form fill of the communication budget: maximize Σ slope_i·P_i
    // over the terminals with their service floors reserved.
    let p_user = match water_fill(&slopes[..k_users], cfg.p_tot - p_sensing, &floors[..k_users]) {
        Ok(p) => p,
        Err(Error::Infeasible { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let state = PrecoderState { p_user, p_target: p_sensing, ..reference };
    let v = solve_combiner(&z, &a_k, &state, cfg.noise_bs)?;
    let report = rate_from_state(&h, &z, &a_k, &v, &state, cfg)?;
    Ok(Some(TradeoffPoint { r_com: report.r_com, p_sensing }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_r_com(cfg: &SystemConfig, range_m: f64, rcs: f64, seeds: u64) -> f64 {
        let mut vals = Vec::new();
        for seed in 0..seeds {
            if let Some(pt) = tradeoff_cell(cfg, range_m, rcs, seed).unwrap() {
                vals.push(pt.r_com);
            }
        }
        assert!(!vals.is_empty(), "no feasible seed at {range_m} m");
        vals.iter().sum::<f64>() / vals.len() as f64
    }

    #[test]
    fn vanishing_range_recovers_the_no_radar_rate() {
        let cfg = SystemConfig::default();
        let near = tradeoff_cell(&cfg, 1.0, cfg.target_rcs, 2).unwrap().unwrap();
        assert!(near.p_sensing < 1e-9, "sensing power {} at 1 m", near.p_sensing);
        // Reference: same draw with the sensing stream granted nothing.
        let far = tradeoff_cell(&cfg, 400.0, cfg.target_rcs, 2).unwrap().unwrap();
        assert!((near.r_com - far.r_com).abs() < 0.05 * near.r_com.max(1e-12));
    }

    #[test]
    fn rate_is_non_increasing_in_range_per_draw() {
        let cfg = SystemConfig::default();
        let ranges = [200.0, 600.0, 1000.0, 1400.0, 1800.0, 2200.0];
        for seed in [2u64, 3, 4, 5] {
            let mut prev = f64::INFINITY;
            for &r in &ranges {
                let Some(pt) = tradeoff_cell(&cfg, r, cfg.target_rcs, seed).unwrap() else {
                    break; // once infeasible, larger ranges only get harder
                };
                assert!(
                    pt.r_com <= prev + 1e-3,
                    "seed {seed}: rate rose from {prev} to {} at {r} m",
                    pt.r_com
                );
                prev = pt.r_com;
            }
        }
    }

    #[test]
    fn sensing_power_grows_with_range_and_shrinks_with_cross_section() {
        let cfg = SystemConfig::default();
        let a = tradeoff_cell(&cfg, 1600.0, 0.5, 2).unwrap().unwrap();
        let b = tradeoff_cell(&cfg, 2000.0, 0.5, 2).unwrap().unwrap();
        let c = tradeoff_cell(&cfg, 2000.0, 1.0, 2).unwrap().unwrap();
        assert!(b.p_sensing > a.p_sensing);
        assert!(c.p_sensing < b.p_sensing);
    }

    #[test]
    fn absurd_range_marks_the_cell_infeasible() {
        let cfg = SystemConfig::default();
        let cell = tradeoff_cell(&cfg, 80_000.0, 0.5, 2).unwrap();
        assert!(cell.is_none());
    }

    #[test]
    fn published_operating_points_match() {
        let cfg = SystemConfig::default();
        let at600 = mean_r_com(&cfg, 600.0, 0.5, 60);
        let at800 = mean_r_com(&cfg, 800.0, 0.5, 60);
        assert!((at600 - 8.15).abs() <= 0.10 * 8.15, "0.6 km point {at600}");
        assert!((at800 - 8.02).abs() <= 0.10 * 8.02, "0.8 km point {at800}");
        assert!(at600 >= at800 - 1e-3);
    }

    #[test]
    fn cells_are_deterministic_under_a_seed() {
        let cfg = SystemConfig::default();
        let a = tradeoff_cell(&cfg, 900.0, 0.8, 7).unwrap().unwrap();
        let b = tradeoff_cell(&cfg, 900.0, 0.8, 7).unwrap().unwrap();
        assert_eq!(a.r_com.to_bits(), b.r_com.to_bits());
        assert_eq!(a.p_sensing.to_bits(), b.p_sensing.to_bits());
    }
}
