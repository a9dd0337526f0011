//! Power allocation across transmit streams under a total budget and
//! per-stream minimum reservations.
//!
//! Two objectives are served. The trace objective used inside the joint
//! design is *linear* in the powers once the beamformers are frozen, so its
//! maximizer sits at a vertex: reserve every floor, then pour all residual
//! power into the stream(s) with the best effective gain. A classic
//! logarithmic water level (bisection with floor clamping) is also provided
//! for rate-oriented allocation.

use crate::error::{Error, Result};

/// Relative gain gap below which streams are considered tied and share the
/// residual equally (deterministic output on symmetric inputs).
const GAIN_TIE_REL: f64 = 1e-12;

fn check_inputs(gains: &[f64], p_tot: f64, floors: &[f64]) -> Result<f64> {
    if gains.is_empty() {
        return Err(Error::arg("power allocation needs at least one stream"));
    }
    if gains.len() != floors.len() {
        return Err(Error::arg(format!(
            "{} gains but {} floors",
            gains.len(),
            floors.len()
        )));
    }
    if gains.iter().any(|g| !(*g > 0.0)) {
        return Err(Error::arg("effective gains must be positive"));
    }
    if floors.iter().any(|f| !(*f >= 0.0)) {
        return Err(Error::arg("floors must be nonnegative"));
    }
    if !(p_tot >= 0.0) {
        return Err(Error::arg("total power must be nonnegative"));
    }
    let reserved: f64 = floors.iter().sum();
    if reserved > p_tot * (1.0 + 1e-12) + 1e-300 {
        return Err(Error::infeasible(
            "C3",
            format!(
                "floor reservations sum to {reserved:.6e} but the budget is {p_tot:.6e}"
            ),
        ));
    }
    Ok((p_tot - reserved).max(0.0))
}

/// Maximizes the linear objective `Σ g_i·P_i` subject to `ΣP = p_tot` and
/// `P_i ≥ floor_i`: floors are reserved first, and the residual goes to the
/// best gain (ties within `1e-12` relative split equally).
pub fn water_fill(gains: &[f64], p_tot: f64, floors: &[f64]) -> Result<Vec<f64>> {
    let residual = check_inputs(gains, p_tot, floors)?;
    let mut powers = floors.to_vec();
    if residual > 0.0 {
        let best = gains.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let winners: Vec<usize> = (0..gains.len())
            .filter(|&i| gains[i] >= best * (1.0 - GAIN_TIE_REL))
            .collect();
        let share = residual / winners.len() as f64;
        for i in winners {
            powers[i] += share;
        }
    }
    Ok(powers)
}

/// Maximizes `Σ log2(1 + g_i·P_i)` subject to `ΣP = p_tot` and
/// `P_i ≥ floor_i`, by bisecting the water level `w` in
/// `P_i(w) = max(floor_i, w − 1/g_i)`.
pub fn water_fill_log(gains: &[f64], p_tot: f64, floors: &[f64]) -> Result<Vec<f64>> {
    check_inputs(gains, p_tot, floors)?;
    let alloc = |level: f64| -> Vec<f64> {
        gains
            .iter()
            .zip(floors)
            .map(|(g, f)| (level - 1.0 / g).max(*f))
            .collect()
    };
    let total = |level: f64| -> f64 { alloc(level).iter().sum() };
    // The allocation is continuous and non-decreasing in the level; bracket
    // the budget and bisect.
    let mut lo = 0.0;
    let mut hi = p_tot + gains.iter().map(|g| 1.0 / g).fold(0.0, f64::max);
    debug_assert!(total(lo) <= p_tot * (1.0 + 1e-12) + 1e-300);
    while total(hi) < p_tot {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) < p_tot {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut powers = alloc(0.5 * (lo + hi));
    // Absorb the bisection slack into an unclamped stream so the budget is
    // met exactly.
    let slack = p_tot - powers.iter().sum::<f64>();
    if let Some(i) = (0..powers.len()).find(|&i| powers[i] > floors[i] + 1e-15) {
        powers[i] = (powers[i] + slack).max(floors[i]);
    } else if let Some(last) = powers.last_mut() {
        *last += slack.max(0.0);
    }
    Ok(powers)
}
