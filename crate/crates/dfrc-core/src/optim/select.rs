//! Terminal selection: greedy successive-maximum selection and the
//! exhaustive subset search used as its quality reference.
//!
//! Both selectors score a subset the same way — conjugate-matched terminal
//! beams, the sensing beam pinned to the scan direction, a fixed per-terminal
//! power share with the rest of the budget on the sensing beam, and the
//! resulting downlink sum rate — so the exhaustive result upper-bounds the
//! greedy one under the one shared objective.

use num_complex::Complex64 as C64;

use rayon::prelude::*;

use crate::channel::ChannelSet;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::math::{normalized, CMat};
use crate::optim::mmlm::solve_combiner;
use crate::optim::sinr::rate_from_state;
use crate::waveform::PrecoderState;

/// Largest subset count the exhaustive selector will enumerate.
const TRAVERSAL_GUARD: f64 = 1e6;

/// Relative score gap treated as a tie (lowest id wins for determinism).
const SCORE_TIE_REL: f64 = 1e-12;

/// Outcome of a selection run.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    /// Chosen terminal ids, in pick order (greedy) or ascending (exhaustive).
    pub chosen: Vec<usize>,
    /// Best objective value per greedy round, not necessarily monotone
    /// (single entry for exhaustive search and forced selection).
    pub trace: Vec<f64>,
}

impl SelectionResult {
    /// Objective value of the final chosen set.
    pub fn score(&self) -> f64 {
        self.trace.last().copied().unwrap_or(0.0)
    }
}

/// Everything fixed across subset evaluations during one selection run.
pub struct SelectionContext<'a> {
    /// Channel rows of all candidates (row index = candidate position).
    pub h: &'a CMat,
    /// Sensing response at the scan geometry.
    pub z: &'a CMat,
    /// Uplink leakage signatures (zero columns during a silent scan).
    pub a_k: &'a CMat,
    /// Unit-norm sensing beam for the scan direction.
    pub w_target: &'a [C64],
    /// System parameters.
    pub cfg: &'a SystemConfig,
}

impl<'a> SelectionContext<'a> {
    /// Context for a candidate channel set with a silent uplink.
    pub fn new(
        channels: &'a ChannelSet,
        z: &'a CMat,
        a_k: &'a CMat,
        w_target: &'a [C64],
        cfg: &'a SystemConfig,
    ) -> Self {
        SelectionContext { h: &channels.h, z, a_k, w_target, cfg }
    }
}

/// Downlink sum rate of one candidate subset (indices into the candidate
/// rows) under the shared selection objective.
///
/// Each selected terminal carries the fixed share `p_tot/(K+1)` set by the
/// configured terminal count, whatever the subset size; the sensing beam
/// absorbs whatever the terminals leave unused. Holding the terminal share
/// fixed keeps scores of different-sized subsets comparable, and routing the
/// residual budget into the sensing beam keeps every subset on the same
/// total-power footing, so a partial set already faces the full budget's
/// interference.
pub fn score_subset(ctx: &SelectionContext, subset: &[usize]) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::arg("cannot score an empty subset"));
    }
    let rows: Vec<Vec<C64>> = subset.iter().map(|&i| ctx.h.row(i).to_vec()).collect();
    let h_sub = CMat::from_rows(&rows);
    let share = ctx.cfg.p_tot / (ctx.cfg.users + 1) as f64;
    let state = PrecoderState {
        w_user: rows
            .iter()
            .map(|r| normalized(&r.iter().map(|x| x.conj()).collect::<Vec<_>>()))
            .collect::<Result<Vec<_>>>()?,
        w_target: ctx.w_target.to_vec(),
        p_user: vec![share; subset.len()],
        p_target: ctx.cfg.p_tot - subset.len() as f64 * share,
    };
    let v = solve_combiner(ctx.z, ctx.a_k, &state, ctx.cfg.noise_bs)?;
    Ok(rate_from_state(&h_sub, ctx.z, ctx.a_k, &v, &state, ctx.cfg)?.r_com)
}

fn check_selection_args(n_candidates: usize, k: usize) -> Result<()> {
    if n_candidates == 0 {
        return Err(Error::arg("selection needs at least one candidate"));
    }
    if k == 0 || k > n_candidates {
        return Err(Error::arg(format!(
            "cannot pick {k} terminals from {n_candidates} candidates"
        )));
    }
    Ok(())
}

/// Greedy successive-maximum selection of `k` terminals from the candidates
/// whose ids are `ids` (parallel candidate scoring inside each round).
///
/// Each of the `k` rounds adds the candidate whose addition maximizes the
/// objective and appends the round's best value to the trace. A round's best
/// can dip below the previous round's — a scan block must still fill all
/// `k` slots when the remaining candidates only add interference — so the
/// trace is not guaranteed monotone; its last entry is the chosen set's
/// score, the quantity the exhaustive search upper-bounds. Ties within
/// `1e-12` relative go to the lowest id.
pub fn smi_select(ctx: &SelectionContext, ids: &[usize], k: usize) -> Result<SelectionResult> {
    check_selection_args(ids.len(), k)?;
    if k == ids.len() {
        // Forced selection: every candidate is needed.
        let all: Vec<usize> = (0..ids.len()).collect();
        let score = score_subset(ctx, &all)?;
        return Ok(SelectionResult { chosen: ids.to_vec(), trace: vec![score] });
    }

    let mut picked: Vec<usize> = Vec::with_capacity(k);
    let mut trace = Vec::with_capacity(k);
    for _round in 0..k {
        let remaining: Vec<usize> =
            (0..ids.len()).filter(|i| !picked.contains(i)).collect();
        let scored: Vec<(usize, f64)> = remaining
            .par_iter()
            .map(|&i| {
                let mut subset = picked.clone();
                subset.push(i);
                score_subset(ctx, &subset).map(|s| (i, s))
            })
            .collect::<Result<Vec<_>>>()?;
        // Sequential argmax with lowest-id tie-break; candidate order is the
        // id order, so the first within the tie band wins.
        let mut best = scored[0];
        for &(i, s) in &scored[1..] {
            if s > best.1 * (1.0 + SCORE_TIE_REL) + SCORE_TIE_REL {
                best = (i, s);
            } else if ids[i] < ids[best.0] && s >= best.1 * (1.0 - SCORE_TIE_REL) - SCORE_TIE_REL
            {
                best = (i, s.max(best.1));
            }
        }
        picked.push(best.0);
        trace.push(best.1);
    }
    Ok(SelectionResult { chosen: picked.iter().map(|&i| ids[i]).collect(), trace })
}

/// Number of `k`-subsets of `n` elements, saturating instead of overflowing.
fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc *= (n - i) as f64 / (i + 1) as f64;
        if acc > 1e18 {
            return acc;
        }
    }
    acc
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        let need = k - cur.len();
        for i in start..=(n - need) {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Exhaustive maximization of the selection objective over all `k`-subsets.
/// Refuses (with a cost-guard error) when the subset count exceeds 10⁶.
pub fn traversal_select(
    ctx: &SelectionContext,
    ids: &[usize],
    k: usize,
) -> Result<SelectionResult> {
    check_selection_args(ids.len(), k)?;
    let count = binomial(ids.len(), k);
    if count > TRAVERSAL_GUARD {
        return Err(Error::guard(format!(
            "{count:.3e} subsets of size {k} exceed the traversal limit {TRAVERSAL_GUARD:.0e}"
        )));
    }
    let subsets = combinations(ids.len(), k);
    let scored: Vec<f64> = subsets
        .par_iter()
        .map(|s| score_subset(ctx, s))
        .collect::<Result<Vec<_>>>()?;
    // Sequential scan keeps lexicographically-first tie-breaking.
    let mut best = 0usize;
    for (i, s) in scored.iter().enumerate() {
        if *s > scored[best] * (1.0 + SCORE_TIE_REL) + SCORE_TIE_REL {
            best = i;
        }
    }
    Ok(SelectionResult {
        chosen: subsets[best].iter().map(|&i| ids[i]).collect(),
        trace: vec![scored[best]],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sensing_response, tx_steering, EchoParams};
    use crate::frame::{spawn_users, Direction};
    use crate::math::derive_rng;

    struct Instance {
        cfg: SystemConfig,
        channels: ChannelSet,
        z: CMat,
        a_k: CMat,
        w_t: Vec<C64>,
        ids: Vec<usize>,
    }

    fn instance(seed: u64, n_candidates: usize) -> Instance {
        let mut cfg = SystemConfig::default();
        cfg.candidates = n_candidates;
        let dir = Direction { theta: 0.0, phi: 0.0 };
        let mut rng = derive_rng(seed, 50);
        let users = spawn_users(&cfg, n_candidates, &mut rng);
        let ids: Vec<usize> = users.iter().map(|u| u.id).collect();
        let channels = ChannelSet::build(&cfg, &users, dir).unwrap();
        let echo =
            EchoParams::from_geometry(&cfg, cfg.target_range, cfg.target_speed, cfg.target_rcs)
                .unwrap();
        let z = sensing_response(&cfg, &channels, &echo);
        let a_k = CMat::zeros(cfg.n_rx(), 0);
        let steer = tx_steering(&cfg, dir);
        let w_t = normalized(&steer.iter().map(|x| x.conj()).collect::<Vec<_>>()).unwrap();
        Instance { cfg, channels, z, a_k, w_t, ids }
    }

    impl Instance {
        fn ctx(&self) -> SelectionContext<'_> {
            SelectionContext::new(&self.channels, &self.z, &self.a_k, &self.w_t, &self.cfg)
        }
    }

    #[test]
    fn forced_selection_returns_every_candidate() {
        let inst = instance(1, 3);
        let res = smi_select(&inst.ctx(), &inst.ids, 3).unwrap();
        assert_eq!(res.chosen, inst.ids);
        assert_eq!(res.trace.len(), 1);
        assert!(res.score() > 0.0);
    }

    #[test]
    fn single_pick_equals_the_exhaustive_argmax() {
        for seed in 0..20u64 {
            let inst = instance(seed, 6);
            let ctx = inst.ctx();
            let greedy = smi_select(&ctx, &inst.ids, 1).unwrap();
            let exact = traversal_select(&ctx, &inst.ids, 1).unwrap();
            assert_eq!(greedy.chosen, exact.chosen, "seed {seed}");
            assert!((greedy.score() - exact.score()).abs() < 1e-12);
        }
    }

    #[test]
    fn greedy_never_beats_the_exhaustive_search() {
        let mut ratios = Vec::new();
        for seed in 0..100u64 {
            let inst = instance(seed, 8);
            let ctx = inst.ctx();
            let greedy = smi_select(&ctx, &inst.ids, 3).unwrap();
            let exact = traversal_select(&ctx, &inst.ids, 3).unwrap();
            assert!(
                greedy.score() <= exact.score() + 1e-9,
                "seed {seed}: greedy {} beats exhaustive {}",
                greedy.score(),
                exact.score()
            );
            ratios.push(greedy.score() / exact.score());
        }
        for (seed, r) in ratios.iter().enumerate() {
            assert!(*r >= 0.8, "seed {seed}: greedy at {r} of exhaustive");
        }
    }

    #[test]
    fn exhaustive_search_matches_a_nested_loop_oracle() {
        let inst = instance(13, 6);
        let ctx = inst.ctx();
        let fast = traversal_select(&ctx, &inst.ids, 2).unwrap();
        let mut best = (vec![], f64::NEG_INFINITY);
        for i in 0..6 {
            for j in (i + 1)..6 {
                let s = score_subset(&ctx, &[i, j]).unwrap();
                if s > best.1 {
                    best = (vec![inst.ids[i], inst.ids[j]], s);
                }
            }
        }
        assert_eq!(fast.chosen, best.0);
        assert!((fast.score() - best.1).abs() < 1e-12);
    }

    #[test]
    fn traversal_guard_trips_on_combinatorial_blowups() {
        let inst = instance(2, 30);
        let ctx = inst.ctx();
        match traversal_select(&ctx, &inst.ids, 8) {
            Err(Error::GuardExceeded(_)) => {}
            other => panic!("expected the cost guard, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_requests_are_rejected() {
        let inst = instance(3, 4);
        let ctx = inst.ctx();
        assert!(smi_select(&ctx, &[], 1).is_err());
        assert!(smi_select(&ctx, &inst.ids, 0).is_err());
        assert!(smi_select(&ctx, &inst.ids, 5).is_err());
        assert!(traversal_select(&ctx, &inst.ids, 0).is_err());
        assert!(score_subset(&ctx, &[]).is_err());
    }

    #[test]
    fn greedy_trace_records_each_round() {
        let inst = instance(4, 8);
        let res = smi_select(&inst.ctx(), &inst.ids, 3).unwrap();
        assert_eq!(res.trace.len(), res.chosen.len());
        assert!(res.chosen.len() <= 3 && !res.chosen.is_empty());
        // No duplicate picks.
        let mut sorted = res.chosen.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), res.chosen.len());
    }
}
