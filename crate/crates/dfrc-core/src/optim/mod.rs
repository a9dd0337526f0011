//! Link optimization: SINR/rate evaluation, terminal selection, power
//! allocation, and the alternating joint design of beams, combiner, and
//! powers.

pub mod mmlm;
pub mod select;
pub mod sinr;
pub mod tradeoff;
pub mod waterfill;

pub use mmlm::{
    baseline_precoders, baseline_state, kkt_grad_v, kkt_grad_w, lagrangian_value, mmlm,
    solve_combiner, surrogate_value, BaselineKind, MmlmRecord, MmlmSolution, MmlmTrace,
    Multipliers, Termination,
};
pub use select::{
    score_subset, smi_select, traversal_select, SelectionContext, SelectionResult,
};
pub use sinr::{echo_energy, rate_from_state, sinr_floor, sinr_target, sinr_user, RateReport};
pub use tradeoff::{tradeoff_cell, TradeoffPoint};
pub use waterfill::{water_fill, water_fill_log};
