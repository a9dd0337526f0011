//! Scratch probe: communication rate vs detection range, physical channels.
use dfrc_core::channel::{sensing_response, snr_referenced_rows, tx_steering, ChannelSet, EchoParams};
use dfrc_core::config::SystemConfig;
use dfrc_core::frame::{spawn_users, Direction};
use dfrc_core::math::{derive_rng, normalized, CMat};
use dfrc_core::optim::{
    baseline_precoders, echo_energy, rate_from_state, sinr_floor, sinr_target, sinr_user,
    smi_select, solve_combiner, water_fill, water_fill_log, BaselineKind, SelectionContext,
};
use dfrc_core::waveform::PrecoderState;
use num_complex::Complex64 as C64;

fn cell(range_m: f64, k_users: usize, rcs: f64, kind: BaselineKind, trace_fill: bool, use_selection: bool, n_seeds: u64) -> (f64, usize) {
    let mut vals = Vec::new();
    let mut bad = 0usize;
    for seed in 0..n_seeds {
        let mut cfg = SystemConfig::default();
        cfg.users = k_users;
        let dir = Direction { theta: 0.0, phi: 0.0 };
        let mut rng = derive_rng(seed, 91);
        let users = spawn_users(&cfg, cfg.candidates, &mut rng);
        let set = ChannelSet::build(&cfg, &users, dir).unwrap();
        let echo_ref =
            EchoParams::from_geometry(&cfg, cfg.target_range, cfg.target_speed, cfg.target_rcs)
                .unwrap();
        let z_ref = sensing_response(&cfg, &set, &echo_ref);
        let echo = EchoParams::from_geometry(&cfg, range_m, cfg.target_speed, rcs).unwrap();
        let z = sensing_response(&cfg, &set, &echo);
        let a_k = CMat::zeros(cfg.n_rx(), 0);
        let steer = tx_steering(&cfg, dir);
        let w_t = normalized(&steer.iter().map(|x| x.conj()).collect::<Vec<C64>>()).unwrap();
        let h = if use_selection {
            let ids: Vec<usize> = (0..cfg.candidates).collect();
            let ctx = SelectionContext::new(&set, &z_ref, &a_k, &w_t, &cfg);
            let picked = match smi_select(&ctx, &ids, k_users) {
                Ok(p) => p,
                Err(_) => { bad += 1; continue; }
            };
            let rows: Vec<Vec<C64>> =
                picked.chosen.iter().map(|&i| set.h.row(i).to_vec()).collect();
            CMat::from_rows(&rows)
        } else {
            let direct = spawn_users(&cfg, k_users, &mut rng);
            snr_referenced_rows(&cfg, &direct)
        };
        let w = baseline_precoders(&h, kind, cfg.noise_ue * k_users as f64 / cfg.p_tot).unwrap();
        let share = cfg.p_tot / (k_users + 1) as f64;
        let reference = PrecoderState {
            w_user: (0..k_users).map(|k| w.col(k)).collect(),
            w_target: w_t.clone(),
            p_user: vec![share; k_users],
            p_target: share,
        };
        let v = solve_combiner(&z, &a_k, &reference, cfg.noise_bs).unwrap();
        let e_rad = echo_energy(&cfg);
        // Per-stream SINR slopes at the reference (linear in own power).
        let slopes: Vec<f64> = (0..k_users)
            .map(|k| sinr_user(h.row(k), k, &reference, cfg.noise_ue).unwrap() / share)
            .collect();
        let gamma_u = sinr_floor(cfg.rate_floor_user);
        let gamma_t = sinr_floor(cfg.rate_floor_target);
        let floors: Vec<f64> = slopes.iter().map(|s| gamma_u / s).collect();
        // Echo SINR is jointly linear in the powers; extract the couplings.
        let mut st0 = reference.clone();
        st0.p_user = vec![0.0; k_users];
        st0.p_target = 1.0;
        let kappa_t = sinr_target(&v, &z, &a_k, &st0, e_rad, cfg.noise_bs).unwrap();
        let mut kappa_u = vec![0.0; k_users];
        for k in 0..k_users {
            let mut st = st0.clone();
            st.p_target = 0.0;
            st.p_user[k] = 1.0;
            kappa_u[k] = sinr_target(&v, &z, &a_k, &st, e_rad, cfg.noise_bs).unwrap();
        }
        let credited: f64 = floors.iter().zip(&kappa_u).map(|(f, k)| f * k).sum();
        let p_t_min = ((gamma_t - credited) / kappa_t).max(0.0);
        if p_t_min + floors.iter().sum::<f64>() > cfg.p_tot {
            bad += 1;
            continue;
        }
        let p = match if trace_fill {
            water_fill(&slopes, cfg.p_tot - p_t_min, &floors)
        } else {
            water_fill_log(&slopes, cfg.p_tot - p_t_min, &floors)
        } {
            Ok(p) => p,
            Err(_) => { bad += 1; continue; }
        };
        let mut state = reference.clone();
        state.p_user = p;
        state.p_target = p_t_min;
        let v = solve_combiner(&z, &a_k, &state, cfg.noise_bs).unwrap();
        let rep = rate_from_state(&h, &z, &a_k, &v, &state, &cfg).unwrap();
        vals.push(rep.r_com);
    }
    (vals.iter().sum::<f64>() / vals.len().max(1) as f64, bad)
}

fn main() {
    for k in [4usize, 6] {
        for rcs in [0.5, 1.0] {
            let mut prev = f64::INFINITY;
            for range_km in [0.05, 0.3, 0.6, 0.8, 1.2, 1.6, 2.0, 2.4, 2.8] {
                let (mean, bad) =
                    cell(range_km * 1000.0, k, rcs, BaselineKind::Mmse, true, false, 100);
                let mono = if mean <= prev + 1e-9 { "" } else { "  <-- NON-MONOTONE" };
                println!("K={k} rcs={rcs} range={range_km} km: r_com {mean:.3} (skip {bad}){mono}");
                if bad < 50 { prev = mean; }
            }
            println!();
        }
    }
}
