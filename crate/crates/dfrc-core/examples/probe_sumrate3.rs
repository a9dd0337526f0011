//! Scratch probe: baselines evaluated at the joint design's power vector.
use dfrc_core::channel::{sensing_response, snr_referenced_rows, tx_steering, ChannelSet, EchoParams};
use dfrc_core::config::SystemConfig;
use dfrc_core::frame::{spawn_users, Direction};
use dfrc_core::math::{derive_rng, normalized, CMat};
use dfrc_core::optim::{
    baseline_precoders, mmlm, rate_from_state, solve_combiner, BaselineKind,
};
use dfrc_core::waveform::PrecoderState;
use num_complex::Complex64 as C64;

fn run(snr_db: f64, iters: usize, tol: f64) {
    let mut sums = Vec::new();
    let mut gaps = [Vec::new(), Vec::new(), Vec::new()];
    let mut dominated = [0usize; 3];
    let mut count = [0usize; 3];
    let mut infeasible = 0usize;
    for seed in 0..130u64 {
        if sums.len() >= 100 { break; }
        let mut cfg = SystemConfig::default();
        cfg.noise_ue = cfg.p_tot / 10f64.powf(snr_db / 10.0);
        let dir = Direction { theta: 0.0, phi: 0.0 };
        let mut rng = derive_rng(seed, 77);
        let users = spawn_users(&cfg, cfg.users, &mut rng);
        let set = ChannelSet::build(&cfg, &users, dir).unwrap();
        let h = snr_referenced_rows(&cfg, &users);
        let set2 = ChannelSet { h: h.clone(), ..set };
        let echo =
            EchoParams::from_geometry(&cfg, cfg.target_range, cfg.target_speed, cfg.target_rcs)
                .unwrap();
        let z = sensing_response(&cfg, &set2, &echo);
        let a_k = CMat::zeros(cfg.n_rx(), 0);
        let steer = tx_steering(&cfg, dir);
        let w_t = normalized(&steer.iter().map(|x| x.conj()).collect::<Vec<C64>>()).unwrap();
        let sol = match mmlm(&h, &z, &a_k, &w_t, &cfg, iters, tol) {
            Ok(s) => s,
            Err(_) => { infeasible += 1; continue; }
        };
        sums.push(sol.report.r_sum);
        for (b, kind) in [BaselineKind::Mmse, BaselineKind::Zf, BaselineKind::Mrt]
            .into_iter().enumerate()
        {
            let w = baseline_precoders(&h, kind, cfg.noise_ue * h.nr as f64 / cfg.p_tot).unwrap();
            let state = PrecoderState {
                w_user: (0..h.nr).map(|k| w.col(k)).collect(),
                w_target: sol.state.w_target.clone(),
                p_user: sol.state.p_user.clone(),
                p_target: sol.state.p_target,
            };
            let v = solve_combiner(&z, &a_k, &state, cfg.noise_bs).unwrap();
            let rep = rate_from_state(&h, &z, &a_k, &v, &state, &cfg).unwrap();
            gaps[b].push(sol.report.r_sum - rep.r_sum);
            count[b] += 1;
            if sol.report.r_sum >= rep.r_sum - 1e-9 { dominated[b] += 1; }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
    print!(
        "snr={snr_db} iters={iters}: n={} skip={infeasible} r_sum {:.3} |",
        sums.len(), mean(&sums)
    );
    for (b, name) in ["MMSE", "ZF", "MRT"].iter().enumerate() {
        print!(" {name} {:.3} dom {}/{} |", mean(&gaps[b]), dominated[b], count[b]);
    }
    println!();
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let iters: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(50);
    let tol: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(1e-3);
    run(10.0, iters, tol);
}
