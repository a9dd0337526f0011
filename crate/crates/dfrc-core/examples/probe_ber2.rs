//! Scratch: decompose the per-terminal SINR inside the BER chain at 20 dB.

use dfrc_core::channel::{
    sensing_response, tx_steering, ChannelSet, EchoParams,
};
use dfrc_core::config::SystemConfig;
use dfrc_core::frame::Direction;
use dfrc_core::frame::spawn_users;
use dfrc_core::math::{cdot, derive_rng, normalized, C64};
use dfrc_core::optim::{
    baseline_precoders, mmlm, smi_select, BaselineKind, SelectionContext,
};
use dfrc_core::math::CMat;

fn main() {
    let cfg = SystemConfig::default();
    let snr_db = 20.0;
    let noise_total = 2.0 * cfg.p_tot * 10f64.powf(-snr_db / 10.0); // current convention
    let dir = Direction { theta: 0.0, phi: 0.0 };
    let steer = tx_steering(&cfg, dir);
    let w_t = normalized(&steer.iter().map(|x| x.conj()).collect::<Vec<_>>()).unwrap();
    let k_users = cfg.users;
    let p_target = 0.1 * cfg.p_tot;
    let p_user = (cfg.p_tot - p_target) / k_users as f64;

    let mut rng = derive_rng(1, 12345);
    let mut kernel_sum = 0.0;
    let mut count = 0.0;
    for blk in 0..24 {
        let pool = spawn_users(&cfg, cfg.candidates.max(k_users), &mut rng);
        let all = ChannelSet::build(&cfg, &pool, dir).unwrap();
        let echo =
            EchoParams::from_geometry(&cfg, cfg.target_range, cfg.target_speed, cfg.target_rcs)
                .unwrap();
        let z = sensing_response(&cfg, &all, &echo);
        let a_k = CMat::zeros(cfg.n_rx(), 0);
        let ids: Vec<usize> = pool.iter().map(|u| u.id).collect();
        let ctx = SelectionContext::new(&all, &z, &a_k, &w_t, &cfg);
        let mut chosen = smi_select(&ctx, &ids, k_users).unwrap().chosen;
        for id in &ids {
            if chosen.len() == k_users {
                break;
            }
            if !chosen.contains(id) {
                chosen.push(*id);
            }
        }
        let channels = all.subset(&cfg, &chosen).unwrap();
        let z_sub = sensing_response(&cfg, &channels, &echo);

        // Beams exactly as design_block does (table-config noise).
        let w_user: Vec<Vec<C64>> = match mmlm(&channels.h, &z_sub, &a_k, &w_t, &cfg, 15, 1e-3) {
            Ok(sol) => sol.state.w_user,
            Err(_) => {
                let w = baseline_precoders(&channels.h, BaselineKind::Mrt, 0.0).unwrap();
                (0..k_users).map(|k| w.col(k)).collect()
            }
        };

        // Adapted variant: mmlm at operating noise.
        let mut cfg_op = cfg.clone();
        cfg_op.noise_ue = noise_total;
        let w_adapt: Vec<Vec<C64>> =
            match mmlm(&channels.h, &z_sub, &a_k, &w_t, &cfg_op, 15, 1e-3) {
                Ok(sol) => sol.state.w_user,
                Err(_) => {
                    let w = baseline_precoders(&channels.h, BaselineKind::Mrt, 0.0).unwrap();
                    (0..k_users).map(|k| w.col(k)).collect()
                }
            };

        for k in 0..k_users {
            let hk = channels.row(k);
            let d = pool.iter().find(|u| u.id == chosen[k]).unwrap();
            let sig = p_user * cdot(hk, &w_user[k]).norm_sqr();
            let mut int = p_target * cdot(hk, &w_t).norm_sqr();
            for i in 0..k_users {
                if i != k {
                    int += p_user * cdot(hk, &w_user[i]).norm_sqr();
                }
            }
            let gamma = sig / (int + noise_total);
            let sig_a = p_user * cdot(hk, &w_adapt[k]).norm_sqr();
            let mut int_a = p_target * cdot(hk, &w_t).norm_sqr();
            for i in 0..k_users {
                if i != k {
                    int_a += p_user * cdot(hk, &w_adapt[i]).norm_sqr();
                }
            }
            let gamma_a = sig_a / (int_a + noise_total);
            let q = |g: f64| dfrc_core::ber::ber_kernel(g, cfg.mask_order, cfg.mod_index());
            if blk < 4 {
                println!(
                    "blk {blk} u{k}: d {:6.0} m  delta {:7.3}  sig {:9.3e} int {:9.3e} n {:9.3e}  g {:7.2} dB (ker {:.2e})  | adapted g {:7.2} dB (ker {:.2e})",
                    d.distance, d.shadowing, sig, int, noise_total,
                    10.0 * gamma.log10(), q(gamma),
                    10.0 * gamma_a.log10(), q(gamma_a),
                );
            }
            kernel_sum += q(gamma);
            count += 1.0;
        }
    }
    println!("mean kernel BER over {} user-blocks: {:.3e}", count, kernel_sum / count);
}
