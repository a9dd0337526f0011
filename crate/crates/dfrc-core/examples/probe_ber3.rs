//! Scratch: kernel-level BER estimates under candidate channel conventions.

use dfrc_core::ber::ber_kernel;
use dfrc_core::channel::{sensing_response, snr_referenced_rows, tx_steering, ChannelSet, EchoParams};
use dfrc_core::config::SystemConfig;
use dfrc_core::frame::{spawn_users, Direction};
use dfrc_core::math::{cdot, derive_rng, normalized, C64, CMat};
use dfrc_core::optim::{baseline_precoders, mmlm, smi_select, BaselineKind, SelectionContext};

fn main() {
    let cfg = SystemConfig::default();
    let dir = Direction { theta: 0.0, phi: 0.0 };
    let steer = tx_steering(&cfg, dir);
    let w_t = normalized(&steer.iter().map(|x| x.conj()).collect::<Vec<_>>()).unwrap();
    let k_users = cfg.users;
    let p_target = 0.1 * cfg.p_tot;
    let p_user = (cfg.p_tot - p_target) / k_users as f64;
    let blocks = 400;

    for &snr_db in &[10.0, 14.0, 17.0, 20.0, 23.0] {
        // sigma^2 = total complex noise power (axis p_tot/sigma^2).
        let noise_total = cfg.p_tot * 10f64.powf(-snr_db / 10.0);
        let mut est = [0.0f64; 2]; // [no-selection, selection U=30]
        for variant in 0..2 {
            let mut rng = derive_rng(7, 1000 + variant as u64);
            let mut acc = 0.0;
            let mut cnt = 0.0;
            for _ in 0..blocks {
                let (channels, h) = if variant == 0 {
                    let users = spawn_users(&cfg, k_users, &mut rng);
                    let set = ChannelSet::build(&cfg, &users, dir).unwrap();
                    let h = snr_referenced_rows(&cfg, &users);
                    (set, h)
                } else {
                    let pool = spawn_users(&cfg, cfg.candidates, &mut rng);
                    let all = ChannelSet::build(&cfg, &pool, dir).unwrap();
                    let h_all = snr_referenced_rows(&cfg, &pool);
                    let all_ref = ChannelSet { h: h_all, ..all };
                    let echo = EchoParams::from_geometry(
                        &cfg, cfg.target_range, cfg.target_speed, cfg.target_rcs,
                    ).unwrap();
                    let z = sensing_response(&cfg, &all_ref, &echo);
                    let a_k = CMat::zeros(cfg.n_rx(), 0);
                    let ids: Vec<usize> = pool.iter().map(|u| u.id).collect();
                    let ctx = SelectionContext::new(&all_ref, &z, &a_k, &w_t, &cfg);
                    let chosen = smi_select(&ctx, &ids, k_users).unwrap().chosen;
                    let sel: Vec<_> = chosen
                        .iter()
                        .map(|id| pool.iter().find(|u| u.id == *id).unwrap().clone())
                        .collect();
                    let set = ChannelSet::build(&cfg, &sel, dir).unwrap();
                    let h = snr_referenced_rows(&cfg, &sel);
                    (set, h)
                };
                let set_ref = ChannelSet { h: h.clone(), ..channels };
                let echo = EchoParams::from_geometry(
                    &cfg, cfg.target_range, cfg.target_speed, cfg.target_rcs,
                ).unwrap();
                let z = sensing_response(&cfg, &set_ref, &echo);
                let a_k = CMat::zeros(cfg.n_rx(), 0);
                let w_user: Vec<Vec<C64>> = match mmlm(&h, &z, &a_k, &w_t, &cfg, 15, 1e-3) {
                    Ok(sol) => sol.state.w_user,
                    Err(_) => {
                        let w = baseline_precoders(&h, BaselineKind::Mrt, 0.0).unwrap();
                        (0..k_users).map(|k| w.col(k)).collect()
                    }
                };
                for k in 0..k_users {
                    let hk = h.row(k);
                    let sig = p_user * cdot(hk, &w_user[k]).norm_sqr();
                    let mut int = p_target * cdot(hk, &w_t).norm_sqr();
                    for i in 0..k_users {
                        if i != k {
                            int += p_user * cdot(hk, &w_user[i]).norm_sqr();
                        }
                    }
                    acc += ber_kernel(sig / (int + noise_total), cfg.mask_order, cfg.mod_index());
                    cnt += 1.0;
                }
            }
            est[variant] = acc / cnt;
        }
        println!(
            "{:5.1} dB  kernel-mean: direct-draw {:.3e}   selected-U30 {:.3e}",
            snr_db, est[0], est[1]
        );
    }
}
