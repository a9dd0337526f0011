//! Scratch: kernel estimates for raw-shadow direction rows, direct K draw.

use dfrc_core::ber::ber_kernel;
use dfrc_core::channel::{sensing_response, tx_steering, ChannelSet, EchoParams};
use dfrc_core::config::SystemConfig;
use dfrc_core::frame::{spawn_users, Direction};
use dfrc_core::math::{cdot, derive_rng, normalized, C64, CMat};
use dfrc_core::optim::{baseline_precoders, mmlm, BaselineKind};

fn raw_rows(cfg: &SystemConfig, users: &[dfrc_core::frame::UserRecord]) -> CMat {
    let rows: Vec<Vec<C64>> = users
        .iter()
        .map(|u| {
            let gain = (cfg.n_tx() as f64 * u.shadowing).sqrt();
            tx_steering(cfg, u.dir).iter().map(|a| a * gain).collect()
        })
        .collect();
    CMat::from_rows(&rows)
}

fn run(cfg: &SystemConfig, p_t_frac: f64, snr_db: f64, blocks: usize) -> (f64, f64) {
    let dir = Direction { theta: 0.0, phi: 0.0 };
    let steer = tx_steering(cfg, dir);
    let w_t = normalized(&steer.iter().map(|x| x.conj()).collect::<Vec<_>>()).unwrap();
    let k_users = cfg.users;
    let p_target = p_t_frac * cfg.p_tot;
    let p_user = (cfg.p_tot - p_target) / k_users as f64;
    let noise_total = cfg.p_tot * 10f64.powf(-snr_db / 10.0);
    let mut cfg_op = cfg.clone();
    cfg_op.noise_ue = noise_total;
    let mut rng = derive_rng(7, 500);
    let mut acc = 0.0;
    let mut cnt = 0.0;
    let mut fallbacks = 0.0;
    for _ in 0..blocks {
        let users = spawn_users(cfg, k_users, &mut rng);
        let set = ChannelSet::build(cfg, &users, dir).unwrap();
        let h = raw_rows(cfg, &users);
        let echo =
            EchoParams::from_geometry(cfg, cfg.target_range, cfg.target_speed, cfg.target_rcs)
                .unwrap();
        let z = sensing_response(cfg, &set, &echo);
        let a_k = CMat::zeros(cfg.n_rx(), 0);
        let w_user: Vec<Vec<C64>> = match mmlm(&h, &z, &a_k, &w_t, &cfg_op, 15, 1e-3) {
            Ok(sol) => sol.state.w_user,
            Err(_) => {
                fallbacks += 1.0;
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
    (acc / cnt, fallbacks / blocks as f64)
}

fn main() {
    let cfg = SystemConfig::default();
    let mut cfg6 = SystemConfig::default();
    cfg6.users = 6;
    println!("snr_db   K4,PT0.1 (fb)      K6,PT0.1 (fb)      K4,PT0.3 (fb)");
    for &snr_db in &[6.0, 10.0, 14.0, 17.0, 20.0, 23.0, 26.0] {
        let (a, fa) = run(&cfg, 0.1, snr_db, 400);
        let (b, fb) = run(&cfg6, 0.1, snr_db, 400);
        let (c, fc) = run(&cfg, 0.3, snr_db, 400);
        println!(
            "{:5.1}   {:.3e} ({:4.2})   {:.3e} ({:4.2})   {:.3e} ({:4.2})",
            snr_db, a, fa, b, fb, c, fc
        );
    }
}
