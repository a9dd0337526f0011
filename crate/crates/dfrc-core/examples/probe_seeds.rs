//! Scratch probe: feasibility of low seeds at the experiment geometry.
use dfrc_core::channel::{sensing_response, snr_referenced_rows, tx_steering, ChannelSet, EchoParams};
use dfrc_core::config::SystemConfig;
use dfrc_core::frame::{spawn_users, Direction};
use dfrc_core::math::{derive_rng, normalized, CMat};
use dfrc_core::optim::mmlm;
use num_complex::Complex64 as C64;

fn main() {
    for seed in 0..12u64 {
        let cfg = SystemConfig::default();
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
        match mmlm(&h, &z, &a_k, &w_t, &cfg, 50, 1e-3) {
            Ok(s) => println!("seed {seed}: feasible, r_sum {:.3}", s.report.r_sum),
            Err(e) => println!("seed {seed}: {e}"),
        }
    }
}
