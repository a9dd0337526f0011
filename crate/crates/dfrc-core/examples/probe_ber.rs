//! Scratch: measure the BER operating point used by the acceptance criteria.

use dfrc_core::ber::{ber_curve, ber_upper_bound, BerOptions, PrecoderChoice};
use dfrc_core::config::SystemConfig;
use std::time::Instant;

fn main() {
    let cfg = SystemConfig::default();
    let grid: Vec<f64> = (0..=10).map(|i| 2.0 * i as f64).collect();
    let opts = BerOptions {
        kind: PrecoderChoice::Mmlm,
        min_errors: 100,
        max_bits: 20_000_000,
        p_target_frac: 0.1,
        seed: 1,
    };

    let t0 = Instant::now();
    let curve = ber_curve(&cfg, &grid, &opts).unwrap();
    let t_curve = t0.elapsed();
    let bound = ber_upper_bound(&cfg, &grid, 1).unwrap();

    println!("== K=4, P_T=0.1 ==  ({:.1} s)", t_curve.as_secs_f64());
    for (p, b) in curve.iter().zip(&bound) {
        let ok = b.ber >= p.ber;
        println!(
            "{:5.1} dB  mc {:.4e} (±{:.1e}, {} bits)   bound {:.4e}   {}",
            p.snr_db,
            p.ber,
            p.ci95,
            p.bits_simulated,
            b.ber,
            if ok { "bound>=mc" } else { "BOUND BELOW MC  <<<<" }
        );
    }
    let at20 = curve.iter().find(|p| (p.snr_db - 20.0).abs() < 1e-9).unwrap();
    println!(
        "MC at 20 dB = {:.4e}  in [3e-4,3e-3]? {}",
        at20.ber,
        at20.ber >= 3e-4 && at20.ber <= 3e-3
    );

    // K = 6 variant.
    let mut cfg6 = SystemConfig::default();
    cfg6.users = 6;
    let t1 = Instant::now();
    let curve6 = ber_curve(&cfg6, &grid, &opts).unwrap();
    println!("== K=6, P_T=0.1 ==  ({:.1} s)", t1.elapsed().as_secs_f64());
    for (p6, p4) in curve6.iter().zip(&curve) {
        println!(
            "{:5.1} dB  mc {:.4e}  vs K4 {:.4e}   worse? {}",
            p6.snr_db,
            p6.ber,
            p4.ber,
            p6.ber >= p4.ber
        );
    }

    // P_T = 0.3 variant.
    let opts3 = BerOptions { p_target_frac: 0.3, ..opts };
    let t2 = Instant::now();
    let curve3 = ber_curve(&cfg, &grid, &opts3).unwrap();
    println!("== K=4, P_T=0.3 ==  ({:.1} s)", t2.elapsed().as_secs_f64());
    for (p3, p4) in curve3.iter().zip(&curve) {
        println!(
            "{:5.1} dB  mc {:.4e}  vs 0.1 {:.4e}   worse? {}",
            p3.snr_db,
            p3.ber,
            p4.ber,
            p3.ber >= p4.ber
        );
    }
    println!("total {:.1} s", t0.elapsed().as_secs_f64());
}
