//! Scan-frame planning and terminal placement.
//!
//! A frame tiles the upper half-space into elevation × azimuth cells. One
//! block is spent per cell; the dynamic beam points at the cell center and
//! the chirp slope alternates sign from block to block so that consecutive
//! blocks form up/down pairs for ranging. Terminals live in the lower
//! half-space and are placed uniformly over the annular cell area.

use rand::Rng;

use crate::config::SystemConfig;
use crate::error::Result;
use crate::math::standard_normal;

/// Pointing direction in spherical coordinates.
///
/// `theta` is measured from the array boresight (+z): the scanned sector is
/// `(0, π/2)` and terminals lie in `(π/2, π)`. `phi` is the azimuth in
/// `(0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    /// Elevation angle, rad.
    pub theta: f64,
    /// Azimuth angle, rad.
    pub phi: f64,
}

/// One scheduled block of a scan frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockPlan {
    /// Block index, `0 ..= m_blocks-1`, in transmission order.
    pub index: usize,
    /// Scan-cell center the dynamic beam points at during this block.
    pub dir: Direction,
    /// Chirp slope sign: `+1` (up) or `-1` (down).
    pub chirp_sign: i8,
}

/// Complete per-frame schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePlan {
    /// Blocks in transmission order (elevation-major, azimuth-minor).
    pub blocks: Vec<BlockPlan>,
    /// Number of elevation rings.
    pub m_elev: usize,
    /// Number of azimuth cells per ring.
    pub m_azim: usize,
}

impl FramePlan {
    /// Total number of blocks.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    /// True when the plan holds no blocks (cannot happen for valid configs).
    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Index of the block whose cell contains `dir`, if any.
    pub fn block_covering(&self, dir: Direction, cfg: &SystemConfig) -> Option<usize> {
        let de = cfg.beamwidth_elev_deg.to_radians();
        let da = cfg.beamwidth_azim_deg.to_radians();
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&dir.theta) {
            return None;
        }
        let ie = (dir.theta / de) as usize;
        let ia = ((dir.phi.rem_euclid(2.0 * std::f64::consts::PI)) / da) as usize;
        let idx = ie * self.m_azim + ia.min(self.m_azim - 1);
        (idx < self.blocks.len()).then_some(idx)
    }
}

/// Builds the scan schedule for one frame.
///
/// Cells are visited elevation-major (all azimuths of the lowest-`theta`
/// ring first), directions point at cell centers, and chirp signs alternate
/// starting with `+1` on block 0.
pub fn build_frame_plan(cfg: &SystemConfig) -> Result<FramePlan> {
    cfg.validate()?;
    let m_elev = cfg.blocks_elev();
    let m_azim = cfg.blocks_azim();
    let de = cfg.beamwidth_elev_deg.to_radians();
    let da = cfg.beamwidth_azim_deg.to_radians();
    let mut blocks = Vec::with_capacity(m_elev * m_azim);
    for ie in 0..m_elev {
        for ia in 0..m_azim {
            let index = ie * m_azim + ia;
            blocks.push(BlockPlan {
                index,
                dir: Direction {
                    theta: (ie as f64 + 0.5) * de,
                    phi: (ia as f64 + 0.5) * da,
                },
                chirp_sign: if index % 2 == 0 { 1 } else { -1 },
            });
        }
    }
    Ok(FramePlan {
        blocks,
        m_elev,
        m_azim,
    })
}

/// One candidate terminal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserRecord {
    /// Stable identifier, `0 ..= candidates-1` in spawn order.
    pub id: usize,
    /// Distance from the array, m; lies in `[ref_distance, cell_radius]`.
    pub distance: f64,
    /// Position direction as seen from the array (lower half-space).
    pub dir: Direction,
    /// Log-normal shadow factor `exp(sigma·z)`, strictly positive.
    pub shadowing: f64,
}

/// Draws `count` terminals i.i.d. uniformly over the annular cell area,
/// with uniform angles and log-normal shadowing.
///
/// Uniform-over-area means the distance CDF is
/// `F(r) = (r² − d₀²)/(R² − d₀²)`; elevation is uniform in `(π/2, π)` and
/// azimuth uniform in `(0, 2π)`.
pub fn spawn_users<R: Rng>(cfg: &SystemConfig, count: usize, rng: &mut R) -> Vec<UserRecord> {
    let d0_sq = cfg.ref_distance * cfg.ref_distance;
    let r_sq = cfg.cell_radius * cfg.cell_radius;
    (0..count)
        .map(|id| {
            let u: f64 = rng.gen();
            let distance = (d0_sq + u * (r_sq - d0_sq)).sqrt();
            let theta = std::f64::consts::FRAC_PI_2 * (1.0 + rng.gen::<f64>());
            let phi = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
            let shadowing = (cfg.shadowing_sigma * standard_normal(rng)).exp();
            UserRecord {
                id,
                distance,
                dir: Direction { theta, phi },
                shadowing,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::derive_rng;

    #[test]
    fn default_frame_has_full_tiling() {
        // 1. 10°×10° cells tile the quarter-sphere into 9·36 = 324 blocks.
        let cfg = SystemConfig::default();
        let plan = build_frame_plan(&cfg).unwrap();
        assert_eq!(plan.len(), 324);
        assert_eq!((plan.m_elev, plan.m_azim), (9, 36));
        // Signs alternate starting +1.
        assert_eq!(plan.blocks[0].chirp_sign, 1);
        for pair in plan.blocks.windows(2) {
            assert_eq!(pair[0].chirp_sign, -pair[1].chirp_sign);
        }
        // Elevation-major order: the first ring keeps theta fixed while phi
        // advances by one cell per block.
        let da = cfg.beamwidth_azim_deg.to_radians();
        for (i, b) in plan.blocks.iter().take(plan.m_azim).enumerate() {
            assert!((b.dir.theta - 0.5 * 10f64.to_radians()).abs() < 1e-12);
            assert!((b.dir.phi - (i as f64 + 0.5) * da).abs() < 1e-12);
        }
        // Directions stay inside the scanned sector.
        for b in &plan.blocks {
            assert!(b.dir.theta > 0.0 && b.dir.theta < std::f64::consts::FRAC_PI_2);
            assert!(b.dir.phi > 0.0 && b.dir.phi < 2.0 * std::f64::consts::PI);
        }
    }

    #[test]
    fn coarse_elevation_gives_216_blocks() {
        // 2. 15° elevation cells: 6·36 = 216 blocks.
        let cfg = SystemConfig {
            beamwidth_elev_deg: 15.0,
            ..SystemConfig::default()
        };
        let plan = build_frame_plan(&cfg).unwrap();
        assert_eq!(plan.len(), 216);
    }

    #[test]
    fn block_covering_finds_the_right_cell() {
        // 3. A direction in the middle of cell (2, 7) maps to index 2·36+7.
        let cfg = SystemConfig::default();
        let plan = build_frame_plan(&cfg).unwrap();
        let dir = plan.blocks[2 * 36 + 7].dir;
        assert_eq!(plan.block_covering(dir, &cfg), Some(2 * 36 + 7));
    }

    #[test]
    fn spawned_users_respect_ranges_and_ids() {
        // 4. Bounds and id ordering hold for every draw.
        let cfg = SystemConfig::default();
        let mut rng = derive_rng(11, 0);
        let users = spawn_users(&cfg, 200, &mut rng);
        assert_eq!(users.len(), 200);
        for (i, u) in users.iter().enumerate() {
            assert_eq!(u.id, i);
            assert!(u.distance >= cfg.ref_distance && u.distance <= cfg.cell_radius);
            assert!(u.dir.theta > std::f64::consts::FRAC_PI_2 && u.dir.theta < std::f64::consts::PI);
            assert!(u.dir.phi >= 0.0 && u.dir.phi < 2.0 * std::f64::consts::PI);
            assert!(u.shadowing > 0.0);
        }
    }

    #[test]
    fn distance_distribution_matches_area_uniform_law() {
        // 5. Kolmogorov-Smirnov statistic of the empirical distance CDF
        //    against F(r) = (r²−d₀²)/(R²−d₀²) stays below 0.02 at n = 10⁴
        //    (the 1% critical value for that n is ≈ 0.0163).
        let cfg = SystemConfig::default();
        let mut rng = derive_rng(5, 0);
        let n = 10_000;
        let mut d: Vec<f64> = spawn_users(&cfg, n, &mut rng)
            .iter()
            .map(|u| u.distance)
            .collect();
        d.sort_by(f64::total_cmp);
        let d0_sq = cfg.ref_distance * cfg.ref_distance;
        let span = cfg.cell_radius * cfg.cell_radius - d0_sq;
        let mut ks: f64 = 0.0;
        for (i, &r) in d.iter().enumerate() {
            let f = (r * r - d0_sq) / span;
            let hi = (i + 1) as f64 / n as f64;
            let lo = i as f64 / n as f64;
            ks = ks.max((f - hi).abs()).max((f - lo).abs());
        }
        assert!(ks < 0.02, "KS statistic too large: {ks}");
    }

    #[test]
    fn shadowing_is_log_normal_with_requested_sigma() {
        // 6. ln(shadowing) has sample mean ≈ 0 and std ≈ sigma.
        let cfg = SystemConfig {
            shadowing_sigma: 0.8,
            ..SystemConfig::default()
        };
        let mut rng = derive_rng(6, 0);
        let logs: Vec<f64> = spawn_users(&cfg, 20_000, &mut rng)
            .iter()
            .map(|u| u.shadowing.ln())
            .collect();
        let mean = logs.iter().sum::<f64>() / logs.len() as f64;
        let var = logs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / logs.len() as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var.sqrt() - 0.8).abs() < 0.02, "std {}", var.sqrt());
    }
}
