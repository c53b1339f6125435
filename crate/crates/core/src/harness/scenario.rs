use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use crate::channel::{min_pairwise_gap, path_loss, ChannelRealization};
use crate::error::{Error, Result};
use crate::geometry::{aoa_from_positions, distance, Angle, ArrayGeometry, Position2D};
use crate::rng::SimRng;

/// Total redraws allowed across all users of one scenario.
pub const MAX_PLACEMENT_RETRIES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub realization: ChannelRealization,
    pub user_positions: Vec<Position2D>,
    pub true_aoas: Vec<Angle>,
}

/// Area-uniform point in a disk.
fn point_in_disk(center: Position2D, radius: f64, rng: &mut SimRng) -> Position2D {
    let r = radius * rng.random::<f64>().sqrt();
    let a = rng.random_range(0.0..2.0 * PI);
    Position2D::new(center.x + r * a.cos(), center.y + r * a.sin())
}

/// Places the users (or takes the pinned angles) and builds the channel.
pub fn draw_scenario(cfg: &ScenarioConfig, rng: &mut SimRng) -> Result<Scenario> {
    cfg.validate()?;
    let irs_geom = ArrayGeometry::new(cfg.irs_elements, cfg.irs_spacing)?;
    let bs_geom = ArrayGeometry::new(cfg.bs_antennas, cfg.bs_spacing)?;
    let gamma = aoa_from_positions(cfg.irs_pos, cfg.bs_pos)?;
    let varphi = aoa_from_positions(cfg.bs_pos, cfg.irs_pos)?;

    let (positions, thetas) = match &cfg.pinned_aoas {
        Some(pinned) => {
            // pinned users sit on their bearing at the region-centre range
            let range = distance(cfg.irs_pos, cfg.user_region.center).max(f64::MIN_POSITIVE);
            let thetas: Vec<Angle> = pinned.iter().map(|&d| Angle::from_degrees(d)).collect();
            let positions = thetas
                .iter()
                .map(|t| {
                    Position2D::new(
                        cfg.irs_pos.x + range * t.radians().cos(),
                        cfg.irs_pos.y + range * t.radians().sin(),
                    )
                })
                .collect();
            (positions, thetas)
        }
        None => place_users(cfg, rng)?,
    };

    let betas = positions
        .iter()
        .map(|&p| path_loss(&cfg.path_loss, distance(cfg.irs_pos, p), rng))
        .collect::<Result<Vec<_>>>()?;
    let delta = path_loss(&cfg.path_loss, distance(cfg.bs_pos, cfg.irs_pos), rng)?;

    let realization = ChannelRealization::new(thetas.clone(), betas, gamma, varphi, delta, irs_geom, bs_geom)?;
    Ok(Scenario {
        realization,
        user_positions: positions,
        true_aoas: thetas,
    })
}

fn place_users(cfg: &ScenarioConfig, rng: &mut SimRng) -> Result<(Vec<Position2D>, Vec<Angle>)> {
    let mut positions = Vec::with_capacity(cfg.users);
    let mut thetas: Vec<Angle> = Vec::with_capacity(cfg.users);
    let mut retries = 0;
    while positions.len() < cfg.users {
        let p = point_in_disk(cfg.user_region.center, cfg.user_region.radius, rng);
        let ok = match aoa_from_positions(cfg.irs_pos, p) {
            Ok(theta) => {
                thetas.push(theta);
                let sep_ok = min_pairwise_gap(&thetas) >= cfg.min_separation_deg;
                if !sep_ok {
                    thetas.pop();
                }
                sep_ok
            }
            Err(_) => false,
        };
        if ok {
            positions.push(p);
        } else {
            retries += 1;
            if retries > MAX_PLACEMENT_RETRIES {
                return Err(Error::SeparationUnsatisfiable {
                    users: cfg.users,
                    min_sep_deg: cfg.min_separation_deg,
                    retries: MAX_PLACEMENT_RETRIES,
                });
            }
        }
    }
    Ok((positions, thetas))
}
