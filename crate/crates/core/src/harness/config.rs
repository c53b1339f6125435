use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::PathLossModel;
use crate::error::{Error, Result};
use crate::estimator::GridSpec;
use crate::geometry::Position2D;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserRegion {
    pub center: Position2D,
    pub radius: f64,
}

/// Everything that defines an experiment. Results are a pure function of
/// this value.
///
/// Stored on disk as TOML; every field is optional and falls back to
/// [`ScenarioConfig::default`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub bs_pos: Position2D,
    pub irs_pos: Position2D,
    pub user_region: UserRegion,
    /// K.
    pub users: usize,
    /// I.
    pub irs_elements: usize,
    /// M.
    pub bs_antennas: usize,
    pub irs_spacing: f64,
    pub bs_spacing: f64,
    /// L, samples per block.
    pub block_len: usize,
    /// Q, number of blocks.
    pub num_blocks: usize,
    /// Per-snapshot-element SNR; `inf` disables noise.
    pub snr_db: f64,
    pub path_loss: PathLossModel,
    pub grid: GridSpec,
    pub seed: u64,
    pub trials: usize,
    pub error_threshold_deg: f64,
    pub min_separation_deg: f64,
    /// Zero-based BS antenna used to form snapshots.
    pub antenna: usize,
    /// Fixed user AOAs in degrees; replaces random placement when set.
    pub pinned_aoas: Option<Vec<f64>>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            bs_pos: Position2D::new(0.0, 0.0),
            irs_pos: Position2D::new(50.0, -50.0),
            user_region: UserRegion {
                center: Position2D::new(20.0, -20.0),
                radius: 30.0,
            },
            users: 3,
            irs_elements: 128,
            bs_antennas: 8,
            irs_spacing: 0.5,
            bs_spacing: 0.5,
            block_len: 6,
            num_blocks: 4,
            snr_db: 10.0,
            path_loss: PathLossModel::Unit,
            grid: GridSpec::default(),
            seed: 2024,
            trials: 1000,
            error_threshold_deg: 1.0,
            min_separation_deg: 2.0,
            antenna: 0,
            pinned_aoas: None,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.bs_pos.is_finite() && self.irs_pos.is_finite() && self.user_region.center.is_finite()) {
            return bad("positions must be finite".into());
        }
        if self.bs_pos == self.irs_pos {
            return bad("BS and IRS positions coincide".into());
        }
        if !(self.user_region.radius > 0.0 && self.user_region.radius.is_finite()) {
            return bad(format!("user region radius must be positive, got {}", self.user_region.radius));
        }
        if self.users == 0 {
            return bad("at least one user is required".into());
        }
        if self.irs_elements == 0 || self.bs_antennas == 0 {
            return bad("arrays need at least one element".into());
        }
        if !(self.irs_spacing > 0.0 && self.bs_spacing > 0.0) {
            return bad("element spacing must be positive".into());
        }
        if self.block_len <= self.users {
            return bad(format!(
                "block length L = {} must exceed the user count K = {}",
                self.block_len, self.users
            ));
        }
        if self.num_blocks == 0 {
            return bad("at least one block is required".into());
        }
        if self.snr_db.is_nan() {
            return bad("SNR is NaN".into());
        }
        if self.trials == 0 {
            return bad("at least one trial is required".into());
        }
        if !(self.error_threshold_deg > 0.0) {
            return bad("error threshold must be positive".into());
        }
        if !(self.min_separation_deg >= 0.0) {
            return bad("minimum separation must be non-negative".into());
        }
        if self.antenna >= self.bs_antennas {
            return bad(format!("antenna index {} with {} antennas", self.antenna, self.bs_antennas));
        }
        if let Some(p) = &self.pinned_aoas {
            if p.len() != self.users {
                return bad(format!("{} pinned AOAs for {} users", p.len(), self.users));
            }
            if p.iter().any(|a| !a.is_finite()) {
                return bad("pinned AOAs must be finite".into());
            }
        }
        if let PathLossModel::FreeSpace { wavelength_m } = self.path_loss {
            if !(wavelength_m > 0.0) {
                return bad("wavelength must be positive".into());
            }
        }
        self.grid.validate()
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
