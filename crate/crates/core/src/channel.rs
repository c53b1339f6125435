//! Line-of-sight channels of one scenario draw: user→IRS vectors and the
//! rank-one IRS→BS matrix.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{steering_vector, Angle, ArrayGeometry, CVector};
use crate::rng::SimRng;

pub type CMatrix = DMatrix<Complex64>;

/// All channel-side parameters of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    /// AOA of user k at the IRS.
    pub thetas: Vec<Angle>,
    /// User k → IRS path-loss factor.
    pub betas: Vec<Complex64>,
    /// AOD from the IRS towards the BS.
    pub gamma: Angle,
    /// AOA at the BS from the IRS.
    pub varphi: Angle,
    /// IRS → BS path-loss factor.
    pub delta: Complex64,
    pub irs_geom: ArrayGeometry,
    pub bs_geom: ArrayGeometry,
}

impl ChannelRealization {
    pub fn new(
        thetas: Vec<Angle>,
        betas: Vec<Complex64>,
        gamma: Angle,
        varphi: Angle,
        delta: Complex64,
        irs_geom: ArrayGeometry,
        bs_geom: ArrayGeometry,
    ) -> Result<Self> {
        if thetas.is_empty() {
            return Err(Error::InvalidConfig("at least one user is required".into()));
        }
        if thetas.len() != betas.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} angles but {} path-loss factors",
                thetas.len(),
                betas.len()
            )));
        }
        if betas.iter().any(|b| b.norm() <= 0.0) || delta.norm() <= 0.0 {
            return Err(Error::InvalidConfig("path-loss factors must be nonzero".into()));
        }
        Ok(Self {
            thetas,
            betas,
            gamma,
            varphi,
            delta,
            irs_geom,
            bs_geom,
        })
    }

    pub fn num_users(&self) -> usize {
        self.thetas.len()
    }

    /// Smallest pairwise AOA gap in degrees (`+∞` for a single user).
    pub fn min_separation_deg(&self) -> f64 {
        min_pairwise_gap(&self.thetas)
    }

    /// `h_k = β_k · b(θ_k)` for the zero-based user index `k`.
    pub fn user_irs_channel(&self, k: usize) -> Result<CVector> {
        let (theta, beta) = self
            .thetas
            .get(k)
            .zip(self.betas.get(k))
            .ok_or(Error::IndexOutOfRange {
                index: k,
                count: self.num_users(),
            })?;
        Ok(steering_vector(&self.irs_geom, *theta) * *beta)
    }

    /// `Ḡ = δ · c(φ) · b(γ)ᵀ`, an M×I matrix of rank one.
    pub fn irs_bs_channel(&self) -> CMatrix {
        let c = steering_vector(&self.bs_geom, self.varphi);
        let b = steering_vector(&self.irs_geom, self.gamma);
        (c * b.transpose()) * self.delta
    }
}

pub(crate) fn min_pairwise_gap(angles: &[Angle]) -> f64 {
    let mut min = f64::INFINITY;
    for (i, a) in angles.iter().enumerate() {
        for b in &angles[i + 1..] {
            min = min.min(a.abs_diff_deg(*b));
        }
    }
    min
}

/// How path-loss factors are produced from link distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PathLossModel {
    /// Every factor equals 1.
    #[default]
    Unit,
    /// Amplitude `λ / (4π d)` with a uniformly random carrier phase.
    FreeSpace { wavelength_m: f64 },
}

impl PathLossModel {
    pub fn amplitude(&self, dist: f64) -> Result<f64> {
        if !(dist > 0.0) {
            return Err(Error::NonPositiveDistance(dist));
        }
        Ok(match *self {
            PathLossModel::Unit => 1.0,
            PathLossModel::FreeSpace { wavelength_m } => wavelength_m / (4.0 * PI * dist),
        })
    }

    /// Path loss with an explicit carrier phase (ignored by the unit model).
    pub fn with_phase(&self, dist: f64, phase: f64) -> Result<Complex64> {
        let amp = self.amplitude(dist)?;
        Ok(match self {
            PathLossModel::Unit => Complex64::new(1.0, 0.0),
            PathLossModel::FreeSpace { .. } => Complex64::from_polar(amp, phase),
        })
    }
}

/// Draws the path-loss factor for a link of length `dist`. Only the
/// free-space model consumes randomness.
pub fn path_loss(model: &PathLossModel, dist: f64, rng: &mut SimRng) -> Result<Complex64> {
    match model {
        PathLossModel::Unit => model.with_phase(dist, 0.0),
        PathLossModel::FreeSpace { .. } => {
            model.amplitude(dist)?;
            let phase = rng.random_range(0.0..2.0 * PI);
            model.with_phase(dist, phase)
        }
    }
}
