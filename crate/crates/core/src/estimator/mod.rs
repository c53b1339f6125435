//! Temporal-domain MUSIC and the Capon baseline.
//!
//! Pipeline: sample covariance → eigendecomposition → pseudo-spectrum on the
//! coarse grid → peak selection with local refinement.

mod covariance;
mod diagnostics;
mod manifold;
mod peaks;
mod spectrum;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Angle;
use crate::synthesis::BlockObservations;

pub use covariance::{covariance_from_snapshots, hermitian_eigen, noise_subspace, sample_covariance, HermitianEigen, NoiseSubspace};
pub use diagnostics::{condition_diagnostics, numerical_rank, ConditionReport, RANK_TOL};
pub use manifold::VirtualManifold;
pub use peaks::{find_peaks, local_maxima, PeakPick};
pub use spectrum::{
    capon_spectrum, default_capon_loading, music_spectrum, search_peaks, CaponFunctional, GridSpec,
    MusicFunctional, Peak, SpectrumFunctional, SpectrumResult, SteeringTable, CAPON_LOADING_FRACTION,
    MUSIC_FLOOR,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Music,
    Capon,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Music => "music",
            Method::Capon => "capon",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "music" => Ok(Method::Music),
            "capon" | "mvdr" => Ok(Method::Capon),
            other => Err(Error::InvalidConfig(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub method: Method,
    /// Best peak first.
    pub estimates: Vec<Angle>,
    pub spectrum: SpectrumResult,
    /// Eigenvalues of S, descending.
    pub eigenvalues: Vec<f64>,
    pub underdetected: bool,
}

/// Runs the full estimator on one set of block snapshots.
pub fn estimate_aoas(obs: &BlockObservations, num_sources: usize, method: Method, spec: &GridSpec) -> Result<EstimationResult> {
    let manifold = obs.manifold()?;
    let table = SteeringTable::new(&manifold, spec.coarse_grid()?);
    estimate_with_table(obs, &manifold, &table, num_sources, method, spec)
}

/// As [`estimate_aoas`] with the manifold and its grid table supplied, so
/// several methods can share one table.
pub fn estimate_with_table(
    obs: &BlockObservations,
    manifold: &VirtualManifold,
    table: &SteeringTable,
    num_sources: usize,
    method: Method,
    spec: &GridSpec,
) -> Result<EstimationResult> {
    let s = sample_covariance(obs)?;
    let (spectrum, eigenvalues) = match method {
        Method::Music => {
            let ns = noise_subspace(&s, num_sources)?;
            (spectrum::music_from_table(manifold, &ns.basis, table, spec)?, ns.eigenvalues)
        }
        Method::Capon => {
            let eig = hermitian_eigen(&s);
            (
                spectrum::capon_from_table(manifold, &s, None, num_sources, table, spec)?,
                eig.values,
            )
        }
    };
    Ok(EstimationResult {
        method,
        estimates: spectrum.peaks.iter().map(|p| p.angle).collect(),
        underdetected: spectrum.underdetected,
        spectrum,
        eigenvalues,
    })
}
