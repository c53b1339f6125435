use nalgebra::Cholesky;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

use super::manifold::VirtualManifold;
use super::peaks::{local_maxima, rank_by_value};
use crate::channel::CMatrix;
use crate::error::{Error, Result};
use crate::geometry::{Angle, CVector};

/// Ratio below which a MUSIC denominator is treated as zero.
pub const MUSIC_FLOOR: f64 = 1e-15;
/// Default Capon diagonal loading as a fraction of the mean eigenvalue of S.
pub const CAPON_LOADING_FRACTION: f64 = 1e-6;
/// Coarse peaks carried into refinement, per requested source.
const CANDIDATES_PER_SOURCE: usize = 3;

/// Two-stage angle search: a uniform coarse grid over `[0°, 180°)`, then
/// `refine_stages` passes that each shrink the step by `refine_factor` around
/// every candidate peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub coarse_step_deg: f64,
    pub refine_factor: usize,
    pub refine_stages: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            coarse_step_deg: 0.1,
            refine_factor: 10,
            refine_stages: 2,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.coarse_step_deg > 0.0 && self.coarse_step_deg <= 180.0) {
            return Err(Error::InvalidConfig(format!(
                "coarse step must lie in (0, 180], got {}",
                self.coarse_step_deg
            )));
        }
        if self.refine_stages > 0 && self.refine_factor < 2 {
            return Err(Error::InvalidConfig("refine factor must be at least 2".into()));
        }
        Ok(())
    }

    pub fn coarse_grid(&self) -> Result<Vec<Angle>> {
        self.validate()?;
        let n = (180.0 / self.coarse_step_deg - 1e-9).ceil() as usize;
        Ok((0..n)
            .map(|i| Angle::from_degrees(i as f64 * self.coarse_step_deg))
            .collect())
    }

    /// Resolution after the last refinement stage.
    pub fn final_step_deg(&self) -> f64 {
        self.coarse_step_deg / (self.refine_factor.max(1) as f64).powi(self.refine_stages as i32)
    }
}

/// A pseudo-spectrum evaluated on virtual steering vectors.
pub trait SpectrumFunctional: Sync {
    fn eval(&self, a: &CVector) -> f64;
}

/// `P(θ) = āᴴā / (āᴴ Ū Ūᴴ ā)`.
pub struct MusicFunctional<'a> {
    pub noise_basis: &'a CMatrix,
}

impl SpectrumFunctional for MusicFunctional<'_> {
    fn eval(&self, a: &CVector) -> f64 {
        let num = a.norm_squared();
        if num == 0.0 {
            return 0.0;
        }
        let den = (self.noise_basis.adjoint() * a).norm_squared();
        num / den.max(MUSIC_FLOOR * num)
    }
}

/// `P(θ) = 1 / (āᴴ R⁻¹ ā)` with `R⁻¹` precomputed.
pub struct CaponFunctional {
    inverse: CMatrix,
}

impl CaponFunctional {
    /// Inverts `S + εI`; fails when the loaded matrix is not positive definite.
    pub fn new(s: &CMatrix, loading: f64) -> Result<Self> {
        if !(loading >= 0.0 && loading.is_finite()) {
            return Err(Error::InvalidConfig(format!("diagonal loading must be ≥ 0, got {loading}")));
        }
        let l = s.nrows();
        let loaded = s + CMatrix::identity(l, l) * Complex64::from(loading);
        let chol = Cholesky::new(loaded).ok_or(Error::SingularCovariance)?;
        let inverse = chol.inverse();
        if inverse.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::SingularCovariance);
        }
        Ok(Self { inverse })
    }
}

impl SpectrumFunctional for CaponFunctional {
    fn eval(&self, a: &CVector) -> f64 {
        let q = a.dotc(&(&self.inverse * a)).re;
        1.0 / q.max(f64::MIN_POSITIVE)
    }
}

/// Default loading `1e-6 · trace(S) / L`.
pub fn default_capon_loading(s: &CMatrix) -> f64 {
    CAPON_LOADING_FRACTION * s.trace().re / s.nrows() as f64
}

/// Virtual steering vectors for a whole grid, one column per angle.
#[derive(Debug, Clone)]
pub struct SteeringTable {
    pub grid: Vec<Angle>,
    pub columns: CMatrix,
}

impl SteeringTable {
    pub fn new(manifold: &VirtualManifold, grid: Vec<Angle>) -> Self {
        let cols: Vec<CVector> = grid.par_iter().map(|&t| manifold.steering(t)).collect();
        let columns = if cols.is_empty() {
            CMatrix::zeros(manifold.num_samples(), 0)
        } else {
            CMatrix::from_columns(&cols)
        };
        Self { grid, columns }
    }

    pub fn evaluate(&self, f: &dyn SpectrumFunctional) -> Vec<f64> {
        (0..self.grid.len())
            .into_par_iter()
            .map(|g| f.eval(&self.columns.column(g).into_owned()))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub angle: Angle,
    pub value: f64,
}

/// A pseudo-spectrum on the coarse grid plus its refined peaks.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub grid: Vec<Angle>,
    pub values: Vec<f64>,
    /// Best first; at most K entries.
    pub peaks: Vec<Peak>,
    pub underdetected: bool,
}

impl SpectrumResult {
    /// `P(θ) / max P`.
    pub fn normalized(&self) -> Vec<f64> {
        let max = self.values.iter().cloned().fold(0.0, f64::max);
        if max > 0.0 {
            self.values.iter().map(|v| v / max).collect()
        } else {
            self.values.clone()
        }
    }

    /// Two-column CSV: `angle_deg,normalized_power`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let wrap = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(wrap)?;
        w.write_record(["angle_deg", "normalized_power"]).map_err(wrap)?;
        for (a, p) in self.grid.iter().zip(self.normalized()) {
            w.write_record(&[format!("{:.4}", a.degrees()), p.to_string()])
                .map_err(wrap)?;
        }
        w.flush().map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Hill-climbs from `start` on successively finer local grids. The starting
/// point is always re-scored, so the result never drops below `start_value`.
fn refine_peak(
    manifold: &VirtualManifold,
    f: &dyn SpectrumFunctional,
    start: Angle,
    start_value: f64,
    spec: &GridSpec,
) -> Peak {
    let mut best = Peak {
        angle: start,
        value: start_value,
    };
    let mut step = spec.coarse_step_deg;
    let half = spec.refine_factor as i64;
    for _ in 0..spec.refine_stages {
        step /= spec.refine_factor as f64;
        let center = best.angle.degrees();
        for j in -half..=half {
            if j == 0 {
                continue;
            }
            let deg = center + j as f64 * step;
            if !(0.0..=180.0).contains(&deg) {
                continue;
            }
            let angle = Angle::from_degrees(deg);
            let value = f.eval(&manifold.steering(angle));
            if value > best.value || (value == best.value && angle.degrees() < best.angle.degrees()) {
                best = Peak { angle, value };
            }
        }
    }
    best
}

/// Picks the `k` strongest spectrum peaks and refines each one.
pub fn search_peaks(
    manifold: &VirtualManifold,
    f: &dyn SpectrumFunctional,
    grid: &[Angle],
    values: &[f64],
    k: usize,
    spec: &GridSpec,
) -> (Vec<Peak>, bool) {
    let mut idx = local_maxima(values);
    rank_by_value(values, &mut idx);
    idx.truncate(CANDIDATES_PER_SOURCE * k.max(1));

    let mut refined: Vec<Peak> = idx
        .iter()
        .map(|&i| refine_peak(manifold, f, grid[i], values[i], spec))
        .collect();
    refined.sort_by(|a, b| {
        b.value
            .total_cmp(&a.value)
            .then(a.angle.degrees().total_cmp(&b.angle.degrees()))
    });

    let mut peaks: Vec<Peak> = Vec::with_capacity(k);
    for p in refined {
        if peaks.len() == k {
            break;
        }
        // two coarse maxima that climbed onto the same summit
        if peaks
            .iter()
            .any(|q| q.angle.abs_diff_deg(p.angle) < spec.coarse_step_deg)
        {
            continue;
        }
        peaks.push(p);
    }
    let underdetected = peaks.len() < k;
    (peaks, underdetected)
}

fn spectrum_from_table(
    manifold: &VirtualManifold,
    f: &dyn SpectrumFunctional,
    table: &SteeringTable,
    k: usize,
    spec: &GridSpec,
) -> SpectrumResult {
    let values = table.evaluate(f);
    let (peaks, underdetected) = search_peaks(manifold, f, &table.grid, &values, k, spec);
    SpectrumResult {
        grid: table.grid.clone(),
        values,
        peaks,
        underdetected,
    }
}

pub(crate) fn music_from_table(
    manifold: &VirtualManifold,
    noise_basis: &CMatrix,
    table: &SteeringTable,
    spec: &GridSpec,
) -> Result<SpectrumResult> {
    let l = manifold.num_samples();
    if noise_basis.nrows() != l {
        return Err(Error::DimensionMismatch(format!(
            "noise basis has {} rows, manifold has L = {l}",
            noise_basis.nrows()
        )));
    }
    if noise_basis.ncols() == 0 {
        return Err(Error::TooFewSnapshotDims {
            snapshot_len: l,
            sources: l,
        });
    }
    let k = l - noise_basis.ncols();
    let f = MusicFunctional { noise_basis };
    Ok(spectrum_from_table(manifold, &f, table, k, spec))
}

pub(crate) fn capon_from_table(
    manifold: &VirtualManifold,
    s: &CMatrix,
    loading: Option<f64>,
    num_sources: usize,
    table: &SteeringTable,
    spec: &GridSpec,
) -> Result<SpectrumResult> {
    if s.nrows() != manifold.num_samples() || s.ncols() != manifold.num_samples() {
        return Err(Error::DimensionMismatch(format!(
            "covariance is {}×{}, manifold has L = {}",
            s.nrows(),
            s.ncols(),
            manifold.num_samples()
        )));
    }
    let eps = loading.unwrap_or_else(|| default_capon_loading(s));
    let f = CaponFunctional::new(s, eps)?;
    Ok(spectrum_from_table(manifold, &f, table, num_sources, spec))
}

/// MUSIC pseudo-spectrum over the coarse grid with refined peaks. The number
/// of sources is `L − noise_basis.ncols()`.
pub fn music_spectrum(manifold: &VirtualManifold, noise_basis: &CMatrix, spec: &GridSpec) -> Result<SpectrumResult> {
    let table = SteeringTable::new(manifold, spec.coarse_grid()?);
    music_from_table(manifold, noise_basis, &table, spec)
}

/// Capon spectrum `1 / (āᴴ (S + εI)⁻¹ ā)`; `loading = None` uses
/// [`default_capon_loading`].
pub fn capon_spectrum(
    manifold: &VirtualManifold,
    s: &CMatrix,
    spec: &GridSpec,
    loading: Option<f64>,
    num_sources: usize,
) -> Result<SpectrumResult> {
    let table = SteeringTable::new(manifold, spec.coarse_grid()?);
    capon_from_table(manifold, s, loading, num_sources, &table, spec)
}
