use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channel::CMatrix;
use crate::error::{Error, Result};
use crate::geometry::{steering_vector, Angle, ArrayGeometry, CVector};

/// The L-dimensional temporal-domain array response created by cycling the
/// IRS through L reflection patterns within each block.
///
/// Row `l` of the pattern matrix is `φ̄⁽ˡ⁾ᵀ`, so `ā(θ) = Φ · (b(γ) ⊙ b(θ))`.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualManifold {
    gamma: Angle,
    irs_geom: ArrayGeometry,
    patterns: CMatrix,
    b_gamma: CVector,
    /// `Φ · diag(b(γ))` stored element-major: entries `n·L .. (n+1)·L` are
    /// the coefficients of `zⁿ`, `z = exp(-j2πd·cos θ)`, for every row.
    weights: Vec<Complex64>,
}

impl VirtualManifold {
    pub fn new(gamma: Angle, patterns: &[CVector], irs_geom: ArrayGeometry) -> Result<Self> {
        if patterns.is_empty() {
            return Err(Error::DimensionMismatch("manifold needs at least one pattern".into()));
        }
        let i = irs_geom.num_elements();
        if let Some(bad) = patterns.iter().find(|p| p.len() != i) {
            return Err(Error::DimensionMismatch(format!(
                "pattern length {} does not match {} IRS elements",
                bad.len(),
                i
            )));
        }
        let patterns = DMatrix::from_fn(patterns.len(), i, |l, n| patterns[l][n]);
        let b_gamma = steering_vector(&irs_geom, gamma);
        let weights = (0..i)
            .flat_map(|n| (0..patterns.nrows()).map(move |l| (l, n)))
            .map(|(l, n)| patterns[(l, n)] * b_gamma[n])
            .collect();
        Ok(Self {
            gamma,
            irs_geom,
            patterns,
            b_gamma,
            weights,
        })
    }

    /// Snapshot dimension L.
    pub fn num_samples(&self) -> usize {
        self.patterns.nrows()
    }

    pub fn gamma(&self) -> Angle {
        self.gamma
    }

    pub fn irs_geom(&self) -> &ArrayGeometry {
        &self.irs_geom
    }

    pub fn pattern_matrix(&self) -> &CMatrix {
        &self.patterns
    }

    pub fn pattern(&self, l: usize) -> CVector {
        self.patterns.row(l).transpose()
    }

    /// `ā(θ) = Φ · (b(γ) ⊙ b(θ))`, each row evaluated by Horner's rule.
    pub fn steering(&self, theta: Angle) -> CVector {
        let z = Complex64::from_polar(1.0, -2.0 * PI * self.irs_geom.spacing_wavelengths() * theta.cos());
        let mut acc = vec![Complex64::new(0.0, 0.0); self.num_samples()];
        for coeffs in self.weights.chunks_exact(acc.len()).rev() {
            for (a, &w) in acc.iter_mut().zip(coeffs) {
                *a = *a * z + w;
            }
        }
        CVector::from_vec(acc)
    }

    /// `ā(θ)` evaluated row by row as `b(γ)ᵀ · diag(φ̄⁽ˡ⁾) · b(θ)`.
    pub fn steering_rowwise(&self, theta: Angle) -> CVector {
        let b_theta = steering_vector(&self.irs_geom, theta);
        CVector::from_iterator(
            self.num_samples(),
            (0..self.num_samples()).map(|l| {
                let mut acc = Complex64::new(0.0, 0.0);
                for n in 0..self.irs_geom.num_elements() {
                    acc += self.b_gamma[n] * self.patterns[(l, n)] * b_theta[n];
                }
                acc
            }),
        )
    }

    /// `Ā(θ) = [ā(θ₁), …, ā(θ_K)]`, an L×K matrix.
    pub fn matrix(&self, thetas: &[Angle]) -> CMatrix {
        let cols: Vec<CVector> = thetas.iter().map(|&t| self.steering(t)).collect();
        CMatrix::from_columns(&cols)
    }
}
