use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::channel::CMatrix;
use crate::error::{Error, Result};
use crate::geometry::CVector;
use crate::synthesis::BlockObservations;

/// `S = (1/Q) Σ_q ỹ⁽ᑫ⁾ ỹ⁽ᑫ⁾ᴴ`, exactly Hermitian.
pub fn sample_covariance(obs: &BlockObservations) -> Result<CMatrix> {
    covariance_from_snapshots(&obs.snapshots)
}

/// As [`sample_covariance`] on bare snapshots, which must share one length.
pub fn covariance_from_snapshots(snapshots: &[CVector]) -> Result<CMatrix> {
    let q = snapshots.len();
    if q == 0 {
        return Err(Error::EmptyObservations);
    }
    let l = snapshots[0].len();
    if snapshots.iter().any(|y| y.len() != l) {
        return Err(Error::DimensionMismatch("snapshots differ in length".into()));
    }
    let mut s = CMatrix::zeros(l, l);
    for y in snapshots {
        s.ger(Complex64::from(1.0), y, &y.conjugate(), Complex64::from(1.0));
    }
    s /= Complex64::from(q as f64);
    // mirror the upper triangle so S == Sᴴ bit for bit
    for c in 0..l {
        s[(c, c)].im = 0.0;
        for r in c + 1..l {
            s[(r, c)] = s[(c, r)].conj();
        }
    }
    Ok(s)
}

/// Eigenpairs of a Hermitian matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Column j pairs with `values[j]`.
    pub vectors: CMatrix,
}

pub fn hermitian_eigen(s: &CMatrix) -> HermitianEigen {
    let eig = SymmetricEigen::new(s.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let cols: Vec<_> = order.iter().map(|&j| eig.eigenvectors.column(j).into_owned()).collect();
    HermitianEigen {
        values,
        vectors: CMatrix::from_columns(&cols),
    }
}

/// Orthonormal basis of the noise subspace and the full sorted spectrum of S.
#[derive(Debug, Clone)]
pub struct NoiseSubspace {
    /// L×(L−K), eigenvectors of the L−K smallest eigenvalues.
    pub basis: CMatrix,
    pub eigenvalues: Vec<f64>,
}

pub fn noise_subspace(s: &CMatrix, num_sources: usize) -> Result<NoiseSubspace> {
    let l = s.nrows();
    if s.ncols() != l {
        return Err(Error::DimensionMismatch(format!("covariance is {}×{}", l, s.ncols())));
    }
    if l <= num_sources {
        return Err(Error::TooFewSnapshotDims {
            snapshot_len: l,
            sources: num_sources,
        });
    }
    let eig = hermitian_eigen(s);
    Ok(NoiseSubspace {
        basis: eig.vectors.columns(num_sources, l - num_sources).into_owned(),
        eigenvalues: eig.values,
    })
}
