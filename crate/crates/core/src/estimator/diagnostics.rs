use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::manifold::VirtualManifold;
use crate::channel::CMatrix;
use crate::geometry::{Angle, CVector};

/// Relative singular-value threshold used for every rank decision.
pub const RANK_TOL: f64 = 1e-8;

/// Number of singular values above `rel_tol · σ_max`.
pub fn numerical_rank(m: &CMatrix, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Whether the virtual system meets the three MUSIC prerequisites.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub snapshot_len: usize,
    pub num_sources: usize,
    /// L > K.
    pub enough_dimensions: bool,
    /// Numerical rank of `Ā · diag(source powers) · Āᴴ`.
    pub signal_rank: usize,
    /// `signal_rank == K`.
    pub full_rank: bool,
    /// The applied pattern sequence repeats with period L.
    pub time_invariant: bool,
}

impl ConditionReport {
    pub fn all_satisfied(&self) -> bool {
        self.enough_dimensions && self.full_rank && self.time_invariant
    }
}

/// Checks L > K, the rank of the signal covariance, and (when the per-sample
/// pattern sequence is supplied) that the sequence matches the manifold's
/// patterns in every block.
///
/// `source_powers[k]` is `p_k |δ β_k|²`.
pub fn condition_diagnostics(
    manifold: &VirtualManifold,
    thetas: &[Angle],
    source_powers: &[f64],
    sample_patterns: Option<&[CVector]>,
) -> ConditionReport {
    let l = manifold.num_samples();
    let k = thetas.len();
    let a = manifold.matrix(thetas);
    let d = CMatrix::from_diagonal(&CVector::from_iterator(
        k,
        source_powers.iter().map(|&p| Complex64::from(p)),
    ));
    let signal = &a * d * a.adjoint();
    let signal_rank = numerical_rank(&signal, RANK_TOL);

    let time_invariant = match sample_patterns {
        None => true,
        Some(seq) => seq
            .iter()
            .enumerate()
            .all(|(n, p)| *p == manifold.pattern(n % l)),
    };

    ConditionReport {
        snapshot_len: l,
        num_sources: k,
        enough_dimensions: l > k,
        signal_rank,
        full_rank: signal_rank == k,
        time_invariant,
    }
}
