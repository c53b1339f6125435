#![allow(dead_code)]

use irs_music::channel::{CMatrix, ChannelRealization};
use irs_music::estimator::hermitian_eigen;
use irs_music::geometry::{Angle, ArrayGeometry};
use irs_music::rng::{self, SimRng};
use irs_music::synthesis::{extract_blocks, synthesize_bs_signal, BlockMetadata, BlockObservations, Schedule};
use num_complex::Complex64;

pub const THREE_USER_AOAS: [f64; 3] = [72.9078, 34.0409, 19.3314];

pub fn deg(d: f64) -> Angle {
    Angle::from_degrees(d)
}

/// Unit path loss, half-wavelength arrays, BS/IRS angles from the default layout.
pub fn realization(thetas_deg: &[f64], irs_elements: usize, bs_antennas: usize) -> ChannelRealization {
    ChannelRealization::new(
        thetas_deg.iter().map(|&d| deg(d)).collect(),
        vec![Complex64::new(1.0, 0.0); thetas_deg.len()],
        deg(135.0),
        deg(315.0),
        Complex64::new(1.0, 0.0),
        ArrayGeometry::half_wavelength(irs_elements).unwrap(),
        ArrayGeometry::half_wavelength(bs_antennas).unwrap(),
    )
    .unwrap()
}

/// Random schedule, synthesis at `noise_power`, antenna-0 block snapshots.
pub fn observe(
    real: &ChannelRealization,
    block_len: usize,
    num_blocks: usize,
    noise_power: f64,
    rng: &mut SimRng,
) -> (Schedule, BlockObservations) {
    let sched = Schedule::random(
        real.num_users(),
        real.irs_geom.num_elements(),
        block_len,
        num_blocks,
        rng,
    )
    .unwrap();
    let stream = synthesize_bs_signal(real, &sched, noise_power, rng).unwrap();
    let meta = BlockMetadata {
        gamma: real.gamma,
        irs_geom: real.irs_geom,
        noise_power,
        antenna: 0,
    };
    let obs = extract_blocks(&stream, &sched, &meta).unwrap();
    (sched, obs)
}

pub fn seeded(seed: u64) -> SimRng {
    rng::from_seed(seed)
}

/// Exact Hermitian symmetry and eigenvalues ≥ −1e-10·max(1, λ_max).
pub fn assert_hermitian_psd(s: &CMatrix) {
    assert_eq!(s.nrows(), s.ncols());
    for r in 0..s.nrows() {
        for c in 0..s.ncols() {
            assert_eq!(s[(r, c)], s[(c, r)].conj(), "S not Hermitian at ({r},{c})");
        }
    }
    let vals = hermitian_eigen(s).values;
    let floor = -1e-10 * vals[0].abs().max(1.0);
    assert!(vals.iter().all(|&v| v >= floor), "S not PSD: {vals:?}");
}
