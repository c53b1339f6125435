//! Repetition-coded transmissions, the periodic IRS reflection schedule, and
//! the BS received signal.
//!
//! Time sample `n` (zero-based) belongs to block `n / L` and uses pattern
//! `n % L`; every user repeats one symbol for the whole block.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{CMatrix, ChannelRealization};
use crate::error::{Error, Result};
use crate::estimator::VirtualManifold;
use crate::geometry::{Angle, ArrayGeometry, CVector};
use crate::rng::SimRng;

const UNIT_MODULUS_TOL: f64 = 1e-12;

/// One draw of a circularly symmetric complex Gaussian with the given variance.
pub(crate) fn complex_gaussian(rng: &mut SimRng, variance: f64) -> Complex64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * scale, im * scale)
}

/// i.i.d. CN(0, 1) block messages, K rows by Q columns. Draws are made column
/// by column so a longer run shares its leading blocks with a shorter one.
pub fn generate_messages(num_users: usize, num_blocks: usize, rng: &mut SimRng) -> CMatrix {
    let mut m = DMatrix::zeros(num_users, num_blocks);
    for q in 0..num_blocks {
        for k in 0..num_users {
            m[(k, q)] = complex_gaussian(rng, 1.0);
        }
    }
    m
}

/// L reflection patterns of I unit-modulus coefficients with uniform phases.
pub fn generate_irs_patterns(num_elements: usize, num_patterns: usize, rng: &mut SimRng) -> Vec<CVector> {
    let mut patterns: Vec<CVector> = Vec::with_capacity(num_patterns);
    while patterns.len() < num_patterns {
        let p = CVector::from_fn(num_elements, |_, _| {
            Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI))
        });
        if !patterns.contains(&p) {
            patterns.push(p);
        }
    }
    patterns
}

/// Block structure, user symbols and powers, and the IRS pattern cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    block_len: usize,
    num_blocks: usize,
    symbols: CMatrix,
    powers: Vec<f64>,
    patterns: Vec<CVector>,
}

impl Schedule {
    pub fn new(
        block_len: usize,
        num_blocks: usize,
        symbols: CMatrix,
        powers: Vec<f64>,
        patterns: Vec<CVector>,
    ) -> Result<Self> {
        let k = symbols.nrows();
        if num_blocks == 0 || symbols.ncols() != num_blocks {
            return Err(Error::DimensionMismatch(format!(
                "symbol matrix has {} blocks, schedule expects {num_blocks}",
                symbols.ncols()
            )));
        }
        if powers.len() != k {
            return Err(Error::DimensionMismatch(format!("{} powers for {k} users", powers.len())));
        }
        if powers.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidConfig("transmit powers must be finite and non-negative".into()));
        }
        if block_len <= k {
            return Err(Error::TooFewSnapshotDims {
                snapshot_len: block_len,
                sources: k,
            });
        }
        if patterns.len() != block_len {
            return Err(Error::DimensionMismatch(format!(
                "{} patterns for block length {block_len}",
                patterns.len()
            )));
        }
        let i = patterns[0].len();
        for p in &patterns {
            if p.len() != i {
                return Err(Error::DimensionMismatch("patterns differ in length".into()));
            }
            if p.iter().any(|z| (z.norm() - 1.0).abs() > UNIT_MODULUS_TOL) {
                return Err(Error::InvalidConfig("IRS coefficients must have unit modulus".into()));
            }
        }
        for (a, pa) in patterns.iter().enumerate() {
            if patterns[a + 1..].contains(pa) {
                return Err(Error::InvalidConfig("IRS patterns within a block must differ".into()));
            }
        }
        Ok(Self {
            block_len,
            num_blocks,
            symbols,
            powers,
            patterns,
        })
    }

    /// Random schedule: CN(0,1) messages, random-phase patterns, equal unit powers.
    /// Patterns are drawn before messages from the same stream.
    pub fn random(
        num_users: usize,
        num_elements: usize,
        block_len: usize,
        num_blocks: usize,
        rng: &mut SimRng,
    ) -> Result<Self> {
        let patterns = generate_irs_patterns(num_elements, block_len, rng);
        let symbols = generate_messages(num_users, num_blocks, rng);
        Self::new(block_len, num_blocks, symbols, vec![1.0; num_users], patterns)
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    pub fn num_users(&self) -> usize {
        self.symbols.nrows()
    }

    pub fn num_samples(&self) -> usize {
        self.block_len * self.num_blocks
    }

    pub fn symbols(&self) -> &CMatrix {
        &self.symbols
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn patterns(&self) -> &[CVector] {
        &self.patterns
    }

    /// Symbol sent by user `k` at time sample `n`.
    pub fn symbol_at(&self, k: usize, n: usize) -> Complex64 {
        self.symbols[(k, n / self.block_len)]
    }

    /// IRS pattern applied at time sample `n`.
    pub fn pattern_at(&self, n: usize) -> &CVector {
        &self.patterns[n % self.block_len]
    }

    /// Full per-sample stream of user `k` (length QL).
    pub fn expanded_stream(&self, k: usize) -> Vec<Complex64> {
        (0..self.num_samples()).map(|n| self.symbol_at(k, n)).collect()
    }

    /// Per-sample pattern sequence over all QL samples.
    pub fn sample_patterns(&self) -> Vec<CVector> {
        (0..self.num_samples()).map(|n| self.pattern_at(n).clone()).collect()
    }

    /// Same schedule with every power replaced.
    pub fn with_powers(mut self, powers: Vec<f64>) -> Result<Self> {
        if powers.len() != self.num_users() {
            return Err(Error::DimensionMismatch("power count differs from user count".into()));
        }
        if powers.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidConfig(format!("powers must be finite and non-negative, got {powers:?}")));
        }
        self.powers = powers;
        Ok(self)
    }
}

/// Received signal of all M BS antennas for each of the QL samples:
/// `y⁽ⁿ⁾ = Ḡ·diag(φ⁽ⁿ⁾)·Σₖ hₖ √pₖ sₖ⁽ⁿ⁾ + z⁽ⁿ⁾`.
pub fn synthesize_bs_signal(
    real: &ChannelRealization,
    sched: &Schedule,
    noise_power: f64,
    rng: &mut SimRng,
) -> Result<Vec<CVector>> {
    let i = real.irs_geom.num_elements();
    if sched.patterns[0].len() != i {
        return Err(Error::DimensionMismatch(format!(
            "schedule patterns have {} entries, IRS has {i} elements",
            sched.patterns[0].len()
        )));
    }
    if sched.num_users() != real.num_users() {
        return Err(Error::DimensionMismatch(format!(
            "schedule has {} users, channel has {}",
            sched.num_users(),
            real.num_users()
        )));
    }
    if !(noise_power >= 0.0 && noise_power.is_finite()) {
        return Err(Error::InvalidConfig(format!("noise power must be non-negative, got {noise_power}")));
    }

    let g = real.irs_bs_channel();
    let weighted: Vec<CVector> = (0..real.num_users())
        .map(|k| real.user_irs_channel(k).map(|h| h * Complex64::from(sched.powers[k].sqrt())))
        .collect::<Result<_>>()?;
    let m = real.bs_geom.num_elements();

    let mut out = Vec::with_capacity(sched.num_samples());
    for q in 0..sched.num_blocks {
        // Σₖ hₖ √pₖ s̃ₖ⁽ᑫ⁾ is constant across the block.
        let mut incident = CVector::zeros(i);
        for (k, h) in weighted.iter().enumerate() {
            incident.axpy(sched.symbols[(k, q)], h, Complex64::from(1.0));
        }
        for l in 0..sched.block_len {
            let reflected = incident.component_mul(&sched.patterns[l]);
            let mut y = &g * reflected;
            for v in y.iter_mut() {
                *v += complex_gaussian(rng, noise_power);
            }
            debug_assert_eq!(y.len(), m);
            out.push(y);
        }
    }
    Ok(out)
}

/// What the estimator knows besides the received samples.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMetadata {
    pub gamma: Angle,
    pub irs_geom: ArrayGeometry,
    pub noise_power: f64,
    /// Zero-based BS antenna whose samples form the snapshots.
    pub antenna: usize,
}

/// The Q temporal-domain snapshots `ỹ⁽ᑫ⁾ ∈ ℂᴸ` plus the estimator-side knowns.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockObservations {
    pub snapshots: Vec<CVector>,
    pub gamma: Angle,
    pub patterns: Vec<CVector>,
    pub irs_geom: ArrayGeometry,
    pub noise_power: f64,
}

impl BlockObservations {
    pub fn new(
        snapshots: Vec<CVector>,
        gamma: Angle,
        patterns: Vec<CVector>,
        irs_geom: ArrayGeometry,
        noise_power: f64,
    ) -> Result<Self> {
        let l = patterns.len();
        if let Some(s) = snapshots.iter().find(|s| s.len() != l) {
            return Err(Error::DimensionMismatch(format!(
                "snapshot of length {} with {l} patterns",
                s.len()
            )));
        }
        Ok(Self {
            snapshots,
            gamma,
            patterns,
            irs_geom,
            noise_power,
        })
    }

    pub fn num_blocks(&self) -> usize {
        self.snapshots.len()
    }

    pub fn block_len(&self) -> usize {
        self.patterns.len()
    }

    pub fn manifold(&self) -> Result<VirtualManifold> {
        VirtualManifold::new(self.gamma, &self.patterns, self.irs_geom)
    }

    /// Writes `block,sample,real,imag` rows (zero-based indices).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let wrap = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(wrap)?;
        w.write_record(["block", "sample", "real", "imag"]).map_err(wrap)?;
        for (q, snap) in self.snapshots.iter().enumerate() {
            for (l, z) in snap.iter().enumerate() {
                w.write_record(&[q.to_string(), l.to_string(), z.re.to_string(), z.im.to_string()])
                    .map_err(wrap)?;
            }
        }
        w.flush().map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Splits one antenna's sample stream into length-L snapshots.
pub fn extract_blocks(stream: &[CVector], sched: &Schedule, meta: &BlockMetadata) -> Result<BlockObservations> {
    let l = sched.block_len();
    if stream.len() % l != 0 {
        return Err(Error::StreamLength {
            len: stream.len(),
            block_len: l,
        });
    }
    if let Some(y) = stream.iter().find(|y| y.len() <= meta.antenna) {
        return Err(Error::DimensionMismatch(format!(
            "antenna index {} but sample has {} antennas",
            meta.antenna,
            y.len()
        )));
    }
    let snapshots = stream
        .chunks_exact(l)
        .map(|block| CVector::from_iterator(l, block.iter().map(|y| y[meta.antenna])))
        .collect();
    BlockObservations::new(
        snapshots,
        meta.gamma,
        sched.patterns().to_vec(),
        meta.irs_geom,
        meta.noise_power,
    )
}

/// Mean signal power per snapshot element, `E‖Ā x̃‖² / L`, for i.i.d. unit-power
/// messages: `Σₖ pₖ |δ βₖ|² ‖ā(θₖ)‖² / L`.
pub fn mean_signal_power(real: &ChannelRealization, sched: &Schedule) -> Result<f64> {
    let manifold = VirtualManifold::new(real.gamma, sched.patterns(), real.irs_geom)?;
    if sched.num_users() != real.num_users() {
        return Err(Error::DimensionMismatch("schedule and channel user counts differ".into()));
    }
    let total: f64 = real
        .thetas
        .iter()
        .zip(&real.betas)
        .zip(sched.powers())
        .map(|((&theta, beta), &p)| p * (real.delta * beta).norm_sqr() * manifold.steering(theta).norm_squared())
        .sum();
    Ok(total / sched.block_len() as f64)
}

/// Noise power σ² giving the requested per-snapshot-element SNR. `+∞` dB maps to 0.
pub fn snr_to_noise_power(snr_db: f64, real: &ChannelRealization, sched: &Schedule) -> Result<f64> {
    let signal = mean_signal_power(real, sched)?;
    if !(signal > 0.0) {
        return Err(Error::ZeroSignalPower);
    }
    if snr_db.is_nan() {
        return Err(Error::InvalidConfig("SNR is NaN".into()));
    }
    Ok(signal / 10f64.powf(snr_db / 10.0))
}
