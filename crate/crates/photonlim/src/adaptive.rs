//! Exact evaluation of the adaptive Dolinar receiver over coded sequences.
//!
//! The receiver measures the n modes of a codeword one at a time. Before
//! mode j it sets the single-mode measurement prior to the posterior
//! marginal probability that bit j is one, given the outcomes observed so
//! far; the fixed variant always uses 1/2. Because that prior depends only
//! on the outcome prefix, the joint distribution over (codeword, outcome
//! string) is computed exactly by walking the binary outcome tree once and
//! carrying per-codeword path likelihoods.

use crate::channel::{outcome_probabilities, ChannelError};
use crate::code::LinearCode;
use crate::numerics::Bits;
use thiserror::Error;

/// Cap on 2^(n+k), the joint table size (codewords x outcome strings).
pub const MAX_JOINT_CELLS: usize = 1 << 22;

#[derive(Debug, Error, PartialEq)]
pub enum AdaptiveError {
    #[error("mean photon number must be positive, got {0}")]
    NonPositiveEnergy(f64),
    #[error("joint table of {0} cells exceeds the cap of {MAX_JOINT_CELLS}")]
    EnumerationTooLarge(usize),
    #[error("mode index {0} outside 1..={1}")]
    ModeOutOfRange(usize, usize),
    #[error("observed outcome has zero likelihood under every codeword")]
    DegenerateEvidence,
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Whether the per-mode prior follows the posterior or stays at 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiverMode {
    Adaptive,
    Fixed,
}

impl ReceiverMode {
    pub fn label(self) -> &'static str {
        match self {
            ReceiverMode::Adaptive => "adaptive",
            ReceiverMode::Fixed => "fixed",
        }
    }
}

/// Posterior weights over the codewords after some outcome prefix, together
/// with the index of the next mode to be measured (1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorState {
    weights: Vec<f64>,
    next_mode: usize,
}

impl PosteriorState {
    /// Uniform prior over the codewords, about to measure mode 1.
    pub fn uniform(code: &LinearCode) -> Self {
        let m = code.codewords().len();
        Self { weights: vec![1.0 / m as f64; m], next_mode: 1 }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn next_mode(&self) -> usize {
        self.next_mode
    }
}

/// Posterior marginal probability that the bit of the next mode is one.
pub fn next_xi(state: &PosteriorState, code: &LinearCode) -> Result<f64, AdaptiveError> {
    let j = state.next_mode;
    if j == 0 || j > code.block_length() {
        return Err(AdaptiveError::ModeOutOfRange(j, code.block_length()));
    }
    Ok(code
        .codewords()
        .iter()
        .zip(&state.weights)
        .filter(|(&w, _)| LinearCode::mode_bit(w, j) == 1)
        .map(|(_, &g)| g)
        .sum())
}

/// Bayes update of the posterior after observing outcome `y` on the next
/// mode, with `likelihood[x][y]` the per-mode outcome probabilities.
pub fn update_posterior(
    state: &PosteriorState,
    y: u8,
    likelihood: &[[f64; 2]; 2],
    code: &LinearCode,
) -> Result<PosteriorState, AdaptiveError> {
    let j = state.next_mode;
    if j == 0 || j > code.block_length() {
        return Err(AdaptiveError::ModeOutOfRange(j, code.block_length()));
    }
    let mut weights: Vec<f64> = code
        .codewords()
        .iter()
        .zip(&state.weights)
        .map(|(&w, &g)| g * likelihood[LinearCode::mode_bit(w, j) as usize][y as usize])
        .collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(AdaptiveError::DegenerateEvidence);
    }
    for g in &mut weights {
        *g /= total;
    }
    Ok(PosteriorState { weights, next_mode: j + 1 })
}

/// Exact joint distribution over (codeword, outcome string).
#[derive(Debug, Clone)]
pub struct AdaptiveRunResult {
    /// `joint[l][y]` = P(X = codeword l, Y = outcome string y).
    joint: Vec<Vec<f64>>,
    energy: f64,
    mode: ReceiverMode,
}

impl AdaptiveRunResult {
    pub fn joint(&self) -> &[Vec<f64>] {
        &self.joint
    }

    /// Mean photons per mode used for photon-efficiency accounting.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn mode(&self) -> ReceiverMode {
        self.mode
    }
}

/// Metrics of one exact run, per Figs. of the receiver's tradeoff:
/// mutual information, raw per-mode error probabilities, and the two
/// efficiencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub mutual_information: Bits,
    /// `bit_error[j-1]` = P(Y_j != X_j), no decoding applied.
    pub bit_error: Vec<f64>,
    pub die: f64,
    pub pie: f64,
}

/// Runs the receiver on BPSK-modulated modes carrying `energy` photons
/// each, so the state overlap is e^{-4 energy}.
pub fn run_exact_bpsk(
    code: &LinearCode,
    energy: f64,
    mode: ReceiverMode,
) -> Result<AdaptiveRunResult, AdaptiveError> {
    if !(energy > 0.0) || !energy.is_finite() {
        return Err(AdaptiveError::NonPositiveEnergy(energy));
    }
    run_exact_with_channel(code, (-4.0 * energy).exp(), energy, mode)
}

/// General form for any binary pure-state constellation: `overlap` is the
/// squared inner product of the two states and `energy_per_mode` the mean
/// photon number per mode (prior-weighted for unequal-energy states).
pub fn run_exact_with_channel(
    code: &LinearCode,
    overlap: f64,
    energy_per_mode: f64,
    mode: ReceiverMode,
) -> Result<AdaptiveRunResult, AdaptiveError> {
    if !(energy_per_mode > 0.0) || !energy_per_mode.is_finite() {
        return Err(AdaptiveError::NonPositiveEnergy(energy_per_mode));
    }
    let n = code.block_length();
    let words = code.codewords();
    let cells = words.len() << n;
    if cells > MAX_JOINT_CELLS {
        return Err(AdaptiveError::EnumerationTooLarge(cells));
    }

    let mut joint = vec![vec![0.0; 1 << n]; words.len()];
    let prior = 1.0 / words.len() as f64;
    // Conditional path likelihoods P(y_1..y_{j-1} | x) for every codeword,
    // shared along one outcome prefix.
    let mut cond = vec![1.0; words.len()];
    walk_prefix(code, overlap, mode, 1, 0, &mut cond, prior, &mut joint)?;

    Ok(AdaptiveRunResult { joint, energy: energy_per_mode, mode })
}

#[allow(clippy::too_many_arguments)]
fn walk_prefix(
    code: &LinearCode,
    overlap: f64,
    mode: ReceiverMode,
    j: usize,
    prefix: usize,
    cond: &mut [f64],
    prior: f64,
    joint: &mut [Vec<f64>],
) -> Result<(), AdaptiveError> {
    let n = code.block_length();
    if j > n {
        for (l, &c) in cond.iter().enumerate() {
            joint[l][prefix] = prior * c;
        }
        return Ok(());
    }
    let total: f64 = cond.iter().sum();
    if total <= 0.0 {
        // Unreachable prefix; its whole subtree keeps probability zero.
        return Ok(());
    }
    let xi = match mode {
        ReceiverMode::Fixed => 0.5,
        ReceiverMode::Adaptive => {
            let ones: f64 = code
                .codewords()
                .iter()
                .zip(cond.iter())
                .filter(|(&w, _)| LinearCode::mode_bit(w, j) == 1)
                .map(|(_, &c)| c)
                .sum();
            ones / total
        }
    };
    let likelihood = outcome_probabilities(overlap, xi)?;
    let mut branch = vec![0.0; cond.len()];
    for y in 0..2usize {
        for (b, (&c, &w)) in branch.iter_mut().zip(cond.iter().zip(code.codewords())) {
            *b = c * likelihood[LinearCode::mode_bit(w, j) as usize][y];
        }
        walk_prefix(code, overlap, mode, j + 1, prefix | (y << (j - 1)), &mut branch, prior, joint)?;
    }
    Ok(())
}

/// Mutual information, raw bit errors, and efficiencies of an exact run.
pub fn metrics(result: &AdaptiveRunResult, code: &LinearCode) -> Metrics {
    let n = code.block_length();
    let joint = &result.joint;
    let outcomes = 1usize << n;

    let mut py = vec![0.0; outcomes];
    for row in joint {
        for (p, &v) in py.iter_mut().zip(row) {
            *p += v;
        }
    }
    let mut mi = 0.0;
    for row in joint {
        let px: f64 = row.iter().sum();
        if px <= 0.0 {
            continue;
        }
        for (y, &v) in row.iter().enumerate() {
            if v > 0.0 {
                mi += v * (v / (px * py[y])).log2();
            }
        }
    }

    let mut bit_error = vec![0.0; n];
    for (l, row) in joint.iter().enumerate() {
        let word = code.codewords()[l];
        for (y, &v) in row.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let diff = usize::from(word) ^ y;
            for (j, err) in bit_error.iter_mut().enumerate() {
                if (diff >> j) & 1 == 1 {
                    *err += v;
                }
            }
        }
    }

    let mi = Bits::new(mi);
    Metrics {
        mutual_information: mi,
        bit_error,
        die: mi.get() / n as f64,
        pie: mi.get() / (n as f64 * result.energy),
    }
}
