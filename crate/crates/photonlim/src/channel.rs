//! The binary asymmetric channel induced by a Dolinar receiver measurement
//! on two coherent states with arbitrary priors.
//!
//! The receiver's outcome dichotomy is the parity of the final photon count:
//! even counts select the a-priori more likely state, odd counts the less
//! likely one. Conditioning on the more (`+`) and less (`-`) probable state
//! gives four outcome probabilities; averaging the two crossovers reproduces
//! the Helstrom bound exactly.

use crate::numerics::{h2, Bits, Probability};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("overlap {0} outside [0, 1]")]
    OverlapOutOfRange(f64),
    #[error("prior {0} outside [0, 1/2]; pass the less likely state's prior")]
    PriorOutOfRange(f64),
}

/// Discriminants at or below this are treated as exactly degenerate so that
/// round-off cannot reach the square root of a negative number.
const DEGENERATE_DISCRIMINANT: f64 = 1e-15;

/// A Dolinar receiver measurement on two coherent states, described by their
/// overlap `s` (squared inner product) and the prior `xi` of the less likely
/// state (`xi <= 1/2`).
///
/// Callers holding the prior `p > 1/2` of the opposite state should map it
/// through [`outcome_probabilities`], which performs the label swap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DolinarChannel {
    s: f64,
    xi: f64,
}

impl DolinarChannel {
    pub fn new(s: f64, xi: f64) -> Result<Self, ChannelError> {
        let s = validate_overlap(s)?;
        if !(0.0..=0.5).contains(&xi) {
            if xi > -Probability::TOLERANCE && xi < 0.5 + Probability::TOLERANCE {
                return Ok(Self { s, xi: xi.clamp(0.0, 0.5) });
            }
            return Err(ChannelError::PriorOutOfRange(xi));
        }
        Ok(Self { s, xi })
    }

    pub fn overlap(self) -> f64 {
        self.s
    }

    /// Prior of the less likely state.
    pub fn prior(self) -> Probability {
        Probability::new(self.xi).expect("validated on construction")
    }
}

fn validate_overlap(s: f64) -> Result<f64, ChannelError> {
    if (0.0..=1.0).contains(&s) {
        Ok(s)
    } else if s > -Probability::TOLERANCE && s < 1.0 + Probability::TOLERANCE {
        Ok(s.clamp(0.0, 1.0))
    } else {
        Err(ChannelError::OverlapOutOfRange(s))
    }
}

/// Conditional outcome probabilities of the Dolinar measurement, conditioned
/// on the more likely (`+`) and less likely (`-`) input state.
///
/// Both rows sum to one exactly: the crossovers are computed in
/// cancellation-free form and the diagonal entries as their complements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelMatrix {
    pub p_even_plus: Probability,
    pub p_odd_plus: Probability,
    pub p_even_minus: Probability,
    pub p_odd_minus: Probability,
}

/// (1 - sqrt(1 - q)) / 2 without cancellation for small `q`.
#[inline]
pub(crate) fn half_one_minus_sqrt_one_minus(q: f64) -> f64 {
    let q = q.clamp(0.0, 1.0);
    q / (2.0 * (1.0 + (1.0 - q).sqrt()))
}

/// The two crossover probabilities (P_odd^+, P_even^-) for overlap `s` and
/// prior `xi` of the less likely state.
///
/// Small crossovers are computed in rearranged form so they stay exact
/// instead of cancelling to zero:
///   P_odd^+  = 2 xi^2 s (1-s) / (d (d + 1 - 2 xi s))
///   P_even^- = 2 (1-xi)^2 s (1-s) / (d (d + 1 - 2 (1-xi) s))
/// with d = sqrt(1 - 4 xi (1-xi) s). The rearrangement for P_even^- is
/// valid only while 1 - 2(1-xi)s >= 0; past that point the crossover
/// exceeds 1/2 and the direct form has no cancellation.
fn crossovers(s: f64, xi: f64) -> (f64, f64) {
    let disc_sq = 1.0 - 4.0 * xi * (1.0 - xi) * s;
    if disc_sq <= DEGENERATE_DISCRIMINANT {
        // Only reachable at s = 1, xi = 1/2: identical states, no information.
        return (0.5, 0.5);
    }
    let d = disc_sq.sqrt();
    let one_minus_s = 1.0 - s;
    // 1 - 2 xi s >= 0 on the whole domain, so this branch is unconditional.
    let odd_plus = 2.0 * xi * xi * s * one_minus_s / (d * (d + 1.0 - 2.0 * xi * s));
    let b_minus = 1.0 - 2.0 * (1.0 - xi) * s;
    let even_minus = if b_minus >= 0.0 {
        2.0 * (1.0 - xi) * (1.0 - xi) * s * one_minus_s / (d * (d + b_minus))
    } else {
        0.5 * (1.0 - b_minus / d)
    };
    (odd_plus, even_minus)
}

/// The four conditional probabilities of even and odd final counts.
pub fn dolinar_channel_matrix(ch: DolinarChannel) -> ChannelMatrix {
    let (odd_plus, even_minus) = crossovers(ch.s, ch.xi);
    let prob = |v: f64| Probability::new(v).expect("crossovers lie in [0, 1]");
    ChannelMatrix {
        p_even_plus: prob(1.0 - odd_plus),
        p_odd_plus: prob(odd_plus),
        p_even_minus: prob(even_minus),
        p_odd_minus: prob(1.0 - even_minus),
    }
}

/// Minimum error probability for discriminating the two states,
/// (1 - sqrt(1 - 4 xi (1-xi) s)) / 2.
pub fn helstrom_error(ch: DolinarChannel) -> Probability {
    let q = 4.0 * ch.xi * (1.0 - ch.xi) * ch.s;
    Probability::new(half_one_minus_sqrt_one_minus(q)).expect("in [0, 1/2]")
}

/// Mutual information in bits conveyed across the induced channel:
/// H2(P_odd) - [xi H2(P_even^-) + (1-xi) H2(P_odd^+)].
pub fn mutual_information(ch: DolinarChannel) -> Bits {
    let (odd_plus, even_minus) = crossovers(ch.s, ch.xi);
    let odd_minus = 1.0 - even_minus;
    let p_odd = ch.xi * odd_minus + (1.0 - ch.xi) * odd_plus;
    Bits::new(h2(p_odd) - (ch.xi * h2(even_minus) + (1.0 - ch.xi) * h2(odd_plus)))
}

/// Capacity per channel use at equal priors: 1 - H2((1 - sqrt(1 - s)) / 2),
/// the binary symmetric channel the measurement reduces to at xi = 1/2.
pub fn capacity_per_use(s: f64) -> Bits {
    let s = validate_overlap(s).expect("overlap must lie in [0, 1]");
    Bits::new(1.0 - h2(half_one_minus_sqrt_one_minus(s)))
}

/// Outcome probabilities `[x][y]` of a Dolinar measurement designed for
/// `xi_one = P(X = 1)`, which may lie on either side of 1/2.
///
/// The outcome `y` is the receiver's symbol estimate (even counts select the
/// a-priori favorite), so for `xi_one > 1/2` the state roles and outcome
/// labels both swap relative to the canonical matrix at prior `1 - xi_one`.
pub fn outcome_probabilities(s: f64, xi_one: f64) -> Result<[[f64; 2]; 2], ChannelError> {
    if !(-Probability::TOLERANCE..=1.0 + Probability::TOLERANCE).contains(&xi_one) {
        return Err(ChannelError::PriorOutOfRange(xi_one));
    }
    let xi_one = xi_one.clamp(0.0, 1.0);
    let s = validate_overlap(s)?;
    if xi_one <= 0.5 {
        let (odd_plus, even_minus) = crossovers(s, xi_one);
        Ok([[1.0 - odd_plus, odd_plus], [even_minus, 1.0 - even_minus]])
    } else {
        let (odd_plus, even_minus) = crossovers(s, 1.0 - xi_one);
        Ok([[1.0 - even_minus, even_minus], [odd_plus, 1.0 - odd_plus]])
    }
}
