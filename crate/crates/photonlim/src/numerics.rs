//! Shared numerical primitives: binary and discrete entropy, bracketed
//! scalar maximization, and deterministic per-worker random substreams.
//!
//! All entropies are in bits. Natural logarithms appear only internally.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Default absolute tolerance on optimizer arguments.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Coarse grid size used before golden-section refinement.
const COARSE_POINTS: usize = 512;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Error, PartialEq)]
pub enum NumericsError {
    #[error("value {0} is not a probability in [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("invalid bracket: lo = {lo}, hi = {hi}")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error("objective evaluated to a non-finite value at x = {0}")]
    NonFiniteObjective(f64),
}

/// A probability validated to lie in `[0, 1]`.
///
/// Values straying outside the interval by at most 1e-12 (floating-point
/// round-off from upstream arithmetic) are clamped; anything further out is
/// rejected.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    /// Round-off slack accepted outside `[0, 1]` before rejecting.
    pub const TOLERANCE: f64 = 1e-12;

    pub const ZERO: Probability = Probability(0.0);
    pub const HALF: Probability = Probability(0.5);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(value: f64) -> Result<Self, NumericsError> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else if value > -Self::TOLERANCE && value < 1.0 + Self::TOLERANCE {
            Ok(Self(value.clamp(0.0, 1.0)))
        } else {
            Err(NumericsError::ProbabilityOutOfRange(value))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn complement(self) -> Self {
        Self(1.0 - self.0)
    }
}

/// An information quantity in bits (entropy, mutual information, capacity).
///
/// Non-negative by construction; negative round-off from entropy differences
/// is clamped to zero.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Bits(f64);

impl Bits {
    pub fn new(value: f64) -> Self {
        debug_assert!(value > -1e-9, "information quantity {value} far below zero");
        Self(value.max(0.0))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Binary entropy in bits, with the 0·log 0 = 0 convention taken by an
/// explicit branch rather than floating-point limits.
pub fn binary_entropy(p: Probability) -> Bits {
    Bits(h2(p.get()))
}

/// Raw binary entropy for internal use; assumes `p` already lies in `[0, 1]`.
pub(crate) fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// Entropy in bits of a discrete distribution. Zero entries are skipped.
pub fn discrete_entropy(dist: &[f64]) -> Bits {
    let mut h = 0.0;
    for &p in dist {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    Bits::new(h)
}

/// Maximizes `f` on `[lo, hi]` to within `tol` on the argument.
///
/// A coarse uniform grid locates the best bracket, then golden-section
/// refinement narrows it. For unimodal `f` the returned argument is within
/// `tol` of the true maximizer; otherwise it is the best point found by the
/// grid-then-refine strategy.
pub fn maximize_scalar(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, f64), NumericsError> {
    let grid = |i: usize| lo + (hi - lo) * (i as f64 / COARSE_POINTS as f64);
    maximize_on_grid(f, lo, hi, tol, grid)
}

/// Like [`maximize_scalar`] but with a log-spaced coarse grid; requires
/// `lo > 0`. Suited to objectives whose maximizer may sit orders of
/// magnitude below `hi`.
pub fn maximize_scalar_log(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, f64), NumericsError> {
    if lo <= 0.0 {
        return Err(NumericsError::InvalidBracket { lo, hi });
    }
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let grid = move |i: usize| {
        let x = (ln_lo + (ln_hi - ln_lo) * (i as f64 / COARSE_POINTS as f64)).exp();
        x.clamp(lo, hi)
    };
    maximize_on_grid(f, lo, hi, tol, grid)
}

fn maximize_on_grid(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
    grid: impl Fn(usize) -> f64,
) -> Result<(f64, f64), NumericsError> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(NumericsError::InvalidBracket { lo, hi });
    }
    let tol = if tol > 0.0 { tol } else { DEFAULT_TOL };

    let mut best_i = 0;
    let mut best_x = grid(0);
    let mut best_v = f64::NEG_INFINITY;
    let mut xs = [0.0; COARSE_POINTS + 1];
    for (i, slot) in xs.iter_mut().enumerate() {
        let x = grid(i);
        let v = f(x);
        if !v.is_finite() {
            return Err(NumericsError::NonFiniteObjective(x));
        }
        *slot = x;
        if v > best_v {
            best_i = i;
            best_x = x;
            best_v = v;
        }
    }

    let a = if best_i == 0 { xs[0] } else { xs[best_i - 1] };
    let b = if best_i == COARSE_POINTS { xs[COARSE_POINTS] } else { xs[best_i + 1] };
    let (x, v) = golden_max(&f, a, b, tol)?;
    if v >= best_v {
        Ok((x, v))
    } else {
        Ok((best_x, best_v))
    }
}

fn golden_max(
    f: &impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<(f64, f64), NumericsError> {
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..400 {
        if !f1.is_finite() {
            return Err(NumericsError::NonFiniteObjective(x1));
        }
        if !f2.is_finite() {
            return Err(NumericsError::NonFiniteObjective(x2));
        }
        if (b - a).abs() <= tol {
            break;
        }
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else if f2 > f1 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            // Flat to f64 resolution: shrink from both sides so symmetric
            // plateaus stay centered instead of drifting.
            a = x1;
            b = x2;
            x1 = b - INV_PHI * (b - a);
            x2 = a + INV_PHI * (b - a);
            f1 = f(x1);
            f2 = f(x2);
        }
    }
    Ok(if f1 > f2 { (x1, f1) } else { (x2, f2) })
}

/// Deterministic RNG substream for worker `index` under a run-level `seed`.
///
/// Streams for distinct indices are independent and do not depend on the
/// order in which workers run, so parallel reductions stay reproducible.
pub fn substream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut state = seed ^ 0x6A09_E667_F3BC_C909u64.wrapping_mul(index.wrapping_add(1));
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_chacha::rand_core::RngCore;

    fn p(v: f64) -> Probability {
        Probability::new(v).unwrap()
    }

    #[test]
    fn binary_entropy_anchors() {
        assert_eq!(binary_entropy(p(0.5)).get(), 1.0);
        assert_eq!(binary_entropy(p(0.0)).get(), 0.0);
        assert_eq!(binary_entropy(p(1.0)).get(), 0.0);
        // Frozen from a 30-digit evaluation of -p log2 p - (1-p) log2 (1-p).
        assert!((binary_entropy(p(0.11)).get() - 0.499915958164528).abs() < 1e-14);
    }

    #[test]
    fn probability_clamps_roundoff_and_rejects_beyond() {
        assert_eq!(Probability::new(1.0 + 5e-13).unwrap().get(), 1.0);
        assert_eq!(Probability::new(-5e-13).unwrap().get(), 0.0);
        assert!(Probability::new(1.0 + 1e-11).is_err());
        assert!(Probability::new(-1e-6).is_err());
        assert!(Probability::new(f64::NAN).is_err());
    }

    #[test]
    fn discrete_entropy_matches_binary() {
        let h = discrete_entropy(&[0.25, 0.75]).get();
        assert!((h - h2(0.25)).abs() < 1e-15);
        assert_eq!(discrete_entropy(&[1.0, 0.0]).get(), 0.0);
        assert!((discrete_entropy(&[0.25; 4]).get() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn maximize_quadratic_vertex() {
        let (x, v) = maximize_scalar(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-9).unwrap();
        assert!((x - 0.3).abs() < 1e-9);
        assert!(v <= 0.0 && v > -1e-17);
    }

    #[test]
    fn maximize_binary_entropy() {
        let (x, v) = maximize_scalar(|x| h2(x), 0.0, 1.0, 1e-9).unwrap();
        // The entropy is flat to f64 resolution within ~1e-8 of 1/2, so the
        // argument cannot be localized tighter than that by comparisons.
        assert!((x - 0.5).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn maximize_rejects_bad_input() {
        assert_eq!(
            maximize_scalar(|x| x, 1.0, 0.0, 1e-9),
            Err(NumericsError::InvalidBracket { lo: 1.0, hi: 0.0 })
        );
        assert!(matches!(
            maximize_scalar(|x| (x - 0.5).ln(), 0.0, 1.0, 1e-9),
            Err(NumericsError::NonFiniteObjective(_))
        ));
        assert!(maximize_scalar_log(|x| x, 0.0, 1.0, 1e-9).is_err());
    }

    #[test]
    fn log_grid_finds_tiny_maximizer() {
        // Maximum at 3e-5, far below the top of the bracket.
        let f = |x: f64| -(x.ln() - (3e-5f64).ln()).powi(2);
        let (x, _) = maximize_scalar_log(f, 1e-6, 0.5, 1e-12).unwrap();
        assert!((x - 3e-5).abs() / 3e-5 < 1e-6);
    }

    #[test]
    fn substreams_are_deterministic_and_distinct() {
        let mut a = substream_rng(7, 0);
        let mut b = substream_rng(7, 0);
        let mut c = substream_rng(7, 1);
        let (xa, xb, xc) = (a.next_u64(), b.next_u64(), c.next_u64());
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    proptest! {
        #[test]
        fn entropy_symmetry(x in 0.0f64..=1.0) {
            let d = (h2(x) - h2(1.0 - x)).abs();
            prop_assert!(d <= 1e-14);
        }

        #[test]
        fn entropy_concavity(a in 0.0f64..=1.0, b in 0.0f64..=1.0, t in 0.0f64..=1.0) {
            let lhs = h2(t * a + (1.0 - t) * b);
            let rhs = t * h2(a) + (1.0 - t) * h2(b);
            prop_assert!(lhs >= rhs - 1e-12);
        }

        #[test]
        fn optimizer_beats_dense_grid(c in 0.05f64..0.95, k in 0.1f64..10.0) {
            // Unimodal objective with a known interior maximum.
            let f = move |x: f64| -k * (x - c) * (x - c) - (x - c).powi(4);
            let (_, v) = maximize_scalar(f, 0.0, 1.0, 1e-10).unwrap();
            let grid_best = (0..=10_000)
                .map(|i| f(i as f64 / 10_000.0))
                .fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(v >= grid_best - 1e-9);
        }
    }
}
