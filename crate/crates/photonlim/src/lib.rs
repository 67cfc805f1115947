//! Capacity-efficiency tradeoffs for photon-starved coherent-state optical links.
//!
//! The crate computes photon information efficiency (bits/photon) versus
//! dimensional information efficiency (bits/mode) tradeoff curves for the
//! common modulation and receiver combinations, models the Dolinar receiver
//! measurement as an exact binary asymmetric channel, evaluates an adaptive
//! Dolinar receiver over small linear block codes, and simulates the
//! information-greedy local-oscillator feedback receiver in continuous time.
//!
//! The modules are largely independent:
//!
//! - [`numerics`]: entropies, bracketed scalar maximization, RNG substreams
//! - [`channel`]: the Dolinar-measurement binary asymmetric channel
//! - [`curves`]: capacity and efficiency formulas plus curve sweeps
//! - [`code`]: binary linear block codes as explicit codeword sets
//! - [`adaptive`]: exact evaluation of the adaptive coded-sequence receiver
//! - [`feedback`]: continuous-time Monte Carlo of the feedback receiver

pub mod adaptive;
pub mod channel;
pub mod code;
pub mod curves;
pub mod feedback;
pub mod numerics;

pub use adaptive::{run_exact_bpsk, AdaptiveRunResult, Metrics, ReceiverMode};
pub use channel::{capacity_per_use, helstrom_error, mutual_information, DolinarChannel};
pub use code::LinearCode;
pub use curves::{tradeoff_curve, Scheme, TradeoffPoint};
pub use feedback::{Constellation, FeedbackSimConfig, McEstimate};
pub use numerics::{binary_entropy, Bits, Probability};
