//! Continuous-time simulation of the optical feedback receiver.
//!
//! A constant coherent-state signal drawn from a finite constellation is
//! displaced by a feedback-controlled local oscillator and observed by an
//! ideal photon counter, giving a conditionally Poisson count process with
//! rate |alpha_k + alpha_lo|^2. The controller re-optimizes the local
//! oscillator after every time step to maximize the instantaneous mutual
//! information rate between the symbol and the next count increment; the
//! posterior over symbols is tracked by Bayes updates on the count record.
//!
//! Greedy control is globally optimal here because the total mutual
//! information is the time integral of the conditional rate, so the
//! simulator never needs lookahead.

use crate::numerics::substream_rng;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

/// Degenerate-posterior threshold: with less than this much probability
/// outside the leading symbol, every local oscillator yields essentially
/// zero rate and the control is fixed to zero by convention.
const DEGENERATE_POSTERIOR: f64 = 1e-15;

/// Maximum per-step count probability accepted for a simulation.
pub const MAX_LAMBDA_DT: f64 = 0.01;

/// Default local-oscillator amplitude cap, in units of the largest
/// constellation amplitude. The uncapped optimum diverges at balanced
/// posteriors; the cap bounds the rates so a fixed step size works.
pub const DEFAULT_CAP_FACTOR: f64 = 50.0;

#[derive(Debug, Error, PartialEq)]
pub enum FeedbackError {
    #[error("constellation needs at least two states")]
    TooFewStates,
    #[error("amplitudes and priors must have equal length")]
    LengthMismatch,
    #[error("priors must be nonnegative and sum to 1 within 1e-12")]
    InvalidPriors,
    #[error("count rates must be nonnegative")]
    NegativeRate,
    #[error("posterior must be nonnegative and sum to 1 within 1e-10")]
    InvalidPosterior,
    #[error("local-oscillator amplitude cap must be positive, got {0}")]
    InvalidCap(f64),
    #[error("time step must be positive, got {0}")]
    InvalidDt(f64),
    #[error("max rate x dt = {0} exceeds the filter validity bound 0.1")]
    StepTooCoarse(f64),
    #[error("dt factor {0} outside (0, {MAX_LAMBDA_DT}]")]
    InvalidDtFactor(f64),
    #[error("symbol duration must be positive, got {0}")]
    InvalidDuration(f64),
    #[error("at least one trial is required")]
    NoTrials,
    #[error("a count was observed while every hypothesis rate is zero")]
    ZeroLikelihood,
}

/// A coherent-state alphabet with prior probabilities. Amplitudes are in
/// sqrt(photons per unit time), so |alpha|^2 T is the mean photon count
/// over a symbol of duration T.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    amplitudes: Vec<Complex64>,
    priors: Vec<f64>,
}

impl Constellation {
    pub fn new(amplitudes: Vec<Complex64>, priors: Vec<f64>) -> Result<Self, FeedbackError> {
        if amplitudes.len() < 2 {
            return Err(FeedbackError::TooFewStates);
        }
        if amplitudes.len() != priors.len() {
            return Err(FeedbackError::LengthMismatch);
        }
        let sum: f64 = priors.iter().sum();
        if priors.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (sum - 1.0).abs() > 1e-12 {
            return Err(FeedbackError::InvalidPriors);
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(FeedbackError::NegativeRate);
        }
        Ok(Self { amplitudes, priors })
    }

    /// BPSK alphabet {-alpha, +alpha} with priors (xi, 1 - xi).
    pub fn bpsk(alpha: f64, xi: f64) -> Result<Self, FeedbackError> {
        Self::new(
            vec![Complex64::new(-alpha, 0.0), Complex64::new(alpha, 0.0)],
            vec![xi, 1.0 - xi],
        )
    }

    pub fn size(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn max_amplitude(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// If every state lies on one line through the origin, returns that
    /// axis phase and the signed amplitude of each state along it.
    fn collinear_axis(&self) -> Option<(f64, Vec<f64>)> {
        let theta = self
            .amplitudes
            .iter()
            .find(|a| a.norm() > 0.0)
            .map_or(0.0, |a| a.arg());
        let rot = Complex64::from_polar(1.0, -theta);
        let mut signed = Vec::with_capacity(self.amplitudes.len());
        for a in &self.amplitudes {
            let z = a * rot;
            if z.im.abs() > 1e-12 * z.norm().max(1.0) {
                return None;
            }
            signed.push(z.re);
        }
        Some((theta, signed))
    }
}

/// Local-oscillator setting: amplitude (capped), phase, and the cap it was
/// optimized under.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoControl {
    pub amplitude: f64,
    pub phase: f64,
    pub cap: f64,
}

impl LoControl {
    pub fn field(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase)
    }
}

/// Instantaneous mutual-information rate in nats per unit time between the
/// symbol and the next count increment:
/// -mean(lambda) ln mean(lambda) + sum_k p_k lambda_k ln lambda_k.
pub fn mi_rate(lambdas: &[f64], priors: &[f64]) -> Result<f64, FeedbackError> {
    if lambdas.len() != priors.len() {
        return Err(FeedbackError::LengthMismatch);
    }
    if lambdas.iter().any(|&l| l < 0.0 || !l.is_finite()) {
        return Err(FeedbackError::NegativeRate);
    }
    Ok(mi_rate_raw(lambdas, priors))
}

#[inline]
fn xlnx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

fn mi_rate_raw(lambdas: &[f64], priors: &[f64]) -> f64 {
    let mut mean = 0.0;
    let mut term = 0.0;
    for (&l, &p) in lambdas.iter().zip(priors) {
        mean += p * l;
        term += p * xlnx(l);
    }
    (term - xlnx(mean)).max(0.0)
}

fn rates(c: &Constellation, lo: Complex64) -> Vec<f64> {
    c.amplitudes.iter().map(|a| (a + lo).norm_sqr()).collect()
}

/// Rate achieved by a candidate LO against a posterior, for tests and grid
/// oracles.
pub fn lo_rate(c: &Constellation, posterior: &[f64], lo: &LoControl) -> f64 {
    mi_rate_raw(&rates(c, lo.field()), posterior)
}

fn validate_posterior(c: &Constellation, posterior: &[f64]) -> Result<(), FeedbackError> {
    if posterior.len() != c.size() {
        return Err(FeedbackError::LengthMismatch);
    }
    let sum: f64 = posterior.iter().sum();
    if posterior.iter().any(|&p| !(0.0..=1.0 + 1e-12).contains(&p)) || (sum - 1.0).abs() > 1e-10 {
        return Err(FeedbackError::InvalidPosterior);
    }
    Ok(())
}

/// Amplitude-direction and phase-direction stationarity residuals of the
/// rate at `lo`, meaningful at interior optima where every rate is
/// positive:
///   sum_k p_k ln(lambda_k / mean)(a + |alpha_k| cos(phi - phi_k)) and
///   sum_k p_k ln(lambda_k / mean) |alpha_k| sin(phi - phi_k).
pub fn stationarity_residuals(
    c: &Constellation,
    posterior: &[f64],
    lo: &LoControl,
) -> Result<(f64, f64), FeedbackError> {
    validate_posterior(c, posterior)?;
    let lambdas = rates(c, lo.field());
    let mean: f64 = lambdas.iter().zip(posterior).map(|(&l, &p)| p * l).sum();
    let mut res_amp = 0.0;
    let mut res_phase = 0.0;
    for ((&l, &p), a_k) in lambdas.iter().zip(posterior).zip(&c.amplitudes) {
        if p == 0.0 {
            continue;
        }
        let ln_ratio = (l / mean).ln();
        let mag = a_k.norm();
        let rel = lo.phase - a_k.arg();
        res_amp += p * ln_ratio * (lo.amplitude + mag * rel.cos());
        res_phase += p * ln_ratio * mag * rel.sin();
    }
    Ok((res_amp, res_phase))
}

/// One-dimensional rate maximization along a collinear constellation axis:
/// coarse grid, golden refinement, then Newton polish on the analytic
/// derivative away from nulls and the cap.
fn maximize_rate_collinear(signed: &[f64], posterior: &[f64], cap: f64) -> f64 {
    let objective = |b: f64| {
        let lambdas: Vec<f64> = signed.iter().map(|&r| (b + r) * (b + r)).collect();
        mi_rate_raw(&lambdas, posterior)
    };

    const GRID: usize = 1024;
    let mut best = (0.0, f64::NEG_INFINITY);
    let mut consider = |b: f64| {
        let v = objective(b);
        if v > best.1 {
            best = (b, v);
        }
    };
    for i in 0..=GRID {
        consider(-cap + 2.0 * cap * i as f64 / GRID as f64);
    }
    // Exact nulls are natural candidates near one-sided posteriors.
    for &r in signed {
        if r.abs() <= cap {
            consider(-r);
        }
    }

    let half_cell = 2.0 * cap / GRID as f64;
    let (mut a, mut b) = ((best.0 - half_cell).max(-cap), (best.0 + half_cell).min(cap));
    let mut x1 = b - 0.618_033_988_749_894_9 * (b - a);
    let mut x2 = a + 0.618_033_988_749_894_9 * (b - a);
    let (mut f1, mut f2) = (objective(x1), objective(x2));
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 * cap.max(1.0) {
            break;
        }
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - 0.618_033_988_749_894_9 * (b - a);
            f1 = objective(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + 0.618_033_988_749_894_9 * (b - a);
            f2 = objective(x2);
        }
    }
    let golden = if f1 > f2 { (x1, f1) } else { (x2, f2) };
    if golden.1 > best.1 {
        best = golden;
    }

    // Newton on R'(b) = sum p_k lambda_k' ln(lambda_k / mean).
    let mut x = best.0;
    if x.abs() < cap * (1.0 - 1e-9) {
        for _ in 0..60 {
            let mut mean = 0.0;
            let mut mean_d = 0.0;
            let mut near_null = false;
            for (&r, &p) in signed.iter().zip(posterior) {
                let l = (x + r) * (x + r);
                if l < 1e-11 {
                    near_null = true;
                }
                mean += p * l;
                mean_d += p * 2.0 * (x + r);
            }
            if near_null || mean <= 0.0 {
                break;
            }
            let mut d1 = 0.0;
            let mut d2 = 0.0;
            for (&r, &p) in signed.iter().zip(posterior) {
                let l = (x + r) * (x + r);
                let ld = 2.0 * (x + r);
                let ln_ratio = (l / mean).ln();
                d1 += p * ld * ln_ratio;
                d2 += p * (2.0 * ln_ratio + ld * (ld / l - mean_d / mean));
            }
            if d2 >= 0.0 {
                break;
            }
            let step = d1 / d2;
            let next = (x - step).clamp(-cap, cap);
            if !next.is_finite() {
                break;
            }
            x = next;
            if step.abs() < 1e-15 * cap.max(1.0) {
                break;
            }
        }
        let v = objective(x);
        if v >= best.1 {
            best = (x, v);
        }
    }
    best.0
}

/// Maximizes the mutual-information rate over the local-oscillator
/// amplitude (up to `cap`) and phase for the given posterior.
pub fn optimize_lo(
    c: &Constellation,
    posterior: &[f64],
    cap: f64,
) -> Result<LoControl, FeedbackError> {
    if !(cap > 0.0) || !cap.is_finite() {
        return Err(FeedbackError::InvalidCap(cap));
    }
    validate_posterior(c, posterior)?;

    let p_max = posterior.iter().copied().fold(0.0, f64::max);
    if 1.0 - p_max < DEGENERATE_POSTERIOR {
        return Ok(LoControl { amplitude: 0.0, phase: 0.0, cap });
    }

    if let Some((theta, signed)) = c.collinear_axis() {
        let b = maximize_rate_collinear(&signed, posterior, cap);
        let phase = if b >= 0.0 { theta } else { theta + std::f64::consts::PI };
        return Ok(LoControl {
            amplitude: b.abs().min(cap),
            phase: phase.rem_euclid(std::f64::consts::TAU),
            cap,
        });
    }

    // General constellation: 2-D grid then coordinate golden refinement.
    let objective = |a: f64, phi: f64| {
        mi_rate_raw(&rates(c, Complex64::from_polar(a, phi)), posterior)
    };
    let mut best = (0.0, 0.0, objective(0.0, 0.0));
    for ia in 0..=64 {
        let a = cap * ia as f64 / 64.0;
        for ip in 0..48 {
            let phi = std::f64::consts::TAU * ip as f64 / 48.0;
            let v = objective(a, phi);
            if v > best.2 {
                best = (a, phi, v);
            }
        }
    }
    let (mut a, mut phi, _) = best;
    for _ in 0..24 {
        let da = cap / 64.0;
        let (na, _) = golden_1d(|x| objective(x, phi), (a - da).max(0.0), (a + da).min(cap));
        a = na;
        let dp = std::f64::consts::TAU / 48.0;
        let (np, _) = golden_1d(|x| objective(a, x), phi - dp, phi + dp);
        phi = np;
    }
    Ok(LoControl { amplitude: a, phase: phi.rem_euclid(std::f64::consts::TAU), cap })
}

fn golden_1d(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    const G: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - G * (b - a);
    let mut x2 = a + G * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..120 {
        if (b - a).abs() < 1e-14 * (a.abs() + b.abs() + 1.0) {
            break;
        }
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - G * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + G * (b - a);
            f2 = f(x2);
        }
    }
    if f1 > f2 { (x1, f1) } else { (x2, f2) }
}

/// Posterior over constellation symbols at time `t` within the symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    pub posterior: Vec<f64>,
    pub time: f64,
}

impl FilterState {
    /// Starts a symbol interval from the prior.
    pub fn from_priors(c: &Constellation) -> Self {
        Self { posterior: c.priors.clone(), time: 0.0 }
    }
}

/// One Bayes update of the posterior over a step of length `dt` in which
/// either no count (`count = false`) or exactly one count was observed.
pub fn filter_step(
    state: &FilterState,
    c: &Constellation,
    lo: &LoControl,
    dt: f64,
    count: bool,
) -> Result<FilterState, FeedbackError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(FeedbackError::InvalidDt(dt));
    }
    validate_posterior(c, &state.posterior)?;
    let lambdas = rates(c, lo.field());
    let max_ldt = lambdas.iter().fold(0.0f64, |m, &l| m.max(l * dt));
    if max_ldt > 0.1 {
        return Err(FeedbackError::StepTooCoarse(max_ldt));
    }
    let mut posterior: Vec<f64> = state
        .posterior
        .iter()
        .zip(&lambdas)
        .map(|(&p, &l)| p * if count { l * dt } else { (-l * dt).exp() })
        .collect();
    let total: f64 = posterior.iter().sum();
    if total <= 0.0 {
        return Err(FeedbackError::ZeroLikelihood);
    }
    for p in &mut posterior {
        *p /= total;
    }
    Ok(FilterState { posterior, time: state.time + dt })
}

/// Parameters of a Monte Carlo run. `lo_cap` defaults to
/// [`DEFAULT_CAP_FACTOR`] times the largest constellation amplitude and
/// `dt_factor` to [`MAX_LAMBDA_DT`]; the step size is chosen as
/// `dt_factor / (cap + max |alpha|)^2` so every count probability per step
/// stays at or below `dt_factor`.
#[derive(Debug, Clone)]
pub struct FeedbackSimConfig {
    pub constellation: Constellation,
    /// Symbol duration T.
    pub duration: f64,
    pub dt_factor: f64,
    pub lo_cap: Option<f64>,
    pub trials: u64,
    pub seed: u64,
}

impl FeedbackSimConfig {
    pub fn new(constellation: Constellation) -> Self {
        Self {
            constellation,
            duration: 1.0,
            dt_factor: MAX_LAMBDA_DT,
            lo_cap: None,
            trials: 10_000,
            seed: 0,
        }
    }

    pub fn cap(&self) -> f64 {
        self.lo_cap
            .unwrap_or(DEFAULT_CAP_FACTOR * self.constellation.max_amplitude())
    }
}

/// Record of one simulated symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub sent: usize,
    pub decided: usize,
    pub counts: u64,
}

impl TrialOutcome {
    pub fn correct(&self) -> bool {
        self.sent == self.decided
    }
}

/// Empirical error probability and its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub pe_estimate: f64,
    pub std_error: f64,
}

struct SimGrid {
    dt: f64,
    steps: u64,
    cap: f64,
}

fn sim_grid(cfg: &FeedbackSimConfig) -> Result<SimGrid, FeedbackError> {
    if cfg.trials == 0 {
        return Err(FeedbackError::NoTrials);
    }
    if !(cfg.duration > 0.0) || !cfg.duration.is_finite() {
        return Err(FeedbackError::InvalidDuration(cfg.duration));
    }
    if !(cfg.dt_factor > 0.0) || cfg.dt_factor > MAX_LAMBDA_DT {
        return Err(FeedbackError::InvalidDtFactor(cfg.dt_factor));
    }
    let cap = cfg.cap();
    if !(cap > 0.0) || !cap.is_finite() {
        return Err(FeedbackError::InvalidCap(cap));
    }
    let lambda_max = {
        let r = cap + cfg.constellation.max_amplitude();
        r * r
    };
    let ideal_dt = cfg.dt_factor / lambda_max;
    let steps = (cfg.duration / ideal_dt).ceil().max(1.0) as u64;
    Ok(SimGrid { dt: cfg.duration / steps as f64, steps, cap })
}

/// Lookup table mapping the binary log-odds to the optimal signed LO
/// amplitude along a collinear axis. Linear interpolation, except across
/// jumps (the optimum flips sign through balanced posteriors) where the
/// nearer node wins.
struct LoTable {
    lmin: f64,
    inv_step: f64,
    values: Vec<f64>,
    cap: f64,
}

const LO_TABLE_RANGE: f64 = 36.0;
const LO_TABLE_NODES: usize = 4097;

impl LoTable {
    fn build(signed: &[f64; 2], cap: f64) -> Self {
        let lmin = -LO_TABLE_RANGE;
        let step = 2.0 * LO_TABLE_RANGE / (LO_TABLE_NODES - 1) as f64;
        let values = (0..LO_TABLE_NODES)
            .map(|i| {
                let l = lmin + step * i as f64;
                // posterior of symbol 1 from log-odds l = ln(p1/p0)
                let p1 = 1.0 / (1.0 + (-l).exp());
                let posterior = [1.0 - p1, p1];
                if 1.0 - posterior[0].max(posterior[1]) < DEGENERATE_POSTERIOR {
                    0.0
                } else {
                    maximize_rate_collinear(signed, &posterior, cap)
                }
            })
            .collect();
        Self { lmin, inv_step: 1.0 / step, values, cap }
    }

    #[inline]
    fn lookup(&self, logodds: f64) -> f64 {
        let pos = ((logodds - self.lmin) * self.inv_step)
            .clamp(0.0, (LO_TABLE_NODES - 1) as f64);
        let i = pos as usize;
        if i + 1 >= LO_TABLE_NODES {
            return self.values[LO_TABLE_NODES - 1];
        }
        let (a, b) = (self.values[i], self.values[i + 1]);
        let frac = pos - i as f64;
        if (a - b).abs() > 0.1 * self.cap {
            if frac < 0.5 { a } else { b }
        } else {
            a + (b - a) * frac
        }
    }
}

fn draw_symbol(priors: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (k, &p) in priors.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    priors.len() - 1
}

/// SplitMix64 finalizer: the counter-based substream used by the hot
/// simulation loop. Each (seed, trial) pair keys an independent stream
/// indexed by step number, so trials are reproducible in any order.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn unit_f64(u: u64) -> f64 {
    (u >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

const TWO64: f64 = 1.844_674_407_370_955_2e19;

/// Trials interleaved per block in the collinear fast path. One trial's
/// step update is a short serial dependency chain, so running several
/// independent chains per loop iteration keeps the pipeline full.
const LANES: usize = 8;

struct CollinearTrial {
    key: u64,
    logodds: f64,
    r_sent: f64,
    sent: usize,
    counts: u64,
}

impl CollinearTrial {
    fn start(signed: &[f64; 2], priors: &[f64], seed: u64, trial: u64) -> Self {
        let key = mix64(seed ^ mix64(trial.wrapping_add(1).wrapping_mul(GOLDEN)));
        let sent = draw_symbol(priors, unit_f64(mix64(key)));
        Self {
            key,
            logodds: priors[1].ln() - priors[0].ln(),
            r_sent: signed[sent],
            sent,
            counts: 0,
        }
    }

    #[inline]
    fn step(&mut self, step: u64, signed: &[f64; 2], table: &LoTable, dt: f64) {
        let b = table.lookup(self.logodds);
        let v = b + self.r_sent;
        let ldt = v * v * dt;
        // P(at least one count) = 1 - e^{-ldt}, by series; ldt <= 0.01 so
        // three terms reach ~1e-10 absolute.
        let p_count = ldt * (1.0 - 0.5 * ldt * (1.0 - ldt / 3.0));
        let u = mix64(self.key.wrapping_add(step.wrapping_add(1).wrapping_mul(GOLDEN)));
        let (r0, r1) = (signed[0], signed[1]);
        if (u as f64) < p_count * TWO64 {
            self.counts += 1;
            // Likelihood ratio of the count indicator:
            // (1 - e^{-lambda_1 dt}) / (1 - e^{-lambda_0 dt}).
            let l0 = (b + r0) * (b + r0) * dt;
            let l1 = (b + r1) * (b + r1) * dt;
            self.logodds += (-(-l1).exp_m1()).ln() - (-(-l0).exp_m1()).ln();
        } else {
            self.logodds += (r0 - r1) * (2.0 * b + r0 + r1) * dt;
        }
    }

    fn finish(&self) -> TrialOutcome {
        TrialOutcome {
            sent: self.sent,
            decided: usize::from(self.logodds > 0.0),
            counts: self.counts,
        }
    }
}

fn run_trial_block(
    signed: &[f64; 2],
    priors: &[f64],
    table: &LoTable,
    grid: &SimGrid,
    seed: u64,
    first_trial: u64,
    lanes: usize,
) -> Vec<TrialOutcome> {
    let mut trials: Vec<CollinearTrial> = (0..lanes as u64)
        .map(|i| CollinearTrial::start(signed, priors, seed, first_trial + i))
        .collect();
    let dt = grid.dt;
    if lanes == LANES {
        // Fixed-width hot loop; the lane loop unrolls.
        let lanes: &mut [CollinearTrial; LANES] =
            (&mut trials[..]).try_into().expect("block width");
        for step in 0..grid.steps {
            for t in lanes.iter_mut() {
                t.step(step, signed, table, dt);
            }
        }
    } else {
        for step in 0..grid.steps {
            for t in trials.iter_mut() {
                t.step(step, signed, table, dt);
            }
        }
    }
    trials.iter().map(CollinearTrial::finish).collect()
}

fn run_trial_generic(
    c: &Constellation,
    grid: &SimGrid,
    seed: u64,
    trial: u64,
) -> Result<TrialOutcome, FeedbackError> {
    let mut rng = substream_rng(seed, trial);
    let sent = draw_symbol(c.priors(), rng.random::<f64>());
    let mut posterior = c.priors.clone();
    let mut counts = 0u64;
    for _ in 0..grid.steps {
        let lo = optimize_lo(c, &posterior, grid.cap)?;
        let lambdas = rates(c, lo.field());
        let count = rng.random::<f64>() < -(-lambdas[sent] * grid.dt).exp_m1();
        if count {
            counts += 1;
        }
        let mut total = 0.0;
        for (p, &l) in posterior.iter_mut().zip(&lambdas) {
            // Count-indicator likelihoods, matching the generator exactly.
            *p *= if count { -(-l * grid.dt).exp_m1() } else { (-l * grid.dt).exp() };
            total += *p;
        }
        if total <= 0.0 {
            return Err(FeedbackError::ZeroLikelihood);
        }
        for p in posterior.iter_mut() {
            *p /= total;
        }
    }
    let decided = posterior
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| {
            // Ties break toward the lowest index.
            a.partial_cmp(b)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(ib.cmp(ia))
        })
        .map_or(0, |(k, _)| k);
    Ok(TrialOutcome { sent, decided, counts })
}

/// Simulates independent symbol transmissions, each with the local
/// oscillator re-optimized from the running posterior every step, and
/// returns the per-trial records. Trials use independent RNG substreams,
/// so results do not depend on scheduling.
pub fn run_trials(cfg: &FeedbackSimConfig) -> Result<Vec<TrialOutcome>, FeedbackError> {
    let grid = sim_grid(cfg)?;
    let c = &cfg.constellation;

    if c.size() == 2 {
        if let Some((_, signed)) = c.collinear_axis() {
            let signed = [signed[0], signed[1]];
            let table = LoTable::build(&signed, grid.cap);
            let blocks = cfg.trials.div_ceil(LANES as u64);
            let nested: Vec<Vec<TrialOutcome>> = (0..blocks)
                .into_par_iter()
                .map(|blk| {
                    let first = blk * LANES as u64;
                    let lanes = (cfg.trials - first).min(LANES as u64) as usize;
                    run_trial_block(&signed, c.priors(), &table, &grid, cfg.seed, first, lanes)
                })
                .collect();
            return Ok(nested.into_iter().flatten().collect());
        }
    }
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial_generic(c, &grid, cfg.seed, t))
        .collect()
}

/// Runs the Monte Carlo and reduces it to an error-rate estimate with its
/// binomial standard error. Deterministic for a fixed seed.
pub fn run_monte_carlo(cfg: &FeedbackSimConfig) -> Result<McEstimate, FeedbackError> {
    let outcomes = run_trials(cfg)?;
    let errors = outcomes.iter().filter(|o| !o.correct()).count() as f64;
    let n = outcomes.len() as f64;
    let pe = errors / n;
    Ok(McEstimate { pe_estimate: pe, std_error: (pe * (1.0 - pe) / n).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{helstrom_error, DolinarChannel};

    fn bpsk(alpha: f64, xi: f64) -> Constellation {
        Constellation::bpsk(alpha, xi).unwrap()
    }

    #[test]
    fn mi_rate_anchors() {
        assert_eq!(mi_rate(&[3.0, 3.0], &[0.5, 0.5]).unwrap(), 0.0);
        let v = mi_rate(&[0.0, 4.0], &[0.5, 0.5]).unwrap();
        assert!((v - 2.0 * std::f64::consts::LN_2).abs() < 1e-14);
        assert!(mi_rate(&[-1.0, 2.0], &[0.5, 0.5]).is_err());
        assert!(mi_rate(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn mi_rate_is_nonnegative_and_zero_only_at_equal_rates() {
        let mut rng = substream_rng(11, 0);
        for _ in 0..2000 {
            let k = 2 + (rng.random::<u64>() % 3) as usize;
            let lambdas: Vec<f64> = (0..k).map(|_| 10.0 * rng.random::<f64>()).collect();
            let mut priors: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
            let s: f64 = priors.iter().sum();
            priors.iter_mut().for_each(|p| *p /= s);
            let v = mi_rate(&lambdas, &priors).unwrap();
            assert!(v >= 0.0);
            let spread = lambdas
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &l| (lo.min(l), hi.max(l)));
            if v < 1e-12 {
                assert!(spread.1 - spread.0 < 1e-5, "zero rate with unequal lambdas");
            }
            let equal = vec![lambdas[0]; k];
            assert!(mi_rate(&equal, &priors).unwrap() < 1e-12);
        }
    }

    #[test]
    fn mi_rate_is_convex_per_coordinate() {
        let mut rng = substream_rng(12, 0);
        for _ in 0..500 {
            let base: Vec<f64> = (0..3).map(|_| 8.0 * rng.random::<f64>()).collect();
            let priors = [0.2, 0.5, 0.3];
            let (xa, xb) = (8.0 * rng.random::<f64>(), 8.0 * rng.random::<f64>());
            let at = |x: f64| {
                let mut l = base.clone();
                l[1] = x;
                mi_rate(&l, &priors).unwrap()
            };
            let mid = at(0.5 * (xa + xb));
            assert!(mid <= 0.5 * (at(xa) + at(xb)) + 1e-10);
        }
    }

    #[test]
    fn degenerate_posterior_returns_zero_lo() {
        let c = bpsk(1.0, 0.5);
        let lo = optimize_lo(&c, &[1.0, 0.0], 50.0).unwrap();
        assert_eq!(lo.amplitude, 0.0);
    }

    #[test]
    fn balanced_bpsk_pushes_amplitude_to_the_cap() {
        let c = bpsk(1.0, 0.5);
        let cap = 25.0;
        let lo = optimize_lo(&c, &[0.5, 0.5], cap).unwrap();
        assert!((lo.amplitude - cap).abs() < 1e-6 * cap);
        // Rate grows monotonically along the axis at balanced posteriors.
        let rate_lo = lo_rate(&c, &[0.5, 0.5], &lo);
        for frac in [0.2, 0.5, 0.9] {
            let weaker = LoControl { amplitude: frac * cap, phase: lo.phase, cap };
            assert!(lo_rate(&c, &[0.5, 0.5], &weaker) < rate_lo);
        }
    }

    #[test]
    fn skewed_bpsk_has_interior_stationary_optimum() {
        let c = bpsk(1.0, 0.5);
        let posterior = [0.9, 0.1];
        let lo = optimize_lo(&c, &posterior, 50.0).unwrap();
        assert!(lo.amplitude < 50.0 * 0.999);
        let (ra, rp) = stationarity_residuals(&c, &posterior, &lo).unwrap();
        assert!(ra.abs() <= 1e-8, "amplitude residual {ra}");
        assert!(rp.abs() <= 1e-8, "phase residual {rp}");
        let dist = lo.phase.min((lo.phase - std::f64::consts::PI).abs());
        assert!(dist < 1e-6, "phase {} not on the constellation axis", lo.phase);
    }

    #[test]
    fn optimizer_dominates_reference_grid() {
        // Includes a genuinely two-dimensional (non-collinear) alphabet.
        let tri = Constellation::new(
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(-0.4, 0.9),
                Complex64::new(-0.3, -0.8),
            ],
            vec![0.5, 0.3, 0.2],
        )
        .unwrap();
        let cases = [
            (tri.clone(), vec![0.6, 0.3, 0.1]),
            (tri, vec![0.2, 0.5, 0.3]),
            (bpsk(0.8, 0.5), vec![0.75, 0.25]),
        ];
        for (c, posterior) in cases {
            let cap = 12.0;
            let lo = optimize_lo(&c, &posterior, cap).unwrap();
            let achieved = lo_rate(&c, &posterior, &lo);
            let mut best = f64::NEG_INFINITY;
            for ia in 0..=200 {
                for ip in 0..64 {
                    let cand = LoControl {
                        amplitude: cap * ia as f64 / 200.0,
                        phase: std::f64::consts::TAU * ip as f64 / 64.0,
                        cap,
                    };
                    best = best.max(lo_rate(&c, &posterior, &cand));
                }
            }
            assert!(achieved >= best - 1e-9, "achieved {achieved} vs grid {best}");
        }
    }

    #[test]
    fn filter_step_tracks_bayes() {
        let c = bpsk(1.0, 0.5);
        let lo = LoControl { amplitude: 0.7, phase: 0.0, cap: 1.0 };
        let state = FilterState::from_priors(&c);
        // Equal rates leave the posterior unchanged.
        let equal = Constellation::new(
            vec![Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)],
            vec![0.3, 0.7],
        )
        .unwrap();
        let s = filter_step(&FilterState::from_priors(&equal), &equal, &lo, 1e-3, false).unwrap();
        assert!((s.posterior[0] - 0.3).abs() < 1e-15);

        // A count under a (numerically) nulled hypothesis collapses the
        // posterior; from_polar leaves a ~1e-16 phase residue, so the rate
        // is tiny rather than exactly zero.
        let nulling = LoControl { amplitude: 1.0, phase: std::f64::consts::PI, cap: 1.0 };
        let s = filter_step(&state, &c, &nulling, 1e-3, true).unwrap();
        assert!(s.posterior[1] < 1e-30);
        assert!(s.posterior[0] >= 1.0 - 1e-12);

        assert!(matches!(
            filter_step(&state, &c, &lo, 1.0, false),
            Err(FeedbackError::StepTooCoarse(_))
        ));
    }

    #[test]
    fn filter_matches_whole_path_likelihood_oracle() {
        let c = bpsk(0.9, 0.3);
        let mut rng = substream_rng(5, 3);
        let dt = 5e-4;
        let mut state = FilterState::from_priors(&c);
        let mut log_likelihood = vec![0.0f64; 2];
        for step in 0..10_000 {
            let lo = LoControl {
                amplitude: 1.5 * ((step as f64 * 0.01).sin().abs()),
                phase: if step % 2 == 0 { 0.0 } else { std::f64::consts::PI },
                cap: 2.0,
            };
            let count = rng.random::<f64>() < 0.002;
            let lambdas = rates(&c, lo.field());
            for (ll, &l) in log_likelihood.iter_mut().zip(&lambdas) {
                *ll += if count { (l * dt).ln() } else { -l * dt };
            }
            state = filter_step(&state, &c, &lo, dt, count).unwrap();
            let sum: f64 = state.posterior.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
        let w0 = c.priors()[0] * (log_likelihood[0] - log_likelihood[1]).exp();
        let oracle = w0 / (w0 + c.priors()[1]);
        assert!((state.posterior[0] - oracle).abs() < 1e-8);
    }

    #[test]
    fn high_separation_drives_error_to_zero() {
        let c = bpsk(2.0, 0.5);
        let mut cfg = FeedbackSimConfig::new(c);
        cfg.lo_cap = Some(4.0);
        cfg.trials = 1000;
        cfg.seed = 9;
        let est = run_monte_carlo(&cfg).unwrap();
        assert!(est.pe_estimate < 5e-3, "pe = {}", est.pe_estimate);
    }

    #[test]
    fn same_seed_reproduces_bit_for_bit() {
        let mut cfg = FeedbackSimConfig::new(bpsk(0.4, 0.5));
        cfg.trials = 400;
        cfg.seed = 42;
        let a = run_trials(&cfg).unwrap();
        let b = run_trials(&cfg).unwrap();
        assert_eq!(a, b);
        cfg.seed = 43;
        assert_ne!(run_trials(&cfg).unwrap(), a);
    }

    #[test]
    fn stderr_halves_when_trials_quadruple() {
        let mut cfg = FeedbackSimConfig::new(bpsk((0.05f64).sqrt(), 0.5));
        cfg.trials = 4000;
        cfg.seed = 7;
        let small = run_monte_carlo(&cfg).unwrap();
        cfg.trials = 16_000;
        let large = run_monte_carlo(&cfg).unwrap();
        let ratio = large.std_error / small.std_error;
        assert!((0.4..=0.6).contains(&ratio), "ratio = {ratio}");
    }

    #[test]
    fn error_rate_approaches_helstrom() {
        // One moderate-size cell; the full sweep lives in the acceptance
        // suite.
        let energy = 0.2f64;
        let mut cfg = FeedbackSimConfig::new(bpsk(energy.sqrt(), 0.5));
        cfg.trials = 20_000;
        cfg.seed = 1;
        let est = run_monte_carlo(&cfg).unwrap();
        let hel = helstrom_error(
            DolinarChannel::new((-4.0 * energy).exp(), 0.5).unwrap(),
        )
        .get();
        assert!(
            (est.pe_estimate - hel).abs() <= 4.0 * est.std_error,
            "pe = {}, helstrom = {hel}, stderr = {}",
            est.pe_estimate,
            est.std_error
        );
    }

    #[test]
    fn decisions_follow_count_parity() {
        let mut cfg = FeedbackSimConfig::new(bpsk((0.2f64).sqrt(), 0.5));
        cfg.trials = 10_000;
        cfg.seed = 3;
        let outcomes = run_trials(&cfg).unwrap();
        // Tally decisions by final-count parity; the receiver should flip
        // its decision on every count.
        let mut tally = [[0u64; 2]; 2];
        for o in &outcomes {
            tally[(o.counts % 2) as usize][o.decided] += 1;
        }
        let even_major = usize::from(tally[0][1] > tally[0][0]);
        let odd_major = usize::from(tally[1][1] > tally[1][0]);
        assert_ne!(even_major, odd_major);
        for (parity, major) in [(0, even_major), (1, odd_major)] {
            let consistent = tally[parity][major] as f64
                / (tally[parity][0] + tally[parity][1]) as f64;
            assert!(consistent >= 0.99, "parity {parity}: consistency {consistent}");
        }
    }

    #[test]
    fn config_validation() {
        let c = bpsk(1.0, 0.5);
        let mut cfg = FeedbackSimConfig::new(c.clone());
        cfg.trials = 0;
        assert_eq!(run_trials(&cfg).unwrap_err(), FeedbackError::NoTrials);
        let mut cfg = FeedbackSimConfig::new(c.clone());
        cfg.dt_factor = 0.02;
        assert_eq!(run_trials(&cfg).unwrap_err(), FeedbackError::InvalidDtFactor(0.02));
        let mut cfg = FeedbackSimConfig::new(c);
        cfg.lo_cap = Some(-1.0);
        assert_eq!(run_trials(&cfg).unwrap_err(), FeedbackError::InvalidCap(-1.0));
        assert!(Constellation::new(vec![Complex64::new(1.0, 0.0)], vec![1.0]).is_err());
        assert!(Constellation::bpsk(1.0, 0.6).is_ok());
        assert!(Constellation::bpsk(1.0, 1.5).is_err());
    }
}
