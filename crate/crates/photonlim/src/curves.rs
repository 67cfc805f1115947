//! Capacity and efficiency formulas for the standard modulation and receiver
//! pairings, their high-photon-efficiency asymptotics, curve sweeps over an
//! energy grid, and the link-geometry mode count.
//!
//! Efficiencies come in pairs: photon information efficiency (`pie`,
//! bits/photon) and dimensional information efficiency (`die`, bits/mode).

use crate::channel::{half_one_minus_sqrt_one_minus, mutual_information, DolinarChannel};
use crate::numerics::{h2, maximize_scalar_log};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

const LN_2: f64 = std::f64::consts::LN_2;
const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// Smallest prior searched when optimizing OOK duty cycles; the optimum
/// approaches zero at high photon efficiency, so the coarse grid is
/// log-spaced down to this floor.
const XI_FLOOR: f64 = 1e-6;
const XI_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum CurveError {
    #[error("energy must be nonnegative, got {0}")]
    NegativeEnergy(f64),
    #[error("energy must be positive, got {0}")]
    NonPositiveEnergy(f64),
    #[error("photon efficiency must be positive, got {0}")]
    NonPositivePie(f64),
    #[error("PPM order must be at least 2, got {0}")]
    PpmOrderTooSmall(u32),
    #[error("link geometry fields must be positive")]
    NonPositiveGeometry,
    #[error("energy grid is empty")]
    EmptyGrid,
    #[error("energy grid must be positive and sorted ascending")]
    UnsortedGrid,
    #[error("photon efficiency {0} outside the solvable range [{1}, {2}]")]
    PieOutOfRange(f64, f64, f64),
    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),
}

/// One point of a DIE vs. PIE tradeoff curve.
///
/// `energy` is the sweep parameter that produced the point (mean photons per
/// mode, or per pulse for the PPM envelope). `aux` carries the inner
/// optimizer's value where one exists: the optimizing duty cycle for OOK
/// schemes, or the real-valued optimal PPM order. `pie` is `+inf` only at
/// `energy = 0`, where bits per photon is unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffPoint {
    pub energy: f64,
    pub pie: f64,
    pub die: f64,
    pub aux: Option<f64>,
}

/// Free-space link geometry determining the number of usable modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    /// Time-bandwidth product BT.
    pub bandwidth_time_product: f64,
    /// Fresnel number product A_T A_R / (lambda L)^2.
    pub fresnel_product: f64,
    /// 1 or 2 polarizations.
    pub polarizations: u8,
}

/// Number of independent spatio-temporal-polarization modes of the link.
pub fn mode_count(g: &LinkGeometry) -> Result<f64, CurveError> {
    if g.bandwidth_time_product <= 0.0
        || g.fresnel_product <= 0.0
        || !(1..=2).contains(&g.polarizations)
    {
        return Err(CurveError::NonPositiveGeometry);
    }
    Ok(f64::from(g.polarizations) * g.bandwidth_time_product * g.fresnel_product)
}

/// The tradeoff curves of the standard modulation/receiver pairings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    HolevoUnconstrained,
    Heterodyne,
    Homodyne,
    PpmCountingOptimal,
    PpmCountingFixedM(u32),
    OokCounting,
    OokDolinar,
    BpskDolinar,
    OokHolevo,
    BpskHolevo,
    Approx1,
    Approx2,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::HolevoUnconstrained => write!(f, "holevo"),
            Scheme::Heterodyne => write!(f, "heterodyne"),
            Scheme::Homodyne => write!(f, "homodyne"),
            Scheme::PpmCountingOptimal => write!(f, "ppm-counting-optimal"),
            Scheme::PpmCountingFixedM(m) => write!(f, "ppm-counting-fixed-m:{m}"),
            Scheme::OokCounting => write!(f, "ook-counting"),
            Scheme::OokDolinar => write!(f, "ook-dolinar"),
            Scheme::BpskDolinar => write!(f, "bpsk-dolinar"),
            Scheme::OokHolevo => write!(f, "ook-holevo"),
            Scheme::BpskHolevo => write!(f, "bpsk-holevo"),
            Scheme::Approx1 => write!(f, "approx1"),
            Scheme::Approx2 => write!(f, "approx2"),
        }
    }
}

impl FromStr for Scheme {
    type Err = CurveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "holevo" => Scheme::HolevoUnconstrained,
            "heterodyne" => Scheme::Heterodyne,
            "homodyne" => Scheme::Homodyne,
            "ppm-counting-optimal" => Scheme::PpmCountingOptimal,
            "ook-counting" => Scheme::OokCounting,
            "ook-dolinar" => Scheme::OokDolinar,
            "bpsk-dolinar" => Scheme::BpskDolinar,
            "ook-holevo" => Scheme::OokHolevo,
            "bpsk-holevo" => Scheme::BpskHolevo,
            "approx1" => Scheme::Approx1,
            "approx2" => Scheme::Approx2,
            other => {
                if let Some(m) = other.strip_prefix("ppm-counting-fixed-m:") {
                    let m: u32 = m
                        .parse()
                        .map_err(|_| CurveError::UnknownScheme(other.to_string()))?;
                    if m < 2 {
                        return Err(CurveError::PpmOrderTooSmall(m));
                    }
                    Scheme::PpmCountingFixedM(m)
                } else {
                    return Err(CurveError::UnknownScheme(other.to_string()));
                }
            }
        })
    }
}

fn require_positive(energy: f64) -> Result<f64, CurveError> {
    if energy > 0.0 && energy.is_finite() {
        Ok(energy)
    } else {
        Err(CurveError::NonPositiveEnergy(energy))
    }
}

fn require_nonnegative(energy: f64) -> Result<f64, CurveError> {
    if energy >= 0.0 && energy.is_finite() {
        Ok(energy)
    } else {
        Err(CurveError::NegativeEnergy(energy))
    }
}

/// Capacity in bits per PPM symbol: (1 - e^{-E}) log2 M, with `E` the mean
/// photon count of the pulse slot.
pub fn ppm_capacity(energy: f64, order: u32) -> Result<f64, CurveError> {
    if order < 2 {
        return Err(CurveError::PpmOrderTooSmall(order));
    }
    let energy = require_nonnegative(energy)?;
    Ok(-(-energy).exp_m1() * f64::from(order).log2())
}

fn ppm_fixed_point(energy: f64, order: u32) -> Result<TradeoffPoint, CurveError> {
    let c = ppm_capacity(energy, order)?;
    Ok(TradeoffPoint {
        energy,
        pie: if energy > 0.0 { c / energy } else { f64::INFINITY },
        die: c / f64::from(order),
        aux: None,
    })
}

/// Photon efficiency of the optimal real-order PPM system at pulse energy
/// `e_star`: (1 - e^{-E})^2 / (E ln2 (1 - (1 + E) e^{-E})).
pub fn ppm_optimal_pie(e_star: f64) -> f64 {
    let om = -(-e_star).exp_m1();
    let den = om - e_star * (-e_star).exp();
    om * om / (e_star * LN_2 * den)
}

/// log2 of the optimizing real-valued PPM order at pulse energy `e_star`.
/// The order itself overflows f64 below roughly E* = 3e-3, so growth
/// checks use this form.
pub fn ppm_optimal_log2_order(e_star: f64) -> f64 {
    let om = -(-e_star).exp_m1();
    let den = om - e_star * (-e_star).exp();
    om / (den * LN_2)
}

/// The optimal PPM tradeoff point at pulse energy `e_star`, with the order
/// allowed to be real-valued. `aux` is the optimizing order M*.
pub fn ppm_optimal_point(e_star: f64) -> Result<TradeoffPoint, CurveError> {
    let e_star = require_positive(e_star)?;
    let om = -(-e_star).exp_m1();
    let den = om - e_star * (-e_star).exp();
    let pie = om * om / (e_star * LN_2 * den);
    let log2_order = om / (den * LN_2);
    let die = om * om * (-om / den).exp() / (LN_2 * den);
    Ok(TradeoffPoint {
        energy: e_star,
        pie,
        die,
        // Saturates to +inf once log2 M* passes 1024; see
        // `ppm_optimal_log2_order`.
        aux: Some(log2_order.exp2()),
    })
}

/// Inverts [`ppm_optimal_pie`] by bisection (it is strictly decreasing) and
/// returns the parametric point achieving photon efficiency `pie`.
pub fn ppm_point_at_pie(pie: f64) -> Result<TradeoffPoint, CurveError> {
    if !(pie > 0.0) {
        return Err(CurveError::NonPositivePie(pie));
    }
    let (mut lo, mut hi) = (1e-12, 60.0);
    let (pie_hi, pie_lo) = (ppm_optimal_pie(lo), ppm_optimal_pie(hi));
    if pie >= pie_hi || pie <= pie_lo {
        return Err(CurveError::PieOutOfRange(pie, pie_lo, pie_hi));
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if ppm_optimal_pie(mid) > pie {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    ppm_optimal_point((lo * hi).sqrt())
}

/// Dimensional efficiency at the unconstrained Holevo limit:
/// (E+1) log2(E+1) - E log2 E photons per mode.
pub fn holevo_die(energy: f64) -> f64 {
    if energy <= 0.0 {
        return 0.0;
    }
    (energy + 1.0) * energy.ln_1p() / LN_2 - energy * energy.log2()
}

/// The ultimate quantum-limit tradeoff point at `energy` photons per mode.
pub fn holevo_unconstrained(energy: f64) -> Result<TradeoffPoint, CurveError> {
    let energy = require_nonnegative(energy)?;
    let die = holevo_die(energy);
    Ok(TradeoffPoint {
        energy,
        pie: if energy > 0.0 { die / energy } else { f64::INFINITY },
        die,
        aux: None,
    })
}

/// Inverts the Holevo photon efficiency by bisection on the energy.
pub fn holevo_point_at_pie(pie: f64) -> Result<TradeoffPoint, CurveError> {
    if !(pie > 0.0) {
        return Err(CurveError::NonPositivePie(pie));
    }
    let (mut lo, mut hi) = (1e-18, 1e9);
    let (pie_hi, pie_lo) = (holevo_die(lo) / lo, holevo_die(hi) / hi);
    if pie >= pie_hi || pie <= pie_lo {
        return Err(CurveError::PieOutOfRange(pie, pie_lo, pie_hi));
    }
    for _ in 0..300 {
        let mid = (lo * hi).sqrt();
        if holevo_die(mid) / mid > pie {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    holevo_unconstrained((lo * hi).sqrt())
}

/// Heterodyne detection with optimal coherent-state modulation:
/// die = log2(1 + E). Photon efficiency hits the log2 e brick wall.
pub fn heterodyne(energy: f64) -> Result<TradeoffPoint, CurveError> {
    let energy = require_nonnegative(energy)?;
    let die = energy.ln_1p() / LN_2;
    Ok(TradeoffPoint {
        energy,
        pie: if energy > 0.0 { die / energy } else { LOG2_E },
        die,
        aux: None,
    })
}

/// Homodyne detection: die = (1/2) log2(1 + 4E), brick wall at 2 log2 e.
pub fn homodyne(energy: f64) -> Result<TradeoffPoint, CurveError> {
    let energy = require_nonnegative(energy)?;
    let die = 0.5 * (4.0 * energy).ln_1p() / LN_2;
    Ok(TradeoffPoint {
        energy,
        pie: if energy > 0.0 { die / energy } else { 2.0 * LOG2_E },
        die,
        aux: None,
    })
}

/// Holevo information of a binary pure-state ensemble with overlap `s` and
/// priors (xi, 1-xi): the entropy of the mixture,
/// H2((1 - sqrt(1 - 4 xi (1-xi)(1-s))) / 2).
pub fn binary_pure_holevo(s: f64, xi: f64) -> f64 {
    h2(half_one_minus_sqrt_one_minus(4.0 * xi * (1.0 - xi) * (1.0 - s)))
}

/// BPSK with a Dolinar receiver: die = 1 - H2((1 - sqrt(1 - e^{-4E})) / 2).
pub fn bpsk_dolinar_capacity(energy: f64) -> Result<TradeoffPoint, CurveError> {
    let energy = require_nonnegative(energy)?;
    // Both e^{-4E} and 1 - e^{-4E} are formed without cancellation, so the
    // error probability is accurate at either end of the energy range.
    let s = (-4.0 * energy).exp();
    let one_minus_s = -(-4.0 * energy).exp_m1();
    let error = s / (2.0 * (1.0 + one_minus_s.sqrt()));
    let die = 1.0 - h2(error);
    Ok(TradeoffPoint {
        energy,
        pie: if energy > 0.0 { die / energy } else { 2.0 * LOG2_E },
        die,
        aux: None,
    })
}

/// BPSK at the Holevo limit: die = H2((1 - e^{-2E}) / 2).
pub fn bpsk_holevo_capacity(energy: f64) -> Result<TradeoffPoint, CurveError> {
    let energy = require_nonnegative(energy)?;
    let die = h2(-(-2.0 * energy).exp_m1() / 2.0);
    Ok(TradeoffPoint {
        energy,
        pie: if energy > 0.0 { die / energy } else { f64::INFINITY },
        die,
        aux: None,
    })
}

/// Z-channel mutual information of OOK with photon counting at mean energy
/// `energy` per slot and duty cycle `xi`: the ON pulse carries `energy / xi`
/// photons, a click identifies it with probability 1 - e^{-energy/xi}.
pub fn ook_counting_mi(energy: f64, xi: f64) -> f64 {
    let miss = (-energy / xi).exp();
    h2(xi * -(-energy / xi).exp_m1()) - xi * h2(miss)
}

/// Dolinar-receiver mutual information of OOK at duty cycle `xi <= 1/2`.
pub fn ook_dolinar_mi(energy: f64, xi: f64) -> f64 {
    let ch = DolinarChannel::new((-energy / xi).exp(), xi)
        .expect("duty cycle restricted to (0, 1/2]");
    mutual_information(ch).get()
}

/// Holevo information of the OOK ensemble at duty cycle `xi`.
pub fn ook_holevo_chi(energy: f64, xi: f64) -> f64 {
    binary_pure_holevo((-energy / xi).exp(), xi)
}

fn optimized_ook(
    energy: f64,
    hi: f64,
    objective: impl Fn(f64) -> f64,
) -> Result<TradeoffPoint, CurveError> {
    let energy = require_positive(energy)?;
    let (xi, die) = maximize_scalar_log(objective, XI_FLOOR, hi, XI_TOL)
        .expect("OOK objective is finite on the duty-cycle bracket");
    Ok(TradeoffPoint {
        energy,
        pie: die / energy,
        die,
        aux: Some(xi),
    })
}

/// OOK with photon counting, maximized over the duty cycle.
pub fn ook_counting_capacity(energy: f64) -> Result<TradeoffPoint, CurveError> {
    optimized_ook(energy, 1.0, |xi| ook_counting_mi(energy, xi))
}

/// OOK with a Dolinar receiver, maximized over the duty cycle in (0, 1/2].
pub fn ook_dolinar_capacity(energy: f64) -> Result<TradeoffPoint, CurveError> {
    optimized_ook(energy, 0.5, |xi| ook_dolinar_mi(energy, xi))
}

/// OOK at the Holevo limit, maximized over the duty cycle.
pub fn ook_holevo_capacity(energy: f64) -> Result<TradeoffPoint, CurveError> {
    optimized_ook(energy, 0.5, |xi| ook_holevo_chi(energy, xi))
}

/// High-PIE asymptote of the optimal PPM + counting curve:
/// die = (2 / (e ln 2)) 2^{-pie} (about 1.061 x 2^{-pie}).
pub fn approx1(pie: f64) -> f64 {
    2.0 / (std::f64::consts::E * LN_2) * (-pie).exp2()
}

/// High-PIE asymptote of the unconstrained Holevo curve:
/// die = e pie 2^{-pie}.
pub fn approx2(pie: f64) -> f64 {
    std::f64::consts::E * pie * (-pie).exp2()
}

/// BPSK Holevo capacity as a function of the state overlap: H2((1-sqrt(s))/2).
pub fn bpsk_holevo_of_overlap(s: f64) -> f64 {
    h2(half_one_minus_sqrt_one_minus(1.0 - s))
}

/// BPSK Dolinar capacity as a function of the state overlap:
/// 1 - H2((1-sqrt(1-s))/2).
pub fn bpsk_dolinar_of_overlap(s: f64) -> f64 {
    1.0 - h2(half_one_minus_sqrt_one_minus(s))
}

/// C_Holevo(s) + C_Dolinar(1 - s) for BPSK; equal to 1 bit for every
/// overlap, the two receivers being exactly complementary.
pub fn reciprocal_identity(s: f64) -> f64 {
    bpsk_holevo_of_overlap(s) + bpsk_dolinar_of_overlap(1.0 - s)
}

/// Evaluates one scheme over a grid, emitting points in grid order.
///
/// The grid holds mean photons per mode, except for `PpmCountingOptimal`
/// (pulse energy E*, the parametric sweep variable) and the two asymptotic
/// approximations (photon efficiency, their natural argument).
pub fn tradeoff_curve(scheme: Scheme, grid: &[f64]) -> Result<Vec<TradeoffPoint>, CurveError> {
    if grid.is_empty() {
        return Err(CurveError::EmptyGrid);
    }
    if grid.iter().any(|&e| !(e > 0.0) || !e.is_finite())
        || grid.windows(2).any(|w| w[0] > w[1])
    {
        return Err(CurveError::UnsortedGrid);
    }
    grid.iter()
        .map(|&e| match scheme {
            Scheme::HolevoUnconstrained => holevo_unconstrained(e),
            Scheme::Heterodyne => heterodyne(e),
            Scheme::Homodyne => homodyne(e),
            Scheme::PpmCountingOptimal => ppm_optimal_point(e),
            Scheme::PpmCountingFixedM(m) => ppm_fixed_point(e, m),
            Scheme::OokCounting => ook_counting_capacity(e),
            Scheme::OokDolinar => ook_dolinar_capacity(e),
            Scheme::BpskDolinar => bpsk_dolinar_capacity(e),
            Scheme::OokHolevo => ook_holevo_capacity(e),
            Scheme::BpskHolevo => bpsk_holevo_capacity(e),
            Scheme::Approx1 => Ok(TradeoffPoint { energy: e, pie: e, die: approx1(e), aux: None }),
            Scheme::Approx2 => Ok(TradeoffPoint { energy: e, pie: e, die: approx2(e), aux: None }),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const E: f64 = std::f64::consts::E;

    #[test]
    fn mode_count_multiplies_the_dimensions() {
        let g = |bt, fresnel, pol| LinkGeometry {
            bandwidth_time_product: bt,
            fresnel_product: fresnel,
            polarizations: pol,
        };
        assert_eq!(mode_count(&g(1.0, 1.0, 2)).unwrap(), 2.0);
        assert_eq!(mode_count(&g(1.0, 1.0, 1)).unwrap(), 1.0);
        assert_eq!(mode_count(&g(10.0, 2.5, 2)).unwrap(), 50.0);
        assert!(mode_count(&g(-1.0, 1.0, 1)).is_err());
        assert!(mode_count(&g(1.0, 1.0, 3)).is_err());
    }

    #[test]
    fn ppm_capacity_anchors() {
        assert!((ppm_capacity(1e3, 16).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(ppm_capacity(0.0, 4).unwrap(), 0.0);
        // Frozen: 1 - e^{-1}.
        assert!((ppm_capacity(1.0, 2).unwrap() - 0.632120558828558).abs() < 1e-14);
        assert_eq!(ppm_capacity(1.0, 1), Err(CurveError::PpmOrderTooSmall(1)));
    }

    #[test]
    fn ppm_optimal_matches_direct_evaluation() {
        // Frozen: (1-e^{-1})^2 / (ln2 (1 - 2 e^{-1})).
        let p = ppm_optimal_point(1.0).unwrap();
        assert!((p.pie - 2.181594208868269).abs() < 1e-13);
        assert!((p.die - 0.199457261601070).abs() < 1e-13);
        assert!((p.aux.unwrap().log2() - 3.451231222270618).abs() < 1e-12);
    }

    #[test]
    fn ppm_optimal_low_energy_asymptote() {
        // E* c_p -> 2 / ln 2 as E* -> 0.
        let p = ppm_optimal_point(1e-6).unwrap();
        assert!((p.energy * p.pie - 2.0 / LN_2).abs() < 1e-5);
        // E* log2 M* -> 2 / ln 2, checked at E* = 1e-4 within 1%.
        let lim = 2.0 / LN_2;
        assert!((1e-4 * ppm_optimal_log2_order(1e-4) - lim).abs() / lim < 0.01);
        // The order itself is representable at moderate energies and agrees.
        let p = ppm_optimal_point(1.0).unwrap();
        assert!((p.aux.unwrap().log2() - ppm_optimal_log2_order(1.0)).abs() < 1e-12);
    }

    #[test]
    fn ppm_optimal_satisfies_identity() {
        // log2 c_d + c_p = log2(E* c_p) + c_p (1 - E*/(1 - e^{-E*})).
        for e_star in [0.01, 0.1, 0.5, 1.0, 3.0] {
            let p = ppm_optimal_point(e_star).unwrap();
            let lhs = p.die.log2() + p.pie;
            let om = -(-e_star).exp_m1();
            let rhs = (e_star * p.pie).log2() + p.pie * (1.0 - e_star / om);
            assert!((lhs - rhs).abs() < 1e-9, "E* = {e_star}");
        }
    }

    #[test]
    fn ppm_pie_inversion_round_trips() {
        for pie in [0.5, 2.0, 4.0, 10.0, 20.0] {
            let p = ppm_point_at_pie(pie).unwrap();
            assert!((p.pie - pie).abs() / pie < 1e-12, "pie = {pie}");
        }
        assert!(ppm_point_at_pie(0.0).is_err());
        assert!(ppm_point_at_pie(1e13).is_err());
    }

    #[test]
    fn holevo_anchors() {
        assert_eq!(holevo_unconstrained(1.0).unwrap().die, 2.0);
        assert_eq!(holevo_unconstrained(0.0).unwrap().die, 0.0);
        assert_eq!(holevo_unconstrained(0.0).unwrap().pie, f64::INFINITY);
        // log2(c_d / c_p) + c_p -> log2 e as E -> 0.
        let p = holevo_unconstrained(1e-7).unwrap();
        assert!(((p.die / p.pie).log2() + p.pie - LOG2_E).abs() < 1e-6);
    }

    #[test]
    fn quadrature_receiver_brick_walls() {
        let het = heterodyne(1e-6).unwrap();
        assert!((het.pie - LOG2_E).abs() / LOG2_E < 1e-3);
        let hom = homodyne(1e-6).unwrap();
        assert!((hom.pie - 2.0 * LOG2_E).abs() / (2.0 * LOG2_E) < 1e-3);
        assert_eq!(heterodyne(1.0).unwrap().die, 1.0);
        assert!(heterodyne(-0.5).is_err());
    }

    #[test]
    fn binary_pure_holevo_reduces_to_bpsk_form() {
        for energy in [1e-4f64, 0.1, 0.5, 2.0, 10.0] {
            let chi = binary_pure_holevo((-4.0 * energy).exp(), 0.5);
            let direct = h2(-(-2.0 * energy).exp_m1() / 2.0);
            assert!((chi - direct).abs() < 1e-12, "E = {energy}");
        }
        assert_eq!(binary_pure_holevo(1.0, 0.3), 0.0);
        assert!((binary_pure_holevo(0.0, 0.3) - h2(0.3)).abs() < 1e-15);
    }

    #[test]
    fn bpsk_dolinar_anchors() {
        // Frozen: 1 - H2((1 - sqrt(1 - e^{-2})) / 2).
        let p = bpsk_dolinar_capacity(0.5).unwrap();
        assert!((p.die - 0.780819689265392).abs() < 1e-13);
        assert!((bpsk_dolinar_capacity(20.0).unwrap().die - 1.0).abs() < 1e-9);
        let low = bpsk_dolinar_capacity(1e-6).unwrap();
        assert!((low.pie - 2.0 * LOG2_E).abs() / (2.0 * LOG2_E) < 1e-3);
    }

    #[test]
    fn ook_counting_degenerate_duty_cycle_conveys_nothing() {
        assert_eq!(ook_counting_mi(0.7, 1.0), 0.0);
    }

    #[test]
    fn ook_capacities_approach_one_bit() {
        assert!((ook_counting_capacity(30.0).unwrap().die - 1.0).abs() < 1e-6);
        assert!((ook_dolinar_capacity(30.0).unwrap().die - 1.0).abs() < 1e-6);
    }

    #[test]
    fn ook_optimizers_match_dense_grid_oracle() {
        fn grid_max(hi: f64, obj: impl Fn(f64) -> f64) -> f64 {
            let n = 200_000;
            (0..=n)
                .map(|i| {
                    let xi =
                        (XI_FLOOR.ln() + (hi.ln() - XI_FLOOR.ln()) * i as f64 / n as f64).exp();
                    obj(xi.min(hi))
                })
                .fold(f64::NEG_INFINITY, f64::max)
        }
        let energy = 0.1;
        let cases = [
            (ook_counting_capacity(energy).unwrap(), 1.0, 0usize),
            (ook_dolinar_capacity(energy).unwrap(), 0.5, 1),
            (ook_holevo_capacity(energy).unwrap(), 0.5, 2),
        ];
        for (point, hi, which) in cases {
            let best = grid_max(hi, |xi| match which {
                0 => ook_counting_mi(energy, xi),
                1 => ook_dolinar_mi(energy, xi),
                _ => ook_holevo_chi(energy, xi),
            });
            assert!(point.die >= best - 1e-9, "case {which}");
            assert!(point.die <= best + 1e-7, "case {which}");
        }
    }

    #[test]
    fn ook_dolinar_duty_cycle_shrinks_at_high_pie() {
        let lo = ook_dolinar_capacity(1e-3).unwrap().aux.unwrap();
        let hi = ook_dolinar_capacity(1.0).unwrap().aux.unwrap();
        assert!(lo < hi);
        assert!(lo < 0.05);
    }

    #[test]
    fn dominance_ordering_holds() {
        for i in 0..40 {
            let energy = 10f64.powf(-4.0 + 5.0 * i as f64 / 39.0);
            let hol = holevo_unconstrained(energy).unwrap().die;
            let ook_hol = ook_holevo_capacity(energy).unwrap().die;
            let ook_dol = ook_dolinar_capacity(energy).unwrap().die;
            let ook_cnt = ook_counting_capacity(energy).unwrap().die;
            assert!(hol >= ook_hol - 1e-9, "E = {energy}");
            assert!(ook_hol >= ook_dol - 1e-9, "E = {energy}");
            assert!(ook_dol >= ook_cnt - 1e-9, "E = {energy}");
        }
    }

    #[test]
    fn approximation_anchors() {
        for pie in [0.5, 1.0, 4.0, 12.0] {
            assert!((approx1(pie) * pie.exp2() - 2.0 / (E * LN_2)).abs() < 1e-15);
            let ratio = approx2(pie) / approx1(pie);
            assert!((ratio - E * E * LN_2 / 2.0 * pie).abs() < 1e-12);
        }
        assert!((approx2(1.0) - E / 2.0).abs() < 1e-15);
    }

    #[test]
    fn reciprocal_identity_is_exact() {
        for i in 0..=100 {
            let s = i as f64 / 100.0;
            assert!((reciprocal_identity(s) - 1.0).abs() < 1e-15, "s = {s}");
        }
    }

    #[test]
    fn curve_emits_points_in_grid_order() {
        let pts = tradeoff_curve(Scheme::HolevoUnconstrained, &[1.0]).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].die, 2.0);
        assert!((pts[0].pie - 2.0).abs() < 1e-15);

        let grid: Vec<f64> = (0..30).map(|i| 10f64.powf(-3.0 + 4.0 * i as f64 / 29.0)).collect();
        let pts = tradeoff_curve(Scheme::BpskDolinar, &grid).unwrap();
        for w in pts.windows(2) {
            assert!(w[1].die > w[0].die);
            assert!(w[1].pie < w[0].pie);
        }
        // approx1 in (pie, log2 die) space is a line of slope -1.
        let pts = tradeoff_curve(Scheme::Approx1, &[2.0, 3.0, 7.5]).unwrap();
        for w in pts.windows(2) {
            let slope = (w[1].die.log2() - w[0].die.log2()) / (w[1].energy - w[0].energy);
            assert!((slope + 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn curve_rejects_bad_grids() {
        assert_eq!(tradeoff_curve(Scheme::Heterodyne, &[]), Err(CurveError::EmptyGrid));
        assert_eq!(
            tradeoff_curve(Scheme::Heterodyne, &[1.0, 0.5]),
            Err(CurveError::UnsortedGrid)
        );
        assert_eq!(
            tradeoff_curve(Scheme::Heterodyne, &[0.0, 0.5]),
            Err(CurveError::UnsortedGrid)
        );
    }

    #[test]
    fn die_equals_pie_times_energy_per_dimension() {
        for energy in [0.01, 0.3, 2.0] {
            for scheme in [
                Scheme::HolevoUnconstrained,
                Scheme::Heterodyne,
                Scheme::Homodyne,
                Scheme::OokCounting,
                Scheme::OokDolinar,
                Scheme::BpskDolinar,
                Scheme::OokHolevo,
                Scheme::BpskHolevo,
            ] {
                let p = tradeoff_curve(scheme, &[energy]).unwrap()[0];
                assert!((p.die - p.pie * p.energy).abs() <= 1e-9 * p.die.max(1.0));
            }
            let p = ppm_optimal_point(energy).unwrap();
            let per_dim = p.energy / p.aux.unwrap();
            assert!((p.die - p.pie * per_dim).abs() <= 1e-9);
        }
    }

    #[test]
    fn scheme_names_round_trip() {
        let names = [
            "holevo",
            "heterodyne",
            "homodyne",
            "ppm-counting-optimal",
            "ppm-counting-fixed-m:16",
            "ook-counting",
            "ook-dolinar",
            "bpsk-dolinar",
            "ook-holevo",
            "bpsk-holevo",
            "approx1",
            "approx2",
        ];
        for name in names {
            let scheme: Scheme = name.parse().unwrap();
            assert_eq!(scheme.to_string(), name);
        }
        assert!("ppm".parse::<Scheme>().is_err());
        assert!("ppm-counting-fixed-m:1".parse::<Scheme>().is_err());
    }
}
