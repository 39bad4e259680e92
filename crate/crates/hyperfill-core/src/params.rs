//! Trace-existence parameters.
//!
//! Whether boundary traces exist is decided by two scalar quantities built
//! from the weight. With `eps = log alpha` and `p > 1`, write
//!
//! ```text
//! W(t) = e^(-eps p t / (p-1)) rho(t)^(1/(1-p))
//! ```
//!
//! The first parameter is `R = int_0^inf W(t) dt` (for `p = 1` it is the
//! essential supremum of `e^(-eps t)/rho(t)` instead). The second refines
//! it when the filling has infinite measure: split `[0, inf)` into
//! consecutive cells `O_k` of unit `rho`-mass and take `sup_k int_(O_k) W`
//! — a sum becomes a sup, so the refined parameter can stay finite while
//! `R` blows up. When the measure is finite (integrable `rho`) the two
//! are defined to coincide, and for `p = 1` they coincide always.
//!
//! The dichotomy these feed: the refined parameter is finite exactly when
//! every Sobolev function on the filling has a boundary trace; `R` is
//! finite exactly when the same holds for the homogeneous space; and under
//! infinite measure with finite refined parameter, all those traces vanish
//! almost everywhere.
//!
//! Numeric conventions, used consistently everywhere in this module:
//! infinity is *flagged*, never computed — either from the family's
//! closed-form tail (an analytic certificate) or when partial integrals
//! pass the `1e12` guard (provenance recorded in the flag); integrands are
//! evaluated in log space so `rho^(1/(1-p))` survives weights like
//! `e^(-t^2)`; and unknown tails produce flagged lower bounds rather than
//! silent truncations.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::math;
use crate::measure::{MassEstimate, RadialFamily, RadialWeight, TailBehavior};

/// Partial values above this are flagged as infinite (numeric provenance).
pub const OVERFLOW_GUARD: f64 = 1e12;
/// Default integration horizon.
pub const DEFAULT_T_MAX: f64 = 80.0;
/// Default cap on unit-mass cells.
pub const DEFAULT_MAX_CELLS: usize = 200;
/// Dense-sampling rate (per unit interval) for the p = 1 supremum.
pub const ESS_SUP_SAMPLES: usize = 4096;
/// Default mass tolerance for the unit-mass partition.
pub const PARTITION_TOL: f64 = 1e-12;

/// Failures of the parameter computations.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamError {
    /// The weight carries less than one unit of mass on the horizon, so
    /// no unit-mass cell exists.
    InsufficientMass { available: f64 },
    /// The weight fails the admissibility test the trace theory assumes.
    HypothesisViolation { detail: String },
}

impl core::fmt::Display for ParamError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ParamError::InsufficientMass { available } => {
                write!(f, "insufficient weight mass on the horizon ({available} < 1)")
            }
            ParamError::HypothesisViolation { detail } => {
                write!(f, "weight fails the admissibility hypothesis: {detail}")
            }
        }
    }
}

impl core::error::Error for ParamError {}

/// A possibly-infinite parameter value with provenance.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Finite(f64),
    /// Finite on the computed horizon but with an unresolved tail.
    LowerBound { value: f64, reason: String },
    Infinite { certificate: String },
}

impl ParamValue {
    pub fn known_finite(&self) -> bool {
        matches!(self, ParamValue::Finite(_))
    }

    pub fn known_infinite(&self) -> bool {
        matches!(self, ParamValue::Infinite { .. })
    }

    /// `Some(true)` = known finite, `Some(false)` = known infinite,
    /// `None` = undecided (lower bound only).
    pub fn decided(&self) -> Option<bool> {
        match self {
            ParamValue::Finite(_) => Some(true),
            ParamValue::Infinite { .. } => Some(false),
            ParamValue::LowerBound { .. } => None,
        }
    }

    /// Numeric content when not flagged infinite.
    pub fn value(&self) -> Option<f64> {
        match self {
            ParamValue::Finite(v) | ParamValue::LowerBound { value: v, .. } => Some(*v),
            ParamValue::Infinite { .. } => None,
        }
    }
}

impl core::fmt::Display for ParamValue {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ParamValue::Finite(v) => write!(f, "{v}"),
            ParamValue::LowerBound { value, reason } => write!(f, ">= {value} ({reason})"),
            ParamValue::Infinite { certificate } => write!(f, "infinity ({certificate})"),
        }
    }
}

/// `log W(t)` for `p > 1`: the integrand of `R` in log space.
pub fn rp_log_integrand(rho: &RadialWeight, p: f64, eps: f64, t: f64) -> f64 {
    debug_assert!(p > 1.0);
    -eps * p * t / (p - 1.0) + rho.log_eval(t) / (1.0 - p)
}

/// `W(t) = e^(-eps p t/(p-1)) rho(t)^(1/(1-p))` for `p > 1`.
pub fn rp_integrand(rho: &RadialWeight, p: f64, eps: f64, t: f64) -> f64 {
    math::exp(rp_log_integrand(rho, p, eps, t))
}

/// `log (e^(-eps t) / rho(t))`: the p = 1 ratio in log space.
pub fn p1_log_ratio(rho: &RadialWeight, eps: f64, t: f64) -> f64 {
    -eps * t - rho.log_eval(t)
}

/// `e^(-eps t) / rho(t)`.
pub fn p1_ratio(rho: &RadialWeight, eps: f64, t: f64) -> f64 {
    math::exp(p1_log_ratio(rho, eps, t))
}

/// Closed-form behavior of an integral (or sup) on `[from, infinity)`.
enum TailClass {
    /// Value of the tail contribution (an upper bound where a polynomial
    /// factor only helps; the overshoot is below the quadrature noise).
    Converges(f64),
    Diverges(String),
    Unknown,
}

/// Tail of `int W` past `from` (`from` beyond the weight's structure).
fn rp_tail(rho: &RadialWeight, p: f64, eps: f64, from: f64) -> TailClass {
    let exp_tail = |lambda: f64| -> TailClass {
        // rho ~ e^(-lambda t) makes W ~ e^(-r t) with this net rate:
        let r = (eps * p - lambda) / (p - 1.0);
        if r > 0.0 {
            TailClass::Converges(rp_integrand(rho, p, eps, from) / r)
        } else if r == 0.0 {
            TailClass::Diverges(String::from(
                "analytic: the integrand is constant on an unbounded tail",
            ))
        } else {
            TailClass::Diverges(String::from(
                "analytic: the integrand grows exponentially on the tail",
            ))
        }
    };
    match rho.family() {
        RadialFamily::Constant { .. } => exp_tail(0.0),
        RadialFamily::ExpRate { lambda } => exp_tail(*lambda),
        RadialFamily::Bbs { theta, p: pw, eps: ew } => exp_tail(ew * pw * (1.0 - theta)),
        RadialFamily::Example11 { .. } => TailClass::Diverges(String::from(
            "analytic: the integrand grows like e^(t^2/(p-1))",
        )),
        RadialFamily::Piecewise { rates, .. } => exp_tail(*rates.last().unwrap()),
        RadialFamily::Dip { center, power, rate, .. } => {
            let r = (eps * p - rate) / (p - 1.0);
            let q = power / (p - 1.0);
            if r > 0.0 {
                // The polynomial factor decays past the pinch; bound by
                // the pure exponential.
                TailClass::Converges(rp_integrand(rho, p, eps, from) / r)
            } else if r == 0.0 && q > 1.0 {
                // W ~ (t - center)^(-q): integrable tail.
                TailClass::Converges(
                    rp_integrand(rho, p, eps, from) * (from - center) / (q - 1.0),
                )
            } else {
                TailClass::Diverges(String::from(
                    "analytic: the integrand does not decay on the tail",
                ))
            }
        }
        RadialFamily::Custom { .. } => TailClass::Unknown,
    }
}

/// Tail of `sup e^(-eps t)/rho` past `from`.
fn p1_tail(rho: &RadialWeight, eps: f64, from: f64) -> TailClass {
    let exp_tail = |lambda: f64| -> TailClass {
        if lambda > eps {
            TailClass::Diverges(String::from(
                "analytic: e^(-eps t)/rho grows exponentially on the tail",
            ))
        } else {
            // Nonincreasing tail: the sup sits at its left end.
            TailClass::Converges(p1_ratio(rho, eps, from))
        }
    };
    match rho.family() {
        RadialFamily::Constant { .. } => exp_tail(0.0),
        RadialFamily::ExpRate { lambda } => exp_tail(*lambda),
        RadialFamily::Bbs { theta, p: pw, eps: ew } => exp_tail(ew * pw * (1.0 - theta)),
        RadialFamily::Example11 { .. } => TailClass::Diverges(String::from(
            "analytic: e^(-eps t)/rho grows like e^(t^2)",
        )),
        RadialFamily::Piecewise { rates, .. } => exp_tail(*rates.last().unwrap()),
        RadialFamily::Dip { rate, .. } => {
            if *rate > eps {
                TailClass::Diverges(String::from(
                    "analytic: e^(-eps t)/rho grows exponentially on the tail",
                ))
            } else {
                TailClass::Converges(p1_ratio(rho, eps, from))
            }
        }
        RadialFamily::Custom { .. } => TailClass::Unknown,
    }
}

/// Interior reason, if any, for `int W` to diverge on a compact set
/// (`p > 1`): a weight zero of order at least `p - 1`.
fn rp_interior_divergence(rho: &RadialWeight, p: f64) -> Option<String> {
    if let RadialFamily::Dip { center, power, .. } = rho.family() {
        if *power >= p - 1.0 {
            return Some(format!(
                "analytic: the weight vanishes at t = {center} to order {power} >= p - 1, \
                 so the integrand is non-integrable there"
            ));
        }
    }
    None
}

/// Interior reason for the p = 1 ratio to be essentially unbounded.
fn p1_interior_divergence(rho: &RadialWeight) -> Option<String> {
    if let RadialFamily::Dip { center, .. } = rho.family() {
        return Some(format!(
            "analytic: the weight dips to the 1e-300 floor at t = {center}, \
             pushing e^(-eps t)/rho beyond the 1e12 guard"
        ));
    }
    None
}

/// `int_lo^hi W(t) dt` in unit chunks with a running overflow guard.
///
/// Each chunk is split at the weight's kinks so every segment has a
/// smooth interior, and segment tolerances scale with a rough one-shot
/// Simpson estimate — near a pinch the integrand spans many orders of
/// magnitude and a fixed absolute tolerance would force the refinement
/// below machine precision. A segment endpoint whose integrand value
/// exceeds the guard is probed for the order of its blowup by comparing
/// two geometric offsets: order at least one means the integral diverges
/// there, while an integrable spike is excised on a vanishing sliver and
/// completed analytically as a pure power.
fn chunked_rp_integral(
    rho: &RadialWeight,
    p: f64,
    eps: f64,
    lo: f64,
    hi: f64,
) -> Result<f64, String> {
    let f = |t: f64| rp_integrand(rho, p, eps, t);
    let n_chunks = (math::ceil(hi - lo) as usize).max(1);
    let mut parts = Vec::with_capacity(n_chunks);
    let mut running = 0.0;
    for k in 0..n_chunks {
        let a = lo + (hi - lo) * k as f64 / n_chunks as f64;
        let b = lo + (hi - lo) * (k + 1) as f64 / n_chunks as f64;
        let mut cuts = alloc::vec![a];
        let mut interior = rho.kinks_in(a, b);
        interior.sort_by(f64::total_cmp);
        for t in interior {
            if t > *cuts.last().unwrap() && t < b {
                cuts.push(t);
            }
        }
        cuts.push(b);
        for w in cuts.windows(2) {
            let (mut s0, mut s1) = (w[0], w[1]);
            let width = s1 - s0;
            if !(width > 0.0) {
                continue;
            }
            // Endpoint blowups: estimate the order of the spike from two
            // geometric offsets and either abort or excise-and-complete.
            let mut correction = 0.0;
            for (end, sign) in [(s0, 1.0), (s1, -1.0)] {
                if !(f(end) > OVERFLOW_GUARD) {
                    continue;
                }
                let d = (1e-9 * width).max(1e-13).min(0.25 * width);
                let f1 = f(end + sign * d);
                let f2 = f(end + sign * 2.0 * d);
                if !(f1 > 0.0 && f1.is_finite() && f2 > 0.0 && f2.is_finite()) {
                    return Err(format!(
                        "numeric guard: integrand not representable near t = {end:.6}"
                    ));
                }
                let order = math::ln(f1 / f2) / core::f64::consts::LN_2;
                if !order.is_finite() || order >= 1.0 - 1e-6 {
                    return Err(format!(
                        "numeric guard: non-integrable blowup (order {order:.3}) at t = {end:.6}"
                    ));
                }
                correction += f1 * d / (1.0 - order.max(0.0));
                if sign > 0.0 {
                    s0 = end + d;
                } else {
                    s1 = end - d;
                }
            }
            if !(s1 > s0) {
                running += correction;
                parts.push(correction);
                continue;
            }
            let rough = (f(s0) + 4.0 * f(0.5 * (s0 + s1)) + f(s1)) * (s1 - s0) / 6.0;
            let tol = 1e-9 * math::abs(rough) + 1e-12;
            let value = math::integrate_adaptive(&f, s0, s1, tol, &[]).map_err(|e| {
                format!(
                    "numeric guard: quadrature failed on [{:.3}, {:.3}]",
                    e.interval.0, e.interval.1
                )
            })? + correction;
            if !value.is_finite() {
                return Err(format!(
                    "numeric guard: integrand not representable on [{s0:.3}, {s1:.3}]"
                ));
            }
            running += value;
            if running > OVERFLOW_GUARD {
                return Err(format!(
                    "numeric guard: partial integral exceeded 1e12 by t = {s1:.3}"
                ));
            }
            parts.push(value);
        }
    }
    Ok(math::pairwise_sum(&parts))
}

/// `int_lo^hi W(t) dt` on a bounded interval, or the reason it is not
/// finite. This is the quantity behind the sharp lower bound
/// `(int W)^(1 - p)` for the `p`-modulus of the radial curves crossing
/// the height band `[lo, hi]`.
pub fn rp_mass(
    rho: &RadialWeight,
    p: f64,
    eps: f64,
    lo: f64,
    hi: f64,
) -> Result<f64, String> {
    assert!(p > 1.0, "the W-integral needs p > 1");
    assert!(eps > 0.0 && hi > lo && lo >= 0.0);
    if let Some(certificate) = rp_interior_divergence(rho, p) {
        if let RadialFamily::Dip { center, .. } = rho.family() {
            if *center >= lo && *center <= hi {
                return Err(certificate);
            }
        }
    }
    chunked_rp_integral(rho, p, eps, lo, hi)
}

/// The first trace parameter: `int_0^inf W(t) dt` for `p > 1`, the
/// essential supremum of `e^(-eps t)/rho` for `p = 1`.
pub fn param_r(rho: &RadialWeight, p: f64, eps: f64, t_max: f64) -> ParamValue {
    assert!(p >= 1.0, "p must satisfy p >= 1");
    assert!(eps > 0.0, "eps must be positive");
    let horizon = t_max.max(rho.feature_horizon() + 1.0);
    if p == 1.0 {
        if let Some(certificate) = p1_interior_divergence(rho) {
            return ParamValue::Infinite { certificate };
        }
        let tail = p1_tail(rho, eps, horizon);
        if let TailClass::Diverges(certificate) = tail {
            return ParamValue::Infinite { certificate };
        }
        let n = math::ceil(horizon * ESS_SUP_SAMPLES as f64) as usize;
        let mut sup = 0.0f64;
        let mut arg = 0.0f64;
        for i in 0..=n {
            let t = horizon * i as f64 / n as f64;
            let v = math::exp(p1_log_ratio(rho, eps, t));
            if v > sup {
                sup = v;
                arg = t;
            }
        }
        if sup > OVERFLOW_GUARD {
            return ParamValue::Infinite {
                certificate: format!("numeric guard: ratio exceeds 1e12 near t = {arg:.3}"),
            };
        }
        match tail {
            TailClass::Converges(bound) => ParamValue::Finite(sup.max(bound)),
            TailClass::Unknown => ParamValue::LowerBound {
                value: sup,
                reason: String::from("tail behavior unknown beyond the horizon"),
            },
            TailClass::Diverges(_) => unreachable!(),
        }
    } else {
        if let Some(certificate) = rp_interior_divergence(rho, p) {
            return ParamValue::Infinite { certificate };
        }
        let tail = rp_tail(rho, p, eps, horizon);
        if let TailClass::Diverges(certificate) = tail {
            return ParamValue::Infinite { certificate };
        }
        match chunked_rp_integral(rho, p, eps, 0.0, horizon) {
            Err(certificate) => ParamValue::Infinite { certificate },
            Ok(body) => match tail {
                TailClass::Converges(t) => ParamValue::Finite(body + t),
                TailClass::Unknown => ParamValue::LowerBound {
                    value: body,
                    reason: String::from("tail behavior unknown beyond the horizon"),
                },
                TailClass::Diverges(_) => unreachable!(),
            },
        }
    }
}

/// Consecutive cells `O_k = [t_k, t_(k+1))` of unit `rho`-mass starting
/// at 0, with whatever partial mass remains past the last breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitMassPartition {
    breakpoints: Vec<f64>,
    cell_masses: Vec<f64>,
    tail_mass: f64,
    horizon: f64,
}

impl UnitMassPartition {
    /// `K + 1` breakpoints `0 = t_1 < t_2 < ... < t_(K+1)`.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Recomputed mass of each cell (each within tolerance of 1).
    pub fn cell_masses(&self) -> &[f64] {
        &self.cell_masses
    }

    /// Mass left between the last breakpoint and the horizon — a partial
    /// cell, never included in any supremum.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.cell_masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cell_masses.is_empty()
    }

    /// The cells as `(lo, hi)` pairs.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.breakpoints.windows(2).map(|w| (w[0], w[1]))
    }
}

/// Value-based bisection for the next breakpoint: the `t` with
/// `int_lo^t rho = target` within `tol`.
fn mass_bisect(rho: &RadialWeight, lo: f64, hi: f64, target: f64, tol: f64) -> f64 {
    let mut a = lo;
    let mut b = hi;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let v = rho.mass_on(lo, m);
        if (v - target).abs() <= tol {
            return m;
        }
        if v < target {
            a = m;
        } else {
            b = m;
        }
        if b - a < 1e-15 * b.abs().max(1.0) {
            break;
        }
    }
    0.5 * (a + b)
}

/// Split `[0, horizon)` into cells of unit `rho`-mass by bisection on the
/// cumulative integral; stops at `max_cells` or when the remaining mass
/// drops below 1.
pub fn partition_unit_mass(
    rho: &RadialWeight,
    max_cells: usize,
    t_max: f64,
    tol: f64,
) -> Result<UnitMassPartition, ParamError> {
    let horizon = t_max.max(rho.feature_horizon() + 1.0);
    let total = rho.mass_on(0.0, horizon);
    if !(total >= 1.0) {
        return Err(ParamError::InsufficientMass { available: total });
    }
    let cells = if total >= max_cells as f64 + 1.0 {
        max_cells
    } else {
        (total as usize).min(max_cells)
    };
    let mut breakpoints = Vec::with_capacity(cells + 1);
    let mut cell_masses = Vec::with_capacity(cells);
    breakpoints.push(0.0);
    for _ in 0..cells {
        let lo = *breakpoints.last().unwrap();
        let t = mass_bisect(rho, lo, horizon, 1.0, tol);
        cell_masses.push(rho.mass_on(lo, t));
        breakpoints.push(t);
    }
    let tail_mass = rho.mass_on(*breakpoints.last().unwrap(), horizon);
    Ok(UnitMassPartition { breakpoints, cell_masses, tail_mass, horizon })
}

/// The refined parameter's computation record.
#[derive(Debug, Clone, PartialEq)]
pub struct CalRReport {
    pub value: ParamValue,
    /// Per-cell integrals of `W` (empty when no partition was needed).
    pub per_cell: Vec<f64>,
    /// Whether the per-cell values are nonincreasing over the tail window —
    /// the condition under which the computed sup is the true sup rather
    /// than a lower bound.
    pub eventually_monotone: bool,
    /// False when the weight was integrable and the parameter defaulted
    /// to `R`.
    pub used_partition: bool,
}

/// The refined trace parameter: `sup_k int_(O_k) W` over unit-mass cells
/// when the weight is non-integrable; equal to `R` when the weight is
/// integrable, and always equal to `R` for `p = 1`.
pub fn param_cal_r(
    rho: &RadialWeight,
    p: f64,
    eps: f64,
    max_cells: usize,
    t_max: f64,
    tol: f64,
) -> Result<CalRReport, ParamError> {
    let defer_to_r = |monotone: bool| CalRReport {
        value: param_r(rho, p, eps, t_max),
        per_cell: Vec::new(),
        eventually_monotone: monotone,
        used_partition: false,
    };
    if p == 1.0 {
        return Ok(defer_to_r(true));
    }
    match rho.tail_behavior() {
        TailBehavior::Integrable => Ok(defer_to_r(true)),
        tail => {
            if let Some(certificate) = rp_interior_divergence(rho, p) {
                return Ok(CalRReport {
                    value: ParamValue::Infinite { certificate },
                    per_cell: Vec::new(),
                    eventually_monotone: false,
                    used_partition: true,
                });
            }
            let partition = partition_unit_mass(rho, max_cells, t_max, tol)?;
            let mut per_cell = Vec::with_capacity(partition.len());
            for (lo, hi) in partition.cells() {
                match chunked_rp_integral(rho, p, eps, lo, hi) {
                    Ok(v) => per_cell.push(v),
                    Err(certificate) => {
                        return Ok(CalRReport {
                            value: ParamValue::Infinite {
                                certificate: format!(
                                    "{certificate} (cell [{lo:.3}, {hi:.3}))"
                                ),
                            },
                            per_cell,
                            eventually_monotone: false,
                            used_partition: true,
                        });
                    }
                }
            }
            let sup = per_cell.iter().copied().fold(0.0f64, f64::max);
            let window = per_cell.len().min(5).max(2);
            let eventually_monotone = per_cell.len() >= 2
                && per_cell[per_cell.len() - window..]
                    .windows(2)
                    .all(|w| w[1] <= w[0] * (1.0 + 1e-9));
            let value = if sup > OVERFLOW_GUARD {
                ParamValue::Infinite {
                    certificate: String::from("numeric guard: a cell integral exceeded 1e12"),
                }
            } else if tail == TailBehavior::Unknown {
                ParamValue::LowerBound {
                    value: sup,
                    reason: String::from("tail behavior unknown beyond the horizon"),
                }
            } else if eventually_monotone {
                ParamValue::Finite(sup)
            } else {
                ParamValue::LowerBound {
                    value: sup,
                    reason: String::from(
                        "per-cell values not yet monotone at the horizon",
                    ),
                }
            };
            Ok(CalRReport { value, per_cell, eventually_monotone, used_partition: true })
        }
    }
}

/// One local norm on a unit cell (diagnostic or failure witness).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellNorm {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

/// Admissibility report for a weight.
#[derive(Debug, Clone, PartialEq)]
pub struct FpReport {
    pub member: bool,
    pub certificate: String,
    /// Per-unit-cell local norms on the horizon (diagnostics; entries may
    /// overflow for weights whose admissibility is decided analytically).
    pub witnesses: Vec<CellNorm>,
    /// The first failing subinterval when membership fails.
    pub failure: Option<CellNorm>,
}

/// Test whether the weight is admissible for the trace theory: for
/// `p > 1`, local integrability of `W` on compact intervals; for `p = 1`,
/// local boundedness of `e^(-eps t)/rho`. Analytic families are decided
/// by their closed forms; tabulated families numerically under the `1e12`
/// guard.
pub fn fp_membership(rho: &RadialWeight, p: f64, eps: f64, horizon: f64) -> FpReport {
    assert!(p >= 1.0 && eps > 0.0 && horizon > 0.0);
    let horizon = horizon.max(rho.feature_horizon() + 1.0);
    let cells = math::ceil(horizon) as usize;
    let cell_norm = |lo: f64, hi: f64| -> f64 {
        if p == 1.0 {
            let n = ESS_SUP_SAMPLES;
            (0..=n)
                .map(|i| math::exp(p1_log_ratio(rho, eps, lo + (hi - lo) * i as f64 / n as f64)))
                .fold(0.0f64, f64::max)
        } else {
            chunked_rp_integral(rho, p, eps, lo, hi).unwrap_or(f64::INFINITY)
        }
    };
    let mut witnesses = Vec::with_capacity(cells);
    for k in 0..cells {
        let lo = k as f64;
        let hi = ((k + 1) as f64).min(horizon);
        witnesses.push(CellNorm { lo, hi, value: cell_norm(lo, hi) });
    }

    // Analytic verdicts first: positivity and continuity decide every
    // family except the pinched one, whose verdict comes from the order
    // of its zero.
    match rho.family() {
        RadialFamily::Constant { .. }
        | RadialFamily::ExpRate { .. }
        | RadialFamily::Bbs { .. }
        | RadialFamily::Example11 { .. } => FpReport {
            member: true,
            certificate: String::from(
                "analytic: continuous positive weight — the local integrand is bounded on \
                 compact intervals",
            ),
            witnesses,
            failure: None,
        },
        RadialFamily::Dip { center, power, .. } => {
            let bad = if p == 1.0 {
                true
            } else {
                *power >= p - 1.0
            };
            if bad {
                let failure = Some(CellNorm {
                    lo: (center - 0.5).max(0.0),
                    hi: center + 0.5,
                    value: f64::INFINITY,
                });
                FpReport {
                    member: false,
                    certificate: if p == 1.0 {
                        format!(
                            "analytic: the weight dips to the floor at t = {center}; the \
                             ratio is essentially unbounded there"
                        )
                    } else {
                        format!(
                            "analytic: weight zero of order {power} >= p - 1 at t = {center}"
                        )
                    },
                    witnesses,
                    failure,
                }
            } else {
                FpReport {
                    member: true,
                    certificate: format!(
                        "analytic: weight zero of order {power} < p - 1 at t = {center} is \
                         locally integrable"
                    ),
                    witnesses,
                    failure: None,
                }
            }
        }
        RadialFamily::Piecewise { .. } | RadialFamily::Custom { .. } => {
            let failure = witnesses
                .iter()
                .find(|c| !c.value.is_finite() || c.value > OVERFLOW_GUARD)
                .copied();
            match failure {
                Some(cell) => FpReport {
                    member: false,
                    certificate: format!(
                        "numeric guard: local norm exceeds 1e12 on [{:.3}, {:.3})",
                        cell.lo, cell.hi
                    ),
                    witnesses,
                    failure,
                },
                None => FpReport {
                    member: true,
                    certificate: String::from(
                        "numeric: all local norms finite below the 1e12 guard",
                    ),
                    witnesses,
                    failure: None,
                },
            }
        }
    }
}

/// Three-valued answer for questions a lower bound cannot settle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trilean {
    Yes,
    No,
    Unknown,
}

/// What the dichotomy predicts for this regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TracePrediction {
    /// Every Sobolev function has a boundary trace (refined parameter
    /// finite).
    pub inhomogeneous_traces: Option<bool>,
    /// Every homogeneous-Sobolev function has a boundary trace (`R`
    /// finite).
    pub homogeneous_traces: Option<bool>,
    /// Traces exist but vanish almost everywhere (infinite measure with
    /// finite refined parameter).
    pub traces_vanish_ae: Option<bool>,
}

/// The complete regime classification for a weight.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub rho: String,
    pub p: f64,
    pub eps: f64,
    pub mu_finite: Trilean,
    /// `int_0^inf rho` when known finite.
    pub mu_value: Option<f64>,
    pub r_value: ParamValue,
    pub cal_r: CalRReport,
    pub prediction: TracePrediction,
}

/// Horizon and partition knobs for [`classify_regime`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamOptions {
    pub t_max: f64,
    pub max_cells: usize,
    pub partition_tol: f64,
}

impl Default for ParamOptions {
    fn default() -> Self {
        Self { t_max: DEFAULT_T_MAX, max_cells: DEFAULT_MAX_CELLS, partition_tol: PARTITION_TOL }
    }
}

/// Classify the weight's regime: admissibility, measure finiteness, both
/// parameters, and what the dichotomy predicts for traces.
pub fn classify_regime(
    rho: &RadialWeight,
    p: f64,
    eps: f64,
    opts: &ParamOptions,
) -> Result<RegimeReport, ParamError> {
    let fp = fp_membership(rho, p, eps, opts.t_max);
    if !fp.member {
        return Err(ParamError::HypothesisViolation { detail: fp.certificate });
    }
    let mass = rho.total_mass_estimate(opts.t_max);
    let (mu_finite, mu_value) = match &mass {
        MassEstimate::Exact(v) => (Trilean::Yes, Some(*v)),
        MassEstimate::Infinite { .. } => (Trilean::No, None),
        MassEstimate::LowerBound(v) => (Trilean::Unknown, Some(*v)),
    };
    let r_value = param_r(rho, p, eps, opts.t_max);
    let cal_r = param_cal_r(rho, p, eps, opts.max_cells, opts.t_max, opts.partition_tol)?;
    // A finite R forces the refined parameter finite: every cell integral
    // is a piece of the whole. A violation here is a bug, not a regime.
    assert!(
        !(r_value.known_finite() && cal_r.value.known_infinite()),
        "parameter invariant violated: R finite but refined parameter flagged infinite"
    );
    let inhomogeneous_traces = cal_r.value.decided();
    let homogeneous_traces = r_value.decided();
    let traces_vanish_ae = match (mu_finite, inhomogeneous_traces) {
        (Trilean::Yes, _) => Some(false),
        (Trilean::No, Some(true)) => Some(true),
        (Trilean::No, Some(false)) => Some(false),
        _ => None,
    };
    Ok(RegimeReport {
        rho: rho.describe(),
        p,
        eps,
        mu_finite,
        mu_value,
        r_value,
        cal_r,
        prediction: TracePrediction {
            inhomogeneous_traces,
            homogeneous_traces,
            traces_vanish_ae,
        },
    })
}
