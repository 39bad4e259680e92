//! Radial function profiles and the counterexample constructions.
//!
//! A *radial profile* is a function `U: [0, infinity) -> R` inducing
//! `u(x) = U(|x|)` on the filling, together with the density `q` of its
//! natural upper gradient: `|U'(t)| = q(t) e^(-eps t)`, so `g(x) = q(|x|)`
//! is an upper gradient of `u` with respect to the uniformized metric.
//!
//! The interesting profiles are the ones that defeat traces:
//!
//! * **Divergent** (`R = infinity`, any `p`): for `p > 1` the telescoping
//!   profile `U = log(1 + I)` with `I` the cumulative integral of the
//!   `R`-integrand `W` — its gradient `p`-energy is exactly
//!   `(1 - (1 + I)^(1-p))/(p-1)` while `U` climbs without bound. For
//!   `p = 1` a staircase that gains height 1 on each interval where
//!   `e^(-eps t)/rho` passes the next power of 2, at geometrically small
//!   cost.
//! * **Tents** (the oscillating counterexamples): bumps rising 0 -> 1 -> 0
//!   across chosen intervals, linear in a per-tent "speed" measure. With
//!   speed `W` the transition over an interval with `int W = D` costs
//!   gradient `p`-energy exactly `2^p D^(1-p)`, so intervals with large
//!   `D` oscillate almost for free.
//!
//! Speeds like `e^(t^2/(p-1))` overflow `f64` long before the horizon, so
//! every tent stores a log-domain shift and all cumulative work happens on
//! the shifted integrand; values, peaks, and energies stay representable
//! for arbitrary weights.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::math;
use crate::measure::{MassEstimate, RadialWeight};
use crate::params::{p1_log_ratio, param_cal_r, param_r, rp_log_integrand, ParamOptions,
                    ParamValue};

/// Why a counterexample profile could not be built.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileError {
    /// The hypothesis of the construction fails for this weight (e.g. the
    /// parameter it needs infinite is finite).
    NotApplicable(String),
    /// The hypothesis holds but the computable horizon does not expose
    /// enough structure to build a meaningful profile.
    InsufficientStructure(String),
}

impl core::fmt::Display for ProfileError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ProfileError::NotApplicable(s) => write!(f, "construction not applicable: {s}"),
            ProfileError::InsufficientStructure(s) => {
                write!(f, "insufficient structure on the horizon: {s}")
            }
        }
    }
}

impl core::error::Error for ProfileError {}

/// The measure a tent rises linearly against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TentSpeed {
    /// `W(t) = e^(-eps p t/(p-1)) rho^(1/(1-p))` — the `R`-integrand.
    RpIntegrand,
    /// `e^(-eps t)` — plain uniformized arclength.
    DsOnly,
    /// `e^(-eps t)/rho(t)` — the `p = 1` ratio.
    InverseRhoDs,
}

/// One 0 -> 1 -> 0 bump on `[a, b]`, peaking at the speed-measure midpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Tent {
    pub a: f64,
    pub b: f64,
    pub peak: f64,
    speed: TentSpeed,
    /// Log-domain shift: the max of `log speed` over the tent.
    log_shift: f64,
    /// `int_a^b e^(log speed - log_shift)`; the true speed mass is
    /// `shifted_total * e^(log_shift)`.
    shifted_total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TentProfile {
    rho: RadialWeight,
    p: f64,
    eps: f64,
    tents: Vec<Tent>,
}

/// `U = log(1 + I)` with `I(t) = int_0^t W`, tracked in log domain on a
/// uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergentProfile {
    rho: RadialWeight,
    p: f64,
    eps: f64,
    step: f64,
    /// `log I(k * step)`; entry 0 is `-inf`.
    log_cum: Vec<f64>,
}

/// One staircase rise: height gain exactly 1 across `[a, b]`, linear in
/// `e^(-eps t)`-measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stair {
    pub a: f64,
    pub b: f64,
    /// `int_a^b e^(-eps t) dt`.
    emass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StairProfile {
    eps: f64,
    stairs: Vec<Stair>,
}

/// A radial profile `U` with its upper-gradient density.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialFunction {
    /// `U(t) = c0 + sum c_j e^(-b_j t)`: smooth, converges to `c0`.
    ExpMix { eps: f64, c0: f64, terms: Vec<(f64, f64)> },
    Divergent(DivergentProfile),
    Staircase(StairProfile),
    Tents(TentProfile),
    /// Linear interpolation through samples at `start + k * step`,
    /// constant beyond the last sample.
    Table { eps: f64, start: f64, step: f64, values: Vec<f64> },
}

fn log_add_exp(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    hi + math::ln_1p(math::exp(lo - hi))
}

/// `log(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 36.0 {
        x
    } else {
        math::ln_1p(math::exp(x))
    }
}

fn tent_log_speed(rho: &RadialWeight, p: f64, eps: f64, speed: TentSpeed, t: f64) -> f64 {
    match speed {
        TentSpeed::RpIntegrand => rp_log_integrand(rho, p, eps, t),
        TentSpeed::DsOnly => -eps * t,
        TentSpeed::InverseRhoDs => p1_log_ratio(rho, eps, t),
    }
}

/// Max of `log f` over `[a, b]`, sampled densely plus at the kinks.
fn log_max_on(logf: impl Fn(f64) -> f64, a: f64, b: f64, kinks: &[f64]) -> f64 {
    let mut m = f64::NEG_INFINITY;
    let n = 64;
    for i in 0..=n {
        let t = a + (b - a) * i as f64 / n as f64;
        let v = logf(t);
        if v > m {
            m = v;
        }
    }
    for &k in kinks {
        if k > a && k < b {
            let v = logf(k);
            if v > m {
                m = v;
            }
        }
    }
    m
}

/// `int_a^b e^(log f - shift)`, with tolerance scaled to the interval.
fn shifted_integral(
    logf: &impl Fn(f64) -> f64,
    shift: f64,
    a: f64,
    b: f64,
    kinks: &[f64],
) -> f64 {
    if b <= a {
        return 0.0;
    }
    let tol = 1e-13 * (b - a);
    math::integrate_adaptive(|t| math::exp(logf(t) - shift), a, b, tol, kinks)
        .map(|v| v.max(0.0))
        .unwrap_or(f64::NAN)
}

fn make_tent(
    rho: &RadialWeight,
    p: f64,
    eps: f64,
    speed: TentSpeed,
    a: f64,
    b: f64,
) -> Option<Tent> {
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return None;
    }
    let logf = |t: f64| tent_log_speed(rho, p, eps, speed, t);
    let kinks = rho.kinks_in(a, b);
    let shift = log_max_on(logf, a, b, &kinks);
    if !shift.is_finite() {
        return None;
    }
    let total = shifted_integral(&logf, shift, a, b, &kinks);
    if !(total > 0.0) || !total.is_finite() {
        return None;
    }
    // Peak: the speed-measure midpoint, by value-based bisection.
    let target = total / 2.0;
    let mut lo = a;
    let mut hi = b;
    let mut peak = 0.5 * (a + b);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            peak = mid;
            break;
        }
        let c = shifted_integral(&logf, shift, a, mid, &kinks);
        if (c - target).abs() <= 1e-12 * total {
            peak = mid;
            break;
        }
        if c < target {
            lo = mid;
        } else {
            hi = mid;
        }
        peak = 0.5 * (lo + hi);
    }
    Some(Tent { a, b, peak, speed, log_shift: shift, shifted_total: total })
}

impl Tent {
    /// The true speed mass `int_a^b speed`, as `(log_shift, shifted)`.
    pub fn speed_mass_parts(&self) -> (f64, f64) {
        (self.log_shift, self.shifted_total)
    }
}

impl TentProfile {
    pub fn tents(&self) -> &[Tent] {
        &self.tents
    }

    fn locate(&self, t: f64) -> Option<usize> {
        // Tents are sorted and disjoint; binary search on start.
        let idx = self.tents.partition_point(|tent| tent.a <= t);
        if idx == 0 {
            return None;
        }
        let tent = &self.tents[idx - 1];
        (t < tent.b).then_some(idx - 1)
    }

    fn value(&self, t: f64) -> f64 {
        let Some(idx) = self.locate(t) else { return 0.0 };
        let tent = &self.tents[idx];
        if t <= tent.a || t >= tent.b {
            return 0.0;
        }
        if t == tent.peak {
            return 1.0;
        }
        let logf = |s: f64| tent_log_speed(&self.rho, self.p, self.eps, tent.speed, s);
        let kinks = self.rho.kinks_in(tent.a, tent.b);
        let c = if t < tent.peak {
            shifted_integral(&logf, tent.log_shift, tent.a, t, &kinks)
        } else {
            shifted_integral(&logf, tent.log_shift, t, tent.b, &kinks)
        };
        (2.0 * c / tent.shifted_total).min(1.0)
    }

    fn gradient_density(&self, t: f64) -> f64 {
        let Some(idx) = self.locate(t) else { return 0.0 };
        let tent = &self.tents[idx];
        let logf = tent_log_speed(&self.rho, self.p, self.eps, tent.speed, t);
        2.0 * math::exp(logf - tent.log_shift + self.eps * t) / tent.shifted_total
    }

    /// Exact per-tent gradient energies `int_a^b q(t)^p rho(t) dt`,
    /// evaluated in log domain (closed form for the `W`-speed).
    pub fn tent_energies(&self) -> Vec<f64> {
        let p = self.p;
        self.tents
            .iter()
            .map(|tent| {
                let log_d = math::ln(tent.shifted_total) + tent.log_shift;
                match tent.speed {
                    // q^p rho = 2^p W / D^p, so the integral is 2^p D^(1-p).
                    TentSpeed::RpIntegrand => {
                        math::exp(p * math::ln(2.0) + (1.0 - p) * log_d)
                    }
                    // q is the constant 2/D: the integral is (2/D)^p * mass.
                    TentSpeed::DsOnly => {
                        let mass = self.rho.mass_on(tent.a, tent.b);
                        math::exp(p * (math::ln(2.0) - log_d)) * mass
                    }
                    // q^p rho = (2/D)^p e^((p-1) log speed + (p-1) eps t)...
                    // for p = 1 exactly (2/D)(b - a); otherwise numeric.
                    TentSpeed::InverseRhoDs => {
                        if p == 1.0 {
                            math::exp(math::ln(2.0) - log_d) * (tent.b - tent.a)
                        } else {
                            let logf = |s: f64| {
                                p * (math::ln(2.0) - log_d
                                    + tent_log_speed(&self.rho, p, self.eps, tent.speed, s)
                                    + self.eps * s)
                                    + self.rho.log_eval(s)
                            };
                            let kinks = self.rho.kinks_in(tent.a, tent.b);
                            let shift = log_max_on(logf, tent.a, tent.b, &kinks);
                            shifted_integral(&logf, shift, tent.a, tent.b, &kinks)
                                * math::exp(shift)
                        }
                    }
                }
            })
            .collect()
    }
}

impl DivergentProfile {
    fn horizon(&self) -> f64 {
        self.step * (self.log_cum.len() - 1) as f64
    }

    /// `log I(t)`, clamped to the grid horizon.
    fn log_i(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.horizon());
        let k = ((t / self.step) as usize).min(self.log_cum.len() - 1);
        let base = self.step * k as f64;
        let logf = |s: f64| rp_log_integrand(&self.rho, self.p, self.eps, s);
        if t <= base {
            return self.log_cum[k];
        }
        let kinks = self.rho.kinks_in(base, t);
        let shift = log_max_on(logf, base, t, &kinks);
        let partial = shifted_integral(&logf, shift, base, t, &kinks);
        if partial > 0.0 {
            log_add_exp(self.log_cum[k], shift + math::ln(partial))
        } else {
            self.log_cum[k]
        }
    }

    fn value(&self, t: f64) -> f64 {
        softplus(self.log_i(t))
    }

    fn gradient_density(&self, t: f64) -> f64 {
        if t > self.horizon() {
            return 0.0;
        }
        let log_w = rp_log_integrand(&self.rho, self.p, self.eps, t);
        math::exp(log_w + self.eps * t - softplus(self.log_i(t)))
    }
}

impl StairProfile {
    pub fn stairs(&self) -> &[Stair] {
        &self.stairs
    }

    fn value(&self, t: f64) -> f64 {
        let mut total = 0.0;
        for stair in &self.stairs {
            if t >= stair.b {
                total += 1.0;
            } else if t > stair.a {
                let partial = (math::exp(-self.eps * stair.a) - math::exp(-self.eps * t))
                    / self.eps;
                total += (partial / stair.emass).min(1.0);
                break;
            } else {
                break;
            }
        }
        total
    }

    fn gradient_density(&self, t: f64) -> f64 {
        for stair in &self.stairs {
            if t >= stair.a && t < stair.b {
                return math::exp(self.eps * t) / stair.emass;
            }
        }
        0.0
    }
}

impl RadialFunction {
    /// `U(t)`.
    pub fn value(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match self {
            RadialFunction::ExpMix { c0, terms, .. } => {
                c0 + terms.iter().map(|(c, b)| c * math::exp(-b * t)).sum::<f64>()
            }
            RadialFunction::Divergent(d) => d.value(t),
            RadialFunction::Staircase(s) => s.value(t),
            RadialFunction::Tents(tents) => tents.value(t),
            RadialFunction::Table { start, step, values, .. } => {
                let pos = (t - start) / step;
                if pos <= 0.0 {
                    values[0]
                } else if pos >= (values.len() - 1) as f64 {
                    *values.last().unwrap()
                } else {
                    let i = pos as usize;
                    let frac = pos - i as f64;
                    values[i] * (1.0 - frac) + values[i + 1] * frac
                }
            }
        }
    }

    /// The upper-gradient density `q(t)` with `|U'(t)| = q(t) e^(-eps t)`;
    /// `g(x) = q(|x|)` is an upper gradient of `u(x) = U(|x|)`.
    pub fn gradient_density(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match self {
            RadialFunction::ExpMix { eps, terms, .. } => {
                let du: f64 = terms.iter().map(|(c, b)| -c * b * math::exp(-b * t)).sum();
                du.abs() * math::exp(eps * t)
            }
            RadialFunction::Divergent(d) => d.gradient_density(t),
            RadialFunction::Staircase(s) => s.gradient_density(t),
            RadialFunction::Tents(tents) => tents.gradient_density(t),
            RadialFunction::Table { eps, start, step, values } => {
                let pos = (t - start) / step;
                if pos <= 0.0 || pos >= (values.len() - 1) as f64 {
                    0.0
                } else {
                    let i = pos as usize;
                    let slope = (values[i + 1] - values[i]) / step;
                    slope.abs() * math::exp(eps * t)
                }
            }
        }
    }

    /// Heights in `(lo, hi)` where the profile changes character — tent
    /// walls and peaks, stair edges, table nodes, weight kinks. Quadrature
    /// and sampling must split here.
    pub fn critical_heights(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut push = |t: f64| {
            if t > lo && t < hi {
                out.push(t);
            }
        };
        match self {
            RadialFunction::ExpMix { .. } => {}
            RadialFunction::Divergent(d) => {
                for k in d.rho.kinks_in(lo, hi) {
                    push(k);
                }
            }
            RadialFunction::Staircase(s) => {
                for stair in &s.stairs {
                    push(stair.a);
                    push(stair.b);
                }
            }
            RadialFunction::Tents(t) => {
                for tent in &t.tents {
                    push(tent.a);
                    push(tent.peak);
                    push(tent.b);
                }
                for k in t.rho.kinks_in(lo, hi) {
                    push(k);
                }
            }
            RadialFunction::Table { start, step, values, .. } => {
                for i in 0..values.len() {
                    push(start + step * i as f64);
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// The known limit of `U(t)` as `t -> infinity`, when the shape
    /// determines it.
    pub fn limit_hint(&self) -> Option<f64> {
        match self {
            RadialFunction::ExpMix { c0, .. } => Some(*c0),
            RadialFunction::Table { values, .. } => values.last().copied(),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            RadialFunction::ExpMix { c0, terms, .. } => {
                format!("smooth exponential mixture ({} terms, limit {c0})", terms.len())
            }
            RadialFunction::Divergent(_) => String::from("divergent telescoping profile"),
            RadialFunction::Staircase(s) => {
                format!("divergent staircase ({} rises)", s.stairs.len())
            }
            RadialFunction::Tents(t) => format!("oscillating tents ({})", t.tents.len()),
            RadialFunction::Table { values, .. } => {
                format!("tabulated profile ({} samples)", values.len())
            }
        }
    }

    /// Convenience constructor for smooth test profiles.
    pub fn exp_mix(eps: f64, c0: f64, terms: Vec<(f64, f64)>) -> Self {
        RadialFunction::ExpMix { eps, c0, terms }
    }

    /// Convenience constructor for tabulated profiles.
    pub fn table(eps: f64, start: f64, step: f64, values: Vec<f64>) -> Self {
        RadialFunction::Table { eps, start, step, values }
    }
}

/// Build the log-domain cumulative grid of `W` on `[0, horizon]`.
fn build_log_cum(rho: &RadialWeight, p: f64, eps: f64, horizon: f64, step: f64) -> Vec<f64> {
    let n = math::ceil(horizon / step) as usize;
    let logf = |s: f64| rp_log_integrand(rho, p, eps, s);
    let mut log_cum = Vec::with_capacity(n + 1);
    log_cum.push(f64::NEG_INFINITY);
    let mut acc = f64::NEG_INFINITY;
    for k in 0..n {
        let a = step * k as f64;
        let b = step * (k + 1) as f64;
        let kinks = rho.kinks_in(a, b);
        let shift = log_max_on(logf, a, b, &kinks);
        let seg = shifted_integral(&logf, shift, a, b, &kinks);
        if seg > 0.0 && shift.is_finite() {
            acc = log_add_exp(acc, shift + math::ln(seg));
        }
        log_cum.push(acc);
    }
    log_cum
}

/// First `t >= from` where `log_ratio(t) >= target`, by forward scan and
/// bisection; `None` if the threshold is not reached before `t_max`.
fn first_crossing(
    logf: &impl Fn(f64) -> f64,
    from: f64,
    t_max: f64,
    target: f64,
) -> Option<f64> {
    if logf(from) >= target {
        return Some(from);
    }
    let step = 1.0 / 64.0;
    let mut t = from;
    while t < t_max {
        let next = (t + step).min(t_max);
        if logf(next) >= target {
            // Bisect inside (t, next].
            let mut lo = t;
            let mut hi = next;
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if logf(mid) >= target {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Some(hi);
        }
        t = next;
    }
    None
}

/// The divergent construction: a profile climbing to infinity along every
/// ray while its gradient `p`-energy stays finite. Requires `R = infinity`.
pub fn build_divergent(
    rho: &RadialWeight,
    p: f64,
    eps: f64,
    t_max: f64,
) -> Result<RadialFunction, ProfileError> {
    match param_r(rho, p, eps, t_max) {
        ParamValue::Infinite { .. } => {}
        other => {
            return Err(ProfileError::NotApplicable(format!(
                "the divergent profile needs R infinite; here R = {other}"
            )));
        }
    }
    let horizon = t_max.max(rho.feature_horizon() + 1.0);
    if p == 1.0 {
        // Staircase: one unit rise wherever e^(-eps t)/rho passes the next
        // power of 2, on a stretch where the ratio stays that large.
        let logf = |t: f64| p1_log_ratio(rho, eps, t);
        let ln2 = math::ln(2.0);
        let mut stairs = Vec::new();
        let mut from = 0.0;
        let mut k = 1u32;
        while stairs.len() < 4096 {
            let Some(a) = first_crossing(&logf, from, horizon, k as f64 * ln2) else {
                break;
            };
            let mut b = (a + 0.5).min(horizon);
            // Shrink to where the ratio really stays above the threshold.
            let samples = 64;
            for i in 1..=samples {
                let t = a + (b - a) * i as f64 / samples as f64;
                if logf(t) < k as f64 * ln2 - 1e-9 {
                    b = t;
                    break;
                }
            }
            if b > a + 1e-12 {
                let emass = (math::exp(-eps * a) - math::exp(-eps * b)) / eps;
                stairs.push(Stair { a, b, emass });
            }
            from = b.max(a + 1e-9);
            k += 1;
        }
        if stairs.len() < 3 {
            return Err(ProfileError::InsufficientStructure(format!(
                "only {} ratio crossings below the horizon",
                stairs.len()
            )));
        }
        Ok(RadialFunction::Staircase(StairProfile { eps, stairs }))
    } else {
        let log_cum = build_log_cum(rho, p, eps, horizon, 1.0 / 16.0);
        Ok(RadialFunction::Divergent(DivergentProfile {
            rho: rho.clone(),
            p,
            eps,
            step: 1.0 / 16.0,
            log_cum,
        }))
    }
}

/// The `p = 1` oscillator: tents of uniformized length 2 placed on sets
/// where `e^(-eps t)/rho >= 2^k`, inside stretches of `rho`-mass at most
/// `2^(-k)`. Requires `R_1 = infinity`; lands in `N^(1,1)` with no limit
/// along any ray.
pub fn build_oscillator_p1(
    rho: &RadialWeight,
    eps: f64,
    t_max: f64,
) -> Result<RadialFunction, ProfileError> {
    match param_r(rho, 1.0, eps, t_max) {
        ParamValue::Infinite { .. } => {}
        other => {
            return Err(ProfileError::NotApplicable(format!(
                "the p = 1 oscillator needs R_1 infinite; here R_1 = {other}"
            )));
        }
    }
    let horizon = t_max.max(rho.feature_horizon() + 1.0);
    let logf = |t: f64| p1_log_ratio(rho, eps, t);
    let ln2 = math::ln(2.0);
    let mut tents = Vec::new();
    let mut from = 0.0;
    let mut k = 1u32;
    while tents.len() < 4096 {
        let Some(a) = first_crossing(&logf, from, horizon, k as f64 * ln2) else { break };
        // Cap the tent by rho-mass 2^(-k), by the horizon, and by the
        // stretch where the ratio stays above its threshold.
        let mass_cap = {
            let target = math::exp(-(k as f64) * ln2);
            let mut lo = a;
            let mut hi = horizon;
            if rho.mass_on(a, hi) > target {
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let m = rho.mass_on(a, mid);
                    if (m - target).abs() <= 1e-15 {
                        lo = mid;
                        break;
                    }
                    if m < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            } else {
                horizon
            }
        };
        let mut b = mass_cap.min(a + 1.0).min(horizon);
        let samples = 64;
        for i in 1..=samples {
            let t = a + (b - a) * i as f64 / samples as f64;
            if logf(t) < k as f64 * ln2 - 1e-9 {
                b = t;
                break;
            }
        }
        if b > a + 1e-12 {
            if let Some(tent) = make_tent(rho, 1.0, eps, TentSpeed::DsOnly, a, b) {
                tents.push(tent);
            }
        }
        from = b.max(a + 1e-9);
        k += 1;
    }
    if tents.len() < 3 {
        return Err(ProfileError::InsufficientStructure(format!(
            "only {} usable ratio crossings below the horizon",
            tents.len()
        )));
    }
    Ok(RadialFunction::Tents(TentProfile { rho: rho.clone(), p: 1.0, eps, tents }))
}

/// The `p > 1` oscillator for finite-measure weights: consecutive tents on
/// intervals where the cumulative of `W` gains `2^j`, so the `j`-th
/// transition costs gradient energy at most `2^p 2^(j(1-p))`. Requires
/// `R = infinity` and an integrable weight; lands in `N^(1,p)` with no
/// limit along any ray.
pub fn build_oscillator_pg1(
    rho: &RadialWeight,
    p: f64,
    eps: f64,
    t_max: f64,
) -> Result<RadialFunction, ProfileError> {
    if p <= 1.0 {
        return Err(ProfileError::NotApplicable(String::from(
            "this oscillator needs p > 1",
        )));
    }
    match param_r(rho, p, eps, t_max) {
        ParamValue::Infinite { .. } => {}
        other => {
            return Err(ProfileError::NotApplicable(format!(
                "the oscillator needs R infinite; here R = {other}"
            )));
        }
    }
    match rho.total_mass_estimate(t_max) {
        MassEstimate::Exact(_) => {}
        _ => {
            return Err(ProfileError::NotApplicable(String::from(
                "this oscillator needs a weight of finite total mass",
            )));
        }
    }
    let horizon = t_max.max(rho.feature_horizon() + 1.0);
    let grid = build_log_cum(rho, p, eps, horizon, 1.0 / 32.0);
    let profile = DivergentProfile {
        rho: rho.clone(),
        p,
        eps,
        step: 1.0 / 32.0,
        log_cum: grid,
    };
    let ln2 = math::ln(2.0);
    let mut tents = Vec::new();
    let mut t_lo = 0.0;
    let mut log_target = ln2; // running I-target: first interval gains 2^1
    let log_total = profile.log_i(horizon);
    for _ in 0..4096 {
        if log_target > log_total {
            break;
        }
        // First t with I(t) >= target, on the grid then bisected.
        let mut lo = t_lo;
        let mut hi = horizon;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if profile.log_i(mid) >= log_target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let t_hi = hi;
        if let Some(tent) = make_tent(rho, p, eps, TentSpeed::RpIntegrand, t_lo, t_hi) {
            tents.push(tent);
        }
        // Next target: I(t_hi) + 2^(j+1) = 2^(j+2) - 2; with I(t_j) =
        // 2^(j+1) - 2 this is exactly one more doubling of (I + 2).
        log_target = log_add_exp(log_target, log_add_exp(log_target, ln2));
        t_lo = t_hi;
        if horizon - t_lo < 1e-9 {
            break;
        }
    }
    if tents.len() < 3 {
        return Err(ProfileError::InsufficientStructure(format!(
            "only {} cumulative doublings below the horizon",
            tents.len()
        )));
    }
    Ok(RadialFunction::Tents(TentProfile { rho: rho.clone(), p, eps, tents }))
}

/// The refined-parameter oscillator for infinite-measure weights: pick
/// unit-mass cells whose `W`-integral passes `4^j`, split each into `2^j`
/// sub-stretches of mass `2^(-j)`, and tent the sub-stretch carrying the
/// largest share (at least `2^j` by pigeonhole). Oscillates along every
/// ray at summable mass and energy cost.
pub fn build_oscillator_calr(
    rho: &RadialWeight,
    p: f64,
    eps: f64,
    opts: &ParamOptions,
) -> Result<RadialFunction, ProfileError> {
    if p <= 1.0 {
        return Err(ProfileError::NotApplicable(String::from(
            "for p = 1 the refined parameter equals R; use the p = 1 oscillator",
        )));
    }
    let report = param_cal_r(rho, p, eps, opts.max_cells, opts.t_max, opts.partition_tol)
        .map_err(|e| ProfileError::NotApplicable(format!("{e}")))?;
    if !report.used_partition {
        return Err(ProfileError::NotApplicable(String::from(
            "the weight is integrable, so the refined parameter equals R",
        )));
    }
    let partition = crate::params::partition_unit_mass(
        rho,
        opts.max_cells,
        opts.t_max,
        opts.partition_tol,
    )
    .map_err(|e| ProfileError::NotApplicable(format!("{e}")))?;
    let cells: Vec<(f64, f64)> = partition.cells().collect();
    let logf = |t: f64| rp_log_integrand(rho, p, eps, t);
    let ln4 = math::ln(4.0);
    let mut tents = Vec::new();
    let mut next_cell = 0usize;
    let mut j = 1u32;
    while next_cell < cells.len() && tents.len() < 512 {
        // First later cell whose W-integral clears 4^j.
        let threshold = j as f64 * ln4;
        let mut chosen = None;
        for (idx, &(lo, hi)) in cells.iter().enumerate().skip(next_cell) {
            let kinks = rho.kinks_in(lo, hi);
            let shift = log_max_on(logf, lo, hi, &kinks);
            let shifted = shifted_integral(&logf, shift, lo, hi, &kinks);
            if shifted > 0.0 && shift + math::ln(shifted) > threshold {
                chosen = Some(idx);
                break;
            }
        }
        let Some(idx) = chosen else { break };
        let (lo, hi) = cells[idx];
        // Split the cell into 2^j stretches of rho-mass 2^(-j) and keep
        // the one with the largest W-share.
        let pieces = 1usize << j.min(20);
        let target = partition.cell_masses()[idx] / pieces as f64;
        let mut cuts = Vec::with_capacity(pieces + 1);
        cuts.push(lo);
        for _ in 0..pieces - 1 {
            let prev = *cuts.last().unwrap();
            let mut a = prev;
            let mut b = hi;
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                let m = rho.mass_on(prev, mid);
                if (m - target).abs() <= 1e-15 {
                    a = mid;
                    b = mid;
                    break;
                }
                if m < target {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            cuts.push(0.5 * (a + b));
        }
        cuts.push(hi);
        let mut best: Option<(f64, f64, f64)> = None;
        for w in cuts.windows(2) {
            let kinks = rho.kinks_in(w[0], w[1]);
            let shift = log_max_on(logf, w[0], w[1], &kinks);
            let shifted = shifted_integral(&logf, shift, w[0], w[1], &kinks);
            if !(shifted > 0.0) {
                continue;
            }
            let log_share = shift + math::ln(shifted);
            if best.map_or(true, |(s, _, _)| log_share > s) {
                best = Some((log_share, w[0], w[1]));
            }
        }
        if let Some((_, a, b)) = best {
            if let Some(tent) = make_tent(rho, p, eps, TentSpeed::RpIntegrand, a, b) {
                tents.push(tent);
            }
        }
        next_cell = idx + 1;
        j += 1;
    }
    if tents.len() < 2 {
        return Err(ProfileError::InsufficientStructure(format!(
            "per-cell integrals do not climb the 4^k ladder on this horizon \
             ({} qualifying cells)",
            tents.len()
        )));
    }
    Ok(RadialFunction::Tents(TentProfile { rho: rho.clone(), p, eps, tents }))
}

/// The finite-measure weight `rho(t) = e^(-t^2 - eps p t)` whose refined
/// parameter is infinite, together with its unit-interval tent profile:
/// a Sobolev function whose ray limits oscillate between 0 and 1 forever
/// while all level-`n` vertex values are exactly 0.
pub fn build_example11(
    p: f64,
    eps: f64,
    t_max: f64,
) -> (RadialWeight, RadialFunction) {
    assert!(p >= 1.0 && eps > 0.0 && t_max >= 2.0);
    let rho = RadialWeight::example11(p, eps).expect("valid parameters");
    let speed = if p > 1.0 { TentSpeed::RpIntegrand } else { TentSpeed::InverseRhoDs };
    let cells = math::ceil(t_max) as usize;
    let mut tents = Vec::with_capacity(cells);
    for n in 0..cells {
        if let Some(tent) = make_tent(&rho, p, eps, speed, n as f64, (n + 1) as f64) {
            tents.push(tent);
        }
    }
    let profile = RadialFunction::Tents(TentProfile { rho: rho.clone(), p, eps, tents });
    (rho, profile)
}
