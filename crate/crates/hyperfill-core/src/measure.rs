//! The lifted measure on the filling.
//!
//! A radial weight `rho : [0, infinity) -> (0, infinity)` turns the filling
//! into a measure space: on an edge with endpoint balls of nu-mass `m_1`
//! and `m_2`, the measure element is `rho(|x|) (m_1 + m_2) d|x|` along the
//! edge parameter. (At a vertex the natural density would be `2 rho |x|
//! nu(B_v)`, but vertices form a d|x|-null set, so integrals never see it;
//! [`RadialWeight::vertex_density`] records the convention.)
//!
//! Integrals over the whole filling are per-edge adaptive quadratures
//! summed pairwise in fixed edge order, so results are deterministic.
//! Integrals along a geodesic ray come in two flavors: `Plain` integrates
//! against the measure itself, `MassNormalized` divides by the ball mass
//! of the nearest ray vertex — the weighting under which boundary and
//! filling integrals become comparable (see [`lemma28_ratio`]).
//!
//! Total mass: `mu(X)` is finite exactly when `int_0^inf rho < infinity`;
//! [`total_mass`] tracks the truncated ratio `mu(X_N) / (nu(Z) int_0^N
//! rho)`, which stays in a bounded window as the truncation deepens.

use alloc::string::String;
use alloc::vec::Vec;

use crate::filling::{EdgeId, EdgeKind, Filling};
use crate::geometry::{EdgePoint, GeodesicRay};
use crate::math::{self, QuadratureFailure};

/// Quadrature tolerance used for every per-edge integral.
pub const EDGE_TOL: f64 = 1e-10;

/// Declared integrability of a weight's tail (meaningful for sampled
/// tables, derived from the closed form for analytic families).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailBehavior {
    Integrable,
    Nonintegrable,
    Unknown,
}

/// Result of an improper integral `int_0^inf`: exact (analytic tail),
/// a flagged lower bound (tail unknown), or divergent with the reason.
#[derive(Debug, Clone, PartialEq)]
pub enum MassEstimate {
    Exact(f64),
    LowerBound(f64),
    Infinite { certificate: String },
}

impl MassEstimate {
    pub fn is_finite(&self) -> bool {
        !matches!(self, MassEstimate::Infinite { .. })
    }

    /// Numeric value when finite (exact or lower bound).
    pub fn value(&self) -> Option<f64> {
        match self {
            MassEstimate::Exact(v) | MassEstimate::LowerBound(v) => Some(*v),
            MassEstimate::Infinite { .. } => None,
        }
    }
}

/// Weight construction failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WeightError {
    InvalidParameter(&'static str),
}

impl core::fmt::Display for WeightError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            WeightError::InvalidParameter(what) => write!(f, "invalid weight parameter: {what}"),
        }
    }
}

impl core::error::Error for WeightError {}

/// The supported weight families.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialFamily {
    /// `rho = value`.
    Constant { value: f64 },
    /// `rho(t) = e^(-lambda t)`.
    ExpRate { lambda: f64 },
    /// `rho(t) = e^(-eps p (1 - theta) t)`: the exponential family whose
    /// trace spaces are Besov spaces of smoothness `theta`.
    Bbs { theta: f64, p: f64, eps: f64 },
    /// `rho(t) = e^(-t^2 - eps p t)`: superexponential decay, the weight
    /// whose traces exist but along divergent rays.
    Example11 { p: f64, eps: f64 },
    /// Weight pinched to (nearly) zero at one instant:
    /// `rho(t) = max(|t - center|^power, floor) * e^(-rate t)`.
    /// The polynomial zero is what pushes a weight out of the admissible
    /// class once `power` is large enough relative to `p`.
    Dip { center: f64, power: f64, rate: f64, floor: f64 },
    /// Piecewise exponential: on `[breaks[i], breaks[i+1])` the weight is
    /// `values[i] * e^(-rates[i] (t - breaks[i]))`; the last segment
    /// extends to infinity.
    Piecewise { breaks: Vec<f64>, values: Vec<f64>, rates: Vec<f64> },
    /// Linear interpolation through samples at `start + k * step`, held
    /// constant outside the sampled range; the tail must be declared.
    Custom { start: f64, step: f64, samples: Vec<f64>, tail: TailBehavior },
}

/// A validated radial weight.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialWeight {
    family: RadialFamily,
}

impl RadialWeight {
    pub fn constant(value: f64) -> Result<Self, WeightError> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(WeightError::InvalidParameter("constant weight must be positive"));
        }
        Ok(Self { family: RadialFamily::Constant { value } })
    }

    pub fn exp_rate(lambda: f64) -> Result<Self, WeightError> {
        if !lambda.is_finite() {
            return Err(WeightError::InvalidParameter("exponential rate must be finite"));
        }
        Ok(Self { family: RadialFamily::ExpRate { lambda } })
    }

    pub fn bbs(theta: f64, p: f64, eps: f64) -> Result<Self, WeightError> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(WeightError::InvalidParameter("theta must lie in (0, 1]"));
        }
        if !(p >= 1.0 && p.is_finite()) {
            return Err(WeightError::InvalidParameter("p must satisfy p >= 1"));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(WeightError::InvalidParameter("eps must be positive"));
        }
        Ok(Self { family: RadialFamily::Bbs { theta, p, eps } })
    }

    pub fn example11(p: f64, eps: f64) -> Result<Self, WeightError> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(WeightError::InvalidParameter("p must satisfy p >= 1"));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(WeightError::InvalidParameter("eps must be positive"));
        }
        Ok(Self { family: RadialFamily::Example11 { p, eps } })
    }

    /// `rho(t) = max(|t - center|^power, floor) e^(-rate t)`, with a hard
    /// positivity floor of `1e-300` at the pinch.
    pub fn dip(center: f64, power: f64, rate: f64) -> Result<Self, WeightError> {
        if !(center >= 0.0 && center.is_finite()) {
            return Err(WeightError::InvalidParameter("dip center must be >= 0"));
        }
        if !(power > 0.0 && power.is_finite()) {
            return Err(WeightError::InvalidParameter("dip power must be positive"));
        }
        if !rate.is_finite() {
            return Err(WeightError::InvalidParameter("dip rate must be finite"));
        }
        Ok(Self { family: RadialFamily::Dip { center, power, rate, floor: 1e-300 } })
    }

    pub fn piecewise(
        breaks: Vec<f64>,
        values: Vec<f64>,
        rates: Vec<f64>,
    ) -> Result<Self, WeightError> {
        if breaks.is_empty() || breaks.len() != values.len() || breaks.len() != rates.len() {
            return Err(WeightError::InvalidParameter(
                "piecewise weight needs equally many breaks, values, and rates",
            ));
        }
        if breaks[0] != 0.0 {
            return Err(WeightError::InvalidParameter("first break must be 0"));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(WeightError::InvalidParameter("breaks must be strictly increasing"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(WeightError::InvalidParameter("segment values must be positive"));
        }
        if rates.iter().any(|r| !r.is_finite()) {
            return Err(WeightError::InvalidParameter("segment rates must be finite"));
        }
        Ok(Self { family: RadialFamily::Piecewise { breaks, values, rates } })
    }

    pub fn custom(
        start: f64,
        step: f64,
        samples: Vec<f64>,
        tail: TailBehavior,
    ) -> Result<Self, WeightError> {
        if samples.len() < 2 {
            return Err(WeightError::InvalidParameter("custom weight needs >= 2 samples"));
        }
        if !(start >= 0.0 && start.is_finite()) {
            return Err(WeightError::InvalidParameter("sample start must be >= 0"));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(WeightError::InvalidParameter("sample step must be positive"));
        }
        if samples.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(WeightError::InvalidParameter("samples must be positive"));
        }
        Ok(Self { family: RadialFamily::Custom { start, step, samples, tail } })
    }

    pub fn family(&self) -> &RadialFamily {
        &self.family
    }

    /// Point evaluation `rho(t)` (clamped to `t >= 0`).
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match &self.family {
            RadialFamily::Constant { value } => *value,
            RadialFamily::ExpRate { lambda } => math::exp(-lambda * t),
            RadialFamily::Bbs { theta, p, eps } => math::exp(-eps * p * (1.0 - theta) * t),
            RadialFamily::Example11 { p, eps } => math::exp(-t * t - eps * p * t),
            RadialFamily::Dip { center, power, rate, floor } => {
                let poly = math::powf((t - center).abs(), *power).max(*floor);
                poly * math::exp(-rate * t)
            }
            RadialFamily::Piecewise { breaks, values, rates } => {
                let i = segment_index(breaks, t);
                values[i] * math::exp(-rates[i] * (t - breaks[i]))
            }
            RadialFamily::Custom { start, step, samples, .. } => {
                if t <= *start {
                    return samples[0];
                }
                let end = start + step * (samples.len() - 1) as f64;
                if t >= end {
                    return *samples.last().unwrap();
                }
                let u = (t - start) / step;
                let i = (u as usize).min(samples.len() - 2);
                let frac = u - i as f64;
                samples[i] * (1.0 - frac) + samples[i + 1] * frac
            }
        }
    }

    /// The density the measure would assign exactly at a vertex of ball
    /// mass `m`; a d|x|-null set, so no integral depends on it.
    pub fn vertex_density(&self, level: u32, ball_mass: f64) -> f64 {
        2.0 * self.eval(level as f64) * ball_mass
    }

    /// `log rho(t)`, kept exact in the exponent even where `rho` itself
    /// would overflow or underflow an f64 — the trace parameters are
    /// integrals of `rho` raised to negative powers and live in log space.
    pub fn log_eval(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match &self.family {
            RadialFamily::Constant { value } => math::ln(*value),
            RadialFamily::ExpRate { lambda } => -lambda * t,
            RadialFamily::Bbs { theta, p, eps } => -eps * p * (1.0 - theta) * t,
            RadialFamily::Example11 { p, eps } => -t * t - eps * p * t,
            RadialFamily::Dip { center, power, rate, floor } => {
                let d = (t - center).abs();
                let poly = if d > 0.0 { power * math::ln(d) } else { f64::NEG_INFINITY };
                poly.max(math::ln(*floor)) - rate * t
            }
            RadialFamily::Piecewise { breaks, values, rates } => {
                let i = segment_index(breaks, t);
                math::ln(values[i]) - rates[i] * (t - breaks[i])
            }
            RadialFamily::Custom { .. } => math::ln(self.eval(t)),
        }
    }

    /// Upper bound for where the weight's structure (breaks, samples, the
    /// dip) lives; pure-exponential tail analysis is valid past this point.
    pub fn feature_horizon(&self) -> f64 {
        match &self.family {
            RadialFamily::Piecewise { breaks, .. } => *breaks.last().unwrap(),
            RadialFamily::Custom { start, step, samples, .. } => {
                start + step * (samples.len() - 1) as f64
            }
            RadialFamily::Dip { center, .. } => *center,
            _ => 0.0,
        }
    }

    /// `int_lo^hi rho(t) dt`, in closed form wherever the family allows.
    pub fn mass_on(&self, lo: f64, hi: f64) -> f64 {
        let lo = lo.max(0.0);
        if !(hi > lo) {
            return 0.0;
        }
        match &self.family {
            RadialFamily::Constant { value } => value * (hi - lo),
            RadialFamily::ExpRate { lambda } => exp_segment_mass(1.0, *lambda, 0.0, lo, hi),
            RadialFamily::Bbs { theta, p, eps } => {
                exp_segment_mass(1.0, eps * p * (1.0 - theta), 0.0, lo, hi)
            }
            RadialFamily::Example11 { .. } | RadialFamily::Dip { .. } => {
                let kinks = self.kinks_in(lo, hi);
                math::integrate_adaptive(|t| self.eval(t), lo, hi, 1e-13, &kinks)
                    .map(|v| v.max(0.0))
                    .unwrap_or(f64::NAN)
            }
            RadialFamily::Piecewise { breaks, values, rates } => {
                let mut total = 0.0;
                for i in 0..breaks.len() {
                    let seg_lo = breaks[i].max(lo);
                    let seg_hi = if i + 1 < breaks.len() { breaks[i + 1].min(hi) } else { hi };
                    if seg_hi > seg_lo {
                        total += exp_segment_mass(values[i], rates[i], breaks[i], seg_lo, seg_hi);
                    }
                }
                total
            }
            RadialFamily::Custom { start, step, samples, .. } => {
                // Exact integral of the piecewise-linear interpolant: split
                // at sample nodes and use the trapezoid value per piece.
                let mut nodes: Vec<f64> = Vec::with_capacity(samples.len() + 2);
                nodes.push(lo);
                for k in 0..samples.len() {
                    let t = start + step * k as f64;
                    if t > lo && t < hi {
                        nodes.push(t);
                    }
                }
                nodes.push(hi);
                let mut total = 0.0;
                for w in nodes.windows(2) {
                    total += 0.5 * (self.eval(w[0]) + self.eval(w[1])) * (w[1] - w[0]);
                }
                total
            }
        }
    }

    /// Interior non-smooth points of `rho` in `(lo, hi)` — quadrature
    /// intervals are split there.
    pub fn kinks_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        match &self.family {
            RadialFamily::Piecewise { breaks, .. } => {
                breaks.iter().copied().filter(|b| *b > lo && *b < hi).collect()
            }
            RadialFamily::Custom { start, step, samples, .. } => (0..samples.len())
                .map(|k| start + step * k as f64)
                .filter(|t| *t > lo && *t < hi)
                .collect(),
            RadialFamily::Dip { center, .. } => {
                if *center > lo && *center < hi {
                    alloc::vec![*center]
                } else {
                    Vec::new()
                }
            }
            _ => Vec::new(),
        }
    }

    /// Declared or derived integrability of the tail.
    pub fn tail_behavior(&self) -> TailBehavior {
        match &self.family {
            RadialFamily::Constant { .. } => TailBehavior::Nonintegrable,
            RadialFamily::ExpRate { lambda } => {
                if *lambda > 0.0 {
                    TailBehavior::Integrable
                } else {
                    TailBehavior::Nonintegrable
                }
            }
            RadialFamily::Bbs { theta, .. } => {
                if *theta < 1.0 {
                    TailBehavior::Integrable
                } else {
                    TailBehavior::Nonintegrable
                }
            }
            RadialFamily::Example11 { .. } => TailBehavior::Integrable,
            RadialFamily::Dip { rate, .. } => {
                if *rate > 0.0 {
                    TailBehavior::Integrable
                } else {
                    TailBehavior::Nonintegrable
                }
            }
            RadialFamily::Piecewise { rates, .. } => {
                if *rates.last().unwrap() > 0.0 {
                    TailBehavior::Integrable
                } else {
                    TailBehavior::Nonintegrable
                }
            }
            RadialFamily::Custom { tail, .. } => *tail,
        }
    }

    /// `int_0^inf rho(t) dt`: closed form plus analytic tail when the
    /// family provides one, flagged lower bound otherwise. `t_max` bounds
    /// the numeric part for families without a global closed form.
    pub fn total_mass_estimate(&self, t_max: f64) -> MassEstimate {
        match &self.family {
            RadialFamily::Constant { .. } => MassEstimate::Infinite {
                certificate: String::from("constant weight: the tail integral grows linearly"),
            },
            RadialFamily::ExpRate { lambda } => {
                if *lambda > 0.0 {
                    MassEstimate::Exact(1.0 / lambda)
                } else {
                    MassEstimate::Infinite {
                        certificate: String::from(
                            "nonpositive decay rate: the tail integral diverges",
                        ),
                    }
                }
            }
            RadialFamily::Bbs { theta, p, eps } => {
                let rate = eps * p * (1.0 - theta);
                if rate > 0.0 {
                    MassEstimate::Exact(1.0 / rate)
                } else {
                    MassEstimate::Infinite {
                        certificate: String::from("theta = 1 degenerates to a constant weight"),
                    }
                }
            }
            RadialFamily::Example11 { p, eps } => {
                // rho <= e^(-t^2), so the tail past T is below
                // e^(-T^2) / (2T); negligible at any reasonable horizon.
                let horizon = t_max.max(12.0);
                let body = self.mass_on(0.0, horizon);
                let tail = math::exp(-horizon * horizon - eps * p * horizon) / (2.0 * horizon);
                if tail < 1e-300 || tail < 1e-15 * body {
                    MassEstimate::Exact(body)
                } else {
                    MassEstimate::LowerBound(body)
                }
            }
            RadialFamily::Dip { center, power, rate, .. } => {
                if *rate <= 0.0 {
                    return MassEstimate::Infinite {
                        certificate: String::from(
                            "polynomial growth without decay: the tail integral diverges",
                        ),
                    };
                }
                // Past T >= center + 2 power / rate the integrand decays at
                // rate >= rate/2, so the tail stays below twice its lead term.
                let horizon = t_max.max(center + 2.0 * power / rate + 1.0);
                let body = self.mass_on(0.0, horizon);
                let tail = 2.0 * self.eval(horizon) / rate;
                if tail < 1e-300 || tail < 1e-12 * body {
                    MassEstimate::Exact(body)
                } else {
                    MassEstimate::LowerBound(body)
                }
            }
            RadialFamily::Piecewise { breaks, values, rates } => {
                let last = breaks.len() - 1;
                if rates[last] > 0.0 {
                    let body = self.mass_on(0.0, breaks[last]);
                    let tail = values[last] / rates[last];
                    MassEstimate::Exact(body + tail)
                } else {
                    MassEstimate::Infinite {
                        certificate: String::from(
                            "final segment does not decay: the tail integral diverges",
                        ),
                    }
                }
            }
            RadialFamily::Custom { start, step, samples, tail } => {
                let end = start + step * (samples.len() - 1) as f64;
                let body = self.mass_on(0.0, end.min(t_max));
                match tail {
                    TailBehavior::Nonintegrable => MassEstimate::Infinite {
                        certificate: String::from("declared nonintegrable tail"),
                    },
                    TailBehavior::Integrable | TailBehavior::Unknown => {
                        MassEstimate::LowerBound(body)
                    }
                }
            }
        }
    }

    /// Short human-readable description for reports.
    pub fn describe(&self) -> String {
        match &self.family {
            RadialFamily::Constant { value } => alloc::format!("constant({value})"),
            RadialFamily::ExpRate { lambda } => alloc::format!("exp_rate(lambda={lambda})"),
            RadialFamily::Bbs { theta, p, eps } => {
                alloc::format!("bbs(theta={theta}, p={p}, eps={eps:.6})")
            }
            RadialFamily::Example11 { p, eps } => {
                alloc::format!("example11(p={p}, eps={eps:.6})")
            }
            RadialFamily::Dip { center, power, rate, .. } => {
                alloc::format!("dip(center={center}, power={power}, rate={rate})")
            }
            RadialFamily::Piecewise { breaks, .. } => {
                alloc::format!("piecewise({} segments)", breaks.len())
            }
            RadialFamily::Custom { samples, .. } => {
                alloc::format!("custom({} samples)", samples.len())
            }
        }
    }
}

/// Index of the piecewise segment containing `t`.
fn segment_index(breaks: &[f64], t: f64) -> usize {
    breaks.partition_point(|b| *b <= t).saturating_sub(1)
}

/// `int_lo^hi v e^(-r (t - base)) dt`, stable for small `r`.
fn exp_segment_mass(v: f64, r: f64, base: f64, lo: f64, hi: f64) -> f64 {
    if r == 0.0 {
        return v * (hi - lo);
    }
    // v e^(-r (lo - base)) * (1 - e^(-r (hi - lo))) / r
    v * math::exp(-r * (lo - base)) * (-math::exp_m1(-r * (hi - lo))) / r
}

/// Height along an edge whose endpoints sit at levels `la`, `lb`.
#[inline]
fn edge_height(la: f64, lb: f64, t: f64) -> f64 {
    (la + t).min(lb + (1.0 - t))
}

/// Map a height-space kink `h` to edge parameters on the edge `(la, lb)`.
fn height_kink_to_params(la: f64, lb: f64, kind: EdgeKind, h: f64, out: &mut Vec<f64>) {
    match kind {
        EdgeKind::Vertical => {
            let t = h - la;
            if t > 0.0 && t < 1.0 {
                out.push(t);
            }
        }
        EdgeKind::Horizontal => {
            debug_assert_eq!(la, lb);
            let t = h - la;
            if t > 0.0 && t < 0.5 {
                out.push(t);
                out.push(1.0 - t);
            } else if t == 0.5 {
                out.push(0.5);
            }
        }
    }
}

/// Quadrature split points for an edge: the height kink of horizontal
/// edges, pullbacks of `rho`'s own kinks, and any caller-supplied heights
/// (`extra`, given in height space).
fn edge_kinks(
    filling: &Filling,
    edge: EdgeId,
    rho: &RadialWeight,
    extra_heights: &[f64],
) -> (f64, f64, EdgeKind, Vec<f64>) {
    let e = filling.edges()[edge.0];
    let la = filling.vertices()[e.a.0].level as f64;
    let lb = filling.vertices()[e.b.0].level as f64;
    let mut kinks = Vec::new();
    if e.kind == EdgeKind::Horizontal {
        kinks.push(0.5);
    }
    let (h_lo, h_hi) = match e.kind {
        EdgeKind::Vertical => (la.min(lb), la.max(lb)),
        EdgeKind::Horizontal => (la, la + 0.5),
    };
    for h in rho.kinks_in(h_lo, h_hi) {
        height_kink_to_params(la, lb, e.kind, h, &mut kinks);
    }
    for &h in extra_heights {
        if h > h_lo && h < h_hi {
            height_kink_to_params(la, lb, e.kind, h, &mut kinks);
        }
    }
    (la, lb, e.kind, kinks)
}

/// Measure of a single edge: `(m_1 + m_2) int_0^1 rho(|x(t)|) dt`.
pub fn edge_measure(
    filling: &Filling,
    rho: &RadialWeight,
    edge: EdgeId,
) -> Result<f64, QuadratureFailure> {
    let e = filling.edges()[edge.0];
    let mass = filling.vertices()[e.a.0].mass + filling.vertices()[e.b.0].mass;
    let (la, lb, _, kinks) = edge_kinks(filling, edge, rho, &[]);
    let integral = math::integrate_adaptive(
        |t| rho.eval(edge_height(la, lb, t)),
        0.0,
        1.0,
        EDGE_TOL,
        &kinks,
    )?;
    Ok(mass * integral)
}

/// `int_X f dmu` over the truncated filling: per-edge quadrature in fixed
/// edge order, pairwise-summed. `extra_heights(edge)` may supply further
/// split heights for integrands with known kinks.
pub fn integrate_over_filling_split<F, K>(
    filling: &Filling,
    rho: &RadialWeight,
    f: F,
    extra_heights: K,
) -> Result<f64, QuadratureFailure>
where
    F: Fn(EdgePoint) -> f64,
    K: Fn(EdgeId) -> Vec<f64>,
{
    let mut parts = Vec::with_capacity(filling.edge_count());
    for i in 0..filling.edge_count() {
        let edge = EdgeId(i);
        let e = filling.edges()[i];
        let mass = filling.vertices()[e.a.0].mass + filling.vertices()[e.b.0].mass;
        let extra = extra_heights(edge);
        let (la, lb, _, kinks) = edge_kinks(filling, edge, rho, &extra);
        let integral = math::integrate_adaptive(
            |t| f(EdgePoint { edge, t }) * rho.eval(edge_height(la, lb, t)),
            0.0,
            1.0,
            EDGE_TOL,
            &kinks,
        )?;
        parts.push(mass * integral);
    }
    Ok(math::pairwise_sum(&parts))
}

/// [`integrate_over_filling_split`] without extra split points.
pub fn integrate_over_filling<F>(
    filling: &Filling,
    rho: &RadialWeight,
    f: F,
) -> Result<f64, QuadratureFailure>
where
    F: Fn(EdgePoint) -> f64,
{
    integrate_over_filling_split(filling, rho, f, |_| Vec::new())
}

/// Weighting mode for ray integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RayIntegrand {
    /// `int f dmu` along the ray.
    Plain,
    /// `int f / nu(B_(v_x)) dmu`: divide by the ball mass of the nearest
    /// ray vertex (ties at the edge midpoint go to the lower level).
    MassNormalized,
}

/// Integral of `f` along a truncated geodesic ray.
pub fn integrate_along_ray<F>(
    filling: &Filling,
    ray: &GeodesicRay,
    rho: &RadialWeight,
    f: F,
    mode: RayIntegrand,
) -> Result<f64, QuadratureFailure>
where
    F: Fn(EdgePoint) -> f64,
{
    let edges = filling
        .ray_edges(ray)
        .expect("verified ray: consecutive vertices are adjacent");
    let mut parts = Vec::with_capacity(edges.len());
    for (n, &edge) in edges.iter().enumerate() {
        let e = filling.edges()[edge.0];
        let mass = filling.vertices()[e.a.0].mass + filling.vertices()[e.b.0].mass;
        // Ray edges are vertical; find which endpoint is the ray's level-n
        // vertex so the nearest-vertex rule can be phrased in t.
        let v_low = ray.vertex(n as u32);
        let low_is_a = e.a == v_low;
        debug_assert!(low_is_a || e.b == v_low);
        let m_low = filling.vertices()[v_low.0].mass;
        let m_high = filling.vertices()[ray.vertex(n as u32 + 1).0].mass;
        let (la, lb, _, mut kinks) = edge_kinks(filling, edge, rho, &[]);
        let value = match mode {
            RayIntegrand::Plain => math::integrate_adaptive(
                |t| f(EdgePoint { edge, t }) * rho.eval(edge_height(la, lb, t)),
                0.0,
                1.0,
                EDGE_TOL,
                &kinks,
            )?,
            RayIntegrand::MassNormalized => {
                kinks.push(0.5);
                math::integrate_adaptive(
                    |t| {
                        // Parameter distance to the low endpoint.
                        let s = if low_is_a { t } else { 1.0 - t };
                        let near_mass = if s <= 0.5 { m_low } else { m_high };
                        f(EdgePoint { edge, t }) * rho.eval(edge_height(la, lb, t)) / near_mass
                    },
                    0.0,
                    1.0,
                    EDGE_TOL,
                    &kinks,
                )?
            }
        };
        parts.push(mass * value);
    }
    Ok(math::pairwise_sum(&parts))
}

/// Comparability report for the boundary-vs-filling integral identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma28Report {
    /// `sum_xi nu_xi int_(ray to xi) phi(|x|)^p / nu(B_(v_x)) dmu`.
    pub lhs: f64,
    /// `int_X phi(|x|)^p dmu`.
    pub rhs: f64,
    pub ratio: f64,
}

/// Compare the mass-normalized ray integrals of `phi(|x|)^p`, averaged
/// over boundary points, against the plain filling integral.
pub fn lemma28_ratio<F>(
    filling: &Filling,
    rho: &RadialWeight,
    phi: F,
    p: f64,
) -> Result<Lemma28Report, QuadratureFailure>
where
    F: Fn(f64) -> f64,
{
    let height_of = |x: EdgePoint| {
        let e = filling.edges()[x.edge.0];
        edge_height(
            filling.vertices()[e.a.0].level as f64,
            filling.vertices()[e.b.0].level as f64,
            x.t,
        )
    };
    let integrand = |x: EdgePoint| math::powf(phi(height_of(x)).max(0.0), p);
    let mut parts = Vec::with_capacity(filling.space().len());
    for xi in 0..filling.space().len() {
        let ray = &filling
            .enumerate_rays(xi, 1)
            .expect("xi indexes a sample point")[0];
        let along =
            integrate_along_ray(filling, ray, rho, integrand, RayIntegrand::MassNormalized)?;
        parts.push(filling.space().weight(xi) * along);
    }
    let lhs = math::pairwise_sum(&parts);
    let rhs = integrate_over_filling(filling, rho, integrand)?;
    Ok(Lemma28Report { lhs, rhs, ratio: lhs / rhs })
}

/// Truncated total-mass comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TotalMassReport {
    /// `mu` of the edges lying below level `N`.
    pub mu_xn: f64,
    /// `nu(Z) * int_0^N rho(t) dt`.
    pub reference: f64,
    pub ratio: f64,
}

/// Compare `mu(X_N)` (edges with both endpoints at level `<= N`) against
/// the product `nu(Z) int_0^N rho`.
pub fn total_mass(
    filling: &Filling,
    rho: &RadialWeight,
    n: u32,
) -> Result<TotalMassReport, QuadratureFailure> {
    let mut parts = Vec::new();
    for i in 0..filling.edge_count() {
        let e = filling.edges()[i];
        let top = filling.vertices()[e.a.0].level.max(filling.vertices()[e.b.0].level);
        if top <= n {
            parts.push(edge_measure(filling, rho, EdgeId(i))?);
        }
    }
    let mu_xn = math::pairwise_sum(&parts);
    let reference = filling.space().total_mass() * rho.mass_on(0.0, n as f64);
    Ok(TotalMassReport { mu_xn, reference, ratio: mu_xn / reference })
}

/// Empirical check of the nearest-vertex mass convention: on every edge,
/// `nu(B_(v_x)) / (nu(B_(v_1)) + nu(B_(v_2)))` stays within `[c, 1]` with
/// `c = 1 / (1 + max neighbor mass ratio)`.
pub fn nearest_vertex_mass_window(filling: &Filling) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for e in filling.edges() {
        let ma = filling.vertices()[e.a.0].mass;
        let mb = filling.vertices()[e.b.0].mass;
        for m in [ma, mb] {
            let frac = m / (ma + mb);
            lo = lo.min(frac);
            hi = hi.max(frac);
        }
    }
    (lo, hi)
}
