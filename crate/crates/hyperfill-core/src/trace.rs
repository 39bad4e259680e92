//! Boundary traces of functions defined on the filling.
//!
//! A function on the filling restricts to each geodesic ray, and its
//! boundary behaviour at the ray's target is read off from the tail of
//! that restriction.  Two notions of trace live here:
//!
//! * the *ray trace*: the limit of `u` along every geodesic ray ending
//!   at a boundary point, required to exist and agree across rays (we
//!   also classify interleavings of ray pairs, which are themselves
//!   valid rays and catch two rays converging to different values);
//! * the *averaged trace*: the limit of the level-`n` vertex means of
//!   `u` over the cone of net points around the boundary point.
//!
//! When both exist they agree, but they can differ dramatically: a
//! profile oscillating between 0 and 1 inside every unit band has all
//! vertex values 0 — the averaged trace vanishes identically while no
//! ray trace exists.  The [`classify_samples`] detector tells the two
//! situations apart from finitely many samples, with an explicit
//! `Undetermined` verdict for the gray zone.
//!
//! The module also carries the Sobolev-type energies used to price
//! such profiles: `L^p` norms of the function and of an upper gradient
//! against the weighted measure, and a per-band breakdown of the
//! gradient energy for comparing against summable bounds.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::filling::{EdgeId, EdgeKind, Filling, FillingError};
use crate::geometry::{interleave_rays, EdgePoint, GeodesicRay, RayError};
use crate::math::{self, QuadratureFailure};
use crate::measure::{integrate_over_filling_split, RadialWeight, EDGE_TOL};
use crate::profile::RadialFunction;

/// Default tolerance for declaring a sampled tail convergent.
pub const TRACE_TOL: f64 = 1e-4;
/// Default number of unit-height windows inspected at the tail.
pub const TRACE_WINDOW: usize = 5;
/// Tail variation at least this multiple of the tolerance is reported
/// as genuine oscillation rather than slow convergence.
pub const OSCILLATION_FACTOR: f64 = 10.0;
/// Dyadic subdivisions per edge when sampling a ray restriction.
const SAMPLES_PER_EDGE: usize = 16;
/// Interleavings are formed among the first this many enumerated rays.
const INTERLEAVE_RAY_CAP: usize = 6;
/// Geometric tail ratios below this bound allow extrapolating a limit;
/// above it the monotone growth is treated as escaping.
const GEOMETRIC_RATIO_CAP: f64 = 0.9;

/// Anything that can go wrong while tracing.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceError {
    Ray(RayError),
    Filling(FillingError),
    Quadrature(QuadratureFailure),
}

impl From<RayError> for TraceError {
    fn from(e: RayError) -> Self {
        TraceError::Ray(e)
    }
}

impl From<FillingError> for TraceError {
    fn from(e: FillingError) -> Self {
        TraceError::Filling(e)
    }
}

impl From<QuadratureFailure> for TraceError {
    fn from(e: QuadratureFailure) -> Self {
        TraceError::Quadrature(e)
    }
}

impl core::fmt::Display for TraceError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TraceError::Ray(e) => write!(f, "ray error: {e}"),
            TraceError::Filling(e) => write!(f, "filling error: {e}"),
            TraceError::Quadrature(e) => write!(f, "quadrature failure: {e}"),
        }
    }
}

impl core::error::Error for TraceError {}

/// A function on the filling, evaluated pointwise on edges.
///
/// `gradient` must return an upper-gradient density with respect to
/// the uniformized length element: along any edge segment,
/// `|u(y) - u(x)| <= int g ds` is expected to hold (and is checked by
/// [`upper_gradient_deficit`]).
pub trait EdgeFunction {
    /// Value at a point of the filling.
    fn eval(&self, filling: &Filling, point: &EdgePoint) -> f64;

    /// Upper-gradient density at a point (per unit uniformized length).
    fn gradient(&self, filling: &Filling, point: &EdgePoint) -> f64;

    /// Heights in `(lo, hi)` where the function changes character
    /// (kinks, peaks, jumps); used to split quadrature and sampling.
    fn critical_heights(&self, lo: f64, hi: f64) -> Vec<f64>;
}

/// Radial profiles act on the filling through the graph height.
impl EdgeFunction for RadialFunction {
    fn eval(&self, filling: &Filling, point: &EdgePoint) -> f64 {
        match filling.graph_height(point) {
            Ok(h) => RadialFunction::value(self, h),
            Err(_) => f64::NAN,
        }
    }

    fn gradient(&self, filling: &Filling, point: &EdgePoint) -> f64 {
        match filling.graph_height(point) {
            Ok(h) => RadialFunction::gradient_density(self, h),
            Err(_) => f64::NAN,
        }
    }

    fn critical_heights(&self, lo: f64, hi: f64) -> Vec<f64> {
        RadialFunction::critical_heights(self, lo, hi)
    }
}

/// Knobs for the tail-classification heuristics.
#[derive(Debug, Clone, Copy)]
pub struct DetectorConfig {
    /// Tail variation at most this is convergence.
    pub tol: f64,
    /// Number of unit-height windows forming the inspected tail.
    pub window: usize,
    /// Variation at least `oscillation_factor * tol` is oscillation.
    pub oscillation_factor: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            tol: TRACE_TOL,
            window: TRACE_WINDOW,
            oscillation_factor: OSCILLATION_FACTOR,
        }
    }
}

/// Outcome of classifying a sampled tail.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceVerdict {
    /// The tail settles; `limit` may include a geometric extrapolation
    /// of a still-moving monotone tail.
    Converged { limit: f64 },
    /// The tail keeps visiting values this far apart.
    Oscillating { lower: f64, upper: f64 },
    /// Monotone growth with no geometric decay of the increments at
    /// the sampled depth.
    Escaping { last: f64 },
    /// Not enough structure to decide either way.
    Undetermined { detail: String },
}

impl TraceVerdict {
    /// The limit, when the verdict is `Converged`.
    pub fn converged_limit(&self) -> Option<f64> {
        match self {
            TraceVerdict::Converged { limit } => Some(*limit),
            _ => None,
        }
    }

    pub fn is_oscillating(&self) -> bool {
        matches!(self, TraceVerdict::Oscillating { .. })
    }

    /// Width of the oscillation band, when oscillating.
    pub fn oscillation_span(&self) -> Option<f64> {
        match self {
            TraceVerdict::Oscillating { lower, upper } => Some(upper - lower),
            _ => None,
        }
    }
}

impl core::fmt::Display for TraceVerdict {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TraceVerdict::Converged { limit } => write!(f, "converged to {limit}"),
            TraceVerdict::Oscillating { lower, upper } => {
                write!(f, "oscillating in [{lower}, {upper}]")
            }
            TraceVerdict::Escaping { last } => write!(f, "escaping (last value {last})"),
            TraceVerdict::Undetermined { detail } => write!(f, "undetermined: {detail}"),
        }
    }
}

/// Per-window tail summary.  `first` is the sample at the window's
/// left endpoint (an integer height along rays), which keeps the
/// window representatives uniformly spaced for extrapolation.
struct Window {
    min: f64,
    max: f64,
    first: f64,
}

/// Classify the tail of a sampled function of height.
///
/// `samples` are `(height, value)` pairs in nondecreasing height
/// order.  The samples are grouped into unit-height windows; the
/// verdict is drawn from the final `cfg.window` windows:
///
/// 1. window variation within `tol`: converged;
/// 2. globally monotone samples whose window-to-window increments
///    decay geometrically (ratio below 0.9): converged, with the
///    geometric remainder appended to the last representative; slower
///    monotone growth: escaping;
/// 3. variation beyond `oscillation_factor * tol`: oscillating;
/// 4. anything in between: undetermined.
pub fn classify_samples(samples: &[(f64, f64)], cfg: &DetectorConfig) -> TraceVerdict {
    if samples.is_empty() {
        return TraceVerdict::Undetermined { detail: String::from("no samples") };
    }
    let mut windows: Vec<Window> = Vec::new();
    let mut last_idx: Option<i64> = None;
    for &(h, v) in samples {
        let idx = math::floor(h) as i64;
        if last_idx == Some(idx) {
            let w = windows.last_mut().expect("window exists for seen index");
            w.min = w.min.min(v);
            w.max = w.max.max(v);
        } else {
            last_idx = Some(idx);
            windows.push(Window { min: v, max: v, first: v });
        }
    }
    if windows.len() < cfg.window {
        return TraceVerdict::Undetermined {
            detail: format!(
                "only {} height windows sampled, detector needs {}",
                windows.len(),
                cfg.window
            ),
        };
    }

    let tail = &windows[windows.len() - cfg.window..];
    let tail_max = tail.iter().map(|w| w.max).fold(f64::NEG_INFINITY, f64::max);
    let tail_min = tail.iter().map(|w| w.min).fold(f64::INFINITY, f64::min);
    let osc = tail_max - tail_min;
    if osc <= cfg.tol {
        return TraceVerdict::Converged { limit: 0.5 * (tail_max + tail_min) };
    }

    // A globally monotone restriction never oscillates; decide between
    // a convergent geometric tail and genuine escape.
    let scale = samples.iter().map(|&(_, v)| math::abs(v)).fold(0.0f64, f64::max);
    let slack = 1e-9 * (1.0 + scale);
    let nondecreasing = samples.windows(2).all(|w| w[1].1 >= w[0].1 - slack);
    let nonincreasing = samples.windows(2).all(|w| w[1].1 <= w[0].1 + slack);
    if nondecreasing || nonincreasing {
        let reps: Vec<f64> = windows.iter().map(|w| w.first).collect();
        let take = reps.len().min(cfg.window + 1);
        let tail_reps = &reps[reps.len() - take..];
        let incs: Vec<f64> = tail_reps.windows(2).map(|w| w[1] - w[0]).collect();
        let last_value = samples.last().expect("nonempty").1;
        if incs.len() >= 2 && incs.iter().all(|&d| d != 0.0) {
            let same_sign = incs.iter().all(|&d| d > 0.0) || incs.iter().all(|&d| d < 0.0);
            let mut ratio_max = 0.0f64;
            for pair in incs.windows(2) {
                ratio_max = ratio_max.max(math::abs(pair[1] / pair[0]));
            }
            if same_sign && ratio_max < GEOMETRIC_RATIO_CAP {
                let n = incs.len();
                let r = math::abs(incs[n - 1] / incs[n - 2]);
                // Geometric remainder past the last representative,
                // plus the step from the representative to the final
                // sample (they differ when the deepest window is only
                // partially sampled).
                let remainder = incs[n - 1] * r / (1.0 - r);
                return TraceVerdict::Converged {
                    limit: tail_reps[tail_reps.len() - 1] + remainder,
                };
            }
        }
        return TraceVerdict::Escaping { last: last_value };
    }

    if osc >= cfg.oscillation_factor * cfg.tol {
        return TraceVerdict::Oscillating { lower: tail_min, upper: tail_max };
    }
    TraceVerdict::Undetermined {
        detail: format!(
            "tail variation {osc:.3e} sits between the convergence tolerance and the oscillation threshold"
        ),
    }
}

/// Restriction of a function to one geodesic ray, classified.
#[derive(Debug, Clone)]
pub struct RayTrace {
    pub verdict: TraceVerdict,
    /// Number of edges the ray contributes.
    pub depth: usize,
    /// Value at the deepest sampled point.
    pub last: f64,
}

/// Sample `u` along `ray` (dyadic subdivisions plus the function's own
/// critical heights) and classify the tail.
pub fn trace_along_ray<F: EdgeFunction>(
    filling: &Filling,
    u: &F,
    ray: &GeodesicRay,
    cfg: &DetectorConfig,
) -> Result<RayTrace, TraceError> {
    let edges = filling.ray_edges(ray)?;
    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(edges.len() * (SAMPLES_PER_EDGE + 4));
    for (n, &eid) in edges.iter().enumerate() {
        let base = n as f64;
        let mut ts: Vec<f64> = (0..=SAMPLES_PER_EDGE)
            .map(|j| j as f64 / SAMPLES_PER_EDGE as f64)
            .collect();
        for h in u.critical_heights(base, base + 1.0) {
            let t = h - base;
            if t > 0.0 && t < 1.0 {
                ts.push(t);
            }
        }
        ts.sort_unstable_by(f64::total_cmp);
        for t in ts {
            let point = EdgePoint { edge: eid, t };
            samples.push((base + t, u.eval(filling, &point)));
        }
    }
    let last = samples.last().map(|&(_, v)| v).unwrap_or(f64::NAN);
    Ok(RayTrace { verdict: classify_samples(&samples, cfg), depth: edges.len(), last })
}

/// Ray trace of `u` at one boundary point, aggregated over every
/// enumerated geodesic ray and over pairwise interleavings.
#[derive(Debug, Clone)]
pub struct TraceReport {
    pub verdict: TraceVerdict,
    /// Verdict for each enumerated ray, in enumeration order.
    pub per_ray: Vec<TraceVerdict>,
    pub rays: usize,
    /// Number of pairwise interleavings that were also classified.
    pub interleavings: usize,
}

/// Combine per-ray verdicts into one.  Oscillation anywhere wins, then
/// escape, then an undetermined tail; convergence requires every
/// contributing limit to agree.
fn aggregate_verdicts(verdicts: &[TraceVerdict], cfg: &DetectorConfig) -> TraceVerdict {
    let mut osc_lower = f64::INFINITY;
    let mut osc_upper = f64::NEG_INFINITY;
    let mut saw_oscillation = false;
    let mut escape: Option<f64> = None;
    let mut undetermined: Option<String> = None;
    let mut limits: Vec<f64> = Vec::new();
    for v in verdicts {
        match v {
            TraceVerdict::Oscillating { lower, upper } => {
                saw_oscillation = true;
                osc_lower = osc_lower.min(*lower);
                osc_upper = osc_upper.max(*upper);
            }
            TraceVerdict::Escaping { last } => escape = Some(*last),
            TraceVerdict::Undetermined { detail } => undetermined = Some(detail.clone()),
            TraceVerdict::Converged { limit } => limits.push(*limit),
        }
    }
    if saw_oscillation {
        return TraceVerdict::Oscillating { lower: osc_lower, upper: osc_upper };
    }
    if let Some(last) = escape {
        return TraceVerdict::Escaping { last };
    }
    if let Some(detail) = undetermined {
        return TraceVerdict::Undetermined { detail };
    }
    if limits.is_empty() {
        return TraceVerdict::Undetermined { detail: String::from("no rays to classify") };
    }
    let max = limits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = limits.iter().copied().fold(f64::INFINITY, f64::min);
    if max - min > cfg.oscillation_factor * cfg.tol {
        // Every ray converges, but not to a common value.
        return TraceVerdict::Oscillating { lower: min, upper: max };
    }
    TraceVerdict::Converged { limit: math::pairwise_sum(&limits) / limits.len() as f64 }
}

/// Compute the ray trace of `u` at boundary point `xi`.
///
/// All rays (up to `max_rays`) must converge, interleavings of ray
/// pairs must converge, and the limits must agree; otherwise the
/// offending behaviour is reported.
pub fn trace_t<F: EdgeFunction>(
    filling: &Filling,
    u: &F,
    xi: usize,
    max_rays: usize,
    cfg: &DetectorConfig,
) -> Result<TraceReport, TraceError> {
    let rays = filling.enumerate_rays(xi, max_rays)?;
    let mut per_ray = Vec::with_capacity(rays.len());
    let mut verdicts: Vec<TraceVerdict> = Vec::new();
    for ray in &rays {
        let tr = trace_along_ray(filling, u, ray, cfg)?;
        per_ray.push(tr.verdict.clone());
        verdicts.push(tr.verdict);
    }
    let mut interleavings = 0usize;
    let cap = rays.len().min(INTERLEAVE_RAY_CAP);
    for i in 0..cap {
        for j in (i + 1)..cap {
            let braided = interleave_rays(&rays[i], &rays[j])?;
            let tr = trace_along_ray(filling, u, &braided, cfg)?;
            verdicts.push(tr.verdict);
            interleavings += 1;
        }
    }
    Ok(TraceReport {
        verdict: aggregate_verdicts(&verdicts, cfg),
        per_ray,
        rays: rays.len(),
        interleavings,
    })
}

/// Averaged trace of `u` at one boundary point: level-`n` means of
/// vertex values over the cone of net points around the target.
#[derive(Debug, Clone)]
pub struct TildeTrace {
    pub verdict: TraceVerdict,
    /// Mean of the vertex values at each level, root first.
    pub means: Vec<f64>,
}

/// Compute the averaged trace of `u` at boundary point `xi`.
pub fn trace_tilde<F: EdgeFunction>(
    filling: &Filling,
    u: &F,
    xi: usize,
    cfg: &DetectorConfig,
) -> Result<TildeTrace, TraceError> {
    let mut means = Vec::with_capacity(filling.max_level() as usize + 1);
    for n in 0..=filling.max_level() {
        let cone = filling.boundary_cone(xi, n)?;
        if cone.is_empty() {
            break;
        }
        let mut sum = 0.0;
        for v in &cone {
            let point = filling.vertex_point(*v)?;
            sum += u.eval(filling, &point);
        }
        means.push(sum / cone.len() as f64);
    }
    let samples: Vec<(f64, f64)> =
        means.iter().enumerate().map(|(n, &m)| (n as f64, m)).collect();
    Ok(TildeTrace { verdict: classify_samples(&samples, cfg), means })
}

/// `L^p`-type energies of a function and its upper gradient against
/// the weighted measure on the truncated filling.
#[derive(Debug, Clone, Copy)]
pub struct SobolevNorms {
    pub p: f64,
    /// `(int |u|^p dmu)^(1/p)`.
    pub lp_u: f64,
    /// `(int g^p dmu)^(1/p)` for the upper gradient `g`.
    pub lp_g: f64,
    /// Inhomogeneous norm: `lp_u + lp_g`.
    pub full: f64,
    /// Homogeneous norm: `|u(root)| + lp_g`.
    pub homogeneous: f64,
}

/// Split heights for one edge: the function's own critical heights
/// inside the edge's height span.
fn edge_critical_heights<F: EdgeFunction>(filling: &Filling, u: &F, eid: EdgeId) -> Vec<f64> {
    let e = match filling.edge(eid) {
        Ok(e) => *e,
        Err(_) => return Vec::new(),
    };
    let la = filling.vertices()[e.a.0].level as f64;
    let lb = filling.vertices()[e.b.0].level as f64;
    let (lo, hi) = match e.kind {
        EdgeKind::Vertical => (la.min(lb), la.max(lb)),
        EdgeKind::Horizontal => (la, la + 0.5),
    };
    u.critical_heights(lo, hi)
}

/// Compute the Sobolev energies of `u` over the truncated filling.
pub fn sobolev_norms<F: EdgeFunction>(
    filling: &Filling,
    rho: &RadialWeight,
    u: &F,
    p: f64,
) -> Result<SobolevNorms, TraceError> {
    assert!(p >= 1.0, "p must be at least 1");
    let up = integrate_over_filling_split(
        filling,
        rho,
        |pt| math::powf(math::abs(u.eval(filling, &pt)), p),
        |eid| edge_critical_heights(filling, u, eid),
    )?;
    let gp = integrate_over_filling_split(
        filling,
        rho,
        |pt| math::powf(u.gradient(filling, &pt), p),
        |eid| edge_critical_heights(filling, u, eid),
    )?;
    let lp_u = math::powf(up.max(0.0), 1.0 / p);
    let lp_g = math::powf(gp.max(0.0), 1.0 / p);
    let root_point = filling.vertex_point(filling.root())?;
    let u0 = math::abs(u.eval(filling, &root_point));
    Ok(SobolevNorms { p, lp_u, lp_g, full: lp_u + lp_g, homogeneous: u0 + lp_g })
}

/// Gradient energy `int g^p dmu` broken down by unit height band.
///
/// The edge between levels `n` and `n + 1` (and the horizontal edges
/// at level `n`) contribute to band `n`.  Prefix sums of the result
/// give the energy of deeper and deeper truncations.
pub fn graded_gradient_energy<F: EdgeFunction>(
    filling: &Filling,
    rho: &RadialWeight,
    u: &F,
    p: f64,
) -> Result<Vec<f64>, TraceError> {
    assert!(p >= 1.0, "p must be at least 1");
    let mut bands = Vec::new();
    bands.resize(filling.max_level() as usize + 1, 0.0f64);
    for i in 0..filling.edge_count() {
        let eid = EdgeId(i);
        let e = filling.edges()[i];
        let la = filling.vertices()[e.a.0].level as f64;
        let lb = filling.vertices()[e.b.0].level as f64;
        let mass = filling.vertices()[e.a.0].mass + filling.vertices()[e.b.0].mass;
        let mut kinks: Vec<f64> = Vec::new();
        if e.kind == EdgeKind::Horizontal {
            kinks.push(0.5);
        }
        let (h_lo, h_hi) = match e.kind {
            EdgeKind::Vertical => (la.min(lb), la.max(lb)),
            EdgeKind::Horizontal => (la, la + 0.5),
        };
        let push_height = |h: f64, kinks: &mut Vec<f64>| match e.kind {
            EdgeKind::Vertical => {
                let t = h - h_lo;
                if t > 0.0 && t < 1.0 {
                    kinks.push(t);
                }
            }
            EdgeKind::Horizontal => {
                let t = h - la;
                if t > 0.0 && t < 0.5 {
                    kinks.push(t);
                    kinks.push(1.0 - t);
                } else if t == 0.5 {
                    kinks.push(0.5);
                }
            }
        };
        for h in rho.kinks_in(h_lo, h_hi) {
            push_height(h, &mut kinks);
        }
        for h in u.critical_heights(h_lo, h_hi) {
            push_height(h, &mut kinks);
        }
        let integral = math::integrate_adaptive(
            |t| {
                let pt = EdgePoint { edge: eid, t };
                let height = (la + t).min(lb + (1.0 - t));
                math::powf(u.gradient(filling, &pt), p) * rho.eval(height)
            },
            0.0,
            1.0,
            EDGE_TOL,
            &kinks,
        )?;
        bands[h_lo as usize] += mass * integral;
    }
    Ok(bands)
}

/// Largest violation of the upper-gradient inequality along a ray.
///
/// For each edge of the ray (and for the ray as a whole) this
/// compares `|u(end) - u(start)|` with the line integral of the
/// gradient density against the uniformized length element, and
/// returns the maximal difference.  A genuine upper gradient keeps
/// the result at quadrature-noise level or below.
pub fn upper_gradient_deficit<F: EdgeFunction>(
    filling: &Filling,
    u: &F,
    ray: &GeodesicRay,
) -> Result<f64, TraceError> {
    let edges = filling.ray_edges(ray)?;
    if edges.is_empty() {
        return Err(TraceError::Ray(RayError::TooShallow));
    }
    let eps = filling.eps();
    let mut worst = f64::NEG_INFINITY;
    let mut path_integral = 0.0;
    let mut first_value = f64::NAN;
    let mut last_value = f64::NAN;
    for (n, &eid) in edges.iter().enumerate() {
        let base = n as f64;
        let mut kinks: Vec<f64> = Vec::new();
        for h in u.critical_heights(base, base + 1.0) {
            let t = h - base;
            if t > 0.0 && t < 1.0 {
                kinks.push(t);
            }
        }
        let start = u.eval(filling, &EdgePoint { edge: eid, t: 0.0 });
        let end = u.eval(filling, &EdgePoint { edge: eid, t: 1.0 });
        let integral = math::integrate_adaptive(
            |t| u.gradient(filling, &EdgePoint { edge: eid, t }) * math::exp(-eps * (base + t)),
            0.0,
            1.0,
            1e-12,
            &kinks,
        )?;
        worst = worst.max(math::abs(end - start) - integral);
        path_integral += integral;
        if n == 0 {
            first_value = start;
        }
        last_value = end;
    }
    worst = worst.max(math::abs(last_value - first_value) - path_integral);
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filling::VertexId;
    use crate::params::{classify_regime, ParamOptions};
    use crate::profile::{build_divergent, build_example11};
    use crate::space::MetricSpaceSample;
    use alloc::vec;

    fn cantor_filling(depth: u32, alpha: f64, levels: u32) -> Filling {
        let space = MetricSpaceSample::gen_cantor(depth, 0.9).unwrap();
        Filling::construct(space, alpha, 1.5, levels).unwrap()
    }

    /// Evenly spaced line sample, dense enough for boundary points to
    /// see several net vertices per level for a while.
    fn line_filling(points: usize, levels: u32) -> Filling {
        let pts: Vec<f64> =
            (0..points).map(|i| 0.9 * i as f64 / (points - 1) as f64).collect();
        let weights = vec![1.0 / points as f64; points];
        let space = MetricSpaceSample::from_line_points(pts, weights, points / 2).unwrap();
        Filling::construct(space, 2.0, 1.5, levels).unwrap()
    }

    // A table of vertex values, interpolated linearly in the edge
    // parameter; the matching upper gradient is exact.
    struct VertexTable {
        values: Vec<f64>,
    }

    impl EdgeFunction for VertexTable {
        fn eval(&self, filling: &Filling, point: &EdgePoint) -> f64 {
            let e = filling.edge(point.edge).unwrap();
            let t = point.t.clamp(0.0, 1.0);
            (1.0 - t) * self.values[e.a.0] + t * self.values[e.b.0]
        }

        fn gradient(&self, filling: &Filling, point: &EdgePoint) -> f64 {
            let e = filling.edge(point.edge).unwrap();
            let delta = math::abs(self.values[e.b.0] - self.values[e.a.0]);
            let h = filling.graph_height(point).unwrap();
            delta * math::exp(filling.eps() * h)
        }

        fn critical_heights(&self, _lo: f64, _hi: f64) -> Vec<f64> {
            Vec::new()
        }
    }

    #[test]
    fn detector_classifies_synthetic_tails() {
        let cfg = DetectorConfig::default();
        // Flat: converged.
        let flat: Vec<(f64, f64)> = (0..80).map(|i| (i as f64 / 8.0, 2.5)).collect();
        assert_eq!(classify_samples(&flat, &cfg), TraceVerdict::Converged { limit: 2.5 });
        // Alternating full-band swings: oscillating.
        let swing: Vec<(f64, f64)> =
            (0..160).map(|i| (i as f64 / 8.0, if i % 2 == 0 { 0.0 } else { 1.0 })).collect();
        match classify_samples(&swing, &cfg) {
            TraceVerdict::Oscillating { lower, upper } => {
                assert_eq!(lower, 0.0);
                assert_eq!(upper, 1.0);
            }
            other => panic!("expected oscillation, got {other}"),
        }
        // Logarithmic growth: monotone, increment ratios near 1,
        // escaping.
        let slow: Vec<(f64, f64)> =
            (0..200).map(|i| (i as f64 / 8.0, math::ln(1.0 + i as f64 / 8.0))).collect();
        assert!(matches!(classify_samples(&slow, &cfg), TraceVerdict::Escaping { .. }));
        // Too shallow: undetermined.
        let short = vec![(0.0, 1.0), (0.5, 1.0), (1.5, 1.0)];
        assert!(matches!(classify_samples(&short, &cfg), TraceVerdict::Undetermined { .. }));
    }

    #[test]
    fn detector_extrapolates_geometric_tails() {
        let cfg = DetectorConfig::default();
        // 0.3 + 0.7 e^(-t/2) still moves by ~2e-4 over the last
        // windows of a depth-20 sweep; the geometric extrapolation
        // should land on the limit far more accurately than that.
        let samples: Vec<(f64, f64)> = (0..=(20 * 8))
            .map(|i| {
                let t = i as f64 / 8.0;
                (t, 0.3 + 0.7 * math::exp(-0.5 * t))
            })
            .collect();
        match classify_samples(&samples, &cfg) {
            TraceVerdict::Converged { limit } => {
                assert!(
                    math::abs(limit - 0.3) < 1e-6,
                    "extrapolated limit {limit} should be within 1e-6 of 0.3"
                );
            }
            other => panic!("expected convergence, got {other}"),
        }
    }

    #[test]
    fn aggregation_prefers_the_worst_verdict() {
        let cfg = DetectorConfig::default();
        let conv = |l: f64| TraceVerdict::Converged { limit: l };
        // Agreement within tolerance: mean.
        let v = aggregate_verdicts(&[conv(0.2), conv(0.2 + 1e-6)], &cfg);
        assert!(math::abs(v.converged_limit().unwrap() - 0.2) < 1e-5);
        // Disagreeing limits: oscillation between them.
        let v = aggregate_verdicts(&[conv(0.0), conv(1.0)], &cfg);
        assert_eq!(v, TraceVerdict::Oscillating { lower: 0.0, upper: 1.0 });
        // Escape beats convergence.
        let v = aggregate_verdicts(&[conv(0.0), TraceVerdict::Escaping { last: 7.0 }], &cfg);
        assert!(matches!(v, TraceVerdict::Escaping { .. }));
        // Oscillation beats escape.
        let v = aggregate_verdicts(
            &[
                TraceVerdict::Escaping { last: 7.0 },
                TraceVerdict::Oscillating { lower: 0.0, upper: 1.0 },
            ],
            &cfg,
        );
        assert!(v.is_oscillating());
        // Undetermined taints an otherwise convergent family.
        let v = aggregate_verdicts(
            &[conv(0.0), TraceVerdict::Undetermined { detail: String::from("x") }],
            &cfg,
        );
        assert!(matches!(v, TraceVerdict::Undetermined { .. }));
        assert!(matches!(aggregate_verdicts(&[], &cfg), TraceVerdict::Undetermined { .. }));
    }

    #[test]
    fn smooth_radial_profiles_trace_consistently() {
        let filling = cantor_filling(3, 2.0, 10);
        let eps = filling.eps();
        let u = RadialFunction::exp_mix(eps, 0.3, vec![(0.7, 1.0)]);
        let cfg = DetectorConfig::default();
        let report = trace_t(&filling, &u, 0, 64, &cfg).unwrap();
        let limit = report.verdict.converged_limit().expect("smooth profile converges");
        assert!(math::abs(limit - 0.3) < 1e-3, "ray trace {limit} should be near 0.3");
        let tilde = trace_tilde(&filling, &u, 0, &cfg).unwrap();
        let tl = tilde.verdict.converged_limit().expect("averaged trace converges");
        assert!(math::abs(tl - limit) < 1e-3, "traces disagree: {tl} vs {limit}");
        assert!(report.rays >= 1);
    }

    #[test]
    fn oscillating_profile_splits_the_two_traces() {
        // The unit-band tent profile has vertex values exactly zero:
        // the averaged trace vanishes while no ray trace exists.
        let filling = cantor_filling(4, 2.0, 12);
        let eps = filling.eps();
        let (_rho, u) = build_example11(2.0, eps, 12.0);
        let cfg = DetectorConfig::default();

        let tilde = trace_tilde(&filling, &u, 0, &cfg).unwrap();
        for (n, m) in tilde.means.iter().enumerate() {
            assert_eq!(*m, 0.0, "vertex mean at level {n} should vanish exactly");
        }
        assert_eq!(tilde.verdict, TraceVerdict::Converged { limit: 0.0 });

        let report = trace_t(&filling, &u, 0, 64, &cfg).unwrap();
        let span = report.verdict.oscillation_span().expect("tents oscillate");
        assert!(span >= 0.9, "oscillation span {span} should be at least 0.9");
        for v in &report.per_ray {
            let s = v.oscillation_span().expect("every ray sees the tents");
            assert!(s >= 0.9);
        }
    }

    #[test]
    fn divergent_profile_escapes_along_rays() {
        let filling = cantor_filling(3, 2.0, 12);
        let eps = filling.eps();
        // Exact cancellation: the derived integrand is identically 1,
        // so the profile grows like ln(1 + t).
        let rho = RadialWeight::exp_rate(2.0 * eps).unwrap();
        let u = build_divergent(&rho, 2.0, eps, 40.0).unwrap();
        let cfg = DetectorConfig::default();
        let report = trace_t(&filling, &u, 0, 64, &cfg).unwrap();
        assert!(
            matches!(report.verdict, TraceVerdict::Escaping { .. }),
            "unbounded profile should escape, got {}",
            report.verdict
        );
    }

    #[test]
    fn vertex_table_oscillation_is_detected() {
        let filling = cantor_filling(3, 2.0, 12);
        let parity: Vec<f64> = filling
            .vertices()
            .iter()
            .map(|v| if v.level % 2 == 0 { 0.0 } else { 1.0 })
            .collect();
        let u = VertexTable { values: parity };
        let cfg = DetectorConfig::default();
        let report = trace_t(&filling, &u, 0, 64, &cfg).unwrap();
        match report.verdict {
            TraceVerdict::Oscillating { lower, upper } => {
                assert!(lower <= 0.01 && upper >= 0.99);
            }
            other => panic!("parity table should oscillate, got {other}"),
        }
        let tilde = trace_tilde(&filling, &u, 0, &cfg).unwrap();
        assert!(tilde.verdict.is_oscillating());
    }

    #[test]
    fn vertex_table_interpolation_has_exact_upper_gradient() {
        let filling = cantor_filling(3, 2.0, 8);
        let values: Vec<f64> = filling
            .vertices()
            .iter()
            .map(|v| v.center as f64 * 0.1 + v.level as f64 * 0.05)
            .collect();
        let u = VertexTable { values };
        let rays = filling.enumerate_rays(0, 8).unwrap();
        for ray in &rays {
            let deficit = upper_gradient_deficit(&filling, &u, ray).unwrap();
            assert!(
                deficit <= 1e-8,
                "linear interpolation satisfies the upper-gradient inequality, deficit {deficit}"
            );
        }
    }

    #[test]
    fn tent_profiles_satisfy_the_upper_gradient_inequality() {
        let filling = cantor_filling(3, 2.0, 12);
        let eps = filling.eps();
        let (_rho, u) = build_example11(2.0, eps, 12.0);
        let rays = filling.enumerate_rays(0, 8).unwrap();
        for ray in &rays {
            let deficit = upper_gradient_deficit(&filling, &u, ray).unwrap();
            assert!(deficit <= 1e-8, "tent deficit {deficit} exceeds the tolerance");
        }
    }

    #[test]
    fn constant_profile_norms_match_total_mass() {
        let filling = cantor_filling(3, 2.0, 8);
        let eps = filling.eps();
        let rho = RadialWeight::bbs(0.5, 2.0, eps).unwrap();
        let u = RadialFunction::exp_mix(eps, 1.0, vec![]);
        let norms = sobolev_norms(&filling, &rho, &u, 2.0).unwrap();
        let mass = crate::measure::integrate_over_filling(&filling, &rho, |_| 1.0).unwrap();
        assert!(math::abs(norms.lp_u - math::sqrt(mass)) < 1e-7);
        assert_eq!(norms.lp_g, 0.0);
        assert!(math::abs(norms.homogeneous - 1.0) < 1e-12);
        assert!(math::abs(norms.full - norms.lp_u) < 1e-12);
    }

    #[test]
    fn graded_energy_sums_to_the_total() {
        let filling = cantor_filling(3, 2.0, 8);
        let eps = filling.eps();
        let rho = RadialWeight::bbs(0.5, 2.0, eps).unwrap();
        let u = RadialFunction::exp_mix(eps, 0.2, vec![(0.8, 0.7)]);
        let bands = graded_gradient_energy(&filling, &rho, &u, 2.0).unwrap();
        let total: f64 = bands.iter().sum();
        let norms = sobolev_norms(&filling, &rho, &u, 2.0).unwrap();
        let gp = norms.lp_g * norms.lp_g;
        assert!(
            math::abs(total - gp) < 1e-9 * (1.0 + total),
            "bands sum to {total}, the all-at-once energy is {gp}"
        );
        assert_eq!(bands.len(), filling.max_level() as usize + 1);
    }

    #[test]
    fn tent_band_energies_follow_the_gaussian_ladder() {
        let filling = cantor_filling(4, 2.0, 12);
        let eps = filling.eps();
        let p = 2.0;
        let (rho, u) = build_example11(p, eps, 12.0);
        let bands = graded_gradient_energy(&filling, &rho, &u, p).unwrap();

        // Mass capacity of each band: a vertical edge integrates the
        // band's full energy density once per unit of ball mass, a
        // horizontal edge at most twice (it sweeps the lower half of
        // the band twice).
        let mut caps = vec![0.0f64; bands.len()];
        for e in filling.edges() {
            let la = filling.vertices()[e.a.0].level;
            let lb = filling.vertices()[e.b.0].level;
            let mass = filling.vertices()[e.a.0].mass + filling.vertices()[e.b.0].mass;
            let coeff = match e.kind {
                EdgeKind::Vertical => 1.0,
                EdgeKind::Horizontal => 2.0,
            };
            caps[la.min(lb) as usize] += coeff * mass;
        }
        for (n, band) in bands.iter().enumerate() {
            let ladder = math::powf(2.0, p) * math::exp(-((n * n) as f64));
            assert!(
                *band <= caps[n] * ladder * (1.0 + 1e-6) + 1e-300,
                "band {n} energy {band} exceeds its capacity {} times the ladder {ladder}",
                caps[n]
            );
        }
        // Deep bands die off at the Gaussian rate.
        assert!(bands[10] < 1e-30 * (1.0 + caps[10]));
    }

    #[test]
    fn trace_norm_stays_comparable_to_the_sobolev_norm() {
        let filling = cantor_filling(3, 2.0, 10);
        let eps = filling.eps();
        let p = 2.0;
        let rho = RadialWeight::bbs(0.5, p, eps).unwrap();
        let regime = classify_regime(&rho, p, eps, &ParamOptions::default()).unwrap();
        assert_eq!(regime.prediction.inhomogeneous_traces, Some(true));

        let u = RadialFunction::exp_mix(eps, 0.4, vec![(0.6, 1.3)]);
        let norms = sobolev_norms(&filling, &rho, &u, p).unwrap();
        let cfg = DetectorConfig::default();
        let mut trace_pth = 0.0;
        for xi in 0..filling.space().len() {
            let report = trace_t(&filling, &u, xi, 16, &cfg).unwrap();
            let limit = report.verdict.converged_limit().expect("smooth profile");
            trace_pth += filling.space().weights()[xi] * math::powf(math::abs(limit), p);
        }
        let trace_norm = math::powf(trace_pth, 1.0 / p);
        assert!(
            trace_norm <= 100.0 * norms.full,
            "trace norm {trace_norm} should be dominated by the Sobolev norm {}",
            norms.full
        );
    }

    #[test]
    fn interleavings_are_classified_on_branching_targets() {
        // A dense line sample keeps several net vertices inside shallow
        // boundary cones, so points wedged between net points admit
        // multiple rays and their interleavings.
        let filling = line_filling(21, 10);
        let eps = filling.eps();
        let (xi, rays) = (0..filling.space().len())
            .map(|xi| (xi, filling.enumerate_rays(xi, 8).unwrap()))
            .find(|(_, rays)| rays.len() >= 2)
            .expect("some boundary point should admit at least two rays");

        let u = RadialFunction::exp_mix(eps, 0.25, vec![(0.5, 0.8)]);
        let cfg = DetectorConfig::default();
        let report = trace_t(&filling, &u, xi, 8, &cfg).unwrap();
        let cap = rays.len().min(6);
        assert_eq!(report.interleavings, cap * (cap - 1) / 2);
        assert_eq!(report.per_ray.len(), rays.len());
        let limit = report.verdict.converged_limit().expect("radial profile converges");
        assert!(math::abs(limit - 0.25) < 1e-3);
    }

    #[test]
    fn vertex_point_heights_are_integers() {
        // The averaged trace relies on vertex evaluations happening at
        // exactly integer heights.
        let filling = cantor_filling(3, 2.0, 8);
        for i in 0..filling.vertex_count() {
            let v = VertexId(i);
            let pt = filling.vertex_point(v).unwrap();
            let h = filling.graph_height(&pt).unwrap();
            assert_eq!(h, filling.vertex(v).unwrap().level as f64);
        }
    }
}
