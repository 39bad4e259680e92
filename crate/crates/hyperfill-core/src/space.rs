//! Finitely sampled compact metric spaces `(Z, d_Z, nu)`.
//!
//! A sample is a finite point set with a metric (Euclidean coordinates on
//! the line or plane, or an explicit distance matrix), strictly positive
//! per-point masses, and a distinguished base point `z_0`. The diameter
//! must satisfy `0 < diam Z < 1`: the filling construction calibrates its
//! level-0 net against balls of radius 1, so a space of diameter >= 1 has
//! no valid root. All balls are open (`d < r`), here and everywhere
//! downstream.

use alloc::string::String;
use alloc::vec::Vec;

use crate::math::{self, SplitMix64};

/// Hard cap on sample size; generators and validated loads refuse more.
pub const MAX_POINTS: usize = 1_000_000;

/// Exhaustive triangle-inequality checking is limited to this many triples;
/// larger matrices are spot-checked by seeded sampling.
const MAX_EXHAUSTIVE_TRIPLES: usize = 100_000;

/// Construction or validation failure for a sample space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpaceError {
    /// A scalar argument was outside its documented range.
    InvalidParameter(&'static str),
    /// The data does not describe a valid sample (bad metric, bad weights,
    /// diameter out of range, ...).
    InvariantViolation(String),
    /// The requested construction would exceed [`MAX_POINTS`].
    CapacityExceeded { requested: usize, limit: usize },
}

impl core::fmt::Display for SpaceError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SpaceError::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            SpaceError::InvariantViolation(what) => write!(f, "invariant violation: {what}"),
            SpaceError::CapacityExceeded { requested, limit } => {
                write!(f, "capacity exceeded: {requested} points > limit {limit}")
            }
        }
    }
}

impl core::error::Error for SpaceError {}

#[derive(Debug, Clone)]
enum Geometry {
    /// Points on the real line.
    Line(Vec<f64>),
    /// Points in the Euclidean plane.
    Plane(Vec<[f64; 2]>),
    /// Explicit distance matrix, row-major.
    Matrix { n: usize, d: Vec<f64> },
}

impl Geometry {
    fn len(&self) -> usize {
        match self {
            Geometry::Line(xs) => xs.len(),
            Geometry::Plane(ps) => ps.len(),
            Geometry::Matrix { n, .. } => *n,
        }
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        match self {
            Geometry::Line(xs) => math::abs(xs[i] - xs[j]),
            Geometry::Plane(ps) => {
                let dx = ps[i][0] - ps[j][0];
                let dy = ps[i][1] - ps[j][1];
                math::sqrt(dx * dx + dy * dy)
            }
            Geometry::Matrix { n, d } => d[i * n + j],
        }
    }
}

/// A validated finite metric measure space with base point.
#[derive(Debug, Clone)]
pub struct MetricSpaceSample {
    geometry: Geometry,
    weights: Vec<f64>,
    base: usize,
    diam: f64,
    total_mass: f64,
}

/// Result of an empirical doubling check: the worst ratio
/// `nu(B(x, 2r)) / nu(B(x, r))` over all centers and the supplied radii.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoublingReport {
    pub max_ratio: f64,
    /// Center index attaining the max.
    pub center: usize,
    /// Radius attaining the max.
    pub radius: f64,
}

impl MetricSpaceSample {
    /// Sample on the real line.
    pub fn from_line_points(
        points: Vec<f64>,
        weights: Vec<f64>,
        base_index: usize,
    ) -> Result<Self, SpaceError> {
        Self::validated(Geometry::Line(points), weights, base_index)
    }

    /// Sample in the Euclidean plane.
    pub fn from_plane_points(
        points: Vec<[f64; 2]>,
        weights: Vec<f64>,
        base_index: usize,
    ) -> Result<Self, SpaceError> {
        Self::validated(Geometry::Plane(points), weights, base_index)
    }

    /// Sample given by an explicit distance matrix. The matrix must be
    /// square, symmetric, zero on the diagonal, and satisfy the triangle
    /// inequality (checked exhaustively up to 10^5 triples, then by seeded
    /// sampling).
    pub fn from_matrix(
        matrix: &[Vec<f64>],
        weights: Vec<f64>,
        base_index: usize,
    ) -> Result<Self, SpaceError> {
        let n = matrix.len();
        if n == 0 {
            return Err(SpaceError::InvariantViolation("empty distance matrix".into()));
        }
        let mut d = Vec::with_capacity(n * n);
        for row in matrix {
            if row.len() != n {
                return Err(SpaceError::InvariantViolation("distance matrix is not square".into()));
            }
            d.extend_from_slice(row);
        }
        for i in 0..n {
            if d[i * n + i] != 0.0 {
                return Err(SpaceError::InvariantViolation(alloc::format!(
                    "nonzero diagonal entry d({i},{i}) = {}",
                    d[i * n + i]
                )));
            }
            for j in (i + 1)..n {
                let dij = d[i * n + j];
                if !(dij.is_finite() && dij >= 0.0) {
                    return Err(SpaceError::InvariantViolation(alloc::format!(
                        "distance d({i},{j}) = {dij} is not a finite nonnegative real"
                    )));
                }
                if dij != d[j * n + i] {
                    return Err(SpaceError::InvariantViolation(alloc::format!(
                        "asymmetric matrix: d({i},{j}) = {dij} but d({j},{i}) = {}",
                        d[j * n + i]
                    )));
                }
            }
        }
        check_triangles(n, &d)?;
        Self::validated(Geometry::Matrix { n, d }, weights, base_index)
    }

    /// Endpoint set of the depth-`depth` middle-thirds construction on
    /// `[0, scale]`: `2^depth` points, each carrying mass `2^-depth`, with
    /// base point 0.
    pub fn gen_cantor(depth: u32, scale: f64) -> Result<Self, SpaceError> {
        if depth < 1 {
            return Err(SpaceError::InvalidParameter("cantor depth must be >= 1"));
        }
        if !(scale > 0.0 && scale < 1.0) {
            return Err(SpaceError::InvalidParameter("cantor scale must lie in (0, 1)"));
        }
        let count = 1usize
            .checked_shl(depth)
            .filter(|&c| c <= MAX_POINTS)
            .ok_or(SpaceError::CapacityExceeded {
                requested: usize::MAX,
                limit: MAX_POINTS,
            })?;
        let mut intervals = alloc::vec![(0.0f64, scale)];
        for _ in 1..depth {
            let mut next = Vec::with_capacity(intervals.len() * 2);
            for (a, b) in intervals {
                let third = (b - a) / 3.0;
                next.push((a, a + third));
                next.push((b - third, b));
            }
            intervals = next;
        }
        let mut points = Vec::with_capacity(count);
        for (a, b) in intervals {
            points.push(a);
            points.push(b);
        }
        let w = math::powf(2.0, -(depth as f64));
        let weights = alloc::vec![w; count];
        Self::from_line_points(points, weights, 0)
    }

    /// Uniform grid with `resolution^dim` points and uniform weights. For
    /// `dim = 2` the grid sits on `[0, scale/sqrt(2)]^2` so its diagonal —
    /// the diameter — equals `scale`.
    pub fn gen_grid(dim: u32, resolution: usize, scale: f64) -> Result<Self, SpaceError> {
        if dim != 1 && dim != 2 {
            return Err(SpaceError::InvalidParameter("grid dim must be 1 or 2"));
        }
        if resolution < 2 {
            return Err(SpaceError::InvalidParameter("grid resolution must be >= 2"));
        }
        if !(scale > 0.0 && scale < 1.0) {
            return Err(SpaceError::InvalidParameter("grid scale must lie in (0, 1)"));
        }
        let count = if dim == 1 {
            resolution
        } else {
            resolution
                .checked_mul(resolution)
                .ok_or(SpaceError::CapacityExceeded { requested: usize::MAX, limit: MAX_POINTS })?
        };
        if count > MAX_POINTS {
            return Err(SpaceError::CapacityExceeded { requested: count, limit: MAX_POINTS });
        }
        let steps = (resolution - 1) as f64;
        let w = 1.0 / count as f64;
        if dim == 1 {
            let points: Vec<f64> = (0..resolution).map(|i| scale * i as f64 / steps).collect();
            Self::from_line_points(points, alloc::vec![w; count], 0)
        } else {
            let side = scale / math::sqrt(2.0);
            let mut points = Vec::with_capacity(count);
            for i in 0..resolution {
                for j in 0..resolution {
                    points.push([side * i as f64 / steps, side * j as f64 / steps]);
                }
            }
            Self::from_plane_points(points, alloc::vec![w; count], 0)
        }
    }

    fn validated(
        geometry: Geometry,
        weights: Vec<f64>,
        base: usize,
    ) -> Result<Self, SpaceError> {
        let n = geometry.len();
        if n == 0 {
            return Err(SpaceError::InvariantViolation("sample has no points".into()));
        }
        if n > MAX_POINTS {
            return Err(SpaceError::CapacityExceeded { requested: n, limit: MAX_POINTS });
        }
        if weights.len() != n {
            return Err(SpaceError::InvariantViolation(alloc::format!(
                "{} weights for {} points",
                weights.len(),
                n
            )));
        }
        if base >= n {
            return Err(SpaceError::InvariantViolation(alloc::format!(
                "base_index {base} out of range for {n} points"
            )));
        }
        let mut total = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            if !(w > 0.0 && w.is_finite()) {
                return Err(SpaceError::InvariantViolation(alloc::format!(
                    "weight {w} at index {i} is not strictly positive and finite"
                )));
            }
            total += w;
        }
        let diam = diameter(&geometry);
        if n > 1 && diam <= 0.0 {
            return Err(SpaceError::InvariantViolation(
                "sample has more than one point but zero diameter".into(),
            ));
        }
        if diam >= 1.0 {
            return Err(SpaceError::InvariantViolation(alloc::format!(
                "diam Z = {diam} but the construction requires diam Z < 1"
            )));
        }
        Ok(Self { geometry, weights, base, diam, total_mass: total })
    }

    pub fn len(&self) -> usize {
        self.geometry.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Distance between sample points `i` and `j`.
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.geometry.dist(i, j)
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Index of the base point `z_0`.
    pub fn base_index(&self) -> usize {
        self.base
    }

    /// `nu(Z)`, the total mass.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Largest pairwise distance.
    pub fn diam(&self) -> f64 {
        self.diam
    }

    /// Coordinates of point `i` as `[x, y]` when the sample is coordinate
    /// based (`y = 0` on the line); `None` for matrix samples.
    pub fn coords(&self, i: usize) -> Option<[f64; 2]> {
        match &self.geometry {
            Geometry::Line(xs) => Some([xs[i], 0.0]),
            Geometry::Plane(ps) => Some(ps[i]),
            Geometry::Matrix { .. } => None,
        }
    }

    /// Whether the metric is given by an explicit matrix.
    pub fn is_matrix(&self) -> bool {
        matches!(self.geometry, Geometry::Matrix { .. })
    }

    /// Dimension of the coordinate representation (1 or 2), if any.
    pub fn coord_dim(&self) -> Option<u32> {
        match &self.geometry {
            Geometry::Line(_) => Some(1),
            Geometry::Plane(_) => Some(2),
            Geometry::Matrix { .. } => None,
        }
    }

    /// `nu(B(center, radius))` with the open-ball convention `d < radius`.
    pub fn ball_measure(&self, center: usize, radius: f64) -> f64 {
        let mut mass = 0.0;
        for i in 0..self.len() {
            if self.dist(center, i) < radius {
                mass += self.weights[i];
            }
        }
        mass
    }

    /// Empirical doubling constant: the worst `nu(2B)/nu(B)` over all
    /// centers and the supplied radii. Finite by construction, since every
    /// ball contains at least its own center.
    pub fn verify_doubling(&self, radii: &[f64]) -> Result<DoublingReport, SpaceError> {
        if radii.is_empty() {
            return Err(SpaceError::InvalidParameter("radii list is empty"));
        }
        if radii.iter().any(|&r| !(r > 0.0)) {
            return Err(SpaceError::InvalidParameter("radii must all be positive"));
        }
        let mut report = DoublingReport { max_ratio: 0.0, center: 0, radius: radii[0] };
        for center in 0..self.len() {
            for &r in radii {
                let small = self.ball_measure(center, r);
                let ratio = self.ball_measure(center, 2.0 * r) / small;
                if ratio > report.max_ratio {
                    report = DoublingReport { max_ratio: ratio, center, radius: r };
                }
            }
        }
        Ok(report)
    }
}

/// Exact diameter. Line samples use the coordinate range; plane samples
/// brute-force small sets and go through the convex hull for large ones;
/// matrix samples scan all entries (already O(n^2) data).
fn diameter(geometry: &Geometry) -> f64 {
    match geometry {
        Geometry::Line(xs) => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &x in xs {
                lo = lo.min(x);
                hi = hi.max(x);
            }
            if xs.len() < 2 {
                0.0
            } else {
                hi - lo
            }
        }
        Geometry::Plane(ps) => {
            if ps.len() <= 2048 {
                max_pair_dist(ps)
            } else {
                max_pair_dist(&convex_hull(ps))
            }
        }
        Geometry::Matrix { n, d } => {
            let mut best: f64 = 0.0;
            for i in 0..*n {
                for j in (i + 1)..*n {
                    best = best.max(d[i * n + j]);
                }
            }
            best
        }
    }
}

fn max_pair_dist(ps: &[[f64; 2]]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..ps.len() {
        for j in (i + 1)..ps.len() {
            let dx = ps[i][0] - ps[j][0];
            let dy = ps[i][1] - ps[j][1];
            best = best.max(dx * dx + dy * dy);
        }
    }
    math::sqrt(best)
}

/// Andrew's monotone chain. The diameter of a planar set is attained on
/// its convex hull, which stays small for the structured sets we generate.
fn convex_hull(ps: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = ps.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let chain = |iter: &mut dyn Iterator<Item = [f64; 2]>| {
        let mut out: Vec<[f64; 2]> = Vec::new();
        for p in iter {
            while out.len() >= 2 && cross(out[out.len() - 2], out[out.len() - 1], p) <= 0.0 {
                out.pop();
            }
            out.push(p);
        }
        out
    };
    let mut lower = chain(&mut pts.iter().copied());
    let mut upper = chain(&mut pts.iter().rev().copied());
    lower.pop();
    upper.pop();
    lower.append(&mut upper);
    lower
}

fn check_triangles(n: usize, d: &[f64]) -> Result<(), SpaceError> {
    let violation = |i: usize, j: usize, k: usize| {
        SpaceError::InvariantViolation(alloc::format!(
            "triangle failure: d({i},{k}) = {} > d({i},{j}) + d({j},{k}) = {}",
            d[i * n + k],
            d[i * n + j] + d[j * n + k]
        ))
    };
    let total = n * (n - 1) * (n.saturating_sub(2)) / 2;
    if total <= MAX_EXHAUSTIVE_TRIPLES {
        for i in 0..n {
            for k in (i + 1)..n {
                for j in 0..n {
                    if j == i || j == k {
                        continue;
                    }
                    if d[i * n + k] > d[i * n + j] + d[j * n + k] {
                        return Err(violation(i, j, k));
                    }
                }
            }
        }
    } else {
        let mut rng = SplitMix64::new(0x5eed_0001);
        for _ in 0..MAX_EXHAUSTIVE_TRIPLES {
            let i = rng.next_below(n);
            let j = rng.next_below(n);
            let k = rng.next_below(n);
            if i == j || j == k || i == k {
                continue;
            }
            if d[i * n + k] > d[i * n + j] + d[j * n + k] {
                return Err(violation(i, j, k));
            }
        }
    }
    Ok(())
}
