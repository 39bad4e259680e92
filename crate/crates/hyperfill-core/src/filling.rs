//! The hyperbolic filling graph.
//!
//! Level `n` of the filling consists of one vertex per point of a maximal
//! `alpha^-n`-separated net `A_n` of the sample, with `A_0 = {z_0}` and the
//! nets nested by construction. Two vertices `(x, n)` and `(y, m)` are
//! joined exactly when `|n - m| <= 1` and the `tau`-dilated open balls
//! around their centers intersect:
//!
//! ```text
//!   d_Z(x, y) < tau^(1 - |n-m|) * (alpha^-n + alpha^-m)
//! ```
//!
//! so same-level ("horizontal") edges use the dilation `tau` and
//! consecutive-level ("vertical") edges use none. Every vertex at level
//! `n >= 1` has a vertical neighbor one level down, because its center is
//! covered by a level-`(n-1)` ball; the graph is therefore connected
//! through the root `(z_0, 0)`.
//!
//! Net construction is greedy in ascending point-index order. Any maximal
//! net would do mathematically; fixing the order makes every build
//! reproducible, at the price that observed constants (e.g. the max degree
//! K*) are tied to this tie-breaking rule.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::math;
use crate::space::MetricSpaceSample;

/// Identifier of a vertex in a [`Filling`] (index into its vertex list).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

/// Identifier of an edge in a [`Filling`] (index into its edge list).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

impl core::fmt::Display for VertexId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl core::fmt::Display for EdgeId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// Whether an edge joins vertices on the same level or consecutive levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Horizontal,
    Vertical,
}

/// A filling vertex `(center, level)` together with its ball data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    /// Index of the center point in the underlying sample.
    pub center: usize,
    /// Level `n`; the associated ball is `B(center, alpha^-n)`.
    pub level: u32,
    /// Ball radius `alpha^-level`.
    pub radius: f64,
    /// Ball mass `nu(B(center, radius))`.
    pub mass: f64,
}

/// An unordered edge, stored with `a < b` (construction order: level, then
/// center index); vertical edges thus always point from the lower level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub a: VertexId,
    pub b: VertexId,
    pub kind: EdgeKind,
}

/// Failures constructing or querying nets and fillings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FillingError {
    InvalidParameter(&'static str),
    InvariantViolation(String),
    UnknownVertex(usize),
    UnknownEdge(usize),
}

impl core::fmt::Display for FillingError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FillingError::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            FillingError::InvariantViolation(what) => write!(f, "invariant violation: {what}"),
            FillingError::UnknownVertex(id) => write!(f, "unknown vertex id {id}"),
            FillingError::UnknownEdge(id) => write!(f, "unknown edge id {id}"),
        }
    }
}

impl core::error::Error for FillingError {}

/// Nested maximal separated nets `A_0 = {z_0} ⊆ A_1 ⊆ ... ⊆ A_N`.
#[derive(Debug, Clone)]
pub struct NetHierarchy {
    alpha: f64,
    /// `levels[n]` = sorted point indices of `A_n`.
    levels: Vec<Vec<usize>>,
}

impl NetHierarchy {
    /// Greedy nested construction: `A_{n+1}` starts from `A_n` and admits
    /// remaining points in ascending index order whenever they sit at
    /// distance `>= alpha^-(n+1)` from everything admitted so far.
    pub fn build(
        space: &MetricSpaceSample,
        alpha: f64,
        max_level: u32,
    ) -> Result<Self, FillingError> {
        if !(alpha > 1.0 && alpha.is_finite()) {
            return Err(FillingError::InvalidParameter("alpha must be a finite real > 1"));
        }
        if max_level < 1 {
            return Err(FillingError::InvalidParameter("max_level must be >= 1"));
        }
        let n_points = space.len();
        let mut member = alloc::vec![false; n_points];
        member[space.base_index()] = true;
        let mut current = alloc::vec![space.base_index()];
        let mut levels = Vec::with_capacity(max_level as usize + 1);
        levels.push(current.clone());
        for n in 1..=max_level {
            let sep = math::powf(alpha, -(n as f64));
            for candidate in 0..n_points {
                if member[candidate] {
                    continue;
                }
                let admissible = current.iter().all(|&m| space.dist(candidate, m) >= sep);
                if admissible {
                    member[candidate] = true;
                    current.push(candidate);
                }
            }
            current.sort_unstable();
            levels.push(current.clone());
        }
        Ok(Self { alpha, levels })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Deepest level `N`.
    pub fn max_level(&self) -> u32 {
        (self.levels.len() - 1) as u32
    }

    /// Sorted point indices of `A_n`.
    pub fn level(&self, n: u32) -> &[usize] {
        &self.levels[n as usize]
    }

    /// Brute-force check of all four hierarchy invariants (root level,
    /// nesting, separation, covering).
    pub fn verify(&self, space: &MetricSpaceSample) -> Result<(), FillingError> {
        if self.levels[0] != [space.base_index()] {
            return Err(FillingError::InvariantViolation("A_0 != {z_0}".into()));
        }
        for n in 0..self.levels.len() {
            let net = &self.levels[n];
            if n > 0 {
                for p in &self.levels[n - 1] {
                    if net.binary_search(p).is_err() {
                        return Err(FillingError::InvariantViolation(alloc::format!(
                            "nesting broken: point {p} in A_{} but not A_{n}",
                            n - 1
                        )));
                    }
                }
            }
            let r = math::powf(self.alpha, -(n as f64));
            for (i, &z) in net.iter().enumerate() {
                for &z2 in &net[i + 1..] {
                    if space.dist(z, z2) < r {
                        return Err(FillingError::InvariantViolation(alloc::format!(
                            "separation broken at level {n}: d({z},{z2}) = {} < {r}",
                            space.dist(z, z2)
                        )));
                    }
                }
            }
            for p in 0..space.len() {
                if !net.iter().any(|&z| space.dist(p, z) < r) {
                    return Err(FillingError::InvariantViolation(alloc::format!(
                        "covering broken at level {n}: point {p} not within {r} of the net"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Per-level degree summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelDegrees {
    pub level: u32,
    pub min: usize,
    pub max: usize,
    pub mean: f64,
}

/// Output of [`Filling::degree_stats`].
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeStats {
    pub per_level: Vec<LevelDegrees>,
    pub global_min: usize,
    pub global_max: usize,
}

/// The hyperbolic filling of a sample space, truncated at a finite level.
///
/// Owns its sample: ray enumeration and measure lifting both need the
/// underlying distances and weights.
#[derive(Debug, Clone)]
pub struct Filling {
    space: MetricSpaceSample,
    alpha: f64,
    tau: f64,
    eps: f64,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    /// `adjacency[v]` = neighbors of `v` with the connecting edge.
    adjacency: Vec<Vec<(VertexId, EdgeId)>>,
    /// Vertex-id range of level `n` is `level_start[n]..level_start[n+1]`.
    level_start: Vec<usize>,
    /// Edge lookup by endpoint pair `(min, max)`.
    pair_index: BTreeMap<(usize, usize), EdgeId>,
}

impl Filling {
    /// Assemble the filling over a net hierarchy: one vertex per net point
    /// per level, edges by the dilated-ball intersection rule with strict
    /// inequality (boundary-touching balls do not create edges).
    pub fn build(
        space: MetricSpaceSample,
        nets: &NetHierarchy,
        tau: f64,
    ) -> Result<Self, FillingError> {
        if !(tau > 1.0 && tau.is_finite()) {
            return Err(FillingError::InvalidParameter("tau must be a finite real > 1"));
        }
        let alpha = nets.alpha();
        let max_level = nets.max_level();
        let mut vertices = Vec::new();
        let mut level_start = Vec::with_capacity(max_level as usize + 2);
        for n in 0..=max_level {
            level_start.push(vertices.len());
            let radius = math::powf(alpha, -(n as f64));
            for &center in nets.level(n) {
                let mass = space.ball_measure(center, radius);
                vertices.push(Vertex { center, level: n, radius, mass });
            }
        }
        level_start.push(vertices.len());

        let mut edges = Vec::new();
        let mut adjacency: Vec<Vec<(VertexId, EdgeId)>> = alloc::vec![Vec::new(); vertices.len()];
        let mut pair_index = BTreeMap::new();
        let push_edge = |edges: &mut Vec<Edge>,
                             adjacency: &mut Vec<Vec<(VertexId, EdgeId)>>,
                             pair_index: &mut BTreeMap<(usize, usize), EdgeId>,
                             i: usize,
                             j: usize,
                             kind: EdgeKind| {
            let id = EdgeId(edges.len());
            edges.push(Edge { a: VertexId(i), b: VertexId(j), kind });
            adjacency[i].push((VertexId(j), id));
            adjacency[j].push((VertexId(i), id));
            pair_index.insert((i.min(j), i.max(j)), id);
        };

        for n in 0..=max_level {
            let this = level_start[n as usize]..level_start[n as usize + 1];
            let r_n = math::powf(alpha, -(n as f64));
            // Horizontal edges within level n: d < tau * (r_n + r_n).
            let h_cut = tau * 2.0 * r_n;
            for i in this.clone() {
                for j in (i + 1)..this.end {
                    if space.dist(vertices[i].center, vertices[j].center) < h_cut {
                        push_edge(
                            &mut edges,
                            &mut adjacency,
                            &mut pair_index,
                            i,
                            j,
                            EdgeKind::Horizontal,
                        );
                    }
                }
            }
            // Vertical edges to level n+1: d < r_n + r_{n+1}, no tau.
            if n < max_level {
                let below = level_start[n as usize + 1]..level_start[n as usize + 2];
                let v_cut = r_n + r_n / alpha;
                for i in this {
                    for j in below.clone() {
                        if space.dist(vertices[i].center, vertices[j].center) < v_cut {
                            push_edge(
                                &mut edges,
                                &mut adjacency,
                                &mut pair_index,
                                i,
                                j,
                                EdgeKind::Vertical,
                            );
                        }
                    }
                }
            }
        }

        Ok(Self {
            space,
            alpha,
            tau,
            eps: math::ln(alpha),
            vertices,
            edges,
            adjacency,
            level_start,
            pair_index,
        })
    }

    /// Convenience: nets + filling in one call.
    pub fn construct(
        space: MetricSpaceSample,
        alpha: f64,
        tau: f64,
        max_level: u32,
    ) -> Result<Self, FillingError> {
        let nets = NetHierarchy::build(&space, alpha, max_level)?;
        Self::build(space, &nets, tau)
    }

    pub fn space(&self) -> &MetricSpaceSample {
        &self.space
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `eps = log alpha`, the uniformization rate.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Deepest level `N`.
    pub fn max_level(&self) -> u32 {
        (self.level_start.len() - 2) as u32
    }

    /// The root `v_0 = (z_0, 0)`.
    pub fn root(&self) -> VertexId {
        VertexId(0)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, v: VertexId) -> Result<&Vertex, FillingError> {
        self.vertices.get(v.0).ok_or(FillingError::UnknownVertex(v.0))
    }

    pub fn edge(&self, e: EdgeId) -> Result<&Edge, FillingError> {
        self.edges.get(e.0).ok_or(FillingError::UnknownEdge(e.0))
    }

    /// Vertex ids of level `n` (ascending center index).
    pub fn level_vertices(&self, n: u32) -> impl Iterator<Item = VertexId> + '_ {
        let range = if (n as usize) + 1 < self.level_start.len() {
            self.level_start[n as usize]..self.level_start[n as usize + 1]
        } else {
            0..0
        };
        range.map(VertexId)
    }

    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.adjacency[v.0]
    }

    pub fn edge_between(&self, v: VertexId, w: VertexId) -> Option<EdgeId> {
        self.pair_index.get(&(v.0.min(w.0), v.0.max(w.0))).copied()
    }

    /// Stored `nu(B_v)`; equal to a fresh `ball_measure` query by
    /// construction.
    pub fn vertex_ball_mass(&self, v: VertexId) -> Result<f64, FillingError> {
        Ok(self.vertex(v)?.mass)
    }

    /// Per-level and global degree statistics.
    pub fn degree_stats(&self) -> DegreeStats {
        let mut per_level = Vec::new();
        let mut global_min = usize::MAX;
        let mut global_max = 0;
        for n in 0..=self.max_level() {
            let ids: Vec<usize> = self.level_vertices(n).map(|v| v.0).collect();
            let degrees: Vec<usize> = ids.iter().map(|&i| self.adjacency[i].len()).collect();
            let min = degrees.iter().copied().min().unwrap_or(0);
            let max = degrees.iter().copied().max().unwrap_or(0);
            let mean = if degrees.is_empty() {
                0.0
            } else {
                degrees.iter().sum::<usize>() as f64 / degrees.len() as f64
            };
            per_level.push(LevelDegrees { level: n, min, max, mean });
            global_min = global_min.min(min);
            global_max = global_max.max(max);
        }
        DegreeStats { per_level, global_min: global_min.min(global_max), global_max }
    }

    /// Structural invariant check: edge symmetry/level rules, strict-rule
    /// agreement, and the downward-vertical-neighbor property for every
    /// non-root vertex.
    pub fn verify(&self) -> Result<(), FillingError> {
        for (idx, e) in self.edges.iter().enumerate() {
            let va = &self.vertices[e.a.0];
            let vb = &self.vertices[e.b.0];
            let gap = va.level.abs_diff(vb.level);
            let expected = match e.kind {
                EdgeKind::Horizontal => 0,
                EdgeKind::Vertical => 1,
            };
            if gap != expected {
                return Err(FillingError::InvariantViolation(alloc::format!(
                    "edge {idx} tagged {:?} joins levels {} and {}",
                    e.kind,
                    va.level,
                    vb.level
                )));
            }
            let dilation = if gap == 0 { self.tau } else { 1.0 };
            let cut = dilation * (va.radius + vb.radius);
            let d = self.space.dist(va.center, vb.center);
            if !(d < cut) {
                return Err(FillingError::InvariantViolation(alloc::format!(
                    "edge {idx} fails the intersection rule: d = {d}, cut = {cut}"
                )));
            }
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if v.level == 0 {
                continue;
            }
            let has_down = self.adjacency[i].iter().any(|&(w, _)| {
                self.vertices[w.0].level + 1 == v.level
            });
            if !has_down {
                return Err(FillingError::InvariantViolation(alloc::format!(
                    "vertex {i} at level {} has no vertical neighbor below",
                    v.level
                )));
            }
        }
        Ok(())
    }
}
