//! Uniformized geometry on the filling.
//!
//! The filling is first a metric graph with unit edges. The graph height
//! `|x|` of a point is its graph distance to the root; for a vertex this
//! equals its level (every vertex has a vertical tower down to the root,
//! and no path can do better since levels change by at most one per edge —
//! asserted against BFS in the tests). Along an edge `[v, w]` the height
//! interpolates as `min(|v| + t, |w| + 1 - t)`, a piecewise-linear map
//! with slopes +-1.
//!
//! The uniformized metric rescales arc length by `e^(-eps |x|)` with
//! `eps = log alpha`. Edge lengths then have closed forms:
//!
//! * vertical `n -> n+1`:  `(e^(-eps n) - e^(-eps (n+1))) / eps`
//! * horizontal at level n: `2 (e^(-eps n) - e^(-eps (n+1/2))) / eps`
//!
//! and a vertical ray of depth `N` has length `(1 - e^(-eps N)) / eps`,
//! approaching `1/eps` — the boundary sits at finite distance.
//!
//! Geodesic rays to a boundary point `xi` pick one vertex per level among
//! those whose ball contains `xi`; any two such choices at consecutive
//! levels are automatically neighbors, which also makes the parity
//! interleaving of two rays a valid ray — the device used to compare trace
//! limits along different rays.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;

use crate::filling::{EdgeId, EdgeKind, Filling, FillingError, VertexId};
use crate::math;

/// A point of the filling: edge id plus parameter `t in [0, 1]` measured
/// from the edge's stored first endpoint (the lower (level, center) one).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePoint {
    pub edge: EdgeId,
    pub t: f64,
}

/// Truncated geodesic ray `[v_0, xi)`: one vertex per level, each of whose
/// balls contains the target sample point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeodesicRay {
    xi: usize,
    vertices: Vec<VertexId>,
}

impl GeodesicRay {
    /// Target sample-point index.
    pub fn target(&self) -> usize {
        self.xi
    }

    /// Vertex at level `n`.
    pub fn vertex(&self, n: u32) -> VertexId {
        self.vertices[n as usize]
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    /// Depth `N`: the ray spans levels `0..=N` over `N` vertical edges.
    pub fn depth(&self) -> u32 {
        (self.vertices.len() - 1) as u32
    }

    /// Assemble a ray from raw parts (used by document loading); the
    /// invariants are only checked by [`Filling::verify_ray`].
    pub fn from_parts(xi: usize, vertices: Vec<VertexId>) -> Self {
        Self { xi, vertices }
    }
}

/// Ray construction/combination failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RayError {
    UnknownBoundaryPoint(usize),
    /// Interleaving rays that target different boundary points.
    MismatchedTargets { left: usize, right: usize },
    /// A ray must span at least levels 0 and 1.
    TooShallow,
}

impl core::fmt::Display for RayError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RayError::UnknownBoundaryPoint(xi) => write!(f, "unknown boundary point index {xi}"),
            RayError::MismatchedTargets { left, right } => {
                write!(f, "rays target different boundary points ({left} vs {right})")
            }
            RayError::TooShallow => write!(f, "ray needs depth >= 1"),
        }
    }
}

impl core::error::Error for RayError {}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        // Reversed: BinaryHeap is a max-heap, we want smallest distance first.
        other.dist.total_cmp(&self.dist).then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Filling {
    /// Graph height `|x|`: `min(|v| + t, |w| + (1 - t))` over the edge's
    /// endpoints, with vertex heights equal to their levels.
    pub fn graph_height(&self, x: &EdgePoint) -> Result<f64, FillingError> {
        let e = self.edge(x.edge)?;
        let la = self.vertex(e.a)?.level as f64;
        let lb = self.vertex(e.b)?.level as f64;
        let t = x.t.clamp(0.0, 1.0);
        Ok((la + t).min(lb + (1.0 - t)))
    }

    /// An [`EdgePoint`] sitting exactly on vertex `v` (any incident edge).
    pub fn vertex_point(&self, v: VertexId) -> Result<EdgePoint, FillingError> {
        let (_, eid) = *self
            .neighbors(v)
            .first()
            .ok_or(FillingError::InvariantViolation(alloc::format!(
                "vertex {} is isolated",
                v.0
            )))?;
        let e = self.edge(eid)?;
        Ok(EdgePoint { edge: eid, t: if e.a == v { 0.0 } else { 1.0 } })
    }

    /// Closed-form uniformized length of a whole edge.
    pub fn uniformized_edge_length(&self, edge: EdgeId) -> Result<f64, FillingError> {
        self.uniformized_segment_length(edge, 0.0, 1.0)
    }

    /// Closed-form uniformized length of the edge segment `t0..t1`.
    /// The height profile is linear on vertical edges and kinked at the
    /// midpoint on horizontal ones, so the integral splits exactly.
    pub fn uniformized_segment_length(
        &self,
        edge: EdgeId,
        t0: f64,
        t1: f64,
    ) -> Result<f64, FillingError> {
        let e = self.edge(edge)?;
        let (t0, t1) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
        let eps = self.eps();
        let la = self.vertex(e.a)?.level as f64;
        match e.kind {
            EdgeKind::Vertical => {
                // Height n + t for t in [0, 1] (the stored first endpoint is
                // the lower level).
                Ok(rising_piece(eps, la, t0, t1))
            }
            EdgeKind::Horizontal => {
                let mut total = 0.0;
                let lo = t0.min(0.5);
                let hi = t1.min(0.5);
                if hi > lo {
                    total += rising_piece(eps, la, lo, hi);
                }
                let lo = t0.max(0.5);
                let hi = t1.max(0.5);
                if hi > lo {
                    // Height n + 1 - t: mirror of the rising piece.
                    total += rising_piece(eps, la, 1.0 - hi, 1.0 - lo);
                }
                Ok(total)
            }
        }
    }

    /// Shortest-path distance in the uniformized length structure.
    ///
    /// Horizontal edges are subdivided at their height kink (t = 1/2) so
    /// every arc in the search graph carries an exact closed-form length;
    /// the query points split their own edges exactly.
    pub fn uniformized_distance(&self, x: &EdgePoint, y: &EdgePoint) -> Result<f64, FillingError> {
        self.edge(x.edge)?;
        self.edge(y.edge)?;

        let n_vertices = self.vertex_count();
        // Node layout: vertices, then one midpoint node per horizontal
        // edge, then up to two query nodes.
        let mut horizontal_mid: alloc::collections::BTreeMap<usize, usize> =
            alloc::collections::BTreeMap::new();
        let mut next = n_vertices;
        for (i, e) in self.edges().iter().enumerate() {
            if e.kind == EdgeKind::Horizontal {
                horizontal_mid.insert(i, next);
                next += 1;
            }
        }
        let x_node = next;
        let y_node = next + 1;
        let mut adj: Vec<Vec<(usize, f64)>> = alloc::vec![Vec::new(); next + 2];
        let connect = |adj: &mut Vec<Vec<(usize, f64)>>, a: usize, b: usize, w: f64| {
            adj[a].push((b, w));
            adj[b].push((a, w));
        };

        for (i, e) in self.edges().iter().enumerate() {
            match e.kind {
                EdgeKind::Vertical => {
                    let w = self.uniformized_segment_length(EdgeId(i), 0.0, 1.0)?;
                    connect(&mut adj, e.a.0, e.b.0, w);
                }
                EdgeKind::Horizontal => {
                    let m = horizontal_mid[&i];
                    let w0 = self.uniformized_segment_length(EdgeId(i), 0.0, 0.5)?;
                    let w1 = self.uniformized_segment_length(EdgeId(i), 0.5, 1.0)?;
                    connect(&mut adj, e.a.0, m, w0);
                    connect(&mut adj, m, e.b.0, w1);
                }
            }
        }

        // Splice a query point into the search graph: arcs to its edge's
        // endpoint nodes (through the midpoint node on horizontal edges).
        let splice = |adj: &mut Vec<Vec<(usize, f64)>>,
                          node: usize,
                          p: &EdgePoint|
         -> Result<(), FillingError> {
            let e = self.edge(p.edge)?;
            let t = p.t.clamp(0.0, 1.0);
            match e.kind {
                EdgeKind::Vertical => {
                    connect(adj, node, e.a.0, self.uniformized_segment_length(p.edge, 0.0, t)?);
                    connect(adj, node, e.b.0, self.uniformized_segment_length(p.edge, t, 1.0)?);
                }
                EdgeKind::Horizontal => {
                    let m = horizontal_mid[&p.edge.0];
                    if t <= 0.5 {
                        connect(adj, node, e.a.0, self.uniformized_segment_length(p.edge, 0.0, t)?);
                        connect(adj, node, m, self.uniformized_segment_length(p.edge, t, 0.5)?);
                    } else {
                        connect(adj, node, m, self.uniformized_segment_length(p.edge, 0.5, t)?);
                        connect(adj, node, e.b.0, self.uniformized_segment_length(p.edge, t, 1.0)?);
                    }
                }
            }
            Ok(())
        };
        splice(&mut adj, x_node, x)?;
        splice(&mut adj, y_node, y)?;
        // Same-edge queries can connect directly through the edge interior.
        if x.edge == y.edge {
            let w = self.uniformized_segment_length(x.edge, x.t, y.t)?;
            connect(&mut adj, x_node, y_node, w);
        }

        // Dijkstra from x_node until y_node settles.
        let mut dist = alloc::vec![f64::INFINITY; adj.len()];
        let mut done = alloc::vec![false; adj.len()];
        let mut heap = BinaryHeap::new();
        dist[x_node] = 0.0;
        heap.push(HeapEntry { dist: 0.0, node: x_node });
        while let Some(HeapEntry { dist: d, node }) = heap.pop() {
            if done[node] {
                continue;
            }
            done[node] = true;
            if node == y_node {
                return Ok(d);
            }
            for &(next, w) in &adj[node] {
                let nd = d + w;
                if nd < dist[next] {
                    dist[next] = nd;
                    heap.push(HeapEntry { dist: nd, node: next });
                }
            }
        }
        Ok(dist[y_node])
    }

    /// `V_n(xi)`: vertices at level `n` whose ball contains `xi`
    /// (`d_Z(center, xi) < alpha^-n`). Nonempty for every level by the
    /// covering property of the nets.
    pub fn boundary_cone(&self, xi: usize, n: u32) -> Result<Vec<VertexId>, RayError> {
        if xi >= self.space().len() {
            return Err(RayError::UnknownBoundaryPoint(xi));
        }
        let r = math::powf(self.alpha(), -(n as f64));
        Ok(self
            .level_vertices(n)
            .filter(|&v| {
                let c = self.vertices()[v.0].center;
                self.space().dist(c, xi) < r
            })
            .collect())
    }

    /// All geodesic rays from the root to `xi`, truncated at the filling
    /// depth: the product of per-level choices from `V_n(xi)`, enumerated
    /// depth-first in ascending center order and pruned to `max_rays`.
    pub fn enumerate_rays(&self, xi: usize, max_rays: usize) -> Result<Vec<GeodesicRay>, RayError> {
        if xi >= self.space().len() {
            return Err(RayError::UnknownBoundaryPoint(xi));
        }
        let max_rays = max_rays.max(1);
        let depth = self.max_level();
        let mut cones = Vec::with_capacity(depth as usize + 1);
        for n in 0..=depth {
            let cone = self.boundary_cone(xi, n)?;
            debug_assert!(!cone.is_empty(), "covering guarantees V_n(xi) != empty");
            cones.push(cone);
        }
        let mut rays = Vec::new();
        let mut prefix: Vec<VertexId> = Vec::with_capacity(depth as usize + 1);
        dfs_product(&cones, &mut prefix, &mut rays, xi, max_rays);
        Ok(rays)
    }

    /// Check both ray invariants: ball membership per level and adjacency
    /// of consecutive vertices.
    pub fn verify_ray(&self, ray: &GeodesicRay) -> Result<(), FillingError> {
        for (n, &v) in ray.vertices().iter().enumerate() {
            let vert = self.vertex(v)?;
            if vert.level as usize != n {
                return Err(FillingError::InvariantViolation(alloc::format!(
                    "ray vertex {} sits at level {}, expected {n}",
                    v.0,
                    vert.level
                )));
            }
            if !(self.space().dist(vert.center, ray.target()) < vert.radius) {
                return Err(FillingError::InvariantViolation(alloc::format!(
                    "ray vertex {} ball does not contain target {}",
                    v.0,
                    ray.target()
                )));
            }
            if n > 0 && self.edge_between(ray.vertices()[n - 1], v).is_none() {
                return Err(FillingError::InvariantViolation(alloc::format!(
                    "ray vertices {} and {} are not adjacent",
                    ray.vertices()[n - 1].0,
                    v.0
                )));
            }
        }
        Ok(())
    }

    /// Uniformized length of the truncated ray: the telescoping sum of its
    /// vertical edge lengths, `(1 - e^(-eps N)) / eps` for depth `N`.
    pub fn ray_length(&self, ray: &GeodesicRay) -> f64 {
        let eps = self.eps();
        let mut sum = 0.0;
        for n in 0..ray.depth() {
            let n = n as f64;
            sum += (math::exp(-eps * n) - math::exp(-eps * (n + 1.0))) / eps;
        }
        sum
    }

    /// Edge ids traversed by the ray, level by level.
    pub fn ray_edges(&self, ray: &GeodesicRay) -> Result<Vec<EdgeId>, FillingError> {
        let mut out = Vec::with_capacity(ray.depth() as usize);
        for n in 0..ray.depth() {
            let v = ray.vertex(n);
            let w = ray.vertex(n + 1);
            let e = self.edge_between(v, w).ok_or_else(|| {
                FillingError::InvariantViolation(alloc::format!(
                    "ray vertices {} and {} are not adjacent",
                    v.0,
                    w.0
                ))
            })?;
            out.push(e);
        }
        Ok(out)
    }
}

/// Parity interleaving of two rays with the same target: even levels from
/// `r1`, odd levels from `r2`, truncated to the shorter depth. Valid as a
/// ray because any members of `V_n(xi)` and `V_{n+1}(xi)` are neighbors.
pub fn interleave_rays(r1: &GeodesicRay, r2: &GeodesicRay) -> Result<GeodesicRay, RayError> {
    if r1.target() != r2.target() {
        return Err(RayError::MismatchedTargets { left: r1.target(), right: r2.target() });
    }
    let len = r1.vertices().len().min(r2.vertices().len());
    if len < 2 {
        return Err(RayError::TooShallow);
    }
    let vertices = (0..len)
        .map(|n| if n % 2 == 0 { r1.vertices()[n] } else { r2.vertices()[n] })
        .collect();
    Ok(GeodesicRay { xi: r1.target(), vertices })
}

/// `int_{t0}^{t1} e^(-eps (base + t)) dt` in closed form.
fn rising_piece(eps: f64, base: f64, t0: f64, t1: f64) -> f64 {
    (math::exp(-eps * (base + t0)) - math::exp(-eps * (base + t1))) / eps
}

fn dfs_product(
    cones: &[Vec<VertexId>],
    prefix: &mut Vec<VertexId>,
    rays: &mut Vec<GeodesicRay>,
    xi: usize,
    max_rays: usize,
) {
    if rays.len() >= max_rays {
        return;
    }
    let depth = prefix.len();
    if depth == cones.len() {
        rays.push(GeodesicRay { xi, vertices: prefix.clone() });
        return;
    }
    for &v in &cones[depth] {
        if rays.len() >= max_rays {
            return;
        }
        prefix.push(v);
        dfs_product(cones, prefix, rays, xi, max_rays);
        prefix.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::MetricSpaceSample;

    fn three_point_filling() -> Filling {
        let space = MetricSpaceSample::from_line_points(
            alloc::vec![0.0, 0.3, 0.6],
            alloc::vec![1.0 / 3.0; 3],
            0,
        )
        .unwrap();
        Filling::construct(space, 2.0, 1.5, 2).unwrap()
    }

    fn tower_filling(levels: u32) -> Filling {
        let space =
            MetricSpaceSample::from_line_points(alloc::vec![0.0], alloc::vec![1.0], 0).unwrap();
        Filling::construct(space, 2.0, 1.5, levels).unwrap()
    }

    /// Breadth-first graph distance from the root, the defining notion that
    /// vertex heights must reproduce.
    fn bfs_heights(f: &Filling) -> Vec<u32> {
        let mut dist = alloc::vec![u32::MAX; f.vertex_count()];
        let mut queue = alloc::collections::VecDeque::new();
        dist[f.root().0] = 0;
        queue.push_back(f.root());
        while let Some(v) = queue.pop_front() {
            for &(w, _) in f.neighbors(v) {
                if dist[w.0] == u32::MAX {
                    dist[w.0] = dist[v.0] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    #[test]
    fn vertex_heights_equal_levels_and_bfs() {
        for f in [three_point_filling(), tower_filling(5)] {
            let bfs = bfs_heights(&f);
            for (i, v) in f.vertices().iter().enumerate() {
                assert_eq!(bfs[i], v.level, "vertex {i}");
                let p = f.vertex_point(VertexId(i)).unwrap();
                let h = f.graph_height(&p).unwrap();
                assert!((h - v.level as f64).abs() < 1e-15);
            }
        }
        let c = Filling::construct(
            MetricSpaceSample::gen_cantor(4, 0.9).unwrap(),
            2.0,
            1.5,
            6,
        )
        .unwrap();
        let bfs = bfs_heights(&c);
        for (i, v) in c.vertices().iter().enumerate() {
            assert_eq!(bfs[i], v.level);
        }
    }

    #[test]
    fn midpoint_heights() {
        let f = three_point_filling();
        // Horizontal edge (0,1)~(0.6,1) at level 1.
        let h_edge = f.edge_between(VertexId(1), VertexId(2)).unwrap();
        let mid = EdgePoint { edge: h_edge, t: 0.5 };
        assert!((f.graph_height(&mid).unwrap() - 1.5).abs() < 1e-15);
        // Vertical edge (0,0)~(0,1).
        let v_edge = f.edge_between(VertexId(0), VertexId(1)).unwrap();
        let mid = EdgePoint { edge: v_edge, t: 0.5 };
        assert!((f.graph_height(&mid).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn height_is_one_lipschitz_along_edges() {
        let f = three_point_filling();
        for (i, _) in f.edges().iter().enumerate() {
            let e = EdgeId(i);
            let mut prev = f.graph_height(&EdgePoint { edge: e, t: 0.0 }).unwrap();
            let mut t = 0.0f64;
            while t < 1.0 {
                let nt = (t + 0.05).min(1.0);
                let h = f.graph_height(&EdgePoint { edge: e, t: nt }).unwrap();
                assert!((h - prev).abs() <= (nt - t) + 1e-12);
                prev = h;
                t = nt;
            }
        }
    }

    #[test]
    fn edge_lengths_match_closed_forms_and_quadrature() {
        let f = three_point_filling();
        let eps = f.eps();
        let v_edge = f.edge_between(VertexId(0), VertexId(1)).unwrap();
        let len = f.uniformized_edge_length(v_edge).unwrap();
        assert!((len - (1.0 - 0.5) / eps).abs() < 1e-14);
        assert!((len - 0.721_347_520_444_481_7).abs() < 1e-12);

        let h_edge = f.edge_between(VertexId(1), VertexId(2)).unwrap();
        let h_len = f.uniformized_edge_length(h_edge).unwrap();
        let closed = 2.0 * (math::exp(-eps) - math::exp(-1.5 * eps)) / eps;
        assert!((h_len - closed).abs() < 1e-14);

        // Quadrature of e^(-eps h(t)) agrees with both closed forms.
        for e in [v_edge, h_edge] {
            let q = math::integrate_adaptive(
                |t| math::exp(-eps * f.graph_height(&EdgePoint { edge: e, t }).unwrap()),
                0.0,
                1.0,
                1e-12,
                &[0.5],
            )
            .unwrap();
            assert!((q - f.uniformized_edge_length(e).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn horizontal_length_sits_between_neighbor_vertical_lengths() {
        // A level-n horizontal edge dips only half a level, so it is longer
        // than the vertical edge below level n+1 but shorter than twice the
        // vertical edge leaving level n.
        let f = three_point_filling();
        let eps = f.eps();
        for n in [1.0f64, 2.0, 3.0] {
            let horizontal = 2.0 * (math::exp(-eps * n) - math::exp(-eps * (n + 0.5))) / eps;
            let vertical_up = (math::exp(-eps * n) - math::exp(-eps * (n + 1.0))) / eps;
            assert!(horizontal > vertical_up);
            assert!(horizontal < 2.0 * vertical_up);
        }
    }

    #[test]
    fn tower_distance_telescopes() {
        let f = tower_filling(8);
        let eps = f.eps();
        let root = f.vertex_point(f.root()).unwrap();
        assert!(f.uniformized_distance(&root, &root).unwrap() < 1e-15);
        for n in 1..=8u32 {
            let v = f.level_vertices(n).next().unwrap();
            let p = f.vertex_point(v).unwrap();
            let d = f.uniformized_distance(&root, &p).unwrap();
            let closed = (1.0 - math::exp(-eps * n as f64)) / eps;
            assert!((d - closed).abs() < 1e-12, "level {n}: {d} vs {closed}");
        }
    }

    #[test]
    fn distance_is_symmetric_and_triangular() {
        let f = three_point_filling();
        let pts: Vec<EdgePoint> = (0..f.vertex_count())
            .map(|i| f.vertex_point(VertexId(i)).unwrap())
            .collect();
        for x in &pts {
            for y in &pts {
                let dxy = f.uniformized_distance(x, y).unwrap();
                let dyx = f.uniformized_distance(y, x).unwrap();
                assert!((dxy - dyx).abs() < 1e-12);
                for z in &pts {
                    let dxz = f.uniformized_distance(x, z).unwrap();
                    let dzy = f.uniformized_distance(z, y).unwrap();
                    assert!(dxy <= dxz + dzy + 1e-12);
                }
            }
        }
    }

    #[test]
    fn distance_to_root_is_bounded_by_height_formula() {
        let f = three_point_filling();
        let eps = f.eps();
        let root = f.vertex_point(f.root()).unwrap();
        for (i, _) in f.edges().iter().enumerate() {
            for k in 0..=4 {
                let p = EdgePoint { edge: EdgeId(i), t: k as f64 / 4.0 };
                let h = f.graph_height(&p).unwrap();
                let bound =
                    (1.0 - math::exp(-eps * h)) / eps + math::exp(-eps * math::floor(h));
                let d = f.uniformized_distance(&root, &p).unwrap();
                assert!(d <= bound + 1e-12, "d = {d}, bound = {bound}");
            }
        }
    }

    #[test]
    fn ray_enumeration_on_three_points() {
        let f = three_point_filling();
        let rays = f.enumerate_rays(1, 64).unwrap();
        assert_eq!(rays.len(), 2);
        // DFS in ascending center order: the (0,1) branch comes first.
        assert_eq!(rays[0].vertices(), &[VertexId(0), VertexId(1), VertexId(4)]);
        assert_eq!(rays[1].vertices(), &[VertexId(0), VertexId(2), VertexId(4)]);
        for r in &rays {
            f.verify_ray(r).unwrap();
        }
        assert!(f.enumerate_rays(99, 64).is_err());
    }

    #[test]
    fn one_point_space_has_single_ray() {
        let f = tower_filling(6);
        let rays = f.enumerate_rays(0, 64).unwrap();
        assert_eq!(rays.len(), 1);
        assert_eq!(rays[0].depth(), 6);
    }

    #[test]
    fn cones_shrink_to_singletons_after_saturation() {
        let space = MetricSpaceSample::gen_cantor(3, 0.9).unwrap();
        let f = Filling::construct(space, 2.0, 1.5, 10).unwrap();
        for xi in 0..f.space().len() {
            let deep = f.boundary_cone(xi, 10).unwrap();
            assert_eq!(deep.len(), 1, "xi = {xi}");
            for r in f.enumerate_rays(xi, 64).unwrap() {
                f.verify_ray(&r).unwrap();
            }
        }
    }

    #[test]
    fn interleaving_is_idempotent_and_valid() {
        let f = three_point_filling();
        let rays = f.enumerate_rays(1, 64).unwrap();
        let same = interleave_rays(&rays[0], &rays[0]).unwrap();
        assert_eq!(&same, &rays[0]);
        let mixed = interleave_rays(&rays[0], &rays[1]).unwrap();
        f.verify_ray(&mixed).unwrap();
        let mirrored = interleave_rays(&rays[1], &rays[0]).unwrap();
        f.verify_ray(&mirrored).unwrap();
        assert_eq!(mixed.vertex(0), rays[0].vertex(0));
        assert_eq!(mixed.vertex(1), rays[1].vertex(1));
        assert_eq!(mirrored.vertex(1), rays[0].vertex(1));

        let other_target = f.enumerate_rays(0, 64).unwrap();
        assert!(matches!(
            interleave_rays(&rays[0], &other_target[0]),
            Err(RayError::MismatchedTargets { .. })
        ));
    }

    #[test]
    fn ray_length_identity() {
        let f = tower_filling(12);
        let eps = f.eps();
        let ray = &f.enumerate_rays(0, 1).unwrap()[0];
        let len = f.ray_length(ray);
        let closed = (1.0 - math::exp(-eps * 12.0)) / eps;
        assert!((len - closed).abs() < 1e-12);
        assert!(len < 1.0 / eps);

        let shallow = Filling::construct(
            MetricSpaceSample::from_line_points(alloc::vec![0.0], alloc::vec![1.0], 0).unwrap(),
            2.0,
            1.5,
            1,
        )
        .unwrap();
        let r1 = &shallow.enumerate_rays(0, 1).unwrap()[0];
        assert!((shallow.ray_length(r1) - 0.721_347_520_444_481_7).abs() < 1e-12);
    }
}
