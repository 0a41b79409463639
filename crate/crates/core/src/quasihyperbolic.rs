//! Quasihyperbolic lengths, distances, and bi-Lipschitz scans on
//! weighted grid graphs.
//!
//! Nodes are lattice points h * Z^n with d(x, bd D) >= h (the margin
//! keeps edge weights bounded; its truncation error vanishes as h -> 0
//! for interior queries). Edges connect offsets within Chebyshev radius
//! 2 after removal of colinear multiples (16 directions in 2D, 98 in
//! 3D), weighted by Euclidean length times the trapezoid value of 1/d at
//! the endpoints. Since 1/d is convex along segments of a convex domain,
//! every edge weight dominates the true line integral, so graph
//! distances never undershoot the quasihyperbolic distance.
//!
//! Query points that are not lattice nodes are inserted as temporary
//! endpoints wired to every node within Chebyshev radius 2h; queries
//! closer than h to the boundary are rejected rather than approximated.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DomainSpec;
use crate::harmonic::HarmonicMap;
use crate::sampling::{op, SamplingPlan};
use crate::vec::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Neighborhood {
    /// 3^n - 1 directions; fast mode.
    Radius1,
    /// Chebyshev radius 2 with colinear duplicates removed; cuts the
    /// direction-quantization error to the percent range.
    Radius2,
}

/// Weighted grid graph approximating the quasihyperbolic geometry of a
/// domain. Immutable after build; distance queries own their search
/// state, so concurrent queries against a shared graph are safe.
#[derive(Debug, Clone)]
pub struct QHGraph {
    domain: DomainSpec,
    h: f64,
    node_pos: Vec<Vector>,
    node_dist: Vec<f64>,
    index: HashMap<[i64; 3], u32>,
    adjacency: Vec<Vec<(u32, f64)>>,
    edge_count: usize,
}

fn offsets(n: usize, neighborhood: Neighborhood) -> Vec<[i64; 3]> {
    let radius: i64 = match neighborhood {
        Neighborhood::Radius1 => 1,
        Neighborhood::Radius2 => 2,
    };
    let mut out = Vec::new();
    let mut ranges = [0i64..1, 0..1, 0..1];
    for r in ranges.iter_mut().take(n) {
        *r = -radius..(radius + 1);
    }
    for a in ranges[0].clone() {
        for b in ranges[1].clone() {
            for c in ranges[2].clone() {
                let o = [a, b, c];
                if o == [0, 0, 0] {
                    continue;
                }
                // drop colinear multiples of shorter offsets
                if radius == 2 && o.iter().all(|v| v % 2 == 0) {
                    continue;
                }
                out.push(o);
            }
        }
    }
    out
}

/// Window predicate for gridding a half-space: distance along the normal
/// at most 8, lateral displacement at most 4. The weights still use the
/// true half-space distance, so the window only bounds the node set.
fn half_space_window(normal: &Vector, offset: f64, x: &Vector) -> bool {
    let t = normal.dot(x) - offset;
    if t > 8.0 {
        return false;
    }
    let along = normal.scale(t + offset);
    x.sub(&along).norm() <= 4.0
}

fn bounding_box(domain: &DomainSpec) -> Result<(Vector, Vector)> {
    let n = domain.dim();
    match domain {
        DomainSpec::UnitBall { .. } => Ok((
            Vector::new(vec![-1.0; n]),
            Vector::new(vec![1.0; n]),
        )),
        DomainSpec::Ball { center, radius } => Ok((
            Vector::new(center.as_slice().iter().map(|c| c - radius).collect()),
            Vector::new(center.as_slice().iter().map(|c| c + radius).collect()),
        )),
        DomainSpec::Ellipsoid { semi_axes } => Ok((
            Vector::new(semi_axes.iter().map(|a| -a).collect()),
            Vector::new(semi_axes.clone()),
        )),
        DomainSpec::HalfSpace { normal, offset } => {
            // bbox of the slab window
            let center = normal.scale(offset + 4.0);
            let reach = 4.0 + 4.0 * (n as f64).sqrt();
            Ok((
                Vector::new(center.as_slice().iter().map(|c| c - reach).collect()),
                Vector::new(center.as_slice().iter().map(|c| c + reach).collect()),
            ))
        }
        DomainSpec::ConvexPolytope { n, faces } => {
            // require axis-aligned bounding faces
            let mut lo = vec![f64::NEG_INFINITY; *n];
            let mut hi = vec![f64::INFINITY; *n];
            for f in faces {
                let norm = f.normal.norm();
                for i in 0..*n {
                    let c = f.normal[i];
                    if c.abs() / norm > 1.0 - 1e-12 {
                        if c > 0.0 {
                            hi[i] = hi[i].min(f.offset / c);
                        } else {
                            lo[i] = lo[i].max(f.offset / c);
                        }
                    }
                }
            }
            if lo.iter().any(|v| !v.is_finite()) || hi.iter().any(|v| !v.is_finite()) {
                return Err(Error::Resolution(
                    "polytope needs axis-aligned bounding faces to be gridded".into(),
                ));
            }
            Ok((Vector::new(lo), Vector::new(hi)))
        }
    }
}

/// Builds the grid graph. Fails with a resolution error when the node
/// set is empty and with a consistency error when a convex domain grids
/// into a disconnected graph.
pub fn build_graph(
    domain: &DomainSpec,
    h: f64,
    neighborhood: Neighborhood,
) -> Result<QHGraph> {
    if h <= 0.0 {
        return Err(Error::Precondition(format!("grid step h = {h} must be positive")));
    }
    let n = domain.dim();
    if n != 2 && n != 3 {
        return Err(Error::Precondition("graphs support n = 2, 3".into()));
    }
    let (lo, hi) = bounding_box(domain)?;
    let mut key_lo = [0i64; 3];
    let mut key_hi = [0i64; 3];
    for i in 0..n {
        key_lo[i] = (lo[i] / h).floor() as i64;
        key_hi[i] = (hi[i] / h).ceil() as i64;
    }

    let mut node_pos = Vec::new();
    let mut node_dist = Vec::new();
    let mut index: HashMap<[i64; 3], u32> = HashMap::new();
    let mut key_range = [0i64..1, 0..1, 0..1];
    for i in 0..n {
        key_range[i] = key_lo[i]..(key_hi[i] + 1);
    }
    for a in key_range[0].clone() {
        for b in key_range[1].clone() {
            for c in key_range[2].clone() {
                let key = [a, b, c];
                let mut coords = vec![a as f64 * h, b as f64 * h];
                if n == 3 {
                    coords.push(c as f64 * h);
                }
                let x = Vector::new(coords);
                if !domain.contains(&x)? {
                    continue;
                }
                if let DomainSpec::HalfSpace { normal, offset } = domain {
                    if !half_space_window(normal, *offset, &x) {
                        continue;
                    }
                }
                let d = domain.boundary_distance(&x)?;
                if d < h {
                    continue;
                }
                index.insert(key, node_pos.len() as u32);
                node_pos.push(x);
                node_dist.push(d);
            }
        }
    }
    if node_pos.is_empty() {
        return Err(Error::Resolution(format!(
            "grid step h = {h} produced an empty node set"
        )));
    }

    let dirs = offsets(n, neighborhood);
    let mut adjacency: Vec<Vec<(u32, f64)>> = vec![Vec::new(); node_pos.len()];
    let mut edge_count = 0usize;
    for (key, &u) in &index {
        for o in &dirs {
            // each undirected edge handled once from its lexicographically
            // smaller direction
            if *o < [0, 0, 0] {
                continue;
            }
            let nk = [key[0] + o[0], key[1] + o[1], key[2] + o[2]];
            if let Some(&v) = index.get(&nk) {
                let len = node_pos[u as usize].dist(&node_pos[v as usize]);
                let w = len * 0.5 * (1.0 / node_dist[u as usize] + 1.0 / node_dist[v as usize]);
                adjacency[u as usize].push((v, w));
                adjacency[v as usize].push((u, w));
                edge_count += 1;
            }
        }
    }

    let graph = QHGraph {
        domain: domain.clone(),
        h,
        node_pos,
        node_dist,
        index,
        adjacency,
        edge_count,
    };
    graph.check_connected()?;
    Ok(graph)
}

#[derive(Copy, Clone, PartialEq)]
struct HeapState {
    cost: f64,
    node: u32,
}

impl Eq for HeapState {}

impl Ord for HeapState {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed for a min-heap
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap_or(Ordering::Equal)
    }
}

impl PartialOrd for HeapState {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

enum Endpoint {
    Node(u32),
    Virtual { edges: Vec<(u32, f64)> },
}

impl QHGraph {
    pub fn node_count(&self) -> usize {
        self.node_pos.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut reached = 1usize;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adjacency[u as usize] {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    reached += 1;
                    stack.push(v);
                }
            }
        }
        if reached != n {
            return Err(Error::Connectivity(format!(
                "graph on a convex domain is disconnected: {reached} of {n} nodes reachable"
            )));
        }
        Ok(())
    }

    fn endpoint(&self, x: &Vector) -> Result<Endpoint> {
        let n = self.domain.dim();
        x.check_dim(n)?;
        if !self.domain.contains(x)? {
            return Err(Error::OutsideDomain(format!("query point {x} outside domain")));
        }
        let mut key = [0i64; 3];
        for i in 0..n {
            key[i] = (x[i] / self.h).round() as i64;
        }
        if let Some(&u) = self.index.get(&key) {
            if self.node_pos[u as usize].dist(x) < 1e-9 * self.h {
                return Ok(Endpoint::Node(u));
            }
        }
        let d = self.domain.boundary_distance(x)?;
        if d < self.h {
            return Err(Error::Resolution(format!(
                "query point {x} lies within h of the boundary (d = {d:.3e}, h = {})",
                self.h
            )));
        }
        // temporary endpoint wired to all nodes within Chebyshev radius 2h
        let mut edges = Vec::new();
        let reach = 2i64;
        let mut ranges = [0i64..1, 0..1, 0..1];
        for i in 0..n {
            let base = (x[i] / self.h).floor() as i64;
            ranges[i] = (base - reach)..(base + reach + 1);
        }
        for a in ranges[0].clone() {
            for b in ranges[1].clone() {
                for c in ranges[2].clone() {
                    if let Some(&u) = self.index.get(&[a, b, c]) {
                        let pos = &self.node_pos[u as usize];
                        let len = pos.dist(x);
                        if len <= 2.0 * self.h * (n as f64).sqrt() {
                            let w = len * 0.5 * (1.0 / d + 1.0 / self.node_dist[u as usize]);
                            edges.push((u, w));
                        }
                    }
                }
            }
        }
        if edges.is_empty() {
            return Err(Error::Connectivity(format!(
                "no graph nodes within reach of query point {x}"
            )));
        }
        Ok(Endpoint::Virtual { edges })
    }

    /// Shortest-path quasihyperbolic distance between two query points.
    ///
    /// Endpoints are ordered canonically before the search, so the result
    /// is exactly symmetric in its arguments.
    pub fn qh_distance(&self, x: &Vector, y: &Vector) -> Result<f64> {
        Ok(self.qh_path(x, y)?.0)
    }

    /// Distance plus the realizing node polyline (query points included
    /// as endpoints).
    pub fn qh_path(&self, x: &Vector, y: &Vector) -> Result<(f64, Vec<Vector>)> {
        let swap = {
            let xs = x.as_slice();
            let ys = y.as_slice();
            xs.iter()
                .zip(ys)
                .find_map(|(a, b)| {
                    if a < b {
                        Some(false)
                    } else if a > b {
                        Some(true)
                    } else {
                        None
                    }
                })
                .unwrap_or(false)
        };
        let (a, b) = if swap { (y, x) } else { (x, y) };
        if a == b {
            // still validate the point
            self.endpoint(a)?;
            return Ok((0.0, vec![a.clone()]));
        }
        let src = self.endpoint(a)?;
        let tgt = self.endpoint(b)?;
        let (dist, mut path) = self.dijkstra(a, b, &src, &tgt)?;
        if swap {
            path.reverse();
        }
        Ok((dist, path))
    }

    fn dijkstra(
        &self,
        src_pos: &Vector,
        tgt_pos: &Vector,
        src: &Endpoint,
        tgt: &Endpoint,
    ) -> Result<(f64, Vec<Vector>)> {
        let n = self.node_count();
        let virtual_src = n as u32;
        let virtual_tgt = n as u32 + 1;
        let src_id = match src {
            Endpoint::Node(u) => *u,
            Endpoint::Virtual { .. } => virtual_src,
        };
        let tgt_id = match tgt {
            Endpoint::Node(u) => *u,
            Endpoint::Virtual { .. } => virtual_tgt,
        };
        let tgt_edges: HashMap<u32, f64> = match tgt {
            Endpoint::Virtual { edges } => edges.iter().cloned().collect(),
            Endpoint::Node(_) => HashMap::new(),
        };
        const NO_PREV: u32 = u32::MAX;
        let mut dist = vec![f64::INFINITY; n + 2];
        let mut prev = vec![NO_PREV; n + 2];
        let mut heap = BinaryHeap::new();
        dist[src_id as usize] = 0.0;
        heap.push(HeapState {
            cost: 0.0,
            node: src_id,
        });
        while let Some(HeapState { cost, node }) = heap.pop() {
            if node == tgt_id {
                // backtrack the polyline
                let mut path = Vec::new();
                let mut cur = node;
                loop {
                    path.push(if cur == virtual_src {
                        src_pos.clone()
                    } else if cur == virtual_tgt {
                        tgt_pos.clone()
                    } else {
                        self.node_pos[cur as usize].clone()
                    });
                    if cur == src_id {
                        break;
                    }
                    cur = prev[cur as usize];
                }
                path.reverse();
                return Ok((cost, path));
            }
            if cost > dist[node as usize] {
                continue;
            }
            let mut relax =
                |v: u32, w: f64, heap: &mut BinaryHeap<HeapState>, prev: &mut Vec<u32>| {
                    let next = cost + w;
                    if next < dist[v as usize] {
                        dist[v as usize] = next;
                        prev[v as usize] = node;
                        heap.push(HeapState {
                            cost: next,
                            node: v,
                        });
                    }
                };
            if node == virtual_src {
                if let Endpoint::Virtual { edges } = src {
                    for &(v, w) in edges {
                        relax(v, w, &mut heap, &mut prev);
                    }
                }
            } else {
                for &(v, w) in &self.adjacency[node as usize] {
                    relax(v, w, &mut heap, &mut prev);
                }
                if let Some(&w) = tgt_edges.get(&node) {
                    relax(virtual_tgt, w, &mut heap, &mut prev);
                }
            }
        }
        Err(Error::Connectivity("target unreachable".into()))
    }
}

/// One sampled pair of a bi-Lipschitz scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairRatio {
    pub x: Vector,
    pub y: Vector,
    pub k_source: f64,
    pub k_target: f64,
    /// k_target(f x, f y) / k_source(x, y).
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BiLipschitzScan {
    pub pairs: Vec<PairRatio>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// max(max ratio, 1 / min ratio).
    pub m_hat: f64,
}

fn sample_pairs(
    map: &HarmonicMap,
    source: &QHGraph,
    target: &QHGraph,
    plan: &SamplingPlan,
) -> Result<Vec<(Vector, Vector, Vector, Vector)>> {
    let n = map.dim();
    let hs = source.step();
    let ht = target.step();
    let mut out = Vec::with_capacity(plan.count);
    let mut candidate = 0usize;
    let max_attempts = plan.count.max(8) * 200;
    while out.len() < plan.count && candidate < max_attempts {
        let x = plan.point(n, op::QH_PAIRS, 2 * candidate);
        let y = plan.point(n, op::QH_PAIRS, 2 * candidate + 1);
        candidate += 1;
        // pairs separated by >= 10h keep the discretization error
        // subdominant
        if x.dist(&y) < 10.0 * hs {
            continue;
        }
        let inside = |g: &QHGraph, p: &Vector| -> Result<bool> {
            Ok(g.domain().contains(p)? && g.domain().boundary_distance(p)? >= 1.5 * g.step())
        };
        if !inside(source, &x)? || !inside(source, &y)? {
            continue;
        }
        let fx = map.evaluate(&x)?;
        let fy = map.evaluate(&y)?;
        if !inside(target, &fx)? || !inside(target, &fy)? {
            continue;
        }
        if fx.dist(&fy) < 3.0 * ht {
            continue;
        }
        out.push((x, y, fx, fy));
    }
    if out.len() < plan.count {
        return Err(Error::Range(format!(
            "only {} of {} requested pairs landed inside both domains",
            out.len(),
            plan.count
        )));
    }
    Ok(out)
}

/// Distribution of quasihyperbolic distance ratios under the map.
pub fn qh_bilipschitz_scan(
    map: &HarmonicMap,
    source: &QHGraph,
    target: &QHGraph,
    plan: &SamplingPlan,
) -> Result<BiLipschitzScan> {
    let mut pairs = Vec::with_capacity(plan.count);
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = f64::NEG_INFINITY;
    for (x, y, fx, fy) in sample_pairs(map, source, target, plan)? {
        let k_source = source.qh_distance(&x, &y)?;
        let k_target = target.qh_distance(&fx, &fy)?;
        let ratio = k_target / k_source;
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
        pairs.push(PairRatio {
            x,
            y,
            k_source,
            k_target,
            ratio,
        });
    }
    let m_hat = max_ratio.max(1.0 / min_ratio);
    Ok(BiLipschitzScan {
        pairs,
        min_ratio,
        max_ratio,
        m_hat,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GehringOsgoodReport {
    pub k: f64,
    /// alpha = K^{1/(1-n)}.
    pub alpha: f64,
    /// smallest C with k'(fx, fy) <= C max(k, k^alpha) over the pairs.
    pub c_emp: f64,
    pub pairs: usize,
}

/// Empirical constant for the quasi-invariance inequality
/// k'(f x, f y) <= C max(k(x,y), k(x,y)^alpha).
pub fn gehring_osgood_check(
    map: &HarmonicMap,
    source: &QHGraph,
    target: &QHGraph,
    plan: &SamplingPlan,
    k: f64,
) -> Result<GehringOsgoodReport> {
    if k < 1.0 {
        return Err(Error::Precondition(format!("distortion K = {k} must be >= 1")));
    }
    let n = map.dim();
    let alpha = k.powf(1.0 / (1.0 - n as f64));
    let mut c_emp = 0.0f64;
    let mut count = 0usize;
    for (x, y, fx, fy) in sample_pairs(map, source, target, plan)? {
        let ks = source.qh_distance(&x, &y)?;
        let kt = target.qh_distance(&fx, &fy)?;
        let denom = ks.max(ks.powf(alpha));
        if denom > 0.0 {
            c_emp = c_emp.max(kt / denom);
            count += 1;
        }
    }
    Ok(GehringOsgoodReport {
        k,
        alpha,
        c_emp,
        pairs: count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::SmallMatrix;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "expected {b}, got {a} (tol {tol})");
    }

    #[test]
    fn offsets_counts_match_design() {
        assert_eq!(offsets(2, Neighborhood::Radius2).len(), 16);
        assert_eq!(offsets(3, Neighborhood::Radius2).len(), 98);
        assert_eq!(offsets(2, Neighborhood::Radius1).len(), 8);
        assert_eq!(offsets(3, Neighborhood::Radius1).len(), 26);
    }

    #[test]
    fn ball2_build_counts() {
        // ~31k interior lattice points at h = 0.01; exact counts frozen
        // as a regression
        let g = build_graph(&DomainSpec::unit_ball(2), 0.01, Neighborhood::Radius2).unwrap();
        assert_eq!(g.node_count(), 30_757);
        assert_eq!(g.edge_count(), 243_324);
        // up to 16 neighbors per node, each undirected edge counted once
        assert!(g.edge_count() > 7 * g.node_count());
        assert!(g.edge_count() <= 8 * g.node_count());
    }

    #[test]
    fn empty_node_set_is_resolution_error() {
        let err = build_graph(&DomainSpec::unit_ball(2), 3.0, Neighborhood::Radius2).unwrap_err();
        assert!(matches!(err, Error::Resolution(_)));
    }

    #[test]
    fn ball_radial_distance_matches_log_formula() {
        let g = build_graph(&DomainSpec::unit_ball(2), 0.01, Neighborhood::Radius2).unwrap();
        let d = g
            .qh_distance(&Vector::zeros(2), &Vector::new(vec![0.9, 0.0]))
            .unwrap();
        let exact = 10.0_f64.ln();
        assert!((d - exact).abs() / exact < 0.02, "got {d}, exact {exact}");
        // lower-bound sanity: any path pays at least the radial integral
        assert!(d >= exact - 1e-9);
    }

    #[test]
    fn half_space_vertical_distance() {
        let hs = DomainSpec::half_space(Vector::basis(2, 1), 0.0).unwrap();
        let g = build_graph(&hs, 0.05, Neighborhood::Radius2).unwrap();
        let a = Vector::new(vec![0.0, 1.0]);
        let b = Vector::new(vec![0.0, std::f64::consts::E]);
        let d = g.qh_distance(&a, &b).unwrap();
        assert!((d - 1.0).abs() < 0.02, "got {d}, exact 1");
    }

    #[test]
    fn distance_is_symmetric_and_triangular() {
        // triples snapped onto graph nodes: node-to-node distances are
        // exact path sums, so the triangle inequality holds to 1e-9
        let h = 0.05;
        let g = build_graph(&DomainSpec::unit_ball(2), h, Neighborhood::Radius2).unwrap();
        let plan = SamplingPlan::uniform(2000, 3).with_max_radius(0.8);
        let snap = |p: &Vector| {
            Vector::new(vec![(p[0] / h).round() * h, (p[1] / h).round() * h])
        };
        let pts = plan.points(2, 87);
        let mut tested = 0;
        for tri in pts.chunks(3) {
            if tri.len() < 3 || tested >= 500 {
                break;
            }
            let (a, b, c) = (snap(&tri[0]), snap(&tri[1]), snap(&tri[2]));
            if a == b || b == c || a == c {
                continue;
            }
            let ab = g.qh_distance(&a, &b).unwrap();
            let ba = g.qh_distance(&b, &a).unwrap();
            assert_eq!(ab, ba, "graph distances must be exactly symmetric");
            let bc = g.qh_distance(&b, &c).unwrap();
            let ac = g.qh_distance(&a, &c).unwrap();
            assert!(ac <= ab + bc + 1e-9);
            tested += 1;
        }
        assert!(tested >= 500, "only {tested} triples tested");
    }

    #[test]
    fn path_export_is_a_connected_polyline_paying_the_distance() {
        let g = build_graph(&DomainSpec::unit_ball(2), 0.02, Neighborhood::Radius2).unwrap();
        let x = Vector::zeros(2);
        let y = Vector::new(vec![0.9, 0.0]);
        let (d, path) = g.qh_path(&x, &y).unwrap();
        assert_eq!(path.first().unwrap(), &x);
        assert_eq!(path.last().unwrap(), &y);
        // hops bounded by the neighborhood reach
        let mut paid = 0.0;
        for w in path.windows(2) {
            let hop = w[0].dist(&w[1]);
            assert!(hop <= 2.0 * 0.02 * 2f64.sqrt() + 1e-12, "hop {hop}");
            let da = g.domain().boundary_distance(&w[0]).unwrap();
            let db = g.domain().boundary_distance(&w[1]).unwrap();
            paid += hop * 0.5 * (1.0 / da + 1.0 / db);
        }
        assert!((paid - d).abs() < 1e-9, "polyline pays {paid}, distance {d}");
    }

    #[test]
    fn identical_points_give_zero() {
        let g = build_graph(&DomainSpec::unit_ball(2), 0.05, Neighborhood::Radius2).unwrap();
        let x = Vector::new(vec![0.3, 0.1]);
        assert_eq!(g.qh_distance(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn near_boundary_query_rejected() {
        let g = build_graph(&DomainSpec::unit_ball(2), 0.05, Neighborhood::Radius2).unwrap();
        let err = g
            .qh_distance(&Vector::zeros(2), &Vector::new(vec![0.97, 0.0]))
            .unwrap_err();
        assert!(matches!(err, Error::Resolution(_)));
    }

    #[test]
    fn radius1_fast_mode_works_but_is_coarser() {
        let exact = 10.0_f64.ln();
        let g1 = build_graph(&DomainSpec::unit_ball(2), 0.02, Neighborhood::Radius1).unwrap();
        let g2 = build_graph(&DomainSpec::unit_ball(2), 0.02, Neighborhood::Radius2).unwrap();
        let zero = Vector::zeros(2);
        let target = Vector::new(vec![0.9, 0.0]);
        let d1 = g1.qh_distance(&zero, &target).unwrap();
        let d2 = g2.qh_distance(&zero, &target).unwrap();
        // on the axis both are accurate; off-axis radius-1 quantizes worse
        assert!((d1 - exact).abs() / exact < 0.05);
        assert!((d2 - exact).abs() / exact < 0.02);
        let off = Vector::new(vec![0.5, 0.62]);
        let o1 = g1.qh_distance(&zero, &off).unwrap();
        let o2 = g2.qh_distance(&zero, &off).unwrap();
        // both overestimate; the radius-2 estimate is tighter
        assert!(o2 <= o1 + 1e-12, "radius-2 should not be coarser: {o2} vs {o1}");
    }

    #[test]
    fn halving_h_reduces_radial_error() {
        let exact = 10.0_f64.ln();
        let mut errors = Vec::new();
        for h in [0.02, 0.01] {
            let g = build_graph(&DomainSpec::unit_ball(2), h, Neighborhood::Radius2).unwrap();
            let d = g
                .qh_distance(&Vector::zeros(2), &Vector::new(vec![0.9, 0.0]))
                .unwrap();
            errors.push((d - exact).abs());
        }
        assert!(
            errors[1] <= errors[0] * 1.1,
            "halving h did not reduce the error: {errors:?}"
        );
    }

    #[test]
    fn identity_bilipschitz_ratios_are_one() {
        let g = build_graph(&DomainSpec::unit_ball(2), 0.02, Neighborhood::Radius2).unwrap();
        let id = HarmonicMap::identity(2);
        let plan = SamplingPlan::uniform(16, 5).with_max_radius(0.9);
        let scan = qh_bilipschitz_scan(&id, &g, &g, &plan).unwrap();
        for p in &scan.pairs {
            assert_eq!(p.ratio, 1.0, "identity ratios are exactly 1");
        }
        assert_eq!(scan.m_hat, 1.0);
    }

    #[test]
    fn linear_map_bilipschitz_scan() {
        let src = build_graph(&DomainSpec::unit_ball(3), 0.1, Neighborhood::Radius2).unwrap();
        let tgt = build_graph(
            &DomainSpec::ellipsoid(vec![2.0, 1.0, 1.0]),
            0.1,
            Neighborhood::Radius2,
        )
        .unwrap();
        let lin = HarmonicMap::linear(&SmallMatrix::diag(&[2.0, -1.0, -1.0])).unwrap();
        let plan = SamplingPlan::uniform(16, 7).with_max_radius(0.85);
        let scan = qh_bilipschitz_scan(&lin, &src, &tgt, &plan).unwrap();
        assert!(scan.m_hat.is_finite());
        assert!(scan.m_hat >= 1.0);
        for p in &scan.pairs {
            assert!(p.ratio >= 1.0 / scan.m_hat - 1e-12);
            assert!(p.ratio <= scan.m_hat + 1e-12);
        }
    }

    #[test]
    fn gehring_osgood_identity_constant_is_one() {
        let g = build_graph(&DomainSpec::unit_ball(2), 0.02, Neighborhood::Radius2).unwrap();
        let id = HarmonicMap::identity(2);
        let plan = SamplingPlan::uniform(16, 5).with_max_radius(0.9);
        let rep = gehring_osgood_check(&id, &g, &g, &plan, 1.0).unwrap();
        assert_close(rep.alpha, 1.0, 1e-15);
        assert_close(rep.c_emp, 1.0, 1e-9);
    }
}
