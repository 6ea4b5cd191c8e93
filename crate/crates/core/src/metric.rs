//! Intrinsic (geodesic) metric of a slitted polygonal domain and its
//! completion at the boundary.
//!
//! Geodesics between interior points bend only at boundary vertices, so the
//! metric is computed exactly on a visibility graph. Because a path may slide
//! along either side of a slit and may round a vertex only inside one angular
//! sector, every boundary vertex is split into one graph node per sector of
//! approach; joining two path segments at a vertex is allowed only when both
//! arrive within a common sector.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{on_segment, orient, BoundarySample, Point, PolygonalDomain};

const TAU: f64 = std::f64::consts::TAU;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("point outside the domain")]
    OutsideDomain,
    #[error("point is not on the boundary")]
    NotOnBoundary,
    #[error("no convergence of the completed distance (suspected inaccessible approach)")]
    NoConvergence,
    #[error("points are not joined by any rectifiable path")]
    Disconnected,
}

/// A polyline realizing the intrinsic distance. Interior vertices are
/// boundary vertices of the domain; the two endpoints may lie on the boundary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeodesicPath {
    pub vertices: Vec<Point>,
    pub length: f64,
}

/// One element of the split boundary: a boundary anchor plus an approach,
/// identified by the angular sector at the anchor that contains interior
/// points arbitrarily close to it. `witness` is an interior point with
/// `(anchor, witness]` contained in the domain.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SplitElement {
    pub anchor: BoundarySample,
    pub witness: Point,
    /// Angular interval `[start, end)` going counterclockwise; `end` may
    /// exceed `start` by up to a full turn.
    pub sector: (f64, f64),
    /// Rank of this sector among the interior sectors at the anchor.
    pub sector_id: usize,
}

impl SplitElement {
    /// Stable identity of the element: anchor coordinates plus sector rank.
    pub fn key(&self) -> ElementKey {
        ElementKey {
            x_bits: self.anchor.point.x.to_bits(),
            y_bits: self.anchor.point.y.to_bits(),
            sector_id: self.sector_id,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementKey {
    pub x_bits: u64,
    pub y_bits: u64,
    pub sector_id: usize,
}

impl ElementKey {
    pub fn anchor(&self) -> Point {
        Point::new(f64::from_bits(self.x_bits), f64::from_bits(self.y_bits))
    }

    /// The textual form used in data files: `x,y,sector`.
    pub fn to_string_key(&self) -> String {
        format!("{},{},{}", self.anchor().x, self.anchor().y, self.sector_id)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AccessStatus {
    Accessible,
    SuspectedInaccessible,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AccessReport {
    pub sample: BoundarySample,
    pub status: AccessStatus,
    pub bound_used: f64,
    /// Geodesic length of the best probe path found (infinite when none).
    pub best_length: f64,
}

/// The local picture of the boundary at a point: directions of incident
/// feature segments and the interior angular sectors between them.
#[derive(Clone, Debug)]
pub struct BoundaryStar {
    pub point: Point,
    pub carrier: usize,
    /// Sorted, deduplicated angles of incident feature directions.
    pub incident: Vec<f64>,
    /// Interior sectors, counterclockwise, each with a midpoint witness.
    pub sectors: Vec<SplitElement>,
}

fn angles_close(a: f64, b: f64) -> bool {
    let mut d = (a - b).rem_euclid(TAU);
    if d > TAU / 2.0 {
        d = TAU - d;
    }
    d < 1e-9
}

/// Counterclockwise angular distance from `a` to `b` in `(0, TAU]`.
fn ccw_gap(a: f64, b: f64) -> f64 {
    let mut d = (b - a).rem_euclid(TAU);
    if d == 0.0 {
        d = TAU;
    }
    d
}

/// Analyzes the boundary at `p`: incident directions, interior sectors and
/// per-sector witnesses. Returns an error when `p` is not a boundary point.
pub fn boundary_star(domain: &PolygonalDomain, p: Point) -> Result<BoundaryStar, MetricError> {
    let mut carrier = None;
    let mut dirs: Vec<f64> = Vec::new();
    let mut incident_len = f64::INFINITY;
    for (fi, f) in domain.features().iter().enumerate() {
        let (a, b) = (f.seg.a, f.seg.b);
        if !on_segment(a, b, p) {
            continue;
        }
        carrier.get_or_insert(fi);
        if p == a {
            dirs.push(b.sub(p).angle());
            incident_len = incident_len.min(b.sub(p).norm_inf());
        } else if p == b {
            dirs.push(a.sub(p).angle());
            incident_len = incident_len.min(a.sub(p).norm_inf());
        } else {
            dirs.push(b.sub(p).angle());
            dirs.push(a.sub(p).angle());
            incident_len = incident_len
                .min(b.sub(p).norm_inf())
                .min(a.sub(p).norm_inf());
        }
    }
    let carrier = carrier.ok_or(MetricError::NotOnBoundary)?;

    dirs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut uniq: Vec<f64> = Vec::new();
    for d in dirs {
        if !uniq.iter().any(|&u| angles_close(u, d)) {
            uniq.push(d);
        }
    }

    // Clearance to non-incident geometry bounds the witness radius.
    let mut clearance = f64::INFINITY;
    for f in domain.features() {
        if on_segment(f.seg.a, f.seg.b, p) {
            continue;
        }
        clearance = clearance.min(crate::geom::seg_box_dist_inf(f.seg.a, f.seg.b, p, p));
    }
    let rho = (0.01f64).min(clearance / 2.0).min(incident_len / 2.0);

    let mut sectors = Vec::new();
    let m = uniq.len();
    for j in 0..m {
        let start = uniq[j];
        let gap = ccw_gap(start, uniq[(j + 1) % m]);
        let mid = start + gap / 2.0;
        let witness = Point::new(p.x + rho * mid.cos(), p.y + rho * mid.sin());
        if domain.contains(witness) {
            sectors.push(SplitElement {
                anchor: BoundarySample { point: p, carrier },
                witness,
                sector: (start, start + gap),
                sector_id: 0, // assigned below
            });
        }
    }
    for (id, s) in sectors.iter_mut().enumerate() {
        s.sector_id = id;
    }
    Ok(BoundaryStar { point: p, carrier, incident: uniq, sectors })
}

/// The split-boundary elements over a boundary point: one per interior sector.
pub fn split_elements_at(
    domain: &PolygonalDomain,
    b: Point,
) -> Result<Vec<SplitElement>, MetricError> {
    Ok(boundary_star(domain, b)?.sectors)
}

/// The element at `anchor` whose sector contains the ray direction `dir`.
/// When the direction lies exactly on a sector border, the sector starting at
/// the border wins (counterclockwise-first rule).
pub fn element_toward(
    domain: &PolygonalDomain,
    anchor: Point,
    dir: Point,
) -> Result<SplitElement, MetricError> {
    let star = boundary_star(domain, anchor)?;
    let theta = dir.angle();
    // Counterclockwise-first: prefer the sector whose start matches theta.
    for s in &star.sectors {
        if angles_close(s.sector.0, theta) {
            return Ok(s.clone());
        }
    }
    for s in &star.sectors {
        let off = ccw_gap(s.sector.0, theta);
        let width = s.sector.1 - s.sector.0;
        if off < width && !angles_close(theta, s.sector.0 + width) {
            return Ok(s.clone());
        }
    }
    // Full-circle star (isolated tip) has a single sector.
    if star.sectors.len() == 1 {
        return Ok(star.sectors[0].clone());
    }
    Err(MetricError::NotOnBoundary)
}

/// Node of the sector-split visibility graph.
#[derive(Copy, Clone, Debug)]
struct VisNode {
    vertex: usize,
    #[allow(dead_code)]
    sector: usize,
}

/// Precomputed geodesic engine for one domain. Construction is exact for
/// polygonal data; queries are pure and the structure is immutable.
pub struct IntrinsicMetric<'d> {
    domain: &'d PolygonalDomain,
    vertices: Vec<Point>,
    stars: Vec<BoundaryStar>,
    nodes: Vec<VisNode>,
    node_of: Vec<Vec<usize>>, // vertex -> node ids per sector
    adj: Vec<Vec<(usize, f64)>>,
    apsp: Vec<Vec<f64>>,
}

#[derive(Copy, Clone, PartialEq)]
struct HeapItem {
    cost: f64,
    node: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'d> IntrinsicMetric<'d> {
    pub fn new(domain: &'d PolygonalDomain) -> Self {
        // Distinct feature endpoints.
        let mut vertices: Vec<Point> = Vec::new();
        for f in domain.features() {
            for p in [f.seg.a, f.seg.b] {
                if !vertices.contains(&p) {
                    vertices.push(p);
                }
            }
        }
        let stars: Vec<BoundaryStar> = vertices
            .iter()
            .map(|&v| boundary_star(domain, v).expect("feature endpoint is on the boundary"))
            .collect();

        let mut nodes = Vec::new();
        let mut node_of = vec![Vec::new(); vertices.len()];
        for (vi, star) in stars.iter().enumerate() {
            for si in 0..star.sectors.len() {
                node_of[vi].push(nodes.len());
                nodes.push(VisNode { vertex: vi, sector: si });
            }
        }

        let mut metric = IntrinsicMetric {
            domain,
            vertices,
            stars,
            nodes,
            node_of,
            adj: Vec::new(),
            apsp: Vec::new(),
        };
        metric.build_edges();
        metric.build_apsp();
        metric
    }

    fn build_edges(&mut self) {
        let n = self.nodes.len();
        let mut adj = vec![Vec::new(); n];
        for i in 0..self.vertices.len() {
            for j in i + 1..self.vertices.len() {
                let (u, v) = (self.vertices[i], self.vertices[j]);
                if !self.segment_admissible(u, v) {
                    continue;
                }
                let w = u.dist_inf(v);
                let si = self.arrival_sectors(i, v);
                let sj = self.arrival_sectors(j, u);
                for &a in &si {
                    for &b in &sj {
                        adj[self.node_of[i][a]].push((self.node_of[j][b], w));
                        adj[self.node_of[j][b]].push((self.node_of[i][a], w));
                    }
                }
            }
        }
        self.adj = adj;
    }

    fn build_apsp(&mut self) {
        let n = self.nodes.len();
        let mut apsp = Vec::with_capacity(n);
        for s in 0..n {
            apsp.push(self.dijkstra(s));
        }
        // Canonical symmetric table.
        for i in 0..n {
            for j in i + 1..n {
                let m = apsp[i][j].min(apsp[j][i]);
                apsp[i][j] = m;
                apsp[j][i] = m;
            }
            apsp[i][i] = 0.0;
        }
        self.apsp = apsp;
    }

    fn dijkstra(&self, start: usize) -> Vec<f64> {
        let n = self.nodes.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut heap = BinaryHeap::new();
        dist[start] = 0.0;
        heap.push(HeapItem { cost: 0.0, node: start });
        while let Some(HeapItem { cost, node }) = heap.pop() {
            if cost > dist[node] {
                continue;
            }
            for &(next, w) in &self.adj[node] {
                let c = cost + w;
                if c < dist[next] {
                    dist[next] = c;
                    heap.push(HeapItem { cost: c, node: next });
                }
            }
        }
        dist
    }

    /// A segment is admissible for geodesics when a curve in the open region
    /// can follow it arbitrarily closely: no transversal crossing of a
    /// feature, no passage through the exterior; running flush along features
    /// and touching the boundary at the segment endpoints are fine.
    fn segment_admissible(&self, u: Point, v: Point) -> bool {
        if u == v {
            return false;
        }
        let mut events: Vec<f64> = vec![0.0, 1.0];
        for f in self.domain.features() {
            let (a, b) = (f.seg.a, f.seg.b);
            if !crate::geom::segments_intersect(u, v, a, b) {
                continue;
            }
            let collinear = orient(u, v, a) == 0.0 && orient(u, v, b) == 0.0;
            if collinear {
                // Overlap interval endpoints become events.
                for q in [a, b] {
                    if on_segment(u, v, q) {
                        events.push(param_on_segment(u, v, q));
                    }
                }
                continue;
            }
            match crate::geom::transversal_conflict(u, v, a, b) {
                Some(p) if p == u || p == v => {
                    // Boundary touch at our endpoint: allowed.
                }
                _ => {
                    // A feature meets the open segment in a single point:
                    // crossing or T-touch, both block this edge (paths bend
                    // at vertices instead).
                    return false;
                }
            }
        }
        events.sort_by(|a, b| a.partial_cmp(b).unwrap());
        events.dedup();
        for w in events.windows(2) {
            if w[1] - w[0] <= 0.0 {
                continue;
            }
            let mid = u.lerp(v, (w[0] + w[1]) / 2.0);
            if !self.domain.contains(mid) && self.domain.on_boundary(mid).is_none() {
                return false;
            }
        }
        true
    }

    /// Sector ids at vertex `vi` compatible with arriving from `toward`.
    fn arrival_sectors(&self, vi: usize, toward: Point) -> Vec<usize> {
        let star = &self.stars[vi];
        let theta = toward.sub(self.vertices[vi]).angle();
        // Exactly along an incident feature: both flanking interior sectors.
        if star.incident.iter().any(|&d| angles_close(d, theta)) {
            let mut out = Vec::new();
            for (si, s) in star.sectors.iter().enumerate() {
                if angles_close(s.sector.0, theta) || angles_close(s.sector.1, theta) {
                    out.push(si);
                }
            }
            return out;
        }
        for (si, s) in star.sectors.iter().enumerate() {
            let off = ccw_gap(s.sector.0, theta);
            if off < s.sector.1 - s.sector.0 {
                return vec![si];
            }
        }
        Vec::new()
    }

    /// Entry edges from an arbitrary point (interior, or on the boundary) to
    /// the static nodes.
    fn entries(&self, p: Point) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for (vi, &v) in self.vertices.iter().enumerate() {
            if p == v {
                for &nid in &self.node_of[vi] {
                    out.push((nid, 0.0));
                }
                continue;
            }
            if !self.segment_admissible(p, v) {
                continue;
            }
            let w = p.dist_inf(v);
            for &si in &self.arrival_sectors(vi, p) {
                out.push((self.node_of[vi][si], w));
            }
        }
        out
    }

    /// The intrinsic distance between two points of the open region.
    pub fn distance(&self, x: Point, y: Point) -> Result<f64, MetricError> {
        if !self.domain.contains(x) || !self.domain.contains(y) {
            return Err(MetricError::OutsideDomain);
        }
        Ok(self.distance_unchecked(x, y))
    }

    /// Distance allowing endpoints on the boundary (used by probes and
    /// accessibility scans); the value is the infimum over interior curves.
    pub fn distance_unchecked(&self, x: Point, y: Point) -> f64 {
        if x == y {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        if self.segment_admissible(x, y) {
            best = x.dist_inf(y);
        }
        let ex = self.entries(x);
        let ey = self.entries(y);
        for &(a, sa) in &ex {
            for &(b, sb) in &ey {
                let m = self.apsp[a][b];
                if m.is_finite() {
                    // Canonical summation order keeps the value symmetric.
                    let (p, q) = if sa <= sb { (sa, sb) } else { (sb, sa) };
                    let cand = (p + q) + m;
                    if cand < best {
                        best = cand;
                    }
                }
            }
        }
        best
    }

    /// A shortest polyline realizing [`Self::distance`]; its interior
    /// vertices are boundary vertices of the domain.
    pub fn path(&self, x: Point, y: Point) -> Result<GeodesicPath, MetricError> {
        if !self.domain.contains(x) || !self.domain.contains(y) {
            return Err(MetricError::OutsideDomain);
        }
        if x == y {
            return Ok(GeodesicPath { vertices: vec![x, y], length: 0.0 });
        }
        // Temporary graph: static nodes plus the two query points.
        let n = self.nodes.len();
        let (sx, sy) = (n, n + 1);
        let mut adj: Vec<Vec<(usize, f64)>> = self.adj.to_vec();
        adj.push(Vec::new());
        adj.push(Vec::new());
        for (node, w) in self.entries(x) {
            adj[sx].push((node, w));
            adj[node].push((sx, w));
        }
        for (node, w) in self.entries(y) {
            adj[sy].push((node, w));
            adj[node].push((sy, w));
        }
        if self.segment_admissible(x, y) {
            let w = x.dist_inf(y);
            adj[sx].push((sy, w));
            adj[sy].push((sx, w));
        }
        let mut dist = vec![f64::INFINITY; n + 2];
        let mut prev = vec![usize::MAX; n + 2];
        let mut heap = BinaryHeap::new();
        dist[sx] = 0.0;
        heap.push(HeapItem { cost: 0.0, node: sx });
        while let Some(HeapItem { cost, node }) = heap.pop() {
            if cost > dist[node] {
                continue;
            }
            for &(next, w) in &adj[node] {
                let c = cost + w;
                if c < dist[next] {
                    dist[next] = c;
                    prev[next] = node;
                    heap.push(HeapItem { cost: c, node: next });
                }
            }
        }
        if !dist[sy].is_finite() {
            return Err(MetricError::Disconnected);
        }
        let mut chain = Vec::new();
        let mut cur = sy;
        while cur != usize::MAX {
            chain.push(cur);
            if cur == sx {
                break;
            }
            cur = prev[cur];
        }
        chain.reverse();
        let mut vertices = Vec::new();
        for id in chain {
            let p = if id == sx {
                x
            } else if id == sy {
                y
            } else {
                self.vertices[self.nodes[id].vertex]
            };
            if vertices.last() != Some(&p) {
                vertices.push(p);
            }
        }
        if vertices.len() == 1 {
            vertices.push(y);
        }
        let length: f64 = vertices.windows(2).map(|w| w[0].dist_inf(w[1])).sum();
        Ok(GeodesicPath { vertices, length })
    }

    pub fn domain(&self) -> &PolygonalDomain {
        self.domain
    }

    /// Limit of `d(x_i, y_i)` along the two witness rays with `t = 2^-i`,
    /// `i = 4..max_i`; stops once successive values differ by less than
    /// `tol`.  The result is capped by the triangle-inequality bound through
    /// every evaluated pair.
    pub fn completed_distance(
        &self,
        a: &SplitElement,
        b: &SplitElement,
    ) -> Result<f64, MetricError> {
        self.completed_distance_opt(a, b, 1e-6, 48)
    }

    pub fn completed_distance_opt(
        &self,
        a: &SplitElement,
        b: &SplitElement,
        tol: f64,
        max_i: u32,
    ) -> Result<f64, MetricError> {
        if a.anchor.point == b.anchor.point && a.sector_id == b.sector_id {
            return Ok(0.0);
        }
        let ra = a.witness.sub(a.anchor.point);
        let rb = b.witness.sub(b.anchor.point);
        let mut last = f64::INFINITY;
        let mut cap = f64::INFINITY;
        let mut converged = false;
        for i in 4..=max_i {
            let t = (0.5f64).powi(i as i32);
            let x = a.anchor.point.add(ra.scale(t));
            let y = b.anchor.point.add(rb.scale(t));
            let d = self.distance_unchecked(x, y);
            if !d.is_finite() {
                return Err(MetricError::NoConvergence);
            }
            // Each ray tail has length at most t * |witness - anchor|.
            cap = cap.min(d + t * (ra.norm_inf() + rb.norm_inf()));
            if (d - last).abs() < tol {
                last = d;
                converged = true;
                break;
            }
            last = d;
        }
        if !converged {
            return Err(MetricError::NoConvergence);
        }
        Ok(last.min(cap))
    }

    /// Equivalence of split elements: same anchor and vanishing completed
    /// distance (within `tol`, default 1e-4).
    pub fn element_equiv(
        &self,
        a: &SplitElement,
        b: &SplitElement,
        tol: f64,
    ) -> Result<bool, MetricError> {
        if a.anchor.point != b.anchor.point {
            return Ok(false);
        }
        Ok(self.completed_distance(a, b)? < tol)
    }

    /// Marks each boundary sample accessible when some probe point reaches it
    /// by a geodesic of length at most `bound`. Finite polygonal domains are
    /// always accessible, so failures only flag under-resolved or comb-like
    /// geometry relative to the bound.
    pub fn accessibility_scan(
        &self,
        probes: &[Point],
        samples: &[BoundarySample],
        bound: f64,
    ) -> Vec<AccessReport> {
        samples
            .iter()
            .map(|s| {
                let mut best = f64::INFINITY;
                for &p in probes {
                    if self.domain.contains(p) {
                        best = best.min(self.distance_unchecked(p, s.point));
                    }
                }
                AccessReport {
                    sample: *s,
                    status: if best <= bound {
                        AccessStatus::Accessible
                    } else {
                        AccessStatus::SuspectedInaccessible
                    },
                    bound_used: bound,
                    best_length: best,
                }
            })
            .collect()
    }
}

fn param_on_segment(a: Point, b: Point, p: Point) -> f64 {
    let d = b.sub(a);
    if d.x.abs() >= d.y.abs() {
        (p.x - a.x) / d.x
    } else {
        (p.y - a.y) / d.y
    }
}

/// Evenly spaced boundary samples (arc-length in the uniform norm, feature by
/// feature), used by scans and report tooling.
pub fn boundary_samples(domain: &PolygonalDomain, count: usize) -> Vec<BoundarySample> {
    let total: f64 = domain.features().iter().map(|f| f.seg.len_inf()).sum();
    let mut out = Vec::with_capacity(count);
    if count == 0 || total <= 0.0 {
        return out;
    }
    let step = total / count as f64;
    let mut acc = step / 2.0;
    let mut walked = 0.0;
    for (fi, f) in domain.features().iter().enumerate() {
        let len = f.seg.len_inf();
        while acc < walked + len && out.len() < count {
            let t = (acc - walked) / len;
            out.push(BoundarySample { point: f.seg.a.lerp(f.seg.b, t), carrier: fi });
            acc += step;
        }
        walked += len;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn convex_distance_is_norm() {
        let sq = fixtures::unit_square();
        let m = IntrinsicMetric::new(&sq);
        let d = m.distance(Point::new(0.1, 0.1), Point::new(0.9, 0.9)).unwrap();
        assert_eq!(d, 0.8);
        assert_eq!(m.distance(Point::new(0.3, 0.4), Point::new(0.3, 0.4)).unwrap(), 0.0);
    }

    #[test]
    fn slit_detour() {
        let slit = fixtures::slit_square();
        let m = IntrinsicMetric::new(&slit);
        let d = m.distance(Point::new(0.0, 0.1), Point::new(0.0, -0.1)).unwrap();
        assert_eq!(d, 1.0);
        // Clears the slit end.
        let d = m.distance(Point::new(0.6, 0.1), Point::new(0.6, -0.1)).unwrap();
        assert_eq!(d, 0.2);
    }

    #[test]
    fn geodesic_path_shapes() {
        let slit = fixtures::slit_square();
        let m = IntrinsicMetric::new(&slit);
        let p = m.path(Point::new(0.0, 0.1), Point::new(0.0, -0.1)).unwrap();
        assert_eq!(p.vertices.len(), 3);
        let bend = p.vertices[1];
        assert!(bend == Point::new(0.5, 0.0) || bend == Point::new(-0.5, 0.0));
        let d = m.distance(Point::new(0.0, 0.1), Point::new(0.0, -0.1)).unwrap();
        assert_eq!(p.length, d);

        let p = m.path(Point::new(0.6, 0.1), Point::new(0.6, -0.1)).unwrap();
        assert_eq!(p.vertices.len(), 2);
    }

    #[test]
    fn split_counts() {
        let slit = fixtures::slit_square();
        assert_eq!(split_elements_at(&slit, Point::new(0.0, 0.0)).unwrap().len(), 2);
        assert_eq!(split_elements_at(&slit, Point::new(0.5, 0.0)).unwrap().len(), 1);
        assert_eq!(split_elements_at(&slit, Point::new(-0.5, 0.0)).unwrap().len(), 1);
        let sq = fixtures::unit_square();
        assert_eq!(split_elements_at(&sq, Point::new(1.0, 1.0)).unwrap().len(), 1);
        assert_eq!(split_elements_at(&sq, Point::new(0.5, 0.0)).unwrap().len(), 1);
        let hub = fixtures::hub();
        assert_eq!(split_elements_at(&hub, Point::new(0.0, 0.0)).unwrap().len(), 6);
        assert!(matches!(
            split_elements_at(&sq, Point::new(0.5, 0.5)),
            Err(MetricError::NotOnBoundary)
        ));
    }

    #[test]
    fn completed_distance_slit() {
        let slit = fixtures::slit_square();
        let m = IntrinsicMetric::new(&slit);
        let elems = split_elements_at(&slit, Point::new(0.0, 0.0)).unwrap();
        assert_eq!(elems.len(), 2);
        let d = m.completed_distance(&elems[0], &elems[1]).unwrap();
        assert!((d - 1.0).abs() < 1e-3, "top/bottom completed distance {d}");
        assert_eq!(m.completed_distance(&elems[0], &elems[0]).unwrap(), 0.0);
    }

    #[test]
    fn completed_distance_convex_edge() {
        let sq = fixtures::unit_square();
        let m = IntrinsicMetric::new(&sq);
        let a = &split_elements_at(&sq, Point::new(0.0, 0.5)).unwrap()[0];
        let b = &split_elements_at(&sq, Point::new(0.0, 0.7)).unwrap()[0];
        let d = m.completed_distance(a, b).unwrap();
        assert!((d - 0.2).abs() < 1e-6, "got {d}");
    }

    #[test]
    fn element_equiv_cases() {
        let slit = fixtures::slit_square();
        let m = IntrinsicMetric::new(&slit);
        let elems = split_elements_at(&slit, Point::new(0.0, 0.0)).unwrap();
        // Same sector, different witness.
        let mut other = elems[0].clone();
        other.witness = Point::new(0.001, 0.002);
        assert!(m.element_equiv(&elems[0], &other, 1e-4).unwrap());
        assert!(!m.element_equiv(&elems[0], &elems[1], 1e-4).unwrap());
        let tip = &split_elements_at(&slit, Point::new(0.5, 0.0)).unwrap()[0];
        assert!(!m.element_equiv(&elems[0], tip, 1e-4).unwrap());
    }

    #[test]
    fn tip_approaches_agglutinate() {
        // Above and below witnesses at a slit tip belong to the same element:
        // their completed distance vanishes in the limit.
        let slit = fixtures::slit_square();
        let m = IntrinsicMetric::new(&slit);
        let tip = Point::new(0.5, 0.0);
        let star = boundary_star(&slit, tip).unwrap();
        assert_eq!(star.sectors.len(), 1);
        let mut above = star.sectors[0].clone();
        above.witness = Point::new(0.5, 0.01);
        let mut below = star.sectors[0].clone();
        below.witness = Point::new(0.5, -0.01);
        let d = m.completed_distance(&above, &below).unwrap();
        assert!(d < 1e-3, "tip approaches should agglutinate, d = {d}");
    }

    #[test]
    fn metric_axioms_sampled() {
        let slit = fixtures::slit_square();
        let m = IntrinsicMetric::new(&slit);
        let pts = [
            Point::new(0.0, 0.125),
            Point::new(0.0, -0.125),
            Point::new(0.75, 0.0),
            Point::new(-0.75, 0.25),
            Point::new(0.25, -0.625),
        ];
        for &x in &pts {
            for &y in &pts {
                let dxy = m.distance(x, y).unwrap();
                let dyx = m.distance(y, x).unwrap();
                assert_eq!(dxy, dyx, "symmetry at {x:?},{y:?}");
                assert!(x.dist_inf(y) <= dxy + 1e-12, "lower bound");
                for &z in &pts {
                    let dxz = m.distance(x, z).unwrap();
                    let dzy = m.distance(z, y).unwrap();
                    assert!(dxy <= dxz + dzy + 1e-12, "triangle");
                }
            }
        }
    }

    #[test]
    fn comb_paths_grow() {
        let comb = fixtures::comb(6);
        let m = IntrinsicMetric::new(&comb);
        // From the right cell to successively deeper cells: each extra tooth
        // forces a climb to y = 3/4 and back.
        let right = Point::new(0.75, 0.125);
        let d1 = m.distance(right, Point::new(0.375, 0.125)).unwrap();
        let d2 = m.distance(right, Point::new(0.09375, 0.125)).unwrap();
        let d3 = m.distance(right, Point::new(0.0234375, 0.125)).unwrap();
        assert!(d1 < d2 && d2 < d3, "{d1} {d2} {d3}");
        assert!(d3 > 2.0, "deep cells need long detours, got {d3}");
    }

    #[test]
    fn accessibility_reports() {
        let comb = fixtures::comb(6);
        let m = IntrinsicMetric::new(&comb);
        let probes = [Point::new(0.75, 0.125)];
        let deep = BoundarySample { point: Point::new(0.021484375, 0.0), carrier: 0 };
        let near = BoundarySample { point: Point::new(0.75, 0.0), carrier: 0 };
        let reports = m.accessibility_scan(&probes, &[deep, near], 1.0);
        assert_eq!(reports[0].status, AccessStatus::SuspectedInaccessible);
        assert_eq!(reports[1].status, AccessStatus::Accessible);
        let reports = m.accessibility_scan(&probes, &[deep], 100.0);
        assert_eq!(reports[0].status, AccessStatus::Accessible);
        assert!(m.accessibility_scan(&probes, &[], 1.0).is_empty());
    }

    #[test]
    fn boundary_samples_even() {
        let sq = fixtures::unit_square();
        let s = boundary_samples(&sq, 16);
        assert_eq!(s.len(), 16);
        for b in &s {
            assert!(sq.on_boundary(b.point).is_some());
        }
    }
}
