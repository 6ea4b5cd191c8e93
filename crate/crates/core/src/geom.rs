//! Planar domains with slits and uniform-norm geometric primitives.
//!
//! Coordinates are expected to be dyadic rationals (exactly representable in
//! binary64); all predicates below then evaluate exactly for axis-aligned and
//! 45-degree boundary features, which is what the shipped fixtures use.  For
//! general inputs the same code runs in plain f64.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A point in the plane. Norms: `norm_inf` is the uniform norm used for all
/// distances in this crate, `norm_l2` the Euclidean one.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, t: f64) -> Point {
        Point::new(self.x * t, self.y * t)
    }

    /// `self + t * (to - self)`.
    pub fn lerp(self, to: Point, t: f64) -> Point {
        Point::new(self.x + t * (to.x - self.x), self.y + t * (to.y - self.y))
    }

    pub fn norm_inf(self) -> f64 {
        self.x.abs().max(self.y.abs())
    }

    pub fn norm_l2(self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn dist_inf(self, o: Point) -> f64 {
        self.sub(o).norm_inf()
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Lexicographic order: x first, then y. Used for deterministic
    /// tie-breaking among uniform-norm nearest points.
    pub fn lex_le(self, o: Point) -> bool {
        self.x < o.x || (self.x == o.x && self.y <= o.y)
    }

    pub fn finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Axis-aligned closed cube (square): a ball of radius `half_side` in the
/// uniform norm. Its diameter is `2 * half_side`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub center: Point,
    pub half_side: f64,
}

impl Cube {
    pub fn new(center: Point, half_side: f64) -> Self {
        assert!(half_side > 0.0, "cube half_side must be positive");
        Cube { center, half_side }
    }

    pub fn diam(&self) -> f64 {
        2.0 * self.half_side
    }

    /// Dilation about the center: `dilate(Q, l) = Q(c_Q, l * r_Q)`.
    pub fn dilate(&self, factor: f64) -> Cube {
        assert!(factor > 0.0, "dilation factor must be positive");
        Cube::new(self.center, self.half_side * factor)
    }

    pub fn lo(&self) -> Point {
        Point::new(self.center.x - self.half_side, self.center.y - self.half_side)
    }

    pub fn hi(&self) -> Point {
        Point::new(self.center.x + self.half_side, self.center.y + self.half_side)
    }

    pub fn contains_point(&self, p: Point) -> bool {
        p.dist_inf(self.center) <= self.half_side
    }

    pub fn intersects(&self, o: &Cube) -> bool {
        self.center.dist_inf(o.center) <= self.half_side + o.half_side
    }

    pub fn corners(&self) -> [Point; 4] {
        let (lo, hi) = (self.lo(), self.hi());
        [lo, Point::new(hi.x, lo.y), hi, Point::new(lo.x, hi.y)]
    }

    pub fn area(&self) -> f64 {
        let s = 2.0 * self.half_side;
        s * s
    }
}

/// A closed boundary segment together with which ring or slit it came from.
#[derive(Copy, Clone, Debug)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Self {
        Segment { a, b }
    }

    pub fn len_inf(&self) -> f64 {
        self.a.dist_inf(self.b)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureOwner {
    Outer { edge: usize },
    Hole { ring: usize, edge: usize },
    Slit { slit: usize, seg: usize },
}

#[derive(Copy, Clone, Debug)]
pub struct Feature {
    pub seg: Segment,
    pub owner: FeatureOwner,
}

/// A point on the boundary plus the index of the feature segment carrying it
/// (lowest index when the point lies on several features, e.g. at a vertex).
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub point: Point,
    pub carrier: usize,
}

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("outer ring needs at least 3 vertices, got {0}")]
    OuterTooSmall(usize),
    #[error("ring {ring} has a degenerate edge at index {edge}")]
    DegenerateEdge { ring: String, edge: usize },
    #[error("non-simple ring: {ring} self-intersects at edge {edge}")]
    NonSimpleRing { ring: String, edge: usize },
    #[error("hole {0} is not strictly inside the outer ring")]
    HoleOutside(usize),
    #[error("holes {0} and {1} are not disjoint")]
    HolesOverlap(usize, usize),
    #[error("slit {slit} leaves the closed region at segment {seg}")]
    SlitOutside { slit: usize, seg: usize },
    #[error("slit {slit} segment {seg} crosses a ring or another slit interior")]
    SlitCrosses { slit: usize, seg: usize },
    #[error("non-finite coordinate in {0}")]
    NonFinite(String),
    #[error("domain is empty or disconnected")]
    Disconnected,
    #[error("point outside the domain")]
    OutsideDomain,
    #[error("cube not inside the domain")]
    CubeOutside,
    #[error("point is not on the boundary")]
    NotOnBoundary,
}

/// An open planar region: interior of `outer`, minus closed holes, minus
/// slits (zero-width two-sided obstacles).
#[derive(Clone, Debug)]
pub struct PolygonalDomain {
    outer: Vec<Point>,
    holes: Vec<Vec<Point>>,
    slits: Vec<Vec<Point>>,
    features: Vec<Feature>,
    bbox: (Point, Point),
    area: f64,
}

impl PolygonalDomain {
    /// Validates and builds the domain. The outer ring is normalized to
    /// counterclockwise orientation, holes to clockwise.
    pub fn new(
        outer: Vec<Point>,
        holes: Vec<Vec<Point>>,
        slits: Vec<Vec<Point>>,
    ) -> Result<Self, DomainError> {
        if outer.len() < 3 {
            return Err(DomainError::OuterTooSmall(outer.len()));
        }
        for (name, ring) in std::iter::once(("outer".to_string(), &outer))
            .chain(holes.iter().enumerate().map(|(i, r)| (format!("hole {i}"), r)))
        {
            for p in ring {
                if !p.finite() {
                    return Err(DomainError::NonFinite(name.clone()));
                }
            }
        }
        for (i, s) in slits.iter().enumerate() {
            for p in s {
                if !p.finite() {
                    return Err(DomainError::NonFinite(format!("slit {i}")));
                }
            }
        }

        let mut outer = outer;
        if ring_area(&outer) < 0.0 {
            outer.reverse();
        }
        let mut holes = holes;
        for h in holes.iter_mut() {
            if ring_area(h) > 0.0 {
                h.reverse();
            }
        }

        check_ring_simple(&outer, "outer")?;
        for (i, h) in holes.iter().enumerate() {
            if h.len() < 3 {
                return Err(DomainError::OuterTooSmall(h.len()));
            }
            check_ring_simple(h, &format!("hole {i}"))?;
        }

        let mut dom = PolygonalDomain {
            outer,
            holes,
            slits,
            features: Vec::new(),
            bbox: (Point::new(0.0, 0.0), Point::new(0.0, 0.0)),
            area: 0.0,
        };
        dom.rebuild_features();
        dom.validate_topology()?;
        Ok(dom)
    }

    fn rebuild_features(&mut self) {
        let mut features = Vec::new();
        let n = self.outer.len();
        for e in 0..n {
            features.push(Feature {
                seg: Segment::new(self.outer[e], self.outer[(e + 1) % n]),
                owner: FeatureOwner::Outer { edge: e },
            });
        }
        for (ri, ring) in self.holes.iter().enumerate() {
            let m = ring.len();
            for e in 0..m {
                features.push(Feature {
                    seg: Segment::new(ring[e], ring[(e + 1) % m]),
                    owner: FeatureOwner::Hole { ring: ri, edge: e },
                });
            }
        }
        for (si, slit) in self.slits.iter().enumerate() {
            for e in 0..slit.len().saturating_sub(1) {
                features.push(Feature {
                    seg: Segment::new(slit[e], slit[e + 1]),
                    owner: FeatureOwner::Slit { slit: si, seg: e },
                });
            }
        }
        self.features = features;

        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.outer {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        self.bbox = (lo, hi);
        self.area = ring_area(&self.outer) - self.holes.iter().map(|h| -ring_area(h)).sum::<f64>();
    }

    fn validate_topology(&self) -> Result<(), DomainError> {
        // Holes strictly inside the outer ring and pairwise disjoint.
        for (i, h) in self.holes.iter().enumerate() {
            for p in h {
                if !point_strictly_in_ring(&self.outer, *p) {
                    return Err(DomainError::HoleOutside(i));
                }
            }
            for (j, h2) in self.holes.iter().enumerate().skip(i + 1) {
                for e1 in ring_edges(h) {
                    for e2 in ring_edges(h2) {
                        if segments_intersect(e1.a, e1.b, e2.a, e2.b) {
                            return Err(DomainError::HolesOverlap(i, j));
                        }
                    }
                }
                if point_strictly_in_ring(h, h2[0]) || point_strictly_in_ring(h2, h[0]) {
                    return Err(DomainError::HolesOverlap(i, j));
                }
            }
        }
        // Slit points stay in the closed region; slit interiors keep off the
        // rings and off each other (shared endpoints are fine).
        for (si, slit) in self.slits.iter().enumerate() {
            if slit.len() < 2 {
                return Err(DomainError::SlitOutside { slit: si, seg: 0 });
            }
            for (e, w) in slit.windows(2).enumerate() {
                let seg = Segment::new(w[0], w[1]);
                if seg.len_inf() == 0.0 {
                    return Err(DomainError::DegenerateEdge { ring: format!("slit {si}"), edge: e });
                }
                for p in [seg.a, seg.b, seg.a.lerp(seg.b, 0.5)] {
                    let inside = point_strictly_in_ring(&self.outer, p)
                        || ring_boundary_contains(&self.outer, p);
                    if !inside {
                        return Err(DomainError::SlitOutside { slit: si, seg: e });
                    }
                    for h in &self.holes {
                        if point_strictly_in_ring(h, p) {
                            return Err(DomainError::SlitOutside { slit: si, seg: e });
                        }
                    }
                }
                for f in &self.features {
                    let same_slit = matches!(f.owner, FeatureOwner::Slit { slit, .. } if slit == si);
                    if same_slit {
                        continue;
                    }
                    if let Some(p) = transversal_conflict(seg.a, seg.b, f.seg.a, f.seg.b) {
                        // Touching at a slit endpoint is allowed (slits may be
                        // attached to rings or to each other at their ends).
                        if p != seg.a && p != seg.b {
                            return Err(DomainError::SlitCrosses { slit: si, seg: e });
                        }
                    }
                }
            }
        }
        // Nonempty, path-connected interior: probe on a coarse grid and
        // flood-fill with exact segment tests. Heuristic for exotic inputs,
        // exact for the fixture family.
        self.check_connected()
    }

    fn check_connected(&self) -> Result<(), DomainError> {
        let (lo, hi) = self.bbox;
        // Power-of-two resolution keeps cell centers off dyadic feature lines.
        let n = 128usize;
        let sx = (hi.x - lo.x) / n as f64;
        let sy = (hi.y - lo.y) / n as f64;
        if sx <= 0.0 || sy <= 0.0 {
            return Err(DomainError::Disconnected);
        }
        let mut ids = vec![usize::MAX; n * n];
        let mut pts = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let p = Point::new(lo.x + (i as f64 + 0.5) * sx, lo.y + (j as f64 + 0.5) * sy);
                if self.contains(p) {
                    ids[j * n + i] = pts.len();
                    pts.push((i, j, p));
                }
            }
        }
        if pts.is_empty() {
            return Err(DomainError::Disconnected);
        }
        let mut comp = vec![usize::MAX; pts.len()];
        let mut stack = vec![0usize];
        comp[0] = 0;
        while let Some(k) = stack.pop() {
            let (i, j, p) = pts[k];
            let mut neigh = Vec::with_capacity(4);
            if i > 0 {
                neigh.push(ids[j * n + i - 1]);
            }
            if i + 1 < n {
                neigh.push(ids[j * n + i + 1]);
            }
            if j > 0 {
                neigh.push(ids[(j - 1) * n + i]);
            }
            if j + 1 < n {
                neigh.push(ids[(j + 1) * n + i]);
            }
            for id in neigh {
                if id != usize::MAX && comp[id] == usize::MAX && self.segment_in_domain(p, pts[id].2)
                {
                    comp[id] = 0;
                    stack.push(id);
                }
            }
        }
        if comp.iter().any(|&c| c == usize::MAX) {
            return Err(DomainError::Disconnected);
        }
        Ok(())
    }

    pub fn outer(&self) -> &[Point] {
        &self.outer
    }

    pub fn holes(&self) -> &[Vec<Point>] {
        &self.holes
    }

    pub fn slits(&self) -> &[Vec<Point>] {
        &self.slits
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn bbox(&self) -> (Point, Point) {
        self.bbox
    }

    /// Area of the open region (slits have measure zero).
    pub fn area(&self) -> f64 {
        self.area
    }

    /// True iff `p` lies in the open region: strictly inside the outer ring,
    /// strictly outside every closed hole, and not on any slit.
    pub fn contains(&self, p: Point) -> bool {
        if self.on_boundary(p).is_some() {
            return false;
        }
        if !point_strictly_in_ring(&self.outer, p) {
            return false;
        }
        for h in &self.holes {
            if point_strictly_in_ring(h, p) {
                return false;
            }
        }
        true
    }

    /// Lowest feature index whose closed segment carries `p`, if any.
    pub fn on_boundary(&self, p: Point) -> Option<usize> {
        self.features
            .iter()
            .position(|f| on_segment(f.seg.a, f.seg.b, p))
    }

    /// Uniform-norm distance from an interior point to the boundary.
    pub fn dist_to_boundary(&self, p: Point) -> Result<f64, DomainError> {
        if !self.contains(p) {
            return Err(DomainError::OutsideDomain);
        }
        Ok(self.dist_point_features(p))
    }

    fn dist_point_features(&self, p: Point) -> f64 {
        let mut d = f64::INFINITY;
        for f in &self.features {
            d = d.min(seg_box_dist_inf(f.seg.a, f.seg.b, p, p));
        }
        d
    }

    /// The boundary point nearest to `p` in the uniform norm; among all
    /// minimizers the lexicographically smallest one (x first, then y).
    pub fn nearest_boundary_point(&self, p: Point) -> Result<BoundarySample, DomainError> {
        let d = self.dist_to_boundary(p)?;
        let lo = Point::new(p.x - d, p.y - d);
        let hi = Point::new(p.x + d, p.y + d);
        let mut best: Option<(Point, usize)> = None;
        for (fi, f) in self.features.iter().enumerate() {
            if seg_box_dist_inf(f.seg.a, f.seg.b, p, p) > d {
                continue;
            }
            // The minimizer set on this feature is its clip to the closed
            // distance-d box; its lex-min is an endpoint of the clip.
            if let Some((a, b)) = clip_segment_to_box(f.seg.a, f.seg.b, lo, hi) {
                for q in [a, b] {
                    match best {
                        None => best = Some((q, fi)),
                        Some((bq, _)) if q.lex_le(bq) && q != bq => best = Some((q, fi)),
                        _ => {}
                    }
                }
            }
        }
        let (point, carrier) = best.expect("distance attained on some feature");
        // Report the lowest carrier holding the winning point.
        let carrier = self
            .features
            .iter()
            .position(|f| on_segment(f.seg.a, f.seg.b, point))
            .unwrap_or(carrier);
        Ok(BoundarySample { point, carrier })
    }

    /// Uniform-norm distance from a closed cube inside the domain to the
    /// boundary. Zero when the cube touches the boundary.
    pub fn cube_dist_to_boundary(&self, q: &Cube) -> Result<f64, DomainError> {
        let d = self.dist_cube_features(q);
        if d > 0.0 {
            // No boundary point in the cube: it lies entirely on one side.
            if self.contains(q.center) {
                Ok(d)
            } else {
                Err(DomainError::CubeOutside)
            }
        } else {
            // Boundary touches the closed cube; it must not enter the interior.
            let eps_ok = !self.features.iter().any(|f| {
                segment_meets_open_box(f.seg.a, f.seg.b, q.lo(), q.hi())
            });
            if eps_ok && self.contains(q.center) {
                Ok(0.0)
            } else {
                Err(DomainError::CubeOutside)
            }
        }
    }

    pub(crate) fn dist_cube_features(&self, q: &Cube) -> f64 {
        let (lo, hi) = (q.lo(), q.hi());
        let mut d = f64::INFINITY;
        for f in &self.features {
            d = d.min(seg_box_dist_inf(f.seg.a, f.seg.b, lo, hi));
        }
        d
    }

    /// True iff the closed segment `[a, b]` lies in the open region.
    pub fn segment_in_domain(&self, a: Point, b: Point) -> bool {
        if !self.contains(a) || !self.contains(b) {
            return false;
        }
        !self
            .features
            .iter()
            .any(|f| segments_intersect(a, b, f.seg.a, f.seg.b))
    }
}

fn ring_edges(ring: &[Point]) -> impl Iterator<Item = Segment> + '_ {
    (0..ring.len()).map(move |i| Segment::new(ring[i], ring[(i + 1) % ring.len()]))
}

fn check_ring_simple(ring: &[Point], name: &str) -> Result<(), DomainError> {
    let n = ring.len();
    for i in 0..n {
        let e1 = Segment::new(ring[i], ring[(i + 1) % n]);
        if e1.len_inf() == 0.0 {
            return Err(DomainError::DegenerateEdge { ring: name.to_string(), edge: i });
        }
        for j in i + 1..n {
            let e2 = Segment::new(ring[j], ring[(j + 1) % n]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // Consecutive edges share exactly the common vertex.
                if let Some(p) = transversal_conflict(e1.a, e1.b, e2.a, e2.b) {
                    let shared = if j == i + 1 { e1.b } else { e1.a };
                    if p != shared {
                        return Err(DomainError::NonSimpleRing { ring: name.to_string(), edge: j });
                    }
                } else if segments_intersect(e1.a, e1.b, e2.a, e2.b)
                    && collinear_overlap_positive(e1, e2)
                {
                    return Err(DomainError::NonSimpleRing { ring: name.to_string(), edge: j });
                }
            } else if segments_intersect(e1.a, e1.b, e2.a, e2.b) {
                return Err(DomainError::NonSimpleRing { ring: name.to_string(), edge: j });
            }
        }
    }
    Ok(())
}

fn collinear_overlap_positive(e1: Segment, e2: Segment) -> bool {
    orient(e1.a, e1.b, e2.a) == 0.0 && orient(e1.a, e1.b, e2.b) == 0.0 && {
        let d = e1.b.sub(e1.a);
        let t = |p: Point| p.sub(e1.a).dot(d);
        let (s0, s1) = (t(e2.a).min(t(e2.b)), t(e2.a).max(t(e2.b)));
        s1.min(d.dot(d)) - s0.max(0.0) > 0.0
    }
}

/// Signed area cross product of `(b - a)` and `(c - a)`.
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// True iff `p` lies on the closed segment `[a, b]`.
pub fn on_segment(a: Point, b: Point, p: Point) -> bool {
    orient(a, b, p) == 0.0
        && p.x >= a.x.min(b.x)
        && p.x <= a.x.max(b.x)
        && p.y >= a.y.min(b.y)
        && p.y <= a.y.max(b.y)
}

/// Closed segment intersection test (shared endpoints count).
pub fn segments_intersect(p1: Point, p2: Point, p3: Point, p4: Point) -> bool {
    let d1 = orient(p3, p4, p1);
    let d2 = orient(p3, p4, p2);
    let d3 = orient(p1, p2, p3);
    let d4 = orient(p1, p2, p4);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(p3, p4, p1))
        || (d2 == 0.0 && on_segment(p3, p4, p2))
        || (d3 == 0.0 && on_segment(p1, p2, p3))
        || (d4 == 0.0 && on_segment(p1, p2, p4))
}

/// If the two segments meet in exactly one point, returns it; returns `None`
/// both when they are disjoint and when they overlap along a segment.
pub fn transversal_conflict(p1: Point, p2: Point, p3: Point, p4: Point) -> Option<Point> {
    if !segments_intersect(p1, p2, p3, p4) {
        return None;
    }
    let collinear = orient(p1, p2, p3) == 0.0 && orient(p1, p2, p4) == 0.0;
    if collinear {
        let overlap = collinear_overlap_positive(Segment::new(p1, p2), Segment::new(p3, p4));
        if overlap {
            return None;
        }
        // Single shared point of collinear segments.
        for q in [p3, p4] {
            if on_segment(p1, p2, q) {
                return Some(q);
            }
        }
        for q in [p1, p2] {
            if on_segment(p3, p4, q) {
                return Some(q);
            }
        }
        return None;
    }
    // Endpoint touches first (exact for dyadic data).
    for q in [p1, p2] {
        if on_segment(p3, p4, q) {
            return Some(q);
        }
    }
    for q in [p3, p4] {
        if on_segment(p1, p2, q) {
            return Some(q);
        }
    }
    let d = p2.sub(p1);
    let e = p4.sub(p3);
    let denom = d.cross(e);
    let t = p3.sub(p1).cross(e) / denom;
    Some(Point::new(p1.x + t * d.x, p1.y + t * d.y))
}

/// Strict point-in-ring test by crossing parity; points on the ring return
/// false. Exact for dyadic coordinates.
pub fn point_strictly_in_ring(ring: &[Point], p: Point) -> bool {
    let n = ring.len();
    for i in 0..n {
        if on_segment(ring[i], ring[(i + 1) % n], p) {
            return false;
        }
    }
    let mut inside = false;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        // Half-open rule on the y-span avoids double counting at vertices.
        if (a.y > p.y) != (b.y > p.y) {
            let side = orient(a, b, p);
            if b.y > a.y {
                if side > 0.0 {
                    inside = !inside;
                }
            } else if side < 0.0 {
                inside = !inside;
            }
        }
    }
    inside
}

fn ring_boundary_contains(ring: &[Point], p: Point) -> bool {
    let n = ring.len();
    (0..n).any(|i| on_segment(ring[i], ring[(i + 1) % n], p))
}

/// Positive part of the uniform-norm gap between a box and a point of the
/// segment at parameter t, split per axis.
fn axis_gap(v: f64, lo: f64, hi: f64) -> f64 {
    (lo - v).max(v - hi).max(0.0)
}

/// Uniform-norm distance between the closed segment `[a, b]` and the closed
/// axis-aligned box `[lo, hi]` (degenerate boxes are points). The minimum of
/// the convex piecewise-linear gap function is attained at an endpoint, a
/// kink, or a crossing of linear pieces; all candidates are enumerated.
pub fn seg_box_dist_inf(a: Point, b: Point, lo: Point, hi: Point) -> f64 {
    let d = b.sub(a);
    let mut ts = vec![0.0, 1.0];
    let mut push = |t: f64| {
        if t.is_finite() && t > 0.0 && t < 1.0 {
            ts.push(t);
        }
    };
    // Kinks: segment coordinate meets a box face.
    if d.x != 0.0 {
        push((lo.x - a.x) / d.x);
        push((hi.x - a.x) / d.x);
    }
    if d.y != 0.0 {
        push((lo.y - a.y) / d.y);
        push((hi.y - a.y) / d.y);
    }
    // Crossings of x-pieces with y-pieces: (sx*(x(t)-cx)) = (sy*(y(t)-cy)).
    for (sx, cx) in [(1.0, hi.x), (-1.0, lo.x)] {
        for (sy, cy) in [(1.0, hi.y), (-1.0, lo.y)] {
            let denom = sx * d.x - sy * d.y;
            if denom != 0.0 {
                push((sy * (a.y - cy) - sx * (a.x - cx)) / denom);
            }
        }
    }
    let mut best = f64::INFINITY;
    for &t in &ts {
        let p = a.lerp(b, t);
        let g = axis_gap(p.x, lo.x, hi.x).max(axis_gap(p.y, lo.y, hi.y));
        if g < best {
            best = g;
        }
    }
    best
}

/// Clips a segment to a closed box. Clip coordinates are computed directly
/// from the governing face so that axis-aligned and 45-degree segments stay
/// exact in dyadic arithmetic.
pub fn clip_segment_to_box(a: Point, b: Point, lo: Point, hi: Point) -> Option<(Point, Point)> {
    let d = b.sub(a);
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for (p, q) in [
        (-d.x, a.x - lo.x),
        (d.x, hi.x - a.x),
        (-d.y, a.y - lo.y),
        (d.y, hi.y - a.y),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                if r > t1 {
                    return None;
                }
                if r > t0 {
                    t0 = r;
                }
            } else {
                if r < t0 {
                    return None;
                }
                if r < t1 {
                    t1 = r;
                }
            }
        }
    }
    if t0 > t1 {
        return None;
    }
    Some((eval_clip_point(a, b, d, t0, lo, hi), eval_clip_point(a, b, d, t1, lo, hi)))
}

/// Point at clip parameter `t`, recomputed exactly for special slopes.
fn eval_clip_point(a: Point, b: Point, d: Point, t: f64, lo: Point, hi: Point) -> Point {
    if t == 0.0 {
        return a;
    }
    if t == 1.0 {
        return b;
    }
    let p = a.lerp(b, t);
    // Snap to the governing face; for |dx| == |dy| recompute the free
    // coordinate from the snapped one (both exact for dyadic inputs).
    let snap = |v: f64, lo: f64, hi: f64| {
        if (v - lo).abs() <= (v - hi).abs() && (v - lo).abs() < 1e-12 * (1.0 + hi.abs()) {
            lo
        } else if (v - hi).abs() < 1e-12 * (1.0 + hi.abs()) {
            hi
        } else {
            v
        }
    };
    let mut x = snap(p.x, lo.x, hi.x);
    let mut y = snap(p.y, lo.y, hi.y);
    if d.x != 0.0 && d.y != 0.0 && d.x.abs() == d.y.abs() {
        // 45-degree segment: derive the non-snapped coordinate exactly.
        if x == lo.x || x == hi.x {
            y = a.y + (x - a.x) * (d.y / d.x);
        } else if y == lo.y || y == hi.y {
            x = a.x + (y - a.y) * (d.x / d.y);
        }
    } else if d.x == 0.0 {
        x = a.x;
    } else if d.y == 0.0 {
        y = a.y;
    }
    Point::new(x, y)
}

/// True iff the segment has a point strictly inside the open box.
pub fn segment_meets_open_box(a: Point, b: Point, lo: Point, hi: Point) -> bool {
    match clip_segment_to_box(a, b, lo, hi) {
        None => false,
        Some((p, q)) => {
            let mid = p.lerp(q, 0.5);
            mid.x > lo.x && mid.x < hi.x && mid.y > lo.y && mid.y < hi.y
        }
    }
}

fn ring_area(ring: &[Point]) -> f64 {
    let n = ring.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        s += a.cross(b);
    }
    s / 2.0
}
