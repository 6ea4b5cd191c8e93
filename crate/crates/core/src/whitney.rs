//! Whitney cube families of a planar domain.
//!
//! Cubes are dyadic children of a power-of-two root square, so all sizes and
//! positions are exact in binary64 and every size inequality below is checked
//! with zero tolerance. The standard family keeps cubes with
//! `diam Q <= dist(Q, boundary) <= 4 diam Q`; subdividing each standard cube
//! into 16 quarters yields the refined family with `4 diam <= dist <= 20 diam`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{BoundarySample, Cube, Point, PolygonalDomain};
use crate::metric::{element_toward, MetricError, SplitElement};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    Standard,
    Refined,
}

#[derive(Debug, Error)]
pub enum WhitneyError {
    #[error("depth limit {0} outside the supported range 1..=24")]
    BadDepth(u32),
    #[error("domain too thin for depth limit: skirt fraction {got:.4} exceeds {limit:.4}")]
    TooThin { got: f64, limit: f64 },
    #[error("cube index {0} out of range")]
    BadIndex(usize),
    #[error("refine requires the standard flavor")]
    NotStandard,
    #[error("cube {0} is isolated (no intersecting partner)")]
    Isolated(usize),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// One cube of the family with its exact grid address and boundary distance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WhitneyCube {
    pub cube: Cube,
    pub depth: u32,
    pub ix: i64,
    pub iy: i64,
    /// Uniform-norm distance from the closed cube to the boundary.
    pub dist: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct DecompositionStats {
    pub covering_multiplicity: usize,
    pub min_depth: u32,
    pub max_depth: u32,
    pub max_neighbors: usize,
    pub covered_area: f64,
    pub skirt_area: f64,
}

#[derive(Clone, Debug)]
pub struct WhitneyDecomposition {
    pub flavor: Flavor,
    pub root: Cube,
    pub cubes: Vec<WhitneyCube>,
    /// For each cube, the sorted indices of all cubes whose closed cubes
    /// intersect it, itself included.
    pub adjacency: Vec<Vec<usize>>,
    pub stats: DecompositionStats,
    /// Per-depth lookup from grid address to cube index.
    index: HashMap<(u32, i64, i64), usize>,
}

/// Per-cube boundary anchors: the nearest boundary point to the center and
/// the split element reached along the ray from it toward the center.
#[derive(Clone, Debug)]
pub struct Anchors {
    pub samples: Vec<BoundarySample>,
    pub elements: Vec<SplitElement>,
}

/// Smallest power-of-two half-side covering the bounding box, centered on it.
pub fn root_cube(domain: &PolygonalDomain) -> Cube {
    let (lo, hi) = domain.bbox();
    let cx = (lo.x + hi.x) / 2.0;
    let cy = (lo.y + hi.y) / 2.0;
    let half = ((hi.x - lo.x) / 2.0).max((hi.y - lo.y) / 2.0);
    let mut h = 1.0f64;
    while h < half {
        h *= 2.0;
    }
    while h / 2.0 >= half {
        h /= 2.0;
    }
    Cube::new(Point::new(cx, cy), h)
}

pub fn whitney_decompose(
    domain: &PolygonalDomain,
    depth_limit: u32,
) -> Result<WhitneyDecomposition, WhitneyError> {
    whitney_decompose_opt(domain, depth_limit, None)
}

/// `max_skirt_fraction`, when set, turns an oversized uncovered skirt into a
/// hard error (fraction of the domain area).
pub fn whitney_decompose_opt(
    domain: &PolygonalDomain,
    depth_limit: u32,
    max_skirt_fraction: Option<f64>,
) -> Result<WhitneyDecomposition, WhitneyError> {
    if !(1..=24).contains(&depth_limit) {
        return Err(WhitneyError::BadDepth(depth_limit));
    }
    let root = root_cube(domain);
    let mut cubes = Vec::new();
    let mut skirt_area = 0.0f64;

    // Iterative DFS in a fixed child order keeps indices deterministic.
    let mut stack = vec![(0u32, 0i64, 0i64)];
    while let Some((depth, ix, iy)) = stack.pop() {
        let half = root.half_side / (1u64 << depth) as f64;
        let center = Point::new(
            root.center.x - root.half_side + (2 * ix + 1) as f64 * half,
            root.center.y - root.half_side + (2 * iy + 1) as f64 * half,
        );
        let cube = Cube::new(center, half);
        let dist = domain.dist_cube_features(&cube);
        let diam = cube.diam();
        if dist >= diam {
            // No boundary point in or near the cube: it lies on one side.
            if domain.contains(center) {
                cubes.push(WhitneyCube { cube, depth, ix, iy, dist });
            }
            continue;
        }
        if depth == depth_limit {
            if touches_domain(domain, &cube) {
                skirt_area += cube.area();
            }
            continue;
        }
        // Push in reverse so children pop in (0,0), (1,0), (0,1), (1,1) order.
        for (dx, dy) in [(1, 1), (0, 1), (1, 0), (0, 0)] {
            stack.push((depth + 1, 2 * ix + dx, 2 * iy + dy));
        }
    }

    if let Some(limit) = max_skirt_fraction {
        let frac = skirt_area / domain.area();
        if frac > limit {
            return Err(WhitneyError::TooThin { got: frac, limit });
        }
    }

    let mut dec = WhitneyDecomposition {
        flavor: Flavor::Standard,
        root,
        cubes,
        adjacency: Vec::new(),
        stats: DecompositionStats::default(),
        index: HashMap::new(),
    };
    dec.finish(skirt_area);
    Ok(dec)
}

fn touches_domain(domain: &PolygonalDomain, cube: &Cube) -> bool {
    // A depth-limit cell near the boundary: check a few interior spots.
    let c = cube.center;
    let h = cube.half_side / 2.0;
    [
        c,
        Point::new(c.x - h, c.y - h),
        Point::new(c.x + h, c.y - h),
        Point::new(c.x - h, c.y + h),
        Point::new(c.x + h, c.y + h),
    ]
    .into_iter()
    .any(|p| domain.contains(p))
}

impl WhitneyDecomposition {
    fn finish(&mut self, skirt_area: f64) {
        self.index = self
            .cubes
            .iter()
            .enumerate()
            .map(|(i, c)| ((c.depth, c.ix, c.iy), i))
            .collect();
        self.build_adjacency();
        let covered: f64 = self.cubes.iter().map(|c| c.cube.area()).sum();
        let max_neighbors = self.adjacency.iter().map(Vec::len).max().unwrap_or(0);
        let (mut min_d, mut max_d) = (u32::MAX, 0);
        for c in &self.cubes {
            min_d = min_d.min(c.depth);
            max_d = max_d.max(c.depth);
        }
        self.stats = DecompositionStats {
            covering_multiplicity: self.compute_multiplicity(),
            min_depth: if self.cubes.is_empty() { 0 } else { min_d },
            max_depth: max_d,
            max_neighbors,
            covered_area: covered,
            skirt_area,
        };
    }

    /// Closed-cube intersection via exact integer spans at the finest depth.
    fn build_adjacency(&mut self) {
        let n = self.cubes.len();
        let max_depth = self.cubes.iter().map(|c| c.depth).max().unwrap_or(0);
        let mut adjacency = vec![Vec::new(); n];
        let mut depths: Vec<u32> = self.cubes.iter().map(|c| c.depth).collect();
        depths.sort_unstable();
        depths.dedup();
        for i in 0..n {
            let a = self.cubes[i].clone();
            // Look up coarser-or-equal cells around a's closed span; finer
            // partners find a when they run this loop themselves.
            for &d in depths.iter().filter(|&&d| d <= a.depth) {
                let shift = a.depth - d;
                let lo_x = a.ix >> shift;
                let hi_x = (a.ix + 1) >> shift;
                let lo_y = a.iy >> shift;
                let hi_y = (a.iy + 1) >> shift;
                for jx in lo_x - 1..=hi_x + 1 {
                    for jy in lo_y - 1..=hi_y + 1 {
                        if let Some(&j) = self.index.get(&(d, jx, jy)) {
                            if j == i {
                                continue;
                            }
                            if spans_touch(&a, &self.cubes[j], max_depth) {
                                adjacency[i].push(j);
                                adjacency[j].push(i);
                            }
                        }
                    }
                }
            }
        }
        for (i, list) in adjacency.iter_mut().enumerate() {
            list.push(i);
            list.sort_unstable();
            list.dedup();
        }
        self.adjacency = adjacency;
    }

    /// All cubes intersecting cube `k`, itself included.
    pub fn neighbors(&self, k: usize) -> Result<&[usize], WhitneyError> {
        self.adjacency
            .get(k)
            .map(|v| v.as_slice())
            .ok_or(WhitneyError::BadIndex(k))
    }

    /// Subdivides every cube into 16 quarter-side children.
    pub fn refine_4n(&self, domain: &PolygonalDomain) -> Result<WhitneyDecomposition, WhitneyError> {
        if self.flavor != Flavor::Standard {
            return Err(WhitneyError::NotStandard);
        }
        let mut cubes = Vec::with_capacity(self.cubes.len() * 16);
        for c in &self.cubes {
            for dy in 0..4i64 {
                for dx in 0..4i64 {
                    let depth = c.depth + 2;
                    let (ix, iy) = (4 * c.ix + dx, 4 * c.iy + dy);
                    let half = c.cube.half_side / 4.0;
                    let center = Point::new(
                        c.cube.center.x - c.cube.half_side + (2 * dx + 1) as f64 * half,
                        c.cube.center.y - c.cube.half_side + (2 * dy + 1) as f64 * half,
                    );
                    let cube = Cube::new(center, half);
                    let dist = domain.dist_cube_features(&cube);
                    cubes.push(WhitneyCube { cube, depth, ix, iy, dist });
                }
            }
        }
        let mut dec = WhitneyDecomposition {
            flavor: Flavor::Refined,
            root: self.root,
            cubes,
            adjacency: Vec::new(),
            stats: DecompositionStats::default(),
            index: HashMap::new(),
        };
        dec.finish(self.stats.skirt_area);
        Ok(dec)
    }

    /// Nearest boundary point and split element for every cube center.
    pub fn anchors(&self, domain: &PolygonalDomain) -> Result<Anchors, WhitneyError> {
        let mut samples = Vec::with_capacity(self.cubes.len());
        let mut elements = Vec::with_capacity(self.cubes.len());
        for c in &self.cubes {
            let s = domain
                .nearest_boundary_point(c.cube.center)
                .map_err(WhitneyError::from_domain)?;
            let dir = c.cube.center.sub(s.point);
            let mut elem = element_toward(domain, s.point, dir)?;
            // The ray witness of the element is the cube center itself.
            elem.witness = c.cube.center;
            samples.push(s);
            elements.push(elem);
        }
        Ok(Anchors { samples, elements })
    }

    /// Maximum number of dilated cubes `(9/8)Q` covering any sample point
    /// (cube corners and centers), computed exactly.
    fn compute_multiplicity(&self) -> usize {
        let mut best = 0usize;
        for (i, c) in self.cubes.iter().enumerate() {
            let mut pts = c.cube.corners().to_vec();
            pts.push(c.cube.center);
            for p in pts {
                let mut count = 0;
                // Dilations only reach r/8 beyond a cube, so covering cubes
                // are adjacent to the cube owning the sample point.
                for &j in &self.adjacency[i] {
                    let q = &self.cubes[j].cube;
                    if p.dist_inf(q.center) <= q.half_side * 1.125 {
                        count += 1;
                    }
                }
                if count > best {
                    best = count;
                }
            }
        }
        best
    }

    pub fn covering_multiplicity(&self) -> usize {
        self.stats.covering_multiplicity
    }

    pub fn cube_at(&self, depth: u32, ix: i64, iy: i64) -> Option<usize> {
        self.index.get(&(depth, ix, iy)).copied()
    }

    fn present_depths(&self) -> Vec<u32> {
        let mut depths: Vec<u32> = self.cubes.iter().map(|c| c.depth).collect();
        depths.sort_unstable();
        depths.dedup();
        depths
    }

    /// Lowest-index cube whose closed cube contains `p`.
    pub fn containing_cube(&self, p: Point) -> Option<usize> {
        let mut found: Option<usize> = None;
        for d in self.present_depths() {
            let side = self.root.half_side * 2.0 / (1u64 << d) as f64;
            let tx = ((p.x - (self.root.center.x - self.root.half_side)) / side).floor() as i64;
            let ty = ((p.y - (self.root.center.y - self.root.half_side)) / side).floor() as i64;
            for jx in tx - 1..=tx {
                for jy in ty - 1..=ty {
                    if let Some(&j) = self.index.get(&(d, jx, jy)) {
                        if self.cubes[j].cube.contains_point(p) && found.map_or(true, |f| j < f) {
                            found = Some(j);
                        }
                    }
                }
            }
        }
        found
    }

    /// Indices of cubes whose dilation `(9/8)Q` contains `p`, sorted.
    pub fn active_cubes(&self, p: Point) -> Vec<usize> {
        let mut out = Vec::new();
        for d in self.present_depths() {
            let side = self.root.half_side * 2.0 / (1u64 << d) as f64;
            let tx = ((p.x - (self.root.center.x - self.root.half_side)) / side).floor() as i64;
            let ty = ((p.y - (self.root.center.y - self.root.half_side)) / side).floor() as i64;
            for jx in tx - 2..=tx + 1 {
                for jy in ty - 2..=ty + 1 {
                    if let Some(&j) = self.index.get(&(d, jx, jy)) {
                        let q = &self.cubes[j].cube;
                        if p.dist_inf(q.center) <= q.half_side * 1.125 {
                            out.push(j);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

impl WhitneyError {
    fn from_domain(_: crate::geom::DomainError) -> Self {
        WhitneyError::Metric(MetricError::OutsideDomain)
    }
}

fn spans_touch(a: &WhitneyCube, b: &WhitneyCube, max_depth: u32) -> bool {
    let (alx, ahx) = span(a.ix, a.depth, max_depth);
    let (aly, ahy) = span(a.iy, a.depth, max_depth);
    let (blx, bhx) = span(b.ix, b.depth, max_depth);
    let (bly, bhy) = span(b.iy, b.depth, max_depth);
    alx <= bhx && blx <= ahx && aly <= bhy && bly <= ahy
}

fn span(i: i64, depth: u32, max_depth: u32) -> (i64, i64) {
    let shift = max_depth - depth;
    (i << shift, (i + 1) << shift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn unit_square_invariants_exact() {
        let sq = fixtures::unit_square();
        let dec = whitney_decompose(&sq, 6).unwrap();
        assert!(!dec.cubes.is_empty());
        for c in &dec.cubes {
            let diam = c.cube.diam();
            assert!(diam <= c.dist, "lower Whitney bound");
            assert!(c.dist <= 4.0 * diam, "upper Whitney bound");
            assert_eq!(sq.cube_dist_to_boundary(&c.cube).unwrap(), c.dist);
        }
    }

    #[test]
    fn central_block_neighbors() {
        // The innermost cubes of the unit square form a uniform 4x4 block;
        // its interior cubes see 8 partners plus themselves.
        let sq = fixtures::unit_square();
        let dec = whitney_decompose(&sq, 6).unwrap();
        let mut nine = 0;
        for (i, c) in dec.cubes.iter().enumerate() {
            if c.cube.half_side == 0.0625 && dec.adjacency[i].len() == 9 {
                nine += 1;
            }
        }
        assert!(nine >= 4, "expected interior lattice cubes with 9 neighbors");
    }

    #[test]
    fn neighbor_size_ratio() {
        let slit = fixtures::slit_square();
        let dec = whitney_decompose(&slit, 7).unwrap();
        for (i, adj) in dec.adjacency.iter().enumerate() {
            let di = dec.cubes[i].cube.diam();
            for &j in adj {
                let dj = dec.cubes[j].cube.diam();
                assert!(dj >= di / 4.0 && dj <= di * 4.0, "size ratio at {i},{j}");
            }
        }
    }

    #[test]
    fn dilated_intersection_iff_intersection() {
        let slit = fixtures::slit_square();
        let dec = whitney_decompose(&slit, 5).unwrap();
        let n = dec.cubes.len();
        for i in 0..n {
            for j in 0..n {
                let plain = dec.cubes[i].cube.intersects(&dec.cubes[j].cube);
                let dilated = dec.cubes[i]
                    .cube
                    .dilate(1.125)
                    .intersects(&dec.cubes[j].cube.dilate(1.125));
                assert_eq!(plain, dilated, "cubes {i},{j}");
                assert_eq!(plain, dec.adjacency[i].contains(&j), "adjacency {i},{j}");
            }
        }
    }

    #[test]
    fn no_overlap() {
        let slit = fixtures::slit_square();
        let dec = whitney_decompose(&slit, 6).unwrap();
        let max_depth = dec.cubes.iter().map(|c| c.depth).max().unwrap();
        for i in 0..dec.cubes.len() {
            for &j in &dec.adjacency[i] {
                if i == j {
                    continue;
                }
                let (a, b) = (&dec.cubes[i], &dec.cubes[j]);
                let (alx, ahx) = span(a.ix, a.depth, max_depth);
                let (aly, ahy) = span(a.iy, a.depth, max_depth);
                let (blx, bhx) = span(b.ix, b.depth, max_depth);
                let (bly, bhy) = span(b.iy, b.depth, max_depth);
                let ox = (ahx.min(bhx) - alx.max(blx)).max(0);
                let oy = (ahy.min(bhy) - aly.max(bly)).max(0);
                assert_eq!(ox * oy, 0, "open interiors of {i},{j} overlap");
            }
        }
    }

    #[test]
    fn skirt_bounded_by_perimeter() {
        let sq = fixtures::unit_square();
        for depth in [6u32, 8] {
            let dec = whitney_decompose(&sq, depth).unwrap();
            let side = 1.0 / (1u64 << depth) as f64;
            assert!(
                dec.stats.skirt_area <= 4.0 * 4.0 * side,
                "depth {depth}: skirt {} too large",
                dec.stats.skirt_area
            );
            assert!(dec.stats.covered_area + dec.stats.skirt_area <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn skirt_threshold_errors() {
        let sq = fixtures::unit_square();
        let err = whitney_decompose_opt(&sq, 5, Some(0.001)).unwrap_err();
        assert!(matches!(err, WhitneyError::TooThin { .. }));
    }

    #[test]
    fn no_cube_crosses_slit() {
        let slit = fixtures::slit_square();
        let dec = whitney_decompose(&slit, 8).unwrap();
        for c in &dec.cubes {
            assert!(slit.cube_dist_to_boundary(&c.cube).is_ok());
        }
        // Cubes accumulate on both sides of the slit.
        let above = dec
            .cubes
            .iter()
            .any(|c| c.cube.center.y > 0.0 && c.cube.center.y < 0.1 && c.cube.center.x.abs() < 0.25);
        let below = dec
            .cubes
            .iter()
            .any(|c| c.cube.center.y < 0.0 && c.cube.center.y > -0.1 && c.cube.center.x.abs() < 0.25);
        assert!(above && below);
    }

    #[test]
    fn refine_counts_and_bounds() {
        let slit = fixtures::slit_square();
        let dec = whitney_decompose(&slit, 6).unwrap();
        let refined = dec.refine_4n(&slit).unwrap();
        assert_eq!(refined.cubes.len(), 16 * dec.cubes.len());
        for c in &refined.cubes {
            let diam = c.cube.diam();
            assert!(4.0 * diam <= c.dist && c.dist <= 20.0 * diam);
        }
        assert!(refined.refine_4n(&slit).is_err());
    }

    #[test]
    fn refined_nesting_property() {
        // For intersecting refined cubes, the cube around one center with
        // half-side equal to its center-to-boundary distance swallows the other.
        let slit = fixtures::slit_square();
        let dec = whitney_decompose(&slit, 5).unwrap().refine_4n(&slit).unwrap();
        for (i, adj) in dec.adjacency.iter().enumerate() {
            let ci = dec.cubes[i].cube.center;
            let big = Cube::new(ci, slit.dist_to_boundary(ci).unwrap());
            for &j in adj {
                let q = &dec.cubes[j].cube;
                let fits = q.center.dist_inf(big.center) + q.half_side <= big.half_side;
                assert!(fits, "nesting fails for {i},{j}");
            }
        }
    }

    #[test]
    fn anchors_examples() {
        let sq = fixtures::unit_square();
        let dec = whitney_decompose(&sq, 6).unwrap();
        let anchors = dec.anchors(&sq).unwrap();
        for (k, c) in dec.cubes.iter().enumerate() {
            let a = anchors.samples[k];
            assert_eq!(
                a.point.dist_inf(c.cube.center),
                sq.dist_to_boundary(c.cube.center).unwrap()
            );
            assert_eq!(anchors.elements[k].anchor.point, a.point);
        }
        let slit = fixtures::slit_square();
        let dec = whitney_decompose(&slit, 6).unwrap();
        let anchors = dec.anchors(&slit).unwrap();
        // A cube just above the slit midpoint approaches from above.
        let k = dec
            .cubes
            .iter()
            .position(|c| {
                c.cube.center.x.abs() < 0.1 && c.cube.center.y > 0.0 && c.cube.center.y < 0.1
            })
            .expect("cube above the slit");
        let elem = &anchors.elements[k];
        assert_eq!(elem.anchor.point.y, 0.0);
        let mid = (elem.sector.0 + elem.sector.1) / 2.0;
        assert!(mid.sin() > 0.0, "approach sector points upward");
    }

    #[test]
    fn covering_multiplicity_grid() {
        let sq = fixtures::unit_square();
        let dec = whitney_decompose(&sq, 6).unwrap();
        // The uniform central block makes four dilated cubes meet at corners.
        assert!(dec.stats.covering_multiplicity >= 4);
        assert!(dec.stats.covering_multiplicity <= dec.stats.max_neighbors);
    }

    #[test]
    fn containing_and_active() {
        let slit = fixtures::slit_square();
        let dec = whitney_decompose(&slit, 6).unwrap();
        for &k in &[0usize, dec.cubes.len() / 2, dec.cubes.len() - 1] {
            let p = dec.cubes[k].cube.center;
            let c = dec.containing_cube(p).unwrap();
            assert!(dec.cubes[c].cube.contains_point(p));
            let act = dec.active_cubes(p);
            assert!(act.contains(&k));
            for &j in &act {
                assert!(p.dist_inf(dec.cubes[j].cube.center) <= dec.cubes[j].cube.half_side * 1.125);
            }
        }
    }

    #[test]
    fn depth_range_checked() {
        let sq = fixtures::unit_square();
        assert!(matches!(whitney_decompose(&sq, 0), Err(WhitneyError::BadDepth(0))));
        assert!(matches!(whitney_decompose(&sq, 25), Err(WhitneyError::BadDepth(25))));
    }
}
