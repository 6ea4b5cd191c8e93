//! Minimum-seminorm Lipschitz selection over the graph of intersecting
//! Whitney-cube pairs.
//!
//! Nodes are unordered pairs `{Q, Q'}` of distinct intersecting cubes with
//! size `D(S) = diam Q + diam Q'`; two nodes are joined when they share a
//! cube, with edge weight `D(S) + D(S')`. Each node carries an affine
//! constraint (a hyperplane cut out by boundary data, or the full space), and
//! a selection assigns a vector to every node so that hyperplane memberships
//! hold and `|G(S) - G(S')|_inf <= lambda * w(e)` on every edge. Minimizing
//! `lambda` is a linear program; small instances are solved by a dense
//! two-phase simplex with Bland's rule, large ones by cyclic projections
//! driven down a bracketing search (the result is then a feasible selection
//! whose seminorm is evaluated exactly).
//!
//! Everything here is dimension-generic; the planar pipeline feeds `n = 2`.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::whitney::WhitneyDecomposition;

#[derive(Debug, Error)]
pub enum SelectionError {
    #[error("inconsistent boundary data: empty constraints at nodes {0:?}")]
    EmptyConstraints(Vec<usize>),
    #[error("infeasible at lambda = {lambda}")]
    Infeasible { lambda: f64 },
    #[error("simplex did not terminate (iteration cap)")]
    Stalled,
    #[error("node index {0} out of range")]
    BadNode(usize),
    #[error("selection does not cover node {0}")]
    Missing(usize),
}

/// Unordered pair of distinct intersecting cubes.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairNode {
    pub cubes: (usize, usize),
    /// `diam Q + diam Q'`.
    pub d: f64,
}

#[derive(Copy, Clone, Debug, Serialize, Deserialize)]
pub struct GraphEdge {
    pub a: usize,
    pub b: usize,
    pub w: f64,
}

#[derive(Clone, Debug)]
pub struct PairGraph {
    pub nodes: Vec<PairNode>,
    pub edges: Vec<GraphEdge>,
    /// Per node: `(neighbor node, edge index)`, sorted by neighbor.
    pub adj: Vec<Vec<(usize, usize)>>,
    node_index: HashMap<(usize, usize), usize>,
}

/// Affine constraint attached to a node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum AffineConstraint {
    Hyperplane { normal: Vec<f64>, offset: f64 },
    FullSpace,
    Empty,
}

impl AffineConstraint {
    pub fn hyperplane(normal: Vec<f64>, offset: f64) -> Self {
        assert!(normal.iter().any(|&h| h != 0.0), "hyperplane needs a nonzero normal");
        AffineConstraint::Hyperplane { normal, offset }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveMethod {
    Simplex,
    Projection,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Selection {
    pub values: Vec<Vec<f64>>,
    /// Max over edges of `|G(a) - G(b)|_inf / w`, evaluated exactly on the
    /// returned values.
    pub seminorm: f64,
    pub method: SolveMethod,
}

#[derive(Copy, Clone, Debug)]
pub enum SelectionMode {
    MinSeminorm,
    FeasibilityAt(f64),
}

/// Builds the pair graph of a decomposition.
pub fn build_pair_graph(dec: &WhitneyDecomposition) -> PairGraph {
    let mut nodes = Vec::new();
    let mut node_index = HashMap::new();
    for (i, adj) in dec.adjacency.iter().enumerate() {
        for &j in adj {
            if j > i {
                node_index.insert((i, j), nodes.len());
                nodes.push(PairNode {
                    cubes: (i, j),
                    d: dec.cubes[i].cube.diam() + dec.cubes[j].cube.diam(),
                });
            }
        }
    }
    // Nodes sharing a cube form a clique; each edge lives in exactly one
    // clique because distinct pair-nodes share at most one cube.
    let mut per_cube: Vec<Vec<usize>> = vec![Vec::new(); dec.cubes.len()];
    for (s, node) in nodes.iter().enumerate() {
        per_cube[node.cubes.0].push(s);
        per_cube[node.cubes.1].push(s);
    }
    let mut edges = Vec::new();
    let mut adj = vec![Vec::new(); nodes.len()];
    for list in &per_cube {
        for (k, &s) in list.iter().enumerate() {
            for &t in &list[k + 1..] {
                let e = edges.len();
                edges.push(GraphEdge { a: s, b: t, w: nodes[s].d + nodes[t].d });
                adj[s].push((t, e));
                adj[t].push((s, e));
            }
        }
    }
    for l in adj.iter_mut() {
        l.sort_unstable();
    }
    PairGraph { nodes, edges, adj, node_index }
}

impl PairGraph {
    pub fn node_of(&self, q1: usize, q2: usize) -> Option<usize> {
        let key = if q1 < q2 { (q1, q2) } else { (q2, q1) };
        self.node_index.get(&key).copied()
    }

    /// Weighted shortest-path distance between nodes; infinite when the
    /// nodes lie in different components.
    pub fn path_metric(&self, s: usize, t: usize) -> Result<f64, SelectionError> {
        if s >= self.nodes.len() || t >= self.nodes.len() {
            return Err(SelectionError::BadNode(s.max(t)));
        }
        if s == t {
            return Ok(0.0);
        }
        #[derive(PartialEq)]
        struct Item(f64, usize);
        impl Eq for Item {}
        impl Ord for Item {
            fn cmp(&self, o: &Self) -> Ordering {
                o.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal)
            }
        }
        impl PartialOrd for Item {
            fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
                Some(self.cmp(o))
            }
        }
        let mut dist = vec![f64::INFINITY; self.nodes.len()];
        let mut heap = BinaryHeap::new();
        dist[s] = 0.0;
        heap.push(Item(0.0, s));
        while let Some(Item(c, u)) = heap.pop() {
            if u == t {
                return Ok(c);
            }
            if c > dist[u] {
                continue;
            }
            for &(v, e) in &self.adj[u] {
                let nc = c + self.edges[e].w;
                if nc < dist[v] {
                    dist[v] = nc;
                    heap.push(Item(nc, v));
                }
            }
        }
        Ok(f64::INFINITY)
    }

    /// Node subsets that are unions of at most `m` edges (endpoint pairs).
    /// Exhaustive when the total count fits the budget, otherwise a
    /// seed-deterministic uniform sample without replacement.
    pub fn finiteness_subsets(&self, m: usize, budget: usize, seed: u64) -> Vec<Vec<usize>> {
        assert!(m >= 1, "need at least one edge per subset");
        let e = self.edges.len() as u64;
        let singles = e;
        let pairs = if m >= 2 { e * e.saturating_sub(1) / 2 } else { 0 };
        let total = singles + pairs;
        let mut picks: Vec<u64> = if total <= budget as u64 {
            (0..total).collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut set = std::collections::BTreeSet::new();
            while set.len() < budget {
                set.insert(rng.gen_range(0..total));
            }
            set.into_iter().collect()
        };
        picks.sort_unstable();
        picks
            .into_iter()
            .map(|k| {
                let mut nodes = Vec::with_capacity(4);
                if k < singles {
                    let ed = &self.edges[k as usize];
                    nodes.extend([ed.a, ed.b]);
                } else {
                    let (i, j) = unrank_pair(k - singles);
                    let (e1, e2) = (&self.edges[i as usize], &self.edges[j as usize]);
                    nodes.extend([e1.a, e1.b, e2.a, e2.b]);
                }
                nodes.sort_unstable();
                nodes.dedup();
                nodes
            })
            .collect()
    }

    /// Induced subgraph on `nodes` (sorted): local constraints and edges.
    pub fn induced(
        &self,
        nodes: &[usize],
        constraints: &[AffineConstraint],
    ) -> (Vec<AffineConstraint>, Vec<GraphEdge>) {
        let local: HashMap<usize, usize> =
            nodes.iter().enumerate().map(|(l, &g)| (g, l)).collect();
        let cons = nodes.iter().map(|&g| constraints[g].clone()).collect();
        let mut edges = Vec::new();
        for &g in nodes {
            for &(v, e) in &self.adj[g] {
                if v > g {
                    if let Some(&lv) = local.get(&v) {
                        edges.push(GraphEdge { a: local[&g], b: lv, w: self.edges[e].w });
                    }
                }
            }
        }
        (cons, edges)
    }
}

/// Unranks `k` into the pair `(i, j)`, `i < j`, in colexicographic order.
fn unrank_pair(k: u64) -> (u64, u64) {
    // j is the largest integer with j*(j-1)/2 <= k.
    let mut j = ((2.0 * k as f64).sqrt() as u64).max(1);
    while j * (j + 1) / 2 <= k {
        j += 1;
    }
    while j * (j - 1) / 2 > k {
        j -= 1;
    }
    let i = k - j * (j - 1) / 2;
    (i, j)
}

/// Hyperplane constraints from per-cube boundary values: for a node
/// `S = {Q, Q'}` (`Q` the lower index) the constraint is
/// `<u, a_Q - a_Q'> = f(w_Q) - f(w_Q')`. Equal anchors give the full space
/// when the values agree within `tol` and an inconsistency error otherwise.
pub fn hyperplanes_from_data(
    graph: &PairGraph,
    anchors: &[Vec<f64>],
    f: &[f64],
    tol: f64,
) -> Result<Vec<AffineConstraint>, SelectionError> {
    let mut out = Vec::with_capacity(graph.nodes.len());
    let mut empty = Vec::new();
    for (s, node) in graph.nodes.iter().enumerate() {
        let (q1, q2) = node.cubes;
        let h: Vec<f64> = anchors[q1]
            .iter()
            .zip(&anchors[q2])
            .map(|(a, b)| a - b)
            .collect();
        let b = f[q1] - f[q2];
        if h.iter().all(|&v| v == 0.0) {
            if b.abs() <= tol {
                out.push(AffineConstraint::FullSpace);
            } else {
                empty.push(s);
                out.push(AffineConstraint::Empty);
            }
        } else {
            out.push(AffineConstraint::Hyperplane { normal: h, offset: b });
        }
    }
    if empty.is_empty() {
        Ok(out)
    } else {
        Err(SelectionError::EmptyConstraints(empty))
    }
}

/// Euclidean orthogonal projection onto an affine constraint.
pub fn project_to_affine(z: &[f64], c: &AffineConstraint) -> Result<Vec<f64>, SelectionError> {
    match c {
        AffineConstraint::FullSpace => Ok(z.to_vec()),
        AffineConstraint::Empty => Err(SelectionError::EmptyConstraints(vec![0])),
        AffineConstraint::Hyperplane { normal, offset } => {
            let hh: f64 = normal.iter().map(|h| h * h).sum();
            let zh: f64 = z.iter().zip(normal).map(|(z, h)| z * h).sum();
            let t = (offset - zh) / hh;
            Ok(z.iter().zip(normal).map(|(z, h)| z + t * h).collect())
        }
    }
}

/// Euclidean point-to-constraint distance (`|b - <z,h>| / |h|_2` for
/// hyperplanes).
pub fn affine_distance_l2(z: &[f64], c: &AffineConstraint) -> f64 {
    match c {
        AffineConstraint::FullSpace => 0.0,
        AffineConstraint::Empty => f64::INFINITY,
        AffineConstraint::Hyperplane { normal, offset } => {
            let h2: f64 = normal.iter().map(|h| h * h).sum::<f64>().sqrt();
            let zh: f64 = z.iter().zip(normal).map(|(z, h)| z * h).sum();
            (offset - zh).abs() / h2
        }
    }
}

/// Exact seminorm of a selection: max over edges of `|G(a)-G(b)|_inf / w`.
pub fn selection_seminorm(edges: &[GraphEdge], values: &[Vec<f64>]) -> f64 {
    let mut s = 0.0f64;
    for e in edges {
        let d = sup_diff(&values[e.a], &values[e.b]);
        if d > s * e.w {
            s = d / e.w;
        }
    }
    s
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Closed-form minimum of `|u - v|_inf` over `u` and `v` in two constraints:
/// zero unless both are parallel hyperplanes, where the uniform-norm gap is
/// `|offset difference| / |h|_1`.
pub fn pairwise_requirement(a: &AffineConstraint, b: &AffineConstraint) -> f64 {
    let (ha, ba, hb, bb) = match (a, b) {
        (
            AffineConstraint::Hyperplane { normal: ha, offset: ba },
            AffineConstraint::Hyperplane { normal: hb, offset: bb },
        ) => (ha, *ba, hb, *bb),
        _ => return 0.0,
    };
    let k = ha
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.abs().partial_cmp(&y.1.abs()).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    if ha[k] == 0.0 {
        return 0.0;
    }
    let t = hb[k] / ha[k];
    let scale = ha.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let parallel = ha
        .iter()
        .zip(hb)
        .all(|(x, y)| (y - t * x).abs() <= 1e-12 * (1.0 + scale + y.abs()));
    if !parallel || t == 0.0 {
        return 0.0;
    }
    let l1: f64 = ha.iter().map(|v| v.abs()).sum();
    (bb / t - ba).abs() / l1
}

/// Lower bound on the optimal seminorm from single-edge requirements.
pub fn edge_lower_bound(edges: &[GraphEdge], constraints: &[AffineConstraint]) -> f64 {
    edges
        .iter()
        .map(|e| pairwise_requirement(&constraints[e.a], &constraints[e.b]) / e.w)
        .fold(0.0, f64::max)
}

/// Solves the Lipschitz-selection problem. Empty constraints are rejected
/// up front; full-space nodes whose whole component carries no hyperplane
/// are pinned to the origin so the optimum is attained.
pub fn lipschitz_selection(
    n_dim: usize,
    constraints: &[AffineConstraint],
    edges: &[GraphEdge],
    mode: SelectionMode,
) -> Result<Selection, SelectionError> {
    let empty: Vec<usize> = constraints
        .iter()
        .enumerate()
        .filter(|(_, c)| matches!(c, AffineConstraint::Empty))
        .map(|(i, _)| i)
        .collect();
    if !empty.is_empty() {
        return Err(SelectionError::EmptyConstraints(empty));
    }
    let pinned = pinned_nodes(constraints, edges);

    // 2 vars per free coordinate + lambda; 2n rows per edge + equalities.
    let rows = 2 * n_dim * edges.len() + constraints.len();
    let cols = 2 * n_dim * constraints.len() + 1;
    let use_simplex = rows.saturating_mul(cols) <= 2_000_000;

    if use_simplex {
        simplex_selection(n_dim, constraints, edges, &pinned, mode)
    } else {
        projection_selection(n_dim, constraints, edges, &pinned, mode)
    }
}

fn pinned_nodes(constraints: &[AffineConstraint], edges: &[GraphEdge]) -> Vec<bool> {
    let n = constraints.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for e in edges {
        let (ra, rb) = (find(&mut parent, e.a), find(&mut parent, e.b));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    let mut has_plane = vec![false; n];
    for (i, c) in constraints.iter().enumerate() {
        if matches!(c, AffineConstraint::Hyperplane { .. }) {
            let r = find(&mut parent, i);
            has_plane[r] = true;
        }
    }
    (0..n)
        .map(|i| {
            let r = find(&mut parent, i);
            !has_plane[r]
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Dense two-phase simplex with Bland's rule.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
enum Rel {
    Le,
    Eq,
}

struct LpBuilder {
    n_vars: usize,
    cost: Vec<f64>,
    rows: Vec<(Vec<(usize, f64)>, Rel, f64)>,
}

impl LpBuilder {
    fn new(n_vars: usize) -> Self {
        LpBuilder { n_vars, cost: vec![0.0; n_vars], rows: Vec::new() }
    }

    fn add(&mut self, coeffs: Vec<(usize, f64)>, rel: Rel, rhs: f64) {
        self.rows.push((coeffs, rel, rhs));
    }

    /// Two-phase tableau simplex, Bland pivoting, nonnegative variables.
    fn solve(&self) -> Result<(Vec<f64>, f64), SelectionError> {
        const TOL: f64 = 1e-9;
        let m = self.rows.len();
        let n = self.n_vars;
        let n_slack = self.rows.iter().filter(|r| matches!(r.1, Rel::Le)).count();
        let total = n + n_slack + m; // artificials allocated per row, some unused
        let width = total + 1;
        let mut t = vec![0.0f64; (m + 1) * width];
        let mut basis = vec![usize::MAX; m];
        let mut slack_i = 0usize;
        for (r, (coeffs, rel, rhs)) in self.rows.iter().enumerate() {
            let mut rhs = *rhs;
            let mut sign = 1.0;
            if rhs < 0.0 {
                sign = -1.0;
                rhs = -rhs;
            }
            for &(j, v) in coeffs {
                t[r * width + j] += sign * v;
            }
            t[r * width + total] = rhs;
            if let Rel::Le = rel {
                let sj = n + slack_i;
                slack_i += 1;
                t[r * width + sj] = sign;
                if sign > 0.0 {
                    basis[r] = sj;
                }
            }
            if basis[r] == usize::MAX {
                let aj = n + n_slack + r;
                t[r * width + aj] = 1.0;
                basis[r] = aj;
            }
        }
        // Phase 1: minimize the sum of artificials. Artificial columns are
        // basic, so their reduced costs start at zero, and they may never
        // re-enter the basis.
        let needs_phase1 = basis.iter().any(|&b| b >= n + n_slack);
        if needs_phase1 {
            for j in 0..width {
                let mut s = 0.0;
                for r in 0..m {
                    if basis[r] >= n + n_slack {
                        s += t[r * width + j];
                    }
                }
                t[m * width + j] = -s;
            }
            for j in n + n_slack..total {
                t[m * width + j] = 0.0;
            }
            pivot_loop(&mut t, &mut basis, m, width, n + n_slack, TOL)?;
            if t[m * width + total].abs() > 1e-7 {
                return Err(SelectionError::Infeasible { lambda: f64::NAN });
            }
            // Drive remaining artificials out of the basis if possible.
            for r in 0..m {
                if basis[r] >= n + n_slack {
                    if let Some(j) = (0..n + n_slack).find(|&j| t[r * width + j].abs() > TOL) {
                        pivot(&mut t, &mut basis, m, width, r, j);
                    }
                }
            }
        }
        // Phase 2 objective.
        for j in 0..width {
            t[m * width + j] = 0.0;
        }
        for j in 0..n {
            t[m * width + j] = self.cost[j];
        }
        for r in 0..m {
            let b = basis[r];
            if b < n && self.cost[b] != 0.0 {
                let c = self.cost[b];
                for j in 0..width {
                    t[m * width + j] -= c * t[r * width + j];
                }
            }
        }
        // Artificial columns may not re-enter.
        pivot_loop(&mut t, &mut basis, m, width, n + n_slack, TOL)?;
        let mut x = vec![0.0f64; n];
        for r in 0..m {
            if basis[r] < n {
                x[basis[r]] = t[r * width + total];
            }
        }
        let obj: f64 = (0..n).map(|j| self.cost[j] * x[j]).sum();
        Ok((x, obj))
    }
}

fn pivot_loop(
    t: &mut [f64],
    basis: &mut [usize],
    m: usize,
    width: usize,
    enterable: usize,
    tol: f64,
) -> Result<(), SelectionError> {
    let total = width - 1;
    for _ in 0..200_000 {
        // Bland: lowest-index column with negative reduced cost.
        let mut col = usize::MAX;
        for j in 0..enterable {
            if t[m * width + j] < -tol {
                col = j;
                break;
            }
        }
        if col == usize::MAX {
            return Ok(());
        }
        // Lowest basis index among the minimum ratios.
        let mut row = usize::MAX;
        let mut best = f64::INFINITY;
        for r in 0..m {
            let a = t[r * width + col];
            if a > tol {
                let ratio = t[r * width + total] / a;
                if ratio < best - 1e-12
                    || (ratio < best + 1e-12 && row != usize::MAX && basis[r] < basis[row])
                {
                    best = ratio;
                    row = r;
                }
            }
        }
        if row == usize::MAX {
            // Unbounded direction; cannot happen for our bounded objectives.
            return Err(SelectionError::Stalled);
        }
        pivot(t, basis, m, width, row, col);
    }
    Err(SelectionError::Stalled)
}

fn pivot(t: &mut [f64], basis: &mut [usize], m: usize, width: usize, row: usize, col: usize) {
    let p = t[row * width + col];
    for j in 0..width {
        t[row * width + j] /= p;
    }
    for r in 0..=m {
        if r == row {
            continue;
        }
        let f = t[r * width + col];
        if f != 0.0 {
            for j in 0..width {
                t[r * width + j] -= f * t[row * width + j];
            }
        }
    }
    if row < m {
        basis[row] = col;
    }
}

fn simplex_selection(
    n_dim: usize,
    constraints: &[AffineConstraint],
    edges: &[GraphEdge],
    pinned: &[bool],
    mode: SelectionMode,
) -> Result<Selection, SelectionError> {
    let n = constraints.len();
    // Variable layout: g+[j][i] at 2*(j*n_dim+i), g-[...] at +1, lambda last.
    let var_p = |j: usize, i: usize| 2 * (j * n_dim + i);
    let var_m = |j: usize, i: usize| 2 * (j * n_dim + i) + 1;
    let lambda_var = 2 * n_dim * n;
    let (fixed_lambda, minimize) = match mode {
        SelectionMode::MinSeminorm => (None, true),
        SelectionMode::FeasibilityAt(l) => (Some(l), false),
    };
    let mut lp = LpBuilder::new(lambda_var + 1);
    if minimize {
        lp.cost[lambda_var] = 1.0;
    }
    for (j, c) in constraints.iter().enumerate() {
        if pinned[j] {
            for i in 0..n_dim {
                lp.add(vec![(var_p(j, i), 1.0), (var_m(j, i), -1.0)], Rel::Eq, 0.0);
            }
            continue;
        }
        if let AffineConstraint::Hyperplane { normal, offset } = c {
            let mut row = Vec::with_capacity(2 * n_dim);
            for i in 0..n_dim {
                if normal[i] != 0.0 {
                    row.push((var_p(j, i), normal[i]));
                    row.push((var_m(j, i), -normal[i]));
                }
            }
            lp.add(row, Rel::Eq, *offset);
        }
    }
    for e in edges {
        for i in 0..n_dim {
            for sign in [1.0f64, -1.0] {
                let mut row = vec![
                    (var_p(e.a, i), sign),
                    (var_m(e.a, i), -sign),
                    (var_p(e.b, i), -sign),
                    (var_m(e.b, i), sign),
                ];
                let rhs = match fixed_lambda {
                    Some(l) => l * e.w,
                    None => {
                        row.push((lambda_var, -e.w));
                        0.0
                    }
                };
                lp.add(row, Rel::Le, rhs);
            }
        }
    }
    let (x, _) = lp.solve().map_err(|err| match err {
        SelectionError::Infeasible { .. } => SelectionError::Infeasible {
            lambda: fixed_lambda.unwrap_or(f64::NAN),
        },
        other => other,
    })?;
    let mut values: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n_dim).map(|i| x[var_p(j, i)] - x[var_m(j, i)]).collect())
        .collect();
    // Exact hyperplane polish removes simplex rounding from the memberships.
    for (j, c) in constraints.iter().enumerate() {
        values[j] = project_to_affine(&values[j], c)?;
    }
    let seminorm = selection_seminorm(edges, &values);
    Ok(Selection { values, seminorm, method: SolveMethod::Simplex })
}

// ---------------------------------------------------------------------------
// Large instances: bracketing search over cyclic projections.
// ---------------------------------------------------------------------------

fn projection_selection(
    n_dim: usize,
    constraints: &[AffineConstraint],
    edges: &[GraphEdge],
    pinned: &[bool],
    mode: SelectionMode,
) -> Result<Selection, SelectionError> {
    let n = constraints.len();
    // Start from the common least-squares point projected on each plane.
    let z = least_squares_point(n_dim, constraints);
    let g: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            if pinned[j] {
                vec![0.0; n_dim]
            } else {
                project_to_affine(&z, &constraints[j]).expect("no empty constraints here")
            }
        })
        .collect();

    let scale: f64 = g
        .iter()
        .flat_map(|v| v.iter().map(|x| x.abs()))
        .fold(1.0, f64::max);
    let feas_tol = 1e-9 * scale;
    let sweeps = if edges.len() > 400_000 { 240 } else { 400 };

    let try_at = |g: &mut Vec<Vec<f64>>, target: f64| -> bool {
        for _ in 0..sweeps {
            for e in edges {
                let cap = target * e.w;
                for i in 0..n_dim {
                    let d = g[e.a][i] - g[e.b][i];
                    let excess = d.abs() - cap;
                    if excess > 0.0 {
                        let shift = 0.5 * excess * d.signum();
                        if !pinned[e.a] {
                            g[e.a][i] -= shift;
                        }
                        if !pinned[e.b] {
                            g[e.b][i] += shift;
                        }
                    }
                }
            }
            for (j, c) in constraints.iter().enumerate() {
                if !pinned[j] {
                    if let AffineConstraint::Hyperplane { .. } = c {
                        g[j] = project_to_affine(&g[j], c).unwrap();
                    }
                }
            }
            if max_violation(edges, g, target) <= feas_tol {
                return true;
            }
        }
        false
    };

    match mode {
        SelectionMode::FeasibilityAt(l) => {
            let mut work = g.clone();
            if try_at(&mut work, l) {
                let seminorm = selection_seminorm(edges, &work);
                Ok(Selection { values: work, seminorm, method: SolveMethod::Projection })
            } else {
                Err(SelectionError::Infeasible { lambda: l })
            }
        }
        SelectionMode::MinSeminorm => {
            let lb = edge_lower_bound(edges, constraints);
            let mut best = g;
            let mut hi = selection_seminorm(edges, &best);
            if hi == 0.0 {
                return Ok(Selection { values: best, seminorm: 0.0, method: SolveMethod::Projection });
            }
            let mut lo = lb;
            for _ in 0..24 {
                if hi - lo <= 0.01 * hi + 1e-12 {
                    break;
                }
                let mid = if lo > 0.0 { (lo * hi).sqrt() } else { hi / 4.0 };
                let mut work = best.clone();
                if try_at(&mut work, mid) {
                    best = work;
                    hi = selection_seminorm(edges, &best).min(mid);
                } else {
                    lo = mid;
                }
            }
            let seminorm = selection_seminorm(edges, &best);
            Ok(Selection { values: best, seminorm, method: SolveMethod::Projection })
        }
    }
}

fn max_violation(edges: &[GraphEdge], g: &[Vec<f64>], target: f64) -> f64 {
    let mut worst = 0.0f64;
    for e in edges {
        let cap = target * e.w;
        let d = sup_diff(&g[e.a], &g[e.b]);
        if d - cap > worst {
            worst = d - cap;
        }
    }
    worst
}

/// Point minimizing the summed squared Euclidean distance to all hyperplanes
/// (plain Gaussian elimination on the normal equations, ridge-regularized).
fn least_squares_point(n_dim: usize, constraints: &[AffineConstraint]) -> Vec<f64> {
    let mut a = vec![vec![0.0f64; n_dim]; n_dim];
    let mut rhs = vec![0.0f64; n_dim];
    let mut count = 0usize;
    for c in constraints {
        if let AffineConstraint::Hyperplane { normal, offset } = c {
            let hh: f64 = normal.iter().map(|h| h * h).sum();
            if hh == 0.0 {
                continue;
            }
            count += 1;
            for i in 0..n_dim {
                for j in 0..n_dim {
                    a[i][j] += normal[i] * normal[j] / hh;
                }
                rhs[i] += normal[i] * offset / hh;
            }
        }
    }
    if count == 0 {
        return vec![0.0; n_dim];
    }
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += 1e-9 * count as f64;
    }
    gaussian_solve(a, rhs)
}

fn gaussian_solve(mut m: Vec<Vec<f64>>, mut x: Vec<f64>) -> Vec<f64> {
    let n = x.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r1, &r2| m[r1][col].abs().partial_cmp(&m[r2][col].abs()).unwrap())
            .unwrap();
        m.swap(col, piv);
        x.swap(col, piv);
        let p = m[col][col];
        if p.abs() < 1e-30 {
            continue;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col] / p;
                for c2 in col..n {
                    m[r][c2] -= f * m[col][c2];
                }
                x[r] -= f * x[col];
            }
        }
    }
    (0..n)
        .map(|i| if m[i][i].abs() < 1e-30 { 0.0 } else { x[i] / m[i][i] })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::whitney::whitney_decompose;

    fn line(nx: f64, ny: f64, b: f64) -> AffineConstraint {
        AffineConstraint::hyperplane(vec![nx, ny], b)
    }

    #[test]
    fn pair_graph_matches_brute_force() {
        let sq = fixtures::unit_square();
        let dec = whitney_decompose(&sq, 5).unwrap();
        let g = build_pair_graph(&dec);
        let mut expect_nodes = 0;
        for i in 0..dec.cubes.len() {
            for j in i + 1..dec.cubes.len() {
                if dec.cubes[i].cube.intersects(&dec.cubes[j].cube) {
                    expect_nodes += 1;
                }
            }
        }
        assert_eq!(g.nodes.len(), expect_nodes);
        let mut expect_edges = 0;
        for s in 0..g.nodes.len() {
            for t in s + 1..g.nodes.len() {
                let (a, b) = g.nodes[s].cubes;
                let (c, d) = g.nodes[t].cubes;
                if a == c || a == d || b == c || b == d {
                    expect_edges += 1;
                }
            }
        }
        assert_eq!(g.edges.len(), expect_edges);
        for e in &g.edges {
            assert_eq!(e.w, g.nodes[e.a].d + g.nodes[e.b].d);
            assert!(e.w > 0.0);
        }
    }

    #[test]
    fn path_metric_properties() {
        let sq = fixtures::unit_square();
        let dec = whitney_decompose(&sq, 5).unwrap();
        let g = build_pair_graph(&dec);
        assert_eq!(g.path_metric(0, 0).unwrap(), 0.0);
        let (a, e) = (g.adj[0][0].0, g.adj[0][0].1);
        assert!(g.path_metric(0, a).unwrap() <= g.edges[e].w);
        let (x, y, z) = (0, g.nodes.len() / 2, g.nodes.len() - 1);
        let dxy = g.path_metric(x, y).unwrap();
        let dyz = g.path_metric(y, z).unwrap();
        let dxz = g.path_metric(x, z).unwrap();
        assert!(dxz <= dxy + dyz + 1e-9);
    }

    #[test]
    fn hyperplane_construction() {
        let sq = fixtures::unit_square();
        let dec = whitney_decompose(&sq, 5).unwrap();
        let g = build_pair_graph(&dec);
        let anchors: Vec<Vec<f64>> = (0..dec.cubes.len())
            .map(|i| vec![i as f64, 0.0])
            .collect();
        let f: Vec<f64> = (0..dec.cubes.len()).map(|i| 0.5 * i as f64).collect();
        let cons = hyperplanes_from_data(&g, &anchors, &f, 1e-9).unwrap();
        for (s, c) in cons.iter().enumerate() {
            let (q1, q2) = g.nodes[s].cubes;
            match c {
                AffineConstraint::Hyperplane { normal, offset } => {
                    assert_eq!(normal[0], q1 as f64 - q2 as f64);
                    assert_eq!(*offset, 0.5 * (q1 as f64 - q2 as f64));
                }
                _ => panic!("expected hyperplane"),
            }
        }
        // Equal anchors, equal values: full space. Unequal values: error.
        let anchors: Vec<Vec<f64>> = dec.cubes.iter().map(|_| vec![1.0, 2.0]).collect();
        let f = vec![3.0; dec.cubes.len()];
        let cons = hyperplanes_from_data(&g, &anchors, &f, 1e-9).unwrap();
        assert!(cons.iter().all(|c| matches!(c, AffineConstraint::FullSpace)));
        let mut f2 = f.clone();
        f2[g.nodes[0].cubes.0] += 1.0;
        assert!(matches!(
            hyperplanes_from_data(&g, &anchors, &f2, 1e-9),
            Err(SelectionError::EmptyConstraints(_))
        ));
    }

    #[test]
    fn projection_examples() {
        let c = line(1.0, 0.0, 1.0);
        assert_eq!(project_to_affine(&[0.0, 0.0], &c).unwrap(), vec![1.0, 0.0]);
        let on = project_to_affine(&[1.0, 7.0], &c).unwrap();
        assert_eq!(on, vec![1.0, 7.0]);
        // z=(3,4) onto <u,(1,1)>=0 -> (-0.5, 0.5); distance 7/sqrt(2).
        let c = line(1.0, 1.0, 0.0);
        let p = project_to_affine(&[3.0, 4.0], &c).unwrap();
        assert!((p[0] + 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
        let d = affine_distance_l2(&[3.0, 4.0], &c);
        assert!((d - 7.0 / 2.0f64.sqrt()).abs() < 1e-12);
        // Idempotence is exact.
        let pp = project_to_affine(&p, &c).unwrap();
        assert_eq!(p, pp);
    }

    #[test]
    fn lp_two_nodes() {
        // One edge of weight 2 between the lines y=0 and y=1: optimum 0.5.
        let cons = vec![line(0.0, 1.0, 0.0), line(0.0, 1.0, 1.0)];
        let edges = vec![GraphEdge { a: 0, b: 1, w: 2.0 }];
        let sel = lipschitz_selection(2, &cons, &edges, SelectionMode::MinSeminorm).unwrap();
        assert!((sel.seminorm - 0.5).abs() < 1e-9, "lambda* = {}", sel.seminorm);
        assert!(sel.values[0][1].abs() < 1e-9);
        assert!((sel.values[1][1] - 1.0).abs() < 1e-9);
        assert!((edge_lower_bound(&edges, &cons) - 0.5).abs() < 1e-12);
        // Feasibility mode brackets the optimum.
        assert!(lipschitz_selection(2, &cons, &edges, SelectionMode::FeasibilityAt(0.6)).is_ok());
        assert!(matches!(
            lipschitz_selection(2, &cons, &edges, SelectionMode::FeasibilityAt(0.4)),
            Err(SelectionError::Infeasible { .. })
        ));
    }

    #[test]
    fn lp_full_space_pinning() {
        let cons = vec![AffineConstraint::FullSpace, AffineConstraint::FullSpace];
        let edges = vec![GraphEdge { a: 0, b: 1, w: 1.0 }];
        let sel = lipschitz_selection(2, &cons, &edges, SelectionMode::MinSeminorm).unwrap();
        assert_eq!(sel.seminorm, 0.0);
        assert_eq!(sel.values[0], vec![0.0, 0.0]);
        // Isolated node with a hyperplane: lambda 0, value on the plane.
        let cons = vec![line(1.0, 0.0, 2.0)];
        let sel = lipschitz_selection(2, &cons, &[], SelectionMode::MinSeminorm).unwrap();
        assert_eq!(sel.seminorm, 0.0);
        assert!((sel.values[0][0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn lp_matches_brute_force_small() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for case in 0..25 {
            let n = 2 + case % 3;
            let cons: Vec<AffineConstraint> = (0..n)
                .map(|_| {
                    let ang: f64 = rng.gen_range(0.0..std::f64::consts::PI);
                    line(ang.cos(), ang.sin(), rng.gen_range(-1.0..1.0))
                })
                .collect();
            let mut edges = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    if a + 1 == b || rng.gen_bool(0.5) {
                        edges.push(GraphEdge { a, b, w: rng.gen_range(0.5..2.0) });
                    }
                }
            }
            let sel = lipschitz_selection(2, &cons, &edges, SelectionMode::MinSeminorm).unwrap();
            let brute = brute_force_lambda(&cons, &edges);
            assert!(
                (sel.seminorm - brute).abs() <= 2e-3 * (1.0 + brute),
                "case {case}: lp {} vs brute {brute}",
                sel.seminorm
            );
            for (v, c) in sel.values.iter().zip(&cons) {
                assert!(affine_distance_l2(v, c) <= 1e-9);
            }
        }
    }

    /// Grid search: 61 points per line over a box, refined twice around the
    /// best combination. Only an oracle for tiny instances.
    fn brute_force_lambda(cons: &[AffineConstraint], edges: &[GraphEdge]) -> f64 {
        let n = cons.len();
        let params: Vec<(Vec<f64>, Vec<f64>)> = cons
            .iter()
            .map(|c| match c {
                AffineConstraint::Hyperplane { normal: h, offset: b } => {
                    let p0 = project_to_affine(&[0.0, 0.0], &line(h[0], h[1], *b)).unwrap();
                    let dir = [-h[1], h[0]];
                    let norm = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
                    (p0, vec![dir[0] / norm, dir[1] / norm])
                }
                _ => panic!("oracle expects lines"),
            })
            .collect();
        let eval = |ts: &[f64]| -> f64 {
            let pts: Vec<[f64; 2]> = ts
                .iter()
                .enumerate()
                .map(|(j, &t)| {
                    [
                        params[j].0[0] + t * params[j].1[0],
                        params[j].0[1] + t * params[j].1[1],
                    ]
                })
                .collect();
            let mut lam = 0.0f64;
            for e in edges {
                let d = (pts[e.a][0] - pts[e.b][0])
                    .abs()
                    .max((pts[e.a][1] - pts[e.b][1]).abs());
                lam = lam.max(d / e.w);
            }
            lam
        };
        let mut centers = vec![0.0f64; n];
        let mut radius = 4.0f64;
        let mut best = f64::INFINITY;
        let mut best_ts = centers.clone();
        for _ in 0..3 {
            let steps = 61usize;
            let mut idx = vec![0usize; n];
            loop {
                let ts: Vec<f64> = (0..n)
                    .map(|j| {
                        centers[j] - radius + 2.0 * radius * idx[j] as f64 / (steps - 1) as f64
                    })
                    .collect();
                let v = eval(&ts);
                if v < best {
                    best = v;
                    best_ts = ts;
                }
                let mut k = 0;
                loop {
                    if k == n {
                        break;
                    }
                    idx[k] += 1;
                    if idx[k] < steps {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == n {
                    break;
                }
            }
            centers = best_ts.clone();
            radius *= 2.5 / (steps as f64 - 1.0);
        }
        best
    }

    #[test]
    fn seminorm_perturbation() {
        let cons = vec![line(0.0, 1.0, 0.0), line(0.0, 1.0, 1.0), line(0.0, 1.0, 2.0)];
        let edges = vec![
            GraphEdge { a: 0, b: 1, w: 1.0 },
            GraphEdge { a: 1, b: 2, w: 1.0 },
        ];
        let sel = lipschitz_selection(2, &cons, &edges, SelectionMode::MinSeminorm).unwrap();
        let base = selection_seminorm(&edges, &sel.values);
        assert!((base - sel.seminorm).abs() < 1e-12);
        let mut moved = sel.values.clone();
        moved[1][0] += 0.25;
        let worse = selection_seminorm(&edges, &moved);
        assert!(worse <= base + 0.25 / 1.0 + 1e-12);
    }

    #[test]
    fn monotone_under_subgraphs() {
        let cons = vec![
            line(1.0, 0.0, 0.0),
            line(0.0, 1.0, 1.0),
            line(1.0, 1.0, -1.0),
            line(1.0, -1.0, 2.0),
        ];
        let edges = vec![
            GraphEdge { a: 0, b: 1, w: 1.0 },
            GraphEdge { a: 1, b: 2, w: 0.5 },
            GraphEdge { a: 2, b: 3, w: 2.0 },
            GraphEdge { a: 0, b: 3, w: 1.0 },
        ];
        let full = lipschitz_selection(2, &cons, &edges, SelectionMode::MinSeminorm)
            .unwrap()
            .seminorm;
        for keep in [[0usize, 1].as_slice(), &[1, 2, 3], &[0, 1, 2, 3], &[2, 3]] {
            let sub_cons: Vec<_> = keep.iter().map(|&i| cons[i].clone()).collect();
            let remap: HashMap<usize, usize> =
                keep.iter().enumerate().map(|(l, &g)| (g, l)).collect();
            let sub_edges: Vec<GraphEdge> = edges
                .iter()
                .filter(|e| remap.contains_key(&e.a) && remap.contains_key(&e.b))
                .map(|e| GraphEdge { a: remap[&e.a], b: remap[&e.b], w: e.w })
                .collect();
            let sub = lipschitz_selection(2, &sub_cons, &sub_edges, SelectionMode::MinSeminorm)
                .unwrap()
                .seminorm;
            assert!(sub <= full + 1e-9, "subgraph beats full: {sub} > {full}");
        }
    }

    #[test]
    fn finiteness_subsets_deterministic() {
        let sq = fixtures::unit_square();
        let dec = whitney_decompose(&sq, 5).unwrap();
        let g = build_pair_graph(&dec);
        let s1 = g.finiteness_subsets(2, 50, 42);
        let s2 = g.finiteness_subsets(2, 50, 42);
        assert_eq!(s1, s2);
        assert_eq!(s1.len(), 50);
        for sub in &s1 {
            assert!(sub.len() >= 2 && sub.len() <= 4);
            let mut cubes = std::collections::BTreeSet::new();
            for &s in sub {
                cubes.insert(g.nodes[s].cubes.0);
                cubes.insert(g.nodes[s].cubes.1);
            }
            assert!(cubes.len() <= 6, "subset covers more than 6 cubes");
        }
        let s3 = g.finiteness_subsets(2, 50, 43);
        assert_ne!(s1, s3);
        // m = 1 with a huge budget enumerates exactly the single edges.
        let singles = g.finiteness_subsets(1, usize::MAX, 0);
        assert_eq!(singles.len(), g.edges.len());
    }

    #[test]
    fn unrank_pairs_cover() {
        let mut seen = std::collections::BTreeSet::new();
        for k in 0..45 {
            let (i, j) = unrank_pair(k);
            assert!(i < j);
            seen.insert((i, j));
        }
        assert_eq!(seen.len(), 45);
        assert!(seen.contains(&(0, 1)) && seen.contains(&(8, 9)));
    }

    #[test]
    fn projection_path_matches_simplex() {
        // A chain long enough to exercise the iterative solver when forced.
        let n = 40usize;
        let cons: Vec<AffineConstraint> =
            (0..n).map(|j| line(0.0, 1.0, j as f64 / n as f64)).collect();
        let edges: Vec<GraphEdge> = (0..n - 1)
            .map(|j| GraphEdge { a: j, b: j + 1, w: 1.0 })
            .collect();
        let exact =
            simplex_selection(2, &cons, &edges, &vec![false; n], SelectionMode::MinSeminorm)
                .unwrap();
        let approx =
            projection_selection(2, &cons, &edges, &vec![false; n], SelectionMode::MinSeminorm)
                .unwrap();
        assert!(approx.seminorm >= exact.seminorm - 1e-9);
        assert!(
            approx.seminorm <= exact.seminorm * 1.05 + 1e-9,
            "projection {} vs simplex {}",
            approx.seminorm,
            exact.seminorm
        );
        for (v, c) in approx.values.iter().zip(&cons) {
            assert!(affine_distance_l2(v, c) <= 1e-9);
        }
    }
}
