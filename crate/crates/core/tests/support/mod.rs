//! Independent reference implementations shared by the integration tests.
//!
//! Nothing here calls into the code under test except for plain data types, so
//! agreement between the two is meaningful.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::PathBuf;

use rand::Rng;
use strutpath::graph::LatticeGraph;
use strutpath::lattice::{Layer, Point3};
use strutpath::optimizer::{GrowthMode, Solution};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

/// Every edge covered exactly once, and every path a connected walk over its
/// listed edges. Returns a description of the first violation.
pub fn check_edge_cover(graph: &LatticeGraph, solution: &Solution) -> Result<(), String> {
    let mut hits = vec![0usize; graph.edge_count()];
    for (k, path) in solution.paths.iter().enumerate() {
        if path.nodes.len() != path.edge_ids.len() + 1 || path.edge_ids.is_empty() {
            return Err(format!("path {k}: {} nodes for {} edges", path.nodes.len(), path.edge_ids.len()));
        }
        if path.num_edges != path.edge_ids.len() {
            return Err(format!("path {k}: num_edges {} != {}", path.num_edges, path.edge_ids.len()));
        }
        for (i, &e) in path.edge_ids.iter().enumerate() {
            let edge = graph.edge(e);
            let (a, b) = (path.nodes[i], path.nodes[i + 1]);
            if !((edge.u == a && edge.v == b) || (edge.u == b && edge.v == a)) {
                return Err(format!("path {k}: edge {e} does not join nodes {a} and {b}"));
            }
            hits[e] += 1;
        }
    }
    if let Some(e) = hits.iter().position(|&h| h != 1) {
        return Err(format!("edge {e} covered {} times", hits[e]));
    }
    if solution.total_paths != solution.paths.len() {
        return Err("total_paths mismatch".into());
    }
    if solution.total_edges != graph.edge_count() {
        return Err("total_edges mismatch".into());
    }
    Ok(())
}

/// Union-find over `n` items.
pub struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Eulerian lower bound on trail count computed with union-find.
pub fn trail_lower_bound(node_count: usize, edges: &[(usize, usize)]) -> usize {
    let mut sets = DisjointSets::new(node_count);
    let mut degree = vec![0usize; node_count];
    for &(a, b) in edges {
        sets.union(a, b);
        degree[a] += 1;
        degree[b] += 1;
    }
    let mut odd: HashMap<usize, usize> = HashMap::new();
    for (v, &d) in degree.iter().enumerate() {
        if d > 0 {
            let root = sets.find(v);
            *odd.entry(root).or_default() += d % 2;
        }
    }
    odd.values().map(|&o| (o / 2).max(1)).sum()
}

/// Random simple graph on scattered points with `edges` edges, built from a few
/// clusters so that connectivity varies. Positions are on a 1e-5 mm grid.
pub fn random_geometric_graph<R: Rng>(rng: &mut R, edges: usize) -> LatticeGraph {
    let nodes = (edges / 2).max(2) + rng.gen_range(0..=edges / 2 + 1);
    let clusters = rng.gen_range(1..=3usize);
    let pos: Vec<Point3> = (0..nodes)
        .map(|i| {
            let c = (i % clusters) as f64 * 30.0;
            let gx: i64 = rng.gen_range(0..2_000_000);
            let gy: i64 = rng.gen_range(0..2_000_000);
            Point3::new(c + gx as f64 / 1e5, gy as f64 / 1e5, 0.0)
        })
        .collect();
    let mut seen = HashSet::new();
    let mut pairs = Vec::new();
    let max_pairs = nodes * (nodes - 1) / 2;
    let target = edges.min(max_pairs);
    while pairs.len() < target {
        let a = rng.gen_range(0..nodes);
        // mostly link within a cluster
        let b = if rng.gen_bool(0.9) {
            let k = rng.gen_range(0..nodes.div_ceil(clusters));
            (a % clusters + k * clusters).min(nodes - 1)
        } else {
            rng.gen_range(0..nodes)
        };
        if a == b || pos[a].distance(&pos[b]) == 0.0 {
            continue;
        }
        if seen.insert((a.min(b), a.max(b))) {
            pairs.push((a, b));
        }
        if seen.len() >= max_pairs {
            break;
        }
    }
    LatticeGraph::from_edges(pos, &pairs).expect("valid random graph")
}

/// A path in canonical orientation: the lexicographically smaller of its edge
/// sequence and its reverse.
pub fn canonical_path(edge_ids: &[usize]) -> Vec<usize> {
    let fwd = edge_ids.to_vec();
    let mut rev = fwd.clone();
    rev.reverse();
    fwd.min(rev)
}

pub fn canonical_solution(solution: &Solution) -> Vec<Vec<usize>> {
    solution.paths.iter().map(|p| canonical_path(&p.edge_ids)).collect()
}

/// Every decomposition the growth rule can produce on a graph when any start
/// node is allowed and every tie (between equal-weight edges or between the two
/// ends) may be broken either way. Paths are listed in construction order.
pub fn reachable_solutions(
    node_count: usize,
    edges: &[(usize, usize, f64)],
    mode: GrowthMode,
) -> HashSet<Vec<Vec<usize>>> {
    struct Search<'a> {
        node_count: usize,
        edges: &'a [(usize, usize, f64)],
        mode: GrowthMode,
        out: HashSet<Vec<Vec<usize>>>,
    }

    impl Search<'_> {
        fn better(&self, a: f64, b: f64) -> bool {
            match self.mode {
                GrowthMode::Max => a > b,
                GrowthMode::Min => a < b,
            }
        }

        /// Unused edges at `node` carrying the preferred weight.
        fn extremes(&self, used: &[bool], node: usize) -> Vec<(usize, f64)> {
            let mut best: Vec<(usize, f64)> = Vec::new();
            for (id, &(a, b, w)) in self.edges.iter().enumerate() {
                if used[id] || (a != node && b != node) {
                    continue;
                }
                match best.first() {
                    None => best.push((id, w)),
                    Some(&(_, bw)) if self.better(w, bw) => best = vec![(id, w)],
                    Some(&(_, bw)) if w == bw => best.push((id, w)),
                    _ => {}
                }
            }
            best
        }

        fn other(&self, id: usize, node: usize) -> usize {
            let (a, b, _) = self.edges[id];
            if a == node {
                b
            } else {
                a
            }
        }

        fn start(&mut self, used: &mut Vec<bool>, done: &mut Vec<Vec<usize>>) {
            if used.iter().all(|&u| u) {
                self.out.insert(done.clone());
                return;
            }
            for node in 0..self.node_count {
                for (id, _) in self.extremes(used, node) {
                    used[id] = true;
                    let mut walk = vec![node, self.other(id, node)];
                    let mut ids = vec![id];
                    self.grow(used, done, &mut walk, &mut ids);
                    used[id] = false;
                }
            }
        }

        fn grow(
            &mut self,
            used: &mut Vec<bool>,
            done: &mut Vec<Vec<usize>>,
            walk: &mut Vec<usize>,
            ids: &mut Vec<usize>,
        ) {
            let head = walk[0];
            let tail = *walk.last().unwrap();
            let at_tail = self.extremes(used, tail);
            let at_head = self.extremes(used, head);
            if at_tail.is_empty() && at_head.is_empty() {
                done.push(canonical_path(ids));
                self.start(used, done);
                done.pop();
                return;
            }
            let wt = at_tail.first().map(|c| c.1);
            let wh = at_head.first().map(|c| c.1);
            let target = match (wt, wh) {
                (Some(t), None) => t,
                (None, Some(h)) => h,
                (Some(t), Some(h)) => {
                    if self.better(h, t) {
                        h
                    } else {
                        t
                    }
                }
                (None, None) => unreachable!(),
            };
            for (id, w) in at_tail {
                if w == target {
                    used[id] = true;
                    walk.push(self.other(id, tail));
                    ids.push(id);
                    self.grow(used, done, walk, ids);
                    ids.pop();
                    walk.pop();
                    used[id] = false;
                }
            }
            for (id, w) in at_head {
                if w == target {
                    used[id] = true;
                    walk.insert(0, self.other(id, head));
                    ids.insert(0, id);
                    self.grow(used, done, walk, ids);
                    ids.remove(0);
                    walk.remove(0);
                    used[id] = false;
                }
            }
        }
    }

    let mut search = Search { node_count, edges, mode, out: HashSet::new() };
    search.start(&mut vec![false; edges.len()], &mut Vec::new());
    search.out
}

/// Canonical form of a small graph: the smallest sorted edge list over all
/// relabelings that order nodes by non-increasing degree.
fn canonical_edges(n: usize, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut degree = vec![0usize; n];
    for &(a, b) in edges {
        degree[a] += 1;
        degree[b] += 1;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(degree[v]));
    // groups of equal degree may be permuted among themselves
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &v in &order {
        match groups.last_mut() {
            Some(g) if degree[g[0]] == degree[v] => g.push(v),
            _ => groups.push(vec![v]),
        }
    }
    let mut best: Option<Vec<(usize, usize)>> = None;
    let mut label = vec![0usize; n];
    fn assign(
        groups: &[Vec<usize>],
        g: usize,
        next: usize,
        label: &mut Vec<usize>,
        edges: &[(usize, usize)],
        best: &mut Option<Vec<(usize, usize)>>,
    ) {
        if g == groups.len() {
            let mut e: Vec<(usize, usize)> =
                edges.iter().map(|&(a, b)| (label[a].min(label[b]), label[a].max(label[b]))).collect();
            e.sort_unstable();
            if best.as_ref().is_none_or(|b| e < *b) {
                *best = Some(e);
            }
            return;
        }
        permute(0, &mut groups[g].clone(), &mut |perm| {
            for (k, &v) in perm.iter().enumerate() {
                label[v] = next + k;
            }
            assign(groups, g + 1, next + perm.len(), label, edges, best);
        });
    }
    assign(&groups, 0, 0, &mut label, edges, &mut best);
    best.unwrap_or_default()
}

fn permute(k: usize, items: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(k + 1, items, f);
        items.swap(k, i);
    }
}

/// All connected simple graphs with 1..=`max_edges` edges, one per isomorphism
/// class, as `(node_count, edges)`. Built by adding one edge at a time.
pub fn connected_graphs_up_to(max_edges: usize) -> Vec<(usize, Vec<(usize, usize)>)> {
    let mut all: Vec<(usize, Vec<(usize, usize)>)> = Vec::new();
    let mut seen: BTreeSet<(usize, Vec<(usize, usize)>)> = BTreeSet::new();
    let mut frontier = vec![(2usize, vec![(0usize, 1usize)])];
    seen.insert(frontier[0].clone());
    all.push(frontier[0].clone());
    for _ in 1..max_edges {
        let mut next = Vec::new();
        for (n, edges) in &frontier {
            let present: HashSet<(usize, usize)> = edges.iter().copied().collect();
            let mut candidates = Vec::new();
            for a in 0..*n {
                for b in a + 1..*n {
                    if !present.contains(&(a, b)) {
                        candidates.push((*n, (a, b)));
                    }
                }
                candidates.push((n + 1, (a, *n)));
            }
            for (m, e) in candidates {
                let mut grown = edges.clone();
                grown.push(e);
                let key = (m, canonical_edges(m, &grown));
                if seen.insert(key.clone()) {
                    next.push(key.clone());
                    all.push(key);
                }
            }
        }
        frontier = next;
    }
    all
}

/// Honeycomb struts inside an axis-aligned rectangle, computed by brute force:
/// every hexagon of a generous grid is clipped edge by edge, pieces shorter than
/// `1e-9` are dropped and shared edges are counted once. Returns the clipped
/// pieces.
pub fn brute_force_honeycomb(r: f64, x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<(Point3, Point3)> {
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let reach = ((x1 - x0).max(y1 - y0) / r) as i64 + 3;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for i in -reach..=reach {
        for j in -2 * reach..=2 * reach {
            let hx = cx + 1.5 * r * i as f64;
            let hy = cy + 3f64.sqrt() * r * (j as f64 + i as f64 / 2.0);
            for k in 0..6 {
                let t0 = std::f64::consts::PI / 3.0 * k as f64;
                let t1 = std::f64::consts::PI / 3.0 * (k + 1) as f64;
                let p = (hx + r * t0.cos(), hy + r * t0.sin());
                let q = (hx + r * t1.cos(), hy + r * t1.sin());
                // identify shared edges by their rounded midpoint
                let key = (((p.0 + q.0) * 5e5).round() as i64, ((p.1 + q.1) * 5e5).round() as i64);
                if !seen.insert(key) {
                    continue;
                }
                if let Some((a, b)) = liang_barsky(p, q, x0, y0, x1, y1) {
                    let (a, b) = (Point3::new(a.0, a.1, 0.0), Point3::new(b.0, b.1, 0.0));
                    if a.distance(&b) > 1e-9 {
                        out.push((a, b));
                    }
                }
            }
        }
    }
    out
}

fn liang_barsky(p: (f64, f64), q: (f64, f64), x0: f64, y0: f64, x1: f64, y1: f64) -> Option<((f64, f64), (f64, f64))> {
    let (dx, dy) = (q.0 - p.0, q.1 - p.1);
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (pk, qk) in [(-dx, p.0 - x0), (dx, x1 - p.0), (-dy, p.1 - y0), (dy, y1 - p.1)] {
        if pk == 0.0 {
            if qk < -1e-12 {
                return None;
            }
        } else {
            let t = qk / pk;
            if pk < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
    }
    (t0 <= t1).then_some(((p.0 + t0 * dx, p.1 + t0 * dy), (p.0 + t1 * dx, p.1 + t1 * dy)))
}

/// Whether two segments cross at a point interior to both.
pub fn segments_cross(a: (Point3, Point3), b: (Point3, Point3)) -> bool {
    let orient = |p: Point3, q: Point3, r: Point3| (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    let eps = 1e-9;
    let d1 = orient(a.0, a.1, b.0);
    let d2 = orient(a.0, a.1, b.1);
    let d3 = orient(b.0, b.1, a.0);
    let d4 = orient(b.0, b.1, a.1);
    ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))
}

pub fn layer_pieces(layer: &Layer) -> Vec<(Point3, Point3)> {
    layer.segments.iter().map(|s| layer.segment_endpoints(s)).collect()
}

/// Expand `(value, count)` bins into a flat sample list.
pub fn expand(bins: &[(f64, f64)]) -> Vec<f64> {
    bins.iter().flat_map(|&(x, f)| std::iter::repeat_n(x, f as usize)).collect()
}

/// Mean and population standard deviation with a two-pass sum.
pub fn flat_mean_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Extrusion for `length` mm evaluated with the steps reordered.
pub fn reference_e(length: f64, lt: f64, em: f64, dn: f64, fd: f64, k: f64) -> f64 {
    let area_ratio = (dn / fd) * (lt / fd);
    k * length * em * area_ratio * 4.0 / std::f64::consts::PI
}
