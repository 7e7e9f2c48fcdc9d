//! Randomized greedy decomposition of a lattice graph into continuous paths.
//!
//! One *solution* covers every edge exactly once with non-branching walks. A walk
//! starts at a random incomplete node, takes that node's heaviest (MAX) or lightest
//! (MIN) unused edge, and then keeps growing from whichever of its two ends offers
//! the extreme-weight unused edge. It stops when neither end has an unused edge.
//! A node is complete once all its incident edges are used.
//!
//! [`optimize`] repeats the construction with independent random streams, scores
//! each solution with [`path_score`] and keeps the best and worst.
//!
//! Tie rules: equal weights resolve to the lower edge id; if both ends offer the
//! same edge (or two edges of equal weight and id, which only happens for the same
//! edge) the tail end wins. The tail is the end reached by the first edge.

use std::cmp::Ordering;
use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{path_count_lower_bound, EdgeId, LatticeGraph, NodeId};

#[derive(Debug, Error, PartialEq)]
pub enum OptimizerError {
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
    #[error("graph has no edges to cover")]
    EmptyGraph,
    #[error("score is undefined for a solution without paths or length")]
    EmptySolution,
    #[error("could not start worker pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthMode {
    /// Prefer the longest unused incident edge.
    Max,
    /// Prefer the shortest unused incident edge.
    Min,
}

impl GrowthMode {
    /// `Less` when `a` is preferred over `b`.
    #[inline]
    fn rank(self, a: f64, b: f64) -> Ordering {
        match self {
            GrowthMode::Max => b.total_cmp(&a),
            GrowthMode::Min => a.total_cmp(&b),
        }
    }
}

impl std::str::FromStr for GrowthMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "max" | "maximum" => Ok(GrowthMode::Max),
            "min" | "minimum" => Ok(GrowthMode::Min),
            other => Err(format!("unknown mode {other:?}, expected max or min")),
        }
    }
}

impl std::fmt::Display for GrowthMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GrowthMode::Max => "max",
            GrowthMode::Min => "min",
        })
    }
}

/// A continuous walk over distinct edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub nodes: Vec<NodeId>,
    pub edge_ids: Vec<EdgeId>,
    pub length_mm: f64,
    pub num_edges: usize,
}

impl Path {
    /// Assemble from a node walk and its edges; the length is summed in walk order.
    pub fn new(graph: &LatticeGraph, nodes: Vec<NodeId>, edge_ids: Vec<EdgeId>) -> Path {
        debug_assert_eq!(nodes.len(), edge_ids.len() + 1);
        let length_mm = edge_ids.iter().map(|&e| graph.edge(e).weight).sum();
        let num_edges = edge_ids.len();
        Path { nodes, edge_ids, length_mm, num_edges }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_closed(&self) -> bool {
        self.nodes.len() > 2 && self.nodes.first() == self.nodes.last()
    }
}

/// Quality of a set of paths: `Σ_i (length_i · edges_i) / (total_length · path_count)`.
///
/// Evaluated as `Σ_i (length_i / total_length) · edges_i / path_count`, which is the
/// same quantity but returns exactly `E` for a single path of `E` edges.
pub fn path_score(paths: impl IntoIterator<Item = (f64, usize)> + Clone) -> Result<f64, OptimizerError> {
    let (total_length, count) = paths.clone().into_iter().fold((0.0, 0usize), |(l, c), (len, _)| (l + len, c + 1));
    if count == 0 || total_length.is_nan() || total_length <= 0.0 {
        return Err(OptimizerError::EmptySolution);
    }
    let weighted: f64 = paths.into_iter().map(|(len, edges)| len / total_length * edges as f64).sum();
    Ok(weighted / count as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub paths: Vec<Path>,
    pub total_length_mm: f64,
    pub total_paths: usize,
    pub total_edges: usize,
    pub score: f64,
}

impl Solution {
    pub fn from_paths(paths: Vec<Path>) -> Result<Solution, OptimizerError> {
        let score = path_score(paths.iter().map(|p| (p.length_mm, p.num_edges)))?;
        Ok(Solution {
            total_length_mm: paths.iter().map(|p| p.length_mm).sum(),
            total_paths: paths.len(),
            total_edges: paths.iter().map(|p| p.num_edges).sum(),
            score,
            paths,
        })
    }

    /// Order paths by edge count, then length (both descending), then first node.
    pub fn sort_paths(&mut self) {
        self.paths.sort_by(|a, b| {
            b.num_edges
                .cmp(&a.num_edges)
                .then_with(|| b.length_mm.total_cmp(&a.length_mm))
                .then_with(|| a.nodes[0].cmp(&b.nodes[0]))
        });
        self.total_length_mm = self.paths.iter().map(|p| p.length_mm).sum();
    }
}

/// Standalone form of the score for callers holding a [`Solution`].
pub fn score(solution: &Solution) -> Result<f64, OptimizerError> {
    path_score(solution.paths.iter().map(|p| (p.length_mm, p.num_edges)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub iterations: usize,
    pub mode: GrowthMode,
    pub master_seed: u64,
    /// A path is long for LTS/OE when it has at least this many nodes.
    pub long_path_min_nodes: usize,
    /// Report classification: long from this many nodes.
    pub classify_long_min_nodes: usize,
    /// Report classification: medium from this many nodes, short below.
    pub classify_medium_min_nodes: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            iterations: 500,
            mode: GrowthMode::Max,
            master_seed: 0,
            long_path_min_nodes: 5,
            classify_long_min_nodes: 16,
            classify_medium_min_nodes: 5,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        if self.iterations == 0 {
            return Err(OptimizerError::InvalidConfig("iterations must be at least 1".into()));
        }
        if self.long_path_min_nodes < 2 {
            return Err(OptimizerError::InvalidConfig("long_path_min_nodes must be at least 2".into()));
        }
        if self.classify_medium_min_nodes < 2 || self.classify_long_min_nodes <= self.classify_medium_min_nodes {
            return Err(OptimizerError::InvalidConfig(format!(
                "classification thresholds must satisfy 2 <= medium ({}) < long ({})",
                self.classify_medium_min_nodes, self.classify_long_min_nodes
            )));
        }
        Ok(())
    }
}

/// Random stream for iteration `k`: ChaCha8 keyed by the master seed, on stream `k`.
pub fn iteration_rng(master_seed: u64, iteration: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(iteration);
    rng
}

struct Growth<'g> {
    graph: &'g LatticeGraph,
    mode: GrowthMode,
    used: Vec<bool>,
    remaining: Vec<usize>,
    incomplete: Vec<NodeId>,
    slot: Vec<usize>,
}

impl<'g> Growth<'g> {
    fn new(graph: &'g LatticeGraph, mode: GrowthMode) -> Self {
        let n = graph.node_count();
        let remaining: Vec<usize> = (0..n).map(|v| graph.degree(v)).collect();
        let incomplete: Vec<NodeId> = (0..n).filter(|&v| remaining[v] > 0).collect();
        let mut slot = vec![usize::MAX; n];
        for (i, &v) in incomplete.iter().enumerate() {
            slot[v] = i;
        }
        Growth { graph, mode, used: vec![false; graph.edge_count()], remaining, incomplete, slot }
    }

    /// Preferred unused edge at `node`; incident lists are in id order, so the
    /// first extreme found has the lowest id.
    fn extreme_edge(&self, node: NodeId) -> Option<(EdgeId, f64)> {
        let mut best: Option<(EdgeId, f64)> = None;
        for &e in self.graph.incident(node) {
            if self.used[e] {
                continue;
            }
            let w = self.graph.edge(e).weight;
            if best.is_none_or(|(_, bw)| self.mode.rank(w, bw) == Ordering::Less) {
                best = Some((e, w));
            }
        }
        best
    }

    fn complete(&mut self, node: NodeId) {
        let i = self.slot[node];
        let last = *self.incomplete.last().expect("node is incomplete");
        self.incomplete.swap_remove(i);
        if last != node {
            self.slot[last] = i;
        }
        self.slot[node] = usize::MAX;
    }

    fn consume(&mut self, e: EdgeId) {
        self.used[e] = true;
        let edge = *self.graph.edge(e);
        for node in [edge.u, edge.v] {
            self.remaining[node] -= 1;
            if self.remaining[node] == 0 {
                self.complete(node);
            }
        }
    }

    fn grow_path<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Path {
        let start = self.incomplete[rng.gen_range(0..self.incomplete.len())];
        let (first, _) = self.extreme_edge(start).expect("incomplete node has an unused edge");
        self.consume(first);
        let mut nodes = VecDeque::from([start, self.graph.edge(first).other(start)]);
        let mut edges = VecDeque::from([first]);
        loop {
            let head = nodes[0];
            let tail = nodes[nodes.len() - 1];
            let at_tail = self.extreme_edge(tail);
            let at_head = self.extreme_edge(head);
            let grow_tail = match (at_tail, at_head) {
                (None, None) => break,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (Some((et, wt)), Some((eh, wh))) => match self.mode.rank(wt, wh) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => et <= eh,
                },
            };
            if grow_tail {
                let (e, _) = at_tail.expect("tail candidate");
                self.consume(e);
                nodes.push_back(self.graph.edge(e).other(tail));
                edges.push_back(e);
            } else {
                let (e, _) = at_head.expect("head candidate");
                self.consume(e);
                nodes.push_front(self.graph.edge(e).other(head));
                edges.push_front(e);
            }
        }
        Path::new(self.graph, nodes.into(), edges.into())
    }
}

/// One randomized greedy decomposition of every edge of `graph` into paths, in
/// construction order.
pub fn build_solution<R: Rng + ?Sized>(
    graph: &LatticeGraph,
    mode: GrowthMode,
    rng: &mut R,
) -> Result<Solution, OptimizerError> {
    if graph.edge_count() == 0 {
        return Err(OptimizerError::EmptyGraph);
    }
    let mut growth = Growth::new(graph, mode);
    let mut paths = Vec::new();
    while !growth.incomplete.is_empty() {
        paths.push(growth.grow_path(rng));
    }
    Solution::from_paths(paths)
}

/// Path counts by node-count class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PathClassification {
    pub long: usize,
    pub medium: usize,
    pub short: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathClass {
    Long,
    Medium,
    Short,
}

impl PathClass {
    pub fn of(node_count: usize, config: &OptimizerConfig) -> PathClass {
        if node_count >= config.classify_long_min_nodes {
            PathClass::Long
        } else if node_count >= config.classify_medium_min_nodes {
            PathClass::Medium
        } else {
            PathClass::Short
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PathClass::Long => "long",
            PathClass::Medium => "medium",
            PathClass::Short => "short",
        }
    }
}

pub fn classify_paths(solution: &Solution, config: &OptimizerConfig) -> PathClassification {
    let mut out = PathClassification::default();
    for p in &solution.paths {
        match PathClass::of(p.node_count(), config) {
            PathClass::Long => out.long += 1,
            PathClass::Medium => out.medium += 1,
            PathClass::Short => out.short += 1,
        }
    }
    out
}

/// Share of the total length printed in long paths (at least `long_min_nodes`
/// nodes), in percent.
pub fn lts_percent(solution: &Solution, long_min_nodes: usize) -> f64 {
    let total: f64 = solution.paths.iter().map(|p| p.length_mm).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let long: f64 = solution.paths.iter().filter(|p| p.node_count() >= long_min_nodes).map(|p| p.length_mm).sum();
    100.0 * long / total
}

/// `100 · Σ_long (length · edges) / (total_length · total_edges)`.
pub fn oe_percent(solution: &Solution, long_min_nodes: usize) -> f64 {
    let total_length: f64 = solution.paths.iter().map(|p| p.length_mm).sum();
    let total_edges: usize = solution.paths.iter().map(|p| p.num_edges).sum();
    if total_length <= 0.0 || total_edges == 0 {
        return 0.0;
    }
    let long: f64 = solution
        .paths
        .iter()
        .filter(|p| p.node_count() >= long_min_nodes)
        .map(|p| p.length_mm / total_length * p.num_edges as f64)
        .sum();
    100.0 * long / total_edges as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: OptimizerConfig,
    pub best: Solution,
    pub best_iteration: usize,
    pub worst: Solution,
    pub worst_iteration: usize,
    pub per_iteration_scores: Vec<f64>,
    pub lts_percent: f64,
    pub oe_best_percent: f64,
    pub oe_worst_percent: f64,
    pub classification: PathClassification,
    /// Eulerian lower bound on the number of paths of any decomposition.
    pub path_lower_bound: usize,
}

fn solve_iteration(graph: &LatticeGraph, config: &OptimizerConfig, k: usize) -> Result<Solution, OptimizerError> {
    build_solution(graph, config.mode, &mut iteration_rng(config.master_seed, k as u64))
}

/// Run `config.iterations` independent constructions on the current rayon pool
/// and summarise them. The result depends only on `(graph, config)`.
pub fn optimize(graph: &LatticeGraph, config: &OptimizerConfig) -> Result<RunReport, OptimizerError> {
    config.validate()?;
    if graph.edge_count() == 0 {
        return Err(OptimizerError::EmptyGraph);
    }
    let scores = (0..config.iterations)
        .into_par_iter()
        .map(|k| solve_iteration(graph, config, k).map(|s| s.score))
        .collect::<Result<Vec<f64>, _>>()?;

    // first index wins ties in both directions
    let (mut best_i, mut worst_i) = (0, 0);
    for (k, &s) in scores.iter().enumerate() {
        if s > scores[best_i] {
            best_i = k;
        }
        if s < scores[worst_i] {
            worst_i = k;
        }
    }
    // Solutions are reproducible from their stream, so only two are rebuilt
    // instead of keeping every iteration alive.
    let mut best = solve_iteration(graph, config, best_i)?;
    let mut worst = solve_iteration(graph, config, worst_i)?;
    best.sort_paths();
    worst.sort_paths();

    Ok(RunReport {
        lts_percent: lts_percent(&best, config.long_path_min_nodes),
        oe_best_percent: oe_percent(&best, config.long_path_min_nodes),
        oe_worst_percent: oe_percent(&worst, config.long_path_min_nodes),
        classification: classify_paths(&best, config),
        path_lower_bound: path_count_lower_bound(graph),
        config: config.clone(),
        best,
        best_iteration: best_i,
        worst,
        worst_iteration: worst_i,
        per_iteration_scores: scores,
    })
}

/// [`optimize`] on a dedicated pool of `threads` workers (0 = rayon default).
pub fn optimize_with_threads(
    graph: &LatticeGraph,
    config: &OptimizerConfig,
    threads: usize,
) -> Result<RunReport, OptimizerError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| OptimizerError::ThreadPool(e.to_string()))?;
    pool.install(|| optimize(graph, config))
}
