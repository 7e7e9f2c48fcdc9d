//! Undirected weighted lattice graph built from a welded layer.
//!
//! Node `i` is point `i` of the layer and edge `k` is segment `k`, so identical
//! layers always produce identical labelling. Edge weights are strut lengths in mm.

use std::collections::{HashSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::lattice::{Layer, Point3};

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("segment {edge} is a self-loop on node {node}")]
    SelfLoop { edge: usize, node: NodeId },
    #[error("segment {edge} duplicates the edge between nodes {u} and {v}")]
    DuplicateEdge { edge: usize, u: NodeId, v: NodeId },
    #[error("segment {edge} references node {node} but the layer has {node_count} points")]
    MissingNode { edge: usize, node: NodeId, node_count: usize },
    #[error("segment {edge} between nodes {u} and {v} has non-positive length {length}")]
    ZeroLength { edge: usize, u: NodeId, v: NodeId, length: f64 },
    #[error("graph invariant violated: {0}")]
    Invariant(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub id: EdgeId,
    /// Smaller endpoint.
    pub u: NodeId,
    /// Larger endpoint.
    pub v: NodeId,
    pub weight: f64,
}

impl Edge {
    /// The endpoint opposite `node`.
    #[inline]
    pub fn other(&self, node: NodeId) -> NodeId {
        if node == self.u {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeGraph {
    node_pos: Vec<Point3>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<EdgeId>>,
}

impl LatticeGraph {
    pub fn node_count(&self) -> usize {
        self.node_pos.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    /// Incident edge ids of `node`, in increasing id order.
    pub fn incident(&self, node: NodeId) -> &[EdgeId] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node].len()
    }

    pub fn node_pos(&self) -> &[Point3] {
        &self.node_pos
    }

    pub fn position(&self, node: NodeId) -> Point3 {
        self.node_pos[node]
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Same topology with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> LatticeGraph {
        let mut g = self.clone();
        for e in &mut g.edges {
            e.weight *= factor;
        }
        g
    }

    /// Build from raw parts; used by tests and by callers assembling graphs
    /// without a layer. Weights are the Euclidean distances between positions.
    pub fn from_edges(node_pos: Vec<Point3>, pairs: &[(NodeId, NodeId)]) -> Result<Self, GraphError> {
        let layer = Layer {
            points: node_pos,
            segments: pairs.iter().map(|&(a, b)| crate::lattice::Segment::new(a, b)).collect(),
            z: 0.0,
            label: String::new(),
        };
        build_graph(&layer)
    }

    /// Build with explicit weights instead of geometric lengths. Node positions
    /// are placed on a line and only serve display purposes.
    pub fn with_weights(node_count: usize, edges: &[(NodeId, NodeId, f64)]) -> Result<Self, GraphError> {
        let node_pos = (0..node_count).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect();
        let mut g = LatticeGraph { node_pos, edges: Vec::new(), adjacency: vec![Vec::new(); node_count] };
        let mut seen = HashSet::new();
        for (id, &(a, b, w)) in edges.iter().enumerate() {
            g.push_edge(id, a, b, w, &mut seen)?;
        }
        g.check_handshake()?;
        Ok(g)
    }

    fn push_edge(
        &mut self,
        id: EdgeId,
        a: NodeId,
        b: NodeId,
        weight: f64,
        seen: &mut HashSet<(NodeId, NodeId)>,
    ) -> Result<(), GraphError> {
        let n = self.node_pos.len();
        for node in [a, b] {
            if node >= n {
                return Err(GraphError::MissingNode { edge: id, node, node_count: n });
            }
        }
        if a == b {
            return Err(GraphError::SelfLoop { edge: id, node: a });
        }
        let (u, v) = (a.min(b), a.max(b));
        if !seen.insert((u, v)) {
            return Err(GraphError::DuplicateEdge { edge: id, u, v });
        }
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(GraphError::ZeroLength { edge: id, u, v, length: weight });
        }
        self.edges.push(Edge { id, u, v, weight });
        self.adjacency[u].push(id);
        self.adjacency[v].push(id);
        Ok(())
    }

    fn check_handshake(&self) -> Result<(), GraphError> {
        let degree_sum: usize = self.adjacency.iter().map(Vec::len).sum();
        if degree_sum != 2 * self.edges.len() {
            return Err(GraphError::Invariant(format!("degree sum {degree_sum} != 2 x {} edges", self.edges.len())));
        }
        Ok(())
    }

    /// JSON-friendly view: node positions and weighted edges.
    pub fn debug_dump(&self) -> GraphDump {
        GraphDump {
            nodes: self
                .node_pos
                .iter()
                .enumerate()
                .map(|(id, p)| DumpNode { id, pos: [p.x, p.y, p.z], degree: self.degree(id) })
                .collect(),
            edges: self.edges.clone(),
            components: components(self).len(),
            odd_degree_nodes: odd_degree_count(self),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DumpNode {
    pub id: NodeId,
    pub pos: [f64; 3],
    pub degree: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphDump {
    pub nodes: Vec<DumpNode>,
    pub edges: Vec<Edge>,
    pub components: usize,
    pub odd_degree_nodes: usize,
}

/// One node per layer point, one edge per segment, weights = segment lengths.
pub fn build_graph(layer: &Layer) -> Result<LatticeGraph, GraphError> {
    let mut g = LatticeGraph {
        node_pos: layer.points.clone(),
        edges: Vec::with_capacity(layer.segments.len()),
        adjacency: vec![Vec::new(); layer.points.len()],
    };
    let mut seen = HashSet::with_capacity(layer.segments.len());
    let n = layer.points.len();
    for (id, s) in layer.segments.iter().enumerate() {
        let weight = if s.a < n && s.b < n { layer.segment_length(s) } else { 0.0 };
        g.push_edge(id, s.a, s.b, weight, &mut seen)?;
    }
    g.check_handshake()?;
    Ok(g)
}

/// Connected components as sorted node lists, ordered by smallest member.
/// Isolated nodes form singleton components.
pub fn components(graph: &LatticeGraph) -> Vec<Vec<NodeId>> {
    let n = graph.node_count();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut comp = Vec::new();
        while let Some(node) = queue.pop_front() {
            comp.push(node);
            for &e in graph.incident(node) {
                let next = graph.edge(e).other(node);
                if !seen[next] {
                    seen[next] = true;
                    queue.push_back(next);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

pub fn odd_degree_count(graph: &LatticeGraph) -> usize {
    (0..graph.node_count()).filter(|&v| graph.degree(v) % 2 == 1).count()
}

/// Minimum number of edge-disjoint trails covering every edge: each component
/// with edges needs `max(1, odd/2)` of them.
pub fn path_count_lower_bound(graph: &LatticeGraph) -> usize {
    components(graph)
        .iter()
        .filter(|comp| comp.iter().any(|&v| graph.degree(v) > 0))
        .map(|comp| {
            let odd = comp.iter().filter(|&&v| graph.degree(v) % 2 == 1).count();
            (odd / 2).max(1)
        })
        .sum()
}
