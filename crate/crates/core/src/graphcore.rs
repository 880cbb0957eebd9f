//! Undirected metric graphs and exact shortest-path distances.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::{self, Write};

use thiserror::Error;

pub type VertexId = u32;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("vertex {id} out of range (graph has {count} vertices)")]
    InvalidVertex { id: VertexId, count: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("duplicate edge {0} -- {1}")]
    DuplicateEdge(VertexId, VertexId),
    #[error("edge {a} -- {b} has invalid length {length}")]
    BadLength { a: VertexId, b: VertexId, length: f64 },
}

/// Collects undirected edges before freezing them into a [`MetricGraph`].
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    vertex_count: usize,
    edges: Vec<(VertexId, VertexId, f64)>,
}

impl GraphBuilder {
    pub fn new(vertex_count: usize) -> Self {
        Self {
            vertex_count,
            edges: Vec::new(),
        }
    }

    pub fn with_capacity(vertex_count: usize, edges: usize) -> Self {
        Self {
            vertex_count,
            edges: Vec::with_capacity(edges),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn add_edge(&mut self, a: VertexId, b: VertexId, length: f64) -> &mut Self {
        self.edges.push((a, b, length));
        self
    }

    /// Validates and builds. Edges are stored once per direction.
    pub fn build(self) -> Result<MetricGraph, GraphError> {
        let n = self.vertex_count;
        let mut degree = vec![0usize; n];
        for &(a, b, length) in &self.edges {
            for id in [a, b] {
                if id as usize >= n {
                    return Err(GraphError::InvalidVertex { id, count: n });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if !(length > 0.0 && length.is_finite()) {
                return Err(GraphError::BadLength { a, b, length });
            }
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = 0usize;
        offsets.push(0);
        for d in &degree {
            acc += d;
            offsets.push(acc);
        }
        let mut fill = offsets[..n].to_vec();
        let mut adj = vec![(0u32, 0.0f64); acc];
        for &(a, b, length) in &self.edges {
            adj[fill[a as usize]] = (b, length);
            fill[a as usize] += 1;
            adj[fill[b as usize]] = (a, length);
            fill[b as usize] += 1;
        }
        for v in 0..n {
            let row = &mut adj[offsets[v]..offsets[v + 1]];
            row.sort_by_key(|e| e.0);
            if let Some(w) = row.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(GraphError::DuplicateEdge(v as VertexId, w[0].0));
            }
        }
        let (targets, lengths) = adj.into_iter().unzip();
        Ok(MetricGraph {
            offsets,
            targets,
            lengths,
        })
    }
}

/// Immutable undirected graph with positive edge lengths, stored in
/// compressed-row form with sorted neighbor lists.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
    lengths: Vec<f64>,
}

/// Max degree and edge-length range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformityReport {
    pub max_degree: usize,
    pub min_length: f64,
    pub max_length: f64,
    /// No edges: the length fields hold `+∞` and `0`.
    pub empty: bool,
}

impl MetricGraph {
    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn degree(&self, v: VertexId) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = (VertexId, f64)> + '_ {
        let v = v as usize;
        let r = self.offsets[v]..self.offsets[v + 1];
        self.targets[r.clone()]
            .iter()
            .copied()
            .zip(self.lengths[r].iter().copied())
    }

    /// Length of the edge `a -- b`, if present.
    pub fn edge_length(&self, a: VertexId, b: VertexId) -> Option<f64> {
        let r = self.offsets[a as usize]..self.offsets[a as usize + 1];
        let row = &self.targets[r.clone()];
        row.binary_search(&b).ok().map(|i| self.lengths[r.start + i])
    }

    /// Each undirected edge once, as `(a, b, length)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, f64)> + '_ {
        (0..self.vertex_count() as VertexId).flat_map(move |a| {
            self.neighbors(a)
                .filter(move |&(b, _)| a < b)
                .map(move |(b, l)| (a, b, l))
        })
    }

    fn check(&self, v: VertexId) -> Result<(), GraphError> {
        if (v as usize) < self.vertex_count() {
            Ok(())
        } else {
            Err(GraphError::InvalidVertex {
                id: v,
                count: self.vertex_count(),
            })
        }
    }

    /// Distances from `source` to each of `targets` (in the same order).
    /// Unreachable targets get `+∞`.
    pub fn shortest_path_dist(&self, source: VertexId, targets: &[VertexId]) -> Result<Vec<f64>, GraphError> {
        let mut ws = DijkstraWorkspace::new(self.vertex_count());
        ws.distances_to(self, source, targets)
    }

    /// Distances from `source` to every vertex.
    pub fn distances_from(&self, source: VertexId) -> Result<Vec<f64>, GraphError> {
        self.check(source)?;
        let mut ws = DijkstraWorkspace::new(self.vertex_count());
        ws.run(self, source, None);
        Ok(ws.dist.clone())
    }

    pub fn uniformity_report(&self) -> UniformityReport {
        let max_degree = (0..self.vertex_count() as VertexId)
            .map(|v| self.degree(v))
            .max()
            .unwrap_or(0);
        let (min_length, max_length) = self
            .lengths
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &l| (lo.min(l), hi.max(l)));
        UniformityReport {
            max_degree,
            min_length,
            max_length,
            empty: self.lengths.is_empty(),
        }
    }

    /// Writes the edge list as CSV with header
    /// `x1,y1,layer1,x2,y2,layer2,length`. `label` maps a vertex to its
    /// `(x, y, layer)` fields; rows are oriented so the smaller label comes
    /// first and sorted lexicographically.
    pub fn write_edge_csv<W, F, K>(&self, mut out: W, label: F) -> io::Result<()>
    where
        W: Write,
        F: Fn(VertexId) -> K,
        K: EdgeLabel,
    {
        let mut rows: Vec<(K, K, f64)> = self
            .edges()
            .map(|(a, b, l)| {
                let (la, lb) = (label(a), label(b));
                if la.sort_key() <= lb.sort_key() {
                    (la, lb, l)
                } else {
                    (lb, la, l)
                }
            })
            .collect();
        rows.sort_by(|x, y| {
            x.0.sort_key()
                .cmp(&y.0.sort_key())
                .then_with(|| x.1.sort_key().cmp(&y.1.sort_key()))
        });
        writeln!(out, "x1,y1,layer1,x2,y2,layer2,length")?;
        for (a, b, l) in rows {
            writeln!(out, "{},{},{}", a.fields(), b.fields(), fmt_sig17(l))?;
        }
        Ok(())
    }
}

/// Endpoint label for CSV export.
pub trait EdgeLabel {
    type Key: Ord;
    fn sort_key(&self) -> Self::Key;
    /// `x,y,layer` already joined by commas.
    fn fields(&self) -> String;
}

/// Formats with 17 significant digits (`f64` round-trip precision).
pub fn fmt_sig17(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapItem {
    dist: f64,
    vertex: VertexId,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reusable Dijkstra state. Only the vertices touched by the previous query
/// are reset, so many early-terminating queries on a large graph stay cheap.
#[derive(Debug, Clone)]
pub struct DijkstraWorkspace {
    dist: Vec<f64>,
    settled: Vec<bool>,
    touched: Vec<VertexId>,
    heap: BinaryHeap<HeapItem>,
    wanted: Vec<bool>,
}

impl DijkstraWorkspace {
    pub fn new(vertex_count: usize) -> Self {
        Self {
            dist: vec![f64::INFINITY; vertex_count],
            settled: vec![false; vertex_count],
            touched: Vec::new(),
            heap: BinaryHeap::new(),
            wanted: vec![false; vertex_count],
        }
    }

    fn reset(&mut self) {
        for &v in &self.touched {
            self.dist[v as usize] = f64::INFINITY;
            self.settled[v as usize] = false;
        }
        self.touched.clear();
        self.heap.clear();
    }

    fn run(&mut self, g: &MetricGraph, source: VertexId, mut remaining: Option<usize>) {
        self.reset();
        if self.dist.len() != g.vertex_count() {
            *self = Self::new(g.vertex_count());
        }
        self.dist[source as usize] = 0.0;
        self.touched.push(source);
        self.heap.push(HeapItem {
            dist: 0.0,
            vertex: source,
        });
        while let Some(HeapItem { dist, vertex }) = self.heap.pop() {
            let vi = vertex as usize;
            if self.settled[vi] {
                continue;
            }
            self.settled[vi] = true;
            if let Some(r) = remaining.as_mut() {
                if self.wanted[vi] {
                    *r -= 1;
                    if *r == 0 {
                        return;
                    }
                }
            }
            for (w, l) in g.neighbors(vertex) {
                let wi = w as usize;
                let nd = dist + l;
                if nd < self.dist[wi] {
                    if self.dist[wi].is_infinite() {
                        self.touched.push(w);
                    }
                    self.dist[wi] = nd;
                    self.heap.push(HeapItem { dist: nd, vertex: w });
                }
            }
        }
    }

    /// Distances from `source` to `targets`, stopping once all are settled.
    pub fn distances_to(
        &mut self,
        g: &MetricGraph,
        source: VertexId,
        targets: &[VertexId],
    ) -> Result<Vec<f64>, GraphError> {
        g.check(source)?;
        for &t in targets {
            g.check(t)?;
        }
        if self.wanted.len() != g.vertex_count() {
            *self = Self::new(g.vertex_count());
        }
        let mut distinct = 0;
        for &t in targets {
            if !self.wanted[t as usize] {
                self.wanted[t as usize] = true;
                distinct += 1;
            }
        }
        self.run(g, source, Some(distinct.max(1)));
        let out = targets.iter().map(|&t| self.dist[t as usize]).collect();
        for &t in targets {
            self.wanted[t as usize] = false;
        }
        Ok(out)
    }
}
