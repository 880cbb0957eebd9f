//! A bounded-degree graph on ℤ² whose metric stays within a constant of
//! the Euclidean one.
//!
//! ℤ² splits into `L` (`i + j` even) and `L′` (`i + j` odd). On `L` the
//! diagonal edge `(i, j) → (i+1, j+1)` has length `u_j = √2 + β_j` and
//! `(i, j) → (i−1, j+1)` has length `v_j = √2 − β_j`; between rows `m < n`
//! the graph realizes the norm whose dual profile is the average of the
//! rhombus profiles of rows `m..n`. `L′` is the transpose, and every
//! `(i, j) ∈ L` is glued to `(i, j+1) ∈ L′` by an edge of length `M`.

use std::f64::consts::SQRT_2;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::betaseq::{BetaError, BetaSequence};
use crate::graphcore::{fmt_sig17, DijkstraWorkspace, EdgeLabel, GraphBuilder, GraphError, MetricGraph, VertexId};
use crate::profiles::{norm0, DualProfile, Norm2D};

/// `‖e₁‖` of every strip norm.
pub const STRIP_HALF_WIDTH: f64 = SQRT_2;

#[derive(Debug, Error, PartialEq)]
pub enum PlanarError {
    #[error("half-width must be at least 2, got {0}")]
    BoxTooSmall(u32),
    #[error("query margin {margin} must be below the half-width {half_width}")]
    BadMargin { margin: u32, half_width: u32 },
    #[error("point ({0}, {1}) is not in L (i + j must be even)")]
    NotInL(i32, i32),
    #[error("point ({0}, {1}) is outside the query box ±{2}")]
    OutsideQueryBox(i32, i32, u32),
    #[error("point ({0}, {1}) is not a vertex of this graph")]
    NotAVertex(i32, i32),
    #[error("glue length must be positive, got {0}")]
    BadGlue(f64),
    #[error("no glue length configured")]
    MissingGlue,
    #[error("layers were built from different lattice specs")]
    Incompatible,
    #[error("layer graph already contains {0:?}")]
    WrongLayer(LayerSet),
    #[error(transparent)]
    Beta(#[from] BetaError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Which sublattice a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Layer {
    L,
    LPrime,
}

impl Layer {
    pub fn of(i: i32, j: i32) -> Self {
        if (i + j).rem_euclid(2) == 0 {
            Layer::L
        } else {
            Layer::LPrime
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Layer::L => "L",
            Layer::LPrime => "Lp",
        }
    }
}

/// A point of ℤ²; its layer follows from the parity of `i + j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticePoint {
    pub i: i32,
    pub j: i32,
}

impl LatticePoint {
    pub fn new(i: i32, j: i32) -> Self {
        Self { i, j }
    }

    pub fn layer(&self) -> Layer {
        Layer::of(self.i, self.j)
    }

    pub fn euclid(&self, other: &Self) -> f64 {
        f64::from(other.i - self.i).hypot(f64::from(other.j - self.j))
    }
}

impl EdgeLabel for LatticePoint {
    type Key = (i32, i32);

    fn sort_key(&self) -> (i32, i32) {
        (self.i, self.j)
    }

    fn fields(&self) -> String {
        format!("{},{},{}", self.i, self.j, self.layer().as_str())
    }
}

/// Where the row peaks `β_j` come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaSource {
    Sequence(BetaSequence),
    /// Every row gets the same peak; a periodic lattice, for debugging.
    Constant(f64),
}

impl BetaSource {
    pub fn beta(&self, j: i64) -> Result<f64, PlanarError> {
        match self {
            BetaSource::Sequence(s) => Ok(s.beta(j)?),
            BetaSource::Constant(b) => Ok(*b),
        }
    }
}

/// Parameters of the lattice construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    /// Vertices fill the box `[−N, N]²`.
    pub half_width: u32,
    pub betas: BetaSource,
    /// Length `M` of the edges joining `L` to `L′`.
    pub glue_length: Option<f64>,
    /// Queries are restricted to `[−q, q]²` to avoid boundary truncation.
    pub query_margin: u32,
}

impl LatticeSpec {
    pub fn new(half_width: u32, betas: BetaSource) -> Result<Self, PlanarError> {
        if half_width < 2 {
            return Err(PlanarError::BoxTooSmall(half_width));
        }
        Ok(Self {
            half_width,
            betas,
            glue_length: None,
            query_margin: half_width / 2,
        })
    }

    pub fn with_glue(mut self, m: f64) -> Result<Self, PlanarError> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(PlanarError::BadGlue(m));
        }
        self.glue_length = Some(m);
        Ok(self)
    }

    pub fn with_query_margin(mut self, margin: u32) -> Result<Self, PlanarError> {
        if margin >= self.half_width {
            return Err(PlanarError::BadMargin {
                margin,
                half_width: self.half_width,
            });
        }
        self.query_margin = margin;
        Ok(self)
    }

    fn in_box(&self, i: i32, j: i32) -> bool {
        let n = self.half_width as i32;
        i.abs() <= n && j.abs() <= n
    }

    pub fn in_query_box(&self, p: &LatticePoint) -> bool {
        let q = self.query_margin as i32;
        p.i.abs() <= q && p.j.abs() <= q
    }

    /// `β_{−N}, …, β_N`.
    fn row_betas(&self) -> Result<Vec<f64>, PlanarError> {
        let n = i64::from(self.half_width);
        (-n..=n).map(|j| self.betas.beta(j)).collect()
    }
}

/// Which sublattices a [`PlanarGraph`] contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerSet {
    L,
    LPrime,
    Both,
}

impl LayerSet {
    fn contains(self, layer: Layer) -> bool {
        matches!(
            (self, layer),
            (LayerSet::Both, _) | (LayerSet::L, Layer::L) | (LayerSet::LPrime, Layer::LPrime)
        )
    }
}

/// A lattice graph together with its coordinate map.
#[derive(Debug, Clone)]
pub struct PlanarGraph {
    graph: MetricGraph,
    points: Vec<LatticePoint>,
    index: Vec<VertexId>,
    spec: LatticeSpec,
    layers: LayerSet,
}

const ABSENT: VertexId = VertexId::MAX;

impl PlanarGraph {
    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn layers(&self) -> LayerSet {
        self.layers
    }

    pub fn point(&self, v: VertexId) -> LatticePoint {
        self.points[v as usize]
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn vertex(&self, p: LatticePoint) -> Option<VertexId> {
        if !self.spec.in_box(p.i, p.j) {
            return None;
        }
        let id = self.index[dense_slot(self.spec.half_width, p.i, p.j)];
        (id != ABSENT).then_some(id)
    }

    fn vertex_or_err(&self, p: LatticePoint) -> Result<VertexId, PlanarError> {
        self.vertex(p).ok_or(PlanarError::NotAVertex(p.i, p.j))
    }

    /// Graph distance between two lattice points.
    pub fn distance(&self, p: LatticePoint, q: LatticePoint) -> Result<f64, PlanarError> {
        let (a, b) = (self.vertex_or_err(p)?, self.vertex_or_err(q)?);
        Ok(self.graph.shortest_path_dist(a, &[b])?[0])
    }

    /// Edge list CSV (`x1,y1,layer1,x2,y2,layer2,length`).
    pub fn write_edge_csv<W: Write>(&self, out: W) -> io::Result<()> {
        self.graph.write_edge_csv(out, |v| self.point(v))
    }
}

fn dense_slot(half_width: u32, i: i32, j: i32) -> usize {
    let n = half_width as i32;
    let side = (2 * n + 1) as usize;
    (j + n) as usize * side + (i + n) as usize
}

struct Assembly {
    spec: LatticeSpec,
    layers: LayerSet,
    points: Vec<LatticePoint>,
    index: Vec<VertexId>,
}

impl Assembly {
    fn new(spec: &LatticeSpec, layers: LayerSet) -> Self {
        let n = spec.half_width as i32;
        let side = (2 * n + 1) as usize;
        let mut index = vec![ABSENT; side * side];
        let mut points = Vec::new();
        // Row-major over sorted coordinates: ids are reproducible.
        for j in -n..=n {
            for i in -n..=n {
                if layers.contains(Layer::of(i, j)) {
                    index[dense_slot(spec.half_width, i, j)] = points.len() as VertexId;
                    points.push(LatticePoint::new(i, j));
                }
            }
        }
        Self {
            spec: *spec,
            layers,
            points,
            index,
        }
    }

    fn id(&self, i: i32, j: i32) -> Option<VertexId> {
        if !self.spec.in_box(i, j) {
            return None;
        }
        let id = self.index[dense_slot(self.spec.half_width, i, j)];
        (id != ABSENT).then_some(id)
    }

    fn add_layer_edges(&self, b: &mut GraphBuilder, layer: Layer, betas: &[f64]) {
        let n = self.spec.half_width as i32;
        let beta = |k: i32| betas[(k + n) as usize];
        for p in self.points.iter().filter(|p| p.layer() == layer) {
            let (i, j) = (p.i, p.j);
            let from = self.index[dense_slot(self.spec.half_width, i, j)];
            match layer {
                Layer::L => {
                    // Row-indexed: u_j up-right, v_j up-left.
                    if let Some(to) = self.id(i + 1, j + 1) {
                        b.add_edge(from, to, SQRT_2 + beta(j));
                    }
                    if let Some(to) = self.id(i - 1, j + 1) {
                        b.add_edge(from, to, SQRT_2 - beta(j));
                    }
                }
                Layer::LPrime => {
                    // Column-indexed transpose: u_i up-right, v_i down-right.
                    if let Some(to) = self.id(i + 1, j + 1) {
                        b.add_edge(from, to, SQRT_2 + beta(i));
                    }
                    if let Some(to) = self.id(i + 1, j - 1) {
                        b.add_edge(from, to, SQRT_2 - beta(i));
                    }
                }
            }
        }
    }

    fn add_glue(&self, b: &mut GraphBuilder, m: f64) {
        for p in self.points.iter().filter(|p| p.layer() == Layer::L) {
            if let Some(to) = self.id(p.i, p.j + 1) {
                let from = self.index[dense_slot(self.spec.half_width, p.i, p.j)];
                b.add_edge(from, to, m);
            }
        }
    }

    fn finish(self, b: GraphBuilder) -> Result<PlanarGraph, PlanarError> {
        Ok(PlanarGraph {
            graph: b.build()?,
            points: self.points,
            index: self.index,
            spec: self.spec,
            layers: self.layers,
        })
    }
}

fn build_layer(spec: &LatticeSpec, layer: Layer) -> Result<PlanarGraph, PlanarError> {
    let set = match layer {
        Layer::L => LayerSet::L,
        Layer::LPrime => LayerSet::LPrime,
    };
    let asm = Assembly::new(spec, set);
    let betas = spec.row_betas()?;
    let mut b = GraphBuilder::with_capacity(asm.points.len(), 2 * asm.points.len());
    asm.add_layer_edges(&mut b, layer, &betas);
    asm.finish(b)
}

/// The `L` layer: diagonal edges with row-indexed lengths.
pub fn build_l(spec: &LatticeSpec) -> Result<PlanarGraph, PlanarError> {
    build_layer(spec, Layer::L)
}

/// The `L′` layer: the transposed recipe with column-indexed lengths.
pub fn build_lprime(spec: &LatticeSpec) -> Result<PlanarGraph, PlanarError> {
    build_layer(spec, Layer::LPrime)
}

/// Joins an `L` graph and an `L′` graph with edges `(i, j) → (i, j+1)` of
/// length `m` for every `(i, j) ∈ L`.
pub fn glue(l: &PlanarGraph, lprime: &PlanarGraph, m: f64) -> Result<PlanarGraph, PlanarError> {
    if l.layers != LayerSet::L {
        return Err(PlanarError::WrongLayer(l.layers));
    }
    if lprime.layers != LayerSet::LPrime {
        return Err(PlanarError::WrongLayer(lprime.layers));
    }
    if l.spec.half_width != lprime.spec.half_width || l.spec.betas != lprime.spec.betas {
        return Err(PlanarError::Incompatible);
    }
    if !(m > 0.0 && m.is_finite()) {
        return Err(PlanarError::BadGlue(m));
    }
    let spec = LatticeSpec {
        glue_length: Some(m),
        ..l.spec
    };
    let asm = Assembly::new(&spec, LayerSet::Both);
    let mut b = GraphBuilder::with_capacity(asm.points.len(), 3 * asm.points.len());
    for part in [l, lprime] {
        for (x, y, len) in part.graph.edges() {
            let (p, q) = (part.point(x), part.point(y));
            let (a, c) = (asm.id(p.i, p.j).expect("same box"), asm.id(q.i, q.j).expect("same box"));
            b.add_edge(a, c, len);
        }
    }
    asm.add_glue(&mut b, m);
    asm.finish(b)
}

/// Builds both layers and glues them with `spec.glue_length`.
pub fn build_gamma(spec: &LatticeSpec) -> Result<PlanarGraph, PlanarError> {
    let m = spec.glue_length.ok_or(PlanarError::MissingGlue)?;
    if !(m > 0.0 && m.is_finite()) {
        return Err(PlanarError::BadGlue(m));
    }
    let asm = Assembly::new(spec, LayerSet::Both);
    let betas = spec.row_betas()?;
    let mut b = GraphBuilder::with_capacity(asm.points.len(), 3 * asm.points.len());
    asm.add_layer_edges(&mut b, Layer::L, &betas);
    asm.add_layer_edges(&mut b, Layer::LPrime, &betas);
    asm.add_glue(&mut b, m);
    asm.finish(b)
}

/// Distance in the infinite `L` lattice from the averaged-profile formula:
/// `D·|Δx|` on a common row, otherwise the norm with dual profile
/// `h^{m,n}` evaluated at `q − p`.
pub fn closed_form_dl(p: LatticePoint, q: LatticePoint, betas: &BetaSource) -> Result<f64, PlanarError> {
    for pt in [p, q] {
        if pt.layer() != Layer::L {
            return Err(PlanarError::NotInL(pt.i, pt.j));
        }
    }
    let dx = f64::from(q.i - p.i);
    if p.j == q.j {
        return Ok(STRIP_HALF_WIDTH * dx.abs());
    }
    let (lo, hi) = if p.j < q.j { (p, q) } else { (q, p) };
    let window: Vec<f64> = (i64::from(lo.j)..i64::from(hi.j))
        .map(|j| betas.beta(j))
        .collect::<Result<_, _>>()?;
    let profile = DualProfile::averaged_from(STRIP_HALF_WIDTH, &window).map_err(|_| PlanarError::NotInL(p.i, p.j))?;
    let norm = Norm2D::Dual(profile);
    Ok(norm.eval(f64::from(hi.i - lo.i), f64::from(hi.j - lo.j)))
}

/// `max |closed_form_dl − ‖·‖⁰|` over `samples` random `L`-pairs in the
/// query box of `spec`. Deterministic in `seed`.
pub fn estimate_c(spec: &LatticeSpec, samples: usize, seed: u64) -> Result<f64, PlanarError> {
    let q = spec.query_margin as i32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw_l = |rng: &mut ChaCha8Rng| loop {
        let p = LatticePoint::new(rng.random_range(-q..=q), rng.random_range(-q..=q));
        if p.layer() == Layer::L {
            return p;
        }
    };
    let pairs: Vec<(LatticePoint, LatticePoint)> = (0..samples).map(|_| (draw_l(&mut rng), draw_l(&mut rng))).collect();
    let errs: Vec<f64> = pairs
        .par_iter()
        .map(|&(p, r)| {
            let d = closed_form_dl(p, r, &spec.betas)?;
            Ok((d - norm0(f64::from(r.i - p.i), f64::from(r.j - p.j))).abs())
        })
        .collect::<Result<_, PlanarError>>()?;
    Ok(errs.into_iter().fold(0.0, f64::max))
}

/// `M = ⌈2Ĉ + 1⌉`.
pub fn glue_from_c(c_hat: f64) -> f64 {
    (2.0 * c_hat + 1.0).ceil()
}

/// `count` random pairs in the query box, drawn as `⌈√count⌉` random
/// sources each paired with random targets so that one shortest-path tree
/// serves many pairs. Points are uniform over both layers.
pub fn sample_pairs(spec: &LatticeSpec, count: usize, seed: u64) -> Vec<(LatticePoint, LatticePoint)> {
    let q = spec.query_margin as i32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sources = ((count as f64).sqrt().ceil() as usize).max(1);
    let per = count.div_ceil(sources);
    let mut out = Vec::with_capacity(count);
    'outer: for _ in 0..sources {
        let p = LatticePoint::new(rng.random_range(-q..=q), rng.random_range(-q..=q));
        for _ in 0..per {
            if out.len() == count {
                break 'outer;
            }
            let r = LatticePoint::new(rng.random_range(-q..=q), rng.random_range(-q..=q));
            out.push((p, r));
        }
    }
    out
}

/// One verified pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRow {
    pub p: LatticePoint,
    pub q: LatticePoint,
    pub euclid: f64,
    pub graph_dist: f64,
    /// `graph_dist − euclid`.
    pub err: f64,
}

/// Error statistics over one distance decile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecileStat {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub max_abs_err: f64,
}

/// Per-pair errors and their aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport<R> {
    pub rows: Vec<R>,
    /// Ten equal-count groups of the pairs with positive distance, nearest first.
    pub deciles: Vec<DecileStat>,
    pub max_abs_err: f64,
    pub min_err: f64,
    pub max_err: f64,
}

impl<R> ErrorReport<R> {
    /// Farthest-decile max error over nearest-decile max error.
    pub fn growth_ratio(&self) -> f64 {
        match (self.deciles.first(), self.deciles.last()) {
            (Some(first), Some(last)) if first.max_abs_err > 0.0 => last.max_abs_err / first.max_abs_err,
            (Some(_), Some(last)) if last.max_abs_err == 0.0 => 1.0,
            _ => f64::INFINITY,
        }
    }
}

/// Splits `(distance, |err|)` pairs with positive distance into ten
/// equal-count deciles.
pub fn decile_stats(points: &[(f64, f64)]) -> Vec<DecileStat> {
    let mut pos: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0 > 0.0).collect();
    pos.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pos.is_empty() {
        return Vec::new();
    }
    let n = pos.len();
    let groups = n.min(10);
    (0..groups)
        .map(|g| {
            let chunk = &pos[g * n / groups..(g + 1) * n / groups];
            DecileStat {
                lo: chunk[0].0,
                hi: chunk[chunk.len() - 1].0,
                count: chunk.len(),
                max_abs_err: chunk.iter().map(|c| c.1).fold(0.0, f64::max),
            }
        })
        .collect()
}

pub(crate) fn summarize<R>(rows: Vec<R>, dist_err: impl Fn(&R) -> (f64, f64)) -> ErrorReport<R> {
    let pts: Vec<(f64, f64)> = rows.iter().map(&dist_err).collect();
    let deciles = decile_stats(&pts.iter().map(|&(d, e)| (d, e.abs())).collect::<Vec<_>>());
    let (min_err, max_err) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, e)| {
            (lo.min(e), hi.max(e))
        });
    let max_abs_err = pts.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    ErrorReport {
        rows,
        deciles,
        max_abs_err,
        min_err,
        max_err,
    }
}

pub type PlanarReport = ErrorReport<PairRow>;

/// Compares graph distances with Euclidean distances on the given pairs,
/// which must all lie in the query box.
pub fn verify_planar(g: &PlanarGraph, pairs: &[(LatticePoint, LatticePoint)]) -> Result<PlanarReport, PlanarError> {
    let spec = g.spec();
    for (p, q) in pairs {
        for pt in [p, q] {
            if !spec.in_query_box(pt) {
                return Err(PlanarError::OutsideQueryBox(pt.i, pt.j, spec.query_margin));
            }
            g.vertex_or_err(*pt)?;
        }
    }
    // One Dijkstra per distinct source.
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by_key(|&k| pairs[k].0);
    let mut groups: Vec<(LatticePoint, Vec<usize>)> = Vec::new();
    for k in order {
        match groups.last_mut() {
            Some((src, members)) if *src == pairs[k].0 => members.push(k),
            _ => groups.push((pairs[k].0, vec![k])),
        }
    }
    let n = g.graph.vertex_count();
    let per_group: Vec<Vec<(usize, f64)>> = groups
        .par_iter()
        .map_init(
            || DijkstraWorkspace::new(n),
            |ws, (src, members)| {
                let s = g.vertex(*src).expect("checked");
                let targets: Vec<VertexId> = members
                    .iter()
                    .map(|&k| g.vertex(pairs[k].1).expect("checked"))
                    .collect();
                let d = ws.distances_to(&g.graph, s, &targets)?;
                Ok(members.iter().copied().zip(d).collect())
            },
        )
        .collect::<Result<_, GraphError>>()?;
    let mut dist = vec![0.0; pairs.len()];
    for (k, d) in per_group.into_iter().flatten() {
        dist[k] = d;
    }
    let mut rows: Vec<PairRow> = pairs
        .iter()
        .zip(dist)
        .map(|(&(p, q), graph_dist)| {
            let euclid = p.euclid(&q);
            PairRow {
                p,
                q,
                euclid,
                graph_dist,
                err: graph_dist - euclid,
            }
        })
        .collect();
    rows.sort_by_key(|r| (r.p, r.q));
    Ok(summarize(rows, |r| (r.euclid, r.err)))
}

impl PlanarReport {
    /// CSV with header `px,py,player,qx,qy,qlayer,euclid,graph_dist,err`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "px,py,player,qx,qy,qlayer,euclid,graph_dist,err")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.p.fields(),
                r.q.fields(),
                fmt_sig17(r.euclid),
                fmt_sig17(r.graph_dist),
                fmt_sig17(r.err)
            )?;
        }
        Ok(())
    }
}
