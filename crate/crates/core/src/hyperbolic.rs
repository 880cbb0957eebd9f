//! A uniform metric graph on the hyperbolic plane: a greedy ε-net around a
//! base point, a parent tree whose root distances are exact, and shortcut
//! edges of constant length between nearby net points.
//!
//! Points live on the hyperboloid `z² − x² − y² = 1`. Only `(x, y)` is
//! primary; `z` is always recomputed from it, and distances use a form
//! that sums nonnegative terms so that points far from the origin keep
//! full relative precision.

use std::f64::consts::{PI, TAU};
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::graphcore::{
    fmt_sig17, DijkstraWorkspace, EdgeLabel, GraphBuilder, GraphError, MetricGraph, UniformityReport, VertexId,
};
use crate::planar::{summarize, ErrorReport};
use crate::quad::golden_section_min;

/// Index of the base point in every net.
pub const ROOT: VertexId = 0;

#[derive(Debug, Error, PartialEq)]
pub enum HypError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("radius {radius} must exceed epsilon {epsilon}")]
    RadiusTooSmall { radius: f64, epsilon: f64 },
    #[error("no admissible parent for net point {0}")]
    NoParent(VertexId),
    #[error("parent of net point {q} violates rule ({rule})")]
    ParentRule { q: VertexId, rule: u8 },
    #[error("nonpositive tree edge length {length} at net point {q}")]
    NonPositiveLength { q: VertexId, length: f64 },
    #[error("query ball is empty: radius {radius} minus twice the reach {d1} is not positive")]
    EmptyQueryBall { radius: f64, d1: f64 },
    #[error("net point {0} lies outside the query ball")]
    OutsideQueryBall(VertexId),
    #[error("net index {0} out of range")]
    BadIndex(VertexId),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn positive(name: &'static str, value: f64) -> Result<(), HypError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(HypError::NonPositive { name, value })
    }
}

/// A point of the hyperboloid model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HPoint {
    x: f64,
    y: f64,
    z: f64,
}

impl HPoint {
    pub const ORIGIN: HPoint = HPoint { x: 0.0, y: 0.0, z: 1.0 };

    /// Lifts `(x, y)` to the upper sheet.
    pub fn from_xy(x: f64, y: f64) -> Self {
        Self {
            x,
            y,
            z: (1.0 + x * x + y * y).sqrt(),
        }
    }

    /// The point at distance `r` from the origin in direction `theta`.
    pub fn from_polar(r: f64, theta: f64) -> Self {
        let s = r.sinh();
        Self::from_xy(s * theta.cos(), s * theta.sin())
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// Distance from the origin.
    pub fn radius(&self) -> f64 {
        self.x.hypot(self.y).asinh()
    }

    /// Angle in `[0, 2π)`.
    pub fn angle(&self) -> f64 {
        self.y.atan2(self.x).rem_euclid(TAU)
    }

    /// Coordinates in the Poincaré disk.
    pub fn poincare(&self) -> (f64, f64) {
        (self.x / (1.0 + self.z), self.y / (1.0 + self.z))
    }

    /// `|z² − x² − y² − 1| / z²`.
    pub fn constraint_residual(&self) -> f64 {
        (self.z * self.z - self.x * self.x - self.y * self.y - 1.0).abs() / (self.z * self.z)
    }
}

/// `z_a z_b − x_a x_b − y_a y_b`, at least 1, evaluated as
/// `(1 + |u|² + |v|²) / (z_a z_b + |u||v|) + (|u||v| − u·v)` to avoid
/// cancellation between the two large products.
pub fn minkowski_pairing(a: &HPoint, b: &HPoint) -> f64 {
    let (nu, nv) = (a.x.hypot(a.y), b.x.hypot(b.y));
    let dot = a.x * b.x + a.y * b.y;
    let cross = a.x * b.y - a.y * b.x;
    let radial = (1.0 + (nu * nu + nv * nv)) / (a.z * b.z + nu * nv);
    let angular = if dot > 0.0 {
        cross * cross / (nu * nv + dot)
    } else {
        nu * nv - dot
    };
    (radial + angular).max(1.0)
}

/// Hyperbolic distance.
///
/// With `w = a − b` and `e` the unit vector along `a + b` (horizontal parts),
/// `2(cosh d − 1) = (w × e)² + (w · e)² · 2(1 + B) / (z_a + z_b)²`, where `B`
/// is the Minkowski pairing. Every term is nonnegative.
pub fn h_dist(a: &HPoint, b: &HPoint) -> f64 {
    let (wx, wy) = (a.x - b.x, a.y - b.y);
    let (sx, sy) = (a.x + b.x, a.y + b.y);
    let zs = a.z + b.z;
    let norm_s = sx.hypot(sy);
    let chord_sq = if norm_s > 1e-300 {
        let (ex, ey) = (sx / norm_s, sy / norm_s);
        let cross = wx * ey - wy * ex;
        let dot = wx * ex + wy * ey;
        let pairing = minkowski_pairing(a, b);
        cross * cross + dot * dot * (2.0 * (1.0 + pairing)) / (zs * zs)
    } else {
        wx * wx + wy * wy
    };
    2.0 * (0.5 * chord_sq.sqrt()).asinh()
}

/// The point at parameter `t ∈ [0, 1]` along the geodesic from `a` to `b`.
pub fn geodesic_point(a: &HPoint, b: &HPoint, t: f64) -> HPoint {
    let d = h_dist(a, b);
    if d == 0.0 {
        return *a;
    }
    let s = t.clamp(0.0, 1.0) * d;
    let (ca, cb) = ((d - s).sinh() / d.sinh(), s.sinh() / d.sinh());
    HPoint::from_xy(ca * a.x + cb * b.x, ca * a.y + cb * b.y)
}

/// The point at distance `s` from the origin on the ray through `q`.
pub fn radial_point(q: &HPoint, s: f64) -> HPoint {
    let n = q.x.hypot(q.y);
    if n == 0.0 {
        return HPoint::from_xy(s.sinh(), 0.0);
    }
    let k = s.sinh() / n;
    HPoint::from_xy(k * q.x, k * q.y)
}

/// Distance from `x` to the segment from the origin to `q`, via the right
/// triangle at the foot of the perpendicular.
pub fn dist_to_radial_segment(x: &HPoint, q: &HPoint) -> f64 {
    let nq = q.x.hypot(q.y);
    if nq == 0.0 {
        return h_dist(x, q);
    }
    let (ex, ey) = (q.x / nq, q.y / nq);
    let along = x.x * ex + x.y * ey;
    if along <= 0.0 {
        return h_dist(x, &HPoint::ORIGIN);
    }
    // tanh(foot) = tanh(r_x)·cos Δ = along / z_x
    let foot = (along / x.z).atanh();
    if foot >= q.radius() {
        return h_dist(x, q);
    }
    (x.x * ey - x.y * ex).abs().asinh()
}

/// Distance from `x` to the segment `[a, b]`; the distance to a geodesic is
/// convex along it, so a golden-section search is exact up to tolerance.
pub fn dist_to_segment(x: &HPoint, a: &HPoint, b: &HPoint) -> f64 {
    if *a == HPoint::ORIGIN {
        return dist_to_radial_segment(x, b);
    }
    if *b == HPoint::ORIGIN {
        return dist_to_radial_segment(x, a);
    }
    golden_section_min(|t| h_dist(x, &geodesic_point(a, b, t)), 0.0, 1.0, 1e-12).1
}

/// Upper bound on the number of `ε`-separated points in a ball of radius
/// `r0`: disjoint `ε/2`-disks inside the ball of radius `r0 + ε/2`.
pub fn packing_bound(r0: f64, epsilon: f64) -> f64 {
    ((r0 + 0.5 * epsilon).cosh() - 1.0) / ((0.5 * epsilon).cosh() - 1.0)
}

/// Spatial index over points in polar coordinates: radial bands of width
/// `band` split into angular bins of arc length about `band`.
#[derive(Debug, Clone)]
struct PolarIndex {
    band: f64,
    bands: Vec<Vec<Vec<VertexId>>>,
    members: Vec<Vec<VertexId>>,
}

impl PolarIndex {
    fn new(band: f64, max_radius: f64) -> Self {
        let count = (max_radius / band).floor() as usize + 1;
        let bands = (0..count)
            .map(|k| {
                let outer = ((k as f64 + 1.0) * band).min(max_radius);
                let bins = (TAU * outer.sinh() / band).ceil().clamp(1.0, (1u32 << 22) as f64) as usize;
                vec![Vec::new(); bins]
            })
            .collect();
        Self {
            band,
            bands,
            members: vec![Vec::new(); count],
        }
    }

    fn slot(&self, r: f64, theta: f64) -> (usize, usize) {
        let b = ((r / self.band) as usize).min(self.bands.len() - 1);
        let bins = self.bands[b].len();
        (b, ((theta / TAU * bins as f64) as usize).min(bins - 1))
    }

    fn insert(&mut self, id: VertexId, r: f64, theta: f64) {
        let (b, k) = self.slot(r, theta);
        self.bands[b][k].push(id);
        self.members[b].push(id);
    }

    /// Calls `visit` on every stored id that may lie within `rho` of the
    /// point at polar coordinates `(r, theta)`.
    fn candidates(&self, r: f64, theta: f64, rho: f64, mut visit: impl FnMut(VertexId) -> bool) {
        let lo = ((r - rho).max(0.0) / self.band) as usize;
        let hi = (((r + rho) / self.band) as usize).min(self.bands.len() - 1);
        let half = if r <= rho {
            PI
        } else {
            (rho.sinh() / r.sinh()).min(1.0).asin()
        };
        for (bins, members) in self.bands.iter().zip(&self.members).take(hi + 1).skip(lo) {
            let n = bins.len();
            let span = half / TAU * n as f64;
            if half >= PI || 2.0 * span + 2.0 >= n as f64 {
                for &id in members {
                    if !visit(id) {
                        return;
                    }
                }
                continue;
            }
            let centre = theta / TAU * n as f64;
            let first = (centre - span).floor() as i64 - 1;
            let last = (centre + span).floor() as i64 + 1;
            for k in first..=last {
                for &id in &bins[k.rem_euclid(n as i64) as usize] {
                    if !visit(id) {
                        return;
                    }
                }
            }
        }
    }
}

/// Parameters of the net.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetParams {
    pub radius: f64,
    pub epsilon: f64,
    /// Candidate spacing is `ε / (2·density)` both radially and along rings.
    pub density: f64,
}

impl NetParams {
    pub fn new(radius: f64, epsilon: f64) -> Self {
        Self {
            radius,
            epsilon,
            density: 1.0,
        }
    }

    fn validate(&self) -> Result<(), HypError> {
        positive("radius", self.radius)?;
        positive("epsilon", self.epsilon)?;
        positive("density", self.density)?;
        if self.radius <= self.epsilon {
            return Err(HypError::RadiusTooSmall {
                radius: self.radius,
                epsilon: self.epsilon,
            });
        }
        Ok(())
    }

    fn step(&self) -> f64 {
        self.epsilon / (2.0 * self.density)
    }

    /// The deterministic polar candidate grid, ring-major, angle-minor.
    pub fn candidates(&self) -> impl Iterator<Item = HPoint> + '_ {
        let step = self.step();
        let rings = (self.radius / step + 1e-9).floor() as usize;
        (0..=rings).flat_map(move |k| {
            let r = k as f64 * step;
            let n = if k == 0 {
                1
            } else {
                (TAU * r.sinh() / step).ceil() as usize
            };
            (0..n).map(move |i| HPoint::from_polar(r, TAU * i as f64 / n as f64))
        })
    }
}

/// A greedy maximal `ε`-separated subset of the candidate grid; index 0 is
/// the base point.
#[derive(Debug, Clone)]
pub struct HNet {
    params: NetParams,
    points: Vec<HPoint>,
    radii: Vec<f64>,
    angles: Vec<f64>,
    index: PolarIndex,
}

impl HNet {
    pub fn build(params: NetParams) -> Result<Self, HypError> {
        params.validate()?;
        let mut net = HNet {
            params,
            points: Vec::new(),
            radii: Vec::new(),
            angles: Vec::new(),
            index: PolarIndex::new(params.epsilon, params.radius),
        };
        for c in params.candidates() {
            if !net.any_within(&c, params.epsilon) {
                net.push(c);
            }
        }
        Ok(net)
    }

    fn push(&mut self, p: HPoint) {
        let id = self.points.len() as VertexId;
        let (r, t) = (p.radius(), p.angle());
        self.index.insert(id, r, t);
        self.points.push(p);
        self.radii.push(r);
        self.angles.push(t);
    }

    /// Whether some net point lies strictly within `rho` of `x`.
    pub fn any_within(&self, x: &HPoint, rho: f64) -> bool {
        let mut found = false;
        self.index.candidates(x.radius(), x.angle(), rho, |id| {
            found = h_dist(x, &self.points[id as usize]) < rho;
            !found
        });
        found
    }

    /// Net points within distance `rho` of `x` (inclusive), sorted by index.
    pub fn within(&self, x: &HPoint, rho: f64) -> Vec<(VertexId, f64)> {
        let mut out = Vec::new();
        self.index.candidates(x.radius(), x.angle(), rho, |id| {
            let d = h_dist(x, &self.points[id as usize]);
            if d <= rho {
                out.push((id, d));
            }
            true
        });
        out.sort_by_key(|e| e.0);
        out
    }

    /// Nearest net point to `x`; ties go to the smaller index.
    pub fn nearest(&self, x: &HPoint) -> (VertexId, f64) {
        let mut rho = self.params.epsilon;
        loop {
            let hits = self.within(x, rho);
            if let Some(best) = hits.into_iter().min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))) {
                return best;
            }
            rho *= 2.0;
        }
    }

    pub fn params(&self) -> &NetParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: VertexId) -> &HPoint {
        &self.points[i as usize]
    }

    pub fn points(&self) -> &[HPoint] {
        &self.points
    }

    /// `d(q, p)` for net point `q`.
    pub fn root_dist(&self, i: VertexId) -> f64 {
        self.radii[i as usize]
    }

    fn check(&self, i: VertexId) -> Result<(), HypError> {
        if (i as usize) < self.points.len() {
            Ok(())
        } else {
            Err(HypError::BadIndex(i))
        }
    }

    /// Smallest pairwise distance, by an index scan of every neighbourhood.
    pub fn min_separation(&self) -> f64 {
        let eps = self.params.epsilon;
        (0..self.points.len() as VertexId)
            .into_par_iter()
            .map(|i| {
                self.within(&self.points[i as usize], 2.0 * eps)
                    .into_iter()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, d)| d)
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(|| f64::INFINITY, f64::min)
    }

    /// Largest distance from a candidate-grid point in the ball of radius
    /// `R − ε` to its nearest net point.
    pub fn covering_radius(&self) -> f64 {
        let inner = self.params.radius - self.params.epsilon;
        let probes: Vec<HPoint> = self.params.candidates().filter(|c| c.radius() <= inner).collect();
        probes.par_iter().map(|c| self.nearest(c).1).reduce(|| 0.0, f64::max)
    }

    /// Most net points found in a ball of radius `r0` around any net point.
    pub fn max_ball_count(&self, r0: f64) -> usize {
        self.points
            .par_iter()
            .map(|c| self.within(c, r0).len())
            .max()
            .unwrap_or(0)
    }

    /// Net export with header `idx,x,y,z,parent_idx,tree_len`.
    pub fn write_csv<W: Write>(&self, mut out: W, tree: &ParentTree) -> io::Result<()> {
        writeln!(out, "idx,x,y,z,parent_idx,tree_len")?;
        for (i, p) in self.points.iter().enumerate() {
            let v = i as VertexId;
            let parent = if v == ROOT {
                String::new()
            } else {
                tree.parent(v).to_string()
            };
            writeln!(
                out,
                "{},{},{},{},{},{}",
                i,
                fmt_sig17(p.x),
                fmt_sig17(p.y),
                fmt_sig17(p.z),
                parent,
                fmt_sig17(tree.edge_len(v))
            )?;
        }
        Ok(())
    }
}

/// Whether `cand` satisfies rules (1) and (2) as a parent of `q`.
fn admissible(net: &HNet, q: VertexId, cand: VertexId) -> (bool, bool) {
    let eps = net.params.epsilon;
    let d = net.root_dist(q);
    let dc = net.root_dist(cand);
    let near_segment = dist_to_radial_segment(net.point(cand), net.point(q)) <= eps;
    let in_window = d - 15.0 * eps < dc && dc < d - 5.0 * eps;
    (near_segment, in_window)
}

/// The parent of `q ≠ p`: `p` itself when `d(q, p) ≤ 5ε`, otherwise the
/// admissible net point nearest to the point at distance `d(q, p) − 10ε`
/// on `[p, q]`.
pub fn choose_parent(net: &HNet, q: VertexId) -> Result<VertexId, HypError> {
    net.check(q)?;
    let eps = net.params.epsilon;
    let d = net.root_dist(q);
    if q == ROOT || d <= 5.0 * eps {
        return Ok(ROOT);
    }
    let target = radial_point(net.point(q), (d - 10.0 * eps).max(0.0));
    for k in 1..=7 {
        let best = net
            .within(&target, k as f64 * eps)
            .into_iter()
            .filter(|&(c, _)| admissible(net, q, c) == (true, true))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        if let Some((c, _)) = best {
            return Ok(c);
        }
    }
    Err(HypError::NoParent(q))
}

/// How tree and shortcut edge lengths are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthMode {
    Real,
    /// `⌊d(q, p)⌋ − ⌊d(q′, p)⌋` on tree edges; the least integer above the
    /// real shortcut length on shortcuts.
    Integer,
}

/// The parent tree rooted at the base point.
#[derive(Debug, Clone)]
pub struct ParentTree {
    parent: Vec<VertexId>,
    depth: Vec<u32>,
    /// Root distance in the tree (`d(q, p)`, or its floor in integer mode).
    level: Vec<f64>,
    mode: LengthMode,
    graph: MetricGraph,
}

impl ParentTree {
    pub fn parent(&self, q: VertexId) -> VertexId {
        self.parent[q as usize]
    }

    pub fn depth(&self, q: VertexId) -> u32 {
        self.depth[q as usize]
    }

    pub fn mode(&self) -> LengthMode {
        self.mode
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    /// Length of the edge from `q` to its parent; 0 at the root.
    pub fn edge_len(&self, q: VertexId) -> f64 {
        self.level[q as usize] - self.level[self.parent(q) as usize]
    }

    /// Tree distance to the root.
    pub fn level(&self, q: VertexId) -> f64 {
        self.level[q as usize]
    }

    /// Vertices from `q` up to the root, inclusive.
    pub fn path_to_root(&self, q: VertexId) -> Vec<VertexId> {
        let mut path = vec![q];
        let mut v = q;
        while v != ROOT {
            v = self.parent(v);
            path.push(v);
        }
        path
    }

    pub fn lca(&self, mut a: VertexId, mut b: VertexId) -> VertexId {
        while self.depth(a) > self.depth(b) {
            a = self.parent(a);
        }
        while self.depth(b) > self.depth(a) {
            b = self.parent(b);
        }
        while a != b {
            a = self.parent(a);
            b = self.parent(b);
        }
        a
    }

    /// Tree distance by telescoping through the lowest common ancestor.
    pub fn tree_dist(&self, a: VertexId, b: VertexId) -> f64 {
        let c = self.lca(a, b);
        (self.level(a) - self.level(c)) + (self.level(b) - self.level(c))
    }

    fn is_edge(&self, a: VertexId, b: VertexId) -> bool {
        (a != ROOT && self.parent(a) == b) || (b != ROOT && self.parent(b) == a)
    }
}

/// Chooses parents for every net point and links them into a tree. Net
/// indices increase with ring, so every parent precedes its child and the
/// result is acyclic by construction; this is re-checked along with the
/// three parent rules.
pub fn build_tree(net: &HNet, mode: LengthMode) -> Result<ParentTree, HypError> {
    let n = net.len();
    let mut parent = vec![ROOT; n];
    for q in 1..n as VertexId {
        let c = choose_parent(net, q)?;
        let eps = net.params.epsilon;
        if net.root_dist(q) <= 5.0 * eps {
            if c != ROOT {
                return Err(HypError::ParentRule { q, rule: 3 });
            }
        } else {
            let (one, two) = admissible(net, q, c);
            if !one {
                return Err(HypError::ParentRule { q, rule: 1 });
            }
            if !two {
                return Err(HypError::ParentRule { q, rule: 2 });
            }
        }
        if c >= q {
            return Err(HypError::ParentRule { q, rule: 2 });
        }
        parent[q as usize] = c;
    }
    let mut depth = vec![0u32; n];
    let mut level = vec![0.0; n];
    let mut b = GraphBuilder::with_capacity(n, n.saturating_sub(1));
    for q in 1..n {
        let c = parent[q] as usize;
        depth[q] = depth[c] + 1;
        let (lq, lc) = match mode {
            LengthMode::Real => (net.radii[q], net.radii[c]),
            LengthMode::Integer => (net.radii[q].floor(), net.radii[c].floor()),
        };
        let length = lq - lc;
        if length <= 0.0 {
            return Err(HypError::NonPositiveLength {
                q: q as VertexId,
                length,
            });
        }
        level[q] = level[c] + length;
        b.add_edge(q as VertexId, c as VertexId, length);
    }
    Ok(ParentTree {
        parent,
        depth,
        level,
        mode,
        graph: b.build()?,
    })
}

/// Largest distance from a vertex on the tree path `q → p` to the segment
/// `[p, q]`, over `sample` seeded net points (all when `sample ≥ |net|`),
/// times the safety factor 1.5.
pub fn estimate_morse_d(net: &HNet, tree: &ParentTree, sample: usize, seed: u64) -> f64 {
    let ids: Vec<VertexId> = if sample >= net.len() {
        (0..net.len() as VertexId).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..sample)
            .map(|_| rng.random_range(0..net.len() as VertexId))
            .collect()
    };
    let worst = ids
        .par_iter()
        .map(|&q| {
            let end = net.point(q);
            tree.path_to_root(q)
                .into_iter()
                .map(|v| dist_to_radial_segment(net.point(v), end))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    1.5 * worst
}

/// How the shortcut edges are held.
#[derive(Debug, Clone, PartialEq)]
pub enum ShortcutLayer {
    /// `2D₁` exceeds the diameter of the ball, so every non-tree pair is a
    /// shortcut; distances are `min(d_T, L)` and nothing is materialized.
    Complete,
    /// Tree plus the listed shortcut edges.
    Explicit(MetricGraph),
}

/// Net, tree and shortcut layer with the constants that bound the error.
#[derive(Debug, Clone)]
pub struct HyperbolicGraph {
    pub net: HNet,
    pub tree: ParentTree,
    /// Estimated Morse constant `D̂`.
    pub morse: f64,
    pub delta: f64,
    /// `D₁ = D̂ + reach·ε + δ`.
    pub reach: f64,
    pub shortcut_len: f64,
    pub layer: ShortcutLayer,
}

/// Connects every non-tree pair at distance `< 2D₁` by an edge of length
/// `2D₁ + 4D̂` (the next integer above it in integer mode).
pub fn add_shortcuts(
    net: HNet,
    tree: ParentTree,
    morse: f64,
    delta: f64,
    reach_factor: f64,
) -> Result<HyperbolicGraph, HypError> {
    positive("delta", delta)?;
    positive("reach factor", reach_factor)?;
    if !(morse >= 0.0 && morse.is_finite()) {
        return Err(HypError::NonPositive {
            name: "Morse constant",
            value: morse,
        });
    }
    let reach = morse + reach_factor * net.params.epsilon + delta;
    let real_len = 2.0 * reach + 4.0 * morse;
    let shortcut_len = match tree.mode {
        LengthMode::Real => real_len,
        LengthMode::Integer => real_len.floor() + 1.0,
    };
    let layer = if 2.0 * reach > 2.0 * net.params.radius {
        ShortcutLayer::Complete
    } else {
        let mut b = GraphBuilder::new(net.len());
        for (a, c, len) in tree.graph.edges() {
            b.add_edge(a, c, len);
        }
        for a in 0..net.len() as VertexId {
            for (c, d) in net.within(net.point(a), 2.0 * reach) {
                if c > a && d < 2.0 * reach && !tree.is_edge(a, c) {
                    b.add_edge(a, c, shortcut_len);
                }
            }
        }
        ShortcutLayer::Explicit(b.build()?)
    };
    Ok(HyperbolicGraph {
        net,
        tree,
        morse,
        delta,
        reach,
        shortcut_len,
        layer,
    })
}

/// End-to-end parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolicParams {
    pub net: NetParams,
    pub delta: f64,
    pub reach_factor: f64,
    pub mode: LengthMode,
    /// Net points sampled for the Morse estimate.
    pub morse_sample: usize,
    /// Replaces the estimate when set.
    pub morse_override: Option<f64>,
    pub seed: u64,
}

impl HyperbolicParams {
    pub fn new(radius: f64, epsilon: f64, delta: f64, seed: u64) -> Self {
        Self {
            net: NetParams::new(radius, epsilon),
            delta,
            reach_factor: 100.0,
            mode: LengthMode::Real,
            morse_sample: 2000,
            morse_override: None,
            seed,
        }
    }
}

/// Net, tree, Morse estimate and shortcuts in one go.
pub fn build_hyperbolic(params: &HyperbolicParams) -> Result<HyperbolicGraph, HypError> {
    let net = HNet::build(params.net)?;
    let tree = build_tree(&net, params.mode)?;
    let morse = match params.morse_override {
        Some(d) => d,
        None => estimate_morse_d(&net, &tree, params.morse_sample, params.seed),
    };
    add_shortcuts(net, tree, morse, params.delta, params.reach_factor)
}

/// One verified pair of net points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypRow {
    pub a: VertexId,
    pub b: VertexId,
    pub hyp_dist: f64,
    pub graph_dist: f64,
    /// `graph_dist − hyp_dist`.
    pub err: f64,
}

pub type HypReport = ErrorReport<HypRow>;

impl HyperbolicGraph {
    pub fn epsilon(&self) -> f64 {
        self.net.params.epsilon
    }

    /// Allowed excess `2D₁ + 12D̂ + 2δ` (plus 3 in integer mode).
    pub fn upper_bound(&self) -> f64 {
        let base = 2.0 * self.reach + 12.0 * self.morse + 2.0 * self.delta;
        match self.tree.mode {
            LengthMode::Real => base,
            LengthMode::Integer => base + 3.0,
        }
    }

    /// Allowed shortfall `4D̂` (plus 2 in integer mode).
    pub fn lower_bound(&self) -> f64 {
        match self.tree.mode {
            LengthMode::Real => 4.0 * self.morse,
            LengthMode::Integer => 4.0 * self.morse + 2.0,
        }
    }

    /// Pairs are drawn from the ball of radius `R − 2D₁`, where no shortcut
    /// is cut off by the boundary; with a complete shortcut layer nothing is
    /// cut off and the whole ball qualifies.
    pub fn query_radius(&self) -> Result<f64, HypError> {
        let r = self.net.params.radius;
        match self.layer {
            ShortcutLayer::Complete => Ok(r),
            ShortcutLayer::Explicit(_) if r > 2.0 * self.reach => Ok(r - 2.0 * self.reach),
            ShortcutLayer::Explicit(_) => Err(HypError::EmptyQueryBall {
                radius: r,
                d1: self.reach,
            }),
        }
    }

    pub fn uniformity_report(&self) -> UniformityReport {
        match &self.layer {
            ShortcutLayer::Explicit(g) => g.uniformity_report(),
            ShortcutLayer::Complete => {
                let t = self.tree.graph.uniformity_report();
                let n = self.net.len();
                if n < 2 {
                    return t;
                }
                let has_shortcut = n > 2;
                UniformityReport {
                    max_degree: n - 1,
                    min_length: if has_shortcut {
                        t.min_length.min(self.shortcut_len)
                    } else {
                        t.min_length
                    },
                    max_length: if has_shortcut {
                        t.max_length.max(self.shortcut_len)
                    } else {
                        t.max_length
                    },
                    empty: false,
                }
            }
        }
    }

    /// Graph distance between two net points.
    pub fn distance(&self, a: VertexId, b: VertexId) -> Result<f64, HypError> {
        self.net.check(a)?;
        self.net.check(b)?;
        match &self.layer {
            ShortcutLayer::Complete => Ok(if a == b {
                0.0
            } else {
                self.tree.tree_dist(a, b).min(self.shortcut_len)
            }),
            ShortcutLayer::Explicit(g) => Ok(g.shortest_path_dist(a, &[b])?[0]),
        }
    }

    /// Graph distances from the root to every net point, by Dijkstra on the
    /// tree (or the full explicit graph).
    pub fn root_distances(&self) -> Result<Vec<f64>, HypError> {
        match &self.layer {
            ShortcutLayer::Complete => Ok(self
                .tree
                .graph
                .distances_from(ROOT)?
                .into_iter()
                .enumerate()
                .map(|(i, d)| {
                    if i == ROOT as usize {
                        d
                    } else {
                        d.min(self.shortcut_len)
                    }
                })
                .collect()),
            ShortcutLayer::Explicit(g) => Ok(g.distances_from(ROOT)?),
        }
    }

    /// `count` seeded pairs of net points in the query ball, grouped by
    /// source as in the planar sampler.
    pub fn sample_pairs(&self, count: usize, seed: u64) -> Result<Vec<(VertexId, VertexId)>, HypError> {
        let rq = self.query_radius()?;
        let pool: Vec<VertexId> = (0..self.net.len() as VertexId)
            .filter(|&i| self.net.root_dist(i) <= rq)
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sources = ((count as f64).sqrt().ceil() as usize).max(1);
        let per = count.div_ceil(sources);
        let mut out = Vec::with_capacity(count);
        'outer: for _ in 0..sources {
            let a = pool[rng.random_range(0..pool.len())];
            for _ in 0..per {
                if out.len() == count {
                    break 'outer;
                }
                out.push((a, pool[rng.random_range(0..pool.len())]));
            }
        }
        Ok(out)
    }

    /// Graph versus hyperbolic distance on pairs inside the query ball.
    pub fn verify(&self, pairs: &[(VertexId, VertexId)]) -> Result<HypReport, HypError> {
        let rq = self.query_radius()?;
        for &(a, b) in pairs {
            for v in [a, b] {
                self.net.check(v)?;
                if self.net.root_dist(v) > rq {
                    return Err(HypError::OutsideQueryBall(v));
                }
            }
        }
        let graph_dists: Vec<f64> = match &self.layer {
            ShortcutLayer::Complete => pairs
                .par_iter()
                .map(|&(a, b)| self.distance(a, b))
                .collect::<Result<_, _>>()?,
            ShortcutLayer::Explicit(g) => {
                let mut order: Vec<usize> = (0..pairs.len()).collect();
                order.sort_by_key(|&k| pairs[k].0);
                let mut groups: Vec<(VertexId, Vec<usize>)> = Vec::new();
                for k in order {
                    match groups.last_mut() {
                        Some((s, m)) if *s == pairs[k].0 => m.push(k),
                        _ => groups.push((pairs[k].0, vec![k])),
                    }
                }
                let per: Vec<Vec<(usize, f64)>> = groups
                    .par_iter()
                    .map_init(
                        || DijkstraWorkspace::new(g.vertex_count()),
                        |ws, (s, members)| {
                            let targets: Vec<VertexId> = members.iter().map(|&k| pairs[k].1).collect();
                            let d = ws.distances_to(g, *s, &targets)?;
                            Ok(members.iter().copied().zip(d).collect())
                        },
                    )
                    .collect::<Result<_, GraphError>>()?;
                let mut out = vec![0.0; pairs.len()];
                for (k, d) in per.into_iter().flatten() {
                    out[k] = d;
                }
                out
            }
        };
        let mut rows: Vec<HypRow> = pairs
            .iter()
            .zip(graph_dists)
            .map(|(&(a, b), graph_dist)| {
                let hyp_dist = h_dist(self.net.point(a), self.net.point(b));
                HypRow {
                    a,
                    b,
                    hyp_dist,
                    graph_dist,
                    err: graph_dist - hyp_dist,
                }
            })
            .collect();
        rows.sort_by_key(|r| (r.a, r.b));
        Ok(summarize(rows, |r| (r.hyp_dist, r.err)))
    }

    /// Whether every error of `report` lies in `[−lower, upper]`.
    pub fn within_bounds(&self, report: &HypReport) -> bool {
        report.rows.is_empty() || (report.max_err <= self.upper_bound() && report.min_err >= -self.lower_bound())
    }

    /// Report CSV with header
    /// `p_idx,px,py,pz,q_idx,qx,qy,qz,hyp_dist,graph_dist,err`.
    pub fn write_report_csv<W: Write>(&self, report: &HypReport, mut out: W) -> io::Result<()> {
        writeln!(out, "p_idx,px,py,pz,q_idx,qx,qy,qz,hyp_dist,graph_dist,err")?;
        let fields = |i: VertexId| {
            let p = self.net.point(i);
            format!("{},{},{},{}", i, fmt_sig17(p.x), fmt_sig17(p.y), fmt_sig17(p.z))
        };
        for r in &report.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                fields(r.a),
                fields(r.b),
                fmt_sig17(r.hyp_dist),
                fmt_sig17(r.graph_dist),
                fmt_sig17(r.err)
            )?;
        }
        Ok(())
    }

    /// For each pair `(q₁, q₂)`: the point `p′` of `[q₁, q₂]` closest to
    /// both sides `[q₁, p]` and `[q₂, p]`, and the tree ancestors `q_i′`
    /// nearest to it. Records both readings of the reach condition.
    pub fn audit_reach(&self, pairs: &[(VertexId, VertexId)]) -> ReachAudit {
        let per: Vec<(f64, f64, f64)> = pairs
            .par_iter()
            .map(|&(a, b)| {
                let (pa, pb) = (self.net.point(a), self.net.point(b));
                let centre = (0..=128)
                    .map(|k| geodesic_point(pa, pb, k as f64 / 128.0))
                    .map(|g| (dist_to_radial_segment(&g, pa).max(dist_to_radial_segment(&g, pb)), g))
                    .min_by(|x, y| x.0.total_cmp(&y.0))
                    .map(|(_, g)| g)
                    .unwrap_or(HPoint::ORIGIN);
                let anchor = |q: VertexId| {
                    self.tree
                        .path_to_root(q)
                        .into_iter()
                        .min_by(|x, y| {
                            h_dist(self.net.point(*x), &centre).total_cmp(&h_dist(self.net.point(*y), &centre))
                        })
                        .unwrap_or(ROOT)
                };
                let (qa, qb) = (anchor(a), anchor(b));
                let to_centre = h_dist(self.net.point(qa), &centre).max(h_dist(self.net.point(qb), &centre));
                let to_root = self.net.root_dist(qa).max(self.net.root_dist(qb));
                (to_centre, to_root, h_dist(self.net.point(qa), self.net.point(qb)))
            })
            .collect();
        let count = |f: &dyn Fn(&(f64, f64, f64)) -> bool| per.iter().filter(|t| f(t)).count();
        ReachAudit {
            pairs: per.len(),
            reach: self.reach,
            max_to_centre: per.iter().map(|t| t.0).fold(0.0, f64::max),
            max_to_root: per.iter().map(|t| t.1).fold(0.0, f64::max),
            centre_reading_ok: count(&|t| t.0 < self.reach),
            root_reading_ok: count(&|t| t.1 < self.reach),
            shortcut_ok: count(&|t| t.2 < 2.0 * self.reach),
        }
    }
}

/// Net point label for edge export: Poincaré-disk coordinates, layer `H`.
#[derive(Debug, Clone, Copy)]
pub struct NetLabel {
    pub idx: VertexId,
    pub disk: (f64, f64),
}

impl EdgeLabel for NetLabel {
    type Key = VertexId;

    fn sort_key(&self) -> VertexId {
        self.idx
    }

    fn fields(&self) -> String {
        format!("{},{},H", fmt_sig17(self.disk.0), fmt_sig17(self.disk.1))
    }
}

impl HyperbolicGraph {
    /// Edge CSV of the materialized edges: tree plus explicit shortcuts, or
    /// the tree alone when the shortcut layer is complete.
    pub fn write_edge_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let g = match &self.layer {
            ShortcutLayer::Explicit(g) => g,
            ShortcutLayer::Complete => &self.tree.graph,
        };
        g.write_edge_csv(out, |v| NetLabel {
            idx: v,
            disk: self.net.point(v).poincare(),
        })
    }
}

/// Outcome of [`HyperbolicGraph::audit_reach`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReachAudit {
    pub pairs: usize,
    pub reach: f64,
    /// `max d(q_i′, p′)`.
    pub max_to_centre: f64,
    /// `max d(q_i′, p)`.
    pub max_to_root: f64,
    /// Pairs with `d(q_i′, p′) < D₁` for both `i`.
    pub centre_reading_ok: usize,
    /// Pairs with `d(q_i′, p) < D₁` for both `i`.
    pub root_reading_ok: usize,
    /// Pairs whose anchors are joined by a shortcut (`d(q₁′, q₂′) < 2D₁`).
    pub shortcut_ok: usize,
}

/// Largest distance from a point on one side of a random triangle of net
/// points to the union of the other two sides, over `triangles` seeded
/// triangles; each side is probed at 65 points.
pub fn thinness_witness(net: &HNet, triangles: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = net.len() as VertexId;
    let tris: Vec<[VertexId; 3]> = (0..triangles)
        .map(|_| [rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n)])
        .collect();
    tris.par_iter()
        .map(|t| {
            let v = t.map(|i| *net.point(i));
            (0..3)
                .map(|s| {
                    let (a, b, c) = (v[s], v[(s + 1) % 3], v[(s + 2) % 3]);
                    (0..=64)
                        .map(|k| {
                            let g = geodesic_point(&a, &b, k as f64 / 64.0);
                            dist_to_segment(&g, &b, &c).min(dist_to_segment(&g, &c, &a))
                        })
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn random_point(rng: &mut ChaCha8Rng, rmax: f64) -> HPoint {
        HPoint::from_polar(rng.random_range(0.0..rmax), rng.random_range(0.0..TAU))
    }

    /// Naive acosh of the pairing: fine at small radii.
    fn naive_dist(a: &HPoint, b: &HPoint) -> f64 {
        minkowski_pairing(a, b).acosh()
    }

    #[test]
    fn distance_examples() {
        let o = HPoint::ORIGIN;
        assert_eq!(h_dist(&o, &o), 0.0);
        for r in [0.1, 1.0, 5.0, 12.0, 20.0] {
            let q = HPoint::from_polar(r, 0.7);
            assert_abs_diff_eq!(h_dist(&o, &q), r, epsilon = 1e-12 * r.max(1.0));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let (a, b) = (random_point(&mut rng, 2.0), random_point(&mut rng, 2.0));
            assert_abs_diff_eq!(h_dist(&a, &b), naive_dist(&a, &b), epsilon = 1e-7);
        }
    }

    #[test]
    fn far_points_keep_precision() {
        // Two points on one ray at radius 12: exact distance is the radial gap.
        let (a, b) = (HPoint::from_polar(12.0, 1.1), HPoint::from_polar(12.25, 1.1));
        assert_abs_diff_eq!(h_dist(&a, &b), 0.25, epsilon = 1e-11);
        // Same radius: sinh(d/2) = sinh(r)·sin(Δθ/2).
        let (c, e) = (HPoint::from_polar(12.0, 0.0), HPoint::from_polar(12.0, 1e-5));
        let expect = 2.0 * (12f64.sinh() * (0.5e-5f64).sin()).asinh();
        assert_abs_diff_eq!(h_dist(&c, &e), expect, epsilon = 1e-10);
    }

    #[test]
    fn triangle_inequality_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let (a, b, c) = (
                random_point(&mut rng, 12.0),
                random_point(&mut rng, 12.0),
                random_point(&mut rng, 12.0),
            );
            assert!(h_dist(&a, &c) <= h_dist(&a, &b) + h_dist(&b, &c) + 1e-9);
            assert_eq!(h_dist(&a, &b), h_dist(&b, &a));
        }
    }

    #[test]
    fn geodesic_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let (a, b) = (random_point(&mut rng, 6.0), random_point(&mut rng, 6.0));
            let d = h_dist(&a, &b);
            assert_eq!(geodesic_point(&a, &b, 0.0), a);
            assert_abs_diff_eq!(h_dist(&geodesic_point(&a, &b, 1.0), &b), 0.0, epsilon = 1e-9);
            let mid = geodesic_point(&a, &b, 0.5);
            assert_abs_diff_eq!(h_dist(&a, &mid), h_dist(&mid, &b), epsilon = 1e-9);
            let t: f64 = rng.random_range(0.0..1.0);
            let g = geodesic_point(&a, &b, t);
            assert_abs_diff_eq!(h_dist(&a, &g), t * d, epsilon = 1e-9);
            assert_abs_diff_eq!(h_dist(&a, &g) + h_dist(&g, &b), d, epsilon = 1e-9);
            assert!(g.constraint_residual() < 1e-14);
        }
        let a = HPoint::from_polar(1.0, 0.0);
        assert_eq!(geodesic_point(&a, &a, 0.3), a);
    }

    #[test]
    fn radial_segment_distance_matches_golden_section() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..300 {
            let (x, q) = (random_point(&mut rng, 8.0), random_point(&mut rng, 8.0));
            let oracle = golden_section_min(|t| h_dist(&x, &geodesic_point(&HPoint::ORIGIN, &q, t)), 0.0, 1.0, 1e-13).1;
            assert_abs_diff_eq!(dist_to_radial_segment(&x, &q), oracle, epsilon = 1e-7);
        }
        let q = HPoint::from_polar(3.0, 0.0);
        assert_abs_diff_eq!(
            dist_to_radial_segment(&HPoint::from_polar(1.0, PI), &q),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            dist_to_radial_segment(&HPoint::from_polar(2.0, 0.0), &q),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn general_segment_distance() {
        let a = HPoint::from_polar(2.0, 0.5);
        let b = HPoint::from_polar(2.0, 2.5);
        let mid = geodesic_point(&a, &b, 0.4);
        assert!(dist_to_segment(&mid, &a, &b) < 1e-6);
        let x = HPoint::from_polar(4.0, 1.5);
        let probe = (0..=10000)
            .map(|k| h_dist(&x, &geodesic_point(&a, &b, k as f64 / 1e4)))
            .fold(f64::INFINITY, f64::min);
        assert!(dist_to_segment(&x, &a, &b) <= probe + 1e-9);
        assert!(dist_to_segment(&x, &a, &b) >= probe - 1e-6);
    }

    #[test]
    fn packing_arithmetic() {
        assert_abs_diff_eq!(
            packing_bound(5.0, 1.0),
            (5.5f64.cosh() - 1.0) / (0.5f64.cosh() - 1.0),
            epsilon = 1e-9
        );
        assert!((packing_bound(5.0, 1.0) - 956.0).abs() < 10.0);
    }

    #[test]
    fn net_at_radius_five() {
        let net = HNet::build(NetParams::new(5.0, 1.0)).unwrap();
        assert_eq!(*net.point(ROOT), HPoint::ORIGIN);
        assert!((net.len() as f64) <= packing_bound(5.0, 1.0));
        // Exhaustive pair scan.
        let mut min = f64::INFINITY;
        for i in 0..net.len() {
            for j in 0..i {
                min = min.min(h_dist(&net.points()[i], &net.points()[j]));
            }
        }
        assert!(min >= 1.0, "{min}");
        assert_eq!(min, net.min_separation());
        // Maximality: every candidate is within ε of the net.
        assert!(net
            .params()
            .candidates()
            .all(|c| net.any_within(&c, 1.0) || net.within(&c, 1.0).iter().any(|e| e.1 <= 1.0)));
        assert!(net.covering_radius() <= 1.0);
        assert!(net.points().iter().all(|p| p.constraint_residual() < 1e-14));
        assert!((net.max_ball_count(3.0) as f64) <= packing_bound(3.0, 1.0));
    }

    #[test]
    fn index_queries_match_brute_force() {
        let net = HNet::build(NetParams::new(7.0, 1.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let x = random_point(&mut rng, 7.5);
            let rho: f64 = rng.random_range(0.1..4.0);
            let fast: Vec<VertexId> = net.within(&x, rho).into_iter().map(|e| e.0).collect();
            let slow: Vec<VertexId> = (0..net.len() as VertexId)
                .filter(|&i| h_dist(&x, net.point(i)) <= rho)
                .collect();
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn bad_params() {
        assert!(matches!(
            HNet::build(NetParams::new(1.0, 1.0)),
            Err(HypError::RadiusTooSmall { .. })
        ));
        assert!(matches!(
            HNet::build(NetParams::new(-1.0, 1.0)),
            Err(HypError::NonPositive { .. })
        ));
    }

    #[test]
    fn tree_examples() {
        let eps = 0.4;
        let net = HNet::build(NetParams::new(8.5, eps)).unwrap();
        let tree = build_tree(&net, LengthMode::Real).unwrap();
        let from_root = tree.graph().distances_from(ROOT).unwrap();
        for q in 0..net.len() as VertexId {
            assert_abs_diff_eq!(from_root[q as usize], net.root_dist(q), epsilon = 1e-9);
            assert_abs_diff_eq!(tree.tree_dist(ROOT, q), net.root_dist(q), epsilon = 1e-9);
            let d = net.root_dist(q);
            let c = tree.parent(q);
            if q == ROOT {
                continue;
            }
            if d <= 5.0 * eps {
                assert_eq!(c, ROOT);
            } else {
                let dc = net.root_dist(c);
                assert!(d - 15.0 * eps < dc && dc < d - 5.0 * eps);
                assert!(dist_to_radial_segment(net.point(c), net.point(q)) <= eps);
                assert!(tree.edge_len(q) > 5.0 * eps && tree.edge_len(q) <= 15.0 * eps);
            }
        }
        // A point at 20ε has its parent in (5ε, 15ε).
        let q = (0..net.len() as VertexId)
            .find(|&q| (net.root_dist(q) - 20.0 * eps).abs() < 0.3 * eps)
            .unwrap();
        let dc = net.root_dist(tree.parent(q));
        assert!(dc > 5.0 * eps - 0.3 * eps && dc < 15.0 * eps + 0.3 * eps);
        assert!((tree.graph().uniformity_report().max_degree as f64) <= packing_bound(100.0 * eps, eps));
        // Tree distances agree with Dijkstra on the tree.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let (a, b) = (
                rng.random_range(0..net.len() as VertexId),
                rng.random_range(0..net.len() as VertexId),
            );
            let dj = tree.graph().shortest_path_dist(a, &[b]).unwrap()[0];
            assert_abs_diff_eq!(tree.tree_dist(a, b), dj, epsilon = 1e-9);
        }
    }

    #[test]
    fn morse_estimate_is_nonnegative_and_deterministic() {
        let net = HNet::build(NetParams::new(8.0, 0.5)).unwrap();
        let tree = build_tree(&net, LengthMode::Real).unwrap();
        let d = estimate_morse_d(&net, &tree, 300, 1);
        assert!(d >= 0.0);
        assert_eq!(d, estimate_morse_d(&net, &tree, 300, 1));
        // A radial chain deviates by at most its parent slack.
        assert!(d <= 1.5 * 8.0 * 0.5);
    }

    #[test]
    fn explicit_shortcuts() {
        let net = HNet::build(NetParams::new(6.0, 0.5)).unwrap();
        let tree = build_tree(&net, LengthMode::Real).unwrap();
        let morse = estimate_morse_d(&net, &tree, usize::MAX, 0);
        let g = add_shortcuts(net, tree, morse, 0.5, 1.0).unwrap();
        let ShortcutLayer::Explicit(graph) = &g.layer else {
            panic!("expected explicit shortcuts");
        };
        assert_abs_diff_eq!(g.reach, morse + 0.5 + 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(g.shortcut_len, 2.0 * g.reach + 4.0 * morse, epsilon = 1e-12);
        for (a, b, len) in graph.edges() {
            let d = h_dist(g.net.point(a), g.net.point(b));
            if !g.tree.is_edge(a, b) {
                assert_eq!(len, g.shortcut_len);
                assert!(d < 2.0 * g.reach);
            }
        }
        // A far pair gets no edge.
        let far = (1..g.net.len() as VertexId)
            .find(|&b| h_dist(g.net.point(ROOT), g.net.point(b)) >= 2.0 * g.reach)
            .unwrap();
        assert!(graph.edge_length(ROOT, far).is_none() || g.tree.is_edge(ROOT, far));
        let rq = g.query_radius().unwrap();
        assert_abs_diff_eq!(rq, 6.0 - 2.0 * g.reach, epsilon = 1e-12);
        let pairs = g.sample_pairs(400, 3).unwrap();
        let rep = g.verify(&pairs).unwrap();
        assert!(g.within_bounds(&rep), "{} {}", rep.min_err, rep.max_err);
        let roots = g.root_distances().unwrap();
        for q in 0..g.net.len() as VertexId {
            assert_abs_diff_eq!(roots[q as usize], g.net.root_dist(q), epsilon = 1e-9);
        }
    }

    #[test]
    fn complete_layer_and_integer_mode() {
        let mut params = HyperbolicParams::new(12.0, 10.0, 10.0, 4);
        params.mode = LengthMode::Integer;
        let g = build_hyperbolic(&params).unwrap();
        assert_eq!(g.layer, ShortcutLayer::Complete);
        assert_eq!(g.shortcut_len.fract(), 0.0);
        assert!(g.shortcut_len > 2.0 * g.reach + 4.0 * g.morse);
        for (_, _, len) in g.tree.graph().edges() {
            assert!(len > 0.0 && len.fract() == 0.0);
        }
        for q in 1..g.net.len() as VertexId {
            assert!((g.tree.level(q) - g.net.root_dist(q)).abs() <= f64::from(g.tree.depth(q)));
        }
        let rep = g.verify(&g.sample_pairs(500, 5).unwrap()).unwrap();
        assert!(g.within_bounds(&rep));
    }

    #[test]
    fn nonpositive_integer_lengths_are_rejected() {
        let net = HNet::build(NetParams::new(3.0, 0.5)).unwrap();
        assert!(matches!(
            build_tree(&net, LengthMode::Integer),
            Err(HypError::NonPositiveLength { .. })
        ));
    }

    #[test]
    fn verify_rejects_points_outside_the_query_ball() {
        let net = HNet::build(NetParams::new(6.0, 0.5)).unwrap();
        let tree = build_tree(&net, LengthMode::Real).unwrap();
        let g = add_shortcuts(net, tree, 0.5, 0.5, 1.0).unwrap();
        let far = g.net.len() as VertexId - 1;
        assert!(matches!(g.verify(&[(ROOT, far)]), Err(HypError::OutsideQueryBall(_))));
        let rep = g.verify(&[(ROOT, 1)]).unwrap();
        assert!(rep.rows[0].err.abs() < 1e-9);
    }

    #[test]
    fn thinness_at_small_scale() {
        let net = HNet::build(NetParams::new(5.0, 1.0)).unwrap();
        let w = thinness_witness(&net, 100, 7);
        assert!(w <= 1.0 && w > 0.0, "{w}");
    }

    #[test]
    fn csv_headers() {
        let net = HNet::build(NetParams::new(3.0, 1.0)).unwrap();
        let tree = build_tree(&net, LengthMode::Real).unwrap();
        let mut buf = Vec::new();
        net.write_csv(&mut buf, &tree).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("idx,x,y,z,parent_idx,tree_len\n0,0,0,1.0000000000000000e0,,0\n"));
    }
}
