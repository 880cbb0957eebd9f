//! Planar norms encoded by their dual profiles.
//!
//! A norm with `‖e₁‖ = D` is determined by the upper boundary
//! `h: [−D, D] → ℝ` of its dual unit body: for `y > 0`,
//! `‖(x, y)‖ = sup_ξ (ξx + h(ξ)y)`, and conversely
//! `h(ξ) = inf_x (‖(x, 1)‖ − ξx)`. Gluing horizontal strips of normed plane
//! averages the profiles, which is what the lattice construction exploits.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::quad::golden_section_min;

/// Half-width `D = ‖e₁‖` of the target norm.
pub const TARGET_HALF_WIDTH: f64 = SQRT_2;

/// Default number of samples for grid-based profile operations.
pub const DEFAULT_GRID: usize = 2049;

const CONCAVITY_TOL: f64 = 1e-9;
const DOMAIN_SLACK: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum ProfileError {
    #[error("parameter `{name}` must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("ξ = {xi} lies outside [−{half_width}, {half_width}]")]
    OutOfDomain { xi: f64, half_width: f64 },
    #[error("profile is not concave near ξ = {xi}")]
    NotConcave { xi: f64 },
    #[error(
        "could not bracket the minimizer of f(x) − ξx at ξ = {xi}; the section is not convex with slopes in [−D, D]"
    )]
    NoBracket { xi: f64 },
    #[error("profiles have different half-widths {0} and {1}")]
    DomainMismatch(f64, f64),
    #[error("empty averaging window [{m}, {n})")]
    EmptyWindow { m: i64, n: i64 },
    #[error("invalid sampled profile: {0}")]
    BadSamples(&'static str),
    #[error("grid needs at least {min} points, got {got}")]
    GridTooSmall { min: usize, got: usize },
}

/// Shape of a [`DualProfile`].
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    /// `h(ξ) = D − |ξ − β|`, the profile of a rhombus norm.
    Rhombus { beta: f64 },
    /// Mean of rhombus profiles. `sorted` holds the `β_j` in ascending order
    /// and `prefix[i]` the sum of the first `i` of them.
    Averaged { sorted: Vec<f64>, prefix: Vec<f64> },
    /// Unit circle `√(1 − ξ²)` on `|ξ| ≤ 1/D`, continued by its tangent
    /// lines down to zero at `ξ = ±D`. Dual to `max(|p|, D|x|)`.
    CircleCap,
    /// Piecewise-linear interpolation of samples on an increasing grid.
    Sampled { xi: Vec<f64>, h: Vec<f64> },
}

/// Concave upper boundary of a dual unit body.
#[derive(Debug, Clone, PartialEq)]
pub struct DualProfile {
    half_width: f64,
    kind: ProfileKind,
}

fn positive(name: &'static str, value: f64) -> Result<f64, ProfileError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ProfileError::NonPositive { name, value })
    }
}

impl DualProfile {
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    /// Rhombus profile with peak at `β`, on `[−D, D]`.
    pub fn rhombus_with_beta(half_width: f64, beta: f64) -> Result<Self, ProfileError> {
        positive("D", half_width)?;
        Ok(Self {
            half_width,
            kind: ProfileKind::Rhombus { beta },
        })
    }

    /// Circle cap of half-width `D ≥ 1`; `D = √2` gives the target `h⁰`.
    pub fn circle_cap(half_width: f64) -> Result<Self, ProfileError> {
        if !(half_width >= 1.0) || !half_width.is_finite() {
            return Err(ProfileError::NonPositive {
                name: "D - 1",
                value: half_width - 1.0,
            });
        }
        Ok(Self {
            half_width,
            kind: ProfileKind::CircleCap,
        })
    }

    /// The target profile `h⁰` on `[−√2, √2]`.
    pub fn target() -> Self {
        Self {
            half_width: TARGET_HALF_WIDTH,
            kind: ProfileKind::CircleCap,
        }
    }

    /// Average of rhombus profiles with the given peaks.
    pub fn averaged_from(half_width: f64, betas: &[f64]) -> Result<Self, ProfileError> {
        positive("D", half_width)?;
        if betas.is_empty() {
            return Err(ProfileError::EmptyWindow { m: 0, n: 0 });
        }
        let mut sorted = betas.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut prefix = Vec::with_capacity(sorted.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for b in &sorted {
            acc += b;
            prefix.push(acc);
        }
        Ok(Self {
            half_width,
            kind: ProfileKind::Averaged { sorted, prefix },
        })
    }

    /// Samples on a strictly increasing grid spanning `[−D, D]`.
    pub fn sampled(xi: Vec<f64>, h: Vec<f64>) -> Result<Self, ProfileError> {
        if xi.len() < 2 || xi.len() != h.len() {
            return Err(ProfileError::BadSamples("need ≥ 2 abscissae matching ordinates"));
        }
        if xi.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(ProfileError::BadSamples("abscissae must increase strictly"));
        }
        let half_width = xi[xi.len() - 1];
        if (xi[0] + half_width).abs() > 1e-9 * half_width.max(1.0) {
            return Err(ProfileError::BadSamples("grid must be symmetric about 0"));
        }
        positive("D", half_width)?;
        Ok(Self {
            half_width,
            kind: ProfileKind::Sampled { xi, h },
        })
    }

    /// `h(ξ)`. Arguments outside `[−D, D]` are clamped into the domain.
    pub fn eval(&self, xi: f64) -> f64 {
        let d = self.half_width;
        let xi = xi.clamp(-d, d);
        match &self.kind {
            ProfileKind::Rhombus { beta } => d - (xi - beta).abs(),
            ProfileKind::Averaged { sorted, prefix } => {
                let k = sorted.len() as f64;
                d - abs_dev_sum(sorted, prefix, xi) / k
            }
            ProfileKind::CircleCap => circle_cap_eval(d, xi),
            ProfileKind::Sampled { xi: grid, h } => interpolate(grid, h, xi),
        }
    }

    /// Checked evaluation.
    pub fn try_eval(&self, xi: f64) -> Result<f64, ProfileError> {
        if !xi.is_finite() || xi.abs() > self.half_width + DOMAIN_SLACK {
            return Err(ProfileError::OutOfDomain {
                xi,
                half_width: self.half_width,
            });
        }
        Ok(self.eval(xi))
    }

    /// Points where `h` fails to be smooth, together with `±D`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let d = self.half_width;
        let mut pts = vec![-d, d];
        match &self.kind {
            ProfileKind::Rhombus { beta } => pts.push(*beta),
            ProfileKind::Averaged { sorted, .. } => pts.extend(sorted.iter().copied()),
            ProfileKind::CircleCap => {
                if d > 1.0 {
                    pts.extend([-1.0 / d, 1.0 / d]);
                }
            }
            ProfileKind::Sampled { xi, .. } => pts.extend(xi.iter().copied()),
        }
        pts.retain(|x| x.abs() <= d);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Midpoint concavity on the union of breakpoints and a uniform grid.
    pub fn check_concave(&self, grid: usize) -> Result<(), ProfileError> {
        let pts = evaluation_grid(&[self], grid);
        let vals: Vec<f64> = pts.iter().map(|&x| self.eval(x)).collect();
        for i in 1..pts.len().saturating_sub(1) {
            let (x0, x1, x2) = (pts[i - 1], pts[i], pts[i + 1]);
            let lam = (x2 - x1) / (x2 - x0);
            let chord = lam * vals[i - 1] + (1.0 - lam) * vals[i + 1];
            if vals[i] < chord - CONCAVITY_TOL {
                return Err(ProfileError::NotConcave { xi: x1 });
            }
        }
        Ok(())
    }
}

/// `Σ_j |ξ − β_j|` from sorted peaks and their prefix sums.
fn abs_dev_sum(sorted: &[f64], prefix: &[f64], xi: f64) -> f64 {
    let below = sorted.partition_point(|&b| b < xi);
    let k = sorted.len();
    let sum_below = prefix[below];
    let sum_above = prefix[k] - sum_below;
    xi * below as f64 - sum_below + sum_above - xi * (k - below) as f64
}

fn circle_cap_eval(d: f64, xi: f64) -> f64 {
    let a = xi.abs();
    if a * d <= 1.0 {
        (1.0 - xi * xi).max(0.0).sqrt()
    } else {
        (d - a) / (d * d - 1.0).sqrt()
    }
}

fn interpolate(grid: &[f64], h: &[f64], xi: f64) -> f64 {
    let i = grid.partition_point(|&g| g <= xi);
    if i == 0 {
        return h[0];
    }
    if i >= grid.len() {
        return h[h.len() - 1];
    }
    let (x0, x1) = (grid[i - 1], grid[i]);
    let t = (xi - x0) / (x1 - x0);
    h[i - 1] + t * (h[i] - h[i - 1])
}

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(move |i| if i + 1 == n { hi } else { lo + step * i as f64 })
}

/// Union of breakpoints of all profiles and a uniform grid on `[−D, D]`.
pub fn evaluation_grid(profiles: &[&DualProfile], grid: usize) -> Vec<f64> {
    let d = profiles[0].half_width;
    let mut pts: Vec<f64> = linspace(-d, d, grid.max(2)).collect();
    for p in profiles {
        pts.extend(p.breakpoints());
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// A norm on ℝ².
#[derive(Debug, Clone, PartialEq)]
pub enum Norm2D {
    /// `u|p₁| + v|p₂|` with `p = p₁(1,1) + p₂(1,−1)`.
    Rhombus { u: f64, v: f64 },
    /// Recovered from a concave dual profile.
    Dual(DualProfile),
}

impl Norm2D {
    /// `D = ‖e₁‖`.
    pub fn half_width(&self) -> f64 {
        match self {
            Norm2D::Rhombus { u, v } => 0.5 * (u + v),
            Norm2D::Dual(h) => h.half_width,
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Norm2D::Rhombus { u, v } => {
                let p1 = 0.5 * (x + y);
                let p2 = 0.5 * (x - y);
                u * p1.abs() + v * p2.abs()
            }
            Norm2D::Dual(h) => dual_norm_eval(h, x, y),
        }
    }
}

fn dual_norm_eval(h: &DualProfile, x: f64, y: f64) -> f64 {
    let d = h.half_width;
    if y == 0.0 {
        return d * x.abs();
    }
    let (x, y) = if y < 0.0 { (-x, -y) } else { (x, y) };
    match &h.kind {
        ProfileKind::Rhombus { beta } => [-d, d, beta.clamp(-d, d)]
            .into_iter()
            .map(|xi| xi * x + (d - (xi - beta).abs()) * y)
            .fold(f64::NEG_INFINITY, f64::max),
        ProfileKind::Averaged { sorted, prefix } => {
            let k = sorted.len() as f64;
            let objective = |xi: f64| xi * x + (d - abs_dev_sum(sorted, prefix, xi) / k) * y;
            let ends = objective(-d).max(objective(d));
            sorted.iter().map(|&b| objective(b.clamp(-d, d))).fold(ends, f64::max)
        }
        ProfileKind::CircleCap => {
            let r = x.hypot(y);
            let mut best = d * x.abs();
            let xi_star = x / r;
            if xi_star.abs() * d <= 1.0 {
                best = best.max(r);
            } else {
                let j = 1.0 / d;
                let cap = (1.0 - j * j).sqrt();
                best = best.max(j * x.abs() + cap * y);
            }
            best
        }
        ProfileKind::Sampled { xi, h } => xi
            .iter()
            .zip(h)
            .map(|(&s, &hv)| s * x + hv * y)
            .fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Convex section `f(x) = ‖(x, 1)‖` of a norm with `‖e₁‖ = D`.
#[derive(Clone)]
pub struct NormSection {
    half_width: f64,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for NormSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NormSection")
            .field("half_width", &self.half_width)
            .finish_non_exhaustive()
    }
}

impl NormSection {
    pub fn new<F>(half_width: f64, f: F) -> Result<Self, ProfileError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        positive("D", half_width)?;
        Ok(Self {
            half_width,
            f: Arc::new(f),
        })
    }

    pub fn of_norm(norm: &Norm2D) -> Self {
        let n = norm.clone();
        Self {
            half_width: norm.half_width(),
            f: Arc::new(move |x| n.eval(x, 1.0)),
        }
    }

    /// `√(1 + x²)`, the section of the Euclidean norm.
    pub fn euclidean() -> Self {
        Self {
            half_width: 1.0,
            f: Arc::new(|x: f64| x.hypot(1.0)),
        }
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }
}

const BRACKET_LIMIT: f64 = 1_099_511_627_776.0; // 2⁴⁰

/// `h(ξ) = inf_x (f(x) − ξx)` sampled on `grid` uniform points of `[−D, D]`.
///
/// The minimizer is bracketed by doubling outward until `f(x) − ξx` stops
/// decreasing; at `|ξ| = D` the infimum is a limit and the bracket is capped.
pub fn legendre_profile(section: &NormSection, grid: usize) -> Result<DualProfile, ProfileError> {
    if grid < 3 {
        return Err(ProfileError::GridTooSmall { min: 3, got: grid });
    }
    let d = section.half_width;
    let xs: Vec<f64> = linspace(-d, d, grid).collect();
    let mut hs = Vec::with_capacity(grid);
    for &xi in &xs {
        hs.push(legendre_at(section, xi)?);
    }
    let profile = DualProfile::sampled(xs, hs)?;
    profile.check_concave(0)?;
    Ok(profile)
}

fn legendre_at(section: &NormSection, xi: f64) -> Result<f64, ProfileError> {
    let phi = |x: f64| section.eval(x) - xi * x;
    let boundary = xi.abs() >= section.half_width * (1.0 - 1e-12);
    let mut reach = [1.0f64, 1.0];
    for (side, sign) in [(0usize, 1.0f64), (1, -1.0)] {
        loop {
            let x = sign * reach[side];
            if phi(2.0 * x) >= phi(x) {
                break;
            }
            if reach[side] >= BRACKET_LIMIT {
                if boundary {
                    break;
                }
                return Err(ProfileError::NoBracket { xi });
            }
            reach[side] *= 2.0;
        }
    }
    let (lo, hi) = (-2.0 * reach[1], 2.0 * reach[0]);
    let tol = 1e-13 * (hi - lo).max(1.0);
    let (_, v) = golden_section_min(phi, lo, hi, tol);
    if !v.is_finite() {
        return Err(ProfileError::NoBracket { xi });
    }
    Ok(v)
}

/// The rhombus norm `‖·‖_{u,v}`.
pub fn rhombus_norm(u: f64, v: f64) -> Result<Norm2D, ProfileError> {
    positive("u", u)?;
    positive("v", v)?;
    Ok(Norm2D::Rhombus { u, v })
}

/// Dual profile of `‖·‖_{u,v}`: `D − |ξ − β|` with `D = (u+v)/2`, `β = (u−v)/2`.
pub fn rhombus_profile(u: f64, v: f64) -> Result<DualProfile, ProfileError> {
    positive("u", u)?;
    positive("v", v)?;
    DualProfile::rhombus_with_beta(0.5 * (u + v), 0.5 * (u - v))
}

/// Recovers the norm from a concave profile.
pub fn norm_from_profile(h: &DualProfile) -> Result<Norm2D, ProfileError> {
    if matches!(h.kind, ProfileKind::Sampled { .. }) {
        h.check_concave(0)?;
    }
    Ok(Norm2D::Dual(h.clone()))
}

/// `h^{m,n}(ξ) = (1/(n−m))·Σ_{j=m}^{n−1} (D − |ξ − β_j|)`.
pub fn averaged_profile<F>(betas: F, m: i64, n: i64, half_width: f64) -> Result<DualProfile, ProfileError>
where
    F: Fn(i64) -> f64,
{
    if m >= n {
        return Err(ProfileError::EmptyWindow { m, n });
    }
    let bs: Vec<f64> = (m..n).map(betas).collect();
    DualProfile::averaged_from(half_width, &bs)
}

/// The target profile: `√(1 − ξ²)` for `|ξ| ≤ √2/2`, `√2 − |ξ|` beyond.
pub fn h0(xi: f64) -> Result<f64, ProfileError> {
    if !xi.is_finite() || xi.abs() > TARGET_HALF_WIDTH + DOMAIN_SLACK {
        return Err(ProfileError::OutOfDomain {
            xi,
            half_width: TARGET_HALF_WIDTH,
        });
    }
    Ok(h0_unchecked(xi))
}

#[inline]
pub(crate) fn h0_unchecked(xi: f64) -> f64 {
    circle_cap_eval(TARGET_HALF_WIDTH, xi)
}

/// `‖(x, y)‖⁰ = max(|(x, y)|, √2·|x|)`.
#[inline]
pub fn norm0(x: f64, y: f64) -> f64 {
    x.hypot(y).max(SQRT_2 * x.abs())
}

/// `max |h₁ − h₂|` over both profiles' breakpoints plus a uniform grid.
pub fn profile_sup_distance(h1: &DualProfile, h2: &DualProfile, grid: usize) -> Result<f64, ProfileError> {
    if (h1.half_width - h2.half_width).abs() > DOMAIN_SLACK {
        return Err(ProfileError::DomainMismatch(h1.half_width, h2.half_width));
    }
    Ok(evaluation_grid(&[h1, h2], grid)
        .into_iter()
        .map(|x| (h1.eval(x) - h2.eval(x)).abs())
        .fold(0.0, f64::max))
}
