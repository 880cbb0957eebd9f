//! The peak sequence `β_j` that makes averaged rhombus profiles converge to
//! the target profile `h⁰`.
//!
//! `β_j = φ⁻¹(α_j)` where `α_j = 2·d(jα, ℤ)` and `φ(t) = (h′(t) + 1)/2` for
//! `h(t) = √2 − √(1 − t²)` on `[−√2/2, √2/2]`.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use thiserror::Error;

use crate::lowdisc::{alpha_seq, QuadraticIrrational, MAX_INDEX};
use crate::profiles::{h0_unchecked, TARGET_HALF_WIDTH};

/// Peaks live in `[−√2/2, √2/2]`.
pub const BETA_BOUND: f64 = FRAC_1_SQRT_2;

#[derive(Debug, Error, PartialEq)]
pub enum BetaError {
    #[error("t = {0} lies outside [−√2/2, √2/2]")]
    PhiDomain(f64),
    #[error("y = {0} lies outside [0, 1]")]
    PhiInvDomain(f64),
    #[error("index {0} exceeds the supported range ±{MAX_INDEX}")]
    IndexOutOfRange(i64),
    #[error("empty window [{m}, {n})")]
    EmptyWindow { m: i64, n: i64 },
}

/// `φ(t) = (t/√(1 − t²) + 1)/2`, increasing from 0 at `−√2/2` to 1 at `√2/2`.
pub fn phi(t: f64) -> Result<f64, BetaError> {
    if !(t.abs() <= BETA_BOUND + 1e-15) {
        return Err(BetaError::PhiDomain(t));
    }
    let t = t.clamp(-BETA_BOUND, BETA_BOUND);
    Ok(0.5 * (t / (1.0 - t * t).sqrt() + 1.0))
}

/// Inverse of [`phi`]: with `s = 2y − 1`, `t = s/√(1 + s²)`.
pub fn phi_inv(y: f64) -> Result<f64, BetaError> {
    if !(0.0..=1.0).contains(&y) {
        return Err(BetaError::PhiInvDomain(y));
    }
    Ok(phi_inv_unchecked(y))
}

#[inline]
fn phi_inv_unchecked(y: f64) -> f64 {
    let s = 2.0 * y - 1.0;
    s / (1.0 + s * s).sqrt()
}

/// The sequence `β_j` for a fixed rotation number, with `D = √2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BetaSequence {
    alpha: QuadraticIrrational,
}

impl BetaSequence {
    pub fn new(alpha: QuadraticIrrational) -> Self {
        Self { alpha }
    }

    pub fn alpha(&self) -> &QuadraticIrrational {
        &self.alpha
    }

    pub fn half_width(&self) -> f64 {
        TARGET_HALF_WIDTH
    }

    pub fn beta(&self, j: i64) -> Result<f64, BetaError> {
        if j.abs() > MAX_INDEX {
            return Err(BetaError::IndexOutOfRange(j));
        }
        Ok(phi_inv_unchecked(alpha_seq(&self.alpha, j)))
    }

    /// Length of the edge `(i, j) → (i+1, j+1)`: `√2 + β_j`.
    pub fn u(&self, j: i64) -> Result<f64, BetaError> {
        Ok(SQRT_2 + self.beta(j)?)
    }

    /// Length of the edge `(i, j) → (i−1, j+1)`: `√2 − β_j`.
    pub fn v(&self, j: i64) -> Result<f64, BetaError> {
        Ok(SQRT_2 - self.beta(j)?)
    }

    /// `β_m, …, β_{n−1}`.
    pub fn window(&self, m: i64, n: i64) -> Result<Vec<f64>, BetaError> {
        if m >= n {
            return Err(BetaError::EmptyWindow { m, n });
        }
        (m..n).map(|j| self.beta(j)).collect()
    }

    /// `|(n−m)·h⁰(ξ) − Σ_{j=m}^{n−1} (√2 − |ξ − β_j|)|`.
    pub fn modsum_error(&self, xi: f64, m: i64, n: i64) -> Result<f64, BetaError> {
        let betas = self.window(m, n)?;
        Ok(modsum_error_of(&betas, xi))
    }

    /// `sup_ξ` of [`Self::modsum_error`] over `[−√2, √2]`, computed exactly.
    pub fn window_sup_error(&self, m: i64, n: i64) -> Result<f64, BetaError> {
        let betas = self.window(m, n)?;
        let mut w = SortedWindow::default();
        for b in betas {
            w.insert(b);
        }
        Ok(w.sup_error())
    }
}

/// [`BetaSequence::modsum_error`] for an explicit list of peaks.
pub fn modsum_error_of(betas: &[f64], xi: f64) -> f64 {
    let sum: f64 = betas.iter().map(|b| SQRT_2 - (xi - b).abs()).sum();
    (betas.len() as f64 * h0_unchecked(xi) - sum).abs()
}

/// Multiset of peaks kept in sorted order, supporting sliding windows and the
/// exact supremum of `|Σ(√2 − |ξ − β|) − k·h⁰(ξ)|` over `ξ ∈ [−√2, √2]`.
///
/// On each interval between consecutive breakpoints (the peaks, `±√2/2` and
/// `±√2`) the sum is linear and `−k·h⁰` is convex, so the signed error is
/// convex there: its maximum sits at an endpoint and its minimum either at an
/// endpoint or at the unique point where `h⁰′(ξ) = slope/k`.
#[derive(Debug, Clone, Default)]
pub struct SortedWindow {
    sorted: Vec<f64>,
}

impl SortedWindow {
    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn insert(&mut self, b: f64) {
        let at = self.sorted.partition_point(|&x| x < b);
        self.sorted.insert(at, b);
    }

    /// Removes one copy of `b`; returns whether it was present.
    pub fn remove(&mut self, b: f64) -> bool {
        let at = self.sorted.partition_point(|&x| x < b);
        if at < self.sorted.len() && self.sorted[at] == b {
            self.sorted.remove(at);
            true
        } else {
            false
        }
    }

    pub fn sup_error(&self) -> f64 {
        let k = self.sorted.len();
        if k == 0 {
            return 0.0;
        }
        let kf = k as f64;
        let d = SQRT_2;
        let total: f64 = self.sorted.iter().sum();

        // Breakpoints in increasing order with the number of peaks strictly
        // below each and their sum.
        let mut pts: Vec<f64> = Vec::with_capacity(k + 4);
        let (lo, hi) = (
            self.sorted.partition_point(|&x| x < -FRAC_1_SQRT_2),
            self.sorted.partition_point(|&x| x < FRAC_1_SQRT_2),
        );
        pts.push(-d);
        pts.extend_from_slice(&self.sorted[..lo]);
        pts.push(-FRAC_1_SQRT_2);
        pts.extend_from_slice(&self.sorted[lo..hi]);
        pts.push(FRAC_1_SQRT_2);
        pts.extend_from_slice(&self.sorted[hi..]);
        pts.push(d);

        let mut best = 0.0f64;
        let mut below = 0usize;
        let mut sum_below = 0.0;
        let signed = |xi: f64, below: usize, sum_below: f64| -> f64 {
            let abs_dev = xi * below as f64 - sum_below + (total - sum_below) - xi * (k - below) as f64;
            (kf * d - abs_dev) - kf * h0_unchecked(xi)
        };
        for w in 0..pts.len() {
            let xi = pts[w];
            // Count of peaks ≤ xi, for the piece starting at xi.
            while below < k && self.sorted[below] <= xi {
                sum_below += self.sorted[below];
                below += 1;
            }
            best = best.max(signed(xi, below, sum_below).abs());
            if w + 1 < pts.len() {
                let next = pts[w + 1];
                if next > xi {
                    // On (xi, next) the sum has slope (#above − #below).
                    let slope = (k - below) as f64 - below as f64;
                    let t = slope / kf;
                    // h⁰′(ξ) = −ξ/√(1 − ξ²) on the cap; solve for ξ.
                    let crit = -t / (1.0 + t * t).sqrt();
                    if crit > xi && crit < next && crit.abs() < FRAC_1_SQRT_2 {
                        best = best.max(signed(crit, below, sum_below).abs());
                    }
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lowdisc::unit_integral;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Oracle: bisection on the monotone φ.
    fn phi_inv_bisect(y: f64) -> f64 {
        let (mut lo, mut hi) = (-BETA_BOUND, BETA_BOUND);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if phi(mid).unwrap() < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn phi_examples() {
        assert_abs_diff_eq!(phi(0.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(phi(BETA_BOUND).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(phi(-BETA_BOUND).unwrap(), 0.0, epsilon = 1e-12);
        assert!(phi(0.8).is_err());
        assert!(phi(f64::NAN).is_err());
    }

    #[test]
    fn phi_inv_examples_and_bisection() {
        assert_abs_diff_eq!(phi_inv(0.5).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(phi_inv(1.0).unwrap(), BETA_BOUND, epsilon = 1e-15);
        assert_abs_diff_eq!(phi_inv(0.0).unwrap(), -BETA_BOUND, epsilon = 1e-15);
        let t = phi_inv(0.75).unwrap();
        assert_abs_diff_eq!(t, 0.447_213_595_499_958, epsilon = 1e-12);
        assert_abs_diff_eq!(t, phi_inv_bisect(0.75), epsilon = 1e-12);
        for i in 0..=100 {
            let y = i as f64 / 100.0;
            assert_abs_diff_eq!(phi_inv(y).unwrap(), phi_inv_bisect(y), epsilon = 1e-12);
        }
        assert!(phi_inv(1.01).is_err());
        assert!(phi_inv(-0.01).is_err());
    }

    #[test]
    fn phi_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let y: f64 = rng.random_range(0.0..=1.0);
            assert_abs_diff_eq!(phi(phi_inv(y).unwrap()).unwrap(), y, epsilon = 1e-12);
        }
    }

    #[test]
    fn beta_examples() {
        let s = BetaSequence::default();
        assert_abs_diff_eq!(s.beta(0).unwrap(), -BETA_BOUND, epsilon = 1e-15);
        let b1 = s.beta(1).unwrap();
        let a1 = 2.0 * (SQRT_2 - 1.0);
        assert_abs_diff_eq!(b1, phi_inv_bisect(a1), epsilon = 1e-12);
        assert_abs_diff_eq!(b1, 0.549_009_404_519, epsilon = 1e-9);
        for j in 1..200 {
            assert_eq!(s.beta(j).unwrap(), s.beta(-j).unwrap());
        }
        assert!(s.beta(MAX_INDEX + 1).is_err());
    }

    #[test]
    fn edge_lengths_are_bounded_and_balanced() {
        let s = BetaSequence::default();
        for j in -2000..2000 {
            let (u, v) = (s.u(j).unwrap(), s.v(j).unwrap());
            let range = BETA_BOUND - 1e-15..=3.0 * BETA_BOUND + 1e-15;
            assert!(range.contains(&u) && range.contains(&v));
            assert_abs_diff_eq!(u + v, 2.0 * SQRT_2, epsilon = 1e-15);
        }
    }

    #[test]
    fn integral_of_folded_distance_recovers_h() {
        for i in 0..20 {
            let x = -BETA_BOUND + 2.0 * BETA_BOUND * (i as f64 + 0.5) / 20.0;
            let integral = unit_integral(|y| (x - phi_inv(y).unwrap()).abs()).unwrap();
            let h = SQRT_2 - (1.0 - x * x).sqrt();
            assert_abs_diff_eq!(integral, h, epsilon = 1e-8);
        }
    }

    #[test]
    fn modsum_error_examples() {
        let s = BetaSequence::default();
        // Single window at j = 0: β₀ = −√2/2 and ξ = −√2/2.
        let e = s.modsum_error(-BETA_BOUND, 0, 1).unwrap();
        assert_abs_diff_eq!(e, SQRT_2 - BETA_BOUND, epsilon = 1e-12);
        // At ξ = √2 every summand is √2 − (√2 − β_j) = β_j.
        let betas = s.window(0, 50).unwrap();
        let direct = betas.iter().sum::<f64>().abs();
        assert_abs_diff_eq!(s.modsum_error(SQRT_2, 0, 50).unwrap(), direct, epsilon = 1e-12);
        assert!(s.modsum_error(0.0, 4, 4).is_err());
    }

    #[test]
    fn exact_sup_dominates_dense_grid() {
        let s = BetaSequence::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..40 {
            let m = rng.random_range(-5000..5000);
            let k = rng.random_range(1..300);
            let exact = s.window_sup_error(m, m + k).unwrap();
            let betas = s.window(m, m + k).unwrap();
            let dense = (0..=20_000)
                .map(|i| -SQRT_2 + 2.0 * SQRT_2 * i as f64 / 20_000.0)
                .map(|xi| modsum_error_of(&betas, xi))
                .fold(0.0, f64::max);
            assert!(exact >= dense - 1e-9, "exact {exact} < dense {dense}");
            assert!(exact - dense < 1e-3 * k as f64, "exact {exact} dense {dense}");
        }
    }

    #[test]
    fn sliding_window_matches_rebuild() {
        let s = BetaSequence::default();
        let mut w = SortedWindow::default();
        for j in 0..100 {
            w.insert(s.beta(j).unwrap());
        }
        for m in 0..50 {
            assert!(w.remove(s.beta(m).unwrap()));
            w.insert(s.beta(m + 100).unwrap());
            let rebuilt = s.window_sup_error(m + 1, m + 101).unwrap();
            assert_abs_diff_eq!(w.sup_error(), rebuilt, epsilon = 1e-12);
        }
        assert!(!w.remove(7.0));
    }
}
