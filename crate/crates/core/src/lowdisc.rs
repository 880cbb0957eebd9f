//! Irrational rotations by quadratic irrationals.
//!
//! Everything downstream is driven by the orbit `j·α mod 1` of a badly
//! approximable rotation number. This module provides the orbit itself, the
//! folded sequence `α_j = 2·d(jα, ℤ)`, Diophantine margins, and the ergodic
//! sums whose boundedness makes the planar construction work.

use std::f64::consts::SQRT_2;
use std::fmt;

use thiserror::Error;

use crate::quad;

/// Largest `|j|` for which `j·α` is evaluated directly in `f64`.
///
/// Up to this index the absolute error of the product stays below `10⁻⁹`,
/// well under every tolerance used by the verification suites.
pub const MAX_INDEX: i64 = 10_000_000;

/// Absolute tolerance used for every integral in this module.
pub const QUADRATURE_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum LowDiscError {
    #[error("input {0} is not finite")]
    NonFinite(f64),
    #[error("rotation number {0} is not in (0, 1)")]
    OutOfUnitInterval(f64),
    #[error("rotation number {value} looks rational (k·d(kα, ℤ) vanishes at k = {k})")]
    LooksRational { value: f64, k: u64 },
    #[error("unknown rotation label `{0}`")]
    UnknownLabel(String),
    #[error("empty window [{m}, {n})")]
    EmptyWindow { m: i64, n: i64 },
    #[error("index {0} exceeds the supported range ±{MAX_INDEX}")]
    IndexOutOfRange(i64),
    #[error("quadrature did not reach tolerance {tol:e} on [{a}, {b}]")]
    Quadrature { a: f64, b: f64, tol: f64 },
}

/// Which rotation number a [`QuadraticIrrational`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlphaLabel {
    Sqrt2Minus1,
    GoldenConjugate,
    Custom,
}

impl AlphaLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            AlphaLabel::Sqrt2Minus1 => "sqrt2_minus_1",
            AlphaLabel::GoldenConjugate => "golden_conjugate",
            AlphaLabel::Custom => "custom",
        }
    }
}

impl fmt::Display for AlphaLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A badly approximable rotation number in `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticIrrational {
    value: f64,
    label: AlphaLabel,
}

impl Default for QuadraticIrrational {
    fn default() -> Self {
        Self::sqrt2_minus_1()
    }
}

impl QuadraticIrrational {
    /// `√2 − 1`, continued fraction `[0; 2, 2, 2, …]`.
    pub fn sqrt2_minus_1() -> Self {
        Self {
            value: SQRT_2 - 1.0,
            label: AlphaLabel::Sqrt2Minus1,
        }
    }

    /// `(√5 − 1)/2`, continued fraction `[0; 1, 1, 1, …]`.
    pub fn golden_conjugate() -> Self {
        Self {
            value: (5f64.sqrt() - 1.0) / 2.0,
            label: AlphaLabel::GoldenConjugate,
        }
    }

    /// A caller-supplied rotation number. It must lie in `(0, 1)` and have a
    /// positive Liouville margin up to `k = 10⁵`.
    pub fn custom(value: f64) -> Result<Self, LowDiscError> {
        if !value.is_finite() {
            return Err(LowDiscError::NonFinite(value));
        }
        if value <= 0.0 || value >= 1.0 {
            return Err(LowDiscError::OutOfUnitInterval(value));
        }
        for k in 1..=100_000u64 {
            if frac_dist(k as f64 * value) == 0.0 {
                return Err(LowDiscError::LooksRational { value, k });
            }
        }
        Ok(Self {
            value,
            label: AlphaLabel::Custom,
        })
    }

    /// Parses `sqrt2_minus_1`, `golden_conjugate`, or a decimal number.
    pub fn from_label(label: &str) -> Result<Self, LowDiscError> {
        match label {
            "sqrt2_minus_1" => Ok(Self::sqrt2_minus_1()),
            "golden_conjugate" => Ok(Self::golden_conjugate()),
            other => match other.parse::<f64>() {
                Ok(v) => Self::custom(v),
                Err(_) => Err(LowDiscError::UnknownLabel(other.to_string())),
            },
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn label(&self) -> AlphaLabel {
        self.label
    }

    pub fn liouville_margin(&self, k_max: u64) -> f64 {
        liouville_margin(self.value, k_max)
    }
}

#[inline]
pub(crate) fn frac_dist(t: f64) -> f64 {
    (t - t.round()).abs()
}

/// Distance from `t` to the nearest integer.
pub fn dist_to_int(t: f64) -> Result<f64, LowDiscError> {
    if !t.is_finite() {
        return Err(LowDiscError::NonFinite(t));
    }
    Ok(frac_dist(t))
}

/// The folded orbit `α_j = 2·d(jα, ℤ) ∈ [0, 1]`. Even in `j`.
///
/// Panics if `|j| > MAX_INDEX`.
#[inline]
pub fn alpha_seq(alpha: &QuadraticIrrational, j: i64) -> f64 {
    assert!(j.abs() <= MAX_INDEX, "index {j} outside ±{MAX_INDEX}");
    2.0 * frac_dist(j as f64 * alpha.value)
}

/// `min_{1≤k≤K} k·d(kα, ℤ)`: an empirical lower witness for the Liouville
/// constant of `alpha`. Takes a raw `f64` so that rationals can be probed.
pub fn liouville_margin(alpha: f64, k_max: u64) -> f64 {
    (1..=k_max.max(1))
        .map(|k| k as f64 * frac_dist(k as f64 * alpha))
        .fold(f64::INFINITY, f64::min)
}

/// `Σ_{k=1}^{K} 1/(k²·d(kα, ℤ))`, the series whose convergence bounds the
/// Birkhoff sums of functions with square-summable-derivative spectrum.
pub fn fourier_tail_sum(alpha: &QuadraticIrrational, k_max: u64) -> f64 {
    (1..=k_max.max(1))
        .map(|k| {
            let kf = k as f64;
            1.0 / (kf * kf * frac_dist(kf * alpha.value))
        })
        .sum()
}

/// Fractional part in `[0, 1)`.
#[inline]
pub fn frac(t: f64) -> f64 {
    let f = t - t.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Birkhoff sum `Σ_{j=m}^{n−1} f({jα})`.
pub fn ergodic_sum<F>(f: F, alpha: &QuadraticIrrational, m: i64, n: i64) -> f64
where
    F: Fn(f64) -> f64,
{
    (m..n).map(|j| f(frac(j as f64 * alpha.value))).sum()
}

/// `∫₀¹ f` by adaptive Simpson to [`QUADRATURE_TOL`].
pub fn unit_integral<F>(f: F) -> Result<f64, LowDiscError>
where
    F: Fn(f64) -> f64,
{
    quad::adaptive_simpson(&f, 0.0, 1.0, QUADRATURE_TOL).map_err(|e| LowDiscError::Quadrature {
        a: e.a,
        b: e.b,
        tol: QUADRATURE_TOL,
    })
}

/// `|Σ_{j=m}^{n−1} f(α_j) − (n−m)·∫₀¹f|`.
pub fn integral_approx_error<F>(f: F, alpha: &QuadraticIrrational, m: i64, n: i64) -> Result<f64, LowDiscError>
where
    F: Fn(f64) -> f64,
{
    if m >= n {
        return Err(LowDiscError::EmptyWindow { m, n });
    }
    for j in [m, n - 1] {
        if j.abs() > MAX_INDEX {
            return Err(LowDiscError::IndexOutOfRange(j));
        }
    }
    let integral = unit_integral(&f)?;
    let sum: f64 = (m..n).map(|j| f(alpha_seq(alpha, j))).sum();
    Ok((sum - (n - m) as f64 * integral).abs())
}

/// Folds a function on `[0, 1]` onto the circle: `g(x) = f₀(2x)` on
/// `[0, ½]` and `f₀(2 − 2x)` on `[½, 1]`, so that `g(0) = g(1)` and
/// `g({jα}) = f₀(α_j)`.
pub fn fold_to_circle<F>(f0: F) -> impl Fn(f64) -> f64
where
    F: Fn(f64) -> f64,
{
    move |x: f64| {
        let x = frac(x);
        if x <= 0.5 {
            f0(2.0 * x)
        } else {
            f0(2.0 - 2.0 * x)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    // Independent oracle: nearest integer by explicit search over floor/ceil.
    fn dist_oracle(t: f64) -> f64 {
        let lo = t.floor();
        (t - lo).min(lo + 1.0 - t)
    }

    #[test]
    fn dist_to_int_examples() {
        assert_eq!(dist_to_int(0.25).unwrap(), 0.25);
        assert_eq!(dist_to_int(0.75).unwrap(), 0.25);
        assert_abs_diff_eq!(dist_to_int(-0.4).unwrap(), 0.4, epsilon = 1e-15);
        assert!(dist_to_int(f64::NAN).is_err());
        assert!(dist_to_int(f64::INFINITY).is_err());
    }

    proptest! {
        #[test]
        fn dist_to_int_is_even_and_matches_oracle(t in -1e6f64..1e6) {
            let d = dist_to_int(t).unwrap();
            prop_assert_eq!(d, dist_to_int(-t).unwrap());
            prop_assert!((d - dist_oracle(t)).abs() < 1e-9);
            prop_assert!((0.0..=0.5).contains(&d));
        }
    }

    #[test]
    fn alpha_seq_examples() {
        let a = QuadraticIrrational::sqrt2_minus_1();
        assert_eq!(alpha_seq(&a, 0), 0.0);
        // d(√2−1, ℤ) = √2−1 since √2−1 < ½.
        let expected = 2.0 * dist_oracle(SQRT_2 - 1.0);
        assert_abs_diff_eq!(alpha_seq(&a, 1), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(alpha_seq(&a, 1), 0.828_427_124_746_190_1, epsilon = 1e-12);
        assert_eq!(alpha_seq(&a, -1), alpha_seq(&a, 1));
        let g = QuadraticIrrational::golden_conjugate();
        assert_eq!(alpha_seq(&g, 0), 0.0);
    }

    #[test]
    #[should_panic]
    fn alpha_seq_rejects_huge_index() {
        alpha_seq(&QuadraticIrrational::default(), MAX_INDEX + 1);
    }

    #[test]
    fn custom_alpha_validation() {
        assert!(QuadraticIrrational::custom(0.5).is_err());
        assert!(QuadraticIrrational::custom(0.0).is_err());
        assert!(QuadraticIrrational::custom(1.2).is_err());
        assert!(QuadraticIrrational::custom(f64::NAN).is_err());
        let c = QuadraticIrrational::custom(3f64.sqrt() - 1.0).unwrap();
        assert_eq!(c.label(), AlphaLabel::Custom);
        assert_eq!(
            QuadraticIrrational::from_label("golden_conjugate").unwrap(),
            QuadraticIrrational::golden_conjugate()
        );
        assert!(QuadraticIrrational::from_label("pi-ish").is_err());
    }

    #[test]
    fn liouville_margin_examples() {
        assert_eq!(liouville_margin(0.5, 2), 0.0);
        let g = QuadraticIrrational::golden_conjugate();
        let c = g.liouville_margin(10_000);
        // The infimum of k·d(kφ) over Fibonacci denominators tends to 1/√5.
        assert!(c > 0.38 && c < 1.0 / 5f64.sqrt() + 1e-3, "golden margin {c}");
        let s = QuadraticIrrational::sqrt2_minus_1().liouville_margin(10_000);
        assert!(s > 0.3, "sqrt2 margin {s}");
    }

    #[test]
    fn liouville_margin_is_not_violated_later() {
        for a in [
            QuadraticIrrational::sqrt2_minus_1(),
            QuadraticIrrational::golden_conjugate(),
        ] {
            let c_hat = a.liouville_margin(1_000);
            let later = a.liouville_margin(100_000);
            assert!(later >= c_hat - 1e-9, "{}: {later} < {c_hat}", a.label());
        }
    }

    #[test]
    fn fourier_tail_sum_examples() {
        let a = QuadraticIrrational::sqrt2_minus_1();
        assert_abs_diff_eq!(fourier_tail_sum(&a, 1), 1.0 / (SQRT_2 - 1.0), epsilon = 1e-12);
        assert_abs_diff_eq!(fourier_tail_sum(&a, 1), 2.414_213_562_373_095, epsilon = 1e-12);
        let s1 = fourier_tail_sum(&a, 100);
        let s2 = fourier_tail_sum(&a, 1_000);
        let s3 = fourier_tail_sum(&a, 10_000);
        assert!(s2 >= s1 && s3 >= s2);
        assert!(s3 - s2 < s2 - s1);
    }

    #[test]
    fn ergodic_sum_examples() {
        let a = QuadraticIrrational::sqrt2_minus_1();
        assert_eq!(ergodic_sum(|_| 0.0, &a, -5, 17), 0.0);
        let cos = |x: f64| (2.0 * PI * x).cos();
        assert_abs_diff_eq!(ergodic_sum(cos, &a, 0, 1), 1.0, epsilon = 1e-15);
        let bound = (0..4)
            .map(|e| ergodic_sum(cos, &a, 0, 10i64.pow(3 + e)).abs())
            .fold(0.0, f64::max);
        assert!(bound < 5.0, "cos Birkhoff sum grew to {bound}");
    }

    #[test]
    fn integral_approx_error_examples() {
        let a = QuadraticIrrational::sqrt2_minus_1();
        assert!(integral_approx_error(|_| 1.0, &a, -3, 40).unwrap() < 1e-9);
        assert_abs_diff_eq!(integral_approx_error(|x| x, &a, 0, 1).unwrap(), 0.5, epsilon = 1e-10);
        assert!(matches!(
            integral_approx_error(|x| x, &a, 3, 3),
            Err(LowDiscError::EmptyWindow { .. })
        ));
        // A function with a jump-free kink still integrates.
        let e = integral_approx_error(|x: f64| (x - 0.3).abs(), &a, 0, 10).unwrap();
        assert!(e.is_finite());
    }

    #[test]
    fn fold_to_circle_examples() {
        let zero = fold_to_circle(|_| 0.0);
        assert_eq!(zero(0.3), 0.0);
        let g = fold_to_circle(|x| x - 0.5);
        assert_abs_diff_eq!(g(0.25), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g(0.75), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g(0.5), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g(0.0), g(1.0 - 1e-12), epsilon = 1e-9);
    }

    #[test]
    fn fold_identity_for_square() {
        let a = QuadraticIrrational::sqrt2_minus_1();
        let f = |x: f64| x * x;
        let mean = 1.0 / 3.0;
        let lhs: f64 = (0..1000).map(|j| f(alpha_seq(&a, j))).sum::<f64>() - 1000.0 * mean;
        let g = fold_to_circle(|x: f64| f(x) - mean);
        let rhs = ergodic_sum(g, &a, 0, 1000);
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-9 * 1000.0);
    }
}
