//! Adaptive Simpson quadrature and golden-section minimization.

const MAX_DEPTH: u32 = 48;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureError {
    pub a: f64,
    pub b: f64,
}

/// `∫_a^b f` to absolute tolerance `tol`, with Richardson correction.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64, QuadratureError>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    let fa = f(a);
    let fb = f(b);
    let c = 0.5 * (a + b);
    let fc = f(c);
    let whole = simpson(a, b, fa, fc, fb);
    recurse(f, a, b, fa, fc, fb, whole, tol, MAX_DEPTH)
}

#[inline]
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, QuadratureError>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 || !delta.is_finite() {
        return Err(QuadratureError { a, b });
    }
    let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Minimizes a unimodal `f` on `[lo, hi]`; returns `(argmin, min)`.
pub fn golden_section_min<F>(f: F, mut lo: f64, mut hi: f64, x_tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..400 {
        if hi - lo <= x_tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    // Endpoints matter when the minimum is attained at the boundary.
    [(x1, f1), (x2, f2), (lo, f(lo)), (hi, f(hi))]
        .into_iter()
        .fold((x1, f1), |best, c| if c.1 < best.1 { c } else { best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomials_and_kinks() {
        assert_abs_diff_eq!(
            adaptive_simpson(&|x: f64| x * x, 0.0, 1.0, 1e-12).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-12
        );
        let kink = adaptive_simpson(&|x: f64| (x - 0.3).abs(), 0.0, 1.0, 1e-12).unwrap();
        assert_abs_diff_eq!(kink, 0.5 * (0.09 + 0.49), epsilon = 1e-11);
        let s = adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert_abs_diff_eq!(s, 2.0, epsilon = 1e-11);
    }

    #[test]
    fn non_convergence_is_reported() {
        let r = adaptive_simpson(&|x: f64| 1.0 / x, -1.0, 1.0, 1e-10);
        assert!(r.is_err());
    }

    #[test]
    fn golden_section() {
        let (x, v) = golden_section_min(|x| (x - 1.25).powi(2) + 3.0, -10.0, 10.0, 1e-12);
        assert_abs_diff_eq!(x, 1.25, epsilon = 1e-6);
        assert_abs_diff_eq!(v, 3.0, epsilon = 1e-12);
        let (x, _) = golden_section_min(|x| -x, 0.0, 2.0, 1e-12);
        assert_abs_diff_eq!(x, 2.0, epsilon = 1e-9);
    }
}
