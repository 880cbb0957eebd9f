//! Numerical checks behind `verify-sequence` and `verify-profile`.

use std::f64::consts::SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use unigraph::betaseq::SortedWindow;
use unigraph::lowdisc::{alpha_seq, fourier_tail_sum, unit_integral, QuadraticIrrational};
use unigraph::profiles::{
    h0, legendre_profile, linspace, norm_from_profile, rhombus_norm, rhombus_profile, NormSection,
};
use unigraph::BetaSequence;

use crate::CliError;

fn core_err(e: impl std::fmt::Display) -> CliError {
    CliError::Check(e.to_string())
}

/// Peaks `β_{−n}, …, β_n`.
pub fn peaks(seq: &BetaSequence, n: i64) -> Result<Vec<f64>, CliError> {
    (-n..=n).map(|j| seq.beta(j).map_err(core_err)).collect()
}

/// Largest modular-sum error over windows of one size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowMax {
    pub size: usize,
    pub max_error: f64,
    /// First index of the worst window.
    pub start: i64,
    pub xi: f64,
}

/// For each size, the largest `|Σ_{j∈W}(√2 − |ξ − β_j|) − |W|·h⁰(ξ)|` over
/// `grid` equally spaced `ξ ∈ [−√2, √2]` and all windows `W` of that size
/// inside `[−n, n]`, by sliding sums.
pub fn sequence_window_maxima(
    seq: &BetaSequence,
    n: i64,
    sizes: &[usize],
    grid: usize,
) -> Result<Vec<WindowMax>, CliError> {
    let betas = peaks(seq, n)?;
    let xis: Vec<f64> = linspace(-SQRT_2, SQRT_2, grid).collect();
    let mut out: Vec<WindowMax> = sizes
        .iter()
        .map(|&size| WindowMax {
            size,
            max_error: 0.0,
            start: -n,
            xi: xis[0],
        })
        .collect();
    for &xi in &xis {
        let target = h0(xi).map_err(core_err)?;
        let terms: Vec<f64> = betas.iter().map(|b| SQRT_2 - (xi - b).abs()).collect();
        for w in out.iter_mut() {
            if w.size > terms.len() {
                return Err(CliError::Config(format!(
                    "window size {} exceeds the index range",
                    w.size
                )));
            }
            let k = w.size as f64;
            let mut sum: f64 = terms[..w.size].iter().sum();
            for first in 0..=terms.len() - w.size {
                if first > 0 {
                    sum += terms[first + w.size - 1] - terms[first - 1];
                }
                let err = (sum - k * target).abs();
                if err > w.max_error {
                    *w = WindowMax {
                        size: w.size,
                        max_error: err,
                        start: first as i64 - n,
                        xi,
                    };
                }
            }
        }
    }
    Ok(out)
}

/// Birkhoff sums of `x²` along `α_j`, compared with `n/3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BirkhoffRow {
    pub n: usize,
    /// `|Σ_{j<n} α_j² − n∫x²|`.
    pub error_at_n: f64,
    /// Largest such error over all prefixes up to `n`.
    pub running_sup: f64,
}

pub fn birkhoff_square(alpha: &QuadraticIrrational, ns: &[usize]) -> Result<Vec<BirkhoffRow>, CliError> {
    let integral = unit_integral(|x| x * x).map_err(core_err)?;
    let mut rows = Vec::with_capacity(ns.len());
    let (mut sum, mut sup, mut j) = (0.0, 0.0f64, 0usize);
    for &n in ns {
        while j < n {
            let a = alpha_seq(alpha, j as i64);
            sum += a * a;
            j += 1;
            sup = sup.max((sum - j as f64 * integral).abs());
        }
        rows.push(BirkhoffRow {
            n,
            error_at_n: (sum - n as f64 * integral).abs(),
            running_sup: sup,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailRow {
    pub k: u64,
    pub partial_sum: f64,
    /// Growth since the previous row.
    pub increment: Option<f64>,
}

pub fn fourier_tail(alpha: &QuadraticIrrational, ks: &[u64]) -> Vec<TailRow> {
    let mut prev: Option<f64> = None;
    ks.iter()
        .map(|&k| {
            let s = fourier_tail_sum(alpha, k);
            let row = TailRow {
                k,
                partial_sum: s,
                increment: prev.map(|p| s - p),
            };
            prev = Some(s);
            row
        })
        .collect()
}

/// Whether each increment is at most half the one before.
pub fn tail_halves(rows: &[TailRow]) -> bool {
    let incs: Vec<f64> = rows.iter().filter_map(|r| r.increment).collect();
    incs.windows(2).all(|w| w[1] <= 0.5 * w[0])
}

/// `max |‖·‖_{rhombus} − norm_from_profile(rhombus_profile)|` over `pairs`
/// random `(u, v)` and `points` random vectors each.
pub fn rhombus_round_trip(seed: u64, pairs: usize, points: usize) -> Result<f64, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let u = rng.random_range(0.1..3.0);
        let v = rng.random_range(0.1..3.0);
        let direct = rhombus_norm(u, v).map_err(core_err)?;
        let dual = norm_from_profile(&rhombus_profile(u, v).map_err(core_err)?).map_err(core_err)?;
        for _ in 0..points {
            let x = rng.random_range(-50.0..50.0);
            let y = rng.random_range(-50.0..50.0);
            worst = worst.max((direct.eval(x, y) - dual.eval(x, y)).abs());
        }
    }
    Ok(worst)
}

/// Largest deviation of the Legendre profile of the Euclidean section from
/// `√(1 − ξ²)` at the transform's grid nodes.
pub fn legendre_circle_error(grid: usize) -> Result<f64, CliError> {
    let h = legendre_profile(&NormSection::euclidean(), grid).map_err(core_err)?;
    Ok(linspace(-1.0, 1.0, grid)
        .map(|xi| (h.eval(xi) - (1.0 - xi * xi).max(0.0).sqrt()).abs())
        .fold(0.0, f64::max))
}

/// Scaled profile distance `(n − m)·sup|h^{m,n} − h⁰|` for short windows
/// and its maximum over long ones.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Convergence {
    /// Max over windows of size at most `short_max` inside `[−n, n]`.
    pub c_hat: f64,
    pub short_max: usize,
    pub long: Vec<LongWindow>,
}

/// Worst exact sup over all windows of one size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LongWindow {
    pub size: usize,
    pub max_error: f64,
    pub start: i64,
}

/// Exact sups via [`SortedWindow`]; long windows slide over `[−n, n]`.
pub fn profile_convergence(
    seq: &BetaSequence,
    n: i64,
    short_max: usize,
    long_sizes: &[usize],
) -> Result<Convergence, CliError> {
    let betas = peaks(seq, n)?;
    let mut c_hat = 0.0f64;
    for first in 0..betas.len() {
        let mut w = SortedWindow::default();
        for &b in betas.iter().skip(first).take(short_max) {
            w.insert(b);
            c_hat = c_hat.max(w.sup_error());
        }
    }
    let mut long = Vec::with_capacity(long_sizes.len());
    for &size in long_sizes {
        if size > betas.len() {
            return Err(CliError::Config(format!("window size {size} exceeds the index range")));
        }
        let mut w = SortedWindow::default();
        for &b in &betas[..size] {
            w.insert(b);
        }
        let mut best = LongWindow {
            size,
            max_error: w.sup_error(),
            start: -n,
        };
        for first in 1..=betas.len() - size {
            w.remove(betas[first - 1]);
            w.insert(betas[first + size - 1]);
            let e = w.sup_error();
            if e > best.max_error {
                best.max_error = e;
                best.start = first as i64 - n;
            }
        }
        long.push(best);
    }
    Ok(Convergence { c_hat, short_max, long })
}
