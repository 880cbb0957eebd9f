//! One test per acceptance criterion. Each prints a single
//! `criterion N: PASS|FAIL ...` line to the real stdout (bypassing the
//! harness capture) and then asserts.

use std::io::Write as _;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use unigraph::graphcore::VertexId;
use unigraph::hyperbolic::{build_hyperbolic, HyperbolicParams, LengthMode, ShortcutLayer};
use unigraph::lowdisc::QuadraticIrrational;
use unigraph::planar::{
    build_gamma, build_l, closed_form_dl, estimate_c, glue_from_c, sample_pairs, verify_planar, BetaSource,
    LatticePoint, LatticeSpec, Layer,
};
use unigraph::BetaSequence;
use unigraph_cli::checks;

const SEED: u64 = 20240607;

fn report(n: u32, ok: bool, elapsed: Duration, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    let line = format!("criterion {n}: {verdict} ({:.1} s) {detail}\n", elapsed.as_secs_f64());
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
}

#[test]
fn criterion_01_closed_form_oracle() {
    let start = Instant::now();
    let spec = LatticeSpec::new(129, BetaSource::Sequence(BetaSequence::default())).unwrap();
    let g = build_l(&spec).unwrap();
    let pts: Vec<LatticePoint> = (-16..=16)
        .flat_map(|j| (-16..=16).map(move |i| LatticePoint::new(i, j)))
        .filter(|p| p.layer() == Layer::L)
        .collect();
    let ids: Vec<VertexId> = pts.iter().map(|&p| g.vertex(p).unwrap()).collect();
    let mut worst = 0.0f64;
    let mut pairs = 0usize;
    for (k, &p) in pts.iter().enumerate() {
        let dists = g.graph().shortest_path_dist(ids[k], &ids[k + 1..]).unwrap();
        for (&q, d) in pts[k + 1..].iter().zip(dists) {
            worst = worst.max((d - closed_form_dl(p, q, &spec.betas).unwrap()).abs());
            pairs += 1;
        }
    }
    let elapsed = start.elapsed();
    let ok = worst <= 1e-9 && elapsed < Duration::from_secs(60);
    report(
        1,
        ok,
        elapsed,
        &format!(
            "{} points, {pairs} pairs, max |dijkstra - closed form| = {worst:.3e} (tol 1e-9)",
            pts.len()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_02_profile_convergence() {
    let start = Instant::now();
    let conv = checks::profile_convergence(&BetaSequence::default(), 10_000, 100, &[1_000, 10_000]).unwrap();
    let bound = 1.05 * conv.c_hat;
    let ok_bound = conv.long.iter().all(|w| w.max_error <= bound);
    let elapsed = start.elapsed();
    let ok = ok_bound && elapsed < Duration::from_secs(120);
    let longs: Vec<String> = conv
        .long
        .iter()
        .map(|w| format!("size {}: {:.4}", w.size, w.max_error))
        .collect();
    report(
        2,
        ok,
        elapsed,
        &format!(
            "C_hat = {:.4}, bound 1.05 C_hat = {bound:.4}; {}",
            conv.c_hat,
            longs.join(", ")
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_03_sequence_boundedness() {
    let start = Instant::now();
    let w = checks::sequence_window_maxima(&BetaSequence::default(), 10_000, &[100, 1_000, 10_000], 129).unwrap();
    let ratio = w[2].max_error / w[0].max_error;
    let elapsed = start.elapsed();
    let ok = ratio <= 2.0 && elapsed < Duration::from_secs(120);
    report(
        3,
        ok,
        elapsed,
        &format!(
            "max errors 1e2: {:.4}, 1e3: {:.4}, 1e4: {:.4}; ratio {ratio:.3} (tol 2)",
            w[0].max_error, w[1].max_error, w[2].max_error
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_04_planar_main_theorem() {
    let start = Instant::now();
    let spec = LatticeSpec::new(256, BetaSource::Sequence(BetaSequence::default())).unwrap();
    let c_hat = estimate_c(&spec, 1_000, SEED).unwrap();
    let m = glue_from_c(c_hat);
    let spec = spec.with_glue(m).unwrap();
    let g = build_gamma(&spec).unwrap();
    let pairs = sample_pairs(&spec, 10_000, SEED + 1);
    let rep = verify_planar(&g, &pairs).unwrap();
    let lower = c_hat + 2.0 * m;
    let lower_ok = rep.rows.iter().all(|r| r.graph_dist >= r.euclid - lower);
    let growth = rep.growth_ratio();
    let elapsed = start.elapsed();
    let ok = rep.max_abs_err.is_finite() && growth <= 2.0 && lower_ok && elapsed < Duration::from_secs(600);
    report(
        4,
        ok,
        elapsed,
        &format!(
            "{} pairs, C_hat = {c_hat:.4}, M = {m}, max |err| = {:.4}, decile growth {growth:.3} (tol 2), lower bound C_hat+2M = {lower:.3} holds: {lower_ok}",
            rep.rows.len(),
            rep.max_abs_err
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_05_quadrature_no_growth() {
    let start = Instant::now();
    let rows = checks::birkhoff_square(&QuadraticIrrational::default(), &[1_000, 10_000, 100_000, 1_000_000]).unwrap();
    let sups: Vec<f64> = rows.iter().map(|r| r.running_sup).collect();
    let ratio = sups.iter().cloned().fold(0.0, f64::max) / sups.iter().cloned().fold(f64::INFINITY, f64::min);
    let elapsed = start.elapsed();
    let ok = ratio <= 2.0 && elapsed < Duration::from_secs(30);
    let at_n: Vec<String> = rows.iter().map(|r| format!("{:.4}", r.error_at_n)).collect();
    report(
        5,
        ok,
        elapsed,
        &format!(
            "running sup over n <= 1e3..1e6: {sups:.4?}, extreme ratio {ratio:.3} (tol 2); error at n: [{}]",
            at_n.join(", ")
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_06_fourier_tail() {
    let start = Instant::now();
    let rows = checks::fourier_tail(&QuadraticIrrational::default(), &[1_000, 10_000, 100_000]);
    let ok_halves = checks::tail_halves(&rows);
    let elapsed = start.elapsed();
    let ok = ok_halves && elapsed < Duration::from_secs(10);
    let incs: Vec<String> = rows
        .iter()
        .filter_map(|r| r.increment)
        .map(|i| format!("{i:.4e}"))
        .collect();
    report(
        6,
        ok,
        elapsed,
        &format!(
            "partial sum at 1e5 = {:.6}, increments per decade [{}]",
            rows[2].partial_sum,
            incs.join(", ")
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_07_hyperbolic_construction() {
    let start = Instant::now();
    let g = build_hyperbolic(&HyperbolicParams::new(12.0, 1.0, 1.0, SEED)).unwrap();
    let roots = g.root_distances().unwrap();
    let root_dev = (0..g.net.len() as VertexId)
        .map(|q| (roots[q as usize] - g.net.root_dist(q)).abs())
        .fold(0.0, f64::max);
    let ok_a = root_dev <= 1e-9;
    let pairs = g.sample_pairs(10_000, SEED + 1).unwrap();
    let rep = g.verify(&pairs).unwrap();
    let ok_b = g.within_bounds(&rep);
    let growth = rep.growth_ratio();
    let ok_c = growth <= 2.0;
    let deg12 = g.uniformity_report().max_degree;
    let deg8 = build_hyperbolic(&HyperbolicParams::new(8.0, 1.0, 1.0, SEED))
        .unwrap()
        .uniformity_report()
        .max_degree;
    let ok_d = deg8 == deg12;
    let elapsed = start.elapsed();
    let ok = ok_a && ok_b && ok_c && ok_d && elapsed < Duration::from_secs(300);
    let layer = match g.layer {
        ShortcutLayer::Complete => "complete",
        ShortcutLayer::Explicit(_) => "explicit",
    };
    report(
        7,
        ok,
        elapsed,
        &format!(
            "n = {}, D_hat = {:.3}, D1 = {:.1}, shortcut layer {layer}; \
             (a) root deviation {root_dev:.2e} ok={ok_a}; \
             (b) errors in [{:.3}, {:.3}] vs [-{:.3}, {:.3}] ok={ok_b}; \
             (c) decile growth {growth:.3} ok={ok_c}; \
             (d) max degree R=8: {deg8}, R=12: {deg12} ok={ok_d}",
            g.net.len(),
            g.morse,
            g.reach,
            rep.min_err,
            rep.max_err,
            g.lower_bound(),
            g.upper_bound()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_08_integer_mode() {
    let start = Instant::now();
    let params = HyperbolicParams {
        mode: LengthMode::Integer,
        ..HyperbolicParams::new(12.0, 10.0, 10.0, SEED)
    };
    let g = build_hyperbolic(&params).unwrap();
    let mut lengths: Vec<f64> = g.tree.graph().edges().map(|(_, _, l)| l).collect();
    lengths.push(g.shortcut_len);
    if let ShortcutLayer::Explicit(sg) = &g.layer {
        lengths.extend(sg.edges().map(|(_, _, l)| l));
    }
    let integral = lengths.iter().all(|l| l.fract() == 0.0);
    let positive = lengths.iter().all(|&l| l > 0.0);
    let pairs = g.sample_pairs(10_000, SEED + 1).unwrap();
    let rep = g.verify(&pairs).unwrap();
    let close = g.within_bounds(&rep);
    let elapsed = start.elapsed();
    let ok = integral && positive && close && elapsed < Duration::from_secs(300);
    report(
        8,
        ok,
        elapsed,
        &format!(
            "n = {}, {} lengths integral: {integral}, positive: {positive}; {} pairs, errors in [{:.3}, {:.3}] vs [-{:.3}, {:.3}]",
            g.net.len(),
            lengths.len(),
            rep.rows.len(),
            rep.min_err,
            rep.max_err,
            g.lower_bound(),
            g.upper_bound()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_09_duality_round_trips() {
    let start = Instant::now();
    let rhombus = checks::rhombus_round_trip(SEED, 100, 1_000).unwrap();
    let circle = checks::legendre_circle_error(1025).unwrap();
    let elapsed = start.elapsed();
    let ok = rhombus <= 1e-9 && circle <= 1e-6 && elapsed < Duration::from_secs(10);
    report(
        9,
        ok,
        elapsed,
        &format!("rhombus round trip {rhombus:.3e} (tol 1e-9), Legendre circle {circle:.3e} (tol 1e-6)"),
    );
    assert!(ok);
}

fn run_cli(dir: &Path, args: &[&str]) -> Vec<(String, Vec<u8>)> {
    if dir.exists() {
        std::fs::remove_dir_all(dir).unwrap();
    }
    let out = Command::new(env!("CARGO_BIN_EXE_unigraph"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .unwrap();
    assert!(
        out.status.code().is_some_and(|c| c <= 1),
        "{args:?} exited with {}",
        out.status
    );
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_10_determinism() {
    let start = Instant::now();
    let runs: &[&[&str]] = &[
        &["calibrate-planar", "--n", "32", "--samples", "200", "--seed", "3"],
        &["build-planar", "--n", "32", "--samples", "200", "--seed", "3"],
        &["verify-planar", "--n", "32", "--samples", "300", "--seed", "3"],
        &["build-hyperbolic", "--radius", "6", "--seed", "3"],
        &["verify-hyperbolic", "--radius", "6", "--samples", "300", "--seed", "3"],
        &["verify-sequence", "--n", "500"],
        &["verify-profile", "--n", "600", "--seed", "3"],
        &["export", "--n", "16", "--m", "3"],
        &["export", "--target", "hyperbolic", "--radius", "5", "--seed", "3"],
    ];
    let tmp = tempfile::tempdir().unwrap();
    let mut mismatched = Vec::new();
    let mut files = 0;
    for (k, args) in runs.iter().enumerate() {
        let dir = tmp.path().join(k.to_string());
        let first = run_cli(&dir, args);
        let second = run_cli(&dir, args);
        files += first.len();
        if first != second {
            mismatched.push(args[0]);
        }
    }
    let elapsed = start.elapsed();
    let ok = mismatched.is_empty();
    report(
        10,
        ok,
        elapsed,
        &format!(
            "{} commands run twice, {files} files compared, mismatches: {mismatched:?}",
            runs.len()
        ),
    );
    assert!(ok);
}
