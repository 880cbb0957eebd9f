use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use unigraph::hyperbolic::{
    build_hyperbolic, packing_bound, HyperbolicGraph, HyperbolicParams, LengthMode, NetParams, ShortcutLayer, ROOT,
};
use unigraph::lowdisc::liouville_margin;
use unigraph::planar::{
    build_gamma, estimate_c, glue_from_c, sample_pairs, verify_planar, BetaSource, DecileStat, LatticeSpec,
};
use unigraph::{BetaSequence, UniformityReport};

use crate::checks;
use crate::config::{Command, GlueSetting, RunConfig, Target};
use crate::{CliError, Outcome};

fn check_err(e: impl std::fmt::Display) -> CliError {
    CliError::Check(e.to_string())
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut w = BufWriter::new(File::create(&path)?);
        body(&mut w)?;
        w.flush()?;
        self.files.push(path);
        Ok(())
    }

    fn summary(&mut self, cfg: &RunConfig, passed: bool, body: Value) -> Result<(), CliError> {
        let doc = json!({
            "command": cfg.command.as_str(),
            "config": cfg,
            "passed": passed,
            "results": body,
        });
        let text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Check(e.to_string()))?;
        self.write("summary.json", |w| writeln!(w, "{text}"))
    }

    fn finish(self, passed: bool) -> Outcome {
        Outcome {
            passed,
            files: self.files,
        }
    }
}

pub fn dispatch(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.command {
        Command::BuildPlanar => build_planar(cfg),
        Command::VerifyPlanar => verify_planar_cmd(cfg),
        Command::CalibratePlanar => calibrate_planar(cfg),
        Command::BuildHyperbolic => build_hyperbolic_cmd(cfg),
        Command::VerifyHyperbolic => verify_hyperbolic_cmd(cfg),
        Command::VerifySequence => verify_sequence(cfg),
        Command::VerifyProfile => verify_profile(cfg),
        Command::Export => export(cfg),
    }
}

fn uniformity_json(u: &UniformityReport) -> Value {
    json!({
        "max_degree": u.max_degree,
        "min_length": u.min_length,
        "max_length": u.max_length,
    })
}

fn deciles_json(d: &[DecileStat]) -> Value {
    Value::Array(
        d.iter()
            .map(|s| json!({"lo": s.lo, "hi": s.hi, "count": s.count, "max_abs_err": s.max_abs_err}))
            .collect(),
    )
}

fn lattice_spec(cfg: &RunConfig) -> Result<LatticeSpec, CliError> {
    LatticeSpec::new(cfg.n, BetaSource::Sequence(BetaSequence::new(cfg.alpha())))
        .map_err(|e| CliError::Config(e.to_string()))
}

/// `(Ĉ, M)`; `Ĉ` is absent when `M` is fixed and nothing was sampled.
fn glue(cfg: &RunConfig, spec: &LatticeSpec, always_calibrate: bool) -> Result<(Option<f64>, f64), CliError> {
    let c_hat = match (cfg.m, always_calibrate) {
        (GlueSetting::Fixed(_), false) => None,
        _ => Some(estimate_c(spec, cfg.samples, cfg.seed_or_zero()).map_err(check_err)?),
    };
    let m = match cfg.m {
        GlueSetting::Fixed(m) => m,
        GlueSetting::Auto(_) => glue_from_c(c_hat.expect("calibrated")),
    };
    Ok((c_hat, m))
}

fn calibrate_planar(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = lattice_spec(cfg)?;
    let c_hat = estimate_c(&spec, cfg.samples, cfg.seed_or_zero()).map_err(check_err)?;
    let passed = c_hat.is_finite();
    let mut out = Output::new(&cfg.out)?;
    out.summary(
        cfg,
        passed,
        json!({
            "c_hat": c_hat,
            "glue_length": glue_from_c(c_hat),
            "query_margin": spec.query_margin,
            "samples": cfg.samples,
        }),
    )?;
    Ok(out.finish(passed))
}

fn build_planar(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = lattice_spec(cfg)?;
    let (c_hat, m) = glue(cfg, &spec, false)?;
    let g = build_gamma(&spec.with_glue(m).map_err(check_err)?).map_err(check_err)?;
    let u = g.graph().uniformity_report();
    let passed = u.max_degree <= 5 && u.min_length > 0.0;
    let mut out = Output::new(&cfg.out)?;
    out.summary(
        cfg,
        passed,
        json!({
            "vertices": g.graph().vertex_count(),
            "edges": g.graph().edge_count(),
            "c_hat": c_hat,
            "glue_length": m,
            "uniformity": uniformity_json(&u),
        }),
    )?;
    Ok(out.finish(passed))
}

fn verify_planar_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = lattice_spec(cfg)?;
    let (c_hat, m) = glue(cfg, &spec, true)?;
    let c_hat = c_hat.expect("calibrated");
    let spec = spec.with_glue(m).map_err(check_err)?;
    let g = build_gamma(&spec).map_err(check_err)?;
    let pairs = sample_pairs(&spec, cfg.samples, cfg.seed_or_zero().wrapping_add(1));
    let report = verify_planar(&g, &pairs).map_err(check_err)?;
    let lower = c_hat + 2.0 * m;
    let lower_ok = report.rows.iter().all(|r| r.graph_dist >= r.euclid - lower);
    let growth = report.growth_ratio();
    let finite = report.max_abs_err.is_finite();
    let passed = finite && lower_ok && growth <= 2.0;
    let mut out = Output::new(&cfg.out)?;
    out.write("report.csv", |w| report.write_csv(w))?;
    out.summary(
        cfg,
        passed,
        json!({
            "c_hat": c_hat,
            "glue_length": m,
            "pairs": report.rows.len(),
            "max_abs_err": report.max_abs_err,
            "min_err": report.min_err,
            "max_err": report.max_err,
            "deciles": deciles_json(&report.deciles),
            "growth_ratio": growth,
            "lower_bound_constant": lower,
            "checks": {"finite": finite, "lower_bound": lower_ok, "no_growth": growth <= 2.0},
        }),
    )?;
    Ok(out.finish(passed))
}

fn hyperbolic_params(cfg: &RunConfig) -> HyperbolicParams {
    HyperbolicParams {
        net: NetParams {
            radius: cfg.radius,
            epsilon: cfg.epsilon,
            density: cfg.density,
        },
        delta: cfg.delta,
        reach_factor: cfg.reach_factor,
        mode: if cfg.integer {
            LengthMode::Integer
        } else {
            LengthMode::Real
        },
        morse_sample: cfg.samples,
        morse_override: cfg.morse,
        seed: cfg.seed_or_zero(),
    }
}

fn layer_name(g: &HyperbolicGraph) -> &'static str {
    match g.layer {
        ShortcutLayer::Complete => "complete",
        ShortcutLayer::Explicit(_) => "explicit",
    }
}

fn hyperbolic_core_json(g: &HyperbolicGraph) -> Value {
    let max_depth = (0..g.net.len() as u32).map(|q| g.tree.depth(q)).max().unwrap_or(0);
    json!({
        "net_points": g.net.len(),
        "morse_constant": g.morse,
        "reach": g.reach,
        "shortcut_length": g.shortcut_len,
        "shortcut_layer": layer_name(g),
        "upper_bound": g.upper_bound(),
        "lower_bound": g.lower_bound(),
        "tree": {
            "max_degree": g.tree.graph().uniformity_report().max_degree,
            "max_depth": max_depth,
        },
        "uniformity": uniformity_json(&g.uniformity_report()),
    })
}

fn build_hyperbolic_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let g = build_hyperbolic(&hyperbolic_params(cfg)).map_err(check_err)?;
    let eps = cfg.epsilon;
    let separation = g.net.min_separation();
    let ball = g.net.max_ball_count(3.0);
    let bound = packing_bound(3.0, eps);
    let passed = separation >= eps && (ball as f64) <= bound;
    let mut core = hyperbolic_core_json(&g);
    core["min_separation"] = json!(separation);
    core["packing"] = json!({"radius": 3.0, "max_count": ball, "bound": bound});
    let mut out = Output::new(&cfg.out)?;
    out.summary(cfg, passed, core)?;
    Ok(out.finish(passed))
}

fn verify_hyperbolic_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let g = build_hyperbolic(&hyperbolic_params(cfg)).map_err(check_err)?;
    let roots = g.root_distances().map_err(check_err)?;
    let root_dev = (0..g.net.len() as u32)
        .map(|q| {
            let dev = (roots[q as usize] - g.net.root_dist(q)).abs();
            match g.tree.mode() {
                LengthMode::Real => dev,
                // Floor telescoping loses at most one per level.
                LengthMode::Integer => (dev - f64::from(g.tree.depth(q))).max(0.0),
            }
        })
        .fold(0.0, f64::max);
    let root_ok = root_dev <= 1e-9;
    let seed = cfg.seed_or_zero();
    let pairs = g.sample_pairs(cfg.samples, seed.wrapping_add(1)).map_err(check_err)?;
    let report = g.verify(&pairs).map_err(check_err)?;
    let bounds_ok = g.within_bounds(&report);
    let growth = report.growth_ratio();
    let audit = g.audit_reach(&pairs[..pairs.len().min(1000)]);
    let centre_ok = audit.centre_reading_ok == audit.pairs;
    let thin = unigraph::hyperbolic::thinness_witness(&g.net, cfg.samples.min(1000), seed.wrapping_add(2));
    let thin_ok = thin <= cfg.delta;
    let passed = root_ok && bounds_ok && growth <= 2.0 && centre_ok && thin_ok;
    let mut core = hyperbolic_core_json(&g);
    core["root_max_deviation"] = json!(root_dev);
    core["query_radius"] = json!(g.query_radius().map_err(check_err)?);
    core["pairs"] = json!(report.rows.len());
    core["min_err"] = json!(report.min_err);
    core["max_err"] = json!(report.max_err);
    core["deciles"] = deciles_json(&report.deciles);
    core["growth_ratio"] = json!(growth);
    core["reach_audit"] = json!({
        "pairs": audit.pairs,
        "max_distance_to_centre": audit.max_to_centre,
        "max_distance_to_root": audit.max_to_root,
        "centre_reading_holds": audit.centre_reading_ok,
        "root_reading_holds": audit.root_reading_ok,
        "anchors_joined": audit.shortcut_ok,
    });
    core["thinness"] = json!(thin);
    core["checks"] = json!({
        "root_exact": root_ok,
        "bounds": bounds_ok,
        "no_growth": growth <= 2.0,
        "reach_centre_reading": centre_ok,
        "thinness": thin_ok,
    });
    let mut out = Output::new(&cfg.out)?;
    out.write("report.csv", |w| g.write_report_csv(&report, w))?;
    out.summary(cfg, passed, core)?;
    Ok(out.finish(passed))
}

fn decade_sizes(limit: usize) -> Vec<usize> {
    std::iter::successors(Some(100usize), |s| Some(s * 10))
        .take_while(|&s| s <= limit)
        .collect()
}

fn verify_sequence(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let alpha = cfg.alpha();
    let seq = BetaSequence::new(alpha);
    let n = i64::from(cfg.n);
    let sizes = decade_sizes(2 * cfg.n as usize + 1);
    let windows = checks::sequence_window_maxima(&seq, n, &sizes, 129)?;
    let first = windows.first().map_or(0.0, |w| w.max_error);
    let last = windows.last().map_or(0.0, |w| w.max_error);
    let windows_ok = last <= 2.0 * first;
    let birkhoff = checks::birkhoff_square(&alpha, &[1_000, 10_000, 100_000, 1_000_000])?;
    let sup_ratio = birkhoff.last().map_or(1.0, |r| r.running_sup) / birkhoff.first().map_or(1.0, |r| r.running_sup);
    let birkhoff_ok = sup_ratio <= 2.0;
    let tail = checks::fourier_tail(&alpha, &[100, 1_000, 10_000, 100_000]);
    let tail_ok = checks::tail_halves(&tail);
    let margin = liouville_margin(alpha.value(), 100_000);
    let passed = windows_ok && birkhoff_ok && tail_ok && margin > 0.0;
    let mut out = Output::new(&cfg.out)?;
    out.write("sequence.csv", |w| {
        writeln!(w, "size,max_error,start,xi")?;
        for r in &windows {
            writeln!(
                w,
                "{},{},{},{}",
                r.size,
                unigraph::graphcore::fmt_sig17(r.max_error),
                r.start,
                unigraph::graphcore::fmt_sig17(r.xi)
            )?;
        }
        Ok(())
    })?;
    out.summary(
        cfg,
        passed,
        json!({
            "windows": windows,
            "window_growth_ratio": if first > 0.0 { last / first } else { 1.0 },
            "birkhoff_square": birkhoff,
            "birkhoff_sup_ratio": sup_ratio,
            "fourier_tail": tail,
            "liouville_margin": margin,
            "checks": {
                "windows_no_growth": windows_ok,
                "birkhoff_no_growth": birkhoff_ok,
                "tail_halves_per_decade": tail_ok,
                "liouville_positive": margin > 0.0,
            },
        }),
    )?;
    Ok(out.finish(passed))
}

fn verify_profile(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let seq = BetaSequence::new(cfg.alpha());
    let n = i64::from(cfg.n);
    let long: Vec<usize> = [1_000usize, 10_000]
        .into_iter()
        .filter(|&s| s <= 2 * cfg.n as usize + 1)
        .collect();
    let conv = checks::profile_convergence(&seq, n, 100, &long)?;
    let conv_ok = conv.long.iter().all(|w| w.max_error <= 1.05 * conv.c_hat);
    let rhombus = checks::rhombus_round_trip(cfg.seed_or_zero(), 100, 1000)?;
    let legendre = checks::legendre_circle_error(1025)?;
    let passed = conv_ok && rhombus <= 1e-9 && legendre <= 1e-6;
    let mut out = Output::new(&cfg.out)?;
    out.summary(
        cfg,
        passed,
        json!({
            "convergence": conv,
            "rhombus_round_trip_max_error": rhombus,
            "legendre_circle_max_error": legendre,
            "checks": {
                "convergence": conv_ok,
                "rhombus_round_trip": rhombus <= 1e-9,
                "legendre_circle": legendre <= 1e-6,
            },
        }),
    )?;
    Ok(out.finish(passed))
}

fn export(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Output::new(&cfg.out)?;
    match cfg.target {
        Target::Planar => {
            let spec = lattice_spec(cfg)?;
            let (c_hat, m) = glue(cfg, &spec, false)?;
            let g = build_gamma(&spec.with_glue(m).map_err(check_err)?).map_err(check_err)?;
            out.write("edges.csv", |w| g.write_edge_csv(w))?;
            out.summary(
                cfg,
                true,
                json!({
                    "vertices": g.graph().vertex_count(),
                    "edges": g.graph().edge_count(),
                    "c_hat": c_hat,
                    "glue_length": m,
                }),
            )?;
        }
        Target::Hyperbolic => {
            let g = build_hyperbolic(&hyperbolic_params(cfg)).map_err(check_err)?;
            out.write("net.csv", |w| g.net.write_csv(w, &g.tree))?;
            out.write("edges.csv", |w| g.write_edge_csv(w))?;
            let mut core = hyperbolic_core_json(&g);
            core["root"] = json!(ROOT);
            out.summary(cfg, true, core)?;
        }
    }
    Ok(out.finish(true))
}
