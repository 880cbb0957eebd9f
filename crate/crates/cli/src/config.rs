use std::fmt;
use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use unigraph::lowdisc::QuadraticIrrational;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    BuildPlanar,
    VerifyPlanar,
    CalibratePlanar,
    BuildHyperbolic,
    VerifyHyperbolic,
    VerifySequence,
    VerifyProfile,
    Export,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::BuildPlanar => "build-planar",
            Command::VerifyPlanar => "verify-planar",
            Command::CalibratePlanar => "calibrate-planar",
            Command::BuildHyperbolic => "build-hyperbolic",
            Command::VerifyHyperbolic => "verify-hyperbolic",
            Command::VerifySequence => "verify-sequence",
            Command::VerifyProfile => "verify-profile",
            Command::Export => "export",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which construction `export` writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    #[default]
    Planar,
    Hyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

/// Glue length `M`: fixed, or `⌈2Ĉ + 1⌉` from a calibration run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GlueSetting {
    Fixed(f64),
    Auto(AutoTag),
}

impl Default for GlueSetting {
    fn default() -> Self {
        GlueSetting::Auto(AutoTag::Auto)
    }
}

impl std::str::FromStr for GlueSetting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(GlueSetting::Auto(AutoTag::Auto));
        }
        s.parse::<f64>()
            .map(GlueSetting::Fixed)
            .map_err(|_| format!("expected a number or `auto`, got `{s}`"))
    }
}

/// Parameters as read from a JSON config or from flags; all optional so
/// that flags can override a file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub command: Option<Command>,
    pub alpha: Option<String>,
    pub n: Option<u32>,
    pub m: Option<GlueSetting>,
    pub radius: Option<f64>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
    pub target: Option<Target>,
    pub density: Option<f64>,
    pub reach_factor: Option<f64>,
    pub morse: Option<f64>,
    pub integer: Option<bool>,
}

impl Params {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// `self` with every field that `over` sets replaced.
    pub fn overlay(self, over: Params) -> Params {
        Params {
            command: over.command.or(self.command),
            alpha: over.alpha.or(self.alpha),
            n: over.n.or(self.n),
            m: over.m.or(self.m),
            radius: over.radius.or(self.radius),
            epsilon: over.epsilon.or(self.epsilon),
            delta: over.delta.or(self.delta),
            seed: over.seed.or(self.seed),
            samples: over.samples.or(self.samples),
            out: over.out.or(self.out),
            target: over.target.or(self.target),
            density: over.density.or(self.density),
            reach_factor: over.reach_factor.or(self.reach_factor),
            morse: over.morse.or(self.morse),
            integer: over.integer.or(self.integer),
        }
    }
}

/// A validated configuration with defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub alpha: String,
    pub n: u32,
    pub m: GlueSetting,
    pub radius: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: Option<u64>,
    pub samples: usize,
    pub out: PathBuf,
    pub target: Target,
    pub density: f64,
    pub reach_factor: f64,
    pub morse: Option<f64>,
    pub integer: bool,
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!(
            "`{name}` must be positive and finite, got {v}"
        )))
    }
}

impl RunConfig {
    pub fn resolve(command: Command, p: Params) -> Result<Self, CliError> {
        if let Some(c) = p.command {
            if c != command {
                return Err(CliError::Config(format!(
                    "config names command `{c}` but `{command}` was invoked"
                )));
            }
        }
        let alpha = p.alpha.unwrap_or_else(|| "sqrt2_minus_1".to_string());
        QuadraticIrrational::from_label(&alpha).map_err(|e| CliError::Config(e.to_string()))?;
        let n_default = match command {
            Command::VerifySequence | Command::VerifyProfile => 10_000,
            _ => 64,
        };
        let n = p.n.unwrap_or(n_default);
        let min_n = match command {
            Command::VerifySequence | Command::VerifyProfile => 100,
            _ => 4,
        };
        if n < min_n {
            return Err(CliError::Config(format!(
                "`n` must be at least {min_n} for {command}, got {n}"
            )));
        }
        if matches!(command, Command::VerifySequence | Command::VerifyProfile) && n > 1_000_000 {
            return Err(CliError::Config(format!(
                "`n` must be at most 1000000 for {command}, got {n}"
            )));
        }
        let m = p.m.unwrap_or_default();
        if let GlueSetting::Fixed(v) = m {
            positive("m", v)?;
        }
        let radius = positive("radius", p.radius.unwrap_or(8.0))?;
        let epsilon = positive("epsilon", p.epsilon.unwrap_or(1.0))?;
        let delta = positive("delta", p.delta.unwrap_or(1.0))?;
        if radius <= epsilon {
            return Err(CliError::Config(format!(
                "`radius` {radius} must exceed `epsilon` {epsilon}"
            )));
        }
        let samples = p.samples.unwrap_or(1000);
        if samples == 0 {
            return Err(CliError::Config("`samples` must be positive".into()));
        }
        let density = positive("density", p.density.unwrap_or(1.0))?;
        let reach_factor = positive("reach_factor", p.reach_factor.unwrap_or(100.0))?;
        if let Some(d) = p.morse {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(CliError::Config(format!(
                    "`morse` must be nonnegative and finite, got {d}"
                )));
            }
        }
        let target = p.target.unwrap_or_default();
        let cfg = RunConfig {
            command,
            alpha,
            n,
            m,
            radius,
            epsilon,
            delta,
            seed: p.seed,
            samples,
            out: p.out.unwrap_or_else(|| PathBuf::from("out")),
            target,
            density,
            reach_factor,
            morse: p.morse,
            integer: p.integer.unwrap_or(false),
        };
        if cfg.needs_seed() && cfg.seed.is_none() {
            return Err(CliError::Config(format!("`seed` is required for {command}")));
        }
        Ok(cfg)
    }

    /// Whether the pipeline draws random samples.
    pub fn needs_seed(&self) -> bool {
        let hyperbolic_sampling = self.morse.is_none();
        match self.command {
            Command::VerifySequence => false,
            Command::BuildPlanar => matches!(self.m, GlueSetting::Auto(_)),
            Command::BuildHyperbolic => hyperbolic_sampling,
            Command::Export => match self.target {
                Target::Planar => matches!(self.m, GlueSetting::Auto(_)),
                Target::Hyperbolic => hyperbolic_sampling,
            },
            _ => true,
        }
    }

    pub fn alpha(&self) -> QuadraticIrrational {
        QuadraticIrrational::from_label(&self.alpha).expect("validated on resolve")
    }

    /// The seed, or 0 for pipelines that never sample.
    pub fn seed_or_zero(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}
