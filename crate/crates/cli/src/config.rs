use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use galband::catalog::{MidbandCase, MidbandLevel};
use galband::{GalSpec, ModulusM};

/// A configuration problem, reported with the offending field and exit code 2.
#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: &str, message: impl Into<String>) -> Self {
        Self { field: field.to_string(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum CaseArg {
    BHalf,
    FHalf,
    GHalf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum LevelArg {
    Half,
    ThreeHalves,
}

/// Contents of a `--config` file. Every key is optional; unknown keys are rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: Option<String>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub f: Option<f64>,
    pub g: Option<f64>,
    pub m: Option<f64>,
    pub beta: Option<f64>,
    pub emin: Option<f64>,
    pub emax: Option<f64>,
    pub points: Option<usize>,
    pub scan_points: Option<usize>,
    pub curve_points: Option<usize>,
    pub tol: Option<f64>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub case: Option<CaseArg>,
    pub level: Option<LevelArg>,
    pub t: Option<f64>,
    pub split: Option<[usize; 2]>,
    pub state: Option<usize>,
    pub conjectures: Option<bool>,
    pub suite: Option<String>,
    pub seed: Option<u64>,
}

/// Flags shared by every subcommand; each one overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON file with any of the flag names as keys
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub f: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<f64>,
    #[arg(long)]
    pub m: Option<f64>,
    /// Real offset of the line y = ix + beta (default K/2)
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub emin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub emax: Option<f64>,
    /// Samples per period for x grids
    #[arg(long)]
    pub points: Option<usize>,
    /// Energy scan density for edge searches
    #[arg(long)]
    pub scan_points: Option<usize>,
    /// Samples of the discriminant curve
    #[arg(long)]
    pub curve_points: Option<usize>,
    /// Residual tolerance for the pass column
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<f64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Mid-band family instead of the closed-form edge states
    #[arg(long, value_enum)]
    pub case: Option<CaseArg>,
    #[arg(long, value_enum)]
    pub level: Option<LevelArg>,
    /// Bloch exponent of a mid-band family
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    /// Integer split of the two remaining parameters, e.g. 1,0
    #[arg(long, value_delimiter = ',')]
    pub split: Option<Vec<usize>>,
    /// Index of one state in the listing
    #[arg(long)]
    pub state: Option<usize>,
    /// Run the conjectured pairings instead of partner reports
    #[arg(long)]
    pub conjectures: bool,
    /// `all` or a comma list of criterion numbers
    #[arg(long)]
    pub suite: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Midband {
    pub case: MidbandCase,
    pub level: MidbandLevel,
    pub t: f64,
    pub split: (f64, f64),
}

/// Fully resolved settings.
#[derive(Debug, Clone)]
pub struct Settings {
    pub spec: GalSpec,
    pub emin: Option<f64>,
    pub emax: Option<f64>,
    pub points: usize,
    pub scan_points: Option<usize>,
    pub curve_points: usize,
    pub tol: f64,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub midband: Option<Midband>,
    pub state: Option<usize>,
    pub conjectures: bool,
    pub suite: Vec<u8>,
    pub seed: u64,
}

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new("config", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        let msg = e.to_string();
        let field = msg
            .split('`')
            .nth(1)
            .filter(|_| msg.starts_with("unknown field") || msg.starts_with("missing field"))
            .unwrap_or("config");
        ConfigError::new(field, msg.clone())
    })
}

fn positive(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::new(field, format!("{v} must be positive")))
    }
}

fn finite(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::new(field, format!("{v} is not finite")))
    }
}

fn parse_suite(text: &str) -> Result<Vec<u8>, ConfigError> {
    if text.trim().eq_ignore_ascii_case("all") {
        return Ok(galband::verify::CRITERIA.iter().map(|c| c.0).collect());
    }
    let mut ids = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.parse::<u8>() {
            Ok(id) if galband::verify::criterion_name(id).is_some() => ids.push(id),
            _ => return Err(ConfigError::new("suite", format!("`{part}` is not a criterion number 1-12"))),
        }
    }
    if ids.is_empty() {
        return Err(ConfigError::new("suite", "no criteria selected"));
    }
    Ok(ids)
}

/// Merges flags over the config file and validates the result.
pub fn resolve(subcommand: &str, flags: &Flags) -> Result<Settings, ConfigError> {
    let file = match &flags.config {
        Some(p) => load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = &file.subcommand {
        if s != subcommand {
            return Err(ConfigError::new("subcommand", format!("config is for `{s}`, not `{subcommand}`")));
        }
    }
    let a = finite("a", flags.a.or(file.a).unwrap_or(0.0))?;
    let b = finite("b", flags.b.or(file.b).unwrap_or(0.0))?;
    let f = finite("f", flags.f.or(file.f).unwrap_or(0.0))?;
    let g = finite("g", flags.g.or(file.g).unwrap_or(0.0))?;
    let m = flags.m.or(file.m).unwrap_or(0.5);
    let mm = ModulusM::spectral(m).map_err(|e| ConfigError::new("m", e.to_string()))?;

    let midband = match flags.case.or(file.case) {
        None => None,
        Some(case) => {
            let t = flags.t.or(file.t).ok_or_else(|| ConfigError::new("t", "required with `case`"))?;
            let t = finite("t", t)?;
            let split = match (&flags.split, file.split) {
                (Some(v), _) => match v.as_slice() {
                    [p, q] => [*p, *q],
                    _ => return Err(ConfigError::new("split", format!("expected two integers, got {}", v.len()))),
                },
                (None, Some(s)) => s,
                (None, None) => [0, 0],
            };
            let case = match case {
                CaseArg::BHalf => MidbandCase::BHalf,
                CaseArg::FHalf => MidbandCase::FHalf,
                CaseArg::GHalf => MidbandCase::GHalf,
            };
            let level = match flags.level.or(file.level).unwrap_or(LevelArg::Half) {
                LevelArg::Half => MidbandLevel::Half,
                LevelArg::ThreeHalves => MidbandLevel::ThreeHalves,
            };
            Some(Midband { case, level, t, split: (split[0] as f64, split[1] as f64) })
        }
    };

    let mut spec = match &midband {
        Some(mb) => galband::catalog::midband_spec(mb.case, mb.t, mb.split, mb.level, mm)
            .map_err(|e| ConfigError::new("case", e.to_string()))?,
        None => GalSpec::new(a, b, f, g, m).map_err(|e| ConfigError::new("a", e.to_string()))?,
    };
    if let Some(beta) = flags.beta.or(file.beta) {
        spec = spec.with_beta(beta).map_err(|e| ConfigError::new("beta", e.to_string()))?;
    }

    let emin = flags.emin.or(file.emin).map(|v| finite("emin", v)).transpose()?;
    let emax = flags.emax.or(file.emax).map(|v| finite("emax", v)).transpose()?;
    if let (Some(lo), Some(hi)) = (emin, emax) {
        if hi <= lo {
            return Err(ConfigError::new("emax", format!("energy range [{lo}, {hi}] is empty")));
        }
    }
    let points = flags.points.or(file.points).unwrap_or(512);
    if points < 8 {
        return Err(ConfigError::new("points", format!("{points} is below the minimum of 8")));
    }
    let scan_points = flags.scan_points.or(file.scan_points);
    if let Some(n) = scan_points {
        if n < 100 {
            return Err(ConfigError::new("scan_points", format!("{n} is below the minimum of 100")));
        }
    }
    let curve_points = flags.curve_points.or(file.curve_points).unwrap_or(401);
    if curve_points < 2 {
        return Err(ConfigError::new("curve_points", "need at least 2 samples"));
    }
    let tol = positive("tol", flags.tol.or(file.tol).unwrap_or(1e-8))?;
    let suite = parse_suite(flags.suite.as_deref().or(file.suite.as_deref()).unwrap_or("all"))?;

    Ok(Settings {
        spec,
        emin,
        emax,
        points,
        scan_points,
        curve_points,
        tol,
        output: flags.output.clone().or(file.output),
        format: flags.format.or(file.format).unwrap_or(Format::Csv),
        midband,
        state: flags.state.or(file.state),
        conjectures: flags.conjectures || file.conjectures.unwrap_or(false),
        suite,
        seed: flags.seed.or(file.seed).unwrap_or(20),
    })
}
