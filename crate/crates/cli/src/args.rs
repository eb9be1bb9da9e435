//! Command-line definitions and the flat TOML config merge.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use corank::{AmbientPoint, Complex64};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "corank", version, about = "Metric, distance, scaling and hyperbolicity experiments on model domains")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Flat TOML file of flag values; flags given on the command line win.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Domain spec file (JSON: {"dim", "label", "P": [{"j","k","re","im"}]}).
    #[arg(long, global = true)]
    pub domain: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Seed for every sampling command.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; all cores when absent.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaMethodArg {
    FourPoint,
    ThinTriangle,
}

/// Solver effort shared by the distance-based commands.
#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct SolverArgs {
    /// Seeds only, no shortening.
    #[arg(long)]
    pub quick: bool,
    /// Shortening sweeps (overrides the default).
    #[arg(long)]
    pub iterations: Option<usize>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Catlin metric M(z; X) and the analytic-disc upper bound.
    EvalMetric {
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        point: AmbientPoint,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        vector: AmbientPoint,
        #[arg(long, default_value_t = 64)]
        disc_samples: usize,
    },
    /// Distance bracket between two interior points plus the witness curve.
    Distance {
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        p: AmbientPoint,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        q: AmbientPoint,
        #[command(flatten)]
        solver: SolverArgs,
        /// Also run the lattice search with spacings `log_depth,tangential`.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        graph: Option<Vec<f64>>,
    },
    /// Samples of the normal geodesic x − (a·e^{−t}, 0).
    Geodesic {
        /// Boundary point x.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        point: AmbientPoint,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t0: f64,
        #[arg(long)]
        t1: f64,
        #[arg(long, default_value_t = 33)]
        samples: usize,
    },
    /// Rescaling along the inward normal at `xi`, or at explicit points `u`.
    Scale {
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true, conflicts_with = "u")]
        xi: Option<AmbientPoint>,
        /// Sequence indices (with `xi`: u_n = xi − (1/n, 0)).
        #[arg(long, value_delimiter = ',')]
        n: Vec<u64>,
        /// Interior points, repeated once per step.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        u: Vec<AmbientPoint>,
        /// Where to write the limit domain spec.
        #[arg(long)]
        #[serde(skip)]
        limit_out: Option<PathBuf>,
    },
    /// Blowdown at infinity plus convergence to the top homogeneous part.
    Blowdown {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u64>,
        /// Centre of the comparison box (origin by default).
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        center: Option<AmbientPoint>,
        /// Radii of the comparison box (all 1 by default).
        #[arg(long, value_delimiter = ',')]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 8)]
        grid: usize,
        #[arg(long, default_value_t = 8)]
        directions: usize,
    },
    /// δ estimate from interior points sampled in a box.
    Delta {
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        center: AmbientPoint,
        #[arg(long, value_delimiter = ',', required = true)]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 8)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = DeltaMethodArg::FourPoint)]
        method: DeltaMethodArg,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Gromov products (p_n | q_n)_o along normals at two boundary points.
    ProbeProduct {
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        xi_plus: AmbientPoint,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        xi_minus: AmbientPoint,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        origin: AmbientPoint,
        #[arg(long, default_value_t = 6)]
        n_max: u32,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// (A, B)-quasi-geodesic check of a curve CSV.
    VerifyQg {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 0.0)]
        b: f64,
        /// Sampled parameter pairs (0 = all).
        #[arg(long, default_value_t = 0)]
        pairs: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Subharmonicity and type data of the domain polynomial.
    CheckDomain {
        #[arg(long, default_value_t = corank::domain::DEFAULT_BOX_RADIUS)]
        box_radius: f64,
        #[arg(long, default_value_t = corank::domain::DEFAULT_BOX_SAMPLES)]
        box_samples: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::EvalMetric { .. } => "eval-metric",
            Command::Distance { .. } => "distance",
            Command::Geodesic { .. } => "geodesic",
            Command::Scale { .. } => "scale",
            Command::Blowdown { .. } => "blowdown",
            Command::Delta { .. } => "delta",
            Command::ProbeProduct { .. } => "probe-product",
            Command::VerifyQg { .. } => "verify-qg",
            Command::CheckDomain { .. } => "check-domain",
        }
    }
}

const COMMANDS: [&str; 9] =
    ["eval-metric", "distance", "geodesic", "scale", "blowdown", "delta", "probe-product", "verify-qg", "check-domain"];

/// Comma-separated complex coordinates such as `-1,0` or `0.5+0.2i,1`.
pub fn parse_point(s: &str) -> Result<AmbientPoint, String> {
    s.split(',')
        .map(|c| {
            let c = c.trim();
            c.parse::<Complex64>().map_err(|_| format!("cannot parse coordinate `{c}` (expected a real or complex literal like 0.5-2i)"))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(AmbientPoint::new)
}

fn flag_given(argv: &[String], flag: &str) -> bool {
    argv.iter().any(|a| a == flag || a.starts_with(&format!("{flag}=")))
}

fn toml_scalar(v: &toml::Value) -> Result<String, String> {
    match v {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(f) => Ok(f.to_string()),
        other => Err(format!("unsupported config value {other}")),
    }
}

/// Inserts config entries as flags after the subcommand, except those
/// already present in `argv`. A `command` key supplies a missing subcommand.
pub fn merge_config(argv: Vec<String>) -> Result<Vec<String>, String> {
    let mut path = None;
    for (i, a) in argv.iter().enumerate() {
        if a == "--config" {
            path = argv.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let table: toml::Table = text.parse().map_err(|e| format!("invalid config {path}: {e}"))?;

    let mut argv = argv;
    let mut at = match argv.iter().position(|a| COMMANDS.contains(&a.as_str())) {
        Some(i) => i + 1,
        None => {
            let cmd = table
                .get("command")
                .and_then(|v| v.as_str())
                .ok_or_else(|| "no subcommand given on the command line or as `command` in the config".to_string())?;
            argv.push(cmd.to_string());
            argv.len()
        }
    };
    for (key, value) in &table {
        if key == "command" || key == "config" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        if flag_given(&argv, &flag) {
            continue;
        }
        let mut tokens = Vec::new();
        match value {
            toml::Value::Boolean(true) => tokens.push(flag),
            toml::Value::Boolean(false) => {}
            toml::Value::Array(items) if items.iter().all(|v| v.is_str()) => {
                for v in items {
                    tokens.push(flag.clone());
                    tokens.push(toml_scalar(v)?);
                }
            }
            toml::Value::Array(items) => {
                let parts: Vec<String> = items.iter().map(toml_scalar).collect::<Result<_, _>>()?;
                tokens.push(flag);
                tokens.push(parts.join(","));
            }
            scalar => {
                tokens.push(flag);
                tokens.push(toml_scalar(scalar)?);
            }
        }
        let n = tokens.len();
        argv.splice(at..at, tokens);
        at += n;
    }
    Ok(argv)
}
