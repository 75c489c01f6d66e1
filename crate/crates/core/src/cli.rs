//! Command-line front end. Flags and an optional TOML file both resolve to
//! one [`RunConfig`]; every output embeds it together with the version.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::grid::{GaussGrid, GridConfig, GridError};
use crate::kernel::{kernel_extremum, t_max, Extremum, KernelError, KernelEval, KernelKind};
use crate::operators::{
    far_time_candidates, heat_maximal, maximal_classical, maximal_far_adapted, maximal_local,
    maximal_theta, GridFunction, HeatVariant, LocalBase, OperatorError, TimeGrid,
};
use crate::profile::{Profile, ProfileError};
use crate::verify::{far_pairs, run_checks, CheckKind, SuiteReport, VerifyConfig};
use crate::weights::{ap_theta_constant, far_pair_bound, CubeFamilySpec, FarPairReport, WeightError, WeightSpec};

pub const ARTIFACT: &str = concat!("hermax ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{flag}: {message}")]
    Usage { flag: String, message: String },
    #[error("config file {path}: {message}")]
    Config { path: String, message: String },
    #[error("{0}")]
    Clap(#[from] clap::Error),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    fn usage(flag: &str, message: impl Into<String>) -> Self {
        CliError::Usage {
            flag: flag.to_string(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } | CliError::Config { .. } => 2,
            CliError::Clap(e) => e.exit_code(),
            _ => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    Heat,
    Hermite,
    Unrescaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum OperatorArg {
    #[value(name = "m")]
    #[serde(rename = "m")]
    M,
    #[value(name = "mtheta")]
    #[serde(rename = "mtheta")]
    MTheta,
    #[value(name = "mloc")]
    #[serde(rename = "mloc")]
    MLoc,
    #[value(name = "mfar+")]
    #[serde(rename = "mfar+")]
    MFarPlus,
    #[value(name = "mfar-")]
    #[serde(rename = "mfar-")]
    MFarMinus,
    #[value(name = "tstar")]
    #[serde(rename = "tstar")]
    TStar,
    #[value(name = "tsharp")]
    #[serde(rename = "tsharp")]
    TSharp,
}

impl OperatorArg {
    fn name(self) -> &'static str {
        match self {
            OperatorArg::M => "m",
            OperatorArg::MTheta => "mtheta",
            OperatorArg::MLoc => "mloc",
            OperatorArg::MFarPlus => "mfar+",
            OperatorArg::MFarMinus => "mfar-",
            OperatorArg::TStar => "tstar",
            OperatorArg::TSharp => "tsharp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum WeightClass {
    Ap,
    Aptheta,
    Aploc,
    Appair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    Centered,
    Dyadic,
}

/// The resolved command with its arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CommandSpec {
    GridDump,
    GridNear {
        point: Vec<f64>,
    },
    GridQcube {
        point: Vec<f64>,
        t: f64,
    },
    KernelEval {
        x: Vec<f64>,
        y: Vec<f64>,
        t: f64,
        kind: KindArg,
    },
    KernelTmax {
        x: Vec<f64>,
        y: Vec<f64>,
    },
    KernelExtremum {
        x: Vec<f64>,
        y: Vec<f64>,
        t: f64,
        mode: Extremum,
    },
    MaximalEval {
        op: OperatorArg,
        /// Evaluation points; every cube centre when empty.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        points: Vec<Vec<f64>>,
        /// Input profile, ingested on the grid.
        function: String,
    },
    WeightsSweep {
        class: WeightClass,
        family: FamilyArg,
        m_min: i32,
        m_max: i32,
        depth: u32,
        samples: usize,
    },
    Verify {
        checks: Vec<CheckKind>,
    },
}

/// Everything one invocation depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dim: usize,
    pub max_layer: u32,
    pub p: f64,
    pub theta: f64,
    pub seed: u64,
    pub weight: String,
    /// CSV for data commands and JSON for `verify` when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub time_grid: TimeGrid,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            max_layer: 6,
            p: 2.0,
            theta: 0.0,
            seed: 42,
            weight: "const:1".to_string(),
            format: None,
            output: None,
            time_grid: TimeGrid::default(),
            command: None,
        }
    }
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises to TOML")
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config {
            path: "<text>".into(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(CliError::usage("--p", format!("requires 1 < p < inf, got {}", self.p)));
        }
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(CliError::usage("--theta", format!("requires theta >= 0, got {}", self.theta)));
        }
        GridConfig::new(self.dim, self.max_layer).map_err(|e| CliError::usage("--d/--lmax", e.to_string()))?;
        self.time_grid
            .validate()
            .map_err(|e| CliError::usage("--t-min/--t-max/--ppd", e.to_string()))?;
        self.weight
            .parse::<Profile>()
            .map_err(|e| CliError::usage("--weight", e.to_string()))?;
        let check_point = |flag: &str, v: &[f64]| {
            if v.len() == self.dim {
                Ok(())
            } else {
                Err(CliError::usage(flag, format!("expected {} coordinates, got {}", self.dim, v.len())))
            }
        };
        match &self.command {
            Some(CommandSpec::GridNear { point }) => check_point("--point", point)?,
            Some(CommandSpec::GridQcube { point, t }) => {
                check_point("--point", point)?;
                if !(*t > 0.0 && t.is_finite()) {
                    return Err(CliError::usage("--t", "requires t > 0"));
                }
            }
            Some(CommandSpec::KernelEval { x, y, t, .. }) | Some(CommandSpec::KernelExtremum { x, y, t, .. }) => {
                check_point("--x", x)?;
                check_point("--y", y)?;
                if !(*t > 0.0 && t.is_finite()) {
                    return Err(CliError::usage("--t", "requires t > 0"));
                }
            }
            Some(CommandSpec::KernelTmax { x, y }) => {
                check_point("--x", x)?;
                check_point("--y", y)?;
            }
            Some(CommandSpec::MaximalEval { points, function, .. }) => {
                for p in points {
                    check_point("--point", p)?;
                }
                function
                    .parse::<Profile>()
                    .map_err(|e| CliError::usage("--function", e.to_string()))?;
            }
            Some(CommandSpec::WeightsSweep { m_min, m_max, .. }) => {
                if m_min > m_max {
                    return Err(CliError::usage("--m-min", "must not exceed --m-max"));
                }
            }
            Some(CommandSpec::Verify { checks }) => {
                if self.dim != 1 {
                    return Err(CliError::usage("--d", "the verification suite runs in one dimension"));
                }
                if checks.is_empty() {
                    return Err(CliError::usage("--check", "select at least one check or pass --all"));
                }
            }
            Some(CommandSpec::GridDump) | None => {}
        }
        Ok(())
    }

    pub fn effective_format(&self) -> Format {
        match (self.format, &self.command) {
            (Some(f), _) => f,
            (None, Some(CommandSpec::Verify { .. })) => Format::Json,
            (None, _) => Format::Csv,
        }
    }

    pub fn grid(&self) -> GridConfig {
        GridConfig::new(self.dim, self.max_layer).expect("validated")
    }
}

/// A comma-separated point; the alias keeps clap from treating it as a
/// repeated argument.
type Point = Vec<f64>;

fn parse_point(s: &str) -> Result<Point, String> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}")))
        .collect()
}

#[derive(Debug, Parser)]
#[command(name = "hermax", version, about = "Gaussian-grid maximal operators, Hermite heat kernels and weight classes")]
#[command(allow_negative_numbers = true, propagate_version = true)]
struct Cli {
    /// TOML file with any RunConfig keys; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Dimension.
    #[arg(long = "d", global = true)]
    dim: Option<usize>,
    /// Truncation layer L_max.
    #[arg(long, global = true)]
    lmax: Option<u32>,
    /// Weight exponent, 1 < p < inf.
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Relaxation exponent for M^θ and A_p^θ.
    #[arg(long, global = true)]
    theta: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Smallest time in the sup over t.
    #[arg(long, global = true)]
    t_min: Option<f64>,
    /// Largest time in the sup over t.
    #[arg(long, global = true)]
    t_max: Option<f64>,
    /// Time-grid points per decade.
    #[arg(long, global = true)]
    ppd: Option<u32>,
    /// Weight profile, e.g. `shifted-power:4`.
    #[arg(long, global = true)]
    weight: Option<String>,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Grid geometry.
    #[command(subcommand)]
    Grid(GridCmd),
    /// Kernel evaluation.
    #[command(subcommand)]
    Kernel(KernelCmd),
    /// Maximal operators on an ingested profile.
    #[command(subcommand)]
    Maximal(MaximalCmd),
    /// Muckenhoupt-type sweeps.
    #[command(subcommand)]
    Weights(WeightsCmd),
    /// Run the verification suite.
    #[command(allow_negative_numbers = true)]
    Verify(VerifyArgs),
}

#[derive(Debug, Subcommand)]
enum GridCmd {
    /// List every cube of the truncated grid.
    Dump,
    /// The neighbourhood N(R_x).
    #[command(allow_negative_numbers = true)]
    Near {
        #[arg(long, value_parser = parse_point)]
        point: Point,
    },
    /// The cube Q_t(R_x).
    #[command(allow_negative_numbers = true)]
    Qcube {
        #[arg(long, value_parser = parse_point)]
        point: Point,
        #[arg(long)]
        t: f64,
    },
}

#[derive(Debug, Subcommand)]
enum KernelCmd {
    /// log k_t(x, y) or log h_t(x, y).
    #[command(allow_negative_numbers = true)]
    Eval {
        #[arg(long, value_parser = parse_point)]
        x: Point,
        #[arg(long, value_parser = parse_point)]
        y: Point,
        #[arg(long)]
        t: f64,
        #[arg(long, value_enum, default_value = "hermite")]
        kind: KindArg,
    },
    /// The time maximising t -> k_t(x, y).
    #[command(allow_negative_numbers = true)]
    Tmax {
        #[arg(long, value_parser = parse_point)]
        x: Point,
        #[arg(long, value_parser = parse_point)]
        y: Point,
    },
    /// Kernel supremum or infimum over the grid cubes of x and y.
    #[command(allow_negative_numbers = true)]
    Extremum {
        #[arg(long, value_parser = parse_point)]
        x: Point,
        #[arg(long, value_parser = parse_point)]
        y: Point,
        #[arg(long)]
        t: f64,
        #[arg(long, value_enum, default_value = "sup")]
        mode: ModeArg,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Sup,
    Inf,
}

#[derive(Debug, Subcommand)]
enum MaximalCmd {
    /// Evaluate one operator at points.
    #[command(allow_negative_numbers = true)]
    Eval {
        #[arg(long, value_enum)]
        op: OperatorArg,
        /// Repeatable; defaults to every cube centre.
        #[arg(long = "point", value_parser = parse_point)]
        points: Vec<Point>,
        /// Input profile, averaged over each grid cube.
        #[arg(long, default_value = "shifted-power:-1")]
        function: String,
    },
}

#[derive(Debug, Subcommand)]
enum WeightsCmd {
    /// Ratio sweep over a cube family.
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[arg(long, value_enum)]
        class: WeightClass,
        #[arg(long, value_enum, default_value = "centered")]
        family: FamilyArg,
        #[arg(long, default_value_t = 1)]
        m_min: i32,
        #[arg(long, default_value_t = 12)]
        m_max: i32,
        /// Subdivision depth for dyadic and neighbourhood families.
        #[arg(long, default_value_t = 2)]
        depth: u32,
        /// Far pairs for `appair`.
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Repeatable: kernel, tmax, ratio, domination, weights.
    #[arg(long = "check", value_parser = |s: &str| s.parse::<CheckKind>(), conflicts_with = "all")]
    checks: Vec<CheckKind>,
    /// Every check.
    #[arg(long)]
    all: bool,
}

impl Cmd {
    fn into_spec(self) -> CommandSpec {
        match self {
            Cmd::Grid(GridCmd::Dump) => CommandSpec::GridDump,
            Cmd::Grid(GridCmd::Near { point }) => CommandSpec::GridNear { point },
            Cmd::Grid(GridCmd::Qcube { point, t }) => CommandSpec::GridQcube { point, t },
            Cmd::Kernel(KernelCmd::Eval { x, y, t, kind }) => CommandSpec::KernelEval { x, y, t, kind },
            Cmd::Kernel(KernelCmd::Tmax { x, y }) => CommandSpec::KernelTmax { x, y },
            Cmd::Kernel(KernelCmd::Extremum { x, y, t, mode }) => CommandSpec::KernelExtremum {
                x,
                y,
                t,
                mode: match mode {
                    ModeArg::Sup => Extremum::Sup,
                    ModeArg::Inf => Extremum::Inf,
                },
            },
            Cmd::Maximal(MaximalCmd::Eval { op, points, function }) => {
                CommandSpec::MaximalEval { op, points, function }
            }
            Cmd::Weights(WeightsCmd::Sweep {
                class,
                family,
                m_min,
                m_max,
                depth,
                samples,
            }) => CommandSpec::WeightsSweep {
                class,
                family,
                m_min,
                m_max,
                depth,
                samples,
            },
            Cmd::Verify(v) => CommandSpec::Verify {
                checks: if v.all { CheckKind::ALL.to_vec() } else { v.checks },
            },
        }
    }
}

fn read_config_file(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| CliError::Config {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Resolves argv (including the program name) into a validated config:
/// defaults, then the config file, then flags.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let mut cfg = match &cli.config {
        Some(path) => read_config_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = cli.dim {
        cfg.dim = v;
    }
    if let Some(v) = cli.lmax {
        cfg.max_layer = v;
    }
    if let Some(v) = cli.p {
        cfg.p = v;
    }
    if let Some(v) = cli.theta {
        cfg.theta = v;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.t_min {
        cfg.time_grid.t_min = v;
    }
    if let Some(v) = cli.t_max {
        cfg.time_grid.t_max = v;
    }
    if let Some(v) = cli.ppd {
        cfg.time_grid.points_per_decade = v;
    }
    if let Some(v) = cli.weight {
        cfg.weight = v;
    }
    if let Some(v) = cli.output {
        cfg.output = Some(v);
    }
    if let Some(v) = cli.format {
        cfg.format = Some(v);
    }
    if let Some(cmd) = cli.command {
        cfg.command = Some(cmd.into_spec());
    }
    if cfg.command.is_none() {
        return Err(CliError::usage("<command>", "no subcommand given and none in the config file"));
    }
    cfg.validate()?;
    Ok(cfg)
}

/// The rendered output of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// File or stdout contents.
    pub body: String,
    /// One line per check or sweep, for the terminal.
    pub summary: Vec<String>,
    /// False when a verification check failed.
    pub ok: bool,
}

fn header(cfg: &RunConfig) -> String {
    format!(
        "# {ARTIFACT}\n# config {}\n",
        serde_json::to_string(cfg).expect("config serialises")
    )
}

fn json_body(cfg: &RunConfig, result: serde_json::Value) -> String {
    let v = json!({ "artifact": ARTIFACT, "config": cfg, "result": result });
    let mut s = serde_json::to_string_pretty(&v).expect("json");
    s.push('\n');
    s
}

fn fmt_point(p: &[f64]) -> String {
    p.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(",")
}

/// Executes a validated config without touching the filesystem.
pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let command = cfg.command.clone().ok_or_else(|| CliError::usage("<command>", "missing"))?;
    let grid = cfg.grid();
    let mut summary = Vec::new();
    let mut ok = true;
    let body = match command {
        CommandSpec::GridDump => {
            let g = GaussGrid::new(grid)?;
            summary.push(format!("grid: {} cubes (d={}, L={})", g.len(), cfg.dim, cfg.max_layer));
            match cfg.effective_format() {
                Format::Csv => {
                    let mut s = header(cfg);
                    let coords: Vec<String> = (1..=cfg.dim).map(|a| format!("i_{a}")).collect();
                    writeln!(s, "layer,level,{},side", coords.join(",")).unwrap();
                    for c in g.cubes() {
                        let ids: Vec<String> = c.coords.iter().map(|i| i.to_string()).collect();
                        writeln!(s, "{},{},{},{}", c.layer, c.level, ids.join(","), c.side()).unwrap();
                    }
                    s
                }
                Format::Json => json_body(cfg, json!({ "count": g.len(), "cubes": g.cubes() })),
            }
        }
        CommandSpec::GridNear { point } => {
            let r = grid.cube_at(&point)?;
            let near = grid.near_region(&r)?;
            let bx = grid.near_box(&r)?;
            summary.push(format!("N(R) of {r}: {} cubes, box {:?}..{:?}", near.len(), bx.lo, bx.hi));
            match cfg.effective_format() {
                Format::Csv => format!("{}# cube {r}\n{}", header(cfg), near.to_text()),
                Format::Json => json_body(cfg, json!({ "cube": r, "box": bx, "cubes": near.cubes() })),
            }
        }
        CommandSpec::GridQcube { point, t } => {
            let r = grid.cube_at(&point)?;
            let q = grid.q_cube(&r, t);
            summary.push(format!(
                "Q_t(R) for {r} at t={t}: half-width 2^{}{}",
                q.half_width_exp,
                if q.truncated { " (truncated)" } else { "" }
            ));
            match cfg.effective_format() {
                Format::Csv => {
                    let mut s = header(cfg);
                    writeln!(s, "cube,t,radius,half_width_exp,half_width,truncated").unwrap();
                    writeln!(s, "{r},{t},{},{},{},{}", q.radius, q.half_width_exp, q.half_width(), q.truncated).unwrap();
                    s
                }
                Format::Json => json_body(cfg, json!({ "cube": r, "t": t, "qcube": q, "half_width": q.half_width() })),
            }
        }
        CommandSpec::KernelEval { x, y, t, kind } => {
            let kk = match kind {
                KindArg::Heat => KernelKind::Heat,
                KindArg::Hermite => KernelKind::Hermite,
                KindArg::Unrescaled => KernelKind::Unrescaled,
            };
            let ev = KernelEval::evaluate(kk, &x, &y, t)?;
            summary.push(format!("log k = {:e}", ev.log_value));
            match cfg.effective_format() {
                Format::Csv => format!(
                    "{}x,y,t,kind,log_value,value\n\"{}\",\"{}\",{t},{},{:e},{:e}\n",
                    header(cfg),
                    fmt_point(&x),
                    fmt_point(&y),
                    format!("{kind:?}").to_lowercase(),
                    ev.log_value,
                    ev.log_value.exp()
                ),
                Format::Json => json_body(cfg, json!({ "kind": kind, "eval": ev, "value": ev.log_value.exp() })),
            }
        }
        CommandSpec::KernelTmax { x, y } => {
            let res = t_max(&x, &y, None)?;
            summary.push(format!("t_m = {:e}", res.t_m));
            match cfg.effective_format() {
                Format::Csv => format!(
                    "{}x,y,t_m,log_k_at_max,bracket_lo,bracket_hi,iterations\n\"{}\",\"{}\",{:e},{:e},{:e},{:e},{}\n",
                    header(cfg),
                    fmt_point(&x),
                    fmt_point(&y),
                    res.t_m,
                    res.log_k_at_max,
                    res.bracket.0,
                    res.bracket.1,
                    res.iterations
                ),
                Format::Json => json_body(cfg, json!({ "x": x, "y": y, "tmax": res })),
            }
        }
        CommandSpec::KernelExtremum { x, y, t, mode } => {
            let a = grid.cube_at(&x)?;
            let b = grid.cube_at(&y)?;
            let lv = kernel_extremum(&a, &b, t, mode)?;
            let mode_name = format!("{mode:?}").to_lowercase();
            summary.push(format!("log k^{mode_name}_t({a}; {b}) = {lv:e}"));
            match cfg.effective_format() {
                Format::Csv => format!("{}cube_x,cube_y,t,mode,log_value\n{a},{b},{t},{mode_name},{lv:e}\n", header(cfg)),
                Format::Json => json_body(cfg, json!({ "cube_x": a, "cube_y": b, "t": t, "mode": mode, "log_value": lv })),
            }
        }
        CommandSpec::MaximalEval { op, points, function } => {
            let profile: Profile = function.parse()?;
            let f = GridFunction::ingest(&profile, grid)?;
            let (rows, skipped) = maximal_rows(cfg, &f, op, &points)?;
            summary.push(format!("{}: {} points, {} skipped (truncated neighbourhood)", op.name(), rows.len(), skipped));
            let param = if op == OperatorArg::MTheta { format!("{}", cfg.theta) } else { "-".to_string() };
            match cfg.effective_format() {
                Format::Csv => {
                    let mut s = header(cfg);
                    if skipped > 0 {
                        writeln!(s, "# skipped {skipped} points whose neighbourhood leaves the box").unwrap();
                    }
                    let coords: Vec<String> = (1..=cfg.dim).map(|a| format!("x_{a}")).collect();
                    writeln!(s, "{},operator,parameter,value", coords.join(",")).unwrap();
                    for (x, v) in &rows {
                        writeln!(s, "{},{},{param},{v:e}", fmt_point(x), op.name()).unwrap();
                    }
                    s
                }
                Format::Json => json_body(
                    cfg,
                    json!({
                        "operator": op,
                        "parameter": param,
                        "skipped": skipped,
                        "rows": rows.iter().map(|(x, v)| json!({"x": x, "value": v})).collect::<Vec<_>>(),
                    }),
                ),
            }
        }
        CommandSpec::WeightsSweep {
            class,
            family,
            m_min,
            m_max,
            depth,
            samples,
        } => {
            let w = WeightSpec::closed(cfg.weight.parse()?, cfg.p)?;
            if class == WeightClass::Appair {
                let pairs = far_pairs(samples, cfg.seed);
                let mut reps: Vec<FarPairReport> = Vec::with_capacity(pairs.len());
                for p in &pairs {
                    reps.push(far_pair_bound(&w, &p.r, &p.rp, &[(p.x.clone(), p.y.clone())])?);
                }
                let worst = reps.iter().map(|r| r.log_max_plus).fold(f64::NEG_INFINITY, f64::max);
                summary.push(format!("appair {}: {} pairs, max log ratio {worst:e}", cfg.weight, reps.len()));
                match cfg.effective_format() {
                    Format::Csv => {
                        let mut s = header(cfg);
                        writeln!(s, "r,r_prime,log_weight_product,log_max_plus,log_max_minus").unwrap();
                        for (p, r) in pairs.iter().zip(&reps) {
                            writeln!(
                                s,
                                "{},{},{:e},{:e},{:e}",
                                p.r, p.rp, r.log_weight_product, r.log_max_plus, r.log_max_minus
                            )
                            .unwrap();
                        }
                        s
                    }
                    Format::Json => json_body(cfg, json!({ "pairs": pairs, "reports": reps })),
                }
            } else {
                let fam = match (class, family) {
                    (WeightClass::Aploc, _) => CubeFamilySpec::NearRegions { config: grid, depth },
                    (_, FamilyArg::Centered) => CubeFamilySpec::Centered {
                        dim: cfg.dim,
                        m_min,
                        m_max,
                    },
                    (_, FamilyArg::Dyadic) => CubeFamilySpec::AllDyadic {
                        config: grid,
                        min_side_exp: depth as i32,
                    },
                };
                let theta = if class == WeightClass::Aptheta { cfg.theta } else { 0.0 };
                let rep = ap_theta_constant(&w, theta, &fam)?;
                summary.push(format!(
                    "{class:?} {} over {} ({} cubes): sup {:e} at {}",
                    cfg.weight,
                    rep.family,
                    rep.rows.len(),
                    rep.supremum,
                    rep.argmax.as_deref().unwrap_or("-")
                ));
                match cfg.effective_format() {
                    Format::Csv => format!("{}{}", header(cfg), rep.to_csv()),
                    Format::Json => json_body(cfg, serde_json::to_value(&rep).expect("json")),
                }
            }
        }
        CommandSpec::Verify { checks } => {
            let vcfg = VerifyConfig::with_seed(cfg.seed);
            let suite = run_checks(&checks, &vcfg);
            ok = suite.all_ok();
            summary.extend(suite.reports.iter().map(|r| r.summary_line()));
            let wrapped = SuiteReport {
                schema_version: suite.schema_version,
                artifact: suite.artifact.clone(),
                config: json!({ "run": cfg, "verify": vcfg }),
                reports: suite.reports,
            };
            match cfg.effective_format() {
                Format::Json => wrapped.to_json(),
                Format::Csv => format!("{}{}", header(cfg), wrapped.to_text()),
            }
        }
    };
    Ok(Outcome { body, summary, ok })
}

type MaxRows = (Vec<(Vec<f64>, f64)>, usize);

fn maximal_rows(cfg: &RunConfig, f: &GridFunction, op: OperatorArg, points: &[Vec<f64>]) -> Result<MaxRows, CliError> {
    let explicit = !points.is_empty();
    let pts: Vec<Vec<f64>> = if explicit {
        points.to_vec()
    } else {
        GaussGrid::new(*f.config())?.cubes().iter().map(|c| c.center()).collect()
    };
    let tg = &cfg.time_grid;
    let mut rows = Vec::with_capacity(pts.len());
    let mut skipped = 0;
    for x in pts {
        let value = match op {
            OperatorArg::M => maximal_classical(f, &x),
            OperatorArg::MTheta => maximal_theta(f, &x, cfg.theta),
            OperatorArg::MLoc => maximal_local(LocalBase::HardyLittlewood, f, &x, tg),
            OperatorArg::MFarPlus | OperatorArg::MFarMinus => {
                let mode = if op == OperatorArg::MFarPlus { Extremum::Sup } else { Extremum::Inf };
                far_time_candidates(f, &x)
                    .and_then(|c| maximal_far_adapted(f, &x, mode, &tg.clone().with_extra(c)))
            }
            OperatorArg::TStar => heat_maximal(f, &x, HeatVariant::Hermite, tg),
            OperatorArg::TSharp => heat_maximal(f, &x, HeatVariant::Sharp, tg),
        };
        match value {
            Ok(v) => rows.push((x, v)),
            Err(OperatorError::Grid(GridError::Truncated(_))) if !explicit => skipped += 1,
            Err(e) => return Err(e.into()),
        }
    }
    Ok((rows, skipped))
}

/// Writes the outcome to `--output` or stdout and the summary to stderr.
pub fn run(cfg: &RunConfig) -> Result<bool, CliError> {
    let outcome = execute(cfg)?;
    match &cfg.output {
        Some(path) => std::fs::write(path, &outcome.body).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?,
        None => print!("{}", outcome.body),
    }
    for line in &outcome.summary {
        eprintln!("{line}");
    }
    Ok(outcome.ok)
}

/// Full entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match parse_config(args) {
        Ok(c) => c,
        Err(CliError::Clap(e)) => {
            let _ = e.print();
            return e.exit_code();
        }
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    match run(&cfg) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
