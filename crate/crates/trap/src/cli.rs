//! Argument parsing, config files and the top-level `run`.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::commands::{self, Outcome};
use crate::manifest::{self, RunManifest};

pub const THREADS_ENV: &str = "GALERKIN_TRAP_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_CERTIFICATION_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "galerkin-trap", version, about = "Galerkin Navier-Stokes projections: simulation, trapping-region certification and error bounds")]
pub struct Cli {
    /// Flat JSON object of flag values; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads [default: $GALERKIN_TRAP_THREADS, else all cores].
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Manifest path [default: <output>.manifest.json].
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", content = "params", rename_all = "kebab-case")]
pub enum Command {
    /// Integrate a Galerkin projection and write the trajectory as CSV.
    Simulate(SimulateArgs),
    /// Sample the boundary of a trapping region and emit a certificate.
    Certify(CertifyArgs),
    /// Estimate a lattice-sum constant.
    Constants(ConstantsArgs),
    /// Compare a ladder of small projections with a large one.
    Converge(ConvergeArgs),
    /// Log norms of the Jacobian at a state.
    Lognorm(LognormArgs),
    /// Check the structural conditions on a power-law envelope.
    CheckConditions(CheckConditionsArgs),
    /// Re-run the command recorded in a manifest.
    #[serde(skip)]
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Certify(_) => "certify",
            Command::Constants(_) => "constants",
            Command::Converge(_) => "converge",
            Command::Lognorm(_) => "lognorm",
            Command::CheckConditions(_) => "check-conditions",
            Command::Replay(_) => "replay",
        }
    }

    /// The primary output file, if the command writes one.
    pub fn out(&self) -> Option<&PathBuf> {
        match self {
            Command::Simulate(a) => Some(&a.out),
            Command::Certify(a) => a.out.as_ref(),
            Command::Constants(a) => a.out.as_ref(),
            Command::Converge(a) => Some(&a.out),
            Command::Lognorm(a) => a.out.as_ref(),
            Command::CheckConditions(a) => a.out.as_ref(),
            Command::Replay(a) => a.out.as_ref(),
        }
    }

    fn set_out(&mut self, out: PathBuf) {
        match self {
            Command::Simulate(a) => a.out = out,
            Command::Certify(a) => a.out = Some(out),
            Command::Constants(a) => a.out = Some(out),
            Command::Converge(a) => a.out = out,
            Command::Lognorm(a) => a.out = Some(out),
            Command::CheckConditions(a) => a.out = Some(out),
            Command::Replay(a) => a.out = Some(out),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeArg {
    /// RK4 with an exact integrating factor for the viscous term.
    Rk4If,
    /// Classical RK4 on the full right-hand side.
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(args_override_self = true)]
#[serde(rename_all = "kebab-case")]
pub struct SimulateArgs {
    /// Field file (JSON or .csv) or generator string, e.g.
    /// "random --radius 6 --envelope D=1,gamma=4 --seed 7".
    #[arg(long)]
    pub init: String,
    /// Complete missing conjugate modes of the initial field.
    #[arg(long)]
    pub symmetrize: bool,
    /// Force field file [default: zero].
    #[arg(long)]
    pub force: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    /// Restrict the initial field to the ball of this radius.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub h: f64,
    #[arg(long = "T", default_value_t = 1.0)]
    #[serde(rename = "T")]
    pub t_end: f64,
    /// Write every stride-th step (the final state is always written).
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    #[arg(long, value_enum, default_value_t = SchemeArg::Rk4If)]
    pub scheme: SchemeArg,
    /// Trajectory CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(args_override_self = true)]
#[serde(rename_all = "kebab-case")]
pub struct CertifyArgs {
    /// Region JSON: a built region or a recipe with a "build" field.
    #[arg(long)]
    pub region: PathBuf,
    /// Radius of the ball-shaped projection to certify on.
    #[arg(long, default_value_t = 8.0)]
    pub proj_radius: f64,
    /// Samples per facet.
    #[arg(long, default_value_t = 100)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Overrides the recipe margin.
    #[arg(long)]
    pub margin: Option<f64>,
    #[arg(long)]
    pub force: Option<PathBuf>,
    /// Sample the facets of a built region without re-checking how it was
    /// constructed, e.g. for a hand-made envelope.
    #[arg(long)]
    #[serde(default)]
    pub unchecked: bool,
    /// Certificate JSON [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstantArg {
    /// Supremum of |k|^γ S(k) over 0 < |k| <= kmax.
    CQ,
    /// Empirical enstrophy-modulus constant (two dimensions).
    EstmLin,
    /// Sum of |k|^-γ over the nonzero lattice.
    Zeta,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(args_override_self = true)]
#[serde(rename_all = "kebab-case")]
pub struct ConstantsArgs {
    /// Dimension.
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 4.0)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value_t = ConstantArg::CQ)]
    pub kind: ConstantArg,
    /// Largest |k| scanned for C_Q.
    #[arg(long, default_value_t = 40)]
    pub kmax: u32,
    /// Truncation radius of the lattice sums (ball radius of the sampled
    /// fields for estm-lin).
    #[arg(long, default_value_t = 64)]
    pub radius: u32,
    /// Sampled fields for estm-lin.
    #[arg(long, default_value_t = 200)]
    pub fields: u64,
    #[arg(long, default_value_t = 11)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    /// Print a table over --gammas instead of one JSON estimate.
    #[arg(long)]
    pub table: bool,
    #[arg(long, value_delimiter = ',', default_value = "4,4.5,5,6")]
    pub gammas: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(args_override_self = true)]
#[serde(rename_all = "kebab-case")]
pub struct ConvergeArgs {
    /// Initial field on the large projection (file or generator string).
    #[arg(long)]
    pub init: String,
    #[arg(long)]
    pub symmetrize: bool,
    #[arg(long)]
    pub force: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    /// Radius of the large projection.
    #[arg(long, default_value_t = 12.0)]
    pub m: f64,
    /// Radii of the small projections.
    #[arg(long, value_delimiter = ',', default_value = "4,6,8")]
    pub ladder: Vec<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub h: f64,
    #[arg(long = "T", default_value_t = 1.0)]
    #[serde(rename = "T")]
    pub t_end: f64,
    /// Compare the bound every stride-th step.
    #[arg(long, default_value_t = 10)]
    pub stride: usize,
    /// Log-norm bound; taken from condition D on --region when absent.
    #[arg(long, allow_negative_numbers = true)]
    pub l: Option<f64>,
    #[arg(long)]
    pub region: Option<PathBuf>,
    /// Largest |k| scanned for condition D.
    #[arg(long, default_value_t = 50)]
    pub kmax: u32,
    /// CSV with one row per ladder radius.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(args_override_self = true)]
#[serde(rename_all = "kebab-case")]
pub struct LognormArgs {
    /// State (file or generator string).
    #[arg(long)]
    pub init: String,
    #[arg(long)]
    pub symmetrize: bool,
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    /// Restrict the state to the ball of this radius.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Also report the condition-D bound of this region.
    #[arg(long)]
    pub region: Option<PathBuf>,
    /// Force used when the region is a recipe.
    #[arg(long)]
    pub force: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub kmax: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(args_override_self = true)]
#[serde(rename_all = "kebab-case")]
pub struct CheckConditionsArgs {
    /// Take γ, D and the dimension from this region.
    #[arg(long, conflicts_with_all = ["gamma", "amp"])]
    pub region: Option<PathBuf>,
    #[arg(long)]
    pub force: Option<PathBuf>,
    /// Dimension.
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Envelope amplitude D.
    #[arg(long)]
    pub amp: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(args_override_self = true)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub manifest_file: PathBuf,
    /// Write the main output here instead of the recorded path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Turns a flat JSON object into `--key value` arguments.
fn config_arguments(text: &str) -> anyhow::Result<Vec<OsString>> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let serde_json::Value::Object(map) = value else {
        anyhow::bail!("config must be a JSON object");
    };
    let mut out = Vec::new();
    for (key, value) in map {
        let flag = OsString::from(format!("--{}", key.replace('_', "-")));
        match value {
            serde_json::Value::Null | serde_json::Value::Bool(false) => {}
            serde_json::Value::Bool(true) => out.push(flag),
            serde_json::Value::Number(n) => out.extend([flag, n.to_string().into()]),
            serde_json::Value::String(s) => out.extend([flag, s.into()]),
            serde_json::Value::Array(items) => {
                let parts: Vec<String> = items
                    .iter()
                    .map(|v| match v {
                        serde_json::Value::Number(n) => Ok(n.to_string()),
                        serde_json::Value::String(s) => Ok(s.clone()),
                        _ => Err(anyhow::anyhow!("config key {key:?}: list items must be numbers or strings")),
                    })
                    .collect::<anyhow::Result<_>>()?;
                out.extend([flag, parts.join(",").into()]);
            }
            serde_json::Value::Object(_) => anyhow::bail!("config key {key:?}: nested objects are not allowed"),
        }
    }
    Ok(out)
}

/// Parses `argv`, splicing config-file values in right after the subcommand
/// so that later command-line flags override them.
fn parse(argv: Vec<OsString>) -> Result<Cli, ParseFailure> {
    let first = Cli::try_parse_from(&argv).map_err(ParseFailure::Clap)?;
    let Some(path) = &first.config else {
        return Ok(first);
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| ParseFailure::Other(anyhow::anyhow!("{}: {e}", path.display())))?;
    let extra = config_arguments(&text).map_err(|e| ParseFailure::Other(anyhow::anyhow!("{}: {e}", path.display())))?;
    let name = first.command.name();
    let at = argv
        .iter()
        .skip(1)
        .position(|a| a == name)
        .map(|i| i + 2)
        .expect("parsed subcommand appears in argv");
    let mut merged = argv[..at].to_vec();
    merged.extend(extra);
    merged.extend_from_slice(&argv[at..]);
    Cli::try_parse_from(&merged).map_err(ParseFailure::Clap)
}

enum ParseFailure {
    Clap(clap::Error),
    Other(anyhow::Error),
}

fn thread_count(flag: Option<usize>) -> anyhow::Result<usize> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| anyhow::anyhow!("{THREADS_ENV} must be a non-negative integer, got {v:?}")),
        Err(_) => Ok(0),
    }
}

/// Runs a parsed command inside a worker pool and writes its manifest.
pub fn execute(cli: Cli) -> anyhow::Result<Outcome> {
    let threads = thread_count(cli.threads)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    let started = Instant::now();
    let (command, outcome) = match cli.command {
        Command::Replay(r) => {
            let recorded = RunManifest::load(&r.manifest_file)?;
            let mut command = recorded.command;
            if let Some(out) = r.out {
                command.set_out(out);
            }
            let outcome = pool.install(|| commands::dispatch(&command))?;
            (command, outcome)
        }
        command => {
            let outcome = pool.install(|| commands::dispatch(&command))?;
            (command, outcome)
        }
    };
    let path = cli.manifest.or_else(|| command.out().map(|o| manifest::default_path(o)));
    if let Some(path) = path {
        RunManifest {
            seed: outcome.seed,
            constants_used: outcome.constants.clone(),
            outputs: outcome.outputs.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            threads: pool.current_num_threads(),
            wall_clock_seconds: started.elapsed().as_secs_f64(),
            command,
        }
        .save(&path)?;
    }
    Ok(outcome)
}

/// Parses and runs; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match parse(argv) {
        Ok(cli) => cli,
        Err(ParseFailure::Clap(e)) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
        Err(ParseFailure::Other(e)) => {
            eprintln!("error: {e:#}");
            return EXIT_ERROR;
        }
    };
    match execute(cli) {
        Ok(outcome) if outcome.passed => EXIT_OK,
        Ok(_) => EXIT_CERTIFICATION_FAILED,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_ok(args: &[&str]) -> Cli {
        match parse(args.iter().map(OsString::from).collect()) {
            Ok(c) => c,
            Err(ParseFailure::Clap(e)) => panic!("{e}"),
            Err(ParseFailure::Other(e)) => panic!("{e}"),
        }
    }

    #[test]
    fn config_values_become_flags() {
        let args = config_arguments(r#"{"nu": 0.5, "symmetrize": true, "ladder": [4, 6], "proj_radius": 3}"#).unwrap();
        let args: Vec<String> = args.into_iter().map(|a| a.into_string().unwrap()).collect();
        assert_eq!(args, ["--ladder", "4,6", "--nu", "0.5", "--proj-radius", "3", "--symmetrize"]);
        assert!(config_arguments("[1]").is_err());
        assert!(config_arguments(r#"{"a": {"b": 1}}"#).is_err());
    }

    #[test]
    fn flags_override_config_and_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let config = dir.path().join("c.json");
        std::fs::write(&config, r#"{"nu": 0.5, "h": 0.02}"#).unwrap();
        let c = config.to_str().unwrap();
        let cli = parse_ok(&["gt", "--config", c, "simulate", "--init", "x.json", "--out", "o.csv", "--nu", "2"]);
        let Command::Simulate(a) = cli.command else { panic!() };
        assert_eq!((a.nu, a.h, a.t_end), (2.0, 0.02, 1.0));
        let cli = parse_ok(&["gt", "simulate", "--init", "x.json", "--out", "o.csv", "--config", c]);
        let Command::Simulate(a) = cli.command else { panic!() };
        assert_eq!((a.nu, a.h), (0.5, 0.02));
    }

    #[test]
    fn unknown_config_key_is_a_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let config = dir.path().join("c.json");
        std::fs::write(&config, r#"{"viscosity": 0.5}"#).unwrap();
        let argv = ["gt", "--config", config.to_str().unwrap(), "simulate", "--init", "x", "--out", "o"];
        assert!(parse(argv.iter().map(OsString::from).collect()).is_err());
    }

    #[test]
    fn params_round_trip_through_json() {
        let cli = parse_ok(&["gt", "converge", "--init", "random --radius 12 --envelope D=1,gamma=4", "--out", "c.csv", "--l", "-0.5"]);
        let text = serde_json::to_string(&cli.command).unwrap();
        assert!(text.contains("\"subcommand\":\"converge\""), "{text}");
        assert!(text.contains("\"T\":1.0"), "{text}");
        let back: Command = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cli.command);
    }
}
