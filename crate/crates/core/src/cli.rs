//! Front end for the `mma` binary: `check`, `simulate` and `diagnose`.
//!
//! Exit codes: 0 for a definite outcome, 1 for usage, config or IO errors,
//! 2 for an indeterminate outcome or a refused run.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::conditions::{classify_at, Conclusion};
use crate::config::{Experiment, RunConfig};
use crate::diagnostics::{holder_estimate, increment_tail_scaling, moment_scaling, sup_divergence_experiment, DiagOptions, FitStatus};
use crate::error::{Error, Result};
use crate::simulation::{SimOptions, Simulator, TruncationParams};
use crate::stats::{mean, variance};

#[derive(Debug, Parser)]
#[command(name = "mma", version, about = "Existence, path regularity and simulation of mixed moving averages")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the condition checkers and print a JSON classification.
    Check {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate sample paths; writes CSV plus a JSON sidecar.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
        /// Print a replica summary instead of requiring --out.
        #[arg(long)]
        summary: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a diagnostics experiment and write its JSON report.
    Diagnose {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Replica summary printed by `simulate --summary`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub replicas: u64,
    pub seed: u64,
    /// Average over replicas of each path's time-average.
    pub mean: f64,
    pub stderr: f64,
    pub mean_x1: f64,
    pub trunc: TruncationParams,
    #[serde(with = "crate::ext::real")]
    pub trunc_error_bound: f64,
}

pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

fn emit(json: String, out: Option<&Path>) -> Result<String> {
    match out {
        Some(p) => {
            std::fs::write(p, json.as_bytes())?;
            Ok(String::new())
        }
        None => Ok(json),
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::RegimeMismatch(_) | Error::ExistenceFailed(_) => 2,
        _ => 1,
    }
}

fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

pub fn execute(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Check { config, out } => {
            let cfg = RunConfig::load(config)?;
            let spec = cfg.spec();
            let at = cfg.check.as_ref().and_then(|c| match (c.alpha, c.epsilon) {
                (Some(a), Some(e)) => Some((a, e)),
                _ => None,
            });
            let class = classify_at(&spec, &cfg.checker(), at)?;
            let code = if class.conclusion == Conclusion::Indeterminate { 2 } else { 0 };
            Ok(Outcome { code, stdout: emit(to_json(&class)?, out.as_deref())? })
        }
        Command::Simulate { config, out, force, summary, seed } => {
            let cfg = RunConfig::load(config)?;
            let block = cfg.simulate.clone().ok_or_else(|| Error::Config("config has no simulate block".into()))?;
            if out.is_none() && !summary {
                return Err(Error::Config("simulate needs --out or --summary".into()));
            }
            let seed = seed.unwrap_or(block.seed);
            let grid = block.grid.points()?;
            let sim = Simulator::new(&cfg.spec(), &grid, &block.trunc, &SimOptions { force: *force, ..Default::default() })?;
            let paths = sim.replicas(seed, block.replicas.max(1))?;
            if let Some(p) = out {
                paths[0].write_csv(p)?;
                std::fs::write(sidecar_path(p), to_json(&sim.meta(&paths[0]))?.as_bytes())?;
            }
            let stdout = if *summary {
                let means: Vec<f64> = paths.iter().map(|p| mean(&p.values)).collect();
                let n = means.len() as f64;
                let se = if means.len() > 1 { (variance(&means) / n).sqrt() } else { f64::NAN };
                let s = SimulationSummary {
                    replicas: paths.len() as u64,
                    seed,
                    mean: mean(&means),
                    stderr: se,
                    mean_x1: mean(&paths.iter().map(|p| mean(&p.x1)).collect::<Vec<_>>()),
                    trunc: *sim.trunc(),
                    trunc_error_bound: sim.error_bound().total,
                };
                to_json(&s)?
            } else {
                String::new()
            };
            Ok(Outcome { code: 0, stdout })
        }
        Command::Diagnose { config, out, force, seed } => {
            let cfg = RunConfig::load(config)?;
            let d = cfg.diagnose.clone().ok_or_else(|| Error::Config("config has no diagnose block".into()))?;
            let seed = seed.unwrap_or(d.seed);
            let spec = cfg.spec();
            let opts = DiagOptions { force: *force, quad: d.quad.clone(), bootstrap: d.bootstrap, sup_grid: d.sup_grid };
            let (json, code) = match d.experiment {
                Experiment::SupDivergence => {
                    let r = sup_divergence_experiment(&spec, d.h, &d.ladder, d.replicas, seed, &d.trunc, &opts)?;
                    (to_json(&r)?, 0)
                }
                Experiment::IncrementTailScaling => {
                    let y = d.y.ok_or_else(|| Error::Config("increment_tail_scaling needs y".into()))?;
                    let r = increment_tail_scaling(&spec, d.alpha, y, &d.t_grid, d.replicas, seed, &d.trunc, &opts)?;
                    let code = if r.status == FitStatus::Indeterminate { 2 } else { 0 };
                    (to_json(&r)?, code)
                }
                Experiment::MomentScaling => {
                    let r = moment_scaling(&spec, d.alpha, &d.t_grid, d.replicas, seed, &d.trunc, &opts)?;
                    let code = if r.status == FitStatus::Indeterminate { 2 } else { 0 };
                    (to_json(&r)?, code)
                }
                Experiment::HolderEstimate => {
                    let grid = d.grid.ok_or_else(|| Error::Config("holder_estimate needs grid".into()))?.points()?;
                    let path = Simulator::new(&spec, &grid, &d.trunc, &SimOptions { force: *force, quad: d.quad.clone() })?.path(seed, 0)?;
                    let h = holder_estimate(&path)?;
                    (to_json(&serde_json::json!({ "experiment": "holder_estimate", "seed": seed, "exponent": h }))?, 0)
                }
            };
            Ok(Outcome { code, stdout: emit(json, out.as_deref())? })
        }
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(o) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(o.stdout.as_bytes()).is_err() {
                return 1;
            }
            o.code
        }
        Err(e) => {
            eprintln!("mma: {e}");
            exit_code(&e)
        }
    }
}
