// Copyright (C) shkd developers
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! Exit codes: 0 success, 1 internal error, 2 invalid scenario or
//! parameters, 3 system failure during a run, 4 a security property failed.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use shkd_core::adversary::{run_attack_suite, Property, SuiteOptions};
use shkd_core::bench::{self, BenchParams};
use shkd_core::sim;
use shkd_core::Error;

use crate::config::{ConfigError, ScenarioConfig};
use crate::output;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_SYSTEM_FAILED: i32 = 3;
pub const EXIT_PROPERTY_FAILED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "shkd", version, about = "Self-healing session key distribution: simulate, attack, bench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario and write run_report.csv, sessions.csv, storage.csv and summary.txt.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// seed.<chain|beta|vectors|loss>=N, repeatable.
        #[arg(long = "override", value_name = "seed.NAME=N")]
        overrides: Vec<String>,
    },
    /// Run a scenario, then the attack experiments on its transcript; writes verdicts.csv.
    Attack {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = PropertyArg::All)]
        property: PropertyArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "override", value_name = "seed.NAME=N")]
        overrides: Vec<String>,
        /// Harness self-test: lets the adversary predict β values.
        #[arg(long, hide = true)]
        remove_beta_blocker: bool,
    },
    /// Evaluate the six-scheme overhead table and write it as CSV.
    Bench {
        #[arg(long, default_value_t = 100)]
        m: u64,
        #[arg(long, default_value_t = 67)]
        q: u64,
        #[arg(long)]
        t: u64,
        #[arg(long, default_value_t = 50)]
        j: u64,
        /// Life-cycle length k_i; defaults to m.
        #[arg(long)]
        k: Option<u64>,
        /// Revealed shares T_j; defaults to t.
        #[arg(long)]
        tj: Option<u64>,
        /// Only communication and computation rows.
        #[arg(long)]
        comparison: bool,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PropertyArg {
    Forward,
    Backward,
    Collusion,
    Revocation,
    All,
}

impl PropertyArg {
    fn properties(self) -> Vec<Property> {
        match self {
            PropertyArg::All => Property::ALL.to_vec(),
            PropertyArg::Forward => vec![Property::Forward],
            PropertyArg::Backward => vec![Property::Backward],
            PropertyArg::Collusion => vec![Property::Collusion],
            PropertyArg::Revocation => vec![Property::Revocation],
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::new(EXIT_INVALID, e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ScenarioInvalid(_) | Error::InvalidParameter(_) | Error::Config(_) | Error::NotPrime(_) => {
                EXIT_INVALID
            }
            _ => EXIT_INTERNAL,
        };
        Failure::new(code, e.to_string())
    }
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::new(EXIT_INTERNAL, format!("{}: {e}", path.display()))
}

fn load(path: &Path, overrides: &[String]) -> Result<(ScenarioConfig, sim::Scenario), Failure> {
    let mut cfg = ScenarioConfig::load(path)?;
    for o in overrides {
        cfg.apply_override(o)?;
    }
    let sc = cfg.to_scenario()?;
    Ok((cfg, sc))
}

fn simulate(scenario: &Path, out: &Path, overrides: &[String], stdout: &mut dyn Write) -> Result<i32, Failure> {
    let (cfg, sc) = load(scenario, overrides)?;
    let report = sim::run_scenario(&sc)?;
    let rec = bench::reconcile(&report, cfg.threshold())?;
    std::fs::create_dir_all(out).map_err(io(out))?;
    let mut summary = report.render_summary();
    summary.push_str(&format!("reconciliation: {} sessions exact\n", rec.sessions.len()));
    for (name, bytes) in [
        ("run_report.csv", output::outcomes_csv(&report)),
        ("sessions.csv", output::sessions_csv(&report, &rec)),
        ("storage.csv", output::storage_csv(&rec)),
        ("summary.txt", summary.clone().into_bytes()),
    ] {
        let p = out.join(name);
        output::write_atomic(&p, &bytes).map_err(io(&p))?;
    }
    let _ = stdout.write_all(summary.as_bytes());
    Ok(if report.failure.is_some() { EXIT_SYSTEM_FAILED } else { EXIT_OK })
}

fn attack(
    scenario: &Path,
    property: PropertyArg,
    out: &Path,
    overrides: &[String],
    remove_beta_blocker: bool,
    stdout: &mut dyn Write,
) -> Result<i32, Failure> {
    let (_, sc) = load(scenario, overrides)?;
    let exec = sim::execute(&sc)?;
    let opts = SuiteOptions { properties: property.properties(), remove_beta_blocker, ..SuiteOptions::default() };
    let report = run_attack_suite(exec.transcript(), &opts)?;
    std::fs::create_dir_all(out).map_err(io(out))?;
    let p = out.join("verdicts.csv");
    output::write_atomic(&p, &output::verdicts_csv(&report)).map_err(io(&p))?;
    let _ = stdout.write_all(report.render().as_bytes());
    Ok(if report.all_passed() { EXIT_OK } else { EXIT_PROPERTY_FAILED })
}

fn bench_cmd(
    params: BenchParams,
    comparison: bool,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<i32, Failure> {
    let mut rows = bench::overhead_rows(&params)?;
    if comparison {
        rows.retain(|r| r.metric != bench::Metric::Storage);
    }
    let bytes = output::bench_csv(&rows);
    match out {
        Some(p) => output::write_atomic(p, &bytes).map_err(io(p))?,
        None => stdout.write_all(&bytes).map_err(io(Path::new("<stdout>")))?,
    }
    Ok(EXIT_OK)
}

/// Runs one invocation and returns its exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Simulate { scenario, out, overrides } => simulate(&scenario, &out, &overrides, stdout),
        Command::Attack { scenario, property, out, overrides, remove_beta_blocker } => {
            attack(&scenario, property, &out, &overrides, remove_beta_blocker, stdout)
        }
        Command::Bench { m, q, t, j, k, tj, comparison, out } => {
            let params = BenchParams { m, q, t, j, k_i: k.unwrap_or(m), t_j: tj.unwrap_or(t) };
            bench_cmd(params, comparison, out.as_deref(), stdout)
        }
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}
