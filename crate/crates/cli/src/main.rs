mod check;
mod experiment;
mod report;
mod runspec;
mod sample;
mod table;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use report::{write_json, Check};
use runspec::{RunSpec, SpecError};
use serde_json::json;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "hpk", version, about = "Hua-Pickrell kernels, samplers and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an invariant suite: specfun, opuc, kernels or infinite.
    Check {
        suite: String,
        #[command(flatten)]
        flags: Flags,
    },
    /// Tabulate kernel, weight, vfunction or phi_n on a grid as CSV.
    Table {
        kind: String,
        #[command(flatten)]
        flags: Flags,
    },
    /// Draw configurations into a CSV archive with a JSON sidecar.
    Sample {
        #[command(flatten)]
        flags: Flags,
    },
    /// Redraw the archive recorded by a sidecar.
    Replay {
        sidecar: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run gamma2, gamma1, tails, variance or contraction.
    Experiment {
        name: String,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Args, Debug, Default)]
struct Flags {
    #[arg(long, allow_hyphen_values = true)]
    s: Option<String>,
    #[arg(long = "N")]
    big_n: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<String>,
    #[arg(long = "R", allow_hyphen_values = true)]
    r: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sprime: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// "a:b:count"
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long)]
    jobs: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// spectral or mcmc
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    draws: Option<String>,
    #[arg(long = "M")]
    big_m: Option<String>,
    /// key=value file; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Flags {
    fn into_spec(self, command: &str) -> Result<RunSpec, SpecError> {
        let pairs = [
            ("s", self.s),
            ("N", self.big_n),
            ("n", self.n),
            ("eps", self.eps),
            ("R", self.r),
            ("sigma", self.sigma),
            ("sprime", self.sprime),
            ("seed", self.seed),
            ("grid", self.grid),
            ("jobs", self.jobs),
            ("out", self.out),
            ("method", self.method),
            ("draws", self.draws),
            ("M", self.big_m),
        ];
        let map: BTreeMap<String, String> = pairs
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
            .collect();
        RunSpec::new(command, self.config.as_deref(), map)
    }
}

enum Outcome {
    Pass,
    Fail,
}

fn print_checks(checks: &[Check]) {
    for c in checks {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!("{tag} {}: value {:.3e}, bound {:.3e}", c.name, c.value, c.bound);
    }
}

fn dispatch(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Check { suite, flags } => {
            let spec = flags.into_spec(&format!("check {suite}"))?;
            let plan = check::plan(&suite, &spec)?;
            let out = spec.out_path(&format!("check-{suite}.json"));
            let checks = check::run(&plan)?;
            print_checks(&checks);
            let all = checks.iter().all(|c| c.pass);
            write_json(&out, &spec, json!({"suite": suite, "checks": checks, "all_pass": all}))?;
            Ok(if all { Outcome::Pass } else { Outcome::Fail })
        }
        Command::Table { kind, flags } => {
            let spec = flags.into_spec(&format!("table {kind}"))?;
            let plan = table::plan(&kind, &spec)?;
            let path = table::run(&plan, &spec)?;
            println!("{}", path.display());
            Ok(Outcome::Pass)
        }
        Command::Sample { flags } => {
            let spec = flags.into_spec("sample")?;
            let plan = sample::plan(&spec)?;
            println!("{}", sample::run(&plan, &spec)?);
            Ok(Outcome::Pass)
        }
        Command::Replay { sidecar, out } => {
            let out = out.unwrap_or_else(|| runspec::data_dir().join("replay.csv"));
            sample::replay(&sidecar, &out)?;
            println!("{}", out.display());
            Ok(Outcome::Pass)
        }
        Command::Experiment { name, flags } => {
            let spec = flags.into_spec(&format!("experiment {name}"))?;
            let plan = experiment::plan(&name, &spec)?;
            let out = spec.out_path(&format!("experiment-{name}.json"));
            let report = experiment::run(&plan)?;
            for c in &report.cells {
                let tag = match c.pass {
                    Some(true) => "PASS",
                    Some(false) => "FAIL",
                    None => "INFO",
                };
                println!("{tag} {}: {:.6e}", c.inputs, c.value);
            }
            let pass = report.all_pass();
            write_json(&out, &spec, &report)?;
            Ok(if pass || !plan.asserted() {
                Outcome::Pass
            } else {
                Outcome::Fail
            })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) if e.downcast_ref::<SpecError>().is_some() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
