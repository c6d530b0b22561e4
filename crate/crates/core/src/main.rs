//! Command-line front end: certify damping specs, run scenarios, sweep the
//! damping constant, explore the K = 3 limit, compare against the fixed-step
//! oracle, and run the bundled acceptance suite.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};

use vdflow::harness::{
    compare_oracle, explore_limit_case, load_bundled, run_scenario, sweep_k, DampingDescriptor,
    ScenarioConfig,
};

#[derive(Parser)]
#[command(
    name = "vdflow",
    version,
    about = "Simulate x'' + gamma(t) x' + grad Phi(x) = 0 with vanishing damping and verify \
             its energy decay and convergence properties"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Certify a damping spec (JSON file with kind/K/..., optional t0)
    Certify {
        damping: PathBuf,
        /// Domain start; overrides a "t0" key in the file
        #[arg(long)]
        t0: Option<f64>,
    },
    /// Run a scenario (JSON path or bundled id) and persist artifacts
    Run {
        scenario: String,
        /// Overrides the config's out_dir; default "out"
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the base scenario once per damping constant K
    Sweep {
        scenario: String,
        /// Comma-separated list, e.g. --K 3.5,4,6,10
        #[arg(long = "K", value_delimiter = ',', required = true)]
        k: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exploratory run with K = 3 exactly
    LimitK3 {
        scenario: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sup-norm discrepancy between the adaptive and fixed-step integrators
    Oracle {
        scenario: String,
        #[arg(long, default_value_t = 1e-5)]
        h: f64,
    },
    /// Run the bundled acceptance suite
    Selftest,
}

/// A scenario argument is a file path or a bundled id.
fn resolve_scenario(arg: &str) -> Result<ScenarioConfig> {
    let path = Path::new(arg);
    if path.exists() {
        return ScenarioConfig::load(path).map_err(|e| anyhow!(e));
    }
    match load_bundled(arg) {
        Some(cfg) => cfg.map_err(|e| anyhow!(e)),
        None => Err(anyhow!(
            "{arg}: no such file or bundled scenario (bundled: {})",
            vdflow::harness::bundled_ids().join(", ")
        )),
    }
}

fn certify(path: &Path, t0_flag: Option<f64>) -> Result<i32> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut value: serde_json::Value = serde_json::from_str(&text)?;
    let t0_file = value
        .as_object_mut()
        .and_then(|m| m.remove("t0"))
        .and_then(|v| v.as_f64());
    let t0 = t0_flag.or(t0_file).unwrap_or(1.0);
    let descriptor: DampingDescriptor = serde_json::from_value(value)?;
    let spec = descriptor.build(t0)?;
    let cert = spec.certify()?;
    println!("{}", serde_json::to_string_pretty(&cert)?);
    Ok(0)
}

/// CLI --out wins, then the config's out_dir, then "./out".
fn effective_out(flag: Option<PathBuf>, cfg: &ScenarioConfig) -> PathBuf {
    flag.or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn real_main() -> Result<i32> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Certify { damping, t0 } => certify(&damping, t0),
        Cmd::Run { scenario, out } => {
            let cfg = resolve_scenario(&scenario)?;
            let out = effective_out(out, &cfg);
            let outcome = run_scenario(&cfg, Some(&out))?;
            print!("{}", outcome.report.summary());
            println!("artifacts: {}", out.join(&cfg.id).display());
            Ok(outcome.report.exit_code())
        }
        Cmd::Sweep { scenario, k, out } => {
            let cfg = resolve_scenario(&scenario)?;
            let table = sweep_k(&cfg, &k, out.as_deref())?;
            print!("{}", table.to_csv());
            Ok(0)
        }
        Cmd::LimitK3 { scenario, out } => {
            let cfg = resolve_scenario(&scenario)?;
            let out = effective_out(out, &cfg);
            let outcome = explore_limit_case(&cfg, Some(&out))?;
            print!("{}", outcome.report.summary());
            Ok(outcome.report.exit_code())
        }
        Cmd::Oracle { scenario, h } => {
            let cfg = resolve_scenario(&scenario)?;
            let cmp = compare_oracle(&cfg, h)?;
            println!("{}", serde_json::to_string_pretty(&cmp)?);
            Ok(0)
        }
        Cmd::Selftest => Ok(if vdflow::acceptance::run_selftest() {
            0
        } else {
            2
        }),
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
