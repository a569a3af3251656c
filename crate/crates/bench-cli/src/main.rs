use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;
use zomirror::bench::{run_bench, BenchSpec, Suite};
use zomirror::checks::{run_group, Group};
use zomirror::config::{ConfigError, ExperimentConfig};
use zomirror::output::{objective_column, svg_curve, write_atomic};
use zomirror::runner::run_experiment;

const EXIT_CONFIG: u8 = 1;
const EXIT_CHECK: u8 = 2;
const EXIT_DIVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "zomirror", version, about = "Zeroth-order mirror descent experiments")]
struct Cli {
    /// Overrides the seed list of a config (also settable via ZOMIRROR_SEED).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for `bench` (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML file.
    Run { config: PathBuf },
    /// Numerical self-checks of the building blocks.
    Verify {
        #[arg(long, value_enum, value_delimiter = ',')]
        only: Vec<Group>,
    },
    /// Stepsize-grid comparison of the three methods.
    Bench {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
        #[arg(long)]
        seeds: Option<usize>,
        /// Dimension of the quadratic suite.
        #[arg(long, default_value_t = 1000)]
        dim: usize,
    },
    /// Render the objective column of a trace CSV.
    Svg { csv: PathBuf, out: PathBuf },
}

fn cmd_run(path: &Path, seed: Option<u64>) -> anyhow::Result<ExitCode> {
    let mut cfg = match ExperimentConfig::load(path).and_then(|mut c| {
        c.apply_seed_env()?;
        Ok(c)
    }) {
        Ok(c) => c,
        Err(e) => return config_failure(e),
    };
    if let Some(s) = seed {
        cfg.seeds = vec![s];
    }
    if let Err(e) = cfg.validate() {
        return config_failure(e);
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let outcome = run_experiment(&cfg, base)?;
    println!("wrote {}", outcome.summary_path.display());
    let diverged = outcome.diverged();
    if diverged > 0 {
        error!("{diverged} run(s) diverged");
        return Ok(ExitCode::from(EXIT_DIVERGED));
    }
    Ok(ExitCode::SUCCESS)
}

fn config_failure(e: ConfigError) -> anyhow::Result<ExitCode> {
    eprintln!("config error: {e}");
    Ok(ExitCode::from(EXIT_CONFIG))
}

fn cmd_verify(only: &[Group]) -> ExitCode {
    let groups = if only.is_empty() { Group::ALL.to_vec() } else { only.to_vec() };
    let mut failed = 0;
    for g in groups {
        for check in run_group(g) {
            println!("{check}");
            failed += usize::from(!check.passed());
        }
    }
    if failed > 0 {
        eprintln!("{failed} check(s) failed");
        ExitCode::from(EXIT_CHECK)
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_bench(suite: Suite, out: &Path, seeds: Option<usize>, dim: usize, threads: usize) -> anyhow::Result<ExitCode> {
    let spec = match suite {
        Suite::Quadratic => BenchSpec::quadratic(dim, seeds.unwrap_or(10)),
        Suite::Explain => BenchSpec::explain(seeds.unwrap_or(5)),
    };
    let report = run_bench(&spec, threads)?;
    print!("{}", report.ranking_table());
    if let Some(t) = report.trend() {
        let (l1, l2) = t.advantage();
        println!(
            "{} vs {}: stationarity l1 {:.4e} vs {:.4e} ({l1:.2}x), l2 {:.4e} vs {:.4e} ({l2:.2}x)",
            t.expmd, t.psgd, t.expmd_l1, t.psgd_l1, t.expmd_l2, t.psgd_l2
        );
    }
    report.write(out)?;
    println!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_svg(csv: &Path, out: &Path) -> anyhow::Result<ExitCode> {
    let text = std::fs::read_to_string(csv)?;
    let values = objective_column(&text).map_err(|e| anyhow::anyhow!("{}: {e}", csv.display()))?;
    let title = csv.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    write_atomic(out, svg_curve(&title, &values).as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config } => cmd_run(config, cli.seed),
        Command::Verify { only } => Ok(cmd_verify(only)),
        Command::Bench { suite, out, seeds, dim } => cmd_bench(*suite, out, *seeds, *dim, cli.threads),
        Command::Svg { csv, out } => cmd_svg(csv, out),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}
