use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rsqueue::harness::{
    fit_all, ladder_checks, parse_records_csv, run_experiment, write_replication, ExperimentConfig, ExperimentKind,
};
use rsqueue::Error;

#[derive(Parser)]
#[command(name = "rsqueue", version, about = "Transitory queue simulation and coupling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML experiment description
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory (overrides the config)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the queue only
    Simulate,
    /// Coupled ladder; also writes every path of replication 0 at the first ladder size
    Couple,
    /// Run the config exactly as given
    Ladder,
    /// Monte Carlo checks of the tail bounds
    ValidateBounds,
    /// Fit error rates from an existing records file
    FitRate {
        #[arg(long)]
        records: PathBuf,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(o) = &common.out {
        cfg.out = o.clone();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool, Error> {
    let mut cfg = load(&cli.common)?;
    if let Some(j) = cli.common.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Error::Resource(e.to_string()))?;
    }
    match cli.command {
        Command::FitRate { records } => {
            let text = std::fs::read_to_string(&records).map_err(|e| Error::Io {
                path: records.clone(),
                source: e,
            })?;
            let recs = parse_records_csv(&text)?;
            let fits = fit_all(&cfg, &recs)?;
            for f in &fits {
                println!(
                    "{} {} slope {:.4} stderr {:.4} points {}",
                    f.metric.name(),
                    f.correction,
                    f.fit.slope,
                    f.fit.stderr,
                    f.fit.points
                );
            }
            let checks = ladder_checks(&recs, &fits);
            for c in &checks {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            return Ok(checks.iter().all(|c| c.pass));
        }
        Command::Simulate => cfg.kind = ExperimentKind::SimulateOnly,
        Command::ValidateBounds => cfg.kind = ExperimentKind::ValidateBounds,
        Command::Couple => {
            if !cfg.kind.is_coupling() {
                cfg.kind = ExperimentKind::CoupleAll;
            }
            let n = cfg.ladder[0];
            write_replication(&cfg, n, 0, &cfg.out.join(format!("replication_n{n}")))?;
        }
        Command::Ladder => {}
    }
    let report = run_experiment(&cfg)?;
    print!("{}", report.summary);
    Ok(report.all_pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ (Error::Parse(_) | Error::Parameter(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
