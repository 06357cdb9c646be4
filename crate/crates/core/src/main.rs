use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use darkwind::sweep::{run, Experiment, RunOptions, SweepConfig};

/// Parameter sweeps for disordered, dissipative qubit-cavity chains.
#[derive(Parser, Debug)]
#[command(name = "darkwind", version)]
struct Cli {
    /// coherence, dos, winding, phase-diagram, boundary, tau or validate
    experiment: String,
    /// JSON sweep configuration
    #[arg(long)]
    config: PathBuf,
    /// Output prefix; writes <prefix>.csv and <prefix>.meta.json
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    workers: Option<usize>,
    /// Base seed, overriding disorder.base_seed
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let Some(experiment) = Experiment::parse(&cli.experiment) else {
        let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
        eprintln!("error: unknown experiment `{}` (expected one of: {})", cli.experiment, names.join(", "));
        return ExitCode::from(1);
    };
    let outcome = SweepConfig::load(&cli.config).and_then(|config| {
        run(
            config,
            &RunOptions {
                experiment: Some(experiment),
                out: cli.out,
                workers: cli.workers,
                seed: cli.seed,
            },
        )
    });
    match outcome {
        Ok(report) => {
            eprintln!("wrote {} and {}", report.csv_path.display(), report.meta_path.display());
            if report.exit_code != 0 {
                eprintln!(
                    "numerical failure in {} cell(s); see the flagged column",
                    report.result.flagged_cells.len().max(1)
                );
            }
            ExitCode::from(report.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
