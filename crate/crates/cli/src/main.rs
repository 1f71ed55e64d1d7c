use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use nodal_core::harness::{emit, run_experiment, ExperimentConfig, Format, EXPERIMENTS};
use nodal_core::par::default_workers;

/// Run one named experiment and write its report.
///
/// Exit status: 0 when every check passes, 1 when a check fails,
/// 2 on a usage, configuration or I/O error.
#[derive(Parser, Debug)]
#[command(name = "nodal-lab", version, about)]
struct Args {
    /// Experiment name; `list` prints the available ones. May be omitted
    /// when the config file names the experiment.
    experiment: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Key-value config file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
    /// Worker threads; 0 means all available cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Do not print the check summary.
    #[arg(long, short)]
    quiet: bool,
}

fn run(args: Args) -> nodal_core::Result<bool> {
    if args.experiment.as_deref() == Some("list") {
        for e in EXPERIMENTS {
            println!("{e}");
        }
        return Ok(true);
    }
    let mut cfg = match (&args.config, &args.experiment) {
        (Some(path), e) => {
            let c = ExperimentConfig::from_file(path, e.as_deref())?;
            if let Some(e) = e {
                if *e != c.experiment {
                    return Err(nodal_core::Error::Config(format!(
                        "experiment `{e}` on the command line but `{}` in {}",
                        c.experiment,
                        path.display()
                    )));
                }
            }
            c
        }
        (None, Some(e)) => ExperimentConfig::new(e)?,
        (None, None) => return Err(nodal_core::Error::Config("no experiment given (try `nodal-lab list`)".into())),
    };
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(p) = args.p {
        cfg.p = p;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.master_seed = s;
    }
    if let Some(w) = args.workers {
        cfg.workers = if w == 0 { default_workers() } else { w };
    }
    let format: Format = args.format.parse()?;
    let report = run_experiment(&cfg)?;
    let files = emit(&report, format, &args.out)?;
    if !args.quiet {
        print!("{}", report.summary());
        for f in files {
            println!("  wrote {}", f.display());
        }
    }
    Ok(report.pass)
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("nodal-lab: {e}");
            ExitCode::from(2)
        }
    }
}
