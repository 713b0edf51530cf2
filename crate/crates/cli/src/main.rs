//! `mvts`: run seeded bandit experiments and render their regret curves.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mvts::environment::{format_truth_table, portfolio_truths};
use mvts::harness::output::{
    aggregate_records, emit_plot_data, plot_data, provenance_lines, read_csv_file, render_svg,
    sidecar_path, write_csv_file,
};
use mvts::harness::{threads_from_env, Experiment, ExperimentConfig, ExperimentResult};
use mvts::{Error, NoiseKind, Result};

const RECORDS: &str = "records.csv";
const PLOT: &str = "regret.dat";
const SUMMARY: &str = "summary.txt";
const DUMP: &str = "posterior_dump.jsonl";

#[derive(Parser)]
#[command(
    name = "mvts",
    version,
    about = "Mean-variance contextual bandit simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write records, plot data, and metadata.
    Run {
        /// Experiment config file (`key = value` lines).
        #[arg(long)]
        config: PathBuf,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
    },
    /// Rebuild regret curves from a previous run's records.
    Plot {
        /// Directory written by `run`.
        #[arg(long = "in")]
        input: PathBuf,
        /// Output file; `.svg` renders a chart, anything else writes plot data.
        #[arg(long)]
        out: PathBuf,
    },
    /// Show the built-in portfolio truth table.
    Truths {
        #[arg(long, required = true)]
        print: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, out } => run(&config, &out),
        Command::Plot { input, out } => plot(&input, &out),
        Command::Truths { .. } => {
            print!(
                "{}",
                format_truth_table(&portfolio_truths(NoiseKind::Gaussian))
            );
            Ok(())
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mvts: error: {}", e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}

fn run(config_path: &Path, out: &Path) -> Result<()> {
    let config = ExperimentConfig::from_file(config_path)?;
    let experiment = Experiment::new(config)?;
    let threads = threads_from_env()?;
    let result = experiment.run_with_threads(threads)?;

    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let config = experiment.config();
    let preamble = provenance_lines(config, experiment.policies());
    write_csv_file(&out.join(RECORDS), &preamble, result.records())?;
    emit_plot_data(
        &result.aggregate,
        config,
        experiment.policies(),
        &out.join(PLOT),
    )?;
    write_file(&out.join(SUMMARY), &summary(&result))?;
    if config.debug_dump {
        write_file(&out.join(DUMP), &posterior_dump(&result))?;
    }
    print!("{}", summary(&result));
    Ok(())
}

fn plot(input: &Path, out: &Path) -> Result<()> {
    let records = read_csv_file(&input.join(RECORDS))?;
    let aggregate = aggregate_records(&records)?;
    if out
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("svg"))
    {
        let title = format!("mean cumulative regret ({})", input.display());
        return write_file(out, &render_svg(&aggregate, &title));
    }
    let meta = sidecar_path(&input.join(PLOT));
    if meta.exists() {
        let config = ExperimentConfig::from_file(&meta)?;
        let policies = config.resolve_policies()?;
        emit_plot_data(&aggregate, &config, &policies, out)
    } else {
        write_file(out, &plot_data(&aggregate))
    }
}

fn summary(result: &ExperimentResult) -> String {
    let agg = &result.aggregate;
    let mut out = format!(
        "replications {}, horizon {}\npolicy mean_total_regret std_error\n",
        result.replications.len(),
        agg.horizon()
    );
    for &p in &agg.policies {
        let _ = writeln!(
            out,
            "{p} {:.6} {:.6}",
            agg.mean_total(p).unwrap_or(0.0),
            agg.total_std_error(p).unwrap_or(0.0)
        );
    }
    out
}

fn posterior_dump(result: &ExperimentResult) -> String {
    let mut out = String::new();
    for rep in &result.replications {
        for run in &rep.runs {
            for state in &run.snapshot {
                let _ = writeln!(
                    out,
                    "{{\"replication\":{},\"policy\":\"{}\",\"state\":{state}}}",
                    rep.replication, run.policy
                );
            }
        }
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}
