//! Thin batch CLI over the `ajbf` library.
//!
//! Subcommands: `run <spec.toml>`, `summarize <results.csv>`,
//! `plot <summary.json>`. The library's `examples/` directory is the richer
//! interactive interface; this binary only drives batch experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ajbf::harness::{
    emit_plots, load_results_csv, run_experiment, summarize, ExperimentSpec, Preset, Summary,
};
use ajbf::{Error, Result};

/// Environment variable consulted for the base seed when `--seed` is absent.
const SEED_ENV: &str = "AJBF_SEED";

#[derive(Parser)]
#[command(
    name = "ajbf",
    version,
    about = "Batch experiments for anti-jamming hybrid beamforming",
    long_about = "Runs seeded Monte Carlo sweeps of the anti-jamming hybrid \
                  beamforming pipeline and its baselines, then aggregates and \
                  charts the resistible jamming-to-signal ratio.\n\
                  Seed precedence: --seed, then the AJBF_SEED environment \
                  variable, then the spec file's base_seed."
)]
struct Cli {
    /// Base seed override (wins over the AJBF_SEED environment variable).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker thread count; results are identical for any value.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for output artifacts.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Scenario preset override: desk | paper.
    #[arg(long, global = true)]
    preset: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML spec file.
    Run { spec_file: PathBuf },
    /// Recompute summary.json from an existing results.csv.
    Summarize { results: PathBuf },
    /// Render SVG charts from an existing summary.json.
    Plot { summary: PathBuf },
}

fn seed_override(flag: Option<u64>) -> Result<Option<u64>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(SEED_ENV) {
        Ok(text) => text
            .parse::<u64>()
            .map(Some)
            .map_err(|e| Error::Parse(format!("{SEED_ENV}={text}: {e}"))),
        Err(_) => Ok(None),
    }
}

/// Output directory for the file-transforming subcommands: the flag if
/// given, otherwise the input file's directory.
fn sibling_out_dir(flag: &Option<PathBuf>, input: &std::path::Path) -> PathBuf {
    flag.clone().unwrap_or_else(|| {
        let parent = input.parent().unwrap_or_else(|| std::path::Path::new("."));
        if parent.as_os_str().is_empty() {
            PathBuf::from(".")
        } else {
            parent.to_path_buf()
        }
    })
}

fn real_main() -> Result<u8> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run { spec_file } => {
            let mut spec = ExperimentSpec::load(spec_file)?;
            if let Some(name) = &cli.preset {
                let preset: Preset = name.parse()?;
                if spec.scenario.is_some() {
                    return Err(Error::Config(
                        "the spec file pins an explicit [scenario] table; --preset cannot override it"
                            .into(),
                    ));
                }
                spec.preset = Some(preset);
            }
            if let Some(seed) = seed_override(cli.seed)? {
                spec.base_seed = seed;
            }
            let report = run_experiment(&spec, cli.threads, cli.out_dir.as_deref())?;
            println!(
                "wrote {} result rows ({} failures) to {}",
                report.records.len(),
                report.failures.len(),
                report.out_dir.display()
            );
            for path in report
                .plots
                .iter()
                .chain([&report.results_csv, &report.summary_json, &report.manifest_json])
            {
                println!("  {}", path.display());
            }
            if report.failure_fraction() > 0.10 {
                eprintln!(
                    "error: {}/{} scheme runs failed (see {})",
                    report.failures.len(),
                    report.scheme_trials,
                    report.failures_csv.display()
                );
                return Ok(2);
            }
            Ok(0)
        }
        Command::Summarize { results } => {
            let records = load_results_csv(results)?;
            let summary = summarize(&records);
            let out_dir = sibling_out_dir(&cli.out_dir, results);
            std::fs::create_dir_all(&out_dir)?;
            let path = out_dir.join("summary.json");
            let mut text = serde_json::to_string_pretty(&summary)
                .map_err(|e| Error::Parse(format!("serializing summary: {e}")))?;
            text.push('\n');
            std::fs::write(&path, text)?;
            println!(
                "summarized {} rows into {} points -> {}",
                records.len(),
                summary.points.len(),
                path.display()
            );
            Ok(0)
        }
        Command::Plot { summary } => {
            let text = std::fs::read_to_string(summary)?;
            let parsed: Summary = serde_json::from_str(&text)
                .map_err(|e| Error::Parse(format!("reading summary: {e}")))?;
            let out_dir = sibling_out_dir(&cli.out_dir, summary);
            let plots = emit_plots(&parsed, &out_dir)?;
            for path in &plots {
                println!("{}", path.display());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
