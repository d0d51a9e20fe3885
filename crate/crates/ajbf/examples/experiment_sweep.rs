//! Run a small batch experiment in-process: a sweep over antennas per AP
//! with paired trials of the proposed scheme and the baseline, producing
//! the same artifacts as the `ajbf run` subcommand.
//!
//! Run with `cargo run --release --example experiment_sweep`.

use ajbf::harness::{
    run_experiment, AoOverrides, ExperimentSpec, Preset, SchemeId, SweepAxis, SweepSpec,
};
use ajbf::priors::EstimationConfig;

fn main() -> ajbf::Result<()> {
    let spec = ExperimentSpec {
        version: 1,
        name: "example-sweep".into(),
        preset: Some(Preset::Desk),
        trials: 4,
        base_seed: 2024,
        schemes: vec![SchemeId::AoAjhbf, SchemeId::Wmmse],
        out_dir: None,
        sweeps: vec![SweepSpec { axis: SweepAxis::MPerAp, values: vec![8.0, 16.0] }],
        scenario: None,
        estimation: Some(EstimationConfig { n_stat: 50, ..EstimationConfig::default() }),
        ao: Some(AoOverrides { rounds: Some(2) }),
        record_runtime: true,
    };

    let out_dir = std::env::temp_dir().join("ajbf-example-sweep");
    let report = run_experiment(&spec, None, Some(&out_dir))?;

    println!(
        "{} scheme runs ({} failed) -> {}",
        report.records.len(),
        report.failures.len(),
        report.out_dir.display()
    );
    println!("\nmean JSR per point:");
    for p in &report.summary.points {
        println!(
            "  {} = {:>5}: {:>16} {:8.2} dB (n = {}, sd {:.2})",
            p.sweep_axis,
            p.sweep_value,
            p.scheme.to_string(),
            p.mean_jsr_db,
            p.trials,
            p.stddev_jsr_db.unwrap_or(0.0)
        );
    }
    println!("\ntrends (mean JSR along the axis):");
    for t in &report.summary.trends {
        println!("  {:>16}: {} (strict: {})", t.scheme.to_string(), t.direction, t.strict);
    }
    println!("\npaired comparisons at each point:");
    for c in &report.summary.comparisons {
        println!(
            "  {} = {:>5}: {} vs {}: {}W/{}T/{}L, p = {:.4}, significant: {}",
            c.sweep_axis,
            c.sweep_value,
            c.scheme,
            c.baseline,
            c.wins,
            c.ties,
            c.losses,
            c.p_value.unwrap_or(1.0),
            c.significant
        );
    }
    println!("\nartifacts:");
    for path in report.plots.iter().chain([&report.results_csv, &report.summary_json]) {
        println!("  {}", path.display());
    }
    Ok(())
}
