//! Run the full anti-jamming pipeline: alternate quotient receivers,
//! smoothed max-min precoders, and phase-shifter factorizations around a
//! bracket-and-bisect search for the largest resistible jamming power.
//!
//! Run with `cargo run --release --example ao_pipeline`.

use ajbf::ao::{ao_ajhbf, min_sinr_fixed, AoAjhbfScheme, AoConfig};
use ajbf::channel::synthesize_channel;
use ajbf::harness::jsr_db;
use ajbf::priors::{build_priors, EstimationConfig, PriorStreams};
use ajbf::scene::{generate_scenario, ScenarioConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ajbf::Result<()> {
    let cfg = ScenarioConfig::desk();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let scenario = generate_scenario(&cfg, &mut rng)?;
    let (geometry, channels) = synthesize_channel(&scenario, &mut rng)?;
    let est = EstimationConfig { n_stat: 100, ..EstimationConfig::default() };
    let priors = build_priors(&scenario, &geometry, &channels, &est, &mut PriorStreams::from_seed(1))?;

    let mut scheme = AoAjhbfScheme::for_scenario(&cfg);
    let outcome = ao_ajhbf(&priors, &mut scheme, &AoConfig::default())?;

    println!("resistible jamming power per round (W): {:?}",
        outcome.trace.q_per_round.iter().map(|q| (q * 1e4).round() / 1e4).collect::<Vec<_>>());
    println!("rounds run: {}, converged: {}, rejected updates: {}",
        outcome.trace.rounds_run, outcome.trace.converged, outcome.trace.rejected_updates);
    println!("feasibility evaluations: {}", outcome.trace.evaluations);

    let q = outcome.search.q_watts;
    println!("\nfinal resistible power per jammer: {q:.4} W");
    println!("jamming-to-signal ratio: {:.2} dB", jsr_db(q, cfg.jammers, cfg.p_max_watts));
    println!("minimum SINR bound at that power: {:.4} (threshold {})",
        min_sinr_fixed(&priors, &outcome.state, q), cfg.sinr_threshold);

    let hc = outcome.state.hybrid_combiners.as_ref().unwrap();
    let hp = outcome.state.hybrid_precoders.as_ref().unwrap();
    println!("\nhybrid realization quality:");
    println!("  combiner residuals: {:?}",
        hc.per_ue.iter().map(|f| (f.residual * 1e6).round() / 1e6).collect::<Vec<_>>());
    println!("  per-AP precoder residuals: {:?}",
        hp.per_ap.iter().map(|f| (f.residual * 1e6).round() / 1e6).collect::<Vec<_>>());
    println!("  ascent iterations per round: {:?}",
        scheme.pga_traces.iter().map(|t| t.iterations).collect::<Vec<_>>());
    Ok(())
}
