//! Design quotient-optimal receive combiners and show how the guaranteed
//! SINR degrades as the jamming power grows.
//!
//! Run with `cargo run --release --example grq_receiver`.

use ajbf::channel::synthesize_channel;
use ajbf::priors::{build_priors, EstimationConfig, PriorStreams};
use ajbf::rx::receivers_for_all;
use ajbf::scene::{generate_scenario, ScenarioConfig};
use ajbf::tx::mrt_precoders;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ajbf::Result<()> {
    let cfg = ScenarioConfig::desk();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let scenario = generate_scenario(&cfg, &mut rng)?;
    let (geometry, channels) = synthesize_channel(&scenario, &mut rng)?;
    let est = EstimationConfig { n_stat: 100, ..EstimationConfig::default() };
    let priors = build_priors(&scenario, &geometry, &channels, &est, &mut PriorStreams::from_seed(11))?;

    // Fixed matched-filter precoders; only the receivers adapt here.
    let precoders = mrt_precoders(&priors)?;

    println!("minimum guaranteed SINR across users, per jamming power:");
    println!("{:>14} | {:>10} | per-user SINR (dB)", "q per jammer", "min (dB)");
    for &q in &[0.0, 1e-3, 1e-2, 1e-1, 1.0, 10.0] {
        let (_, xis) = receivers_for_all(&priors, &precoders, q)?;
        let min_db = 10.0 * xis.iter().cloned().fold(f64::INFINITY, f64::min).log10();
        let all: Vec<String> = xis.iter().map(|x| format!("{:6.1}", 10.0 * x.log10())).collect();
        println!("{q:>12} W | {min_db:>10.2} | {}", all.join(" "));
    }

    // The combiner is the normalized solution of a Hermitian system; its
    // quotient dominates any fixed probe direction.
    let q = 0.1;
    let (ws, xis) = receivers_for_all(&priors, &precoders, q)?;
    println!("\nat q = {q} W: combiner norms all 1: {}",
        ws.iter().all(|w| (w.norm() - 1.0).abs() < 1e-12));
    println!("guaranteed SINR of UE 0: {:.4} ({:.2} dB)", xis[0], 10.0 * xis[0].log10());
    Ok(())
}
