//! Run the weighted-MMSE baseline and the proposed pipeline on identical
//! channels and compare the jamming power each can resist.
//!
//! Run with `cargo run --release --example wmmse_baseline`.

use ajbf::ao::{alternate_with_q_search, AoAjhbfScheme, AoConfig};
use ajbf::channel::synthesize_channel;
use ajbf::priors::{build_priors, EstimationConfig, PriorStreams};
use ajbf::scene::{generate_scenario, ScenarioConfig};
use ajbf::wmmse::{wmmse_inner, WmmseConfig, WmmseScheme};
use ajbf::tx::mrt_precoders;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ajbf::Result<()> {
    let cfg = ScenarioConfig::desk();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let scenario = generate_scenario(&cfg, &mut rng)?;
    let (geometry, channels) = synthesize_channel(&scenario, &mut rng)?;
    let est = EstimationConfig { n_stat: 100, ..EstimationConfig::default() };
    let priors = build_priors(&scenario, &geometry, &channels, &est, &mut PriorStreams::from_seed(2))?;

    // One inner solve: the block-coordinate descent potential must fall.
    let f0 = mrt_precoders(&priors)?;
    let (_, _, diag) = wmmse_inner(&priors, &f0, 0.01, &WmmseConfig::default())?;
    println!(
        "inner solve at q = 0.01 W: potential {:.5} -> {:.5} in {} iterations (converged: {})",
        diag.potential.first().unwrap(),
        diag.potential.last().unwrap(),
        diag.iterations,
        diag.converged
    );
    println!("potential non-increasing: {}",
        diag.potential.windows(2).all(|w| w[1] <= w[0] + 1e-9));

    // Same outer driver, both schemes, identical priors: a paired trial.
    let ao_cfg = AoConfig::default();
    let mut wmmse = WmmseScheme::for_scenario(&cfg);
    let base = alternate_with_q_search(&priors, &mut wmmse, &ao_cfg)?;
    let mut proposed = AoAjhbfScheme::for_scenario(&cfg);
    let ours = alternate_with_q_search(&priors, &mut proposed, &ao_cfg)?;

    println!("\nresistible jamming power per jammer on the same channels:");
    println!("  wmmse baseline: {:8.4} W", base.search.q_watts);
    println!("  proposed:       {:8.4} W", ours.search.q_watts);
    println!(
        "  proposed / baseline: {:.2}x",
        ours.search.q_watts / base.search.q_watts.max(1e-30)
    );
    Ok(())
}
