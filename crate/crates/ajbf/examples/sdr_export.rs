//! Export the fixed-receiver feasibility problem as a text bundle a
//! semidefinite-relaxation solver can consume, and verify the round trip.
//!
//! Run with `cargo run --release --example sdr_export`.

use std::io::BufReader;

use ajbf::ao::{ao_ajhbf, AoAjhbfScheme, AoConfig};
use ajbf::channel::synthesize_channel;
use ajbf::priors::{build_priors, EstimationConfig, PriorStreams};
use ajbf::scene::{generate_scenario, LargeScaleModel, ScenarioConfig};
use ajbf::sdr::{build_sdr_export, read_sdr, write_sdr};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ajbf::Result<()> {
    // Small dimensions keep the export readable.
    let cfg = ScenarioConfig {
        aps: 2,
        ues: 2,
        jammers: 1,
        ap_antennas: 4,
        ap_rf_chains: 2,
        ue_antennas: 2,
        ue_rf_chains: 1,
        jammer_antennas: 2,
        ue_paths: 2,
        jammer_paths: 2,
        p_max_watts: 4.0,
        noise_watts: 1e-3,
        large_scale: LargeScaleModel::Fixed { gain: 1e-2 },
        ..ScenarioConfig::desk()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let scenario = generate_scenario(&cfg, &mut rng)?;
    let (geometry, channels) = synthesize_channel(&scenario, &mut rng)?;
    let est = EstimationConfig { n_stat: 20, tau_p: 2.0, ..EstimationConfig::default() };
    let priors = build_priors(&scenario, &geometry, &channels, &est, &mut PriorStreams::from_seed(9))?;

    // Fix the receivers at the pipeline's answer, then export.
    let mut scheme = AoAjhbfScheme::for_scenario(&cfg);
    let outcome = ao_ajhbf(&priors, &mut scheme, &AoConfig::default())?;
    let export = build_sdr_export(&priors, &outcome.state.combiners);

    println!("export dimension: {} (APs x antennas)", export.dim());
    println!("sensing matrices: {} of {}x{}, all rank one",
        export.d.len(), export.d[0].nrows(), export.d[0].ncols());
    for k in 0..export.ues {
        println!(
            "  UE {k}: zeta(q) = {:.3e} * q + {:.3e} + {:.3e} (jamming, bounds, noise)",
            export.zeta_jam_per_watt[k], export.zeta_bounds[k], export.noise_watts
        );
    }

    let mut bytes = Vec::new();
    write_sdr(&export, &mut bytes)?;
    println!("\nserialized to {} bytes; first lines:", bytes.len());
    for line in String::from_utf8_lossy(&bytes).lines().take(4) {
        let shown: String = line.chars().take(90).collect();
        println!("  {shown}");
    }

    let back = read_sdr(BufReader::new(bytes.as_slice()))?;
    let bit_exact = back
        .d
        .iter()
        .zip(&export.d)
        .all(|(a, b)| a.iter().zip(b.iter()).all(|(x, y)| {
            x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()
        }));
    println!("\nround trip bit-exact: {bit_exact}");

    // The export reproduces the solver's own SINR bound.
    let q = outcome.search.q_watts;
    for k in 0..export.ues {
        println!(
            "UE {k} SINR at q = {q:.3} W via export: {:.6}",
            export.sinr_at(&outcome.state.precoders, k, q)
        );
    }
    Ok(())
}
