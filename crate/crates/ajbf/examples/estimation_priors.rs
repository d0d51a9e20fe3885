//! Build the solver-facing priors — quantized channel estimates, error
//! covariances, jamming covariances, and interference power bounds — and
//! check the achieved estimation quality.
//!
//! Run with `cargo run --release --example estimation_priors`.

use ajbf::channel::synthesize_channel;
use ajbf::priors::{build_priors, EstimationConfig, EstimationMode, PriorStreams};
use ajbf::scene::{generate_scenario, ScenarioConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ajbf::Result<()> {
    let cfg = ScenarioConfig::desk();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let scenario = generate_scenario(&cfg, &mut rng)?;
    let (geometry, channels) = synthesize_channel(&scenario, &mut rng)?;

    let est = EstimationConfig { n_stat: 100, ..EstimationConfig::default() };
    let mut streams = PriorStreams::from_seed(7);
    let priors = build_priors(&scenario, &geometry, &channels, &est, &mut streams)?;

    println!(
        "estimation mode {:?}, target NMSE {}, {}-bit quantizer (alpha = {})",
        est.mode,
        est.nmse_target,
        est.quantizer_bits.unwrap(),
        priors.alpha
    );

    // Empirical NMSE of the pre-quantization estimates against the truth.
    let (mut err, mut pow) = (0.0, 0.0);
    for l in 0..cfg.aps {
        for k in 0..cfg.ues {
            err += (&priors.estimates[l][k] - &channels.h[l][k]).norm_squared();
            pow += channels.h[l][k].norm_squared();
        }
    }
    println!("empirical estimate NMSE: {:.4} (target {})", err / pow, est.nmse_target);

    println!("\nper-user interference power bounds:");
    for k in 0..cfg.ues {
        println!(
            "  UE {k}: estimation-error bound {:.3e} W, quantization bound {:.3e} W, omega {:.3e}",
            priors.en_ub(k),
            priors.qe_ub(k),
            priors.omega[k]
        );
    }

    println!("\njamming covariance R[0][0] ({}x{}):", cfg.ue_antennas, cfg.ue_antennas);
    let r = &priors.r_jam[0][0];
    println!("  trace {:.3e}, largest diagonal {:.3e}", r.trace().re,
        (0..r.nrows()).map(|i| r[(i, i)].re).fold(f64::MIN, f64::max));

    // The same channels estimated through a pilot observation and a linear
    // MMSE filter instead of the synthetic error model.
    let est_pilot = EstimationConfig {
        mode: EstimationMode::PilotMmse,
        n_stat: 100,
        ..EstimationConfig::default()
    };
    let mut streams = PriorStreams::from_seed(7);
    let pilot = build_priors(&scenario, &geometry, &channels, &est_pilot, &mut streams)?;
    let (mut err, mut pow) = (0.0, 0.0);
    for l in 0..cfg.aps {
        for k in 0..cfg.ues {
            err += (&pilot.estimates[l][k] - &channels.h[l][k]).norm_squared();
            pow += channels.h[l][k].norm_squared();
        }
    }
    println!(
        "\npilot-MMSE mode: empirical NMSE {:.4} at pilot length {} and power {} W",
        err / pow,
        est_pilot.tau_p,
        est_pilot.rho_p
    );
    Ok(())
}
