//! Generate a scenario and one set of channel matrices, then report node
//! placement, link dimensions, and power statistics.
//!
//! Run with `cargo run --release --example channel_model`.

use ajbf::channel::{synthesize_channel, write_channel_csv};
use ajbf::scene::{generate_scenario, ScenarioConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ajbf::Result<()> {
    let cfg = ScenarioConfig::desk();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let scenario = generate_scenario(&cfg, &mut rng)?;

    println!(
        "scenario: {} APs x {} antennas, {} UEs x {} antennas, {} jammers x {} antennas",
        cfg.aps, cfg.ap_antennas, cfg.ues, cfg.ue_antennas, cfg.jammers, cfg.jammer_antennas
    );
    for (l, ap) in scenario.aps.iter().enumerate() {
        let p = ap.position;
        println!("  AP {l} at ({:6.1}, {:6.1}, {:6.1}) m", p.x, p.y, p.z);
    }
    for (k, ue) in scenario.ues.iter().enumerate() {
        let p = ue.position;
        println!("  UE {k} at ({:6.1}, {:6.1}, {:6.1}) m", p.x, p.y, p.z);
    }

    let (geometry, channels) = synthesize_channel(&scenario, &mut rng)?;
    println!(
        "\nserving channel H[0][0]: {} x {} ({} paths per link)",
        channels.h[0][0].nrows(),
        channels.h[0][0].ncols(),
        cfg.ue_paths
    );
    println!(
        "jamming channel J[0][0]: {} x {} ({} paths per link)",
        channels.j[0][0].nrows(),
        channels.j[0][0].ncols(),
        cfg.jammer_paths
    );

    // Per-link Frobenius power against the drawn large-scale gain. With
    // P paths of unit-variance gains the expected ratio is P * M_U * M.
    println!("\nlink power / large-scale gain (expect approx paths x rx x tx antennas = {}):",
        cfg.ue_paths * cfg.ue_antennas * cfg.ap_antennas);
    for l in 0..cfg.aps {
        for k in 0..cfg.ues.min(3) {
            let power = channels.h[l][k].norm_squared();
            let beta = geometry.ap_ue[l][k].large_scale;
            println!("  AP {l} -> UE {k}: {:10.1}", power / beta);
        }
    }

    // The full dump round-trips through a documented CSV layout; show the
    // first lines here.
    let mut dump = Vec::new();
    write_channel_csv(&channels, &mut dump)?;
    let text = String::from_utf8_lossy(&dump);
    println!("\nchannel CSV dump starts with:");
    for line in text.lines().take(3) {
        let shown: String = line.chars().take(100).collect();
        println!("  {shown}...");
    }
    println!("({} bytes total)", dump.len());
    Ok(())
}
