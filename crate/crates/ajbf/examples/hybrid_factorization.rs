//! Factor fully digital beamformers into a unit-modulus phase-shifter
//! network and a small digital stage, and show when the split is exact.
//!
//! Run with `cargo run --release --example hybrid_factorization`.

use ajbf::hybrid::{factorize, phase_split, HybridConfig};
use ajbf::linalg::{cn_matrix, cn_vector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ajbf::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = HybridConfig::default();

    // A single vector always splits into exactly two phase columns.
    let v = cn_vector(&mut rng, 8, 1.0);
    let (u1, u2, scale) = phase_split(&v);
    let err = (&v - (&u1 + &u2).scale(scale)).norm();
    println!("two-phase split of one 8-vector: residual {err:.2e} (scale {scale:.4})");

    // A 16x4 matrix (four users) under increasing RF chain counts: the
    // residual falls monotonically and hits zero at chains = 2 x columns.
    let target = cn_matrix(&mut rng, 16, 4, 1.0);
    let norm = target.norm();
    println!("\n16x4 fully digital target, per RF chain count:");
    println!("{:>7} | {:>12} | alternations", "chains", "residual");
    for chains in [4usize, 5, 6, 8] {
        let fac = factorize(&target, chains, &cfg)?;
        println!("{chains:>7} | {:>12.3e} | {}", fac.residual / norm, fac.trace.len());
        assert!(fac.rf.iter().all(|e| (e.norm() - 1.0).abs() < 1e-12), "non-unit phase entry");
    }

    let exact = factorize(&target, 8, &cfg)?;
    println!("\nchains = 2 x columns is exact: relative residual {:.2e}", exact.residual / norm);
    println!("analog stage {}x{}, digital stage {}x{}",
        exact.rf.nrows(), exact.rf.ncols(), exact.bb.nrows(), exact.bb.ncols());

    // The alternation never increases the residual.
    let fac = factorize(&target, 5, &cfg)?;
    let monotone = fac.trace.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    println!("\nresidual trace at 5 chains: {:?}", fac
        .trace
        .iter()
        .map(|r| (r / norm * 1e4).round() / 1e4)
        .collect::<Vec<_>>());
    println!("monotone non-increasing: {monotone}");
    Ok(())
}
