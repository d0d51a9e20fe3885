//! Shared fixtures and independent oracles for the acceptance suite.

#![allow(dead_code)]

use ajbf::ao::BeamformerState;
use ajbf::channel::synthesize_channel;
use ajbf::linalg::{c, cn01, CMat, CVec};
use ajbf::priors::{build_priors, EstimationConfig, PriorSet, PriorStreams};
use ajbf::scene::{generate_scenario, LargeScaleModel, ScenarioConfig};
use ajbf::tx::{project_per_ap_power, TxObjective};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Small well-conditioned scenario for oracle-driven checks.
pub fn small_config(
    aps: usize,
    ues: usize,
    ap_antennas: usize,
    ue_antennas: usize,
    jammers: usize,
) -> ScenarioConfig {
    ScenarioConfig {
        aps,
        ues,
        jammers,
        ap_antennas,
        ap_rf_chains: ap_antennas.min(4),
        ue_antennas,
        ue_rf_chains: ue_antennas.min(2),
        jammer_antennas: 4,
        ue_paths: 2,
        jammer_paths: 2,
        p_max_watts: 4.0,
        noise_watts: 0.1,
        sinr_threshold: 1.0,
        large_scale: LargeScaleModel::Fixed { gain: 1.0 },
        ..ScenarioConfig::desk()
    }
}

/// Priors for one seeded realization of a scenario.
pub fn priors_for(cfg: &ScenarioConfig, seed: u64, est: &EstimationConfig) -> PriorSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scenario = generate_scenario(cfg, &mut rng).expect("scenario");
    let (geometry, channels) = synthesize_channel(&scenario, &mut rng).expect("channels");
    build_priors(&scenario, &geometry, &channels, est, &mut PriorStreams::from_seed(seed))
        .expect("priors")
}

/// Random unit-norm complex vector.
pub fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    let v = CVec::from_fn(n, |_, _| cn01(rng));
    let norm = v.norm();
    v / c(norm.max(1e-300), 0.0)
}

/// Random beamformer state: unit combiners plus stacked precoders drawn
/// inside the per-AP power region (strictly interior at 90% of the budget).
pub fn random_state(priors: &PriorSet, rng: &mut ChaCha8Rng) -> BeamformerState {
    let combiners: Vec<CVec> =
        (0..priors.ues).map(|_| random_unit(rng, priors.ue_antennas)).collect();
    let dim = priors.aps * priors.ap_antennas;
    let mut precoders: Vec<CVec> = (0..priors.ues).map(|_| CVec::from_fn(dim, |_, _| cn01(rng))).collect();
    project_per_ap_power(&mut precoders, priors.aps, priors.ap_antennas, 0.81 * priors.p_max_watts);
    BeamformerState { combiners, precoders, hybrid_combiners: None, hybrid_precoders: None }
}

/// Central-difference gradient of the smoothed objective, coordinate by
/// coordinate in the complex plane, under the `2 Re<g, u>` convention.
pub fn finite_difference_gradient(obj: &TxObjective, f: &[CVec], h: f64) -> Vec<CVec> {
    let mut out = Vec::with_capacity(f.len());
    for j in 0..f.len() {
        let dim = f[j].len();
        let mut g = CVec::zeros(dim);
        for i in 0..dim {
            let probe = |re: f64, im: f64| {
                let mut fp: Vec<CVec> = f.to_vec();
                fp[j][i] += c(re, im);
                obj.objective(&fp)
            };
            let slope_re = (probe(h, 0.0) - probe(-h, 0.0)) / (2.0 * h);
            let slope_im = (probe(0.0, h) - probe(0.0, -h)) / (2.0 * h);
            g[i] = c(slope_re / 2.0, slope_im / 2.0);
        }
        out.push(g);
    }
    out
}

/// Random Hermitian positive definite matrix `X X^H + ridge I`.
pub fn random_hpd(rng: &mut ChaCha8Rng, n: usize, ridge: f64) -> CMat {
    let x = CMat::from_fn(n, n, |_, _| cn01(rng));
    let mut b = &x * x.adjoint();
    for i in 0..n {
        b[(i, i)] += c(ridge, 0.0);
    }
    ajbf::linalg::hermitianize(&mut b);
    b
}

/// Rayleigh quotient `|w^H a|^2 / (w^H B w)`.
pub fn rayleigh_quotient(a: &CVec, b: &CMat, w: &CVec) -> f64 {
    let num = w.dotc(a).norm_sqr();
    let den = w.dotc(&(b * w)).re;
    num / den
}

/// Hand-built single-user single-antenna prior set with unit channel and
/// unit jamming coupling: the SINR bound is `p / (q + noise)` for a precoder
/// of power `p`, so the largest feasible jamming power is exactly
/// `p / gamma - noise`.
pub fn scalar_priors(p_max: f64, noise: f64, gamma: f64) -> PriorSet {
    use ajbf::priors::ErrorCovariance;
    PriorSet {
        hbar: vec![vec![CMat::identity(1, 1)]],
        estimates: vec![vec![CMat::identity(1, 1)]],
        error_cov: vec![ErrorCovariance::ScaledIdentity { variance: 0.0, block_dim: 1, blocks: 1 }],
        lambda_max_q: vec![0.0],
        sigma_q2: vec![vec![0.0]],
        omega: vec![0.0],
        r_jam: vec![vec![CMat::identity(1, 1)]],
        alpha: 1.0,
        noise_watts: noise,
        p_max_watts: p_max,
        sinr_threshold: gamma,
        aps: 1,
        ues: 1,
        jammers: 1,
        ap_antennas: 1,
        ue_antennas: 1,
    }
}

/// Largest feasible grid point of an `n`-point scan of `[0, hi]`: the
/// brute-force counterpart of the bracket-and-bisect search.
pub fn grid_scan_q(priors: &PriorSet, state: &BeamformerState, hi: f64, n: usize) -> f64 {
    let gamma = priors.sinr_threshold;
    let step = hi / n as f64;
    let mut best = 0.0;
    for i in 0..=n {
        let q = i as f64 * step;
        if ajbf::ao::min_sinr_fixed(priors, state, q) >= gamma {
            best = q;
        } else {
            break;
        }
    }
    best
}

/// Uniform draw in `[lo, hi)`.
pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}
