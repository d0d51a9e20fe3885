//! Alternating transceiver optimization against worst-case jamming power.
//!
//! The headline quantity is the largest per-jammer transmit power `q` the
//! link can absorb while every user's SINR lower bound stays above the
//! threshold, with the transceivers held fixed. The bound is monotone
//! decreasing in `q`, so the largest feasible `q` is found by bracket
//! expansion plus bisection; the returned value is always feasible.
//!
//! Around that search sits an alternating driver: a scheme improves the
//! transceivers at the incumbent `q`, the candidate is re-scored by a fresh
//! search, and the update is kept only if it does not lower `q`. The
//! safeguard makes the per-round `q` trace non-decreasing even though the
//! hybrid factorization step is not exact.

use crate::error::Result;
use crate::hybrid::{
    factorize_combiners, factorize_precoders, HybridCombiners, HybridConfig, HybridPrecoders,
};
use crate::linalg::CVec;
use crate::priors::PriorSet;
use crate::rx::receivers_for_all;
use crate::tx::{mrt_precoders, pga_solve, PgaConfig, PgaTrace, TxObjective};

/// Transmit and receive beamformers of every user, with the hybrid
/// factorizations that realize them when the scheme uses any.
#[derive(Clone, Debug)]
pub struct BeamformerState {
    /// Unit-norm combiners, one per user.
    pub combiners: Vec<CVec>,
    /// Stacked precoders, one per user.
    pub precoders: Vec<CVec>,
    pub hybrid_combiners: Option<HybridCombiners>,
    pub hybrid_precoders: Option<HybridPrecoders>,
}

/// Smallest per-user SINR lower bound at fixed transceivers and jamming
/// power.
pub fn min_sinr_fixed(priors: &PriorSet, state: &BeamformerState, q_watts: f64) -> f64 {
    TxObjective::new(priors, &state.combiners, q_watts, -1.0).min_sinr(&state.precoders)
}

/// Bracket-and-bisect configuration for the jamming power search.
#[derive(Clone, Debug)]
pub struct QSearchConfig {
    /// Relative width at which bisection stops.
    pub rel_tol: f64,
    /// Initial bracket upper edge as a multiple of the per-AP budget.
    pub bracket_init_over_pmax: f64,
    /// Expansion cap as a multiple of the per-AP budget; a bracket still
    /// feasible here is reported as unbounded.
    pub bracket_cap_over_pmax: f64,
    pub max_bisections: usize,
}

impl Default for QSearchConfig {
    fn default() -> Self {
        QSearchConfig {
            rel_tol: 1e-3,
            bracket_init_over_pmax: 1.0,
            bracket_cap_over_pmax: 1e6,
            max_bisections: 200,
        }
    }
}

/// Result of one jamming power search.
#[derive(Clone, Copy, Debug)]
pub struct QSearchOutcome {
    /// Largest feasible per-jammer power found (always feasible itself).
    pub q_watts: f64,
    /// SINR floor is met even at the bracket cap (for example with no
    /// jammers present): `q_watts` holds the cap and larger powers were not
    /// explored.
    pub unbounded: bool,
    /// The threshold already fails with the jammers silent; `q_watts` is 0.
    pub infeasible: bool,
    /// Number of feasibility evaluations spent.
    pub evaluations: usize,
}

/// Largest jamming power under which `min_sinr_fixed` stays at or above the
/// scenario threshold.
pub fn max_resistible_q(
    priors: &PriorSet,
    state: &BeamformerState,
    cfg: &QSearchConfig,
) -> Result<QSearchOutcome> {
    let gamma = priors.sinr_threshold;
    let mut evaluations = 0;
    let mut feasible = |q: f64| -> f64 {
        evaluations += 1;
        min_sinr_fixed(priors, state, q)
    };
    if feasible(0.0) < gamma {
        return Ok(QSearchOutcome { q_watts: 0.0, unbounded: false, infeasible: true, evaluations });
    }
    let cap = cfg.bracket_cap_over_pmax * priors.p_max_watts;
    let mut lo = 0.0;
    let mut hi = (cfg.bracket_init_over_pmax * priors.p_max_watts).min(cap);
    while feasible(hi) >= gamma {
        lo = hi;
        hi *= 10.0;
        if hi >= cap {
            if feasible(cap) >= gamma {
                return Ok(QSearchOutcome {
                    q_watts: cap,
                    unbounded: true,
                    infeasible: false,
                    evaluations,
                });
            }
            hi = cap;
            break;
        }
    }
    for _ in 0..cfg.max_bisections {
        if hi - lo <= cfg.rel_tol * hi.max(f64::MIN_POSITIVE) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if feasible(mid) >= gamma {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(QSearchOutcome { q_watts: lo, unbounded: false, infeasible: false, evaluations })
}

/// One transceiver design strategy driven by [`alternate_with_q_search`].
pub trait TransceiverScheme {
    fn name(&self) -> &'static str;
    /// Starting transceivers before the first improvement round.
    fn initial_state(&mut self, priors: &PriorSet) -> Result<BeamformerState>;
    /// Propose improved transceivers at the given jamming power.
    fn improve(
        &mut self,
        priors: &PriorSet,
        q_watts: f64,
        state: &BeamformerState,
    ) -> Result<BeamformerState>;
}

/// Outer loop configuration.
#[derive(Clone, Debug)]
pub struct AoConfig {
    /// Improvement rounds.
    pub rounds: usize,
    /// Stop once a round moves `q` by less than this multiple of the per-AP
    /// budget.
    pub kappa_over_pmax: f64,
    pub search: QSearchConfig,
}

impl Default for AoConfig {
    fn default() -> Self {
        AoConfig { rounds: 3, kappa_over_pmax: 1e-3, search: QSearchConfig::default() }
    }
}

/// Round-by-round record of one driver run.
#[derive(Clone, Debug)]
pub struct AoTrace {
    /// Incumbent `q` after initialization and after each round
    /// (non-decreasing by the safeguard).
    pub q_per_round: Vec<f64>,
    pub rounds_run: usize,
    pub converged: bool,
    /// Candidate updates discarded for lowering `q`.
    pub rejected_updates: usize,
    /// Total feasibility evaluations across all searches.
    pub evaluations: usize,
}

/// Final state and score of one driver run.
#[derive(Clone, Debug)]
pub struct AoOutcome {
    pub state: BeamformerState,
    pub search: QSearchOutcome,
    pub trace: AoTrace,
}

/// Alternate scheme improvements with jamming power searches, keeping the
/// best-scoring transceivers seen.
pub fn alternate_with_q_search(
    priors: &PriorSet,
    scheme: &mut dyn TransceiverScheme,
    cfg: &AoConfig,
) -> Result<AoOutcome> {
    let mut state = scheme.initial_state(priors)?;
    let mut search = max_resistible_q(priors, &state, &cfg.search)?;
    let mut trace = AoTrace {
        q_per_round: vec![search.q_watts],
        rounds_run: 0,
        converged: false,
        rejected_updates: 0,
        evaluations: search.evaluations,
    };
    for _ in 0..cfg.rounds {
        trace.rounds_run += 1;
        let prev_q = search.q_watts;
        let candidate = scheme.improve(priors, search.q_watts, &state)?;
        let cand_search = max_resistible_q(priors, &candidate, &cfg.search)?;
        trace.evaluations += cand_search.evaluations;
        if cand_search.q_watts >= search.q_watts {
            state = candidate;
            search = cand_search;
        } else {
            trace.rejected_updates += 1;
        }
        trace.q_per_round.push(search.q_watts);
        if (search.q_watts - prev_q).abs() < cfg.kappa_over_pmax * priors.p_max_watts {
            trace.converged = true;
            break;
        }
    }
    Ok(AoOutcome { state, search, trace })
}

/// The hybrid anti-jamming scheme: quotient-optimal combiners and smoothed
/// max-min precoders, each realized through phase-shifter factorizations.
#[derive(Clone, Debug)]
pub struct AoAjhbfScheme {
    pub pga: PgaConfig,
    pub hybrid: HybridConfig,
    /// RF chains at each user.
    pub ue_chains: usize,
    /// RF chains at each AP.
    pub ap_chains: usize,
    /// Ascent traces of the precoder stages, one per improvement round.
    pub pga_traces: Vec<PgaTrace>,
}

impl AoAjhbfScheme {
    pub fn new(ue_chains: usize, ap_chains: usize) -> Self {
        AoAjhbfScheme {
            pga: PgaConfig::default(),
            hybrid: HybridConfig::default(),
            ue_chains,
            ap_chains,
            pga_traces: Vec::new(),
        }
    }

    /// Chain counts from a scenario configuration.
    pub fn for_scenario(cfg: &crate::scene::ScenarioConfig) -> Self {
        AoAjhbfScheme::new(cfg.ue_rf_chains, cfg.ap_rf_chains)
    }
}

impl TransceiverScheme for AoAjhbfScheme {
    fn name(&self) -> &'static str {
        "ao-ajhbf"
    }

    fn initial_state(&mut self, priors: &PriorSet) -> Result<BeamformerState> {
        let f_digital = mrt_precoders(priors)?;
        let hp = factorize_precoders(
            &f_digital,
            priors.aps,
            priors.ap_antennas,
            self.ap_chains,
            priors.p_max_watts,
            &self.hybrid,
        )?;
        let (w_digital, _) = receivers_for_all(priors, &hp.effective, 0.0)?;
        let hc = factorize_combiners(&w_digital, self.ue_chains, &self.hybrid)?;
        Ok(BeamformerState {
            combiners: hc.effective.clone(),
            precoders: hp.effective.clone(),
            hybrid_combiners: Some(hc),
            hybrid_precoders: Some(hp),
        })
    }

    fn improve(
        &mut self,
        priors: &PriorSet,
        q_watts: f64,
        state: &BeamformerState,
    ) -> Result<BeamformerState> {
        let (w_digital, _) = receivers_for_all(priors, &state.precoders, q_watts)?;
        let hc = factorize_combiners(&w_digital, self.ue_chains, &self.hybrid)?;
        let obj = TxObjective::new(priors, &hc.effective, q_watts, self.pga.delta);
        let (f_digital, pga_trace) = pga_solve(&obj, &state.precoders, &self.pga)?;
        self.pga_traces.push(pga_trace);
        let hp = factorize_precoders(
            &f_digital,
            priors.aps,
            priors.ap_antennas,
            self.ap_chains,
            priors.p_max_watts,
            &self.hybrid,
        )?;
        Ok(BeamformerState {
            combiners: hc.effective.clone(),
            precoders: hp.effective.clone(),
            hybrid_combiners: Some(hc),
            hybrid_precoders: Some(hp),
        })
    }
}

/// Run the full anti-jamming pipeline on one prior set.
pub fn ao_ajhbf(priors: &PriorSet, scheme: &mut AoAjhbfScheme, cfg: &AoConfig) -> Result<AoOutcome> {
    alternate_with_q_search(priors, scheme, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::synthesize_channel;
    use crate::linalg::{c, CMat};
    use crate::priors::{build_priors, ErrorCovariance, EstimationConfig, PriorStreams};
    use crate::scene::{generate_scenario, LargeScaleModel, ScenarioConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Hand-built single-link prior set with unit channel and unit jamming
    /// coupling: the bound is `p / (q + noise)`, so the largest feasible
    /// power is exactly `p / gamma - noise`.
    fn scalar_priors(p_max: f64, noise: f64, gamma: f64) -> PriorSet {
        PriorSet {
            hbar: vec![vec![CMat::identity(1, 1)]],
            estimates: vec![vec![CMat::identity(1, 1)]],
            error_cov: vec![ErrorCovariance::ScaledIdentity {
                variance: 0.0,
                block_dim: 1,
                blocks: 1,
            }],
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

    fn scalar_state(p_max: f64) -> BeamformerState {
        BeamformerState {
            combiners: vec![CVec::from_element(1, c(1.0, 0.0))],
            precoders: vec![CVec::from_element(1, c(p_max.sqrt(), 0.0))],
            hybrid_combiners: None,
            hybrid_precoders: None,
        }
    }

    fn tiny_priors(seed: u64) -> PriorSet {
        let cfg = ScenarioConfig {
            aps: 2,
            ues: 2,
            jammers: 1,
            ap_antennas: 3,
            ap_rf_chains: 2,
            ue_antennas: 2,
            ue_rf_chains: 2,
            jammer_antennas: 3,
            ue_paths: 2,
            jammer_paths: 2,
            large_scale: LargeScaleModel::Fixed { gain: 1.0 },
            noise_watts: 0.05,
            p_max_watts: 2.0,
            sinr_threshold: 1.0,
            ..ScenarioConfig::desk()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scenario = generate_scenario(&cfg, &mut rng).unwrap();
        let (geometry, set) = synthesize_channel(&scenario, &mut rng).unwrap();
        let est = EstimationConfig { n_stat: 10, ..EstimationConfig::default() };
        build_priors(&scenario, &geometry, &set, &est, &mut PriorStreams::from_seed(seed)).unwrap()
    }

    #[test]
    fn scalar_instance_matches_closed_form() {
        let (p, noise, gamma) = (4.0, 0.25, 2.0);
        let priors = scalar_priors(p, noise, gamma);
        let state = scalar_state(p);
        let out = max_resistible_q(&priors, &state, &QSearchConfig::default()).unwrap();
        let exact = p / gamma - noise;
        assert!(!out.infeasible && !out.unbounded);
        assert!(
            (out.q_watts - exact).abs() <= 2e-3 * exact,
            "search {} vs exact {exact}",
            out.q_watts
        );
        // The returned power is feasible.
        assert!(min_sinr_fixed(&priors, &state, out.q_watts) >= gamma);
    }

    #[test]
    fn infeasible_threshold_reports_zero() {
        let priors = scalar_priors(1.0, 0.5, 1e9);
        let state = scalar_state(1.0);
        let out = max_resistible_q(&priors, &state, &QSearchConfig::default()).unwrap();
        assert!(out.infeasible);
        assert_eq!(out.q_watts, 0.0);
    }

    #[test]
    fn no_jammers_is_unbounded_at_cap() {
        let mut priors = scalar_priors(1.0, 0.1, 1.0);
        priors.r_jam = Vec::new();
        priors.jammers = 0;
        let state = scalar_state(1.0);
        let cfg = QSearchConfig::default();
        let out = max_resistible_q(&priors, &state, &cfg).unwrap();
        assert!(out.unbounded);
        assert_eq!(out.q_watts, cfg.bracket_cap_over_pmax * priors.p_max_watts);
    }

    #[test]
    fn search_agrees_with_grid_scan() {
        let priors = tiny_priors(3);
        let mut scheme = AoAjhbfScheme::new(2, 2);
        let state = scheme.initial_state(&priors).unwrap();
        let cfg = QSearchConfig::default();
        let out = max_resistible_q(&priors, &state, &cfg).unwrap();
        assert!(!out.infeasible, "tiny instance should tolerate some jamming");
        // Oracle: 1000-point scan over an enclosing range.
        let hi = out.q_watts * 2.0 + priors.p_max_watts;
        let n = 1000;
        let mut best = 0.0;
        for i in 0..=n {
            let q = hi * i as f64 / n as f64;
            if min_sinr_fixed(&priors, &state, q) >= priors.sinr_threshold {
                best = q;
            }
        }
        let cell = hi / n as f64;
        assert!(
            (out.q_watts - best).abs() <= cell + cfg.rel_tol * best.max(1e-300),
            "bisection {} vs grid {best} (cell {cell})",
            out.q_watts
        );
    }

    #[test]
    fn driver_trace_is_monotone_and_feasible() {
        let priors = tiny_priors(7);
        let mut scheme = AoAjhbfScheme::new(2, 2);
        let out = ao_ajhbf(&priors, &mut scheme, &AoConfig::default()).unwrap();
        for pair in out.trace.q_per_round.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-9, "q trace decreased: {pair:?}");
        }
        assert!(out.search.q_watts >= out.trace.q_per_round[0] - 1e-12);
        assert!(min_sinr_fixed(&priors, &out.state, out.search.q_watts) >= priors.sinr_threshold);
        // Hybrid artifacts travel with the accepted state.
        assert!(out.state.hybrid_combiners.is_some());
        assert!(out.state.hybrid_precoders.is_some());
        for w in &out.state.combiners {
            assert!((w.norm() - 1.0).abs() < 1e-9);
        }
        for l in 0..priors.aps {
            let p = crate::tx::per_ap_power(&out.state.precoders, l, priors.ap_antennas);
            assert!(p <= priors.p_max_watts * (1.0 + 1e-9));
        }
    }

    #[test]
    fn driver_improves_on_initialization() {
        // Across a few seeds the improvement rounds should help at least
        // once, and never hurt (the safeguard forbids regressions).
        let mut improved = false;
        for seed in [11, 13, 17] {
            let priors = tiny_priors(seed);
            let mut scheme = AoAjhbfScheme::new(2, 2);
            let out = ao_ajhbf(&priors, &mut scheme, &AoConfig::default()).unwrap();
            let q0 = out.trace.q_per_round[0];
            assert!(out.search.q_watts >= q0 - 1e-12);
            if out.search.q_watts > q0 * 1.01 {
                improved = true;
            }
        }
        assert!(improved, "no seed showed a material improvement over initialization");
    }

    /// A scheme that proposes strictly worse beamformers every round.
    struct Saboteur;

    impl TransceiverScheme for Saboteur {
        fn name(&self) -> &'static str {
            "saboteur"
        }
        fn initial_state(&mut self, priors: &PriorSet) -> Result<BeamformerState> {
            let mut scheme = AoAjhbfScheme::new(2, 2);
            scheme.initial_state(priors)
        }
        fn improve(
            &mut self,
            _priors: &PriorSet,
            _q: f64,
            state: &BeamformerState,
        ) -> Result<BeamformerState> {
            let mut bad = state.clone();
            for f in bad.precoders.iter_mut() {
                *f *= c(1e-3, 0.0);
            }
            Ok(bad)
        }
    }

    #[test]
    fn safeguard_rejects_degrading_updates() {
        let priors = tiny_priors(19);
        let mut scheme = Saboteur;
        let out = alternate_with_q_search(&priors, &mut scheme, &AoConfig::default()).unwrap();
        assert!(out.trace.rejected_updates > 0);
        let q0 = out.trace.q_per_round[0];
        for &q in &out.trace.q_per_round {
            assert_eq!(q, q0, "incumbent must be unchanged under rejected updates");
        }
    }

    #[test]
    fn driver_is_deterministic() {
        let priors = tiny_priors(23);
        let run = |priors: &PriorSet| {
            let mut scheme = AoAjhbfScheme::new(2, 2);
            ao_ajhbf(priors, &mut scheme, &AoConfig::default()).unwrap()
        };
        let a = run(&priors);
        let b = run(&priors);
        assert_eq!(a.search.q_watts, b.search.q_watts);
        assert_eq!(a.trace.q_per_round, b.trace.q_per_round);
        for (x, y) in a.state.precoders.iter().zip(&b.state.precoders) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn search_tightens_with_tolerance() {
        let (p, noise, gamma) = (2.0, 0.1, 1.5);
        let priors = scalar_priors(p, noise, gamma);
        let state = scalar_state(p);
        let exact = p / gamma - noise;
        let loose = max_resistible_q(
            &priors,
            &state,
            &QSearchConfig { rel_tol: 1e-2, ..QSearchConfig::default() },
        )
        .unwrap();
        let tight = max_resistible_q(
            &priors,
            &state,
            &QSearchConfig { rel_tol: 1e-6, ..QSearchConfig::default() },
        )
        .unwrap();
        assert!((tight.q_watts - exact).abs() <= (loose.q_watts - exact).abs());
        assert!((tight.q_watts - exact).abs() <= 2e-6 * exact);
    }
}
