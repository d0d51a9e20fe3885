//! Weighted-MMSE baseline transceiver design.
//!
//! Block-coordinate descent on the weighted sum of per-user mean-square
//! errors, with the jamming power and the uncertainty bounds folded into an
//! effective noise floor:
//!
//! 1. receivers: `w_k = J_k^{-1} v_k` with `v_j = Hbar_k f_j` and
//!    `J_k = sum_j v_j v_j^H + q sum_g R_gk + (noise + bounds) I`,
//! 2. weights: `W_k = 1 / E_k`,
//! 3. precoders: minimize `sum_k W_k E_k` under per-AP power constraints by
//!    cyclic exact block solves, one AP at a time. Each AP block is a
//!    ridge-regularized least squares whose multiplier is found by bisection
//!    on the eigendecomposition of that AP's quadratic term.
//!
//! Every step minimizes the same potential `sum_k (W_k E_k - ln W_k)` over
//! its own block, so the potential is non-increasing across iterations.

use crate::ao::{BeamformerState, TransceiverScheme};
use crate::error::{Error, Result};
use crate::hybrid::{factorize_combiners, factorize_precoders, HybridConfig};
use crate::linalg::{c, phase_fix, solve_hpd, CMat, CVec};
use crate::priors::PriorSet;
use crate::tx::{mrt_precoders, project_per_ap_power};

/// Inner loop configuration.
#[derive(Clone, Debug)]
pub struct WmmseConfig {
    /// Stop when the potential improves by less than `tol * (1 + |value|)`.
    pub tol: f64,
    pub max_iters: usize,
    /// Gauss-Seidel sweeps over APs inside one precoder update.
    pub gs_sweeps: usize,
    /// Sweep convergence threshold on the relative precoder change.
    pub gs_tol: f64,
}

impl Default for WmmseConfig {
    fn default() -> Self {
        WmmseConfig { tol: 1e-5, max_iters: 100, gs_sweeps: 50, gs_tol: 1e-8 }
    }
}

/// Convergence record of one inner run.
#[derive(Clone, Debug)]
pub struct WmmseDiagnostics {
    /// Potential `sum_k (W_k E_k - ln W_k)` after each iteration.
    pub potential: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Effective noise floor seen by user `k`: thermal noise plus both error
/// power bounds.
fn noise_floor(priors: &PriorSet, k: usize) -> f64 {
    priors.noise_watts + priors.en_ub(k) + priors.qe_ub(k)
}

/// Received-signal covariance `J_k` and signal vector `v_k` for user `k`.
fn receive_operands(priors: &PriorSet, precoders: &[CVec], q_watts: f64, k: usize) -> (CMat, CVec) {
    let hbar = priors.hbar_stacked(k);
    let m_u = priors.ue_antennas;
    let mut j = CMat::zeros(m_u, m_u);
    let mut v_k = CVec::zeros(m_u);
    for (jj, f) in precoders.iter().enumerate() {
        let v = &hbar * f;
        j += &v * v.adjoint();
        if jj == k {
            v_k = v;
        }
    }
    for row in &priors.r_jam {
        j += &row[k] * c(q_watts, 0.0);
    }
    let floor = noise_floor(priors, k);
    for i in 0..m_u {
        j[(i, i)] += c(floor, 0.0);
    }
    (j, v_k)
}

/// Mean-square error of user `k` for an arbitrary receiver.
fn mse(j: &CMat, v: &CVec, w: &CVec) -> f64 {
    1.0 - 2.0 * w.dotc(v).re + w.dotc(&(j * w)).re
}

/// MMSE receivers (unnormalized) and their errors.
pub fn mmse_receivers(
    priors: &PriorSet,
    precoders: &[CVec],
    q_watts: f64,
) -> Result<(Vec<CVec>, Vec<f64>)> {
    let mut ws = Vec::with_capacity(priors.ues);
    let mut errs = Vec::with_capacity(priors.ues);
    for k in 0..priors.ues {
        let (j, v) = receive_operands(priors, precoders, q_watts, k);
        let w = solve_hpd(&j, &v)?;
        let e = mse(&j, &v, &w);
        ws.push(w);
        errs.push(e.max(f64::MIN_POSITIVE));
    }
    Ok((ws, errs))
}

/// Weighted sum of errors at arbitrary receivers and precoders.
pub fn weighted_sum_mse(
    priors: &PriorSet,
    receivers: &[CVec],
    weights: &[f64],
    precoders: &[CVec],
    q_watts: f64,
) -> f64 {
    (0..priors.ues)
        .map(|k| {
            let (j, v) = receive_operands(priors, precoders, q_watts, k);
            weights[k] * mse(&j, &v, &receivers[k])
        })
        .sum()
}

/// The BCD potential `sum_k (W_k E_k - ln W_k)`.
pub fn potential(
    priors: &PriorSet,
    receivers: &[CVec],
    weights: &[f64],
    precoders: &[CVec],
    q_watts: f64,
) -> f64 {
    weighted_sum_mse(priors, receivers, weights, precoders, q_watts)
        - weights.iter().map(|w| w.ln()).sum::<f64>()
}

/// Exact minimizer of one AP's ridge-regularized block under its power
/// budget. `targets` holds one right-hand side per user; returns the block
/// columns.
fn solve_ap_block(quad: &CMat, targets: &[CVec], p_max: f64) -> Result<Vec<CVec>> {
    let eig = nalgebra::SymmetricEigen::new(quad.clone());
    let d = &eig.eigenvalues;
    let u = &eig.eigenvectors;
    let d_max = d.iter().cloned().fold(0.0_f64, f64::max);
    let floor = 1e-12 * d_max.max(f64::MIN_POSITIVE);
    // Rotate targets into the eigenbasis; components in the (numerical)
    // null space are dropped, which is exact because every right-hand side
    // lies in the range of the quadratic term.
    let rotated: Vec<CVec> = targets
        .iter()
        .map(|b| {
            let mut r = u.adjoint() * b;
            for (i, x) in r.iter_mut().enumerate() {
                if d[i] <= floor {
                    *x = c(0.0, 0.0);
                }
            }
            r
        })
        .collect();
    let power_at = |lambda: f64| -> f64 {
        rotated
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .map(|(i, x)| {
                        let den = d[i] + lambda;
                        if den > 0.0 {
                            x.norm_sqr() / (den * den)
                        } else {
                            0.0
                        }
                    })
                    .sum::<f64>()
            })
            .sum()
    };
    let assemble = |lambda: f64| -> Vec<CVec> {
        rotated
            .iter()
            .map(|r| {
                let scaled = CVec::from_fn(r.len(), |i, _| {
                    let den = d[i] + lambda;
                    if den > 0.0 {
                        r[i] / c(den, 0.0)
                    } else {
                        c(0.0, 0.0)
                    }
                });
                u * scaled
            })
            .collect()
    };
    if power_at(0.0) <= p_max {
        return Ok(assemble(0.0));
    }
    // p(lambda) <= sum ||r||^2 / lambda^2, so this upper edge is infeasible-
    // safe.
    let total: f64 = rotated.iter().map(|r| r.norm_squared()).sum();
    let mut lo = 0.0;
    let mut hi = (total / p_max).sqrt().max(f64::MIN_POSITIVE);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if power_at(mid) > p_max {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    let out = assemble(hi);
    let p: f64 = out.iter().map(|f| f.norm_squared()).sum();
    if p > p_max * (1.0 + 1e-6) {
        return Err(Error::Numerical(format!("AP power {p} exceeds budget {p_max} after solve")));
    }
    Ok(out)
}

/// Minimize `sum_k W_k E_k` over the precoders under per-AP power
/// constraints by cyclic per-AP exact solves, starting from `f_init`.
pub fn precoder_update(
    priors: &PriorSet,
    receivers: &[CVec],
    weights: &[f64],
    f_init: &[CVec],
    cfg: &WmmseConfig,
) -> Result<Vec<CVec>> {
    let (l_aps, m, k_ues) = (priors.aps, priors.ap_antennas, priors.ues);
    let dim = l_aps * m;
    // Effective rows a_j = Hbar_j^H w_j and the stacked quadratic term
    // A = sum_j W_j a_j a_j^H.
    let a_vecs: Vec<CVec> =
        (0..k_ues).map(|j| priors.hbar_stacked(j).adjoint() * &receivers[j]).collect();
    let mut a_full = CMat::zeros(dim, dim);
    for (j, a) in a_vecs.iter().enumerate() {
        a_full += (a * a.adjoint()) * c(weights[j], 0.0);
    }
    let mut f: Vec<CVec> = f_init.to_vec();
    project_per_ap_power(&mut f, l_aps, m, priors.p_max_watts);
    for _ in 0..cfg.gs_sweeps {
        let mut change = 0.0;
        let mut scale = 0.0;
        for l in 0..l_aps {
            let rows = l * m..(l + 1) * m;
            let quad = a_full.view((l * m, l * m), (m, m)).clone_owned();
            // Right-hand side per user: W_k a_k^{(l)} minus the coupling of
            // the other APs' current blocks through A.
            let targets: Vec<CVec> = (0..k_ues)
                .map(|k| {
                    let coupled = {
                        let af = &a_full * &f[k];
                        af.rows(l * m, m).clone_owned()
                    };
                    let own = quad.clone() * f[k].rows(l * m, m).clone_owned();
                    a_vecs[k].rows(l * m, m) * c(weights[k], 0.0) - coupled + own
                })
                .collect();
            let blocks = solve_ap_block(&quad, &targets, priors.p_max_watts)?;
            for (k, block) in blocks.iter().enumerate() {
                change += (&f[k].rows(rows.start, m) - block).norm_squared();
                scale += block.norm_squared();
                f[k].rows_mut(rows.start, m).copy_from(block);
            }
        }
        if change.sqrt() <= cfg.gs_tol * scale.sqrt().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(f)
}

/// One full inner WMMSE run at fixed jamming power, warm-started from the
/// given precoders.
pub fn wmmse_inner(
    priors: &PriorSet,
    f_init: &[CVec],
    q_watts: f64,
    cfg: &WmmseConfig,
) -> Result<(Vec<CVec>, Vec<CVec>, WmmseDiagnostics)> {
    let mut f: Vec<CVec> = f_init.to_vec();
    project_per_ap_power(&mut f, priors.aps, priors.ap_antennas, priors.p_max_watts);
    let (mut w, mut errs) = mmse_receivers(priors, &f, q_watts)?;
    let mut weights: Vec<f64> = errs.iter().map(|e| 1.0 / e).collect();
    let mut value = potential(priors, &w, &weights, &f, q_watts);
    let mut diag =
        WmmseDiagnostics { potential: vec![value], iterations: 0, converged: false };
    for it in 0..cfg.max_iters {
        diag.iterations = it + 1;
        f = precoder_update(priors, &w, &weights, &f, cfg)?;
        let step = mmse_receivers(priors, &f, q_watts)?;
        w = step.0;
        errs = step.1;
        weights = errs.iter().map(|e| 1.0 / e).collect();
        let next = potential(priors, &w, &weights, &f, q_watts);
        let gain = value - next;
        value = next;
        diag.potential.push(value);
        if gain < cfg.tol * (1.0 + value.abs()) {
            diag.converged = true;
            break;
        }
    }
    Ok((w, f, diag))
}

/// The WMMSE baseline as a driver scheme. Its digital solutions pass through
/// the same phase-shifter factorizations as the main scheme, so both run on
/// identical hardware; receive vectors are normalized for reporting (the SINR
/// bound is scale invariant).
#[derive(Clone, Debug)]
pub struct WmmseScheme {
    pub cfg: WmmseConfig,
    pub hybrid: HybridConfig,
    /// RF chains at each user.
    pub ue_chains: usize,
    /// RF chains at each AP.
    pub ap_chains: usize,
    pub diagnostics: Vec<WmmseDiagnostics>,
}

impl WmmseScheme {
    pub fn new(ue_chains: usize, ap_chains: usize) -> Self {
        WmmseScheme {
            cfg: WmmseConfig::default(),
            hybrid: HybridConfig::default(),
            ue_chains,
            ap_chains,
            diagnostics: Vec::new(),
        }
    }

    /// Chain counts from a scenario configuration.
    pub fn for_scenario(cfg: &crate::scene::ScenarioConfig) -> Self {
        WmmseScheme::new(cfg.ue_rf_chains, cfg.ap_rf_chains)
    }

    fn factorized_state(
        &self,
        priors: &PriorSet,
        w: &[CVec],
        f: &[CVec],
    ) -> Result<BeamformerState> {
        let normalized: Vec<CVec> = w.iter().map(normalized).collect();
        let hc = factorize_combiners(&normalized, self.ue_chains, &self.hybrid)?;
        let hp = factorize_precoders(
            f,
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

impl TransceiverScheme for WmmseScheme {
    fn name(&self) -> &'static str {
        "wmmse"
    }

    fn initial_state(&mut self, priors: &PriorSet) -> Result<BeamformerState> {
        let f = mrt_precoders(priors)?;
        let (w, _) = mmse_receivers(priors, &f, 0.0)?;
        self.factorized_state(priors, &w, &f)
    }

    fn improve(
        &mut self,
        priors: &PriorSet,
        q_watts: f64,
        state: &BeamformerState,
    ) -> Result<BeamformerState> {
        let (w, f, diag) = wmmse_inner(priors, &state.precoders, q_watts, &self.cfg)?;
        self.diagnostics.push(diag);
        self.factorized_state(priors, &w, &f)
    }
}

fn normalized(w: &CVec) -> CVec {
    let n = w.norm();
    if n > 0.0 {
        phase_fix(&(w / c(n, 0.0)))
    } else {
        w.clone()
    }
}
