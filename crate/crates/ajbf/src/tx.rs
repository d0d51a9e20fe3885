//! Transmit beamforming.
//!
//! With combiners held fixed, the per-user SINR lower bound as a function of
//! the stacked precoders `f_1..f_K` (each of length `aps * ap_antennas`) is
//!
//! `xi_k(F) = |g_k^H f_k|^2 / (sum_{j != k} |g_k^H f_j|^2 + zeta_k)`
//!
//! with `g_k` the quantized estimate seen through user `k`'s combiner and
//! `zeta_k` the combiner's jamming, uncertainty-bound, and noise power. The
//! max-min objective `min_k xi_k` is smoothed by a soft minimum with
//! sharpness `delta < 0` and maximized by projected gradient ascent with an
//! Armijo backtracking line search; the projection rescales any AP block
//! whose total transmit power exceeds the per-AP budget.

use crate::error::{Error, Result};
use crate::linalg::{c, dominant_right_singular, CVec};
use crate::priors::PriorSet;

/// Soft minimum of `values` with sharpness `delta < 0`:
/// `sum_i v_i e^{delta v_i} / sum_i e^{delta v_i}`, evaluated with a
/// minimum shift so large inputs cannot overflow.
pub fn soft_min(values: &[f64], delta: f64) -> f64 {
    let m = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut num = 0.0;
    let mut den = 0.0;
    for &v in values {
        let w = (delta * (v - m)).exp();
        num += v * w;
        den += w;
    }
    num / den
}

/// Partial derivatives of [`soft_min`] with respect to each input.
pub fn soft_min_grad(values: &[f64], delta: f64) -> Vec<f64> {
    let m = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = values.iter().map(|&v| (delta * (v - m)).exp()).collect();
    let den: f64 = weights.iter().sum();
    let eta = weights.iter().zip(values).map(|(w, &v)| w * v).sum::<f64>() / den;
    values
        .iter()
        .zip(&weights)
        .map(|(&v, &w)| (w / den) * (1.0 + delta * (v - eta)))
        .collect()
}

/// Fixed-combiner SINR landscape over the precoders.
#[derive(Clone, Debug)]
pub struct TxObjective {
    /// Effective channel rows `g_k = Hbar_k^H w_k`, stacked length.
    pub g: Vec<CVec>,
    /// Constant denominator terms `zeta_k`.
    pub zeta: Vec<f64>,
    /// Softmax sharpness (negative).
    pub delta: f64,
    pub aps: usize,
    pub ap_antennas: usize,
    pub p_max_watts: f64,
}

impl TxObjective {
    /// Snapshot the landscape at the given combiners and jamming power.
    pub fn new(priors: &PriorSet, combiners: &[CVec], q_watts: f64, delta: f64) -> Self {
        let g = (0..priors.ues)
            .map(|k| priors.hbar_stacked(k).adjoint() * &combiners[k])
            .collect();
        let zeta = (0..priors.ues)
            .map(|k| {
                let w = &combiners[k];
                q_watts * priors.jam_quad(k, w)
                    + (priors.en_ub(k) + priors.qe_ub(k) + priors.noise_watts) * w.norm_squared()
            })
            .collect();
        TxObjective {
            g,
            zeta,
            delta,
            aps: priors.aps,
            ap_antennas: priors.ap_antennas,
            p_max_watts: priors.p_max_watts,
        }
    }

    pub fn users(&self) -> usize {
        self.g.len()
    }

    /// SINR lower bound of user `k`.
    pub fn sinr_lb(&self, f: &[CVec], k: usize) -> f64 {
        let num = self.g[k].dotc(&f[k]).norm_sqr();
        let mut den = self.zeta[k];
        for (j, fj) in f.iter().enumerate() {
            if j != k {
                den += self.g[k].dotc(fj).norm_sqr();
            }
        }
        num / den
    }

    pub fn all_sinr(&self, f: &[CVec]) -> Vec<f64> {
        (0..self.users()).map(|k| self.sinr_lb(f, k)).collect()
    }

    pub fn min_sinr(&self, f: &[CVec]) -> f64 {
        self.all_sinr(f).into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Smoothed objective value.
    pub fn objective(&self, f: &[CVec]) -> f64 {
        soft_min(&self.all_sinr(f), self.delta)
    }

    /// Conjugate Wirtinger gradient of the smoothed objective: for a real
    /// step `f + t u` the objective changes by `2 t Re<grad, u>` to first
    /// order.
    pub fn gradient(&self, f: &[CVec]) -> Vec<CVec> {
        let k_users = self.users();
        let dim = f[0].len();
        // Per-user numerators, denominators, and inner products.
        let mut inner = vec![vec![c(0.0, 0.0); k_users]; k_users]; // inner[k][j] = g_k^H f_j
        for k in 0..k_users {
            for j in 0..k_users {
                inner[k][j] = self.g[k].dotc(&f[j]);
            }
        }
        let den: Vec<f64> = (0..k_users)
            .map(|k| {
                self.zeta[k]
                    + (0..k_users)
                        .filter(|&j| j != k)
                        .map(|j| inner[k][j].norm_sqr())
                        .sum::<f64>()
            })
            .collect();
        let num: Vec<f64> = (0..k_users).map(|k| inner[k][k].norm_sqr()).collect();
        let xis: Vec<f64> = (0..k_users).map(|k| num[k] / den[k]).collect();
        let outer_w = soft_min_grad(&xis, self.delta);

        (0..k_users)
            .map(|j| {
                let mut grad = CVec::zeros(dim);
                for k in 0..k_users {
                    // d xi_k / d conj(f_j)
                    let coeff = if k == j {
                        c(outer_w[k] / den[k], 0.0) * inner[k][k]
                    } else {
                        c(-outer_w[k] * num[k] / (den[k] * den[k]), 0.0) * inner[k][j]
                    };
                    if coeff.norm_sqr() > 0.0 {
                        grad += &self.g[k] * coeff;
                    }
                }
                grad
            })
            .collect()
    }
}

/// Total transmit power of AP `l` across all users' stacked precoders.
pub fn per_ap_power(f: &[CVec], l: usize, ap_antennas: usize) -> f64 {
    f.iter()
        .map(|fk| fk.rows(l * ap_antennas, ap_antennas).norm_squared())
        .sum()
}

/// Project stacked precoders onto the per-AP power constraints by scaling
/// each violating AP block uniformly across users.
pub fn project_per_ap_power(f: &mut [CVec], aps: usize, ap_antennas: usize, p_max: f64) {
    for l in 0..aps {
        let p = per_ap_power(f, l, ap_antennas);
        if p > p_max {
            let s = c((p_max / p).sqrt(), 0.0);
            for fk in f.iter_mut() {
                let mut block = fk.rows_mut(l * ap_antennas, ap_antennas);
                block *= s;
            }
        }
    }
}

/// Maximum-ratio initialization: each AP serves each user along the dominant
/// right singular direction of the quantized link estimate, with the per-AP
/// budget split evenly across users.
pub fn mrt_precoders(priors: &PriorSet) -> Result<Vec<CVec>> {
    let dim = priors.aps * priors.ap_antennas;
    let scale = (priors.p_max_watts / priors.ues as f64).sqrt();
    let mut out = Vec::with_capacity(priors.ues);
    for k in 0..priors.ues {
        let mut fk = CVec::zeros(dim);
        for l in 0..priors.aps {
            let (_, v) = dominant_right_singular(&priors.hbar[l][k])?;
            fk.rows_mut(l * priors.ap_antennas, priors.ap_antennas)
                .copy_from(&(v * c(scale, 0.0)));
        }
        out.push(fk);
    }
    Ok(out)
}

/// Projected gradient ascent configuration.
#[derive(Clone, Debug)]
pub struct PgaConfig {
    /// Soft-minimum sharpness.
    pub delta: f64,
    /// Stop when the objective improves by less than `tol * (1 + |eta|)`.
    pub tol: f64,
    pub max_iters: usize,
    pub step_init: f64,
    pub step_shrink: f64,
    /// Armijo sufficient-increase coefficient on `t * ||grad||^2`.
    pub armijo_c1: f64,
    pub max_backtracks: usize,
}

impl Default for PgaConfig {
    fn default() -> Self {
        PgaConfig {
            delta: -4.0,
            tol: 1e-5,
            max_iters: 200,
            step_init: 1.0,
            step_shrink: 0.5,
            armijo_c1: 1e-4,
            max_backtracks: 30,
        }
    }
}

/// Convergence record of one ascent run.
#[derive(Clone, Debug)]
pub struct PgaTrace {
    /// Objective after projection of the start point, then after each
    /// accepted iterate.
    pub objective: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Maximize the smoothed minimum SINR by projected gradient ascent from
/// `f0`. Returns the best iterate found; the objective trace is
/// non-decreasing by construction.
pub fn pga_solve(obj: &TxObjective, f0: &[CVec], cfg: &PgaConfig) -> Result<(Vec<CVec>, PgaTrace)> {
    if f0.len() != obj.users() {
        return Err(Error::Dimension(format!(
            "{} precoders for {} users",
            f0.len(),
            obj.users()
        )));
    }
    let mut f: Vec<CVec> = f0.to_vec();
    project_per_ap_power(&mut f, obj.aps, obj.ap_antennas, obj.p_max_watts);
    let mut eta = obj.objective(&f);
    if !eta.is_finite() {
        return Err(Error::Numerical(format!("objective {eta} at start point")));
    }
    let mut trace = PgaTrace { objective: vec![eta], iterations: 0, converged: false };

    for it in 0..cfg.max_iters {
        trace.iterations = it + 1;
        let grad = obj.gradient(&f);
        let gnorm2: f64 = grad.iter().map(|g| g.norm_squared()).sum();
        if gnorm2 == 0.0 {
            trace.converged = true;
            break;
        }
        let mut t = cfg.step_init;
        let mut accepted = None;
        for _ in 0..cfg.max_backtracks {
            let mut cand: Vec<CVec> =
                f.iter().zip(&grad).map(|(fk, gk)| fk + gk * c(t, 0.0)).collect();
            project_per_ap_power(&mut cand, obj.aps, obj.ap_antennas, obj.p_max_watts);
            let eta_c = obj.objective(&cand);
            if eta_c >= eta + cfg.armijo_c1 * t * gnorm2 {
                accepted = Some((cand, eta_c));
                break;
            }
            t *= cfg.step_shrink;
        }
        match accepted {
            Some((cand, eta_c)) => {
                let gain = eta_c - eta;
                f = cand;
                eta = eta_c;
                trace.objective.push(eta);
                if gain < cfg.tol * (1.0 + eta.abs()) {
                    trace.converged = true;
                    break;
                }
            }
            None => {
                // No ascent step satisfies the sufficient-increase test:
                // treat as stationary.
                trace.converged = true;
                break;
            }
        }
    }
    Ok((f, trace))
}
