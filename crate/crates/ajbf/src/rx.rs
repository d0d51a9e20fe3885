//! Receive beamforming.
//!
//! Each user maximizes a lower bound on its SINR over the receive combiner.
//! The bound is a generalized Rayleigh quotient `w^H A w / w^H B w` with a
//! rank-one numerator matrix, so the maximizer has the closed form
//! `w = B^{-1} a / ||B^{-1} a||` and the optimum equals `a^H B^{-1} a`.
//!
//! The denominator matrix `B` collects multi-user interference through the
//! quantized estimates, the per-watt jamming covariances scaled by the
//! current jamming power, diagonal loading by the estimation and
//! quantization error power bounds, and thermal noise.

use crate::error::Result;
use crate::linalg::{c, phase_fix, solve_hpd, CMat, CVec};
use crate::priors::PriorSet;

/// Numerator vector and denominator matrix of one user's quotient.
#[derive(Clone, Debug)]
pub struct GrqOperands {
    /// `a_k`: quantized estimate applied to the user's own precoder.
    pub signal: CVec,
    /// `B_k`: interference-plus-uncertainty-plus-noise covariance.
    pub denominator: CMat,
}

/// Assemble the quotient operands for user `k` given the stacked precoders
/// (one `aps * ap_antennas` vector per user) and the per-jammer power `q`.
pub fn build_grq_operands(
    priors: &PriorSet,
    precoders: &[CVec],
    q_watts: f64,
    k: usize,
) -> GrqOperands {
    let hbar = priors.hbar_stacked(k);
    let signal = &hbar * &precoders[k];
    let m_u = priors.ue_antennas;
    let mut b = CMat::zeros(m_u, m_u);
    for (j, f) in precoders.iter().enumerate() {
        if j == k {
            continue;
        }
        let v = &hbar * f;
        b += &v * v.adjoint();
    }
    for row in &priors.r_jam {
        b += &row[k] * c(q_watts, 0.0);
    }
    let loading = priors.en_ub(k) + priors.qe_ub(k) + priors.noise_watts;
    for i in 0..m_u {
        b[(i, i)] += c(loading, 0.0);
    }
    GrqOperands { signal, denominator: b }
}

/// Optimal combiner and quotient value: `w = B^{-1} a` normalized to unit
/// norm with a deterministic phase, and `xi = a^H B^{-1} a`.
pub fn grq_receiver(ops: &GrqOperands) -> Result<(CVec, f64)> {
    let x = solve_hpd(&ops.denominator, &ops.signal)?;
    let xi = ops.signal.dotc(&x).re;
    let norm = x.norm();
    let w = if norm > 0.0 { phase_fix(&(x / c(norm, 0.0))) } else { x };
    Ok((w, xi))
}

/// Quotient value for a fixed combiner: `|w^H a|^2 / (w^H B w)`.
pub fn sinr_lb_fixed(ops: &GrqOperands, w: &CVec) -> f64 {
    let num = w.dotc(&ops.signal).norm_sqr();
    let den = w.dotc(&(&ops.denominator * w)).re;
    num / den
}

/// Combiners and quotient values for every user at the given precoders and
/// jamming power.
pub fn receivers_for_all(
    priors: &PriorSet,
    precoders: &[CVec],
    q_watts: f64,
) -> Result<(Vec<CVec>, Vec<f64>)> {
    let mut ws = Vec::with_capacity(priors.ues);
    let mut xis = Vec::with_capacity(priors.ues);
    for k in 0..priors.ues {
        let ops = build_grq_operands(priors, precoders, q_watts, k);
        let (w, xi) = grq_receiver(&ops)?;
        ws.push(w);
        xis.push(xi);
    }
    Ok((ws, xis))
}
