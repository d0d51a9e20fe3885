//! Hybrid analog/digital factorization.
//!
//! Fully-digital beamformers are realized as `RF * BB`, where `RF` has
//! unit-modulus entries (phase shifters) and `BB` is unconstrained. The
//! factorization minimizes the Frobenius residual `||V - RF BB||` by
//! alternating two monotone steps:
//!
//! - digital step: least-squares solve of `BB` via SVD (exact minimizer),
//! - analog step: per-entry phase updates. For entry `(m, n)` the residual
//!   depends on the phase only through `-2 Re(conj(RF_mn) c_mn)` with
//!   `c_mn = P_mn - (RF Q)_mn + RF_mn Q_nn`, `P = V BB^H`, `Q = BB BB^H`,
//!   so setting `RF_mn = c_mn / |c_mn|` cannot increase it. (A whole-matrix
//!   phase projection of the least-squares analog solution lacks this
//!   guarantee.)
//!
//! Initialization splits each phase-constrained column in two: any vector
//! `v` equals `c (e^{j theta_1} + e^{j theta_2})` entrywise with
//! `c = max_m |v_m| / 2`, so two RF chains reproduce one digital vector
//! exactly. With at least `2 * cols` chains the factorization is exact at
//! initialization; with fewer, leftover chains start at the entry phases of
//! the digital columns.

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, CVec};
use num_complex::Complex64;

/// Alternating minimization configuration.
#[derive(Clone, Debug)]
pub struct HybridConfig {
    pub max_alternations: usize,
    /// Stop when one alternation improves the residual by less than
    /// `rel_tol * ||V||_F`.
    pub rel_tol: f64,
}

impl Default for HybridConfig {
    fn default() -> Self {
        HybridConfig { max_alternations: 50, rel_tol: 1e-6 }
    }
}

/// One factorization result.
#[derive(Clone, Debug)]
pub struct HybridFactor {
    /// Unit-modulus analog network, `rows x chains`.
    pub rf: CMat,
    /// Digital stage, `chains x cols`.
    pub bb: CMat,
    /// Final Frobenius residual `||V - rf bb||`.
    pub residual: f64,
    /// Residual after each alternation (non-increasing).
    pub trace: Vec<f64>,
}

impl HybridFactor {
    /// The realized matrix `rf * bb`.
    pub fn realized(&self) -> CMat {
        &self.rf * &self.bb
    }
}

/// Split `v` into two unit-modulus vectors and a common positive scale such
/// that `v = scale * (u1 + u2)` exactly.
pub fn phase_split(v: &CVec) -> (CVec, CVec, f64) {
    let peak = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = peak / 2.0;
    let mut u1 = CVec::zeros(v.len());
    let mut u2 = CVec::zeros(v.len());
    for (i, z) in v.iter().enumerate() {
        let ratio = if scale > 0.0 { (z.norm() / (2.0 * scale)).min(1.0) } else { 0.0 };
        let base = z.arg();
        let off = ratio.acos();
        u1[i] = Complex64::from_polar(1.0, base + off);
        u2[i] = Complex64::from_polar(1.0, base - off);
    }
    (u1, u2, scale)
}

/// Entry phases of `v` as a unit-modulus vector (zero entries map to 1).
fn entry_phases(v: &CVec) -> CVec {
    CVec::from_fn(v.len(), |i, _| {
        let z = v[i];
        if z.norm() > 0.0 {
            z / c(z.norm(), 0.0)
        } else {
            c(1.0, 0.0)
        }
    })
}

/// Initial analog network for factorizing `v` with the given chain count.
fn init_rf(v: &CMat, chains: usize) -> CMat {
    let cols = v.ncols();
    let mut columns: Vec<CVec> = Vec::with_capacity(chains);
    // Phase-split as many digital columns as the budget allows (2 chains
    // reproduce 1 column exactly), then single phase columns, then ones.
    let paired = chains.saturating_sub(cols).min(cols);
    for j in 0..paired {
        let (u1, u2, _) = phase_split(&v.column(j).clone_owned());
        columns.push(u1);
        columns.push(u2);
    }
    for j in paired..cols {
        if columns.len() < chains {
            columns.push(entry_phases(&v.column(j).clone_owned()));
        }
    }
    while columns.len() < chains {
        columns.push(CVec::from_element(v.nrows(), c(1.0, 0.0)));
    }
    CMat::from_columns(&columns)
}

/// Least-squares digital stage for a fixed analog network.
fn digital_step(rf: &CMat, v: &CMat) -> Result<CMat> {
    let svd = rf.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    svd.solve(v, 1e-12 * smax.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::Numerical(format!("digital least-squares step: {e}")))
}

/// One sweep of per-entry phase coordinate descent on the analog network.
fn analog_sweep(rf: &mut CMat, v: &CMat, bb: &CMat) {
    let p = v * bb.adjoint();
    let q = bb * bb.adjoint();
    for m in 0..rf.nrows() {
        for n in 0..rf.ncols() {
            // c_mn as derived in the module docs; recomputing the row-column
            // product keeps the update exact under sequential sweeps.
            let mut fq = c(0.0, 0.0);
            for t in 0..rf.ncols() {
                fq += rf[(m, t)] * q[(t, n)];
            }
            let coeff = p[(m, n)] - fq + rf[(m, n)] * q[(n, n)];
            let mag = coeff.norm();
            if mag > 0.0 {
                rf[(m, n)] = coeff / c(mag, 0.0);
            }
        }
    }
}

/// Factor `v` into `chains` phase-shifter columns times a digital stage.
pub fn factorize(v: &CMat, chains: usize, cfg: &HybridConfig) -> Result<HybridFactor> {
    if chains == 0 {
        return Err(Error::Dimension("at least one RF chain is required".into()));
    }
    let vnorm = v.norm();
    let mut rf = init_rf(v, chains);
    let mut bb = digital_step(&rf, v)?;
    let mut residual = (v - &rf * &bb).norm();
    let mut trace = vec![residual];
    for _ in 0..cfg.max_alternations {
        analog_sweep(&mut rf, v, &bb);
        bb = digital_step(&rf, v)?;
        let next = (v - &rf * &bb).norm();
        let gain = residual - next;
        residual = next;
        trace.push(residual);
        if gain < cfg.rel_tol * vnorm.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(HybridFactor { rf, bb, residual, trace })
}

/// Hybrid receive combiners, one factorization per user.
#[derive(Clone, Debug)]
pub struct HybridCombiners {
    pub per_ue: Vec<HybridFactor>,
    /// Realized unit-norm combiners.
    pub effective: Vec<CVec>,
}

/// Factor each user's combiner and renormalize the realized vector to unit
/// norm (folded into the digital stage).
pub fn factorize_combiners(
    combiners: &[CVec],
    chains: usize,
    cfg: &HybridConfig,
) -> Result<HybridCombiners> {
    let mut per_ue = Vec::with_capacity(combiners.len());
    let mut effective = Vec::with_capacity(combiners.len());
    for w in combiners {
        let target = CMat::from_columns(&[w.clone()]);
        let mut fac = factorize(&target, chains, cfg)?;
        let realized = fac.realized().column(0).clone_owned();
        let norm = realized.norm();
        if norm > 0.0 {
            fac.bb /= c(norm, 0.0);
            effective.push(realized / c(norm, 0.0));
        } else {
            effective.push(realized);
        }
        per_ue.push(fac);
    }
    Ok(HybridCombiners { per_ue, effective })
}

/// Hybrid transmit precoders, one factorization per AP.
#[derive(Clone, Debug)]
pub struct HybridPrecoders {
    pub per_ap: Vec<HybridFactor>,
    /// Realized stacked precoders per user after the per-AP power
    /// re-projection.
    pub effective: Vec<CVec>,
}

/// Factor the per-AP precoding matrices (columns are users) and rescale any
/// AP whose realized power exceeds the budget.
pub fn factorize_precoders(
    precoders: &[CVec],
    aps: usize,
    ap_antennas: usize,
    chains: usize,
    p_max: f64,
    cfg: &HybridConfig,
) -> Result<HybridPrecoders> {
    let users = precoders.len();
    let mut per_ap = Vec::with_capacity(aps);
    let mut effective = vec![CVec::zeros(aps * ap_antennas); users];
    for l in 0..aps {
        let v = CMat::from_fn(ap_antennas, users, |m, k| precoders[k][l * ap_antennas + m]);
        let mut fac = factorize(&v, chains, cfg)?;
        let mut realized = fac.realized();
        let power = realized.norm_squared();
        if power > p_max {
            let s = c((p_max / power).sqrt(), 0.0);
            fac.bb *= s;
            realized *= s;
        }
        for k in 0..users {
            effective[k]
                .rows_mut(l * ap_antennas, ap_antennas)
                .copy_from(&realized.column(k));
        }
        per_ap.push(fac);
    }
    Ok(HybridPrecoders { per_ap, effective })
}
