//! Channel knowledge priors consumed by the beamforming solvers.
//!
//! The solvers never see true channels. They work from:
//!
//! - quantized channel estimates `hbar[l][k]`,
//! - per-user estimation error covariances (block diagonal across APs) and
//!   their largest eigenvalues,
//! - per-link quantization noise variances and their per-user maxima,
//! - per-(jammer, user) spatial covariances of the matched-filter jamming
//!   signal, estimated by redrawing small-scale fading at fixed geometry,
//! - deterministic upper bounds on estimation and quantization error power.
//!
//! Two estimation modes are supported: a pilot-based MMSE estimator with the
//! full correlation prior, and a synthetic mode that injects i.i.d. error at
//! a target NMSE (the default for batch experiments, where the error
//! covariance is a scaled identity and the bounds are exact).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelGeometry, ChannelSet};
use crate::error::{Error, Result};
use crate::linalg::{c, cn01, hermitianize, lambda_max_hermitian, psd_repair_scaled, CMat, CVec};
use crate::scene::Scenario;

/// Distortion factors of the optimal scalar quantizer for a unit-variance
/// Gaussian input, indexed by resolution in bits (1..=5).
const QUANTIZER_ALPHA: [f64; 5] = [0.6366, 0.8825, 0.96546, 0.990503, 0.997501];

/// Quantizer distortion factor for a resolution of `bits` bits.
pub fn quantizer_alpha(bits: u32) -> Result<f64> {
    if (1..=5).contains(&bits) {
        Ok(QUANTIZER_ALPHA[bits as usize - 1])
    } else {
        Err(Error::QuantBits(bits))
    }
}

/// Variance of the additive quantization noise on one link.
///
/// `interference` is the pilot-contamination sum over co-pilot users
/// `sum_{j != k} beta_{l,j} |phi_k^H phi_j|^2`; it is zero under the
/// orthogonal pilot assignment used throughout.
pub fn quantization_noise_variance(
    alpha: f64,
    tau_p: f64,
    rho_p: f64,
    beta: f64,
    interference: f64,
) -> f64 {
    alpha * (1.0 - alpha) * tau_p * rho_p * beta * beta / (tau_p * rho_p * interference + 1.0)
}

/// How estimation error is produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimationMode {
    /// i.i.d. complex Gaussian error scaled to a target NMSE; the error
    /// covariance is exactly a scaled identity.
    SyntheticNmse,
    /// Pilot observation plus linear MMSE with the spatial correlation prior.
    PilotMmse,
}

/// Order of the estimation and quantization stages.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StageOrder {
    /// Estimate the channel, then quantize the estimate (default).
    EstimateThenQuantize,
    /// Quantize the channel first, then estimate from the quantized signal.
    QuantizeThenEstimate,
}

/// Estimation and quantization configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimationConfig {
    pub mode: EstimationMode,
    /// Target NMSE for synthetic mode.
    pub nmse_target: f64,
    /// Pilot length in symbols. Must be at least the user count so that
    /// orthogonal pilots exist.
    pub tau_p: f64,
    /// Pilot power in watts.
    pub rho_p: f64,
    /// Fronthaul quantizer resolution; `None` disables quantization.
    pub quantizer_bits: Option<u32>,
    /// Number of columns of the channel probed by pilots in MMSE mode;
    /// `None` probes all of them.
    pub probe_columns: Option<usize>,
    /// Small-scale redraws for the jamming covariance estimate.
    pub n_stat: usize,
    /// Stage composition order.
    pub order: StageOrder,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        EstimationConfig {
            mode: EstimationMode::SyntheticNmse,
            nmse_target: 0.01,
            tau_p: 10.0,
            rho_p: 0.1,
            quantizer_bits: Some(4),
            probe_columns: None,
            n_stat: 200,
            order: StageOrder::EstimateThenQuantize,
        }
    }
}

impl EstimationConfig {
    pub fn validate(&self, ues: usize) -> Result<()> {
        if self.nmse_target < 0.0 || !self.nmse_target.is_finite() {
            return Err(Error::Config("nmse_target must be nonnegative".into()));
        }
        if !(self.tau_p >= ues as f64) {
            return Err(Error::Config(format!(
                "tau_p {} shorter than the {ues} orthogonal pilots it must carry",
                self.tau_p
            )));
        }
        if !(self.rho_p > 0.0) {
            return Err(Error::Config("rho_p must be positive".into()));
        }
        if let Some(bits) = self.quantizer_bits {
            quantizer_alpha(bits)?;
        }
        if self.n_stat == 0 {
            return Err(Error::Config("n_stat must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-user estimation error covariance, block diagonal across APs.
#[derive(Clone, Debug, PartialEq)]
pub enum ErrorCovariance {
    /// `variance * I` on every AP block: exact in synthetic mode.
    ScaledIdentity { variance: f64, block_dim: usize, blocks: usize },
    /// Dense per-AP blocks of dimension `ue_antennas * ap_antennas`.
    Blocks(Vec<CMat>),
}

impl ErrorCovariance {
    /// Largest eigenvalue over all blocks.
    pub fn lambda_max(&self) -> f64 {
        match self {
            ErrorCovariance::ScaledIdentity { variance, .. } => *variance,
            ErrorCovariance::Blocks(blocks) => blocks
                .iter()
                .map(lambda_max_hermitian)
                .fold(0.0, f64::max),
        }
    }

    /// Total trace over all blocks.
    pub fn trace(&self) -> f64 {
        match self {
            ErrorCovariance::ScaledIdentity { variance, block_dim, blocks } => {
                variance * (*block_dim * *blocks) as f64
            }
            ErrorCovariance::Blocks(blocks) => blocks
                .iter()
                .map(|b| b.diagonal().iter().map(|z| z.re).sum::<f64>())
                .sum(),
        }
    }

    /// Draw one stacked error realization, one `rows x cols` matrix per AP.
    /// `rows * cols` must equal the block dimension.
    pub fn sample<R: Rng + ?Sized>(&self, rows: usize, cols: usize, rng: &mut R) -> Vec<CMat> {
        match self {
            ErrorCovariance::ScaledIdentity { variance, blocks, .. } => {
                let s = variance.sqrt();
                (0..*blocks)
                    .map(|_| CMat::from_fn(rows, cols, |_, _| cn01(rng) * c(s, 0.0)))
                    .collect()
            }
            ErrorCovariance::Blocks(blocks) => blocks
                .iter()
                .map(|b| {
                    // Factor via eigendecomposition (blocks are PSD by repair).
                    let eig = nalgebra::SymmetricEigen::new(b.clone());
                    let dim = b.nrows();
                    let mut v = CVec::zeros(dim);
                    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
                        if lam > 0.0 {
                            let g = cn01(rng) * c(lam.sqrt(), 0.0);
                            v += eig.eigenvectors.column(i) * g;
                        }
                    }
                    // Unstack column-major: entry (row r, col c) = v[c*rows + r].
                    CMat::from_fn(rows, cols, |r, cc| v[cc * rows + r])
                })
                .collect(),
        }
    }
}

/// Independent per-stage random streams so that prior variants (for example
/// with and without quantization) share identical draws in the stages they
/// have in common.
pub struct PriorStreams {
    pub estimation: ChaCha8Rng,
    pub quantization: ChaCha8Rng,
    pub jammer: ChaCha8Rng,
}

impl PriorStreams {
    pub fn from_seed(seed: u64) -> Self {
        let mk = |stream: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            rng
        };
        PriorStreams { estimation: mk(1), quantization: mk(2), jammer: mk(3) }
    }
}

/// Everything the solvers are allowed to know.
#[derive(Clone, Debug)]
pub struct PriorSet {
    /// Quantized channel estimates `[ap][ue]`, `ue_antennas x ap_antennas`.
    pub hbar: Vec<Vec<CMat>>,
    /// Pre-quantization estimates `[ap][ue]` (equal to `hbar` when the
    /// quantizer is disabled and the order is estimate-then-quantize).
    pub estimates: Vec<Vec<CMat>>,
    /// Per-user estimation error covariance.
    pub error_cov: Vec<ErrorCovariance>,
    /// Largest error covariance eigenvalue per user.
    pub lambda_max_q: Vec<f64>,
    /// Quantization noise variance per link `[ap][ue]`.
    pub sigma_q2: Vec<Vec<f64>>,
    /// Per-user maximum of `sigma_q2` over APs.
    pub omega: Vec<f64>,
    /// Jamming spatial covariance `[jammer][ue]`, `ue_antennas` square.
    pub r_jam: Vec<Vec<CMat>>,
    /// Quantizer distortion factor actually applied (1.0 when disabled).
    pub alpha: f64,
    // Scenario constants snapshotted for the solvers.
    pub noise_watts: f64,
    pub p_max_watts: f64,
    pub sinr_threshold: f64,
    pub aps: usize,
    pub ues: usize,
    pub jammers: usize,
    pub ap_antennas: usize,
    pub ue_antennas: usize,
}

impl PriorSet {
    /// Stacked estimate `[hbar[0][k] | hbar[1][k] | ...]`, `ue_antennas x (aps * ap_antennas)`.
    pub fn hbar_stacked(&self, k: usize) -> CMat {
        let mut m = CMat::zeros(self.ue_antennas, self.aps * self.ap_antennas);
        for l in 0..self.aps {
            m.view_mut((0, l * self.ap_antennas), (self.ue_antennas, self.ap_antennas))
                .copy_from(&self.hbar[l][k]);
        }
        m
    }

    /// Upper bound on the estimation error power at user `k`.
    pub fn en_ub(&self, k: usize) -> f64 {
        (self.aps * self.ues) as f64 * self.p_max_watts * self.lambda_max_q[k]
    }

    /// Upper bound on the quantization error power at user `k`.
    pub fn qe_ub(&self, k: usize) -> f64 {
        (self.aps * self.ues) as f64 * self.p_max_watts * self.omega[k]
    }

    /// Total matched-filter jamming gain at user `k` through combiner `w`,
    /// per watt of per-jammer transmit power.
    pub fn jam_quad(&self, k: usize, w: &CVec) -> f64 {
        self.r_jam.iter().map(|row| w.dotc(&(&row[k] * w)).re).sum()
    }

    /// Reject non-finite numerics up front (for example overflowed link
    /// gains) so downstream solvers never see NaN or infinity.
    pub fn check_finite(&self) -> Result<()> {
        let finite_mats = |rows: &Vec<Vec<CMat>>| {
            rows.iter().flatten().flat_map(|m| m.iter()).all(|z| z.re.is_finite() && z.im.is_finite())
        };
        let finite_scalars = self
            .lambda_max_q
            .iter()
            .chain(self.omega.iter())
            .chain(self.sigma_q2.iter().flatten())
            .all(|v| v.is_finite());
        if finite_mats(&self.hbar) && finite_mats(&self.estimates) && finite_mats(&self.r_jam) && finite_scalars
        {
            Ok(())
        } else {
            Err(Error::Numerical("prior set contains non-finite entries".into()))
        }
    }
}

/// Spatial correlation of one vectorized link,
/// `R = sum_p beta_p (conj(a_tx) kron a_rx)(conj(a_tx) kron a_rx)^H`.
pub fn link_correlation(
    link: &crate::channel::LinkGeometry,
    rx_array: &crate::scene::ArrayGeometry,
    tx_array: &crate::scene::ArrayGeometry,
    normalize_paths: bool,
) -> Result<CMat> {
    let dim = rx_array.elements() * tx_array.elements();
    let mut r = CMat::zeros(dim, dim);
    let scale = if normalize_paths { 1.0 / link.paths.len() as f64 } else { 1.0 };
    for p in &link.paths {
        let a_rx = rx_array.steering(p.mu_rx, p.nu_rx)?;
        let a_tx = tx_array.steering(p.mu_tx, p.nu_tx)?;
        let v = a_tx.conjugate().kronecker(&a_rx);
        r += (&v * v.adjoint()) * c(link.large_scale * scale, 0.0);
    }
    hermitianize(&mut r);
    Ok(r)
}

/// Posterior quantities of the linear MMSE estimator for one link.
pub struct MmsePosterior {
    /// Estimator gain `R Ftilde^H Psi^{-1}` applied to the observation.
    pub gain: CMat,
    /// Covariance of the estimate.
    pub r_hat: CMat,
    /// Covariance of the estimation error, `R - r_hat`, PSD-repaired.
    pub q: CMat,
}

/// Linear MMSE posterior for the observation `y = tau_p * Pi h + n`,
/// `n ~ CN(0, tau_p sigma2 I)`, where `Pi` keeps the first `probe_dim`
/// entries of the vectorized channel (pilot probing through an identity
/// column selection).
pub fn mmse_posterior(r: &CMat, probe_dim: usize, tau_p: f64, sigma2: f64) -> Result<MmsePosterior> {
    let dim = r.nrows();
    if probe_dim == 0 || probe_dim > dim {
        return Err(Error::Dimension(format!("probe_dim {probe_dim} outside 1..={dim}")));
    }
    // Psi = tau_p * Pi R Pi^H + sigma2 I on the probed subspace.
    let r_pp = r.view((0, 0), (probe_dim, probe_dim)).clone_owned();
    let mut psi = r_pp * c(tau_p, 0.0);
    for i in 0..probe_dim {
        psi[(i, i)] += c(sigma2, 0.0);
    }
    let psi_chol = psi
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("pilot observation covariance not PD".into()))?;
    // gain = R Pi^H Psi^{-1}  (dim x probe_dim)
    let r_cols = r.view((0, 0), (dim, probe_dim)).clone_owned();
    let gain = psi_chol.solve(&r_cols.adjoint()).adjoint();
    // r_hat = tau_p R Pi^H Psi^{-1} Pi R
    let mut r_hat = (&gain * r_cols.adjoint()) * c(tau_p, 0.0);
    hermitianize(&mut r_hat);
    let mut q = r - &r_hat;
    psd_repair_scaled(&mut q, 1e-10, lambda_max_hermitian(r))?;
    Ok(MmsePosterior { gain, r_hat, q })
}

/// Vectorize a channel matrix column-major.
fn vec_channel(h: &CMat) -> CVec {
    let (rows, cols) = h.shape();
    CVec::from_fn(rows * cols, |i, _| h[(i % rows, i / rows)])
}

/// Reshape a vectorized channel back to `rows x cols`.
fn unvec_channel(v: &CVec, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |r, cc| v[cc * rows + r])
}

/// One pilot-MMSE estimate draw for a single link with known truth `h`.
pub fn mmse_estimate_link<R: Rng + ?Sized>(
    post: &MmsePosterior,
    h: &CMat,
    tau_p: f64,
    sigma2: f64,
    rng: &mut R,
) -> CMat {
    let hv = vec_channel(h);
    let probe_dim = post.gain.ncols();
    let noise_std = (tau_p * sigma2).sqrt();
    let y = CVec::from_fn(probe_dim, |i, _| hv[i] * c(tau_p, 0.0) + cn01(rng) * c(noise_std, 0.0));
    let est = &post.gain * y;
    unvec_channel(&est, h.nrows(), h.ncols())
}

/// Matched-filter jamming covariance per (jammer, user), averaged over
/// `n_stat` small-scale redraws at fixed geometry. Each redraw points the
/// jammer's transmit vector at the dominant right singular direction of its
/// fresh channel.
pub fn jammer_covariance<R: Rng + ?Sized>(
    scenario: &Scenario,
    geometry: &ChannelGeometry,
    n_stat: usize,
    rng: &mut R,
) -> Result<Vec<Vec<CMat>>> {
    let m_u = scenario.config.ue_antennas;
    let mut out = Vec::with_capacity(geometry.jammer_ue.len());
    for row in &geometry.jammer_ue {
        let mut per_ue = Vec::with_capacity(row.len());
        for link in row {
            let scale = if scenario.config.normalize_paths {
                1.0 / (link.paths.len() as f64).sqrt()
            } else {
                1.0
            };
            let mut r = CMat::zeros(m_u, m_u);
            for _ in 0..n_stat {
                let comps: Vec<crate::channel::PathComponent> = link
                    .paths
                    .iter()
                    .map(|a| crate::channel::PathComponent {
                        small_scale: cn01(rng) * c(scale, 0.0),
                        large_scale: link.large_scale,
                        mu_rx: a.mu_rx,
                        nu_rx: a.nu_rx,
                        mu_tx: a.mu_tx,
                        nu_tx: a.nu_tx,
                    })
                    .collect();
                let j = crate::channel::assemble_link(
                    &comps,
                    &scenario.ue_array,
                    &scenario.jammer_array,
                )?;
                let (_, w_j) = crate::linalg::dominant_right_singular(&j)?;
                let received = &j * w_j;
                r += &received * received.adjoint();
            }
            r /= c(n_stat as f64, 0.0);
            hermitianize(&mut r);
            per_ue.push(r);
        }
        out.push(per_ue);
    }
    Ok(out)
}

/// Per-user scaled-identity error variance for synthetic mode:
/// `nmse * E||H_k||_F^2 / (aps * block_dim)` with the analytic second moment.
fn synthetic_error_variance(
    geometry: &ChannelGeometry,
    k: usize,
    elements: usize,
    nmse: f64,
    normalize_paths: bool,
) -> f64 {
    let total: f64 = geometry
        .ap_ue
        .iter()
        .map(|row| {
            let link = &row[k];
            let paths = if normalize_paths { 1.0 } else { link.paths.len() as f64 };
            link.large_scale * paths * elements as f64
        })
        .sum();
    nmse * total / (geometry.ap_ue.len() * elements) as f64
}

/// Build the full prior set for one channel realization.
pub fn build_priors(
    scenario: &Scenario,
    geometry: &ChannelGeometry,
    channels: &ChannelSet,
    est: &EstimationConfig,
    streams: &mut PriorStreams,
) -> Result<PriorSet> {
    let cfg = &scenario.config;
    est.validate(cfg.ues)?;
    let (l_aps, k_ues) = (cfg.aps, cfg.ues);
    let elements = cfg.ue_antennas * cfg.ap_antennas;

    let alpha = match est.quantizer_bits {
        Some(bits) => quantizer_alpha(bits)?,
        None => 1.0,
    };

    // Quantization noise variances from link large-scale gains; orthogonal
    // pilots make the contamination term zero.
    let sigma_q2: Vec<Vec<f64>> = (0..l_aps)
        .map(|l| {
            (0..k_ues)
                .map(|k| {
                    if est.quantizer_bits.is_some() {
                        quantization_noise_variance(
                            alpha,
                            est.tau_p,
                            est.rho_p,
                            geometry.ap_ue[l][k].large_scale,
                            0.0,
                        )
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();

    // Stage closures operating on per-(l,k) matrices.
    let estimate_stage = |input: &Vec<Vec<CMat>>,
                          streams: &mut PriorStreams|
     -> Result<(Vec<Vec<CMat>>, Vec<ErrorCovariance>)> {
        match est.mode {
            EstimationMode::SyntheticNmse => {
                let mut out = vec![Vec::with_capacity(k_ues); l_aps];
                let mut covs = Vec::with_capacity(k_ues);
                let vars: Vec<f64> = (0..k_ues)
                    .map(|k| {
                        synthetic_error_variance(
                            geometry,
                            k,
                            elements,
                            est.nmse_target,
                            cfg.normalize_paths,
                        )
                    })
                    .collect();
                // Estimate = a * (H + e): the Bayesian-consistent split. Per
                // link the entry variance is v, the shrinkage factor is
                // a = 1 - s^2/v, and e ~ CN(0, s^2/a I), which leaves the
                // error H - estimate with exact per-entry variance s^2 while
                // the estimate energy deflates to v - s^2. Links too weak to
                // carry the shared per-user error level (v <= s^2) degrade to
                // a pure-noise estimate with the same error variance.
                for (l, row) in out.iter_mut().enumerate() {
                    for (k, s2) in vars.iter().enumerate() {
                        let link = &geometry.ap_ue[l][k];
                        let paths =
                            if cfg.normalize_paths { 1.0 } else { link.paths.len() as f64 };
                        let v = link.large_scale * paths;
                        let shrink = (1.0 - s2 / v).max(0.0);
                        let est_mat = if shrink > 0.0 {
                            let noise_std = (s2 / shrink).sqrt();
                            let e = CMat::from_fn(cfg.ue_antennas, cfg.ap_antennas, |_, _| {
                                cn01(&mut streams.estimation) * c(noise_std, 0.0)
                            });
                            (&input[l][k] + e) * c(shrink, 0.0)
                        } else {
                            let noise_std = (s2 - v).max(0.0).sqrt();
                            CMat::from_fn(cfg.ue_antennas, cfg.ap_antennas, |_, _| {
                                cn01(&mut streams.estimation) * c(noise_std, 0.0)
                            })
                        };
                        row.push(est_mat);
                    }
                }
                for var in vars {
                    covs.push(ErrorCovariance::ScaledIdentity {
                        variance: var,
                        block_dim: elements,
                        blocks: l_aps,
                    });
                }
                Ok((out, covs))
            }
            EstimationMode::PilotMmse => {
                let probe_dim = est
                    .probe_columns
                    .map(|cols| cols.min(cfg.ap_antennas) * cfg.ue_antennas)
                    .unwrap_or(elements);
                let mut out = vec![Vec::with_capacity(k_ues); l_aps];
                let mut blocks: Vec<Vec<CMat>> = vec![Vec::with_capacity(l_aps); k_ues];
                for l in 0..l_aps {
                    for k in 0..k_ues {
                        let r = link_correlation(
                            &geometry.ap_ue[l][k],
                            &scenario.ue_array,
                            &scenario.ap_array,
                            cfg.normalize_paths,
                        )?;
                        let post = mmse_posterior(&r, probe_dim, est.tau_p, cfg.noise_watts)?;
                        let e = mmse_estimate_link(
                            &post,
                            &input[l][k],
                            est.tau_p,
                            cfg.noise_watts,
                            &mut streams.estimation,
                        );
                        out[l].push(e);
                        blocks[k].push(post.q);
                    }
                }
                let covs = blocks.into_iter().map(ErrorCovariance::Blocks).collect();
                Ok((out, covs))
            }
        }
    };

    let quantize_stage =
        |input: &Vec<Vec<CMat>>, streams: &mut PriorStreams| -> Vec<Vec<CMat>> {
            (0..l_aps)
                .map(|l| {
                    (0..k_ues)
                        .map(|k| {
                            let s = sigma_q2[l][k].sqrt();
                            let noise = CMat::from_fn(cfg.ue_antennas, cfg.ap_antennas, |_, _| {
                                cn01(&mut streams.quantization) * c(s, 0.0)
                            });
                            &input[l][k] * c(alpha, 0.0) + noise
                        })
                        .collect()
                })
                .collect()
        };

    let (estimates, error_cov, hbar) = match est.order {
        StageOrder::EstimateThenQuantize => {
            let (estimates, covs) = estimate_stage(&channels.h, streams)?;
            let hbar = if est.quantizer_bits.is_some() {
                quantize_stage(&estimates, streams)
            } else {
                estimates.clone()
            };
            (estimates, covs, hbar)
        }
        StageOrder::QuantizeThenEstimate => {
            let quantized = if est.quantizer_bits.is_some() {
                quantize_stage(&channels.h, streams)
            } else {
                channels.h.clone()
            };
            let (hbar, covs) = estimate_stage(&quantized, streams)?;
            (quantized, covs, hbar)
        }
    };

    let lambda_max_q: Vec<f64> = error_cov.iter().map(|q| q.lambda_max()).collect();
    for (k, &lam) in lambda_max_q.iter().enumerate() {
        if lam < 0.0 {
            return Err(Error::NotPsd { min_eig: lam, max_eig: lambda_max_q[k] });
        }
    }
    let omega: Vec<f64> =
        (0..k_ues).map(|k| (0..l_aps).map(|l| sigma_q2[l][k]).fold(0.0, f64::max)).collect();

    let r_jam = jammer_covariance(scenario, geometry, est.n_stat, &mut streams.jammer)?;

    let out = PriorSet {
        hbar,
        estimates,
        error_cov,
        lambda_max_q,
        sigma_q2,
        omega,
        r_jam,
        alpha,
        noise_watts: cfg.noise_watts,
        p_max_watts: cfg.p_max_watts,
        sinr_threshold: cfg.sinr_threshold,
        aps: l_aps,
        ues: k_ues,
        jammers: cfg.jammers,
        ap_antennas: cfg.ap_antennas,
        ue_antennas: cfg.ue_antennas,
    };
    out.check_finite()?;
    Ok(out)
}
