//! Clustered multipath channel synthesis.
//!
//! Every serving (AP to UE) and jamming (jammer to UE) link is a sum of a few
//! specular paths. Link geometry (per-path departure/arrival angles and the
//! large-scale gain, shared by all paths of a link) is drawn once per
//! scenario; small-scale gains are i.i.d. CN(0, 1) and can be redrawn at
//! fixed geometry, which is what the jammer covariance estimator relies on.

use num_complex::Complex64;
use rand::{Rng, RngExt};

use crate::error::Result;
use crate::linalg::{c, cn01, CMat};
use crate::scene::{virtual_from_azel, ArrayFrame, ArrayGeometry, Node, Scenario};

/// One realized propagation path.
#[derive(Clone, Debug, PartialEq)]
pub struct PathComponent {
    /// Small-scale gain, CN(0, 1).
    pub small_scale: Complex64,
    /// Large-scale power gain (linear), shared across the link's paths.
    pub large_scale: f64,
    /// Receive-side virtual angles.
    pub mu_rx: f64,
    pub nu_rx: f64,
    /// Transmit-side virtual angles.
    pub mu_tx: f64,
    pub nu_tx: f64,
}

/// Per-path angles, fixed across small-scale redraws.
#[derive(Clone, Debug, PartialEq)]
pub struct PathAngles {
    pub mu_rx: f64,
    pub nu_rx: f64,
    pub mu_tx: f64,
    pub nu_tx: f64,
}

/// Geometry of one link: large-scale gain plus path angles.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkGeometry {
    pub large_scale: f64,
    pub paths: Vec<PathAngles>,
}

/// All link geometries of a deployment, fixed across small-scale redraws.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelGeometry {
    /// Serving links indexed `[ap][ue]`.
    pub ap_ue: Vec<Vec<LinkGeometry>>,
    /// Jamming links indexed `[jammer][ue]`.
    pub jammer_ue: Vec<Vec<LinkGeometry>>,
}

/// One small-scale realization of every channel matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSet {
    /// Serving channels, `[ap][ue]`, each `ue_antennas x ap_antennas`.
    pub h: Vec<Vec<CMat>>,
    /// Jamming channels, `[jammer][ue]`, each `ue_antennas x jammer_antennas`.
    pub j: Vec<Vec<CMat>>,
    /// Realized path components behind `h`.
    pub paths_ap_ue: Vec<Vec<Vec<PathComponent>>>,
    /// Realized path components behind `j`.
    pub paths_jammer_ue: Vec<Vec<Vec<PathComponent>>>,
}

/// Draw the geometry of one link between two placed nodes.
///
/// Each path points at the peer up to independent uniform azimuth/elevation
/// perturbations of `spread_deg` degrees half-width on both ends.
fn draw_link_geometry<R: Rng + ?Sized>(
    tx: &Node,
    rx: &Node,
    paths: usize,
    spread_deg: f64,
    large_scale: f64,
    rng: &mut R,
) -> LinkGeometry {
    let spread = spread_deg.to_radians();
    let d_tx_to_rx = rx.position - tx.position;
    let mut out = Vec::with_capacity(paths);
    for _ in 0..paths {
        let (mu_tx, nu_tx) = perturbed_virtual(&tx.frame, &d_tx_to_rx, spread, rng);
        let (mu_rx, nu_rx) = perturbed_virtual(&rx.frame, &(-d_tx_to_rx), spread, rng);
        out.push(PathAngles { mu_rx, nu_rx, mu_tx, nu_tx });
    }
    LinkGeometry { large_scale, paths: out }
}

fn perturbed_virtual<R: Rng + ?Sized>(
    frame: &ArrayFrame,
    direction: &nalgebra::Vector3<f64>,
    spread: f64,
    rng: &mut R,
) -> (f64, f64) {
    let (phi, theta) = frame.azimuth_elevation(direction);
    let dphi = if spread > 0.0 { rng.random_range(-spread..spread) } else { 0.0 };
    let dtheta = if spread > 0.0 { rng.random_range(-spread..spread) } else { 0.0 };
    virtual_from_azel(phi + dphi, theta + dtheta)
}

/// Draw all link geometries for a scenario.
///
/// Serving links are drawn in `[ap][ue]` order, then jamming links in
/// `[jammer][ue]` order; per link, the large-scale gain is drawn before the
/// path angles. This ordering is part of the determinism contract.
pub fn draw_geometry<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> ChannelGeometry {
    let cfg = &scenario.config;
    let ap_ue = scenario
        .aps
        .iter()
        .map(|ap| {
            scenario
                .ues
                .iter()
                .map(|ue| {
                    let dist = (ue.position - ap.position).norm();
                    let beta = cfg.large_scale.sample(dist, rng);
                    draw_link_geometry(ap, ue, cfg.ue_paths, cfg.angle_spread_deg, beta, rng)
                })
                .collect()
        })
        .collect();
    let jammer_ue = scenario
        .jammers
        .iter()
        .map(|jam| {
            scenario
                .ues
                .iter()
                .map(|ue| {
                    let dist = (ue.position - jam.position).norm();
                    let beta = cfg.large_scale.sample(dist, rng);
                    draw_link_geometry(jam, ue, cfg.jammer_paths, cfg.angle_spread_deg, beta, rng)
                })
                .collect()
        })
        .collect();
    ChannelGeometry { ap_ue, jammer_ue }
}

/// Assemble a channel matrix from realized path components:
/// `H = sum_p alpha_p sqrt(beta_p) a_rx(p) a_tx(p)^H`.
pub fn assemble_link(
    paths: &[PathComponent],
    rx_array: &ArrayGeometry,
    tx_array: &ArrayGeometry,
) -> Result<CMat> {
    let mut h = CMat::zeros(rx_array.elements(), tx_array.elements());
    for p in paths {
        let a_rx = rx_array.steering(p.mu_rx, p.nu_rx)?;
        let a_tx = tx_array.steering(p.mu_tx, p.nu_tx)?;
        let gain = p.small_scale * c(p.large_scale.sqrt(), 0.0);
        h += (&a_rx * a_tx.adjoint()) * gain;
    }
    Ok(h)
}

fn realize_link<R: Rng + ?Sized>(
    geom: &LinkGeometry,
    rx_array: &ArrayGeometry,
    tx_array: &ArrayGeometry,
    normalize: bool,
    rng: &mut R,
) -> Result<(CMat, Vec<PathComponent>)> {
    let scale = if normalize { 1.0 / (geom.paths.len() as f64).sqrt() } else { 1.0 };
    let components: Vec<PathComponent> = geom
        .paths
        .iter()
        .map(|a| PathComponent {
            small_scale: cn01(rng) * c(scale, 0.0),
            large_scale: geom.large_scale,
            mu_rx: a.mu_rx,
            nu_rx: a.nu_rx,
            mu_tx: a.mu_tx,
            nu_tx: a.nu_tx,
        })
        .collect();
    let h = assemble_link(&components, rx_array, tx_array)?;
    Ok((h, components))
}

/// Draw fresh small-scale gains for every link at fixed geometry.
pub fn realize_channels<R: Rng + ?Sized>(
    scenario: &Scenario,
    geometry: &ChannelGeometry,
    rng: &mut R,
) -> Result<ChannelSet> {
    let cfg = &scenario.config;
    let mut h = Vec::with_capacity(geometry.ap_ue.len());
    let mut paths_ap_ue = Vec::with_capacity(geometry.ap_ue.len());
    for row in &geometry.ap_ue {
        let mut hr = Vec::with_capacity(row.len());
        let mut pr = Vec::with_capacity(row.len());
        for link in row {
            let (m, comps) =
                realize_link(link, &scenario.ue_array, &scenario.ap_array, cfg.normalize_paths, rng)?;
            hr.push(m);
            pr.push(comps);
        }
        h.push(hr);
        paths_ap_ue.push(pr);
    }
    let mut j = Vec::with_capacity(geometry.jammer_ue.len());
    let mut paths_jammer_ue = Vec::with_capacity(geometry.jammer_ue.len());
    for row in &geometry.jammer_ue {
        let mut jr = Vec::with_capacity(row.len());
        let mut pr = Vec::with_capacity(row.len());
        for link in row {
            let (m, comps) = realize_link(
                link,
                &scenario.ue_array,
                &scenario.jammer_array,
                cfg.normalize_paths,
                rng,
            )?;
            jr.push(m);
            pr.push(comps);
        }
        j.push(jr);
        paths_jammer_ue.push(pr);
    }
    Ok(ChannelSet { h, j, paths_ap_ue, paths_jammer_ue })
}

/// Convenience: draw geometry and one realization in one call.
pub fn synthesize_channel<R: Rng + ?Sized>(
    scenario: &Scenario,
    rng: &mut R,
) -> Result<(ChannelGeometry, ChannelSet)> {
    let geometry = draw_geometry(scenario, rng);
    let set = realize_channels(scenario, &geometry, rng)?;
    Ok((geometry, set))
}

/// Write every channel matrix as labeled CSV blocks.
///
/// Layout: one header line `# <kind> tx=<i> rx=<k> rows=<r> cols=<c>` per
/// matrix, followed by `rows` lines of comma-separated `re:im` pairs in
/// row-major order.
pub fn write_channel_csv<W: std::io::Write>(set: &ChannelSet, out: &mut W) -> Result<()> {
    let dump = |kind: &str, tx: usize, rx: usize, m: &CMat, out: &mut W| -> Result<()> {
        writeln!(out, "# {kind} tx={tx} rx={rx} rows={} cols={}", m.nrows(), m.ncols())?;
        for r in 0..m.nrows() {
            let line: Vec<String> =
                (0..m.ncols()).map(|cidx| format!("{:?}:{:?}", m[(r, cidx)].re, m[(r, cidx)].im)).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    };
    for (l, row) in set.h.iter().enumerate() {
        for (k, m) in row.iter().enumerate() {
            dump("serving", l, k, m, out)?;
        }
    }
    for (g, row) in set.j.iter().enumerate() {
        for (k, m) in row.iter().enumerate() {
            dump("jamming", g, k, m, out)?;
        }
    }
    Ok(())
}
