//! Deployment geometry: planar arrays, node placement, large-scale fading.
//!
//! All arrays are uniform planar arrays addressed through virtual angles
//! `mu = sin(theta) sin(phi)` and `nu = cos(theta)`, where `phi`/`theta` are
//! azimuth and elevation in the array's local frame. Access points sit on one
//! wall of a cubic service region with their apertures in that wall's plane;
//! users face them from inside the region; jammers are oriented toward the
//! region centroid.

use nalgebra::Vector3;
use num_complex::Complex64;
use rand::{Rng, RngExt};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CVec;

/// Speed of light in m/s, used for default wavelength derivation.
const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default carrier frequency (28 GHz band).
const DEFAULT_CARRIER_HZ: f64 = 28.0e9;

/// Uniform planar array: element grid and spacing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    /// Horizontal element count.
    pub m_h: usize,
    /// Vertical element count.
    pub m_v: usize,
    /// Horizontal element spacing in meters.
    pub d_h: f64,
    /// Vertical element spacing in meters.
    pub d_v: f64,
    /// Carrier wavelength in meters.
    pub wavelength: f64,
}

impl ArrayGeometry {
    pub fn new(m_h: usize, m_v: usize, d_h: f64, d_v: f64, wavelength: f64) -> Result<Self> {
        if m_h == 0 || m_v == 0 {
            return Err(Error::Config("array element counts must be positive".into()));
        }
        if !(d_h > 0.0) || !(d_v > 0.0) || !(wavelength > 0.0) {
            return Err(Error::Config("array spacings and wavelength must be positive".into()));
        }
        Ok(Self { m_h, m_v, d_h, d_v, wavelength })
    }

    /// Half-wavelength-spaced array with `elements` antennas arranged as the
    /// squarest factor pair `m_h x m_v` with `m_h >= m_v`.
    pub fn half_wavelength(elements: usize, wavelength: f64) -> Result<Self> {
        let (m_h, m_v) = squarest_split(elements)?;
        Self::new(m_h, m_v, wavelength / 2.0, wavelength / 2.0, wavelength)
    }

    /// Total element count.
    pub fn elements(&self) -> usize {
        self.m_h * self.m_v
    }

    /// Steering vector at virtual angles `(mu, nu)`.
    ///
    /// Element `(p, q)` of the grid lands at index `p * m_v + q` and carries
    /// phase `2 pi (d_h/lambda) p mu + 2 pi (d_v/lambda) q nu`. Virtual
    /// angles outside `[-1, 1]` are rejected.
    pub fn steering(&self, mu: f64, nu: f64) -> Result<CVec> {
        for a in [mu, nu] {
            if !(-1.0..=1.0).contains(&a) {
                return Err(Error::AngleOutOfRange(a));
            }
        }
        let kh = 2.0 * std::f64::consts::PI * self.d_h / self.wavelength * mu;
        let kv = 2.0 * std::f64::consts::PI * self.d_v / self.wavelength * nu;
        let mut v = CVec::zeros(self.elements());
        for p in 0..self.m_h {
            let ph = Complex64::from_polar(1.0, kh * p as f64);
            for q in 0..self.m_v {
                v[p * self.m_v + q] = ph * Complex64::from_polar(1.0, kv * q as f64);
            }
        }
        Ok(v)
    }
}

/// Squarest factor pair `(m_h, m_v)` of `n` with `m_h >= m_v`.
pub fn squarest_split(n: usize) -> Result<(usize, usize)> {
    if n == 0 {
        return Err(Error::Config("cannot split zero antennas".into()));
    }
    let mut m_v = (n as f64).sqrt().floor() as usize;
    while m_v > 1 && n % m_v != 0 {
        m_v -= 1;
    }
    Ok((n / m_v.max(1), m_v.max(1)))
}

/// Large-scale link gain model, selectable per scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LargeScaleModel {
    /// Log-distance path loss with lognormal shadowing, all in dB:
    /// `gain_db = ref_gain_db - exponent_db_per_decade * log10(d / 1 m) + N(0, shadowing_std_db^2)`.
    PathLoss {
        ref_gain_db: f64,
        exponent_db_per_decade: f64,
        shadowing_std_db: f64,
    },
    /// Fixed linear gain for every link. Useful for unit-scale tests.
    Fixed { gain: f64 },
}

impl Default for LargeScaleModel {
    fn default() -> Self {
        LargeScaleModel::PathLoss {
            ref_gain_db: -30.5,
            exponent_db_per_decade: 36.7,
            shadowing_std_db: 4.0,
        }
    }
}

impl LargeScaleModel {
    /// Draw a linear power gain for a link of length `distance_m`.
    pub fn sample<R: Rng + ?Sized>(&self, distance_m: f64, rng: &mut R) -> f64 {
        match *self {
            LargeScaleModel::Fixed { gain } => gain,
            LargeScaleModel::PathLoss { ref_gain_db, exponent_db_per_decade, shadowing_std_db } => {
                let d = distance_m.max(1.0);
                let mut gain_db = ref_gain_db - exponent_db_per_decade * d.log10();
                if shadowing_std_db > 0.0 {
                    let shadow = Normal::new(0.0, shadowing_std_db).expect("valid std");
                    gain_db += shadow.sample(rng);
                }
                10f64.powf(gain_db / 10.0)
            }
        }
    }
}

/// Full system configuration: node counts, array sizes, powers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    /// Number of access points (L).
    pub aps: usize,
    /// Number of single-stream users (K).
    pub ues: usize,
    /// Number of jammers (G).
    pub jammers: usize,
    /// Antennas per access point (M).
    pub ap_antennas: usize,
    /// RF chains per access point.
    pub ap_rf_chains: usize,
    /// Antennas per user.
    pub ue_antennas: usize,
    /// RF chains per user.
    pub ue_rf_chains: usize,
    /// Antennas per jammer.
    pub jammer_antennas: usize,
    /// Propagation paths per serving link.
    pub ue_paths: usize,
    /// Propagation paths per jamming link.
    pub jammer_paths: usize,
    /// Per-AP transmit power budget in watts.
    pub p_max_watts: f64,
    /// Receiver noise power in watts.
    pub noise_watts: f64,
    /// Per-user SINR requirement, linear.
    pub sinr_threshold: f64,
    /// Side length of the cubic service region in meters.
    pub region_side_m: f64,
    /// Base seed for scenario-level randomness.
    pub rng_seed: u64,
    /// Carrier wavelength in meters.
    pub wavelength_m: f64,
    /// Element spacing as a fraction of the wavelength.
    pub spacing_over_wavelength: f64,
    /// Half-width of the per-path angle perturbation in degrees.
    pub angle_spread_deg: f64,
    /// Scale per-path gains by 1/sqrt(paths) so total link power is
    /// path-count invariant. Off by default.
    pub normalize_paths: bool,
    /// Large-scale gain model shared by serving and jamming links.
    pub large_scale: LargeScaleModel,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::desk()
    }
}

impl ScenarioConfig {
    /// Reduced-dimension configuration that runs interactively on a laptop.
    pub fn desk() -> Self {
        ScenarioConfig {
            aps: 3,
            ues: 5,
            jammers: 2,
            ap_antennas: 16,
            ap_rf_chains: 8,
            ue_antennas: 8,
            ue_rf_chains: 4,
            jammer_antennas: 18,
            ue_paths: 3,
            jammer_paths: 3,
            p_max_watts: 0.25,
            noise_watts: 10f64.powf(-13.7), // -107 dBm
            sinr_threshold: 1.0,            // 0 dB
            region_side_m: 2000.0,
            rng_seed: 1,
            wavelength_m: SPEED_OF_LIGHT / DEFAULT_CARRIER_HZ,
            spacing_over_wavelength: 0.5,
            angle_spread_deg: 5.0,
            normalize_paths: false,
            large_scale: LargeScaleModel::default(),
        }
    }

    /// Full-scale antenna configuration used for headline comparisons.
    pub fn paper() -> Self {
        ScenarioConfig {
            ap_antennas: 36,
            ap_rf_chains: 18,
            ue_antennas: 16,
            ue_rf_chains: 8,
            jammer_antennas: 36,
            region_side_m: 1000.0,
            ..Self::desk()
        }
    }

    /// Check the cross-field invariants.
    pub fn validate(&self) -> Result<()> {
        let positive_counts = [
            ("aps", self.aps),
            ("ues", self.ues),
            ("ap_antennas", self.ap_antennas),
            ("ap_rf_chains", self.ap_rf_chains),
            ("ue_antennas", self.ue_antennas),
            ("ue_rf_chains", self.ue_rf_chains),
            ("ue_paths", self.ue_paths),
            ("jammer_paths", self.jammer_paths),
        ];
        for (name, v) in positive_counts {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if self.jammers > 0 && self.jammer_antennas == 0 {
            return Err(Error::Config("jammer_antennas must be at least 1".into()));
        }
        if self.ap_rf_chains > self.ap_antennas {
            return Err(Error::Config(format!(
                "ap_rf_chains {} exceeds ap_antennas {}",
                self.ap_rf_chains, self.ap_antennas
            )));
        }
        if self.ue_rf_chains > self.ue_antennas {
            return Err(Error::Config(format!(
                "ue_rf_chains {} exceeds ue_antennas {}",
                self.ue_rf_chains, self.ue_antennas
            )));
        }
        for (name, v) in [
            ("p_max_watts", self.p_max_watts),
            ("noise_watts", self.noise_watts),
            ("sinr_threshold", self.sinr_threshold),
            ("region_side_m", self.region_side_m),
            ("wavelength_m", self.wavelength_m),
            ("spacing_over_wavelength", self.spacing_over_wavelength),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.angle_spread_deg < 0.0 {
            return Err(Error::Config("angle_spread_deg must be nonnegative".into()));
        }
        Ok(())
    }

    fn array(&self, elements: usize) -> Result<ArrayGeometry> {
        let (m_h, m_v) = squarest_split(elements)?;
        let d = self.spacing_over_wavelength * self.wavelength_m;
        ArrayGeometry::new(m_h, m_v, d, d, self.wavelength_m)
    }
}

/// Orthonormal local frame of an array: boresight plus in-aperture axes.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrayFrame {
    /// Boresight direction (normal to the aperture).
    pub normal: Vector3<f64>,
    /// Horizontal in-aperture axis.
    pub h_axis: Vector3<f64>,
    /// Vertical in-aperture axis.
    pub v_axis: Vector3<f64>,
}

impl ArrayFrame {
    /// Frame with a given boresight; the vertical axis follows global z as
    /// closely as possible.
    pub fn facing(normal: Vector3<f64>) -> Self {
        let n = if normal.norm() > 0.0 { normal.normalize() } else { Vector3::x() };
        let z = Vector3::z();
        let mut v = z - n * z.dot(&n);
        if v.norm() < 1e-9 {
            // Boresight (anti)parallel to z: fall back to global x for "up".
            let x = Vector3::x();
            v = x - n * x.dot(&n);
        }
        let v = v.normalize();
        let h = v.cross(&n);
        ArrayFrame { normal: n, h_axis: h, v_axis: v }
    }

    /// Azimuth and elevation of a global direction `u` in this frame.
    /// Azimuth is measured in the normal/horizontal plane, elevation is the
    /// polar angle from the vertical axis.
    pub fn azimuth_elevation(&self, u: &Vector3<f64>) -> (f64, f64) {
        let d = u.normalize();
        let phi = d.dot(&self.h_axis).atan2(d.dot(&self.normal));
        let theta = d.dot(&self.v_axis).clamp(-1.0, 1.0).acos();
        (phi, theta)
    }
}

/// Virtual angles from local azimuth/elevation.
#[inline]
pub fn virtual_from_azel(phi: f64, theta: f64) -> (f64, f64) {
    (theta.sin() * phi.sin(), theta.cos())
}

/// A placed, oriented array.
#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub position: Vector3<f64>,
    pub frame: ArrayFrame,
}

/// A fully placed deployment: nodes plus per-class array geometry.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub aps: Vec<Node>,
    pub ues: Vec<Node>,
    pub jammers: Vec<Node>,
    pub ap_array: ArrayGeometry,
    pub ue_array: ArrayGeometry,
    pub jammer_array: ArrayGeometry,
}

/// Place all nodes.
///
/// Access points are spaced evenly along one wall of the region (the x = 0
/// plane, apertures in that plane, boresight into the region) at half the
/// region height. User and jammer positions are drawn uniformly inside the
/// region, users first, in index order.
pub fn generate_scenario<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<Scenario> {
    config.validate()?;
    let side = config.region_side_m;
    let centroid = Vector3::new(side / 2.0, side / 2.0, side / 2.0);

    let ap_frame = ArrayFrame::facing(Vector3::x());
    let aps = (0..config.aps)
        .map(|l| Node {
            position: Vector3::new(0.0, side * (2 * l + 1) as f64 / (2 * config.aps) as f64, side / 2.0),
            frame: ap_frame.clone(),
        })
        .collect();

    let draw_inside = |rng: &mut R| {
        Vector3::new(
            rng.random_range(0.0..side),
            rng.random_range(0.0..side),
            rng.random_range(0.0..side),
        )
    };

    let ue_frame = ArrayFrame::facing(-Vector3::x());
    let ues = (0..config.ues)
        .map(|_| Node { position: draw_inside(rng), frame: ue_frame.clone() })
        .collect();

    let jammers = (0..config.jammers)
        .map(|_| {
            let position = draw_inside(rng);
            Node { frame: ArrayFrame::facing(centroid - position), position }
        })
        .collect();

    Ok(Scenario {
        ap_array: config.array(config.ap_antennas)?,
        ue_array: config.array(config.ue_antennas)?,
        jammer_array: config.array(config.jammer_antennas.max(1))?,
        config: config.clone(),
        aps,
        ues,
        jammers,
    })
}
