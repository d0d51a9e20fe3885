//! Link-level simulator for anti-jamming hybrid beamforming in downlink
//! cell-free mmWave MIMO.
//!
//! The crate models a set of access points jointly serving single-stream
//! users while hostile jammers radiate matched-filter interference, and
//! implements the full optimization chain:
//!
//! - [`scene`] / [`channel`]: geometry, planar-array steering, clustered
//!   multipath channel synthesis with configurable large-scale fading.
//! - [`priors`]: channel estimation (pilot-based MMSE or synthetic error
//!   injection), finite-resolution quantization, jammer spatial statistics,
//!   and the error-power bounds used by the robust SINR surrogate.
//! - [`rx`]: closed-form receive beamforming via generalized Rayleigh
//!   quotient maximization.
//! - [`tx`]: max-min transmit power allocation through a smoothed-minimum
//!   projected gradient ascent.
//! - [`hybrid`]: analog/digital factorization of full-digital beamformers
//!   under unit-modulus constraints.
//! - [`ao`]: the alternating loop tying the pieces together and the binary
//!   search for the largest jamming power the link can absorb.
//! - [`wmmse`]: a weighted-MMSE baseline sharing the same outer loop.
//! - [`sdr`]: exporter for the semidefinite-relaxation form of the transmit
//!   problem (solver-ready text instances; nothing is solved in-process).
//! - [`harness`]: batch Monte Carlo experiments, CSV/JSON summaries and SVG
//!   plots.
//!
//! Runnable walkthroughs for each capability live in `examples/`; the `ajbf`
//! binary exposes `run`, `summarize` and `plot` for batch work.

pub mod error;
pub mod linalg;
pub mod scene;
pub mod channel;
pub mod priors;
pub mod rx;
pub mod tx;
pub mod hybrid;
pub mod ao;
pub mod wmmse;
pub mod sdr;
pub mod harness;

pub use error::{Error, Result};
