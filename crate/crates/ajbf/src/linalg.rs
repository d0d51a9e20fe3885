//! Shared complex linear algebra helpers.
//!
//! Everything downstream works on dynamically sized complex matrices:
//!
//! - Hermitian hygiene: symmetrization, residual checks, eigenvalue extremes.
//! - PSD repair with a strict tolerance policy (tiny negative eigenvalues are
//!   clipped, anything larger is an error).
//! - Positive definite solves with a single jitter retry.
//! - Dominant singular pairs for matched-filter style directions.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;
use rand::{Rng, RngExt};
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Dynamically sized complex matrix.
pub type CMat = DMatrix<Complex64>;
/// Dynamically sized complex column vector.
pub type CVec = DVector<Complex64>;

/// Complex literal shorthand.
#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Sample from the unit-variance circular complex Gaussian CN(0, 1).
#[inline]
pub fn cn01<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * std::f64::consts::FRAC_1_SQRT_2, im * std::f64::consts::FRAC_1_SQRT_2)
}

/// Vector of i.i.d. CN(0, var) samples.
pub fn cn_vector<R: Rng + ?Sized>(rng: &mut R, n: usize, var: f64) -> CVec {
    let s = var.sqrt();
    CVec::from_fn(n, |_, _| cn01(rng) * c(s, 0.0))
}

/// Matrix with i.i.d. CN(0, var) entries.
pub fn cn_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, var: f64) -> CMat {
    let s = var.sqrt();
    CMat::from_fn(rows, cols, |_, _| cn01(rng) * c(s, 0.0))
}

/// Rank-one outer product a a^H.
pub fn outer(a: &CVec) -> CMat {
    a * a.adjoint()
}

/// Replace `m` by its Hermitian part (m + m^H)/2, squashing roundoff skew.
pub fn hermitianize(m: &mut CMat) {
    let adj = m.adjoint();
    *m += adj;
    *m *= c(0.5, 0.0);
}

/// Relative Hermitian residual ||M - M^H||_F / max(||M||_F, eps).
pub fn hermitian_residual(m: &CMat) -> f64 {
    let num = (m - m.adjoint()).norm();
    num / m.norm().max(f64::MIN_POSITIVE)
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn lambda_max_hermitian(m: &CMat) -> f64 {
    let eig = SymmetricEigen::new(m.clone());
    eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn lambda_min_hermitian(m: &CMat) -> f64 {
    let eig = SymmetricEigen::new(m.clone());
    eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Repair a nominally PSD Hermitian matrix in place.
///
/// Negative eigenvalues with magnitude below `rel_tol * lambda_max` are
/// clipped to zero; a larger negative eigenvalue is treated as a logic error
/// upstream and reported instead of silently repaired.
pub fn psd_repair(m: &mut CMat, rel_tol: f64) -> Result<()> {
    psd_repair_scaled(m, rel_tol, 0.0)
}

/// [`psd_repair`] with an explicit reference scale for the clipping floor,
/// for matrices formed by cancellation (such as a difference of two PSD
/// matrices) whose own largest eigenvalue may be far below the roundoff
/// level of the operands.
pub fn psd_repair_scaled(m: &mut CMat, rel_tol: f64, scale: f64) -> Result<()> {
    hermitianize(m);
    let eig = SymmetricEigen::new(m.clone());
    let max_eig = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_eig >= 0.0 {
        return Ok(());
    }
    // An all-zero matrix with slightly negative roundoff eigenvalues is fine.
    let floor = rel_tol * max_eig.max(scale).max(f64::MIN_POSITIVE);
    if -min_eig > floor && max_eig > 0.0 {
        return Err(Error::NotPsd { min_eig, max_eig });
    }
    let n = m.nrows();
    let mut rebuilt = CMat::zeros(n, n);
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > 0.0 {
            let v = eig.eigenvectors.column(i).clone_owned();
            rebuilt += outer(&v) * c(lam, 0.0);
        }
    }
    *m = rebuilt;
    hermitianize(m);
    Ok(())
}

/// Solve B x = rhs for Hermitian positive definite B.
///
/// On a failed Cholesky the solve is retried once with diagonal jitter
/// `1e-12 * trace(B) / n`; a second failure is reported.
pub fn solve_hpd(b: &CMat, rhs: &CVec) -> Result<CVec> {
    if let Some(chol) = b.clone().cholesky() {
        return Ok(chol.solve(rhs));
    }
    let n = b.nrows();
    let trace: f64 = b.diagonal().iter().map(|z| z.re).sum();
    let jitter = 1e-12 * trace / n as f64;
    let jittered = b + CMat::identity(n, n) * c(jitter, 0.0);
    match jittered.cholesky() {
        Some(chol) => Ok(chol.solve(rhs)),
        None => Err(Error::Numerical(format!(
            "cholesky failed even with jitter {jitter:e} on {n}x{n} matrix"
        ))),
    }
}

/// Dominant singular value and right singular vector of a complex matrix.
pub fn dominant_right_singular(m: &CMat) -> Result<(f64, CVec)> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("SVD operand contains non-finite entries".into()));
    }
    let svd = SVD::new(m.clone(), false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numerical("SVD did not produce right singular vectors".into()))?;
    let (idx, sigma) = svd
        .singular_values
        .iter()
        .cloned()
        .enumerate()
        .fold((0usize, f64::NEG_INFINITY), |acc, (i, s)| if s > acc.1 { (i, s) } else { acc });
    let v = v_t.row(idx).adjoint();
    Ok((sigma, v))
}

/// Rotate a vector by a global phase so its largest-magnitude entry is real
/// and nonnegative. Fixes the free phase of normalized beamformers.
pub fn phase_fix(v: &CVec) -> CVec {
    let mut best = 0usize;
    let mut best_mag = -1.0;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm();
        if m > best_mag {
            best_mag = m;
            best = i;
        }
    }
    if best_mag <= 0.0 {
        return v.clone();
    }
    let rot = v[best].conj() / c(best_mag, 0.0);
    v * rot
}
