//! Small dense complex linear algebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

pub fn one_norm(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn inf_norm(a: &CMat) -> f64 {
    (0..a.nrows())
        .map(|i| a.row(i).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverse of `a` and its 1-norm condition number, or `None` when LU breaks down.
pub fn inverse_with_cond(a: &CMat) -> Option<(CMat, f64)> {
    let inv = a.clone().lu().try_inverse()?;
    let cond = one_norm(a) * one_norm(&inv);
    if cond.is_finite() {
        Some((inv, cond))
    } else {
        None
    }
}

/// True when `|det a| < tol * ||a||_inf^n`.
pub fn nearly_singular(a: &CMat, tol: f64) -> bool {
    let scale = inf_norm(a);
    if scale == 0.0 {
        return true;
    }
    // det(a / s) = det(a) / s^n keeps the comparison free of overflow.
    let det = a.scale(1.0 / scale).lu().determinant().norm();
    !(det >= tol)
}

pub fn mat_pow(a: &CMat, p: usize) -> CMat {
    let mut out = CMat::identity(a.nrows(), a.ncols());
    for _ in 0..p {
        out = &out * a;
    }
    out
}

/// Eigenvalues via the complex Schur decomposition.
pub fn eigenvalues(a: &CMat) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigenFailure {
            dim: n,
            dump: format!("{a}"),
        });
    }
    let ev = a.eigenvalues().ok_or_else(|| Error::EigenFailure {
        dim: n,
        dump: format!("{a}"),
    })?;
    Ok(ev.iter().copied().collect())
}

pub fn spectral_radius(a: &CMat) -> Result<f64> {
    Ok(eigenvalues(a)?
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max))
}

/// Block-diagonal matrix with `blocks` along the diagonal.
pub fn block_diag(blocks: &[CMat]) -> CMat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let m: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(n, m);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}
