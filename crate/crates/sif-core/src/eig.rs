//! Eigensolver backend. Dense nonsymmetric problems (real and complex) are
//! delegated to faer; everything above this module works with
//! `num_complex::Complex64`.

use crate::error::{Result, SifError};
use faer::Mat;
use ndarray::ArrayView2;
use num_complex::Complex64;

pub(crate) fn eigenvalues_real(a: ArrayView2<'_, f64>) -> Result<Vec<Complex64>> {
    let (r, c) = (a.nrows(), a.ncols());
    debug_assert_eq!(r, c);
    let m = Mat::<f64>::from_fn(r, c, |i, j| a[[i, j]]);
    let ev: Vec<faer::c64> = m
        .eigenvalues()
        .map_err(|e| SifError::Numerical(format!("real eigensolve failed: {e:?}")))?;
    Ok(ev.into_iter().map(|z| Complex64::new(z.re, z.im)).collect())
}

pub(crate) fn eigenvalues_complex(a: &Mat<faer::c64>) -> Result<Vec<Complex64>> {
    let ev = a
        .eigenvalues()
        .map_err(|e| SifError::Numerical(format!("complex eigensolve failed: {e:?}")))?;
    Ok(ev.into_iter().map(|z| Complex64::new(z.re, z.im)).collect())
}

/// Sort key used by every spectrum report: real part ascending, imaginary
/// part as tie-break.
pub(crate) fn sort_spectrum(ev: &mut [Complex64]) {
    ev.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
}
