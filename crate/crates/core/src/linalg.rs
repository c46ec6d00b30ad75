//! Dense Hermitian helpers shared by the Gram and Fock representations.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::entropy::{xlog2x_neg, Bits};
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Negative eigenvalues down to `-PSD_ERROR` are clamped to zero; anything
/// lower means the input is not a valid state.
pub const PSD_ERROR: f64 = 1e-8;

/// Eigendecomposition of a Hermitian matrix. Only the lower-triangular part is
/// trusted; the input is symmetrized first.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let sym = hermitian_part(m);
    let eig = sym.symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect()
}

/// Entries this far below the largest one are zeroed before decomposing.
const FLUSH_REL: f64 = 1e-80;

fn hermitian_part(m: &CMatrix) -> CMatrix {
    let mut sym = (m + m.adjoint()).scale(0.5);
    let floor = FLUSH_REL * sym.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for z in sym.iter_mut() {
        if z.norm() < floor {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    sym
}

/// Clamp rounding noise to zero; error out below `-PSD_ERROR`.
pub fn clamp_spectrum(eigs: &[f64]) -> Result<Vec<f64>> {
    eigs.iter()
        .map(|&l| {
            if l < -PSD_ERROR {
                Err(Error::NotPsd { eigenvalue: l })
            } else {
                Ok(l.max(0.0))
            }
        })
        .collect()
}

/// `-sum l log2 l` over a clamped spectrum.
pub fn spectral_entropy(eigs: &[f64]) -> Result<Bits> {
    let clamped = clamp_spectrum(eigs)?;
    Ok(Bits::from_computed(
        clamped.iter().map(|&l| xlog2x_neg(l)).sum(),
    ))
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().map(|l| l.abs()).sum()
}

/// Principal square root of a positive semidefinite matrix.
///
/// Eigenvalues under `dim * EPSILON * max` are zeroed.
pub fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let (eigs, vecs) = hermitian_eigen(m);
    let clamped = clamp_spectrum(&eigs)?;
    let top = clamped.iter().copied().fold(0.0, f64::max);
    let floor = m.nrows() as f64 * f64::EPSILON * top;
    let roots: Vec<f64> = clamped
        .iter()
        .map(|&l| if l <= floor { 0.0 } else { l.sqrt() })
        .collect();
    Ok(scale_columns(&vecs, &roots) * vecs.adjoint())
}

pub(crate) fn scale_columns(m: &CMatrix, factors: &[f64]) -> CMatrix {
    let mut out = m.clone();
    for (j, &f) in factors.iter().enumerate() {
        out.column_mut(j).scale_mut(f);
    }
    out
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Largest absolute entry of `a - a^dagger`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}
