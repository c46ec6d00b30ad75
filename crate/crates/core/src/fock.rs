//! Truncated number-basis oracle.
//!
//! Everything here is computed from explicit Fock coefficients and dense
//! operators, independently of the Gram-matrix route in [`crate::gram`]. It is
//! slow on purpose and only used for verification.
//!
//! Operators live in a [`FockFrame`]: per mode an isometry from a subspace into
//! the truncated number space `span{|0>..|N>}`. The plain number-basis frame
//! uses the identity. The spanning frame uses, per mode, an orthonormal basis
//! of the truncated coherent vectors that occur in that mode (plus the vacuum),
//! computed by SVD of the coefficient matrix. Every operator built from those
//! vectors lives inside the frame, so spectra and trace norms are exact while
//! the dimension drops from `(N+1)^n` to a few per mode.

use std::f64::consts::E;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::entropy::Bits;
use crate::error::{Error, Result};
use crate::gram::{CoherentLabel, WeightedEnsemble};
use crate::linalg::{self, CMatrix};

/// Environment variable overriding [`DEFAULT_DIM_CAP`].
pub const DIM_CAP_ENV: &str = "WIRETAP_FOCK_DIM_CAP";
/// Largest operator dimension the oracle will allocate.
pub const DEFAULT_DIM_CAP: usize = 4096;
/// Largest number of states accepted by [`srm_povm`].
pub const MAX_POVM_STATES: usize = 512;

/// Largest dense number-basis dimension [`FockFrame::for_labels`] will pick.
pub const NUMBER_BASIS_LIMIT: usize = 256;

/// Relative eigenvalue threshold defining the support of an average state.
const SUPPORT_TOL: f64 = 1e-12;

pub fn dim_cap() -> usize {
    std::env::var(DIM_CAP_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_DIM_CAP)
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// A state vector in frame coordinates. Norm may be below one when produced by
/// truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    coeffs: DVector<Complex64>,
    cutoff: usize,
    number_basis: bool,
}

impl FockVector {
    pub fn coeffs(&self) -> &DVector<Complex64> {
        &self.coeffs
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.norm_squared()
    }

    pub fn inner(&self, other: &FockVector) -> Result<Complex64> {
        if self.coeffs.len() != other.coeffs.len() {
            return Err(Error::Shape {
                expected: self.coeffs.len(),
                found: other.coeffs.len(),
            });
        }
        Ok(self.coeffs.dotc(&other.coeffs))
    }

    pub fn projector(&self) -> FockOperator {
        FockOperator {
            matrix: &self.coeffs * self.coeffs.adjoint(),
            cutoff: self.cutoff,
            modes: 1,
            number_basis: self.number_basis,
        }
    }
}

const FLUSH_LN: f64 = -115.0;

/// Truncated coherent state `sum_{n<=N} e^{-|a|^2/2} a^n / sqrt(n!) |n>`.
/// Magnitudes are built in log space so large `n` never overflows.
pub fn coherent_vector(alpha: Complex64, cutoff: usize) -> FockVector {
    let mut coeffs = DVector::from_element(cutoff + 1, c(0.0));
    let r2 = alpha.norm_sqr();
    if r2 == 0.0 {
        coeffs[0] = c(1.0);
    } else {
        let ln_r = alpha.norm().ln();
        let phase = alpha.arg();
        let mut ln_fact = 0.0;
        for n in 0..=cutoff {
            if n > 0 {
                ln_fact += (n as f64).ln();
            }
            let ln_mag = -0.5 * r2 + n as f64 * ln_r - 0.5 * ln_fact;
            // Amplitudes below ~1e-50 are dropped: their tiny products stall
            // the eigensolvers.
            if ln_mag > FLUSH_LN {
                coeffs[n] = Complex64::from_polar(ln_mag.exp(), n as f64 * phase);
            }
        }
    }
    FockVector {
        coeffs,
        cutoff,
        number_basis: true,
    }
}

/// Mass a coherent state puts above the cutoff, against the bound
/// `2^{-N} / 2` that holds once `N > 8 e |a|^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationReport {
    pub cutoff: usize,
    pub tail: f64,
    pub bound: f64,
    /// `N > 8 e |a|^2`.
    pub precondition: bool,
    /// `tail <= bound`.
    pub satisfied: bool,
}

/// `Pr[n > N]` for a Poisson distribution of mean `mean`, summed directly over
/// the tail so tiny values keep their relative precision.
pub fn poisson_tail(mean: f64, cutoff: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let ln_mean = mean.ln();
    let mut ln_fact: f64 = (1..=cutoff + 1).map(|k| (k as f64).ln()).sum();
    let mut n = cutoff + 1;
    let mut total = 0.0;
    loop {
        let term = (-mean + n as f64 * ln_mean - ln_fact).exp();
        total += term;
        // Past the mode the terms decay geometrically with ratio mean/(n+1).
        if n as f64 > mean && term <= total * 1e-18 {
            break;
        }
        if n > cutoff + 100_000 {
            break;
        }
        n += 1;
        ln_fact += (n as f64).ln();
    }
    total.min(1.0)
}

pub fn tail_probability(alpha: Complex64, cutoff: usize) -> TruncationReport {
    let mean = alpha.norm_sqr();
    let tail = poisson_tail(mean, cutoff);
    let bound = 0.5 * 2f64.powi(-(cutoff as i32));
    TruncationReport {
        cutoff,
        tail,
        bound,
        precondition: cutoff as f64 > 8.0 * E * mean,
        satisfied: tail <= bound,
    }
}

/// Dense operator in frame coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    matrix: CMatrix,
    cutoff: usize,
    modes: usize,
    number_basis: bool,
}

impl FockOperator {
    /// Wrap a number-basis matrix over `modes` modes with cutoff `cutoff`.
    pub fn from_number_basis(matrix: CMatrix, cutoff: usize, modes: usize) -> Result<Self> {
        let dim = (cutoff + 1).pow(modes as u32);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Shape {
                expected: dim,
                found: matrix.nrows(),
            });
        }
        Ok(Self {
            matrix,
            cutoff,
            modes,
            number_basis: true,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn is_number_basis(&self) -> bool {
        self.number_basis
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    /// `Tr[A B]`.
    pub fn trace_product(&self, other: &FockOperator) -> Result<f64> {
        self.check_shape(other)?;
        Ok(self
            .matrix
            .iter()
            .zip(other.matrix.transpose().iter())
            .map(|(a, b)| a * b)
            .sum::<Complex64>()
            .re)
    }

    /// `<v|A|v>`.
    pub fn expectation(&self, v: &FockVector) -> Result<f64> {
        if v.coeffs.len() != self.dim() {
            return Err(Error::Shape {
                expected: self.dim(),
                found: v.coeffs.len(),
            });
        }
        Ok(v.coeffs.dotc(&(&self.matrix * &v.coeffs)).re)
    }

    fn check_shape(&self, other: &FockOperator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::Shape {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    /// Hermitian, unit trace and positive semidefinite within tolerance.
    pub fn validate_density(&self) -> Result<()> {
        if linalg::hermiticity_defect(&self.matrix) > 1e-12 {
            return Err(Error::Validation("operator is not Hermitian".into()));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!(
                "density operator has trace {tr}"
            )));
        }
        linalg::clamp_spectrum(&self.eigenvalues())?;
        Ok(())
    }

    /// Checks `lo <= A <= hi` in the operator order, with `1e-10` slack.
    fn validate_range(&self, what: &str) -> Result<()> {
        if linalg::hermiticity_defect(&self.matrix) > 1e-12 {
            return Err(Error::Validation(format!("{what} is not Hermitian")));
        }
        let eigs = self.eigenvalues();
        if let Some(l) = eigs.iter().find(|l| **l < -1e-10 || **l > 1.0 + 1e-10) {
            return Err(Error::Validation(format!(
                "{what} has eigenvalue {l} outside [0, 1]"
            )));
        }
        Ok(())
    }

    /// Zero-pad a single-mode number-basis operator to a larger cutoff.
    pub fn embed(&self, cutoff: usize) -> Result<FockOperator> {
        if !self.number_basis || self.modes != 1 || cutoff < self.cutoff {
            return Err(Error::Unsupported(
                "embedding needs a single-mode number-basis operator and a larger cutoff".into(),
            ));
        }
        let mut m = CMatrix::zeros(cutoff + 1, cutoff + 1);
        m.view_mut((0, 0), (self.dim(), self.dim()))
            .copy_from(&self.matrix);
        Ok(FockOperator {
            matrix: m,
            cutoff,
            modes: 1,
            number_basis: true,
        })
    }
}

/// Per-mode isometries defining the coordinates operators are expressed in.
#[derive(Clone, Debug)]
pub struct FockFrame {
    cutoff: usize,
    isometries: Vec<CMatrix>,
    number_basis: bool,
}

impl FockFrame {
    /// Plain truncated number basis on `modes` modes. Fails if `(N+1)^modes`
    /// exceeds [`dim_cap`].
    pub fn number_basis(cutoff: usize, modes: usize) -> Result<Self> {
        let requested = (cutoff as u128 + 1).pow(modes as u32);
        let cap = dim_cap() as u128;
        if requested > cap {
            return Err(Error::Resource {
                what: "Fock dimension",
                requested,
                cap,
            });
        }
        Ok(Self {
            cutoff,
            isometries: vec![CMatrix::identity(cutoff + 1, cutoff + 1); modes],
            number_basis: true,
        })
    }

    /// Per-mode span of the truncated coherent vectors used by `labels` and the
    /// vacuum.
    pub fn spanning(labels: &[CoherentLabel], cutoff: usize) -> Result<Self> {
        let modes = labels
            .first()
            .map(|l| l.modes())
            .ok_or_else(|| Error::Validation("spanning frame needs at least one label".into()))?;
        let mut isometries = Vec::with_capacity(modes);
        for k in 0..modes {
            let mut amps: Vec<Complex64> = vec![c(0.0)];
            for l in labels {
                if l.modes() != modes {
                    return Err(Error::Shape {
                        expected: modes,
                        found: l.modes(),
                    });
                }
                let a = l.amplitudes()[k];
                if !amps.contains(&a) {
                    amps.push(a);
                }
            }
            let mut f = CMatrix::zeros(cutoff + 1, amps.len());
            for (j, &a) in amps.iter().enumerate() {
                f.set_column(j, coherent_vector(a, cutoff).coeffs());
            }
            let svd = f.svd(true, false);
            let u = svd.u.expect("requested U");
            let smax = svd.singular_values.max();
            let keep: Vec<usize> = (0..svd.singular_values.len())
                .filter(|&i| svd.singular_values[i] > 1e-12 * smax)
                .collect();
            isometries.push(u.select_columns(keep.iter()));
        }
        let frame = Self {
            cutoff,
            isometries,
            number_basis: false,
        };
        let requested = frame.dim() as u128;
        let cap = dim_cap() as u128;
        if requested > cap {
            return Err(Error::Resource {
                what: "Fock frame dimension",
                requested,
                cap,
            });
        }
        Ok(frame)
    }

    /// Number basis while `(N+1)^modes <= NUMBER_BASIS_LIMIT`, otherwise the
    /// spanning frame of `labels`.
    pub fn for_labels(labels: &[CoherentLabel], cutoff: usize) -> Result<Self> {
        let modes = labels.first().map(|l| l.modes()).unwrap_or(1);
        let dense = (cutoff as u128 + 1)
            .checked_pow(modes as u32)
            .unwrap_or(u128::MAX);
        if dense <= NUMBER_BASIS_LIMIT as u128 {
            Self::number_basis(cutoff, modes)
        } else {
            Self::spanning(labels, cutoff)
        }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn modes(&self) -> usize {
        self.isometries.len()
    }

    pub fn is_number_basis(&self) -> bool {
        self.number_basis
    }

    pub fn dim(&self) -> usize {
        self.isometries.iter().map(|v| v.ncols()).product()
    }

    fn mode_coords(&self, k: usize, v: &DVector<Complex64>) -> DVector<Complex64> {
        self.isometries[k].adjoint() * v
    }

    fn vacuum_coords(&self, k: usize) -> DVector<Complex64> {
        let mut e0 = DVector::from_element(self.cutoff + 1, c(0.0));
        e0[0] = c(1.0);
        self.mode_coords(k, &e0)
    }

    fn check_label(&self, label: &CoherentLabel) -> Result<()> {
        if label.modes() != self.modes() {
            return Err(Error::Shape {
                expected: self.modes(),
                found: label.modes(),
            });
        }
        Ok(())
    }

    /// Truncated (unnormalized) product coherent vector in frame coordinates.
    pub fn product_vector(&self, label: &CoherentLabel) -> Result<FockVector> {
        self.check_label(label)?;
        let mut out = DVector::from_element(1, c(1.0));
        for (k, &a) in label.amplitudes().iter().enumerate() {
            let local = self.mode_coords(k, coherent_vector(a, self.cutoff).coeffs());
            out = out.kronecker(&local);
        }
        Ok(FockVector {
            coeffs: out,
            cutoff: self.cutoff,
            number_basis: self.number_basis,
        })
    }

    /// Product coherent state with each mode truncated and renormalized by
    /// moving the lost mass onto the vacuum.
    pub fn product_state(&self, label: &CoherentLabel) -> Result<FockOperator> {
        self.check_label(label)?;
        let mut out = CMatrix::from_element(1, 1, c(1.0));
        for (k, &a) in label.amplitudes().iter().enumerate() {
            let v = coherent_vector(a, self.cutoff);
            let lost = 1.0 - v.norm_sqr();
            let local = self.mode_coords(k, v.coeffs());
            let vac = self.vacuum_coords(k);
            let rho = &local * local.adjoint() + (&vac * vac.adjoint()).scale(lost.max(0.0));
            out = linalg::kron(&out, &rho);
        }
        Ok(FockOperator {
            matrix: out,
            cutoff: self.cutoff,
            modes: self.modes(),
            number_basis: self.number_basis,
        })
    }
}

/// `rho' = P_N rho P_N + Tr[(1 - P_N) rho] |0><0|` for a single-mode
/// number-basis density operator given at a larger cutoff.
pub fn truncate_renormalize(rho: &FockOperator, cutoff: usize) -> Result<FockOperator> {
    if !rho.number_basis || rho.modes != 1 {
        return Err(Error::Unsupported(
            "truncation acts on single-mode number-basis operators; apply per mode".into(),
        ));
    }
    rho.validate_density()?;
    if cutoff >= rho.cutoff {
        return Ok(rho.clone());
    }
    let d = cutoff + 1;
    let mut m = rho.matrix.view((0, 0), (d, d)).into_owned();
    let kept: f64 = m.diagonal().iter().map(|z| z.re).sum();
    m[(0, 0)] += c(rho.trace() - kept);
    Ok(FockOperator {
        matrix: m,
        cutoff,
        modes: 1,
        number_basis: true,
    })
}

/// Per-mode truncation of a product state given by its single-mode factors.
pub fn truncate_renormalize_product(
    factors: &[FockOperator],
    cutoff: usize,
) -> Result<FockOperator> {
    let mut out = CMatrix::from_element(1, 1, c(1.0));
    for f in factors {
        out = linalg::kron(&out, truncate_renormalize(f, cutoff)?.matrix());
    }
    Ok(FockOperator {
        matrix: out,
        cutoff,
        modes: factors.len(),
        number_basis: true,
    })
}

/// Average state `sum_i w_i rho'_i` of an ensemble, every label truncated and
/// renormalized mode by mode.
pub fn density_from_ensemble(e: &WeightedEnsemble, frame: &FockFrame) -> Result<FockOperator> {
    let limit = frame.cutoff as f64 / (8.0 * E);
    if e.labels()
        .iter()
        .any(|l| l.amplitudes().iter().any(|a| a.norm_sqr() >= limit))
    {
        log::warn!(
            "cutoff {} is below 8e|a|^2 for some amplitude; truncation error is not controlled",
            frame.cutoff
        );
    }
    let d = frame.dim();
    let mut m = CMatrix::zeros(d, d);
    for (l, &w) in e.labels().iter().zip(e.weights()) {
        m += frame.product_state(l)?.matrix.scale(w);
    }
    Ok(FockOperator {
        matrix: m,
        cutoff: frame.cutoff,
        modes: frame.modes(),
        number_basis: frame.number_basis,
    })
}

pub fn von_neumann_entropy(rho: &FockOperator) -> Result<Bits> {
    linalg::spectral_entropy(&rho.eigenvalues())
}

/// `||a - b||_1`.
pub fn trace_norm_distance(a: &FockOperator, b: &FockOperator) -> Result<f64> {
    a.check_shape(b)?;
    Ok(linalg::trace_norm(&(&a.matrix - &b.matrix)))
}

/// `Tr[N rho]` for a number-basis operator (total photon number over modes).
pub fn photon_number_expectation(rho: &FockOperator) -> Result<f64> {
    if !rho.number_basis {
        return Err(Error::Unsupported(
            "photon number needs number-basis coordinates".into(),
        ));
    }
    let base = rho.cutoff + 1;
    Ok((0..rho.dim())
        .map(|i| {
            let mut idx = i;
            let mut count = 0;
            for _ in 0..rho.modes {
                count += idx % base;
                idx /= base;
            }
            count as f64 * rho.matrix[(i, i)].re
        })
        .sum())
}

/// Square-root measurement for equiprobable pure states.
#[derive(Clone, Debug)]
pub struct SrmPovm {
    /// `rho^{-1/2} (1/M) |psi_i><psi_i| rho^{-1/2}` on the support of `rho`.
    pub elements: Vec<FockOperator>,
    /// Projector onto the orthogonal complement of the support.
    pub completion: FockOperator,
}

impl SrmPovm {
    /// `sum_i E_i + completion`.
    pub fn total(&self) -> CMatrix {
        let mut t = self.completion.matrix.clone();
        for e in &self.elements {
            t += &e.matrix;
        }
        t
    }

    /// `(1/M) sum_i <psi_i| E_i |psi_i>`.
    pub fn success(&self, states: &[FockVector]) -> Result<f64> {
        if states.len() != self.elements.len() {
            return Err(Error::Shape {
                expected: self.elements.len(),
                found: states.len(),
            });
        }
        let mut total = 0.0;
        for (e, v) in self.elements.iter().zip(states) {
            total += e.expectation(v)?;
        }
        Ok(total / states.len() as f64)
    }
}

pub fn srm_povm(states: &[FockVector]) -> Result<SrmPovm> {
    let m = states.len();
    if m == 0 {
        return Err(Error::Validation("no states to discriminate".into()));
    }
    if m > MAX_POVM_STATES {
        return Err(Error::Resource {
            what: "POVM states",
            requested: m as u128,
            cap: MAX_POVM_STATES as u128,
        });
    }
    let d = states[0].coeffs.len();
    if let Some(s) = states.iter().find(|s| s.coeffs.len() != d) {
        return Err(Error::Shape {
            expected: d,
            found: s.coeffs.len(),
        });
    }
    let w = 1.0 / m as f64;
    let mut rho = CMatrix::zeros(d, d);
    for s in states {
        rho += (&s.coeffs * s.coeffs.adjoint()).scale(w);
    }
    let (eigs, vecs) = linalg::hermitian_eigen(&rho);
    let lmax = eigs.iter().cloned().fold(0.0, f64::max);
    let support: Vec<usize> = (0..d).filter(|&i| eigs[i] > SUPPORT_TOL * lmax).collect();
    let u = vecs.select_columns(support.iter());
    let inv_roots: Vec<f64> = support.iter().map(|&i| eigs[i].powf(-0.5)).collect();
    // rho^{-1/2} restricted to the support.
    let inv_sqrt = linalg::scale_columns(&u, &inv_roots) * u.adjoint();
    let projector = &u * u.adjoint();

    let cutoff = states[0].cutoff;
    let number_basis = states[0].number_basis;
    let wrap = |matrix: CMatrix| FockOperator {
        matrix,
        cutoff,
        modes: 0,
        number_basis,
    };
    let elements = states
        .iter()
        .map(|s| {
            let v = &inv_sqrt * &s.coeffs;
            wrap((&v * v.adjoint()).scale(w))
        })
        .collect();
    let completion = wrap(CMatrix::identity(d, d) - projector);
    Ok(SrmPovm {
        elements,
        completion,
    })
}

/// `Tr[L rho] <= Tr[L sigma] + ||rho - sigma||_1` for `0 <= L, rho, sigma <= 1`,
/// with `1e-10` slack.
pub fn check_finite_support_lemma(
    effect: &FockOperator,
    rho: &FockOperator,
    sigma: &FockOperator,
) -> Result<bool> {
    effect.validate_range("effect")?;
    rho.validate_range("rho")?;
    sigma.validate_range("sigma")?;
    let lhs = effect.trace_product(rho)?;
    let rhs = effect.trace_product(sigma)? + trace_norm_distance(rho, sigma)?;
    Ok(lhs <= rhs + 1e-10)
}

/// Seeded random operators for property checks.
pub mod random {
    use super::*;

    fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        })
    }

    /// Random density matrix of the given rank on a single mode with cutoff
    /// `cutoff`, optionally damped towards low photon numbers.
    pub fn density<R: Rng + ?Sized>(
        rng: &mut R,
        cutoff: usize,
        rank: usize,
        damping: f64,
    ) -> FockOperator {
        let d = cutoff + 1;
        let mut a = ginibre(rng, d, rank.max(1));
        for i in 0..d {
            let f = (-damping * i as f64).exp();
            a.row_mut(i).scale_mut(f);
        }
        let m = &a * a.adjoint();
        let tr = linalg::trace(&m).re;
        FockOperator {
            matrix: m.unscale(tr),
            cutoff,
            modes: 1,
            number_basis: true,
        }
    }

    /// Random effect `0 <= L <= 1`.
    pub fn effect<R: Rng + ?Sized>(rng: &mut R, cutoff: usize) -> FockOperator {
        let d = cutoff + 1;
        let g = ginibre(rng, d, d);
        let (_, u) = linalg::hermitian_eigen(&(&g + g.adjoint()));
        let vals: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..=1.0)).collect();
        FockOperator {
            matrix: linalg::scale_columns(&u, &vals) * u.adjoint(),
            cutoff,
            modes: 1,
            number_basis: true,
        }
    }

    /// Convex mixture `(1 - t) a + t b`.
    pub fn mix(a: &FockOperator, b: &FockOperator, t: f64) -> FockOperator {
        FockOperator {
            matrix: a.matrix.scale(1.0 - t) + b.matrix.scale(t),
            ..a.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{h_bpsk, PhotonNumber};
    use crate::gram;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn real(a: &[f64]) -> CoherentLabel {
        CoherentLabel::from_real(a).unwrap()
    }

    #[test]
    fn coherent_vector_examples() {
        let v = coherent_vector(c(0.0), 5);
        assert_eq!(v.coeffs()[0], c(1.0));
        assert!(v.coeffs().iter().skip(1).all(|z| *z == c(0.0)));

        let e = 0.8f64;
        let a = coherent_vector(c(e.sqrt()), 60);
        let b = coherent_vector(c(-e.sqrt()), 60);
        assert_abs_diff_eq!(a.inner(&b).unwrap().re, (-2.0 * e).exp(), epsilon = 1e-10);

        assert_abs_diff_eq!(coherent_vector(c(1.0), 30).norm_sqr(), 1.0, epsilon = 1e-12);

        // agrees with the closed-form overlap for complex amplitudes
        let x = Complex64::new(0.4, -0.7);
        let y = Complex64::new(-0.2, 0.9);
        let fock = coherent_vector(x, 60)
            .inner(&coherent_vector(y, 60))
            .unwrap();
        let exact = gram::coherent_overlap(
            &CoherentLabel::new(vec![x]).unwrap(),
            &CoherentLabel::new(vec![y]).unwrap(),
        )
        .unwrap();
        assert!((fock - exact).norm() < 1e-12);

        // large amplitudes do not overflow
        let big = coherent_vector(c(50f64.sqrt()), 200);
        assert_abs_diff_eq!(big.norm_sqr(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn tail_examples() {
        let r = tail_probability(c(0.0), 3);
        assert_eq!(r.tail, 0.0);
        assert!(r.satisfied);

        let r = tail_probability(c(1.0), 22);
        assert!(r.precondition);
        assert!(r.tail <= 2f64.powi(-23), "tail {}", r.tail);

        let r = tail_probability(c(2f64.sqrt()), 44);
        assert!(r.precondition);
        assert!(r.tail <= 2f64.powi(-45));

        // direct tail sum against 1 - head sum where the latter is accurate
        let mean = 3.0f64;
        let head: f64 = (0..=4)
            .map(|n| (-mean).exp() * mean.powi(n) / (1..=n).product::<i32>().max(1) as f64)
            .sum();
        assert_abs_diff_eq!(poisson_tail(mean, 4), 1.0 - head, epsilon = 1e-14);
    }

    #[test]
    fn truncation_examples() {
        let vac = coherent_vector(c(0.0), 12).projector();
        let t = truncate_renormalize(&vac, 4).unwrap();
        assert_abs_diff_eq!(t.trace(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.matrix()[(0, 0)].re, 1.0);

        for (alpha2, n) in [(0.25f64, 8usize), (0.5, 12), (1.0, 24)] {
            let exact = coherent_vector(c(alpha2.sqrt()), 120).projector();
            let t = truncate_renormalize(&exact, n).unwrap();
            assert_abs_diff_eq!(t.trace(), 1.0, epsilon = 1e-14);
            let dist = trace_norm_distance(&exact, &t.embed(120).unwrap()).unwrap();
            assert!(
                dist <= 2f64.powi(-(n as i32)),
                "|a|^2={alpha2} N={n}: {dist}"
            );
        }

        let not_density = FockOperator::from_number_basis(CMatrix::identity(3, 3), 2, 1).unwrap();
        assert!(matches!(
            truncate_renormalize(&not_density, 1),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn product_truncation_error_is_additive() {
        // N = 2 log2(n): total error below 1/n.
        for n in [4usize, 8] {
            let cutoff = 2 * (n as f64).log2().ceil() as usize;
            let exact = coherent_vector(c(0.1f64.sqrt()), 60).projector();
            let single = trace_norm_distance(
                &exact,
                &truncate_renormalize(&exact, cutoff)
                    .unwrap()
                    .embed(60)
                    .unwrap(),
            )
            .unwrap();
            assert!(n as f64 * single <= 1.0 / n as f64);
        }
        // direct check of the product bound on two modes
        let a = coherent_vector(c(0.5), 25).projector();
        let b = coherent_vector(c(-0.3), 25).projector();
        let exact =
            FockOperator::from_number_basis(linalg::kron(a.matrix(), b.matrix()), 25, 2).unwrap();
        let cutoff = 3;
        let per_mode = trace_norm_distance(
            &a,
            &truncate_renormalize(&a, cutoff).unwrap().embed(25).unwrap(),
        )
        .unwrap()
            + trace_norm_distance(
                &b,
                &truncate_renormalize(&b, cutoff).unwrap().embed(25).unwrap(),
            )
            .unwrap();
        let tp = truncate_renormalize_product(&[a, b], cutoff).unwrap();
        let ta = tp.matrix();
        // embed the two-mode truncated operator into the 26^2 space
        let mut big = CMatrix::zeros(26 * 26, 26 * 26);
        for i in 0..16 {
            for j in 0..16 {
                let (i1, i2) = (i / 4, i % 4);
                let (j1, j2) = (j / 4, j % 4);
                big[(i1 * 26 + i2, j1 * 26 + j2)] = ta[(i, j)];
            }
        }
        let direct = linalg::trace_norm(&(exact.matrix() - big));
        assert!(direct <= per_mode + 1e-12, "{direct} > {per_mode}");
    }

    #[test]
    fn density_examples() {
        let frame = FockFrame::number_basis(10, 1).unwrap();
        let vac = WeightedEnsemble::uniform(vec![real(&[0.0])]).unwrap();
        let rho = density_from_ensemble(&vac, &frame).unwrap();
        assert_abs_diff_eq!(rho.matrix()[(0, 0)].re, 1.0);
        assert_abs_diff_eq!(rho.trace(), 1.0);

        let frame = FockFrame::number_basis(30, 1).unwrap();
        let pair = WeightedEnsemble::uniform(vec![real(&[1.0]), real(&[-1.0])]).unwrap();
        let rho = density_from_ensemble(&pair, &frame).unwrap();
        let mut eigs = rho.eigenvalues();
        eigs.sort_by(|a, b| b.total_cmp(a));
        let g = (-2.0f64).exp();
        assert_abs_diff_eq!(eigs[0], (1.0 + g) / 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(eigs[1], (1.0 - g) / 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(
            von_neumann_entropy(&rho).unwrap().value(),
            h_bpsk(PhotonNumber::new(1.0).unwrap()).value(),
            epsilon = 1e-10
        );

        let frame = FockFrame::number_basis(12, 2).unwrap();
        let labels = vec![
            real(&[0.7, 0.7]),
            real(&[0.7, -0.7]),
            real(&[-0.7, 0.7]),
            real(&[-0.7, -0.7]),
        ];
        let rho =
            density_from_ensemble(&WeightedEnsemble::uniform(labels).unwrap(), &frame).unwrap();
        let rank = rho.eigenvalues().iter().filter(|&&l| l > 1e-9).count();
        assert!(rank <= 4);
    }

    #[test]
    fn dimension_cap_is_enforced() {
        assert!(matches!(
            FockFrame::number_basis(40, 3),
            Err(Error::Resource { .. })
        ));
        // the spanning frame handles the same configuration
        let labels = vec![real(&[1.0, -1.0, 1.0]), real(&[-1.0, -1.0, 1.0])];
        let f = FockFrame::spanning(&labels, 40).unwrap();
        assert!(f.dim() <= 27);
    }

    #[test]
    fn spanning_frame_matches_number_basis() {
        let labels = vec![real(&[0.6, -0.2]), real(&[-0.6, 0.9]), real(&[0.0, 0.9])];
        let e = WeightedEnsemble::new(labels.clone(), vec![0.5, 0.3, 0.2]).unwrap();
        let full = density_from_ensemble(&e, &FockFrame::number_basis(20, 2).unwrap()).unwrap();
        let span = density_from_ensemble(&e, &FockFrame::spanning(&labels, 20).unwrap()).unwrap();
        assert_abs_diff_eq!(
            von_neumann_entropy(&full).unwrap().value(),
            von_neumann_entropy(&span).unwrap().value(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn entropy_and_distance_examples() {
        let pure = coherent_vector(c(0.9), 20).projector();
        let pure = truncate_renormalize(&pure.embed(60).unwrap(), 20).unwrap();
        assert_abs_diff_eq!(
            von_neumann_entropy(&pure).unwrap().value(),
            0.0,
            epsilon = 1e-9
        );

        let d = 8;
        let mixed =
            FockOperator::from_number_basis(CMatrix::identity(d, d).unscale(d as f64), d - 1, 1)
                .unwrap();
        assert_abs_diff_eq!(
            von_neumann_entropy(&mixed).unwrap().value(),
            3.0,
            epsilon = 1e-12
        );

        assert_abs_diff_eq!(trace_norm_distance(&mixed, &mixed).unwrap(), 0.0);
        let e0 = FockVector {
            coeffs: DVector::from_fn(3, |i, _| c((i == 0) as u8 as f64)),
            cutoff: 2,
            number_basis: true,
        };
        let e1 = FockVector {
            coeffs: DVector::from_fn(3, |i, _| c((i == 1) as u8 as f64)),
            cutoff: 2,
            number_basis: true,
        };
        assert_abs_diff_eq!(
            trace_norm_distance(&e0.projector(), &e1.projector()).unwrap(),
            2.0,
            epsilon = 1e-14
        );
        assert!(matches!(
            trace_norm_distance(&mixed, &e0.projector()),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn srm_examples() {
        let basis: Vec<FockVector> = (0..3)
            .map(|k| FockVector {
                coeffs: DVector::from_fn(4, |i, _| c((i == k) as u8 as f64)),
                cutoff: 3,
                number_basis: true,
            })
            .collect();
        let povm = srm_povm(&basis).unwrap();
        for (k, e) in povm.elements.iter().enumerate() {
            assert!((e.matrix() - basis[k].projector().matrix()).norm() < 1e-12);
        }
        assert_abs_diff_eq!(povm.success(&basis).unwrap(), 1.0, epsilon = 1e-12);
        assert!((povm.total() - CMatrix::identity(4, 4)).norm() < 1e-10);

        let frame = FockFrame::number_basis(40, 1).unwrap();
        let pair = [real(&[1.0]), real(&[-1.0])];
        let states: Vec<_> = pair
            .iter()
            .map(|l| frame.product_vector(l).unwrap())
            .collect();
        let povm = srm_povm(&states).unwrap();
        let g = gram::build_gram(&WeightedEnsemble::uniform(pair.to_vec()).unwrap()).unwrap();
        assert_abs_diff_eq!(
            povm.success(&states).unwrap(),
            gram::srm_success(&g).unwrap().value(),
            epsilon = 1e-8
        );
        let dev = (povm.total() - CMatrix::identity(41, 41))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(dev <= 1e-10);

        let single = [frame.product_vector(&real(&[0.5])).unwrap()];
        let povm = srm_povm(&single).unwrap();
        let p = single[0].projector();
        let unit = single[0].coeffs().unscale(single[0].coeffs().norm());
        let proj = &unit * unit.adjoint();
        assert!((povm.elements[0].matrix() - &proj).norm() < 1e-9);
        let _ = p;
    }

    #[test]
    fn finite_support_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random::density(&mut rng, 4, 2, 0.0);
        let id = FockOperator::from_number_basis(CMatrix::identity(5, 5), 4, 1).unwrap();
        assert!(check_finite_support_lemma(&id, &rho, &rho).unwrap());
        let zero = FockOperator::from_number_basis(CMatrix::zeros(5, 5), 4, 1).unwrap();
        let sigma = random::density(&mut rng, 4, 5, 0.0);
        assert!(check_finite_support_lemma(&zero, &rho, &sigma).unwrap());
        for _ in 0..100 {
            let l = random::effect(&mut rng, 4);
            let (k1, k2) = (1 + rng.random_range(0..5), 1 + rng.random_range(0..5));
            let r = random::density(&mut rng, 4, k1, 0.3);
            let s = random::density(&mut rng, 4, k2, 0.3);
            assert!(check_finite_support_lemma(&l, &r, &s).unwrap());
        }
        let too_big =
            FockOperator::from_number_basis(CMatrix::identity(5, 5).scale(2.0), 4, 1).unwrap();
        assert!(matches!(
            check_finite_support_lemma(&too_big, &rho, &rho),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn photon_number_of_coherent_state() {
        let rho = coherent_vector(c(1.2), 60).projector();
        assert_abs_diff_eq!(
            photon_number_expectation(&rho).unwrap(),
            1.44,
            epsilon = 1e-10
        );
    }
}
