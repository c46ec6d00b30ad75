//! Exact ensemble functionals for multimode coherent states.
//!
//! A pure-state ensemble `{w_i, |psi_i>}` is represented by its weighted Gram
//! matrix `G_ij = sqrt(w_i w_j) <psi_i|psi_j>`. `G` and the average state
//! `sum_i w_i |psi_i><psi_i|` have the same nonzero spectrum, so entropies,
//! square-root-measurement statistics and trace distances can all be computed
//! in dimension `M` instead of in Fock space.

use num_complex::Complex64;

use crate::entropy::{Bits, Probability};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Per-mode coherent amplitudes of an `n`-mode product coherent state.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentLabel {
    amplitudes: Vec<Complex64>,
}

impl CoherentLabel {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Validation(
                "coherent label needs at least one mode".into(),
            ));
        }
        if amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::Validation(
                "coherent label has a non-finite amplitude".into(),
            ));
        }
        Ok(Self { amplitudes })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn vacuum(modes: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); modes])
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn modes(&self) -> usize {
        self.amplitudes.len()
    }

    /// Output of a pure-loss channel with amplitude transmissivity `t`.
    pub fn attenuated(&self, t: f64) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a * t).collect(),
        }
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// `<a|b>` for product coherent states:
/// `prod_k exp(-|a_k|^2/2 - |b_k|^2/2 + conj(a_k) b_k)`.
pub fn coherent_overlap(a: &CoherentLabel, b: &CoherentLabel) -> Result<Complex64> {
    if a.modes() != b.modes() {
        return Err(Error::Shape {
            expected: a.modes(),
            found: b.modes(),
        });
    }
    let exponent: Complex64 = a
        .amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| -0.5 * x.norm_sqr() - 0.5 * y.norm_sqr() + x.conj() * y)
        .sum();
    Ok(exponent.exp())
}

/// Weighted ensemble of product coherent states sharing one mode count.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedEnsemble {
    labels: Vec<CoherentLabel>,
    weights: Vec<f64>,
}

impl WeightedEnsemble {
    pub fn new(labels: Vec<CoherentLabel>, weights: Vec<f64>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Validation("ensemble is empty".into()));
        }
        if labels.len() != weights.len() {
            return Err(Error::Shape {
                expected: labels.len(),
                found: weights.len(),
            });
        }
        let modes = labels[0].modes();
        if let Some(bad) = labels.iter().find(|l| l.modes() != modes) {
            return Err(Error::Shape {
                expected: modes,
                found: bad.modes(),
            });
        }
        if let Some(w) = weights.iter().find(|w| w.is_nan() || **w < 0.0) {
            return Err(Error::Validation(format!("negative or NaN weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { labels, weights })
    }

    pub fn uniform(labels: Vec<CoherentLabel>) -> Result<Self> {
        let w = 1.0 / labels.len().max(1) as f64;
        let weights = vec![w; labels.len()];
        Self::new(labels, weights)
    }

    pub fn labels(&self) -> &[CoherentLabel] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn modes(&self) -> usize {
        self.labels[0].modes()
    }

    pub fn attenuated(&self, t: f64) -> Self {
        Self {
            labels: self.labels.iter().map(|l| l.attenuated(t)).collect(),
            weights: self.weights.clone(),
        }
    }

    /// Same average state with identical labels folded together. Leaves the
    /// average state untouched, so entropies and distances are unchanged, but
    /// discrimination problems are not (use the original for those).
    pub fn merged(&self) -> Self {
        let mut labels: Vec<CoherentLabel> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (l, &w) in self.labels.iter().zip(&self.weights) {
            match labels.iter().position(|x| x == l) {
                Some(i) => weights[i] += w,
                None => {
                    labels.push(l.clone());
                    weights.push(w);
                }
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Self { labels, weights }
    }
}

/// Weighted Gram matrix of an ensemble.
#[derive(Clone, Debug)]
pub struct GramMatrix {
    entries: CMatrix,
    weights: Vec<f64>,
}

impl GramMatrix {
    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.entries)
    }
}

/// Raw overlap matrix `<psi_i|psi_j>` (no weights).
fn overlap_matrix(labels: &[CoherentLabel]) -> Result<CMatrix> {
    let m = labels.len();
    let mut k = CMatrix::zeros(m, m);
    for i in 0..m {
        k[(i, i)] = Complex64::new(1.0, 0.0);
        for j in 0..i {
            let z = coherent_overlap(&labels[i], &labels[j])?;
            k[(i, j)] = z;
            k[(j, i)] = z.conj();
        }
    }
    Ok(k)
}

pub fn build_gram(e: &WeightedEnsemble) -> Result<GramMatrix> {
    let mut g = overlap_matrix(&e.labels)?;
    let roots: Vec<f64> = e.weights.iter().map(|w| w.sqrt()).collect();
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            g[(i, j)] *= roots[i] * roots[j];
        }
    }
    Ok(GramMatrix {
        entries: g,
        weights: e.weights.clone(),
    })
}

/// Von Neumann entropy of the ensemble average state. For pure states this is
/// also the Holevo quantity of the ensemble.
pub fn ensemble_entropy(g: &GramMatrix) -> Result<Bits> {
    linalg::spectral_entropy(&g.eigenvalues())
}

/// Convenience: entropy of the average state of `e`, merging duplicates first.
pub fn average_state_entropy(e: &WeightedEnsemble) -> Result<Bits> {
    ensemble_entropy(&build_gram(&e.merged())?)
}

/// Average success probability of the square-root measurement on an
/// equiprobable ensemble: `sum_i ((sqrt G)_ii)^2`.
pub fn srm_success(g: &GramMatrix) -> Result<Probability> {
    let m = g.dim();
    let w = 1.0 / m as f64;
    if g.weights.iter().any(|x| (x - w).abs() > 1e-12) {
        return Err(Error::Unsupported(
            "square-root measurement success requires equal priors".into(),
        ));
    }
    let root = linalg::psd_sqrt(&g.entries)?;
    let p: f64 = (0..m).map(|i| root[(i, i)].re.powi(2)).sum();
    // Rounding can push p a hair past the valid range.
    Probability::new(p.clamp(0.0, 1.0))
}

/// Trace norm `||rho_1 - rho_2||_1` of the difference of two ensemble averages.
///
/// Both averages are expressed in an orthonormal basis of the span of all
/// labels, obtained from the eigendecomposition of the joint overlap matrix:
/// if `K = U diag(l) U^dagger`, the coordinates of `|psi_j>` are the columns
/// of `diag(sqrt l) U^dagger`.
pub fn average_state_distance(e1: &WeightedEnsemble, e2: &WeightedEnsemble) -> Result<f64> {
    if e1.modes() != e2.modes() {
        return Err(Error::Shape {
            expected: e1.modes(),
            found: e2.modes(),
        });
    }
    let a = e1.merged();
    let b = e2.merged();

    // Union of labels with the signed weight difference on each.
    let mut labels: Vec<CoherentLabel> = a.labels.clone();
    let mut diff: Vec<f64> = a.weights.clone();
    for (l, &w) in b.labels.iter().zip(&b.weights) {
        match labels.iter().position(|x| x == l) {
            Some(i) => diff[i] -= w,
            None => {
                labels.push(l.clone());
                diff.push(-w);
            }
        }
    }

    let k = overlap_matrix(&labels)?;
    let (eigs, vecs) = linalg::hermitian_eigen(&k);
    let eigs = linalg::clamp_spectrum(&eigs)?;
    let kept: Vec<usize> = (0..eigs.len()).filter(|&i| eigs[i] > 0.0).collect();

    // coords is r x K with column j the coordinates of label j.
    let r = kept.len();
    let n = labels.len();
    let mut coords = CMatrix::zeros(r, n);
    for (row, &i) in kept.iter().enumerate() {
        let s = eigs[i].sqrt();
        for j in 0..n {
            coords[(row, j)] = vecs[(j, i)].conj() * s;
        }
    }
    let scaled = linalg::scale_columns(&coords, &diff);
    let delta = scaled * coords.adjoint();
    Ok(linalg::trace_norm(&delta).min(2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{h_bpsk, PhotonNumber};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn real(a: &[f64]) -> CoherentLabel {
        CoherentLabel::from_real(a).unwrap()
    }

    fn bpsk_pair(nbar: f64) -> WeightedEnsemble {
        let a = nbar.sqrt();
        WeightedEnsemble::uniform(vec![real(&[a]), real(&[-a])]).unwrap()
    }

    #[test]
    fn overlap_examples() {
        let a = CoherentLabel::new(vec![Complex64::new(0.3, -1.2)]).unwrap();
        assert_abs_diff_eq!(coherent_overlap(&a, &a).unwrap().re, 1.0, epsilon = 1e-15);
        let e: f64 = 0.7;
        let z = coherent_overlap(&real(&[e.sqrt()]), &real(&[-e.sqrt()])).unwrap();
        assert_abs_diff_eq!(z.re, (-2.0 * e).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(z.im, 0.0);
        let two =
            CoherentLabel::new(vec![Complex64::new(0.5, 0.1), Complex64::new(-1.0, 2.0)]).unwrap();
        assert_abs_diff_eq!(
            coherent_overlap(&two, &two).unwrap().re,
            1.0,
            epsilon = 1e-14
        );
        assert!(matches!(
            coherent_overlap(&two, &a),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn overlap_has_modulus_at_most_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let mk = |rng: &mut ChaCha8Rng| {
                CoherentLabel::new(
                    (0..3)
                        .map(|_| {
                            Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))
                        })
                        .collect(),
                )
                .unwrap()
            };
            let (a, b) = (mk(&mut rng), mk(&mut rng));
            assert!(coherent_overlap(&a, &b).unwrap().norm() <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn gram_examples() {
        let g = build_gram(&WeightedEnsemble::uniform(vec![real(&[0.4])]).unwrap()).unwrap();
        assert_eq!(g.dim(), 1);
        assert_abs_diff_eq!(g.entries()[(0, 0)].re, 1.0);

        let e = 1.3f64;
        let g = build_gram(&bpsk_pair(e)).unwrap();
        assert_abs_diff_eq!(g.entries()[(0, 0)].re, 0.5);
        assert_abs_diff_eq!(
            g.entries()[(0, 1)].re,
            0.5 * (-2.0 * e).exp(),
            epsilon = 1e-16
        );

        let same = WeightedEnsemble::uniform(vec![real(&[1.0, 2.0]); 4]).unwrap();
        let g = build_gram(&same).unwrap();
        for z in g.entries().iter() {
            assert_abs_diff_eq!(z.re, 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn ensemble_rejects_bad_weights() {
        let r = WeightedEnsemble::new(vec![real(&[0.0]), real(&[1.0])], vec![0.5, 0.6]);
        assert!(matches!(r, Err(Error::Validation(_))));
        let r = WeightedEnsemble::new(vec![real(&[0.0]), real(&[1.0, 0.0])], vec![0.5, 0.5]);
        assert!(matches!(r, Err(Error::Shape { .. })));
    }

    #[test]
    fn entropy_examples() {
        for nbar in [0.1, 0.5, 1.0, 2.0, 5.0] {
            let s = ensemble_entropy(&build_gram(&bpsk_pair(nbar)).unwrap()).unwrap();
            let expect = h_bpsk(PhotonNumber::new(nbar).unwrap()).value();
            assert_abs_diff_eq!(s.value(), expect, epsilon = 1e-10);
        }
        // far-apart amplitudes are orthogonal to machine precision
        let far =
            WeightedEnsemble::uniform((0..4).map(|k| real(&[20.0 * k as f64])).collect()).unwrap();
        assert_abs_diff_eq!(
            ensemble_entropy(&build_gram(&far).unwrap())
                .unwrap()
                .value(),
            2.0,
            epsilon = 1e-12
        );
        let same = WeightedEnsemble::uniform(vec![real(&[0.8]); 5]).unwrap();
        assert_abs_diff_eq!(
            ensemble_entropy(&build_gram(&same).unwrap())
                .unwrap()
                .value(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn srm_examples() {
        for e in [0.1, 0.5, 1.0, 2.0] {
            let gamma = (-2.0f64 * e).exp();
            let p = srm_success(&build_gram(&bpsk_pair(e)).unwrap()).unwrap();
            assert_abs_diff_eq!(
                p.value(),
                0.5 * (1.0 + (1.0 - gamma * gamma).sqrt()),
                epsilon = 1e-12
            );
        }
        let far =
            WeightedEnsemble::uniform((0..3).map(|k| real(&[20.0 * k as f64])).collect()).unwrap();
        assert_abs_diff_eq!(
            srm_success(&build_gram(&far).unwrap()).unwrap().value(),
            1.0,
            epsilon = 1e-12
        );
        let same = WeightedEnsemble::uniform(vec![real(&[0.8]); 4]).unwrap();
        assert_abs_diff_eq!(
            srm_success(&build_gram(&same).unwrap()).unwrap().value(),
            0.25,
            epsilon = 1e-12
        );

        let skewed =
            WeightedEnsemble::new(vec![real(&[0.0]), real(&[1.0])], vec![0.3, 0.7]).unwrap();
        assert!(matches!(
            srm_success(&build_gram(&skewed).unwrap()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn distance_examples() {
        let e = bpsk_pair(0.9);
        assert_abs_diff_eq!(
            average_state_distance(&e, &e).unwrap(),
            0.0,
            epsilon = 1e-14
        );

        let psi = WeightedEnsemble::uniform(vec![real(&[0.0])]).unwrap();
        let phi = WeightedEnsemble::uniform(vec![real(&[30.0])]).unwrap();
        assert_abs_diff_eq!(
            average_state_distance(&psi, &phi).unwrap(),
            2.0,
            epsilon = 1e-12
        );

        // Two pure states: ||psi - phi||_1 = 2 sqrt(1 - |<psi|phi>|^2).
        let a = WeightedEnsemble::uniform(vec![real(&[1.0])]).unwrap();
        let b = WeightedEnsemble::uniform(vec![real(&[-0.5])]).unwrap();
        let ov = (-0.5f64 * 1.5 * 1.5).exp();
        assert_abs_diff_eq!(
            average_state_distance(&a, &b).unwrap(),
            2.0 * (1.0 - ov * ov).sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn gram_eigenvalues_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let labels: Vec<_> = (0..6)
                .map(|_| real(&[rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)]))
                .collect();
            let g = build_gram(&WeightedEnsemble::uniform(labels).unwrap()).unwrap();
            let total: f64 = g.eigenvalues().iter().sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn merged_keeps_average_state() {
        let e = WeightedEnsemble::uniform(vec![real(&[0.5]), real(&[-0.5]), real(&[0.5])]).unwrap();
        let m = e.merged();
        assert_eq!(m.len(), 2);
        assert_abs_diff_eq!(
            average_state_distance(&e, &m).unwrap(),
            0.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            ensemble_entropy(&build_gram(&e).unwrap()).unwrap().value(),
            ensemble_entropy(&build_gram(&m).unwrap()).unwrap().value(),
            epsilon = 1e-12
        );
    }
}
