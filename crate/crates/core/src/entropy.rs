//! Scalar information measures in bits.
//!
//! Everything here is a pure function of its arguments. Logarithms are base 2
//! and `0 log 0 = 0`, so `h(0) = h(1) = 0`.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A probability in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::domain(format!("probability {value} outside [0, 1]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// An entropy or information quantity in bits. Never negative.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bits(f64);

impl Bits {
    pub const ZERO: Bits = Bits(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if value >= 0.0 {
            Ok(Self(value))
        } else {
            Err(Error::domain(format!("entropy {value} is negative")))
        }
    }

    /// Rounding noise from spectral sums can leave values like `-1e-17`;
    /// those are snapped to zero.
    pub(crate) fn from_computed(value: f64) -> Self {
        debug_assert!(value > -1e-9, "computed entropy {value} is negative");
        Self(value.max(0.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Bits> for f64 {
    fn from(b: Bits) -> f64 {
        b.0
    }
}

/// Mean photon number of a (coherent) state.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PhotonNumber(f64);

impl PhotonNumber {
    pub fn new(value: f64) -> Result<Self> {
        if value >= 0.0 && value.is_finite() {
            Ok(Self(value))
        } else {
            Err(Error::domain(format!(
                "photon number {value} must be finite and non-negative"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for PhotonNumber {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PhotonNumber> for f64 {
    fn from(n: PhotonNumber) -> f64 {
        n.0
    }
}

/// `-x log2 x` with the continuity convention at zero.
#[inline]
pub(crate) fn xlog2x_neg(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// Below this bias `|1 - 2p|` the binary entropy is summed as a power series.
const SERIES_BIAS: f64 = 0.2;

/// `h((1 - u) / 2)` for a bias `u` in `[0, 1]`.
///
/// Near `u = 0` uses `1 - (1/ln 2) sum_k u^{2k} / (2k (2k - 1))`, which has no
/// cancellation; elsewhere the direct formula on the smaller branch.
#[inline]
pub(crate) fn h2_from_bias(u: f64) -> f64 {
    let u = u.abs();
    if u >= 1.0 {
        return 0.0;
    }
    if u < SERIES_BIAS {
        let u2 = u * u;
        let mut pow = u2;
        let mut sum = 0.0;
        for k in 1..=24 {
            let k2 = 2.0 * k as f64;
            sum += pow / (k2 * (k2 - 1.0));
            pow *= u2;
            if pow < 1e-18 * sum {
                break;
            }
        }
        return 1.0 - sum / LN_2;
    }
    let lo = (1.0 - u) / 2.0;
    (-lo * lo.ln() - (1.0 - lo) * (-lo).ln_1p()) / LN_2
}

/// Raw binary entropy, assumes `p` in `[0, 1]`.
#[inline]
pub(crate) fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    let u = (1.0 - 2.0 * p).abs();
    if u < SERIES_BIAS {
        return h2_from_bias(u);
    }
    // Same code path for p and 1 - p; ln_1p keeps (1-lo) ln(1-lo) accurate
    // for small lo.
    let lo = p.min(1.0 - p);
    (-lo * lo.ln() - (1.0 - lo) * (-lo).ln_1p()) / LN_2
}

/// Binary entropy `h(p) = -p log p - (1-p) log(1-p)`.
pub fn binary_entropy(p: Probability) -> Bits {
    Bits::from_computed(h2(p.value()))
}

/// Entropy of the equiprobable ensemble `{|a>, |-a>}` with `|a|^2 = nbar`,
/// i.e. `h(cosh(nbar) e^{-nbar})`.
///
/// The average state has eigenvalues `(1 +- e^{-2 nbar}) / 2`, so this is
/// evaluated from the bias `e^{-2 nbar}` directly: no overflow for large
/// `nbar` and no cancellation as the entropy approaches one bit.
pub fn h_bpsk(nbar: PhotonNumber) -> Bits {
    Bits::from_computed(h2_from_bias((-2.0 * nbar.value()).exp()))
}

/// `h(cosh(x) e^{-x})` evaluated literally. Overflows for `x` beyond ~710.
pub fn h_bpsk_cosh_form(x: f64) -> f64 {
    h2(x.cosh() * (-x).exp())
}

/// `h((1 + e^{-2x}) / 2)` evaluated literally.
pub fn h_bpsk_half_form(x: f64) -> f64 {
    h2((1.0 + (-2.0 * x).exp()) / 2.0)
}

/// Bit error probability of homodyne detection on BPSK coherent states of mean
/// photon number `nbar`: `P = (1 - erf(sqrt(2 nbar))) / 2`.
pub fn homodyne_error(nbar: PhotonNumber) -> Probability {
    // erfc avoids the cancellation in 1 - erf for large arguments.
    Probability(0.5 * libm::erfc((2.0 * nbar.value()).sqrt()))
}

/// Continuity bound `h(eps) + E h(eps / E)` on the entropy difference of two
/// states with mean photon number at most `E` and trace distance at most `eps`.
///
/// Valid for `0 <= eps <= E / (1 + E)`.
pub fn entropy_continuity_bound(eps: Probability, energy: PhotonNumber) -> Result<Bits> {
    let (eps, e) = (eps.value(), energy.value());
    let limit = e / (1.0 + e);
    if eps > limit {
        return Err(Error::domain(format!(
            "trace distance {eps} exceeds the validity bound E/(1+E) = {limit}"
        )));
    }
    if eps == 0.0 {
        return Ok(Bits::ZERO);
    }
    Ok(Bits::from_computed(h2(eps) + e * h2(eps / e)))
}

/// A probability distribution on a finite alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteDistribution<S> {
    symbols: Vec<S>,
    probs: Vec<f64>,
}

impl<S: PartialEq + Clone> FiniteDistribution<S> {
    pub fn new(symbols: Vec<S>, probs: Vec<f64>) -> Result<Self> {
        if symbols.len() != probs.len() {
            return Err(Error::Shape {
                expected: symbols.len(),
                found: probs.len(),
            });
        }
        if symbols.is_empty() {
            return Err(Error::Validation("empty alphabet".into()));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(Error::Validation(format!("duplicate symbol at index {i}")));
            }
        }
        if let Some(bad) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Validation(format!(
                "probability {bad} outside [0, 1]"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self { symbols, probs })
    }

    pub fn uniform(symbols: Vec<S>) -> Result<Self> {
        let k = symbols.len().max(1);
        let probs = vec![1.0 / k as f64; symbols.len()];
        Self::new(symbols, probs)
    }

    pub fn symbols(&self) -> &[S] {
        &self.symbols
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, symbol: &S) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    pub fn prob(&self, symbol: &S) -> Option<f64> {
        self.index_of(symbol).map(|i| self.probs[i])
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> Bits {
        Bits::from_computed(self.probs.iter().map(|&p| xlog2x_neg(p)).sum())
    }
}

/// Sample entropy `-(1/n) log2 p(x^n)` of an i.i.d. sequence.
pub fn sample_entropy<S: PartialEq + Clone>(xn: &[S], p: &FiniteDistribution<S>) -> Result<Bits> {
    if xn.is_empty() {
        return Err(Error::domain("sample entropy of an empty sequence"));
    }
    let mut total = 0.0;
    for (i, x) in xn.iter().enumerate() {
        match p.prob(x) {
            Some(px) if px > 0.0 => total -= px.log2(),
            Some(_) => {
                return Err(Error::domain(format!(
                    "symbol at position {i} has probability zero"
                )))
            }
            None => {
                return Err(Error::domain(format!(
                    "symbol at position {i} is outside the alphabet"
                )))
            }
        }
    }
    Ok(Bits::from_computed(total / xn.len() as f64))
}
