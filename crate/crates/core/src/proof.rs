//! Finite-alphabet typicality, pruned code distributions and the finite-n
//! packing / covering guarantees of the random-coding argument.
//!
//! Strong typicality of `x^n` for `p` means `|N(x|x^n)/n - p(x)| <= delta` for
//! every symbol and `N(x|x^n) = 0` whenever `p(x) = 0`. For every such
//! sequence `|-(1/n) log2 p(x^n) - H(p)| <= c delta` with
//! `c = sum_{p(x) > 0} log2(1/p(x))`, which yields
//!
//! ```text
//! (1 - eps) 2^{n(H - c delta)} <= |T_delta| <= 2^{n(H + c delta)}
//! ```
//!
//! whenever `Pr{X^n in T_delta} >= 1 - eps`. [`default_c`] returns that `c`
//! and [`chernoff_eps`] a valid `eps`.

use std::f64::consts::LN_2;

use rand::Rng;

use crate::entropy::{xlog2x_neg, Bits, FiniteDistribution};
use crate::error::{Error, Result};

/// Largest number of sequences (or type classes) enumerated exhaustively.
pub const ENUMERATION_CAP: u128 = 1 << 20;

/// Slack applied to the typicality comparison, relative to `n`.
const COUNT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TypicalityParams {
    n: usize,
    delta: f64,
    eps: f64,
    c: f64,
}

impl TypicalityParams {
    pub fn new(n: usize, delta: f64, eps: f64, c: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("n", "block length must be at least 1"));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::config(
                "delta",
                format!("must be positive, got {delta}"),
            ));
        }
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::config(
                "eps",
                format!("must lie in (0, 1], got {eps}"),
            ));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::config("c", format!("must be positive, got {c}")));
        }
        Ok(Self { n, delta, eps, c })
    }

    /// Parameters with `c` from [`default_c`] and `eps` from [`chernoff_eps`].
    /// `eps = 1` is allowed and makes the lower cardinality bound trivial.
    pub fn for_distribution<S: PartialEq + Clone>(
        p: &FiniteDistribution<S>,
        n: usize,
        delta: f64,
    ) -> Result<Self> {
        let c = default_c(p);
        let eps = chernoff_eps(p.len(), n, delta);
        Self::new(n, delta, eps, if c > 0.0 { c } else { 1.0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

/// `sum_{p(x) > 0} log2(1/p(x))`: the smallest constant for which the
/// per-sequence sample-entropy deviation is bounded by `c delta` for all
/// distributions with this support.
pub fn default_c<S: PartialEq + Clone>(p: &FiniteDistribution<S>) -> f64 {
    p.probs()
        .iter()
        .filter(|&&q| q > 0.0)
        .map(|q| -q.log2())
        .sum()
}

/// Hoeffding plus union bound: `Pr{X^n not in T_delta} <= 2 |X| e^{-2 n delta^2}`.
pub fn chernoff_eps(alphabet: usize, n: usize, delta: f64) -> f64 {
    (2.0 * alphabet as f64 * (-2.0 * n as f64 * delta * delta).exp()).min(1.0)
}

fn counts_are_typical(counts: &[usize], probs: &[f64], n: usize, delta: f64) -> bool {
    let nf = n as f64;
    counts.iter().zip(probs).all(|(&k, &q)| {
        if q == 0.0 {
            k == 0
        } else {
            (k as f64 - nf * q).abs() <= nf * delta + COUNT_TOL * nf
        }
    })
}

fn symbol_indices<S: PartialEq + Clone>(xn: &[S], p: &FiniteDistribution<S>) -> Result<Vec<usize>> {
    xn.iter()
        .enumerate()
        .map(|(i, x)| {
            p.index_of(x).ok_or_else(|| {
                Error::domain(format!("symbol at position {i} is outside the alphabet"))
            })
        })
        .collect()
}

pub fn is_strongly_typical<S: PartialEq + Clone>(
    xn: &[S],
    p: &FiniteDistribution<S>,
    params: &TypicalityParams,
) -> Result<bool> {
    if xn.is_empty() {
        return Err(Error::domain("empty sequence"));
    }
    let mut counts = vec![0usize; p.len()];
    for i in symbol_indices(xn, p)? {
        counts[i] += 1;
    }
    Ok(counts_are_typical(
        &counts,
        p.probs(),
        xn.len(),
        params.delta,
    ))
}

/// Cardinality bounds evaluated for one `(n, delta, eps, c)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CardinalityCheck {
    pub c: f64,
    pub eps: f64,
    pub log2_lower: f64,
    pub log2_upper: f64,
    pub log2_size: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    /// `Pr{X^n in T} >= 1 - eps`.
    pub mass_ok: bool,
}

impl CardinalityCheck {
    fn new(entropy: f64, params: &TypicalityParams, size: f64, mass: f64) -> Self {
        let n = params.n as f64;
        let spread = params.c * params.delta;
        let log2_lower = (1.0 - params.eps).log2() + n * (entropy - spread);
        let log2_upper = n * (entropy + spread);
        let log2_size = size.log2();
        let slack = 1e-9 * n.max(1.0);
        Self {
            c: params.c,
            eps: params.eps,
            log2_lower,
            log2_upper,
            log2_size,
            lower_ok: log2_size >= log2_lower - slack,
            upper_ok: log2_size <= log2_upper + slack,
            mass_ok: mass >= 1.0 - params.eps - 1e-12,
        }
    }

    pub fn holds(&self) -> bool {
        self.lower_ok && self.upper_ok
    }
}

/// Exhaustively enumerated typical set. Sequences are stored as symbol
/// indices, `n` per sequence.
#[derive(Clone, Debug)]
pub struct TypicalSet<S> {
    dist: FiniteDistribution<S>,
    params: TypicalityParams,
    indices: Vec<u16>,
    probs: Vec<f64>,
}

impl<S: PartialEq + Clone> TypicalSet<S> {
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn params(&self) -> &TypicalityParams {
        &self.params
    }

    pub fn sequence(&self, i: usize) -> Vec<S> {
        let n = self.params.n;
        self.indices[i * n..(i + 1) * n]
            .iter()
            .map(|&k| self.dist.symbols()[k as usize].clone())
            .collect()
    }

    /// `p(x^n)` of the i-th sequence under the i.i.d. source.
    pub fn source_prob(&self, i: usize) -> f64 {
        self.probs[i]
    }

    /// `Pr{X^n in T_delta}`.
    pub fn mass(&self) -> f64 {
        compensated_sum(self.probs.iter().copied())
    }

    pub fn cardinality_check(&self) -> CardinalityCheck {
        CardinalityCheck::new(
            self.dist.entropy().value(),
            &self.params,
            self.len() as f64,
            self.mass(),
        )
    }
}

fn check_enumeration(alphabet: usize, n: usize) -> Result<()> {
    let requested = (alphabet as u128)
        .checked_pow(n as u32)
        .unwrap_or(u128::MAX);
    if requested > ENUMERATION_CAP {
        return Err(Error::Resource {
            what: "typical-set enumeration",
            requested,
            cap: ENUMERATION_CAP,
        });
    }
    if alphabet > u16::MAX as usize {
        return Err(Error::Unsupported(
            "alphabet larger than 65535 symbols".into(),
        ));
    }
    Ok(())
}

pub fn typical_set<S: PartialEq + Clone>(
    p: &FiniteDistribution<S>,
    params: &TypicalityParams,
) -> Result<TypicalSet<S>> {
    let (k, n) = (p.len(), params.n);
    check_enumeration(k, n)?;
    let probs = p.probs();
    let mut digits = vec![0usize; n];
    let mut counts = vec![0usize; k];
    counts[0] = n;
    let mut indices = Vec::new();
    let mut seq_probs = Vec::new();
    let total = k.pow(n as u32);
    for step in 0..total {
        if counts_are_typical(&counts, probs, n, params.delta) {
            indices.extend(digits.iter().map(|&d| d as u16));
            seq_probs.push(
                counts
                    .iter()
                    .zip(probs)
                    .map(|(&c, &q)| if c == 0 { 1.0 } else { q.powi(c as i32) })
                    .product(),
            );
        }
        if step + 1 == total {
            break;
        }
        // odometer increment, last position fastest
        for pos in (0..n).rev() {
            counts[digits[pos]] -= 1;
            digits[pos] = (digits[pos] + 1) % k;
            counts[digits[pos]] += 1;
            if digits[pos] != 0 {
                break;
            }
        }
    }
    Ok(TypicalSet {
        dist: p.clone(),
        params: *params,
        indices,
        probs: seq_probs,
    })
}

/// Size and probability of the typical set computed from type classes rather
/// than sequences; usable well beyond the sequence enumeration cap.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TypeSummary {
    /// `|T_delta|`, exact while it fits in a `u128`.
    pub exact_count: Option<u128>,
    pub count: f64,
    pub mass: f64,
    pub typical_types: usize,
}

fn ln_factorial(n: usize) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

fn multinomial_exact(counts: &[usize]) -> Option<u128> {
    let mut acc: u128 = 1;
    let mut seen: u128 = 0;
    for &k in counts {
        for j in 1..=k as u128 {
            seen += 1;
            acc = acc.checked_mul(seen)? / j;
        }
    }
    Some(acc)
}

pub fn typical_types<S: PartialEq + Clone>(
    p: &FiniteDistribution<S>,
    params: &TypicalityParams,
) -> Result<TypeSummary> {
    let probs = p.probs();
    let support: Vec<usize> = (0..p.len()).filter(|&i| probs[i] > 0.0).collect();
    let n = params.n;
    let parts = support.len();
    let compositions = binomial_f64(n + parts - 1, parts - 1);
    if compositions > ENUMERATION_CAP as f64 {
        return Err(Error::Resource {
            what: "type-class enumeration",
            requested: compositions as u128,
            cap: ENUMERATION_CAP,
        });
    }
    let mut summary = TypeSummary {
        exact_count: Some(0),
        count: 0.0,
        mass: 0.0,
        typical_types: 0,
    };
    let mut counts = vec![0usize; p.len()];
    let mut composition = vec![0usize; parts];
    visit_compositions(n, 0, &mut composition, &mut |comp| {
        for (slot, &i) in support.iter().enumerate() {
            counts[i] = comp[slot];
        }
        if !counts_are_typical(&counts, probs, n, params.delta) {
            return;
        }
        let ln_multi = ln_factorial(n) - comp.iter().map(|&k| ln_factorial(k)).sum::<f64>();
        let ln_p: f64 = support
            .iter()
            .zip(comp)
            .map(|(&i, &k)| k as f64 * probs[i].ln())
            .sum();
        summary.typical_types += 1;
        summary.count += ln_multi.exp();
        summary.mass += (ln_multi + ln_p).exp();
        summary.exact_count = summary
            .exact_count
            .zip(multinomial_exact(comp))
            .and_then(|(a, b)| a.checked_add(b));
    });
    Ok(summary)
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k))
        .exp()
        .round()
}

fn visit_compositions(left: usize, slot: usize, comp: &mut [usize], f: &mut impl FnMut(&[usize])) {
    if slot + 1 == comp.len() {
        comp[slot] = left;
        f(comp);
        return;
    }
    for k in 0..=left {
        comp[slot] = k;
        visit_compositions(left - k, slot + 1, comp, f);
    }
}

/// The source restricted to `T_delta` and renormalized by
/// `xi = Pr{X^n in T_delta}`.
#[derive(Clone, Debug)]
pub struct PrunedDistribution<S> {
    set: TypicalSet<S>,
    xi: f64,
}

impl<S: PartialEq + Clone> PrunedDistribution<S> {
    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    pub fn sequence(&self, i: usize) -> Vec<S> {
        self.set.sequence(i)
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.set.probs[i] / self.xi
    }

    pub fn total(&self) -> f64 {
        compensated_sum((0..self.len()).map(|i| self.prob(i)))
    }

    /// Entropy of the pruned block distribution, in bits per block.
    pub fn entropy(&self) -> Bits {
        Bits::from_computed((0..self.len()).map(|i| xlog2x_neg(self.prob(i))).sum())
    }

    pub fn entropy_per_symbol(&self) -> f64 {
        self.entropy().value() / self.set.params.n as f64
    }
}

/// Neumaier summation.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + comp
}

pub fn pruned_distribution<S: PartialEq + Clone>(
    p: &FiniteDistribution<S>,
    params: &TypicalityParams,
) -> Result<PrunedDistribution<S>> {
    let set = typical_set(p, params)?;
    if set.is_empty() {
        return Err(Error::Degenerate(format!(
            "no sequence of length {} is {}-typical",
            params.n, params.delta
        )));
    }
    let xi = set.mass();
    Ok(PrunedDistribution { set, xi })
}

/// Draws one sequence from the pruned distribution by rejection sampling from
/// the i.i.d. source. Each symbol consumes one `f64` draw from `rng`.
pub fn sample_pruned<S: PartialEq + Clone, R: Rng + ?Sized>(
    rng: &mut R,
    p: &FiniteDistribution<S>,
    params: &TypicalityParams,
    max_attempts: usize,
) -> Result<Vec<S>> {
    if typical_types(p, params)?.typical_types == 0 {
        return Err(Error::Degenerate(format!(
            "no sequence of length {} is {}-typical",
            params.n, params.delta
        )));
    }
    let mut cdf = Vec::with_capacity(p.len());
    let mut acc = 0.0;
    for &q in p.probs() {
        acc += q;
        cdf.push(acc);
    }
    let last_nonzero = p.probs().iter().rposition(|&q| q > 0.0).unwrap_or(0);
    let mut counts = vec![0usize; p.len()];
    let mut draw = vec![0usize; params.n];
    for _ in 0..max_attempts {
        counts.iter_mut().for_each(|c| *c = 0);
        for slot in draw.iter_mut() {
            let u: f64 = rng.random();
            let i = cdf.iter().position(|&c| u < c).unwrap_or(last_nonzero);
            *slot = i;
            counts[i] += 1;
        }
        if counts_are_typical(&counts, p.probs(), params.n, params.delta) {
            return Ok(draw.iter().map(|&i| p.symbols()[i].clone()).collect());
        }
    }
    Err(Error::Resource {
        what: "rejection-sampling attempts",
        requested: max_attempts as u128 + 1,
        cap: max_attempts as u128,
    })
}

/// Typical-subspace dimension for a density operator with the given spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubspaceDims {
    pub dimension: u128,
    pub c: f64,
    pub log2_bound: f64,
    /// `dimension <= 2^{n(S + c delta)}`.
    pub within_bound: bool,
}

/// The typical projector is diagonal in the eigenbasis; its rank is the number
/// of eigenvalue-index sequences typical for the spectrum.
pub fn typical_subspace_dims(
    spectrum: &FiniteDistribution<usize>,
    params: &TypicalityParams,
) -> Result<SubspaceDims> {
    let summary = typical_types(spectrum, params)?;
    let dimension = summary.exact_count.ok_or(Error::Resource {
        what: "typical-subspace dimension",
        requested: u128::MAX,
        cap: u128::MAX - 1,
    })?;
    let log2_bound = params.n as f64 * (spectrum.entropy().value() + params.c * params.delta);
    Ok(SubspaceDims {
        dimension,
        c: params.c,
        log2_bound,
        within_bound: (dimension as f64).log2() <= log2_bound + 1e-9,
    })
}

/// Parameter choices of the achievability proof for a pure-state code
/// (`d = d~ = 1`). Sizes are carried as base-2 logarithms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProofParams {
    pub n: usize,
    pub s_sigma: Bits,
    pub s_sigma_tilde: Bits,
    pub eps: f64,
    pub eps_prime: f64,
    pub c_prime: f64,
    pub delta: f64,
    pub log2_messages: f64,
    pub log2_fake: f64,
}

impl ProofParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("n", "block length must be at least 1"));
        }
        for (field, v) in [("eps", self.eps), ("eps_prime", self.eps_prime)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::config(field, format!("must lie in [0, 1), got {v}")));
            }
        }
        if !(self.c_prime >= 0.0 && self.delta >= 0.0) {
            return Err(Error::config(
                "delta",
                "slack constants must be nonnegative",
            ));
        }
        if !(self.log2_messages >= 0.0 && self.log2_fake >= 0.0) {
            return Err(Error::config("sizes", "code sizes must be at least 1"));
        }
        if self.log2_d() <= 0.0 {
            return Err(Error::config(
                "s_sigma",
                format!("need 0 < d < D, got log2 D = {}", self.log2_d()),
            ));
        }
        Ok(())
    }

    /// `log2 D = log2(1 - eps') + n (S(sigma) - c' delta)`.
    pub fn log2_d(&self) -> f64 {
        (1.0 - self.eps_prime).log2()
            + self.n as f64 * (self.s_sigma.value() - self.c_prime * self.delta)
    }

    /// `log2 D~ = n (S(sigma~) + delta)`.
    pub fn log2_d_tilde(&self) -> f64 {
        self.n as f64 * (self.s_sigma_tilde.value() + self.delta)
    }

    pub fn d(&self) -> f64 {
        1.0
    }
}

/// A bound value together with whether it says anything.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundValue {
    pub value: f64,
    /// Base-2 log of the size-dependent penalty term.
    pub log2_penalty: f64,
    pub vacuous: bool,
}

/// Expected success guarantee
/// `1 - 6 sqrt(eps) - 4 |M||L| / (1 - eps') 2^{-n(S(sigma) - c' delta)}`.
pub fn packing_bound(p: &ProofParams) -> Result<BoundValue> {
    p.validate()?;
    let log2_penalty = 2.0 + p.log2_messages + p.log2_fake - p.log2_d();
    let value = 1.0 - 6.0 * p.eps.sqrt() - log2_penalty.exp2();
    Ok(BoundValue {
        value,
        log2_penalty,
        vacuous: value <= 0.0,
    })
}

/// [`packing_bound`] less the `1/n` truncation allowance.
pub fn packing_bound_truncated(p: &ProofParams) -> Result<BoundValue> {
    let mut b = packing_bound(p)?;
    b.value -= 1.0 / p.n as f64;
    b.vacuous = b.value <= 0.0;
    Ok(b)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoveringBound {
    /// `30 eps^{1/4}` plus any slack requested.
    pub distance: f64,
    pub distance_vacuous: bool,
    /// Natural log of `2 D~ exp(-eps^3 |L| / (4 D~))`.
    pub ln_failure: f64,
    pub failure_vacuous: bool,
}

impl CoveringBound {
    /// Failure probability; underflows to zero below ~1e-308, see `ln_failure`.
    pub fn failure(&self) -> f64 {
        self.ln_failure.exp()
    }

    pub fn log10_failure(&self) -> f64 {
        self.ln_failure / std::f64::consts::LN_10
    }
}

/// Covering guarantee with `d = 1` for `|L| = 2^log2_fake` states whose
/// average has typical dimension `D~ = 2^log2_d_tilde`.
pub fn covering_bound(eps: f64, log2_fake: f64, log2_d_tilde: f64) -> Result<CoveringBound> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::config(
            "eps",
            format!("must lie in (0, 1), got {eps}"),
        ));
    }
    if log2_fake.is_nan() || log2_fake < 0.0 {
        return Err(Error::config("l_size", "must be at least 1"));
    }
    if !log2_d_tilde.is_finite() {
        return Err(Error::config("d_tilde", "must be positive and finite"));
    }
    let distance = 30.0 * eps.powf(0.25);
    let ratio = (log2_fake - log2_d_tilde).exp2();
    let ln_failure = LN_2 * (1.0 + log2_d_tilde) - eps.powi(3) * ratio / 4.0;
    Ok(CoveringBound {
        distance,
        distance_vacuous: distance > 2.0,
        ln_failure,
        failure_vacuous: ln_failure >= 0.0,
    })
}

/// [`covering_bound`] with the `1/n` truncation allowance on the distance.
pub fn covering_bound_truncated(
    eps: f64,
    log2_fake: f64,
    log2_d_tilde: f64,
    n: usize,
) -> Result<CoveringBound> {
    let mut b = covering_bound(eps, log2_fake, log2_d_tilde)?;
    b.distance += 1.0 / n.max(1) as f64;
    b.distance_vacuous = b.distance > 2.0;
    Ok(b)
}

/// `S(rho_bob) - max S(rho_eve)`; may be negative.
pub fn achievable_rate(s_bob: Bits, s_eve_worst: Bits) -> f64 {
    s_bob.value() - s_eve_worst.value()
}
