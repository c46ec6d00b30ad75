//! Random BPSK wiretap codebooks at desk-scale block length.
//!
//! A codebook holds `M x L` codewords of `n` signs; codeword `(m, l)` is the
//! `n`-mode coherent label `signs * sqrt(E)`. Bob decodes the pair `(m, l)`
//! with the square-root measurement; Eve's information is the Holevo quantity
//! of the message ensemble whose states average over `l`.
//!
//! Sign generation is portable: a `ChaCha8Rng` seeded with
//! `seed_from_u64(seed)` emits one `next_u32` per sign, taken in
//! `(m, l, i)` row-major order, and the sign is `+1` when the top bit of that
//! word is clear. Pruned codebooks redraw the whole codeword (same stream)
//! until it is strongly typical.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::capacity::TransmissivitySet;
use crate::entropy::{Bits, FiniteDistribution, PhotonNumber, Probability};
use crate::error::{Error, Result};
use crate::gram::{
    average_state_distance, average_state_entropy, build_gram, srm_success, CoherentLabel,
    WeightedEnsemble,
};
use crate::proof::{is_strongly_typical, typical_types, TypicalityParams};

/// Most ensemble states accepted by one Gram computation.
pub const STATE_BUDGET: usize = 512;
/// Most signs stored in one codebook.
pub const SIGN_BUDGET: usize = 1 << 24;
/// Redraws allowed per pruned codeword.
const MAX_REDRAWS: usize = 1 << 20;
/// Allowed decrease between neighbouring leakage values.
pub const MONOTONE_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Codebook {
    messages: usize,
    fake: usize,
    n: usize,
    energy: PhotonNumber,
    seed: u64,
    prune: Option<f64>,
    signs: Vec<i8>,
}

impl Codebook {
    pub fn messages(&self) -> usize {
        self.messages
    }

    pub fn fake(&self) -> usize {
        self.fake
    }

    pub fn block_length(&self) -> usize {
        self.n
    }

    pub fn energy(&self) -> PhotonNumber {
        self.energy
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn prune(&self) -> Option<f64> {
        self.prune
    }

    pub fn signs(&self, m: usize, l: usize) -> &[i8] {
        let start = (m * self.fake + l) * self.n;
        &self.signs[start..start + self.n]
    }

    /// The same signs at a different energy.
    pub fn with_energy(&self, energy: PhotonNumber) -> Codebook {
        Codebook {
            energy,
            ..self.clone()
        }
    }

    fn label(&self, m: usize, l: usize, t: f64) -> CoherentLabel {
        let amp = t * self.energy.value().sqrt();
        let a: Vec<f64> = self.signs(m, l).iter().map(|&s| s as f64 * amp).collect();
        CoherentLabel::from_real(&a).expect("finite nonempty amplitudes")
    }

    /// All `M L` codewords after amplitude scaling `t`, in `(m, l)` order.
    pub fn received_labels(&self, t: f64) -> Vec<CoherentLabel> {
        (0..self.messages)
            .flat_map(|m| (0..self.fake).map(move |l| (m, l)))
            .map(|(m, l)| self.label(m, l, t))
            .collect()
    }

    /// The `L` codewords of message `m` after scaling `t`.
    pub fn message_labels(&self, m: usize, t: f64) -> Result<Vec<CoherentLabel>> {
        if m >= self.messages {
            return Err(Error::domain(format!(
                "message index {m} out of range for {} messages",
                self.messages
            )));
        }
        Ok((0..self.fake).map(|l| self.label(m, l, t)).collect())
    }

    fn check_state_budget(&self) -> Result<()> {
        let states = self.messages * self.fake;
        if states > STATE_BUDGET {
            return Err(Error::Resource {
                what: "ensemble states",
                requested: states as u128,
                cap: STATE_BUDGET as u128,
            });
        }
        Ok(())
    }
}

fn next_sign(rng: &mut ChaCha8Rng) -> i8 {
    if rng.next_u32() >> 31 == 0 {
        1
    } else {
        -1
    }
}

fn sign_source() -> FiniteDistribution<i8> {
    FiniteDistribution::uniform(vec![1, -1]).expect("two symbols")
}

pub fn sample_codebook(
    messages: usize,
    fake: usize,
    n: usize,
    energy: PhotonNumber,
    seed: u64,
    prune: Option<f64>,
) -> Result<Codebook> {
    for (field, v) in [("messages", messages), ("fake", fake), ("n", n)] {
        if v == 0 {
            return Err(Error::config(field, "must be at least 1"));
        }
    }
    let total = messages
        .checked_mul(fake)
        .and_then(|x| x.checked_mul(n))
        .unwrap_or(usize::MAX);
    if total > SIGN_BUDGET {
        return Err(Error::Resource {
            what: "codebook signs",
            requested: total as u128,
            cap: SIGN_BUDGET as u128,
        });
    }
    let typicality = match prune {
        Some(delta) => {
            let source = sign_source();
            let params = TypicalityParams::new(n, delta, 0.5, 2.0)?;
            if typical_types(&source, &params)?.typical_types == 0 {
                return Err(Error::Degenerate(format!(
                    "no sign sequence of length {n} is {delta}-typical"
                )));
            }
            Some((source, params))
        }
        None => None,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut signs = Vec::with_capacity(total);
    let mut word = vec![0i8; n];
    for _ in 0..messages * fake {
        let mut redraws = 0;
        loop {
            word.iter_mut().for_each(|s| *s = next_sign(&mut rng));
            match &typicality {
                None => break,
                Some((source, params)) => {
                    if is_strongly_typical(&word, source, params)? {
                        break;
                    }
                }
            }
            redraws += 1;
            if redraws >= MAX_REDRAWS {
                return Err(Error::Resource {
                    what: "codeword redraws",
                    requested: redraws as u128 + 1,
                    cap: MAX_REDRAWS as u128,
                });
            }
        }
        signs.extend_from_slice(&word);
    }
    Ok(Codebook {
        messages,
        fake,
        n,
        energy,
        seed,
        prune,
        signs,
    })
}

/// SRM success for decoding `(m, l)` from the channel output at amplitude
/// transmissivity `tau`.
pub fn success_probability(cb: &Codebook, tau: f64) -> Result<Probability> {
    check_transmissivity("tau", tau)?;
    cb.check_state_budget()?;
    let e = WeightedEnsemble::uniform(cb.received_labels(tau))?;
    srm_success(&build_gram(&e)?)
}

/// Compound variant; only a fixed Bob channel is supported.
pub fn success_probability_compound(
    cb: &Codebook,
    taus: &TransmissivitySet,
) -> Result<Probability> {
    taus.validate("tau_set")?;
    if !taus.is_singleton() {
        return Err(Error::Unsupported(
            "code simulation needs a single Bob transmissivity".into(),
        ));
    }
    success_probability(cb, taus.candidates()[0])
}

fn check_transmissivity(field: &str, t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::config(field, format!("must lie in [0, 1], got {t}")));
    }
    Ok(())
}

/// Holevo quantity `S(rho_all) - (1/M) sum_m S(rho_m)` of Eve's message
/// ensemble, where `rho_m` averages the `L` codewords of message `m`.
pub fn leakage(cb: &Codebook, eta: f64) -> Result<Bits> {
    check_transmissivity("eta", eta)?;
    cb.check_state_budget()?;
    let all = average_state_entropy(&WeightedEnsemble::uniform(cb.received_labels(eta))?)?;
    let mut conditional = 0.0;
    for m in 0..cb.messages {
        let e = WeightedEnsemble::uniform(cb.message_labels(m, eta)?)?;
        conditional += average_state_entropy(&e)?.value();
    }
    Ok(Bits::from_computed(
        all.value() - conditional / cb.messages as f64,
    ))
}

/// `||rho_all - rho_m||_1` at Eve's output.
pub fn covering_distance(cb: &Codebook, eta: f64, m: usize) -> Result<f64> {
    check_transmissivity("eta", eta)?;
    cb.check_state_budget()?;
    let fake = WeightedEnsemble::uniform(cb.message_labels(m, eta)?)?;
    let all = WeightedEnsemble::uniform(cb.received_labels(eta))?;
    average_state_distance(&all, &fake)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WiretapCodeReport {
    pub success: f64,
    pub leakage_bits: f64,
    pub covering_distance: f64,
    pub tau: f64,
    pub eta: f64,
    pub messages: usize,
    pub fake: usize,
    pub n: usize,
    pub energy: f64,
    pub seed: u64,
}

/// One full evaluation: success at `tau`, leakage at `eta` and the covering
/// distance averaged over messages.
pub fn evaluate(cb: &Codebook, tau: f64, eta: f64) -> Result<WiretapCodeReport> {
    let success = success_probability(cb, tau)?;
    let leak = leakage(cb, eta)?;
    let mut dist = 0.0;
    for m in 0..cb.messages {
        dist += covering_distance(cb, eta, m)?;
    }
    Ok(WiretapCodeReport {
        success: success.value(),
        leakage_bits: leak.value(),
        covering_distance: dist / cb.messages as f64,
        tau,
        eta,
        messages: cb.messages,
        fake: cb.fake,
        n: cb.n,
        energy: cb.energy.value(),
        seed: cb.seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrendRow {
    pub fake: usize,
    pub mean: f64,
    pub std: f64,
    pub samples: usize,
}

/// Mean and sample standard deviation of the covering distance over seeds and
/// messages, one row per entry of `fake_sizes`.
pub fn covering_trend(
    messages: usize,
    n: usize,
    energy: PhotonNumber,
    eta: f64,
    fake_sizes: &[usize],
    seeds: &[u64],
) -> Result<Vec<TrendRow>> {
    if seeds.is_empty() {
        return Err(Error::config("seeds", "need at least one seed"));
    }
    let jobs: Vec<(usize, u64)> = fake_sizes
        .iter()
        .flat_map(|&l| seeds.iter().map(move |&s| (l, s)))
        .collect();
    let per_job: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(l, seed)| {
            let cb = sample_codebook(messages, l, n, energy, seed, None)?;
            (0..messages)
                .map(|m| covering_distance(&cb, eta, m))
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(fake_sizes
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let samples: Vec<f64> = per_job[i * seeds.len()..(i + 1) * seeds.len()]
                .iter()
                .flatten()
                .copied()
                .collect();
            let k = samples.len() as f64;
            let mean = samples.iter().sum::<f64>() / k;
            let var = if samples.len() > 1 {
                samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)
            } else {
                0.0
            };
            TrendRow {
                fake: l,
                mean,
                std: var.sqrt(),
                samples: samples.len(),
            }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LeakagePoint {
    pub eta: f64,
    pub leakage_bits: f64,
}

/// Leakage along an ascending list of transmissivities, failing if it ever
/// drops by more than [`MONOTONE_SLACK`].
pub fn leakage_monotonicity(cb: &Codebook, etas: &[f64]) -> Result<Vec<LeakagePoint>> {
    if etas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::config("eta_list", "must be sorted ascending"));
    }
    let points: Vec<LeakagePoint> = etas
        .par_iter()
        .map(|&eta| {
            leakage(cb, eta).map(|b| LeakagePoint {
                eta,
                leakage_bits: b.value(),
            })
        })
        .collect::<Result<_>>()?;
    for w in points.windows(2) {
        if w[1].leakage_bits < w[0].leakage_bits - MONOTONE_SLACK {
            return Err(Error::Property(format!(
                "leakage fell from {} at eta = {} to {} at eta = {}",
                w[0].leakage_bits, w[0].eta, w[1].leakage_bits, w[1].eta
            )));
        }
    }
    Ok(points)
}
