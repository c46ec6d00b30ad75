//! Named check suites, shared by the CLI `verify` command and the tests.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::capacity::{qq_capacity, received_photon_number, ChannelParamSet};
use crate::codesim::{
    covering_trend, leakage, leakage_monotonicity, sample_codebook, success_probability, Codebook,
};
use crate::entropy::{
    binary_entropy, entropy_continuity_bound, h_bpsk, h_bpsk_cosh_form, h_bpsk_half_form,
    FiniteDistribution, PhotonNumber, Probability,
};
use crate::error::{Error, Result};
use crate::fock::{
    self, check_finite_support_lemma, density_from_ensemble, photon_number_expectation, srm_povm,
    tail_probability, trace_norm_distance, von_neumann_entropy, FockFrame,
};
use crate::gram::{
    average_state_distance, average_state_entropy, build_gram, srm_success, CoherentLabel,
    WeightedEnsemble,
};
use crate::proof::{achievable_rate, pruned_distribution, typical_set, TypicalityParams};
use crate::scenario::{block_budget, run_sweep, ScenarioConfig};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }

    fn from_result(name: &str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((pass, detail)) => Self::new(name, pass, detail),
            Err(e) => Self::new(name, false, format!("error: {e}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl SuiteReport {
    fn new(suite: Suite, checks: Vec<Check>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self {
            suite: suite.to_string(),
            checks,
            pass,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Identities,
    Oracle,
    Lemmas,
    Typicality,
    MonteCarlo,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 6] = [
        "identities",
        "oracle",
        "lemmas",
        "typicality",
        "montecarlo",
        "all",
    ];

    const PARTS: [Suite; 5] = [
        Suite::Identities,
        Suite::Oracle,
        Suite::Lemmas,
        Suite::Typicality,
        Suite::MonteCarlo,
    ];
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Suite::Identities => "identities",
            Suite::Oracle => "oracle",
            Suite::Lemmas => "lemmas",
            Suite::Typicality => "typicality",
            Suite::MonteCarlo => "montecarlo",
            Suite::All => "all",
        };
        f.write_str(name)
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "identities" => Suite::Identities,
            "oracle" => Suite::Oracle,
            "lemmas" => Suite::Lemmas,
            "typicality" => Suite::Typicality,
            "montecarlo" => Suite::MonteCarlo,
            "all" => Suite::All,
            other => {
                return Err(Error::config(
                    "suite",
                    format!(
                        "unknown suite `{other}`, expected one of {:?}",
                        Suite::NAMES
                    ),
                ))
            }
        })
    }
}

/// The production `h_bpsk`, as a plain function of the photon number.
pub fn production_h_bpsk(x: f64) -> f64 {
    h_bpsk(PhotonNumber::new(x).expect("nonnegative grid")).value()
}

pub fn run_suite(suite: Suite) -> SuiteReport {
    run_suite_with(suite, &production_h_bpsk)
}

/// Like [`run_suite`] with the `h_bpsk` under test replaced by `h`, so the
/// harness itself can be checked against a deliberately broken kernel.
pub fn run_suite_with(suite: Suite, h: &dyn Fn(f64) -> f64) -> SuiteReport {
    let checks = match suite {
        Suite::Identities => identities(h),
        Suite::Oracle => oracle(),
        Suite::Lemmas => lemmas(),
        Suite::Typicality => typicality(),
        Suite::MonteCarlo => montecarlo(),
        Suite::All => Suite::PARTS
            .iter()
            .flat_map(|&s| {
                run_suite_with(s, h).checks.into_iter().map(move |mut c| {
                    c.name = format!("{s}/{}", c.name);
                    c
                })
            })
            .collect(),
    };
    SuiteReport::new(suite, checks)
}

/// Largest gap between `h` and the two closed forms of the BPSK entropy over
/// `points` equally spaced photon numbers in `[0, 50]`.
pub fn bpsk_identity_gap(h: &dyn Fn(f64) -> f64, points: usize) -> f64 {
    (0..points)
        .map(|i| 50.0 * i as f64 / (points - 1) as f64)
        .map(|x| {
            let v = h(x);
            (v - h_bpsk_cosh_form(x))
                .abs()
                .max((v - h_bpsk_half_form(x)).abs())
        })
        .fold(0.0, f64::max)
}

fn identities(h: &dyn Fn(f64) -> f64) -> Vec<Check> {
    let mut out = Vec::new();
    let gap = bpsk_identity_gap(h, 1000);
    out.push(Check::new(
        "h_bpsk_dual_forms",
        gap <= 1e-12,
        format!("max gap {gap:e} over 1000 points in [0, 50]"),
    ));

    let sym = (0..=1024)
        .map(|k| k as f64 / 1024.0)
        .map(|p| {
            let a = binary_entropy(Probability::new(p).unwrap()).value();
            let b = binary_entropy(Probability::new(1.0 - p).unwrap()).value();
            (a - b).abs()
        })
        .fold(0.0, f64::max);
    out.push(Check::new(
        "binary_entropy_symmetry",
        sym == 0.0,
        format!("max |h(p) - h(1-p)| = {sym:e} on the dyadic grid"),
    ));

    out.push(Check::from_result(
        "singleton_reduction",
        (|| {
            let mut worst = 0.0f64;
            for (tau, eta, e) in [(1.0, 0.447, 1.0), (0.3, 0.1, 7.0), (0.9, 0.5, 0.2)] {
                let p = ChannelParamSet::singletons(tau, eta, e)?;
                let energy = PhotonNumber::new(e)?;
                let rate = achievable_rate(
                    h_bpsk(received_photon_number(tau, energy)?),
                    h_bpsk(received_photon_number(eta, energy)?),
                );
                worst = worst.max((qq_capacity(&p).raw - rate).abs());
            }
            Ok((worst == 0.0, format!("max |qq - rate| = {worst:e}")))
        })(),
    ));

    out.push(Check::from_result(
        "sweep_strategy_ordering",
        (|| {
            let rows = run_sweep(&ScenarioConfig::default())?;
            let bad = rows
                .iter()
                .filter(|r| r.qq_raw < r.cq_raw - 1e-12 || r.cc_raw < r.cq_raw - 1e-12)
                .count();
            let gap = rows
                .iter()
                .any(|r| r.clipped_cq && !r.clipped_qq && r.qq > 0.0);
            Ok((
                bad == 0 && gap,
                format!("{bad} ordering violations; clipped-CQ / positive-QQ point present: {gap}"),
            ))
        })(),
    ));

    out.push(Check::from_result(
        "scenario_magnitudes",
        (|| {
            let cfg = ScenarioConfig::default();
            let budget = block_budget(&cfg)?;
            let rows = run_sweep(&cfg)?;
            let lo = rows.first().map(|r| r.e_r).unwrap_or(f64::NAN);
            let hi = rows.last().map(|r| r.e_r).unwrap_or(f64::NAN);
            let ok = budget == 50_000_000
                && ((lo - 1e-2) / 1e-2).abs() <= 1e-9
                && ((hi - 1e2) / 1e2).abs() <= 1e-9;
            Ok((ok, format!("budget {budget}, E_r in [{lo}, {hi}]")))
        })(),
    ));
    out
}

/// Gram-route and Fock-route values of the three ensemble functionals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleComparison {
    pub entropy: [f64; 2],
    pub srm_success: [f64; 2],
    pub distance: [f64; 2],
}

impl OracleComparison {
    pub fn max_gap(&self) -> f64 {
        [self.entropy, self.srm_success, self.distance]
            .iter()
            .map(|[a, b]| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Evaluates the received codebook at amplitude scale `t` both through Gram
/// matrices and through explicit truncated Fock operators. The distance is
/// between the full average and the average of message 0.
pub fn compare_with_fock(cb: &Codebook, t: f64, cutoff: usize) -> Result<OracleComparison> {
    let labels = cb.received_labels(t);
    let all = WeightedEnsemble::uniform(labels.clone())?;
    let fake = WeightedEnsemble::uniform(cb.message_labels(0, t)?)?;

    let gram_entropy = average_state_entropy(&all)?.value();
    let gram_srm = srm_success(&build_gram(&all)?)?.value();
    let gram_dist = average_state_distance(&all, &fake)?;

    let frame = FockFrame::for_labels(&labels, cutoff)?;
    let rho_all = density_from_ensemble(&all, &frame)?;
    let rho_fake = density_from_ensemble(&fake, &frame)?;
    let vectors = labels
        .iter()
        .map(|l| frame.product_vector(l))
        .collect::<Result<Vec<_>>>()?;
    let fock_srm = srm_povm(&vectors)?.success(&vectors)?;

    Ok(OracleComparison {
        entropy: [gram_entropy, von_neumann_entropy(&rho_all)?.value()],
        srm_success: [gram_srm, fock_srm],
        distance: [gram_dist, trace_norm_distance(&rho_all, &rho_fake)?],
    })
}

fn bpsk_pair(energy: f64) -> Result<WeightedEnsemble> {
    let a = energy.sqrt();
    WeightedEnsemble::uniform(vec![
        CoherentLabel::from_real(&[a])?,
        CoherentLabel::from_real(&[-a])?,
    ])
}

fn oracle() -> Vec<Check> {
    let mut out = Vec::new();
    out.push(Check::from_result(
        "helstrom_pair",
        (|| {
            let mut worst = 0.0f64;
            for e in [0.1, 0.5, 1.0, 2.0] {
                let p = srm_success(&build_gram(&bpsk_pair(e)?)?)?.value();
                let helstrom = 0.5 * (1.0 + (1.0 - (-4.0 * e).exp()).sqrt());
                worst = worst.max((p - helstrom).abs());
            }
            Ok((worst <= 1e-10, format!("max gap {worst:e}")))
        })(),
    ));

    out.push(Check::from_result(
        "bpsk_holevo",
        (|| {
            let mut worst = 0.0f64;
            for e in [0.05, 0.3, 1.0, 4.0] {
                let s = average_state_entropy(&bpsk_pair(e)?)?.value();
                worst = worst.max((s - h_bpsk(PhotonNumber::new(e)?).value()).abs());
            }
            Ok((worst <= 1e-10, format!("max gap {worst:e}")))
        })(),
    ));

    out.push(Check::from_result(
        "gram_vs_fock",
        (|| {
            let mut worst = 0.0f64;
            let mut cases = 0;
            for n in 1..=3 {
                for (m, l) in [(2, 1), (2, 2), (1, 4), (2, 4)] {
                    for (k, e) in [0.5, 1.0].into_iter().enumerate() {
                        let seed = (100 * n + 10 * m + l + k) as u64;
                        let cb = sample_codebook(m, l, n, PhotonNumber::new(e)?, seed, None)?;
                        worst = worst.max(compare_with_fock(&cb, 0.8, 40)?.max_gap());
                        cases += 1;
                    }
                }
            }
            Ok((
                worst <= 1e-6,
                format!("{cases} codebooks, max gap {worst:e}"),
            ))
        })(),
    ));
    out
}

/// Cutoffs `ceil(8e|a|^2) + 1` and ten above it for each `|a|^2`.
pub fn tail_cases() -> Vec<(f64, usize)> {
    [0.5f64, 1.0, 2.0]
        .iter()
        .flat_map(|&a2| {
            let n = (8.0 * std::f64::consts::E * a2).ceil() as usize + 1;
            [(a2, n), (a2, n + 10)]
        })
        .collect()
}

/// One seeded pair for the entropy continuity check: returns
/// `(|S(rho) - S(sigma)|, bound)`.
pub fn continuity_trial(rng: &mut ChaCha8Rng) -> Result<(f64, f64)> {
    let cutoff = 10;
    let rank = rng.random_range(1..=4);
    let rho = fock::random::density(rng, cutoff, rank, 0.4);
    let other_rank = rng.random_range(1..=4);
    let other = fock::random::density(rng, cutoff, other_rank, 0.4);
    let sigma = fock::random::mix(&rho, &other, rng.random_range(0.001..0.3));
    let energy = photon_number_expectation(&rho)?.max(photon_number_expectation(&sigma)?);
    let eps = 0.5 * trace_norm_distance(&rho, &sigma)?;
    if eps > energy / (1.0 + energy) {
        return Err(Error::Degenerate(format!(
            "trial outside the lemma's range: eps {eps}, E {energy}"
        )));
    }
    let bound = entropy_continuity_bound(Probability::new(eps)?, PhotonNumber::new(energy)?)?;
    let gap = (von_neumann_entropy(&rho)?.value() - von_neumann_entropy(&sigma)?.value()).abs();
    Ok((gap, bound.value()))
}

/// One seeded `(effect, rho, sigma)` triple for the finite-support lemma.
pub fn finite_support_trial(rng: &mut ChaCha8Rng) -> Result<bool> {
    let cutoff = 8;
    let effect = fock::random::effect(rng, cutoff);
    let (r1, r2) = (rng.random_range(1..=9), rng.random_range(1..=9));
    let rho = fock::random::density(rng, cutoff, r1, 0.2);
    let sigma = fock::random::density(rng, cutoff, r2, 0.2);
    check_finite_support_lemma(&effect, &rho, &sigma)
}

fn lemmas() -> Vec<Check> {
    let mut out = Vec::new();
    let tails: Vec<_> = tail_cases()
        .into_iter()
        .map(|(a2, n)| {
            let r = tail_probability(num_complex::Complex64::new(a2.sqrt(), 0.0), n);
            (a2, n, r.tail, r.tail <= 2f64.powi(-(n as i32) - 1))
        })
        .collect();
    out.push(Check::new(
        "coherent_tail",
        tails.iter().all(|t| t.3),
        tails
            .iter()
            .map(|(a2, n, tail, _)| format!("|a|^2={a2} N={n} tail={tail:e}"))
            .collect::<Vec<_>>()
            .join("; "),
    ));

    out.push(Check::from_result(
        "entropy_continuity",
        (|| {
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            let mut violations = 0;
            for _ in 0..100 {
                let (gap, bound) = continuity_trial(&mut rng)?;
                if gap > bound {
                    violations += 1;
                }
            }
            Ok((
                violations == 0,
                format!("{violations} violations in 100 pairs"),
            ))
        })(),
    ));

    out.push(Check::from_result(
        "finite_support",
        (|| {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let mut violations = 0;
            for _ in 0..100 {
                if !finite_support_trial(&mut rng)? {
                    violations += 1;
                }
            }
            Ok((
                violations == 0,
                format!("{violations} violations in 100 triples"),
            ))
        })(),
    ));
    out
}

/// `sum_{k : |k/n - 1/2| <= delta} C(n, k)`.
pub fn binary_typical_count(n: usize, delta: f64) -> u128 {
    let mut c: u128 = 1;
    let mut total = 0;
    for k in 0..=n {
        if k > 0 {
            c = c * (n - k + 1) as u128 / k as u128;
        }
        if (k as f64 - 0.5 * n as f64).abs() <= n as f64 * delta * (1.0 + 1e-12) {
            total += c;
        }
    }
    total
}

/// Enumerated typical sets of the uniform binary source against the binomial
/// count, the cardinality bounds and the typical-mass guarantee.
pub fn typicality_sweep(ns: &[usize], deltas: &[f64]) -> Result<(usize, Vec<String>)> {
    let p = FiniteDistribution::uniform(vec![1i8, -1])?;
    let mut cases = 0;
    let mut failures = Vec::new();
    for &n in ns {
        for &delta in deltas {
            let prm = TypicalityParams::for_distribution(&p, n, delta)?;
            let set = typical_set(&p, &prm)?;
            let check = set.cardinality_check();
            let expected = binary_typical_count(n, delta);
            cases += 1;
            if set.len() as u128 != expected || !check.holds() || !check.mass_ok {
                failures.push(format!(
                    "n={n} delta={delta}: |T|={} vs {expected}, {check:?}",
                    set.len()
                ));
            }
            if !set.is_empty() {
                let total = pruned_distribution(&p, &prm)?.total();
                if (total - 1.0).abs() > 1e-12 {
                    failures.push(format!("n={n} delta={delta}: pruned total {total}"));
                }
            }
        }
    }
    Ok((cases, failures))
}

fn typicality() -> Vec<Check> {
    vec![Check::from_result(
        "binary_enumeration",
        (|| {
            let ns: Vec<usize> = (2..=16).step_by(2).collect();
            let (cases, failures) = typicality_sweep(&ns, &[0.05, 0.1, 0.2, 0.3])?;
            Ok((
                failures.is_empty(),
                if failures.is_empty() {
                    format!("{cases} (n, delta) cases, c = 2")
                } else {
                    failures.join("; ")
                },
            ))
        })(),
    )]
}

fn montecarlo() -> Vec<Check> {
    let mut out = Vec::new();
    let etas: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    out.push(Check::from_result(
        "leakage_monotone_in_eta",
        (|| {
            for seed in 0..5u64 {
                let cb = sample_codebook(2, 3, 3, PhotonNumber::new(1.0)?, seed, None)?;
                leakage_monotonicity(&cb, &etas)?;
            }
            Ok((true, "5 codebooks, 11 transmissivities".into()))
        })(),
    ));

    out.push(Check::from_result(
        "covering_trend",
        (|| {
            let seeds: Vec<u64> = (0..8).collect();
            let rows = covering_trend(2, 3, PhotonNumber::new(0.5)?, 0.4, &[2, 8, 32], &seeds)?;
            let ok = rows.windows(2).all(|w| w[1].mean <= w[0].mean);
            let means: Vec<String> = rows
                .iter()
                .map(|r| format!("L={}: {:.4}", r.fake, r.mean))
                .collect();
            Ok((ok, means.join(", ")))
        })(),
    ));

    out.push(Check::from_result(
        "single_codeword_pair_reduction",
        (|| {
            let e = 1.3;
            let mut worst = 0.0f64;
            for seed in 0..4u64 {
                let mut cb = sample_codebook(2, 1, 1, PhotonNumber::new(e)?, seed, None)?;
                if cb.signs(0, 0) == cb.signs(1, 0) {
                    cb = sample_codebook(2, 1, 1, PhotonNumber::new(e)?, seed + 1000, None)?;
                    if cb.signs(0, 0) == cb.signs(1, 0) {
                        continue;
                    }
                }
                for eta in [0.2, 0.6, 1.0] {
                    let chi = leakage(&cb, eta)?.value();
                    worst =
                        worst.max((chi - h_bpsk(PhotonNumber::new(eta * eta * e)?).value()).abs());
                }
            }
            Ok((worst <= 1e-10, format!("max gap {worst:e}")))
        })(),
    ));

    out.push(Check::from_result(
        "holevo_bound_and_scaling",
        (|| {
            let mut worst_scale = 0.0f64;
            let mut excess = f64::NEG_INFINITY;
            for seed in 0..5u64 {
                let cb = sample_codebook(4, 2, 2, PhotonNumber::new(1.5)?, seed, None)?;
                excess = excess.max(leakage(&cb, 0.7)?.value() - 2.0);
                let tau = 0.6;
                let scaled = cb.with_energy(PhotonNumber::new(tau * tau * 1.5)?);
                let a = success_probability(&cb, tau)?.value();
                let b = success_probability(&scaled, 1.0)?.value();
                worst_scale = worst_scale.max((a - b).abs());
            }
            Ok((
                excess <= 1e-9 && worst_scale <= 1e-12,
                format!("max chi - log2 M = {excess:e}; energy-scaling gap {worst_scale:e}"),
            ))
        })(),
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        for name in Suite::NAMES {
            assert_eq!(name.parse::<Suite>().unwrap().to_string(), name);
        }
        match "bogus".parse::<Suite>() {
            Err(e @ Error::Config { .. }) => assert_eq!(e.exit_code(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn identities_pass_and_catch_perturbation() {
        assert!(run_suite(Suite::Identities).pass);
        let broken = |x: f64| production_h_bpsk(x) + 1e-3;
        let report = run_suite_with(Suite::Identities, &broken);
        assert!(!report.pass);
        assert!(!report.checks[0].pass);
    }

    #[test]
    fn binomial_counts() {
        assert_eq!(binary_typical_count(10, 0.1), 672);
        assert_eq!(binary_typical_count(10, 1e-9), 252);
        assert_eq!(binary_typical_count(9, 1e-9), 0);
    }

    #[test]
    fn tail_case_cutoffs() {
        let c = tail_cases();
        assert_eq!(c[0], (0.5, 12));
        assert_eq!(c[1], (0.5, 22));
        assert_eq!(c[4], (2.0, 45));
    }
}
