//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails or exceeds its time limit.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wiretap_core::capacity::{qq_capacity, received_photon_number, ChannelParamSet};
use wiretap_core::codesim::{covering_trend, leakage, leakage_monotonicity, sample_codebook};
use wiretap_core::fock::tail_probability;
use wiretap_core::gram::{build_gram, srm_success, CoherentLabel, WeightedEnsemble};
use wiretap_core::proof::achievable_rate;
use wiretap_core::scenario::{self, block_budget, run_sweep, ScenarioConfig};
use wiretap_core::verify::{
    bpsk_identity_gap, compare_with_fock, continuity_trial, finite_support_trial,
    production_h_bpsk, tail_cases, typicality_sweep,
};
use wiretap_core::{h_bpsk, Complex64, PhotonNumber, Result};

type Outcome = Result<(bool, String)>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn identity_forms() -> Outcome {
    let gap = bpsk_identity_gap(&production_h_bpsk, 1000);
    Ok((gap <= 1e-12, format!("max gap {gap:e}")))
}

fn two_codeword_optimality() -> Outcome {
    let mut worst = 0.0f64;
    for e in [0.1, 0.5, 1.0, 2.0] {
        let a = f64::sqrt(e);
        let pair = WeightedEnsemble::uniform(vec![
            CoherentLabel::from_real(&[a])?,
            CoherentLabel::from_real(&[-a])?,
        ])?;
        let p = srm_success(&build_gram(&pair)?)?.value();
        let helstrom = 0.5 * (1.0 + (1.0 - (-4.0 * e).exp()).sqrt());
        worst = worst.max((p - helstrom).abs());
    }
    Ok((worst <= 1e-10, format!("max gap {worst:e}")))
}

fn oracle_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in 1..=3 {
        for m in 1..=8usize {
            for l in 1..=8 / m {
                if m * l < 2 {
                    continue;
                }
                for e in [0.1, 0.5, 1.0] {
                    for seed in 0..2u64 {
                        let seed = seed + 1000 * (n * 100 + m * 10 + l) as u64;
                        let cb = sample_codebook(m, l, n, PhotonNumber::new(e)?, seed, None)?;
                        worst = worst.max(compare_with_fock(&cb, 1.0, 40)?.max_gap());
                        cases += 1;
                    }
                }
            }
        }
    }
    Ok((
        worst <= 1e-6,
        format!("{cases} codebooks, max gap {worst:e}"),
    ))
}

fn coherent_tail() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (a2, n) in tail_cases() {
        let r = tail_probability(Complex64::new(a2.sqrt(), 0.0), n);
        ok &= r.tail <= 2f64.powi(-(n as i32) - 1);
        parts.push(format!("|a|^2={a2} N={n}: {:e}", r.tail));
    }
    Ok((ok, parts.join(", ")))
}

fn entropy_continuity() -> Outcome {
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
}

fn finite_support() -> Outcome {
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
}

fn sweep_shape() -> Outcome {
    let cfg = ScenarioConfig::default();
    let rows = run_sweep(&cfg)?;
    let bad = rows
        .iter()
        .filter(|r| r.qq_raw < r.cq_raw - 1e-12 || r.cc_raw < r.cq_raw - 1e-12)
        .count();
    let gap_points = rows.iter().filter(|r| r.cq == 0.0 && r.qq > 0.0).count();
    Ok((
        rows.len() >= 64 && bad == 0 && gap_points > 0,
        format!(
            "{} points, {bad} ordering violations, {gap_points} points with CQ = 0 < QQ",
            rows.len()
        ),
    ))
}

fn singleton_reduction() -> Outcome {
    let mut worst_rate = 0.0f64;
    for (tau, eta, e) in [(1.0, 0.447, 1.0), (0.3, 0.1, 7.0), (0.01, 0.004, 1e6)] {
        let p = ChannelParamSet::singletons(tau, eta, e)?;
        let energy = PhotonNumber::new(e)?;
        let rate = achievable_rate(
            h_bpsk(received_photon_number(tau, energy)?),
            h_bpsk(received_photon_number(eta, energy)?),
        );
        worst_rate = worst_rate.max((qq_capacity(&p).raw - rate).abs());
    }

    let e = 0.8;
    let mut worst_leak = 0.0f64;
    let mut checked = 0;
    for seed in 0..32u64 {
        let cb = sample_codebook(2, 1, 1, PhotonNumber::new(e)?, seed, None)?;
        if cb.signs(0, 0) == cb.signs(1, 0) {
            continue;
        }
        for eta in [0.1, 0.5, 0.9] {
            let chi = leakage(&cb, eta)?.value();
            let target = h_bpsk(PhotonNumber::new(eta * eta * e)?).value();
            worst_leak = worst_leak.max((chi - target).abs());
        }
        checked += 1;
    }
    Ok((
        worst_rate == 0.0 && checked > 0 && worst_leak <= 1e-10,
        format!("rate gap {worst_rate:e}; leakage gap {worst_leak:e} over {checked} codebooks"),
    ))
}

fn monotonicity() -> Outcome {
    let etas: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    for seed in 0..20u64 {
        let n = 1 + (seed % 4) as usize;
        let cb = sample_codebook(2, 4, n, PhotonNumber::new(0.7)?, seed, None)?;
        leakage_monotonicity(&cb, &etas)?;
    }
    let seeds: Vec<u64> = (0..20).collect();
    let rows = covering_trend(2, 4, PhotonNumber::new(0.5)?, 0.4, &[2, 8, 32, 128], &seeds)?;
    let ok = rows.windows(2).all(|w| w[1].mean <= w[0].mean);
    let means: Vec<String> = rows
        .iter()
        .map(|r| format!("L={}: {:.4}", r.fake, r.mean))
        .collect();
    Ok((
        ok,
        format!("leakage monotone for 20 codebooks; {}", means.join(", ")),
    ))
}

fn typicality() -> Outcome {
    let ns: Vec<usize> = (1..=20).collect();
    let (cases, failures) = typicality_sweep(&ns, &[0.05, 0.1, 0.2, 0.3])?;
    Ok((
        failures.is_empty(),
        if failures.is_empty() {
            format!("{cases} (n, delta) cases")
        } else {
            failures.join("; ")
        },
    ))
}

fn scenario_numbers() -> Outcome {
    let cfg = ScenarioConfig::default();
    let budget = block_budget(&cfg)?;
    let rows = run_sweep(&cfg)?;
    let lo = rows[0].e_r;
    let hi = rows[rows.len() - 1].e_r;
    let ok = budget == 50_000_000
        && ((lo - 1e-2) / 1e-2).abs() <= 1e-9
        && ((hi - 1e2) / 1e2).abs() <= 1e-9;
    Ok((ok, format!("budget {budget}, E_r from {lo:e} to {hi:e}")))
}

fn cli_contract() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_wiretap");
    let dir = std::env::temp_dir().join(format!("wiretap-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let csv_path = dir.join("sweep.csv");

    let status = Command::new(bin)
        .args(["sweep", "--out"])
        .arg(&csv_path)
        .status()?;
    let text = std::fs::read_to_string(&csv_path)?;
    let parsed = scenario::read_csv(text.as_bytes())?;
    let round_trip = status.success()
        && parsed == run_sweep(&ScenarioConfig::default())?
        && scenario::to_csv_string(&parsed)? == text;

    let all = Command::new(bin).args(["verify", "all"]).output()?;
    let perturbed = Command::new(bin)
        .args(["verify", "identities", "--perturb-h-bpsk", "1e-3"])
        .output()?;
    let unknown = Command::new(bin).args(["verify", "nonsense"]).output()?;
    std::fs::remove_dir_all(&dir).ok();

    let codes = (
        all.status.code(),
        perturbed.status.code(),
        unknown.status.code(),
    );
    Ok((
        round_trip && codes == (Some(0), Some(1), Some(2)),
        format!(
            "csv round trip {round_trip}; exit codes all={:?} perturbed={:?} unknown={:?}",
            codes.0, codes.1, codes.2
        ),
    ))
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        name: "bpsk entropy identities",
        limit: Duration::from_secs(1),
        run: identity_forms,
    },
    Criterion {
        id: 2,
        name: "two-codeword optimality",
        limit: Duration::from_secs(1),
        run: two_codeword_optimality,
    },
    Criterion {
        id: 3,
        name: "gram / fock oracle equivalence",
        limit: Duration::from_secs(60),
        run: oracle_equivalence,
    },
    Criterion {
        id: 4,
        name: "coherent tail bound",
        limit: Duration::from_secs(1),
        run: coherent_tail,
    },
    Criterion {
        id: 5,
        name: "entropy continuity",
        limit: Duration::from_secs(30),
        run: entropy_continuity,
    },
    Criterion {
        id: 6,
        name: "finite support trace bound",
        limit: Duration::from_secs(30),
        run: finite_support,
    },
    Criterion {
        id: 7,
        name: "capacity sweep shape",
        limit: Duration::from_secs(5),
        run: sweep_shape,
    },
    Criterion {
        id: 8,
        name: "singleton reduction",
        limit: Duration::from_secs(1),
        run: singleton_reduction,
    },
    Criterion {
        id: 9,
        name: "monotonicity and covering trend",
        limit: Duration::from_secs(120),
        run: monotonicity,
    },
    Criterion {
        id: 10,
        name: "strong typicality",
        limit: Duration::from_secs(30),
        run: typicality,
    },
    Criterion {
        id: 11,
        name: "scenario numbers",
        limit: Duration::from_secs(1),
        run: scenario_numbers,
    },
    Criterion {
        id: 12,
        name: "cli contract",
        limit: Duration::from_secs(10),
        run: cli_contract,
    },
];

fn main() -> ExitCode {
    let mut failed = 0;
    for c in CRITERIA {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (pass, detail) = match outcome {
            Ok((pass, detail)) => (pass, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = elapsed <= c.limit;
        let verdict = if pass && in_time { "PASS" } else { "FAIL" };
        let timing = if in_time {
            format!("{:.3}s", elapsed.as_secs_f64())
        } else {
            format!(
                "{:.3}s exceeds {}s",
                elapsed.as_secs_f64(),
                c.limit.as_secs()
            )
        };
        println!("{verdict} [{:>2}] {} ({timing}): {detail}", c.id, c.name);
        if verdict == "FAIL" {
            failed += 1;
        }
    }
    println!(
        "{} of {} criteria passed",
        CRITERIA.len() - failed,
        CRITERIA.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
