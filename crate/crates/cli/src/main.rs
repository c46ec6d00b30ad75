use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use wiretap_core::capacity::{capacity_report, ChannelParamSet, TransmissivitySet};
use wiretap_core::codesim::{covering_trend, evaluate, leakage_monotonicity, sample_codebook};
use wiretap_core::scenario::{self, ScenarioConfig};
use wiretap_core::verify::{production_h_bpsk, run_suite_with, Suite};
use wiretap_core::{Error, PhotonNumber, Result};

/// Private capacities and finite-size code experiments for the BPSK bosonic
/// compound wiretap channel.
#[derive(Parser)]
#[command(name = "wiretap", version)]
struct Cli {
    /// JSON scenario config; unknown keys are rejected.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Write output here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// QQ, CQ and CC private capacities at one parameter point.
    Capacity {
        /// Photons per symbol at the transmitter.
        #[arg(long)]
        energy: Option<f64>,
        /// Legitimate amplitude transmissivities (comma separated).
        #[arg(long, value_delimiter = ',', required = true)]
        tau: Vec<f64>,
        /// Eavesdropper amplitude transmissivities (comma separated).
        #[arg(long, value_delimiter = ',', conflicts_with = "eta_sq_fraction")]
        eta: Vec<f64>,
        /// Eavesdropper power as a fraction of each tau^2; defaults to the
        /// config's worst-case fraction.
        #[arg(long)]
        eta_sq_fraction: Option<f64>,
    },
    /// Capacities over the received-power sweep.
    Sweep {
        #[arg(long)]
        energy: Option<f64>,
        #[arg(long)]
        grid_points: Option<usize>,
        #[arg(long)]
        worst_case_fraction: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Random-code experiments at small block length.
    Simulate {
        #[arg(long, value_enum, default_value_t = Experiment::Report)]
        experiment: Experiment,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        messages: Option<usize>,
        #[arg(long)]
        fake: Option<usize>,
        #[arg(long)]
        block_length: Option<usize>,
        #[arg(long)]
        energy: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        /// Draw only strongly typical codewords with this slack.
        #[arg(long)]
        prune: Option<f64>,
    },
    /// Run a named check suite and emit a JSON report.
    Verify {
        /// identities, oracle, lemmas, typicality, montecarlo or all.
        suite: String,
        /// Add this offset to the BPSK entropy under test (harness self-check).
        #[arg(long, hide = true, allow_hyphen_values = true)]
        perturb_h_bpsk: Option<f64>,
    },
    /// Symbols available per coherence window.
    Budget {
        #[arg(long)]
        symbol_rate: Option<f64>,
        #[arg(long)]
        coherence_window: Option<f64>,
        #[arg(long)]
        feedback_fraction: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    /// Success, leakage and covering distance of one codebook.
    Report,
    /// Mean covering distance against the number of fake codewords.
    Trend,
    /// Leakage along the configured eta list.
    Monotonicity,
}

fn load_config(path: Option<&PathBuf>) -> Result<ScenarioConfig> {
    match path {
        Some(p) => ScenarioConfig::from_json(&fs::read_to_string(p)?),
        None => Ok(ScenarioConfig::default()),
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Runs the command; `Ok(false)` means it completed but checks failed.
fn run(cli: Cli) -> Result<(String, bool)> {
    let mut cfg = load_config(cli.config.as_ref())?;
    match cli.command {
        Command::Capacity {
            energy,
            tau,
            eta,
            eta_sq_fraction,
        } => {
            set(&mut cfg.energy, energy);
            cfg.validate()?;
            let etas = if eta.is_empty() {
                let f = eta_sq_fraction.unwrap_or(cfg.worst_case_eta_fraction);
                if !(0.0..=1.0).contains(&f) {
                    return Err(Error::Config {
                        field: "eta_sq_fraction".into(),
                        reason: format!("must lie in [0, 1], got {f}"),
                    });
                }
                tau.iter().map(|t| t * f.sqrt()).collect()
            } else {
                eta
            };
            let params = ChannelParamSet::new(
                TransmissivitySet::Finite(tau),
                TransmissivitySet::Finite(etas),
                PhotonNumber::new(cfg.energy)?,
            )?;
            Ok((
                serde_json::to_string_pretty(&capacity_report(&params))?,
                true,
            ))
        }
        Command::Sweep {
            energy,
            grid_points,
            worst_case_fraction,
            format,
        } => {
            set(&mut cfg.energy, energy);
            set(&mut cfg.grid_points, grid_points);
            set(&mut cfg.worst_case_eta_fraction, worst_case_fraction);
            let rows = scenario::run_sweep(&cfg)?;
            let text = match format {
                Format::Csv => scenario::to_csv_string(&rows)?,
                Format::Json => scenario::to_json_string(&rows)?,
            };
            Ok((text, true))
        }
        Command::Simulate {
            experiment,
            seed,
            messages,
            fake,
            block_length,
            energy,
            tau,
            eta,
            prune,
        } => {
            let sim = &mut cfg.simulation;
            set(&mut sim.seed, seed);
            set(&mut sim.messages, messages);
            set(&mut sim.fake, fake);
            set(&mut sim.block_length, block_length);
            set(&mut sim.energy, energy);
            set(&mut sim.tau, tau);
            set(&mut sim.eta, eta);
            if prune.is_some() {
                sim.prune_delta = prune;
            }
            cfg.validate()?;
            let sim = &cfg.simulation;
            let energy = PhotonNumber::new(sim.energy)?;
            let text = match experiment {
                Experiment::Report => {
                    let cb = sample_codebook(
                        sim.messages,
                        sim.fake,
                        sim.block_length,
                        energy,
                        sim.seed,
                        sim.prune_delta,
                    )?;
                    serde_json::to_string_pretty(&evaluate(&cb, sim.tau, sim.eta)?)?
                }
                Experiment::Trend => {
                    let seeds: Vec<u64> = (0..sim.seed_count as u64)
                        .map(|i| sim.seed.wrapping_add(i))
                        .collect();
                    let rows = covering_trend(
                        sim.messages,
                        sim.block_length,
                        energy,
                        sim.eta,
                        &sim.fake_list,
                        &seeds,
                    )?;
                    serde_json::to_string_pretty(&rows)?
                }
                Experiment::Monotonicity => {
                    let cb = sample_codebook(
                        sim.messages,
                        sim.fake,
                        sim.block_length,
                        energy,
                        sim.seed,
                        sim.prune_delta,
                    )?;
                    serde_json::to_string_pretty(&leakage_monotonicity(&cb, &sim.eta_list)?)?
                }
            };
            Ok((text, true))
        }
        Command::Verify {
            suite,
            perturb_h_bpsk,
        } => {
            let suite: Suite = suite.parse()?;
            let offset = perturb_h_bpsk.unwrap_or(0.0);
            let h = move |x: f64| production_h_bpsk(x) + offset;
            let report = run_suite_with(suite, &h);
            Ok((serde_json::to_string_pretty(&report)?, report.pass))
        }
        Command::Budget {
            symbol_rate,
            coherence_window,
            feedback_fraction,
        } => {
            set(&mut cfg.symbol_rate, symbol_rate);
            set(&mut cfg.coherence_window, coherence_window);
            set(&mut cfg.feedback_fraction, feedback_fraction);
            let symbols = scenario::block_budget(&cfg)?;
            Ok((
                serde_json::json!({ "block_budget": symbols }).to_string(),
                true,
            ))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    let result = run(cli).and_then(|(mut text, pass)| {
        if !text.ends_with('\n') {
            text.push('\n');
        }
        match &out {
            Some(path) => fs::write(path, text)?,
            None => print!("{text}"),
        }
        Ok(pass)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
