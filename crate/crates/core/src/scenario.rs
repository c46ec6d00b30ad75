//! Satellite-downlink scenario: configuration, the received-power sweep and
//! the block budget available within one channel coherence window.
//!
//! Config files are JSON objects with the keys below; every key is optional
//! and unknown keys are rejected.
//!
//! | key | default |
//! |---|---|
//! | `energy_E` | `1e6` photons per symbol |
//! | `tau_range` | `[1e-4, 1e-2]` amplitude transmissivity |
//! | `eta_sq_fraction_range` | `[0.02, 0.2]` of `tau^2` |
//! | `grid_points` | `64` |
//! | `worst_case_eta_fraction` | `0.2` |
//! | `symbol_rate` | `1e10` Bd |
//! | `coherence_window` | `1e-2` s |
//! | `feedback_fraction` | `0.5` |
//! | `simulation` | see [`SimulationConfig`] |

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::capacity::{capacity_sweep, SweepPoint};
use crate::entropy::PhotonNumber;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    #[serde(rename = "energy_E")]
    pub energy: f64,
    pub tau_range: [f64; 2],
    pub eta_sq_fraction_range: [f64; 2],
    pub grid_points: usize,
    pub worst_case_eta_fraction: f64,
    pub symbol_rate: f64,
    pub coherence_window: f64,
    pub feedback_fraction: f64,
    pub simulation: SimulationConfig,
}

/// Code-simulation parameters, the `simulation` object of a config file.
///
/// | key | default |
/// |---|---|
/// | `messages` | `2` |
/// | `fake` | `8` |
/// | `block_length` | `4` |
/// | `energy_E` | `0.5` |
/// | `tau` | `1.0` |
/// | `eta` | `0.4` |
/// | `seed` | `0` |
/// | `prune_delta` | `null` (no pruning) |
/// | `fake_list` | `[2, 8, 32, 128]` |
/// | `seed_count` | `20` |
/// | `eta_list` | `[0.0, 0.1, ..., 1.0]` |
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub messages: usize,
    pub fake: usize,
    pub block_length: usize,
    #[serde(rename = "energy_E")]
    pub energy: f64,
    pub tau: f64,
    pub eta: f64,
    pub seed: u64,
    pub prune_delta: Option<f64>,
    pub fake_list: Vec<usize>,
    pub seed_count: usize,
    pub eta_list: Vec<f64>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            messages: 2,
            fake: 8,
            block_length: 4,
            energy: 0.5,
            tau: 1.0,
            eta: 0.4,
            seed: 0,
            prune_delta: None,
            fake_list: vec![2, 8, 32, 128],
            seed_count: 20,
            eta_list: (0..=10).map(|i| i as f64 / 10.0).collect(),
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("simulation.messages", self.messages),
            ("simulation.fake", self.fake),
            ("simulation.block_length", self.block_length),
            ("simulation.seed_count", self.seed_count),
        ] {
            if v == 0 {
                return Err(Error::config(field, "must be at least 1"));
            }
        }
        if !(self.energy.is_finite() && self.energy >= 0.0) {
            return Err(Error::config(
                "simulation.energy_E",
                "must be finite and nonnegative",
            ));
        }
        for (field, v) in [("simulation.tau", self.tau), ("simulation.eta", self.eta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(field, format!("must lie in [0, 1], got {v}")));
            }
        }
        if let Some(d) = self.prune_delta {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::config("simulation.prune_delta", "must be positive"));
            }
        }
        if self.fake_list.contains(&0) {
            return Err(Error::config(
                "simulation.fake_list",
                "sizes must be at least 1",
            ));
        }
        if self.eta_list.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(Error::config(
                "simulation.eta_list",
                "values must lie in [0, 1]",
            ));
        }
        if self.eta_list.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::config(
                "simulation.eta_list",
                "must be sorted ascending",
            ));
        }
        Ok(())
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            energy: 1e6,
            tau_range: [1e-4, 1e-2],
            eta_sq_fraction_range: [0.02, 0.2],
            grid_points: 64,
            worst_case_eta_fraction: 0.2,
            symbol_rate: 1e10,
            coherence_window: 1e-2,
            feedback_fraction: 0.5,
            simulation: SimulationConfig::default(),
        }
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(
            field,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

fn unit_interval(field: &str, [lo, hi]: [f64; 2]) -> Result<()> {
    if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
        return Err(Error::config(
            field,
            format!("need 0 < lo <= hi <= 1, got [{lo}, {hi}]"),
        ));
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        positive("energy_E", self.energy)?;
        unit_interval("tau_range", self.tau_range)?;
        unit_interval("eta_sq_fraction_range", self.eta_sq_fraction_range)?;
        let [flo, fhi] = self.eta_sq_fraction_range;
        let w = self.worst_case_eta_fraction;
        if !(flo..=fhi).contains(&w) {
            return Err(Error::config(
                "worst_case_eta_fraction",
                format!("{w} lies outside eta_sq_fraction_range [{flo}, {fhi}]"),
            ));
        }
        if self.grid_points < 2 {
            return Err(Error::config("grid_points", "need at least 2 points"));
        }
        positive("symbol_rate", self.symbol_rate)?;
        positive("coherence_window", self.coherence_window)?;
        if !(0.0..=1.0).contains(&self.feedback_fraction) {
            return Err(Error::config(
                "feedback_fraction",
                format!("must lie in [0, 1], got {}", self.feedback_fraction),
            ));
        }
        self.simulation.validate()
    }
}

/// Symbols available per coherence window once the feedback share is
/// reserved: `floor(rate * window * fraction)`.
///
/// Products that land within `1e-9` relative of an integer are rounded to it,
/// so decimal inputs such as `1e10 * 1e-2 * 0.5` give the intended count.
pub fn block_budget(cfg: &ScenarioConfig) -> Result<u64> {
    cfg.validate()?;
    let x = cfg.symbol_rate * cfg.coherence_window * cfg.feedback_fraction;
    let nearest = x.round();
    let count = if (x - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        x.floor()
    };
    if count >= u64::MAX as f64 {
        return Err(Error::config(
            "symbol_rate",
            "block budget overflows 64 bits",
        ));
    }
    Ok(count as u64)
}

/// `grid_points` log-spaced values from `lo` to `hi` with exact endpoints.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let span = (hi / lo).ln();
    (0..points)
        .map(|i| {
            if i == 0 {
                lo
            } else if i + 1 == points {
                hi
            } else {
                lo * (span * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "E_r")]
    pub e_r: f64,
    pub qq_raw: f64,
    pub qq: f64,
    pub cq_raw: f64,
    pub cq: f64,
    pub cc_raw: f64,
    pub cc: f64,
    pub clipped_qq: bool,
    pub clipped_cq: bool,
    pub clipped_cc: bool,
}

pub const CSV_COLUMNS: [&str; 10] = [
    "E_r",
    "qq_raw",
    "qq",
    "cq_raw",
    "cq",
    "cc_raw",
    "cc",
    "clipped_qq",
    "clipped_cq",
    "clipped_cc",
];

/// Capacities at `E_r = tau^2 E` with the eavesdropper at the worst-case
/// fraction, on a log grid over `tau_range`, ascending in `E_r`.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let energy = PhotonNumber::new(cfg.energy)?;
    let grid: Vec<SweepPoint> = log_grid(cfg.tau_range[0], cfg.tau_range[1], cfg.grid_points)
        .into_iter()
        .map(|tau| SweepPoint {
            tau,
            eta_sq_fractions: vec![cfg.worst_case_eta_fraction],
        })
        .collect();
    let mut rows: Vec<SweepRow> = capacity_sweep(energy, &grid)?
        .into_iter()
        .map(|r| SweepRow {
            e_r: r.received_photons,
            qq_raw: r.qq.raw,
            qq: r.qq.value.value(),
            cq_raw: r.cq.raw,
            cq: r.cq.value.value(),
            cc_raw: r.cc.raw,
            cc: r.cc.value.value(),
            clipped_qq: r.qq.clipped,
            clipped_cq: r.cq.clipped,
            clipped_cc: r.cc.clipped,
        })
        .collect();
    rows.sort_by(|a, b| a.e_r.total_cmp(&b.e_r));
    Ok(rows)
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV with a header row; floats carry 17 significant digits.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.write_record([
            fmt_float(r.e_r),
            fmt_float(r.qq_raw),
            fmt_float(r.qq),
            fmt_float(r.cq_raw),
            fmt_float(r.cq),
            fmt_float(r.cc_raw),
            fmt_float(r.cc),
            r.clipped_qq.to_string(),
            r.clipped_cq.to_string(),
            r.clipped_cc.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_COLUMNS {
        return Err(Error::Validation(format!(
            "unexpected CSV header {header:?}"
        )));
    }
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

pub fn to_csv_string(rows: &[SweepRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is ASCII"))
}

pub fn to_json_string(rows: &[SweepRow]) -> Result<String> {
    Ok(serde_json::to_string_pretty(rows)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn budget_examples() {
        assert_eq!(
            block_budget(&ScenarioConfig::default()).unwrap(),
            50_000_000
        );
        let unit = ScenarioConfig {
            coherence_window: 1.0,
            symbol_rate: 1.0,
            feedback_fraction: 1.0,
            ..Default::default()
        };
        assert_eq!(block_budget(&unit).unwrap(), 1);
        let none = ScenarioConfig {
            feedback_fraction: 0.0,
            ..Default::default()
        };
        assert_eq!(block_budget(&none).unwrap(), 0);
        let frac = ScenarioConfig {
            symbol_rate: 7.0,
            coherence_window: 1.0,
            feedback_fraction: 0.5,
            ..Default::default()
        };
        assert_eq!(block_budget(&frac).unwrap(), 3);
    }

    #[test]
    fn sweep_examples() {
        let rows = run_sweep(&ScenarioConfig::default()).unwrap();
        assert_eq!(rows.len(), 64);
        assert_relative_eq!(rows[0].e_r, 1e-2, max_relative = 1e-9);
        assert_relative_eq!(rows[63].e_r, 1e2, max_relative = 1e-9);
        for r in &rows {
            assert!(r.qq_raw >= r.cq_raw - 1e-12);
            assert!(r.cc_raw >= r.cq_raw - 1e-12);
        }
        let two = ScenarioConfig {
            grid_points: 2,
            ..Default::default()
        };
        assert_eq!(run_sweep(&two).unwrap().len(), 2);
    }

    #[test]
    fn csv_round_trip_and_purity() {
        let rows = run_sweep(&ScenarioConfig::default()).unwrap();
        let text = to_csv_string(&rows).unwrap();
        assert!(text
            .starts_with("E_r,qq_raw,qq,cq_raw,cq,cc_raw,cc,clipped_qq,clipped_cq,clipped_cc\n"));
        assert_eq!(read_csv(text.as_bytes()).unwrap(), rows);
        assert_eq!(
            to_csv_string(&run_sweep(&ScenarioConfig::default()).unwrap()).unwrap(),
            text
        );
        let json: Vec<SweepRow> = serde_json::from_str(&to_json_string(&rows).unwrap()).unwrap();
        assert_eq!(json, rows);
    }

    #[test]
    fn config_validation() {
        let cfg = ScenarioConfig::from_json(r#"{"energy_E": 2.0, "grid_points": 5}"#).unwrap();
        assert_eq!(cfg.energy, 2.0);
        assert_eq!(cfg.tau_range, [1e-4, 1e-2]);
        assert!(matches!(
            ScenarioConfig::from_json(r#"{"energy": 2.0}"#),
            Err(Error::Json(_))
        ));
        match ScenarioConfig::from_json(r#"{"tau_range": [0.5, 0.1]}"#) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "tau_range"),
            other => panic!("unexpected {other:?}"),
        }
        match ScenarioConfig::from_json(r#"{"simulation": {"tau": 2.0}}"#) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "simulation.tau"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(ScenarioConfig::from_json(r#"{"simulation": {"taus": 1.0}}"#).is_err());
        match ScenarioConfig::from_json(r#"{"grid_points": 1}"#) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "grid_points"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn grid_has_exact_endpoints() {
        let g = log_grid(1e-4, 1e-2, 7);
        assert_eq!(g[0], 1e-4);
        assert_eq!(g[6], 1e-2);
        assert_relative_eq!(g[3], 1e-3, max_relative = 1e-14);
    }
}
