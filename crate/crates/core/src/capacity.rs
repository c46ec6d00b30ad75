//! Worst-case private capacities of the BPSK compound wiretap channel.
//!
//! Three strategies are compared, all in bits per channel use:
//!
//! - **QQ**: quantum decoding for both receivers,
//!   `min_tau h_bpsk(tau^2 E) - max_eta h_bpsk(eta^2 E)`.
//! - **CQ**: homodyne detection at the legitimate receiver, quantum eavesdropper,
//!   `1 - max_tau h(P(tau^2 E)) - max_eta h_bpsk(eta^2 E)`.
//! - **CC**: homodyne detection for both,
//!   `[1 - max_tau h(P(tau^2 E))] - max_eta [1 - h(P(eta^2 E))]`.
//!
//! Transmissivities are amplitude scales; the mean photon number seen at a
//! receiver with amplitude transmissivity `t` is `t^2 E`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{binary_entropy, h_bpsk, homodyne_error, Bits, PhotonNumber};
use crate::error::{Error, Result};

/// Set of amplitude transmissivities a link may take.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransmissivitySet {
    Finite(Vec<f64>),
    /// Closed interval. Every capacity term is monotone in the transmissivity,
    /// so only the endpoints are ever evaluated.
    Interval {
        lo: f64,
        hi: f64,
    },
}

impl TransmissivitySet {
    pub fn singleton(t: f64) -> Self {
        TransmissivitySet::Finite(vec![t])
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        let check = |t: f64| {
            if (0.0..=1.0).contains(&t) {
                Ok(())
            } else {
                Err(Error::config(
                    field,
                    format!("transmissivity {t} outside [0, 1]"),
                ))
            }
        };
        match self {
            TransmissivitySet::Finite(v) if v.is_empty() => {
                Err(Error::config(field, "set is empty"))
            }
            TransmissivitySet::Finite(v) => v.iter().try_for_each(|&t| check(t)),
            TransmissivitySet::Interval { lo, hi } => {
                check(*lo)?;
                check(*hi)?;
                if lo > hi {
                    Err(Error::config(
                        field,
                        format!("interval [{lo}, {hi}] is reversed"),
                    ))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Points that can attain a worst case, ascending and deduplicated.
    pub fn candidates(&self) -> Vec<f64> {
        let mut v = match self {
            TransmissivitySet::Finite(v) => v.clone(),
            TransmissivitySet::Interval { lo, hi } => vec![*lo, *hi],
        };
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    pub fn is_singleton(&self) -> bool {
        self.candidates().len() == 1
    }
}

/// Compound channel description: legitimate and eavesdropper transmissivity
/// sets plus the BPSK input photon number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelParamSet {
    tau_set: TransmissivitySet,
    eta_set: TransmissivitySet,
    energy: PhotonNumber,
}

impl ChannelParamSet {
    pub fn new(
        tau_set: TransmissivitySet,
        eta_set: TransmissivitySet,
        energy: PhotonNumber,
    ) -> Result<Self> {
        tau_set.validate("tau_set")?;
        eta_set.validate("eta_set")?;
        Ok(Self {
            tau_set,
            eta_set,
            energy,
        })
    }

    pub fn singletons(tau: f64, eta: f64, energy: f64) -> Result<Self> {
        Self::new(
            TransmissivitySet::singleton(tau),
            TransmissivitySet::singleton(eta),
            PhotonNumber::new(energy)?,
        )
    }

    pub fn tau_set(&self) -> &TransmissivitySet {
        &self.tau_set
    }

    pub fn eta_set(&self) -> &TransmissivitySet {
        &self.eta_set
    }

    pub fn energy(&self) -> PhotonNumber {
        self.energy
    }
}

/// One capacity formula evaluated at its worst case.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityEntry {
    /// Value before clipping; may be negative.
    pub raw: f64,
    /// `max(raw, 0)`.
    pub value: Bits,
    pub clipped: bool,
    /// Legitimate transmissivity attaining the worst case.
    pub worst_tau: f64,
    /// Eavesdropper transmissivity attaining the worst case.
    pub worst_eta: f64,
}

impl CapacityEntry {
    fn new(raw: f64, worst_tau: f64, worst_eta: f64) -> Self {
        let (value, clipped) = clip_nonnegative(raw);
        Self {
            raw,
            value,
            clipped,
            worst_tau,
            worst_eta,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub received_photons: f64,
    pub qq: CapacityEntry,
    pub cq: CapacityEntry,
    pub cc: CapacityEntry,
}

/// `t^2 E`.
pub fn received_photon_number(t: f64, energy: PhotonNumber) -> Result<PhotonNumber> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain(format!("transmissivity {t} outside [0, 1]")));
    }
    PhotonNumber::new(t * t * energy.value())
}

/// `max(raw, 0)` and whether clipping happened.
pub fn clip_nonnegative(raw: f64) -> (Bits, bool) {
    if raw < 0.0 {
        (Bits::ZERO, true)
    } else {
        (Bits::from_computed(raw), false)
    }
}

fn photons(t: f64, energy: PhotonNumber) -> PhotonNumber {
    // Sets are validated on construction, so t is in range.
    PhotonNumber::new(t * t * energy.value()).expect("validated transmissivity")
}

/// Extremum over the candidates; ties keep the smallest parameter.
fn extremum(set: &TransmissivitySet, f: impl Fn(f64) -> f64, maximize: bool) -> (f64, f64) {
    let mut best: Option<(f64, f64)> = None;
    for t in set.candidates() {
        let v = f(t);
        let better = match best {
            None => true,
            Some((_, b)) if maximize => v > b,
            Some((_, b)) => v < b,
        };
        if better {
            best = Some((t, v));
        }
    }
    best.expect("validated sets are non-empty")
}

fn homodyne_entropy(n: PhotonNumber) -> f64 {
    binary_entropy(homodyne_error(n)).value()
}

fn quantum_leakage(p: &ChannelParamSet) -> (f64, f64) {
    extremum(
        &p.eta_set,
        |eta| h_bpsk(photons(eta, p.energy)).value(),
        true,
    )
}

fn homodyne_bob_loss(p: &ChannelParamSet) -> (f64, f64) {
    extremum(
        &p.tau_set,
        |tau| homodyne_entropy(photons(tau, p.energy)),
        true,
    )
}

pub fn qq_capacity(p: &ChannelParamSet) -> CapacityEntry {
    let (tau, bob) = extremum(
        &p.tau_set,
        |tau| h_bpsk(photons(tau, p.energy)).value(),
        false,
    );
    let (eta, eve) = quantum_leakage(p);
    CapacityEntry::new(bob - eve, tau, eta)
}

pub fn cq_capacity(p: &ChannelParamSet) -> CapacityEntry {
    let (tau, loss) = homodyne_bob_loss(p);
    let (eta, eve) = quantum_leakage(p);
    CapacityEntry::new(1.0 - loss - eve, tau, eta)
}

pub fn cc_capacity(p: &ChannelParamSet) -> CapacityEntry {
    let (tau, loss) = homodyne_bob_loss(p);
    let (eta, eve) = extremum(
        &p.eta_set,
        |eta| 1.0 - homodyne_entropy(photons(eta, p.energy)),
        true,
    );
    CapacityEntry::new((1.0 - loss) - eve, tau, eta)
}

pub fn capacity_report(p: &ChannelParamSet) -> CapacityReport {
    let qq = qq_capacity(p);
    CapacityReport {
        received_photons: photons(qq.worst_tau, p.energy).value(),
        qq,
        cq: cq_capacity(p),
        cc: cc_capacity(p),
    }
}

/// One sweep point: a single legitimate transmissivity `tau` and eavesdropper
/// transmissivities `tau * sqrt(f)` for each fraction `f` of the received power.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub tau: f64,
    pub eta_sq_fractions: Vec<f64>,
}

impl SweepPoint {
    fn params(&self, energy: PhotonNumber) -> Result<ChannelParamSet> {
        if self.eta_sq_fractions.is_empty() {
            return Err(Error::config("eta_sq_fractions", "set is empty"));
        }
        if let Some(f) = self
            .eta_sq_fractions
            .iter()
            .find(|f| f.is_nan() || **f < 0.0)
        {
            return Err(Error::config(
                "eta_sq_fractions",
                format!("fraction {f} is negative"),
            ));
        }
        let etas = self
            .eta_sq_fractions
            .iter()
            .map(|f| self.tau * f.sqrt())
            .collect();
        ChannelParamSet::new(
            TransmissivitySet::singleton(self.tau),
            TransmissivitySet::Finite(etas),
            energy,
        )
    }
}

/// Evaluate all three formulas at every grid point. Output order matches
/// `grid` regardless of how the points are scheduled.
pub fn capacity_sweep(energy: PhotonNumber, grid: &[SweepPoint]) -> Result<Vec<CapacityReport>> {
    if grid.is_empty() {
        return Err(Error::config("grid", "sweep grid is empty"));
    }
    grid.par_iter()
        .enumerate()
        .map(|(index, point)| {
            point
                .params(energy)
                .map(|p| capacity_report(&p))
                .map_err(|e| Error::AtPoint {
                    index,
                    source: Box::new(e),
                })
        })
        .collect()
}
