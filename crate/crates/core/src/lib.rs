//! Private capacities of the bosonic compound wiretap channel under BPSK
//! modulation, together with the finite-size numerics used to check the
//! random-coding construction behind them.
//!
//! Module map:
//!
//! - [`entropy`]: scalar entropies in bits.
//! - [`capacity`]: QQ / CQ / CC worst-case private capacities and sweeps.
//! - [`gram`]: exact pure-state ensemble functionals through Gram matrices.
//! - [`fock`]: truncated number-basis oracle.
//! - [`proof`]: typicality, pruned distributions and packing/covering bounds.
//! - [`codesim`]: random wiretap codebooks at small block length.
//! - [`scenario`]: satellite-downlink scenario, sweep rows and CSV/JSON I/O.
//! - [`verify`]: named check suites driven by the CLI.

pub mod capacity;
pub mod codesim;
pub mod entropy;
pub mod error;
pub mod fock;
pub mod gram;
pub mod linalg;
pub mod proof;
pub mod scenario;
pub mod verify;

pub use capacity::{
    capacity_report, capacity_sweep, cc_capacity, clip_nonnegative, cq_capacity, qq_capacity,
    received_photon_number, CapacityEntry, CapacityReport, ChannelParamSet, SweepPoint,
    TransmissivitySet,
};
pub use codesim::{
    covering_distance, covering_trend, leakage, leakage_monotonicity, sample_codebook,
    success_probability, Codebook, WiretapCodeReport,
};
pub use entropy::{
    binary_entropy, entropy_continuity_bound, h_bpsk, homodyne_error, sample_entropy, Bits,
    FiniteDistribution, PhotonNumber, Probability,
};
pub use error::{Error, Result};
pub use fock::{FockFrame, FockOperator, FockVector};
pub use gram::{
    average_state_distance, build_gram, coherent_overlap, ensemble_entropy, srm_success,
    CoherentLabel, GramMatrix, WeightedEnsemble,
};
pub use num_complex::Complex64;
pub use proof::{
    achievable_rate, covering_bound, is_strongly_typical, packing_bound, pruned_distribution,
    typical_set, typical_subspace_dims, ProofParams, TypicalityParams,
};
pub use scenario::{block_budget, run_sweep, ScenarioConfig, SimulationConfig, SweepRow};
pub use verify::{run_suite, Suite, SuiteReport};
