//! Criterion benchmarks for the numerical kernels of `wiretap-core`; see
//! `benches/kernels.rs`.
