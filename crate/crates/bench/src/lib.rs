//! Criterion benchmarks for the propagation and fitting paths; see `benches/`.
