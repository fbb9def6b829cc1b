//! Criterion benchmarks for the fogsim crate live under `benches/`.
