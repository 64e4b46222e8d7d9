//! Criterion benchmarks for the gridfire engine live under `benches/`.
