//! Benchmarks for `bds-core` live under `benches/`.
