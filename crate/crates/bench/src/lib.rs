//! Criterion benchmarks for parklab; see `benches/`.
