//! Benchmarks for heegner-core live in `benches/`.
