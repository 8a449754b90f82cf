//! Criterion benchmarks for `tca-core`; see `benches/construction.rs`.
