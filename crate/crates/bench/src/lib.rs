//! Criterion benchmarks for fsnormal; see `benches/throughput.rs`.
