//! Benchmark-only crate; see `benches/hadamard.rs`.
