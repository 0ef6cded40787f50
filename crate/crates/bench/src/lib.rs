//! Criterion benchmarks for the pftg kernels; see `benches/`.
