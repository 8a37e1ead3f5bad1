//! Criterion benchmarks of the solver kernels live under `benches/`.
