//! Benchmark-only crate: the measurements live in `benches/pipelines.rs`
//! and cover Gram assembly, the full kernelized decomposition, the
//! quadrature oracle, and the dense eigensolve that dominates it.
//!
//! Run with `cargo bench -p kedmd-bench`.
