//! Benchmark fixtures; see `benches/solvers.rs`.

pub use disloc;
