//! File-backed driver for the ticketing protocol: one operation per role,
//! scripted scenarios and benchmarks. The `asso` binary is a thin CLI over
//! this library.

pub mod bench;
pub mod ops;
pub mod rng;
pub mod scenario;
pub mod state;
