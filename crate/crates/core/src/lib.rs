//! Recursive Cartan decomposition of `SU(2^n)` into local rotations and
//! nearest-neighbour Ising couplings, with lowering to pulse programs for a
//! linear spin chain.

pub mod cartan;
pub mod error;
pub mod gates;
pub mod kak;
pub mod linalg;
pub mod pauli;
pub mod pipeline;
pub mod pulse;
pub mod selftest;
pub mod sim;

pub use cartan::{CartanElement, GeneratorSet};
pub use error::{Error, Result};
pub use gates::{Axis, Gate, GateList};
pub use kak::{decompose, GateTree};
pub use linalg::{CMat, UnitaryMatrix};
pub use pauli::{Letter, PauliExpansion, PauliString, PauliTerm, SubspaceTag};
pub use pipeline::{compile, run_pipeline, Compiled, PipelineReport};
pub use pulse::{ChainSpec, PulseEvent, PulseProgram};
pub use sim::FidelityReport;
