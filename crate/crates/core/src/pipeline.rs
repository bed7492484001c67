//! Target unitary to verified pulse program in one call.

use crate::error::{Error, Result};
use crate::gates::GateList;
use crate::kak::{budget, decompose, GateTree};
use crate::linalg::UnitaryMatrix;
use crate::pulse::{synthesize_pulses, total_coupling_time, ChainSpec, PulseProgram};
use crate::sim::{apply_gate_list, distance, FidelityReport};

#[derive(Clone, Debug)]
pub struct Compiled {
    pub tree: GateTree,
    pub gates: GateList,
    /// Phase-invariant distance between the flattened list and the target.
    pub residual: f64,
}

/// Decomposes `u` and flattens the tree, failing if the flattened list misses
/// the reconstruction budget for its size.
pub fn compile(u: &UnitaryMatrix) -> Result<Compiled> {
    let n = u.num_qubits()?;
    let tree = decompose(u)?;
    let gates = tree.flatten(n)?;
    let residual = distance(apply_gate_list(&gates, n)?.matrix(), u.matrix())?.frobenius_phase_invariant;
    if residual > budget(n) {
        return Err(Error::numeric("flattened sequence misses the target", residual));
    }
    Ok(Compiled {
        tree,
        gates,
        residual,
    })
}

#[derive(Clone, Debug)]
pub struct PipelineReport {
    pub compiled: Compiled,
    pub program: PulseProgram,
    pub fidelity: FidelityReport,
    /// Seconds of free evolution.
    pub coupling_time: f64,
}

/// Full chain: decompose, lower to pulses under `chain`, simulate the drift.
pub fn run_pipeline(u: &UnitaryMatrix, chain: &ChainSpec) -> Result<PipelineReport> {
    let n = u.num_qubits()?;
    if chain.n != n {
        return Err(Error::Validation(format!(
            "{n}-qubit target on a {}-spin chain",
            chain.n
        )));
    }
    let compiled = compile(u)?;
    let program = synthesize_pulses(&compiled.gates, chain)?;
    let fidelity = distance(program.propagator()?.matrix(), u.matrix())?;
    let coupling_time = total_coupling_time(&program);
    Ok(PipelineReport {
        compiled,
        program,
        fidelity,
        coupling_time,
    })
}
