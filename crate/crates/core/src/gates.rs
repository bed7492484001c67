//! Flat gate sequences in time order.
//!
//! Rotation convention used everywhere: `LocalRotation { q, axis, angle }` is
//! `exp(-i angle I_{q,axis})` with `I = sigma / 2`, so an angle of `2 pi` gives
//! `-1`. `CouplingEvolution { pair: [k, k+1], angle }` is
//! `exp(-i angle I_{kz} I_{(k+1)z})`. Qubits are numbered from 1.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Angles at or below this magnitude are dropped when building lists.
pub const ANGLE_EPS: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        };
        f.write_str(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Gate {
    #[serde(rename = "local")]
    LocalRotation { q: usize, axis: Axis, angle: f64 },
    #[serde(rename = "zz")]
    CouplingEvolution { pair: [usize; 2], angle: f64 },
    #[serde(rename = "phase")]
    GlobalPhase { phi: f64 },
}

impl Gate {
    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::LocalRotation { q, axis, angle } => Gate::LocalRotation {
                q,
                axis,
                angle: -angle,
            },
            Gate::CouplingEvolution { pair, angle } => Gate::CouplingEvolution { pair, angle: -angle },
            Gate::GlobalPhase { phi } => Gate::GlobalPhase { phi: -phi },
        }
    }
}

/// Primitive gates in the order they are applied.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GateList {
    pub gates: Vec<Gate>,
}

impl GateList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Gate> {
        self.gates.iter()
    }

    pub fn local(&mut self, q: usize, axis: Axis, angle: f64) {
        if angle.abs() > ANGLE_EPS {
            self.gates.push(Gate::LocalRotation { q, axis, angle });
        }
    }

    pub fn phase(&mut self, phi: f64) {
        if phi != 0.0 {
            self.gates.push(Gate::GlobalPhase { phi });
        }
    }

    /// Appends `exp(-i angle I_kz I_(k+1)z)` with a non-negative angle.
    ///
    /// A negative angle is realized as `X_k exp(-i |angle| I_kz I_(k+1)z) X_k`;
    /// `X_k = i exp(-i pi I_kx)`, so the sandwich carries a phase of `-1`.
    pub fn coupling(&mut self, k: usize, angle: f64) {
        if angle.abs() <= ANGLE_EPS {
            return;
        }
        let pair = [k, k + 1];
        if angle > 0.0 {
            self.gates.push(Gate::CouplingEvolution { pair, angle });
        } else {
            self.gates.push(Gate::LocalRotation {
                q: k,
                axis: Axis::X,
                angle: std::f64::consts::PI,
            });
            self.gates.push(Gate::CouplingEvolution { pair, angle: -angle });
            self.gates.push(Gate::LocalRotation {
                q: k,
                axis: Axis::X,
                angle: std::f64::consts::PI,
            });
            self.gates.push(Gate::GlobalPhase {
                phi: std::f64::consts::PI,
            });
        }
    }

    /// Appends a gate, routing couplings through [`GateList::coupling`].
    pub fn push(&mut self, g: Gate) {
        match g {
            Gate::LocalRotation { q, axis, angle } => self.local(q, axis, angle),
            Gate::CouplingEvolution { pair, angle } => {
                if pair[1] == pair[0] + 1 {
                    self.coupling(pair[0], angle)
                } else {
                    self.gates.push(g)
                }
            }
            Gate::GlobalPhase { phi } => self.phase(phi),
        }
    }

    pub fn extend(&mut self, other: &GateList) {
        self.gates.extend_from_slice(&other.gates);
    }

    /// The list whose product is the inverse operator.
    pub fn inverse(&self) -> GateList {
        let mut out = GateList::new();
        for g in self.gates.iter().rev() {
            out.push(g.inverse());
        }
        out
    }

    pub fn local_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::LocalRotation { .. }))
            .count()
    }

    pub fn coupling_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::CouplingEvolution { .. }))
            .count()
    }

    /// Sum of the emitted global phases.
    pub fn total_phase(&self) -> f64 {
        self.gates
            .iter()
            .map(|g| match g {
                Gate::GlobalPhase { phi } => *phi,
                _ => 0.0,
            })
            .sum()
    }

    /// Highest qubit label referenced, 0 for a list without qubit gates.
    pub fn max_qubit(&self) -> usize {
        self.gates
            .iter()
            .map(|g| match g {
                Gate::LocalRotation { q, .. } => *q,
                Gate::CouplingEvolution { pair, .. } => pair[0].max(pair[1]),
                Gate::GlobalPhase { .. } => 0,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn couplings_adjacent(&self) -> bool {
        self.gates.iter().all(|g| match g {
            Gate::CouplingEvolution { pair, .. } => pair[1] == pair[0] + 1 && pair[0] >= 1,
            _ => true,
        })
    }

    /// Checks qubit labels against an `n`-qubit register and coupling adjacency.
    pub fn validate(&self, n: usize) -> Result<()> {
        for g in &self.gates {
            match g {
                Gate::LocalRotation { q, angle, .. } => {
                    if *q == 0 || *q > n {
                        return Err(Error::Validation(format!(
                            "rotation on qubit {q} outside 1..={n}"
                        )));
                    }
                    if !angle.is_finite() {
                        return Err(Error::Validation("non-finite rotation angle".into()));
                    }
                }
                Gate::CouplingEvolution { pair, angle } => {
                    if pair[0] == 0 || pair[1] != pair[0] + 1 || pair[1] > n {
                        return Err(Error::Validation(format!(
                            "coupling {pair:?} is not an adjacent pair of a {n}-spin chain"
                        )));
                    }
                    if !angle.is_finite() {
                        return Err(Error::Validation("non-finite coupling angle".into()));
                    }
                }
                Gate::GlobalPhase { phi } => {
                    if !phi.is_finite() {
                        return Err(Error::Validation("non-finite phase".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

impl FromIterator<Gate> for GateList {
    fn from_iter<T: IntoIterator<Item = Gate>>(iter: T) -> Self {
        GateList {
            gates: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a GateList {
    type Item = &'a Gate;
    type IntoIter = std::slice::Iter<'a, Gate>;

    fn into_iter(self) -> Self::IntoIter {
        self.gates.iter()
    }
}
