//! Lowering of Pauli exponentials to local rotations and nearest-neighbour
//! couplings, and of gate lists to timed pulse programs on an Ising chain.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cartan::CartanElement;
use crate::error::{Error, Result};
use crate::gates::{Axis, Gate, GateList};
use crate::linalg::UnitaryMatrix;
use crate::pauli::{all_commute, Letter, PauliString, MAX_QUBITS};
use crate::sim::simulate_pulse_program;

/// Linear chain of `n` spins with coupling `J[k]` (Hz) between spins `k+1` and `k+2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n: usize,
    #[serde(rename = "J")]
    pub j: Vec<f64>,
}

impl ChainSpec {
    pub fn new(n: usize, j: Vec<f64>) -> Result<Self> {
        let c = ChainSpec { n, j };
        c.validate()?;
        Ok(c)
    }

    pub fn uniform(n: usize, j: f64) -> Result<Self> {
        Self::new(n, vec![j; n.saturating_sub(1)])
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_QUBITS {
            return Err(Error::Range(format!("chain length {}", self.n)));
        }
        if self.j.len() != self.n - 1 {
            return Err(Error::Validation(format!(
                "{} couplings for a {}-spin chain",
                self.j.len(),
                self.n
            )));
        }
        if let Some(bad) = self.j.iter().find(|j| **j <= 0.0 || !j.is_finite()) {
            return Err(Error::Validation(format!(
                "coupling constant {bad} is not positive"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum PulseEvent {
    /// Ideal instantaneous rotation `exp(-i angle I_{q,axis})`.
    #[serde(rename = "pulse")]
    Pulse { q: usize, axis: Axis, angle: f64 },
    /// Free evolution under the chain drift for `t` seconds.
    #[serde(rename = "delay")]
    Delay { t: f64 },
}

/// Timed events against a chain. The intended operator is
/// `exp(i phase) * simulate(events)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseProgram {
    pub chain: ChainSpec,
    pub events: Vec<PulseEvent>,
    pub phase: f64,
}

impl PulseProgram {
    pub fn empty(chain: ChainSpec) -> Self {
        PulseProgram {
            chain,
            events: Vec::new(),
            phase: 0.0,
        }
    }

    /// Simulated propagator including the tracked global phase.
    pub fn propagator(&self) -> Result<UnitaryMatrix> {
        let u = simulate_pulse_program(self)?;
        Ok(UnitaryMatrix::new_unchecked(
            u.into_inner() * Complex64::from_polar(1.0, self.phase),
        ))
    }

    pub fn pulse_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, PulseEvent::Pulse { .. }))
            .count()
    }
}

/// Sum of all delay durations in seconds.
pub fn total_coupling_time(p: &PulseProgram) -> f64 {
    p.events
        .iter()
        .map(|e| match e {
            PulseEvent::Delay { t } => *t,
            PulseEvent::Pulse { .. } => 0.0,
        })
        .sum()
}

fn axis_of(l: Letter) -> Axis {
    match l {
        Letter::X => Axis::X,
        Letter::Y => Axis::Y,
        Letter::Z => Axis::Z,
        Letter::I => unreachable!("identity letter has no axis"),
    }
}

/// Local rotation `R` with `R sigma_z R^dag = sigma_l`, as (axis, angle).
fn to_z(l: Letter) -> Option<(Axis, f64)> {
    match l {
        Letter::X => Some((Axis::Y, FRAC_PI_2)),
        Letter::Y => Some((Axis::X, -FRAC_PI_2)),
        _ => None,
    }
}

/// Appends `exp(-i theta sigma_a (x) sigma_b / 2)` on qubits `q`, `q+1` (1-based).
pub fn push_pair_exponential(g: &mut GateList, q: usize, a: Letter, b: Letter, theta: f64) {
    let ra = to_z(a);
    let rb = to_z(b);
    if let Some((ax, ang)) = ra {
        g.local(q, ax, -ang);
    }
    if let Some((ax, ang)) = rb {
        g.local(q + 1, ax, -ang);
    }
    // sigma_z sigma_z / 2 = 2 I_z I_z
    g.coupling(q, 2.0 * theta);
    if let Some((ax, ang)) = ra {
        g.local(q, ax, ang);
    }
    if let Some((ax, ang)) = rb {
        g.local(q + 1, ax, ang);
    }
}

/// One conjugation step: `exp(-i (pi/4) sigma_Q)` with `Q` two adjacent letters
/// starting at 0-based qubit `at`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Conjugator {
    pub at: usize,
    pub first: Letter,
    pub second: Letter,
}

impl Conjugator {
    /// Gates for `exp(-i pi I_{first} I_{second})`, or its inverse.
    pub fn gates(&self, inverse: bool) -> GateList {
        let mut g = GateList::new();
        let theta = if inverse { -FRAC_PI_2 } else { FRAC_PI_2 };
        push_pair_exponential(&mut g, self.at + 1, self.first, self.second, theta);
        g
    }

    pub fn string(&self, n: usize) -> Result<PauliString> {
        let mut s = PauliString::identity(n)?;
        s.set(self.at, self.first);
        s.set(self.at + 1, self.second);
        Ok(s)
    }
}

/// Reduction of `sigma_P` to a weight-one or adjacent-pair core:
/// `sigma_P = C_1 .. C_k (sign sigma_core) C_k^dag .. C_1^dag`.
#[derive(Clone, Debug, PartialEq)]
pub struct Reduction {
    pub conjugators: Vec<Conjugator>,
    pub core: PauliString,
    pub sign: f64,
}

/// Walks the support of `p` from the left, removing one letter (or closing
/// one gap) per conjugation.
pub fn reduce_string(p: &PauliString) -> Result<Reduction> {
    if p.is_identity() {
        return Err(Error::Validation("cannot lower the identity string".into()));
    }
    let n = p.n();
    let mut cur = *p;
    let mut sign = 1.0;
    let mut conjugators = Vec::new();
    loop {
        let sup = cur.support();
        if sup.len() == 1 || (sup.len() == 2 && sup[1] == sup[0] + 1) {
            break;
        }
        let l = sup[0];
        let a = cur.letter(l);
        let b = cur.letter(l + 1);
        let (first, second) = if b != Letter::I {
            (a, if b == Letter::Y { Letter::X } else { Letter::Y })
        } else {
            (if a == Letter::Y { Letter::X } else { Letter::Y }, Letter::Z)
        };
        let c = Conjugator { at: l, first, second };
        // C^dag sigma_P C = i sigma_Q sigma_P for anticommuting P, Q.
        let (next, phase) = c.string(n)?.sigma_product(&cur);
        let f = Complex64::new(0.0, 1.0) * phase;
        debug_assert!(f.im.abs() < 1e-12);
        sign *= f.re;
        cur = next;
        conjugators.push(c);
    }
    Ok(Reduction {
        conjugators,
        core: cur,
        sign,
    })
}

/// Gates whose product is `exp(-i theta B_P)` exactly (including phase).
pub fn rewrite_pauli_exponential(p: &PauliString, theta: f64, chain: &ChainSpec) -> Result<GateList> {
    chain.validate()?;
    if p.n() > chain.n {
        return Err(Error::Validation(format!(
            "{}-qubit string on a {}-spin chain",
            p.n(),
            chain.n
        )));
    }
    if !theta.is_finite() {
        return Err(Error::Validation("non-finite exponent".into()));
    }
    let mut g = GateList::new();
    if theta.abs() <= crate::gates::ANGLE_EPS {
        return Ok(g);
    }
    let red = reduce_string(p)?;
    for c in &red.conjugators {
        g.extend(&c.gates(true));
    }
    let sup = red.core.support();
    let t = red.sign * theta;
    if sup.len() == 1 {
        g.local(sup[0] + 1, axis_of(red.core.letter(sup[0])), t);
    } else {
        push_pair_exponential(
            &mut g,
            sup[0] + 1,
            red.core.letter(sup[0]),
            red.core.letter(sup[1]),
            t,
        );
    }
    for c in red.conjugators.iter().rev() {
        g.extend(&c.gates(false));
    }
    Ok(g)
}

/// Lowers every term of a commuting element in declared order.
pub fn rewrite_cartan_factor(y: &CartanElement, chain: &ChainSpec) -> Result<GateList> {
    if !all_commute(y.generators()) {
        return Err(Error::Validation(
            "Cartan factor generators do not commute".into(),
        ));
    }
    let mut g = GateList::new();
    for (s, c) in y.terms() {
        g.extend(&rewrite_pauli_exponential(s, c, chain)?);
    }
    Ok(g)
}

/// Spins at odd distance from the pair `(k, k+1)` (1-based).
pub fn flip_set(n: usize, k: usize) -> Vec<usize> {
    (1..=n)
        .filter(|&s| {
            let d = if s < k {
                k - s
            } else if s > k + 1 {
                s - k - 1
            } else {
                0
            };
            d % 2 == 1
        })
        .collect()
}

/// Maps a gate list onto pulses and refocused delays.
///
/// Each coupling `exp(-i theta I_kz I_(k+1)z)` becomes a delay of
/// `theta / (2 pi J_k)` split by a pi x-pulse echo on [`flip_set`]; every
/// other coupling has exactly one endpoint flipped and cancels.
pub fn synthesize_pulses(g: &GateList, chain: &ChainSpec) -> Result<PulseProgram> {
    chain.validate()?;
    g.validate(chain.n)?;
    let mut prog = PulseProgram::empty(chain.clone());
    for gate in g {
        match *gate {
            Gate::LocalRotation { q, axis, angle } => {
                prog.events.push(PulseEvent::Pulse { q, axis, angle });
            }
            Gate::GlobalPhase { phi } => prog.phase += phi,
            Gate::CouplingEvolution { pair, angle } => {
                let k = pair[0];
                let mut theta = angle;
                if theta < 0.0 {
                    // exp(-i (theta + 4 pi) I_z I_z) = -exp(-i theta I_z I_z)
                    let m = (-theta / (4.0 * PI)).ceil();
                    theta += 4.0 * PI * m;
                    prog.phase += PI * m;
                }
                let t = theta / (2.0 * PI * chain.j[k - 1]);
                if t < 0.0 || t.is_nan() {
                    return Err(Error::numeric("negative delay after normalization", t));
                }
                let flips = flip_set(chain.n, k);
                if flips.is_empty() {
                    prog.events.push(PulseEvent::Delay { t });
                    continue;
                }
                for _ in 0..2 {
                    prog.events.push(PulseEvent::Delay { t: 0.5 * t });
                    for &s in &flips {
                        prog.events.push(PulseEvent::Pulse {
                            q: s,
                            axis: Axis::X,
                            angle: PI,
                        });
                    }
                }
                // each spin sees (-i X)(-i X) = -1
                prog.phase += PI * flips.len() as f64;
            }
        }
    }
    Ok(prog)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm_skew, max_abs};
    use crate::pauli::make_basis;
    use crate::sim::{apply_gate_list, distance};

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn chain(n: usize) -> ChainSpec {
        ChainSpec::uniform(n, 100.0).unwrap()
    }

    fn exact(s: &PauliString, theta: f64) -> crate::linalg::CMat {
        expm_skew(&s.dense(), theta).unwrap().into_inner()
    }

    #[test]
    fn zz_is_a_single_coupling() {
        let g = rewrite_pauli_exponential(&p("ZZ"), 0.6, &chain(2)).unwrap();
        assert_eq!(
            g.gates,
            vec![Gate::CouplingEvolution {
                pair: [1, 2],
                angle: 1.2
            }]
        );
    }

    #[test]
    fn every_string_is_exact() {
        for n in 1..=3 {
            for s in make_basis(n).unwrap() {
                for theta in [0.37, -1.1] {
                    let g = rewrite_pauli_exponential(&s, theta, &chain(n)).unwrap();
                    assert!(g.couplings_adjacent());
                    let u = apply_gate_list(&g, n).unwrap().into_inner();
                    let err = max_abs(&(u - exact(&s, theta)));
                    assert!(err < 1e-12, "{s} {theta}: {err}");
                }
            }
        }
    }

    #[test]
    fn long_strings_with_gaps() {
        for s in ["X1Y1Z", "Z111Z", "1Y11X", "XYZXY"] {
            let s = p(s);
            let g = rewrite_pauli_exponential(&s, 0.9, &chain(5)).unwrap();
            let u = apply_gate_list(&g, 5).unwrap().into_inner();
            assert!(max_abs(&(u - exact(&s, 0.9))) < 1e-12, "{s}");
        }
    }

    #[test]
    fn conjugators_match_closed_form() {
        for (a, b) in [
            (Letter::X, Letter::Y),
            (Letter::Z, Letter::Y),
            (Letter::Y, Letter::Z),
        ] {
            let c = Conjugator {
                at: 0,
                first: a,
                second: b,
            };
            let s = c.string(2).unwrap();
            let closed = expm_skew(&s.spin_product_dense(), PI).unwrap().into_inner();
            let u = apply_gate_list(&c.gates(false), 2).unwrap().into_inner();
            assert!(max_abs(&(u - closed)) < 1e-12);
        }
    }

    #[test]
    fn cartan_factor_product() {
        let y = CartanElement::over(crate::cartan::GeneratorSet::A(3), vec![0.2, 0.3, 0.4, 0.5]).unwrap();
        let g = rewrite_cartan_factor(&y, &chain(3)).unwrap();
        let u = apply_gate_list(&g, 3).unwrap().into_inner();
        assert!(max_abs(&(u - y.unitary().unwrap().into_inner())) < 1e-12);
        let zero = CartanElement::zero(crate::cartan::GeneratorSet::A(3)).unwrap();
        assert!(rewrite_cartan_factor(&zero, &chain(3)).unwrap().is_empty());
    }

    #[test]
    fn two_spin_delay() {
        let mut g = GateList::new();
        g.coupling(1, FRAC_PI_2);
        let prog = synthesize_pulses(&g, &chain(2)).unwrap();
        assert_eq!(prog.events, vec![PulseEvent::Delay { t: 1.0 / 400.0 }]);
        assert!((total_coupling_time(&prog) - 2.5e-3).abs() < 1e-15);
    }

    #[test]
    fn local_rotation_is_verbatim() {
        let mut g = GateList::new();
        g.local(2, Axis::X, FRAC_PI_2);
        let prog = synthesize_pulses(&g, &chain(3)).unwrap();
        assert_eq!(
            prog.events,
            vec![PulseEvent::Pulse {
                q: 2,
                axis: Axis::X,
                angle: FRAC_PI_2
            }]
        );
    }

    #[test]
    fn flip_sets() {
        assert_eq!(flip_set(3, 2), vec![1]);
        assert_eq!(flip_set(3, 1), vec![3]);
        assert_eq!(flip_set(5, 2), vec![1, 4]);
        assert!(flip_set(2, 1).is_empty());
    }

    #[test]
    fn refocused_blocks_are_exact() {
        for n in 3..=5 {
            for k in 1..n {
                for theta in [0.1, FRAC_PI_2, PI, 3.9, -0.7] {
                    let mut g = GateList::new();
                    g.push(Gate::CouplingEvolution {
                        pair: [k, k + 1],
                        angle: theta,
                    });
                    let prog = synthesize_pulses(&g, &chain(n)).unwrap();
                    let u = prog.propagator().unwrap().into_inner();
                    let want = apply_gate_list(&g, n).unwrap().into_inner();
                    assert!(max_abs(&(u - want)) < 1e-10, "n={n} k={k} theta={theta}");
                }
            }
        }
    }

    #[test]
    fn raw_negative_coupling_uses_four_pi() {
        let g: GateList = vec![Gate::CouplingEvolution {
            pair: [1, 2],
            angle: -0.5,
        }]
        .into_iter()
        .collect();
        let prog = synthesize_pulses(&g, &chain(2)).unwrap();
        let t = total_coupling_time(&prog);
        assert!((t - (4.0 * PI - 0.5) / (200.0 * PI)).abs() < 1e-15);
        let r = distance(
            prog.propagator().unwrap().matrix(),
            apply_gate_list(&g, 2).unwrap().matrix(),
        )
        .unwrap();
        assert!(r.frobenius_phase_invariant < 1e-7);
    }

    #[test]
    fn cnot_coupling_time() {
        let mut g = GateList::new();
        g.coupling(1, PI);
        let prog = synthesize_pulses(&g, &chain(2)).unwrap();
        assert!((total_coupling_time(&prog) - 5e-3).abs() < 1e-15);
        assert_eq!(total_coupling_time(&PulseProgram::empty(chain(2))), 0.0);
    }

    #[test]
    fn program_json_schema() {
        let prog = PulseProgram {
            chain: chain(3),
            events: vec![
                PulseEvent::Pulse {
                    q: 1,
                    axis: Axis::X,
                    angle: 2.5,
                },
                PulseEvent::Delay { t: 0.0025 },
            ],
            phase: 0.0,
        };
        assert_eq!(
            serde_json::to_string(&prog).unwrap(),
            r#"{"chain":{"n":3,"J":[100.0,100.0]},"events":[{"kind":"pulse","q":1,"axis":"x","angle":2.5},{"kind":"delay","t":0.0025}],"phase":0.0}"#
        );
    }

    #[test]
    fn chain_validation() {
        assert!(ChainSpec::new(3, vec![100.0]).is_err());
        assert!(ChainSpec::new(3, vec![100.0, 0.0]).is_err());
        assert!(ChainSpec::new(0, vec![]).is_err());
        let mut g = GateList::new();
        g.local(4, Axis::X, 1.0);
        assert!(synthesize_pulses(&g, &chain(3)).is_err());
    }
}
