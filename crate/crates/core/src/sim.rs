//! Dense propagators for gate lists and pulse programs, and phase-invariant
//! distances between unitaries.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{Axis, Gate, GateList};
use crate::linalg::{c64, CMat, UnitaryMatrix};
use crate::pulse::{ChainSpec, PulseEvent, PulseProgram};

/// `exp(-i angle sigma_axis / 2)`.
pub fn rotation_2x2(axis: Axis, angle: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = (0.5 * angle).sin_cos();
    match axis {
        Axis::X => [[c64(c, 0.0), c64(0.0, -s)], [c64(0.0, -s), c64(c, 0.0)]],
        Axis::Y => [[c64(c, 0.0), c64(-s, 0.0)], [c64(s, 0.0), c64(c, 0.0)]],
        Axis::Z => [[c64(c, -s), c64(0.0, 0.0)], [c64(0.0, 0.0), c64(c, s)]],
    }
}

/// Left-multiplies `m` by a 2x2 operator on qubit `q` (1-based) of `n`.
pub fn apply_single(m: &mut CMat, n: usize, q: usize, op: &[[Complex64; 2]; 2]) {
    let bit = 1usize << (n - q);
    let dim = m.nrows();
    for row in 0..dim {
        if row & bit != 0 {
            continue;
        }
        let r1 = row | bit;
        for col in 0..m.ncols() {
            let a = m[(row, col)];
            let b = m[(r1, col)];
            m[(row, col)] = op[0][0] * a + op[0][1] * b;
            m[(r1, col)] = op[1][0] * a + op[1][1] * b;
        }
    }
}

/// Left-multiplies by `exp(-i angle I_kz I_lz)`.
pub fn apply_coupling(m: &mut CMat, n: usize, k: usize, l: usize, angle: f64) {
    let bk = 1usize << (n - k);
    let bl = 1usize << (n - l);
    let plus = Complex64::from_polar(1.0, -0.25 * angle);
    let minus = plus.conj();
    for row in 0..m.nrows() {
        let same = (row & bk == 0) == (row & bl == 0);
        let ph = if same { plus } else { minus };
        for col in 0..m.ncols() {
            m[(row, col)] *= ph;
        }
    }
}

/// Product of a time-ordered gate list on `n` qubits.
pub fn apply_gate_list(g: &GateList, n: usize) -> Result<UnitaryMatrix> {
    if n == 0 || n > crate::pauli::MAX_QUBITS {
        return Err(Error::Range(format!("qubit count {n}")));
    }
    let dim = 1usize << n;
    let mut m = CMat::identity(dim, dim);
    for gate in g {
        match *gate {
            Gate::LocalRotation { q, axis, angle } => {
                if q == 0 || q > n {
                    return Err(Error::Validation(format!(
                        "rotation on qubit {q} outside 1..={n}"
                    )));
                }
                apply_single(&mut m, n, q, &rotation_2x2(axis, angle));
            }
            Gate::CouplingEvolution { pair, angle } => {
                let [k, l] = pair;
                if k == 0 || l == 0 || k > n || l > n || k == l {
                    return Err(Error::Validation(format!("coupling {pair:?} outside 1..={n}")));
                }
                apply_coupling(&mut m, n, k, l, angle);
            }
            Gate::GlobalPhase { phi } => {
                m *= Complex64::from_polar(1.0, phi);
            }
        }
    }
    Ok(UnitaryMatrix::new_unchecked(m))
}

/// Diagonal of `exp(-i t sum_k 2 pi J_k I_kz I_(k+1)z)`.
pub fn drift_diagonal(chain: &ChainSpec, t: f64) -> Vec<Complex64> {
    let n = chain.n;
    (0..1usize << n)
        .map(|idx| {
            let z = |k: usize| -> f64 {
                // qubit k (1-based) is bit n-k
                if idx >> (n - k) & 1 == 0 {
                    1.0
                } else {
                    -1.0
                }
            };
            let energy: f64 = chain
                .j
                .iter()
                .enumerate()
                .map(|(i, jk)| 2.0 * std::f64::consts::PI * jk * 0.25 * z(i + 1) * z(i + 2))
                .sum();
            Complex64::from_polar(1.0, -t * energy)
        })
        .collect()
}

/// Propagator of a pulse program under the chain drift with ideal pulses.
///
/// The program's `phase` field is not applied; see [`PulseProgram::propagator`].
pub fn simulate_pulse_program(p: &PulseProgram) -> Result<UnitaryMatrix> {
    p.chain.validate()?;
    let n = p.chain.n;
    let dim = 1usize << n;
    let mut m = CMat::identity(dim, dim);
    for ev in &p.events {
        match *ev {
            PulseEvent::Pulse { q, axis, angle } => {
                if q == 0 || q > n {
                    return Err(Error::Validation(format!("pulse on spin {q} outside 1..={n}")));
                }
                apply_single(&mut m, n, q, &rotation_2x2(axis, angle));
            }
            PulseEvent::Delay { t } => {
                if t < 0.0 || !t.is_finite() {
                    return Err(Error::Validation(format!("negative delay {t}")));
                }
                let d = drift_diagonal(&p.chain, t);
                for (row, ph) in d.iter().enumerate() {
                    for col in 0..dim {
                        m[(row, col)] *= ph;
                    }
                }
            }
        }
    }
    Ok(UnitaryMatrix::new_unchecked(m))
}

/// Phase-invariant comparison of two unitaries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    /// `min_phi ||U - e^{i phi} V||_F`.
    #[serde(rename = "dfro")]
    pub frobenius_phase_invariant: f64,
    /// `|tr(U^dag V)| / dim`.
    #[serde(rename = "fid")]
    pub trace_fidelity: f64,
    pub dim: usize,
}

pub fn distance(u: &CMat, v: &CMat) -> Result<FidelityReport> {
    if u.shape() != v.shape() || !u.is_square() {
        return Err(Error::Dimension(format!("{:?} vs {:?}", u.shape(), v.shape())));
    }
    let dim = u.nrows();
    // tr(U^dag V) without forming the product
    let tr: Complex64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
    let overlap = tr.norm();
    // Align the phase and measure the difference directly; the closed form
    // sqrt(2d - 2|tr|) cancels catastrophically near zero.
    let align = if overlap > 0.0 {
        tr / overlap
    } else {
        Complex64::new(1.0, 0.0)
    };
    let dfro = u
        .iter()
        .zip(v.iter())
        .map(|(a, b)| (a * align - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(FidelityReport {
        frobenius_phase_invariant: dfro,
        trace_fidelity: overlap / dim as f64,
        dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm_skew, haar_random, max_abs};
    use crate::pauli::PauliString;
    use std::f64::consts::PI;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn empty_list_is_identity() {
        let u = apply_gate_list(&GateList::new(), 3).unwrap();
        assert_eq!(u.into_inner(), CMat::identity(8, 8));
    }

    #[test]
    fn x_pi_rotation() {
        let mut g = GateList::new();
        g.local(1, Axis::X, PI);
        let u = apply_gate_list(&g, 1).unwrap();
        // exp(-i pi I_x) = -i sigma_x, determinant 1
        let expected = p("X").sigma_dense() * c64(0.0, -1.0);
        assert!(max_abs(&(u.matrix() - expected)) < 1e-15);
        assert!((u.det() - c64(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn gates_match_expm() {
        let mut g = GateList::new();
        g.local(2, Axis::Y, 0.37);
        let u = apply_gate_list(&g, 3).unwrap();
        let e = expm_skew(&p("1Y1").dense(), 0.37).unwrap();
        assert!(max_abs(&(u.into_inner() - e.into_inner())) < 1e-14);

        let mut g = GateList::new();
        g.coupling(2, 0.9);
        let u = apply_gate_list(&g, 3).unwrap();
        let e = expm_skew(&p("1ZZ").spin_product_dense(), 0.9).unwrap();
        assert!(max_abs(&(u.into_inner() - e.into_inner())) < 1e-14);
    }

    #[test]
    fn flipped_coupling_is_exact() {
        let mut g = GateList::new();
        g.coupling(1, -0.8);
        let u = apply_gate_list(&g, 2).unwrap();
        let e = expm_skew(&p("ZZ").spin_product_dense(), -0.8).unwrap();
        assert!(max_abs(&(u.into_inner() - e.into_inner())) < 1e-14);
    }

    #[test]
    fn concatenation_is_product() {
        let mut a = GateList::new();
        a.local(1, Axis::X, 0.3);
        a.coupling(1, 1.2);
        let mut b = GateList::new();
        b.local(2, Axis::Z, -0.7);
        b.phase(0.4);
        let mut ab = a.clone();
        ab.extend(&b);
        let lhs = apply_gate_list(&ab, 2).unwrap();
        let rhs = &apply_gate_list(&b, 2).unwrap() * &apply_gate_list(&a, 2).unwrap();
        assert!(max_abs(&(lhs.into_inner() - rhs.into_inner())) < 1e-14);
    }

    #[test]
    fn out_of_range_qubit() {
        let mut g = GateList::new();
        g.local(4, Axis::X, 1.0);
        assert!(matches!(apply_gate_list(&g, 3), Err(Error::Validation(_))));
    }

    #[test]
    fn drift_closed_form() {
        let chain = ChainSpec::uniform(2, 100.0).unwrap();
        let prog = PulseProgram {
            chain,
            events: vec![PulseEvent::Delay { t: 1.0 / 200.0 }],
            phase: 0.0,
        };
        let u = simulate_pulse_program(&prog).unwrap();
        let a = Complex64::from_polar(1.0, -PI / 4.0);
        let expected = [a, a.conj(), a.conj(), a];
        for (i, e) in expected.iter().enumerate() {
            assert!((u.matrix()[(i, i)] - e).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_coupling_drift_is_identity() {
        let chain = ChainSpec {
            n: 3,
            j: vec![0.0, 0.0],
        };
        let d = drift_diagonal(&chain, 12.5);
        assert!(d.iter().all(|z| (z - c64(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn negative_delay_rejected() {
        let prog = PulseProgram {
            chain: ChainSpec::uniform(2, 100.0).unwrap(),
            events: vec![PulseEvent::Delay { t: -1e-3 }],
            phase: 0.0,
        };
        assert!(matches!(simulate_pulse_program(&prog), Err(Error::Validation(_))));
    }

    #[test]
    fn distance_examples() {
        let u = haar_random(4, 1).into_inner();
        let r = distance(&u, &u).unwrap();
        assert!((r.trace_fidelity - 1.0).abs() < 1e-14);
        assert!(r.frobenius_phase_invariant < 1e-6);
        let shifted = &u * Complex64::from_polar(1.0, 0.9);
        let r = distance(&u, &shifted).unwrap();
        assert!((r.trace_fidelity - 1.0).abs() < 1e-14);
        let z = expm_skew(&p("Z").dense(), PI).unwrap().into_inner();
        let r = distance(&CMat::identity(2, 2), &z).unwrap();
        assert!(r.trace_fidelity < 1e-15);
        assert!((r.frobenius_phase_invariant - 2.0).abs() < 1e-14);
        assert!(distance(&u, &CMat::identity(2, 2)).is_err());
    }

    #[test]
    fn distance_is_symmetric_and_phase_invariant() {
        let u = haar_random(8, 2).into_inner();
        let v = haar_random(8, 3).into_inner();
        let a = distance(&u, &v).unwrap();
        let b = distance(&v, &u).unwrap();
        assert!((a.frobenius_phase_invariant - b.frobenius_phase_invariant).abs() < 1e-14);
        let c = distance(&(&u * Complex64::from_polar(1.0, 2.1)), &v).unwrap();
        assert!((a.frobenius_phase_invariant - c.frobenius_phase_invariant).abs() < 1e-13);
    }
}
