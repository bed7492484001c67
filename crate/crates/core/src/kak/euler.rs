use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{Axis, GateList};
use crate::linalg::{c64, CMat, UnitaryMatrix};
use crate::sim::rotation_2x2;

const TWO_PI: f64 = 2.0 * PI;
const DET_TOL: f64 = 1e-10;
const TINY: f64 = 1e-15;

/// `exp(-i alpha I_x) exp(-i beta I_z) exp(-i gamma I_x)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerAngles {
    pub fn matrix(&self) -> CMat {
        rot(Axis::X, self.alpha) * rot(Axis::Z, self.beta) * rot(Axis::X, self.gamma)
    }

    /// Time-ordered rotations on qubit `q`.
    pub fn push_gates(&self, g: &mut GateList, q: usize) {
        g.local(q, Axis::X, self.gamma);
        g.local(q, Axis::Z, self.beta);
        g.local(q, Axis::X, self.alpha);
    }
}

/// Dense `exp(-i angle I_axis)`.
pub fn rot(axis: Axis, angle: f64) -> CMat {
    let r = rotation_2x2(axis, angle);
    CMat::from_fn(2, 2, |i, j| r[i][j])
}

/// XZX Euler angles of a special unitary 2x2 matrix.
///
/// Branch: `alpha, gamma` in `[0, 2 pi)`, `beta` in `[0, 4 pi)`; `beta`
/// absorbs the sign picked up when `alpha` and `gamma` are wrapped.
pub fn euler_su2(u: &UnitaryMatrix) -> Result<EulerAngles> {
    if u.dim() != 2 {
        return Err(Error::Dimension(format!("euler_su2 needs 2x2, got {}", u.dim())));
    }
    let d = u.det();
    if (d - c64(1.0, 0.0)).norm() > DET_TOL {
        return Err(Error::Validation(format!(
            "determinant {d} is not 1; strip the phase first"
        )));
    }
    // Conjugating by the Hadamard turns the XZX product into ZXZ:
    // V00 = cos(b/2) e^{-i(a+g)/2}, V10 = -i sin(b/2) e^{i(a-g)/2}.
    let m = u.matrix();
    let h = 0.5f64.sqrt();
    let v00 = (m[(0, 0)] + m[(0, 1)] + m[(1, 0)] + m[(1, 1)]) * h * h;
    let v10 = (m[(0, 0)] + m[(0, 1)] - m[(1, 0)] - m[(1, 1)]) * h * h;
    let half_beta = v10.norm().atan2(v00.norm());
    let sum = if v00.norm() < TINY { 0.0 } else { -2.0 * v00.arg() };
    let diff = if v10.norm() < TINY {
        0.0
    } else {
        2.0 * (v10.arg() + FRAC_PI_2)
    };
    let alpha = 0.5 * (sum + diff);
    let gamma = 0.5 * (sum - diff);
    let (alpha, wa) = wrap(alpha);
    let (gamma, wg) = wrap(gamma);
    let mut beta = 2.0 * half_beta;
    if (wa + wg).rem_euclid(2) == 1 {
        beta += TWO_PI;
    }
    Ok(EulerAngles { alpha, beta, gamma })
}

/// Reduces into `[0, 2 pi)`, returning the number of periods removed.
fn wrap(x: f64) -> (f64, i64) {
    let k = (x / TWO_PI).floor();
    let mut r = x - k * TWO_PI;
    let mut k = k as i64;
    if r >= TWO_PI {
        r -= TWO_PI;
        k += 1;
    }
    (r, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{haar_special, max_abs};

    #[test]
    fn identity() {
        let a = euler_su2(&UnitaryMatrix::identity(2)).unwrap();
        assert_eq!(a, EulerAngles::default());
    }

    #[test]
    fn z_rotation() {
        let u = UnitaryMatrix::new(rot(Axis::Z, 1.1)).unwrap();
        let a = euler_su2(&u).unwrap();
        assert!(a.alpha.abs() < 1e-15 && a.gamma.abs() < 1e-15);
        assert!((a.beta - 1.1).abs() < 1e-15);
    }

    #[test]
    fn minus_identity() {
        let u = UnitaryMatrix::new(CMat::identity(2, 2) * c64(-1.0, 0.0)).unwrap();
        let a = euler_su2(&u).unwrap();
        assert!(max_abs(&(a.matrix() - u.matrix())) < 1e-15);
    }

    #[test]
    fn haar_reconstruction_and_branch() {
        for seed in 0..200 {
            let u = haar_special(2, seed);
            let a = euler_su2(&u).unwrap();
            assert!(max_abs(&(a.matrix() - u.matrix())) < 1e-12, "seed {seed}");
            assert!((0.0..TWO_PI).contains(&a.alpha));
            assert!((0.0..TWO_PI).contains(&a.gamma));
            assert!((0.0..2.0 * TWO_PI).contains(&a.beta));
        }
    }

    #[test]
    fn x_only() {
        let u = UnitaryMatrix::new(rot(Axis::X, 0.8)).unwrap();
        let a = euler_su2(&u).unwrap();
        assert!(max_abs(&(a.matrix() - u.matrix())) < 1e-15);
    }

    #[test]
    fn rejects_phase() {
        let u = UnitaryMatrix::new(CMat::identity(2, 2) * c64(0.0, 1.0)).unwrap();
        assert!(matches!(euler_su2(&u), Err(Error::Validation(_))));
    }
}
