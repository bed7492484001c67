//! Canonical two-qubit decomposition via the magic basis.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::{DMatrix, Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::euler::{euler_su2, rot, EulerAngles};
use crate::error::{Error, Result};
use crate::gates::{Axis, GateList};
use crate::linalg::{c64, kron, CMat, UnitaryMatrix, RECONSTRUCTION_BUDGET};
use crate::pauli::PauliString;

/// `U = e^{i phase} (L1 (x) L2) exp(-i (a1 I1xI2x + a2 I1yI2y + a3 I1zI2z)) (R1 (x) R2)`
/// with `pi >= a1 >= a2 >= |a3|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KakSu4 {
    pub phase: f64,
    pub alpha: [f64; 3],
    pub l1: EulerAngles,
    pub l2: EulerAngles,
    pub r1: EulerAngles,
    pub r2: EulerAngles,
}

impl KakSu4 {
    pub fn matrix(&self) -> CMat {
        let l = kron(&self.l1.matrix(), &self.l2.matrix());
        let r = kron(&self.r1.matrix(), &self.r2.matrix());
        l * canonical_unitary(self.alpha) * r * Complex64::from_polar(1.0, self.phase)
    }

    /// `pi >= alpha_1 >= alpha_2 >= |alpha_3|`, each inequality relaxed by `eps`.
    pub fn in_chamber(&self, eps: f64) -> bool {
        let a = self.alpha;
        PI + eps >= a[0] && a[0] + eps >= a[1] && a[1] + eps >= a[2].abs()
    }

    /// Time-ordered gates on qubits `q`, `q+1`, following
    /// `K1 Ky E(a1) Ky^-1 Kx^-1 E(a2) Kx E(a3) K2` with `E(a) = exp(-i a I_z I_z)`.
    pub fn push_gates(&self, g: &mut GateList, q: usize) {
        g.phase(self.phase);
        self.r1.push_gates(g, q);
        self.r2.push_gates(g, q + 1);
        let both = |g: &mut GateList, axis: Axis, angle: f64| {
            g.local(q, axis, angle);
            g.local(q + 1, axis, angle);
        };
        g.coupling(q, self.alpha[2]);
        both(g, Axis::X, FRAC_PI_2);
        g.coupling(q, self.alpha[1]);
        both(g, Axis::X, -FRAC_PI_2);
        both(g, Axis::Y, -FRAC_PI_2);
        g.coupling(q, self.alpha[0]);
        both(g, Axis::Y, FRAC_PI_2);
        self.l1.push_gates(g, q);
        self.l2.push_gates(g, q + 1);
    }
}

fn sigma2(s: &str) -> CMat {
    s.parse::<PauliString>().expect("static label").sigma_dense()
}

/// `exp(-i (a1 I1xI2x + a2 I1yI2y + a3 I1zI2z))`.
pub fn canonical_unitary(alpha: [f64; 3]) -> CMat {
    let mut u = CMat::identity(4, 4);
    for (a, s) in alpha.iter().zip(["XX", "YY", "ZZ"]) {
        // I I = sigma sigma / 4
        let (sn, cs) = (0.25 * a).sin_cos();
        u = (CMat::identity(4, 4) * c64(cs, 0.0) + sigma2(s) * c64(0.0, -sn)) * u;
    }
    u
}

fn magic() -> CMat {
    let h = 0.5f64.sqrt();
    let (o, z, i) = (c64(h, 0.0), c64(0.0, 0.0), c64(0.0, h));
    CMat::from_row_slice(4, 4, &[o, z, z, i, z, i, o, z, z, i, -o, z, o, z, z, -i])
}

const MIXES: [f64; 4] = [0.659_2, 1.913_7, 2.747_1, 0.281_3];
const SPLIT_GAP: f64 = 1e-6;

/// Real orthogonal `O` diagonalizing the commuting symmetric pair `(a, b)`.
fn joint_real(a: &DMatrix<f64>, b: &DMatrix<f64>, level: usize) -> DMatrix<f64> {
    let dim = a.nrows();
    if dim == 1 {
        return DMatrix::identity(1, 1);
    }
    let t = MIXES[level % MIXES.len()];
    let h = a * t.cos() + b * t.sin();
    let h = (&h + h.transpose()) * 0.5;
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut v = DMatrix::zeros(dim, dim);
    for (c, &src) in order.iter().enumerate() {
        v.set_column(c, &eig.eigenvectors.column(src));
    }
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if level + 1 >= MIXES.len() {
        return v;
    }
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && vals[end] - vals[end - 1] < SPLIT_GAP {
            end += 1;
        }
        if end - start > 1 {
            let block = v.columns(start, end - start).into_owned();
            let ra = block.transpose() * a * &block;
            let rb = block.transpose() * b * &block;
            let w = joint_real(&ra, &rb, level + 1);
            let refined = block * w;
            v.columns_mut(start, end - start).copy_from(&refined);
        }
        start = end;
    }
    v
}

fn nearest_orthogonal(m: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = m.clone().svd(true, true);
    svd.u.expect("svd u") * svd.v_t.expect("svd v_t")
}

/// Splits `k = e^{i psi} A (x) B` with `A`, `B` special unitary.
pub fn factor_local(k: &CMat) -> Result<(CMat, CMat, f64)> {
    let mut best = (0, 0);
    let mut best_norm = -1.0;
    for i in 0..2 {
        for j in 0..2 {
            let nrm = k.view((2 * i, 2 * j), (2, 2)).norm();
            if nrm > best_norm {
                best_norm = nrm;
                best = (i, j);
            }
        }
    }
    let blk = k.view((2 * best.0, 2 * best.1), (2, 2)).into_owned();
    let d = blk[(0, 0)] * blk[(1, 1)] - blk[(0, 1)] * blk[(1, 0)];
    let b = &blk / d.sqrt();
    let mut a = CMat::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            let sub = k.view((2 * i, 2 * j), (2, 2));
            a[(i, j)] = (b.adjoint() * sub).trace() * 0.5;
        }
    }
    let da = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    let root = da.sqrt();
    let a = &a / root;
    let psi = root.arg();
    let err = (k - kron(&a, &b) * Complex64::from_polar(1.0, psi)).norm();
    if err > 1e-9 {
        return Err(Error::numeric("local factor is not a tensor product", err));
    }
    Ok((a, b, psi))
}

struct Chamber {
    coef: [f64; 3],
    k1: CMat,
    k2: CMat,
}

impl Chamber {
    fn shift(&mut self, i: usize, up: bool) {
        let s = sigma2(["XX", "YY", "ZZ"][i]);
        // exp(-i (pi/2) sigma sigma) = -i sigma sigma
        if up {
            self.coef[i] -= FRAC_PI_2;
            self.k1 = &self.k1 * s * c64(0.0, -1.0);
        } else {
            self.coef[i] += FRAC_PI_2;
            self.k1 = &self.k1 * s * c64(0.0, 1.0);
        }
    }

    fn swap(&mut self, i: usize, j: usize) {
        let axis = match (i.min(j), i.max(j)) {
            (0, 1) => Axis::Z,
            (1, 2) => Axis::X,
            _ => Axis::Y,
        };
        let r = rot(axis, FRAC_PI_2);
        let c = kron(&r, &r);
        self.k1 = &self.k1 * &c;
        self.k2 = c.adjoint() * &self.k2;
        self.coef.swap(i, j);
    }

    /// Negates the two coefficients other than `keep`.
    fn flip(&mut self, keep: usize) {
        let label = match keep {
            1 => "Y1",
            0 => "X1",
            _ => "Z1",
        };
        let c = sigma2(label);
        self.k1 = &self.k1 * &c;
        self.k2 = &c * &self.k2;
        for (i, x) in self.coef.iter_mut().enumerate() {
            if i != keep {
                *x = -*x;
            }
        }
    }

    fn canonicalize(&mut self) {
        for i in 0..3 {
            while self.coef[i] > FRAC_PI_4 {
                self.shift(i, true);
            }
            while self.coef[i] <= -FRAC_PI_4 {
                self.shift(i, false);
            }
        }
        for _ in 0..3 {
            for i in 0..2 {
                if self.coef[i].abs() < self.coef[i + 1].abs() {
                    self.swap(i, i + 1);
                }
            }
        }
        if self.coef[0] < 0.0 {
            self.flip(1);
        }
        if self.coef[1] < 0.0 {
            self.flip(0);
        }
    }
}

pub fn kak_su4(u: &UnitaryMatrix) -> Result<KakSu4> {
    if u.dim() != 4 {
        return Err(Error::Dimension(format!("kak_su4 needs 4x4, got {}", u.dim())));
    }
    let target = u.matrix();
    let us = target * Complex64::from_polar(1.0, -u.det().arg() / 4.0);
    let m = magic();
    let up = m.adjoint() * &us * &m;
    let sym = up.transpose() * &up;
    let re = sym.map(|z| z.re);
    let im = sym.map(|z| z.im);
    let mut o = joint_real(
        &((&re + re.transpose()) * 0.5),
        &((&im + im.transpose()) * 0.5),
        0,
    );
    if o.determinant() < 0.0 {
        o.column_mut(0).neg_mut();
    }
    let oc = o.map(|x| c64(x, 0.0));
    let diag = oc.transpose() * &sym * &oc;
    let mut theta: Vec<f64> = (0..4).map(|k| 0.5 * diag[(k, k)].arg()).collect();
    let dinv = |theta: &[f64]| {
        CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            4,
            theta.iter().map(|t| Complex64::from_polar(1.0, -t)),
        ))
    };
    let mut q1 = nearest_orthogonal(&(&up * &oc * dinv(&theta)).map(|z| z.re));
    if q1.determinant() < 0.0 {
        theta[0] += PI;
        q1.column_mut(0).neg_mut();
    }

    // Magic-basis eigenvalues: -theta_k = a x_k + b y_k + c z_k + d.
    let mut sys = Matrix4::<f64>::zeros();
    for k in 0..4 {
        let col = m.column(k);
        for (j, s) in ["XX", "YY", "ZZ"].iter().enumerate() {
            sys[(k, j)] = (col.adjoint() * sigma2(s) * col)[(0, 0)].re;
        }
        sys[(k, 3)] = 1.0;
    }
    let rhs = Vector4::from_iterator(theta.iter().map(|t| -t));
    let sol = sys
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::numeric("magic-basis system is singular", f64::NAN))?;

    let mut ch = Chamber {
        coef: [sol[0], sol[1], sol[2]],
        k1: &m * q1.map(|x| c64(x, 0.0)) * m.adjoint(),
        k2: &m * oc.transpose() * m.adjoint(),
    };
    ch.canonicalize();
    let alpha = [4.0 * ch.coef[0], 4.0 * ch.coef[1], 4.0 * ch.coef[2]];

    let (l1, l2, _) = factor_local(&ch.k1)?;
    let (r1, r2, _) = factor_local(&ch.k2)?;
    let su2 = |x: CMat| euler_su2(&UnitaryMatrix::new_unchecked(x));
    let mut out = KakSu4 {
        phase: 0.0,
        alpha,
        l1: su2(l1)?,
        l2: su2(l2)?,
        r1: su2(r1)?,
        r2: su2(r2)?,
    };
    let v = out.matrix();
    out.phase = (v.adjoint() * target).trace().arg();
    let residual = (target - out.matrix()).norm();
    if residual > RECONSTRUCTION_BUDGET {
        return Err(Error::numeric("two-qubit decomposition lost accuracy", residual));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{haar_random, max_abs};
    use crate::sim::apply_gate_list;

    #[test]
    fn identity() {
        let k = kak_su4(&UnitaryMatrix::identity(4)).unwrap();
        assert!(k.alpha.iter().all(|a| a.abs() < 1e-12));
        assert!(k.phase.abs() < 1e-12);
        assert!(max_abs(&(k.matrix() - CMat::identity(4, 4))) < 1e-12);
    }

    #[test]
    fn chamber_fixed_point() {
        let want = [0.3, 0.2, 0.1];
        let u = UnitaryMatrix::new(canonical_unitary(want)).unwrap();
        let k = kak_su4(&u).unwrap();
        for (a, b) in k.alpha.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{:?}", k.alpha);
        }
    }

    #[test]
    fn cnot() {
        let mut c = CMat::zeros(4, 4);
        for (i, j) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            c[(i, j)] = c64(1.0, 0.0);
        }
        let k = kak_su4(&UnitaryMatrix::new(c.clone()).unwrap()).unwrap();
        assert!((k.alpha[0] - PI).abs() < 1e-10, "{:?}", k.alpha);
        assert!(k.alpha[1].abs() < 1e-10 && k.alpha[2].abs() < 1e-10);
        assert!(max_abs(&(k.matrix() - c)) < 1e-10);
    }

    #[test]
    fn haar_reconstruction_in_chamber() {
        for seed in 0..200 {
            let u = haar_random(4, seed);
            let k = kak_su4(&u).unwrap();
            assert!(max_abs(&(k.matrix() - u.matrix())) < 1e-10, "seed {seed}");
            assert!(k.in_chamber(1e-12), "seed {seed}: {:?}", k.alpha);
        }
    }

    #[test]
    fn gate_pattern_matches() {
        for seed in 0..20 {
            let u = haar_random(4, 100 + seed);
            let k = kak_su4(&u).unwrap();
            let mut g = GateList::new();
            k.push_gates(&mut g, 1);
            let v = apply_gate_list(&g, 2).unwrap();
            assert!(max_abs(&(v.into_inner() - u.matrix())) < 1e-10);
        }
    }

    #[test]
    fn local_factor_round_trip() {
        let a = crate::linalg::haar_special(2, 1).into_inner();
        let b = crate::linalg::haar_special(2, 2).into_inner();
        let k = kron(&a, &b) * Complex64::from_polar(1.0, 0.4);
        let (fa, fb, psi) = factor_local(&k).unwrap();
        let back = kron(&fa, &fb) * Complex64::from_polar(1.0, psi);
        assert!(max_abs(&(back - k)) < 1e-13);
    }
}
