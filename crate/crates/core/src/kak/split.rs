//! One level of the recursive factorization.
//!
//! Level one writes `U = K1 exp(-i Y) K2` with `Y` in the span of `a(n)` and
//! `K1`, `K2` block diagonal on the last qubit. Level two demultiplexes a
//! block pair as `(V (x) 1) exp(-i Z) (W (x) 1)` with `Z` diagonal.

use std::f64::consts::FRAC_PI_4;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::cartan::{generators_diagonal_z, CartanElement, GeneratorSet};
use crate::error::{Error, Result};
use crate::linalg::csd;
use crate::linalg::eig_unitary;
use crate::linalg::{c64, kron, permute_qubits, CMat, UnitaryMatrix, RECONSTRUCTION_BUDGET};
use crate::pauli::{generators_a, generators_s, Letter, PauliString};

/// `U0 (x) |0><0| + U1 (x) |1><1|`, times `exp(-i phase I_nz)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockPair {
    pub u0: UnitaryMatrix,
    pub u1: UnitaryMatrix,
    pub phase: f64,
}

impl BlockPair {
    pub fn new(u0: UnitaryMatrix, u1: UnitaryMatrix) -> Result<Self> {
        if u0.dim() != u1.dim() {
            return Err(Error::Dimension(format!(
                "block pair of sizes {} and {}",
                u0.dim(),
                u1.dim()
            )));
        }
        Ok(BlockPair { u0, u1, phase: 0.0 })
    }

    /// Dense operator on `n` qubits, the last one selecting the block.
    pub fn realize(&self) -> CMat {
        let h = self.u0.dim();
        let mut out = CMat::zeros(2 * h, 2 * h);
        let p0 = Complex64::from_polar(1.0, -0.5 * self.phase);
        let p1 = p0.conj();
        for i in 0..h {
            for j in 0..h {
                out[(2 * i, 2 * j)] = self.u0.matrix()[(i, j)] * p0;
                out[(2 * i + 1, 2 * j + 1)] = self.u1.matrix()[(i, j)] * p1;
            }
        }
        out
    }
}

/// Clifford `V` on `m` qubits with `V Z_k V^dag = g_k` for commuting,
/// independent Pauli strings `g_k`.
fn stabilizer_basis(gens: &[PauliString]) -> Result<CMat> {
    let m = gens.len();
    let dim = 1usize << m;
    let sigmas: Vec<CMat> = gens.iter().map(|g| g.sigma_dense()).collect();
    let mut v = CMat::zeros(dim, dim);
    for j in 0..dim {
        let mut proj = CMat::identity(dim, dim);
        for (k, s) in sigmas.iter().enumerate() {
            let sign = if j >> (m - 1 - k) & 1 == 0 { 1.0 } else { -1.0 };
            proj = proj * (CMat::identity(dim, dim) + s * c64(sign, 0.0)) * c64(0.5, 0.0);
        }
        // rank one: take its largest column
        let (best, _) = (0..dim)
            .map(|c| (c, proj.column(c).norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty");
        let mut col: DVector<Complex64> = proj.column(best).into_owned();
        let nrm = col.norm();
        if nrm < 1e-6 {
            return Err(Error::numeric("generators are not independent", nrm));
        }
        col /= c64(nrm, 0.0);
        let (imax, _) = col
            .iter()
            .enumerate()
            .map(|(i, z)| (i, z.norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty");
        let ph = col[imax] / col[imax].norm();
        col *= ph.conj();
        v.set_column(j, &col);
    }
    Ok(v)
}

/// Independent generators of the group spanned by `s(m)`, greedily in list order.
fn independent_generators(m: usize) -> Result<Vec<PauliString>> {
    let s = generators_s(m)?;
    let mut picked: Vec<PauliString> = Vec::new();
    let mut group = vec![PauliString::identity(m)?];
    for g in s {
        if group
            .iter()
            .any(|h| h.x_mask() == g.x_mask() && h.z_mask() == g.z_mask())
        {
            continue;
        }
        let extra: Vec<PauliString> = group.iter().map(|h| h.sigma_product(&g).0).collect();
        group.extend(extra);
        picked.push(g);
        if picked.len() == m {
            break;
        }
    }
    if picked.len() != m {
        return Err(Error::numeric("s(m) does not have full rank", f64::NAN));
    }
    Ok(picked)
}

/// The fixed change of basis mapping diagonal strings on `n-1` qubits onto
/// `s(n-1)`: `V sigma_E V^dag = sign_E sigma_{A_E}`.
#[derive(Clone, Debug)]
pub struct Bridge {
    pub v: CMat,
    /// Indexed by the Walsh mask `E`: `(A_E, sign_E)`.
    pub images: Vec<(PauliString, f64)>,
}

impl Bridge {
    pub fn new(m: usize) -> Result<Self> {
        if m == 1 {
            // s(1) = {Z}: nothing to move.
            let z = PauliString::single(1, 0, Letter::Z)?;
            return Ok(Bridge {
                v: CMat::identity(2, 2),
                images: vec![(PauliString::identity(1)?, 1.0), (z, 1.0)],
            });
        }
        let gens = independent_generators(m)?;
        let v = stabilizer_basis(&gens)?;
        let mut images = Vec::with_capacity(1 << m);
        for e in 0..1usize << m {
            let mut s = PauliString::identity(m)?;
            let mut ph = c64(1.0, 0.0);
            for (k, g) in gens.iter().enumerate() {
                if e >> (m - 1 - k) & 1 == 1 {
                    let (next, p) = s.sigma_product(g);
                    s = next;
                    ph *= p;
                }
            }
            debug_assert!(ph.im.abs() < 1e-12);
            images.push((s, ph.re));
        }
        Ok(Bridge { v, images })
    }
}

/// Walsh transform: `theta_j = sum_E c_E (-1)^{|E & j|}`, returns `c`.
pub fn walsh(theta: &[f64]) -> Vec<f64> {
    let m = theta.len();
    (0..m)
        .map(|e| {
            theta
                .iter()
                .enumerate()
                .map(|(j, t)| {
                    if (e & j).count_ones().is_multiple_of(2) {
                        *t
                    } else {
                        -*t
                    }
                })
                .sum::<f64>()
                / m as f64
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct Level1 {
    pub k1: BlockPair,
    pub y: CartanElement,
    pub k2: BlockPair,
    pub residual: f64,
}

impl Level1 {
    pub fn reconstruct(&self) -> Result<CMat> {
        Ok(self.k1.realize() * self.y.unitary()?.into_inner() * self.k2.realize())
    }
}

/// `U = K1 exp(-i sum_j y_j B_{a_j}) K2` for `n >= 3`.
pub fn split_level1(u: &UnitaryMatrix) -> Result<Level1> {
    let n = u.num_qubits()?;
    if n < 3 {
        return Err(Error::Range(format!(
            "level-one split needs n >= 3, got {n}; use kak_su4 for two qubits"
        )));
    }
    let mut perm = vec![n - 1];
    perm.extend(0..n - 1);
    let lead = permute_qubits(u, &perm)?;
    let d = csd(&lead)?;
    let m = n - 1;

    // Middle factor is exp(-i Theta (x) sigma_y) with Theta = sum_E c_E sigma_E.
    let c = walsh(&d.theta);
    let bridge = Bridge::new(m)?;
    let gens = generators_a(n)?;
    let mut coeffs = vec![0.0; gens.len()];
    for (e, ce) in c.iter().enumerate() {
        let (a, t) = bridge.images[e];
        let target = a.extend(Letter::X)?;
        let slot = gens
            .iter()
            .position(|g| *g == target)
            .ok_or_else(|| Error::numeric(format!("{target} missing from a({n})"), f64::NAN))?;
        // (V (x) S)(sigma_E (x) Y)(V (x) S)^dag = -t sigma_{A_E X}, sigma = 2 B
        coeffs[slot] = -2.0 * ce * t;
    }
    let y = CartanElement::new(GeneratorSet::A(n), gens, coeffs)?;

    let v = &bridge.v;
    let w = Complex64::from_polar(1.0, FRAC_PI_4);
    let k1 = BlockPair::new(
        UnitaryMatrix::new_unchecked(&d.l0 * v.adjoint() * w),
        UnitaryMatrix::new_unchecked(&d.l1 * v.adjoint() * w.conj()),
    )?;
    let k2 = BlockPair::new(
        UnitaryMatrix::new_unchecked(v * &d.r0 * w.conj()),
        UnitaryMatrix::new_unchecked(v * &d.r1 * w),
    )?;
    let mut out = Level1 {
        k1,
        y,
        k2,
        residual: 0.0,
    };
    out.residual = (u.matrix() - out.reconstruct()?).norm();
    if out.residual > RECONSTRUCTION_BUDGET {
        return Err(Error::numeric("level-one split lost accuracy", out.residual));
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct Level2 {
    pub v: UnitaryMatrix,
    /// Traceless part over the diagonal strings `E (x) Z`, `E != 0`.
    pub z: CartanElement,
    pub w: UnitaryMatrix,
    /// `U0 = e^{i phase} V e^{iD} W`, `U1 = e^{-i phase} V e^{-iD} W`.
    pub phase: f64,
    pub residual: f64,
}

impl Level2 {
    /// Full diagonal factor including the `exp(-i theta I_nz)` term and the
    /// pair's own phase.
    pub fn diagonal_factor(&self, pair_phase: f64) -> Result<CartanElement> {
        let n = self.z.num_qubits().unwrap_or(0);
        let gens = generators_diagonal_z(n)?;
        let mut coeffs = vec![-2.0 * self.phase + pair_phase];
        coeffs.extend(self.z.coeffs.iter().copied());
        CartanElement::new(GeneratorSet::DiagonalZ(n), gens, coeffs)
    }

    /// The same factor expressed over `b(n)` (conjugated by the bridge):
    /// `exp(-i Z) = (B^dag (x) 1) exp(-i Z_b) (B (x) 1)`, plus the `u(1)` term.
    pub fn b_coordinates(&self) -> Result<(CartanElement, f64, CMat)> {
        let n = self.z.num_qubits().unwrap_or(0);
        let bridge = Bridge::new(n - 1)?;
        let gens = crate::pauli::generators_b(n)?;
        let mut coeffs = vec![0.0; gens.len()];
        for (e, c) in self.z.coeffs.iter().enumerate() {
            let (a, t) = bridge.images[e + 1];
            let target = a.extend(Letter::Z)?;
            let slot = gens
                .iter()
                .position(|g| *g == target)
                .ok_or_else(|| Error::numeric(format!("{target} missing from b({n})"), f64::NAN))?;
            coeffs[slot] = c * t;
        }
        let el = CartanElement::new(GeneratorSet::B(n), gens, coeffs)?;
        Ok((el, -2.0 * self.phase, bridge.v))
    }

    pub fn reconstruct(&self, pair_phase: f64) -> Result<CMat> {
        let v = kron(self.v.matrix(), &CMat::identity(2, 2));
        let w = kron(self.w.matrix(), &CMat::identity(2, 2));
        Ok(v * self.diagonal_factor(pair_phase)?.unitary()?.into_inner() * w)
    }
}

/// Demultiplexes a block pair by diagonalizing `U0 U1^dag`.
pub fn split_level2(p: &BlockPair) -> Result<Level2> {
    let h = p.u0.dim();
    let m = crate::linalg::qubits_for_dim(h)?;
    let n = m + 1;
    let prod = UnitaryMatrix::new_unchecked(p.u0.matrix() * p.u1.matrix().adjoint());
    let eig = eig_unitary(&prod)?;
    let mut order: Vec<(usize, f64)> = eig
        .values
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let mut w = z.arg();
            if w <= -std::f64::consts::PI {
                w += 2.0 * std::f64::consts::PI;
            }
            (i, w)
        })
        .collect();
    // Phases within the cluster tolerance keep their eigensolver order so a
    // degenerate product does not permute the basis.
    order.sort_by(|a, b| {
        if (a.1 - b.1).abs() < crate::linalg::TAU_CLUSTER {
            std::cmp::Ordering::Equal
        } else {
            a.1.total_cmp(&b.1)
        }
    });
    let mut v = CMat::zeros(h, h);
    let mut dprime = vec![0.0; h];
    for (col, &(src, w)) in order.iter().enumerate() {
        v.set_column(col, &eig.vectors.column(src));
        dprime[col] = 0.5 * w;
    }
    let e_minus = CMat::from_diagonal(&DVector::from_iterator(
        h,
        dprime.iter().map(|d| Complex64::from_polar(1.0, -d)),
    ));
    let w = e_minus * v.adjoint() * p.u0.matrix();

    // e^{i D' (x) sigma_z} = exp(-i sum_E (-2 delta_E) B_{E Z})
    let delta = walsh(&dprime);
    let phase = delta[0];
    let gens = generators_diagonal_z(n)?;
    let z = CartanElement::new(
        GeneratorSet::Custom,
        gens[1..].to_vec(),
        delta[1..].iter().map(|d| -2.0 * d).collect(),
    )?;
    let mut out = Level2 {
        v: UnitaryMatrix::new_unchecked(v),
        z,
        w: UnitaryMatrix::new_unchecked(w),
        phase,
        residual: 0.0,
    };
    out.residual = (p.realize() - out.reconstruct(p.phase)?).norm();
    if out.residual > RECONSTRUCTION_BUDGET {
        return Err(Error::numeric("level-two split lost accuracy", out.residual));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm_skew, haar_random, max_abs, unitarity_defect};

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn walsh_inverts() {
        let c = vec![0.3, -0.1, 0.7, 0.2];
        let theta: Vec<f64> = (0..4)
            .map(|j| {
                (0..4)
                    .map(|e: usize| {
                        if (e & j).count_ones().is_multiple_of(2) {
                            c[e]
                        } else {
                            -c[e]
                        }
                    })
                    .sum()
            })
            .collect();
        let back = walsh(&theta);
        for (a, b) in back.iter().zip(&c) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn bridge_conjugates_diagonals() {
        for m in 1..=4 {
            let b = Bridge::new(m).unwrap();
            assert!(unitarity_defect(&b.v) < 1e-12);
            for (e, (a, t)) in b.images.iter().enumerate().skip(1) {
                let mut letters = vec![Letter::I; m];
                for (k, l) in letters.iter_mut().enumerate() {
                    if e >> (m - 1 - k) & 1 == 1 {
                        *l = Letter::Z;
                    }
                }
                let se = PauliString::from_letters(&letters).unwrap().sigma_dense();
                let lhs = &b.v * se * b.v.adjoint();
                let rhs = a.sigma_dense() * c64(*t, 0.0);
                assert!(max_abs(&(lhs - rhs)) < 1e-12, "m={m} e={e}");
            }
            let images: std::collections::BTreeSet<_> = b.images.iter().skip(1).map(|(a, _)| *a).collect();
            if m >= 2 {
                let s: std::collections::BTreeSet<_> = generators_s(m).unwrap().into_iter().collect();
                assert_eq!(images, s);
            }
        }
    }

    #[test]
    fn level1_identity() {
        let l = split_level1(&UnitaryMatrix::identity(8)).unwrap();
        assert!(l.y.is_zero(1e-12));
        assert!(l.residual < 1e-12);
    }

    #[test]
    fn level1_pure_cartan() {
        let u = expm_skew(&p("XXX").dense(), 0.4).unwrap();
        let l = split_level1(&u).unwrap();
        assert!(l.residual < 1e-10);
        // The block unitaries absorb a Weyl relabelling of a(3), so only the
        // single active coordinate and its magnitude are fixed.
        let active: Vec<f64> = l.y.coeffs.iter().copied().filter(|c| c.abs() > 1e-10).collect();
        assert_eq!(active.len(), 1, "{:?}", l.y);
        assert!((active[0].abs() - 0.4).abs() < 1e-10);
    }

    #[test]
    fn level1_haar() {
        for n in 3..=4 {
            for seed in 0..10 {
                let u = haar_random(1 << n, seed);
                let l = split_level1(&u).unwrap();
                assert!(l.residual < 1e-9, "n={n} seed={seed}: {}", l.residual);
            }
        }
    }

    #[test]
    fn level2_equal_blocks() {
        let u0 = haar_random(4, 1);
        let pair = BlockPair::new(u0.clone(), u0.clone()).unwrap();
        let l = split_level2(&pair).unwrap();
        assert!(l.z.is_zero(1e-12));
        assert!(l.phase.abs() < 1e-12);
        assert!(max_abs(&(l.v.matrix() * l.w.matrix() - u0.matrix())) < 1e-12);
    }

    #[test]
    fn level2_diagonal() {
        let d = [0.3, -0.2, 0.5, -0.6];
        let mk = |s: f64| {
            UnitaryMatrix::new(CMat::from_diagonal(&DVector::from_iterator(
                4,
                d.iter().map(|x| Complex64::from_polar(1.0, s * x)),
            )))
            .unwrap()
        };
        let pair = BlockPair::new(mk(1.0), mk(-1.0)).unwrap();
        let l = split_level2(&pair).unwrap();
        assert!(l.residual < 1e-12);
        let vw = l.v.matrix() * l.w.matrix();
        assert!(max_abs(&(vw.clone() - CMat::from_diagonal(&vw.diagonal()))) < 1e-12);
    }

    #[test]
    fn level2_haar_pair() {
        for seed in 0..10 {
            let pair = BlockPair {
                u0: haar_random(8, 2 * seed),
                u1: haar_random(8, 2 * seed + 1),
                phase: 0.37,
            };
            let l = split_level2(&pair).unwrap();
            assert!(l.residual < 1e-9);
        }
    }

    #[test]
    fn b_coordinates_agree() {
        let pair = BlockPair::new(haar_random(4, 5), haar_random(4, 6)).unwrap();
        let l = split_level2(&pair).unwrap();
        let (zb, u1, bridge) = l.b_coordinates().unwrap();
        let b = kron(&bridge, &CMat::identity(2, 2));
        let mut full = zb.unitary().unwrap().into_inner();
        full = b.adjoint() * full * &b;
        let tail = expm_skew(&p("11Z").dense(), u1).unwrap().into_inner();
        let want = l.diagonal_factor(0.0).unwrap().unitary().unwrap().into_inner();
        assert!(max_abs(&(full * tail - want)) < 1e-12);
    }
}
