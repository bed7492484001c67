//! Cosine-sine decomposition of an even-dimensional unitary.
//!
//! `U = (L0 (+) L1) [[C, -S], [S, C]] (R0 (+) R1)` with `C = diag(cos theta)`,
//! `S = diag(sin theta)`, `theta` ascending in `[0, pi/2]`.

use nalgebra::DVector;
use num_complex::Complex64;

use super::{c64, direct_sum, nearest_unitary, CMat, UnitaryMatrix, RECONSTRUCTION_BUDGET};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Csd {
    pub l0: CMat,
    pub l1: CMat,
    pub theta: Vec<f64>,
    pub r0: CMat,
    pub r1: CMat,
    /// `||U - L M R||_F`.
    pub residual: f64,
}

impl Csd {
    pub fn left(&self) -> CMat {
        direct_sum(&self.l0, &self.l1)
    }

    pub fn right(&self) -> CMat {
        direct_sum(&self.r0, &self.r1)
    }

    pub fn middle(&self) -> CMat {
        cs_middle(&self.theta)
    }

    pub fn reconstruct(&self) -> CMat {
        self.left() * self.middle() * self.right()
    }
}

/// `[[C, -S], [S, C]]` for the given angles.
pub fn cs_middle(theta: &[f64]) -> CMat {
    let m = theta.len();
    let mut out = CMat::zeros(2 * m, 2 * m);
    for (j, &t) in theta.iter().enumerate() {
        let (s, c) = t.sin_cos();
        out[(j, j)] = c64(c, 0.0);
        out[(m + j, m + j)] = c64(c, 0.0);
        out[(j, m + j)] = c64(-s, 0.0);
        out[(m + j, j)] = c64(s, 0.0);
    }
    out
}

pub fn csd(u: &UnitaryMatrix) -> Result<Csd> {
    let dim = u.dim();
    if !dim.is_multiple_of(2) || dim == 0 {
        return Err(Error::Dimension(format!(
            "cosine-sine split needs an even dimension, got {dim}"
        )));
    }
    let m = dim / 2;
    let full = u.matrix();
    let u00 = full.view((0, 0), (m, m)).into_owned();
    let u01 = full.view((0, m), (m, m)).into_owned();
    let u10 = full.view((m, 0), (m, m)).into_owned();
    let u11 = full.view((m, m), (m, m)).into_owned();

    let svd = u00.svd(true, true);
    let a = svd.u.expect("svd u");
    let vt = svd.v_t.expect("svd v_t");
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));

    let mut l0 = CMat::zeros(m, m);
    let mut r0 = CMat::zeros(m, m);
    let mut cos = vec![0.0; m];
    for (k, &src) in order.iter().enumerate() {
        l0.set_column(k, &a.column(src));
        r0.set_row(k, &vt.row(src));
        cos[k] = svd.singular_values[src].min(1.0);
    }
    // Gauge: first significant entry of each L0 column real positive.
    for k in 0..m {
        if let Some(z) = l0.column(k).iter().find(|z| z.norm() > 1e-12).copied() {
            let ph = z / z.norm();
            for i in 0..m {
                l0[(i, k)] *= ph.conj();
                r0[(k, i)] *= ph;
            }
        }
    }

    // Y = U10 R0^dag = L1 S has orthogonal columns of norm sin(theta).
    let y = &u10 * r0.adjoint();
    let mut l1 = CMat::zeros(m, m);
    let mut filled = vec![false; m];
    let mut sin = vec![0.0; m];
    let mut basis: Vec<DVector<Complex64>> = Vec::with_capacity(m);
    // Largest sines first: their directions are the best conditioned.
    for k in (0..m).rev() {
        let mut v: DVector<Complex64> = y.column(k).into_owned();
        for b in &basis {
            let proj = b.dotc(&v);
            v -= b * proj;
        }
        let nv = v.norm();
        if nv > 1e-13 {
            let unit = v / c64(nv, 0.0);
            l1.set_column(k, &unit);
            basis.push(unit);
            filled[k] = true;
        }
    }
    // Complete with standard basis vectors for vanishing sines.
    let mut e = 0;
    for k in (0..m).rev() {
        if filled[k] {
            continue;
        }
        loop {
            let mut v = DVector::<Complex64>::zeros(m);
            v[e % m] = c64(1.0, 0.0);
            e += 1;
            for b in &basis {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
            let nv = v.norm();
            if nv > 1e-6 {
                let unit = v / c64(nv, 0.0);
                l1.set_column(k, &unit);
                basis.push(unit);
                break;
            }
            if e > 4 * m {
                return Err(Error::numeric("cosine-sine completion failed", f64::NAN));
            }
        }
    }
    for (k, s) in sin.iter_mut().enumerate() {
        *s = l1.column(k).dotc(&y.column(k)).re.max(0.0);
    }

    let theta: Vec<f64> = (0..m).map(|k| sin[k].atan2(cos[k])).collect();
    let cdiag = CMat::from_diagonal(&DVector::from_iterator(
        m,
        theta.iter().map(|t| c64(t.cos(), 0.0)),
    ));
    let sdiag = CMat::from_diagonal(&DVector::from_iterator(
        m,
        theta.iter().map(|t| c64(t.sin(), 0.0)),
    ));
    // Least-squares R1 from both right blocks, then snap to the unitary group.
    let r1 = -(&sdiag * l0.adjoint() * &u01) + &cdiag * l1.adjoint() * &u11;
    let r1 = nearest_unitary(&r1);

    let mut out = Csd {
        l0,
        l1,
        theta,
        r0,
        r1,
        residual: 0.0,
    };
    out.residual = (full - out.reconstruct()).norm();
    if out.residual > RECONSTRUCTION_BUDGET {
        return Err(Error::numeric(
            "cosine-sine decomposition lost accuracy",
            out.residual,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{haar_random, unitarity_defect};
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn identity_has_zero_angles() {
        let d = csd(&UnitaryMatrix::identity(8)).unwrap();
        assert!(d.theta.iter().all(|t| t.abs() < 1e-15));
        assert!(d.residual < 1e-14);
    }

    #[test]
    fn fixed_point() {
        let theta = vec![FRAC_PI_4; 4];
        let u = UnitaryMatrix::new(cs_middle(&theta)).unwrap();
        let d = csd(&u).unwrap();
        for t in &d.theta {
            assert!((t - FRAC_PI_4).abs() < 1e-12);
        }
        assert!(d.residual < 1e-12);
        // L and R are a trivial gauge: they commute with the middle factor.
        let lr = d.left() * d.right();
        assert!((lr - CMat::identity(8, 8)).norm() < 1e-12);
    }

    #[test]
    fn haar_reconstruction() {
        for seed in 0..20 {
            let u = haar_random(8, seed);
            let d = csd(&u).unwrap();
            assert!(d.residual < 1e-9);
            for f in [&d.l0, &d.l1, &d.r0, &d.r1] {
                assert!(unitarity_defect(f) < 1e-10);
            }
            assert!(d.theta.windows(2).all(|w| w[0] <= w[1] + 1e-15));
            assert!(d
                .theta
                .iter()
                .all(|t| (0.0..=std::f64::consts::FRAC_PI_2).contains(t)));
        }
    }

    #[test]
    fn l0_gauge_is_real_positive() {
        let d = csd(&haar_random(8, 3)).unwrap();
        for k in 0..4 {
            let z = d.l0.column(k).iter().find(|z| z.norm() > 1e-12).copied().unwrap();
            assert!(z.im.abs() < 1e-12 && z.re > 0.0);
        }
    }

    #[test]
    fn angles_invariant_under_block_dressing() {
        let u = haar_random(8, 21);
        let base = csd(&u).unwrap().theta;
        let left = direct_sum(haar_random(4, 1).matrix(), haar_random(4, 2).matrix());
        let right = direct_sum(haar_random(4, 3).matrix(), haar_random(4, 4).matrix());
        let dressed = UnitaryMatrix::new(left * u.matrix() * right).unwrap();
        let other = csd(&dressed).unwrap().theta;
        for (a, b) in base.iter().zip(&other) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_angles() {
        // Repeated angles and exact zeros/right angles in one matrix.
        let theta = [0.0, 0.3, 0.3, std::f64::consts::FRAC_PI_2];
        let l = direct_sum(haar_random(4, 5).matrix(), haar_random(4, 6).matrix());
        let r = direct_sum(haar_random(4, 7).matrix(), haar_random(4, 8).matrix());
        let u = UnitaryMatrix::new(l * cs_middle(&theta) * r).unwrap();
        let d = csd(&u).unwrap();
        assert!(d.residual < 1e-9, "{}", d.residual);
        for (a, b) in d.theta.iter().zip(theta) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn odd_dimension_rejected() {
        let u = UnitaryMatrix::identity(3);
        assert!(matches!(csd(&u), Err(Error::Dimension(_))));
    }
}
