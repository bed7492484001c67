use num_complex::Complex64;

use super::{c64, CMat, UnitaryMatrix};
use crate::error::{Error, Result};

/// `U = V diag(values) V^dag` for a unitary `U`.
#[derive(Clone, Debug)]
pub struct UnitaryEigen {
    pub values: Vec<Complex64>,
    pub vectors: CMat,
    /// `||U V - V diag(values)||_F`.
    pub residual: f64,
}

// Fixed mixing coefficients for the Hermitian pair; successive levels use
// different angles so a collision at one level is split at the next.
const MIXES: [(f64, f64); 4] = [
    (0.613_281_9, 0.789_872_4),
    (0.951_056_5, -0.309_017_0),
    (-0.270_598_1, 0.962_692_6),
    (0.382_683_4, 0.923_879_5),
];

const SPLIT_GAP: f64 = 1e-6;
const MAX_RESIDUAL: f64 = 1e-10;

/// Eigendecomposition of a unitary by joint diagonalization of the commuting
/// Hermitian pair `(U + U^dag)/2`, `(U - U^dag)/2i`.
pub fn eig_unitary(u: &UnitaryMatrix) -> Result<UnitaryEigen> {
    let m = u.matrix();
    let vectors = joint_diagonalize(m, 0);
    let dim = m.nrows();
    let t = vectors.adjoint() * m * &vectors;
    let values: Vec<Complex64> = (0..dim)
        .map(|j| {
            let z = t[(j, j)];
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                z
            }
        })
        .collect();
    let lambda = CMat::from_diagonal(&nalgebra::DVector::from_vec(values.clone()));
    let residual = (m * &vectors - &vectors * lambda).norm();
    if residual > MAX_RESIDUAL * (dim as f64).max(1.0) {
        return Err(Error::numeric(
            "unitary eigendecomposition did not converge",
            residual,
        ));
    }
    Ok(UnitaryEigen {
        values,
        vectors,
        residual,
    })
}

fn joint_diagonalize(m: &CMat, level: usize) -> CMat {
    let dim = m.nrows();
    if dim == 1 || is_scalar(m) {
        return CMat::identity(dim, dim);
    }
    let (a, b) = MIXES[level % MIXES.len()];
    let herm = (m + m.adjoint()) * c64(0.5 * a, 0.0) + (m - m.adjoint()) * c64(0.0, -0.5 * b);
    let herm = (&herm + herm.adjoint()) * c64(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut v = CMat::zeros(dim, dim);
    for (col, &src) in order.iter().enumerate() {
        v.set_column(col, &eig.eigenvectors.column(src));
    }
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if level + 1 >= MIXES.len() {
        return v;
    }
    // Refine every cluster of (nearly) equal Hermitian eigenvalues: distinct
    // eigenphases can collide under a single linear mix.
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && vals[end] - vals[end - 1] < SPLIT_GAP {
            end += 1;
        }
        if end - start > 1 {
            let block = v.columns(start, end - start).into_owned();
            let restricted = block.adjoint() * m * &block;
            if !is_scalar(&restricted) {
                let w = joint_diagonalize(&restricted, level + 1);
                let refined = block * w;
                v.columns_mut(start, end - start).copy_from(&refined);
            }
        }
        start = end;
    }
    v
}

fn is_scalar(m: &CMat) -> bool {
    let d = m[(0, 0)];
    let dim = m.nrows();
    let mut off = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let target = if i == j { d } else { c64(0.0, 0.0) };
            off = off.max((m[(i, j)] - target).norm());
        }
    }
    off < super::TAU_CLUSTER
}
