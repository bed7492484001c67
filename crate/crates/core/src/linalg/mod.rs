//! Dense complex linear algebra used by the decomposition engine.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Every factorization here
//! multiplies its result back and reports the residual; callers decide
//! whether the residual is within their budget.

mod csd;
mod eig;
mod io;

pub use csd::{cs_middle, csd, Csd};
pub use eig::{eig_unitary, UnitaryEigen};
pub use io::{read_matrix, write_matrix, MatrixFile};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

/// Unitarity tolerance `max |U^dag U - I|`.
pub const TAU_U: f64 = 1e-10;
/// Hermiticity tolerance `max |H - H^dag|`.
pub const TAU_HERM: f64 = 1e-10;
/// Eigenvalue / singular value gap below which values are treated as one cluster.
pub const TAU_CLUSTER: f64 = 1e-8;
/// Multiply-back budget per factorization level.
pub const RECONSTRUCTION_BUDGET: f64 = 1e-9;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `max |H - H^dag|`.
pub fn hermiticity_defect(h: &CMat) -> f64 {
    if !h.is_square() {
        return f64::INFINITY;
    }
    let mut worst = 0.0f64;
    for i in 0..h.nrows() {
        for j in i..h.ncols() {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `max |U^dag U - I|`.
pub fn unitarity_defect(u: &CMat) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let g = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - c64(target, 0.0)).norm());
        }
    }
    worst
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn det(u: &CMat) -> Complex64 {
    u.clone().determinant()
}

/// `log2(dim)` when `dim` is a power of two.
pub fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::Validation(format!(
            "dimension {dim} is not a power of two"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// A square matrix certified unitary to within [`TAU_U`].
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix(CMat);

impl UnitaryMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        Self::with_tolerance(m, TAU_U)
    }

    pub fn with_tolerance(m: CMat, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension(format!(
                "{}x{} matrix is not square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("non-finite matrix entry".into()));
        }
        let d = unitarity_defect(&m);
        if d > tol {
            return Err(Error::Validation(format!(
                "matrix is not unitary (defect {d:.3e})"
            )));
        }
        Ok(UnitaryMatrix(m))
    }

    /// Wraps without checking; for matrices built from unitary factors.
    pub fn new_unchecked(m: CMat) -> Self {
        UnitaryMatrix(m)
    }

    pub fn identity(dim: usize) -> Self {
        UnitaryMatrix(CMat::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn num_qubits(&self) -> Result<usize> {
        qubits_for_dim(self.dim())
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        UnitaryMatrix(self.0.adjoint())
    }

    pub fn det(&self) -> Complex64 {
        det(&self.0)
    }
}

impl std::ops::Mul for &UnitaryMatrix {
    type Output = UnitaryMatrix;

    fn mul(self, rhs: &UnitaryMatrix) -> UnitaryMatrix {
        UnitaryMatrix(&self.0 * &rhs.0)
    }
}

impl AsRef<CMat> for UnitaryMatrix {
    fn as_ref(&self) -> &CMat {
        &self.0
    }
}

/// `exp(-i * scale * H)` for Hermitian `H`, via the Hermitian eigendecomposition.
pub fn expm_skew(h: &CMat, scale: f64) -> Result<UnitaryMatrix> {
    let dev = hermiticity_defect(h);
    if dev > TAU_HERM {
        return Err(Error::Validation(format!(
            "generator is not Hermitian (defect {dev:.3e})"
        )));
    }
    // Symmetrize so the eigensolver sees an exactly Hermitian input.
    let hs = (h + h.adjoint()) * c64(0.5, 0.0);
    let eig = hs.symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues
            .iter()
            .map(|&lam| Complex64::from_polar(1.0, -scale * lam)),
    ));
    Ok(UnitaryMatrix(v * phases * v.adjoint()))
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `diag(R)` folded back into `Q`.
pub fn haar_random(dim: usize, seed: u64) -> UnitaryMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_with_rng(dim, &mut rng)
}

/// Haar-random unitary rescaled by a global phase to determinant one.
pub fn haar_special(dim: usize, seed: u64) -> UnitaryMatrix {
    project_special(haar_random(dim, seed))
}

pub fn haar_with_rng<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitaryMatrix {
    let dim = dim.max(1);
    let g = CMat::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            c64(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= ph;
        }
    }
    UnitaryMatrix(q)
}

/// Removes `det(U)^{1/dim}` so the result lies in `SU(dim)`.
pub fn project_special(u: UnitaryMatrix) -> UnitaryMatrix {
    let dim = u.dim();
    let phase = u.det().arg() / dim as f64;
    UnitaryMatrix(u.0 * Complex64::from_polar(1.0, -phase))
}

/// Conjugates `U` by the basis permutation that puts old qubit `perm[k]` at
/// position `k` (qubit 0 is the leftmost tensor factor).
pub fn permute_qubits(u: &UnitaryMatrix, perm: &[usize]) -> Result<UnitaryMatrix> {
    let n = u.num_qubits()?;
    if perm.len() != n {
        return Err(Error::Validation(format!(
            "permutation of length {} for {n} qubits",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::Validation(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    let map = |idx: usize| -> usize {
        let mut out = 0usize;
        for (k, &old) in perm.iter().enumerate() {
            let bit = (idx >> (n - 1 - old)) & 1;
            out |= bit << (n - 1 - k);
        }
        out
    };
    let dim = u.dim();
    let index: Vec<usize> = (0..dim).map(map).collect();
    let mut out = CMat::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            out[(index[i], index[j])] = u.0[(i, j)];
        }
    }
    Ok(UnitaryMatrix(out))
}

/// Inverse of a qubit permutation.
pub fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}

/// Block-diagonal matrix `a (+) b`.
pub fn direct_sum(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = CMat::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

/// Nearest unitary in Frobenius norm (polar factor).
pub fn nearest_unitary(m: &CMat) -> CMat {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd u");
    let vt = svd.v_t.expect("svd v_t");
    u * vt
}

/// `e^{i phi}` minimizing `||U - e^{i phi} V||_F`, i.e. the phase of `tr(V^dag U)`.
pub fn relative_phase(u: &CMat, v: &CMat) -> f64 {
    (v.adjoint() * u).trace().arg()
}
