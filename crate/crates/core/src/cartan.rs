//! Elements of commuting Pauli subalgebras, `sum_j c_j B_{G_j}`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, CMat, UnitaryMatrix};
use crate::pauli::{all_commute, generators_a, generators_b, PauliString};

/// Which commuting set a [`CartanElement`] is expressed over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "set", content = "n", rename_all = "snake_case")]
pub enum GeneratorSet {
    /// `a(n)`, the level-one Cartan subalgebra.
    A(usize),
    /// `b(n)`, the level-two Cartan subalgebra.
    B(usize),
    /// Diagonal strings `E (x) Z`, `E` over `{1, Z}^{n-1}`.
    DiagonalZ(usize),
    /// Any pairwise commuting list.
    Custom,
}

impl fmt::Display for GeneratorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSet::A(n) => write!(f, "a({n})"),
            GeneratorSet::B(n) => write!(f, "b({n})"),
            GeneratorSet::DiagonalZ(n) => write!(f, "diag-z({n})"),
            GeneratorSet::Custom => f.write_str("custom"),
        }
    }
}

/// Diagonal generators `E (x) Z` in Walsh order: entry `e` carries Z on the
/// first `n-1` qubits wherever the corresponding bit of `e` is set.
pub fn generators_diagonal_z(n: usize) -> Result<Vec<PauliString>> {
    if n < 1 {
        return Err(Error::Range("diagonal set needs n >= 1".into()));
    }
    let m = 1usize << (n - 1);
    (0..m)
        .map(|e| {
            let letters: Vec<_> = (0..n)
                .map(|k| {
                    let on = if k + 1 == n {
                        true
                    } else {
                        e >> (n - 2 - k) & 1 == 1
                    };
                    if on {
                        crate::pauli::Letter::Z
                    } else {
                        crate::pauli::Letter::I
                    }
                })
                .collect();
            PauliString::from_letters(&letters)
        })
        .collect()
}

/// `exp(-i sum_j coeffs[j] B_{generators[j]})` with pairwise commuting generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CartanElement {
    pub set: GeneratorSet,
    generators: Vec<PauliString>,
    pub coeffs: Vec<f64>,
}

impl CartanElement {
    pub fn new(set: GeneratorSet, generators: Vec<PauliString>, coeffs: Vec<f64>) -> Result<Self> {
        if generators.len() != coeffs.len() {
            return Err(Error::Dimension(format!(
                "{} generators, {} coefficients",
                generators.len(),
                coeffs.len()
            )));
        }
        if let Some(g) = generators.first() {
            let n = g.n();
            if generators.iter().any(|h| h.n() != n || h.is_identity()) {
                return Err(Error::Validation(
                    "generators must be non-identity strings of one length".into(),
                ));
            }
        }
        if !all_commute(&generators) {
            return Err(Error::Validation(format!("generators of {set} do not commute")));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Validation("non-finite Cartan coefficient".into()));
        }
        Ok(CartanElement {
            set,
            generators,
            coeffs,
        })
    }

    /// Coefficients over one of the named sets.
    pub fn over(set: GeneratorSet, coeffs: Vec<f64>) -> Result<Self> {
        let gens = match set {
            GeneratorSet::A(n) => generators_a(n)?,
            GeneratorSet::B(n) => generators_b(n)?,
            GeneratorSet::DiagonalZ(n) => generators_diagonal_z(n)?,
            GeneratorSet::Custom => {
                return Err(Error::Validation("custom sets need explicit generators".into()))
            }
        };
        Self::new(set, gens, coeffs)
    }

    pub fn zero(set: GeneratorSet) -> Result<Self> {
        let len = match set {
            GeneratorSet::A(n) => generators_a(n)?.len(),
            GeneratorSet::B(n) => generators_b(n)?.len(),
            GeneratorSet::DiagonalZ(n) => 1 << (n - 1),
            GeneratorSet::Custom => 0,
        };
        if set == GeneratorSet::Custom {
            return Self::new(set, vec![], vec![]);
        }
        Self::over(set, vec![0.0; len])
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Qubit count of the generators, `None` for an empty element.
    pub fn num_qubits(&self) -> Option<usize> {
        self.generators.first().map(|g| g.n())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, f64)> {
        self.generators.iter().zip(self.coeffs.iter().copied())
    }

    pub fn is_zero(&self, eps: f64) -> bool {
        self.coeffs.iter().all(|c| c.abs() <= eps)
    }

    /// `sum_j c_j B_{G_j}`.
    pub fn hamiltonian(&self) -> Option<CMat> {
        let n = self.num_qubits()?;
        let dim = 1usize << n;
        let mut h = CMat::zeros(dim, dim);
        for (g, c) in self.terms() {
            h += g.dense() * c64(c, 0.0);
        }
        Some(h)
    }

    /// The unitary on the generators' own register.
    pub fn unitary(&self) -> Result<UnitaryMatrix> {
        let n = self
            .num_qubits()
            .ok_or_else(|| Error::Validation("empty Cartan element has no register".into()))?;
        // Commuting Pauli terms: multiply the factors, each exp(-i c sigma/2) = cos - i sin sigma.
        let dim = 1usize << n;
        let mut u = CMat::identity(dim, dim);
        for (g, c) in self.terms() {
            let half = 0.5 * c;
            let f = CMat::identity(dim, dim) * c64(half.cos(), 0.0)
                + g.sigma_dense() * Complex64::new(0.0, -half.sin());
            u = f * u;
        }
        Ok(UnitaryMatrix::new_unchecked(u))
    }

    /// Appends a commuting term.
    pub fn push(&mut self, g: PauliString, c: f64) -> Result<()> {
        if self.generators.iter().any(|h| !h.commutes_with(&g)) {
            return Err(Error::Validation(format!(
                "{g} does not commute with {}",
                self.set
            )));
        }
        self.generators.push(g);
        self.coeffs.push(c);
        self.set = GeneratorSet::Custom;
        Ok(())
    }
}
