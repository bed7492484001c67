//! Product operator basis of su(2^n).
//!
//! A [`PauliString`] names the basis element `B_s = 2^{q-1} * prod_k I_{k,alpha}`
//! where `I_alpha = sigma_alpha / 2` and `q` is the number of non-identity
//! letters. Since every letter contributes a factor `1/2`, the dense matrix is
//! always `sigma_s / 2`, which is what makes `tr(B_r B_s) = delta_rs 2^{n-2}`
//! hold exactly. The identity word is allowed as a value (it shows up in
//! products) and then stands for the identity matrix itself.
//!
//! Qubit `k` (0-based from the left) is the `k`-th Kronecker factor, i.e. bit
//! `n-1-k` of a computational-basis index. Internally a string is a pair of
//! bit masks in that index layout, so products are a couple of XORs plus a
//! phase count.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Largest supported qubit count.
pub const MAX_QUBITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            '1' | 'I' => Some(Letter::I),
            'X' | 'x' => Some(Letter::X),
            'Y' | 'y' => Some(Letter::Y),
            'Z' | 'z' => Some(Letter::Z),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Letter::I => '1',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Letter {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    /// Dense 2x2 Pauli matrix (not halved).
    pub fn sigma(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Letter::I => [[l, o], [o, l]],
            Letter::X => [[o, l], [l, o]],
            Letter::Y => [[o, -i], [i, o]],
            Letter::Z => [[l, o], [o, -l]],
        }
    }
}

/// An n-letter word over `{1, X, Y, Z}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: u8,
    x: u32,
    z: u32,
}

impl PauliString {
    pub fn identity(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(PauliString {
            n: n as u8,
            x: 0,
            z: 0,
        })
    }

    pub fn from_letters(letters: &[Letter]) -> Result<Self> {
        let n = letters.len();
        check_n(n)?;
        let mut s = PauliString {
            n: n as u8,
            x: 0,
            z: 0,
        };
        for (k, l) in letters.iter().enumerate() {
            s.set(k, *l);
        }
        Ok(s)
    }

    /// Single letter `l` on qubit `k` (0-based), identity elsewhere.
    pub fn single(n: usize, k: usize, l: Letter) -> Result<Self> {
        let mut s = Self::identity(n)?;
        if k >= n {
            return Err(Error::Range(format!("qubit {k} outside 0..{n}")));
        }
        s.set(k, l);
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    #[inline]
    fn bit(&self, k: usize) -> u32 {
        1 << (self.n as usize - 1 - k)
    }

    pub fn letter(&self, k: usize) -> Letter {
        let b = self.bit(k);
        Letter::from_bits(self.x & b != 0, self.z & b != 0)
    }

    pub fn set(&mut self, k: usize, l: Letter) {
        let b = self.bit(k);
        let (x, z) = l.bits();
        self.x = if x { self.x | b } else { self.x & !b };
        self.z = if z { self.z | b } else { self.z & !b };
    }

    pub fn letters(&self) -> Vec<Letter> {
        (0..self.n()).map(|k| self.letter(k)).collect()
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.x | self.z == 0
    }

    /// Qubits carrying a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n()).filter(|&k| self.letter(k) != Letter::I).collect()
    }

    pub fn x_mask(&self) -> u32 {
        self.x
    }

    pub fn z_mask(&self) -> u32 {
        self.z
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// Appends one letter as a new last qubit.
    pub fn extend(&self, l: Letter) -> Result<Self> {
        let mut letters = self.letters();
        letters.push(l);
        Self::from_letters(&letters)
    }

    /// Drops the letter of the last qubit.
    pub fn prefix(&self) -> Result<Self> {
        let letters = self.letters();
        Self::from_letters(&letters[..letters.len() - 1])
    }

    /// `sigma_a sigma_b = phase * sigma_c`; returns `(c, phase)` with phase a power of `i`.
    pub fn sigma_product(&self, other: &PauliString) -> (PauliString, Complex64) {
        // sigma = i^{|x&z|} X^x Z^z, and Z^z X^x = (-1)^{|z&x|} X^x Z^z.
        let c = PauliString {
            n: self.n,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        };
        let ya = (self.x & self.z).count_ones() as i32;
        let yb = (other.x & other.z).count_ones() as i32;
        let yc = (c.x & c.z).count_ones() as i32;
        let swap = (self.z & other.x).count_ones() as i32;
        let power = (ya + yb - yc + 2 * swap).rem_euclid(4);
        (c, i_pow(power))
    }

    /// Dense `sigma_s` (Kronecker product of full Pauli matrices).
    pub fn sigma_dense(&self) -> CMat {
        let dim = 1usize << self.n();
        let mut m = CMat::zeros(dim, dim);
        let base = i_pow((self.x & self.z).count_ones() as i32);
        for k in 0..dim {
            let j = k ^ self.x as usize;
            let sign = if (self.z as usize & k).count_ones().is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            m[(j, k)] = base * sign;
        }
        m
    }

    /// Dense matrix of the basis element: `B_s = sigma_s / 2`, or the identity
    /// matrix for the identity word.
    pub fn dense(&self) -> CMat {
        self.sigma_dense() * Complex64::new(self.scale(), 0.0)
    }

    /// `B_s = scale * sigma_s`.
    pub fn scale(&self) -> f64 {
        if self.is_identity() {
            1.0
        } else {
            0.5
        }
    }

    /// Dense product operator `prod_k I_{k,alpha} = sigma_s / 2^q`.
    pub fn spin_product_dense(&self) -> CMat {
        let f = 0.5f64.powi(self.weight() as i32);
        self.sigma_dense() * Complex64::new(f, 0.0)
    }

    /// Product-operator label such as `I1xI2xI3z` (1-based, as written in NMR texts).
    pub fn product_operator_label(&self) -> String {
        if self.is_identity() {
            return "1".into();
        }
        let mut out = String::new();
        for k in self.support() {
            let a = self.letter(k).to_char().to_ascii_lowercase();
            out.push_str(&format!("I{}{}", k + 1, a));
        }
        out
    }
}

fn i_pow(p: i32) -> Complex64 {
    match p.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        Err(Error::Range(format!("qubit count {n} outside 1..={MAX_QUBITS}")))
    } else {
        Ok(())
    }
}

fn check_same_n(a: &PauliString, b: &PauliString) -> Result<()> {
    if a.n != b.n {
        Err(Error::Dimension(format!("strings on {} and {} qubits", a.n, b.n)))
    } else {
        Ok(())
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.letters().cmp(&other.letters()))
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.n() {
            write!(f, "{}", self.letter(k).to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| {
                Letter::from_char(c)
                    .ok_or_else(|| Error::Validation(format!("bad pauli letter {c:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_letters(&letters)
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `coeff * mat(string)`, where `mat` is `B_s` or the identity matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliTerm {
    pub string: PauliString,
    pub coeff: Complex64,
}

impl PauliTerm {
    pub fn dense(&self) -> CMat {
        self.string.dense() * self.coeff
    }
}

/// Exact product of the two basis matrices.
pub fn pauli_multiply(a: &PauliString, b: &PauliString) -> Result<PauliTerm> {
    check_same_n(a, b)?;
    let (c, phase) = a.sigma_product(b);
    let coeff = phase * (a.scale() * b.scale() / c.scale());
    Ok(PauliTerm { string: c, coeff })
}

/// `[mat(a), mat(b)]`, or `None` when the two commute.
pub fn pauli_commutator(a: &PauliString, b: &PauliString) -> Result<Option<PauliTerm>> {
    check_same_n(a, b)?;
    if a.commutes_with(b) {
        return Ok(None);
    }
    let mut t = pauli_multiply(a, b)?;
    t.coeff *= 2.0;
    Ok(Some(t))
}

/// All `4^n - 1` non-identity strings in lexicographic order (`1 < X < Y < Z`).
pub fn make_basis(n: usize) -> Result<Vec<PauliString>> {
    check_n(n)?;
    let total = 1usize << (2 * n);
    let alphabet = [Letter::I, Letter::X, Letter::Y, Letter::Z];
    let mut out = Vec::with_capacity(total - 1);
    let mut letters = vec![Letter::I; n];
    for code in 1..total {
        for (k, slot) in letters.iter_mut().enumerate() {
            *slot = alphabet[(code >> (2 * (n - 1 - k))) & 3];
        }
        out.push(PauliString::from_letters(&letters)?);
    }
    Ok(out)
}

/// Real expansion `H = identity * 1 + sum_s c_s B_s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliExpansion {
    pub n: usize,
    pub terms: BTreeMap<PauliString, f64>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub identity: f64,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

impl PauliExpansion {
    pub fn new(n: usize) -> Self {
        PauliExpansion {
            n,
            terms: BTreeMap::new(),
            identity: 0.0,
        }
    }

    pub fn reconstruct(&self) -> CMat {
        let dim = 1usize << self.n;
        let mut m = CMat::identity(dim, dim) * Complex64::new(self.identity, 0.0);
        for (s, c) in &self.terms {
            m += s.dense() * Complex64::new(*c, 0.0);
        }
        m
    }
}

/// Coefficients `c_s = tr(B_s H) / 2^{n-2}` of a Hermitian matrix.
pub fn expand(h: &CMat, n: usize) -> Result<PauliExpansion> {
    check_n(n)?;
    let dim = 1usize << n;
    if h.nrows() != dim || h.ncols() != dim {
        return Err(Error::Dimension(format!(
            "{}x{} matrix for {n} qubits",
            h.nrows(),
            h.ncols()
        )));
    }
    let dev = linalg::hermiticity_defect(h);
    if dev > linalg::TAU_HERM {
        return Err(Error::Validation(format!(
            "matrix is not Hermitian (defect {dev:.3e})"
        )));
    }
    let norm = (dim as f64) / 4.0;
    let mut out = PauliExpansion::new(n);
    out.identity = h.trace().re / dim as f64;
    for s in make_basis(n)? {
        // tr(sigma_s H) touches one entry per row.
        let base = i_pow((s.x & s.z).count_ones() as i32);
        let mut tr = Complex64::new(0.0, 0.0);
        for k in 0..dim {
            let j = k ^ s.x as usize;
            let sign = if (s.z as usize & k).count_ones().is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            tr += base * sign * h[(k, j)];
        }
        let c = 0.5 * tr.re / norm;
        if c != 0.0 {
            out.terms.insert(s, c);
        }
    }
    Ok(out)
}

/// Coarse and refined subspaces of su(2^n) relative to the last qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SubspaceTag {
    /// `A (x) I_z`, `B (x) 1`, `I_nz`: last letter in `{1, Z}`.
    K,
    /// `A (x) I_x`, `B (x) I_y`, `I_nx`, `I_ny`: last letter in `{X, Y}`.
    M,
    /// `B (x) 1`.
    K0,
    /// `A (x) I_z` with `A` non-identity.
    K1,
}

impl SubspaceTag {
    pub fn contains(&self, s: &PauliString) -> bool {
        if s.is_identity() {
            return false;
        }
        let last = s.letter(s.n() - 1);
        match self {
            SubspaceTag::K => matches!(last, Letter::I | Letter::Z),
            SubspaceTag::M => matches!(last, Letter::X | Letter::Y),
            SubspaceTag::K0 => last == Letter::I,
            SubspaceTag::K1 => last == Letter::Z && s.weight() > 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    /// `K` or `M`.
    pub tag: SubspaceTag,
    /// `K0` or `K1` for K-strings other than the u(1) generator.
    pub refined: Option<SubspaceTag>,
    /// The lone `Z` on the last qubit (`i I_nz`).
    pub u1: bool,
}

pub fn subspace_tag(s: &PauliString) -> Result<Classification> {
    if s.is_identity() {
        return Err(Error::Validation("identity string is not in su(2^n)".into()));
    }
    let last = s.letter(s.n() - 1);
    Ok(match last {
        Letter::X | Letter::Y => Classification {
            tag: SubspaceTag::M,
            refined: None,
            u1: false,
        },
        Letter::I => Classification {
            tag: SubspaceTag::K,
            refined: Some(SubspaceTag::K0),
            u1: false,
        },
        Letter::Z if s.weight() == 1 => Classification {
            tag: SubspaceTag::K,
            refined: None,
            u1: true,
        },
        Letter::Z => Classification {
            tag: SubspaceTag::K,
            refined: Some(SubspaceTag::K1),
            u1: false,
        },
    })
}

/// Ambient space for maximal-abelian checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ambient {
    Sub(SubspaceTag),
    /// Weight-2 strings on two qubits (the `m` of `SU(4)/SU(2)xSU(2)`).
    TwoSpinM,
    /// All of su(2^n).
    Full,
}

impl Ambient {
    pub fn contains(&self, s: &PauliString) -> bool {
        match self {
            Ambient::Sub(t) => t.contains(s),
            Ambient::TwoSpinM => s.n() == 2 && s.weight() == 2,
            Ambient::Full => !s.is_identity(),
        }
    }
}

fn s_set(n: usize) -> Result<Vec<PauliString>> {
    match n {
        1 => Ok(vec!["Z".parse()?]),
        2 => a_set(2),
        _ => {
            let prev = s_set(n - 1)?;
            let mut out = vec![PauliString::single(n, n - 1, Letter::X)?];
            for a in &prev {
                out.push(a.extend(Letter::I)?);
            }
            for a in &prev {
                out.push(a.extend(Letter::X)?);
            }
            Ok(out)
        }
    }
}

fn a_set(n: usize) -> Result<Vec<PauliString>> {
    if n == 2 {
        return ["XX", "YY", "ZZ"].iter().map(|s| s.parse()).collect();
    }
    let mut out = vec![PauliString::single(n, n - 1, Letter::X)?];
    for a in s_set(n - 1)? {
        out.push(a.extend(Letter::X)?);
    }
    Ok(out)
}

fn check_generator_n(n: usize) -> Result<()> {
    if !(2..=MAX_QUBITS).contains(&n) {
        Err(Error::Range(format!(
            "generator sets need 2 <= n <= {MAX_QUBITS}, got {n}"
        )))
    } else {
        Ok(())
    }
}

/// Maximal commuting set `s(n)` in su(2^n), `2^n - 1` strings.
pub fn generators_s(n: usize) -> Result<Vec<PauliString>> {
    check_generator_n(n)?;
    s_set(n)
}

/// Strings whose span is the Cartan subalgebra `h(n)` of `(su(2^n), su_k)`.
///
/// For `n = 2` this is the two-spin set `{XX, YY, ZZ}`.
pub fn generators_a(n: usize) -> Result<Vec<PauliString>> {
    check_generator_n(n)?;
    a_set(n)
}

/// Strings whose span is `f(n)`, the Cartan subalgebra of `(su_k-bar, su_k0)`.
pub fn generators_b(n: usize) -> Result<Vec<PauliString>> {
    check_generator_n(n)?;
    s_set(n - 1)?.iter().map(|a| a.extend(Letter::Z)).collect()
}

/// Strings reachable as products of `gens` (phases dropped), including the identity.
pub fn closure(gens: &[PauliString]) -> HashSet<PauliString> {
    let mut out = HashSet::new();
    let Some(first) = gens.first() else {
        return out;
    };
    let mut frontier = vec![PauliString::identity(first.n()).expect("valid n")];
    out.insert(frontier[0]);
    while let Some(p) = frontier.pop() {
        for g in gens {
            let (q, _) = p.sigma_product(g);
            if out.insert(q) {
                frontier.push(q);
            }
        }
    }
    out
}

pub fn all_commute(gens: &[PauliString]) -> bool {
    gens.iter()
        .enumerate()
        .all(|(i, a)| gens[i + 1..].iter().all(|b| a.commutes_with(b)))
}

/// Exact test that `span(gens)` is maximal abelian inside `ambient`.
pub fn check_maximal_abelian(gens: &[PauliString], ambient: Ambient, n: usize) -> Result<bool> {
    check_n(n)?;
    for g in gens {
        if g.n() != n {
            return Err(Error::Dimension(format!("{g} is not an {n}-qubit string")));
        }
        if !ambient.contains(g) {
            return Err(Error::Validation(format!("{g} is outside {ambient:?}")));
        }
    }
    if !all_commute(gens) {
        return Ok(false);
    }
    // Distinct basis strings are linearly independent, so the span of `gens`
    // meets the basis exactly in `gens`.
    let span: HashSet<PauliString> = gens.iter().copied().collect();
    for s in make_basis(n)? {
        if !ambient.contains(&s) || span.contains(&s) {
            continue;
        }
        if gens.iter().all(|g| g.commutes_with(&s)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Distinct strings as an ordered set, handy for comparing unordered listings.
pub fn as_set(strings: &[PauliString]) -> BTreeSet<PauliString> {
    strings.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn basis_sizes_and_weights() {
        let b1 = make_basis(1).unwrap();
        assert_eq!(b1, vec![p("X"), p("Y"), p("Z")]);
        let b2 = make_basis(2).unwrap();
        assert_eq!(b2.len(), 15);
        assert_eq!(b2.iter().filter(|s| s.weight() == 1).count(), 6);
        assert_eq!(b2.iter().filter(|s| s.weight() == 2).count(), 9);
        assert_eq!(make_basis(3).unwrap().len(), 63);
        let mut sorted = b2.clone();
        sorted.sort();
        assert_eq!(sorted, b2);
    }

    #[test]
    fn basis_rejects_bad_n() {
        assert!(matches!(make_basis(0), Err(Error::Range(_))));
        assert!(matches!(make_basis(13), Err(Error::Range(_))));
    }

    #[test]
    fn parse_and_display() {
        let s = p("ZZ1");
        assert_eq!(s.to_string(), "ZZ1");
        assert_eq!(s.weight(), 2);
        assert_eq!(s.product_operator_label(), "I1zI2z");
        assert!("ZQ".parse::<PauliString>().is_err());
        assert_eq!(serde_json::to_string(&s).unwrap(), "\"ZZ1\"");
    }

    #[test]
    fn square_of_x_is_quarter_identity() {
        let t = pauli_multiply(&p("X"), &p("X")).unwrap();
        assert!(t.string.is_identity());
        assert_eq!(t.coeff, c(0.25, 0.0));
    }

    #[test]
    fn identity_factor_is_neutral() {
        let t = pauli_multiply(&p("X"), &p("1")).unwrap();
        assert_eq!(t.string, p("X"));
        assert_eq!(t.coeff, c(1.0, 0.0));
    }

    #[test]
    fn xx_times_yy() {
        // (2 I1x I2x)(2 I1y I2y) = -(1/2)(2 I1z I2z); checked densely too.
        let t = pauli_multiply(&p("XX"), &p("YY")).unwrap();
        assert_eq!(t.string, p("ZZ"));
        assert_eq!(t.coeff, c(-0.5, 0.0));
        let dense = p("XX").dense() * p("YY").dense();
        assert!((dense - t.dense()).norm() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            pauli_multiply(&p("X"), &p("XX")),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            pauli_commutator(&p("X"), &p("XX")),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn commutator_examples() {
        let t = pauli_commutator(&p("X"), &p("Y")).unwrap().unwrap();
        // [I_x, I_y] = i I_z
        assert_eq!(t.string, p("Z"));
        assert_eq!(t.coeff, c(0.0, 1.0));
        assert!(pauli_commutator(&p("X1"), &p("1Y")).unwrap().is_none());
        assert!(pauli_commutator(&p("XX"), &p("YY")).unwrap().is_none());
    }

    #[test]
    fn ortho_relation() {
        for s in make_basis(3).unwrap() {
            let d = s.dense();
            let tr = (&d * &d).trace();
            assert!((tr - c(2.0, 0.0)).norm() < 1e-14);
        }
        let a = p("XZ1").dense();
        let b = p("1ZY").dense();
        assert!((a * b).trace().norm() < 1e-14);
    }

    #[test]
    fn expand_single_basis_element() {
        let e = expand(&p("Z1").dense(), 2).unwrap();
        assert_eq!(e.terms.len(), 1);
        assert!((e.terms[&p("Z1")] - 1.0).abs() < 1e-15);
        assert_eq!(e.identity, 0.0);
    }

    #[test]
    fn expand_reports_identity_part() {
        let dim = 4;
        let h = CMat::identity(dim, dim) * c(0.3, 0.0) + p("XY").dense() * c(-1.2, 0.0);
        let e = expand(&h, 2).unwrap();
        assert!((e.identity - 0.3).abs() < 1e-15);
        assert!((e.terms[&p("XY")] + 1.2).abs() < 1e-15);
        assert!((e.reconstruct() - h).norm() < 1e-14);
    }

    #[test]
    fn expand_rejects_non_hermitian() {
        let mut h = CMat::zeros(2, 2);
        h[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(expand(&h, 1), Err(Error::Validation(_))));
    }

    #[test]
    fn tags() {
        assert_eq!(subspace_tag(&p("XX")).unwrap().tag, SubspaceTag::M);
        assert_eq!(subspace_tag(&p("Z1")).unwrap().tag, SubspaceTag::K);
        let t = subspace_tag(&p("ZZ1")).unwrap();
        assert_eq!(t.tag, SubspaceTag::K);
        assert_eq!(t.refined, Some(SubspaceTag::K0));
        let u = subspace_tag(&p("11Z")).unwrap();
        assert!(u.u1);
        assert_eq!(u.refined, None);
        assert!(subspace_tag(&p("111")).is_err());
    }

    #[test]
    fn generator_listings() {
        let a3: Vec<String> = generators_a(3).unwrap().iter().map(|s| s.to_string()).collect();
        assert_eq!(a3, ["11X", "XXX", "YYX", "ZZX"]);
        let b4: Vec<String> = generators_b(4)
            .unwrap()
            .iter()
            .map(|s| s.product_operator_label())
            .collect();
        assert_eq!(
            b4,
            [
                "I3xI4z",
                "I1xI2xI4z",
                "I1yI2yI4z",
                "I1zI2zI4z",
                "I1xI2xI3xI4z",
                "I1yI2yI3xI4z",
                "I1zI2zI3xI4z"
            ]
        );
        let b3: Vec<String> = generators_b(3).unwrap().iter().map(|s| s.to_string()).collect();
        assert_eq!(b3, ["XXZ", "YYZ", "ZZZ"]);
        assert!(matches!(generators_a(1), Err(Error::Range(_))));
        assert!(matches!(generators_b(1), Err(Error::Range(_))));
    }

    #[test]
    fn a5_count_matches_recursion() {
        // |a(n)| = |s(n-1)| + 1 with |s(n)| = |s(n-1)| + |a(n)| from s(2) = 3.
        let mut s = 3usize;
        let mut a = 3usize;
        for _ in 3..=5 {
            a = s + 1;
            s += a;
        }
        assert_eq!(a, 16);
        assert_eq!(generators_a(5).unwrap().len(), a);
    }

    #[test]
    fn maximal_abelian_examples() {
        let h2: Vec<_> = ["XX", "YY", "ZZ"].iter().map(|s| p(s)).collect();
        assert!(check_maximal_abelian(&h2, Ambient::TwoSpinM, 2).unwrap());
        assert!(!check_maximal_abelian(&[p("XX")], Ambient::TwoSpinM, 2).unwrap());
        let a3 = generators_a(3).unwrap();
        assert!(check_maximal_abelian(&a3, Ambient::Sub(SubspaceTag::M), 3).unwrap());
        assert!(matches!(
            check_maximal_abelian(&[p("ZZ")], Ambient::Sub(SubspaceTag::M), 2),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn cartan_sets_are_maximal() {
        for n in 3..=4 {
            let a = generators_a(n).unwrap();
            assert!(check_maximal_abelian(&a, Ambient::Sub(SubspaceTag::M), n).unwrap());
        }
        for n in 2..=4 {
            let b = generators_b(n).unwrap();
            assert!(check_maximal_abelian(&b, Ambient::Sub(SubspaceTag::K1), n).unwrap());
        }
        // a product of two generators is never a new candidate
        let partial = &generators_a(3).unwrap()[..3];
        assert!(!check_maximal_abelian(partial, Ambient::Sub(SubspaceTag::M), 3).unwrap());
    }

    #[test]
    fn non_commuting_set_is_not_abelian() {
        assert!(!check_maximal_abelian(&[p("XX"), p("XY")], Ambient::Sub(SubspaceTag::M), 2).unwrap());
    }
}
