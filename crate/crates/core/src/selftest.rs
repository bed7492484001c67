//! Invariant suites shared by the `selftest` subcommand and the test targets.
//!
//! Each suite returns a [`SuiteReport`]; algebraic suites route every string
//! product through [`Ctx::multiply`] so a faulty multiplication table can be
//! injected and caught.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use crate::cartan::{CartanElement, GeneratorSet};
use crate::error::{Error, Result};
use crate::gates::{Axis, GateList};
use crate::kak::{euler_su2, kak_su4};
use crate::linalg::{c64, haar_random, haar_special, kron, max_abs, CMat, UnitaryMatrix};
use crate::pauli::{
    check_maximal_abelian, expand, generators_a, generators_b, generators_s, make_basis, pauli_multiply,
    subspace_tag, Ambient, PauliString, PauliTerm, SubspaceTag,
};
use crate::pipeline::{compile, run_pipeline};
use crate::pulse::{synthesize_pulses, ChainSpec, Conjugator};
use crate::sim::{apply_gate_list, distance};

pub type MultiplyFn = fn(&PauliString, &PauliString) -> Result<PauliTerm>;

#[derive(Clone, Copy)]
pub struct Ctx {
    pub multiply: MultiplyFn,
}

impl Default for Ctx {
    fn default() -> Self {
        Ctx {
            multiply: pauli_multiply,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

pub const SUITES: [&str; 11] = [
    "ortho",
    "commutation",
    "cartan-structure",
    "cartan-subalgebra",
    "expand",
    "euler",
    "kak",
    "decompose",
    "conjugation",
    "refocusing",
    "pipeline",
];

/// Runs the named suites in catalogue order; an empty filter runs all of them.
pub fn run(ctx: &Ctx, only: &[String]) -> Result<Vec<SuiteReport>> {
    for name in only {
        if !SUITES.contains(&name.as_str()) {
            return Err(Error::Validation(format!(
                "unknown suite {name:?}; known: {}",
                SUITES.join(", ")
            )));
        }
    }
    SUITES
        .iter()
        .filter(|s| only.is_empty() || only.iter().any(|o| o == *s))
        .map(|s| run_suite(s, ctx))
        .collect()
}

pub fn run_suite(name: &str, ctx: &Ctx) -> Result<SuiteReport> {
    let start = Instant::now();
    let outcome = match name {
        "ortho" => ortho(),
        "commutation" => commutation(ctx),
        "cartan-structure" => cartan_structure(ctx),
        "cartan-subalgebra" => cartan_subalgebra(),
        "expand" => expansion(),
        "euler" => euler(),
        "kak" => kak(),
        "decompose" => decomposition(),
        "conjugation" => conjugation(),
        "refocusing" => refocusing(),
        "pipeline" => pipeline(),
        other => return Err(Error::Validation(format!("unknown suite {other:?}"))),
    };
    let name = SUITES.iter().find(|s| **s == name).copied().unwrap_or("?");
    let (passed, detail) = match outcome {
        Ok(Check { ok, detail }) => (ok, detail),
        Err(e) => (false, e.to_string()),
    };
    Ok(SuiteReport {
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    })
}

struct Check {
    ok: bool,
    detail: String,
}

impl Check {
    fn residual(what: &str, worst: f64, tol: f64) -> Check {
        Check {
            ok: worst < tol,
            detail: format!("{what}: worst {worst:.2e} (tol {tol:.0e})"),
        }
    }

    fn fail(detail: String) -> Check {
        Check { ok: false, detail }
    }
}

fn ortho() -> Result<Check> {
    let mut worst = 0.0f64;
    for n in 1..=3 {
        let basis = make_basis(n)?;
        let dense: Vec<CMat> = basis.iter().map(|s| s.dense()).collect();
        let norm = (1usize << n) as f64 / 4.0;
        for (i, a) in dense.iter().enumerate() {
            for (j, b) in dense.iter().enumerate() {
                let tr: num_complex::Complex64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
                let want = if i == j { norm } else { 0.0 };
                worst = worst.max((tr - c64(want, 0.0)).norm());
            }
        }
    }
    Ok(Check::residual("tr(B_s B_t) for n <= 3", worst, 1e-12))
}

/// Symbolic commutators against dense ones.
fn commutation(ctx: &Ctx) -> Result<Check> {
    let mut worst = 0.0f64;
    for n in 1..=3 {
        let basis = make_basis(n)?;
        let dense: Vec<CMat> = basis.iter().map(|s| s.dense()).collect();
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let sym = (ctx.multiply)(a, b)?.dense() - (ctx.multiply)(b, a)?.dense();
                let want = &dense[i] * &dense[j] - &dense[j] * &dense[i];
                worst = worst.max(max_abs(&(sym - want)));
            }
        }
    }
    Ok(Check::residual("[B_s, B_t] for n <= 3", worst, 1e-12))
}

/// Which side of a symmetric pair a string falls on, if any.
type Side = fn(&PauliString) -> Option<bool>;

fn side_full(s: &PauliString) -> Option<bool> {
    subspace_tag(s).ok().map(|c| c.tag == SubspaceTag::K)
}

fn side_bar(s: &PauliString) -> Option<bool> {
    let c = subspace_tag(s).ok()?;
    match c.refined {
        Some(SubspaceTag::K0) => Some(true),
        Some(SubspaceTag::K1) => Some(false),
        _ => None,
    }
}

fn cartan_structure(ctx: &Ctx) -> Result<Check> {
    for n in 2..=4 {
        let basis = make_basis(n)?;
        let k_dim = basis.iter().filter(|s| side_full(s) == Some(true)).count();
        let want = 2 * 4usize.pow(n as u32 - 1) - 1;
        if k_dim != want {
            return Ok(Check::fail(format!("n={n}: dim k = {k_dim}, expected {want}")));
        }
        for (label, side) in [("(su, k)", side_full as Side), ("(k-bar, k0)", side_bar as Side)] {
            for a in &basis {
                let Some(ka) = side(a) else { continue };
                for b in &basis {
                    let Some(kb) = side(b) else { continue };
                    if a.commutes_with(b) {
                        continue;
                    }
                    let c = (ctx.multiply)(a, b)?.string;
                    // [k,k] and [m,m] land in k, [m,k] in m
                    let want = ka == kb;
                    if side(&c) != Some(want) {
                        return Ok(Check::fail(format!("{label} n={n}: [{a}, {b}] -> {c}")));
                    }
                }
            }
        }
    }
    Ok(Check {
        ok: true,
        detail: "both pairs closed for n = 2..4".into(),
    })
}

fn cartan_subalgebra() -> Result<Check> {
    for n in 2..=6 {
        let (a, b, s) = (
            generators_a(n)?.len(),
            generators_b(n)?.len(),
            generators_s(n)?.len(),
        );
        let half = 1usize << (n - 1);
        let expect_a = if n == 2 { 3 } else { half };
        if a != expect_a || b != half - 1 || s != 2 * half - 1 {
            return Ok(Check::fail(format!("n={n}: |a|={a} |b|={b} |s|={s}")));
        }
    }
    for n in 2..=4 {
        let a = generators_a(n)?;
        let ambient = if n == 2 {
            Ambient::TwoSpinM
        } else {
            Ambient::Sub(SubspaceTag::M)
        };
        if !check_maximal_abelian(&a, ambient, n)? {
            return Ok(Check::fail(format!("a({n}) is not maximal abelian")));
        }
        if !check_maximal_abelian(&generators_b(n)?, Ambient::Sub(SubspaceTag::K1), n)? {
            return Ok(Check::fail(format!("b({n}) is not maximal abelian")));
        }
    }
    Ok(Check {
        ok: true,
        detail: "a(n), b(n) maximal for n = 2..4; sizes to n = 6".into(),
    })
}

fn expansion() -> Result<Check> {
    let mut worst = 0.0f64;
    for n in 1..=4 {
        for seed in 0..3 {
            let u = haar_random(1 << n, 100 + seed);
            let h = u.matrix() + u.matrix().adjoint();
            let e = expand(&h, n)?;
            worst = worst.max(max_abs(&(e.reconstruct() - h)));
        }
    }
    Ok(Check::residual("expand round trip", worst, 1e-12))
}

fn euler() -> Result<Check> {
    let mut worst = 0.0f64;
    for seed in 0..200 {
        let u = haar_special(2, seed);
        let a = euler_su2(&u)?;
        worst = worst.max(max_abs(&(a.matrix() - u.matrix())));
    }
    Ok(Check::residual("XZX reconstruction", worst, 1e-12))
}

fn kak() -> Result<Check> {
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let u = haar_random(4, seed);
        let k = kak_su4(&u)?;
        worst = worst.max(distance(&k.matrix(), u.matrix())?.frobenius_phase_invariant);
        if !k.in_chamber(1e-12) {
            return Ok(Check::fail(format!(
                "seed {seed}: {:?} outside the chamber",
                k.alpha
            )));
        }
        let dressed = dress(&u, seed);
        let d = kak_su4(&dressed)?;
        for i in 0..3 {
            worst = worst.max((d.alpha[i] - k.alpha[i]).abs());
        }
    }
    Ok(Check::residual("reconstruction and dressing", worst, 1e-9))
}

/// `(A (x) B) U (C (x) D)` with seeded Haar locals.
pub fn dress(u: &UnitaryMatrix, seed: u64) -> UnitaryMatrix {
    let local = |s: u64| {
        kron(
            haar_random(2, 7919 * seed + s).matrix(),
            haar_random(2, 7919 * seed + s + 1).matrix(),
        )
    };
    UnitaryMatrix::new_unchecked(local(11) * u.matrix() * local(13))
}

fn decomposition() -> Result<Check> {
    let mut worst = 0.0f64;
    for (n, count, tol) in [(3usize, 4u64, 1e-8), (4, 2, 4e-8)] {
        for seed in 0..count {
            let c = compile(&haar_special(1 << n, seed))?;
            if !c.gates.couplings_adjacent() {
                return Ok(Check::fail(format!("n={n} seed {seed}: non-adjacent coupling")));
            }
            worst = worst.max(c.residual / tol);
        }
    }
    Ok(Check::residual("flattened distance / budget", worst, 1.0))
}

fn exp_b(s: &str, theta: f64) -> Result<CMat> {
    let p: PauliString = s.parse()?;
    Ok(CartanElement::new(GeneratorSet::Custom, vec![p], vec![theta])?
        .unitary()?
        .into_inner())
}

fn both_qubits(axis: Axis, angle: f64) -> GateList {
    let mut g = GateList::new();
    g.local(1, axis, angle);
    g.local(2, axis, angle);
    g
}

/// Residuals of the three conjugation identities relating `exp(-i pi a B_s)`
/// for `s` in `1ZZ`, `XXZ`, `YYZ`, `ZZZ`.
pub fn conjugation_residuals(alpha: f64) -> Result<[f64; 3]> {
    let n = 3;
    let theta = PI * alpha;
    let c = Conjugator {
        at: 0,
        first: crate::pauli::Letter::X,
        second: crate::pauli::Letter::Y,
    };
    let cm = apply_gate_list(&c.gates(false), n)?.into_inner();
    let xxz = exp_b("XXZ", theta)?;
    let first = &cm * exp_b("1ZZ", theta)? * cm.adjoint() - &xxz;

    let rz = apply_gate_list(&both_qubits(Axis::Z, FRAC_PI_2), n)?.into_inner();
    let second = &rz * &xxz * rz.adjoint() - exp_b("YYZ", theta)?;

    let ry = apply_gate_list(&both_qubits(Axis::Y, FRAC_PI_2), n)?.into_inner();
    let third = &ry * &xxz * ry.adjoint() - exp_b("ZZZ", theta)?;
    Ok([max_abs(&first), max_abs(&second), max_abs(&third)])
}

fn conjugation() -> Result<Check> {
    let mut worst = 0.0f64;
    for alpha in [0.25, 1.0 / 3.0, 0.7] {
        for r in conjugation_residuals(alpha)? {
            worst = worst.max(r);
        }
    }
    Ok(Check::residual("three identities", worst, 1e-12))
}

/// Distance between the refocused pulse block for one coupling on `(k, k+1)`
/// and the ideal gate, on an `n`-spin chain with unequal couplings.
pub fn refocusing_residual(n: usize, k: usize, theta: f64) -> Result<f64> {
    let j: Vec<f64> = (0..n - 1).map(|i| 100.0 + 17.0 * i as f64).collect();
    let chain = ChainSpec::new(n, j)?;
    let mut g = GateList::new();
    g.coupling(k, theta);
    let prog = synthesize_pulses(&g, &chain)?;
    let ideal = apply_gate_list(&g, n)?;
    Ok(max_abs(&(prog.propagator()?.into_inner() - ideal.matrix())))
}

pub const REFOCUS_ANGLES: [f64; 4] = [0.3, FRAC_PI_2, 2.5, -0.8];

fn refocusing() -> Result<Check> {
    let mut worst = 0.0f64;
    for n in 3..=5 {
        for k in 1..n {
            for theta in REFOCUS_ANGLES {
                worst = worst.max(refocusing_residual(n, k, theta)?);
            }
        }
    }
    Ok(Check::residual("single-coupling blocks, n = 3..5", worst, 1e-10))
}

fn pipeline() -> Result<Check> {
    let chain = ChainSpec::uniform(3, 100.0)?;
    let mut worst = 0.0f64;
    let mut time = 0.0f64;
    for seed in 0..3 {
        let r = run_pipeline(&haar_special(8, seed), &chain)?;
        worst = worst.max(1.0 - r.fidelity.trace_fidelity);
        time = time.max(r.coupling_time);
    }
    let mut c = Check::residual("3-spin infidelity at J = 100 Hz", worst, 1e-6);
    c.detail
        .push_str(&format!(", longest coupling time {:.2} ms", time * 1e3));
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes() {
        let reports = run(&Ctx::default(), &[]).unwrap();
        assert_eq!(reports.len(), SUITES.len());
        for r in reports {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }

    #[test]
    fn filter_selects_one() {
        let r = run(&Ctx::default(), &["ortho".to_string()]).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].name, "ortho");
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(matches!(
            run(&Ctx::default(), &["nope".to_string()]),
            Err(Error::Validation(_))
        ));
    }

    fn flipped(a: &PauliString, b: &PauliString) -> Result<PauliTerm> {
        let mut t = pauli_multiply(a, b)?;
        t.coeff = -t.coeff;
        Ok(t)
    }

    #[test]
    fn sign_error_is_caught_by_commutation_only() {
        let ctx = Ctx { multiply: flipped };
        let r = run(
            &ctx,
            &["ortho".into(), "commutation".into(), "cartan-structure".into()],
        )
        .unwrap();
        let failed: Vec<_> = r.iter().filter(|r| !r.passed).map(|r| r.name).collect();
        assert_eq!(failed, ["commutation"]);
    }
}
