use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::euler::{euler_su2, EulerAngles};
use super::split::{split_level1, split_level2, BlockPair};
use super::su4::{kak_su4, KakSu4};
use crate::cartan::CartanElement;
use crate::error::{Error, Result};
use crate::gates::GateList;
use crate::linalg::{kron, CMat, UnitaryMatrix};
use crate::pulse::{rewrite_cartan_factor, ChainSpec};
use crate::sim::apply_gate_list;

/// Recursive factorization. Qubit labels are 1-based and absolute; children
/// of a [`GateTree::Sequence`] multiply left to right as matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum GateTree {
    EulerLeaf {
        q: usize,
        #[serde(flatten)]
        angles: EulerAngles,
        #[serde(default)]
        phase: f64,
    },
    CanonicalSu4 {
        pair: [usize; 2],
        #[serde(flatten)]
        kak: KakSu4,
    },
    CartanFactor {
        element: CartanElement,
    },
    LocalWord {
        gates: GateList,
    },
    Phase {
        phi: f64,
    },
    Sequence {
        children: Vec<GateTree>,
    },
}

impl GateTree {
    /// Dense operator on an `n`-qubit register.
    pub fn evaluate(&self, n: usize) -> Result<CMat> {
        let dim = 1usize << n;
        let embed = |m: CMat, used: usize| -> Result<CMat> {
            if used > n {
                return Err(Error::Dimension(format!("{used}-qubit factor in {n}-qubit tree")));
            }
            let rest = 1usize << (n - used);
            Ok(kron(&m, &CMat::identity(rest, rest)))
        };
        match self {
            GateTree::EulerLeaf { q, angles, phase } => {
                let mut g = GateList::new();
                g.phase(*phase);
                angles.push_gates(&mut g, *q);
                Ok(apply_gate_list(&g, n)?.into_inner())
            }
            GateTree::CanonicalSu4 { pair, kak } => {
                if pair[1] != pair[0] + 1 {
                    return Err(Error::Validation(format!("pair {pair:?} is not adjacent")));
                }
                let mut g = GateList::new();
                kak.push_gates(&mut g, pair[0]);
                Ok(apply_gate_list(&g, n)?.into_inner())
            }
            GateTree::CartanFactor { element } => match element.num_qubits() {
                None => Ok(CMat::identity(dim, dim)),
                Some(m) => embed(element.unitary()?.into_inner(), m),
            },
            GateTree::LocalWord { gates } => Ok(apply_gate_list(gates, n)?.into_inner()),
            GateTree::Phase { phi } => Ok(CMat::identity(dim, dim) * Complex64::from_polar(1.0, *phi)),
            GateTree::Sequence { children } => {
                let mut acc = CMat::identity(dim, dim);
                for c in children {
                    acc *= c.evaluate(n)?;
                }
                Ok(acc)
            }
        }
    }

    /// Time-ordered primitives; Cartan factors are lowered on a chain of length `n`.
    pub fn flatten(&self, n: usize) -> Result<GateList> {
        let chain = ChainSpec::uniform(n, 1.0)?;
        let mut out = GateList::new();
        self.flatten_into(&chain, &mut out)?;
        Ok(out)
    }

    fn flatten_into(&self, chain: &ChainSpec, out: &mut GateList) -> Result<()> {
        match self {
            GateTree::EulerLeaf { q, angles, phase } => {
                out.phase(*phase);
                angles.push_gates(out, *q);
            }
            GateTree::CanonicalSu4 { pair, kak } => kak.push_gates(out, pair[0]),
            GateTree::CartanFactor { element } => {
                if !element.is_empty() {
                    out.extend(&rewrite_cartan_factor(element, chain)?);
                }
            }
            GateTree::LocalWord { gates } => out.extend(gates),
            GateTree::Phase { phi } => out.phase(*phi),
            GateTree::Sequence { children } => {
                for c in children.iter().rev() {
                    c.flatten_into(chain, out)?;
                }
            }
        }
        Ok(())
    }

    pub fn children(&self) -> &[GateTree] {
        match self {
            GateTree::Sequence { children } => children,
            _ => &[],
        }
    }

    /// Visits every node depth first.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a GateTree)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }
}

/// Reconstruction budget `1e-9 * 4^(n-2)` (at least `1e-9`).
pub fn budget(n: usize) -> f64 {
    1e-9 * 4f64.powi(n.saturating_sub(2) as i32)
}

/// Factors a unitary on `n` qubits into the recursive tree.
pub fn decompose(u: &UnitaryMatrix) -> Result<GateTree> {
    decompose_at(u, "root")
}

fn decompose_at(u: &UnitaryMatrix, path: &str) -> Result<GateTree> {
    let n = u.num_qubits()?;
    match n {
        0 => Err(Error::Range("zero-qubit input".into())),
        1 => {
            let phi = 0.5 * u.det().arg();
            let su = UnitaryMatrix::new_unchecked(u.matrix() * Complex64::from_polar(1.0, -phi));
            let angles = euler_su2(&su).map_err(|e| e.context(path))?;
            Ok(GateTree::EulerLeaf {
                q: 1,
                angles,
                phase: phi,
            })
        }
        2 => {
            let kak = kak_su4(u).map_err(|e| e.context(path))?;
            Ok(GateTree::CanonicalSu4 { pair: [1, 2], kak })
        }
        _ => {
            let phi = u.det().arg() / (1usize << n) as f64;
            let su = UnitaryMatrix::new_unchecked(u.matrix() * Complex64::from_polar(1.0, -phi));
            let l1 = split_level1(&su).map_err(|e| e.context(path))?;
            let mut children = vec![GateTree::Phase { phi }];
            if l1.y.is_zero(crate::gates::ANGLE_EPS) {
                // Block-diagonal input: K1 K2 is a single block pair.
                let merged = BlockPair::new(
                    UnitaryMatrix::new_unchecked(l1.k1.u0.matrix() * l1.k2.u0.matrix()),
                    UnitaryMatrix::new_unchecked(l1.k1.u1.matrix() * l1.k2.u1.matrix()),
                )?;
                let here = format!("{path}/k");
                let (v, z, w) = demux(&merged, &here)?;
                children.push(decompose_at(&v, &format!("{here}/v"))?);
                children.push(GateTree::CartanFactor { element: z });
                children.push(decompose_at(&w, &format!("{here}/w"))?);
                return Ok(GateTree::Sequence { children });
            }
            for (name, pair) in [("k1", &l1.k1), ("k2", &l1.k2)] {
                let here = format!("{path}/{name}");
                let (v, z, w) = demux(pair, &here)?;
                children.push(decompose_at(&v, &format!("{here}/v"))?);
                children.push(GateTree::CartanFactor { element: z });
                children.push(decompose_at(&w, &format!("{here}/w"))?);
                if name == "k1" {
                    children.push(GateTree::CartanFactor {
                        element: l1.y.clone(),
                    });
                }
            }
            Ok(GateTree::Sequence { children })
        }
    }
}

fn demux(p: &BlockPair, path: &str) -> Result<(UnitaryMatrix, CartanElement, UnitaryMatrix)> {
    let l2 = split_level2(p).map_err(|e| e.context(path))?;
    let z = l2.diagonal_factor(p.phase)?;
    Ok((l2.v, z, l2.w))
}
