//! Fixed benchmark inputs.

use spinchain::linalg::haar_special;
use spinchain::UnitaryMatrix;

/// `count` Haar special-unitary targets on `n` qubits, seeded from `seed`.
pub fn targets(n: usize, count: usize, seed: u64) -> Vec<UnitaryMatrix> {
    (0..count as u64)
        .map(|i| haar_special(1 << n, seed.wrapping_add(i)))
        .collect()
}
