//! Recursive Cartan factorization: Euler angles for one qubit, the canonical
//! two-qubit form, and the two block splits that drive the recursion.

pub mod euler;
pub mod split;
pub mod su4;
pub mod tree;

pub use euler::{euler_su2, EulerAngles};
pub use split::{split_level1, split_level2, BlockPair, Level1, Level2};
pub use su4::{canonical_unitary, kak_su4, KakSu4};
pub use tree::{budget, decompose, GateTree};
