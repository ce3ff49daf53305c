//! Value types and the judge formalism.

pub mod bitvec;
pub mod judge;
pub mod linear;
pub mod rat;
pub mod verdict;

pub use bitvec::BitVec;
pub use judge::{check_nontrivial, eval_judge, Judge, JudgeBody, JudgeKind};
pub use linear::{LinearAtom, LinearFormula};
pub use rat::Rat;
pub use verdict::{Counterexample, Verdict};
