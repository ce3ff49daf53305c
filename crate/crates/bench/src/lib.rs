//! Instances shared by the benchmarks.

use dgkit::diagonal::{Asm, MicroProgram};
use dgkit::ir::build;
use dgkit::{BitVec, Judge, TotalProgram};

/// o = parity of i, with a model that computes it.
pub fn parity_instance(l: usize) -> (TotalProgram, Judge) {
    let all: Vec<usize> = (0..=l).collect();
    let body = build::parity(l + 1, &all, true);
    let witness = build::parity(l, &all[..l], false);
    let neg = (BitVec::zeros(l), BitVec::new(1, 1).expect("one bit"));
    let judge = Judge::predicate("parity", l, 1, body, witness.clone(), neg).expect("parity judge");
    let model = TotalProgram::bits(witness, l, 1).expect("parity model");
    (model, judge)
}

/// Counts r0 up to `n`, then halts.
pub fn counter(n: i32) -> MicroProgram {
    let mut a = Asm::new();
    a.loadi(0, 0).loadi(1, 1).loadi(2, n);
    a.label("top").mov(3, 2).sub(3, 0).jz(3, "done").add(0, 1).jmp("top");
    a.label("done").write(0).halt();
    a.finish().expect("labels resolve")
}
