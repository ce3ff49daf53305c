//! Shared instances for integration and acceptance tests.
#![allow(dead_code)]

use dgkit::diagonal::{Asm, Instr, MicroProgram};
use dgkit::ir::{build, Affine, Node};
use dgkit::kernel::LinearAtom;
use dgkit::{BitVec, Judge, LinearFormula, Rat};

fn pattern_input(l: usize) -> BitVec {
    // 1011 0010 1011 … truncated to l bits
    let bits: Vec<bool> = (0..l).map(|k| (0xB2B2_B2B2u64 >> (31 - k % 32)) & 1 == 1).collect();
    BitVec::from_bits(&bits).unwrap()
}

fn flipped(b: &BitVec) -> BitVec {
    BitVec::new(b.width(), !b.value() & ((1u64 << b.width()) - 1)).unwrap()
}

/// o = i.
pub fn echo(l: usize) -> Judge {
    let neg = pattern_input(l);
    Judge::predicate("echo", l, l, build::halves_equal(l), build::identity(l), (neg, flipped(&neg))).unwrap()
}

/// o = parity of i.
pub fn parity(l: usize) -> Judge {
    let all: Vec<usize> = (0..=l).collect();
    let body = build::parity(l + 1, &all, true);
    let witness = build::parity(l, &all[..l], false);
    let neg = pattern_input(l);
    let wrong = BitVec::new(1, (neg.value().count_ones() as u64 + 1) % 2).unwrap();
    Judge::predicate("parity", l, 1, body, witness, (neg, wrong)).unwrap()
}

/// o = complement of the last input bit.
pub fn last_flip(l: usize) -> Judge {
    let body = build::parity(l + 1, &[l - 1, l], false);
    let mut row = vec![Rat::ZERO; l];
    row[l - 1] = Rat::int(-1);
    let witness = Node::seq([
        Node::Decode(l),
        Node::Affine(Affine::new(vec![row], vec![Rat::ONE]).unwrap()),
        Node::Encode(1),
    ]);
    let neg = BitVec::new(l, 1).unwrap();
    Judge::predicate("last_flip", l, 1, body, witness, (neg, BitVec::new(1, 1).unwrap())).unwrap()
}

/// Σo − Σi ≥ 0 with as many outputs as inputs.
pub fn dominates(l: usize) -> Judge {
    let mut coefs = vec![Rat::int(-1); l];
    coefs.extend(vec![Rat::ONE; l]);
    let f = LinearFormula::Atom(LinearAtom::new(Rat::ZERO, coefs));
    let ones = BitVec::new(l, (1u64 << l) - 1).unwrap();
    let witness = build::constant(l, &ones);
    Judge::linear("dominates", l, l, f, Some(witness), Some((ones, BitVec::zeros(l)))).unwrap()
}

/// x1 ≥ 1 or o1 + o2 ≥ 1, two outputs.
pub fn guarded_pair(l: usize) -> Judge {
    let src = format!("x1 - 1 >= 0 | x{} + x{} - 1 >= 0", l + 1, l + 2);
    let f = LinearFormula::parse(&src, l + 2).unwrap();
    let witness = build::constant(l, &BitVec::new(2, 3).unwrap());
    Judge::linear("guarded_pair", l, 2, f, Some(witness), Some((BitVec::zeros(l), BitVec::zeros(2)))).unwrap()
}

/// Five distinct non-trivial judges on `l` input bits.
pub fn judge_suite(l: usize) -> Vec<Judge> {
    vec![echo(l), parity(l), last_flip(l), dominates(l), guarded_pair(l)]
}

/// Runs `instrs`, then writes every byte of buffer 7.
pub fn with_dump(instrs: &[Instr]) -> MicroProgram {
    let mut a = Asm::new();
    for ins in instrs {
        a.emit(*ins);
    }
    a.loadi(5, 0).label("next").bload(3, 6, 5).mov(2, 3).add(2, 4).jz(2, "end");
    a.write(3).add(5, 4).jmp("next").label("end").halt();
    a.finish().unwrap()
}
