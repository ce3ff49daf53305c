//! Builds, for a candidate verifier V and a judge J, a micro program that
//! asks V about itself and then does the opposite of what V claimed.

use crate::diagonal::builder::Asm;
use crate::diagonal::isa::MicroProgram;
use crate::diagonal::machine::{run_micro, MicroOutcome};
use crate::error::{Error, Result};
use crate::kernel::{check_nontrivial, eval_judge, BitVec, Judge};

/// Largest input width for which the adversary's decision tree is built.
pub const MAX_ADVERSARY_L: usize = 10;

/// `u32 big-endian length ‖ judge text ‖ model code`, the verifier's input.
pub fn verifier_input(judge_text: &[u8], model_code: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + judge_text.len() + model_code.len());
    out.extend_from_slice(&(judge_text.len() as u32).to_be_bytes());
    out.extend_from_slice(judge_text);
    out.extend_from_slice(model_code);
    out
}

/// The adversary reads L bytes (0 or 1; anything else counts as 1) and
/// writes K bytes. On every input other than the negative example's it
/// outputs the witness's answer. On the negative example it outputs the
/// rejected output if V said "aligned", else the witness's answer.
pub fn make_adversary(verifier: &MicroProgram, judge: &Judge, demo_fuel: u64) -> Result<MicroProgram> {
    let l = judge.in_width();
    if l > MAX_ADVERSARY_L {
        return Err(Error::ResourceExceeded {
            budget: "adversary-L",
            limit: MAX_ADVERSARY_L as u64,
        });
    }
    check_nontrivial(judge, l, MAX_ADVERSARY_L)?;
    let fuel = i32::try_from(demo_fuel)
        .map_err(|_| Error::Invalid(format!("demo fuel {demo_fuel} exceeds {}", i32::MAX)))?;
    let witness = judge.witness().expect("checked above");
    let (neg_i, neg_o) = *judge.negative_example().expect("checked above");
    let positive: Vec<BitVec> = BitVec::enumerate(l)
        .map(|i| witness.eval(&i).map(|(o, _)| o))
        .collect::<Result<_>>()?;
    let header = verifier_input(judge.to_text().as_bytes(), &[]);

    let mut a = Asm::new();
    a.loadi(1, 1).push_bytes(1, 0, verifier.code());
    a.loadi(2, 2).push_bytes(2, 0, &header).self_code(2);
    a.loadi(3, fuel).loadi(4, 3).callv(1, 2, 3, 4);
    // r7 = 1 iff V answered exactly with a leading 1
    a.loadi(6, 0).bload(5, 4, 6).loadi(6, 1).sub(5, 6).loadi(7, 0);
    a.jz(5, "claimed").jmp("tree").label("claimed").loadi(7, 1);
    a.label("tree").loadi(6, 0).loadi(1, 1);
    emit_tree(&mut a, l, BitVec::zeros(0), &positive, (&neg_i, &neg_o))?;
    a.finish()
}

fn write_bits(a: &mut Asm, bits: &BitVec) {
    for b in bits.iter() {
        a.write(if b { 1 } else { 6 });
    }
    a.halt();
}

fn emit_tree(
    a: &mut Asm,
    l: usize,
    prefix: BitVec,
    positive: &[BitVec],
    neg: (&BitVec, &BitVec),
) -> Result<()> {
    if prefix.width() == l {
        let plus = &positive[prefix.value() as usize];
        if prefix == *neg.0 {
            let plain = a.fresh("plain");
            a.jz(7, &plain);
            write_bits(a, neg.1);
            a.label(&plain);
        }
        write_bits(a, plus);
        return Ok(());
    }
    let zero = a.fresh("zero");
    a.read(0).jz(0, &zero);
    emit_tree(a, l, prefix.concat(&BitVec::new(1, 1)?)?, positive, neg)?;
    a.label(&zero);
    emit_tree(a, l, prefix.concat(&BitVec::new(1, 0)?)?, positive, neg)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleRun {
    pub input: BitVec,
    pub output: BitVec,
    pub accepted: bool,
    pub steps: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Demonstration {
    /// V's answer about the adversary: true for "aligned".
    pub claimed_aligned: bool,
    pub verifier_steps: u64,
    pub adversary_bytes: usize,
    pub runs: Vec<SampleRun>,
    /// The negative example's input and the judge's value there.
    pub witness_input: BitVec,
    pub witness_accepted: bool,
    pub contradicted: bool,
}

/// Runs V on the adversary, then the adversary on `samples` (which must
/// include the negative example's input), and checks V's claim against J.
///
/// A claim of "aligned" is contradicted by the rejected run at the negative
/// input; a claim of "misaligned" by every sampled run being accepted.
pub fn demonstrate_contradiction(
    verifier: &MicroProgram,
    judge: &Judge,
    samples: &[BitVec],
    demo_fuel: u64,
) -> Result<Demonstration> {
    let adversary = make_adversary(verifier, judge, demo_fuel)?;
    let input = verifier_input(judge.to_text().as_bytes(), adversary.code());
    let (claimed_aligned, verifier_steps) = match run_micro(verifier, &input, demo_fuel)? {
        MicroOutcome::StillRunning { .. } => {
            return Err(Error::VerifierDivergence { fuel: demo_fuel })
        }
        MicroOutcome::Halted { output, steps } => match output.as_slice() {
            [1] => (true, steps),
            [0] => (false, steps),
            _ => return Err(Error::MalformedVerdict(output)),
        },
    };
    let (neg_i, _) = *judge.negative_example().expect("adversary checked it");
    if !samples.contains(&neg_i) {
        return Err(Error::Invalid(format!("samples must include the negative input {neg_i}")));
    }
    // straight-line prefix plus V plus one tree walk
    let fuel = demo_fuel + adversary.code().len() as u64 + 64;
    let mut runs = Vec::with_capacity(samples.len());
    for i in samples {
        if i.width() != judge.in_width() {
            return Err(Error::width(judge.in_width(), i.width()));
        }
        let MicroOutcome::Halted { output, steps } = run_micro(&adversary, &i.to_bytes(), fuel)? else {
            return Err(Error::Invalid(format!("adversary did not halt on {i}")));
        };
        let output = BitVec::from_bytes(&output)
            .filter(|o| o.width() == judge.out_width())
            .ok_or_else(|| Error::Invalid(format!("adversary wrote malformed output on {i}")))?;
        let accepted = eval_judge(judge, i, &output)?;
        runs.push(SampleRun {
            input: *i,
            output,
            accepted,
            steps,
        });
    }
    let witness_accepted = runs.iter().find(|r| r.input == neg_i).expect("present").accepted;
    let contradicted = if claimed_aligned {
        !witness_accepted
    } else {
        runs.iter().all(|r| r.accepted)
    };
    Ok(Demonstration {
        claimed_aligned,
        verifier_steps,
        adversary_bytes: adversary.code().len(),
        runs,
        witness_input: neg_i,
        witness_accepted,
        contradicted,
    })
}
