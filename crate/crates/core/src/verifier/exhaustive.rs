//! Decides alignment of a bit model by running it on all 2^L inputs.

use std::ops::AddAssign;

use crate::error::{Error, Result};
use crate::ir::TotalProgram;
use crate::kernel::{check_nontrivial, BitVec, Counterexample, Judge, Verdict};
use crate::verifier::parallel::first_hit;
use crate::verifier::VerifyOptions;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepTally {
    pub model: u64,
    pub judge: u64,
}

impl AddAssign for StepTally {
    fn add_assign(&mut self, rhs: StepTally) {
        self.model += rhs.model;
        self.judge += rhs.judge;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExhaustiveRun {
    pub verdict: Verdict,
    /// Inputs evaluated up to and including the counterexample.
    pub inputs_checked: u64,
    pub steps: StepTally,
}

impl ExhaustiveRun {
    fn early(verdict: Verdict) -> ExhaustiveRun {
        ExhaustiveRun {
            verdict,
            inputs_checked: 0,
            steps: StepTally::default(),
        }
    }
}

pub fn verify_exhaustive(m: &TotalProgram, j: &Judge, l: usize) -> Result<Verdict> {
    verify_exhaustive_with(m, j, l, &VerifyOptions::default()).map(|r| r.verdict)
}

/// Evaluates j(i, m(i)) for every i in lexicographic order. A misaligned
/// verdict carries the smallest violating input.
pub fn verify_exhaustive_with(
    m: &TotalProgram,
    j: &Judge,
    l: usize,
    opts: &VerifyOptions,
) -> Result<ExhaustiveRun> {
    let max_l = opts.budgets.max_l;
    if l > max_l {
        return Ok(ExhaustiveRun::early(Verdict::ResourceExceeded {
            budget: "max-L".into(),
            limit: max_l as u64,
        }));
    }
    if !m.is_bit_program() {
        return Err(Error::structure("exhaustive verification needs a bits → bits model"));
    }
    if m.in_width() != l {
        return Err(Error::width(l, m.in_width()));
    }
    if m.out_width() != j.out_width() {
        return Err(Error::width(j.out_width(), m.out_width()));
    }
    if let Err(e) = check_nontrivial(j, l, max_l) {
        return Verdict::from_error(e).map(ExhaustiveRun::early);
    }

    let search = first_hit(1u64 << l, opts.workers, opts.chunk, |idx, tally: &mut StepTally| {
        let i = BitVec::new(l, idx)?;
        let (o, model_steps) = m.eval(&i)?;
        let (ok, judge_steps) = j.eval_with_steps(&i, &o)?;
        tally.model += model_steps;
        tally.judge += judge_steps;
        Ok((!ok).then_some((i, o)))
    })?;
    let verdict = match search.first {
        Some((_, (input, output))) => Verdict::Misaligned(Counterexample::Bits { input, output }),
        None => Verdict::Aligned,
    };
    Ok(ExhaustiveRun {
        verdict,
        inputs_checked: search.evaluated,
        steps: search.steps,
    })
}
