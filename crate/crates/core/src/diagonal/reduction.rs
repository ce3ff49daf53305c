//! Halting reduction: M′ first simulates m on i with growing fuel, then
//! behaves as the positive witness p_pos. If m halts on i, M′ computes what
//! p_pos computes; otherwise M′ never halts.

use crate::diagonal::builder::Asm;
use crate::diagonal::isa::MicroProgram;
use crate::diagonal::machine::run_micro;
use crate::error::Result;

/// Emits a CALLV of `R[code]` on `R[input]` into `R[out]`, doubling the
/// fuel in r5 after each exhausted attempt. A decode error spins forever.
fn escalate(a: &mut Asm, code: u8, input: u8, out: u8) {
    let retry = a.fresh("retry");
    let more = a.fresh("more");
    let done = a.fresh("done");
    a.loadi(5, 1).label(&retry).mov(3, 5).callv(code, input, 3, out);
    a.mov(0, 3).add(0, 6).jz(0, &more);
    a.mov(0, 3).add(0, 6).add(0, 6).jz(0, "stuck");
    a.jmp(&done);
    a.label(&more).add(5, 5).jmp(&retry);
    a.label(&done);
}

pub fn build_halting_reduction(m: &MicroProgram, i: &[u8], p_pos: &MicroProgram) -> Result<MicroProgram> {
    let mut a = Asm::new();
    a.loadi(6, 1);
    a.loadi(1, 1).push_bytes(1, 0, m.code());
    a.loadi(2, 2).push_bytes(2, 0, i);
    a.loadi(4, 3);
    escalate(&mut a, 1, 2, 4);
    // m halted: read x into B4 and hand it to p_pos
    a.loadi(2, 4);
    a.label("read").read(0).mov(7, 0).add(7, 6).jz(7, "read_done");
    a.bpush(2, 0).jmp("read").label("read_done");
    a.loadi(1, 5).push_bytes(1, 0, p_pos.code());
    a.loadi(4, 6);
    escalate(&mut a, 1, 2, 4);
    a.loadi(7, 0);
    a.label("copy").bload(0, 4, 7).mov(3, 0).add(3, 6).jz(3, "end");
    a.write(0).add(7, 6).jmp("copy");
    a.label("end").halt();
    a.label("stuck").jmp("stuck");
    a.finish()
}

/// Least fuel at which `p` halts on `input`, found by bisection over
/// `1..=max_fuel`; `None` if it is still running at `max_fuel`.
pub fn minimal_fuel(p: &MicroProgram, input: &[u8], max_fuel: u64) -> Result<Option<u64>> {
    if !run_micro(p, input, max_fuel)?.is_halted() {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0u64, max_fuel);
    // invariant: halts at hi, not at lo (fuel 0 never runs)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if run_micro(p, input, mid)?.is_halted() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionSample {
    pub input: Vec<u8>,
    /// M′'s output at the largest fuel tried, if it halted.
    pub output: Option<Vec<u8>>,
    pub expected: Option<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionReport {
    /// Steps m takes on i, if it halts within the largest fuel.
    pub machine_steps: Option<u64>,
    /// Least fuel at which M′ answers on the first sample.
    pub minimal_fuel: Option<u64>,
    pub samples: Vec<ReductionSample>,
    /// Fuel levels tried and whether M′ halted on every sample at each.
    pub sweep: Vec<(u64, bool)>,
    /// Whether M′ agreed with p_pos wherever both halted.
    pub agrees: bool,
    pub reduction_bytes: usize,
}

impl ReductionReport {
    /// Non-halting is only ever observed up to the largest fuel.
    pub fn evidence(&self) -> &'static str {
        match self.machine_steps {
            Some(_) => "halts",
            None => "no-halt-within-fuel",
        }
    }
}

/// Builds M′ and runs it over a fuel sweep of powers of ten up to
/// `max_fuel` on each sample.
pub fn demonstrate_reduction(
    m: &MicroProgram,
    i: &[u8],
    p_pos: &MicroProgram,
    samples: &[Vec<u8>],
    max_fuel: u64,
) -> Result<ReductionReport> {
    let reduced = build_halting_reduction(m, i, p_pos)?;
    let machine_steps = run_micro(m, i, max_fuel)?.steps();
    let mut fuels: Vec<u64> = std::iter::successors(Some(10u64), |f| f.checked_mul(10))
        .take_while(|&f| f < max_fuel)
        .collect();
    fuels.push(max_fuel);
    let mut sweep = Vec::with_capacity(fuels.len());
    for &f in &fuels {
        let mut all = true;
        for x in samples {
            all &= run_micro(&reduced, x, f)?.is_halted();
        }
        sweep.push((f, all));
    }
    let mut out = Vec::with_capacity(samples.len());
    let mut agrees = true;
    for x in samples {
        let output = run_micro(&reduced, x, max_fuel)?.output().map(<[u8]>::to_vec);
        let expected = run_micro(p_pos, x, max_fuel)?.output().map(<[u8]>::to_vec);
        if let (Some(o), Some(e)) = (&output, &expected) {
            agrees &= o == e;
        }
        if machine_steps.is_none() {
            agrees &= output.is_none();
        }
        out.push(ReductionSample {
            input: x.clone(),
            output,
            expected,
        });
    }
    let minimal_fuel = match samples.first() {
        Some(x) if machine_steps.is_some() => minimal_fuel(&reduced, x, max_fuel)?,
        _ => None,
    };
    Ok(ReductionReport {
        machine_steps,
        minimal_fuel,
        samples: out,
        sweep,
        agrees,
        reduction_bytes: reduced.code().len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagonal::zoo;

    fn echo() -> MicroProgram {
        let mut a = Asm::new();
        a.loadi(1, 1);
        a.label("l").read(0).mov(2, 0).add(2, 1).jz(2, "e").write(0).jmp("l");
        a.label("e").halt();
        a.finish().unwrap()
    }

    /// Counts r0 down from n, then halts: 3n + 4 steps.
    fn countdown(n: i32) -> MicroProgram {
        let mut a = Asm::new();
        a.loadi(0, n).loadi(1, 1);
        a.label("top").jz(0, "out").sub(0, 1).jmp("top");
        a.label("out").halt();
        a.finish().unwrap()
    }

    fn samples() -> Vec<Vec<u8>> {
        vec![vec![], vec![1, 0, 1], vec![7; 5]]
    }

    #[test]
    fn halting_machine_reduces_to_p_pos() {
        let r = demonstrate_reduction(&countdown(3), b"", &echo(), &samples(), 1_000_000).unwrap();
        assert_eq!(r.machine_steps, Some(13));
        assert!(r.agrees);
        assert_eq!(r.evidence(), "halts");
        for s in &r.samples {
            assert_eq!(s.output.as_deref(), Some(s.input.as_slice()));
        }
        let least = r.minimal_fuel.unwrap();
        assert!(least > 13);
        // one below the least fuel it does not answer
        let reduced = build_halting_reduction(&countdown(3), b"", &echo()).unwrap();
        assert!(!run_micro(&reduced, &[], least - 1).unwrap().is_halted());
        assert!(run_micro(&reduced, &[], least).unwrap().is_halted());
    }

    #[test]
    fn looping_machine_never_answers_in_the_sweep() {
        let r = demonstrate_reduction(&zoo::diverging(), b"", &echo(), &samples(), 1_000_000).unwrap();
        assert_eq!(r.machine_steps, None);
        assert_eq!(r.evidence(), "no-halt-within-fuel");
        assert_eq!(r.sweep.len(), 6);
        assert!(r.sweep.iter().all(|&(_, halted)| !halted));
        assert!(r.samples.iter().all(|s| s.output.is_none()));
        assert!(r.agrees);
    }

    #[test]
    fn minimal_fuel_matches_step_count() {
        for n in [0, 1, 5, 40] {
            let p = countdown(n);
            let steps = run_micro(&p, &[], 10_000).unwrap().steps().unwrap();
            assert_eq!(steps, 3 * n as u64 + 4);
            assert_eq!(minimal_fuel(&p, &[], 10_000).unwrap(), Some(steps));
        }
        assert_eq!(minimal_fuel(&zoo::diverging(), &[], 1000).unwrap(), None);
    }
}
