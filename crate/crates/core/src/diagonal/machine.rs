//! Fuel-metered interpreter for micro programs.
//!
//! Every executed instruction costs one step; CALLV additionally charges the
//! callee's steps to the caller. A callee may use at most the smaller of its
//! fuel register and the caller's remaining fuel. When it runs dry on its own
//! fuel the caller sees status -1 and continues; when it runs dry on the
//! caller's fuel the caller has run dry as well. Nested calls live on an
//! explicit frame stack.

use std::rc::Rc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::diagonal::isa::{decode, Instr, MicroProgram, REGISTERS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MicroOutcome {
    Halted { output: Vec<u8>, steps: u64 },
    StillRunning { fuel: u64 },
}

impl MicroOutcome {
    pub fn is_halted(&self) -> bool {
        matches!(self, MicroOutcome::Halted { .. })
    }

    pub fn output(&self) -> Option<&[u8]> {
        match self {
            MicroOutcome::Halted { output, .. } => Some(output),
            MicroOutcome::StillRunning { .. } => None,
        }
    }

    pub fn steps(&self) -> Option<u64> {
        match self {
            MicroOutcome::Halted { steps, .. } => Some(*steps),
            MicroOutcome::StillRunning { .. } => None,
        }
    }
}

struct Decoded {
    code: Vec<u8>,
    instrs: Vec<Instr>,
    /// Byte offset → instruction index; `usize::MAX` off boundaries.
    index: Vec<usize>,
}

impl Decoded {
    fn new(code: Vec<u8>) -> Result<Decoded> {
        let pairs = decode(&code)?;
        let mut index = vec![usize::MAX; code.len() + 1];
        index[code.len()] = pairs.len();
        for (k, (offset, _)) in pairs.iter().enumerate() {
            index[*offset] = k;
        }
        Ok(Decoded {
            code,
            instrs: pairs.into_iter().map(|(_, i)| i).collect(),
            index,
        })
    }

    fn jump(&self, addr: u32) -> usize {
        self.index[addr as usize]
    }
}

struct Frame {
    prog: Rc<Decoded>,
    pc: usize,
    regs: [BigInt; REGISTERS],
    bufs: [Vec<u8>; REGISTERS],
    input: Vec<u8>,
    in_pos: usize,
    output: Vec<u8>,
    used: u64,
    limit: u64,
    bounded_by_caller: bool,
    /// Caller's status register and output buffer.
    ret: (usize, usize),
}

impl Frame {
    fn new(prog: Rc<Decoded>, input: Vec<u8>, limit: u64, bounded_by_caller: bool, ret: (usize, usize)) -> Frame {
        Frame {
            prog,
            pc: 0,
            regs: Default::default(),
            bufs: Default::default(),
            input,
            in_pos: 0,
            output: Vec::new(),
            used: 0,
            limit,
            bounded_by_caller,
            ret,
        }
    }

    fn buffer_index(&self, r: u8) -> usize {
        self.regs[r as usize]
            .mod_floor(&BigInt::from(REGISTERS))
            .to_usize()
            .expect("residue is small")
    }

    fn byte(&self, r: u8) -> u8 {
        self.regs[r as usize]
            .mod_floor(&BigInt::from(256))
            .to_u8()
            .expect("residue is a byte")
    }
}

pub fn run_micro(p: &MicroProgram, input: &[u8], fuel: u64) -> Result<MicroOutcome> {
    run_code(p.code(), input, fuel)
}

/// Like `run_micro` for raw, not yet validated code.
pub fn run_code(code: &[u8], input: &[u8], fuel: u64) -> Result<MicroOutcome> {
    if fuel == 0 {
        return Err(Error::Invalid("fuel must be at least 1".into()));
    }
    let root = Rc::new(Decoded::new(code.to_vec())?);
    let mut stack = vec![Frame::new(root, input.to_vec(), fuel, false, (0, 0))];

    loop {
        let f = stack.last_mut().expect("stack is never empty here");
        if f.pc == f.prog.instrs.len() {
            if let Some(done) = finish(&mut stack) {
                return Ok(done);
            }
            continue;
        }
        if f.used >= f.limit {
            if let Some(done) = exhaust(&mut stack) {
                return Ok(done);
            }
            continue;
        }
        f.used += 1;
        let instr = f.prog.instrs[f.pc];
        f.pc += 1;
        match instr {
            Instr::Halt => {
                if let Some(done) = finish(&mut stack) {
                    return Ok(done);
                }
            }
            Instr::LoadI(r, imm) => f.regs[r as usize] = BigInt::from(imm),
            Instr::Mov(d, s) => f.regs[d as usize] = f.regs[s as usize].clone(),
            Instr::Add(d, s) => {
                let v = f.regs[s as usize].clone();
                f.regs[d as usize] += v;
            }
            Instr::Sub(d, s) => {
                let v = f.regs[s as usize].clone();
                f.regs[d as usize] -= v;
            }
            Instr::Jmp(a) => f.pc = f.prog.jump(a),
            Instr::Jz(r, a) => {
                if f.regs[r as usize].is_zero() {
                    f.pc = f.prog.jump(a);
                }
            }
            Instr::Read(r) => {
                let v = match f.input.get(f.in_pos) {
                    Some(&b) => {
                        f.in_pos += 1;
                        i64::from(b)
                    }
                    None => -1,
                };
                f.regs[r as usize] = BigInt::from(v);
            }
            Instr::Write(r) => {
                let b = f.byte(r);
                f.output.push(b);
            }
            Instr::SelfCode(rb) => {
                let idx = f.buffer_index(rb);
                let prog = Rc::clone(&f.prog);
                f.bufs[idx].extend_from_slice(&prog.code);
            }
            Instr::BPush(rb, r) => {
                let idx = f.buffer_index(rb);
                let b = f.byte(r);
                f.bufs[idx].push(b);
            }
            Instr::BLoad(d, rb, ri) => {
                let buf = &f.bufs[f.buffer_index(rb)];
                let v = f.regs[ri as usize]
                    .to_usize()
                    .and_then(|k| buf.get(k))
                    .map_or(-1, |&b| i64::from(b));
                f.regs[d as usize] = BigInt::from(v);
            }
            Instr::CallV { code, input, fuel, output } => {
                let out_idx = f.buffer_index(output);
                let callee = match Decoded::new(f.bufs[f.buffer_index(code)].clone()) {
                    Ok(d) => Rc::new(d),
                    Err(_) => {
                        f.regs[fuel as usize] = BigInt::from(-2);
                        f.bufs[out_idx].clear();
                        continue;
                    }
                };
                let requested = if f.regs[fuel as usize].sign() == num_bigint::Sign::Minus {
                    0
                } else {
                    f.regs[fuel as usize].to_u64().unwrap_or(u64::MAX)
                };
                let remaining = f.limit - f.used;
                let child_input = f.bufs[f.buffer_index(input)].clone();
                let frame = Frame::new(
                    callee,
                    child_input,
                    requested.min(remaining),
                    remaining < requested,
                    (fuel as usize, out_idx),
                );
                stack.push(frame);
            }
        }
    }
}

/// Pops a halted frame. Returns the outcome when it was the outermost one.
fn finish(stack: &mut Vec<Frame>) -> Option<MicroOutcome> {
    let done = stack.pop().expect("frame to finish");
    match stack.last_mut() {
        None => Some(MicroOutcome::Halted {
            output: done.output,
            steps: done.used,
        }),
        Some(caller) => {
            caller.used += done.used;
            let (status, out) = done.ret;
            caller.regs[status] = BigInt::from(done.used);
            caller.bufs[out] = done.output;
            None
        }
    }
}

/// Pops a frame that ran out of fuel, together with every caller whose fuel
/// it was spending.
fn exhaust(stack: &mut Vec<Frame>) -> Option<MicroOutcome> {
    loop {
        let dry = stack.pop().expect("frame to exhaust");
        match stack.last_mut() {
            None => return Some(MicroOutcome::StillRunning { fuel: dry.limit }),
            Some(caller) => {
                caller.used += dry.used;
                if dry.bounded_by_caller {
                    continue;
                }
                let (status, out) = dry.ret;
                caller.regs[status] = BigInt::from(-1);
                caller.bufs[out].clear();
                return None;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagonal::builder::Asm;
    use crate::diagonal::isa::encode;

    fn prog(instrs: &[Instr]) -> MicroProgram {
        MicroProgram::from_instrs(instrs).unwrap()
    }

    #[test]
    fn halt_costs_one_step() {
        let out = run_micro(&prog(&[Instr::Halt]), b"anything", 5).unwrap();
        assert_eq!(out, MicroOutcome::Halted { output: vec![], steps: 1 });
        // falling off the end is free
        assert_eq!(
            run_code(&[], b"", 1).unwrap(),
            MicroOutcome::Halted { output: vec![], steps: 0 }
        );
    }

    #[test]
    fn self_loop_never_halts() {
        let out = run_micro(&prog(&[Instr::Jmp(0)]), b"", 1000).unwrap();
        assert_eq!(out, MicroOutcome::StillRunning { fuel: 1000 });
        assert!(run_micro(&prog(&[Instr::Jmp(0)]), b"", 0).is_err());
    }

    #[test]
    fn echo_plus_one() {
        let mut a = Asm::new();
        a.loadi(1, 1).label("loop").read(0).mov(2, 0).add(2, 1).jz(2, "end");
        a.add(0, 1).write(0).jmp("loop").label("end");
        let out = run_micro(&a.finish().unwrap(), &[0, 41, 255], 1000).unwrap();
        // 1 + 3·7 + 4 steps; falling off the end is free
        assert_eq!(out, MicroOutcome::Halted { output: vec![1, 42, 0], steps: 26 });
    }

    #[test]
    fn self_yields_own_code() {
        let mut a = Asm::new();
        a.loadi(0, 3).self_code(0).loadi(1, 0).loadi(2, 1);
        a.label("loop").bload(3, 0, 1).mov(4, 3).add(4, 2).jz(4, "end");
        a.write(3).add(1, 2).jmp("loop").label("end");
        let p = a.finish().unwrap();
        let out = run_micro(&p, b"", 100_000).unwrap();
        assert_eq!(out.output(), Some(p.code()));
    }

    /// Caller: B1 = callee code, call it with `fuel`, write the status and
    /// the callee's output.
    fn caller(callee: &[u8], fuel: i32) -> MicroProgram {
        let mut a = Asm::new();
        a.loadi(0, 1).push_bytes(0, 7, callee);
        a.loadi(1, 2).loadi(2, fuel).loadi(3, 3);
        a.callv(0, 1, 2, 3).write(2);
        a.loadi(4, 0).loadi(5, 1).label("copy").bload(6, 3, 4).mov(7, 6).add(7, 5).jz(7, "end");
        a.write(6).add(4, 5).jmp("copy").label("end").halt();
        a.finish().unwrap()
    }

    fn emit_then_halt() -> Vec<u8> {
        let mut a = Asm::new();
        a.loadi(0, 9).write(0).halt();
        a.finish().unwrap().code().to_vec()
    }

    #[test]
    fn callv_statuses() {
        let ok = run_micro(&caller(&emit_then_halt(), 10), b"", 10_000).unwrap();
        assert_eq!(ok.output(), Some(&[3u8, 9][..]));
        // own fuel too small: status -1 (255), caller carries on
        let dry = run_micro(&caller(&emit_then_halt(), 2), b"", 10_000).unwrap();
        assert_eq!(dry.output(), Some(&[255u8][..]));
        // undecodable callee: status -2
        let bad = run_micro(&caller(&[0xEE], 10), b"", 10_000).unwrap();
        assert_eq!(bad.output(), Some(&[254u8][..]));
    }

    #[test]
    fn callee_spending_caller_fuel_stops_everything() {
        let looping = encode(&[Instr::Jmp(0)]);
        let p = caller(&looping, 1_000_000);
        assert_eq!(run_micro(&p, b"", 500).unwrap(), MicroOutcome::StillRunning { fuel: 500 });
        // with its own small budget the loop is cut off and reported
        let q = caller(&looping, 100);
        let out = run_micro(&q, b"", 10_000).unwrap();
        assert_eq!(out.output(), Some(&[255u8][..]));
    }

    #[test]
    fn halted_runs_are_stable_under_more_fuel() {
        let p = caller(&emit_then_halt(), 10);
        let first = run_micro(&p, b"", 10_000).unwrap();
        let steps = first.steps().unwrap();
        assert!(!run_micro(&p, b"", steps - 1).unwrap().is_halted());
        for fuel in [steps, steps + 1, 2 * steps, 1 << 40] {
            assert_eq!(run_micro(&p, b"", fuel).unwrap(), first);
        }
    }
}
