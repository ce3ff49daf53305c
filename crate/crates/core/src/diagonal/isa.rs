//! Micro machine instruction set, version 1.
//!
//! Eight registers R0..R7 hold unbounded integers and eight byte buffers
//! B0..B7 are addressed through registers (buffer `R[r] mod 8`). Encoding,
//! one opcode byte followed by operands; register operands are single bytes
//! below 8, immediates and addresses are 32-bit big-endian:
//!
//! ```text
//! 00 HALT
//! 01 LOADI r imm32     R[r] = imm (signed)
//! 02 MOV   rd rs       R[rd] = R[rs]
//! 03 ADD   rd rs       R[rd] += R[rs]
//! 04 SUB   rd rs       R[rd] -= R[rs]
//! 05 JMP   addr32
//! 06 JZ    r addr32    jump if R[r] = 0
//! 07 READ  r           next input byte, or -1 at end of input
//! 08 WRITE r           append R[r] mod 256 to the output
//! 09 SELF  rb          append this program's code to buffer R[rb]
//! 0A CALLV rc ri rf ro run buffer R[rc] as a program on input buffer R[ri]
//!                      with fuel R[rf]; buffer R[ro] receives its output and
//!                      R[rf] its status: steps used if it halted, -1 if it
//!                      ran out of fuel, -2 if it does not decode
//! 0B BPUSH rb r        append R[r] mod 256 to buffer R[rb]
//! 0C BLOAD rd rb ri    R[rd] = byte R[ri] of buffer R[rb], or -1 if out of range
//! ```
//!
//! Jump targets must be instruction boundaries or the end of the code;
//! reaching the end halts. The file format prefixes the code with the magic
//! `DGMP` and the version byte.

use std::fmt;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"DGMP";
pub const ISA_VERSION: u8 = 1;
pub const REGISTERS: usize = 8;

pub type Reg = u8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instr {
    Halt,
    LoadI(Reg, i32),
    Mov(Reg, Reg),
    Add(Reg, Reg),
    Sub(Reg, Reg),
    Jmp(u32),
    Jz(Reg, u32),
    Read(Reg),
    Write(Reg),
    SelfCode(Reg),
    CallV { code: Reg, input: Reg, fuel: Reg, output: Reg },
    BPush(Reg, Reg),
    BLoad(Reg, Reg, Reg),
}

impl Instr {
    pub fn opcode(&self) -> u8 {
        match self {
            Instr::Halt => 0x00,
            Instr::LoadI(..) => 0x01,
            Instr::Mov(..) => 0x02,
            Instr::Add(..) => 0x03,
            Instr::Sub(..) => 0x04,
            Instr::Jmp(_) => 0x05,
            Instr::Jz(..) => 0x06,
            Instr::Read(_) => 0x07,
            Instr::Write(_) => 0x08,
            Instr::SelfCode(_) => 0x09,
            Instr::CallV { .. } => 0x0A,
            Instr::BPush(..) => 0x0B,
            Instr::BLoad(..) => 0x0C,
        }
    }

    pub fn mnemonic(&self) -> &'static str {
        match self {
            Instr::Halt => "halt",
            Instr::LoadI(..) => "loadi",
            Instr::Mov(..) => "mov",
            Instr::Add(..) => "add",
            Instr::Sub(..) => "sub",
            Instr::Jmp(_) => "jmp",
            Instr::Jz(..) => "jz",
            Instr::Read(_) => "read",
            Instr::Write(_) => "write",
            Instr::SelfCode(_) => "self",
            Instr::CallV { .. } => "callv",
            Instr::BPush(..) => "bpush",
            Instr::BLoad(..) => "bload",
        }
    }

    /// Encoded length in bytes.
    pub fn len(&self) -> usize {
        match self {
            Instr::Halt => 1,
            Instr::Read(_) | Instr::Write(_) | Instr::SelfCode(_) => 2,
            Instr::Mov(..) | Instr::Add(..) | Instr::Sub(..) | Instr::BPush(..) => 3,
            Instr::BLoad(..) => 4,
            Instr::Jmp(_) | Instr::CallV { .. } => 5,
            Instr::LoadI(..) | Instr::Jz(..) => 6,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn target(&self) -> Option<u32> {
        match self {
            Instr::Jmp(a) | Instr::Jz(_, a) => Some(*a),
            _ => None,
        }
    }

    pub fn encode_into(&self, out: &mut Vec<u8>) {
        out.push(self.opcode());
        match *self {
            Instr::Halt => {}
            Instr::LoadI(r, imm) => {
                out.push(r);
                out.extend_from_slice(&imm.to_be_bytes());
            }
            Instr::Mov(a, b) | Instr::Add(a, b) | Instr::Sub(a, b) | Instr::BPush(a, b) => {
                out.extend_from_slice(&[a, b]);
            }
            Instr::Jmp(addr) => out.extend_from_slice(&addr.to_be_bytes()),
            Instr::Jz(r, addr) => {
                out.push(r);
                out.extend_from_slice(&addr.to_be_bytes());
            }
            Instr::Read(r) | Instr::Write(r) | Instr::SelfCode(r) => out.push(r),
            Instr::CallV { code, input, fuel, output } => out.extend_from_slice(&[code, input, fuel, output]),
            Instr::BLoad(a, b, c) => out.extend_from_slice(&[a, b, c]),
        }
    }

    fn registers(&self) -> Vec<Reg> {
        match *self {
            Instr::Halt | Instr::Jmp(_) => vec![],
            Instr::LoadI(r, _) | Instr::Jz(r, _) | Instr::Read(r) | Instr::Write(r) | Instr::SelfCode(r) => vec![r],
            Instr::Mov(a, b) | Instr::Add(a, b) | Instr::Sub(a, b) | Instr::BPush(a, b) => vec![a, b],
            Instr::BLoad(a, b, c) => vec![a, b, c],
            Instr::CallV { code, input, fuel, output } => vec![code, input, fuel, output],
        }
    }
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())?;
        match *self {
            Instr::LoadI(r, imm) => write!(f, " r{r} {imm}"),
            Instr::Jmp(a) => write!(f, " {a}"),
            Instr::Jz(r, a) => write!(f, " r{r} {a}"),
            _ => self.registers().iter().try_for_each(|r| write!(f, " r{r}")),
        }
    }
}

fn decode_one(code: &[u8], at: usize) -> Result<Instr> {
    let err = |msg: &str| Error::Decode {
        offset: at,
        msg: msg.to_string(),
    };
    let op = code[at];
    let need = |n: usize| -> Result<&[u8]> {
        code.get(at + 1..at + 1 + n)
            .ok_or_else(|| err("instruction truncated"))
    };
    let u32_at = |b: &[u8]| u32::from_be_bytes([b[0], b[1], b[2], b[3]]);
    let instr = match op {
        0x00 => Instr::Halt,
        0x01 => {
            let b = need(5)?;
            Instr::LoadI(b[0], i32::from_be_bytes([b[1], b[2], b[3], b[4]]))
        }
        0x02 | 0x03 | 0x04 | 0x0B => {
            let b = need(2)?;
            match op {
                0x02 => Instr::Mov(b[0], b[1]),
                0x03 => Instr::Add(b[0], b[1]),
                0x04 => Instr::Sub(b[0], b[1]),
                _ => Instr::BPush(b[0], b[1]),
            }
        }
        0x05 => Instr::Jmp(u32_at(need(4)?)),
        0x06 => {
            let b = need(5)?;
            Instr::Jz(b[0], u32_at(&b[1..]))
        }
        0x07..=0x09 => {
            let r = need(1)?[0];
            match op {
                0x07 => Instr::Read(r),
                0x08 => Instr::Write(r),
                _ => Instr::SelfCode(r),
            }
        }
        0x0A => {
            let b = need(4)?;
            Instr::CallV {
                code: b[0],
                input: b[1],
                fuel: b[2],
                output: b[3],
            }
        }
        0x0C => {
            let b = need(3)?;
            Instr::BLoad(b[0], b[1], b[2])
        }
        other => return Err(err(&format!("unknown opcode {other:#04x}"))),
    };
    if instr.registers().iter().any(|&r| r as usize >= REGISTERS) {
        return Err(err("register operand out of range"));
    }
    Ok(instr)
}

/// Decodes a whole instruction stream, returning (offset, instruction)
/// pairs, and checks that every jump lands on an instruction boundary or
/// the end of the code.
pub fn decode(code: &[u8]) -> Result<Vec<(usize, Instr)>> {
    let mut out = Vec::new();
    let mut at = 0;
    while at < code.len() {
        let instr = decode_one(code, at)?;
        out.push((at, instr));
        at += instr.len();
    }
    for (offset, instr) in &out {
        if let Some(t) = instr.target() {
            let t = t as usize;
            let ok = t == code.len() || out.binary_search_by_key(&t, |(o, _)| *o).is_ok();
            if !ok {
                return Err(Error::Decode {
                    offset: *offset,
                    msg: format!("jump target {t} is not an instruction boundary"),
                });
            }
        }
    }
    Ok(out)
}

pub fn encode(instrs: &[Instr]) -> Vec<u8> {
    let mut out = Vec::new();
    for i in instrs {
        i.encode_into(&mut out);
    }
    out
}

/// A decodable instruction stream.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MicroProgram {
    code: Vec<u8>,
}

impl MicroProgram {
    pub fn new(code: Vec<u8>) -> Result<MicroProgram> {
        decode(&code)?;
        Ok(MicroProgram { code })
    }

    pub fn from_instrs(instrs: &[Instr]) -> Result<MicroProgram> {
        MicroProgram::new(encode(instrs))
    }

    pub fn code(&self) -> &[u8] {
        &self.code
    }

    pub fn instrs(&self) -> Vec<(usize, Instr)> {
        decode(&self.code).expect("validated on construction")
    }

    /// Magic, version byte, code.
    pub fn to_file_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.code.len() + 5);
        out.extend_from_slice(MAGIC);
        out.push(ISA_VERSION);
        out.extend_from_slice(&self.code);
        out
    }

    pub fn from_file_bytes(bytes: &[u8]) -> Result<MicroProgram> {
        if bytes.len() < 5 || &bytes[..4] != MAGIC {
            return Err(Error::Decode {
                offset: 0,
                msg: "missing DGMP magic".into(),
            });
        }
        if bytes[4] != ISA_VERSION {
            return Err(Error::Decode {
                offset: 4,
                msg: format!("unsupported ISA version {}", bytes[4]),
            });
        }
        MicroProgram::new(bytes[5..].to_vec()).map_err(|e| match e {
            Error::Decode { offset, msg } => Error::Decode {
                offset: offset + 5,
                msg,
            },
            other => other,
        })
    }
}

impl fmt::Debug for MicroProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MicroProgram({} bytes)", self.code.len())
    }
}
