//! Programmatic assembler with symbolic labels.

use std::collections::HashMap;

use crate::diagonal::isa::{Instr, MicroProgram, Reg};
use crate::error::{Error, Result};

#[derive(Debug, Default)]
pub struct Asm {
    code: Vec<u8>,
    labels: HashMap<String, u32>,
    fixups: Vec<(usize, String)>,
    fresh: usize,
    error: Option<Error>,
}

impl Asm {
    pub fn new() -> Asm {
        Asm::default()
    }

    pub fn here(&self) -> u32 {
        self.code.len() as u32
    }

    /// A label name not used before, for generated control flow.
    pub fn fresh(&mut self, prefix: &str) -> String {
        self.fresh += 1;
        format!("{prefix}_{}", self.fresh)
    }

    pub fn label(&mut self, name: &str) -> &mut Asm {
        let here = self.here();
        if self.labels.insert(name.to_string(), here).is_some() && self.error.is_none() {
            self.error = Some(Error::Invalid(format!("label `{name}` defined twice")));
        }
        self
    }

    /// Pins `name` to an absolute byte offset; repeating the same pin is fine.
    pub(crate) fn define_at(&mut self, name: &str, addr: u32) {
        self.labels.insert(name.to_string(), addr);
    }

    pub fn emit(&mut self, instr: Instr) -> &mut Asm {
        instr.encode_into(&mut self.code);
        self
    }

    fn emit_to(&mut self, instr: Instr, label: &str) -> &mut Asm {
        self.emit(instr);
        // the address is always the last four bytes
        self.fixups.push((self.code.len() - 4, label.to_string()));
        self
    }

    pub fn halt(&mut self) -> &mut Asm {
        self.emit(Instr::Halt)
    }

    pub fn loadi(&mut self, r: Reg, imm: i32) -> &mut Asm {
        self.emit(Instr::LoadI(r, imm))
    }

    pub fn mov(&mut self, d: Reg, s: Reg) -> &mut Asm {
        self.emit(Instr::Mov(d, s))
    }

    pub fn add(&mut self, d: Reg, s: Reg) -> &mut Asm {
        self.emit(Instr::Add(d, s))
    }

    pub fn sub(&mut self, d: Reg, s: Reg) -> &mut Asm {
        self.emit(Instr::Sub(d, s))
    }

    pub fn jmp(&mut self, label: &str) -> &mut Asm {
        self.emit_to(Instr::Jmp(0), label)
    }

    pub fn jz(&mut self, r: Reg, label: &str) -> &mut Asm {
        self.emit_to(Instr::Jz(r, 0), label)
    }

    pub fn read(&mut self, r: Reg) -> &mut Asm {
        self.emit(Instr::Read(r))
    }

    pub fn write(&mut self, r: Reg) -> &mut Asm {
        self.emit(Instr::Write(r))
    }

    pub fn self_code(&mut self, rb: Reg) -> &mut Asm {
        self.emit(Instr::SelfCode(rb))
    }

    pub fn callv(&mut self, code: Reg, input: Reg, fuel: Reg, output: Reg) -> &mut Asm {
        self.emit(Instr::CallV { code, input, fuel, output })
    }

    pub fn bpush(&mut self, rb: Reg, r: Reg) -> &mut Asm {
        self.emit(Instr::BPush(rb, r))
    }

    pub fn bload(&mut self, d: Reg, rb: Reg, ri: Reg) -> &mut Asm {
        self.emit(Instr::BLoad(d, rb, ri))
    }

    /// Appends `bytes` to buffer `R[rb]`, using `scratch` for each value.
    pub fn push_bytes(&mut self, rb: Reg, scratch: Reg, bytes: &[u8]) -> &mut Asm {
        for &b in bytes {
            self.loadi(scratch, i32::from(b)).bpush(rb, scratch);
        }
        self
    }

    pub fn finish(mut self) -> Result<MicroProgram> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        for (pos, label) in &self.fixups {
            let addr = self
                .labels
                .get(label)
                .ok_or_else(|| Error::Invalid(format!("undefined label `{label}`")))?;
            self.code[*pos..*pos + 4].copy_from_slice(&addr.to_be_bytes());
        }
        MicroProgram::new(self.code)
    }
}
