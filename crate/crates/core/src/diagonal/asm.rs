//! Text assembly: one instruction per line, `name:` labels, `;` comments.
//!
//! ```text
//! start:
//!   loadi r0 3        ; immediates are signed 32-bit
//!   jz r0 done        ; targets are labels or byte offsets
//!   jmp start
//! done:
//!   halt
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::diagonal::builder::Asm;
use crate::diagonal::isa::{Instr, MicroProgram, Reg, REGISTERS};
use crate::error::{Error, Result};

fn reg(tok: &str, line: usize) -> Result<Reg> {
    tok.strip_prefix('r')
        .and_then(|n| n.parse::<u8>().ok())
        .filter(|&n| (n as usize) < REGISTERS)
        .ok_or_else(|| Error::parse(line, format!("expected a register r0..r7, found `{tok}`")))
}

pub fn assemble(src: &str) -> Result<MicroProgram> {
    let mut a = Asm::new();
    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        let mut text = raw.split(';').next().unwrap_or("").trim();
        while let Some((name, rest)) = text.split_once(':') {
            let name = name.trim();
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(Error::parse(line, format!("invalid label `{name}`")));
            }
            a.label(name);
            text = rest.trim();
        }
        if text.is_empty() {
            continue;
        }
        let toks: Vec<&str> = text.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).collect();
        let args = &toks[1..];
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(Error::parse(line, format!("`{}` takes {n} operands", toks[0])))
            }
        };
        // numeric targets become labels pinned to that byte offset
        let target = |t: &str, a: &mut Asm| -> String {
            match t.parse::<u32>() {
                Ok(addr) => {
                    let name = format!("@{addr}");
                    a.define_at(&name, addr);
                    name
                }
                Err(_) => t.to_string(),
            }
        };
        match toks[0].to_ascii_lowercase().as_str() {
            "halt" => {
                arity(0)?;
                a.halt();
            }
            "loadi" => {
                arity(2)?;
                let imm = args[1]
                    .parse::<i32>()
                    .map_err(|_| Error::parse(line, format!("invalid immediate `{}`", args[1])))?;
                a.loadi(reg(args[0], line)?, imm);
            }
            op @ ("mov" | "add" | "sub" | "bpush") => {
                arity(2)?;
                let (x, y) = (reg(args[0], line)?, reg(args[1], line)?);
                match op {
                    "mov" => a.mov(x, y),
                    "add" => a.add(x, y),
                    "sub" => a.sub(x, y),
                    _ => a.bpush(x, y),
                };
            }
            "jmp" => {
                arity(1)?;
                let t = target(args[0], &mut a);
                a.jmp(&t);
            }
            "jz" => {
                arity(2)?;
                let r = reg(args[0], line)?;
                let t = target(args[1], &mut a);
                a.jz(r, &t);
            }
            op @ ("read" | "write" | "self") => {
                arity(1)?;
                let r = reg(args[0], line)?;
                match op {
                    "read" => a.read(r),
                    "write" => a.write(r),
                    _ => a.self_code(r),
                };
            }
            "callv" => {
                arity(4)?;
                a.callv(reg(args[0], line)?, reg(args[1], line)?, reg(args[2], line)?, reg(args[3], line)?);
            }
            "bload" => {
                arity(3)?;
                a.bload(reg(args[0], line)?, reg(args[1], line)?, reg(args[2], line)?);
            }
            other => return Err(Error::parse(line, format!("unknown mnemonic `{other}`"))),
        }
    }
    a.finish()
}

/// Prints assembly that re-assembles to the identical byte code.
pub fn disassemble(p: &MicroProgram) -> String {
    let instrs = p.instrs();
    let targets: BTreeSet<u32> = instrs.iter().filter_map(|(_, i)| i.target()).collect();
    let mut out = String::new();
    for (offset, instr) in &instrs {
        if targets.contains(&(*offset as u32)) {
            let _ = writeln!(out, "L{offset}:");
        }
        let _ = match instr {
            Instr::Jmp(t) => writeln!(out, "  jmp L{t}"),
            Instr::Jz(r, t) => writeln!(out, "  jz r{r} L{t}"),
            other => writeln!(out, "  {other}"),
        };
    }
    let end = p.code().len() as u32;
    if targets.contains(&end) {
        let _ = writeln!(out, "L{end}:");
    }
    out
}
