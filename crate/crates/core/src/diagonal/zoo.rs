//! Candidate verifiers. Each reads `u32 len ‖ judge text ‖ model code` and
//! writes one byte: 1 for "aligned", 0 for "misaligned".

use crate::diagonal::builder::Asm;
use crate::diagonal::isa::MicroProgram;

/// Steps the simulating verifier grants each run of the model.
pub const SIMULATION_FUEL: i32 = 10_000;
/// Inputs the simulating verifier tries: k = 0..16, as 8 bytes of bits.
pub const SIMULATION_INPUTS: u8 = 16;

#[derive(Debug, Clone)]
pub struct ZooEntry {
    pub name: &'static str,
    pub program: MicroProgram,
    /// Whether the candidate always answers.
    pub totalizing: bool,
}

pub fn constant(answer: u8) -> MicroProgram {
    let mut a = Asm::new();
    a.loadi(0, i32::from(answer)).write(0).halt();
    a.finish().expect("static program")
}

/// Skips the header and judge text, loads the model code into buffer 1,
/// runs it on 16 inputs for 10 000 steps each and answers 1 iff every run
/// halts with some output.
pub fn simulator() -> MicroProgram {
    let mut a = Asm::new();
    a.loadi(1, 1).loadi(0, 0).loadi(5, 4);
    // r0 = big-endian length
    a.label("hdr").jz(5, "hdr_done");
    for _ in 0..8 {
        a.add(0, 0);
    }
    a.read(2).add(0, 2).sub(5, 1).jmp("hdr").label("hdr_done");
    a.label("skip").jz(0, "skip_done").read(2).sub(0, 1).jmp("skip").label("skip_done");
    // model code → B1
    a.loadi(3, 1);
    a.label("rest").read(2).mov(4, 2).add(4, 1).jz(4, "rest_done");
    a.bpush(3, 2).jmp("rest").label("rest_done");
    // r3 = B1 (code), r4 = B2 (input), r5 = B3 (output), r6 = B7 (always empty)
    a.loadi(4, 2).loadi(5, 3).loadi(6, 7);
    for k in 0..SIMULATION_INPUTS {
        // clear B2 by calling the empty program into it
        a.loadi(2, 1).callv(6, 6, 2, 4);
        for t in (0..8).rev() {
            a.loadi(0, i32::from((k >> t) & 1)).bpush(4, 0);
        }
        a.loadi(2, SIMULATION_FUEL).callv(3, 4, 2, 5);
        // status -1 or -2 rejects
        a.mov(0, 2).add(0, 1).jz(0, "reject");
        a.mov(0, 2).add(0, 1).add(0, 1).jz(0, "reject");
        // empty output rejects
        a.loadi(7, 0).bload(0, 5, 7).add(0, 1).jz(0, "reject");
    }
    a.loadi(0, 1).write(0).halt();
    a.label("reject").loadi(0, 0).write(0).halt();
    a.finish().expect("static program")
}

/// Answers with the parity of the total input length.
pub fn length_parity() -> MicroProgram {
    let mut a = Asm::new();
    a.loadi(0, 0).loadi(1, 1);
    a.label("loop").read(2).add(2, 1).jz(2, "done");
    a.mov(3, 1).sub(3, 0).mov(0, 3).jmp("loop");
    a.label("done").write(0).halt();
    a.finish().expect("static program")
}

pub fn diverging() -> MicroProgram {
    let mut a = Asm::new();
    a.label("spin").jmp("spin");
    a.finish().expect("static program")
}

/// The bundled candidates, totalizing ones first.
pub fn zoo() -> Vec<ZooEntry> {
    vec![
        ZooEntry {
            name: "constant_true",
            program: constant(1),
            totalizing: true,
        },
        ZooEntry {
            name: "constant_false",
            program: constant(0),
            totalizing: true,
        },
        ZooEntry {
            name: "simulator",
            program: simulator(),
            totalizing: true,
        },
        ZooEntry {
            name: "length_parity",
            program: length_parity(),
            totalizing: true,
        },
        ZooEntry {
            name: "diverging",
            program: diverging(),
            totalizing: false,
        },
    ]
}
