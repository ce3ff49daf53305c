//! Unrestricted programs: a micro machine with self-reference and a
//! universal-interpreter instruction, and the diagonal constructions built
//! on it.

pub mod adversary;
pub mod asm;
pub mod builder;
pub mod isa;
pub mod machine;
pub mod reduction;
pub mod zoo;

pub use asm::{assemble, disassemble};
pub use builder::Asm;
pub use isa::{Instr, MicroProgram};
pub use machine::{run_code, run_micro, MicroOutcome};
pub use adversary::{demonstrate_contradiction, make_adversary, verifier_input, Demonstration, SampleRun};
pub use reduction::{build_halting_reduction, demonstrate_reduction, minimal_fuel, ReductionReport, ReductionSample};
pub use zoo::{zoo, ZooEntry};
