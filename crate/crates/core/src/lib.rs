//! Exact-arithmetic toolkit for checking bounded models against judges.

pub mod config;
pub mod diagonal;
pub mod error;
pub mod guard;
pub mod ir;
pub mod kernel;
pub mod report;
pub mod sample;
pub mod verifier;

pub use config::Budgets;
pub use error::{Error, Result};
pub use ir::{run_agent, AgentLoop, Node, TotalProgram, Trace};
pub use kernel::{
    check_nontrivial, eval_judge, BitVec, Counterexample, Judge, JudgeBody, JudgeKind,
    LinearAtom, LinearFormula, Rat, Verdict,
};
pub use report::Report;
pub use sample::Sampler;
pub use verifier::{InputBox, PwlNetwork, Region, VerifyOptions};
