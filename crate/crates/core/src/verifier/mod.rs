//! Decision procedures: exhaustive enumeration, linear regions, and halting
//! and closure analysis of agent loops.

pub mod exhaustive;
pub mod fm;
pub mod halting;
pub mod parallel;
pub mod pwl;
pub mod quantize;
pub mod regions;

pub use exhaustive::{verify_exhaustive, verify_exhaustive_with, ExhaustiveRun, StepTally};
pub use halting::{check_final_closure, verify_halting, ClosureVerdict, HaltingVerdict};
pub use pwl::{InputBox, PwlNetwork};
pub use quantize::{quantize, QuantizedInstance};
pub use regions::{enumerate_regions, verify_regions, verify_regions_with, Region, RegionRun};

use crate::config::Budgets;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub workers: usize,
    pub budgets: Budgets,
    /// Inputs per unit of work; fixed so results do not depend on workers.
    pub chunk: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            workers: 1,
            budgets: Budgets::default(),
            chunk: parallel::DEFAULT_CHUNK,
        }
    }
}
