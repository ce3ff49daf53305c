use std::fmt;

use crate::error::Error;
use crate::kernel::{BitVec, Rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Counterexample {
    /// A violating input of a bit model and the model's actual output.
    Bits { input: BitVec, output: BitVec },
    /// A violating rational point of a piecewise-linear network.
    Point { input: Vec<Rat>, output: Vec<Rat> },
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[Rat]| {
            v.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(",")
        };
        match self {
            Counterexample::Bits { input, output } => write!(f, "{input} → {output}"),
            Counterexample::Point { input, output } => {
                write!(f, "[{}] → [{}]", list(input), list(output))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Aligned,
    Misaligned(Counterexample),
    TrivialJudge(String),
    ResourceExceeded { budget: String, limit: u64 },
}

impl Verdict {
    pub fn is_aligned(&self) -> bool {
        matches!(self, Verdict::Aligned)
    }

    pub fn is_misaligned(&self) -> bool {
        matches!(self, Verdict::Misaligned(_))
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match self {
            Verdict::Misaligned(c) => Some(c),
            _ => None,
        }
    }

    /// Short label used in reports.
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Aligned => "aligned",
            Verdict::Misaligned(_) => "misaligned",
            Verdict::TrivialJudge(_) => "trivial_judge",
            Verdict::ResourceExceeded { .. } => "resource_exceeded",
        }
    }

    /// Maps the two error kinds that are verdicts in their own right; other
    /// errors are returned unchanged.
    pub fn from_error(e: Error) -> Result<Verdict, Error> {
        match e {
            Error::TrivialJudge(reason) => Ok(Verdict::TrivialJudge(reason)),
            Error::ResourceExceeded { budget, limit } => Ok(Verdict::ResourceExceeded {
                budget: budget.to_string(),
                limit,
            }),
            other => Err(other),
        }
    }
}
