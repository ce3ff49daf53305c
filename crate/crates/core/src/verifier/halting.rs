//! Halting and closure analysis for agent loops over finite state spaces.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::ir::AgentLoop;
use crate::kernel::BitVec;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HaltingVerdict {
    /// A final state was reached after this many iterations.
    Halts { steps: u64 },
    /// The post-step state at iteration `cycle_start + cycle_length` equals
    /// the one at `cycle_start` and no final state occurs on the cycle.
    Diverges { cycle_start: u64, cycle_length: u64 },
    ResourceExceeded { budget: String, limit: u64 },
}

impl HaltingVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            HaltingVerdict::Halts { .. } => "halts",
            HaltingVerdict::Diverges { .. } => "diverges",
            HaltingVerdict::ResourceExceeded { .. } => "resource_exceeded",
        }
    }
}

/// Runs the loop without its theta bound on a fixed input. Iteration t
/// produces state s_t; the answer is the first t with s_t final, or the
/// first repeated state. `memory_bound` caps the state width that may be
/// tracked and must not exceed `max_state_bits`.
pub fn verify_halting(
    agent: &AgentLoop,
    input: &BitVec,
    initial_state: &BitVec,
    memory_bound: usize,
    max_state_bits: usize,
    step_budget: u64,
) -> Result<HaltingVerdict> {
    if input.width() != agent.input_width() {
        return Err(Error::width(agent.input_width(), input.width()));
    }
    if initial_state.width() != agent.state_width() {
        return Err(Error::width(agent.state_width(), initial_state.width()));
    }
    if memory_bound > max_state_bits {
        return Ok(HaltingVerdict::ResourceExceeded {
            budget: "max-state-bits".into(),
            limit: max_state_bits as u64,
        });
    }
    if agent.state_width() > memory_bound {
        return Ok(HaltingVerdict::ResourceExceeded {
            budget: "memory-bound".into(),
            limit: memory_bound as u64,
        });
    }
    let mut seen: HashMap<BitVec, u64> = HashMap::new();
    let mut state = *initial_state;
    for t in 1..=step_budget {
        state = agent.step(&state, input)?.0;
        if agent.is_final(&state) {
            return Ok(HaltingVerdict::Halts { steps: t });
        }
        if let Some(&first) = seen.get(&state) {
            return Ok(HaltingVerdict::Diverges {
                cycle_start: first,
                cycle_length: t - first,
            });
        }
        seen.insert(state, t);
    }
    Ok(HaltingVerdict::ResourceExceeded {
        budget: "step-budget".into(),
        limit: step_budget,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClosureVerdict {
    Closed,
    Violation {
        state: BitVec,
        input: BitVec,
        successor: BitVec,
    },
    ResourceExceeded { budget: String, limit: u64 },
}

impl ClosureVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            ClosureVerdict::Closed => "ok",
            ClosureVerdict::Violation { .. } => "violation",
            ClosureVerdict::ResourceExceeded { .. } => "resource_exceeded",
        }
    }
}

/// Checks that no transition leaves the final-state set. Reports the first
/// violation in (state, input) order.
pub fn check_final_closure(agent: &AgentLoop, max_state_bits: usize, max_input_bits: usize) -> Result<ClosureVerdict> {
    if agent.state_width() > max_state_bits {
        return Ok(ClosureVerdict::ResourceExceeded {
            budget: "max-state-bits".into(),
            limit: max_state_bits as u64,
        });
    }
    if agent.input_width() > max_input_bits {
        return Ok(ClosureVerdict::ResourceExceeded {
            budget: "max-L".into(),
            limit: max_input_bits as u64,
        });
    }
    for state in agent.final_states() {
        for input in BitVec::enumerate(agent.input_width()) {
            let successor = agent.step(state, &input)?.0;
            if !agent.is_final(&successor) {
                return Ok(ClosureVerdict::Violation {
                    state: *state,
                    input,
                    successor,
                });
            }
        }
    }
    Ok(ClosureVerdict::Closed)
}
