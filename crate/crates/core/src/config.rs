//! Resource budgets. Exceeding any of them is reported as its own verdict
//! rather than silently truncating a run.

/// Size of the final-state set and the loop-length limit (2^5).
pub const FINAL_STATE_LIMIT: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budgets {
    /// Largest input width enumerated exhaustively.
    pub max_l: usize,
    /// Largest total hidden-neuron count for region enumeration.
    pub max_neurons: usize,
    /// Largest state width for the halting verifier.
    pub max_state_bits: usize,
    /// Largest state width for the final-set closure check.
    pub max_closure_bits: usize,
    pub max_final_states: usize,
    /// Default fuel for micro-machine demonstrations.
    pub fuel: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            max_l: 24,
            max_neurons: 20,
            max_state_bits: 20,
            max_closure_bits: 16,
            max_final_states: FINAL_STATE_LIMIT,
            fuel: 1_000_000,
        }
    }
}
