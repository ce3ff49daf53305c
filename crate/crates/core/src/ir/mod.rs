//! The total model IR: program trees, interpreter, text format and agents.

pub mod agent;
pub mod build;
pub mod eval;
pub mod float;
pub mod program;
pub mod text;

pub use agent::{run_agent, AgentLoop, HaltReason, Trace};
pub use eval::Value;
pub use program::{static_fuel_bound, Activation, Affine, Node, Repeat, Select, Sort, TotalProgram};
pub use text::{parse_node, print_node};
