//! Agents: a total step model iterated in a loop, halted either by reaching
//! a final state or by the global iteration bound theta.
//!
//! Text format:
//!
//! ```text
//! agent <name> state=<S> in=<I> out=<O> theta=<n>
//! final <bits> <bits> ...
//! terminal <bits>                # optional, defaults to all zeros
//! step <ir-expression>           # bits[S+I] → bits[S+O]
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::config::FINAL_STATE_LIMIT;
use crate::error::{Error, Result};
use crate::ir::program::{Node, TotalProgram};
use crate::ir::text::{parse_node, print_node};
use crate::kernel::BitVec;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentLoop {
    name: String,
    step_model: TotalProgram,
    theta: u64,
    final_states: BTreeSet<BitVec>,
    state_width: usize,
    input_width: usize,
    output_width: usize,
    terminal_output: BitVec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaltReason {
    TerminalState,
    ThetaExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    /// (state, output) after each iteration.
    pub steps: Vec<(BitVec, BitVec)>,
    pub halted_by: HaltReason,
    /// The forced terminal output emitted when theta runs out.
    pub forced_output: Option<BitVec>,
}

impl AgentLoop {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        step: Node,
        state_width: usize,
        input_width: usize,
        output_width: usize,
        theta: u64,
        final_states: impl IntoIterator<Item = BitVec>,
        terminal_output: Option<BitVec>,
    ) -> Result<AgentLoop> {
        AgentLoop::with_limit(
            name,
            step,
            state_width,
            input_width,
            output_width,
            theta,
            final_states,
            terminal_output,
            FINAL_STATE_LIMIT,
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub fn with_limit(
        name: impl Into<String>,
        step: Node,
        state_width: usize,
        input_width: usize,
        output_width: usize,
        theta: u64,
        final_states: impl IntoIterator<Item = BitVec>,
        terminal_output: Option<BitVec>,
        final_limit: usize,
    ) -> Result<AgentLoop> {
        if state_width == 0 {
            return Err(Error::Invalid("agent state width must be at least 1".into()));
        }
        if theta == 0 {
            return Err(Error::Invalid("theta must be at least 1".into()));
        }
        let step_model =
            TotalProgram::bits(step, state_width + input_width, state_width + output_width)?;
        let final_states: BTreeSet<BitVec> = final_states.into_iter().collect();
        if final_states.is_empty() {
            return Err(Error::Invalid("final-state set is empty".into()));
        }
        if final_states.len() > final_limit {
            return Err(Error::ResourceExceeded {
                budget: "max-final-states",
                limit: final_limit as u64,
            });
        }
        if let Some(bad) = final_states.iter().find(|s| s.width() != state_width) {
            return Err(Error::width(state_width, bad.width()));
        }
        let terminal_output = terminal_output.unwrap_or_else(|| BitVec::zeros(output_width));
        if terminal_output.width() != output_width {
            return Err(Error::width(output_width, terminal_output.width()));
        }
        Ok(AgentLoop {
            name: name.into(),
            step_model,
            theta,
            final_states,
            state_width,
            input_width,
            output_width,
            terminal_output,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn step_model(&self) -> &TotalProgram {
        &self.step_model
    }

    pub fn theta(&self) -> u64 {
        self.theta
    }

    pub fn final_states(&self) -> &BTreeSet<BitVec> {
        &self.final_states
    }

    pub fn is_final(&self, state: &BitVec) -> bool {
        self.final_states.contains(state)
    }

    pub fn state_width(&self) -> usize {
        self.state_width
    }

    pub fn input_width(&self) -> usize {
        self.input_width
    }

    pub fn output_width(&self) -> usize {
        self.output_width
    }

    pub fn terminal_output(&self) -> &BitVec {
        &self.terminal_output
    }

    /// One application of the step model: (state, input) → (state', output).
    pub fn step(&self, state: &BitVec, input: &BitVec) -> Result<(BitVec, BitVec)> {
        let (out, _) = self.step_model.eval(&state.concat(input)?)?;
        Ok((
            out.slice(0, self.state_width),
            out.slice(self.state_width, self.output_width),
        ))
    }

    fn check_widths(&self, input: &BitVec, state: &BitVec) -> Result<()> {
        if input.width() != self.input_width {
            return Err(Error::width(self.input_width, input.width()));
        }
        if state.width() != self.state_width {
            return Err(Error::width(self.state_width, state.width()));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "agent {} state={} in={} out={} theta={}",
            self.name, self.state_width, self.input_width, self.output_width, self.theta
        );
        let finals: Vec<String> = self.final_states.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "final {}", finals.join(" "));
        if self.output_width > 0 {
            let _ = writeln!(out, "terminal {}", self.terminal_output);
        }
        let _ = writeln!(out, "step {}", print_node(self.step_model.root()));
        out
    }

    pub fn parse(src: &str) -> Result<AgentLoop> {
        AgentLoop::parse_with_limit(src, FINAL_STATE_LIMIT)
    }

    pub fn parse_with_limit(src: &str, final_limit: usize) -> Result<AgentLoop> {
        let mut header = None;
        let mut finals = None;
        let mut terminal = None;
        let mut step = None;
        for (idx, raw) in src.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (directive, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let bits = |s: &str| {
                s.parse::<BitVec>()
                    .map_err(|e| Error::parse(line_no, e.to_string()))
            };
            match directive {
                "agent" => header = Some((parse_header(rest, line_no)?, line_no)),
                "final" => {
                    finals = Some(
                        rest.split_whitespace()
                            .map(bits)
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                "terminal" => terminal = Some(bits(rest.trim())?),
                "step" => {
                    step = Some((
                        parse_node(rest).map_err(|e| match e {
                            Error::Parse { msg, .. } => Error::parse(line_no, msg),
                            other => other,
                        })?,
                        line_no,
                    ))
                }
                other => {
                    return Err(Error::parse(line_no, format!("unknown directive `{other}`")))
                }
            }
        }
        let ((name, s, i, o, theta), hline) =
            header.ok_or_else(|| Error::parse(1, "missing `agent` header"))?;
        let finals = finals.ok_or_else(|| Error::parse(hline, "missing `final` line"))?;
        let (step, sline) = step.ok_or_else(|| Error::parse(hline, "missing `step` line"))?;
        AgentLoop::with_limit(name, step, s, i, o, theta, finals, terminal, final_limit).map_err(
            |e| match e {
                e @ Error::ResourceExceeded { .. } => e,
                Error::Structure(msg) => Error::parse(sline, msg),
                other => Error::parse(hline, other.to_string()),
            },
        )
    }
}

fn parse_header(rest: &str, line: usize) -> Result<(String, usize, usize, usize, u64)> {
    let mut parts = rest.split_whitespace();
    let name = parts
        .next()
        .ok_or_else(|| Error::parse(line, "agent header needs a name"))?
        .to_string();
    let (mut s, mut i, mut o, mut theta) = (None, None, None, None);
    for kv in parts {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| Error::parse(line, format!("expected key=value, got `{kv}`")))?;
        let n: u64 = value
            .parse()
            .map_err(|_| Error::parse(line, format!("invalid number `{value}`")))?;
        match key {
            "state" => s = Some(n as usize),
            "in" => i = Some(n as usize),
            "out" => o = Some(n as usize),
            "theta" => theta = Some(n),
            _ => return Err(Error::parse(line, format!("unknown header key `{key}`"))),
        }
    }
    match (s, i, o, theta) {
        (Some(s), Some(i), Some(o), Some(t)) => Ok((name, s, i, o, t)),
        _ => Err(Error::parse(line, "header needs state=, in=, out= and theta=")),
    }
}

/// Iterates the step model at most `theta` times, stopping the first time
/// the state lands in the final set. When theta runs out the loop is forced
/// to halt and the terminal output is emitted.
pub fn run_agent(agent: &AgentLoop, input: &BitVec, initial_state: &BitVec) -> Result<Trace> {
    agent.check_widths(input, initial_state)?;
    let mut steps = Vec::new();
    let mut state = *initial_state;
    for _ in 0..agent.theta {
        let (next, output) = agent.step(&state, input)?;
        steps.push((next, output));
        state = next;
        if agent.is_final(&state) {
            return Ok(Trace {
                steps,
                halted_by: HaltReason::TerminalState,
                forced_output: None,
            });
        }
    }
    Ok(Trace {
        steps,
        halted_by: HaltReason::ThetaExhausted,
        forced_output: Some(agent.terminal_output),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::build;

    fn bv(s: &str) -> BitVec {
        s.parse().unwrap()
    }

    /// 2-bit state, no input, 1-bit output; state' from `table`, output = 1.
    fn table_agent(table: &[&str], theta: u64, finals: &[&str]) -> AgentLoop {
        let rows: Vec<BitVec> = table.iter().map(|s| bv(&format!("{s}1"))).collect();
        AgentLoop::new(
            "t",
            build::lookup_table(2, 3, &rows).unwrap(),
            2,
            0,
            1,
            theta,
            finals.iter().map(|s| bv(s)),
            None,
        )
        .unwrap()
    }

    #[test]
    fn never_final_exhausts_theta() {
        // 00 → 01 → 00 → ..., final = {11}
        let a = table_agent(&["01", "00", "00", "11"], 5, &["11"]);
        let t = run_agent(&a, &BitVec::zeros(0), &bv("00")).unwrap();
        assert_eq!(t.steps.len(), 5);
        assert_eq!(t.halted_by, HaltReason::ThetaExhausted);
        assert_eq!(t.forced_output, Some(bv("0")));
    }

    #[test]
    fn reaches_final_at_iteration_two() {
        // 00 → 01 → 10 (final)
        let a = table_agent(&["01", "10", "10", "11"], 10, &["10"]);
        let t = run_agent(&a, &BitVec::zeros(0), &bv("00")).unwrap();
        assert_eq!(t.steps.len(), 2);
        assert_eq!(t.halted_by, HaltReason::TerminalState);
        assert_eq!(t.steps[1], (bv("10"), bv("1")));
    }

    #[test]
    fn construction_limits() {
        let step = build::identity(2);
        let too_many: Vec<BitVec> = (0..4).map(|v| BitVec::new(2, v).unwrap()).collect();
        assert!(matches!(
            AgentLoop::with_limit("x", step.clone(), 2, 0, 0, 3, too_many, None, 3),
            Err(Error::ResourceExceeded { .. })
        ));
        assert!(AgentLoop::new("x", step.clone(), 2, 0, 0, 0, [bv("00")], None).is_err());
        assert!(AgentLoop::new("x", step.clone(), 2, 0, 0, 1, [], None).is_err());
        let a = AgentLoop::new("x", step, 2, 0, 0, 1, [bv("00")], None).unwrap();
        assert!(matches!(
            run_agent(&a, &bv("1"), &bv("00")),
            Err(Error::Width { .. })
        ));
    }

    #[test]
    fn text_round_trip() {
        let a = table_agent(&["01", "10", "10", "11"], 7, &["10", "11"]);
        let text = a.to_text();
        assert_eq!(AgentLoop::parse(&text).unwrap(), a);
        assert!(AgentLoop::parse("agent a state=2 in=0 out=0 theta=3\nfinal 00\n").is_err());
    }
}
