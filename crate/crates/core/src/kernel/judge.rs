//! Judge functions J(i, o) and their non-triviality check.
//!
//! Text format, one directive per line (`#` starts a comment line):
//!
//! ```text
//! judge <name> kind=<predicate|linear> in=<L> out=<K>
//! neg <i-bits> <o-bits>
//! body <ir-expression>          # predicate kind: bits[L+K] → bits[1]
//! linear <ineq>; <ineq>; ...    # linear kind, variables x1..x(L+K)
//! witness <ir-expression>       # bits[L] → bits[K], the positive witness o⁺(i)
//! ```

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ir::program::{Node, Sort, TotalProgram};
use crate::ir::text::{parse_node, print_node};
use crate::kernel::linear::LinearFormula;
use crate::kernel::{BitVec, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JudgeKind {
    Predicate,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JudgeBody {
    Predicate(TotalProgram),
    Linear(LinearFormula),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Judge {
    name: String,
    in_width: usize,
    out_width: usize,
    body: JudgeBody,
    witness: Option<TotalProgram>,
    negative: Option<(BitVec, BitVec)>,
    // bits[L+K] → bits[1]; equal to the body for predicate judges
    predicate: TotalProgram,
}

impl Judge {
    pub fn predicate(
        name: impl Into<String>,
        in_width: usize,
        out_width: usize,
        body: Node,
        witness: Node,
        negative: (BitVec, BitVec),
    ) -> Result<Judge> {
        let body = TotalProgram::bits(body, in_width + out_width, 1)?;
        let witness = TotalProgram::bits(witness, in_width, out_width)?;
        Judge::assemble(
            name.into(),
            in_width,
            out_width,
            JudgeBody::Predicate(body),
            Some(witness),
            Some(negative),
        )
    }

    /// Linear judges may omit the witness and negative example when they are
    /// only used for region verification over rational inputs.
    pub fn linear(
        name: impl Into<String>,
        in_width: usize,
        out_width: usize,
        formula: LinearFormula,
        witness: Option<Node>,
        negative: Option<(BitVec, BitVec)>,
    ) -> Result<Judge> {
        formula.validate(in_width + out_width)?;
        let witness = witness
            .map(|w| TotalProgram::bits(w, in_width, out_width))
            .transpose()?;
        Judge::assemble(
            name.into(),
            in_width,
            out_width,
            JudgeBody::Linear(formula),
            witness,
            negative,
        )
    }

    fn assemble(
        name: String,
        in_width: usize,
        out_width: usize,
        body: JudgeBody,
        witness: Option<TotalProgram>,
        negative: Option<(BitVec, BitVec)>,
    ) -> Result<Judge> {
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::Invalid(format!("invalid judge name `{name}`")));
        }
        if in_width == 0 || out_width == 0 || in_width + out_width > 64 {
            return Err(Error::Invalid(format!(
                "judge widths in={in_width} out={out_width} out of range"
            )));
        }
        if let Some((i, o)) = &negative {
            if i.width() != in_width {
                return Err(Error::width(in_width, i.width()));
            }
            if o.width() != out_width {
                return Err(Error::width(out_width, o.width()));
            }
        }
        let predicate = match &body {
            JudgeBody::Predicate(p) => p.clone(),
            JudgeBody::Linear(f) => {
                let n = in_width + out_width;
                TotalProgram::bits(Node::seq([Node::Decode(n), f.compile(), Node::Encode(1)]), n, 1)?
            }
        };
        Ok(Judge {
            name,
            in_width,
            out_width,
            body,
            witness,
            negative,
            predicate,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> JudgeKind {
        match self.body {
            JudgeBody::Predicate(_) => JudgeKind::Predicate,
            JudgeBody::Linear(_) => JudgeKind::Linear,
        }
    }

    pub fn in_width(&self) -> usize {
        self.in_width
    }

    pub fn out_width(&self) -> usize {
        self.out_width
    }

    pub fn body(&self) -> &JudgeBody {
        &self.body
    }

    pub fn formula(&self) -> Option<&LinearFormula> {
        match &self.body {
            JudgeBody::Linear(f) => Some(f),
            JudgeBody::Predicate(_) => None,
        }
    }

    pub fn witness(&self) -> Option<&TotalProgram> {
        self.witness.as_ref()
    }

    pub fn negative_example(&self) -> Option<&(BitVec, BitVec)> {
        self.negative.as_ref()
    }

    /// The judge as a bits[L+K] → bits[1] program; linear bodies are compiled.
    pub fn predicate_program(&self) -> &TotalProgram {
        &self.predicate
    }

    /// J(i, o) together with the interpreter steps it took.
    pub fn eval_with_steps(&self, i: &BitVec, o: &BitVec) -> Result<(bool, u64)> {
        if i.width() != self.in_width {
            return Err(Error::width(self.in_width, i.width()));
        }
        if o.width() != self.out_width {
            return Err(Error::width(self.out_width, o.width()));
        }
        match &self.body {
            JudgeBody::Predicate(p) => {
                let (bit, steps) = p.eval(&i.concat(o)?)?;
                Ok((bit.get(0), steps))
            }
            JudgeBody::Linear(f) => {
                let mut x = i.to_rats();
                x.extend(o.to_rats());
                Ok((f.holds(&x), self.predicate.static_fuel_bound()))
            }
        }
    }

    /// Linear judges evaluated at a rational point (x, o).
    pub fn holds_at(&self, x: &[Rat], o: &[Rat]) -> Result<bool> {
        let f = self
            .formula()
            .ok_or_else(|| Error::JudgeKind("rational evaluation needs a linear judge".into()))?;
        if x.len() != self.in_width {
            return Err(Error::width(self.in_width, x.len()));
        }
        if o.len() != self.out_width {
            return Err(Error::width(self.out_width, o.len()));
        }
        let mut point = x.to_vec();
        point.extend_from_slice(o);
        Ok(f.holds(&point))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let kind = match self.kind() {
            JudgeKind::Predicate => "predicate",
            JudgeKind::Linear => "linear",
        };
        let _ = writeln!(
            out,
            "judge {} kind={kind} in={} out={}",
            self.name, self.in_width, self.out_width
        );
        if let Some((i, o)) = &self.negative {
            let _ = writeln!(out, "neg {i} {o}");
        }
        match &self.body {
            JudgeBody::Predicate(p) => {
                let _ = writeln!(out, "body {}", print_node(p.root()));
            }
            JudgeBody::Linear(f) => {
                let _ = writeln!(out, "linear {f}");
            }
        }
        if let Some(w) = &self.witness {
            let _ = writeln!(out, "witness {}", print_node(w.root()));
        }
        out
    }

    pub fn parse(src: &str) -> Result<Judge> {
        let mut header = None;
        let mut neg = None;
        let mut body = None;
        let mut linear = None;
        let mut witness = None;
        for (idx, raw) in src.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (directive, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            let dup = |slot: bool| -> Result<()> {
                if slot {
                    Err(Error::parse(line_no, format!("duplicate `{directive}`")))
                } else {
                    Ok(())
                }
            };
            match directive {
                "judge" => {
                    dup(header.is_some())?;
                    header = Some((parse_header(rest, line_no)?, line_no));
                }
                "neg" => {
                    dup(neg.is_some())?;
                    let mut parts = rest.split_whitespace();
                    let (Some(i), Some(o), None) = (parts.next(), parts.next(), parts.next())
                    else {
                        return Err(Error::parse(line_no, "`neg` takes two bit strings"));
                    };
                    let i: BitVec = i.parse().map_err(|e: Error| Error::parse(line_no, e.to_string()))?;
                    let o: BitVec = o.parse().map_err(|e: Error| Error::parse(line_no, e.to_string()))?;
                    neg = Some((i, o));
                }
                "body" => {
                    dup(body.is_some())?;
                    body = Some((parse_node(rest).map_err(|e| relocate(e, line_no))?, line_no));
                }
                "witness" => {
                    dup(witness.is_some())?;
                    witness = Some((parse_node(rest).map_err(|e| relocate(e, line_no))?, line_no));
                }
                "linear" => {
                    dup(linear.is_some())?;
                    linear = Some((rest.to_string(), line_no));
                }
                other => {
                    return Err(Error::parse(line_no, format!("unknown directive `{other}`")))
                }
            }
        }
        let ((name, kind, l, k), hline) =
            header.ok_or_else(|| Error::parse(1, "missing `judge` header"))?;
        let at = |line: usize| move |e: Error| relocate(e, line);
        match kind {
            JudgeKind::Predicate => {
                if linear.is_some() {
                    return Err(Error::parse(hline, "`linear` line in a predicate judge"));
                }
                let (body, bline) =
                    body.ok_or_else(|| Error::parse(hline, "predicate judge needs `body`"))?;
                let (witness, wline) =
                    witness.ok_or_else(|| Error::parse(hline, "predicate judge needs `witness`"))?;
                let neg = neg.ok_or_else(|| Error::parse(hline, "predicate judge needs `neg`"))?;
                let body = TotalProgram::bits(body, l + k, 1).map_err(at(bline))?;
                let witness = TotalProgram::bits(witness, l, k).map_err(at(wline))?;
                Judge::assemble(name, l, k, JudgeBody::Predicate(body), Some(witness), Some(neg))
                    .map_err(at(hline))
            }
            JudgeKind::Linear => {
                if body.is_some() {
                    return Err(Error::parse(hline, "`body` line in a linear judge"));
                }
                let (text, lline) =
                    linear.ok_or_else(|| Error::parse(hline, "linear judge needs `linear`"))?;
                let formula = LinearFormula::parse(&text, l + k).map_err(at(lline))?;
                let witness = match witness {
                    Some((w, wline)) => Some(TotalProgram::bits(w, l, k).map_err(at(wline))?),
                    None => None,
                };
                Judge::assemble(name, l, k, JudgeBody::Linear(formula), witness, neg)
                    .map_err(at(hline))
            }
        }
    }
}

fn relocate(e: Error, line: usize) -> Error {
    match e {
        Error::Parse { msg, .. } => Error::Parse { line, msg },
        other => Error::Parse {
            line,
            msg: other.to_string(),
        },
    }
}

fn parse_header(rest: &str, line: usize) -> Result<(String, JudgeKind, usize, usize)> {
    let mut parts = rest.split_whitespace();
    let name = parts
        .next()
        .ok_or_else(|| Error::parse(line, "judge header needs a name"))?
        .to_string();
    let (mut kind, mut l, mut k) = (None, None, None);
    for kv in parts {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| Error::parse(line, format!("expected key=value, got `{kv}`")))?;
        let num = || {
            value
                .parse::<usize>()
                .map_err(|_| Error::parse(line, format!("invalid width `{value}`")))
        };
        match key {
            "kind" => {
                kind = Some(match value {
                    "predicate" => JudgeKind::Predicate,
                    "linear" => JudgeKind::Linear,
                    _ => return Err(Error::parse(line, format!("unknown kind `{value}`"))),
                })
            }
            "in" => l = Some(num()?),
            "out" => k = Some(num()?),
            _ => return Err(Error::parse(line, format!("unknown header key `{key}`"))),
        }
    }
    match (kind, l, k) {
        (Some(kind), Some(l), Some(k)) => Ok((name, kind, l, k)),
        _ => Err(Error::parse(line, "header needs kind=, in= and out=")),
    }
}

/// J(i, o) ∈ {0, 1}.
pub fn eval_judge(judge: &Judge, i: &BitVec, o: &BitVec) -> Result<bool> {
    judge.eval_with_steps(i, o).map(|(b, _)| b)
}

/// Confirms the negative example is rejected and that the witness produces
/// an accepted output for every one of the 2^L inputs.
pub fn check_nontrivial(judge: &Judge, input_width: usize, max_width: usize) -> Result<()> {
    if input_width != judge.in_width() {
        return Err(Error::width(judge.in_width(), input_width));
    }
    if input_width > max_width {
        return Err(Error::ResourceExceeded {
            budget: "max-L",
            limit: max_width as u64,
        });
    }
    let (ni, no) = judge
        .negative_example()
        .ok_or_else(|| Error::TrivialJudge("no negative example".into()))?;
    if eval_judge(judge, ni, no)? {
        return Err(Error::TrivialJudge("negative example not negative".into()));
    }
    let witness = judge
        .witness()
        .ok_or_else(|| Error::TrivialJudge("no positive witness program".into()))?;
    debug_assert_eq!(witness.input_sort(), Sort::Bits(input_width));
    for i in BitVec::enumerate(input_width) {
        let (o, _) = witness.eval(&i)?;
        if !eval_judge(judge, &i, &o)? {
            return Err(Error::TrivialJudge(format!("no positive witness at i={i}")));
        }
    }
    Ok(())
}
