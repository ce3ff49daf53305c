//! Boolean combinations of linear inequalities over exact rationals.

use std::fmt;

use crate::error::{Error, Result};
use crate::ir::program::{Activation, Affine, Node};
use crate::kernel::Rat;

pub const MAX_FORMULA_DEPTH: usize = 8;

/// `constant + Σ coefs[k]·x_{k+1} ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearAtom {
    pub constant: Rat,
    pub coefs: Vec<Rat>,
}

impl LinearAtom {
    pub fn new(constant: Rat, coefs: Vec<Rat>) -> LinearAtom {
        LinearAtom { constant, coefs }
    }

    pub fn value(&self, x: &[Rat]) -> Rat {
        debug_assert_eq!(x.len(), self.coefs.len());
        self.coefs
            .iter()
            .zip(x)
            .filter(|(c, _)| !c.is_zero())
            .fold(self.constant.clone(), |acc, (c, v)| acc + c * v)
    }

    pub fn holds(&self, x: &[Rat]) -> bool {
        !self.value(x).is_negative()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LinearFormula {
    Atom(LinearAtom),
    And(Vec<LinearFormula>),
    Or(Vec<LinearFormula>),
}

impl LinearFormula {
    pub fn depth(&self) -> usize {
        match self {
            LinearFormula::Atom(_) => 1,
            LinearFormula::And(cs) | LinearFormula::Or(cs) => {
                1 + cs.iter().map(LinearFormula::depth).max().unwrap_or(0)
            }
        }
    }

    /// Number of variables the atoms range over (all atoms agree).
    pub fn arity(&self) -> Option<usize> {
        match self {
            LinearFormula::Atom(a) => Some(a.coefs.len()),
            LinearFormula::And(cs) | LinearFormula::Or(cs) => cs.first()?.arity(),
        }
    }

    pub fn atoms(&self) -> Vec<&LinearAtom> {
        let mut out = Vec::new();
        fn walk<'a>(f: &'a LinearFormula, out: &mut Vec<&'a LinearAtom>) {
            match f {
                LinearFormula::Atom(a) => out.push(a),
                LinearFormula::And(cs) | LinearFormula::Or(cs) => {
                    cs.iter().for_each(|c| walk(c, out))
                }
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn validate(&self, arity: usize) -> Result<()> {
        if self.depth() > MAX_FORMULA_DEPTH {
            return Err(Error::Invalid(format!(
                "formula depth {} exceeds {MAX_FORMULA_DEPTH}",
                self.depth()
            )));
        }
        for a in self.atoms() {
            if a.coefs.len() != arity {
                return Err(Error::width(arity, a.coefs.len()));
            }
        }
        if let LinearFormula::And(cs) | LinearFormula::Or(cs) = self {
            if cs.is_empty() {
                return Err(Error::Invalid("empty connective".into()));
            }
        }
        Ok(())
    }

    pub fn holds(&self, x: &[Rat]) -> bool {
        match self {
            LinearFormula::Atom(a) => a.holds(x),
            LinearFormula::And(cs) => cs.iter().all(|c| c.holds(x)),
            LinearFormula::Or(cs) => cs.iter().any(|c| c.holds(x)),
        }
    }

    /// The violation condition in disjunctive normal form. Each inner list is
    /// a conjunction of strict inequalities `e > 0`, represented by the atom
    /// whose value must be positive.
    pub fn violation_dnf(&self) -> Vec<Vec<LinearAtom>> {
        match self {
            // ¬(e ≥ 0) ⇔ −e > 0
            LinearFormula::Atom(a) => vec![vec![LinearAtom {
                constant: -&a.constant,
                coefs: a.coefs.iter().map(|c| -c).collect(),
            }]],
            // ¬(A ∧ B) = ¬A ∨ ¬B
            LinearFormula::And(cs) => cs.iter().flat_map(|c| c.violation_dnf()).collect(),
            // ¬(A ∨ B) = ¬A ∧ ¬B: cross product of the children's DNFs
            LinearFormula::Or(cs) => cs.iter().fold(vec![Vec::new()], |acc, c| {
                let child = c.violation_dnf();
                acc.iter()
                    .flat_map(|left| {
                        child.iter().map(move |right| {
                            let mut conj = left.clone();
                            conj.extend(right.iter().cloned());
                            conj
                        })
                    })
                    .collect()
            }),
        }
    }

    /// A vector program vec[n] → vec[1] whose single output is 1 when the
    /// formula holds and 0 otherwise.
    pub fn compile(&self) -> Node {
        match self {
            LinearFormula::Atom(a) => Node::seq([
                Node::Affine(
                    Affine::new(vec![a.coefs.clone()], vec![a.constant.clone()])
                        .expect("atom row is well formed"),
                ),
                Node::Act(Activation::Step),
            ]),
            LinearFormula::And(cs) => {
                let m = cs.len() as i64;
                // relu(Σb − (m − 1)) is 1 iff every child bit is 1
                Node::seq([
                    Node::parallel(cs.iter().map(LinearFormula::compile)),
                    Node::Affine(
                        Affine::new(vec![vec![Rat::ONE; cs.len()]], vec![Rat::int(1 - m)])
                            .expect("well formed"),
                    ),
                    Node::Act(Activation::Relu),
                ])
            }
            LinearFormula::Or(cs) => {
                // 1 − relu(1 − Σb)
                Node::seq([
                    Node::parallel(cs.iter().map(LinearFormula::compile)),
                    Node::Affine(
                        Affine::new(vec![vec![Rat::int(-1); cs.len()]], vec![Rat::ONE])
                            .expect("well formed"),
                    ),
                    Node::Act(Activation::Relu),
                    Node::Affine(
                        Affine::new(vec![vec![Rat::int(-1)]], vec![Rat::ONE]).expect("well formed"),
                    ),
                ])
            }
        }
    }

    /// Parses `disj (';' disj)*` where `disj := unit ('|' unit)*` and
    /// `unit := '(' formula ')' | inequality`.
    pub fn parse(src: &str, arity: usize) -> Result<LinearFormula> {
        let mut p = FormulaParser {
            src: src.as_bytes(),
            pos: 0,
            arity,
        };
        let f = p.formula()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(Error::Invalid(format!(
                "unexpected `{}` in linear formula",
                &src[p.pos..]
            )));
        }
        f.validate(arity)?;
        Ok(f)
    }
}

impl fmt::Display for LinearAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.constant)?;
        for (k, c) in self.coefs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if c.is_negative() {
                write!(f, " - {}*x{}", -c, k + 1)?;
            } else {
                write!(f, " + {}*x{}", c, k + 1)?;
            }
        }
        write!(f, " >= 0")
    }
}

impl fmt::Display for LinearFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(form: &LinearFormula, top: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match form {
                LinearFormula::Atom(a) => write!(f, "{a}"),
                LinearFormula::And(cs) => {
                    if !top {
                        f.write_str("(")?;
                    }
                    for (k, c) in cs.iter().enumerate() {
                        if k > 0 {
                            f.write_str("; ")?;
                        }
                        go(c, false, f)?;
                    }
                    if !top {
                        f.write_str(")")?;
                    }
                    Ok(())
                }
                LinearFormula::Or(cs) => {
                    f.write_str("(")?;
                    for (k, c) in cs.iter().enumerate() {
                        if k > 0 {
                            f.write_str(" | ")?;
                        }
                        go(c, false, f)?;
                    }
                    f.write_str(")")
                }
            }
        }
        go(self, true, f)
    }
}

struct FormulaParser<'a> {
    src: &'a [u8],
    pos: usize,
    arity: usize,
}

impl FormulaParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err(&self, msg: &str) -> Error {
        Error::Invalid(format!("{msg} at column {}", self.pos + 1))
    }

    fn formula(&mut self) -> Result<LinearFormula> {
        let mut parts = vec![self.disjunction()?];
        while self.peek() == Some(b';') {
            self.pos += 1;
            parts.push(self.disjunction()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            LinearFormula::And(parts)
        })
    }

    fn disjunction(&mut self) -> Result<LinearFormula> {
        let mut parts = vec![self.unit()?];
        while self.peek() == Some(b'|') {
            self.pos += 1;
            parts.push(self.unit()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            LinearFormula::Or(parts)
        })
    }

    fn unit(&mut self) -> Result<LinearFormula> {
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let f = self.formula()?;
            if self.peek() != Some(b')') {
                return Err(self.err("expected `)`"));
            }
            self.pos += 1;
            // a parenthesized single disjunction stays an Or node, which
            // keeps the printer's parenthesization a fixpoint
            return Ok(f);
        }
        self.inequality().map(LinearFormula::Atom)
    }

    fn inequality(&mut self) -> Result<LinearAtom> {
        let (lc, lv) = self.expression()?;
        let ge = match (self.peek(), self.src.get(self.pos + 1)) {
            (Some(b'>'), Some(b'=')) => true,
            (Some(b'<'), Some(b'=')) => false,
            _ => return Err(self.err("expected `>=` or `<=`")),
        };
        self.pos += 2;
        let (rc, rv) = self.expression()?;
        let mut constant = &lc - &rc;
        let mut coefs: Vec<Rat> = lv.iter().zip(&rv).map(|(a, b)| a - b).collect();
        if !ge {
            constant = -constant;
            coefs = coefs.into_iter().map(|c| -c).collect();
        }
        Ok(LinearAtom { constant, coefs })
    }

    fn number(&mut self) -> Option<Rat> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'/')
        {
            self.pos += 1;
        }
        if self.pos == start {
            return None;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()?
            .parse()
            .ok()
    }

    fn variable(&mut self) -> Result<Option<usize>> {
        if self.peek() != Some(b'x') {
            return Ok(None);
        }
        self.pos += 1;
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let idx: usize = std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.err("expected variable index"))?;
        if idx == 0 || idx > self.arity {
            return Err(self.err(&format!("variable x{idx} outside x1..x{}", self.arity)));
        }
        Ok(Some(idx - 1))
    }

    /// Returns (constant, coefficients).
    fn expression(&mut self) -> Result<(Rat, Vec<Rat>)> {
        let mut constant = Rat::ZERO;
        let mut coefs = vec![Rat::ZERO; self.arity];
        let mut first = true;
        loop {
            let mut sign = Rat::ONE;
            match self.peek() {
                Some(b'+') => self.pos += 1,
                Some(b'-') => {
                    self.pos += 1;
                    sign = Rat::int(-1);
                }
                _ if !first => break,
                _ => {}
            }
            first = false;
            let coef = self.number();
            let var = if coef.is_some() {
                if self.peek() == Some(b'*') {
                    self.pos += 1;
                    Some(self.variable()?.ok_or_else(|| self.err("expected variable after `*`"))?)
                } else {
                    None
                }
            } else {
                Some(self.variable()?.ok_or_else(|| self.err("expected a term"))?)
            };
            let coef = sign * coef.unwrap_or(Rat::ONE);
            match var {
                Some(k) => coefs[k] = &coefs[k] + &coef,
                None => constant = constant + coef,
            }
        }
        Ok((constant, coefs))
    }
}
