//! Text form of the IR: a parenthesized expression tree.
//!
//! ```text
//! node   := (seq node+) | (par node+)
//!         | (affine <out>x<in> [[r,..],..] [r,..])
//!         | (act relu) | (act sign) | (act step) | (act clip r r)
//!         | (decode n) | (encode n)
//!         | (repeat theta node node #bits)    ; body, terminal predicate, terminal output
//!         | (select node node node)           ; model, judge, fallback
//! r      := integer | integer/positive-integer
//! ```
//!
//! `;` starts a comment that runs to the end of the line. The printer emits
//! a single canonical line and `parse(print(p)) == p` for every tree.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ir::program::{Activation, Affine, Node};
use crate::kernel::{BitVec, Rat};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    LBracket,
    RBracket,
    Comma,
    Atom(String),
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    last_line: usize,
}

fn lex(src: &str) -> Lexer {
    let mut toks = Vec::new();
    let mut line = 1;
    let mut chars = src.chars().peekable();
    let mut atom = String::new();
    let flush = |atom: &mut String, toks: &mut Vec<(Tok, usize)>, line| {
        if !atom.is_empty() {
            toks.push((Tok::Atom(std::mem::take(atom)), line));
        }
    };
    while let Some(c) = chars.next() {
        let punct = match c {
            '(' => Some(Tok::Open),
            ')' => Some(Tok::Close),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(t) = punct {
            flush(&mut atom, &mut toks, line);
            toks.push((t, line));
        } else if c == ';' {
            flush(&mut atom, &mut toks, line);
            for c in chars.by_ref() {
                if c == '\n' {
                    line += 1;
                    break;
                }
            }
        } else if c.is_whitespace() {
            flush(&mut atom, &mut toks, line);
            if c == '\n' {
                line += 1;
            }
        } else {
            atom.push(c);
        }
    }
    flush(&mut atom, &mut toks, line);
    Lexer {
        toks,
        pos: 0,
        last_line: line,
    }
}

impl Lexer {
    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|t| t.1)
            .unwrap_or(self.last_line)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line(), msg)
    }

    fn next(&mut self) -> Result<Tok> {
        let t = self
            .toks
            .get(self.pos)
            .map(|t| t.0.clone())
            .ok_or_else(|| self.err("unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        let line = self.line();
        let got = self.next()?;
        if got != want {
            return Err(Error::parse(line, format!("expected {want:?}, found {got:?}")));
        }
        Ok(())
    }

    fn atom(&mut self) -> Result<String> {
        let line = self.line();
        match self.next()? {
            Tok::Atom(a) => Ok(a),
            t => Err(Error::parse(line, format!("expected a word, found {t:?}"))),
        }
    }

    fn rat(&mut self) -> Result<Rat> {
        let line = self.line();
        let a = self.atom()?;
        a.parse()
            .map_err(|_| Error::parse(line, format!("invalid rational `{a}`")))
    }

    fn usize(&mut self) -> Result<usize> {
        let line = self.line();
        let a = self.atom()?;
        a.parse()
            .map_err(|_| Error::parse(line, format!("invalid count `{a}`")))
    }

    fn rat_list(&mut self) -> Result<Vec<Rat>> {
        self.expect(Tok::LBracket)?;
        let mut out = Vec::new();
        if self.peek() == Some(&Tok::RBracket) {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            out.push(self.rat()?);
            match self.next()? {
                Tok::Comma => continue,
                Tok::RBracket => return Ok(out),
                t => return Err(self.err(format!("expected `,` or `]`, found {t:?}"))),
            }
        }
    }

    fn matrix(&mut self) -> Result<Vec<Vec<Rat>>> {
        self.expect(Tok::LBracket)?;
        let mut rows = Vec::new();
        loop {
            rows.push(self.rat_list()?);
            match self.next()? {
                Tok::Comma => continue,
                Tok::RBracket => return Ok(rows),
                t => return Err(self.err(format!("expected `,` or `]`, found {t:?}"))),
            }
        }
    }

    fn node(&mut self) -> Result<Node> {
        self.expect(Tok::Open)?;
        let head_line = self.line();
        let head = self.atom()?;
        let node = match head.as_str() {
            "seq" | "par" => {
                let mut children = Vec::new();
                while self.peek() == Some(&Tok::Open) {
                    children.push(self.node()?);
                }
                if children.is_empty() {
                    return Err(Error::parse(head_line, format!("`{head}` needs children")));
                }
                if head == "seq" {
                    Node::Seq(children)
                } else {
                    Node::Parallel(children)
                }
            }
            "affine" => {
                let dims = self.atom()?;
                let (d_out, d_in) = dims
                    .split_once('x')
                    .and_then(|(o, i)| Some((o.parse::<usize>().ok()?, i.parse::<usize>().ok()?)))
                    .ok_or_else(|| Error::parse(head_line, format!("invalid dims `{dims}`")))?;
                let matrix = self.matrix()?;
                let bias = self.rat_list()?;
                if matrix.len() != d_out || matrix.iter().any(|r| r.len() != d_in) {
                    return Err(Error::parse(
                        head_line,
                        format!("matrix does not match declared dims {dims}"),
                    ));
                }
                Node::Affine(
                    Affine::new(matrix, bias).map_err(|e| Error::parse(head_line, e.to_string()))?,
                )
            }
            "act" => {
                let kind = self.atom()?;
                Node::Act(match kind.as_str() {
                    "relu" => Activation::Relu,
                    "sign" => Activation::Sign,
                    "step" => Activation::Step,
                    "clip" => {
                        let lo = self.rat()?;
                        let hi = self.rat()?;
                        Activation::clip(lo, hi)
                            .map_err(|e| Error::parse(head_line, e.to_string()))?
                    }
                    other => {
                        return Err(Error::parse(head_line, format!("unknown activation `{other}`")))
                    }
                })
            }
            "decode" => Node::Decode(self.usize()?),
            "encode" => Node::Encode(self.usize()?),
            "repeat" => {
                let line = self.line();
                let theta: u64 = self
                    .atom()?
                    .parse()
                    .map_err(|_| Error::parse(line, "invalid theta"))?;
                let body = self.node()?;
                let pred = self.node()?;
                let line = self.line();
                let bits = self.atom()?;
                let out = bits
                    .strip_prefix('#')
                    .ok_or_else(|| Error::parse(line, "terminal output must be `#bits`"))?
                    .parse::<BitVec>()
                    .map_err(|e| Error::parse(line, e.to_string()))?;
                Node::repeat(body, theta, pred, out)
            }
            "select" => {
                let model = self.node()?;
                let judge = self.node()?;
                let fallback = self.node()?;
                Node::select(model, judge, fallback)
            }
            other => return Err(Error::parse(head_line, format!("unknown node `{other}`"))),
        };
        self.expect(Tok::Close)?;
        Ok(node)
    }
}

/// Parses exactly one node; trailing tokens are an error.
pub fn parse_node(src: &str) -> Result<Node> {
    let mut lx = lex(src);
    let node = lx.node()?;
    if lx.peek().is_some() {
        return Err(lx.err("trailing input after program"));
    }
    Ok(node)
}

pub fn print_node(node: &Node) -> String {
    let mut out = String::new();
    write_node(&mut out, node);
    out
}

fn write_list(out: &mut String, xs: &[Rat]) {
    out.push('[');
    for (k, x) in xs.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        let _ = write!(out, "{x}");
    }
    out.push(']');
}

fn write_node(out: &mut String, node: &Node) {
    match node {
        Node::Seq(cs) | Node::Parallel(cs) => {
            out.push_str(if matches!(node, Node::Seq(_)) { "(seq" } else { "(par" });
            for c in cs {
                out.push(' ');
                write_node(out, c);
            }
            out.push(')');
        }
        Node::Affine(a) => {
            let _ = write!(out, "(affine {}x{} [", a.d_out(), a.d_in());
            for (k, row) in a.matrix().iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write_list(out, row);
            }
            out.push_str("] ");
            write_list(out, a.bias());
            out.push(')');
        }
        Node::Act(act) => match act {
            Activation::Relu => out.push_str("(act relu)"),
            Activation::Sign => out.push_str("(act sign)"),
            Activation::Step => out.push_str("(act step)"),
            Activation::Clip(lo, hi) => {
                let _ = write!(out, "(act clip {lo} {hi})");
            }
        },
        Node::Decode(n) => {
            let _ = write!(out, "(decode {n})");
        }
        Node::Encode(n) => {
            let _ = write!(out, "(encode {n})");
        }
        Node::Repeat(r) => {
            let _ = write!(out, "(repeat {} ", r.theta);
            write_node(out, &r.body);
            out.push(' ');
            write_node(out, &r.terminal_pred);
            let _ = write!(out, " #{})", r.terminal_output);
        }
        Node::Select(s) => {
            out.push_str("(select ");
            write_node(out, &s.model);
            out.push(' ');
            write_node(out, &s.judge);
            out.push(' ');
            write_node(out, &s.fallback);
            out.push(')');
        }
    }
}

impl std::fmt::Display for Node {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&print_node(self))
    }
}

impl std::str::FromStr for Node {
    type Err = Error;
    fn from_str(s: &str) -> Result<Node> {
        parse_node(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let src = "(seq (decode 4) (affine 4x4 [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]] [0,0,0,0]) (act relu) (encode 4))";
        let node = parse_node(src).unwrap();
        assert_eq!(print_node(&node), src);
    }

    #[test]
    fn comments_rationals_and_multiline() {
        let src = "; header\n(seq (decode 1)\n  (affine 1x1 [[-3/4]] [1/2]) ; scale\n  (act clip -1 2/3)\n  (encode 1))";
        let node = parse_node(src).unwrap();
        assert_eq!(
            print_node(&node),
            "(seq (decode 1) (affine 1x1 [[-3/4]] [1/2]) (act clip -1 2/3) (encode 1))"
        );
    }

    #[test]
    fn repeat_and_select_round_trip() {
        let src = "(select (repeat 3 (seq (decode 1) (encode 1)) (seq (decode 1) (encode 1)) #1) (seq (decode 2) (affine 1x2 [[1,1]] [-1]) (encode 1)) (seq (decode 1) (encode 1)))";
        let node = parse_node(src).unwrap();
        assert_eq!(print_node(&node), src);
    }

    #[test]
    fn error_lines() {
        let err = parse_node("(seq (decode 1)\n (bogus 2))").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 2,
                msg: "unknown node `bogus`".into()
            }
        );
        assert!(parse_node("(affine 2x1 [[1]] [0])").is_err());
        assert!(parse_node("(decode 1) (decode 1)").is_err());
        assert!(parse_node("(act clip 1 0)").is_err());
        assert!(parse_node("(seq)").is_err());
    }
}
