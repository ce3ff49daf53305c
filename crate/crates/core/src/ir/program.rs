//! The total model IR.
//!
//! A program is a finite tree. Every node kind has a statically known cost,
//! and the only iteration construct ([`Repeat`]) carries a finite bound, so
//! every well-typed tree has a finite fuel bound and always halts.

use crate::error::{Error, Result};
use crate::kernel::{BitVec, Rat};

/// The kind of value flowing along an edge of the tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sort {
    Bits(usize),
    Vector(usize),
}

impl Sort {
    pub fn width(&self) -> usize {
        match *self {
            Sort::Bits(n) | Sort::Vector(n) => n,
        }
    }
}

impl std::fmt::Display for Sort {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sort::Bits(n) => write!(f, "bits[{n}]"),
            Sort::Vector(n) => write!(f, "vec[{n}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Affine {
    matrix: Vec<Vec<Rat>>,
    bias: Vec<Rat>,
    d_in: usize,
}

impl Affine {
    /// `matrix` is `d_out` rows of `d_in` entries.
    pub fn new(matrix: Vec<Vec<Rat>>, bias: Vec<Rat>) -> Result<Affine> {
        let d_out = matrix.len();
        if d_out == 0 {
            return Err(Error::structure("affine map with no output rows"));
        }
        let d_in = matrix[0].len();
        if d_in == 0 {
            return Err(Error::structure("affine map with no input columns"));
        }
        if matrix.iter().any(|row| row.len() != d_in) {
            return Err(Error::structure("ragged affine matrix"));
        }
        if bias.len() != d_out {
            return Err(Error::structure(format!(
                "affine bias has {} entries, expected {d_out}",
                bias.len()
            )));
        }
        Ok(Affine { matrix, bias, d_in })
    }

    pub fn identity(n: usize) -> Affine {
        let matrix = (0..n)
            .map(|r| (0..n).map(|c| if r == c { Rat::ONE } else { Rat::ZERO }).collect())
            .collect();
        Affine::new(matrix, vec![Rat::ZERO; n]).expect("identity is well formed")
    }

    pub fn from_ints(matrix: &[&[i64]], bias: &[i64]) -> Result<Affine> {
        Affine::new(
            matrix
                .iter()
                .map(|row| row.iter().map(|&v| Rat::int(v)).collect())
                .collect(),
            bias.iter().map(|&v| Rat::int(v)).collect(),
        )
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> &[Vec<Rat>] {
        &self.matrix
    }

    pub fn bias(&self) -> &[Rat] {
        &self.bias
    }

    pub fn apply(&self, x: &[Rat]) -> Vec<Rat> {
        debug_assert_eq!(x.len(), self.d_in);
        self.matrix
            .iter()
            .zip(&self.bias)
            .map(|(row, b)| {
                row.iter()
                    .zip(x)
                    .filter(|(w, _)| !w.is_zero())
                    .fold(b.clone(), |acc, (w, xi)| acc + w * xi)
            })
            .collect()
    }

    /// `self ∘ inner`, i.e. x ↦ self(inner(x)).
    pub fn compose(&self, inner: &Affine) -> Affine {
        assert_eq!(self.d_in, inner.d_out());
        let matrix = self
            .matrix
            .iter()
            .map(|row| {
                (0..inner.d_in)
                    .map(|c| {
                        row.iter()
                            .zip(&inner.matrix)
                            .map(|(w, inner_row)| w * &inner_row[c])
                            .sum()
                    })
                    .collect()
            })
            .collect();
        let bias = self.apply(&inner.bias);
        Affine::new(matrix, bias).expect("composition preserves shape")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Activation {
    Relu,
    /// −1, 0 or 1.
    Sign,
    /// 1 when the argument is ≥ 0, else 0.
    Step,
    Clip(Rat, Rat),
}

impl Activation {
    pub fn clip(lo: Rat, hi: Rat) -> Result<Activation> {
        if lo > hi {
            return Err(Error::Interval {
                lo: lo.to_string(),
                hi: hi.to_string(),
            });
        }
        Ok(Activation::Clip(lo, hi))
    }

    pub fn apply(&self, z: &Rat) -> Rat {
        match self {
            Activation::Relu => {
                if z.is_negative() {
                    Rat::ZERO
                } else {
                    z.clone()
                }
            }
            Activation::Sign => Rat::int(z.signum() as i64),
            Activation::Step => {
                if z.is_negative() {
                    Rat::ZERO
                } else {
                    Rat::ONE
                }
            }
            Activation::Clip(lo, hi) => {
                if z < lo {
                    lo.clone()
                } else if z > hi {
                    hi.clone()
                } else {
                    z.clone()
                }
            }
        }
    }
}

/// Bounded iteration over a bit state.
///
/// Each round applies `body` and then tests `terminal_pred`; the first
/// round whose predicate yields 1 returns the state. If `theta` rounds pass
/// without that, the constant `terminal_output` is returned instead.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Repeat {
    pub body: Node,
    pub theta: u64,
    pub terminal_pred: Node,
    pub terminal_output: BitVec,
}

/// `model(i)` if `judge(i ‖ model(i)) = 1`, else `fallback(i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Select {
    pub model: Node,
    pub judge: Node,
    pub fallback: Node,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Affine(Affine),
    Act(Activation),
    Seq(Vec<Node>),
    Parallel(Vec<Node>),
    Decode(usize),
    Encode(usize),
    Repeat(Box<Repeat>),
    Select(Box<Select>),
}

impl Node {
    pub fn seq(children: impl IntoIterator<Item = Node>) -> Node {
        Node::Seq(children.into_iter().collect())
    }

    pub fn parallel(children: impl IntoIterator<Item = Node>) -> Node {
        Node::Parallel(children.into_iter().collect())
    }

    pub fn affine(a: Affine) -> Node {
        Node::Affine(a)
    }

    pub fn repeat(body: Node, theta: u64, terminal_pred: Node, terminal_output: BitVec) -> Node {
        Node::Repeat(Box::new(Repeat {
            body,
            theta,
            terminal_pred,
            terminal_output,
        }))
    }

    pub fn select(model: Node, judge: Node, fallback: Node) -> Node {
        Node::Select(Box::new(Select {
            model,
            judge,
            fallback,
        }))
    }

    /// The input sort fixed by the tree's leftmost sort-determining leaf.
    pub fn infer_input_sort(&self) -> Option<Sort> {
        match self {
            Node::Affine(a) => Some(Sort::Vector(a.d_in())),
            Node::Act(_) => None,
            Node::Decode(n) => Some(Sort::Bits(*n)),
            Node::Encode(n) => Some(Sort::Vector(*n)),
            Node::Seq(children) => children.first()?.infer_input_sort(),
            Node::Parallel(children) => children.iter().find_map(Node::infer_input_sort),
            Node::Repeat(r) => r
                .body
                .infer_input_sort()
                .or_else(|| r.terminal_pred.infer_input_sort())
                .or(Some(Sort::Bits(r.terminal_output.width()))),
            Node::Select(s) => s
                .model
                .infer_input_sort()
                .or_else(|| s.fallback.infer_input_sort()),
        }
    }

    /// Type-checks the tree against `input` and returns the output sort
    /// together with the static fuel bound.
    pub fn analyze(&self, input: Sort) -> Result<(Sort, u64)> {
        let overflow = || Error::structure("fuel bound overflows u64");
        match self {
            Node::Affine(a) => {
                expect_sort(input, Sort::Vector(a.d_in()), "affine")?;
                let cost = (a.d_out() as u64)
                    .checked_mul(a.d_in() as u64 + 1)
                    .ok_or_else(overflow)?;
                Ok((Sort::Vector(a.d_out()), cost))
            }
            Node::Act(act) => {
                let Sort::Vector(n) = input else {
                    return Err(Error::structure(format!("activation applied to {input}")));
                };
                if let Activation::Clip(lo, hi) = act {
                    if lo > hi {
                        return Err(Error::Interval {
                            lo: lo.to_string(),
                            hi: hi.to_string(),
                        });
                    }
                }
                Ok((input, n as u64))
            }
            Node::Decode(n) => {
                check_width(*n, "decode")?;
                expect_sort(input, Sort::Bits(*n), "decode")?;
                Ok((Sort::Vector(*n), *n as u64))
            }
            Node::Encode(n) => {
                check_width(*n, "encode")?;
                expect_sort(input, Sort::Vector(*n), "encode")?;
                Ok((Sort::Bits(*n), *n as u64))
            }
            Node::Seq(children) => {
                if children.is_empty() {
                    return Err(Error::structure("empty seq"));
                }
                let mut sort = input;
                let mut total = 0u64;
                for child in children {
                    let (out, cost) = child.analyze(sort)?;
                    sort = out;
                    total = total.checked_add(cost).ok_or_else(overflow)?;
                }
                Ok((sort, total))
            }
            Node::Parallel(children) => {
                if children.is_empty() {
                    return Err(Error::structure("empty parallel"));
                }
                let mut total = 0u64;
                let mut width = 0usize;
                let mut bits = None;
                for child in children {
                    let (out, cost) = child.analyze(input)?;
                    let is_bits = matches!(out, Sort::Bits(_));
                    if *bits.get_or_insert(is_bits) != is_bits {
                        return Err(Error::structure(
                            "parallel branches mix bit and vector outputs",
                        ));
                    }
                    width += out.width();
                    total = total.checked_add(cost).ok_or_else(overflow)?;
                }
                let out = if bits == Some(true) {
                    check_width(width, "parallel output")?;
                    Sort::Bits(width)
                } else {
                    Sort::Vector(width)
                };
                Ok((out, total))
            }
            Node::Repeat(r) => {
                if r.theta == 0 {
                    return Err(Error::structure("repeat needs theta >= 1"));
                }
                let w = r.terminal_output.width();
                expect_sort(input, Sort::Bits(w), "repeat")?;
                let (body_out, body_cost) = r.body.analyze(input)?;
                expect_sort(body_out, Sort::Bits(w), "repeat body output")?;
                let (pred_out, pred_cost) = r.terminal_pred.analyze(input)?;
                expect_sort(pred_out, Sort::Bits(1), "repeat terminal predicate")?;
                let per_round = body_cost.checked_add(pred_cost).ok_or_else(overflow)?;
                let cost = r
                    .theta
                    .checked_mul(per_round)
                    .and_then(|c| c.checked_add(1))
                    .ok_or_else(overflow)?;
                Ok((input, cost))
            }
            Node::Select(s) => {
                let Sort::Bits(l) = input else {
                    return Err(Error::structure(format!("select applied to {input}")));
                };
                let (model_out, model_cost) = s.model.analyze(input)?;
                let Sort::Bits(k) = model_out else {
                    return Err(Error::structure("select model must output bits"));
                };
                check_width(l + k, "select judge input")?;
                let (judge_out, judge_cost) = s.judge.analyze(Sort::Bits(l + k))?;
                expect_sort(judge_out, Sort::Bits(1), "select judge output")?;
                let (fb_out, fb_cost) = s.fallback.analyze(input)?;
                expect_sort(fb_out, model_out, "select fallback output")?;
                let cost = model_cost
                    .checked_add(judge_cost)
                    .and_then(|c| c.checked_add(fb_cost))
                    .and_then(|c| c.checked_add(1))
                    .ok_or_else(overflow)?;
                Ok((model_out, cost))
            }
        }
    }

    pub fn node_count(&self) -> usize {
        1 + match self {
            Node::Seq(c) | Node::Parallel(c) => c.iter().map(Node::node_count).sum(),
            Node::Repeat(r) => r.body.node_count() + r.terminal_pred.node_count(),
            Node::Select(s) => s.model.node_count() + s.judge.node_count() + s.fallback.node_count(),
            _ => 0,
        }
    }

    pub fn depth(&self) -> usize {
        1 + match self {
            Node::Seq(c) | Node::Parallel(c) => c.iter().map(Node::depth).max().unwrap_or(0),
            Node::Repeat(r) => r.body.depth().max(r.terminal_pred.depth()),
            Node::Select(s) => s.model.depth().max(s.judge.depth()).max(s.fallback.depth()),
            _ => 0,
        }
    }
}

fn expect_sort(got: Sort, expected: Sort, what: &str) -> Result<()> {
    if got != expected {
        return Err(Error::structure(format!(
            "{what} expects {expected}, got {got}"
        )));
    }
    Ok(())
}

fn check_width(n: usize, what: &str) -> Result<()> {
    if n == 0 || n > crate::kernel::bitvec::MAX_WIDTH {
        return Err(Error::structure(format!(
            "{what} width {n} outside 1..={}",
            crate::kernel::bitvec::MAX_WIDTH
        )));
    }
    Ok(())
}

/// Static fuel bound of a bare tree, with the input sort inferred from the
/// tree itself.
pub fn static_fuel_bound(node: &Node) -> Result<u64> {
    let input = node
        .infer_input_sort()
        .ok_or_else(|| Error::structure("cannot infer input sort"))?;
    Ok(node.analyze(input)?.1)
}

/// A type-checked tree with its input/output sorts and fuel bound cached.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TotalProgram {
    root: Node,
    input: Sort,
    output: Sort,
    fuel_bound: u64,
}

impl TotalProgram {
    pub fn new(root: Node) -> Result<TotalProgram> {
        let input = root
            .infer_input_sort()
            .ok_or_else(|| Error::structure("cannot infer input sort"))?;
        TotalProgram::with_input(root, input)
    }

    pub fn with_input(root: Node, input: Sort) -> Result<TotalProgram> {
        let (output, fuel_bound) = root.analyze(input)?;
        Ok(TotalProgram {
            root,
            input,
            output,
            fuel_bound,
        })
    }

    /// Like [`TotalProgram::new`] but additionally requires bit input and
    /// output of the given widths.
    pub fn bits(root: Node, in_width: usize, out_width: usize) -> Result<TotalProgram> {
        let p = TotalProgram::with_input(root, Sort::Bits(in_width))?;
        if p.output != Sort::Bits(out_width) {
            return Err(Error::structure(format!(
                "expected output bits[{out_width}], got {}",
                p.output
            )));
        }
        Ok(p)
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn into_root(self) -> Node {
        self.root
    }

    pub fn input_sort(&self) -> Sort {
        self.input
    }

    pub fn output_sort(&self) -> Sort {
        self.output
    }

    pub fn in_width(&self) -> usize {
        self.input.width()
    }

    pub fn out_width(&self) -> usize {
        self.output.width()
    }

    pub fn is_bit_program(&self) -> bool {
        matches!(self.input, Sort::Bits(_)) && matches!(self.output, Sort::Bits(_))
    }

    pub fn static_fuel_bound(&self) -> u64 {
        self.fuel_bound
    }
}
