//! Piecewise-linear networks: alternating affine and relu layers with a
//! final affine map.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ir::{Activation, Affine, Node, Sort, TotalProgram};
use crate::kernel::Rat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PwlNetwork {
    hidden: Vec<Affine>,
    output: Affine,
}

impl PwlNetwork {
    pub fn new(hidden: Vec<Affine>, output: Affine) -> Result<PwlNetwork> {
        let mut width = hidden.first().map_or(output.d_in(), Affine::d_in);
        for layer in hidden.iter().chain(std::iter::once(&output)) {
            if layer.d_in() != width {
                return Err(Error::width(width, layer.d_in()));
            }
            width = layer.d_out();
        }
        Ok(PwlNetwork { hidden, output })
    }

    /// Lowers a vector → vector program built from affine, relu and clip
    /// nodes. Consecutive affine maps are merged and clip(a, b) becomes
    /// a + relu(z − a) − relu(z − b).
    pub fn from_program(p: &TotalProgram) -> Result<PwlNetwork> {
        let Sort::Vector(d) = p.input_sort() else {
            return Err(Error::structure("region verification needs a vector-input network"));
        };
        let mut ops = Vec::new();
        flatten(p.root(), &mut ops)?;
        let mut hidden = Vec::new();
        let mut pending = Affine::identity(d);
        for op in ops {
            match op {
                Node::Affine(a) => pending = a.compose(&pending),
                Node::Act(Activation::Relu) => {
                    hidden.push(pending.clone());
                    pending = Affine::identity(pending.d_out());
                }
                Node::Act(Activation::Clip(lo, hi)) => {
                    let n = pending.d_out();
                    // relu(z − a) and relu(z − b) for each coordinate
                    let mut rows = Vec::with_capacity(2 * n);
                    let mut bias = Vec::with_capacity(2 * n);
                    for (row, b) in pending.matrix().iter().zip(pending.bias()) {
                        rows.push(row.clone());
                        bias.push(b - &lo);
                        rows.push(row.clone());
                        bias.push(b - &hi);
                    }
                    hidden.push(Affine::new(rows, bias)?);
                    let mut out_rows = vec![vec![Rat::ZERO; 2 * n]; n];
                    for (k, row) in out_rows.iter_mut().enumerate() {
                        row[2 * k] = Rat::ONE;
                        row[2 * k + 1] = Rat::int(-1);
                    }
                    pending = Affine::new(out_rows, vec![lo.clone(); n])?;
                }
                other => {
                    return Err(Error::structure(format!(
                        "node `{}` has no piecewise-linear lowering",
                        crate::ir::print_node(&other)
                    )))
                }
            }
        }
        PwlNetwork::new(hidden, pending)
    }

    pub fn hidden(&self) -> &[Affine] {
        &self.hidden
    }

    pub fn output(&self) -> &Affine {
        &self.output
    }

    pub fn input_dim(&self) -> usize {
        self.hidden.first().map_or(self.output.d_in(), Affine::d_in)
    }

    pub fn output_dim(&self) -> usize {
        self.output.d_out()
    }

    pub fn neuron_count(&self) -> usize {
        self.hidden.iter().map(Affine::d_out).sum()
    }

    pub fn eval(&self, x: &[Rat]) -> Vec<Rat> {
        let mut v = x.to_vec();
        for layer in &self.hidden {
            v = layer
                .apply(&v)
                .into_iter()
                .map(|z| if z.is_negative() { Rat::ZERO } else { z })
                .collect();
        }
        self.output.apply(&v)
    }

    /// Activation pattern at `x`; a neuron at exactly zero counts as active.
    pub fn pattern_at(&self, x: &[Rat]) -> Vec<bool> {
        let mut pattern = Vec::with_capacity(self.neuron_count());
        let mut v = x.to_vec();
        for layer in &self.hidden {
            v = layer
                .apply(&v)
                .into_iter()
                .map(|z| {
                    let active = !z.is_negative();
                    pattern.push(active);
                    if active {
                        z
                    } else {
                        Rat::ZERO
                    }
                })
                .collect();
        }
        pattern
    }

    pub fn to_node(&self) -> Node {
        let mut children = Vec::new();
        for layer in &self.hidden {
            children.push(Node::Affine(layer.clone()));
            children.push(Node::Act(Activation::Relu));
        }
        children.push(Node::Affine(self.output.clone()));
        Node::seq(children)
    }

    pub fn to_program(&self) -> TotalProgram {
        TotalProgram::with_input(self.to_node(), Sort::Vector(self.input_dim()))
            .expect("network layers chain")
    }
}

fn flatten(node: &Node, out: &mut Vec<Node>) -> Result<()> {
    match node {
        Node::Seq(children) => children.iter().try_for_each(|c| flatten(c, out)),
        Node::Affine(_) | Node::Act(_) => {
            out.push(node.clone());
            Ok(())
        }
        _ => Err(Error::structure(format!(
            "node `{}` has no piecewise-linear lowering",
            crate::ir::print_node(node)
        ))),
    }
}

/// An axis-aligned box of closed intervals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputBox {
    bounds: Vec<(Rat, Rat)>,
}

impl InputBox {
    pub fn new(bounds: Vec<(Rat, Rat)>) -> Result<InputBox> {
        if let Some((lo, hi)) = bounds.iter().find(|(lo, hi)| lo > hi) {
            return Err(Error::Interval {
                lo: lo.to_string(),
                hi: hi.to_string(),
            });
        }
        Ok(InputBox { bounds })
    }

    pub fn cube(dim: usize, lo: Rat, hi: Rat) -> Result<InputBox> {
        InputBox::new(vec![(lo, hi); dim])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(Rat, Rat)] {
        &self.bounds
    }

    pub fn is_degenerate(&self) -> bool {
        self.bounds.iter().any(|(lo, hi)| lo == hi)
    }

    pub fn center(&self) -> Vec<Rat> {
        self.bounds.iter().map(|(lo, hi)| lo.midpoint(hi)).collect()
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        x.len() == self.dim() && self.bounds.iter().zip(x).all(|((lo, hi), v)| lo <= v && v <= hi)
    }
}

impl fmt::Display for InputBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.bounds.iter().map(|(lo, hi)| format!("{lo},{hi}")).collect();
        f.write_str(&parts.join(";"))
    }
}

/// `lo,hi;lo,hi;...`
impl FromStr for InputBox {
    type Err = Error;

    fn from_str(s: &str) -> Result<InputBox> {
        let bounds = s
            .split(';')
            .map(|part| {
                let (lo, hi) = part
                    .split_once(',')
                    .ok_or_else(|| Error::Invalid(format!("box interval `{part}` needs `lo,hi`")))?;
                let parse = |v: &str| {
                    v.trim()
                        .parse::<Rat>()
                        .map_err(|e| Error::Invalid(format!("box bound: {e}")))
                };
                Ok((parse(lo)?, parse(hi)?))
            })
            .collect::<Result<Vec<_>>>()?;
        InputBox::new(bounds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    #[test]
    fn lowers_clip_exactly() {
        let p = TotalProgram::with_input(
            Node::seq([
                Node::Affine(Affine::from_ints(&[&[2]], &[0]).unwrap()),
                Node::Act(Activation::clip(Rat::ZERO, Rat::ONE).unwrap()),
            ]),
            Sort::Vector(1),
        )
        .unwrap();
        let net = PwlNetwork::from_program(&p).unwrap();
        assert_eq!(net.neuron_count(), 2);
        for x in [r(-1, 1), r(0, 1), r(1, 4), r(1, 2), r(3, 4), r(2, 1)] {
            assert_eq!(net.eval(&[x.clone()]), p.eval_vector(&[x]).unwrap());
        }
    }

    #[test]
    fn merges_affine_chains() {
        let p = TotalProgram::with_input(
            Node::seq([
                Node::Affine(Affine::from_ints(&[&[1, 1]], &[1]).unwrap()),
                Node::Affine(Affine::from_ints(&[&[3], &[-1]], &[0, 2]).unwrap()),
                Node::Act(Activation::Relu),
                Node::Affine(Affine::from_ints(&[&[1, 1]], &[0]).unwrap()),
            ]),
            Sort::Vector(2),
        )
        .unwrap();
        let net = PwlNetwork::from_program(&p).unwrap();
        assert_eq!(net.hidden().len(), 1);
        let x = [r(1, 3), r(-5, 2)];
        assert_eq!(net.eval(&x), p.eval_vector(&x).unwrap());
        assert_eq!(PwlNetwork::from_program(&net.to_program()).unwrap(), net);
    }

    #[test]
    fn box_text() {
        let b: InputBox = "-1,1; 0,1/2".parse().unwrap();
        assert_eq!(b.to_string(), "-1,1;0,1/2");
        assert_eq!(b.center(), vec![Rat::ZERO, r(1, 4)]);
        assert!(matches!("1,0".parse::<InputBox>(), Err(Error::Interval { .. })));
        assert!("1".parse::<InputBox>().is_err());
    }
}
