//! Floating-point preview of vector programs, for plotting and smoke checks.
//! Nothing here feeds a verdict.

use crate::error::{Error, Result};
use crate::ir::program::{Activation, Node};

/// Evaluates a vector → vector tree in f64, optionally finishing with a
/// logistic head.
pub fn eval_f64(node: &Node, x: &[f64], sigmoid_head: bool) -> Result<Vec<f64>> {
    let mut out = run(node, x.to_vec())?;
    if sigmoid_head {
        for v in &mut out {
            *v = 1.0 / (1.0 + (-*v).exp());
        }
    }
    Ok(out)
}

fn run(node: &Node, x: Vec<f64>) -> Result<Vec<f64>> {
    Ok(match node {
        Node::Affine(a) => a
            .matrix()
            .iter()
            .zip(a.bias())
            .map(|(row, b)| {
                row.iter().zip(&x).map(|(w, v)| w.to_f64() * v).sum::<f64>() + b.to_f64()
            })
            .collect(),
        Node::Act(act) => x
            .into_iter()
            .map(|z| match act {
                Activation::Relu => z.max(0.0),
                Activation::Sign => {
                    if z > 0.0 {
                        1.0
                    } else if z < 0.0 {
                        -1.0
                    } else {
                        0.0
                    }
                }
                Activation::Step => f64::from(u8::from(z >= 0.0)),
                Activation::Clip(lo, hi) => z.clamp(lo.to_f64(), hi.to_f64()),
            })
            .collect(),
        Node::Seq(cs) => {
            let mut v = x;
            for c in cs {
                v = run(c, v)?;
            }
            v
        }
        Node::Parallel(cs) => {
            let mut out = Vec::new();
            for c in cs {
                out.extend(run(c, x.clone())?);
            }
            out
        }
        _ => return Err(Error::structure("float preview handles vector nodes only")),
    })
}
