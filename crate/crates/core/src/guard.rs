//! Output guards: program-to-program transformations that make a model
//! aligned, misaligned, or range-bounded by construction.

use crate::error::{Error, Result};
use crate::ir::build;
use crate::ir::{Activation, Node, Sort, TotalProgram};
use crate::kernel::{check_nontrivial, Judge, Rat};

fn check_shapes(m: &TotalProgram, j: &Judge) -> Result<()> {
    if !m.is_bit_program() {
        return Err(Error::structure("guards need a bits → bits model"));
    }
    if m.in_width() != j.in_width() {
        return Err(Error::width(j.in_width(), m.in_width()));
    }
    if m.out_width() != j.out_width() {
        return Err(Error::width(j.out_width(), m.out_width()));
    }
    Ok(())
}

/// m′(i) = m(i) if j(i, m(i)) = 1, otherwise the judge's witness o⁺(i).
pub fn filter(m: &TotalProgram, j: &Judge, max_l: usize) -> Result<TotalProgram> {
    check_shapes(m, j)?;
    check_nontrivial(j, j.in_width(), max_l)?;
    let witness = j.witness().expect("accepted judges carry a witness");
    let node = Node::select(
        m.root().clone(),
        j.predicate_program().root().clone(),
        witness.root().clone(),
    );
    TotalProgram::bits(node, m.in_width(), m.out_width())
}

/// m″(i⁻) = o⁻ and m″(i) = m(i) elsewhere.
pub fn misalign(m: &TotalProgram, j: &Judge, max_l: usize) -> Result<TotalProgram> {
    check_shapes(m, j)?;
    check_nontrivial(j, j.in_width(), max_l)?;
    let (neg_i, neg_o) = j.negative_example().expect("accepted judges carry a negative example");
    let l = m.in_width();
    // Keep m's output exactly when the input differs from i⁻.
    let keep = build::prefix_differs(l + m.out_width(), neg_i);
    let node = Node::select(m.root().clone(), keep, build::constant(l, neg_o));
    TotalProgram::bits(node, l, m.out_width())
}

/// Inserts clip(a, b) right before the model's final encode, or appends it
/// to a vector-output model.
pub fn clip_guard(m: &TotalProgram, lo: Rat, hi: Rat) -> Result<TotalProgram> {
    let clip = Node::Act(Activation::clip(lo, hi)?);
    let root = match m.root() {
        Node::Seq(children) if matches!(children.last(), Some(Node::Encode(_))) => {
            let mut children = children.clone();
            let encode = children.pop().expect("checked non-empty");
            children.push(clip);
            children.push(encode);
            Node::Seq(children)
        }
        _ if matches!(m.output_sort(), Sort::Vector(_)) => Node::seq([m.root().clone(), clip]),
        _ => {
            return Err(Error::structure(
                "clip guard needs a vector output or a sequence ending in encode",
            ))
        }
    };
    TotalProgram::with_input(root, m.input_sort())
}
