//! Constructors for frequently needed programs, all expressed with the
//! ordinary node kinds.

use crate::error::{Error, Result};
use crate::ir::program::{Activation, Affine, Node, TotalProgram};
use crate::kernel::{BitVec, Rat};

fn rats(v: &[i64]) -> Vec<Rat> {
    v.iter().map(|&x| Rat::int(x)).collect()
}

/// bits[w] → bits[w], unchanged.
pub fn identity(width: usize) -> Node {
    Node::seq([Node::Decode(width), Node::Encode(width)])
}

/// bits[in_width] → the constant `out`.
pub fn constant(in_width: usize, out: &BitVec) -> Node {
    let k = out.width();
    Node::seq([
        Node::Decode(in_width),
        Node::Affine(
            Affine::new(vec![vec![Rat::ZERO; in_width]; k], out.to_rats())
                .expect("constant map is well formed"),
        ),
        Node::Encode(k),
    ])
}

/// bits[width] → bits[len], the window `start..start+len`.
pub fn slice(width: usize, start: usize, len: usize) -> Node {
    assert!(start + len <= width);
    let matrix = (0..len)
        .map(|r| {
            (0..width)
                .map(|c| if c == start + r { Rat::ONE } else { Rat::ZERO })
                .collect()
        })
        .collect();
    Node::seq([
        Node::Decode(width),
        Node::Affine(Affine::new(matrix, vec![Rat::ZERO; len]).expect("slice is well formed")),
        Node::Encode(len),
    ])
}

/// bits[width] → bits[width], every bit flipped.
pub fn bit_flip(width: usize) -> Node {
    let matrix = (0..width)
        .map(|r| {
            (0..width)
                .map(|c| if c == r { Rat::int(-1) } else { Rat::ZERO })
                .collect()
        })
        .collect();
    Node::seq([
        Node::Decode(width),
        Node::Affine(Affine::new(matrix, vec![Rat::ONE; width]).expect("flip is well formed")),
        Node::Encode(width),
    ])
}

/// bits[width] → bits[1]: 1 iff the first `prefix.width()` bits differ from
/// `prefix`.
pub fn prefix_differs(width: usize, prefix: &BitVec) -> Node {
    let mut coefs = vec![Rat::ZERO; width];
    let mut ones = 0;
    for (k, bit) in prefix.iter().enumerate() {
        if bit {
            coefs[k] = Rat::int(-1);
            ones += 1;
        } else {
            coefs[k] = Rat::ONE;
        }
    }
    // Hamming distance to `prefix`; the ½ encode threshold tests distance ≥ 1.
    Node::seq([
        Node::Decode(width),
        Node::Affine(Affine::new(vec![coefs], vec![Rat::int(ones)]).expect("well formed")),
        Node::Encode(1),
    ])
}

/// bits[2n] → bits[1]: 1 iff the two halves are equal.
pub fn halves_equal(n: usize) -> Node {
    let mut rows = Vec::with_capacity(2 * n);
    for k in 0..n {
        let mut up = vec![Rat::ZERO; 2 * n];
        up[k] = Rat::ONE;
        up[n + k] = Rat::int(-1);
        let down = up.iter().map(|v| -v).collect();
        rows.push(up);
        rows.push(down);
    }
    Node::seq([
        Node::Decode(2 * n),
        Node::Affine(Affine::new(rows, vec![Rat::ZERO; 2 * n]).expect("well formed")),
        Node::Act(Activation::Relu),
        // ½ − Σ|a_k − b_k|
        Node::Affine(
            Affine::new(vec![vec![Rat::int(-1); 2 * n]], vec![Rat::new(1, 2)]).expect("well formed"),
        ),
        Node::Encode(1),
    ])
}

/// bits[width] → bits[1]: parity of the bits at `indices`, optionally negated.
///
/// With s the number of set bits, Σ_{t=1..n} (−1)^{t+1}·step(s − t) is 1
/// exactly when s is odd.
pub fn parity(width: usize, indices: &[usize], negate: bool) -> Node {
    let n = indices.len().max(1);
    let mut sum_row = vec![Rat::ZERO; width];
    for &k in indices {
        sum_row[k] = Rat::ONE;
    }
    let rows = vec![sum_row; n];
    let bias = (1..=n as i64).map(|t| Rat::int(-t)).collect();
    let signs: Vec<Rat> = (0..n)
        .map(|t| {
            let s = if t % 2 == 0 { 1 } else { -1 };
            Rat::int(if negate { -s } else { s })
        })
        .collect();
    let out_bias = if negate { Rat::ONE } else { Rat::ZERO };
    Node::seq([
        Node::Decode(width),
        Node::Affine(Affine::new(rows, bias).expect("well formed")),
        Node::Act(Activation::Step),
        Node::Affine(Affine::new(vec![signs], vec![out_bias]).expect("well formed")),
        Node::Encode(1),
    ])
}

/// bits[in_width] → bits[out_width] given by an explicit table indexed by
/// the input's value (lexicographic order).
///
/// Built as a one-hot layer: row e computes relu(Σ literal − (L − 1)),
/// which is 1 on input e and 0 elsewhere.
pub fn lookup_table(in_width: usize, out_width: usize, table: &[BitVec]) -> Result<Node> {
    if in_width >= 20 || table.len() != 1usize << in_width {
        return Err(Error::Invalid(format!(
            "lookup table for {in_width} input bits needs {} rows, got {}",
            1u64 << in_width.min(63),
            table.len()
        )));
    }
    if let Some(bad) = table.iter().find(|t| t.width() != out_width) {
        return Err(Error::width(out_width, bad.width()));
    }
    let l = in_width as i64;
    let mut rows = Vec::with_capacity(table.len());
    let mut bias = Vec::with_capacity(table.len());
    for key in BitVec::enumerate(in_width) {
        let zeros = key.iter().filter(|b| !b).count() as i64;
        rows.push(rats(&key.iter().map(|b| if b { 1 } else { -1 }).collect::<Vec<_>>()));
        bias.push(Rat::int(zeros - (l - 1)));
    }
    let out_rows = (0..out_width)
        .map(|j| {
            table
                .iter()
                .map(|t| if t.get(j) { Rat::ONE } else { Rat::ZERO })
                .collect()
        })
        .collect();
    Ok(Node::seq([
        Node::Decode(in_width),
        Node::Affine(Affine::new(rows, bias)?),
        Node::Act(Activation::Relu),
        Node::Affine(Affine::new(out_rows, vec![Rat::ZERO; out_width])?),
        Node::Encode(out_width),
    ]))
}

/// Evaluates `p` on every input and returns the table (for small widths).
pub fn tabulate(p: &TotalProgram) -> Result<Vec<BitVec>> {
    BitVec::enumerate(p.in_width())
        .map(|i| p.eval(&i).map(|(o, _)| o))
        .collect()
}
