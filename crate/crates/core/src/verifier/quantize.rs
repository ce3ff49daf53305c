//! Grid quantization of a piecewise-linear network into a bit model, so the
//! same linear judge can be checked both region-wise over the box and
//! exhaustively over grid points.
//!
//! Input k is sampled at lo_k + step_k·n for n in 0..2^b with
//! step_k = (hi_k − lo_k)/(2^b − 1). Each output y is emitted in fixed point
//! as the unsigned integer D·y − offset, where D clears every denominator the
//! network can produce on the grid and the offset comes from interval bounds,
//! stretched to reach the judge's thresholds and then widened by their span.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::ir::build;
use crate::ir::{Activation, Affine, Node, TotalProgram};
use crate::kernel::{BitVec, Judge, LinearAtom, LinearFormula, Rat};
use crate::verifier::pwl::{InputBox, PwlNetwork};

/// Output candidates are enumerated in full up to this many bits.
const FULL_OUTPUT_SEARCH_BITS: usize = 12;

#[derive(Debug, Clone)]
pub struct QuantizedInstance {
    pub model: TotalProgram,
    pub judge: Judge,
    pub grid_bits: usize,
    /// Bit width of each output's fixed-point field.
    pub out_bits: Vec<usize>,
    pub scale: Rat,
    pub offsets: Vec<Rat>,
    lows: Vec<Rat>,
    steps: Vec<Rat>,
}

impl QuantizedInstance {
    pub fn in_width(&self) -> usize {
        self.lows.len() * self.grid_bits
    }

    pub fn out_width(&self) -> usize {
        self.out_bits.iter().sum()
    }

    /// The rational grid point encoded by `input`.
    pub fn grid_input(&self, input: &BitVec) -> Vec<Rat> {
        let b = self.grid_bits;
        (0..self.lows.len())
            .map(|k| {
                let n = Rat::int(input.slice(k * b, b).value() as i64);
                &self.lows[k] + &(&self.steps[k] * &n)
            })
            .collect()
    }

    /// The rational outputs encoded by `output`.
    pub fn decode_output(&self, output: &BitVec) -> Vec<Rat> {
        let mut at = 0;
        self.out_bits
            .iter()
            .zip(&self.offsets)
            .map(|(&w, off)| {
                let u = Rat::int(output.slice(at, w).value() as i64);
                at += w;
                &(off + &u) / &self.scale
            })
            .collect()
    }
}

fn big_to_rat(v: BigInt) -> Rat {
    Rat::from(v)
}

/// Denominator that every layer value takes on grid inputs, given the
/// denominator of the previous layer's values.
fn layer_denominator(layer: &Affine, prev: &BigInt) -> BigInt {
    let w = Rat::lcm_denominators(layer.matrix().iter().flatten());
    let b = Rat::lcm_denominators(layer.bias());
    (w * prev).lcm(&b)
}

fn interval_layer(layer: &Affine, bounds: &[(Rat, Rat)]) -> Vec<(Rat, Rat)> {
    layer
        .matrix()
        .iter()
        .zip(layer.bias())
        .map(|(row, b)| {
            let mut lo = b.clone();
            let mut hi = b.clone();
            for (w, (l, h)) in row.iter().zip(bounds) {
                if w.is_zero() {
                    continue;
                }
                let (a, c) = (w * l, w * h);
                lo = lo + a.clone().min(c.clone());
                hi = hi + a.max(c);
            }
            (lo, hi)
        })
        .collect()
}

fn bit_length(v: &BigInt) -> usize {
    (v.bits() as usize).max(1)
}

pub fn quantize(net: &PwlNetwork, domain: &InputBox, judge: &Judge, grid_bits: usize) -> Result<QuantizedInstance> {
    let d = net.input_dim();
    if domain.dim() != d {
        return Err(Error::width(d, domain.dim()));
    }
    let formula = judge
        .formula()
        .ok_or_else(|| Error::JudgeKind(format!("judge `{}` is not linear", judge.name())))?;
    if judge.in_width() != d || judge.out_width() != net.output_dim() {
        return Err(Error::width(d + net.output_dim(), judge.in_width() + judge.out_width()));
    }
    if grid_bits == 0 || d * grid_bits > 24 {
        return Err(Error::Invalid(format!("grid of {grid_bits} bits per input is out of range")));
    }
    let b = grid_bits;
    let l = d * b;
    let top = Rat::int((1i64 << b) - 1);
    let lows: Vec<Rat> = domain.bounds().iter().map(|(lo, _)| lo.clone()).collect();
    let steps: Vec<Rat> = domain.bounds().iter().map(|(lo, hi)| &(hi - lo) / &top).collect();

    // bits → grid point
    let mut rows = vec![vec![Rat::ZERO; l]; d];
    for k in 0..d {
        for t in 0..b {
            rows[k][k * b + t] = &steps[k] * &Rat::int(1i64 << (b - 1 - t));
        }
    }
    let to_grid = Affine::new(rows, lows.clone())?;

    let mut denom = Rat::lcm_denominators(lows.iter().chain(&steps));
    let mut bounds: Vec<(Rat, Rat)> = domain.bounds().to_vec();
    for layer in net.hidden() {
        denom = layer_denominator(layer, &denom);
        bounds = interval_layer(layer, &bounds)
            .into_iter()
            .map(|(lo, hi)| (lo.max(Rat::ZERO), hi.max(Rat::ZERO)))
            .collect();
    }
    denom = layer_denominator(net.output(), &denom);
    let out_bounds = interval_layer(net.output(), &bounds);
    let scale = big_to_rat(denom);

    let reach = judge_reach(formula, domain, &out_bounds);
    let mut offsets = Vec::new();
    let mut out_bits = Vec::new();
    for ((lo, hi), r) in out_bounds.iter().zip(&reach) {
        // padded by the span on each side so judges bounding the output
        // near its range have rejected encodings
        let lo = lo.clone().min(-r);
        let hi = hi.clone().max(r.clone());
        let pad = (&scale * &hi).ceil() - (&scale * &lo).floor() + BigInt::one();
        let low = (&scale * &lo).floor() - &pad;
        let high = (&scale * &hi).ceil() + &pad;
        out_bits.push(bit_length(&(&high - &low)));
        offsets.push(big_to_rat(low));
    }
    let k_total: usize = out_bits.iter().sum();
    if l + k_total > 64 {
        return Err(Error::ResourceExceeded {
            budget: "fixed-point-width",
            limit: 64,
        });
    }

    let model = TotalProgram::bits(
        Node::seq(model_nodes(net, &to_grid, &scale, &offsets, &out_bits)),
        l,
        k_total,
    )?;

    let bit_formula = rewrite(formula, d, &to_grid, &scale, &offsets, &out_bits);
    let mut inst = QuantizedInstance {
        model,
        judge: Judge::linear(format!("{}-q", judge.name()), l, k_total, bit_formula.clone(), None, None)?,
        grid_bits: b,
        out_bits,
        scale,
        offsets,
        lows,
        steps,
    };
    let (witness, negative) = find_witnesses(&bit_formula, l, &inst.out_bits);
    inst.judge = Judge::linear(format!("{}-q", judge.name()), l, k_total, bit_formula, witness, negative)?;
    Ok(inst)
}

/// For each output, a magnitude past which every atom mentioning it is
/// decided by that output alone, given the other variables' ranges.
fn judge_reach(f: &LinearFormula, domain: &InputBox, out_bounds: &[(Rat, Rat)]) -> Vec<Rat> {
    let d = domain.dim();
    let ranges: Vec<Rat> = domain
        .bounds()
        .iter()
        .chain(out_bounds)
        .map(|(lo, hi)| lo.abs().max(hi.abs()))
        .collect();
    let mut reach = vec![Rat::ZERO; out_bounds.len()];
    for a in f.atoms() {
        for (m, r) in reach.iter_mut().enumerate() {
            let c = &a.coefs[d + m];
            if c.is_zero() {
                continue;
            }
            let rest = a
                .coefs
                .iter()
                .zip(&ranges)
                .enumerate()
                .filter(|&(j, _)| j != d + m)
                .fold(a.constant.abs(), |acc, (_, (cj, rj))| acc + &(cj.abs() * rj));
            let need = &(&rest / &c.abs()) + &Rat::ONE;
            if need > *r {
                *r = need;
            }
        }
    }
    reach
}

fn model_nodes(net: &PwlNetwork, to_grid: &Affine, scale: &Rat, offsets: &[Rat], out_bits: &[usize]) -> Vec<Node> {
    let l = to_grid.d_in();
    let m = offsets.len();
    let mut nodes = vec![Node::Decode(l)];
    let mut pending = to_grid.clone();
    for layer in net.hidden() {
        nodes.push(Node::Affine(layer.compose(&pending)));
        nodes.push(Node::Act(Activation::Relu));
        pending = Affine::identity(layer.d_out());
    }
    // u = D·y − offset
    let out = net.output().compose(&pending);
    let rows = out
        .matrix()
        .iter()
        .map(|row| row.iter().map(|w| w * scale).collect())
        .collect();
    let bias = out
        .bias()
        .iter()
        .zip(offsets)
        .map(|(b, off)| &(b * scale) - off)
        .collect();
    nodes.push(Node::Affine(Affine::new(rows, bias).expect("output rows")));

    // Peel bits most-significant first: b = step(u − 2^w), u ← u − 2^w·b.
    let mut width = m;
    for (j, &bits) in out_bits.iter().enumerate() {
        for t in 0..bits {
            let weight = Rat::from(BigInt::one() << (bits - 1 - t));
            let mut probe = vec![Rat::ZERO; width];
            probe[j] = Rat::ONE;
            nodes.push(Node::parallel([
                Node::Affine(Affine::identity(width)),
                Node::seq([
                    Node::Affine(Affine::new(vec![probe], vec![-&weight]).expect("probe row")),
                    Node::Act(Activation::Step),
                ]),
            ]));
            let mut update = Affine::identity(width + 1).matrix().to_vec();
            update[j][width] = -weight;
            update.pop();
            let mut keep = vec![Rat::ZERO; width + 1];
            keep[width] = Rat::ONE;
            update.push(keep);
            width += 1;
            nodes.push(Node::Affine(Affine::new(update, vec![Rat::ZERO; width]).expect("update rows")));
        }
    }
    let select = (m..width)
        .map(|c| {
            let mut row = vec![Rat::ZERO; width];
            row[c] = Rat::ONE;
            row
        })
        .collect();
    nodes.push(Node::Affine(
        Affine::new(select, vec![Rat::ZERO; width - m]).expect("select rows"),
    ));
    nodes.push(Node::Encode(width - m));
    nodes
}

/// Re-expresses an atom over (x, o) as an atom over (input bits, output bits).
fn rewrite_atom(atom: &LinearAtom, d: usize, to_grid: &Affine, scale: &Rat, offsets: &[Rat], out_bits: &[usize]) -> LinearAtom {
    let l = to_grid.d_in();
    let k: usize = out_bits.iter().sum();
    let mut coefs = vec![Rat::ZERO; l + k];
    let mut constant = atom.constant.clone();
    for (c, (row, b)) in atom.coefs[..d].iter().zip(to_grid.matrix().iter().zip(to_grid.bias())) {
        if c.is_zero() {
            continue;
        }
        constant = constant + c * b;
        for (acc, w) in coefs.iter_mut().zip(row) {
            *acc = &*acc + &(c * w);
        }
    }
    let mut at = l;
    for (j, &bits) in out_bits.iter().enumerate() {
        let c = &atom.coefs[d + j] / scale;
        constant = constant + &c * &offsets[j];
        for t in 0..bits {
            coefs[at + t] = &c * &Rat::from(BigInt::one() << (bits - 1 - t));
        }
        at += bits;
    }
    LinearAtom::new(constant, coefs)
}

fn rewrite(f: &LinearFormula, d: usize, to_grid: &Affine, scale: &Rat, offsets: &[Rat], out_bits: &[usize]) -> LinearFormula {
    match f {
        LinearFormula::Atom(a) => LinearFormula::Atom(rewrite_atom(a, d, to_grid, scale, offsets, out_bits)),
        LinearFormula::And(cs) => LinearFormula::And(
            cs.iter()
                .map(|c| rewrite(c, d, to_grid, scale, offsets, out_bits))
                .collect(),
        ),
        LinearFormula::Or(cs) => LinearFormula::Or(
            cs.iter()
                .map(|c| rewrite(c, d, to_grid, scale, offsets, out_bits))
                .collect(),
        ),
    }
}

fn output_candidates(out_bits: &[usize]) -> Vec<BitVec> {
    let k: usize = out_bits.iter().sum();
    if k <= FULL_OUTPUT_SEARCH_BITS {
        return BitVec::enumerate(k).collect();
    }
    // each coordinate at its low end, middle or high end
    let mut codes = vec![0u64];
    for &w in out_bits {
        let max = u64::MAX >> (64 - w);
        codes = codes
            .iter()
            .flat_map(|c| [0, 1 << (w - 1), max].map(|v| (c << w) | v))
            .collect();
    }
    codes
        .into_iter()
        .map(|c| BitVec::new(k, c).expect("k ≤ 64"))
        .collect()
}

/// A positive witness (a constant when one output suits every input, else a
/// lookup table) and the first rejected pair, each if one exists.
fn find_witnesses(f: &LinearFormula, l: usize, out_bits: &[usize]) -> (Option<Node>, Option<(BitVec, BitVec)>) {
    let k: usize = out_bits.iter().sum();
    let candidates = output_candidates(out_bits);
    let holds = |i: &BitVec, o: &BitVec| {
        let mut x = i.to_rats();
        x.extend(o.to_rats());
        f.holds(&x)
    };
    let mut negative = None;
    let mut table = Vec::with_capacity(1 << l);
    for i in BitVec::enumerate(l) {
        if negative.is_none() {
            negative = candidates.iter().find(|o| !holds(&i, o)).map(|o| (i, *o));
        }
        match candidates.iter().find(|o| holds(&i, o)) {
            Some(o) => table.push(*o),
            None => return (None, negative),
        }
    }
    let shared = candidates
        .iter()
        .find(|o| BitVec::enumerate(l).all(|i| holds(&i, o)));
    let witness = match shared {
        Some(o) => Some(build::constant(l, o)),
        None => build::lookup_table(l, k, &table).ok(),
    };
    (witness, negative)
}

/// Exact integer value of a Rat known to be integral and small.
pub fn as_i64(r: &Rat) -> Option<i64> {
    if !r.is_integer() {
        return None;
    }
    let n = r.numer();
    if n.abs() > BigInt::from(i64::MAX) {
        return None;
    }
    n.to_i64()
}
