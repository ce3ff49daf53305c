//! Reference implementations used as test oracles. Nothing here calls the
//! library's evaluators or solvers; only its data types are shared.
#![allow(dead_code)]

use std::collections::BTreeSet;

use dgkit::diagonal::{Asm, MicroProgram};
use dgkit::ir::{Activation, Node};
use dgkit::kernel::JudgeBody;
use dgkit::verifier::halting::{ClosureVerdict, HaltingVerdict};
use dgkit::{AgentLoop, BitVec, InputBox, Judge, LinearFormula, PwlNetwork, Rat};

// ---------------------------------------------------------------- IR

#[derive(Debug, Clone, PartialEq)]
pub enum Val {
    Bits(Vec<bool>),
    Vector(Vec<Rat>),
}

fn bits_of(b: &BitVec) -> Vec<bool> {
    b.iter().collect()
}

/// Straightforward recursive interpreter for the total IR.
pub fn ref_eval(node: &Node, input: Val) -> Val {
    match node {
        Node::Decode(_) => match input {
            Val::Bits(b) => Val::Vector(b.iter().map(|&x| Rat::int(x as i64)).collect()),
            v => panic!("decode of {v:?}"),
        },
        Node::Encode(_) => match input {
            Val::Vector(v) => Val::Bits(v.iter().map(|z| *z >= Rat::new(1, 2)).collect()),
            b => panic!("encode of {b:?}"),
        },
        Node::Affine(a) => {
            let Val::Vector(x) = input else { panic!("affine of bits") };
            Val::Vector(
                a.matrix()
                    .iter()
                    .zip(a.bias())
                    .map(|(row, b)| {
                        let mut acc = b.clone();
                        for (w, xi) in row.iter().zip(&x) {
                            acc = acc + w * xi;
                        }
                        acc
                    })
                    .collect(),
            )
        }
        Node::Act(act) => {
            let Val::Vector(x) = input else { panic!("activation of bits") };
            Val::Vector(
                x.into_iter()
                    .map(|z| match act {
                        Activation::Relu => if z < Rat::ZERO { Rat::ZERO } else { z },
                        Activation::Sign => Rat::int(if z < Rat::ZERO { -1 } else if z == Rat::ZERO { 0 } else { 1 }),
                        Activation::Step => Rat::int(if z < Rat::ZERO { 0 } else { 1 }),
                        Activation::Clip(lo, hi) => {
                            if z < *lo { lo.clone() } else if z > *hi { hi.clone() } else { z }
                        }
                    })
                    .collect(),
            )
        }
        Node::Seq(cs) => cs.iter().fold(input, |v, c| ref_eval(c, v)),
        Node::Parallel(cs) => {
            let outs: Vec<Val> = cs.iter().map(|c| ref_eval(c, input.clone())).collect();
            if matches!(outs[0], Val::Bits(_)) {
                Val::Bits(outs.into_iter().flat_map(|v| match v { Val::Bits(b) => b, _ => panic!() }).collect())
            } else {
                Val::Vector(outs.into_iter().flat_map(|v| match v { Val::Vector(x) => x, _ => panic!() }).collect())
            }
        }
        Node::Repeat(r) => {
            let mut state = input;
            for _ in 0..r.theta {
                state = ref_eval(&r.body, state);
                if ref_eval(&r.terminal_pred, state.clone()) == Val::Bits(vec![true]) {
                    return state;
                }
            }
            Val::Bits(bits_of(&r.terminal_output))
        }
        Node::Select(s) => {
            let Val::Bits(i) = input else { panic!("select of a vector") };
            let Val::Bits(o) = ref_eval(&s.model, Val::Bits(i.clone())) else { panic!() };
            let mut pair = i.clone();
            pair.extend(&o);
            if ref_eval(&s.judge, Val::Bits(pair)) == Val::Bits(vec![true]) {
                Val::Bits(o)
            } else {
                ref_eval(&s.fallback, Val::Bits(i))
            }
        }
    }
}

pub fn ref_eval_bits(node: &Node, input: &BitVec) -> BitVec {
    match ref_eval(node, Val::Bits(bits_of(input))) {
        Val::Bits(b) => BitVec::from_bits(&b).unwrap(),
        v => panic!("expected bits, got {v:?}"),
    }
}

fn formula_holds(f: &LinearFormula, x: &[Rat]) -> bool {
    match f {
        LinearFormula::Atom(a) => {
            let mut acc = a.constant.clone();
            for (c, xi) in a.coefs.iter().zip(x) {
                acc = acc + c * xi;
            }
            acc >= Rat::ZERO
        }
        LinearFormula::And(fs) => fs.iter().all(|g| formula_holds(g, x)),
        LinearFormula::Or(fs) => fs.iter().any(|g| formula_holds(g, x)),
    }
}

pub fn ref_judge(j: &Judge, i: &BitVec, o: &BitVec) -> bool {
    match j.body() {
        JudgeBody::Predicate(p) => ref_eval_bits(p.root(), &i.concat(o).unwrap()).get(0),
        JudgeBody::Linear(f) => {
            let x: Vec<Rat> = i.iter().chain(o.iter()).map(|b| Rat::int(b as i64)).collect();
            formula_holds(f, &x)
        }
    }
}

/// First violating (input, output) in lexicographic input order.
pub fn truth_table_violation(m: &Node, j: &Judge, l: usize) -> Option<(BitVec, BitVec)> {
    (0..1u64 << l).find_map(|v| {
        let i = BitVec::new(l, v).unwrap();
        let o = ref_eval_bits(m, &i);
        (!ref_judge(j, &i, &o)).then_some((i, o))
    })
}

// ---------------------------------------------------------------- regions

/// Exact two-phase simplex over z ≥ 0: maximize `obj·z` subject to
/// `rows[k].0 · z ≤ rows[k].1`. Returns `None` when infeasible.
fn simplex_max(rows: &[(Vec<Rat>, Rat)], obj: &[Rat]) -> Option<Rat> {
    let nz = obj.len();
    let m = rows.len();
    let negatives: Vec<usize> = (0..m).filter(|&k| rows[k].1 < Rat::ZERO).collect();
    let n = nz + m + negatives.len();
    let mut t: Vec<Vec<Rat>> = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    for (k, (g, h)) in rows.iter().enumerate() {
        let mut row = vec![Rat::ZERO; n];
        row[..nz].clone_from_slice(g);
        row[nz + k] = Rat::ONE;
        let mut b = h.clone();
        if let Some(a) = negatives.iter().position(|&q| q == k) {
            for v in row.iter_mut() {
                *v = -&*v;
            }
            b = -b;
            row[nz + m + a] = Rat::ONE;
            basis.push(nz + m + a);
        } else {
            basis.push(nz + k);
        }
        t.push(row);
        rhs.push(b);
    }
    let artificial = |j: usize| j >= nz + m;

    let run = |t: &mut Vec<Vec<Rat>>, rhs: &mut Vec<Rat>, basis: &mut Vec<usize>, cost: &[Rat], allow_art: bool| -> Rat {
        loop {
            let mut enter = None;
            for j in 0..n {
                if (!allow_art && artificial(j)) || basis.contains(&j) {
                    continue;
                }
                let mut rc = cost[j].clone();
                for (i, &b) in basis.iter().enumerate() {
                    if !t[i][j].is_zero() {
                        rc = rc - &cost[b] * &t[i][j];
                    }
                }
                if rc > Rat::ZERO {
                    enter = Some(j);
                    break;
                }
            }
            let Some(j) = enter else {
                return basis.iter().zip(rhs.iter()).map(|(&b, r)| &cost[b] * r).sum();
            };
            let mut leave: Option<(usize, Rat)> = None;
            for i in 0..t.len() {
                if t[i][j] > Rat::ZERO {
                    let ratio = &rhs[i] / &t[i][j];
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let (r, _) = leave.expect("bounded program");
            let p = t[r][j].clone();
            for v in t[r].iter_mut() {
                *v = &*v / &p;
            }
            rhs[r] = &rhs[r] / &p;
            for i in 0..t.len() {
                if i != r && !t[i][j].is_zero() {
                    let f = t[i][j].clone();
                    for c in 0..n {
                        if !t[r][c].is_zero() {
                            t[i][c] = &t[i][c] - &(&f * &t[r][c]);
                        }
                    }
                    rhs[i] = &rhs[i] - &(&f * &rhs[r]);
                }
            }
            basis[r] = j;
        }
    };

    if !negatives.is_empty() {
        let mut cost = vec![Rat::ZERO; n];
        for c in cost.iter_mut().skip(nz + m) {
            *c = Rat::int(-1);
        }
        if run(&mut t, &mut rhs, &mut basis, &cost, true) < Rat::ZERO {
            return None;
        }
        // pivot remaining zero-level artificials out where possible
        for i in 0..m {
            if artificial(basis[i]) {
                if let Some(j) = (0..nz + m).find(|&j| !t[i][j].is_zero() && !basis.contains(&j)) {
                    let p = t[i][j].clone();
                    for v in t[i].iter_mut() {
                        *v = &*v / &p;
                    }
                    rhs[i] = &rhs[i] / &p;
                    for k in 0..m {
                        if k != i && !t[k][j].is_zero() {
                            let f = t[k][j].clone();
                            for c in 0..n {
                                t[k][c] = &t[k][c] - &(&f * &t[i][c]);
                            }
                            rhs[k] = &rhs[k] - &(&f * &rhs[i]);
                        }
                    }
                    basis[i] = j;
                }
            }
        }
    }
    let mut cost = vec![Rat::ZERO; n];
    cost[..nz].clone_from_slice(obj);
    Some(run(&mut t, &mut rhs, &mut basis, &cost, false))
}

/// Whether {x in box : row·x + c ≥ 0 (or > 0 when strict)} has interior.
pub fn has_interior(rows: &[(Vec<Rat>, Rat, bool)], domain: &InputBox) -> bool {
    let d = domain.dim();
    let lows: Vec<Rat> = domain.bounds().iter().map(|b| b.0.clone()).collect();
    // variables x' = x − lo (d of them) and the slack margin t
    let mut lp: Vec<(Vec<Rat>, Rat)> = Vec::new();
    for (a, c, strict) in rows {
        let mut g: Vec<Rat> = a.iter().map(|v| -v).collect();
        g.push(if *strict { Rat::ONE } else { Rat::ZERO });
        let shifted = a.iter().zip(&lows).fold(c.clone(), |acc, (ai, li)| acc + ai * li);
        lp.push((g, shifted));
    }
    for (k, (lo, hi)) in domain.bounds().iter().enumerate() {
        let mut up = vec![Rat::ZERO; d + 1];
        up[k] = Rat::ONE;
        up[d] = Rat::ONE;
        lp.push((up, hi - lo));
        let mut down = vec![Rat::ZERO; d + 1];
        down[k] = Rat::int(-1);
        down[d] = Rat::ONE;
        lp.push((down, Rat::ZERO));
    }
    let mut cap = vec![Rat::ZERO; d + 1];
    cap[d] = Rat::ONE;
    lp.push((cap.clone(), Rat::ONE));
    matches!(simplex_max(&lp, &cap), Some(v) if v > Rat::ZERO)
}

/// Every activation pattern whose region has interior in the box.
pub fn brute_force_patterns(net: &PwlNetwork, domain: &InputBox) -> BTreeSet<Vec<bool>> {
    let n = net.neuron_count();
    let d = net.input_dim();
    let mut out = BTreeSet::new();
    for code in 0..1u64 << n {
        let pattern: Vec<bool> = (0..n).map(|k| code >> (n - 1 - k) & 1 == 1).collect();
        // current layer input as (rows, consts) over x
        let mut cur: Vec<(Vec<Rat>, Rat)> = (0..d)
            .map(|k| {
                let mut e = vec![Rat::ZERO; d];
                e[k] = Rat::ONE;
                (e, Rat::ZERO)
            })
            .collect();
        let mut rows = Vec::with_capacity(n);
        let mut idx = 0;
        for layer in net.hidden() {
            let mut next = Vec::with_capacity(layer.d_out());
            for (w, b) in layer.matrix().iter().zip(layer.bias()) {
                let mut a = vec![Rat::ZERO; d];
                let mut c = b.clone();
                for (wk, (ra, rc)) in w.iter().zip(&cur) {
                    for (ak, rak) in a.iter_mut().zip(ra) {
                        *ak = &*ak + &(wk * rak);
                    }
                    c = c + wk * rc;
                }
                let constant = a.iter().all(Rat::is_zero);
                if pattern[idx] {
                    rows.push((a.clone(), c.clone(), !constant));
                    next.push((a, c));
                } else {
                    rows.push((a.iter().map(|v| -v).collect(), -c, true));
                    next.push((vec![Rat::ZERO; d], Rat::ZERO));
                }
                idx += 1;
            }
            cur = next;
        }
        if has_interior(&rows, domain) {
            out.insert(pattern);
        }
    }
    out
}

// ---------------------------------------------------------------- agents

fn step(agent: &AgentLoop, state: &BitVec, input: &BitVec) -> BitVec {
    let out = ref_eval_bits(agent.step_model().root(), &state.concat(input).unwrap());
    out.slice(0, agent.state_width())
}

/// Floyd cycle detection on s_1, s_2, … (s_t after t iterations).
pub fn floyd_halting(agent: &AgentLoop, input: &BitVec, initial: &BitVec) -> HaltingVerdict {
    let f = |s: &BitVec| step(agent, s, input);
    let x0 = f(initial);
    let mut tortoise = f(&x0);
    let mut hare = f(&f(&x0));
    while tortoise != hare {
        tortoise = f(&tortoise);
        hare = f(&f(&hare));
    }
    let mut mu = 0u64;
    tortoise = x0;
    while tortoise != hare {
        tortoise = f(&tortoise);
        hare = f(&hare);
        mu += 1;
    }
    let mut lambda = 1u64;
    hare = f(&tortoise);
    while tortoise != hare {
        hare = f(&hare);
        lambda += 1;
    }
    let mut s = x0;
    for t in 1..=mu + lambda {
        if agent.is_final(&s) {
            return HaltingVerdict::Halts { steps: t };
        }
        s = f(&s);
    }
    HaltingVerdict::Diverges {
        cycle_start: mu + 1,
        cycle_length: lambda,
    }
}

/// Scans the whole transition table restricted to final states.
pub fn closure_scan(agent: &AgentLoop) -> ClosureVerdict {
    let finals: BTreeSet<u64> = agent.final_states().iter().map(BitVec::value).collect();
    for &s in &finals {
        let state = BitVec::new(agent.state_width(), s).unwrap();
        for v in 0..1u64 << agent.input_width() {
            let input = BitVec::new(agent.input_width(), v).unwrap();
            let successor = step(agent, &state, &input);
            if !finals.contains(&successor.value()) {
                return ClosureVerdict::Violation { state, input, successor };
            }
        }
    }
    ClosureVerdict::Closed
}

// ---------------------------------------------------------------- micro

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefOutcome {
    Halted(Vec<u8>, u64),
    Running,
}

/// Minimal interpreter for programs without CALLV, on i128 registers.
pub fn ref_run(code: &[u8], input: &[u8], fuel: u64) -> RefOutcome {
    let mut r = [0i128; 8];
    let mut bufs: [Vec<u8>; 8] = Default::default();
    let mut out = Vec::new();
    let (mut pc, mut inp, mut steps) = (0usize, 0usize, 0u64);
    let be32 = |at: usize| u32::from_be_bytes([code[at], code[at + 1], code[at + 2], code[at + 3]]);
    let buf = |v: i128| v.rem_euclid(8) as usize;
    loop {
        if pc == code.len() {
            return RefOutcome::Halted(out, steps);
        }
        if steps == fuel {
            return RefOutcome::Running;
        }
        steps += 1;
        let a = code.get(pc + 1).copied().unwrap_or(0) as usize;
        let b = code.get(pc + 2).copied().unwrap_or(0) as usize;
        match code[pc] {
            0x00 => return RefOutcome::Halted(out, steps),
            0x01 => {
                r[a] = be32(pc + 2) as i32 as i128;
                pc += 6;
            }
            0x02 => {
                r[a] = r[b];
                pc += 3;
            }
            0x03 => {
                r[a] += r[b];
                pc += 3;
            }
            0x04 => {
                r[a] -= r[b];
                pc += 3;
            }
            0x05 => pc = be32(pc + 1) as usize,
            0x06 => pc = if r[a] == 0 { be32(pc + 2) as usize } else { pc + 6 },
            0x07 => {
                r[a] = input.get(inp).map_or(-1, |&x| x as i128);
                inp += 1;
                pc += 2;
            }
            0x08 => {
                out.push(r[a].rem_euclid(256) as u8);
                pc += 2;
            }
            0x09 => {
                bufs[buf(r[a])].extend_from_slice(code);
                pc += 2;
            }
            0x0B => {
                let v = r[b].rem_euclid(256) as u8;
                bufs[buf(r[a])].push(v);
                pc += 3;
            }
            0x0C => {
                let c = code[pc + 3] as usize;
                let bb = &bufs[buf(r[b])];
                r[a] = usize::try_from(r[c]).ok().and_then(|k| bb.get(k)).map_or(-1, |&x| x as i128);
                pc += 4;
            }
            op => panic!("reference interpreter does not support opcode {op:#04x}"),
        }
    }
}

/// Machines for the reduction suite: 20 that halt on empty input and 5
/// that loop by construction.
pub fn reduction_machines() -> (Vec<MicroProgram>, Vec<MicroProgram>) {
    let mut halting = Vec::new();
    for k in 0..16 {
        let mut a = Asm::new();
        a.loadi(0, k * 7).loadi(1, 1);
        a.label("top").jz(0, "out").sub(0, 1).write(0).jmp("top");
        a.label("out").halt();
        halting.push(a.finish().unwrap());
    }
    for k in 0..4 {
        let mut a = Asm::new();
        for v in 0..=k {
            a.loadi(2, v).write(2);
        }
        if k % 2 == 0 {
            a.halt();
        }
        halting.push(a.finish().unwrap());
    }
    let mut looping = Vec::new();
    let mut a = Asm::new();
    a.label("spin").jmp("spin");
    looping.push(a.finish().unwrap());
    let mut a = Asm::new();
    a.loadi(0, 0).label("z").jz(0, "z");
    looping.push(a.finish().unwrap());
    let mut a = Asm::new();
    a.loadi(1, 1).label("up").add(0, 1).jmp("up");
    looping.push(a.finish().unwrap());
    let mut a = Asm::new();
    a.label("a").loadi(3, 5).jmp("b").label("b").write(3).jmp("a");
    looping.push(a.finish().unwrap());
    let mut a = Asm::new();
    a.loadi(0, 3).loadi(1, 1).label("top").sub(0, 1).jz(0, "top").jmp("top");
    looping.push(a.finish().unwrap());
    (halting, looping)
}
