//! Seeded generators for random instances: bit models, judges, networks,
//! agents and micro programs. Equal seeds give equal instances.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagonal::{Instr, MicroProgram};
use crate::ir::{Activation, Affine, AgentLoop, Node, TotalProgram};
use crate::kernel::{BitVec, Judge, LinearAtom, LinearFormula, Rat};
use crate::verifier::{InputBox, PwlNetwork};

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Sampler {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn bitvec(&mut self, width: usize) -> BitVec {
        let v = if width == 0 { 0 } else { self.rng.random::<u64>() };
        BitVec::new(width, if width >= 64 { v } else { v & ((1u64 << width) - 1) })
            .expect("masked to width")
    }

    /// n/d with |n| ≤ 4 and d ∈ 1..=4.
    pub fn small_rat(&mut self) -> Rat {
        Rat::new(self.rng.random_range(-4..=4), self.rng.random_range(1..=4))
    }

    fn small_int(&mut self, bound: i64) -> Rat {
        Rat::int(self.rng.random_range(-bound..=bound))
    }

    fn affine(&mut self, d_out: usize, d_in: usize, bound: i64) -> Affine {
        let matrix = (0..d_out)
            .map(|_| (0..d_in).map(|_| self.small_int(bound)).collect())
            .collect();
        let bias = (0..d_out).map(|_| self.small_rat()).collect();
        Affine::new(matrix, bias).expect("nonzero dimensions")
    }

    fn activation(&mut self) -> Activation {
        match self.rng.random_range(0..4) {
            0 => Activation::Relu,
            1 => Activation::Sign,
            2 => Activation::Step,
            _ => {
                let lo = self.small_rat();
                let hi = lo.clone() + Rat::int(self.rng.random_range(0..=3));
                Activation::clip(lo, hi).expect("lo ≤ hi")
            }
        }
    }

    /// decode → affine → activation → affine → encode.
    pub fn layer(&mut self, in_width: usize, out_width: usize) -> Node {
        let hidden = self.rng.random_range(1..=6);
        Node::seq([
            Node::Decode(in_width),
            Node::Affine(self.affine(hidden, in_width, 2)),
            Node::Act(self.activation()),
            Node::Affine(self.affine(out_width, hidden, 2)),
            Node::Encode(out_width),
        ])
    }

    /// A random well-typed bits[in] → bits[out] tree using every node kind.
    pub fn bit_node(&mut self, in_width: usize, out_width: usize, depth: usize) -> Node {
        if depth == 0 {
            return self.layer(in_width, out_width);
        }
        match self.rng.random_range(0..5) {
            0 => self.layer(in_width, out_width),
            1 => {
                let mid = self.rng.random_range(1..=8);
                Node::seq([
                    self.bit_node(in_width, mid, depth - 1),
                    self.bit_node(mid, out_width, depth - 1),
                ])
            }
            2 if out_width >= 2 => {
                let left = self.rng.random_range(1..out_width);
                Node::parallel([
                    self.bit_node(in_width, left, depth - 1),
                    self.bit_node(in_width, out_width - left, depth - 1),
                ])
            }
            3 => Node::select(
                self.bit_node(in_width, out_width, depth - 1),
                self.bit_node(in_width + out_width, 1, depth - 1),
                self.bit_node(in_width, out_width, depth - 1),
            ),
            _ => {
                let theta = self.rng.random_range(1..=4);
                let body = self.bit_node(in_width, in_width, depth - 1);
                let pred = self.bit_node(in_width, 1, depth - 1);
                let terminal = self.bitvec(in_width);
                let looped = Node::repeat(body, theta, pred, terminal);
                if in_width == out_width {
                    looped
                } else {
                    Node::seq([looped, self.layer(in_width, out_width)])
                }
            }
        }
    }

    pub fn bit_model(&mut self, in_width: usize, out_width: usize) -> TotalProgram {
        let depth = self.rng.random_range(0..=2);
        let node = self.bit_node(in_width, out_width, depth);
        TotalProgram::bits(node, in_width, out_width).expect("generator emits well-typed trees")
    }

    /// A relu network with up to two hidden layers and `max_hidden` neurons.
    pub fn network(&mut self, input_dim: usize, max_hidden: usize) -> PwlNetwork {
        let total = self.rng.random_range(1..=max_hidden.max(1));
        let sizes = if total >= 2 && self.rng.random_bool(0.5) {
            let first = self.rng.random_range(1..total);
            vec![first, total - first]
        } else {
            vec![total]
        };
        let mut width = input_dim;
        let mut hidden = Vec::with_capacity(sizes.len());
        for n in sizes {
            hidden.push(self.affine(n, width, 3));
            width = n;
        }
        let out_dim = self.rng.random_range(1..=2);
        let output = self.affine(out_dim, width, 3);
        PwlNetwork::new(hidden, output).expect("layer widths chain")
    }

    /// A one-layer network whose neurons are relu(±(x_k − c)) with integer
    /// breakpoints on the box [0, 2^b − 1]^d, and a conjunctive range judge
    /// over its outputs with thresholds near the attained values.
    pub fn quantizable(&mut self, input_dim: usize, grid_bits: usize) -> (PwlNetwork, InputBox, Judge) {
        let top = (1i64 << grid_bits) - 1;
        let n = self.rng.random_range(1..=4);
        let mut rows = Vec::with_capacity(n);
        let mut bias = Vec::with_capacity(n);
        for _ in 0..n {
            let k = self.rng.random_range(0..input_dim);
            let s: i64 = if self.rng.random_bool(0.5) { 1 } else { -1 };
            let c = self.rng.random_range(0..=top);
            let mut row = vec![Rat::ZERO; input_dim];
            row[k] = Rat::int(s);
            rows.push(row);
            bias.push(Rat::int(-s * c));
        }
        let hidden = Affine::new(rows, bias).expect("nonzero dimensions");
        let out_dim = self.rng.random_range(1..=2);
        let output = Affine::new(
            (0..out_dim)
                .map(|_| (0..n).map(|_| self.small_rat()).collect())
                .collect(),
            (0..out_dim).map(|_| self.small_rat()).collect(),
        )
        .expect("nonzero dimensions");
        let net = PwlNetwork::new(vec![hidden], output).expect("layer widths chain");
        let domain = InputBox::cube(input_dim, Rat::ZERO, Rat::int(top)).expect("lo < hi");

        let probe: Vec<Rat> = (0..input_dim)
            .map(|_| Rat::int(self.rng.random_range(0..=top)))
            .collect();
        let at = net.eval(&probe);
        let arity = input_dim + out_dim;
        let mut atoms = Vec::new();
        for (m, y) in at.iter().enumerate() {
            let slack = Rat::new(self.rng.random_range(-2..=6), 2);
            let mut coefs = vec![Rat::ZERO; arity];
            // y ≥ value − slack or y ≤ value + slack
            let (sign, constant) = if self.rng.random_bool(0.5) {
                (Rat::ONE, -(y - &slack))
            } else {
                (Rat::int(-1), y + &slack)
            };
            coefs[input_dim + m] = sign;
            atoms.push(LinearFormula::Atom(LinearAtom::new(constant, coefs)));
        }
        let formula = if atoms.len() == 1 {
            atoms.pop().expect("one atom")
        } else {
            LinearFormula::And(atoms)
        };
        let judge = Judge::linear("range", input_dim, out_dim, formula, None, None)
            .expect("formula has the judge's arity");
        (net, domain, judge)
    }

    /// A random agent. Small state spaces get an arbitrary transition table,
    /// larger ones either a counter or a thresholded affine map.
    pub fn agent(&mut self, state_bits: usize, input_bits: usize, output_bits: usize, theta: u64) -> AgentLoop {
        let (s, i, o) = (state_bits, input_bits, output_bits);
        let step = if s + i <= 7 {
            let table: Vec<BitVec> = (0..1usize << (s + i)).map(|_| self.bitvec(s + o)).collect();
            crate::ir::build::lookup_table(s + i, s + o, &table).expect("table size matches")
        } else if self.rng.random_bool(0.5) {
            self.counter(s, i, o)
        } else {
            self.layer(s + i, s + o)
        };
        let count = self.rng.random_range(1..=4usize.min(1 << s.min(2)));
        let finals: Vec<BitVec> = (0..count).map(|_| self.bitvec(s)).collect();
        let terminal = self.bitvec(o);
        AgentLoop::new("random", step, s, i, o, theta, finals, Some(terminal))
            .expect("generated agent is well formed")
    }

    /// state' = state + 1 mod 2^s; the output is the low `o` state bits.
    fn counter(&mut self, s: usize, i: usize, o: usize) -> Node {
        let w = s + i;
        // carries a_j = [all bits after j are set], then the bits themselves
        let mut rows = Vec::with_capacity(2 * s);
        let mut bias = Vec::with_capacity(2 * s);
        for j in 0..s {
            let mut row = vec![Rat::ZERO; w];
            for cell in row.iter_mut().take(s).skip(j + 1) {
                *cell = Rat::ONE;
            }
            rows.push(row);
            bias.push(Rat::int(-((s - 1 - j) as i64)));
        }
        for j in 0..s {
            let mut row = vec![Rat::ZERO; w];
            row[j] = Rat::ONE;
            rows.push(row);
            bias.push(Rat::new(-1, 2));
        }
        // |b_j − a_j| as relu(b − a) + relu(a − b)
        let mut diff = Vec::with_capacity(2 * s);
        for j in 0..s {
            let mut up = vec![Rat::ZERO; 2 * s];
            up[s + j] = Rat::ONE;
            up[j] = Rat::int(-1);
            let down = up.iter().map(|c| -c).collect();
            diff.push(up);
            diff.push(down);
        }
        let mut out = Vec::with_capacity(s + o);
        for j in 0..s {
            let mut row = vec![Rat::ZERO; 2 * s];
            row[2 * j] = Rat::ONE;
            row[2 * j + 1] = Rat::ONE;
            out.push(row);
        }
        for k in 0..o {
            let mut row = vec![Rat::ZERO; 2 * s];
            let j = s.saturating_sub(o) + k;
            if j < s {
                row[2 * j] = Rat::ONE;
                row[2 * j + 1] = Rat::ONE;
            }
            out.push(row);
        }
        Node::seq([
            Node::Decode(w),
            Node::Affine(Affine::new(rows, bias).expect("well formed")),
            Node::Act(Activation::Step),
            Node::Affine(Affine::new(diff, vec![Rat::ZERO; 2 * s]).expect("well formed")),
            Node::Act(Activation::Relu),
            Node::Affine(Affine::new(out, vec![Rat::ZERO; s + o]).expect("well formed")),
            Node::Encode(s + o),
        ])
    }

    fn reg(&mut self) -> u8 {
        self.rng.random_range(0..8)
    }

    fn instr(&mut self, straight_line: bool) -> Instr {
        let kinds: &[u8] = if straight_line {
            &[1, 2, 3, 4, 7, 8, 9, 11, 12]
        } else {
            &[0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12]
        };
        match *kinds.choose(&mut self.rng).expect("non-empty") {
            0 => Instr::Halt,
            1 => Instr::LoadI(self.reg(), self.rng.random_range(-300..=300)),
            2 => Instr::Mov(self.reg(), self.reg()),
            3 => Instr::Add(self.reg(), self.reg()),
            4 => Instr::Sub(self.reg(), self.reg()),
            5 => Instr::Jmp(0),
            6 => Instr::Jz(self.reg(), 0),
            7 => Instr::Read(self.reg()),
            8 => Instr::Write(self.reg()),
            9 => Instr::SelfCode(self.reg()),
            10 => Instr::CallV {
                code: self.reg(),
                input: self.reg(),
                fuel: self.reg(),
                output: self.reg(),
            },
            11 => Instr::BPush(self.reg(), self.reg()),
            _ => Instr::BLoad(self.reg(), self.reg(), self.reg()),
        }
    }

    /// Instructions without control flow or nested calls.
    pub fn straight_line(&mut self, len: usize) -> Vec<Instr> {
        (0..len).map(|_| self.instr(true)).collect()
    }

    /// An arbitrary decodable program whose jumps land on instruction
    /// boundaries or the end of the code. It may loop forever.
    pub fn micro_program(&mut self, len: usize) -> MicroProgram {
        let mut instrs: Vec<Instr> = (0..len).map(|_| self.instr(false)).collect();
        let mut offsets = Vec::with_capacity(len + 1);
        let mut at = 0u32;
        for ins in &instrs {
            offsets.push(at);
            at += ins.len() as u32;
        }
        offsets.push(at);
        for ins in &mut instrs {
            let t = *offsets.choose(&mut self.rng).expect("non-empty");
            match ins {
                Instr::Jmp(target) | Instr::Jz(_, target) => *target = t,
                _ => {}
            }
        }
        MicroProgram::from_instrs(&instrs).expect("targets are boundaries")
    }
}
