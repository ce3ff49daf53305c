use crate::error::{Error, Result};
use crate::ir::program::{Node, Sort, TotalProgram};
use crate::kernel::{BitVec, Rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Bits(BitVec),
    Vector(Vec<Rat>),
}

impl Value {
    fn into_bits(self) -> BitVec {
        match self {
            Value::Bits(b) => b,
            Value::Vector(_) => unreachable!("type-checked program produced a vector"),
        }
    }

    fn into_vector(self) -> Vec<Rat> {
        match self {
            Value::Vector(v) => v,
            Value::Bits(_) => unreachable!("type-checked program produced bits"),
        }
    }
}

impl TotalProgram {
    /// Runs a bit-input program. Returns the output bits and the number of
    /// interpreter steps consumed (never more than the static fuel bound).
    pub fn eval(&self, input: &BitVec) -> Result<(BitVec, u64)> {
        let Sort::Bits(w) = self.input_sort() else {
            return Err(Error::structure("program takes a vector input"));
        };
        if input.width() != w {
            return Err(Error::width(w, input.width()));
        }
        if !matches!(self.output_sort(), Sort::Bits(_)) {
            return Err(Error::structure("program produces a vector output"));
        }
        let mut steps = 0;
        let out = run(self.root(), Value::Bits(*input), &mut steps).into_bits();
        Ok((out, steps))
    }

    /// Runs a program on any input value matching its input sort.
    pub fn eval_value(&self, input: Value) -> Result<(Value, u64)> {
        let got = match &input {
            Value::Bits(b) => Sort::Bits(b.width()),
            Value::Vector(v) => Sort::Vector(v.len()),
        };
        if got != self.input_sort() {
            return Err(Error::width(self.in_width(), got.width()));
        }
        let mut steps = 0;
        let out = run(self.root(), input, &mut steps);
        Ok((out, steps))
    }

    /// Convenience for vector-to-vector programs.
    pub fn eval_vector(&self, x: &[Rat]) -> Result<Vec<Rat>> {
        if !matches!(self.output_sort(), Sort::Vector(_)) {
            return Err(Error::structure("program produces bits"));
        }
        Ok(self.eval_value(Value::Vector(x.to_vec()))?.0.into_vector())
    }
}

fn half() -> Rat {
    Rat::new(1, 2)
}

fn run(node: &Node, input: Value, steps: &mut u64) -> Value {
    match node {
        Node::Affine(a) => {
            *steps += (a.d_out() * (a.d_in() + 1)) as u64;
            Value::Vector(a.apply(&input.into_vector()))
        }
        Node::Act(act) => {
            let v = input.into_vector();
            *steps += v.len() as u64;
            Value::Vector(v.iter().map(|z| act.apply(z)).collect())
        }
        Node::Decode(n) => {
            *steps += *n as u64;
            Value::Vector(input.into_bits().to_rats())
        }
        Node::Encode(n) => {
            *steps += *n as u64;
            let threshold = half();
            let bits: Vec<bool> = input.into_vector().iter().map(|z| *z >= threshold).collect();
            Value::Bits(BitVec::from_bits(&bits).expect("encode width checked"))
        }
        Node::Seq(children) => children
            .iter()
            .fold(input, |value, child| run(child, value, steps)),
        Node::Parallel(children) => {
            let outs: Vec<Value> = children
                .iter()
                .map(|child| run(child, input.clone(), steps))
                .collect();
            match outs.first() {
                Some(Value::Bits(_)) => Value::Bits(outs.into_iter().fold(
                    BitVec::zeros(0),
                    |acc, v| acc.concat(&v.into_bits()).expect("parallel width checked"),
                )),
                _ => Value::Vector(outs.into_iter().flat_map(Value::into_vector).collect()),
            }
        }
        Node::Repeat(r) => {
            let mut state = input;
            for _ in 0..r.theta {
                state = run(&r.body, state, steps);
                let stop = run(&r.terminal_pred, state.clone(), steps).into_bits();
                if stop.get(0) {
                    *steps += 1;
                    return state;
                }
            }
            *steps += 1;
            Value::Bits(r.terminal_output)
        }
        Node::Select(s) => {
            let i = input.into_bits();
            let o = run(&s.model, Value::Bits(i), steps).into_bits();
            let pair = i.concat(&o).expect("select width checked");
            let verdict = run(&s.judge, Value::Bits(pair), steps).into_bits();
            *steps += 1;
            if verdict.get(0) {
                Value::Bits(o)
            } else {
                run(&s.fallback, Value::Bits(i), steps)
            }
        }
    }
}
