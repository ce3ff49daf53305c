//! Exact feasibility of systems of linear inequalities by Fourier–Motzkin
//! elimination, with witness extraction by back-substitution.

use std::collections::HashMap;

use crate::kernel::{LinearAtom, Rat};

/// `Σ coefs[k]·x_k + constant ≥ 0`, or `> 0` when strict.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub coefs: Vec<Rat>,
    pub constant: Rat,
    pub strict: bool,
}

impl Constraint {
    pub fn new(coefs: Vec<Rat>, constant: Rat, strict: bool) -> Constraint {
        Constraint {
            coefs,
            constant,
            strict,
        }
    }

    pub fn from_atom(atom: &LinearAtom, strict: bool) -> Constraint {
        Constraint::new(atom.coefs.clone(), atom.constant.clone(), strict)
    }

    pub fn value(&self, x: &[Rat]) -> Rat {
        self.coefs
            .iter()
            .zip(x)
            .filter(|(c, _)| !c.is_zero())
            .fold(self.constant.clone(), |acc, (c, v)| acc + c * v)
    }

    pub fn satisfied_by(&self, x: &[Rat]) -> bool {
        let v = self.value(x);
        if self.strict {
            v.is_positive()
        } else {
            !v.is_negative()
        }
    }

    fn is_constant(&self) -> bool {
        self.coefs.iter().all(Rat::is_zero)
    }

    fn constant_holds(&self) -> bool {
        if self.strict {
            self.constant.is_positive()
        } else {
            !self.constant.is_negative()
        }
    }

    /// Scales so the first non-zero coefficient has absolute value 1.
    fn normalized(mut self) -> Constraint {
        if let Some(lead) = self.coefs.iter().find(|c| !c.is_zero()) {
            let scale = lead.abs().recip();
            if scale != Rat::ONE {
                for c in &mut self.coefs {
                    *c = &*c * &scale;
                }
                self.constant = &self.constant * &scale;
            }
        }
        self
    }
}

/// Drops satisfied constant rows and keeps only the tightest of parallel
/// rows. Returns `None` if a constant row is violated.
fn simplify(rows: Vec<Constraint>) -> Option<Vec<Constraint>> {
    let mut best: HashMap<Vec<Rat>, (Rat, bool)> = HashMap::new();
    let mut order = Vec::new();
    for row in rows {
        if row.is_constant() {
            if !row.constant_holds() {
                return None;
            }
            continue;
        }
        let row = row.normalized();
        match best.get_mut(&row.coefs) {
            Some((c, strict)) => {
                if row.constant < *c || (row.constant == *c && row.strict) {
                    *c = row.constant;
                    *strict = row.strict;
                }
            }
            None => {
                order.push(row.coefs.clone());
                best.insert(row.coefs, (row.constant, row.strict));
            }
        }
    }
    Some(
        order
            .into_iter()
            .map(|coefs| {
                let (constant, strict) = best.remove(&coefs).expect("recorded above");
                Constraint::new(coefs, constant, strict)
            })
            .collect(),
    )
}

/// One end of the interval a variable is confined to.
#[derive(Clone)]
struct Bound {
    value: Rat,
    strict: bool,
}

/// Lower and upper bounds on `var` implied by `rows` with every other
/// variable fixed to `point` (unassigned entries must have zero coefficient).
fn bounds_on(rows: &[Constraint], var: usize, point: &[Rat]) -> Option<(Option<Bound>, Option<Bound>)> {
    let mut lo: Option<Bound> = None;
    let mut hi: Option<Bound> = None;
    for row in rows {
        let a = &row.coefs[var];
        let rest = row
            .coefs
            .iter()
            .enumerate()
            .filter(|(k, c)| *k != var && !c.is_zero())
            .fold(row.constant.clone(), |acc, (k, c)| acc + c * &point[k]);
        if a.is_zero() {
            let ok = if row.strict { rest.is_positive() } else { !rest.is_negative() };
            if !ok {
                return None;
            }
            continue;
        }
        // a·x + rest ≥ 0  ⇔  x ≥ −rest/a (a > 0) or x ≤ −rest/a (a < 0)
        let value = -(&rest / a);
        let b = Bound {
            value,
            strict: row.strict,
        };
        if a.is_positive() {
            lo = Some(match lo {
                Some(cur) if cur.value > b.value || (cur.value == b.value && cur.strict) => cur,
                _ => b,
            });
        } else {
            hi = Some(match hi {
                Some(cur) if cur.value < b.value || (cur.value == b.value && cur.strict) => cur,
                _ => b,
            });
        }
    }
    Some((lo, hi))
}

fn pick(lo: Option<Bound>, hi: Option<Bound>) -> Option<Rat> {
    match (lo, hi) {
        (Some(l), Some(h)) => {
            if l.value < h.value {
                Some(l.value.midpoint(&h.value))
            } else if l.value == h.value && !l.strict && !h.strict {
                Some(l.value)
            } else {
                None
            }
        }
        (Some(l), None) => Some(l.value + Rat::ONE),
        (None, Some(h)) => Some(h.value - Rat::ONE),
        (None, None) => Some(Rat::ZERO),
    }
}

/// Returns a point satisfying every constraint, or `None` if the system is
/// infeasible. All constraints must have `dim` coefficients.
pub fn feasible_point(constraints: &[Constraint], dim: usize) -> Option<Vec<Rat>> {
    debug_assert!(constraints.iter().all(|c| c.coefs.len() == dim));
    let mut rows = simplify(constraints.to_vec())?;
    let mut remaining: Vec<usize> = (0..dim).collect();
    // (variable, rows mentioning it before its elimination)
    let mut stages: Vec<(usize, Vec<Constraint>)> = Vec::new();

    while remaining.len() > 1 {
        let (pos, &var) = remaining
            .iter()
            .enumerate()
            .min_by_key(|(_, &v)| {
                let p = rows.iter().filter(|r| r.coefs[v].is_positive()).count();
                let n = rows.iter().filter(|r| r.coefs[v].is_negative()).count();
                (p * n, v)
            })
            .expect("at least two variables remain");
        remaining.remove(pos);
        let (touching, mut next): (Vec<Constraint>, Vec<Constraint>) =
            rows.into_iter().partition(|r| !r.coefs[var].is_zero());
        let uppers: Vec<&Constraint> = touching.iter().filter(|r| r.coefs[var].is_negative()).collect();
        for p in touching.iter().filter(|r| r.coefs[var].is_positive()) {
            for n in &uppers {
                let wp = -&n.coefs[var];
                let wn = p.coefs[var].clone();
                let coefs = p
                    .coefs
                    .iter()
                    .zip(&n.coefs)
                    .enumerate()
                    .map(|(k, (a, b))| if k == var { Rat::ZERO } else { &(&wp * a) + &(&wn * b) })
                    .collect();
                let constant = &(&wp * &p.constant) + &(&wn * &n.constant);
                next.push(Constraint::new(coefs, constant, p.strict || n.strict));
            }
        }
        stages.push((var, touching));
        rows = simplify(next)?;
    }

    let mut point = vec![Rat::ZERO; dim];
    if let Some(&last) = remaining.first() {
        let (lo, hi) = bounds_on(&rows, last, &point)?;
        point[last] = pick(lo, hi)?;
    }
    for (var, touching) in stages.into_iter().rev() {
        let (lo, hi) = bounds_on(&touching, var, &point)?;
        point[var] = pick(lo, hi).expect("projection guarantees a non-empty interval");
    }
    debug_assert!(constraints.iter().all(|c| c.satisfied_by(&point)));
    Some(point)
}
