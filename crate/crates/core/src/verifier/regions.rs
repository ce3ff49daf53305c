//! Linear-region enumeration for relu networks and region-wise verification
//! against linear judges.

use std::collections::{HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::ir::Affine;
use crate::kernel::{Counterexample, Judge, LinearAtom, Rat, Verdict};
use crate::verifier::fm::{feasible_point, Constraint};
use crate::verifier::parallel::{first_hit, par_map};
use crate::verifier::pwl::{InputBox, PwlNetwork};
use crate::verifier::VerifyOptions;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    /// One bit per hidden neuron, layer by layer; true = active.
    pub pattern: Vec<bool>,
    /// One inequality per hidden neuron over the input, `value ≥ 0`.
    pub constraints: Vec<LinearAtom>,
    /// The network restricted to this region.
    pub map: Affine,
    /// A point strictly inside the region.
    pub interior: Vec<Rat>,
}

/// Per-neuron sign constraints and the output map for a fixed pattern.
pub fn linearize(net: &PwlNetwork, pattern: &[bool]) -> (Vec<LinearAtom>, Affine) {
    assert_eq!(pattern.len(), net.neuron_count());
    let d = net.input_dim();
    let mut current = Affine::identity(d);
    let mut constraints = Vec::with_capacity(pattern.len());
    let mut bits = pattern.iter();
    for layer in net.hidden() {
        let pre = layer.compose(&current);
        let mut rows = Vec::with_capacity(pre.d_out());
        let mut bias = Vec::with_capacity(pre.d_out());
        for (row, b) in pre.matrix().iter().zip(pre.bias()) {
            let active = *bits.next().expect("pattern length checked");
            if active {
                constraints.push(LinearAtom::new(b.clone(), row.clone()));
                rows.push(row.clone());
                bias.push(b.clone());
            } else {
                constraints.push(LinearAtom::new(-b, row.iter().map(|c| -c).collect()));
                rows.push(vec![Rat::ZERO; d]);
                bias.push(Rat::ZERO);
            }
        }
        current = Affine::new(rows, bias).expect("rows have the input width");
    }
    (constraints, net.output().compose(&current))
}

fn box_constraints(domain: &InputBox, strict: bool) -> Vec<Constraint> {
    let d = domain.dim();
    let mut out = Vec::with_capacity(2 * d);
    for (k, (lo, hi)) in domain.bounds().iter().enumerate() {
        let mut up = vec![Rat::ZERO; d];
        up[k] = Rat::ONE;
        out.push(Constraint::new(up, -lo, strict));
        let mut down = vec![Rat::ZERO; d];
        down[k] = Rat::int(-1);
        out.push(Constraint::new(down, hi.clone(), strict));
    }
    out
}

/// Neuron rows are strict so the region must have interior. A row with no
/// input dependence is a constant; on the active side zero is allowed.
fn interior_system(atoms: &[LinearAtom], pattern: &[bool], domain: &InputBox) -> Vec<Constraint> {
    let mut sys = box_constraints(domain, true);
    for (atom, &active) in atoms.iter().zip(pattern) {
        let constant_row = atom.coefs.iter().all(Rat::is_zero);
        sys.push(Constraint::from_atom(atom, !(constant_row && active)));
    }
    sys
}

/// The region for `pattern` if it has non-empty interior inside the box.
pub fn region_for(net: &PwlNetwork, domain: &InputBox, pattern: &[bool]) -> Option<Region> {
    let (constraints, map) = linearize(net, pattern);
    let sys = interior_system(&constraints, pattern, domain);
    let interior = feasible_point(&sys, domain.dim())?;
    Some(Region {
        pattern: pattern.to_vec(),
        constraints,
        map,
        interior,
    })
}

fn check_budget(net: &PwlNetwork, domain: &InputBox, opts: &VerifyOptions) -> Result<()> {
    if domain.dim() != net.input_dim() {
        return Err(Error::width(net.input_dim(), domain.dim()));
    }
    if domain.is_degenerate() {
        return Err(Error::Invalid(format!("box {domain} has an empty interior")));
    }
    let limit = opts.budgets.max_neurons;
    if net.neuron_count() > limit {
        return Err(Error::ResourceExceeded {
            budget: "max-neurons",
            limit: limit as u64,
        });
    }
    Ok(())
}

/// Breadth-first search over activation patterns, starting from the region
/// of the box center and crossing one hyperplane at a time. Neurons whose
/// hyperplanes coincide are also flipped together. Regions are returned
/// sorted by pattern.
pub fn enumerate_regions(net: &PwlNetwork, domain: &InputBox, opts: &VerifyOptions) -> Result<Vec<Region>> {
    check_budget(net, domain, opts)?;
    let mut tried: HashSet<Vec<bool>> = HashSet::new();
    let mut regions: Vec<Region> = Vec::new();

    for seed in seed_points(domain) {
        let pattern = net.pattern_at(&seed);
        if !tried.insert(pattern.clone()) {
            continue;
        }
        let Some(start) = region_for(net, domain, &pattern) else {
            continue;
        };
        let mut frontier = VecDeque::from([start]);
        while !frontier.is_empty() {
            let level: Vec<Region> = frontier.drain(..).collect();
            let mut candidates = Vec::new();
            for region in &level {
                for q in neighbours(region) {
                    if tried.insert(q.clone()) {
                        candidates.push(q);
                    }
                }
            }
            regions.extend(level);
            let found = par_map(&candidates, opts.workers, |q| region_for(net, domain, q));
            frontier.extend(found.into_iter().flatten());
        }
    }
    regions.sort_by(|a, b| a.pattern.cmp(&b.pattern));
    Ok(regions)
}

/// The box center first, then a deterministic spread of interior points
/// that catch regions a degenerate arrangement would disconnect.
fn seed_points(domain: &InputBox) -> Vec<Vec<Rat>> {
    let d = domain.dim();
    let levels = if d <= 3 { 5 } else { 3 };
    let mut seeds = vec![domain.center()];
    let total = (levels as usize).pow(d as u32);
    for idx in 0..total {
        let mut rem = idx;
        let point = domain
            .bounds()
            .iter()
            .enumerate()
            .map(|(k, (lo, hi))| {
                let step = (rem % levels as usize) as i64 + 1;
                rem /= levels as usize;
                // fractions (step/(levels+1)) nudged off any simple grid
                let frac = Rat::new(step, levels + 1) + Rat::new(k as i64 + 1, 1009);
                lo + &(&(hi - lo) * &frac.min(Rat::new(1008, 1009)))
            })
            .collect();
        seeds.push(point);
    }
    seeds
}

fn neighbours(region: &Region) -> Vec<Vec<bool>> {
    let n = region.pattern.len();
    let keys: Vec<Option<(Vec<Rat>, Rat)>> = region.constraints.iter().map(hyperplane_key).collect();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut single = region.pattern.clone();
        single[k] = !single[k];
        out.push(single);
        if let Some(key) = &keys[k] {
            let group: Vec<usize> = (0..n).filter(|&j| keys[j].as_ref() == Some(key)).collect();
            if group.len() > 1 && group[0] == k {
                let mut flipped = region.pattern.clone();
                for j in group {
                    flipped[j] = !flipped[j];
                }
                out.push(flipped);
            }
        }
    }
    out
}

/// The hyperplane of a row up to scaling, ignoring orientation.
fn hyperplane_key(atom: &LinearAtom) -> Option<(Vec<Rat>, Rat)> {
    let lead = atom.coefs.iter().find(|c| !c.is_zero())?;
    let scale = lead.recip();
    Some((
        atom.coefs.iter().map(|c| c * &scale).collect(),
        &atom.constant * &scale,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionRun {
    pub verdict: Verdict,
    pub regions: usize,
    /// Regions examined up to and including the violating one.
    pub regions_checked: u64,
    /// Feasibility problems solved in the checking phase.
    pub feasibility_checks: u64,
}

pub fn verify_regions(net: &PwlNetwork, j: &Judge, domain: &InputBox) -> Result<Verdict> {
    verify_regions_with(net, j, domain, &VerifyOptions::default()).map(|r| r.verdict)
}

/// For every region and every disjunct of the negated judge, tests whether
/// the region contains a point whose output violates the judge.
pub fn verify_regions_with(
    net: &PwlNetwork,
    j: &Judge,
    domain: &InputBox,
    opts: &VerifyOptions,
) -> Result<RegionRun> {
    let formula = j
        .formula()
        .ok_or_else(|| Error::JudgeKind(format!("judge `{}` is not linear", j.name())))?;
    if j.in_width() != net.input_dim() {
        return Err(Error::width(net.input_dim(), j.in_width()));
    }
    if j.out_width() != net.output_dim() {
        return Err(Error::width(net.output_dim(), j.out_width()));
    }
    let regions = match enumerate_regions(net, domain, opts) {
        Ok(r) => r,
        Err(e) => {
            return Verdict::from_error(e).map(|verdict| RegionRun {
                verdict,
                regions: 0,
                regions_checked: 0,
                feasibility_checks: 0,
            })
        }
    };
    let violation = formula.violation_dnf();
    let d = domain.dim();
    let closed_box = box_constraints(domain, false);

    let search = first_hit(regions.len() as u64, opts.workers, 1, |idx, checks: &mut u64| {
        let region = &regions[idx as usize];
        let mut base = closed_box.clone();
        base.extend(region.constraints.iter().map(|a| Constraint::from_atom(a, false)));
        for clause in &violation {
            let mut sys = base.clone();
            sys.extend(clause.iter().map(|atom| substitute(atom, &region.map, d)));
            *checks += 1;
            if let Some(x) = feasible_point(&sys, d) {
                let output = net.eval(&x);
                debug_assert!(!j.holds_at(&x, &output).unwrap_or(true));
                return Ok(Some(Counterexample::Point { input: x, output }));
            }
        }
        Ok(None)
    })?;
    Ok(RegionRun {
        verdict: search.first.map_or(Verdict::Aligned, |(_, c)| Verdict::Misaligned(c)),
        regions: regions.len(),
        regions_checked: search.evaluated,
        feasibility_checks: search.steps,
    })
}

/// Rewrites an atom over (x, o) into one over x using o = A·x + b; the
/// result must be strictly positive.
fn substitute(atom: &LinearAtom, map: &Affine, d: usize) -> Constraint {
    let (cx, co) = atom.coefs.split_at(d);
    let mut coefs = cx.to_vec();
    let mut constant = atom.constant.clone();
    for (c, (row, b)) in co.iter().zip(map.matrix().iter().zip(map.bias())) {
        if c.is_zero() {
            continue;
        }
        for (acc, w) in coefs.iter_mut().zip(row) {
            *acc = &*acc + &(c * w);
        }
        constant = constant + c * b;
    }
    Constraint::new(coefs, constant, true)
}
