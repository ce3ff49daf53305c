mod common;

use std::collections::BTreeSet;

use common::fixtures::judge_suite;
use common::oracles::{brute_force_patterns, closure_scan, floyd_halting, truth_table_violation};
use dgkit::ir::Affine;
use dgkit::verifier::{
    check_final_closure, enumerate_regions, quantize, verify_exhaustive, verify_halting, verify_regions,
};
use dgkit::{Counterexample, InputBox, PwlNetwork, Rat, Sampler, Verdict, VerifyOptions};
use rand::Rng;

#[test]
fn exhaustive_matches_truth_table() {
    let mut s = Sampler::new(21);
    let mut aligned = 0;
    for l in [2, 4, 7, 10] {
        for j in judge_suite(l) {
            for _ in 0..4 {
                let m = s.bit_model(l, j.out_width());
                let verdict = verify_exhaustive(&m, &j, l).unwrap();
                let expected = match truth_table_violation(m.root(), &j, l) {
                    None => Verdict::Aligned,
                    Some((input, output)) => Verdict::Misaligned(Counterexample::Bits { input, output }),
                };
                assert_eq!(verdict, expected, "{} at L={l}", j.name());
                aligned += usize::from(verdict.is_aligned());
            }
        }
    }
    assert!(aligned > 0 && aligned < 80, "{aligned} of 80 aligned");
}

#[test]
fn regions_match_brute_force_patterns() {
    let mut s = Sampler::new(4);
    let opts = VerifyOptions::default();
    let mut sizes = BTreeSet::new();
    for _ in 0..20 {
        let d = s.rng().random_range(1..=3);
        let net = s.network(d, 8);
        let domain = InputBox::cube(d, Rat::int(-2), Rat::int(2)).unwrap();
        let got: BTreeSet<Vec<bool>> = enumerate_regions(&net, &domain, &opts)
            .unwrap()
            .into_iter()
            .map(|r| r.pattern)
            .collect();
        assert_eq!(got, brute_force_patterns(&net, &domain));
        sizes.insert(got.len());
    }
    assert!(sizes.len() > 3, "{sizes:?}");
}

#[test]
fn three_lines_in_general_position() {
    let hidden = Affine::from_ints(&[&[1, 0], &[0, 1], &[1, 1]], &[0, 0, -1]).unwrap();
    let net = PwlNetwork::new(vec![hidden], Affine::from_ints(&[&[1, 1, 1]], &[0]).unwrap()).unwrap();
    let domain = InputBox::cube(2, Rat::int(-4), Rat::int(4)).unwrap();
    let regions = enumerate_regions(&net, &domain, &VerifyOptions::default()).unwrap();
    assert_eq!(regions.len(), 7);
    assert_eq!(brute_force_patterns(&net, &domain).len(), 7);
}

#[test]
fn halting_and_closure_match_oracles() {
    let mut s = Sampler::new(8);
    let mut labels = BTreeSet::new();
    for _ in 0..100 {
        let bits = s.rng().random_range(1..=12);
        let agent = s.agent(bits, 2, 1, 32);
        let input = s.bitvec(2);
        let init = s.bitvec(bits);
        let got = verify_halting(&agent, &input, &init, 12, 20, (1 << 12) + 1).unwrap();
        assert_eq!(got, floyd_halting(&agent, &input, &init));
        let closure = check_final_closure(&agent, 16, 16).unwrap();
        assert_eq!(closure, closure_scan(&agent));
        labels.insert((got.label(), closure.label()));
    }
    let halting: BTreeSet<_> = labels.iter().map(|l| l.0).collect();
    assert_eq!(halting.len(), 2, "{labels:?}");
}

#[test]
fn quantized_instances_agree() {
    let mut s = Sampler::new(13);
    let mut aligned = 0;
    for _ in 0..10 {
        let d = s.rng().random_range(1..=2);
        let (net, domain, judge) = s.quantizable(d, 3);
        let q = quantize(&net, &domain, &judge, 3).unwrap();
        let by_regions = verify_regions(&net, &judge, &domain).unwrap();
        let by_grid = verify_exhaustive(&q.model, &q.judge, q.in_width()).unwrap();
        assert!(by_grid.is_aligned() || by_grid.is_misaligned(), "{by_grid:?}");
        assert_eq!(by_regions.is_aligned(), by_grid.is_aligned());
        aligned += usize::from(by_grid.is_aligned());
    }
    assert!(aligned > 0 && aligned < 10, "{aligned} of 10 aligned");
}

#[test]
fn regions_partition_the_box() {
    let mut s = Sampler::new(31);
    let opts = VerifyOptions::default();
    for d in [1, 2, 1, 2, 2] {
        let net = s.network(d, 6);
        let domain = InputBox::cube(d, Rat::int(-2), Rat::int(2)).unwrap();
        let regions = enumerate_regions(&net, &domain, &opts).unwrap();
        for _ in 0..200 {
            let x: Vec<Rat> = (0..d).map(|_| Rat::new(s.rng().random_range(-64..=64), 32)).collect();
            let holding: Vec<_> = regions
                .iter()
                .filter(|r| r.constraints.iter().zip(&r.pattern).all(|(a, &on)| {
                    let v = a.value(&x);
                    if on { v >= Rat::ZERO } else { v > Rat::ZERO }
                }))
                .collect();
            // boundary points go to the active side, so exactly one region claims x
            assert_eq!(holding.len(), 1, "at {x:?}");
            assert_eq!(holding[0].map.apply(&x), net.eval(&x));
            assert_eq!(holding[0].pattern, net.pattern_at(&x));
        }
    }
}

#[test]
fn loose_lower_bound_is_aligned_on_a_grid() {
    let net = PwlNetwork::new(
        vec![Affine::from_ints(&[&[1, -2], &[0, 1], &[-1, 1]], &[0, 1, 0]).unwrap()],
        Affine::from_ints(&[&[1, -1, 2]], &[0]).unwrap(),
    )
    .unwrap();
    let domain = InputBox::cube(2, Rat::int(-1), Rat::int(1)).unwrap();
    let judge = dgkit::Judge::linear(
        "floor",
        2,
        1,
        dgkit::LinearFormula::parse("x3 >= -10", 3).unwrap(),
        None,
        None,
    )
    .unwrap();
    assert!(verify_regions(&net, &judge, &domain).unwrap().is_aligned());
    for a in -16..=16 {
        for b in -16..=16 {
            let x = [Rat::new(a, 16), Rat::new(b, 16)];
            assert!(net.eval(&x)[0] >= Rat::int(-10));
        }
    }
}
