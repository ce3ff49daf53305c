//! Acceptance criteria, one PASS/FAIL line each.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use common::fixtures::{judge_suite, with_dump};
use common::oracles::{
    brute_force_patterns, closure_scan, floyd_halting, reduction_machines, ref_run, truth_table_violation, RefOutcome,
};
use dgkit::diagonal::{build_halting_reduction, demonstrate_contradiction, run_micro, zoo, Instr};
use dgkit::guard::{filter, misalign};
use dgkit::ir::{build, print_node, Affine, HaltReason, TotalProgram};
use dgkit::verifier::{
    check_final_closure, enumerate_regions, quantize, verify_exhaustive, verify_exhaustive_with, verify_halting,
    verify_regions,
};
use dgkit::{
    run_agent, BitVec, Counterexample, InputBox, Judge, LinearFormula, PwlNetwork, Rat, Sampler, Verdict,
    VerifyOptions,
};
use rand::Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn secs(t: Instant) -> String {
    format!("{:.1} s", t.elapsed().as_secs_f64())
}

fn guard_soundness() -> Check {
    let start = Instant::now();
    let mut aligned = 0;
    for seed in 0..200 {
        for j in judge_suite(8) {
            let m = Sampler::new(seed).bit_model(8, j.out_width());
            let g = filter(&m, &j, 12).map_err(|e| e.to_string())?;
            if verify_exhaustive(&g, &j, 8).map_err(|e| e.to_string())?.is_aligned() {
                aligned += 1;
            }
        }
    }
    let took = start.elapsed().as_secs_f64();
    ensure!(aligned == 1000, "{aligned}/1000 aligned");
    ensure!(took < 60.0, "took {took:.1} s");
    Ok(format!("1000/1000 aligned in {}", secs(start)))
}

fn misalignment_dual() -> Check {
    let mut ok = 0;
    for seed in 0..200 {
        for j in judge_suite(8) {
            let (neg, _) = *j.negative_example().unwrap();
            let m = Sampler::new(seed).bit_model(8, j.out_width());
            let bad = misalign(&m, &j, 12).map_err(|e| e.to_string())?;
            match verify_exhaustive(&bad, &j, 8).map_err(|e| e.to_string())? {
                Verdict::Misaligned(Counterexample::Bits { input, .. }) if input <= neg => ok += 1,
                other => return Err(format!("{} seed {seed}: {other:?}", j.name())),
            }
        }
    }
    ensure!(ok == 1000, "{ok}/1000");
    Ok("1000/1000 misaligned with counterexample <= i-".into())
}

fn decidable_case() -> Check {
    let start = Instant::now();
    let l = 20;
    let f = LinearFormula::parse(&format!("x1 - 1 >= 0 | x{} - 1 >= 0", l + 1), l + 1).unwrap();
    let one = BitVec::new(1, 1).unwrap();
    let witness = build::constant(l, &one);
    let j = Judge::linear("first_or_out", l, 1, f, Some(witness), Some((BitVec::zeros(l), BitVec::zeros(1)))).unwrap();
    let m = TotalProgram::bits(build::constant(l, &one), l, 1).unwrap();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let opts = VerifyOptions { workers, ..VerifyOptions::default() };
    let run = verify_exhaustive_with(&m, &j, l, &opts).map_err(|e| e.to_string())?;
    let took = start.elapsed().as_secs_f64();
    ensure!(run.verdict.is_aligned(), "{:?}", run.verdict);
    ensure!(run.inputs_checked == 1 << l, "checked {}", run.inputs_checked);
    ensure!(took < 120.0, "L=20 took {took:.1} s");
    let l20 = secs(start);

    let mut s = Sampler::new(3);
    let mut compared = 0;
    for l in 1..=10 {
        for j in judge_suite(l) {
            for _ in 0..3 {
                let m = s.bit_model(l, j.out_width());
                let expected = match truth_table_violation(m.root(), &j, l) {
                    None => Verdict::Aligned,
                    Some((input, output)) => Verdict::Misaligned(Counterexample::Bits { input, output }),
                };
                let got = verify_exhaustive(&m, &j, l).map_err(|e| e.to_string())?;
                ensure!(got == expected, "{} at L={l}: {got:?} vs {expected:?}", j.name());
                compared += 1;
            }
        }
    }
    Ok(format!("2^20 inputs in {l20}; {compared} verdicts at L<=10 match the truth table"))
}

fn region_enumeration() -> Check {
    let mut s = Sampler::new(40);
    let opts = VerifyOptions::default();
    let mut total = 0;
    for n in 0..50 {
        let d = s.rng().random_range(1..=3);
        let net = s.network(d, 12);
        ensure!(net.neuron_count() <= 12, "network {n} has {} neurons", net.neuron_count());
        let domain = InputBox::cube(d, Rat::int(-2), Rat::int(2)).unwrap();
        let regions = enumerate_regions(&net, &domain, &opts).map_err(|e| e.to_string())?;
        let got: BTreeSet<Vec<bool>> = regions.iter().map(|r| r.pattern.clone()).collect();
        ensure!(got.len() == regions.len(), "network {n}: duplicate patterns");
        ensure!(got == brute_force_patterns(&net, &domain), "network {n}: pattern sets differ");
        total += got.len();
    }
    let hidden = Affine::from_ints(&[&[1, 0], &[0, 1], &[1, 1]], &[0, 0, -1]).unwrap();
    let net = PwlNetwork::new(vec![hidden], Affine::from_ints(&[&[1, 1, 1]], &[0]).unwrap()).unwrap();
    let domain = InputBox::cube(2, Rat::int(-4), Rat::int(4)).unwrap();
    let three = enumerate_regions(&net, &domain, &opts).map_err(|e| e.to_string())?.len();
    ensure!(three == 7, "three lines gave {three} regions");
    Ok(format!("50/50 networks match brute force ({total} regions); three lines give 7"))
}

fn region_exhaustive_agreement() -> Check {
    let mut s = Sampler::new(50);
    let mut aligned = 0;
    for n in 0..30 {
        let d = s.rng().random_range(1..=2);
        let (net, domain, judge) = s.quantizable(d, 3);
        let q = quantize(&net, &domain, &judge, 3).map_err(|e| e.to_string())?;
        let by_regions = verify_regions(&net, &judge, &domain).map_err(|e| e.to_string())?;
        let by_grid = verify_exhaustive(&q.model, &q.judge, q.in_width()).map_err(|e| e.to_string())?;
        let definite = |v: &Verdict| v.is_aligned() || v.is_misaligned();
        ensure!(definite(&by_regions) && definite(&by_grid), "instance {n}: {by_regions:?} vs {by_grid:?}");
        ensure!(
            by_regions.is_aligned() == by_grid.is_aligned(),
            "instance {n} disagrees: {by_regions:?} vs {by_grid:?}"
        );
        aligned += usize::from(by_grid.is_aligned());
    }
    Ok(format!("30/30 agree ({aligned} aligned, {} misaligned)", 30 - aligned))
}

fn halting_verifier() -> Check {
    let mut s = Sampler::new(60);
    let (mut halts, mut diverges, mut closed) = (0, 0, 0);
    for n in 0..500 {
        let bits = s.rng().random_range(1..=12);
        let agent = s.agent(bits, 2, 1, 32);
        let input = s.bitvec(2);
        let init = s.bitvec(bits);
        let got = verify_halting(&agent, &input, &init, 12, 20, (1 << 12) + 1).map_err(|e| e.to_string())?;
        ensure!(got.label() != "resource_exceeded", "agent {n}: {got:?}");
        ensure!(got == floyd_halting(&agent, &input, &init), "agent {n}: {got:?}");
        match got.label() {
            "halts" => halts += 1,
            _ => diverges += 1,
        }
        let closure = check_final_closure(&agent, 16, 16).map_err(|e| e.to_string())?;
        ensure!(closure == closure_scan(&agent), "agent {n}: closure {closure:?}");
        closed += usize::from(closure.label() == "ok");
    }
    Ok(format!("500/500 match ({halts} halt, {diverges} diverge); closure matches the scan ({closed} closed)"))
}

fn theta_trivialization() -> Check {
    let mut s = Sampler::new(70);
    let mut by_theta = 0;
    for n in 0..500 {
        let bits = s.rng().random_range(1..=12);
        let agent = s.agent(bits, 2, 1, 32);
        let input = s.bitvec(2);
        let init = s.bitvec(bits);
        let trace = run_agent(&agent, &input, &init).map_err(|e| e.to_string())?;
        ensure!(trace.steps.len() <= 32, "agent {n}: {} steps", trace.steps.len());
        let reached = trace.steps.iter().position(|(st, _)| agent.is_final(st));
        match trace.halted_by {
            HaltReason::TerminalState => {
                ensure!(reached == Some(trace.steps.len() - 1), "agent {n}: mislabeled terminal halt");
                ensure!(trace.forced_output.is_none(), "agent {n}: forced output on terminal halt");
            }
            HaltReason::ThetaExhausted => {
                ensure!(reached.is_none() && trace.steps.len() == 32, "agent {n}: mislabeled theta halt");
                ensure!(trace.forced_output == Some(*agent.terminal_output()), "agent {n}: forced output");
                by_theta += 1;
            }
        }
    }
    Ok(format!("500/500 traces <= 32 and correctly labeled ({by_theta} stopped by theta)"))
}

fn diagonal_demonstration() -> Check {
    let j = common::fixtures::parity(4);
    let samples: Vec<BitVec> = BitVec::enumerate(4).collect();
    let mut contradicted = Vec::new();
    for entry in zoo::zoo().into_iter().filter(|e| e.totalizing) {
        let d = demonstrate_contradiction(&entry.program, &j, &samples, 1_000_000)
            .map_err(|e| format!("{}: {e}", entry.name))?;
        ensure!(d.contradicted, "{} not contradicted", entry.name);
        contradicted.push(entry.name);
    }
    ensure!(contradicted.len() >= 4 && contradicted.contains(&"simulator"), "{contradicted:?}");

    let mut s = Sampler::new(80);
    for n in 0..100 {
        let mut instrs = s.straight_line(n % 17);
        instrs.extend([Instr::LoadI(6, 7), Instr::LoadI(4, 1), Instr::SelfCode(6)]);
        let p = with_dump(&instrs);
        let out = run_micro(&p, &[1, 2, 3], 1_000_000).map_err(|e| e.to_string())?;
        ensure!(out.output().is_some_and(|o| o.ends_with(p.code())), "SELF program {n}");
    }

    let (halting, looping) = reduction_machines();
    let p_pos = zoo::constant(1);
    let inputs: [&[u8]; 3] = [&[], &[0, 1], &[9, 9, 9]];
    for (n, m) in halting.iter().enumerate() {
        ensure!(matches!(ref_run(m.code(), &[], 100_000), RefOutcome::Halted(..)), "machine {n} should halt");
        let r = build_halting_reduction(m, &[], &p_pos).map_err(|e| e.to_string())?;
        for x in inputs {
            let out = run_micro(&r, x, 1_000_000).map_err(|e| e.to_string())?;
            ensure!(out.output() == Some(&[1u8][..]), "halting machine {n} on {x:?}");
        }
    }
    for (n, m) in looping.iter().enumerate() {
        ensure!(ref_run(m.code(), &[], 100_000) == RefOutcome::Running, "machine {n} should loop");
        let r = build_halting_reduction(m, &[], &p_pos).map_err(|e| e.to_string())?;
        for x in inputs {
            ensure!(!run_micro(&r, x, 100_000).map_err(|e| e.to_string())?.is_halted(), "looping machine {n}");
        }
    }
    Ok(format!(
        "{}/{} candidates contradicted; SELF 100/100; reduction {}+{} machines follow the case split",
        contradicted.len(),
        contradicted.len(),
        halting.len(),
        looping.len()
    ))
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn dg(args: &[&str], workers: usize) -> (Option<i32>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_dg"))
        .env_remove("DG_WORKERS")
        .arg("--deterministic")
        .arg("--workers")
        .arg(workers.to_string())
        .args(args)
        .output()
        .expect("dg runs");
    (out.status.code(), out.stdout)
}

fn write(dir: &Path, name: &str, text: impl AsRef<[u8]>) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let mut runs: Vec<Vec<String>> = Vec::new();
    let mut emitted: Vec<(String, String)> = Vec::new();

    for (n, j) in judge_suite(8).into_iter().enumerate() {
        let m = Sampler::new(n as u64).bit_model(8, j.out_width());
        let mp = write(d, &format!("m{n}.ir"), print_node(m.root()));
        let jp = write(d, &format!("j{n}.judge"), j.to_text());
        for guard in ["filter", "misalign"] {
            let g = d.join(format!("{guard}{n}-%W.ir")).to_string_lossy().into_owned();
            runs.push(vec!["guard".into(), guard.into(), "-m".into(), mp.clone(), "-j".into(), jp.clone(), "-o".into(), g.clone()]);
            emitted.push((g.clone(), jp.clone()));
        }
    }
    let mut s = Sampler::new(90);
    let l = 12;
    let j = common::fixtures::parity(l);
    let jp = write(d, "parity12.judge", j.to_text());
    for n in 0..3 {
        let m = s.bit_model(l, 1);
        let mp = write(d, &format!("wide{n}.ir"), print_node(m.root()));
        runs.push(vec!["verify".into(), "exhaustive".into(), "-m".into(), mp, "-j".into(), jp.clone()]);
    }
    for n in 0..3 {
        let (net, domain, judge) = s.quantizable(2, 3);
        let mp = write(d, &format!("net{n}.ir"), print_node(net.to_program().root()));
        let jp = write(d, &format!("net{n}.judge"), judge.to_text());
        runs.push(vec![
            "verify".into(), "regions".into(), "-m".into(), mp, "-j".into(), jp,
            "--box".into(), domain.to_string(), "--grid-bits".into(), "3".into(),
        ]);
    }
    for n in 0..3 {
        let agent = s.agent(10, 2, 1, 32);
        let ap = write(d, &format!("a{n}.agent"), agent.to_text());
        let input = s.bitvec(2).to_string();
        runs.push(vec![
            "verify".into(), "halting".into(), "-a".into(), ap.clone(), "-i".into(), input,
            "--memory-bound".into(), "12".into(), "--step-budget".into(), "4097".into(),
        ]);
        runs.push(vec!["verify".into(), "closure".into(), "-a".into(), ap]);
    }
    let zoo_list = root().join("zoo/all.list").to_string_lossy().into_owned();
    let pj = write(d, "parity4.judge", common::fixtures::parity(4).to_text());
    runs.push(vec!["demo".into(), "adversary".into(), "-v".into(), zoo_list, "-j".into(), pj]);
    let (halting, _) = reduction_machines();
    let hm = write(d, "halt.mp", halting[3].to_file_bytes());
    let pp = write(d, "p_pos.mp", zoo::constant(1).to_file_bytes());
    runs.push(vec!["demo".into(), "reduction".into(), "-m".into(), hm, "--p-pos".into(), pp, "--fuel".into(), "100000".into()]);

    for args in &runs {
        let mut seen: Option<(Option<i32>, Vec<u8>)> = None;
        for workers in [1, 4, 8] {
            let args: Vec<String> = args.iter().map(|a| a.replace("%W", &workers.to_string())).collect();
            let argv: Vec<&str> = args.iter().map(String::as_str).collect();
            let (code, out) = dg(&argv, workers);
            ensure!(code.is_some_and(|c| c <= 2), "{argv:?} exited with {code:?}");
            let text = String::from_utf8_lossy(&out);
            ensure!(!text.contains("wall_time"), "{argv:?} reports wall time");
            match &seen {
                None => seen = Some((code, out)),
                Some(first) => ensure!(*first == (code, out), "{argv:?} differs at {workers} workers"),
            }
        }
    }
    for (g, _) in &emitted {
        let bytes: Vec<Vec<u8>> = [1, 4, 8].iter().map(|w| std::fs::read(g.replace("%W", &w.to_string())).unwrap()).collect();
        ensure!(bytes[0] == bytes[1] && bytes[1] == bytes[2], "emitted {g} differs");
    }
    for (g, jp) in &emitted {
        let g = g.replace("%W", "1");
        let (code, _) = dg(&["verify", "exhaustive", "-m", &g, "-j", jp], 4);
        let expected = if g.contains("filter") { 0 } else { 1 };
        ensure!(code == Some(expected), "{g} verified with {code:?}");
    }
    Ok(format!("{} invocations byte-identical at 1, 4 and 8 workers", runs.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("guard soundness", guard_soundness),
        ("misalignment dual", misalignment_dual),
        ("decidable case", decidable_case),
        ("region enumeration", region_enumeration),
        ("region/exhaustive agreement", region_exhaustive_agreement),
        ("halting verifier", halting_verifier),
        ("theta trivialization", theta_trivialization),
        ("diagonal demonstration", diagonal_demonstration),
        ("determinism", determinism),
    ];
    let filter_arg: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let n = n + 1;
        if filter_arg.is_some_and(|f| f != n) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match result {
            Ok(detail) => println!("PASS criterion {n} ({name}): {detail} [{}]", secs(start)),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {n} ({name}): {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
