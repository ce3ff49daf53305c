use std::fs;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use dgkit::diagonal::{demonstrate_contradiction, demonstrate_reduction, disassemble, zoo};
use dgkit::guard::{clip_guard, filter, misalign};
use dgkit::ir::print_node;
use dgkit::report::WALL_TIME_KEY;
use dgkit::verifier::parallel::par_map;
use dgkit::verifier::{
    check_final_closure, quantize, verify_exhaustive_with, verify_halting, verify_regions_with, ClosureVerdict,
    HaltingVerdict,
};
use dgkit::{run_agent, BitVec, Budgets, Error, InputBox, PwlNetwork, Rat, Report, Verdict, VerifyOptions};

use crate::load;
use crate::{Cli, Command, Demo, Guard, Status, Verify};

/// Closure checks enumerate final states times inputs; kept smaller than
/// the halting limit.
const CLOSURE_STATE_BITS: usize = 16;

pub fn classify(e: &anyhow::Error) -> Status {
    match e.downcast_ref::<Error>() {
        Some(
            Error::TrivialJudge(_)
            | Error::ResourceExceeded { .. }
            | Error::VerifierDivergence { .. }
            | Error::MalformedVerdict(_),
        ) => Status::Inconclusive,
        _ => Status::Usage,
    }
}

fn budgets(cli: &Cli) -> Budgets {
    let mut b = Budgets::default();
    if let Some(v) = cli.max_l {
        b.max_l = v;
    }
    if let Some(v) = cli.max_neurons {
        b.max_neurons = v;
    }
    if let Some(v) = cli.max_state_bits {
        b.max_state_bits = v;
    }
    if let Some(v) = cli.fuel {
        b.fuel = v;
    }
    b
}

fn options(cli: &Cli) -> Result<VerifyOptions> {
    if cli.workers == 0 {
        bail!(Error::Invalid("--workers must be at least 1".into()));
    }
    Ok(VerifyOptions {
        workers: cli.workers,
        budgets: budgets(cli),
        ..VerifyOptions::default()
    })
}

fn bits(s: &str) -> Result<BitVec> {
    s.parse::<BitVec>().with_context(|| format!("bit string `{s}`"))
}

fn verdict_status(v: &Verdict) -> Status {
    match v {
        Verdict::Aligned => Status::Ok,
        Verdict::Misaligned(_) => Status::Negative,
        Verdict::TrivialJudge(_) | Verdict::ResourceExceeded { .. } => Status::Inconclusive,
    }
}

fn push_verdict(r: &mut Report, prefix: &str, v: &Verdict) {
    let key = |k: &str| format!("{prefix}{k}");
    r.push(&key("verdict"), v.label());
    match v {
        Verdict::Misaligned(cx) => {
            r.push(&key("counterexample"), cx);
        }
        Verdict::TrivialJudge(why) => {
            r.push(&key("reason"), why);
        }
        Verdict::ResourceExceeded { budget, limit } => {
            r.push(&key("budget"), budget).push(&key("limit"), limit);
        }
        Verdict::Aligned => {}
    }
}

pub fn run(cli: &Cli) -> Result<Status> {
    let start = Instant::now();
    let mut report = Report::new();
    let (status, writes_ir) = match &cli.command {
        Command::Verify(v) => (verify(cli, v, &mut report)?, false),
        Command::Guard(g) => (guard(cli, g, &mut report)?, true),
        Command::Demo(d) => (demo(cli, d, &mut report)?, false),
        Command::ExportZoo { dir } => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let mut list = String::new();
            for entry in zoo::zoo() {
                fs::write(dir.join(format!("{}.mp", entry.name)), entry.program.to_file_bytes())?;
                let asm = format!("; {}\n{}", entry.name, disassemble(&entry.program));
                fs::write(dir.join(format!("{}.mpa", entry.name)), asm)?;
                if entry.totalizing {
                    list.push_str(&format!("{}.mp\n", entry.name));
                }
                report.push("exported", entry.name);
            }
            fs::write(dir.join("all.list"), list)?;
            report.push("command", "export-zoo");
            (Status::Ok, false)
        }
    };
    if !cli.deterministic {
        report.push(WALL_TIME_KEY, start.elapsed().as_millis());
    }
    let text = report.to_text();
    match (&cli.out, writes_ir) {
        (Some(path), false) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        _ => print!("{text}"),
    }
    Ok(status)
}

fn verify(cli: &Cli, cmd: &Verify, r: &mut Report) -> Result<Status> {
    let opts = options(cli)?;
    match cmd {
        Verify::Exhaustive(a) => {
            let m = load::program(&a.model)?;
            let j = load::judge(&a.judge)?;
            let l = a.l.unwrap_or(m.in_width());
            let run = verify_exhaustive_with(&m, &j, l, &opts)?;
            r.push("command", "verify exhaustive")
                .push("judge", j.name())
                .push("L", l)
                .push("K", j.out_width());
            push_verdict(r, "", &run.verdict);
            r.push("inputs_checked", run.inputs_checked)
                .push("steps.model", run.steps.model)
                .push("steps.judge", run.steps.judge);
            Ok(verdict_status(&run.verdict))
        }
        Verify::Regions(a) => {
            let program = load::program(&a.model)?;
            let net = PwlNetwork::from_program(&program).with_context(|| format!("in {}", a.model.display()))?;
            let j = load::judge(&a.judge)?;
            let domain: InputBox = a.domain.parse().context("--box")?;
            let run = verify_regions_with(&net, &j, &domain, &opts)?;
            r.push("command", "verify regions")
                .push("judge", j.name())
                .push("box", &domain)
                .push("neurons", net.neuron_count())
                .push("regions", run.regions);
            push_verdict(r, "", &run.verdict);
            r.push("regions_checked", run.regions_checked)
                .push("feasibility_checks", run.feasibility_checks);
            if let Some(b) = a.grid_bits {
                let q = quantize(&net, &domain, &j, b)?;
                let grid = verify_exhaustive_with(&q.model, &q.judge, q.in_width(), &opts)?;
                r.push("grid_bits", b).push("grid.L", q.in_width());
                push_verdict(r, "grid.", &grid.verdict);
                if let Verdict::Misaligned(dgkit::Counterexample::Bits { input, output }) = &grid.verdict {
                    let x: Vec<String> = q.grid_input(input).iter().map(Rat::to_string).collect();
                    let y: Vec<String> = q.decode_output(output).iter().map(Rat::to_string).collect();
                    r.push("grid.point", format!("[{}] → [{}]", x.join(","), y.join(",")));
                }
                let agree = run.verdict.is_aligned() == grid.verdict.is_aligned();
                r.push("agreement", if agree { "yes" } else { "no" });
            }
            Ok(verdict_status(&run.verdict))
        }
        Verify::Halting(a) => {
            let agent = load::agent(&a.agent)?;
            let input = bits(&a.input)?;
            let init = match &a.init {
                Some(s) => bits(s)?,
                None => BitVec::zeros(agent.state_width()),
            };
            let memory = a.memory_bound.unwrap_or(agent.state_width());
            let budget = a.step_budget.unwrap_or(if memory < 63 { (1u64 << memory) + 1 } else { u64::MAX });
            let verdict = verify_halting(&agent, &input, &init, memory, opts.budgets.max_state_bits, budget)?;
            r.push("command", "verify halting")
                .push("agent", agent.name())
                .push("input", input)
                .push("init", init)
                .push("memory_bound", memory)
                .push("step_budget", budget)
                .push("verdict", verdict.label());
            let status = match &verdict {
                HaltingVerdict::Halts { steps } => {
                    r.push("steps", steps);
                    Status::Ok
                }
                HaltingVerdict::Diverges { cycle_start, cycle_length } => {
                    r.push("cycle_start", cycle_start).push("cycle_length", cycle_length);
                    Status::Negative
                }
                HaltingVerdict::ResourceExceeded { budget, limit } => {
                    r.push("budget", budget).push("limit", limit);
                    Status::Inconclusive
                }
            };
            let trace = run_agent(&agent, &input, &init)?;
            r.push("theta", agent.theta())
                .push("theta_run.length", trace.steps.len())
                .push("theta_run.halted_by", format!("{:?}", trace.halted_by));
            if let Some(o) = trace.forced_output {
                r.push("theta_run.forced_output", o);
            }
            Ok(status)
        }
        Verify::Closure(a) => {
            let agent = load::agent(&a.agent)?;
            let state_bits = cli.max_state_bits.unwrap_or(CLOSURE_STATE_BITS);
            let verdict = check_final_closure(&agent, state_bits, opts.budgets.max_l)?;
            r.push("command", "verify closure")
                .push("agent", agent.name())
                .push("final_states", agent.final_states().len())
                .push("verdict", verdict.label());
            Ok(match verdict {
                ClosureVerdict::Closed => Status::Ok,
                ClosureVerdict::Violation { state, input, successor } => {
                    r.push("state", state).push("input", input).push("successor", successor);
                    Status::Negative
                }
                ClosureVerdict::ResourceExceeded { budget, limit } => {
                    r.push("budget", budget).push("limit", limit);
                    Status::Inconclusive
                }
            })
        }
    }
}

fn guard(cli: &Cli, cmd: &Guard, r: &mut Report) -> Result<Status> {
    let Some(out) = &cli.out else {
        bail!(Error::Invalid("guards need --out for the emitted program".into()));
    };
    let max_l = budgets(cli).max_l;
    let name = match cmd {
        Guard::Filter(_) => "filter",
        Guard::Misalign(_) => "misalign",
        Guard::Clip(_) => "clip",
    };
    r.push("command", format!("guard {name}"));
    let (m, g) = match cmd {
        Guard::Filter(a) | Guard::Misalign(a) => {
            let m = load::program(&a.model)?;
            let j = load::judge(&a.judge)?;
            let g = if matches!(cmd, Guard::Filter(_)) {
                filter(&m, &j, max_l)?
            } else {
                misalign(&m, &j, max_l)?
            };
            r.push("judge", j.name());
            (m, g)
        }
        Guard::Clip(a) => {
            let m = load::program(&a.model)?;
            let lo: Rat = a.lo.parse().with_context(|| format!("--lo `{}`", a.lo))?;
            let hi: Rat = a.hi.parse().with_context(|| format!("--hi `{}`", a.hi))?;
            r.push("lo", &lo).push("hi", &hi);
            let g = clip_guard(&m, lo, hi)?;
            (m, g)
        }
    };
    fs::write(out, format!("{}\n", print_node(g.root()))).with_context(|| format!("writing {}", out.display()))?;
    r.push("fuel_bound.before", m.static_fuel_bound())
        .push("fuel_bound.after", g.static_fuel_bound());
    Ok(Status::Ok)
}

fn demo(cli: &Cli, cmd: &Demo, r: &mut Report) -> Result<Status> {
    let opts = options(cli)?;
    let fuel = opts.budgets.fuel;
    match cmd {
        Demo::Adversary(a) => {
            let candidates = load::micro_set(&a.verifier)?;
            let j = load::judge(&a.judge)?;
            let samples: Vec<BitVec> = match &a.samples {
                Some(list) => list.split(',').map(|s| bits(s.trim())).collect::<Result<_>>()?,
                None if j.in_width() <= dgkit::diagonal::adversary::MAX_ADVERSARY_L => {
                    BitVec::enumerate(j.in_width()).collect()
                }
                None => bail!(Error::ResourceExceeded {
                    budget: "adversary-L",
                    limit: dgkit::diagonal::adversary::MAX_ADVERSARY_L as u64,
                }),
            };
            r.push("command", "demo adversary")
                .push("judge", j.name())
                .push("fuel", fuel)
                .push("samples", samples.len());
            let results = par_map(&candidates, opts.workers, |(_, v)| {
                demonstrate_contradiction(v, &j, &samples, fuel)
            });
            let mut contradicted = 0;
            let mut status = Status::Ok;
            for ((name, _), result) in candidates.iter().zip(results) {
                let key = |k: &str| format!("{name}.{k}");
                match result {
                    Ok(d) => {
                        r.push(&key("claim"), if d.claimed_aligned { "aligned" } else { "misaligned" })
                            .push(&key("verifier_steps"), d.verifier_steps)
                            .push(&key("adversary_bytes"), d.adversary_bytes)
                            .push(&key("witness_input"), d.witness_input)
                            .push(&key("judge_at_witness"), u8::from(d.witness_accepted))
                            .push(&key("accepted_samples"), d.runs.iter().filter(|s| s.accepted).count())
                            .push(&key("adversary_steps"), d.runs.iter().map(|s| s.steps).max().unwrap_or(0))
                            .push(&key("result"), if d.contradicted { "contradicted" } else { "not_contradicted" });
                        if d.contradicted {
                            contradicted += 1;
                        } else {
                            status = Status::Negative;
                        }
                    }
                    Err(e @ (Error::VerifierDivergence { .. } | Error::MalformedVerdict(_))) => {
                        r.push(&key("result"), "no_answer").push(&key("reason"), &e);
                        if status == Status::Ok {
                            status = Status::Inconclusive;
                        }
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            r.push("contradicted", format!("{contradicted}/{}", candidates.len()));
            Ok(status)
        }
        Demo::Reduction(a) => {
            let m = load::micro(&a.machine)?;
            let p = load::micro(&a.p_pos)?;
            let samples: Vec<Vec<u8>> = if a.samples.is_empty() {
                vec![Vec::new(), b"a".to_vec(), b"hello".to_vec()]
            } else {
                a.samples.iter().map(|s| s.as_bytes().to_vec()).collect()
            };
            let rep = demonstrate_reduction(&m, a.input.as_bytes(), &p, &samples, fuel)?;
            r.push("command", "demo reduction")
                .push("fuel", fuel)
                .push("reduction_bytes", rep.reduction_bytes)
                .push("evidence", rep.evidence());
            if let Some(k) = rep.machine_steps {
                r.push("machine_steps", k);
            }
            if let (Some(least), Some(k)) = (rep.minimal_fuel, rep.machine_steps) {
                r.push("minimal_fuel", least).push("simulation_overhead", least - k);
            }
            for (f, halted) in &rep.sweep {
                r.push("sweep", format!("{f} {}", if *halted { "halted" } else { "running" }));
            }
            for s in &rep.samples {
                let show = |o: &Option<Vec<u8>>| o.as_ref().map_or("running".to_string(), |b| format!("{b:?}"));
                r.push(
                    "sample",
                    format!("{:?} → {} (p_pos {})", s.input, show(&s.output), show(&s.expected)),
                );
            }
            r.push("matches_case_split", if rep.agrees { "yes" } else { "no" });
            Ok(if rep.agrees { Status::Ok } else { Status::Negative })
        }
    }
}
