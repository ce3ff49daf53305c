use criterion::{criterion_group, criterion_main, Criterion};
use dgkit::diagonal::{demonstrate_contradiction, make_adversary, run_micro, zoo};
use dgkit::BitVec;
use dgkit_bench::{counter, parity_instance};

fn interpreter(c: &mut Criterion) {
    let p = counter(10_000);
    c.bench_function("micro/count-10k", |b| b.iter(|| run_micro(&p, &[], 1_000_000).unwrap()));
}

fn adversary(c: &mut Criterion) {
    let (_, j) = parity_instance(4);
    let samples: Vec<BitVec> = BitVec::enumerate(4).collect();
    let mut group = c.benchmark_group("adversary");
    group.sample_size(10);
    for entry in zoo::zoo().into_iter().filter(|e| e.totalizing) {
        group.bench_function(format!("build/{}", entry.name), |b| {
            b.iter(|| make_adversary(&entry.program, &j, 1_000_000).unwrap())
        });
        group.bench_function(format!("demonstrate/{}", entry.name), |b| {
            b.iter(|| demonstrate_contradiction(&entry.program, &j, &samples, 1_000_000).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, interpreter, adversary);
criterion_main!(benches);
