use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spinchain::kak::kak_su4;
use spinchain::pulse::synthesize_pulses;
use spinchain::{compile, decompose, ChainSpec};
use spinchain_bench::targets;

fn su4(c: &mut Criterion) {
    let us = targets(2, 16, 1);
    c.bench_function("kak_su4", |b| {
        b.iter(|| {
            for u in &us {
                std::hint::black_box(kak_su4(u).unwrap());
            }
        })
    });
}

fn recursive(c: &mut Criterion) {
    let mut group = c.benchmark_group("decompose");
    for n in 3..=5 {
        let us = targets(n, 4, 2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &us, |b, us| {
            b.iter(|| {
                for u in us {
                    std::hint::black_box(decompose(u).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn lowering(c: &mut Criterion) {
    let u = &targets(3, 1, 3)[0];
    let gates = compile(u).unwrap().gates;
    let chain = ChainSpec::uniform(3, 100.0).unwrap();
    c.bench_function("synthesize_pulses_n3", |b| {
        b.iter(|| std::hint::black_box(synthesize_pulses(&gates, &chain).unwrap()))
    });
}

criterion_group!(benches, su4, recursive, lowering);
criterion_main!(benches);
