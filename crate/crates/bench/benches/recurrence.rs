use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use serieslaw::perturb::PerturbationPlan;
use serieslaw::{
    entry_ecdf, enumerate_blocks, perturb, return_ecdf, return_gaps, scan_occurrences, verify_theorem, Block,
    VerifyParams,
};
use serieslaw_bench::bernoulli;

fn scanning(c: &mut Criterion) {
    let seq = bernoulli(0.5, 1_000_000, 1);
    let mut g = c.benchmark_group("scan");
    g.throughput(Throughput::Elements(seq.len() as u64));
    for len in [4, 16] {
        let block = Block::binary(&"01".repeat(len / 2)).unwrap();
        g.bench_with_input(BenchmarkId::new("single_block", len), &block, |b, block| {
            b.iter(|| scan_occurrences(&seq, block).unwrap())
        });
    }
    for len in [8, 16] {
        g.bench_with_input(BenchmarkId::new("all_blocks", len), &len, |b, &len| {
            b.iter(|| enumerate_blocks(&seq, len, 2).unwrap())
        });
    }
    g.finish();
}

fn ecdfs(c: &mut Criterion) {
    let seq = bernoulli(0.5, 1_000_000, 2);
    let occ = scan_occurrences(&seq, &Block::binary("0110").unwrap()).unwrap();
    let mut g = c.benchmark_group("ecdf");
    g.throughput(Throughput::Elements(occ.len() as u64));
    g.bench_function("return", |b| {
        b.iter(|| return_ecdf(&return_gaps(&occ).unwrap()).unwrap())
    });
    g.bench_function("entry", |b| b.iter(|| entry_ecdf(&occ).unwrap()));
    g.finish();
}

fn verification(c: &mut Criterion) {
    let raw = bernoulli(0.005, 2_000_000, 7);
    let plan = PerturbationPlan::new(0.5, 0.11, 11, 200, 40_000, 1).unwrap();
    let pert = perturb(&raw, &plan).unwrap().sequence;
    let params = VerifyParams {
        n_lo: plan.n,
        n_hi: plan.n + 10,
        min_count: 20,
        epsilon: 0.5,
    };
    let mut g = c.benchmark_group("pipeline");
    g.sample_size(10);
    g.bench_function("perturb", |b| b.iter(|| perturb(&raw, &plan).unwrap()));
    g.bench_function("verify", |b| {
        b.iter(|| verify_theorem(&pert, Some(&plan), &params).unwrap())
    });
    g.finish();
}

criterion_group!(benches, scanning, ecdfs, verification);
criterion_main!(benches);
