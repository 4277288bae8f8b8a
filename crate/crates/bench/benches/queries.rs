use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use dpt_bench::{sample_patterns, synthetic_corpus};
use dpt_core::dsa::DsaIndex;
use dpt_core::{DptConfig, DptIndex, Query, QueryKind, Text};

fn bench_counting(crit: &mut Criterion) {
    let c = 8;
    let raw = synthetic_corpus(1 << 16, 0x5eed);
    let text = Text::from_raw(&raw).unwrap();
    let mut ix = DptIndex::build(&text, &DptConfig::new(c)).unwrap();
    let mut dsa = DsaIndex::build(&text, c, 5, 1, 1).unwrap();

    let queries: Vec<Query> = sample_patterns(&raw, 256, 12, 0xca5e)
        .into_iter()
        .enumerate()
        .map(|(i, pattern)| Query { kind: QueryKind::Count, pattern, arrival_pe: i % c })
        .collect();

    let mut group = crit.benchmark_group("count_256");
    group.throughput(Throughput::Elements(queries.len() as u64));
    group.bench_function("dpt_batch", |b| b.iter(|| ix.run_batch(&queries)));
    group.bench_function("dsa_sequential", |b| {
        b.iter(|| {
            let mut total = 0u64;
            for q in &queries {
                total += dsa.count(&q.pattern, q.arrival_pe).0;
            }
            total
        })
    });
    group.finish();
}

criterion_group!(benches, bench_counting);
criterion_main!(benches);
