use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use sparsesplit::{
    generate, Baseline, GenConfig, Measure, Scheme, SparsePoint, SplitEngine, UpdEnt, UpdGini,
};

fn stream(n: usize, d2: usize) -> Vec<SparsePoint> {
    generate(&GenConfig {
        n,
        d1: 10,
        d2,
        q: 10.0 / d2 as f64,
        seed: 1,
    })
    .unwrap()
    .points
}

fn replay(engine: &mut dyn SplitEngine, points: &[SparsePoint]) -> usize {
    points
        .iter()
        .map(|p| engine.process(p).feature.is_some() as usize)
        .sum()
}

/// Full stream replay with a query after every point.
fn engines(c: &mut Criterion) {
    let mut group = c.benchmark_group("replay");
    group.sample_size(10);
    for d2 in [1_000, 10_000] {
        let points = stream(5_000, d2);
        group.throughput(Throughput::Elements(points.len() as u64));
        group.bench_with_input(BenchmarkId::new("upd-ent", d2), &points, |b, pts| {
            b.iter(|| replay(&mut UpdEnt::new(0.1).unwrap(), pts))
        });
        group.bench_with_input(BenchmarkId::new("upd-gini", d2), &points, |b, pts| {
            b.iter(|| replay(&mut UpdGini::new(0.1).unwrap(), pts))
        });
        group.bench_with_input(BenchmarkId::new("base-ent", d2), &points, |b, pts| {
            b.iter(|| replay(&mut Baseline::new(Measure::Entropy), pts))
        });
        group.bench_with_input(BenchmarkId::new("base-gini", d2), &points, |b, pts| {
            b.iter(|| replay(&mut Baseline::new(Measure::Gini), pts))
        });
    }
    group.finish();
}

fn alpha(c: &mut Criterion) {
    let points = stream(5_000, 10_000);
    let mut group = c.benchmark_group("upd-ent-alpha");
    group.sample_size(10);
    for a in [0.01, 0.1, 1.0, 5.0] {
        group.bench_with_input(BenchmarkId::from_parameter(a), &points, |b, pts| {
            b.iter(|| replay(&mut UpdEnt::new(a).unwrap(), pts))
        });
    }
    group.finish();
}

fn bucket_index(c: &mut Criterion) {
    let scheme = Scheme::new(0.1).unwrap();
    let rates: Vec<f64> = (0..1024).map(|i| (i as f64 + 0.5) / 1024.0).collect();
    c.bench_function("ent_index", |b| {
        b.iter(|| {
            rates
                .iter()
                .filter(|&&r| scheme.ent_index(r).unwrap().is_infinite())
                .count()
        })
    });
    c.bench_function("gini_index", |b| {
        b.iter(|| {
            rates
                .iter()
                .map(|&r| scheme.gini_index(r).unwrap().0)
                .sum::<u32>()
        })
    });
}

criterion_group!(benches, engines, alpha, bucket_index);
criterion_main!(benches);
