//! Generation fan-out against a mock backend with fixed per-call latency,
//! run sequentially and over rayon.

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dspace_core::model::{DesignSpace, GenerationConfig};
use dspace_core::pipeline::{NullSink, Pipeline};
use dspace_core::provider::{MockBackend, Provider};
use dspace_core::Executor;

fn pipeline(executor: Executor, responses: usize) -> Pipeline {
    let cfg = GenerationConfig {
        response_count: responses,
        rng_seed: Some(1),
        ..GenerationConfig::default()
    };
    let mock = MockBackend::synthetic().with_latency(Duration::from_millis(2));
    Pipeline::new(Provider::new(mock, cfg.max_concurrent_calls), cfg)
        .unwrap()
        .with_executor(executor)
}

fn generate_space(c: &mut Criterion) {
    let mut group = c.benchmark_group("generate_space");
    group.sample_size(10);
    for responses in [8usize, 40] {
        for (name, executor) in [
            ("sequential", Executor::Sequential),
            ("parallel", Executor::Parallel { threads: 16 }),
        ] {
            let p = pipeline(executor, responses);
            group.bench_with_input(BenchmarkId::new(name, responses), &responses, |b, _| {
                b.iter(|| {
                    let mut space = DesignSpace::new("write a poem about ocean");
                    black_box(p.generate_space(&mut space, &NullSink).unwrap())
                })
            });
        }
    }
    group.finish();
}

criterion_group!(benches, generate_space);
criterion_main!(benches);
