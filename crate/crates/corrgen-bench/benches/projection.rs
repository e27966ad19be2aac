//! Cloud projection throughput.

use criterion::{criterion_group, criterion_main, Criterion, Throughput};

use corrgen::projection::project_cloud;
use corrgen_bench::column_scene;

fn bench_projection(c: &mut Criterion) {
    let (cloud, path) = column_scene(11);
    let mut group = c.benchmark_group("projection");
    group.throughput(Throughput::Elements(cloud.len() as u64));
    group.bench_function("project_cloud", |b| b.iter(|| project_cloud(&path, &cloud)));
    group.finish();
}

criterion_group!(benches, bench_projection);
criterion_main!(benches);
