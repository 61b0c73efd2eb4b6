//! Parallel vs sequential replicate throughput on a representative
//! workload: sample a marked configuration, triangulate, decide one
//! rectangle crossing.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hypervoronoi::percolation::{cross, Rect};
use hypervoronoi::pointprocess::{sample_marked, Color, Metric, SimulationParams, Window};
use hypervoronoi::voronoi::delaunay;
use hypervoronoi::{replicate_map, replicate_map_sequential};

fn one_replicate(lambda: f64, seed: u64) -> bool {
    let rect = Rect::new([0.0, 0.0], 2.0, 1.0, 0.0).unwrap();
    let params = SimulationParams {
        lambda,
        p: 0.55,
        metric: Metric::Euclidean,
        window: Window::Rect {
            x0: -0.3,
            y0: -0.3,
            x1: 2.3,
            y1: 1.3,
        },
        seed,
    };
    let conf = sample_marked(&params).unwrap();
    if conf.points.len() < 3 {
        return false;
    }
    let complex = delaunay(conf.points.clone(), Metric::Euclidean).unwrap();
    cross(&rect, &conf, Color::Black, &complex).unwrap().crossed
}

fn bench_replicates(c: &mut Criterion) {
    let mut group = c.benchmark_group("crossing-replicates");
    group.sample_size(10);
    for &lambda in &[8.0, 32.0] {
        group.bench_with_input(
            BenchmarkId::new("parallel", lambda as u64),
            &lambda,
            |b, &lambda| {
                b.iter(|| {
                    replicate_map(64, |i| {
                        one_replicate(lambda, hypervoronoi::rng::derive(1, &[i as u64]))
                    })
                })
            },
        );
        group.bench_with_input(
            BenchmarkId::new("sequential", lambda as u64),
            &lambda,
            |b, &lambda| {
                b.iter(|| {
                    replicate_map_sequential(64, |i| {
                        one_replicate(lambda, hypervoronoi::rng::derive(1, &[i as u64]))
                    })
                })
            },
        );
    }
    group.finish();
}

criterion_group!(benches, bench_replicates);
criterion_main!(benches);
