use std::hint::black_box;

use actinet::fhn::{laplacian_at, Simulator};
use actinet::ingest::ConductiveGrid;
use actinet_bench::{bar_lattice, excited};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

const STEPS: u64 = 20;

fn bench_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    group.sample_size(10);
    for n in [256usize, 1024] {
        for (name, grid) in [
            ("full", ConductiveGrid::full(n, n).unwrap()),
            ("lattice", bar_lattice(n, 16, 3)),
        ] {
            group.throughput(Throughput::Elements(grid.conductive_count() as u64 * STEPS));
            group.bench_with_input(BenchmarkId::new(name, n), &grid, |b, grid| {
                let mut sim: Simulator = excited(grid);
                b.iter(|| {
                    for _ in 0..STEPS {
                        sim.step(grid, &[]).unwrap();
                    }
                    black_box(sim.state().t())
                })
            });
        }
    }
    group.finish();
}

fn bench_laplacian(c: &mut Criterion) {
    let grid = bar_lattice(256, 16, 3);
    let sim = excited(&grid);
    let nodes: Vec<_> = grid.conductive_nodes().collect();
    c.bench_function("laplacian/lattice/256", |b| {
        b.iter(|| {
            nodes
                .iter()
                .map(|&(x, y)| laplacian_at(sim.state(), sim.lattice(), sim.params(), x, y))
                .sum::<f64>()
        })
    });
}

criterion_group!(benches, bench_step, bench_laplacian);
criterion_main!(benches);
