//! Parallel vs sequential throughput of the grid scans and batch integration.
//! Build with `--no-default-features` to see the fallback paths only; with
//! defaults, the parallel entry points use the worker pool and the `_seq`
//! functions are the single-threaded baseline.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use darboux_roll::controllability::{grid_report, grid_report_seq};
use darboux_roll::darboux::{
    FrameAngles, GoalDirection, RollingRateProfile, VirtualSurfaceInputs,
};
use darboux_roll::montana::{ContactState, SphereGeometry};
use darboux_roll::sim::{
    integrate_batch, integrate_batch_seq, AngleMode, InputSchedule, ModelKind, Scenario,
};

fn grids(n: usize) -> (Vec<FrameAngles>, Vec<f64>) {
    let angles = (0..n)
        .map(|i| FrameAngles::new(0.2 + 2.6 * i as f64 / n as f64, 0.0))
        .collect();
    let v_grid = (0..n).map(|i| -1.2 + 2.4 * i as f64 / n as f64).collect();
    (angles, v_grid)
}

fn scenarios(n: usize) -> Vec<Scenario> {
    (0..n)
        .map(|i| Scenario {
            model: ModelKind::DarbouxArcLength,
            initial: ContactState::new(0.0, 0.0, 0.0, 0.3, 0.1 * i as f64),
            inputs: InputSchedule::Constant {
                inputs: VirtualSurfaceInputs::new(0.1, 0.8 + 0.05 * i as f64, 0.2),
            },
            angle_mode: AngleMode::GoalDriven {
                goal: GoalDirection::new(0.4),
            },
            delta: RollingRateProfile::Constant { rate: 1.0 },
            geom: SphereGeometry::new(1.0),
            span: 1.0,
            step: 1e-3,
            drift_only: false,
        })
        .collect()
}

fn bench_grid_scan(c: &mut Criterion) {
    let mut group = c.benchmark_group("controllability_grid");
    for n in [8usize, 16] {
        let (angles, v_grid) = grids(n);
        let geom = SphereGeometry::new(1.0);
        group.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, _| {
            b.iter(|| grid_report(&angles, &v_grid, 0.3, &geom))
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, _| {
            b.iter(|| grid_report_seq(&angles, &v_grid, 0.3, &geom))
        });
    }
    group.finish();
}

fn bench_batch_integration(c: &mut Criterion) {
    let mut group = c.benchmark_group("integrate_batch");
    group.sample_size(10);
    for n in [4usize, 16] {
        let batch = scenarios(n);
        group.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, _| {
            b.iter(|| integrate_batch(&batch))
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, _| {
            b.iter(|| integrate_batch_seq(&batch))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_grid_scan, bench_batch_integration);
criterion_main!(benches);
