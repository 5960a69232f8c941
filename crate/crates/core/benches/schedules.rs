use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use dtc_core::coverage::{builtin_topology, greedy_cover, CoverOptions};
use dtc_core::dtc::{CircuitFamily, DtcParams};
use dtc_core::harness::{run_characterization, RunConfig};
use dtc_core::noise::{DeviceNoise, NoiseModel};
use dtc_core::par::Schedule;
use dtc_core::sim::{sample_trajectories, ShotOptions};

const SCHEDULES: [(&str, Schedule); 2] = [
    ("sequential", Schedule::Sequential),
    ("parallel", Schedule::Parallel),
];

fn trajectories(c: &mut Criterion) {
    let family = CircuitFamily::generate(&DtcParams::new(10, 12345).with_n_max(20)).unwrap();
    let noise = NoiseModel::uniform(10, 0.02, 0.01);
    let members: Vec<usize> = (0..=20).collect();
    let mut group = c.benchmark_group("trajectories_q10");
    group.sample_size(10);
    for (name, schedule) in SCHEDULES {
        let opts = ShotOptions::new(2000, 50, 1).with_schedule(schedule);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| sample_trajectories(&family, &noise, black_box(&members), &opts).unwrap())
        });
    }
    group.finish();
}

fn covering(c: &mut Criterion) {
    let map = builtin_topology("eagle-127").unwrap();
    let mut group = c.benchmark_group("cover_eagle127_q40");
    group.sample_size(10);
    for (name, schedule) in SCHEDULES {
        let opts = CoverOptions {
            schedule,
            ..CoverOptions::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| greedy_cover(&map, black_box(40), &opts).unwrap())
        });
    }
    group.finish();
}

fn exact_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_run_falcon27_q5");
    group.sample_size(10);
    for (name, schedule) in SCHEDULES {
        let mut cfg = RunConfig::new(
            DtcParams::new(5, 12345),
            builtin_topology("falcon-27").unwrap(),
        );
        cfg.noise = DeviceNoise::uniform(0.02, 0.0);
        cfg.schedule = schedule;
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_characterization(black_box(&cfg), None).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, trajectories, covering, exact_run);
criterion_main!(benches);
