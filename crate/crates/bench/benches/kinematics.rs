use criterion::{criterion_group, criterion_main, Criterion};
use kinemap::kinematics::maps::planar_chain;
use kinemap::tracking::{closed_loop, LoopShape};
use kinemap::{canonical_map, lift_path, singular_scan, ChainOutput, KinematicMap, TrackingSpec};
use std::hint::black_box;

fn forward_and_jacobian(c: &mut Criterion) {
    let arm = KinematicMap::from_mechanism(&planar_chain(&[1.0, 0.8, 0.6, 0.4, 0.3, 0.2]), 6, ChainOutput::Pose).unwrap();
    let q = [0.1, -0.4, 0.7, 0.2, -1.1, 0.5];
    c.bench_function("forward_6r_pose", |b| b.iter(|| arm.forward(black_box(&q))));
    c.bench_function("jacobian_6r_pose", |b| b.iter(|| arm.jacobian(black_box(&q))));
}

fn scan(c: &mut Criterion) {
    let k = canonical_map("pointing", &[]).unwrap();
    c.bench_function("singular_scan_pointing_60", |b| b.iter(|| singular_scan(&k, 60, 1e-2).unwrap()));
}

fn lift(c: &mut Criterion) {
    let k = canonical_map("planar_rr", &[]).unwrap();
    let lp = closed_loop(k.work_chart(), &[2.0, 0.5], 0.3, LoopShape::Circle).unwrap();
    let spec = TrackingSpec::default();
    let w = &lp.points[0];
    let r = (w[0] * w[0] + w[1] * w[1]).sqrt();
    let c2 = ((r * r - 5.0) / 4.0).acos();
    let start = [w[1].atan2(w[0]) - c2.sin().atan2(2.0 + c2.cos()), c2];
    c.bench_function("lift_planar_rr_loop", |b| b.iter(|| lift_path(&k, &spec, &start, &lp).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = forward_and_jacobian, scan, lift
}
criterion_main!(benches);
