//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL` line with
//! the measured numbers, then asserts.

use kinemap::kinematics::wrap_pi;
use kinemap::kinematics::maps::{fixture_4r, planar_chain, MAP_NAMES};
use kinemap::kinematics::singular::{coplanarity_cross_check, volume_factor, ALGEBRA_TOL, SCAN_TOL};
use kinemap::mechanism::{four_bar, stewart_platform};
use kinemap::planning::constructors::{
    combine_csec_cat, identity_plan, planar_rr_sec_cover, pointing_sec_cover, product_plan, torus_cat_cover,
};
use kinemap::planning::{
    h_fixture_filtration, h_fixture_gap, h_fixture_negative_candidates, measure_instability, validate_plan,
    ManipulationPlan, CONTINUITY_LIPSCHITZ,
};
use kinemap::tracking::{closed_loop, cyclicity_drift, shrinking_loop_probe, LoopShape};
use kinemap::{
    builtin_plan, canonical_map, dh_transform, singular_scan, ChainOutput, ChartFactor, ConfigChart, DhParams,
    JointKind, KinematicMap, MapSpec, Mechanism, TrackingSpec, WorkPath,
};
use nalgebra::Matrix4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

const DH_TOL: f64 = 1e-12;
const DH_WORKED_TOL: f64 = 1e-15;
const AREA_TOL: f64 = 1e-9;
const FD_STEP: f64 = 1e-6;
const FD_REL_TOL: f64 = 1e-5;
const TARGET_TOL: f64 = 1e-6;
const ENDPOINT_TOL: f64 = 1e-9;
const INTERIOR_DRIFT_MAX: f64 = 1e-3;
const LOLLIPOP_DRIFT_MIN: f64 = 0.1;

fn verdict(n: u32, what: &str, ok: bool, detail: String, start: Instant) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("criterion {n}: {tag} {what} ({detail}; {:.2} s)", start.elapsed().as_secs_f64());
    assert!(ok, "criterion {n} failed: {detail}");
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_config(chart: &ConfigChart, r: &mut ChaCha8Rng, margin: f64) -> Vec<f64> {
    chart
        .factors
        .iter()
        .map(|f| match *f {
            ChartFactor::Circle => r.random_range(-PI..PI),
            ChartFactor::Interval { lo, hi } => r.random_range(lo + margin..hi - margin),
        })
        .collect()
}

/// The displayed DH matrix `Rz(θ) Tz(d) Tx(a) Rx(α)`, entry by entry.
fn dh_direct(theta: f64, d: f64, a: f64, alpha: f64) -> Matrix4<f64> {
    let (st, ct) = theta.sin_cos();
    let (sa, ca) = alpha.sin_cos();
    #[rustfmt::skip]
    let m = Matrix4::new(
        ct, -st * ca,  st * sa, a * ct,
        st,  ct * ca, -ct * sa, a * st,
        0.0,      sa,       ca,      d,
        0.0,     0.0,      0.0,    1.0,
    );
    m
}

#[test]
fn criterion_01_dh_matrix() {
    let t = Instant::now();
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let p = DhParams::new(r.random_range(-PI..PI), r.random_range(-2.0..2.0), r.random_range(-2.0..2.0), r.random_range(-PI..PI));
        let (kind, var) = if i % 2 == 0 { (JointKind::R, r.random_range(-PI..PI)) } else { (JointKind::P, r.random_range(-1.0..1.0)) };
        let expect = match kind {
            JointKind::R => dh_direct(var, p.d, p.a, p.alpha),
            _ => dh_direct(p.theta, var, p.a, p.alpha),
        };
        let got = dh_transform(&p, var, kind).to_homogeneous();
        worst = worst.max((got - expect).amax());
    }
    let w1 = dh_transform(&DhParams::new(0.0, 1.0, 2.0, 0.0), FRAC_PI_2, JointKind::R).to_homogeneous();
    #[rustfmt::skip]
    let e1 = Matrix4::new(0.0, -1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 2.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0);
    let w2 = dh_transform(&DhParams::new(0.0, 0.0, 0.0, FRAC_PI_2), 0.0, JointKind::R).to_homogeneous();
    #[rustfmt::skip]
    let e2 = Matrix4::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0);
    let identity = dh_transform(&DhParams::new(0.0, 0.0, 0.0, 0.0), 0.0, JointKind::R).to_homogeneous();
    let worked = (w1 - e1).amax().max((w2 - e2).amax());
    let ok = worst <= DH_TOL && worked <= DH_WORKED_TOL && identity == Matrix4::identity();
    verdict(1, "DH matrix", ok, format!("random max err {worst:.3e}, worked max err {worked:.3e}"), t);
}

#[test]
fn criterion_02_grubler() {
    let t = Instant::now();
    let fb = four_bar().mobility(true, 0);
    let sp = stewart_platform().mobility(false, 0);
    let sp6 = stewart_platform().mobility(false, 6);
    let ok = fb.naive_mobility == 1 && sp.naive_mobility == 12 && sp6.effective_mobility == 6;
    let detail = format!(
        "four-bar M={}, Stewart naive M={}, effective M={}",
        fb.naive_mobility, sp.naive_mobility, sp6.effective_mobility
    );
    verdict(2, "Grubler mobility", ok, detail, t);
}

#[test]
fn criterion_03_pointing_singularities() {
    let t = Instant::now();
    let k = canonical_map("pointing", &[]).unwrap();
    let scan = singular_scan(&k, 360, SCAN_TOL).unwrap();
    let mismatches = scan.cells.iter().filter(|c| c.singular != (c.center[0].cos().abs() <= SCAN_TOL)).count();
    let flagged = scan.singular_cells.len();
    let bands_at_poles = scan.components.len() == 2
        && scan.components.iter().all(|comp| {
            comp.cells.iter().all(|&i| (wrap_pi(scan.cells[i].center[0]).abs() - FRAC_PI_2).abs() < 0.05)
        });
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        for j in 0..100 {
            let a = -PI + 2.0 * PI * (i as f64 + 0.5) / 100.0;
            let b = -PI + 2.0 * PI * (j as f64 + 0.5) / 100.0;
            worst = worst.max((volume_factor(&k.jacobian(&[a, b])) - a.cos().abs()).abs());
        }
    }
    let ok = mismatches == 0 && flagged > 0 && bands_at_poles && worst <= AREA_TOL;
    let detail = format!(
        "{flagged} flagged cells, {mismatches} mismatches, {} components, area factor err {worst:.3e}",
        scan.components.len()
    );
    verdict(3, "pointing singular bands", ok, detail, t);
}

#[test]
fn criterion_04_coplanarity() {
    let t = Instant::now();
    let k = KinematicMap::from_mechanism(&fixture_4r(), 4, ChainOutput::Pose).unwrap();
    let mut r = rng(4);
    let corner = |r: &mut ChaCha8Rng| if r.random_bool(0.5) { 0.0 } else { PI };
    let mut agree = 0;
    let mut singular_seen = 0;
    for i in 0..10_000 {
        let mut q: Vec<f64> = (0..4).map(|_| r.random_range(-PI..PI)).collect();
        if i % 10 == 0 {
            q[1] = corner(&mut r);
            q[2] = corner(&mut r);
        }
        let x = coplanarity_cross_check(&k.frame_chain(&q).unwrap(), ALGEBRA_TOL).unwrap();
        singular_seen += x.coplanar as usize;
        agree += x.agrees_with_orientation as usize;
    }
    let mut invariant = 0;
    for _ in 0..1000 {
        let (m1, m2) = (corner(&mut r), corner(&mut r));
        let q = [r.random_range(-PI..PI), m1, m2, r.random_range(-PI..PI)];
        let moved = [r.random_range(-PI..PI), m1, m2, r.random_range(-PI..PI)];
        let a = coplanarity_cross_check(&k.frame_chain(&q).unwrap(), ALGEBRA_TOL).unwrap();
        let b = coplanarity_cross_check(&k.frame_chain(&moved).unwrap(), ALGEBRA_TOL).unwrap();
        if a.coplanar && b.coplanar && a.orientation_rank < 3 && b.orientation_rank < 3 {
            invariant += 1;
        }
    }
    let ok = agree == 10_000 && singular_seen >= 1000 && invariant == 1000;
    let detail = format!("agreement {agree}/10000 ({singular_seen} coplanar), invariance {invariant}/1000");
    verdict(4, "coplanarity vs orientation rank", ok, detail, t);
}

fn fd_worst(k: &KinematicMap, r: &mut ChaCha8Rng, skip: impl Fn(&[f64]) -> bool) -> (f64, usize) {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    while count < 1000 {
        let c = random_config(k.config_chart(), r, 1e-3);
        if skip(&c) || kinemap::singular_test(k, &c, ALGEBRA_TOL).unwrap().is_singular {
            continue;
        }
        let j = k.jacobian(&c);
        let n = k.numeric_jacobian(&c, FD_STEP);
        worst = worst.max((j - n).amax() / k.jacobian(&c).amax().max(1.0));
        count += 1;
    }
    (worst, count)
}

#[test]
fn criterion_05_jacobians() {
    let t = Instant::now();
    let mut r = rng(5);
    let mut rows = Vec::new();
    for name in MAP_NAMES {
        let k = canonical_map(name, &[]).unwrap();
        // kinks of h at 1 and 2
        let skip = |c: &[f64]| name == "h_fixture" && ((c[0] - 1.0).abs() < 1e-3 || (c[0] - 2.0).abs() < 1e-3);
        rows.push((name.to_string(), fd_worst(&k, &mut r, skip).0));
    }
    let k4 = KinematicMap::from_mechanism(&fixture_4r(), 4, ChainOutput::Pose).unwrap();
    rows.push(("4r".into(), fd_worst(&k4, &mut r, |_| false).0));
    let ok = rows.iter().all(|(_, e)| *e <= FD_REL_TOL);
    let detail = rows.iter().map(|(n, e)| format!("{n} {e:.2e}")).collect::<Vec<_>>().join(", ");
    verdict(5, "analytic vs finite-difference Jacobians", ok, detail, t);
}

#[test]
fn criterion_06_planar_rr_plan() {
    let t = Instant::now();
    let plan = builtin_plan("planar_rr").unwrap();
    let v = validate_plan(&plan, 12, CONTINUITY_LIPSCHITZ).unwrap();
    let inst = measure_instability(&plan, 12, None).unwrap();
    let ok = plan.len() == 3
        && v.pass
        && v.samples == 12usize.pow(4)
        && v.uncovered == 0
        && v.endpoint_failures == 0
        && v.max_target_error <= TARGET_TOL
        && v.lipschitz == 50.0
        && (inst.eps - 2.0 * inst.spacing).abs() < 1e-15
        && inst.max_order == 3;
    let detail = format!(
        "{} pieces, {} samples, pass={}, max target err {:.2e}, max ratio {:.3}, eps {:.6}, max order {} at c={:?} w={:?}",
        plan.len(),
        v.samples,
        v.pass,
        v.max_target_error,
        v.max_continuity_ratio,
        inst.eps,
        inst.max_order,
        inst.witness.0,
        inst.witness.1
    );
    verdict(6, "planar RR plan", ok, detail, t);
}

fn combine_counts() -> Vec<(String, usize, usize)> {
    let mut out = Vec::new();
    let torus = torus_cat_cover(&ConfigChart::circles(2));
    for (name, map, sec) in [
        ("planar_rr", MapSpec::PlanarRr { r1: 2.0, r2: 1.0 }, planar_rr_sec_cover(2.0, 1.0)),
        ("pointing", MapSpec::Pointing, pointing_sec_cover(false)),
        ("pointing/split", MapSpec::Pointing, pointing_sec_cover(true)),
    ] {
        let expect = torus.len() + sec.len() - 1;
        let p = combine_csec_cat(map, torus.clone(), sec).unwrap();
        out.push((format!("csec+cat {name}"), p.len(), expect));
    }
    let interval = ConfigChart::interval(0.0, 1.0);
    let sec = vec![kinemap::planning::SecPiece {
        domain: kinemap::planning::Domain::All,
        section: kinemap::planning::Section::Identity,
        target: vec![0.5],
    }];
    let p = combine_csec_cat(MapSpec::IdentityInterval { lo: 0.0, hi: 1.0 }, torus_cat_cover(&interval), sec).unwrap();
    out.push(("csec+cat interval".into(), p.len(), 1));
    out
}

#[test]
fn criterion_07_scara_product() {
    let t = Instant::now();
    let rr = builtin_plan("planar_rr").unwrap();
    let lift = identity_plan(MapSpec::IdentityInterval { lo: 0.0, hi: 1.0 });
    let scara = product_plan(&rr, &lift);
    let builtin = builtin_plan("scara").unwrap();
    let v = validate_plan(&builtin, 6, CONTINUITY_LIPSCHITZ).unwrap();
    let same_pieces = scara.pieces == builtin.pieces;

    let fixtures: Vec<ManipulationPlan> = ["identity_interval", "identity_circle", "identity_torus", "planar_rr", "h_fixture"]
        .iter()
        .map(|n| builtin_plan(n).unwrap())
        .collect();
    let mut law_failures = Vec::new();
    for f in &fixtures {
        for g in &fixtures {
            let p = product_plan(f, g);
            if p.len() != f.len() + g.len() - 1 || p.len() < f.len().max(g.len()) {
                law_failures.push(format!("{}x{}", f.map.name(), g.map.name()));
            }
        }
    }
    for (name, got, expect) in combine_counts() {
        if got != expect {
            law_failures.push(name);
        }
    }
    let ok = scara.len() == 3 && same_pieces && v.pass && law_failures.is_empty();
    let detail = format!(
        "{} pieces, {} samples, pass={}, max target err {:.2e}, count-law failures {:?}",
        scara.len(),
        v.samples,
        v.pass,
        v.max_target_error,
        law_failures
    );
    verdict(7, "SCARA product plan and count laws", ok, detail, t);
}

#[test]
fn criterion_08_pointing_plan() {
    let t = Instant::now();
    let plan = builtin_plan("pointing").unwrap();
    let v = validate_plan(&plan, 10, CONTINUITY_LIPSCHITZ).unwrap();
    let inst = measure_instability(&plan, 10, None).unwrap();
    let split = combine_csec_cat(MapSpec::Pointing, torus_cat_cover(&ConfigChart::circles(2)), pointing_sec_cover(true)).unwrap();
    let vs = validate_plan(&split, 10, CONTINUITY_LIPSCHITZ).unwrap();
    let ok = plan.len() <= 5 && v.pass && inst.max_order >= 3 && inst.max_order <= plan.len() && split.len() <= 5 && vs.pass;
    let detail = format!(
        "{} pieces, {} samples, pass={}, max order {}; {}-piece variant pass={}",
        plan.len(),
        v.samples,
        v.pass,
        inst.max_order,
        split.len(),
        vs.pass
    );
    verdict(8, "pointing plan", ok, detail, t);
}

#[test]
fn criterion_09_tracking_cyclicity() {
    let t = Instant::now();
    let spec = TrackingSpec::default();
    let rr = canonical_map("planar_rr", &[2.0, 1.0]).unwrap();
    let up = kinemap::planning::canonical_section(rr.spec().unwrap(), "elbow_up").unwrap();
    let mut interior: f64 = 0.0;
    for (center, radius) in [([0.0, 0.0], 2.0), ([2.0, 0.0], 0.5)] {
        let lp = closed_loop(rr.work_chart(), &center, radius, LoopShape::Circle).unwrap();
        let start = up.eval(&lp.points[0]).unwrap();
        interior = interior.max(cyclicity_drift(&rr, &spec, &lp, &start).unwrap());
    }
    let pointing = canonical_map("pointing", &[]).unwrap();
    let geo = kinemap::planning::canonical_section(&MapSpec::Pointing, "geo").unwrap();
    let rows = shrinking_loop_probe(&pointing, &spec, &[0.0, 0.0, 1.0], &[0.4, 0.2, 0.1], LoopShape::Lollipop, |w| {
        geo.eval(w).ok()
    })
    .unwrap();
    let ok = interior <= INTERIOR_DRIFT_MAX && rows.len() == 3 && rows.iter().all(|r| r.drift >= LOLLIPOP_DRIFT_MIN);
    let detail = format!(
        "interior drift {interior:.2e}; lollipop drifts {}",
        rows.iter().map(|r| format!("r={} {:.4}", r.radius, r.drift)).collect::<Vec<_>>().join(", ")
    );
    verdict(9, "tracking cyclicity", ok, detail, t);
}

#[test]
fn criterion_10_h_fixture() {
    let t = Instant::now();
    let mut gap_errors = 0;
    for i in 0..=2000 {
        let y = i as f64 / 1000.0;
        let expect = if i == 1000 { 1.0 } else { 0.0 };
        if h_fixture_gap(y).unwrap() != expect {
            gap_errors += 1;
        }
    }
    let filtration = h_fixture_filtration();
    let passes = [101, 100].iter().all(|&n| validate_plan(&filtration, n, CONTINUITY_LIPSCHITZ).unwrap().pass);
    let mut single_passes = Vec::new();
    for n in [100, 101, 150, 200] {
        for (name, p) in h_fixture_negative_candidates() {
            if validate_plan(&p, n, CONTINUITY_LIPSCHITZ).unwrap().pass {
                single_passes.push(format!("{name}@{n}"));
            }
        }
    }
    let ok = gap_errors == 0 && filtration.len() == 2 && passes && single_passes.is_empty();
    let detail = format!(
        "gap errors {gap_errors}, 2-piece filtration pass={passes}, single-piece passes {single_passes:?}"
    );
    verdict(10, "h fixture", ok, detail, t);
}

#[test]
fn criterion_11_round_trips_and_determinism() {
    let t = Instant::now();
    let mechs: Vec<Mechanism> = vec![four_bar(), stewart_platform(), fixture_4r(), planar_chain(&[2.0, 1.0])];
    let mech_ok = mechs.iter().all(|m| Mechanism::from_json(&m.to_json()).as_ref() == Ok(m));
    let mut plans: Vec<ManipulationPlan> =
        kinemap::planning::BUILTIN_NAMES.iter().map(|n| builtin_plan(n).unwrap()).collect();
    plans.push(combine_csec_cat(MapSpec::Pointing, torus_cat_cover(&ConfigChart::circles(2)), pointing_sec_cover(true)).unwrap());
    let plan_ok = plans.iter().all(|p| {
        let text = p.to_json();
        ManipulationPlan::from_json(&text).as_ref() == Ok(p) && ManipulationPlan::from_json(&text).unwrap().to_json() == text
    });
    let lp = closed_loop(&kinemap::WorkChart::Sphere, &[0.0, 0.0, 1.0], 0.3, LoopShape::Lollipop).unwrap();
    let path_ok = WorkPath::from_csv(&lp.to_csv()).as_ref() == Ok(&lp);
    let plan = builtin_plan("planar_rr").unwrap();
    let a = validate_plan(&plan, 6, CONTINUITY_LIPSCHITZ).unwrap().to_csv();
    let b = validate_plan(&plan, 6, CONTINUITY_LIPSCHITZ).unwrap().to_csv();
    let k = canonical_map("pointing", &[]).unwrap();
    let s1 = singular_scan(&k, 40, SCAN_TOL).unwrap().to_csv();
    let s2 = singular_scan(&k, 40, SCAN_TOL).unwrap().to_csv();
    let i1 = measure_instability(&plan, 6, None).unwrap().summary_csv();
    let i2 = measure_instability(&plan, 6, None).unwrap().summary_csv();
    let det_ok = a == b && s1 == s2 && i1 == i2;
    let ok = mech_ok && plan_ok && path_ok && det_ok;
    let detail = format!(
        "mechanisms {mech_ok}, plans {plan_ok} ({} documents), paths {path_ok}, repeated reports identical {det_ok}",
        plans.len()
    );
    verdict(11, "round trips and determinism", ok, detail, t);
}

#[test]
fn endpoint_tolerance_is_pinned() {
    assert_eq!(kinemap::planning::validate::ENDPOINT_TOL, ENDPOINT_TOL);
    assert_eq!(kinemap::planning::validate::TARGET_TOL, TARGET_TOL);
}
