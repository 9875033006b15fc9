use std::f64::consts::PI;

use pulsed_squeeze::observables::{variance, NoPhotons, VarianceSpec};
use pulsed_squeeze::sweep::{
    asymptotic_scan, find_minimum, find_minimum_with, minima_table, MinimaRequest, COARSE_SAMPLES,
};
use pulsed_squeeze::{DimensionlessModel, SourceMode};

fn vacuum(f0: f64, f1: f64, delta: f64) -> VarianceSpec {
    VarianceSpec::new(DimensionlessModel::new(f0, f1, delta, 0.0, 1e-8).unwrap())
        .with_source_mode(SourceMode::VacuumSource)
}

#[test]
fn threshold_minimum_matches_frozen_oracle() {
    let m = find_minimum(&vacuum(1.0, 1.5, 2.0), &NoPhotons).unwrap();
    // Dense ODE solve plus Brent refinement in scipy, frozen.
    assert!(((m.v_min - 0.146_306_575_840_352) / m.v_min).abs() < 1e-8);
    assert!((m.t0 - 0.166_619_828_421_134).abs() < 1e-5);
}

#[test]
fn minima_repeat_every_period_and_survive_refinement() {
    for (f0, f1) in [(1.0, 1.5), (0.7, 1.05), (0.9, 0.675)] {
        let spec = vacuum(f0, f1, 2.0);
        let m = find_minimum(&spec, &NoPhotons).unwrap();
        for k in 1..=5 {
            let v = variance(&spec, &NoPhotons, m.t0 + 2.0 * PI * k as f64 / 2.0).unwrap();
            assert!(((v - m.v_min) / m.v_min).abs() <= 1e-8);
        }
        let finer = find_minimum_with(&spec, &NoPhotons, 2 * COARSE_SAMPLES).unwrap();
        assert!(((finer.v_min - m.v_min) / m.v_min).abs() < 1e-8);
    }
}

#[test]
fn modulation_depth_ordering_below_threshold() {
    let table = minima_table(&MinimaRequest {
        fbar_grid: vec![0.5, 0.6, 0.7, 0.8, 0.9, 0.95],
        ..Default::default()
    })
    .unwrap();
    for fbar in [0.5, 0.6, 0.7, 0.8, 0.9, 0.95] {
        let v = |l: f64| table.get(fbar, l).unwrap().v_min().unwrap();
        assert!(v(1.5) < v(0.75) && v(0.75) < v(0.0), "fbar {fbar}");
        assert!((v(0.0) - 1.0 / (2.0 * (1.0 + fbar))).abs() < 1e-9);
    }
}

#[test]
fn fast_modulation_washes_out_like_inverse_delta() {
    let base = vacuum(1.0, 1.5, 2.0);
    let scan = asymptotic_scan(&base, &[2.0, 100.0, 300.0, 1000.0]).unwrap();
    assert!((scan.stationary_v_min - 0.25).abs() < 1e-9);
    let at = |d: f64| {
        scan.rows
            .iter()
            .find(|r| r.delta == d)
            .unwrap()
            .minimum
            .v_min
    };
    assert!(at(2.0) < at(1000.0));
    assert!((at(1000.0) - 0.25).abs() < 1e-3);
    let c = scan.fast_modulation_constant(100.0).unwrap();
    for d in [100.0, 300.0, 1000.0] {
        let scaled = d * (at(d) - scan.stationary_v_min).abs();
        assert!(scaled <= c && scaled > 0.5 * c, "Δ={d}: {scaled} vs C={c}");
    }
    assert_eq!(scan.deepest().unwrap().delta, 2.0);
}

#[test]
fn table_rows_are_ordered_by_parameters() {
    let req = MinimaRequest {
        fbar_grid: vec![0.6, 1.2, 0.6],
        f1_levels: vec![0.75, 0.0],
        ..Default::default()
    };
    let a = minima_table(&req).unwrap();
    let b = minima_table(&req).unwrap();
    assert_eq!(a, b);
    let keys: Vec<(f64, f64)> = a
        .rows
        .iter()
        .map(|r| (r.fbar_over_fth, r.f1_over_fbar))
        .collect();
    assert_eq!(keys, vec![(0.6, 0.75), (0.6, 0.0), (1.2, 0.75), (1.2, 0.0)]);
    // Above threshold the literal source carries n ~ 1/ε.
    assert!(a.get(1.2, 0.0).unwrap().v_min().unwrap() > 1e6);
}
