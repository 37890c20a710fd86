//! Sweeps on a coarse-grained chain (thick layers, exchange scaled down by
//! 100) that shows the same sequence of transitions as the full stack at a
//! fraction of the cost.

use std::f64::consts::PI;

use springchain::error::Error;
use springchain::model::{build_stack, Material, MaterialStack, SM_CO_FE_INTERFACE_A};
use springchain::observables::layer_hysteresis;
use springchain::sweep::{
    find_critical_angle, find_critical_fields, find_jumps, loop_width, rotational_sweep,
    CriticalFieldOptions, Direction, SweepRecord, SweepSchedule, BRANCH_SWITCH_THRESHOLD,
    DEFAULT_BRANCH_TOL,
};

fn coarse_stack(n_hard: usize, n_soft: usize) -> MaterialStack {
    build_stack(n_hard, n_soft, 2e-7, Material::SM_CO, Material::FE, SM_CO_FE_INTERFACE_A).unwrap()
}

fn sweep(stack: &MaterialStack, h: f64, dir: Direction) -> Vec<SweepRecord> {
    rotational_sweep(stack, &SweepSchedule::full_turn(h, dir), &Default::default(), &Default::default()).unwrap()
}

#[test]
fn zero_field_moves_nothing() {
    let stack = coarse_stack(4, 4);
    let sched = SweepSchedule {
        coarse_step: 10f64.to_radians(),
        refine_step: 1f64.to_radians(),
        ..SweepSchedule::full_turn(0.0, Direction::Increasing)
    };
    let recs = rotational_sweep(&stack, &sched, &Default::default(), &Default::default()).unwrap();
    assert_eq!(recs.len(), 37);
    for r in &recs {
        assert!(r.converged);
        assert!(r.profile.theta.iter().all(|&t| t == 0.0));
        assert_eq!(r.steps, 0);
    }
}

#[test]
fn increasing_and_decreasing_sweeps_are_mirror_images() {
    let stack = coarse_stack(10, 10);
    let inc = sweep(&stack, 3000.0, Direction::Increasing);
    let dec = sweep(&stack, 3000.0, Direction::Decreasing);
    assert_eq!(inc.len(), dec.len());
    for (a, b) in inc.iter().zip(&dec) {
        assert!((a.theta_a + b.theta_a - 2.0 * PI).abs() < 1e-9);
        for (x, y) in a.profile.theta.iter().zip(&b.profile.theta) {
            assert!((x + y).abs() < 1e-6, "θ_a = {}: {x} vs {y}", a.theta_a.to_degrees());
        }
        assert_eq!(a.chirality, -b.chirality);
    }
}

#[test]
fn hysteretic_turn_has_one_flip_and_is_periodic() {
    let stack = coarse_stack(10, 10);
    let recs = sweep(&stack, 3000.0, Direction::Increasing);
    assert!(recs.iter().all(|r| r.converged));
    let jumps = find_jumps(&recs, BRANCH_SWITCH_THRESHOLD);
    assert_eq!(jumps.len(), 1);
    let k = jumps[0];
    assert_eq!(recs[k - 1].chirality, 1);
    assert_eq!(recs[k].chirality, -1);
    // refined around the flip
    assert!((recs[k].theta_a - recs[k - 1].theta_a - 0.1f64.to_radians()).abs() < 1e-9);
    // back to the easy axis after a full turn
    let last = recs.last().unwrap();
    let first = &recs[0];
    for (a, b) in last.profile.theta.iter().zip(&first.profile.theta) {
        let d = a - b;
        assert!((d - 2.0 * PI * (d / (2.0 * PI)).round()).abs() < 1e-6);
    }
    // continuity away from the flip
    for w in recs.windows(2) {
        if w[1].theta_a == recs[k].theta_a {
            continue;
        }
        let step = (w[1].theta_a - w[0].theta_a).abs();
        for (a, b) in w[0].profile.theta.iter().zip(&w[1].profile.theta) {
            assert!((a - b).abs() < 10.0 * step.max(1f64.to_radians()));
        }
    }
}

#[test]
fn critical_angle_matches_the_sweep() {
    let stack = coarse_stack(10, 10);
    let recs = sweep(&stack, 3000.0, Direction::Increasing);
    let k = find_jumps(&recs, BRANCH_SWITCH_THRESHOLD)[0];
    let tc = find_critical_angle(
        &stack,
        3000.0,
        (260f64.to_radians(), 290f64.to_radians()),
        1e-4,
        &Default::default(),
        &Default::default(),
    )
    .unwrap();
    assert!(tc > recs[k - 1].theta_a - 1e-4 && tc < recs[k].theta_a + 1e-4, "{}", tc.to_degrees());
}

#[test]
fn no_critical_angle_in_the_reversible_regime() {
    let stack = coarse_stack(10, 10);
    let r = find_critical_angle(
        &stack,
        400.0,
        (10f64.to_radians(), 350f64.to_radians()),
        1e-3,
        &Default::default(),
        &Default::default(),
    );
    assert!(matches!(r, Err(Error::NotFound(_))));
}

#[test]
fn loop_width_is_layer_independent_and_symmetric() {
    let stack = coarse_stack(10, 10);
    let inc = sweep(&stack, 3000.0, Direction::Increasing);
    let dec = sweep(&stack, 3000.0, Direction::Decreasing);
    let k = find_jumps(&inc, BRANCH_SWITCH_THRESHOLD)[0];
    let tc = 0.5 * (inc[k - 1].theta_a + inc[k].theta_a);
    let refine = 0.1f64.to_radians();
    let top = loop_width(&inc, &dec, 19, DEFAULT_BRANCH_TOL).unwrap();
    let interface = loop_width(&inc, &dec, 9, DEFAULT_BRANCH_TOL).unwrap();
    assert!((top - interface).abs() <= refine + 1e-9, "{} vs {}", top.to_degrees(), interface.to_degrees());
    // the loop spans [2π − θ_c, θ_c]
    assert!((top - (2.0 * tc - 2.0 * PI)).abs() <= 2.0 * refine, "{}", top.to_degrees());

    let h = layer_hysteresis(&inc, &dec, 19).unwrap();
    assert!(h.max_branch_gap() > 1.0);
    assert!(layer_hysteresis(&inc, &dec, 20).is_err());
}

#[test]
fn reversible_regime_has_no_loop() {
    let stack = coarse_stack(10, 10);
    let inc = sweep(&stack, 400.0, Direction::Increasing);
    let dec = sweep(&stack, 400.0, Direction::Decreasing);
    assert!(find_jumps(&inc, BRANCH_SWITCH_THRESHOLD).is_empty());
    for layer in [0, 9, 19] {
        assert_eq!(loop_width(&inc, &dec, layer, DEFAULT_BRANCH_TOL).unwrap(), 0.0);
    }
}

#[test]
fn critical_fields_are_ordered() {
    let stack = coarse_stack(10, 10);
    let opts = CriticalFieldOptions { samples: 6, ..Default::default() };
    let rep = find_critical_fields(&stack, (500.0, 6500.0), 100.0, &opts).unwrap();
    let c1 = rep.h_c1.expect("onset of hysteresis");
    let c2 = rep.h_c2.expect("loop narrowing");
    assert!((600.0..=900.0).contains(&c1), "H_c1 = {c1}");
    assert!((4000.0..=5300.0).contains(&c2), "H_c2 = {c2}");
    assert!(c1 < c2);
    // width grows from zero up to H_c2
    let below: Vec<_> = rep.samples.iter().filter(|s| s.h_a < c2).collect();
    assert!(below.windows(2).all(|w| w[1].loop_width >= w[0].loop_width));
    assert!(rep.samples.iter().filter(|s| s.h_a < c1).all(|s| s.loop_width == 0.0));
    assert!(rep.samples.windows(2).all(|w| w[0].h_a < w[1].h_a));
}
