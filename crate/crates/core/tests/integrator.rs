use proptest::prelude::*;
use springchain::integrator::{exact_propagate, llg_step_exact, llg_step_rk4};
use springchain::model::Spin;
use springchain::vec3::Vec3;

fn unit(theta: f64, phi: f64) -> Vec3 {
    Spin::from_angles(theta, phi).vec()
}

prop_compose! {
    fn any_unit()(theta in -3.2f64..3.2, phi in -1.6f64..1.6) -> Vec3 {
        unit(theta, phi)
    }
}

proptest! {
    #[test]
    fn norm_is_conserved(m in any_unit(), h in any_unit(), mag in 0.0f64..50.0, g in 0.0f64..1.0, dt in 0.0f64..0.5) {
        let out = exact_propagate(m, h * mag, g, dt);
        prop_assert!((out.norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn steps_compose(m in any_unit(), h in any_unit(), g in 0.0f64..1.0, t1 in 0.0f64..2.0, t2 in 0.0f64..2.0) {
        let one = llg_step_exact(Spin::from_direction(m).unwrap(), h * 1.5, g, t1 + t2).unwrap();
        let half = llg_step_exact(Spin::from_direction(m).unwrap(), h * 1.5, g, t1).unwrap();
        let two = llg_step_exact(half, h * 1.5, g, t2).unwrap();
        prop_assert!(one.vec().max_abs_diff(two.vec()) < 1e-12);
    }

    #[test]
    fn alignment_never_decreases(m in any_unit(), h in any_unit(), g in 0.01f64..1.0, dt in 0.0f64..5.0) {
        let out = llg_step_exact(Spin::from_direction(m).unwrap(), h * 2.0, g, dt).unwrap();
        prop_assert!(out.vec().dot(h) >= m.dot(h) - 2.0 * f64::EPSILON);
    }

    #[test]
    fn undamped_motion_keeps_alignment(m in any_unit(), h in any_unit(), dt in 0.0f64..5.0) {
        let out = llg_step_exact(Spin::from_direction(m).unwrap(), h * 3.0, 0.0, dt).unwrap();
        prop_assert!((out.vec().dot(h) - m.dot(h)).abs() < 1e-13);
    }

    #[test]
    fn agrees_with_fine_rk4(m in any_unit(), h in any_unit(), g in 0.0f64..1.0, hdt in 0.0f64..1.0) {
        let s = Spin::from_direction(m).unwrap();
        let exact = llg_step_exact(s, h * 4.0, g, hdt / 4.0).unwrap();
        let rk = llg_step_rk4(s, h * 4.0, g, hdt / 4.0, 2000);
        prop_assert!(exact.vec().max_abs_diff(rk.vec()) < 1e-10);
    }

    #[test]
    fn rotation_equivariance(m in any_unit(), h in any_unit(), g in 0.0f64..1.0, dt in 0.0f64..2.0, a in 0.0f64..6.3) {
        let (s, c) = a.sin_cos();
        let rot = |v: Vec3| Vec3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z);
        let lhs = rot(exact_propagate(m, h * 2.0, g, dt));
        let rhs = exact_propagate(rot(m), rot(h) * 2.0, g, dt);
        prop_assert!(lhs.max_abs_diff(rhs) < 1e-13);
    }
}

#[test]
fn precession_sense_and_relaxation_limit() {
    // m' = -|H| m × h: e_x about +z turns toward +y.
    let s = Spin::from_direction(Vec3::X).unwrap();
    let out = llg_step_exact(s, Vec3::Z, 0.0, 0.1).unwrap();
    assert!(out.vec().y > 0.0);
    // Strong damping for a long time ends on the field.
    let out = llg_step_exact(s, Vec3::Z * 10.0, 1.0, 100.0).unwrap();
    assert!(out.vec().max_abs_diff(Vec3::Z) < 1e-12);
}

#[test]
fn reference_case_matches_rk4() {
    let s = Spin::from_direction(Vec3::X).unwrap();
    let exact = llg_step_exact(s, Vec3::Z, 0.5, 0.3).unwrap();
    let rk = llg_step_rk4(s, Vec3::Z, 0.5, 0.3, 30_000);
    assert!(exact.vec().max_abs_diff(rk.vec()) < 1e-8);
}
