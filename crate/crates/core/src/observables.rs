//! Measurable aggregates of equilibrium states: torque density and
//! magnetization angle, and per-layer hysteresis branches.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{AngleProfile, AppliedField, MaterialStack};
use crate::sweep::SweepRecord;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TorqueCurve {
    pub theta_a: Vec<f64>,
    /// erg/cm²
    pub torque: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AngleCurve {
    pub theta_a: Vec<f64>,
    pub alpha: Vec<f64>,
}

/// `H_a d Σ_i M_i sin(θ_a − θ_i)`, erg/cm².
pub fn torque_density(stack: &MaterialStack, profile: &AngleProfile, applied: &AppliedField) -> f64 {
    let sum: f64 = stack
        .m
        .iter()
        .zip(&profile.theta)
        .map(|(m, t)| m * (applied.angle - t).sin())
        .sum();
    applied.magnitude * stack.d * sum
}

/// Direction of the in-plane resultant `Σ_i M_i (cos θ_i, sin θ_i)`.
///
/// The value is lifted onto the 2π branch nearest `reference` when one is
/// given, otherwise it lies in `(-π, π]`.
pub fn magnetization_angle(
    stack: &MaterialStack,
    profile: &AngleProfile,
    reference: Option<f64>,
) -> Result<f64> {
    let (mut sy, mut sx) = (0.0, 0.0);
    for (m, t) in stack.m.iter().zip(&profile.theta) {
        let (s, c) = t.sin_cos();
        sy += m * s;
        sx += m * c;
    }
    let total: f64 = stack.m.iter().sum();
    if (sx * sx + sy * sy).sqrt() <= 1e-12 * total {
        return Err(Error::ZeroResultant);
    }
    let alpha = sy.atan2(sx);
    Ok(match reference {
        Some(r) => alpha + 2.0 * PI * ((r - alpha) / (2.0 * PI)).round(),
        None => alpha,
    })
}

pub fn torque_curve(records: &[SweepRecord]) -> TorqueCurve {
    TorqueCurve {
        theta_a: records.iter().map(|r| r.theta_a).collect(),
        torque: records.iter().map(|r| r.torque).collect(),
    }
}

pub fn angle_curve(records: &[SweepRecord]) -> AngleCurve {
    AngleCurve {
        theta_a: records.iter().map(|r| r.theta_a).collect(),
        alpha: records.iter().map(|r| r.mag_angle).collect(),
    }
}

/// The increasing and decreasing branches `θ_i(θ_a)` of one layer, as
/// `(θ_a, θ_i)` pairs in sweep order.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerHysteresis {
    pub layer: usize,
    pub increasing: Vec<(f64, f64)>,
    pub decreasing: Vec<(f64, f64)>,
}

impl LayerHysteresis {
    /// Largest difference between the branches at θ_a values both contain.
    pub fn max_branch_gap(&self) -> f64 {
        let mut gap: f64 = 0.0;
        for &(a, ti) in &self.increasing {
            if let Some(&(_, td)) = self.decreasing.iter().find(|(b, _)| (a - b).abs() < 1e-9) {
                gap = gap.max((ti - td).abs());
            }
        }
        gap
    }
}

/// Extracts both branches of layer `layer` (0-based).
pub fn layer_hysteresis(
    inc: &[SweepRecord],
    dec: &[SweepRecord],
    layer: usize,
) -> Result<LayerHysteresis> {
    let n = inc
        .first()
        .or(dec.first())
        .map(|r| r.profile.len())
        .ok_or_else(|| Error::GridMismatch("no records".into()))?;
    if layer >= n {
        return Err(Error::validation("layer", format!("index {layer} out of range for {n} layers")));
    }
    if inc.iter().chain(dec).any(|r| r.profile.len() != n) {
        return Err(Error::GridMismatch("records have different chain lengths".into()));
    }
    let pick = |rs: &[SweepRecord]| rs.iter().map(|r| (r.theta_a, r.profile.theta[layer])).collect();
    Ok(LayerHysteresis { layer, increasing: pick(inc), decreasing: pick(dec) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Material;

    fn flat(n: usize, t: f64) -> AngleProfile {
        AngleProfile { theta: vec![t; n], phi: vec![0.0; n] }
    }

    #[test]
    fn aligned_profile_has_no_torque() {
        let s = MaterialStack::sm_co_fe(3, 3).unwrap();
        let a = AppliedField::new(4800.0, 0.7).unwrap();
        assert!(torque_density(&s, &flat(6, 0.7), &a).abs() < 1e-15);
    }

    #[test]
    fn single_layer_torque() {
        let s = MaterialStack::single(Material::FE).unwrap();
        let a = AppliedField::new(100.0, PI / 2.0).unwrap();
        let t = torque_density(&s, &flat(1, 0.0), &a);
        assert!((t - 3.4e-3).abs() < 1e-15, "{t}");
    }

    #[test]
    fn uniform_profile_angle() {
        let s = MaterialStack::sm_co_fe(3, 3).unwrap();
        let a = magnetization_angle(&s, &flat(6, 1.2), None).unwrap();
        assert!((a - 1.2).abs() < 1e-14);
        // lifted next to the reference
        let a = magnetization_angle(&s, &flat(6, 1.2), Some(7.0)).unwrap();
        assert!((a - (1.2 + 2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn symmetric_pair_points_along_x() {
        let s = MaterialStack::from_arrays(1, 1, 2e-8, vec![800.0; 2], vec![0.0; 2], vec![1e9]).unwrap();
        let p = AngleProfile { theta: vec![0.4, -0.4], phi: vec![0.0; 2] };
        assert!(magnetization_angle(&s, &p, None).unwrap().abs() < 1e-15);
    }

    #[test]
    fn cancelling_moments_have_no_angle() {
        let s = MaterialStack::from_arrays(1, 1, 2e-8, vec![800.0; 2], vec![0.0; 2], vec![1e9]).unwrap();
        let p = AngleProfile { theta: vec![0.0, PI], phi: vec![0.0; 2] };
        assert!(matches!(magnetization_angle(&s, &p, None), Err(Error::ZeroResultant)));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn torque_is_odd_under_mirror(
                theta in prop::collection::vec(-4.0f64..4.0, 6),
                theta_a in 0.0f64..(2.0 * PI),
            ) {
                let s = MaterialStack::sm_co_fe(3, 3).unwrap();
                let p = AngleProfile { theta, phi: vec![0.0; 6] };
                let t = torque_density(&s, &p, &AppliedField::new(4800.0, theta_a).unwrap());
                let tm = torque_density(&s, &p.mirrored(), &AppliedField::new(4800.0, 2.0 * PI - theta_a).unwrap());
                prop_assert!((t + tm).abs() <= 1e-12 * (1.0 + t.abs()));
            }

            #[test]
            fn mirrored_angle_is_negated(theta in prop::collection::vec(-1.0f64..1.0, 6)) {
                let s = MaterialStack::sm_co_fe(3, 3).unwrap();
                let p = AngleProfile { theta, phi: vec![0.0; 6] };
                let a = magnetization_angle(&s, &p, None).unwrap();
                let b = magnetization_angle(&s, &p.mirrored(), None).unwrap();
                prop_assert!(crate::model::wrap_pi(a + b).abs() < 1e-12);
            }

            #[test]
            fn resultant_is_bounded(theta in prop::collection::vec(-4.0f64..4.0, 6)) {
                let s = MaterialStack::sm_co_fe(3, 3).unwrap();
                let (mut x, mut y) = (0.0, 0.0);
                for (m, t) in s.m.iter().zip(&theta) {
                    x += m * t.cos();
                    y += m * t.sin();
                }
                let total: f64 = s.m.iter().sum();
                prop_assert!((x * x + y * y).sqrt() <= total * (1.0 + 1e-15));
            }
        }
    }
}
