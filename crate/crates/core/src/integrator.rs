//! Time stepping of the Landau–Lifshitz–Gilbert equation in reduced time,
//!
//! ```text
//! m' = -|H| [ m × h + g m × (m × h) ],   h = H / |H|,
//! ```
//!
//! with the field frozen over each step. Under a frozen field the motion
//! separates into the component `u = m·h`, which obeys `u' = g|H|(1 - u²)`,
//! and the transverse part, which precesses about `h` at rate `|H|` while
//! shrinking as `sqrt(1 - u²)`. Both have closed forms, so a single spin is
//! advanced exactly and stays on the unit sphere for any step size.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{effective_field_into, FieldSet};
use crate::model::{AppliedField, ChainState, MaterialStack, Spin};
use crate::vec3::Vec3;

/// Damping and step-size policy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepParams {
    /// Dimensionless damping coefficient.
    pub g: f64,
    /// Fixed step used by [`chain_step`], reduced time units.
    pub dt: f64,
    /// Number of steps that resolve one period of the fastest precession.
    pub steps_per_period: u32,
    /// Step used when every field vanishes.
    pub dt_max: f64,
}

impl Default for StepParams {
    fn default() -> Self {
        StepParams {
            g: 0.5,
            dt: 1e-9,
            steps_per_period: 8,
            dt_max: 1e-2,
        }
    }
}

impl StepParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.g >= 0.0 && self.g.is_finite()) {
            return Err(Error::validation("g", "must be non-negative"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::validation("dt", "must be positive"));
        }
        if self.steps_per_period < 4 {
            return Err(Error::validation("steps_per_period", "must be at least 4"));
        }
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return Err(Error::validation("dt_max", "must be positive"));
        }
        Ok(())
    }
}

/// Transverse components below ~1e-14 (a few dozen ulps) are rounding noise
/// around m = ±h; stepping them only stirs that noise.
const FIXED_POINT_TOL_SQ: f64 = 1e-28;

/// Closed-form frozen-field propagation without the final renormalization.
/// `m` is assumed unit length.
#[inline]
pub fn exact_propagate(m: Vec3, field: Vec3, g: f64, dt: f64) -> Vec3 {
    propagate_with_strength(m, field, field.norm(), g, dt)
}

/// [`exact_propagate`] with `|field|` supplied by the caller.
#[inline]
pub(crate) fn propagate_with_strength(m: Vec3, field: Vec3, strength: f64, g: f64, dt: f64) -> Vec3 {
    if strength == 0.0 {
        return m;
    }
    let h = field * (1.0 / strength);
    let u = m.dot(h);
    let v = m - h * u;
    let v_sq = v.norm_sq();
    if v_sq <= FIXED_POINT_TOL_SQ {
        // m = ±h to machine precision: both are fixed points of the flow.
        return m;
    }

    // 1 ± u, computed from |v|² on the side where direct subtraction cancels.
    let (one_plus_u, one_minus_u) = if u < 0.0 {
        let omu = 1.0 - u;
        (v_sq / omu, omu)
    } else {
        let opu = 1.0 + u;
        (opu, v_sq / opu)
    };

    // cosh(a) + u sinh(a) = e^a [(1+u) + (1-u) e^{-2a}] / 2, a = g|H|dt.
    let q = (-2.0 * g * strength * dt).exp();
    let denom = one_plus_u + one_minus_u * q;
    if denom == 0.0 {
        // m = -h and e^{-2a} underflowed: the antiparallel fixed point.
        return m;
    }
    let u_new = (one_plus_u - one_minus_u * q) / denom;
    let shrink = 2.0 * q.sqrt() / denom;

    let (s, c) = (strength * dt).sin_cos();
    let v_new = (v * c + h.cross(v) * s) * shrink;
    h * u_new + v_new
}

/// Advances one spin by `dt` under the frozen field `field`, exactly.
pub fn llg_step_exact(m: Spin, field: Vec3, g: f64, dt: f64) -> Result<Spin> {
    let v = m.vec();
    let n = v.norm();
    if (1.0 - n).abs() > 1e-9 {
        return Err(Error::NonUnitSpin { norm: n });
    }
    Ok(advance(v, field, g, dt))
}

#[inline]
fn advance(m: Vec3, field: Vec3, g: f64, dt: f64) -> Spin {
    if field == Vec3::ZERO {
        return Spin::new_unchecked(m);
    }
    let out = exact_propagate(m, field, g, dt);
    if out == m {
        return Spin::new_unchecked(m);
    }
    Spin::new_unchecked(out * (1.0 / out.norm()))
}

#[inline]
fn llg_rhs(m: Vec3, field: Vec3, g: f64) -> Vec3 {
    let mxh = m.cross(field);
    -(mxh + m.cross(mxh) * g)
}

/// Classical fourth-order Runge–Kutta integration of the same frozen-field
/// equation with `substeps` equal steps, renormalizing after each.
pub fn llg_step_rk4(m: Spin, field: Vec3, g: f64, dt: f64, substeps: u32) -> Spin {
    let substeps = substeps.max(1);
    let h = dt / substeps as f64;
    let mut y = m.vec();
    for _ in 0..substeps {
        let k1 = llg_rhs(y, field, g);
        let k2 = llg_rhs(y + k1 * (0.5 * h), field, g);
        let k3 = llg_rhs(y + k2 * (0.5 * h), field, g);
        let k4 = llg_rhs(y + k3 * h, field, g);
        y = y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        y = y * (1.0 / y.norm());
    }
    Spin::new_unchecked(y)
}

/// One Jacobi step of the whole chain with `params.dt`: every field is
/// evaluated on the input state, then every spin is advanced under its own
/// frozen field.
pub fn chain_step(
    stack: &MaterialStack,
    state: &ChainState,
    applied: &AppliedField,
    params: &StepParams,
) -> Result<ChainState> {
    state.check_len(stack)?;
    params.validate()?;
    let mut fields = Vec::new();
    effective_field_into(stack, &state.spins, applied.vector(), &mut fields);
    let mut next = state.clone();
    advance_all(&mut next.spins, &fields, params.g, params.dt);
    next.time += params.dt;
    Ok(next)
}

#[inline]
pub(crate) fn advance_all(spins: &mut [Spin], fields: &[Vec3], g: f64, dt: f64) {
    for (s, &f) in spins.iter_mut().zip(fields) {
        *s = advance(s.vec(), f, g, dt);
    }
}

/// Step that turns the fastest local precession (rate `max |H_i|`) through
/// `2π / steps_per_period`; `dt_max` when no field acts.
pub fn select_dt(fields: &FieldSet, params: &StepParams) -> f64 {
    dt_for_rate(fields.max_magnitude, params)
}

fn dt_for_rate(rate: f64, params: &StepParams) -> f64 {
    if rate > 0.0 {
        2.0 * PI / params.steps_per_period as f64 / rate
    } else {
        params.dt_max
    }
}

/// Linear stiffness of each layer, oersted: the largest rate at which a
/// small deviation of that spin changes its own torque. Exchange with both
/// neighbours contributes `2(J_left + J_right)/M`, anisotropy `2K/M` and
/// demagnetization `D M`.
pub fn layer_stiffness(stack: &MaterialStack) -> Vec<f64> {
    let n = stack.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { stack.j[i - 1] } else { 0.0 };
            let right = if i + 1 < n { stack.j[i] } else { 0.0 };
            (2.0 * (left + right) + 2.0 * stack.k[i]) / stack.m[i] + stack.demag_coeff * stack.m[i]
        })
        .collect()
}

/// Step that resolves the fastest precession of the coupled chain,
/// `max_i (|H_i| + stiffness_i)`, in `steps_per_period` steps.
///
/// [`select_dt`] only looks at the field magnitudes. In a frozen-field
/// Jacobi update the neighbour fields lag by one step, and spin waves grow
/// unless `dt` also resolves the exchange stiffness, which for the Sm-Co/Fe
/// stack is three orders of magnitude above the applied field.
pub fn stable_dt(fields: &FieldSet, stiffness: &[f64], params: &StepParams) -> f64 {
    let rate = fields
        .h
        .iter()
        .zip(stiffness)
        .map(|(h, s)| h.norm() + s)
        .fold(0.0, f64::max);
    dt_for_rate(rate, params)
}
