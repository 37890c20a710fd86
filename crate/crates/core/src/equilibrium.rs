//! Relaxation to equilibrium by damped LLG time stepping.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{energy_of, FieldSet};
use crate::integrator::{layer_stiffness, propagate_with_strength, StepParams};
use crate::model::{AppliedField, ChainState, MaterialStack, Spin};
use crate::vec3::Vec3;

/// Stopping rule for [`relax`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelaxCriteria {
    /// Bound on `max_i |m_i × H_i| / max(|H_i|, h_floor)`.
    pub torque_tol: f64,
    /// Oersted.
    pub h_floor: f64,
    pub max_steps: u64,
    /// Include the total energy in trace points.
    pub record_energy: bool,
}

impl Default for RelaxCriteria {
    fn default() -> Self {
        RelaxCriteria {
            torque_tol: 1e-8,
            h_floor: 1.0,
            max_steps: 10_000_000,
            record_energy: false,
        }
    }
}

impl RelaxCriteria {
    pub fn validate(&self) -> Result<()> {
        if !(self.torque_tol > 0.0) {
            return Err(Error::validation("torque_tol", "must be positive"));
        }
        if !(self.h_floor > 0.0) {
            return Err(Error::validation("h_floor", "must be positive"));
        }
        if self.max_steps < 1 {
            return Err(Error::validation("max_steps", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelaxResult {
    pub state: ChainState,
    /// Reduced time spent relaxing.
    pub equilibration_time: f64,
    pub steps: u64,
    pub converged: bool,
    pub final_residual: f64,
}

/// One line of a convergence trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePoint {
    pub step: u64,
    pub time: f64,
    pub residual: f64,
    /// erg/cm², present when `record_energy` is set.
    pub energy: Option<f64>,
}

/// Normalized transverse field `max_i |m_i × H_i| / max(|H_i|, h_floor)`:
/// the sine of the worst misalignment between a spin and its field.
pub fn residual(state: &ChainState, fields: &FieldSet, h_floor: f64) -> Result<f64> {
    if state.len() != fields.h.len() {
        return Err(Error::validation(
            "fields",
            format!("{} fields for {} spins", fields.h.len(), state.len()),
        ));
    }
    Ok(residual_of(&state.spins, &fields.h, h_floor))
}

#[inline]
fn residual_of(spins: &[Spin], fields: &[Vec3], h_floor: f64) -> f64 {
    let floor_sq = h_floor * h_floor;
    let mut worst: f64 = 0.0;
    for (s, h) in spins.iter().zip(fields) {
        let t = s.vec().cross(*h).norm_sq() / h.norm_sq().max(floor_sq);
        worst = worst.max(t);
    }
    worst.sqrt()
}

/// Scratch buffers for the relaxation loop. One pass over the chain yields
/// the fields, their magnitudes, the step-size rate used by
/// [`crate::integrator::stable_dt`] and the residual.
struct Workspace {
    stiffness: Vec<f64>,
    h: Vec<Vec3>,
    strength: Vec<f64>,
    floor_sq: f64,
}

impl Workspace {
    fn new(stack: &MaterialStack, h_floor: f64) -> Self {
        let n = stack.len();
        Workspace {
            stiffness: layer_stiffness(stack),
            h: vec![Vec3::ZERO; n],
            strength: vec![0.0; n],
            floor_sq: h_floor * h_floor,
        }
    }

    /// Returns `(max_i |H_i| + stiffness_i, residual)`.
    #[inline]
    fn evaluate(&mut self, stack: &MaterialStack, spins: &[Spin], applied: Vec3) -> (f64, f64) {
        let n = spins.len();
        let mut rate: f64 = 0.0;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let m = spins[i].vec();
            let inv_m = 1.0 / stack.m[i];
            let mut exch = Vec3::ZERO;
            if i + 1 < n {
                exch += (spins[i + 1].vec() - m) * stack.j[i];
            }
            if i > 0 {
                exch -= (m - spins[i - 1].vec()) * stack.j[i - 1];
            }
            let aniso = -2.0 * stack.k[i] * inv_m;
            let demag = -stack.demag_coeff * stack.m[i] * m.z;
            let h = Vec3::new(
                applied.x + exch.x * inv_m,
                applied.y + exch.y * inv_m + aniso * m.y,
                applied.z + exch.z * inv_m + aniso * m.z + demag,
            );
            let n2 = h.norm_sq();
            let strength = n2.sqrt();
            self.h[i] = h;
            self.strength[i] = strength;
            rate = rate.max(strength + self.stiffness[i]);
            worst = worst.max(m.cross(h).norm_sq() / n2.max(self.floor_sq));
        }
        (rate, worst.sqrt())
    }

    #[inline]
    fn advance(&self, spins: &mut [Spin], g: f64, dt: f64) {
        for ((s, &h), &strength) in spins.iter_mut().zip(&self.h).zip(&self.strength) {
            if strength == 0.0 {
                continue;
            }
            let out = propagate_with_strength(s.vec(), h, strength, g, dt);
            *s = Spin::new_unchecked(out * (1.0 / out.norm()));
        }
    }
}

/// Relaxes `initial` under `applied` until the residual drops to
/// `criteria.torque_tol` or `criteria.max_steps` steps have been taken.
pub fn relax(
    stack: &MaterialStack,
    initial: &ChainState,
    applied: &AppliedField,
    criteria: &RelaxCriteria,
    step: &StepParams,
) -> Result<RelaxResult> {
    relax_traced(stack, initial, applied, criteria, step, None)
}

/// [`relax`] with a per-step callback receiving convergence diagnostics.
pub fn relax_traced(
    stack: &MaterialStack,
    initial: &ChainState,
    applied: &AppliedField,
    criteria: &RelaxCriteria,
    step: &StepParams,
    mut trace: Option<&mut dyn FnMut(&TracePoint)>,
) -> Result<RelaxResult> {
    initial.check_len(stack)?;
    criteria.validate()?;
    step.validate()?;

    let mut ws = Workspace::new(stack, criteria.h_floor);
    let h_applied = applied.vector();
    let mut state = initial.clone();
    let (mut rate, mut res) = ws.evaluate(stack, &state.spins, h_applied);
    let mut steps = 0u64;

    let mut emit = |steps: u64, state: &ChainState, res: f64| {
        if let Some(t) = trace.as_deref_mut() {
            let energy = criteria
                .record_energy
                .then(|| energy_of(stack, &state.spins, h_applied));
            t(&TracePoint { step: steps, time: state.time, residual: res, energy });
        }
    };
    emit(steps, &state, res);

    let period_angle = 2.0 * PI / step.steps_per_period as f64;
    while res > criteria.torque_tol && steps < criteria.max_steps {
        let dt = if rate > 0.0 { period_angle / rate } else { step.dt_max };
        ws.advance(&mut state.spins, step.g, dt);
        state.time += dt;
        steps += 1;
        (rate, res) = ws.evaluate(stack, &state.spins, h_applied);
        emit(steps, &state, res);
    }

    Ok(RelaxResult {
        equilibration_time: state.time - initial.time,
        converged: res <= criteria.torque_tol,
        final_residual: res,
        steps,
        state,
    })
}
