//! Effective field and total energy of a chain state.

use crate::error::Result;
use crate::model::{AppliedField, ChainState, MaterialStack, Spin};
use crate::vec3::Vec3;

/// Effective field per layer, oersted.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSet {
    pub h: Vec<Vec3>,
    pub max_magnitude: f64,
}

impl FieldSet {
    pub fn from_vec(h: Vec<Vec3>) -> Self {
        let max_magnitude = h.iter().map(|v| v.norm()).fold(0.0, f64::max);
        FieldSet { h, max_magnitude }
    }
}

/// Writes the effective field of every layer into `out` and returns the
/// largest magnitude. `spins` must have one entry per layer.
///
/// Exchange uses the free-surface closure `m_0 = m_1`, `m_{N+1} = m_N`, so the
/// outermost bonds contribute nothing.
pub(crate) fn effective_field_into(
    stack: &MaterialStack,
    spins: &[Spin],
    applied: Vec3,
    out: &mut Vec<Vec3>,
) -> f64 {
    let n = spins.len();
    out.clear();
    out.reserve(n);
    let mut max_sq: f64 = 0.0;
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
        // -(2K/M) e_x × (m × e_x) = -(2K/M) (0, m_y, m_z)
        let aniso = -2.0 * stack.k[i] * inv_m;
        let demag = -stack.demag_coeff * stack.m[i] * m.z;
        let h = Vec3::new(
            applied.x + exch.x * inv_m,
            applied.y + exch.y * inv_m + aniso * m.y,
            applied.z + exch.z * inv_m + aniso * m.z + demag,
        );
        max_sq = max_sq.max(h.norm_sq());
        out.push(h);
    }
    max_sq.sqrt()
}

/// Effective field `H_i` in every layer: applied + exchange + anisotropy +
/// demagnetization, in oersted.
pub fn effective_field(
    stack: &MaterialStack,
    state: &ChainState,
    applied: &AppliedField,
) -> Result<FieldSet> {
    state.check_len(stack)?;
    let mut h = Vec::new();
    let max_magnitude = effective_field_into(stack, &state.spins, applied.vector(), &mut h);
    Ok(FieldSet { h, max_magnitude })
}

/// Splits each field into its in-plane part and its normal component.
pub fn field_split(fields: &FieldSet) -> (Vec<Vec3>, Vec<f64>) {
    fields
        .h
        .iter()
        .map(|v| (Vec3::new(v.x, v.y, 0.0), v.z))
        .unzip()
}

/// Total energy per unit film area, erg/cm².
///
/// Exchange `J(1 - m_i·m_{i+1})` per bond, anisotropy `K|m×e_x|²`,
/// demagnetization `(D/2) M² m_z²` and Zeeman `-M m·H_a` per layer, each
/// multiplied by the layer thickness. The effective field is minus the
/// projected gradient of this energy divided by `d M_i`.
pub fn total_energy(
    stack: &MaterialStack,
    state: &ChainState,
    applied: &AppliedField,
) -> Result<f64> {
    state.check_len(stack)?;
    Ok(energy_of(stack, &state.spins, applied.vector()))
}

pub(crate) fn energy_of(stack: &MaterialStack, spins: &[Spin], applied: Vec3) -> f64 {
    let mut e = 0.0;
    for (b, &j) in stack.j.iter().enumerate() {
        e += j * (1.0 - spins[b].vec().dot(spins[b + 1].vec()));
    }
    for (i, s) in spins.iter().enumerate() {
        let m = s.vec();
        let mi = stack.m[i];
        e += stack.k[i] * (m.y * m.y + m.z * m.z);
        e += 0.5 * stack.demag_coeff * mi * mi * m.z * m.z;
        e -= mi * m.dot(applied);
    }
    e * stack.d
}
