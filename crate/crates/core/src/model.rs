//! Domain types for the layered film: material stack, spin chain state,
//! applied field, and the angle/chirality views of a state.
//!
//! Layers are indexed from the bottom of the hard material (`0`, deepest)
//! to the top soft layer (`n - 1`). Bond `i` couples layers `i` and `i + 1`;
//! bond `n_hard - 1` is the hard/soft interface.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// Demagnetization coefficient of an infinitely thin flat film.
pub const THIN_FILM_DEMAG: f64 = 4.0 * PI;

/// Default dead band for [`chirality`], radians.
pub const DEFAULT_CHIRALITY_THRESHOLD: f64 = 1e-3;

/// Unit vector giving the direction of one layer's moment.
#[derive(Clone, Copy, Debug, PartialEq)]
#[repr(transparent)]
pub struct Spin(Vec3);

impl Spin {
    /// Accepts `v` if it is unit length to within `1e-9`, then renormalizes it.
    pub fn new(v: Vec3) -> Result<Self> {
        let n = v.norm();
        if !((n - 1.0).abs() <= 1e-9) {
            return Err(Error::NonUnitSpin { norm: n });
        }
        Ok(Spin(v * (1.0 / n)))
    }

    /// Like [`Spin::new`] but keeps the components bit for bit, for restoring
    /// saved states.
    pub fn restore(v: Vec3) -> Result<Self> {
        let n = v.norm();
        if !((n - 1.0).abs() <= 1e-9) {
            return Err(Error::NonUnitSpin { norm: n });
        }
        Ok(Spin(v))
    }

    /// Normalizes an arbitrary non-zero vector.
    pub fn from_direction(v: Vec3) -> Result<Self> {
        v.normalized()
            .map(Spin)
            .ok_or(Error::NonUnitSpin { norm: v.norm() })
    }

    /// `(cos φ cos θ, cos φ sin θ, sin φ)`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Spin(Vec3::new(cp * ct, cp * st, sp))
    }

    pub(crate) fn new_unchecked(v: Vec3) -> Self {
        Spin(v)
    }

    #[inline]
    pub fn vec(self) -> Vec3 {
        self.0
    }
}

/// Exchange constant `A` (erg/cm), anisotropy `K` (erg/cm³) and saturation
/// magnetization `M` (emu/cm³) of one material.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "M")]
    pub m: f64,
}

impl Material {
    /// Sm-Co, the hard phase.
    pub const SM_CO: Material = Material { a: 1.2e-6, k: 5.0e7, m: 550.0 };
    /// Fe, the soft phase.
    pub const FE: Material = Material { a: 2.8e-6, k: 1.0e3, m: 1700.0 };
}

/// Exchange constant across the Sm-Co/Fe interface, erg/cm.
pub const SM_CO_FE_INTERFACE_A: f64 = 1.8e-6;

/// Atomic layer thickness, cm (2 Å).
pub const DEFAULT_LAYER_THICKNESS: f64 = 2.0e-8;

/// Per-layer and per-bond material parameters of a hard/soft bilayer.
#[derive(Clone, Debug, PartialEq)]
pub struct MaterialStack {
    pub n_hard: usize,
    pub n_soft: usize,
    /// Layer thickness, cm.
    pub d: f64,
    /// Saturation magnetization per layer, emu/cm³.
    pub m: Vec<f64>,
    /// Anisotropy per layer, erg/cm³.
    pub k: Vec<f64>,
    /// Exchange coupling per bond (length `n - 1`), erg/cm³.
    pub j: Vec<f64>,
    pub demag_coeff: f64,
}

fn check_positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be positive and finite, got {v}")))
    }
}

fn check_non_negative(field: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be non-negative and finite, got {v}")))
    }
}

/// Builds the bilayer: `n_hard` layers of `hard` below `n_soft` layers of
/// `soft`, with exchange couplings `J = A / d²` and the interface bond using
/// `interface_a`.
pub fn build_stack(
    n_hard: usize,
    n_soft: usize,
    d: f64,
    hard: Material,
    soft: Material,
    interface_a: f64,
) -> Result<MaterialStack> {
    if n_hard < 1 {
        return Err(Error::validation("n_hard", "must be at least 1"));
    }
    if n_soft < 1 {
        return Err(Error::validation("n_soft", "must be at least 1"));
    }
    check_positive("d", d)?;
    for (name, mat) in [("hard", hard), ("soft", soft)] {
        check_positive(&format!("{name}.A"), mat.a)?;
        check_non_negative(&format!("{name}.K"), mat.k)?;
        check_positive(&format!("{name}.M"), mat.m)?;
    }
    check_positive("interface_A", interface_a)?;

    let n = n_hard + n_soft;
    let d2 = d * d;
    let j = (0..n - 1)
        .map(|bond| match bond + 1 {
            b if b < n_hard => hard.a / d2,
            b if b == n_hard => interface_a / d2,
            _ => soft.a / d2,
        })
        .collect();
    let region = |i: usize| if i < n_hard { hard } else { soft };
    Ok(MaterialStack {
        n_hard,
        n_soft,
        d,
        m: (0..n).map(|i| region(i).m).collect(),
        k: (0..n).map(|i| region(i).k).collect(),
        j,
        demag_coeff: THIN_FILM_DEMAG,
    })
}

impl MaterialStack {
    /// The Sm-Co/Fe bilayer with tabulated parameters and `d = 2 Å`.
    pub fn sm_co_fe(n_hard: usize, n_soft: usize) -> Result<Self> {
        build_stack(
            n_hard,
            n_soft,
            DEFAULT_LAYER_THICKNESS,
            Material::SM_CO,
            Material::FE,
            SM_CO_FE_INTERFACE_A,
        )
    }

    /// Arbitrary per-layer stack. Either region may be empty here, which
    /// allows single-layer systems; [`build_stack`] insists on both.
    pub fn from_arrays(
        n_hard: usize,
        n_soft: usize,
        d: f64,
        m: Vec<f64>,
        k: Vec<f64>,
        j: Vec<f64>,
    ) -> Result<Self> {
        let n = n_hard + n_soft;
        if n == 0 {
            return Err(Error::validation("n_hard + n_soft", "stack needs at least one layer"));
        }
        check_positive("d", d)?;
        if m.len() != n {
            return Err(Error::validation("M", format!("expected {n} entries, got {}", m.len())));
        }
        if k.len() != n {
            return Err(Error::validation("K", format!("expected {n} entries, got {}", k.len())));
        }
        if j.len() != n - 1 {
            return Err(Error::validation("J", format!("expected {} entries, got {}", n - 1, j.len())));
        }
        for &v in &m {
            check_positive("M", v)?;
        }
        for &v in &k {
            check_non_negative("K", v)?;
        }
        for &v in &j {
            check_non_negative("J", v)?;
        }
        Ok(MaterialStack { n_hard, n_soft, d, m, k, j, demag_coeff: THIN_FILM_DEMAG })
    }

    /// Single layer with the given material, `d = 2 Å`.
    pub fn single(mat: Material) -> Result<Self> {
        Self::from_arrays(0, 1, DEFAULT_LAYER_THICKNESS, vec![mat.m], vec![mat.k], vec![])
    }

    pub fn with_demag(mut self, demag_coeff: f64) -> Result<Self> {
        check_non_negative("demag_coeff", demag_coeff)?;
        self.demag_coeff = demag_coeff;
        Ok(self)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    /// Index of the topmost hard layer (the interface layer), if any.
    pub fn interface_layer(&self) -> Option<usize> {
        self.n_hard.checked_sub(1)
    }
}

/// Spin chain plus elapsed reduced time.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState {
    pub spins: Vec<Spin>,
    pub time: f64,
}

impl ChainState {
    pub fn new(spins: Vec<Spin>) -> Self {
        ChainState { spins, time: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn max_abs_mz(&self) -> f64 {
        self.spins.iter().map(|s| s.vec().z.abs()).fold(0.0, f64::max)
    }

    pub(crate) fn check_len(&self, stack: &MaterialStack) -> Result<()> {
        if self.spins.len() != stack.len() {
            return Err(Error::validation(
                "state",
                format!("has {} spins but the stack has {} layers", self.spins.len(), stack.len()),
            ));
        }
        Ok(())
    }
}

/// Every layer along `(cos φ cos θ, cos φ sin θ, sin φ)`, at time zero.
pub fn uniform_state(stack: &MaterialStack, theta: f64, phi: f64) -> ChainState {
    ChainState::new(vec![Spin::from_angles(theta, phi); stack.len()])
}

/// Uniform in-plane applied field of strength `magnitude` (Oe) along
/// `(cos angle, sin angle, 0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AppliedField {
    pub magnitude: f64,
    pub angle: f64,
}

impl AppliedField {
    pub fn new(magnitude: f64, angle: f64) -> Result<Self> {
        check_non_negative("H_a", magnitude)?;
        if !angle.is_finite() {
            return Err(Error::validation("theta_a", "must be finite"));
        }
        Ok(AppliedField { magnitude, angle })
    }

    pub fn direction(&self) -> Vec3 {
        let (s, c) = self.angle.sin_cos();
        Vec3::new(c, s, 0.0)
    }

    pub fn vector(&self) -> Vec3 {
        self.direction() * self.magnitude
    }
}

/// In-plane (`theta`, unwrapped along the chain) and out-of-plane (`phi`)
/// angles of every layer, radians.
#[derive(Clone, Debug, PartialEq)]
pub struct AngleProfile {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
}

impl AngleProfile {
    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// Reflection `y -> -y`: negates every in-plane angle.
    pub fn mirrored(&self) -> AngleProfile {
        AngleProfile {
            theta: self.theta.iter().map(|t| -t).collect(),
            phi: self.phi.clone(),
        }
    }
}

/// Wraps `x` into `(-π, π]`.
pub fn wrap_pi(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Angles of a state.
///
/// `theta` is `atan2(m_y, m_x)` unwrapped along the chain from layer 0, so
/// neighbouring layers never differ by π or more. With a `reference`
/// profile (typically the previous point of a sweep) the whole chain is
/// then shifted by the multiple of 2π that brings it closest to the
/// reference in the L1 sense; a rigid shift keeps the chain unwrapped and
/// leaves chirality unchanged.
pub fn angle_profile(state: &ChainState, reference: Option<&AngleProfile>) -> Result<AngleProfile> {
    let n = state.len();
    let mut theta = Vec::with_capacity(n);
    let mut phi = Vec::with_capacity(n);
    let mut prev: Option<f64> = None;
    for (layer, s) in state.spins.iter().enumerate() {
        let v = s.vec();
        if v.x == 0.0 && v.y == 0.0 {
            return Err(Error::AngleUndefined { layer });
        }
        let raw = v.y.atan2(v.x);
        let t = match prev {
            None => raw,
            Some(p) => p + wrap_pi(raw - p),
        };
        theta.push(t);
        phi.push(v.z.clamp(-1.0, 1.0).asin());
        prev = Some(t);
    }

    if let Some(r) = reference.filter(|r| r.len() == n && n > 0) {
        let mean_offset =
            theta.iter().zip(&r.theta).map(|(t, rt)| rt - t).sum::<f64>() / n as f64;
        let base = (mean_offset / (2.0 * PI)).round();
        let cost = |k: f64| -> f64 {
            let shift = 2.0 * PI * k;
            theta.iter().zip(&r.theta).map(|(t, rt)| (t + shift - rt).abs()).sum()
        };
        let mut best = base;
        let mut best_cost = cost(base);
        for k in [base - 1.0, base + 1.0] {
            let c = cost(k);
            if c < best_cost {
                best = k;
                best_cost = c;
            }
        }
        if best != 0.0 {
            let shift = 2.0 * PI * best;
            theta.iter_mut().for_each(|t| *t += shift);
        }
    }
    Ok(AngleProfile { theta, phi })
}

/// Handedness of the soft region: the sign of the net winding
/// `theta[top] - theta[interface]`, or `0` inside the dead band `threshold`.
///
/// Stacks without a hard region measure from layer 0.
pub fn chirality(profile: &AngleProfile, stack: &MaterialStack, threshold: f64) -> i8 {
    let n = profile.len();
    if n == 0 {
        return 0;
    }
    let from = stack.interface_layer().unwrap_or(0).min(n - 1);
    let winding = profile.theta[n - 1] - profile.theta[from];
    if winding.abs() < threshold {
        0
    } else if winding > 0.0 {
        1
    } else {
        -1
    }
}
