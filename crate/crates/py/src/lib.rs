//! Python module `springchain`.

use pyo3::exceptions::{PyLookupError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use springchain::equilibrium::{relax as core_relax, RelaxCriteria};
use springchain::integrator::{llg_step_exact as core_step, StepParams};
use springchain::model::{
    angle_profile, build_stack, uniform_state, AppliedField, ChainState, Material as CoreMaterial,
    MaterialStack, Spin as CoreSpin, SM_CO_FE_INTERFACE_A,
};
use springchain::sweep::{self, Direction, SweepSchedule};
use springchain::vec3::Vec3;
use springchain::{field, observables};

fn py_err(e: springchain::Error) -> PyErr {
    match e {
        springchain::Error::NotFound(msg) => PyLookupError::new_err(msg),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn v3(t: (f64, f64, f64)) -> Vec3 {
    Vec3::new(t.0, t.1, t.2)
}

fn tup(v: Vec3) -> (f64, f64, f64) {
    (v.x, v.y, v.z)
}

#[pyclass(name = "Material", from_py_object)]
#[derive(Clone, Copy)]
struct Material {
    inner: CoreMaterial,
}

#[pymethods]
impl Material {
    #[new]
    #[pyo3(signature = (a, k, m))]
    fn new(a: f64, k: f64, m: f64) -> Self {
        Material { inner: CoreMaterial { a, k, m } }
    }

    #[staticmethod]
    fn sm_co() -> Self {
        Material { inner: CoreMaterial::SM_CO }
    }

    #[staticmethod]
    fn fe() -> Self {
        Material { inner: CoreMaterial::FE }
    }

    #[getter(A)]
    fn a(&self) -> f64 {
        self.inner.a
    }

    #[getter(K)]
    fn k(&self) -> f64 {
        self.inner.k
    }

    #[getter(M)]
    fn m(&self) -> f64 {
        self.inner.m
    }

    fn __repr__(&self) -> String {
        format!("Material(A={}, K={}, M={})", self.inner.a, self.inner.k, self.inner.m)
    }
}

#[pyclass(name = "Stack", from_py_object)]
#[derive(Clone)]
struct Stack {
    inner: MaterialStack,
}

#[pymethods]
impl Stack {
    #[new]
    #[pyo3(signature = (n_hard, n_soft, d=2e-8, hard=None, soft=None, interface_a=SM_CO_FE_INTERFACE_A))]
    fn new(
        n_hard: usize,
        n_soft: usize,
        d: f64,
        hard: Option<Material>,
        soft: Option<Material>,
        interface_a: f64,
    ) -> PyResult<Self> {
        let hard = hard.map_or(CoreMaterial::SM_CO, |m| m.inner);
        let soft = soft.map_or(CoreMaterial::FE, |m| m.inner);
        build_stack(n_hard, n_soft, d, hard, soft, interface_a)
            .map(|inner| Stack { inner })
            .map_err(py_err)
    }

    #[staticmethod]
    fn single(mat: Material) -> PyResult<Self> {
        MaterialStack::single(mat.inner).map(|inner| Stack { inner }).map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn n_hard(&self) -> usize {
        self.inner.n_hard
    }

    #[getter]
    fn n_soft(&self) -> usize {
        self.inner.n_soft
    }

    #[getter]
    fn m(&self) -> Vec<f64> {
        self.inner.m.clone()
    }

    #[getter]
    fn k(&self) -> Vec<f64> {
        self.inner.k.clone()
    }

    #[getter]
    fn j(&self) -> Vec<f64> {
        self.inner.j.clone()
    }
}

#[pyclass(name = "State", from_py_object)]
#[derive(Clone)]
struct State {
    inner: ChainState,
}

#[pymethods]
impl State {
    #[new]
    fn new(spins: Vec<(f64, f64, f64)>) -> PyResult<Self> {
        let spins = spins
            .into_iter()
            .map(|s| CoreSpin::from_direction(v3(s)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(py_err)?;
        Ok(State { inner: ChainState::new(spins) })
    }

    /// Every layer at in-plane angle `theta` and elevation `phi` (radians).
    #[staticmethod]
    #[pyo3(signature = (stack, theta=0.0, phi=0.0))]
    fn uniform(stack: &Stack, theta: f64, phi: f64) -> Self {
        State { inner: uniform_state(&stack.inner, theta, phi) }
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn spins(&self) -> Vec<(f64, f64, f64)> {
        self.inner.spins.iter().map(|s| tup(s.vec())).collect()
    }

    #[getter]
    fn time(&self) -> f64 {
        self.inner.time
    }

    /// Unwrapped in-plane angles, radians.
    #[getter]
    fn theta(&self) -> PyResult<Vec<f64>> {
        angle_profile(&self.inner, None).map(|p| p.theta).map_err(py_err)
    }

    #[getter]
    fn phi(&self) -> PyResult<Vec<f64>> {
        angle_profile(&self.inner, None).map(|p| p.phi).map_err(py_err)
    }
}

fn applied(h_a: f64, theta_a: f64) -> PyResult<AppliedField> {
    AppliedField::new(h_a, theta_a).map_err(py_err)
}

/// Effective field of every layer, oersted.
#[pyfunction]
fn effective_field(stack: &Stack, state: &State, h_a: f64, theta_a: f64) -> PyResult<Vec<(f64, f64, f64)>> {
    let f = field::effective_field(&stack.inner, &state.inner, &applied(h_a, theta_a)?).map_err(py_err)?;
    Ok(f.h.into_iter().map(tup).collect())
}

/// Energy per unit area, erg/cm^2.
#[pyfunction]
fn total_energy(stack: &Stack, state: &State, h_a: f64, theta_a: f64) -> PyResult<f64> {
    field::total_energy(&stack.inner, &state.inner, &applied(h_a, theta_a)?).map_err(py_err)
}

/// One exact frozen-field step of a single unit spin.
#[pyfunction]
fn llg_step_exact(m: (f64, f64, f64), field: (f64, f64, f64), g: f64, dt: f64) -> PyResult<(f64, f64, f64)> {
    let s = CoreSpin::new(v3(m)).map_err(py_err)?;
    core_step(s, v3(field), g, dt).map(|s| tup(s.vec())).map_err(py_err)
}

fn params(g: f64, steps_per_period: u32, torque_tol: f64, max_steps: u64) -> (RelaxCriteria, StepParams) {
    (
        RelaxCriteria { torque_tol, max_steps, ..Default::default() },
        StepParams { g, steps_per_period, ..Default::default() },
    )
}

/// Relaxes `state` under the field; returns a dict with the final state.
#[pyfunction]
#[pyo3(signature = (stack, state, h_a, theta_a, g=0.5, steps_per_period=8, torque_tol=1e-8, max_steps=10_000_000))]
#[allow(clippy::too_many_arguments)]
fn relax<'py>(
    py: Python<'py>,
    stack: &Stack,
    state: &State,
    h_a: f64,
    theta_a: f64,
    g: f64,
    steps_per_period: u32,
    torque_tol: f64,
    max_steps: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let (crit, step) = params(g, steps_per_period, torque_tol, max_steps);
    let a = applied(h_a, theta_a)?;
    let r = py
        .detach(|| core_relax(&stack.inner, &state.inner, &a, &crit, &step))
        .map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("state", State { inner: r.state })?;
    d.set_item("steps", r.steps)?;
    d.set_item("converged", r.converged)?;
    d.set_item("equilibration_time", r.equilibration_time)?;
    d.set_item("residual", r.final_residual)?;
    Ok(d)
}

/// `H_a d Σ M_i sin(θ_a − θ_i)` for in-plane angles `theta` (radians).
#[pyfunction]
fn torque_density(stack: &Stack, theta: Vec<f64>, h_a: f64, theta_a: f64) -> PyResult<f64> {
    let n = theta.len();
    let p = springchain::model::AngleProfile { theta, phi: vec![0.0; n] };
    Ok(observables::torque_density(&stack.inner, &p, &applied(h_a, theta_a)?))
}

#[pyfunction]
#[pyo3(signature = (stack, theta, reference=None))]
fn magnetization_angle(stack: &Stack, theta: Vec<f64>, reference: Option<f64>) -> PyResult<f64> {
    let n = theta.len();
    let p = springchain::model::AngleProfile { theta, phi: vec![0.0; n] };
    observables::magnetization_angle(&stack.inner, &p, reference).map_err(py_err)
}

/// Rotational sweep; angles in degrees. Returns one dict per equilibrium.
#[pyfunction]
#[pyo3(signature = (stack, h_a, theta_start=0.0, theta_end=360.0, coarse_step=1.0, refine_step=0.1, g=0.5, steps_per_period=8, torque_tol=1e-8, max_steps=10_000_000))]
#[allow(clippy::too_many_arguments)]
fn rotational_sweep<'py>(
    py: Python<'py>,
    stack: &Stack,
    h_a: f64,
    theta_start: f64,
    theta_end: f64,
    coarse_step: f64,
    refine_step: f64,
    g: f64,
    steps_per_period: u32,
    torque_tol: f64,
    max_steps: u64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let (crit, step) = params(g, steps_per_period, torque_tol, max_steps);
    let direction = if theta_end >= theta_start { Direction::Increasing } else { Direction::Decreasing };
    let schedule = SweepSchedule {
        theta_start: theta_start.to_radians(),
        theta_end: theta_end.to_radians(),
        coarse_step: coarse_step.to_radians(),
        refine_step: refine_step.to_radians(),
        ..SweepSchedule::full_turn(h_a, direction)
    };
    let records = py
        .detach(|| sweep::rotational_sweep(&stack.inner, &schedule, &crit, &step))
        .map_err(py_err)?;
    records
        .into_iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("theta_a", r.theta_a)?;
            d.set_item("theta", r.profile.theta)?;
            d.set_item("torque", r.torque)?;
            d.set_item("mag_angle", r.mag_angle)?;
            d.set_item("chirality", r.chirality)?;
            d.set_item("equilibration_time", r.equilibration_time)?;
            d.set_item("steps", r.steps)?;
            d.set_item("converged", r.converged)?;
            Ok(d)
        })
        .collect()
}

/// Critical angle (radians) of an increasing sweep at `h_a`; `bracket` in radians.
#[pyfunction]
#[pyo3(signature = (stack, h_a, bracket, tol=1e-3, g=0.5, steps_per_period=8, torque_tol=1e-8, max_steps=10_000_000))]
#[allow(clippy::too_many_arguments)]
fn find_critical_angle(
    py: Python<'_>,
    stack: &Stack,
    h_a: f64,
    bracket: (f64, f64),
    tol: f64,
    g: f64,
    steps_per_period: u32,
    torque_tol: f64,
    max_steps: u64,
) -> PyResult<f64> {
    let (crit, step) = params(g, steps_per_period, torque_tol, max_steps);
    py.detach(|| sweep::find_critical_angle(&stack.inner, h_a, bracket, tol, &crit, &step))
        .map_err(py_err)
}

#[pymodule]
#[pyo3(name = "springchain")]
fn springchain_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Material>()?;
    m.add_class::<Stack>()?;
    m.add_class::<State>()?;
    m.add_function(wrap_pyfunction!(effective_field, m)?)?;
    m.add_function(wrap_pyfunction!(total_energy, m)?)?;
    m.add_function(wrap_pyfunction!(llg_step_exact, m)?)?;
    m.add_function(wrap_pyfunction!(relax, m)?)?;
    m.add_function(wrap_pyfunction!(torque_density, m)?)?;
    m.add_function(wrap_pyfunction!(magnetization_angle, m)?)?;
    m.add_function(wrap_pyfunction!(rotational_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(find_critical_angle, m)?)?;
    Ok(())
}
