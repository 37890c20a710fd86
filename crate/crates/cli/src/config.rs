//! Experiment definitions: TOML text with Table-1 defaults, `key=value`
//! overrides, validation, and the canonical echo written into every output.

use serde::{Deserialize, Serialize};
use springchain::model::{
    build_stack, Material, MaterialStack, DEFAULT_LAYER_THICKNESS, SM_CO_FE_INTERFACE_A,
    THIN_FILM_DEMAG,
};
use springchain::sweep::{Direction, SweepSchedule};
use springchain::{equilibrium::RelaxCriteria, integrator::StepParams};

use crate::CliError;

pub const KINDS: [&str; 6] = ["relax", "sweep", "critical-angle", "critical-fields", "torque-curve", "angle-curve"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaterial {
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    k: Option<f64>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    m: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStack {
    #[serde(skip_serializing_if = "Option::is_none")]
    n_hard: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_soft: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<f64>,
    #[serde(rename = "interface_A", skip_serializing_if = "Option::is_none")]
    interface_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    demag: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hard: Option<RawMaterial>,
    #[serde(skip_serializing_if = "Option::is_none")]
    soft: Option<RawMaterial>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDynamics {
    #[serde(skip_serializing_if = "Option::is_none")]
    g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    steps_per_period: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dt_max: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRelax {
    #[serde(skip_serializing_if = "Option::is_none")]
    torque_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    h_floor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_steps: Option<i64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    #[serde(rename = "H_a", skip_serializing_if = "Option::is_none")]
    h_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    initial: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coarse_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    refine_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    jump_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    direction: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bracket: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    #[serde(rename = "H_range", skip_serializing_if = "Option::is_none")]
    h_range: Option<[f64; 2]>,
    #[serde(rename = "H_tol", skip_serializing_if = "Option::is_none")]
    h_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<i64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stack: Option<RawStack>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dynamics: Option<RawDynamics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    relax: Option<RawRelax>,
    #[serde(skip_serializing_if = "Option::is_none")]
    experiment: Option<RawExperiment>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StackConfig {
    pub n_hard: usize,
    pub n_soft: usize,
    /// cm
    pub d: f64,
    pub hard: Material,
    pub soft: Material,
    pub interface_a: f64,
    pub demag: f64,
}

impl Default for StackConfig {
    fn default() -> Self {
        StackConfig {
            n_hard: 115,
            n_soft: 100,
            d: DEFAULT_LAYER_THICKNESS,
            hard: Material::SM_CO,
            soft: Material::FE,
            interface_a: SM_CO_FE_INTERFACE_A,
            demag: THIN_FILM_DEMAG,
        }
    }
}

impl StackConfig {
    pub fn build(&self) -> Result<MaterialStack, CliError> {
        build_stack(self.n_hard, self.n_soft, self.d, self.hard, self.soft, self.interface_a)
            .and_then(|s| s.with_demag(self.demag))
            .map_err(|e| CliError::Config(format!("stack: {e}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Initial {
    Saturated,
    Random,
}

/// Sweep grid; angles in degrees as written in the config.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepSpec {
    pub h_a: f64,
    pub theta_start: f64,
    pub theta_end: f64,
    pub coarse_step: f64,
    pub refine_step: f64,
    pub jump_threshold: f64,
    pub direction: Direction,
}

impl SweepSpec {
    pub fn schedule(&self, direction: Direction) -> SweepSchedule {
        let (theta_start, theta_end) = if direction == self.direction {
            (self.theta_start, self.theta_end)
        } else {
            (self.theta_end, self.theta_start)
        };
        SweepSchedule {
            h_a: self.h_a,
            theta_start: theta_start.to_radians(),
            theta_end: theta_end.to_radians(),
            coarse_step: self.coarse_step.to_radians(),
            refine_step: self.refine_step.to_radians(),
            direction,
            jump_threshold: self.jump_threshold.to_radians(),
            chirality_threshold: springchain::model::DEFAULT_CHIRALITY_THRESHOLD,
        }
    }
}

/// Angles in degrees.
#[derive(Clone, Debug, PartialEq)]
pub enum Experiment {
    Relax { h_a: f64, theta_a: f64, initial: Initial },
    Sweep(SweepSpec),
    CriticalAngle { h_a: f64, bracket: (f64, f64), tol: f64 },
    CriticalFields { h_range: (f64, f64), h_tol: f64, samples: usize },
    TorqueCurve(SweepSpec),
    AngleCurve(SweepSpec),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Relax { .. } => "relax",
            Experiment::Sweep(_) => "sweep",
            Experiment::CriticalAngle { .. } => "critical-angle",
            Experiment::CriticalFields { .. } => "critical-fields",
            Experiment::TorqueCurve(_) => "torque-curve",
            Experiment::AngleCurve(_) => "angle-curve",
        }
    }
}

/// A fully validated experiment with every default filled in.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub stack: StackConfig,
    pub step: StepParams,
    pub criteria: RelaxCriteria,
    pub experiment: Experiment,
}

fn cfg_err(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("`{key}` {msg}"))
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(cfg_err(key, format_args!("must be positive (got {v})")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<f64, CliError> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(cfg_err(key, format_args!("must be non-negative (got {v})")))
    }
}

fn count(key: &str, v: i64, min: i64) -> Result<usize, CliError> {
    if v >= min {
        Ok(v as usize)
    } else {
        Err(cfg_err(key, format_args!("must be at least {min} (got {v})")))
    }
}

fn material(key: &str, raw: Option<RawMaterial>, default: Material) -> Result<Material, CliError> {
    let raw = raw.unwrap_or_default();
    Ok(Material {
        a: positive(&format!("{key}.A"), raw.a.unwrap_or(default.a))?,
        k: non_negative(&format!("{key}.K"), raw.k.unwrap_or(default.k))?,
        m: positive(&format!("{key}.M"), raw.m.unwrap_or(default.m))?,
    })
}

/// Parses `text`, applies `overrides` (`dotted.key=value`), fills defaults and
/// validates.
pub fn parse_config_with(text: &str, overrides: &[String]) -> Result<ExperimentConfig, CliError> {
    let mut table: toml::Table =
        toml::from_str(text).map_err(|e| CliError::Config(format!("malformed config: {e}")))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let raw: RawConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
    resolve(raw)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    parse_config_with(text, &[])
}

fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let (key, value) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{spec}` is not of the form key=value")))?;
    let key = key.trim();
    let value = value.trim();
    let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("override key `{key}` is malformed")));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override key `{key}`: `{p}` is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}

fn resolve(raw: RawConfig) -> Result<ExperimentConfig, CliError> {
    let seed = raw.seed.unwrap_or(0);
    if seed < 0 {
        return Err(cfg_err("seed", "must be non-negative"));
    }

    let rs = raw.stack.unwrap_or_default();
    let def = StackConfig::default();
    let stack = StackConfig {
        n_hard: count("stack.n_hard", rs.n_hard.unwrap_or(def.n_hard as i64), 1)?,
        n_soft: count("stack.n_soft", rs.n_soft.unwrap_or(def.n_soft as i64), 1)?,
        d: positive("stack.d", rs.d.unwrap_or(def.d))?,
        hard: material("stack.hard", rs.hard, def.hard)?,
        soft: material("stack.soft", rs.soft, def.soft)?,
        interface_a: positive("stack.interface_A", rs.interface_a.unwrap_or(def.interface_a))?,
        demag: non_negative("stack.demag", rs.demag.unwrap_or(def.demag))?,
    };

    let rd = raw.dynamics.unwrap_or_default();
    let dstep = StepParams::default();
    let step = StepParams {
        g: non_negative("dynamics.g", rd.g.unwrap_or(dstep.g))?,
        steps_per_period: count(
            "dynamics.steps_per_period",
            rd.steps_per_period.unwrap_or(dstep.steps_per_period as i64),
            4,
        )? as u32,
        dt_max: positive("dynamics.dt_max", rd.dt_max.unwrap_or(dstep.dt_max))?,
        ..dstep
    };

    let rr = raw.relax.unwrap_or_default();
    let dcrit = RelaxCriteria::default();
    let criteria = RelaxCriteria {
        torque_tol: positive("relax.torque_tol", rr.torque_tol.unwrap_or(dcrit.torque_tol))?,
        h_floor: positive("relax.h_floor", rr.h_floor.unwrap_or(dcrit.h_floor))?,
        max_steps: count("relax.max_steps", rr.max_steps.unwrap_or(dcrit.max_steps as i64), 1)? as u64,
        record_energy: false,
    };

    let experiment = resolve_experiment(raw.experiment.unwrap_or_default())?;
    Ok(ExperimentConfig { seed: seed as u64, stack, step, criteria, experiment })
}

fn missing(keys: &[&str]) -> CliError {
    CliError::Config(format!("[experiment] is missing required key(s): {}", keys.join(", ")))
}

fn resolve_sweep(e: &RawExperiment, h_a: f64) -> Result<SweepSpec, CliError> {
    let direction = match e.direction.as_deref().unwrap_or("increasing") {
        "increasing" => Direction::Increasing,
        "decreasing" => Direction::Decreasing,
        other => {
            return Err(cfg_err(
                "experiment.direction",
                format_args!("must be \"increasing\" or \"decreasing\" (got {other:?})"),
            ))
        }
    };
    let (ds, de) = match direction {
        Direction::Increasing => (0.0, 360.0),
        Direction::Decreasing => (360.0, 0.0),
    };
    let spec = SweepSpec {
        h_a,
        theta_start: e.theta_start.unwrap_or(ds),
        theta_end: e.theta_end.unwrap_or(de),
        coarse_step: positive("experiment.coarse_step", e.coarse_step.unwrap_or(1.0))?,
        refine_step: positive("experiment.refine_step", e.refine_step.unwrap_or(0.1))?,
        jump_threshold: positive("experiment.jump_threshold", e.jump_threshold.unwrap_or(5.0))?,
        direction,
    };
    spec.schedule(direction)
        .validate()
        .map_err(|err| CliError::Config(format!("experiment: {err}")))?;
    Ok(spec)
}

fn resolve_experiment(e: RawExperiment) -> Result<Experiment, CliError> {
    let Some(kind) = e.kind.clone() else {
        return Err(CliError::Config(format!(
            "[experiment] is missing required key(s): kind (one of {}), plus the keys that kind requires (H_a, or H_range for critical-fields)",
            KINDS.join(", ")
        )));
    };
    let h_a = |e: &RawExperiment| -> Result<f64, CliError> {
        non_negative("experiment.H_a", e.h_a.ok_or_else(|| missing(&["H_a"]))?)
    };
    Ok(match kind.as_str() {
        "relax" => Experiment::Relax {
            h_a: h_a(&e)?,
            theta_a: e.theta_a.unwrap_or(0.0),
            initial: match e.initial.as_deref().unwrap_or("saturated") {
                "saturated" => Initial::Saturated,
                "random" => Initial::Random,
                other => {
                    return Err(cfg_err(
                        "experiment.initial",
                        format_args!("must be \"saturated\" or \"random\" (got {other:?})"),
                    ))
                }
            },
        },
        "sweep" => Experiment::Sweep(resolve_sweep(&e, h_a(&e)?)?),
        "torque-curve" => Experiment::TorqueCurve(resolve_sweep(&e, h_a(&e)?)?),
        "angle-curve" => Experiment::AngleCurve(resolve_sweep(&e, h_a(&e)?)?),
        "critical-angle" => {
            let mut need = Vec::new();
            if e.h_a.is_none() {
                need.push("H_a");
            }
            if e.bracket.is_none() {
                need.push("bracket");
            }
            if !need.is_empty() {
                return Err(missing(&need));
            }
            let [lo, hi] = e.bracket.expect("checked above");
            if !(lo >= 0.0 && hi > lo) {
                return Err(cfg_err("experiment.bracket", format_args!("must satisfy 0 <= lo < hi (got [{lo}, {hi}])")));
            }
            Experiment::CriticalAngle {
                h_a: h_a(&e)?,
                bracket: (lo, hi),
                tol: positive("experiment.tol", e.tol.unwrap_or(0.01))?,
            }
        }
        "critical-fields" => {
            let [lo, hi] = e.h_range.ok_or_else(|| missing(&["H_range"]))?;
            if !(lo >= 0.0 && hi > lo) {
                return Err(cfg_err("experiment.H_range", format_args!("must satisfy 0 <= lo < hi (got [{lo}, {hi}])")));
            }
            Experiment::CriticalFields {
                h_range: (lo, hi),
                h_tol: positive("experiment.H_tol", e.h_tol.unwrap_or(10.0))?,
                samples: count("experiment.samples", e.samples.unwrap_or(12), 2)?,
            }
        }
        other => {
            return Err(cfg_err(
                "experiment.kind",
                format_args!("must be one of {} (got {other:?})", KINDS.join(", ")),
            ))
        }
    })
}

fn sweep_raw(kind: &str, s: &SweepSpec) -> RawExperiment {
    RawExperiment {
        kind: Some(kind.into()),
        h_a: Some(s.h_a),
        theta_start: Some(s.theta_start),
        theta_end: Some(s.theta_end),
        coarse_step: Some(s.coarse_step),
        refine_step: Some(s.refine_step),
        jump_threshold: Some(s.jump_threshold),
        direction: Some(
            match s.direction {
                Direction::Increasing => "increasing",
                Direction::Decreasing => "decreasing",
            }
            .into(),
        ),
        ..Default::default()
    }
}

impl ExperimentConfig {
    /// Canonical TOML with every value spelled out. Parsing it yields a
    /// config that runs the same experiment.
    pub fn to_toml(&self) -> String {
        let mat = |m: &Material| RawMaterial { a: Some(m.a), k: Some(m.k), m: Some(m.m) };
        let experiment = match &self.experiment {
            Experiment::Relax { h_a, theta_a, initial } => RawExperiment {
                kind: Some("relax".into()),
                h_a: Some(*h_a),
                theta_a: Some(*theta_a),
                initial: Some(
                    match initial {
                        Initial::Saturated => "saturated",
                        Initial::Random => "random",
                    }
                    .into(),
                ),
                ..Default::default()
            },
            Experiment::Sweep(s) => sweep_raw("sweep", s),
            Experiment::TorqueCurve(s) => sweep_raw("torque-curve", s),
            Experiment::AngleCurve(s) => sweep_raw("angle-curve", s),
            Experiment::CriticalAngle { h_a, bracket, tol } => RawExperiment {
                kind: Some("critical-angle".into()),
                h_a: Some(*h_a),
                bracket: Some([bracket.0, bracket.1]),
                tol: Some(*tol),
                ..Default::default()
            },
            Experiment::CriticalFields { h_range, h_tol, samples } => RawExperiment {
                kind: Some("critical-fields".into()),
                h_range: Some([h_range.0, h_range.1]),
                h_tol: Some(*h_tol),
                samples: Some(*samples as i64),
                ..Default::default()
            },
        };
        let raw = RawConfig {
            seed: Some(self.seed as i64),
            stack: Some(RawStack {
                n_hard: Some(self.stack.n_hard as i64),
                n_soft: Some(self.stack.n_soft as i64),
                d: Some(self.stack.d),
                interface_a: Some(self.stack.interface_a),
                demag: Some(self.stack.demag),
                hard: Some(mat(&self.stack.hard)),
                soft: Some(mat(&self.stack.soft)),
            }),
            dynamics: Some(RawDynamics {
                g: Some(self.step.g),
                steps_per_period: Some(self.step.steps_per_period as i64),
                dt_max: Some(self.step.dt_max),
            }),
            relax: Some(RawRelax {
                torque_tol: Some(self.criteria.torque_tol),
                h_floor: Some(self.criteria.h_floor),
                max_steps: Some(self.criteria.max_steps as i64),
            }),
            experiment: Some(experiment),
        };
        toml::to_string(&raw).expect("config serializes")
    }

    /// Hex SHA-256 of [`ExperimentConfig::to_toml`].
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        Sha256::digest(self.to_toml().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_sweep_uses_table_defaults() {
        let c = parse_config("[experiment]\nkind = \"sweep\"\nH_a = 4800\n").unwrap();
        assert_eq!((c.stack.n_hard, c.stack.n_soft), (115, 100));
        assert_eq!(c.stack.d, 2e-8);
        assert_eq!(c.stack.hard, Material::SM_CO);
        assert_eq!(c.step.g, 0.5);
        let Experiment::Sweep(s) = c.experiment else { panic!() };
        assert_eq!(s.h_a, 4800.0);
        assert_eq!(s.direction, Direction::Increasing);
        assert_eq!(s.theta_end, 360.0);
    }

    #[test]
    fn empty_experiment_lists_required_keys() {
        let err = parse_config("[experiment]\n").unwrap_err().to_string();
        assert!(err.contains("kind") && err.contains("H_a"), "{err}");
        let err = parse_config("[experiment]\nkind = \"critical-angle\"\n").unwrap_err().to_string();
        assert!(err.contains("H_a") && err.contains("bracket"), "{err}");
    }

    #[test]
    fn negative_magnetization_names_the_key() {
        let err = parse_config("[stack.soft]\nM = -5\n[experiment]\nkind = \"relax\"\nH_a = 1\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("stack.soft.M") && err.contains("positive"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config("[stack]\nn_hrad = 3\n").unwrap_err().to_string();
        assert!(err.contains("n_hrad"), "{err}");
        let err = parse_config("[experiment]\nkind = \"anneal\"\nH_a = 1\n").unwrap_err().to_string();
        assert!(err.contains("experiment.kind"), "{err}");
    }

    #[test]
    fn overrides_replace_and_create_keys() {
        let c = parse_config_with(
            "[experiment]\nkind = \"relax\"\nH_a = 1\n",
            &["experiment.H_a=4800".into(), "stack.hard.K=1e6".into(), "experiment.initial=random".into()],
        )
        .unwrap();
        assert_eq!(c.stack.hard.k, 1e6);
        assert_eq!(c.experiment, Experiment::Relax { h_a: 4800.0, theta_a: 0.0, initial: Initial::Random });
        assert!(parse_config_with("", &["novalue".into()]).is_err());
    }

    #[test]
    fn canonical_text_round_trips() {
        for text in [
            "[experiment]\nkind = \"sweep\"\nH_a = 4800\ntheta_end = 400\n",
            "seed = 3\n[experiment]\nkind = \"relax\"\nH_a = 12.5\ntheta_a = 33.3\n",
            "[experiment]\nkind = \"critical-angle\"\nH_a = 4800\nbracket = [295, 310]\n",
            "[experiment]\nkind = \"critical-fields\"\nH_range = [100, 9000]\n",
        ] {
            let c = parse_config(text).unwrap();
            let again = parse_config(&c.to_toml()).unwrap();
            assert_eq!(again.to_toml(), c.to_toml());
            assert_eq!(again.fingerprint(), c.fingerprint());
        }
    }
}
