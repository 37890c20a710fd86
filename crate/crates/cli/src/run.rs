//! Executes a validated experiment and writes its result files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use springchain::equilibrium::{relax_traced, RelaxCriteria, TracePoint};
use springchain::model::{
    angle_profile, chirality, uniform_state, AppliedField, ChainState, MaterialStack, Spin,
    DEFAULT_CHIRALITY_THRESHOLD,
};
use springchain::observables::{magnetization_angle, torque_density};
use springchain::sweep::{
    find_critical_fields, locate_critical_angle, rotational_sweep_with, CriticalFieldOptions,
    Direction, SweepRecord,
};
use springchain::vec3::Vec3;

use crate::config::{Experiment, ExperimentConfig, Initial, SweepSpec};
use crate::output::{self, Snapshot};
use crate::CliError;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Write a per-step convergence trace of relaxations (`relax` only).
    pub trace: bool,
}

/// What happened, beyond hard errors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub non_converged: usize,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.non_converged > 0 {
            crate::EXIT_NON_CONVERGENCE
        } else {
            0
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn core_err(e: springchain::Error) -> CliError {
    CliError::Run(e.to_string())
}

pub fn random_state(n: usize, seed: u64) -> ChainState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spins = (0..n)
        .map(|_| {
            let z: f64 = rng.gen_range(-1.0..1.0);
            let a: f64 = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            let r = (1.0 - z * z).sqrt();
            Spin::from_direction(Vec3::new(r * a.cos(), r * a.sin(), z)).expect("unit sample")
        })
        .collect();
    ChainState::new(spins)
}

/// Runs `cfg`, writing into `opts.out_dir` and a one-line summary to `log`.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions, log: &mut dyn Write) -> Result<Outcome, CliError> {
    let stack = cfg.stack.build()?;
    let dir = &opts.out_dir;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let say = |log: &mut dyn Write, msg: String| -> Result<(), CliError> {
        writeln!(log, "{msg}").map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source })
    };

    match &cfg.experiment {
        Experiment::Relax { h_a, theta_a, initial } => {
            let start = match initial {
                Initial::Saturated => uniform_state(&stack, 0.0, 0.0),
                Initial::Random => random_state(stack.len(), cfg.seed),
            };
            let rec = relax_record(cfg, &stack, &start, *h_a, theta_a.to_radians(), opts.trace.then(|| dir.join("trace.csv")))?;
            output::write_sweep(&dir.join("relax.csv"), "relax", cfg, stack.len(), std::slice::from_ref(&rec))?;
            output::write_profile(&dir.join("profile.csv"), cfg, &rec.profile, &rec.state)?;
            output::write_snapshot(
                &dir.join("snapshot.csv"),
                &Snapshot {
                    fingerprint: cfg.fingerprint(),
                    h_a: *h_a,
                    theta_a: theta_a.to_radians(),
                    residual: rec.residual,
                    state: rec.state.clone(),
                },
            )?;
            say(
                log,
                format!(
                    "relax: converged={} steps={} residual={:e} torque={} alpha_deg={}",
                    rec.converged,
                    rec.steps,
                    rec.residual,
                    rec.torque,
                    rec.mag_angle.to_degrees()
                ),
            )?;
            Ok(Outcome { non_converged: usize::from(!rec.converged) })
        }
        Experiment::Sweep(spec) => {
            let path = dir.join("sweep.csv");
            let records = streamed_sweep(cfg, &stack, spec, spec.direction, &path)?;
            let bad = records.iter().filter(|r| !r.converged).count();
            say(log, format!("sweep: {} records, {} not converged", records.len(), bad))?;
            Ok(Outcome { non_converged: bad })
        }
        Experiment::TorqueCurve(spec) | Experiment::AngleCurve(spec) => {
            let torque = matches!(cfg.experiment, Experiment::TorqueCurve(_));
            let (name, col) = if torque { ("torque-curve", "torque") } else { ("angle-curve", "alpha_deg") };
            let mut text = output::header(name, cfg);
            text.push_str(&format!("direction,theta_a_deg,{col}\n"));
            let mut bad = 0;
            let mut all = Vec::new();
            for dirn in [Direction::Increasing, Direction::Decreasing] {
                let records = rotational_sweep_with(&stack, &uniform_state(&stack, 0.0, 0.0), &spec.schedule(dirn), &cfg.criteria, &cfg.step, &mut |_| {})
                    .map_err(core_err)?;
                let label = if dirn == Direction::Increasing { "increasing" } else { "decreasing" };
                for r in &records {
                    let v = if torque { r.torque } else { r.mag_angle.to_degrees() };
                    text.push_str(&format!("{label},{},{v}\n", r.theta_a.to_degrees()));
                }
                bad += records.iter().filter(|r| !r.converged).count();
                all.extend(records);
            }
            text.push_str(&output::non_converged_note(&all));
            output::write_file(&dir.join(format!("{}.csv", name.replace('-', "_"))), &text)?;
            say(log, format!("{name}: {} records, {bad} not converged", all.len()))?;
            Ok(Outcome { non_converged: bad })
        }
        Experiment::CriticalAngle { h_a, bracket, tol } => {
            let c = locate_critical_angle(
                &stack,
                *h_a,
                (bracket.0.to_radians(), bracket.1.to_radians()),
                tol.to_radians(),
                &cfg.criteria,
                &cfg.step,
            )
            .map_err(core_err)?;
            let mut text = output::header("critical-angle", cfg);
            text.push_str("H_a,theta_c_deg,theta_before_deg,theta_after_deg\n");
            text.push_str(&format!(
                "{},{},{},{}\n",
                h_a,
                c.theta_c.to_degrees(),
                c.before.theta_a.to_degrees(),
                c.after.theta_a.to_degrees()
            ));
            output::write_file(&dir.join("critical_angle.csv"), &text)?;
            say(log, format!("theta_c_deg = {}", c.theta_c.to_degrees()))?;
            let bad = usize::from(!c.before.converged) + usize::from(!c.after.converged);
            Ok(Outcome { non_converged: bad })
        }
        Experiment::CriticalFields { h_range, h_tol, samples } => {
            let opts = CriticalFieldOptions {
                samples: *samples,
                criteria: cfg.criteria,
                step: cfg.step,
                ..Default::default()
            };
            let rep = find_critical_fields(&stack, *h_range, *h_tol, &opts).map_err(core_err)?;
            let fmt = |h: Option<f64>| h.map_or("none".to_string(), |h| h.to_string());
            let mut text = output::header("critical-fields", cfg);
            text.push_str(&format!(
                "# H_c1 = {}\n# H_c2 = {}\n# H_c3 = {}\n",
                fmt(rep.h_c1),
                fmt(rep.h_c2),
                fmt(rep.h_c3)
            ));
            text.push_str("H_a,theta_c_deg,loop_width_deg,max_bottom_angle_deg,chirality_preserved\n");
            for s in &rep.samples {
                text.push_str(&format!(
                    "{},{},{},{},{}\n",
                    s.h_a,
                    s.theta_c.map_or(String::new(), |t| t.to_degrees().to_string()),
                    s.loop_width.to_degrees(),
                    s.max_bottom_angle.to_degrees(),
                    s.chirality_preserved
                ));
            }
            output::write_file(&dir.join("critical_fields.csv"), &text)?;
            say(log, format!("H_c1 = {}  H_c2 = {}  H_c3 = {}", fmt(rep.h_c1), fmt(rep.h_c2), fmt(rep.h_c3)))?;
            Ok(Outcome::default())
        }
    }
}

fn relax_record(
    cfg: &ExperimentConfig,
    stack: &MaterialStack,
    start: &ChainState,
    h_a: f64,
    theta_a: f64,
    trace_path: Option<PathBuf>,
) -> Result<SweepRecord, CliError> {
    let applied = AppliedField::new(h_a, theta_a).map_err(|e| CliError::Config(e.to_string()))?;
    let result = match trace_path {
        Some(path) => {
            let file = File::create(&path).map_err(io_err(&path))?;
            let mut w = BufWriter::new(file);
            let mut failed = None;
            writeln!(w, "{}step,time,residual,energy", output::header("trace", cfg)).map_err(io_err(&path))?;
            let criteria = RelaxCriteria { record_energy: true, ..cfg.criteria };
            let mut sink = |p: &TracePoint| {
                if failed.is_none() {
                    if let Err(e) = writeln!(w, "{},{},{},{}", p.step, p.time, p.residual, p.energy.unwrap_or(f64::NAN)) {
                        failed = Some(e);
                    }
                }
            };
            let r = relax_traced(stack, start, &applied, &criteria, &cfg.step, Some(&mut sink)).map_err(core_err)?;
            if let Some(e) = failed {
                return Err(CliError::Io { path, source: e });
            }
            w.flush().map_err(io_err(&path))?;
            r
        }
        None => relax_traced(stack, start, &applied, &cfg.criteria, &cfg.step, None).map_err(core_err)?,
    };
    let profile = angle_profile(&result.state, None).map_err(core_err)?;
    Ok(SweepRecord {
        theta_a,
        torque: torque_density(stack, &profile, &applied),
        mag_angle: magnetization_angle(stack, &profile, None).map_err(core_err)?,
        chirality: chirality(&profile, stack, DEFAULT_CHIRALITY_THRESHOLD),
        equilibration_time: result.equilibration_time,
        steps: result.steps,
        converged: result.converged,
        residual: result.final_residual,
        state: result.state,
        profile,
    })
}

/// Runs one sweep, appending each row to `path` as soon as it is known.
fn streamed_sweep(
    cfg: &ExperimentConfig,
    stack: &MaterialStack,
    spec: &SweepSpec,
    direction: Direction,
    path: &Path,
) -> Result<Vec<SweepRecord>, CliError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let head = output::format_sweep("sweep", cfg, stack.len(), &[]);
    w.write_all(head.as_bytes()).map_err(io_err(path))?;
    let mut failed = None;
    let records = rotational_sweep_with(
        stack,
        &uniform_state(stack, 0.0, 0.0),
        &spec.schedule(direction),
        &cfg.criteria,
        &cfg.step,
        &mut |r| {
            if failed.is_none() {
                if let Err(e) = writeln!(w, "{}", output::sweep_row(r)).and_then(|_| w.flush()) {
                    failed = Some(e);
                }
            }
        },
    )
    .map_err(core_err)?;
    if let Some(e) = failed {
        return Err(CliError::Io { path: path.to_path_buf(), source: e });
    }
    w.write_all(output::non_converged_note(&records).as_bytes()).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))?;
    Ok(records)
}
