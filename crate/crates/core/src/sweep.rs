//! Rotational-field experiments.
//!
//! A sweep turns the applied field in steps of `coarse_step` and relaxes the
//! chain at each direction, starting from the equilibrium of the previous
//! direction. Whenever a coarse step lands on a different branch (chirality
//! change or a large jump of some layer angle) the step is repeated in
//! increments of `refine_step`, so that transitions are located on the fine
//! grid. All grid points are `theta_start ± k * refine_step` for integer `k`,
//! which makes increasing and decreasing sweeps over the same range mirror
//! each other point by point.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::equilibrium::{relax, RelaxCriteria};
use crate::error::{Error, Result};
use crate::integrator::StepParams;
use crate::model::{
    angle_profile, chirality, uniform_state, wrap_pi, AngleProfile, AppliedField, ChainState,
    MaterialStack, Spin, DEFAULT_CHIRALITY_THRESHOLD,
};
use crate::observables::{magnetization_angle, torque_density};

/// Layer-angle change that marks a branch switch during critical-value
/// searches, radians.
pub const BRANCH_SWITCH_THRESHOLD: f64 = FRAC_PI_2;

/// Default separation beyond which two hysteresis branches count as
/// different, radians.
pub const DEFAULT_BRANCH_TOL: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Increasing,
    Decreasing,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Increasing => 1.0,
            Direction::Decreasing => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepSchedule {
    /// Oersted.
    pub h_a: f64,
    pub theta_start: f64,
    pub theta_end: f64,
    pub coarse_step: f64,
    /// Must divide `coarse_step`.
    pub refine_step: f64,
    pub direction: Direction,
    /// Any layer moving further than this between consecutive points
    /// triggers refinement, radians.
    pub jump_threshold: f64,
    pub chirality_threshold: f64,
}

impl SweepSchedule {
    /// `0 → 2π` (increasing) or `2π → 0` (decreasing) in 1° steps, refined
    /// to 0.1° around transitions.
    pub fn full_turn(h_a: f64, direction: Direction) -> Self {
        let (theta_start, theta_end) = match direction {
            Direction::Increasing => (0.0, 2.0 * PI),
            Direction::Decreasing => (2.0 * PI, 0.0),
        };
        SweepSchedule {
            h_a,
            theta_start,
            theta_end,
            coarse_step: 1f64.to_radians(),
            refine_step: 0.1f64.to_radians(),
            direction,
            jump_threshold: 5f64.to_radians(),
            chirality_threshold: DEFAULT_CHIRALITY_THRESHOLD,
        }
    }

    /// Returns `(fine steps per coarse step, number of coarse steps)`.
    pub fn validate(&self) -> Result<(usize, usize)> {
        if !(self.h_a >= 0.0 && self.h_a.is_finite()) {
            return Err(Error::validation("H_a", "must be non-negative"));
        }
        if !(self.coarse_step > 0.0) {
            return Err(Error::validation("coarse_step", "must be positive"));
        }
        if !(self.refine_step > 0.0 && self.refine_step <= self.coarse_step) {
            return Err(Error::validation("refine_step", "must be positive and at most coarse_step"));
        }
        let ratio = (self.coarse_step / self.refine_step).round();
        if (ratio * self.refine_step - self.coarse_step).abs() > 1e-9 * self.coarse_step {
            return Err(Error::validation("refine_step", "must divide coarse_step"));
        }
        let span = (self.theta_end - self.theta_start) * self.direction.sign();
        if !(span > 0.0) {
            return Err(Error::validation(
                "theta_end",
                "must lie beyond theta_start in the sweep direction",
            ));
        }
        let n = (span / self.coarse_step).round();
        if n < 1.0 || (n * self.coarse_step - span).abs() > 1e-6 * self.coarse_step {
            return Err(Error::validation("coarse_step", "must divide the sweep range"));
        }
        if !(self.jump_threshold > 0.0) {
            return Err(Error::validation("jump_threshold", "must be positive"));
        }
        Ok((ratio as usize, n as usize))
    }

    /// Field direction at fine-grid index `k`.
    pub fn angle_at(&self, k: usize) -> f64 {
        self.theta_start + self.direction.sign() * k as f64 * self.refine_step
    }
}

/// Equilibrium at one field direction.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub theta_a: f64,
    pub profile: AngleProfile,
    /// erg/cm²
    pub torque: f64,
    pub mag_angle: f64,
    pub chirality: i8,
    pub equilibration_time: f64,
    pub steps: u64,
    pub converged: bool,
    pub residual: f64,
    pub state: ChainState,
}

impl SweepRecord {
    /// The record for the reflected field direction `2π − θ_a`.
    pub fn mirrored(&self) -> SweepRecord {
        let spins = self
            .state
            .spins
            .iter()
            .map(|s| Spin::new_unchecked(s.vec().mirror_y()))
            .collect();
        SweepRecord {
            theta_a: 2.0 * PI - self.theta_a,
            profile: self.profile.mirrored(),
            torque: -self.torque,
            mag_angle: -self.mag_angle,
            chirality: -self.chirality,
            state: ChainState { spins, time: self.state.time },
            ..self.clone()
        }
    }
}

/// True when `next` is on a different branch than `prev`: the chirality
/// reverses sign, or some layer moves further than `threshold`. Leaving or
/// reaching the achiral state (chirality 0) is continuous and not a jump.
pub fn is_jump(prev: &SweepRecord, next: &SweepRecord, threshold: f64) -> bool {
    prev.chirality * next.chirality < 0
        || prev
            .profile
            .theta
            .iter()
            .zip(&next.profile.theta)
            .any(|(a, b)| (a - b).abs() > threshold)
}

/// Indices `k` such that records `k - 1` and `k` straddle a branch switch.
pub fn find_jumps(records: &[SweepRecord], threshold: f64) -> Vec<usize> {
    (1..records.len())
        .filter(|&k| is_jump(&records[k - 1], &records[k], threshold))
        .collect()
}

/// Relaxes at one field direction and derives the record.
pub(crate) struct Tracker<'a> {
    pub stack: &'a MaterialStack,
    pub criteria: &'a RelaxCriteria,
    pub step: &'a StepParams,
    pub h_a: f64,
    pub chirality_threshold: f64,
}

impl Tracker<'_> {
    pub fn relax_at(
        &self,
        from: &ChainState,
        theta_a: f64,
        prev: Option<&SweepRecord>,
    ) -> Result<SweepRecord> {
        let applied = AppliedField::new(self.h_a, theta_a)?;
        let r = relax(self.stack, from, &applied, self.criteria, self.step)?;
        let profile = angle_profile(&r.state, prev.map(|p| &p.profile))?;
        let mag_angle = magnetization_angle(self.stack, &profile, prev.map(|p| p.mag_angle))?;
        Ok(SweepRecord {
            theta_a,
            torque: torque_density(self.stack, &profile, &applied),
            mag_angle,
            chirality: chirality(&profile, self.stack, self.chirality_threshold),
            equilibration_time: r.equilibration_time,
            steps: r.steps,
            converged: r.converged,
            residual: r.final_residual,
            state: r.state,
            profile,
        })
    }
}

/// Runs `schedule` from the easy-axis saturated state.
pub fn rotational_sweep(
    stack: &MaterialStack,
    schedule: &SweepSchedule,
    criteria: &RelaxCriteria,
    step: &StepParams,
) -> Result<Vec<SweepRecord>> {
    rotational_sweep_with(stack, &uniform_state(stack, 0.0, 0.0), schedule, criteria, step, &mut |_| {})
}

/// Runs `schedule` from `initial`, handing each record to `on_record` as
/// soon as it is final. Non-converged relaxations are recorded with
/// `converged == false` and the sweep continues.
pub fn rotational_sweep_with(
    stack: &MaterialStack,
    initial: &ChainState,
    schedule: &SweepSchedule,
    criteria: &RelaxCriteria,
    step: &StepParams,
    on_record: &mut dyn FnMut(&SweepRecord),
) -> Result<Vec<SweepRecord>> {
    let (ratio, n_coarse) = schedule.validate()?;
    let tracker = Tracker {
        stack,
        criteria,
        step,
        h_a: schedule.h_a,
        chirality_threshold: schedule.chirality_threshold,
    };
    let mut records = Vec::with_capacity(n_coarse + 1);
    let first = tracker.relax_at(initial, schedule.angle_at(0), None)?;
    on_record(&first);
    records.push(first);

    for k in 1..=n_coarse {
        let prev = records.last().expect("sweep has a first record");
        let target = k * ratio;
        let cand = tracker.relax_at(&prev.state, schedule.angle_at(target), Some(prev))?;
        if ratio > 1 && is_jump(prev, &cand, schedule.jump_threshold) {
            for f in (target - ratio + 1)..=target {
                let prev = records.last().expect("sweep has a first record");
                let rec = tracker.relax_at(&prev.state, schedule.angle_at(f), Some(prev))?;
                on_record(&rec);
                records.push(rec);
            }
        } else {
            on_record(&cand);
            records.push(cand);
        }
    }
    Ok(records)
}

/// Reflection of a whole sweep (`θ_a → 2π − θ_a`, `y → −y`).
pub fn mirror_records(records: &[SweepRecord]) -> Vec<SweepRecord> {
    records.iter().map(SweepRecord::mirrored).collect()
}

/// Value of layer `layer` on a branch at `theta_a`, interpolating linearly
/// between the neighbouring grid points when `theta_a` is not on the grid.
fn branch_value(sorted: &[(f64, f64)], theta_a: f64) -> f64 {
    let idx = sorted.partition_point(|&(a, _)| a < theta_a - 1e-9);
    if idx < sorted.len() && (sorted[idx].0 - theta_a).abs() <= 1e-9 {
        return sorted[idx].1;
    }
    let (a0, v0) = sorted[idx.saturating_sub(1)];
    let (a1, v1) = sorted[idx.min(sorted.len() - 1)];
    if a1 == a0 {
        v0
    } else {
        v0 + (v1 - v0) * (theta_a - a0) / (a1 - a0)
    }
}

/// Width (radians of θ_a) of the region where the increasing and decreasing
/// branches of layer `layer` differ by more than `tol`, comparing angles
/// modulo 2π.
///
/// Both sweeps must cover the same θ_a range. Differences are evaluated on
/// the union of the two grids; a branch lacking a grid point is
/// interpolated there. Each differing run extends halfway to its agreeing
/// neighbours.
pub fn loop_width(inc: &[SweepRecord], dec: &[SweepRecord], layer: usize, tol: f64) -> Result<f64> {
    if inc.len() < 2 || dec.len() < 2 {
        return Err(Error::GridMismatch("each branch needs at least two records".into()));
    }
    let n = inc[0].profile.len();
    if layer >= n {
        return Err(Error::validation("layer", format!("index {layer} out of range for {n} layers")));
    }
    let branch = |rs: &[SweepRecord]| -> Result<Vec<(f64, f64)>> {
        let mut v: Vec<(f64, f64)> = rs
            .iter()
            .map(|r| {
                r.profile
                    .theta
                    .get(layer)
                    .map(|&t| (r.theta_a, t))
                    .ok_or_else(|| Error::GridMismatch("records have different chain lengths".into()))
            })
            .collect::<Result<_>>()?;
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(v)
    };
    let a = branch(inc)?;
    let b = branch(dec)?;
    let range = |v: &[(f64, f64)]| (v[0].0, v[v.len() - 1].0);
    let (a_lo, a_hi) = range(&a);
    let (b_lo, b_hi) = range(&b);
    if (a_lo - b_lo).abs() > 1e-9 || (a_hi - b_hi).abs() > 1e-9 {
        return Err(Error::GridMismatch(format!(
            "ranges [{a_lo}, {a_hi}] and [{b_lo}, {b_hi}] differ"
        )));
    }

    let mut grid: Vec<f64> = a.iter().chain(&b).map(|p| p.0).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|x, y| (*x - *y).abs() <= 1e-9);
    let differs: Vec<bool> = grid
        .iter()
        .map(|&t| wrap_pi(branch_value(&a, t) - branch_value(&b, t)).abs() > tol)
        .collect();

    let mut width = 0.0;
    let mut k = 0;
    while k < grid.len() {
        if !differs[k] {
            k += 1;
            continue;
        }
        let start = k;
        while k + 1 < grid.len() && differs[k + 1] {
            k += 1;
        }
        let left = if start > 0 { 0.5 * (grid[start - 1] + grid[start]) } else { grid[start] };
        let right = if k + 1 < grid.len() { 0.5 * (grid[k] + grid[k + 1]) } else { grid[k] };
        width += right - left;
        k += 1;
    }
    Ok(width)
}

/// Result of a critical-angle search.
#[derive(Clone, Debug)]
pub struct CriticalAngle {
    pub theta_c: f64,
    /// Last equilibrium found before the transition.
    pub before: SweepRecord,
    /// First equilibrium found after it.
    pub after: SweepRecord,
}

/// θ_c at field strength `h_a`: the first direction, in an increasing
/// sweep from the saturated state, where the chain switches branch.
///
/// The sweep advances in 1° steps up to `bracket.0`, then through the
/// bracket until a switch (chirality change, or any layer moving by more
/// than [`BRANCH_SWITCH_THRESHOLD`]) occurs; the last interval is bisected
/// down to `tol`, always relaxing from the last pre-switch equilibrium.
pub fn locate_critical_angle(
    stack: &MaterialStack,
    h_a: f64,
    bracket: (f64, f64),
    tol: f64,
    criteria: &RelaxCriteria,
    step: &StepParams,
) -> Result<CriticalAngle> {
    let (lo, hi) = bracket;
    if !(lo >= 0.0 && hi > lo) {
        return Err(Error::validation("bracket", "need 0 <= lo < hi"));
    }
    if !(tol > 0.0) {
        return Err(Error::validation("tol", "must be positive"));
    }
    let tracker = Tracker {
        stack,
        criteria,
        step,
        h_a,
        chirality_threshold: DEFAULT_CHIRALITY_THRESHOLD,
    };
    let coarse = 1f64.to_radians();
    let mut below = tracker.relax_at(&uniform_state(stack, 0.0, 0.0), 0.0, None)?;

    let mut grid = Vec::new();
    let mut t = coarse;
    while t < lo - 1e-12 {
        grid.push(t);
        t += coarse;
    }
    let mut t = lo;
    while t < hi - 1e-12 {
        grid.push(t);
        t += coarse;
    }
    grid.push(hi);

    let mut above = None;
    for &theta in &grid {
        let rec = tracker.relax_at(&below.state, theta, Some(&below))?;
        if is_jump(&below, &rec, BRANCH_SWITCH_THRESHOLD) {
            if theta <= lo {
                return Err(Error::NotFound(format!(
                    "branch switch at {:.2}° precedes the bracket",
                    theta.to_degrees()
                )));
            }
            above = Some(rec);
            break;
        }
        below = rec;
    }
    let mut after = above.ok_or_else(|| {
        Error::NotFound(format!(
            "no branch switch in [{:.3}°, {:.3}°] at H_a = {h_a} Oe",
            lo.to_degrees(),
            hi.to_degrees()
        ))
    })?;

    while after.theta_a - below.theta_a > tol {
        let mid = 0.5 * (below.theta_a + after.theta_a);
        let rec = tracker.relax_at(&below.state, mid, Some(&below))?;
        if is_jump(&below, &rec, BRANCH_SWITCH_THRESHOLD) {
            after = rec;
        } else {
            below = rec;
        }
    }
    Ok(CriticalAngle {
        theta_c: 0.5 * (below.theta_a + after.theta_a),
        before: below,
        after,
    })
}

/// [`locate_critical_angle`], returning θ_c only.
pub fn find_critical_angle(
    stack: &MaterialStack,
    h_a: f64,
    bracket: (f64, f64),
    tol: f64,
    criteria: &RelaxCriteria,
    step: &StepParams,
) -> Result<f64> {
    locate_critical_angle(stack, h_a, bracket, tol, criteria, step).map(|c| c.theta_c)
}

/// Qualitative summary of one full increasing turn at a given strength.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSummary {
    pub h_a: f64,
    /// Direction of the first branch switch.
    pub theta_c: Option<f64>,
    /// Loop width on the interface layer, from the sweep and its mirror image.
    pub loop_width: f64,
    /// Largest |θ| of the deepest hard layer over the turn.
    pub max_bottom_angle: f64,
    /// No switch changed the chirality.
    pub chirality_preserved: bool,
}

/// Settings for [`find_critical_fields`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalFieldOptions {
    /// Number of evenly spaced strengths sampled before bisection.
    pub samples: usize,
    /// Relative drop of the loop width between neighbouring strengths that
    /// marks the second critical field.
    pub width_drop: f64,
    /// Deepest-layer rotation that marks full-length transitions, radians.
    pub bottom_threshold: f64,
    pub branch_tol: f64,
    pub criteria: RelaxCriteria,
    pub step: StepParams,
}

impl Default for CriticalFieldOptions {
    fn default() -> Self {
        CriticalFieldOptions {
            samples: 12,
            width_drop: 0.25,
            bottom_threshold: 10f64.to_radians(),
            branch_tol: DEFAULT_BRANCH_TOL,
            criteria: RelaxCriteria::default(),
            step: StepParams::default(),
        }
    }
}

/// Critical field strengths and the per-strength samples they were
/// bracketed from.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalReport {
    pub h_c1: Option<f64>,
    pub h_c2: Option<f64>,
    pub h_c3: Option<f64>,
    /// Every strength evaluated, sorted by `h_a`.
    pub samples: Vec<FieldSummary>,
}

/// Sweeps one full increasing turn at `h_a` and summarizes it.
pub fn summarize_field(
    stack: &MaterialStack,
    h_a: f64,
    opts: &CriticalFieldOptions,
) -> Result<FieldSummary> {
    let schedule = SweepSchedule::full_turn(h_a, Direction::Increasing);
    let inc = rotational_sweep(stack, &schedule, &opts.criteria, &opts.step)?;
    let jumps = find_jumps(&inc, BRANCH_SWITCH_THRESHOLD);
    let dec = mirror_records(&inc);
    let layer = stack.interface_layer().unwrap_or(0);
    Ok(FieldSummary {
        h_a,
        theta_c: jumps
            .first()
            .map(|&k| 0.5 * (inc[k - 1].theta_a + inc[k].theta_a)),
        loop_width: loop_width(&inc, &dec, layer, opts.branch_tol)?,
        max_bottom_angle: inc.iter().map(|r| r.profile.theta[0].abs()).fold(0.0, f64::max),
        chirality_preserved: jumps.iter().all(|&k| inc[k - 1].chirality * inc[k].chirality >= 0),
    })
}

/// Locates `H_c1` (onset of hysteresis), `H_c2` (sudden narrowing of the
/// loop) and `H_c3` (onset of full-length transitions that move the hard
/// layers) within `h_range`, each to within `tol` oersted.
///
/// Strengths are sampled evenly, each transition is bracketed between
/// neighbouring samples, and the bracket is bisected. Transitions not
/// bracketed by the samples are reported as `None`.
pub fn find_critical_fields(
    stack: &MaterialStack,
    h_range: (f64, f64),
    tol: f64,
    opts: &CriticalFieldOptions,
) -> Result<CriticalReport> {
    let (h_lo, h_hi) = h_range;
    if !(h_lo >= 0.0 && h_hi > h_lo) {
        return Err(Error::validation("H_range", "need 0 <= lo < hi"));
    }
    if !(tol > 0.0) {
        return Err(Error::validation("tol", "must be positive"));
    }
    if opts.samples < 2 {
        return Err(Error::validation("samples", "need at least 2"));
    }
    let mut samples: Vec<FieldSummary> = (0..opts.samples)
        .map(|k| h_lo + (h_hi - h_lo) * k as f64 / (opts.samples - 1) as f64)
        .map(|h| summarize_field(stack, h, opts))
        .collect::<Result<_>>()?;

    let hysteretic = |s: &FieldSummary| s.theta_c.is_some();
    // Full-length transitions move the deepest hard layer and keep the
    // chirality across the jump.
    let full_length = |s: &FieldSummary| {
        s.theta_c.is_some() && s.chirality_preserved && s.max_bottom_angle > opts.bottom_threshold
    };

    let mut extra = Vec::new();
    let bisect = |samples: &[FieldSummary],
                      extra: &mut Vec<FieldSummary>,
                      pred: &dyn Fn(&FieldSummary, &FieldSummary) -> bool|
     -> Result<Option<f64>> {
        // pred(lo_sample, candidate) is true when the candidate lies past the transition
        let Some(k) = (1..samples.len()).find(|&k| pred(&samples[k - 1], &samples[k])) else {
            return Ok(None);
        };
        let mut lo = samples[k - 1].clone();
        let mut hi = samples[k].clone();
        while hi.h_a - lo.h_a > tol {
            let mid = summarize_field(stack, 0.5 * (lo.h_a + hi.h_a), opts)?;
            extra.push(mid.clone());
            if pred(&lo, &mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(Some(0.5 * (lo.h_a + hi.h_a)))
    };

    let h_c1 = bisect(&samples, &mut extra, &|lo, s| !hysteretic(lo) && hysteretic(s))?;
    let drop = opts.width_drop;
    let h_c2 = bisect(&samples, &mut extra, &|lo, s| {
        hysteretic(lo) && hysteretic(s) && s.loop_width < (1.0 - drop) * lo.loop_width
    })?;
    let h_c3 = bisect(&samples, &mut extra, &|lo, s| !full_length(lo) && full_length(s))?;

    samples.extend(extra);
    samples.sort_by(|a, b| a.h_a.total_cmp(&b.h_a));
    Ok(CriticalReport { h_c1, h_c2, h_c3, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(theta_a: f64, theta: Vec<f64>) -> SweepRecord {
        let n = theta.len();
        SweepRecord {
            theta_a,
            profile: AngleProfile { theta, phi: vec![0.0; n] },
            torque: 0.0,
            mag_angle: 0.0,
            chirality: 0,
            equilibration_time: 0.0,
            steps: 0,
            converged: true,
            residual: 0.0,
            state: ChainState::new(vec![Spin::from_angles(0.0, 0.0); n]),
        }
    }

    #[test]
    fn schedule_grid_is_integer_multiples_of_refine_step() {
        let s = SweepSchedule::full_turn(4800.0, Direction::Decreasing);
        let (ratio, n) = s.validate().unwrap();
        assert_eq!((ratio, n), (10, 360));
        assert_eq!(s.angle_at(0), 2.0 * PI);
        let inc = SweepSchedule::full_turn(4800.0, Direction::Increasing);
        for k in [1, 37, 3015] {
            assert!((inc.angle_at(k) + s.angle_at(k) - 2.0 * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn schedule_rejects_bad_steps() {
        let mut s = SweepSchedule::full_turn(4800.0, Direction::Increasing);
        s.refine_step = 0.3f64.to_radians();
        assert!(s.validate().is_err());
        let mut s = SweepSchedule::full_turn(4800.0, Direction::Increasing);
        s.theta_end = -1.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn identical_branches_have_zero_width() {
        let inc: Vec<_> = (0..10).map(|k| rec(k as f64 * 0.1, vec![0.0, k as f64 * 0.01])).collect();
        assert_eq!(loop_width(&inc, &inc, 1, 1e-3).unwrap(), 0.0);
    }

    #[test]
    fn width_spans_the_differing_run() {
        let inc: Vec<_> = (0..=10).map(|k| rec(k as f64, vec![0.0, 0.0])).collect();
        let mut dec = inc.clone();
        for r in &mut dec[3..=6] {
            r.profile.theta[1] = 1.0;
        }
        // points 3..=6 differ; edges halfway to 2 and 7
        assert!((loop_width(&inc, &dec, 1, 1e-3).unwrap() - 4.0).abs() < 1e-12);
        // deeper layer agrees everywhere
        assert_eq!(loop_width(&inc, &dec, 0, 1e-3).unwrap(), 0.0);
    }

    #[test]
    fn width_interpolates_missing_grid_points() {
        let inc: Vec<_> = (0..=10).map(|k| rec(k as f64, vec![k as f64])).collect();
        let mut dec: Vec<_> = (0..=10).step_by(2).map(|k| rec(k as f64, vec![k as f64])).collect();
        assert_eq!(loop_width(&inc, &dec, 0, 1e-9).unwrap(), 0.0);
        dec.pop();
        assert!(matches!(loop_width(&inc, &dec, 0, 1e-9), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn jumps_by_chirality_or_angle() {
        let mut a = rec(0.0, vec![0.0, 0.1]);
        let mut b = rec(0.1, vec![0.0, 0.12]);
        b.chirality = -1;
        assert!(!is_jump(&a, &b, 0.1));
        a.chirality = 1;
        assert!(is_jump(&a, &b, 0.1));
        let c = rec(0.2, vec![0.0, 1.0]);
        assert!(is_jump(&a, &c, 0.1));
        assert_eq!(find_jumps(&[a, rec(0.1, vec![0.0, 0.1]), c], 0.1), vec![2]);
    }

    #[test]
    fn mirrored_record_reflects_everything() {
        let mut r = rec(1.0, vec![0.1, 0.3]);
        r.torque = 2.0;
        r.chirality = 1;
        r.state = ChainState::new(vec![Spin::from_angles(0.1, 0.0), Spin::from_angles(0.3, 0.0)]);
        let m = r.mirrored();
        assert_eq!(m.theta_a, 2.0 * PI - 1.0);
        assert_eq!(m.profile.theta, vec![-0.1, -0.3]);
        assert_eq!((m.torque, m.chirality), (-2.0, -1));
        assert!((m.state.spins[1].vec().y + 0.3f64.sin()).abs() < 1e-15);
    }
}
