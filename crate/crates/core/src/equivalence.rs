//! Coupled runs of two schemes from one starting point, per-step audits of the
//! gap recursions that drive `‖uₙ − xₙ‖ → 0`, and the ten-scheme suite.
//!
//! The reference scheme `u` is Mann. The audits take `δ` and `φ` from a
//! contractive-like certificate and `A` from the declared α floor; every
//! right-hand side is recomputed from the map, the recorded schedules and the
//! stored auxiliary points.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audit::{AuditReport, AuditRow, AuditSummary, InequalityId, AUDIT_TOL};
use crate::conditions::GaugeFunction;
use crate::convergence::{intermediate_residual_bounds, residual_decay_bound};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mapping::MappingSpec;
use crate::norm::Norm;
use crate::report::fmt_f64;
use crate::schemes::{
    step_scheme, Family, ParameterSchedule, SchemeConfig, StopReason, Stopping, Trajectory,
};

/// Two limits closer than this count as the same fixed point.
pub const AGREEMENT_TOL: f64 = 1e-7;

/// Environment variable capping the suite's worker threads.
pub const THREADS_ENV: &str = "FIXPOINT_LAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoupleOutcome {
    /// Both reached the stopping tolerance at points within [`AGREEMENT_TOL`].
    SameLimit,
    /// At most one converged but the gap tail is below [`AGREEMENT_TOL`].
    GapVanishing,
    /// One converged (or both did) while the gap stayed above [`AGREEMENT_TOL`].
    CounterexampleFlag,
    /// Neither converged and the gap did not close.
    Undecided,
}

impl CoupleOutcome {
    pub fn name(self) -> &'static str {
        match self {
            CoupleOutcome::SameLimit => "same_limit",
            CoupleOutcome::GapVanishing => "gap_vanishing",
            CoupleOutcome::CounterexampleFlag => "counterexample_flag",
            CoupleOutcome::Undecided => "undecided",
        }
    }
}

/// Two trajectories advanced in lockstep from one `x0`.
///
/// Stepping continues until both residuals are within tolerance, so the two
/// trajectories always have the same length as `gap`. A trajectory's
/// `stop_reason` is `Tolerance` if its last residual is within tolerance.
#[derive(Debug, Clone)]
pub struct CoupledRun {
    pub map: MappingSpec,
    pub scheme_a: SchemeConfig,
    pub scheme_b: SchemeConfig,
    pub x0: Point,
    pub stopping: Stopping,
    /// `A = min` of the two declared α floors.
    pub alpha_floor: f64,
    pub a: Trajectory,
    pub b: Trajectory,
    /// `‖uₙ − xₙ‖`.
    pub gap: Vec<f64>,
    pub outcome: CoupleOutcome,
}

fn empty_trajectory(config: &SchemeConfig, norm: &Norm, known: bool) -> Trajectory {
    Trajectory {
        scheme: config.clone(),
        norm: norm.clone(),
        iterates: Vec::new(),
        residuals: Vec::new(),
        fp_distances: known.then(Vec::new),
        stop_reason: StopReason::MaxIters,
        last_intermediates: Vec::new(),
        intermediates: Some(Vec::new()),
    }
}

fn check_floor(config: &SchemeConfig, n: usize) -> Result<()> {
    let value = config.alpha.value(n);
    if value < config.alpha.floor {
        return Err(Error::ScheduleFloorViolated {
            n,
            value,
            floor: config.alpha.floor,
        });
    }
    Ok(())
}

/// Index of the first iterate with residual `≤ tol`.
pub fn first_tolerance_index(traj: &Trajectory, tol: f64) -> Option<usize> {
    traj.residuals.iter().position(|r| *r <= tol)
}

/// Maximum of the last 10% of `gap` (at least one entry).
pub fn gap_tail(gap: &[f64]) -> f64 {
    let len = (gap.len() / 10).max(1).min(gap.len());
    gap[gap.len() - len..].iter().copied().fold(0.0, f64::max)
}

/// [`couple_with`] under the Euclidean norm.
pub fn couple(
    map: &MappingSpec,
    scheme_a: &SchemeConfig,
    scheme_b: &SchemeConfig,
    x0: &[f64],
    stopping: &Stopping,
) -> Result<CoupledRun> {
    couple_with(map, scheme_a, scheme_b, x0, stopping, &Norm::euclidean())
}

/// Runs both schemes in lockstep from `x0`, keeping every auxiliary point.
/// Both α schedules must declare a floor `> 0`, and every `αₙ` used must
/// respect it.
pub fn couple_with(
    map: &MappingSpec,
    scheme_a: &SchemeConfig,
    scheme_b: &SchemeConfig,
    x0: &[f64],
    stopping: &Stopping,
    norm: &Norm,
) -> Result<CoupledRun> {
    scheme_a.validate()?;
    scheme_b.validate()?;
    norm.validate()?;
    for c in [scheme_a, scheme_b] {
        if !(c.alpha.floor > 0.0) {
            return Err(Error::InvalidSchedule(format!(
                "{} declares alpha floor {}; coupled runs need A > 0",
                c.label(),
                c.alpha.floor
            )));
        }
    }
    let p = map.known_fixed_point.as_deref();
    let mut ta = empty_trajectory(scheme_a, norm, p.is_some());
    let mut tb = empty_trajectory(scheme_b, norm, p.is_some());
    let mut gap = Vec::new();
    let mut u = x0.to_vec();
    let mut x = x0.to_vec();

    for n in 0.. {
        let mut diverged = [false; 2];
        for (i, (t, pt)) in [(&mut ta, &u), (&mut tb, &x)].into_iter().enumerate() {
            t.residuals.push(map.residual(norm, pt)?);
            if let (Some(p), Some(d)) = (p, t.fp_distances.as_mut()) {
                d.push(norm.dist(pt, p));
            }
            t.iterates.push(pt.clone());
            diverged[i] = norm.norm(pt) > stopping.divergence_bound;
        }
        gap.push(norm.dist(&u, &x));

        let done = [ta.residuals[n] <= stopping.tol, tb.residuals[n] <= stopping.tol];
        if (done[0] && done[1]) || diverged.iter().any(|d| *d) || n >= stopping.max_iters {
            for (i, t) in [&mut ta, &mut tb].into_iter().enumerate() {
                t.stop_reason = if done[i] {
                    StopReason::Tolerance
                } else if diverged[i] {
                    StopReason::DivergenceGuard
                } else {
                    StopReason::MaxIters
                };
            }
            break;
        }

        check_floor(scheme_a, n)?;
        check_floor(scheme_b, n)?;
        let sa = step_scheme(map, scheme_a, n, &u)?;
        let sb = step_scheme(map, scheme_b, n, &x)?;
        for (next, label) in [(&sa.next, scheme_a), (&sb.next, scheme_b)] {
            if !next.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFiniteValue {
                    label: format!("{}/{}", map.label, label.label()),
                    point: next.clone(),
                });
            }
        }
        u = sa.next;
        x = sb.next;
        for (t, ys) in [(&mut ta, sa.intermediates), (&mut tb, sb.intermediates)] {
            t.intermediates.get_or_insert_with(Vec::new).push(ys.clone());
            t.last_intermediates = ys;
        }
    }

    let converged = [ta.stop_reason, tb.stop_reason].map(|r| r == StopReason::Tolerance);
    let tail = gap_tail(&gap);
    let outcome = match converged {
        [true, true] if *gap.last().expect("nonempty") <= AGREEMENT_TOL => CoupleOutcome::SameLimit,
        [true, true] => CoupleOutcome::CounterexampleFlag,
        _ if tail <= AGREEMENT_TOL => CoupleOutcome::GapVanishing,
        [false, false] => CoupleOutcome::Undecided,
        _ => CoupleOutcome::CounterexampleFlag,
    };

    Ok(CoupledRun {
        map: map.clone(),
        scheme_a: scheme_a.clone(),
        scheme_b: scheme_b.clone(),
        x0: x0.to_vec(),
        stopping: *stopping,
        alpha_floor: scheme_a.alpha.floor.min(scheme_b.alpha.floor),
        a: ta,
        b: tb,
        gap,
        outcome,
    })
}

impl CoupledRun {
    /// `<map>/<a>_vs_<b>`.
    pub fn label(&self) -> String {
        format!(
            "{}/{}_vs_{}",
            self.map.label,
            self.scheme_a.label(),
            self.scheme_b.label()
        )
    }

    pub fn gap_tail(&self) -> f64 {
        gap_tail(&self.gap)
    }

    /// Columns `n, gap, residual_a, residual_b, u0…, x0…`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let d = self.x0.len();
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = ["n", "gap", "residual_a", "residual_b"]
            .map(String::from)
            .to_vec();
        header.extend((0..d).map(|i| format!("u{i}")));
        header.extend((0..d).map(|i| format!("x{i}")));
        w.write_record(&header)?;
        for n in 0..self.gap.len() {
            let mut row = vec![
                n.to_string(),
                fmt_f64(self.gap[n]),
                fmt_f64(self.a.residuals[n]),
                fmt_f64(self.b.residuals[n]),
            ];
            row.extend(self.a.iterates[n].iter().map(|v| fmt_f64(*v)));
            row.extend(self.b.iterates[n].iter().map(|v| fmt_f64(*v)));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    fn steps(&self) -> usize {
        self.gap.len() - 1
    }

    fn b_intermediates(&self, n: usize) -> &[Point] {
        &self
            .b
            .intermediates
            .as_ref()
            .expect("coupled runs record intermediates")[n]
    }

    fn residual(&self, x: &[f64]) -> Result<f64> {
        self.map.residual(&self.b.norm, x)
    }

    fn require_roles(&self, b_families: &[Family]) -> Result<()> {
        if !matches!(self.scheme_a.family, Family::Mann | Family::Krasnoselskij) {
            return Err(Error::SchemeMismatch(format!(
                "reference scheme must be mann, got {}",
                self.scheme_a.label()
            )));
        }
        if !b_families.contains(&self.scheme_b.family) {
            return Err(Error::SchemeMismatch(format!(
                "audited scheme {} is not one of {:?}",
                self.scheme_b.label(),
                b_families.iter().map(|f| f.name()).collect::<Vec<_>>()
            )));
        }
        for n in 0..self.steps() {
            let (x, y) = (self.scheme_a.alpha.value(n), self.scheme_b.alpha.value(n));
            if x != y {
                return Err(Error::SchemeMismatch(format!(
                    "alpha differs at n = {n}: {x} vs {y}"
                )));
            }
        }
        Ok(())
    }
}

const NEW_MULTISTEP_FAMILIES: [Family; 3] = [Family::NewMultistep, Family::Sp, Family::NewTwoStep];

fn check_audit_constants(delta: f64, phi: &GaugeFunction, a: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidConstants(format!(
            "delta = {delta} must lie in [0, 1)"
        )));
    }
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::InvalidSchedule(format!(
            "alpha floor A = {a} must lie in (0, 1]"
        )));
    }
    phi.validate()?;
    Ok(1.0 - a * (1.0 - delta))
}

/// `‖u_{n+1}−x_{n+1}‖ ≤ F‖uₙ−xₙ‖ + F·S·(‖uₙ−Tuₙ‖ + φ(‖uₙ−Tuₙ‖)) + αₙφ(‖uₙ−Tuₙ‖)`
/// with `F = 1−A(1−δ)` and `S = Σᵢ βⁱ Π_{j<i}[1−βʲ(1−δ)]`, `u` Mann and `x`
/// new multistep.
pub fn audit_theorem1_forward(
    run: &CoupledRun,
    delta: f64,
    phi: &GaugeFunction,
    a: f64,
) -> Result<AuditReport> {
    let f = check_audit_constants(delta, phi, a)?;
    run.require_roles(&NEW_MULTISTEP_FAMILIES)?;
    let mut rows = Vec::with_capacity(run.steps());
    for n in 0..run.steps() {
        let alpha = run.scheme_b.alpha.value(n);
        let betas: Vec<f64> = run.scheme_b.betas.iter().map(|b| b.value(n)).collect();
        let r_u = run.residual(&run.a.iterates[n])?;
        let mut sum = 0.0;
        let mut product = 1.0;
        for beta in &betas {
            sum += product * beta;
            product *= 1.0 - beta * (1.0 - delta);
        }
        let rhs = f * run.gap[n] + f * sum * (r_u + phi.eval(r_u)) + alpha * phi.eval(r_u);
        rows.push(AuditRow::new(n, run.gap[n + 1], rhs));
    }
    Ok(AuditReport::from_rows(InequalityId::T1Forward, rows, AUDIT_TOL))
}

/// `‖x_{n+1}−u_{n+1}‖ ≤ F‖xₙ−uₙ‖ + F{β^{k−1}‖Txₙ−xₙ‖ + Σ_{i<k−1} βⁱ‖Tyⁱ⁺¹−yⁱ⁺¹‖}
/// + αₙφ(‖y¹−Ty¹‖)`, `u` Mann and `x` new multistep.
pub fn audit_theorem1_backward(
    run: &CoupledRun,
    delta: f64,
    phi: &GaugeFunction,
    a: f64,
) -> Result<AuditReport> {
    let f = check_audit_constants(delta, phi, a)?;
    run.require_roles(&NEW_MULTISTEP_FAMILIES)?;
    let mut rows = Vec::with_capacity(run.steps());
    for n in 0..run.steps() {
        let alpha = run.scheme_b.alpha.value(n);
        let betas: Vec<f64> = run.scheme_b.betas.iter().map(|b| b.value(n)).collect();
        let ys = run.b_intermediates(n);
        let top = betas.len() - 1;
        let mut sum = betas[top] * run.residual(&run.b.iterates[n])?;
        for i in (0..top).rev() {
            sum += betas[i] * run.residual(&ys[i + 1])?;
        }
        let rhs = f * run.gap[n] + f * sum + alpha * phi.eval(run.residual(&ys[0])?);
        rows.push(AuditRow::new(n, run.gap[n + 1], rhs));
    }
    Ok(AuditReport::from_rows(InequalityId::T1Backward, rows, AUDIT_TOL))
}

/// `‖u_{n+1}−x_{n+1}‖ ≤ F‖uₙ−xₙ‖ + F‖uₙ−Tuₙ‖ + (1+αₙβₙδ)φ(‖uₙ−Tuₙ‖)`, `u` Mann
/// and `x` the S-iteration.
pub fn audit_theorem2_forward(
    run: &CoupledRun,
    delta: f64,
    phi: &GaugeFunction,
    a: f64,
) -> Result<AuditReport> {
    let f = check_audit_constants(delta, phi, a)?;
    run.require_roles(&[Family::SIteration])?;
    let mut rows = Vec::with_capacity(run.steps());
    for n in 0..run.steps() {
        let alpha = run.scheme_b.alpha.value(n);
        let beta = run.scheme_b.betas[0].value(n);
        let r_u = run.residual(&run.a.iterates[n])?;
        let rhs = f * run.gap[n] + f * r_u + (1.0 + alpha * beta * delta) * phi.eval(r_u);
        rows.push(AuditRow::new(n, run.gap[n + 1], rhs));
    }
    Ok(AuditReport::from_rows(InequalityId::T2Forward, rows, AUDIT_TOL))
}

/// `‖u_{n+1}−x_{n+1}‖ ≤ F‖xₙ−uₙ‖ + F‖Txₙ−xₙ‖ + αₙφ(‖yₙ−Tyₙ‖)`, `u` Mann and
/// `x` the S-iteration.
pub fn audit_theorem2_backward(
    run: &CoupledRun,
    delta: f64,
    phi: &GaugeFunction,
    a: f64,
) -> Result<AuditReport> {
    let f = check_audit_constants(delta, phi, a)?;
    run.require_roles(&[Family::SIteration])?;
    let mut rows = Vec::with_capacity(run.steps());
    for n in 0..run.steps() {
        let alpha = run.scheme_b.alpha.value(n);
        let y = &run.b_intermediates(n)[0];
        let rhs = f * run.gap[n] + f * run.residual(&run.b.iterates[n])? + alpha * phi.eval(run.residual(y)?);
        rows.push(AuditRow::new(n, run.gap[n + 1], rhs));
    }
    Ok(AuditReport::from_rows(InequalityId::T2Backward, rows, AUDIT_TOL))
}

/// The gap audits that apply to the pair's roles: both directions of the
/// first pair for a new-multistep family, of the second for the S-iteration,
/// none otherwise.
pub fn applicable_audits(
    run: &CoupledRun,
    delta: f64,
    phi: &GaugeFunction,
    a: f64,
) -> Result<Vec<AuditReport>> {
    if !matches!(run.scheme_a.family, Family::Mann | Family::Krasnoselskij) {
        return Ok(Vec::new());
    }
    let same_alpha = (0..run.steps()).all(|n| run.scheme_a.alpha.value(n) == run.scheme_b.alpha.value(n));
    if !same_alpha {
        return Ok(Vec::new());
    }
    match run.scheme_b.family {
        f if NEW_MULTISTEP_FAMILIES.contains(&f) => Ok(vec![
            audit_theorem1_forward(run, delta, phi, a)?,
            audit_theorem1_backward(run, delta, phi, a)?,
        ]),
        Family::SIteration => Ok(vec![
            audit_theorem2_forward(run, delta, phi, a)?,
            audit_theorem2_backward(run, delta, phi, a)?,
        ]),
        _ => Ok(Vec::new()),
    }
}

/// Shared schedules for the ten-scheme suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSchedules {
    /// Levels of the two multistep families.
    pub k: usize,
    pub alpha: ParameterSchedule,
    /// `βⁱ` pool, see [`SchemeConfig::for_family`].
    pub betas: Vec<ParameterSchedule>,
}

impl SuiteSchedules {
    /// Every schedule constant at `value`.
    pub fn constant(k: usize, value: f64) -> Self {
        Self {
            k,
            alpha: ParameterSchedule::constant(value),
            betas: vec![ParameterSchedule::constant(value)],
        }
    }

    pub fn configs(&self) -> Result<Vec<SchemeConfig>> {
        Family::ALL
            .iter()
            .map(|f| SchemeConfig::for_family(*f, self.k, &self.alpha, &self.betas))
            .collect()
    }
}

/// Contraction data the suite audits against.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditInputs {
    pub delta: f64,
    pub gauge: GaugeFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub scheme: String,
    pub family: Family,
    /// Reached the stopping tolerance on its own.
    pub converged: bool,
    /// `‖x − p‖` at the scheme's own stopping point.
    pub final_fp_error: f64,
    /// Tail of the gap against Mann.
    pub gap_tail: f64,
    /// Index at which the scheme alone would have stopped.
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub outcome: CoupleOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub map: String,
    /// The declared fixed point, or Mann's final iterate if none is declared.
    pub reference_point: Point,
    pub reference_known: bool,
    pub rows: Vec<SuiteRow>,
    pub audits: Vec<AuditSummary>,
    /// Every scheme converged to the reference point within [`AGREEMENT_TOL`].
    pub pass: bool,
}

impl SuiteReport {
    pub fn audit_violations(&self) -> usize {
        self.audits.iter().map(|a| a.violations).sum()
    }

    /// Columns `scheme, final_fp_error, gap_tail, iterations, stop_reason`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "scheme",
            "final_fp_error",
            "gap_tail",
            "iterations",
            "stop_reason",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.scheme.clone(),
                fmt_f64(r.final_fp_error),
                fmt_f64(r.gap_tail),
                r.iterations.to_string(),
                r.stop_reason.name().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs `f` on a pool capped by [`THREADS_ENV`] when that is set to a
/// positive integer, otherwise on the global pool.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0);
    match cap.map(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build()) {
        Some(Ok(pool)) => pool.install(f),
        _ => f(),
    }
}

/// All ten schemes from one `x0`, each coupled against Mann. With `audit`
/// given, the applicable gap audits run on every pair and, when the map
/// declares its fixed point, the residual bounds on every trajectory.
pub fn corollary2_suite(
    map: &MappingSpec,
    x0: &[f64],
    schedules: &SuiteSchedules,
    stopping: &Stopping,
    audit: Option<&AuditInputs>,
) -> Result<(SuiteReport, Vec<CoupledRun>)> {
    let configs = schedules.configs()?;
    let mann = SchemeConfig::for_family(Family::Mann, schedules.k, &schedules.alpha, &schedules.betas)?;
    let runs: Vec<CoupledRun> = with_thread_cap(|| {
        configs
            .par_iter()
            .map(|c| couple(map, &mann, c, x0, stopping))
            .collect::<Result<Vec<_>>>()
    })?;

    let known = map.known_fixed_point.clone();
    let reference_point = match &known {
        Some(p) => p.clone(),
        None => {
            let solo = runs
                .iter()
                .find(|r| r.scheme_b.family == Family::Mann)
                .expect("mann is in the suite");
            let stop = first_tolerance_index(&solo.b, stopping.tol).unwrap_or(solo.b.last_index());
            solo.b.iterates[stop].clone()
        }
    };

    let rows: Vec<SuiteRow> = runs
        .iter()
        .map(|r| {
            let own = first_tolerance_index(&r.b, stopping.tol);
            let stop = own.unwrap_or(r.b.last_index());
            SuiteRow {
                scheme: r.scheme_b.label(),
                family: r.scheme_b.family,
                converged: own.is_some(),
                final_fp_error: r.b.norm.dist(&r.b.iterates[stop], &reference_point),
                gap_tail: r.gap_tail(),
                iterations: stop,
                stop_reason: if own.is_some() {
                    StopReason::Tolerance
                } else {
                    r.b.stop_reason
                },
                outcome: r.outcome,
            }
        })
        .collect();

    let mut audits = Vec::new();
    if let Some(inputs) = audit {
        for r in &runs {
            for report in applicable_audits(r, inputs.delta, &inputs.gauge, r.alpha_floor)? {
                audits.push(report.summary(&r.label()));
            }
        }
        if let Some(p) = known.as_deref() {
            for r in &runs {
                let label = format!("{}/{}", map.label, r.scheme_b.label());
                audits.push(residual_decay_bound(&r.b, inputs.delta, Some(p))?.summary(&label));
                audits.push(intermediate_residual_bounds(map, &r.b, inputs.delta, Some(p))?.summary(&label));
            }
        }
    }

    let pass = rows
        .iter()
        .all(|r| r.converged && r.final_fp_error < AGREEMENT_TOL);
    Ok((
        SuiteReport {
            map: map.label.clone(),
            reference_point,
            reference_known: known.is_some(),
            rows,
            audits,
            pass,
        },
        runs,
    ))
}
