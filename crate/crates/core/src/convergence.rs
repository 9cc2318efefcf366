//! Recurrence-lemma diagnostics and residual bounds along trajectories.
//!
//! The lemma: if `a_{n+1} ≤ (1−μₙ)aₙ + ρₙ` with `μₙ ∈ (0,1)`, `Σμₙ = ∞` and
//! `ρₙ = o(μₙ)`, then `aₙ → 0`. Only a finite prefix is ever available, so the
//! asymptotic hypotheses are reported as proxies and a verdict is at most
//! "consistent with" the lemma.

use serde::{Deserialize, Serialize};

use crate::audit::{AuditReport, AuditRow, InequalityId, AUDIT_TOL};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mapping::MappingSpec;
use crate::norm::Norm;
use crate::schemes::Trajectory;

/// Finite prefix of `(aₙ, μₙ, ρₙ)`, all of the same length `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceWitness {
    pub a: Vec<f64>,
    pub mu: Vec<f64>,
    pub rho: Vec<f64>,
}

impl RecurrenceWitness {
    /// Simulates `a_{n+1} = (1−μₙ)aₙ + ρₙ` with equality.
    pub fn simulate(a0: f64, mu: Vec<f64>, rho: Vec<f64>) -> Self {
        let mut a = Vec::with_capacity(mu.len());
        a.push(a0);
        for n in 0..mu.len().saturating_sub(1) {
            a.push((1.0 - mu[n]) * a[n] + rho[n]);
        }
        Self { a, mu, rho }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.a.len();
        if self.mu.len() != n || self.rho.len() != n {
            return Err(Error::MalformedWitness(format!(
                "lengths differ: a={}, mu={}, rho={}",
                n,
                self.mu.len(),
                self.rho.len()
            )));
        }
        if n < 8 {
            return Err(Error::MalformedWitness(format!("need N >= 8, got {n}")));
        }
        for (name, seq) in [("a", &self.a), ("rho", &self.rho)] {
            if let Some((i, v)) = seq
                .iter()
                .enumerate()
                .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
            {
                return Err(Error::MalformedWitness(format!(
                    "{name}[{i}] = {v} is not a finite nonnegative number"
                )));
            }
        }
        if let Some((i, v)) = self
            .mu
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > 0.0 && **v < 1.0))
        {
            return Err(Error::MalformedWitness(format!(
                "mu[{i}] = {v} is outside (0, 1)"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaVerdict {
    pub recurrence_holds: bool,
    pub first_violation: Option<usize>,
    /// `Σ μₙ` over the prefix.
    pub mu_divergence_proxy: f64,
    /// `max ρₙ/μₙ` over the last quarter of the prefix.
    pub rho_little_o: f64,
    /// `max ρₙ/μₙ` over the first quarter.
    pub rho_ratio_head: f64,
    /// `max aₙ` over the last quarter.
    pub a_tail: f64,
    /// `max aₙ` over the first quarter.
    pub a_head: f64,
    /// Recurrence holds, the `ρ/μ` ratio has come down (or is zero), and
    /// `a` has decayed (or is zero).
    pub consistent_with_lemma: bool,
}

fn max_over(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, f64::max)
}

/// Checks `a_{n+1} ≤ (1−μₙ)aₙ + ρₙ + slack` for every `n < N−1` and reports
/// the hypothesis proxies.
pub fn check_lemma1(w: &RecurrenceWitness, slack: f64) -> Result<LemmaVerdict> {
    w.validate()?;
    let n = w.len();
    let quarter = n / 4;

    let first_violation = (0..n - 1).find(|&i| !(w.a[i + 1] <= (1.0 - w.mu[i]) * w.a[i] + w.rho[i] + slack));

    let ratio = |i: usize| w.rho[i] / w.mu[i];
    let rho_ratio_head = max_over((0..quarter).map(ratio));
    let rho_little_o = max_over((n - quarter..n).map(ratio));
    let a_head = max_over(w.a[..quarter].iter().copied());
    let a_tail = max_over(w.a[n - quarter..].iter().copied());

    let ratio_falls = rho_little_o == 0.0 || rho_little_o < rho_ratio_head;
    let a_decays = a_tail == 0.0 || a_tail < a_head;

    Ok(LemmaVerdict {
        recurrence_holds: first_violation.is_none(),
        first_violation,
        mu_divergence_proxy: w.mu.iter().sum(),
        rho_little_o,
        rho_ratio_head,
        a_tail,
        a_head,
        consistent_with_lemma: first_violation.is_none() && ratio_falls && a_decays,
    })
}

/// `‖xₙ − Txₙ‖ ≤ (1+δ)‖xₙ − p‖` at every iterate, using the trajectory's
/// recorded residuals and norm.
pub fn residual_decay_bound(traj: &Trajectory, delta: f64, p: Option<&[f64]>) -> Result<AuditReport> {
    let p = p.ok_or(Error::MissingFixedPoint)?;
    let rows = traj
        .iterates
        .iter()
        .zip(&traj.residuals)
        .enumerate()
        .map(|(n, (x, r))| AuditRow::new(n, *r, (1.0 + delta) * traj.norm.dist(x, p)))
        .collect();
    Ok(AuditReport::from_rows(
        InequalityId::ResidualDecay,
        rows,
        AUDIT_TOL,
    ))
}

/// `‖yⁱ − Tyⁱ‖ ≤ (1+δ)‖xₙ − p‖` for every auxiliary point of one step.
/// Rows carry step index `n` and level `i` (1-based, `y¹` first).
pub fn y_residual_bound(
    map: &MappingSpec,
    norm: &Norm,
    n: usize,
    intermediates: &[Point],
    delta: f64,
    p: Option<&[f64]>,
    x_n: &[f64],
) -> Result<Vec<AuditRow>> {
    let p = p.ok_or(Error::MissingFixedPoint)?;
    let rhs = (1.0 + delta) * norm.dist(x_n, p);
    intermediates
        .iter()
        .enumerate()
        .map(|(i, y)| Ok(AuditRow::new(n, map.residual(norm, y)?, rhs).at_level(i + 1)))
        .collect()
}

/// [`y_residual_bound`] over every recorded step of a trajectory.
pub fn intermediate_residual_bounds(
    map: &MappingSpec,
    traj: &Trajectory,
    delta: f64,
    p: Option<&[f64]>,
) -> Result<AuditReport> {
    let steps = traj
        .intermediates
        .as_ref()
        .ok_or_else(|| Error::InvalidScheme("trajectory was run without recording intermediates".into()))?;
    let mut rows = Vec::new();
    for (n, ys) in steps.iter().enumerate() {
        rows.extend(y_residual_bound(
            map,
            &traj.norm,
            n,
            ys,
            delta,
            p,
            &traj.iterates[n],
        )?);
    }
    Ok(AuditReport::from_rows(
        InequalityId::IntermediateResidual,
        rows,
        AUDIT_TOL,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoxDomain;
    use crate::schemes::{run, run_with, ParameterSchedule, RunOptions, SchemeConfig, Stopping};

    fn geometric_witness(n: usize) -> RecurrenceWitness {
        let mu = vec![0.5; n];
        let rho: Vec<f64> = (0..n).map(|i| 0.75f64.powi(i as i32)).collect();
        RecurrenceWitness::simulate(1.0, mu, rho)
    }

    #[test]
    fn geometric_forcing_is_consistent() {
        let w = geometric_witness(100);
        let v = check_lemma1(&w, 0.0).unwrap();
        assert!(v.recurrence_holds);
        assert!(v.consistent_with_lemma);
        assert_eq!(v.mu_divergence_proxy, 50.0);
        // ρ/μ = 2 (3/4)^n, largest on the tail at n = 75
        assert_eq!(v.rho_little_o, 2.0 * 0.75f64.powi(75));
        assert!(v.a_tail < v.a_head);
    }

    #[test]
    fn zero_witness_is_consistent() {
        let w = RecurrenceWitness {
            a: vec![0.0; 16],
            mu: vec![0.5; 16],
            rho: vec![0.0; 16],
        };
        let v = check_lemma1(&w, 0.0).unwrap();
        assert!(v.recurrence_holds && v.consistent_with_lemma);
    }

    #[test]
    fn constant_sequence_violates_at_zero() {
        let w = RecurrenceWitness {
            a: vec![1.0; 16],
            mu: vec![0.5; 16],
            rho: vec![0.0; 16],
        };
        let v = check_lemma1(&w, 0.0).unwrap();
        assert!(!v.recurrence_holds);
        assert_eq!(v.first_violation, Some(0));
        assert!(!v.consistent_with_lemma);
    }

    #[test]
    fn malformed_witnesses() {
        let ok = geometric_witness(10);
        let mut w = ok.clone();
        w.mu[3] = 1.0;
        assert!(matches!(check_lemma1(&w, 0.0), Err(Error::MalformedWitness(_))));
        let mut w = ok.clone();
        w.a[2] = -1.0;
        assert!(check_lemma1(&w, 0.0).is_err());
        let mut w = ok.clone();
        w.rho.pop();
        assert!(check_lemma1(&w, 0.0).is_err());
        assert!(check_lemma1(&geometric_witness(7), 0.0).is_err());
    }

    fn half() -> MappingSpec {
        MappingSpec::affine(
            "half",
            BoxDomain::cube(1, 0.0, 1.0).unwrap(),
            vec![vec![0.5]],
            vec![0.0],
            Some(vec![0.0]),
        )
        .unwrap()
    }

    #[test]
    fn residual_bound_on_half() {
        let t = half();
        let traj = run(&t, &SchemeConfig::picard(), &[1.0], &Stopping::default()).unwrap();
        let r = residual_decay_bound(&traj, 0.5, Some(&[0.0])).unwrap();
        assert!(r.passed());
        // residual x/2 against (3/2)x: margin is exactly x
        for (row, x) in r.rows.iter().zip(&traj.iterates) {
            assert_eq!(row.slack, x[0]);
        }
        assert!(matches!(
            residual_decay_bound(&traj, 0.5, None),
            Err(Error::MissingFixedPoint)
        ));
    }

    #[test]
    fn residual_bound_at_fixed_point() {
        let t = half();
        let traj = run(&t, &SchemeConfig::picard(), &[0.0], &Stopping::default()).unwrap();
        let r = residual_decay_bound(&traj, 0.5, Some(&[0.0])).unwrap();
        assert_eq!((r.rows[0].lhs, r.rows[0].rhs), (0.0, 0.0));
    }

    #[test]
    fn y_residual_hand_values() {
        let t = half();
        let n = Norm::euclidean();
        let s = crate::schemes::step_new_multistep_1_6(&t, &[1.0], 0.5, &[0.5, 0.5]).unwrap();
        let rows = y_residual_bound(&t, &n, 0, &s.intermediates, 0.5, Some(&[0.0]), &[1.0]).unwrap();
        // y² = 3/4 with residual 3/8; y¹ = 9/16 with residual 9/32; bound 3/2
        assert_eq!(rows[1].lhs, 0.375);
        assert_eq!(rows[1].level, Some(2));
        assert_eq!(rows[0].lhs, 9.0 / 32.0);
        assert!(rows.iter().all(|r| r.rhs == 1.5));

        let s = crate::schemes::step_new_multistep_1_6(&t, &[0.0], 0.5, &[0.5, 0.5]).unwrap();
        let rows = y_residual_bound(&t, &n, 0, &s.intermediates, 0.5, Some(&[0.0]), &[0.0]).unwrap();
        assert!(rows.iter().all(|r| r.lhs == 0.0 && r.rhs == 0.0));
    }

    #[test]
    fn intermediate_bounds_need_recording() {
        let t = half();
        let cfg =
            SchemeConfig::s_iteration(ParameterSchedule::constant(0.5), ParameterSchedule::constant(0.5));
        let plain = run(&t, &cfg, &[1.0], &Stopping::default()).unwrap();
        assert!(intermediate_residual_bounds(&t, &plain, 0.5, Some(&[0.0])).is_err());
        let opts = RunOptions {
            record_intermediates: true,
            ..RunOptions::default()
        };
        let full = run_with(&t, &cfg, &[1.0], &Stopping::default(), &opts).unwrap();
        let r = intermediate_residual_bounds(&t, &full, 0.5, Some(&[0.0])).unwrap();
        assert!(r.passed());
        assert_eq!(r.rows.len(), full.iterates.len() - 1);
    }
}
