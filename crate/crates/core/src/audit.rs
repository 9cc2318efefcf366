//! Per-step inequality audits.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Default absolute slack on audited inequalities.
pub const AUDIT_TOL: f64 = 1e-10;

/// Which inequality an [`AuditReport`] checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InequalityId {
    /// Mann → new multistep gap recursion.
    #[serde(rename = "T1_forward_2_9")]
    T1Forward,
    /// New multistep → Mann gap recursion.
    #[serde(rename = "T1_backward_2_18")]
    T1Backward,
    /// Mann → S-iteration gap recursion.
    #[serde(rename = "T2_forward_2_28")]
    T2Forward,
    /// S-iteration → Mann gap recursion.
    #[serde(rename = "T2_backward_2_34")]
    T2Backward,
    /// `‖xₙ − Txₙ‖ ≤ (1+δ)‖xₙ − p‖`.
    #[serde(rename = "residual_decay")]
    ResidualDecay,
    /// `‖yⁱ − Tyⁱ‖ ≤ (1+δ)‖xₙ − p‖` for every auxiliary level.
    #[serde(rename = "intermediate_residual")]
    IntermediateResidual,
}

impl InequalityId {
    pub fn name(self) -> &'static str {
        match self {
            InequalityId::T1Forward => "T1_forward_2_9",
            InequalityId::T1Backward => "T1_backward_2_18",
            InequalityId::T2Forward => "T2_forward_2_28",
            InequalityId::T2Backward => "T2_backward_2_34",
            InequalityId::ResidualDecay => "residual_decay",
            InequalityId::IntermediateResidual => "intermediate_residual",
        }
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One audited instance `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    /// Step index `n`.
    pub n: usize,
    /// Auxiliary level for per-level checks, otherwise absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub slack: f64,
}

impl AuditRow {
    pub fn new(n: usize, lhs: f64, rhs: f64) -> Self {
        Self {
            n,
            level: None,
            lhs,
            rhs,
            slack: rhs - lhs,
        }
    }

    pub fn at_level(mut self, level: usize) -> Self {
        self.level = Some(level);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub inequality_id: InequalityId,
    pub tolerance: f64,
    pub rows: Vec<AuditRow>,
    /// Index into `rows` of the first row with `slack < −tolerance`.
    pub first_violation: Option<usize>,
}

impl AuditReport {
    pub fn from_rows(inequality_id: InequalityId, rows: Vec<AuditRow>, tolerance: f64) -> Self {
        let first_violation = rows.iter().position(|r| r.slack < -tolerance || r.slack.is_nan());
        Self {
            inequality_id,
            tolerance,
            rows,
            first_violation,
        }
    }

    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }

    pub fn violation_count(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.slack < -self.tolerance || r.slack.is_nan())
            .count()
    }

    pub fn min_slack(&self) -> f64 {
        self.rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min)
    }

    /// Compact record for JSON export, keyed by `label` and the inequality.
    pub fn summary(&self, label: &str) -> AuditSummary {
        AuditSummary {
            label: label.to_string(),
            inequality_id: self.inequality_id,
            rows: self.rows.len(),
            violations: self.violation_count(),
            first_violation_step: self.first_violation.map(|i| self.rows[i].n),
            min_slack: if self.rows.is_empty() {
                None
            } else {
                Some(self.min_slack())
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub label: String,
    pub inequality_id: InequalityId,
    pub rows: usize,
    pub violations: usize,
    pub first_violation_step: Option<usize>,
    pub min_slack: Option<f64>,
}
