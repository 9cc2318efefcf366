//! Contractive-condition classes and their certification over finite sample
//! sets.
//!
//! Four classes are checked, from strongest to weakest:
//!
//! * Zamfirescu: for each pair at least one of
//!   `‖Tx−Ty‖ ≤ a‖x−y‖`, `‖Tx−Ty‖ ≤ b(‖x−Tx‖+‖y−Ty‖)`,
//!   `‖Tx−Ty‖ ≤ c(‖x−Ty‖+‖y−Tx‖)` holds, with `0<a<1`, `0<b,c<1/2`.
//! * quasi-contractive: `‖Tx−Ty‖ ≤ δ‖x−y‖ + 2δ‖x−Tx‖`.
//! * Osilike–Udomene: `‖Tx−Ty‖ ≤ δ‖x−y‖ + L‖x−Tx‖`.
//! * contractive-like: `‖Tx−Ty‖ ≤ δ‖x−y‖ + φ(‖x−Tx‖)`.
//!
//! A certificate only says that no violation was found on the pairs given; it
//! records how many.

mod gauge;
mod samples;

pub use gauge::GaugeFunction;
pub use samples::SampleSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mapping::MappingSpec;
use crate::norm::Norm;

/// Absolute slack allowed on every condition inequality.
pub const CONDITION_TOL: f64 = 1e-12;

/// Distance below which two candidate fixed points are the same point.
pub const DISTINCT_POINT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionClass {
    Zamfirescu,
    QuasiContractive,
    OsilikeUdomene,
    ContractiveLike,
}

impl ConditionClass {
    pub const ALL: [ConditionClass; 4] = [
        ConditionClass::Zamfirescu,
        ConditionClass::QuasiContractive,
        ConditionClass::OsilikeUdomene,
        ConditionClass::ContractiveLike,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConditionClass::Zamfirescu => "zamfirescu",
            ConditionClass::QuasiContractive => "quasi_contractive",
            ConditionClass::OsilikeUdomene => "osilike_udomene",
            ConditionClass::ContractiveLike => "contractive_like",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZamfirescuConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl ZamfirescuConstants {
    pub fn validate(&self) -> Result<()> {
        let ZamfirescuConstants { a, b, c } = *self;
        if !(0.0 < a && a < 1.0) {
            return Err(Error::InvalidConstants(format!("a = {a} is outside (0, 1)")));
        }
        for (name, v) in [("b", b), ("c", c)] {
            if !(0.0 < v && v < 0.5) {
                return Err(Error::InvalidConstants(format!(
                    "{name} = {v} is outside (0, 1/2)"
                )));
            }
        }
        Ok(())
    }

    /// `δ = max{a, b/(1−b), c/(1−c)}`.
    pub fn delta(&self) -> Result<f64> {
        delta_from_zamfirescu(self.a, self.b, self.c)
    }
}

/// `max{a, b/(1−b), c/(1−c)}`, always in `[0, 1)` on the valid parameter box.
pub fn delta_from_zamfirescu(a: f64, b: f64, c: f64) -> Result<f64> {
    ZamfirescuConstants { a, b, c }.validate()?;
    Ok(a.max(b / (1.0 - b)).max(c / (1.0 - c)))
}

fn check_delta(delta: f64) -> Result<()> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidConstants(format!("δ = {delta} is outside [0, 1)")));
    }
    Ok(())
}

/// Constants a certificate was issued for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum CertificateConstants {
    Zamfirescu { a: f64, b: f64, c: f64 },
    QuasiContractive { delta: f64 },
    OsilikeUdomene { delta: f64, lipschitz: f64 },
    ContractiveLike { delta: f64, gauge: GaugeFunction },
}

impl CertificateConstants {
    pub fn class(&self) -> ConditionClass {
        match self {
            CertificateConstants::Zamfirescu { .. } => ConditionClass::Zamfirescu,
            CertificateConstants::QuasiContractive { .. } => ConditionClass::QuasiContractive,
            CertificateConstants::OsilikeUdomene { .. } => ConditionClass::OsilikeUdomene,
            CertificateConstants::ContractiveLike { .. } => ConditionClass::ContractiveLike,
        }
    }

    pub fn delta(&self) -> Result<f64> {
        match self {
            CertificateConstants::Zamfirescu { a, b, c } => delta_from_zamfirescu(*a, *b, *c),
            CertificateConstants::QuasiContractive { delta }
            | CertificateConstants::OsilikeUdomene { delta, .. }
            | CertificateConstants::ContractiveLike { delta, .. } => Ok(*delta),
        }
    }
}

/// No violation found on `sample_count` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractiveCertificate {
    pub condition_class: ConditionClass,
    pub constants: CertificateConstants,
    pub sample_count: usize,
    /// Tightest margin `rhs − lhs` observed over the samples; may dip to
    /// `−1e−12` from rounding.
    pub min_slack: f64,
    /// Quasi-contractive only: whether the alternative `(b2)` form
    /// `‖Tx−Ty‖ ≤ δ‖x−y‖ + 2δ‖x−Ty‖` also held on every pair. Informational.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b2_holds: Option<bool>,
}

/// First pair on which a condition fails, with `lhs − rhs` for each
/// alternative of the condition (all positive beyond tolerance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub condition_class: ConditionClass,
    pub constants: CertificateConstants,
    pub pair_index: usize,
    pub x: Point,
    pub y: Point,
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum CertificateOrViolation {
    Certificate(ContractiveCertificate),
    Violation(Violation),
}

impl CertificateOrViolation {
    pub fn is_certificate(&self) -> bool {
        matches!(self, CertificateOrViolation::Certificate(_))
    }

    pub fn certificate(&self) -> Option<&ContractiveCertificate> {
        match self {
            CertificateOrViolation::Certificate(c) => Some(c),
            CertificateOrViolation::Violation(_) => None,
        }
    }

    pub fn violation(&self) -> Option<&Violation> {
        match self {
            CertificateOrViolation::Violation(v) => Some(v),
            CertificateOrViolation::Certificate(_) => None,
        }
    }
}

/// Norms that every condition needs for one ordered pair.
struct PairTerms {
    tx_ty: f64,
    x_y: f64,
    x_tx: f64,
    y_ty: f64,
    x_ty: f64,
    y_tx: f64,
}

fn pair_terms(map: &MappingSpec, norm: &Norm, x: &[f64], y: &[f64]) -> Result<PairTerms> {
    let tx = map.evaluate(x)?;
    let ty = map.evaluate(y)?;
    Ok(PairTerms {
        tx_ty: norm.dist(&tx, &ty),
        x_y: norm.dist(x, y),
        x_tx: norm.dist(x, &tx),
        y_ty: norm.dist(y, &ty),
        x_ty: norm.dist(x, &ty),
        y_tx: norm.dist(y, &tx),
    })
}

/// Runs `residuals` on every pair; a pair passes when at least one residual
/// (`lhs − rhs`) is `≤ CONDITION_TOL`. Every sample is mapped before any pair
/// is judged, so a map that leaves `E` is an error rather than a violation.
fn certify<F>(
    map: &MappingSpec,
    norm: &Norm,
    samples: &SampleSet,
    constants: CertificateConstants,
    residuals: F,
) -> Result<CertificateOrViolation>
where
    F: Fn(&PairTerms) -> Vec<f64>,
{
    norm.validate()?;
    let terms = samples
        .pairs
        .iter()
        .map(|(x, y)| pair_terms(map, norm, x, y))
        .collect::<Result<Vec<_>>>()?;
    let mut min_slack = f64::INFINITY;
    for (i, ((x, y), terms)) in samples.pairs.iter().zip(&terms).enumerate() {
        let r = residuals(terms);
        let best = r.iter().copied().fold(f64::INFINITY, f64::min);
        if !(best <= CONDITION_TOL) {
            return Ok(CertificateOrViolation::Violation(Violation {
                condition_class: constants.class(),
                constants,
                pair_index: i,
                x: x.clone(),
                y: y.clone(),
                residuals: r,
            }));
        }
        min_slack = min_slack.min(-best);
    }
    Ok(CertificateOrViolation::Certificate(ContractiveCertificate {
        condition_class: constants.class(),
        constants,
        sample_count: samples.len(),
        min_slack: if samples.is_empty() { 0.0 } else { min_slack },
        b2_holds: None,
    }))
}

pub fn check_zamfirescu(
    map: &MappingSpec,
    norm: &Norm,
    constants: ZamfirescuConstants,
    samples: &SampleSet,
) -> Result<CertificateOrViolation> {
    constants.validate()?;
    let ZamfirescuConstants { a, b, c } = constants;
    certify(
        map,
        norm,
        samples,
        CertificateConstants::Zamfirescu { a, b, c },
        |t| {
            vec![
                t.tx_ty - a * t.x_y,
                t.tx_ty - b * (t.x_tx + t.y_ty),
                t.tx_ty - c * (t.x_ty + t.y_tx),
            ]
        },
    )
}

/// Certifies `(b1)`; `(b2)` is evaluated on the same pairs and reported as
/// `b2_holds` without affecting the verdict.
pub fn check_quasi_contractive(
    map: &MappingSpec,
    norm: &Norm,
    delta: f64,
    samples: &SampleSet,
) -> Result<CertificateOrViolation> {
    check_delta(delta)?;
    let verdict = certify(
        map,
        norm,
        samples,
        CertificateConstants::QuasiContractive { delta },
        |t| vec![t.tx_ty - delta * t.x_y - 2.0 * delta * t.x_tx],
    )?;
    match verdict {
        CertificateOrViolation::Certificate(mut cert) => {
            let mut b2 = true;
            for (x, y) in &samples.pairs {
                let t = pair_terms(map, norm, x, y)?;
                if t.tx_ty - delta * t.x_y - 2.0 * delta * t.x_ty > CONDITION_TOL {
                    b2 = false;
                    break;
                }
            }
            cert.b2_holds = Some(b2);
            Ok(CertificateOrViolation::Certificate(cert))
        }
        v => Ok(v),
    }
}

pub fn check_osilike_udomene(
    map: &MappingSpec,
    norm: &Norm,
    delta: f64,
    lipschitz: f64,
    samples: &SampleSet,
) -> Result<CertificateOrViolation> {
    check_delta(delta)?;
    if !(lipschitz.is_finite() && lipschitz >= 0.0) {
        return Err(Error::InvalidConstants(format!("L = {lipschitz} must be >= 0")));
    }
    certify(
        map,
        norm,
        samples,
        CertificateConstants::OsilikeUdomene { delta, lipschitz },
        |t| vec![t.tx_ty - delta * t.x_y - lipschitz * t.x_tx],
    )
}

pub fn check_contractive_like(
    map: &MappingSpec,
    norm: &Norm,
    delta: f64,
    gauge: &GaugeFunction,
    samples: &SampleSet,
) -> Result<CertificateOrViolation> {
    check_delta(delta)?;
    gauge.validate()?;
    certify(
        map,
        norm,
        samples,
        CertificateConstants::ContractiveLike {
            delta,
            gauge: gauge.clone(),
        },
        |t| vec![t.tx_ty - delta * t.x_y - gauge.eval(t.x_tx)],
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum UniquenessVerdict {
    Unique {
        point: Point,
    },
    NoFixedPoint,
    /// Two distinct fixed points under a valid contractive-like certificate;
    /// a contractive-like map has at most one.
    ContradictsUniqueness {
        first: Point,
        second: Point,
    },
}

/// Scans `candidates` for points with `‖Tp − p‖ ≤ tol`. Candidates closer than
/// `1e−8` to an accepted one count as the same point.
pub fn verify_unique_fixed_point(
    map: &MappingSpec,
    norm: &Norm,
    certificate: &ContractiveCertificate,
    candidates: &[Point],
    tol: f64,
) -> Result<UniquenessVerdict> {
    if certificate.condition_class != ConditionClass::ContractiveLike {
        return Err(Error::WrongCertificate {
            expected: ConditionClass::ContractiveLike.name().into(),
            actual: certificate.condition_class.name().into(),
        });
    }
    let mut found: Option<Point> = None;
    for p in candidates {
        if map.residual(norm, p)? > tol {
            continue;
        }
        match &found {
            None => found = Some(p.clone()),
            Some(q) if norm.dist(p, q) > DISTINCT_POINT_TOL => {
                return Ok(UniquenessVerdict::ContradictsUniqueness {
                    first: q.clone(),
                    second: p.clone(),
                });
            }
            Some(_) => {}
        }
    }
    Ok(match found {
        Some(point) => UniquenessVerdict::Unique { point },
        None => UniquenessVerdict::NoFixedPoint,
    })
}
