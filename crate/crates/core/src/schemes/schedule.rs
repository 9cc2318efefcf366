use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleKind {
    /// `λ` for every n.
    Constant { value: f64 },
    /// `1/(n + c)`, `c ≥ 1`.
    Harmonic { c: f64 },
    /// Explicit values; the last one repeats forever.
    List { list: Vec<f64> },
}

/// A parameter sequence `αₙ` or `βₙⁱ` with values in `[0, 1]`.
///
/// `floor` is an asserted lower bound `A`; the equivalence audits rely on
/// `αₙ ≥ A > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSchedule {
    #[serde(flatten)]
    pub kind: ScheduleKind,
    #[serde(default)]
    pub floor: f64,
}

impl ParameterSchedule {
    /// Constant schedule whose floor is the constant itself.
    pub fn constant(value: f64) -> Self {
        Self {
            kind: ScheduleKind::Constant { value },
            floor: value,
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn harmonic(c: f64) -> Self {
        Self {
            kind: ScheduleKind::Harmonic { c },
            floor: 0.0,
        }
    }

    pub fn list(list: Vec<f64>) -> Self {
        let floor = list.iter().copied().fold(f64::INFINITY, f64::min);
        Self {
            kind: ScheduleKind::List { list },
            floor: if floor.is_finite() { floor } else { 0.0 },
        }
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    pub fn value(&self, n: usize) -> f64 {
        match &self.kind {
            ScheduleKind::Constant { value } => *value,
            ScheduleKind::Harmonic { c } => 1.0 / (n as f64 + c),
            ScheduleKind::List { list } => list[n.min(list.len() - 1)],
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, ScheduleKind::Constant { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        if !in_unit(self.floor) {
            return Err(Error::InvalidSchedule(format!(
                "floor {} is outside [0, 1]",
                self.floor
            )));
        }
        match &self.kind {
            ScheduleKind::Constant { value } => {
                if !in_unit(*value) {
                    return Err(Error::InvalidSchedule(format!(
                        "constant {value} is outside [0, 1]"
                    )));
                }
                if *value < self.floor {
                    return Err(Error::InvalidSchedule(format!(
                        "constant {value} is below its floor {}",
                        self.floor
                    )));
                }
            }
            ScheduleKind::Harmonic { c } => {
                if !(c.is_finite() && *c >= 1.0) {
                    return Err(Error::InvalidSchedule(format!(
                        "harmonic offset c = {c} must be >= 1"
                    )));
                }
            }
            ScheduleKind::List { list } => {
                if list.is_empty() {
                    return Err(Error::InvalidSchedule("empty list schedule".into()));
                }
                if let Some(v) = list.iter().find(|v| !in_unit(**v)) {
                    return Err(Error::InvalidSchedule(format!(
                        "list value {v} is outside [0, 1]"
                    )));
                }
                if let Some(v) = list.iter().find(|v| **v < self.floor) {
                    return Err(Error::InvalidSchedule(format!(
                        "list value {v} is below its floor {}",
                        self.floor
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn values() {
        assert_eq!(ParameterSchedule::constant(0.5).value(1000), 0.5);
        assert_eq!(ParameterSchedule::harmonic(2.0).value(0), 0.5);
        assert_eq!(ParameterSchedule::harmonic(2.0).value(2), 0.25);
        let l = ParameterSchedule::list(vec![0.9, 0.7, 0.6]);
        assert_eq!(l.value(1), 0.7);
        assert_eq!(l.value(50), 0.6);
        assert_eq!(l.floor, 0.6);
    }

    #[test]
    fn validation() {
        assert!(ParameterSchedule::constant(1.0).validate().is_ok());
        assert!(ParameterSchedule::constant(1.5).validate().is_err());
        assert!(ParameterSchedule::constant(0.3)
            .with_floor(0.5)
            .validate()
            .is_err());
        assert!(ParameterSchedule::harmonic(0.5).validate().is_err());
        // a declared floor on a decaying schedule is only caught when a coupled run reaches it
        assert!(ParameterSchedule::harmonic(1.0)
            .with_floor(0.1)
            .validate()
            .is_ok());
        assert!(ParameterSchedule::list(vec![]).validate().is_err());
        assert!(ParameterSchedule::list(vec![0.5, -0.1]).validate().is_err());
    }

    #[test]
    fn json_shape() {
        let s: ParameterSchedule =
            serde_json::from_str(r#"{"kind":"constant","value":0.5,"floor":0.5}"#).unwrap();
        assert_eq!(s, ParameterSchedule::constant(0.5));
        let h: ParameterSchedule = serde_json::from_str(r#"{"kind":"harmonic","c":2}"#).unwrap();
        assert_eq!(h, ParameterSchedule::harmonic(2.0));
    }

    proptest! {
        #[test]
        fn emitted_values_respect_unit_interval_and_floor(
            list in proptest::collection::vec(0.0f64..=1.0, 1..20),
            c in 1.0f64..50.0,
            n in 0usize..10_000,
        ) {
            for s in [ParameterSchedule::list(list.clone()), ParameterSchedule::harmonic(c)] {
                s.validate().unwrap();
                let v = s.value(n);
                prop_assert!((0.0..=1.0).contains(&v));
                prop_assert!(v >= s.floor);
            }
        }
    }
}
