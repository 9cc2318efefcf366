//! Iteration schemes.
//!
//! Three stepping rules cover all ten schemes:
//!
//! * multistep: `y^{k−1} = (1−β^{k−1})x + β^{k−1}Tx`,
//!   `yⁱ = (1−βⁱ)x + βⁱTyⁱ⁺¹`, `x' = (1−α)x + αTy¹`;
//! * new multistep: as above but `yⁱ = (1−βⁱ)yⁱ⁺¹ + βⁱTyⁱ⁺¹` and
//!   `x' = (1−α)y¹ + αTy¹`;
//! * S-iteration: `y = (1−β)x + βTx`, `x' = (1−α)Tx + αTy`.
//!
//! Noor and Ishikawa are multistep with `k = 3` and `k = 2`; SP and the new
//! two-step scheme are new multistep with `k = 3` and `k = 2`; Mann is
//! multistep with `k = 2`, `β ≡ 0`; Krasnoselskij is Mann with constant `α`;
//! Picard is Krasnoselskij with `α ≡ 1`.

mod run;
mod schedule;
mod step;

pub use run::{run, run_with, RunOptions, StopReason, Stopping, Trajectory};
pub use schedule::{ParameterSchedule, ScheduleKind};
pub use step::{step_multistep_1_5, step_new_multistep_1_6, step_s_iteration, step_scheme, StepOutput};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "multistep_1_5")]
    Multistep,
    #[serde(rename = "new_multistep_1_6")]
    NewMultistep,
    #[serde(rename = "s_iteration_1_7")]
    SIteration,
    #[serde(rename = "picard")]
    Picard,
    #[serde(rename = "krasnoselskij")]
    Krasnoselskij,
    #[serde(rename = "mann")]
    Mann,
    #[serde(rename = "ishikawa")]
    Ishikawa,
    #[serde(rename = "new_two_step")]
    NewTwoStep,
    #[serde(rename = "noor")]
    Noor,
    #[serde(rename = "sp")]
    Sp,
}

impl Family {
    /// All ten schemes, in the order reports list them.
    pub const ALL: [Family; 10] = [
        Family::Picard,
        Family::Krasnoselskij,
        Family::Mann,
        Family::Ishikawa,
        Family::NewTwoStep,
        Family::Noor,
        Family::Sp,
        Family::Multistep,
        Family::NewMultistep,
        Family::SIteration,
    ];

    /// Named special cases of the two multistep families.
    pub const REDUCTIONS: [Family; 7] = [
        Family::Noor,
        Family::Ishikawa,
        Family::Sp,
        Family::NewTwoStep,
        Family::Mann,
        Family::Krasnoselskij,
        Family::Picard,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Multistep => "multistep_1_5",
            Family::NewMultistep => "new_multistep_1_6",
            Family::SIteration => "s_iteration_1_7",
            Family::Picard => "picard",
            Family::Krasnoselskij => "krasnoselskij",
            Family::Mann => "mann",
            Family::Ishikawa => "ishikawa",
            Family::NewTwoStep => "new_two_step",
            Family::Noor => "noor",
            Family::Sp => "sp",
        }
    }

    pub fn is_reduction(self) -> bool {
        Family::REDUCTIONS.contains(&self)
    }

    /// Number of β schedules the family takes, given `k` for the multistep
    /// families.
    pub fn beta_count(self, k: usize) -> usize {
        match self {
            Family::Multistep | Family::NewMultistep => k.saturating_sub(1),
            Family::SIteration | Family::Ishikawa | Family::NewTwoStep => 1,
            Family::Noor | Family::Sp => 2,
            Family::Picard | Family::Krasnoselskij | Family::Mann => 0,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace('-', "_");
        let family = match s.as_str() {
            "multistep_1_5" | "multistep" => Family::Multistep,
            "new_multistep_1_6" | "new_multistep" => Family::NewMultistep,
            "s_iteration_1_7" | "s_iteration" | "s" => Family::SIteration,
            "picard" => Family::Picard,
            "krasnoselskij" => Family::Krasnoselskij,
            "mann" => Family::Mann,
            "ishikawa" => Family::Ishikawa,
            "new_two_step" => Family::NewTwoStep,
            "noor" => Family::Noor,
            "sp" => Family::Sp,
            _ => return Err(Error::UnknownFamily(s)),
        };
        Ok(family)
    }
}

/// Scheme identifier with its parameter schedules.
///
/// `betas[i]` is `βⁱ⁺¹`, so `betas[0]` drives `y¹` and the last entry drives
/// the level built directly from `xₙ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub alpha: ParameterSchedule,
    #[serde(default)]
    pub betas: Vec<ParameterSchedule>,
}

impl SchemeConfig {
    pub fn picard() -> Self {
        Self {
            family: Family::Picard,
            k: None,
            alpha: ParameterSchedule::constant(1.0),
            betas: Vec::new(),
        }
    }

    pub fn krasnoselskij(lambda: f64) -> Self {
        Self {
            family: Family::Krasnoselskij,
            k: None,
            alpha: ParameterSchedule::constant(lambda),
            betas: Vec::new(),
        }
    }

    pub fn mann(alpha: ParameterSchedule) -> Self {
        Self {
            family: Family::Mann,
            k: None,
            alpha,
            betas: Vec::new(),
        }
    }

    pub fn ishikawa(alpha: ParameterSchedule, beta: ParameterSchedule) -> Self {
        Self::named(Family::Ishikawa, alpha, vec![beta])
    }

    pub fn new_two_step(alpha: ParameterSchedule, beta: ParameterSchedule) -> Self {
        Self::named(Family::NewTwoStep, alpha, vec![beta])
    }

    pub fn noor(alpha: ParameterSchedule, beta1: ParameterSchedule, beta2: ParameterSchedule) -> Self {
        Self::named(Family::Noor, alpha, vec![beta1, beta2])
    }

    pub fn sp(alpha: ParameterSchedule, beta1: ParameterSchedule, beta2: ParameterSchedule) -> Self {
        Self::named(Family::Sp, alpha, vec![beta1, beta2])
    }

    pub fn s_iteration(alpha: ParameterSchedule, beta: ParameterSchedule) -> Self {
        Self::named(Family::SIteration, alpha, vec![beta])
    }

    pub fn multistep(alpha: ParameterSchedule, betas: Vec<ParameterSchedule>) -> Self {
        Self {
            family: Family::Multistep,
            k: Some(betas.len() + 1),
            alpha,
            betas,
        }
    }

    pub fn new_multistep(alpha: ParameterSchedule, betas: Vec<ParameterSchedule>) -> Self {
        Self {
            family: Family::NewMultistep,
            k: Some(betas.len() + 1),
            alpha,
            betas,
        }
    }

    fn named(family: Family, alpha: ParameterSchedule, betas: Vec<ParameterSchedule>) -> Self {
        Self {
            family,
            k: None,
            alpha,
            betas,
        }
    }

    /// Configures `family` from shared schedules: `alpha` for every scheme
    /// (Picard keeps `α ≡ 1`, Krasnoselskij needs `alpha` constant) and the
    /// first β schedules of `beta_pool`, repeating its last entry if the
    /// family needs more. `k` applies to the multistep families.
    pub fn for_family(
        family: Family,
        k: usize,
        alpha: &ParameterSchedule,
        beta_pool: &[ParameterSchedule],
    ) -> Result<Self> {
        let needed = family.beta_count(k);
        if needed > 0 && beta_pool.is_empty() {
            return Err(Error::InvalidScheme(format!(
                "{family} needs {needed} beta schedule(s)"
            )));
        }
        let betas: Vec<ParameterSchedule> = (0..needed)
            .map(|i| beta_pool[i.min(beta_pool.len() - 1)].clone())
            .collect();
        let config = match family {
            Family::Picard => {
                let mut c = Self::picard();
                c.alpha.floor = alpha.floor;
                c
            }
            Family::Krasnoselskij => match alpha.kind {
                ScheduleKind::Constant { .. } => Self::named(family, alpha.clone(), betas),
                _ => {
                    return Err(Error::InvalidScheme(
                        "krasnoselskij needs a constant alpha".into(),
                    ))
                }
            },
            Family::Multistep | Family::NewMultistep => Self {
                family,
                k: Some(k),
                alpha: alpha.clone(),
                betas,
            },
            _ => Self::named(family, alpha.clone(), betas),
        };
        config.validate()?;
        Ok(config)
    }

    /// Number of levels: `k` for the multistep families, the `k` of the
    /// expansion for the named reductions, 2 for the S-iteration.
    pub fn levels(&self) -> usize {
        match self.family {
            Family::Multistep | Family::NewMultistep => self.k.unwrap_or(self.betas.len() + 1),
            Family::Noor | Family::Sp => 3,
            _ => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.alpha.validate()?;
        for b in &self.betas {
            b.validate()?;
        }
        let k = self.levels();
        if matches!(self.family, Family::Multistep | Family::NewMultistep) && k < 2 {
            return Err(Error::InvalidScheme(format!("k = {k} must be >= 2")));
        }
        let needed = self.family.beta_count(k);
        if self.betas.len() != needed {
            return Err(Error::InvalidScheme(format!(
                "{} with k = {k} needs {needed} beta schedule(s), got {}",
                self.family,
                self.betas.len()
            )));
        }
        match self.family {
            Family::Krasnoselskij if !self.alpha.is_constant() => Err(Error::InvalidScheme(
                "krasnoselskij needs a constant alpha".into(),
            )),
            Family::Picard if self.alpha.kind != (ScheduleKind::Constant { value: 1.0 }) => {
                Err(Error::InvalidScheme("picard has alpha ≡ 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Label for reports, e.g. `noor` or `new_multistep_1_6_k4`.
    pub fn label(&self) -> String {
        match self.family {
            Family::Multistep | Family::NewMultistep => format!("{}_k{}", self.family, self.levels()),
            f => f.name().to_string(),
        }
    }
}

/// The multistep configuration a named reduction stands for: Noor and
/// Ishikawa are multistep with `k = 3, 2`; SP and new two-step are new
/// multistep with `k = 3, 2`; Mann is multistep `k = 2`, `β¹ ≡ 0`;
/// Krasnoselskij is Mann with constant `α ≡ λ`; Picard is `λ = 1`.
pub fn expand_reduction(config: &SchemeConfig) -> Result<SchemeConfig> {
    if !config.family.is_reduction() {
        return Err(Error::UnknownFamily(format!(
            "{} is not a named reduction",
            config.family
        )));
    }
    config.validate()?;
    let expanded = match config.family {
        Family::Noor | Family::Ishikawa => SchemeConfig {
            family: Family::Multistep,
            k: Some(config.levels()),
            alpha: config.alpha.clone(),
            betas: config.betas.clone(),
        },
        Family::Sp | Family::NewTwoStep => SchemeConfig {
            family: Family::NewMultistep,
            k: Some(config.levels()),
            alpha: config.alpha.clone(),
            betas: config.betas.clone(),
        },
        Family::Mann | Family::Krasnoselskij | Family::Picard => SchemeConfig {
            family: Family::Multistep,
            k: Some(2),
            alpha: config.alpha.clone(),
            betas: vec![ParameterSchedule::zero()],
        },
        _ => unreachable!("checked by is_reduction"),
    };
    Ok(expanded)
}

/// Like [`expand_reduction`], but returns the base families unchanged.
pub fn canonical(config: &SchemeConfig) -> Result<SchemeConfig> {
    if config.family.is_reduction() {
        expand_reduction(config)
    } else {
        config.validate()?;
        Ok(config.clone())
    }
}
