use crate::error::Result;
use crate::geometry::{lerp, Point};
use crate::mapping::MappingSpec;

use super::{Family, SchemeConfig};

/// One step: the next iterate and the auxiliary points built on the way.
///
/// `intermediates[i]` is `yⁱ⁺¹` (so `intermediates[0]` is `y¹`). The
/// S-iteration has the single entry `y`; Picard, Krasnoselskij and Mann report
/// `y¹ = xₙ`, as their multistep expansion does.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub next: Point,
    pub intermediates: Vec<Point>,
}

/// Multistep step. `betas[i]` is `βⁱ⁺¹`, `k = betas.len() + 1`.
pub fn step_multistep_1_5(map: &MappingSpec, x: &[f64], alpha: f64, betas: &[f64]) -> Result<StepOutput> {
    assert!(!betas.is_empty(), "multistep needs k >= 2");
    let k = betas.len() + 1;
    let tx = map.evaluate(x)?;
    let mut levels = vec![Vec::new(); k - 1];
    levels[k - 2] = lerp(x, &tx, betas[k - 2]);
    for i in (0..k - 2).rev() {
        let t_next = map.evaluate(&levels[i + 1])?;
        levels[i] = lerp(x, &t_next, betas[i]);
    }
    let t_y1 = map.evaluate(&levels[0])?;
    Ok(StepOutput {
        next: lerp(x, &t_y1, alpha),
        intermediates: levels,
    })
}

/// New multistep step. `betas[i]` is `βⁱ⁺¹`, `k = betas.len() + 1`.
pub fn step_new_multistep_1_6(map: &MappingSpec, x: &[f64], alpha: f64, betas: &[f64]) -> Result<StepOutput> {
    assert!(!betas.is_empty(), "new multistep needs k >= 2");
    let k = betas.len() + 1;
    let tx = map.evaluate(x)?;
    let mut levels = vec![Vec::new(); k - 1];
    levels[k - 2] = lerp(x, &tx, betas[k - 2]);
    for i in (0..k - 2).rev() {
        let t_next = map.evaluate(&levels[i + 1])?;
        levels[i] = lerp(&levels[i + 1], &t_next, betas[i]);
    }
    let t_y1 = map.evaluate(&levels[0])?;
    Ok(StepOutput {
        next: lerp(&levels[0], &t_y1, alpha),
        intermediates: levels,
    })
}

pub fn step_s_iteration(map: &MappingSpec, x: &[f64], alpha: f64, beta: f64) -> Result<StepOutput> {
    let tx = map.evaluate(x)?;
    let y = lerp(x, &tx, beta);
    let ty = map.evaluate(&y)?;
    Ok(StepOutput {
        next: lerp(&tx, &ty, alpha),
        intermediates: vec![y],
    })
}

fn step_picard(map: &MappingSpec, x: &[f64]) -> Result<StepOutput> {
    Ok(StepOutput {
        next: map.evaluate(x)?,
        intermediates: vec![x.to_vec()],
    })
}

fn step_mann(map: &MappingSpec, x: &[f64], alpha: f64) -> Result<StepOutput> {
    let tx = map.evaluate(x)?;
    Ok(StepOutput {
        next: lerp(x, &tx, alpha),
        intermediates: vec![x.to_vec()],
    })
}

fn step_ishikawa(map: &MappingSpec, x: &[f64], alpha: f64, beta: f64) -> Result<StepOutput> {
    let tx = map.evaluate(x)?;
    let y = lerp(x, &tx, beta);
    let ty = map.evaluate(&y)?;
    Ok(StepOutput {
        next: lerp(x, &ty, alpha),
        intermediates: vec![y],
    })
}

fn step_noor(map: &MappingSpec, x: &[f64], alpha: f64, beta1: f64, beta2: f64) -> Result<StepOutput> {
    let tx = map.evaluate(x)?;
    let z = lerp(x, &tx, beta2);
    let tz = map.evaluate(&z)?;
    let y = lerp(x, &tz, beta1);
    let ty = map.evaluate(&y)?;
    Ok(StepOutput {
        next: lerp(x, &ty, alpha),
        intermediates: vec![y, z],
    })
}

fn step_new_two_step(map: &MappingSpec, x: &[f64], alpha: f64, beta: f64) -> Result<StepOutput> {
    let tx = map.evaluate(x)?;
    let y = lerp(x, &tx, beta);
    let ty = map.evaluate(&y)?;
    Ok(StepOutput {
        next: lerp(&y, &ty, alpha),
        intermediates: vec![y],
    })
}

fn step_sp(map: &MappingSpec, x: &[f64], alpha: f64, beta1: f64, beta2: f64) -> Result<StepOutput> {
    let tx = map.evaluate(x)?;
    let z = lerp(x, &tx, beta2);
    let tz = map.evaluate(&z)?;
    let y = lerp(&z, &tz, beta1);
    let ty = map.evaluate(&y)?;
    Ok(StepOutput {
        next: lerp(&y, &ty, alpha),
        intermediates: vec![y, z],
    })
}

/// Step `n` of `config` from `x`. Named reductions use their own textbook
/// formulas rather than the multistep engine; the two agree bit for bit.
pub fn step_scheme(map: &MappingSpec, config: &SchemeConfig, n: usize, x: &[f64]) -> Result<StepOutput> {
    let alpha = config.alpha.value(n);
    let betas: Vec<f64> = config.betas.iter().map(|b| b.value(n)).collect();
    match config.family {
        Family::Multistep => step_multistep_1_5(map, x, alpha, &betas),
        Family::NewMultistep => step_new_multistep_1_6(map, x, alpha, &betas),
        Family::SIteration => step_s_iteration(map, x, alpha, betas[0]),
        Family::Picard => step_picard(map, x),
        Family::Krasnoselskij | Family::Mann => step_mann(map, x, alpha),
        Family::Ishikawa => step_ishikawa(map, x, alpha, betas[0]),
        Family::Noor => step_noor(map, x, alpha, betas[0], betas[1]),
        Family::NewTwoStep => step_new_two_step(map, x, alpha, betas[0]),
        Family::Sp => step_sp(map, x, alpha, betas[0], betas[1]),
    }
}
