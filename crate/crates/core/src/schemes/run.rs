use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mapping::MappingSpec;
use crate::norm::Norm;
use crate::report::fmt_f64;

use super::step::step_scheme;
use super::SchemeConfig;

/// When to stop iterating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stopping {
    /// Stop once `‖xₙ − Txₙ‖ ≤ tol`.
    pub tol: f64,
    pub max_iters: usize,
    /// Stop once `‖xₙ‖ > divergence_bound`.
    pub divergence_bound: f64,
}

impl Default for Stopping {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 10_000,
            divergence_bound: 1e12,
        }
    }
}

impl Stopping {
    pub fn new(tol: f64, max_iters: usize) -> Self {
        Self {
            tol,
            max_iters,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOptions {
    pub norm: Norm,
    /// Keep the auxiliary points of every step, not just the last one.
    pub record_intermediates: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Tolerance,
    MaxIters,
    DivergenceGuard,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::Tolerance => "tolerance",
            StopReason::MaxIters => "max_iters",
            StopReason::DivergenceGuard => "divergence_guard",
        }
    }
}

/// Iterates `x₀ … x_N` of one scheme with per-iterate diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub scheme: SchemeConfig,
    pub norm: Norm,
    pub iterates: Vec<Point>,
    /// `‖xₙ − Txₙ‖`.
    pub residuals: Vec<f64>,
    /// `‖xₙ − p‖`, when the map declares its fixed point.
    pub fp_distances: Option<Vec<f64>>,
    pub stop_reason: StopReason,
    /// Auxiliary points of the last step taken (empty if none was).
    pub last_intermediates: Vec<Point>,
    /// Auxiliary points of every step, when recorded; entry `n` belongs to
    /// the step `xₙ → xₙ₊₁`.
    pub intermediates: Option<Vec<Vec<Point>>>,
}

impl Trajectory {
    /// Index of the last iterate.
    pub fn last_index(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn last(&self) -> &Point {
        self.iterates.last().expect("a trajectory holds at least x0")
    }

    /// `residuals` and `fp_distances` as CSV with columns
    /// `n, x[0], …, x[d−1], residual, fp_distance`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let d = self.iterates[0].len();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["n".to_string()];
        header.extend((0..d).map(|i| format!("x{i}")));
        header.push("residual".into());
        header.push("fp_distance".into());
        w.write_record(&header)?;
        for (n, x) in self.iterates.iter().enumerate() {
            let mut row = vec![n.to_string()];
            row.extend(x.iter().map(|v| fmt_f64(*v)));
            row.push(fmt_f64(self.residuals[n]));
            row.push(
                self.fp_distances
                    .as_ref()
                    .map(|d| fmt_f64(d[n]))
                    .unwrap_or_default(),
            );
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs `config` from `x0` under the Euclidean norm.
pub fn run(map: &MappingSpec, config: &SchemeConfig, x0: &[f64], stopping: &Stopping) -> Result<Trajectory> {
    run_with(map, config, x0, stopping, &RunOptions::default())
}

/// Iterates until `‖xₙ − Txₙ‖ ≤ tol`, `n = max_iters` or `‖xₙ‖ >
/// divergence_bound`, whichever comes first.
pub fn run_with(
    map: &MappingSpec,
    config: &SchemeConfig,
    x0: &[f64],
    stopping: &Stopping,
    options: &RunOptions,
) -> Result<Trajectory> {
    config.validate()?;
    options.norm.validate()?;
    let norm = &options.norm;
    let p = map.known_fixed_point.as_deref();

    let mut traj = Trajectory {
        scheme: config.clone(),
        norm: norm.clone(),
        iterates: Vec::new(),
        residuals: Vec::new(),
        fp_distances: p.map(|_| Vec::new()),
        stop_reason: StopReason::MaxIters,
        last_intermediates: Vec::new(),
        intermediates: options.record_intermediates.then(Vec::new),
    };

    let mut x = x0.to_vec();
    for n in 0.. {
        let residual = map.residual(norm, &x)?;
        traj.residuals.push(residual);
        if let (Some(p), Some(d)) = (p, traj.fp_distances.as_mut()) {
            d.push(norm.dist(&x, p));
        }
        let size = norm.norm(&x);
        traj.iterates.push(x);

        if residual <= stopping.tol {
            traj.stop_reason = StopReason::Tolerance;
            break;
        }
        if size > stopping.divergence_bound {
            traj.stop_reason = StopReason::DivergenceGuard;
            break;
        }
        if n >= stopping.max_iters {
            traj.stop_reason = StopReason::MaxIters;
            break;
        }

        let step = step_scheme(map, config, n, traj.last())?;
        if !step.next.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteValue {
                label: map.label.clone(),
                point: step.next,
            });
        }
        x = step.next;
        if let Some(all) = traj.intermediates.as_mut() {
            all.push(step.intermediates.clone());
        }
        traj.last_intermediates = step.intermediates;
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoxDomain;
    use crate::schemes::ParameterSchedule;

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
    fn picard_geometric() {
        let t = run(
            &half(),
            &SchemeConfig::picard(),
            &[1.0],
            &Stopping::new(1e-10, 10_000),
        )
        .unwrap();
        // oracle: x_n = 2^-n, residual 2^-(n+1); first residual <= 1e-10 at n = 33
        for (n, x) in t.iterates.iter().enumerate() {
            assert_eq!(x[0], 2f64.powi(-(n as i32)));
        }
        assert_eq!(t.last_index(), 33);
        assert_eq!(t.residuals[33], 2f64.powi(-34));
        assert!(t.residuals[32] > 1e-10);
        assert_eq!(t.stop_reason, StopReason::Tolerance);
        assert_eq!(t.fp_distances.as_ref().unwrap()[33], 2f64.powi(-33));
    }

    #[test]
    fn mann_closed_form() {
        let cfg = SchemeConfig::mann(ParameterSchedule::constant(0.5));
        let t = run(&half(), &cfg, &[1.0], &Stopping::new(0.0, 3)).unwrap();
        assert_eq!(t.iterates.len(), 4);
        assert_eq!(t.iterates[3], vec![27.0 / 64.0]);
        assert_eq!(t.stop_reason, StopReason::MaxIters);
    }

    #[test]
    fn start_at_fixed_point() {
        let cfg = SchemeConfig::sp(
            ParameterSchedule::constant(0.5),
            ParameterSchedule::constant(0.5),
            ParameterSchedule::constant(0.5),
        );
        let t = run(&half(), &cfg, &[0.0], &Stopping::default()).unwrap();
        assert_eq!(t.iterates, vec![vec![0.0]]);
        assert_eq!(t.residuals, vec![0.0]);
        assert_eq!(t.stop_reason, StopReason::Tolerance);
    }

    #[test]
    fn divergence_guard_trips() {
        let t = MappingSpec::new(
            "grow",
            BoxDomain::cube(1, 0.0, 1e15).unwrap(),
            crate::mapping::MapKind::custom(|x| vec![10.0 * x[0]]),
            None,
        )
        .unwrap();
        let traj = run(&t, &SchemeConfig::picard(), &[1.0], &Stopping::default()).unwrap();
        assert_eq!(traj.stop_reason, StopReason::DivergenceGuard);
        assert_eq!(traj.last()[0], 1e13);
    }

    #[test]
    fn non_finite_is_an_error() {
        let t = MappingSpec::new(
            "nan",
            BoxDomain::cube(1, 0.0, 1.0).unwrap(),
            crate::mapping::MapKind::custom(|x| if x[0] < 0.5 { vec![f64::NAN] } else { vec![0.25] }),
            None,
        )
        .unwrap();
        let r = run(&t, &SchemeConfig::picard(), &[1.0], &Stopping::default());
        assert!(matches!(r, Err(Error::NonFiniteValue { .. })));
    }

    #[test]
    fn x0_outside_domain_is_an_error() {
        let r = run(&half(), &SchemeConfig::picard(), &[2.0], &Stopping::default());
        assert!(matches!(r, Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn intermediates_only_kept_on_request() {
        let cfg = SchemeConfig::noor(
            ParameterSchedule::constant(0.5),
            ParameterSchedule::constant(0.5),
            ParameterSchedule::constant(0.5),
        );
        let plain = run(&half(), &cfg, &[1.0], &Stopping::new(0.0, 5)).unwrap();
        assert!(plain.intermediates.is_none());
        assert_eq!(plain.last_intermediates.len(), 2);
        let opts = RunOptions {
            record_intermediates: true,
            ..RunOptions::default()
        };
        let full = run_with(&half(), &cfg, &[1.0], &Stopping::new(0.0, 5), &opts).unwrap();
        assert_eq!(full.intermediates.as_ref().unwrap().len(), 5);
        assert_eq!(full.iterates, plain.iterates);
    }

    #[test]
    fn csv_layout() {
        let t = run(&half(), &SchemeConfig::picard(), &[1.0], &Stopping::new(0.0, 1)).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n,x0,residual,fp_distance");
        assert_eq!(
            lines[1],
            "0,1.0000000000000000e0,5.0000000000000000e-1,1.0000000000000000e0"
        );
        assert_eq!(lines.len(), 3);
    }
}
