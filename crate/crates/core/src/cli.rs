//! Command-line front end: `certify`, `run`, `couple` and `suite`.
//!
//! Exit codes: 0 on success, 1 on usage, I/O or configuration errors, 2 when
//! a mathematical check fails (a condition violation, an audit violation, or
//! a suite scheme that misses the common fixed point).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::audit::AuditReport;
use crate::conditions::{
    check_contractive_like, check_osilike_udomene, check_quasi_contractive, check_zamfirescu,
    CertificateOrViolation, SampleSet, ZamfirescuConstants,
};
use crate::convergence::{intermediate_residual_bounds, residual_decay_bound};
use crate::equivalence::{applicable_audits, corollary2_suite, couple_with, AuditInputs, SuiteSchedules};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mapping::{Corpus, MappingSpec, ProposedConstants};
use crate::norm::Norm;
use crate::schemes::{run_with, Family, ParameterSchedule, RunOptions, SchemeConfig, Stopping};

#[derive(Debug, Parser)]
#[command(
    name = "fixpoint-lab",
    version,
    about = "Fixed-point iteration schemes and equivalence audits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the four contractive conditions on a seeded sample of pairs.
    Certify(ExperimentArgs),
    /// Run one scheme and write its trajectory.
    Run(ExperimentArgs),
    /// Run two schemes in lockstep (Mann and the given one, or the two given)
    /// and audit the gap recursions.
    Couple(ExperimentArgs),
    /// Run all ten schemes coupled against Mann.
    Suite(ExperimentArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    /// JSON mapping corpus.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Label of the map in the corpus.
    #[arg(long)]
    pub map: String,
    /// Scheme family; repeat for a coupled pair.
    #[arg(long = "scheme")]
    pub schemes: Vec<String>,
    /// Levels of the multistep families.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// α schedule: a number, `harmonic:C` or `list:a,b,...`.
    #[arg(long, default_value = "0.5")]
    pub alpha: String,
    /// Declared lower bound `A` on α.
    #[arg(long)]
    pub alpha_floor: Option<f64>,
    /// β schedule, repeatable: the i-th drives βⁱ, the last repeats.
    #[arg(long = "beta")]
    pub betas: Vec<String>,
    /// Starting point, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e12)]
    pub divergence_bound: f64,
    /// `euclidean`, `max`, `p:<p>` or `weighted:w1,w2,...`.
    #[arg(long, default_value = "euclidean")]
    pub norm: String,
    /// Seed of the certification sample.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Pairs in the certification sample.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Zamfirescu constants, overriding the corpus.
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    /// δ of the Osilike–Udomene and contractive-like checks and the audits.
    #[arg(long)]
    pub delta: Option<f64>,
    /// `L` of the Osilike–Udomene check and of a linear φ.
    #[arg(long)]
    pub lipschitz: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// Which schemes an experiment runs.
#[derive(Debug, Clone, PartialEq)]
pub enum SchemeSelection {
    None,
    One(SchemeConfig),
    Pair(SchemeConfig, SchemeConfig),
    AllTen(SuiteSchedules),
}

/// A resolved experiment: the map, its constants and everything needed to
/// reproduce the outputs.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub corpus_path: PathBuf,
    pub map: MappingSpec,
    pub constants: ProposedConstants,
    pub schemes: SchemeSelection,
    pub x0: Option<Point>,
    pub stopping: Stopping,
    pub norm: Norm,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub samples: usize,
}

pub fn parse_schedule(text: &str) -> Result<ParameterSchedule> {
    let bad = |e: std::num::ParseFloatError| Error::InvalidSchedule(format!("`{text}`: {e}"));
    let text = text.trim();
    let schedule = if let Some(c) = text.strip_prefix("harmonic:") {
        ParameterSchedule::harmonic(c.trim().parse().map_err(bad)?)
    } else if let Some(list) = text.strip_prefix("list:") {
        ParameterSchedule::list(parse_floats(list).map_err(bad)?)
    } else {
        ParameterSchedule::constant(text.parse().map_err(bad)?)
    };
    schedule.validate()?;
    Ok(schedule)
}

fn parse_floats(text: &str) -> std::result::Result<Vec<f64>, std::num::ParseFloatError> {
    text.split(',').map(|v| v.trim().parse::<f64>()).collect()
}

pub fn parse_norm(text: &str) -> Result<Norm> {
    let bad = |e: std::num::ParseFloatError| Error::InvalidNorm(format!("`{text}`: {e}"));
    let norm = match text.trim() {
        "euclidean" | "l2" => Norm::euclidean(),
        "max" | "inf" => Norm::max(),
        t => {
            if let Some(p) = t.strip_prefix("p:") {
                Norm::P {
                    p: if p == "inf" {
                        f64::INFINITY
                    } else {
                        p.parse().map_err(bad)?
                    },
                }
            } else if let Some(w) = t.strip_prefix("weighted:") {
                Norm::Weighted2 {
                    weights: parse_floats(w).map_err(bad)?,
                }
            } else {
                return Err(Error::InvalidNorm(format!("unknown norm `{t}`")));
            }
        }
    };
    norm.validate()?;
    Ok(norm)
}

impl ExperimentConfig {
    /// Resolves `args` for `command`, which fixes how many schemes it takes.
    pub fn from_args(args: &ExperimentArgs, command: &Command) -> Result<Self> {
        let corpus = Corpus::load(&args.corpus)
            .map_err(|e| Error::Config(format!("loading {}: {e}", args.corpus.display())))?;
        let map = corpus.get(&args.map)?;

        let mut constants = map.constants.clone().unwrap_or_default();
        let z = &mut constants.zamfirescu;
        z.a = args.a.unwrap_or(z.a);
        z.b = args.b.unwrap_or(z.b);
        z.c = args.c.unwrap_or(z.c);
        if let Some(d) = args.delta {
            constants.delta = Some(d);
        }
        if let Some(l) = args.lipschitz {
            constants.lipschitz = Some(l);
            constants.gauge = None;
        }

        let mut alpha = parse_schedule(&args.alpha)?;
        if let Some(floor) = args.alpha_floor {
            alpha = alpha.with_floor(floor);
            alpha.validate()?;
        }
        let betas = if args.betas.is_empty() {
            vec![ParameterSchedule::constant(0.5)]
        } else {
            args.betas
                .iter()
                .map(|b| parse_schedule(b))
                .collect::<Result<Vec<_>>>()?
        };
        let families = args
            .schemes
            .iter()
            .map(|s| s.parse::<Family>())
            .collect::<Result<Vec<_>>>()?;
        let config = |f: Family| SchemeConfig::for_family(f, args.k, &alpha, &betas);
        let schemes = match command {
            Command::Certify(_) => SchemeSelection::None,
            Command::Run(_) => match families.as_slice() {
                [f] => SchemeSelection::One(config(*f)?),
                _ => return Err(Error::Config("run takes exactly one --scheme".into())),
            },
            Command::Couple(_) => match families.as_slice() {
                [f] => SchemeSelection::Pair(config(Family::Mann)?, config(*f)?),
                [f, g] => SchemeSelection::Pair(config(*f)?, config(*g)?),
                _ => return Err(Error::Config("couple takes one or two --scheme".into())),
            },
            Command::Suite(_) => {
                if !families.is_empty() {
                    return Err(Error::Config("suite runs all ten schemes; drop --scheme".into()));
                }
                SchemeSelection::AllTen(SuiteSchedules {
                    k: args.k,
                    alpha: alpha.clone(),
                    betas: betas.clone(),
                })
            }
        };

        let x0 = match &args.x0 {
            Some(text) => {
                let x0 = parse_floats(text).map_err(|e| Error::Config(format!("--x0 `{text}`: {e}")))?;
                if x0.len() != map.dimension() {
                    return Err(Error::DimensionMismatch {
                        expected: map.dimension(),
                        actual: x0.len(),
                    });
                }
                Some(x0)
            }
            None if matches!(schemes, SchemeSelection::None) => None,
            None => return Err(Error::Config("--x0 is required".into())),
        };

        Ok(Self {
            corpus_path: args.corpus.clone(),
            map,
            constants,
            schemes,
            x0,
            stopping: Stopping {
                tol: args.tol,
                max_iters: args.max_iters,
                divergence_bound: args.divergence_bound,
            },
            norm: parse_norm(&args.norm)?,
            output_dir: args.out.clone(),
            seed: args.seed,
            samples: args.samples,
        })
    }

    fn x0(&self) -> &[f64] {
        self.x0.as_deref().expect("checked when the config was built")
    }

    fn audit_inputs(&self) -> Result<AuditInputs> {
        Ok(AuditInputs {
            delta: self.constants.delta()?,
            gauge: self.constants.gauge()?,
        })
    }

    fn output(&self, name: &str) -> Result<BufWriter<File>> {
        std::fs::create_dir_all(&self.output_dir)?;
        let path = self.output_dir.join(name);
        println!("wrote {}", path.display());
        Ok(BufWriter::new(File::create(path)?))
    }
}

/// Whether every mathematical check passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Violation,
}

impl Outcome {
    fn from_pass(pass: bool) -> Self {
        if pass {
            Outcome::Success
        } else {
            Outcome::Violation
        }
    }
}

fn write_json<T: Serialize>(mut out: impl Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct CertificateRecord<'a> {
    map: &'a str,
    seed: u64,
    #[serde(flatten)]
    result: &'a CertificateOrViolation,
}

/// Writes `<map>_<condition>.json` for each of the four conditions.
pub fn cmd_certify(config: &ExperimentConfig) -> Result<Outcome> {
    let map = &config.map;
    let samples = SampleSet::seeded(&map.domain, config.samples, config.seed);
    let z: ZamfirescuConstants = config.constants.zamfirescu;
    let delta = config.constants.delta()?;
    let results = [
        check_zamfirescu(map, &config.norm, z, &samples)?,
        check_quasi_contractive(map, &config.norm, delta, &samples)?,
        check_osilike_udomene(map, &config.norm, delta, config.constants.lipschitz()?, &samples)?,
        check_contractive_like(map, &config.norm, delta, &config.constants.gauge()?, &samples)?,
    ];
    for r in &results {
        let class = match r {
            CertificateOrViolation::Certificate(c) => c.condition_class,
            CertificateOrViolation::Violation(v) => v.condition_class,
        };
        let record = CertificateRecord {
            map: &map.label,
            seed: config.seed,
            result: r,
        };
        write_json(
            config.output(&format!("{}_{}.json", map.label, class.name()))?,
            &record,
        )?;
        println!(
            "{} {}: {}",
            map.label,
            class.name(),
            if r.is_certificate() {
                "certificate"
            } else {
                "violation"
            }
        );
    }
    Ok(Outcome::from_pass(results.iter().all(|r| r.is_certificate())))
}

/// Writes `<map>_<scheme>_trajectory.csv`.
pub fn cmd_run(config: &ExperimentConfig) -> Result<Outcome> {
    let SchemeSelection::One(scheme) = &config.schemes else {
        return Err(Error::Config("run needs one scheme".into()));
    };
    let options = RunOptions {
        norm: config.norm.clone(),
        record_intermediates: false,
    };
    let traj = run_with(&config.map, scheme, config.x0(), &config.stopping, &options)?;
    traj.write_csv(config.output(&format!("{}_{}_trajectory.csv", config.map.label, scheme.label()))?)?;
    println!(
        "{} {}: {} after {} iterations, residual {:e}",
        config.map.label,
        scheme.label(),
        traj.stop_reason.name(),
        traj.last_index(),
        traj.residuals[traj.last_index()]
    );
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct SubjectAudit {
    /// `pair`, or the label of the trajectory a residual bound was run on.
    subject: String,
    #[serde(flatten)]
    report: AuditReport,
}

#[derive(Serialize)]
struct CoupleAudits<'a> {
    run: String,
    outcome: &'static str,
    gap_tail: f64,
    audits: &'a [SubjectAudit],
}

/// Writes `<map>_<a>_vs_<b>_coupled.csv` and `<map>_<a>_vs_<b>_audits.json`.
pub fn cmd_couple(config: &ExperimentConfig) -> Result<Outcome> {
    let SchemeSelection::Pair(a, b) = &config.schemes else {
        return Err(Error::Config("couple needs two schemes".into()));
    };
    let run = couple_with(&config.map, a, b, config.x0(), &config.stopping, &config.norm)?;
    let inputs = config.audit_inputs()?;
    let mut audits: Vec<SubjectAudit> =
        applicable_audits(&run, inputs.delta, &inputs.gauge, run.alpha_floor)?
            .into_iter()
            .map(|report| SubjectAudit {
                subject: "pair".into(),
                report,
            })
            .collect();
    if let Some(p) = config.map.known_fixed_point.as_deref() {
        for t in [&run.a, &run.b] {
            for report in [
                residual_decay_bound(t, inputs.delta, Some(p))?,
                intermediate_residual_bounds(&config.map, t, inputs.delta, Some(p))?,
            ] {
                audits.push(SubjectAudit {
                    subject: t.scheme.label(),
                    report,
                });
            }
        }
    }
    let stem = format!("{}_{}_vs_{}", config.map.label, a.label(), b.label());
    run.write_csv(config.output(&format!("{stem}_coupled.csv"))?)?;
    let record = CoupleAudits {
        run: run.label(),
        outcome: run.outcome.name(),
        gap_tail: run.gap_tail(),
        audits: &audits,
    };
    write_json(config.output(&format!("{stem}_audits.json"))?, &record)?;
    for a in &audits {
        println!(
            "{} {} {}: {} rows, {} violations",
            run.label(),
            a.subject,
            a.report.inequality_id,
            a.report.rows.len(),
            a.report.violation_count()
        );
    }
    println!(
        "{}: {}, gap tail {:e}",
        run.label(),
        run.outcome.name(),
        run.gap_tail()
    );
    Ok(Outcome::from_pass(audits.iter().all(|a| a.report.passed())))
}

/// Writes `<map>_suite.csv` and `<map>_suite_audits.json`.
pub fn cmd_suite(config: &ExperimentConfig) -> Result<Outcome> {
    let SchemeSelection::AllTen(schedules) = &config.schemes else {
        return Err(Error::Config("suite needs the shared schedules".into()));
    };
    if config.norm != Norm::euclidean() {
        return Err(Error::Config("suite runs under the Euclidean norm".into()));
    }
    let inputs = config.audit_inputs()?;
    let (report, _) = corollary2_suite(
        &config.map,
        config.x0(),
        schedules,
        &config.stopping,
        Some(&inputs),
    )?;
    report.write_csv(config.output(&format!("{}_suite.csv", config.map.label))?)?;
    write_json(
        config.output(&format!("{}_suite_audits.json", config.map.label))?,
        &report,
    )?;
    for r in &report.rows {
        println!(
            "{} {}: {}, fp error {:e}, gap tail {:e}",
            report.map,
            r.scheme,
            r.stop_reason.name(),
            r.final_fp_error,
            r.gap_tail
        );
    }
    let violations = report.audit_violations();
    println!(
        "{}: {} ({} audit violations)",
        report.map,
        if report.pass { "PASS" } else { "FAIL" },
        violations
    );
    Ok(Outcome::from_pass(report.pass && violations == 0))
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let args = match &cli.command {
        Command::Certify(a) | Command::Run(a) | Command::Couple(a) | Command::Suite(a) => a,
    };
    let config = ExperimentConfig::from_args(args, &cli.command)?;
    match cli.command {
        Command::Certify(_) => cmd_certify(&config),
        Command::Run(_) => cmd_run(&config),
        Command::Couple(_) => cmd_couple(&config),
        Command::Suite(_) => cmd_suite(&config),
    }
}

/// Parses the process arguments and maps the result to an exit code.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Violation) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules_parse() {
        assert_eq!(parse_schedule("0.5").unwrap(), ParameterSchedule::constant(0.5));
        assert_eq!(
            parse_schedule("harmonic:2").unwrap(),
            ParameterSchedule::harmonic(2.0)
        );
        assert_eq!(
            parse_schedule("list:0.9, 0.6").unwrap(),
            ParameterSchedule::list(vec![0.9, 0.6])
        );
        assert!(parse_schedule("1.5").is_err());
        assert!(parse_schedule("fast").is_err());
    }

    #[test]
    fn norms_parse() {
        assert_eq!(parse_norm("max").unwrap(), Norm::max());
        assert_eq!(parse_norm("p:inf").unwrap(), Norm::max());
        assert_eq!(parse_norm("p:3").unwrap(), Norm::P { p: 3.0 });
        assert!(parse_norm("p:0.5").is_err());
        assert!(parse_norm("weighted:1,0").is_err());
        assert!(parse_norm("taxicab").is_err());
    }
}
