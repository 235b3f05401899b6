//! Command-line front end for `spraylab-core`: inputs, parallel point sweeps,
//! and text/JSON reports.

pub mod config;
pub mod input;
pub mod report;

use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};
use spraylab_core::calculus::PhasePoint;
use spraylab_core::curvature::{
    beltrami_check_with, bianchi_check_with, cc_check_with, flag_curvature_check_with,
    hamel_check_with, projective_invariants_check_with, CheckReport, PointFn, PointRecord,
    Sequential, Sweep, Verdict,
};
use spraylab_core::dsl::{catalog, catalog_names, factor, factor_names};
use spraylab_core::finsler::{deform_spray, expr_field, geodesic_spray};
use spraylab_core::jet::HARD_MAX_ORDER;
use spraylab_core::sampling::sample_points;

pub use config::{Command, RunConfig, Source};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Eval(#[from] spraylab_core::Error),
    #[error("cannot write report to {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl RunError {
    /// 2 for configuration problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub reports: Vec<CheckReport>,
    pub json: Value,
    pub text: String,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    /// The JSON report as written to disk.
    pub fn json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.json).expect("report serializes");
        s.push('\n');
        s
    }
}

struct Parallel(rayon::ThreadPool);

impl Sweep for Parallel {
    fn run(&self, points: &[PhasePoint], f: &PointFn<'_>) -> Vec<PointRecord> {
        // indexed collect keeps point order
        self.0.install(|| {
            points
                .par_iter()
                .enumerate()
                .map(|(i, p)| f(i, p))
                .collect()
        })
    }
}

fn thread_count(cfg: &RunConfig) -> Result<usize, RunError> {
    if let Some(n) = cfg.threads {
        return Ok(n);
    }
    match std::env::var("SPRAYLAB_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| RunError::Usage(format!("SPRAYLAB_THREADS must be a number, got `{v}`"))),
        Err(_) => Ok(0),
    }
}

fn sweep_for(cfg: &RunConfig) -> Result<Box<dyn Sweep>, RunError> {
    let n = thread_count(cfg)?;
    if n == 1 {
        return Ok(Box::new(Sequential));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| RunError::Usage(format!("cannot start {n} threads: {e}")))?;
    Ok(Box::new(Parallel(pool)))
}

fn validate(cfg: &RunConfig) -> Result<(), RunError> {
    if cfg.points == 0 {
        return Err(RunError::Usage("--points must be at least 1".into()));
    }
    let t = &cfg.tolerances;
    for (name, v) in [
        ("--tol-id", t.identity),
        ("--tol-curv", t.curvature),
        ("--tol-xi", t.xi),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(RunError::Usage(format!("{name} must be a positive number")));
        }
    }
    if cfg.max_order == 0 || cfg.max_order > HARD_MAX_ORDER {
        return Err(RunError::Usage(format!(
            "--max-order must be between 1 and {HARD_MAX_ORDER}"
        )));
    }
    if cfg.command.needs_factor() && cfg.factor.is_none() {
        return Err(RunError::Usage(format!(
            "{} needs --factor or --factor-file",
            cfg.command.name()
        )));
    }
    if cfg.command != Command::Catalog && cfg.metric.is_none() {
        return Err(RunError::Usage(format!(
            "{} needs --metric or --metric-file",
            cfg.command.name()
        )));
    }
    Ok(())
}

/// Runs one command. The JSON report is written to `cfg.json` unless that
/// path is `-`, in which case the caller prints it.
pub fn run(cfg: &RunConfig) -> Result<Outcome, RunError> {
    validate(cfg)?;
    spraylab_core::set_max_order(cfg.max_order)?;
    let outcome = if cfg.command == Command::Catalog {
        catalog_listing(cfg)?
    } else {
        run_check(cfg)?
    };
    if let Some(path) = &cfg.json {
        if path != Path::new("-") {
            std::fs::write(path, outcome.json_string()).map_err(|source| RunError::Io {
                path: path.display().to_string(),
                source,
            })?;
        }
    }
    Ok(outcome)
}

fn run_check(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let metric_src = cfg.metric.as_ref().expect("validated");
    let metric = input::load_metric(metric_src, cfg.dim, cfg.metric_seed())?;
    let n = metric.dim;
    let factor = match &cfg.factor {
        Some(src) => Some(input::load_factor(src, n, cfg.factor_seed())?),
        None => None,
    };
    let domain = match &factor {
        Some(f) => f.sampling_domain(&metric.domain),
        None => metric.domain,
    };
    let points = sample_points(&domain, n, cfg.points, cfg.seed);
    let sweep = sweep_for(cfg)?;
    let sweep = sweep.as_ref();
    let (tol, seed) = (&cfg.tolerances, cfg.seed);

    let reports = match cfg.command {
        Command::CheckCc => vec![cc_check_with(sweep, &metric, &points, tol, seed)?],
        Command::FlagCurvature => vec![flag_curvature_check_with(sweep, &metric, &points, tol)?],
        Command::Bianchi => {
            let mut spray = geodesic_spray(&metric);
            if let Some(f) = &factor {
                spray = deform_spray(&spray, &expr_field(&f.expr), &f.name, &points, 1e-8)?;
            }
            vec![bianchi_check_with(sweep, &spray, &points, tol, seed)?]
        }
        Command::Hamel => {
            let f = factor.as_ref().expect("validated");
            vec![hamel_check_with(
                sweep,
                &geodesic_spray(&metric),
                f,
                &points,
                tol,
                seed,
            )?]
        }
        Command::Invariants => {
            let f = factor.as_ref().expect("validated");
            vec![projective_invariants_check_with(
                sweep,
                &geodesic_spray(&metric),
                f,
                &points,
                tol,
                seed,
            )?]
        }
        Command::Beltrami => {
            let f = factor.as_ref().expect("validated");
            let o = beltrami_check_with(sweep, &metric, f, &points, tol, seed)?;
            let summary = CheckReport {
                check: "beltrami-verdict".into(),
                subject: format!("{} with factor {}", metric.name, f.name),
                dim: n,
                records: Vec::new(),
                aggregate: Vec::new(),
                verdicts: vec![
                    flag("hamel", o.hamel_pass, None),
                    flag("deformed_cc", o.deformed_pass, None),
                    flag(
                        "equivalence",
                        o.consistent(),
                        Some("Hamel factor if and only if the deformed spray passes the CC-conditions"),
                    ),
                ],
                notes: Vec::new(),
            };
            vec![o.base, o.hamel, o.deformed, summary]
        }
        Command::Catalog => unreachable!(),
    };

    let passed = reports.iter().all(CheckReport::passed);
    let config = report::config_json(
        cfg,
        Some(report::metric_json(metric_src, &metric)),
        cfg.factor
            .as_ref()
            .zip(factor.as_ref())
            .map(|(s, f)| report::factor_json(s, f)),
    );
    let json = report::report_json(config, &reports, passed);
    let mut text = report::render_text(&reports, cfg.table);
    text.push_str(&format!(
        "RESULT: {}\n",
        if passed { "PASS" } else { "FAIL" }
    ));
    Ok(Outcome {
        passed,
        reports,
        json,
        text,
    })
}

/// A pass/fail verdict with no numeric statistic.
fn flag(name: &str, passed: bool, note: Option<&str>) -> Verdict {
    Verdict {
        name: name.into(),
        passed,
        value: if passed { 1.0 } else { 0.0 },
        tolerance: 1.0,
        note: note.map(Into::into),
    }
}

fn catalog_listing(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let dim = cfg.dim.unwrap_or(input::DEFAULT_DIM);
    let seed = cfg.metric_seed();
    let mut text = format!("metrics (dim {dim}):\n");
    let mut metrics = Vec::new();
    for name in catalog_names() {
        let m = catalog(name, dim, seed)?;
        let kappa = m
            .expected_kappa
            .map_or("unknown".to_string(), |k| format!("{k}"));
        text.push_str(&format!("  {name:<18} kappa {kappa:<8} F = {}\n", m.expr));
        metrics.push(report::metric_json(&Source::Catalog(name.to_string()), &m));
    }
    text.push_str(&format!("factors (dim {dim}):\n"));
    let mut factors = Vec::new();
    for name in factor_names() {
        let f = factor(name, dim, cfg.factor_seed())?;
        text.push_str(&format!("  {name:<18} P = {}\n", f.expr));
        factors.push(report::factor_json(&Source::Catalog(name.to_string()), &f));
    }
    let mut json = report::report_json(report::config_json(cfg, None, None), &[], true);
    json["catalog"] = json!({ "metrics": metrics, "factors": factors });
    Ok(Outcome {
        passed: true,
        reports: Vec::new(),
        json,
        text,
    })
}
