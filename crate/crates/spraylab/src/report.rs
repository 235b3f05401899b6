//! JSON and plain-text rendering of check reports.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};
use spraylab_core::curvature::CheckReport;
use spraylab_core::dsl::{Domain, DomainShape, FactorSpec, MetricSpec};

use crate::config::{RunConfig, Source};

/// Floats are written as shortest round-trip decimal strings.
pub fn num(v: f64) -> Value {
    Value::String(format!("{v:e}"))
}

fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| num(*x)).collect())
}

pub fn domain_json(d: &Domain) -> Value {
    let shape = match d.shape {
        DomainShape::Ball => "ball",
        DomainShape::Cube => "cube",
    };
    json!({ "shape": shape, "radius": num(d.radius) })
}

fn source_kind(s: &Source) -> &'static str {
    match s {
        Source::Catalog(_) => "catalog",
        Source::File(_) => "file",
    }
}

pub fn metric_json(source: &Source, m: &MetricSpec) -> Value {
    json!({
        "source": source_kind(source),
        "name": m.name,
        "dim": m.dim,
        "expression": m.expr.to_string(),
        "domain": domain_json(&m.domain),
        "expected_kappa": m.expected_kappa.map(num),
    })
}

pub fn factor_json(source: &Source, f: &FactorSpec) -> Value {
    json!({
        "source": source_kind(source),
        "name": f.name,
        "dim": f.dim,
        "expression": f.expr.to_string(),
        "domain": f.domain.as_ref().map(domain_json),
    })
}

pub fn config_json(cfg: &RunConfig, metric: Option<Value>, factor: Option<Value>) -> Value {
    let t = &cfg.tolerances;
    json!({
        "command": cfg.command.name(),
        "metric": metric,
        "factor": factor,
        "points": cfg.points,
        "seed": cfg.seed,
        "metric_seed": cfg.metric_seed(),
        "tolerances": {
            "identity": num(t.identity),
            "curvature": num(t.curvature),
            "xi": num(t.xi),
        },
        "max_order": cfg.max_order,
        "norm": "max over 8 seeded unit test-vector tuples; residuals divided by max(1, scale of the dominant term)",
    })
}

/// Top-level report `{config, reports, per_point, aggregate, verdicts, notes, passed, versions}`.
pub fn report_json(config: Value, reports: &[CheckReport], passed: bool) -> Value {
    let mut per_point = Vec::new();
    let mut aggregate = Map::new();
    let mut verdicts = Vec::new();
    let mut notes = Vec::new();
    let mut summary = Vec::new();
    for r in reports {
        summary.push(json!({
            "check": r.check,
            "subject": r.subject,
            "dim": r.dim,
            "points": r.records.len(),
            "passed": r.passed(),
        }));
        for rec in &r.records {
            let mut values = Map::new();
            for (k, v) in &rec.values {
                values.insert(k.clone(), num(*v));
            }
            per_point.push(json!({
                "check": r.check,
                "index": rec.index,
                "x": nums(&rec.point.x),
                "y": nums(&rec.point.y),
                "excluded": rec.excluded,
                "error": rec.error,
                "values": values,
            }));
        }
        let mut agg = Map::new();
        for (k, s) in &r.aggregate {
            agg.insert(
                k.clone(),
                json!({ "max": num(s.max), "mean": num(s.mean), "count": s.count }),
            );
        }
        if let Some((mean, std)) = r.spread("kappa") {
            agg.insert(
                "kappa_spread".into(),
                json!({ "mean": num(mean), "std": num(std) }),
            );
        }
        aggregate.insert(r.check.clone(), Value::Object(agg));
        for v in &r.verdicts {
            verdicts.push(json!({
                "check": r.check,
                "name": v.name,
                "passed": v.passed,
                "value": num(v.value),
                "tolerance": num(v.tolerance),
                "note": v.note,
            }));
        }
        for n in &r.notes {
            notes.push(json!({ "check": r.check, "note": n }));
        }
    }
    json!({
        "config": config,
        "reports": summary,
        "per_point": per_point,
        "aggregate": aggregate,
        "verdicts": verdicts,
        "notes": notes,
        "passed": passed,
        "versions": versions(),
    })
}

pub fn versions() -> Value {
    json!({
        "spraylab": env!("CARGO_PKG_VERSION"),
        "spraylab-core": spraylab_core::VERSION,
    })
}

fn pass(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Human-readable rendering. The per-point table is printed for failing
/// reports, or for all of them with `table`.
pub fn render_text(reports: &[CheckReport], table: bool) -> String {
    let mut out = String::new();
    for r in reports {
        let _ = writeln!(
            out,
            "== {}: {} (dim {}, {} points) ==",
            r.check,
            r.subject,
            r.dim,
            r.records.len()
        );
        if !r.aggregate.is_empty() {
            let _ = writeln!(out, "  {:<18} {:>12} {:>12}", "quantity", "max", "mean");
            for (k, s) in &r.aggregate {
                let _ = writeln!(out, "  {:<18} {:>12.4e} {:>12.4e}", k, s.max, s.mean);
            }
        }
        if let Some((mean, std)) = r.spread("kappa") {
            let _ = writeln!(out, "  kappa mean {mean:.10e}, sample std {std:.3e}");
        }
        for v in &r.verdicts {
            let _ = write!(
                out,
                "  {} {:<24} {:>12.4e}  (tolerance {:e})",
                pass(v.passed),
                v.name,
                v.value,
                v.tolerance
            );
            if let Some(n) = &v.note {
                let _ = write!(out, "  {n}");
            }
            out.push('\n');
        }
        for n in &r.notes {
            let _ = writeln!(out, "  note: {n}");
        }
        if (table || !r.passed()) && !r.records.is_empty() {
            out.push_str(&point_table(r));
        }
    }
    out
}

fn point_table(r: &CheckReport) -> String {
    let mut cols: Vec<&str> = Vec::new();
    for rec in &r.records {
        for (k, _) in &rec.values {
            if !cols.contains(&k.as_str()) {
                cols.push(k);
            }
        }
    }
    let mut out = String::new();
    let _ = write!(out, "  {:>5}", "point");
    for c in &cols {
        let _ = write!(out, " {c:>14}");
    }
    out.push('\n');
    for rec in &r.records {
        let _ = write!(out, "  {:>5}", rec.index);
        for c in &cols {
            match rec.get(c) {
                Some(v) => {
                    let _ = write!(out, " {v:>14.6e}");
                }
                None => {
                    let _ = write!(out, " {:>14}", "-");
                }
            }
        }
        if rec.excluded {
            out.push_str("  (excluded: ill-conditioned g)");
        }
        if let Some(e) = &rec.error {
            let _ = write!(out, "  error: {e}");
        }
        out.push('\n');
    }
    out
}
