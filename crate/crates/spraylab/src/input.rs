//! Metric and factor loading from the catalog or from files.

use std::fs;
use std::path::Path;

use spraylab_core::dsl::{catalog, factor, Domain, FactorSpec, MetricSpec};

use crate::config::Source;
use crate::RunError;

/// Dimension of catalog entries when `--dim` is not given.
pub const DEFAULT_DIM: usize = 2;

/// Default sampling region for expressions read from files.
pub const FILE_DOMAIN: Domain = Domain {
    shape: spraylab_core::dsl::DomainShape::Cube,
    radius: 0.5,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ExprFile {
    pub dim: usize,
    pub domain: Option<Domain>,
    pub text: String,
}

/// Parses the file format: `#` comments, a `dim=<n>` header, an optional
/// `domain=<ball|cube> <radius>` line, then the expression (may span lines).
pub fn parse_expr_file(contents: &str) -> Result<ExprFile, String> {
    let mut dim = None;
    let mut domain = None;
    let mut body = Vec::new();
    for line in contents.lines() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if body.is_empty() {
            if let Some(v) = t.strip_prefix("dim=").or_else(|| t.strip_prefix("dim =")) {
                let n: usize = v
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad dimension `{}`", v.trim()))?;
                dim = Some(n);
                continue;
            }
            if let Some(v) = t
                .strip_prefix("domain=")
                .or_else(|| t.strip_prefix("domain ="))
            {
                domain = Some(parse_domain(v.trim())?);
                continue;
            }
        }
        body.push(t);
    }
    let dim = dim.ok_or("missing `dim=<n>` header")?;
    if body.is_empty() {
        return Err("no expression after the header".into());
    }
    Ok(ExprFile {
        dim,
        domain,
        text: body.join(" "),
    })
}

fn parse_domain(v: &str) -> Result<Domain, String> {
    let mut parts = v.split_whitespace();
    let shape = parts.next().unwrap_or("");
    let radius: f64 = parts
        .next()
        .and_then(|r| r.parse().ok())
        .filter(|r: &f64| *r > 0.0 && r.is_finite())
        .ok_or_else(|| format!("bad domain `{v}`; expected `ball <r>` or `cube <r>`"))?;
    match shape {
        "ball" => Ok(Domain::ball(radius)),
        "cube" => Ok(Domain::cube(radius)),
        _ => Err(format!("unknown domain shape `{shape}`")),
    }
}

fn read_file(path: &Path, requested: Option<usize>) -> Result<ExprFile, RunError> {
    let contents = fs::read_to_string(path)
        .map_err(|e| RunError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let file = parse_expr_file(&contents)
        .map_err(|e| RunError::Usage(format!("{}: {e}", path.display())))?;
    if let Some(d) = requested {
        if d != file.dim {
            return Err(RunError::Usage(format!(
                "{} declares dim={}, but --dim {d} was given",
                path.display(),
                file.dim
            )));
        }
    }
    Ok(file)
}

fn usage(e: spraylab_core::Error) -> RunError {
    RunError::Usage(e.to_string())
}

pub fn load_metric(source: &Source, dim: Option<usize>, seed: u64) -> Result<MetricSpec, RunError> {
    match source {
        Source::Catalog(name) => catalog(name, dim.unwrap_or(DEFAULT_DIM), seed).map_err(usage),
        Source::File(path) => {
            let f = read_file(path, dim)?;
            let name = path.display().to_string();
            MetricSpec::from_text(&name, &f.text, f.dim, f.domain.unwrap_or(FILE_DOMAIN))
                .map_err(usage)
        }
    }
}

pub fn load_factor(source: &Source, dim: usize, seed: u64) -> Result<FactorSpec, RunError> {
    match source {
        Source::Catalog(name) => factor(name, dim, seed).map_err(usage),
        Source::File(path) => {
            let f = read_file(path, Some(dim))?;
            let mut spec = FactorSpec::from_text(&path.display().to_string(), &f.text, f.dim)
                .map_err(usage)?;
            spec.domain = f.domain;
            Ok(spec)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_format() {
        let f = parse_expr_file("# round sphere\ndim=2\ndomain=ball 0.5\nsqrt(y1^2 +\n y2^2)\n")
            .unwrap();
        assert_eq!(f.dim, 2);
        assert_eq!(f.domain, Some(Domain::ball(0.5)));
        assert_eq!(f.text, "sqrt(y1^2 + y2^2)");
        assert!(parse_expr_file("y1").is_err());
        assert!(parse_expr_file("dim=2\n").is_err());
        assert!(parse_expr_file("dim=two\ny1").is_err());
        assert!(parse_expr_file("dim=2\ndomain=disk 1\ny1").is_err());
    }
}
