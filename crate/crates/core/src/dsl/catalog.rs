//! Built-in metrics and projective factors.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::Expr;
use crate::error::{Error, Result};
use crate::sampling::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainShape {
    /// `|x|₂ < radius`
    Ball,
    /// `max |xᵢ| ≤ radius`
    Cube,
}

/// Region of the base where a metric is sampled. Fibers are always `y ≠ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub shape: DomainShape,
    pub radius: f64,
}

impl Domain {
    pub fn ball(radius: f64) -> Self {
        Domain {
            shape: DomainShape::Ball,
            radius,
        }
    }

    pub fn cube(radius: f64) -> Self {
        Domain {
            shape: DomainShape::Cube,
            radius,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self.shape {
            DomainShape::Ball => x.iter().map(|v| v * v).sum::<f64>() < self.radius * self.radius,
            DomainShape::Cube => x.iter().all(|v| v.abs() <= self.radius),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MetricSpec {
    pub name: String,
    pub dim: usize,
    pub expr: Expr,
    pub domain: Domain,
    /// Flag curvature when it is known to be constant.
    pub expected_kappa: Option<f64>,
}

impl MetricSpec {
    pub fn from_text(name: &str, text: &str, dim: usize, domain: Domain) -> Result<Self> {
        Ok(MetricSpec {
            name: name.into(),
            dim,
            expr: Expr::parse(text, dim)?,
            domain,
            expected_kappa: None,
        })
    }
}

/// A projective factor `P`, positively 1-homogeneous in `y`.
#[derive(Debug, Clone)]
pub struct FactorSpec {
    pub name: String,
    pub dim: usize,
    pub expr: Expr,
    /// For deformations of a specific base metric whose result is a known
    /// geodesic spray: `(base metric name, metric of the deformed spray)`.
    pub companion: Option<(String, MetricSpec)>,
    /// Region where `P` is defined, when narrower than the base metric's.
    pub domain: Option<Domain>,
}

impl FactorSpec {
    pub fn from_text(name: &str, text: &str, dim: usize) -> Result<Self> {
        Ok(FactorSpec {
            name: name.into(),
            dim,
            expr: Expr::parse(text, dim)?,
            companion: None,
            domain: None,
        })
    }

    /// Sampling region for a deformation of a metric living on `base`.
    pub fn sampling_domain(&self, base: &Domain) -> Domain {
        match self.domain {
            Some(d) if d.radius < base.radius => d,
            _ => *base,
        }
    }
}

fn ensure_dim(name: &str, dim: usize, min: usize) -> Result<()> {
    if dim < min || dim > 8 {
        Err(Error::UnsupportedDim {
            name: name.into(),
            dim,
        })
    } else {
        Ok(())
    }
}

fn sum_of(dim: usize, term: impl Fn(usize) -> String) -> String {
    let parts: Vec<String> = (1..=dim).map(term).collect();
    format!("({})", parts.join(" + "))
}

fn sq_norm(var: char, dim: usize) -> String {
    sum_of(dim, |i| format!("{var}{i}^2"))
}

fn inner_xy(dim: usize) -> String {
    sum_of(dim, |i| format!("x{i}*y{i}"))
}

pub fn catalog_names() -> &'static [&'static str] {
    &[
        "euclidean",
        "sphere_projective",
        "poincare_ball",
        "funk_disk",
        "rand_riemann",
    ]
}

/// Looks up a built-in metric. `seed` is only read by `rand_riemann`.
pub fn catalog(name: &str, dim: usize, seed: u64) -> Result<MetricSpec> {
    let (text, domain, kappa) = match name {
        "euclidean" => {
            ensure_dim(name, dim, 1)?;
            (
                format!("sqrt{}", sq_norm('y', dim)),
                Domain::cube(1.0),
                Some(0.0),
            )
        }
        "sphere_projective" => {
            // round unit sphere in central-projection coordinates; geodesics are lines
            ensure_dim(name, dim, 2)?;
            let x2 = sq_norm('x', dim);
            let y2 = sq_norm('y', dim);
            let xy = inner_xy(dim);
            (
                format!("sqrt((1 + {x2})*{y2} - {xy}^2) / (1 + {x2})"),
                Domain::cube(1.0),
                Some(1.0),
            )
        }
        "poincare_ball" => {
            ensure_dim(name, dim, 2)?;
            (
                format!("2*sqrt{} / (1 - {})", sq_norm('y', dim), sq_norm('x', dim)),
                Domain::ball(0.8),
                Some(-1.0),
            )
        }
        "funk_disk" => {
            ensure_dim(name, dim, 2)?;
            let x2 = sq_norm('x', dim);
            let y2 = sq_norm('y', dim);
            let xy = inner_xy(dim);
            (
                format!("({xy} + sqrt({xy}^2 + {y2}*(1 - {x2}))) / (1 - {x2})"),
                Domain::ball(0.8),
                Some(-0.25),
            )
        }
        "rand_riemann" => {
            ensure_dim(name, dim, 2)?;
            (rand_riemann_text(dim, seed), Domain::cube(1.0), None)
        }
        _ => return Err(Error::UnknownName(name.into())),
    };
    let mut spec = MetricSpec::from_text(name, &text, dim, domain)?;
    spec.expected_kappa = kappa;
    Ok(spec)
}

/// `F = exp(σ(x)) sqrt(g_ij(x) yⁱ yʲ)` with `g = I + A(x)`, `A` symmetric with
/// entries `a + Σ bₖxₖ + Σ cₖxₖ²`, and `σ = Σ (pₖxₖ + qₖxₖ²)`.
/// Coefficients of `A` are drawn from `[−s, s]` with `s = 0.9 / (n(1 + 2n))`,
/// so on the unit cube every row of `A` has absolute sum below 0.9 and `g`
/// stays positive-definite by Gershgorin. `p`, `q` are drawn from `[−0.4, 0.4]`.
fn rand_riemann_text(dim: usize, seed: u64) -> String {
    let mut rng = SeededRng::new(seed ^ 0x7269_656d_616e_6e00);
    let s = 0.9 / (dim as f64 * (1.0 + 2.0 * dim as f64));
    let mut terms = Vec::new();
    for i in 1..=dim {
        for j in i..=dim {
            let mut entry = Vec::new();
            let a = rng.uniform(-s, s);
            entry.push(if i == j {
                format!("{}", 1.0 + a)
            } else {
                format!("{a}")
            });
            for k in 1..=dim {
                entry.push(format!("{}*x{k}", rng.uniform(-s, s)));
                entry.push(format!("{}*x{k}^2", rng.uniform(-s, s)));
            }
            let g = entry.join(" + ");
            let w = if i == j { "" } else { "2*" };
            terms.push(format!("{w}({g})*y{i}*y{j}"));
        }
    }
    let sigma: Vec<String> = (1..=dim)
        .map(|k| {
            format!(
                "{}*x{k} + {}*x{k}^2",
                rng.uniform(-0.4, 0.4),
                rng.uniform(-0.4, 0.4)
            )
        })
        .collect();
    format!("exp({})*sqrt({})", sigma.join(" + "), terms.join(" + "))
}

pub fn factor_names() -> &'static [&'static str] {
    &[
        "zero",
        "funk_half",
        "sphere_flat",
        "euclid_norm",
        "x1y1_over_norm",
        "rand_factor",
    ]
}

/// Looks up a built-in projective factor. `seed` is only read by `rand_factor`.
pub fn factor(name: &str, dim: usize, seed: u64) -> Result<FactorSpec> {
    ensure_dim(name, dim, 1)?;
    let y2 = sq_norm('y', dim);
    let mut companion = None;
    let mut domain = None;
    let text = match name {
        "zero" => "0".to_string(),
        "funk_half" => {
            // the Funk spray is the flat spray deformed by P = F/2
            let funk = catalog("funk_disk", dim, 0)?;
            let t = format!("0.5*({})", funk.expr);
            domain = Some(funk.domain);
            companion = Some(("euclidean".to_string(), funk));
            t
        }
        "sphere_flat" => {
            let sphere = catalog("sphere_projective", dim, 0)?;
            let t = format!("-{} / (1 + {})", inner_xy(dim), sq_norm('x', dim));
            companion = Some(("euclidean".to_string(), sphere));
            t
        }
        "euclid_norm" => format!("sqrt{y2}"),
        // the 1-homogeneous member of the x¹y¹/|y| family; x¹y¹ alone is a Hamel function
        "x1y1_over_norm" => format!("x1*y1^2 / sqrt{y2}"),
        "rand_factor" => rand_factor_text(dim, seed),
        _ => return Err(Error::UnknownName(name.into())),
    };
    Ok(FactorSpec {
        name: name.into(),
        dim,
        expr: Expr::parse(&text, dim)?,
        companion,
        domain,
    })
}

/// `P = Σ (aᵢ + Σ bᵢₖxₖ) yᵢ + (c + Σ dₖxₖ²)|y| + e·sin(x₁)·y₁²/|y|`
fn rand_factor_text(dim: usize, seed: u64) -> String {
    let mut rng = SeededRng::new(seed ^ 0x6661_6374_6f72_0000);
    let mut terms = Vec::new();
    for i in 1..=dim {
        let mut coef = alloc::vec![format!("{}", rng.uniform(-0.5, 0.5))];
        for k in 1..=dim {
            coef.push(format!("{}*x{k}", rng.uniform(-0.5, 0.5)));
        }
        terms.push(format!("({})*y{i}", coef.join(" + ")));
    }
    let mut radial = alloc::vec![format!("{}", rng.uniform(-0.5, 0.5))];
    for k in 1..=dim {
        radial.push(format!("{}*x{k}^2", rng.uniform(-0.5, 0.5)));
    }
    let norm = format!("sqrt{}", sq_norm('y', dim));
    terms.push(format!("({})*{norm}", radial.join(" + ")));
    terms.push(format!("{}*sin(x1)*y1^2/{norm}", rng.uniform(-0.5, 0.5)));
    terms.join(" + ")
}
