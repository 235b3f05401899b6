//! Fundamental tensor, geodesic spray and projective deformations.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::calculus::{jvp, values, PhasePoint, ScalarField, VectorField};
use crate::dsl::{Expr, MetricSpec};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::linalg::Mat;

/// `g_ij = ½ ∂²F²/∂yⁱ∂yʲ` at a point, with its inverse.
#[derive(Debug, Clone)]
pub struct MetricTensor {
    pub g: Mat<f64>,
    pub inverse: Mat<f64>,
    /// 1-norm condition number of `g`.
    pub cond: f64,
}

fn unit(len: usize, k: usize) -> Vec<Jet> {
    let mut e = vec![Jet::constant(0.0); len];
    e[k] = Jet::constant(1.0);
    e
}

fn energy(expr: &Expr) -> impl Fn(&[Jet]) -> Result<Jet> + Clone + Send + Sync + 'static {
    let e = expr.clone();
    move |z: &[Jet]| {
        let f = e.eval_point(z)?;
        Ok(&f * &f)
    }
}

/// `∂²L/∂yˡ∂yᵏ` as a matrix of jets at `z`.
fn fiber_hessian(
    l: &(impl Fn(&[Jet]) -> Result<Jet> + Clone),
    n: usize,
    z: &[Jet],
) -> Result<Mat<Jet>> {
    let mut h = Mat::zeros(n);
    for a in 0..n {
        for b in a..n {
            let ea = unit(2 * n, n + a);
            let eb = unit(2 * n, n + b);
            let (_, v) = jvp(z, &eb, &[], |zp| Ok(jvp(zp, &ea, &[], |zq| l(zq))?.1))?;
            h[(b, a)] = v.clone();
            h[(a, b)] = v;
        }
    }
    Ok(h)
}

pub fn metric_tensor(metric: &MetricSpec, p: &PhasePoint) -> Result<MetricTensor> {
    if p.dim() != metric.dim {
        return Err(Error::DimMismatch {
            expected: metric.dim,
            found: p.dim(),
        });
    }
    let l = energy(&metric.expr);
    let h = fiber_hessian(&l, metric.dim, &p.to_jets())?.values();
    let g = Mat::from_fn(metric.dim, |i, j| 0.5 * h[(i, j)]);
    let inverse = g
        .inverse()
        .ok_or(Error::NotFinsler("singular fundamental tensor"))?;
    if !g.is_positive_definite() {
        return Err(Error::NotFinsler(
            "fundamental tensor is not positive-definite",
        ));
    }
    let cond = g.norm_1() * inverse.norm_1();
    Ok(MetricTensor { g, inverse, cond })
}

/// `Gⁱ = ½ H⁻¹ (yᵏ ∂²L/∂yˡ∂xᵏ − ∂L/∂xˡ)` with `L = F²` and `H` its fiber Hessian.
fn geodesic_coeffs(
    l: &(impl Fn(&[Jet]) -> Result<Jet> + Clone),
    n: usize,
    z: &[Jet],
) -> Result<Vec<Jet>> {
    let h = fiber_hessian(l, n, z)?;
    let mut ydir = vec![Jet::constant(0.0); 2 * n];
    ydir[..n].clone_from_slice(&z[n..]);
    let mut rhs = Vec::with_capacity(n);
    for a in 0..n {
        let ea = unit(2 * n, n + a);
        // ydir is held fixed while the inner derivative opens a level above it
        let (_, mixed) = jvp(z, &ydir, &[], |zp| Ok(jvp(zp, &ea, &[], |zq| l(zq))?.1))?;
        let (_, dx) = jvp(z, &unit(2 * n, a), &[], |zp| l(zp))?;
        rhs.push((mixed - dx) * 0.5);
    }
    h.solve(&rhs)
        .ok_or(Error::NotFinsler("singular fundamental tensor"))
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpraySource {
    Geodesic { metric: String },
    Deformed { base: String, factor: String },
}

impl fmt::Display for SpraySource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpraySource::Geodesic { metric } => write!(f, "geodesic spray of {metric}"),
            SpraySource::Deformed { base, factor } => write!(f, "({base}) deformed by {factor}"),
        }
    }
}

type CoeffFn = dyn Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync;

/// A spray `S = yⁱ∂/∂xⁱ − 2Gⁱ∂/∂yⁱ` given by its coefficients `Gⁱ`.
#[derive(Clone)]
pub struct SprayData {
    dim: usize,
    coeffs: Arc<CoeffFn>,
    pub source: SpraySource,
}

impl fmt::Debug for SprayData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SprayData")
            .field("dim", &self.dim)
            .field("source", &self.source)
            .finish()
    }
}

impl SprayData {
    pub fn new(
        dim: usize,
        source: SpraySource,
        coeffs: impl Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync + 'static,
    ) -> Self {
        SprayData {
            dim,
            coeffs: Arc::new(coeffs),
            source,
        }
    }

    /// The spray with `G ≡ 0`.
    pub fn flat(dim: usize) -> Self {
        SprayData::new(
            dim,
            SpraySource::Geodesic {
                metric: "euclidean".into(),
            },
            move |_| Ok(vec![Jet::constant(0.0); dim]),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Gⁱ(z)`
    pub fn coeffs(&self, z: &[Jet]) -> Result<Vec<Jet>> {
        (self.coeffs)(z)
    }

    pub fn coeffs_at(&self, p: &PhasePoint) -> Result<Vec<f64>> {
        Ok(values(&self.coeffs(&p.to_jets())?))
    }

    /// `S` as a vector field.
    pub fn field(&self) -> VectorField {
        let s = self.clone();
        VectorField::new(move |z| s.field_at(z))
    }

    pub(crate) fn field_at(&self, z: &[Jet]) -> Result<Vec<Jet>> {
        let n = self.dim;
        let g = self.coeffs(z)?;
        let mut out = Vec::with_capacity(2 * n);
        out.extend_from_slice(&z[n..]);
        out.extend(g.into_iter().map(|v| v * -2.0));
        Ok(out)
    }

    /// `S̃ = S − 2P𝒞`, i.e. `G̃ⁱ = Gⁱ + P yⁱ`, without any check on `P`.
    pub fn deformed_unchecked(&self, p: &ScalarField, factor_name: &str) -> SprayData {
        let (s, p) = (self.clone(), p.clone());
        let n = self.dim;
        let base = match &self.source {
            SpraySource::Geodesic { metric } => metric.clone(),
            other => alloc::format!("{other}"),
        };
        SprayData::new(
            n,
            SpraySource::Deformed {
                base,
                factor: factor_name.into(),
            },
            move |z| {
                let g = s.coeffs(z)?;
                let pv = p.eval(z, &[])?;
                Ok(g.into_iter()
                    .zip(&z[n..])
                    .map(|(gi, yi)| gi + &pv * yi)
                    .collect())
            },
        )
    }
}

pub fn geodesic_spray(metric: &MetricSpec) -> SprayData {
    let l = energy(&metric.expr);
    let n = metric.dim;
    SprayData::new(
        n,
        SpraySource::Geodesic {
            metric: metric.name.clone(),
        },
        move |z| geodesic_coeffs(&l, n, z),
    )
}

/// `max |𝒞(P) − P| / max(1, |P|)` over `points`.
pub fn homogeneity_residual(p: &ScalarField, points: &[PhasePoint]) -> Result<f64> {
    let mut worst = 0.0f64;
    for q in points {
        let n = q.dim();
        let z = q.to_jets();
        let mut c = vec![Jet::constant(0.0); 2 * n];
        c[n..].clone_from_slice(&z[n..]);
        let (v, d) = jvp(&z, &c, &[], |zp| p.eval(zp, &[]))?;
        let v = v.value();
        worst = worst.max((d.value() - v).abs() / v.abs().max(1.0));
    }
    Ok(worst)
}

/// Projective deformation `S̃ = S − 2P𝒞`. `P` must be 1-homogeneous in `y`
/// at every check point to within `tol`.
pub fn deform_spray(
    s: &SprayData,
    p: &ScalarField,
    factor_name: &str,
    check_points: &[PhasePoint],
    tol: f64,
) -> Result<SprayData> {
    let residual = homogeneity_residual(p, check_points)?;
    if !(residual < tol) {
        return Err(Error::NotHomogeneous { residual });
    }
    Ok(s.deformed_unchecked(p, factor_name))
}

/// The function `z ↦ F(z)`.
pub fn metric_field(metric: &MetricSpec) -> ScalarField {
    expr_field(&metric.expr)
}

pub fn expr_field(expr: &Expr) -> ScalarField {
    let e = expr.clone();
    ScalarField::function(move |z| e.eval_point(z))
}

/// Per-point outcome of the Finsler axiom checks.
#[derive(Debug, Clone, PartialEq)]
pub struct AxiomRecord {
    pub point: PhasePoint,
    /// `F(x, y)`, `NaN` when evaluation failed.
    pub value: f64,
    /// `|F(x, λy) − λF(x, y)| / (λF)` for `λ = 2.5`.
    pub homogeneity: f64,
    /// `|𝒞(F) − F| / max(1, F)`.
    pub euler: f64,
    pub positive_definite: bool,
    pub cond: f64,
    pub error: Option<Error>,
}

impl AxiomRecord {
    pub fn passed(&self, tol: f64) -> bool {
        self.error.is_none()
            && self.value > 0.0
            && self.homogeneity < tol
            && self.euler < tol
            && self.positive_definite
    }
}

pub fn finsler_axioms_point(metric: &MetricSpec, p: &PhasePoint) -> AxiomRecord {
    let mut rec = AxiomRecord {
        point: p.clone(),
        value: f64::NAN,
        homogeneity: f64::NAN,
        euler: f64::NAN,
        positive_definite: false,
        cond: f64::INFINITY,
        error: None,
    };
    let run = |rec: &mut AxiomRecord| -> Result<()> {
        let f = metric.expr.eval(&p.x, &p.y)?;
        rec.value = f;
        let lambda = 2.5;
        let ly: Vec<f64> = p.y.iter().map(|v| v * lambda).collect();
        let fl = metric.expr.eval(&p.x, &ly)?;
        rec.homogeneity = (fl - lambda * f).abs() / (lambda * f).abs().max(f64::MIN_POSITIVE);
        rec.euler = homogeneity_residual(&metric_field(metric), core::slice::from_ref(p))?;
        let mt = metric_tensor(metric, p)?;
        rec.positive_definite = true;
        rec.cond = mt.cond;
        Ok(())
    };
    if let Err(e) = run(&mut rec) {
        rec.error = Some(e);
    }
    rec
}

pub fn finsler_axioms_check(metric: &MetricSpec, sample: &[PhasePoint]) -> Vec<AxiomRecord> {
    sample
        .iter()
        .map(|p| finsler_axioms_point(metric, p))
        .collect()
}
