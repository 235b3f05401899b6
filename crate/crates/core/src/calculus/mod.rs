//! Pointwise Frölicher–Nijenhuis calculus on the slit tangent bundle.
//!
//! Everything lives in induced coordinates `z = (x¹..xⁿ, y¹..yⁿ)` on `TM`;
//! tangent vectors of `TM` are `2n`-vectors ordered `∂/∂x` then `∂/∂y`.
//! Fields and forms are closures over jets, so any object built here can be
//! differentiated again. Arguments of forms are extended as constant vector
//! fields; the operations below only produce tensorial objects, for which the
//! extension does not matter.

mod norms;
mod ops;

use alloc::sync::Arc;
use alloc::vec::Vec;

pub use norms::{form_max_norm, form_residual, vector_form_residual, Battery};
pub use ops::{
    compose, d_k, directional_derivative, exterior_d, fn_bracket_11, fn_bracket_vf, i_k,
    identity_endo, insert_field, insert_field_vector, lie_bracket, liouville, semi_basic_trace,
    tensor_field, vector_derivative, vertical_endo, wedge, wedge_vector,
};

use crate::error::Result;
use crate::jet::{check_level, Jet};

/// A point `(x, y)` of the slit tangent bundle, `y ≠ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PhasePoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), y.len(), "x and y must have the same dimension");
        PhasePoint { x, y }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn is_slit(&self) -> bool {
        self.y.iter().any(|v| *v != 0.0)
    }

    /// Stacked coordinates `(x, y)` as constant jets.
    pub fn to_jets(&self) -> Vec<Jet> {
        self.x
            .iter()
            .chain(&self.y)
            .map(|&v| Jet::constant(v))
            .collect()
    }
}

pub(crate) fn constant_vec(v: &[f64]) -> Vec<Jet> {
    v.iter().map(|&a| Jet::constant(a)).collect()
}

pub(crate) fn values(v: &[Jet]) -> Vec<f64> {
    v.iter().map(Jet::value).collect()
}

type FieldFn = dyn Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync;
type ScalarFormFn = dyn Fn(&[Jet], &[Vec<Jet>]) -> Result<Jet> + Send + Sync;
type VectorFormFn = dyn Fn(&[Jet], &[Vec<Jet>]) -> Result<Vec<Jet>> + Send + Sync;

/// Vector field on `T₀M`, valued in the `2n`-dimensional tangent space of `TM`.
#[derive(Clone)]
pub struct VectorField {
    f: Arc<FieldFn>,
}

impl VectorField {
    pub fn new(f: impl Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync + 'static) -> Self {
        VectorField { f: Arc::new(f) }
    }

    pub fn eval(&self, z: &[Jet]) -> Result<Vec<Jet>> {
        (self.f)(z)
    }

    pub fn eval_at(&self, p: &PhasePoint) -> Result<Vec<f64>> {
        Ok(values(&self.eval(&p.to_jets())?))
    }
}

/// Scalar-valued `p`-form; degree 0 is a function on `T₀M`.
#[derive(Clone)]
pub struct ScalarForm {
    degree: usize,
    f: Arc<ScalarFormFn>,
}

pub type ScalarField = ScalarForm;

impl ScalarForm {
    pub fn new(
        degree: usize,
        f: impl Fn(&[Jet], &[Vec<Jet>]) -> Result<Jet> + Send + Sync + 'static,
    ) -> Self {
        ScalarForm {
            degree,
            f: Arc::new(f),
        }
    }

    pub fn function(f: impl Fn(&[Jet]) -> Result<Jet> + Send + Sync + 'static) -> Self {
        ScalarForm::new(0, move |z, _| f(z))
    }

    pub fn zero(degree: usize) -> Self {
        ScalarForm::new(degree, |_, _| Ok(Jet::constant(0.0)))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn eval(&self, z: &[Jet], args: &[Vec<Jet>]) -> Result<Jet> {
        debug_assert_eq!(args.len(), self.degree);
        (self.f)(z, args)
    }

    pub fn eval_at(&self, p: &PhasePoint, args: &[Vec<f64>]) -> Result<f64> {
        let args: Vec<Vec<Jet>> = args.iter().map(|a| constant_vec(a)).collect();
        Ok(self.eval(&p.to_jets(), &args)?.value())
    }

    pub fn add(&self, other: &ScalarForm) -> ScalarForm {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &ScalarForm) -> ScalarForm {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &ScalarForm, sign: f64) -> ScalarForm {
        assert_eq!(self.degree, other.degree, "degree mismatch in sum");
        let (a, b) = (self.clone(), other.clone());
        ScalarForm::new(self.degree, move |z, args| {
            let u = a.eval(z, args)?;
            let v = b.eval(z, args)?;
            Ok(if sign > 0.0 { u + v } else { u - v })
        })
    }

    pub fn scale(&self, c: f64) -> ScalarForm {
        let a = self.clone();
        ScalarForm::new(self.degree, move |z, args| Ok(a.eval(z, args)? * c))
    }

    /// `f·ω` for a function `f`.
    pub fn times(&self, f: &ScalarField) -> ScalarForm {
        assert_eq!(f.degree, 0, "multiplier must be a function");
        let (a, f) = (self.clone(), f.clone());
        ScalarForm::new(self.degree, move |z, args| {
            Ok(f.eval(z, &[])? * a.eval(z, args)?)
        })
    }
}

/// Vector-valued `p`-form.
#[derive(Clone)]
pub struct VectorForm {
    degree: usize,
    f: Arc<VectorFormFn>,
}

impl VectorForm {
    pub fn new(
        degree: usize,
        f: impl Fn(&[Jet], &[Vec<Jet>]) -> Result<Vec<Jet>> + Send + Sync + 'static,
    ) -> Self {
        VectorForm {
            degree,
            f: Arc::new(f),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn eval(&self, z: &[Jet], args: &[Vec<Jet>]) -> Result<Vec<Jet>> {
        debug_assert_eq!(args.len(), self.degree);
        (self.f)(z, args)
    }

    pub fn eval_at(&self, p: &PhasePoint, args: &[Vec<f64>]) -> Result<Vec<f64>> {
        let args: Vec<Vec<Jet>> = args.iter().map(|a| constant_vec(a)).collect();
        Ok(values(&self.eval(&p.to_jets(), &args)?))
    }

    pub fn add(&self, other: &VectorForm) -> VectorForm {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &VectorForm) -> VectorForm {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &VectorForm, sign: f64) -> VectorForm {
        assert_eq!(self.degree, other.degree, "degree mismatch in sum");
        let (a, b) = (self.clone(), other.clone());
        VectorForm::new(self.degree, move |z, args| {
            let u = a.eval(z, args)?;
            let v = b.eval(z, args)?;
            Ok(u.into_iter()
                .zip(v)
                .map(|(p, q)| if sign > 0.0 { p + q } else { p - q })
                .collect())
        })
    }

    pub fn scale(&self, c: f64) -> VectorForm {
        let a = self.clone();
        VectorForm::new(self.degree, move |z, args| {
            Ok(a.eval(z, args)?.into_iter().map(|v| v * c).collect())
        })
    }

    /// `f·K` for a function `f`.
    pub fn times(&self, f: &ScalarField) -> VectorForm {
        assert_eq!(f.degree, 0, "multiplier must be a function");
        let (a, f) = (self.clone(), f.clone());
        VectorForm::new(self.degree, move |z, args| {
            let s = f.eval(z, &[])?;
            Ok(a.eval(z, args)?.into_iter().map(|v| &s * v).collect())
        })
    }
}

// ---------------------------------------------------------------------------
// differentiation plumbing

/// Objects built from jets that can be split into `ε_level`-free and
/// `ε_level` parts.
pub(crate) trait Split: Sized {
    fn split(self, level: usize) -> (Self, Self);
}

impl Split for Jet {
    fn split(self, level: usize) -> (Jet, Jet) {
        (self.primal(level), self.tangent(level))
    }
}

impl Split for Vec<Jet> {
    fn split(self, level: usize) -> (Vec<Jet>, Vec<Jet>) {
        self.into_iter().map(|j| j.split(level)).unzip()
    }
}

impl<A: Split, B: Split> Split for (A, B) {
    fn split(self, level: usize) -> ((A, B), (A, B)) {
        let (a0, a1) = self.0.split(level);
        let (b0, b1) = self.1.split(level);
        ((a0, b0), (a1, b1))
    }
}

pub(crate) fn depth_of(v: &[Jet]) -> usize {
    v.iter().map(Jet::depth).max().unwrap_or(0)
}

/// Value and derivative of `g` at `z` along the constant direction `dir`.
///
/// `held` lists every other jet input `g` reads, so the new infinitesimal is
/// opened above all of them. `g` must not capture jets from elsewhere.
pub(crate) fn jvp<T: Split>(
    z: &[Jet],
    dir: &[Jet],
    held: &[Vec<Jet>],
    g: impl FnOnce(&[Jet]) -> Result<T>,
) -> Result<(T, T)> {
    let level = held
        .iter()
        .map(|h| depth_of(h))
        .fold(depth_of(z).max(depth_of(dir)), usize::max);
    check_level(level)?;
    let zp: Vec<Jet> = z
        .iter()
        .zip(dir)
        .map(|(a, d)| a.perturb(d, level))
        .collect();
    Ok(g(&zp)?.split(level))
}

pub(crate) fn vec_add(a: Vec<Jet>, b: &[Jet]) -> Vec<Jet> {
    a.into_iter().zip(b).map(|(u, v)| u + v).collect()
}

pub(crate) fn vec_sub(a: Vec<Jet>, b: &[Jet]) -> Vec<Jet> {
    a.into_iter().zip(b).map(|(u, v)| u - v).collect()
}

pub(crate) fn vec_scale(a: Vec<Jet>, s: &Jet) -> Vec<Jet> {
    a.into_iter().map(|u| s * u).collect()
}
