//! Connection, Jacobi endomorphism, curvature and the curvature 1-form of a
//! spray, plus the checks built on them.
//!
//! Two independent routes are provided. The coordinate route differentiates
//! the spray coefficients `Gⁱ` directly:
//!
//! ```text
//! Nⁱⱼ = ∂Gⁱ/∂yʲ            h(a, b) = (a, −N a)
//! Φⁱⱼ = 2∂Gⁱ/∂xʲ − S(Nⁱⱼ) − Nⁱₖ Nᵏⱼ
//! Rⁱⱼₖ = δₖNⁱⱼ − δⱼNⁱₖ     δₖ = ∂/∂xᵏ − Nˡₖ ∂/∂yˡ
//! ```
//!
//! The Frölicher–Nijenhuis route builds `h = ½(Id − [S,J])`, `Φ = v∘[S,h]`
//! and `R = ½[h,h]` from the calculus module. Checks use the coordinate route;
//! tests compare the two.

mod check;

use alloc::vec;
use alloc::vec::Vec;

pub use check::{
    beltrami_check, beltrami_check_with, bianchi_check, bianchi_check_with, cc_check,
    cc_check_with, cc_point, flag_curvature_check, flag_curvature_check_with, hamel_check,
    hamel_check_with, hamel_point, invariants_point, projective_invariants_check,
    projective_invariants_check_with, summarize_cc, summarize_hamel, summarize_invariants,
    BeltramiOutcome, CcContext, CheckReport, PointFn, PointRecord, Sequential, Stat, Sweep,
    Tolerances, Verdict, COND_LIMIT,
};

use crate::calculus::{
    compose, fn_bracket_11, fn_bracket_vf, identity_endo, jvp, vertical_endo, PhasePoint,
    ScalarField, ScalarForm, VectorForm,
};
use crate::error::{Error, Result};
use crate::finsler::SprayData;
use crate::jet::Jet;
use crate::linalg::Mat;

fn unit(len: usize, k: usize) -> Vec<Jet> {
    let mut e = vec![Jet::constant(0.0); len];
    e[k] = Jet::constant(1.0);
    e
}

/// Pointwise isotropy data `Φ = ρJ − α⊗𝒞`.
#[derive(Debug, Clone)]
pub struct Isotropy {
    pub rho: f64,
    pub alpha: Vec<f64>,
    /// `max |Φⁱⱼ − ρδⁱⱼ + αⱼyⁱ| / max(1, max |Φⁱⱼ|)`
    pub residual: f64,
}

/// Curvature objects of one spray. Cheap to clone; nothing is cached.
#[derive(Debug, Clone)]
pub struct CurvaturePack {
    spray: SprayData,
    n: usize,
}

impl CurvaturePack {
    pub fn new(spray: &SprayData) -> Result<Self> {
        let n = spray.dim();
        if n < 2 {
            return Err(Error::UnsupportedDim {
                name: "curvature".into(),
                dim: n,
            });
        }
        Ok(CurvaturePack {
            spray: spray.clone(),
            n,
        })
    }

    pub fn spray(&self) -> &SprayData {
        &self.spray
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    // -----------------------------------------------------------------------
    // coordinate route, on jets

    /// `(Gⁱ, Nⁱⱼ)` at `z`.
    pub fn connection_at(&self, z: &[Jet]) -> Result<(Vec<Jet>, Mat<Jet>)> {
        let n = self.n;
        let mut g = None;
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let (g0, d) = jvp(z, &unit(2 * n, n + j), &[], |zp| self.spray.coeffs(zp))?;
            g.get_or_insert(g0);
            cols.push(d);
        }
        let nm = Mat::from_fn(n, |i, j| cols[j][i].clone());
        Ok((g.unwrap(), nm))
    }

    /// `h(eₖ) = (eₖ, −N eₖ)` for each `k`.
    fn horizontal_basis(&self, nm: &Mat<Jet>) -> Vec<Vec<Jet>> {
        let n = self.n;
        (0..n)
            .map(|k| {
                let mut d = unit(2 * n, k);
                for l in 0..n {
                    d[n + l] = -nm[(l, k)].clone();
                }
                d
            })
            .collect()
    }

    /// `Φⁱⱼ` at `z`.
    pub fn jacobi_at(&self, z: &[Jet]) -> Result<Mat<Jet>> {
        let n = self.n;
        let (g, nm) = self.connection_at(z)?;
        let mut s_dir = Vec::with_capacity(2 * n);
        s_dir.extend_from_slice(&z[n..]);
        s_dir.extend(g.iter().map(|v| v * -2.0));
        let (_, sn) = jvp(z, &s_dir, &[], |zp| {
            Ok(self.connection_at(zp)?.1.into_vec())
        })?;
        let mut dx = Vec::with_capacity(n);
        for j in 0..n {
            dx.push(jvp(z, &unit(2 * n, j), &[], |zp| self.spray.coeffs(zp))?.1);
        }
        let nn = nm.matmul(&nm);
        Ok(Mat::from_fn(n, |i, j| {
            &dx[j][i] * 2.0 - &sn[i * n + j] - &nn[(i, j)]
        }))
    }

    /// `Rⁱⱼₖ` at `z`, flattened as `[(i·n + j)·n + k]`.
    pub fn curvature_at(&self, z: &[Jet]) -> Result<Vec<Jet>> {
        let n = self.n;
        let (_, nm) = self.connection_at(z)?;
        // dn[k] = δₖN, row-major
        let mut dn = Vec::with_capacity(n);
        for d in self.horizontal_basis(&nm) {
            dn.push(jvp(z, &d, &[], |zp| Ok(self.connection_at(zp)?.1.into_vec()))?.1);
        }
        let mut r = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    r.push(&dn[k][i * n + j] - &dn[j][i * n + k]);
                }
            }
        }
        Ok(r)
    }

    /// `(ρ, α)` from `Φ` at a point with fiber coordinates `y`.
    fn rho_alpha(&self, phi: &Mat<Jet>, y: &[Jet]) -> (Jet, Vec<Jet>) {
        let n = self.n;
        let rho = phi.trace() * (1.0 / (n as f64 - 1.0));
        let y2: Jet = y.iter().map(|v| v * v).sum();
        let alpha = (0..n)
            .map(|j| {
                let mut acc = Jet::constant(0.0);
                for i in 0..n {
                    let mut e = phi[(i, j)].clone();
                    if i == j {
                        e -= &rho;
                    }
                    acc -= &y[i] * e;
                }
                acc / &y2
            })
            .collect();
        (rho, alpha)
    }

    /// Covector `ξₖ = (αₖ + ∂ρ/∂yᵏ)/3` at `z`.
    pub fn xi_at(&self, z: &[Jet]) -> Result<Vec<Jet>> {
        let n = self.n;
        let mut phi0 = None;
        let mut drho = Vec::with_capacity(n);
        for k in 0..n {
            let (p0, dp) = jvp(z, &unit(2 * n, n + k), &[], |zp| {
                Ok(self.jacobi_at(zp)?.into_vec())
            })?;
            phi0.get_or_insert(p0);
            let dp = Mat::from_vec(n, dp);
            drho.push(dp.trace() * (1.0 / (n as f64 - 1.0)));
        }
        let phi = Mat::from_vec(n, phi0.unwrap());
        let (_, alpha) = self.rho_alpha(&phi, &z[n..]);
        Ok(alpha
            .into_iter()
            .zip(drho)
            .map(|(a, d)| (a + d) * (1.0 / 3.0))
            .collect())
    }

    /// `(ξₖ, ∂ξₖ/∂yʲ)` at `z`, the matrix indexed `[(j, k)]`.
    pub fn xi_vertical_at(&self, z: &[Jet]) -> Result<(Vec<Jet>, Mat<Jet>)> {
        let n = self.n;
        let mut xi = None;
        let mut rows = Vec::with_capacity(n);
        for j in 0..n {
            let (x0, d) = jvp(z, &unit(2 * n, n + j), &[], |zp| self.xi_at(zp))?;
            xi.get_or_insert(x0);
            rows.push(d);
        }
        Ok((xi.unwrap(), Mat::from_fn(n, |j, k| rows[j][k].clone())))
    }

    /// `δⱼξₖ` at `z`, indexed `[(j, k)]`.
    pub fn xi_horizontal_at(&self, z: &[Jet]) -> Result<Mat<Jet>> {
        let n = self.n;
        let (_, nm) = self.connection_at(z)?;
        let mut rows = Vec::with_capacity(n);
        for d in self.horizontal_basis(&nm) {
            rows.push(jvp(z, &d, &[], |zp| self.xi_at(zp))?.1);
        }
        Ok(Mat::from_fn(n, |j, k| rows[j][k].clone()))
    }

    /// `(ξₖ, ∂ξₖ/∂yʲ, δⱼξₖ)` at `z`; the 2-forms `d_Jξ` and `d_hξ` are the
    /// antisymmetrisations of the two matrices.
    pub fn xi_derivatives_at(&self, z: &[Jet]) -> Result<(Vec<Jet>, Mat<Jet>, Mat<Jet>)> {
        let (xi, vert) = self.xi_vertical_at(z)?;
        Ok((xi, vert, self.xi_horizontal_at(z)?))
    }

    // -----------------------------------------------------------------------
    // coordinate route, at points

    pub fn connection_coeffs(&self, p: &PhasePoint) -> Result<Mat<f64>> {
        Ok(self.connection_at(&p.to_jets())?.1.values())
    }

    pub fn jacobi_matrix(&self, p: &PhasePoint) -> Result<Mat<f64>> {
        Ok(self.jacobi_at(&p.to_jets())?.values())
    }

    pub fn isotropy_decompose(&self, p: &PhasePoint) -> Result<Isotropy> {
        let z = p.to_jets();
        let phi = self.jacobi_at(&z)?;
        let (rho, alpha) = self.rho_alpha(&phi, &z[self.n..]);
        let phi = phi.values();
        let (rho, alpha): (f64, Vec<f64>) = (rho.value(), alpha.iter().map(Jet::value).collect());
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                let iso = if i == j { rho } else { 0.0 } - alpha[j] * p.y[i];
                worst = worst.max((phi[(i, j)] - iso).abs());
            }
        }
        Ok(Isotropy {
            rho,
            alpha,
            residual: worst / phi.max_abs().max(1.0),
        })
    }

    pub fn xi_covector(&self, p: &PhasePoint) -> Result<Vec<f64>> {
        Ok(self.xi_at(&p.to_jets())?.iter().map(Jet::value).collect())
    }

    // -----------------------------------------------------------------------
    // forms, coordinate route

    /// Semi-basic vector 1-form `(a, b) ↦ (0, M(z)a)` from a matrix function.
    fn semi_basic_endo(
        &self,
        m: impl Fn(&CurvaturePack, &[Jet]) -> Result<Mat<Jet>> + Send + Sync + 'static,
    ) -> VectorForm {
        let (pack, n) = (self.clone(), self.n);
        VectorForm::new(1, move |z, args| {
            let mat = m(&pack, z)?;
            let mut out = vec![Jet::constant(0.0); 2 * n];
            out[n..].clone_from_slice(&mat.mul_vec(&args[0][..n]));
            Ok(out)
        })
    }

    /// Horizontal projector `h(a, b) = (a, −N a)`.
    pub fn h(&self) -> VectorForm {
        let (pack, n) = (self.clone(), self.n);
        VectorForm::new(1, move |z, args| {
            let (_, nm) = pack.connection_at(z)?;
            let a = &args[0][..n];
            let na = nm.mul_vec(a);
            let mut out = a.to_vec();
            out.extend(na.into_iter().map(|v| -v));
            Ok(out)
        })
    }

    /// Vertical projector `v(a, b) = (0, b + N a)`.
    pub fn v(&self) -> VectorForm {
        let (pack, n) = (self.clone(), self.n);
        VectorForm::new(1, move |z, args| {
            let (_, nm) = pack.connection_at(z)?;
            let na = nm.mul_vec(&args[0][..n]);
            let mut out = vec![Jet::constant(0.0); n];
            out.extend(args[0][n..].iter().zip(na).map(|(b, c)| b + c));
            Ok(out)
        })
    }

    pub fn phi(&self) -> VectorForm {
        self.semi_basic_endo(|p, z| p.jacobi_at(z))
    }

    pub fn r(&self) -> VectorForm {
        let (pack, n) = (self.clone(), self.n);
        VectorForm::new(2, move |z, args| {
            let r = pack.curvature_at(z)?;
            let (a, c) = (&args[0][..n], &args[1][..n]);
            let mut out = vec![Jet::constant(0.0); 2 * n];
            for i in 0..n {
                let mut acc = Jet::constant(0.0);
                for j in 0..n {
                    for k in 0..n {
                        acc += &r[(i * n + j) * n + k] * &(&a[j] * &c[k]);
                    }
                }
                out[n + i] = acc;
            }
            Ok(out)
        })
    }

    /// Ricci scalar `ρ = Tr(Φ)/(n−1)`.
    pub fn rho(&self) -> ScalarField {
        let pack = self.clone();
        ScalarField::function(move |z| {
            let phi = pack.jacobi_at(z)?;
            Ok(phi.trace() * (1.0 / (pack.n as f64 - 1.0)))
        })
    }

    pub fn alpha(&self) -> ScalarForm {
        let (pack, n) = (self.clone(), self.n);
        ScalarForm::new(1, move |z, args| {
            let phi = pack.jacobi_at(z)?;
            let (_, alpha) = pack.rho_alpha(&phi, &z[n..]);
            Ok(alpha.iter().zip(&args[0][..n]).map(|(a, v)| a * v).sum())
        })
    }

    /// Curvature 1-form `ξ = (α + d_Jρ)/3`, one differentiation per argument.
    pub fn xi(&self) -> ScalarForm {
        let (pack, n) = (self.clone(), self.n);
        ScalarForm::new(1, move |z, args| {
            let v = &args[0];
            let mut dir = vec![Jet::constant(0.0); 2 * n];
            dir[n..].clone_from_slice(&v[..n]);
            let (p0, dp) = jvp(z, &dir, args, |zp| Ok(pack.jacobi_at(zp)?.into_vec()))?;
            let (_, alpha) = pack.rho_alpha(&Mat::from_vec(n, p0), &z[n..]);
            let djrho = Mat::from_vec(n, dp).trace() * (1.0 / (n as f64 - 1.0));
            let av: Jet = alpha.iter().zip(&v[..n]).map(|(a, b)| a * b).sum();
            Ok((av + djrho) * (1.0 / 3.0))
        })
    }

    fn xi_two_form(&self, horizontal: bool) -> ScalarForm {
        let (pack, n) = (self.clone(), self.n);
        ScalarForm::new(2, move |z, args| {
            let m = if horizontal {
                pack.xi_horizontal_at(z)?
            } else {
                pack.xi_vertical_at(z)?.1
            };
            Ok(antisym_pair(&m, &args[0][..n], &args[1][..n]))
        })
    }

    /// `d_Jξ` from the coordinate derivatives of `ξ`.
    pub fn dj_xi(&self) -> ScalarForm {
        self.xi_two_form(false)
    }

    /// `d_hξ` from the coordinate derivatives of `ξ`.
    pub fn dh_xi(&self) -> ScalarForm {
        self.xi_two_form(true)
    }

    // -----------------------------------------------------------------------
    // Frölicher–Nijenhuis route

    /// `h = ½(Id − [S,J])`
    pub fn h_fn(&self) -> VectorForm {
        let sj = fn_bracket_vf(&self.spray.field(), &vertical_endo(self.n)).expect("degree 1");
        identity_endo().sub(&sj).scale(0.5)
    }

    pub fn v_fn(&self) -> VectorForm {
        identity_endo().sub(&self.h_fn())
    }

    /// `Φ = v∘[S,h]` with `h`, `v` from [`Self::h_fn`], [`Self::v_fn`].
    pub fn phi_fn(&self) -> VectorForm {
        let sh = fn_bracket_vf(&self.spray.field(), &self.h_fn()).expect("degree 1");
        compose(&self.v_fn(), &sh).expect("degree 1")
    }

    /// `R = ½[h,h]` with `h` from the coordinate route.
    pub fn r_fn(&self) -> VectorForm {
        let h = self.h();
        fn_bracket_11(&h, &h).expect("degree 1").scale(0.5)
    }
}

/// `Σⱼₖ Mⱼₖ (uʲwᵏ − uᵏwʲ)`
pub(crate) fn antisym_pair(m: &Mat<Jet>, u: &[Jet], w: &[Jet]) -> Jet {
    let n = m.dim();
    let mut acc = Jet::constant(0.0);
    for j in 0..n {
        for k in 0..n {
            acc += &m[(j, k)] * &(&u[j] * &w[k] - &u[k] * &w[j]);
        }
    }
    acc
}

/// `(h, v)` from the coordinate route.
pub fn connection(spray: &SprayData) -> Result<(VectorForm, VectorForm)> {
    let pack = CurvaturePack::new(spray)?;
    Ok((pack.h(), pack.v()))
}

pub fn jacobi_endomorphism(spray: &SprayData) -> Result<VectorForm> {
    Ok(CurvaturePack::new(spray)?.phi())
}

pub fn curvature_tensor(spray: &SprayData) -> Result<VectorForm> {
    Ok(CurvaturePack::new(spray)?.r())
}

pub fn curvature_one_form(spray: &SprayData) -> Result<ScalarForm> {
    Ok(CurvaturePack::new(spray)?.xi())
}

pub fn isotropy_decompose(spray: &SprayData, p: &PhasePoint) -> Result<Isotropy> {
    CurvaturePack::new(spray)?.isotropy_decompose(p)
}
