use alloc::vec;
use alloc::vec::Vec;

use super::{
    constant_vec, jvp, vec_add, vec_scale, vec_sub, PhasePoint, ScalarField, ScalarForm,
    VectorField, VectorForm,
};
use crate::error::{Error, Result};
use crate::jet::{check_level, Jet};

fn expect_degree(found: usize, expected: usize) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        Err(Error::Degree { expected, found })
    }
}

/// `𝒞 = yⁱ ∂/∂yⁱ`
pub fn liouville(dim: usize) -> VectorField {
    VectorField::new(move |z| {
        let mut out = vec![Jet::constant(0.0); 2 * dim];
        out[dim..].clone_from_slice(&z[dim..2 * dim]);
        Ok(out)
    })
}

/// `J = dxⁱ ⊗ ∂/∂yⁱ`: `(a, b) ↦ (0, a)`
pub fn vertical_endo(dim: usize) -> VectorForm {
    VectorForm::new(1, move |_, args| {
        let v = &args[0];
        let mut out = vec![Jet::constant(0.0); 2 * dim];
        out[dim..].clone_from_slice(&v[..dim]);
        Ok(out)
    })
}

pub fn identity_endo() -> VectorForm {
    VectorForm::new(1, |_, args| Ok(args[0].clone()))
}

/// Mixed directional derivative `∂_{dirs[k−1]} ⋯ ∂_{dirs[0]} f` at `p`.
pub fn directional_derivative(f: &ScalarField, p: &PhasePoint, dirs: &[Vec<f64>]) -> Result<f64> {
    expect_degree(f.degree(), 0)?;
    let n2 = 2 * p.dim();
    if let Some(bad) = dirs.iter().find(|d| d.len() != n2) {
        return Err(Error::DimMismatch {
            expected: n2,
            found: bad.len(),
        });
    }
    let k = dirs.len();
    if k > 0 {
        check_level(k - 1)?;
    }
    let z: Vec<Jet> = p
        .to_jets()
        .into_iter()
        .enumerate()
        .map(|(i, mut j)| {
            for (level, d) in dirs.iter().enumerate() {
                j = j.perturb(&Jet::constant(d[i]), level);
            }
            j
        })
        .collect();
    Ok(f.eval(&z, &[])?.coeff((1usize << k) - 1))
}

/// `X(f)` as a new function.
pub fn vector_derivative(x: &VectorField, f: &ScalarField) -> Result<ScalarField> {
    expect_degree(f.degree(), 0)?;
    let (x, f) = (x.clone(), f.clone());
    Ok(ScalarForm::function(move |z| {
        let dir = x.eval(z)?;
        Ok(jvp(z, &dir, &[], |zp| f.eval(zp, &[]))?.1)
    }))
}

/// `[X, Y] = D_Y·X − D_X·Y`
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> VectorField {
    let (x, y) = (x.clone(), y.clone());
    VectorField::new(move |z| {
        let xv = x.eval(z)?;
        let yv = y.eval(z)?;
        let (_, dy_x) = jvp(z, &xv, &[], |zp| y.eval(zp))?;
        let (_, dx_y) = jvp(z, &yv, &[], |zp| x.eval(zp))?;
        Ok(vec_sub(dy_x, &dx_y))
    })
}

/// `[X, K](Y) = [X, KY] − K[X, Y]` for a vector-valued 1-form `K`.
pub fn fn_bracket_vf(x: &VectorField, k: &VectorForm) -> Result<VectorForm> {
    expect_degree(k.degree(), 1)?;
    let (x, k) = (x.clone(), k.clone());
    Ok(VectorForm::new(1, move |z, args| {
        let xv = x.eval(z)?;
        let ky = k.eval(z, args)?;
        // [X, KY] = ∂_X(KY) − ∂_{KY}X
        let (_, d_ky) = jvp(z, &xv, args, |zp| k.eval(zp, args))?;
        let (_, d_x_ky) = jvp(z, &ky, &[], |zp| x.eval(zp))?;
        // [X, Y] = −∂_Y X for constant Y
        let (_, d_x_y) = jvp(z, &args[0], &[], |zp| x.eval(zp))?;
        let k_term = k.eval(z, &[d_x_y])?;
        Ok(vec_add(vec_sub(d_ky, &d_x_ky), &k_term))
    }))
}

/// Frölicher–Nijenhuis bracket of two vector-valued 1-forms, evaluated on
/// constant vectors:
/// `[K,L](X,Y) = [KX,LY] − [KY,LX] − L([KX,Y] − [KY,X]) − K([LX,Y] − [LY,X])`.
pub fn fn_bracket_11(k: &VectorForm, l: &VectorForm) -> Result<VectorForm> {
    expect_degree(k.degree(), 1)?;
    expect_degree(l.degree(), 1)?;
    let (k, l) = (k.clone(), l.clone());
    Ok(VectorForm::new(2, move |z, args| {
        let (xa, ya) = (&args[0..1], &args[1..2]);
        let (xv, yv) = (&args[0], &args[1]);
        let kx = k.eval(z, xa)?;
        let ky = k.eval(z, ya)?;
        let lx = l.eval(z, xa)?;
        let ly = l.eval(z, ya)?;
        // Lie bracket of the fields A(z) = M(z)U and B(z) = N(z)V
        let field_bracket = |a_val: &[Jet],
                             a: &VectorForm,
                             ua: &[Vec<Jet>],
                             b_val: &[Jet],
                             b: &VectorForm,
                             ub: &[Vec<Jet>]|
         -> Result<Vec<Jet>> {
            let (_, db) = jvp(z, a_val, ub, |zp| b.eval(zp, ub))?;
            let (_, da) = jvp(z, b_val, ua, |zp| a.eval(zp, ua))?;
            Ok(vec_sub(db, &da))
        };
        let t1 = field_bracket(&kx, &k, xa, &ly, &l, ya)?;
        let t2 = field_bracket(&ky, &k, ya, &lx, &l, xa)?;
        // [MX, Y] − [MY, X] = ∂_X(MY) − ∂_Y(MX)
        let const_bracket = |m: &VectorForm| -> Result<Vec<Jet>> {
            let (_, d_my) = jvp(z, xv, ya, |zp| m.eval(zp, ya))?;
            let (_, d_mx) = jvp(z, yv, xa, |zp| m.eval(zp, xa))?;
            Ok(vec_sub(d_my, &d_mx))
        };
        let t3 = l.eval(z, &[const_bracket(&k)?])?;
        let t4 = k.eval(z, &[const_bracket(&l)?])?;
        Ok(vec_sub(vec_sub(vec_sub(t1, &t2), &t3), &t4))
    }))
}

/// `dω(v₀..v_p) = Σᵢ (−1)ⁱ ∂_{vᵢ}[ω(v₀..v̂ᵢ..v_p)]`
pub fn exterior_d(w: &ScalarForm) -> ScalarForm {
    let p = w.degree();
    let w = w.clone();
    ScalarForm::new(p + 1, move |z, args| {
        let mut acc = Jet::constant(0.0);
        for i in 0..=p {
            let rest: Vec<Vec<Jet>> = args
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, v)| v.clone())
                .collect();
            let (_, d) = jvp(z, &args[i], &rest, |zp| w.eval(zp, &rest))?;
            if i % 2 == 0 {
                acc += d;
            } else {
                acc -= d;
            }
        }
        Ok(acc)
    })
}

/// Insertion `i_K ω`.
///
/// For `K` of degree 1: `(i_Kω)(v₁..v_p) = Σᵢ ω(v₁..Kvᵢ..v_p)`, zero on functions.
/// For `K` of degree `k > 1` only 1-forms are supported: `(i_Kω) = ω∘K`.
pub fn i_k(k: &VectorForm, w: &ScalarForm) -> Result<ScalarForm> {
    let (kd, p) = (k.degree(), w.degree());
    let (k, w) = (k.clone(), w.clone());
    if kd == 1 {
        if p == 0 {
            return Ok(ScalarForm::zero(0));
        }
        return Ok(ScalarForm::new(p, move |z, args| {
            let mut acc = Jet::constant(0.0);
            for i in 0..p {
                let mut a = args.to_vec();
                a[i] = k.eval(z, &args[i..i + 1])?;
                acc += w.eval(z, &a)?;
            }
            Ok(acc)
        }));
    }
    expect_degree(p, 1)?;
    Ok(ScalarForm::new(kd, move |z, args| {
        let kv = k.eval(z, args)?;
        w.eval(z, &[kv])
    }))
}

/// `d_K = i_K∘d − (−1)^{k−1} d∘i_K`, for `K` of degree 1 on any form, or any
/// degree on functions.
pub fn d_k(k: &VectorForm, w: &ScalarForm) -> Result<ScalarForm> {
    let dw = exterior_d(w);
    if w.degree() == 0 {
        return i_k(k, &dw);
    }
    expect_degree(k.degree(), 1)?;
    let a = i_k(k, &dw)?;
    let b = exterior_d(&i_k(k, w)?);
    Ok(a.sub(&b))
}

/// Trace of a semi-basic vector 1-form `K = Kⁱⱼ dxʲ ⊗ ∂/∂yⁱ`, i.e. `Kⁱᵢ`.
///
/// Every evaluation verifies semi-basicity on the value part (vanishing on
/// verticals, vertical values) against `tol`.
pub fn semi_basic_trace(k: &VectorForm, dim: usize, tol: f64) -> Result<ScalarField> {
    expect_degree(k.degree(), 1)?;
    let k = k.clone();
    Ok(ScalarForm::function(move |z| {
        let mut trace = Jet::constant(0.0);
        let mut scale = 1.0f64;
        let mut bad = 0.0f64;
        for j in 0..dim {
            let mut e = vec![Jet::constant(0.0); 2 * dim];
            e[j] = Jet::constant(1.0);
            let col = k.eval(z, &[e])?;
            for (i, c) in col.iter().enumerate() {
                if i < dim {
                    bad = bad.max(c.value().abs());
                } else {
                    scale = scale.max(c.value().abs());
                }
            }
            trace += &col[dim + j];
            let mut ev = vec![Jet::constant(0.0); 2 * dim];
            ev[dim + j] = Jet::constant(1.0);
            for c in k.eval(z, &[ev])? {
                bad = bad.max(c.value().abs());
            }
        }
        if bad > tol * scale {
            return Err(Error::NotSemiBasic {
                residual: bad / scale,
            });
        }
        Ok(trace)
    }))
}

/// Ordered `p`-subsets of `0..p+q` with the sign of the matching shuffle.
fn shuffles(p: usize, q: usize) -> Vec<(Vec<usize>, Vec<usize>, f64)> {
    let total = p + q;
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << total) {
        if mask.count_ones() as usize != p {
            continue;
        }
        let first: Vec<usize> = (0..total).filter(|i| mask & (1 << i) != 0).collect();
        let second: Vec<usize> = (0..total).filter(|i| mask & (1 << i) == 0).collect();
        let inversions: usize = first.iter().enumerate().map(|(k, &s)| s - k).sum();
        let sign = if inversions.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        out.push((first, second, sign));
    }
    out
}

fn pick(args: &[Vec<Jet>], idx: &[usize]) -> Vec<Vec<Jet>> {
    idx.iter().map(|&i| args[i].clone()).collect()
}

/// `(α∧β)(v₁..v_{p+q}) = Σ_shuffles sign·α(..)β(..)`
pub fn wedge(a: &ScalarForm, b: &ScalarForm) -> ScalarForm {
    let (p, q) = (a.degree(), b.degree());
    let sh = shuffles(p, q);
    let (a, b) = (a.clone(), b.clone());
    ScalarForm::new(p + q, move |z, args| {
        let mut acc = Jet::constant(0.0);
        for (first, second, sign) in &sh {
            let t = a.eval(z, &pick(args, first))? * b.eval(z, &pick(args, second))?;
            if *sign > 0.0 {
                acc += t;
            } else {
                acc -= t;
            }
        }
        Ok(acc)
    })
}

/// `ω∧K` for a scalar `p`-form and a vector-valued `q`-form.
pub fn wedge_vector(w: &ScalarForm, k: &VectorForm) -> VectorForm {
    let (p, q) = (w.degree(), k.degree());
    let sh = shuffles(p, q);
    let (w, k) = (w.clone(), k.clone());
    VectorForm::new(p + q, move |z, args| {
        let mut acc: Option<Vec<Jet>> = None;
        for (first, second, sign) in &sh {
            let s = w.eval(z, &pick(args, first))? * *sign;
            let t = vec_scale(k.eval(z, &pick(args, second))?, &s);
            acc = Some(match acc {
                None => t,
                Some(a) => vec_add(a, &t),
            });
        }
        Ok(acc.unwrap_or_default())
    })
}

/// `ω ⊗ X`
pub fn tensor_field(w: &ScalarForm, x: &VectorField) -> VectorForm {
    let (w, x) = (w.clone(), x.clone());
    VectorForm::new(w.degree(), move |z, args| {
        let s = w.eval(z, args)?;
        Ok(vec_scale(x.eval(z)?, &s))
    })
}

/// `i_X ω = ω(X, ·, …)`
pub fn insert_field(x: &VectorField, w: &ScalarForm) -> Result<ScalarForm> {
    if w.degree() == 0 {
        return Err(Error::Degree {
            expected: 1,
            found: 0,
        });
    }
    let (x, w) = (x.clone(), w.clone());
    Ok(ScalarForm::new(w.degree() - 1, move |z, args| {
        let mut a = Vec::with_capacity(args.len() + 1);
        a.push(x.eval(z)?);
        a.extend_from_slice(args);
        w.eval(z, &a)
    }))
}

/// `i_X K = K(X, ·, …)` for a vector-valued form.
pub fn insert_field_vector(x: &VectorField, k: &VectorForm) -> Result<VectorForm> {
    if k.degree() == 0 {
        return Err(Error::Degree {
            expected: 1,
            found: 0,
        });
    }
    let (x, k) = (x.clone(), k.clone());
    Ok(VectorForm::new(k.degree() - 1, move |z, args| {
        let mut a = Vec::with_capacity(args.len() + 1);
        a.push(x.eval(z)?);
        a.extend_from_slice(args);
        k.eval(z, &a)
    }))
}

/// `K∘L` for a vector 1-form `K` and a vector `p`-form `L`.
pub fn compose(k: &VectorForm, l: &VectorForm) -> Result<VectorForm> {
    expect_degree(k.degree(), 1)?;
    let (k, l) = (k.clone(), l.clone());
    Ok(VectorForm::new(l.degree(), move |z, args| {
        let inner = l.eval(z, args)?;
        k.eval(z, &[inner])
    }))
}

impl VectorField {
    /// Field `z ↦ (c₁, …)` with constant components.
    pub fn constant(components: &[f64]) -> VectorField {
        let c = constant_vec(components);
        VectorField::new(move |_| Ok(c.clone()))
    }
}
