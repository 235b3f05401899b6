//! Finite-difference oracles shared by the integration tests. Nothing here
//! touches jets: every derivative is a plain `f64` difference quotient.
#![allow(dead_code, clippy::needless_range_loop, clippy::type_complexity)]

use spraylab_core::calculus::PhasePoint;
use spraylab_core::dsl::MetricSpec;

/// Central difference of order `k ≤ 4` of `f` at `t = 0`, Richardson-extrapolated.
pub fn fd(f: &dyn Fn(f64) -> f64, k: usize) -> f64 {
    let h = match k {
        0 => return f(0.0),
        1 => 1e-3,
        2 => 4e-3,
        3 => 1e-2,
        _ => 2e-2,
    };
    let d = |h: f64| -> f64 {
        // k-th central difference with nodes at (i − k/2)·h
        let mut acc = 0.0;
        let mut binom = 1.0;
        for i in 0..=k {
            let t = (i as f64 - k as f64 / 2.0) * h;
            let sign = if (k - i).is_multiple_of(2) { 1.0 } else { -1.0 };
            acc += sign * binom * f(t);
            binom = binom * (k - i) as f64 / (i + 1) as f64;
        }
        acc / h.powi(k as i32)
    };
    // two Richardson steps on an h² error expansion
    let (a, b, c) = (d(h), d(h / 2.0), d(h / 4.0));
    let ab = (4.0 * b - a) / 3.0;
    let bc = (4.0 * c - b) / 3.0;
    (16.0 * bc - ab) / 15.0
}

/// Mixed derivative `∂_{dirs[..]}` of `f` at `z` by nesting [`fd`].
pub fn fd_dirs(f: &dyn Fn(&[f64]) -> f64, z: &[f64], dirs: &[Vec<f64>]) -> f64 {
    match dirs.split_last() {
        None => f(z),
        Some((last, rest)) => {
            let line = |t: f64| {
                let zt: Vec<f64> = z.iter().zip(last).map(|(a, d)| a + t * d).collect();
                fd_dirs(f, &zt, rest)
            };
            fd(&line, 1)
        }
    }
}

/// `F²(x, y)` in plain floats.
pub fn energy(m: &MetricSpec, x: &[f64], y: &[f64]) -> f64 {
    let f = m.expr.eval(x, y).unwrap();
    f * f
}

/// Riemannian `g_ij(x)` by polarisation of `F²`, exact for quadratic forms.
pub fn riemann_g(m: &MetricSpec, x: &[f64]) -> Vec<Vec<f64>> {
    let n = m.dim;
    let e = |i: usize, j: usize| {
        let mut y = vec![0.0; n];
        y[i] += 1.0;
        y[j] += 1.0;
        y
    };
    let q = |y: &[f64]| energy(m, x, y);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        q(&e(i, i)) / 4.0
                    } else {
                        (q(&e(i, j)) - q(&e(i, i)) / 4.0 - q(&e(j, j)) / 4.0) / 2.0
                    }
                })
                .collect()
        })
        .collect()
}

fn inv(g: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = g.len();
    let mut a: Vec<Vec<f64>> = g.to_vec();
    let mut b: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap();
        a.swap(k, p);
        b.swap(k, p);
        let d = a[k][k];
        for j in 0..n {
            a[k][j] /= d;
            b[k][j] /= d;
        }
        for i in 0..n {
            if i != k {
                let f = a[i][k];
                for j in 0..n {
                    a[i][j] -= f * a[k][j];
                    b[i][j] -= f * b[k][j];
                }
            }
        }
    }
    b
}

/// `∂_k g_ij` and `∂_k∂_l g_ij` by 4th-order central stencils.
fn g_derivatives(m: &MetricSpec, x: &[f64]) -> (Vec<Vec<Vec<f64>>>, Vec<Vec<Vec<Vec<f64>>>>) {
    let n = m.dim;
    let h = 1e-3;
    let at = |shift: &[(usize, f64)]| {
        let mut xs = x.to_vec();
        for &(k, s) in shift {
            xs[k] += s;
        }
        riemann_g(m, &xs)
    };
    let d1 = |k: usize| -> Vec<Vec<f64>> {
        let (m2, m1, p1, p2) = (
            at(&[(k, -2.0 * h)]),
            at(&[(k, -h)]),
            at(&[(k, h)]),
            at(&[(k, 2.0 * h)]),
        );
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (m2[i][j] - 8.0 * m1[i][j] + 8.0 * p1[i][j] - p2[i][j]) / (12.0 * h))
                    .collect()
            })
            .collect()
    };
    let dg: Vec<Vec<Vec<f64>>> = (0..n).map(d1).collect();
    let hh = 2e-3;
    let d2 = |k: usize, l: usize| -> Vec<Vec<f64>> {
        if k == l {
            let c = at(&[]);
            let (m2, m1, p1, p2) = (
                at(&[(k, -2.0 * hh)]),
                at(&[(k, -hh)]),
                at(&[(k, hh)]),
                at(&[(k, 2.0 * hh)]),
            );
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            (-m2[i][j] + 16.0 * m1[i][j] - 30.0 * c[i][j] + 16.0 * p1[i][j]
                                - p2[i][j])
                                / (12.0 * hh * hh)
                        })
                        .collect()
                })
                .collect()
        } else {
            // product of two 4th-order first-difference stencils
            let w = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
            let mut acc = vec![vec![0.0; n]; n];
            for &(a, wa) in &w {
                for &(b, wb) in &w {
                    let g = at(&[(k, a * hh), (l, b * hh)]);
                    for i in 0..n {
                        for j in 0..n {
                            acc[i][j] += wa * wb * g[i][j];
                        }
                    }
                }
            }
            let s = 144.0 * hh * hh;
            acc.iter()
                .map(|r| r.iter().map(|v| v / s).collect())
                .collect()
        }
    };
    let ddg = (0..n).map(|k| (0..n).map(|l| d2(k, l)).collect()).collect();
    (dg, ddg)
}

/// Christoffel symbols `Γⁱ_jk` of the Riemannian metric `F`, indexed `[i][j][k]`.
pub fn christoffel(m: &MetricSpec, x: &[f64]) -> Vec<Vec<Vec<f64>>> {
    let n = m.dim;
    let gi = inv(&riemann_g(m, x));
    let (dg, _) = g_derivatives(m, x);
    // dg[k][i][j] = ∂_k g_ij
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n)
                        .map(|k| {
                            (0..n)
                                .map(|l| 0.5 * gi[i][l] * (dg[k][l][j] + dg[j][l][k] - dg[l][j][k]))
                                .sum()
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Classical spray coefficients `½ Γⁱ_jk yʲ yᵏ`.
pub fn christoffel_spray(m: &MetricSpec, p: &PhasePoint) -> Vec<f64> {
    let n = m.dim;
    let c = christoffel(m, &p.x);
    (0..n)
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..n {
                for k in 0..n {
                    acc += 0.5 * c[i][j][k] * p.y[j] * p.y[k];
                }
            }
            acc
        })
        .collect()
}

/// Sectional curvature of the plane spanned by `u`, `v`, from
/// `R_iklm = ½(g_im,kl + g_kl,im − g_il,km − g_km,il) + g_np(Γⁿ_kl Γᵖ_im − Γⁿ_km Γᵖ_il)`
/// and `K = R(u,v,u,v) / (g(u,u)g(v,v) − g(u,v)²)`.
pub fn sectional_curvature(m: &MetricSpec, x: &[f64], u: &[f64], v: &[f64]) -> f64 {
    let n = m.dim;
    let g = riemann_g(m, x);
    let (_, ddg) = g_derivatives(m, x);
    let c = christoffel(m, x);
    // ddg[a][b][i][j] = ∂_a∂_b g_ij
    let r = |i: usize, k: usize, l: usize, mm: usize| -> f64 {
        let mut s =
            0.5 * (ddg[k][l][i][mm] + ddg[i][mm][k][l] - ddg[k][mm][i][l] - ddg[i][l][k][mm]);
        for a in 0..n {
            for b in 0..n {
                s += g[a][b] * (c[a][k][l] * c[b][i][mm] - c[a][k][mm] * c[b][i][l]);
            }
        }
        s
    };
    let mut num = 0.0;
    for i in 0..n {
        for k in 0..n {
            for l in 0..n {
                for mm in 0..n {
                    num += r(i, k, l, mm) * u[i] * v[k] * u[l] * v[mm];
                }
            }
        }
    }
    let gq = |a: &[f64], b: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += g[i][j] * a[i] * b[j];
            }
        }
        s
    };
    num / (gq(u, u) * gq(v, v) - gq(u, v) * gq(u, v))
}

/// Classical Hamel expressions `yᵏ ∂²P/∂xᵏ∂yⁱ − ∂P/∂xⁱ` for the flat spray.
pub fn classical_hamel(p: &dyn Fn(&[f64]) -> f64, pt: &PhasePoint) -> Vec<f64> {
    let n = pt.dim();
    let z: Vec<f64> = pt.x.iter().chain(&pt.y).copied().collect();
    let e = |k: usize| {
        let mut v = vec![0.0; 2 * n];
        v[k] = 1.0;
        v
    };
    let mut ydir = vec![0.0; 2 * n];
    ydir[..n].copy_from_slice(&pt.y);
    (0..n)
        .map(|i| fd_dirs(p, &z, &[e(n + i), ydir.clone()]) - fd_dirs(p, &z, &[e(i)]))
        .collect()
}

pub fn point(x: &[f64], y: &[f64]) -> PhasePoint {
    PhasePoint::new(x.to_vec(), y.to_vec())
}
