mod common;

use common::{christoffel, fd_dirs, point};
use spraylab_core::calculus::*;
use spraylab_core::curvature::CurvaturePack;
use spraylab_core::dsl::{catalog, Expr};
use spraylab_core::finsler::{expr_field, geodesic_spray, metric_field, SprayData};
use spraylab_core::sampling::sample_points;
use spraylab_core::{Error, Jet};

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(u, v)| (u - v).abs() < tol)
}

fn field_of(text: &str, dim: usize) -> VectorField {
    // semicolon-separated components, each an expression in x, y
    let exprs: Vec<Expr> = text
        .split(';')
        .map(|t| Expr::parse(t, dim).unwrap())
        .collect();
    VectorField::new(move |z| exprs.iter().map(|e| e.eval_point(z)).collect())
}

#[test]
fn liouville_and_vertical_endomorphism() {
    let p = point(&[0.4, -0.1], &[2.0, 0.0]);
    assert_eq!(liouville(2).eval_at(&p).unwrap(), vec![0.0, 0.0, 2.0, 0.0]);

    let j = vertical_endo(2);
    let jj = compose(&j, &j).unwrap();
    let v = vec![0.3, -1.2, 0.5, 0.7];
    assert_eq!(
        j.eval_at(&p, std::slice::from_ref(&v)).unwrap(),
        vec![0.0, 0.0, 0.3, -1.2]
    );
    assert_eq!(jj.eval_at(&p, &[v]).unwrap(), vec![0.0; 4]);

    let sphere = catalog("sphere_projective", 2, 0).unwrap();
    let s = geodesic_spray(&sphere);
    for q in sample_points(&sphere.domain, 2, 10, 1) {
        let sv = s.field().eval_at(&q).unwrap();
        let js = j.eval_at(&q, &[sv]).unwrap();
        assert!(close(&js, &liouville(2).eval_at(&q).unwrap(), 1e-15));
    }
}

#[test]
fn lie_bracket_examples() {
    let eu = catalog("euclidean", 2, 0).unwrap();
    let s = geodesic_spray(&eu).field();
    let c = liouville(2);
    let br = lie_bracket(&c, &s);
    for q in sample_points(&eu.domain, 2, 20, 4) {
        assert!(close(
            &br.eval_at(&q).unwrap(),
            &s.eval_at(&q).unwrap(),
            1e-10
        ));
        assert!(close(
            &lie_bracket(&s, &s).eval_at(&q).unwrap(),
            &[0.0; 4],
            1e-15
        ));
    }
    let dx1 = VectorField::constant(&[1.0, 0.0, 0.0, 0.0]);
    let x1dx2 = field_of("0; x1; 0; 0", 2);
    let q = point(&[0.7, -0.3], &[1.0, 2.0]);
    assert_eq!(
        lie_bracket(&dx1, &x1dx2).eval_at(&q).unwrap(),
        vec![0.0, 1.0, 0.0, 0.0]
    );
}

#[test]
fn fn_bracket_examples() {
    let j = vertical_endo(2);
    let jj = fn_bracket_11(&j, &j).unwrap();
    let flat = CurvaturePack::new(&SprayData::flat(2)).unwrap();
    let half_hh = fn_bracket_11(&flat.h(), &flat.h()).unwrap().scale(0.5);
    let b = Battery::new(2, 2, 3);
    for q in sample_points(&spraylab_core::dsl::Domain::cube(1.0), 2, 10, 2) {
        for args in b.tuples() {
            assert!(close(&jj.eval_at(&q, args).unwrap(), &[0.0; 4], 1e-10));
            assert!(close(&half_hh.eval_at(&q, args).unwrap(), &[0.0; 4], 1e-10));
        }
    }
    assert!(matches!(fn_bracket_11(&j, &jj), Err(Error::Degree { .. })));
}

#[test]
fn projector_from_the_spray() {
    let flat = SprayData::flat(2);
    let s = flat.field();
    let h = identity_endo()
        .sub(&fn_bracket_vf(&s, &vertical_endo(2)).unwrap())
        .scale(0.5);
    let q = point(&[0.2, 0.5], &[-0.4, 1.1]);
    let v = vec![0.3, -0.6, 1.4, 2.0];
    assert!(close(
        &h.eval_at(&q, &[v]).unwrap(),
        &[0.3, -0.6, 0.0, 0.0],
        1e-15
    ));
    let phi = compose(
        &CurvaturePack::new(&flat).unwrap().v(),
        &fn_bracket_vf(&s, &h).unwrap(),
    )
    .unwrap();
    for e in 0..4 {
        let mut u = vec![0.0; 4];
        u[e] = 1.0;
        assert!(close(&phi.eval_at(&q, &[u]).unwrap(), &[0.0; 4], 1e-15));
    }

    // N = Γ y from the classical Christoffel oracle
    let sphere = catalog("sphere_projective", 2, 0).unwrap();
    let spray = geodesic_spray(&sphere);
    let s = spray.field();
    let h = identity_endo()
        .sub(&fn_bracket_vf(&s, &vertical_endo(2)).unwrap())
        .scale(0.5);
    for q in sample_points(&sphere.domain, 2, 10, 8) {
        let gamma = christoffel(&sphere, &q.x);
        for jdx in 0..2 {
            let mut e = vec![0.0; 4];
            e[jdx] = 1.0;
            let col = h.eval_at(&q, &[e]).unwrap();
            for i in 0..2 {
                let n: f64 = (0..2).map(|k| gamma[i][jdx][k] * q.y[k]).sum();
                assert!(
                    (col[2 + i] + n).abs() < 1e-8,
                    "N^{i}_{jdx}: {} vs {n}",
                    -col[2 + i]
                );
            }
        }
    }
}

#[test]
fn exterior_derivative_examples() {
    let eu = catalog("euclidean", 2, 0).unwrap();
    let f = metric_field(&eu);
    let q = point(&[0.1, 0.2], &[3.0, 4.0]);
    let df = exterior_d(&f);
    let ey1 = vec![0.0, 0.0, 1.0, 0.0];
    let fd = fd_dirs(
        &|z: &[f64]| eu.expr.eval_point(z).unwrap(),
        &[0.1, 0.2, 3.0, 4.0],
        std::slice::from_ref(&ey1),
    );
    let ad = df.eval_at(&q, &[ey1]).unwrap();
    assert!((ad - fd).abs() < 1e-9);
    assert!((ad - 0.6).abs() < 1e-15);

    let c = ScalarField::function(|_| Ok(Jet::constant(3.0)));
    let b1 = Battery::new(2, 1, 1);
    assert_eq!(form_max_norm(&exterior_d(&c), &q, &b1).unwrap(), 0.0);

    let b2 = Battery::new(2, 2, 1);
    let funk = catalog("funk_disk", 2, 0).unwrap();
    let ddf = exterior_d(&exterior_d(&metric_field(&funk)));
    for p in sample_points(&funk.domain, 2, 20, 6) {
        assert!(form_max_norm(&ddf, &p, &b2).unwrap() < 1e-9);
    }
    // d² = 0 on a 1-form too
    let w = i_k(&vertical_endo(2), &exterior_d(&metric_field(&funk))).unwrap();
    let ddw = exterior_d(&exterior_d(&w));
    let b3 = Battery::new(2, 3, 1);
    for p in sample_points(&funk.domain, 2, 5, 6) {
        assert!(form_max_norm(&ddw, &p, &b3).unwrap() < 1e-9);
    }
}

#[test]
fn derivations_on_functions() {
    let eu = catalog("euclidean", 2, 0).unwrap();
    let f = metric_field(&eu);
    let q = point(&[0.0, 0.0], &[3.0, 4.0]);
    let djf = d_k(&vertical_endo(2), &f).unwrap();
    assert!((djf.eval_at(&q, &[vec![1.0, 0.0, 0.0, 0.0]]).unwrap() - 0.6).abs() < 1e-15);
    assert_eq!(i_k(&vertical_endo(2), &f).unwrap().degree(), 0);
    assert_eq!(
        i_k(&vertical_endo(2), &f)
            .unwrap()
            .eval_at(&q, &[])
            .unwrap(),
        0.0
    );
}

#[test]
fn derivation_law_on_one_forms() {
    // d_K ω = i_K dω − d i_K ω, checked against the classical formula for
    // d_J of a 1-form: (d_Jω)(X,Y) = (JX)ω(Y) − (JY)ω(X) − ω([JX,Y] + [X,JY] − J[X,Y])
    let funk = catalog("funk_disk", 2, 0).unwrap();
    let f = metric_field(&funk);
    let w = exterior_d(&f).times(&f);
    let j = vertical_endo(2);
    let djw = d_k(&j, &w).unwrap();
    let b = Battery::new(2, 2, 5);
    let wf = w.clone();
    for q in sample_points(&funk.domain, 2, 10, 3) {
        for args in b.tuples() {
            let (x, y) = (&args[0], &args[1]);
            let jx = j.eval_at(&q, std::slice::from_ref(x)).unwrap();
            let jy = j.eval_at(&q, std::slice::from_ref(y)).unwrap();
            let wy = ScalarField::function({
                let (wf, y) = (wf.clone(), y.clone());
                move |z| wf.eval(z, &[y.iter().map(|&v| Jet::constant(v)).collect()])
            });
            let wx = ScalarField::function({
                let (wf, x) = (wf.clone(), x.clone());
                move |z| wf.eval(z, &[x.iter().map(|&v| Jet::constant(v)).collect()])
            });
            let t1 = directional_derivative(&wy, &q, std::slice::from_ref(&jx)).unwrap();
            let t2 = directional_derivative(&wx, &q, std::slice::from_ref(&jy)).unwrap();
            // J is constant in these coordinates, so every bracket of constant fields vanishes
            let expect = t1 - t2;
            let got = djw.eval_at(&q, args).unwrap();
            assert!((got - expect).abs() < 1e-12 * expect.abs().max(1.0));
        }
    }
}

#[test]
fn semi_basic_trace_examples() {
    let q = point(&[0.3, -0.5, 0.1], &[0.9, 0.4, -1.2]);
    let tr = semi_basic_trace(&vertical_endo(3), 3, 1e-12).unwrap();
    assert_eq!(tr.eval_at(&q, &[]).unwrap(), 3.0);

    let funk = catalog("funk_disk", 2, 0).unwrap();
    let f = metric_field(&funk);
    let djf = d_k(&vertical_endo(2), &f).unwrap();
    let k = tensor_field(&djf, &liouville(2));
    let tr = semi_basic_trace(&k, 2, 1e-12).unwrap();
    for p in sample_points(&funk.domain, 2, 20, 1) {
        let fv = funk.expr.eval(&p.x, &p.y).unwrap();
        assert!((tr.eval_at(&p, &[]).unwrap() - fv).abs() < 1e-12);
    }

    let flat = CurvaturePack::new(&SprayData::flat(2)).unwrap();
    let tr = semi_basic_trace(&flat.phi(), 2, 1e-12).unwrap();
    assert_eq!(tr.eval_at(&q_2d(), &[]).unwrap(), 0.0);

    let bad = semi_basic_trace(&identity_endo(), 2, 1e-9).unwrap();
    assert!(matches!(
        bad.eval_at(&q_2d(), &[]),
        Err(Error::NotSemiBasic { .. })
    ));
}

fn q_2d() -> PhasePoint {
    point(&[0.1, 0.1], &[1.0, -0.5])
}

#[test]
fn projector_identities_at_many_points() {
    for name in [
        "euclidean",
        "sphere_projective",
        "poincare_ball",
        "funk_disk",
        "rand_riemann",
    ] {
        let m = catalog(name, 2, 1).unwrap();
        let pack = CurvaturePack::new(&geodesic_spray(&m)).unwrap();
        let (h, v, j) = (pack.h(), pack.v(), vertical_endo(2));
        let id = identity_endo();
        let zero = id.scale(0.0);
        let b = Battery::new(2, 1, 17);
        let checks = [
            ("J²", compose(&j, &j).unwrap(), zero.clone()),
            ("h+v", h.add(&v), id.clone()),
            ("h²", compose(&h, &h).unwrap(), h.clone()),
            ("v²", compose(&v, &v).unwrap(), v.clone()),
            ("hv", compose(&h, &v).unwrap(), zero.clone()),
            ("Jh", compose(&j, &h).unwrap(), j.clone()),
            ("vJ", compose(&v, &j).unwrap(), j.clone()),
        ];
        for p in sample_points(&m.domain, 2, 100, 12) {
            for (what, a, e) in &checks {
                let r = vector_form_residual(a, e, &p, &b).unwrap();
                assert!(r < 1e-9, "{name} {what}: {r:e}");
            }
        }
    }
}

#[test]
fn produced_two_forms_alternate() {
    let m = catalog("rand_riemann", 2, 3).unwrap();
    let pack = CurvaturePack::new(&geodesic_spray(&m)).unwrap();
    let f = metric_field(&m);
    let scalar = [
        ("dd_JF", exterior_d(&d_k(&vertical_endo(2), &f).unwrap())),
        ("d_Jξ", pack.dj_xi()),
        ("d_hξ", pack.dh_xi()),
        (
            "d_h d_JF",
            d_k(&pack.h(), &d_k(&vertical_endo(2), &f).unwrap()).unwrap(),
        ),
    ];
    let b = Battery::new(2, 2, 4);
    for p in sample_points(&m.domain, 2, 10, 2) {
        for args in b.tuples() {
            let swapped = [args[1].clone(), args[0].clone()];
            for (name, w) in &scalar {
                let (a, s) = (
                    w.eval_at(&p, args).unwrap(),
                    w.eval_at(&p, &swapped).unwrap(),
                );
                assert!((a + s).abs() < 1e-10 * a.abs().max(1.0), "{name}");
            }
            let (a, s) = (
                pack.r().eval_at(&p, args).unwrap(),
                pack.r().eval_at(&p, &swapped).unwrap(),
            );
            assert!(a
                .iter()
                .zip(&s)
                .all(|(u, v)| (u + v).abs() < 1e-10 * u.abs().max(1.0)));
        }
    }
}

#[test]
fn curvature_objects_are_semi_basic() {
    let m = catalog("rand_riemann", 3, 2).unwrap();
    let pack = CurvaturePack::new(&geodesic_spray(&m)).unwrap();
    let n = 3;
    let b = Battery::new(n, 1, 9);
    for p in sample_points(&m.domain, n, 5, 7) {
        for args in b.tuples() {
            let u = &args[0];
            let mut vert = vec![0.0; 2 * n];
            vert[n..].copy_from_slice(&u[n..]);
            let phi = pack.phi().eval_at(&p, &[vert.clone()]).unwrap();
            assert!(phi.iter().all(|c| c.abs() < 1e-9));
            let phi_u = pack.phi().eval_at(&p, std::slice::from_ref(u)).unwrap();
            assert!(phi_u[..n].iter().all(|c| c.abs() < 1e-12));
            let r = pack.r().eval_at(&p, &[vert.clone(), u.clone()]).unwrap();
            assert!(r.iter().all(|c| c.abs() < 1e-9));
            let r_u = pack
                .r()
                .eval_at(&p, &[u.clone(), args[0].iter().rev().copied().collect()])
                .unwrap();
            assert!(r_u[..n].iter().all(|c| c.abs() < 1e-12));
            assert!(pack.xi().eval_at(&p, &[vert.clone()]).unwrap().abs() < 1e-9);
            assert!(
                pack.dj_xi()
                    .eval_at(&p, &[vert.clone(), u.clone()])
                    .unwrap()
                    .abs()
                    < 1e-9
            );
        }
    }
}

/// Evaluates a 1-form on a (possibly non-constant) field, as a function.
fn on_field(w: &ScalarForm, x: &VectorField) -> ScalarField {
    let (w, x) = (w.clone(), x.clone());
    ScalarField::function(move |z| {
        let xv = x.eval(z)?;
        w.eval(z, &[xv])
    })
}

fn apply(k: &VectorForm, x: &VectorField) -> VectorField {
    let (k, x) = (k.clone(), x.clone());
    VectorField::new(move |z| {
        let xv = x.eval(z)?;
        k.eval(z, &[xv])
    })
}

fn directional(f: &ScalarField, x: &VectorField, p: &PhasePoint) -> f64 {
    let dir = x.eval_at(p).unwrap();
    directional_derivative(f, p, &[dir]).unwrap()
}

#[test]
fn constant_extension_agrees_with_linear_extensions() {
    let m = catalog("funk_disk", 2, 0).unwrap();
    let pack = CurvaturePack::new(&geodesic_spray(&m)).unwrap();
    let s = pack.spray().field();
    let h = pack.h();
    let w = d_k(&vertical_endo(2), &metric_field(&m)).unwrap();
    // two fields with linear coefficients
    let x = field_of("0.3 + x1; -0.2*y2; 1 + 0.5*x2; y1 - x1", 2);
    let y = field_of("y2; 0.4 - x2; 0.2*x1 + y1; 0.7", 2);

    for p in sample_points(&m.domain, 2, 5, 3) {
        let (xp, yp) = (x.eval_at(&p).unwrap(), y.eval_at(&p).unwrap());

        // dω(X, Y) = X ω(Y) − Y ω(X) − ω([X, Y])
        let lhs = exterior_d(&w)
            .eval_at(&p, &[xp.clone(), yp.clone()])
            .unwrap();
        let xy = lie_bracket(&x, &y).eval_at(&p).unwrap();
        let rhs = directional(&on_field(&w, &y), &x, &p)
            - directional(&on_field(&w, &x), &y, &p)
            - w.eval_at(&p, &[xy]).unwrap();
        assert!((lhs - rhs).abs() < 1e-10 * rhs.abs().max(1.0));

        // [S, h](Y) = [S, hY] − h[S, Y]
        let lhs = fn_bracket_vf(&s, &h)
            .unwrap()
            .eval_at(&p, std::slice::from_ref(&yp))
            .unwrap();
        let a = lie_bracket(&s, &apply(&h, &y)).eval_at(&p).unwrap();
        let sy = lie_bracket(&s, &y).eval_at(&p).unwrap();
        let b = h.eval_at(&p, &[sy]).unwrap();
        for i in 0..4 {
            assert!((lhs[i] - (a[i] - b[i])).abs() < 1e-10 * lhs[i].abs().max(1.0));
        }

        // [h, h](X, Y) = 2([hX, hY] − h[hX, Y] − h[X, hY] + h[X, Y])
        let lhs = fn_bracket_11(&h, &h)
            .unwrap()
            .eval_at(&p, &[xp, yp])
            .unwrap();
        let (hx, hy) = (apply(&h, &x), apply(&h, &y));
        let t1 = lie_bracket(&hx, &hy).eval_at(&p).unwrap();
        let t2 = h
            .eval_at(&p, &[lie_bracket(&hx, &y).eval_at(&p).unwrap()])
            .unwrap();
        let t3 = h
            .eval_at(&p, &[lie_bracket(&x, &hy).eval_at(&p).unwrap()])
            .unwrap();
        let t4 = h
            .eval_at(&p, &[lie_bracket(&x, &y).eval_at(&p).unwrap()])
            .unwrap();
        for i in 0..4 {
            let rhs = 2.0 * (t1[i] - t2[i] - t3[i] + t4[i]);
            assert!(
                (lhs[i] - rhs).abs() < 1e-9 * rhs.abs().max(1.0),
                "{i}: {} {rhs}",
                lhs[i]
            );
        }
    }
}

#[test]
fn wedge_and_insertion() {
    let eu = catalog("euclidean", 2, 0).unwrap();
    let f = metric_field(&eu);
    let df = exterior_d(&f);
    let dx1 = exterior_d(&expr_field(&Expr::parse("x1", 2).unwrap()));
    let w = wedge(&dx1, &df);
    let p = point(&[0.0, 0.0], &[3.0, 4.0]);
    let (u, v) = (vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]);
    assert!((w.eval_at(&p, &[u.clone(), v.clone()]).unwrap() - 0.6).abs() < 1e-15);
    assert!((w.eval_at(&p, &[v.clone(), u.clone()]).unwrap() + 0.6).abs() < 1e-15);
    let iw = insert_field(&VectorField::constant(&u), &w).unwrap();
    assert!((iw.eval_at(&p, &[v]).unwrap() - 0.6).abs() < 1e-15);
    assert!(insert_field(&liouville(2), &f).is_err());
}
