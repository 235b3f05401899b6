use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::CurvaturePack;
use crate::calculus::{jvp, Battery, PhasePoint, ScalarField};
use crate::dsl::{FactorSpec, MetricSpec};
use crate::error::{Error, Result};
use crate::finsler::{
    deform_spray, expr_field, finsler_axioms_point, geodesic_spray, metric_tensor, SprayData,
};
use crate::jet::Jet;
use crate::linalg::Mat;

/// Points whose fundamental tensor is worse conditioned than this are
/// excluded from verdicts.
pub const COND_LIMIT: f64 = 1e6;

/// Per-point work item of a check.
pub type PointFn<'a> = dyn Fn(usize, &PhasePoint) -> PointRecord + Sync + 'a;

/// How a check visits its sample points. Implementations must return the
/// records in point order; aggregation is always sequential.
pub trait Sweep: Sync {
    fn run(&self, points: &[PhasePoint], f: &PointFn<'_>) -> Vec<PointRecord>;
}

/// One point after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Sweep for Sequential {
    fn run(&self, points: &[PhasePoint], f: &PointFn<'_>) -> Vec<PointRecord> {
        points.iter().enumerate().map(|(i, p)| f(i, p)).collect()
    }
}

/// Residual tolerances by the number of curvature levels involved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Algebraic identities.
    pub identity: f64,
    /// One curvature level: connection, `Φ`, `R`, Hamel residuals.
    pub curvature: f64,
    /// Two curvature levels: `ξ`, `d_Jξ`, `d_hξ`, spread of `κ`.
    pub xi: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity: 1e-9,
            curvature: 1e-7,
            xi: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub max: f64,
    pub mean: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    /// The statistic compared against `tolerance`.
    pub value: f64,
    pub tolerance: f64,
    pub note: Option<String>,
}

impl Verdict {
    fn below(name: &str, value: f64, tolerance: f64) -> Self {
        Verdict {
            name: name.into(),
            passed: value < tolerance,
            value,
            tolerance,
            note: None,
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Named measurements at one sample point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointRecord {
    pub index: usize,
    pub point: PhasePoint,
    pub values: Vec<(String, f64)>,
    /// Ill-conditioned fundamental tensor; kept in the report, left out of
    /// verdicts.
    pub excluded: bool,
    pub error: Option<String>,
}

impl PointRecord {
    fn new(index: usize, point: &PhasePoint) -> Self {
        PointRecord {
            index,
            point: point.clone(),
            values: Vec::new(),
            excluded: false,
            error: None,
        }
    }

    fn push(&mut self, name: &str, value: f64) {
        self.values.push((name.into(), value));
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    fn usable(&self) -> bool {
        !self.excluded && self.error.is_none()
    }

    fn finish(mut self, outcome: Result<()>) -> Self {
        if let Err(e) = outcome {
            self.error = Some(e.to_string());
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub check: String,
    pub subject: String,
    pub dim: usize,
    pub records: Vec<PointRecord>,
    pub aggregate: Vec<(String, Stat)>,
    pub verdicts: Vec<Verdict>,
    pub notes: Vec<String>,
}

impl CheckReport {
    fn new(check: &str, subject: &str, dim: usize, records: Vec<PointRecord>) -> Self {
        let mut report = CheckReport {
            check: check.into(),
            subject: subject.into(),
            dim,
            records,
            aggregate: Vec::new(),
            verdicts: Vec::new(),
            notes: Vec::new(),
        };
        report.aggregate = aggregate(&report.records);
        let errors = report.records.iter().filter(|r| r.error.is_some()).count();
        let excluded = report.records.iter().filter(|r| r.excluded).count();
        if excluded > 0 {
            report.notes.push(format!(
                "{excluded} point(s) excluded: condition number of g above {COND_LIMIT:e}"
            ));
        }
        if errors > 0 {
            report.verdicts.push(Verdict {
                name: "evaluation".into(),
                passed: false,
                value: errors as f64,
                tolerance: 0.0,
                note: Some("points with evaluation errors".into()),
            });
        }
        if report.records.iter().all(|r| !r.usable()) {
            report.verdicts.push(Verdict {
                name: "usable_points".into(),
                passed: false,
                value: 0.0,
                tolerance: 1.0,
                note: None,
            });
        }
        report.notes.push(
            "form norms: max over 8 seeded unit test-vector tuples, divided by max(1, scale)"
                .into(),
        );
        report
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn stat(&self, name: &str) -> Option<Stat> {
        self.aggregate
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, s)| *s)
    }

    fn max_of(&self, name: &str) -> f64 {
        self.stat(name).map_or(f64::NAN, |s| s.max)
    }

    /// Values of `name` over usable points.
    pub fn column(&self, name: &str) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.usable())
            .filter_map(|r| r.get(name))
            .collect()
    }

    /// `(mean, sample standard deviation)` of `name` over usable points.
    pub fn spread(&self, name: &str) -> Option<(f64, f64)> {
        let v = self.column(name);
        if v.is_empty() {
            return None;
        }
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = if v.len() > 1 {
            v.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / (v.len() - 1) as f64
        } else {
            0.0
        };
        Some((mean, libm::sqrt(var)))
    }
}

/// Max and mean of every named value over usable records, in order of first
/// appearance. Sequential, so the result does not depend on how the records
/// were produced.
fn aggregate(records: &[PointRecord]) -> Vec<(String, Stat)> {
    let mut out: Vec<(String, Stat)> = Vec::new();
    for r in records.iter().filter(|r| r.usable()) {
        for (k, v) in &r.values {
            let slot = match out.iter_mut().find(|(name, _)| name == k) {
                Some((_, s)) => s,
                None => {
                    out.push((
                        k.clone(),
                        Stat {
                            max: f64::NEG_INFINITY,
                            mean: 0.0,
                            count: 0,
                        },
                    ));
                    &mut out.last_mut().unwrap().1
                }
            };
            slot.max = slot.max.max(*v);
            slot.mean += v;
            slot.count += 1;
        }
    }
    for (_, s) in &mut out {
        s.mean /= s.count as f64;
    }
    out
}

// ---------------------------------------------------------------------------
// small numeric helpers

fn unit(len: usize, k: usize) -> Vec<Jet> {
    let mut e = vec![Jet::constant(0.0); len];
    e[k] = Jet::constant(1.0);
    e
}

/// `max |Σ Mⱼₖ (uʲwᵏ − uᵏwʲ)|` over the battery, using base components only.
fn two_form_norm(m: &Mat<f64>, battery: &Battery) -> f64 {
    let n = m.dim();
    battery
        .tuples()
        .iter()
        .map(|t| {
            let (u, w) = (&t[0], &t[1]);
            let mut acc = 0.0;
            for j in 0..n {
                for k in 0..n {
                    acc += m[(j, k)] * (u[j] * w[k] - u[k] * w[j]);
                }
            }
            acc.abs()
        })
        .fold(0.0, f64::max)
}

/// `max |Σ ωₖ uᵏ|` over the battery.
fn one_form_norm(w: &[f64], battery: &Battery) -> f64 {
    battery
        .tuples()
        .iter()
        .map(|t| w.iter().zip(&t[0]).map(|(a, b)| a * b).sum::<f64>().abs())
        .fold(0.0, f64::max)
}

fn mat_sub(a: &Mat<f64>, b: &Mat<f64>) -> Mat<f64> {
    Mat::from_fn(a.dim(), |i, j| a[(i, j)] - b[(i, j)])
}

/// `(P, ∂P/∂yᵏ, δₖP)` at `z` for the connection of `pack`.
fn factor_parts(
    pack: &CurvaturePack,
    p: &ScalarField,
    z: &[Jet],
) -> Result<(Jet, Vec<Jet>, Vec<Jet>)> {
    let n = pack.dim();
    let (_, nm) = pack.connection_at(z)?;
    let mut value = None;
    let mut dy = Vec::with_capacity(n);
    for k in 0..n {
        let (v, d) = jvp(z, &unit(2 * n, n + k), &[], |zp| p.eval(zp, &[]))?;
        value.get_or_insert(v);
        dy.push(d);
    }
    let mut dh = Vec::with_capacity(n);
    for k in 0..n {
        let (_, dx) = jvp(z, &unit(2 * n, k), &[], |zp| p.eval(zp, &[]))?;
        let mut acc = dx;
        for l in 0..n {
            acc -= &nm[(l, k)] * &dy[l];
        }
        dh.push(acc);
    }
    Ok((value.unwrap(), dy, dh))
}

/// `δⱼ(∂P/∂yᵏ)` indexed `[(j, k)]`; `d_hd_JP` is its antisymmetrisation.
fn hamel_matrix(pack: &CurvaturePack, p: &ScalarField, z: &[Jet]) -> Result<(f64, Mat<f64>)> {
    let n = pack.dim();
    let (_, nm) = pack.connection_at(z)?;
    let dy_of = |zp: &[Jet]| -> Result<Vec<Jet>> {
        (0..n)
            .map(|k| Ok(jvp(zp, &unit(2 * n, n + k), &[], |zq| p.eval(zq, &[]))?.1))
            .collect()
    };
    let mut rows = Vec::with_capacity(n);
    for j in 0..n {
        let mut d = unit(2 * n, j);
        for l in 0..n {
            d[n + l] = -nm[(l, j)].clone();
        }
        rows.push(jvp(z, &d, &[], dy_of)?.1);
    }
    let pv = p.eval(z, &[])?.value();
    Ok((pv, Mat::from_fn(n, |j, k| rows[j][k].value())))
}

/// `∂(δₖP)/∂yʲ` indexed `[(j, k)]`; `d_Jd_hP` is its antisymmetrisation.
fn dj_dh_matrix(pack: &CurvaturePack, p: &ScalarField, z: &[Jet]) -> Result<Mat<f64>> {
    let n = pack.dim();
    let mut rows = Vec::with_capacity(n);
    for j in 0..n {
        let (_, d) = jvp(z, &unit(2 * n, n + j), &[], |zp| {
            Ok(factor_parts(pack, p, zp)?.2)
        })?;
        rows.push(d);
    }
    Ok(Mat::from_fn(n, |j, k| rows[j][k].value()))
}

// ---------------------------------------------------------------------------
// constant flag curvature

/// Everything `cc_point` needs, shareable across threads.
#[derive(Debug, Clone)]
pub struct CcContext {
    pub pack: CurvaturePack,
    /// Metric whose geodesic spray is `pack`'s spray, if known; enables `κ`
    /// and the conditioning filter.
    pub metric: Option<MetricSpec>,
    pub battery1: Battery,
    pub battery2: Battery,
}

impl CcContext {
    pub fn new(spray: &SprayData, metric: Option<MetricSpec>, battery_seed: u64) -> Result<Self> {
        let pack = CurvaturePack::new(spray)?;
        let n = pack.dim();
        Ok(CcContext {
            pack,
            metric,
            battery1: Battery::new(n, 1, battery_seed),
            battery2: Battery::new(n, 2, battery_seed.wrapping_add(1)),
        })
    }

    pub fn for_metric(metric: &MetricSpec, battery_seed: u64) -> Result<Self> {
        CcContext::new(&geodesic_spray(metric), Some(metric.clone()), battery_seed)
    }
}

/// Isotropy residual, `ρ`, `‖d_Jξ‖`, `‖d_hξ‖` (relative to `max(1, ‖ξ‖)`) and,
/// with a metric, `κ = ρ/F²` and `cond(g)`.
pub fn cc_point(ctx: &CcContext, index: usize, p: &PhasePoint) -> PointRecord {
    let mut rec = PointRecord::new(index, p);
    let outcome = (|| -> Result<()> {
        let mut f = None;
        if let Some(m) = &ctx.metric {
            let mt = metric_tensor(m, p)?;
            rec.push("cond_g", mt.cond);
            rec.excluded = !(mt.cond <= COND_LIMIT);
            f = Some(m.expr.eval(&p.x, &p.y)?);
        }
        let iso = ctx.pack.isotropy_decompose(p)?;
        rec.push("isotropy", iso.residual);
        rec.push("rho", iso.rho);
        let (xi, vert, hor) = ctx.pack.xi_derivatives_at(&p.to_jets())?;
        let xi: Vec<f64> = xi.iter().map(Jet::value).collect();
        let scale = one_form_norm(&xi, &ctx.battery1).max(1.0);
        rec.push("xi", one_form_norm(&xi, &ctx.battery1));
        rec.push(
            "dj_xi",
            two_form_norm(&vert.values(), &ctx.battery2) / scale,
        );
        rec.push("dh_xi", two_form_norm(&hor.values(), &ctx.battery2) / scale);
        if let Some(f) = f {
            rec.push("kappa", iso.rho / (f * f));
        }
        Ok(())
    })();
    rec.finish(outcome)
}

/// Verdicts of the three conditions, gated by dimension, plus `κ` spread.
pub fn summarize_cc(
    subject: &str,
    dim: usize,
    records: Vec<PointRecord>,
    tol: &Tolerances,
) -> CheckReport {
    let mut report = CheckReport::new("check-cc", subject, dim, records);
    let iso_max = report.max_of("isotropy");
    let iso = if dim == 2 {
        Verdict {
            name: "isotropic".into(),
            passed: true,
            value: iso_max,
            tolerance: tol.curvature,
            note: Some("automatic in dimension 2 (still measured)".into()),
        }
    } else {
        Verdict::below("isotropic", iso_max, tol.curvature)
    };
    let dj = Verdict::below("dj_xi", report.max_of("dj_xi"), tol.xi);
    let dh_max = report.max_of("dh_xi");
    let dh = if dim == 2 {
        Verdict::below("dh_xi", dh_max, tol.xi)
    } else {
        Verdict {
            name: "dh_xi".into(),
            passed: true,
            value: dh_max,
            tolerance: tol.xi,
            note: Some("automatic in dimension > 2 for isotropic sprays (still measured)".into()),
        }
    };
    let mut parts = vec![iso.clone(), dj, dh];
    if dim > 2 && iso.passed && !(dh_max < tol.xi) {
        parts.push(
            Verdict::below("internal_consistency", dh_max, tol.xi)
                .with_note("isotropic spray with d_h xi above tolerance"),
        );
    }
    if let Some((mean, std)) = report.spread("kappa") {
        parts.push(
            Verdict::below("kappa_constant", std, tol.xi).with_note(format!("mean kappa {mean:e}")),
        );
    }
    let all = parts.iter().all(|v| v.passed) && report.passed();
    report.verdicts.extend(parts);
    report.verdicts.push(Verdict {
        name: "constant_flag_curvature".into(),
        passed: all,
        value: if all { 1.0 } else { 0.0 },
        tolerance: 1.0,
        note: None,
    });
    report
}

/// The three conditions on `metric` at `points`, plus the Finsler axioms.
pub fn cc_check(
    metric: &MetricSpec,
    points: &[PhasePoint],
    tol: &Tolerances,
    battery_seed: u64,
) -> Result<CheckReport> {
    cc_check_with(&Sequential, metric, points, tol, battery_seed)
}

pub fn cc_check_with(
    sweep: &dyn Sweep,
    metric: &MetricSpec,
    points: &[PhasePoint],
    tol: &Tolerances,
    battery_seed: u64,
) -> Result<CheckReport> {
    let ctx = CcContext::for_metric(metric, battery_seed)?;
    let records = sweep.run(points, &|i, p| cc_point(&ctx, i, p));
    let mut report = summarize_cc(&metric.name, metric.dim, records, tol);
    let bad = points
        .iter()
        .filter(|p| !finsler_axioms_point(metric, p).passed(tol.identity))
        .count();
    if bad > 0 {
        report.verdicts.push(
            Verdict {
                name: "finsler_axioms".into(),
                passed: false,
                value: bad as f64,
                tolerance: 0.0,
                note: None,
            }
            .with_note("points failing positivity, homogeneity or definiteness; report invalid"),
        );
    }
    Ok(report)
}

/// `max ‖d_hξ‖` for an isotropic spray in dimension at least 3.
pub fn bianchi_check(
    spray: &SprayData,
    points: &[PhasePoint],
    tol: &Tolerances,
    battery_seed: u64,
) -> Result<CheckReport> {
    bianchi_check_with(&Sequential, spray, points, tol, battery_seed)
}

pub fn bianchi_check_with(
    sweep: &dyn Sweep,
    spray: &SprayData,
    points: &[PhasePoint],
    tol: &Tolerances,
    battery_seed: u64,
) -> Result<CheckReport> {
    if spray.dim() < 3 {
        return Err(Error::Precondition(format!(
            "d_h xi = 0 for isotropic sprays needs dimension at least 3, got {}",
            spray.dim()
        )));
    }
    let ctx = CcContext::new(spray, None, battery_seed)?;
    let records = sweep.run(points, &|i, p| cc_point(&ctx, i, p));
    let mut report = CheckReport::new("bianchi", &spray.source.to_string(), spray.dim(), records);
    let iso = report.max_of("isotropy");
    if !(iso < tol.curvature) {
        return Err(Error::Precondition(format!(
            "spray is not isotropic (residual {iso:e})"
        )));
    }
    report
        .verdicts
        .push(Verdict::below("dh_xi", report.max_of("dh_xi"), tol.xi));
    Ok(report)
}

// ---------------------------------------------------------------------------
// Hamel functions

/// `‖d_hd_JP‖ / max(1, |P|)` for the connection of `pack`.
pub fn hamel_point(
    pack: &CurvaturePack,
    factor: &ScalarField,
    battery2: &Battery,
    index: usize,
    p: &PhasePoint,
) -> PointRecord {
    let mut rec = PointRecord::new(index, p);
    let outcome = (|| -> Result<()> {
        let (pv, m) = hamel_matrix(pack, factor, &p.to_jets())?;
        rec.push("hamel", two_form_norm(&m, battery2) / pv.abs().max(1.0));
        Ok(())
    })();
    rec.finish(outcome)
}

pub fn summarize_hamel(
    subject: &str,
    dim: usize,
    records: Vec<PointRecord>,
    tol: &Tolerances,
) -> CheckReport {
    let mut report = CheckReport::new("hamel", subject, dim, records);
    let v = Verdict::below("hamel", report.max_of("hamel"), tol.curvature);
    report.verdicts.push(v);
    report
}

pub fn hamel_check(
    spray: &SprayData,
    factor: &FactorSpec,
    points: &[PhasePoint],
    tol: &Tolerances,
    battery_seed: u64,
) -> Result<CheckReport> {
    hamel_check_with(&Sequential, spray, factor, points, tol, battery_seed)
}

pub fn hamel_check_with(
    sweep: &dyn Sweep,
    spray: &SprayData,
    factor: &FactorSpec,
    points: &[PhasePoint],
    tol: &Tolerances,
    battery_seed: u64,
) -> Result<CheckReport> {
    let pack = CurvaturePack::new(spray)?;
    let pf = expr_field(&factor.expr);
    let b2 = Battery::new(spray.dim(), 2, battery_seed.wrapping_add(1));
    let records = sweep.run(points, &|i, p| hamel_point(&pack, &pf, &b2, i, p));
    let subject = format!("{} with factor {}", spray.source, factor.name);
    Ok(summarize_hamel(&subject, spray.dim(), records, tol))
}

// ---------------------------------------------------------------------------
// projective invariance

/// Relative residuals of the deformation identities at one point:
///
/// * `h_rel`: `h̃ = h − PJ − d_JP⊗𝒞`
/// * `xi_rel`: `ξ̃ = ξ + P d_JP − d_hP`
/// * `dj_xi_rel`: `d_Jξ̃ = d_Jξ − d_Jd_hP`
/// * `dh_xi_rel`: `d_h̃ξ̃ = d_hξ`
///
/// `base` and `deformed` are built independently from their own sprays.
pub fn invariants_point(
    base: &CcContext,
    deformed: &CcContext,
    factor: &ScalarField,
    index: usize,
    p: &PhasePoint,
) -> PointRecord {
    let mut rec = PointRecord::new(index, p);
    let outcome = (|| -> Result<()> {
        let n = p.dim();
        let z = p.to_jets();
        let (b1, b2) = (&base.battery1, &base.battery2);
        let (pv, dy, dh) = factor_parts(&base.pack, factor, &z)?;
        let (pv, dy, dh): (f64, Vec<f64>, Vec<f64>) = (
            pv.value(),
            dy.iter().map(Jet::value).collect(),
            dh.iter().map(Jet::value).collect(),
        );
        // (a) compared through the vertical parts on base vectors
        let nb = base.pack.connection_coeffs(p)?;
        let nd = deformed.pack.connection_coeffs(p)?;
        let expected = Mat::from_fn(n, |i, j| {
            nb[(i, j)] + if i == j { pv } else { 0.0 } + dy[j] * p.y[i]
        });
        let diff = mat_sub(&nd, &expected);
        let (mut worst, mut scale) = (0.0f64, 1.0f64);
        for t in b1.tuples() {
            let u = &t[0][..n];
            let a = nd.mul_vec(u);
            let d = diff.mul_vec(u);
            for i in 0..n {
                worst = worst.max(d[i].abs());
                scale = scale.max(a[i].abs()).max(u[i].abs());
            }
        }
        rec.push("h_rel", worst / scale);
        // (b)
        let (xb, vb, hb) = base.pack.xi_derivatives_at(&z)?;
        let (xd, vd, hd) = deformed.pack.xi_derivatives_at(&z)?;
        let xb: Vec<f64> = xb.iter().map(Jet::value).collect();
        let xd: Vec<f64> = xd.iter().map(Jet::value).collect();
        let rhs: Vec<f64> = (0..n).map(|k| xb[k] + pv * dy[k] - dh[k]).collect();
        let diff: Vec<f64> = xd.iter().zip(&rhs).map(|(a, b)| a - b).collect();
        let scale = one_form_norm(&xd, b1).max(one_form_norm(&rhs, b1)).max(1.0);
        rec.push("xi_rel", one_form_norm(&diff, b1) / scale);
        // (c)
        let djdh = dj_dh_matrix(&base.pack, factor, &z)?;
        let (vb, vd) = (vb.values(), vd.values());
        let rhs = mat_sub(&vb, &djdh);
        let scale = two_form_norm(&vd, b2).max(two_form_norm(&rhs, b2)).max(1.0);
        rec.push("dj_xi_rel", two_form_norm(&mat_sub(&vd, &rhs), b2) / scale);
        // (d)
        let (hb, hd) = (hb.values(), hd.values());
        let scale = two_form_norm(&hd, b2).max(two_form_norm(&hb, b2)).max(1.0);
        rec.push("dh_xi_rel", two_form_norm(&mat_sub(&hd, &hb), b2) / scale);
        rec.push("dh_xi", two_form_norm(&hb, b2));
        rec.push("dh_xi_deformed", two_form_norm(&hd, b2));
        rec.push("isotropy", base.pack.isotropy_decompose(p)?.residual);
        Ok(())
    })();
    rec.finish(outcome)
}

pub fn summarize_invariants(
    subject: &str,
    dim: usize,
    records: Vec<PointRecord>,
    tol: &Tolerances,
) -> CheckReport {
    let mut report = CheckReport::new("invariants", subject, dim, records);
    let v = vec![
        Verdict::below("h_relation", report.max_of("h_rel"), tol.curvature),
        Verdict::below("xi_relation", report.max_of("xi_rel"), tol.xi),
        Verdict::below("dj_xi_relation", report.max_of("dj_xi_rel"), tol.xi),
        Verdict::below("dh_xi_invariance", report.max_of("dh_xi_rel"), tol.xi),
    ];
    report.verdicts.extend(v);
    report
}

fn isotropy_gate(base: &CcContext, points: &[PhasePoint], tol: &Tolerances) -> Result<()> {
    if base.pack.dim() == 2 {
        return Ok(());
    }
    for p in points {
        let r = base.pack.isotropy_decompose(p)?.residual;
        if !(r < tol.curvature) {
            return Err(Error::Precondition(format!(
                "spray is not isotropic (residual {r:e})"
            )));
        }
    }
    Ok(())
}

/// Builds `S̃ = S − 2P𝒞` and checks the four deformation identities.
pub fn projective_invariants_check(
    spray: &SprayData,
    factor: &FactorSpec,
    points: &[PhasePoint],
    tol: &Tolerances,
    battery_seed: u64,
) -> Result<CheckReport> {
    projective_invariants_check_with(&Sequential, spray, factor, points, tol, battery_seed)
}

pub fn projective_invariants_check_with(
    sweep: &dyn Sweep,
    spray: &SprayData,
    factor: &FactorSpec,
    points: &[PhasePoint],
    tol: &Tolerances,
    battery_seed: u64,
) -> Result<CheckReport> {
    let pf = expr_field(&factor.expr);
    let base = CcContext::new(spray, None, battery_seed)?;
    isotropy_gate(&base, points, tol)?;
    let deformed = deform_spray(spray, &pf, &factor.name, points, 1e-8)?;
    let dctx = CcContext::new(&deformed, None, battery_seed)?;
    let records = sweep.run(points, &|i, p| invariants_point(&base, &dctx, &pf, i, p));
    let subject = format!("{} with factor {}", spray.source, factor.name);
    Ok(summarize_invariants(&subject, spray.dim(), records, tol))
}

// ---------------------------------------------------------------------------
// Beltrami

#[derive(Debug, Clone)]
pub struct BeltramiOutcome {
    pub base: CheckReport,
    pub hamel: CheckReport,
    /// Conditions evaluated directly on the deformed spray; `κ̃` present when
    /// the factor names a metric for it.
    pub deformed: CheckReport,
    pub hamel_pass: bool,
    pub deformed_pass: bool,
}

impl BeltramiOutcome {
    /// Hamel ⟺ deformed constant curvature.
    pub fn consistent(&self) -> bool {
        self.hamel_pass == self.deformed_pass
    }
}

/// Metric of the deformed spray when the factor's catalog entry provides one
/// for this base.
fn companion_for(metric: &MetricSpec, factor: &FactorSpec) -> Option<MetricSpec> {
    factor
        .companion
        .as_ref()
        .filter(|(base, _)| *base == metric.name)
        .map(|(_, m)| m.clone())
}

pub fn beltrami_check(
    metric: &MetricSpec,
    factor: &FactorSpec,
    points: &[PhasePoint],
    tol: &Tolerances,
    battery_seed: u64,
) -> Result<BeltramiOutcome> {
    beltrami_check_with(&Sequential, metric, factor, points, tol, battery_seed)
}

pub fn beltrami_check_with(
    sweep: &dyn Sweep,
    metric: &MetricSpec,
    factor: &FactorSpec,
    points: &[PhasePoint],
    tol: &Tolerances,
    battery_seed: u64,
) -> Result<BeltramiOutcome> {
    let base = cc_check_with(sweep, metric, points, tol, battery_seed)?;
    if !base.passed() {
        return Err(Error::Precondition(format!(
            "{} does not have constant flag curvature on the sample",
            metric.name
        )));
    }
    let spray = geodesic_spray(metric);
    let hamel = hamel_check_with(sweep, &spray, factor, points, tol, battery_seed)?;
    let pf = expr_field(&factor.expr);
    let deformed = deform_spray(&spray, &pf, &factor.name, points, 1e-8)?;
    let companion = companion_for(metric, factor);
    let has_companion = companion.is_some();
    let bctx = CcContext::new(&spray, None, battery_seed)?;
    let dctx = CcContext::new(&deformed, companion, battery_seed)?;
    let records = sweep.run(points, &|i, p| {
        let mut rec = cc_point(&dctx, i, p);
        if rec.error.is_none() {
            let inv = invariants_point(&bctx, &dctx, &pf, i, p);
            match (inv.error.clone(), inv.get("dj_xi_rel")) {
                (None, Some(v)) => rec.push("dj_xi_relation", v),
                (Some(e), _) => rec.error = Some(e),
                _ => {}
            }
        }
        rec
    });
    let subject = format!("{} deformed by {}", metric.name, factor.name);
    let mut dreport = summarize_cc(&subject, metric.dim, records, tol);
    dreport.check = "beltrami".into();
    dreport.verdicts.push(Verdict::below(
        "dj_xi_relation",
        dreport.max_of("dj_xi_relation"),
        tol.curvature,
    ));
    if !has_companion {
        dreport.notes.push(
            "no metric is known for the deformed spray: kappa not extracted; \
             metrizability of the deformed spray is not decided"
                .into(),
        );
    }
    let hamel_pass = hamel.passed();
    let deformed_pass = dreport
        .verdict("constant_flag_curvature")
        .is_some_and(|v| v.passed);
    Ok(BeltramiOutcome {
        base,
        hamel,
        deformed: dreport,
        hamel_pass,
        deformed_pass,
    })
}

// ---------------------------------------------------------------------------
// flag curvature

pub fn flag_curvature_check(
    metric: &MetricSpec,
    points: &[PhasePoint],
    tol: &Tolerances,
) -> Result<CheckReport> {
    flag_curvature_check_with(&Sequential, metric, points, tol)
}

/// `κ = ρ/F²` and the residual of `Φ = κ(F²J − F d_JF⊗𝒞)` at one point.
fn flag_point(
    pack: &CurvaturePack,
    metric: &MetricSpec,
    ff: &ScalarField,
    index: usize,
    p: &PhasePoint,
) -> PointRecord {
    let n = metric.dim;
    let mut rec = PointRecord::new(index, p);
    let outcome = (|| -> Result<()> {
        let mt = metric_tensor(metric, p)?;
        rec.push("cond_g", mt.cond);
        rec.excluded = !(mt.cond <= COND_LIMIT);
        let z = p.to_jets();
        let phi = pack.jacobi_matrix(p)?;
        let mut f = 0.0;
        let mut dyf = Vec::with_capacity(n);
        for k in 0..n {
            let (v, d) = jvp(&z, &unit(2 * n, n + k), &[], |zp| ff.eval(zp, &[]))?;
            f = v.value();
            dyf.push(d.value());
        }
        let rho = phi.trace() / (n as f64 - 1.0);
        let kappa = rho / (f * f);
        let model = Mat::from_fn(n, |i, j| {
            kappa * (if i == j { f * f } else { 0.0 } - f * dyf[j] * p.y[i])
        });
        let res = mat_sub(&phi, &model).max_abs() / phi.max_abs().max(1.0);
        rec.push("kappa", kappa);
        rec.push("scalar_flag", res);
        Ok(())
    })();
    rec.finish(outcome)
}

pub fn flag_curvature_check_with(
    sweep: &dyn Sweep,
    metric: &MetricSpec,
    points: &[PhasePoint],
    tol: &Tolerances,
) -> Result<CheckReport> {
    let pack = CurvaturePack::new(&geodesic_spray(metric))?;
    let n = metric.dim;
    let ff = expr_field(&metric.expr);
    let records = sweep.run(points, &|i, p| flag_point(&pack, metric, &ff, i, p));
    let mut report = CheckReport::new("flag-curvature", &metric.name, n, records);
    let v = Verdict::below("scalar_flag", report.max_of("scalar_flag"), tol.curvature);
    report.verdicts.push(v);
    if let Some((mean, std)) = report.spread("kappa") {
        report.notes.push(format!(
            "kappa mean {mean:e}, sample standard deviation {std:e}"
        ));
    }
    Ok(report)
}
