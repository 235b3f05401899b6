use alloc::vec::Vec;

use super::{PhasePoint, ScalarForm, VectorForm};
use crate::error::Result;
use crate::sampling::SeededRng;

const TUPLES: usize = 8;

/// Fixed set of argument tuples used to measure forms: 8 tuples of `degree`
/// unit vectors of `ℝ^{2n}`.
#[derive(Debug, Clone)]
pub struct Battery {
    tuples: Vec<Vec<Vec<f64>>>,
}

impl Battery {
    pub fn new(dim: usize, degree: usize, seed: u64) -> Self {
        let mut rng = SeededRng::new(seed ^ 0x6261_7474_6572_7900);
        let tuples = (0..TUPLES)
            .map(|_| (0..degree).map(|_| rng.unit_vector(2 * dim)).collect())
            .collect();
        Battery { tuples }
    }

    pub fn tuples(&self) -> &[Vec<Vec<f64>>] {
        &self.tuples
    }
}

/// `max |ω(v…)|` over the battery.
pub fn form_max_norm(w: &ScalarForm, p: &PhasePoint, battery: &Battery) -> Result<f64> {
    let mut m = 0.0f64;
    for args in battery.tuples() {
        m = m.max(w.eval_at(p, args)?.abs());
    }
    Ok(m)
}

/// `max |a − b| / max(1, max |a|, max |b|)` over the battery.
pub fn form_residual(
    a: &ScalarForm,
    b: &ScalarForm,
    p: &PhasePoint,
    battery: &Battery,
) -> Result<f64> {
    let (mut diff, mut scale) = (0.0f64, 1.0f64);
    for args in battery.tuples() {
        let (u, v) = (a.eval_at(p, args)?, b.eval_at(p, args)?);
        diff = diff.max((u - v).abs());
        scale = scale.max(u.abs()).max(v.abs());
    }
    Ok(diff / scale)
}

/// Componentwise analogue of [`form_residual`].
pub fn vector_form_residual(
    a: &VectorForm,
    b: &VectorForm,
    p: &PhasePoint,
    battery: &Battery,
) -> Result<f64> {
    let (mut diff, mut scale) = (0.0f64, 1.0f64);
    for args in battery.tuples() {
        let u = a.eval_at(p, args)?;
        let v = b.eval_at(p, args)?;
        for (s, t) in u.iter().zip(&v) {
            diff = diff.max((s - t).abs());
            scale = scale.max(s.abs()).max(t.abs());
        }
    }
    Ok(diff / scale)
}
