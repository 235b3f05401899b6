//! Deterministic sampling of phase points and test vectors.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::calculus::PhasePoint;
use crate::dsl::{Domain, DomainShape};

/// ChaCha8 stream with the few draws this crate needs.
#[derive(Debug, Clone)]
pub struct SeededRng(ChaCha8Rng);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Uniform direction on the unit sphere of `ℝ^dim` (rejection from the cube).
    pub fn unit_vector(&mut self, dim: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..dim).map(|_| self.uniform(-1.0, 1.0)).collect();
            let r2: f64 = v.iter().map(|a| a * a).sum();
            if r2 > 1e-4 && r2 <= 1.0 {
                let r = libm::sqrt(r2);
                return v.into_iter().map(|a| a / r).collect();
            }
        }
    }

    /// Uniform point of the domain (rejection from the bounding cube for balls).
    pub fn in_domain(&mut self, domain: &Domain, dim: usize) -> Vec<f64> {
        loop {
            let x: Vec<f64> = (0..dim)
                .map(|_| self.uniform(-domain.radius, domain.radius))
                .collect();
            if domain.shape == DomainShape::Cube || domain.contains(&x) {
                return x;
            }
        }
    }
}

/// `count` phase points: `x` uniform in the domain, `y` a uniform unit
/// direction scaled by a factor uniform in `[0.5, 2]`.
pub fn sample_points(domain: &Domain, dim: usize, count: usize, seed: u64) -> Vec<PhasePoint> {
    let mut rng = SeededRng::new(seed);
    (0..count)
        .map(|_| {
            let x = rng.in_domain(domain, dim);
            let scale = rng.uniform(0.5, 2.0);
            let y = rng
                .unit_vector(dim)
                .into_iter()
                .map(|v| v * scale)
                .collect();
            PhasePoint::new(x, y)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_in_domain() {
        let d = Domain::ball(0.8);
        let a = sample_points(&d, 3, 50, 9);
        let b = sample_points(&d, 3, 50, 9);
        assert_eq!(a, b);
        for p in &a {
            assert!(d.contains(&p.x));
            let r: f64 = p.y.iter().map(|v| v * v).sum::<f64>();
            assert!((0.25 - 1e-12..=4.0 + 1e-12).contains(&r));
        }
        assert_ne!(a, sample_points(&d, 3, 50, 10));
    }
}
