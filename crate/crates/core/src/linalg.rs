//! Dense linear algebra on small square matrices, generic over [`Scalar`].

use alloc::vec;
use alloc::vec::Vec;

use crate::jet::Scalar;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    n: usize,
    a: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(n: usize) -> Self {
        Mat {
            n,
            a: vec![T::from(0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::from(1.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut a = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                a.push(f(i, j));
            }
        }
        Mat { n, a }
    }

    /// Matrix from `n²` row-major entries.
    pub fn from_vec(n: usize, a: Vec<T>) -> Self {
        assert_eq!(a.len(), n * n, "expected {} entries", n * n);
        Mat { n, a }
    }

    pub fn into_vec(self) -> Vec<T> {
        self.a
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn trace(&self) -> T {
        let mut acc = T::from(0.0);
        for i in 0..self.n {
            acc = acc + self[(i, i)].clone();
        }
        acc
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                let mut acc = T::from(0.0);
                for j in 0..self.n {
                    acc = acc + self[(i, j)].clone() * v[j].clone();
                }
                acc
            })
            .collect()
    }

    pub fn matmul(&self, other: &Mat<T>) -> Mat<T> {
        Mat::from_fn(self.n, |i, j| {
            let mut acc = T::from(0.0);
            for k in 0..self.n {
                acc = acc + self[(i, k)].clone() * other[(k, j)].clone();
            }
            acc
        })
    }

    pub fn values(&self) -> Mat<f64> {
        Mat {
            n: self.n,
            a: self.a.iter().map(Scalar::value).collect(),
        }
    }

    /// LU factorisation with partial pivoting on the value part. `None` when a
    /// pivot is zero.
    pub fn lu(&self) -> Option<Lu<T>> {
        let n = self.n;
        let mut a = self.a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| {
                    a[i * n + k]
                        .value()
                        .abs()
                        .total_cmp(&a[j * n + k].value().abs())
                })
                .unwrap();
            if a[p * n + k].value() == 0.0 {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            for i in k + 1..n {
                let f = a[i * n + k].clone() / a[k * n + k].clone();
                for j in k + 1..n {
                    a[i * n + j] = a[i * n + j].clone() - f.clone() * a[k * n + j].clone();
                }
                a[i * n + k] = f;
            }
        }
        Some(Lu { n, a, perm })
    }

    pub fn solve(&self, b: &[T]) -> Option<Vec<T>> {
        Some(self.lu()?.solve(b))
    }

    pub fn inverse(&self) -> Option<Mat<T>> {
        let lu = self.lu()?;
        let n = self.n;
        let mut inv = Mat::zeros(n);
        for j in 0..n {
            let mut e = vec![T::from(0.0); n];
            e[j] = T::from(1.0);
            for (i, v) in lu.solve(&e).into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        Some(inv)
    }
}

impl Mat<f64> {
    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `true` when the Cholesky factorisation succeeds.
    pub fn is_positive_definite(&self) -> bool {
        let n = self.n;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > 0.0) {
                return false;
            }
            let d = libm::sqrt(d);
            l[j * n + j] = d;
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        true
    }
}

impl<T> core::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.a[i * self.n + j]
    }
}

impl<T> core::ops::IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.a[i * self.n + j]
    }
}

/// Packed `PA = LU` factors.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    n: usize,
    a: Vec<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for i in 0..n {
            for k in 0..i {
                x[i] = x[i].clone() - self.a[i * n + k].clone() * x[k].clone();
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                x[i] = x[i].clone() - self.a[i * n + k].clone() * x[k].clone();
            }
            x[i] = x[i].clone() / self.a[i * n + i].clone();
        }
        x
    }
}
