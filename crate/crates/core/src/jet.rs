//! Truncated nilpotent jets for nested forward-mode differentiation.
//!
//! A [`Jet`] of depth `L` is an element of `ℝ[ε₀, …, ε_{L−1}] / (ε₀², …, ε_{L−1}²)`.
//! Coefficient `s` (read as a bit mask) multiplies the product of the `εₖ` whose
//! bits are set in `s`, so `coeff(0b101)` is the mixed derivative along the
//! directions seeded at levels 0 and 2. This is a nested dual number of depth
//! `L` stored flat: splitting the coefficient array at `2^(L−1)` gives the
//! `primal + tangent·ε_{L−1}` decomposition.
//!
//! Jets of different depths combine freely. A shallower jet is the deeper jet
//! whose higher coefficients are zero, so promotion is zero padding.

use core::fmt;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use core::sync::atomic::{AtomicUsize, Ordering};

use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};

/// Default number of nested derivative levels a computation may open.
pub const DEFAULT_MAX_ORDER: usize = 8;

/// Upper bound accepted by [`set_max_order`]; a depth-12 jet has 4096 coefficients.
pub const HARD_MAX_ORDER: usize = 12;

static MAX_ORDER: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_ORDER);

pub fn max_order() -> usize {
    MAX_ORDER.load(Ordering::Relaxed)
}

/// Sets the process-wide nesting limit. Intended to be called once at start-up.
pub fn set_max_order(order: usize) -> Result<()> {
    if order == 0 || order > HARD_MAX_ORDER {
        return Err(Error::Order {
            level: order,
            max: HARD_MAX_ORDER,
        });
    }
    MAX_ORDER.store(order, Ordering::Relaxed);
    Ok(())
}

pub(crate) fn check_level(level: usize) -> Result<()> {
    let max = max_order();
    if level >= max {
        Err(Error::Order { level, max })
    } else {
        Ok(())
    }
}

type Coeffs = SmallVec<[f64; 4]>;

#[derive(Clone, PartialEq)]
pub struct Jet {
    c: Coeffs,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.c.len() == 1 {
            write!(f, "Jet({:?})", self.c[0])
        } else {
            write!(f, "Jet{:?}", self.c.as_slice())
        }
    }
}

impl Default for Jet {
    fn default() -> Self {
        Jet::constant(0.0)
    }
}

impl From<f64> for Jet {
    fn from(v: f64) -> Self {
        Jet::constant(v)
    }
}

impl Jet {
    pub fn constant(value: f64) -> Self {
        Jet {
            c: smallvec![value],
        }
    }

    /// A variable seeded at `level`: value `value`, unit derivative along `ε_level`.
    pub fn seed(value: f64, level: usize) -> Result<Self> {
        check_level(level)?;
        let mut c: Coeffs = smallvec![0.0; 2 << level];
        c[0] = value;
        c[1 << level] = 1.0;
        Ok(Jet { c })
    }

    /// Builds a jet from raw coefficients. The length must be a power of two.
    pub fn from_coeffs(coeffs: &[f64]) -> Self {
        assert!(
            coeffs.len().is_power_of_two(),
            "jet coefficient count must be a power of two"
        );
        Jet {
            c: SmallVec::from_slice(coeffs),
        }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Number of ε levels this jet carries.
    #[inline]
    pub fn depth(&self) -> usize {
        self.c.len().trailing_zeros() as usize
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    /// Coefficient of the ε-monomial `mask`; zero beyond the stored depth.
    pub fn coeff(&self, mask: usize) -> f64 {
        self.c.get(mask).copied().unwrap_or(0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }

    /// `self + tangent·ε_level`. Both operands must live strictly below `level`.
    pub fn perturb(&self, tangent: &Jet, level: usize) -> Jet {
        debug_assert!(self.depth() <= level && tangent.depth() <= level);
        let half = 1usize << level;
        let mut c: Coeffs = smallvec![0.0; 2 * half];
        c[..self.c.len()].copy_from_slice(&self.c);
        c[half..half + tangent.c.len()].copy_from_slice(&tangent.c);
        Jet { c }
    }

    /// Part of `self` free of `ε_level`. `level` must be the jet's top level or above.
    pub fn primal(&self, level: usize) -> Jet {
        let half = 1usize << level;
        debug_assert!(self.c.len() <= 2 * half);
        if self.c.len() <= half {
            self.clone()
        } else {
            Jet {
                c: SmallVec::from_slice(&self.c[..half]),
            }
        }
    }

    /// Coefficient of `ε_level`, itself a jet over the lower levels.
    pub fn tangent(&self, level: usize) -> Jet {
        let half = 1usize << level;
        debug_assert!(self.c.len() <= 2 * half);
        if self.c.len() <= half {
            Jet::constant(0.0)
        } else {
            Jet {
                c: SmallVec::from_slice(&self.c[half..]),
            }
        }
    }

    pub fn recip(&self) -> Jet {
        let mut out: Coeffs = smallvec![0.0; self.c.len()];
        div_into(&[1.0], &self.c, &mut out);
        Jet { c: out }
    }

    pub fn sqrt(&self) -> Jet {
        Jet {
            c: sqrt_rec(&self.c),
        }
    }

    pub fn exp(&self) -> Jet {
        Jet {
            c: exp_rec(&self.c),
        }
    }

    pub fn ln(&self) -> Jet {
        Jet { c: ln_rec(&self.c) }
    }

    pub fn sin(&self) -> Jet {
        Jet {
            c: sin_cos_rec(&self.c).0,
        }
    }

    pub fn cos(&self) -> Jet {
        Jet {
            c: sin_cos_rec(&self.c).1,
        }
    }

    pub fn tan(&self) -> Jet {
        Jet {
            c: tan_rec(&self.c),
        }
    }

    /// Integer power by square-and-multiply; the value part follows the same
    /// multiplication sequence as [`powi_f64`].
    pub fn powi(&self, n: i32) -> Jet {
        let mut base = self.clone();
        let mut k = n.unsigned_abs();
        let mut acc: Option<Jet> = None;
        while k > 0 {
            if k & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => &a * &base,
                });
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        let pos = acc.unwrap_or_else(|| Jet::constant(1.0));
        if n < 0 {
            pos.recip()
        } else {
            pos
        }
    }

    pub fn powf(&self, r: f64) -> Jet {
        Jet {
            c: powf_rec(&self.c, r),
        }
    }
}

/// Integer power of a real with the multiplication order used by [`Jet::powi`].
pub fn powi_f64(x: f64, n: i32) -> f64 {
    let mut base = x;
    let mut k = n.unsigned_abs();
    let mut acc: Option<f64> = None;
    while k > 0 {
        if k & 1 == 1 {
            acc = Some(match acc {
                None => base,
                Some(a) => a * base,
            });
        }
        k >>= 1;
        if k > 0 {
            base *= base;
        }
    }
    let pos = acc.unwrap_or(1.0);
    if n < 0 {
        1.0 / pos
    } else {
        pos
    }
}

// ---------------------------------------------------------------------------
// coefficient kernels

#[inline]
fn split(s: &[f64], half: usize) -> (&[f64], Option<&[f64]>) {
    if s.len() > half {
        (&s[..half], Some(&s[half..]))
    } else {
        (s, None)
    }
}

fn add_coeffs(a: &[f64], b: &[f64]) -> Coeffs {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut c = Coeffs::from_slice(long);
    for (ci, si) in c.iter_mut().zip(short) {
        *ci += *si;
    }
    c
}

fn sub_coeffs(a: &[f64], b: &[f64]) -> Coeffs {
    let n = a.len().max(b.len());
    let mut c: Coeffs = smallvec![0.0; n];
    for (i, ci) in c.iter_mut().enumerate() {
        *ci = match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => x - y,
            (Some(x), None) => *x,
            (None, Some(y)) => -y,
            (None, None) => 0.0,
        };
    }
    c
}

/// `out = a·b`; `out.len() == max(a.len(), b.len())`.
fn mul_into(a: &[f64], b: &[f64], out: &mut [f64]) {
    let n = out.len();
    if a.len() == 1 {
        let s = a[0];
        for (o, x) in out.iter_mut().zip(b) {
            *o = s * x;
        }
        return;
    }
    if b.len() == 1 {
        let s = b[0];
        for (o, x) in out.iter_mut().zip(a) {
            *o = x * s;
        }
        return;
    }
    let h = n / 2;
    let (a_lo, a_hi) = split(a, h);
    let (b_lo, b_hi) = split(b, h);
    let (out_lo, out_hi) = out.split_at_mut(h);
    mul_into(a_lo, b_lo, out_lo);
    match (a_hi, b_hi) {
        (Some(ah), Some(bh)) => {
            mul_into(a_lo, bh, out_hi);
            mul_acc(ah, b_lo, out_hi, 1.0);
        }
        (None, Some(bh)) => mul_into(a_lo, bh, out_hi),
        (Some(ah), None) => mul_into(ah, b_lo, out_hi),
        (None, None) => unreachable!("output longer than both operands"),
    }
}

/// `out += sign·a·b`; `out.len() == max(a.len(), b.len())`.
fn mul_acc(a: &[f64], b: &[f64], out: &mut [f64], sign: f64) {
    let n = out.len();
    if a.len() == 1 {
        let s = sign * a[0];
        for (o, x) in out.iter_mut().zip(b) {
            *o += s * x;
        }
        return;
    }
    if b.len() == 1 {
        let s = sign * b[0];
        for (o, x) in out.iter_mut().zip(a) {
            *o += x * s;
        }
        return;
    }
    let h = n / 2;
    let (a_lo, a_hi) = split(a, h);
    let (b_lo, b_hi) = split(b, h);
    let (out_lo, out_hi) = out.split_at_mut(h);
    mul_acc(a_lo, b_lo, out_lo, sign);
    if let Some(bh) = b_hi {
        mul_acc(a_lo, bh, out_hi, sign);
    }
    if let Some(ah) = a_hi {
        mul_acc(ah, b_lo, out_hi, sign);
    }
}

fn mul_coeffs(a: &[f64], b: &[f64]) -> Coeffs {
    let mut out: Coeffs = smallvec![0.0; a.len().max(b.len())];
    mul_into(a, b, &mut out);
    out
}

/// `out = a / b`, nested-dual style so that `out[0] == a[0] / b[0]` exactly.
fn div_into(a: &[f64], b: &[f64], out: &mut [f64]) {
    let n = out.len();
    if b.len() == 1 {
        let d = b[0];
        for (o, x) in out.iter_mut().zip(a) {
            *o = x / d;
        }
        for o in out.iter_mut().skip(a.len()) {
            *o = 0.0 / d;
        }
        return;
    }
    let h = n / 2;
    let (a_lo, a_hi) = split(a, h);
    let (b_lo, b_hi) = split(b, h);
    let (out_lo, out_hi) = out.split_at_mut(h);
    div_into(a_lo, b_lo, out_lo);
    let mut t: Coeffs = match a_hi {
        Some(ah) => Coeffs::from_slice(ah),
        None => smallvec![0.0; h],
    };
    if let Some(bh) = b_hi {
        mul_acc(out_lo, bh, &mut t, -1.0);
    }
    div_into(&t, b_lo, out_hi);
}

fn div_coeffs(a: &[f64], b: &[f64]) -> Coeffs {
    let mut out: Coeffs = smallvec![0.0; a.len().max(b.len())];
    div_into(a, b, &mut out);
    out
}

fn concat(lo: Coeffs, hi: Coeffs) -> Coeffs {
    debug_assert_eq!(lo.len(), hi.len());
    let mut c = lo;
    c.extend_from_slice(&hi);
    c
}

fn exp_rec(a: &[f64]) -> Coeffs {
    if a.len() == 1 {
        return smallvec![libm::exp(a[0])];
    }
    let h = a.len() / 2;
    let e = exp_rec(&a[..h]);
    let hi = mul_coeffs(&e, &a[h..]);
    concat(e, hi)
}

fn ln_rec(a: &[f64]) -> Coeffs {
    if a.len() == 1 {
        return smallvec![libm::log(a[0])];
    }
    let h = a.len() / 2;
    let lo = ln_rec(&a[..h]);
    let hi = div_coeffs(&a[h..], &a[..h]);
    concat(lo, hi)
}

fn sqrt_rec(a: &[f64]) -> Coeffs {
    if a.len() == 1 {
        return smallvec![libm::sqrt(a[0])];
    }
    let h = a.len() / 2;
    let s = sqrt_rec(&a[..h]);
    let two_s: Coeffs = s.iter().map(|v| 2.0 * v).collect();
    let hi = div_coeffs(&a[h..], &two_s);
    concat(s, hi)
}

fn sin_cos_rec(a: &[f64]) -> (Coeffs, Coeffs) {
    if a.len() == 1 {
        return (smallvec![libm::sin(a[0])], smallvec![libm::cos(a[0])]);
    }
    let h = a.len() / 2;
    let (s, c) = sin_cos_rec(&a[..h]);
    let s_hi = mul_coeffs(&c, &a[h..]);
    let mut c_hi = mul_coeffs(&s, &a[h..]);
    c_hi.iter_mut().for_each(|v| *v = -*v);
    (concat(s, s_hi), concat(c, c_hi))
}

fn tan_rec(a: &[f64]) -> Coeffs {
    if a.len() == 1 {
        return smallvec![libm::tan(a[0])];
    }
    let h = a.len() / 2;
    let t = tan_rec(&a[..h]);
    let mut sec2 = mul_coeffs(&t, &t);
    sec2[0] += 1.0;
    let hi = mul_coeffs(&sec2, &a[h..]);
    concat(t, hi)
}

fn powf_rec(a: &[f64], r: f64) -> Coeffs {
    if a.len() == 1 {
        return smallvec![libm::pow(a[0], r)];
    }
    let h = a.len() / 2;
    let p = powf_rec(&a[..h], r);
    let mut dp = powf_rec(&a[..h], r - 1.0);
    dp.iter_mut().for_each(|v| *v *= r);
    let hi = mul_coeffs(&dp, &a[h..]);
    concat(p, hi)
}

// ---------------------------------------------------------------------------
// operators

macro_rules! jet_binop {
    ($tr:ident, $method:ident, $kernel:ident) => {
        impl $tr<&Jet> for &Jet {
            type Output = Jet;
            #[inline]
            fn $method(self, rhs: &Jet) -> Jet {
                Jet {
                    c: $kernel(&self.c, &rhs.c),
                }
            }
        }
        impl $tr<Jet> for Jet {
            type Output = Jet;
            #[inline]
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            #[inline]
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$method(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            #[inline]
            fn $method(self, rhs: Jet) -> Jet {
                self.$method(&rhs)
            }
        }
        impl $tr<f64> for Jet {
            type Output = Jet;
            #[inline]
            fn $method(self, rhs: f64) -> Jet {
                Jet {
                    c: $kernel(&self.c, &[rhs]),
                }
            }
        }
        impl $tr<f64> for &Jet {
            type Output = Jet;
            #[inline]
            fn $method(self, rhs: f64) -> Jet {
                Jet {
                    c: $kernel(&self.c, &[rhs]),
                }
            }
        }
        impl $tr<Jet> for f64 {
            type Output = Jet;
            #[inline]
            fn $method(self, rhs: Jet) -> Jet {
                Jet {
                    c: $kernel(&[self], &rhs.c),
                }
            }
        }
        impl $tr<&Jet> for f64 {
            type Output = Jet;
            #[inline]
            fn $method(self, rhs: &Jet) -> Jet {
                Jet {
                    c: $kernel(&[self], &rhs.c),
                }
            }
        }
    };
}

jet_binop!(Add, add, add_coeffs);
jet_binop!(Sub, sub, sub_coeffs);
jet_binop!(Mul, mul, mul_coeffs);
jet_binop!(Div, div, div_coeffs);

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        self.c.iter_mut().for_each(|v| *v = -*v);
        self
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -self.clone()
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        if rhs.c.len() <= self.c.len() {
            for (a, b) in self.c.iter_mut().zip(&rhs.c) {
                *a += b;
            }
        } else {
            *self = &*self + rhs;
        }
    }
}

impl AddAssign<Jet> for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self += &rhs;
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        if rhs.c.len() <= self.c.len() {
            for (a, b) in self.c.iter_mut().zip(&rhs.c) {
                *a -= b;
            }
        } else {
            *self = &*self - rhs;
        }
    }
}

impl SubAssign<Jet> for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self -= &rhs;
    }
}

impl MulAssign<f64> for Jet {
    fn mul_assign(&mut self, rhs: f64) {
        self.c.iter_mut().for_each(|v| *v *= rhs);
    }
}

impl core::iter::Sum for Jet {
    fn sum<I: Iterator<Item = Jet>>(iter: I) -> Jet {
        let mut acc = Jet::constant(0.0);
        for j in iter {
            acc += j;
        }
        acc
    }
}

// ---------------------------------------------------------------------------

/// Arithmetic shared by plain reals and jets, so one evaluation code path
/// serves both.
pub trait Scalar:
    Clone
    + fmt::Debug
    + From<f64>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn value(&self) -> f64;
    fn all_finite(&self) -> bool;
    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn tan(&self) -> Self;
    fn powi(&self, n: i32) -> Self;
    fn powf(&self, r: f64) -> Self;
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
    fn sqrt(&self) -> f64 {
        libm::sqrt(*self)
    }
    fn exp(&self) -> f64 {
        libm::exp(*self)
    }
    fn ln(&self) -> f64 {
        libm::log(*self)
    }
    fn sin(&self) -> f64 {
        libm::sin(*self)
    }
    fn cos(&self) -> f64 {
        libm::cos(*self)
    }
    fn tan(&self) -> f64 {
        libm::tan(*self)
    }
    fn powi(&self, n: i32) -> f64 {
        powi_f64(*self, n)
    }
    fn powf(&self, r: f64) -> f64 {
        libm::pow(*self, r)
    }
}

impl Scalar for Jet {
    fn value(&self) -> f64 {
        Jet::value(self)
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
    fn sqrt(&self) -> Jet {
        Jet::sqrt(self)
    }
    fn exp(&self) -> Jet {
        Jet::exp(self)
    }
    fn ln(&self) -> Jet {
        Jet::ln(self)
    }
    fn sin(&self) -> Jet {
        Jet::sin(self)
    }
    fn cos(&self) -> Jet {
        Jet::cos(self)
    }
    fn tan(&self) -> Jet {
        Jet::tan(self)
    }
    fn powi(&self, n: i32) -> Jet {
        Jet::powi(self, n)
    }
    fn powf(&self, r: f64) -> Jet {
        Jet::powf(self, r)
    }
}
