//! Thin dense complex linear-algebra layer over `nalgebra`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);
pub const TWO_PI: f64 = core::f64::consts::TAU;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Singular values in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    s
}

/// `(σ_min, σ_max)`.
pub fn sigma_extremes(m: &CMat) -> (f64, f64) {
    let s = singular_values(m);
    match (s.last(), s.first()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => (0.0, 0.0),
    }
}

/// 2-norm condition number, `+∞` for a singular matrix.
pub fn condition(m: &CMat) -> f64 {
    let (lo, hi) = sigma_extremes(m);
    if lo == 0.0 || !lo.is_finite() {
        f64::INFINITY
    } else {
        hi / lo
    }
}

pub fn spectral_norm(m: &CMat) -> f64 {
    sigma_extremes(m).1
}

pub fn solve(m: &CMat, rhs: &CVec) -> Option<CVec> {
    m.clone().lu().solve(rhs)
}

pub fn inverse(m: &CMat) -> Option<CMat> {
    m.clone().lu().try_inverse()
}

/// `e^z − 1` without cancellation near `z = 0`.
pub fn expm1(z: C64) -> C64 {
    let half_sin = (z.im * 0.5).sin();
    let re = z.re.exp_m1() * z.im.cos() - 2.0 * half_sin * half_sin;
    let im = z.re.exp() * z.im.sin();
    c(re, im)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn diag(values: &[C64]) -> CMat {
    CMat::from_diagonal(&CVec::from_column_slice(values))
}

/// Relative closeness `|a − b| ≤ tol·max(1, |a|, |b|)`.
pub fn nearly_equal(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * 1.0f64.max(a.norm()).max(b.norm())
}
