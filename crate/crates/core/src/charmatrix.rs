//! Closed-form characteristic matrix `Δ(λ)`, its derivative, the auxiliary
//! matrix `F(λ)` and SVD-based degeneracy measurement.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::linalg::{self, c, CMat, CVec, C64, ONE, TWO_PI, ZERO};
use crate::spectral::principal_arg;
use crate::{Error, Result};

/// Below this radius `∫e^{sθ}dθ` is taken from its Taylor series.
const SERIES_RADIUS_E0: f64 = 1e-6;
/// The θ-weighted kernels cancel like `1/|s|²`; their series is used on the unit disk.
const SERIES_RADIUS_MOMENT: f64 = 1.0;
const SERIES_TERMS: usize = 30;

/// Gate on `σ_min/σ_max(I − e^{−λ}A₋₁)` for `F(λ)`.
pub const F_MATRIX_GATE: f64 = 1e-12;

/// `∫₋₁⁰ θⁿ e^{sθ} dθ` for `n ≤ 2`.
pub fn moment(n: u32, s: C64) -> C64 {
    debug_assert!(n <= 2);
    let radius = if n == 0 { SERIES_RADIUS_E0 } else { SERIES_RADIUS_MOMENT };
    if s.norm() < radius {
        moment_series(n, s, if n == 0 { 6 } else { SERIES_TERMS })
    } else {
        moment_closed(n, s)
    }
}

/// `Σⱼ sʲ/j! · (−1)^{j+n}/(j+n+1)`
fn moment_series(n: u32, s: C64, terms: usize) -> C64 {
    let mut sum = ZERO;
    let mut power = ONE;
    for j in 0..terms {
        let sign = if (j + n as usize).is_multiple_of(2) { 1.0 } else { -1.0 };
        sum += power * (sign / (j as f64 + n as f64 + 1.0));
        power = power * s / (j as f64 + 1.0);
    }
    sum
}

/// `(1 − e^{−s})/s`, then integration by parts upwards.
fn moment_closed(n: u32, s: C64) -> C64 {
    let mut value = -linalg::expm1(-s) / s;
    let e = (-s).exp();
    for p in 1..=n {
        let boundary = if p % 2 == 0 { -e } else { e };
        value = (boundary - value * p as f64) / s;
    }
    value
}

/// `A(θ) = P₀ + θ·P₁ + Σ C_e e^{eθ}` on `θ ∈ [−1, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFunctionRep {
    n: usize,
    pub constant: CMat,
    pub linear: CMat,
    exponentials: Vec<(C64, CMat)>,
}

impl MatrixFunctionRep {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            constant: CMat::zeros(n, n),
            linear: CMat::zeros(n, n),
            exponentials: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn exponentials(&self) -> &[(C64, CMat)] {
        &self.exponentials
    }

    pub fn add_constant(&mut self, m: &CMat) {
        self.constant += m;
    }

    pub fn add_linear(&mut self, m: &CMat) {
        self.linear += m;
    }

    /// Adds `m·e^{eθ}`; equal exponents merge and `e = 0` folds into the constant.
    pub fn add_exponential(&mut self, exponent: C64, m: &CMat) {
        if exponent == ZERO {
            self.constant += m;
        } else if let Some((_, existing)) = self.exponentials.iter_mut().find(|(e, _)| *e == exponent) {
            *existing += m;
        } else {
            self.exponentials.push((exponent, m.clone()));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.constant.iter().all(|z| *z == ZERO)
            && self.linear.iter().all(|z| *z == ZERO)
            && self.exponentials.iter().all(|(_, m)| m.iter().all(|z| *z == ZERO))
    }

    /// Largest coefficient entry over all terms.
    pub fn max_coefficient(&self) -> f64 {
        self.exponentials
            .iter()
            .map(|(_, m)| linalg::max_abs(m))
            .fold(linalg::max_abs(&self.constant).max(linalg::max_abs(&self.linear)), f64::max)
    }

    pub fn eval(&self, theta: f64) -> CMat {
        let mut out = &self.constant + &self.linear * c(theta, 0.0);
        for (e, m) in &self.exponentials {
            out += m * (e * theta).exp();
        }
        out
    }

    /// `∫₋₁⁰ e^{λθ} A(θ) dθ`.
    pub fn transform(&self, lambda: C64) -> CMat {
        let mut out = &self.constant * moment(0, lambda) + &self.linear * moment(1, lambda);
        for (e, m) in &self.exponentials {
            out += m * moment(0, lambda + e);
        }
        out
    }

    /// `d/dλ ∫₋₁⁰ e^{λθ} A(θ) dθ = ∫₋₁⁰ θ e^{λθ} A(θ) dθ`.
    pub fn transform_derivative(&self, lambda: C64) -> CMat {
        let mut out = &self.constant * moment(1, lambda) + &self.linear * moment(2, lambda);
        for (e, m) in &self.exponentials {
            out += m * moment(1, lambda + e);
        }
        out
    }

    /// `∫₋₁⁰ A(θ) dθ`.
    pub fn integral(&self) -> CMat {
        self.transform(ZERO)
    }

    /// Every term multiplied on the left by `c`.
    pub fn left_mul(&self, c: &CMat) -> Self {
        Self {
            n: self.n,
            constant: c * &self.constant,
            linear: c * &self.linear,
            exponentials: self.exponentials.iter().map(|(e, m)| (*e, c * m)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.constant += &other.constant;
        out.linear += &other.linear;
        for (e, m) in &other.exponentials {
            out.add_exponential(*e, m);
        }
        out
    }
}

pub fn transform_coeff(rep: &MatrixFunctionRep, lambda: C64) -> CMat {
    rep.transform(lambda)
}

/// `A₋₁` together with `A₂(θ)` and `A₃(θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemRealization {
    pub a_minus1: CMat,
    pub a2: MatrixFunctionRep,
    pub a3: MatrixFunctionRep,
    /// `∫₋₁⁰ A₃(θ) dθ = 0` within `1e−12`.
    pub canonical: bool,
}

impl SystemRealization {
    pub fn new(a_minus1: CMat, a2: MatrixFunctionRep, a3: MatrixFunctionRep) -> Result<Self> {
        let n = a_minus1.nrows();
        if a_minus1.ncols() != n || a2.n() != n || a3.n() != n {
            return Err(Error::InvalidInput(format!(
                "inconsistent dimensions: A_-1 is {}x{}, A2 is {}, A3 is {}",
                n,
                a_minus1.ncols(),
                a2.n(),
                a3.n()
            )));
        }
        let canonical = linalg::max_abs(&a3.integral()) <= 1e-12 * a3.max_coefficient().max(1.0);
        Ok(Self { a_minus1, a2, a3, canonical })
    }

    /// The unperturbed system `A₂ = A₃ = 0`.
    pub fn unperturbed(a_minus1: CMat) -> Self {
        let n = a_minus1.nrows();
        Self::new(a_minus1, MatrixFunctionRep::zero(n), MatrixFunctionRep::zero(n))
            .expect("square matrix")
    }

    pub fn n(&self) -> usize {
        self.a_minus1.nrows()
    }
}

pub fn delta_eval(sys: &SystemRealization, lambda: C64) -> CMat {
    let n = sys.n();
    let body = CMat::identity(n, n) - &sys.a_minus1 * (-lambda).exp() - sys.a2.transform(lambda);
    body * lambda - sys.a3.transform(lambda)
}

pub fn delta_derivative(sys: &SystemRealization, lambda: C64) -> CMat {
    let n = sys.n();
    let e = (-lambda).exp();
    let body = CMat::identity(n, n) - &sys.a_minus1 * e - sys.a2.transform(lambda);
    let body_prime = &sys.a_minus1 * e - sys.a2.transform_derivative(lambda);
    body + body_prime * lambda - sys.a3.transform_derivative(lambda)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyReport {
    pub lambda: C64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// `σ_min/σ_max`, zero when `Δ(λ)` vanishes identically.
    pub sigma_min_ratio: f64,
    /// `w` with `w*Δ(λ) ≈ 0`, unit norm.
    pub left_null: CVec,
    /// `v` with `Δ(λ)v ≈ 0`, unit norm.
    pub right_null: CVec,
    /// `‖w*Δ(λ)‖`
    pub left_residual: f64,
    /// `‖Δ(λ)v‖`
    pub right_residual: f64,
}

/// Degeneracy of an already-evaluated matrix.
pub fn degeneracy_of_matrix(delta: &CMat, lambda: C64) -> DegeneracyReport {
    let svd = delta.clone().svd(true, true);
    let s = &svd.singular_values;
    let (imin, imax) = s.iter().enumerate().fold((0, 0), |(lo, hi), (i, v)| {
        (if *v < s[lo] { i } else { lo }, if *v > s[hi] { i } else { hi })
    });
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let left_null = u.column(imin).into_owned();
    let right_null = v_t.row(imin).adjoint();
    let left_residual = (left_null.adjoint() * delta).norm();
    let right_residual = (delta * &right_null).norm();
    let (sigma_min, sigma_max) = (s[imin], s[imax]);
    let sigma_min_ratio = if sigma_max > 0.0 { sigma_min / sigma_max } else { 0.0 };
    DegeneracyReport {
        lambda,
        sigma_min,
        sigma_max,
        sigma_min_ratio,
        left_null,
        right_null,
        left_residual,
        right_residual,
    }
}

/// `|λ| + |λe^{−λ}A₋₁| + |λÂ₂(λ)| + |Â₃(λ)|` for `n = 1`: the size of the terms
/// whose sum is `Δ(λ)`.
fn scalar_term_scale(sys: &SystemRealization, lambda: C64) -> f64 {
    let l = lambda.norm();
    l + l * ((-lambda).exp() * sys.a_minus1[(0, 0)]).norm()
        + l * sys.a2.transform(lambda)[(0, 0)].norm()
        + sys.a3.transform(lambda)[(0, 0)].norm()
}

/// For `n ≥ 2` this is [`degeneracy_of_matrix`]. A `1×1` matrix has
/// `σ_min = σ_max`, so there `sigma_max` is the term scale of `Δ(λ)` instead.
pub fn degeneracy(sys: &SystemRealization, lambda: C64) -> DegeneracyReport {
    let mut report = degeneracy_of_matrix(&delta_eval(sys, lambda), lambda);
    if sys.n() == 1 {
        let scale = scalar_term_scale(sys, lambda).max(report.sigma_min);
        report.sigma_max = scale;
        report.sigma_min_ratio = if scale > 0.0 { report.sigma_min / scale } else { 0.0 };
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct FMatrix {
    pub f: CMat,
    /// `‖F − Δ(I − e^{−λ}A₋₁)⁻¹/λ‖ / ‖F‖`
    pub identity_residual: f64,
}

/// `F(λ) = I − (∫e^{λθ}A₂ + λ⁻¹∫e^{λθ}A₃)(I − e^{−λ}A₋₁)⁻¹`, checked against
/// `Δ(λ)(I − e^{−λ}A₋₁)⁻¹/λ`.
pub fn f_matrix(sys: &SystemRealization, lambda: C64) -> Result<FMatrix> {
    let n = sys.n();
    if lambda == ZERO {
        return Err(Error::Domain("λ = 0 is the structural eigenvalue λ̃₀ of the unperturbed operator".into()));
    }
    let shift = CMat::identity(n, n) - &sys.a_minus1 * (-lambda).exp();
    let (lo, hi) = linalg::sigma_extremes(&shift);
    if !(hi > 0.0 && lo / hi >= F_MATRIX_GATE) {
        return Err(Error::Domain(on_grid_message(sys, lambda)));
    }
    let inv = linalg::inverse(&shift).ok_or_else(|| Error::Domain(on_grid_message(sys, lambda)))?;
    let coupling = sys.a2.transform(lambda) + sys.a3.transform(lambda) / lambda;
    let f = CMat::identity(n, n) - coupling * &inv;
    let via_delta = delta_eval(sys, lambda) * &inv / lambda;
    let identity_residual = (&f - via_delta).norm() / f.norm();
    Ok(FMatrix { f, identity_residual })
}

fn on_grid_message(sys: &SystemRealization, lambda: C64) -> alloc::string::String {
    let mu: Vec<C64> = sys.a_minus1.clone().schur().eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default();
    let nearest = mu
        .iter()
        .copied()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            let da = (a * (-lambda).exp() - ONE).norm();
            let db = (b * (-lambda).exp() - ONE).norm();
            da.partial_cmp(&db).unwrap_or(core::cmp::Ordering::Equal)
        });
    match nearest {
        Some((m, mu)) if mu != ZERO => {
            let k = ((lambda.im - principal_arg(mu)) / TWO_PI).round() as i64;
            let grid = c(mu.norm().ln(), principal_arg(mu) + TWO_PI * k as f64);
            format!("λ = {lambda} lies on the reference spectrum at λ̃({m},{k}) = {grid}")
        }
        _ => format!("λ = {lambda} lies on the reference spectrum"),
    }
}
