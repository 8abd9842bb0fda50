//! Reference grid, biorthogonal frames, target data and quadratic-closeness
//! bookkeeping.
//!
//! Channels `m` are zero-based; grid indices `k` are signed.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::linalg::{self, c, CMat, CVec, C64, TWO_PI};
use crate::{Error, Result};

/// Relative tolerance under which a target value is treated as sitting on
/// a grid point.
pub const COINCIDENCE_TOL: f64 = 1e-13;

/// Frames with `σ_min/σ_max` below this are rejected.
pub const FRAME_CONDITIONING: f64 = 1e-12;

/// Default warning threshold on `Σₖ‖d(m,k) − zₘ‖²`.
pub const SOLVABILITY_WARNING: f64 = 0.25;

/// Principal argument in `(−π, π]`.
pub fn principal_arg(z: C64) -> f64 {
    let a = z.im.atan2(z.re);
    if a <= -core::f64::consts::PI {
        core::f64::consts::PI
    } else {
        a
    }
}

/// `ln|μₘ| + i(Arg μₘ + 2πk)`.
pub fn reference_grid(mu: &[C64], m: usize, k: i64) -> Result<C64> {
    let value = *mu
        .get(m)
        .ok_or_else(|| Error::InvalidInput(format!("channel {m} out of range")))?;
    if value == linalg::ZERO {
        return Err(Error::Domain(format!("mu[{m}] is zero; its logarithm is undefined")));
    }
    Ok(grid_point(value, k))
}

fn grid_point(mu: C64, k: i64) -> C64 {
    c(mu.norm().ln(), principal_arg(mu) + TWO_PI * k as f64)
}

/// Eigenvalues `μₘ` of `A₋₁` and the logarithmic grid `λ̃ₖᵐ` they generate.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSpectrum {
    mu: Vec<C64>,
}

impl ReferenceSpectrum {
    pub fn new(mu: Vec<C64>) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::InvalidInput("mu must contain at least one value".into()));
        }
        for (m, v) in mu.iter().enumerate() {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::InvalidInput(format!("mu[{m}] is not finite")));
            }
            if *v == linalg::ZERO {
                return Err(Error::Domain(format!("mu[{m}] is zero")));
            }
            if let Some(other) = mu[..m].iter().position(|w| w == v) {
                return Err(Error::Domain(format!("mu[{m}] repeats mu[{other}]")));
            }
        }
        Ok(Self { mu })
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[C64] {
        &self.mu
    }

    pub fn lambda_tilde(&self, m: usize, k: i64) -> C64 {
        grid_point(self.mu[m], k)
    }

    pub fn beta_tilde(&self, m: usize, k: i64) -> C64 {
        let l = self.lambda_tilde(m, k);
        if l == linalg::ZERO {
            linalg::ONE
        } else {
            l
        }
    }

    /// Assignment needs every grid point away from zero, so `μ = 1` is refused.
    pub fn require_assignable(&self) -> Result<()> {
        match self.mu.iter().position(|v| *v == linalg::ONE) {
            Some(m) => Err(Error::Domain(format!(
                "mu[{m}] = 1 puts a grid point at zero; not supported for assignment"
            ))),
            None => Ok(()),
        }
    }

    /// The grid point `(m, k)` that `lambda` coincides with, if any.
    pub fn grid_index(&self, lambda: C64) -> Option<(usize, i64)> {
        (0..self.n()).find_map(|m| {
            let k = ((lambda.im - principal_arg(self.mu[m])) / TWO_PI).round();
            if !k.is_finite() || k.abs() > 1e15 {
                return None;
            }
            let k = k as i64;
            linalg::nearly_equal(lambda, self.lambda_tilde(m, k), COINCIDENCE_TOL).then_some((m, k))
        })
    }
}

/// Left eigen-rows `zₘ*` of `A₋₁` (columns of `z`) and the biorthogonal
/// columns `yₘ`, `Z*Y = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenFrame {
    pub z: CMat,
    pub y: CMat,
    /// `σ_min(Z)`.
    pub sigma_min: f64,
    /// `σ_min(Z)/σ_max(Z)`.
    pub sigma_ratio: f64,
}

impl EigenFrame {
    pub fn n(&self) -> usize {
        self.z.ncols()
    }

    pub fn z_col(&self, m: usize) -> CVec {
        self.z.column(m).into_owned()
    }

    pub fn y_col(&self, m: usize) -> CVec {
        self.y.column(m).into_owned()
    }

    /// Largest entry of `Z*Y − I`.
    pub fn biorthogonality_error(&self) -> f64 {
        let n = self.n();
        linalg::max_abs(&(self.z.adjoint() * &self.y - CMat::identity(n, n)))
    }
}

pub fn biorthogonal_frame(z: &CMat) -> Result<EigenFrame> {
    if z.nrows() != z.ncols() || z.is_empty() {
        return Err(Error::InvalidInput(format!(
            "Z must be square and non-empty, got {}x{}",
            z.nrows(),
            z.ncols()
        )));
    }
    let (lo, hi) = linalg::sigma_extremes(z);
    let ratio = if hi > 0.0 { lo / hi } else { 0.0 };
    if !(ratio >= FRAME_CONDITIONING) {
        return Err(Error::Conditioning { what: "eigen-row frame Z".into(), ratio });
    }
    let y = linalg::inverse(&z.adjoint())
        .ok_or(Error::Conditioning { what: "eigen-row frame Z".into(), ratio })?;
    Ok(EigenFrame { z: z.clone(), y, sigma_min: lo, sigma_ratio: ratio })
}

/// `A₋₁ = Y·diag(μ)·Z*`, the unique matrix with `zₘ*A₋₁ = μₘzₘ*`.
pub fn minus_one_matrix(frame: &EigenFrame, mu: &[C64]) -> Result<CMat> {
    let n = frame.n();
    if mu.len() != n {
        return Err(Error::InvalidInput(format!("expected {n} eigenvalues, got {}", mu.len())));
    }
    let a = &frame.y * linalg::diag(mu) * frame.z.adjoint();
    let scale = linalg::spectral_norm(&a).max(f64::MIN_POSITIVE);
    let slack = 1e-12 / frame.sigma_ratio.min(1.0);
    for (m, &value) in mu.iter().enumerate() {
        let z = frame.z_col(m);
        let row = z.adjoint() * &a - z.adjoint() * value;
        let rel = row.norm() / (scale * z.norm());
        if rel > slack {
            return Err(Error::Internal(format!("row relation for channel {m} off by {rel:e}")));
        }
    }
    Ok(a)
}

/// Extra roots with their left degenerating vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePart {
    pub lambda0: Vec<C64>,
    pub d0: Vec<CVec>,
}

/// Prescribed eigenvalues `λ(m,k)` and left vectors `d(m,k)` on `|k| ≤ window`.
/// Outside the window the target is the reference: `λ = λ̃`, `d = zₘ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTarget {
    n: usize,
    window: usize,
    lambda: Vec<Vec<C64>>,
    d: Vec<Vec<CVec>>,
    finite_part: Option<FinitePart>,
}

impl SpectralTarget {
    /// `lambda[m][k + window]`, `d[m][k + window]`.
    pub fn new(
        window: usize,
        lambda: Vec<Vec<C64>>,
        d: Vec<Vec<CVec>>,
        finite_part: Option<FinitePart>,
    ) -> Result<Self> {
        let n = lambda.len();
        let width = 2 * window + 1;
        if n == 0 || d.len() != n {
            return Err(Error::InvalidInput(format!(
                "lambda has {n} channels but d has {}",
                d.len()
            )));
        }
        for m in 0..n {
            if lambda[m].len() != width || d[m].len() != width {
                return Err(Error::InvalidInput(format!(
                    "channel {m}: expected {width} entries for window {window}"
                )));
            }
            if let Some(k) = d[m].iter().position(|v| v.len() != n) {
                return Err(Error::InvalidInput(format!(
                    "d[{m}][{}] has length {}, expected {n}",
                    k as i64 - window as i64,
                    d[m][k].len()
                )));
            }
        }
        if let Some(fp) = &finite_part {
            if fp.lambda0.len() != n || fp.d0.len() != n || fp.d0.iter().any(|v| v.len() != n) {
                return Err(Error::InvalidInput(format!(
                    "finite part needs {n} eigenvalues and {n} vectors of length {n}"
                )));
            }
        }
        Ok(Self { n, window, lambda, d, finite_part })
    }

    /// Target built from closures evaluated on the window.
    pub fn from_fn(
        n: usize,
        window: usize,
        mut lambda: impl FnMut(usize, i64) -> C64,
        mut d: impl FnMut(usize, i64) -> CVec,
    ) -> Result<Self> {
        let w = window as i64;
        let lambda = (0..n).map(|m| (-w..=w).map(|k| lambda(m, k)).collect()).collect();
        let d = (0..n).map(|m| (-w..=w).map(|k| d(m, k)).collect()).collect();
        Self::new(window, lambda, d, None)
    }

    /// The reference data itself: `λ = λ̃`, `d = zₘ`.
    pub fn identity(refspec: &ReferenceSpectrum, frame: &EigenFrame, window: usize) -> Self {
        Self::from_fn(
            refspec.n(),
            window,
            |m, k| refspec.lambda_tilde(m, k),
            |m, _| frame.z_col(m),
        )
        .expect("identity target has consistent shape")
    }

    pub fn with_finite_part(mut self, fp: FinitePart) -> Result<Self> {
        self.finite_part = Some(fp);
        let Self { window, lambda, d, finite_part, .. } = self;
        Self::new(window, lambda, d, finite_part)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn in_window(&self, k: i64) -> bool {
        k.unsigned_abs() as usize <= self.window
    }

    pub fn finite_part(&self) -> Option<&FinitePart> {
        self.finite_part.as_ref()
    }

    pub fn lambda(&self, refspec: &ReferenceSpectrum, m: usize, k: i64) -> C64 {
        if self.in_window(k) {
            self.lambda[m][(k + self.window as i64) as usize]
        } else {
            refspec.lambda_tilde(m, k)
        }
    }

    pub fn vector(&self, frame: &EigenFrame, m: usize, k: i64) -> CVec {
        if self.in_window(k) {
            self.d[m][(k + self.window as i64) as usize].clone()
        } else {
            frame.z_col(m)
        }
    }

    /// Same eigenvalues, vectors replaced on the window.
    pub fn with_vectors(&self, d: Vec<Vec<CVec>>) -> Result<Self> {
        Self::new(self.window, self.lambda.clone(), d, self.finite_part.clone())
    }

    /// Same data without the finite part.
    pub fn without_finite_part(&self) -> Self {
        Self { finite_part: None, ..self.clone() }
    }

    /// Checks the structural rules the solver relies on.
    pub fn validate(&self, refspec: &ReferenceSpectrum, frame: &EigenFrame) -> Result<()> {
        let n = self.n;
        if refspec.n() != n || frame.n() != n {
            return Err(Error::InvalidInput(format!(
                "target has {n} channels, reference has {}, frame has {}",
                refspec.n(),
                frame.n()
            )));
        }
        let w = self.window as i64;
        let mut listed: Vec<(usize, i64, C64)> = Vec::with_capacity(n * (2 * self.window + 1));
        for m in 0..n {
            for k in -w..=w {
                let l = self.lambda(refspec, m, k);
                if !(l.re.is_finite() && l.im.is_finite()) {
                    return Err(Error::InvalidInput(format!("lambda({m},{k}) is not finite")));
                }
                if self.vector(frame, m, k).iter().all(|x| *x == linalg::ZERO) {
                    return Err(Error::Domain(format!("d({m},{k}) is the zero vector")));
                }
                if let Some((mg, kg)) = refspec.grid_index(l) {
                    if (mg, kg) != (m, k) {
                        return Err(Error::Coincidence { m: mg, k: kg, m0: m, k0: k });
                    }
                }
                listed.push((m, k, l));
            }
        }
        for (i, (m, k, l)) in listed.iter().enumerate() {
            for (m2, k2, l2) in &listed[..i] {
                if linalg::nearly_equal(*l, *l2, COINCIDENCE_TOL) {
                    return Err(Error::Domain(format!(
                        "lambda({m},{k}) equals lambda({m2},{k2})"
                    )));
                }
            }
        }
        if let Some(fp) = &self.finite_part {
            for (j, l0) in fp.lambda0.iter().enumerate() {
                if fp.lambda0[..j].iter().any(|o| linalg::nearly_equal(*o, *l0, COINCIDENCE_TOL)) {
                    return Err(Error::Domain(format!("lambda0[{j}] is repeated")));
                }
                if let Some((m, k)) = refspec.grid_index(*l0) {
                    return Err(Error::Domain(format!(
                        "lambda0[{j}] coincides with the tail value lambda({m},{k})"
                    )));
                }
                if let Some((m, k, _)) =
                    listed.iter().find(|(_, _, l)| linalg::nearly_equal(*l, *l0, COINCIDENCE_TOL))
                {
                    return Err(Error::Domain(format!("lambda0[{j}] equals lambda({m},{k})")));
                }
            }
            let d0 = CMat::from_columns(&fp.d0);
            let (lo, hi) = linalg::sigma_extremes(&d0);
            if !(hi > 0.0 && lo / hi >= FRAME_CONDITIONING) {
                return Err(Error::Domain("finite-part vectors d0 are linearly dependent".into()));
            }
        }
        Ok(())
    }
}

/// Coordinates of `d(m0,k0)*` in the row basis: `d* = Σₘ α(m,m0,k0) zₘ*`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaTable {
    n: usize,
    window: usize,
    /// `values[m0][k0 + window][m]`
    values: Vec<Vec<CVec>>,
}

impl AlphaTable {
    /// Kronecker table `α(m,m0,k0) = δ_{m,m0}` on the window.
    pub fn kronecker(n: usize, window: usize) -> Self {
        let values = (0..n)
            .map(|m0| {
                (0..2 * window + 1)
                    .map(|_| {
                        let mut v = CVec::zeros(n);
                        v[m0] = linalg::ONE;
                        v
                    })
                    .collect()
            })
            .collect();
        Self { n, window, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn alpha(&self, m: usize, m0: usize, k0: i64) -> C64 {
        if k0.unsigned_abs() as usize <= self.window {
            self.values[m0][(k0 + self.window as i64) as usize][m]
        } else if m == m0 {
            linalg::ONE
        } else {
            linalg::ZERO
        }
    }

    /// Coordinate vector of `d(m0,k0)*`.
    pub fn column(&self, m0: usize, k0: i64) -> CVec {
        CVec::from_fn(self.n, |m, _| self.alpha(m, m0, k0))
    }

    /// Overwrites one entry; `k0` must lie on the window.
    pub fn set(&mut self, m: usize, m0: usize, k0: i64, value: C64) {
        assert!(k0.unsigned_abs() as usize <= self.window, "k0 outside alpha window");
        self.values[m0][(k0 + self.window as i64) as usize][m] = value;
    }

    /// Same table stored on a wider window (new entries take the tail value).
    pub fn widened(&self, window: usize) -> Self {
        if window <= self.window {
            return self.clone();
        }
        let mut out = Self::kronecker(self.n, window);
        let w = self.window as i64;
        for m0 in 0..self.n {
            for k0 in -w..=w {
                for m in 0..self.n {
                    out.set(m, m0, k0, self.alpha(m, m0, k0));
                }
            }
        }
        out
    }

    /// The vector `d = Σₘ conj(α(m,m0,k0)) zₘ` these coordinates describe.
    pub fn vector(&self, frame: &EigenFrame, m0: usize, k0: i64) -> CVec {
        &frame.z * self.column(m0, k0).map(|a| a.conj())
    }

    /// Vectors on `|k0| ≤ window`, laid out for [`SpectralTarget::with_vectors`].
    pub fn vectors_on(&self, frame: &EigenFrame, window: usize) -> Vec<Vec<CVec>> {
        let w = window as i64;
        (0..self.n).map(|m0| (-w..=w).map(|k0| self.vector(frame, m0, k0)).collect()).collect()
    }
}

pub fn alpha_decompose(target: &SpectralTarget, frame: &EigenFrame) -> AlphaTable {
    let n = target.n();
    let w = target.window() as i64;
    let mut table = AlphaTable::kronecker(n, target.window());
    for m0 in 0..n {
        for k0 in -w..=w {
            let d = target.vector(frame, m0, k0);
            // a frame vector has exact Kronecker coordinates; skip the roundoff of Y
            if let Some(j) = (0..n).find(|&j| d == frame.z_col(j)) {
                for m in 0..n {
                    table.set(m, m0, k0, if m == j { linalg::ONE } else { linalg::ZERO });
                }
                continue;
            }
            // α_m = d* y_m
            let coords = frame.y.adjoint() * d;
            for m in 0..n {
                table.set(m, m0, k0, coords[m].conj());
            }
        }
    }
    table
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosenessReport {
    /// `Σₖ|λ(m,k) − λ̃(m,k)|²`
    pub sum_lambda: Vec<f64>,
    /// `Σₖ‖d(m,k) − zₘ‖²`
    pub sum_vec: Vec<f64>,
    /// `[m][m0]`: `Σₖ|α(m,m0,k)|²` for `m ≠ m0`, zero on the diagonal.
    pub sum_alpha_off: Vec<Vec<f64>>,
    /// `Σₖ|α(m,m,k) − 1|²`
    pub sum_alpha_diag: Vec<f64>,
    pub threshold: f64,
    /// Channels whose `sum_vec` exceeds `threshold`.
    pub flagged: Vec<usize>,
}

pub fn closeness_report(
    target: &SpectralTarget,
    refspec: &ReferenceSpectrum,
    frame: &EigenFrame,
    threshold: f64,
) -> ClosenessReport {
    let n = target.n();
    let w = target.window() as i64;
    let alpha = alpha_decompose(target, frame);
    let mut sum_lambda = alloc::vec![0.0; n];
    let mut sum_vec = alloc::vec![0.0; n];
    let mut sum_alpha_off = alloc::vec![alloc::vec![0.0; n]; n];
    let mut sum_alpha_diag = alloc::vec![0.0; n];
    for m0 in 0..n {
        for k in -w..=w {
            sum_lambda[m0] +=
                (target.lambda(refspec, m0, k) - refspec.lambda_tilde(m0, k)).norm_sqr();
            sum_vec[m0] += (target.vector(frame, m0, k) - frame.z_col(m0)).norm_squared();
            for m in 0..n {
                let a = alpha.alpha(m, m0, k);
                if m == m0 {
                    sum_alpha_diag[m] += (a - linalg::ONE).norm_sqr();
                } else {
                    sum_alpha_off[m][m0] += a.norm_sqr();
                }
            }
        }
    }
    let flagged = (0..n).filter(|&m| sum_vec[m] > threshold).collect();
    ClosenessReport { sum_lambda, sum_vec, sum_alpha_off, sum_alpha_diag, threshold, flagged }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn real(x: f64) -> C64 {
        c(x, 0.0)
    }

    fn frame_e1_e1e2() -> EigenFrame {
        let z = CMat::from_row_slice(2, 2, &[real(1.0), real(1.0), real(0.0), real(1.0)]);
        biorthogonal_frame(&z).unwrap()
    }

    #[test]
    fn grid_values() {
        let l = reference_grid(&[real(2.0)], 0, 0).unwrap();
        assert!((l - c(2f64.ln(), 0.0)).norm() < 1e-15);
        let l = reference_grid(&[real(2.0)], 0, 1).unwrap();
        assert!((l - c(2f64.ln(), 2.0 * PI)).norm() < 1e-15);
        let l = reference_grid(&[real(-3.0)], 0, 0).unwrap();
        assert!((l - c(3f64.ln(), PI)).norm() < 1e-15);
        // negative zero imaginary part still lands on +π
        let l = reference_grid(&[c(-3.0, -0.0)], 0, 0).unwrap();
        assert_eq!(l.im, PI);
    }

    #[test]
    fn zero_mu_is_a_domain_error() {
        assert!(matches!(reference_grid(&[real(0.0)], 0, 3), Err(Error::Domain(_))));
        assert!(ReferenceSpectrum::new(alloc::vec![real(2.0), real(0.0)]).is_err());
        assert!(ReferenceSpectrum::new(alloc::vec![real(2.0), real(2.0)]).is_err());
    }

    #[test]
    fn beta_tilde_replaces_zero() {
        let r = ReferenceSpectrum::new(alloc::vec![real(1.0), real(2.0)]).unwrap();
        assert_eq!(r.beta_tilde(0, 0), linalg::ONE);
        assert_eq!(r.beta_tilde(0, 1), r.lambda_tilde(0, 1));
        assert_eq!(r.beta_tilde(1, 0), r.lambda_tilde(1, 0));
        assert!(r.require_assignable().is_err());
    }

    #[test]
    fn identity_frame() {
        let f = biorthogonal_frame(&CMat::identity(3, 3)).unwrap();
        assert_eq!(f.y, CMat::identity(3, 3));
    }

    #[test]
    fn two_by_two_frame_matches_direct_inverse() {
        let f = frame_e1_e1e2();
        // Z* = [[1,0],[1,1]], inverse [[1,0],[-1,1]]
        let expected = CMat::from_row_slice(2, 2, &[real(1.0), real(0.0), real(-1.0), real(1.0)]);
        assert!(linalg::max_abs(&(&f.y - expected)) < 1e-15);
        assert!(f.biorthogonality_error() < 1e-15);
    }

    #[test]
    fn repeated_column_is_rejected() {
        let z = CMat::from_row_slice(2, 2, &[real(1.0), real(1.0), real(2.0), real(2.0)]);
        assert!(matches!(biorthogonal_frame(&z), Err(Error::Conditioning { .. })));
    }

    #[test]
    fn minus_one_cases() {
        let f = biorthogonal_frame(&CMat::identity(2, 2)).unwrap();
        let a = minus_one_matrix(&f, &[real(2.0), real(3.0)]).unwrap();
        assert!(linalg::max_abs(&(a - linalg::diag(&[real(2.0), real(3.0)]))) < 1e-15);

        let f = frame_e1_e1e2();
        let a = minus_one_matrix(&f, &[real(2.0), real(3.0)]).unwrap();
        for (m, mu) in [2.0, 3.0].into_iter().enumerate() {
            let z = f.z_col(m);
            assert!((z.adjoint() * &a - z.adjoint() * real(mu)).norm() < 1e-12);
        }

        let f = biorthogonal_frame(&CMat::from_element(1, 1, real(5.0))).unwrap();
        let a = minus_one_matrix(&f, &[real(2.0)]).unwrap();
        assert!((a[(0, 0)] - real(2.0)).norm() < 1e-15);
    }

    #[test]
    fn alpha_of_basis_vectors_and_combinations() {
        let r = ReferenceSpectrum::new(alloc::vec![real(2.0), real(-3.0)]).unwrap();
        let f = frame_e1_e1e2();
        let id = SpectralTarget::identity(&r, &f, 2);
        let a = alpha_decompose(&id, &f);
        for m0 in 0..2 {
            for k0 in -4..=4 {
                for m in 0..2 {
                    let expected = if m == m0 { 1.0 } else { 0.0 };
                    assert!((a.alpha(m, m0, k0) - real(expected)).norm() < 1e-15);
                }
            }
        }
        let z1 = f.z_col(0);
        let z2 = f.z_col(1);
        let t = SpectralTarget::from_fn(
            2,
            0,
            |m, k| r.lambda_tilde(m, k),
            |m, _| if m == 0 { &z1 + &z2 * real(0.1) } else { z2.clone() },
        )
        .unwrap();
        let a = alpha_decompose(&t, &f);
        assert!((a.alpha(0, 0, 0) - real(1.0)).norm() < 1e-15);
        assert!((a.alpha(1, 0, 0) - real(0.1)).norm() < 1e-15);
        assert!((a.vector(&f, 0, 0) - (&z1 + &z2 * real(0.1))).norm() < 1e-15);
    }

    #[test]
    fn closeness_examples() {
        let r = ReferenceSpectrum::new(alloc::vec![real(2.0), real(-3.0)]).unwrap();
        let f = biorthogonal_frame(&CMat::identity(2, 2)).unwrap();
        let id = SpectralTarget::identity(&r, &f, 3);
        let rep = closeness_report(&id, &r, &f, SOLVABILITY_WARNING);
        assert!(rep.sum_lambda.iter().chain(&rep.sum_vec).all(|v| *v == 0.0));
        assert!(rep.flagged.is_empty());

        let shifted = SpectralTarget::from_fn(
            2,
            3,
            |m, k| r.lambda_tilde(m, k) + if (m, k) == (0, 0) { real(0.1) } else { real(0.0) },
            |m, k| {
                let mut v = f.z_col(m);
                if (m, k) == (0, 0) {
                    v += f.z_col(1) * real(0.2);
                }
                v
            },
        )
        .unwrap();
        let rep = closeness_report(&shifted, &r, &f, SOLVABILITY_WARNING);
        assert!((rep.sum_lambda[0] - 0.01).abs() < 1e-15);
        assert_eq!(rep.sum_lambda[1], 0.0);
        assert!((rep.sum_alpha_off[1][0] - 0.04).abs() < 1e-15);
        assert!((rep.sum_vec[0] - 0.04).abs() < 1e-15);
    }

    #[test]
    fn validation_rules() {
        let r = ReferenceSpectrum::new(alloc::vec![real(2.0), real(-3.0)]).unwrap();
        let f = biorthogonal_frame(&CMat::identity(2, 2)).unwrap();
        assert!(SpectralTarget::identity(&r, &f, 2).validate(&r, &f).is_ok());

        // λ(0,0) placed on λ̃(0,1)
        let bad = SpectralTarget::from_fn(
            2,
            2,
            |m, k| if (m, k) == (0, 0) { r.lambda_tilde(0, 1) } else { r.lambda_tilde(m, k) },
            |m, _| f.z_col(m),
        )
        .unwrap();
        assert!(matches!(bad.validate(&r, &f), Err(Error::Coincidence { m: 0, k: 1, m0: 0, k0: 0 })));

        let zero = SpectralTarget::from_fn(2, 1, |m, k| r.lambda_tilde(m, k), |_, _| CVec::zeros(2))
            .unwrap();
        assert!(zero.validate(&r, &f).is_err());

        let fp = FinitePart {
            lambda0: alloc::vec![real(-1.0), real(-1.0)],
            d0: alloc::vec![f.z_col(0), f.z_col(1)],
        };
        let t = SpectralTarget::identity(&r, &f, 1).with_finite_part(fp).unwrap();
        assert!(t.validate(&r, &f).is_err());

        let fp = FinitePart {
            lambda0: alloc::vec![real(-1.0), r.lambda_tilde(1, 5)],
            d0: alloc::vec![f.z_col(0), f.z_col(1)],
        };
        let t = SpectralTarget::identity(&r, &f, 1).with_finite_part(fp).unwrap();
        assert!(t.validate(&r, &f).is_err());
    }
}
