use alloc::format;
use alloc::vec::Vec;

use crate::charmatrix::{delta_eval, MatrixFunctionRep, SystemRealization};
use crate::linalg::{self, c, CMat, CVec, C64, ZERO};
use crate::sampling;
use crate::spectral::{EigenFrame, ReferenceSpectrum, SpectralTarget, FRAME_CONDITIONING};
use crate::{Error, Result};

/// Tolerance of the `Δ = (I − C/λ)Δ̂` self-check.
pub const IDENTITY_TOL: f64 = 1e-10;
const IDENTITY_SAMPLES: usize = 20;
const IDENTITY_SEED: u64 = 0x5eed;

/// Base-solver data produced from a target with a finite part.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePartTransform {
    /// `dⱼ⁰*C = λⱼ⁰dⱼ⁰*`
    pub c: CMat,
    /// `sup{‖I − C/λ‖ : λ ≠ 0} ∪ {‖C‖}` over the window.
    pub m_bound: f64,
    /// `f̂ = (I − C/λ)*d` on the window (`f̂ = C*d` at `λ = 0`), no finite part.
    pub f_hat: SpectralTarget,
    /// `maxⱼ ‖dⱼ⁰*C − λⱼ⁰dⱼ⁰*‖ / (‖dⱼ⁰‖ max(1, ‖C‖))`
    pub eigen_residual: f64,
}

fn factor(c: &CMat, lambda: C64) -> CMat {
    let n = c.nrows();
    if lambda == ZERO {
        -c.clone()
    } else {
        CMat::identity(n, n) - c / lambda
    }
}

/// `Δ(λ) = (I − C/λ)Δ̂(λ)` and `Δ(0) = −CΔ̂₁(0)`, so a left vector `d` of
/// `Δ` corresponds to `f̂* = d*(I − C/λ)` (or `d*C`) for `Δ̂`.
pub fn finite_part_pretransform(
    target: &SpectralTarget,
    refspec: &ReferenceSpectrum,
    frame: &EigenFrame,
    window: usize,
) -> Result<FinitePartTransform> {
    target.validate(refspec, frame)?;
    let fp = target
        .finite_part()
        .ok_or_else(|| Error::InvalidInput("target has no finite part".into()))?;
    let n = target.n();
    let d0 = CMat::from_columns(&fp.d0);
    let d0_adj = d0.adjoint();
    let (lo, hi) = linalg::sigma_extremes(&d0);
    let inv = linalg::inverse(&d0_adj)
        .filter(|_| hi > 0.0 && lo / hi >= FRAME_CONDITIONING)
        .ok_or_else(|| Error::Domain("finite-part vectors d0 are linearly dependent".into()))?;
    let c = inv * linalg::diag(&fp.lambda0) * &d0_adj;
    let scale = linalg::spectral_norm(&c).max(1.0);
    let eigen_residual = (0..n)
        .map(|j| {
            let row = fp.d0[j].adjoint();
            (&row * &c - row * fp.lambda0[j]).norm() / fp.d0[j].norm() / scale
        })
        .fold(0.0, f64::max);
    if !(eigen_residual <= 1e-12 * hi / lo) {
        return Err(Error::Internal(format!("finite-part matrix C misses its eigen-rows by {eigen_residual:e}")));
    }

    let w = window as i64;
    let mut m_bound = linalg::spectral_norm(&c);
    let mut lambda = Vec::with_capacity(n);
    let mut f_hat = Vec::with_capacity(n);
    for m in 0..n {
        let mut lrow = Vec::with_capacity(2 * window + 1);
        let mut frow = Vec::with_capacity(2 * window + 1);
        for k in -w..=w {
            let l = target.lambda(refspec, m, k);
            let f = factor(&c, l);
            let (flo, fhi) = linalg::sigma_extremes(&f);
            if l != ZERO {
                m_bound = m_bound.max(fhi);
            }
            if !(fhi > 0.0 && flo / fhi >= FRAME_CONDITIONING) {
                return Err(Error::Domain(format!(
                    "I - C/lambda is singular at lambda({m},{k}) = {l}"
                )));
            }
            let v: CVec = f.adjoint() * target.vector(frame, m, k);
            lrow.push(l);
            frow.push(v);
        }
        lambda.push(lrow);
        f_hat.push(frow);
    }
    let f_hat = SpectralTarget::new(window, lambda, f_hat, None)?;
    Ok(FinitePartTransform { c, m_bound, f_hat, eigen_residual })
}

/// Left vectors of the full system given those achieved for the base system:
/// `d* = f*(I − C/λ)⁻¹`.
pub(crate) fn pull_back(c: &CMat, lambda: C64, f: &CVec) -> Result<CVec> {
    let m = factor(c, lambda).adjoint();
    linalg::solve(&m, f).ok_or_else(|| Error::Domain(format!("I - C/lambda is singular at lambda = {lambda}")))
}

/// Folds `(I − C/λ)` into the realization:
///
/// ```text
/// A₂ = Â₂ + (θ+1)C − θCA₋₁
/// A₃ = Â₃ − CÂ₂(θ) + ∫₋₁^θ CÂ₃ + C − CA₋₁
/// ```
pub fn finite_part_posttransform(hat_sys: &SystemRealization, c: &CMat) -> Result<SystemRealization> {
    if c.iter().all(|z| *z == ZERO) {
        return Ok(hat_sys.clone());
    }
    let n = hat_sys.n();
    if c.nrows() != n || c.ncols() != n {
        return Err(Error::InvalidInput(format!("C is {}x{}, system is {n}x{n}", c.nrows(), c.ncols())));
    }
    if !hat_sys.canonical {
        return Err(Error::InvalidInput("finite-part transform needs a system with zero-mean A3".into()));
    }
    if hat_sys.a3.linear.iter().any(|z| *z != ZERO) {
        return Err(Error::InvalidInput("finite-part transform does not support linear terms in A3".into()));
    }
    let c_am = c * &hat_sys.a_minus1;

    let mut a2 = hat_sys.a2.clone();
    a2.add_constant(c);
    a2.add_linear(&(c - &c_am));

    let mut a3 = hat_sys.a3.add(&hat_sys.a2.left_mul(&(-c)));
    let ca3 = hat_sys.a3.left_mul(c);
    // ∫₋₁^θ (P + Σ Q e^{eτ}) dτ = (θ+1)P + Σ Q (e^{eθ} − e^{−e})/e
    let mut running = MatrixFunctionRep::zero(n);
    running.add_constant(&ca3.constant);
    running.add_linear(&ca3.constant);
    for (e, q) in ca3.exponentials() {
        running.add_exponential(*e, &(q / *e));
        running.add_constant(&(q * (-(-*e).exp() / *e)));
    }
    a3 = a3.add(&running);
    a3.add_constant(&(c - &c_am));

    let mut sys = SystemRealization::new(hat_sys.a_minus1.clone(), a2, a3)?;
    sys.canonical = false;
    let residual = identity_residual(&sys, hat_sys, c);
    if !(residual <= IDENTITY_TOL) {
        return Err(Error::Internal(format!(
            "finite-part transform identity residual {residual:e} exceeds {IDENTITY_TOL:e}"
        )));
    }
    Ok(sys)
}

/// `maxλ ‖Δ(λ) − (I − C/λ)Δ̂(λ)‖/‖Δ(λ)‖` over seeded sample points.
pub fn identity_residual(sys: &SystemRealization, hat_sys: &SystemRealization, cm: &CMat) -> f64 {
    let mut rng = sampling::stream(IDENTITY_SEED, 0);
    let mut worst: f64 = 0.0;
    let mut taken = 0;
    while taken < IDENTITY_SAMPLES {
        let lambda = c(sampling::uniform(&mut rng, -1.0, 2.0), sampling::uniform(&mut rng, -30.0, 30.0));
        if lambda.norm() < 0.5 {
            continue;
        }
        taken += 1;
        let full = delta_eval(sys, lambda);
        let factored = factor(cm, lambda) * delta_eval(hat_sys, lambda);
        let scale = full.norm().max(f64::MIN_POSITIVE);
        worst = worst.max((full - factored).norm() / scale);
    }
    worst
}
