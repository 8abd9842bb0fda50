//! Root location for `det Δ(λ) = 0`: log-derivative Newton, argument-principle
//! box counts and verification of an assigned spectrum.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::charmatrix::{degeneracy, delta_derivative, delta_eval, DegeneracyReport, SystemRealization};
use crate::linalg::{self, c, C64, I, TWO_PI, ZERO};
use crate::quad;
use crate::spectral::{EigenFrame, ReferenceSpectrum, SpectralTarget};
use crate::{Error, Result};

pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 50;
/// Fallback steps on the smallest singular triplet after a failed Newton step.
const FALLBACK_STEPS: usize = 3;
/// Contour nodes with `σ_min/σ_max` at or below this are treated as roots.
pub const CONTOUR_GATE: f64 = 1e-10;
pub const DEFAULT_QUAD_POINTS: usize = 64;
const WINDING_SLACK: f64 = 0.25;
const MAX_DOUBLINGS: usize = 4;
/// Roots closer than this (relative) are one root.
pub const COLLISION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOutcome {
    pub root: C64,
    pub iterations: usize,
    pub converged: bool,
}

/// `tr(Δ⁻¹Δ′)`, `None` when `Δ` cannot be factored.
fn log_derivative(sys: &SystemRealization, lambda: C64) -> Option<C64> {
    let lu = delta_eval(sys, lambda).lu();
    let q = lu.solve(&delta_derivative(sys, lambda))?;
    let t = q.trace();
    (t.re.is_finite() && t.im.is_finite()).then_some(t)
}

/// Newton step on `u*Δ(λ)v` for the smallest singular triplet.
fn triplet_step(sys: &SystemRealization, lambda: C64) -> Option<C64> {
    let report = degeneracy(sys, lambda);
    let slope = (report.left_null.adjoint() * delta_derivative(sys, lambda) * &report.right_null)[(0, 0)];
    let value = (report.left_null.adjoint() * delta_eval(sys, lambda) * &report.right_null)[(0, 0)];
    let step = value / slope;
    (step.re.is_finite() && step.im.is_finite()).then_some(step)
}

/// `λ ← λ − 1/tr(Δ(λ)⁻¹Δ′(λ))` until the step is at most `tol`.
pub fn newton_root(sys: &SystemRealization, init: C64, tol: f64, max_iter: usize) -> Result<NewtonOutcome> {
    let mut lambda = init;
    for iteration in 0..max_iter {
        let step = match log_derivative(sys, lambda) {
            Some(t) if t != ZERO => Some(linalg::ONE / t),
            _ => None,
        };
        let Some(step) = step else {
            if degeneracy(sys, lambda).sigma_min_ratio == 0.0 {
                return Ok(NewtonOutcome { root: lambda, iterations: iteration, converged: true });
            }
            for extra in 0..FALLBACK_STEPS {
                let step = triplet_step(sys, lambda)
                    .ok_or(Error::NotConverged { last: lambda, iterations: iteration + extra })?;
                lambda -= step;
                if step.norm() <= tol {
                    return Ok(NewtonOutcome { root: lambda, iterations: iteration + extra + 1, converged: true });
                }
            }
            return Err(Error::NotConverged { last: lambda, iterations: iteration + FALLBACK_STEPS });
        };
        if step.norm() <= tol {
            return Ok(NewtonOutcome { root: lambda, iterations: iteration, converged: true });
        }
        lambda -= step;
    }
    Err(Error::NotConverged { last: lambda, iterations: max_iter })
}

fn winding(sys: &SystemRealization, center: C64, half: (f64, f64), points: usize) -> Result<f64> {
    let (nodes, weights) = quad::gauss_legendre(points);
    let (hx, hy) = half;
    let corners = [
        center + c(-hx, -hy),
        center + c(hx, -hy),
        center + c(hx, hy),
        center + c(-hx, hy),
    ];
    let mut total = ZERO;
    for e in 0..4 {
        let (a, b) = (corners[e], corners[(e + 1) % 4]);
        let mid = (a + b) * 0.5;
        let half_edge = (b - a) * 0.5;
        for (x, w) in nodes.iter().zip(&weights) {
            let lambda = mid + half_edge * *x;
            let delta = delta_eval(sys, lambda);
            let (lo, hi) = linalg::sigma_extremes(&delta);
            let ratio = if hi > 0.0 { lo / hi } else { 0.0 };
            if !(ratio > CONTOUR_GATE) {
                return Err(Error::ContourThroughRoot { at: lambda, ratio });
            }
            let t = log_derivative(sys, lambda).ok_or(Error::ContourThroughRoot { at: lambda, ratio })?;
            total += t * half_edge * *w;
        }
    }
    Ok((total / (I * TWO_PI)).re)
}

/// Roots of `det Δ` inside the rectangle `center ± (hx, i·hy)`, counted with
/// multiplicity by the argument principle.
pub fn count_roots_box(sys: &SystemRealization, center: C64, half_widths: (f64, f64), quad_points: usize) -> Result<i64> {
    let mut points = quad_points.max(2);
    let mut value = winding(sys, center, half_widths, points)?;
    for _ in 0..MAX_DOUBLINGS {
        if (value - value.round()).abs() <= WINDING_SLACK {
            return Ok(value.round() as i64);
        }
        points *= 2;
        value = winding(sys, center, half_widths, points)?;
    }
    if (value - value.round()).abs() <= WINDING_SLACK {
        Ok(value.round() as i64)
    } else {
        Err(Error::NonIntegerWinding { value })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEntry {
    pub m: usize,
    pub k: i64,
    pub seed: C64,
    /// Last iterate when Newton failed.
    pub root: C64,
    pub iterations: usize,
    pub converged: bool,
    /// Earlier entry this one converged onto.
    pub collision_with: Option<(usize, i64)>,
    pub degeneracy: DegeneracyReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub window: usize,
    pub entries: Vec<SpectrumEntry>,
    /// The structural root `λ = 0`.
    pub zero: DegeneracyReport,
}

impl SpectrumReport {
    pub fn collisions(&self) -> usize {
        self.entries.iter().filter(|e| e.collision_with.is_some()).count()
    }
}

/// Newton from every grid point `λ̃ₖᵐ`, `|k| ≤ window`.
pub fn spectrum_near_grid(sys: &SystemRealization, refspec: &ReferenceSpectrum, window: usize) -> SpectrumReport {
    let w = window as i64;
    let mut entries: Vec<SpectrumEntry> = Vec::with_capacity(refspec.n() * (2 * window + 1));
    for m in 0..refspec.n() {
        for k in -w..=w {
            let seed = refspec.lambda_tilde(m, k);
            let (root, iterations, converged) = match newton_root(sys, seed, NEWTON_TOL, NEWTON_MAX_ITER) {
                Ok(o) => (o.root, o.iterations, o.converged),
                Err(Error::NotConverged { last, iterations }) => (last, iterations, false),
                Err(_) => (seed, 0, false),
            };
            let collision_with = if converged {
                entries
                    .iter()
                    .find(|e| e.converged && linalg::nearly_equal(e.root, root, COLLISION_TOL))
                    .map(|e| (e.m, e.k))
            } else {
                None
            };
            entries.push(SpectrumEntry {
                m,
                k,
                seed,
                root,
                iterations,
                converged,
                collision_with,
                degeneracy: degeneracy(sys, root),
            });
        }
    }
    SpectrumReport { window, entries, zero: degeneracy(sys, ZERO) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetLabel {
    Grid { m: usize, k: i64 },
    Finite { j: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationEntry {
    pub label: TargetLabel,
    pub lambda: C64,
    pub sigma_min_ratio: f64,
    /// `‖d*Δ(λ)‖/(‖d‖σ_max)`
    pub vec_residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub window: usize,
    pub tol_root: f64,
    pub tol_vec: f64,
    pub entries: Vec<VerificationEntry>,
    /// Targets at `λ = 0`, which is structural and not checked.
    pub skipped_zero: Vec<TargetLabel>,
    pub max_sigma_ratio: f64,
    pub max_vec_residual: f64,
    pub pass: bool,
}

fn check(sys: &SystemRealization, d: &linalg::CVec, label: TargetLabel, lambda: C64, tol_root: f64, tol_vec: f64) -> VerificationEntry {
    let delta = delta_eval(sys, lambda);
    let report = degeneracy(sys, lambda);
    let scale = d.norm() * report.sigma_max;
    let vec_residual = if scale > 0.0 { (d.adjoint() * &delta).norm() / scale } else { 0.0 };
    let sigma_min_ratio = report.sigma_min_ratio;
    let pass = sigma_min_ratio <= tol_root && vec_residual <= tol_vec;
    VerificationEntry { label, lambda, sigma_min_ratio, vec_residual, pass }
}

/// Checks both root and left-vector conditions on `|k| ≤ window` and at the
/// finite part.
pub fn verify_assignment(
    sys: &SystemRealization,
    target: &SpectralTarget,
    refspec: &ReferenceSpectrum,
    frame: &EigenFrame,
    window: usize,
    tol_root: f64,
    tol_vec: f64,
) -> Result<VerificationReport> {
    if window > target.window() {
        return Err(Error::InvalidInput(alloc::format!(
            "verification window {window} exceeds target window {}",
            target.window()
        )));
    }
    let w = window as i64;
    let mut entries = Vec::new();
    let mut skipped_zero = Vec::new();
    for m in 0..target.n() {
        for k in -w..=w {
            let label = TargetLabel::Grid { m, k };
            let lambda = target.lambda(refspec, m, k);
            if lambda == ZERO {
                skipped_zero.push(label);
                continue;
            }
            let d = target.vector(frame, m, k);
            entries.push(check(sys, &d, label, lambda, tol_root, tol_vec));
        }
    }
    if let Some(fp) = target.finite_part() {
        for (j, (lambda, d)) in fp.lambda0.iter().zip(&fp.d0).enumerate() {
            let label = TargetLabel::Finite { j };
            if *lambda == ZERO {
                skipped_zero.push(label);
                continue;
            }
            entries.push(check(sys, d, label, *lambda, tol_root, tol_vec));
        }
    }
    let max_sigma_ratio = entries.iter().map(|e| e.sigma_min_ratio).fold(0.0, f64::max);
    let max_vec_residual = entries.iter().map(|e| e.vec_residual).fold(0.0, f64::max);
    let pass = entries.iter().all(|e| e.pass);
    Ok(VerificationReport { window, tol_root, tol_vec, entries, skipped_zero, max_sigma_ratio, max_vec_residual, pass })
}
