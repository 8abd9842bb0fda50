use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{self, CMat, CVec, C64, ONE, ZERO};
use crate::spectral::{alpha_decompose, AlphaTable, EigenFrame, ReferenceSpectrum, SpectralTarget, COINCIDENCE_TOL};
use crate::{Error, Result};

use super::SOLVE_GATE;

/// `1/(λ̃ₖᵐ − λ(m0,k0))`.
pub fn s_entry(
    refspec: &ReferenceSpectrum,
    target: &SpectralTarget,
    m: usize,
    m0: usize,
    k: i64,
    k0: i64,
) -> Result<C64> {
    let grid = refspec.lambda_tilde(m, k);
    let lambda = target.lambda(refspec, m0, k0);
    if linalg::nearly_equal(grid, lambda, COINCIDENCE_TOL) {
        return Err(Error::Coincidence { m, k, m0, k0 });
    }
    Ok(ONE / (grid - lambda))
}

/// Whether target `(m, k0)` sits on its own grid point.
pub(crate) fn is_coincident(refspec: &ReferenceSpectrum, target: &SpectralTarget, m: usize, k0: i64) -> bool {
    linalg::nearly_equal(target.lambda(refspec, m, k0), refspec.lambda_tilde(m, k0), COINCIDENCE_TOL)
}

/// Row `k0` of the truncated `ΛₘSₘₘ`; a coincident row is the unit row.
pub(crate) fn scaled_row(
    refspec: &ReferenceSpectrum,
    target: &SpectralTarget,
    m: usize,
    k0: i64,
    window: usize,
) -> Result<Vec<C64>> {
    let w = window as i64;
    if is_coincident(refspec, target, m, k0) {
        return Ok((-w..=w).map(|k| if k == k0 { ONE } else { ZERO }).collect());
    }
    let lambda = target.lambda(refspec, m, k0);
    let scale = refspec.lambda_tilde(m, k0) - lambda;
    (-w..=w)
        .map(|k| {
            if k == k0 {
                Ok(ONE)
            } else {
                s_entry(refspec, target, m, m, k, k0).map(|s| s * scale)
            }
        })
        .collect()
}

/// Row `k0` of the truncated `S_{m m0}`, `m0 ≠ m`.
pub(crate) fn cross_row(
    refspec: &ReferenceSpectrum,
    target: &SpectralTarget,
    m: usize,
    m0: usize,
    k0: i64,
    window: usize,
) -> Result<Vec<C64>> {
    let w = window as i64;
    (-w..=w).map(|k| s_entry(refspec, target, m, m0, k, k0)).collect()
}

/// Dense truncation of `Dₘ` with its right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    pub m: usize,
    pub n: usize,
    /// Solve window `N_s`.
    pub window: usize,
    pub matrix: CMat,
    pub rhs: CVec,
}

impl TruncatedOperator {
    fn width(&self) -> usize {
        2 * self.window + 1
    }

    /// Flat position of `(block, k)`.
    pub fn index(&self, block: usize, k: i64) -> usize {
        block * self.width() + (k + self.window as i64) as usize
    }

    /// `(m0, k0)` of a row.
    pub fn row_label(&self, row: usize) -> (usize, i64) {
        (row / self.width(), (row % self.width()) as i64 - self.window as i64)
    }

    /// `(j, k)` of a column.
    pub fn col_label(&self, col: usize) -> (usize, i64) {
        self.row_label(col)
    }

    /// Block `(m0, j)` as a square matrix.
    pub fn block(&self, m0: usize, j: usize) -> CMat {
        let w = self.width();
        self.matrix.view((m0 * w, j * w), (w, w)).into_owned()
    }
}

pub fn assemble_d(
    m: usize,
    refspec: &ReferenceSpectrum,
    target: &SpectralTarget,
    alpha: &AlphaTable,
    window: usize,
) -> Result<TruncatedOperator> {
    let n = refspec.n();
    let width = 2 * window + 1;
    let w = window as i64;
    let mut matrix = CMat::zeros(n * width, n * width);
    let mut rhs = CVec::zeros(n * width);
    for m0 in 0..n {
        for k0 in -w..=w {
            let row = m0 * width + (k0 + w) as usize;
            let (base, scale) = if m0 == m {
                let scale = if is_coincident(refspec, target, m, k0) {
                    ZERO
                } else {
                    refspec.lambda_tilde(m, k0) - target.lambda(refspec, m, k0)
                };
                (scaled_row(refspec, target, m, k0, window)?, scale)
            } else {
                (cross_row(refspec, target, m, m0, k0, window)?, ONE)
            };
            for j in 0..n {
                let a = alpha.alpha(j, m0, k0);
                if a == ZERO {
                    continue;
                }
                for (i, s) in base.iter().enumerate() {
                    matrix[(row, j * width + i)] = a * s;
                }
            }
            rhs[row] = alpha.alpha(m, m0, k0) * scale;
        }
    }
    Ok(TruncatedOperator { m, n, window, matrix, rhs })
}

/// Solved coefficient table `p(k, m, j)` with per-channel diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentSolution {
    n: usize,
    window: usize,
    /// `p[m][j][k + window]`
    p: Vec<Vec<Vec<C64>>>,
    /// Condition estimate of each `Dₘ`.
    pub condition: Vec<f64>,
    /// `‖Dₘx − rhs‖/‖rhs‖` (absolute when `rhs = 0`).
    pub residual: Vec<f64>,
}

impl AssignmentSolution {
    /// Coefficient table given directly, without a solve.
    pub fn from_fn(n: usize, window: usize, mut p: impl FnMut(i64, usize, usize) -> C64) -> Self {
        let w = window as i64;
        let p = (0..n)
            .map(|m| (0..n).map(|j| (-w..=w).map(|k| p(k, m, j)).collect()).collect())
            .collect();
        Self { n, window, p, condition: Vec::new(), residual: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// `p(k, m, j)`, zero outside the window.
    pub fn p(&self, k: i64, m: usize, j: usize) -> C64 {
        if k.unsigned_abs() as usize > self.window {
            ZERO
        } else {
            self.p[m][j][(k + self.window as i64) as usize]
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.p.iter().flatten().flatten().fold(0.0, |acc, z| acc.max(z.norm()))
    }
}

/// Condition estimates of every `Dₘ` for a coordinate table.
pub fn operator_conditions(
    refspec: &ReferenceSpectrum,
    target: &SpectralTarget,
    alpha: &AlphaTable,
    window: usize,
) -> Result<Vec<f64>> {
    (0..refspec.n())
        .map(|m| assemble_d(m, refspec, target, alpha, window).map(|op| linalg::condition(&op.matrix)))
        .collect()
}

/// Validates the target, decomposes it in the frame and solves.
pub fn solve_assignment(
    refspec: &ReferenceSpectrum,
    frame: &EigenFrame,
    target: &SpectralTarget,
    window: usize,
) -> Result<AssignmentSolution> {
    target.validate(refspec, frame)?;
    let alpha = alpha_decompose(target, frame);
    solve_with_alpha(refspec, target, &alpha, window)
}

/// Solves the `n` stacked systems for a given coordinate table.
pub fn solve_with_alpha(
    refspec: &ReferenceSpectrum,
    target: &SpectralTarget,
    alpha: &AlphaTable,
    window: usize,
) -> Result<AssignmentSolution> {
    refspec.require_assignable()?;
    if window < 2 * target.window() {
        return Err(Error::InvalidInput(format!(
            "solve window {window} must be at least twice the target window {}",
            target.window()
        )));
    }
    if alpha.window() > window {
        return Err(Error::InvalidInput(format!(
            "alpha table window {} exceeds solve window {window}",
            alpha.window()
        )));
    }
    let n = refspec.n();
    let width = 2 * window + 1;
    let w = window as i64;
    let mut p = vec![vec![vec![ZERO; width]; n]; n];
    let mut condition = Vec::with_capacity(n);
    let mut residual = Vec::with_capacity(n);
    for m in 0..n {
        let op = assemble_d(m, refspec, target, alpha, window)?;
        let cond = linalg::condition(&op.matrix);
        if !(cond <= SOLVE_GATE) {
            return Err(Error::SolverSingular { m, condition: cond });
        }
        let x = linalg::solve(&op.matrix, &op.rhs)
            .ok_or(Error::SolverSingular { m, condition: cond })?;
        let rhs_norm = op.rhs.norm();
        let r = (&op.matrix * &x - &op.rhs).norm();
        residual.push(if rhs_norm > 0.0 { r / rhs_norm } else { r });
        condition.push(cond);
        for j in 0..n {
            for k in -w..=w {
                let i = j * width + (k + w) as usize;
                p[m][j][(k + w) as usize] = -refspec.beta_tilde(m, k) * x[i];
            }
        }
    }
    Ok(AssignmentSolution { n, window, p, condition, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::spectral::biorthogonal_frame;
    use core::f64::consts::{LN_2, PI};

    fn real(x: f64) -> C64 {
        c(x, 0.0)
    }

    fn scalar_setup(delta: f64, window: usize) -> (ReferenceSpectrum, EigenFrame, SpectralTarget) {
        let r = ReferenceSpectrum::new(vec![real(2.0)]).unwrap();
        let f = biorthogonal_frame(&CMat::identity(1, 1)).unwrap();
        let t = SpectralTarget::from_fn(
            1,
            window,
            |m, k| r.lambda_tilde(m, k) + if k == 0 { real(delta) } else { ZERO },
            |m, _| f.z_col(m),
        )
        .unwrap();
        (r, f, t)
    }

    #[test]
    fn s_entry_examples() {
        let (r, _, t) = scalar_setup(0.1, 2);
        let s = s_entry(&r, &t, 0, 0, 0, 0).unwrap();
        assert!((s - real(-10.0)).norm() < 1e-12);
        let s = s_entry(&r, &t, 0, 0, 1, 0).unwrap();
        let expected = ONE / (c(0.0, 2.0 * PI) - real(0.1));
        assert!((s - expected).norm() < 1e-15);

        let r = ReferenceSpectrum::new(vec![real(2.0)]).unwrap();
        let t = SpectralTarget::from_fn(
            1,
            1,
            |_, k| if k == 0 { r.lambda_tilde(0, 1) } else { r.lambda_tilde(0, k) + real(0.05) },
            |_, _| CVec::from_element(1, ONE),
        )
        .unwrap();
        assert!(matches!(
            s_entry(&r, &t, 0, 0, 1, 0),
            Err(Error::Coincidence { m: 0, k: 1, m0: 0, k0: 0 })
        ));
    }

    #[test]
    fn identity_target_gives_identity_operator() {
        let r = ReferenceSpectrum::new(vec![real(2.0), real(-3.0)]).unwrap();
        let z = CMat::from_row_slice(2, 2, &[real(1.0), real(-0.2), real(0.3), real(1.0)]);
        let f = biorthogonal_frame(&z).unwrap();
        let t = SpectralTarget::identity(&r, &f, 2);
        let a = alpha_decompose(&t, &f);
        for m in 0..2 {
            let op = assemble_d(m, &r, &t, &a, 4).unwrap();
            let size = op.matrix.nrows();
            // frame vectors decompose to an exact Kronecker table
            assert_eq!(op.block(m, m), CMat::identity(9, 9));
            assert_eq!(size, 18);
            assert_eq!(op.rhs.norm(), 0.0);
        }
        assert_eq!(a, AlphaTable::kronecker(2, 2));
        assert_eq!(solve_assignment(&r, &f, &t, 4).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn scalar_operator_matches_hand_assembly() {
        let (r, f, t) = scalar_setup(0.1, 0);
        let a = alpha_decompose(&t, &f);
        let op = assemble_d(0, &r, &t, &a, 1).unwrap();
        let lam0 = r.lambda_tilde(0, 0) + real(0.1);
        let scale = real(-0.1);
        // row k0 = 0 is Λ-scaled, rows ±1 are coincident unit rows
        let expected = CMat::from_row_slice(
            3,
            3,
            &[
                ONE, ZERO, ZERO,
                scale / (r.lambda_tilde(0, -1) - lam0), ONE, scale / (r.lambda_tilde(0, 1) - lam0),
                ZERO, ZERO, ONE,
            ],
        );
        assert!(linalg::max_abs(&(&op.matrix - &expected)) < 1e-15);
        assert!((op.rhs[1] - scale).norm() < 1e-15);
        assert_eq!(op.row_label(1), (0, 0));
    }

    #[test]
    fn diagonal_frame_has_zero_cross_blocks() {
        let r = ReferenceSpectrum::new(vec![real(2.0), real(-3.0)]).unwrap();
        let f = biorthogonal_frame(&CMat::identity(2, 2)).unwrap();
        let t = SpectralTarget::from_fn(
            2,
            1,
            |m, k| r.lambda_tilde(m, k) + real(0.05 * (k as f64 + 2.0)),
            |m, _| f.z_col(m),
        )
        .unwrap();
        let a = alpha_decompose(&t, &f);
        let op = assemble_d(0, &r, &t, &a, 2).unwrap();
        assert!(linalg::max_abs(&op.block(0, 1)) == 0.0);
        assert!(linalg::max_abs(&op.block(1, 0)) == 0.0);
    }

    #[test]
    fn scalar_shift_satisfies_spectral_equation() {
        let (r, f, t) = scalar_setup(0.1, 2);
        let sol = solve_assignment(&r, &f, &t, 8).unwrap();
        assert!(sol.residual[0] < 1e-13);
        // α = 1: 1 + Σₖ p/β̃ · 1/(λ̃ₖ − λ₀) = 0
        let lam0 = t.lambda(&r, 0, 0);
        let mut acc = ONE;
        for k in -8..=8 {
            acc += sol.p(k, 0, 0) / r.beta_tilde(0, k) / (r.lambda_tilde(0, k) - lam0);
        }
        assert!(acc.norm() <= 1e-10, "{acc}");
    }

    #[test]
    fn scalar_shift_is_stable_in_window() {
        let (r, f, t) = scalar_setup(0.1, 2);
        let a = solve_assignment(&r, &f, &t, 8).unwrap();
        let b = solve_assignment(&r, &f, &t, 16).unwrap();
        for k in -4..=4 {
            assert!((a.p(k, 0, 0) - b.p(k, 0, 0)).norm() <= 1e-6);
        }
    }

    #[test]
    fn window_padding_rule() {
        let (r, f, t) = scalar_setup(0.1, 3);
        assert!(matches!(solve_assignment(&r, &f, &t, 5), Err(Error::InvalidInput(_))));
        let _ = LN_2;
    }
}
