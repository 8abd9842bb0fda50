use alloc::vec::Vec;

use crate::linalg::{self, CMat, C64, ONE};
use crate::spectral::{ReferenceSpectrum, SpectralTarget};
use crate::Result;

use super::operator::{cross_row, is_coincident, scaled_row};

/// `|εₖ|` below this marks a target sitting on a pole of `S_{m m0}`.
pub const EPSILON_FLAG: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// `S_{m m0}`, `m0 ≠ m`; factors are `εₖ = μₘe^{−λ(m0,k)} − 1`.
    Cross,
    /// `ΛₘSₘₘ`; factors are `qₖ = (μₘe^{−λ(m,k)} − 1)/(λ̃ₖᵐ − λ(m,k))`.
    Scaled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiagnostics {
    pub m0: usize,
    pub kind: BlockKind,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Indexed by `k + window`.
    pub factors: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaDiagnostics {
    pub m: usize,
    pub window: usize,
    pub blocks: Vec<BlockDiagnostics>,
    /// `(m0, k)` where `|εₖ| < EPSILON_FLAG`.
    pub flagged: Vec<(usize, i64)>,
}

impl LemmaDiagnostics {
    pub fn block(&self, m0: usize) -> &BlockDiagnostics {
        &self.blocks[m0]
    }
}

/// Singular-value extremes of every truncated block feeding `Dₘ` together
/// with the scalar factors that govern their invertibility.
pub fn invertibility_diagnostics(
    m: usize,
    refspec: &ReferenceSpectrum,
    target: &SpectralTarget,
    window: usize,
) -> Result<LemmaDiagnostics> {
    let n = refspec.n();
    let w = window as i64;
    let width = 2 * window + 1;
    let mut blocks = Vec::with_capacity(n);
    let mut flagged = Vec::new();
    // μₘe^{−λ} − 1 = expm1(λ̃₀ᵐ − λ)
    let base = refspec.lambda_tilde(m, 0);
    for m0 in 0..n {
        let mut matrix = CMat::zeros(width, width);
        let mut factors = Vec::with_capacity(width);
        let kind = if m0 == m { BlockKind::Scaled } else { BlockKind::Cross };
        for k0 in -w..=w {
            let row = if m0 == m {
                scaled_row(refspec, target, m, k0, window)?
            } else {
                cross_row(refspec, target, m, m0, k0, window)?
            };
            for (i, v) in row.into_iter().enumerate() {
                matrix[((k0 + w) as usize, i)] = v;
            }
            let lambda = target.lambda(refspec, m0, k0);
            let eps = linalg::expm1(base - lambda);
            if m0 == m {
                factors.push(if is_coincident(refspec, target, m, k0) {
                    ONE
                } else {
                    eps / (refspec.lambda_tilde(m, k0) - lambda)
                });
            } else {
                if eps.norm() < EPSILON_FLAG {
                    flagged.push((m0, k0));
                }
                factors.push(eps);
            }
        }
        let (sigma_min, sigma_max) = linalg::sigma_extremes(&matrix);
        blocks.push(BlockDiagnostics { m0, kind, sigma_min, sigma_max, factors });
    }
    Ok(LemmaDiagnostics { m, window, blocks, flagged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, CVec, ZERO};
    use crate::spectral::biorthogonal_frame;
    use alloc::vec;

    fn real(x: f64) -> C64 {
        c(x, 0.0)
    }

    #[test]
    fn cross_block_of_identity_target_is_bounded_below() {
        let r = ReferenceSpectrum::new(vec![real(2.0), real(-3.0)]).unwrap();
        let f = biorthogonal_frame(&CMat::identity(2, 2)).unwrap();
        let t = SpectralTarget::identity(&r, &f, 2);
        let small = invertibility_diagnostics(0, &r, &t, 16).unwrap();
        let large = invertibility_diagnostics(0, &r, &t, 64).unwrap();
        let (a, b) = (small.block(1).sigma_min, large.block(1).sigma_min);
        assert!(a > 0.1 && b > 0.1, "{a} {b}");
        assert!(a <= 2.0 * b && b <= 2.0 * a);
        // μ₀e^{−λ̃(1,k)} − 1 = 2/(−3) − 1
        for e in &small.block(1).factors {
            assert!((e - real(-5.0 / 3.0)).norm() < 1e-12);
        }
        assert!(small.flagged.is_empty());
        assert_eq!(small.block(0).kind, BlockKind::Scaled);
        assert!((small.block(0).sigma_min - 1.0).abs() < 1e-14);
    }

    #[test]
    fn q_factor_is_one_in_the_coincident_limit() {
        let r = ReferenceSpectrum::new(vec![real(2.0)]).unwrap();
        let t = SpectralTarget::from_fn(
            1,
            1,
            |_, k| r.lambda_tilde(0, k) + if k == 0 { real(1e-9) } else { ZERO },
            |_, _| CVec::from_element(1, ONE),
        )
        .unwrap();
        let d = invertibility_diagnostics(0, &r, &t, 2).unwrap();
        let q = d.block(0).factors[2];
        // (e^{−h} − 1)/(−h) with h = 1e−9
        assert!((q - real(1.0 - 0.5e-9)).norm() < 1e-15);
        assert_eq!(d.block(0).factors[0], ONE);
    }

    #[test]
    fn near_pole_target_is_flagged() {
        let r = ReferenceSpectrum::new(vec![real(2.0), real(-3.0)]).unwrap();
        let f = biorthogonal_frame(&CMat::identity(2, 2)).unwrap();
        // λ(1,0) placed within 1e−8 of λ̃(0,3) makes ε₀ tiny
        let t = SpectralTarget::from_fn(
            2,
            1,
            |m, k| {
                if m == 1 && k == 0 {
                    r.lambda_tilde(0, 3) + real(1e-8)
                } else {
                    r.lambda_tilde(m, k)
                }
            },
            |m, _| f.z_col(m),
        )
        .unwrap();
        let d = invertibility_diagnostics(0, &r, &t, 2).unwrap();
        assert_eq!(d.flagged, vec![(1, 0)]);
    }
}
