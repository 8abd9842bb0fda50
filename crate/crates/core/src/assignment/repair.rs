use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::linalg::C64;
use crate::sampling;
use crate::spectral::{AlphaTable, ReferenceSpectrum, SpectralTarget};
use crate::{Error, Result};

use super::operator::operator_conditions;
use super::REPAIR_GATE;

#[derive(Debug, Clone, PartialEq)]
pub struct RepairOptions {
    /// Total squared perturbation budget; each draw spends `ε/2`.
    pub epsilon: f64,
    pub seed: u64,
    /// Entries with `|k0| ≤ window` are perturbed.
    pub window: usize,
    pub max_retries: usize,
}

impl Default for RepairOptions {
    fn default() -> Self {
        Self { epsilon: 1e-2, seed: 0, window: 0, max_retries: 16 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationOutcome {
    pub alpha: AlphaTable,
    /// `Σ|Δα|²` actually applied.
    pub delta_norm_sq: f64,
    /// Zero when the input table already passed.
    pub retries: usize,
    pub conditions: Vec<f64>,
}

fn worst(conditions: &[f64]) -> f64 {
    conditions.iter().fold(0.0, |acc: f64, c| if c.is_nan() { f64::INFINITY } else { acc.max(*c) })
}

/// Perturbs the coordinate table until every `Dₘ` has condition at most
/// `REPAIR_GATE`. Retry `r` draws from ChaCha8 stream `r` of `seed`.
pub fn lemma2_adjust(
    alpha: &AlphaTable,
    target: &SpectralTarget,
    refspec: &ReferenceSpectrum,
    solve_window: usize,
    options: &RepairOptions,
) -> Result<PerturbationOutcome> {
    let conditions = operator_conditions(refspec, target, alpha, solve_window)?;
    let mut best = worst(&conditions);
    if best <= REPAIR_GATE {
        return Ok(PerturbationOutcome { alpha: alpha.clone(), delta_norm_sq: 0.0, retries: 0, conditions });
    }
    if !(options.epsilon > 0.0) {
        return Err(Error::AdjustmentFailed { retries: 0, best_condition: best });
    }
    let n = refspec.n();
    let w = options.window as i64;
    let base = alpha.widened(options.window);
    for retry in 1..=options.max_retries {
        let mut rng = sampling::stream(options.seed, retry as u64);
        let mut draws: Vec<(usize, usize, i64, C64)> = Vec::with_capacity(n * n * (2 * options.window + 1));
        for m0 in 0..n {
            for k0 in -w..=w {
                for m in 0..n {
                    draws.push((m, m0, k0, sampling::complex_box(&mut rng)));
                }
            }
        }
        let total: f64 = draws.iter().map(|d| d.3.norm_sqr()).sum();
        if !(total > 0.0) {
            continue;
        }
        let scale = (options.epsilon / 2.0 / total).sqrt();
        let mut candidate = base.clone();
        for (m, m0, k0, v) in draws {
            candidate.set(m, m0, k0, base.alpha(m, m0, k0) + v * scale);
        }
        let conditions = operator_conditions(refspec, target, &candidate, solve_window)?;
        let cond = worst(&conditions);
        if cond <= REPAIR_GATE {
            return Ok(PerturbationOutcome {
                alpha: candidate,
                delta_norm_sq: options.epsilon / 2.0,
                retries: retry,
                conditions,
            });
        }
        best = best.min(cond);
    }
    Err(Error::AdjustmentFailed { retries: options.max_retries, best_condition: best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, CMat};
    use crate::spectral::{alpha_decompose, biorthogonal_frame, EigenFrame};
    use alloc::vec;

    fn singular_setup() -> (ReferenceSpectrum, EigenFrame, SpectralTarget) {
        let r = ReferenceSpectrum::new(vec![c(2.0, 0.0), c(-3.0, 0.0)]).unwrap();
        let f = biorthogonal_frame(&CMat::identity(2, 2)).unwrap();
        // (0,0) keeps its grid eigenvalue but takes the other channel's vector
        let t = SpectralTarget::from_fn(
            2,
            2,
            |m, k| r.lambda_tilde(m, k),
            |m, k| if m == 0 && k == 0 { f.z_col(1) } else { f.z_col(m) },
        )
        .unwrap();
        (r, f, t)
    }

    #[test]
    fn passing_table_is_untouched() {
        let r = ReferenceSpectrum::new(vec![c(2.0, 0.0)]).unwrap();
        let f = biorthogonal_frame(&CMat::identity(1, 1)).unwrap();
        let t = SpectralTarget::identity(&r, &f, 1);
        let a = alpha_decompose(&t, &f);
        let out = lemma2_adjust(&a, &t, &r, 4, &RepairOptions { epsilon: 0.0, ..Default::default() }).unwrap();
        assert_eq!(out.retries, 0);
        assert_eq!(out.alpha, a);
    }

    #[test]
    fn singular_table_is_repaired_within_budget() {
        let (r, f, t) = singular_setup();
        let a = alpha_decompose(&t, &f);
        assert!(worst(&operator_conditions(&r, &t, &a, 4).unwrap()) > 1e10);
        let opts = RepairOptions { epsilon: 1e-2, seed: 7, window: 2, max_retries: 16 };
        let out = lemma2_adjust(&a, &t, &r, 4, &opts).unwrap();
        assert!(out.retries >= 1);
        assert!(worst(&out.conditions) <= REPAIR_GATE);
        let mut moved = 0.0;
        for m0 in 0..2 {
            for k0 in -2..=2 {
                for m in 0..2 {
                    moved += (out.alpha.alpha(m, m0, k0) - a.alpha(m, m0, k0)).norm_sqr();
                }
            }
        }
        assert!(moved <= 1e-2 + 1e-15);
        let again = lemma2_adjust(&a, &t, &r, 4, &opts).unwrap();
        assert_eq!(again, out);
    }

    #[test]
    fn zero_budget_on_singular_table_fails() {
        let (r, f, t) = singular_setup();
        let a = alpha_decompose(&t, &f);
        let opts = RepairOptions { epsilon: 0.0, window: 2, ..Default::default() };
        assert!(matches!(lemma2_adjust(&a, &t, &r, 4, &opts), Err(Error::AdjustmentFailed { retries: 0, .. })));
    }
}
