//! Realizations built from solved coefficients, the Gram system of the
//! exponential family and the absorption of constant-row operators `Q₁`.
//!
//! With `r(k,m,j) = p(k,m,j)/λ̃ₖᵐ` the frame entries `gⱼₘ = zⱼ*A₂yₘ` must
//! satisfy `∫₋₁⁰ gⱼₘ(θ)e^{λ̃ₖᵐθ}dθ = r(k,m,j)` on the window and vanish on
//! every other grid exponential. The family `e^{−λ̃ₖᵐθ}` is biorthogonal to
//! `e^{λ̃ₖᵐθ}` under the bilinear pairing, so `gⱼₘ = Σₖ r(k,m,j)e^{−λ̃ₖᵐθ}`
//! meets both requirements exactly. The Gram route expands `gⱼₘ` in
//! `e^{+λ̃ₖᵐθ}` instead and only matches the window.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::assignment::AssignmentSolution;
use crate::charmatrix::{moment, MatrixFunctionRep, SystemRealization};
use crate::linalg::{self, c, CMat, CVec, C64, ZERO};
use crate::quad;
use crate::sampling;
use crate::spectral::{EigenFrame, ReferenceSpectrum};
use crate::{Error, Result};

/// Gram systems beyond this condition estimate are refused.
pub const GRAM_GATE: f64 = 1e10;
/// Tolerance of the `absorb_q1` functional identity.
pub const ABSORB_TOL: f64 = 1e-10;
const ABSORB_SAMPLES: u64 = 10;
const ABSORB_SEED: u64 = 0xab50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReconstructionBasis {
    /// `gⱼₘ` in `e^{−λ̃ₖᵐθ}`; exact on and off the window.
    #[default]
    Dual,
    /// `gⱼₘ` in `e^{λ̃ₖᵐθ}` via `G·c = r`; exact on the window only.
    Gram,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramSystem {
    pub m: usize,
    pub window: usize,
    /// `G[k + N][k' + N] = ∫₋₁⁰ e^{(λ̃ₖ + λ̃ₖ')θ} dθ`
    pub matrix: CMat,
    pub condition: f64,
}

pub fn gram_matrix(refspec: &ReferenceSpectrum, m: usize, window: usize) -> GramSystem {
    let w = window as i64;
    let width = 2 * window + 1;
    let mut matrix = CMat::zeros(width, width);
    for a in -w..=w {
        for b in a..=w {
            let v = moment(0, refspec.lambda_tilde(m, a) + refspec.lambda_tilde(m, b));
            matrix[((a + w) as usize, (b + w) as usize)] = v;
            matrix[((b + w) as usize, (a + w) as usize)] = v;
        }
    }
    let condition = linalg::condition(&matrix);
    GramSystem { m, window, matrix, condition }
}

/// Canonical realization (`A₃ ≡ 0`) whose `A₂` carries the solved coefficients.
pub fn p_to_realization(
    solution: &AssignmentSolution,
    frame: &EigenFrame,
    refspec: &ReferenceSpectrum,
    basis: ReconstructionBasis,
) -> Result<SystemRealization> {
    let n = refspec.n();
    if solution.n() != n || frame.n() != n {
        return Err(Error::InvalidInput(format!(
            "solution has {} channels, reference has {n}, frame has {}",
            solution.n(),
            frame.n()
        )));
    }
    let a_minus1 = crate::spectral::minus_one_matrix(frame, refspec.mu())?;
    let w = solution.window() as i64;
    let mut a2 = MatrixFunctionRep::zero(n);
    for m in 0..n {
        // r[j][k + w]
        let mut r: Vec<Vec<C64>> = Vec::with_capacity(n);
        for j in 0..n {
            let mut row = Vec::with_capacity(2 * solution.window() + 1);
            for k in -w..=w {
                let p = solution.p(k, m, j);
                let grid = refspec.lambda_tilde(m, k);
                if p != ZERO && grid == ZERO {
                    return Err(Error::Domain(format!("grid point ({m},{k}) is zero")));
                }
                row.push(if p == ZERO { ZERO } else { p / grid });
            }
            r.push(row);
        }
        let (exponents, coeffs) = match basis {
            ReconstructionBasis::Dual => {
                let exps: Vec<C64> = (-w..=w).map(|k| -refspec.lambda_tilde(m, k)).collect();
                (exps, r)
            }
            ReconstructionBasis::Gram => {
                let gram = gram_matrix(refspec, m, solution.window());
                if !(gram.condition <= GRAM_GATE) {
                    return Err(Error::Conditioning { what: "Gram system".into(), ratio: gram.condition });
                }
                let lu = gram.matrix.clone().lu();
                let coeffs = r
                    .iter()
                    .map(|row| {
                        let rhs = CVec::from_column_slice(row);
                        lu.solve(&rhs)
                            .map(|c| c.iter().copied().collect())
                            .ok_or(Error::Conditioning { what: "Gram system".into(), ratio: f64::INFINITY })
                    })
                    .collect::<Result<Vec<Vec<C64>>>>()?;
                let exps: Vec<C64> = (-w..=w).map(|k| refspec.lambda_tilde(m, k)).collect();
                (exps, coeffs)
            }
        };
        let z_adj = frame.z_col(m).adjoint();
        for (i, e) in exponents.iter().enumerate() {
            let mut column = CVec::zeros(n);
            for j in 0..n {
                column += frame.y_col(j) * coeffs[j][i];
            }
            if column.iter().all(|v| *v == ZERO) {
                continue;
            }
            a2.add_exponential(*e, &(column * &z_adj));
        }
    }
    SystemRealization::new(a_minus1, a2, MatrixFunctionRep::zero(n))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbsorbOutcome {
    pub a2: MatrixFunctionRep,
    pub a3: MatrixFunctionRep,
    /// Worst relative mismatch of the functional identity over the test corpus.
    pub identity_residual: f64,
}

/// `A₂ = Â₂ + (θ+1)Q₁ − θQ₁A₋₁`, `A₃ = Â₃ + Q₁ − Q₁A₋₁`.
pub fn absorb_q1(
    a2_hat: &MatrixFunctionRep,
    a3_hat: &MatrixFunctionRep,
    q1: &CMat,
    a_minus1: &CMat,
) -> Result<AbsorbOutcome> {
    let n = a_minus1.nrows();
    if a2_hat.n() != n || a3_hat.n() != n || q1.nrows() != n || q1.ncols() != n {
        return Err(Error::InvalidInput("absorb_q1: inconsistent dimensions".into()));
    }
    let qa = q1 * a_minus1;
    let mut a2 = a2_hat.clone();
    a2.add_constant(q1);
    a2.add_linear(&(q1 - &qa));
    let mut a3 = a3_hat.clone();
    a3.add_constant(&(q1 - &qa));
    let identity_residual = absorb_identity_residual(a2_hat, a3_hat, &a2, &a3, q1, a_minus1);
    if !(identity_residual <= ABSORB_TOL) {
        return Err(Error::Internal(format!(
            "absorb_q1 identity residual {identity_residual:e} exceeds {ABSORB_TOL:e}"
        )));
    }
    Ok(AbsorbOutcome { a2, a3, identity_residual })
}

/// Test function `φ(θ) = u cos(aθ) + v e^{bθ} + w θ²` and its derivative.
struct TestFunction {
    u: CVec,
    v: CVec,
    w: CVec,
    a: f64,
    b: f64,
}

impl TestFunction {
    fn draw(n: usize, index: u64) -> Self {
        let mut rng = sampling::stream(ABSORB_SEED, index);
        let vec = |rng: &mut _| CVec::from_fn(n, |_, _| sampling::complex_box(rng));
        let u = vec(&mut rng);
        let v = vec(&mut rng);
        let w = vec(&mut rng);
        let a = sampling::uniform(&mut rng, 1.0, 6.0);
        let b = sampling::uniform(&mut rng, -2.0, 2.0);
        Self { u, v, w, a, b }
    }

    fn value(&self, t: f64) -> CVec {
        &self.u * c((self.a * t).cos(), 0.0) + &self.v * c((self.b * t).exp(), 0.0) + &self.w * c(t * t, 0.0)
    }

    fn derivative(&self, t: f64) -> CVec {
        &self.u * c(-self.a * (self.a * t).sin(), 0.0)
            + &self.v * c(self.b * (self.b * t).exp(), 0.0)
            + &self.w * c(2.0 * t, 0.0)
    }
}

/// `∫₋₁⁰ A₂φ′ + A₃φ dθ` by composite Gauss–Legendre.
fn pairing(a2: &MatrixFunctionRep, a3: &MatrixFunctionRep, phi: &TestFunction, panels: usize) -> CVec {
    let n = a2.n();
    let (nodes, weights) = quad::gauss_legendre(16);
    let h = 1.0 / panels as f64;
    let mut acc = CVec::zeros(n);
    for p in 0..panels {
        let lo = -1.0 + p as f64 * h;
        for (x, wt) in nodes.iter().zip(&weights) {
            let t = lo + 0.5 * h * (x + 1.0);
            let term = a2.eval(t) * phi.derivative(t) + a3.eval(t) * phi.value(t);
            acc += term * c(0.5 * h * wt, 0.0);
        }
    }
    acc
}

fn panels_for(reps: &[&MatrixFunctionRep]) -> usize {
    let fastest = reps
        .iter()
        .flat_map(|r| r.exponentials().iter().map(|(e, _)| e.norm()))
        .fold(6.0, f64::max);
    (fastest / 2.0).ceil() as usize + 4
}

/// Worst relative mismatch of
/// `Q₁(φ(0) − A₋₁φ(−1)) + ∫Â₂φ′ + ∫Â₃φ = ∫A₂φ′ + ∫A₃φ` over the seeded corpus.
pub fn absorb_identity_residual(
    a2_hat: &MatrixFunctionRep,
    a3_hat: &MatrixFunctionRep,
    a2: &MatrixFunctionRep,
    a3: &MatrixFunctionRep,
    q1: &CMat,
    a_minus1: &CMat,
) -> f64 {
    let n = a_minus1.nrows();
    let panels = panels_for(&[a2_hat, a3_hat, a2, a3]);
    let mut worst: f64 = 0.0;
    for index in 0..ABSORB_SAMPLES {
        let phi = TestFunction::draw(n, index);
        let boundary = q1 * (phi.value(0.0) - a_minus1 * phi.value(-1.0));
        let lhs = boundary + pairing(a2_hat, a3_hat, &phi, panels);
        let rhs = pairing(a2, a3, &phi, panels);
        let scale = lhs.norm().max(rhs.norm()).max(1.0);
        worst = worst.max((lhs - rhs).norm() / scale);
    }
    worst
}
