#![allow(clippy::needless_range_loop)]
#![allow(dead_code)]

use neutral_assign::charmatrix::MatrixFunctionRep;
use neutral_assign::linalg::{c, CMat, CVec, C64};
use neutral_assign::{biorthogonal_frame, EigenFrame, ReferenceSpectrum, SpectralTarget, SystemRealization};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn real(x: f64) -> C64 {
    c(x, 0.0)
}

pub fn cplx(rng: &mut StdRng, scale: f64) -> C64 {
    c(rng.random_range(-scale..scale), rng.random_range(-scale..scale))
}

pub fn cmat(rng: &mut StdRng, n: usize, scale: f64) -> CMat {
    CMat::from_fn(n, n, |_, _| cplx(rng, scale))
}

pub fn cvec(rng: &mut StdRng, n: usize, scale: f64) -> CVec {
    CVec::from_fn(n, |_, _| cplx(rng, scale))
}

pub fn random_rep(rng: &mut StdRng, n: usize) -> MatrixFunctionRep {
    let mut rep = MatrixFunctionRep::zero(n);
    rep.add_constant(&cmat(rng, n, 0.3));
    rep.add_linear(&cmat(rng, n, 0.3));
    for _ in 0..3 {
        let e = c(rng.random_range(-1.5..1.5), rng.random_range(-15.0..15.0));
        rep.add_exponential(e, &cmat(rng, n, 0.3));
    }
    rep
}

pub fn random_system(rng: &mut StdRng, n: usize) -> SystemRealization {
    let am = cmat(rng, n, 1.0);
    let a2 = random_rep(rng, n);
    let a3 = random_rep(rng, n);
    SystemRealization::new(am, a2, a3).unwrap()
}

pub fn random_lambda(rng: &mut StdRng) -> C64 {
    c(rng.random_range(-1.0..2.0), rng.random_range(-25.0..25.0))
}

/// Adaptive Simpson on `[a, b]` for complex integrands.
pub fn adaptive<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64, tol: f64) -> C64 {
    fn simpson<F: Fn(f64) -> C64>(f: &F, a: f64, fa: C64, b: f64, fb: C64) -> (f64, C64, C64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (fa + fm * 4.0 + fb) * ((b - a) / 6.0))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> C64>(
        f: &F, a: f64, fa: C64, b: f64, fb: C64, whole: C64, m: f64, fm: C64, tol: f64, depth: u32,
    ) -> C64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.norm() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
    }
    // pre-split so oscillatory integrands are resolved before the error test
    let pieces = 64;
    let h = (b - a) / pieces as f64;
    let mut total = C64::new(0.0, 0.0);
    for i in 0..pieces {
        let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
        let (flo, fhi) = (f(lo), f(hi));
        let (m, fm, whole) = simpson(f, lo, flo, hi, fhi);
        total += recurse(f, lo, flo, hi, fhi, whole, m, fm, tol / pieces as f64, 40);
    }
    total
}

/// `∫₋₁⁰ e^{λθ} A(θ) dθ` entrywise by adaptive quadrature.
pub fn transform_by_quadrature(rep: &MatrixFunctionRep, lambda: C64, tol: f64) -> CMat {
    let n = rep.n();
    CMat::from_fn(n, n, |i, j| adaptive(&|t| (lambda * t).exp() * rep.eval(t)[(i, j)], -1.0, 0.0, tol))
}

/// `Δ(λ)` from its defining integrals.
pub fn delta_by_quadrature(sys: &SystemRealization, lambda: C64, tol: f64) -> CMat {
    let n = sys.n();
    let body = CMat::identity(n, n) - &sys.a_minus1 * (-lambda).exp() - transform_by_quadrature(&sys.a2, lambda, tol);
    body * lambda - transform_by_quadrature(&sys.a3, lambda, tol)
}

pub fn rel(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// The criterion-4 fixture: `μ = (2, −3)`, frame `z₁ = (1, 0.3)`, `z₂ = (−0.2, 1)`.
pub struct Fixture {
    pub refspec: ReferenceSpectrum,
    pub frame: EigenFrame,
    pub target: SpectralTarget,
    pub z: CMat,
}

pub fn roundtrip_fixture(window: usize) -> Fixture {
    let mu = vec![real(2.0), real(-3.0)];
    let z = CMat::from_row_slice(2, 2, &[real(1.0), real(-0.2), real(0.3), real(1.0)]);
    let refspec = ReferenceSpectrum::new(mu).unwrap();
    let frame = biorthogonal_frame(&z).unwrap();
    let target = SpectralTarget::from_fn(
        2,
        window,
        |m, k| refspec.lambda_tilde(m, k) + c(0.1, 0.1) * (1.0 / (1.0 + (k * k) as f64)),
        |m, k| frame.z_col(m) + frame.z_col(1 - m) * real(0.05 / (1.0 + k.abs() as f64)),
    )
    .unwrap();
    Fixture { refspec, frame, target, z }
}

/// `|αₘ + Σ_{j,k} αⱼ (p(k,m,j)/β̃ₖᵐ) / (λ̃ₖᵐ − λ₀)|` maximised over `m`, for
/// the left vector `d` at `λ₀`.
pub fn spectral_equation_residual(
    solution: &neutral_assign::AssignmentSolution,
    refspec: &ReferenceSpectrum,
    frame: &EigenFrame,
    lambda0: C64,
    d: &CVec,
) -> f64 {
    let n = refspec.n();
    let alpha: Vec<C64> = (0..n).map(|m| (d.adjoint() * frame.y_col(m))[(0, 0)]).collect();
    let w = solution.window() as i64;
    let mut worst: f64 = 0.0;
    for m in 0..n {
        // on channel m's own grid the equation reduces to Σⱼ αⱼ r(k0,m,j) = 0
        if let Some((mg, k0)) = refspec.grid_index(lambda0).filter(|(mg, _)| *mg == m) {
            let acc: C64 = (0..n).map(|j| alpha[j] * solution.p(k0, mg, j) / refspec.beta_tilde(mg, k0)).sum();
            worst = worst.max(acc.norm());
            continue;
        }
        let mut acc = alpha[m];
        for j in 0..n {
            for k in -w..=w {
                let p = solution.p(k, m, j);
                if p != C64::new(0.0, 0.0) {
                    acc += alpha[j] * p / refspec.beta_tilde(m, k) / (refspec.lambda_tilde(m, k) - lambda0);
                }
            }
        }
        worst = worst.max(acc.norm());
    }
    worst
}
