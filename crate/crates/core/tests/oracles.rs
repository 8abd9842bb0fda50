//! Closed forms checked against independent evaluations: adaptive quadrature
//! of the defining integrals, central differences and direct substitution
//! into the componentwise spectral equation.

mod common;

use common::*;
use neutral_assign::assignment::{finite_part_posttransform, finite_part_pretransform};
use neutral_assign::charmatrix::{moment, MatrixFunctionRep};
use neutral_assign::linalg::{c, CMat, CVec, ONE, ZERO};
use neutral_assign::{
    AssignmentSolution, delta_derivative, delta_eval, f_matrix, p_to_realization, solve_assignment, transform_coeff, FinitePart,
    ReconstructionBasis, ReferenceSpectrum, SystemRealization,
};
use neutral_assign::spectral::biorthogonal_frame;
use rand::Rng;

#[test]
fn moments_match_quadrature() {
    let mut r = rng(11);
    for _ in 0..40 {
        let s = c(r.random_range(-3.0..3.0), r.random_range(-40.0..40.0)) * 10f64.powi(r.random_range(-8..1));
        for n in 0..=2u32 {
            let q = adaptive(&|t: f64| (s * t).exp() * t.powi(n as i32), -1.0, 0.0, 1e-15);
            let v = moment(n, s);
            assert!((v - q).norm() <= 1e-12 * q.norm().max(1e-3), "n={n} s={s}: {v} vs {q}");
        }
    }
}

#[test]
fn linear_term_transform_at_one() {
    let mut rep = MatrixFunctionRep::zero(1);
    rep.add_linear(&CMat::identity(1, 1));
    let closed = transform_coeff(&rep, ONE)[(0, 0)];
    let q = adaptive(&|t: f64| c(t * t.exp(), 0.0), -1.0, 0.0, 1e-15);
    // ∫₋₁⁰ θe^θ dθ = 2/e − 1
    assert!((closed - q).norm() < 1e-12);
    assert!((closed - real(2.0 / std::f64::consts::E - 1.0)).norm() < 1e-15);
}

#[test]
fn delta_matches_quadrature_on_random_systems() {
    let mut r = rng(2024);
    for case in 0..50 {
        let n = 1 + case % 3;
        let sys = random_system(&mut r, n);
        let lambda = random_lambda(&mut r);
        let closed = delta_eval(&sys, lambda);
        let quad = delta_by_quadrature(&sys, lambda, 1e-14);
        let e = rel(&closed, &quad);
        assert!(e <= 1e-10, "case {case}: {e:e}");
    }
}

#[test]
fn delta_at_zero_is_minus_mean_a3() {
    let mut r = rng(5);
    let sys = random_system(&mut r, 2);
    let d0 = delta_eval(&sys, ZERO);
    assert!(rel(&d0, &(-sys.a3.integral())) < 1e-15);
}

#[test]
fn derivative_matches_central_differences() {
    let mut r = rng(77);
    let h = 1e-5;
    for case in 0..30 {
        let sys = random_system(&mut r, 1 + case % 3);
        let lambda = random_lambda(&mut r);
        let fd = (delta_eval(&sys, lambda + h) - delta_eval(&sys, lambda - h)) / c(2.0 * h, 0.0);
        let fd_im = (delta_eval(&sys, lambda + c(0.0, h)) - delta_eval(&sys, lambda - c(0.0, h))) / c(0.0, 2.0 * h);
        let an = delta_derivative(&sys, lambda);
        assert!(rel(&an, &fd) <= 1e-7, "case {case}: {:e}", rel(&an, &fd));
        assert!(rel(&an, &fd_im) <= 1e-7, "case {case}: {:e}", rel(&an, &fd_im));
    }
}

#[test]
fn scalar_derivative_at_ln2() {
    let sys = SystemRealization::unperturbed(CMat::identity(1, 1) * real(2.0));
    let l = real(std::f64::consts::LN_2);
    let h = 1e-6;
    let fd = (delta_eval(&sys, l + h) - delta_eval(&sys, l - h))[(0, 0)] / (2.0 * h);
    let an = delta_derivative(&sys, l)[(0, 0)];
    assert!((an - fd).norm() < 1e-8);
    assert!((an - l).norm() < 1e-15);
}

#[test]
fn f_matrix_identity_on_random_systems() {
    let mut r = rng(303);
    for _ in 0..20 {
        let sys = random_system(&mut r, 2);
        let lambda = random_lambda(&mut r);
        let f = f_matrix(&sys, lambda).unwrap();
        assert!(f.identity_residual <= 1e-10, "{:e}", f.identity_residual);
    }
}

#[test]
fn single_coefficient_reconstruction_by_quadrature() {
    // n = 1, μ = 2, p(0,0,0) = λ̃₀ ⇒ ∫g e^{λ̃ₖθ} = δ_{k0}
    let refspec = ReferenceSpectrum::new(vec![real(2.0)]).unwrap();
    let frame = biorthogonal_frame(&CMat::identity(1, 1)).unwrap();
    let sol = AssignmentSolution::from_fn(1, 4, |k, _, _| if k == 0 { refspec.lambda_tilde(0, 0) } else { ZERO });
    for basis in [ReconstructionBasis::Dual, ReconstructionBasis::Gram] {
        let sys = p_to_realization(&sol, &frame, &refspec, basis).unwrap();
        for k in -4i64..=4 {
            let grid = refspec.lambda_tilde(0, k);
            let q = adaptive(&|t: f64| (grid * t).exp() * sys.a2.eval(t)[(0, 0)], -1.0, 0.0, 1e-14);
            let want = if k == 0 { ONE } else { ZERO };
            assert!((q - want).norm() < 1e-10, "{basis:?} k={k}: {q}");
        }
    }
    // the dual expansion also has zero moments beyond the window
    let sys = p_to_realization(&sol, &frame, &refspec, ReconstructionBasis::Dual).unwrap();
    for k in [-9i64, 5, 12] {
        let grid = refspec.lambda_tilde(0, k);
        let q = adaptive(&|t: f64| (grid * t).exp() * sys.a2.eval(t)[(0, 0)], -1.0, 0.0, 1e-14);
        assert!(q.norm() < 1e-10, "k={k}: {q}");
    }
}

#[test]
fn spectral_equation_holds_on_solved_fixture() {
    let fx = roundtrip_fixture(3);
    let sol = solve_assignment(&fx.refspec, &fx.frame, &fx.target, 12).unwrap();
    for m in 0..2 {
        for k in -3..=3 {
            let l = fx.target.lambda(&fx.refspec, m, k);
            let d = fx.target.vector(&fx.frame, m, k);
            let r = spectral_equation_residual(&sol, &fx.refspec, &fx.frame, l, &d);
            assert!(r <= 1e-9, "({m},{k}): {r:e}");
        }
    }
    assert!(sol.residual.iter().all(|r| *r <= 1e-10));
}

#[test]
fn scalar_spectral_equation() {
    let refspec = ReferenceSpectrum::new(vec![real(2.0)]).unwrap();
    let frame = biorthogonal_frame(&CMat::identity(1, 1)).unwrap();
    let target = neutral_assign::SpectralTarget::from_fn(
        1,
        2,
        |_, k| refspec.lambda_tilde(0, k) + if k == 0 { real(0.1) } else { ZERO },
        |_, _| CVec::from_element(1, ONE),
    )
    .unwrap();
    let sol = solve_assignment(&refspec, &frame, &target, 8).unwrap();
    let r = spectral_equation_residual(&sol, &refspec, &frame, target.lambda(&refspec, 0, 0), &CVec::from_element(1, ONE));
    assert!(r <= 1e-10, "{r:e}");
}

#[test]
fn reconstructed_transform_matches_coefficients() {
    let fx = roundtrip_fixture(2);
    let sol = solve_assignment(&fx.refspec, &fx.frame, &fx.target, 8).unwrap();
    let sys = p_to_realization(&sol, &fx.frame, &fx.refspec, ReconstructionBasis::Dual).unwrap();
    for m in 0..2 {
        for j in 0..2 {
            for k in -8..=8 {
                let grid = fx.refspec.lambda_tilde(m, k);
                let got = (fx.frame.z_col(j).adjoint() * sys.a2.transform(grid) * fx.frame.y_col(m))[(0, 0)] * grid;
                let want = sol.p(k, m, j);
                assert!((got - want).norm() <= 1e-9 * want.norm().max(1.0), "({k},{m},{j})");
            }
        }
    }
}

#[test]
fn finite_part_chain_identity() {
    // dₖᵐ*Δ(λₖᵐ) = f̂ₖᵐ*Δ̂(λₖᵐ) for the transformed system
    let fx = roundtrip_fixture(2);
    let e = |i: usize| CVec::from_fn(2, |r, _| if r == i { ONE } else { ZERO });
    let target = fx
        .target
        .clone()
        .with_finite_part(FinitePart { lambda0: vec![real(-1.0), real(-2.0)], d0: vec![e(0), e(1)] })
        .unwrap();
    let pre = finite_part_pretransform(&target, &fx.refspec, &fx.frame, 4).unwrap();
    let sol = solve_assignment(&fx.refspec, &fx.frame, &pre.f_hat, 8).unwrap();
    let hat = p_to_realization(&sol, &fx.frame, &fx.refspec, ReconstructionBasis::Dual).unwrap();
    let sys = finite_part_posttransform(&hat, &pre.c).unwrap();
    for m in 0..2 {
        for k in -2..=2 {
            let l = target.lambda(&fx.refspec, m, k);
            let lhs = target.vector(&fx.frame, m, k).adjoint() * delta_eval(&sys, l);
            let rhs = pre.f_hat.vector(&fx.frame, m, k).adjoint() * delta_eval(&hat, l);
            assert!((&lhs - &rhs).norm() <= 1e-9 * lhs.norm().max(1.0));
            assert!(rhs.norm() <= 1e-9, "({m},{k}) {:e}", rhs.norm());
        }
    }
    for j in 0..2 {
        let d = e(j).adjoint() * delta_eval(&sys, target.finite_part().unwrap().lambda0[j]);
        assert!(d.norm() <= 1e-12);
    }
}
