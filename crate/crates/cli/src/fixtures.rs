//! Built-in problem files. All use `μ = (2, −3)` and the non-orthogonal frame
//! `z₀ = (1, 0.3)`, `z₁ = (−0.2, 1)`.

use clap::ValueEnum;
use neutral_assign::linalg::{c, CVec, C64};
use neutral_assign::{biorthogonal_frame, EigenFrame, ReferenceSpectrum};

use crate::format::{vector, Cx, FinitePartFile, OptionsFile, ProblemFile, TargetFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FixtureName {
    /// The reference data itself; assigns to an unperturbed system.
    Identity,
    /// Eigenvalues shifted by `(0.1 + 0.1i)/(1 + k²)`, vectors tilted towards the other channel.
    Shifted,
    /// `shifted` plus the finite part `λ⁰ = (−1, −2)` with unit vectors.
    FinitePart,
    /// Channel 0 takes channel 1's vector at `k = 0`; the plain solve is singular.
    Singular,
}

const WINDOW: usize = 2;

fn reference() -> (Vec<C64>, Vec<Vec<Cx>>, ReferenceSpectrum, EigenFrame) {
    let mu = vec![c(2.0, 0.0), c(-3.0, 0.0)];
    let z = neutral_assign::CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(-0.2, 0.0), c(0.3, 0.0), c(1.0, 0.0)]);
    let frame = biorthogonal_frame(&z).expect("fixture frame is invertible");
    let refspec = ReferenceSpectrum::new(mu.clone()).expect("fixture mu is valid");
    let cols = (0..2).map(|m| vector(&frame.z_col(m))).collect();
    (mu, cols, refspec, frame)
}

fn table<T>(f: impl Fn(usize, i64) -> T) -> Vec<Vec<T>> {
    let w = WINDOW as i64;
    (0..2).map(|m| (-w..=w).map(|k| f(m, k)).collect()).collect()
}

pub fn problem(name: FixtureName) -> ProblemFile {
    let (mu, z, refspec, frame) = reference();
    let shifted_lambda = || table(|m, k| Cx::from(refspec.lambda_tilde(m, k) + c(0.1, 0.1) / (1.0 + (k * k) as f64)));
    let tilted_d = || {
        table(|m, k| vector(&(frame.z_col(m) + frame.z_col(1 - m) * c(0.05 / (1.0 + k.unsigned_abs() as f64), 0.0))))
    };
    let unit = |i: usize| vector(&CVec::from_fn(2, |r, _| if r == i { c(1.0, 0.0) } else { c(0.0, 0.0) }));
    let target = match name {
        FixtureName::Identity => TargetFile { window: WINDOW, lambda: None, d: None, finite_part: None },
        FixtureName::Shifted => TargetFile { window: WINDOW, lambda: Some(shifted_lambda()), d: Some(tilted_d()), finite_part: None },
        FixtureName::FinitePart => TargetFile {
            window: WINDOW,
            lambda: Some(shifted_lambda()),
            d: Some(tilted_d()),
            finite_part: Some(FinitePartFile { lambda0: vec![Cx(-1.0, 0.0), Cx(-2.0, 0.0)], d0: vec![unit(0), unit(1)] }),
        },
        FixtureName::Singular => TargetFile {
            window: WINDOW,
            lambda: Some(table(|m, k| Cx::from(refspec.lambda_tilde(m, k)))),
            d: Some(table(|m, k| vector(&frame.z_col(if m == 0 && k == 0 { 1 } else { m })))),
            finite_part: None,
        },
    };
    let options = OptionsFile { solve_window: Some(4 * WINDOW), seed: 42, ..OptionsFile::default() };
    ProblemFile { n: Some(2), mu: mu.into_iter().map(Cx::from).collect(), z, target, options }
}
