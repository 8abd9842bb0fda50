//! Forward and inverse spectral problems for neutral-type delay systems
//!
//! ```text
//! z'(t) = A₋₁ z'(t-1) + ∫₋₁⁰ A₂(θ) z'(t+θ) dθ + ∫₋₁⁰ A₃(θ) z(t+θ) dθ
//! ```
//!
//! The forward side evaluates the characteristic matrix
//! `Δ(λ) = λI − λe^{−λ}A₋₁ − λ∫e^{λθ}A₂ − ∫e^{λθ}A₃`, finds its roots and
//! left degenerating vectors. The inverse side builds `A₋₁, A₂(θ), A₃(θ)`
//! whose characteristic matrix has a prescribed spectrum `λₖᵐ` (quadratically
//! close to the logarithmic grid of `A₋₁`) together with prescribed left
//! degenerating vectors `dₖᵐ`.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
// `!(x <= gate)` deliberately rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

mod error;
pub mod linalg;
pub mod quad;
mod sampling;

pub mod assignment;
pub mod charmatrix;
pub mod forward;
pub mod pipeline;
pub mod reconstruct;
pub mod spectral;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec, C64};

pub use assignment::{
    assemble_d, finite_part_posttransform, finite_part_pretransform, invertibility_diagnostics,
    lemma2_adjust, s_entry, solve_assignment, solve_with_alpha, AssignmentSolution,
    FinitePartTransform, LemmaDiagnostics, PerturbationOutcome, RepairOptions, TruncatedOperator,
};
pub use charmatrix::{
    degeneracy, delta_derivative, delta_eval, f_matrix, transform_coeff, DegeneracyReport,
    FMatrix, MatrixFunctionRep, SystemRealization,
};
pub use forward::{
    count_roots_box, newton_root, spectrum_near_grid, verify_assignment, NewtonOutcome,
    SpectrumEntry, SpectrumReport, VerificationEntry, VerificationReport,
};
pub use pipeline::{assign, AssignOptions, Assignment, AssignmentProblem};
pub use reconstruct::{
    absorb_q1, gram_matrix, p_to_realization, AbsorbOutcome, GramSystem, ReconstructionBasis,
};
pub use spectral::{
    alpha_decompose, biorthogonal_frame, closeness_report, minus_one_matrix, reference_grid,
    AlphaTable, ClosenessReport, EigenFrame, FinitePart, ReferenceSpectrum, SpectralTarget,
};
