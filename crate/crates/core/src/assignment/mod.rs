//! Truncated block-operator systems `Dₘ·x = rhs` that carry a prescribed
//! spectrum and left vectors into perturbation coefficients, plus the
//! block invertibility diagnostics, the random repair of singular coordinate tables
//! and the finite-part transforms.
//!
//! For channel `m` the unknown blocks are `x^j`, `j = 0..n`, indexed by
//! `|k| ≤ N_s`. Row `(m0, k0)` reads
//!
//! ```text
//! Σⱼ α(j,m0,k0) Σₖ s(k0,k) x^j_k = α(m,m0,k0)           m0 ≠ m
//! Σⱼ α(j,m,k0)  Σₖ Λ(k0) s(k0,k) x^j_k = Λ(k0) α(m,m,k0)  m0 = m
//! ```
//!
//! with `s(k0,k) = 1/(λ̃ₖᵐ − λ(m0,k0))` and `Λ(k0) = λ̃ᵐ_{k0} − λ(m,k0)`.
//! The coefficients are recovered as `p(k,m,j) = −β̃ₖᵐ x^j_k`.

mod diagnostics;
mod finite_part;
mod operator;
mod repair;

pub use diagnostics::{invertibility_diagnostics, BlockDiagnostics, BlockKind, LemmaDiagnostics};
pub use finite_part::{finite_part_posttransform, finite_part_pretransform, FinitePartTransform};
pub use operator::{
    assemble_d, operator_conditions, s_entry, solve_assignment, solve_with_alpha,
    AssignmentSolution, TruncatedOperator,
};
pub(crate) use finite_part::pull_back;
pub use repair::{lemma2_adjust, PerturbationOutcome, RepairOptions};

/// Condition estimate above which `Dₘ` is declared singular.
pub const SOLVE_GATE: f64 = 1e10;
/// Condition estimate a repaired table must reach.
pub const REPAIR_GATE: f64 = 1e8;
