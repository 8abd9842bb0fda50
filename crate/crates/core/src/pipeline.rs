//! End-to-end assignment: validate, optional finite-part pretransform,
//! coordinate decomposition, solve (with repair), reconstruct, posttransform.

use alloc::vec::Vec;

use crate::assignment::{
    finite_part_posttransform, finite_part_pretransform, lemma2_adjust, solve_with_alpha,
    AssignmentSolution, FinitePartTransform, PerturbationOutcome, RepairOptions,
};
use crate::charmatrix::SystemRealization;
use crate::forward::{verify_assignment, VerificationReport};
use crate::linalg::{CMat, C64};
use crate::reconstruct::{p_to_realization, ReconstructionBasis};
use crate::spectral::{
    alpha_decompose, biorthogonal_frame, closeness_report, AlphaTable, ClosenessReport, EigenFrame,
    ReferenceSpectrum, SpectralTarget, SOLVABILITY_WARNING,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentProblem {
    pub mu: Vec<C64>,
    /// Columns are the left eigenvectors `zₘ` of `A₋₁`.
    pub z: CMat,
    pub target: SpectralTarget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssignOptions {
    /// `N_s`; defaults to `max(4N_t, 2)`.
    pub solve_window: Option<usize>,
    pub repair: bool,
    pub repair_epsilon: f64,
    /// Entries with `|k0|` up to this are perturbed; defaults to `N_t`.
    pub repair_window: Option<usize>,
    pub seed: u64,
    pub max_retries: usize,
    pub basis: ReconstructionBasis,
}

impl Default for AssignOptions {
    fn default() -> Self {
        let r = RepairOptions::default();
        Self {
            solve_window: None,
            repair: true,
            repair_epsilon: r.epsilon,
            repair_window: None,
            seed: r.seed,
            max_retries: r.max_retries,
            basis: ReconstructionBasis::default(),
        }
    }
}

impl AssignOptions {
    pub fn solve_window_for(&self, target_window: usize) -> usize {
        self.solve_window.unwrap_or((4 * target_window).max(2))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub system: SystemRealization,
    pub refspec: ReferenceSpectrum,
    pub frame: EigenFrame,
    /// The spectrum the system carries: the input target, or its repaired
    /// neighbour when the coordinate table had to move.
    pub target: SpectralTarget,
    pub solution: AssignmentSolution,
    pub solve_window: usize,
    pub repair: Option<PerturbationOutcome>,
    pub finite_part: Option<FinitePartTransform>,
    pub closeness: ClosenessReport,
}

impl Assignment {
    pub fn verify(&self, window: usize, tol_root: f64, tol_vec: f64) -> Result<VerificationReport> {
        verify_assignment(&self.system, &self.target, &self.refspec, &self.frame, window, tol_root, tol_vec)
    }
}

pub fn assign(problem: &AssignmentProblem, options: &AssignOptions) -> Result<Assignment> {
    let refspec = ReferenceSpectrum::new(problem.mu.clone())?;
    refspec.require_assignable()?;
    let frame = biorthogonal_frame(&problem.z)?;
    let target = &problem.target;
    target.validate(&refspec, &frame)?;
    let closeness = closeness_report(target, &refspec, &frame, SOLVABILITY_WARNING);
    let n_s = options.solve_window_for(target.window());

    let finite_part = match target.finite_part() {
        Some(_) => Some(finite_part_pretransform(target, &refspec, &frame, n_s / 2)?),
        None => None,
    };
    let base = match &finite_part {
        Some(fp) => fp.f_hat.clone(),
        None => target.clone(),
    };
    let alpha = alpha_decompose(&base, &frame);

    let (solution, repair) = match solve_with_alpha(&refspec, &base, &alpha, n_s) {
        Ok(s) => (s, None),
        Err(Error::SolverSingular { .. }) if options.repair => {
            let repair_options = RepairOptions {
                epsilon: options.repair_epsilon,
                seed: options.seed,
                window: options.repair_window.unwrap_or(target.window()).min(n_s),
                max_retries: options.max_retries,
            };
            let outcome = lemma2_adjust(&alpha, &base, &refspec, n_s, &repair_options)?;
            let solution = solve_with_alpha(&refspec, &base, &outcome.alpha, n_s)?;
            (solution, Some(outcome))
        }
        Err(e) => return Err(e),
    };

    let hat = p_to_realization(&solution, &frame, &refspec, options.basis)?;
    let system = match &finite_part {
        Some(fp) => finite_part_posttransform(&hat, &fp.c)?,
        None => hat,
    };

    let carried = match &repair {
        Some(outcome) => carried_target(&base, &outcome.alpha, &refspec, &frame, target, finite_part.as_ref())?,
        None => target.clone(),
    };
    Ok(Assignment {
        system,
        refspec,
        frame,
        target: carried,
        solution,
        solve_window: n_s,
        repair,
        finite_part,
        closeness,
    })
}

/// Target whose vectors are the repaired coordinates, pulled back through the
/// finite-part factor when present.
fn carried_target(
    base: &SpectralTarget,
    alpha: &AlphaTable,
    refspec: &ReferenceSpectrum,
    frame: &EigenFrame,
    original: &SpectralTarget,
    finite_part: Option<&FinitePartTransform>,
) -> Result<SpectralTarget> {
    let window = base.window().max(alpha.window());
    let w = window as i64;
    let n = base.n();
    let mut lambda = Vec::with_capacity(n);
    let mut d = Vec::with_capacity(n);
    for m in 0..n {
        let mut lrow = Vec::with_capacity(2 * window + 1);
        let mut drow = Vec::with_capacity(2 * window + 1);
        for k in -w..=w {
            let l = base.lambda(refspec, m, k);
            let f = alpha.vector(frame, m, k);
            let v = match finite_part {
                Some(fp) => crate::assignment::pull_back(&fp.c, l, &f)?,
                None => f,
            };
            lrow.push(l);
            drow.push(v);
        }
        lambda.push(lrow);
        d.push(drow);
    }
    SpectralTarget::new(window, lambda, d, original.finite_part().cloned())
}
