//! JSON documents. Complex numbers are `[re, im]`; matrices are lists of rows
//! except `z`, which lists the vectors `zₘ` as columns.

use std::fs;
use std::path::Path;

use neutral_assign::charmatrix::MatrixFunctionRep;
use neutral_assign::linalg::{CMat, CVec, C64};
use neutral_assign::{
    AssignOptions, Assignment, AssignmentProblem, FinitePart, ReconstructionBasis, SpectralTarget,
    SystemRealization,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cx(pub f64, pub f64);

impl From<C64> for Cx {
    fn from(z: C64) -> Self {
        Cx(z.re, z.im)
    }
}

impl From<Cx> for C64 {
    fn from(z: Cx) -> Self {
        C64::new(z.0, z.1)
    }
}

pub fn rows(m: &CMat) -> Vec<Vec<Cx>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].into()).collect()).collect()
}

pub fn vector(v: &CVec) -> Vec<Cx> {
    v.iter().map(|z| (*z).into()).collect()
}

fn to_vec(v: &[Cx], n: usize, field: &str) -> CliResult<CVec> {
    if v.len() != n {
        return Err(CliError::Input(format!("{field}: expected {n} entries, found {}", v.len())));
    }
    Ok(CVec::from_iterator(n, v.iter().map(|z| C64::from(*z))))
}

fn square(rows: &[Vec<Cx>], n: usize, field: &str) -> CliResult<CMat> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Input(format!("{field}: expected a {n}x{n} matrix")));
    }
    Ok(CMat::from_fn(n, n, |i, j| rows[i][j].into()))
}

/// Reads and deserializes a JSON file, labelling failures with the field path.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse_json(&text, path)
}

pub fn parse_json<T: DeserializeOwned>(text: &str, path: &Path) -> CliResult<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let mut field = e.path().to_string();
        let inner = e.into_inner();
        // serde reports a missing field at its parent; name the field itself
        let text = inner.to_string();
        if let Some(name) = text.strip_prefix("missing field `").and_then(|r| r.split('`').next()) {
            field = if field == "." { name.to_string() } else { format!("{field}.{name}") };
        }
        CliError::Parse {
            path: path.to_path_buf(),
            field,
            message: text,
        }
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("document serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FinitePartFile {
    pub lambda0: Vec<Cx>,
    pub d0: Vec<Vec<Cx>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetFile {
    pub window: usize,
    /// `lambda[m][k + window]`; the reference grid when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<Vec<Cx>>>,
    /// `d[m][k + window]`; `zₘ` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<Vec<Vec<Cx>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finite_part: Option<FinitePartFile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BasisName {
    #[default]
    Dual,
    Gram,
}

impl From<BasisName> for ReconstructionBasis {
    fn from(b: BasisName) -> Self {
        match b {
            BasisName::Dual => ReconstructionBasis::Dual,
            BasisName::Gram => ReconstructionBasis::Gram,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptionsFile {
    pub solve_window: Option<usize>,
    pub verify_window: Option<usize>,
    pub tol_root: f64,
    pub tol_vec: f64,
    pub seed: u64,
    pub repair: bool,
    pub repair_epsilon: f64,
    pub repair_window: Option<usize>,
    pub max_retries: usize,
    pub basis: BasisName,
}

impl Default for OptionsFile {
    fn default() -> Self {
        let d = AssignOptions::default();
        Self {
            solve_window: None,
            verify_window: None,
            tol_root: 1e-8,
            tol_vec: 1e-8,
            seed: d.seed,
            repair: d.repair,
            repair_epsilon: d.repair_epsilon,
            repair_window: None,
            max_retries: d.max_retries,
            basis: BasisName::Dual,
        }
    }
}

impl OptionsFile {
    pub fn assign_options(&self) -> AssignOptions {
        AssignOptions {
            solve_window: self.solve_window,
            repair: self.repair,
            repair_epsilon: self.repair_epsilon,
            repair_window: self.repair_window,
            seed: self.seed,
            max_retries: self.max_retries,
            basis: self.basis.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub mu: Vec<Cx>,
    /// Columns `zₘ`.
    pub z: Vec<Vec<Cx>>,
    pub target: TargetFile,
    #[serde(default)]
    pub options: OptionsFile,
}

impl TargetFile {
    pub fn from_target(t: &SpectralTarget, refspec: &neutral_assign::ReferenceSpectrum, frame: &neutral_assign::EigenFrame) -> Self {
        let w = t.window() as i64;
        let n = t.n();
        let lambda = (0..n).map(|m| (-w..=w).map(|k| t.lambda(refspec, m, k).into()).collect()).collect();
        let d = (0..n).map(|m| (-w..=w).map(|k| vector(&t.vector(frame, m, k))).collect()).collect();
        let finite_part = t.finite_part().map(|fp| FinitePartFile {
            lambda0: fp.lambda0.iter().map(|z| (*z).into()).collect(),
            d0: fp.d0.iter().map(vector).collect(),
        });
        Self { window: t.window(), lambda: Some(lambda), d: Some(d), finite_part }
    }

    /// Builds the target; absent tables default to the reference data.
    pub fn to_target(&self, n: usize, mu: &[C64], z: &CMat) -> CliResult<SpectralTarget> {
        let refspec = neutral_assign::ReferenceSpectrum::new(mu.to_vec())?;
        let width = 2 * self.window + 1;
        let lambda: Vec<Vec<C64>> = match &self.lambda {
            Some(rows) => {
                if rows.len() != n {
                    return Err(CliError::Input(format!("target.lambda: expected {n} channels, found {}", rows.len())));
                }
                rows.iter()
                    .enumerate()
                    .map(|(m, r)| {
                        if r.len() != width {
                            return Err(CliError::Input(format!(
                                "target.lambda[{m}]: expected {width} entries for window {}, found {}",
                                self.window,
                                r.len()
                            )));
                        }
                        Ok(r.iter().map(|z| C64::from(*z)).collect())
                    })
                    .collect::<CliResult<_>>()?
            }
            None => {
                let w = self.window as i64;
                (0..n).map(|m| (-w..=w).map(|k| refspec.lambda_tilde(m, k)).collect()).collect()
            }
        };
        let d: Vec<Vec<CVec>> = match &self.d {
            Some(rows) => {
                if rows.len() != n {
                    return Err(CliError::Input(format!("target.d: expected {n} channels, found {}", rows.len())));
                }
                rows.iter()
                    .enumerate()
                    .map(|(m, r)| {
                        if r.len() != width {
                            return Err(CliError::Input(format!(
                                "target.d[{m}]: expected {width} vectors for window {}, found {}",
                                self.window,
                                r.len()
                            )));
                        }
                        r.iter()
                            .enumerate()
                            .map(|(i, v)| to_vec(v, n, &format!("target.d[{m}][{i}]")))
                            .collect::<CliResult<Vec<CVec>>>()
                    })
                    .collect::<CliResult<_>>()?
            }
            None => (0..n).map(|m| vec![z.column(m).into_owned(); width]).collect(),
        };
        let finite_part = match &self.finite_part {
            Some(fp) => {
                if fp.lambda0.len() != n || fp.d0.len() != n {
                    return Err(CliError::Input(format!("target.finite_part: expected {n} eigenvalues and {n} vectors")));
                }
                let d0 = fp
                    .d0
                    .iter()
                    .enumerate()
                    .map(|(j, v)| to_vec(v, n, &format!("target.finite_part.d0[{j}]")))
                    .collect::<CliResult<Vec<_>>>()?;
                Some(FinitePart { lambda0: fp.lambda0.iter().map(|z| C64::from(*z)).collect(), d0 })
            }
            None => None,
        };
        Ok(SpectralTarget::new(self.window, lambda, d, finite_part)?)
    }
}

impl ProblemFile {
    pub fn dimension(&self) -> CliResult<usize> {
        let n = self.mu.len();
        if n == 0 {
            return Err(CliError::Input("mu: at least one eigenvalue is required".into()));
        }
        if let Some(declared) = self.n {
            if declared != n {
                return Err(CliError::Input(format!("n: declared {declared} but mu has {n} entries")));
            }
        }
        Ok(n)
    }

    pub fn z_matrix(&self) -> CliResult<CMat> {
        let n = self.dimension()?;
        if self.z.len() != n {
            return Err(CliError::Input(format!("z: expected {n} columns, found {}", self.z.len())));
        }
        let cols = self
            .z
            .iter()
            .enumerate()
            .map(|(m, v)| to_vec(v, n, &format!("z[{m}]")))
            .collect::<CliResult<Vec<_>>>()?;
        Ok(CMat::from_columns(&cols))
    }

    pub fn mu_values(&self) -> Vec<C64> {
        self.mu.iter().map(|z| C64::from(*z)).collect()
    }

    pub fn to_problem(&self) -> CliResult<AssignmentProblem> {
        let n = self.dimension()?;
        let z = self.z_matrix()?;
        let mu = self.mu_values();
        let target = self.target.to_target(n, &mu, &z)?;
        Ok(AssignmentProblem { mu, z, target })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Term {
    Constant { matrix: Vec<Vec<Cx>> },
    Linear { matrix: Vec<Vec<Cx>> },
    Exponential { exponent: Cx, matrix: Vec<Vec<Cx>> },
}

fn is_zero(m: &CMat) -> bool {
    m.iter().all(|z| z.re == 0.0 && z.im == 0.0)
}

pub fn terms(rep: &MatrixFunctionRep) -> Vec<Term> {
    let mut out = Vec::new();
    if !is_zero(&rep.constant) {
        out.push(Term::Constant { matrix: rows(&rep.constant) });
    }
    if !is_zero(&rep.linear) {
        out.push(Term::Linear { matrix: rows(&rep.linear) });
    }
    for (e, m) in rep.exponentials() {
        if !is_zero(m) {
            out.push(Term::Exponential { exponent: (*e).into(), matrix: rows(m) });
        }
    }
    out
}

pub fn rep_from_terms(terms: &[Term], n: usize, field: &str) -> CliResult<MatrixFunctionRep> {
    let mut rep = MatrixFunctionRep::zero(n);
    for (i, t) in terms.iter().enumerate() {
        let label = format!("{field}[{i}].matrix");
        match t {
            Term::Constant { matrix } => rep.add_constant(&square(matrix, n, &label)?),
            Term::Linear { matrix } => rep.add_linear(&square(matrix, n, &label)?),
            Term::Exponential { exponent, matrix } => rep.add_exponential((*exponent).into(), &square(matrix, n, &label)?),
        }
    }
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairFile {
    pub retries: usize,
    pub delta_norm_sq: f64,
    pub window: usize,
    pub conditions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinitePartDiagnostics {
    pub c: Vec<Vec<Cx>>,
    pub m_bound: f64,
    pub eigen_residual: f64,
    pub window: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosenessFile {
    pub sum_lambda: Vec<f64>,
    pub sum_vec: Vec<f64>,
    pub sum_alpha_off: Vec<Vec<f64>>,
    pub sum_alpha_diag: Vec<f64>,
    pub threshold: f64,
    pub flagged: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub solve_window: usize,
    pub condition: Vec<f64>,
    pub residual: Vec<f64>,
    pub repair: Option<RepairFile>,
    pub finite_part: Option<FinitePartDiagnostics>,
    pub closeness: ClosenessFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealizationFile {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<Cx>>,
    pub a_minus1: Vec<Vec<Cx>>,
    pub a2: Vec<Term>,
    pub a3: Vec<Term>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
    /// The spectrum actually carried when the vectors had to be repaired.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repaired_target: Option<TargetFile>,
}

impl RealizationFile {
    pub fn from_system(sys: &SystemRealization, mu: Option<&[C64]>) -> Self {
        Self {
            n: sys.n(),
            mu: mu.map(|m| m.iter().map(|z| (*z).into()).collect()),
            a_minus1: rows(&sys.a_minus1),
            a2: terms(&sys.a2),
            a3: terms(&sys.a3),
            diagnostics: None,
            repaired_target: None,
        }
    }

    pub fn from_assignment(a: &Assignment) -> Self {
        let mut out = Self::from_system(&a.system, Some(a.refspec.mu()));
        let c = &a.closeness;
        out.diagnostics = Some(Diagnostics {
            solve_window: a.solve_window,
            condition: a.solution.condition.clone(),
            residual: a.solution.residual.clone(),
            repair: a.repair.as_ref().map(|r| RepairFile {
                retries: r.retries,
                delta_norm_sq: r.delta_norm_sq,
                window: r.alpha.window(),
                conditions: r.conditions.clone(),
            }),
            finite_part: a.finite_part.as_ref().map(|f| FinitePartDiagnostics {
                c: rows(&f.c),
                m_bound: f.m_bound,
                eigen_residual: f.eigen_residual,
                window: f.f_hat.window(),
            }),
            closeness: ClosenessFile {
                sum_lambda: c.sum_lambda.clone(),
                sum_vec: c.sum_vec.clone(),
                sum_alpha_off: c.sum_alpha_off.clone(),
                sum_alpha_diag: c.sum_alpha_diag.clone(),
                threshold: c.threshold,
                flagged: c.flagged.clone(),
            },
        });
        if a.repair.is_some() {
            out.repaired_target = Some(TargetFile::from_target(&a.target, &a.refspec, &a.frame));
        }
        out
    }

    pub fn to_system(&self) -> CliResult<SystemRealization> {
        let n = self.n;
        let am = square(&self.a_minus1, n, "a_minus1")?;
        let a2 = rep_from_terms(&self.a2, n, "a2")?;
        let a3 = rep_from_terms(&self.a3, n, "a3")?;
        Ok(SystemRealization::new(am, a2, a3)?)
    }

    /// `μ` as stored, or the eigenvalues of `A₋₁`.
    pub fn mu_values(&self) -> CliResult<Vec<C64>> {
        if let Some(mu) = &self.mu {
            return Ok(mu.iter().map(|z| C64::from(*z)).collect());
        }
        let am = square(&self.a_minus1, self.n, "a_minus1")?;
        let eig = am
            .schur()
            .eigenvalues()
            .ok_or_else(|| CliError::Input("a_minus1: eigenvalues unavailable".into()))?;
        Ok(eig.iter().copied().collect())
    }
}
