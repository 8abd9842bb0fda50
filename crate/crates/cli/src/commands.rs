//! Subcommand bodies. Each returns the text for standard output; files named
//! on the command line are written here.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use neutral_assign::charmatrix::DegeneracyReport;
use neutral_assign::forward::{TargetLabel, DEFAULT_QUAD_POINTS};
use neutral_assign::linalg::C64;
use neutral_assign::{
    assign, biorthogonal_frame, count_roots_box, gram_matrix, spectrum_near_grid, verify_assignment,
    ReferenceSpectrum, SpectralTarget, VerificationReport,
};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::format::{read_json, rows, to_json, vector, Cx, ProblemFile, RealizationFile};

/// Flags shared by the subcommands; each overrides the problem file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Verification or forward window N.
    #[arg(long)]
    pub window: Option<usize>,
    /// Solve window N_s.
    #[arg(long = "solve-window")]
    pub solve_window: Option<usize>,
    #[arg(long = "tol-root")]
    pub tol_root: Option<f64>,
    #[arg(long = "tol-vec")]
    pub tol_vec: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Size of the coordinate perturbation used when a solve is singular.
    #[arg(long = "repair-epsilon")]
    pub repair_epsilon: Option<f64>,
    #[arg(long = "no-repair")]
    pub no_repair: bool,
}

impl Overrides {
    fn apply(&self, p: &mut ProblemFile) {
        let o = &mut p.options;
        if self.window.is_some() {
            o.verify_window = self.window;
        }
        if self.solve_window.is_some() {
            o.solve_window = self.solve_window;
        }
        if let Some(t) = self.tol_root {
            o.tol_root = t;
        }
        if let Some(t) = self.tol_vec {
            o.tol_vec = t;
        }
        if let Some(s) = self.seed {
            o.seed = s;
        }
        if let Some(e) = self.repair_epsilon {
            o.repair_epsilon = e;
        }
        if self.no_repair {
            o.repair = false;
        }
    }
}

fn load_problem(path: &Path, overrides: &Overrides) -> CliResult<ProblemFile> {
    let mut p: ProblemFile = read_json(path)?;
    overrides.apply(&mut p);
    for (name, t) in [("tol_root", p.options.tol_root), ("tol_vec", p.options.tol_vec)] {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Input(format!("options.{name}: must be positive and finite, got {t}")));
        }
    }
    Ok(p)
}

pub fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn label_json(label: TargetLabel) -> LabelJson {
    match label {
        TargetLabel::Grid { m, k } => LabelJson { kind: "grid", m: Some(m), k: Some(k), j: None },
        TargetLabel::Finite { j } => LabelJson { kind: "finite", m: None, k: None, j: Some(j) },
    }
}

#[derive(Serialize)]
struct LabelJson {
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    j: Option<usize>,
}

#[derive(Serialize)]
struct EntryJson {
    label: LabelJson,
    lambda: Cx,
    sigma_min_ratio: f64,
    vec_residual: f64,
    pass: bool,
}

#[derive(Serialize)]
struct ReportJson {
    pass: bool,
    window: usize,
    tol_root: f64,
    tol_vec: f64,
    max_sigma_ratio: f64,
    max_vec_residual: f64,
    checked: usize,
    skipped_zero: Vec<LabelJson>,
    entries: Vec<EntryJson>,
}

fn report_json(r: &VerificationReport) -> ReportJson {
    ReportJson {
        pass: r.pass,
        window: r.window,
        tol_root: r.tol_root,
        tol_vec: r.tol_vec,
        max_sigma_ratio: r.max_sigma_ratio,
        max_vec_residual: r.max_vec_residual,
        checked: r.entries.len(),
        skipped_zero: r.skipped_zero.iter().map(|l| label_json(*l)).collect(),
        entries: r
            .entries
            .iter()
            .map(|e| EntryJson {
                label: label_json(e.label),
                lambda: e.lambda.into(),
                sigma_min_ratio: e.sigma_min_ratio,
                vec_residual: e.vec_residual,
                pass: e.pass,
            })
            .collect(),
    }
}

/// One row per checked target: `kind, m_or_j, k, re, im, sigma_min_ratio, vec_residual, pass`.
fn report_csv(r: &VerificationReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["kind", "index", "k", "re", "im", "sigma_min_ratio", "vec_residual", "pass"])
        .expect("in-memory csv");
    for e in &r.entries {
        let (kind, index, k) = match e.label {
            TargetLabel::Grid { m, k } => ("grid", m, k.to_string()),
            TargetLabel::Finite { j } => ("finite", j, String::new()),
        };
        w.write_record([
            kind.to_string(),
            index.to_string(),
            k,
            e.lambda.re.to_string(),
            e.lambda.im.to_string(),
            format!("{:e}", e.sigma_min_ratio),
            format!("{:e}", e.vec_residual),
            e.pass.to_string(),
        ])
        .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
}

fn failure_summary(r: &VerificationReport) -> String {
    let failed = r.entries.iter().filter(|e| !e.pass).count();
    format!(
        "{failed} of {} targets failed (max sigma ratio {:e}, max vector residual {:e})",
        r.entries.len(),
        r.max_sigma_ratio,
        r.max_vec_residual
    )
}

/// Output of a subcommand: text for standard output and an optional failure
/// raised after that text is emitted.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub failure: Option<CliError>,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { stdout, failure: None }
    }
}

pub fn cmd_assign(problem_path: &Path, out: Option<&Path>, overrides: &Overrides) -> CliResult<Outcome> {
    let file = load_problem(problem_path, overrides)?;
    let problem = file.to_problem()?;
    let a = assign(&problem, &file.options.assign_options())?;
    let text = to_json(&RealizationFile::from_assignment(&a));
    match out {
        Some(path) => {
            write_file(path, &text)?;
            Ok(Outcome::ok(String::new()))
        }
        None => Ok(Outcome::ok(text)),
    }
}

pub fn default_verify_csv(realization: &Path) -> PathBuf {
    let mut s = realization.as_os_str().to_owned();
    s.push(".verify.csv");
    PathBuf::from(s)
}

pub fn cmd_verify(
    realization_path: &Path,
    problem_path: &Path,
    csv_path: Option<&Path>,
    overrides: &Overrides,
) -> CliResult<Outcome> {
    let real: RealizationFile = read_json(realization_path)?;
    let file = load_problem(problem_path, overrides)?;
    let n = file.dimension()?;
    if real.n != n {
        return Err(CliError::Input(format!("realization has n = {} but problem has n = {n}", real.n)));
    }
    let sys = real.to_system()?;
    let mu = file.mu_values();
    let z = file.z_matrix()?;
    let refspec = ReferenceSpectrum::new(mu.clone())?;
    let frame = biorthogonal_frame(&z)?;
    let target: SpectralTarget = match &real.repaired_target {
        Some(t) => t.to_target(n, &mu, &z)?,
        None => file.target.to_target(n, &mu, &z)?,
    };
    let window = file.options.verify_window.unwrap_or(target.window());
    let report = verify_assignment(&sys, &target, &refspec, &frame, window, file.options.tol_root, file.options.tol_vec)?;
    let csv_path = csv_path.map(Path::to_path_buf).unwrap_or_else(|| default_verify_csv(realization_path));
    write_file(&csv_path, &report_csv(&report))?;
    let stdout = to_json(&report_json(&report));
    let failure = (!report.pass).then(|| CliError::VerificationFailed(failure_summary(&report)));
    Ok(Outcome { stdout, failure })
}

#[derive(Serialize)]
struct DegeneracyJson {
    lambda: Cx,
    sigma_min: f64,
    sigma_max: f64,
    sigma_min_ratio: f64,
    left_null: Vec<Cx>,
    right_null: Vec<Cx>,
    left_residual: f64,
    right_residual: f64,
}

fn degeneracy_json(d: &DegeneracyReport) -> DegeneracyJson {
    DegeneracyJson {
        lambda: d.lambda.into(),
        sigma_min: d.sigma_min,
        sigma_max: d.sigma_max,
        sigma_min_ratio: d.sigma_min_ratio,
        left_null: vector(&d.left_null),
        right_null: vector(&d.right_null),
        left_residual: d.left_residual,
        right_residual: d.right_residual,
    }
}

#[derive(Serialize)]
struct RootJson {
    m: usize,
    k: i64,
    seed: Cx,
    root: Cx,
    iterations: usize,
    converged: bool,
    collision_with: Option<(usize, i64)>,
    box_count: i64,
    degeneracy: DegeneracyJson,
}

#[derive(Serialize)]
struct ForwardJson {
    window: usize,
    roots: usize,
    collisions: usize,
    box_total: i64,
    zero: DegeneracyJson,
    entries: Vec<RootJson>,
}

pub fn default_forward_csv(realization: &Path) -> PathBuf {
    let mut s = realization.as_os_str().to_owned();
    s.push(".spectrum.csv");
    PathBuf::from(s)
}

/// Largest box half-width that isolates `root` from the other distinct roots and from 0.
fn isolating_half_width(root: C64, others: impl Iterator<Item = C64>) -> f64 {
    let nearest = others.chain(std::iter::once(C64::new(0.0, 0.0))).map(|o| (o - root).norm()).fold(f64::INFINITY, f64::min);
    (0.45 * nearest).min(0.4)
}

pub fn cmd_forward(realization_path: &Path, csv_path: Option<&Path>, window: usize) -> CliResult<Outcome> {
    let real: RealizationFile = read_json(realization_path)?;
    let sys = real.to_system()?;
    let refspec = ReferenceSpectrum::new(real.mu_values()?)?;
    let report = spectrum_near_grid(&sys, &refspec, window);

    let mut entries = Vec::with_capacity(report.entries.len());
    for (i, e) in report.entries.iter().enumerate() {
        let box_count = if e.converged && e.collision_with.is_none() {
            let others = report
                .entries
                .iter()
                .enumerate()
                .filter(|(j, o)| *j != i && o.converged && o.collision_with.is_none())
                .map(|(_, o)| o.root);
            let h = isolating_half_width(e.root, others);
            count_roots_box(&sys, e.root, (h, h), DEFAULT_QUAD_POINTS).unwrap_or(-1)
        } else {
            0
        };
        entries.push(RootJson {
            m: e.m,
            k: e.k,
            seed: e.seed.into(),
            root: e.root.into(),
            iterations: e.iterations,
            converged: e.converged,
            collision_with: e.collision_with,
            box_count,
            degeneracy: degeneracy_json(&e.degeneracy),
        });
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["m", "k", "re", "im", "iterations", "converged", "sigma_min_ratio", "collision", "box_count"])
        .expect("in-memory csv");
    for e in &entries {
        w.write_record([
            e.m.to_string(),
            e.k.to_string(),
            e.root.0.to_string(),
            e.root.1.to_string(),
            e.iterations.to_string(),
            e.converged.to_string(),
            format!("{:e}", e.degeneracy.sigma_min_ratio),
            e.collision_with.is_some().to_string(),
            e.box_count.to_string(),
        ])
        .expect("in-memory csv");
    }
    let text = String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8");
    let csv_path = csv_path.map(Path::to_path_buf).unwrap_or_else(|| default_forward_csv(realization_path));
    write_file(&csv_path, &text)?;

    let json = ForwardJson {
        window,
        roots: entries.len(),
        collisions: report.collisions(),
        box_total: entries.iter().map(|e| e.box_count.max(0)).sum(),
        zero: degeneracy_json(&report.zero),
        entries,
    };
    Ok(Outcome::ok(to_json(&json)))
}

#[derive(Serialize)]
struct RoundtripJson {
    pass: bool,
    solve_window: usize,
    verify_window: usize,
    repaired: bool,
    repair_retries: Option<usize>,
    finite_part: bool,
    max_condition: f64,
    max_solve_residual: f64,
    max_sigma_ratio: f64,
    max_vec_residual: f64,
    checked: usize,
    a2_terms: usize,
    a3_terms: usize,
}

pub fn cmd_roundtrip(problem_path: &Path, overrides: &Overrides) -> CliResult<Outcome> {
    let file = load_problem(problem_path, overrides)?;
    let problem = file.to_problem()?;
    let a = assign(&problem, &file.options.assign_options())?;
    // Verify what a reader of the realization file would see.
    let real = RealizationFile::from_assignment(&a);
    let sys = real.to_system()?;
    let window = file.options.verify_window.unwrap_or(a.target.window());
    let report = verify_assignment(&sys, &a.target, &a.refspec, &a.frame, window, file.options.tol_root, file.options.tol_vec)?;
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let json = RoundtripJson {
        pass: report.pass,
        solve_window: a.solve_window,
        verify_window: window,
        repaired: a.repair.is_some(),
        repair_retries: a.repair.as_ref().map(|r| r.retries),
        finite_part: a.finite_part.is_some(),
        max_condition: max(&a.solution.condition),
        max_solve_residual: max(&a.solution.residual),
        max_sigma_ratio: report.max_sigma_ratio,
        max_vec_residual: report.max_vec_residual,
        checked: report.entries.len(),
        a2_terms: real.a2.len(),
        a3_terms: real.a3.len(),
    };
    let failure = (!report.pass).then(|| CliError::VerificationFailed(failure_summary(&report)));
    Ok(Outcome { stdout: to_json(&json), failure })
}

#[derive(Serialize)]
struct GramJson {
    mu: Cx,
    window: usize,
    condition: f64,
    matrix: Option<Vec<Vec<Cx>>>,
}

/// Condition numbers of the Gram matrix of `e^{λ̃ₖθ}`, `|k| ≤ N`, for one `μ`.
pub fn cmd_gram_report(mu: C64, windows: &[usize], with_matrix: bool) -> CliResult<Outcome> {
    if windows.is_empty() {
        return Err(CliError::Input("gram-report: at least one --window is required".into()));
    }
    let refspec = ReferenceSpectrum::new(vec![mu])?;
    let out: Vec<GramJson> = windows
        .iter()
        .map(|&w| {
            let g = gram_matrix(&refspec, 0, w);
            GramJson { mu: mu.into(), window: w, condition: g.condition, matrix: with_matrix.then(|| rows(&g.matrix)) }
        })
        .collect();
    Ok(Outcome::ok(to_json(&out)))
}
