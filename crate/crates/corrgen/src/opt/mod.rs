//! Corridor volume maximization.
//!
//! The spatial problem minimizes the summed trace of the parametric
//! ellipse matrix over a discretization grid, subject to every projected
//! cloud point lying outside the corridor and the matrix staying positive
//! definite at the grid. Definiteness enters either exactly, as rotated
//! quadratic cone memberships (the 2x2 case needs nothing stronger), or
//! as the diagonal-dominance linear relaxation, which turns the whole
//! program into an LP. The planar problem maximizes the area between two
//! bound polynomials and is an LP in both cases.

pub mod backend;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cheby::{eval_basis_row, ChebyshevPoly};
use crate::corridor::{Corridor2D, Corridor3D};
use crate::error::{Error, Result};
use crate::projection::ProjectedCloud;
use backend::{BackendStatus, ConicBackend, ConicProgram, LinExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formulation {
    /// Diagonal-dominance LP relaxation of the definiteness constraint.
    DdLp,
    /// Exact definiteness through rotated quadratic cones.
    ExactCone,
}

impl Formulation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Formulation::DdLp => "dd-lp",
            Formulation::ExactCone => "exact-cone",
        }
    }
}

impl std::str::FromStr for Formulation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lp" | "dd-lp" => Ok(Formulation::DdLp),
            "cone" | "sdp" | "exact-cone" => Ok(Formulation::ExactCone),
            other => Err(Error::InvalidInput(format!(
                "unknown formulation '{other}'"
            ))),
        }
    }
}

/// Optional eigenvalue bounds on the ellipse matrix; an alternative to
/// the wrapper for keeping the program bounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenBoundConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl EigenBoundConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_min > 0.0 && self.lambda_min <= self.lambda_max) {
            return Err(Error::InvalidInput(
                "eigen bounds need 0 < lambda_min <= lambda_max".into(),
            ));
        }
        Ok(())
    }
}

/// Problem configuration shared by assembly and solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    /// 2 (planar bounds) or 3 (parametric ellipse).
    pub dimension: u8,
    pub degree: usize,
    /// Number of discretization samples N; must dominate the degree.
    pub samples: usize,
    pub formulation: Formulation,
    /// Margin realizing the strict inequalities of the formulation.
    pub pd_epsilon: f64,
    pub eigen_bounds: Option<EigenBoundConfig>,
    pub feas_tol: f64,
    /// When false the offset is pinned to zero (centered ablation).
    pub offset_enabled: bool,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        Self {
            dimension: 3,
            degree: 3,
            samples: 100,
            formulation: Formulation::DdLp,
            pd_epsilon: 1e-6,
            eigen_bounds: None,
            feas_tol: 1e-6,
            offset_enabled: true,
        }
    }
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dimension != 2 && self.dimension != 3 {
            return Err(Error::InvalidInput("dimension must be 2 or 3".into()));
        }
        if self.samples < 4 * (self.degree + 1) {
            return Err(Error::InvalidInput(format!(
                "N = {} too small for degree {}: need N >= 4(n+1) = {}",
                self.samples,
                self.degree,
                4 * (self.degree + 1)
            )));
        }
        if let Some(eb) = &self.eigen_bounds {
            eb.validate()?;
        }
        Ok(())
    }

    fn grid(&self, domain: (f64, f64)) -> Vec<f64> {
        let (lo, hi) = domain;
        (0..self.samples)
            .map(|i| lo + (hi - lo) * i as f64 / (self.samples - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

/// Solver outcome summary; serializes to the CLI's JSON report line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: ReportStatus,
    /// Discretized trace (3D) or negated bound-sum (2D) objective.
    pub objective: f64,
    /// Exact quadrature volume (3D) or area (2D) of the solved corridor.
    pub reported_volume_or_area: f64,
    pub solve_time_ms: f64,
    pub assembly_time_ms: f64,
    pub constraint_count: usize,
    pub formulation: String,
}

// Variable layout for the 3D program: the five coefficient blocks, each
// of length degree + 1. The centered ablation drops the offset blocks.
struct Layout3D {
    m: usize,
    offset: bool,
}

impl Layout3D {
    fn e11(&self, k: usize) -> usize {
        k
    }
    fn e12(&self, k: usize) -> usize {
        self.m + k
    }
    fn e22(&self, k: usize) -> usize {
        2 * self.m + k
    }
    fn d1(&self, k: usize) -> usize {
        debug_assert!(self.offset);
        3 * self.m + k
    }
    fn d2(&self, k: usize) -> usize {
        debug_assert!(self.offset);
        4 * self.m + k
    }
    fn num_vars(&self) -> usize {
        if self.offset {
            5 * self.m
        } else {
            3 * self.m
        }
    }
}

fn expr_from(rows: &[(usize, f64)], constant: f64) -> LinExpr {
    LinExpr::new(rows.to_vec(), constant)
}

/// Assemble the spatial volume-maximization program.
pub fn assemble_3d(
    spec: &ProblemSpec,
    projected: &ProjectedCloud,
    domain: (f64, f64),
) -> Result<ConicProgram> {
    spec.validate()?;
    if projected.is_empty() && !projected.wrapped && spec.eigen_bounds.is_none() {
        return Err(Error::Unbounded(
            "empty cloud with neither wrapper nor eigenvalue bounds".into(),
        ));
    }
    let layout = Layout3D {
        m: spec.degree + 1,
        offset: spec.offset_enabled,
    };
    let mut prog = ConicProgram::new(layout.num_vars());

    // Objective: sum of traces over the grid, linear in the coefficients.
    let grid = spec.grid(domain);
    for &xi in &grid {
        let row = eval_basis_row(spec.degree, xi, domain)?;
        for (k, &v) in row.iter().enumerate() {
            prog.objective[layout.e11(k)] += v;
            prog.objective[layout.e22(k)] += v;
        }
    }

    // One outside-the-corridor row per retained point, normalized to keep
    // the program conditioned for large wrapper radii.
    for i in 0..projected.len() {
        let row = eval_basis_row(spec.degree, projected.par[i], domain)?;
        let y = projected.ortho[i];
        let scale = 1.0 / y.norm_squared().max(1.0);
        let mut coeffs = Vec::with_capacity(if layout.offset { 5 } else { 3 } * layout.m);
        for (k, &v) in row.iter().enumerate() {
            coeffs.push((layout.e11(k), y.x * y.x * v * scale));
            coeffs.push((layout.e12(k), 2.0 * y.x * y.y * v * scale));
            coeffs.push((layout.e22(k), y.y * y.y * v * scale));
            if layout.offset {
                coeffs.push((layout.d1(k), y.x * v * scale));
                coeffs.push((layout.d2(k), y.y * v * scale));
            }
        }
        prog.add_nonneg(LinExpr::new(coeffs, -scale));
    }

    // Definiteness at the grid, with the strictness margin (or the lower
    // eigenvalue bound, whichever is larger).
    let lam_lo = spec
        .eigen_bounds
        .map(|eb| eb.lambda_min.max(spec.pd_epsilon))
        .unwrap_or(spec.pd_epsilon);
    let lam_hi = spec.eigen_bounds.map(|eb| eb.lambda_max);
    for &xi in &grid {
        let row = eval_basis_row(spec.degree, xi, domain)?;
        let e11: Vec<(usize, f64)> = row
            .iter()
            .enumerate()
            .map(|(k, &v)| (layout.e11(k), v))
            .collect();
        let e12: Vec<(usize, f64)> = row
            .iter()
            .enumerate()
            .map(|(k, &v)| (layout.e12(k), v))
            .collect();
        let e22: Vec<(usize, f64)> = row
            .iter()
            .enumerate()
            .map(|(k, &v)| (layout.e22(k), v))
            .collect();
        let neg =
            |c: &[(usize, f64)]| -> Vec<(usize, f64)> { c.iter().map(|&(j, v)| (j, -v)).collect() };
        match spec.formulation {
            Formulation::DdLp => {
                // E - lam_lo I diagonally dominant, with both signs of the
                // off-diagonal entry.
                for diag in [&e11, &e22] {
                    for sign in [1.0, -1.0] {
                        let mut coeffs = diag.clone();
                        coeffs.extend(e12.iter().map(|&(j, v)| (j, sign * v)));
                        prog.add_nonneg(LinExpr::new(coeffs, -lam_lo));
                    }
                }
                if let Some(hi) = lam_hi {
                    // lam_hi I - E diagonally dominant.
                    for diag in [&e11, &e22] {
                        for sign in [1.0, -1.0] {
                            let mut coeffs = neg(diag);
                            coeffs.extend(e12.iter().map(|&(j, v)| (j, sign * v)));
                            prog.add_nonneg(LinExpr::new(coeffs, hi));
                        }
                    }
                }
            }
            Formulation::ExactCone => {
                // E - lam_lo I PSD: shifted diagonals nonnegative plus the
                // rotated-cone determinant condition.
                prog.add_nonneg(expr_from(&e11, -lam_lo));
                prog.add_nonneg(expr_from(&e22, -lam_lo));
                let sqrt2 = std::f64::consts::SQRT_2;
                let t: Vec<(usize, f64)> = e12.iter().map(|&(j, v)| (j, sqrt2 * v)).collect();
                prog.add_rotated(
                    expr_from(&e11, -lam_lo),
                    expr_from(&e22, -lam_lo),
                    LinExpr::new(t.clone(), 0.0),
                );
                if let Some(hi) = lam_hi {
                    prog.add_nonneg(expr_from(&neg(&e11), hi));
                    prog.add_nonneg(expr_from(&neg(&e22), hi));
                    prog.add_rotated(
                        expr_from(&neg(&e11), hi),
                        expr_from(&neg(&e22), hi),
                        LinExpr::new(t, 0.0),
                    );
                }
            }
        }
        if let Some(hi) = lam_hi {
            // Trace window implied by the eigenvalue bounds.
            let mut tr: Vec<(usize, f64)> = e11.clone();
            tr.extend(e22.iter().copied());
            prog.add_nonneg(LinExpr::new(tr.clone(), -2.0 * lam_lo));
            prog.add_nonneg(LinExpr::new(neg(&tr), 2.0 * hi));
        }
    }
    Ok(prog)
}

fn extract_poly(
    x: &[f64],
    base: impl Fn(usize) -> usize,
    m: usize,
    domain: (f64, f64),
) -> ChebyshevPoly {
    ChebyshevPoly::new((0..m).map(|k| x[base(k)]).collect(), domain)
}

/// Solve the spatial problem and verify the corridor invariants.
pub fn solve_3d(
    spec: &ProblemSpec,
    projected: &ProjectedCloud,
    domain: (f64, f64),
    backend: &dyn ConicBackend,
) -> Result<(Corridor3D, SolveReport)> {
    let t0 = Instant::now();
    let prog = assemble_3d(spec, projected, domain)?;
    let assembly_time_ms = t0.elapsed().as_secs_f64() * 1e3;

    let sol = backend.solve(&prog);
    match sol.status {
        BackendStatus::Optimal => {}
        BackendStatus::Infeasible => {
            return Err(Error::Infeasible(format!(
                "primal residual {:.3e}, dual residual {:.3e}; a wrapped problem should always be feasible",
                sol.primal_residual, sol.dual_residual
            )));
        }
        BackendStatus::Unbounded => {
            return Err(Error::Unbounded(
                "solver certified dual infeasibility; add a wrapper or eigenvalue bounds".into(),
            ));
        }
        BackendStatus::NumericalFailure(msg) => {
            return Err(Error::SolverFailure(format!(
                "{msg} (primal residual {:.3e}, dual residual {:.3e})",
                sol.primal_residual, sol.dual_residual
            )));
        }
    }

    let m = spec.degree + 1;
    let layout = Layout3D {
        m,
        offset: spec.offset_enabled,
    };
    let zero = ChebyshevPoly::constant(0.0, domain);
    let corridor = Corridor3D {
        e11: extract_poly(&sol.x, |k| layout.e11(k), m, domain),
        e12: extract_poly(&sol.x, |k| layout.e12(k), m, domain),
        e22: extract_poly(&sol.x, |k| layout.e22(k), m, domain),
        d1: if spec.offset_enabled {
            extract_poly(&sol.x, |k| layout.d1(k), m, domain)
        } else {
            zero.clone()
        },
        d2: if spec.offset_enabled {
            extract_poly(&sol.x, |k| layout.d2(k), m, domain)
        } else {
            zero
        },
        degree: spec.degree,
        domain,
    };

    // Invariant checks: definiteness at the grid and feasibility at every
    // retained point.
    let min_eig = corridor.min_eigenvalue(spec.samples)?;
    if min_eig < spec.pd_epsilon - 1e-9 {
        return Err(Error::SolverFailure(format!(
            "solution violates definiteness margin: min eigenvalue {min_eig:.3e}"
        )));
    }
    for i in 0..projected.len() {
        let v = corridor.eval_inequality(projected.par[i], &projected.ortho[i])?;
        if v < -spec.feas_tol {
            return Err(Error::SolverFailure(format!(
                "point {i} violates the corridor constraint by {v:.3e}"
            )));
        }
    }

    let volume = corridor.volume(quadrature_samples(spec))?;
    let report = SolveReport {
        status: ReportStatus::Optimal,
        objective: sol.objective,
        reported_volume_or_area: volume,
        solve_time_ms: sol.solve_time_ms,
        assembly_time_ms,
        constraint_count: prog.num_rows(),
        formulation: spec.formulation.as_str().to_string(),
    };
    Ok((corridor, report))
}

fn quadrature_samples(spec: &ProblemSpec) -> usize {
    (4 * spec.samples).max(400)
}

/// Assemble the planar area-maximization LP.
pub fn assemble_2d(
    spec: &ProblemSpec,
    positive: &ProjectedCloud,
    negative: &ProjectedCloud,
    domain: (f64, f64),
) -> Result<ConicProgram> {
    spec.validate()?;
    if (positive.is_empty() || negative.is_empty()) && spec.eigen_bounds.is_none() {
        return Err(Error::Unbounded(
            "a side of the planar cloud is empty and unbounded; apply the planar wrapper".into(),
        ));
    }
    let m = spec.degree + 1;
    let mut prog = ConicProgram::new(2 * m);

    let grid = spec.grid(domain);
    for &xi in &grid {
        let row = eval_basis_row(spec.degree, xi, domain)?;
        for (k, &v) in row.iter().enumerate() {
            prog.objective[k] -= v; // -sum b_plus(xi_i)
            prog.objective[m + k] += v; // +sum b_minus(xi_i)
        }
        // Strict sign constraints as margins.
        let plus: Vec<(usize, f64)> = row.iter().enumerate().map(|(k, &v)| (k, v)).collect();
        let minus: Vec<(usize, f64)> = row.iter().enumerate().map(|(k, &v)| (m + k, -v)).collect();
        prog.add_nonneg(LinExpr::new(plus, -spec.pd_epsilon));
        prog.add_nonneg(LinExpr::new(minus, -spec.pd_epsilon));
    }

    // Obstacle rows: the upper bound stays below positive-side points and
    // the lower bound above negative-side points.
    for i in 0..positive.len() {
        let row = eval_basis_row(spec.degree, positive.par[i], domain)?;
        let coeffs: Vec<(usize, f64)> = row.iter().enumerate().map(|(k, &v)| (k, -v)).collect();
        prog.add_nonneg(LinExpr::new(coeffs, positive.ortho[i].x));
    }
    for i in 0..negative.len() {
        let row = eval_basis_row(spec.degree, negative.par[i], domain)?;
        let coeffs: Vec<(usize, f64)> = row.iter().enumerate().map(|(k, &v)| (m + k, v)).collect();
        prog.add_nonneg(LinExpr::new(coeffs, -negative.ortho[i].x));
    }
    Ok(prog)
}

/// Solve the planar problem.
pub fn solve_2d(
    spec: &ProblemSpec,
    positive: &ProjectedCloud,
    negative: &ProjectedCloud,
    domain: (f64, f64),
    backend: &dyn ConicBackend,
) -> Result<(Corridor2D, SolveReport)> {
    let t0 = Instant::now();
    let prog = assemble_2d(spec, positive, negative, domain)?;
    let assembly_time_ms = t0.elapsed().as_secs_f64() * 1e3;

    let sol = backend.solve(&prog);
    match sol.status {
        BackendStatus::Optimal => {}
        BackendStatus::Infeasible => {
            return Err(Error::Infeasible(format!(
                "primal residual {:.3e}, dual residual {:.3e}",
                sol.primal_residual, sol.dual_residual
            )));
        }
        BackendStatus::Unbounded => {
            return Err(Error::Unbounded(
                "planar program unbounded; apply the wrapper".into(),
            ));
        }
        BackendStatus::NumericalFailure(msg) => return Err(Error::SolverFailure(msg)),
    }

    let m = spec.degree + 1;
    let corridor = Corridor2D {
        b_plus: ChebyshevPoly::new(sol.x[..m].to_vec(), domain),
        b_minus: ChebyshevPoly::new(sol.x[m..2 * m].to_vec(), domain),
        degree: spec.degree,
        domain,
    };
    for i in 0..positive.len() {
        let v = corridor.b_plus.eval(positive.par[i])?;
        if v > positive.ortho[i].x + spec.feas_tol {
            return Err(Error::SolverFailure(format!(
                "upper bound crosses positive-side point {i}"
            )));
        }
    }
    for i in 0..negative.len() {
        let v = corridor.b_minus.eval(negative.par[i])?;
        if v < negative.ortho[i].x - spec.feas_tol {
            return Err(Error::SolverFailure(format!(
                "lower bound crosses negative-side point {i}"
            )));
        }
    }

    let area = corridor.area(quadrature_samples(spec))?;
    let report = SolveReport {
        status: ReportStatus::Optimal,
        objective: sol.objective,
        reported_volume_or_area: area,
        solve_time_ms: sol.solve_time_ms,
        assembly_time_ms,
        constraint_count: prog.num_rows(),
        formulation: "dd-lp".to_string(),
    };
    Ok((corridor, report))
}

/// One row of a degree sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub degree: usize,
    pub formulation: String,
    pub volume: Option<f64>,
    pub solve_ms: Option<f64>,
    pub assembly_ms: Option<f64>,
    pub constraints: Option<usize>,
    pub error: Option<String>,
}

/// Solve the same projected cloud across degrees and formulations.
pub fn degree_sweep(
    template: &ProblemSpec,
    projected: &ProjectedCloud,
    domain: (f64, f64),
    degrees: &[usize],
    formulations: &[Formulation],
    backend: &dyn ConicBackend,
) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for &degree in degrees {
        for &formulation in formulations {
            let spec = ProblemSpec {
                degree,
                formulation,
                samples: template.samples.max(4 * (degree + 1)),
                ..template.clone()
            };
            match solve_3d(&spec, projected, domain, backend) {
                Ok((_, report)) => rows.push(SweepRow {
                    degree,
                    formulation: formulation.as_str().to_string(),
                    volume: Some(report.reported_volume_or_area),
                    solve_ms: Some(report.solve_time_ms),
                    assembly_ms: Some(report.assembly_time_ms),
                    constraints: Some(report.constraint_count),
                    error: None,
                }),
                Err(e) => rows.push(SweepRow {
                    degree,
                    formulation: formulation.as_str().to_string(),
                    volume: None,
                    solve_ms: None,
                    assembly_ms: None,
                    constraints: None,
                    error: Some(e.to_string()),
                }),
            }
        }
    }
    rows
}
