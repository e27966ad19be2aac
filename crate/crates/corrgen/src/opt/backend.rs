//! Pluggable conic-solver backend contract.
//!
//! Programs are standard-form: minimize a linear objective subject to
//! `A x + s = b` with `s` in a product of nonnegative and rotated
//! quadratic cones. The rotated quadratic cone `{(a, b, t) : 2ab >= t^2,
//! a, b >= 0}` is all the spatial formulation needs, since membership of
//! `(e11, e22, sqrt(2) e12)` is exactly the 2x2 positive-semidefinite
//! condition. The bundled backend is Clarabel; rotated cones are handed
//! to it as second-order cones through the usual orthogonal change of
//! coordinates.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, NonnegativeConeT, SecondOrderConeT, SolverStatus,
    SupportedConeT,
};

/// One linear expression `coeffs . x + constant`.
#[derive(Debug, Clone, Default)]
pub struct LinExpr {
    pub coeffs: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn new(coeffs: Vec<(usize, f64)>, constant: f64) -> Self {
        Self { coeffs, constant }
    }
}

/// Cone membership of a row block, in row order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeBlock {
    Nonnegative(usize),
    /// Three rows forming `(a, b, t)` with `2ab >= t^2`, `a, b >= 0`.
    RotatedQuadratic,
}

/// Standard-form conic program: minimize `objective . x` subject to the
/// stacked row expressions lying in their cones.
#[derive(Debug, Clone, Default)]
pub struct ConicProgram {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    nonneg: Vec<LinExpr>,
    rotated: Vec<[LinExpr; 3]>,
}

impl ConicProgram {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            nonneg: Vec::new(),
            rotated: Vec::new(),
        }
    }

    /// Require `expr >= 0`.
    pub fn add_nonneg(&mut self, expr: LinExpr) {
        self.nonneg.push(expr);
    }

    /// Require `(a, b, t)` in the rotated quadratic cone.
    pub fn add_rotated(&mut self, a: LinExpr, b: LinExpr, t: LinExpr) {
        self.rotated.push([a, b, t]);
    }

    pub fn num_rows(&self) -> usize {
        self.nonneg.len() + 3 * self.rotated.len()
    }

    pub fn num_nonneg(&self) -> usize {
        self.nonneg.len()
    }

    pub fn num_rotated(&self) -> usize {
        self.rotated.len()
    }

    pub fn cones(&self) -> Vec<ConeBlock> {
        let mut cones = Vec::new();
        if !self.nonneg.is_empty() {
            cones.push(ConeBlock::Nonnegative(self.nonneg.len()));
        }
        cones.extend(std::iter::repeat_n(
            ConeBlock::RotatedQuadratic,
            self.rotated.len(),
        ));
        cones
    }

    /// Value of every row expression at `x`, in row order.
    pub fn row_values(&self, x: &[f64]) -> Vec<f64> {
        let eval = |e: &LinExpr| -> f64 {
            e.constant + e.coeffs.iter().map(|&(j, v)| v * x[j]).sum::<f64>()
        };
        let mut out: Vec<f64> = self.nonneg.iter().map(eval).collect();
        for block in &self.rotated {
            out.extend(block.iter().map(eval));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BackendStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure(String),
}

#[derive(Debug, Clone)]
pub struct BackendSolution {
    pub status: BackendStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub solve_time_ms: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

pub trait ConicBackend {
    fn solve(&self, program: &ConicProgram) -> BackendSolution;
}

/// Clarabel interior-point backend.
#[derive(Debug, Clone, Default)]
pub struct ClarabelBackend {
    /// Optional override of the gap/feasibility tolerances.
    pub tolerance: Option<f64>,
    pub verbose: bool,
}

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

impl ConicBackend for ClarabelBackend {
    fn solve(&self, program: &ConicProgram) -> BackendSolution {
        let n = program.num_vars;
        let m = program.num_rows();

        // Rows are emitted as `A x + s = b` with `s = expr`, so
        // A = -coeffs and b = constant. Rotated blocks become
        // second-order cones via (a, b, t) -> ((a+b)/sqrt2, (a-b)/sqrt2, t).
        let mut ti = Vec::new();
        let mut tj = Vec::new();
        let mut tv = Vec::new();
        let mut b = Vec::with_capacity(m);
        let mut push_expr = |row: usize, expr: &LinExpr, scale: f64, b: &mut Vec<f64>| {
            for &(j, v) in &expr.coeffs {
                ti.push(row);
                tj.push(j);
                tv.push(-v * scale);
            }
            if b.len() == row {
                b.push(expr.constant * scale);
            } else {
                b[row] += expr.constant * scale;
            }
        };

        let mut row = 0;
        for expr in &program.nonneg {
            push_expr(row, expr, 1.0, &mut b);
            row += 1;
        }
        let mut cones: Vec<SupportedConeT<f64>> = Vec::new();
        if !program.nonneg.is_empty() {
            cones.push(NonnegativeConeT(program.nonneg.len()));
        }
        for block in &program.rotated {
            let [a_e, b_e, t_e] = block;
            push_expr(row, a_e, SQRT_HALF, &mut b);
            push_expr(row, b_e, SQRT_HALF, &mut b);
            row += 1;
            push_expr(row, a_e, SQRT_HALF, &mut b);
            push_expr(row, b_e, -SQRT_HALF, &mut b);
            row += 1;
            push_expr(row, t_e, 1.0, &mut b);
            row += 1;
            cones.push(SecondOrderConeT(3));
        }
        debug_assert_eq!(row, m);

        let a = CscMatrix::new_from_triplets(m, n, ti, tj, tv);
        let p = CscMatrix::<f64>::zeros((n, n));
        let mut settings = DefaultSettings {
            verbose: self.verbose,
            ..Default::default()
        };
        if let Some(tol) = self.tolerance {
            settings.tol_gap_abs = tol;
            settings.tol_gap_rel = tol;
            settings.tol_feas = tol;
        }
        let mut solver = DefaultSolver::new(&p, &program.objective, &a, &b, &cones, settings);
        solver.solve();
        let sol = &solver.solution;
        let status = match sol.status {
            SolverStatus::Solved | SolverStatus::AlmostSolved => BackendStatus::Optimal,
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
                BackendStatus::Infeasible
            }
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
                BackendStatus::Unbounded
            }
            other => BackendStatus::NumericalFailure(format!("{other:?}")),
        };
        BackendSolution {
            status,
            x: sol.x.clone(),
            objective: sol.obj_val,
            solve_time_ms: sol.solve_time * 1e3,
            primal_residual: sol.r_prim,
            dual_residual: sol.r_dual,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_a_tiny_lp() {
        // minimize -x subject to x <= 3, x >= 0.
        let mut prog = ConicProgram::new(1);
        prog.objective[0] = -1.0;
        prog.add_nonneg(LinExpr::new(vec![(0, -1.0)], 3.0));
        prog.add_nonneg(LinExpr::new(vec![(0, 1.0)], 0.0));
        let sol = ClarabelBackend::default().solve(&prog);
        assert_eq!(sol.status, BackendStatus::Optimal);
        assert!((sol.x[0] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn solves_a_rotated_cone_program() {
        // minimize a + b subject to 2ab >= 4 with t fixed: optimum at
        // a = b = sqrt(2), objective 2 sqrt(2).
        let mut prog = ConicProgram::new(2);
        prog.objective = vec![1.0, 1.0];
        prog.add_rotated(
            LinExpr::new(vec![(0, 1.0)], 0.0),
            LinExpr::new(vec![(1, 1.0)], 0.0),
            LinExpr::new(vec![], 2.0),
        );
        let sol = ClarabelBackend::default().solve(&prog);
        assert_eq!(sol.status, BackendStatus::Optimal);
        assert!((sol.objective - 2.0 * 2.0f64.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn reports_infeasible() {
        // x >= 1 and -x >= 0 cannot both hold.
        let mut prog = ConicProgram::new(1);
        prog.add_nonneg(LinExpr::new(vec![(0, 1.0)], -1.0));
        prog.add_nonneg(LinExpr::new(vec![(0, -1.0)], 0.0));
        let sol = ClarabelBackend::default().solve(&prog);
        assert_eq!(sol.status, BackendStatus::Infeasible);
    }

    #[test]
    fn reports_unbounded() {
        let mut prog = ConicProgram::new(1);
        prog.objective[0] = -1.0;
        prog.add_nonneg(LinExpr::new(vec![(0, 1.0)], 0.0));
        let sol = ClarabelBackend::default().solve(&prog);
        assert_eq!(sol.status, BackendStatus::Unbounded);
    }
}
