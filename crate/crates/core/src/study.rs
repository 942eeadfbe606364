//! Manufactured-solution convergence study and its CSV output.

use std::f64::consts::{PI, SQRT_2};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::march::{march, ExactSolution, MarchError, Problem, SolverConfig};

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("invalid study plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    March(#[from] MarchError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

/// Exact solution `u = sin(√2πt) sin(πx)` with its forcing for damping `γ`.
///
/// `u₀ ≡ 0` and `u₁ = √2π sin(πx)`.
pub fn benchmark_problem(gamma: f64) -> Problem {
    let w = SQRT_2 * PI;
    let forcing = move |x: f64, t: f64| {
        let (s, c) = (w * t).sin_cos();
        let (sx, cx) = (PI * x).sin_cos();
        ((-2.0 * PI * PI + gamma * gamma) * s + 2.0 * SQRT_2 * gamma * PI * c) * sx
            + PI.powi(4) * s.powi(3) * cx * cx * sx
    };
    Problem {
        forcing: Arc::new(forcing),
        initial_displacement: Arc::new(|_| 0.0),
        initial_velocity: Arc::new(move |x| w * (PI * x).sin()),
        exact: Some(ExactSolution {
            displacement: Arc::new(move |x, t| (w * t).sin() * (PI * x).sin()),
            velocity: Arc::new(move |x, t| w * (w * t).cos() * (PI * x).sin()),
        }),
    }
}

/// Outcome of one solve against a known exact solution.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub error: f64,
    pub iterations: Vec<usize>,
    pub residuals: Vec<f64>,
    pub converged: Vec<bool>,
}

impl RunReport {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }

    pub fn max_iterations(&self) -> usize {
        self.iterations.iter().copied().max().unwrap_or(0)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, &r| m.max(r))
    }
}

/// Marches `problem` and measures the combined final-time error.
pub fn run_single_with(config: &SolverConfig, problem: &Problem) -> Result<RunReport, StudyError> {
    let traj = march(config, problem)?;
    let error = traj.final_error(problem, config.load_quad_points)?;
    Ok(RunReport {
        error,
        iterations: traj.iteration_counts(),
        residuals: traj.slabs().iter().map(|s| s.residual).collect(),
        converged: traj.slabs().iter().map(|s| s.converged).collect(),
    })
}

/// [`run_single_with`] on the manufactured problem for `config.gamma`.
pub fn run_single(config: &SolverConfig) -> Result<RunReport, StudyError> {
    run_single_with(config, &benchmark_problem(config.gamma))
}

/// Grid of runs with `k = h²` and `p = q`.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyPlan {
    pub gamma: f64,
    pub final_time: f64,
    pub h_values: Vec<f64>,
    pub degrees: Vec<usize>,
    pub picard_tol: f64,
    pub picard_max: usize,
}

impl Default for StudyPlan {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            final_time: 1.0,
            h_values: vec![0.25, 0.2, 0.125, 0.0625],
            degrees: vec![2, 3, 4],
            picard_tol: 1e-10,
            picard_max: 30,
        }
    }
}

fn integral_count(value: f64, what: &str) -> Result<usize, StudyError> {
    let n = value.round();
    if !(n >= 1.0) || (value - n).abs() > 1e-9 * n {
        return Err(StudyError::InvalidPlan(format!(
            "{what} = {value} is not a positive integer"
        )));
    }
    Ok(n as usize)
}

impl StudyPlan {
    pub fn validate(&self) -> Result<(), StudyError> {
        if self.h_values.is_empty() || self.degrees.is_empty() {
            return Err(StudyError::InvalidPlan(
                "empty h list or degree list".into(),
            ));
        }
        if self.h_values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(StudyError::InvalidPlan(
                "h values must strictly decrease".into(),
            ));
        }
        for &h in &self.h_values {
            integral_count(1.0 / h, "1/h")?;
            integral_count(self.final_time / (h * h), "T/h²")?;
        }
        Ok(())
    }

    /// Solver configuration for degree `q` on mesh size `h`.
    pub fn config(&self, q: usize, h: f64) -> Result<SolverConfig, StudyError> {
        let n_elements = integral_count(1.0 / h, "1/h")?;
        let n_slabs = integral_count(self.final_time / (h * h), "T/h²")?;
        let mut cfg = SolverConfig::new(q, q, n_elements, n_slabs);
        cfg.gamma = self.gamma;
        cfg.final_time = self.final_time;
        cfg.picard_tol = self.picard_tol;
        cfg.picard_max = self.picard_max;
        Ok(cfg)
    }

    /// `(q, h)` pairs in output order: degree major, mesh size minor.
    pub fn cases(&self) -> Vec<(usize, f64)> {
        self.degrees
            .iter()
            .flat_map(|&q| self.h_values.iter().map(move |&h| (q, h)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub q: usize,
    pub h: f64,
    pub k: f64,
    pub error: f64,
    pub rate: Option<f64>,
}

/// Observed order with respect to the time step: `ln(e₀/e₁) / ln(k₀/k₁)`.
pub fn convergence_rate(error_coarse: f64, error_fine: f64, k_coarse: f64, k_fine: f64) -> f64 {
    (error_coarse / error_fine).ln() / (k_coarse / k_fine).ln()
}

/// Builds rows with rates between consecutive entries of the same `q`.
pub fn rows_from_errors(cases: &[(usize, f64)], errors: &[f64]) -> Vec<ConvergenceRow> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(cases.len());
    for (&(q, h), &error) in cases.iter().zip(errors) {
        let k = h * h;
        let rate = rows
            .last()
            .filter(|prev| prev.q == q)
            .map(|prev| convergence_rate(prev.error, error, prev.k, k));
        rows.push(ConvergenceRow {
            q,
            h,
            k,
            error,
            rate,
        });
    }
    rows
}

/// Every case of the plan together with its solve report, in plan order.
#[derive(Debug, Clone)]
pub struct StudyResult {
    pub rows: Vec<ConvergenceRow>,
    pub reports: Vec<RunReport>,
}

/// Runs all cases (in parallel) and assembles rows in plan order.
pub fn run_study(plan: &StudyPlan) -> Result<StudyResult, StudyError> {
    plan.validate()?;
    let problem = benchmark_problem(plan.gamma);
    let cases = plan.cases();
    let reports = cases
        .par_iter()
        .map(|&(q, h)| run_single_with(&plan.config(q, h)?, &problem))
        .collect::<Result<Vec<_>, _>>()?;
    let errors: Vec<f64> = reports.iter().map(|r| r.error).collect();
    Ok(StudyResult {
        rows: rows_from_errors(&cases, &errors),
        reports,
    })
}

fn sci(v: f64) -> String {
    format!("{v:.5e}")
}

pub fn write_csv<W: Write>(rows: &[ConvergenceRow], mut out: W) -> io::Result<()> {
    writeln!(out, "q,h,k,error,rate")?;
    for r in rows {
        let rate = r.rate.map(sci).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{}",
            r.q,
            sci(r.h),
            sci(r.k),
            sci(r.error),
            rate
        )?;
    }
    out.flush()
}

/// Log-log plot series: one `(1/k, error)` point per row.
pub fn write_plot_data<W: Write>(rows: &[ConvergenceRow], mut out: W) -> io::Result<()> {
    writeln!(out, "q,inv_k,error")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.q, sci(1.0 / r.k), sci(r.error))?;
    }
    out.flush()
}

pub fn emit_csv(rows: &[ConvergenceRow], path: &Path) -> Result<(), StudyError> {
    write_csv(rows, BufWriter::new(File::create(path)?))?;
    Ok(())
}

pub fn emit_plot_data(rows: &[ConvergenceRow], path: &Path) -> Result<(), StudyError> {
    write_plot_data(rows, BufWriter::new(File::create(path)?))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forcing_at_time_zero() {
        let p = benchmark_problem(0.7);
        for x in [0.1, 0.5, 0.83] {
            let expected = 2.0 * SQRT_2 * 0.7 * PI * (PI * x).sin();
            assert!(((p.forcing)(x, 0.0) - expected).abs() < 1e-14);
            assert_eq!((p.initial_displacement)(x), 0.0);
            let exact = p.exact.as_ref().unwrap();
            assert!((exact.displacement)(x, 0.0).abs() < 1e-15);
            assert!(((exact.velocity)(x, 0.0) - (p.initial_velocity)(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn plan_validation() {
        let plan = StudyPlan::default();
        plan.validate().unwrap();
        assert_eq!(plan.cases().len(), 12);
        let cfg = plan.config(3, 0.2).unwrap();
        assert_eq!(
            (
                cfg.space_degree,
                cfg.time_degree,
                cfg.n_elements,
                cfg.n_slabs
            ),
            (3, 3, 5, 25)
        );
        let cfg = plan.config(4, 0.0625).unwrap();
        assert_eq!((cfg.n_elements, cfg.n_slabs), (16, 256));
        for h in [vec![0.2, 0.25], vec![0.3], vec![]] {
            let bad = StudyPlan {
                h_values: h,
                ..StudyPlan::default()
            };
            assert!(matches!(bad.validate(), Err(StudyError::InvalidPlan(_))));
        }
    }

    #[test]
    fn rates_follow_time_step_convention() {
        let r = convergence_rate(1.2123e-2, 4.9774e-3, 6.25e-2, 4.0e-2);
        assert!((r - 1.9948).abs() < 5e-4, "{r}");
        let cases = [(2, 0.5), (2, 0.25), (3, 0.5)];
        let rows = rows_from_errors(&cases, &[1.0, 0.25, 0.1]);
        assert_eq!(rows[0].rate, None);
        assert!((rows[1].rate.unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(rows[2].rate, None);
        assert_eq!(rows[1].k, 0.0625);
    }

    #[test]
    fn csv_layout() {
        let rows = rows_from_errors(&[(2, 0.25), (2, 0.2)], &[1.2123e-2, 4.9774e-3]);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "q,h,k,error,rate");
        assert_eq!(lines[1], "2,2.50000e-1,6.25000e-2,1.21230e-2,");
        let fields: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(
            &fields[..4],
            &["2", "2.00000e-1", "4.00000e-2", "4.97740e-3"]
        );
        let rate: f64 = fields[4].parse().unwrap();
        assert!((rate - 1.9948).abs() < 5e-4, "{}", fields[4]);
        assert!(text.ends_with('\n'));

        let mut buf = Vec::new();
        write_plot_data(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "2,1.60000e1,1.21230e-2");

        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(buf, b"q,h,k,error,rate\n");
    }

    #[test]
    fn zero_problem_run_has_zero_error() {
        let cfg = SolverConfig::new(2, 2, 4, 4);
        let report = run_single_with(&cfg, &Problem::zero()).unwrap();
        assert_eq!(report.error, 0.0);
        assert_eq!(report.iterations, vec![1; 4]);
        assert!(report.all_converged());
    }
}
