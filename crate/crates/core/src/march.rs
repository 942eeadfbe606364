//! Slab-by-slab time marching with Picard iteration on the nonlinear stiffness.
//!
//! The semi-discrete system `M̃Ü + 2γM̃U̇ + γ²M̃U + ⅓K̃(U)U = F` is solved either
//! in the transformed variable `Z = M̃^{1/2}U` (the default, where the Gram
//! operator becomes the identity) or directly in nodal variables. Both routes
//! describe the same discrete solution, which the tests exploit.
//!
//! On each slab the stress weight `(∂ₓu*)²` is frozen at the previous iterate,
//! the resulting linear slab system is solved, and the weight is rebuilt from
//! the new iterate until the coefficient change drops below the tolerance.
//! The first pass on a slab uses the end state of the previous slab extended
//! constantly in time.

use std::sync::Arc;

use thiserror::Error;

use crate::linalg::{max_abs, spd_inv_sqrt, spd_sqrt, DenseMatrix, LinalgError};
use crate::slab::{
    assemble_block_a_with_mass, assemble_nonlinear_time_matrices, assemble_rhs_with_mass,
    solve_slab, time_matrices, MassOperator, PicardStiffness, SlabError, SlabSolution, SlabSystem,
    SlabTraces, StiffnessTerm,
};
use crate::space::{FemSpace1D, SpaceError, SpatialFunction};
use crate::time_basis::{BasisError, TimeSlab, TimeSlabBasis};

pub type ScalarField = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// A function of `(x, t)`.
pub type SpaceTimeField = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarchError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("time {t} outside (0, {final_time}]")]
    OutOfRange { t: f64, final_time: f64 },
    #[error("problem has no exact solution to measure against")]
    MissingExactSolution,
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Slab(#[from] SlabError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

impl From<BasisError> for MarchError {
    fn from(e: BasisError) -> Self {
        MarchError::Slab(SlabError::Basis(e))
    }
}

/// Constitutive law `S(∂ₓu)` in `ü + 2γu̇ + γ²u − ∂ₓS(∂ₓu) = f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StressLaw {
    /// `S(s) = s³/3`, linearised by Picard iteration.
    Cubic,
    /// `S(s) = modulus · s`; a modulus of zero removes the spatial operator.
    Linear { modulus: f64 },
}

/// Variables in which the slab systems are assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinates {
    /// `Z = M̃^{1/2}U`
    Transformed,
    /// `U` itself, with the mass matrix kept in the system
    Nodal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub gamma: f64,
    pub final_time: f64,
    pub space_degree: usize,
    pub time_degree: usize,
    pub n_elements: usize,
    pub n_slabs: usize,
    pub picard_tol: f64,
    pub picard_max: usize,
    pub load_quad_points: usize,
    pub time_quad_points: usize,
    pub stress: StressLaw,
    pub coordinates: Coordinates,
}

impl SolverConfig {
    /// Defaults: `γ = 1`, `T = 1`, Picard tolerance `1e-10` with at most 30
    /// passes, `2p + 3` spatial and `q + 4` temporal load quadrature points.
    pub fn new(space_degree: usize, time_degree: usize, n_elements: usize, n_slabs: usize) -> Self {
        Self {
            gamma: 1.0,
            final_time: 1.0,
            space_degree,
            time_degree,
            n_elements,
            n_slabs,
            picard_tol: 1e-10,
            picard_max: 30,
            load_quad_points: 2 * space_degree + 3,
            time_quad_points: time_degree + 4,
            stress: StressLaw::Cubic,
            coordinates: Coordinates::Transformed,
        }
    }

    pub fn slab_length(&self) -> f64 {
        self.final_time / self.n_slabs as f64
    }

    pub fn validate(&self) -> Result<(), MarchError> {
        let bad = |msg: String| Err(MarchError::InvalidConfig(msg));
        if self.time_degree < 2 {
            return bad(format!("temporal degree {} < 2", self.time_degree));
        }
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return bad(format!("final time {} must be positive", self.final_time));
        }
        if !(self.picard_tol > 0.0) {
            return bad(format!(
                "Picard tolerance {} must be positive",
                self.picard_tol
            ));
        }
        if self.picard_max == 0 {
            return bad("at least one Picard pass is required".into());
        }
        if self.n_slabs == 0 {
            return bad("at least one time slab is required".into());
        }
        if !self.gamma.is_finite() {
            return bad(format!("damping {} is not finite", self.gamma));
        }
        if self.load_quad_points < self.space_degree + 2 || self.load_quad_points > 64 {
            return bad(format!(
                "{} spatial quadrature points",
                self.load_quad_points
            ));
        }
        if self.time_quad_points < self.time_degree + 2 || self.time_quad_points > 64 {
            return bad(format!(
                "{} temporal quadrature points",
                self.time_quad_points
            ));
        }
        Ok(())
    }
}

#[derive(Clone)]
pub struct ExactSolution {
    pub displacement: SpaceTimeField,
    pub velocity: SpaceTimeField,
}

/// Forcing, initial data and (optionally) the exact solution.
#[derive(Clone)]
pub struct Problem {
    pub forcing: SpaceTimeField,
    pub initial_displacement: ScalarField,
    pub initial_velocity: ScalarField,
    pub exact: Option<ExactSolution>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("has_exact", &self.exact.is_some())
            .finish_non_exhaustive()
    }
}

impl Problem {
    /// Zero data with the zero function as exact solution.
    pub fn zero() -> Self {
        let zero2: SpaceTimeField = Arc::new(|_, _| 0.0);
        Self {
            forcing: zero2.clone(),
            initial_displacement: Arc::new(|_| 0.0),
            initial_velocity: Arc::new(|_| 0.0),
            exact: Some(ExactSolution {
                displacement: zero2.clone(),
                velocity: zero2,
            }),
        }
    }

    pub fn validate(&self) -> Result<(), MarchError> {
        for x in [0.0, 1.0] {
            let u0 = (self.initial_displacement)(x);
            if u0.abs() > 1e-12 {
                return Err(MarchError::InvalidProblem(format!(
                    "initial displacement {u0} at boundary x = {x}"
                )));
            }
        }
        Ok(())
    }
}

/// What happened on one slab.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabRecord {
    pub slab: TimeSlab,
    pub solution: SlabSolution,
    pub iterations: usize,
    pub residual: f64,
    pub residual_history: Vec<f64>,
    pub converged: bool,
}

/// Result of [`Discretization::march_slab`].
#[derive(Debug, Clone)]
pub struct SlabOutcome {
    pub solution: SlabSolution,
    pub iterations: usize,
    pub residual: f64,
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// Stiffness rebuilt from the final iterate.
    pub stiffness: PicardStiffness,
}

/// Space, cached mass-matrix functions, and the per-slab machinery of a run.
#[derive(Debug, Clone)]
pub struct Discretization {
    config: SolverConfig,
    space: FemSpace1D,
    mass: DenseMatrix,
    mass_sqrt: DenseMatrix,
    mass_inv_sqrt: DenseMatrix,
}

impl Discretization {
    pub fn new(config: SolverConfig) -> Result<Self, MarchError> {
        config.validate()?;
        let space = FemSpace1D::new(config.n_elements, config.space_degree)?;
        let mass = space.assemble_mass();
        let mass_sqrt = spd_sqrt(&mass)?;
        let mass_inv_sqrt = spd_inv_sqrt(&mass)?;
        Ok(Self {
            config,
            space,
            mass,
            mass_sqrt,
            mass_inv_sqrt,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn space(&self) -> &FemSpace1D {
        &self.space
    }

    pub fn mass(&self) -> &DenseMatrix {
        &self.mass
    }

    pub fn mass_sqrt(&self) -> &DenseMatrix {
        &self.mass_sqrt
    }

    pub fn mass_inv_sqrt(&self) -> &DenseMatrix {
        &self.mass_inv_sqrt
    }

    fn transformed(&self) -> bool {
        self.config.coordinates == Coordinates::Transformed
    }

    fn gram(&self) -> MassOperator<'_> {
        if self.transformed() {
            MassOperator::Identity
        } else {
            MassOperator::Matrix(&self.mass)
        }
    }

    /// Nodal values `U` from unknowns in the working coordinates.
    pub fn to_nodal(&self, z: &[f64]) -> Vec<f64> {
        if self.transformed() {
            self.mass_inv_sqrt.matvec(z)
        } else {
            z.to_vec()
        }
    }

    /// Working-coordinate unknowns from nodal values `U`.
    pub fn from_nodal(&self, u: &[f64]) -> Vec<f64> {
        if self.transformed() {
            self.mass_sqrt.matvec(u)
        } else {
            u.to_vec()
        }
    }

    /// Maps a nodal-space operator into working coordinates (`S·K·S` with `S = M̃^{-1/2}`).
    fn to_working_operator(&self, k: &DenseMatrix) -> DenseMatrix {
        if self.transformed() {
            // K is banded, so multiply it first
            self.mass_inv_sqrt.matmul(&k.matmul(&self.mass_inv_sqrt))
        } else {
            k.clone()
        }
    }

    /// Stiffness of the stress law frozen at a single (time-independent) state `w`.
    fn frozen_stiffness(&self, w: &SpatialFunction) -> Result<DenseMatrix, MarchError> {
        let nodal = match self.config.stress {
            StressLaw::Cubic => self.space.assemble_weighted_stiffness(w)?.scaled(1.0 / 3.0),
            StressLaw::Linear { modulus } => self.space.assemble_stiffness().scaled(modulus),
        };
        Ok(self.to_working_operator(&nodal))
    }

    /// Expands `(∂ₓU(t))²` for `U(t) = Σ_a w_a φ^a(t)` into the terms
    /// `c_ab φ^a φ^b · ⅓ S·K̃(w_a, w_b)·S` over all pairs `a ≤ b`.
    pub fn build_picard_stiffness(
        &self,
        iterate: &SlabSolution,
    ) -> Result<PicardStiffness, MarchError> {
        let dim = self.space.dof_count();
        if iterate.dim() != dim {
            return Err(SlabError::DimensionMismatch {
                what: "Picard iterate",
                expected: dim,
                found: iterate.dim(),
            }
            .into());
        }
        if let StressLaw::Linear { .. } = self.config.stress {
            let k = self.frozen_stiffness(&self.space.zero_function())?;
            return Ok(PicardStiffness::constant(k));
        }
        let n = iterate.n_time();
        let modes = (1..=n)
            .map(|j| {
                self.space
                    .function(self.to_nodal(&iterate.temporal_mode(j)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut terms = Vec::with_capacity(n * (n + 1) / 2);
        for a in 1..=n {
            for b in a..=n {
                let cross = self
                    .space
                    .assemble_cross_stiffness(&modes[a - 1], &modes[b - 1])?
                    .scaled(1.0 / 3.0);
                terms.push(StiffnessTerm {
                    coefficient: if a == b { 1.0 } else { 2.0 },
                    a,
                    b,
                    matrix: self.to_working_operator(&cross),
                });
            }
        }
        Ok(PicardStiffness::from_terms(dim, terms)?)
    }

    /// Incoming traces for the first slab and the stiffness frozen at `u₀`.
    pub fn initialize(
        &self,
        problem: &Problem,
    ) -> Result<(SlabTraces, PicardStiffness), MarchError> {
        problem.validate()?;
        let u0 = self
            .space
            .interpolate(|x| (problem.initial_displacement)(x));
        let u1 = self.space.interpolate(|x| (problem.initial_velocity)(x));
        let k0 = self.frozen_stiffness(&u0)?;
        let traces = SlabTraces {
            z_in: self.from_nodal(u0.coefficients()),
            zdot_in: self.from_nodal(u1.coefficients()),
            k_in: k0.clone(),
        };
        Ok((traces, PicardStiffness::constant(k0)))
    }

    /// Load vector at time `t` in working coordinates.
    pub fn load(&self, problem: &Problem, t: f64) -> Vec<f64> {
        let f = self
            .space
            .assemble_load(|x| (problem.forcing)(x, t), self.config.load_quad_points);
        if self.transformed() {
            self.mass_inv_sqrt.matvec(&f)
        } else {
            f
        }
    }

    /// Picard iteration on one slab.
    pub fn march_slab(
        &self,
        basis: &TimeSlabBasis,
        traces: &SlabTraces,
        warm_start: PicardStiffness,
        load: impl FnMut(f64) -> Vec<f64>,
    ) -> Result<SlabOutcome, MarchError> {
        let dim = self.space.dof_count();
        let nt = basis.size();
        let tm = time_matrices(basis)?;
        let b = assemble_rhs_with_mass(
            basis,
            traces,
            load,
            self.config.gamma,
            self.config.time_quad_points,
            self.gram(),
        )?;

        let mut stiffness = warm_start;
        let mut previous = SlabSolution::zero(dim, nt);
        let mut history = Vec::new();
        loop {
            let blocks = assemble_nonlinear_time_matrices(basis, &stiffness)?;
            let a = assemble_block_a_with_mass(&tm, &blocks, self.config.gamma, self.gram())?;
            let solution = solve_slab(&SlabSystem::new(a, b.clone(), dim, nt)?)?;
            let change: Vec<f64> = solution
                .coefficients()
                .iter()
                .zip(previous.coefficients())
                .map(|(x, y)| x - y)
                .collect();
            let residual = max_abs(&change) / (1.0 + max_abs(solution.coefficients()));
            history.push(residual);
            stiffness = self.build_picard_stiffness(&solution)?;
            let converged = residual <= self.config.picard_tol;
            if converged || history.len() >= self.config.picard_max {
                return Ok(SlabOutcome {
                    solution,
                    iterations: history.len(),
                    residual,
                    residual_history: history,
                    converged,
                    stiffness,
                });
            }
            previous = solution;
        }
    }

    fn slab(&self, n: usize) -> Result<TimeSlab, MarchError> {
        let cfg = &self.config;
        let t = |i: usize| cfg.final_time * i as f64 / cfg.n_slabs as f64;
        Ok(TimeSlab::new(n, t(n - 1), t(n))?)
    }

    fn basis(&self, n: usize) -> Result<TimeSlabBasis, MarchError> {
        Ok(TimeSlabBasis::new(self.slab(n)?, self.config.time_degree)?)
    }

    /// Marches all slabs in order.
    pub fn march(self, problem: &Problem) -> Result<Trajectory, MarchError> {
        let (mut traces, mut warm) = self.initialize(problem)?;
        let mut slabs = Vec::with_capacity(self.config.n_slabs);
        for n in 1..=self.config.n_slabs {
            let basis = self.basis(n)?;
            let outcome = self.march_slab(&basis, &traces, warm, |t| self.load(problem, t))?;
            let t_end = basis.slab().t_end;
            let k_end = outcome.stiffness.evaluate(&basis, t_end)?;
            traces = SlabTraces {
                z_in: outcome.solution.value(&basis, t_end, 0)?,
                zdot_in: outcome.solution.value(&basis, t_end, 1)?,
                k_in: k_end.clone(),
            };
            warm = PicardStiffness::constant(k_end);
            slabs.push(SlabRecord {
                slab: *basis.slab(),
                solution: outcome.solution,
                iterations: outcome.iterations,
                residual: outcome.residual,
                residual_history: outcome.residual_history,
                converged: outcome.converged,
            });
        }
        Ok(Trajectory {
            discretization: self,
            slabs,
        })
    }
}

/// Convenience wrapper: build the discretization for `config` and march `problem`.
pub fn march(config: &SolverConfig, problem: &Problem) -> Result<Trajectory, MarchError> {
    Discretization::new(config.clone())?.march(problem)
}

/// The full space-time solution of a run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    discretization: Discretization,
    slabs: Vec<SlabRecord>,
}

impl Trajectory {
    pub fn discretization(&self) -> &Discretization {
        &self.discretization
    }

    pub fn config(&self) -> &SolverConfig {
        &self.discretization.config
    }

    pub fn space(&self) -> &FemSpace1D {
        &self.discretization.space
    }

    pub fn slabs(&self) -> &[SlabRecord] {
        &self.slabs
    }

    pub fn iteration_counts(&self) -> Vec<usize> {
        self.slabs.iter().map(|s| s.iterations).collect()
    }

    pub fn all_converged(&self) -> bool {
        self.slabs.iter().all(|s| s.converged)
    }

    pub fn max_picard_residual(&self) -> f64 {
        self.slabs.iter().fold(0.0, |m, s| m.max(s.residual))
    }

    fn slab_index(&self, t: f64) -> Result<usize, MarchError> {
        let cfg = self.config();
        if !(t > 0.0 && t <= cfg.final_time) {
            return Err(MarchError::OutOfRange {
                t,
                final_time: cfg.final_time,
            });
        }
        // half-open slabs (t_{n-1}, t_n]: the node t_n belongs to slab n
        let n = self
            .slabs
            .partition_point(|s| s.slab.t_end < t)
            .min(self.slabs.len() - 1);
        Ok(n)
    }

    fn basis_for(&self, index: usize) -> Result<TimeSlabBasis, MarchError> {
        Ok(TimeSlabBasis::new(
            self.slabs[index].slab,
            self.config().time_degree,
        )?)
    }

    /// Working-coordinate value of slab `index` (0-based) at `t`, which may
    /// lie on either endpoint of that slab.
    pub fn slab_value(&self, index: usize, t: f64, deriv: usize) -> Result<Vec<f64>, MarchError> {
        let basis = self.basis_for(index)?;
        Ok(self.slabs[index].solution.value(&basis, t, deriv)?)
    }

    /// Nodal displacement (`deriv = 0`) or velocity (`deriv = 1`) at `t ∈ (0, T]`.
    pub fn eval_solution(&self, t: f64, deriv: usize) -> Result<SpatialFunction, MarchError> {
        let n = self.slab_index(t)?;
        let z = self.slab_value(n, t, deriv)?;
        Ok(self.space().function(self.discretization.to_nodal(&z))?)
    }

    /// `‖u(T) − u_h(T⁻)‖ + ‖u̇(T) − u̇_h(T⁻)‖` in `L²(0, 1)`.
    pub fn final_error(&self, problem: &Problem, quad_points: usize) -> Result<f64, MarchError> {
        let exact = problem
            .exact
            .as_ref()
            .ok_or(MarchError::MissingExactSolution)?;
        let t_final = self.config().final_time;
        let u = self.eval_solution(t_final, 0)?;
        let v = self.eval_solution(t_final, 1)?;
        let eu = self.space().l2_norm_of_difference(
            &u,
            |x| (exact.displacement)(x, t_final),
            quad_points,
        )?;
        let ev = self.space().l2_norm_of_difference(
            &v,
            |x| (exact.velocity)(x, t_final),
            quad_points,
        )?;
        Ok(eu + ev)
    }

    /// Max-norm of the jumps `Z(t_n⁺) − Z(t_n⁻)` (`deriv = 0`) or `Ż(t_n⁺) − Ż(t_n⁻)`
    /// (`deriv = 1`) at the interior slab boundaries, in working coordinates.
    pub fn jumps(&self, deriv: usize) -> Result<Vec<f64>, MarchError> {
        (1..self.slabs.len())
            .map(|n| {
                let t = self.slabs[n].slab.t_start;
                let minus = self.slab_value(n - 1, t, deriv)?;
                let plus = self.slab_value(n, t, deriv)?;
                let d: Vec<f64> = plus.iter().zip(&minus).map(|(a, b)| a - b).collect();
                Ok(max_abs(&d))
            })
            .collect()
    }

    /// Discrete energy `½‖u̇_h‖² + ½γ²‖u_h‖² + ∫W(∂ₓu_h)` at the end of each slab,
    /// with `W(s) = s⁴/12` (cubic law) or `modulus·s²/2` (linear law).
    pub fn slab_end_energies(&self) -> Result<Vec<f64>, MarchError> {
        let d = &self.discretization;
        let gamma = self.config().gamma;
        let mass_norm2 = |u: &[f64]| -> f64 {
            let mu = d.mass.matvec(u);
            u.iter().zip(&mu).map(|(a, b)| a * b).sum()
        };
        let stiffness = d.space.assemble_stiffness();
        self.slabs
            .iter()
            .map(|s| {
                let t = s.slab.t_end;
                let u = self.eval_solution(t, 0)?;
                let v = self.eval_solution(t, 1)?;
                let stored = match self.config().stress {
                    StressLaw::Cubic => d.space.quartic_gradient_integral(&u)? / 12.0,
                    StressLaw::Linear { modulus } => {
                        let ku = stiffness.matvec(u.coefficients());
                        0.5 * modulus
                            * u.coefficients()
                                .iter()
                                .zip(&ku)
                                .map(|(a, b)| a * b)
                                .sum::<f64>()
                    }
                };
                Ok(0.5 * mass_norm2(v.coefficients())
                    + 0.5 * gamma * gamma * mass_norm2(u.coefficients())
                    + stored)
            })
            .collect()
    }
}
