//! Assembly and solution of the linear system for a single time slab.
//!
//! Unknowns are ordered spatial-index major: entry `m·(q+1) + (j−1)` holds the
//! coefficient of `φ^j` in component `m`. Test functions use the same layout,
//! so block `(i, j)` of the matrix couples spatial rows `i` and columns `j`.

use thiserror::Error;

use crate::linalg::{lu_solve, max_abs, DenseMatrix, LinalgError};
use crate::quadrature::gauss_legendre;
use crate::time_basis::{BasisError, TimeSlabBasis};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SlabError {
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("{what}: expected size {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
}

fn expect_len(what: &'static str, expected: usize, found: usize) -> Result<(), SlabError> {
    if expected == found {
        Ok(())
    } else {
        Err(SlabError::DimensionMismatch {
            what,
            expected,
            found,
        })
    }
}

/// The five `(q+1)×(q+1)` temporal matrices of a slab; row `l` is the test index.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeMatrices {
    /// `∫ φ̈^j φ̇^l`
    pub m1: DenseMatrix,
    /// `∫ φ̇^j φ̇^l`
    pub m2: DenseMatrix,
    /// `∫ φ^j φ̇^l`
    pub m3: DenseMatrix,
    /// `φ̇^j(t⁺) φ̇^l(t⁺)` at the left end
    pub m4: DenseMatrix,
    /// `φ^j(t⁺) φ^l(t⁺)` at the left end
    pub m5: DenseMatrix,
}

impl TimeMatrices {
    pub fn size(&self) -> usize {
        self.m1.rows()
    }
}

pub fn time_matrices(basis: &TimeSlabBasis) -> Result<TimeMatrices, SlabError> {
    let n = basis.size();
    let t0 = basis.slab().t_start;
    let left = basis.eval_all(t0, 0)?;
    let left_dot = basis.eval_all(t0, 1)?;
    let mut m1 = DenseMatrix::zeros(n, n);
    let mut m2 = DenseMatrix::zeros(n, n);
    let mut m3 = DenseMatrix::zeros(n, n);
    for l in 0..n {
        for j in 0..n {
            m1[(l, j)] = basis.product_integral(&[(j + 1, 2), (l + 1, 1)])?;
            m2[(l, j)] = basis.product_integral(&[(j + 1, 1), (l + 1, 1)])?;
            m3[(l, j)] = basis.product_integral(&[(j + 1, 0), (l + 1, 1)])?;
        }
    }
    let m4 = DenseMatrix::from_fn(n, n, |l, j| left_dot[j] * left_dot[l]);
    let m5 = DenseMatrix::from_fn(n, n, |l, j| left[j] * left[l]);
    Ok(TimeMatrices { m1, m2, m3, m4, m5 })
}

/// One term `c · φ^a(t) φ^b(t) · K_ab` of a Picard stiffness (indices 1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct StiffnessTerm {
    pub coefficient: f64,
    pub a: usize,
    pub b: usize,
    pub matrix: DenseMatrix,
}

/// Time-dependent stiffness `K(t) = Σ c_ab φ^a(t) φ^b(t) K_ab` frozen for one Picard pass.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardStiffness {
    dim: usize,
    terms: Vec<StiffnessTerm>,
}

impl PicardStiffness {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: Vec::new(),
        }
    }

    /// A time-independent stiffness (single `φ¹φ¹` term).
    pub fn constant(matrix: DenseMatrix) -> Self {
        Self {
            dim: matrix.rows(),
            terms: vec![StiffnessTerm {
                coefficient: 1.0,
                a: 1,
                b: 1,
                matrix,
            }],
        }
    }

    pub fn from_terms(dim: usize, terms: Vec<StiffnessTerm>) -> Result<Self, SlabError> {
        for t in &terms {
            expect_len("stiffness term rows", dim, t.matrix.rows())?;
            expect_len("stiffness term cols", dim, t.matrix.cols())?;
        }
        Ok(Self { dim, terms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[StiffnessTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.matrix.max_abs() == 0.0)
    }

    /// `K(t)` as a matrix, using the temporal basis of `basis`.
    pub fn evaluate(&self, basis: &TimeSlabBasis, t: f64) -> Result<DenseMatrix, SlabError> {
        let phi = basis.eval_all(t, 0)?;
        let mut out = DenseMatrix::zeros(self.dim, self.dim);
        for term in &self.terms {
            let (a, b) = (term.a - 1, term.b - 1);
            if a >= phi.len() || b >= phi.len() {
                return Err(BasisError::IndexOutOfRange {
                    index: term.a.max(term.b),
                    size: phi.len(),
                }
                .into());
            }
            out.add_scaled(term.coefficient * phi[a] * phi[b], &term.matrix);
        }
        Ok(out)
    }
}

/// Incoming data from the previous slab: `Z(t⁻)`, `Ż(t⁻)` and `K(t⁻)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabTraces {
    pub z_in: Vec<f64>,
    pub zdot_in: Vec<f64>,
    pub k_in: DenseMatrix,
}

impl SlabTraces {
    pub fn zero(dim: usize) -> Self {
        Self {
            z_in: vec![0.0; dim],
            zdot_in: vec![0.0; dim],
            k_in: DenseMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.z_in.len()
    }
}

/// Per spatial pair `(i, j)`, the `(q+1)×(q+1)` blocks `(K φ^j', φ̇^l)` and
/// `K(t⁺)_ij φ^j'(t⁺) φ^l(t⁺)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearBlocks {
    dim: usize,
    n_time: usize,
    m3: Vec<f64>,
    m5: Vec<f64>,
}

impl NonlinearBlocks {
    fn offset(&self, i: usize, j: usize) -> usize {
        (i * self.dim + j) * self.n_time * self.n_time
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_time(&self) -> usize {
        self.n_time
    }

    fn block(&self, data: &[f64], i: usize, j: usize) -> DenseMatrix {
        let o = self.offset(i, j);
        let nt = self.n_time;
        DenseMatrix::from_row_major(nt, nt, data[o..o + nt * nt].to_vec())
            .expect("block size is consistent")
    }

    pub fn m3_block(&self, i: usize, j: usize) -> DenseMatrix {
        self.block(&self.m3, i, j)
    }

    pub fn m5_block(&self, i: usize, j: usize) -> DenseMatrix {
        self.block(&self.m5, i, j)
    }

    fn sum_entry(&self, i: usize, j: usize, l: usize, jp: usize) -> f64 {
        let idx = self.offset(i, j) + l * self.n_time + jp;
        self.m3[idx] + self.m5[idx]
    }
}

pub fn assemble_nonlinear_time_matrices(
    basis: &TimeSlabBasis,
    stiffness: &PicardStiffness,
) -> Result<NonlinearBlocks, SlabError> {
    let dim = stiffness.dim();
    let nt = basis.size();
    let mut blocks = NonlinearBlocks {
        dim,
        n_time: nt,
        m3: vec![0.0; dim * dim * nt * nt],
        m5: vec![0.0; dim * dim * nt * nt],
    };
    for term in stiffness.terms() {
        if term.matrix.max_abs() == 0.0 {
            continue;
        }
        let mut temporal = vec![0.0; nt * nt];
        for l in 0..nt {
            for jp in 0..nt {
                temporal[l * nt + jp] =
                    basis.product_integral(&[(term.a, 0), (term.b, 0), (jp + 1, 0), (l + 1, 1)])?;
            }
        }
        for i in 0..dim {
            for j in 0..dim {
                let kij = term.coefficient * term.matrix[(i, j)];
                if kij == 0.0 {
                    continue;
                }
                let o = blocks.offset(i, j);
                for (dst, src) in blocks.m3[o..o + nt * nt].iter_mut().zip(&temporal) {
                    *dst += kij * src;
                }
            }
        }
    }

    let t0 = basis.slab().t_start;
    let left = basis.eval_all(t0, 0)?;
    let k_plus = stiffness.evaluate(basis, t0)?;
    for i in 0..dim {
        for j in 0..dim {
            let kij = k_plus[(i, j)];
            if kij == 0.0 {
                continue;
            }
            let o = blocks.offset(i, j);
            for l in 0..nt {
                for jp in 0..nt {
                    blocks.m5[o + l * nt + jp] = kij * left[jp] * left[l];
                }
            }
        }
    }
    Ok(blocks)
}

/// The spatial Gram operator multiplying the inertial and damping terms:
/// the identity in the transformed variable, the mass matrix in nodal variables.
#[derive(Debug, Clone, Copy)]
pub enum MassOperator<'a> {
    Identity,
    Matrix(&'a DenseMatrix),
}

impl MassOperator<'_> {
    fn entry(&self, i: usize, j: usize) -> f64 {
        match self {
            MassOperator::Identity => f64::from(u8::from(i == j)),
            MassOperator::Matrix(m) => m[(i, j)],
        }
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        match self {
            MassOperator::Identity => v.to_vec(),
            MassOperator::Matrix(m) => m.matvec(v),
        }
    }

    fn check(&self, dim: usize) -> Result<(), SlabError> {
        if let MassOperator::Matrix(m) = self {
            expect_len("mass operator rows", dim, m.rows())?;
            expect_len("mass operator cols", dim, m.cols())?;
        }
        Ok(())
    }
}

/// Block matrix for the transformed system, `blockdiag(M¹+M⁴) + [B_ij]`.
pub fn assemble_block_a(
    tm: &TimeMatrices,
    blocks: &NonlinearBlocks,
    gamma: f64,
) -> Result<DenseMatrix, SlabError> {
    assemble_block_a_with_mass(tm, blocks, gamma, MassOperator::Identity)
}

/// Block matrix with a general Gram operator `G`:
/// block `(i, j)` is `G_ij (M¹ + M⁴ + 2γM² + γ²(M³ + M⁵)) + M̃³_ij + M̃⁵_ij`.
pub fn assemble_block_a_with_mass(
    tm: &TimeMatrices,
    blocks: &NonlinearBlocks,
    gamma: f64,
    mass: MassOperator<'_>,
) -> Result<DenseMatrix, SlabError> {
    let nt = tm.size();
    let dim = blocks.dim();
    expect_len("temporal block size", nt, blocks.n_time())?;
    mass.check(dim)?;
    let mut linear = tm.m1.clone();
    linear.add_scaled(1.0, &tm.m4);
    linear.add_scaled(2.0 * gamma, &tm.m2);
    linear.add_scaled(gamma * gamma, &tm.m3);
    linear.add_scaled(gamma * gamma, &tm.m5);

    let size = dim * nt;
    let mut a = DenseMatrix::zeros(size, size);
    for i in 0..dim {
        for j in 0..dim {
            let g = mass.entry(i, j);
            for l in 0..nt {
                for jp in 0..nt {
                    a[(i * nt + l, j * nt + jp)] =
                        g * linear[(l, jp)] + blocks.sum_entry(i, j, l, jp);
                }
            }
        }
    }
    Ok(a)
}

/// Right-hand side for the transformed system.
pub fn assemble_rhs(
    basis: &TimeSlabBasis,
    traces: &SlabTraces,
    load: impl FnMut(f64) -> Vec<f64>,
    gamma: f64,
    quad_points: usize,
) -> Result<Vec<f64>, SlabError> {
    assemble_rhs_with_mass(
        basis,
        traces,
        load,
        gamma,
        quad_points,
        MassOperator::Identity,
    )
}

/// `b_m^l = ∫ G_m φ̇^l + (𝔾 ż)_m φ̇^l(t⁺) + γ² (𝔾 z)_m φ^l(t⁺) + (K⁻ z)_m φ^l(t⁺)`,
/// with the load integrated by a `quad_points` Gauss rule on the slab.
pub fn assemble_rhs_with_mass(
    basis: &TimeSlabBasis,
    traces: &SlabTraces,
    mut load: impl FnMut(f64) -> Vec<f64>,
    gamma: f64,
    quad_points: usize,
    mass: MassOperator<'_>,
) -> Result<Vec<f64>, SlabError> {
    let dim = traces.dim();
    let nt = basis.size();
    expect_len("velocity trace", dim, traces.zdot_in.len())?;
    expect_len("stiffness trace", dim, traces.k_in.rows())?;
    mass.check(dim)?;

    let mut b = vec![0.0; dim * nt];
    let slab = basis.slab();
    for (t, w) in gauss_legendre(quad_points).mapped(slab.t_start, slab.t_end) {
        let g = load(t);
        expect_len("load vector", dim, g.len())?;
        let dphi = basis.eval_all(t, 1)?;
        for m in 0..dim {
            for l in 0..nt {
                b[m * nt + l] += w * g[m] * dphi[l];
            }
        }
    }

    let left = basis.eval_all(slab.t_start, 0)?;
    let left_dot = basis.eval_all(slab.t_start, 1)?;
    let velocity = mass.apply(&traces.zdot_in);
    let mut position = mass.apply(&traces.z_in);
    let k_z = traces.k_in.matvec(&traces.z_in);
    for (p, kz) in position.iter_mut().zip(&k_z) {
        *p = gamma * gamma * *p + kz;
    }
    for m in 0..dim {
        for l in 0..nt {
            b[m * nt + l] += velocity[m] * left_dot[l] + position[m] * left[l];
        }
    }
    Ok(b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlabSystem {
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    pub dim: usize,
    pub n_time: usize,
}

impl SlabSystem {
    pub fn new(a: DenseMatrix, b: Vec<f64>, dim: usize, n_time: usize) -> Result<Self, SlabError> {
        expect_len("system rows", dim * n_time, a.rows())?;
        expect_len("system cols", dim * n_time, a.cols())?;
        expect_len("right-hand side", dim * n_time, b.len())?;
        Ok(Self { a, b, dim, n_time })
    }
}

/// Coefficients `α_m^j` of one slab, spatial index major.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabSolution {
    dim: usize,
    n_time: usize,
    coefficients: Vec<f64>,
}

impl SlabSolution {
    pub fn new(dim: usize, n_time: usize, coefficients: Vec<f64>) -> Result<Self, SlabError> {
        expect_len("slab coefficients", dim * n_time, coefficients.len())?;
        Ok(Self {
            dim,
            n_time,
            coefficients,
        })
    }

    pub fn zero(dim: usize, n_time: usize) -> Self {
        Self {
            dim,
            n_time,
            coefficients: vec![0.0; dim * n_time],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_time(&self) -> usize {
        self.n_time
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `α_m^j` for 0-based spatial `m` and 1-based temporal `j`.
    pub fn alpha(&self, m: usize, j: usize) -> f64 {
        self.coefficients[m * self.n_time + j - 1]
    }

    /// The spatial vector multiplying `φ^j` (1-based `j`).
    pub fn temporal_mode(&self, j: usize) -> Vec<f64> {
        (0..self.dim).map(|m| self.alpha(m, j)).collect()
    }

    /// `Σ_j α^j d^deriv φ^j(t)`, the slab polynomial evaluated at `t`.
    pub fn value(
        &self,
        basis: &TimeSlabBasis,
        t: f64,
        deriv: usize,
    ) -> Result<Vec<f64>, SlabError> {
        expect_len("temporal basis", self.n_time, basis.size())?;
        let phi = basis.eval_all(t, deriv)?;
        Ok(self
            .coefficients
            .chunks(self.n_time)
            .map(|c| c.iter().zip(&phi).map(|(a, p)| a * p).sum())
            .collect())
    }
}

/// Solves the slab system by LU factorisation.
///
/// Rows are equilibrated to unit max-norm before factorisation, so the answer
/// does not depend on how individual equations are scaled (the initial-value
/// row carries a factor `γ²`).
pub fn solve_slab(system: &SlabSystem) -> Result<SlabSolution, SlabError> {
    let mut a = system.a.clone();
    let mut b = system.b.clone();
    for (i, bi) in b.iter_mut().enumerate() {
        let scale = max_abs(a.row(i));
        if scale == 0.0 {
            return Err(LinalgError::SingularMatrix {
                column: i,
                pivot: 0.0,
            }
            .into());
        }
        for j in 0..a.cols() {
            a[(i, j)] /= scale;
        }
        *bi /= scale;
    }
    let z = lu_solve(&a, &b)?;
    SlabSolution::new(system.dim, system.n_time, z)
}
