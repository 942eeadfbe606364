//! Small dense linear algebra: a row-major matrix type, LU with partial
//! pivoting, and functions of SPD matrices via cyclic Jacobi.

use std::ops::{Index, IndexMut};

use thiserror::Error;

/// Pivots with magnitude at or below this value mark the matrix as singular.
pub const PIVOT_THRESHOLD: f64 = 1e-14;

/// Relative eigenvalue floor below which a symmetric matrix is not treated as SPD.
pub const SPD_EIGENVALUE_FLOOR: f64 = 1e-13;

const SYMMETRY_TOLERANCE: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is singular: pivot {pivot:e} in column {column}")]
    SingularMatrix { column: usize, pivot: f64 },
    #[error("matrix is not symmetric positive definite (eigenvalue {eigenvalue:e})")]
    NotSpd { eigenvalue: f64 },
    #[error("matrix is not symmetric (asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
}

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row slices. Panics if the rows are ragged.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flat_map(|r| r.iter().copied()).collect(),
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, factor: f64, other: &DenseMatrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += factor * b;
        }
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                // stiffness-type operands are banded; skip the structural zeros
                if a == 0.0 {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest entry of `|self - selfᵀ|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    fn ensure_square(&self) -> Result<(), LinalgError> {
        if self.is_square() {
            Ok(())
        } else {
            Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// LU factorisation with partial pivoting, `P·A = L·U` stored in place.
#[derive(Debug, Clone)]
pub struct LuDecomposition {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl LuDecomposition {
    pub fn new(a: &DenseMatrix) -> Result<Self, LinalgError> {
        a.ensure_square()?;
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let (pivot_row, pivot) = (col..n)
                .map(|r| (r, lu[(r, col)]))
                .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
                .expect("non-empty pivot range");
            if pivot.abs() <= PIVOT_THRESHOLD {
                return Err(LinalgError::SingularMatrix { column: col, pivot });
            }
            if pivot_row != col {
                perm.swap(pivot_row, col);
                for j in 0..n {
                    lu.data.swap(pivot_row * n + j, col * n + j);
                }
            }
            for r in (col + 1)..n {
                let factor = lu[(r, col)] / pivot;
                if factor == 0.0 {
                    continue;
                }
                lu[(r, col)] = factor;
                for j in (col + 1)..n {
                    let u = lu.data[col * n + j];
                    lu.data[r * n + j] -= factor * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let n = self.lu.rows;
        if b.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let s: f64 = row[..i].iter().zip(&x[..i]).map(|(l, y)| l * y).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: f64 = row[i + 1..]
                .iter()
                .zip(&x[i + 1..])
                .map(|(u, y)| u * y)
                .sum();
            x[i] = (x[i] - s) / row[i];
        }
        Ok(x)
    }
}

/// Solves `a·x = b` by partial-pivot Gaussian elimination.
pub fn lu_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    LuDecomposition::new(a)?.solve(b)
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns the eigenvalues and a matrix whose columns are the matching
/// orthonormal eigenvectors. Sweeps stop once the off-diagonal Frobenius norm
/// drops below `1e-14·‖a‖_F`.
pub fn symmetric_eigen(a: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix), LinalgError> {
    a.ensure_square()?;
    let asymmetry = a.asymmetry();
    if asymmetry > SYMMETRY_TOLERANCE * (1.0 + a.max_abs()) {
        return Err(LinalgError::NotSymmetric { asymmetry });
    }
    let n = a.rows;
    let mut m = DenseMatrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let mut v = DenseMatrix::identity(n);
    let stop = 1e-14 * m.frobenius_norm();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let eigenvalues = (0..n).map(|i| m[(i, i)]).collect();
    Ok((eigenvalues, v))
}

fn spd_function(a: &DenseMatrix, f: impl Fn(f64) -> f64) -> Result<DenseMatrix, LinalgError> {
    let (lambda, v) = symmetric_eigen(a)?;
    let largest = lambda.iter().fold(0.0f64, |m, &l| m.max(l));
    if let Some(&bad) = lambda
        .iter()
        .find(|&&l| l <= SPD_EIGENVALUE_FLOOR * largest || largest <= 0.0)
    {
        return Err(LinalgError::NotSpd { eigenvalue: bad });
    }
    let n = a.rows;
    let fl: Vec<f64> = lambda.iter().map(|&l| f(l)).collect();
    let mut out = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let s: f64 = (0..n).map(|k| v[(i, k)] * fl[k] * v[(j, k)]).sum();
            out[(i, j)] = s;
            out[(j, i)] = s;
        }
    }
    Ok(out)
}

/// Symmetric square root `V·diag(√λ)·Vᵀ` of an SPD matrix.
pub fn spd_sqrt(a: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    spd_function(a, f64::sqrt)
}

/// Symmetric inverse square root `V·diag(1/√λ)·Vᵀ` of an SPD matrix.
pub fn spd_inv_sqrt(a: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    spd_function(a, |l| 1.0 / l.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(rng: &mut impl Rng, n: usize) -> DenseMatrix {
        let b = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let mut a = b.matmul(&b.transpose());
        a.add_scaled(n as f64 * 0.1, &DenseMatrix::identity(n));
        a
    }

    fn p1_mass(n_elements: usize) -> DenseMatrix {
        let h = 1.0 / n_elements as f64;
        let d = n_elements - 1;
        DenseMatrix::from_fn(d, d, |i, j| match i.abs_diff(j) {
            0 => 2.0 * h / 3.0,
            1 => h / 6.0,
            _ => 0.0,
        })
    }

    #[test]
    fn lu_identity_and_diagonal() {
        let x = lu_solve(&DenseMatrix::identity(3), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0]);
        let a = DenseMatrix::from_rows(&[&[2.0, 0.0], &[0.0, 4.0]]);
        let x = lu_solve(&a, &[2.0, 8.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0]);
    }

    #[test]
    fn lu_recovers_known_solution_of_spd_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_spd(&mut rng, 10);
        let x_star: Vec<f64> = (0..10).map(|i| (i as f64 * 0.7).sin() + 0.5).collect();
        let b = a.matvec(&x_star);
        let x = lu_solve(&a, &b).unwrap();
        for (xi, si) in x.iter().zip(&x_star) {
            assert!((xi - si).abs() < 1e-9);
        }
    }

    #[test]
    fn lu_detects_singular_matrix() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(
            lu_solve(&a, &[1.0, 1.0]),
            Err(LinalgError::SingularMatrix { column: 1, .. })
        ));
        assert!(matches!(
            lu_solve(&DenseMatrix::zeros(3, 3), &[0.0; 3]),
            Err(LinalgError::SingularMatrix { column: 0, .. })
        ));
    }

    #[test]
    fn lu_rejects_bad_shapes() {
        assert!(matches!(
            lu_solve(&DenseMatrix::zeros(2, 3), &[0.0; 2]),
            Err(LinalgError::NotSquare { .. })
        ));
        assert!(matches!(
            lu_solve(&DenseMatrix::identity(2), &[0.0; 3]),
            Err(LinalgError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn lu_residual_contract_on_random_well_conditioned_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..1000 {
            let n = 2 + trial % 19;
            // diagonally dominant keeps the condition number modest
            let mut a = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            for i in 0..n {
                a[(i, i)] += n as f64 * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            }
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-100.0..100.0)).collect();
            let x = lu_solve(&a, &b).unwrap();
            let r: Vec<f64> = a
                .matvec(&x)
                .iter()
                .zip(&b)
                .map(|(ax, bi)| ax - bi)
                .collect();
            assert!(max_abs(&r) <= 1e-10 * (1.0 + max_abs(&b)), "trial {trial}");
        }
    }

    #[test]
    fn sqrt_of_diagonal_and_identity() {
        let s = spd_sqrt(&DenseMatrix::from_diagonal(&[4.0, 9.0])).unwrap();
        assert!((s[(0, 0)] - 2.0).abs() < 1e-14);
        assert!((s[(1, 1)] - 3.0).abs() < 1e-14);
        assert_eq!(s[(0, 1)], 0.0);
        let i = spd_sqrt(&DenseMatrix::identity(4)).unwrap();
        assert_eq!(i, DenseMatrix::identity(4));
        let inv = spd_inv_sqrt(&DenseMatrix::from_diagonal(&[4.0])).unwrap();
        assert!((inv[(0, 0)] - 0.5).abs() < 1e-15);
        assert_eq!(
            spd_inv_sqrt(&DenseMatrix::identity(3)).unwrap(),
            DenseMatrix::identity(3)
        );
    }

    #[test]
    fn sqrt_of_p1_mass_matrix_squares_back() {
        let m = p1_mass(4);
        let s = spd_sqrt(&m).unwrap();
        let mut diff = s.matmul(&s);
        diff.add_scaled(-1.0, &m);
        assert!(diff.max_abs() <= 1e-10 * m.max_abs());
        assert!(s.asymmetry() < 1e-15);
    }

    #[test]
    fn inverse_sqrt_composes_to_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1, 3, 8, 20] {
            let a = random_spd(&mut rng, n);
            let s = spd_sqrt(&a).unwrap();
            let si = spd_inv_sqrt(&a).unwrap();
            let mut e = si.matmul(&s);
            e.add_scaled(-1.0, &DenseMatrix::identity(n));
            assert!(e.max_abs() < 1e-9);
            let mut e = si.matmul(&a).matmul(&si);
            e.add_scaled(-1.0, &DenseMatrix::identity(n));
            assert!(e.max_abs() < 1e-9);
        }
    }

    #[test]
    fn not_spd_and_not_symmetric_are_rejected() {
        let indefinite = DenseMatrix::from_diagonal(&[1.0, -1.0]);
        assert!(matches!(
            spd_sqrt(&indefinite),
            Err(LinalgError::NotSpd { .. })
        ));
        let semidefinite = DenseMatrix::from_diagonal(&[1.0, 0.0]);
        assert!(matches!(
            spd_inv_sqrt(&semidefinite),
            Err(LinalgError::NotSpd { .. })
        ));
        let skew = DenseMatrix::from_rows(&[&[1.0, 0.5], &[0.0, 1.0]]);
        assert!(matches!(
            spd_sqrt(&skew),
            Err(LinalgError::NotSymmetric { .. })
        ));
    }

    #[test]
    fn jacobi_reconstructs_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_spd(&mut rng, 12);
        let (lambda, v) = symmetric_eigen(&a).unwrap();
        let back = v
            .matmul(&DenseMatrix::from_diagonal(&lambda))
            .matmul(&v.transpose());
        let mut diff = back;
        diff.add_scaled(-1.0, &a);
        assert!(diff.max_abs() < 1e-12 * a.max_abs());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn sqrt_squares_back_and_commutes(seed in any::<u64>(), n in 1usize..16) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = random_spd(&mut rng, n);
                let s = spd_sqrt(&a).unwrap();
                let mut sq = s.matmul(&s);
                sq.add_scaled(-1.0, &a);
                prop_assert!(sq.max_abs() <= 1e-10 * a.max_abs());
                let mut comm = s.matmul(&a);
                comm.add_scaled(-1.0, &a.matmul(&s));
                prop_assert!(comm.max_abs() <= 1e-9);
                prop_assert!(s.asymmetry() <= 1e-12);
            }
        }
    }
}
