//! Shifted Legendre polynomials on a time slab `(t_{n-1}, t_n]`.
//!
//! Basis function `j` (1-based, `1..=q+1`) is the Legendre polynomial
//! `P_{j-1}` composed with the affine map `s = 2(t − t_{n-1})/k − 1`, so every
//! function has value 1 at the right end of the slab and `(−1)^{j−1}` at the
//! left end, and `∫ φ^i φ^j dt = δ_ij k/(2i − 1)`.

use thiserror::Error;

use crate::quadrature::{gauss_legendre, QuadratureRule};

/// Maximum number of factors accepted by [`TimeSlabBasis::product_integral`].
pub const MAX_FACTORS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("temporal degree {0} is below the minimum of 2")]
    DegreeTooLow(usize),
    #[error("basis index {index} outside 1..={size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("derivative order {0} not supported (0, 1 or 2)")]
    UnsupportedDerivative(usize),
    #[error("product integral takes 1..={MAX_FACTORS} factors, got {0}")]
    TooManyFactors(usize),
    #[error("invalid slab [{t_start}, {t_end}]")]
    InvalidSlab { t_start: f64, t_end: f64 },
}

/// One interval `I_n = (t_start, t_end]` of the time partition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSlab {
    pub index: usize,
    pub t_start: f64,
    pub t_end: f64,
}

impl TimeSlab {
    pub fn new(index: usize, t_start: f64, t_end: f64) -> Result<Self, BasisError> {
        if !(t_end > t_start) || !t_start.is_finite() || !t_end.is_finite() {
            return Err(BasisError::InvalidSlab { t_start, t_end });
        }
        Ok(Self {
            index,
            t_start,
            t_end,
        })
    }

    pub fn length(&self) -> f64 {
        self.t_end - self.t_start
    }
}

#[derive(Debug, Clone)]
pub struct TimeSlabBasis {
    slab: TimeSlab,
    degree: usize,
    rule: QuadratureRule,
}

/// Legendre `P_0..=P_{n-1}` and their first two derivatives at `s`.
fn legendre_table(n: usize, s: f64) -> [Vec<f64>; 3] {
    let mut p = vec![0.0; n];
    let mut dp = vec![0.0; n];
    let mut ddp = vec![0.0; n];
    p[0] = 1.0;
    if n > 1 {
        p[1] = s;
        dp[1] = 1.0;
    }
    for m in 1..n.saturating_sub(1) {
        let mf = m as f64;
        p[m + 1] = ((2.0 * mf + 1.0) * s * p[m] - mf * p[m - 1]) / (mf + 1.0);
        dp[m + 1] = dp[m - 1] + (2.0 * mf + 1.0) * p[m];
        ddp[m + 1] = ddp[m - 1] + (2.0 * mf + 1.0) * dp[m];
    }
    [p, dp, ddp]
}

impl TimeSlabBasis {
    pub fn new(slab: TimeSlab, degree: usize) -> Result<Self, BasisError> {
        if degree < 2 {
            return Err(BasisError::DegreeTooLow(degree));
        }
        Ok(Self {
            slab,
            degree,
            // ⌈(4q+1)/2⌉ + 1 points integrate any degree-4q product exactly
            rule: gauss_legendre(2 * degree + 2),
        })
    }

    pub fn slab(&self) -> &TimeSlab {
        &self.slab
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of basis functions, `q + 1`.
    pub fn size(&self) -> usize {
        self.degree + 1
    }

    pub fn k(&self) -> f64 {
        self.slab.length()
    }

    fn reference_coordinate(&self, t: f64) -> f64 {
        2.0 * (t - self.slab.t_start) / self.k() - 1.0
    }

    /// Values (or derivatives) of all basis functions at `t`, indexed `0..=q`.
    ///
    /// `t` is not range-checked, so this also evaluates the polynomial
    /// extension outside the slab.
    pub fn eval_all(&self, t: f64, deriv: usize) -> Result<Vec<f64>, BasisError> {
        if deriv > 2 {
            return Err(BasisError::UnsupportedDerivative(deriv));
        }
        let table = legendre_table(self.size(), self.reference_coordinate(t));
        let scale = (2.0 / self.k()).powi(deriv as i32);
        Ok(table[deriv].iter().map(|v| v * scale).collect())
    }

    /// `φ^j`, `φ̇^j` or `φ̈^j` at `t` for 1-based `j`.
    pub fn eval(&self, j: usize, t: f64, deriv: usize) -> Result<f64, BasisError> {
        self.check_index(j)?;
        Ok(self.eval_all(t, deriv)?[j - 1])
    }

    fn check_index(&self, j: usize) -> Result<(), BasisError> {
        if j == 0 || j > self.size() {
            return Err(BasisError::IndexOutOfRange {
                index: j,
                size: self.size(),
            });
        }
        Ok(())
    }

    /// Gauss points of the slab (mapped) with their weights.
    pub fn quadrature_points(&self) -> Vec<(f64, f64)> {
        self.rule
            .mapped(self.slab.t_start, self.slab.t_end)
            .collect()
    }

    /// `∫_{I_n} ∏ d^{deriv}/dt φ^{j}` over the given `(j, deriv)` factors.
    pub fn product_integral(&self, factors: &[(usize, usize)]) -> Result<f64, BasisError> {
        if factors.is_empty() || factors.len() > MAX_FACTORS {
            return Err(BasisError::TooManyFactors(factors.len()));
        }
        for &(j, d) in factors {
            self.check_index(j)?;
            if d > 2 {
                return Err(BasisError::UnsupportedDerivative(d));
            }
        }
        // canonical factor order makes the result exactly permutation invariant
        let mut sorted = factors.to_vec();
        sorted.sort_unstable();
        let mut total = 0.0;
        for (t, w) in self.rule.mapped(self.slab.t_start, self.slab.t_end) {
            let table = legendre_table(self.size(), self.reference_coordinate(t));
            let mut prod = w;
            for &(j, d) in &sorted {
                prod *= table[d][j - 1] * (2.0 / self.k()).powi(d as i32);
            }
            total += prod;
        }
        Ok(total)
    }
}
