//! Continuous Lagrange finite elements of degree `p` on a uniform mesh of
//! `(0, 1)` with homogeneous Dirichlet conditions.
//!
//! Boundary nodes are dropped from the numbering, so every vector and matrix
//! here is indexed by the `n_elements·p − 1` interior degrees of freedom.

use thiserror::Error;

use crate::linalg::DenseMatrix;
use crate::quadrature::{gauss_legendre, QuadratureRule};

pub const MAX_DEGREE: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("polynomial degree {0} outside 1..={MAX_DEGREE}")]
    InvalidDegree(usize),
    #[error("need at least 2 elements, got {0}")]
    TooFewElements(usize),
    #[error("function lives on a different space ({found_elements} x P{found_degree}, expected {expected_elements} x P{expected_degree})")]
    SpaceMismatch {
        expected_elements: usize,
        expected_degree: usize,
        found_elements: usize,
        found_degree: usize,
    },
    #[error("coefficient vector has length {found}, expected {expected}")]
    WrongLength { expected: usize, found: usize },
    #[error("point {0} lies outside [0, 1]")]
    OutOfDomain(f64),
}

/// Lagrange basis on `[0, 1]` with `p + 1` equispaced nodes.
#[derive(Debug, Clone)]
struct ReferenceElement {
    nodes: Vec<f64>,
}

impl ReferenceElement {
    fn new(p: usize) -> Self {
        Self {
            nodes: (0..=p).map(|a| a as f64 / p as f64).collect(),
        }
    }

    fn values(&self, xi: f64) -> Vec<f64> {
        let n = &self.nodes;
        (0..n.len())
            .map(|a| {
                n.iter()
                    .enumerate()
                    .filter(|&(b, _)| b != a)
                    .map(|(_, &xb)| (xi - xb) / (n[a] - xb))
                    .product()
            })
            .collect()
    }

    /// Derivatives with respect to the reference coordinate.
    fn derivatives(&self, xi: f64) -> Vec<f64> {
        let n = &self.nodes;
        (0..n.len())
            .map(|a| {
                let mut sum = 0.0;
                for c in (0..n.len()).filter(|&c| c != a) {
                    let mut term = 1.0 / (n[a] - n[c]);
                    for b in (0..n.len()).filter(|&b| b != a && b != c) {
                        term *= (xi - n[b]) / (n[a] - n[b]);
                    }
                    sum += term;
                }
                sum
            })
            .collect()
    }
}

/// Basis values and physical-coordinate gradients tabulated at a quadrature rule.
struct Tabulation {
    rule: QuadratureRule,
    values: Vec<Vec<f64>>,
    gradients: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct FemSpace1D {
    n_elements: usize,
    degree: usize,
    h: f64,
    nodes: Vec<f64>,
    connectivity: Vec<Vec<Option<usize>>>,
    reference: ReferenceElement,
}

impl FemSpace1D {
    pub fn new(n_elements: usize, degree: usize) -> Result<Self, SpaceError> {
        if !(1..=MAX_DEGREE).contains(&degree) {
            return Err(SpaceError::InvalidDegree(degree));
        }
        if n_elements < 2 {
            return Err(SpaceError::TooFewElements(n_elements));
        }
        let last = n_elements * degree;
        let nodes = (1..last).map(|g| g as f64 / last as f64).collect();
        let connectivity = (0..n_elements)
            .map(|e| {
                (0..=degree)
                    .map(|a| {
                        let g = e * degree + a;
                        (g != 0 && g != last).then(|| g - 1)
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            n_elements,
            degree,
            h: 1.0 / n_elements as f64,
            nodes,
            connectivity,
            reference: ReferenceElement::new(degree),
        })
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of interior degrees of freedom, `n_elements·p − 1`.
    pub fn dof_count(&self) -> usize {
        self.nodes.len()
    }

    /// Coordinates of the interior Lagrange nodes, in dof order.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Local-to-global map of element `e`; `None` marks an eliminated boundary node.
    pub fn element_dofs(&self, e: usize) -> &[Option<usize>] {
        &self.connectivity[e]
    }

    fn element_start(&self, e: usize) -> f64 {
        e as f64 / self.n_elements as f64
    }

    fn tabulate(&self, n_points: usize) -> Tabulation {
        let rule = gauss_legendre(n_points);
        let values = rule
            .nodes()
            .iter()
            .map(|&x| self.reference.values(0.5 * (x + 1.0)))
            .collect();
        let gradients = rule
            .nodes()
            .iter()
            .map(|&x| {
                self.reference
                    .derivatives(0.5 * (x + 1.0))
                    .into_iter()
                    .map(|d| d / self.h)
                    .collect()
            })
            .collect();
        Tabulation {
            rule,
            values,
            gradients,
        }
    }

    fn check(&self, w: &SpatialFunction) -> Result<(), SpaceError> {
        if w.n_elements != self.n_elements || w.degree != self.degree {
            return Err(SpaceError::SpaceMismatch {
                expected_elements: self.n_elements,
                expected_degree: self.degree,
                found_elements: w.n_elements,
                found_degree: w.degree,
            });
        }
        Ok(())
    }

    /// Gradient of `w` at each tabulated point of element `e`.
    fn element_gradients(&self, tab: &Tabulation, e: usize, w: &SpatialFunction) -> Vec<f64> {
        let local = self.local_coefficients(e, &w.coefficients);
        tab.gradients
            .iter()
            .map(|g| g.iter().zip(&local).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn local_coefficients(&self, e: usize, coefficients: &[f64]) -> Vec<f64> {
        self.connectivity[e]
            .iter()
            .map(|d| d.map_or(0.0, |i| coefficients[i]))
            .collect()
    }

    /// Assembles `∫ ρ(x) ψ_i' ψ_j' dx` where `weight(e, k)` gives ρ at point `k` of element `e`.
    fn assemble_gradient_form(
        &self,
        tab: &Tabulation,
        mut weight: impl FnMut(usize, usize) -> f64,
    ) -> DenseMatrix {
        let n = self.dof_count();
        let mut out = DenseMatrix::zeros(n, n);
        let jac = 0.5 * self.h;
        for e in 0..self.n_elements {
            let dofs = &self.connectivity[e];
            for (k, (&w, grads)) in tab.rule.weights().iter().zip(&tab.gradients).enumerate() {
                let rho = weight(e, k) * w * jac;
                if rho == 0.0 {
                    continue;
                }
                for (a, da) in dofs.iter().enumerate() {
                    let Some(i) = *da else { continue };
                    for (b, db) in dofs.iter().enumerate() {
                        let Some(j) = *db else { continue };
                        out[(i, j)] += rho * (grads[a] * grads[b]);
                    }
                }
            }
        }
        out
    }

    /// Mass matrix `∫ ψ_i ψ_j dx`, exact with `p + 2` Gauss points per element.
    pub fn assemble_mass(&self) -> DenseMatrix {
        let tab = self.tabulate(self.degree + 2);
        let n = self.dof_count();
        let mut out = DenseMatrix::zeros(n, n);
        let jac = 0.5 * self.h;
        for dofs in &self.connectivity {
            for (&w, vals) in tab.rule.weights().iter().zip(&tab.values) {
                for (a, da) in dofs.iter().enumerate() {
                    let Some(i) = *da else { continue };
                    for (b, db) in dofs.iter().enumerate() {
                        let Some(j) = *db else { continue };
                        out[(i, j)] += w * jac * (vals[a] * vals[b]);
                    }
                }
            }
        }
        out
    }

    /// Unweighted stiffness matrix `∫ ψ_i' ψ_j' dx`.
    pub fn assemble_stiffness(&self) -> DenseMatrix {
        let tab = self.tabulate(self.degree + 1);
        self.assemble_gradient_form(&tab, |_, _| 1.0)
    }

    /// `∫ (w')² ψ_i' ψ_j' dx`.
    pub fn assemble_weighted_stiffness(
        &self,
        w: &SpatialFunction,
    ) -> Result<DenseMatrix, SpaceError> {
        self.assemble_cross_stiffness(w, w)
    }

    /// `∫ wa' wb' ψ_i' ψ_j' dx`, integrated with `2p + 1` points per element.
    pub fn assemble_cross_stiffness(
        &self,
        wa: &SpatialFunction,
        wb: &SpatialFunction,
    ) -> Result<DenseMatrix, SpaceError> {
        self.check(wa)?;
        self.check(wb)?;
        let tab = self.tabulate(2 * self.degree + 1);
        let ga: Vec<Vec<f64>> = (0..self.n_elements)
            .map(|e| self.element_gradients(&tab, e, wa))
            .collect();
        let gb: Vec<Vec<f64>> = (0..self.n_elements)
            .map(|e| self.element_gradients(&tab, e, wb))
            .collect();
        Ok(self.assemble_gradient_form(&tab, |e, k| ga[e][k] * gb[e][k]))
    }

    /// Load vector `∫ f ψ_i dx` with `quad_points` Gauss points per element.
    pub fn assemble_load(&self, f: impl Fn(f64) -> f64, quad_points: usize) -> Vec<f64> {
        let tab = self.tabulate(quad_points);
        let mut out = vec![0.0; self.dof_count()];
        for (e, dofs) in self.connectivity.iter().enumerate() {
            let x0 = self.element_start(e);
            for (k, (x, w)) in tab.rule.mapped(x0, x0 + self.h).enumerate() {
                let fx = f(x) * w;
                for (a, d) in dofs.iter().enumerate() {
                    if let Some(i) = *d {
                        out[i] += fx * tab.values[k][a];
                    }
                }
            }
        }
        out
    }

    pub fn interpolate(&self, g: impl Fn(f64) -> f64) -> SpatialFunction {
        SpatialFunction {
            n_elements: self.n_elements,
            degree: self.degree,
            coefficients: self.nodes.iter().map(|&x| g(x)).collect(),
        }
    }

    /// Wraps a nodal coefficient vector as a function on this space.
    pub fn function(&self, coefficients: Vec<f64>) -> Result<SpatialFunction, SpaceError> {
        if coefficients.len() != self.dof_count() {
            return Err(SpaceError::WrongLength {
                expected: self.dof_count(),
                found: coefficients.len(),
            });
        }
        Ok(SpatialFunction {
            n_elements: self.n_elements,
            degree: self.degree,
            coefficients,
        })
    }

    pub fn zero_function(&self) -> SpatialFunction {
        SpatialFunction {
            n_elements: self.n_elements,
            degree: self.degree,
            coefficients: vec![0.0; self.dof_count()],
        }
    }

    /// `‖w − g‖_{L²(0,1)}` with `quad_points` Gauss points per element.
    pub fn l2_norm_of_difference(
        &self,
        w: &SpatialFunction,
        g: impl Fn(f64) -> f64,
        quad_points: usize,
    ) -> Result<f64, SpaceError> {
        self.check(w)?;
        let tab = self.tabulate(quad_points);
        let mut sum = 0.0;
        for e in 0..self.n_elements {
            let local = self.local_coefficients(e, &w.coefficients);
            let x0 = self.element_start(e);
            for (k, (x, wt)) in tab.rule.mapped(x0, x0 + self.h).enumerate() {
                let wh: f64 = tab.values[k].iter().zip(&local).map(|(a, b)| a * b).sum();
                let d = wh - g(x);
                sum += wt * d * d;
            }
        }
        Ok(sum.sqrt())
    }

    /// `∫ (w')⁴ dx`, the quartic part of the stored energy.
    pub fn quartic_gradient_integral(&self, w: &SpatialFunction) -> Result<f64, SpaceError> {
        self.check(w)?;
        let tab = self.tabulate(2 * self.degree + 1);
        let jac = 0.5 * self.h;
        let mut sum = 0.0;
        for e in 0..self.n_elements {
            let g = self.element_gradients(&tab, e, w);
            sum += g
                .iter()
                .zip(tab.rule.weights())
                .map(|(d, wt)| wt * jac * d.powi(4))
                .sum::<f64>();
        }
        Ok(sum)
    }

    pub fn evaluate(&self, w: &SpatialFunction, x: f64) -> Result<f64, SpaceError> {
        self.check(w)?;
        if !(0.0..=1.0).contains(&x) {
            return Err(SpaceError::OutOfDomain(x));
        }
        let e = ((x * self.n_elements as f64).floor() as usize).min(self.n_elements - 1);
        let xi = (x - self.element_start(e)) / self.h;
        let local = self.local_coefficients(e, &w.coefficients);
        Ok(self
            .reference
            .values(xi)
            .iter()
            .zip(&local)
            .map(|(a, b)| a * b)
            .sum())
    }
}

/// A finite element function given by its values at the interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialFunction {
    n_elements: usize,
    degree: usize,
    coefficients: Vec<f64>,
}

impl SpatialFunction {
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.coefficients
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_function(space: &FemSpace1D, rng: &mut impl Rng) -> SpatialFunction {
        space
            .function(
                (0..space.dof_count())
                    .map(|_| rng.gen_range(-1.0..1.0))
                    .collect(),
            )
            .unwrap()
    }

    #[test]
    fn dof_counts_and_nodes() {
        let s = FemSpace1D::new(4, 1).unwrap();
        assert_eq!(s.dof_count(), 3);
        assert_eq!(s.nodes(), &[0.25, 0.5, 0.75]);
        assert_eq!(FemSpace1D::new(4, 2).unwrap().dof_count(), 7);
        assert_eq!(FemSpace1D::new(16, 4).unwrap().dof_count(), 63);
        let s = FemSpace1D::new(5, 3).unwrap();
        assert!(s.nodes().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(s.element_dofs(0), &[None, Some(0), Some(1), Some(2)]);
        assert_eq!(s.element_dofs(4), &[Some(11), Some(12), Some(13), None]);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            FemSpace1D::new(4, 0).unwrap_err(),
            SpaceError::InvalidDegree(0)
        );
        assert_eq!(
            FemSpace1D::new(4, 9).unwrap_err(),
            SpaceError::InvalidDegree(9)
        );
        assert_eq!(
            FemSpace1D::new(1, 2).unwrap_err(),
            SpaceError::TooFewElements(1)
        );
    }

    #[test]
    fn p1_mass_matches_hat_function_integrals() {
        let s = FemSpace1D::new(4, 1).unwrap();
        let m = s.assemble_mass();
        for i in 0..3 {
            assert!((m[(i, i)] - 1.0 / 6.0).abs() < 1e-15);
        }
        assert!((m[(0, 1)] - 1.0 / 24.0).abs() < 1e-15);
        assert!((m[(1, 2)] - 1.0 / 24.0).abs() < 1e-15);
        assert_eq!(m[(0, 2)], 0.0);
    }

    #[test]
    fn mass_is_exactly_symmetric_and_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for p in 1..=4 {
            let s = FemSpace1D::new(6, p).unwrap();
            let m = s.assemble_mass();
            assert_eq!(m, m.transpose());
            for _ in 0..100 {
                let x = random_function(&s, &mut rng).into_coefficients();
                let mx = m.matvec(&x);
                assert!(x.iter().zip(&mx).map(|(a, b)| a * b).sum::<f64>() > 0.0);
            }
        }
    }

    #[test]
    fn mass_is_spd_on_test_grid() {
        for n in 2..=32 {
            for p in 1..=4 {
                let m = FemSpace1D::new(n, p).unwrap().assemble_mass();
                assert!(crate::linalg::spd_sqrt(&m).is_ok(), "n={n} p={p}");
            }
        }
    }

    #[test]
    fn mass_reproduces_integral_of_interpolated_products() {
        // ∫ (x(1-x))² dx = 1/30, exact because the quadratic is in the P2 space
        let s = FemSpace1D::new(3, 2).unwrap();
        let u = s.interpolate(|x| x * (1.0 - x));
        let m = s.assemble_mass();
        let mu = m.matvec(u.coefficients());
        let v: f64 = u.coefficients().iter().zip(&mu).map(|(a, b)| a * b).sum();
        assert!((v - 1.0 / 30.0).abs() < 1e-14);
    }

    #[test]
    fn weighted_stiffness_of_zero_weight_vanishes() {
        let s = FemSpace1D::new(5, 3).unwrap();
        let k = s.assemble_weighted_stiffness(&s.zero_function()).unwrap();
        assert_eq!(k.max_abs(), 0.0);
    }

    #[test]
    fn weighted_stiffness_with_unit_gradient_is_plain_stiffness() {
        let n = 8;
        let s = FemSpace1D::new(n, 1).unwrap();
        let h = s.h();
        let w = s.interpolate(|x| x);
        let k = s.assemble_weighted_stiffness(&w).unwrap();
        assert_eq!(k, k.transpose());
        // every element but the last one carries w' = 1
        for i in 0..(n - 2) {
            for j in 0..(n - 2) {
                let expected = match i.abs_diff(j) {
                    0 => 2.0 / h,
                    1 => -1.0 / h,
                    _ => 0.0,
                };
                assert!((k[(i, j)] - expected).abs() < 1e-12, "({i},{j})");
            }
        }
        // last element drops from (n-1)h to 0, so w' = -(n-1) there
        let last = n - 2;
        let slope2 = ((n - 1) * (n - 1)) as f64;
        assert!((k[(last, last)] - (1.0 + slope2) / h).abs() < 1e-10);
        assert!((k[(last - 1, last)] + 1.0 / h).abs() < 1e-12);
        let plain = s.assemble_stiffness();
        assert!((plain[(last, last)] - 2.0 / h).abs() < 1e-12);
    }

    #[test]
    fn cross_stiffness_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = FemSpace1D::new(5, 2).unwrap();
        let wa = random_function(&s, &mut rng);
        let wb = random_function(&s, &mut rng);
        let wc = random_function(&s, &mut rng);
        assert_eq!(
            s.assemble_cross_stiffness(&s.zero_function(), &wb)
                .unwrap()
                .max_abs(),
            0.0
        );
        assert_eq!(
            s.assemble_cross_stiffness(&wa, &wa).unwrap(),
            s.assemble_weighted_stiffness(&wa).unwrap()
        );
        let sum = s
            .function(
                wa.coefficients()
                    .iter()
                    .zip(wc.coefficients())
                    .map(|(a, c)| a + c)
                    .collect(),
            )
            .unwrap();
        let lhs = s.assemble_cross_stiffness(&sum, &wb).unwrap();
        let mut rhs = s.assemble_cross_stiffness(&wa, &wb).unwrap();
        rhs.add_scaled(1.0, &s.assemble_cross_stiffness(&wc, &wb).unwrap());
        let mut d = lhs;
        d.add_scaled(-1.0, &rhs);
        assert!(d.max_abs() < 1e-12 * (1.0 + rhs.max_abs()));
        let ab = s.assemble_cross_stiffness(&wa, &wb).unwrap();
        assert_eq!(ab, ab.transpose());
        assert_eq!(ab, s.assemble_cross_stiffness(&wb, &wa).unwrap());
    }

    #[test]
    fn weighted_stiffness_is_positive_semidefinite() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = FemSpace1D::new(6, 3).unwrap();
        let w = random_function(&s, &mut rng);
        let k = s.assemble_weighted_stiffness(&w).unwrap();
        for _ in 0..100 {
            let x = random_function(&s, &mut rng).into_coefficients();
            let kx = k.matvec(&x);
            assert!(x.iter().zip(&kx).map(|(a, b)| a * b).sum::<f64>() >= -1e-12);
        }
    }

    #[test]
    fn mismatched_spaces_are_rejected() {
        let s = FemSpace1D::new(4, 2).unwrap();
        let other = FemSpace1D::new(4, 3).unwrap().zero_function();
        assert!(matches!(
            s.assemble_weighted_stiffness(&other),
            Err(SpaceError::SpaceMismatch { .. })
        ));
        assert!(matches!(
            s.assemble_cross_stiffness(&s.zero_function(), &other),
            Err(SpaceError::SpaceMismatch { .. })
        ));
        assert!(matches!(
            s.function(vec![0.0; 3]),
            Err(SpaceError::WrongLength {
                expected: 7,
                found: 3
            })
        ));
    }

    #[test]
    fn load_vector_cases() {
        let s = FemSpace1D::new(4, 1).unwrap();
        assert!(s.assemble_load(|_| 0.0, 5).iter().all(|&v| v == 0.0));
        for v in s.assemble_load(|_| 1.0, 3) {
            assert!((v - 0.25).abs() < 1e-15);
        }
        // quadrature refinement oracle: 12 points already agree with 40
        let s = FemSpace1D::new(4, 2).unwrap();
        let f = |x: f64| (PI * x).sin();
        let f12 = s.assemble_load(f, 12);
        let f40 = s.assemble_load(f, 40);
        for (a, b) in f12.iter().zip(&f40) {
            assert!((a - b).abs() < 1e-13);
        }
        let f3 = s.assemble_load(f, 3);
        assert!(f3.iter().zip(&f40).any(|(a, b)| (a - b).abs() > 1e-8));
    }

    #[test]
    fn interpolation_and_l2_norms() {
        let s = FemSpace1D::new(4, 1).unwrap();
        assert!(s
            .interpolate(|_| 0.0)
            .coefficients()
            .iter()
            .all(|&c| c == 0.0));
        assert_eq!(s.interpolate(|x| x).coefficients(), &[0.25, 0.5, 0.75]);
        let zero = s.zero_function();
        assert!((s.l2_norm_of_difference(&zero, |_| 1.0, 4).unwrap() - 1.0).abs() < 1e-14);
        let e = s
            .l2_norm_of_difference(&zero, |x| (PI * x).sin(), 10)
            .unwrap();
        assert!((e - 0.5f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn polynomials_of_degree_p_are_reproduced() {
        for p in 1..=4 {
            let s = FemSpace1D::new(5, p).unwrap();
            // vanishes at both ends and has degree p (only zero qualifies for p = 1)
            let g = move |x: f64| {
                if p == 1 {
                    0.0
                } else {
                    x * (1.0 - x) * (x + 0.3).powi(p as i32 - 2)
                }
            };
            let w = s.interpolate(g);
            let e = s.l2_norm_of_difference(&w, g, p + 2).unwrap();
            assert!(e < 1e-13, "p={p}: {e}");
        }
    }

    #[test]
    fn interpolation_error_converges_at_rate_p_plus_one() {
        for p in 1..=4 {
            let errs: Vec<f64> = [4, 8, 16, 32]
                .iter()
                .map(|&n| {
                    let s = FemSpace1D::new(n, p).unwrap();
                    let w = s.interpolate(|x| (PI * x).sin());
                    s.l2_norm_of_difference(&w, |x| (PI * x).sin(), p + 4)
                        .unwrap()
                })
                .collect();
            for pair in errs.windows(2) {
                let rate = (pair[0] / pair[1]).log2();
                assert!((rate - (p as f64 + 1.0)).abs() < 0.2, "p={p} rate={rate}");
            }
        }
    }

    #[test]
    fn pointwise_evaluation() {
        let s = FemSpace1D::new(4, 1).unwrap();
        let w = s.function(vec![1.0, 3.0, -2.0]).unwrap();
        assert_eq!(s.evaluate(&w, 0.0).unwrap(), 0.0);
        assert_eq!(s.evaluate(&w, 1.0).unwrap(), 0.0);
        assert!((s.evaluate(&w, 0.5).unwrap() - 3.0).abs() < 1e-15);
        assert!((s.evaluate(&w, 0.375).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(
            s.evaluate(&w, 1.5),
            Err(SpaceError::OutOfDomain(_))
        ));
        let s3 = FemSpace1D::new(3, 3).unwrap();
        let w3 = s3.interpolate(|x| x * x * (1.0 - x));
        for &x in &[0.1, 0.45, 0.8] {
            assert!((s3.evaluate(&w3, x).unwrap() - x * x * (1.0 - x)).abs() < 1e-14);
        }
    }
}
