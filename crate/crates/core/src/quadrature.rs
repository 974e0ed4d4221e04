//! Gauss rules for the Laguerre and Jacobi measures and the Fourier
//! coefficients `<b, p_ν>` built on top of them.
//!
//! Nodes and weights come from Golub-Welsch: the nodes are the eigenvalues of
//! the Jacobi matrix assembled from [`RecurrenceCoeffs`], and each weight is
//! `mass · v_0²` for the matching normalized eigenvector. Every sum in this
//! module runs in a fixed order (ascending nodes; lexicographic node grid with
//! the last axis fastest) so results are reproducible bit for bit.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::orthopoly::{PolyError, PolyFamily1D, RecurrenceCoeffs};
use crate::tridiag::{symmetric_tridiagonal_eigen, EigenError};
use crate::{MAX_DEGREE, MAX_DIMENSION};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("Golub-Welsch eigensolve failed: {0}")]
    Eigen(#[from] EigenError),
    #[error("rule order {0} is outside 1..={MAX_DEGREE}")]
    OrderOutOfRange(usize),
    #[error("dimension {0} is outside 1..={MAX_DIMENSION}")]
    DimensionOutOfRange(usize),
    #[error("degree {degree} on axis {axis} exceeds the tabulated maximum {max}")]
    DegreeNotTabulated {
        axis: usize,
        degree: usize,
        max: usize,
    },
    #[error("multi-index has {found} entries, expected {expected}")]
    IndexLength { expected: usize, found: usize },
}

/// Failure while evaluating a user function on a quadrature grid.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoeffError<E: fmt::Display> {
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("function takes {found} arguments but the basis has {expected} variables")]
    ArityMismatch { expected: usize, found: usize },
    #[error("evaluation failed at node {node}: {error}")]
    Evaluation { node: usize, error: E },
}

/// A real function on `R^d` that may fail to evaluate.
pub trait Profile {
    type Error: fmt::Display;

    fn arity(&self) -> usize;

    fn eval(&self, x: &[f64]) -> Result<f64, Self::Error>;
}

/// Adapts a closure of known arity into a [`Profile`].
#[derive(Debug, Clone, Copy)]
pub struct FnProfile<F> {
    arity: usize,
    f: F,
}

impl<F> FnProfile<F> {
    pub fn new(arity: usize, f: F) -> Self {
        Self { arity, f }
    }
}

/// Error type for infallible closures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Never {}

impl fmt::Display for Never {
    fn fmt(&self, _: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {}
    }
}

impl<F: Fn(&[f64]) -> f64> Profile for FnProfile<F> {
    type Error = Never;

    fn arity(&self) -> usize {
        self.arity
    }

    fn eval(&self, x: &[f64]) -> Result<f64, Never> {
        Ok((self.f)(x))
    }
}

/// One-dimensional Gauss rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    family: PolyFamily1D,
}

/// Golub-Welsch construction of the `m`-point Gauss rule.
pub fn gauss_rule(family: &PolyFamily1D, m: usize) -> Result<QuadRule, QuadError> {
    if m == 0 || m > MAX_DEGREE {
        return Err(QuadError::OrderOutOfRange(m));
    }
    let RecurrenceCoeffs { diag, offdiag } = family.recurrence_coeffs(m)?;
    let eig = symmetric_tridiagonal_eigen(&diag, &offdiag)?;
    let weights = eig
        .first_components
        .iter()
        .map(|v| family.mass() * v * v)
        .collect();
    Ok(QuadRule {
        nodes: eig.values,
        weights,
        family: *family,
    })
}

impl QuadRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn family(&self) -> &PolyFamily1D {
        &self.family
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `Σ w_k f(x_k)` for an infallible integrand.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(0.0, |acc, (&x, &w)| acc + w * f(x))
    }

    /// `Σ w_k f(x_k) g(x_k)`; failures report the node index.
    pub fn inner_product<E: fmt::Display>(
        &self,
        mut f: impl FnMut(f64) -> Result<f64, E>,
        mut g: impl FnMut(f64) -> Result<f64, E>,
    ) -> Result<f64, CoeffError<E>> {
        let mut acc = 0.0;
        for (node, (&x, &w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let fx = f(x).map_err(|error| CoeffError::Evaluation { node, error })?;
            let gx = g(x).map_err(|error| CoeffError::Evaluation { node, error })?;
            acc += w * fx * gx;
        }
        Ok(acc)
    }
}

/// Free-function form of [`QuadRule::inner_product`].
pub fn inner_product<E: fmt::Display>(
    f: impl FnMut(f64) -> Result<f64, E>,
    g: impl FnMut(f64) -> Result<f64, E>,
    rule: &QuadRule,
) -> Result<f64, CoeffError<E>> {
    rule.inner_product(f, g)
}

/// Full tensor-product Gauss grid with tabulated orthonormal polynomials.
///
/// Build once, sample `b` once, then extract as many coefficients as needed.
#[derive(Debug, Clone)]
pub struct TensorQuadrature {
    rules: Vec<QuadRule>,
    // tables[axis][node][degree]
    tables: Vec<Vec<Vec<f64>>>,
    max_degree: usize,
}

/// Values `w(x) b(x)` on the tensor grid, lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSamples(Vec<f64>);

impl WeightedSamples {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl TensorQuadrature {
    /// `m` nodes per axis, polynomials tabulated up to `max_degree`.
    pub fn new(families: &[PolyFamily1D], m: usize, max_degree: usize) -> Result<Self, QuadError> {
        let d = families.len();
        if d == 0 || d > MAX_DIMENSION {
            return Err(QuadError::DimensionOutOfRange(d));
        }
        let rules = families
            .iter()
            .map(|f| gauss_rule(f, m))
            .collect::<Result<Vec<_>, _>>()?;
        let tables = rules
            .iter()
            .map(|rule| {
                rule.nodes()
                    .iter()
                    .map(|&x| rule.family().eval_orthonormal(max_degree, x))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            rules,
            tables,
            max_degree,
        })
    }

    pub fn dimension(&self) -> usize {
        self.rules.len()
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.rules[0].order()
    }

    pub fn point_count(&self) -> usize {
        self.nodes_per_axis().pow(self.dimension() as u32)
    }

    pub fn rules(&self) -> &[QuadRule] {
        &self.rules
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    fn for_each_point(&self, mut visit: impl FnMut(usize, &[usize])) {
        let d = self.dimension();
        let m = self.nodes_per_axis();
        let mut odometer = vec![0usize; d];
        for flat in 0..self.point_count() {
            visit(flat, &odometer);
            for axis in (0..d).rev() {
                odometer[axis] += 1;
                if odometer[axis] < m {
                    break;
                }
                odometer[axis] = 0;
            }
        }
    }

    /// Evaluates `b` at every grid point and folds in the product weight.
    pub fn sample<P: Profile>(&self, b: &P) -> Result<WeightedSamples, CoeffError<P::Error>> {
        let d = self.dimension();
        if b.arity() != d {
            return Err(CoeffError::ArityMismatch {
                expected: d,
                found: b.arity(),
            });
        }
        let mut out = Vec::with_capacity(self.point_count());
        let mut point = vec![0.0; d];
        let mut failure = None;
        self.for_each_point(|flat, idx| {
            if failure.is_some() {
                return;
            }
            let mut weight = 1.0;
            for (axis, &j) in idx.iter().enumerate() {
                point[axis] = self.rules[axis].nodes[j];
                weight *= self.rules[axis].weights[j];
            }
            match b.eval(&point) {
                Ok(v) => out.push(weight * v),
                Err(error) => failure = Some(CoeffError::Evaluation { node: flat, error }),
            }
        });
        match failure {
            Some(err) => Err(err),
            None => Ok(WeightedSamples(out)),
        }
    }

    /// `Σ_grid w(x) b(x) Π_i p_{ν_i}(x_i)` for previously sampled `b`.
    pub fn coefficient(&self, samples: &WeightedSamples, nu: &[usize]) -> Result<f64, QuadError> {
        let d = self.dimension();
        if nu.len() != d {
            return Err(QuadError::IndexLength {
                expected: d,
                found: nu.len(),
            });
        }
        if let Some((axis, &degree)) = nu.iter().enumerate().find(|(_, &k)| k > self.max_degree) {
            return Err(QuadError::DegreeNotTabulated {
                axis,
                degree,
                max: self.max_degree,
            });
        }
        let mut acc = 0.0;
        self.for_each_point(|flat, idx| {
            let mut basis = 1.0;
            for (axis, &j) in idx.iter().enumerate() {
                basis *= self.tables[axis][j][nu[axis]];
            }
            acc += samples.0[flat] * basis;
        });
        Ok(acc)
    }
}

/// One-off `<b, Π p_{ν_i}>` with `m` Gauss nodes per axis.
pub fn fourier_coefficient<P: Profile>(
    b: &P,
    families: &[PolyFamily1D],
    nu: &[usize],
    m: usize,
) -> Result<f64, CoeffError<P::Error>> {
    if nu.len() != families.len() {
        return Err(QuadError::IndexLength {
            expected: families.len(),
            found: nu.len(),
        }
        .into());
    }
    let top = nu.iter().copied().max().unwrap_or(0);
    let grid = TensorQuadrature::new(families, m, top)?;
    let samples = grid.sample(b)?;
    Ok(grid.coefficient(&samples, nu)?)
}
