//! Orthonormal Laguerre and Jacobi polynomials in one variable.
//!
//! Polynomials are generated by the symmetric three-term recurrence
//!
//! ```text
//! x p_k(x) = a_k p_{k+1}(x) + b_k p_k(x) + a_{k-1} p_{k-1}(x)
//! ```
//!
//! with `p_0 = 1/sqrt(mass)`. All leading coefficients are positive. The
//! classical Rodrigues polynomials differ from these by the sign `(-1)^n`
//! for Laguerre; controllability criteria only ever look at `|<b, p_n>|`, so
//! the sign convention does not matter downstream.
//!
//! Measures:
//!
//! - Laguerre(α): `x^α e^{-x} / Γ(α+1) dx` on `[0, ∞)`, total mass 1.
//! - Jacobi(α, β): `(1-x)^α (1+x)^β dx` on `[-1, 1]`, unnormalized.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::special::ln_gamma;
use crate::MAX_DEGREE;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolyError {
    #[error("parameter {name} = {value} is outside its domain (must be > {bound})")]
    ParameterDomain {
        name: &'static str,
        value: f64,
        bound: f64,
    },
    #[error("x = {x} is outside the support of the {kind:?} measure")]
    OutsideSupport { kind: FamilyKind, x: f64 },
    #[error("degree {requested} exceeds the supported maximum {max}")]
    DegreeTooLarge { requested: usize, max: usize },
    #[error("recurrence length must be at least 1")]
    EmptyRecurrence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Laguerre,
    Jacobi,
}

/// Weight data for one coordinate axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolyFamily1D {
    kind: FamilyKind,
    alpha: f64,
    beta: f64,
    mass: f64,
}

fn check_parameter(name: &'static str, value: f64, bound: f64) -> Result<(), PolyError> {
    if value.is_finite() && value > bound {
        Ok(())
    } else {
        Err(PolyError::ParameterDomain { name, value, bound })
    }
}

impl PolyFamily1D {
    pub fn laguerre(alpha: f64) -> Result<Self, PolyError> {
        check_parameter("alpha", alpha, -1.0)?;
        Ok(Self {
            kind: FamilyKind::Laguerre,
            alpha,
            beta: 0.0,
            mass: 1.0,
        })
    }

    pub fn jacobi(alpha: f64, beta: f64) -> Result<Self, PolyError> {
        check_parameter("alpha", alpha, -1.0)?;
        check_parameter("beta", beta, -1.0)?;
        let ln_mass = (alpha + beta + 1.0) * core::f64::consts::LN_2
            + ln_gamma(alpha + 1.0)
            + ln_gamma(beta + 1.0)
            - ln_gamma(alpha + beta + 2.0);
        Ok(Self {
            kind: FamilyKind::Jacobi,
            alpha,
            beta,
            mass: libm::exp(ln_mass),
        })
    }

    /// Legendre is Jacobi with `α = β = 0`.
    pub fn legendre() -> Self {
        Self {
            kind: FamilyKind::Jacobi,
            alpha: 0.0,
            beta: 0.0,
            mass: 2.0,
        }
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Zero for Laguerre.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Whether `x` lies in the closed support of the measure.
    pub fn contains(&self, x: f64) -> bool {
        match self.kind {
            FamilyKind::Laguerre => x >= 0.0 && x.is_finite(),
            FamilyKind::Jacobi => (-1.0..=1.0).contains(&x),
        }
    }

    fn check_point(&self, x: f64) -> Result<(), PolyError> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(PolyError::OutsideSupport { kind: self.kind, x })
        }
    }

    /// Eigenvalue of degree `n` for the (negated) one-dimensional operator:
    /// `n` for Laguerre, `n(n+α+β+1)` for Jacobi.
    pub fn eigenvalue(&self, n: usize) -> f64 {
        let n = n as f64;
        match self.kind {
            FamilyKind::Laguerre => n,
            FamilyKind::Jacobi => n * (n + self.alpha + self.beta + 1.0),
        }
    }

    /// Recurrence coefficients for degrees `0..m`.
    pub fn recurrence_coeffs(&self, m: usize) -> Result<RecurrenceCoeffs, PolyError> {
        if m == 0 {
            return Err(PolyError::EmptyRecurrence);
        }
        if m > MAX_DEGREE + 1 {
            return Err(PolyError::DegreeTooLarge {
                requested: m - 1,
                max: MAX_DEGREE,
            });
        }
        let diag = (0..m).map(|k| self.diag_coeff(k)).collect();
        let offdiag = (0..m - 1).map(|k| self.offdiag_coeff(k)).collect();
        Ok(RecurrenceCoeffs { diag, offdiag })
    }

    fn diag_coeff(&self, k: usize) -> f64 {
        let k = k as f64;
        let (a, b) = (self.alpha, self.beta);
        match self.kind {
            FamilyKind::Laguerre => 2.0 * k + a + 1.0,
            FamilyKind::Jacobi => {
                if k == 0.0 {
                    (b - a) / (a + b + 2.0)
                } else {
                    let s = 2.0 * k + a + b;
                    (b * b - a * a) / (s * (s + 2.0))
                }
            }
        }
    }

    fn offdiag_coeff(&self, k: usize) -> f64 {
        let k = k as f64;
        let (a, b) = (self.alpha, self.beta);
        match self.kind {
            FamilyKind::Laguerre => libm::sqrt((k + 1.0) * (k + a + 1.0)),
            FamilyKind::Jacobi => {
                if k == 0.0 {
                    let s = a + b + 2.0;
                    libm::sqrt(4.0 * (a + 1.0) * (b + 1.0) / (s * s * (s + 1.0)))
                } else {
                    let s = 2.0 * k + a + b;
                    let num = 4.0 * (k + 1.0) * (k + a + 1.0) * (k + b + 1.0) * (k + a + b + 1.0);
                    let den = (s + 1.0) * (s + 2.0) * (s + 2.0) * (s + 3.0);
                    libm::sqrt(num / den)
                }
            }
        }
    }

    /// `p_0(x), ..., p_n(x)`.
    pub fn eval_orthonormal(&self, n: usize, x: f64) -> Result<Vec<f64>, PolyError> {
        self.check_point(x)?;
        let rec = self.recurrence_coeffs(n + 1)?;
        let mut values = Vec::with_capacity(n + 1);
        let mut prev = 0.0;
        let mut cur = 1.0 / libm::sqrt(self.mass);
        values.push(cur);
        for k in 0..n {
            let lower = if k == 0 { 0.0 } else { rec.offdiag[k - 1] };
            let next = ((x - rec.diag[k]) * cur - lower * prev) / rec.offdiag[k];
            prev = cur;
            cur = next;
            values.push(cur);
        }
        Ok(values)
    }

    /// `(p_n(x), p_n'(x), p_n''(x))` via the differentiated recurrence.
    pub fn eval_derivatives(&self, n: usize, x: f64) -> Result<(f64, f64, f64), PolyError> {
        self.check_point(x)?;
        let rec = self.recurrence_coeffs(n + 1)?;
        let (mut p_prev, mut d_prev, mut dd_prev) = (0.0, 0.0, 0.0);
        let (mut p, mut d, mut dd) = (1.0 / libm::sqrt(self.mass), 0.0, 0.0);
        for k in 0..n {
            let lower = if k == 0 { 0.0 } else { rec.offdiag[k - 1] };
            let upper = rec.offdiag[k];
            let shift = x - rec.diag[k];
            let p_next = (shift * p - lower * p_prev) / upper;
            let d_next = (shift * d + p - lower * d_prev) / upper;
            let dd_next = (shift * dd + 2.0 * d - lower * dd_prev) / upper;
            (p_prev, d_prev, dd_prev) = (p, d, dd);
            (p, d, dd) = (p_next, d_next, dd_next);
        }
        Ok((p, d, dd))
    }

    /// Squared norm of the classical (unnormalized) degree-`n` polynomial.
    ///
    /// Jacobi: `h_n = 2^{α+β+1}/(2n+α+β+1) · Γ(n+α+1)Γ(n+β+1)/(Γ(n+1)Γ(n+α+β+1))`,
    /// with the `n = 0` case written as `2^{α+β+1}Γ(α+1)Γ(β+1)/Γ(α+β+2)` so
    /// that `α+β = -1` is finite. Laguerre: `Γ(n+α+1)/(n! Γ(α+1))` under the
    /// normalized Gamma measure.
    pub fn norm_constant(&self, n: usize) -> f64 {
        let nf = n as f64;
        let (a, b) = (self.alpha, self.beta);
        match self.kind {
            FamilyKind::Laguerre => {
                libm::exp(ln_gamma(nf + a + 1.0) - ln_gamma(nf + 1.0) - ln_gamma(a + 1.0))
            }
            FamilyKind::Jacobi => {
                if n == 0 {
                    return self.mass;
                }
                let ln_h = (a + b + 1.0) * core::f64::consts::LN_2
                    - libm::log(2.0 * nf + a + b + 1.0)
                    + ln_gamma(nf + a + 1.0)
                    + ln_gamma(nf + b + 1.0)
                    - ln_gamma(nf + 1.0)
                    - ln_gamma(nf + a + b + 1.0);
                libm::exp(ln_h)
            }
        }
    }

    /// Residual of the Sturm-Liouville eigen-relation at `x`:
    ///
    /// - Laguerre: `x p'' + (α+1-x) p' + n p`
    /// - Jacobi: `(1-x²) p'' + (β-α-(α+β+2)x) p' + n(n+α+β+1) p`
    ///
    /// Zero for exact eigenfunctions.
    pub fn sturm_liouville_residual(&self, n: usize, x: f64) -> Result<f64, PolyError> {
        let (p, d, dd) = self.eval_derivatives(n, x)?;
        let (a, b) = (self.alpha, self.beta);
        let lambda = self.eigenvalue(n);
        Ok(match self.kind {
            FamilyKind::Laguerre => x * dd + (a + 1.0 - x) * d + lambda * p,
            FamilyKind::Jacobi => (1.0 - x * x) * dd + (b - a - (a + b + 2.0) * x) * d + lambda * p,
        })
    }
}

/// Coefficients of the symmetric orthonormal recurrence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrenceCoeffs {
    /// `b_0 .. b_{m-1}`
    pub diag: Vec<f64>,
    /// `a_0 .. a_{m-2}`, strictly positive
    pub offdiag: Vec<f64>,
}

impl RecurrenceCoeffs {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }
}
