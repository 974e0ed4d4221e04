//! Independent oracles for the recurrence-generated polynomials: Rodrigues
//! formulas expanded with plain polynomial arithmetic, and exact moments of
//! the weights.

use spectral_control_core::orthopoly::PolyFamily1D;
use spectral_control_core::quadrature::gauss_rule;

/// Dense polynomial, coefficient `k` multiplies `x^k`.
#[derive(Clone, Debug)]
struct Poly(Vec<f64>);

impl Poly {
    fn monomial(k: usize) -> Self {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        Poly(c)
    }

    fn linear(c0: f64, c1: f64) -> Self {
        Poly(vec![c0, c1])
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    fn pow(&self, n: usize) -> Poly {
        (0..n).fold(Poly(vec![1.0]), |acc, _| acc.mul(self))
    }

    fn derivative(&self) -> Poly {
        if self.0.len() == 1 {
            return Poly(vec![0.0]);
        }
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c)
                .collect(),
        )
    }

    fn sub(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        Poly(
            (0..n)
                .map(|k| {
                    self.0.get(k).copied().unwrap_or(0.0) - other.0.get(k).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }

    /// Exact division; panics on a nonzero remainder.
    fn div_exact(&self, divisor: &Poly) -> Poly {
        let mut rem = self.0.clone();
        let dl = divisor.0.len();
        if rem.len() < dl {
            assert!(rem.iter().all(|c| c.abs() < 1e-9));
            return Poly(vec![0.0]);
        }
        let mut quot = vec![0.0; rem.len() - dl + 1];
        let lead = *divisor.0.last().unwrap();
        for k in (0..quot.len()).rev() {
            let q = rem[k + dl - 1] / lead;
            quot[k] = q;
            for (j, d) in divisor.0.iter().enumerate() {
                rem[k + j] -= q * d;
            }
        }
        let scale = self.0.iter().map(|c| c.abs()).fold(1.0, f64::max);
        assert!(
            rem.iter().all(|c| c.abs() < 1e-9 * scale),
            "remainder {rem:?}"
        );
        Poly(quot)
    }

    fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    fn norm_sq(&self, moments: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in self.0.iter().enumerate() {
                acc += a * b * moments[i + j];
            }
        }
        acc
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `x^{-α} e^{x} dⁿ/dxⁿ (x^{n+α} e^{-x})` for integer α, as a polynomial.
fn laguerre_rodrigues(n: usize, alpha: usize) -> Poly {
    // d/dx (q e^{-x}) = (q' - q) e^{-x}
    let mut q = Poly::monomial(n + alpha);
    for _ in 0..n {
        q = q.derivative().sub(&q);
    }
    q.div_exact(&Poly::monomial(alpha))
}

/// `(1-x)^{-α}(1+x)^{-β} dⁿ/dxⁿ ((1-x)^{α+n}(1+x)^{β+n})` for integer α, β.
fn jacobi_rodrigues(n: usize, alpha: usize, beta: usize) -> Poly {
    let one_minus = Poly::linear(1.0, -1.0);
    let one_plus = Poly::linear(1.0, 1.0);
    let mut q = one_minus.pow(alpha + n).mul(&one_plus.pow(beta + n));
    for _ in 0..n {
        q = q.derivative();
    }
    q.div_exact(&one_minus.pow(alpha).mul(&one_plus.pow(beta)))
}

/// `∫ x^k x^α e^{-x} dx / Γ(α+1) = (α+1)(α+2)…(α+k)`
fn laguerre_moments(alpha: f64, count: usize) -> Vec<f64> {
    let mut m = vec![1.0];
    for k in 1..count {
        m.push(m[k - 1] * (alpha + k as f64));
    }
    m
}

/// `∫_{-1}^{1} x^k (1-x)^α (1+x)^β dx` for integer α, β.
fn jacobi_moments_integer(alpha: usize, beta: usize, count: usize) -> Vec<f64> {
    let w = Poly::linear(1.0, -1.0)
        .pow(alpha)
        .mul(&Poly::linear(1.0, 1.0).pow(beta));
    (0..count)
        .map(|k| {
            w.0.iter()
                .enumerate()
                .filter(|(j, _)| (j + k) % 2 == 0)
                .map(|(j, c)| 2.0 * c / (j + k + 1) as f64)
                .sum()
        })
        .collect()
}

/// Same moments for real α, β through Beta integrals (libm Gamma).
fn jacobi_moments_real(alpha: f64, beta: f64, count: usize) -> Vec<f64> {
    // x = 2t - 1: ∫ (2t-1)^k 2^{α+β+1} t^β (1-t)^α dt
    let beta_fn =
        |a: f64, b: f64| libm::exp(libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b));
    let binom = |n: usize, k: usize| factorial(n) / (factorial(k) * factorial(n - k));
    (0..count)
        .map(|k| {
            (0..=k)
                .map(|j| {
                    let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
                    sign * binom(k, j)
                        * 2f64.powi(j as i32)
                        * beta_fn(beta + j as f64 + 1.0, alpha + 1.0)
                })
                .sum::<f64>()
                * 2f64.powf(alpha + beta + 1.0)
        })
        .collect()
}

#[test]
fn laguerre_matches_rodrigues_up_to_sign() {
    for alpha in [0usize, 1, 2, 3] {
        let fam = PolyFamily1D::laguerre(alpha as f64).unwrap();
        let moments = laguerre_moments(alpha as f64, 8);
        for n in 0..=3 {
            let r = laguerre_rodrigues(n, alpha);
            let norm = r.norm_sq(&moments).sqrt();
            // classical L_n = R_n / n!, ‖L_n‖² = Γ(n+α+1)/(n!Γ(α+1))
            let classical = norm / factorial(n);
            assert!(
                (classical * classical - fam.norm_constant(n)).abs() < 1e-10 * fam.norm_constant(n)
            );
            for x in [0.0, 0.3, 1.7, 4.0, 9.5] {
                let expected = (r.eval(x) / norm).abs();
                let got = fam.eval_orthonormal(n, x).unwrap()[n].abs();
                assert!(
                    (expected - got).abs() < 1e-10,
                    "α={alpha} n={n} x={x}: {expected} vs {got}"
                );
            }
        }
    }
}

#[test]
fn jacobi_matches_rodrigues_up_to_sign() {
    for (alpha, beta) in [(0usize, 0usize), (1, 0), (0, 2), (1, 2), (3, 1)] {
        let fam = PolyFamily1D::jacobi(alpha as f64, beta as f64).unwrap();
        let moments = jacobi_moments_integer(alpha, beta, 8);
        assert!((moments[0] - fam.mass()).abs() < 1e-12 * fam.mass());
        for n in 0..=3 {
            let r = jacobi_rodrigues(n, alpha, beta);
            let norm = r.norm_sq(&moments).sqrt();
            // classical P_n = (-1)^n R_n / (2^n n!), ‖P_n‖² = h_n
            let classical = norm / (2f64.powi(n as i32) * factorial(n));
            let h = fam.norm_constant(n);
            assert!(
                (classical * classical - h).abs() < 1e-10 * h,
                "h_{n}({alpha},{beta})"
            );
            for x in [-1.0, -0.6, 0.0, 0.25, 0.9, 1.0] {
                let expected = (r.eval(x) / norm).abs();
                let got = fam.eval_orthonormal(n, x).unwrap()[n].abs();
                assert!(
                    (expected - got).abs() < 1e-10,
                    "({alpha},{beta}) n={n} x={x}"
                );
            }
        }
    }
}

#[test]
fn endpoint_values_link_normalization_and_sign() {
    // Jacobi P_n(1) = C(n+α, n) with positive leading coefficient.
    let fam = PolyFamily1D::jacobi(0.7, 1.9).unwrap();
    for n in 0..15 {
        let nf = n as f64;
        let classical_at_one =
            libm::exp(libm::lgamma(nf + 0.7 + 1.0) - libm::lgamma(nf + 1.0) - libm::lgamma(1.7));
        let p = fam.eval_orthonormal(n, 1.0).unwrap()[n];
        let expected = classical_at_one / fam.norm_constant(n).sqrt();
        assert!(
            (p - expected).abs() < 1e-10 * expected.abs().max(1.0),
            "n={n}"
        );
    }
    // Laguerre L_n(0) = C(n+α, n), leading coefficient (-1)^n/n!.
    let fam = PolyFamily1D::laguerre(1.3).unwrap();
    for n in 0..15 {
        let nf = n as f64;
        let classical_at_zero =
            libm::exp(libm::lgamma(nf + 2.3) - libm::lgamma(nf + 1.0) - libm::lgamma(2.3));
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let p = fam.eval_orthonormal(n, 0.0).unwrap()[n];
        let expected = sign * classical_at_zero / fam.norm_constant(n).sqrt();
        assert!(
            (p - expected).abs() < 1e-10 * expected.abs().max(1.0),
            "n={n}"
        );
    }
}

#[test]
fn jacobi_mass_matches_beta_integral() {
    for (a, b) in [
        (0.0, 0.0),
        (-0.4, 1.5),
        (2.0, 3.0),
        (-0.99, -0.99),
        (5.5, 0.25),
    ] {
        let fam = PolyFamily1D::jacobi(a, b).unwrap();
        let reference = jacobi_moments_real(a, b, 1)[0];
        assert!(
            (fam.mass() - reference).abs() < 1e-12 * reference,
            "({a},{b})"
        );
    }
}

#[test]
fn recurrence_is_finite_and_positive_near_the_boundary() {
    let grid = [-0.99, -0.9, -0.5, -0.25, 0.0, 0.5, 1.0, 3.7, 10.0];
    for &a in &grid {
        let rec = PolyFamily1D::laguerre(a)
            .unwrap()
            .recurrence_coeffs(60)
            .unwrap();
        assert!(rec.diag.iter().all(|v| v.is_finite()));
        assert!(rec.offdiag.iter().all(|v| v.is_finite() && *v > 0.0));
        for &b in &grid {
            let rec = PolyFamily1D::jacobi(a, b)
                .unwrap()
                .recurrence_coeffs(60)
                .unwrap();
            assert!(rec.diag.iter().all(|v| v.is_finite()), "({a},{b})");
            assert!(
                rec.offdiag.iter().all(|v| v.is_finite() && *v > 0.0),
                "({a},{b})"
            );
        }
    }
}

fn interior_points(fam: &PolyFamily1D) -> Vec<f64> {
    (0..50)
        .map(|k| {
            let s = (k as f64 + 0.5) / 50.0;
            match fam.kind() {
                spectral_control_core::FamilyKind::Laguerre => 25.0 * s,
                spectral_control_core::FamilyKind::Jacobi => 2.0 * s - 1.0,
            }
        })
        .collect()
}

#[test]
fn eigenfunction_relation_holds() {
    let families = [
        PolyFamily1D::laguerre(0.0).unwrap(),
        PolyFamily1D::laguerre(-0.7).unwrap(),
        PolyFamily1D::laguerre(4.2).unwrap(),
        PolyFamily1D::jacobi(0.0, 0.0).unwrap(),
        PolyFamily1D::jacobi(-0.4, 1.5).unwrap(),
        PolyFamily1D::jacobi(2.0, 3.0).unwrap(),
    ];
    for fam in &families {
        for n in 0..=12 {
            for x in interior_points(fam) {
                let r = fam.sturm_liouville_residual(n, x).unwrap();
                let p = fam.eval_orthonormal(n, x).unwrap()[n];
                let bound = 1e-7 * (p.abs() * (n * n) as f64).max(1.0);
                assert!(r.abs() <= bound, "{fam:?} n={n} x={x}: {r}");
            }
        }
    }
}

#[test]
fn orthonormal_under_gauss_rule() {
    for fam in [
        PolyFamily1D::laguerre(0.5).unwrap(),
        PolyFamily1D::jacobi(-0.4, 1.5).unwrap(),
    ] {
        let rule = gauss_rule(&fam, 21).unwrap();
        let tables: Vec<Vec<f64>> = rule
            .nodes()
            .iter()
            .map(|&x| fam.eval_orthonormal(20, x).unwrap())
            .collect();
        for i in 0..=20 {
            for j in 0..=20 {
                let ip: f64 = tables
                    .iter()
                    .zip(rule.weights())
                    .map(|(t, w)| w * t[i] * t[j])
                    .sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((ip - expected).abs() <= 1e-9, "{fam:?} ({i},{j}) = {ip}");
            }
        }
    }
}
