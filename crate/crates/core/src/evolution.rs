//! Truncated diagonal systems `z' = -Λ z + B u` in an orthonormal eigenbasis.
//!
//! Everything is diagonal: the semigroup multiplies mode `ν` by
//! `e^{-λ_ν t}`, `B` multiplies the control amplitude `U_ν` by the actuator
//! gain `c_ν = <b, p_ν>`, and `B*` multiplies a state coefficient by the same
//! gain. Mild solutions for piecewise-constant controls are evaluated in closed
//! form, so there is no time-stepping error anywhere in this module.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use crate::chaos::{ChaosDecomposition, DecompositionKind, MultiIndex};
use crate::orthopoly::{FamilyKind, PolyError, PolyFamily1D};
use crate::quadrature::{CoeffError, Profile, QuadError, TensorQuadrature};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvolutionError {
    #[error("time {0} must be finite and nonnegative")]
    NegativeTime(f64),
    #[error("expected {expected} values, got {found}")]
    Shape { expected: usize, found: usize },
    #[error("mode {index}: {reason}")]
    InvalidMode { index: usize, reason: &'static str },
    #[error("control grid: {0}")]
    Grid(&'static str),
    #[error("basis does not match decomposition: {0}")]
    Basis(&'static str),
    #[error("point {point}: {error}")]
    Point { point: usize, error: PolyError },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// Failure while building a tensor system from an actuator profile.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuildError<E: core::fmt::Display> {
    #[error(transparent)]
    System(#[from] EvolutionError),
    #[error(transparent)]
    Coefficients(#[from] CoeffError<E>),
}

/// Coefficients of a state in the orthonormal eigenbasis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpectralState(Vec<f64>);

impl SpectralState {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self(coeffs)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.0.iter().map(|v| v * v).sum())
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }
}

/// How a mode is labelled: by multi-index for tensor bases, by position for
/// abstract systems.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModeIndex {
    Multi(MultiIndex),
    Abstract(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub index: ModeIndex,
    pub lambda: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    LaguerreTensor,
    JacobiTensor,
    Abstract,
}

/// Piecewise-constant per-mode control on `0 = t_0 < ... < t_S = t1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSignal {
    grid: Vec<f64>,
    /// `values[k][ν]` is the amplitude on `[t_k, t_{k+1})`.
    values: Vec<Vec<f64>>,
}

impl ControlSignal {
    pub fn new(grid: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self, EvolutionError> {
        if grid.len() < 2 {
            return Err(EvolutionError::Grid("needs at least two breakpoints"));
        }
        if grid[0] != 0.0 {
            return Err(EvolutionError::Grid("must start at t = 0"));
        }
        if grid.windows(2).any(|w| !w[1].is_finite() || w[1] <= w[0]) {
            return Err(EvolutionError::Grid(
                "breakpoints must be finite and strictly increasing",
            ));
        }
        if values.len() + 1 != grid.len() {
            return Err(EvolutionError::Shape {
                expected: grid.len() - 1,
                found: values.len(),
            });
        }
        let width = values[0].len();
        if values.iter().any(|row| row.len() != width) {
            return Err(EvolutionError::Grid("segment rows differ in length"));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(EvolutionError::Grid("control values must be finite"));
        }
        Ok(Self { grid, values })
    }

    /// Uniform grid of `segments` pieces on `[0, t1]`, last breakpoint exactly `t1`.
    pub fn uniform_grid(t1: f64, segments: usize) -> Vec<f64> {
        let mut grid: Vec<f64> = (0..=segments)
            .map(|k| t1 * k as f64 / segments as f64)
            .collect();
        grid[segments] = t1;
        grid
    }

    pub fn zero(t1: f64, segments: usize, modes: usize) -> Result<Self, EvolutionError> {
        Self::new(
            Self::uniform_grid(t1, segments),
            vec![vec![0.0; modes]; segments],
        )
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn segments(&self) -> usize {
        self.values.len()
    }

    pub fn mode_count(&self) -> usize {
        self.values[0].len()
    }

    pub fn horizon(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    /// `∫ |u|²` over `[0, t1]`.
    pub fn energy(&self) -> f64 {
        self.values
            .iter()
            .zip(self.grid.windows(2))
            .map(|(row, w)| (w[1] - w[0]) * row.iter().map(|v| v * v).sum::<f64>())
            .sum()
    }
}

/// `∫_a^b e^{-λ(t1-s)} ds` in closed form (λ = 0 gives `b - a`).
pub fn kernel_integral(lambda: f64, t1: f64, a: f64, b: f64) -> f64 {
    if lambda == 0.0 {
        return b - a;
    }
    libm::exp(-lambda * (t1 - b)) * (-libm::expm1(-lambda * (b - a))) / lambda
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalSystem {
    modes: Vec<Mode>,
    provenance: Provenance,
}

fn check_time(t: f64) -> Result<(), EvolutionError> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(EvolutionError::NegativeTime(t))
    }
}

impl DiagonalSystem {
    /// Abstract Sturm-Liouville setting: user supplied `(λ_n, c_n)` pairs.
    pub fn from_abstract(pairs: &[(f64, f64)]) -> Result<Self, EvolutionError> {
        let modes = pairs
            .iter()
            .enumerate()
            .map(|(n, &(lambda, c))| Mode {
                index: ModeIndex::Abstract(n),
                lambda,
                c,
            })
            .collect();
        Self::from_modes(modes, Provenance::Abstract)
    }

    fn from_modes(modes: Vec<Mode>, provenance: Provenance) -> Result<Self, EvolutionError> {
        let mut previous = 0.0;
        for (index, mode) in modes.iter().enumerate() {
            if !(mode.lambda.is_finite() && mode.lambda >= 0.0) {
                return Err(EvolutionError::InvalidMode {
                    index,
                    reason: "eigenvalue must be finite and nonnegative",
                });
            }
            if !mode.c.is_finite() {
                return Err(EvolutionError::InvalidMode {
                    index,
                    reason: "actuator coefficient must be finite",
                });
            }
            if mode.lambda < previous {
                return Err(EvolutionError::InvalidMode {
                    index,
                    reason: "eigenvalues must be nondecreasing",
                });
            }
            previous = mode.lambda;
        }
        Ok(Self { modes, provenance })
    }

    /// Tensor system with given actuator coefficients in decomposition order.
    pub fn from_decomposition(
        decomposition: &ChaosDecomposition,
        coefficients: &[f64],
    ) -> Result<Self, EvolutionError> {
        if coefficients.len() != decomposition.mode_count() {
            return Err(EvolutionError::Shape {
                expected: decomposition.mode_count(),
                found: coefficients.len(),
            });
        }
        let modes = decomposition
            .modes()
            .zip(coefficients)
            .map(|((_, lambda, index), &c)| Mode {
                index: ModeIndex::Multi(index.clone()),
                lambda,
                c,
            })
            .collect();
        let provenance = match decomposition.kind() {
            DecompositionKind::Laguerre => Provenance::LaguerreTensor,
            DecompositionKind::Jacobi => Provenance::JacobiTensor,
        };
        Self::from_modes(modes, provenance)
    }

    /// Tensor system with `c_ν = <b, p_ν>` computed by Gauss quadrature with
    /// `quad_points` nodes per axis.
    pub fn from_profile<P: Profile>(
        decomposition: &ChaosDecomposition,
        families: &[PolyFamily1D],
        b: &P,
        quad_points: usize,
    ) -> Result<Self, BuildError<P::Error>> {
        check_basis(decomposition, families)?;
        let grid = TensorQuadrature::new(families, quad_points, decomposition.max_axis_degree())
            .map_err(EvolutionError::from)?;
        let samples = grid.sample(b)?;
        let coefficients = decomposition
            .modes()
            .map(|(_, _, index)| grid.coefficient(&samples, index.entries()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(EvolutionError::from)?;
        Ok(Self::from_decomposition(decomposition, &coefficients)?)
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn lambdas(&self) -> impl Iterator<Item = f64> + '_ {
        self.modes.iter().map(|m| m.lambda)
    }

    pub fn gains(&self) -> impl Iterator<Item = f64> + '_ {
        self.modes.iter().map(|m| m.c)
    }

    /// Same eigenvalues, actuator gains multiplied by `s` (i.e. `b → s b`).
    pub fn scaled(&self, s: f64) -> Self {
        let modes = self
            .modes
            .iter()
            .map(|m| Mode {
                c: m.c * s,
                ..m.clone()
            })
            .collect();
        Self {
            modes,
            provenance: self.provenance,
        }
    }

    /// Consecutive runs of equal eigenvalue, in storage order.
    pub fn eigenvalue_levels(&self) -> Vec<Range<usize>> {
        let mut out: Vec<Range<usize>> = Vec::new();
        for (k, mode) in self.modes.iter().enumerate() {
            match out.last_mut() {
                Some(r) if self.modes[r.start].lambda == mode.lambda => r.end = k + 1,
                _ => out.push(k..k + 1),
            }
        }
        out
    }

    fn check_len(&self, found: usize) -> Result<(), EvolutionError> {
        if found == self.modes.len() {
            Ok(())
        } else {
            Err(EvolutionError::Shape {
                expected: self.modes.len(),
                found,
            })
        }
    }

    /// `T(t) z`: mode `ν` scaled by `e^{-λ_ν t}`.
    pub fn semigroup_apply(
        &self,
        state: &SpectralState,
        t: f64,
    ) -> Result<SpectralState, EvolutionError> {
        check_time(t)?;
        self.check_len(state.len())?;
        Ok(SpectralState(
            self.modes
                .iter()
                .zip(state.coeffs())
                .map(|(m, z)| libm::exp(-m.lambda * t) * z)
                .collect(),
        ))
    }

    /// `T_k(t) z`: the semigroup restricted to the first `levels_kept`
    /// eigenvalue levels, zero above.
    pub fn semigroup_apply_truncated(
        &self,
        state: &SpectralState,
        t: f64,
        levels_kept: usize,
    ) -> Result<SpectralState, EvolutionError> {
        let mut out = self.semigroup_apply(state, t)?;
        let cut = self
            .eigenvalue_levels()
            .get(levels_kept)
            .map_or(self.modes.len(), |r| r.start);
        out.0[cut..].iter_mut().for_each(|v| *v = 0.0);
        Ok(out)
    }

    /// Operator norm of `T(t) - T_k(t)` on the truncation, i.e. the largest
    /// discarded factor `e^{-λ t}`. Zero when nothing is discarded.
    pub fn truncation_gap(&self, t: f64, levels_kept: usize) -> Result<f64, EvolutionError> {
        check_time(t)?;
        let levels = self.eigenvalue_levels();
        let cut = levels
            .get(levels_kept)
            .map_or(self.modes.len(), |r| r.start);
        Ok(self.modes[cut..]
            .iter()
            .map(|m| libm::exp(-m.lambda * t))
            .fold(0.0, f64::max))
    }

    /// `B U`: coefficient `ν` is `U_ν c_ν`.
    pub fn apply_b(&self, u: &[f64]) -> Result<SpectralState, EvolutionError> {
        self.check_len(u.len())?;
        Ok(SpectralState(
            self.modes.iter().zip(u).map(|(m, u)| u * m.c).collect(),
        ))
    }

    /// `B* z`: entry `ν` is `c_ν z_ν`.
    pub fn apply_b_star(&self, state: &SpectralState) -> Result<Vec<f64>, EvolutionError> {
        self.check_len(state.len())?;
        Ok(self
            .modes
            .iter()
            .zip(state.coeffs())
            .map(|(m, z)| m.c * z)
            .collect())
    }

    /// Mild solution at `t1` for a piecewise-constant control.
    pub fn mild_solution(
        &self,
        z0: &SpectralState,
        control: &ControlSignal,
        t1: f64,
    ) -> Result<SpectralState, EvolutionError> {
        check_time(t1)?;
        self.check_len(z0.len())?;
        self.check_len(control.mode_count())?;
        let end = control.horizon();
        if (end - t1).abs() > 1e-12 * t1.max(1.0) {
            return Err(EvolutionError::Grid("grid does not end at t1"));
        }
        let grid = control.grid();
        let out = self
            .modes
            .iter()
            .enumerate()
            .map(|(nu, mode)| {
                let forced: f64 = control
                    .values()
                    .iter()
                    .zip(grid.windows(2))
                    .map(|(row, w)| row[nu] * kernel_integral(mode.lambda, t1, w[0], w[1].min(t1)))
                    .sum();
                libm::exp(-mode.lambda * t1) * z0.coeffs()[nu] + mode.c * forced
            })
            .collect();
        Ok(SpectralState(out))
    }
}

fn check_basis(
    decomposition: &ChaosDecomposition,
    families: &[PolyFamily1D],
) -> Result<(), EvolutionError> {
    if families.len() != decomposition.dimension() {
        return Err(EvolutionError::Basis("one family per axis is required"));
    }
    let expected = match decomposition.kind() {
        DecompositionKind::Laguerre => FamilyKind::Laguerre,
        DecompositionKind::Jacobi => FamilyKind::Jacobi,
    };
    if families.iter().any(|f| f.kind() != expected) {
        return Err(EvolutionError::Basis(
            "family kind differs from decomposition kind",
        ));
    }
    Ok(())
}

/// Synthesis `z(x) = Σ_ν z_ν Π_i p_{ν_i}(x_i)` at each point.
pub fn reconstruct(
    state: &SpectralState,
    decomposition: &ChaosDecomposition,
    families: &[PolyFamily1D],
    points: &[Vec<f64>],
) -> Result<Vec<f64>, EvolutionError> {
    check_basis(decomposition, families)?;
    if state.len() != decomposition.mode_count() {
        return Err(EvolutionError::Shape {
            expected: decomposition.mode_count(),
            found: state.len(),
        });
    }
    let d = decomposition.dimension();
    let top = decomposition.max_axis_degree();
    points
        .iter()
        .enumerate()
        .map(|(point, x)| {
            if x.len() != d {
                return Err(EvolutionError::Shape {
                    expected: d,
                    found: x.len(),
                });
            }
            let tables = families
                .iter()
                .zip(x)
                .map(|(f, &xi)| f.eval_orthonormal(top, xi))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|error| EvolutionError::Point { point, error })?;
            Ok(decomposition
                .modes()
                .zip(state.coeffs())
                .map(|((_, _, index), z)| {
                    z * index
                        .entries()
                        .iter()
                        .zip(&tables)
                        .map(|(&k, table)| table[k])
                        .product::<f64>()
                })
                .sum())
        })
        .collect()
}
