//! Controllability analysis on a truncated diagonal system.
//!
//! With per-mode controls the control-to-state map
//! `G u = ∫_0^{t1} T(t1-s) B u(s) ds` decouples into scalar maps, one per
//! mode, with Gramian
//!
//! ```text
//! g_ν = c_ν² (1 - e^{-2 λ_ν t1}) / (2 λ_ν)      (c_ν² t1 when λ_ν = 0)
//! ```
//!
//! The singular values of the truncated `G` are `√g_ν`. They decay to zero as
//! the mode count grows, which is what a compact, non-surjective `G` looks
//! like at finite scale: the system can be steered approximately but never
//! exactly. A [`Certificate`] only checks the finitely many modes it is given.

use alloc::vec;
use alloc::vec::Vec;

use serde::Serialize;

use crate::evolution::{
    kernel_integral, ControlSignal, DiagonalSystem, EvolutionError, ModeIndex, SpectralState,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ControlError {
    #[error("threshold tau = {0} must be finite and positive")]
    InvalidThreshold(f64),
    #[error("horizon t1 = {0} must be finite and positive")]
    InvalidHorizon(f64),
    #[error("at least one control segment is required")]
    ZeroSegments,
    #[error("mode {mode} has zero actuator gain but the target differs from free evolution by {residual:e}")]
    Unreachable { mode: usize, residual: f64 },
    #[error("mode {mode} is unobservable (zero actuator gain), state cannot be recovered")]
    Underdetermined { mode: usize },
    #[error("{found} observation times given, at least {needed} (distinct eigenvalues) required")]
    InsufficientSamples { needed: usize, found: usize },
    #[error("observation times must be finite, nonnegative and pairwise distinct")]
    InvalidTimes,
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
}

fn check_horizon(t1: f64) -> Result<(), ControlError> {
    if t1.is_finite() && t1 > 0.0 {
        Ok(())
    } else {
        Err(ControlError::InvalidHorizon(t1))
    }
}

/// `(1 - e^{-2λt})/(2λ)`, with the `λ = 0` limit `t`.
fn unit_gramian(lambda: f64, t1: f64) -> f64 {
    if lambda == 0.0 {
        t1
    } else {
        -libm::expm1(-2.0 * lambda * t1) / (2.0 * lambda)
    }
}

/// Per-mode controllability Gramian `g_ν`.
pub fn mode_gramian(lambda: f64, c: f64, t1: f64) -> f64 {
    c * c * unit_gramian(lambda, t1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CertifiedUpToTruncation,
    NotCertified,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeGain {
    pub index: usize,
    pub magnitude: f64,
}

/// Outcome of the Fourier-coefficient test `|c_ν| > τ` over the truncation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub tau: f64,
    pub per_mode: Vec<ModeGain>,
    pub verdict: Verdict,
    /// First mode (storage order) with `|c_ν| ≤ τ`.
    pub witness: Option<usize>,
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::CertifiedUpToTruncation
    }
}

/// `1e-12 · max|c_ν|`, floored at the smallest positive normal.
pub fn default_tau(system: &DiagonalSystem) -> f64 {
    let top = system.gains().map(libm::fabs).fold(0.0, f64::max);
    (1e-12 * top).max(f64::MIN_POSITIVE)
}

/// Certifies approximate controllability of the truncation: every mode must
/// have `|c_ν| > τ`. Says nothing about modes beyond the truncation.
pub fn certify_approx_controllability(
    system: &DiagonalSystem,
    tau: f64,
) -> Result<Certificate, ControlError> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(ControlError::InvalidThreshold(tau));
    }
    let per_mode: Vec<ModeGain> = system
        .gains()
        .enumerate()
        .map(|(index, c)| ModeGain {
            index,
            magnitude: libm::fabs(c),
        })
        .collect();
    let witness = per_mode
        .iter()
        .find(|g| g.magnitude.is_nan() || g.magnitude <= tau)
        .map(|g| g.index);
    Ok(Certificate {
        tau,
        per_mode,
        verdict: if witness.is_some() {
            Verdict::NotCertified
        } else {
            Verdict::CertifiedUpToTruncation
        },
        witness,
    })
}

/// Minimum-energy steering from `z0` to `z1` in time `t1`.
///
/// `gramian`/`eta` describe the continuous-time optimum
/// `u_ν(s) = c_ν e^{-λ_ν(t1-s)} η_ν`. The realized piecewise-constant control
/// is the minimum-energy control on the segment grid; it is proportional to the
/// segment averages of the continuous optimum and is described by
/// `segment_gramian`/`segment_eta`, which converge to `gramian`/`eta` as the
/// grid is refined.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteeringPlan {
    pub t1: f64,
    pub eta: Vec<f64>,
    pub gramian: Vec<f64>,
    pub segment_eta: Vec<f64>,
    pub segment_gramian: Vec<f64>,
    pub control: ControlSignal,
    /// `‖z(t1) - z1‖` of the realized control on the truncation.
    pub predicted_truncated_error: f64,
    /// `∫|u|²` of the realized control, `Σ segment_eta² · segment_gramian`.
    pub control_energy: f64,
    /// Infimum over all L² controls, `Σ eta² · gramian`.
    pub minimum_energy: f64,
}

pub fn min_norm_steering(
    system: &DiagonalSystem,
    z0: &SpectralState,
    z1: &SpectralState,
    t1: f64,
    segments: usize,
) -> Result<SteeringPlan, ControlError> {
    check_horizon(t1)?;
    if segments == 0 {
        return Err(ControlError::ZeroSegments);
    }
    let m = system.mode_count();
    for len in [z0.len(), z1.len()] {
        if len != m {
            return Err(EvolutionError::Shape {
                expected: m,
                found: len,
            }
            .into());
        }
    }
    let grid = ControlSignal::uniform_grid(t1, segments);
    let widths: Vec<f64> = grid.windows(2).map(|w| w[1] - w[0]).collect();

    let mut eta = vec![0.0; m];
    let mut gramian = vec![0.0; m];
    let mut segment_eta = vec![0.0; m];
    let mut segment_gramian = vec![0.0; m];
    let mut values = vec![vec![0.0; m]; segments];

    for (nu, mode) in system.modes().iter().enumerate() {
        let free = libm::exp(-mode.lambda * t1) * z0.coeffs()[nu];
        let target = z1.coeffs()[nu];
        let residual = target - free;
        if mode.c == 0.0 {
            if libm::fabs(residual) > 1e-13 * (libm::fabs(target) + libm::fabs(free)) {
                return Err(ControlError::Unreachable { mode: nu, residual });
            }
            continue;
        }
        gramian[nu] = mode_gramian(mode.lambda, mode.c, t1);
        eta[nu] = residual / gramian[nu];

        // a_k = c ∫_{seg k} e^{-λ(t1-s)} ds ; discrete Gramian Σ a_k²/Δ_k
        let gains: Vec<f64> = grid
            .windows(2)
            .map(|w| mode.c * kernel_integral(mode.lambda, t1, w[0], w[1]))
            .collect();
        let g_seg: f64 = gains.iter().zip(&widths).map(|(a, dt)| a * a / dt).sum();
        segment_gramian[nu] = g_seg;
        segment_eta[nu] = residual / g_seg;
        for (k, (a, dt)) in gains.iter().zip(&widths).enumerate() {
            values[k][nu] = segment_eta[nu] * a / dt;
        }
    }

    let control = ControlSignal::new(grid, values)?;
    let reached = system.mild_solution(z0, &control, t1)?;
    let predicted_truncated_error = libm::sqrt(
        reached
            .coeffs()
            .iter()
            .zip(z1.coeffs())
            .map(|(a, b)| (a - b) * (a - b))
            .sum(),
    );
    let control_energy = segment_eta
        .iter()
        .zip(&segment_gramian)
        .map(|(e, g)| e * e * g)
        .sum();
    let minimum_energy = eta.iter().zip(&gramian).map(|(e, g)| e * e * g).sum();
    Ok(SteeringPlan {
        t1,
        eta,
        gramian,
        segment_eta,
        segment_gramian,
        control,
        predicted_truncated_error,
        control_energy,
        minimum_energy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramianEntry {
    pub mode_index: usize,
    pub label: ModeIndex,
    pub lambda: f64,
    pub c: f64,
    pub sigma: f64,
}

/// Singular values of the truncated control-to-state map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramianReport {
    pub t1: f64,
    /// Descending.
    pub singular_values: Vec<f64>,
    /// `σ_min / σ_max` (zero when every σ vanishes).
    pub decay_ratio: f64,
    pub mode_count: usize,
    /// Per-mode rows in storage order.
    pub entries: Vec<GramianEntry>,
}

pub fn gramian_spectrum(system: &DiagonalSystem, t1: f64) -> Result<GramianReport, ControlError> {
    check_horizon(t1)?;
    let entries: Vec<GramianEntry> = system
        .modes()
        .iter()
        .enumerate()
        .map(|(mode_index, m)| GramianEntry {
            mode_index,
            label: m.index.clone(),
            lambda: m.lambda,
            c: m.c,
            sigma: libm::fabs(m.c) * libm::sqrt(unit_gramian(m.lambda, t1)),
        })
        .collect();
    let mut singular_values: Vec<f64> = entries.iter().map(|e| e.sigma).collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let decay_ratio = match (singular_values.first(), singular_values.last()) {
        (Some(&top), Some(&bottom)) if top > 0.0 => bottom / top,
        _ => 0.0,
    };
    Ok(GramianReport {
        t1,
        mode_count: entries.len(),
        singular_values,
        decay_ratio,
        entries,
    })
}

/// Adjoint observations `B* T*(t_j) z` for each time (`T* = T` here).
pub fn observe(
    system: &DiagonalSystem,
    state: &SpectralState,
    times: &[f64],
) -> Result<Vec<Vec<f64>>, ControlError> {
    times
        .iter()
        .map(|&t| {
            let evolved = system.semigroup_apply(state, t)?;
            Ok(system.apply_b_star(&evolved)?)
        })
        .collect()
}

/// Recovers `z` from `y_ν(t_j) = c_ν e^{-λ_ν t_j} z_ν` by per-mode least
/// squares. Zero observations give exactly the zero state.
pub fn duality_recover(
    system: &DiagonalSystem,
    observations: &[Vec<f64>],
    times: &[f64],
) -> Result<SpectralState, ControlError> {
    if observations.len() != times.len() {
        return Err(EvolutionError::Shape {
            expected: times.len(),
            found: observations.len(),
        }
        .into());
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(ControlError::InvalidTimes);
    }
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(ControlError::InvalidTimes);
    }
    let needed = system.eigenvalue_levels().len();
    if times.len() < needed {
        return Err(ControlError::InsufficientSamples {
            needed,
            found: times.len(),
        });
    }
    let m = system.mode_count();
    if let Some(row) = observations.iter().find(|row| row.len() != m) {
        return Err(EvolutionError::Shape {
            expected: m,
            found: row.len(),
        }
        .into());
    }

    let coeffs = system
        .modes()
        .iter()
        .enumerate()
        .map(|(nu, mode)| {
            let mut num = 0.0;
            let mut den = 0.0;
            for (row, &t) in observations.iter().zip(times) {
                let a = mode.c * libm::exp(-mode.lambda * t);
                num += a * row[nu];
                den += a * a;
            }
            if mode.c == 0.0 || den == 0.0 {
                Err(ControlError::Underdetermined { mode: nu })
            } else {
                Ok(num / den)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SpectralState::new(coeffs))
}
