use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spectral_control_core::chaos::{jacobi_levels, laguerre_levels};
use spectral_control_core::{ChaosDecomposition, Expr, PolyFamily1D, MAX_DEGREE, MAX_DIMENSION};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyChoice {
    Laguerre,
    Jacobi,
    Abstract,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbstractMode {
    pub lambda: f64,
    pub c: f64,
}

/// A state given either by coefficients in mode order or by an expression in
/// the basis variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Coefficients(Vec<f64>),
    Expression(String),
}

/// On-disk experiment description. Unknown fields are rejected.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: Option<FamilyChoice>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alpha: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub beta: Vec<f64>,
    /// Jacobi: per-axis degree cap `K`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree_cap: Option<usize>,
    /// Laguerre: highest chaos level `N`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_level: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_expr: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_coeffs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abstract_modes: Option<Vec<AbstractMode>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z0: Option<StateSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z1: Option<StateSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segments: Option<usize>,
    /// Abscissae for the `basis` table.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval_points: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(CliError::config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}

/// Where the actuator profile comes from.
#[derive(Debug, Clone)]
pub enum Actuator {
    Expression(Expr),
    Coefficients(Vec<f64>),
    Abstract(Vec<(f64, f64)>),
}

/// Tensor basis shared by the Laguerre and Jacobi experiments.
#[derive(Debug, Clone)]
pub struct Basis {
    pub families: Vec<PolyFamily1D>,
    pub decomposition: ChaosDecomposition,
    pub quad_points: usize,
}

/// A validated config with defaults filled in.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub family: FamilyChoice,
    pub basis: Option<Basis>,
    pub actuator: Actuator,
    pub t1: f64,
    pub tau: Option<f64>,
    pub segments: usize,
    pub z0: Option<StateSpec>,
    pub z1: Option<StateSpec>,
    pub eval_points: Option<Vec<f64>>,
    pub out_dir: Option<PathBuf>,
}

pub const DEFAULT_T1: f64 = 1.0;
pub const DEFAULT_SEGMENTS: usize = 16;

fn per_axis(name: &str, values: &[f64], d: usize) -> Result<Vec<f64>, CliError> {
    match values.len() {
        0 => Ok(vec![0.0; d]),
        1 => Ok(vec![values[0]; d]),
        n if n == d => Ok(values.to_vec()),
        n => Err(CliError::Config(format!(
            "{name} has {n} entries, expected 1 or {d}"
        ))),
    }
}

impl Experiment {
    pub fn resolve(cfg: &ExperimentConfig) -> Result<Self, CliError> {
        let family = cfg
            .family
            .ok_or_else(|| CliError::Config("missing field `family`".into()))?;

        let t1 = cfg.t1.unwrap_or(DEFAULT_T1);
        if !(t1.is_finite() && t1 > 0.0) {
            return Err(CliError::Config(format!(
                "t1 = {t1} must be positive and finite"
            )));
        }
        if let Some(tau) = cfg.tau {
            if !(tau.is_finite() && tau > 0.0) {
                return Err(CliError::Config(format!(
                    "tau = {tau} must be positive and finite"
                )));
            }
        }
        let segments = cfg.segments.unwrap_or(DEFAULT_SEGMENTS);
        if segments == 0 {
            return Err(CliError::Config("segments must be at least 1".into()));
        }

        let sources = [
            cfg.b_expr.is_some(),
            cfg.b_coeffs.is_some(),
            cfg.abstract_modes.is_some(),
        ]
        .iter()
        .filter(|&&s| s)
        .count();
        if sources != 1 {
            return Err(CliError::Config(
                "exactly one of b_expr, b_coeffs, abstract_modes is required".into(),
            ));
        }

        let common = |basis, actuator| Experiment {
            family,
            basis,
            actuator,
            t1,
            tau: cfg.tau,
            segments,
            z0: cfg.z0.clone(),
            z1: cfg.z1.clone(),
            eval_points: cfg.eval_points.clone(),
            out_dir: cfg.out_dir.clone(),
        };

        if family == FamilyChoice::Abstract {
            let modes = cfg
                .abstract_modes
                .as_ref()
                .ok_or_else(|| CliError::Config("family `abstract` needs abstract_modes".into()))?;
            for (field, present) in [
                ("d", cfg.d.is_some()),
                ("alpha", !cfg.alpha.is_empty()),
                ("beta", !cfg.beta.is_empty()),
                ("degree_cap", cfg.degree_cap.is_some()),
                ("max_level", cfg.max_level.is_some()),
                ("quad_points", cfg.quad_points.is_some()),
            ] {
                if present {
                    return Err(CliError::Config(format!(
                        "`{field}` does not apply to family `abstract`"
                    )));
                }
            }
            if modes.is_empty() {
                return Err(CliError::Config("abstract_modes is empty".into()));
            }
            let pairs = modes.iter().map(|m| (m.lambda, m.c)).collect();
            return Ok(common(None, Actuator::Abstract(pairs)));
        }

        if cfg.abstract_modes.is_some() {
            return Err(CliError::Config(
                "abstract_modes requires family `abstract`".into(),
            ));
        }
        let d = cfg.d.unwrap_or(1);
        if d == 0 || d > MAX_DIMENSION {
            return Err(CliError::Config(format!(
                "d = {d} is outside 1..={MAX_DIMENSION}"
            )));
        }
        let alpha = per_axis("alpha", &cfg.alpha, d)?;
        let (families, decomposition) = match family {
            FamilyChoice::Laguerre => {
                if !cfg.beta.is_empty() || cfg.degree_cap.is_some() {
                    return Err(CliError::Config(
                        "`beta` and `degree_cap` do not apply to family `laguerre`".into(),
                    ));
                }
                let n = cfg
                    .max_level
                    .ok_or_else(|| CliError::Config("family `laguerre` needs max_level".into()))?;
                let families = alpha
                    .iter()
                    .map(|&a| PolyFamily1D::laguerre(a))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(CliError::config)?;
                let dec = laguerre_levels(d, n)
                    .map_err(CliError::config)?
                    .with_alpha(alpha);
                (families, dec)
            }
            FamilyChoice::Jacobi => {
                if cfg.max_level.is_some() {
                    return Err(CliError::Config(
                        "`max_level` does not apply to family `jacobi`".into(),
                    ));
                }
                let beta = per_axis("beta", &cfg.beta, d)?;
                let k = cfg
                    .degree_cap
                    .ok_or_else(|| CliError::Config("family `jacobi` needs degree_cap".into()))?;
                let families = alpha
                    .iter()
                    .zip(&beta)
                    .map(|(&a, &b)| PolyFamily1D::jacobi(a, b))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(CliError::config)?;
                let dec = jacobi_levels(d, &alpha, &beta, k).map_err(CliError::config)?;
                (families, dec)
            }
            FamilyChoice::Abstract => unreachable!(),
        };
        let top = decomposition.max_axis_degree();
        if top > MAX_DEGREE {
            return Err(CliError::Config(format!(
                "degree {top} exceeds the maximum {MAX_DEGREE}"
            )));
        }
        let quad_points = cfg
            .quad_points
            .unwrap_or_else(|| (2 * top + 2).clamp(16, MAX_DEGREE));
        if quad_points == 0 || quad_points > MAX_DEGREE {
            return Err(CliError::Config(format!(
                "quad_points = {quad_points} is outside 1..={MAX_DEGREE}"
            )));
        }

        let actuator = match (&cfg.b_expr, &cfg.b_coeffs) {
            (Some(src), None) => Actuator::Expression(
                Expr::parse(src, d).map_err(|e| CliError::Config(format!("b_expr: {e}")))?,
            ),
            (None, Some(c)) => {
                if c.len() != decomposition.mode_count() {
                    return Err(CliError::Config(format!(
                        "b_coeffs has {} entries, the basis has {} modes",
                        c.len(),
                        decomposition.mode_count()
                    )));
                }
                Actuator::Coefficients(c.clone())
            }
            _ => unreachable!("source count checked above"),
        };
        Ok(common(
            Some(Basis {
                families,
                decomposition,
                quad_points,
            }),
            actuator,
        ))
    }
}
