//! Built-in experiments, selectable with `--preset <name>`.

use crate::config::{AbstractMode, ExperimentConfig, FamilyChoice, StateSpec};
use crate::error::CliError;

pub const PRESET_NAMES: [&str; 3] = ["laguerre-1d-cir", "legendre-2d", "bessel-abstract"];

/// CIR generator in one variable: Laguerre with `α = n/2 - 1` for `n = 3`.
fn laguerre_1d_cir() -> ExperimentConfig {
    let dimension_of_process = 3.0;
    ExperimentConfig {
        family: Some(FamilyChoice::Laguerre),
        d: Some(1),
        alpha: vec![dimension_of_process / 2.0 - 1.0],
        max_level: Some(20),
        quad_points: Some(64),
        t1: Some(1.0),
        b_expr: Some("exp(-x/2)".into()),
        z0: Some(StateSpec::Expression("exp(-x)".into())),
        z1: Some(StateSpec::Coefficients(vec![0.0; 21])),
        segments: Some(8),
        eval_points: Some(vec![0.0, 0.5, 1.0, 2.0, 5.0, 10.0]),
        ..Default::default()
    }
}

fn legendre_2d() -> ExperimentConfig {
    ExperimentConfig {
        family: Some(FamilyChoice::Jacobi),
        d: Some(2),
        alpha: vec![0.0],
        beta: vec![0.0],
        degree_cap: Some(4),
        quad_points: Some(24),
        t1: Some(0.5),
        b_expr: Some("exp(x1 + x2/2)".into()),
        z0: Some(StateSpec::Expression("x1*x2".into())),
        z1: Some(StateSpec::Expression("0".into())),
        segments: Some(8),
        eval_points: Some(vec![-1.0, -0.5, 0.0, 0.5, 1.0]),
        ..Default::default()
    }
}

/// Legendre operator eigenvalues `n(n+1)` with gains `1/(n+1)`.
fn bessel_abstract() -> ExperimentConfig {
    let modes: Vec<AbstractMode> = (0..=20)
        .map(|n| {
            let n = n as f64;
            AbstractMode {
                lambda: n * (n + 1.0),
                c: 1.0 / (n + 1.0),
            }
        })
        .collect();
    let count = modes.len();
    ExperimentConfig {
        family: Some(FamilyChoice::Abstract),
        t1: Some(1.0),
        tau: Some(1e-3),
        abstract_modes: Some(modes),
        z0: Some(StateSpec::Coefficients(
            (0..count).map(|n| 1.0 / (n + 1) as f64).collect(),
        )),
        z1: Some(StateSpec::Coefficients(vec![0.0; count])),
        segments: Some(10),
        ..Default::default()
    }
}

pub fn preset(name: &str) -> Result<ExperimentConfig, CliError> {
    match name {
        "laguerre-1d-cir" => Ok(laguerre_1d_cir()),
        "legendre-2d" => Ok(legendre_2d()),
        "bessel-abstract" => Ok(bessel_abstract()),
        other => Err(CliError::Config(format!(
            "unknown preset `{other}` (available: {})",
            PRESET_NAMES.join(", ")
        ))),
    }
}
