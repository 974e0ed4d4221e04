use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use spectral_control_core::control::{
    certify_approx_controllability, default_tau, gramian_spectrum, min_norm_steering, ControlError,
};
use spectral_control_core::quadrature::{CoeffError, QuadError};
use spectral_control_core::{
    DiagonalSystem, Expr, FamilyKind, ModeIndex, Profile, SpectralState, TensorQuadrature, Verdict,
};

use crate::config::{Actuator, Basis, Experiment, FamilyChoice, StateSpec};
use crate::error::CliError;
use crate::table::{fmt_f64, Table};

pub const THREADS_ENV: &str = "SPECTRAL_CONTROL_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Basis,
    Coeffs,
    Check,
    Steer,
    Gramian,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::Basis,
        Command::Coeffs,
        Command::Check,
        Command::Steer,
        Command::Gramian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Basis => "basis",
            Command::Coeffs => "coeffs",
            Command::Check => "check",
            Command::Steer => "steer",
            Command::Gramian => "gramian",
        }
    }
}

/// Result of one command: a JSON document, zero or more CSV tables, and
/// whether the analysis came out negative (exit code 2).
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub command: Command,
    pub json: String,
    pub tables: Vec<Table>,
    pub negative: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.negative {
            2
        } else {
            0
        }
    }

    /// Writes `<command>.json` and each table into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| CliError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let mut written = Vec::new();
        let json_path = dir.join(format!("{}.json", self.command.name()));
        std::fs::write(&json_path, &self.json).map_err(io(&json_path))?;
        written.push(json_path);
        for table in &self.tables {
            let path = dir.join(&table.file_name);
            std::fs::write(&path, table.to_csv()?).map_err(io(&path))?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Parses `SPECTRAL_CONTROL_THREADS` (positive integer) if set.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Config(format!("{THREADS_ENV}: {e}"))),
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!(
                "{THREADS_ENV} must be a positive integer, got `{raw}`"
            ))),
        },
    }
}

/// Executes commands on a dedicated thread pool. Parallel work is split per
/// mode and every reduction stays sequential, so outputs do not depend on the
/// pool size.
pub struct Runner {
    pool: rayon::ThreadPool,
}

impl Runner {
    pub fn new(threads: Option<usize>) -> Result<Self, CliError> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            builder = builder.num_threads(n);
        }
        let pool = builder.build().map_err(CliError::numeric)?;
        Ok(Self { pool })
    }

    pub fn run(&self, command: Command, exp: &Experiment) -> Result<Outcome, CliError> {
        self.pool.install(|| match command {
            Command::Basis => cmd_basis(exp),
            Command::Coeffs => cmd_coeffs(exp),
            Command::Check => cmd_check(exp),
            Command::Steer => cmd_steer(exp),
            Command::Gramian => cmd_gramian(exp),
        })
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(CliError::numeric)?;
    s.push('\n');
    Ok(s)
}

fn quad_error(e: QuadError) -> CliError {
    match e {
        QuadError::Eigen(inner) => CliError::numeric(inner),
        other => CliError::config(other),
    }
}

/// A truncated system together with the per-mode labels and level numbers.
struct Built {
    system: DiagonalSystem,
    labels: Vec<String>,
    levels: Vec<usize>,
    grid: Option<TensorQuadrature>,
}

fn label(index: &ModeIndex) -> String {
    match index {
        ModeIndex::Multi(m) => m
            .entries()
            .iter()
            .map(|k| k.to_string())
            .collect::<Vec<_>>()
            .join(";"),
        ModeIndex::Abstract(n) => n.to_string(),
    }
}

fn tensor_grid(basis: &Basis) -> Result<TensorQuadrature, CliError> {
    TensorQuadrature::new(
        &basis.families,
        basis.quad_points,
        basis.decomposition.max_axis_degree(),
    )
    .map_err(quad_error)
}

/// `<f, p_ν>` for every mode of the basis, one parallel task per mode.
fn project<P: Profile + Sync>(
    what: &str,
    f: &P,
    basis: &Basis,
    grid: &TensorQuadrature,
) -> Result<Vec<f64>, CliError> {
    let samples = grid.sample(f).map_err(|e| match e {
        CoeffError::Quad(q) => quad_error(q),
        CoeffError::ArityMismatch { .. } => CliError::config(e),
        CoeffError::Evaluation { node, error } => CliError::Config(format!(
            "{what} cannot be evaluated at quadrature node {node}: {error}"
        )),
    })?;
    let indices: Vec<_> = basis.decomposition.modes().map(|(_, _, idx)| idx).collect();
    let coeffs = indices
        .par_iter()
        .map(|idx| grid.coefficient(&samples, idx.entries()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(quad_error)?;
    if let Some(k) = coeffs.iter().position(|c| !c.is_finite()) {
        return Err(CliError::Numeric(format!(
            "{what}: coefficient of mode {k} is not finite"
        )));
    }
    Ok(coeffs)
}

fn build(exp: &Experiment) -> Result<Built, CliError> {
    let (system, grid) = match (&exp.actuator, &exp.basis) {
        (Actuator::Abstract(pairs), _) => (
            DiagonalSystem::from_abstract(pairs).map_err(CliError::config)?,
            None,
        ),
        (Actuator::Coefficients(c), Some(basis)) => (
            DiagonalSystem::from_decomposition(&basis.decomposition, c)
                .map_err(CliError::config)?,
            None,
        ),
        (Actuator::Expression(b), Some(basis)) => {
            let grid = tensor_grid(basis)?;
            let c = project("b_expr", b, basis, &grid)?;
            (
                DiagonalSystem::from_decomposition(&basis.decomposition, &c)
                    .map_err(CliError::config)?,
                Some(grid),
            )
        }
        (_, None) => {
            unreachable!("resolved experiments with a basis-dependent actuator carry a basis")
        }
    };
    let labels = system.modes().iter().map(|m| label(&m.index)).collect();
    let levels = match &exp.basis {
        Some(basis) => basis
            .decomposition
            .modes()
            .map(|(level, _, _)| level)
            .collect(),
        None => system
            .eigenvalue_levels()
            .iter()
            .enumerate()
            .flat_map(|(level, range)| range.clone().map(move |_| level))
            .collect(),
    };
    Ok(Built {
        system,
        labels,
        levels,
        grid,
    })
}

fn resolve_state(
    name: &str,
    spec: &StateSpec,
    exp: &Experiment,
    built: &mut Built,
) -> Result<SpectralState, CliError> {
    let m = built.system.mode_count();
    match spec {
        StateSpec::Coefficients(c) => {
            if c.len() != m {
                return Err(CliError::Config(format!(
                    "{name} has {} entries, the system has {m} modes",
                    c.len()
                )));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(CliError::Config(format!("{name} has non-finite entries")));
            }
            Ok(SpectralState::new(c.clone()))
        }
        StateSpec::Expression(src) => {
            let basis = exp.basis.as_ref().ok_or_else(|| {
                CliError::Config(format!("{name}: expressions need a polynomial basis"))
            })?;
            let expr = Expr::parse(src, basis.families.len())
                .map_err(|e| CliError::Config(format!("{name}: {e}")))?;
            if built.grid.is_none() {
                built.grid = Some(tensor_grid(basis)?);
            }
            let grid = built.grid.as_ref().expect("grid just built");
            Ok(SpectralState::new(project(name, &expr, basis, grid)?))
        }
    }
}

#[derive(Serialize)]
struct BasisAxis {
    axis: usize,
    family: FamilyKind,
    alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    mass: f64,
    max_degree: usize,
    recurrence_diag: Vec<f64>,
    recurrence_offdiag: Vec<f64>,
    points: Vec<f64>,
    /// `values[j][n] = p_n(points[j])`
    values: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct BasisReport {
    dimension: usize,
    axes: Vec<BasisAxis>,
}

fn cmd_basis(exp: &Experiment) -> Result<Outcome, CliError> {
    let basis = exp
        .basis
        .as_ref()
        .ok_or_else(|| CliError::Config("`basis` needs family laguerre or jacobi".into()))?;
    let top = basis.decomposition.max_axis_degree();
    let mut table = Table::new("basis.csv", vec!["axis", "degree", "x", "value"]);
    let mut axes = Vec::new();
    for (axis, fam) in basis.families.iter().enumerate() {
        let points = match &exp.eval_points {
            Some(p) => p.clone(),
            None => match fam.kind() {
                FamilyKind::Laguerre => vec![0.0, 0.5, 1.0, 2.0, 5.0],
                FamilyKind::Jacobi => vec![-1.0, -0.5, 0.0, 0.5, 1.0],
            },
        };
        let values = points
            .iter()
            .map(|&x| fam.eval_orthonormal(top, x))
            .collect::<Result<Vec<_>, _>>()
            .map_err(CliError::config)?;
        for (x, row) in points.iter().zip(&values) {
            for (n, v) in row.iter().enumerate() {
                table.push(vec![
                    axis.to_string(),
                    n.to_string(),
                    fmt_f64(*x),
                    fmt_f64(*v),
                ]);
            }
        }
        let rec = fam.recurrence_coeffs(top + 1).map_err(CliError::config)?;
        axes.push(BasisAxis {
            axis,
            family: fam.kind(),
            alpha: fam.alpha(),
            beta: (fam.kind() == FamilyKind::Jacobi).then(|| fam.beta()),
            mass: fam.mass(),
            max_degree: top,
            recurrence_diag: rec.diag,
            recurrence_offdiag: rec.offdiag,
            points,
            values,
        });
    }
    let report = BasisReport {
        dimension: basis.families.len(),
        axes,
    };
    Ok(Outcome {
        command: Command::Basis,
        json: to_json(&report)?,
        tables: vec![table],
        negative: false,
    })
}

#[derive(Serialize)]
struct CoeffRow<'a> {
    mode_index: usize,
    label: &'a str,
    level: usize,
    lambda: f64,
    c: f64,
}

#[derive(Serialize)]
struct CoeffReport<'a> {
    family: FamilyChoice,
    mode_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    quad_points: Option<usize>,
    modes: Vec<CoeffRow<'a>>,
}

fn cmd_coeffs(exp: &Experiment) -> Result<Outcome, CliError> {
    let built = build(exp)?;
    let mut table = Table::new(
        "coeffs.csv",
        vec!["mode_index", "multi_index", "lambda", "c"],
    );
    let mut modes = Vec::new();
    for (k, mode) in built.system.modes().iter().enumerate() {
        table.push(vec![
            k.to_string(),
            built.labels[k].clone(),
            fmt_f64(mode.lambda),
            fmt_f64(mode.c),
        ]);
        modes.push(CoeffRow {
            mode_index: k,
            label: &built.labels[k],
            level: built.levels[k],
            lambda: mode.lambda,
            c: mode.c,
        });
    }
    let report = CoeffReport {
        family: exp.family,
        mode_count: modes.len(),
        quad_points: built.grid.as_ref().map(|g| g.nodes_per_axis()),
        modes,
    };
    Ok(Outcome {
        command: Command::Coeffs,
        json: to_json(&report)?,
        tables: vec![table],
        negative: false,
    })
}

#[derive(Serialize)]
struct CheckRow<'a> {
    mode_index: usize,
    label: &'a str,
    magnitude: f64,
}

#[derive(Serialize)]
struct CheckReport<'a> {
    tau: f64,
    verdict: Verdict,
    witness: Option<usize>,
    witness_label: Option<&'a str>,
    mode_count: usize,
    per_mode: Vec<CheckRow<'a>>,
}

fn cmd_check(exp: &Experiment) -> Result<Outcome, CliError> {
    let built = build(exp)?;
    let tau = exp.tau.unwrap_or_else(|| default_tau(&built.system));
    let cert = certify_approx_controllability(&built.system, tau).map_err(CliError::config)?;
    let mut table = Table::new(
        "certificate.csv",
        vec!["mode_index", "multi_index", "abs_c", "above_tau"],
    );
    let per_mode: Vec<CheckRow> = cert
        .per_mode
        .iter()
        .map(|g| CheckRow {
            mode_index: g.index,
            label: &built.labels[g.index],
            magnitude: g.magnitude,
        })
        .collect();
    for row in &per_mode {
        table.push(vec![
            row.mode_index.to_string(),
            row.label.to_string(),
            fmt_f64(row.magnitude),
            (row.magnitude > tau).to_string(),
        ]);
    }
    let report = CheckReport {
        tau,
        verdict: cert.verdict,
        witness: cert.witness,
        witness_label: cert.witness.map(|k| built.labels[k].as_str()),
        mode_count: per_mode.len(),
        per_mode,
    };
    Ok(Outcome {
        command: Command::Check,
        json: to_json(&report)?,
        tables: vec![table],
        negative: !cert.is_certified(),
    })
}

#[derive(Serialize)]
struct SteerRow<'a> {
    mode_index: usize,
    label: &'a str,
    lambda: f64,
    c: f64,
    gramian: f64,
    eta: f64,
    segment_gramian: f64,
    segment_eta: f64,
}

#[derive(Serialize)]
struct SteerReport<'a> {
    t1: f64,
    segments: usize,
    mode_count: usize,
    /// `‖z(t1) - z1‖` on the truncation for the emitted control.
    terminal_error: f64,
    control_energy: f64,
    minimum_energy: f64,
    modes: Vec<SteerRow<'a>>,
}

fn cmd_steer(exp: &Experiment) -> Result<Outcome, CliError> {
    let mut built = build(exp)?;
    let z1_spec = exp
        .z1
        .as_ref()
        .ok_or_else(|| CliError::Config("`steer` needs a target z1".into()))?;
    let z1 = resolve_state("z1", z1_spec, exp, &mut built)?;
    let z0 = match &exp.z0 {
        Some(spec) => resolve_state("z0", spec, exp, &mut built)?,
        None => SpectralState::zeros(built.system.mode_count()),
    };
    let plan = min_norm_steering(&built.system, &z0, &z1, exp.t1, exp.segments).map_err(|e| match e {
        ControlError::Unreachable { mode, residual } => CliError::Negative(format!(
            "mode {mode} ({}) is unreachable: its actuator gain is zero but the required change is {residual:e}",
            built.labels[mode]
        )),
        ControlError::Evolution(inner) => CliError::config(inner),
        other => CliError::config(other),
    })?;
    let finite = plan
        .control
        .values()
        .iter()
        .flatten()
        .all(|v| v.is_finite())
        && plan.control_energy.is_finite()
        && plan.predicted_truncated_error.is_finite();
    if !finite {
        return Err(CliError::Numeric(
            "steering control overflowed; shorten the truncation or lengthen t1".into(),
        ));
    }

    let mut table = Table::new(
        "controls.csv",
        vec!["t_start", "t_end", "mode_index", "value"],
    );
    for (w, row) in plan.control.grid().windows(2).zip(plan.control.values()) {
        for (k, v) in row.iter().enumerate() {
            table.push(vec![
                fmt_f64(w[0]),
                fmt_f64(w[1]),
                k.to_string(),
                fmt_f64(*v),
            ]);
        }
    }
    let modes = built
        .system
        .modes()
        .iter()
        .enumerate()
        .map(|(k, m)| SteerRow {
            mode_index: k,
            label: &built.labels[k],
            lambda: m.lambda,
            c: m.c,
            gramian: plan.gramian[k],
            eta: plan.eta[k],
            segment_gramian: plan.segment_gramian[k],
            segment_eta: plan.segment_eta[k],
        })
        .collect();
    let report = SteerReport {
        t1: plan.t1,
        segments: plan.control.segments(),
        mode_count: built.system.mode_count(),
        terminal_error: plan.predicted_truncated_error,
        control_energy: plan.control_energy,
        minimum_energy: plan.minimum_energy,
        modes,
    };
    Ok(Outcome {
        command: Command::Steer,
        json: to_json(&report)?,
        tables: vec![table],
        negative: false,
    })
}

#[derive(Serialize)]
struct GramianRow<'a> {
    mode_index: usize,
    label: &'a str,
    lambda: f64,
    c: f64,
    sigma: f64,
}

#[derive(Serialize)]
struct GramianOut<'a> {
    t1: f64,
    mode_count: usize,
    decay_ratio: f64,
    /// Descending.
    singular_values: Vec<f64>,
    entries: Vec<GramianRow<'a>>,
}

fn cmd_gramian(exp: &Experiment) -> Result<Outcome, CliError> {
    let built = build(exp)?;
    let report = gramian_spectrum(&built.system, exp.t1).map_err(CliError::config)?;
    let mut table = Table::new("gramian.csv", vec!["mode_index", "lambda", "c", "sigma"]);
    for e in &report.entries {
        table.push(vec![
            e.mode_index.to_string(),
            fmt_f64(e.lambda),
            fmt_f64(e.c),
            fmt_f64(e.sigma),
        ]);
    }
    let out = GramianOut {
        t1: report.t1,
        mode_count: report.mode_count,
        decay_ratio: report.decay_ratio,
        singular_values: report.singular_values.clone(),
        entries: report
            .entries
            .iter()
            .map(|e| GramianRow {
                mode_index: e.mode_index,
                label: &built.labels[e.mode_index],
                lambda: e.lambda,
                c: e.c,
                sigma: e.sigma,
            })
            .collect(),
    };
    Ok(Outcome {
        command: Command::Gramian,
        json: to_json(&out)?,
        tables: vec![table],
        negative: false,
    })
}
