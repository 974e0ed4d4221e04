//! Multi-indices and their grouping into eigenvalue levels.
//!
//! Laguerre: level `n` holds every `ν` with `|ν| = n` (the Wiener-Laguerre
//! chaos, dimension `C(n+d-1, n)`). Jacobi: indices with `max κ_i ≤ K` are
//! grouped by `r(κ) = Σ κ_i(κ_i+α_i+β_i+1)` (the modified Wiener-Jacobi
//! decomposition).
//!
//! The flattened mode order used by every other module is: levels ascending,
//! members inside a level in descending lexicographic order, so that the
//! Laguerre level 2 in two variables reads `(2,0), (1,1), (0,2)`.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use crate::evolution::SpectralState;

/// Default cap on the number of enumerated multi-indices.
pub const DEFAULT_INDEX_CAP: usize = 1_000_000;

/// Absolute tolerance for merging Jacobi eigenvalues into one level.
pub const MERGE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChaosError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("expected {expected} {name} parameters, got {found}")]
    ParameterCount {
        name: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{name}[{axis}] = {value} must be > -1/2 for the Jacobi level decomposition")]
    ParameterDomain {
        name: &'static str,
        axis: usize,
        value: f64,
    },
    #[error("enumeration would produce more than {cap} multi-indices")]
    Capacity { cap: usize },
    #[error("state has {found} coefficients but the decomposition has {expected} modes")]
    Shape { expected: usize, found: usize },
    #[error("level {index} out of range (decomposition has {count} levels)")]
    LevelOutOfRange { index: usize, count: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        Self(entries)
    }

    pub fn zero(d: usize) -> Self {
        Self(vec![0; d])
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    /// `|ν|`
    pub fn total_degree(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn max_degree(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

fn descending_lex(a: &MultiIndex, b: &MultiIndex) -> Ordering {
    b.0.cmp(&a.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecompositionKind {
    Laguerre,
    Jacobi,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChaosLevel {
    pub eigenvalue: f64,
    pub members: Vec<MultiIndex>,
    /// Set when indices outside the enumeration cap could share this
    /// eigenvalue, i.e. the level may be incomplete.
    #[serde(skip_serializing_if = "core::ops::Not::not")]
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChaosDecomposition {
    kind: DecompositionKind,
    d: usize,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    #[serde(skip)]
    degree_cap: usize,
    levels: Vec<ChaosLevel>,
    #[serde(skip)]
    offsets: Vec<usize>,
}

fn binomial_checked(n: usize, k: usize) -> Option<usize> {
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// All `ν ∈ N^d` with `|ν| = n`, descending lexicographic.
fn compositions(d: usize, n: usize) -> Vec<MultiIndex> {
    fn rec(prefix: &mut Vec<usize>, d: usize, remaining: usize, out: &mut Vec<MultiIndex>) {
        if prefix.len() + 1 == d {
            prefix.push(remaining);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for k in (0..=remaining).rev() {
            prefix.push(k);
            rec(prefix, d, remaining - k, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(d), d, n, &mut out);
    out
}

/// Wiener-Laguerre chaos levels `0..=max_level` in `d` variables.
pub fn laguerre_levels(d: usize, max_level: usize) -> Result<ChaosDecomposition, ChaosError> {
    laguerre_levels_with_cap(d, max_level, DEFAULT_INDEX_CAP)
}

pub fn laguerre_levels_with_cap(
    d: usize,
    max_level: usize,
    cap: usize,
) -> Result<ChaosDecomposition, ChaosError> {
    if d == 0 {
        return Err(ChaosError::ZeroDimension);
    }
    // number of ν with |ν| ≤ N is C(N+d, d)
    let total = max_level
        .checked_add(d)
        .and_then(|top| binomial_checked(top, d))
        .ok_or(ChaosError::Capacity { cap })?;
    if total > cap {
        return Err(ChaosError::Capacity { cap });
    }
    let levels = (0..=max_level)
        .map(|n| ChaosLevel {
            eigenvalue: n as f64,
            members: compositions(d, n),
            truncated: false,
        })
        .collect();
    Ok(ChaosDecomposition::assemble(
        DecompositionKind::Laguerre,
        d,
        Vec::new(),
        Vec::new(),
        max_level,
        levels,
    ))
}

/// Modified Wiener-Jacobi levels for indices with `max κ_i ≤ degree_cap`.
pub fn jacobi_levels(
    d: usize,
    alpha: &[f64],
    beta: &[f64],
    degree_cap: usize,
) -> Result<ChaosDecomposition, ChaosError> {
    jacobi_levels_with_cap(d, alpha, beta, degree_cap, DEFAULT_INDEX_CAP)
}

pub fn jacobi_levels_with_cap(
    d: usize,
    alpha: &[f64],
    beta: &[f64],
    degree_cap: usize,
    cap: usize,
) -> Result<ChaosDecomposition, ChaosError> {
    if d == 0 {
        return Err(ChaosError::ZeroDimension);
    }
    for (name, params) in [("alpha", alpha), ("beta", beta)] {
        if params.len() != d {
            return Err(ChaosError::ParameterCount {
                name,
                expected: d,
                found: params.len(),
            });
        }
        if let Some((axis, &value)) = params
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > -0.5))
        {
            return Err(ChaosError::ParameterDomain { name, axis, value });
        }
    }
    let side = degree_cap + 1;
    let total = (0..d)
        .try_fold(1usize, |acc, _| acc.checked_mul(side))
        .filter(|&t| t <= cap)
        .ok_or(ChaosError::Capacity { cap })?;

    let shift: Vec<f64> = alpha.iter().zip(beta).map(|(a, b)| a + b + 1.0).collect();
    let eig = |kappa: &[usize]| -> f64 {
        kappa
            .iter()
            .zip(&shift)
            .map(|(&k, s)| {
                let k = k as f64;
                k * (k + s)
            })
            .sum()
    };

    let mut indexed: Vec<(f64, MultiIndex)> = Vec::with_capacity(total);
    let mut kappa = vec![0usize; d];
    for _ in 0..total {
        indexed.push((eig(&kappa), MultiIndex(kappa.clone())));
        for axis in (0..d).rev() {
            kappa[axis] += 1;
            if kappa[axis] <= degree_cap {
                break;
            }
            kappa[axis] = 0;
        }
    }
    indexed.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| descending_lex(&a.1, &b.1)));

    // smallest eigenvalue reachable by an index outside the cap
    let outside = shift
        .iter()
        .map(|s| {
            let k = side as f64;
            k * (k + s)
        })
        .fold(f64::INFINITY, f64::min);

    let mut levels: Vec<ChaosLevel> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (r, kappa) in indexed {
        match levels.last_mut() {
            Some(level) if r - last <= MERGE_TOLERANCE => level.members.push(kappa),
            _ => levels.push(ChaosLevel {
                eigenvalue: r,
                members: vec![kappa],
                truncated: r >= outside - MERGE_TOLERANCE,
            }),
        }
        last = r;
    }
    for level in &mut levels {
        level.members.sort_by(descending_lex);
    }
    Ok(ChaosDecomposition::assemble(
        DecompositionKind::Jacobi,
        d,
        alpha.to_vec(),
        beta.to_vec(),
        degree_cap,
        levels,
    ))
}

impl ChaosDecomposition {
    fn assemble(
        kind: DecompositionKind,
        d: usize,
        alpha: Vec<f64>,
        beta: Vec<f64>,
        degree_cap: usize,
        levels: Vec<ChaosLevel>,
    ) -> Self {
        let mut offsets = Vec::with_capacity(levels.len() + 1);
        offsets.push(0);
        for level in &levels {
            offsets.push(offsets.last().unwrap() + level.members.len());
        }
        Self {
            kind,
            d,
            alpha,
            beta,
            degree_cap,
            levels,
            offsets,
        }
    }

    /// Records the per-axis Laguerre parameters (levels do not depend on them).
    pub fn with_alpha(mut self, alpha: Vec<f64>) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn kind(&self) -> DecompositionKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// `N` for Laguerre (max total degree), `K` for Jacobi (per-axis cap).
    pub fn degree_cap(&self) -> usize {
        self.degree_cap
    }

    pub fn levels(&self) -> &[ChaosLevel] {
        &self.levels
    }

    pub fn mode_count(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Flat mode range occupied by `level`.
    pub fn level_range(&self, level: usize) -> Option<Range<usize>> {
        (level < self.levels.len()).then(|| self.offsets[level]..self.offsets[level + 1])
    }

    /// `(level index, eigenvalue, multi-index)` in flat mode order.
    pub fn modes(&self) -> impl Iterator<Item = (usize, f64, &MultiIndex)> + '_ {
        self.levels
            .iter()
            .enumerate()
            .flat_map(|(n, level)| level.members.iter().map(move |m| (n, level.eigenvalue, m)))
    }

    /// Largest single-axis degree across all members.
    pub fn max_axis_degree(&self) -> usize {
        self.modes()
            .map(|(_, _, m)| m.max_degree())
            .max()
            .unwrap_or(0)
    }

    /// Orthogonal projection onto level `level`: zeroes every other coefficient.
    pub fn project(
        &self,
        state: &SpectralState,
        level: usize,
    ) -> Result<SpectralState, ChaosError> {
        project(state, self, level)
    }
}

/// Free-function form of [`ChaosDecomposition::project`].
pub fn project(
    state: &SpectralState,
    decomposition: &ChaosDecomposition,
    level: usize,
) -> Result<SpectralState, ChaosError> {
    let expected = decomposition.mode_count();
    if state.len() != expected {
        return Err(ChaosError::Shape {
            expected,
            found: state.len(),
        });
    }
    let range = decomposition
        .level_range(level)
        .ok_or(ChaosError::LevelOutOfRange {
            index: level,
            count: decomposition.levels.len(),
        })?;
    let mut out = vec![0.0; expected];
    out[range.clone()].copy_from_slice(&state.coeffs()[range]);
    Ok(SpectralState::new(out))
}
