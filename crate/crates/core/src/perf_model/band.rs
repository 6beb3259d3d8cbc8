use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hmm::{Regime, TransitionModel};

const SUM_TOL: f64 = 1e-9;

/// Measured probabilities of moving `δ = j - i` chords, `δ ∈ [-17, 6]`.
pub const TABLE3: [(i32, f64); 24] = [
    (-17, 0.00015),
    (-16, 0.00044),
    (-15, 0.00058),
    (-14, 0.00044),
    (-13, 0.00029),
    (-12, 0.00007),
    (-11, 0.00022),
    (-10, 0.00051),
    (-9, 0.00065),
    (-8, 0.00124),
    (-7, 0.00182),
    (-6, 0.00073),
    (-5, 0.00153),
    (-4, 0.00218),
    (-3, 0.00509),
    (-2, 0.00516),
    (-1, 0.00886),
    (0, 0.11342),
    (1, 0.84531),
    (2, 0.00610),
    (3, 0.00073),
    (4, 0.00029),
    (5, 0.00015),
    (6, 0.0),
];

pub fn table3() -> BTreeMap<i32, f64> {
    TABLE3.into_iter().collect()
}

/// Band shape: the table of `a_δ` and the retained offsets `-d1..=d2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandParams {
    pub a_table: BTreeMap<i32, f64>,
    pub d1: usize,
    pub d2: usize,
}

impl BandParams {
    pub fn new(a_table: BTreeMap<i32, f64>, d1: usize, d2: usize) -> Result<Self> {
        if a_table.values().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::ParameterInconsistency("band probabilities must be nonnegative".into()));
        }
        let band = BandParams { a_table, d1, d2 };
        if band.band_mass() <= 0.0 {
            return Err(Error::ParameterInconsistency(format!(
                "no probability mass in offsets -{d1}..={d2}"
            )));
        }
        Ok(band)
    }

    /// Band of width `d` from the published table, placed by [`select_band`].
    pub fn table3(d: usize) -> Result<Self> {
        let table = table3();
        let (d1, d2) = select_band(d, &table)?;
        Self::new(table, d1, d2)
    }

    pub fn width(&self) -> usize {
        self.d1 + self.d2 + 1
    }

    pub fn a(&self, delta: i32) -> f64 {
        self.a_table.get(&delta).copied().unwrap_or(0.0)
    }

    /// `Σ_{-d1 <= δ <= d2} a_δ`.
    pub fn band_mass(&self) -> f64 {
        band_sum(&self.a_table, self.d1, self.d2)
    }

    /// `1 - band_mass()`: the natural choice of `γ̄` for this band.
    pub fn residual_mass(&self) -> f64 {
        (1.0 - self.band_mass()).max(0.0)
    }
}

fn band_sum(table: &BTreeMap<i32, f64>, d1: usize, d2: usize) -> f64 {
    table.range(-(d1 as i32)..=d2 as i32).map(|(_, p)| p).sum()
}

/// The `(d1, d2)` with `d1 + d2 + 1 = d` maximizing the in-band table mass.
/// Ties go to the larger `d1`.
pub fn select_band(d: usize, a_table: &BTreeMap<i32, f64>) -> Result<(usize, usize)> {
    if d == 0 {
        return Err(Error::ParameterInconsistency("band width must be at least 1".into()));
    }
    let mut best = (d - 1, 0, f64::NEG_INFINITY);
    for d1 in (0..d).rev() {
        let d2 = d - 1 - d1;
        let mass = band_sum(a_table, d1, d2);
        if mass > best.2 {
            best = (d1, d2, mass);
        }
    }
    Ok((best.0, best.1))
}

/// `(counts_i + ε) / Σ (counts + ε)`.
pub fn smooth_histogram(counts: &[f64], epsilon: f64) -> Result<Vec<f64>> {
    if counts.is_empty() {
        return Err(Error::DegenerateDistribution("histogram has no bins".into()));
    }
    if !(epsilon >= 0.0) || counts.iter().any(|&c| !c.is_finite() || c < 0.0) {
        return Err(Error::DegenerateDistribution(
            "counts and epsilon must be finite and nonnegative".into(),
        ));
    }
    let total: f64 = counts.iter().map(|c| c + epsilon).sum();
    if total <= 0.0 {
        return Err(Error::DegenerateDistribution("histogram is empty".into()));
    }
    Ok(counts.iter().map(|c| (c + epsilon) / total).collect())
}

fn check_distribution(name: &str, p: &[f64], n: usize) -> Result<()> {
    if p.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: p.len(),
        });
    }
    if p.iter().any(|&x| !x.is_finite() || x < 0.0) {
        return Err(Error::ParameterInconsistency(format!("{name} has negative entries")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > SUM_TOL {
        return Err(Error::ParameterInconsistency(format!("{name} sums to {sum}")));
    }
    Ok(())
}

/// Outer-product transition model for a score of `n` chords.
///
/// The intended skip mass of row `i` is `S_i = N·γ̄·s_i`; the band entries
/// `a_δ` are scaled to fill the remaining `1 - S_i`. Band entries that fall
/// off either end of the score add their mass to `S_i`, so every row stays
/// band-plus-rank-1. With `γ̄ = 0` there is no skip channel and truncated
/// rows are renormalized within the band instead.
pub fn build_transition_model(
    n: usize,
    band: &BandParams,
    s: &[f64],
    r: &[f64],
    gamma_bar: f64,
) -> Result<TransitionModel> {
    if n == 0 {
        return Err(Error::InvalidScore("score has no chords".into()));
    }
    check_distribution("stop distribution", s, n)?;
    check_distribution("resumption distribution", r, n)?;
    if !(0.0..1.0).contains(&gamma_bar) {
        return Err(Error::ParameterInconsistency(format!("gamma_bar {gamma_bar} outside [0, 1)")));
    }
    let (d1, d2) = (band.d1, band.d2);
    let width = band.width();
    let total = band.band_mass();
    if total <= 0.0 {
        return Err(Error::ParameterInconsistency("band carries no probability".into()));
    }
    let mut alpha = vec![0.0; n * width];
    let mut skip = vec![0.0; n];
    for i in 0..n {
        let intended = n as f64 * gamma_bar * s[i];
        if intended > 1.0 {
            return Err(Error::ParameterInconsistency(format!(
                "skip mass {intended} of chord {i} exceeds 1"
            )));
        }
        let row = &mut alpha[i * width..(i + 1) * width];
        let mut kept = 0.0;
        for (k, slot) in row.iter_mut().enumerate() {
            let j = i as i64 + k as i64 - d1 as i64;
            if (0..n as i64).contains(&j) {
                *slot = band.a(k as i32 - d1 as i32);
                kept += *slot;
            }
        }
        if gamma_bar == 0.0 {
            if kept <= 0.0 {
                return Err(Error::ParameterInconsistency(format!(
                    "chord {i} has no reachable successor without skips"
                )));
            }
            row.iter_mut().for_each(|a| *a /= kept);
        } else {
            let scale = (1.0 - intended) / total;
            row.iter_mut().for_each(|a| *a *= scale);
            skip[i] = intended + (total - kept) * scale;
        }
    }
    TransitionModel::new(d1, d2, alpha, skip, r.to_vec(), Regime::Nonnegative)
}

/// Skip model with uniform stop and resumption distributions; `γ̄ = 0` gives
/// the model without skips.
pub fn uniform_model_of(n: usize, band: &BandParams, gamma_bar: f64) -> Result<TransitionModel> {
    let u = vec![1.0 / n.max(1) as f64; n];
    build_transition_model(n, band, &u, &u, gamma_bar)
}

/// The three model variants compared in evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Stop and resumption distributions estimated from data.
    Outer,
    /// Uniform skip probability.
    Uniform,
    /// No skips beyond the band.
    NoSkip,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Outer => "outer",
            ModelKind::Uniform => "uniform",
            ModelKind::NoSkip => "noskip",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "outer" | "O" => Ok(ModelKind::Outer),
            "uniform" | "U" => Ok(ModelKind::Uniform),
            "noskip" | "N" => Ok(ModelKind::NoSkip),
            other => Err(Error::ParameterInconsistency(format!("unknown model kind {other:?}"))),
        }
    }
}

/// Transition model of the requested kind. `Outer` needs `(s, r)`.
pub fn transition_for(
    kind: ModelKind,
    n: usize,
    band: &BandParams,
    gamma_bar: f64,
    stop_resume: Option<(&[f64], &[f64])>,
) -> Result<TransitionModel> {
    match kind {
        ModelKind::Outer => {
            let (s, r) = stop_resume.ok_or_else(|| {
                Error::ParameterInconsistency("outer-product model needs s and r".into())
            })?;
            build_transition_model(n, band, s, r, gamma_bar)
        }
        ModelKind::Uniform => uniform_model_of(n, band, gamma_bar),
        ModelKind::NoSkip => uniform_model_of(n, band, 0.0),
    }
}
