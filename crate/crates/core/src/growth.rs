//! Growth rates: nondecreasing maps `[0, ∞) → [1, ∞)` that diverge at infinity.
//!
//! Exponential rates are `e^{αt}`, polynomial rates are `(t + 1)^α`, and
//! tabulated rates interpolate a knot table piecewise-linearly.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum RateKind {
    Exponential { exponent: f64 },
    Polynomial { exponent: f64 },
    Tabulated { table: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthRate {
    kind: RateKind,
}

impl GrowthRate {
    pub fn exponential(exponent: f64) -> Result<Self> {
        check_exponent(exponent)?;
        Ok(Self {
            kind: RateKind::Exponential { exponent },
        })
    }

    pub fn polynomial(exponent: f64) -> Result<Self> {
        check_exponent(exponent)?;
        Ok(Self {
            kind: RateKind::Polynomial { exponent },
        })
    }

    /// Knot times must be nonnegative and strictly increasing. Values are not
    /// screened here; [`GrowthRate::validate_on_grid`] reports bad ones.
    pub fn tabulated(table: Vec<(f64, f64)>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::Argument("tabulated rate needs at least one knot".into()));
        }
        for &(t, v) in &table {
            if !t.is_finite() || !v.is_finite() || t < 0.0 {
                return Err(Error::Argument(format!("invalid knot ({t}, {v})")));
            }
        }
        if table.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Argument(
                "tabulated knot times must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            kind: RateKind::Tabulated { table },
        })
    }

    /// The constant rate 1 on `[0, end]`, as a two-knot table.
    pub fn unit(end: f64) -> Result<Self> {
        Self::tabulated(vec![(0.0, 1.0), (end, 1.0)])
    }

    pub fn kind(&self) -> &RateKind {
        &self.kind
    }

    pub fn evaluate(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(match &self.kind {
            RateKind::Exponential { exponent } => (exponent * t).exp(),
            RateKind::Polynomial { exponent } => (t + 1.0).powf(*exponent),
            RateKind::Tabulated { table } => interpolate(table, t)?,
        })
    }

    /// `rate(t) / rate(s)`. Exactly 1 when `t == s`; exponential ratios are
    /// formed as `e^{α(t−s)}` so they stay finite where `e^{αt}` overflows.
    pub fn ratio(&self, t: f64, s: f64) -> Result<f64> {
        check_time(t)?;
        check_time(s)?;
        if t == s {
            // Still reject out-of-span queries for tabulated rates.
            self.evaluate(t)?;
            return Ok(1.0);
        }
        Ok(match &self.kind {
            RateKind::Exponential { exponent } => (exponent * (t - s)).exp(),
            RateKind::Polynomial { exponent } => ((t + 1.0) / (s + 1.0)).powf(*exponent),
            RateKind::Tabulated { table } => interpolate(table, t)? / interpolate(table, s)?,
        })
    }

    /// Checks `rate ≥ 1` and monotonicity at the grid points. Divergence can
    /// only be flagged heuristically from finite data.
    pub fn validate_on_grid(&self, grid: &[f64]) -> Result<ValidationReport> {
        if grid.is_empty() {
            return Err(Error::Argument("validation grid is empty".into()));
        }
        if grid[0] < 0.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Argument(
                "validation grid must be nonnegative and strictly increasing".into(),
            ));
        }
        let values = grid
            .iter()
            .map(|&t| self.evaluate(t))
            .collect::<Result<Vec<_>>>()?;

        let mut violations = Vec::new();
        for (&t, &v) in grid.iter().zip(&values) {
            if v < 1.0 {
                violations.push(RateViolation::BelowOne { t, value: v });
            }
        }
        for i in 1..grid.len() {
            if values[i] < values[i - 1] {
                violations.push(RateViolation::Decreasing {
                    from: grid[i - 1],
                    to: grid[i],
                });
            }
        }
        let first = values[0];
        let last = values[values.len() - 1];
        Ok(ValidationReport {
            violations,
            divergence_suspect: last < 10.0 * first,
        })
    }
}

fn check_exponent(exponent: f64) -> Result<()> {
    if exponent.is_finite() && exponent > 0.0 {
        Ok(())
    } else {
        Err(Error::Argument(format!(
            "growth-rate exponent must be positive, got {exponent}"
        )))
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        Err(Error::Domain(format!("growth rates are defined for t >= 0, got {t}")))
    } else {
        Ok(())
    }
}

fn interpolate(table: &[(f64, f64)], t: f64) -> Result<f64> {
    let start = table[0].0;
    let end = table[table.len() - 1].0;
    if t < start || t > end {
        return Err(Error::Extrapolation { t, start, end });
    }
    let i = table.partition_point(|&(k, _)| k <= t);
    if i == table.len() {
        return Ok(table[table.len() - 1].1);
    }
    let (t0, v0) = table[i - 1];
    let (t1, v1) = table[i];
    Ok(v0 + (v1 - v0) * (t - t0) / (t1 - t0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateViolation {
    BelowOne { t: f64, value: f64 },
    Decreasing { from: f64, to: f64 },
}

impl fmt::Display for RateViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateViolation::BelowOne { t, .. } => write!(f, "value < 1 at t={t}"),
            RateViolation::Decreasing { from, to } => write!(f, "decreasing on [{from},{to}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<RateViolation>,
    /// Set when the rate grows by less than a factor 10 across the grid.
    pub divergence_suspect: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// The four rates `(h, k, μ, ν)` governing the stable, unstable and central
/// (upper and lower) behaviour.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSet {
    pub h: GrowthRate,
    pub k: GrowthRate,
    pub mu: GrowthRate,
    pub nu: GrowthRate,
}

impl RateSet {
    pub fn exponential(exponents: [f64; 4]) -> Result<Self> {
        Ok(Self {
            h: GrowthRate::exponential(exponents[0])?,
            k: GrowthRate::exponential(exponents[1])?,
            mu: GrowthRate::exponential(exponents[2])?,
            nu: GrowthRate::exponential(exponents[3])?,
        })
    }

    pub fn polynomial(exponents: [f64; 4]) -> Result<Self> {
        Ok(Self {
            h: GrowthRate::polynomial(exponents[0])?,
            k: GrowthRate::polynomial(exponents[1])?,
            mu: GrowthRate::polynomial(exponents[2])?,
            nu: GrowthRate::polynomial(exponents[3])?,
        })
    }

    pub fn unit(end: f64) -> Result<Self> {
        let one = GrowthRate::unit(end)?;
        Ok(Self {
            h: one.clone(),
            k: one.clone(),
            mu: one.clone(),
            nu: one,
        })
    }
}
