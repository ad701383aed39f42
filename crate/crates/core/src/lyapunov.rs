//! Lyapunov-type norm families and both directions of the characterisation
//! theorems.
//!
//! Two time-indexed norms are built from a trichotomic pair. The forward
//! family is
//!
//! ```text
//! ‖x‖_t = sup_{τ≥t} h(τ)/h(t) ‖U(τ,t)P1(t)x‖
//!       + sup_{r≤t} k(t)/k(r) ‖V2(t,r)P2(t)x‖
//!       + sup_{τ≥t} μ(t)/μ(τ) ‖U(τ,t)P3(t)x‖
//! ```
//!
//! and the backward family replaces the last term by
//! `sup_{r≤t} ν(r)/ν(t) ‖V3(t,r)P3(t)x‖`. In these norms the trichotomy
//! inequalities hold without any constant.
//!
//! Numerically, `sup_{τ≥t}` is truncated to `τ ∈ t + {0, δ, 2δ, …} ⊂ [t, t + T_h]`
//! and `sup_{r≤t}` runs over the global grid points in `[0, t]` together
//! with `t` itself. The effect of the truncation is measured by rebuilding
//! with `2 T_h`; that relative change becomes the slack allowed in the
//! theorem checks.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolution::EvolutionOperator;
use crate::grid::{delta_pairs, index_of};
use crate::growth::RateSet;
use crate::linalg::{self, Mat, Vector};
use crate::projectors::{restricted_inverse_with, ProjectorFamily};
use crate::trichotomy::{check_nonuniform, NBound, TrichotomyReport};

/// Horizon-doubling changes at or above this relative size are flagged.
pub const HORIZON_SENSITIVITY_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormStyle {
    /// Central term is the forward supremum governed by `μ`.
    Forward,
    /// Central term is the backward supremum governed by `ν`.
    Backward,
}

impl NormStyle {
    pub fn name(self) -> &'static str {
        match self {
            NormStyle::Forward => "forward",
            NormStyle::Backward => "backward",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormConfig {
    /// Truncation `T_h` of the forward suprema.
    pub horizon: f64,
    /// Spacing `δ` of the forward samples.
    pub resolution: f64,
}

/// The matrices whose images are maximised in each of the three terms.
#[derive(Debug, Clone)]
struct TermSet {
    terms: [Vec<Mat>; 3],
}

impl TermSet {
    fn value(&self, x: &Vector) -> f64 {
        self.terms
            .iter()
            .map(|term| term.iter().map(|m| linalg::apply_norm(m, x)).fold(0.0, f64::max))
            .sum()
    }
}

#[derive(Clone)]
pub struct LyapunovNormFamily {
    style: NormStyle,
    op: EvolutionOperator,
    family: ProjectorFamily,
    rates: RateSet,
    config: NormConfig,
    past_grid: Vec<f64>,
    cache: Vec<TermSet>,
    horizon_sensitivity: f64,
}

impl fmt::Debug for LyapunovNormFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LyapunovNormFamily")
            .field("style", &self.style)
            .field("config", &self.config)
            .field("grid_points", &self.past_grid.len())
            .field("horizon_sensitivity", &self.horizon_sensitivity)
            .finish()
    }
}

impl LyapunovNormFamily {
    /// Builds the family and precomputes its terms at every point of `past_grid`.
    pub fn build(
        style: NormStyle,
        op: &EvolutionOperator,
        family: &ProjectorFamily,
        rates: &RateSet,
        past_grid: &[f64],
        config: NormConfig,
    ) -> Result<Self> {
        if !(config.horizon.is_finite() && config.horizon > 0.0) {
            return Err(Error::Argument(format!("horizon must be positive, got {}", config.horizon)));
        }
        if !(config.resolution.is_finite() && config.resolution > 0.0) {
            return Err(Error::Argument(format!(
                "sampling resolution must be positive, got {}",
                config.resolution
            )));
        }
        if past_grid.is_empty() || past_grid[0] < 0.0 || past_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Argument(
                "norm grid must be nonempty, nonnegative and strictly increasing".into(),
            ));
        }
        if family.dim() != op.dim() {
            return Err(Error::Structural(format!(
                "projector family has dimension {} but the operator has dimension {}",
                family.dim(),
                op.dim()
            )));
        }
        let mut norms = Self {
            style,
            op: op.clone(),
            family: family.clone(),
            rates: rates.clone(),
            config,
            past_grid: past_grid.to_vec(),
            cache: Vec::new(),
            horizon_sensitivity: 0.0,
        };
        norms.cache = past_grid
            .par_iter()
            .map(|&t| norms.term_set(t, config.horizon))
            .collect::<Result<Vec<_>>>()?;

        let basis: Vec<Vector> = (0..op.dim()).map(|i| unit(op.dim(), i)).collect();
        let deltas = past_grid
            .par_iter()
            .zip(norms.cache.par_iter())
            .map(|(&t, base)| {
                let doubled = norms.term_set(t, 2.0 * config.horizon)?;
                Ok(basis
                    .iter()
                    .map(|x| {
                        let a = base.value(x);
                        let b = doubled.value(x);
                        if b == a {
                            0.0
                        } else {
                            (b - a).abs() / a.abs().max(f64::MIN_POSITIVE)
                        }
                    })
                    .fold(0.0, f64::max))
            })
            .collect::<Result<Vec<f64>>>()?;
        norms.horizon_sensitivity = deltas.into_iter().fold(0.0, f64::max);
        Ok(norms)
    }

    fn term_set(&self, t: f64, horizon: f64) -> Result<TermSet> {
        let p = self.family.at(t)?;
        let live = |j: usize| self.family.range_basis(j, t).map(|b| b.ncols() > 0);
        let steps = (horizon / self.config.resolution + 1e-9).floor() as usize;
        let future: Vec<f64> = (0..=steps)
            .map(|m| t + m as f64 * self.config.resolution)
            .collect();
        let mut past: Vec<f64> = self.past_grid.iter().copied().filter(|&r| r <= t).collect();
        if past.last() != Some(&t) {
            past.push(t);
        }

        let forward_ops = future
            .iter()
            .map(|&tau| self.op.evaluate(tau, t).map(|u| (tau, u)))
            .collect::<Result<Vec<_>>>()?;
        let backward_ops = past
            .iter()
            .map(|&r| self.op.evaluate(t, r).map(|u| (r, u)))
            .collect::<Result<Vec<_>>>()?;
        let inverse = |u: &Mat, j: usize, r: f64| {
            restricted_inverse_with(u, &self.family, j, t, r).map_err(|e| match e {
                Error::NotStronglyInvariant { .. } => {
                    Error::Structural(format!("norm family needs restricted inverses: {e}"))
                }
                other => other,
            })
        };

        let mut terms: [Vec<Mat>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        if live(1)? {
            for (tau, u) in &forward_ops {
                terms[0].push(u * &p[0] * self.rates.h.ratio(*tau, t)?);
            }
        }
        if live(2)? {
            for (r, u) in &backward_ops {
                terms[1].push(inverse(u, 2, *r)? * self.rates.k.ratio(t, *r)?);
            }
        }
        if live(3)? {
            match self.style {
                NormStyle::Forward => {
                    for (tau, u) in &forward_ops {
                        terms[2].push(u * &p[2] * self.rates.mu.ratio(t, *tau)?);
                    }
                }
                NormStyle::Backward => {
                    for (r, u) in &backward_ops {
                        terms[2].push(inverse(u, 3, *r)? * self.rates.nu.ratio(*r, t)?);
                    }
                }
            }
        }
        Ok(TermSet { terms })
    }

    /// The norm of `x` at time `t`. Grid times use the precomputed terms.
    pub fn evaluate(&self, t: f64, x: &Vector) -> Result<f64> {
        if x.len() != self.op.dim() {
            return Err(Error::Structural(format!(
                "vector has length {}, expected {}",
                x.len(),
                self.op.dim()
            )));
        }
        match index_of(&self.past_grid, t) {
            Some(i) => Ok(self.cache[i].value(x)),
            None => Ok(self.term_set(t, self.config.horizon)?.value(x)),
        }
    }

    pub fn style(&self) -> NormStyle {
        self.style
    }

    pub fn config(&self) -> NormConfig {
        self.config
    }

    pub fn grid(&self) -> &[f64] {
        &self.past_grid
    }

    /// Largest relative change of basis-vector norms when the horizon is doubled.
    pub fn horizon_sensitivity(&self) -> f64 {
        self.horizon_sensitivity
    }

    pub fn horizon_flagged(&self) -> bool {
        self.horizon_sensitivity >= HORIZON_SENSITIVITY_LIMIT
    }

    pub fn operator(&self) -> &EvolutionOperator {
        &self.op
    }

    pub fn family(&self) -> &ProjectorFamily {
        &self.family
    }

    pub fn rates(&self) -> &RateSet {
        &self.rates
    }

    fn same_sources(&self, other: &Self) -> bool {
        self.op.same_as(&other.op) && self.family.same_as(&other.family) && self.rates == other.rates
    }
}

fn unit(n: usize, i: usize) -> Vector {
    let mut v = Vector::zeros(n);
    v[i] = 1.0;
    v
}

/// The standard basis followed by `samples` random unit vectors drawn from a
/// ChaCha8 generator seeded with `seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestVectors {
    pub seed: u64,
    pub samples: usize,
    pub vectors: Vec<Vector>,
}

impl TestVectors {
    pub fn new(dim: usize, samples: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut vectors: Vec<Vector> = (0..dim).map(|i| unit(dim, i)).collect();
        while vectors.len() < dim + samples {
            let v = Vector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
            let n = v.norm();
            if n > 1e-8 {
                vectors.push(v / n);
            }
        }
        Self { seed, samples, vectors }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport {
    pub style: NormStyle,
    pub grid: Vec<f64>,
    /// Estimated `C(t) = max_x ‖x‖_t / ‖x‖` at each grid time.
    pub c: Vec<f64>,
    /// `min (‖x‖_t − ‖x‖) / ‖x‖` over every sampled `(t, x)`.
    pub lower_margin: f64,
    /// `max_t C(t)`: the candidate uniform constant `c`.
    pub uniform_constant: f64,
    /// Whether `C(t) ≤ 3 N̂1(t)` held, when a full-norm envelope was supplied.
    pub cross_check: Option<bool>,
    pub seed: u64,
    pub samples: usize,
    pub passed: bool,
    pub notes: Vec<String>,
}

/// Sandwich test `‖x‖ ≤ ‖x‖_t ≤ C(t)‖x‖` on the test vectors. The lower bound
/// is checked against `-tol`; `full_norm`, when given, adds the cross-check
/// `C(t) ≤ 3 N̂1(t)`.
pub fn check_compatibility(
    norms: &LyapunovNormFamily,
    grid: &[f64],
    vectors: &TestVectors,
    tol: f64,
    full_norm: Option<&TrichotomyReport>,
) -> Result<CompatibilityReport> {
    if grid.is_empty() {
        return Err(Error::Argument("compatibility grid is empty".into()));
    }
    let rows = grid
        .par_iter()
        .map(|&t| {
            let mut c = 0.0f64;
            let mut lower = f64::INFINITY;
            for x in &vectors.vectors {
                let nx = x.norm();
                if nx == 0.0 {
                    continue;
                }
                let v = norms.evaluate(t, x)?;
                c = c.max(v / nx);
                lower = lower.min((v - nx) / nx);
            }
            Ok((c, lower))
        })
        .collect::<Result<Vec<_>>>()?;
    let c: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let lower_margin = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let uniform_constant = c.iter().copied().fold(0.0, f64::max);

    let mut notes = Vec::new();
    let mut passed = lower_margin >= -tol && uniform_constant.is_finite();
    if lower_margin < -tol {
        notes.push(format!("lower bound violated by {:e}", -lower_margin));
    }
    let cross_check = match full_norm {
        Some(report) => {
            let mut ok = true;
            for (&t, &ct) in grid.iter().zip(&c) {
                let n1 = report.envelope_at(t).ok_or_else(|| {
                    Error::Structural(format!("full-norm report has no grid point {t}"))
                })?;
                if ct > 3.0 * n1 * (1.0 + 1e-9) {
                    notes.push(format!("C({t}) = {ct} exceeds 3 N1({t}) = {}", 3.0 * n1));
                    ok = false;
                }
            }
            passed &= ok;
            Some(ok)
        }
        None => None,
    };
    Ok(CompatibilityReport {
        style: norms.style,
        grid: grid.to_vec(),
        c,
        lower_margin,
        uniform_constant,
        cross_check,
        seed: vectors.seed,
        samples: vectors.samples,
        passed,
        notes,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremRecord {
    pub tag: String,
    pub t: f64,
    pub s: f64,
    /// Index into the test vectors.
    pub vector: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// `(rhs − lhs) / max(1, rhs)`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremReport {
    pub label: String,
    pub records: Vec<TheoremRecord>,
    /// Smallest margin per tag, in first-seen order.
    pub worst: Vec<(String, f64)>,
    pub slack: f64,
    pub tol: f64,
    pub seed: u64,
    pub passed: bool,
}

impl TheoremReport {
    fn assemble(label: &str, records: Vec<TheoremRecord>, slack: f64, tol: f64, seed: u64) -> Self {
        let mut worst: Vec<(String, f64)> = Vec::new();
        for r in &records {
            let m = if r.margin.is_nan() { f64::NEG_INFINITY } else { r.margin };
            match worst.iter_mut().find(|(tag, _)| *tag == r.tag) {
                Some((_, w)) => *w = w.min(m),
                None => worst.push((r.tag.clone(), m)),
            }
        }
        let passed = worst.iter().all(|&(_, w)| w >= -(tol + slack));
        Self {
            label: label.to_string(),
            records,
            worst,
            slack,
            tol,
            seed,
            passed,
        }
    }

    pub fn worst_margin(&self) -> f64 {
        self.worst.iter().map(|w| w.1).fold(f64::INFINITY, f64::min)
    }

    pub fn worst_for(&self, tag: &str) -> Option<f64> {
        self.worst.iter().find(|w| w.0 == tag).map(|w| w.1)
    }
}

impl fmt::Display for TheoremReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] worst margin {:e} (tol {:e} + slack {:e})",
            self.label,
            if self.passed { "pass" } else { "FAIL" },
            self.worst_margin(),
            self.tol,
            self.slack
        )
    }
}

fn margin(lhs: f64, rhs: f64) -> f64 {
    (rhs - lhs) / rhs.max(1.0)
}

fn check_pairing(forward: &LyapunovNormFamily, backward: &LyapunovNormFamily) -> Result<()> {
    if forward.style != NormStyle::Forward || backward.style != NormStyle::Backward {
        return Err(Error::Structural(
            "expected a forward family and a backward family, in that order".into(),
        ));
    }
    if !forward.same_sources(backward) {
        return Err(Error::Structural(
            "norm families were built from different operators, projectors or rates".into(),
        ));
    }
    Ok(())
}

/// Which right-hand sides a theorem check uses.
#[derive(Clone, Copy, PartialEq, Eq)]
enum RightHandSide {
    /// `‖P_i x‖` in the norm of the relevant time.
    Projected,
    /// `‖x‖` in the norm of the relevant time.
    Full,
}

fn theorem_records(
    forward: &LyapunovNormFamily,
    backward: &LyapunovNormFamily,
    grid: &[f64],
    vectors: &TestVectors,
    rhs_kind: RightHandSide,
) -> Result<Vec<TheoremRecord>> {
    let op = &forward.op;
    let family = &forward.family;
    let rates = &forward.rates;
    let suffix = match rhs_kind {
        RightHandSide::Projected => "3",
        RightHandSide::Full => "4",
    };
    let per_pair = delta_pairs(grid)
        .par_iter()
        .map(|&(t, s)| {
            let u = op.evaluate(t, s)?;
            let ps = family.at(s)?;
            let pt = family.at(t)?;
            let w2 = restricted_inverse_with(&u, family, 2, t, s)?;
            let w3 = restricted_inverse_with(&u, family, 3, t, s)?;
            let h = rates.h.ratio(t, s)?;
            let k = rates.k.ratio(t, s)?;
            let mu = rates.mu.ratio(s, t)?;
            let nu = rates.nu.ratio(s, t)?;
            let mut out = Vec::with_capacity(vectors.len() * 4);
            for (id, x) in vectors.vectors.iter().enumerate() {
                let (rhs_h, rhs_k, rhs_mu, rhs_nu) = match rhs_kind {
                    RightHandSide::Projected => (
                        forward.evaluate(s, &(&ps[0] * x))?,
                        backward.evaluate(t, &(&pt[1] * x))?,
                        forward.evaluate(s, &(&ps[2] * x))?,
                        backward.evaluate(t, &(&pt[2] * x))?,
                    ),
                    RightHandSide::Full => {
                        let fs = forward.evaluate(s, x)?;
                        let bt = backward.evaluate(t, x)?;
                        (fs, bt, fs, bt)
                    }
                };
                let rows = [
                    ("h", h * forward.evaluate(t, &(&u * (&ps[0] * x)))?, rhs_h),
                    ("k", k * backward.evaluate(s, &(&w2 * x))?, rhs_k),
                    ("mu", mu * forward.evaluate(t, &(&u * (&ps[2] * x)))?, rhs_mu),
                    ("nu", nu * backward.evaluate(s, &(&w3 * x))?, rhs_nu),
                ];
                for (letter, lhs, rhs) in rows {
                    out.push(TheoremRecord {
                        tag: format!("{letter}t{suffix}"),
                        t,
                        s,
                        vector: id,
                        lhs,
                        rhs,
                        margin: margin(lhs, rhs),
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_pair.into_iter().flatten().collect())
}

/// Checks the constant-free inequalities `(ht3)`–`(νt3)` on every grid pair
/// and test vector. Each inequality is divided by the rate value on its
/// right-hand side, so recorded sides stay finite.
pub fn verify_main_theorem(
    forward: &LyapunovNormFamily,
    backward: &LyapunovNormFamily,
    grid: &[f64],
    vectors: &TestVectors,
    tol: f64,
) -> Result<TheoremReport> {
    check_pairing(forward, backward)?;
    let records = theorem_records(forward, backward, grid, vectors, RightHandSide::Projected)?;
    let slack = forward.horizon_sensitivity.max(backward.horizon_sensitivity);
    Ok(TheoremReport::assemble("main-theorem", records, slack, tol, vectors.seed))
}

/// `(ht4)`–`(νt4)`, plus the projection lemma `‖P_i(t)x‖_t ≤ ‖x‖_t` for both
/// families at every grid time (tags `lemma-forward-P1`, …).
pub fn verify_unprojected_theorem(
    forward: &LyapunovNormFamily,
    backward: &LyapunovNormFamily,
    grid: &[f64],
    vectors: &TestVectors,
    tol: f64,
) -> Result<TheoremReport> {
    check_pairing(forward, backward)?;
    let mut records = theorem_records(forward, backward, grid, vectors, RightHandSide::Full)?;
    let family = &forward.family;
    let lemma = grid
        .par_iter()
        .map(|&t| {
            let p = family.at(t)?;
            let mut out = Vec::new();
            for norms in [forward, backward] {
                for (id, x) in vectors.vectors.iter().enumerate() {
                    let rhs = norms.evaluate(t, x)?;
                    for (i, pi) in p.iter().enumerate() {
                        let lhs = norms.evaluate(t, &(pi * x))?;
                        out.push(TheoremRecord {
                            tag: format!("lemma-{}-P{}", norms.style.name(), i + 1),
                            t,
                            s: t,
                            vector: id,
                            lhs,
                            rhs,
                            margin: margin(lhs, rhs),
                        });
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    records.extend(lemma.into_iter().flatten());
    let slack = forward.horizon_sensitivity.max(backward.horizon_sensitivity);
    Ok(TheoremReport::assemble("unprojected-theorem", records, slack, tol, vectors.seed))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SufficiencyReport {
    /// `C(t)`: the larger of the two families' estimates.
    pub c: Vec<f64>,
    /// Candidate `N(t) = sup_{s≤t} C(s) Σ_i ‖P_i(s)‖`, inflated by `1 + tol + slack`.
    pub candidate: Vec<(f64, f64)>,
    pub trichotomy: TrichotomyReport,
    pub passed: bool,
}

/// Builds `N` from the measured compatibility functions and confirms that it
/// bounds the definition-form factors on the same grid.
pub fn verify_sufficiency(
    forward: &LyapunovNormFamily,
    backward: &LyapunovNormFamily,
    grid: &[f64],
    vectors: &TestVectors,
    tol: f64,
) -> Result<SufficiencyReport> {
    check_pairing(forward, backward)?;
    let cf = check_compatibility(forward, grid, vectors, tol, None)?;
    let cb = check_compatibility(backward, grid, vectors, tol, None)?;
    let slack = forward.horizon_sensitivity.max(backward.horizon_sensitivity);
    let c: Vec<f64> = cf.c.iter().zip(&cb.c).map(|(a, b)| a.max(*b)).collect();
    let mut running = 0.0f64;
    let candidate = grid
        .iter()
        .zip(&c)
        .map(|(&s, &cs)| {
            running = running.max(cs * forward.family.norm_sum(s)?);
            Ok((s, running * (1.0 + tol + slack)))
        })
        .collect::<Result<Vec<_>>>()?;
    let bound = NBound::Tabulated(candidate.clone());
    let trichotomy = check_nonuniform(&forward.op, &forward.family, &forward.rates, grid, Some(&bound))?;
    let passed = trichotomy.passed;
    Ok(SufficiencyReport {
        c,
        candidate,
        trichotomy,
        passed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateFamily {
    Exponential,
    Polynomial,
}

impl RateFamily {
    fn prefix(self) -> &'static str {
        match self {
            RateFamily::Exponential => "e",
            RateFamily::Polynomial => "p",
        }
    }
}

/// The theorem with four rates of one kind, re-expressed in the corollary
/// form `‖U(t,s)P1(s)x‖_t ≤ h(s)/h(t) ‖P1(s)x‖_s`, etc. (tags `et1`…`et4`
/// or `pt1`…`pt4`).
#[allow(clippy::too_many_arguments)]
pub fn instantiate_corollary(
    kind: RateFamily,
    exponents: [f64; 4],
    op: &EvolutionOperator,
    family: &ProjectorFamily,
    grid: &[f64],
    config: NormConfig,
    vectors: &TestVectors,
    tol: f64,
) -> Result<TheoremReport> {
    let rates = match kind {
        RateFamily::Exponential => RateSet::exponential(exponents)?,
        RateFamily::Polynomial => RateSet::polynomial(exponents)?,
    };
    let forward = LyapunovNormFamily::build(NormStyle::Forward, op, family, &rates, grid, config)?;
    let backward = LyapunovNormFamily::build(NormStyle::Backward, op, family, &rates, grid, config)?;
    let theorem = verify_main_theorem(&forward, &backward, grid, vectors, tol)?;
    let records = theorem
        .records
        .into_iter()
        .map(|r| {
            let (index, scale) = match r.tag.as_str() {
                "ht3" => (1, rates.h.ratio(r.t, r.s)?),
                "kt3" => (2, rates.k.ratio(r.t, r.s)?),
                "mut3" => (3, rates.mu.ratio(r.s, r.t)?),
                "nut3" => (4, rates.nu.ratio(r.s, r.t)?),
                other => unreachable!("unexpected theorem tag {other}"),
            };
            let (lhs, rhs) = (r.lhs / scale, r.rhs / scale);
            Ok(TheoremRecord {
                tag: format!("{}t{index}", kind.prefix()),
                lhs,
                rhs,
                margin: margin(lhs, rhs),
                ..r
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let label = match kind {
        RateFamily::Exponential => "corollary-exponential",
        RateFamily::Polynomial => "corollary-polynomial",
    };
    Ok(TheoremReport::assemble(label, records, theorem.slack, tol, vectors.seed))
}

/// Uniform classification: a constant `N` from the uniform check and a
/// uniform compatibility constant `c` with `c ≤ 3N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformClassification {
    pub n: f64,
    pub c: f64,
    pub passed: bool,
}

pub fn classify_uniform(
    uniform: &TrichotomyReport,
    forward: &CompatibilityReport,
    backward: &CompatibilityReport,
) -> UniformClassification {
    let n = uniform.uniform_constant;
    let c = forward.uniform_constant.max(backward.uniform_constant);
    UniformClassification {
        n,
        c,
        passed: uniform.passed && forward.passed && backward.passed && c <= 3.0 * n * (1.0 + 1e-12),
    }
}
