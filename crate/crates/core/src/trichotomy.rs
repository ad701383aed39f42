//! Required bounding factors for the four trichotomy inequalities and the
//! minimal nondecreasing envelopes `N̂(t)` they induce on a grid.
//!
//! For a pair `(t, s)` the factor of an inequality is the smallest `N` that
//! makes it hold for every `x`, i.e. a restricted operator norm:
//!
//! | inequality | factor                                   | binds  |
//! |------------|------------------------------------------|--------|
//! | stable     | `h(t)/h(s) ‖U(t,s)‖` on `Range P1(s)`    | `N(s)` |
//! | unstable   | `k(t)/k(s) ‖V2(t,s)‖` on `Range P2(t)`   | `N(t)` |
//! | central ↑  | `μ(s)/μ(t) ‖U(t,s)‖` on `Range P3(s)`    | `N(s)` |
//! | central ↓  | `ν(s)/ν(t) ‖V3(t,s)‖` on `Range P3(t)`   | `N(t)` |
//!
//! The full-norm form replaces each restricted norm by the norm of the
//! composed map on the whole space. Grid verdicts are evidence, not proof.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolution::EvolutionOperator;
use crate::grid::{delta_pairs, index_of};
use crate::growth::{GrowthRate, RateSet};
use crate::linalg::{self, Mat};
use crate::projectors::{check_orthogonal, restricted_inverse_with, ProjectorFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Inequality {
    /// Decay on `Range P1` at rate `h`.
    Stable,
    /// Growth on `Range P2` at rate `k`.
    Unstable,
    /// Upper control on `Range P3` by `μ`.
    CentralUpper,
    /// Lower control on `Range P3` by `ν`.
    CentralLower,
}

impl Inequality {
    pub const ALL: [Inequality; 4] = [
        Inequality::Stable,
        Inequality::Unstable,
        Inequality::CentralUpper,
        Inequality::CentralLower,
    ];

    /// Whether the inequality constrains `N` at the initial time `s`
    /// (otherwise at the final time `t`).
    pub fn binds_initial_time(self) -> bool {
        matches!(self, Inequality::Stable | Inequality::CentralUpper)
    }

    pub fn letter(self) -> &'static str {
        match self {
            Inequality::Stable => "h",
            Inequality::Unstable => "k",
            Inequality::CentralUpper => "mu",
            Inequality::CentralLower => "nu",
        }
    }

    fn index(self) -> usize {
        match self {
            Inequality::Stable => 0,
            Inequality::Unstable => 1,
            Inequality::CentralUpper => 2,
            Inequality::CentralLower => 3,
        }
    }

    fn projector(self) -> usize {
        match self {
            Inequality::Stable => 1,
            Inequality::Unstable => 2,
            Inequality::CentralUpper | Inequality::CentralLower => 3,
        }
    }
}

/// Which family of inequalities a factor belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    /// Right-hand sides use `‖P_i x‖`; tags `ht1` … `nut1`.
    Definition,
    /// Right-hand sides use `‖x‖`; tags `ht2` … `nut2`.
    FullNorm,
    /// Definition form read with a constant `N`; tags `uht1` … `unut1`.
    Uniform,
}

impl Form {
    pub fn tag(self, ineq: Inequality) -> String {
        match self {
            Form::Definition => format!("{}t1", ineq.letter()),
            Form::FullNorm => format!("{}t2", ineq.letter()),
            Form::Uniform => format!("u{}t1", ineq.letter()),
        }
    }
}

/// A candidate bounding function `N`.
#[derive(Debug, Clone, PartialEq)]
pub enum NBound {
    Constant(f64),
    /// `slope · a + intercept`.
    Affine { slope: f64, intercept: f64 },
    /// Step function through the knots, taking the value of the last knot at or before `a`.
    Tabulated(Vec<(f64, f64)>),
}

impl NBound {
    pub fn eval(&self, a: f64) -> f64 {
        match self {
            NBound::Constant(c) => *c,
            NBound::Affine { slope, intercept } => slope * a + intercept,
            NBound::Tabulated(knots) => {
                let i = knots.partition_point(|&(k, _)| k <= a);
                if i == 0 {
                    knots.first().map_or(f64::NAN, |k| k.1)
                } else {
                    knots[i - 1].1
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorRecord {
    pub t: f64,
    pub s: f64,
    pub inequality: Inequality,
    pub factor: f64,
    /// The relevant projector has rank zero.
    pub vacuous: bool,
    /// `N(binding time) − factor` when a bound was supplied.
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrichotomyReport {
    pub label: String,
    pub form: Form,
    pub grid: Vec<f64>,
    pub records: Vec<FactorRecord>,
    /// Per inequality, the largest factor attaching to each grid time.
    pub requirement: [Vec<f64>; 4],
    /// Running maximum of the requirements, floored at 1.
    pub envelope: Vec<f64>,
    pub uniform_constant: f64,
    pub bound: Option<NBound>,
    pub passed: bool,
    /// The envelope is still growing over the second half of the grid.
    pub nonuniform_evidence: bool,
    pub notes: Vec<String>,
}

impl TrichotomyReport {
    pub fn tag(&self, ineq: Inequality) -> String {
        self.form.tag(ineq)
    }

    pub fn envelope_at(&self, t: f64) -> Option<f64> {
        index_of(&self.grid, t).map(|i| self.envelope[i])
    }

    /// Largest factor of one inequality over the whole grid.
    pub fn max_factor(&self, ineq: Inequality) -> f64 {
        self.requirement[ineq.index()].iter().copied().fold(0.0, f64::max)
    }
}

impl fmt::Display for TrichotomyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] constant {:.6} over {} grid points (grid evidence)",
            self.label,
            if self.passed { "pass" } else { "FAIL" },
            self.uniform_constant,
            self.grid.len()
        )
    }
}

/// All four factors at one pair.
fn pair_factors(
    op: &EvolutionOperator,
    family: &ProjectorFamily,
    rates: &RateSet,
    t: f64,
    s: f64,
    form: Form,
) -> Result<[(f64, bool); 4]> {
    let u = op.evaluate(t, s)?;
    let mut out = [(0.0, true); 4];
    for ineq in Inequality::ALL {
        let j = ineq.projector();
        let (rate_ratio, map, domain) = match ineq {
            Inequality::Stable => (rates.h.ratio(t, s)?, u.clone(), (1, s)),
            Inequality::CentralUpper => (rates.mu.ratio(s, t)?, u.clone(), (3, s)),
            Inequality::Unstable => (
                rates.k.ratio(t, s)?,
                restricted_inverse_with(&u, family, j, t, s)?,
                (2, t),
            ),
            Inequality::CentralLower => (
                rates.nu.ratio(s, t)?,
                restricted_inverse_with(&u, family, j, t, s)?,
                (3, t),
            ),
        };
        let basis = family.range_basis(domain.0, domain.1)?;
        let vacuous = basis.ncols() == 0;
        let norm = match form {
            Form::Definition | Form::Uniform => linalg::restricted_norm(&map, &basis),
            Form::FullNorm => {
                let composed: Mat = if ineq.binds_initial_time() {
                    &map * family.member(domain.0, domain.1)?
                } else {
                    // The inverse maps already carry P_j(t) on the right.
                    map
                };
                linalg::spectral_norm(&composed)
            }
        };
        out[ineq.index()] = (if vacuous { 0.0 } else { rate_ratio * norm }, vacuous);
    }
    Ok(out)
}

/// The least `N` making one inequality hold at `(t, s)` (definition form).
pub fn required_factor(
    op: &EvolutionOperator,
    family: &ProjectorFamily,
    rates: &RateSet,
    t: f64,
    s: f64,
    inequality: Inequality,
) -> Result<f64> {
    Ok(pair_factors(op, family, rates, t, s, Form::Definition)?[inequality.index()].0)
}

fn evaluate_grid(
    label: &str,
    form: Form,
    op: &EvolutionOperator,
    family: &ProjectorFamily,
    rates: &RateSet,
    grid: &[f64],
    bound: Option<&NBound>,
) -> Result<TrichotomyReport> {
    if grid.is_empty() {
        return Err(Error::Argument("trichotomy grid is empty".into()));
    }
    if family.dim() != op.dim() {
        return Err(Error::Structural(format!(
            "projector family has dimension {} but the operator has dimension {}",
            family.dim(),
            op.dim()
        )));
    }
    let ortho = check_orthogonal(family, grid, 1e-8)?;
    if !ortho.passed {
        return Err(Error::Precondition(format!("projector family is not orthogonal: {ortho}")));
    }

    let pairs = delta_pairs(grid);
    let factors = pairs
        .par_iter()
        .map(|&(t, s)| pair_factors(op, family, rates, t, s, form))
        .collect::<Result<Vec<_>>>()?;

    let index = |time: f64| index_of(grid, time).expect("pair drawn from grid");
    let mut requirement: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; grid.len()]);
    let mut records = Vec::with_capacity(pairs.len() * 4);
    for (&(t, s), f) in pairs.iter().zip(&factors) {
        for ineq in Inequality::ALL {
            let (factor, vacuous) = f[ineq.index()];
            let at = if ineq.binds_initial_time() { s } else { t };
            let slot = &mut requirement[ineq.index()][index(at)];
            *slot = slot.max(if factor.is_nan() { f64::INFINITY } else { factor });
            records.push(FactorRecord {
                t,
                s,
                inequality: ineq,
                factor,
                vacuous,
                margin: bound.map(|b| b.eval(at) - factor),
            });
        }
    }

    let mut envelope = Vec::with_capacity(grid.len());
    let mut running = 1.0f64;
    for i in 0..grid.len() {
        for req in &requirement {
            running = running.max(req[i]);
        }
        envelope.push(running);
    }
    let uniform_constant = *envelope.last().expect("grid is nonempty");
    let nonuniform_evidence = grid.len() >= 3
        && envelope[grid.len() - 1] > envelope[grid.len() / 2] * (1.0 + 1e-6);

    let mut notes = Vec::new();
    let passed = match bound {
        Some(b) => {
            let mut ok = true;
            for (&a, &e) in grid.iter().zip(&envelope) {
                let limit = b.eval(a);
                if !(e <= limit * (1.0 + 1e-12) + 1e-12) {
                    if ok {
                        notes.push(format!("envelope {e} exceeds N({a}) = {limit}"));
                    }
                    ok = false;
                }
            }
            ok
        }
        None => uniform_constant.is_finite(),
    };
    Ok(TrichotomyReport {
        label: label.to_string(),
        form,
        grid: grid.to_vec(),
        records,
        requirement,
        envelope,
        uniform_constant,
        bound: bound.cloned(),
        passed,
        nonuniform_evidence,
        notes,
    })
}

/// Factors of the definition-form inequalities over every grid pair. Without
/// a bound the verdict only asks for a finite envelope.
pub fn check_nonuniform(
    op: &EvolutionOperator,
    family: &ProjectorFamily,
    rates: &RateSet,
    grid: &[f64],
    bound: Option<&NBound>,
) -> Result<TrichotomyReport> {
    evaluate_grid("nonuniform", Form::Definition, op, family, rates, grid, bound)
}

/// Full-norm form. Passes iff the envelope `N̂1` stays below
/// `sup_{s ≤ t} N̂(s) (‖P1(s)‖ + ‖P2(s)‖ + ‖P3(s)‖)` built from the
/// definition-form envelope `N̂`.
pub fn check_full_norm(
    op: &EvolutionOperator,
    family: &ProjectorFamily,
    rates: &RateSet,
    grid: &[f64],
) -> Result<TrichotomyReport> {
    let definition = check_nonuniform(op, family, rates, grid, None)?;
    let implied = NBound::Tabulated(full_norm_bound(&definition, family)?);
    let mut report = evaluate_grid("full-norm", Form::FullNorm, op, family, rates, grid, Some(&implied))?;
    if !report.passed {
        report
            .notes
            .push("full-norm envelope exceeds the bound implied by the definition-form envelope".into());
    }
    Ok(report)
}

/// `a ↦ max_{s ≤ a} N̂(s) Σ_i ‖P_i(s)‖` on the grid of `definition`.
pub fn full_norm_bound(definition: &TrichotomyReport, family: &ProjectorFamily) -> Result<Vec<(f64, f64)>> {
    let mut running = 0.0f64;
    definition.grid
        .iter()
        .zip(&definition.envelope)
        .map(|(&a, &n)| {
            running = running.max(n * family.norm_sum(a)?);
            Ok((a, running))
        })
        .collect()
}

/// The single constant over all grid pairs. With `n_const` the verdict
/// compares against it; without, it fails on growth evidence.
pub fn check_uniform(
    op: &EvolutionOperator,
    family: &ProjectorFamily,
    rates: &RateSet,
    grid: &[f64],
    n_const: Option<f64>,
) -> Result<TrichotomyReport> {
    if let Some(c) = n_const {
        if !(c >= 1.0) {
            return Err(Error::Argument(format!("uniform constant must be >= 1, got {c}")));
        }
    }
    let bound = n_const.map(NBound::Constant);
    let mut report = evaluate_grid("uniform", Form::Uniform, op, family, rates, grid, bound.as_ref())?;
    if n_const.is_none() {
        report.passed = report.uniform_constant.is_finite() && !report.nonuniform_evidence;
        if report.nonuniform_evidence {
            report.notes.push(format!(
                "required constant still growing at the grid end ({:.6}): non-uniform evidence",
                report.uniform_constant
            ));
        }
    }
    Ok(report)
}

/// `(h, k)`-dichotomy: the definition check with a rank-zero `P3`.
pub fn check_dichotomy(
    op: &EvolutionOperator,
    family: &ProjectorFamily,
    h: &GrowthRate,
    k: &GrowthRate,
    grid: &[f64],
    bound: Option<&NBound>,
) -> Result<TrichotomyReport> {
    for &t in grid {
        if linalg::spectral_norm(&family.member(3, t)?) > 1e-12 {
            return Err(Error::Precondition(format!("dichotomy needs P3 = 0, but P3({t}) is nonzero")));
        }
    }
    // μ and ν only ever multiply empty ranges here.
    let rates = RateSet {
        h: h.clone(),
        k: k.clone(),
        mu: h.clone(),
        nu: k.clone(),
    };
    let mut report = evaluate_grid("dichotomy", Form::Definition, op, family, &rates, grid, bound)?;
    report.notes.push("P3 = 0: central rows are vacuous".into());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::ExampleRates;
    use crate::grid::uniform_grid;
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    fn rates() -> RateSet {
        RateSet::exponential([1.0, 2.0, 0.5, 0.25]).unwrap()
    }

    fn example(u: GrowthRate) -> (EvolutionOperator, ProjectorFamily) {
        let family = ProjectorFamily::coordinate_split(1, 1, 1).unwrap();
        let r = rates();
        let ex = ExampleRates { u, h: r.h, k: r.k, mu: r.mu, nu: r.nu };
        (EvolutionOperator::closed_form_example(&ex, &family).unwrap(), family)
    }

    fn nonuniform() -> (EvolutionOperator, ProjectorFamily) {
        example(GrowthRate::polynomial(1.0).unwrap())
    }

    fn uniform() -> (EvolutionOperator, ProjectorFamily) {
        example(GrowthRate::unit(1e3).unwrap())
    }

    #[test]
    fn stable_factor_of_the_example() {
        let (op, fam) = nonuniform();
        let f = required_factor(&op, &fam, &rates(), 1.0, 0.0, Inequality::Stable).unwrap();
        assert_relative_eq!(f, 0.5, max_relative = 1e-14);
    }

    #[test]
    fn unstable_factor_grows_like_u() {
        let (op, fam) = nonuniform();
        for t in [0.5, 1.0, 3.0, 7.5] {
            let f = required_factor(&op, &fam, &rates(), t, 0.0, Inequality::Unstable).unwrap();
            assert_relative_eq!(f, t + 1.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn diagonal_factors_are_one() {
        let (op, fam) = nonuniform();
        for ineq in Inequality::ALL {
            assert_eq!(required_factor(&op, &fam, &rates(), 2.0, 2.0, ineq).unwrap(), 1.0);
        }
    }

    /// Oracle for the unstable factor straight from its definition:
    /// `sup ‖P2 x‖ / ‖U P2 x‖ = 1 / σ_min(U on Range P2(s))`.
    fn unstable_oracle(op: &EvolutionOperator, fam: &ProjectorFamily, r: &RateSet, t: f64, s: f64) -> f64 {
        let u = op.evaluate(t, s).unwrap();
        let basis = fam.range_basis(2, s).unwrap();
        let sv = linalg::singular_values(&(u * basis));
        r.k.ratio(t, s).unwrap() / sv.min()
    }

    #[test]
    fn inverse_route_matches_singular_value_route() {
        // A non-normal splitting so the two routes are not trivially equal.
        let p1 = Mat::from_row_slice(3, 3, &[1.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let p2 = Mat::from_row_slice(3, 3, &[0.0, -0.5, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let p3 = Mat::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let fam = ProjectorFamily::constant([p1.clone(), p2.clone(), p3.clone()]).unwrap();
        let op = EvolutionOperator::closed_form(3, move |t, s| {
            let d = t - s;
            Ok(&p1 * (-d).exp() + &p2 * ((1.5 * d).exp() * (1.0 + 0.3 * d)) + &p3 * (0.1 * d).exp())
        });
        let r = RateSet::exponential([0.5, 1.0, 0.2, 0.05]).unwrap();
        for &(t, s) in &[(1.0, 0.0), (3.0, 0.5), (4.0, 3.5)] {
            let via_inverse = required_factor(&op, &fam, &r, t, s, Inequality::Unstable).unwrap();
            assert_relative_eq!(via_inverse, unstable_oracle(&op, &fam, &r, t, s), max_relative = 1e-12);
        }
    }

    #[test]
    fn nonuniform_with_affine_bound() {
        let (op, fam) = nonuniform();
        let grid = uniform_grid(10.0, 0.5).unwrap();
        let bound = NBound::Affine { slope: 3.0, intercept: 3.0 };
        let r = check_nonuniform(&op, &fam, &rates(), &grid, Some(&bound)).unwrap();
        assert!(r.passed, "{:?}", r.notes);
        for (&a, &e) in grid.iter().zip(&r.envelope) {
            assert_relative_eq!(e, a + 1.0, max_relative = 1e-12);
        }
        assert_eq!(r.records.len(), 21 * 22 / 2 * 4);
    }

    #[test]
    fn nonuniform_with_constant_bound_fails() {
        let (op, fam) = nonuniform();
        let grid = uniform_grid(20.0, 0.5).unwrap();
        let r = check_nonuniform(&op, &fam, &rates(), &grid, Some(&NBound::Constant(10.0))).unwrap();
        assert!(!r.passed);
        assert!(r.uniform_constant >= 21.0 - 1e-9);
        let first_bad = grid.iter().zip(&r.envelope).find(|(_, &e)| e > 10.0).unwrap().0;
        assert!(*first_bad > 9.0);
    }

    #[test]
    fn identity_with_unit_rates_has_unit_envelope() {
        let fam = ProjectorFamily::coordinate_split(2, 1, 1).unwrap();
        let op = EvolutionOperator::identity(4);
        let grid = uniform_grid(5.0, 1.0).unwrap();
        let r = check_nonuniform(&op, &fam, &RateSet::unit(10.0).unwrap(), &grid, Some(&NBound::Constant(1.0)))
            .unwrap();
        assert!(r.passed);
        assert!(r.envelope.iter().all(|&e| e == 1.0));
        let full = check_full_norm(&op, &fam, &RateSet::unit(10.0).unwrap(), &grid).unwrap();
        assert!(full.envelope.iter().all(|&e| e == 1.0));
        let u = check_uniform(&op, &fam, &RateSet::unit(10.0).unwrap(), &grid, None).unwrap();
        assert_eq!(u.uniform_constant, 1.0);
        assert!(u.passed);
    }

    #[test]
    fn full_norm_within_three_of_definition_form() {
        let (op, fam) = nonuniform();
        let grid = uniform_grid(10.0, 0.5).unwrap();
        let def = check_nonuniform(&op, &fam, &rates(), &grid, None).unwrap();
        let full = check_full_norm(&op, &fam, &rates(), &grid).unwrap();
        assert!(full.passed, "{:?}", full.notes);
        for (a, b) in full.envelope.iter().zip(&def.envelope) {
            assert!(*a <= 3.0 * b * (1.0 + 1e-12));
        }
    }

    #[test]
    fn uniform_check_detects_growth() {
        let (op, fam) = nonuniform();
        for t_max in [5.0, 10.0, 20.0] {
            let grid = uniform_grid(t_max, 0.5).unwrap();
            let r = check_uniform(&op, &fam, &rates(), &grid, None).unwrap();
            assert!(r.uniform_constant >= t_max + 0.9);
            assert!(r.nonuniform_evidence);
            assert!(!r.passed);
        }
        let grid = uniform_grid(20.0, 0.5).unwrap();
        assert!(!check_uniform(&op, &fam, &rates(), &grid, Some(10.0)).unwrap().passed);
        assert!(check_uniform(&op, &fam, &rates(), &grid, Some(0.5)).is_err());
    }

    #[test]
    fn uniform_example_has_constant_one() {
        let (op, fam) = uniform();
        let grid = uniform_grid(10.0, 0.5).unwrap();
        let r = check_uniform(&op, &fam, &rates(), &grid, None).unwrap();
        assert_relative_eq!(r.uniform_constant, 1.0, max_relative = 1e-12);
        assert!(r.passed);
    }

    #[test]
    fn rank_zero_central_block() {
        let fam = ProjectorFamily::coordinate_split(1, 1, 0).unwrap();
        let op = EvolutionOperator::closed_form(2, |t, s| {
            Ok(Mat::from_diagonal(&DVector::from_vec(vec![(-(t - s)).exp(), (t - s).exp()])))
        });
        let grid = uniform_grid(4.0, 0.5).unwrap();
        let h = GrowthRate::exponential(1.0).unwrap();
        let r = check_dichotomy(&op, &fam, &h, &h, &grid, Some(&NBound::Constant(1.0 + 1e-12))).unwrap();
        assert!(r.passed, "{:?}", r.notes);
        for e in &r.envelope {
            assert_relative_eq!(*e, 1.0, max_relative = 1e-12);
        }
        assert!(r
            .records
            .iter()
            .filter(|rec| matches!(rec.inequality, Inequality::CentralUpper | Inequality::CentralLower))
            .all(|rec| rec.vacuous && rec.factor == 0.0));

        let full = check_full_norm(&op, &fam, &RateSet::exponential([1.0, 1.0, 1.0, 1.0]).unwrap(), &grid).unwrap();
        assert_eq!(full.max_factor(Inequality::CentralUpper), 0.0);
        assert_eq!(full.max_factor(Inequality::CentralLower), 0.0);
    }

    #[test]
    fn dichotomy_matches_trichotomy_rows() {
        let fam2 = ProjectorFamily::coordinate_split(1, 1, 0).unwrap();
        let r = rates();
        let ex = ExampleRates { u: GrowthRate::polynomial(1.0).unwrap(), h: r.h.clone(), k: r.k.clone(), mu: r.mu.clone(), nu: r.nu.clone() };
        let op2 = EvolutionOperator::closed_form_example(&ex, &fam2).unwrap();
        let (op3, fam3) = nonuniform();
        let grid = uniform_grid(5.0, 0.5).unwrap();
        let d = check_dichotomy(&op2, &fam2, &r.h, &r.k, &grid, None).unwrap();
        let t = check_nonuniform(&op3, &fam3, &r, &grid, None).unwrap();
        for ineq in [Inequality::Stable, Inequality::Unstable] {
            for (a, b) in d.requirement[ineq.index()].iter().zip(&t.requirement[ineq.index()]) {
                assert_relative_eq!(a, b, max_relative = 1e-13);
            }
        }
        assert!(matches!(
            check_dichotomy(&op3, &fam3, &r.h, &r.k, &grid, None),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn diagonal_only_grid() {
        let (op, fam) = nonuniform();
        let r = check_nonuniform(&op, &fam, &rates(), &[3.0], None).unwrap();
        assert_eq!(r.envelope, vec![1.0]);
    }

    #[test]
    fn non_orthogonal_family_is_rejected() {
        let p = Mat::from_diagonal(&DVector::from_vec(vec![1.0, 0.0]));
        let fam = ProjectorFamily::constant([p.clone(), p, Mat::zeros(2, 2)]).unwrap();
        let op = EvolutionOperator::identity(2);
        assert!(matches!(
            check_nonuniform(&op, &fam, &rates(), &[0.0, 1.0], None),
            Err(Error::Precondition(_))
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn refinement_never_lowers_the_envelope(extra in proptest::collection::vec(0usize..20, 1..6)) {
                let (op, fam) = nonuniform();
                let coarse = uniform_grid(10.0, 1.0).unwrap();
                let mut fine = coarse.clone();
                for i in extra {
                    fine.push(i as f64 * 0.5);
                }
                fine.sort_by(|a, b| a.partial_cmp(b).unwrap());
                fine.dedup();
                let rc = check_nonuniform(&op, &fam, &rates(), &coarse, None).unwrap();
                let rf = check_nonuniform(&op, &fam, &rates(), &fine, None).unwrap();
                for (&a, &e) in coarse.iter().zip(&rc.envelope) {
                    prop_assert!(rf.envelope_at(a).unwrap() >= e);
                }
            }

            #[test]
            fn orthogonal_change_of_basis_keeps_factors(
                angles in proptest::array::uniform3(-3.0f64..3.0),
                t in 0.0f64..6.0,
                back in 0.0f64..1.0,
            ) {
                let (op, fam) = nonuniform();
                let q = rotation3(angles);
                let op_q = op.conjugate(&q).unwrap();
                let fam_q = fam.conjugate(&q).unwrap();
                let s = t * back;
                for ineq in Inequality::ALL {
                    let a = required_factor(&op, &fam, &rates(), t, s, ineq).unwrap();
                    let b = required_factor(&op_q, &fam_q, &rates(), t, s, ineq).unwrap();
                    prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0), "{ineq:?}: {a} vs {b}");
                }
            }

            #[test]
            fn uniform_constant_is_a_valid_constant_bound(t_max in 1.0f64..8.0) {
                let (op, fam) = nonuniform();
                let grid = uniform_grid(t_max, 0.5).unwrap();
                let u = check_uniform(&op, &fam, &rates(), &grid, None).unwrap();
                let d = check_nonuniform(&op, &fam, &rates(), &grid, Some(&NBound::Constant(u.uniform_constant))).unwrap();
                prop_assert!(d.passed);
            }
        }

        fn rotation3(a: [f64; 3]) -> Mat {
            let rot = nalgebra::Rotation3::from_euler_angles(a[0], a[1], a[2]);
            Mat::from_fn(3, 3, |i, j| rot[(i, j)])
        }
    }
}
