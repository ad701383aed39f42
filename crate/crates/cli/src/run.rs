//! Runs the requested checks of a scenario in dependency order.

use std::collections::BTreeMap;

use tricho_core::evolution::{check_cocycle, check_identity};
use tricho_core::grid::{delta_pairs, ordered_triples, uniform_grid};
use tricho_core::lyapunov::{
    check_compatibility, classify_uniform, instantiate_corollary, verify_main_theorem, verify_sufficiency,
    verify_unprojected_theorem, CompatibilityReport, SufficiencyReport, UniformClassification,
};
use tricho_core::projectors::{check_compatible, check_inverse_properties, check_invariance, check_orthogonal};
use tricho_core::trichotomy::{check_nonuniform, check_dichotomy, check_full_norm, check_uniform};
use tricho_core::{
    linalg, CheckReport, Error, EvolutionOperator, ExampleRates, GeneratorSpec, InverseFamily, LyapunovNormFamily,
    NormConfig, NormStyle, ProjectorFamily, RateSet, TestVectors, TheoremReport, TrichotomyReport,
};

use crate::scenario::{CheckKind, OperatorSpec, ProjectorSpec, Scenario};

/// Cocycle checks use at most this many ordered triples, taken at a fixed stride.
pub const MAX_TRIPLES: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Passed,
    Failed,
    /// A prerequisite did not pass.
    Skipped,
    /// The check raised an error.
    Error,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Passed => "passed",
            Status::Failed => "failed",
            Status::Skipped => "skipped",
            Status::Error => "error",
        }
    }
}

/// Summary of one built norm family.
#[derive(Debug, Clone, PartialEq)]
pub struct NormSummary {
    pub style: NormStyle,
    pub horizon_sensitivity: f64,
    pub flagged: bool,
    pub compatibility: CompatibilityReport,
}

#[derive(Debug, Clone)]
pub enum Outcome {
    Structural(Vec<CheckReport>),
    Trichotomy(TrichotomyReport),
    Norms(Vec<NormSummary>),
    Theorem {
        report: TheoremReport,
        sufficiency: Option<SufficiencyReport>,
        classification: Option<UniformClassification>,
    },
}

#[derive(Debug, Clone)]
pub struct CheckEntry {
    pub kind: CheckKind,
    pub status: Status,
    /// Why a check was skipped or errored.
    pub reason: Option<String>,
    /// Set when the error was structural (shape or source mismatch).
    pub structural_error: bool,
    pub outcome: Option<Outcome>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub scenario: Scenario,
    pub warnings: Vec<String>,
    /// One entry per requested check, in execution order.
    pub entries: Vec<CheckEntry>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.status == Status::Passed)
    }

    /// 0 when every requested check passed, 2 on a structural error, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.entries.iter().any(|e| e.structural_error) {
            2
        } else if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn entry(&self, kind: CheckKind) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.kind == kind)
    }
}

/// Operator, projectors and rates built from a scenario.
pub struct Setup {
    pub op: EvolutionOperator,
    pub family: ProjectorFamily,
    pub rates: RateSet,
    pub grid: Vec<f64>,
}

impl Setup {
    pub fn new(scenario: &Scenario) -> tricho_core::Result<Self> {
        let family = match &scenario.projectors {
            ProjectorSpec::CoordinateSplit([a, b, c]) => ProjectorFamily::coordinate_split(*a, *b, *c)?,
            ProjectorSpec::Explicit(ms) => {
                let m = |rows: &Vec<Vec<f64>>| {
                    linalg::from_rows(rows).ok_or_else(|| Error::Structural("ragged projector matrix".into()))
                };
                ProjectorFamily::constant([m(&ms[0])?, m(&ms[1])?, m(&ms[2])?])?
            }
        };
        let rates = scenario.rates.build()?;
        let grid = uniform_grid(scenario.grid.t_max, scenario.grid.step)?;
        let op = match &scenario.operator {
            OperatorSpec::ClosedFormExample => {
                let u = scenario
                    .rates
                    .u
                    .as_ref()
                    .ok_or_else(|| Error::Argument("the closed-form example needs rates.u".into()))?
                    .build()?;
                let ex = ExampleRates {
                    u,
                    h: rates.h.clone(),
                    k: rates.k.clone(),
                    mu: rates.mu.clone(),
                    nu: rates.nu.clone(),
                };
                EvolutionOperator::closed_form_example(&ex, &family)?
            }
            OperatorSpec::Ode { generator, step } => {
                let cache = uniform_grid(scenario.time_span(), scenario.grid.step)?;
                EvolutionOperator::from_generator(GeneratorSpec::new(generator.build(), *step), &cache)?
            }
        };
        Ok(Self { op, family, rates, grid })
    }

    fn norm_config(&self, scenario: &Scenario) -> NormConfig {
        NormConfig {
            horizon: scenario.horizon,
            resolution: scenario.resolution(),
        }
    }
}

/// Every requested check plus its transitive prerequisites.
fn closure(requested: &[CheckKind]) -> Vec<CheckKind> {
    let mut needed: Vec<CheckKind> = requested.to_vec();
    let mut i = 0;
    while i < needed.len() {
        for &p in needed[i].requires() {
            if !needed.contains(&p) {
                needed.push(p);
            }
        }
        i += 1;
    }
    needed.sort();
    needed
}

fn strided<T: Copy>(items: Vec<T>, max: usize) -> Vec<T> {
    if items.len() <= max {
        return items;
    }
    let stride = items.len().div_ceil(max);
    items.into_iter().step_by(stride).collect()
}

/// Intermediate products shared between checks.
#[derive(Default)]
struct State {
    norms: Option<(LyapunovNormFamily, LyapunovNormFamily)>,
    full_norm: Option<TrichotomyReport>,
    uniform: Option<TrichotomyReport>,
    compat: Vec<CompatibilityReport>,
}

pub fn run(scenario: &Scenario) -> RunReport {
    let mut warnings = Vec::new();
    let setup = match Setup::new(scenario) {
        Ok(s) => s,
        Err(e) => {
            let structural = e.is_structural();
            let entries = scenario
                .checks
                .iter()
                .map(|&kind| CheckEntry {
                    kind,
                    status: Status::Error,
                    reason: Some(format!("setup failed: {e}")),
                    structural_error: structural,
                    outcome: None,
                })
                .collect();
            return RunReport {
                scenario: scenario.clone(),
                warnings,
                entries,
            };
        }
    };
    for (name, rate) in [
        ("h", &setup.rates.h),
        ("k", &setup.rates.k),
        ("mu", &setup.rates.mu),
        ("nu", &setup.rates.nu),
    ] {
        match rate.validate_on_grid(&setup.grid) {
            Ok(v) => {
                for violation in &v.violations {
                    warnings.push(format!("rate {name}: {violation}"));
                }
                if v.divergence_suspect {
                    warnings.push(format!("rate {name}: growth on the grid is too slow to suggest divergence"));
                }
            }
            Err(e) => warnings.push(format!("rate {name}: {e}")),
        }
    }

    let mut results: BTreeMap<CheckKind, CheckEntry> = BTreeMap::new();
    let mut state = State::default();
    for kind in closure(&scenario.checks) {
        let blocked = kind
            .requires()
            .iter()
            .find(|p| results.get(p).map(|e| e.status) != Some(Status::Passed));
        let entry = match blocked {
            Some(p) => CheckEntry {
                kind,
                status: Status::Skipped,
                reason: Some(format!("prerequisite {} did not pass", p.name())),
                structural_error: false,
                outcome: None,
            },
            None => match run_one(kind, scenario, &setup, &mut state) {
                Ok((passed, outcome)) => CheckEntry {
                    kind,
                    status: if passed { Status::Passed } else { Status::Failed },
                    reason: None,
                    structural_error: false,
                    outcome: Some(outcome),
                },
                Err(e) => CheckEntry {
                    kind,
                    status: Status::Error,
                    reason: Some(e.to_string()),
                    structural_error: e.is_structural(),
                    outcome: None,
                },
            },
        };
        results.insert(kind, entry);
    }
    for summary in &state.compat {
        if summary.cross_check == Some(false) {
            warnings.push(format!("{} norms: C(t) exceeds 3 N1(t) somewhere on the grid", summary.style.name()));
        }
    }
    if let Some((f, b)) = &state.norms {
        for n in [f, b] {
            if n.horizon_flagged() {
                warnings.push(format!(
                    "{} norms: doubling the horizon changes values by {:e} (relative)",
                    n.style().name(),
                    n.horizon_sensitivity()
                ));
            }
        }
    }
    let entries = scenario
        .checks
        .iter()
        .filter_map(|k| results.remove(k))
        .collect();
    RunReport {
        scenario: scenario.clone(),
        warnings,
        entries,
    }
}

fn structural(reports: Vec<CheckReport>) -> (bool, Outcome) {
    (reports.iter().all(|r| r.passed), Outcome::Structural(reports))
}

fn run_one(
    kind: CheckKind,
    scenario: &Scenario,
    setup: &Setup,
    state: &mut State,
) -> tricho_core::Result<(bool, Outcome)> {
    let Setup { op, family, rates, grid } = setup;
    let tol = scenario.tolerances.structural;
    let theorem_tol = scenario.tolerances.theorem;
    let vectors = || TestVectors::new(scenario.dimension, scenario.samples, scenario.seed);
    Ok(match kind {
        CheckKind::Orthogonality => structural(vec![check_orthogonal(family, grid, tol)?]),
        CheckKind::Cocycle => {
            let triples = strided(ordered_triples(grid), MAX_TRIPLES);
            structural(vec![check_identity(op, grid, tol)?, check_cocycle(op, &triples, tol)?])
        }
        CheckKind::Invariance => structural(vec![check_invariance(family, op, &delta_pairs(grid), tol)?]),
        CheckKind::Compatibility => {
            let compat = check_compatible(family, op, grid, tol)?;
            let mut reports = vec![compat];
            if reports[0].passed {
                let pairs = delta_pairs(grid);
                let triples = strided(ordered_triples(grid), MAX_TRIPLES);
                for j in [2, 3] {
                    let inv = InverseFamily::new(op, family, j)?;
                    reports.push(check_inverse_properties(&inv, &pairs, &triples, tol)?);
                }
            }
            structural(reports)
        }
        CheckKind::Nonuniform => {
            let r = check_nonuniform(op, family, rates, grid, scenario.n_bound.as_ref())?;
            (r.passed, Outcome::Trichotomy(r))
        }
        CheckKind::FullNorm => {
            let r = check_full_norm(op, family, rates, grid)?;
            state.full_norm = Some(r.clone());
            (r.passed, Outcome::Trichotomy(r))
        }
        CheckKind::Uniform => {
            let r = check_uniform(op, family, rates, grid, scenario.n_const)?;
            state.uniform = Some(r.clone());
            (r.passed, Outcome::Trichotomy(r))
        }
        CheckKind::Dichotomy => {
            let r = check_dichotomy(op, family, &rates.h, &rates.k, grid, scenario.n_bound.as_ref())?;
            (r.passed, Outcome::Trichotomy(r))
        }
        CheckKind::Norms => {
            let config = setup.norm_config(scenario);
            let forward = LyapunovNormFamily::build(NormStyle::Forward, op, family, rates, grid, config)?;
            let backward = LyapunovNormFamily::build(NormStyle::Backward, op, family, rates, grid, config)?;
            let full_norm = match &state.full_norm {
                Some(r) => r.clone(),
                None => check_full_norm(op, family, rates, grid)?,
            };
            let v = vectors();
            let mut summaries = Vec::new();
            for n in [&forward, &backward] {
                let compatibility = check_compatibility(n, grid, &v, 1e-12, Some(&full_norm))?;
                summaries.push(NormSummary {
                    style: n.style(),
                    horizon_sensitivity: n.horizon_sensitivity(),
                    flagged: n.horizon_flagged(),
                    compatibility,
                });
            }
            state.compat = summaries.iter().map(|s| s.compatibility.clone()).collect();
            state.norms = Some((forward, backward));
            (summaries.iter().all(|s| s.compatibility.passed), Outcome::Norms(summaries))
        }
        CheckKind::MainTheorem => {
            let (forward, backward) = state.norms.as_ref().expect("norms run first");
            let v = vectors();
            let report = verify_main_theorem(forward, backward, grid, &v, theorem_tol)?;
            let sufficiency = verify_sufficiency(forward, backward, grid, &v, theorem_tol)?;
            let classification = match (&state.uniform, state.compat.as_slice()) {
                (Some(u), [f, b]) if u.passed => Some(classify_uniform(u, f, b)),
                _ => None,
            };
            let passed = report.passed && sufficiency.passed && classification.is_none_or(|c| c.passed);
            (
                passed,
                Outcome::Theorem {
                    report,
                    sufficiency: Some(sufficiency),
                    classification,
                },
            )
        }
        CheckKind::UnprojectedTheorem => {
            let (forward, backward) = state.norms.as_ref().expect("norms run first");
            let report = verify_unprojected_theorem(forward, backward, grid, &vectors(), theorem_tol)?;
            (
                report.passed,
                Outcome::Theorem {
                    report,
                    sufficiency: None,
                    classification: None,
                },
            )
        }
        CheckKind::Corollary => {
            let spec = scenario.corollary.as_ref().expect("validated at parse time");
            let config = setup.norm_config(scenario);
            let report =
                instantiate_corollary(spec.kind, spec.exponents, op, family, grid, config, &vectors(), theorem_tol)?;
            (
                report.passed,
                Outcome::Theorem {
                    report,
                    sufficiency: None,
                    classification: None,
                },
            )
        }
    })
}
