//! Report files. Every float is written with 17 significant digits and no
//! timing is recorded, so identical inputs give identical bytes.
//!
//! * `report.json`: scenario echo, verdict, warnings and one object per check
//!   (theorem checks keep only their worst record per tag here);
//! * `records.csv`: one row per record, columns `check,t,s,tag,vector,value,margin`;
//! * `summary.csv`: one row per check, columns `check,status,measure,value,reason`.

use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::{json, Map, Number, Value};
use tricho_core::lyapunov::{CompatibilityReport, RateFamily, SufficiencyReport, TheoremRecord, TheoremReport};
use tricho_core::{CheckReport, Form, Inequality, NBound, TrichotomyReport};

use crate::run::{CheckEntry, NormSummary, Outcome, RunReport};
use crate::scenario::{GeneratorSource, OperatorSpec, ProjectorSpec, RateSpec, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Both,
}

/// `{:.16e}`: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A JSON number with 17 significant digits; non-finite values become strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&fmt_f64(x)).expect("formatted float is a JSON number"))
    } else {
        Value::String(x.to_string())
    }
}

fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

fn pairs(xs: &[(f64, f64)]) -> Value {
    Value::Array(xs.iter().map(|&(a, b)| json!([num(a), num(b)])).collect())
}

fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

fn rate_json(r: &RateSpec) -> Value {
    match r {
        RateSpec::Exponential(a) => json!({"kind": "exponential", "exponent": num(*a)}),
        RateSpec::Polynomial(a) => json!({"kind": "polynomial", "exponent": num(*a)}),
        RateSpec::Tabulated(t) => json!({"kind": "tabulated", "table": pairs(t)}),
    }
}

fn matrix_json(rows: &[Vec<f64>]) -> Value {
    Value::Array(rows.iter().map(|r| nums(r)).collect())
}

fn bound_json(b: &NBound) -> Value {
    match b {
        NBound::Constant(c) => json!({"kind": "constant", "value": num(*c)}),
        NBound::Affine { slope, intercept } => {
            json!({"kind": "affine", "slope": num(*slope), "intercept": num(*intercept)})
        }
        NBound::Tabulated(t) => json!({"kind": "tabulated", "table": pairs(t)}),
    }
}

pub fn scenario_json(s: &Scenario) -> Value {
    let operator = match &s.operator {
        OperatorSpec::ClosedFormExample => json!({"type": "paper_example"}),
        OperatorSpec::Ode { generator, step } => {
            let mut m = Map::new();
            m.insert("type".into(), "ode".into());
            match generator {
                GeneratorSource::Builtin(name) => m.insert("builtin".into(), name.clone().into()),
                GeneratorSource::Matrix(rows) => m.insert("matrix".into(), matrix_json(rows)),
            };
            m.insert("step".into(), num(*step));
            Value::Object(m)
        }
    };
    let projectors = match &s.projectors {
        ProjectorSpec::CoordinateSplit(b) => json!({"type": "coordinate-split", "blocks": b}),
        ProjectorSpec::Explicit(ms) => json!({
            "type": "explicit",
            "p1": matrix_json(&ms[0]),
            "p2": matrix_json(&ms[1]),
            "p3": matrix_json(&ms[2]),
        }),
    };
    let mut rates = Map::new();
    for (name, r) in s.rates.named() {
        rates.insert(name.into(), rate_json(r));
    }
    json!({
        "dimension": s.dimension,
        "seed": s.seed,
        "samples": s.samples,
        "horizon": num(s.horizon),
        "resolution": num(s.resolution()),
        "grid": {"t_max": num(s.grid.t_max), "step": num(s.grid.step)},
        "tolerances": {"structural": num(s.tolerances.structural), "theorem": num(s.tolerances.theorem)},
        "operator": operator,
        "projectors": projectors,
        "rates": rates,
        "checks": s.checks.iter().map(|c| c.name()).collect::<Vec<_>>(),
        "n_bound": s.n_bound.as_ref().map_or(Value::Null, bound_json),
        "n_const": opt(s.n_const),
        "corollary": s.corollary.as_ref().map_or(Value::Null, |c| json!({
            "kind": match c.kind { RateFamily::Exponential => "exponential", RateFamily::Polynomial => "polynomial" },
            "exponents": nums(&c.exponents),
        })),
    })
}

fn check_report_json(r: &CheckReport) -> Value {
    json!({
        "name": r.name,
        "tol": num(r.tol),
        "passed": r.passed,
        "residuals": r.residuals.iter().map(|res| json!({
            "condition": res.condition,
            "worst": num(res.worst),
            "at": res.at.map_or(Value::Null, |(t, s)| json!([num(t), num(s)])),
        })).collect::<Vec<_>>(),
        "notes": r.notes,
    })
}

fn form_name(f: Form) -> &'static str {
    match f {
        Form::Definition => "definition",
        Form::FullNorm => "full-norm",
        Form::Uniform => "uniform",
    }
}

fn trichotomy_json(r: &TrichotomyReport, with_records: bool) -> Value {
    let mut requirement = Map::new();
    for (i, ineq) in Inequality::ALL.iter().enumerate() {
        requirement.insert(ineq.letter().into(), nums(&r.requirement[i]));
    }
    let mut out = json!({
        "label": r.label,
        "form": form_name(r.form),
        "passed": r.passed,
        "uniform_constant": num(r.uniform_constant),
        "nonuniform_evidence": r.nonuniform_evidence,
        "bound": r.bound.as_ref().map_or(Value::Null, bound_json),
        "grid": nums(&r.grid),
        "envelope": nums(&r.envelope),
        "requirement": requirement,
        "notes": r.notes,
    });
    if with_records {
        out["records"] = r
            .records
            .iter()
            .map(|rec| {
                json!({
                    "t": num(rec.t),
                    "s": num(rec.s),
                    "tag": r.tag(rec.inequality),
                    "factor": num(rec.factor),
                    "vacuous": rec.vacuous,
                    "margin": opt(rec.margin),
                })
            })
            .collect();
    }
    out
}

fn compatibility_json(c: &CompatibilityReport) -> Value {
    json!({
        "passed": c.passed,
        "grid": nums(&c.grid),
        "c": nums(&c.c),
        "lower_margin": num(c.lower_margin),
        "uniform_constant": num(c.uniform_constant),
        "cross_check": c.cross_check,
        "seed": c.seed,
        "samples": c.samples,
        "notes": c.notes,
    })
}

fn norms_json(ns: &[NormSummary]) -> Value {
    Value::Array(
        ns.iter()
            .map(|n| {
                json!({
                    "style": n.style.name(),
                    "horizon_sensitivity": num(n.horizon_sensitivity),
                    "flagged": n.flagged,
                    "compatibility": compatibility_json(&n.compatibility),
                })
            })
            .collect(),
    )
}

fn theorem_json(r: &TheoremReport) -> Value {
    let mut worst = Map::new();
    for (tag, m) in &r.worst {
        worst.insert(tag.clone(), num(*m));
    }
    json!({
        "label": r.label,
        "passed": r.passed,
        "tol": num(r.tol),
        "slack": num(r.slack),
        "seed": r.seed,
        "worst_margin": worst,
        "worst_records": worst_records(r).into_iter().map(|rec| json!({
            "tag": rec.tag,
            "t": num(rec.t),
            "s": num(rec.s),
            "vector": rec.vector,
            "lhs": num(rec.lhs),
            "rhs": num(rec.rhs),
            "margin": num(rec.margin),
        })).collect::<Vec<_>>(),
    })
}

/// The first record attaining the smallest margin of each tag.
fn worst_records(r: &TheoremReport) -> Vec<&TheoremRecord> {
    let mut out: Vec<&TheoremRecord> = Vec::new();
    for rec in &r.records {
        match out.iter_mut().find(|w| w.tag == rec.tag) {
            Some(w) if rec.margin < w.margin => *w = rec,
            Some(_) => {}
            None => out.push(rec),
        }
    }
    out
}

fn sufficiency_json(s: &SufficiencyReport) -> Value {
    json!({
        "passed": s.passed,
        "c": nums(&s.c),
        "candidate": pairs(&s.candidate),
        "definition_check": trichotomy_json(&s.trichotomy, false),
    })
}

fn entry_json(e: &CheckEntry) -> Value {
    let mut m = Map::new();
    m.insert("name".into(), e.kind.name().into());
    m.insert("status".into(), e.status.name().into());
    if let Some(r) = &e.reason {
        m.insert("reason".into(), r.clone().into());
    }
    match &e.outcome {
        Some(Outcome::Structural(reports)) => {
            m.insert("reports".into(), reports.iter().map(check_report_json).collect());
        }
        Some(Outcome::Trichotomy(r)) => {
            m.insert("report".into(), trichotomy_json(r, true));
        }
        Some(Outcome::Norms(ns)) => {
            m.insert("norms".into(), norms_json(ns));
        }
        Some(Outcome::Theorem {
            report,
            sufficiency,
            classification,
        }) => {
            m.insert("report".into(), theorem_json(report));
            if let Some(s) = sufficiency {
                m.insert("sufficiency".into(), sufficiency_json(s));
            }
            if let Some(c) = classification {
                m.insert(
                    "uniform_classification".into(),
                    json!({"n": num(c.n), "c": num(c.c), "passed": c.passed}),
                );
            }
        }
        None => {}
    }
    Value::Object(m)
}

pub fn report_json(report: &RunReport) -> Value {
    let verdict = match report.exit_code() {
        0 => "pass",
        1 => "fail",
        _ => "error",
    };
    json!({
        "verdict": verdict,
        "exit_code": report.exit_code(),
        "scenario": scenario_json(&report.scenario),
        "warnings": report.warnings,
        "checks": report.entries.iter().map(entry_json).collect::<Vec<_>>(),
    })
}

/// One row of `records.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordRow {
    pub check: &'static str,
    pub t: Option<f64>,
    pub s: Option<f64>,
    pub tag: String,
    pub vector: Option<usize>,
    pub value: f64,
    pub margin: Option<f64>,
}

pub fn record_rows(report: &RunReport) -> Vec<RecordRow> {
    let mut rows = Vec::new();
    for e in &report.entries {
        let check = e.kind.name();
        match &e.outcome {
            Some(Outcome::Structural(reports)) => {
                for r in reports {
                    for res in &r.residuals {
                        rows.push(RecordRow {
                            check,
                            t: res.at.map(|a| a.0),
                            s: res.at.map(|a| a.1),
                            tag: format!("{}:{}", r.name, res.condition),
                            vector: None,
                            value: res.worst,
                            margin: Some(r.tol - res.worst),
                        });
                    }
                }
            }
            Some(Outcome::Trichotomy(r)) => {
                for rec in &r.records {
                    rows.push(RecordRow {
                        check,
                        t: Some(rec.t),
                        s: Some(rec.s),
                        tag: r.tag(rec.inequality),
                        vector: None,
                        value: rec.factor,
                        margin: rec.margin,
                    });
                }
            }
            Some(Outcome::Norms(ns)) => {
                for n in ns {
                    for (&t, &c) in n.compatibility.grid.iter().zip(&n.compatibility.c) {
                        rows.push(RecordRow {
                            check,
                            t: Some(t),
                            s: Some(t),
                            tag: format!("C-{}", n.style.name()),
                            vector: None,
                            value: c,
                            margin: None,
                        });
                    }
                }
            }
            Some(Outcome::Theorem { report, .. }) => {
                for rec in &report.records {
                    rows.push(RecordRow {
                        check,
                        t: Some(rec.t),
                        s: Some(rec.s),
                        tag: rec.tag.clone(),
                        vector: Some(rec.vector),
                        value: rec.lhs,
                        margin: Some(rec.margin),
                    });
                }
            }
            None => {}
        }
    }
    rows
}

fn headline(e: &CheckEntry) -> Option<(&'static str, f64)> {
    Some(match e.outcome.as_ref()? {
        Outcome::Structural(reports) => ("worst_residual", reports.iter().map(|r| r.worst()).fold(0.0, f64::max)),
        Outcome::Trichotomy(r) => ("envelope_max", r.uniform_constant),
        Outcome::Norms(ns) => (
            "max_compatibility_constant",
            ns.iter().map(|n| n.compatibility.uniform_constant).fold(0.0, f64::max),
        ),
        Outcome::Theorem { report, .. } => ("worst_margin", report.worst_margin()),
    })
}

fn opt_cell(x: Option<f64>) -> String {
    x.map_or_else(String::new, fmt_f64)
}

fn write_summary(report: &RunReport, path: &Path) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["check", "status", "measure", "value", "reason"])?;
    for e in &report.entries {
        let (measure, value) = match headline(e) {
            Some((m, v)) => (m.to_string(), fmt_f64(v)),
            None => (String::new(), String::new()),
        };
        w.write_record([
            e.kind.name(),
            e.status.name(),
            &measure,
            &value,
            e.reason.as_deref().unwrap_or(""),
        ])?;
    }
    w.flush()
}

fn write_records(rows: &[RecordRow], path: &Path) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["check", "t", "s", "tag", "vector", "value", "margin"])?;
    for r in rows {
        w.write_record([
            r.check.to_string(),
            opt_cell(r.t),
            opt_cell(r.s),
            r.tag.clone(),
            r.vector.map_or_else(String::new, |v| v.to_string()),
            fmt_f64(r.value),
            opt_cell(r.margin),
        ])?;
    }
    w.flush()
}

/// Writes the report files into `dir` (created if needed) and returns their
/// paths. `summary.csv` is always written; `records.csv` only when there are
/// records.
pub fn emit(report: &RunReport, format: Format, dir: &Path) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if matches!(format, Format::Json | Format::Both) {
        let path = dir.join("report.json");
        let mut text = serde_json::to_string_pretty(&report_json(report)).map_err(io::Error::other)?;
        text.push('\n');
        std::fs::write(&path, text)?;
        written.push(path);
    }
    if matches!(format, Format::Csv | Format::Both) {
        let rows = record_rows(report);
        if !rows.is_empty() {
            let path = dir.join("records.csv");
            write_records(&rows, &path)?;
            written.push(path);
        }
    }
    let path = dir.join("summary.csv");
    write_summary(report, &path)?;
    written.push(path);
    Ok(written)
}
