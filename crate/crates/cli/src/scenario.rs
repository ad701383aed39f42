//! Scenario files: a TOML tree describing one operator, one projector family,
//! the rates and the checks to run.
//!
//! ```toml
//! dimension = 3
//! seed = 7
//! horizon = 10.0
//! samples = 32
//! checks = ["orthogonality", "def5", "main_theorem"]
//!
//! [grid]
//! t_max = 10.0
//! step = 0.5
//!
//! [tolerances]
//! structural = 1e-10
//! theorem = 1e-9
//!
//! [operator]
//! type = "paper_example"            # or "ode" with `builtin` or `matrix`, and `step`
//!
//! [projectors]
//! type = "coordinate-split"         # or "explicit" with row-major p1, p2, p3
//! blocks = [1, 1, 1]
//!
//! [rates]
//! h = { kind = "exponential", exponent = 1.0 }
//! k = { kind = "exponential", exponent = 2.0 }
//! mu = { kind = "exponential", exponent = 0.5 }
//! nu = { kind = "exponential", exponent = 0.25 }
//! u = { kind = "tabulated", table = [[0.0, 1.0], [1e6, 1.0]] }
//! ```
//!
//! Optional sections: `[def5] n_bound`, `[uniform] n_const`,
//! `[corollary] kind, exponents` and `[norms] resolution`.

use std::path::Path;

use thiserror::Error;
use toml::{Table, Value};
use tricho_core::growth::{GrowthRate, RateSet};
use tricho_core::lyapunov::RateFamily;
use tricho_core::{linalg, Generator, NBound};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("scenario is not valid TOML: {0}")]
    Syntax(String),
    /// A missing key, a type mismatch or a violated invariant.
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CheckKind {
    Orthogonality,
    Cocycle,
    Invariance,
    Compatibility,
    Nonuniform,
    FullNorm,
    Uniform,
    Dichotomy,
    Norms,
    MainTheorem,
    UnprojectedTheorem,
    Corollary,
}

impl CheckKind {
    /// In execution order.
    pub const ALL: [CheckKind; 12] = [
        CheckKind::Orthogonality,
        CheckKind::Cocycle,
        CheckKind::Invariance,
        CheckKind::Compatibility,
        CheckKind::Nonuniform,
        CheckKind::FullNorm,
        CheckKind::Uniform,
        CheckKind::Dichotomy,
        CheckKind::Norms,
        CheckKind::MainTheorem,
        CheckKind::UnprojectedTheorem,
        CheckKind::Corollary,
    ];

    /// Run when a scenario has no `checks` key.
    pub const DEFAULT: [CheckKind; 10] = [
        CheckKind::Orthogonality,
        CheckKind::Cocycle,
        CheckKind::Invariance,
        CheckKind::Compatibility,
        CheckKind::Nonuniform,
        CheckKind::FullNorm,
        CheckKind::Uniform,
        CheckKind::Norms,
        CheckKind::MainTheorem,
        CheckKind::UnprojectedTheorem,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Orthogonality => "orthogonality",
            CheckKind::Cocycle => "cocycle",
            CheckKind::Invariance => "invariance",
            CheckKind::Compatibility => "compatibility",
            CheckKind::Nonuniform => "def5",
            CheckKind::FullNorm => "prop8",
            CheckKind::Uniform => "uniform",
            CheckKind::Dichotomy => "dichotomy",
            CheckKind::Norms => "norms",
            CheckKind::MainTheorem => "main_theorem",
            CheckKind::UnprojectedTheorem => "unprojected_theorem",
            CheckKind::Corollary => "corollary",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }

    /// Direct prerequisites.
    pub fn requires(self) -> &'static [CheckKind] {
        use CheckKind::*;
        match self {
            Orthogonality | Cocycle => &[],
            Invariance => &[Orthogonality, Cocycle],
            Compatibility => &[Invariance],
            Nonuniform | FullNorm | Uniform | Dichotomy | Norms | Corollary => &[Compatibility],
            MainTheorem | UnprojectedTheorem => &[Norms],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RateSpec {
    Exponential(f64),
    Polynomial(f64),
    Tabulated(Vec<(f64, f64)>),
}

impl RateSpec {
    pub fn build(&self) -> tricho_core::Result<GrowthRate> {
        match self {
            RateSpec::Exponential(a) => GrowthRate::exponential(*a),
            RateSpec::Polynomial(a) => GrowthRate::polynomial(*a),
            RateSpec::Tabulated(table) => GrowthRate::tabulated(table.clone()),
        }
    }

    fn span_end(&self) -> f64 {
        match self {
            RateSpec::Tabulated(table) => table.last().map_or(0.0, |k| k.0),
            _ => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateSpecs {
    pub h: RateSpec,
    pub k: RateSpec,
    pub mu: RateSpec,
    pub nu: RateSpec,
    /// Nonuniformity rate of the closed-form example operator.
    pub u: Option<RateSpec>,
}

impl RateSpecs {
    pub fn build(&self) -> tricho_core::Result<RateSet> {
        Ok(RateSet {
            h: self.h.build()?,
            k: self.k.build()?,
            mu: self.mu.build()?,
            nu: self.nu.build()?,
        })
    }

    pub fn named(&self) -> Vec<(&'static str, &RateSpec)> {
        let mut out = vec![("h", &self.h), ("k", &self.k), ("mu", &self.mu), ("nu", &self.nu)];
        if let Some(u) = &self.u {
            out.push(("u", u));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSource {
    Builtin(String),
    Matrix(Vec<Vec<f64>>),
}

impl GeneratorSource {
    pub fn build(&self) -> Generator {
        match self {
            GeneratorSource::Builtin(name) => Generator::builtin(name).expect("validated at parse time"),
            GeneratorSource::Matrix(rows) => {
                Generator::Constant(linalg::from_rows(rows).expect("validated at parse time"))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    ClosedFormExample,
    Ode { generator: GeneratorSource, step: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProjectorSpec {
    CoordinateSplit([usize; 3]),
    Explicit([Vec<Vec<f64>>; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub t_max: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub structural: f64,
    pub theorem: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorollarySpec {
    pub kind: RateFamily,
    pub exponents: [f64; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub dimension: usize,
    pub operator: OperatorSpec,
    pub projectors: ProjectorSpec,
    pub rates: RateSpecs,
    pub grid: GridSpec,
    pub horizon: f64,
    /// Spacing of the forward suprema; the grid step when absent.
    pub resolution: Option<f64>,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub samples: usize,
    pub checks: Vec<CheckKind>,
    pub n_bound: Option<NBound>,
    pub n_const: Option<f64>,
    pub corollary: Option<CorollarySpec>,
}

/// Command-line overrides, applied before validation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub grid_max: Option<f64>,
    pub grid_step: Option<f64>,
    pub horizon: Option<f64>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

impl Scenario {
    pub fn from_path(path: &Path, overrides: &Overrides) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text, overrides)
    }

    pub fn from_toml(text: &str, overrides: &Overrides) -> Result<Self, ScenarioError> {
        let root: Table = text.parse().map_err(|e: toml::de::Error| ScenarioError::Syntax(e.to_string()))?;
        let mut scenario = parse_root(&root)?;
        if let Some(v) = overrides.grid_max {
            scenario.grid.t_max = v;
        }
        if let Some(v) = overrides.grid_step {
            scenario.grid.step = v;
        }
        if let Some(v) = overrides.horizon {
            scenario.horizon = v;
        }
        if let Some(v) = overrides.tol {
            scenario.tolerances.theorem = v;
        }
        if let Some(v) = overrides.seed {
            scenario.seed = v;
        }
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn resolution(&self) -> f64 {
        self.resolution.unwrap_or(self.grid.step)
    }

    /// Whether any requested check reaches past `t_max` through the norm horizon.
    pub fn needs_horizon(&self) -> bool {
        self.checks.iter().any(|c| {
            matches!(
                c,
                CheckKind::Norms | CheckKind::MainTheorem | CheckKind::UnprojectedTheorem | CheckKind::Corollary
            )
        })
    }

    /// Latest time any requested check evaluates.
    pub fn time_span(&self) -> f64 {
        if self.needs_horizon() {
            self.grid.t_max + 2.0 * self.horizon
        } else {
            self.grid.t_max
        }
    }

    pub fn block_sizes(&self) -> Option<[usize; 3]> {
        match self.projectors {
            ProjectorSpec::CoordinateSplit(b) => Some(b),
            ProjectorSpec::Explicit(_) => None,
        }
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        let positive = |key: &str, what: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(key, format!("{what} must be positive, got {v}")))
            }
        };
        positive("grid.step", "step", self.grid.step)?;
        positive("grid.t_max", "t_max", self.grid.t_max)?;
        if self.grid.step > self.grid.t_max {
            return Err(invalid("grid.step", "step must not exceed t_max"));
        }
        positive("horizon", "horizon", self.horizon)?;
        if let Some(r) = self.resolution {
            positive("norms.resolution", "resolution", r)?;
        }
        positive("tolerances.structural", "tolerance", self.tolerances.structural)?;
        positive("tolerances.theorem", "tolerance", self.tolerances.theorem)?;

        let n = self.dimension;
        match &self.projectors {
            ProjectorSpec::CoordinateSplit(b) => {
                if b.iter().sum::<usize>() != n {
                    return Err(invalid(
                        "projectors.blocks",
                        format!("block sizes {} + {} + {} do not add up to dimension {n}", b[0], b[1], b[2]),
                    ));
                }
            }
            ProjectorSpec::Explicit(ms) => {
                for (i, rows) in ms.iter().enumerate() {
                    let key = format!("projectors.p{}", i + 1);
                    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                        return Err(invalid(&key, format!("expected a {n}x{n} matrix")));
                    }
                }
            }
        }
        match &self.operator {
            OperatorSpec::ClosedFormExample => {
                if self.rates.u.is_none() {
                    return Err(invalid("rates.u", "missing key (required by the closed-form example operator)"));
                }
            }
            OperatorSpec::Ode { generator, step } => {
                positive("operator.step", "step", *step)?;
                let dim = match generator {
                    GeneratorSource::Builtin(name) => match Generator::builtin(name) {
                        Some(g) => g.dim(),
                        None => {
                            return Err(invalid(
                                "operator.builtin",
                                format!("unknown generator '{name}' (expected rotation or block-diagonal)"),
                            ))
                        }
                    },
                    GeneratorSource::Matrix(rows) => {
                        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                            return Err(invalid("operator.matrix", format!("expected a {n}x{n} matrix")));
                        }
                        n
                    }
                };
                if dim != n {
                    return Err(invalid(
                        "operator.builtin",
                        format!("generator has dimension {dim}, scenario dimension is {n}"),
                    ));
                }
            }
        }
        let span = self.time_span();
        for (name, spec) in self.rates.named() {
            let key = format!("rates.{name}");
            spec.build().map_err(|e| invalid(&key, e.to_string()))?;
            if spec.span_end() < span {
                return Err(invalid(
                    &format!("{key}.table"),
                    format!("table ends at {} but the checks reach t = {span}", spec.span_end()),
                ));
            }
        }
        if let Some(c) = self.n_const {
            if !(c >= 1.0) {
                return Err(invalid("uniform.n_const", format!("constant must be >= 1, got {c}")));
            }
        }
        if self.checks.contains(&CheckKind::Corollary) && self.corollary.is_none() {
            return Err(invalid("corollary", "missing section (required by the corollary check)"));
        }
        if let Some(c) = &self.corollary {
            if c.exponents.iter().any(|&a| !(a.is_finite() && a > 0.0)) {
                return Err(invalid("corollary.exponents", "exponents must be positive"));
            }
        }
        Ok(())
    }
}

// ---- tree walking ----

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::String(_) => "string",
        Value::Integer(_) => "integer",
        Value::Float(_) => "float",
        Value::Boolean(_) => "boolean",
        Value::Datetime(_) => "datetime",
        Value::Array(_) => "array",
        Value::Table(_) => "table",
    }
}

fn as_f64(key: &str, v: &Value) -> Result<f64, ScenarioError> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        other => Err(invalid(key, format!("expected a number, found {}", type_name(other)))),
    }
}

fn as_usize(key: &str, v: &Value) -> Result<usize, ScenarioError> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        Value::Integer(i) => Err(invalid(key, format!("expected a nonnegative integer, got {i}"))),
        other => Err(invalid(key, format!("expected an integer, found {}", type_name(other)))),
    }
}

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str, ScenarioError> {
    v.as_str()
        .ok_or_else(|| invalid(key, format!("expected a string, found {}", type_name(v))))
}

fn as_table<'a>(key: &str, v: &'a Value) -> Result<&'a Table, ScenarioError> {
    v.as_table()
        .ok_or_else(|| invalid(key, format!("expected a table, found {}", type_name(v))))
}

fn as_array<'a>(key: &str, v: &'a Value) -> Result<&'a Vec<Value>, ScenarioError> {
    v.as_array()
        .ok_or_else(|| invalid(key, format!("expected an array, found {}", type_name(v))))
}

fn required<'a>(t: &'a Table, prefix: &str, key: &str) -> Result<&'a Value, ScenarioError> {
    t.get(key).ok_or_else(|| invalid(&join(prefix, key), "missing key"))
}

fn reject_unknown(t: &Table, prefix: &str, known: &[&str]) -> Result<(), ScenarioError> {
    match t.keys().find(|k| !known.contains(&k.as_str())) {
        Some(k) => Err(invalid(&join(prefix, k), "unknown key")),
        None => Ok(()),
    }
}

fn matrix(key: &str, v: &Value) -> Result<Vec<Vec<f64>>, ScenarioError> {
    as_array(key, v)?
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let rkey = format!("{key}[{i}]");
            as_array(&rkey, row)?.iter().map(|x| as_f64(&rkey, x)).collect()
        })
        .collect()
}

fn knots(key: &str, v: &Value) -> Result<Vec<(f64, f64)>, ScenarioError> {
    as_array(key, v)?
        .iter()
        .enumerate()
        .map(|(i, pair)| {
            let pkey = format!("{key}[{i}]");
            match as_array(&pkey, pair)?.as_slice() {
                [a, b] => Ok((as_f64(&pkey, a)?, as_f64(&pkey, b)?)),
                _ => Err(invalid(&pkey, "expected a [t, value] pair")),
            }
        })
        .collect()
}

fn parse_root(root: &Table) -> Result<Scenario, ScenarioError> {
    reject_unknown(
        root,
        "",
        &[
            "dimension", "seed", "horizon", "samples", "checks", "grid", "tolerances", "operator",
            "projectors", "rates", "def5", "uniform", "corollary", "norms",
        ],
    )?;
    let dimension = as_usize("dimension", required(root, "", "dimension")?)?;
    if dimension == 0 {
        return Err(invalid("dimension", "dimension must be positive"));
    }
    let seed = match root.get("seed") {
        Some(Value::Integer(i)) if *i >= 0 => *i as u64,
        Some(v) => return Err(invalid("seed", format!("expected a nonnegative integer, found {v}"))),
        None => 0,
    };
    let horizon = root.get("horizon").map(|v| as_f64("horizon", v)).transpose()?.unwrap_or(10.0);
    let samples = root.get("samples").map(|v| as_usize("samples", v)).transpose()?.unwrap_or(32);
    let checks = match root.get("checks") {
        None => CheckKind::DEFAULT.to_vec(),
        Some(v) => {
            let mut out = Vec::new();
            for (i, c) in as_array("checks", v)?.iter().enumerate() {
                let key = format!("checks[{i}]");
                let name = as_str(&key, c)?;
                let kind = CheckKind::parse(name).ok_or_else(|| invalid(&key, format!("unknown check '{name}'")))?;
                if !out.contains(&kind) {
                    out.push(kind);
                }
            }
            out.sort();
            out
        }
    };

    let grid_t = as_table("grid", required(root, "", "grid")?)?;
    reject_unknown(grid_t, "grid", &["t_max", "step"])?;
    let grid = GridSpec {
        t_max: as_f64("grid.t_max", required(grid_t, "grid", "t_max")?)?,
        step: as_f64("grid.step", required(grid_t, "grid", "step")?)?,
    };

    let mut tolerances = Tolerances {
        structural: 1e-10,
        theorem: 1e-9,
    };
    if let Some(v) = root.get("tolerances") {
        let t = as_table("tolerances", v)?;
        reject_unknown(t, "tolerances", &["structural", "theorem"])?;
        if let Some(v) = t.get("structural") {
            tolerances.structural = as_f64("tolerances.structural", v)?;
        }
        if let Some(v) = t.get("theorem") {
            tolerances.theorem = as_f64("tolerances.theorem", v)?;
        }
    }

    let operator = parse_operator(as_table("operator", required(root, "", "operator")?)?)?;
    let projectors = parse_projectors(as_table("projectors", required(root, "", "projectors")?)?)?;

    let rates_t = as_table("rates", required(root, "", "rates")?)?;
    reject_unknown(rates_t, "rates", &["h", "k", "mu", "nu", "u"])?;
    let rate = |name: &str| parse_rate(&join("rates", name), required(rates_t, "rates", name)?);
    let rates = RateSpecs {
        h: rate("h")?,
        k: rate("k")?,
        mu: rate("mu")?,
        nu: rate("nu")?,
        u: rates_t.get("u").map(|v| parse_rate("rates.u", v)).transpose()?,
    };

    let n_bound = match root.get("def5") {
        Some(v) => {
            let t = as_table("def5", v)?;
            reject_unknown(t, "def5", &["n_bound"])?;
            t.get("n_bound").map(|v| parse_bound("def5.n_bound", v)).transpose()?
        }
        None => None,
    };
    let n_const = match root.get("uniform") {
        Some(v) => {
            let t = as_table("uniform", v)?;
            reject_unknown(t, "uniform", &["n_const"])?;
            t.get("n_const").map(|v| as_f64("uniform.n_const", v)).transpose()?
        }
        None => None,
    };
    let corollary = root.get("corollary").map(|v| parse_corollary(as_table("corollary", v)?)).transpose()?;
    let resolution = match root.get("norms") {
        Some(v) => {
            let t = as_table("norms", v)?;
            reject_unknown(t, "norms", &["resolution"])?;
            t.get("resolution").map(|v| as_f64("norms.resolution", v)).transpose()?
        }
        None => None,
    };

    Ok(Scenario {
        dimension,
        operator,
        projectors,
        rates,
        grid,
        horizon,
        resolution,
        tolerances,
        seed,
        samples,
        checks,
        n_bound,
        n_const,
        corollary,
    })
}

fn parse_operator(t: &Table) -> Result<OperatorSpec, ScenarioError> {
    match as_str("operator.type", required(t, "operator", "type")?)? {
        "paper_example" => {
            reject_unknown(t, "operator", &["type"])?;
            Ok(OperatorSpec::ClosedFormExample)
        }
        "ode" => {
            reject_unknown(t, "operator", &["type", "builtin", "matrix", "step"])?;
            let generator = match (t.get("builtin"), t.get("matrix")) {
                (Some(b), None) => GeneratorSource::Builtin(as_str("operator.builtin", b)?.to_string()),
                (None, Some(m)) => GeneratorSource::Matrix(matrix("operator.matrix", m)?),
                (Some(_), Some(_)) => return Err(invalid("operator.matrix", "give either builtin or matrix, not both")),
                (None, None) => return Err(invalid("operator.builtin", "missing key (or operator.matrix)")),
            };
            let step = t.get("step").map(|v| as_f64("operator.step", v)).transpose()?.unwrap_or(1e-3);
            Ok(OperatorSpec::Ode { generator, step })
        }
        other => Err(invalid(
            "operator.type",
            format!("unknown operator type '{other}' (expected paper_example or ode)"),
        )),
    }
}

fn parse_projectors(t: &Table) -> Result<ProjectorSpec, ScenarioError> {
    match as_str("projectors.type", required(t, "projectors", "type")?)? {
        "coordinate-split" => {
            reject_unknown(t, "projectors", &["type", "blocks"])?;
            let blocks = as_array("projectors.blocks", required(t, "projectors", "blocks")?)?;
            match blocks.as_slice() {
                [a, b, c] => Ok(ProjectorSpec::CoordinateSplit([
                    as_usize("projectors.blocks", a)?,
                    as_usize("projectors.blocks", b)?,
                    as_usize("projectors.blocks", c)?,
                ])),
                _ => Err(invalid("projectors.blocks", "expected three block sizes")),
            }
        }
        "explicit" => {
            reject_unknown(t, "projectors", &["type", "p1", "p2", "p3"])?;
            let m = |k: &str| matrix(&join("projectors", k), required(t, "projectors", k)?);
            Ok(ProjectorSpec::Explicit([m("p1")?, m("p2")?, m("p3")?]))
        }
        other => Err(invalid(
            "projectors.type",
            format!("unknown projector type '{other}' (expected coordinate-split or explicit)"),
        )),
    }
}

fn parse_rate(key: &str, v: &Value) -> Result<RateSpec, ScenarioError> {
    let t = as_table(key, v)?;
    let kind_key = join(key, "kind");
    match as_str(&kind_key, required(t, key, "kind")?)? {
        kind @ ("exponential" | "polynomial") => {
            reject_unknown(t, key, &["kind", "exponent"])?;
            let a = as_f64(&join(key, "exponent"), required(t, key, "exponent")?)?;
            Ok(if kind == "exponential" {
                RateSpec::Exponential(a)
            } else {
                RateSpec::Polynomial(a)
            })
        }
        "tabulated" => {
            reject_unknown(t, key, &["kind", "table"])?;
            Ok(RateSpec::Tabulated(knots(&join(key, "table"), required(t, key, "table")?)?))
        }
        other => Err(invalid(&kind_key, format!("unknown rate kind '{other}'"))),
    }
}

fn parse_bound(key: &str, v: &Value) -> Result<NBound, ScenarioError> {
    let t = as_table(key, v)?;
    let kind_key = join(key, "kind");
    let num = |k: &str| as_f64(&join(key, k), required(t, key, k)?);
    match as_str(&kind_key, required(t, key, "kind")?)? {
        "constant" => {
            reject_unknown(t, key, &["kind", "value"])?;
            Ok(NBound::Constant(num("value")?))
        }
        "affine" => {
            reject_unknown(t, key, &["kind", "slope", "intercept"])?;
            Ok(NBound::Affine {
                slope: num("slope")?,
                intercept: num("intercept")?,
            })
        }
        "tabulated" => {
            reject_unknown(t, key, &["kind", "table"])?;
            Ok(NBound::Tabulated(knots(&join(key, "table"), required(t, key, "table")?)?))
        }
        other => Err(invalid(&kind_key, format!("unknown bound kind '{other}'"))),
    }
}

fn parse_corollary(t: &Table) -> Result<CorollarySpec, ScenarioError> {
    reject_unknown(t, "corollary", &["kind", "exponents"])?;
    let kind = match as_str("corollary.kind", required(t, "corollary", "kind")?)? {
        "exponential" => RateFamily::Exponential,
        "polynomial" => RateFamily::Polynomial,
        other => return Err(invalid("corollary.kind", format!("unknown corollary kind '{other}'"))),
    };
    let raw = as_array("corollary.exponents", required(t, "corollary", "exponents")?)?;
    let values = raw
        .iter()
        .map(|v| as_f64("corollary.exponents", v))
        .collect::<Result<Vec<_>, _>>()?;
    let exponents: [f64; 4] = values
        .try_into()
        .map_err(|_| invalid("corollary.exponents", "expected four exponents"))?;
    Ok(CorollarySpec { kind, exponents })
}
