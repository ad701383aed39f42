use std::fmt;

/// Worst residual observed for one named condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub condition: String,
    pub worst: f64,
    /// Where the worst value occurred, as `(t, s)` (or `(t, t)` for single times).
    pub at: Option<(f64, f64)>,
}

/// Outcome of a structural check: one worst residual per condition.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub tol: f64,
    pub residuals: Vec<Residual>,
    pub passed: bool,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub(crate) fn new(name: &str, tol: f64) -> Self {
        Self {
            name: name.to_string(),
            tol,
            residuals: Vec::new(),
            passed: true,
            notes: Vec::new(),
        }
    }

    pub(crate) fn record(&mut self, condition: &str, value: f64, at: Option<(f64, f64)>) {
        // NaN never counts as passing.
        let value = if value.is_nan() { f64::INFINITY } else { value };
        match self.residuals.iter_mut().find(|r| r.condition == condition) {
            Some(r) if value > r.worst => {
                r.worst = value;
                r.at = at;
            }
            Some(_) => {}
            None => self.residuals.push(Residual {
                condition: condition.to_string(),
                worst: value,
                at,
            }),
        }
    }

    pub(crate) fn finish(mut self) -> Self {
        self.passed = self.passed && self.residuals.iter().all(|r| r.worst <= self.tol);
        self
    }

    pub(crate) fn fail(&mut self, note: String) {
        self.passed = false;
        self.notes.push(note);
    }

    pub fn residual(&self, condition: &str) -> Option<f64> {
        self.residuals
            .iter()
            .find(|r| r.condition == condition)
            .map(|r| r.worst)
    }

    pub fn worst(&self) -> f64 {
        self.residuals.iter().map(|r| r.worst).fold(0.0, f64::max)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "pass" } else { "FAIL" };
        write!(f, "{} [{verdict}, tol {:e}]", self.name, self.tol)?;
        for r in &self.residuals {
            write!(f, " {}={:e}", r.condition, r.worst)?;
        }
        Ok(())
    }
}
