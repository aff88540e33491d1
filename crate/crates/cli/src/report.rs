use serde::Serialize;

/// How a check's value is compared against its tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// value ≤ tolerance
    AtMost,
    /// |value − target| ≤ tolerance
    Near,
}

/// One numeric result with its tolerance and the oracle it was checked against.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    pub tolerance: f64,
    pub oracle: String,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64, oracle: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::AtMost,
            target: None,
            tolerance,
            oracle: oracle.into(),
            pass: value <= tolerance,
        }
    }

    pub fn near(name: impl Into<String>, value: f64, target: f64, tolerance: f64, oracle: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::Near,
            target: Some(target),
            tolerance,
            oracle: oracle.into(),
            pass: (value - target).abs() <= tolerance,
        }
    }

    /// An exact statement, recorded as 0 (false) or 1 (true) against target 1.
    pub fn holds(name: impl Into<String>, ok: bool, oracle: impl Into<String>) -> Self {
        Self::near(name, if ok { 1.0 } else { 0.0 }, 1.0, 0.0, oracle)
    }

    pub fn summary(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        match (self.relation, self.target) {
            (Relation::Near, Some(t)) => {
                format!("{verdict} {}: {:.6e} (target {:.6e} +/- {:.1e})", self.name, self.value, t, self.tolerance)
            }
            _ => format!("{verdict} {}: {:.6e} (<= {:.1e})", self.name, self.value, self.tolerance),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub table: serde_json::Value,
    pub pass: bool,
}

impl Report {
    pub fn new(command: impl Into<String>, checks: Vec<Check>, table: serde_json::Value) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self { command: command.into(), checks, table, pass }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
