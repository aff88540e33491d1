//! Library side of the `frw-dirac` command: configuration, reports and the
//! invariant suites, shared by the binary and the acceptance tests.

pub mod config;
pub mod report;
pub mod suites;

use std::fmt;

use frw_dirac::Error;

use crate::config::RunConfig;
use crate::report::Report;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERIC: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config values or paths.
    Usage(String),
    /// The computation itself failed to converge.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Convergence(_) | Error::StepUnderflow { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Basis,
    Projectors,
    Dynamics,
    Limit,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Basis => "basis",
            Suite::Projectors => "projectors",
            Suite::Dynamics => "dynamics",
            Suite::Limit => "limit",
        }
    }
}

pub fn spectrum_report(lambda_max: f64) -> Report {
    let (checks, table) = suites::spectrum_checks(lambda_max);
    Report::new("spectrum", checks, table)
}

pub fn verify_report(suite: Suite, cfg: &RunConfig) -> Result<Report, CliError> {
    let (checks, table) = match suite {
        Suite::Basis => {
            let mut checks = suites::spectrum_suite(cfg);
            checks.extend(suites::gram_checks(&cfg.basis)?);
            checks.push(suites::residual_check(&cfg.basis, cfg.seed)?);
            (checks, serde_json::Value::Null)
        }
        Suite::Projectors => {
            let mut checks = suites::projector_checks(&cfg.projectors, cfg.seed)?;
            checks.push(suites::idempotency(&cfg.projectors.idempotency)?);
            (checks, serde_json::Value::Null)
        }
        Suite::Dynamics => {
            let (mut checks, table) = suites::wkb_sweep(&cfg.dynamics)?;
            checks.push(suites::magnitude_check(&cfg.dynamics));
            checks.extend(suites::lifetime_checks(&cfg.dynamics, cfg.seed)?);
            let (norm, norm_table) = suites::normalize_study(&cfg.normalize)?;
            checks.extend(norm);
            (checks, serde_json::json!({"wkb": table, "normalization": norm_table}))
        }
        Suite::Limit => suites::limit_study(&cfg.limit)?,
    };
    Ok(Report::new(format!("verify {}", suite.name()), checks, table))
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(text: &str, path: Option<&std::path::Path>) -> Result<(), CliError> {
    use std::io::Write;
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Usage(format!("stdout: {e}"))),
    }
}

pub fn kernel_csv(cfg: &config::KernelConfig) -> Result<String, CliError> {
    let rows = suites::kernel_rows(cfg)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["S", "t", "r", "row", "col", "re", "im", "abs_err"]).expect("in-memory write");
    for row in &rows {
        w.write_record(row).expect("in-memory write");
    }
    Ok(String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_report_examples() {
        let r = spectrum_report(3.0);
        let rows = r.table.as_array().unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0]["lambda"], "3/2");
        assert_eq!(rows[0]["degeneracy"], 2);
        assert_eq!(rows[3]["lambda"], "-5/2");
        assert_eq!(rows[3]["degeneracy"], 6);
        assert!(r.pass);
        let empty = spectrum_report(1.0);
        assert!(empty.table.as_array().unwrap().is_empty());
        assert!(empty.pass);
    }

    #[test]
    fn error_mapping() {
        assert_eq!(CliError::from(Error::Domain("x".into())).exit_code(), EXIT_USAGE);
        assert_eq!(CliError::from(Error::Convergence("x".into())).exit_code(), EXIT_NUMERIC);
        assert_eq!(CliError::from(Error::StepUnderflow { tau: 0.0, h: 0.0 }).exit_code(), EXIT_NUMERIC);
    }

    #[test]
    fn kernel_header_and_domain() {
        let cfg = config::KernelConfig { s: 10.0, r: 1.0, ..Default::default() };
        let text = kernel_csv(&cfg).unwrap();
        assert!(text.starts_with("S,t,r,row,col,re,im,abs_err\n"));
        assert_eq!(text.lines().count(), 17);
        let far = config::KernelConfig { s: 1.0, r: 3.2, ..Default::default() };
        assert_eq!(kernel_csv(&far).unwrap_err().exit_code(), EXIT_USAGE);
    }

    #[test]
    fn near_check_tolerance() {
        let c = report::Check::near("x", 1.2, 1.0, 0.3, "o");
        assert!(c.pass);
        assert!(!report::Check::near("x", 2.0, 1.0, 0.3, "o").pass);
        assert!(report::Check::at_most("y", 1e-9, 1e-8, "o").pass);
    }
}
