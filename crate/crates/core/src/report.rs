//! Verification records and their CSV rendering.

use std::fmt::Write as _;

/// One measured quantity compared against its expected value.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub claim_id: String,
    pub trial: usize,
    pub quantity: String,
    pub expected: f64,
    pub measured: f64,
    pub abs_err: f64,
    pub passed: bool,
}

impl Record {
    /// Equality check `|measured - expected| <= tol`.
    pub fn close(claim_id: &str, trial: usize, quantity: impl Into<String>, expected: f64, measured: f64, tol: f64) -> Self {
        let abs_err = (measured - expected).abs();
        Self {
            claim_id: claim_id.to_string(),
            trial,
            quantity: quantity.into(),
            expected,
            measured,
            abs_err,
            passed: abs_err <= tol,
        }
    }

    /// Inequality check `measured <= bound + tol`; the violation is the excess.
    pub fn at_most(claim_id: &str, trial: usize, quantity: impl Into<String>, bound: f64, measured: f64, tol: f64) -> Self {
        let excess = (measured - bound).max(0.0);
        Self {
            claim_id: claim_id.to_string(),
            trial,
            quantity: quantity.into(),
            expected: bound,
            measured,
            abs_err: excess,
            passed: excess <= tol,
        }
    }

    /// Boolean outcome; `measured` is 1 for true.
    pub fn holds(claim_id: &str, trial: usize, quantity: impl Into<String>, ok: bool) -> Self {
        let measured = if ok { 1.0 } else { 0.0 };
        Self {
            claim_id: claim_id.to_string(),
            trial,
            quantity: quantity.into(),
            expected: 1.0,
            measured,
            abs_err: 1.0 - measured,
            passed: ok,
        }
    }
}

/// Pass/fail summary of one claim over many trials.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub claim_id: String,
    pub trials: usize,
    pub max_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub details: Vec<Record>,
}

impl VerificationReport {
    /// Aggregates records; `max_violation` is the largest error among the
    /// records and `passed` requires every record to pass.
    pub fn new(claim_id: &str, trials: usize, tolerance: f64, details: Vec<Record>) -> Self {
        let max_violation = details
            .iter()
            .map(|r| if r.abs_err.is_nan() { f64::INFINITY } else { r.abs_err })
            .fold(0.0, f64::max);
        let passed = details.iter().all(|r| r.passed);
        Self { claim_id: claim_id.to_string(), trials, max_violation, tolerance, passed, details }
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{}: {} (trials={}, max_violation={:.3e}, tolerance={:.1e})",
            self.claim_id,
            if self.passed { "PASS" } else { "FAIL" },
            self.trials,
            self.max_violation,
            self.tolerance
        )
    }
}

pub const CSV_HEADER: &str = "claim_id,trial,quantity,expected,measured,abs_err,passed";

/// CSV table of every record followed by one summary row per report.
pub fn to_csv(reports: &[VerificationReport]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for rep in reports {
        for r in &rep.details {
            let _ = writeln!(
                out,
                "{},{},{},{:e},{:e},{:e},{}",
                r.claim_id,
                r.trial,
                csv_field(&r.quantity),
                r.expected,
                r.measured,
                r.abs_err,
                r.passed
            );
        }
    }
    for rep in reports {
        let _ = writeln!(
            out,
            "summary,{},{},max_violation,{:e},{:e},{}",
            rep.claim_id, rep.trials, rep.tolerance, rep.max_violation, rep.passed
        );
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
