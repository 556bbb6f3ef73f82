//! Structured experiment reports with deterministic CSV serialization.
//!
//! A report records the parameter grid, one metrics row per parameter value,
//! and a list of named pass/fail checks evaluated against tolerances that
//! were pinned when the experiment was written (never recomputed ad hoc).
//! Serialization uses a fixed float format, so identical runs produce
//! byte-identical files; anything non-deterministic (wall-clock timings)
//! belongs in the run manifest, not here.

use std::fmt::Write as _;
use std::path::Path;

/// One tolerance check inside an [`ExperimentReport`].
#[derive(Debug, Clone)]
pub struct Check {
    /// Short machine-friendly name.
    pub name: String,
    /// Did the run satisfy the stored tolerance?
    pub passed: bool,
    /// Human-readable evidence (measured vs allowed).
    pub detail: String,
}

impl Check {
    /// Build a check, formatting the detail once.
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.into(), passed, detail }
    }
}

/// Result of a lab experiment: parameters, metric rows, checks, provenance.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    /// Experiment name (used for file naming).
    pub name: String,
    /// Echoed parameters, in insertion order.
    pub params: Vec<(String, String)>,
    /// Metric column names.
    pub columns: Vec<String>,
    /// One row per parameter-grid entry; lengths match `columns`.
    pub rows: Vec<Vec<f64>>,
    /// Pass/fail checks with stored tolerances.
    pub checks: Vec<Check>,
    /// Seed the run was started with.
    pub seed: u64,
    /// Crate version, for provenance.
    pub version: String,
}

/// Fixed, locale-independent float formatting used in all CSV output.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // Normalize -0.0 so bitwise-equal runs cannot differ in sign of zero.
        return "0.000000000000e0".into();
    }
    format!("{x:.12e}")
}

impl ExperimentReport {
    /// Start an empty report.
    pub fn new(name: &str, columns: &[&str], seed: u64) -> Self {
        Self {
            name: name.into(),
            params: Vec::new(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            checks: Vec::new(),
            seed,
            version: crate::VERSION.into(),
        }
    }

    /// Echo a parameter.
    pub fn param(&mut self, key: &str, value: impl std::fmt::Display) {
        self.params.push((key.into(), value.to_string()));
    }

    /// Append a metrics row (must match the declared columns).
    pub fn push_row(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row/column mismatch");
        self.rows.push(row);
    }

    /// Append a check.
    pub fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check::new(name, passed, detail));
    }

    /// Convenience: check `|measured − target| ≤ tol`.
    pub fn check_abs(&mut self, name: &str, measured: f64, target: f64, tolabs: f64) {
        let ok = (measured - target).abs() <= tolabs;
        self.check(
            name,
            ok,
            format!("measured {measured:.6e}, target {target:.6e}, tol {tolabs:.3e}"),
        );
    }

    /// All checks passed?
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Deterministic CSV serialization (header comments, columns, rows,
    /// trailing check lines).
    pub fn csv_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# experiment = {}", self.name);
        let _ = writeln!(s, "# version = {}", self.version);
        let _ = writeln!(s, "# seed = {}", self.seed);
        for (k, v) in &self.params {
            let _ = writeln!(s, "# param {k} = {v}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        for c in &self.checks {
            let _ = writeln!(
                s,
                "# check {} = {} ({})",
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                c.detail
            );
        }
        s
    }

    /// Write `csv_string` to a file.
    ///
    /// # Errors
    /// Propagates I/O failures.
    pub fn write_csv(&self, path: &Path) -> crate::Result<()> {
        std::fs::write(path, self.csv_string())?;
        Ok(())
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        let npass = self.checks.iter().filter(|c| c.passed).count();
        format!(
            "{}: {} rows, {}/{} checks passed",
            self.name,
            self.rows.len(),
            npass,
            self.checks.len()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_is_deterministic() {
        let build = || {
            let mut r = ExperimentReport::new("demo", &["lambda", "energy"], 7);
            r.param("grid", "16x16");
            r.push_row(vec![100.0, 1.999999]);
            r.push_row(vec![1000.0, -0.0]);
            r.check("gap_decreasing", true, "ok".into());
            r.csv_string()
        };
        let a = build();
        let b = build();
        assert_eq!(a, b);
        assert!(a.contains("lambda,energy"));
        assert!(a.contains("# check gap_decreasing = PASS"));
        // -0.0 normalized.
        assert!(a.contains("0.000000000000e0"));
        assert!(!a.contains("-0.000000000000e0"));
    }

    #[test]
    #[should_panic(expected = "row/column mismatch")]
    fn row_shape_enforced() {
        let mut r = ExperimentReport::new("demo", &["a"], 0);
        r.push_row(vec![1.0, 2.0]);
    }
}
