//! Report documents: resolved config, results, checks with their tolerances,
//! and in-memory artifacts written on demand.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = ">")]
    Above,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, relation: Relation, tolerance: f64) -> Self {
        let passed = match relation {
            Relation::AtMost => value <= tolerance,
            Relation::AtLeast => value >= tolerance,
            Relation::Above => value > tolerance,
        };
        Self { name: name.into(), value, relation, tolerance, passed }
    }

    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::new(name, value, Relation::AtMost, tolerance)
    }

    pub fn at_least(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::new(name, value, Relation::AtLeast, tolerance)
    }
}

#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub document: Value,
    pub checks: Vec<Check>,
    pub artifacts: Vec<Artifact>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            2
        }
    }

    /// Writes `report.json` and every artifact into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), CliError> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), self.to_pretty())?;
        for a in &self.artifacts {
            fs::write(dir.join(&a.name), &a.bytes)?;
        }
        Ok(())
    }

    pub fn to_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.document).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Accumulates results, checks and artifacts of one run.
#[derive(Debug, Default)]
pub struct ReportBuilder {
    results: serde_json::Map<String, Value>,
    checks: Vec<Check>,
    artifacts: Vec<Artifact>,
}

impl ReportBuilder {
    pub fn result(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.results.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn check(&mut self, c: Check) -> &mut Self {
        self.checks.push(c);
        self
    }

    pub fn artifact(&mut self, name: &str, bytes: Vec<u8>) -> &mut Self {
        self.artifacts.push(Artifact { name: name.to_string(), bytes });
        self
    }

    pub fn finish(self, config: &ExperimentConfig) -> Report {
        let passed = self.checks.iter().all(|c| c.passed);
        let document = json!({
            "tool": "gaborkit",
            "version": env!("CARGO_PKG_VERSION"),
            "command": config.command.name(),
            "config": config.to_json(),
            "config_hash": config.hash(),
            "results": Value::Object(self.results),
            "checks": self.checks,
            "artifacts": self.artifacts.iter().map(|a| a.name.clone()).collect::<Vec<_>>(),
            "passed": passed,
        });
        Report { document, checks: self.checks, artifacts: self.artifacts }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Command;

    #[test]
    fn check_relations() {
        assert!(Check::at_most("a", 1e-12, 1e-10).passed);
        assert!(!Check::at_most("a", f64::NAN, 1e-10).passed);
        assert!(!Check::at_least("b", 0.4, 0.5).passed);
        assert!(!Check::new("c", 1.0, Relation::Above, 1.0).passed);
    }

    #[test]
    fn document_layout() {
        let cfg = ExperimentConfig::new(Command::Norms);
        let mut b = ReportBuilder::default();
        b.result("x", 1.5).check(Check::at_most("x small", 1.5, 2.0)).artifact("a.csv", b"1\n".to_vec());
        let r = b.finish(&cfg);
        assert!(r.passed());
        assert_eq!(r.document["config_hash"], json!(cfg.hash()));
        assert_eq!(r.document["checks"][0]["relation"], json!("<="));
        assert_eq!(r.document["artifacts"], json!(["a.csv"]));
    }
}
