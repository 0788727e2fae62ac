use std::fmt::Write as _;

use super::ExperimentId;

/// One pass/fail verdict against a named acceptance criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub criterion: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// A CSV (or text) file produced by an experiment, kept in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub id: ExperimentId,
    pub params: Vec<(String, String)>,
    pub scalars: Vec<(String, f64)>,
    pub artifacts: Vec<Artifact>,
    pub verdicts: Vec<Verdict>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(id: ExperimentId) -> Self {
        ExperimentReport {
            id,
            params: Vec::new(),
            scalars: Vec::new(),
            artifacts: Vec::new(),
            verdicts: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn param(&mut self, k: &str, v: impl ToString) {
        self.params.push((k.to_string(), v.to_string()));
    }

    pub fn scalar(&mut self, k: impl Into<String>, v: f64) {
        self.scalars.push((k.into(), v));
    }

    pub fn artifact(&mut self, name: &str, content: String) {
        self.artifacts.push(Artifact {
            name: name.to_string(),
            content,
        });
    }

    pub fn verdict(&mut self, criterion: &'static str, passed: bool, detail: impl Into<String>) {
        self.verdicts.push(Verdict {
            criterion,
            passed,
            detail: detail.into(),
        });
    }

    pub fn note(&mut self, n: impl Into<String>) {
        self.notes.push(n.into());
    }

    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn get_scalar(&self, k: &str) -> Option<f64> {
        self.scalars.iter().find(|(n, _)| n == k).map(|(_, v)| *v)
    }

    pub fn get_artifact(&self, name: &str) -> Option<&str> {
        self.artifacts.iter().find(|a| a.name == name).map(|a| a.content.as_str())
    }

    /// The `report.txt` contents.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "experiment: {}", self.id).unwrap();
        writeln!(s, "\n[parameters]").unwrap();
        for (k, v) in &self.params {
            writeln!(s, "{k} = {v}").unwrap();
        }
        writeln!(s, "\n[summary]").unwrap();
        for (k, v) in &self.scalars {
            writeln!(s, "{k} = {v}").unwrap();
        }
        if !self.notes.is_empty() {
            writeln!(s, "\n[notes]").unwrap();
            for n in &self.notes {
                writeln!(s, "{n}").unwrap();
            }
        }
        writeln!(s, "\n[artifacts]").unwrap();
        for a in &self.artifacts {
            writeln!(s, "{}", a.name).unwrap();
        }
        writeln!(s, "\n[verdicts]").unwrap();
        for v in &self.verdicts {
            writeln!(s, "{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.criterion, v.detail).unwrap();
        }
        writeln!(s, "\noverall: {}", if self.all_passed() { "PASS" } else { "FAIL" }).unwrap();
        s
    }
}
