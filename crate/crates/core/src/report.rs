use serde::{Deserialize, Serialize};

/// One named pass/fail check with the measured defect and the tolerance it
/// was held to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub defect: f64,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    /// Passes when `defect <= tol`.
    pub fn within(name: impl Into<String>, defect: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            pass: defect <= tol,
            defect,
            tol,
            note: None,
        }
    }

    pub fn new(name: impl Into<String>, pass: bool, defect: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            pass,
            defect,
            tol,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}
