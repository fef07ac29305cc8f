use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub label: String,
    pub value: f64,
}

/// Outcome of one verification. `pass` holds exactly when
/// `max_error <= tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub label: String,
    pub pass: bool,
    pub max_error: f64,
    pub tolerance: f64,
    #[serde(default)]
    pub diagnostics: Vec<Diagnostic>,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(label: impl Into<String>, max_error: f64, tolerance: f64) -> Self {
        Self {
            label: label.into(),
            pass: max_error <= tolerance,
            max_error,
            tolerance,
            diagnostics: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// A check that could not be carried out.
    pub fn failed(label: impl Into<String>, reason: impl Into<String>) -> Self {
        let mut r = Self::new(label, f64::INFINITY, 0.0);
        r.notes.push(reason.into());
        r
    }

    pub fn with(mut self, label: impl Into<String>, value: f64) -> Self {
        self.diagnostics.push(Diagnostic { label: label.into(), value });
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<34} max_error={:.3e} tol={:.1e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.label,
            self.max_error,
            self.tolerance
        )?;
        for d in &self.diagnostics {
            write!(f, " {}={:.6e}", d.label, d.value)?;
        }
        for n in &self.notes {
            write!(f, " [{n}]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_flag_follows_error() {
        assert!(Report::new("a", 1e-9, 1e-8).pass);
        assert!(!Report::new("a", 1e-7, 1e-8).pass);
        assert!(!Report::new("a", f64::NAN, 1e-8).pass);
        assert!(!Report::failed("a", "boom").pass);
    }
}
