//! Named pass/fail checks with residuals, shared by every audit.

use std::fmt::Write as _;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Significant digits used when reports are serialized.
pub const REPORT_DIGITS: usize = 12;

/// Rounds to `digits` significant digits via decimal formatting.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x)
}

pub(crate) mod sig12 {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(round_sig(*x, REPORT_DIGITS))
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }

    pub fn serialize_slice<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&round_sig(*x, REPORT_DIGITS))?;
        }
        seq.end()
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditCheck {
    pub name: String,
    #[serde(with = "sig12")]
    pub residual: f64,
    #[serde(with = "sig12")]
    pub tolerance: f64,
    pub pass: bool,
    /// Advisory checks are reported but never fail the report.
    #[serde(default, skip_serializing_if = "is_false")]
    pub advisory: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub checks: Vec<AuditCheck>,
    pub notes: Vec<String>,
}

impl AuditReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `residual <= tolerance`; NaN fails.
    pub fn check(&mut self, name: impl Into<String>, residual: f64, tolerance: f64) -> bool {
        let pass = residual <= tolerance;
        self.checks.push(AuditCheck {
            name: name.into(),
            residual,
            tolerance,
            pass,
            advisory: false,
        });
        pass
    }

    pub fn advisory(&mut self, name: impl Into<String>, residual: f64, tolerance: f64) {
        self.checks.push(AuditCheck {
            name: name.into(),
            residual,
            tolerance,
            pass: residual <= tolerance,
            advisory: true,
        });
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// True when every non-advisory check passed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass || c.advisory)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AuditCheck> {
        self.checks.iter().filter(|c| !c.pass && !c.advisory)
    }

    pub fn get(&self, name: &str) -> Option<&AuditCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Appends `other` with `prefix.` on every check name and `[prefix]` on
    /// every note.
    pub fn absorb(&mut self, prefix: &str, other: AuditReport) {
        for mut c in other.checks {
            c.name = format!("{prefix}.{}", c.name);
            self.checks.push(c);
        }
        for n in other.notes {
            self.notes.push(format!("[{prefix}] {n}"));
        }
    }

    /// Same as [`absorb`](Self::absorb) but every absorbed check becomes advisory.
    pub fn absorb_advisory(&mut self, prefix: &str, mut other: AuditReport) {
        for c in &mut other.checks {
            c.advisory = true;
        }
        self.absorb(prefix, other);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Text,
}

pub fn emit_report(report: &AuditReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string(report).expect("report serializes"),
        ReportFormat::Text => {
            let mut out = String::new();
            for c in &report.checks {
                let status = match (c.pass, c.advisory) {
                    (true, _) => "PASS",
                    (false, true) => "WARN",
                    (false, false) => "FAIL",
                };
                let _ = writeln!(
                    out,
                    "{status} {} residual={:.11e} tolerance={:.3e}{}",
                    c.name,
                    c.residual,
                    c.tolerance,
                    if c.advisory { " (advisory)" } else { "" }
                );
            }
            for n in &report.notes {
                let _ = writeln!(out, "note: {n}");
            }
            let _ = writeln!(
                out,
                "overall: {}",
                if report.passed() { "PASS" } else { "FAIL" }
            );
            out
        }
    }
}
