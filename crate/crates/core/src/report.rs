//! Verification records and their JSON and text renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub check_id: String,
    /// The identity being checked, written out.
    pub anchor: String,
    /// `None` when the check was skipped because an earlier stage failed.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub example_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Record {
    /// The module prefix of `check_id` (the part before the first dot).
    pub fn group(&self) -> &str {
        self.check_id.split('.').next().unwrap_or("")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub records: Vec<Record>,
    #[serde(default)]
    pub timings: Vec<(String, f64)>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a check; it passes iff the residual is finite and at most `tolerance`.
    pub fn check(&mut self, id: impl Into<String>, anchor: impl Into<String>, residual: f64, tolerance: f64) -> bool {
        let pass = residual.is_finite() && residual <= tolerance;
        self.records.push(Record {
            check_id: id.into(),
            anchor: anchor.into(),
            residual: Some(residual),
            tolerance,
            pass,
            example_id: String::new(),
            note: None,
        });
        pass
    }

    /// Adds a check with an explanatory note.
    pub fn check_noted(
        &mut self,
        id: impl Into<String>,
        anchor: impl Into<String>,
        residual: f64,
        tolerance: f64,
        note: impl Into<String>,
    ) -> bool {
        let pass = self.check(id, anchor, residual, tolerance);
        self.records.last_mut().expect("just pushed").note = Some(note.into());
        pass
    }

    pub fn skip(&mut self, id: impl Into<String>, anchor: impl Into<String>, reason: impl Into<String>) {
        self.records.push(Record {
            check_id: id.into(),
            anchor: anchor.into(),
            residual: None,
            tolerance: 0.0,
            pass: false,
            example_id: String::new(),
            note: Some(reason.into()),
        });
    }

    pub fn merge(&mut self, other: VerificationReport) {
        self.records.extend(other.records);
        self.timings.extend(other.timings);
    }

    /// Prefixes every check id not already starting with `prefix`.
    pub fn prefixed(mut self, prefix: &str) -> Self {
        let head = format!("{prefix}.");
        for r in &mut self.records {
            if !r.check_id.starts_with(&head) {
                r.check_id = format!("{head}{}", r.check_id);
            }
        }
        self
    }

    pub fn set_example(&mut self, example: &str) {
        for r in &mut self.records {
            if r.example_id.is_empty() {
                r.example_id = example.to_string();
            }
        }
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> Vec<&Record> {
        self.records.iter().filter(|r| !r.pass).collect()
    }

    pub fn get(&self, id: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.check_id == id)
    }

    /// Records whose id starts with `prefix`.
    pub fn matching<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a Record> + 'a {
        self.records.iter().filter(move |r| r.check_id.starts_with(prefix))
    }

    /// Largest residual among records whose id starts with `prefix`;
    /// infinite if any of them was skipped, `None` if there are none.
    pub fn worst(&self, prefix: &str) -> Option<f64> {
        let mut out: Option<f64> = None;
        for r in self.matching(prefix) {
            let v = r.residual.unwrap_or(f64::INFINITY);
            out = Some(out.map_or(v, |w| w.max(v)));
        }
        out
    }

    pub fn summary(&self) -> Summary {
        let skipped = self.records.iter().filter(|r| r.residual.is_none()).count();
        let passed = self.records.iter().filter(|r| r.pass).count();
        Summary { total: self.records.len(), passed, failed: self.records.len() - passed - skipped, skipped }
    }

    pub fn add_timing(&mut self, stage: &str, seconds: f64) {
        self.timings.push((stage.to_string(), seconds));
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Out<'a> {
            records: &'a [Record],
            summary: Summary,
            timings: &'a [(String, f64)],
        }
        serde_json::to_string_pretty(&Out { records: &self.records, summary: self.summary(), timings: &self.timings })
            .expect("report serializes")
    }

    /// Reads the output of [`to_json`](Self::to_json); the summary is recomputed.
    pub fn from_json(text: &str) -> crate::error::Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::error::Error::SpecInvalid(format!("report: {e}")))
    }

    /// JSON without timings, for determinism comparisons.
    pub fn records_json(&self) -> String {
        serde_json::to_string(&self.records).expect("records serialize")
    }

    pub fn to_text(&self) -> String {
        let mut groups: BTreeMap<(&str, &str), Vec<&Record>> = BTreeMap::new();
        for r in &self.records {
            groups.entry((r.example_id.as_str(), r.group())).or_default().push(r);
        }
        let mut out = String::new();
        for ((example, group), recs) in &groups {
            let failed = recs.iter().filter(|r| !r.pass).count();
            let worst = recs.iter().map(|r| r.residual.unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
            let label = if example.is_empty() { group.to_string() } else { format!("{example}/{group}") };
            let _ =
                writeln!(out, "{label:<40} {:>4} checks  {:>3} failed  worst residual {worst:.3e}", recs.len(), failed);
            for r in recs.iter().filter(|r| !r.pass) {
                let res = r.residual.map_or("skipped".to_string(), |v| format!("{v:.3e}"));
                let _ = writeln!(out, "    FAIL {} [{}] residual {res} tol {:.1e}", r.check_id, r.anchor, r.tolerance);
                if let Some(n) = &r.note {
                    let _ = writeln!(out, "         {n}");
                }
            }
        }
        let s = self.summary();
        let _ = writeln!(out, "total {}  passed {}  failed {}  skipped {}", s.total, s.passed, s.failed, s.skipped);
        for (stage, secs) in &self.timings {
            let _ = writeln!(out, "  {stage:<24} {secs:.3}s");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report() {
        let r = VerificationReport::new();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["records"].as_array().unwrap().len(), 0);
        assert_eq!(v["summary"]["total"], 0);
        assert!(r.all_pass());
    }

    #[test]
    fn pass_iff_within_tolerance() {
        let mut r = VerificationReport::new();
        assert!(r.check("a.x", "x = x", 1e-13, 1e-12));
        assert!(!r.check("a.y", "y = y", 1e-11, 1e-12));
        assert!(!r.check("a.z", "z = z", f64::NAN, 1e-12));
        r.skip("b.w", "w = w", "upstream failure");
        let s = r.summary();
        assert_eq!((s.total, s.passed, s.failed, s.skipped), (4, 1, 2, 1));
        assert_eq!(r.worst("b."), Some(f64::INFINITY));
        let text = r.to_text();
        assert!(text.contains("FAIL a.y"));
        assert!(text.contains("skipped"));
    }
}
