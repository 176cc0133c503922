//! Machine-readable verification reports.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Config;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub id: String,
    pub suite: String,
    /// Plain-language statement of the identity under test.
    pub anchor: String,
    /// `None` when the case failed to run; see `error`.
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub instances: usize,
    /// Fitted constant reported alongside the residual, if any.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub cases: Vec<CaseResult>,
    pub config: Config,
    pub pass: bool,
    /// SHA-256 of the report with `digest` and `wall_time_s` left out.
    pub digest: String,
    pub wall_time_s: f64,
}

#[derive(Serialize)]
struct Hashed<'a> {
    suite: &'a str,
    cases: &'a [CaseResult],
    config: &'a Config,
    pass: bool,
}

impl SuiteReport {
    pub fn new(suite: &str, cases: Vec<CaseResult>, config: Config, wall_time_s: f64) -> Self {
        let pass = cases.iter().all(|c| c.pass);
        let mut r = Self {
            suite: suite.to_string(),
            cases,
            config,
            pass,
            digest: String::new(),
            wall_time_s,
        };
        r.digest = r.compute_digest();
        r
    }

    pub fn compute_digest(&self) -> String {
        let body = serde_json::to_vec(&Hashed {
            suite: &self.suite,
            cases: &self.cases,
            config: &self.config,
            pass: self.pass,
        })
        .expect("reports serialize");
        hex::encode(Sha256::digest(body))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn case(&self, id: &str) -> Option<&CaseResult> {
        self.cases.iter().find(|c| c.id == id)
    }

    /// One line per case for terminal output.
    pub fn summary_lines(&self) -> Vec<String> {
        self.cases
            .iter()
            .map(|c| {
                let residual = match (c.max_residual, &c.error) {
                    (Some(r), _) => format!("{r:.3e}"),
                    (None, Some(e)) => format!("error: {e}"),
                    (None, None) => "n/a".into(),
                };
                format!(
                    "{} {:<11} {:<44} residual {} (tol {:.0e})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.suite,
                    c.id,
                    residual,
                    c.tolerance
                )
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case(pass: bool) -> CaseResult {
        CaseResult {
            id: "x".into(),
            suite: "s".into(),
            anchor: "a".into(),
            max_residual: Some(if pass { 0.0 } else { 1.0 }),
            tolerance: 0.5,
            pass,
            instances: 1,
            value: None,
            error: None,
        }
    }

    #[test]
    fn digest_ignores_wall_time() {
        let a = SuiteReport::new("s", vec![case(true)], Config::default(), 1.0);
        let b = SuiteReport::new("s", vec![case(true)], Config::default(), 2.0);
        assert_eq!(a.digest, b.digest);
        let c = SuiteReport::new("s", vec![case(false)], Config::default(), 1.0);
        assert_ne!(a.digest, c.digest);
        assert!(!c.pass);
    }

    #[test]
    fn reports_roundtrip() {
        let a = SuiteReport::new("s", vec![case(true)], Config::default(), 1.0);
        let back: SuiteReport = serde_json::from_str(&a.to_json()).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.compute_digest(), a.digest);
    }
}
