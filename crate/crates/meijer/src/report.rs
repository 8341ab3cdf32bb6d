//! Residual reports shared by the hypergeometric checks and the identity
//! harness.

use serde::{Serialize, Serializer};

use crate::error::Error;
use crate::scalar::{Field, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

fn as_pair<S: Serializer>(v: &Scalar, s: S) -> std::result::Result<S::Ok, S::Error> {
    let z = v.to_c64();
    [z.re, z.im].serialize(s)
}

/// Outcome of evaluating one identity as lhs - rhs.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub identity_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trial: Option<usize>,
    pub params: serde_json::Value,
    #[serde(serialize_with = "as_pair")]
    pub lhs: Scalar,
    #[serde(serialize_with = "as_pair")]
    pub rhs: Scalar,
    pub abs_residual: f64,
    pub rel_residual: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped_reason: Option<String>,
}

impl IdentityReport {
    /// Compares lhs and rhs. The relative residual is |lhs - rhs| divided by
    /// max(1, scale), where `scale` is the largest term magnitude that went
    /// into either side. Two exact values pass only when they are equal.
    pub fn compare(
        id: &str,
        params: serde_json::Value,
        lhs: Scalar,
        rhs: Scalar,
        scale: f64,
        tolerance: f64,
    ) -> Self {
        let diff = lhs.clone() - rhs.clone();
        let abs = if diff.is_exact() && diff.is_zero_value() {
            0.0
        } else {
            let d = diff.to_c64().norm();
            // a nonzero exact difference never rounds to a pass
            if diff.is_exact() && d == 0.0 {
                f64::MIN_POSITIVE
            } else {
                d
            }
        };
        let scale = scale.max(lhs.to_c64().norm()).max(rhs.to_c64().norm());
        let rel = abs / scale.max(1.0);
        let pass = if diff.is_exact() {
            abs == 0.0 || rel <= tolerance && tolerance > 0.0
        } else {
            rel <= tolerance
        };
        IdentityReport {
            identity_id: id.to_string(),
            seed: None,
            trial: None,
            params,
            lhs,
            rhs,
            abs_residual: abs,
            rel_residual: rel,
            tolerance,
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
            skipped_reason: None,
        }
    }

    pub fn skipped(id: &str, params: serde_json::Value, reason: String, tolerance: f64) -> Self {
        IdentityReport {
            identity_id: id.to_string(),
            seed: None,
            trial: None,
            params,
            lhs: Scalar::real(f64::NAN),
            rhs: Scalar::real(f64::NAN),
            abs_residual: f64::NAN,
            rel_residual: f64::NAN,
            tolerance,
            verdict: Verdict::Skipped,
            skipped_reason: Some(reason),
        }
    }

    /// Skip with the error's tag when it is a precondition failure;
    /// otherwise the identity failed.
    pub fn from_error(id: &str, params: serde_json::Value, err: &Error, tolerance: f64) -> Self {
        let msg = err.to_string();
        let reason = if msg.starts_with(&format!("{}:", err.tag())) {
            msg
        } else {
            format!("{}: {}", err.tag(), msg)
        };
        let mut r = IdentityReport::skipped(id, params, reason, tolerance);
        if !err.is_precondition() {
            r.verdict = Verdict::Fail;
        }
        r
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }
}
