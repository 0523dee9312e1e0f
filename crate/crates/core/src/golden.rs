//! Golden PID values: a JSON file of reference decompositions and the check
//! that recomputes them.
//!
//! ```json
//! {
//!   "provenance": { "tool": "hand-derived", "version": "1", "tolerance": 1e-6 },
//!   "distributions": { "and": { "dims": [2, 2, 2], "p": [...] } },
//!   "entries": [
//!     { "distribution": "and", "method": "broja",
//!       "UnqR": 0.0, "UnqC": 0.0, "Shd": 0.311278, "Syn": 0.5, "tolerance": 1e-4 }
//!   ]
//! }
//! ```
//!
//! An entry's `tolerance` overrides the file-wide one. `variant` selects the
//! ccs construction and defaults to the library default.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dist::{gates, DistDoc, JointDist3};
use crate::error::{Error, Result};
use crate::pid::{self, BrojaOptions, CcsVariant, Method, PidComponents};

/// Golden entries must satisfy the consistency identities against their own
/// distribution to this precision.
pub const CONSISTENCY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenEntry {
    pub distribution: String,
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<CcsVariant>,
    #[serde(rename = "UnqR")]
    pub unq_r: f64,
    #[serde(rename = "UnqC")]
    pub unq_c: f64,
    #[serde(rename = "Shd")]
    pub shd: f64,
    #[serde(rename = "Syn")]
    pub syn: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl GoldenEntry {
    pub fn components(&self) -> [f64; 4] {
        [self.unq_r, self.unq_c, self.shd, self.syn]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenSet {
    pub provenance: Provenance,
    pub distributions: BTreeMap<String, DistDoc>,
    pub entries: Vec<GoldenEntry>,
}

/// Outcome for one entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryCheck {
    pub distribution: String,
    pub method: Method,
    pub tolerance: f64,
    /// Largest absolute component difference, when the method ran.
    pub max_diff: Option<f64>,
    /// Largest violation of the identities by the golden values themselves.
    pub golden_consistency: Option<f64>,
    pub computed: Option<[f64; 4]>,
    pub error: Option<String>,
    pub nonconvergence: bool,
}

impl EntryCheck {
    pub fn passed(&self) -> bool {
        self.error.is_none()
            && self.max_diff.is_some_and(|d| d <= self.tolerance)
            && self.golden_consistency.is_some_and(|e| e <= CONSISTENCY_TOL)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldenReport {
    pub checks: Vec<EntryCheck>,
}

impl GoldenReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(EntryCheck::passed)
    }

    pub fn any_nonconvergence(&self) -> bool {
        self.checks.iter().any(|c| c.nonconvergence)
    }

    pub fn failures(&self) -> impl Iterator<Item = &EntryCheck> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

impl GoldenSet {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).expect("serializable");
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    /// Recomputes every entry and compares it with the stored values.
    pub fn verify(&self) -> GoldenReport {
        let checks = self.entries.iter().map(|e| self.check(e)).collect();
        GoldenReport { checks }
    }

    fn check(&self, entry: &GoldenEntry) -> EntryCheck {
        let mut out = EntryCheck {
            distribution: entry.distribution.clone(),
            method: entry.method,
            tolerance: entry.tolerance.unwrap_or(self.provenance.tolerance),
            max_diff: None,
            golden_consistency: None,
            computed: None,
            error: None,
            nonconvergence: false,
        };
        let dist = match self.distributions.get(&entry.distribution) {
            Some(doc) => JointDist3::from_doc(doc.clone()),
            None => Err(Error::InvalidConfig(format!(
                "golden entry references unknown distribution `{}`",
                entry.distribution
            ))),
        };
        let result = dist.and_then(|d| {
            let s = d.summary()?;
            let golden = PidComponents {
                method: entry.method,
                unq_r: entry.unq_r,
                unq_c: entry.unq_c,
                shd: entry.shd,
                syn: entry.syn,
            };
            out.golden_consistency = Some(golden.consistency_error(&s));
            compute(&d, entry.method, entry.variant)
        });
        match result {
            Ok(c) => {
                let got = [c.unq_r, c.unq_c, c.shd, c.syn];
                let diff = got
                    .iter()
                    .zip(entry.components())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                out.computed = Some(got);
                out.max_diff = Some(if diff.is_nan() { f64::INFINITY } else { diff });
            }
            Err(e) => {
                out.nonconvergence = matches!(e, Error::NonConvergence { .. });
                out.error = Some(e.to_string());
            }
        }
        out
    }
}

fn compute(d: &JointDist3, method: Method, variant: Option<CcsVariant>) -> Result<PidComponents> {
    match (method, variant) {
        (Method::Ccs, Some(v)) => pid::pid_ccs(d, v),
        (Method::Broja, _) => pid::pid_broja(d, &BrojaOptions::default()).map(|(c, _)| c),
        (m, _) => pid::decompose(d, m),
    }
}

/// Hand-derived values for the four canonical gates.
///
/// AND: with p(y=1) = 1/4, I(Y;R) = I(Y;C) = 3/2 − (3/4)·log2 3 and
/// I(Y;R|C) = 1/2. The minimum of the two specific informations is the same
/// for both outcomes, so imin puts all of I(Y;R) in Shd; broja agrees because
/// P itself minimizes I(Y;R|C) over the feasible set. For ccs only the state
/// (0,0,0) passes the sign test, contributing (1/4)·log2(4/3).
/// XOR carries only synergy, RDN only shared information and UNQ only
/// information unique to R, for every method.
pub fn gate_goldens() -> GoldenSet {
    let log2_3 = 3f64.log2();
    let and_shd = 1.5 - 0.75 * log2_3;
    let and_ccs_shd = 0.25 * (4.0f64 / 3.0).log2();
    let and_ccs_unq = and_shd - and_ccs_shd;

    let mut entries = Vec::new();
    let mut push = |name: &str, method: Method, tol: Option<f64>, v: [f64; 4]| {
        entries.push(GoldenEntry {
            distribution: name.to_owned(),
            method,
            variant: (method == Method::Ccs).then_some(CcsVariant::ObservedJoint),
            unq_r: v[0],
            unq_c: v[1],
            shd: v[2],
            syn: v[3],
            tolerance: tol,
        });
    };
    push("and", Method::Imin, None, [0.0, 0.0, and_shd, 0.5]);
    push("and", Method::Broja, Some(1e-4), [0.0, 0.0, and_shd, 0.5]);
    push("and", Method::Ccs, None, [and_ccs_unq, and_ccs_unq, and_ccs_shd, 0.5 - and_ccs_unq]);
    for (name, v) in [
        ("xor", [0.0, 0.0, 0.0, 1.0]),
        ("rdn", [0.0, 0.0, 1.0, 0.0]),
        ("unq", [1.0, 0.0, 0.0, 0.0]),
    ] {
        for m in Method::IMPLEMENTED {
            push(name, m, (m == Method::Broja).then_some(1e-4), v);
        }
    }

    let distributions = ["and", "xor", "rdn", "unq"]
        .into_iter()
        .map(|n| (n.to_owned(), gates::by_name(n).expect("known gate").to_doc()))
        .collect();
    GoldenSet {
        provenance: Provenance {
            tool: "hand-derived".into(),
            version: "1".into(),
            tolerance: 1e-6,
            note: Some("closed-form values for uniform-input logic gates".into()),
        },
        distributions,
        entries,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_goldens_verify() {
        let report = gate_goldens().verify();
        for c in &report.checks {
            assert!(c.passed(), "{c:?}");
        }
        assert_eq!(report.checks.len(), 12);
    }

    #[test]
    fn round_trip_and_detects_mismatch() {
        let mut g = gate_goldens();
        let text = serde_json::to_string(&g).unwrap();
        assert!(text.contains("\"UnqR\""));
        assert_eq!(serde_json::from_str::<GoldenSet>(&text).unwrap(), g);

        g.entries[0].shd += 1e-3;
        let report = g.verify();
        assert!(!report.passed());
        assert_eq!(report.failures().count(), 1);

        g.entries[0].distribution = "nand".into();
        assert!(g.verify().checks[0].error.is_some());
    }
}
