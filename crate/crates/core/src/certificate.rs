//! The tagged certificate record shared by every certifier, and the check
//! transcript entries inside it.

use serde::{Deserialize, Serialize};

use crate::counting::{CountCertificate, RefutationCertificate};
use crate::eigencount::IndsetRefutationCertificate;
use crate::geometry::{BalanceCertificate, ClusterCertificate};
use crate::instance::canonical_json;

/// Whether a check decides if the nontrivial bound is attempted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckRole {
    Gate,
    Info,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
    pub role: CheckRole,
}

fn finite(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(f64::MIN, f64::MAX)
    }
}

impl Check {
    pub fn gate(name: &str, measured: f64, threshold: f64, passed: bool) -> Self {
        Self { name: name.into(), measured: finite(measured), threshold: finite(threshold), passed, role: CheckRole::Gate }
    }

    pub fn info(name: &str, measured: f64, threshold: f64, passed: bool) -> Self {
        Self { name: name.into(), measured: finite(measured), threshold: finite(threshold), passed, role: CheckRole::Info }
    }
}

/// All gates in `checks` passed.
pub fn gates_pass(checks: &[Check]) -> bool {
    checks.iter().filter(|c| c.role == CheckRole::Gate).all(|c| c.passed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    Count(CountCertificate),
    SkCount(CountCertificate),
    IndsetCount(CountCertificate),
    Clusters(ClusterCertificate),
    Balance(BalanceCertificate),
    Refutation(RefutationCertificate),
    IndsetRefutation(IndsetRefutationCertificate),
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Count(_) => "count",
            Self::SkCount(_) => "sk-count",
            Self::IndsetCount(_) => "indset-count",
            Self::Clusters(_) => "clusters",
            Self::Balance(_) => "balance",
            Self::Refutation(_) => "refutation",
            Self::IndsetRefutation(_) => "indset-refutation",
        }
    }

    pub fn instance_sha256(&self) -> &str {
        match self {
            Self::Count(c) | Self::SkCount(c) | Self::IndsetCount(c) => &c.instance_sha256,
            Self::Clusters(c) => &c.instance_sha256,
            Self::Balance(c) => &c.instance_sha256,
            Self::Refutation(c) => &c.instance_sha256,
            Self::IndsetRefutation(c) => &c.instance_sha256,
        }
    }

    pub fn set_instance_sha256(&mut self, hash: String) {
        match self {
            Self::Count(c) | Self::SkCount(c) | Self::IndsetCount(c) => c.instance_sha256 = hash,
            Self::Clusters(c) => c.instance_sha256 = hash,
            Self::Balance(c) => c.instance_sha256 = hash,
            Self::Refutation(c) => c.instance_sha256 = hash,
            Self::IndsetRefutation(c) => c.instance_sha256 = hash,
        }
    }

    pub fn to_json(&self) -> String {
        canonical_json(self)
    }

    pub fn from_json(s: &str) -> crate::Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
