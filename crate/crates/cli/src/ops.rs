//! The work behind each subcommand, shared with the sweep driver.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use solgeo::counting::{self, CountOptions, PartitionMode, DEFAULT_PARTITION_EPS};
use solgeo::eigencount::{self, IndSetConstants};
use solgeo::geometry::{self, GeometryOptions};
use solgeo::instance::{
    canonical_json, sample_goe, sample_regular_graph, sample_signed_hypergraph, sample_signing, sample_unsigned_hypergraph,
    InstanceFile, Predicate, XorInstance,
};
use solgeo::oracle::{self, Constraints, OracleResult, Verification};
use solgeo::{Certificate, Error, SignedHypergraph};

use crate::error::{usage, CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    Csp,
    Xor,
    Hypergraph,
    Graph,
    Matrix,
}

/// Expected clause count, given directly or through the density.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Density {
    /// Expected number of clauses.
    M(f64),
    /// Clauses per variable.
    Delta(f64),
    /// `Δ = n^δ`.
    DeltaExp(f64),
}

impl Density {
    pub fn expected_clauses(self, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            Self::M(m) => m,
            Self::Delta(d) => d * nf,
            Self::DeltaExp(e) => nf.powf(1.0 + e),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenSpec {
    pub kind: Generator,
    pub k: usize,
    pub n: usize,
    pub density: Option<Density>,
    pub d: usize,
    pub seed: u64,
}

pub fn generate(spec: &GenSpec) -> Result<InstanceFile> {
    let GenSpec { kind, k, n, density, d, seed } = *spec;
    let m = || {
        density.map(|x| x.expected_clauses(n)).ok_or_else(|| usage(format!("{kind:?} instances need -m, --delta or --delta-exp")))
    };
    let seed_tag = Some(seed);
    Ok(match kind {
        Generator::Csp => InstanceFile::from_signed(&sample_signed_hypergraph(k, n, m()?, seed)?, seed_tag),
        Generator::Xor => InstanceFile::from_xor(&XorInstance::from_signed(&sample_signed_hypergraph(k, n, m()?, seed)?), seed_tag),
        Generator::Hypergraph => InstanceFile::from_hypergraph(&sample_unsigned_hypergraph(k, n, m()?, seed)?, seed_tag),
        Generator::Graph => InstanceFile::from_graph(&sample_regular_graph(n, d, seed)?, seed_tag),
        Generator::Matrix => InstanceFile::from_matrix(&sample_goe(n, seed)?, seed_tag),
    })
}

/// `sat`, `xor`, `nae` or `table:<bits>`, where character `p` of `bits`
/// says whether the pattern with bit `i` set for `c_i x_i = −1` is accepted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum PredicateSpec {
    Sat,
    Xor,
    Nae,
    Table(Vec<bool>),
}

impl FromStr for PredicateSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sat" => Ok(Self::Sat),
            "xor" => Ok(Self::Xor),
            "nae" => Ok(Self::Nae),
            _ => {
                let bits = s.strip_prefix("table:").ok_or_else(|| format!("unknown predicate {s:?}"))?;
                bits.chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        _ => Err(format!("table entries must be 0 or 1, got {c:?}")),
                    })
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map(Self::Table)
            }
        }
    }
}

impl From<PredicateSpec> for String {
    fn from(p: PredicateSpec) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for PredicateSpec {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl std::fmt::Display for PredicateSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Sat => f.write_str("sat"),
            Self::Xor => f.write_str("xor"),
            Self::Nae => f.write_str("nae"),
            Self::Table(t) => {
                f.write_str("table:")?;
                t.iter().try_for_each(|&b| f.write_str(if b { "1" } else { "0" }))
            }
        }
    }
}

impl PredicateSpec {
    pub fn build(&self, k: usize) -> Result<Predicate> {
        Ok(match self {
            Self::Sat => Predicate::ksat(k)?,
            Self::Xor => Predicate::xor(k)?,
            Self::Nae => Predicate::nae(k)?,
            Self::Table(t) => Predicate::from_table(k, t.clone())?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CertKind {
    Count,
    Clusters,
    Balance,
    Sk,
    Indset,
    Refutation,
    IndsetRefutation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertifyParams {
    pub eta: f64,
    pub rho: Option<f64>,
    pub eps: f64,
    pub enforce_checks: bool,
    pub partition_seed: Option<u64>,
    pub predicate: Option<PredicateSpec>,
}

impl Default for CertifyParams {
    fn default() -> Self {
        Self { eta: 0.0, rho: None, eps: DEFAULT_PARTITION_EPS, enforce_checks: true, partition_seed: None, predicate: None }
    }
}

fn predicate_for(i: &SignedHypergraph, spec: &Option<PredicateSpec>) -> Result<Predicate> {
    spec.as_ref().ok_or_else(|| usage("csp instances need --predicate"))?.build(i.k())
}

fn mismatch(kind: CertKind, inst: &InstanceFile) -> CliError {
    let name = kind.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    CliError::Core(Error::KindMismatch(format!("{name} certificates do not apply to {} instances", inst.kind())))
}

fn count_for(inst: &InstanceFile, p: &CertifyParams) -> Result<counting::CountCertificate> {
    let opts = CountOptions {
        enforce_checks: p.enforce_checks,
        partition: p.partition_seed.map_or(PartitionMode::Contiguous, |seed| PartitionMode::Shuffled { seed }),
    };
    Ok(match inst {
        InstanceFile::Csp { .. } => {
            let i = inst.to_signed()?;
            match &p.predicate {
                Some(PredicateSpec::Sat) => counting::certify_count_ksat_with(&i, p.eta, p.eps, &opts)?,
                spec => counting::certify_count_kcsp_with(&i, &predicate_for(&i, spec)?, p.eta, p.eps, &opts)?,
            }
        }
        InstanceFile::Matrix { .. } => return Err(mismatch(CertKind::Count, inst)),
        _ => counting::certify_count_kxor_with(&inst.to_hypergraph()?, p.eta, p.eps, &opts)?,
    })
}

/// `None` when a refutation was requested and the certificate does not
/// support one.
pub fn certify(inst: &InstanceFile, kind: CertKind, p: &CertifyParams) -> Result<Option<Certificate>> {
    let geo = GeometryOptions { enforce_checks: p.enforce_checks, ..Default::default() };
    let rho = || p.rho.ok_or_else(|| usage("balance certificates need --rho"));
    let cert = match kind {
        CertKind::Count => Certificate::Count(count_for(inst, p)?),
        CertKind::Refutation => {
            let cert = count_for(inst, p)?;
            return Ok(counting::refute_from_count(&inst.to_hypergraph()?, &cert, p.eta).map(Certificate::Refutation));
        }
        CertKind::Clusters => Certificate::Clusters(match inst {
            InstanceFile::Csp { .. } => {
                let i = inst.to_signed()?;
                geometry::certify_clusters_3csp_with(&i, &predicate_for(&i, &p.predicate)?, p.eta, &geo)?
            }
            InstanceFile::Xor { .. } | InstanceFile::Hypergraph { .. } => {
                geometry::certify_clusters_3xor_with(&inst.to_hypergraph()?, p.eta, &geo)?
            }
            _ => return Err(mismatch(kind, inst)),
        }),
        CertKind::Balance => Certificate::Balance(match inst {
            InstanceFile::Csp { k, .. } => {
                let i = inst.to_signed()?;
                let pred = predicate_for(&i, &p.predicate)?;
                if *k == 3 {
                    geometry::certify_balance_3csp_with(&i, &pred, rho()?, p.eta, &geo)?
                } else {
                    geometry::certify_balance_kcsp(&i, &pred, rho()?)?
                }
            }
            InstanceFile::Xor { .. } => geometry::certify_balance_kxor(&inst.to_xor()?, rho()?)?,
            _ => return Err(mismatch(kind, inst)),
        }),
        CertKind::Sk => match inst {
            InstanceFile::Matrix { .. } => Certificate::SkCount(eigencount::certify_count_sk_with(&inst.to_matrix()?, p.eta, p.enforce_checks)?),
            _ => return Err(mismatch(kind, inst)),
        },
        CertKind::Indset | CertKind::IndsetRefutation => {
            let InstanceFile::Graph { .. } = inst else {
                return Err(mismatch(kind, inst));
            };
            let g = inst.to_graph()?;
            let cert = eigencount::certify_count_indsets_with(&g, p.eta, p.enforce_checks)?;
            if kind == CertKind::Indset {
                Certificate::IndsetCount(cert)
            } else {
                return Ok(eigencount::refute_indset_from_count(&g, &cert, p.eta).map(Certificate::IndsetRefutation));
            }
        }
    };
    Ok(Some(cert))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OracleKind {
    Count,
    Clusters,
    Balance,
    Sk,
    Indset,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OracleParams {
    pub eta: f64,
    /// Overrides the budget derived from `eta` (clusters only).
    pub budget: Option<u64>,
    pub theta: Option<f64>,
    pub size_threshold: Option<usize>,
    pub predicate: Option<PredicateSpec>,
    /// Signs for unsigned hypergraphs and graphs; all `+1` when absent.
    pub signing_seed: Option<u64>,
}

/// Runs `f` on the constraint system a clause-carrying file describes.
fn with_constraints<T>(inst: &InstanceFile, p: &OracleParams, f: impl FnOnce(Constraints) -> Result<T>) -> Result<T> {
    match inst {
        InstanceFile::Csp { .. } => {
            let i = inst.to_signed()?;
            let pred = predicate_for(&i, &p.predicate)?;
            f(Constraints::Csp { instance: &i, predicate: &pred })
        }
        InstanceFile::Xor { .. } => f(Constraints::Xor(&inst.to_xor()?)),
        InstanceFile::Hypergraph { .. } | InstanceFile::Graph { .. } => {
            let h = inst.to_hypergraph()?;
            let signs = p.signing_seed.map_or_else(|| vec![1; h.m()], |s| sample_signing(h.m(), s));
            f(Constraints::Xor(&XorInstance::from_signing(&h, &signs)?))
        }
        InstanceFile::Matrix { .. } => Err(CliError::Core(Error::KindMismatch("a matrix carries no clauses".into()))),
    }
}

pub fn run_oracle(inst: &InstanceFile, kind: OracleKind, p: &OracleParams) -> Result<OracleResult> {
    match kind {
        OracleKind::Count => with_constraints(inst, p, |c| Ok(oracle::brute_count(c, p.eta)?)),
        OracleKind::Clusters => {
            let theta = p.theta.ok_or_else(|| usage("the cluster oracle needs --theta"))?;
            with_constraints(inst, p, |c| {
                let budget = p.budget.unwrap_or_else(|| solgeo::instance::violation_budget(p.eta, c.m()));
                Ok(oracle::brute_clusters_with_budget(c, budget, theta)?)
            })
        }
        OracleKind::Balance => with_constraints(inst, p, |c| Ok(oracle::brute_max_bias(c, p.eta)?)),
        OracleKind::Sk => Ok(oracle::brute_sk_opt_and_count(&inst.to_matrix()?, p.eta)?),
        OracleKind::Indset => {
            let g = inst.to_graph()?;
            let threshold = match p.size_threshold {
                Some(t) => t,
                None => {
                    let d = g.is_regular().ok_or_else(|| usage("--size-threshold is required for irregular graphs"))?;
                    IndSetConstants::new(d)?.size_threshold(p.eta, g.n())
                }
            };
            Ok(oracle::brute_independent_sets(&g, threshold)?)
        }
    }
}

/// The oracle run that decides `cert` on `inst`.
pub fn oracle_for(inst: &InstanceFile, cert: &Certificate, predicate: Option<PredicateSpec>, signing_seed: Option<u64>) -> Result<OracleResult> {
    let base = OracleParams { predicate, signing_seed, ..Default::default() };
    let (kind, p) = match cert {
        Certificate::Count(c) => (OracleKind::Count, OracleParams { eta: c.eta, ..base }),
        Certificate::Refutation(c) => (OracleKind::Count, OracleParams { eta: c.eta, ..base }),
        Certificate::SkCount(c) => (OracleKind::Sk, OracleParams { eta: c.eta, ..base }),
        Certificate::IndsetCount(c) => {
            let t = c.parameters.get("size_threshold").copied().unwrap_or(0.0) as usize;
            (OracleKind::Indset, OracleParams { eta: c.eta, size_threshold: Some(t), ..base })
        }
        Certificate::IndsetRefutation(c) => (OracleKind::Indset, OracleParams { eta: c.eta, size_threshold: Some(c.refuted_size), ..base }),
        Certificate::Clusters(c) => (
            OracleKind::Clusters,
            OracleParams { eta: c.eta, budget: Some(c.violation_budget), theta: Some(c.theta), ..base },
        ),
        Certificate::Balance(c) => (OracleKind::Balance, OracleParams { eta: c.eta, ..base }),
    };
    run_oracle(inst, kind, &p)
}

pub fn verify(cert: &Certificate, oracle: &OracleResult) -> Result<Verification> {
    Ok(oracle::verify_certificate(cert, oracle)?)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse { path: path.into(), source })
}

/// Canonical JSON to `path`, or stdout when absent.
pub fn emit<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let text = canonical_json(value);
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Write { path: p.into(), source }),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|source| CliError::Write { path: "<stdout>".into(), source })
        }
    }
}
