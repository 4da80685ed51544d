use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use solgeo::counting::DEFAULT_PARTITION_EPS;
use solgeo::instance::InstanceFile;
use solgeo::oracle::{OracleResult, Verdict};
use solgeo::Certificate;

use crate::error::{Result, EXIT_OK, EXIT_USAGE, EXIT_VIOLATED};
use crate::ops::{self, CertKind, CertifyParams, Density, GenSpec, Generator, OracleKind, OracleParams, PredicateSpec};
use crate::sweep::{self, SweepConfig};

/// Certified bounds on the solution geometry of random CSPs.
#[derive(Debug, Parser)]
#[command(name = "solgeo", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample an instance.
    Gen(GenArgs),
    /// Certify a bound for an instance.
    Certify(CertifyArgs),
    /// Compute ground truth by enumeration.
    Oracle(OracleArgs),
    /// Check a certificate against ground truth.
    Verify(VerifyArgs),
    /// Run a grid of certify (and oracle) jobs.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: Generator,
    /// Arity.
    #[arg(short, default_value_t = 3, value_parser = clap::value_parser!(u64).range(2..))]
    pub k: u64,
    #[arg(short)]
    pub n: usize,
    /// Expected number of clauses.
    #[arg(short, group = "density")]
    pub m: Option<f64>,
    /// Expected clauses per variable.
    #[arg(long, group = "density")]
    pub delta: Option<f64>,
    /// Density exponent: clauses per variable `n^δ`.
    #[arg(long, group = "density")]
    pub delta_exp: Option<f64>,
    /// Degree of regular graphs.
    #[arg(short, default_value_t = 3)]
    pub d: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long, value_enum)]
    pub kind: CertKind,
    #[arg(long)]
    pub instance: PathBuf,
    /// sat, xor, nae or table:<bits>; required for csp files.
    #[arg(long)]
    pub predicate: Option<PredicateSpec>,
    #[arg(long, default_value_t = 0.0)]
    pub eta: f64,
    #[arg(long)]
    pub rho: Option<f64>,
    /// Slack added to the partition exponent.
    #[arg(long, default_value_t = DEFAULT_PARTITION_EPS)]
    pub eps: f64,
    /// Compute the nontrivial bound even when calibration gates fail.
    #[arg(long)]
    pub no_enforce: bool,
    /// Shuffle the partition with this seed instead of contiguous blocks.
    #[arg(long)]
    pub partition_seed: Option<u64>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, value_enum)]
    pub kind: OracleKind,
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub predicate: Option<PredicateSpec>,
    #[arg(long, default_value_t = 0.0)]
    pub eta: f64,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub size_threshold: Option<usize>,
    /// Sign unsigned hypergraphs with this seed instead of all `+1`.
    #[arg(long)]
    pub signing_seed: Option<u64>,
    /// Record wall time in the output (makes it irreproducible).
    #[arg(long)]
    pub timing: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub certificate: PathBuf,
    #[arg(long)]
    pub instance: PathBuf,
    /// Precomputed oracle output; computed on the fly when absent.
    #[arg(long)]
    pub oracle: Option<PathBuf>,
    #[arg(long)]
    pub predicate: Option<PredicateSpec>,
    #[arg(long)]
    pub signing_seed: Option<u64>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config's output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn density(a: &GenArgs) -> Option<Density> {
    a.m.map(Density::M).or(a.delta.map(Density::Delta)).or(a.delta_exp.map(Density::DeltaExp))
}

/// Runs one command and returns its exit code.
pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Gen(a) => {
            let spec = GenSpec { kind: a.kind, k: a.k as usize, n: a.n, density: density(&a), d: a.d, seed: a.seed };
            ops::emit(&ops::generate(&spec)?, a.output.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::Certify(a) => {
            let inst: InstanceFile = ops::read_json(&a.instance)?;
            let params = CertifyParams {
                eta: a.eta,
                rho: a.rho,
                eps: a.eps,
                enforce_checks: !a.no_enforce,
                partition_seed: a.partition_seed,
                predicate: a.predicate,
            };
            match ops::certify(&inst, a.kind, &params)? {
                Some(cert) => ops::emit(&cert, a.output.as_deref())?,
                None => eprintln!("no refutation: the count bound is too weak at this slack"),
            }
            Ok(EXIT_OK)
        }
        Command::Oracle(a) => {
            let start = Instant::now();
            let inst: InstanceFile = ops::read_json(&a.instance)?;
            let params = OracleParams {
                eta: a.eta,
                budget: None,
                theta: a.theta,
                size_threshold: a.size_threshold,
                predicate: a.predicate,
                signing_seed: a.signing_seed,
            };
            let mut result = ops::run_oracle(&inst, a.kind, &params)?;
            if a.timing {
                result = result.with_runtime(start);
            }
            ops::emit(&result, a.output.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::Verify(a) => {
            let cert: Certificate = ops::read_json(&a.certificate)?;
            let inst: InstanceFile = ops::read_json(&a.instance)?;
            let oracle: OracleResult = match &a.oracle {
                Some(p) => ops::read_json(p)?,
                None => ops::oracle_for(&inst, &cert, a.predicate, a.signing_seed)?,
            };
            let v = ops::verify(&cert, &oracle)?;
            ops::emit(&v, a.output.as_deref())?;
            Ok(match v.verdict {
                Verdict::Sound => EXIT_OK,
                Verdict::Violated => EXIT_VIOLATED,
                Verdict::Inapplicable => EXIT_USAGE,
            })
        }
        Command::Sweep(a) => {
            let mut cfg: SweepConfig = ops::read_json(&a.config)?;
            if let Some(out) = a.out {
                cfg.output_dir = out;
            }
            let s = sweep::run_sweep(&cfg)?;
            eprintln!(
                "{} cells ({} already done), {} violations; records in {}",
                s.cells,
                s.skipped,
                s.violations,
                s.records.display()
            );
            if s.violations > 0 {
                return Ok(EXIT_VIOLATED);
            }
            Ok(EXIT_OK)
        }
    }
}
