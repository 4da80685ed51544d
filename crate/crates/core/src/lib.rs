//! Certified upper bounds on the solution geometry of random CSPs.
//!
//! Every certificate here is sound on every input: it is computed from
//! measured spectra of the actual instance, and the asymptotic
//! high-probability thresholds only decide whether a nontrivial bound is
//! attempted. When they fail the certificate falls back to `2^n`.
//!
//! * [`instance`]: hypergraphs, XOR instances, predicates, samplers.
//! * [`spectral`]: eigensolves, edge expansion, expander mixing.
//! * [`refuter`]: polynomial bounds, quasirandomness, the kXOR principle.
//! * [`counting`]: counts of near-satisfiers and refutation from counts.
//! * [`geometry`]: cluster counts and balance.
//! * [`eigencount`]: dimension-based counts for SK and independent sets.
//! * [`oracle`]: brute-force ground truth, never on the certification path.

pub mod certificate;
pub mod counting;
pub mod eigencount;
pub mod error;
pub mod geometry;
pub mod instance;
pub mod matrix;
pub mod numeric;
pub mod oracle;
pub mod refuter;
pub mod spectral;

pub use certificate::{Certificate, Check, CheckRole};
pub use error::{Error, Result};
pub use instance::{
    Assignment, Hypergraph, MultiGraph, Predicate, SignedClause, SignedHypergraph, Var, XorClause, XorInstance,
};
pub use matrix::SymMatrix;
pub use spectral::SpectralReport;

/// Version string embedded in every certificate.
pub const TOOL_VERSION: &str = concat!("solgeo ", env!("CARGO_PKG_VERSION"));
