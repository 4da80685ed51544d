use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

use super::{Hypergraph, MultiGraph, SignedClause, SignedHypergraph, Var, XorClause, XorInstance};
use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

fn zero_based() -> u8 {
    0
}

/// On-disk instance formats. `index_base` records that indices are 0-based;
/// `seed` records the generator seed when the file came from a sampler.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InstanceFile {
    Csp {
        k: usize,
        n: usize,
        #[serde(default = "zero_based")]
        index_base: u8,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        clauses: Vec<SignedClause>,
    },
    Xor {
        k: usize,
        n: usize,
        #[serde(default = "zero_based")]
        index_base: u8,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        clauses: Vec<XorClause>,
    },
    Hypergraph {
        k: usize,
        n: usize,
        #[serde(default = "zero_based")]
        index_base: u8,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        edges: Vec<Vec<Var>>,
    },
    Graph {
        n: usize,
        #[serde(default = "zero_based")]
        index_base: u8,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        edges: Vec<[Var; 2]>,
    },
    Matrix {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        rows: Vec<Vec<f64>>,
    },
}

impl InstanceFile {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Csp { .. } => "csp",
            Self::Xor { .. } => "xor",
            Self::Hypergraph { .. } => "hypergraph",
            Self::Graph { .. } => "graph",
            Self::Matrix { .. } => "matrix",
        }
    }

    pub fn from_signed(i: &SignedHypergraph, seed: Option<u64>) -> Self {
        Self::Csp { k: i.k(), n: i.n(), index_base: 0, seed, clauses: i.clauses().to_vec() }
    }

    pub fn from_xor(i: &XorInstance, seed: Option<u64>) -> Self {
        Self::Xor { k: i.k(), n: i.n(), index_base: 0, seed, clauses: i.clauses().to_vec() }
    }

    pub fn from_hypergraph(h: &Hypergraph, seed: Option<u64>) -> Self {
        Self::Hypergraph { k: h.k(), n: h.n(), index_base: 0, seed, edges: h.edges().to_vec() }
    }

    pub fn from_graph(g: &MultiGraph, seed: Option<u64>) -> Self {
        Self::Graph { n: g.n(), index_base: 0, seed, edges: g.edges().iter().map(|&(u, v)| [u, v]).collect() }
    }

    pub fn from_matrix(m: &SymMatrix, seed: Option<u64>) -> Self {
        Self::Matrix { n: m.n(), seed, rows: m.rows() }
    }

    fn check_base(index_base: u8) -> Result<()> {
        if index_base != 0 {
            return Err(Error::MalformedInstance(format!("index_base {index_base} unsupported; files are 0-based")));
        }
        Ok(())
    }

    pub fn to_signed(&self) -> Result<SignedHypergraph> {
        match self {
            Self::Csp { k, n, index_base, clauses, .. } => {
                Self::check_base(*index_base)?;
                SignedHypergraph::new(*k, *n, clauses.clone())
            }
            other => Err(Error::KindMismatch(format!("expected a csp instance, found {}", other.kind()))),
        }
    }

    /// XOR files directly; CSP files through `b = Π c`.
    pub fn to_xor(&self) -> Result<XorInstance> {
        match self {
            Self::Xor { k, n, index_base, clauses, .. } => {
                Self::check_base(*index_base)?;
                XorInstance::new(*k, *n, clauses.clone())
            }
            Self::Csp { .. } => Ok(XorInstance::from_signed(&self.to_signed()?)),
            other => Err(Error::KindMismatch(format!("expected an xor instance, found {}", other.kind()))),
        }
    }

    /// The underlying hypergraph of any clause-carrying file.
    pub fn to_hypergraph(&self) -> Result<Hypergraph> {
        match self {
            Self::Hypergraph { k, n, index_base, edges, .. } => {
                Self::check_base(*index_base)?;
                Hypergraph::new(*k, *n, edges.clone())
            }
            Self::Csp { .. } => Ok(self.to_signed()?.underlying()),
            Self::Xor { .. } => Ok(self.to_xor()?.underlying()),
            Self::Graph { n, index_base, edges, .. } => {
                Self::check_base(*index_base)?;
                Hypergraph::new(2, *n, edges.iter().map(|e| e.to_vec()).collect())
            }
            Self::Matrix { .. } => Err(Error::KindMismatch("a matrix has no hypergraph".into())),
        }
    }

    pub fn to_graph(&self) -> Result<MultiGraph> {
        match self {
            Self::Graph { n, index_base, edges, .. } => {
                Self::check_base(*index_base)?;
                MultiGraph::new(*n, edges.iter().map(|e| (e[0], e[1])).collect())
            }
            other => Err(Error::KindMismatch(format!("expected a graph, found {}", other.kind()))),
        }
    }

    pub fn to_matrix(&self) -> Result<SymMatrix> {
        match self {
            Self::Matrix { n, rows, .. } => {
                let m = SymMatrix::from_rows(rows.clone())?;
                if m.n() != *n {
                    return Err(Error::MalformedInstance(format!("matrix has {} rows, header says {n}", m.n())));
                }
                Ok(m)
            }
            other => Err(Error::KindMismatch(format!("expected a matrix, found {}", other.kind()))),
        }
    }

    /// SHA-256 of the canonical serialization; the seed is excluded so that
    /// hand-written and generated copies of one instance hash alike.
    pub fn sha256(&self) -> String {
        let mut bare = self.clone();
        match &mut bare {
            Self::Csp { seed, .. }
            | Self::Xor { seed, .. }
            | Self::Hypergraph { seed, .. }
            | Self::Graph { seed, .. }
            | Self::Matrix { seed, .. } => *seed = None,
        }
        sha256_hex(compact_json(&bare).as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes every float with 17 significant digits so values round-trip
/// exactly and output is byte-stable.
struct SigDigits<F>(F);

macro_rules! forward {
    ($($name:ident),*) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
                self.0.$name(w)
            }
        )*
    };
}

impl<F: Formatter> Formatter for SigDigits<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    forward!(begin_array, end_array, begin_object, end_object, end_object_value, end_array_value);

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
}

fn write_with<F: Formatter, T: Serialize + ?Sized>(value: &T, f: F) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits(f));
    value.serialize(&mut ser).expect("serializing into memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Pretty JSON with 17-significant-digit floats and a trailing newline.
pub fn canonical_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = write_with(value, PrettyFormatter::with_indent(b"  "));
    s.push('\n');
    s
}

/// Single-line variant used for hashing and JSONL records.
pub fn compact_json<T: Serialize + ?Sized>(value: &T) -> String {
    write_with(value, serde_json::ser::CompactFormatter)
}
