//! Embedding algorithms.
//!
//! Six variants, from the cross product of single vs multi-path routing and
//! independent vs shared channels (shared channels further split into
//! oblivious and adaptive routing):
//!
//! | variant     | routing        | sizing                                    |
//! |-------------|----------------|-------------------------------------------|
//! | `spic`      | one path/pair  | sum of per-pair maxima                    |
//! | `spor`      | one path/pair  | joint worst case of the pairs on a link   |
//! | `mpic`      | split, fixed   | sum of per-pair maxima (flow LP)          |
//! | `mpor`      | split, fixed   | joint worst case, dualized into the LP    |
//! | `mpor_fast` | split, fixed   | `mpic` splits, links shrunk to worst case |
//! | `mpar`      | per vertex     | max load over dominant demand vertices    |
//!
//! All variants minimize `sum(price * allocation)` and never allocate more
//! than the residual bandwidth they are given. The caller owns the residual
//! state; the algorithms only read it.

mod adaptive;
mod flow;
mod multi_path;
mod single_path;
mod verify;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path as FsPath;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::{LinkId, Path, ResidualState, SubstrateNetwork, TopologyError};
use crate::vnr::{DemandVector, Vnr, VnrError, DEFAULT_VERTEX_LIMIT};

pub use adaptive::mpar;
pub use multi_path::{mpic, mpor, mpor_by_cuts, mpor_fast};
pub use single_path::{spic, spor};
pub use verify::{verify_embedding, VerifyReport, Violation, ViolationKind, VERIFY_TOL};

/// Number of candidate paths per pair used by the single-path variants.
pub const DEFAULT_K: usize = 5;
/// Cap on `vertices * pairs * links` for the adaptive program.
pub const DEFAULT_MPAR_VARIABLE_CAP: usize = 200_000;
/// The hybrid policy runs `mpar` up to this many pairs and `mpor` above.
pub const HYBRID_MAX_PAIRS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Spic,
    Spor,
    Mpic,
    Mpor,
    MporFast,
    Mpar,
    /// `mpar` for requests with at most [`HYBRID_MAX_PAIRS`] pairs, `mpor`
    /// otherwise.
    MparMporHybrid,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Spic,
        Algorithm::Spor,
        Algorithm::Mpic,
        Algorithm::Mpor,
        Algorithm::MporFast,
        Algorithm::Mpar,
        Algorithm::MparMporHybrid,
    ];

    /// The six policies compared in simulation.
    pub const SIMULATED: [Algorithm; 6] = [
        Algorithm::Spic,
        Algorithm::Spor,
        Algorithm::Mpic,
        Algorithm::Mpor,
        Algorithm::MporFast,
        Algorithm::MparMporHybrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Spic => "spic",
            Algorithm::Spor => "spor",
            Algorithm::Mpic => "mpic",
            Algorithm::Mpor => "mpor",
            Algorithm::MporFast => "mpor_fast",
            Algorithm::Mpar => "mpar",
            Algorithm::MparMporHybrid => "mpar_mpor_hybrid",
        }
    }

    /// Independent-channel variants size each link for the sum of per-pair
    /// maxima rather than the joint worst case.
    pub fn is_independent_channel(self) -> bool {
        matches!(self, Algorithm::Spic | Algorithm::Mpic)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.to_ascii_lowercase().replace('-', "_");
        match key.as_str() {
            "mpar_mpor" | "mpar+mpor" | "hybrid" => Ok(Algorithm::MparMporHybrid),
            _ => Algorithm::ALL
                .into_iter()
                .find(|a| a.name() == key)
                .ok_or_else(|| format!("unknown algorithm `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmbedOptions {
    /// Candidate paths per pair for `spic` / `spor`.
    pub k: usize,
    /// Largest pair count accepted by vertex enumeration.
    pub vertex_limit: usize,
    /// Largest `vertices * pairs * links` accepted by `mpar`.
    pub mpar_variable_cap: usize,
}

impl Default for EmbedOptions {
    fn default() -> Self {
        EmbedOptions {
            k: DEFAULT_K,
            vertex_limit: DEFAULT_VERTEX_LIMIT,
            mpar_variable_cap: DEFAULT_MPAR_VARIABLE_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailReason {
    NoPath,
    CapacityExhausted,
    LpInfeasible,
    InvalidVnr,
}

impl fmt::Display for FailReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailReason::NoPath => "no_path",
            FailReason::CapacityExhausted => "capacity_exhausted",
            FailReason::LpInfeasible => "lp_infeasible",
            FailReason::InvalidVnr => "invalid_vnr",
        })
    }
}

/// The fail signal: the request cannot be embedded.
#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
#[error("embedding failed ({reason}): {detail}")]
pub struct EmbedFailure {
    pub reason: FailReason,
    pub detail: String,
}

impl EmbedFailure {
    pub fn new(reason: FailReason, detail: impl Into<String>) -> Self {
        EmbedFailure {
            reason,
            detail: detail.into(),
        }
    }
}

impl From<VnrError> for EmbedFailure {
    fn from(e: VnrError) -> Self {
        EmbedFailure::new(FailReason::InvalidVnr, e.to_string())
    }
}

/// Per-link values on the two arcs of each undirected link: `forward` runs
/// from the link's `u` to its `v`, `backward` the other way.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcFlows {
    pub forward: Vec<f64>,
    pub backward: Vec<f64>,
}

impl ArcFlows {
    pub fn zeros(n_links: usize) -> Self {
        ArcFlows {
            forward: vec![0.0; n_links],
            backward: vec![0.0; n_links],
        }
    }

    /// Both directions added up on `link`.
    pub fn total(&self, link: usize) -> f64 {
        self.forward[link] + self.backward[link]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Routing {
    /// One path per pair, in pair order.
    SinglePath(Vec<Path>),
    /// Unit-flow splitting ratios per pair, used for every demand.
    ObliviousSplit(Vec<ArcFlows>),
    /// For each dominant demand vertex, a flow per pair carrying exactly that
    /// vertex's demand.
    AdaptiveCertificate {
        vertices: Vec<DemandVector>,
        flows: Vec<Vec<ArcFlows>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    /// The variant that produced this embedding (never the hybrid policy).
    pub algorithm: Algorithm,
    /// Bandwidth reserved per link, indexed by [`LinkId`].
    pub allocation: Vec<f64>,
    pub routing: Routing,
    pub cost: f64,
}

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("allocation has {got} entries but the network has {expected} links")]
    AllocationLength { got: usize, expected: usize },
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("malformed embedding: {0}")]
    Malformed(String),
    #[error("malformed embedding file: {0}")]
    Format(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Total price of an allocation: `sum(price(e) * allocation(e))`.
pub fn cost(allocation: &[f64], sn: &SubstrateNetwork) -> Result<f64, EmbedError> {
    if allocation.len() != sn.link_count() {
        return Err(EmbedError::AllocationLength {
            got: allocation.len(),
            expected: sn.link_count(),
        });
    }
    Ok(sn
        .links()
        .iter()
        .zip(allocation)
        .map(|(l, a)| l.price * a)
        .sum())
}

/// Same as [`cost`] for an allocation keyed by link identifier.
pub fn cost_by_name(
    allocation: &BTreeMap<String, f64>,
    sn: &SubstrateNetwork,
) -> Result<f64, EmbedError> {
    allocation.iter().try_fold(0.0, |acc, (name, a)| {
        Ok(acc + sn.link(sn.link_id(name)?).price * a)
    })
}

/// Runs `algorithm` against the given residual bandwidth.
pub fn embed(
    algorithm: Algorithm,
    sn: &SubstrateNetwork,
    residual: &ResidualState,
    vnr: &Vnr,
    options: &EmbedOptions,
) -> Result<Embedding, EmbedFailure> {
    match algorithm {
        Algorithm::Spic => spic(sn, residual, vnr, options.k),
        Algorithm::Spor => spor(sn, residual, vnr, options.k),
        Algorithm::Mpic => mpic(sn, residual, vnr),
        Algorithm::Mpor => mpor(sn, residual, vnr),
        Algorithm::MporFast => mpor_fast(sn, residual, vnr),
        Algorithm::Mpar => mpar(sn, residual, vnr, options),
        Algorithm::MparMporHybrid => {
            if vnr.n_pairs() <= HYBRID_MAX_PAIRS {
                mpar(sn, residual, vnr, options)
            } else {
                mpor(sn, residual, vnr)
            }
        }
    }
}

/// Clamps solver noise: negatives to zero and values within tolerance of
/// the residual down to it.
fn settle_allocation(raw: &[f64], residual: &ResidualState) -> Vec<f64> {
    raw.iter()
        .enumerate()
        .map(|(i, &c)| {
            let r = residual.residual(LinkId(i));
            if c <= 0.0 {
                0.0
            } else if c > r {
                r
            } else {
                c
            }
        })
        .collect()
}

fn finish(
    algorithm: Algorithm,
    sn: &SubstrateNetwork,
    allocation: Vec<f64>,
    routing: Routing,
) -> Embedding {
    let cost = cost(&allocation, sn).expect("allocation sized to the network");
    Embedding {
        algorithm,
        allocation,
        routing,
        cost,
    }
}

// ---------------------------------------------------------------------------
// File format

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingFile {
    pub algorithm: Algorithm,
    pub cost: f64,
    /// Nonzero allocations keyed by link identifier.
    pub allocation: BTreeMap<String, f64>,
    pub routing: RoutingFile,
}

/// Per-link `[forward, backward]` values keyed by link identifier; links
/// where both are zero are omitted.
pub type ArcMap = BTreeMap<String, [f64; 2]>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RoutingFile {
    SinglePath { paths: Vec<PathRecord> },
    ObliviousSplit { ratios: Vec<ArcMap> },
    AdaptiveCertificate {
        vertices: Vec<Vec<f64>>,
        flows: Vec<Vec<ArcMap>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub nodes: Vec<String>,
    pub links: Vec<String>,
}

fn arcs_to_map(arcs: &ArcFlows, sn: &SubstrateNetwork) -> ArcMap {
    sn.links()
        .iter()
        .enumerate()
        .filter(|(i, _)| arcs.forward[*i] != 0.0 || arcs.backward[*i] != 0.0)
        .map(|(i, l)| (l.name.clone(), [arcs.forward[i], arcs.backward[i]]))
        .collect()
}

fn arcs_from_map(map: &ArcMap, sn: &SubstrateNetwork) -> Result<ArcFlows, EmbedError> {
    let mut arcs = ArcFlows::zeros(sn.link_count());
    for (name, [f, b]) in map {
        let l = sn.link_id(name)?;
        arcs.forward[l.0] = *f;
        arcs.backward[l.0] = *b;
    }
    Ok(arcs)
}

impl Embedding {
    pub fn to_file(&self, sn: &SubstrateNetwork) -> EmbeddingFile {
        let allocation = sn
            .links()
            .iter()
            .zip(&self.allocation)
            .filter(|(_, &a)| a != 0.0)
            .map(|(l, &a)| (l.name.clone(), a))
            .collect();
        let routing = match &self.routing {
            Routing::SinglePath(paths) => RoutingFile::SinglePath {
                paths: paths
                    .iter()
                    .map(|p| PathRecord {
                        nodes: p.nodes.iter().map(|n| sn.node(*n).name.clone()).collect(),
                        links: p.links.iter().map(|l| sn.link(*l).name.clone()).collect(),
                    })
                    .collect(),
            },
            Routing::ObliviousSplit(ratios) => RoutingFile::ObliviousSplit {
                ratios: ratios.iter().map(|a| arcs_to_map(a, sn)).collect(),
            },
            Routing::AdaptiveCertificate { vertices, flows } => RoutingFile::AdaptiveCertificate {
                vertices: vertices.iter().map(|v| v.0.clone()).collect(),
                flows: flows
                    .iter()
                    .map(|per_pair| per_pair.iter().map(|a| arcs_to_map(a, sn)).collect())
                    .collect(),
            },
        };
        EmbeddingFile {
            algorithm: self.algorithm,
            cost: self.cost,
            allocation,
            routing,
        }
    }

    pub fn from_file(file: &EmbeddingFile, sn: &SubstrateNetwork) -> Result<Self, EmbedError> {
        let mut allocation = vec![0.0; sn.link_count()];
        for (name, &a) in &file.allocation {
            allocation[sn.link_id(name)?.0] = a;
        }
        let routing = match &file.routing {
            RoutingFile::SinglePath { paths } => Routing::SinglePath(
                paths
                    .iter()
                    .map(|p| {
                        let source = p
                            .nodes
                            .first()
                            .ok_or_else(|| EmbedError::Malformed("empty path".into()))?;
                        let links = p
                            .links
                            .iter()
                            .map(|l| sn.link_id(l))
                            .collect::<Result<Vec<_>, _>>()?;
                        let path = Path::from_links(sn, sn.node_id(source)?, links)?;
                        let names: Vec<&str> =
                            path.nodes.iter().map(|n| sn.node(*n).name.as_str()).collect();
                        if names != p.nodes.iter().map(String::as_str).collect::<Vec<_>>() {
                            return Err(EmbedError::Malformed(
                                "path nodes disagree with its links".into(),
                            ));
                        }
                        Ok(path)
                    })
                    .collect::<Result<_, EmbedError>>()?,
            ),
            RoutingFile::ObliviousSplit { ratios } => Routing::ObliviousSplit(
                ratios
                    .iter()
                    .map(|m| arcs_from_map(m, sn))
                    .collect::<Result<_, _>>()?,
            ),
            RoutingFile::AdaptiveCertificate { vertices, flows } => {
                if vertices.len() != flows.len() {
                    return Err(EmbedError::Malformed(
                        "one flow set per vertex expected".into(),
                    ));
                }
                Routing::AdaptiveCertificate {
                    vertices: vertices.iter().cloned().map(DemandVector).collect(),
                    flows: flows
                        .iter()
                        .map(|per_pair| {
                            per_pair
                                .iter()
                                .map(|m| arcs_from_map(m, sn))
                                .collect::<Result<Vec<_>, _>>()
                        })
                        .collect::<Result<_, _>>()?,
                }
            }
        };
        Ok(Embedding {
            algorithm: file.algorithm,
            allocation,
            routing,
            cost: file.cost,
        })
    }

    pub fn to_json(&self, sn: &SubstrateNetwork) -> String {
        serde_json::to_string_pretty(&self.to_file(sn)).expect("embedding serializes")
    }

    pub fn from_json(text: &str, sn: &SubstrateNetwork) -> Result<Self, EmbedError> {
        Self::from_file(&serde_json::from_str(text)?, sn)
    }

    pub fn load(path: impl AsRef<FsPath>, sn: &SubstrateNetwork) -> Result<Self, EmbedError> {
        Self::from_json(&std::fs::read_to_string(path)?, sn)
    }
}
