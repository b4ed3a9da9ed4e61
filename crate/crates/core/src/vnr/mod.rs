//! Virtual network requests described by a traffic-demand polytope.
//!
//! A request names `N` access node pairs and bounds their joint demand by
//! `A d <= b, d >= 0`, where `A` is an `M x N` nonnegative matrix. The set of
//! admissible demand vectors is the demand polytope.

mod generate;
mod polytope;

use std::ops::Deref;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{LinearProgram, LpError, Sense};
use crate::topology::{NodeId, SubstrateNetwork, TopologyError};

pub use generate::{generate_vnr, generate_vnr_seeded, VnrParams};
pub use polytope::{
    d_max, dominant_vertices, enumerate_vertices, enumerate_vertices_with_limit, worst_case_demand, worst_case_load,
    DEFAULT_VERTEX_LIMIT, VERTEX_TOL,
};

#[derive(Debug, Error)]
pub enum VnrError {
    #[error("request has no node pairs")]
    NoPairs,
    #[error("pair {0} joins a node to itself")]
    DegeneratePair(usize),
    #[error("demand matrix row {row} has {got} entries, expected {expected}")]
    RowLength { row: usize, got: usize, expected: usize },
    #[error("demand matrix has {rows} rows but {bounds} bounds")]
    BoundCount { rows: usize, bounds: usize },
    #[error("demand matrix entry ({row}, {col}) = {value} must be finite and nonnegative")]
    BadCoefficient { row: usize, col: usize, value: f64 },
    #[error("demand bound {row} = {value} must be finite and positive")]
    BadBound { row: usize, value: f64 },
    #[error("demand of pair {0} is unbounded: no row has a positive coefficient on it")]
    UnboundedPair(usize),
    #[error("invalid {0}: {1}")]
    BadTiming(&'static str, f64),
    #[error("weights have {got} entries, expected {expected}")]
    WeightLength { got: usize, expected: usize },
    #[error("weights must be finite and nonnegative")]
    BadWeights,
    #[error("vertex enumeration limited to {limit} pairs, request has {n}")]
    DimensionTooLarge { n: usize, limit: usize },
    #[error("demand program is unexpectedly {0}")]
    Solver(&'static str),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("malformed request file: {0}")]
    Format(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One demand per node pair, in traffic units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DemandVector(pub Vec<f64>);

impl Deref for DemandVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for DemandVector {
    fn from(v: Vec<f64>) -> Self {
        DemandVector(v)
    }
}

impl DemandVector {
    /// Coordinate-wise equality within `tol * (1 + magnitude)`.
    pub fn approx_eq(&self, other: &DemandVector, tol: f64) -> bool {
        self.len() == other.len()
            && self
                .iter()
                .zip(other.iter())
                .all(|(a, b)| (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vnr {
    pairs: Vec<(String, String)>,
    matrix: Vec<Vec<f64>>,
    bounds: Vec<f64>,
    arrival: f64,
    duration: f64,
}

impl Vnr {
    pub fn new(
        pairs: Vec<(String, String)>,
        matrix: Vec<Vec<f64>>,
        bounds: Vec<f64>,
    ) -> Result<Self, VnrError> {
        let n = pairs.len();
        if n == 0 {
            return Err(VnrError::NoPairs);
        }
        if let Some(i) = pairs.iter().position(|(s, t)| s == t) {
            return Err(VnrError::DegeneratePair(i));
        }
        if matrix.len() != bounds.len() {
            return Err(VnrError::BoundCount {
                rows: matrix.len(),
                bounds: bounds.len(),
            });
        }
        for (row, coeffs) in matrix.iter().enumerate() {
            if coeffs.len() != n {
                return Err(VnrError::RowLength {
                    row,
                    got: coeffs.len(),
                    expected: n,
                });
            }
            for (col, &value) in coeffs.iter().enumerate() {
                if !(value.is_finite() && value >= 0.0) {
                    return Err(VnrError::BadCoefficient { row, col, value });
                }
            }
        }
        for (row, &value) in bounds.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(VnrError::BadBound { row, value });
            }
        }
        if let Some(col) = (0..n).find(|&c| matrix.iter().all(|r| r[c] <= 0.0)) {
            return Err(VnrError::UnboundedPair(col));
        }
        Ok(Vnr {
            pairs,
            matrix,
            bounds,
            arrival: 0.0,
            duration: 0.0,
        })
    }

    /// Attaches simulation metadata.
    pub fn with_timing(mut self, arrival: f64, duration: f64) -> Result<Self, VnrError> {
        if !(arrival.is_finite() && arrival >= 0.0) {
            return Err(VnrError::BadTiming("arrival", arrival));
        }
        if !(duration.is_finite() && duration >= 0.0) {
            return Err(VnrError::BadTiming("duration", duration));
        }
        self.arrival = arrival;
        self.duration = duration;
        Ok(self)
    }

    /// Independent-channel equivalent: identity matrix with the given bounds.
    pub fn independent(pairs: Vec<(String, String)>, bounds: Vec<f64>) -> Result<Self, VnrError> {
        let n = pairs.len();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Vnr::new(pairs, matrix, bounds)
    }

    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn n_rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn bounds(&self) -> &[f64] {
        &self.bounds
    }

    pub fn arrival(&self) -> f64 {
        self.arrival
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Whether `d` lies in the demand polytope, within `tol * (1 + |b|)`.
    pub fn contains(&self, d: &[f64], tol: f64) -> bool {
        d.len() == self.n_pairs()
            && d.iter().all(|&x| x >= -tol)
            && self.matrix.iter().zip(&self.bounds).all(|(row, &b)| {
                let lhs: f64 = row.iter().zip(d).map(|(a, x)| a * x).sum();
                lhs <= b + tol * (1.0 + b.abs())
            })
    }

    /// `max w'd` over the demand polytope, in canonical form.
    pub fn demand_program(&self, weights: &[f64]) -> LinearProgram {
        let mut lp = LinearProgram::new(Sense::Maximize, weights.to_vec());
        for (row, &b) in self.matrix.iter().zip(&self.bounds) {
            let terms = row
                .iter()
                .enumerate()
                .filter(|(_, &a)| a != 0.0)
                .map(|(j, &a)| (j, a))
                .collect();
            lp.le(terms, b);
        }
        lp
    }

    /// Pair endpoints as substrate node indices.
    pub fn resolve(&self, sn: &SubstrateNetwork) -> Result<Vec<(NodeId, NodeId)>, VnrError> {
        self.pairs
            .iter()
            .map(|(s, t)| Ok((sn.node_id(s)?, sn.node_id(t)?)))
            .collect()
    }

    pub fn to_file(&self) -> VnrFile {
        VnrFile {
            pairs: self
                .pairs
                .iter()
                .map(|(s, t)| [s.clone(), t.clone()])
                .collect(),
            a: self.matrix.clone(),
            b: self.bounds.clone(),
            arrival: self.arrival,
            duration: self.duration,
        }
    }

    pub fn from_file(file: VnrFile) -> Result<Self, VnrError> {
        let pairs = file.pairs.into_iter().map(|[s, t]| (s, t)).collect();
        Vnr::new(pairs, file.a, file.b)?.with_timing(file.arrival, file.duration)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("request serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, VnrError> {
        Self::from_file(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<FsPath>) -> Result<Self, VnrError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<FsPath>) -> Result<(), VnrError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// On-disk request layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VnrFile {
    pub pairs: Vec<[String; 2]>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    #[serde(default)]
    pub arrival: f64,
    #[serde(default)]
    pub duration: f64,
}

/// Pairs A-C and B-D, each up to 150, together up to 200.
pub fn motivating_example() -> Vnr {
    Vnr::new(
        vec![("A".into(), "C".into()), ("B".into(), "D".into())],
        vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]],
        vec![150.0, 150.0, 200.0],
    )
    .unwrap()
}
