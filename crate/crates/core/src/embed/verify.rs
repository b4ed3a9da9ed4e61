//! Independent checks of an embedding against the request it claims to
//! serve.

use serde::{Deserialize, Serialize};

use super::single_path::path_weights;
use super::{cost, Embedding, Routing};
use crate::topology::{LinkId, NodeId, Path, ResidualState, SubstrateNetwork};
use crate::vnr::{
    d_max, dominant_vertices, enumerate_vertices, worst_case_load, DemandVector, Vnr,
};

/// Relative slack allowed before a discrepancy counts as a violation.
pub const VERIFY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// Sizes or pair counts disagree with the network or request.
    Shape,
    NegativeAllocation,
    /// Allocation above the residual bandwidth.
    Capacity,
    /// A path that is not simple or does not join its pair.
    Path,
    NegativeFlow,
    Conservation,
    /// Worst admissible load above the allocation.
    Load,
    /// Sum of per-pair maxima above the allocation (independent channels).
    IndependentLoad,
    /// A dominant vertex with no flow certificate.
    MissingVertex,
    Cost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex: Option<usize>,
    /// How far past the limit, in traffic units (or cost units).
    pub magnitude: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn first(&self) -> Option<&Violation> {
        self.violations.first()
    }

    pub fn on_link(&self, name: &str) -> bool {
        self.violations.iter().any(|v| v.link.as_deref() == Some(name))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn exceeds(value: f64, limit: f64) -> bool {
    value - limit > VERIFY_TOL * (1.0 + limit.abs())
}

struct Checker<'a> {
    sn: &'a SubstrateNetwork,
    out: Vec<Violation>,
}

impl Checker<'_> {
    fn push(
        &mut self,
        kind: ViolationKind,
        link: Option<usize>,
        pair: Option<usize>,
        vertex: Option<usize>,
        magnitude: f64,
        detail: String,
    ) {
        self.out.push(Violation {
            kind,
            link: link.map(|l| self.sn.link(LinkId(l)).name.clone()),
            pair,
            vertex,
            magnitude,
            detail,
        });
    }

    fn shape(&mut self, detail: String) {
        self.push(ViolationKind::Shape, None, None, None, 0.0, detail);
    }

    /// Net outflow of `flows` must be `amount` at `s`, `-amount` at `t` and
    /// zero elsewhere.
    fn conservation(
        &mut self,
        flows: &super::ArcFlows,
        (s, t): (NodeId, NodeId),
        amount: f64,
        pair: usize,
        vertex: Option<usize>,
    ) {
        let e = self.sn.link_count();
        if flows.forward.len() != e || flows.backward.len() != e {
            self.shape(format!("flow of pair {pair} is not sized to the network"));
            return;
        }
        for l in 0..e {
            let worst = flows.forward[l].min(flows.backward[l]);
            if worst < -VERIFY_TOL || !worst.is_finite() {
                self.push(
                    ViolationKind::NegativeFlow,
                    Some(l),
                    Some(pair),
                    vertex,
                    -worst,
                    "negative or non-finite arc flow".into(),
                );
            }
        }
        let mut net = vec![0.0; self.sn.node_count()];
        for (l, link) in self.sn.links().iter().enumerate() {
            let d = flows.forward[l] - flows.backward[l];
            net[link.u.0] += d;
            net[link.v.0] -= d;
        }
        for (i, &got) in net.iter().enumerate() {
            let want = if i == s.0 {
                amount
            } else if i == t.0 {
                -amount
            } else {
                0.0
            };
            if (got - want).abs() > VERIFY_TOL * (1.0 + amount.abs()) {
                self.push(
                    ViolationKind::Conservation,
                    None,
                    Some(pair),
                    vertex,
                    (got - want).abs(),
                    format!(
                        "net outflow {got} at {} where {want} is required",
                        self.sn.nodes()[i].name
                    ),
                );
            }
        }
    }

    fn path(&mut self, path: &Path, (s, t): (NodeId, NodeId), pair: usize) {
        let joins = (path.source() == s && path.target() == t)
            || (path.source() == t && path.target() == s);
        let linked = path.nodes.len() == path.links.len() + 1
            && path.links.iter().enumerate().all(|(i, &l)| {
                let link = self.sn.link(l);
                let (a, b) = (path.nodes[i], path.nodes[i + 1]);
                (link.u == a && link.v == b) || (link.u == b && link.v == a)
            });
        if !joins || !linked || !path.is_simple() {
            self.push(
                ViolationKind::Path,
                None,
                Some(pair),
                None,
                0.0,
                "path is not a simple route between the pair's endpoints".into(),
            );
        }
    }
}

/// Checks capacity, routing validity, worst-case sizing and cost. Every
/// problem found is listed; an empty list means the embedding is sound.
pub fn verify_embedding(
    sn: &SubstrateNetwork,
    residual: &ResidualState,
    vnr: &Vnr,
    embedding: &Embedding,
) -> VerifyReport {
    let mut ck = Checker {
        sn,
        out: Vec::new(),
    };
    check(&mut ck, residual, vnr, embedding);
    VerifyReport {
        ok: ck.out.is_empty(),
        violations: ck.out,
    }
}

fn check(ck: &mut Checker, residual: &ResidualState, vnr: &Vnr, emb: &Embedding) {
    let sn = ck.sn;
    let e = sn.link_count();
    if emb.allocation.len() != e || residual.len() != e {
        ck.shape(format!(
            "allocation has {} entries, residual {}, network {e} links",
            emb.allocation.len(),
            residual.len()
        ));
        return;
    }
    let ends = match vnr.resolve(sn) {
        Ok(ends) => ends,
        Err(err) => {
            ck.shape(err.to_string());
            return;
        }
    };
    let n = ends.len();

    for (l, &c) in emb.allocation.iter().enumerate() {
        if !(c >= 0.0) {
            ck.push(
                ViolationKind::NegativeAllocation,
                Some(l),
                None,
                None,
                -c,
                format!("allocation {c}"),
            );
        }
        let r = residual.residual(LinkId(l));
        if exceeds(c, r) {
            ck.push(
                ViolationKind::Capacity,
                Some(l),
                None,
                None,
                c - r,
                format!("allocation {c} above residual {r}"),
            );
        }
    }

    // Per-link aggregated usage for the oblivious certificates.
    let usage: Option<Vec<Vec<f64>>> = match &emb.routing {
        Routing::SinglePath(paths) => {
            if paths.len() != n {
                ck.shape(format!("{} paths for {n} pairs", paths.len()));
                return;
            }
            for (k, p) in paths.iter().enumerate() {
                ck.path(p, ends[k], k);
            }
            Some((0..e).map(|l| path_weights(paths, LinkId(l))).collect())
        }
        Routing::ObliviousSplit(ratios) => {
            if ratios.len() != n {
                ck.shape(format!("{} split vectors for {n} pairs", ratios.len()));
                return;
            }
            let before = ck.out.len();
            for (k, r) in ratios.iter().enumerate() {
                ck.conservation(r, ends[k], 1.0, k, None);
            }
            if ck.out[before..].iter().any(|v| v.kind == ViolationKind::Shape) {
                return;
            }
            Some(
                (0..e)
                    .map(|l| ratios.iter().map(|r| r.total(l).max(0.0)).collect())
                    .collect(),
            )
        }
        Routing::AdaptiveCertificate { vertices, flows } => {
            adaptive(ck, vnr, &ends, &emb.allocation, vertices, flows);
            None
        }
    };

    if let Some(usage) = usage {
        let dmax = if emb.algorithm.is_independent_channel() {
            match d_max(vnr) {
                Ok(d) => Some(d),
                Err(err) => {
                    ck.shape(err.to_string());
                    None
                }
            }
        } else {
            None
        };
        for (l, w) in usage.iter().enumerate() {
            let c = emb.allocation[l];
            if w.iter().all(|&x| x == 0.0) {
                continue;
            }
            match worst_case_load(vnr, w) {
                Ok(load) if exceeds(load, c) => ck.push(
                    ViolationKind::Load,
                    Some(l),
                    None,
                    None,
                    load - c,
                    format!("worst admissible load {load} above allocation {c}"),
                ),
                Ok(_) => {}
                Err(err) => ck.shape(err.to_string()),
            }
            if let Some(dmax) = &dmax {
                let load: f64 = w.iter().zip(dmax.iter()).map(|(a, b)| a * b).sum();
                if exceeds(load, c) {
                    ck.push(
                        ViolationKind::IndependentLoad,
                        Some(l),
                        None,
                        None,
                        load - c,
                        format!("sum of per-pair maxima {load} above allocation {c}"),
                    );
                }
            }
        }
    }

    match cost(&emb.allocation, sn) {
        Ok(total) if (total - emb.cost).abs() > VERIFY_TOL * (1.0 + total.abs()) => ck.push(
            ViolationKind::Cost,
            None,
            None,
            None,
            (total - emb.cost).abs(),
            format!("reported cost {} but the allocation costs {total}", emb.cost),
        ),
        _ => {}
    }
}

fn adaptive(
    ck: &mut Checker,
    vnr: &Vnr,
    ends: &[(NodeId, NodeId)],
    allocation: &[f64],
    vertices: &[DemandVector],
    flows: &[Vec<super::ArcFlows>],
) {
    let n = ends.len();
    if vertices.len() != flows.len()
        || vertices.iter().any(|v| v.len() != n)
        || flows.iter().any(|f| f.len() != n)
    {
        ck.shape("certificate needs one demand and one flow per pair for every vertex".into());
        return;
    }
    let before = ck.out.len();
    for (q, (v, per_pair)) in vertices.iter().zip(flows).enumerate() {
        for (k, f) in per_pair.iter().enumerate() {
            ck.conservation(f, ends[k], v[k], k, Some(q));
        }
    }
    if ck.out[before..].iter().any(|v| v.kind == ViolationKind::Shape) {
        return;
    }
    for (q, per_pair) in flows.iter().enumerate() {
        for (l, &c) in allocation.iter().enumerate() {
            let load: f64 = per_pair.iter().map(|f| f.total(l).max(0.0)).sum();
            if exceeds(load, c) {
                ck.push(
                    ViolationKind::Load,
                    Some(l),
                    None,
                    Some(q),
                    load - c,
                    format!("vertex {q} puts {load} on a link allocated {c}"),
                );
            }
        }
    }
    let required = match enumerate_vertices(vnr) {
        Ok(all) => dominant_vertices(&all),
        Err(err) => {
            ck.shape(format!("cannot enumerate demand vertices: {err}"));
            return;
        }
    };
    // A certified demand at least as large in every coordinate covers it.
    for w in &required {
        let covered = vertices.iter().any(|v| {
            v.iter()
                .zip(w.iter())
                .all(|(a, b)| *a >= b - VERIFY_TOL * (1.0 + b.abs()))
        });
        if !covered {
            let shortfall = vertices
                .iter()
                .map(|v| {
                    v.iter()
                        .zip(w.iter())
                        .map(|(a, b)| (b - a).max(0.0))
                        .fold(0.0, f64::max)
                })
                .fold(f64::INFINITY, f64::min);
            ck.push(
                ViolationKind::MissingVertex,
                None,
                None,
                None,
                shortfall,
                format!("dominant demand {:?} has no flow certificate", w.0),
            );
        }
    }
}
