//! Building blocks of the arc-flow programs.
//!
//! A flow block is `2 * links` consecutive columns: the forward and backward
//! arc of every link, interleaved.

use super::{ArcFlows, EmbedFailure, FailReason};
use crate::lp::{solve_lp, LinearProgram, LpOutcome};
use crate::topology::{NodeId, SubstrateNetwork};

/// Values below this are read back as zero flow.
const FLOW_EPS: f64 = 1e-12;

#[inline]
pub(super) fn forward(offset: usize, link: usize) -> usize {
    offset + 2 * link
}

#[inline]
pub(super) fn backward(offset: usize, link: usize) -> usize {
    offset + 2 * link + 1
}

/// Adds conservation rows for one commodity: net outflow `amount` at
/// `source`, zero at transit nodes. The target's row is implied and left out.
pub(super) fn add_conservation(
    lp: &mut LinearProgram,
    sn: &SubstrateNetwork,
    offset: usize,
    source: NodeId,
    target: NodeId,
    amount: f64,
) {
    for i in 0..sn.node_count() {
        let node = NodeId(i);
        if node == target {
            continue;
        }
        let mut terms = Vec::with_capacity(2 * sn.incident(node).len());
        for &(l, _) in sn.incident(node) {
            let (out, into) = if sn.link(l).u == node {
                (forward(offset, l.0), backward(offset, l.0))
            } else {
                (backward(offset, l.0), forward(offset, l.0))
            };
            terms.push((out, 1.0));
            terms.push((into, -1.0));
        }
        let rhs = if node == source { amount } else { 0.0 };
        if !terms.is_empty() || rhs != 0.0 {
            lp.equal(terms, rhs);
        }
    }
}

pub(super) fn read_flows(x: &[f64], offset: usize, n_links: usize) -> ArcFlows {
    let clean = |v: f64| if v > FLOW_EPS { v } else { 0.0 };
    ArcFlows {
        forward: (0..n_links).map(|l| clean(x[forward(offset, l)])).collect(),
        backward: (0..n_links).map(|l| clean(x[backward(offset, l)])).collect(),
    }
}

/// Fails early with a readable reason when some pair has no route at all.
pub(super) fn check_connected(
    sn: &SubstrateNetwork,
    ends: &[(NodeId, NodeId)],
) -> Result<(), EmbedFailure> {
    match ends.iter().position(|&(s, t)| !sn.connected(s, t)) {
        Some(n) => Err(EmbedFailure::new(
            FailReason::LpInfeasible,
            format!(
                "pair {n} ({} -> {}) is disconnected in the substrate",
                sn.node(ends[n].0).name,
                sn.node(ends[n].1).name
            ),
        )),
        None => Ok(()),
    }
}

pub(super) fn solve(lp: &LinearProgram, what: &str) -> Result<Vec<f64>, EmbedFailure> {
    match solve_lp(lp) {
        Ok(outcome) => settle_outcome(outcome, what),
        Err(e) => Err(EmbedFailure::new(FailReason::InvalidVnr, e.to_string())),
    }
}

pub(super) fn settle_outcome(outcome: LpOutcome, what: &str) -> Result<Vec<f64>, EmbedFailure> {
    match outcome {
        LpOutcome::Optimal { solution, .. } => Ok(solution),
        LpOutcome::Infeasible => Err(EmbedFailure::new(
            FailReason::LpInfeasible,
            format!("{what} program is infeasible against the residual bandwidth"),
        )),
        LpOutcome::Unbounded => Err(EmbedFailure::new(
            FailReason::LpInfeasible,
            format!("{what} program is unbounded"),
        )),
    }
}
