//! Multi-path oblivious embedders: one splitting ratio per pair and arc,
//! used for every admissible demand.

use super::flow::{
    add_conservation, backward, check_connected, forward, read_flows, settle_outcome, solve,
};
use super::{
    finish, settle_allocation, Algorithm, ArcFlows, Embedding, EmbedFailure, FailReason, Routing,
};
use crate::lp::{Constraint, LinearProgram, Relation, Sense, SimplexOptions, Solver};
use crate::topology::{LinkId, NodeId, ResidualState, SubstrateNetwork};
use crate::vnr::{d_max, worst_case_demand, worst_case_load, DemandVector, Vnr};

/// Relative slack under which a link's worst case counts as covered by the
/// cuts found so far.
const CUT_TOL: f64 = 1e-8;

/// Capacity variables, one unit-flow block per pair and conservation rows.
/// Load rows are left to the caller.
struct FlowProgram {
    lp: LinearProgram,
    links: usize,
    pairs: usize,
}

impl FlowProgram {
    fn new(
        sn: &SubstrateNetwork,
        residual: &ResidualState,
        ends: &[(NodeId, NodeId)],
        extra_vars: usize,
    ) -> Self {
        let e = sn.link_count();
        let n = ends.len();
        let mut objective = vec![0.0; e + 2 * e * n + extra_vars];
        objective[..e].copy_from_slice(&sn.prices());
        let mut lp = LinearProgram::new(Sense::Minimize, objective);
        for (link, r) in residual.residuals().into_iter().enumerate() {
            lp.set_bounds(link, 0.0, r);
        }
        for (k, &(s, t)) in ends.iter().enumerate() {
            add_conservation(&mut lp, sn, e + 2 * e * k, s, t, 1.0);
        }
        FlowProgram {
            lp,
            links: e,
            pairs: n,
        }
    }

    fn block(&self, pair: usize) -> usize {
        self.links + 2 * self.links * pair
    }

    fn extra(&self) -> usize {
        self.links + 2 * self.links * self.pairs
    }

    fn add_load_row(&mut self, link: usize, demand: &[f64]) {
        let row = self.load_row(link, demand);
        self.lp.add(row);
    }

    /// `sum_n demand[n] * f_n(link) <= c(link)`
    fn load_row(&self, link: usize, demand: &[f64]) -> Constraint {
        let mut terms = Vec::with_capacity(2 * demand.len() + 1);
        for (k, &d) in demand.iter().enumerate() {
            if d != 0.0 {
                let off = self.block(k);
                terms.push((forward(off, link), d));
                terms.push((backward(off, link), d));
            }
        }
        terms.push((link, -1.0));
        Constraint::new(terms, Relation::Le, 0.0)
    }

    fn ratios(&self, x: &[f64]) -> Vec<ArcFlows> {
        (0..self.pairs)
            .map(|k| read_flows(x, self.block(k), self.links))
            .collect()
    }
}

fn prepare(sn: &SubstrateNetwork, vnr: &Vnr) -> Result<Vec<(NodeId, NodeId)>, EmbedFailure> {
    let ends = vnr.resolve(sn)?;
    check_connected(sn, &ends)?;
    Ok(ends)
}

fn link_weights(ratios: &[ArcFlows], link: usize) -> Vec<f64> {
    ratios.iter().map(|r| r.total(link)).collect()
}

/// Multi-path, independent channels: every pair's traffic is sized at its
/// own maximum on each link it crosses.
pub fn mpic(
    sn: &SubstrateNetwork,
    residual: &ResidualState,
    vnr: &Vnr,
) -> Result<Embedding, EmbedFailure> {
    let ends = prepare(sn, vnr)?;
    let dmax = d_max(vnr)?;
    let mut fp = FlowProgram::new(sn, residual, &ends, 0);
    for link in 0..fp.links {
        fp.add_load_row(link, &dmax);
    }
    let x = solve(&fp.lp, "mpic")?;
    let allocation = settle_allocation(&x[..fp.links], residual);
    Ok(finish(Algorithm::Mpic, sn, allocation, Routing::ObliviousSplit(fp.ratios(&x))))
}

/// Multi-path, oblivious routing over shared channels: each link is sized for
/// the worst admissible demand given the splits.
///
/// The inner maximization on every link is replaced by its dual, which folds
/// the whole problem into one program: `b'q(e) <= c(e)`, `A'q(e) >= f(e)`,
/// `q(e) >= 0`, with `f(e)` the per-pair traffic share on link `e`.
pub fn mpor(
    sn: &SubstrateNetwork,
    residual: &ResidualState,
    vnr: &Vnr,
) -> Result<Embedding, EmbedFailure> {
    let ends = prepare(sn, vnr)?;
    let m = vnr.n_rows();
    let e = sn.link_count();
    let mut fp = FlowProgram::new(sn, residual, &ends, e * m);
    let base = fp.extra();
    let q = |link: usize, row: usize| base + link * m + row;
    for link in 0..e {
        let mut terms: Vec<(usize, f64)> =
            vnr.bounds().iter().enumerate().map(|(row, &b)| (q(link, row), b)).collect();
        terms.push((link, -1.0));
        fp.lp.le(terms, 0.0);
        for k in 0..fp.pairs {
            let off = fp.block(k);
            let mut terms: Vec<(usize, f64)> = vnr
                .matrix()
                .iter()
                .enumerate()
                .filter(|(_, coeffs)| coeffs[k] != 0.0)
                .map(|(row, coeffs)| (q(link, row), coeffs[k]))
                .collect();
            terms.push((forward(off, link), -1.0));
            terms.push((backward(off, link), -1.0));
            fp.lp.ge(terms, 0.0);
        }
    }
    let x = solve(&fp.lp, "mpor")?;
    let ratios = fp.ratios(&x);
    finish_oblivious(Algorithm::Mpor, sn, residual, vnr, ratios)
}

/// [`mpor`] by row generation: the flow program starts with one demand per
/// link (the one maximizing total traffic), and each round adds, for every
/// link whose worst case exceeds its capacity variable, the demand attaining
/// that worst case. Slower than the folded program; kept as a cross-check.
pub fn mpor_by_cuts(
    sn: &SubstrateNetwork,
    residual: &ResidualState,
    vnr: &Vnr,
) -> Result<Embedding, EmbedFailure> {
    let ends = prepare(sn, vnr)?;
    let mut fp = FlowProgram::new(sn, residual, &ends, 0);
    let (_, busiest) = worst_case_demand(vnr, &vec![1.0; vnr.n_pairs()])?;
    let mut seen: Vec<Vec<DemandVector>> = vec![vec![busiest.clone()]; fp.links];
    for link in 0..fp.links {
        fp.add_load_row(link, &busiest);
    }
    let lp_error = |e: crate::lp::LpError| EmbedFailure::new(FailReason::InvalidVnr, e.to_string());
    let mut solver = Solver::new(fp.lp.clone(), SimplexOptions::default()).map_err(lp_error)?;
    let mut outcome = solver.outcome();
    loop {
        let x = settle_outcome(outcome, "mpor")?;
        let ratios = fp.ratios(&x);
        let mut cuts = Vec::new();
        for link in 0..fp.links {
            let w = link_weights(&ratios, link);
            if w.iter().all(|&v| v == 0.0) {
                continue;
            }
            let (load, d) = worst_case_demand(vnr, &w)?;
            // A repeated demand means the solver's tolerance, not a missing
            // cut, explains the gap.
            if load > x[link] + CUT_TOL * (1.0 + x[link])
                && !seen[link].iter().any(|s| s.approx_eq(&d, 1e-9))
            {
                cuts.push((link, d));
            }
        }
        if cuts.is_empty() {
            return finish_oblivious(Algorithm::Mpor, sn, residual, vnr, ratios);
        }
        for (link, d) in cuts {
            solver.add_constraint(fp.load_row(link, &d)).map_err(lp_error)?;
            seen[link].push(d);
        }
        outcome = solver.resolve();
    }
}

/// Sizes every link at its exact worst-case load under `ratios`.
fn finish_oblivious(
    algorithm: Algorithm,
    sn: &SubstrateNetwork,
    residual: &ResidualState,
    vnr: &Vnr,
    ratios: Vec<ArcFlows>,
) -> Result<Embedding, EmbedFailure> {
    let mut worst = vec![0.0; sn.link_count()];
    for (link, slot) in worst.iter_mut().enumerate() {
        let w = link_weights(&ratios, link);
        if w.iter().any(|&v| v != 0.0) {
            *slot = worst_case_load(vnr, &w)?;
        }
    }
    let allocation = settle_allocation(&worst, residual);
    Ok(finish(algorithm, sn, allocation, Routing::ObliviousSplit(ratios)))
}

/// Solves `mpic`, keeps its splits and shrinks every used link to the worst
/// admissible load under those splits.
pub fn mpor_fast(
    sn: &SubstrateNetwork,
    residual: &ResidualState,
    vnr: &Vnr,
) -> Result<Embedding, EmbedFailure> {
    let base = mpic(sn, residual, vnr)?;
    let Routing::ObliviousSplit(ratios) = base.routing else {
        unreachable!("mpic returns oblivious splits")
    };
    let mut allocation = base.allocation;
    for (link, c) in allocation.iter_mut().enumerate() {
        if *c <= 0.0 {
            continue;
        }
        let worst = worst_case_load(vnr, &link_weights(&ratios, link))?;
        *c = worst.min(*c).min(residual.residual(LinkId(link))).max(0.0);
    }
    Ok(finish(Algorithm::MporFast, sn, allocation, Routing::ObliviousSplit(ratios)))
}
