//! Multi-path adaptive embedder: routing may change with the demand, so only
//! the dominant vertices of the demand polytope need a feasible flow.

use super::flow::{add_conservation, backward, check_connected, forward, read_flows, solve};
use super::{
    finish, settle_allocation, Algorithm, ArcFlows, EmbedFailure, EmbedOptions, FailReason,
    Embedding, Routing,
};
use crate::lp::{solve_lp, LinearProgram, LpOutcome, Sense};
use crate::topology::{NodeId, ResidualState, SubstrateNetwork};
use crate::vnr::{dominant_vertices, enumerate_vertices_with_limit, DemandVector, Vnr, VERTEX_TOL};

/// Relative and absolute room given to a link when checking whether an
/// allocation already carries a vertex.
const CAP_SLACK: f64 = 1e-9;
/// Total overflow below which a vertex counts as carried.
const OVERFLOW_TOL: f64 = 1e-9;

pub fn mpar(
    sn: &SubstrateNetwork,
    residual: &ResidualState,
    vnr: &Vnr,
    options: &EmbedOptions,
) -> Result<Embedding, EmbedFailure> {
    let ends = vnr.resolve(sn)?;
    let vertices = dominant_vertices(&enumerate_vertices_with_limit(vnr, options.vertex_limit)?);
    let e = sn.link_count();
    let n = ends.len();
    let size = vertices.len() * n * e;
    if size > options.mpar_variable_cap {
        return Err(EmbedFailure::new(
            FailReason::InvalidVnr,
            format!(
                "{} vertices x {n} pairs x {e} links exceeds the cap of {}",
                vertices.len(),
                options.mpar_variable_cap
            ),
        ));
    }
    check_connected(sn, &ends)?;

    // Start from the vertex with the largest total demand, then add the
    // vertex the current allocation falls furthest short of, one per round,
    // until every vertex fits.
    let heaviest = (0..vertices.len())
        .max_by(|&a, &b| vertices[a].iter().sum::<f64>().total_cmp(&vertices[b].iter().sum()))
        .expect("a bounded polytope has a vertex");
    let mut active = vec![heaviest];
    let mut flows: Vec<Option<Vec<ArcFlows>>> = vec![None; vertices.len()];
    loop {
        let chosen: Vec<&DemandVector> = active.iter().map(|&i| &vertices[i]).collect();
        let (mut lp, blocks) = flow_program(sn, &ends, &chosen, None);
        for (link, r) in residual.residuals().into_iter().enumerate() {
            lp.set_bounds(link, 0.0, r);
        }
        let x = solve(&lp, "mpar")?;
        let raw = &x[..e];
        for (&i, offs) in active.iter().zip(&blocks) {
            flows[i] = Some(read_blocks(&x, offs, e));
        }

        // Flows from an earlier round are kept while they still fit.
        let mut worst: Option<(f64, usize)> = None;
        for i in 0..vertices.len() {
            if active.contains(&i) || flows[i].as_ref().is_some_and(|f| fits(f, raw)) {
                continue;
            }
            let (check, offs) = flow_program(sn, &ends, &[&vertices[i]], Some(raw));
            let overflow = match solve_lp(&check) {
                Ok(LpOutcome::Optimal {
                    solution,
                    objective_value,
                }) => {
                    flows[i] = Some(read_blocks(&solution, &offs[0], e));
                    objective_value
                }
                _ => f64::INFINITY,
            };
            if overflow > OVERFLOW_TOL {
                flows[i] = None;
                if worst.is_none_or(|(w, _)| overflow > w) {
                    worst = Some((overflow, i));
                }
            }
        }
        match worst {
            Some((_, i)) => active.push(i),
            None => {
                let allocation = settle_allocation(raw, residual);
                let flows = flows.into_iter().map(|f| f.expect("every vertex routed")).collect();
                return Ok(finish(
                    Algorithm::Mpar,
                    sn,
                    allocation,
                    Routing::AdaptiveCertificate { vertices, flows },
                ));
            }
        }
    }
}

/// True when the per-link totals of `flows` stay within `caps`.
fn fits(flows: &[ArcFlows], caps: &[f64]) -> bool {
    caps.iter().enumerate().all(|(l, &c)| {
        let total: f64 = flows.iter().map(|f| f.total(l)).sum();
        total <= c * (1.0 + CAP_SLACK) + CAP_SLACK
    })
}

/// Flow blocks for the pairs with nonzero demand at each vertex: column
/// offsets per vertex and pair.
type Blocks = Vec<Vec<Option<usize>>>;

/// Arc-flow program carrying every vertex in `vertices`.
///
/// Without `caps`, the first `links` columns are the allocation, priced and
/// bounding the total flow on each link. With `caps`, the first `links`
/// columns are overflow above each cap and the objective is their sum.
fn flow_program(
    sn: &SubstrateNetwork,
    ends: &[(NodeId, NodeId)],
    vertices: &[&DemandVector],
    caps: Option<&[f64]>,
) -> (LinearProgram, Blocks) {
    let e = sn.link_count();
    let mut next = e;
    let blocks: Blocks = vertices
        .iter()
        .map(|v| {
            v.iter()
                .map(|&d| {
                    (d > VERTEX_TOL).then(|| {
                        let off = next;
                        next += 2 * e;
                        off
                    })
                })
                .collect()
        })
        .collect();
    let mut objective = vec![0.0; next];
    match caps {
        None => objective[..e].copy_from_slice(&sn.prices()),
        Some(_) => objective[..e].fill(1.0),
    }
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    for (v, offs) in vertices.iter().zip(&blocks) {
        for (k, off) in offs.iter().enumerate() {
            if let Some(off) = *off {
                add_conservation(&mut lp, sn, off, ends[k].0, ends[k].1, v[k]);
            }
        }
        for link in 0..e {
            let mut terms: Vec<(usize, f64)> = offs
                .iter()
                .flatten()
                .flat_map(|&off| [(forward(off, link), 1.0), (backward(off, link), 1.0)])
                .collect();
            if terms.is_empty() {
                continue;
            }
            terms.push((link, -1.0));
            let room = caps.map_or(0.0, |c| c[link] * (1.0 + CAP_SLACK) + CAP_SLACK);
            lp.le(terms, room);
        }
    }
    (lp, blocks)
}

fn read_blocks(x: &[f64], offs: &[Option<usize>], e: usize) -> Vec<ArcFlows> {
    offs.iter()
        .map(|off| match off {
            Some(off) => read_flows(x, *off, e),
            None => ArcFlows::zeros(e),
        })
        .collect()
}
