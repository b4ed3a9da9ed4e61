//! Single-path embedders: pairs are routed one at a time, each on the first
//! of its K cheapest paths that still fits.

use std::collections::HashMap;

use super::{finish, settle_allocation, Algorithm, Embedding, EmbedFailure, FailReason, Routing};
use crate::topology::{k_least_cost_paths, LinkId, Path, ResidualState, SubstrateNetwork};
use crate::vnr::{d_max, worst_case_load, Vnr};

fn fits(target: f64, residual: f64) -> bool {
    target <= residual + 1e-9 * (1.0 + residual)
}

fn candidates(
    sn: &SubstrateNetwork,
    vnr: &Vnr,
    k: usize,
) -> Result<Vec<Vec<Path>>, EmbedFailure> {
    if k == 0 {
        return Err(EmbedFailure::new(FailReason::InvalidVnr, "K must be at least 1"));
    }
    let ends = vnr.resolve(sn)?;
    ends.iter()
        .enumerate()
        .map(|(n, &(s, t))| {
            let paths = k_least_cost_paths(sn, s, t, k)
                .map_err(|e| EmbedFailure::new(FailReason::InvalidVnr, e.to_string()))?;
            if paths.is_empty() {
                return Err(EmbedFailure::new(
                    FailReason::NoPath,
                    format!("no path joins pair {n} ({} -> {})", sn.node(s).name, sn.node(t).name),
                ));
            }
            Ok(paths)
        })
        .collect()
}

fn exhausted(vnr: &Vnr, n: usize, k: usize) -> EmbedFailure {
    let (s, t) = &vnr.pairs()[n];
    EmbedFailure::new(
        FailReason::CapacityExhausted,
        format!("none of the {k} cheapest paths of pair {n} ({s} -> {t}) has room"),
    )
}

/// Single path, independent channels: every link on pair `n`'s path grows by
/// the pair's maximum demand.
pub fn spic(
    sn: &SubstrateNetwork,
    residual: &ResidualState,
    vnr: &Vnr,
    k: usize,
) -> Result<Embedding, EmbedFailure> {
    let options = candidates(sn, vnr, k)?;
    let dmax = d_max(vnr)?;
    let mut target = vec![0.0; sn.link_count()];
    let mut chosen = Vec::with_capacity(options.len());
    for (n, paths) in options.into_iter().enumerate() {
        let pick = paths.into_iter().find(|p| {
            p.links
                .iter()
                .all(|l| fits(target[l.0] + dmax[n], residual.residual(*l)))
        });
        let Some(path) = pick else {
            return Err(exhausted(vnr, n, k));
        };
        for l in &path.links {
            target[l.0] += dmax[n];
        }
        chosen.push(path);
    }
    let allocation = settle_allocation(&target, residual);
    Ok(finish(Algorithm::Spic, sn, allocation, Routing::SinglePath(chosen)))
}

/// Single path, oblivious routing over shared channels: a link's target is
/// the joint worst case of all pairs routed through it so far.
pub fn spor(
    sn: &SubstrateNetwork,
    residual: &ResidualState,
    vnr: &Vnr,
    k: usize,
) -> Result<Embedding, EmbedFailure> {
    let options = candidates(sn, vnr, k)?;
    let n_pairs = vnr.n_pairs();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); sn.link_count()];
    let mut target = vec![0.0; sn.link_count()];
    let mut cache: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut load_of = |set: &[usize]| -> Result<f64, EmbedFailure> {
        if let Some(&v) = cache.get(set) {
            return Ok(v);
        }
        let mut w = vec![0.0; n_pairs];
        for &i in set {
            w[i] = 1.0;
        }
        let v = worst_case_load(vnr, &w)?;
        cache.insert(set.to_vec(), v);
        Ok(v)
    };
    let mut chosen = Vec::with_capacity(options.len());
    for (n, paths) in options.into_iter().enumerate() {
        let mut pick = None;
        'paths: for path in paths {
            let mut targets = Vec::with_capacity(path.links.len());
            for l in &path.links {
                let mut set = members[l.0].clone();
                set.push(n);
                let t = load_of(&set)?;
                if !fits(t, residual.residual(*l)) {
                    continue 'paths;
                }
                targets.push(t);
            }
            pick = Some((path, targets));
            break;
        }
        let Some((path, targets)) = pick else {
            return Err(exhausted(vnr, n, k));
        };
        for (l, t) in path.links.iter().zip(targets) {
            members[l.0].push(n);
            target[l.0] = t;
        }
        chosen.push(path);
    }
    let allocation = settle_allocation(&target, residual);
    Ok(finish(Algorithm::Spor, sn, allocation, Routing::SinglePath(chosen)))
}

/// Link usage of a single-path routing as per-pair indicator weights.
pub(super) fn path_weights(paths: &[Path], link: LinkId) -> Vec<f64> {
    paths
        .iter()
        .map(|p| if p.links.contains(&link) { 1.0 } else { 0.0 })
        .collect()
}
