//! K least-cost loopless paths (Yen's algorithm over Dijkstra).
//!
//! Paths are totally ordered by price, then by node sequence, then by link
//! sequence. The spur search returns the smallest path under that order, which
//! is what makes Yen's deviation argument hold with ties present.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use super::{LinkId, NodeId, Path, SubstrateNetwork, TopologyError};

/// Path wrapper with the total order used for ranking.
#[derive(Debug, Clone)]
struct Ranked(Path);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Ranked {}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .price
            .total_cmp(&other.0.price)
            .then_with(|| self.0.nodes.cmp(&other.0.nodes))
            .then_with(|| self.0.links.cmp(&other.0.links))
    }
}

#[derive(PartialEq)]
struct HeapItem(f64, NodeId);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// Lexicographically smallest least-price path from `from` to `to` avoiding
/// blocked nodes and links.
fn spur_path(
    sn: &SubstrateNetwork,
    from: NodeId,
    to: NodeId,
    blocked_nodes: &[bool],
    blocked_links: &[bool],
) -> Option<(Vec<NodeId>, Vec<LinkId>)> {
    // Distances to `to`; the graph is undirected so a forward search suffices.
    let mut dist = vec![f64::INFINITY; sn.node_count()];
    let mut heap = BinaryHeap::new();
    dist[to.0] = 0.0;
    heap.push(HeapItem(0.0, to));
    while let Some(HeapItem(d, u)) = heap.pop() {
        if d > dist[u.0] {
            continue;
        }
        for &(l, v) in sn.incident(u) {
            if blocked_links[l.0] || blocked_nodes[v.0] {
                continue;
            }
            let nd = d + sn.link(l).price;
            if nd < dist[v.0] {
                dist[v.0] = nd;
                heap.push(HeapItem(nd, v));
            }
        }
    }
    if !dist[from.0].is_finite() {
        return None;
    }

    let mut nodes = vec![from];
    let mut links = Vec::new();
    let mut here = from;
    while here != to {
        let tol = 1e-9 * (1.0 + dist[here.0]);
        let step = sn
            .incident(here)
            .iter()
            .filter(|&&(l, v)| {
                !blocked_links[l.0]
                    && !blocked_nodes[v.0]
                    && dist[v.0] < dist[here.0]
                    && (sn.link(l).price + dist[v.0] - dist[here.0]).abs() <= tol
            })
            .min_by_key(|&&(l, v)| (v, l))
            .copied()?;
        links.push(step.0);
        nodes.push(step.1);
        here = step.1;
    }
    Some((nodes, links))
}

fn price_of(sn: &SubstrateNetwork, links: &[LinkId]) -> f64 {
    links.iter().fold(0.0, |acc, l| acc + sn.link(*l).price)
}

/// Up to `k` distinct simple paths from `s` to `t` in nondecreasing price;
/// empty when the two nodes are disconnected.
pub fn k_least_cost_paths(
    sn: &SubstrateNetwork,
    s: NodeId,
    t: NodeId,
    k: usize,
) -> Result<Vec<Path>, TopologyError> {
    for n in [s, t] {
        if n.0 >= sn.node_count() {
            return Err(TopologyError::UnknownNode(format!("#{}", n.0)));
        }
    }
    if s == t {
        return Err(TopologyError::InvalidArgument(
            "path endpoints must differ".into(),
        ));
    }
    if k == 0 {
        return Err(TopologyError::InvalidArgument("K must be at least 1".into()));
    }

    let mut blocked_nodes = vec![false; sn.node_count()];
    let mut blocked_links = vec![false; sn.link_count()];
    let Some((nodes, links)) = spur_path(sn, s, t, &blocked_nodes, &blocked_links) else {
        return Ok(Vec::new());
    };
    let price = price_of(sn, &links);
    let mut found = vec![Path {
        nodes,
        links,
        price,
    }];
    let mut candidates: BTreeSet<Ranked> = BTreeSet::new();

    while found.len() < k {
        let last = found.last().unwrap().clone();
        for i in 0..last.links.len() {
            let spur = last.nodes[i];
            let root_nodes = &last.nodes[..=i];
            let root_links = &last.links[..i];

            blocked_nodes.iter_mut().for_each(|b| *b = false);
            blocked_links.iter_mut().for_each(|b| *b = false);
            for p in &found {
                if p.links.len() > i && p.nodes[..=i] == *root_nodes && p.links[..i] == *root_links {
                    blocked_links[p.links[i].0] = true;
                }
            }
            for n in &root_nodes[..i] {
                blocked_nodes[n.0] = true;
            }

            if let Some((spur_nodes, spur_links)) =
                spur_path(sn, spur, t, &blocked_nodes, &blocked_links)
            {
                let mut nodes = root_nodes.to_vec();
                nodes.extend_from_slice(&spur_nodes[1..]);
                let mut links = root_links.to_vec();
                links.extend(spur_links);
                let price = price_of(sn, &links);
                candidates.insert(Ranked(Path {
                    nodes,
                    links,
                    price,
                }));
            }
        }
        let Some(Ranked(next)) = candidates.pop_first() else {
            break;
        };
        found.push(next);
    }
    Ok(found)
}
