use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SubstrateNetwork, TopologyError};

const B4_JSON: &str = include_str!("../../data/b4.json");

/// Smallest price a generated link may carry.
const MIN_PRICE: f64 = 0.01;

fn distance_price(a: (f64, f64), b: (f64, f64)) -> f64 {
    let d = (a.0 - b.0).hypot(a.1 - b.1);
    ((d * 1e4).round() / 1e4).max(MIN_PRICE)
}

/// Random flat topology: nodes uniform on a `grid_side` square, every
/// unordered pair linked independently with probability `connect_prob`,
/// price equal to the Euclidean distance. No redraw is attempted when the
/// result is disconnected.
pub fn generate_random_topology(
    n_nodes: usize,
    grid_side: f64,
    connect_prob: f64,
    bandwidth: f64,
    seed: u64,
) -> Result<SubstrateNetwork, TopologyError> {
    if n_nodes < 2 {
        return Err(TopologyError::InvalidArgument(format!(
            "need at least 2 nodes, got {n_nodes}"
        )));
    }
    if !(connect_prob > 0.0 && connect_prob <= 1.0) {
        return Err(TopologyError::InvalidArgument(format!(
            "connection probability must be in (0, 1], got {connect_prob}"
        )));
    }
    if !(grid_side.is_finite() && grid_side > 0.0) {
        return Err(TopologyError::InvalidArgument(format!(
            "grid side must be positive, got {grid_side}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sn = SubstrateNetwork::new();
    let mut positions = Vec::with_capacity(n_nodes);
    for i in 0..n_nodes {
        let p = (
            rng.random_range(0.0..=grid_side),
            rng.random_range(0.0..=grid_side),
        );
        positions.push(p);
        sn.add_node(format!("n{i}"), Some(p))?;
    }
    let ids: Vec<_> = (0..n_nodes).map(super::NodeId).collect();
    let mut count = 0usize;
    for i in 0..n_nodes {
        for j in i + 1..n_nodes {
            if rng.random_bool(connect_prob) {
                let price = distance_price(positions[i], positions[j]);
                sn.add_link(format!("l{count}"), ids[i], ids[j], bandwidth, price)?;
                count += 1;
            }
        }
    }
    Ok(sn)
}

/// The bundled 14-node, 25-link B4 WAN with every link at `bandwidth`.
pub fn b4_topology(bandwidth: f64) -> Result<SubstrateNetwork, TopologyError> {
    SubstrateNetwork::from_json(B4_JSON)?.with_uniform_bandwidth(bandwidth)
}
