use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Vnr, VnrError};
use crate::topology::SubstrateNetwork;

/// Knobs of the random request generator.
#[derive(Debug, Clone, PartialEq)]
pub struct VnrParams {
    /// Access node count is uniform in `min_access..=max_access`.
    pub min_access: usize,
    pub max_access: usize,
    /// Probability that an unordered access pair becomes a request pair.
    pub pair_prob: f64,
    /// Individual demand bounds are uniform in this range.
    pub bound_range: (f64, f64),
    /// Number of joint rows; `None` adds one per pair.
    pub joint_rows: Option<usize>,
    /// A joint bound is this fraction (uniform in the range) of the sum of
    /// its members' individual bounds.
    pub joint_fraction: (f64, f64),
}

impl Default for VnrParams {
    fn default() -> Self {
        VnrParams {
            min_access: 2,
            max_access: 10,
            pair_prob: 0.5,
            bound_range: (1.0, 20.0),
            joint_rows: None,
            joint_fraction: (0.5, 0.95),
        }
    }
}

impl VnrParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.min_access < 2 || self.min_access > self.max_access {
            return Err(format!(
                "access node range [{}, {}] must satisfy 2 <= min <= max",
                self.min_access, self.max_access
            ));
        }
        if !(self.pair_prob > 0.0 && self.pair_prob <= 1.0) {
            return Err(format!("pair probability {} not in (0, 1]", self.pair_prob));
        }
        let (lo, hi) = self.bound_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(format!("bound range [{lo}, {hi}] must be positive and ordered"));
        }
        let (flo, fhi) = self.joint_fraction;
        if !(flo > 0.0 && flo <= fhi && fhi < 1.0) {
            return Err(format!("joint fraction range [{flo}, {fhi}] must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Draws a random request over the nodes of `sn`.
///
/// Access nodes are sampled without replacement; each unordered access pair
/// is kept with `pair_prob` (redrawn until at least one is kept). Every pair
/// gets an individual bound row, then joint rows over random subsets of two
/// or more pairs with coefficient one and a bound strictly below the sum of
/// the members' individual bounds.
pub fn generate_vnr<R: Rng + ?Sized>(
    sn: &SubstrateNetwork,
    params: &VnrParams,
    rng: &mut R,
) -> Result<Vnr, VnrError> {
    params
        .validate()
        .map_err(|e| VnrError::Topology(crate::topology::TopologyError::InvalidArgument(e)))?;
    if sn.node_count() < 2 {
        return Err(VnrError::NoPairs);
    }
    let max_access = params.max_access.min(sn.node_count());
    let min_access = params.min_access.min(max_access);
    let k = rng.random_range(min_access..=max_access);
    let access: Vec<usize> = sample(rng, sn.node_count(), k).into_vec();

    let candidates: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();
    let chosen = loop {
        let chosen: Vec<(usize, usize)> = candidates
            .iter()
            .copied()
            .filter(|_| rng.random_bool(params.pair_prob))
            .collect();
        if !chosen.is_empty() {
            break chosen;
        }
    };
    let pairs: Vec<(String, String)> = chosen
        .iter()
        .map(|&(i, j)| {
            (
                sn.nodes()[access[i]].name.clone(),
                sn.nodes()[access[j]].name.clone(),
            )
        })
        .collect();
    let n = pairs.len();

    let (lo, hi) = params.bound_range;
    let individual: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    let mut matrix: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut bounds = individual.clone();

    if n >= 2 {
        let (flo, fhi) = params.joint_fraction;
        for _ in 0..params.joint_rows.unwrap_or(n) {
            let size = rng.random_range(2..=n);
            let members = sample(rng, n, size);
            let mut row = vec![0.0; n];
            let mut sum = 0.0;
            for m in members.iter() {
                row[m] = 1.0;
                sum += individual[m];
            }
            let fraction = rng.random_range(flo..=fhi);
            matrix.push(row);
            bounds.push(fraction * sum);
        }
    }
    Vnr::new(pairs, matrix, bounds)
}

pub fn generate_vnr_seeded(
    sn: &SubstrateNetwork,
    params: &VnrParams,
    seed: u64,
) -> Result<Vnr, VnrError> {
    generate_vnr(sn, params, &mut ChaCha8Rng::seed_from_u64(seed))
}
