use super::{simulate, workload, SimConfig, SimError};
use crate::embed::{embed, Algorithm};
use crate::topology::SubstrateNetwork;

/// Which algorithms could take one arrival, given the residual it met.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayRecord {
    pub vnr: usize,
    pub pairs: usize,
    /// Parallel to the algorithm list passed to [`replay_arrivals`].
    pub accepted: Vec<bool>,
}

/// Runs `config.algorithm` as usual and, at every arrival, also tries each
/// of `algorithms` against a copy of the same residual. Nothing the
/// replayed algorithms do affects the run.
pub fn replay_arrivals(
    sn: &SubstrateNetwork,
    config: &SimConfig,
    algorithms: &[Algorithm],
) -> Result<Vec<ReplayRecord>, SimError> {
    let arrivals = workload(sn, config)?;
    let mut records = Vec::with_capacity(arrivals.len());
    simulate(sn, config, &arrivals, |arrival, residual| {
        let accepted = algorithms
            .iter()
            .map(|&alg| match embed(alg, sn, residual, &arrival.vnr, &config.embed) {
                Ok(e) => residual.clone().reserve(&e.allocation).is_ok(),
                Err(_) => false,
            })
            .collect();
        records.push(ReplayRecord {
            vnr: records.len(),
            pairs: arrival.vnr.n_pairs(),
            accepted,
        });
    })?;
    Ok(records)
}
