use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::{simulate, workload, Metrics, SimConfig, SimError};
use crate::embed::Algorithm;
use crate::topology::SubstrateNetwork;

pub const CSV_HEADER: [&str; 10] = [
    "topology",
    "bandwidth",
    "algorithm",
    "seed",
    "acceptance_rate",
    "avg_link_utility",
    "avg_cost_all",
    "avg_cost_small",
    "embed_time_s",
    "n_vnrs",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub topology: String,
    pub bandwidth: f64,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub metrics: Metrics,
}

#[derive(Serialize)]
struct CsvRecord<'a> {
    topology: &'a str,
    bandwidth: f64,
    algorithm: &'static str,
    seed: u64,
    acceptance_rate: Option<f64>,
    avg_link_utility: f64,
    avg_cost_all: Option<f64>,
    avg_cost_small: Option<f64>,
    embed_time_s: Option<f64>,
    n_vnrs: usize,
}

/// Simulates every (bandwidth, algorithm, seed) cell, with every link of `sn`
/// set to the cell's bandwidth. All algorithms see the same request stream
/// for a given seed. Cells run in parallel; rows come back ordered by
/// bandwidth, then algorithm, then seed.
pub fn sweep(
    topology: &str,
    sn: &SubstrateNetwork,
    bandwidths: &[f64],
    algorithms: &[Algorithm],
    seeds: &[u64],
    config: &SimConfig,
) -> Result<Vec<SweepRow>, SimError> {
    if bandwidths.is_empty() || algorithms.is_empty() || seeds.is_empty() {
        return Err(SimError::Config(
            "bandwidth, algorithm and seed lists must be nonempty".into(),
        ));
    }
    let networks = bandwidths
        .iter()
        .map(|&b| sn.with_uniform_bandwidth(b))
        .collect::<Result<Vec<_>, _>>()?;
    let workloads = seeds
        .iter()
        .map(|&seed| workload(sn, &SimConfig { seed, ..config.clone() }))
        .collect::<Result<Vec<_>, _>>()?;

    let mut cells = Vec::new();
    for b in 0..bandwidths.len() {
        for &algorithm in algorithms {
            for s in 0..seeds.len() {
                cells.push((b, algorithm, s));
            }
        }
    }
    cells
        .into_par_iter()
        .map(|(b, algorithm, s)| {
            let cell = SimConfig {
                algorithm,
                seed: seeds[s],
                ..config.clone()
            };
            let run = simulate(&networks[b], &cell, &workloads[s], |_, _| {})?;
            Ok(SweepRow {
                topology: topology.to_string(),
                bandwidth: bandwidths[b],
                algorithm,
                seed: seeds[s],
                metrics: run.metrics,
            })
        })
        .collect()
}

/// Writes the metrics table; absent values are empty fields.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_HEADER)?;
    }
    for r in rows {
        let m = &r.metrics;
        w.serialize(CsvRecord {
            topology: &r.topology,
            bandwidth: r.bandwidth,
            algorithm: r.algorithm.name(),
            seed: r.seed,
            acceptance_rate: m.acceptance_rate,
            avg_link_utility: m.avg_link_utility,
            avg_cost_all: m.avg_cost_all,
            avg_cost_small: m.avg_cost_small,
            embed_time_s: m.total_embed_time,
            n_vnrs: m.arrivals,
        })?;
    }
    w.flush()?;
    Ok(())
}
