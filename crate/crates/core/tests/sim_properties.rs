//! Whole-run simulator properties on small random substrates.

use std::collections::BTreeSet;

use vne_core::embed::Algorithm;
use vne_core::sim::{run_simulation, sweep, write_csv, Event, SimConfig};
use vne_core::topology::generate_random_topology;
use vne_core::vnr::VnrParams;

fn config(algorithm: Algorithm, seed: u64) -> SimConfig {
    SimConfig {
        horizon: 15.0,
        algorithm,
        seed,
        vnr: VnrParams {
            max_access: 6,
            ..VnrParams::default()
        },
        record_timing: false,
        ..SimConfig::default()
    }
}

#[test]
fn runs_conserve_capacity_and_log_consistently() {
    for seed in 0..2 {
        let sn = generate_random_topology(16, 100.0, 0.3, 60.0, seed).unwrap();
        for algorithm in Algorithm::SIMULATED {
            let out = run_simulation(&sn, &config(algorithm, seed)).unwrap();
            assert_eq!(out.final_residual, out.initial_residual, "{algorithm} seed {seed}");
            assert!(out.final_residual.is_untouched());

            let m = &out.metrics;
            let count = |f: fn(&Event) -> bool| out.events.iter().filter(|e| f(e)).count();
            assert_eq!(count(|e| matches!(e, Event::Arrival { .. })), m.arrivals);
            assert_eq!(count(|e| matches!(e, Event::Accept { .. })), m.accepted);
            assert_eq!(count(|e| matches!(e, Event::Reject { .. })), m.rejected);
            assert_eq!(count(|e| matches!(e, Event::Depart { .. })), m.accepted);
            assert_eq!(m.accepted + m.rejected, m.arrivals);
            assert!(m.small_accepted <= m.accepted);

            let rate = m.acceptance_rate.unwrap();
            assert!((0.0..=1.0).contains(&rate));
            assert!((0.0..=1.0).contains(&m.avg_link_utility));
            assert!(m.avg_cost_all.is_none_or(|c| c >= 0.0));
            assert!(m.total_embed_time.is_none());

            // Every accepted request departs once, after it arrived.
            let mut live = BTreeSet::new();
            let mut last = 0.0;
            for e in &out.events {
                let t = match e {
                    Event::Arrival { time, .. } | Event::Reject { time, .. } => *time,
                    Event::Accept { time, vnr, .. } => {
                        assert!(live.insert(*vnr));
                        *time
                    }
                    Event::Depart { time, vnr } => {
                        assert!(live.remove(vnr));
                        *time
                    }
                };
                assert!(t >= last);
                last = t;
            }
            assert!(live.is_empty());
        }
    }
}

#[test]
fn more_bandwidth_never_hurts_a_lone_request_stream() {
    // With arrivals far apart no two requests overlap, so acceptance can
    // only grow with capacity.
    let sn = generate_random_topology(12, 100.0, 0.35, 10.0, 5).unwrap();
    let cfg = SimConfig {
        arrival_rate: 0.05,
        mean_duration: 0.01,
        horizon: 1000.0,
        ..config(Algorithm::Mpor, 5)
    };
    let rows = sweep("random", &sn, &[5.0, 20.0, 80.0], &[Algorithm::Mpor], &[5], &cfg).unwrap();
    let rates: Vec<f64> = rows.iter().map(|r| r.metrics.acceptance_rate.unwrap()).collect();
    assert!(rates.windows(2).all(|w| w[0] <= w[1]), "{rates:?}");

    let mut a = Vec::new();
    let mut b = Vec::new();
    write_csv(&rows, &mut a).unwrap();
    let again = sweep("random", &sn, &[5.0, 20.0, 80.0], &[Algorithm::Mpor], &[5], &cfg).unwrap();
    write_csv(&again, &mut b).unwrap();
    assert_eq!(a, b);
}
