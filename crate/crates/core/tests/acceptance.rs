//! Acceptance suite: one PASS or FAIL line per criterion. Exits nonzero when
//! any criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::{connected_substrate, random_request, rng, same_vertex_set, IntPolytope};
use rand::Rng;
use vne_core::embed::{embed, verify_embedding, Algorithm, EmbedOptions, Embedding};
use vne_core::lp::{dual_of, solve_lp};
use vne_core::sim::{run_simulation, sweep, write_csv, Event, SimConfig, SweepRow};
use vne_core::topology::{b4_topology, ResidualState, SubstrateNetwork};
use vne_core::vnr::{enumerate_vertices, motivating_example, Vnr};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn within(a: f64, b: f64) -> bool {
    a <= b + 1e-6 * b.abs()
}

struct Instance {
    sn: SubstrateNetwork,
    residual: ResidualState,
    vnr: Vnr,
}

fn instance(r: &mut rand_chacha::ChaCha8Rng) -> Instance {
    let bandwidth = r.random_range(15.0..60.0);
    let sn = connected_substrate(r, 30, bandwidth);
    let residuals: Vec<f64> = (0..sn.link_count())
        .map(|_| bandwidth * r.random_range(0.3..=1.0))
        .collect();
    let residual = ResidualState::with_residuals(&sn, &residuals).unwrap();
    let vnr = random_request(r, &sn, 6);
    Instance { sn, residual, vnr }
}

const VARIANTS: [Algorithm; 6] = [
    Algorithm::Spic,
    Algorithm::Spor,
    Algorithm::Mpic,
    Algorithm::Mpor,
    Algorithm::MporFast,
    Algorithm::Mpar,
];

/// Outcomes of every variant on one instance, in `VARIANTS` order.
fn run_all(i: &Instance) -> Vec<Option<Embedding>> {
    let options = EmbedOptions::default();
    VARIANTS
        .iter()
        .map(|&a| embed(a, &i.sn, &i.residual, &i.vnr, &options).ok())
        .collect()
}

fn criteria_1_and_2() -> (Verdict, Verdict) {
    let start = Instant::now();
    let mut r = rng(1001);
    let mut complete = 0;
    let mut total = 0;
    let mut order_bad = 0;
    let mut chain_bad = 0;
    while complete < 200 && total < 2000 {
        total += 1;
        let i = instance(&mut r);
        let out = run_all(&i);
        let ok = |a: Algorithm| out[VARIANTS.iter().position(|&b| b == a).unwrap()].as_ref();
        let implies = |p: Algorithm, q: Algorithm| ok(p).is_none() || ok(q).is_some();
        if !(implies(Algorithm::Spic, Algorithm::Mpic)
            && implies(Algorithm::Mpic, Algorithm::Mpor)
            && implies(Algorithm::Mpor, Algorithm::Mpar)
            && implies(Algorithm::Spor, Algorithm::Mpor))
        {
            chain_bad += 1;
        }
        if let (Some(ar), Some(or), Some(fast), Some(ic)) = (
            ok(Algorithm::Mpar),
            ok(Algorithm::Mpor),
            ok(Algorithm::MporFast),
            ok(Algorithm::Mpic),
        ) {
            complete += 1;
            if !(within(ar.cost, or.cost) && within(or.cost, fast.cost) && within(fast.cost, ic.cost)) {
                order_bad += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let fast_enough = elapsed < Duration::from_secs(120);
    (
        verdict(
            complete >= 200 && order_bad == 0 && fast_enough,
            format!(
                "cost ordering on {complete} instances with all four multi-path successes, {order_bad} violations, {:.1} s",
                elapsed.as_secs_f64()
            ),
        ),
        verdict(
            chain_bad == 0 && total >= 200,
            format!("feasibility chain on {total} instances, {chain_bad} counterexamples"),
        ),
    )
}

fn criterion_3() -> Verdict {
    let mut r = rng(1003);
    let mut checked = 0;
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..100 {
        let bandwidth = 1000.0;
        let sn = connected_substrate(&mut r, 30, bandwidth);
        let base = random_request(&mut r, &sn, 6);
        let bounds = (0..base.n_pairs()).map(|_| r.random_range(1.0..20.0)).collect();
        let vnr = Vnr::independent(base.pairs().to_vec(), bounds).unwrap();
        let residual = ResidualState::new(&sn);
        let options = EmbedOptions::default();
        match (
            embed(Algorithm::Mpic, &sn, &residual, &vnr, &options),
            embed(Algorithm::Mpor, &sn, &residual, &vnr, &options),
        ) {
            (Ok(ic), Ok(or)) => {
                checked += 1;
                worst = worst.max((or.cost - ic.cost).abs() / ic.cost);
            }
            _ => failures += 1,
        }
    }
    verdict(
        checked == 100 && worst <= 1e-6,
        format!("{checked} identity-matrix instances, {failures} embedding failures, worst relative gap {worst:.2e}"),
    )
}

fn criterion_4() -> Verdict {
    let mut r = rng(1004);
    let mut worst = 0.0f64;
    let mut bad = 0;
    for _ in 0..1000 {
        let n = r.random_range(1..=6);
        let m = r.random_range(1..=6);
        let mut matrix: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                (0..n)
                    .map(|_| if r.random_bool(0.3) { 0.0 } else { r.random_range(0.0..5.0) })
                    .collect()
            })
            .collect();
        for j in 0..n {
            if matrix.iter().all(|row| row[j] <= 0.0) {
                let i = r.random_range(0..m);
                matrix[i][j] = r.random_range(0.5..5.0);
            }
        }
        let bounds = (0..m).map(|_| r.random_range(1.0..100.0)).collect();
        let pairs = (0..n).map(|i| (format!("s{i}"), format!("t{i}"))).collect();
        let vnr = Vnr::new(pairs, matrix, bounds).unwrap();
        let weights: Vec<f64> = (0..n)
            .map(|_| if r.random_bool(0.2) { 0.0 } else { r.random_range(0.0..1.0) })
            .collect();
        let inner = vnr.demand_program(&weights);
        let primal = solve_lp(&inner).unwrap().objective_value();
        let dual = solve_lp(&dual_of(&inner).unwrap()).unwrap().objective_value();
        match (primal, dual) {
            (Some(p), Some(d)) => worst = worst.max((p - d).abs() / (1.0 + p.abs())),
            _ => bad += 1,
        }
    }
    verdict(
        bad == 0 && worst <= 1e-7,
        format!("1000 (A, b, f) triples, {bad} non-optimal solves, worst relative gap {worst:.2e}"),
    )
}

fn criterion_5() -> Verdict {
    let mut r = rng(1005);
    let mut mismatches = 0;
    let mut vertices = 0;
    for _ in 0..500 {
        let p = IntPolytope::random(&mut r, 4, 6);
        let exact = p.exact_vertices();
        vertices += exact.len();
        match enumerate_vertices(&p.vnr()) {
            Ok(found) if same_vertex_set(&found, &exact, 1e-9) => {}
            _ => mismatches += 1,
        }
    }
    verdict(
        mismatches == 0,
        format!("500 polytopes, {vertices} exact vertices, {mismatches} mismatched sets"),
    )
}

fn criterion_6() -> Verdict {
    let mut sn = SubstrateNetwork::new();
    let ids: Vec<_> = ["A", "B", "C", "D", "L", "R"]
        .iter()
        .map(|n| sn.add_node(*n, None).unwrap())
        .collect();
    for (name, u, v, bw) in [
        ("A-L", 0, 4, 1000.0),
        ("B-L", 1, 4, 1000.0),
        ("L-R", 4, 5, 200.0),
        ("R-C", 5, 2, 1000.0),
        ("R-D", 5, 3, 1000.0),
    ] {
        sn.add_link(name, ids[u], ids[v], bw, 1.0).unwrap();
    }
    let bottleneck = sn.link_id("L-R").unwrap().0;
    let vnr = motivating_example();
    let residual = ResidualState::new(&sn);
    let options = EmbedOptions::default();
    let run = |a| embed(a, &sn, &residual, &vnr, &options);
    let mut notes = Vec::new();
    let mut pass = true;
    for a in [Algorithm::Spic, Algorithm::Mpic] {
        let failed = run(a).is_err();
        pass &= failed;
        notes.push(format!("{a} {}", if failed { "fails" } else { "succeeds" }));
    }
    for a in [Algorithm::Mpor, Algorithm::Mpar] {
        match run(a) {
            Ok(e) => {
                let used = e.allocation[bottleneck];
                pass &= (used - 200.0).abs() <= 1e-9 * 200.0;
                notes.push(format!("{a} reserves {used} on L-R"));
            }
            Err(f) => {
                pass = false;
                notes.push(format!("{a} fails ({})", f.reason));
            }
        }
    }
    verdict(pass, notes.join(", "))
}

fn criterion_7() -> Verdict {
    let start = Instant::now();
    let sn = b4_topology(1200.0).unwrap();
    let algorithms = [
        Algorithm::Mpic,
        Algorithm::MporFast,
        Algorithm::Mpor,
        Algorithm::MparMporHybrid,
    ];
    let rows = sweep("b4", &sn, &[1200.0], &algorithms, &[0, 1, 2], &SimConfig::default()).unwrap();
    let elapsed = start.elapsed();
    let of = |a: Algorithm| rows.iter().filter(move |r| r.algorithm == a);
    let mean = |it: Box<dyn Iterator<Item = f64> + '_>| {
        let v: Vec<f64> = it.collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let min_rate = |a: Algorithm| {
        of(a)
            .map(|r: &SweepRow| r.metrics.acceptance_rate.unwrap_or(0.0))
            .fold(1.0, f64::min)
    };
    let full = algorithms.iter().all(|&a| min_rate(a) >= 1.0);
    let all_cost = |a| mean(Box::new(of(a).map(|r| r.metrics.avg_cost_all.unwrap_or(f64::NAN))));
    let small_cost = |a| mean(Box::new(of(a).map(|r| r.metrics.avg_cost_small.unwrap_or(f64::NAN))));
    let saving = 1.0 - all_cost(Algorithm::Mpor) / all_cost(Algorithm::Mpic);
    let small_saving = 1.0 - small_cost(Algorithm::MparMporHybrid) / small_cost(Algorithm::Mpor);
    let saving_ok = (0.15..=0.45).contains(&saving);
    let small_ok = (0.0..=0.10).contains(&small_saving);
    let fast_enough = elapsed < Duration::from_secs(15 * 60);
    let rates: Vec<String> = algorithms
        .iter()
        .map(|&a| format!("{a} {:.4}", min_rate(a)))
        .collect();
    verdict(
        full && saving_ok && small_ok && fast_enough,
        format!(
            "lowest acceptance [{}] (need 1.0: {}); mpor saves {:.1}% over mpic (need 15-45%: {}); mpar saves {:.1}% over mpor on small requests (need 0-10%: {}); {:.0} s (need < 900 s: {})",
            rates.join(", "),
            ok_word(full),
            100.0 * saving,
            ok_word(saving_ok),
            100.0 * small_saving,
            ok_word(small_ok),
            elapsed.as_secs_f64(),
            ok_word(fast_enough),
        ),
    )
}

fn ok_word(ok: bool) -> &'static str {
    if ok {
        "met"
    } else {
        "missed"
    }
}

fn criterion_8() -> Verdict {
    let sn = b4_topology(300.0).unwrap();
    let mut runs = 0;
    let mut leaks = 0;
    let mut log_mismatch = 0;
    let mut rejected = 0;
    for algorithm in Algorithm::SIMULATED {
        for seed in 0..2 {
            let config = SimConfig {
                horizon: 20.0,
                algorithm,
                seed,
                ..SimConfig::default()
            };
            let out = run_simulation(&sn, &config).unwrap();
            runs += 1;
            if out.final_residual != out.initial_residual || !out.final_residual.is_untouched() {
                leaks += 1;
            }
            let m = &out.metrics;
            let count = |f: fn(&Event) -> bool| out.events.iter().filter(|e| f(e)).count();
            let consistent = count(|e| matches!(e, Event::Arrival { .. })) == m.arrivals
                && count(|e| matches!(e, Event::Accept { .. })) == m.accepted
                && count(|e| matches!(e, Event::Reject { .. })) == m.rejected
                && count(|e| matches!(e, Event::Depart { .. })) == m.accepted
                && m.acceptance_rate == Some(m.accepted as f64 / m.arrivals as f64);
            if !consistent {
                log_mismatch += 1;
            }
            rejected += m.rejected;
        }
    }
    let config = SimConfig {
        horizon: 10.0,
        record_timing: false,
        ..SimConfig::default()
    };
    let csv = || {
        let rows = sweep(
            "b4",
            &sn,
            &[200.0, 600.0],
            &Algorithm::SIMULATED,
            &[0, 1],
            &config,
        )
        .unwrap();
        let mut out = Vec::new();
        write_csv(&rows, &mut out).unwrap();
        out
    };
    let identical = csv() == csv();
    verdict(
        leaks == 0 && log_mismatch == 0 && identical,
        format!(
            "{runs} runs ({rejected} rejections), {leaks} with leftover reservations, {log_mismatch} with log mismatches; repeated CSVs {}",
            if identical { "byte-identical" } else { "differ" }
        ),
    )
}

fn criterion_9() -> Verdict {
    let mut r = rng(1009);
    let mut sound = 0;
    let mut sound_flagged = 0;
    let mut mutated = 0;
    let mut missed = 0;
    let mut attempts = 0;
    while (sound < 100 || mutated < 100) && attempts < 2000 {
        attempts += 1;
        let i = instance(&mut r);
        let algorithm = VARIANTS[attempts % VARIANTS.len()];
        let Ok(e) = embed(algorithm, &i.sn, &i.residual, &i.vnr, &EmbedOptions::default()) else {
            continue;
        };
        if sound < 100 {
            sound += 1;
            if !verify_embedding(&i.sn, &i.residual, &i.vnr, &e).ok {
                sound_flagged += 1;
            }
        }
        let used: Vec<usize> = (0..e.allocation.len())
            .filter(|&l| e.allocation[l] > 1e-3)
            .collect();
        if mutated < 100 && !used.is_empty() {
            let link = used[r.random_range(0..used.len())];
            let mut bad = e.clone();
            bad.allocation[link] *= r.random_range(0.5..0.99);
            bad.cost = vne_core::embed::cost(&bad.allocation, &i.sn).unwrap();
            mutated += 1;
            let report = verify_embedding(&i.sn, &i.residual, &i.vnr, &bad);
            if report.ok || !report.on_link(&i.sn.links()[link].name) {
                missed += 1;
            }
        }
    }
    verdict(
        sound == 100 && mutated == 100 && sound_flagged == 0 && missed == 0,
        format!(
            "{mutated} mutated embeddings, {missed} not flagged on the reduced link; {sound} unmutated outputs, {sound_flagged} flagged"
        ),
    )
}

fn main() {
    let mut results: Vec<(usize, Verdict)> = Vec::new();
    let mut report = |n: usize, v: Verdict| {
        println!(
            "criterion {n}: {} - {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        results.push((n, v));
    };
    let (one, two) = criteria_1_and_2();
    report(1, one);
    report(2, two);
    report(3, criterion_3());
    report(4, criterion_4());
    report(5, criterion_5());
    report(6, criterion_6());
    report(7, criterion_7());
    report(8, criterion_8());
    report(9, criterion_9());
    let failed: Vec<String> = results
        .iter()
        .filter(|(_, v)| !v.pass)
        .map(|(n, _)| n.to_string())
        .collect();
    if failed.is_empty() {
        println!("acceptance: all 9 criteria pass");
    } else {
        println!("acceptance: criteria {} fail", failed.join(", "));
        std::process::exit(1);
    }
}
