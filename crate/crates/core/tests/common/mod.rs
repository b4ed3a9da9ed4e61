//! Shared oracles and instance builders for the integration suites.
#![allow(dead_code)]

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vne_core::topology::{generate_random_topology, NodeId, SubstrateNetwork};
use vne_core::vnr::{DemandVector, Vnr};

pub type Q = Ratio<i128>;

/// A polytope `{d : A d <= b, d >= 0}` with small integer data, so the
/// vertices are exact rationals.
#[derive(Debug, Clone)]
pub struct IntPolytope {
    pub matrix: Vec<Vec<i64>>,
    pub bounds: Vec<i64>,
}

impl IntPolytope {
    pub fn random(rng: &mut impl Rng, max_pairs: usize, max_rows: usize) -> IntPolytope {
        let n = rng.random_range(1..=max_pairs);
        loop {
            let m = rng.random_range(1..=max_rows);
            let matrix: Vec<Vec<i64>> = (0..m)
                .map(|_| {
                    (0..n)
                        .map(|_| if rng.random_bool(0.35) { 0 } else { rng.random_range(1..=4) })
                        .collect()
                })
                .collect();
            if (0..n).all(|j| matrix.iter().any(|r| r[j] > 0)) {
                let bounds = (0..m).map(|_| rng.random_range(1..=20)).collect();
                return IntPolytope { matrix, bounds };
            }
        }
    }

    pub fn n(&self) -> usize {
        self.matrix[0].len()
    }

    pub fn vnr(&self) -> Vnr {
        let pairs = (0..self.n()).map(|i| (format!("s{i}"), format!("t{i}"))).collect();
        let matrix = self
            .matrix
            .iter()
            .map(|r| r.iter().map(|&a| a as f64).collect())
            .collect();
        let bounds = self.bounds.iter().map(|&b| b as f64).collect();
        Vnr::new(pairs, matrix, bounds).unwrap()
    }

    /// Exact vertex set: every N-subset of the hyperplanes with a unique
    /// feasible intersection, deduplicated.
    pub fn exact_vertices(&self) -> Vec<Vec<Q>> {
        let n = self.n();
        let mut planes: Vec<(Vec<Q>, Q)> = self
            .matrix
            .iter()
            .zip(&self.bounds)
            .map(|(r, &b)| (r.iter().map(|&a| Q::from(a as i128)).collect(), Q::from(b as i128)))
            .collect();
        for j in 0..n {
            let mut e = vec![Q::from(0); n];
            e[j] = Q::from(1);
            planes.push((e, Q::from(0)));
        }
        let mut out: Vec<Vec<Q>> = Vec::new();
        for subset in subsets(planes.len(), n) {
            let a = subset.iter().map(|&i| planes[i].0.clone()).collect();
            let b = subset.iter().map(|&i| planes[i].1).collect();
            let Some(x) = solve_exact(a, b) else { continue };
            if self.contains(&x) && !out.contains(&x) {
                out.push(x);
            }
        }
        out
    }

    fn contains(&self, x: &[Q]) -> bool {
        let zero = Q::from(0);
        x.iter().all(|v| *v >= zero)
            && self.matrix.iter().zip(&self.bounds).all(|(r, &b)| {
                let lhs: Q = r.iter().zip(x).map(|(&a, v)| Q::from(a as i128) * v).sum();
                lhs <= Q::from(b as i128)
            })
    }
}

pub fn to_f64(q: &Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// True when the two lists hold the same points, matched one to one within
/// `tol` per coordinate.
pub fn same_vertex_set(found: &[DemandVector], exact: &[Vec<Q>], tol: f64) -> bool {
    if found.len() != exact.len() {
        return false;
    }
    let mut used = vec![false; found.len()];
    exact.iter().all(|x| {
        let hit = found.iter().enumerate().position(|(i, v)| {
            !used[i]
                && v.0.len() == x.len()
                && v.0.iter().zip(x).all(|(a, b)| (a - to_f64(b)).abs() <= tol * (1.0 + a.abs()))
        });
        match hit {
            Some(i) => {
                used[i] = true;
                true
            }
            None => false,
        }
    })
}

pub fn subsets(total: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if total < k {
        return Vec::new();
    }
    let mut out = subsets(total - 1, k);
    for mut s in subsets(total - 1, k - 1) {
        s.push(total - 1);
        out.push(s);
    }
    out
}

/// Gauss-Jordan over the rationals; `None` when singular.
pub fn solve_exact(mut a: Vec<Vec<Q>>, mut b: Vec<Q>) -> Option<Vec<Q>> {
    let n = b.len();
    let zero = Q::from(0);
    for col in 0..n {
        let p = (col..n).find(|&r| a[r][col] != zero)?;
        a.swap(col, p);
        b.swap(col, p);
        let d = a[col][col];
        for r in 0..n {
            if r != col && a[r][col] != zero {
                let f = a[r][col] / d;
                for c in col..n {
                    let v = a[col][c];
                    a[r][c] -= f * v;
                }
                let v = b[col];
                b[r] -= f * v;
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// A connected random substrate with at most `max_nodes` nodes.
pub fn connected_substrate(rng: &mut ChaCha8Rng, max_nodes: usize, bandwidth: f64) -> SubstrateNetwork {
    loop {
        let n = rng.random_range(6..=max_nodes);
        let sn = generate_random_topology(n, 100.0, 0.25, bandwidth, rng.random()).unwrap();
        if (1..n).all(|i| sn.connected(NodeId(0), NodeId(i))) {
            return sn;
        }
    }
}

/// A request on `sn` with `1..=max_pairs` distinct pairs, random individual
/// bounds and a few joint rows over random subsets.
pub fn random_request(rng: &mut ChaCha8Rng, sn: &SubstrateNetwork, max_pairs: usize) -> Vnr {
    let names: Vec<&str> = sn.nodes().iter().map(|n| n.name.as_str()).collect();
    let n = rng.random_range(1..=max_pairs);
    let mut pairs: Vec<(String, String)> = Vec::new();
    while pairs.len() < n {
        let s = rng.random_range(0..names.len());
        let t = rng.random_range(0..names.len());
        let pair = (names[s].to_string(), names[t].to_string());
        if s != t && !pairs.contains(&pair) {
            pairs.push(pair);
        }
    }
    let individual: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..20.0)).collect();
    let mut matrix: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut bounds = individual.clone();
    if n >= 2 {
        for _ in 0..rng.random_range(1..=n) {
            let members: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.6)).collect();
            if members.len() < 2 {
                continue;
            }
            let sum: f64 = members.iter().map(|&i| individual[i]).sum();
            matrix.push((0..n).map(|j| if members.contains(&j) { 1.0 } else { 0.0 }).collect());
            bounds.push(sum * rng.random_range(0.4..0.95));
        }
    }
    Vnr::new(pairs, matrix, bounds).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
