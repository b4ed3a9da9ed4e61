//! Queries against the demand polytope `{d : A d <= b, d >= 0}`.

use super::{DemandVector, Vnr, VnrError};
use crate::lp::{solve_lp, LpOutcome};

/// Default cap on the number of pairs accepted by vertex enumeration.
pub const DEFAULT_VERTEX_LIMIT: usize = 12;

/// Coordinate tolerance for merging vertices and testing dominance.
pub const VERTEX_TOL: f64 = 1e-9;

fn maximize(vnr: &Vnr, weights: &[f64]) -> Result<(f64, DemandVector), VnrError> {
    match solve_lp(&vnr.demand_program(weights))? {
        LpOutcome::Optimal {
            objective_value,
            solution,
        } => Ok((objective_value.max(0.0), DemandVector(solution))),
        LpOutcome::Unbounded => Err(VnrError::Solver("unbounded")),
        LpOutcome::Infeasible => Err(VnrError::Solver("infeasible")),
    }
}

/// Largest admissible demand of each pair, one LP per pair.
pub fn d_max(vnr: &Vnr) -> Result<DemandVector, VnrError> {
    let n = vnr.n_pairs();
    (0..n)
        .map(|i| {
            let mut w = vec![0.0; n];
            w[i] = 1.0;
            maximize(vnr, &w).map(|(v, _)| v)
        })
        .collect::<Result<Vec<_>, _>>()
        .map(DemandVector)
}

/// `max w'd` over the demand polytope: the largest load a link carrying
/// fraction `w[n]` of pair `n`'s traffic can see.
pub fn worst_case_load(vnr: &Vnr, weights: &[f64]) -> Result<f64, VnrError> {
    worst_case_demand(vnr, weights).map(|(v, _)| v)
}

/// [`worst_case_load`] together with a demand vector attaining it.
pub fn worst_case_demand(vnr: &Vnr, weights: &[f64]) -> Result<(f64, DemandVector), VnrError> {
    if weights.len() != vnr.n_pairs() {
        return Err(VnrError::WeightLength {
            got: weights.len(),
            expected: vnr.n_pairs(),
        });
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(VnrError::BadWeights);
    }
    if weights.iter().all(|&w| w == 0.0) {
        return Ok((0.0, DemandVector(vec![0.0; weights.len()])));
    }
    maximize(vnr, weights)
}

pub fn enumerate_vertices(vnr: &Vnr) -> Result<Vec<DemandVector>, VnrError> {
    enumerate_vertices_with_limit(vnr, DEFAULT_VERTEX_LIMIT)
}

/// Every vertex of the demand polytope.
///
/// Tries each `N`-subset of the `M + N` bounding hyperplanes (the rows of `A`
/// and the coordinate planes), solves for their intersection and keeps the
/// feasible, distinct points. The cost grows as `C(M + N, N)`.
pub fn enumerate_vertices_with_limit(
    vnr: &Vnr,
    limit: usize,
) -> Result<Vec<DemandVector>, VnrError> {
    let n = vnr.n_pairs();
    if n > limit {
        return Err(VnrError::DimensionTooLarge { n, limit });
    }
    let m = vnr.n_rows();
    let total = m + n;
    let mut vertices: Vec<DemandVector> = Vec::new();
    let mut subset: Vec<usize> = (0..n).collect();
    let mut system = vec![0.0; n * (n + 1)];
    loop {
        // Hyperplane k < m is row k of A at its bound; k >= m is d[k - m] = 0.
        for (r, &k) in subset.iter().enumerate() {
            let row = &mut system[r * (n + 1)..(r + 1) * (n + 1)];
            if k < m {
                row[..n].copy_from_slice(&vnr.matrix()[k]);
                row[n] = vnr.bounds()[k];
            } else {
                row.iter_mut().for_each(|v| *v = 0.0);
                row[k - m] = 1.0;
            }
        }
        if let Some(mut point) = solve_square(&mut system, n) {
            for x in &mut point {
                if x.abs() <= VERTEX_TOL {
                    *x = 0.0;
                }
            }
            let point = DemandVector(point);
            if vnr.contains(&point, VERTEX_TOL)
                && !vertices.iter().any(|v| v.approx_eq(&point, VERTEX_TOL))
            {
                vertices.push(point);
            }
        }
        if !next_combination(&mut subset, total) {
            break;
        }
    }
    Ok(vertices)
}

/// Advances `subset` to the next k-combination of `0..total` in
/// lexicographic order; false once exhausted.
fn next_combination(subset: &mut [usize], total: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < total - k + i {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Gaussian elimination with partial pivoting on an `n x (n + 1)` augmented
/// system. `None` when the system is singular.
fn solve_square(system: &mut [f64], n: usize) -> Option<Vec<f64>> {
    let w = n + 1;
    for col in 0..n {
        let pivot = (col..n).max_by(|&a, &b| {
            system[a * w + col]
                .abs()
                .total_cmp(&system[b * w + col].abs())
        })?;
        let scale = system[pivot * w..pivot * w + n]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        if system[pivot * w + col].abs() <= 1e-12 * scale.max(1.0) {
            return None;
        }
        if pivot != col {
            for j in 0..w {
                system.swap(pivot * w + j, col * w + j);
            }
        }
        let p = system[col * w + col];
        for r in col + 1..n {
            let f = system[r * w + col] / p;
            if f != 0.0 {
                for j in col..w {
                    system[r * w + j] -= f * system[col * w + j];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = system[r * w + n];
        for j in r + 1..n {
            acc -= system[r * w + j] * x[j];
        }
        x[r] = acc / system[r * w + r];
    }
    Some(x)
}

/// Vertices not dominated coordinate-wise by another distinct vertex.
/// Near-duplicates are merged first, keeping the earliest.
pub fn dominant_vertices(vertices: &[DemandVector]) -> Vec<DemandVector> {
    let mut unique: Vec<&DemandVector> = Vec::with_capacity(vertices.len());
    for v in vertices {
        if !unique.iter().any(|u| u.approx_eq(v, VERTEX_TOL)) {
            unique.push(v);
        }
    }
    let dominated = |v: &DemandVector, w: &DemandVector| {
        w.iter()
            .zip(v.iter())
            .all(|(a, b)| *a >= b - VERTEX_TOL * (1.0 + b.abs()))
    };
    unique
        .iter()
        .enumerate()
        .filter(|(i, v)| {
            !unique
                .iter()
                .enumerate()
                .any(|(j, w)| j != *i && dominated(v, w))
        })
        .map(|(_, v)| (*v).clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vnr::motivating_example;

    fn sorted(mut v: Vec<DemandVector>) -> Vec<Vec<f64>> {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.into_iter().map(|d| d.0).collect()
    }

    #[test]
    fn d_max_of_motivating_example() {
        let d = d_max(&motivating_example()).unwrap();
        assert!((d[0] - 150.0).abs() < 1e-9 && (d[1] - 150.0).abs() < 1e-9);
    }

    #[test]
    fn d_max_of_independent_bounds() {
        let v = Vnr::independent(
            vec![("a".into(), "b".into()), ("b".into(), "c".into())],
            vec![7.0, 3.0],
        )
        .unwrap();
        let d = d_max(&v).unwrap();
        assert!((d[0] - 7.0).abs() < 1e-12 && (d[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn worst_case_loads() {
        let v = motivating_example();
        assert!((worst_case_load(&v, &[1.0, 1.0]).unwrap() - 200.0).abs() < 1e-9);
        assert!((worst_case_load(&v, &[1.0, 0.0]).unwrap() - 150.0).abs() < 1e-9);
        assert_eq!(worst_case_load(&v, &[0.0, 0.0]).unwrap(), 0.0);
        assert!(worst_case_load(&v, &[1.0]).is_err());
        assert!(worst_case_load(&v, &[-1.0, 0.0]).is_err());
        let (load, d) = worst_case_demand(&v, &[2.0, 1.0]).unwrap();
        assert!((load - 350.0).abs() < 1e-9);
        assert!(d.approx_eq(&DemandVector(vec![150.0, 50.0]), 1e-9));
    }

    #[test]
    fn vertices_of_motivating_example() {
        let got = sorted(enumerate_vertices(&motivating_example()).unwrap());
        assert_eq!(
            got,
            vec![
                vec![0.0, 0.0],
                vec![0.0, 150.0],
                vec![50.0, 150.0],
                vec![150.0, 0.0],
                vec![150.0, 50.0],
            ]
        );
    }

    #[test]
    fn vertices_of_unit_square_and_interval() {
        let square = Vnr::independent(
            vec![("a".into(), "b".into()), ("c".into(), "d".into())],
            vec![1.0, 1.0],
        )
        .unwrap();
        assert_eq!(
            sorted(enumerate_vertices(&square).unwrap()),
            vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]
        );
        let interval = Vnr::new(vec![("a".into(), "b".into())], vec![vec![1.0]], vec![5.0]).unwrap();
        assert_eq!(
            sorted(enumerate_vertices(&interval).unwrap()),
            vec![vec![0.0], vec![5.0]]
        );
    }

    #[test]
    fn vertex_limit_enforced() {
        let v = motivating_example();
        assert!(matches!(
            enumerate_vertices_with_limit(&v, 1),
            Err(VnrError::DimensionTooLarge { n: 2, limit: 1 })
        ));
    }

    #[test]
    fn dominance_filtering() {
        let all = enumerate_vertices(&motivating_example()).unwrap();
        assert_eq!(
            sorted(dominant_vertices(&all)),
            vec![vec![50.0, 150.0], vec![150.0, 50.0]]
        );
        let one = vec![DemandVector(vec![3.0, 4.0])];
        assert_eq!(dominant_vertices(&one), one);
        let dups = vec![
            DemandVector(vec![1.0, 1.0]),
            DemandVector(vec![1.0 + 1e-12, 1.0]),
            DemandVector(vec![1.0, 1.0 - 1e-12]),
        ];
        assert_eq!(dominant_vertices(&dups), vec![DemandVector(vec![1.0, 1.0])]);
    }

    #[test]
    fn combinations_are_exhaustive() {
        let mut s = vec![0, 1];
        let mut count = 1;
        while next_combination(&mut s, 5) {
            count += 1;
        }
        assert_eq!(count, 10);
    }
}
