//! Sparse LU factorization of a simplex basis, with product-form updates.
//!
//! Columns are factored left to right in order of increasing density. Each
//! step picks, among rows whose entry is within a threshold of the column's
//! largest, the row with the fewest nonzeros in the basis.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

const THRESHOLD: f64 = 0.1;
const SINGULAR_TOL: f64 = 1e-11;

pub(super) type SparseVec = Vec<(usize, f64)>;

/// One elimination step: pivot row `row`, basis position `position`.
struct Step {
    row: usize,
    position: usize,
    diagonal: f64,
    /// Multipliers for the rows still unpivoted at this step.
    lower: SparseVec,
    /// Entries above the diagonal, by earlier step index.
    upper: SparseVec,
}

/// `x'_r = x_r / pivot`, `x'_i = x_i - column_i * x'_r`.
struct Eta {
    position: usize,
    pivot: f64,
    column: SparseVec,
}

pub(super) struct Factor {
    steps: Vec<Step>,
    etas: Vec<Eta>,
    eta_nnz: usize,
    work: Vec<f64>,
}

/// Basis positions whose columns proved dependent, each paired with the row
/// that should take a unit column instead.
pub(super) struct Deficient(pub Vec<(usize, usize)>);

impl Factor {
    /// Factors the basis whose position `p` holds `columns[p]`, entries
    /// indexed by row.
    pub(super) fn new(m: usize, columns: &[&[(usize, f64)]]) -> Result<Factor, Deficient> {
        let mut row_count = vec![0usize; m];
        for col in columns {
            for &(i, _) in col.iter() {
                row_count[i] += 1;
            }
        }
        let mut order: Vec<usize> = (0..columns.len()).collect();
        order.sort_by_key(|&p| columns[p].len());

        let mut step_of_row = vec![usize::MAX; m];
        let mut steps: Vec<Step> = Vec::with_capacity(m);
        let mut w = vec![0.0; m];
        let mut mark = vec![false; m];
        let mut touched: Vec<usize> = Vec::new();
        // Earlier steps whose pivot row is nonzero, applied in step order.
        let mut pending: BinaryHeap<Reverse<usize>> = BinaryHeap::new();
        let mut queued = vec![false; m];
        let mut failed = Vec::new();
        for &p in &order {
            for &(i, a) in columns[p] {
                if !mark[i] {
                    mark[i] = true;
                    touched.push(i);
                }
                w[i] += a;
                let s = step_of_row[i];
                if s != usize::MAX && !queued[s] {
                    queued[s] = true;
                    pending.push(Reverse(s));
                }
            }
            while let Some(Reverse(s)) = pending.pop() {
                queued[s] = false;
                let step = &steps[s];
                let v = w[step.row];
                if v == 0.0 {
                    continue;
                }
                for &(i, l) in &step.lower {
                    if !mark[i] {
                        mark[i] = true;
                        touched.push(i);
                    }
                    w[i] -= l * v;
                    let t = step_of_row[i];
                    if t != usize::MAX && !queued[t] {
                        queued[t] = true;
                        pending.push(Reverse(t));
                    }
                }
            }
            let mut largest = 0.0f64;
            for &i in &touched {
                if step_of_row[i] == usize::MAX {
                    largest = largest.max(w[i].abs());
                }
            }
            if largest < SINGULAR_TOL {
                failed.push(p);
            } else {
                let pivot_row = touched
                    .iter()
                    .copied()
                    .filter(|&i| step_of_row[i] == usize::MAX && w[i].abs() >= THRESHOLD * largest)
                    .min_by_key(|&i| (row_count[i], i))
                    .expect("largest entry qualifies");
                let diagonal = w[pivot_row];
                let mut lower = Vec::new();
                let mut upper = Vec::new();
                for &i in &touched {
                    let v = w[i];
                    if v == 0.0 || i == pivot_row {
                        continue;
                    }
                    match step_of_row[i] {
                        usize::MAX => lower.push((i, v / diagonal)),
                        s => upper.push((s, v)),
                    }
                }
                step_of_row[pivot_row] = steps.len();
                steps.push(Step {
                    row: pivot_row,
                    position: p,
                    diagonal,
                    lower,
                    upper,
                });
            }
            for &i in &touched {
                w[i] = 0.0;
                mark[i] = false;
            }
            touched.clear();
        }
        if !failed.is_empty() {
            let free = (0..m).filter(|&i| step_of_row[i] == usize::MAX);
            return Err(Deficient(failed.into_iter().zip(free).collect()));
        }
        Ok(Factor {
            steps,
            etas: Vec::new(),
            eta_nnz: 0,
            work: vec![0.0; m],
        })
    }

    pub(super) fn updates(&self) -> usize {
        self.etas.len()
    }

    pub(super) fn update_nnz(&self) -> usize {
        self.eta_nnz
    }

    /// Solves `B x = a` in place: `x` comes in indexed by row and leaves
    /// indexed by basis position.
    pub(super) fn ftran(&mut self, x: &mut [f64]) {
        for step in &self.steps {
            let v = x[step.row];
            if v == 0.0 {
                continue;
            }
            for &(i, l) in &step.lower {
                x[i] -= l * v;
            }
        }
        let y = &mut self.work;
        for (k, step) in self.steps.iter().enumerate() {
            y[k] = x[step.row];
        }
        for k in (0..self.steps.len()).rev() {
            let step = &self.steps[k];
            let z = y[k] / step.diagonal;
            y[k] = z;
            if z == 0.0 {
                continue;
            }
            for &(s, u) in &step.upper {
                y[s] -= u * z;
            }
        }
        for (k, step) in self.steps.iter().enumerate() {
            x[step.position] = y[k];
        }
        for eta in &self.etas {
            let r = x[eta.position];
            if r == 0.0 {
                continue;
            }
            let r = r / eta.pivot;
            x[eta.position] = r;
            for &(i, a) in &eta.column {
                x[i] -= a * r;
            }
        }
    }

    /// Solves `B' y = c` in place: `y` comes in indexed by basis position and
    /// leaves indexed by row.
    pub(super) fn btran(&mut self, y: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            let mut v = y[eta.position];
            for &(i, a) in &eta.column {
                v -= a * y[i];
            }
            y[eta.position] = v / eta.pivot;
        }
        let z = &mut self.work;
        for (k, step) in self.steps.iter().enumerate() {
            let mut v = y[step.position];
            for &(s, u) in &step.upper {
                v -= u * z[s];
            }
            z[k] = v / step.diagonal;
        }
        for (k, step) in self.steps.iter().enumerate() {
            y[step.row] = z[k];
        }
        for step in self.steps.iter().rev() {
            let mut v = y[step.row];
            for &(i, l) in &step.lower {
                v -= l * y[i];
            }
            y[step.row] = v;
        }
    }

    /// Records that position `r` now holds the column whose solved form is
    /// `alpha` (indexed by basis position).
    pub(super) fn update(&mut self, r: usize, alpha: &[f64]) {
        let column: SparseVec = alpha
            .iter()
            .enumerate()
            .filter(|&(i, &a)| i != r && a != 0.0)
            .map(|(i, &a)| (i, a))
            .collect();
        self.eta_nnz += column.len() + 1;
        self.etas.push(Eta {
            position: r,
            pivot: alpha[r],
            column,
        });
    }
}
