//! Two-phase revised simplex over a sparse LU factorization of the basis.
//!
//! Variables are shifted or split into nonnegative columns. Rows are
//! normalized to a nonnegative right-hand side; `<=` rows start with their
//! slack basic and the rest get an artificial column. Phase 1
//! minimizes the sum of artificials; an artificial that leaves the basis is
//! barred from entering again. Artificials still basic after phase 1 sit at
//! zero on redundant rows and block any step that would move them.

use super::factor::{Deficient, Factor, SparseVec};
use super::{Constraint, LinearProgram, LpError, LpOutcome, Relation, Sense, FEASIBILITY_TOL};

const PIVOT_TOL: f64 = 1e-7;
const COST_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-12;
const HARRIS_TOL: f64 = 1e-9;
/// Reduced costs this small on a column with no usable pivot are noise.
const NOISE_COST: f64 = 1e-7;
/// Basic values above minus this count as feasible in the dual simplex.
const PRIMAL_TOL: f64 = 1e-9;
/// Product-form updates kept before the basis is factored afresh.
const REFACTOR_EVERY: usize = 100;
/// Relative cost perturbation used by the dual simplex.
const PERTURBATION: f64 = 1e-6;
const MIN_WEIGHT: f64 = 1e-8;
const FINAL_CHECKS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    /// Bland's rule for every pivot: lowest-index improving column, ties in
    /// the ratio test broken by lowest basic index.
    Bland,
    /// Most negative reduced cost, switching to Bland's rule once
    /// `degenerate_limit` consecutive degenerate pivots have occurred and
    /// staying there until the objective moves again.
    DantzigThenBland { degenerate_limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimplexOptions {
    pub pivot_rule: PivotRule,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            pivot_rule: PivotRule::DantzigThenBland {
                degenerate_limit: 25,
            },
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = offset + col`
    Shift { col: usize, offset: f64 },
    /// `x = offset - col`
    Mirror { col: usize, offset: f64 },
    /// `x = pos - neg`
    Split { pos: usize, neg: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Structural,
    Slack,
    Artificial,
}

enum RunEnd {
    Optimal,
    Unbounded,
}

const NONBASIC: usize = usize::MAX;

struct Engine {
    b: Vec<f64>,
    columns: Vec<SparseVec>,
    /// The same matrix by row.
    by_row: Vec<SparseVec>,
    kind: Vec<Kind>,
    cost: Vec<f64>,
    barred: Vec<bool>,
    /// Column to fall back on when a row loses its pivot.
    unit_of_row: Vec<usize>,
    basis: Vec<usize>,
    position: Vec<usize>,
    /// Basic values by position.
    x: Vec<f64>,
    factor: Factor,
    phase_one: bool,
    /// Dual steepest-edge weights by position.
    weights: Vec<f64>,
}

impl Engine {
    fn rows(&self) -> usize {
        self.b.len()
    }

    /// Row `rho^T A` over every column, visiting only rows where `rho` is nonzero.
    fn pivot_row(&self, rho: &[f64]) -> Vec<f64> {
        let mut row = vec![0.0; self.columns.len()];
        for (i, &r) in rho.iter().enumerate() {
            if r == 0.0 {
                continue;
            }
            for &(j, a) in &self.by_row[i] {
                row[j] += r * a;
            }
        }
        row
    }

    fn cost_of(&self, j: usize) -> f64 {
        if self.phase_one {
            if self.kind[j] == Kind::Artificial {
                1.0
            } else {
                0.0
            }
        } else {
            self.cost[j]
        }
    }

    /// Factors the basis afresh and recomputes the basic values from the
    /// original right-hand side.
    fn refactor(&mut self) {
        let m = self.rows();
        loop {
            let cols: Vec<&[(usize, f64)]> =
                self.basis.iter().map(|&j| self.columns[j].as_slice()).collect();
            match Factor::new(m, &cols) {
                Ok(f) => {
                    self.factor = f;
                    break;
                }
                Err(Deficient(swaps)) => {
                    for (p, row) in swaps {
                        let out = self.basis[p];
                        let unit = self.unit_of_row[row];
                        self.position[out] = NONBASIC;
                        if self.kind[out] == Kind::Artificial {
                            self.barred[out] = true;
                        }
                        self.basis[p] = unit;
                        self.position[unit] = p;
                        self.weights[p] = 1.0;
                        self.barred[unit] = false;
                    }
                }
            }
        }
        let mut x = self.b.clone();
        self.factor.ftran(&mut x);
        self.x = x;
    }

    fn due_for_refactor(&self) -> bool {
        self.factor.updates() >= REFACTOR_EVERY
            || self.factor.update_nnz() > 20 * self.rows() + 1000
    }

    /// Simplex multipliers, indexed by row.
    fn prices(&mut self) -> Vec<f64> {
        let mut y: Vec<f64> = self.basis.iter().map(|&j| self.cost_of(j)).collect();
        self.factor.btran(&mut y);
        y
    }

    fn reduced(&self, j: usize, y: &[f64]) -> f64 {
        let mut d = self.cost_of(j);
        for &(i, a) in &self.columns[j] {
            d -= y[i] * a;
        }
        d
    }

    fn eligible(&self, j: usize) -> bool {
        self.position[j] == NONBASIC && !self.barred[j]
    }

    /// Solved form of column `j`, by basis position.
    fn solved_column(&mut self, j: usize) -> Vec<f64> {
        let mut alpha = vec![0.0; self.rows()];
        for &(i, a) in &self.columns[j] {
            alpha[i] += a;
        }
        self.factor.ftran(&mut alpha);
        alpha
    }

    /// A basic artificial outside phase 1 must stay at zero, so it blocks
    /// movement in either direction.
    fn pinned(&self, p: usize) -> bool {
        !self.phase_one && self.kind[self.basis[p]] == Kind::Artificial
    }

    fn leaving(&self, alpha: &[f64], bland: bool) -> Option<usize> {
        let blocking = |p: usize| {
            let a = alpha[p];
            if a > PIVOT_TOL {
                Some((self.x[p].max(0.0), a))
            } else if a < -PIVOT_TOL && self.pinned(p) {
                Some((0.0, -a))
            } else {
                None
            }
        };
        if bland {
            let mut min_ratio = f64::INFINITY;
            for p in 0..alpha.len() {
                if let Some((v, a)) = blocking(p) {
                    min_ratio = min_ratio.min(v / a);
                }
            }
            if min_ratio == f64::INFINITY {
                return None;
            }
            let tie = 1e-12 * (1.0 + min_ratio);
            let tied: Vec<(usize, f64)> = (0..alpha.len())
                .filter_map(|p| blocking(p).map(|(v, a)| (p, v, a)))
                .filter(|&(_, v, a)| v / a <= min_ratio + tie)
                .map(|(p, _, a)| (p, a))
                .collect();
            // Among tied rows, pivots far smaller than the largest are skipped.
            let largest = tied.iter().map(|t| t.1).fold(0.0, f64::max);
            return tied
                .into_iter()
                .filter(|&(_, a)| a >= 1e-2 * largest)
                .min_by_key(|&(p, _)| self.basis[p])
                .map(|(p, _)| p);
        }
        // Harris two-pass test: the bound is relaxed by a small tolerance,
        // then the largest pivot within the relaxed bound wins.
        let mut bound = f64::INFINITY;
        for p in 0..alpha.len() {
            if let Some((v, a)) = blocking(p) {
                bound = bound.min((v + HARRIS_TOL) / a);
            }
        }
        let mut best: Option<(usize, f64)> = None;
        for p in 0..alpha.len() {
            if let Some((v, a)) = blocking(p) {
                if v / a <= bound && best.is_none_or(|(_, b)| a > b) {
                    best = Some((p, a));
                }
            }
        }
        best.map(|(p, _)| p)
    }

    /// Moves column `q` into position `r` with step `theta`.
    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64], theta: f64) {
        if theta != 0.0 {
            for (v, &a) in self.x.iter_mut().zip(alpha) {
                *v -= theta * a;
            }
        }
        self.x[r] = theta;
        let out = self.basis[r];
        self.position[out] = NONBASIC;
        if self.kind[out] == Kind::Artificial {
            self.barred[out] = true;
        }
        self.basis[r] = q;
        self.position[q] = r;
        self.factor.update(r, alpha);
    }

    fn primal(&mut self, rule: PivotRule) -> RunEnd {
        let n = self.columns.len();
        let mut skip = vec![false; n];
        let mut fresh = true;
        let mut checks = 0usize;
        let mut degenerate_streak = 0usize;
        loop {
            if self.due_for_refactor() {
                self.refactor();
                fresh = true;
            }
            let bland = match rule {
                PivotRule::Bland => true,
                PivotRule::DantzigThenBland { degenerate_limit } => {
                    degenerate_streak >= degenerate_limit
                }
            };
            let y = self.prices();
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..n {
                if !self.eligible(j) || skip[j] {
                    continue;
                }
                let d = self.reduced(j, &y);
                if d < -COST_TOL && entering.is_none_or(|(_, best)| d < best) {
                    entering = Some((j, d));
                    if bland {
                        break;
                    }
                }
            }
            let Some((q, dq)) = entering else {
                // Confirm optimality against a fresh factorization.
                if !fresh && checks < FINAL_CHECKS {
                    self.refactor();
                    fresh = true;
                    checks += 1;
                    continue;
                }
                return RunEnd::Optimal;
            };
            let alpha = self.solved_column(q);
            let Some(r) = self.leaving(&alpha, bland) else {
                // Rule out a ray made of rounding noise before reporting it.
                if !fresh {
                    self.refactor();
                    fresh = true;
                    continue;
                }
                if dq > -NOISE_COST {
                    skip[q] = true;
                    continue;
                }
                return RunEnd::Unbounded;
            };
            let theta = if self.pinned(r) {
                0.0
            } else {
                self.x[r].max(0.0) / alpha[r]
            };
            if theta * dq.abs() <= DROP_TOL {
                degenerate_streak += 1;
            } else {
                degenerate_streak = 0;
            }
            self.pivot(r, q, &alpha, theta);
            skip.iter_mut().for_each(|s| *s = false);
            fresh = false;
        }
    }

    /// Dual simplex pivots until every basic value is nonnegative, keeping
    /// reduced costs nonnegative. Returns false when the rows are infeasible.
    /// Follows the primal pivot rule: degenerate streaks switch to the
    /// lowest-index choices on both sides.
    fn dual(&mut self, rule: PivotRule) -> bool {
        let m = self.rows();
        let mut fresh = true;
        let mut degenerate_streak = 0usize;
        loop {
            if self.due_for_refactor() {
                self.refactor();
                fresh = true;
            }
            let bland = match rule {
                PivotRule::Bland => true,
                PivotRule::DantzigThenBland { degenerate_limit } => {
                    degenerate_streak >= degenerate_limit
                }
            };
            let mut leave: Option<usize> = None;
            for p in 0..m {
                if self.x[p] >= -PRIMAL_TOL || self.pinned(p) {
                    continue;
                }
                let score = |p: usize| self.x[p] * self.x[p] / self.weights[p];
                leave = match leave {
                    None => Some(p),
                    Some(o) if bland && self.basis[p] < self.basis[o] => Some(p),
                    Some(o) if !bland && score(p) > score(o) => Some(p),
                    keep => keep,
                };
            }
            let Some(r) = leave else {
                if !fresh {
                    self.refactor();
                    fresh = true;
                    continue;
                }
                return true;
            };
            let mut rho = vec![0.0; m];
            rho[r] = 1.0;
            self.factor.btran(&mut rho);
            let y = self.prices();
            let pivot_row = self.pivot_row(&rho);
            let mut candidates: Vec<(usize, f64, f64)> = Vec::new();
            for (j, &a) in pivot_row.iter().enumerate() {
                if a < -PIVOT_TOL && self.eligible(j) {
                    candidates.push((j, -a, self.reduced(j, &y).max(0.0)));
                }
            }
            let best = if bland {
                let min_ratio = candidates
                    .iter()
                    .map(|&(_, a, d)| d / a)
                    .fold(f64::INFINITY, f64::min);
                let tie = 1e-12 * (1.0 + min_ratio);
                let tied: Vec<(usize, f64)> = candidates
                    .iter()
                    .filter(|&&(_, a, d)| d / a <= min_ratio + tie)
                    .map(|&(j, a, _)| (j, a))
                    .collect();
                let largest = tied.iter().map(|t| t.1).fold(0.0, f64::max);
                tied.into_iter()
                    .filter(|&(_, a)| a >= 1e-2 * largest)
                    .min_by_key(|&(j, _)| j)
            } else {
                let bound = candidates
                    .iter()
                    .map(|&(_, a, d)| (d + COST_TOL) / a)
                    .fold(f64::INFINITY, f64::min);
                candidates
                    .iter()
                    .filter(|&&(_, a, d)| d / a <= bound)
                    .max_by(|x, y| x.1.total_cmp(&y.1))
                    .map(|&(j, a, _)| (j, a))
            };
            let Some((q, a_rq)) = best else {
                if !fresh {
                    self.refactor();
                    fresh = true;
                    continue;
                }
                return false;
            };
            let d_q = candidates.iter().find(|c| c.0 == q).map_or(0.0, |c| c.2);
            let alpha = self.solved_column(q);
            if alpha[r] > -PIVOT_TOL {
                // The row and column views disagree; start from a clean factor.
                if fresh {
                    return false;
                }
                self.refactor();
                fresh = true;
                continue;
            }
            if d_q / a_rq <= DROP_TOL {
                degenerate_streak += 1;
            } else {
                degenerate_streak = 0;
            }
            // Steepest-edge weights: exact for the leaving row, updated for
            // the others.
            let w_r: f64 = rho.iter().map(|v| v * v).sum();
            let mut tau = rho;
            self.factor.ftran(&mut tau);
            let a_r = alpha[r];
            for (p, w) in self.weights.iter_mut().enumerate() {
                if p == r || alpha[p] == 0.0 {
                    continue;
                }
                let ratio = alpha[p] / a_r;
                *w = (*w - 2.0 * ratio * tau[p] + ratio * ratio * w_r).max(MIN_WEIGHT);
            }
            self.weights[r] = (w_r / (a_r * a_r)).max(MIN_WEIGHT);
            let theta = self.x[r] / alpha[r];
            self.pivot(r, q, &alpha, theta);
            fresh = false;
        }
    }

    /// Raises the cost of every nonbasic column by a small, column-specific
    /// amount. Returns the original costs.
    fn perturb_costs(&mut self) -> Vec<f64> {
        let original = self.cost.clone();
        for j in 0..self.cost.len() {
            if self.position[j] == NONBASIC {
                // Deterministic spread in [1, 2) from a multiplicative hash.
                let spread = 1.0 + (j as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) as f64 / u64::MAX as f64;
                self.cost[j] += PERTURBATION * spread * (1.0 + self.cost[j].abs());
            }
        }
        original
    }

    /// Pivots basic artificials out after phase 1 where some other column
    /// can take their row.
    fn expel_artificials(&mut self) {
        let m = self.rows();
        for r in 0..m {
            if self.kind[self.basis[r]] != Kind::Artificial {
                continue;
            }
            let mut rho = vec![0.0; m];
            rho[r] = 1.0;
            self.factor.btran(&mut rho);
            let mut best: Option<(usize, f64)> = None;
            for (j, &a) in self.pivot_row(&rho).iter().enumerate() {
                if !self.eligible(j) || self.kind[j] == Kind::Artificial {
                    continue;
                }
                if a.abs() > PIVOT_TOL && best.is_none_or(|(_, b)| a.abs() > b) {
                    best = Some((j, a.abs()));
                }
            }
            if let Some((q, _)) = best {
                let alpha = self.solved_column(q);
                let theta = self.x[r] / alpha[r];
                self.pivot(r, q, &alpha, theta);
                if self.due_for_refactor() {
                    self.refactor();
                }
            }
        }
        for j in 0..self.columns.len() {
            if self.kind[j] == Kind::Artificial && self.position[j] == NONBASIC {
                self.barred[j] = true;
            }
        }
    }

    /// Appends `<=` rows, each with a new basic slack.
    fn append_rows(&mut self, rows: Vec<Row>) {
        for row in rows {
            let i = self.b.len();
            self.b.push(row.rhs);
            let mut entries = row.terms.clone();
            for (j, a) in row.terms {
                self.columns[j].push((i, a));
            }
            let slack = self.columns.len();
            self.columns.push(vec![(i, 1.0)]);
            entries.push((slack, 1.0));
            self.by_row.push(entries);
            self.kind.push(Kind::Slack);
            self.cost.push(0.0);
            self.barred.push(false);
            self.unit_of_row.push(slack);
            self.position.push(self.basis.len());
            self.basis.push(slack);
            self.weights.push(1.0);
        }
        self.refactor();
    }

    fn values(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.columns.len()];
        for (p, &j) in self.basis.iter().enumerate() {
            v[j] = self.x[p].max(0.0);
        }
        v
    }
}

/// Maps the original variables onto nonnegative columns.
fn column_layout(lp: &LinearProgram) -> (Vec<VarMap>, usize, Vec<(usize, f64)>) {
    let mut maps = Vec::with_capacity(lp.n_vars());
    let mut n_struct = 0usize;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for b in &lp.bounds {
        let map = if b.lower.is_finite() {
            let col = n_struct;
            n_struct += 1;
            if b.upper.is_finite() {
                bound_rows.push((col, b.upper - b.lower));
            }
            VarMap::Shift {
                col,
                offset: b.lower,
            }
        } else if b.upper.is_finite() {
            let col = n_struct;
            n_struct += 1;
            VarMap::Mirror {
                col,
                offset: b.upper,
            }
        } else {
            let pos = n_struct;
            n_struct += 2;
            VarMap::Split { pos, neg: pos + 1 }
        };
        maps.push(map);
    }
    (maps, n_struct, bound_rows)
}

struct Row {
    terms: Vec<(usize, f64)>,
    relation: Relation,
    rhs: f64,
}

/// Rewrites a constraint over structural columns.
fn map_row(maps: &[VarMap], c: &Constraint) -> Row {
    let mut terms = Vec::with_capacity(c.terms.len());
    let mut rhs = c.rhs;
    for &(j, a) in &c.terms {
        match maps[j] {
            VarMap::Shift { col, offset } => {
                terms.push((col, a));
                rhs -= a * offset;
            }
            VarMap::Mirror { col, offset } => {
                terms.push((col, -a));
                rhs -= a * offset;
            }
            VarMap::Split { pos, neg } => {
                terms.push((pos, a));
                terms.push((neg, -a));
            }
        }
    }
    terms.sort_unstable_by_key(|&(j, _)| j);
    terms.dedup_by(|next, kept| {
        if next.0 == kept.0 {
            kept.1 += next.1;
            true
        } else {
            false
        }
    });
    terms.retain(|&(_, a)| a != 0.0);
    Row {
        terms,
        relation: c.relation,
        rhs,
    }
}

fn negate(row: &mut Row) {
    row.rhs = -row.rhs;
    for t in &mut row.terms {
        t.1 = -t.1;
    }
    row.relation = match row.relation {
        Relation::Le => Relation::Ge,
        Relation::Ge => Relation::Le,
        Relation::Eq => Relation::Eq,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Optimal,
    Infeasible,
    Unbounded,
}

/// A solved program that accepts further constraints. After
/// [`Solver::add_constraint`], [`Solver::resolve`] restarts from the last
/// optimal basis with dual simplex pivots instead of solving from scratch.
pub struct Solver {
    lp: LinearProgram,
    options: SimplexOptions,
    maps: Vec<VarMap>,
    engine: Engine,
    state: State,
    pending: Vec<Row>,
}

impl Solver {
    /// Validates and solves `lp`.
    pub fn new(lp: LinearProgram, options: SimplexOptions) -> Result<Solver, LpError> {
        lp.validate()?;
        Ok(Solver::cold(lp, options))
    }

    fn cold(lp: LinearProgram, options: SimplexOptions) -> Solver {
        let (maps, n_struct, bound_rows) = column_layout(&lp);
        let mut rows: Vec<Row> = lp.constraints.iter().map(|c| map_row(&maps, c)).collect();
        for (col, ub) in bound_rows {
            rows.push(Row {
                terms: vec![(col, 1.0)],
                relation: Relation::Le,
                rhs: ub,
            });
        }
        let sign = match lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut structural_cost = vec![0.0; n_struct];
        for (j, map) in maps.iter().enumerate() {
            let c = sign * lp.objective[j];
            match *map {
                VarMap::Shift { col, .. } => structural_cost[col] += c,
                VarMap::Mirror { col, .. } => structural_cost[col] -= c,
                VarMap::Split { pos, neg } => {
                    structural_cost[pos] += c;
                    structural_cost[neg] -= c;
                }
            }
        }
        // With no negative cost the all-slack basis is dual feasible, so every
        // row becomes `<=` (equalities as a pair) and the dual simplex starts
        // right away.
        let dual_start = structural_cost.iter().all(|&c| c >= 0.0);
        if dual_start {
            let mut split = Vec::with_capacity(rows.len());
            for mut row in rows {
                match row.relation {
                    Relation::Le => split.push(row),
                    Relation::Ge => {
                        negate(&mut row);
                        split.push(row);
                    }
                    Relation::Eq => {
                        let mut other = Row {
                            terms: row.terms.clone(),
                            relation: Relation::Eq,
                            rhs: row.rhs,
                        };
                        negate(&mut other);
                        other.relation = Relation::Le;
                        row.relation = Relation::Le;
                        split.push(row);
                        split.push(other);
                    }
                }
            }
            rows = split;
        } else {
            // A zero right-hand side lets a `>=` row flip to `<=` and start
            // with its slack basic instead of an artificial.
            for row in &mut rows {
                if row.rhs < 0.0 || (row.rhs == 0.0 && row.relation == Relation::Ge) {
                    negate(row);
                }
            }
        }

        let m = rows.len();
        let mut columns: Vec<SparseVec> = vec![Vec::new(); n_struct];
        let mut kind = vec![Kind::Structural; n_struct];
        let mut b = Vec::with_capacity(m);
        let mut unit_of_row = vec![0; m];
        let mut basis = vec![0; m];
        let mut artificials = Vec::new();
        let mut max_rhs = 0.0f64;
        for (i, row) in rows.iter().enumerate() {
            for &(j, a) in &row.terms {
                columns[j].push((i, a));
            }
            b.push(row.rhs);
            max_rhs = max_rhs.max(row.rhs);
            match row.relation {
                Relation::Le => {
                    basis[i] = columns.len();
                    unit_of_row[i] = columns.len();
                    columns.push(vec![(i, 1.0)]);
                    kind.push(Kind::Slack);
                }
                Relation::Ge => {
                    columns.push(vec![(i, -1.0)]);
                    kind.push(Kind::Slack);
                    artificials.push(i);
                }
                Relation::Eq => artificials.push(i),
            }
        }
        for &i in &artificials {
            basis[i] = columns.len();
            unit_of_row[i] = columns.len();
            columns.push(vec![(i, 1.0)]);
            kind.push(Kind::Artificial);
        }
        drop(rows);

        let n = columns.len();
        let mut position = vec![NONBASIC; n];
        for (p, &j) in basis.iter().enumerate() {
            position[j] = p;
        }
        let mut cost = structural_cost;
        cost.resize(n, 0.0);
        let unit_cols: Vec<&[(usize, f64)]> = basis.iter().map(|&j| columns[j].as_slice()).collect();
        let factor = Factor::new(m, &unit_cols).ok().expect("unit basis");
        let mut by_row: Vec<SparseVec> = vec![Vec::new(); m];
        for (j, col) in columns.iter().enumerate() {
            for &(i, a) in col {
                by_row[i].push((j, a));
            }
        }
        let mut engine = Engine {
            x: b.clone(),
            b,
            columns,
            by_row,
            kind,
            cost,
            barred: vec![false; n],
            unit_of_row,
            basis,
            position,
            factor,
            phase_one: !artificials.is_empty(),
            weights: vec![1.0; m],
        };

        let mut state = State::Optimal;
        if dual_start {
            let original = engine.perturb_costs();
            let feasible = engine.dual(options.pivot_rule);
            engine.cost = original;
            if !feasible {
                state = State::Infeasible;
            }
        } else if engine.phase_one {
            engine.primal(options.pivot_rule);
            let infeasibility: f64 = engine
                .basis
                .iter()
                .zip(&engine.x)
                .filter(|&(&j, _)| engine.kind[j] == Kind::Artificial)
                .map(|(_, &v)| v.max(0.0))
                .sum();
            if infeasibility > FEASIBILITY_TOL * (1.0 + max_rhs) {
                state = State::Infeasible;
            } else {
                engine.expel_artificials();
                engine.phase_one = false;
            }
        }
        if state == State::Optimal {
            if let RunEnd::Unbounded = engine.primal(options.pivot_rule) {
                state = State::Unbounded;
            }
        }
        Solver {
            lp,
            options,
            maps,
            engine,
            state,
            pending: Vec::new(),
        }
    }

    /// Queues a constraint over the original variables; it takes effect at
    /// the next [`Solver::resolve`].
    pub fn add_constraint(&mut self, constraint: Constraint) -> Result<(), LpError> {
        let n_vars = self.lp.n_vars();
        if let Some(&(index, _)) = constraint.terms.iter().find(|&&(j, _)| j >= n_vars) {
            return Err(LpError::DimensionMismatch {
                constraint: self.lp.constraints.len(),
                index,
                n_vars,
            });
        }
        if !constraint.rhs.is_finite() || constraint.terms.iter().any(|t| !t.1.is_finite()) {
            return Err(LpError::NonFinite(format!(
                "constraint {}",
                self.lp.constraints.len()
            )));
        }
        let mut row = map_row(&self.maps, &constraint);
        self.lp.add(constraint);
        if row.relation == Relation::Ge {
            negate(&mut row);
        }
        if row.relation == Relation::Eq {
            let mut other = Row {
                terms: row.terms.clone(),
                relation: Relation::Le,
                rhs: row.rhs,
            };
            negate(&mut other);
            other.relation = Relation::Le;
            self.pending.push(other);
            row.relation = Relation::Le;
        }
        self.pending.push(row);
        Ok(())
    }

    /// Solves again after added constraints.
    pub fn resolve(&mut self) -> LpOutcome {
        if self.pending.is_empty() {
            return self.outcome();
        }
        match self.state {
            State::Infeasible => self.pending.clear(),
            State::Unbounded => {
                self.pending.clear();
                let lp = std::mem::replace(&mut self.lp, LinearProgram::new(Sense::Minimize, vec![]));
                *self = Solver::cold(lp, self.options);
            }
            State::Optimal => {
                let rows = std::mem::take(&mut self.pending);
                self.engine.append_rows(rows);
                let original = self.engine.perturb_costs();
                let feasible = self.engine.dual(self.options.pivot_rule);
                self.engine.cost = original;
                self.state = if !feasible {
                    State::Infeasible
                } else {
                    match self.engine.primal(self.options.pivot_rule) {
                        RunEnd::Optimal => State::Optimal,
                        RunEnd::Unbounded => State::Unbounded,
                    }
                };
            }
        }
        self.outcome()
    }

    pub fn outcome(&self) -> LpOutcome {
        match self.state {
            State::Infeasible => LpOutcome::Infeasible,
            State::Unbounded => LpOutcome::Unbounded,
            State::Optimal => {
                let values = self.engine.values();
                let solution: Vec<f64> = self
                    .maps
                    .iter()
                    .map(|map| match *map {
                        VarMap::Shift { col, offset } => offset + values[col],
                        VarMap::Mirror { col, offset } => offset - values[col],
                        VarMap::Split { pos, neg } => values[pos] - values[neg],
                    })
                    .collect();
                let objective_value = self.lp.evaluate(&solution);
                LpOutcome::Optimal {
                    solution,
                    objective_value,
                }
            }
        }
    }
}

pub(super) fn solve(lp: &LinearProgram, options: &SimplexOptions) -> LpOutcome {
    Solver::cold(lp.clone(), *options).outcome()
}
