//! Linear programs, a two-phase simplex solver and an LP dualizer.
//!
//! Every embedding algorithm and every worst-case load query in this crate is
//! phrased as a [`LinearProgram`] and handed to [`solve_lp`]. Constraints are
//! stored sparsely: a row is a list of `(variable, coefficient)` terms and any
//! variable not mentioned has coefficient zero.

mod factor;
mod simplex;

use std::fmt;

use thiserror::Error;

pub use simplex::{PivotRule, SimplexOptions, Solver};

/// Absolute part of the feasibility tolerance.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Relative tolerance used when comparing optimal objective values.
pub const OPTIMALITY_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("constraint {constraint} references variable {index} but the program has {n_vars} variables")]
    DimensionMismatch {
        constraint: usize,
        index: usize,
        n_vars: usize,
    },
    #[error("{0} has {1} entries, expected {2}")]
    LengthMismatch(&'static str, usize, usize),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("variable {0} has invalid bounds [{1}, {2}]")]
    InvalidBounds(usize, f64, f64),
    #[error("program is not in canonical form: {0}")]
    NotCanonical(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(terms: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> Self {
        Constraint {
            terms,
            relation,
            rhs,
        }
    }

    /// Builds a constraint from a dense coefficient row, dropping zeros.
    pub fn dense(row: &[f64], relation: Relation, rhs: f64) -> Self {
        let terms = row
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != 0.0)
            .map(|(j, &a)| (j, a))
            .collect();
        Constraint::new(terms, relation, rhs)
    }

    /// Left-hand side evaluated at `x`.
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates this constraint (zero when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Bounds of a single variable. The lower bound may be `-inf`, the upper
/// bound may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarBounds {
    pub lower: f64,
    pub upper: f64,
}

impl Default for VarBounds {
    fn default() -> Self {
        VarBounds {
            lower: 0.0,
            upper: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<VarBounds>,
}

impl LinearProgram {
    /// A program over `objective.len()` variables, each bounded below by zero.
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            sense,
            objective,
            constraints: Vec::new(),
            bounds: vec![VarBounds::default(); n],
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, constraint: Constraint) -> &mut Self {
        self.constraints.push(constraint);
        self
    }

    pub fn le(&mut self, terms: Vec<(usize, f64)>, rhs: f64) -> &mut Self {
        self.add(Constraint::new(terms, Relation::Le, rhs))
    }

    pub fn ge(&mut self, terms: Vec<(usize, f64)>, rhs: f64) -> &mut Self {
        self.add(Constraint::new(terms, Relation::Ge, rhs))
    }

    pub fn equal(&mut self, terms: Vec<(usize, f64)>, rhs: f64) -> &mut Self {
        self.add(Constraint::new(terms, Relation::Eq, rhs))
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> &mut Self {
        self.bounds[var] = VarBounds { lower, upper };
        self
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest constraint or bound violation of `x`, relative to `1 + |rhs|`.
    pub fn max_scaled_violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|c| c.violation(x) / (1.0 + c.rhs.abs()));
        let bounds = self.bounds.iter().zip(x).map(|(b, &v)| {
            let below = (b.lower - v).max(0.0) / (1.0 + b.lower.abs().min(f64::MAX));
            let above = (v - b.upper).max(0.0) / (1.0 + b.upper.abs().min(f64::MAX));
            below.max(above)
        });
        rows.chain(bounds).fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.n_vars();
        if self.bounds.len() != n {
            return Err(LpError::LengthMismatch("bounds", self.bounds.len(), n));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::NonFinite("objective".into()));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return Err(LpError::NonFinite(format!("right-hand side of constraint {i}")));
            }
            for &(j, a) in &c.terms {
                if j >= n {
                    return Err(LpError::DimensionMismatch {
                        constraint: i,
                        index: j,
                        n_vars: n,
                    });
                }
                if !a.is_finite() {
                    return Err(LpError::NonFinite(format!("coefficient of constraint {i}")));
                }
            }
        }
        for (j, b) in self.bounds.iter().enumerate() {
            let ok = !b.lower.is_nan()
                && !b.upper.is_nan()
                && b.lower != f64::INFINITY
                && b.upper != f64::NEG_INFINITY
                && b.lower <= b.upper;
            if !ok {
                return Err(LpError::InvalidBounds(j, b.lower, b.upper));
            }
        }
        Ok(())
    }

    fn is_canonical(&self) -> Result<(), LpError> {
        if self.sense != Sense::Maximize {
            return Err(LpError::NotCanonical("sense must be maximize".into()));
        }
        if let Some(i) = self
            .constraints
            .iter()
            .position(|c| c.relation != Relation::Le)
        {
            return Err(LpError::NotCanonical(format!("constraint {i} is not <=")));
        }
        if let Some(j) = self
            .bounds
            .iter()
            .position(|b| b.lower != 0.0 || b.upper != f64::INFINITY)
        {
            return Err(LpError::NotCanonical(format!("variable {j} is not bounded by [0, inf)")));
        }
        Ok(())
    }
}

/// Plain-text inequality listing, useful for bug reports.
impl fmt::Display for LinearProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn write_terms(
            f: &mut fmt::Formatter<'_>,
            terms: impl Iterator<Item = (usize, f64)>,
        ) -> fmt::Result {
            let mut first = true;
            for (j, a) in terms {
                if first {
                    write!(f, "{a} x{j}")?;
                    first = false;
                } else if a < 0.0 {
                    write!(f, " - {} x{j}", -a)?;
                } else {
                    write!(f, " + {a} x{j}")?;
                }
            }
            if first {
                f.write_str("0")?;
            }
            Ok(())
        }

        let sense = match self.sense {
            Sense::Maximize => "maximize",
            Sense::Minimize => "minimize",
        };
        write!(f, "{sense} ")?;
        write_terms(
            f,
            self.objective
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0.0)
                .map(|(j, &c)| (j, c)),
        )?;
        writeln!(f)?;
        writeln!(f, "subject to")?;
        for (i, c) in self.constraints.iter().enumerate() {
            write!(f, "  c{i}: ")?;
            write_terms(f, c.terms.iter().copied())?;
            writeln!(f, " {} {}", c.relation, c.rhs)?;
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if *b != VarBounds::default() {
                writeln!(f, "  {} <= x{j} <= {}", b.lower, b.upper)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        solution: Vec<f64>,
        objective_value: f64,
    },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn status(&self) -> LpStatus {
        match self {
            LpOutcome::Optimal { .. } => LpStatus::Optimal,
            LpOutcome::Infeasible => LpStatus::Infeasible,
            LpOutcome::Unbounded => LpStatus::Unbounded,
        }
    }

    pub fn is_optimal(&self) -> bool {
        matches!(self, LpOutcome::Optimal { .. })
    }

    pub fn objective_value(&self) -> Option<f64> {
        match self {
            LpOutcome::Optimal {
                objective_value, ..
            } => Some(*objective_value),
            _ => None,
        }
    }

    pub fn solution(&self) -> Option<&[f64]> {
        match self {
            LpOutcome::Optimal { solution, .. } => Some(solution),
            _ => None,
        }
    }
}

/// Solves `lp` with the default simplex options.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome, LpError> {
    solve_lp_with(lp, &SimplexOptions::default())
}

pub fn solve_lp_with(lp: &LinearProgram, options: &SimplexOptions) -> Result<LpOutcome, LpError> {
    lp.validate()?;
    Ok(simplex::solve(lp, options))
}

/// Dual of a canonical program `max c'x s.t. Ax <= b, x >= 0`, which is
/// `min b'q s.t. A'q >= c, q >= 0`. Dual variable `i` belongs to primal
/// constraint `i`; dual constraint `j` belongs to primal variable `j`.
pub fn dual_of(lp: &LinearProgram) -> Result<LinearProgram, LpError> {
    lp.validate()?;
    lp.is_canonical()?;
    let b: Vec<f64> = lp.constraints.iter().map(|c| c.rhs).collect();
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lp.n_vars()];
    for (i, c) in lp.constraints.iter().enumerate() {
        for &(j, a) in &c.terms {
            columns[j].push((i, a));
        }
    }
    let mut dual = LinearProgram::new(Sense::Minimize, b);
    for (column, &c) in columns.into_iter().zip(&lp.objective) {
        dual.ge(column, c);
    }
    Ok(dual)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn motivating_inner(f: [f64; 2]) -> LinearProgram {
        let mut lp = LinearProgram::new(Sense::Maximize, f.to_vec());
        lp.le(vec![(0, 1.0)], 150.0)
            .le(vec![(1, 1.0)], 150.0)
            .le(vec![(0, 1.0), (1, 1.0)], 200.0);
        lp
    }

    #[test]
    fn single_pair_bound() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 0.0]);
        lp.le(vec![(0, 1.0)], 150.0).le(vec![(0, 1.0), (1, 1.0)], 200.0);
        let out = solve_lp(&lp).unwrap();
        assert!((out.objective_value().unwrap() - 150.0).abs() < 1e-9);
    }

    #[test]
    fn pinned_variable() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0]);
        lp.le(vec![(0, 1.0)], 0.0).ge(vec![(0, 1.0)], 0.0);
        let out = solve_lp(&lp).unwrap();
        assert_eq!(out.status(), LpStatus::Optimal);
        assert!(out.objective_value().unwrap().abs() < 1e-12);
    }

    #[test]
    fn unbounded_ray() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0]);
        lp.ge(vec![(0, 1.0)], 0.0);
        assert_eq!(solve_lp(&lp).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn infeasible_program() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0, 1.0]);
        lp.le(vec![(0, 1.0), (1, 1.0)], 1.0)
            .ge(vec![(0, 1.0), (1, 1.0)], 2.0);
        assert_eq!(solve_lp(&lp).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0]);
        lp.add(Constraint::dense(&[1.0, 1.0], Relation::Le, 1.0));
        assert!(matches!(
            solve_lp(&lp),
            Err(LpError::DimensionMismatch { index: 1, .. })
        ));
    }

    #[test]
    fn non_finite_rejected() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0]);
        lp.le(vec![(0, 1.0)], f64::NAN);
        assert!(matches!(solve_lp(&lp), Err(LpError::NonFinite(_))));
        let lp = LinearProgram::new(Sense::Maximize, vec![f64::INFINITY]);
        assert!(matches!(solve_lp(&lp), Err(LpError::NonFinite(_))));
    }

    #[test]
    fn dual_of_motivating_inner_lp() {
        let dual = dual_of(&motivating_inner([1.0, 1.0])).unwrap();
        assert_eq!(dual.sense, Sense::Minimize);
        assert_eq!(dual.objective, vec![150.0, 150.0, 200.0]);
        assert_eq!(dual.constraints.len(), 2);
        assert_eq!(
            dual.constraints[0],
            Constraint::new(vec![(0, 1.0), (2, 1.0)], Relation::Ge, 1.0)
        );
        assert_eq!(
            dual.constraints[1],
            Constraint::new(vec![(1, 1.0), (2, 1.0)], Relation::Ge, 1.0)
        );
        let primal = solve_lp(&motivating_inner([1.0, 1.0])).unwrap();
        let dual = solve_lp(&dual).unwrap();
        assert!((primal.objective_value().unwrap() - 200.0).abs() < 1e-9);
        assert!((dual.objective_value().unwrap() - 200.0).abs() < 1e-9);
    }

    #[test]
    fn dual_of_zero_objective() {
        let dual = dual_of(&motivating_inner([0.0, 0.0])).unwrap();
        assert!(dual.constraints.iter().all(|c| c.violation(&[0.0; 3]) == 0.0));
        let out = solve_lp(&dual).unwrap();
        assert!(out.objective_value().unwrap().abs() < 1e-12);
    }

    #[test]
    fn dual_requires_canonical_form() {
        let mut lp = motivating_inner([1.0, 1.0]);
        lp.ge(vec![(0, 1.0)], 1.0);
        assert!(matches!(dual_of(&lp), Err(LpError::NotCanonical(_))));
        let mut lp = motivating_inner([1.0, 1.0]);
        lp.sense = Sense::Minimize;
        assert!(matches!(dual_of(&lp), Err(LpError::NotCanonical(_))));
        let mut lp = motivating_inner([1.0, 1.0]);
        lp.set_bounds(1, 0.0, 5.0);
        assert!(matches!(dual_of(&lp), Err(LpError::NotCanonical(_))));
    }

    #[test]
    fn listing_mentions_every_row() {
        let text = motivating_inner([1.0, 1.0]).to_string();
        assert!(text.starts_with("maximize 1 x0 + 1 x1"));
        assert!(text.contains("c2: 1 x0 + 1 x1 <= 200"));
    }
}
