use std::sync::Arc;

use super::{LinkId, SubstrateNetwork, TopologyError};

/// Resolution of the residual bookkeeping, in quanta per traffic unit.
///
/// Residuals are integer quanta; a release undoes its reservation bit for
/// bit, whatever the interleaving.
const QUANTA_PER_UNIT: f64 = 1e9;

fn to_quanta(units: f64) -> i64 {
    (units * QUANTA_PER_UNIT).round() as i64
}

fn to_units(quanta: i64) -> f64 {
    quanta as f64 / QUANTA_PER_UNIT
}

/// Remaining bandwidth on every substrate link.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualState {
    names: Arc<Vec<String>>,
    capacity: Vec<i64>,
    residual: Vec<i64>,
}

impl ResidualState {
    /// Every link at full bandwidth.
    pub fn new(sn: &SubstrateNetwork) -> Self {
        let capacity: Vec<i64> = sn.links().iter().map(|l| to_quanta(l.bandwidth)).collect();
        ResidualState {
            names: Arc::new(sn.links().iter().map(|l| l.name.clone()).collect()),
            residual: capacity.clone(),
            capacity,
        }
    }

    /// A state with the given residuals, each within `[0, bandwidth]`.
    pub fn with_residuals(sn: &SubstrateNetwork, residuals: &[f64]) -> Result<Self, TopologyError> {
        let mut state = Self::new(sn);
        if residuals.len() != state.len() {
            return Err(TopologyError::AllocationLength {
                got: residuals.len(),
                expected: state.len(),
            });
        }
        for (i, &r) in residuals.iter().enumerate() {
            let q = to_quanta(r);
            if !r.is_finite() || q < 0 || q > state.capacity[i] {
                return Err(TopologyError::InvalidAllocation {
                    link: state.names[i].clone(),
                    value: r,
                });
            }
            state.residual[i] = q;
        }
        Ok(state)
    }

    pub fn len(&self) -> usize {
        self.residual.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residual.is_empty()
    }

    pub fn residual(&self, link: LinkId) -> f64 {
        to_units(self.residual[link.0])
    }

    pub fn capacity(&self, link: LinkId) -> f64 {
        to_units(self.capacity[link.0])
    }

    pub fn residuals(&self) -> Vec<f64> {
        self.residual.iter().map(|&q| to_units(q)).collect()
    }

    /// Fraction of the link's bandwidth currently allocated.
    pub fn utilization(&self, link: LinkId) -> f64 {
        let cap = self.capacity[link.0];
        (cap - self.residual[link.0]) as f64 / cap as f64
    }

    pub fn mean_utilization(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        (0..self.len()).map(|i| self.utilization(LinkId(i))).sum::<f64>() / self.len() as f64
    }

    /// True when nothing is reserved.
    pub fn is_untouched(&self) -> bool {
        self.residual == self.capacity
    }

    pub fn within_bounds(&self) -> bool {
        self.residual
            .iter()
            .zip(&self.capacity)
            .all(|(&r, &c)| 0 <= r && r <= c)
    }

    fn quantize(&self, allocation: &[f64]) -> Result<Vec<i64>, TopologyError> {
        if allocation.len() != self.len() {
            return Err(TopologyError::AllocationLength {
                got: allocation.len(),
                expected: self.len(),
            });
        }
        allocation
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                if !a.is_finite() || a < 0.0 {
                    Err(TopologyError::InvalidAllocation {
                        link: self.names[i].clone(),
                        value: a,
                    })
                } else {
                    Ok(to_quanta(a))
                }
            })
            .collect()
    }

    /// Takes `allocation` out of the residual. Either every link is updated
    /// or, on error, none is.
    pub fn reserve(&mut self, allocation: &[f64]) -> Result<(), TopologyError> {
        let quanta = self.quantize(allocation)?;
        if let Some(i) = (0..self.len()).find(|&i| quanta[i] > self.residual[i]) {
            return Err(TopologyError::InsufficientCapacity {
                link: self.names[i].clone(),
                requested: allocation[i],
                available: to_units(self.residual[i]),
            });
        }
        for (r, q) in self.residual.iter_mut().zip(quanta) {
            *r -= q;
        }
        Ok(())
    }

    /// Returns `allocation` to the residual; the inverse of [`reserve`](Self::reserve).
    pub fn release(&mut self, allocation: &[f64]) -> Result<(), TopologyError> {
        let quanta = self.quantize(allocation)?;
        if let Some(i) = (0..self.len()).find(|&i| self.residual[i] + quanta[i] > self.capacity[i]) {
            return Err(TopologyError::OverRelease {
                link: self.names[i].clone(),
            });
        }
        for (r, q) in self.residual.iter_mut().zip(quanta) {
            *r += q;
        }
        Ok(())
    }
}
