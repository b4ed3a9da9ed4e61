//! Virtual network embedding where a request is a polytope of traffic
//! demands over access node pairs rather than an explicit virtual topology.
//!
//! * [`lp`]: linear programs, a two-phase simplex solver and a dualizer.
//! * [`topology`]: substrate networks, generators, k least-cost paths and
//!   residual bandwidth bookkeeping.
//! * [`vnr`]: requests, demand-polytope queries and the request generator.
//! * [`embed`]: the six embedding algorithms and an independent verifier.
//! * [`sim`]: discrete-event simulation with Poisson arrivals.

pub mod embed;
pub mod lp;
pub mod sim;
pub mod topology;
pub mod vnr;
