//! Hybrid automaton-circuit simulator.
//!
//! Simulates brickwork Clifford automaton circuits interleaved with composite
//! (projective + basis-restoring) measurements, tracking volume-law
//! entanglement and its sample-to-sample fluctuations through three engines
//! that cross-validate each other:
//!
//! * [`stabilizer`] — bit-packed tableau simulation with entropies from
//!   GF(2) ranks of region-restricted generator matrices;
//! * [`particles`] — classical particle duals (bit-string differences) for
//!   survival probabilities, basis decompositions, and purification ranks;
//! * [`oracle`] — exact phase-vector simulation for small sizes, the ground
//!   truth both engines are checked against.
//!
//! [`codes`] extracts contiguous code distances from the stabilizer and
//! particle pictures, [`stats`] does streaming ensemble statistics and
//! power-law fits, and [`cli`] exposes preset experiments.

pub mod circuit;
pub mod cli;
pub mod codes;
pub mod experiments;
pub mod gf2;
pub mod oracle;
pub mod particles;
pub mod stabilizer;
pub mod stats;
