//! Simulation and optimization toolkit for controller-manipulation attacks
//! on RIS-assisted wireless links: channel models, four detectors, their
//! matched attack designers, the supporting solver stack, and a seeded
//! Monte Carlo harness.

pub mod attacks;
pub mod channel;
pub mod harness;
pub mod rng;
pub mod detectors;
pub mod solvers;
pub mod statdist;
