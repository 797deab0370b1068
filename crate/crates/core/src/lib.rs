//! Magnetic microtraps on an atom chip and the spin-flip lifetime of atoms
//! held near a room-temperature conductor.
//!
//! The crate is organised by subsystem:
//!
//! * [`units`]: constants, unit conversion, atom species
//! * [`field`]: Biot–Savart fields of the chip wires
//! * [`trap`]: trap minima, frequencies, ramps, cloud thermodynamics
//! * [`noise`]: thermal near-field noise and loss-rate models
//! * [`fragmentation`]: corrugated axial potentials and density profiles
//! * [`kinetics`]: decay simulation, lifetime fitting, rf calibration of f0
//! * [`scenario`]: config-driven runner behind the `atomchip` binary

// `!(x > 0.0)` is used throughout on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod field;
pub mod fragmentation;
pub mod kinetics;
pub mod units;
pub mod noise;
pub mod scenario;
pub mod trap;
