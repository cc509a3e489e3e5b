//! Simulation and analysis of laser-induced, data-dependent static currents
//! in bulk CMOS logic.
//!
//! The pipeline has four stages:
//!
//! 1. [`netlist`] — transistor-level standard cells with diffusion/well
//!    geometry, a textual netlist format, built-in fixtures and chain chips;
//! 2. [`eval`] — switch-level static evaluation of cells and chips and
//!    enumeration of reverse-biased PN junctions;
//! 3. [`photo`] + [`trace`] — Gaussian-spot photocurrent model and synthesis
//!    of noisy, jitter-sampled ammeter traces for seeded campaigns;
//! 4. [`analysis`] — pulse-window detection, pattern classification,
//!    leakage statistics, traces-to-success estimation and model calibration
//!    against measured anchor currents.

pub mod analysis;
pub mod eval;
pub mod geom;
pub mod netlist;
pub mod optim;
pub mod photo;
pub mod rng;
pub mod scenario;
pub mod trace;
