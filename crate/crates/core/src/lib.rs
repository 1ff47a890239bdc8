//! Decomposition of a thermal field mode's energy into a continuous dark
//! part, a Planck-Bose photon number and independent binary photons.
//!
//! Closed-form laws, radiometry and kinetics are generic over the float type
//! ([`scalar::Real`]); event probabilities run on any [`num_traits::Num`]
//! (including exact rationals). The aliases below fix `f64`.

// Negated comparisons are how validation rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod events;
pub mod io;
pub mod kinetics;
pub mod laws;
pub mod montecarlo;
pub mod physconst;
pub mod scalar;
pub mod spectra;
pub mod verify;

pub use error::{Error, Result};

pub type Constants = physconst::PhysicalConstants<f64>;
pub type Context = physconst::ModeContext<f64>;
pub type Summary = laws::LawSummary<f64>;
pub type Ladder = kinetics::EnergyLadder<f64>;
pub type Occupancy = kinetics::OccupancyState<f64>;
pub type Fluctuation = spectra::FluctuationReport<f64>;
