//! End-to-end simulation of a hybrid laser + RF wireless power transfer chain
//! around the Moon.
//!
//! A solar-powered satellite (SPS) beams laser power to a relay in low lunar
//! orbit (LLO). The relay converts the captured light to electrical power and
//! re-radiates it over an RF link to two surface stations: one tracked by the
//! relay's transmit dish (the lunar south pole) and one that is only tracked
//! by its own receive dish (Malapert Mountain).
//!
//! Module map:
//!
//! * [`orbits`] two-body propagation, surface sites, line-of-sight geometry
//!   and visibility windows.
//! * [`fso`] Gaussian beam model and optical power captured by the relay's
//!   circular solar array, with and without a radial pointing offset.
//! * [`pointing`] Rayleigh pointing-error sampling and descriptive statistics.
//! * [`rf`] parabolic dish gain pattern, Friis link and RF-to-DC conversion.
//! * [`chain`] the per-time-step end-to-end chain, extreme cases and
//!   Monte Carlo distributions.
//! * [`config`] and [`output`] scenario files, CSV/JSON artifacts and the
//!   reproducibility manifest.
//!
//! Units: orbital quantities are in km, km/s and seconds; link-level
//! quantities (beam radius, array radius, wavelength, RF range) are SI.
//! Angles are degrees at the configuration boundary and radians internally.

pub mod chain;
pub mod config;
pub mod error;
pub mod fso;
pub mod orbits;
pub mod output;
pub mod pointing;
pub mod quadrature;
pub mod rf;
pub mod special;

pub use chain::{ChainSample, ExtremeCase, ExtremeReport, McRun, McTarget, Scenario, Timeseries};
pub use config::ConfigDocument;
pub use error::{Error, Result};
pub use fso::FsoLink;
pub use orbits::{BodyConstants, GroundSite, KeplerianElements, StateVector, VisibilityWindow};
pub use pointing::{McConfig, McStats, PointingModel};
pub use rf::{DishAntenna, RfLink, Tracking};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
