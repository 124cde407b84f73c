//! Joint spectral simulation of pulse-front-tilted type-II collinear
//! downconversion in birefringent uniaxial crystals.
//!
//! The crate models the two-photon joint spectral amplitude of a pulsed-pump
//! downconversion source, including the effective dispersion induced by a
//! pulse-front tilt of the interacting waves, and provides the analysis tools
//! (Gaussian correlation fit, Schmidt decomposition, marginal and temporal
//! widths) used to characterise and steer the spectral correlations.
//!
//! Unit conventions at every public boundary:
//! wavelengths in nm, time in fs, crystal length in mm, angles in degrees.
//! Angular frequencies are rad/fs; wavevector mismatches are rad/mm.

pub mod analysis;
pub mod biphoton;
pub mod cli;
pub mod config;
pub mod dispersion;
pub mod error;
pub mod export;
pub mod numeric;
pub mod phasematch;
pub mod report;
pub mod scan;
pub mod sellmeier;
pub mod sweep;
pub mod tilt;
pub mod units;

pub use error::{Error, Result};
