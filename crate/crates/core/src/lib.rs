//! Spectral heat content of isotropic stable processes under subordinator and
//! inverse-subordinator time changes.
//!
//! The crate is organised bottom-up:
//!
//! - [`special_fn`]: Mittag-Leffler function and Gaver–Stehfest Laplace inversion.
//! - [`subordinator`]: Laplace exponents, subordinator sampling and the inverse time change.
//! - [`stable_motion`]: symmetric stable increments, exit times, running-supremum constant.
//! - [`spectral`]: interval domains, eigen systems and certified weighted eigen-series.
//! - [`heat_content`]: the three heat contents by series, transform and Monte Carlo.
//! - [`asymptotics`]: closed-form evaluators for the large- and small-time laws.

pub mod asymptotics;
pub mod error;
pub mod heat_content;
pub mod quad;
pub mod rng;
pub mod special_fn;
pub mod spectral;
pub mod stable_motion;
pub mod subordinator;

pub use error::{Error, Result};
