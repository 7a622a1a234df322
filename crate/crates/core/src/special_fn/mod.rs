//! Special functions and numerical Laplace inversion used by the analytic
//! evaluators.

pub mod ext;
pub mod gamma;
pub mod laplace;
pub mod mittag_leffler;

pub use gamma::{gamma, ln_gamma, recip_gamma};
pub use laplace::{
    laplace_invert, stehfest, Inversion, InversionOptions, Transform, TransformFunction,
};
pub use mittag_leffler::mittag_leffler;
