//! NMI-curve fitting and rate recommendation.

mod betainc;
mod elbow;
mod fit;

pub use betainc::reg_inc_beta;
pub use elbow::{elbow, ElbowResult};
pub use fit::{beta_curve, fit_beta_curve, BetaFit};
