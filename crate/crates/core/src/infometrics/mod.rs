//! Mutual information estimation and normalized information retention.

mod digamma;
mod ksg;
mod nmi;

pub use digamma::digamma;
pub use ksg::{jitter, ksg_mi, ksg_mi_jittered, mix_seed, MiEstimate};
pub use nmi::{nmi_curve, rate_seed, NmiPoint};
