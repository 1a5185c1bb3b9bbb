#![allow(clippy::needless_range_loop, clippy::type_complexity)]

pub mod approx;
pub mod bilinear;
pub mod error;
pub mod experiments;
pub mod group;
pub mod io;
pub mod norm;
pub mod ri;
pub mod scalar;
pub mod transform;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Signal64 = transform::Signal<f64>;
pub type BilinearSymbol64 = bilinear::BilinearSymbol<f64>;
pub type Kernel64 = bilinear::Kernel<f64>;
pub type NormEstimate64 = norm::NormEstimate<f64>;
pub type ApproxSequence64 = approx::ApproxSequence<f64>;
pub type ApproxIdentity64 = approx::ApproxIdentity<f64>;
pub type CutoffFamily64 = approx::CutoffFamily<f64>;
