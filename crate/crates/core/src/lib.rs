//! Periodic scheduling of networked control systems whose plants share a
//! channel that serves only `M` of `N` plants per time step.
//!
//! Each plant alternates between its closed loop (channel granted) and its
//! open loop. Quadratic Lyapunov-like certificates bound how fast each mode
//! contracts or expands and how much a switch costs. A cycle of channel
//! allocations with dwell times ("T-factors") is accepted when every plant's
//! weighted sum `Ξ_i` is negative, and repeating it yields a policy under which
//! every plant is globally asymptotically stable.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the precision for callers that do not care.

pub mod benchmarks;
pub mod certificates;
pub mod cycles;
pub mod design;
pub mod graph;
pub mod matops;
pub mod plants;
pub mod reproduce;
pub mod rng;
pub mod scalar;
pub mod scheduler;
pub mod simulator;

pub use scalar::Scalar;

pub type Matrix64 = matops::Matrix<f64>;
pub type Matrix32 = matops::Matrix<f32>;
pub type NcsConfig64 = plants::NcsConfig<f64>;
pub type NcsConfig32 = plants::NcsConfig<f32>;
pub type CertificateScalars64 = certificates::CertificateScalars<f64>;
pub type CertificateScalars32 = certificates::CertificateScalars<f32>;
pub type ModeCertificate64 = certificates::ModeCertificate<f64>;
pub type ModeCertificate32 = certificates::ModeCertificate<f32>;
pub type DesignResult64 = design::DesignResult<f64>;
pub type DesignResult32 = design::DesignResult<f32>;
