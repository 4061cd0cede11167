//! Streaming first-order differentiation of sampled, noisy signals with
//! bounded second derivative.
//!
//! The central piece is [`adaptive::AdaptiveDifferentiator`], which estimates
//! the noise amplitude online and needs only the acceleration bound `L`. The
//! crate also ships baseline engines ([`engines`]), worst-case signal
//! constructions ([`adversary`]), and a benchmark harness ([`harness`]).

pub mod adaptive;
pub mod adversary;
pub mod config;
pub mod engines;
pub mod error;
pub mod harness;
pub mod signal;
pub mod svg;

pub use adaptive::{AdaptiveDiagnostics, AdaptiveDifferentiator, AdaptiveParams, GammaPolicy, WindowLength};
pub use engines::{make_engine, Differentiator, Engine, EngineKind, EngineSpec};
pub use error::{Error, Result};
pub use signal::{SampledTrace, SignalClassParams};
