//! Uniform streaming interface over all differentiators.

mod fd;
mod red;

pub use fd::{FiniteDifference, FiniteDifferenceParams};
pub use red::{Red, RedParams, RedScheme};

use std::fmt;
use std::str::FromStr;

use crate::adaptive::{AdaptiveDiagnostics, AdaptiveDifferentiator, AdaptiveParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EngineKind {
    Adaptive,
    FiniteDifference,
    Red,
}

impl EngineKind {
    pub fn name(self) -> &'static str {
        match self {
            EngineKind::Adaptive => "adaptive",
            EngineKind::FiniteDifference => "fd",
            EngineKind::Red => "red",
        }
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EngineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adaptive" => Ok(EngineKind::Adaptive),
            "fd" => Ok(EngineKind::FiniteDifference),
            "red" => Ok(EngineKind::Red),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

/// Validated parameters of one engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EngineSpec {
    Adaptive(AdaptiveParams),
    FiniteDifference(FiniteDifferenceParams),
    Red(RedParams),
}

impl EngineSpec {
    pub fn kind(&self) -> EngineKind {
        match self {
            EngineSpec::Adaptive(_) => EngineKind::Adaptive,
            EngineSpec::FiniteDifference(_) => EngineKind::FiniteDifference,
            EngineSpec::Red(_) => EngineKind::Red,
        }
    }

    pub fn dt(&self) -> f64 {
        match self {
            EngineSpec::Adaptive(p) => p.dt,
            EngineSpec::FiniteDifference(p) => p.dt,
            EngineSpec::Red(p) => p.dt,
        }
    }
}

/// Snapshot of the latest step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub step: usize,
    pub y: f64,
    pub adaptive: Option<AdaptiveDiagnostics>,
    /// `(y₁, y₂)` for RED engines.
    pub red_state: Option<(f64, f64)>,
}

/// A causal, deterministic streaming differentiator.
pub trait Differentiator {
    /// Consumes `u_k` and returns `y_k`.
    fn step(&mut self, u: f64) -> f64;
    /// Returns to the state before the first sample.
    fn reset(&mut self);
    /// Diagnostics of the latest step; `None` before the first one.
    fn diagnostics(&self) -> Option<Diagnostics>;
    fn kind(&self) -> EngineKind;
    fn dt(&self) -> f64;
}

#[derive(Debug, Clone)]
enum Inner {
    Adaptive(AdaptiveDifferentiator),
    FiniteDifference(FiniteDifference),
    Red(Red),
}

/// Any engine behind one concrete type.
#[derive(Debug, Clone)]
pub struct Engine {
    spec: EngineSpec,
    inner: Inner,
    last: Option<(usize, f64)>,
}

impl Engine {
    pub fn new(spec: EngineSpec) -> Self {
        let inner = match spec {
            EngineSpec::Adaptive(p) => Inner::Adaptive(AdaptiveDifferentiator::new(p)),
            EngineSpec::FiniteDifference(p) => Inner::FiniteDifference(FiniteDifference::new(p)),
            EngineSpec::Red(p) => Inner::Red(Red::new(p)),
        };
        Self { spec, inner, last: None }
    }

    pub fn spec(&self) -> &EngineSpec {
        &self.spec
    }

    /// Runs the engine over a whole sequence from its current state.
    pub fn run(&mut self, u: &[f64]) -> Vec<f64> {
        u.iter().map(|&x| self.step(x)).collect()
    }
}

impl Differentiator for Engine {
    fn step(&mut self, u: f64) -> f64 {
        let y = match &mut self.inner {
            Inner::Adaptive(a) => a.step(u).y,
            Inner::FiniteDifference(f) => f.step(u),
            Inner::Red(r) => r.step(u),
        };
        let k = self.last.map_or(0, |(k, _)| k + 1);
        self.last = Some((k, y));
        y
    }

    fn reset(&mut self) {
        match &mut self.inner {
            Inner::Adaptive(a) => a.reset(),
            Inner::FiniteDifference(f) => f.reset(),
            Inner::Red(r) => r.reset(),
        }
        self.last = None;
    }

    fn diagnostics(&self) -> Option<Diagnostics> {
        let (step, y) = self.last?;
        let (adaptive, red_state) = match &self.inner {
            Inner::Adaptive(a) => (a.last().copied(), None),
            Inner::FiniteDifference(_) => (None, None),
            Inner::Red(r) => (None, r.state()),
        };
        Some(Diagnostics { step, y, adaptive, red_state })
    }

    fn kind(&self) -> EngineKind {
        self.spec.kind()
    }

    fn dt(&self) -> f64 {
        self.spec.dt()
    }
}

/// Builds an engine from validated parameters.
pub fn make_engine(spec: &EngineSpec) -> Engine {
    Engine::new(*spec)
}
