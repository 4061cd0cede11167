//! Levant's robust exact differentiator
//! `ẏ₁ = λ₁√L·|u−y₁|^{1/2}·sign(u−y₁) + y₂`, `ẏ₂ = λ₂L·sign(u−y₁)`,
//! with output `y₂`, in two discretizations.
//!
//! * Explicit: forward Euler with `sign(0) = 0`. Large `dt`·gains make it
//!   chatter or diverge; that is left to the caller.
//! * Implicit: backward Euler with the set-valued sign resolved exactly.
//!   With `w = u_k − y₁ − h·y₂` the new error `e` solves
//!   `w = e + hλ₁√L·|e|^{1/2}·s + h²λ₂L·s`, `s ∈ Sign(e)`. If
//!   `|w| ≤ h²λ₂L` the step lands on the sliding set (`e = 0`,
//!   `s = w/(h²λ₂L)`), otherwise `s = sign(w)` and `|e|^{1/2}` is the positive
//!   root of a quadratic. The output at step `k` is `y₂` after the update
//!   that consumed `u_k`, i.e. one step ahead of the explicit convention.

use crate::error::{invalid, Result};
use crate::signal::positive;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RedScheme {
    Explicit,
    #[default]
    Implicit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RedParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub accel_bound: f64,
    pub dt: f64,
    pub scheme: RedScheme,
}

impl RedParams {
    pub fn new(lambda1: f64, lambda2: f64, accel_bound: f64, dt: f64, scheme: RedScheme) -> Result<Self> {
        positive("lambda1", lambda1)?;
        if !(lambda2.is_finite() && lambda2 > 1.0) {
            return Err(invalid("lambda2", format!("must be > 1, got {lambda2}")));
        }
        positive("L", accel_bound)?;
        positive("dt", dt)?;
        let p = Self { lambda1, lambda2, accel_bound, dt, scheme };
        if let Some(msg) = p.gain_warning() {
            log::warn!("{msg}");
        }
        Ok(p)
    }

    /// Set when `λ₁ < √(8λ₂)`, outside the usual sufficient convergence condition.
    pub fn gain_warning(&self) -> Option<String> {
        let need = (8.0 * self.lambda2).sqrt();
        (self.lambda1 < need).then(|| {
            format!(
                "RED gains lambda1={} lambda2={}: lambda1 < sqrt(8*lambda2) = {need:.4}, convergence is not guaranteed by the standard condition",
                self.lambda1, self.lambda2
            )
        })
    }

    /// Nominal convergence time `R/((λ₂ − 1)L)` for initial bound `R`.
    pub fn convergence_time(&self, initial_bound: f64) -> f64 {
        initial_bound / ((self.lambda2 - 1.0) * self.accel_bound)
    }
}

#[derive(Debug, Clone)]
pub struct Red {
    params: RedParams,
    state: Option<(f64, f64)>,
}

fn sign0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl Red {
    pub fn new(params: RedParams) -> Self {
        Self { params, state: None }
    }

    pub fn params(&self) -> &RedParams {
        &self.params
    }

    /// `(y₁, y₂)` after the latest step.
    pub fn state(&self) -> Option<(f64, f64)> {
        self.state
    }

    pub fn step(&mut self, u: f64) -> f64 {
        let RedParams { lambda1, lambda2, accel_bound: l, dt: h, scheme } = self.params;
        let (y1, y2) = self.state.unwrap_or((u, 0.0));
        let next = match scheme {
            RedScheme::Explicit => {
                let e = u - y1;
                let s = sign0(e);
                (y1 + h * (lambda1 * l.sqrt() * e.abs().sqrt() * s + y2), y2 + h * lambda2 * l * s)
            }
            RedScheme::Implicit => {
                let w = u - y1 - h * y2;
                let thr = h * h * lambda2 * l;
                let (s, e) = if w.abs() <= thr {
                    (w / thr, 0.0)
                } else {
                    let s = sign0(w);
                    let a = h * lambda1 * l.sqrt();
                    let c = w.abs() - thr;
                    let r = 0.5 * (-a + (a * a + 4.0 * c).sqrt());
                    (s, s * r * r)
                };
                (u - e, y2 + h * lambda2 * l * s)
            }
        };
        self.state = Some(next);
        next.1
    }

    pub fn reset(&mut self) {
        self.state = None;
    }
}
