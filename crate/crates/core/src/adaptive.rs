//! Sample-based differentiator with windowed noise-amplitude estimation.
//!
//! At step `k` the differentiator estimates the noise amplitude `N̂_k` from
//! the last `k̄ + 1` samples, picks a difference-quotient window `T̂_k` that
//! is an integer multiple of `Δ`, and outputs
//! `y_k = (u_k − u_{k−T̂_k/Δ}) / max(T̂_k, Δ)`.

use std::io::Write;

use crate::error::{invalid, Error, Result};
use crate::signal::{non_negative, positive};

/// Number of past samples the noise estimator may look at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowLength {
    /// `k̄ ≥ 2`.
    Finite(usize),
    /// Keep the entire history. Memory grows linearly with the stream and
    /// per-step cost quadratically.
    Unbounded,
}

impl WindowLength {
    fn cap(self, k: usize) -> usize {
        match self {
            WindowLength::Finite(kb) => kb.min(k),
            WindowLength::Unbounded => k,
        }
    }
}

/// Which admissible `γ_k` to use when several lie in `[1, γ̄]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GammaPolicy {
    /// Smallest admissible window.
    #[default]
    Smallest,
    /// Largest admissible window.
    Largest,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveParams {
    pub accel_bound: f64,
    pub dt: f64,
    pub window: WindowLength,
    pub gamma_bar: f64,
    pub gamma_policy: GammaPolicy,
}

pub const GAMMA_BAR_MIN: f64 = 2.0;
pub const GAMMA_BAR_MAX: f64 = 1.0 + std::f64::consts::SQRT_2;

impl AdaptiveParams {
    pub fn new(accel_bound: f64, dt: f64, window: WindowLength, gamma_bar: f64) -> Result<Self> {
        positive("L", accel_bound)?;
        positive("dt", dt)?;
        if let WindowLength::Finite(kb) = window {
            if kb < 2 {
                return Err(invalid("k_bar", format!("must be >= 2, got {kb}")));
            }
        }
        if !(GAMMA_BAR_MIN..=GAMMA_BAR_MAX).contains(&gamma_bar) {
            return Err(invalid("gamma_bar", format!("must lie in [2, 1+sqrt(2)], got {gamma_bar}")));
        }
        Ok(Self { accel_bound, dt, window, gamma_bar, gamma_policy: GammaPolicy::Smallest })
    }

    pub fn with_policy(mut self, policy: GammaPolicy) -> Self {
        self.gamma_policy = policy;
        self
    }

    /// Parameters for a crude noise bound `N̄`: the smallest `k̄` with
    /// `k̄Δ > √(2N̄/L) + Δ`, and `γ̄ = 2`.
    pub fn tuned(accel_bound: f64, dt: f64, noise_ceiling: f64) -> Result<Self> {
        positive("L", accel_bound)?;
        positive("dt", dt)?;
        non_negative("noise_ceiling", noise_ceiling)?;
        let reach = (2.0 * noise_ceiling / accel_bound).sqrt() + dt;
        let mut kb = ((reach / dt).floor() as usize).max(1);
        while kb as f64 * dt <= reach {
            kb += 1;
        }
        while kb > 2 && (kb - 1) as f64 * dt > reach {
            kb -= 1;
        }
        Self::new(accel_bound, dt, WindowLength::Finite(kb.max(2)), GAMMA_BAR_MIN)
    }

    /// Largest noise amplitude `N̄ = LΔ²(k̄−1)²/2` the window is sized for.
    pub fn noise_ceiling(&self) -> f64 {
        match self.window {
            WindowLength::Finite(kb) => {
                let m = (kb - 1) as f64;
                self.accel_bound * self.dt * self.dt * m * m / 2.0
            }
            WindowLength::Unbounded => f64::INFINITY,
        }
    }
}

/// The most recent samples, oldest first, in one contiguous slice.
///
/// With a finite window the buffer keeps between `cap` and `2·cap` samples and
/// compacts in amortized O(1).
#[derive(Debug, Clone)]
pub struct SampleWindow {
    buf: Vec<f64>,
    cap: Option<usize>,
    pushed: usize,
}

impl SampleWindow {
    /// Window holding up to `k̄ + 1` samples.
    pub fn new(window: WindowLength) -> Self {
        let cap = match window {
            WindowLength::Finite(kb) => Some(kb + 1),
            WindowLength::Unbounded => None,
        };
        Self { buf: Vec::with_capacity(cap.map_or(64, |c| 2 * c)), cap, pushed: 0 }
    }

    pub fn push(&mut self, u: f64) {
        if let Some(cap) = self.cap {
            if self.buf.len() == 2 * cap {
                self.buf.drain(..cap);
            }
        }
        self.buf.push(u);
        self.pushed += 1;
    }

    /// Index `k` of the newest sample. Panics on an empty window.
    pub fn step_index(&self) -> usize {
        self.pushed.checked_sub(1).expect("window is empty")
    }

    pub fn is_empty(&self) -> bool {
        self.pushed == 0
    }

    /// How many samples back from the newest one can be read.
    pub fn reach(&self) -> usize {
        let stored = match self.cap {
            Some(cap) => self.buf.len().min(cap),
            None => self.buf.len(),
        };
        stored.saturating_sub(1)
    }

    /// Stored samples, oldest first, newest last.
    pub fn as_slice(&self) -> &[f64] {
        let n = self.reach() + usize::from(!self.buf.is_empty());
        &self.buf[self.buf.len() - n..]
    }

    /// `u(t_k − jΔ)`.
    pub fn lag(&self, j: usize) -> Option<f64> {
        if self.buf.is_empty() || j > self.reach() {
            return None;
        }
        Some(self.buf[self.buf.len() - 1 - j])
    }

    pub fn clear(&mut self) {
        self.buf.clear();
        self.pushed = 0;
    }
}

#[inline]
fn q_raw(newest: f64, at_j: f64, at_ell: f64, ell: usize, j: usize) -> f64 {
    at_j - newest + (newest - at_ell) * (j as f64 / ell as f64)
}

/// `Q(t_k, ℓΔ, jΔ) = u(t_k − jΔ) − u(t_k) + (u(t_k) − u(t_k − ℓΔ))·j/ℓ`.
///
/// Requires `1 ≤ j ≤ ℓ` and `ℓ` within the stored history.
pub fn q_value(window: &SampleWindow, ell: usize, j: usize) -> Result<f64> {
    let available = window.reach();
    if j == 0 || j > ell || ell > available {
        return Err(Error::LagOutOfRange { ell, j, available });
    }
    let newest = window.lag(0).expect("non-empty");
    let at_j = window.lag(j).expect("checked");
    let at_ell = window.lag(ell).expect("checked");
    Ok(q_raw(newest, at_j, at_ell, ell, j))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseEstimate {
    pub value: f64,
    /// Maximizing `(ℓ, j)`; `None` before two samples of history exist.
    pub argmax: Option<(usize, usize)>,
}

/// `N̂_k = ½·max_{ℓ, j} (|Q(t_k, ℓΔ, jΔ)| − LΔ²·j(ℓ−j)/2)` over
/// `2 ≤ ℓ ≤ min(k, k̄)`, `1 ≤ j ≤ ℓ`; zero for `k < 2`.
///
/// Ties keep the last maximizer in the scan order `ℓ` ascending, `j`
/// ascending. `accel_bound` may be 0.
pub fn estimate_noise(window: &SampleWindow, accel_bound: f64, dt: f64) -> NoiseEstimate {
    let w = window.as_slice();
    let reach = w.len().saturating_sub(1);
    if reach < 2 {
        return NoiseEstimate { value: 0.0, argmax: None };
    }
    let newest = w[reach];
    let half_pen = accel_bound * dt * dt / 2.0;
    let mut best = f64::NEG_INFINITY;
    let mut arg = (2, 2);
    for ell in 2..=reach {
        let at_ell = w[reach - ell];
        for j in 1..=ell {
            let q = q_raw(newest, w[reach - j], at_ell, ell, j);
            let v = q.abs() - half_pen * (j * (ell - j)) as f64;
            if v >= best {
                best = v;
                arg = (ell, j);
            }
        }
    }
    NoiseEstimate { value: 0.5 * best, argmax: Some(arg) }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowChoice {
    pub gamma: f64,
    /// `T̂_k / Δ`.
    pub lag: usize,
    /// `T̂_k` in seconds.
    pub t_hat: f64,
}

/// Picks `γ_k` and `T̂_k = min{t_k, k̄Δ, max{Δ, 2γ_k√(N̂_k/L)}}`.
///
/// With `s = 2√(N̂_k/L) > Δ` the admissible `γ` are `jΔ/s ∈ [1, γ̄]`; the
/// policy picks the smallest or largest such `j`.
pub fn select_window(n_hat: f64, params: &AdaptiveParams, k: usize) -> WindowChoice {
    let dt = params.dt;
    let s = 2.0 * (n_hat.max(0.0) / params.accel_bound).sqrt();
    let (gamma, mut m) = if s <= dt {
        (1.0, 1)
    } else {
        let mut j = (s / dt).ceil() as usize;
        while (j as f64) * dt < s {
            j += 1;
        }
        if params.gamma_policy == GammaPolicy::Largest {
            let mut hi = (params.gamma_bar * s / dt).floor() as usize;
            while hi as f64 * dt > params.gamma_bar * s {
                hi -= 1;
            }
            j = j.max(hi);
        }
        (j as f64 * dt / s, j)
    };
    m = m.min(params.window.cap(k));
    WindowChoice { gamma, lag: m, t_hat: m as f64 * dt }
}

/// Everything computed at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveDiagnostics {
    pub step: usize,
    pub n_hat: f64,
    pub gamma: f64,
    pub t_hat: f64,
    pub lag: usize,
    pub y: f64,
}

/// Streaming adaptive differentiator; one instance per measurement stream.
#[derive(Debug, Clone)]
pub struct AdaptiveDifferentiator {
    params: AdaptiveParams,
    window: SampleWindow,
    last: Option<AdaptiveDiagnostics>,
}

impl AdaptiveDifferentiator {
    pub fn new(params: AdaptiveParams) -> Self {
        Self { window: SampleWindow::new(params.window), params, last: None }
    }

    pub fn params(&self) -> &AdaptiveParams {
        &self.params
    }

    pub fn window(&self) -> &SampleWindow {
        &self.window
    }

    pub fn step(&mut self, u: f64) -> AdaptiveDiagnostics {
        self.window.push(u);
        let k = self.window.step_index();
        let est = estimate_noise(&self.window, self.params.accel_bound, self.params.dt);
        let choice = select_window(est.value, &self.params, k);
        let y = if k == 0 {
            0.0
        } else {
            let past = self.window.lag(choice.lag).expect("lag within window");
            (u - past) / (choice.lag.max(1) as f64 * self.params.dt)
        };
        let d = AdaptiveDiagnostics {
            step: k,
            n_hat: est.value,
            gamma: choice.gamma,
            t_hat: choice.t_hat,
            lag: choice.lag,
            y,
        };
        self.last = Some(d);
        d
    }

    pub fn reset(&mut self) {
        self.window.clear();
        self.last = None;
    }

    pub fn last(&self) -> Option<&AdaptiveDiagnostics> {
        self.last.as_ref()
    }
}

/// Writes diagnostics as CSV with header `k,t,u,N_hat,gamma,T_hat,y`.
pub fn write_diagnostics_csv<W: Write>(out: W, dt: f64, u: &[f64], diags: &[AdaptiveDiagnostics]) -> Result<()> {
    if u.len() != diags.len() {
        return Err(Error::LengthMismatch { left: u.len(), right: diags.len() });
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "t", "u", "N_hat", "gamma", "T_hat", "y"])?;
    for (d, &uk) in diags.iter().zip(u) {
        w.write_record(&[
            d.step.to_string(),
            (d.step as f64 * dt).to_string(),
            uk.to_string(),
            d.n_hat.to_string(),
            d.gamma.to_string(),
            d.t_hat.to_string(),
            d.y.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
