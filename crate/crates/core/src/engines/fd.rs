//! Fixed-window difference quotient tuned for known `(L, N)`.

use std::collections::VecDeque;

use crate::error::Result;
use crate::signal::{non_negative, positive};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDifferenceParams {
    pub accel_bound: f64,
    pub noise_bound: f64,
    pub dt: f64,
    /// Window in samples, `round(2√(N/L)/Δ)` and at least 1.
    pub lag: usize,
}

impl FiniteDifferenceParams {
    pub fn new(accel_bound: f64, noise_bound: f64, dt: f64) -> Result<Self> {
        positive("L", accel_bound)?;
        non_negative("N", noise_bound)?;
        positive("dt", dt)?;
        let window = 2.0 * (noise_bound / accel_bound).sqrt();
        let lag = ((window / dt).round() as usize).max(1);
        Ok(Self { accel_bound, noise_bound, dt, lag })
    }

    /// Window length `mΔ` in seconds.
    pub fn window(&self) -> f64 {
        self.lag as f64 * self.dt
    }

    /// Worst-case error `2N/(mΔ) + L·mΔ/2` once the window is filled.
    pub fn error_bound(&self) -> f64 {
        let w = self.window();
        2.0 * self.noise_bound / w + self.accel_bound * w / 2.0
    }
}

/// `y_k = (u_k − u_{k−m})/(mΔ)` for `k ≥ m`, and 0 before.
#[derive(Debug, Clone)]
pub struct FiniteDifference {
    params: FiniteDifferenceParams,
    history: VecDeque<f64>,
}

impl FiniteDifference {
    pub fn new(params: FiniteDifferenceParams) -> Self {
        Self { history: VecDeque::with_capacity(params.lag + 1), params }
    }

    pub fn params(&self) -> &FiniteDifferenceParams {
        &self.params
    }

    pub fn step(&mut self, u: f64) -> f64 {
        let m = self.params.lag;
        if self.history.len() == m + 1 {
            self.history.pop_front();
        }
        self.history.push_back(u);
        if self.history.len() == m + 1 {
            (u - self.history[0]) / self.params.window()
        } else {
            0.0
        }
    }

    pub fn reset(&mut self) {
        self.history.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_rounding() {
        assert_eq!(FiniteDifferenceParams::new(1.0, 1.0, 0.5).unwrap().lag, 4);
        assert_eq!(FiniteDifferenceParams::new(1.0, 0.0, 0.5).unwrap().lag, 1);
        assert!(FiniteDifferenceParams::new(0.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn exact_on_ramp_and_biased_on_parabola() {
        let p = FiniteDifferenceParams::new(1.0, 0.01, 0.01).unwrap();
        assert_eq!(p.lag, 20);
        let mut fd = FiniteDifference::new(p);
        for k in 0..100 {
            let y = fd.step(k as f64 * 0.01);
            if k < 20 {
                assert_eq!(y, 0.0);
            } else {
                assert!((y - 1.0).abs() < 1e-9);
            }
        }
        let mut fd = FiniteDifference::new(p);
        for k in 0..100 {
            let t = k as f64 * 0.01;
            let y = fd.step(t * t / 2.0);
            if k >= 20 {
                assert!((t - y - 0.1).abs() < 1e-9);
            }
        }
    }
}
