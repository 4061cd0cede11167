//! Signal/noise pairs that certify lower bounds on the worst-case error.
//!
//! Each construction yields a trace in which the true derivative at a
//! certified instant is far from anything a causal differentiator can infer
//! from the measurements, together with the error level it certifies.

use crate::error::{Error, Result};
use crate::signal::{compose, non_negative, positive, SampledTrace};

/// What a scenario certifies.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub construction: &'static str,
    /// Certified instant `T` in seconds.
    pub instant: f64,
    /// `T` snapped to the nearest grid step.
    pub step: usize,
    /// Certified error level `E`.
    pub error: f64,
    /// `false` when `E` does not exceed what any quasi-exact engine already
    /// concedes, i.e. the bound is vacuous.
    pub nontrivial: bool,
    pub accel_bound: f64,
    pub noise_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdversaryScenario {
    /// `u`, `f`, `fdot` and `noise` are all populated.
    pub trace: SampledTrace,
    pub certificate: Certificate,
}

/// `C¹` spline rising from 0 to `Lκ²` on `[0, 2κ]`:
/// `Lt²/2` on `[0, κ)` and `Lκ² − L(t−2κ)²/2` on `[κ, 2κ]`.
pub fn h_arc(kappa: f64, accel_bound: f64, t: f64) -> Result<f64> {
    let hi = 2.0 * kappa;
    if !(0.0..=hi).contains(&t) {
        return Err(Error::OutOfDomain { t, lo: 0.0, hi });
    }
    Ok(h_unchecked(kappa, accel_bound, t).0)
}

/// `(h, ḣ)` without the domain check.
fn h_unchecked(kappa: f64, l: f64, t: f64) -> (f64, f64) {
    if t < kappa {
        (l * t * t / 2.0, l * t)
    } else {
        let s = t - 2.0 * kappa;
        (l * kappa * kappa - l * s * s / 2.0, -l * s)
    }
}

fn kappa(l: f64, n: f64) -> f64 {
    if n == 0.0 {
        0.0
    } else {
        (n / l).sqrt()
    }
}

fn check_horizon(horizon: f64, needed: f64) -> Result<()> {
    if !horizon.is_finite() || horizon < needed {
        return Err(Error::HorizonTooShort { horizon, needed });
    }
    Ok(())
}

fn sample_count(horizon: f64, dt: f64) -> usize {
    (horizon / dt + 1e-9).floor() as usize + 1
}

fn build(
    dt: f64,
    n: usize,
    eval: impl Fn(f64) -> (f64, f64, f64),
    certificate: Certificate,
) -> Result<AdversaryScenario> {
    let mut f = Vec::with_capacity(n);
    let mut fdot = Vec::with_capacity(n);
    let mut eta = Vec::with_capacity(n);
    for k in 0..n {
        let (a, b, c) = eval(k as f64 * dt);
        f.push(a);
        fdot.push(b);
        eta.push(c);
    }
    let truth = SampledTrace::new(dt, f.clone(), Some(f), Some(fdot), None)?;
    let trace = compose(&truth, &eta)?;
    let scenario = AdversaryScenario { trace, certificate };
    verify_membership(&scenario.trace, scenario.certificate.accel_bound, scenario.certificate.noise_bound)?;
    Ok(scenario)
}

/// Two scenarios (`f = g₁, η = g₂` and `f = −g₁, η = −g₂`) whose measurements
/// are identically zero on `[0, T]`, `T = τ + 4κ`, `κ = √(N/L)`, while
/// `ḟ(T) = ±2√(NL)`. Any causal differentiator errs by at least `2√(NL)` on
/// one of them.
pub fn causal_pair(
    accel_bound: f64,
    noise_bound: f64,
    tau: f64,
    dt: f64,
    horizon: f64,
) -> Result<[AdversaryScenario; 2]> {
    positive("L", accel_bound)?;
    positive("N", noise_bound)?;
    non_negative("tau", tau)?;
    positive("dt", dt)?;
    let (l, nb) = (accel_bound, noise_bound);
    let kap = kappa(l, nb);
    let t_end = tau + 4.0 * kap;
    check_horizon(horizon, t_end)?;
    let g1 = move |t: f64| -> (f64, f64) {
        if t < tau {
            (0.0, 0.0)
        } else if t < tau + 2.0 * kap {
            let (h, hd) = h_unchecked(kap, l, t - tau);
            (-h, -hd)
        } else {
            let s = t - tau - 2.0 * kap;
            (-nb + l * s * s / 2.0, l * s)
        }
    };
    let g2 = move |t: f64, g: f64| if t <= t_end { -g } else { -nb };
    let cert = Certificate {
        construction: "causal-pair",
        instant: t_end,
        step: (t_end / dt).round() as usize,
        error: 2.0 * (nb * l).sqrt(),
        nontrivial: true,
        accel_bound: l,
        noise_bound: nb,
    };
    let n = sample_count(horizon, dt);
    let plus = build(
        dt,
        n,
        |t| {
            let (g, gd) = g1(t);
            (g, gd, g2(t, g))
        },
        cert.clone(),
    )?;
    let minus = build(
        dt,
        n,
        |t| {
            let (g, gd) = g1(t);
            (-g, -gd, -g2(t, g))
        },
        cert,
    )?;
    Ok([plus, minus])
}

/// `g₁` of the exact-differentiator trap: flat, then `−h_κ/2`, then the
/// parabola `−N/2 + L(t−τ−2κ)²/2`.
fn trap_g1(l: f64, nb: f64, kap: f64, tau: f64, t: f64) -> (f64, f64) {
    if t < tau {
        (0.0, 0.0)
    } else if t < tau + 2.0 * kap {
        let (h, hd) = h_unchecked(kap, l, t - tau);
        (-h / 2.0, -hd / 2.0)
    } else {
        let s = t - tau - 2.0 * kap;
        (-nb / 2.0 + l * s * s / 2.0, l * s)
    }
}

fn trap(l: f64, nb: f64, tau: f64, dt: f64, n: usize, certificate: Certificate) -> Result<AdversaryScenario> {
    let kap = kappa(l, nb);
    let t_end = tau + (2.0 + std::f64::consts::SQRT_2) * kap;
    build(
        dt,
        n,
        |t| {
            let (g, gd) = trap_g1(l, nb, kap, tau, t);
            let eta = if t <= t_end { (2.0 * g).clamp(-nb, nb) } else { nb };
            (-g, -gd, eta)
        },
        certificate,
    )
}

/// Scenario `f = −g₁`, `η = g₂` with measurements `u = g₁`. At
/// `T = τ + (2+√2)κ` the measurement slope is `+√(2NL)` while
/// `ḟ(T) = −√(2NL)`, so any exact differentiator errs by `2√(2NL)`.
pub fn exact_trap(accel_bound: f64, noise_bound: f64, tau: f64, dt: f64, horizon: f64) -> Result<AdversaryScenario> {
    positive("L", accel_bound)?;
    positive("N", noise_bound)?;
    non_negative("tau", tau)?;
    positive("dt", dt)?;
    let kap = kappa(accel_bound, noise_bound);
    let t_end = tau + (2.0 + std::f64::consts::SQRT_2) * kap;
    check_horizon(horizon, t_end)?;
    let cert = Certificate {
        construction: "exact-trap",
        instant: t_end,
        step: (t_end / dt).round() as usize,
        error: 2.0 * (2.0 * noise_bound * accel_bound).sqrt(),
        nontrivial: true,
        accel_bound,
        noise_bound,
    };
    trap(accel_bound, noise_bound, tau, dt, sample_count(horizon, dt), cert)
}

/// The exact trap shifted so that its certified instant lands on the grid
/// step `ℓ = max(r, ⌈(2+√2)κ/Δ⌉, 1)`. Certifies `2√(2NL) − LΔ/2` against
/// quasi-exact sample-based engines; nontrivial only when
/// `Δ ≤ 4(√2−1)√(N/L)`. The trace ends at step `ℓ`.
pub fn quasi_exact_trap(accel_bound: f64, noise_bound: f64, dt: f64, r: usize) -> Result<AdversaryScenario> {
    positive("L", accel_bound)?;
    non_negative("N", noise_bound)?;
    positive("dt", dt)?;
    let kap = kappa(accel_bound, noise_bound);
    let span = (2.0 + std::f64::consts::SQRT_2) * kap;
    let mut ell = (span / dt).ceil() as usize;
    while (ell as f64) * dt < span {
        ell += 1;
    }
    let ell = ell.max(r).max(1);
    let t_end = ell as f64 * dt;
    let tau = (t_end - span).max(0.0);
    let cert = Certificate {
        construction: "quasi-exact-trap",
        instant: t_end,
        step: ell,
        error: 2.0 * (2.0 * noise_bound * accel_bound).sqrt() - accel_bound * dt / 2.0,
        nontrivial: dt <= 4.0 * (std::f64::consts::SQRT_2 - 1.0) * kap,
        accel_bound,
        noise_bound,
    };
    trap(accel_bound, noise_bound, tau, dt, ell + 1, cert)
}

/// Coefficients `(a_j, b_j, c_j)` of the zero-measurement family:
/// `a₀ = 0`, `a_{j+1} = 1 − (1 − a_j)²/2`, `b_j = a_{j+1}`, `c_j = (1 − a_j)/4`.
pub fn zero_family_coefficients(count: usize) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::with_capacity(count);
    let mut a = 0.0f64;
    for _ in 0..count {
        let next = 1.0 - 0.5 * (1.0 - a) * (1.0 - a);
        out.push((a, next, (1.0 - a) / 4.0));
        a = next;
    }
    out
}

/// One arc `g_{a,b,c}` on `[0, Δ]` and its derivative. It vanishes at both
/// ends, starts with slope `aLΔ/2` and ends with slope `−bLΔ/2`.
pub fn zero_family_arc(a: f64, b: f64, c: f64, accel_bound: f64, dt: f64, t: f64) -> (f64, f64) {
    let l = accel_bound;
    if t < c * dt {
        (a * l * dt * t / 2.0 + l * t * t / 2.0, a * l * dt / 2.0 + l * t)
    } else if t < dt / 2.0 {
        let s = t - dt / 2.0;
        (b * l * dt * dt / 8.0 - l * s * s / 2.0, -l * s)
    } else {
        (b * l / 2.0 * t * (dt - t), b * l / 2.0 * (dt - 2.0 * t))
    }
}

/// `(f, ḟ)` of the zero-measurement signal at time `t ≥ 0`: arc `j` on
/// `[jΔ, (j+1)Δ]`, sign-alternated.
pub fn sampled_zero_eval(accel_bound: f64, dt: f64, coeffs: &[(f64, f64, f64)], t: f64) -> (f64, f64) {
    let j = ((t / dt).floor() as usize).min(coeffs.len() - 1);
    let (a, b, c) = coeffs[j];
    let (g, gd) = zero_family_arc(a, b, c, accel_bound, dt, t - j as f64 * dt);
    if j.is_multiple_of(2) {
        (g, gd)
    } else {
        (-g, -gd)
    }
}

/// Noise-free pair `±f` whose samples `f(kΔ)` are all exactly zero while
/// `|ḟ(kΔ)| = a_k·LΔ/2 → LΔ/2`.
pub fn sampled_zero_family(accel_bound: f64, dt: f64, n: usize) -> Result<[AdversaryScenario; 2]> {
    non_negative("L", accel_bound)?;
    positive("dt", dt)?;
    if n < 2 {
        return Err(crate::error::invalid("n", "need at least 2 samples"));
    }
    let coeffs = zero_family_coefficients(n);
    let last = n - 1;
    let cert = Certificate {
        construction: "sampled-zero",
        instant: last as f64 * dt,
        step: last,
        error: coeffs[last].0 * accel_bound * dt / 2.0,
        nontrivial: true,
        accel_bound,
        noise_bound: 0.0,
    };
    let make = |sign: f64| -> Result<AdversaryScenario> {
        let fdot: Vec<f64> = (0..n)
            .map(|k| {
                let alt = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * alt * coeffs[k].0 * accel_bound * dt / 2.0
            })
            .collect();
        let zeros = vec![0.0; n];
        let truth = SampledTrace::new(dt, zeros.clone(), Some(zeros.clone()), Some(fdot), None)?;
        let trace = compose(&truth, &zeros)?;
        Ok(AdversaryScenario { trace, certificate: cert.clone() })
    };
    Ok([make(1.0)?, make(-1.0)?])
}

/// Checks `|f_{k+1} − 2f_k + f_{k−1}| ≤ LΔ²` and `|η_k| ≤ N` with a relative
/// slack of `1e-9` (plus rounding of the sample values) and `1e-12`.
pub fn verify_membership(trace: &SampledTrace, accel_bound: f64, noise_bound: f64) -> Result<()> {
    if let Some(f) = &trace.f {
        let bound = accel_bound * trace.dt * trace.dt * (1.0 + 1e-9);
        for k in 1..f.len().saturating_sub(1) {
            let d2 = f[k + 1] - 2.0 * f[k] + f[k - 1];
            let scale = f[k + 1].abs() + 2.0 * f[k].abs() + f[k - 1].abs();
            if d2.abs() > bound + 4.0 * f64::EPSILON * scale {
                return Err(Error::Membership(format!(
                    "second difference {d2} at step {k} exceeds L*dt^2 = {}",
                    accel_bound * trace.dt * trace.dt
                )));
            }
        }
    }
    if let Some(eta) = &trace.noise {
        let bound = noise_bound * (1.0 + 1e-12);
        if let Some((k, v)) = eta.iter().enumerate().find(|(_, v)| v.abs() > bound) {
            return Err(Error::Membership(format!("noise {v} at step {k} exceeds N = {noise_bound}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_arc_values() {
        let (l, n): (f64, f64) = (2.0, 0.5);
        let kap = (n / l).sqrt();
        assert_eq!(h_arc(kap, l, 0.0).unwrap(), 0.0);
        assert!((h_arc(kap, l, 2.0 * kap).unwrap() - n).abs() < 1e-15);
        assert!((h_arc(kap, l, kap).unwrap() - l * kap * kap / 2.0).abs() < 1e-15);
        assert!(matches!(h_arc(kap, l, 2.0 * kap + 1e-9), Err(Error::OutOfDomain { .. })));
        assert!(h_arc(kap, l, -1e-9).is_err());
    }

    #[test]
    fn causal_pair_unit_example() {
        let [p, m] = causal_pair(1.0, 1.0, 0.0, 0.01, 5.0).unwrap();
        assert_eq!(p.certificate.instant, 4.0);
        assert_eq!(p.certificate.error, 2.0);
        let k = p.certificate.step;
        assert_eq!(k, 400);
        assert!((p.trace.fdot.as_ref().unwrap()[k] - 2.0).abs() < 1e-12);
        assert!((m.trace.fdot.as_ref().unwrap()[k] + 2.0).abs() < 1e-12);
        for i in 0..=k {
            assert_eq!(p.trace.u[i], 0.0);
            assert_eq!(p.trace.u[i].to_bits(), m.trace.u[i].to_bits());
        }
        assert!(causal_pair(1.0, 1.0, 0.0, 0.01, 3.9).is_err());
    }

    #[test]
    fn exact_trap_unit_example() {
        let s = exact_trap(1.0, 1.0, 0.0, 0.001, 4.0).unwrap();
        let t_end = 2.0 + std::f64::consts::SQRT_2;
        assert!((s.certificate.instant - t_end).abs() < 1e-12);
        assert!((s.certificate.error - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
        let kap = 1.0f64;
        let (_, gd) = trap_g1(1.0, 1.0, kap, 0.0, t_end);
        assert!((gd - std::f64::consts::SQRT_2).abs() < 1e-12);
        let eta = s.trace.noise.as_ref().unwrap();
        assert!(eta.iter().all(|v| v.abs() <= 1.0));
        assert_eq!(*eta.last().unwrap(), 1.0);
        assert!(exact_trap(1.0, 1.0, 0.0, 0.001, 3.0).is_err());
    }

    #[test]
    fn quasi_trap_levels() {
        let s = quasi_exact_trap(1.0, 0.08, 0.01, 0).unwrap();
        assert!((s.certificate.error - 0.795).abs() < 1e-12);
        assert!(s.certificate.nontrivial);
        assert_eq!(s.trace.len(), s.certificate.step + 1);
        let z = quasi_exact_trap(1.0, 0.0, 0.01, 0).unwrap();
        assert!((z.certificate.error + 0.005).abs() < 1e-15);
        assert!(!z.certificate.nontrivial);
        let far = quasi_exact_trap(1.0, 0.08, 0.01, 500).unwrap();
        assert_eq!(far.certificate.step, 500);
    }

    #[test]
    fn zero_family_coefficients_recurrence() {
        let c = zero_family_coefficients(21);
        let a: Vec<f64> = c.iter().map(|x| x.0).collect();
        assert_eq!(&a[..4], &[0.0, 0.5, 0.875, 0.9921875]);
        assert!(a.windows(2).all(|w| w[1] > w[0] || w[1] == 1.0));
        assert!(a[20] > 0.999999);
        for (j, &(aj, bj, cj)) in c.iter().enumerate().take(20) {
            assert_eq!(bj, a[j + 1]);
            assert_eq!(cj, (1.0 - aj) / 4.0);
        }
    }

    #[test]
    fn zero_family_arc_is_c1() {
        let (l, dt) = (1.7, 0.3);
        for &(a, b, c) in &zero_family_coefficients(6) {
            let eps = 1e-9;
            for knot in [c * dt, dt / 2.0] {
                let lo = zero_family_arc(a, b, c, l, dt, knot - eps);
                let hi = zero_family_arc(a, b, c, l, dt, knot);
                assert!((lo.0 - hi.0).abs() < 1e-8, "value jump at {knot}");
                assert!((lo.1 - hi.1).abs() < 1e-8, "slope jump at {knot}");
            }
            assert_eq!(zero_family_arc(a, b, c, l, dt, 0.0).0, 0.0);
            assert!(zero_family_arc(a, b, c, l, dt, dt).0.abs() < 1e-15);
        }
    }

    #[test]
    fn zero_family_samples_vanish() {
        let [p, m] = sampled_zero_family(1.0, 0.01, 8).unwrap();
        assert!(p.trace.u.iter().all(|&v| v == 0.0));
        assert!(m.trace.u.iter().all(|&v| v == 0.0));
        let fd = p.trace.fdot.as_ref().unwrap();
        assert!((fd[1] + 0.5 * 0.005).abs() < 1e-15);
        assert!((fd[2] - 0.875 * 0.005).abs() < 1e-15);
        assert!((p.certificate.error - zero_family_coefficients(8)[7].0 * 0.005).abs() < 1e-15);
        assert!(sampled_zero_family(1.0, 0.01, 1).is_err());
    }

    #[test]
    fn zero_family_dense_second_differences() {
        let (l, dt) = (1.0, 0.1);
        let coeffs = zero_family_coefficients(6);
        let h = dt / 200.0;
        let n = (5.0 * dt / h) as usize;
        let f: Vec<f64> = (0..n).map(|i| sampled_zero_eval(l, dt, &coeffs, i as f64 * h).0).collect();
        let dense = SampledTrace::new(h, f.clone(), Some(f), None, None).unwrap();
        verify_membership(&dense, l * (1.0 + 1e-6), 0.0).unwrap();
    }
}
