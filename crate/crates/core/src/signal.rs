//! Problem instances: ground-truth signals with bounded second derivative,
//! bounded noise, and their sampled composition `u = f + η`.
//!
//! Everything here is sampled at construction on the grid `t_k = k·dt`.
//! Randomness comes from xoshiro256++ seeded through SplitMix64
//! (`Xoshiro256PlusPlus::seed_from_u64`), and a uniform draw on `[0, 1)` is
//! always `(next_u64 >> 11) · 2⁻⁵³`, so traces can be regenerated bit-exactly
//! from another language.

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{invalid, Error, Result};

/// Bounds `(L, N, R)` and sampling period `Δ` of a problem instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalClassParams {
    /// `L`: bound on `|f̈|`.
    pub accel_bound: f64,
    /// `N`: bound on `|η|`.
    pub noise_bound: f64,
    /// `R`: bound on `|f(0)|` and `|ḟ(0)|`.
    pub initial_bound: f64,
    /// `Δ`: sampling period in seconds.
    pub dt: f64,
}

impl SignalClassParams {
    pub fn new(accel_bound: f64, noise_bound: f64, initial_bound: f64, dt: f64) -> Result<Self> {
        non_negative("L", accel_bound)?;
        non_negative("N", noise_bound)?;
        non_negative("R", initial_bound)?;
        positive("dt", dt)?;
        Ok(Self { accel_bound, noise_bound, initial_bound, dt })
    }
}

pub(crate) fn non_negative(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and >= 0, got {v}")))
    }
}

pub(crate) fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {v}")))
    }
}

/// Time-aligned samples at `t_k = k·dt`.
///
/// `u` is always present; the ground truth (`f`, `fdot`) and the noise
/// realization are present when the trace was synthesized.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTrace {
    pub dt: f64,
    pub u: Vec<f64>,
    pub f: Option<Vec<f64>>,
    pub fdot: Option<Vec<f64>>,
    pub noise: Option<Vec<f64>>,
}

impl SampledTrace {
    pub fn new(
        dt: f64,
        u: Vec<f64>,
        f: Option<Vec<f64>>,
        fdot: Option<Vec<f64>>,
        noise: Option<Vec<f64>>,
    ) -> Result<Self> {
        positive("dt", dt)?;
        for other in [&f, &fdot, &noise].into_iter().flatten() {
            if other.len() != u.len() {
                return Err(Error::LengthMismatch { left: u.len(), right: other.len() });
            }
        }
        Ok(Self { dt, u, f, fdot, noise })
    }

    /// A measurement-only trace.
    pub fn measurements(dt: f64, u: Vec<f64>) -> Result<Self> {
        Self::new(dt, u, None, None, None)
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }
}

/// One acceleration switch of a bang-bang signal: from `at` on, `f̈ = accel`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Switch {
    pub at: f64,
    pub accel: f64,
}

/// Analytic test signal.
#[derive(Debug, Clone, PartialEq)]
pub enum TestSignalSpec {
    /// `f(t) = Σ coeffs[i]·tⁱ`.
    Polynomial { coeffs: Vec<f64> },
    /// Piecewise-constant acceleration. Before the first switch `f̈ = 0`.
    BangBang { initial_value: f64, initial_slope: f64, switches: Vec<Switch> },
    /// `f(t) = L·t²/2 + R·t` with `L`, `R` taken from the class parameters.
    RampParabola,
}

/// Which class a generated signal must provably belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    /// `|f̈| ≤ L` only.
    Accel,
    /// `|f̈| ≤ L` and `|f(0)|, |ḟ(0)| ≤ R`.
    AccelAndInitial,
}

#[derive(Debug, Clone, Copy)]
struct Knot {
    t: f64,
    f: f64,
    v: f64,
    a: f64,
}

/// Exact evaluator for a piecewise-quadratic signal.
#[derive(Debug, Clone)]
pub(crate) struct PiecewiseQuadratic {
    knots: Vec<Knot>,
}

impl PiecewiseQuadratic {
    pub(crate) fn new(initial_value: f64, initial_slope: f64, switches: &[Switch]) -> Result<Self> {
        let mut knots = vec![Knot { t: 0.0, f: initial_value, v: initial_slope, a: 0.0 }];
        for sw in switches {
            if !sw.at.is_finite() || !sw.accel.is_finite() || sw.at < 0.0 {
                return Err(invalid("switches", format!("bad switch {sw:?}")));
            }
            let last = *knots.last().expect("non-empty");
            if sw.at < last.t {
                return Err(invalid("switches", "switch times must be non-decreasing"));
            }
            let s = sw.at - last.t;
            let next =
                Knot { t: sw.at, f: last.f + last.v * s + 0.5 * last.a * s * s, v: last.v + last.a * s, a: sw.accel };
            if s == 0.0 {
                *knots.last_mut().expect("non-empty") = next;
            } else {
                knots.push(next);
            }
        }
        Ok(Self { knots })
    }

    pub(crate) fn eval(&self, t: f64) -> (f64, f64) {
        let idx = self.knots.partition_point(|k| k.t <= t).saturating_sub(1);
        let k = self.knots[idx];
        let s = t - k.t;
        (k.f + k.v * s + 0.5 * k.a * s * s, k.v + k.a * s)
    }
}

fn poly_eval(coeffs: &[f64], t: f64) -> (f64, f64, f64) {
    let mut f = 0.0;
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for &c in coeffs.iter().rev() {
        d2 = d2 * t + 2.0 * d1;
        d1 = d1 * t + f;
        f = f * t + c;
    }
    (f, d1, d2)
}

/// Samples an analytic test signal. The returned trace has `u = f`.
pub fn gen_test_signal(
    spec: &TestSignalSpec,
    params: &SignalClassParams,
    n: usize,
    membership: Membership,
) -> Result<SampledTrace> {
    if n == 0 {
        return Err(invalid("n", "need at least one sample"));
    }
    let l = params.accel_bound;
    let dt = params.dt;
    let (f0, fdot0) = match spec {
        TestSignalSpec::Polynomial { coeffs } => {
            if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
                return Err(invalid("coeffs", "need a non-empty list of finite coefficients"));
            }
            (coeffs[0], coeffs.get(1).copied().unwrap_or(0.0))
        }
        TestSignalSpec::BangBang { initial_value, initial_slope, switches } => {
            if let Some(sw) = switches.iter().find(|sw| sw.accel.abs() > l) {
                return Err(Error::Membership(format!(
                    "bang-bang acceleration {} at t={} exceeds L={l}",
                    sw.accel, sw.at
                )));
            }
            (*initial_value, *initial_slope)
        }
        TestSignalSpec::RampParabola => (0.0, params.initial_bound),
    };
    if membership == Membership::AccelAndInitial {
        let r = params.initial_bound;
        if f0.abs() > r || fdot0.abs() > r {
            return Err(Error::Membership(format!("initial conditions f(0)={f0}, f'(0)={fdot0} exceed R={r}")));
        }
    }

    let mut f = Vec::with_capacity(n);
    let mut fdot = Vec::with_capacity(n);
    match spec {
        TestSignalSpec::Polynomial { coeffs } => {
            // f̈ is checked on a 4x refined grid; exact for degree <= 2.
            let fine = 4 * (n - 1) + 1;
            for i in 0..fine {
                let t = i as f64 * dt / 4.0;
                let (_, _, acc) = poly_eval(coeffs, t);
                if acc.abs() > l * (1.0 + 1e-12) {
                    return Err(Error::Membership(format!("polynomial has |f''({t})| = {} > L = {l}", acc.abs())));
                }
            }
            for k in 0..n {
                let (v, d, _) = poly_eval(coeffs, k as f64 * dt);
                f.push(v);
                fdot.push(d);
            }
        }
        TestSignalSpec::BangBang { initial_value, initial_slope, switches } => {
            let pw = PiecewiseQuadratic::new(*initial_value, *initial_slope, switches)?;
            for k in 0..n {
                let (v, d) = pw.eval(k as f64 * dt);
                f.push(v);
                fdot.push(d);
            }
        }
        TestSignalSpec::RampParabola => {
            let r = params.initial_bound;
            for k in 0..n {
                let t = k as f64 * dt;
                f.push(0.5 * l * t * t + r * t);
                fdot.push(l * t + r);
            }
        }
    }
    SampledTrace::new(dt, f.clone(), Some(f), Some(fdot), None)
}

/// Shape of one noise segment. Levels are absolute, times are relative to the
/// segment start.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseKind {
    Constant {
        level: f64,
    },
    /// `N − (1 + factor)·L·s²/2`, held at `−N` once it reaches it.
    ParabolaArc {
        factor: f64,
    },
    /// `from` before offset `at`, `to` from `at` on.
    Step {
        from: f64,
        to: f64,
        at: f64,
    },
    /// Independent draws, uniform on `[−N, N)`.
    UniformWhite {
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSegment {
    pub start: f64,
    pub duration: f64,
    pub kind: NoiseKind,
}

impl NoiseSegment {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }
}

/// Ordered, disjoint noise segments.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseScheduleSpec {
    segments: Vec<NoiseSegment>,
}

const TIME_EPS: f64 = 1e-9;

impl NoiseScheduleSpec {
    pub fn new(segments: Vec<NoiseSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Schedule("no segments".into()));
        }
        for (i, seg) in segments.iter().enumerate() {
            if !seg.start.is_finite() || seg.start < 0.0 {
                return Err(Error::Schedule(format!("segment {i}: bad start {}", seg.start)));
            }
            if !seg.duration.is_finite() || seg.duration <= 0.0 {
                return Err(Error::Schedule(format!("segment {i}: bad duration {}", seg.duration)));
            }
            if let Some(prev) = i.checked_sub(1).map(|p| &segments[p]) {
                if seg.start < prev.end() - TIME_EPS {
                    return Err(Error::Schedule(format!(
                        "segment {i} starts at {} before segment {} ends at {}",
                        seg.start,
                        i - 1,
                        prev.end()
                    )));
                }
            }
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[NoiseSegment] {
        &self.segments
    }

    pub fn end(&self) -> f64 {
        self.segments.last().map_or(0.0, NoiseSegment::end)
    }

    /// The constant-noise schedule covering `[0, duration)`.
    pub fn constant(level: f64, duration: f64) -> Result<Self> {
        Self::new(vec![NoiseSegment { start: 0.0, duration, kind: NoiseKind::Constant { level } }])
    }

    /// Default simulation timetable (35 s): a constant lead-in while the
    /// sliding-mode baselines converge, the two parabola arcs shaped after
    /// RED gains `λ₂ = 1.1` and `λ₂ = 1.96`, two jumps from `−N` to `N`, and
    /// a closing stretch of uniform white noise.
    pub fn benchmark_timetable(noise_bound: f64, white_seed: u64) -> Self {
        let n = noise_bound;
        let seg = |start: f64, end: f64, kind| NoiseSegment { start, duration: end - start, kind };
        Self::new(vec![
            seg(0.0, 12.0, NoiseKind::Constant { level: n }),
            seg(12.0, 16.0, NoiseKind::ParabolaArc { factor: 1.1 }),
            seg(16.0, 18.0, NoiseKind::Constant { level: n }),
            seg(18.0, 22.0, NoiseKind::ParabolaArc { factor: 1.96 }),
            seg(22.0, 26.0, NoiseKind::Step { from: -n, to: n, at: 2.0 }),
            seg(26.0, 30.0, NoiseKind::Step { from: -n, to: n, at: 2.0 }),
            seg(30.0, 35.0, NoiseKind::UniformWhite { seed: white_seed }),
        ])
        .expect("static timetable is valid")
    }
}

pub fn seeded_rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Uniform on `[0, 1)` with 53 random bits.
pub fn unit_draw(rng: &mut impl Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn uniform_draw(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit_draw(rng)
}

fn check_level(i: usize, name: &str, level: f64, n: f64) -> Result<()> {
    if !level.is_finite() || level.abs() > n {
        return Err(Error::Schedule(format!("segment {i}: {name} = {level} outside [-N, N] with N = {n}")));
    }
    Ok(())
}

/// Samples the noise schedule at `t_k = k·dt` for `k < n`.
pub fn gen_noise(schedule: &NoiseScheduleSpec, params: &SignalClassParams, n: usize) -> Result<Vec<f64>> {
    let nb = params.noise_bound;
    let l = params.accel_bound;
    let dt = params.dt;
    let eps = TIME_EPS * dt.max(1.0);
    let segs = schedule.segments();

    for (i, seg) in segs.iter().enumerate() {
        match seg.kind {
            NoiseKind::Constant { level } => check_level(i, "level", level, nb)?,
            NoiseKind::Step { from, to, at } => {
                check_level(i, "from", from, nb)?;
                check_level(i, "to", to, nb)?;
                if !at.is_finite() || at < 0.0 || at > seg.duration {
                    return Err(Error::Schedule(format!(
                        "segment {i}: step offset {at} outside [0, {}]",
                        seg.duration
                    )));
                }
            }
            NoiseKind::ParabolaArc { factor } => {
                if !factor.is_finite() || factor < 0.0 {
                    return Err(Error::Schedule(format!("segment {i}: arc factor {factor} must be >= 0")));
                }
            }
            NoiseKind::UniformWhite { .. } => {}
        }
        if i == 0 && seg.start > eps {
            return Err(Error::Schedule(format!("uncovered gap [0, {})", seg.start)));
        }
        if i > 0 && seg.start > segs[i - 1].end() + eps {
            return Err(Error::Schedule(format!("uncovered gap [{}, {})", segs[i - 1].end(), seg.start)));
        }
    }

    let mut out = Vec::with_capacity(n);
    let mut idx = 0;
    let mut white: Option<Xoshiro256PlusPlus> = None;
    for k in 0..n {
        let t = k as f64 * dt;
        while idx < segs.len() && t >= segs[idx].end() - eps {
            idx += 1;
            white = None;
        }
        let Some(seg) = segs.get(idx) else {
            return Err(Error::Schedule(format!("sample at t = {t} is not covered")));
        };
        let s = (t - seg.start).max(0.0);
        let v = match seg.kind {
            NoiseKind::Constant { level } => level,
            NoiseKind::ParabolaArc { factor } => (nb - (1.0 + factor) * l * s * s / 2.0).max(-nb),
            NoiseKind::Step { from, to, at } => {
                if s < at - eps {
                    from
                } else {
                    to
                }
            }
            NoiseKind::UniformWhite { seed } => {
                let rng = white.get_or_insert_with(|| seeded_rng(seed));
                nb * (2.0 * unit_draw(rng) - 1.0)
            }
        };
        debug_assert!(v.abs() <= nb);
        out.push(v);
    }
    Ok(out)
}

/// `u = f + η`, sample by sample. Truth and noise are carried along.
pub fn compose(f_trace: &SampledTrace, noise: &[f64]) -> Result<SampledTrace> {
    if noise.len() != f_trace.len() {
        return Err(Error::LengthMismatch { left: f_trace.len(), right: noise.len() });
    }
    let f = f_trace.f.clone().unwrap_or_else(|| f_trace.u.clone());
    let u = f.iter().zip(noise).map(|(a, b)| a + b).collect();
    SampledTrace::new(f_trace.dt, u, Some(f), f_trace.fdot.clone(), Some(noise.to_vec()))
}

/// Random bang-bang member of `F_L^R`: `f̈ = ±L` with random switch times,
/// `f(0)`, `ḟ(0)` uniform on `[−R, R]`.
pub fn random_member_fl(accel_bound: f64, initial_bound: f64, seed: u64, dt: f64, n: usize) -> Result<SampledTrace> {
    let params = SignalClassParams::new(accel_bound, 0.0, initial_bound, dt)?;
    let mut rng = seeded_rng(seed);
    let r = initial_bound;
    let f0 = uniform_draw(&mut rng, -r, r);
    let fdot0 = uniform_draw(&mut rng, -r, r);
    let horizon = (n.max(1) - 1) as f64 * dt;
    // Typical switch spacing between 1% and 100% of the horizon, never below dt/2.
    let scale = (horizon * 10f64.powf(-2.0 * unit_draw(&mut rng))).max(dt);
    let mut switches = Vec::new();
    let mut t = 0.0;
    while t <= horizon {
        let sign = if rng.next_u64() & 1 == 0 { 1.0 } else { -1.0 };
        switches.push(Switch { at: t, accel: sign * accel_bound });
        t += scale * (0.05 + unit_draw(&mut rng)).max(0.5 * dt / scale);
    }
    let spec = TestSignalSpec::BangBang { initial_value: f0, initial_slope: fdot0, switches };
    gen_test_signal(&spec, &params, n, Membership::AccelAndInitial)
}

/// Random noise schedule in `E_N` covering `[0, duration)`: a mix of constant
/// levels, steps, parabola arcs and white-noise stretches.
pub fn random_schedule(noise_bound: f64, seed: u64, duration: f64) -> Result<NoiseScheduleSpec> {
    let mut rng = seeded_rng(seed);
    let n = noise_bound;
    let mut segments = Vec::new();
    let mut start = 0.0;
    let pick_level = |rng: &mut Xoshiro256PlusPlus| {
        if unit_draw(rng) < 0.4 {
            if rng.next_u64() & 1 == 0 {
                n
            } else {
                -n
            }
        } else {
            uniform_draw(rng, -n, n)
        }
    };
    while start < duration {
        let len = (duration * uniform_draw(&mut rng, 0.05, 0.4)).max(f64::MIN_POSITIVE);
        let kind = match rng.next_u64() % 4 {
            0 => NoiseKind::Constant { level: pick_level(&mut rng) },
            1 => NoiseKind::Step {
                from: pick_level(&mut rng),
                to: pick_level(&mut rng),
                at: uniform_draw(&mut rng, 0.0, len),
            },
            2 => NoiseKind::ParabolaArc { factor: uniform_draw(&mut rng, 0.0, 3.0) },
            _ => NoiseKind::UniformWhite { seed: rng.next_u64() },
        };
        segments.push(NoiseSegment { start, duration: len, kind });
        start += len;
    }
    NoiseScheduleSpec::new(segments)
}
