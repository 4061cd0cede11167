//! Runs scenarios through engines and measures worst-case errors.

use std::io::Write;

use rand_core::Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::adaptive::{AdaptiveDiagnostics, AdaptiveParams, WindowLength};
use crate::adversary::{self, AdversaryScenario, Certificate};
use crate::engines::{make_engine, Differentiator, EngineKind, EngineSpec, RedParams, RedScheme};
use crate::error::{invalid, Error, Result};
use crate::signal::{
    compose, gen_noise, gen_test_signal, random_member_fl, random_schedule, seeded_rng, Membership, NoiseScheduleSpec,
    SampledTrace, SignalClassParams, TestSignalSpec,
};

/// Derives an independent stream seed from a master seed.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    seeded_rng(master ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)).next_u64()
}

/// A worst-case construction used as the signal of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum AdversarySpec {
    /// `negate` picks the `f = −g₁` member of the pair.
    Causal {
        tau: f64,
        negate: bool,
    },
    ExactTrap {
        tau: f64,
    },
    SampledZero {
        negate: bool,
    },
    QuasiExactTrap {
        r: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SignalSource {
    Test(TestSignalSpec),
    /// Random bang-bang member of the class; the seed is derived from the
    /// run seed when absent.
    Random {
        seed: Option<u64>,
    },
    /// Adversaries carry their own noise; the scenario noise schedule is ignored.
    Adversary(AdversarySpec),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSpec {
    pub dt: f64,
    /// Samples are taken at `t_k < duration`.
    pub duration: f64,
    pub seed: u64,
    /// Start of the max-error statistic.
    pub t_start: f64,
}

impl RunSpec {
    pub fn samples(&self) -> usize {
        (self.duration / self.dt - 1e-9).ceil().max(1.0) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineEntry {
    /// Column prefix in CSV output.
    pub name: String,
    pub spec: EngineSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub class: SignalClassParams,
    pub signal: SignalSource,
    pub noise: NoiseScheduleSpec,
    pub engines: Vec<EngineEntry>,
    pub run: RunSpec,
}

fn valid_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let dt = self.run.dt;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid("run.dt", format!("must be > 0, got {dt}")));
        }
        if !(self.run.duration.is_finite() && self.run.duration > 0.0) {
            return Err(invalid("run.duration", "must be > 0"));
        }
        if !self.run.t_start.is_finite() {
            return Err(invalid("run.t_start", "must be finite"));
        }
        let same = |a: f64| (a - dt).abs() <= 1e-12 * dt;
        if !same(self.class.dt) {
            return Err(invalid("dt", "class and run sampling periods differ"));
        }
        if self.engines.is_empty() {
            return Err(invalid("engines", "need at least one engine"));
        }
        for (i, e) in self.engines.iter().enumerate() {
            if !valid_name(&e.name) {
                return Err(invalid("engines.name", format!("`{}` must be [A-Za-z0-9_.-]+", e.name)));
            }
            if self.engines[..i].iter().any(|o| o.name == e.name) {
                return Err(invalid("engines.name", format!("duplicate engine name `{}`", e.name)));
            }
            if !same(e.spec.dt()) {
                return Err(invalid("engines.dt", format!("engine `{}` does not share dt = {dt}", e.name)));
            }
        }
        Ok(())
    }

    /// SHA-256 over the canonical debug rendering of the scenario.
    pub fn config_hash(&self) -> String {
        hex::encode(Sha256::digest(format!("{self:?}").as_bytes()))
    }

    /// The input trace with truth and noise.
    pub fn build_trace(&self) -> Result<(SampledTrace, Option<Certificate>)> {
        let n = self.run.samples();
        let c = &self.class;
        let horizon = (n - 1) as f64 * c.dt;
        match &self.signal {
            SignalSource::Test(spec) => {
                let truth = gen_test_signal(spec, c, n, Membership::AccelAndInitial)?;
                let eta = gen_noise(&self.noise, c, n)?;
                Ok((compose(&truth, &eta)?, None))
            }
            SignalSource::Random { seed } => {
                let seed = seed.unwrap_or_else(|| derive_seed(self.run.seed, 0));
                let truth = random_member_fl(c.accel_bound, c.initial_bound, seed, c.dt, n)?;
                let eta = gen_noise(&self.noise, c, n)?;
                Ok((compose(&truth, &eta)?, None))
            }
            SignalSource::Adversary(spec) => {
                let (l, nb, dt) = (c.accel_bound, c.noise_bound, c.dt);
                let s: AdversaryScenario = match *spec {
                    AdversarySpec::Causal { tau, negate } => {
                        let [p, m] = adversary::causal_pair(l, nb, tau, dt, horizon)?;
                        if negate {
                            m
                        } else {
                            p
                        }
                    }
                    AdversarySpec::ExactTrap { tau } => adversary::exact_trap(l, nb, tau, dt, horizon)?,
                    AdversarySpec::SampledZero { negate } => {
                        let [p, m] = adversary::sampled_zero_family(l, dt, n)?;
                        if negate {
                            m
                        } else {
                            p
                        }
                    }
                    AdversarySpec::QuasiExactTrap { r } => {
                        let s = adversary::quasi_exact_trap(l, nb, dt, r)?;
                        if s.trace.len() > n {
                            return Err(Error::HorizonTooShort { horizon, needed: s.certificate.instant });
                        }
                        s
                    }
                };
                Ok((s.trace, Some(s.certificate)))
            }
        }
    }
}

/// Per-engine results.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineReport {
    pub name: String,
    pub kind: EngineKind,
    pub y: Vec<f64>,
    /// `e_k = |ḟ(t_k) − y_k|`.
    pub error: Vec<f64>,
    /// `M(t_k) = max_{j ≥ k} e_j`.
    pub suffix_max: Vec<f64>,
    pub adaptive: Option<Vec<AdaptiveDiagnostics>>,
}

impl EngineReport {
    /// `max e_k` over `t_k ≥ t` and the step where it occurs.
    pub fn max_error_from(&self, dt: f64, t: f64) -> Option<(f64, usize)> {
        let start = first_step_at(dt, t);
        let mut best: Option<(f64, usize)> = None;
        for (k, &e) in self.error.iter().enumerate().skip(start) {
            if best.is_none_or(|(b, _)| e > b) {
                best = Some((e, k));
            }
        }
        best
    }
}

/// First `k` with `k·dt ≥ t`, tolerant to rounding of `t/dt`.
pub fn first_step_at(dt: f64, t: f64) -> usize {
    if t <= 0.0 {
        0
    } else {
        (t / dt - 1e-9).ceil() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub trace: SampledTrace,
    pub engines: Vec<EngineReport>,
    pub certificate: Option<Certificate>,
    pub seed: u64,
    pub config_hash: String,
    pub t_start: f64,
}

pub const TRACE_CSV_VERSION: u32 = 1;

fn suffix_max(e: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; e.len()];
    let mut m = f64::NEG_INFINITY;
    for k in (0..e.len()).rev() {
        m = m.max(e[k]);
        out[k] = m;
    }
    out
}

/// Runs every engine of the scenario over the same input copy.
pub fn run_engines(trace: &SampledTrace, engines: &[EngineEntry], parallel: bool) -> Result<Vec<EngineReport>> {
    let fdot = trace.fdot.as_ref().ok_or_else(|| invalid("trace", "true derivative is required to measure errors"))?;
    let one = |entry: &EngineEntry| {
        let mut eng = make_engine(&entry.spec);
        let mut y = Vec::with_capacity(trace.len());
        let mut diags = (entry.spec.kind() == EngineKind::Adaptive).then(|| Vec::with_capacity(trace.len()));
        for &u in &trace.u {
            y.push(eng.step(u));
            if let Some(d) = diags.as_mut() {
                d.push(eng.diagnostics().and_then(|x| x.adaptive).expect("adaptive diagnostics"));
            }
        }
        let error: Vec<f64> = y.iter().zip(fdot).map(|(a, b)| (b - a).abs()).collect();
        EngineReport {
            name: entry.name.clone(),
            kind: entry.spec.kind(),
            suffix_max: suffix_max(&error),
            y,
            error,
            adaptive: diags,
        }
    };
    Ok(if parallel { engines.par_iter().map(one).collect() } else { engines.iter().map(one).collect() })
}

/// Builds the trace and runs all engines. Deterministic per scenario.
pub fn run_scenario(s: &Scenario) -> Result<ErrorReport> {
    run_scenario_with(s, true)
}

pub fn run_scenario_with(s: &Scenario, parallel: bool) -> Result<ErrorReport> {
    s.validate()?;
    let (trace, certificate) = s.build_trace()?;
    let engines = run_engines(&trace, &s.engines, parallel)?;
    Ok(ErrorReport {
        trace,
        engines,
        certificate,
        seed: s.run.seed,
        config_hash: s.config_hash(),
        t_start: s.run.t_start,
    })
}

/// Runs independent scenarios on the work pool. Results are in input order
/// and identical to a serial run.
pub fn run_scenarios(scenarios: &[Scenario], parallel: bool) -> Vec<Result<ErrorReport>> {
    if parallel {
        scenarios.par_iter().map(|s| run_scenario_with(s, false)).collect()
    } else {
        scenarios.iter().map(|s| run_scenario_with(s, false)).collect()
    }
}

fn opt(v: Option<&Vec<f64>>, k: usize) -> String {
    v.map_or_else(String::new, |x| x[k].to_string())
}

impl ErrorReport {
    pub fn engine(&self, name: &str) -> Option<&EngineReport> {
        self.engines.iter().find(|e| e.name == name)
    }

    pub fn trace_header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["k", "t", "u", "f", "fdot", "eta"].iter().map(|s| s.to_string()).collect();
        for e in &self.engines {
            h.push(format!("{}_y", e.name));
            h.push(format!("{}_e", e.name));
            if e.adaptive.is_some() {
                h.push(format!("{}_N_hat", e.name));
                h.push(format!("{}_gamma", e.name));
                h.push(format!("{}_T_hat", e.name));
            }
        }
        h
    }

    /// Full time series, one row per sample.
    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.trace_header())?;
        let tr = &self.trace;
        let mut row = Vec::new();
        for k in 0..tr.len() {
            row.clear();
            row.push(k.to_string());
            row.push(tr.time(k).to_string());
            row.push(tr.u[k].to_string());
            row.push(opt(tr.f.as_ref(), k));
            row.push(opt(tr.fdot.as_ref(), k));
            row.push(opt(tr.noise.as_ref(), k));
            for e in &self.engines {
                row.push(e.y[k].to_string());
                row.push(e.error[k].to_string());
                if let Some(d) = &e.adaptive {
                    row.push(d[k].n_hat.to_string());
                    row.push(d[k].gamma.to_string());
                    row.push(d[k].t_hat.to_string());
                }
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// One row per engine: max error for `t ≥ t_start` and where it occurs.
    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["engine", "kind", "t_start", "max_error", "t_at_max", "seed", "config_hash"])?;
        for e in &self.engines {
            let (m, k) = e
                .max_error_from(self.trace.dt, self.t_start)
                .map_or((String::new(), String::new()), |(m, k)| (m.to_string(), self.trace.time(k).to_string()));
            w.write_record([
                e.name.as_str(),
                e.kind.name(),
                &self.t_start.to_string(),
                &m,
                &k,
                &self.seed.to_string(),
                &self.config_hash,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Max errors for `t ≥ 10 s` reported for the benchmark scenario by the
/// original study of these engines, in engine order.
pub const REFERENCE_MAX_ERRORS: [(&str, f64); 3] = [("adaptive", 0.7939), ("red_1.1", 0.8135), ("red_1.96", 0.9374)];

/// Seed of the white-noise segment in the shipped benchmark.
pub const BENCHMARK_SEED: u64 = 2024;

/// The benchmark: `f(t) = t²/2 + t` (`L = R = 1`), `N = 0.08`, `Δ = 0.01`,
/// 35 s, the adaptive engine (`k̄ = 200`, `γ̄ = 2`) against implicit RED with
/// `(λ₁, λ₂) = (1.5, 1.1)` and `(2.8, 1.96)`; statistic from `t = 10`.
pub fn benchmark_scenario(seed: u64) -> Scenario {
    let (l, n, r, dt) = (1.0, 0.08, 1.0, 0.01);
    let class = SignalClassParams::new(l, n, r, dt).expect("valid");
    let engines = vec![
        EngineEntry {
            name: "adaptive".into(),
            spec: EngineSpec::Adaptive(AdaptiveParams::new(l, dt, WindowLength::Finite(200), 2.0).expect("valid")),
        },
        EngineEntry {
            name: "red_1.1".into(),
            spec: EngineSpec::Red(RedParams::new(1.5, 1.1, l, dt, RedScheme::Implicit).expect("valid")),
        },
        EngineEntry {
            name: "red_1.96".into(),
            spec: EngineSpec::Red(RedParams::new(2.8, 1.96, l, dt, RedScheme::Implicit).expect("valid")),
        },
    ];
    Scenario {
        class,
        signal: SignalSource::Test(TestSignalSpec::RampParabola),
        noise: NoiseScheduleSpec::benchmark_timetable(n, derive_seed(seed, 1)),
        engines,
        run: RunSpec { dt, duration: 35.0, seed, t_start: 10.0 },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub engine: String,
    pub max_error: f64,
    pub t_at_max: f64,
    pub reference: Option<f64>,
}

/// Runs a benchmark-style scenario and tabulates the max error per engine.
pub fn reproduce_benchmark(s: &Scenario) -> Result<(ErrorReport, Vec<BenchmarkRow>)> {
    let report = run_scenario(s)?;
    let rows = report
        .engines
        .iter()
        .map(|e| {
            let (m, k) = e.max_error_from(report.trace.dt, report.t_start).unwrap_or((f64::NAN, 0));
            BenchmarkRow {
                engine: e.name.clone(),
                max_error: m,
                t_at_max: report.trace.time(k),
                reference: REFERENCE_MAX_ERRORS.iter().find(|(n, _)| *n == e.name).map(|x| x.1),
            }
        })
        .collect();
    Ok((report, rows))
}

pub fn write_benchmark_csv<W: Write>(rows: &[BenchmarkRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["engine", "max_error", "t_at_max", "reference"])?;
    for r in rows {
        w.write_record([
            r.engine.clone(),
            r.max_error.to_string(),
            r.t_at_max.to_string(),
            r.reference.map_or_else(String::new, |v| v.to_string()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Grid of `(L, N, Δ)` cells for the worst-case band check.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub accel_bounds: Vec<f64>,
    pub noise_bounds: Vec<f64>,
    pub dts: Vec<f64>,
    pub gamma_bar: f64,
    /// Crude noise ceiling `N̄` used to size the window; defaults to the
    /// largest `N` of the grid.
    pub noise_ceiling: Option<f64>,
    pub draws: usize,
    pub seed: u64,
    pub initial_bound: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            accel_bounds: vec![1.0],
            noise_bounds: vec![0.0, 0.02, 0.08],
            dts: vec![0.04, 0.02, 0.01, 0.005],
            gamma_bar: 2.0,
            noise_ceiling: None,
            draws: 200,
            seed: 1,
            initial_bound: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub accel_bound: f64,
    pub noise_bound: f64,
    pub dt: f64,
    pub k_bar: usize,
    /// First step with `kΔ ≥ 2√(N/L)` and `k ≥ 1` (`y₀ = 0` is never exact).
    pub k_start: usize,
    pub empirical: f64,
    /// Which input produced `empirical`.
    pub worst_input: String,
    /// `2√(2NL) − LΔ/2`.
    pub lower_edge: f64,
    /// `2√(2NL) + LΔ/2`.
    pub upper_edge: f64,
    /// `empirical ≤ upper_edge + LΔ`.
    pub pass: bool,
}

/// Adaptive parameters the sweep uses for a cell.
pub fn sweep_params(l: f64, dt: f64, noise_ceiling: f64, gamma_bar: f64) -> Result<AdaptiveParams> {
    let tuned = AdaptiveParams::tuned(l, dt, noise_ceiling)?;
    AdaptiveParams::new(l, dt, tuned.window, gamma_bar)
}

/// Max error of the adaptive engine over `k ≥ k_start`.
pub fn adaptive_max_error(params: &AdaptiveParams, trace: &SampledTrace, k_start: usize) -> f64 {
    let fdot = trace.fdot.as_ref().expect("truth present");
    let mut eng = make_engine(&EngineSpec::Adaptive(*params));
    let mut best = f64::NEG_INFINITY;
    for (k, &u) in trace.u.iter().enumerate() {
        let y = eng.step(u);
        if k >= k_start {
            best = best.max((fdot[k] - y).abs());
        }
    }
    best
}

/// The adversary inputs used for one cell, labelled.
pub fn adversary_corpus(l: f64, n: f64, dt: f64, k_start: usize, k_bar: usize) -> Result<Vec<(String, SampledTrace)>> {
    let mut out = Vec::new();
    let horizon_steps = k_start.max(k_bar) + (4.0 * (n / l).sqrt() / dt).ceil() as usize + k_bar + 8;
    let horizon = horizon_steps as f64 * dt;
    for r in [0, k_start, k_start + 1, k_start + k_bar / 2, k_start + k_bar + 3] {
        let s = adversary::quasi_exact_trap(l, n, dt, r)?;
        out.push((format!("quasi-exact-trap r={r}"), s.trace));
    }
    if n > 0.0 {
        for frac in [0.0, 0.25, 0.5, 0.75] {
            let tau = (k_start as f64 + frac) * dt;
            let s = adversary::exact_trap(l, n, tau, dt, horizon + tau)?;
            out.push((format!("exact-trap tau={tau}"), s.trace));
            let [p, m] = adversary::causal_pair(l, n, tau, dt, horizon + tau)?;
            out.push((format!("causal+ tau={tau}"), p.trace));
            out.push((format!("causal- tau={tau}"), m.trace));
        }
    }
    let [p, m] = adversary::sampled_zero_family(l, dt, horizon_steps.max(2))?;
    out.push(("sampled-zero+".into(), p.trace));
    out.push(("sampled-zero-".into(), m.trace));
    Ok(out)
}

/// One random `(f, η)` draw for a cell.
pub fn random_draw(l: f64, n: f64, r: f64, dt: f64, steps: usize, seed: u64) -> Result<SampledTrace> {
    let class = SignalClassParams::new(l, n, r, dt)?;
    let truth = random_member_fl(l, r, derive_seed(seed, 0), dt, steps)?;
    let sched = random_schedule(n, derive_seed(seed, 1), steps as f64 * dt)?;
    let eta = gen_noise(&sched, &class, steps)?;
    compose(&truth, &eta)
}

/// Empirical worst-case error per cell against the band
/// `[2√(2NL) − LΔ/2, 2√(2NL) + LΔ/2]`.
pub fn worst_case_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.accel_bounds.is_empty() || cfg.noise_bounds.is_empty() || cfg.dts.is_empty() {
        return Err(invalid("sweep", "empty grid"));
    }
    let n_bar = cfg.noise_ceiling.unwrap_or_else(|| cfg.noise_bounds.iter().copied().fold(0.0, f64::max));
    let mut cells = Vec::new();
    for &l in &cfg.accel_bounds {
        for &n in &cfg.noise_bounds {
            for &dt in &cfg.dts {
                cells.push((l, n, dt));
            }
        }
    }
    cells
        .par_iter()
        .enumerate()
        .map(|(idx, &(l, n, dt))| {
            let params = sweep_params(l, dt, n_bar, cfg.gamma_bar)?;
            let WindowLength::Finite(k_bar) = params.window else { unreachable!("tuned window is finite") };
            let k_start = first_step_at(dt, 2.0 * (n / l).sqrt()).max(1);
            let mut inputs = adversary_corpus(l, n, dt, k_start, k_bar)?;
            let steps = 3 * k_start.max(k_bar) + 50;
            let cell_seed = derive_seed(cfg.seed, idx as u64);
            for d in 0..cfg.draws {
                let tr = random_draw(l, n, cfg.initial_bound, dt, steps, derive_seed(cell_seed, d as u64))?;
                inputs.push((format!("random #{d}"), tr));
            }
            let (empirical, worst_input) = inputs
                .par_iter()
                .map(|(label, tr)| (adaptive_max_error(&params, tr, k_start), label.clone()))
                .reduce(|| (f64::NEG_INFINITY, String::new()), |a, b| if b.0 > a.0 { b } else { a });
            let opt = 2.0 * (2.0 * n * l).sqrt();
            let upper_edge = opt + l * dt / 2.0;
            Ok(SweepRow {
                accel_bound: l,
                noise_bound: n,
                dt,
                k_bar,
                k_start,
                empirical,
                worst_input,
                lower_edge: opt - l * dt / 2.0,
                upper_edge,
                pass: empirical <= upper_edge + l * dt,
            })
        })
        .collect()
}

/// SHA-256 over the canonical debug rendering of a sweep config.
pub fn sweep_config_hash(cfg: &SweepConfig) -> String {
    hex::encode(Sha256::digest(format!("{cfg:?}").as_bytes()))
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "L",
        "N",
        "dt",
        "k_bar",
        "k_start",
        "empirical",
        "worst_input",
        "lower_edge",
        "upper_edge",
        "pass",
    ])?;
    for r in rows {
        w.write_record([
            r.accel_bound.to_string(),
            r.noise_bound.to_string(),
            r.dt.to_string(),
            r.k_bar.to_string(),
            r.k_start.to_string(),
            r.empirical.to_string(),
            r.worst_input.clone(),
            r.lower_edge.to_string(),
            r.upper_edge.to_string(),
            r.pass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engines::FiniteDifferenceParams;

    fn zero_scenario() -> Scenario {
        let dt = 0.01;
        let class = SignalClassParams::new(1.0, 0.0, 0.0, dt).unwrap();
        Scenario {
            class,
            signal: SignalSource::Test(TestSignalSpec::Polynomial { coeffs: vec![0.0] }),
            noise: NoiseScheduleSpec::constant(0.0, 2.0).unwrap(),
            engines: vec![
                EngineEntry {
                    name: "adaptive".into(),
                    spec: EngineSpec::Adaptive(AdaptiveParams::tuned(1.0, dt, 0.01).unwrap()),
                },
                EngineEntry {
                    name: "fd".into(),
                    spec: EngineSpec::FiniteDifference(FiniteDifferenceParams::new(1.0, 0.01, dt).unwrap()),
                },
                EngineEntry {
                    name: "red".into(),
                    spec: EngineSpec::Red(RedParams::new(1.5, 1.1, 1.0, dt, RedScheme::Explicit).unwrap()),
                },
            ],
            run: RunSpec { dt, duration: 2.0, seed: 0, t_start: 0.0 },
        }
    }

    #[test]
    fn zero_everything_gives_zero_error() {
        let rep = run_scenario(&zero_scenario()).unwrap();
        assert_eq!(rep.trace.len(), 200);
        for e in &rep.engines {
            assert!(e.error.iter().all(|&x| x == 0.0), "{}", e.name);
        }
    }

    #[test]
    fn suffix_max_is_non_increasing() {
        let m = suffix_max(&[1.0, 3.0, 2.0, 0.5]);
        assert_eq!(m, vec![3.0, 3.0, 2.0, 0.5]);
    }

    #[test]
    fn validation_catches_mismatched_dt_and_names() {
        let mut s = zero_scenario();
        s.engines[1].spec = EngineSpec::FiniteDifference(FiniteDifferenceParams::new(1.0, 0.01, 0.02).unwrap());
        assert!(run_scenario(&s).is_err());
        let mut s = zero_scenario();
        s.engines[1].name = "adaptive".into();
        assert!(s.validate().is_err());
        let mut s = zero_scenario();
        s.engines[1].name = "a,b".into();
        assert!(s.validate().is_err());
    }

    #[test]
    fn csv_header_is_stable() {
        let rep = run_scenario(&zero_scenario()).unwrap();
        assert_eq!(
            rep.trace_header().join(","),
            "k,t,u,f,fdot,eta,adaptive_y,adaptive_e,adaptive_N_hat,adaptive_gamma,adaptive_T_hat,fd_y,fd_e,red_y,red_e"
        );
    }

    #[test]
    fn first_step_rounding() {
        assert_eq!(first_step_at(0.01, 10.0), 1000);
        assert_eq!(first_step_at(0.01, 0.0), 0);
        assert_eq!(first_step_at(0.01, 0.005), 1);
    }

    #[test]
    fn config_hash_tracks_content() {
        let a = zero_scenario();
        let mut b = zero_scenario();
        assert_eq!(a.config_hash(), b.config_hash());
        b.run.seed = 1;
        assert_ne!(a.config_hash(), b.config_hash());
        assert_eq!(a.config_hash().len(), 64);
    }
}
