//! TOML scenario and sweep files (schema version 1).
//!
//! ```toml
//! version = 1
//!
//! [signal]
//! kind = "ramp-parabola"   # ramp-parabola | polynomial | bang-bang | random | adversary
//! L = 1.0
//! R = 1.0
//!
//! [noise]
//! N = 0.08
//! preset = "benchmark"     # or a list of [[noise.segments]]
//!
//! [run]
//! dt = 0.01
//! duration = 35.0
//! seed = 2024
//! t_start = 10.0
//!
//! [[engines]]
//! name = "adaptive"
//! kind = "adaptive"
//! k_bar = 200              # integer >= 2 or "inf"; omit to tune from n_bar
//! gamma_bar = 2.0
//! ```
//!
//! Validation collects every problem with its key path before failing.

use toml::{Table, Value};

use crate::adaptive::{AdaptiveParams, GammaPolicy, WindowLength};
use crate::engines::{EngineKind, EngineSpec, FiniteDifferenceParams, RedParams, RedScheme};
use crate::error::{ConfigIssue, Error, Result};
use crate::harness::{derive_seed, AdversarySpec, EngineEntry, RunSpec, Scenario, SignalSource, SweepConfig};
use crate::signal::{NoiseKind, NoiseScheduleSpec, NoiseSegment, SignalClassParams, Switch, TestSignalSpec};

pub const SCHEMA_VERSION: i64 = 1;

#[derive(Default)]
struct Ctx {
    issues: Vec<ConfigIssue>,
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

impl Ctx {
    fn issue(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.issues.push(ConfigIssue { path: path.into(), message: message.into() });
    }

    fn allow(&mut self, t: &Table, path: &str, keys: &[&str]) {
        for k in t.keys() {
            if !keys.contains(&k.as_str()) {
                self.issue(join(path, k), "unknown key");
            }
        }
    }

    fn table<'a>(&mut self, t: &'a Table, path: &str, key: &str) -> Option<&'a Table> {
        match t.get(key) {
            Some(Value::Table(x)) => Some(x),
            Some(_) => {
                self.issue(join(path, key), "expected a table");
                None
            }
            None => {
                self.issue(join(path, key), "missing required table");
                None
            }
        }
    }

    fn num_opt(&mut self, t: &Table, path: &str, key: &str) -> Option<f64> {
        match t.get(key)? {
            Value::Float(x) if x.is_finite() => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            _ => {
                self.issue(join(path, key), "expected a finite number");
                None
            }
        }
    }

    fn num(&mut self, t: &Table, path: &str, key: &str) -> Option<f64> {
        if !t.contains_key(key) {
            self.issue(join(path, key), "missing required key");
            return None;
        }
        self.num_opt(t, path, key)
    }

    fn num_where(&mut self, t: &Table, path: &str, key: &str, ok: fn(f64) -> bool, what: &str) -> Option<f64> {
        let v = self.num(t, path, key)?;
        if ok(v) {
            Some(v)
        } else {
            self.issue(join(path, key), format!("must be {what}, got {v}"));
            None
        }
    }

    fn uint_opt(&mut self, t: &Table, path: &str, key: &str) -> Option<u64> {
        match t.get(key)? {
            Value::Integer(i) if *i >= 0 => Some(*i as u64),
            _ => {
                self.issue(join(path, key), "expected a non-negative integer");
                None
            }
        }
    }

    fn str_opt<'a>(&mut self, t: &'a Table, path: &str, key: &str) -> Option<&'a str> {
        match t.get(key)? {
            Value::String(s) => Some(s),
            _ => {
                self.issue(join(path, key), "expected a string");
                None
            }
        }
    }

    fn bool_opt(&mut self, t: &Table, path: &str, key: &str) -> Option<bool> {
        match t.get(key)? {
            Value::Boolean(b) => Some(*b),
            _ => {
                self.issue(join(path, key), "expected a boolean");
                None
            }
        }
    }

    fn num_list(&mut self, t: &Table, path: &str, key: &str) -> Option<Vec<f64>> {
        let p = join(path, key);
        match t.get(key) {
            None => {
                self.issue(p, "missing required key");
                None
            }
            Some(Value::Array(a)) => {
                let mut out = Vec::with_capacity(a.len());
                for (i, v) in a.iter().enumerate() {
                    match v {
                        Value::Float(x) if x.is_finite() => out.push(*x),
                        Value::Integer(x) => out.push(*x as f64),
                        _ => self.issue(format!("{p}[{i}]"), "expected a finite number"),
                    }
                }
                Some(out)
            }
            Some(_) => {
                self.issue(p, "expected an array of numbers");
                None
            }
        }
    }

    fn finish<T>(self, value: Option<T>) -> Result<T> {
        match value {
            Some(v) if self.issues.is_empty() => Ok(v),
            _ => Err(Error::Config(self.issues)),
        }
    }
}

fn parse(text: &str) -> Result<Table> {
    text.parse::<Table>().map_err(|e| Error::ConfigSyntax(e.to_string()))
}

fn check_version(ctx: &mut Ctx, root: &Table) {
    match root.get("version") {
        None => ctx.issue("version", "missing required key"),
        Some(Value::Integer(SCHEMA_VERSION)) => {}
        Some(v) => ctx.issue("version", format!("unsupported schema version {v}, expected {SCHEMA_VERSION}")),
    }
}

/// A noise level: a number, or `"N"` / `"-N"` for the class bound.
fn level(ctx: &mut Ctx, t: &Table, path: &str, key: &str, n: f64) -> Option<f64> {
    match t.get(key) {
        Some(Value::String(s)) if s == "N" || s == "+N" => Some(n),
        Some(Value::String(s)) if s == "-N" => Some(-n),
        Some(Value::String(_)) => {
            ctx.issue(join(path, key), "expected a number, \"N\" or \"-N\"");
            None
        }
        _ => ctx.num(t, path, key),
    }
}

fn parse_signal(ctx: &mut Ctx, t: &Table) -> Option<(SignalSource, f64, f64)> {
    let p = "signal";
    let l = ctx.num_where(t, p, "L", |v| v >= 0.0, ">= 0");
    let r = ctx.num_opt(t, p, "R").unwrap_or(0.0);
    if r < 0.0 {
        ctx.issue("signal.R", "must be >= 0");
    }
    let kind = match ctx.str_opt(t, p, "kind") {
        Some(k) => k,
        None => {
            if !t.contains_key("kind") {
                ctx.issue("signal.kind", "missing required key");
            }
            return None;
        }
    };
    let src = match kind {
        "ramp-parabola" => {
            ctx.allow(t, p, &["kind", "L", "R"]);
            SignalSource::Test(TestSignalSpec::RampParabola)
        }
        "polynomial" => {
            ctx.allow(t, p, &["kind", "L", "R", "coeffs"]);
            let coeffs = ctx.num_list(t, p, "coeffs")?;
            SignalSource::Test(TestSignalSpec::Polynomial { coeffs })
        }
        "bang-bang" => {
            ctx.allow(t, p, &["kind", "L", "R", "initial_value", "initial_slope", "switches"]);
            let initial_value = ctx.num_opt(t, p, "initial_value").unwrap_or(0.0);
            let initial_slope = ctx.num_opt(t, p, "initial_slope").unwrap_or(0.0);
            let mut switches = Vec::new();
            match t.get("switches") {
                Some(Value::Array(a)) => {
                    for (i, v) in a.iter().enumerate() {
                        let sp = format!("signal.switches[{i}]");
                        match v {
                            Value::Table(st) => {
                                ctx.allow(st, &sp, &["at", "accel"]);
                                if let (Some(at), Some(accel)) = (ctx.num(st, &sp, "at"), ctx.num(st, &sp, "accel")) {
                                    switches.push(Switch { at, accel });
                                }
                            }
                            _ => ctx.issue(sp, "expected a table {at, accel}"),
                        }
                    }
                }
                Some(_) => ctx.issue("signal.switches", "expected an array of tables"),
                None => {}
            }
            SignalSource::Test(TestSignalSpec::BangBang { initial_value, initial_slope, switches })
        }
        "random" => {
            ctx.allow(t, p, &["kind", "L", "R", "seed"]);
            SignalSource::Random { seed: ctx.uint_opt(t, p, "seed") }
        }
        "adversary" => {
            ctx.allow(t, p, &["kind", "L", "R", "adversary", "tau", "negate", "r"]);
            let tau = ctx.num_opt(t, p, "tau").unwrap_or(0.0);
            let negate = ctx.bool_opt(t, p, "negate").unwrap_or(false);
            let spec = match ctx.str_opt(t, p, "adversary") {
                Some("causal") => AdversarySpec::Causal { tau, negate },
                Some("exact-trap") => AdversarySpec::ExactTrap { tau },
                Some("sampled-zero") => AdversarySpec::SampledZero { negate },
                Some("quasi-exact-trap") => {
                    AdversarySpec::QuasiExactTrap { r: ctx.uint_opt(t, p, "r").unwrap_or(0) as usize }
                }
                Some(other) => {
                    ctx.issue("signal.adversary", format!("unknown adversary `{other}`"));
                    return None;
                }
                None => {
                    ctx.issue("signal.adversary", "missing required key");
                    return None;
                }
            };
            SignalSource::Adversary(spec)
        }
        other => {
            ctx.issue("signal.kind", format!("unknown signal kind `{other}`"));
            return None;
        }
    };
    Some((src, l?, r))
}

fn parse_segment(ctx: &mut Ctx, st: &Table, sp: &str, n: f64, index: usize, seed: u64) -> Option<NoiseSegment> {
    let start = ctx.num(st, sp, "start");
    let duration = ctx.num(st, sp, "duration");
    let kind = match ctx.str_opt(st, sp, "kind") {
        Some("constant") => {
            ctx.allow(st, sp, &["kind", "start", "duration", "level"]);
            NoiseKind::Constant { level: level(ctx, st, sp, "level", n)? }
        }
        Some("parabola-arc") => {
            ctx.allow(st, sp, &["kind", "start", "duration", "factor"]);
            NoiseKind::ParabolaArc { factor: ctx.num(st, sp, "factor")? }
        }
        Some("step") => {
            ctx.allow(st, sp, &["kind", "start", "duration", "from", "to", "at"]);
            let from = level(ctx, st, sp, "from", n);
            let to = level(ctx, st, sp, "to", n);
            let at = ctx.num(st, sp, "at");
            NoiseKind::Step { from: from?, to: to?, at: at? }
        }
        Some("uniform-white") => {
            ctx.allow(st, sp, &["kind", "start", "duration", "seed"]);
            let seed = ctx.uint_opt(st, sp, "seed").unwrap_or_else(|| derive_seed(seed, 100 + index as u64));
            NoiseKind::UniformWhite { seed }
        }
        Some(other) => {
            ctx.issue(join(sp, "kind"), format!("unknown segment kind `{other}`"));
            return None;
        }
        None => {
            if !st.contains_key("kind") {
                ctx.issue(join(sp, "kind"), "missing required key");
            }
            return None;
        }
    };
    Some(NoiseSegment { start: start?, duration: duration?, kind })
}

fn parse_noise(ctx: &mut Ctx, t: &Table, seed: u64, duration: Option<f64>) -> Option<(NoiseScheduleSpec, f64)> {
    let p = "noise";
    ctx.allow(t, p, &["N", "preset", "segments"]);
    let n = ctx.num_where(t, p, "N", |v| v >= 0.0, ">= 0")?;
    let preset = ctx.str_opt(t, p, "preset");
    let sched = match (preset, t.get("segments")) {
        (Some(_), Some(_)) => {
            ctx.issue("noise.preset", "give either a preset or segments, not both");
            return None;
        }
        (Some("benchmark"), None) => NoiseScheduleSpec::benchmark_timetable(n, derive_seed(seed, 1)),
        (Some("constant"), None) => NoiseScheduleSpec::constant(n, duration?).ok()?,
        (Some(other), None) => {
            ctx.issue("noise.preset", format!("unknown preset `{other}` (expected benchmark or constant)"));
            return None;
        }
        (None, Some(Value::Array(a))) => {
            let mut segs = Vec::new();
            for (i, v) in a.iter().enumerate() {
                let sp = format!("noise.segments[{i}]");
                match v {
                    Value::Table(st) => {
                        if let Some(s) = parse_segment(ctx, st, &sp, n, i, seed) {
                            segs.push(s);
                        }
                    }
                    _ => ctx.issue(sp, "expected a table"),
                }
            }
            if segs.len() != a.len() {
                return None;
            }
            match NoiseScheduleSpec::new(segs) {
                Ok(s) => s,
                Err(e) => {
                    ctx.issue("noise.segments", e.to_string());
                    return None;
                }
            }
        }
        (None, Some(_)) => {
            ctx.issue("noise.segments", "expected an array of tables");
            return None;
        }
        (None, None) => NoiseScheduleSpec::constant(0.0, duration?).ok()?,
    };
    Some((sched, n))
}

fn parse_engine(ctx: &mut Ctx, et: &Table, ep: &str, l: f64, n: f64, dt: f64, index: usize) -> Option<EngineEntry> {
    let kind = match ctx.str_opt(et, ep, "kind") {
        Some(k) => match k.parse::<EngineKind>() {
            Ok(k) => k,
            Err(e) => {
                ctx.issue(join(ep, "kind"), e.to_string());
                return None;
            }
        },
        None => {
            if !et.contains_key("kind") {
                ctx.issue(join(ep, "kind"), "missing required key");
            }
            return None;
        }
    };
    let name = ctx.str_opt(et, ep, "name").map_or_else(|| format!("{kind}{index}"), str::to_string);
    let l = ctx.num_opt(et, ep, "L").unwrap_or(l);
    let wrap = |ctx: &mut Ctx, key: &str, r: Result<EngineSpec>| match r {
        Ok(s) => Some(s),
        Err(Error::InvalidParam { name, reason }) => {
            let key = match name {
                "L" | "dt" | "N" | "k_bar" | "gamma_bar" | "lambda1" | "lambda2" => name,
                _ => key,
            };
            ctx.issue(join(ep, key), reason);
            None
        }
        Err(e) => {
            ctx.issue(ep.to_string(), e.to_string());
            None
        }
    };
    let spec = match kind {
        EngineKind::Adaptive => {
            ctx.allow(et, ep, &["kind", "name", "L", "k_bar", "n_bar", "gamma_bar", "gamma_policy"]);
            let gamma_bar = ctx.num_opt(et, ep, "gamma_bar").unwrap_or(2.0);
            let policy = match ctx.str_opt(et, ep, "gamma_policy") {
                None | Some("smallest") => GammaPolicy::Smallest,
                Some("largest") => GammaPolicy::Largest,
                Some(other) => {
                    ctx.issue(join(ep, "gamma_policy"), format!("unknown policy `{other}` (smallest or largest)"));
                    GammaPolicy::Smallest
                }
            };
            let window = match (et.get("k_bar"), et.get("n_bar")) {
                (Some(_), Some(_)) => {
                    ctx.issue(join(ep, "k_bar"), "give either k_bar or n_bar, not both");
                    return None;
                }
                (Some(Value::String(s)), None) if s == "inf" => WindowLength::Unbounded,
                (Some(Value::Integer(k)), None) if *k >= 0 => WindowLength::Finite(*k as usize),
                (Some(_), None) => {
                    ctx.issue(join(ep, "k_bar"), "expected an integer >= 2 or \"inf\"");
                    return None;
                }
                (None, _) => {
                    let n_bar = ctx.num_opt(et, ep, "n_bar").unwrap_or(n);
                    match AdaptiveParams::tuned(l, dt, n_bar) {
                        Ok(p) => p.window,
                        Err(e) => {
                            ctx.issue(join(ep, "n_bar"), e.to_string());
                            return None;
                        }
                    }
                }
            };
            wrap(
                ctx,
                "k_bar",
                AdaptiveParams::new(l, dt, window, gamma_bar).map(|p| EngineSpec::Adaptive(p.with_policy(policy))),
            )?
        }
        EngineKind::FiniteDifference => {
            ctx.allow(et, ep, &["kind", "name", "L", "N"]);
            let design_n = ctx.num_opt(et, ep, "N").unwrap_or(n);
            wrap(ctx, "N", FiniteDifferenceParams::new(l, design_n, dt).map(EngineSpec::FiniteDifference))?
        }
        EngineKind::Red => {
            ctx.allow(et, ep, &["kind", "name", "L", "lambda1", "lambda2", "scheme"]);
            let l1 = ctx.num(et, ep, "lambda1");
            let l2 = ctx.num(et, ep, "lambda2");
            let scheme = match ctx.str_opt(et, ep, "scheme") {
                None | Some("implicit") => RedScheme::Implicit,
                Some("explicit") => RedScheme::Explicit,
                Some(other) => {
                    ctx.issue(join(ep, "scheme"), format!("unknown scheme `{other}` (explicit or implicit)"));
                    return None;
                }
            };
            wrap(ctx, "lambda2", RedParams::new(l1?, l2?, l, dt, scheme).map(EngineSpec::Red))?
        }
    };
    Some(EngineEntry { name, spec })
}

/// Parses and validates a scenario file. `seed_override` replaces `run.seed`.
pub fn parse_scenario(text: &str, seed_override: Option<u64>) -> Result<Scenario> {
    let root = parse(text)?;
    let mut ctx = Ctx::default();
    check_version(&mut ctx, &root);
    ctx.allow(&root, "", &["version", "signal", "noise", "run", "engines"]);

    let run = ctx.table(&root, "", "run").and_then(|t| {
        ctx.allow(t, "run", &["dt", "duration", "seed", "t_start"]);
        let dt = ctx.num_where(t, "run", "dt", |v| v > 0.0, "> 0");
        let duration = ctx.num_where(t, "run", "duration", |v| v > 0.0, "> 0");
        let seed = seed_override.or_else(|| ctx.uint_opt(t, "run", "seed")).unwrap_or(0);
        let t_start = ctx.num_opt(t, "run", "t_start").unwrap_or(0.0);
        Some(RunSpec { dt: dt?, duration: duration?, seed, t_start })
    });
    let signal = ctx.table(&root, "", "signal").and_then(|t| parse_signal(&mut ctx, t));
    let seed = run.map_or(0, |r| r.seed);
    let noise = match root.get("noise") {
        Some(Value::Table(t)) => parse_noise(&mut ctx, t, seed, run.map(|r| r.duration)),
        Some(_) => {
            ctx.issue("noise", "expected a table");
            None
        }
        None => run.and_then(|r| NoiseScheduleSpec::constant(0.0, r.duration).ok()).map(|s| (s, 0.0)),
    };

    let mut engines = Vec::new();
    match root.get("engines") {
        Some(Value::Array(a)) if !a.is_empty() => {
            if let (Some(run), Some((_, l, _)), Some((_, n))) = (&run, &signal, &noise) {
                for (i, v) in a.iter().enumerate() {
                    let ep = format!("engines[{i}]");
                    match v {
                        Value::Table(et) => {
                            if let Some(e) = parse_engine(&mut ctx, et, &ep, *l, *n, run.dt, i) {
                                engines.push(e);
                            }
                        }
                        _ => ctx.issue(ep, "expected a table"),
                    }
                }
            }
        }
        Some(_) => ctx.issue("engines", "expected a non-empty array of tables"),
        None => ctx.issue("engines", "missing required key"),
    }

    let scenario = (|| {
        let run = run?;
        let (signal, l, r) = signal?;
        let (noise, n) = noise?;
        let class = match SignalClassParams::new(l, n, r, run.dt) {
            Ok(c) => c,
            Err(e) => {
                ctx.issue("signal", e.to_string());
                return None;
            }
        };
        Some(Scenario { class, signal, noise, engines: engines.clone(), run })
    })();
    if let Some(s) = &scenario {
        if let Err(e) = s.validate() {
            ctx.issue("engines", e.to_string());
        }
    }
    ctx.finish(scenario)
}

/// Parses and validates a sweep file.
///
/// ```toml
/// version = 1
/// [sweep]
/// L = [1.0]
/// N = [0.0, 0.02, 0.08]
/// dt = [0.04, 0.02, 0.01, 0.005]
/// gamma_bar = 2.0
/// draws = 200
/// seed = 1
/// R = 1.0
/// ```
pub fn parse_sweep(text: &str) -> Result<SweepConfig> {
    let root = parse(text)?;
    let mut ctx = Ctx::default();
    check_version(&mut ctx, &root);
    ctx.allow(&root, "", &["version", "sweep"]);
    let cfg = ctx.table(&root, "", "sweep").and_then(|t| {
        let p = "sweep";
        ctx.allow(t, p, &["L", "N", "dt", "gamma_bar", "n_bar", "draws", "seed", "R"]);
        let mut grid = |key: &str, ok: fn(f64) -> bool, what: &str| {
            let v = ctx.num_list(t, p, key)?;
            if v.is_empty() {
                ctx.issue(join(p, key), "grid must not be empty");
                return None;
            }
            if let Some(bad) = v.iter().find(|x| !ok(**x)) {
                ctx.issue(join(p, key), format!("entries must be {what}, got {bad}"));
                return None;
            }
            Some(v)
        };
        let ls = grid("L", |v| v > 0.0, "> 0");
        let ns = grid("N", |v| v >= 0.0, ">= 0");
        let dts = grid("dt", |v| v > 0.0, "> 0");
        let defaults = SweepConfig::default();
        let gamma_bar = ctx.num_opt(t, p, "gamma_bar").unwrap_or(defaults.gamma_bar);
        if !(crate::adaptive::GAMMA_BAR_MIN..=crate::adaptive::GAMMA_BAR_MAX).contains(&gamma_bar) {
            ctx.issue("sweep.gamma_bar", format!("must lie in [2, 1+sqrt(2)], got {gamma_bar}"));
        }
        let noise_ceiling = ctx.num_opt(t, p, "n_bar");
        if noise_ceiling.is_some_and(|v| v < 0.0) {
            ctx.issue("sweep.n_bar", "must be >= 0");
        }
        let draws = ctx.uint_opt(t, p, "draws").map_or(defaults.draws, |d| d as usize);
        let seed = ctx.uint_opt(t, p, "seed").unwrap_or(defaults.seed);
        let initial_bound = ctx.num_opt(t, p, "R").unwrap_or(defaults.initial_bound);
        if initial_bound < 0.0 {
            ctx.issue("sweep.R", "must be >= 0");
        }
        Some(SweepConfig {
            accel_bounds: ls?,
            noise_bounds: ns?,
            dts: dts?,
            gamma_bar,
            noise_ceiling,
            draws,
            seed,
            initial_bound,
        })
    });
    ctx.finish(cfg)
}
