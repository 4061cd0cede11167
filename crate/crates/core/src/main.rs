use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use robdiff::adversary::{self, AdversaryScenario};
use robdiff::config::{parse_scenario, parse_sweep};
use robdiff::harness::{
    benchmark_scenario, reproduce_benchmark, worst_case_sweep, write_benchmark_csv, write_sweep_csv, ErrorReport,
    BENCHMARK_SEED,
};
use robdiff::svg::write_report_svg;
use robdiff::Error;

const EXIT_IO: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_ACCEPTANCE: u8 = 4;

#[derive(Parser)]
#[command(name = "robdiff", version, about = "Robust streaming differentiation: simulations, sweeps, adversaries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct OutArgs {
    /// Output directory.
    #[arg(short, long, env = "ROBDIFF_OUT_DIR", default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write trace.csv and summary.csv.
    Simulate {
        #[arg(short, long)]
        config: PathBuf,
        #[command(flatten)]
        out: OutArgs,
        /// Overrides run.seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write report.svg.
        #[arg(long)]
        svg: bool,
    },
    /// Check the worst-case error band over a grid; exits 4 if a cell fails.
    Sweep {
        #[arg(short, long)]
        config: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Export a worst-case construction and its certificate.
    Adversary {
        kind: AdversaryKind,
        #[arg(long = "L", default_value_t = 1.0)]
        accel_bound: f64,
        #[arg(long = "N", default_value_t = 1.0)]
        noise_bound: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        /// Quiet lead-in before the construction starts.
        #[arg(long, default_value_t = 0.0)]
        tau: f64,
        /// Trace length in seconds; defaults to just past the certified instant.
        #[arg(long)]
        horizon: Option<f64>,
        /// Sample count for sampled-zero.
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// Minimum certified step for quasi-exact-trap.
        #[arg(long, default_value_t = 0)]
        r: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run the benchmark: adaptive engine against two implicit RED tunings.
    Fig4 {
        /// Scenario file; defaults to the built-in benchmark.
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        svg: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AdversaryKind {
    Causal,
    ExactTrap,
    SampledZero,
    QuasiExactTrap,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::Csv(_) => EXIT_IO,
            _ => EXIT_VALIDATION,
        };
        let message = match &e {
            Error::Config(issues) => {
                let mut m = e.to_string();
                for i in issues {
                    m.push_str(&format!("\nconfig-error\t{}\t{}", i.path, i.message));
                }
                m
            }
            _ => e.to_string(),
        };
        Failure { code, message }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure { code: EXIT_IO, message: format!("{}: {e}", path.display()) }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_failure(path, e))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    let p = dir.join(name);
    File::create(&p).map(BufWriter::new).map_err(|e| io_failure(&p, e))
}

fn write_manifest(dir: &Path, command: &str, seed: u64, config_hash: &str) -> Result<(), Failure> {
    let mut t = toml::Table::new();
    t.insert("command".into(), command.into());
    t.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    t.insert("csv_version".into(), i64::from(robdiff::harness::TRACE_CSV_VERSION).into());
    t.insert("seed".into(), seed.to_string().into());
    t.insert("config_hash".into(), config_hash.into());
    let mut w = create(dir, "manifest.toml")?;
    w.write_all(t.to_string().as_bytes()).map_err(|e| io_failure(dir, e))
}

fn write_report(dir: &Path, report: &ErrorReport, svg: bool) -> Result<(), Failure> {
    report.write_trace_csv(create(dir, "trace.csv")?)?;
    report.write_summary_csv(create(dir, "summary.csv")?)?;
    if svg {
        write_report_svg(report, create(dir, "report.svg")?)?;
    }
    Ok(())
}

fn simulate(config: &Path, out: &Path, seed: Option<u64>, svg: bool) -> Result<(), Failure> {
    let scenario = parse_scenario(&read(config)?, seed)?;
    let report = robdiff::harness::run_scenario(&scenario)?;
    write_report(out, &report, svg)?;
    write_manifest(out, "simulate", report.seed, &report.config_hash)?;
    for e in &report.engines {
        if let Some((m, k)) = e.max_error_from(report.trace.dt, report.t_start) {
            println!("{:<16} max error {m:.6} at t = {:.4}", e.name, report.trace.time(k));
        }
    }
    Ok(())
}

fn sweep(config: &Path, out: &Path) -> Result<(), Failure> {
    let cfg = parse_sweep(&read(config)?)?;
    let rows = worst_case_sweep(&cfg)?;
    write_sweep_csv(&rows, create(out, "sweep.csv")?)?;
    let hash = robdiff::harness::sweep_config_hash(&cfg);
    write_manifest(out, "sweep", cfg.seed, &hash)?;
    println!("{:>6} {:>8} {:>7} {:>10} {:>10} {:>10}  pass", "L", "N", "dt", "empirical", "lower", "upper");
    for r in &rows {
        println!(
            "{:>6} {:>8} {:>7} {:>10.6} {:>10.6} {:>10.6}  {}",
            r.accel_bound, r.noise_bound, r.dt, r.empirical, r.lower_edge, r.upper_edge, r.pass
        );
    }
    if rows.iter().all(|r| r.pass) {
        Ok(())
    } else {
        Err(Failure { code: EXIT_ACCEPTANCE, message: "one or more sweep cells exceed the upper band".into() })
    }
}

fn write_adversary(out: &Path, name: &str, s: &AdversaryScenario) -> Result<(), Failure> {
    let tr = &s.trace;
    let mut w = csv::Writer::from_writer(create(out, name)?);
    let io = |e: csv::Error| Failure::from(Error::from(e));
    w.write_record(["k", "t", "u", "f", "fdot", "eta"]).map_err(io)?;
    let f = tr.f.as_ref().expect("populated");
    let fdot = tr.fdot.as_ref().expect("populated");
    let eta = tr.noise.as_ref().expect("populated");
    for k in 0..tr.len() {
        w.write_record([
            k.to_string(),
            tr.time(k).to_string(),
            tr.u[k].to_string(),
            f[k].to_string(),
            fdot[k].to_string(),
            eta[k].to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| io_failure(out, e))
}

#[allow(clippy::too_many_arguments)]
fn adversary_cmd(
    kind: AdversaryKind,
    l: f64,
    n: f64,
    dt: f64,
    tau: f64,
    horizon: Option<f64>,
    samples: usize,
    r: usize,
    out: &Path,
) -> Result<(), Failure> {
    let kappa = if n > 0.0 && l > 0.0 { (n / l).sqrt() } else { 0.0 };
    let scenarios: Vec<AdversaryScenario> = match kind {
        AdversaryKind::Causal => {
            let h = horizon.unwrap_or(tau + 4.0 * kappa + 10.0 * dt);
            adversary::causal_pair(l, n, tau, dt, h)?.into()
        }
        AdversaryKind::ExactTrap => {
            let h = horizon.unwrap_or(tau + (2.0 + std::f64::consts::SQRT_2) * kappa + 10.0 * dt);
            vec![adversary::exact_trap(l, n, tau, dt, h)?]
        }
        AdversaryKind::SampledZero => adversary::sampled_zero_family(l, dt, samples)?.into(),
        AdversaryKind::QuasiExactTrap => vec![adversary::quasi_exact_trap(l, n, dt, r)?],
    };
    for (i, s) in scenarios.iter().enumerate() {
        let name = if i == 0 { "trace.csv" } else { "trace_neg.csv" };
        write_adversary(out, name, s)?;
    }
    let c = &scenarios[0].certificate;
    let mut t = toml::Table::new();
    t.insert("construction".into(), c.construction.into());
    t.insert("instant".into(), c.instant.into());
    t.insert("step".into(), (c.step as i64).into());
    t.insert("error".into(), c.error.into());
    t.insert("nontrivial".into(), c.nontrivial.into());
    t.insert("L".into(), c.accel_bound.into());
    t.insert("N".into(), c.noise_bound.into());
    t.insert("dt".into(), dt.into());
    let mut w = create(out, "certificate.toml")?;
    w.write_all(t.to_string().as_bytes()).map_err(|e| io_failure(out, e))?;
    println!("{}: certified error {:.6} at t = {:.6} (step {})", c.construction, c.error, c.instant, c.step);
    Ok(())
}

fn fig4(config: Option<&Path>, out: &Path, seed: Option<u64>, svg: bool) -> Result<(), Failure> {
    let scenario = match config {
        Some(p) => parse_scenario(&read(p)?, seed)?,
        None => benchmark_scenario(seed.unwrap_or(BENCHMARK_SEED)),
    };
    let (report, rows) = reproduce_benchmark(&scenario)?;
    write_report(out, &report, svg)?;
    write_benchmark_csv(&rows, create(out, "benchmark.csv")?)?;
    write_manifest(out, "fig4", report.seed, &report.config_hash)?;
    println!("max error for t >= {}:", report.t_start);
    for r in &rows {
        let reference = r.reference.map_or_else(String::new, |v| format!("  (reference {v})"));
        println!("{:<12} {:.4} at t = {:.2}{reference}", r.engine, r.max_error, r.t_at_max);
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { config, out, seed, svg } => simulate(config, &out.out, *seed, *svg),
        Command::Sweep { config, out } => sweep(config, &out.out),
        Command::Adversary { kind, accel_bound, noise_bound, dt, tau, horizon, n, r, out } => {
            adversary_cmd(*kind, *accel_bound, *noise_bound, *dt, *tau, *horizon, *n, *r, &out.out)
        }
        Command::Fig4 { config, out, seed, svg } => fig4(config.as_deref(), &out.out, *seed, *svg),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
