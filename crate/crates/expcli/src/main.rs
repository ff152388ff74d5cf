use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use confsr::bounds::certify;
use confsr::minmax::adversarial_pair;
use confsr_exp::{
    emit_results, generate_scenario, loglog_slope, run_sweep, write_results, ConfigFile, ExperimentRecord, Format,
    SweepConfig, SweepKind,
};

#[derive(Parser)]
#[command(name = "confsr-exp", version, about = "Seeded experiments for confluent Vandermonde super-resolution")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// σ_min(U_N) with lower and upper certificates over random (Δ, N)
    SigmaSweep(SweepArgs),
    /// Rayleigh quotient of u against σ_min(Φ_M)
    RayleighSweep(SweepArgs),
    /// ESPRIT errors on worst-case signals with bounded noise
    EspritSweep(SweepArgs),
    /// Certificates for one configuration (JSON)
    Certify(InstanceArgs),
    /// Adversarial signal pair for one configuration (JSON)
    Adversarial(InstanceArgs),
}

#[derive(Args)]
struct Common {
    /// Flat key = value config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. --set srf_max=100
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Master seed (same as --set seed=...)
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Number of trials (same as --set trials=...)
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct InstanceArgs {
    #[command(flatten)]
    common: Common,
}

fn load(common: &Common, extra: &[(&str, String)]) -> Result<ConfigFile> {
    let mut overrides = common.set.clone();
    if let Some(s) = common.seed {
        overrides.push(format!("seed={s}"));
    }
    overrides.extend(extra.iter().map(|(k, v)| format!("{k}={v}")));
    Ok(ConfigFile::load(common.config.as_deref(), &overrides)?)
}

fn write_json<T: serde::Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => writeln!(std::io::stdout().lock(), "{text}").context("writing to stdout")?,
    }
    Ok(())
}

fn sweep(kind: SweepKind, args: &SweepArgs) -> Result<ExitCode> {
    let extra: Vec<(&str, String)> = args.trials.map(|t| ("trials", t.to_string())).into_iter().collect();
    let cfg = SweepConfig::resolve(kind, &load(&args.common, &extra)?)?;
    let records = run_sweep(kind, &cfg);
    match &args.common.out {
        Some(p) => emit_results(&records, p, args.format)?,
        None => write_results(&records, std::io::stdout().lock(), args.format, Path::new("<stdout>"))?,
    }
    summarize(kind, &records);
    let failed = records.iter().filter(|r| r.status.is_failure()).count();
    if failed > 0 {
        eprintln!("{failed} of {} trials failed", records.len());
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn summarize(kind: SweepKind, records: &[ExperimentRecord]) {
    let mut err = std::io::stderr().lock();
    let mut line = |name: &str, slope: Option<f64>| {
        let s = slope.map_or("n/a".to_string(), |v| format!("{v:.3}"));
        let _ = writeln!(err, "slope of log {name} vs log SRF: {s}");
    };
    match kind {
        SweepKind::Sigma => line("sigma_min", loglog_slope(records, |r| r.sigma_min)),
        SweepKind::Rayleigh => {
            line("sigma_min", loglog_slope(records, |r| r.sigma_min));
            line("rayleigh quotient", loglog_slope(records, |r| r.upper_cert));
        }
        SweepKind::Esprit => line("E_total", loglog_slope(records, |r| r.e_total)),
    }
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    match &cli.cmd {
        Cmd::SigmaSweep(a) => sweep(SweepKind::Sigma, a),
        Cmd::RayleighSweep(a) => sweep(SweepKind::Rayleigh, a),
        Cmd::EspritSweep(a) => sweep(SweepKind::Esprit, a),
        Cmd::Certify(a) => {
            let cfg = load(&a.common, &[])?;
            let sc = cfg.scenario()?;
            let (x, params) = generate_scenario(&sc)?;
            let omega = cfg.omega.unwrap_or(sc.n as f64);
            let report = certify(&x, &params, omega, sc.n)?;
            let out = serde_json::json!({ "scenario": sc, "nodes": x, "params": params, "report": report });
            write_json(&out, a.common.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Adversarial(a) => {
            let cfg = load(&a.common, &[])?;
            let sc = cfg.scenario()?;
            let (x, params) = generate_scenario(&sc)?;
            let pair = adversarial_pair(&x, sc.n, cfg.epsilon.unwrap_or(1e-12), &params)?;
            write_json(&pair, a.common.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
