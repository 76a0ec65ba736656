use std::path::PathBuf;
use std::process::ExitCode;

use arczero_cli::{run, CliError, Command, FamilySource, RunConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "arczero", version, about = "Zeros of Eisenstein-type forms on the arc |z| = 1")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Recompute the uniform bounds p_k for k = 4, 6, 8, 10, 12.
    Table1,
    /// sup |Δ| over the arc.
    Epsilon,
    /// Certified zeros of G_k and their localization.
    Zeros,
    /// Interlacing of zeros at weights k and k + 12.
    Interlace,
    /// Grid verification of the remainder bounds and case mechanics.
    VerifyBounds,
}

#[derive(Args)]
struct Opts {
    #[arg(long, global = true, default_value_t = 12)]
    k_min: u32,
    #[arg(long, global = true, default_value_t = 60)]
    k_max: u32,
    /// Coefficient file with `k j value` lines.
    #[arg(long, global = true, conflicts_with = "zero_family")]
    family: Option<PathBuf>,
    /// Use a_j = 0 everywhere (the default).
    #[arg(long, global = true)]
    zero_family: bool,
    /// Truncation level for weights >= 12.
    #[arg(long, global = true, default_value_t = 20)]
    a_trunc: u64,
    /// Truncation level for weights 4..10.
    #[arg(long, global = true, default_value_t = 10_000)]
    a_trunc_low: u64,
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 4096)]
    resolution: usize,
    /// Run p_4 at A = 3e6.
    #[arg(long, global = true)]
    slow: bool,
    /// Report path (default: $ARCZERO_OUT_DIR/<command>.json, else stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write a CSV flattening here.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    #[arg(long, global = true)]
    threads: Option<usize>,
}

fn config(cli: Cli) -> RunConfig {
    let o = cli.opts;
    RunConfig {
        command: match cli.command {
            Cmd::Table1 => Command::Table1,
            Cmd::Epsilon => Command::Epsilon,
            Cmd::Zeros => Command::Zeros,
            Cmd::Interlace => Command::Interlace,
            Cmd::VerifyBounds => Command::VerifyBounds,
        },
        k_min: o.k_min,
        k_max: o.k_max,
        family: o.family.map_or(FamilySource::Zero, FamilySource::File),
        a_trunc: o.a_trunc,
        a_trunc_low: o.a_trunc_low,
        tol: o.tol,
        resolution: o.resolution,
        slow: o.slow,
        out: o.out,
        csv: o.csv,
        threads: o.threads,
    }
}

fn execute(cfg: &RunConfig) -> Result<i32, CliError> {
    cfg.validate()?;
    #[cfg(feature = "parallel")]
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let report = run(cfg)?;
    match cfg.report_path() {
        Some(p) => report.write_json(&p)?,
        None => println!("{}", report.to_json()?),
    }
    if let Some(p) = &cfg.csv {
        report.write_csv(p)?;
    }
    for f in &report.status.failures {
        eprintln!("FAIL {f}");
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cfg = config(Cli::parse());
    let code = match execute(&cfg) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
