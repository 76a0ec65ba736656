use std::path::PathBuf;

use arczero::par::Execution;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Default output directory when `--out` is not given.
pub const OUT_DIR_ENV: &str = "ARCZERO_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Table1,
    Epsilon,
    Zeros,
    Interlace,
    VerifyBounds,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Table1 => "table1",
            Command::Epsilon => "epsilon",
            Command::Zeros => "zeros",
            Command::Interlace => "interlace",
            Command::VerifyBounds => "verify-bounds",
        }
    }

    fn needs_weights(self) -> bool {
        matches!(self, Command::Zeros | Command::Interlace | Command::VerifyBounds)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilySource {
    Zero,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub k_min: u32,
    pub k_max: u32,
    pub family: FamilySource,
    pub a_trunc: u64,
    /// Truncation for weights 4..10 (`F_4`, `F_6` inside `Δ`).
    pub a_trunc_low: u64,
    pub tol: f64,
    pub resolution: usize,
    pub slow: bool,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: Command::Table1,
            k_min: 12,
            k_max: 60,
            family: FamilySource::Zero,
            a_trunc: 20,
            a_trunc_low: 10_000,
            tol: 1e-10,
            resolution: 4096,
            slow: false,
            out: None,
            csv: None,
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.command.needs_weights() {
            if self.k_min % 2 == 1 || self.k_max % 2 == 1 {
                return bad(format!("weights must be even, got {}..={}", self.k_min, self.k_max));
            }
            if self.k_min < 12 {
                return bad(format!("--k-min must be at least 12, got {}", self.k_min));
            }
            if self.k_min > self.k_max {
                return bad(format!("--k-min {} exceeds --k-max {}", self.k_min, self.k_max));
            }
        }
        if self.tol.is_nan() || self.tol <= 0.0 || !self.tol.is_finite() {
            return bad(format!("--tol must be positive, got {}", self.tol));
        }
        if self.resolution < 2 {
            return bad(format!("--resolution must be at least 2, got {}", self.resolution));
        }
        if self.a_trunc < 5 || self.a_trunc_low < 5 {
            return bad("truncation levels must be at least 5".to_string());
        }
        if self.threads == Some(0) {
            return bad("--threads must be positive".to_string());
        }
        Ok(())
    }

    pub fn weights(&self) -> Vec<u32> {
        (self.k_min..=self.k_max).step_by(2).collect()
    }

    pub fn execution(&self) -> Execution {
        if self.threads == Some(1) || !Execution::parallel_available() {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    /// Runs with one thread produce byte-identical reports, so no timing.
    pub fn deterministic(&self) -> bool {
        self.execution() == Execution::Sequential
    }

    /// `--out`, else `$ARCZERO_OUT_DIR/<command>.json`, else stdout.
    pub fn report_path(&self) -> Option<PathBuf> {
        self.out.clone().or_else(|| {
            std::env::var_os(OUT_DIR_ENV)
                .filter(|d| !d.is_empty())
                .map(|d| PathBuf::from(d).join(format!("{}.json", self.command.name())))
        })
    }
}
