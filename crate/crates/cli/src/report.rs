use std::fs;
use std::io::Write;
use std::path::Path;

use arczero::eisenstein::PkBound;
use arczero::forms::{BoundReport, EpsilonEstimate};
use arczero::interlace::{CaseMechanicsReport, InterlacingCertificate};
use arczero::zeros::{LocalizationReport, ZeroSet};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub config: RunConfig,
    pub results: Results,
    pub status: Status,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "items", rename_all = "kebab-case")]
pub enum Results {
    Table1(Vec<Table1Row>),
    Epsilon(EpsilonResult),
    Zeros(Vec<ZerosItem>),
    Interlace(Vec<InterlaceItem>),
    VerifyBounds(Vec<BoundsItem>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub k: u32,
    pub a_trunc: u64,
    /// Tail anchored at the next norm represented by a coprime pair.
    pub tight: PkBound,
    /// Tail anchored at `A + 1`.
    pub next_integer: PkBound,
    /// The published bound (for `k = 12` the coefficient of `(1/2)^{k/2}`).
    pub published: f64,
    /// `next_integer` rounded up to 3 decimals, on the published scale.
    pub rounded_up: f64,
    pub matches_published: bool,
    /// `tight ≤ published`.
    pub upper_bound_valid: bool,
    /// False when the row ran at a reduced `A` (no comparison made).
    pub compared: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonResult {
    pub estimate: EpsilonEstimate,
    pub doubled: EpsilonEstimate,
    /// `|certified(2n - 1) - certified(n)|`.
    pub drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZerosItem {
    pub k: u32,
    pub zero_set: Option<ZeroSet>,
    pub localization: Option<LocalizationReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterlaceItem {
    pub k: u32,
    pub certificate: Option<InterlacingCertificate>,
    pub mechanics: Option<CaseMechanicsReport>,
    /// Set when (cond2) fails and the verdicts carry no guarantee.
    pub banner: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsItem {
    pub k: u32,
    pub bounds: BoundReport,
    pub mechanics: Option<CaseMechanicsReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Status {
    pub ok: bool,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub precision: String,
    pub execution: arczero::Execution,
    pub threads: Option<usize>,
    /// `sup |Δ|` used in the condition checks; absent when every family
    /// tuple in range is zero.
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl Report {
    pub fn to_json(&self) -> CliResult<String> {
        serde_json::to_string_pretty(self).map_err(|e| CliError::Encode(e.to_string()))
    }

    pub fn from_json(text: &str) -> CliResult<Report> {
        serde_json::from_str(text).map_err(|e| CliError::Encode(e.to_string()))
    }

    pub fn write_json(&self, path: &Path) -> CliResult<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|source| CliError::Io {
                path: dir.to_path_buf(),
                source,
            })?;
        }
        let mut text = self.to_json()?;
        text.push('\n');
        fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Flat table of the main per-item numbers.
    pub fn to_csv(&self) -> CliResult<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let enc = |e: csv::Error| CliError::Encode(e.to_string());
        match &self.results {
            Results::Table1(rows) => {
                w.write_record(["k", "a_trunc", "b", "head", "tail", "total", "total_next_integer", "published", "matches"])
                    .map_err(enc)?;
                for r in rows {
                    w.serialize((
                        r.k,
                        r.a_trunc,
                        r.tight.b,
                        r.tight.head,
                        r.tight.tail,
                        r.tight.total,
                        r.next_integer.total,
                        r.published,
                        r.matches_published,
                    ))
                    .map_err(enc)?;
                }
            }
            Results::Epsilon(e) => {
                w.write_record(["resolution", "a_trunc", "value", "certified", "argmax"]).map_err(enc)?;
                for est in [&e.estimate, &e.doubled] {
                    w.serialize((est.resolution, est.a_trunc, est.value, est.certified, est.argmax))
                        .map_err(enc)?;
                }
            }
            Results::Zeros(items) => {
                w.write_record(["k", "j", "lo", "hi", "root", "width", "coarse_ok", "fine_ok"]).map_err(enc)?;
                for it in items {
                    let (Some(z), Some(loc)) = (&it.zero_set, &it.localization) else { continue };
                    for (b, e) in z.brackets.iter().zip(&loc.entries) {
                        let fine = e.fine_ok.map(|f| f.to_string()).unwrap_or_default();
                        w.serialize((it.k, b.index, b.lo, b.hi, b.refined_root, b.width(), e.coarse_ok, fine))
                            .map_err(enc)?;
                    }
                }
            }
            Results::Interlace(items) => {
                w.write_record(["k", "j", "left", "left_margin", "left_case", "right", "right_margin", "right_case"])
                    .map_err(enc)?;
                for it in items {
                    let Some(c) = &it.certificate else { continue };
                    for v in &c.verdicts {
                        w.serialize((
                            it.k,
                            v.j,
                            format!("{:?}", v.left.verdict),
                            v.left.margin,
                            format!("{:?}", v.left.case),
                            format!("{:?}", v.right.verdict),
                            v.right.margin,
                            format!("{:?}", v.right.case),
                        ))
                        .map_err(enc)?;
                    }
                }
            }
            Results::VerifyBounds(items) => {
                w.write_record(["k", "check", "points", "worst_margin", "unresolved", "violations"])
                    .map_err(enc)?;
                for it in items {
                    for c in &it.bounds.checks {
                        w.serialize((it.k, &c.name, c.points, c.worst_margin, c.unresolved, c.violations.len()))
                            .map_err(enc)?;
                    }
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| CliError::Encode(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Encode(e.to_string()))
    }

    pub fn write_csv(&self, path: &Path) -> CliResult<()> {
        let text = self.to_csv()?;
        let mut f = fs::File::create(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        f.write_all(text.as_bytes()).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn exit_code(&self) -> i32 {
        if self.status.ok {
            0
        } else {
            1
        }
    }
}
