//! Serialized reports. Every number is a decimal string with [`DIGITS`] significant digits.

use std::fmt::Write as _;
use std::path::Path;

use decoy_core::bounds::{Achiever, BoundsReport};
use decoy_core::oracle::{OracleReport, AGREEMENT_TOLERANCE};
use decoy_core::Real;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult, ErrorObject};

pub const DIGITS: usize = 30;

pub fn num<T: Real>(x: &T) -> String {
    x.to_sci_string(DIGITS)
}

pub fn nums<T: Real>(xs: &[T]) -> Vec<String> {
    xs.iter().map(num).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOut {
    #[serde(rename = "A")]
    pub a: Option<String>,
    #[serde(rename = "B")]
    pub b: Option<String>,
    pub eta: Option<String>,
    pub e_det: Option<String>,
    pub p_dark: Option<String>,
    pub in_domain: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurements {
    #[serde(rename = "Q")]
    pub q: Vec<String>,
    #[serde(rename = "E")]
    pub e: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XOut {
    pub values: Vec<String>,
    pub lagrange_cramer_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZOut {
    pub values: Vec<String>,
    #[serde(rename = "L0")]
    pub l0: usize,
    pub a0: String,
    pub branch: String,
    pub search_cap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalOut {
    pub n: usize,
    pub lo: String,
    pub hi: String,
    /// Which configuration attains the lower end, `"X"` or `"Z"`.
    pub lower: String,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaOut {
    pub n: usize,
    pub lp_min: String,
    pub lp_max: String,
    pub lo_delta: String,
    pub hi_delta: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleOut {
    pub n_trunc: usize,
    pub tolerance: f64,
    pub agrees: bool,
    pub deltas: Vec<DeltaOut>,
}

impl OracleOut {
    pub fn from_core<T: Real>(r: &OracleReport<T>) -> Self {
        OracleOut {
            n_trunc: r.n_trunc,
            tolerance: AGREEMENT_TOLERANCE,
            agrees: r.agrees(AGREEMENT_TOLERANCE),
            deltas: r
                .deltas
                .iter()
                .map(|d| DeltaOut {
                    n: d.n,
                    lp_min: num(&d.lp_min),
                    lp_max: num(&d.lp_max),
                    lo_delta: num(&d.lo_delta),
                    hi_delta: num(&d.hi_delta),
                })
                .collect(),
        }
    }
}

/// One bounds analysis: yields or error products.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    /// `"yields"` or `"error_products"`.
    pub kind: String,
    pub x_config: XOut,
    pub z_config: ZOut,
    pub intervals: Vec<IntervalOut>,
    pub exact: bool,
    pub in_unit_box: bool,
    pub oracle: Option<OracleOut>,
}

impl Analysis {
    pub fn from_core<T: Real>(kind: &str, r: &BoundsReport<T>, oracle: Option<&OracleReport<T>>) -> Self {
        Analysis {
            kind: kind.to_owned(),
            x_config: XOut {
                values: nums(&r.x.values),
                lagrange_cramer_delta: r.x.lagrange_cramer_delta,
            },
            z_config: ZOut {
                values: nums(&r.z.values),
                l0: r.z.l0,
                a0: num(&r.z.a0),
                branch: r.z.branch.as_str().to_owned(),
                search_cap: r.z.cap,
            },
            intervals: r
                .intervals
                .iter()
                .map(|iv| IntervalOut {
                    n: iv.n,
                    lo: num(&iv.lo),
                    hi: num(&iv.hi),
                    lower: match iv.lower {
                        Achiever::X => "X",
                        Achiever::Z => "Z",
                    }
                    .to_owned(),
                    exact: iv.exact,
                })
                .collect(),
            exact: r.exact,
            in_unit_box: r.in_unit_box,
            oracle: oracle.map(OracleOut::from_core),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyRateOut {
    /// 1-based index of the signal intensity.
    pub signal: usize,
    pub mu: String,
    #[serde(rename = "Q")]
    pub q: String,
    #[serde(rename = "E")]
    pub e: String,
    #[serde(rename = "Q0")]
    pub q0: String,
    #[serde(rename = "Q1")]
    pub q1: String,
    pub y1_lower: String,
    pub b1_upper: String,
    pub e1_upper: String,
    pub f: String,
    pub rate: String,
    /// Error-correction term added instead of subtracted; diagnostic only.
    pub rate_added_sign: String,
    pub secure: bool,
}

/// The full report for one input.
///
/// The primary analysis is written inline at the top level (`x_config`, `z_config`,
/// `intervals`, …); a second, error-product analysis goes under `error_products`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "ReportWire", into = "ReportWire")]
pub struct Report {
    pub mode: String,
    pub precision_bits: u32,
    pub intensities: Vec<String>,
    pub y0: String,
    pub model: Option<ModelOut>,
    pub measurements: Option<Measurements>,
    pub analysis: Option<Analysis>,
    pub error_products: Option<Analysis>,
    pub key_rate: Option<KeyRateOut>,
    pub warnings: Vec<String>,
    pub errors: Vec<ErrorObject>,
}

// `#[serde(flatten)]` buffers numbers, which breaks under `arbitrary_precision`.
#[derive(Serialize, Deserialize)]
struct ReportWire {
    mode: String,
    precision_bits: u32,
    intensities: Vec<String>,
    y0: String,
    model: Option<ModelOut>,
    measurements: Option<Measurements>,
    kind: Option<String>,
    x_config: Option<XOut>,
    z_config: Option<ZOut>,
    intervals: Vec<IntervalOut>,
    exact: Option<bool>,
    in_unit_box: Option<bool>,
    oracle: Option<OracleOut>,
    error_products: Option<Analysis>,
    key_rate: Option<KeyRateOut>,
    warnings: Vec<String>,
    errors: Vec<ErrorObject>,
}

impl From<Report> for ReportWire {
    fn from(r: Report) -> Self {
        let (kind, x_config, z_config, intervals, exact, in_unit_box, oracle) = match r.analysis {
            Some(a) => (
                Some(a.kind),
                Some(a.x_config),
                Some(a.z_config),
                a.intervals,
                Some(a.exact),
                Some(a.in_unit_box),
                a.oracle,
            ),
            None => (None, None, None, Vec::new(), None, None, None),
        };
        ReportWire {
            mode: r.mode,
            precision_bits: r.precision_bits,
            intensities: r.intensities,
            y0: r.y0,
            model: r.model,
            measurements: r.measurements,
            kind,
            x_config,
            z_config,
            intervals,
            exact,
            in_unit_box,
            oracle,
            error_products: r.error_products,
            key_rate: r.key_rate,
            warnings: r.warnings,
            errors: r.errors,
        }
    }
}

impl From<ReportWire> for Report {
    fn from(w: ReportWire) -> Self {
        let analysis = match (w.kind, w.x_config, w.z_config) {
            (Some(kind), Some(x_config), Some(z_config)) => Some(Analysis {
                kind,
                x_config,
                z_config,
                intervals: w.intervals,
                exact: w.exact.unwrap_or(false),
                in_unit_box: w.in_unit_box.unwrap_or(false),
                oracle: w.oracle,
            }),
            _ => None,
        };
        Report {
            mode: w.mode,
            precision_bits: w.precision_bits,
            intensities: w.intensities,
            y0: w.y0,
            model: w.model,
            measurements: w.measurements,
            analysis,
            error_products: w.error_products,
            key_rate: w.key_rate,
            warnings: w.warnings,
            errors: w.errors,
        }
    }
}

/// Emitted instead of a report when the pipeline stops early.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureReport {
    pub warnings: Vec<String>,
    pub errors: Vec<ErrorObject>,
}

impl Report {
    pub fn analyses(&self) -> impl Iterator<Item = &Analysis> {
        self.analysis.iter().chain(self.error_products.iter())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize") + "\n"
    }

    /// `# key=value` metadata lines followed by one row per interval.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# mode={}", self.mode);
        let _ = writeln!(out, "# precision_bits={}", self.precision_bits);
        let _ = writeln!(out, "# y0={}", self.y0);
        for a in self.analyses() {
            let z = &a.z_config;
            let _ = writeln!(out, "# {}: L0={} a0={} branch={} exact={}", a.kind, z.l0, z.a0, z.branch, a.exact);
            if let Some(o) = &a.oracle {
                let _ = writeln!(out, "# {}: oracle n_trunc={} agrees={}", a.kind, o.n_trunc, o.agrees);
            }
        }
        if let Some(k) = &self.key_rate {
            let _ = writeln!(out, "# key_rate={} secure={}", k.rate, k.secure);
        }
        for w in &self.warnings {
            let _ = writeln!(out, "# warning={w}");
        }
        for e in &self.errors {
            let _ = writeln!(out, "# error={}", e.message);
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let _ = w.write_record(["kind", "n", "lo", "hi", "lower", "exact"]);
        for a in self.analyses() {
            for iv in &a.intervals {
                let _ = w.write_record([
                    a.kind.as_str(),
                    &iv.n.to_string(),
                    &iv.lo,
                    &iv.hi,
                    &iv.lower,
                    &iv.exact.to_string(),
                ]);
            }
        }
        out + &String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 input")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "mode {}, M = {}, {}-bit arithmetic",
            self.mode,
            self.intensities.len(),
            self.precision_bits
        );
        let _ = writeln!(out, "intensities: {}", self.intensities.iter().map(|s| short(s)).collect::<Vec<_>>().join(", "));
        let _ = writeln!(out, "y0: {}", short(&self.y0));
        for a in self.analyses() {
            let z = &a.z_config;
            let _ = writeln!(out);
            let _ = writeln!(out, "[{}] exact = {}", a.kind, a.exact);
            let _ = writeln!(out, "  Z tail: L0 = {}, a0 = {}, branch {}", z.l0, short(&z.a0), z.branch);
            for iv in &a.intervals {
                let _ = writeln!(out, "  n = {}: [{}, {}]", iv.n, iv.lo, iv.hi);
            }
            if let Some(o) = &a.oracle {
                let verdict = if o.agrees { "agrees" } else { "DISAGREES" };
                let _ = writeln!(out, "  oracle (N = {}): {verdict}", o.n_trunc);
                for d in &o.deltas {
                    let _ = writeln!(
                        out,
                        "    n = {}: lp [{}, {}], deltas {} / {}",
                        d.n,
                        short(&d.lp_min),
                        short(&d.lp_max),
                        short(&d.lo_delta),
                        short(&d.hi_delta)
                    );
                }
            }
        }
        if let Some(k) = &self.key_rate {
            let _ = writeln!(out);
            let _ = writeln!(out, "key rate at signal #{} (mu = {}): {}", k.signal, short(&k.mu), short(&k.rate));
            let _ = writeln!(out, "  Q1 = {}, e1 <= {}", short(&k.q1), short(&k.e1_upper));
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        for e in &self.errors {
            let _ = writeln!(out, "error: {}", e.message);
        }
        out
    }

    /// Writes `intervals.csv` (n, lo, hi), `error_intervals.csv` and `detection.csv` (mu, Q).
    pub fn write_plot_data(&self, dir: &Path) -> CliResult<()> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let intervals = |a: &Analysis| -> Vec<Vec<String>> {
            a.intervals.iter().map(|iv| vec![iv.n.to_string(), iv.lo.clone(), iv.hi.clone()]).collect()
        };
        if let Some(a) = &self.analysis {
            let name = if a.kind == "yields" { "intervals.csv" } else { "error_intervals.csv" };
            write_table(&dir.join(name), &["n", "lo", "hi"], &intervals(a))?;
        }
        if let Some(a) = &self.error_products {
            write_table(&dir.join("error_intervals.csv"), &["n", "lo", "hi"], &intervals(a))?;
        }
        if let Some(m) = &self.measurements {
            let rows: Vec<Vec<String>> = self.intensities.iter().zip(&m.q).map(|(mu, q)| vec![mu.clone(), q.clone()]).collect();
            write_table(&dir.join("detection.csv"), &["mu", "Q"], &rows)?;
        }
        Ok(())
    }
}

fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let write = || -> csv::Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    };
    write().map_err(|e| CliError::io(path, e.into()))
}

/// Seven significant digits for human-readable output.
fn short(s: &str) -> String {
    match s.parse::<f64>() {
        Ok(x) => format!("{x:.6e}"),
        Err(_) => s.to_owned(),
    }
}
