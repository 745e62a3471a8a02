//! Scheme-comparison benchmark: encodes one image under several schemes,
//! decodes every pass prefix and tabulates scan cost, size and PSNR.

use std::fmt::{self, Write as _};
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use crate::codec::{self, EncoderConfig, Scheme};
use crate::error::{invalid, Error, Result};
use crate::imageio::GrayImage;
use crate::metrics::{self, CsvRow, RunStats, CSV_HEADER};
use crate::wavelet::BankId;

/// A scheme plus, for C, its detail retaining pass. Parses `A`, `B`, `C3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SchemeSpec {
    pub scheme: Scheme,
    pub drp: usize,
}

impl SchemeSpec {
    pub fn a() -> Self {
        Self { scheme: Scheme::A, drp: 0 }
    }

    pub fn b() -> Self {
        Self { scheme: Scheme::B, drp: 0 }
    }

    pub fn c(drp: usize) -> Self {
        Self { scheme: Scheme::C, drp }
    }

    /// A, B, C with drp 3, 4 and 5.
    pub fn default_set() -> Vec<Self> {
        vec![Self::a(), Self::b(), Self::c(3), Self::c(4), Self::c(5)]
    }

    pub fn config(&self, num_passes: usize, levels: usize, bank: BankId) -> Result<EncoderConfig> {
        EncoderConfig::new(self.scheme, self.drp, num_passes, levels, bank)
    }

    pub fn drp_column(&self) -> Option<usize> {
        (self.scheme == Scheme::C).then_some(self.drp)
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.scheme {
            Scheme::C => write!(f, "C{}", self.drp),
            s => write!(f, "{s}"),
        }
    }
}

impl FromStr for SchemeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, tail) = s.split_at(s.len().min(1));
        let scheme: Scheme = head.parse()?;
        let tail = tail.trim_start_matches([':', '=']);
        match scheme {
            Scheme::C => {
                let drp = tail
                    .parse()
                    .map_err(|_| invalid(format!("scheme C needs a drp, e.g. C4 (got {s:?})")))?;
                Ok(Self::c(drp))
            }
            _ if tail.is_empty() => Ok(Self { scheme, drp: 0 }),
            _ => Err(invalid(format!("unexpected suffix in {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchPlan {
    pub image: PathBuf,
    pub schemes: Vec<SchemeSpec>,
    pub num_passes: usize,
    pub levels: usize,
    pub bank: BankId,
    pub output: PathBuf,
}

impl BenchPlan {
    pub fn validate(&self) -> Result<()> {
        if self.schemes.is_empty() {
            return Err(invalid("benchmark needs at least one scheme"));
        }
        for spec in &self.schemes {
            spec.config(self.num_passes, self.levels, self.bank)?;
        }
        Ok(())
    }
}

/// Everything measured for one scheme configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeRun {
    pub spec: SchemeSpec,
    pub stats: RunStats,
    /// PSNR of the decoded image after each pass.
    pub psnr: Vec<f64>,
    pub stream_bytes: usize,
}

impl SchemeRun {
    pub fn rows(&self) -> Vec<CsvRow> {
        self.stats
            .passes
            .iter()
            .zip(&self.psnr)
            .map(|(stats, &psnr_db)| CsvRow {
                scheme: self.spec.scheme.to_string(),
                drp: self.spec.drp_column(),
                stats: stats.clone(),
                psnr_db,
            })
            .collect()
    }
}

/// Encodes `image` under `spec` and decodes every pass prefix.
pub fn run_scheme(
    image: &GrayImage,
    spec: SchemeSpec,
    num_passes: usize,
    levels: usize,
    bank: BankId,
) -> Result<SchemeRun> {
    let cfg = spec.config(num_passes, levels, bank)?;
    let (stream, stats) = codec::encode(image, &cfg)?;
    let bytes = stream.to_bytes();
    let decoded = codec::decode_progressive(&bytes, None)?;
    let psnr = decoded
        .progressive
        .iter()
        .map(|img| metrics::psnr(image, img))
        .collect::<Result<_>>()?;
    Ok(SchemeRun {
        spec,
        stats,
        psnr,
        stream_bytes: bytes.len(),
    })
}

/// Runs every scheme in plan order, handing each finished run to `on_run`
/// before starting the next.
pub fn run_plan(
    plan: &BenchPlan,
    image: &GrayImage,
    mut on_run: impl FnMut(&SchemeRun) -> Result<()>,
) -> Result<Vec<SchemeRun>> {
    plan.validate()?;
    let mut runs = Vec::with_capacity(plan.schemes.len());
    for &spec in &plan.schemes {
        let run = run_scheme(image, spec, plan.num_passes, plan.levels, plan.bank)?;
        on_run(&run)?;
        runs.push(run);
    }
    Ok(runs)
}

pub fn write_csv_header<W: Write>(writer: &mut csv::Writer<W>) -> Result<()> {
    writer.write_record(CSV_HEADER).map_err(csv_err)
}

pub fn write_csv_rows<W: Write>(writer: &mut csv::Writer<W>, run: &SchemeRun) -> Result<()> {
    for row in run.rows() {
        writer.write_record(row.fields()).map_err(csv_err)?;
    }
    writer.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => invalid(format!("csv: {other:?}")),
    }
}

fn table(runs: &[SchemeRun], passes: usize, title: &str, cell: impl Fn(&SchemeRun, usize) -> String) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{title}");
    let _ = write!(out, "{:>6}", "pass");
    for run in runs {
        let _ = write!(out, " {:>14}", run.spec.to_string());
    }
    out.push('\n');
    for pass in 1..=passes {
        let _ = write!(out, "{pass:>6}");
        for run in runs {
            let value = if pass <= run.stats.passes.len() {
                cell(run, pass)
            } else {
                "-".to_owned()
            };
            let _ = write!(out, " {value:>14}");
        }
        out.push('\n');
    }
    out
}

/// Cumulative dominant-pass cost per pass count, one column per scheme.
pub fn visits_table(runs: &[SchemeRun], passes: usize) -> String {
    table(runs, passes, "cumulative dominant-pass coefficient visits", |run, pass| {
        run.stats.cumulative_visits(pass).to_string()
    })
}

pub fn wall_time_table(runs: &[SchemeRun], passes: usize) -> String {
    table(runs, passes, "cumulative dominant-pass wall time (s)", |run, pass| {
        format!("{:.4}", run.stats.cumulative_wall_time(pass).as_secs_f64())
    })
}

pub fn psnr_table(runs: &[SchemeRun], passes: usize) -> String {
    table(runs, passes, "decoded PSNR (dB)", |run, pass| metrics::format_psnr(run.psnr[pass - 1]))
}
