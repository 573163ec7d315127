//! Eigenvalue-versus-atom-number datasets and their serialization.
//!
//! A [`StaircaseSeries`] holds one row per atom number with both branches,
//! the per-atom splitting and the forward stair steps. Rows can come from the
//! closed form or from exact diagonalization of the `M = n` block. The CSV
//! and JSON layouts written here are what the plotting scripts consume.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::ops::RangeInclusive;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::ser::SerializeTuple;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::dressed::{closed_form_pair, per_atom_frequency, DressedPair};
use crate::eigensolve::{eigh, EighError, EighOptions};
use crate::hamiltonian::{build, HamiltonianError, ModelParams, PairConvention};
use crate::hilbert::{block_dimension, SpaceKind};

/// Largest block handed to the dense eigensolver during a sweep.
pub const MAX_ED_DIM: usize = 2048;

pub const SERIES_HEADER: [&str; 6] = ["N", "e_plus", "e_minus", "per_atom", "step_upper", "step_lower"];

pub const REPORT_HEADER: [&str; 13] = [
    "N",
    "M",
    "dim",
    "closed_plus",
    "closed_minus",
    "ed_plus",
    "ed_minus",
    "abs_gap_plus",
    "abs_gap_minus",
    "rel_gap_plus",
    "rel_gap_minus",
    "ed_max",
    "ed_min",
];

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("{0}")]
    Domain(String),
    #[error("N={atoms}: {source}")]
    Hamiltonian { atoms: usize, source: HamiltonianError },
    #[error("N={atoms}: {source}")]
    Eigen { atoms: usize, source: EighError },
    #[error("N={atoms}: block dimension {dim} exceeds the dense limit {MAX_ED_DIM}")]
    DimensionLimit { atoms: usize, dim: usize },
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("malformed series: {0}")]
    Parse(String),
}

impl SweepError {
    pub fn is_numerical(&self) -> bool {
        matches!(self, SweepError::Eigen { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "closed")]
    ClosedForm,
    #[serde(rename = "full")]
    FullEd,
    #[serde(rename = "symmetric")]
    SymmetricEd,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed",
            Method::FullEd => "full",
            Method::SymmetricEd => "symmetric",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "closed" => Ok(Method::ClosedForm),
            "full" => Ok(Method::FullEd),
            "symmetric" => Ok(Method::SymmetricEd),
            other => Err(format!("unknown method '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesParams {
    pub photons: usize,
    pub coupling: f64,
    pub corr: f64,
    #[serde(default)]
    pub pairs: PairConvention,
}

impl SeriesParams {
    pub fn new(photons: usize, coupling: f64, corr: f64) -> Self {
        Self { photons, coupling, corr, pairs: PairConvention::Ordered }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub atoms: usize,
    pub e_plus: f64,
    pub e_minus: f64,
    pub per_atom: f64,
    pub step_upper: f64,
    pub step_lower: f64,
}

impl Serialize for SeriesPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut t = serializer.serialize_tuple(6)?;
        t.serialize_element(&self.atoms)?;
        t.serialize_element(&self.e_plus)?;
        t.serialize_element(&self.e_minus)?;
        t.serialize_element(&self.per_atom)?;
        t.serialize_element(&self.step_upper)?;
        t.serialize_element(&self.step_lower)?;
        t.end()
    }
}

impl<'de> Deserialize<'de> for SeriesPoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (atoms, e_plus, e_minus, per_atom, step_upper, step_lower) =
            <(usize, f64, f64, f64, f64, f64)>::deserialize(deserializer)?;
        Ok(Self { atoms, e_plus, e_minus, per_atom, step_upper, step_lower })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaircaseSeries {
    pub params: SeriesParams,
    pub method: Method,
    pub points: Vec<SeriesPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepOptions {
    /// Worker threads; 0 or 1 evaluates serially.
    pub jobs: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { jobs: 1 }
    }
}

fn run_parallel<T: Send>(opts: SweepOptions, work: impl FnOnce() -> T + Send) -> T {
    if opts.jobs <= 1 {
        return work();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(opts.jobs).build() {
        Ok(pool) => pool.install(work),
        Err(_) => work(),
    }
}

fn map_atoms<T: Send>(
    atoms: &[usize],
    opts: SweepOptions,
    f: impl Fn(usize) -> Result<T, SweepError> + Sync + Send,
) -> Result<Vec<T>, SweepError> {
    if opts.jobs <= 1 {
        atoms.iter().map(|&n| f(n)).collect()
    } else {
        // indexed collect keeps ascending-N order
        run_parallel(opts, || atoms.par_iter().map(|&n| f(n)).collect())
    }
}

/// Extremal eigenvalues of the `M = photons` block.
pub fn ed_extremes(
    kind: SpaceKind,
    atoms: usize,
    params: &SeriesParams,
) -> Result<DressedPair, SweepError> {
    let spectrum = ed_spectrum(kind, atoms, params)?;
    Ok(DressedPair { e_plus: spectrum.max(), e_minus: spectrum.min() })
}

fn ed_spectrum(
    kind: SpaceKind,
    atoms: usize,
    params: &SeriesParams,
) -> Result<crate::eigensolve::Spectrum, SweepError> {
    let dim = block_dimension(kind, atoms, params.photons)
        .map_err(|e| SweepError::Hamiltonian { atoms, source: e.into() })?;
    if dim > MAX_ED_DIM {
        return Err(SweepError::DimensionLimit { atoms, dim });
    }
    let model = ModelParams::new(atoms, params.photons, params.coupling, params.corr).with_pairs(params.pairs);
    let h = build(&model, kind).map_err(|source| SweepError::Hamiltonian { atoms, source })?;
    eigh(&h, EighOptions::default()).map_err(|source| SweepError::Eigen { atoms, source })
}

fn validate(params: &SeriesParams) -> Result<(), SweepError> {
    if !params.coupling.is_finite() {
        return Err(SweepError::Domain(format!("coupling must be finite, got {}", params.coupling)));
    }
    if !params.corr.is_finite() {
        return Err(SweepError::Domain(format!("corr must be finite, got {}", params.corr)));
    }
    Ok(())
}

/// One row per atom number in `range`. Steps on the last row use an extra
/// evaluation just past the range.
pub fn staircase(
    params: SeriesParams,
    range: RangeInclusive<usize>,
    method: Method,
    opts: SweepOptions,
) -> Result<StaircaseSeries, SweepError> {
    validate(&params)?;
    if *range.start() == 0 {
        return Err(SweepError::Domain("atom range must start at N >= 1".into()));
    }
    if range.is_empty() {
        return Ok(StaircaseSeries { params, method, points: Vec::new() });
    }
    let atoms: Vec<usize> = (*range.start()..=*range.end() + 1).collect();
    let pairs = map_atoms(&atoms, opts, |n| match method {
        Method::ClosedForm => Ok(closed_form_pair(n, params.photons, params.coupling, params.corr)),
        Method::FullEd => ed_extremes(SpaceKind::Full, n, &params),
        Method::SymmetricEd => ed_extremes(SpaceKind::Symmetric, n, &params),
    })?;

    let points = atoms
        .windows(2)
        .zip(pairs.windows(2))
        .map(|(n, p)| {
            let per_atom = match method {
                Method::ClosedForm => per_atom_frequency(n[0], params.photons, params.coupling, params.corr),
                _ => p[0].splitting() / n[0] as f64,
            };
            SeriesPoint {
                atoms: n[0],
                e_plus: p[0].e_plus,
                e_minus: p[0].e_minus,
                per_atom,
                step_upper: p[1].e_plus - p[0].e_plus,
                step_lower: p[1].e_minus - p[0].e_minus,
            }
        })
        .collect();
    Ok(StaircaseSeries { params, method, points })
}

/// Settings shared by the six figure datasets. `corr` is a magnitude; the
/// positive and negative series use `+corr` and `-corr`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureSettings {
    pub photons: usize,
    pub coupling: f64,
    pub corr: f64,
    pub from: usize,
    pub to: usize,
    pub method: Method,
    pub pairs: PairConvention,
}

impl Default for FigureSettings {
    fn default() -> Self {
        Self {
            photons: 1,
            coupling: 1.0,
            corr: 0.1,
            from: 1,
            to: 40,
            method: Method::ClosedForm,
            pairs: PairConvention::Ordered,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correlation {
    Positive,
    Negative,
    None,
}

impl Correlation {
    pub fn label(self) -> &'static str {
        match self {
            Correlation::Positive => "pos",
            Correlation::Negative => "neg",
            Correlation::None => "zero",
        }
    }
}

/// Series overlaid in each figure, in drawing order.
pub fn figure_layout(fig: u8) -> Option<&'static [Correlation]> {
    use Correlation::*;
    Some(match fig {
        1 => &[None],
        2 => &[Positive],
        3 => &[Positive, None],
        4 => &[Negative, None],
        5 => &[Positive, Negative],
        6 => &[Positive, Negative, None],
        _ => return Option::None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureSeries {
    pub correlation: Correlation,
    pub series: StaircaseSeries,
}

pub fn figure_dataset(fig: u8, settings: &FigureSettings, opts: SweepOptions) -> Result<Vec<FigureSeries>, SweepError> {
    let layout = figure_layout(fig).ok_or_else(|| SweepError::Domain(format!("figure must be 1..6, got {fig}")))?;
    let magnitude = settings.corr.abs();
    layout
        .iter()
        .map(|&correlation| {
            let corr = match correlation {
                Correlation::Positive => magnitude,
                Correlation::Negative => -magnitude,
                Correlation::None => 0.0,
            };
            let params = SeriesParams { photons: settings.photons, coupling: settings.coupling, corr, pairs: settings.pairs };
            let series = staircase(params, settings.from..=settings.to, settings.method, opts)?;
            Ok(FigureSeries { correlation, series })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub atoms: usize,
    pub block: usize,
    pub dim: usize,
    pub closed: DressedPair,
    /// Symmetric-space eigenvalue nearest to `closed.e_plus`.
    pub ed_plus: f64,
    /// Symmetric-space eigenvalue nearest to `closed.e_minus`.
    pub ed_minus: f64,
    pub abs_gap_plus: f64,
    pub abs_gap_minus: f64,
    pub rel_gap_plus: f64,
    pub rel_gap_minus: f64,
    pub ed_max: f64,
    pub ed_min: f64,
}

/// Closed form against symmetric-space diagonalization. Measures the
/// agreement only; disagreement is data, not an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub params: SeriesParams,
    pub rows: Vec<VerifyRow>,
}

fn nearest(values: &[f64], target: f64) -> f64 {
    values
        .iter()
        .copied()
        .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
        .expect("spectrum is never empty")
}

fn relative_gap(gap: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        gap
    } else {
        gap / reference.abs()
    }
}

pub fn verify(params: SeriesParams, range: RangeInclusive<usize>, opts: SweepOptions) -> Result<VerifyReport, SweepError> {
    validate(&params)?;
    if *range.start() == 0 {
        return Err(SweepError::Domain("atom range must start at N >= 1".into()));
    }
    let atoms: Vec<usize> = range.collect();
    let rows = map_atoms(&atoms, opts, |n| {
        let closed = closed_form_pair(n, params.photons, params.coupling, params.corr);
        let spectrum = ed_spectrum(SpaceKind::Symmetric, n, &params)?;
        let ed_plus = nearest(&spectrum.eigenvalues, closed.e_plus);
        let ed_minus = nearest(&spectrum.eigenvalues, closed.e_minus);
        let abs_gap_plus = (ed_plus - closed.e_plus).abs();
        let abs_gap_minus = (ed_minus - closed.e_minus).abs();
        Ok(VerifyRow {
            atoms: n,
            block: params.photons,
            dim: spectrum.dim(),
            closed,
            ed_plus,
            ed_minus,
            abs_gap_plus,
            abs_gap_minus,
            rel_gap_plus: relative_gap(abs_gap_plus, closed.e_plus),
            rel_gap_minus: relative_gap(abs_gap_minus, closed.e_minus),
            ed_max: spectrum.max(),
            ed_min: spectrum.min(),
        })
    })?;
    Ok(VerifyReport { params, rows })
}

fn csv_err(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => io::Error::other(format!("{other:?}")),
    }
}

pub fn write_series<W: Write>(series: &StaircaseSeries, sink: W, format: Format) -> io::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
            w.write_record(SERIES_HEADER).map_err(csv_err)?;
            for p in &series.points {
                w.write_record([
                    p.atoms.to_string(),
                    p.e_plus.to_string(),
                    p.e_minus.to_string(),
                    p.per_atom.to_string(),
                    p.step_upper.to_string(),
                    p.step_lower.to_string(),
                ])
                .map_err(csv_err)?;
            }
            w.flush()
        }
        Format::Json => {
            let mut sink = sink;
            serde_json::to_writer(&mut sink, series)?;
            sink.write_all(b"\n")?;
            sink.flush()
        }
    }
}

pub fn write_report<W: Write>(report: &VerifyReport, sink: W, format: Format) -> io::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
            w.write_record(REPORT_HEADER).map_err(csv_err)?;
            for r in &report.rows {
                w.write_record([
                    r.atoms.to_string(),
                    r.block.to_string(),
                    r.dim.to_string(),
                    r.closed.e_plus.to_string(),
                    r.closed.e_minus.to_string(),
                    r.ed_plus.to_string(),
                    r.ed_minus.to_string(),
                    r.abs_gap_plus.to_string(),
                    r.abs_gap_minus.to_string(),
                    r.rel_gap_plus.to_string(),
                    r.rel_gap_minus.to_string(),
                    r.ed_max.to_string(),
                    r.ed_min.to_string(),
                ])
                .map_err(csv_err)?;
            }
            w.flush()
        }
        Format::Json => {
            let mut sink = sink;
            serde_json::to_writer(&mut sink, report)?;
            sink.write_all(b"\n")?;
            sink.flush()
        }
    }
}

/// Writes to a file, attaching the path to any I/O failure.
pub fn write_series_to_path(series: &StaircaseSeries, path: &Path, format: Format) -> Result<(), SweepError> {
    let io_err = |source| SweepError::Io { path: path.display().to_string(), source };
    let file = File::create(path).map_err(io_err)?;
    write_series(series, BufWriter::new(file), format).map_err(io_err)
}

/// Parses the CSV layout written by [`write_series`]; the header must match exactly.
pub fn read_series_csv<R: Read>(source: R) -> Result<Vec<SeriesPoint>, SweepError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    let header = r.headers().map_err(|e| SweepError::Parse(e.to_string()))?;
    if header.iter().ne(SERIES_HEADER.iter().copied()) {
        return Err(SweepError::Parse(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut points = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| SweepError::Parse(e.to_string()))?;
        let field = |i: usize| -> Result<f64, SweepError> {
            record[i]
                .parse::<f64>()
                .map_err(|e| SweepError::Parse(format!("row {}: column {}: {e}", line + 1, SERIES_HEADER[i])))
        };
        let atoms = record[0]
            .parse::<usize>()
            .map_err(|e| SweepError::Parse(format!("row {}: column N: {e}", line + 1)))?;
        points.push(SeriesPoint {
            atoms,
            e_plus: field(1)?,
            e_minus: field(2)?,
            per_atom: field(3)?,
            step_upper: field(4)?,
            step_lower: field(5)?,
        });
    }
    Ok(points)
}
