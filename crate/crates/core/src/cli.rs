//! Command-line front end.
//!
//! Every subcommand writes CSV (default) or JSON to stdout, or to `--out`.
//! Exit status is 0 on success, 1 for usage, domain and I/O errors, and 2
//! when the eigensolver fails.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::dressed::{
    asymptotic_lower, asymptotic_upper, closed_form_pair, per_atom_frequency, stair_step, Branch,
};
use crate::eigensolve::{eigh, residual_report, EighOptions};
use crate::hamiltonian::{build, ModelParams, PairConvention};
use crate::hilbert::SpaceKind;
use crate::matrix::HermitianMatrix;
use crate::sweep::{
    figure_dataset, staircase, verify, write_report, write_series, FigureSeries, FigureSettings, Format,
    Method, SeriesParams, SweepError, SweepOptions,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "collective-dressing",
    version,
    about = "Collective dressed-state spectra of N two-level atoms in a single-mode cavity",
    long_about = "Collective dressed-state spectra of N two-level atoms in a single-mode cavity \
with photon-assisted pair exchange.\n\nAll energies, couplings and correlation strengths are in \
units of the atom-field coupling g (g = 1 unless --coupling is given)."
)]
pub struct Cli {
    /// Write output to PATH instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,

    /// Suppress informational messages on stderr
    #[arg(long, global = true)]
    pub quiet: bool,

    /// Worker threads for sweeps (1 = serial); output does not depend on it
    #[arg(long, global = true, default_value_t = 1, value_name = "K")]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Space {
    Full,
    Symmetric,
}

impl From<Space> for SpaceKind {
    fn from(s: Space) -> Self {
        match s {
            Space::Full => SpaceKind::Full,
            Space::Symmetric => SpaceKind::Symmetric,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepMethod {
    Closed,
    Full,
    Symmetric,
}

impl From<SweepMethod> for Method {
    fn from(m: SweepMethod) -> Self {
        match m {
            SweepMethod::Closed => Method::ClosedForm,
            SweepMethod::Full => Method::FullEd,
            SweepMethod::Symmetric => Method::SymmetricEd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Pairs {
    Ordered,
    Unordered,
}

impl From<Pairs> for PairConvention {
    fn from(p: Pairs) -> Self {
        match p {
            Pairs::Ordered => PairConvention::Ordered,
            Pairs::Unordered => PairConvention::Unordered,
        }
    }
}

fn finite(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err("must be a finite number".into())
    }
}

fn positive(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|e| format!("{e}"))?;
    if v >= 1 {
        Ok(v)
    } else {
        Err("must be at least 1".into())
    }
}

#[derive(Debug, Args)]
pub struct Coupling {
    /// Atom-field coupling g
    #[arg(short = 'g', long, default_value_t = 1.0, value_parser = finite, allow_negative_numbers = true)]
    pub coupling: f64,

    /// Pair-exchange strength C (units of g; any sign)
    #[arg(short = 'c', long, default_value_t = 0.0, value_parser = finite, allow_negative_numbers = true)]
    pub corr: f64,

    /// Counting of the i != j pair sum
    #[arg(long, value_enum, default_value_t = Pairs::Ordered)]
    pub pair_convention: Pairs,
}

#[derive(Debug, Args)]
pub struct AtomRange {
    /// First atom number
    #[arg(long, default_value_t = 1, value_parser = positive, value_name = "A")]
    pub n_from: usize,

    /// Last atom number (inclusive)
    #[arg(long, default_value_t = 40, value_parser = positive, value_name = "B")]
    pub n_to: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Diagonalize one excitation block
    Eig {
        /// Number of atoms N
        #[arg(short = 'N', long, value_parser = positive)]
        atoms: usize,
        /// Total excitation number M of the block
        #[arg(short = 'M', long)]
        block: usize,
        #[command(flatten)]
        coupling: Coupling,
        /// Basis: full product space or Dicke-symmetric sector
        #[arg(long, value_enum, default_value_t = Space::Symmetric)]
        space: Space,
        /// Also print eigenvectors and residuals
        #[arg(long)]
        vectors: bool,
    },
    /// Closed-form dressed pair, asymptotes, stair steps and per-atom frequency
    Closed {
        /// Number of atoms N
        #[arg(short = 'N', long, value_parser = positive)]
        atoms: usize,
        /// Photon number n
        #[arg(short = 'n', long)]
        photons: usize,
        /// Atom-field coupling g
        #[arg(short = 'g', long, default_value_t = 1.0, value_parser = finite, allow_negative_numbers = true)]
        coupling: f64,
        /// Pair-exchange strength C (units of g; any sign)
        #[arg(short = 'c', long, default_value_t = 0.0, value_parser = finite, allow_negative_numbers = true)]
        corr: f64,
    },
    /// Eigenvalues against atom number
    Sweep {
        /// Photon number n (ED uses the block M = n)
        #[arg(short = 'n', long, default_value_t = 1)]
        photons: usize,
        #[command(flatten)]
        coupling: Coupling,
        #[command(flatten)]
        range: AtomRange,
        /// Closed form or exact diagonalization
        #[arg(long, value_enum, default_value_t = SweepMethod::Closed)]
        method: SweepMethod,
    },
    /// Dataset behind figure 1..6
    Fig {
        /// Figure number
        #[arg(value_parser = clap::value_parser!(u8).range(1..=6))]
        figure: u8,
        /// Photon number n
        #[arg(short = 'n', long, default_value_t = 1)]
        photons: usize,
        /// Atom-field coupling g
        #[arg(short = 'g', long, default_value_t = 1.0, value_parser = finite, allow_negative_numbers = true)]
        coupling: f64,
        /// Magnitude of the correlation strength; series use +C, -C and 0
        #[arg(short = 'c', long, default_value_t = 0.1, value_parser = finite, allow_negative_numbers = true)]
        corr: f64,
        /// Counting of the i != j pair sum
        #[arg(long, value_enum, default_value_t = Pairs::Ordered)]
        pair_convention: Pairs,
        #[command(flatten)]
        range: AtomRange,
        /// Closed form or exact diagonalization
        #[arg(long, value_enum, default_value_t = SweepMethod::Closed)]
        method: SweepMethod,
    },
    /// Gap report between the closed form and symmetric-space diagonalization
    Verify {
        /// Photon number n (block M = n)
        #[arg(short = 'n', long, default_value_t = 1)]
        photons: usize,
        #[command(flatten)]
        coupling: Coupling,
        #[command(flatten)]
        range: AtomRange,
    },
    /// Matrix of one block as (row, col, value) triplets
    Dump {
        /// Number of atoms N
        #[arg(short = 'N', long, value_parser = positive)]
        atoms: usize,
        /// Total excitation number M of the block
        #[arg(short = 'M', long)]
        block: usize,
        /// Basis: full product space or Dicke-symmetric sector
        #[arg(long, value_enum, default_value_t = Space::Symmetric)]
        space: Space,
        #[command(flatten)]
        coupling: Coupling,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) | Failure::Io(_) => EXIT_USAGE,
            Failure::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) | Failure::Io(m) => m,
        }
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Io { .. } => Failure::Io(e.to_string()),
            e if e.is_numerical() => Failure::Numerical(e.to_string()),
            e => Failure::Usage(e.to_string()),
        }
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{}", e.render());
                return EXIT_OK;
            }
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or("error: invalid arguments");
            let _ = writeln!(stderr, "{first}");
            return EXIT_USAGE;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.code()
        }
    }
}

fn io_failure(path: Option<&Path>, e: io::Error) -> Failure {
    let name = path.map_or_else(|| "<stdout>".to_string(), |p| p.display().to_string());
    Failure::Io(format!("{name}: {e}"))
}

/// Runs `emit` against `--out` or stdout.
fn with_sink(
    path: Option<&Path>,
    stdout: &mut dyn Write,
    emit: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<(), Failure> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| io_failure(Some(p), e))?;
            let mut w = BufWriter::new(file);
            emit(&mut w).and_then(|_| w.flush()).map_err(|e| io_failure(Some(p), e))
        }
        None => emit(stdout).map_err(|e| io_failure(None, e)),
    }
}

fn check_range(range: &AtomRange) -> Result<(), Failure> {
    if range.n_from > range.n_to {
        return Err(Failure::Usage(format!(
            "--n-from {} is greater than --n-to {}",
            range.n_from, range.n_to
        )));
    }
    Ok(())
}

fn build_block(atoms: usize, block: usize, space: Space, c: &Coupling) -> Result<HermitianMatrix, Failure> {
    let params = ModelParams::new(atoms, block, c.coupling, c.corr).with_pairs(c.pair_convention.into());
    build(&params, space.into()).map_err(|e| Failure::Usage(e.to_string()))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    let out = cli.out.as_deref();
    let format: Format = cli.format.into();
    let opts = SweepOptions { jobs: cli.jobs };

    match &cli.command {
        Command::Eig { atoms, block, coupling, space, vectors } => {
            let h = build_block(*atoms, *block, *space, coupling)?;
            let eigh_opts = if *vectors { EighOptions::with_vectors() } else { EighOptions::default() };
            let spectrum = eigh(&h, eigh_opts).map_err(|e| Failure::Numerical(e.to_string()))?;
            let residuals = if *vectors {
                Some(residual_report(&h, &spectrum).map_err(|e| Failure::Numerical(e.to_string()))?)
            } else {
                None
            };
            with_sink(out, stdout, |w| match format {
                Format::Csv => {
                    let dim = spectrum.dim();
                    let mut header = vec!["index".to_string(), "eigenvalue".to_string()];
                    if residuals.is_some() {
                        header.push("residual".into());
                        header.extend((0..dim).map(|i| format!("c{i}")));
                    }
                    writeln!(w, "{}", header.join(","))?;
                    for (k, value) in spectrum.eigenvalues.iter().enumerate() {
                        let mut row = vec![k.to_string(), value.to_string()];
                        if let (Some(res), Some(vecs)) = (&residuals, &spectrum.eigenvectors) {
                            row.push(res[k].to_string());
                            row.extend(vecs.column(k).iter().map(|x| x.to_string()));
                        }
                        writeln!(w, "{}", row.join(","))?;
                    }
                    Ok(())
                }
                Format::Json => {
                    let basis = h.basis();
                    let doc = json!({
                        "space": basis.kind(),
                        "atoms": basis.atoms(),
                        "block": basis.excitations(),
                        "dim": spectrum.dim(),
                        "basis": (0..basis.dim()).map(|i| basis.label(i)).collect::<Vec<_>>(),
                        "eigenvalues": spectrum.eigenvalues,
                        "max_residual": spectrum.max_residual,
                        "residuals": residuals,
                        "eigenvectors": spectrum.eigenvectors.as_ref().map(|v| {
                            (0..v.dim()).map(|k| v.column(k)).collect::<Vec<_>>()
                        }),
                    });
                    serde_json::to_writer(&mut *w, &doc)?;
                    writeln!(w)
                }
            })
        }

        Command::Closed { atoms, photons, coupling, corr } => {
            let (n, p, g, c) = (*atoms, *photons, *coupling, *corr);
            let pair = closed_form_pair(n, p, g, c);
            let per_atom = per_atom_frequency(n, p, g, c);
            let asym_upper = asymptotic_upper(n, p, c).ok();
            let asym_lower = asymptotic_lower(g, c).ok();
            let up = stair_step(Branch::Upper, n, p, g, c);
            let low = stair_step(Branch::Lower, n, p, g, c);
            with_sink(out, stdout, |w| match format {
                Format::Csv => {
                    writeln!(
                        w,
                        "N,n,e_plus,e_minus,per_atom,asym_upper,asym_lower,step_upper,step_lower,asym_step_upper,asym_step_lower"
                    )?;
                    writeln!(
                        w,
                        "{n},{p},{},{},{per_atom},{},{},{},{},{},{}",
                        pair.e_plus,
                        pair.e_minus,
                        fmt_opt(asym_upper),
                        fmt_opt(asym_lower),
                        up.exact,
                        low.exact,
                        fmt_opt(up.asymptotic),
                        fmt_opt(low.asymptotic),
                    )
                }
                Format::Json => {
                    let doc = json!({
                        "N": n,
                        "n": p,
                        "coupling": g,
                        "corr": c,
                        "e_plus": pair.e_plus,
                        "e_minus": pair.e_minus,
                        "per_atom": per_atom,
                        "asym_upper": asym_upper,
                        "asym_lower": asym_lower,
                        "step_upper": up.exact,
                        "step_lower": low.exact,
                        "asym_step_upper": up.asymptotic,
                        "asym_step_lower": low.asymptotic,
                    });
                    serde_json::to_writer(&mut *w, &doc)?;
                    writeln!(w)
                }
            })
        }

        Command::Sweep { photons, coupling, range, method } => {
            check_range(range)?;
            let params = SeriesParams {
                photons: *photons,
                coupling: coupling.coupling,
                corr: coupling.corr,
                pairs: coupling.pair_convention.into(),
            };
            let series = staircase(params, range.n_from..=range.n_to, (*method).into(), opts)?;
            with_sink(out, stdout, |w| write_series(&series, w, format))
        }

        Command::Fig { figure, photons, coupling, corr, pair_convention, range, method } => {
            check_range(range)?;
            let settings = FigureSettings {
                photons: *photons,
                coupling: *coupling,
                corr: *corr,
                from: range.n_from,
                to: range.n_to,
                method: (*method).into(),
                pairs: (*pair_convention).into(),
            };
            let data = figure_dataset(*figure, &settings, opts)?;
            emit_figure(&data, out, format, stdout, stderr, cli.quiet)
        }

        Command::Verify { photons, coupling, range } => {
            check_range(range)?;
            let params = SeriesParams {
                photons: *photons,
                coupling: coupling.coupling,
                corr: coupling.corr,
                pairs: coupling.pair_convention.into(),
            };
            let report = verify(params, range.n_from..=range.n_to, opts)?;
            with_sink(out, stdout, |w| write_report(&report, w, format))
        }

        Command::Dump { atoms, block, space, coupling } => {
            let h = build_block(*atoms, *block, *space, coupling)?;
            with_sink(out, stdout, |w| match format {
                Format::Csv => {
                    writeln!(w, "row,col,value")?;
                    for (r, c, v) in h.triplets() {
                        writeln!(w, "{r},{c},{v}")?;
                    }
                    Ok(())
                }
                Format::Json => {
                    let basis = h.basis();
                    let entries: Vec<(usize, usize, f64)> = h.triplets();
                    let doc = json!({
                        "space": basis.kind(),
                        "atoms": basis.atoms(),
                        "block": basis.excitations(),
                        "dim": h.dim(),
                        "basis": (0..basis.dim()).map(|i| basis.label(i)).collect::<Vec<_>>(),
                        "entries": entries,
                    });
                    serde_json::to_writer(&mut *w, &doc)?;
                    writeln!(w)
                }
            })
        }
    }
}

/// File name for one series of a multi-series figure: `fig3.csv` becomes
/// `fig3.pos.csv`.
pub fn series_path(base: &Path, label: &str) -> PathBuf {
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}.{label}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{label}"),
    };
    base.with_file_name(name)
}

fn emit_figure(
    data: &[FigureSeries],
    out: Option<&Path>,
    format: Format,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
    quiet: bool,
) -> Result<(), Failure> {
    match format {
        Format::Json => {
            let all: Vec<_> = data.iter().map(|f| &f.series).collect();
            with_sink(out, stdout, |w| {
                serde_json::to_writer(&mut *w, &all)?;
                writeln!(w)
            })
        }
        Format::Csv if data.len() == 1 => with_sink(out, stdout, |w| write_series(&data[0].series, w, format)),
        Format::Csv => match out {
            Some(base) => {
                for f in data {
                    let path = series_path(base, f.correlation.label());
                    with_sink(Some(&path), stdout, |w| write_series(&f.series, w, format))?;
                    if !quiet {
                        let _ = writeln!(stderr, "wrote {}", path.display());
                    }
                }
                Ok(())
            }
            None => with_sink(None, stdout, |w| {
                for (i, f) in data.iter().enumerate() {
                    if i > 0 {
                        writeln!(w)?;
                    }
                    write_series(&f.series, &mut *w, format)?;
                }
                Ok(())
            }),
        },
    }
}
