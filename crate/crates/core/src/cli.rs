//! Batch front-end: flag/config parsing, experiment orchestration and
//! CSV/JSON emission.
//!
//! Every flag has a same-named key in the optional TOML config file
//! (`--config run.toml`); flags win over the file. Exit codes: 0 success,
//! 1 numerical-contract violation, 2 invalid configuration.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::dynamics::{default_t_grid, DenseCalculus, EnergyWindow, StateVector};
use crate::error::{Error, Result};
use crate::lattice::TruncationBox;
use crate::operators::{
    build_heisenberg_direct, cayley_laplacian, compress_potential, compress_toeplitz, CompressedOperator,
    IndexSet, OperatorSpec,
};
use crate::spectral::{
    bloch_check, essential_spectrum_fiber, fiber_hamiltonian, fiber_sweep, sigma_sweep, DEFAULT_GRID,
};
use crate::symbols::{heisenberg_symbols, FiberParameter, ShiftSymbol};

/// Tolerance for the exact operator identities.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Tolerance for the finite Bloch decomposition.
pub const BLOCH_TOL: f64 = 1e-10;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONTRACT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "magnonspec", version, about = "Spectral analysis of Toeplitz-plus-potential operators on ordered lattices")]
pub struct Cli {
    /// Flat TOML file with the same keys as the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    /// Check the direct/Toeplitz and Cayley identities entrywise.
    VerifyEquivalence,
    /// Eigenvalues of all fibers on a torus grid.
    Spectrum,
    /// Eigenvalues of one fiber.
    Fiber,
    /// Essential spectrum of one fiber and its Σ_j bands.
    Essential,
    /// Periodized operator against the union of its fibers.
    Bloch,
    /// ‖χ_{Ω_j(n)} κ(H)‖ over a range of n, with the in-band contrast.
    Nonprop,
    /// sup_t ‖χ_{Ω_j(n)} e^{-itH} f‖/‖f‖ for f = κ(H)g.
    Evolve,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    VerifyEquivalence(Settings),
    Spectrum(Settings),
    Fiber(Settings),
    Essential(Settings),
    Bloch(Settings),
    Nonprop(Settings),
    Evolve(Settings),
}

impl Command {
    fn split(self) -> (CommandKind, Settings) {
        match self {
            Self::VerifyEquivalence(s) => (CommandKind::VerifyEquivalence, s),
            Self::Spectrum(s) => (CommandKind::Spectrum, s),
            Self::Fiber(s) => (CommandKind::Fiber, s),
            Self::Essential(s) => (CommandKind::Essential, s),
            Self::Bloch(s) => (CommandKind::Bloch, s),
            Self::Nonprop(s) => (CommandKind::Nonprop, s),
            Self::Evolve(s) => (CommandKind::Evolve, s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Heisenberg,
    Symbols,
    Cayley,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

macro_rules! settings {
    ($( $(#[$doc:meta])* $field:ident : $ty:ty ),* $(,)?) => {
        /// Raw run parameters, as given on the command line or in a config file.
        #[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct Settings {
            $( $(#[$doc])* pub $field: Option<$ty>, )*
        }

        impl Settings {
            /// Field-wise `self.or(file)`: flags win.
            pub fn over(self, file: Settings) -> Settings {
                Settings { $( $field: self.$field.or(file.$field), )* }
            }
        }
    };
}

settings! {
    /// Model family.
    #[arg(long, value_enum)]
    model: ModelKind,
    /// Transverse coupling of the XXZ chain.
    #[arg(long, allow_hyphen_values = true)]
    a: f64,
    /// Longitudinal coupling of the XXZ chain.
    #[arg(long, allow_hyphen_values = true)]
    b: f64,
    /// Number of magnons.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    n: usize,
    /// Toeplitz symbol file (`z_1 … z_d re im` rows).
    #[arg(long)]
    phi: PathBuf,
    /// Potential symbol file.
    #[arg(long)]
    psi: PathBuf,
    /// Cayley generating set file.
    #[arg(long)]
    m_path: PathBuf,
    /// Largest gap kept in the window.
    #[arg(long)]
    gap_max: i64,
    /// Range of the first coordinate, `lo..hi` inclusive; selects the full operator.
    #[arg(long, allow_hyphen_values = true)]
    z1: String,
    /// Fiber parameter τ ∈ [0, 1).
    #[arg(long, allow_hyphen_values = true)]
    tau: f64,
    /// Number of points of the torus grid.
    #[arg(long)]
    grid: usize,
    /// Gap index j ∈ {2, …, N}.
    #[arg(long)]
    j: usize,
    /// Smallest region depth n.
    #[arg(long)]
    n_min: i64,
    /// Largest region depth n.
    #[arg(long)]
    n_max: i64,
    /// Region depth for the dynamical trace.
    #[arg(long)]
    n_region: i64,
    /// Energy window support, lower end.
    #[arg(long, allow_hyphen_values = true)]
    window_lo: f64,
    /// Energy window support, upper end.
    #[arg(long, allow_hyphen_values = true)]
    window_hi: f64,
    /// In-band contrast window, lower end.
    #[arg(long, allow_hyphen_values = true)]
    contrast_lo: f64,
    /// In-band contrast window, upper end.
    #[arg(long, allow_hyphen_values = true)]
    contrast_hi: f64,
    /// Last sampled time.
    #[arg(long)]
    t_max: f64,
    /// Time step of the sampled grid.
    #[arg(long)]
    t_step: f64,
    /// Seed of the random initial vector.
    #[arg(long)]
    seed: u64,
    /// Ring length for the Bloch check.
    #[arg(long)]
    l1: i64,
    /// Output file; stdout when absent.
    #[arg(long)]
    output: PathBuf,
    /// Output format.
    #[arg(long, value_enum)]
    format: Format,
    /// Write the assembled matrix as `i k re im` triplets.
    #[arg(long)]
    dump_matrix: PathBuf,
}

/// Operator family after validation.
#[derive(Debug, Clone)]
pub enum Model {
    Heisenberg { a: f64, b: f64, n: usize },
    Symbols { phi: ShiftSymbol, psi: ShiftSymbol },
    Cayley { generators: ShiftSymbol },
}

impl Model {
    /// `(φ, ψ)` such that the operator is `T_φ + V_ψ`.
    pub fn symbols(&self) -> (ShiftSymbol, ShiftSymbol) {
        match self {
            Self::Heisenberg { a, b, n } => heisenberg_symbols(*a, *b, *n),
            Self::Symbols { phi, psi } => (phi.clone(), psi.clone()),
            Self::Cayley { generators } => (generators.clone(), generators.scaled_real(-1.0)),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Heisenberg { n, .. } => *n,
            Self::Symbols { phi, .. } => phi.dim(),
            Self::Cayley { generators } => generators.dim(),
        }
    }
}

/// Validated parameters of one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub model: Model,
    pub gap_max: i64,
    pub z1: Option<RangeInclusive<i64>>,
    pub tau: FiberParameter,
    pub grid: usize,
    pub j: usize,
    pub n_range: RangeInclusive<i64>,
    pub n_region: i64,
    pub window: Option<EnergyWindow>,
    pub contrast: Option<EnergyWindow>,
    pub t_grid: Vec<f64>,
    pub seed: u64,
    pub l1: i64,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub dump_matrix: Option<PathBuf>,
    /// Effective settings after defaults, echoed as provenance.
    pub settings: Settings,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

pub fn parse_range(text: &str) -> Result<RangeInclusive<i64>> {
    let (lo, hi) = text.split_once("..").ok_or_else(|| invalid(format!("range {text:?} is not `lo..hi`")))?;
    let lo: i64 = lo.trim().parse().map_err(|_| invalid(format!("bad range start in {text:?}")))?;
    let hi: i64 = hi.trim().trim_start_matches('=').parse().map_err(|_| invalid(format!("bad range end in {text:?}")))?;
    if lo > hi {
        return Err(invalid(format!("empty range {text:?}")));
    }
    Ok(lo..=hi)
}

fn read_symbol(path: &Path) -> Result<ShiftSymbol> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    ShiftSymbol::parse(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn window(lo: Option<f64>, hi: Option<f64>, what: &str) -> Result<Option<EnergyWindow>> {
    match (lo, hi) {
        (None, None) => Ok(None),
        (Some(lo), Some(hi)) => Ok(Some(EnergyWindow::new(lo, hi)?)),
        _ => Err(invalid(format!("{what} window needs both ends"))),
    }
}

impl RunConfig {
    pub fn validate(command: CommandKind, s: Settings) -> Result<Self> {
        let model = match s.model.unwrap_or(ModelKind::Heisenberg) {
            ModelKind::Heisenberg => {
                let n = s.n.unwrap_or(2);
                if n == 0 {
                    return Err(invalid("N must be >= 1"));
                }
                let (a, b) = (s.a.unwrap_or(1.0), s.b.unwrap_or(1.0));
                if !a.is_finite() || !b.is_finite() {
                    return Err(invalid("couplings must be finite"));
                }
                Model::Heisenberg { a, b, n }
            }
            ModelKind::Symbols => {
                let phi = read_symbol(s.phi.as_deref().ok_or_else(|| invalid("symbols model needs --phi"))?)?;
                let psi = match &s.psi {
                    Some(p) => read_symbol(p)?,
                    None => ShiftSymbol::zero(phi.dim()),
                };
                if phi.dim() != psi.dim() {
                    return Err(invalid(format!("phi has dimension {}, psi {}", phi.dim(), psi.dim())));
                }
                if !phi.is_hermitian(1e-12) || !psi.is_hermitian(1e-12) {
                    return Err(invalid("symbols must satisfy rho(-eta) = conj(rho(eta))"));
                }
                Model::Symbols { phi, psi }
            }
            ModelKind::Cayley => {
                let m = read_symbol(s.m_path.as_deref().ok_or_else(|| invalid("cayley model needs --m-path"))?)?;
                if !m.has_symmetric_support() {
                    return Err(invalid("generating set must be symmetric"));
                }
                let generators = ShiftSymbol::indicator(m.dim(), m.iter().map(|(p, _)| p.clone()))?;
                Model::Cayley { generators }
            }
        };
        let big_n = model.dim();
        if big_n == 0 {
            return Err(invalid("symbols of dimension 0 have no lattice"));
        }
        let gap_max = s.gap_max.unwrap_or(12);
        if gap_max < 1 {
            return Err(invalid("gap-max must be >= 1"));
        }
        let z1 = s.z1.as_deref().map(parse_range).transpose()?;
        let tau = s.tau.unwrap_or(0.0);
        if !tau.is_finite() {
            return Err(invalid("tau must be finite"));
        }
        let grid = s.grid.unwrap_or(DEFAULT_GRID);
        if grid == 0 {
            return Err(invalid("grid must be positive"));
        }
        let j = s.j.unwrap_or(2);
        let needs_gap = matches!(command, CommandKind::Nonprop | CommandKind::Evolve);
        if needs_gap && (big_n < 2 || !(2..=big_n).contains(&j)) {
            return Err(invalid(format!("j = {j} outside 2..={big_n}")));
        }
        let n_range = s.n_min.unwrap_or(0)..=s.n_max.unwrap_or(gap_max);
        if n_range.is_empty() || *n_range.start() < 0 {
            return Err(invalid(format!("bad n range {n_range:?}")));
        }
        let t_grid = match (s.t_max, s.t_step) {
            (None, None) => default_t_grid(),
            (t_max, t_step) => {
                let t_max = t_max.unwrap_or(50.0);
                let t_step = t_step.unwrap_or(0.5);
                if !(t_step > 0.0 && t_max >= 0.0 && t_max.is_finite()) {
                    return Err(invalid("time grid needs t-step > 0 and t-max >= 0"));
                }
                let steps = (t_max / t_step + 1e-9).floor() as usize;
                (0..=steps).map(|k| k as f64 * t_step).collect()
            }
        };
        let l1 = s.l1.unwrap_or(4);
        if l1 < 1 {
            return Err(invalid("l1 must be >= 1"));
        }
        let fiber_commands =
            matches!(command, CommandKind::Spectrum | CommandKind::Fiber | CommandKind::Essential);
        if fiber_commands && big_n < 2 && command != CommandKind::Spectrum {
            return Err(invalid("fiber operators need N >= 2"));
        }
        let n_region = s.n_region.unwrap_or(20);
        let seed = s.seed.unwrap_or(1);
        let format = s.format.unwrap_or(Format::Csv);
        let (a, b, n) = match &model {
            Model::Heisenberg { a, b, n } => (Some(*a), Some(*b), Some(*n)),
            _ => (None, None, None),
        };
        let effective = Settings {
            model: Some(s.model.unwrap_or(ModelKind::Heisenberg)),
            a,
            b,
            n,
            gap_max: Some(gap_max),
            tau: Some(tau),
            grid: Some(grid),
            j: Some(j),
            n_min: Some(*n_range.start()),
            n_max: Some(*n_range.end()),
            n_region: Some(n_region),
            t_max: t_grid.last().copied(),
            t_step: Some(if t_grid.len() > 1 { t_grid[1] - t_grid[0] } else { s.t_step.unwrap_or(0.5) }),
            seed: Some(seed),
            l1: Some(l1),
            format: Some(format),
            ..s.clone()
        };
        Ok(Self {
            command,
            model,
            gap_max,
            z1,
            tau: FiberParameter::new(tau),
            grid,
            j,
            n_range,
            n_region,
            window: window(s.window_lo, s.window_hi, "energy")?,
            contrast: window(s.contrast_lo, s.contrast_hi, "contrast")?,
            t_grid,
            seed,
            l1,
            output: s.output,
            format,
            dump_matrix: s.dump_matrix,
            settings: effective,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
}

impl Serialize for Cell {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cell::Int(v) => s.serialize_i64(*v),
            Cell::Float(v) => s.serialize_f64(*v),
        }
    }
}

/// Column-named results of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: CommandKind,
    pub config: Settings,
}

impl Provenance {
    pub fn of(cfg: &RunConfig) -> Self {
        Self { tool: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION"), command: cfg.command, config: cfg.settings.clone() }
    }
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    provenance: &'a Provenance,
    columns: &'a [String],
    rows: &'a [Vec<Cell>],
}

/// Renders a table. CSV floats carry 17 significant digits.
pub fn emit(table: &Table, format: Format, provenance: &Provenance) -> String {
    match format {
        Format::Csv => {
            let mut out = table.columns.join(",");
            out.push('\n');
            for row in &table.rows {
                let cells: Vec<String> = row
                    .iter()
                    .map(|c| match c {
                        Cell::Int(v) => v.to_string(),
                        Cell::Float(v) => format!("{v:.16e}"),
                    })
                    .collect();
                let _ = writeln!(out, "{}", cells.join(","));
            }
            out
        }
        Format::Json => {
            let doc = JsonDoc { provenance, columns: &table.columns, rows: &table.rows };
            let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
            s.push('\n');
            s
        }
    }
}

/// Parses a CSV produced by [`emit`] back into columns and float rows.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(Error::Empty("csv"))?;
    let columns = header.split(',').map(str::to_string).collect();
    let rows = lines
        .enumerate()
        .map(|(i, l)| {
            l.split(',')
                .map(|c| c.parse::<f64>().map_err(|e| Error::Parse { line: i + 2, msg: e.to_string() }))
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok((columns, rows))
}

/// What a run produced: tables to write and a human summary.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    /// Extra tables written next to the main output, keyed by file suffix.
    pub side_tables: Vec<(String, Table)>,
    pub summary: Vec<String>,
    pub passed: bool,
}

impl Outcome {
    fn ok(table: Table, summary: Vec<String>) -> Self {
        Self { table, side_tables: Vec::new(), summary, passed: true }
    }
}

fn full_box(cfg: &RunConfig) -> Result<Option<TruncationBox>> {
    Ok(cfg.z1.clone().map(|r| TruncationBox::full(cfg.model.dim(), r, cfg.gap_max)))
}

/// The operator `nonprop`/`evolve` measure: the full window when `--z1` is
/// given, otherwise the fiber at `--tau`.
fn study_operator(cfg: &RunConfig) -> Result<CompressedOperator> {
    let (phi, psi) = cfg.model.symbols();
    match full_box(cfg)? {
        Some(bx) => {
            let index = Arc::new(IndexSet::from_box(&bx)?);
            let op = OperatorSpec::new(phi, psi, index)?.assemble()?;
            op.ensure_hermitian()?;
            Ok(op)
        }
        None => fiber_hamiltonian(cfg.tau, &phi, &psi, cfg.gap_max),
    }
}

/// Hull of `∪_{τ,τ'} Σ_j(τ, τ')` on the configured grid.
pub fn band_hull(phi: &ShiftSymbol, psi: &ShiftSymbol, j: usize, grid: usize, gap_max: i64) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..grid {
        let rows = sigma_sweep(FiberParameter::grid(k, grid), phi, psi, grid, gap_max)?;
        for r in rows.iter().filter(|r| r.j == j) {
            for &v in &r.values {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    Ok((lo, hi))
}

/// Window around the lowest eigenvalue lying below the band hull, reaching
/// no closer than `margin` to the band.
pub fn outlier_window(eigenvalues: &[f64], band: (f64, f64), margin: f64) -> Option<EnergyWindow> {
    let below: Vec<f64> = eigenvalues.iter().copied().filter(|&v| v < band.0 - margin).collect();
    let lowest = *below.first()?;
    let hi = band.0 - margin;
    let lo = lowest - (hi - lowest).max(margin);
    EnergyWindow::new(lo, hi).ok()
}

/// Window on the middle quarter of the band, used as the in-band contrast.
pub fn contrast_window(band: (f64, f64)) -> Result<EnergyWindow> {
    let mid = 0.5 * (band.0 + band.1);
    let quarter = 0.125 * (band.1 - band.0).max(1e-6);
    EnergyWindow::around(mid, quarter)
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let (phi, psi) = cfg.model.symbols();
    match cfg.command {
        CommandKind::VerifyEquivalence => verify_equivalence(cfg),
        CommandKind::Spectrum | CommandKind::Fiber => {
            let rows = if cfg.command == CommandKind::Fiber {
                let op = fiber_hamiltonian(cfg.tau, &phi, &psi, cfg.gap_max)?;
                if let Some(path) = &cfg.dump_matrix {
                    op.matrix.write_triplets(std::io::BufWriter::new(std::fs::File::create(path)?))?;
                }
                vec![crate::spectral::FiberSample { tau: cfg.tau.value(), values: crate::spectral::eig_dense(&op)?.values().to_vec() }]
            } else {
                fiber_sweep(&phi, &psi, cfg.grid, cfg.gap_max)?
            };
            let mut t = Table::new(&["tau", "eigenvalue_index", "value"]);
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for r in &rows {
                for (i, &v) in r.values.iter().enumerate() {
                    lo = lo.min(v);
                    hi = hi.max(v);
                    t.push(vec![Cell::Float(r.tau), Cell::Int(i as i64), Cell::Float(v)]);
                }
            }
            Ok(Outcome::ok(t, vec![format!("{} eigenvalues, hull [{lo:.12}, {hi:.12}]", rows.iter().map(|r| r.values.len()).sum::<usize>())]))
        }
        CommandKind::Essential => {
            let rows = sigma_sweep(cfg.tau, &phi, &psi, cfg.grid, cfg.gap_max)?;
            let mut t = Table::new(&["tau_prime", "band_value", "j"]);
            for r in &rows {
                for &v in &r.values {
                    t.push(vec![Cell::Float(r.tau_prime), Cell::Float(v), Cell::Int(r.j as i64)]);
                }
            }
            let ess = essential_spectrum_fiber(cfg.tau, &phi, &psi, cfg.grid, cfg.gap_max)?;
            let (lo, hi) = ess.hull().ok_or(Error::Empty("essential spectrum"))?;
            Ok(Outcome::ok(t, vec![format!("essential spectrum hull at tau={}: [{lo:.12}, {hi:.12}]", cfg.tau.value())]))
        }
        CommandKind::Bloch => {
            let d = bloch_check(&phi, &psi, cfg.l1, cfg.gap_max)?;
            let mut t = Table::new(&["l1", "gap_max", "discrepancy"]);
            t.push(vec![Cell::Int(cfg.l1), Cell::Int(cfg.gap_max), Cell::Float(d)]);
            let passed = d <= BLOCH_TOL;
            Ok(Outcome { table: t, side_tables: Vec::new(), summary: vec![format!("{d:.3e}")], passed })
        }
        CommandKind::Nonprop => nonprop(cfg, &phi, &psi),
        CommandKind::Evolve => evolve(cfg, &phi, &psi),
    }
}

fn verify_equivalence(cfg: &RunConfig) -> Result<Outcome> {
    let bx = match full_box(cfg)? {
        Some(b) => b,
        None => TruncationBox::full(cfg.model.dim(), -cfg.gap_max..=cfg.gap_max, cfg.gap_max),
    };
    let index = Arc::new(IndexSet::from_box(&bx)?);
    let (phi, psi) = cfg.model.symbols();
    let split = compress_toeplitz(&phi, &index)?.plus(&compress_potential(&psi, &index)?)?;
    if let Some(path) = &cfg.dump_matrix {
        split.matrix.write_triplets(std::io::BufWriter::new(std::fs::File::create(path)?))?;
    }
    let mut t = Table::new(&["check", "max_abs_diff"]);
    let mut summary = Vec::new();
    let mut passed = true;
    let mut record = |name: &str, code: i64, diff: f64| {
        let ok = diff <= IDENTITY_TOL;
        passed &= ok;
        summary.push(format!("{} {name}: max diff {diff:.3e}", if ok { "PASS" } else { "FAIL" }));
        t.push(vec![Cell::Int(code), Cell::Float(diff)]);
    };
    match &cfg.model {
        Model::Heisenberg { a, b, n } => {
            let direct = build_heisenberg_direct(*n, *a, *b, &bx)?;
            record("direct hopping vs Toeplitz + potential", 0, direct.matrix.max_abs_diff(&split.matrix));
            let s = ShiftSymbol::signed_units(*n, 1.0);
            let lap = cayley_laplacian(&s, &index)?;
            let rhs = compress_toeplitz(&s, &index)?.plus(&compress_potential(&s.scaled_real(-1.0), &index)?)?;
            record("Cayley Laplacian vs Toeplitz + potential", 1, lap.matrix.max_abs_diff(&rhs.matrix));
        }
        Model::Cayley { generators } => {
            let lap = cayley_laplacian(generators, &index)?;
            record("Cayley Laplacian vs Toeplitz + potential", 1, lap.matrix.max_abs_diff(&split.matrix));
        }
        Model::Symbols { .. } => {
            let spec = OperatorSpec::new(phi, psi, Arc::clone(&index))?;
            let mut worst: f64 = 0.0;
            for i in 0..index.len() {
                let mut e = vec![crate::Complex64::default(); index.len()];
                e[i] = crate::Complex64::new(1.0, 0.0);
                let col = spec.apply(&e)?;
                for (r, v) in col.iter().enumerate() {
                    worst = worst.max((v - split.matrix.get(r, i)).norm());
                }
            }
            record("matrix-free vs assembled", 2, worst);
        }
    }
    let herm = split.matrix.hermitian_defect();
    record("hermiticity", 3, herm);
    Ok(Outcome { table: t, side_tables: Vec::new(), summary, passed })
}

fn nonprop(cfg: &RunConfig, phi: &ShiftSymbol, psi: &ShiftSymbol) -> Result<Outcome> {
    let op = study_operator(cfg)?;
    let calc = DenseCalculus::new(op)?;
    let band = band_hull(phi, psi, cfg.j, cfg.grid.min(64), cfg.gap_max)?;
    let mut summary = vec![format!("band hull of Sigma_{}: [{:.12}, {:.12}]", cfg.j, band.0, band.1)];
    let kappa = match cfg.window {
        Some(w) => w,
        None => outlier_window(&calc.eig.values, band, 0.1)
            .ok_or_else(|| Error::InvalidConfig("no eigenvalue below the band; pass --window-lo/--window-hi".into()))?,
    };
    if !kappa.avoids(band.0, band.1) {
        summary.push(format!("warning: window [{}, {}] meets the band", kappa.lo, kappa.hi));
    }
    let contrast = match cfg.contrast {
        Some(w) => w,
        None => contrast_window(band)?,
    };
    let mut t = Table::new(&["n", "norm"]);
    let mut c = Table::new(&["n", "norm"]);
    let mut prev = f64::INFINITY;
    let mut monotone = true;
    for n in cfg.n_range.clone() {
        let v = calc.nonprop_norm(cfg.j, n, |x| kappa.eval(x))?;
        monotone &= v <= prev * (1.0 + 1e-9) + 1e-12;
        prev = v;
        t.push(vec![Cell::Int(n), Cell::Float(v)]);
        c.push(vec![Cell::Int(n), Cell::Float(calc.nonprop_norm(cfg.j, n, |x| contrast.eval(x))?)]);
    }
    summary.push(format!("window [{:.6}, {:.6}], contrast [{:.6}, {:.6}]", kappa.lo, kappa.hi, contrast.lo, contrast.hi));
    if !monotone {
        summary.push("FAIL: norm increased with n".into());
    }
    Ok(Outcome { table: t, side_tables: vec![("contrast".into(), c)], summary, passed: monotone })
}

fn evolve(cfg: &RunConfig, phi: &ShiftSymbol, psi: &ShiftSymbol) -> Result<Outcome> {
    let op = study_operator(cfg)?;
    let calc = DenseCalculus::new(op)?;
    let kappa = match cfg.window {
        Some(w) => w,
        None => {
            let band = band_hull(phi, psi, cfg.j, cfg.grid.min(64), cfg.gap_max)?;
            outlier_window(&calc.eig.values, band, 0.1)
                .ok_or_else(|| Error::InvalidConfig("no eigenvalue below the band; pass --window-lo/--window-hi".into()))?
        }
    };
    let g = StateVector::random(calc.dim(), cfg.seed);
    let f = calc.apply_function(|x| kappa.eval(x), g.amplitudes());
    if f.norm() == 0.0 {
        return Err(Error::InvalidConfig("energy window contains no eigenvalue".into()));
    }
    let trace = calc.dynamical_trace(cfg.j, cfg.n_region, &f, &cfg.t_grid)?;
    let bound = calc.nonprop_norm(cfg.j, cfg.n_region, |x| kappa.eval(x))? * g.norm() / f.norm();
    let worst = trace.iter().map(|&(_, r)| r).fold(0.0, f64::max);
    let mut t = Table::new(&["t", "ratio"]);
    for (time, r) in trace {
        t.push(vec![Cell::Float(time), Cell::Float(r)]);
    }
    let passed = worst <= bound * (1.0 + 1e-9) + 1e-14;
    Ok(Outcome {
        table: t,
        side_tables: Vec::new(),
        summary: vec![format!("sup ratio {worst:.6e}, operator-norm bound {bound:.6e}")],
        passed,
    })
}

fn side_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

fn load_config_file(path: &Path) -> Result<Settings> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<bool> {
    let (kind, flags) = cli.command.split();
    let settings = match &cli.config {
        Some(path) => flags.over(load_config_file(path)?),
        None => flags,
    };
    let cfg = RunConfig::validate(kind, settings)?;
    let outcome = run(&cfg)?;
    let prov = Provenance::of(&cfg);
    let body = emit(&outcome.table, cfg.format, &prov);
    match &cfg.output {
        Some(path) => {
            std::fs::write(path, body)?;
            for (suffix, table) in &outcome.side_tables {
                std::fs::write(side_path(path, suffix), emit(table, cfg.format, &prov))?;
            }
        }
        None => {
            out.write_all(body.as_bytes())?;
            for (suffix, table) in &outcome.side_tables {
                writeln!(out, "# {suffix}")?;
                out.write_all(emit(table, cfg.format, &prov).as_bytes())?;
            }
        }
    }
    for line in &outcome.summary {
        writeln!(err, "{line}")?;
    }
    Ok(outcome.passed)
}

/// Runs the CLI on explicit arguments and streams; returns the exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
        }
    };
    match execute(cli, out, err) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CONTRACT,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::InvalidConfig(_) | Error::Parse { .. } | Error::TooLarge { .. } | Error::IndexOutOfRange { .. } => {
                    EXIT_CONFIG
                }
                _ => EXIT_CONTRACT,
            }
        }
    }
}
