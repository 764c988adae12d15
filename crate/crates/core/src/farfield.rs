//! Far-field matrices: the data model shared by the forward solvers and the
//! imaging code, multiplicative noise, aperture restriction and the
//! `dsm-farfield v1` text format.
//!
//! Rows index receivers `x̂_i`, columns index sources `ŷ_j`.

use std::f64::consts::PI;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::ops::Range;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::params::{format_complex, parse_complex, ParamsError, WaveParams};

pub const FORMAT_MAGIC: &str = "# dsm-farfield";
pub const FORMAT_VERSION: &str = "v1";
const ENTRIES_MARKER: &str = "# entries";

#[derive(Debug, Error)]
pub enum FarFieldError {
    #[error("matrix is already noised (delta = {delta}, seed = {seed}); noise is applied once to raw data")]
    AlreadyNoised { delta: f64, seed: u64 },
    #[error("noise level must be finite and nonnegative, got {0}")]
    InvalidNoiseLevel(f64),
    #[error("empty {0} range")]
    EmptyRange(&'static str),
    #[error("{which} range {start}..{end} out of bounds for {len} directions")]
    RangeOutOfBounds { which: &'static str, start: usize, end: usize, len: usize },
    #[error("invalid far-field matrix: {0}")]
    Invariant(String),
    #[error("invalid aperture arc [{alpha}, {beta}]: need 0 <= alpha < beta <= 2π")]
    InvalidArc { alpha: f64, beta: f64 },
    #[error(transparent)]
    Params(#[from] ParamsError),
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing section: {0}")]
    MissingSection(String),
    #[error("unsupported far-field format version `{0}` (this build reads {FORMAT_VERSION})")]
    UnsupportedVersion(String),
    #[error("invariant violation: {0}")]
    Invariant(#[from] FarFieldError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Which forward model produced a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Analytic,
    Bie,
    Synthetic,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Analytic => "analytic",
            Backend::Bie => "bie",
            Backend::Synthetic => "synthetic",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "analytic" => Ok(Backend::Analytic),
            "bie" => Ok(Backend::Bie),
            "synthetic" => Ok(Backend::Synthetic),
            other => Err(format!("unknown backend `{other}` (expected analytic or bie)")),
        }
    }
}

/// Angular interval `[alpha, beta] ⊆ [0, 2π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApertureArc {
    alpha: f64,
    beta: f64,
}

impl ApertureArc {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, FarFieldError> {
        let ok = alpha.is_finite() && beta.is_finite() && 0.0 <= alpha && alpha < beta && beta <= 2.0 * PI;
        if !ok {
            return Err(FarFieldError::InvalidArc { alpha, beta });
        }
        Ok(ApertureArc { alpha, beta })
    }

    pub fn full() -> Self {
        ApertureArc { alpha: 0.0, beta: 2.0 * PI }
    }

    /// An arc that may wrap through angle zero, such as `[3π/2, π/4]`,
    /// split into at most two non-wrapping pieces.
    pub fn wrapped(alpha: f64, beta: f64) -> Result<Vec<Self>, FarFieldError> {
        let a = alpha.rem_euclid(2.0 * PI);
        let b = beta.rem_euclid(2.0 * PI);
        if a < b {
            Ok(vec![ApertureArc::new(a, b)?])
        } else if b == 0.0 {
            Ok(vec![ApertureArc::new(a, 2.0 * PI)?])
        } else if a == b {
            Err(FarFieldError::InvalidArc { alpha, beta })
        } else {
            Ok(vec![ApertureArc::new(a, 2.0 * PI)?, ApertureArc::new(0.0, b)?])
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn length(&self) -> f64 {
        self.beta - self.alpha
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseRecord {
    pub delta: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldMeta {
    pub backend: Backend,
    pub nodes: Option<usize>,
    pub truncation: Option<usize>,
    pub noise: Option<NoiseRecord>,
    /// First and last receiver angle kept by an aperture restriction.
    pub receiver_arc: Option<(f64, f64)>,
    pub source_arc: Option<(f64, f64)>,
    /// Serialized run configuration of the command that produced the data.
    pub config: Option<String>,
}

impl FarFieldMeta {
    pub fn new(backend: Backend) -> Self {
        FarFieldMeta {
            backend,
            nodes: None,
            truncation: None,
            noise: None,
            receiver_arc: None,
            source_arc: None,
            config: None,
        }
    }
}

/// `θ_i = 2π i / n`, `i = 0..n`.
pub fn equidistant_angles(n: usize) -> Vec<f64> {
    (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect()
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldMatrix {
    params: WaveParams,
    receiver_angles: Vec<f64>,
    source_angles: Vec<f64>,
    entries: DMatrix<Complex64>,
    meta: FarFieldMeta,
}

impl FarFieldMatrix {
    pub fn new(
        params: WaveParams,
        receiver_angles: Vec<f64>,
        source_angles: Vec<f64>,
        entries: DMatrix<Complex64>,
        meta: FarFieldMeta,
    ) -> Result<Self, FarFieldError> {
        params.validate()?;
        if entries.nrows() != receiver_angles.len() || entries.ncols() != source_angles.len() {
            return Err(FarFieldError::Invariant(format!(
                "entries are {}x{} but there are {} receivers and {} sources",
                entries.nrows(),
                entries.ncols(),
                receiver_angles.len(),
                source_angles.len()
            )));
        }
        if receiver_angles.is_empty() || source_angles.is_empty() {
            return Err(FarFieldError::Invariant("no directions".into()));
        }
        for (name, angles) in [("receiver", &receiver_angles), ("source", &source_angles)] {
            if angles.iter().any(|a| !a.is_finite()) || angles.windows(2).any(|w| w[0] >= w[1]) {
                return Err(FarFieldError::Invariant(format!("{name} angles must be finite and ascending")));
            }
        }
        if entries.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(FarFieldError::Invariant("non-finite entry".into()));
        }
        Ok(FarFieldMatrix { params, receiver_angles, source_angles, entries, meta })
    }

    /// Synthetic identity operator on `n` equidistant directions; its imaging
    /// functional is constant in the sampling point.
    pub fn identity(k: f64, n: usize) -> Result<Self, FarFieldError> {
        let angles = equidistant_angles(n);
        FarFieldMatrix::new(
            WaveParams::null_scatterer(k),
            angles.clone(),
            angles,
            DMatrix::identity(n, n),
            FarFieldMeta::new(Backend::Synthetic),
        )
    }

    pub fn params(&self) -> &WaveParams {
        &self.params
    }

    pub fn k(&self) -> f64 {
        self.params.k
    }

    pub fn receiver_angles(&self) -> &[f64] {
        &self.receiver_angles
    }

    pub fn source_angles(&self) -> &[f64] {
        &self.source_angles
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn meta(&self) -> &FarFieldMeta {
        &self.meta
    }

    pub fn meta_mut(&mut self) -> &mut FarFieldMeta {
        &mut self.meta
    }

    pub fn is_raw(&self) -> bool {
        self.meta.noise.is_none()
    }

    /// Replaces the entries, keeping angles and metadata. Used for synthetic
    /// manipulations such as phase shifts.
    pub fn with_entries(&self, entries: DMatrix<Complex64>) -> Result<Self, FarFieldError> {
        FarFieldMatrix::new(
            self.params,
            self.receiver_angles.clone(),
            self.source_angles.clone(),
            entries,
            self.meta.clone(),
        )
    }

    /// `F^δ_ij = F_ij (1 + δ E_ij)` with `E` drawn from a seeded ChaCha8
    /// stream (real and imaginary parts uniform on `[-1, 1]`, row-major order)
    /// and rescaled to unit spectral norm.
    pub fn add_noise(&self, delta: f64, seed: u64) -> Result<Self, FarFieldError> {
        if let Some(noise) = self.meta.noise {
            return Err(FarFieldError::AlreadyNoised { delta: noise.delta, seed: noise.seed });
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(FarFieldError::InvalidNoiseLevel(delta));
        }
        let e = noise_matrix(self.entries.nrows(), self.entries.ncols(), seed);
        let entries = self.entries.zip_map(&e, |f, e| f * (1.0 + delta * e));
        let mut meta = self.meta.clone();
        meta.noise = Some(NoiseRecord { delta, seed });
        FarFieldMatrix::new(self.params, self.receiver_angles.clone(), self.source_angles.clone(), entries, meta)
    }

    /// Keeps receivers (rows) and sources (columns) in the given zero-based,
    /// half-open index ranges.
    pub fn restrict_aperture(&self, receivers: Range<usize>, sources: Range<usize>) -> Result<Self, FarFieldError> {
        check_range("receiver", &receivers, self.receiver_angles.len())?;
        check_range("source", &sources, self.source_angles.len())?;
        let entries = self
            .entries
            .view((receivers.start, sources.start), (receivers.len(), sources.len()))
            .into_owned();
        let receiver_angles = self.receiver_angles[receivers].to_vec();
        let source_angles = self.source_angles[sources].to_vec();
        let mut meta = self.meta.clone();
        meta.receiver_arc = Some((receiver_angles[0], *receiver_angles.last().unwrap()));
        meta.source_arc = Some((source_angles[0], *source_angles.last().unwrap()));
        FarFieldMatrix::new(self.params, receiver_angles, source_angles, entries, meta)
    }
}

fn check_range(which: &'static str, range: &Range<usize>, len: usize) -> Result<(), FarFieldError> {
    if range.is_empty() {
        return Err(FarFieldError::EmptyRange(which));
    }
    if range.end > len {
        return Err(FarFieldError::RangeOutOfBounds { which, start: range.start, end: range.end, len });
    }
    Ok(())
}

/// The unit-spectral-norm perturbation used by [`FarFieldMatrix::add_noise`].
pub fn noise_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let re = rng.random_range(-1.0..=1.0);
            let im = rng.random_range(-1.0..=1.0);
            e[(i, j)] = Complex64::new(re, im);
        }
    }
    let norm = spectral_norm(&e);
    if norm > 0.0 {
        e /= Complex64::new(norm, 0.0);
    }
    e
}

fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_angles(angles: &[f64]) -> String {
    angles.iter().map(|a| format_real(*a)).collect::<Vec<_>>().join(" ")
}

/// Writes the `dsm-farfield v1` text representation.
pub fn write_farfield<W: Write>(f: &FarFieldMatrix, mut out: W) -> io::Result<()> {
    let p = f.params();
    let m = f.meta();
    let opt_usize = |v: Option<usize>| v.map_or_else(|| "none".to_string(), |v| v.to_string());
    let opt_pair = |v: Option<(f64, f64)>| {
        v.map_or_else(|| "none".to_string(), |(a, b)| format!("{} {}", format_real(a), format_real(b)))
    };
    writeln!(out, "{FORMAT_MAGIC} {FORMAT_VERSION}")?;
    writeln!(out, "k = {}", format_real(p.k))?;
    writeln!(out, "n = {}", format_complex(p.n))?;
    writeln!(out, "eta = {}", format_complex(p.eta))?;
    writeln!(out, "lambda = {}", format_complex(p.lambda))?;
    writeln!(out, "backend = {}", m.backend)?;
    writeln!(out, "nodes = {}", opt_usize(m.nodes))?;
    writeln!(out, "truncation = {}", opt_usize(m.truncation))?;
    match m.noise {
        Some(n) => {
            writeln!(out, "delta = {}", format_real(n.delta))?;
            writeln!(out, "seed = {}", n.seed)?;
        }
        None => {
            writeln!(out, "delta = none")?;
            writeln!(out, "seed = none")?;
        }
    }
    writeln!(out, "receiver_arc = {}", opt_pair(m.receiver_arc))?;
    writeln!(out, "source_arc = {}", opt_pair(m.source_arc))?;
    if let Some(config) = &m.config {
        writeln!(out, "config = {config}")?;
    }
    writeln!(out, "receivers = {}", format_angles(f.receiver_angles()))?;
    writeln!(out, "sources = {}", format_angles(f.source_angles()))?;
    writeln!(out, "{ENTRIES_MARKER}")?;
    let e = f.entries();
    for i in 0..e.nrows() {
        let row: Vec<String> =
            (0..e.ncols()).map(|j| format!("{} {}", format_real(e[(i, j)].re), format_real(e[(i, j)].im))).collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

pub fn save_farfield(f: &FarFieldMatrix, path: impl AsRef<Path>) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_farfield(f, &mut w)?;
    w.flush()
}

pub fn load_farfield(path: impl AsRef<Path>) -> Result<FarFieldMatrix, FormatError> {
    read_farfield(BufReader::new(File::open(path)?))
}

#[derive(Default)]
struct Header {
    k: Option<f64>,
    n: Option<Complex64>,
    eta: Option<Complex64>,
    lambda: Option<Complex64>,
    backend: Option<Backend>,
    nodes: Option<Option<usize>>,
    truncation: Option<Option<usize>>,
    delta: Option<Option<f64>>,
    seed: Option<Option<u64>>,
    receiver_arc: Option<(f64, f64)>,
    source_arc: Option<(f64, f64)>,
    config: Option<String>,
    receivers: Option<Vec<f64>>,
    sources: Option<Vec<f64>>,
}

fn parse_err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse { line, message: message.into() }
}

fn parse_f64(line: usize, s: &str) -> Result<f64, FormatError> {
    s.parse::<f64>().map_err(|_| parse_err(line, format!("invalid number `{s}`")))
}

fn parse_optional<T: std::str::FromStr>(line: usize, s: &str) -> Result<Option<T>, FormatError> {
    if s == "none" {
        return Ok(None);
    }
    s.parse::<T>().map(Some).map_err(|_| parse_err(line, format!("invalid value `{s}`")))
}

fn parse_list(line: usize, s: &str) -> Result<Vec<f64>, FormatError> {
    s.split_whitespace().map(|t| parse_f64(line, t)).collect()
}

fn parse_pair(line: usize, s: &str) -> Result<Option<(f64, f64)>, FormatError> {
    if s == "none" {
        return Ok(None);
    }
    match parse_list(line, s)?.as_slice() {
        [a, b] => Ok(Some((*a, *b))),
        _ => Err(parse_err(line, "expected two angles")),
    }
}

/// Reads and validates the `dsm-farfield v1` text representation.
pub fn read_farfield<R: BufRead>(input: R) -> Result<FarFieldMatrix, FormatError> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, first) = lines.next().ok_or_else(|| FormatError::MissingSection("header line".into()))?;
    let first = first?;
    let version = first
        .trim()
        .strip_prefix(FORMAT_MAGIC)
        .ok_or_else(|| parse_err(1, format!("expected `{FORMAT_MAGIC} {FORMAT_VERSION}` header")))?
        .trim();
    if version != FORMAT_VERSION {
        return Err(FormatError::UnsupportedVersion(version.to_string()));
    }

    let mut h = Header::default();
    let mut found_entries = false;
    for (no, line) in lines.by_ref() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == ENTRIES_MARKER {
            found_entries = true;
            break;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| parse_err(no, "expected `key = value`"))?;
        let complex = |v: &str| parse_complex(v).map_err(|e| parse_err(no, e.to_string()));
        match key {
            "k" => h.k = Some(parse_f64(no, value)?),
            "n" => h.n = Some(complex(value)?),
            "eta" => h.eta = Some(complex(value)?),
            "lambda" => h.lambda = Some(complex(value)?),
            "backend" => h.backend = Some(value.parse().map_err(|e: String| parse_err(no, e))?),
            "nodes" => h.nodes = Some(parse_optional(no, value)?),
            "truncation" => h.truncation = Some(parse_optional(no, value)?),
            "delta" => h.delta = Some(parse_optional(no, value)?),
            "seed" => h.seed = Some(parse_optional(no, value)?),
            "receiver_arc" => h.receiver_arc = parse_pair(no, value)?,
            "source_arc" => h.source_arc = parse_pair(no, value)?,
            "config" => h.config = Some(value.to_string()),
            "receivers" => h.receivers = Some(parse_list(no, value)?),
            "sources" => h.sources = Some(parse_list(no, value)?),
            other => return Err(parse_err(no, format!("unknown metadata key `{other}`"))),
        }
    }
    let missing = |key: &str| FormatError::MissingSection(format!("metadata key `{key}`"));
    let k = h.k.ok_or_else(|| missing("k"))?;
    let n = h.n.ok_or_else(|| missing("n"))?;
    let eta = h.eta.ok_or_else(|| missing("eta"))?;
    let lambda = h.lambda.ok_or_else(|| missing("lambda"))?;
    let backend = h.backend.ok_or_else(|| missing("backend"))?;
    let receivers = h.receivers.ok_or_else(|| missing("receivers"))?;
    let sources = h.sources.ok_or_else(|| missing("sources"))?;
    if !found_entries {
        return Err(FormatError::MissingSection("entries".into()));
    }
    let noise = match (h.delta.flatten(), h.seed.flatten()) {
        (Some(delta), Some(seed)) => Some(NoiseRecord { delta, seed }),
        (None, None) => None,
        _ => return Err(FormatError::Invariant(FarFieldError::Invariant("delta and seed must both be set".into()))),
    };

    let (rows, cols) = (receivers.len(), sources.len());
    let mut entries = DMatrix::zeros(rows, cols);
    let mut row = 0;
    let mut last_line = 0;
    for (no, line) in lines {
        let line = line?;
        last_line = no;
        if line.trim().is_empty() {
            continue;
        }
        if row == rows {
            return Err(parse_err(no, format!("extra data after {rows} entry rows")));
        }
        let values = parse_list(no, &line)?;
        if values.len() != 2 * cols {
            return Err(parse_err(no, format!("expected {} numbers ({} complex entries), found {}", 2 * cols, cols, values.len())));
        }
        for j in 0..cols {
            entries[(row, j)] = Complex64::new(values[2 * j], values[2 * j + 1]);
        }
        row += 1;
    }
    if row < rows {
        return Err(parse_err(
            last_line + 1,
            format!("entries section truncated: expected {rows} rows, found {row}"),
        ));
    }

    let params = WaveParams { k, n, eta, lambda };
    let meta = FarFieldMeta {
        backend,
        nodes: h.nodes.flatten(),
        truncation: h.truncation.flatten(),
        noise,
        receiver_arc: h.receiver_arc,
        source_arc: h.source_arc,
        config: h.config,
    };
    Ok(FarFieldMatrix::new(params, receivers, sources, entries, meta)?)
}
