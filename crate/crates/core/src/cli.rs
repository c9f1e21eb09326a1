//! Command dispatch for the `cmetric` binary.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;

use crate::contraction::{diameter, verify_nesting, DiameterMethod, DiameterOptions, DEFAULT_COMPACTNESS_MARGIN, DEFAULT_DIAMETER_CAP};
use crate::domains::{CPoint, Domain, SampleStream, Sampling, DEFAULT_BOUNDARY_MARGIN};
use crate::error::{Error, Result};
use crate::fixed_point::{solve, FixedPointProblem};
use crate::report::{emit_csv, emit_json, Report, SweepRow};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLES: usize = 10_000;

/// Boundary margin for sampled diameters; the supremum is approached at
/// the boundary, so this is much tighter than [`DEFAULT_BOUNDARY_MARGIN`].
pub const DIAMETER_SAMPLING_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Distance,
    Diameter,
    VerifyNesting,
    Solve,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub input_path: PathBuf,
    pub seed: u64,
    pub sample_count: usize,
    pub output_format: OutputFormat,
    pub output_path: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DistanceSpec {
    domain: Domain,
    x: CPoint,
    y: CPoint,
}

#[derive(Deserialize, Default, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum DiameterKind {
    #[default]
    ClosedForm,
    Sampled,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NestingSpec {
    ambient: Domain,
    inner: Domain,
    #[serde(default)]
    method: DiameterKind,
    cap: Option<f64>,
    compactness_margin: Option<f64>,
    boundary_margin: Option<f64>,
}

impl NestingSpec {
    fn options(&self) -> DiameterOptions {
        DiameterOptions {
            cap: self.cap.unwrap_or(DEFAULT_DIAMETER_CAP),
            compactness_margin: self.compactness_margin.unwrap_or(DEFAULT_COMPACTNESS_MARGIN),
        }
    }

    fn validate(&self) -> Result<()> {
        self.ambient.validate()?;
        self.inner.validate()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepConfig {
    id: String,
    ambient: Domain,
    inner: Domain,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSpec {
    /// Shorthand for `ScaledDisk r` inside the unit disk, one row per radius.
    #[serde(default)]
    radii: Vec<f64>,
    #[serde(default)]
    configs: Vec<SweepConfig>,
    boundary_margin: Option<f64>,
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

fn nesting_stream(cfg: &RunConfig, margin: Option<f64>) -> SampleStream {
    SampleStream::new(cfg.seed, margin.unwrap_or(DEFAULT_BOUNDARY_MARGIN), cfg.sample_count)
}

fn closed_form(x: &Domain, u: &Domain, opts: &DiameterOptions) -> Result<crate::contraction::ContractionCertificate> {
    diameter(x, u, &DiameterMethod::ClosedForm, opts)
}

fn sweep_rows(cfg: &RunConfig, spec: SweepSpec) -> Result<Vec<SweepRow>> {
    let mut configs = Vec::with_capacity(spec.radii.len() + spec.configs.len());
    for &r in &spec.radii {
        configs.push(SweepConfig {
            id: format!("r{}", crate::report::fmt_real(r)),
            ambient: Domain::UnitDisk,
            inner: Domain::scaled_disk(r)?,
        });
    }
    configs.extend(spec.configs);
    configs.sort_by(|a, b| a.id.cmp(&b.id));
    if configs.windows(2).any(|w| w[0].id == w[1].id) {
        return Err(Error::Parse("sweep config ids must be unique".into()));
    }
    let stream = nesting_stream(cfg, spec.boundary_margin);
    configs
        .iter()
        .map(|c| {
            c.ambient.validate()?;
            c.inner.validate()?;
            let cert = closed_form(&c.ambient, &c.inner, &DiameterOptions::default())?;
            let rep = verify_nesting(&c.ambient, &c.inner, &cert, &stream)?;
            let r = c
                .inner
                .disk_factors()
                .map(|f| f.iter().map(|d| d.radius).collect())
                .unwrap_or_default();
            Ok(SweepRow {
                config: c.id.clone(),
                r,
                m: cert.m,
                k: cert.k,
                max_violation: rep.max_violation,
                pairs: rep.pairs_checked,
            })
        })
        .collect()
}

/// Computes the report for `cfg` and returns its serialized bytes.
pub fn render(cfg: &RunConfig) -> Result<Vec<u8>> {
    let text = fs::read_to_string(&cfg.input_path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", cfg.input_path.display())))?;
    if cfg.output_format == OutputFormat::Csv && cfg.command != Command::Sweep {
        return Err(Error::Parse("csv output is only available for the sweep command".into()));
    }
    let (seed, samples) = (cfg.seed, cfg.sample_count);
    let report = match cfg.command {
        Command::Distance => {
            let spec: DistanceSpec = parse(&text)?;
            spec.domain.validate()?;
            let value = spec.domain.caratheodory(&spec.x, &spec.y)?;
            Report::Distance {
                seed,
                samples,
                domain: spec.domain.kind_name().into(),
                x: spec.x,
                y: spec.y,
                value,
            }
        }
        Command::Diameter => {
            let spec: NestingSpec = parse(&text)?;
            spec.validate()?;
            let method = match spec.method {
                DiameterKind::ClosedForm => DiameterMethod::ClosedForm,
                DiameterKind::Sampled => DiameterMethod::Sampled(
                    SampleStream::new(seed, spec.boundary_margin.unwrap_or(DIAMETER_SAMPLING_MARGIN), samples)
                        .with_sampling(Sampling::BoundaryBiased),
                ),
            };
            let certificate = diameter(&spec.ambient, &spec.inner, &method, &spec.options())?;
            Report::Diameter { seed, samples, certificate }
        }
        Command::VerifyNesting => {
            let spec: NestingSpec = parse(&text)?;
            spec.validate()?;
            if spec.method == DiameterKind::Sampled {
                return Err(Error::Capability("verify-nesting accepts closed-form certificates only".into()));
            }
            let certificate = closed_form(&spec.ambient, &spec.inner, &spec.options())?;
            let report = verify_nesting(&spec.ambient, &spec.inner, &certificate, &nesting_stream(cfg, spec.boundary_margin))?;
            Report::VerifyNesting {
                seed,
                samples,
                certificate,
                report,
            }
        }
        Command::Solve => {
            let problem: FixedPointProblem = parse(&text)?;
            problem.validate()?;
            let certificate = closed_form(&problem.ambient, &problem.image, &DiameterOptions::default())?;
            let result = solve(&problem, &certificate)?;
            Report::Solve {
                seed,
                samples,
                certificate,
                result,
            }
        }
        Command::Sweep => {
            let spec: SweepSpec = parse(&text)?;
            let rows = sweep_rows(cfg, spec)?;
            if cfg.output_format == OutputFormat::Csv {
                return Ok(emit_csv(&rows));
            }
            Report::Sweep { seed, samples, rows }
        }
    };
    Ok(emit_json(&report))
}

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so the destination is either untouched or complete.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

/// Renders the report and writes it to `output_path` when set. Returns the
/// report bytes either way; nothing is written on error.
pub fn run(cfg: &RunConfig) -> Result<Vec<u8>> {
    let bytes = render(cfg)?;
    if let Some(path) = &cfg.output_path {
        write_atomic(path, &bytes)?;
    }
    Ok(bytes)
}
