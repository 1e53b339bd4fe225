//! Command implementations behind the `spotmatch` binary.
//!
//! Every command writes a fingerprint of its effective configuration: as the
//! first line of JSONL outputs, as a `header` field of JSON reports and as a
//! `#` comment atop CSV files.

use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use spotmatch::assignment::Engine;
use spotmatch::format::{read_predictions, write_predictions, FormatError, Header};
use spotmatch::harness::{
    correlation_report, evaluate, graded_jitter_points, pair_points, synth_scenes, CorrelationBin,
    CorrelationPoint, CorrelationReport, EvalReport, Lexicon, SynthConfig,
};
use spotmatch::pipeline::{align_images, assign_image, AssignRow, RunConfig};
use spotmatch::text::Alphabet;
use spotmatch::{Error, PredictionSet};

pub mod args;

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "SPOTMATCH_THREADS";

#[derive(Debug)]
pub enum CliError {
    /// Malformed input file. Exit code 2.
    Schema { path: PathBuf, line: usize, message: String },
    /// Teacher/student or prediction/gt image ids do not line up. Exit code 3.
    IdMismatch(String),
    /// Not enough pairs for a correlation report. Exit code 4.
    TooFewPairs { need: usize, got: usize },
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema { .. } => 2,
            CliError::IdMismatch(_) => 3,
            CliError::TooFewPairs { .. } => 4,
            CliError::Other(_) => 1,
        }
    }

    fn io(path: &Path, e: impl fmt::Display) -> Self {
        CliError::Other(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Schema { path, line, message } => {
                write!(f, "{}: line {line}: {message}", path.display())
            }
            CliError::IdMismatch(m) => write!(f, "image id mismatch: {m}"),
            CliError::TooFewPairs { need, got } => {
                write!(f, "correlation needs at least {need} pairs, got {got}")
            }
            CliError::Other(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::DuplicateImage(_) | Error::MissingImage(_) => CliError::IdMismatch(e.to_string()),
            Error::TooFewPairs { need, got } => CliError::TooFewPairs { need, got },
            other => CliError::Other(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Hex SHA-256 over the command name and its canonical JSON configuration.
pub fn fingerprint(command: &str, config: &serde_json::Value) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update([0u8]);
    h.update(config.to_string().as_bytes());
    hex::encode(h.finalize())
}

pub fn header(command: &str, config: &impl Serialize) -> Header {
    let config = serde_json::to_value(config).expect("configs serialize");
    Header {
        fingerprint: fingerprint(command, &config),
        command: command.to_string(),
        config,
    }
}

/// Worker pool honoring [`THREADS_ENV`]; rayon's default size otherwise.
pub fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::Other(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        b = b.num_threads(n.max(1));
    }
    b.build().map_err(|e| CliError::Other(e.to_string()))
}

pub fn load_predictions(path: &Path) -> CliResult<Vec<PredictionSet>> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_predictions(BufReader::new(f)).map_err(|e| match e {
        FormatError::Schema { line, message } => CliError::Schema {
            path: path.to_path_buf(),
            line,
            message,
        },
        other => CliError::io(path, other),
    })
}

pub fn load_alphabet(path: Option<&str>) -> CliResult<Alphabet> {
    match path {
        None => Ok(Alphabet::latin()),
        Some(p) => {
            let f = File::open(p).map_err(|e| CliError::io(Path::new(p), e))?;
            Ok(Alphabet::from_reader(BufReader::new(f))?)
        }
    }
}

pub fn load_lexicon(path: &Path) -> CliResult<Lexicon> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(Lexicon::new(text.lines().map(str::trim).filter(|l| !l.is_empty())))
}

fn write_json_line(w: &mut impl Write, value: &impl Serialize) -> io::Result<()> {
    serde_json::to_writer(&mut *w, value)?;
    w.write_all(b"\n")
}

/// Assignment rows for aligned images, computed in parallel, in teacher order.
pub fn assign_rows(
    teachers: &[PredictionSet],
    students: &[PredictionSet],
    cfg: &RunConfig,
) -> CliResult<Vec<AssignRow>> {
    cfg.validate()?;
    let engine = Engine::new(load_alphabet(cfg.alphabet.as_deref())?, cfg.max_len);
    let pairs = align_images(teachers, students)?;
    thread_pool()?.install(|| {
        pairs
            .par_iter()
            .map(|(t, s)| {
                assign_image(&engine, t, s, cfg)
                    .map_err(|e| CliError::Other(format!("image {}: {e}", t.image_id)))
            })
            .collect()
    })
}

/// Header line followed by one [`AssignRow`] per teacher image.
pub fn cmd_assign(teacher: &Path, student: &Path, cfg: &RunConfig, out: &mut impl Write) -> CliResult<()> {
    let teachers = load_predictions(teacher)?;
    let students = load_predictions(student)?;
    let rows = assign_rows(&teachers, &students, cfg)?;
    let werr = |e: io::Error| CliError::Other(e.to_string());
    write_json_line(out, &header("assign", cfg)).map_err(werr)?;
    for row in &rows {
        write_json_line(out, row).map_err(werr)?;
    }
    out.flush().map_err(werr)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalOptions {
    pub iou_thresh: f64,
    /// Lexicon file. Without one only the "None" protocol is reported.
    pub lexicon: Option<PathBuf>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            iou_thresh: 0.5,
            lexicon: None,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct EvalOutput {
    pub header: Header,
    pub report: EvalReport,
}

pub fn cmd_evaluate(pred: &Path, gt: &Path, opts: &EvalOptions, out: &mut impl Write) -> CliResult<EvalReport> {
    if !(0.0..=1.0).contains(&opts.iou_thresh) {
        return Err(CliError::Other("iou threshold must lie in [0, 1]".into()));
    }
    let preds = load_predictions(pred)?;
    let gts = load_predictions(gt)?;
    let lexicon = opts.lexicon.as_deref().map(load_lexicon).transpose()?;
    let report = evaluate(&preds, &gts, lexicon.as_ref(), opts.iou_thresh)?;
    let output = EvalOutput {
        header: header("evaluate", opts),
        report,
    };
    serde_json::to_writer_pretty(&mut *out, &output).map_err(|e| CliError::Other(e.to_string()))?;
    writeln!(out).map_err(|e| CliError::Other(e.to_string()))?;
    Ok(output.report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthOptions {
    pub scene: SynthConfig,
    pub n_images: usize,
}

pub const SYNTH_FILES: [&str; 3] = ["gt.jsonl", "teacher.jsonl", "student.jsonl"];

/// Writes ground truth, teacher and student files into `dir`.
pub fn cmd_synth(opts: &SynthOptions, dir: &Path) -> CliResult<[PathBuf; 3]> {
    opts.scene.validate()?;
    let scenes = synth_scenes(&opts.scene, opts.n_images)?;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let head = header("synth", opts);
    let paths = SYNTH_FILES.map(|f| dir.join(f));
    for (i, path) in paths.iter().enumerate() {
        let file = File::create(path).map_err(|e| CliError::io(path, e))?;
        let mut w = BufWriter::new(file);
        write_json_line(&mut w, &head).map_err(|e| CliError::io(path, e))?;
        let sets = scenes.iter().map(|s| match i {
            0 => &s.gt,
            1 => &s.teacher,
            _ => &s.student,
        });
        write_predictions(&mut w, sets).map_err(|e| CliError::io(path, e))?;
        w.flush().map_err(|e| CliError::io(path, e))?;
    }
    Ok(paths)
}

/// Where correlation pairs come from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationSource {
    /// Synthetic scenes with jitter graded over `levels` values up to `sigma_max`.
    Graded {
        scene: SynthConfig,
        n_pairs: usize,
        levels: usize,
        sigma_max: f64,
    },
    /// Index-aligned instances of existing teacher and student files.
    Files { teacher: PathBuf, student: PathBuf },
}

#[derive(Debug, Serialize)]
pub struct CorrelationOutput {
    pub header: Header,
    pub report: CorrelationReport,
}

pub fn correlation_points(source: &CorrelationSource) -> CliResult<Vec<CorrelationPoint>> {
    match source {
        CorrelationSource::Graded {
            scene,
            n_pairs,
            levels,
            sigma_max,
        } => {
            scene.validate()?;
            Ok(graded_jitter_points(scene, *n_pairs, *levels, *sigma_max)?)
        }
        CorrelationSource::Files { teacher, student } => {
            let teachers = load_predictions(teacher)?;
            let students = load_predictions(student)?;
            let mut points = Vec::new();
            for (t, s) in align_images(&teachers, &students)? {
                points.extend(pair_points(t, s).map_err(|e| {
                    CliError::IdMismatch(format!("image {}: {e}", t.image_id))
                })?);
            }
            Ok(points)
        }
    }
}

/// JSON report to `out`, plus the binned curves as CSV when `csv` is given.
pub fn cmd_correlate(
    source: &CorrelationSource,
    out: &mut impl Write,
    csv: Option<&Path>,
) -> CliResult<CorrelationReport> {
    let report = correlation_report(&correlation_points(source)?)?;
    let head = header("correlate", source);
    if let Some(path) = csv {
        write_bins_csv(path, &head, &report).map_err(|e| CliError::io(path, e))?;
    }
    let output = CorrelationOutput { header: head, report };
    serde_json::to_writer_pretty(&mut *out, &output).map_err(|e| CliError::Other(e.to_string()))?;
    writeln!(out).map_err(|e| CliError::Other(e.to_string()))?;
    Ok(output.report)
}

fn write_bins_csv(path: &Path, head: &Header, report: &CorrelationReport) -> Result<(), Box<dyn std::error::Error>> {
    let mut file = BufWriter::new(File::create(path)?);
    writeln!(file, "# fingerprint {}", head.fingerprint)?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["axis", "bin", "deviation_lo", "deviation_hi", "mean_deviation", "mean_similarity", "count"])?;
    let axes: [(&str, &[CorrelationBin]); 2] = [("diou", &report.bins_diou), ("iou", &report.bins_iou)];
    for (axis, bins) in axes {
        for (i, b) in bins.iter().enumerate() {
            w.write_record([
                axis.to_string(),
                i.to_string(),
                b.deviation_lo.to_string(),
                b.deviation_hi.to_string(),
                b.mean_deviation.to_string(),
                b.mean_similarity.to_string(),
                b.count.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
