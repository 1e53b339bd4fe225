//! Command-line flags and their mapping onto engine configs.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spotmatch::assignment::{PsaConfig, Stage};
use spotmatch::harness::SynthConfig;
use spotmatch::matching::CostWeights;
use spotmatch::mms::{Reduction, DEFAULT_EMA_MOMENTUM, DEFAULT_LAMBDA};
use spotmatch::pipeline::RunConfig;

use crate::{CorrelationSource, EvalOptions, SynthOptions};

#[derive(Debug, Parser)]
#[command(name = "spotmatch", version, about = "Pseudo-label assignment and mutual mining for text spotting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hierarchical pseudo-labels and loss factors for teacher/student files.
    Assign(AssignArgs),
    /// Detection P/R/F1 and end-to-end H-mean against ground truth.
    Evaluate(EvaluateArgs),
    /// Synthetic ground truth, teacher and student files.
    Synth(SynthArgs),
    /// Region deviation versus text similarity report.
    Correlate(CorrelateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StageArg {
    O2m,
    O2o,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReductionArg {
    Sum,
    Mean,
}

fn parse_weights(s: &str) -> Result<CostWeights, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [cls, text, coord] => Ok(CostWeights { cls, text, coord }),
        _ => Err(format!("expected three comma-separated weights, got {}", parts.len())),
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Detection-score threshold of the joint filter.
    #[arg(long, default_value_t = 0.4)]
    pub t_det: f64,
    /// Recognition-confidence threshold for end-to-end labels.
    #[arg(long, default_value_t = 0.7)]
    pub t_rec: f64,
    /// Skip the teacher-over-student confidence comparison.
    #[arg(long)]
    pub no_cc: bool,
    #[arg(long, value_enum, default_value = "o2o")]
    pub stage: StageArg,
    /// Students per teacher in the one-to-many stage.
    #[arg(long, default_value_t = 6)]
    pub k: usize,
    /// Matching cost weights cls,text,coord.
    #[arg(long, value_parser = parse_weights, default_value = "1,1,0.5")]
    pub weights: CostWeights,
    /// Text cost strategy: `ce` needs student slot distributions, `disparity` does not.
    #[arg(long, default_value = "ce")]
    pub text_cost: String,
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    pub lambda_scale: f64,
    #[arg(long, default_value_t = DEFAULT_EMA_MOMENTUM)]
    pub ema_momentum: f64,
    #[arg(long, value_enum, default_value = "mean")]
    pub reduction: ReductionArg,
    #[arg(long, default_value_t = 1.0)]
    pub omega_l: f64,
    #[arg(long, default_value_t = 2.0)]
    pub omega_u: f64,
    /// Decoder slots per instance.
    #[arg(long, default_value_t = 25)]
    pub max_len: usize,
    /// Alphabet file, one symbol per line.
    #[arg(long)]
    pub alphabet: Option<String>,
}

impl RunArgs {
    pub fn config(&self) -> RunConfig {
        RunConfig {
            psa: PsaConfig {
                t_det: self.t_det,
                t_rec: self.t_rec,
                enable_cc: !self.no_cc,
                stage: match self.stage {
                    StageArg::O2m => Stage::O2m,
                    StageArg::O2o => Stage::O2o,
                },
                k_o2m: self.k,
                weights: self.weights,
                text_cost: self.text_cost.clone(),
            },
            lambda_scale: self.lambda_scale,
            ema_momentum: self.ema_momentum,
            reduction: match self.reduction {
                ReductionArg::Sum => Reduction::Sum,
                ReductionArg::Mean => Reduction::Mean,
            },
            omega_l: self.omega_l,
            omega_u: self.omega_u,
            max_len: self.max_len,
            alphabet: self.alphabet.clone(),
        }
    }
}

#[derive(Debug, Args)]
pub struct AssignArgs {
    #[arg(long)]
    pub teacher: PathBuf,
    #[arg(long)]
    pub student: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    /// Word list for the "Full" protocol.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub iou_thresh: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl EvaluateArgs {
    pub fn options(&self) -> EvalOptions {
        EvalOptions {
            iou_thresh: self.iou_thresh,
            lexicon: self.lexicon.clone(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SceneArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Text instances per image.
    #[arg(long, default_value_t = 8)]
    pub instances: usize,
    /// Boundary points per polygon side.
    #[arg(long, default_value_t = 8)]
    pub k_points: usize,
    /// Polygon jitter standard deviation, normalized units.
    #[arg(long, default_value_t = 0.01)]
    pub jitter: f64,
    /// Base per-character error rate.
    #[arg(long, default_value_t = 0.05)]
    pub cer: f64,
    #[arg(long, default_value_t = 0.05)]
    pub score_noise: f64,
    #[arg(long, default_value_t = 25)]
    pub max_len: usize,
}

impl SceneArgs {
    pub fn config(&self, emit_dists: bool) -> SynthConfig {
        SynthConfig {
            seed: self.seed,
            n_instances: self.instances,
            k_points: self.k_points,
            jitter_sigma: self.jitter,
            char_error_rate: self.cer,
            score_noise: self.score_noise,
            emit_dists,
            max_len: self.max_len,
        }
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 16)]
    pub images: usize,
    /// Omit student slot distributions (then assign needs `--text-cost disparity`).
    #[arg(long)]
    pub no_dists: bool,
    #[command(flatten)]
    pub scene: SceneArgs,
}

impl SynthArgs {
    pub fn options(&self) -> SynthOptions {
        SynthOptions {
            scene: self.scene.config(!self.no_dists),
            n_images: self.images,
        }
    }
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    /// Teacher file; with `--student`, correlates existing predictions instead of synthetic ones.
    #[arg(long, requires = "student")]
    pub teacher: Option<PathBuf>,
    #[arg(long, requires = "teacher")]
    pub student: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub pairs: usize,
    /// Number of jitter levels.
    #[arg(long, default_value_t = 10)]
    pub levels: usize,
    /// Largest jitter level.
    #[arg(long, default_value_t = 0.02)]
    pub sigma_max: f64,
    /// Text instances per synthetic image.
    #[arg(long, default_value_t = 25)]
    pub instances: usize,
    #[arg(long, default_value_t = 0.05)]
    pub cer: f64,
    /// JSON report; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Binned curves as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

impl CorrelateArgs {
    pub fn source(&self) -> CorrelationSource {
        match (&self.teacher, &self.student) {
            (Some(t), Some(s)) => CorrelationSource::Files {
                teacher: t.clone(),
                student: s.clone(),
            },
            _ => CorrelationSource::Graded {
                scene: SynthConfig {
                    seed: self.seed,
                    n_instances: self.instances,
                    char_error_rate: self.cer,
                    ..SynthConfig::default()
                },
                n_pairs: self.pairs,
                levels: self.levels,
                sigma_max: self.sigma_max,
            },
        }
    }
}
