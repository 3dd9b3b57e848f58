use std::path::PathBuf;

use anyhow::Result;
use arcfit::{GaussianPrior, LogNormalPrior, PriorSet, DEFAULT_MAX_LOOKBACK};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "arcfit", version, about = "Segment tempo series into continuous quadratic arcs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Batch MAP segmentation of a series.
    Fit(FitArgs),
    /// Read `position,value` lines from standard input and segment online.
    Stream(StreamArgs),
    /// Most probable chain when the last arc may still be in progress.
    Predict(PredictArgs),
    /// Long-timescale fit followed by a short-timescale fit of its residual.
    Multiscale(MultiscaleArgs),
    /// Draw a synthetic series from the generative model.
    Sample(SampleArgs),
    /// Distance of breakpoints from the nearest barline.
    Deviance(DevianceArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Series CSV (`position,value`); `-` reads standard input.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["path", "onsets"])]
    pub input: Option<PathBuf>,
    /// Same as `--input`.
    #[arg(value_name = "INPUT", conflicts_with = "onsets")]
    pub path: Option<PathBuf>,
    /// Onset CSV (`beat,time_seconds`) converted to tempo before fitting.
    #[arg(long, value_name = "PATH")]
    pub onsets: Option<PathBuf>,
    /// Where the tempo of an inter-onset interval is placed.
    #[arg(long, value_enum, default_value_t = TempoAt::Left)]
    pub tempo_at: TempoAt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TempoAt {
    Left,
    Mid,
}

#[derive(Debug, Args)]
pub struct ShapeArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub slope_mean: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub slope_sd: f64,
    /// Mean of the log curvature.
    #[arg(long, default_value_t = 8f64.ln(), allow_negative_numbers = true)]
    pub curv_mean: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub curv_sd: f64,
    #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
    pub beats_per_bar: f64,
}

#[derive(Debug, Args)]
pub struct PriorArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Mean of the log duration in beats. Defaults to four bars.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "dur_median_bars")]
    pub dur_logmean: Option<f64>,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub dur_logsd: f64,
    /// Median duration in bars; sets the log mean to ln(bars * beats-per-bar).
    #[arg(long, value_name = "N")]
    pub dur_median_bars: Option<f64>,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    pub noise_sd: f64,
}

impl PriorArgs {
    pub fn priors(&self) -> Result<PriorSet> {
        let log_mean = duration_log_mean(self.dur_logmean, self.dur_median_bars, 4.0, self.shape.beats_per_bar);
        build_priors(&self.shape, log_mean, self.dur_logsd, self.noise_sd)
    }
}

#[derive(Debug, Args)]
pub struct TwoScalePriorArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Long-scale log duration mean. Defaults to four bars.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "long_dur_median_bars")]
    pub long_dur_logmean: Option<f64>,
    #[arg(long, value_name = "N")]
    pub long_dur_median_bars: Option<f64>,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub long_dur_logsd: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    pub long_noise_sd: f64,
    /// Short-scale log duration mean. Defaults to one bar.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "short_dur_median_bars")]
    pub short_dur_logmean: Option<f64>,
    #[arg(long, value_name = "N")]
    pub short_dur_median_bars: Option<f64>,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub short_dur_logsd: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    pub short_noise_sd: f64,
}

impl TwoScalePriorArgs {
    pub fn priors(&self) -> Result<(PriorSet, PriorSet)> {
        let bpb = self.shape.beats_per_bar;
        let long = build_priors(
            &self.shape,
            duration_log_mean(self.long_dur_logmean, self.long_dur_median_bars, 4.0, bpb),
            self.long_dur_logsd,
            self.long_noise_sd,
        )?;
        let short = build_priors(
            &self.shape,
            duration_log_mean(self.short_dur_logmean, self.short_dur_median_bars, 1.0, bpb),
            self.short_dur_logsd,
            self.short_noise_sd,
        )?;
        Ok((long, short))
    }
}

fn duration_log_mean(log_mean: Option<f64>, median_bars: Option<f64>, default_bars: f64, beats_per_bar: f64) -> f64 {
    log_mean.unwrap_or_else(|| (median_bars.unwrap_or(default_bars) * beats_per_bar).ln())
}

fn build_priors(shape: &ShapeArgs, dur_log_mean: f64, dur_log_sd: f64, noise_sd: f64) -> Result<PriorSet> {
    if !(shape.beats_per_bar > 0.0 && shape.beats_per_bar.is_finite()) {
        anyhow::bail!(arcfit::ArcError::Validation(format!(
            "beats per bar must be positive; got {}",
            shape.beats_per_bar
        )));
    }
    Ok(PriorSet::new(
        GaussianPrior::new(shape.slope_mean, shape.slope_sd)?,
        GaussianPrior::new(shape.curv_mean, shape.curv_sd)?,
        LogNormalPrior::new(dur_log_mean, dur_log_sd)?,
        noise_sd,
    )?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub priors: PriorArgs,
    /// Number of previous data tried as the start of each arc.
    #[arg(long, default_value_t = DEFAULT_MAX_LOOKBACK)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Explicit hypothetical arc ends, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with = "grid_step")]
    pub grid: Option<Vec<f64>>,
    /// Spacing of the hypothetical ends. Defaults to the median data spacing.
    #[arg(long)]
    pub grid_step: Option<f64>,
    /// Number of hypothetical ends. Defaults to `--k`.
    #[arg(long)]
    pub grid_count: Option<usize>,
}

#[derive(Debug, Args)]
pub struct StreamArgs {
    #[command(flatten)]
    pub priors: PriorArgs,
    #[arg(long, default_value_t = DEFAULT_MAX_LOOKBACK)]
    pub k: usize,
    /// Attach a prediction to every update line.
    #[arg(long)]
    pub predict_each: bool,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub priors: PriorArgs,
    #[arg(long, default_value_t = DEFAULT_MAX_LOOKBACK)]
    pub k: usize,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct MultiscaleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub priors: TwoScalePriorArgs,
    #[arg(long, default_value_t = DEFAULT_MAX_LOOKBACK)]
    pub k: usize,
    /// Also write `position,observed,long_model,combined_model` rows here.
    #[arg(long, value_name = "PATH")]
    pub plot_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub priors: PriorArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of observations.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    /// Spacing of the observations in beats.
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    #[arg(long, default_value_t = 60.0)]
    pub initial_value: f64,
    /// `csv` writes the series only; `json` writes series, truth and seed.
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Write the generating arcs as segmentation JSON to this file.
    #[arg(long, value_name = "PATH")]
    pub truth_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    Long,
    Short,
}

#[derive(Debug, Args)]
pub struct DevianceArgs {
    /// Segmentation JSON written by `fit` or `multiscale`; `-` reads
    /// standard input.
    #[arg(value_name = "SEGMENTATION")]
    pub segmentation: PathBuf,
    #[arg(long)]
    pub bar_length: f64,
    /// Level used for two-level input.
    #[arg(long, value_enum, default_value_t = ScaleArg::Short)]
    pub scale: ScaleArg,
}
