mod args;

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use arcfit::multiscale::{decompose, mean_barline_deviance, Scale};
use arcfit::tempo_io::{
    read_onsets_csv, read_series_csv, sample_model_with, tempo_from_onsets_at, write_plot_csv,
    write_segmentation_csv, write_segmentation_json, write_series_csv, write_two_level_json,
    SampleConfig, SegmentationDocument, SegmentationRecord, TempoAttribution, TwoLevelDocument,
    FORMAT_VERSION,
};
use arcfit::{ArcError, PriorSet, Segmentation, SegmenterState, TempoSeries};
use clap::Parser;
use log::{debug, info, warn};
use serde_json::json;

use args::{
    Cli, Command, DevianceArgs, FitArgs, GridArgs, InputArgs, MultiscaleArgs, OutputFormat,
    PredictArgs, SampleArgs, ScaleArg, StreamArgs, TempoAt,
};

const EXIT_USAGE: u8 = 2;
const EXIT_OPTIMIZER: u8 = 3;

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) if is_broken_pipe(&err) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("arcfit: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn init_logging() {
    let setting = std::env::var("ARCFIT_LOG").ok();
    let level = match setting.as_deref() {
        Some("quiet") => log::LevelFilter::Off,
        Some("info") => log::LevelFilter::Info,
        Some("debug") => log::LevelFilter::Debug,
        _ => log::LevelFilter::Warn,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .format_timestamp(None)
        .init();
    if let Some(other) = setting.filter(|s| !matches!(s.as_str(), "quiet" | "info" | "debug")) {
        warn!("ignoring ARCFIT_LOG={other}; expected quiet, info or debug");
    }
}

/// A closed downstream pipe (`arcfit ... | head`) is not an error.
fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        let io_error = match cause.downcast_ref::<ArcError>() {
            Some(ArcError::Io(e)) => Some(e),
            _ => cause.downcast_ref::<io::Error>(),
        };
        io_error.is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe)
    })
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let arc_error = err.chain().find_map(|cause| cause.downcast_ref::<ArcError>());
    match arc_error {
        Some(ArcError::NotConverged { .. } | ArcError::NonFiniteObjective { .. }) => EXIT_OPTIMIZER,
        _ => EXIT_USAGE,
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Fit(args) => fit(args),
        Command::Stream(args) => stream(args),
        Command::Predict(args) => predict(args),
        Command::Multiscale(args) => multiscale(args),
        Command::Sample(args) => sample(args),
        Command::Deviance(args) => deviance(args),
    }
}

fn open(path: &Path) -> Result<Box<dyn Read>> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(io::stdin().lock()));
    }
    let file = File::open(path)
        .map_err(ArcError::Io)
        .with_context(|| format!("cannot open {}", path.display()))?;
    Ok(Box::new(BufReader::new(file)))
}

fn create(path: &Path) -> Result<File> {
    File::create(path)
        .map_err(ArcError::Io)
        .with_context(|| format!("cannot create {}", path.display()))
}

fn load_series(input: &InputArgs) -> Result<TempoSeries> {
    if let Some(path) = &input.onsets {
        let onsets = read_onsets_csv(open(path)?).with_context(|| path.display().to_string())?;
        let at = match input.tempo_at {
            TempoAt::Left => TempoAttribution::Left,
            TempoAt::Mid => TempoAttribution::Mid,
        };
        return Ok(tempo_from_onsets_at(&onsets, at)?);
    }
    let path = input
        .input
        .clone()
        .or_else(|| input.path.clone())
        .unwrap_or_else(|| PathBuf::from("-"));
    let series = read_series_csv(open(&path)?).with_context(|| path.display().to_string())?;
    info!("read {} points from {}", series.len(), path.display());
    Ok(series)
}

fn feed(series: &TempoSeries, priors: PriorSet, k: usize) -> Result<SegmenterState> {
    let mut state = SegmenterState::new(priors, k)?;
    for (x, y) in series.iter() {
        let fits = state.update(x, y)?;
        debug!("update at {x}: {fits} candidate fits");
    }
    Ok(state)
}

fn fit(args: FitArgs) -> Result<()> {
    let priors = args.priors.priors()?;
    let series = load_series(&args.input)?;
    let seg = feed(&series, priors, args.k)?.finalize()?;
    info!("{} arcs, total log-MAP {}", seg.arcs.len(), seg.total_log_map);
    let out = io::stdout().lock();
    match args.format {
        OutputFormat::Json => write_segmentation_json(&seg, out)?,
        OutputFormat::Csv => write_segmentation_csv(&seg, out)?,
    };
    Ok(())
}

fn prediction_grid(state: &SegmenterState, grid: &GridArgs, k: usize) -> Result<Vec<f64>> {
    if let Some(explicit) = &grid.grid {
        return Ok(explicit.clone());
    }
    let count = grid.grid_count.unwrap_or(k);
    let Some(step) = grid.grid_step else {
        let mut default = state.default_grid();
        default.truncate(count);
        return Ok(default);
    };
    if !(step > 0.0 && step.is_finite()) {
        anyhow::bail!(ArcError::Validation(format!("grid step must be positive; got {step}")));
    }
    let last = state.positions().last().copied().unwrap_or(0.0);
    Ok((1..=count).map(|j| last + step * j as f64).collect())
}

fn chain_summary(seg: &Segmentation) -> serde_json::Value {
    json!({
        "arcs": seg.arcs.len(),
        "total_log_map": seg.total_log_map,
        "breakpoints": seg.breakpoints,
    })
}

fn parse_stream_line(line: &str, number: usize) -> Result<(f64, f64)> {
    let bad = |message: String| ArcError::Parse { line: number, message };
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != 2 {
        return Err(bad(format!("expected 2 fields, found {}", fields.len())).into());
    }
    let number_at = |i: usize| -> Result<f64> {
        match fields[i].parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(bad(format!("`{}` is not a finite number", fields[i])).into()),
        }
    };
    Ok((number_at(0)?, number_at(1)?))
}

fn stream(args: StreamArgs) -> Result<()> {
    let priors = args.priors.priors()?;
    let mut state = SegmenterState::new(priors, args.k)?;
    let mut out = io::stdout().lock();
    for (i, line) in io::stdin().lock().lines().enumerate() {
        let line = line.map_err(ArcError::Io)?;
        let line = line.trim();
        if line.is_empty() || (i == 0 && line == "position,value") {
            continue;
        }
        let (x, y) = parse_stream_line(line, i + 1)?;
        let fits = state
            .update(x, y)
            .with_context(|| format!("line {}", i + 1))?;
        let mut record = json!({
            "n": state.len(),
            "position": x,
            "value": y,
            "fits": fits,
            "chain": serde_json::Value::Null,
        });
        if state.len() >= 2 {
            record["chain"] = chain_summary(&state.finalize()?);
            if args.predict_each {
                let grid = prediction_grid(&state, &args.grid, args.k)?;
                record["prediction"] = serde_json::to_value(state.predict(&grid)?)?;
            }
        }
        writeln!(out, "{record}").map_err(ArcError::Io)?;
        out.flush().map_err(ArcError::Io)?;
    }
    let seg = state.finalize()?;
    writeln!(out, "{}", serde_json::to_string(&SegmentationDocument::new(&seg))?).map_err(ArcError::Io)?;
    Ok(())
}

fn predict(args: PredictArgs) -> Result<()> {
    let priors = args.priors.priors()?;
    let series = load_series(&args.input)?;
    let state = feed(&series, priors, args.k)?;
    let grid = prediction_grid(&state, &args.grid, args.k)?;
    let prediction = state.predict(&grid)?;
    let doc = json!({ "format_version": FORMAT_VERSION, "prediction": prediction });
    let mut out = io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string_pretty(&doc)?).map_err(ArcError::Io)?;
    Ok(())
}

fn multiscale(args: MultiscaleArgs) -> Result<()> {
    let (long, short) = args.priors.priors()?;
    let series = load_series(&args.input)?;
    let analysis = decompose(&series, &long, &short, args.k)?;
    info!(
        "long scale: {} arcs, short scale: {} arcs",
        analysis.long_scale.arcs.len(),
        analysis.short_scale.arcs.len()
    );
    if let Some(path) = &args.plot_out {
        write_plot_csv(&analysis, &series, create(path)?).with_context(|| path.display().to_string())?;
    }
    write_two_level_json(&analysis, io::stdout().lock())?;
    Ok(())
}

fn sample(args: SampleArgs) -> Result<()> {
    let priors = args.priors.priors()?;
    if args.points == 0 {
        anyhow::bail!(ArcError::Validation("--points must be at least 1".into()));
    }
    if !(args.step > 0.0 && args.step.is_finite()) {
        anyhow::bail!(ArcError::Validation(format!("--step must be positive; got {}", args.step)));
    }
    let grid: Vec<f64> = (0..args.points).map(|i| i as f64 * args.step).collect();
    let span = grid[grid.len() - 1].max(args.step);
    let config = SampleConfig {
        initial_value: args.initial_value,
        ..SampleConfig::default()
    };
    let out = sample_model_with(&priors, span, &grid, args.seed, &config)?;
    if let Some(path) = &args.truth_out {
        write_segmentation_json(&out.truth, create(path)?).with_context(|| path.display().to_string())?;
    }
    let mut stdout = io::stdout().lock();
    match args.format {
        OutputFormat::Csv => {
            write_series_csv(&out.series, stdout)?;
        }
        OutputFormat::Json => {
            let doc = json!({
                "format_version": FORMAT_VERSION,
                "seed": out.seed,
                "series": out.series.iter().map(|(x, y)| [x, y]).collect::<Vec<_>>(),
                "truth": SegmentationRecord::from(&out.truth),
            });
            writeln!(stdout, "{}", serde_json::to_string_pretty(&doc)?).map_err(ArcError::Io)?;
        }
    }
    Ok(())
}

fn deviance(args: DevianceArgs) -> Result<()> {
    let path = &args.segmentation;
    let mut text = String::new();
    open(path)?
        .read_to_string(&mut text)
        .map_err(ArcError::Io)
        .with_context(|| path.display().to_string())?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(ArcError::Json)
        .with_context(|| path.display().to_string())?;
    let scale = match args.scale {
        ScaleArg::Long => Scale::Long,
        ScaleArg::Short => Scale::Short,
    };
    let seg: Segmentation = if value.get("long_scale").is_some() {
        let doc: TwoLevelDocument = serde_json::from_value(value).map_err(ArcError::Json)?;
        match scale {
            Scale::Long => doc.long_scale.into(),
            Scale::Short => doc.short_scale.into(),
        }
    } else {
        let doc: SegmentationDocument = serde_json::from_value(value).map_err(ArcError::Json)?;
        doc.segmentation.into()
    };
    let report = mean_barline_deviance(&seg, args.bar_length)?;
    let doc = json!({
        "format_version": FORMAT_VERSION,
        "bar_length": args.bar_length,
        "per_breakpoint": report
            .per_breakpoint
            .iter()
            .map(|&(position, deviance)| json!({ "position": position, "deviance": deviance }))
            .collect::<Vec<_>>(),
        "mean_deviance": report.mean_deviance,
    });
    let mut out = io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string_pretty(&doc)?).map_err(ArcError::Io)?;
    Ok(())
}
