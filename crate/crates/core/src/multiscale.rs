//! Two-pass analysis: a long-timescale fit, then a short-timescale fit of
//! its residual, plus the barline-deviance summary.

use serde::Serialize;

use crate::arc_model::{FitOptions, PriorSet};
use crate::error::{ArcError, Result};
use crate::segmenter::{fit_series_with, Segmentation};
use crate::tempo_io::TempoSeries;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelAnalysis {
    pub long_scale: Segmentation,
    /// Fit to `observed - long-scale model`.
    pub short_scale: Segmentation,
    pub long_priors: PriorSet,
    pub short_priors: PriorSet,
    /// The series passed to the second pass.
    pub residual: TempoSeries,
}

/// Fits `data` with `long_priors`, then fits the residual with
/// `short_priors`. The long prior's median duration must exceed the short
/// one's.
pub fn decompose(
    data: &TempoSeries,
    long_priors: &PriorSet,
    short_priors: &PriorSet,
    max_lookback: usize,
) -> Result<TwoLevelAnalysis> {
    decompose_with(data, long_priors, short_priors, max_lookback, FitOptions::default())
}

pub fn decompose_with(
    data: &TempoSeries,
    long_priors: &PriorSet,
    short_priors: &PriorSet,
    max_lookback: usize,
    fit_options: FitOptions,
) -> Result<TwoLevelAnalysis> {
    long_priors.validate()?;
    short_priors.validate()?;
    if long_priors.duration.median() <= short_priors.duration.median() {
        return Err(ArcError::domain(format!(
            "long-scale median duration {} must exceed short-scale median {}",
            long_priors.duration.median(),
            short_priors.duration.median()
        )));
    }
    let long_scale = fit_series_with(data, long_priors, max_lookback, fit_options)?;
    let residual = residual_series(data, &long_scale)?;
    let short_scale = fit_series_with(&residual, short_priors, max_lookback, fit_options)?;
    Ok(TwoLevelAnalysis {
        long_scale,
        short_scale,
        long_priors: *long_priors,
        short_priors: *short_priors,
        residual,
    })
}

/// `observed - model` at every data position.
pub fn residual_series(data: &TempoSeries, model: &Segmentation) -> Result<TempoSeries> {
    let values = data
        .iter()
        .map(|(x, y)| {
            model
                .value_at(x)
                .map(|m| y - m)
                .ok_or_else(|| ArcError::domain(format!("position {x} lies outside the model span")))
        })
        .collect::<Result<Vec<_>>>()?;
    TempoSeries::new(data.positions().to_vec(), values)
}

/// Combined model (long + short) at each position.
pub fn reconstruct(analysis: &TwoLevelAnalysis, positions: &[f64]) -> Result<Vec<f64>> {
    positions
        .iter()
        .map(|&x| {
            match (analysis.long_scale.value_at(x), analysis.short_scale.value_at(x)) {
                (Some(l), Some(s)) => Ok(l + s),
                _ => Err(ArcError::domain(format!(
                    "position {x} lies outside the analysed span"
                ))),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    Long,
    #[default]
    Short,
}

impl TwoLevelAnalysis {
    pub fn scale(&self, scale: Scale) -> &Segmentation {
        match scale {
            Scale::Long => &self.long_scale,
            Scale::Short => &self.short_scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DevianceReport {
    /// `(position, distance to the nearest barline in bars)`, each in
    /// `[0, 0.5]`.
    pub per_breakpoint: Vec<(f64, f64)>,
    /// `None` when the segmentation has no interior breakpoints.
    pub mean_deviance: Option<f64>,
}

/// Distance of each interior breakpoint from the nearest barline, as a
/// fraction of a bar, and their mean. Series endpoints are excluded.
pub fn mean_barline_deviance(seg: &Segmentation, bar_length: f64) -> Result<DevianceReport> {
    if !(bar_length > 0.0 && bar_length.is_finite()) {
        return Err(ArcError::domain(format!(
            "bar length must be positive; got {bar_length}"
        )));
    }
    if seg.arcs.is_empty() {
        return Err(ArcError::domain("segmentation has no arcs"));
    }
    let per_breakpoint: Vec<(f64, f64)> = seg
        .interior_breakpoints()
        .iter()
        .map(|&p| {
            let offset = p.rem_euclid(bar_length);
            (p, offset.min(bar_length - offset) / bar_length)
        })
        .collect();
    let mean_deviance = (!per_breakpoint.is_empty())
        .then(|| per_breakpoint.iter().map(|(_, d)| d).sum::<f64>() / per_breakpoint.len() as f64);
    Ok(DevianceReport {
        per_breakpoint,
        mean_deviance,
    })
}
