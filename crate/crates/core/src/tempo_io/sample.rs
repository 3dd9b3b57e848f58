use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use crate::arc_model::{neg_log_posterior, ArcParams, DataWindow, FittedArc, PriorSet};
use crate::error::{ArcError, Result};
use crate::segmenter::Segmentation;

use super::TempoSeries;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleConfig {
    /// Value of the first arc at position 0.
    pub initial_value: f64,
    /// Arcs whose value would drop below this are redrawn.
    pub floor: f64,
    /// Redraws allowed per arc before giving up.
    pub max_redraws: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            initial_value: 60.0,
            floor: 1e-3,
            max_redraws: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutput {
    pub series: TempoSeries,
    /// The generating arcs, scored against the sampled observations.
    pub truth: Segmentation,
    pub seed: u64,
}

pub fn sample_model(priors: &PriorSet, span: f64, grid: &[f64], seed: u64) -> Result<SampleOutput> {
    sample_model_with(priors, span, grid, seed, &SampleConfig::default())
}

/// Draws a chain of arcs covering `[0, span]` from the priors and observes it
/// with gaussian noise at the `grid` positions.
///
/// The last arc is drawn whole and then cut at `span`. The cut arc keeps its
/// curve, re-expressed over the shorter interval, so the truth tiles
/// `[0, span]` like any other segmentation.
pub fn sample_model_with(
    priors: &PriorSet,
    span: f64,
    grid: &[f64],
    seed: u64,
    config: &SampleConfig,
) -> Result<SampleOutput> {
    priors.validate()?;
    if !(span > 0.0 && span.is_finite()) {
        return Err(ArcError::domain(format!("span must be positive; got {span}")));
    }
    if grid.is_empty() {
        return Err(ArcError::domain("observation grid is empty"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ArcError::domain("observation grid must be strictly increasing"));
    }
    if grid[0] < 0.0 || grid[grid.len() - 1] > span {
        return Err(ArcError::domain(format!("observation grid must lie within [0, {span}]")));
    }
    if !config.initial_value.is_finite() || config.initial_value < config.floor {
        return Err(ArcError::domain(format!(
            "initial value {} is below the floor {}",
            config.initial_value, config.floor
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let duration = LogNormal::new(priors.duration.log_mean, priors.duration.log_sd)
        .map_err(|e| ArcError::domain(e.to_string()))?;
    let slope = Normal::new(priors.slope.mean, priors.slope.sd)
        .map_err(|e| ArcError::domain(e.to_string()))?;
    let curvature = Normal::new(priors.curvature.mean, priors.curvature.sd)
        .map_err(|e| ArcError::domain(e.to_string()))?;
    let noise = Normal::new(0.0, priors.noise_sd).map_err(|e| ArcError::domain(e.to_string()))?;

    let mut shapes: Vec<(f64, f64, ArcParams)> = Vec::new();
    let (mut start, mut value) = (0.0, config.initial_value);
    while start < span {
        let mut redraws = 0;
        let (length, params) = loop {
            let length: f64 = duration.sample(&mut rng);
            let params = ArcParams::new(value, slope.sample(&mut rng), curvature.sample(&mut rng));
            // A concave arc attains its minimum at one of its ends.
            if params.eval(1.0) >= config.floor && length > 0.0 {
                break (length, params);
            }
            redraws += 1;
            if redraws > config.max_redraws {
                return Err(ArcError::domain(format!(
                    "could not draw an arc above the floor {} from value {value}",
                    config.floor
                )));
            }
        };
        shapes.push((start, start + length, params));
        start += length;
        value = params.eval(1.0);
    }
    if let Some(last) = shapes.last_mut() {
        if last.1 > span {
            // Over [s, s + r * d] the same curve has slope b * r and log
            // curvature c + 2 ln r.
            let r = (span - last.0) / (last.1 - last.0);
            last.2 = ArcParams::new(last.2.a, last.2.b * r, last.2.c + 2.0 * r.ln());
            last.1 = span;
        }
    }

    let model = |x: f64| {
        let i = shapes.partition_point(|s| s.1 < x).min(shapes.len() - 1);
        let (s, e, p) = shapes[i];
        p.eval((x - s) / (e - s))
    };
    let values: Vec<f64> = grid.iter().map(|&x| model(x) + noise.sample(&mut rng)).collect();
    let series = TempoSeries::new(grid.to_vec(), values)?;

    let mut arcs = Vec::with_capacity(shapes.len());
    for (i, &(s, e, params)) in shapes.iter().enumerate() {
        // Each observation is scored by exactly one arc: the first arc owns
        // its start, later arcs own (start, end].
        let inside = |x: f64| (x > s || (i == 0 && x >= s)) && x <= e;
        let (xs, ys): (Vec<f64>, Vec<f64>) = series.iter().filter(|&(x, _)| inside(x)).unzip();
        let window = DataWindow::new(s, e, xs, ys, Some(params.a))?;
        arcs.push(FittedArc {
            start_pos: s,
            end_pos: e,
            params,
            log_map: -neg_log_posterior(&window, &params, priors)?,
        });
    }

    Ok(SampleOutput {
        series,
        truth: Segmentation::from_arcs(arcs),
        seed,
    })
}
