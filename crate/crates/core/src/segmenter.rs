//! Online MAP segmentation into a continuous chain of arcs.
//!
//! Every received datum is treated as a possible breakpoint. Its cell stores
//! the best-scoring chain that ends exactly there, found by trying each of
//! the previous `max_lookback` data as the start of the final arc. Each
//! candidate arc starts from the model value of its predecessor's chain, so
//! chains are continuous by construction. Backtracking from any cell
//! recovers the chain.

use serde::Serialize;

use crate::arc_model::{fit_arc_with, DataWindow, FitOptions, FittedArc, PriorSet};
use crate::error::{ArcError, Result};
use crate::tempo_io::TempoSeries;

pub const DEFAULT_MAX_LOOKBACK: usize = 32;

/// Largest series [`brute_force_segment`] will enumerate.
pub const BRUTE_FORCE_MAX_POINTS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct ViterbiCell {
    pub index: usize,
    /// Best cumulative log-MAP of any chain from datum 0 ending here.
    pub cum_log_map: f64,
    /// Start index of the final arc; `None` for the first datum.
    pub back_index: Option<usize>,
    pub arc: Option<FittedArc>,
}

impl ViterbiCell {
    /// Value a successor arc starting here is pinned to, or `None` at the
    /// first datum where the start value is free.
    pub fn continuity_value(&self) -> Option<f64> {
        self.arc.as_ref().map(FittedArc::end_value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub arcs: Vec<FittedArc>,
    pub total_log_map: f64,
    /// Arc boundaries, including the first start and the last end.
    pub breakpoints: Vec<f64>,
}

impl Segmentation {
    pub fn from_arcs(arcs: Vec<FittedArc>) -> Self {
        let total_log_map = arcs.iter().map(|a| a.log_map).sum();
        let mut breakpoints: Vec<f64> = arcs.iter().map(|a| a.start_pos).collect();
        breakpoints.extend(arcs.last().map(|a| a.end_pos));
        Self {
            arcs,
            total_log_map,
            breakpoints,
        }
    }

    /// Breakpoints strictly between the first start and the last end.
    pub fn interior_breakpoints(&self) -> &[f64] {
        match self.breakpoints.len() {
            0..=2 => &[],
            n => &self.breakpoints[1..n - 1],
        }
    }

    pub fn span(&self) -> Option<(f64, f64)> {
        Some((self.arcs.first()?.start_pos, self.arcs.last()?.end_pos))
    }

    /// Arc covering `x`. At a shared breakpoint the earlier arc is used.
    pub fn arc_at(&self, x: f64) -> Option<&FittedArc> {
        let (lo, hi) = self.span()?;
        if !(lo..=hi).contains(&x) {
            return None;
        }
        let i = self.arcs.partition_point(|a| a.end_pos < x);
        self.arcs.get(i.min(self.arcs.len() - 1))
    }

    /// Model value at `x`, or `None` outside the span.
    pub fn value_at(&self, x: f64) -> Option<f64> {
        self.arc_at(x).map(|a| a.value_at(x))
    }

    /// Largest mismatch between an arc's end value and its successor's
    /// start value.
    pub fn max_continuity_error(&self) -> f64 {
        self.arcs
            .windows(2)
            .map(|w| (w[0].end_value() - w[1].start_value()).abs())
            .fold(0.0, f64::max)
    }
}

/// The most probable chain when the latest arc may still be in progress.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    /// End of the final arc: the last datum or one of the grid positions.
    pub chosen_end: f64,
    pub hypothetical: bool,
    pub arc: FittedArc,
    pub total_log_map: f64,
    /// Final-arc model values from its start to `chosen_end`.
    pub trajectory: Vec<(f64, f64)>,
}

/// Lattice for the online dynamic program.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmenterState {
    positions: Vec<f64>,
    values: Vec<f64>,
    cells: Vec<ViterbiCell>,
    priors: PriorSet,
    max_lookback: usize,
    fit_options: FitOptions,
    fits_performed: u64,
}

impl SegmenterState {
    pub fn new(priors: PriorSet, max_lookback: usize) -> Result<Self> {
        Self::with_fit_options(priors, max_lookback, FitOptions::default())
    }

    pub fn with_fit_options(priors: PriorSet, max_lookback: usize, fit_options: FitOptions) -> Result<Self> {
        priors.validate()?;
        fit_options.minimizer.validate()?;
        if max_lookback == 0 {
            return Err(ArcError::domain("max_lookback must be at least 1"));
        }
        Ok(Self {
            positions: Vec::new(),
            values: Vec::new(),
            cells: Vec::new(),
            priors,
            max_lookback,
            fit_options,
            fits_performed: 0,
        })
    }

    pub fn priors(&self) -> &PriorSet {
        &self.priors
    }

    pub fn max_lookback(&self) -> usize {
        self.max_lookback
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[ViterbiCell] {
        &self.cells
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Total single-arc fits performed by all updates so far.
    pub fn fits_performed(&self) -> u64 {
        self.fits_performed
    }

    /// Appends a datum and computes its cell. Returns the number of arc
    /// fits performed, `min(n, max_lookback)` for the datum at index `n`.
    ///
    /// On error the state is left unchanged.
    pub fn update(&mut self, position: f64, value: f64) -> Result<usize> {
        if !position.is_finite() || !value.is_finite() {
            return Err(ArcError::domain(format!(
                "datum ({position}, {value}) is not finite"
            )));
        }
        if let Some(&last) = self.positions.last() {
            if position <= last {
                return Err(ArcError::domain(format!(
                    "position {position} does not follow previous position {last}"
                )));
            }
        }

        let index = self.cells.len();
        self.positions.push(position);
        self.values.push(value);
        if index == 0 {
            self.cells.push(ViterbiCell {
                index,
                cum_log_map: 0.0,
                back_index: None,
                arc: None,
            });
            return Ok(0);
        }

        match self.best_final_arc(index, position) {
            Ok((start, arc, score, fits)) => {
                self.cells.push(ViterbiCell {
                    index,
                    cum_log_map: score,
                    back_index: Some(start),
                    arc: Some(arc),
                });
                self.fits_performed += fits as u64;
                Ok(fits)
            }
            Err(err) => {
                self.positions.pop();
                self.values.pop();
                Err(err)
            }
        }
    }

    /// Best final arc ending at `end_pos` that covers data up to index
    /// `last`. Returns (start index, arc, cumulative score, fits).
    fn best_final_arc(&self, last: usize, end_pos: f64) -> Result<(usize, FittedArc, f64, usize)> {
        let reach = last.min(self.max_lookback);
        let mut best: Option<(usize, FittedArc, f64)> = None;
        for k in 1..=reach {
            let start = last - k;
            let origin = &self.cells[start];
            let window = DataWindow::from_run_to(
                &self.positions[start..=last],
                &self.values[start..=last],
                origin.continuity_value(),
                end_pos,
            )?;
            let arc = fit_arc_with(&window, &self.priors, &self.fit_options)?;
            let score = origin.cum_log_map + arc.log_map;
            // Strict comparison keeps the shortest arc on ties.
            if best.as_ref().is_none_or(|(_, _, s)| score > *s) {
                best = Some((start, arc, score));
            }
        }
        let (start, arc, score) = best.expect("reach >= 1");
        Ok((start, arc, score, reach))
    }

    /// Backtracks the best chain ending at datum `index`.
    pub fn chain_to(&self, index: usize) -> Result<Segmentation> {
        if index >= self.cells.len() {
            return Err(ArcError::domain(format!(
                "no datum at index {index}; {} received",
                self.cells.len()
            )));
        }
        let mut arcs = Vec::new();
        let mut at = index;
        while let Some(back) = self.cells[at].back_index {
            arcs.push(self.cells[at].arc.expect("cells with a back pointer carry an arc"));
            at = back;
        }
        arcs.reverse();
        Ok(Segmentation::from_arcs(arcs))
    }

    /// MAP chain assuming the last datum is a breakpoint.
    pub fn finalize(&self) -> Result<Segmentation> {
        if self.cells.len() < 2 {
            return Err(ArcError::domain(format!(
                "finalize needs at least 2 data; got {}",
                self.cells.len()
            )));
        }
        self.chain_to(self.cells.len() - 1)
    }

    /// `max_lookback` future positions spaced at the median interval of the
    /// received data.
    pub fn default_grid(&self) -> Vec<f64> {
        let mut gaps: Vec<f64> = self.positions.windows(2).map(|w| w[1] - w[0]).collect();
        let Some(&last) = self.positions.last() else {
            return Vec::new();
        };
        if gaps.is_empty() {
            return Vec::new();
        }
        gaps.sort_by(f64::total_cmp);
        let mid = gaps.len() / 2;
        let step = if gaps.len() % 2 == 0 {
            0.5 * (gaps[mid - 1] + gaps[mid])
        } else {
            gaps[mid]
        };
        (1..=self.max_lookback).map(|j| last + step * j as f64).collect()
    }

    /// Best chain when the final arc may end at the last datum or at any
    /// position of `grid`. Hypothetical ends set the arc's span but carry
    /// no observation. The state is not modified.
    pub fn predict(&self, grid: &[f64]) -> Result<Prediction> {
        let n = self.cells.len();
        if n < 2 {
            return Err(ArcError::domain(format!(
                "predict needs at least 2 data; got {n}"
            )));
        }
        let last = n - 1;
        let last_pos = self.positions[last];
        if let Some(bad) = grid.iter().position(|g| !g.is_finite()) {
            return Err(ArcError::domain(format!("grid position {bad} is not finite")));
        }
        if grid.first().is_some_and(|&g| g <= last_pos) {
            return Err(ArcError::domain(format!(
                "grid must lie after the last datum at {last_pos}"
            )));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ArcError::domain("grid must be strictly increasing"));
        }

        let cell = &self.cells[last];
        let mut best = (
            last_pos,
            false,
            cell.back_index.expect("cells past the first have a back pointer"),
            cell.arc.expect("cells past the first carry an arc"),
            cell.cum_log_map,
        );
        for &end in grid {
            let (start, arc, score, _) = self.best_final_arc(last, end)?;
            if score > best.4 {
                best = (end, true, start, arc, score);
            }
        }

        let (chosen_end, hypothetical, start, arc, total_log_map) = best;
        let trajectory = self.positions[start..]
            .iter()
            .chain(grid.iter().take_while(|&&g| g <= chosen_end))
            .map(|&x| (x, arc.value_at(x)))
            .collect();
        Ok(Prediction {
            chosen_end,
            hypothetical,
            arc,
            total_log_map,
            trajectory,
        })
    }
}

/// Batch segmentation: feeds every point through [`SegmenterState::update`]
/// and finalizes at the last one.
pub fn fit_series(data: &TempoSeries, priors: &PriorSet, max_lookback: usize) -> Result<Segmentation> {
    fit_series_with(data, priors, max_lookback, FitOptions::default())
}

pub fn fit_series_with(
    data: &TempoSeries,
    priors: &PriorSet,
    max_lookback: usize,
    fit_options: FitOptions,
) -> Result<Segmentation> {
    if data.len() < 2 {
        return Err(ArcError::domain(format!(
            "a series needs at least 2 points; got {}",
            data.len()
        )));
    }
    let mut state = SegmenterState::with_fit_options(*priors, max_lookback, fit_options)?;
    for (x, y) in data.iter() {
        state.update(x, y)?;
    }
    state.finalize()
}

/// Result of exhaustive enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceOutcome {
    pub best: Segmentation,
    /// Score of the second-best segmentation, if there is one.
    pub runner_up_log_map: Option<f64>,
    /// Number of complete segmentations scored.
    pub evaluated: usize,
}

/// Exhaustive MAP segmentation over every subset of interior breakpoints.
/// Exponential in the series length; refuses more than
/// [`BRUTE_FORCE_MAX_POINTS`] points.
pub fn brute_force_segment(data: &TempoSeries, priors: &PriorSet) -> Result<Segmentation> {
    Ok(brute_force_search(data, priors)?.best)
}

pub fn brute_force_search(data: &TempoSeries, priors: &PriorSet) -> Result<BruteForceOutcome> {
    let m = data.len();
    if m < 2 {
        return Err(ArcError::domain(format!(
            "a series needs at least 2 points; got {m}"
        )));
    }
    if m > BRUTE_FORCE_MAX_POINTS {
        return Err(ArcError::domain(format!(
            "brute force limited to {BRUTE_FORCE_MAX_POINTS} points; got {m}"
        )));
    }
    priors.validate()?;

    let mut search = Enumeration {
        xs: data.positions(),
        ys: data.values(),
        priors,
        options: FitOptions::default(),
        best: None,
        runner_up: None,
        evaluated: 0,
    };
    let mut prefix = Vec::with_capacity(m);
    let mut starts = Vec::with_capacity(m);
    search.extend(0, None, 0.0, &mut prefix, &mut starts)?;

    let (_, _, arcs) = search.best.expect("at least one segmentation exists");
    Ok(BruteForceOutcome {
        best: Segmentation::from_arcs(arcs),
        runner_up_log_map: search.runner_up,
        evaluated: search.evaluated,
    })
}

struct Enumeration<'a> {
    xs: &'a [f64],
    ys: &'a [f64],
    priors: &'a PriorSet,
    options: FitOptions,
    /// (score, interior breakpoint indices, arcs)
    best: Option<(f64, Vec<usize>, Vec<FittedArc>)>,
    runner_up: Option<f64>,
    evaluated: usize,
}

impl Enumeration<'_> {
    fn extend(
        &mut self,
        start: usize,
        constraint: Option<f64>,
        score: f64,
        arcs: &mut Vec<FittedArc>,
        starts: &mut Vec<usize>,
    ) -> Result<()> {
        let last = self.xs.len() - 1;
        for end in start + 1..=last {
            let window =
                DataWindow::from_run(&self.xs[start..=end], &self.ys[start..=end], constraint)?;
            let arc = fit_arc_with(&window, self.priors, &self.options)?;
            let total = score + arc.log_map;
            arcs.push(arc);
            starts.push(start);
            if end == last {
                self.record(total, &starts[1..], arcs);
            } else {
                self.extend(end, Some(arc.end_value()), total, arcs, starts)?;
            }
            arcs.pop();
            starts.pop();
        }
        Ok(())
    }

    fn record(&mut self, score: f64, interior: &[usize], arcs: &[FittedArc]) {
        self.evaluated += 1;
        let better = match &self.best {
            None => true,
            Some((s, bp, _)) => {
                score > *s
                    || (score == *s
                        && (interior.len() < bp.len()
                            || (interior.len() == bp.len() && interior < bp.as_slice())))
            }
        };
        if better {
            if let Some((s, _, _)) = &self.best {
                self.runner_up = Some(*s);
            }
            self.best = Some((score, interior.to_vec(), arcs.to_vec()));
        } else if self.runner_up.is_none_or(|r| score > r) {
            self.runner_up = Some(score);
        }
    }
}
