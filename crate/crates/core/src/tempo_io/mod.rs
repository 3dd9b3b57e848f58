//! Tempo data: onset ingestion, the series type, file formats and the
//! generative sampler.

mod format;
mod sample;

pub use format::{
    read_onsets_csv, read_series_csv, read_series_path, write_plot_csv, write_segmentation_csv,
    write_segmentation_json, write_series_csv, write_two_level_json, SegmentationDocument,
    SegmentationRecord, TwoLevelDocument, FORMAT_VERSION,
};
pub use sample::{sample_model, sample_model_with, SampleConfig, SampleOutput};

use crate::error::{ArcError, Result};

/// Ordered `(position, value)` observations with strictly increasing
/// positions.
#[derive(Debug, Clone, PartialEq)]
pub struct TempoSeries {
    positions: Vec<f64>,
    values: Vec<f64>,
}

impl TempoSeries {
    pub fn new(positions: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if positions.len() != values.len() {
            return Err(ArcError::Validation(format!(
                "{} positions but {} values",
                positions.len(),
                values.len()
            )));
        }
        if let Some(i) = positions.iter().zip(&values).position(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(ArcError::Validation(format!("point {i} is not finite")));
        }
        if let Some(i) = positions.windows(2).position(|w| w[1] <= w[0]) {
            return Err(ArcError::Validation(format!(
                "positions must be strictly increasing; point {} at {} follows {}",
                i + 1,
                positions[i + 1],
                positions[i]
            )));
        }
        Ok(Self { positions, values })
    }

    pub fn from_points(points: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let (positions, values) = points.into_iter().unzip();
        Self::new(positions, values)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.positions.iter().copied().zip(self.values.iter().copied())
    }

    /// Same series with every position moved by `delta`.
    pub fn shifted(&self, delta: f64) -> Result<Self> {
        Self::new(
            self.positions.iter().map(|x| x + delta).collect(),
            self.values.clone(),
        )
    }
}

/// Annotated note onsets: metrical position (beats) and time (seconds).
#[derive(Debug, Clone, PartialEq)]
pub struct OnsetList {
    entries: Vec<(f64, f64)>,
}

impl OnsetList {
    pub fn new(entries: Vec<(f64, f64)>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(ArcError::Validation(format!(
                "need at least 2 onsets; got {}",
                entries.len()
            )));
        }
        for (i, (beat, time)) in entries.iter().enumerate() {
            if !beat.is_finite() || !time.is_finite() {
                return Err(ArcError::Validation(format!("onset {i} is not finite")));
            }
        }
        for i in 1..entries.len() {
            let (b0, t0) = entries[i - 1];
            let (b1, t1) = entries[i];
            if b1 <= b0 {
                return Err(ArcError::Validation(format!(
                    "onset {i}: beat {b1} does not follow {b0}"
                )));
            }
            if t1 <= t0 {
                return Err(ArcError::Validation(format!(
                    "onset {i}: time {t1} does not follow {t0}"
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }
}

/// Where the tempo of an inter-onset interval is placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TempoAttribution {
    /// At the earlier onset's beat.
    #[default]
    Left,
    /// Halfway between the two onsets' beats.
    Mid,
}

/// Instantaneous tempo (BPM) from each pair of consecutive onsets.
pub fn tempo_from_onsets(onsets: &OnsetList) -> Result<TempoSeries> {
    tempo_from_onsets_at(onsets, TempoAttribution::Left)
}

pub fn tempo_from_onsets_at(onsets: &OnsetList, at: TempoAttribution) -> Result<TempoSeries> {
    let points = onsets.entries.windows(2).map(|w| {
        let ((b0, t0), (b1, t1)) = (w[0], w[1]);
        let position = match at {
            TempoAttribution::Left => b0,
            TempoAttribution::Mid => 0.5 * (b0 + b1),
        };
        (position, 60.0 * (b1 - b0) / (t1 - t0))
    });
    TempoSeries::from_points(points)
}
