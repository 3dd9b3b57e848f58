//! CSV and JSON formats.
//!
//! Numbers are written in their shortest round-trip decimal form (at most 17
//! significant digits), so reading back yields identical `f64` values.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arc_model::{FittedArc, PriorSet};
use crate::error::{ArcError, Result};
use crate::multiscale::TwoLevelAnalysis;
use crate::segmenter::Segmentation;

use super::{OnsetList, TempoSeries};

pub const FORMAT_VERSION: u32 = 1;

/// Reads `position,value` rows after a matching header line.
pub fn read_series_csv<R: Read>(reader: R) -> Result<TempoSeries> {
    let rows = read_pairs(reader, ["position", "value"])?;
    TempoSeries::from_points(rows)
}

/// Reads a series from a file, or from standard input when `path` is `-`.
pub fn read_series_path(path: &Path) -> Result<TempoSeries> {
    if path.as_os_str() == "-" {
        return read_series_csv(std::io::stdin().lock());
    }
    let file = std::fs::File::open(path).map_err(|e| {
        ArcError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })?;
    read_series_csv(std::io::BufReader::new(file))
}

/// Reads `beat,time_seconds` rows.
pub fn read_onsets_csv<R: Read>(reader: R) -> Result<OnsetList> {
    OnsetList::new(read_pairs(reader, ["beat", "time_seconds"])?)
}

fn read_pairs<R: Read>(reader: R, header: [&str; 2]) -> Result<Vec<(f64, f64)>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let found = csv.headers().map_err(|e| csv_error(e, 1))?.clone();
    if found.len() != 2 || found.get(0) != Some(header[0]) || found.get(1) != Some(header[1]) {
        return Err(ArcError::Parse {
            line: 1,
            message: format!(
                "expected header `{},{}`, found `{}`",
                header[0],
                header[1],
                found.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut rows = Vec::new();
    for record in csv.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            csv_error(e, line)
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 2 {
            return Err(ArcError::Parse {
                line,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let field = |i: usize| -> Result<f64> {
            let text = &record[i];
            let v: f64 = text.parse().map_err(|_| ArcError::Parse {
                line,
                message: format!("`{text}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(ArcError::Parse {
                    line,
                    message: format!("`{text}` is not finite"),
                });
            }
            Ok(v)
        };
        rows.push((field(0)?, field(1)?));
    }
    Ok(rows)
}

fn csv_error(e: csv::Error, line: usize) -> ArcError {
    ArcError::Parse {
        line,
        message: e.to_string(),
    }
}

fn emit<W: Write>(mut writer: W, text: &str) -> Result<usize> {
    writer.write_all(text.as_bytes())?;
    writer.flush()?;
    Ok(text.len())
}

/// Writes `position,value` rows. Returns the number of bytes written.
pub fn write_series_csv<W: Write>(series: &TempoSeries, writer: W) -> Result<usize> {
    let mut out = String::from("position,value\n");
    for (x, y) in series.iter() {
        out.push_str(&format!("{x:?},{y:?}\n"));
    }
    emit(writer, &out)
}

/// One row per arc: `start_pos,end_pos,a,b,c,log_map`.
pub fn write_segmentation_csv<W: Write>(seg: &Segmentation, writer: W) -> Result<usize> {
    let mut out = String::from("start_pos,end_pos,a,b,c,log_map\n");
    for arc in &seg.arcs {
        out.push_str(&format!(
            "{:?},{:?},{:?},{:?},{:?},{:?}\n",
            arc.start_pos, arc.end_pos, arc.params.a, arc.params.b, arc.params.c, arc.log_map
        ));
    }
    emit(writer, &out)
}

/// Arc chain as stored in JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationRecord {
    pub total_log_map: f64,
    pub breakpoints: Vec<f64>,
    pub arcs: Vec<FittedArc>,
}

impl From<&Segmentation> for SegmentationRecord {
    fn from(seg: &Segmentation) -> Self {
        Self {
            total_log_map: seg.total_log_map,
            breakpoints: seg.breakpoints.clone(),
            arcs: seg.arcs.clone(),
        }
    }
}

impl From<SegmentationRecord> for Segmentation {
    fn from(record: SegmentationRecord) -> Self {
        Segmentation {
            arcs: record.arcs,
            total_log_map: record.total_log_map,
            breakpoints: record.breakpoints,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationDocument {
    pub format_version: u32,
    #[serde(flatten)]
    pub segmentation: SegmentationRecord,
}

impl SegmentationDocument {
    pub fn new(seg: &Segmentation) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            segmentation: seg.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelDocument {
    pub format_version: u32,
    pub long_scale: SegmentationRecord,
    pub short_scale: SegmentationRecord,
    pub long_priors: PriorSet,
    pub short_priors: PriorSet,
}

impl TwoLevelDocument {
    pub fn new(analysis: &TwoLevelAnalysis) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            long_scale: (&analysis.long_scale).into(),
            short_scale: (&analysis.short_scale).into(),
            long_priors: analysis.long_priors,
            short_priors: analysis.short_priors,
        }
    }
}

fn write_json<W: Write, T: Serialize>(value: &T, writer: W) -> Result<usize> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(writer, &text)
}

pub fn write_segmentation_json<W: Write>(seg: &Segmentation, writer: W) -> Result<usize> {
    write_json(&SegmentationDocument::new(seg), writer)
}

pub fn write_two_level_json<W: Write>(analysis: &TwoLevelAnalysis, writer: W) -> Result<usize> {
    write_json(&TwoLevelDocument::new(analysis), writer)
}

/// `position,observed,long_model,combined_model` at each data position.
pub fn write_plot_csv<W: Write>(
    analysis: &TwoLevelAnalysis,
    data: &TempoSeries,
    writer: W,
) -> Result<usize> {
    let combined = crate::multiscale::reconstruct(analysis, data.positions())?;
    let mut out = String::from("position,observed,long_model,combined_model\n");
    for ((x, y), c) in data.iter().zip(combined) {
        let long = analysis.long_scale.value_at(x).ok_or_else(|| {
            ArcError::domain(format!("position {x} lies outside the analysed span"))
        })?;
        out.push_str(&format!("{x:?},{y:?},{long:?},{c:?}\n"));
    }
    emit(writer, &out)
}
