//! Maximum-a-posteriori segmentation of a noisy series into a continuous
//! chain of concave quadratic arcs.
//!
//! The building blocks, bottom up:
//!
//! * [`optimizer`]: small Nelder-Mead and gradient-descent minimizers.
//! * [`arc_model`]: the arc function, its priors and single-arc MAP fit.
//! * [`segmenter`]: the online dynamic program over breakpoints, including
//!   prediction of an arc still in progress and a brute-force reference.
//! * [`multiscale`]: two-pass long/short timescale residual analysis.
//! * [`tempo_io`]: tempo from note onsets, file formats and a sampler for
//!   the generative model.

pub mod arc_model;
pub mod error;
pub mod multiscale;
pub mod optimizer;
pub mod segmenter;
pub mod tempo_io;

pub use arc_model::{
    eval_arc, fit_arc, fit_arc_with, neg_log_posterior, neg_log_posterior_gradient,
    regularization_coefficient, ArcParams, DataWindow, FitOptions, FittedArc, GaussianPrior,
    LogNormalPrior, PriorSet,
};
pub use error::{ArcError, Result};
pub use multiscale::{decompose, mean_barline_deviance, reconstruct, DevianceReport, Scale, TwoLevelAnalysis};
pub use optimizer::{minimize, numeric_gradient, Method, MinimizeConfig, MinimizeResult};
pub use segmenter::{
    brute_force_search, brute_force_segment, fit_series, BruteForceOutcome, Prediction,
    Segmentation, SegmenterState, ViterbiCell, DEFAULT_MAX_LOOKBACK,
};
pub use tempo_io::{tempo_from_onsets, OnsetList, SampleOutput, TempoSeries};
