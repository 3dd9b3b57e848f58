//! Seeded instance generators shared by the integration suites.

#![allow(dead_code)]

use arcfit::tempo_io::sample_model;
use arcfit::{ArcParams, GaussianPrior, LogNormalPrior, PriorSet, TempoSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64).collect()
}

pub fn priors(slope: (f64, f64), curvature: (f64, f64), duration: (f64, f64), noise_sd: f64) -> PriorSet {
    PriorSet::new(
        GaussianPrior::new(slope.0, slope.1).unwrap(),
        GaussianPrior::new(curvature.0, curvature.1).unwrap(),
        LogNormalPrior::new(duration.0, duration.1).unwrap(),
        noise_sd,
    )
    .unwrap()
}

/// Priors drawn at random from ranges under which the sampler produces
/// several arcs over a short unit-spaced series.
pub fn random_priors(rng: &mut ChaCha8Rng) -> PriorSet {
    priors(
        (rng.random_range(0.0..4.0), rng.random_range(2.0..6.0)),
        (rng.random_range(1.0..3.0), rng.random_range(0.3..0.8)),
        (rng.random_range(1.5f64..4.0).ln(), rng.random_range(0.3..0.8)),
        rng.random_range(0.05..0.55),
    )
}

/// A short series sampled from randomly drawn priors, as used for
/// comparisons against exhaustive search.
pub fn small_instance(seed: u64, min_len: usize, max_len: usize) -> (TempoSeries, PriorSet) {
    let mut r = rng(seed);
    let m = r.random_range(min_len..=max_len);
    let p = random_priors(&mut r);
    let grid = unit_grid(m);
    let out = sample_model(&p, (m - 1) as f64, &grid, seed).unwrap();
    (out.series, p)
}

/// Piecewise arc chain evaluated on `grid` plus gaussian noise. `arcs`
/// holds `(start, end, params)` in order.
pub fn observe(arcs: &[(f64, f64, ArcParams)], grid: &[f64], noise_sd: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let noise = Normal::new(0.0, noise_sd).unwrap();
    grid.iter()
        .map(|&x| chain_value(arcs, x) + noise.sample(rng))
        .collect()
}

pub fn chain_value(arcs: &[(f64, f64, ArcParams)], x: f64) -> f64 {
    let i = arcs.partition_point(|a| a.1 < x).min(arcs.len() - 1);
    let (s, e, p) = arcs[i];
    p.eval((x - s) / (e - s))
}

/// Height of an arc above the chord joining its ends, at the midpoint.
pub fn depth(params: &ArcParams) -> f64 {
    -params.quadratic_coefficient() / 4.0
}

/// Three continuous arcs over `[0, span]` whose durations come from
/// `p.duration` (the last one by rejection so that the chain ends at
/// `span`) and whose shapes come from the slope and curvature priors,
/// redrawn until the depth is at least `min_depth`.
pub fn three_arc_chain(p: &PriorSet, span: f64, min_depth: f64, rng: &mut ChaCha8Rng) -> Vec<(f64, f64, ArcParams)> {
    let duration = LogNormal::new(p.duration.log_mean, p.duration.log_sd).unwrap();
    let slope = Normal::new(p.slope.mean, p.slope.sd).unwrap();
    let curvature = Normal::new(p.curvature.mean, p.curvature.sd).unwrap();
    let (lo, hi) = (
        (p.duration.log_mean - 2.0 * p.duration.log_sd).exp(),
        (p.duration.log_mean + 2.0 * p.duration.log_sd).exp(),
    );
    let lengths = loop {
        let d1: f64 = duration.sample(rng);
        let d2: f64 = duration.sample(rng);
        let d3 = span - d1 - d2;
        if (lo..=hi).contains(&d3) {
            break [d1, d2, d3];
        }
    };
    let mut arcs = Vec::new();
    let (mut start, mut value) = (0.0, 60.0);
    for length in lengths {
        let params = loop {
            let candidate = ArcParams::new(value, slope.sample(rng), curvature.sample(rng));
            if depth(&candidate) >= min_depth {
                break candidate;
            }
        };
        arcs.push((start, start + length, params));
        start += length;
        value = params.eval(1.0);
    }
    arcs
}

/// Layout of the two-timescale instances: bars of 4 beats observed at two
/// points per beat, long arcs of 4 bars, short arcs of 1 bar.
pub struct TwoScale {
    pub series: TempoSeries,
    pub long_breaks: Vec<f64>,
    pub short_breaks: Vec<f64>,
}

pub const BAR: f64 = 4.0;
pub const STEP: f64 = 0.5;

pub fn two_scale_priors() -> (PriorSet, PriorSet) {
    let long = priors((0.0, 10.0), (48f64.ln(), 0.5), ((4.0 * BAR).ln(), 0.2), 1.0);
    let short = priors((12.0, 3.0), (12f64.ln(), 0.3), (BAR.ln(), 0.2), 0.5);
    (long, short)
}

/// Sum of a long-scale chain and a zero-based chain of one-bar humps, plus
/// noise of SD `noise_sd`.
pub fn two_scale_instance(seed: u64, long_arcs: usize, noise_sd: f64) -> TwoScale {
    let mut r = rng(seed);
    let long_len = 4.0 * BAR;
    let span = long_len * long_arcs as f64;
    let slope = Normal::new(0.0, 8.0).unwrap();
    let mut long = Vec::new();
    let mut value = 60.0;
    for i in 0..long_arcs {
        let height: f64 = r.random_range(10.0..20.0);
        let params = ArcParams::new(value, slope.sample(&mut r), (4.0 * height).ln());
        let s = i as f64 * long_len;
        long.push((s, s + long_len, params));
        value = params.eval(1.0);
    }
    let bars = (span / BAR) as usize;
    let mut short = Vec::new();
    let mut level = 0.0;
    for i in 0..bars {
        let height: f64 = r.random_range(2.5..3.5);
        let drift: f64 = r.random_range(-0.3..0.3);
        let params = ArcParams::new(level, 4.0 * height + drift, (4.0 * height).ln());
        let s = i as f64 * BAR;
        short.push((s, s + BAR, params));
        level = params.eval(1.0);
    }
    let grid: Vec<f64> = (0..=((span / STEP) as usize)).map(|i| i as f64 * STEP).collect();
    let noise = Normal::new(0.0, noise_sd).unwrap();
    let values = grid
        .iter()
        .map(|&x| chain_value(&long, x) + chain_value(&short, x) + noise.sample(&mut r))
        .collect();
    TwoScale {
        series: TempoSeries::new(grid, values).unwrap(),
        long_breaks: long[1..].iter().map(|a| a.0).collect(),
        short_breaks: short[1..].iter().map(|a| a.0).collect(),
    }
}

/// Number of `truth` breakpoints with a fitted breakpoint within
/// `tolerance` of the datum nearest to it.
pub fn recovered(truth: &[f64], fitted: &[f64], positions: &[f64], tolerance: f64) -> usize {
    truth
        .iter()
        .filter(|&&t| {
            let i = positions.partition_point(|&x| x < t);
            let nearest = [i.saturating_sub(1), i.min(positions.len() - 1)]
                .into_iter()
                .map(|j| positions[j])
                .min_by(|a, b| (a - t).abs().total_cmp(&(b - t).abs()))
                .unwrap();
            fitted.iter().any(|&f| (f - nearest).abs() <= tolerance + 1e-9)
        })
        .count()
}

pub fn rms(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}
