//! Single-arc model: the concave quadratic arc, its priors and MAP fit.
//!
//! An arc spanning `[start_pos, end_pos]` is evaluated in the normalized
//! coordinate `u = (x - start_pos) / (end_pos - start_pos)` as
//! `f(u) = a + b*u - exp(c)*u^2`, so the curvature is negative for every
//! finite `c`. Priors: gaussian on `b` and `c`, log-normal on the duration
//! (in position units), improper uniform on `a`.

use serde::{Deserialize, Serialize};

use crate::error::{ArcError, Result};
use crate::optimizer::{minimize_with_gradient, MinimizeConfig};

/// `0.5 * ln(2*pi)`
pub(crate) const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcParams {
    /// Value at the start of the arc.
    pub a: f64,
    /// Slope per unit of normalized duration.
    pub b: f64,
    /// Log-curvature; the quadratic coefficient is `-exp(c)`.
    pub c: f64,
}

impl ArcParams {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.a + self.b * u - self.c.exp() * u * u
    }

    /// Coefficient of `u^2`; always strictly negative.
    pub fn quadratic_coefficient(&self) -> f64 {
        -self.c.exp()
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite()
    }
}

/// Evaluates `a + b*u - exp(c)*u^2`.
pub fn eval_arc(params: &ArcParams, u: f64) -> f64 {
    params.eval(u)
}

/// Penalty weight that makes ridge regression equal to MAP estimation under
/// a gaussian prior: noise variance over prior variance.
pub fn regularization_coefficient(noise_sd: f64, prior_sd: f64) -> Result<f64> {
    if !(noise_sd > 0.0 && noise_sd.is_finite()) || !(prior_sd > 0.0 && prior_sd.is_finite()) {
        return Err(ArcError::domain(format!(
            "standard deviations must be positive and finite; got noise {noise_sd}, prior {prior_sd}"
        )));
    }
    Ok((noise_sd * noise_sd) / (prior_sd * prior_sd))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPrior {
    pub mean: f64,
    pub sd: f64,
}

impl GaussianPrior {
    pub fn new(mean: f64, sd: f64) -> Result<Self> {
        let prior = Self { mean, sd };
        prior.validate()?;
        Ok(prior)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mean.is_finite() || !(self.sd > 0.0 && self.sd.is_finite()) {
            return Err(ArcError::domain(format!(
                "gaussian prior needs finite mean and positive sd; got mean {}, sd {}",
                self.mean, self.sd
            )));
        }
        Ok(())
    }

    pub fn neg_log_density(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.sd;
        HALF_LN_2PI + self.sd.ln() + 0.5 * z * z
    }

    /// Derivative of [`Self::neg_log_density`] with respect to `x`.
    pub fn neg_log_density_slope(&self, x: f64) -> f64 {
        (x - self.mean) / (self.sd * self.sd)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalPrior {
    /// Mean of the log duration.
    pub log_mean: f64,
    /// Standard deviation of the log duration.
    pub log_sd: f64,
}

impl LogNormalPrior {
    pub fn new(log_mean: f64, log_sd: f64) -> Result<Self> {
        let prior = Self { log_mean, log_sd };
        prior.validate()?;
        Ok(prior)
    }

    /// Prior with the given median duration.
    pub fn with_median(median: f64, log_sd: f64) -> Result<Self> {
        if !(median > 0.0 && median.is_finite()) {
            return Err(ArcError::domain(format!(
                "median duration must be positive; got {median}"
            )));
        }
        Self::new(median.ln(), log_sd)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.log_mean.is_finite() || !(self.log_sd > 0.0 && self.log_sd.is_finite()) {
            return Err(ArcError::domain(format!(
                "log-normal prior needs finite log_mean and positive log_sd; got {}, {}",
                self.log_mean, self.log_sd
            )));
        }
        Ok(())
    }

    pub fn median(&self) -> f64 {
        self.log_mean.exp()
    }

    pub fn neg_log_density(&self, duration: f64) -> Result<f64> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(ArcError::domain(format!(
                "arc duration must be positive; got {duration}"
            )));
        }
        let log_d = duration.ln();
        let z = (log_d - self.log_mean) / self.log_sd;
        Ok(log_d + self.log_sd.ln() + HALF_LN_2PI + 0.5 * z * z)
    }
}

/// All model hyperparameters. The start value `a` has an improper uniform
/// prior and therefore no field here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSet {
    pub slope: GaussianPrior,
    pub curvature: GaussianPrior,
    pub duration: LogNormalPrior,
    /// Standard deviation of the gaussian observation noise.
    pub noise_sd: f64,
}

impl PriorSet {
    pub fn new(
        slope: GaussianPrior,
        curvature: GaussianPrior,
        duration: LogNormalPrior,
        noise_sd: f64,
    ) -> Result<Self> {
        let priors = Self {
            slope,
            curvature,
            duration,
            noise_sd,
        };
        priors.validate()?;
        Ok(priors)
    }

    pub fn validate(&self) -> Result<()> {
        self.slope.validate()?;
        self.curvature.validate()?;
        self.duration.validate()?;
        if !(self.noise_sd > 0.0 && self.noise_sd.is_finite()) {
            return Err(ArcError::domain(format!(
                "noise_sd must be positive and finite; got {}",
                self.noise_sd
            )));
        }
        Ok(())
    }

    pub fn with_noise_sd(mut self, noise_sd: f64) -> Result<Self> {
        self.noise_sd = noise_sd;
        self.validate()?;
        Ok(self)
    }
}

/// Observations scored by one candidate arc.
///
/// `positions`/`values` hold only the observations that contribute a
/// likelihood term. The span `[start_pos, end_pos]` may extend past the
/// last observation, which is how hypothetical future ends are scored.
#[derive(Debug, Clone, PartialEq)]
pub struct DataWindow {
    start_pos: f64,
    end_pos: f64,
    positions: Vec<f64>,
    values: Vec<f64>,
    start_constraint: Option<f64>,
}

impl DataWindow {
    pub fn new(
        start_pos: f64,
        end_pos: f64,
        positions: Vec<f64>,
        values: Vec<f64>,
        start_constraint: Option<f64>,
    ) -> Result<Self> {
        if !start_pos.is_finite() || !end_pos.is_finite() {
            return Err(ArcError::domain("window bounds must be finite"));
        }
        if end_pos <= start_pos {
            return Err(ArcError::domain(format!(
                "window must have positive duration; got [{start_pos}, {end_pos}]"
            )));
        }
        if positions.len() != values.len() {
            return Err(ArcError::domain(format!(
                "{} positions but {} values",
                positions.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(ArcError::domain(format!("value {i} is not finite")));
        }
        if let Some(i) = positions.iter().position(|p| !p.is_finite()) {
            return Err(ArcError::domain(format!("position {i} is not finite")));
        }
        if positions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ArcError::domain("window positions must be strictly increasing"));
        }
        if let (Some(first), Some(last)) = (positions.first(), positions.last()) {
            if *first < start_pos || *last > end_pos {
                return Err(ArcError::domain("window observations fall outside its span"));
            }
        }
        if let Some(s) = start_constraint {
            if !s.is_finite() {
                return Err(ArcError::domain("start constraint is not finite"));
            }
        } else if positions.is_empty() {
            return Err(ArcError::domain(
                "an unconstrained window needs at least one observation",
            ));
        }
        Ok(Self {
            start_pos,
            end_pos,
            positions,
            values,
            start_constraint,
        })
    }

    /// Window over a run of consecutive series points `xs[0]..=xs[last]`.
    ///
    /// With a start constraint the first point is not scored, since the
    /// preceding arc already accounts for it.
    pub fn from_run(xs: &[f64], ys: &[f64], start_constraint: Option<f64>) -> Result<Self> {
        if xs.len() < 2 {
            return Err(ArcError::domain(format!(
                "an arc needs at least 2 points; got {}",
                xs.len()
            )));
        }
        Self::from_run_to(xs, ys, start_constraint, xs[xs.len() - 1])
    }

    /// Like [`Self::from_run`] but the arc ends at `end_pos`, which may lie
    /// beyond the last observation.
    pub fn from_run_to(
        xs: &[f64],
        ys: &[f64],
        start_constraint: Option<f64>,
        end_pos: f64,
    ) -> Result<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(ArcError::domain("run must be non-empty with matching lengths"));
        }
        let skip = usize::from(start_constraint.is_some());
        Self::new(
            xs[0],
            end_pos,
            xs[skip..].to_vec(),
            ys[skip..].to_vec(),
            start_constraint,
        )
    }

    pub fn start_pos(&self) -> f64 {
        self.start_pos
    }

    pub fn end_pos(&self) -> f64 {
        self.end_pos
    }

    pub fn duration(&self) -> f64 {
        self.end_pos - self.start_pos
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn start_constraint(&self) -> Option<f64> {
        self.start_constraint
    }

    pub fn normalize(&self, x: f64) -> f64 {
        (x - self.start_pos) / self.duration()
    }

    fn prepare<'w>(&'w self, priors: &'w PriorSet) -> Result<Scorer<'w>> {
        priors.validate()?;
        let duration_term = priors.duration.neg_log_density(self.duration())?;
        Ok(Scorer {
            u: self.positions.iter().map(|&x| self.normalize(x)).collect(),
            y: &self.values,
            priors,
            constant: duration_term
                + self.values.len() as f64 * (HALF_LN_2PI + priors.noise_sd.ln()),
            inv_var: 1.0 / (priors.noise_sd * priors.noise_sd),
        })
    }
}

/// One arc fitted to a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedArc {
    pub start_pos: f64,
    pub end_pos: f64,
    #[serde(flatten)]
    pub params: ArcParams,
    /// This arc's additive contribution to a path's log-MAP score.
    pub log_map: f64,
}

impl FittedArc {
    pub fn duration(&self) -> f64 {
        self.end_pos - self.start_pos
    }

    pub fn normalize(&self, x: f64) -> f64 {
        (x - self.start_pos) / self.duration()
    }

    /// Model value at position `x`.
    pub fn value_at(&self, x: f64) -> f64 {
        self.params.eval(self.normalize(x))
    }

    pub fn start_value(&self) -> f64 {
        self.params.eval(0.0)
    }

    /// Value at `u = 1`, which a successor arc must start from.
    pub fn end_value(&self) -> f64 {
        self.params.eval(1.0)
    }
}

/// Precomputed pieces of the objective for one window.
struct Scorer<'w> {
    u: Vec<f64>,
    y: &'w [f64],
    priors: &'w PriorSet,
    /// Duration term plus the per-observation normalizers.
    constant: f64,
    inv_var: f64,
}

impl Scorer<'_> {
    fn value(&self, p: &ArcParams) -> f64 {
        let curv = p.c.exp();
        let sse: f64 = self
            .u
            .iter()
            .zip(self.y)
            .map(|(&u, &y)| {
                let r = y - (p.a + p.b * u - curv * u * u);
                r * r
            })
            .sum();
        self.constant
            + 0.5 * sse * self.inv_var
            + self.priors.slope.neg_log_density(p.b)
            + self.priors.curvature.neg_log_density(p.c)
    }

    fn gradient(&self, p: &ArcParams) -> [f64; 3] {
        let curv = p.c.exp();
        let (mut ga, mut gb, mut gc) = (0.0, 0.0, 0.0);
        for (&u, &y) in self.u.iter().zip(self.y) {
            let r = y - (p.a + p.b * u - curv * u * u);
            ga -= r;
            gb -= r * u;
            gc += r * curv * u * u;
        }
        [
            ga * self.inv_var,
            gb * self.inv_var + self.priors.slope.neg_log_density_slope(p.b),
            gc * self.inv_var + self.priors.curvature.neg_log_density_slope(p.c),
        ]
    }
}

/// Negative log posterior density of `params` for the window, including all
/// normalization constants. Lower is better.
pub fn neg_log_posterior(window: &DataWindow, params: &ArcParams, priors: &PriorSet) -> Result<f64> {
    check_params(window, params)?;
    Ok(window.prepare(priors)?.value(params))
}

/// Gradient of [`neg_log_posterior`] with respect to `(a, b, c)`.
pub fn neg_log_posterior_gradient(
    window: &DataWindow,
    params: &ArcParams,
    priors: &PriorSet,
) -> Result<[f64; 3]> {
    if !params.is_finite() {
        return Err(ArcError::domain(format!("arc parameters not finite: {params:?}")));
    }
    Ok(window.prepare(priors)?.gradient(params))
}

fn check_params(window: &DataWindow, params: &ArcParams) -> Result<()> {
    if !params.is_finite() {
        return Err(ArcError::domain(format!("arc parameters not finite: {params:?}")));
    }
    if let Some(s) = window.start_constraint {
        if params.a != s {
            return Err(ArcError::domain(format!(
                "start value {} violates the window's start constraint {s}",
                params.a
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FitOptions {
    pub minimizer: MinimizeConfig,
    /// Holds `c` fixed and optimizes the remaining parameters only.
    pub frozen_curvature: Option<f64>,
}

/// MAP fit of a single arc to `window` with default optimizer settings.
pub fn fit_arc(window: &DataWindow, priors: &PriorSet) -> Result<FittedArc> {
    fit_arc_with(window, priors, &FitOptions::default())
}

/// MAP fit of a single arc.
///
/// With a start constraint `a` is pinned to it and `(b, c)` are optimized;
/// otherwise `a` is optimized as well, starting from the mean of the
/// observations. `(b, c)` start at their prior means.
pub fn fit_arc_with(window: &DataWindow, priors: &PriorSet, options: &FitOptions) -> Result<FittedArc> {
    let scorer = window.prepare(priors)?;
    let layout = Layout {
        fixed_a: window.start_constraint,
        fixed_c: options.frozen_curvature,
    };
    if let Some(c) = options.frozen_curvature {
        if !c.is_finite() {
            return Err(ArcError::domain("frozen curvature must be finite"));
        }
    }

    let mean_y = if window.values.is_empty() {
        0.0
    } else {
        window.values.iter().sum::<f64>() / window.values.len() as f64
    };
    let x0 = layout.pack(&ArcParams::new(mean_y, priors.slope.mean, priors.curvature.mean));

    let objective = |x: &[f64]| scorer.value(&layout.unpack(x));
    let gradient = |x: &[f64]| Ok(layout.project(&scorer.gradient(&layout.unpack(x))));
    let result = minimize_with_gradient(objective, gradient, &x0, &options.minimizer)?;
    let params = layout.unpack(&result.argmin);
    if !result.converged {
        return Err(ArcError::NotConverged {
            point: vec![params.a, params.b, params.c],
            value: result.value,
            iterations: result.iterations,
        });
    }

    Ok(FittedArc {
        start_pos: window.start_pos,
        end_pos: window.end_pos,
        params,
        log_map: -scorer.value(&params),
    })
}

/// Maps between the optimizer's free vector and full arc parameters.
struct Layout {
    fixed_a: Option<f64>,
    fixed_c: Option<f64>,
}

impl Layout {
    fn pack(&self, p: &ArcParams) -> Vec<f64> {
        let mut x = Vec::with_capacity(3);
        if self.fixed_a.is_none() {
            x.push(p.a);
        }
        x.push(p.b);
        if self.fixed_c.is_none() {
            x.push(p.c);
        }
        x
    }

    fn unpack(&self, x: &[f64]) -> ArcParams {
        let mut it = x.iter().copied();
        let a = self.fixed_a.unwrap_or_else(|| it.next().unwrap());
        let b = it.next().unwrap();
        let c = self.fixed_c.unwrap_or_else(|| it.next().unwrap());
        ArcParams { a, b, c }
    }

    fn project(&self, g: &[f64; 3]) -> Vec<f64> {
        self.pack(&ArcParams::new(g[0], g[1], g[2]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::{numeric_gradient, Method};
    use std::f64::consts::PI;

    fn unit_priors() -> PriorSet {
        PriorSet::new(
            GaussianPrior::new(0.0, 1.0).unwrap(),
            GaussianPrior::new(0.0, 1.0).unwrap(),
            LogNormalPrior::new(0.0, 1.0).unwrap(),
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(eval_arc(&ArcParams::new(100.0, 0.0, 0.0), 0.0), 100.0);
        assert_eq!(eval_arc(&ArcParams::new(100.0, 0.0, 0.0), 1.0), 99.0);
        let v = eval_arc(&ArcParams::new(60.0, 10.0, 10f64.ln()), 0.5);
        assert!((v - 62.5).abs() < 1e-12);
    }

    #[test]
    fn regularization_examples() {
        assert_eq!(regularization_coefficient(3.0, 3.0).unwrap(), 1.0);
        assert_eq!(regularization_coefficient(3.0, 1.0).unwrap(), 9.0);
        assert_eq!(regularization_coefficient(4.0, 2.0).unwrap(), 4.0);
        assert!(regularization_coefficient(0.0, 1.0).is_err());
        assert!(regularization_coefficient(1.0, -2.0).is_err());
    }

    #[test]
    fn prior_only_window_score() {
        let w = DataWindow::new(0.0, 1.0, vec![], vec![], Some(5.0)).unwrap();
        let nlp = neg_log_posterior(&w, &ArcParams::new(5.0, 0.0, 0.0), &unit_priors()).unwrap();
        let expected = (2.0 * PI).ln() + 0.5 * (2.0 * PI).ln();
        assert!((nlp - expected).abs() < 1e-12);
        assert!((nlp - 2.7568).abs() < 1e-4);
    }

    #[test]
    fn exact_datum_adds_gaussian_normalizer() {
        let sigma = 2.5;
        let priors = unit_priors().with_noise_sd(sigma).unwrap();
        let p = ArcParams::new(5.0, 0.0, 0.0);
        let empty = DataWindow::new(0.0, 1.0, vec![], vec![], Some(5.0)).unwrap();
        let one = DataWindow::new(0.0, 1.0, vec![0.5], vec![p.eval(0.5)], Some(5.0)).unwrap();
        let diff = neg_log_posterior(&one, &p, &priors).unwrap()
            - neg_log_posterior(&empty, &p, &priors).unwrap();
        assert!((diff - (sigma * (2.0 * PI).sqrt()).ln()).abs() < 1e-12);
    }

    #[test]
    fn constraint_mismatch_is_rejected() {
        let w = DataWindow::new(0.0, 1.0, vec![1.0], vec![1.0], Some(5.0)).unwrap();
        assert!(neg_log_posterior(&w, &ArcParams::new(4.0, 0.0, 0.0), &unit_priors()).is_err());
    }

    #[test]
    fn window_validation() {
        assert!(DataWindow::new(1.0, 1.0, vec![], vec![], Some(0.0)).is_err());
        assert!(DataWindow::new(0.0, 1.0, vec![0.5], vec![f64::NAN], None).is_err());
        assert!(DataWindow::new(0.0, 1.0, vec![0.5, 0.5], vec![1.0, 1.0], None).is_err());
        assert!(DataWindow::new(0.0, 1.0, vec![], vec![], None).is_err());
        assert!(DataWindow::new(0.0, 1.0, vec![2.0], vec![1.0], None).is_err());
        assert!(DataWindow::from_run(&[0.0], &[1.0], None).is_err());
        let w = DataWindow::from_run(&[0.0, 1.0, 2.0], &[3.0, 4.0, 5.0], Some(3.0)).unwrap();
        assert_eq!(w.positions(), &[1.0, 2.0]);
        let w = DataWindow::from_run(&[0.0, 1.0, 2.0], &[3.0, 4.0, 5.0], None).unwrap();
        assert_eq!(w.positions().len(), 3);
    }

    #[test]
    fn recovers_noiseless_arc() {
        let truth = ArcParams::new(100.0, 5.0, 0.0);
        let xs = [0.0, 0.25, 0.5, 0.75, 1.0];
        let ys: Vec<f64> = xs.iter().map(|&u| truth.eval(u)).collect();
        let priors = PriorSet::new(
            GaussianPrior::new(0.0, 1e3).unwrap(),
            GaussianPrior::new(0.0, 1e3).unwrap(),
            LogNormalPrior::new(0.0, 1.0).unwrap(),
            1.0,
        )
        .unwrap();
        let w = DataWindow::from_run(&xs, &ys, Some(100.0)).unwrap();
        let fit = fit_arc(&w, &priors).unwrap();
        assert!((fit.params.b - 5.0).abs() < 1e-3, "{fit:?}");
        assert!(fit.params.c.abs() < 1e-2, "{fit:?}");
        assert_eq!(fit.start_value(), 100.0);
    }

    #[test]
    fn uninformative_window_returns_prior_mode() {
        let priors = PriorSet::new(
            GaussianPrior::new(1.5, 2.0).unwrap(),
            GaussianPrior::new(-0.5, 0.7).unwrap(),
            LogNormalPrior::new(0.0, 1.0).unwrap(),
            1.0,
        )
        .unwrap();
        let w = DataWindow::new(0.0, 3.0, vec![], vec![], Some(10.0)).unwrap();
        let fit = fit_arc(&w, &priors).unwrap();
        assert!((fit.params.b - 1.5).abs() < 1e-6, "{fit:?}");
        assert!((fit.params.c + 0.5).abs() < 1e-6, "{fit:?}");
    }

    #[test]
    fn gradient_route_matches_simplex() {
        let priors = PriorSet::new(
            GaussianPrior::new(0.0, 10.0).unwrap(),
            GaussianPrior::new(8f64.ln(), 1.0).unwrap(),
            LogNormalPrior::new(2.0, 0.5).unwrap(),
            3.0,
        )
        .unwrap();
        let xs: Vec<f64> = (0..9).map(|i| i as f64).collect();
        let ys = [80.0, 84.0, 87.5, 88.0, 89.0, 87.0, 86.5, 82.0, 79.0];
        for constraint in [Some(80.0), None] {
            let w = DataWindow::from_run(&xs, &ys, constraint).unwrap();
            let simplex = fit_arc(&w, &priors).unwrap();
            let gd = fit_arc_with(
                &w,
                &priors,
                &FitOptions {
                    minimizer: MinimizeConfig {
                        method: Method::GradientDescent,
                        param_tol: 1e-10,
                        func_tol: 1e-9,
                        max_iters: 200_000,
                    },
                    frozen_curvature: None,
                },
            )
            .unwrap();
            for (s, g) in [
                (simplex.params.a, gd.params.a),
                (simplex.params.b, gd.params.b),
                (simplex.params.c, gd.params.c),
            ] {
                assert!((s - g).abs() < 1e-6, "{simplex:?} vs {gd:?}");
            }
        }
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let priors = unit_priors().with_noise_sd(0.8).unwrap();
        let w = DataWindow::new(0.0, 4.0, vec![1.0, 2.0, 3.5], vec![1.0, 2.5, 0.5], None).unwrap();
        let p = ArcParams::new(0.7, 1.3, 0.4);
        let g = neg_log_posterior_gradient(&w, &p, &priors).unwrap();
        let f = |x: &[f64]| {
            neg_log_posterior(&w, &ArcParams::new(x[0], x[1], x[2]), &priors).unwrap()
        };
        let fd = numeric_gradient(f, &[p.a, p.b, p.c], 1e-5).unwrap();
        for (a, n) in g.iter().zip(&fd) {
            assert!((a - n).abs() <= 1e-5 * n.abs().max(1.0));
        }
    }

    #[test]
    fn nan_data_is_a_domain_error() {
        let err = DataWindow::from_run(&[0.0, 1.0], &[1.0, f64::NAN], None).unwrap_err();
        assert!(matches!(err, ArcError::Domain(_)));
    }

    #[test]
    fn fitted_arc_serializes_flat() {
        let arc = FittedArc {
            start_pos: 0.0,
            end_pos: 2.0,
            params: ArcParams::new(1.0, 2.0, 3.0),
            log_map: -4.0,
        };
        let text = serde_json::to_string(&arc).unwrap();
        assert_eq!(
            text,
            r#"{"start_pos":0.0,"end_pos":2.0,"a":1.0,"b":2.0,"c":3.0,"log_map":-4.0}"#
        );
    }
}
