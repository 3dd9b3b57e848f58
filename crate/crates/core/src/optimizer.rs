//! Small unconstrained minimizers for objectives of one to three variables.
//!
//! The default method is a Nelder-Mead simplex search. A gradient descent
//! route (Barzilai-Borwein step with Armijo backtracking) is provided for
//! cross-checking optima when an analytic gradient is available.

use crate::error::{ArcError, Result};

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Simplex,
    GradientDescent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeConfig {
    /// Simplex: largest allowed distance of any vertex from the best one.
    /// Gradient descent: a step this small with no gradient progress ends
    /// the search unconverged.
    pub param_tol: f64,
    /// Simplex: largest allowed objective spread across the vertices,
    /// relative to `1 + |best value|`.
    /// Gradient descent: sup-norm of the gradient at convergence.
    pub func_tol: f64,
    pub max_iters: usize,
    pub method: Method,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        Self {
            param_tol: 1e-8,
            func_tol: 1e-10,
            max_iters: 500,
            method: Method::Simplex,
        }
    }
}

impl MinimizeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.param_tol > 0.0 && self.param_tol.is_finite()) {
            return Err(ArcError::domain(format!(
                "param_tol must be positive and finite; got {}",
                self.param_tol
            )));
        }
        if !(self.func_tol > 0.0 && self.func_tol.is_finite()) {
            return Err(ArcError::domain(format!(
                "func_tol must be positive and finite; got {}",
                self.func_tol
            )));
        }
        if self.max_iters == 0 {
            return Err(ArcError::domain("max_iters must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeResult {
    pub argmin: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `objective` starting from `x0`.
///
/// With [`Method::GradientDescent`] the gradient is taken by central
/// differences; use [`minimize_with_gradient`] to supply an analytic one.
pub fn minimize<F>(objective: F, x0: &[f64], config: &MinimizeConfig) -> Result<MinimizeResult>
where
    F: Fn(&[f64]) -> f64,
{
    match config.method {
        Method::Simplex => nelder_mead(&objective, x0, config),
        Method::GradientDescent => {
            let grad = |x: &[f64]| numeric_gradient(&objective, x, 1e-6);
            gradient_descent(&objective, grad, x0, config)
        }
    }
}

/// Like [`minimize`], but the gradient route uses the supplied `gradient`.
/// The simplex route ignores it.
pub fn minimize_with_gradient<F, G>(
    objective: F,
    gradient: G,
    x0: &[f64],
    config: &MinimizeConfig,
) -> Result<MinimizeResult>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Result<Vec<f64>>,
{
    match config.method {
        Method::Simplex => nelder_mead(&objective, x0, config),
        Method::GradientDescent => gradient_descent(&objective, gradient, x0, config),
    }
}

/// Central-difference gradient with step `h`.
pub fn numeric_gradient<F>(objective: F, x: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(ArcError::domain(format!(
            "finite-difference step must be positive; got {h}"
        )));
    }
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let fp = checked(&objective, &probe)?;
        probe[i] = x[i] - h;
        let fm = checked(&objective, &probe)?;
        probe[i] = x[i];
        grad.push((fp - fm) / (2.0 * h));
    }
    Ok(grad)
}

fn checked<F: Fn(&[f64]) -> f64>(objective: &F, x: &[f64]) -> Result<f64> {
    let v = objective(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ArcError::NonFiniteObjective { point: x.to_vec() })
    }
}

fn check_start(x0: &[f64], config: &MinimizeConfig) -> Result<()> {
    config.validate()?;
    if x0.is_empty() || x0.len() > 3 {
        return Err(ArcError::domain(format!(
            "dimension must be 1, 2 or 3; got {}",
            x0.len()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(ArcError::domain(format!("start point is not finite: {x0:?}")));
    }
    Ok(())
}

/// Simplex search, restarted from its claimed minimum until a restart no
/// longer improves it. A collapsed simplex can otherwise stall short of the
/// minimum in narrow valleys. Each pass has its own iteration budget.
fn nelder_mead<F>(objective: &F, x0: &[f64], config: &MinimizeConfig) -> Result<MinimizeResult>
where
    F: Fn(&[f64]) -> f64,
{
    check_start(x0, config)?;
    let mut result = nelder_mead_pass(objective, x0, config)?;
    for _ in 0..MAX_RESTARTS {
        let next = nelder_mead_pass(objective, &result.argmin, config)?;
        let moved = next
            .argmin
            .iter()
            .zip(&result.argmin)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let improved = next.value < result.value;
        let iterations = result.iterations + next.iterations;
        if improved {
            result = MinimizeResult { iterations, ..next };
        } else {
            result.iterations = iterations;
            result.converged |= next.converged;
        }
        if result.converged && (!improved || moved <= config.param_tol) {
            break;
        }
    }
    Ok(result)
}

const MAX_RESTARTS: usize = 5;

fn nelder_mead_pass<F>(
    objective: &F,
    x0: &[f64],
    config: &MinimizeConfig,
) -> Result<MinimizeResult>
where
    F: Fn(&[f64]) -> f64,
{
    let dim = x0.len();

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), checked(objective, x0)?));
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += f64::max(0.1, 0.1 * x0[i].abs());
        let fv = checked(objective, &v)?;
        simplex.push((v, fv));
    }

    let mut iterations = 0;
    let mut converged = false;
    loop {
        // Stable sort keeps the ordering deterministic under ties.
        simplex.sort_by(|l, r| l.1.total_cmp(&r.1));

        let (best, fbest) = (&simplex[0].0, simplex[0].1);
        let x_spread = simplex[1..]
            .iter()
            .flat_map(|(v, _)| v.iter().zip(best).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let f_spread = simplex[1..]
            .iter()
            .map(|(_, f)| (f - fbest).abs())
            .fold(0.0, f64::max);
        if x_spread <= config.param_tol && f_spread <= config.func_tol * (1.0 + fbest.abs()) {
            converged = true;
            break;
        }
        if iterations >= config.max_iters {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; dim];
        for (v, _) in &simplex[..dim] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / dim as f64;
            }
        }
        let worst = simplex[dim].0.clone();
        let f_worst = simplex[dim].1;
        let f_second = simplex[dim - 1].1;
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = along(REFLECT);
        let f_reflected = checked(objective, &reflected)?;

        if f_reflected < fbest {
            let expanded = along(REFLECT * EXPAND);
            let f_expanded = checked(objective, &expanded)?;
            simplex[dim] = if f_expanded < f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            };
            continue;
        }
        if f_reflected < f_second {
            simplex[dim] = (reflected, f_reflected);
            continue;
        }
        if f_reflected < f_worst {
            let outside = along(REFLECT * CONTRACT);
            let f_outside = checked(objective, &outside)?;
            if f_outside <= f_reflected {
                simplex[dim] = (outside, f_outside);
                continue;
            }
        } else {
            let inside = along(-CONTRACT);
            let f_inside = checked(objective, &inside)?;
            if f_inside < f_worst {
                simplex[dim] = (inside, f_inside);
                continue;
            }
        }

        let anchor = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            let shrunk: Vec<f64> = anchor
                .iter()
                .zip(&entry.0)
                .map(|(a, x)| a + SHRINK * (x - a))
                .collect();
            let f = checked(objective, &shrunk)?;
            *entry = (shrunk, f);
        }
    }

    let (argmin, value) = simplex.swap_remove(0);
    Ok(MinimizeResult {
        argmin,
        value,
        iterations,
        converged,
    })
}

fn gradient_descent<F, G>(
    objective: &F,
    gradient: G,
    x0: &[f64],
    config: &MinimizeConfig,
) -> Result<MinimizeResult>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Result<Vec<f64>>,
{
    check_start(x0, config)?;
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();

    let mut x = x0.to_vec();
    let mut fx = checked(objective, &x)?;
    let mut g = gradient(&x)?;
    let g_inf = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut step = if g_inf > 1.0 { 1.0 / g_inf } else { 1.0 };

    let mut best = (x.clone(), fx);
    let mut recent: Vec<f64> = Vec::with_capacity(NONMONOTONE_MEMORY);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iters {
        if g.iter().all(|v| v.abs() <= config.func_tol) {
            converged = true;
            break;
        }
        iterations += 1;
        let gg = dot(&g, &g);

        // Non-monotone Armijo backtracking along -g against the worst of
        // the recent objective values.
        let reference = recent.iter().copied().fold(fx, f64::max);
        let mut trial_step = step;
        let (x_new, f_new) = loop {
            let cand: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - trial_step * gi).collect();
            let f = objective(&cand);
            if f.is_finite() && f <= reference - 1e-4 * trial_step * gg {
                break (cand, f);
            }
            trial_step *= 0.5;
            if trial_step * gg.sqrt() < f64::EPSILON * config.param_tol {
                // No representable descent step remains.
                return Ok(MinimizeResult {
                    argmin: best.0,
                    value: best.1,
                    iterations,
                    converged: false,
                });
            }
        };

        let g_new = gradient(&x_new)?;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        step = if sy > 0.0 { dot(&s, &s) / sy } else { trial_step * 2.0 };

        if recent.len() == NONMONOTONE_MEMORY {
            recent.remove(0);
        }
        recent.push(fx);
        x = x_new;
        fx = f_new;
        g = g_new;
        if fx < best.1 {
            best = (x.clone(), fx);
        }
    }
    if converged {
        best = (x, fx);
    }

    Ok(MinimizeResult {
        argmin: best.0,
        value: best.1,
        iterations,
        converged,
    })
}

const NONMONOTONE_MEMORY: usize = 10;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_quadratic() {
        let r = minimize(|x| (x[0] - 3.0).powi(2), &[0.0], &MinimizeConfig::default()).unwrap();
        assert!(r.converged);
        assert!((r.argmin[0] - 3.0).abs() < 1e-6, "{:?}", r);
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = minimize(f, &[-1.2, 1.0], &MinimizeConfig::default()).unwrap();
        assert!((r.argmin[0] - 1.0).abs() < 1e-4, "{:?}", r);
        assert!((r.argmin[1] - 1.0).abs() < 1e-4, "{:?}", r);
    }

    #[test]
    fn absolute_value_matches_bisection() {
        // Bisection on the sign of the one-sided slope of |x| brackets 0.
        let f = |x: f64| x.abs();
        let (mut lo, mut hi) = (-10.0f64, 10.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid + 1e-12) > f(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);

        let r = minimize(|x| x[0].abs(), &[5.0], &MinimizeConfig::default()).unwrap();
        assert!((r.argmin[0] - oracle).abs() < 1e-4, "{:?}", r);
    }

    #[test]
    fn convex_quadratic_three_dims() {
        let f = |x: &[f64]| {
            let (u, v, w) = (x[0] - 1.0, x[1] + 2.0, x[2] - 0.5);
            3.0 * u * u + 2.0 * v * v + w * w + u * v + 0.5 * v * w
        };
        let r = minimize(f, &[0.0, 0.0, 0.0], &MinimizeConfig::default()).unwrap();
        assert!(r.converged);
        for (got, want) in r.argmin.iter().zip([1.0, -2.0, 0.5]) {
            assert!((got - want).abs() < 1e-6, "{:?}", r);
        }
    }

    #[test]
    fn gradient_descent_agrees_with_simplex() {
        let f = |x: &[f64]| 4.0 * (x[0] - 2.0).powi(2) + (x[1] + 1.0).powi(2) + x[0] * x[1];
        let grad = |x: &[f64]| Ok(vec![8.0 * (x[0] - 2.0) + x[1], 2.0 * (x[1] + 1.0) + x[0]]);
        let simplex = minimize(f, &[0.0, 0.0], &MinimizeConfig::default()).unwrap();
        let config = MinimizeConfig {
            method: Method::GradientDescent,
            max_iters: 10_000,
            ..MinimizeConfig::default()
        };
        let gd = minimize_with_gradient(f, grad, &[0.0, 0.0], &config).unwrap();
        assert!(gd.converged);
        for (a, b) in simplex.argmin.iter().zip(&gd.argmin) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn non_finite_objective_is_reported() {
        let err = minimize(
            |x| if x[0] > 0.05 { f64::NAN } else { x[0] * x[0] },
            &[0.0],
            &MinimizeConfig::default(),
        )
        .unwrap_err();
        match err {
            ArcError::NonFiniteObjective { point } => assert!(point[0] > 0.05),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn iteration_cap_reports_not_converged() {
        let config = MinimizeConfig {
            max_iters: 3,
            ..MinimizeConfig::default()
        };
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = minimize(f, &[-1.2, 1.0], &config).unwrap();
        assert!(!r.converged);
        // Every pass, the restarts included, stops at the cap.
        assert_eq!(r.iterations, 3 * (MAX_RESTARTS + 1));
        assert!(r.value <= f(&[-1.2, 1.0]));
    }

    #[test]
    fn rejects_bad_dimension() {
        assert!(minimize(|_| 0.0, &[], &MinimizeConfig::default()).is_err());
        assert!(minimize(|_| 0.0, &[0.0; 4], &MinimizeConfig::default()).is_err());
    }

    #[test]
    fn numeric_gradient_examples() {
        let g = numeric_gradient(|x| x[0] * x[0], &[3.0], 1e-5).unwrap();
        assert!((g[0] - 6.0).abs() < 1e-6);
        let g = numeric_gradient(|x| x[0] * x[1], &[2.0, 5.0], 1e-5).unwrap();
        assert!((g[0] - 5.0).abs() < 1e-6 && (g[1] - 2.0).abs() < 1e-6);
        let g = numeric_gradient(|_| 7.25, &[1.0, -4.0, 9.0], 1e-5).unwrap();
        assert_eq!(g, vec![0.0, 0.0, 0.0]);
        assert!(numeric_gradient(|_| f64::INFINITY, &[0.0], 1e-5).is_err());
        assert!(numeric_gradient(|x| x[0], &[0.0], 0.0).is_err());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn never_worse_than_start_and_deterministic(
                x0 in prop::collection::vec(-5.0f64..5.0, 1..=3),
                shift in prop::collection::vec(-3.0f64..3.0, 3),
                weights in prop::collection::vec(0.2f64..5.0, 3),
            ) {
                let f = |x: &[f64]| x.iter().enumerate()
                    .map(|(i, v)| weights[i] * (v - shift[i]).powi(2))
                    .sum::<f64>();
                let cfg = MinimizeConfig::default();
                let a = minimize(f, &x0, &cfg).unwrap();
                let b = minimize(f, &x0, &cfg).unwrap();
                prop_assert!(a.value <= f(&x0));
                prop_assert_eq!(&a, &b);
                prop_assert!(a.converged);
                for (i, v) in a.argmin.iter().enumerate() {
                    prop_assert!((v - shift[i]).abs() < 1e-6);
                }
            }
        }
    }
}
