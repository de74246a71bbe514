//! Classical linear regression across the interpolation threshold: planted
//! problems, least-squares and minimum-norm fits, Monte Carlo parameter error
//! and the row-space projection.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_cap, Error, Result, DEFAULT_ELEMENT_CAP};
use crate::linalg::{norm, PseudoInverse};
use crate::seed::{derive_trial_seed, rng_from_seed};
use crate::spectra::AspectRatio;
use crate::stats::mean_and_std_error;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionProblem {
    pub design: Array2<f64>,
    pub labels: Array1<f64>,
    pub w_true: Array1<f64>,
    /// The noise draw, so that `labels == design · w_true + noise` exactly.
    pub noise: Array1<f64>,
    pub sigma: f64,
    pub seed: u64,
}

impl RegressionProblem {
    pub fn n_samples(&self) -> usize {
        self.design.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.design.ncols()
    }
}

pub(crate) fn standard_normal_vec<R: RngCore>(rng: &mut R, len: usize) -> Array1<f64> {
    Array1::from_shape_simple_fn(len, || rng.sample(StandardNormal))
}

/// Vector drawn uniformly from the sphere of radius `radius`.
pub(crate) fn sphere_vec<R: RngCore>(rng: &mut R, len: usize, radius: f64) -> Array1<f64> {
    let mut v = standard_normal_vec(rng, len);
    let n = norm(v.view());
    v.mapv_inplace(|x| x * radius / n);
    v
}

pub(crate) fn gaussian_noise<R: RngCore>(rng: &mut R, len: usize, sigma: f64) -> Array1<f64> {
    standard_normal_vec(rng, len).mapv(|z| sigma * z)
}

pub fn generate_problem(
    n_samples: usize,
    n_features: usize,
    sigma: f64,
    w_norm: f64,
    rng_seed: u64,
) -> Result<RegressionProblem> {
    generate_problem_capped(n_samples, n_features, sigma, w_norm, rng_seed, DEFAULT_ELEMENT_CAP)
}

/// Draws `X` (i.i.d. standard normal, row-major), then `w` on the sphere of
/// radius `w_norm`, then `ε ~ N(0, σ²)`, from one stream seeded by `rng_seed`.
pub fn generate_problem_capped(
    n_samples: usize,
    n_features: usize,
    sigma: f64,
    w_norm: f64,
    rng_seed: u64,
    cap: usize,
) -> Result<RegressionProblem> {
    if n_samples == 0 || n_features == 0 {
        return Err(Error::argument("N and P must be at least 1"));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::argument(format!("sigma must be finite and non-negative, got {sigma}")));
    }
    if !(w_norm >= 0.0 && w_norm.is_finite()) {
        return Err(Error::argument(format!("w_norm must be finite and non-negative, got {w_norm}")));
    }
    check_cap("regression design", &[n_samples, n_features], cap)?;
    let mut rng = rng_from_seed(rng_seed);
    let design = Array2::from_shape_simple_fn((n_samples, n_features), || rng.sample(StandardNormal));
    let w_true = sphere_vec(&mut rng, n_features, w_norm);
    let noise = gaussian_noise(&mut rng, n_samples, sigma);
    let labels = design.dot(&w_true) + &noise;
    Ok(RegressionProblem {
        design,
        labels,
        w_true,
        noise,
        sigma,
        seed: rng_seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `P < N`.
    Under,
    /// `P > N`.
    Over,
    Square,
}

impl Regime {
    pub fn of(n_samples: usize, n_features: usize) -> Self {
        use std::cmp::Ordering::*;
        match n_features.cmp(&n_samples) {
            Less => Regime::Under,
            Greater => Regime::Over,
            Equal => Regime::Square,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub w_hat: Array1<f64>,
    pub regime: Regime,
    pub train_residual_norm: f64,
    /// `σ_max / σ_min` of the design.
    pub condition_estimate: f64,
    pub rank: usize,
}

fn finish_fit(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, pinv: &PseudoInverse) -> FitResult {
    let w_hat = pinv.solve(y);
    let residual = x.dot(&w_hat) - y;
    FitResult {
        train_residual_norm: norm(residual.view()),
        regime: Regime::of(x.nrows(), x.ncols()),
        condition_estimate: pinv.condition(),
        rank: pinv.rank(),
        w_hat,
    }
}

fn check_shapes(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::argument(format!(
            "design has {} rows but {} labels",
            x.nrows(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::argument("empty design"));
    }
    Ok(())
}

/// `(XᵀX)⁻¹XᵀY` through the SVD; requires `N ≥ P` and full column rank.
pub fn least_squares(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> Result<FitResult> {
    check_shapes(x, y)?;
    let (n, p) = x.dim();
    if n < p {
        return Err(Error::Regime(format!(
            "least squares needs N >= P, got N = {n}, P = {p}"
        )));
    }
    let pinv = PseudoInverse::new(x)?;
    if pinv.rank() < p {
        return Err(Error::RankDeficient {
            rank: pinv.rank(),
            required: p,
            condition: pinv.condition(),
        });
    }
    Ok(finish_fit(x, y, &pinv))
}

/// `Xᵀ(XXᵀ)⁻¹Y` through the SVD; requires `P ≥ N` and full row rank.
pub fn min_norm(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> Result<FitResult> {
    check_shapes(x, y)?;
    let (n, p) = x.dim();
    if p < n {
        return Err(Error::Regime(format!(
            "minimum-norm interpolation needs P >= N, got N = {n}, P = {p}"
        )));
    }
    let pinv = PseudoInverse::new(x)?;
    if pinv.rank() < n {
        return Err(Error::RankDeficient {
            rank: pinv.rank(),
            required: n,
            condition: pinv.condition(),
        });
    }
    Ok(finish_fit(x, y, &pinv))
}

/// Regime-appropriate solver; a square design falls back to the pseudo-solve.
pub fn fit_regime(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> Result<FitResult> {
    match Regime::of(x.nrows(), x.ncols()) {
        Regime::Under => least_squares(x, y),
        Regime::Over => min_norm(x, y),
        Regime::Square => {
            check_shapes(x, y)?;
            Ok(finish_fit(x, y, &PseudoInverse::new(x)?))
        }
    }
}

pub fn fit_least_squares(problem: &RegressionProblem) -> Result<FitResult> {
    least_squares(problem.design.view(), problem.labels.view())
}

pub fn fit_min_norm(problem: &RegressionProblem) -> Result<FitResult> {
    min_norm(problem.design.view(), problem.labels.view())
}

/// `‖ŵ − w‖²`.
pub fn parameter_error(fit: &FitResult, w_true: ArrayView1<'_, f64>) -> f64 {
    assert_eq!(fit.w_hat.len(), w_true.len(), "weight vectors differ in length");
    fit.w_hat
        .iter()
        .zip(w_true.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// `σ² α/(1−α)` below the threshold, `σ²/(α−1)` above it, `+∞` at `α = 1`.
pub fn variance_theory(alpha: AspectRatio, sigma: f64) -> f64 {
    let a = alpha.get();
    let s2 = sigma * sigma;
    if a < 1.0 {
        s2 * a / (1.0 - a)
    } else if a > 1.0 {
        s2 / (a - 1.0)
    } else {
        f64::INFINITY
    }
}

/// Variance of a planted problem once the design is fixed: the part of `ŵ − w`
/// driven by noise, `‖ŵ − Πw‖²`, and the unrecoverable null-space part `‖(I − Π)w‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorSplit {
    pub total: f64,
    pub variance: f64,
    pub bias: f64,
}

pub(crate) fn split_error(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    w_true: ArrayView1<'_, f64>,
) -> Result<(FitResult, ErrorSplit, PseudoInverse)> {
    let pinv = PseudoInverse::new(x)?;
    let (n, p) = x.dim();
    let required = n.min(p);
    if pinv.rank() < required && Regime::of(n, p) != Regime::Square {
        return Err(Error::RankDeficient {
            rank: pinv.rank(),
            required,
            condition: pinv.condition(),
        });
    }
    let fit = finish_fit(x, y, &pinv);
    let projected = pinv.project_row_space(w_true);
    let variance = sq_dist(fit.w_hat.view(), projected.view());
    let bias = sq_dist(w_true, projected.view());
    let total = sq_dist(fit.w_hat.view(), w_true);
    Ok((fit, ErrorSplit { total, variance, bias }, pinv))
}

fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceEstimate {
    /// `E‖w − ŵ‖²` over completed trials.
    pub mean_sq_error: f64,
    pub std_error: f64,
    /// Noise-driven component `E‖ŵ − Πw‖²`.
    pub variance_component: f64,
    pub variance_std_error: f64,
    /// Null-space component `E‖(I − Π)w‖²`; zero below the threshold.
    pub bias_component: f64,
    pub bias_std_error: f64,
    /// Completed trials.
    pub trials: usize,
    /// Rank-deficient draws that were skipped.
    pub skipped: usize,
    pub n_samples: usize,
    pub n_features: usize,
    pub alpha: AspectRatio,
    pub sigma: f64,
}

pub(crate) fn summarize(
    outcomes: &[Option<ErrorSplit>],
    n_samples: usize,
    n_features: usize,
    sigma: f64,
) -> Result<VarianceEstimate> {
    let done: Vec<ErrorSplit> = outcomes.iter().flatten().copied().collect();
    let skipped = outcomes.len() - done.len();
    let pick = |f: fn(&ErrorSplit) -> f64| mean_and_std_error(&done.iter().map(f).collect::<Vec<_>>());
    let (mean_sq_error, std_error) = pick(|s| s.total);
    let (variance_component, variance_std_error) = pick(|s| s.variance);
    let (bias_component, bias_std_error) = pick(|s| s.bias);
    Ok(VarianceEstimate {
        mean_sq_error,
        std_error,
        variance_component,
        variance_std_error,
        bias_component,
        bias_std_error,
        trials: done.len(),
        skipped,
        n_samples,
        n_features,
        alpha: AspectRatio::from_dims(n_samples, n_features)?,
        sigma,
    })
}

/// Monte Carlo estimate of `E‖w − ŵ‖²` with a fresh design, weight and noise per trial.
///
/// Trial `t` uses `derive_trial_seed(rng_seed, "variance", t)` and `‖w‖ = 1`.
/// Rank-deficient draws are counted in `skipped`, never retried.
pub fn variance_monte_carlo(
    n_samples: usize,
    n_features: usize,
    sigma: f64,
    trials: usize,
    rng_seed: u64,
) -> Result<VarianceEstimate> {
    if trials < 2 {
        return Err(Error::argument(format!("need at least 2 trials, got {trials}")));
    }
    if n_samples == 0 || n_features == 0 {
        return Err(Error::argument("N and P must be at least 1"));
    }
    check_cap("regression design", &[n_samples, n_features], DEFAULT_ELEMENT_CAP)?;
    let outcomes = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let seed = derive_trial_seed(rng_seed, "variance", t);
            let problem = generate_problem(n_samples, n_features, sigma, 1.0, seed)?;
            match split_error(problem.design.view(), problem.labels.view(), problem.w_true.view()) {
                Ok((_, split, _)) => Ok(Some(split)),
                Err(Error::RankDeficient { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    summarize(&outcomes, n_samples, n_features, sigma)
}

/// Orthogonal projection `Π = Xᵀ(XXᵀ)⁻¹X` onto the row space of a full-row-rank design.
#[derive(Debug, Clone)]
pub struct RowSpaceProjection {
    basis: Array2<f64>,
}

impl RowSpaceProjection {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn rank(&self) -> usize {
        self.basis.nrows()
    }

    pub fn apply(&self, v: ArrayView1<'_, f64>) -> Array1<f64> {
        assert_eq!(v.len(), self.dim(), "vector length does not match projection");
        self.basis.t().dot(&self.basis.dot(&v))
    }

    /// Sum of squared basis norms, i.e. `Tr Π` evaluated numerically.
    pub fn trace(&self) -> f64 {
        self.basis.iter().map(|v| v * v).sum()
    }
}

pub fn projection_row_space(design: ArrayView2<'_, f64>) -> Result<RowSpaceProjection> {
    let (n, p) = design.dim();
    if n == 0 || p == 0 {
        return Err(Error::argument("empty design"));
    }
    if n > p {
        return Err(Error::Regime(format!(
            "row-space projection needs N <= P, got N = {n}, P = {p}"
        )));
    }
    let pinv = PseudoInverse::new(design)?;
    if pinv.rank() < n {
        return Err(Error::RankDeficient {
            rank: pinv.rank(),
            required: n,
            condition: pinv.condition(),
        });
    }
    Ok(RowSpaceProjection {
        basis: pinv.row_space_basis().to_owned(),
    })
}

/// `‖(Π − I) v‖ / ‖v‖`, and 0 for `v = 0`.
pub fn recovery_residual(projection: &RowSpaceProjection, v: ArrayView1<'_, f64>) -> f64 {
    let len = norm(v);
    if len == 0.0 {
        return 0.0;
    }
    let r = projection.apply(v) - v;
    norm(r.view()) / len
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn noiseless_and_zero_weight_problems() {
        let p = generate_problem(30, 5, 0.0, 1.0, 1).unwrap();
        assert_eq!(p.labels, p.design.dot(&p.w_true));
        assert_abs_diff_eq!(norm(p.w_true.view()), 1.0, epsilon = 1e-14);

        let p = generate_problem(30, 5, 0.7, 0.0, 1).unwrap();
        assert_eq!(p.labels, p.noise);
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(generate_problem(3, 2, 1.0, 1.0, 77).unwrap(), generate_problem(3, 2, 1.0, 1.0, 77).unwrap());
        assert_ne!(generate_problem(3, 2, 1.0, 1.0, 77).unwrap(), generate_problem(3, 2, 1.0, 1.0, 78).unwrap());
    }

    #[test]
    fn labels_match_recorded_noise() {
        let p = generate_problem(20, 4, 0.3, 2.0, 5).unwrap();
        let r = &p.labels - &(p.design.dot(&p.w_true) + &p.noise);
        assert!(r.iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn generate_rejects_bad_arguments() {
        assert!(generate_problem(0, 2, 1.0, 1.0, 0).is_err());
        assert!(generate_problem(2, 2, -1.0, 1.0, 0).is_err());
        assert!(matches!(
            generate_problem_capped(100, 100, 1.0, 1.0, 0, 10),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn least_squares_examples() {
        let eye = Array2::<f64>::eye(3);
        let y = array![1.0, -2.0, 0.5];
        let fit = least_squares(eye.view(), y.view()).unwrap();
        assert_abs_diff_eq!(fit.w_hat[1], -2.0, epsilon = 1e-15);
        assert_eq!(fit.regime, Regime::Square);

        let x = array![[1.0], [1.0]];
        let fit = least_squares(x.view(), array![1.0, 3.0].view()).unwrap();
        assert_abs_diff_eq!(fit.w_hat[0], 2.0, epsilon = 1e-14);
        assert_eq!(fit.regime, Regime::Under);

        let p = generate_problem(50, 10, 0.0, 1.0, 8).unwrap();
        let fit = fit_least_squares(&p).unwrap();
        assert!(parameter_error(&fit, p.w_true.view()) < 1e-20);
    }

    #[test]
    fn least_squares_errors() {
        let x = array![[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]];
        let err = least_squares(x.view(), array![1.0, 2.0, 3.0].view()).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { rank: 1, required: 2, .. }));
        let wide = array![[1.0, 2.0]];
        assert!(matches!(least_squares(wide.view(), array![1.0].view()), Err(Error::Regime(_))));
    }

    #[test]
    fn min_norm_examples() {
        let x = array![[1.0, 1.0]];
        let fit = min_norm(x.view(), array![2.0].view()).unwrap();
        assert_abs_diff_eq!(fit.w_hat[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(fit.w_hat[1], 1.0, epsilon = 1e-14);
        assert_eq!(fit.regime, Regime::Over);

        let sq = array![[2.0, 1.0], [1.0, 3.0]];
        let fit = min_norm(sq.view(), array![3.0, 5.0].view()).unwrap();
        assert!(fit.train_residual_norm < 1e-14);

        let p = generate_problem(5, 12, 0.0, 1.0, 2).unwrap();
        let fit = min_norm(p.design.view(), Array1::zeros(5).view()).unwrap();
        assert!(fit.w_hat.iter().all(|&v| v.abs() < 1e-15));
    }

    #[test]
    fn min_norm_errors() {
        let x = array![[1.0, 1.0, 0.0], [2.0, 2.0, 0.0]];
        assert!(matches!(min_norm(x.view(), array![1.0, 2.0].view()), Err(Error::RankDeficient { .. })));
        let tall = array![[1.0], [1.0]];
        assert!(matches!(min_norm(tall.view(), array![1.0, 2.0].view()), Err(Error::Regime(_))));
    }

    #[test]
    fn parameter_error_examples() {
        let w = array![0.6, 0.8];
        let fit = |w_hat: Array1<f64>| FitResult {
            w_hat,
            regime: Regime::Square,
            train_residual_norm: 0.0,
            condition_estimate: 1.0,
            rank: 2,
        };
        assert_eq!(parameter_error(&fit(w.clone()), w.view()), 0.0);
        assert_abs_diff_eq!(parameter_error(&fit(array![1.6, 0.8]), w.view()), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(parameter_error(&fit(&w * 2.0), w.view()), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn variance_theory_examples() {
        let ar = |a| AspectRatio::new(a).unwrap();
        assert_eq!(variance_theory(ar(0.5), 1.0), 1.0);
        assert_eq!(variance_theory(ar(2.0), 1.0), 1.0);
        assert_eq!(variance_theory(ar(1.0), 1.0), f64::INFINITY);
        assert_eq!(variance_theory(ar(0.25), 2.0), 4.0 / 3.0);
    }

    #[test]
    fn noiseless_variance_is_zero_below_threshold() {
        let est = variance_monte_carlo(40, 10, 0.0, 5, 3).unwrap();
        assert!(est.mean_sq_error < 1e-16);
        assert!(est.bias_component < 1e-16);
        assert!(variance_monte_carlo(40, 10, 1.0, 1, 3).is_err());
    }

    #[test]
    fn square_designs_are_pseudo_solved() {
        let est = variance_monte_carlo(20, 20, 1.0, 4, 3).unwrap();
        assert_eq!(est.trials, 4);
        assert!(est.mean_sq_error > 1.0);
    }

    #[test]
    fn projection_examples() {
        let p = generate_problem(6, 15, 0.0, 1.0, 10).unwrap();
        let proj = projection_row_space(p.design.view()).unwrap();
        assert_abs_diff_eq!(proj.trace(), 6.0, epsilon = 1e-12);
        for row in p.design.rows() {
            assert!(recovery_residual(&proj, row) < 1e-10);
        }
        let outside = {
            let w = p.w_true.clone();
            &w - &proj.apply(w.view())
        };
        assert!(norm(proj.apply(outside.view()).view()) <= 1e-10 * norm(outside.view()));
        assert_eq!(recovery_residual(&proj, Array1::zeros(15).view()), 0.0);
    }

    #[test]
    fn transposed_projection_misses_generic_vectors() {
        // P < N: project onto the P-dimensional column space of X inside R^N.
        let p = generate_problem(60, 12, 0.0, 1.0, 21).unwrap();
        let xt = p.design.t().to_owned();
        let proj = projection_row_space(xt.view()).unwrap();
        let mut rng = rng_from_seed(4);
        let v = standard_normal_vec(&mut rng, 60);
        assert!(recovery_residual(&proj, v.view()) > 0.1);
    }

    #[test]
    fn projection_errors() {
        let tall = array![[1.0], [2.0]];
        assert!(matches!(projection_row_space(tall.view()), Err(Error::Regime(_))));
        let dep = array![[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]];
        assert!(matches!(
            projection_row_space(dep.view()),
            Err(Error::RankDeficient { rank: 1, .. })
        ));
    }
}
