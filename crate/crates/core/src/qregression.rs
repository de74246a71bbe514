//! Quantum linear regression over black-hole microstates.
//!
//! Each training label `β` carries `P = Ω` interior vectors `ψ_i^β`. The
//! radiation data of label `β` is the diagonal of its reduced density matrix,
//! `⟨ψ_i^β|ψ_i^β⟩ / P`, and a diagonal observable is fit to planted labels with
//! the same solvers as the classical problem.

use ndarray::{s, Array1, Array2, Array3, ArrayView1, ArrayView2};
use ndarray_linalg::c64;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_cap, Error, Result, DEFAULT_ELEMENT_CAP};
use crate::linalg::{hermitian_eigenvalues, norm, symmetric_eigenvalues};
use crate::pagecurve::RadiationSpectrum;
use crate::regression::{
    fit_regime, gaussian_noise, projection_row_space, recovery_residual, sphere_vec, split_error,
    summarize, variance_theory, ErrorSplit, RowSpaceProjection,
};
use crate::seed::{derive_trial_seed, rng_from_seed};
use crate::spectra::{clip_small, AspectRatio, EmpiricalSpectrum};

/// Relative residual below which a test state counts as reconstructible.
pub const RECOVERY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenerationMode {
    /// Raw squared norms of unnormalized Gaussian microstates.
    GaussianNorms,
    /// Squared norms standardized by their exact population mean and variance.
    Centered,
}

impl GenerationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            GenerationMode::GaussianNorms => "gaussian_norms",
            GenerationMode::Centered => "centered",
        }
    }
}

impl std::str::FromStr for GenerationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gaussian_norms" => Ok(GenerationMode::GaussianNorms),
            "centered" => Ok(GenerationMode::Centered),
            other => Err(Error::argument(format!("unknown generation mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MicrostateEnsemble {
    /// Shape `(n_labels, radiation_dim, interior_dim)`.
    vectors: Array3<c64>,
    mode: GenerationMode,
}

impl MicrostateEnsemble {
    pub fn n_labels(&self) -> usize {
        self.vectors.dim().0
    }

    pub fn radiation_dim(&self) -> usize {
        self.vectors.dim().1
    }

    pub fn interior_dim(&self) -> usize {
        self.vectors.dim().2
    }

    pub fn mode(&self) -> GenerationMode {
        self.mode
    }

    /// Interior vector `ψ_i^β`.
    pub fn vector(&self, beta: usize, i: usize) -> ArrayView1<'_, c64> {
        self.vectors.slice(s![beta, i, ..])
    }

    /// `‖ψ_i^β‖²`.
    pub fn norm_sqr(&self, beta: usize, i: usize) -> f64 {
        self.vector(beta, i).iter().map(|z| z.norm_sqr()).sum()
    }
}

pub fn generate_microstates(
    interior_dim: usize,
    radiation_dim: usize,
    n_labels: usize,
    mode: GenerationMode,
    rng_seed: u64,
) -> Result<MicrostateEnsemble> {
    generate_microstates_capped(interior_dim, radiation_dim, n_labels, mode, rng_seed, DEFAULT_ELEMENT_CAP)
}

/// I.i.d. complex normal components with variance `1/interior_dim`, so `E‖ψ‖² = 1`.
/// States are deliberately not normalized.
pub fn generate_microstates_capped(
    interior_dim: usize,
    radiation_dim: usize,
    n_labels: usize,
    mode: GenerationMode,
    rng_seed: u64,
    cap: usize,
) -> Result<MicrostateEnsemble> {
    if interior_dim == 0 || radiation_dim == 0 || n_labels == 0 {
        return Err(Error::argument("microstate dimensions and label count must be at least 1"));
    }
    check_cap("microstate ensemble", &[n_labels, radiation_dim, interior_dim], cap)?;
    let scale = (0.5 / interior_dim as f64).sqrt();
    let mut rng = rng_from_seed(rng_seed);
    let vectors = Array3::from_shape_simple_fn((n_labels, radiation_dim, interior_dim), || {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64::new(scale * re, scale * im)
    });
    Ok(MicrostateEnsemble { vectors, mode })
}

/// Data matrix `D[β][i] = ⟨ψ_i^β|ψ_i^β⟩ / P`, or in centered mode the
/// standardized entry `(⟨ψ|ψ⟩ − 1) √interior_dim` (zero mean, unit variance).
pub fn build_data_matrix(ensemble: &MicrostateEnsemble) -> Array2<f64> {
    let (n, p) = (ensemble.n_labels(), ensemble.radiation_dim());
    let root_d = (ensemble.interior_dim() as f64).sqrt();
    Array2::from_shape_fn((n, p), |(beta, i)| {
        let q = ensemble.norm_sqr(beta, i);
        match ensemble.mode() {
            GenerationMode::GaussianNorms => q / p as f64,
            GenerationMode::Centered => (q - 1.0) * root_d,
        }
    })
}

/// Eigenvalues of `(1/N) DᵀD`, the object the MP law describes.
pub fn data_gram_spectrum(data: ArrayView2<'_, f64>) -> Result<EmpiricalSpectrum> {
    let (n, p) = data.dim();
    let gram = data.t().dot(&data) / n as f64;
    let mut eig = symmetric_eigenvalues(gram)?;
    clip_small(&mut eig, n, p);
    EmpiricalSpectrum::new(eig, n, p)
}

/// `Y = D · w + ε` with `ε ~ N(0, σ²)` drawn from `rng_seed`.
pub fn assign_labels(
    data: ArrayView2<'_, f64>,
    w_true_diag: ArrayView1<'_, f64>,
    sigma: f64,
    rng_seed: u64,
) -> Result<Array1<f64>> {
    if data.ncols() != w_true_diag.len() {
        return Err(Error::argument(format!(
            "data has {} columns but observable has {} entries",
            data.ncols(),
            w_true_diag.len()
        )));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::argument(format!("sigma must be finite and non-negative, got {sigma}")));
    }
    let mut rng = rng_from_seed(rng_seed);
    let noise = gaussian_noise(&mut rng, data.nrows(), sigma);
    Ok(data.dot(&w_true_diag) + &noise)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumRegressionSet {
    pub data: Array2<f64>,
    pub labels: Array1<f64>,
    /// Planted diagonal of the hidden observable.
    pub w_true_diag: Array1<f64>,
    pub sigma: f64,
    pub mode: GenerationMode,
}

impl QuantumRegressionSet {
    /// Microstates, a unit-norm planted observable and noisy labels, each from its own
    /// stream derived from `rng_seed`.
    pub fn generate(
        interior_dim: usize,
        radiation_dim: usize,
        n_labels: usize,
        mode: GenerationMode,
        sigma: f64,
        rng_seed: u64,
    ) -> Result<Self> {
        let ensemble = generate_microstates(
            interior_dim,
            radiation_dim,
            n_labels,
            mode,
            derive_trial_seed(rng_seed, "microstates", 0),
        )?;
        let data = build_data_matrix(&ensemble);
        let mut rng = rng_from_seed(derive_trial_seed(rng_seed, "observable", 0));
        let w_true_diag = sphere_vec(&mut rng, radiation_dim, 1.0);
        let labels = assign_labels(data.view(), w_true_diag.view(), sigma, derive_trial_seed(rng_seed, "labels", 0))?;
        Ok(Self {
            data,
            labels,
            w_true_diag,
            sigma,
            mode,
        })
    }
}

/// Diagonal observable `𝒲`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observable {
    pub diag: Array1<f64>,
}

impl Observable {
    pub fn new(diag: Array1<f64>) -> Result<Self> {
        if diag.iter().any(|v| !v.is_finite()) {
            return Err(Error::argument("observable entries must be finite"));
        }
        Ok(Self { diag })
    }
}

/// Vectorized diagonal of a test radiation state, `(⟨ψ_1|ψ_1⟩, …, ⟨ψ_P|ψ_P⟩) / P`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestState {
    pub vec: Array1<f64>,
    pub label: f64,
}

impl TestState {
    pub fn new(vec: Array1<f64>, label: f64) -> Result<Self> {
        if vec.is_empty() || vec.iter().any(|v| !v.is_finite()) || !label.is_finite() {
            return Err(Error::argument("test state entries and label must be finite"));
        }
        Ok(Self { vec, label })
    }

    /// Test state built from the interior vectors of one member of an ensemble.
    pub fn from_ensemble(ensemble: &MicrostateEnsemble, beta: usize, label: f64) -> Result<Self> {
        let p = ensemble.radiation_dim() as f64;
        let vec = Array1::from_shape_fn(ensemble.radiation_dim(), |i| ensemble.norm_sqr(beta, i) / p);
        Self::new(vec, label)
    }
}

/// `Tr(ρᵗ 𝒲) = vec(ρᵗ) · diag(𝒲)`.
pub fn predict_expectation(test: &TestState, obs: &Observable) -> f64 {
    assert_eq!(test.vec.len(), obs.diag.len(), "test state and observable differ in length");
    test.vec.dot(&obs.diag)
}

/// Least squares for `P < N`, minimum-norm interpolation for `P > N`.
pub fn train_observable(set: &QuantumRegressionSet) -> Result<Observable> {
    let fit = fit_regime(set.data.view(), set.labels.view())?;
    Observable::new(fit.w_hat)
}

/// `Π = D†(DD†)⁻¹D`, defined only once `P ≥ N`.
pub fn recovery_projection(data: ArrayView2<'_, f64>) -> Result<RowSpaceProjection> {
    let (n, p) = data.dim();
    if p < n {
        return Err(Error::Regime(format!(
            "before the Page time (P = {p} < N = {n}) the projection D†(DD†)⁻¹D does not exist; \
             the radiation subspace cannot reconstruct a generic test state"
        )));
    }
    projection_row_space(data)
}

/// `‖(Π − I) vec(ρᵗ)‖ / ‖vec(ρᵗ)‖`.
pub fn recovery_projection_residual(data: ArrayView2<'_, f64>, test: &TestState) -> Result<f64> {
    if data.ncols() != test.vec.len() {
        return Err(Error::argument("test state length does not match data columns"));
    }
    let proj = recovery_projection(data)?;
    Ok(recovery_residual(&proj, test.vec.view()))
}

/// Reduced density matrix `ρ_r^β = (1/P) Σ_ij ⟨ψ_i^β|ψ_j^β⟩ |i⟩⟨j|`.
pub fn radiation_density_matrix(ensemble: &MicrostateEnsemble, beta: usize) -> Array2<c64> {
    let psi = ensemble.vectors.slice(s![beta, .., ..]);
    let p = ensemble.radiation_dim() as f64;
    let bra = psi.mapv(|z| z.conj());
    bra.dot(&psi.t()) / c64::new(p, 0.0)
}

/// Spectrum of `ρ_r^β`, normalized to unit trace (the microstates are not normalized).
pub fn radiation_density_spectrum(ensemble: &MicrostateEnsemble, beta: usize) -> Result<RadiationSpectrum> {
    let eig = hermitian_eigenvalues(radiation_density_matrix(ensemble, beta))?;
    RadiationSpectrum::from_raw_eigenvalues(eig, ensemble.radiation_dim(), ensemble.interior_dim())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantumSweepRow {
    /// Realized `P/N`.
    pub alpha: f64,
    pub n_features: usize,
    pub mean_sq_error: f64,
    pub std_error: f64,
    pub variance_component: f64,
    pub bias_component: f64,
    pub theory: f64,
    /// Fraction of trials in which a mixture of training states was reconstructed by `Π`.
    pub recovery_rate: f64,
    pub trials: usize,
    pub skipped: usize,
}

struct QuantumTrial {
    split: Option<ErrorSplit>,
    recovered: bool,
}

fn quantum_trial(
    interior_dim: usize,
    n_labels: usize,
    n_features: usize,
    sigma: f64,
    mode: GenerationMode,
    seed: u64,
) -> Result<QuantumTrial> {
    let set = QuantumRegressionSet::generate(interior_dim, n_features, n_labels, mode, sigma, seed)?;
    let (_, split, pinv) = match split_error(set.data.view(), set.labels.view(), set.w_true_diag.view()) {
        Ok(v) => v,
        Err(Error::RankDeficient { .. }) => {
            return Ok(QuantumTrial {
                split: None,
                recovered: false,
            })
        }
        Err(e) => return Err(e),
    };
    let recovered = if n_features >= n_labels && pinv.rank() == n_labels {
        // A random mixture of training states is itself a state in the span of the rows.
        let mut rng = rng_from_seed(derive_trial_seed(seed, "mixture", 0));
        let weights: Array1<f64> = Array1::from_shape_simple_fn(n_labels, || rng.sample(Exp1));
        let weights = &weights / weights.sum();
        let mixture = set.data.t().dot(&weights);
        let r = pinv.project_row_space(mixture.view()) - &mixture;
        norm(r.view()) <= RECOVERY_TOL * norm(mixture.view())
    } else {
        false
    };
    Ok(QuantumTrial {
        split: Some(split),
        recovered,
    })
}

/// Double-descent sweep of the quantum regression: `P = round(α N)` per grid point.
#[allow(clippy::too_many_arguments)]
pub fn quantum_double_descent_sweep(
    interior_dim: usize,
    n_labels: usize,
    alpha_grid: &[f64],
    sigma: f64,
    trials: usize,
    mode: GenerationMode,
    rng_seed: u64,
) -> Result<Vec<QuantumSweepRow>> {
    if trials < 2 {
        return Err(Error::argument(format!("need at least 2 trials, got {trials}")));
    }
    if n_labels == 0 || interior_dim == 0 {
        return Err(Error::argument("interior dimension and label count must be at least 1"));
    }
    if alpha_grid.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::argument("alpha grid must be strictly ascending"));
    }
    alpha_grid
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            AspectRatio::new(a)?;
            let n_features = (a * n_labels as f64).round().max(1.0) as usize;
            let grid_seed = derive_trial_seed(rng_seed, "quantum_alpha", k as u64);
            let outcomes = (0..trials as u64)
                .into_par_iter()
                .map(|t| {
                    quantum_trial(
                        interior_dim,
                        n_labels,
                        n_features,
                        sigma,
                        mode,
                        derive_trial_seed(grid_seed, "quantum_trial", t),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let recovered = outcomes.iter().filter(|o| o.recovered).count();
            let splits: Vec<Option<ErrorSplit>> = outcomes.iter().map(|o| o.split).collect();
            let est = summarize(&splits, n_labels, n_features, sigma)?;
            Ok(QuantumSweepRow {
                alpha: est.alpha.get(),
                n_features,
                mean_sq_error: est.mean_sq_error,
                std_error: est.std_error,
                variance_component: est.variance_component,
                bias_component: est.bias_component,
                theory: variance_theory(est.alpha, sigma),
                recovery_rate: recovered as f64 / trials as f64,
                trials: est.trials,
                skipped: est.skipped,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression::generate_problem;
    use approx::assert_abs_diff_eq;

    #[test]
    fn one_dimensional_interior_norms_are_exponential() {
        let ens = generate_microstates(1, 50, 200, GenerationMode::GaussianNorms, 3).unwrap();
        let norms: Vec<f64> = (0..200).flat_map(|b| (0..50).map(move |i| (b, i))).map(|(b, i)| ens.norm_sqr(b, i)).collect();
        let n = norms.len() as f64;
        let mean = norms.iter().sum::<f64>() / n;
        let var = norms.iter().map(|q| (q - mean) * (q - mean)).sum::<f64>() / n;
        // Exp(1): mean 1, variance 1; 10⁴ draws give a standard error of 0.01 on the mean.
        assert!((mean - 1.0).abs() < 0.04, "mean {mean}");
        assert!((var - 1.0).abs() < 0.1, "variance {var}");
        let frac_above_one = norms.iter().filter(|&&q| q > 1.0).count() as f64 / n;
        assert!((frac_above_one - (-1f64).exp()).abs() < 0.02);
    }

    #[test]
    fn ensembles_are_deterministic_and_validated() {
        let a = generate_microstates(3, 4, 5, GenerationMode::Centered, 9).unwrap();
        let b = generate_microstates(3, 4, 5, GenerationMode::Centered, 9).unwrap();
        assert_eq!(a, b);
        assert!(generate_microstates(3, 4, 0, GenerationMode::Centered, 9).is_err());
        assert!(matches!(
            generate_microstates_capped(100, 100, 100, GenerationMode::Centered, 0, 1000),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn normalized_states_give_rank_one_data() {
        let mut ens = generate_microstates(6, 5, 8, GenerationMode::GaussianNorms, 1).unwrap();
        for beta in 0..8 {
            for i in 0..5 {
                let n = ens.norm_sqr(beta, i).sqrt();
                ens.vectors.slice_mut(s![beta, i, ..]).mapv_inplace(|z| z / n);
            }
        }
        let d = build_data_matrix(&ens);
        assert!(d.iter().all(|&v| (v - 0.2).abs() < 1e-15));
        let pinv = crate::linalg::PseudoInverse::new(d.view()).unwrap();
        assert_eq!(pinv.rank(), 1);
    }

    #[test]
    fn gaussian_norm_entries_concentrate() {
        let d_int = 400;
        let ens = generate_microstates(d_int, 20, 30, GenerationMode::GaussianNorms, 2).unwrap();
        let d = build_data_matrix(&ens);
        assert!(d.iter().all(|&v| v >= 0.0));
        let scaled: Vec<f64> = d.iter().map(|v| v * 20.0).collect();
        let n = scaled.len() as f64;
        let mean = scaled.iter().sum::<f64>() / n;
        let std = (scaled.iter().map(|q| (q - mean) * (q - mean)).sum::<f64>() / n).sqrt();
        assert!((mean - 1.0).abs() < 0.01);
        assert!((std - 1.0 / (d_int as f64).sqrt()).abs() < 0.1 / (d_int as f64).sqrt());
    }

    #[test]
    fn centered_entries_have_zero_mean_and_unit_variance() {
        let ens = generate_microstates(4, 10, 2000, GenerationMode::Centered, 5).unwrap();
        let d = build_data_matrix(&ens);
        for col in d.columns() {
            let n = col.len() as f64;
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            // Sampling error of the mean is 1/√2000 ≈ 0.022.
            assert!(mean.abs() < 0.1, "column mean {mean}");
            assert!((var - 1.0).abs() < 0.2, "column variance {var}");
        }
    }

    #[test]
    fn labels_examples() {
        let d = generate_problem(10, 4, 0.0, 1.0, 1).unwrap().design;
        let w = Array1::from(vec![1.0, -1.0, 0.5, 2.0]);
        let y = assign_labels(d.view(), w.view(), 0.0, 3).unwrap();
        assert_eq!(y, d.dot(&w));
        let y0 = assign_labels(d.view(), Array1::zeros(4).view(), 1.0, 3).unwrap();
        let mut rng = rng_from_seed(3);
        assert_eq!(y0, gaussian_noise(&mut rng, 10, 1.0));
        assert_eq!(y0, assign_labels(d.view(), Array1::zeros(4).view(), 1.0, 3).unwrap());
        assert!(assign_labels(d.view(), Array1::zeros(3).view(), 1.0, 3).is_err());
    }

    #[test]
    fn prediction_examples() {
        let test = TestState::new(Array1::from(vec![0.1, 0.3, 0.4]), 0.0).unwrap();
        let ones = Observable::new(Array1::ones(3)).unwrap();
        assert_abs_diff_eq!(predict_expectation(&test, &ones), 0.8, epsilon = 1e-15);
        let e = TestState::new(Array1::from(vec![0.0, 1.0 / 3.0, 0.0]), 0.0).unwrap();
        let obs = Observable::new(Array1::from(vec![5.0, 6.0, 7.0])).unwrap();
        assert_abs_diff_eq!(predict_expectation(&e, &obs), 2.0, epsilon = 1e-15);
        let zero = Observable::new(Array1::zeros(3)).unwrap();
        assert_eq!(predict_expectation(&test, &zero), 0.0);
        assert!(Observable::new(Array1::from(vec![f64::NAN])).is_err());
    }

    #[test]
    fn training_examples() {
        let set = QuantumRegressionSet::generate(8, 6, 6, GenerationMode::Centered, 0.5, 1).unwrap();
        let obs = train_observable(&set).unwrap();
        let r = set.data.dot(&obs.diag) - &set.labels;
        assert!(norm(r.view()) < 1e-8 * norm(set.labels.view()));

        let set = QuantumRegressionSet::generate(8, 10, 60, GenerationMode::Centered, 0.0, 2).unwrap();
        let obs = train_observable(&set).unwrap();
        assert!((&obs.diag - &set.w_true_diag).iter().all(|v| v.abs() < 1e-8));

        let set = QuantumRegressionSet::generate(8, 40, 15, GenerationMode::GaussianNorms, 1.0, 3).unwrap();
        let obs = train_observable(&set).unwrap();
        let r = set.data.dot(&obs.diag) - &set.labels;
        assert!(norm(r.view()) < 1e-8 * norm(set.labels.view()));
    }

    #[test]
    fn recovery_examples() {
        let set = QuantumRegressionSet::generate(4, 30, 10, GenerationMode::Centered, 0.0, 4).unwrap();
        let row = TestState::new(set.data.row(3).to_owned(), set.labels[3]).unwrap();
        assert!(recovery_projection_residual(set.data.view(), &row).unwrap() < 1e-10);

        let under = QuantumRegressionSet::generate(4, 5, 10, GenerationMode::Centered, 0.0, 4).unwrap();
        let t = TestState::new(under.data.row(0).to_owned(), 0.0).unwrap();
        assert!(matches!(recovery_projection_residual(under.data.view(), &t), Err(Error::Regime(_))));

        let wide = QuantumRegressionSet::generate(4, 200, 5, GenerationMode::GaussianNorms, 0.0, 6).unwrap();
        let other = generate_microstates(4, 200, 1, GenerationMode::GaussianNorms, 99).unwrap();
        let fresh = TestState::from_ensemble(&other, 0, 0.0).unwrap();
        // Positive-mean data share the all-ones direction, so a fresh state is only partly outside.
        let centered = |v: &Array1<f64>| v - v.mean().unwrap();
        let res = recovery_projection_residual(wide.data.view(), &fresh).unwrap();
        assert!(res > 1e-3, "residual {res}");
        let c = TestState::new(centered(&fresh.vec), 0.0).unwrap();
        assert!(recovery_projection_residual(wide.data.view(), &c).unwrap() > 0.5);
    }

    #[test]
    fn density_matrix_rank_and_trace() {
        let ens = generate_microstates(8, 24, 3, GenerationMode::GaussianNorms, 8).unwrap();
        for beta in 0..3 {
            let rho = radiation_density_matrix(&ens, beta);
            let tr: f64 = (0..24).map(|i| rho[[i, i]].re).sum();
            let expected: f64 = (0..24).map(|i| ens.norm_sqr(beta, i)).sum::<f64>() / 24.0;
            assert_abs_diff_eq!(tr, expected, epsilon = 1e-12);
            let spec = radiation_density_spectrum(&ens, beta).unwrap();
            assert_eq!(spec.rank(0.0), 8);
            assert_abs_diff_eq!(crate::pagecurve::rank_fraction(&spec, 0.0), 1.0 - 1.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn noiseless_sweep_has_zero_error_below_threshold() {
        let rows = quantum_double_descent_sweep(4, 60, &[0.25, 0.5], 0.0, 3, GenerationMode::Centered, 1).unwrap();
        for row in rows {
            assert!(row.mean_sq_error < 1e-20);
            assert_eq!(row.recovery_rate, 0.0);
        }
    }

    #[test]
    fn sweep_recovers_after_threshold() {
        let rows = quantum_double_descent_sweep(4, 20, &[0.5, 2.0], 1.0, 3, GenerationMode::Centered, 1).unwrap();
        assert_eq!(rows[0].recovery_rate, 0.0);
        assert_eq!(rows[1].recovery_rate, 1.0);
        assert_eq!(rows[1].n_features, 40);
        assert!(rows[1].bias_component > 0.0);
    }

    #[test]
    fn mode_names_round_trip() {
        for m in [GenerationMode::GaussianNorms, GenerationMode::Centered] {
            assert_eq!(m.as_str().parse::<GenerationMode>().unwrap(), m);
        }
    }
}
