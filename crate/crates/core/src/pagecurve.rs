//! Radiation entanglement entropy along the evaporation, computed three ways:
//! the piecewise closed form, a quadrature of the rescaled spectral density,
//! and Monte Carlo over Haar-random bipartite pure states.
//!
//! All entropies are in nats.

use ndarray::Array2;
use ndarray_linalg::c64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_cap, Error, Result, DEFAULT_ELEMENT_CAP};
use crate::linalg::{hermitian_eigenvalues, rank_tolerance};
use crate::seed::{derive_trial_seed, rng_from_seed};
use crate::spectra::{AspectRatio, MPLaw};
use crate::stats::mean_and_std_error;

const PROBABILITY_SUM_TOL: f64 = 1e-10;
const ENTROPY_SUM_TOL: f64 = 1e-8;
const NEGATIVE_TOL: f64 = 1e-10;
const SWEEP_QUAD_TOL: f64 = 1e-10;

/// Black-hole entropy, radiation dimension and their ratio `α = Ω / e^S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvaporationPoint {
    pub s_bh: f64,
    pub log_omega: f64,
    pub alpha: AspectRatio,
}

impl EvaporationPoint {
    pub fn new(s_bh: f64, log_omega: f64) -> Result<Self> {
        if !(s_bh > 0.0 && s_bh.is_finite()) {
            return Err(Error::argument(format!("s_bh must be positive, got {s_bh}")));
        }
        let alpha = AspectRatio::new((log_omega - s_bh).exp())?;
        Ok(Self {
            s_bh,
            log_omega,
            alpha,
        })
    }

    pub fn from_alpha(s_bh: f64, alpha: AspectRatio) -> Result<Self> {
        Self::new(s_bh, s_bh + alpha.get().ln())
    }
}

/// Eigenvalues of a radiation density matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiationSpectrum {
    probabilities: Vec<f64>,
    dim_radiation: usize,
    dim_interior: usize,
}

impl RadiationSpectrum {
    pub fn new(probabilities: Vec<f64>, dim_radiation: usize, dim_interior: usize) -> Result<Self> {
        if dim_radiation == 0 || dim_interior == 0 {
            return Err(Error::argument("dimensions must be at least 1"));
        }
        if probabilities.len() != dim_radiation {
            return Err(Error::argument(format!(
                "expected {dim_radiation} eigenvalues, got {}",
                probabilities.len()
            )));
        }
        if probabilities.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::argument("probabilities must lie in [0, 1]"));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(Error::argument(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self {
            probabilities,
            dim_radiation,
            dim_interior,
        })
    }

    /// Clips eigenvalues below the numerical-rank threshold to zero and renormalizes.
    pub(crate) fn from_raw_eigenvalues(
        mut eig: Vec<f64>,
        dim_radiation: usize,
        dim_interior: usize,
    ) -> Result<Self> {
        let largest = eig.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let tol = rank_tolerance(dim_radiation, dim_interior, largest);
        for v in eig.iter_mut() {
            if *v < tol {
                *v = 0.0;
            }
        }
        let total: f64 = eig.iter().sum();
        eig.iter_mut().for_each(|v| *v = (*v / total).min(1.0));
        Self::new(eig, dim_radiation, dim_interior)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn dim_radiation(&self) -> usize {
        self.dim_radiation
    }

    pub fn dim_interior(&self) -> usize {
        self.dim_interior
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.probabilities.iter().filter(|&&p| p > tol).count()
    }

    pub fn entropy(&self) -> f64 {
        entropy_unchecked(&self.probabilities)
    }
}

/// `S + ln α − α/2` for `α ≤ 1`, `S − 1/(2α)` for `α ≥ 1`; the branches meet at `S − 1/2`.
pub fn page_entropy_analytic(s_bh: f64, alpha: AspectRatio) -> f64 {
    let a = alpha.get();
    if a <= 1.0 {
        s_bh + a.ln() - 0.5 * a
    } else {
        s_bh - 0.5 / a
    }
}

/// `S + ln α − ∫ f_bulk(λ̃) λ̃ ln λ̃ dλ̃`; the zero-mode atom contributes nothing.
pub fn page_entropy_integral(s_bh: f64, alpha: AspectRatio, quad_tol: f64) -> Result<f64> {
    if !(s_bh > 0.0 && s_bh.is_finite()) {
        return Err(Error::argument(format!("s_bh must be positive, got {s_bh}")));
    }
    let law = MPLaw::new(alpha);
    let spread = law.integrate_bulk(|l| l * l.ln(), quad_tol)?;
    Ok(s_bh + alpha.get().ln() - spread)
}

/// `ln m − m/(2n)` with `m = min`, `n = max` of the two dimensions.
///
/// Accurate for `m, n ≫ 1`; at `m = 1` it returns `−1/(2n)` although a
/// one-dimensional subsystem is pure.
pub fn page_entropy_minmax(dim_a: usize, dim_b: usize) -> f64 {
    let m = dim_a.min(dim_b) as f64;
    let n = dim_a.max(dim_b) as f64;
    m.ln() - m / (2.0 * n)
}

/// Exact mean entanglement entropy of a Haar-random state on `C^a ⊗ C^b`:
/// `Σ_{k=n+1}^{mn} 1/k − (m−1)/(2n)`.
pub fn page_entropy_finite_mean(dim_a: usize, dim_b: usize) -> f64 {
    let m = dim_a.min(dim_b);
    let n = dim_a.max(dim_b);
    // Sum small terms first.
    let harmonic: f64 = (n + 1..=m * n).rev().map(|k| 1.0 / k as f64).sum();
    harmonic - (m as f64 - 1.0) / (2.0 * n as f64)
}

fn entropy_unchecked(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.ln())
        .sum::<f64>()
}

/// `−Σ p ln p` with `0 ln 0 = 0`; tiny negative entries are clipped and the rest renormalized.
pub fn von_neumann_entropy(probabilities: &[f64]) -> Result<f64> {
    if probabilities.is_empty() {
        return Err(Error::argument("empty probability vector"));
    }
    if let Some(bad) = probabilities.iter().find(|&&p| !p.is_finite() || p < -NEGATIVE_TOL) {
        return Err(Error::argument(format!("invalid probability {bad}")));
    }
    let total: f64 = probabilities.iter().sum();
    if (total - 1.0).abs() > ENTROPY_SUM_TOL {
        return Err(Error::argument(format!("probabilities sum to {total}, not 1")));
    }
    let clipped: Vec<f64> = probabilities.iter().map(|&p| p.max(0.0)).collect();
    let norm: f64 = clipped.iter().sum();
    let p: Vec<f64> = clipped.iter().map(|v| v / norm).collect();
    Ok(entropy_unchecked(&p))
}

/// Fraction of eigenvalues at or below `tol`.
pub fn rank_fraction(spec: &RadiationSpectrum, tol: f64) -> f64 {
    let p = spec.probabilities();
    p.iter().filter(|&&v| v <= tol).count() as f64 / p.len() as f64
}

#[derive(Debug, Clone, Serialize)]
pub struct BipartiteSample {
    pub mean: f64,
    /// NaN for a single trial.
    pub std_error: f64,
    pub entropies: Vec<f64>,
    pub spectra: Vec<RadiationSpectrum>,
}

pub fn sample_random_bipartite_entropy(
    dim_radiation: usize,
    dim_interior: usize,
    trials: usize,
    rng_seed: u64,
) -> Result<BipartiteSample> {
    sample_random_bipartite_entropy_capped(dim_radiation, dim_interior, trials, rng_seed, DEFAULT_ELEMENT_CAP)
}

/// Radiation spectrum of `Ψ Ψ† / Tr(Ψ Ψ†)` for a matrix of i.i.d. complex normals.
pub(crate) fn radiation_spectrum_of(psi: &Array2<c64>, dim_interior: usize) -> Result<RadiationSpectrum> {
    let dim_radiation = psi.nrows();
    let rho = psi.dot(&psi.t().mapv(|z| z.conj()));
    let eig = hermitian_eigenvalues(rho)?;
    RadiationSpectrum::from_raw_eigenvalues(eig, dim_radiation, dim_interior)
}

fn haar_state(dim_radiation: usize, dim_interior: usize, seed: u64) -> Array2<c64> {
    let mut rng = rng_from_seed(seed);
    Array2::from_shape_simple_fn((dim_radiation, dim_interior), || {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64::new(re, im)
    })
}

/// Monte Carlo entanglement entropy of Haar-random pure states on radiation ⊗ interior.
///
/// Trial `t` is seeded with `derive_trial_seed(rng_seed, "bipartite", t)`; the
/// reduction runs in trial order, so results do not depend on scheduling.
pub fn sample_random_bipartite_entropy_capped(
    dim_radiation: usize,
    dim_interior: usize,
    trials: usize,
    rng_seed: u64,
    cap: usize,
) -> Result<BipartiteSample> {
    if dim_radiation == 0 || dim_interior == 0 {
        return Err(Error::argument("dimensions must be at least 1"));
    }
    if trials == 0 {
        return Err(Error::argument("need at least one trial"));
    }
    check_cap("bipartite state", &[dim_radiation, dim_interior], cap)?;
    check_cap("radiation density matrix", &[dim_radiation, dim_radiation], cap)?;
    let spectra = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let psi = haar_state(dim_radiation, dim_interior, derive_trial_seed(rng_seed, "bipartite", t));
            radiation_spectrum_of(&psi, dim_interior)
        })
        .collect::<Result<Vec<_>>>()?;
    let entropies: Vec<f64> = spectra.iter().map(RadiationSpectrum::entropy).collect();
    let (mean, std_error) = mean_and_std_error(&entropies);
    Ok(BipartiteSample {
        mean,
        std_error,
        entropies,
        spectra,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PageMethod {
    Analytic,
    Integral,
    MonteCarlo,
}

impl PageMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            PageMethod::Analytic => "analytic",
            PageMethod::Integral => "integral",
            PageMethod::MonteCarlo => "monte_carlo",
        }
    }
}

impl std::str::FromStr for PageMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "analytic" => Ok(PageMethod::Analytic),
            "integral" => Ok(PageMethod::Integral),
            "monte_carlo" | "mc" => Ok(PageMethod::MonteCarlo),
            other => Err(Error::argument(format!("unknown page-curve method {other:?}"))),
        }
    }
}

/// Integer Hilbert dimensions a Monte Carlo point was computed at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FiniteDims {
    pub radiation: usize,
    pub interior: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PagePoint {
    pub alpha: f64,
    pub s_r: f64,
    pub method: PageMethod,
    pub std_error: Option<f64>,
    pub dims: Option<FiniteDims>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PageCurve {
    pub s_bh: f64,
    pub points: Vec<PagePoint>,
}

/// Nearest integers `≥ 1` to `α e^S` and `e^S`.
pub fn finite_dims(s_bh: f64, alpha: AspectRatio) -> FiniteDims {
    let interior = s_bh.exp();
    FiniteDims {
        radiation: (alpha.get() * interior).round().max(1.0) as usize,
        interior: interior.round().max(1.0) as usize,
    }
}

/// Page-curve points for every `α` in an ascending grid and every requested method.
pub fn sweep_page_curve(
    s_bh: f64,
    alpha_grid: &[f64],
    methods: &[PageMethod],
    trials: usize,
    rng_seed: u64,
) -> Result<PageCurve> {
    if !(s_bh > 0.0 && s_bh.is_finite()) {
        return Err(Error::argument(format!("s_bh must be positive, got {s_bh}")));
    }
    if alpha_grid.is_empty() {
        return Err(Error::argument("alpha grid is empty"));
    }
    if alpha_grid.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::argument("alpha grid must be strictly ascending"));
    }
    let mut methods = methods.to_vec();
    methods.sort();
    methods.dedup();
    let mut points = Vec::with_capacity(alpha_grid.len() * methods.len());
    for (k, &a) in alpha_grid.iter().enumerate() {
        let alpha = AspectRatio::new(a)?;
        for &method in &methods {
            let point = match method {
                PageMethod::Analytic => PagePoint {
                    alpha: a,
                    s_r: page_entropy_analytic(s_bh, alpha),
                    method,
                    std_error: None,
                    dims: None,
                },
                PageMethod::Integral => PagePoint {
                    alpha: a,
                    s_r: page_entropy_integral(s_bh, alpha, SWEEP_QUAD_TOL)?,
                    method,
                    std_error: None,
                    dims: None,
                },
                PageMethod::MonteCarlo => {
                    let dims = finite_dims(s_bh, alpha);
                    let seed = derive_trial_seed(rng_seed, "page_curve", k as u64);
                    let sample = sample_random_bipartite_entropy(dims.radiation, dims.interior, trials, seed)?;
                    PagePoint {
                        alpha: a,
                        s_r: sample.mean,
                        method,
                        std_error: Some(sample.std_error),
                        dims: Some(dims),
                    }
                }
            };
            points.push(point);
        }
    }
    Ok(PageCurve { s_bh, points })
}
