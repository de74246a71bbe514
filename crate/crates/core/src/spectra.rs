//! Marchenko–Pastur law in the rescaled variable, its Stieltjes transform,
//! Wishart sampling and empirical-vs-theoretical spectral distances.

use std::f64::consts::PI;

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_cap, Error, Result, DEFAULT_ELEMENT_CAP};
use crate::linalg::{rank_tolerance, symmetric_eigenvalues};
use crate::quad;
use crate::seed::rng_from_seed;

/// Tolerance used internally when a CDF value is needed.
const CDF_TOL: f64 = 1e-12;

/// Ratio `P / N` (equivalently `Ω / e^S`).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct AspectRatio(f64);

impl AspectRatio {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::argument(format!(
                "aspect ratio must be finite and positive, got {alpha}"
            )))
        }
    }

    /// `n_features / n_samples`.
    pub fn from_dims(n_samples: usize, n_features: usize) -> Result<Self> {
        if n_samples == 0 || n_features == 0 {
            return Err(Error::argument("dimensions must be at least 1"));
        }
        Self::new(n_features as f64 / n_samples as f64)
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn inverse(self) -> Self {
        Self(1.0 / self.0)
    }
}

impl TryFrom<f64> for AspectRatio {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<AspectRatio> for f64 {
    fn from(a: AspectRatio) -> f64 {
        a.0
    }
}

/// Marchenko–Pastur law of `(1/N) XᵀX` for an `N × P` matrix with i.i.d.
/// unit-variance entries and `α = P/N`.
///
/// The law is a continuous bulk on `[λ−, λ+]` plus, for `α > 1`, an atom of mass
/// `1 − 1/α` at zero. The atom is kept as a separate scalar and never enters
/// [`MPLaw::bulk_density`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MPLaw {
    alpha: AspectRatio,
    lambda_minus: f64,
    lambda_plus: f64,
    zero_mass: f64,
}

impl MPLaw {
    pub fn new(alpha: AspectRatio) -> Self {
        let r = alpha.get().sqrt();
        Self {
            alpha,
            lambda_minus: (1.0 - r) * (1.0 - r),
            lambda_plus: (1.0 + r) * (1.0 + r),
            zero_mass: if alpha.get() > 1.0 {
                1.0 - 1.0 / alpha.get()
            } else {
                0.0
            },
        }
    }

    pub fn alpha(&self) -> AspectRatio {
        self.alpha
    }

    pub fn lambda_minus(&self) -> f64 {
        self.lambda_minus
    }

    pub fn lambda_plus(&self) -> f64 {
        self.lambda_plus
    }

    pub fn zero_mass(&self) -> f64 {
        self.zero_mass
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lambda_minus, self.lambda_plus)
    }

    pub fn bulk_density(&self, lambda: f64) -> f64 {
        let (a, b) = self.support();
        if !(lambda > a && lambda < b) {
            return 0.0;
        }
        ((lambda - a) * (b - lambda)).sqrt() / (2.0 * PI * self.alpha.get() * lambda)
    }

    /// `∫ g(λ) f_bulk(λ) dλ` over `[λ−, λ(θ_max)]` after `λ = λ− + (λ+ − λ−) sin²θ`.
    ///
    /// The substitution cancels the square-root edge behaviour, and at `α = 1`
    /// it also cancels the `1/λ` pole of the density at the origin.
    fn integrate_bulk_to<G: Fn(f64) -> f64>(&self, g: G, theta_max: f64, tol: f64) -> Result<f64> {
        let width = self.lambda_plus - self.lambda_minus;
        let alpha = self.alpha.get();
        let a = self.lambda_minus;
        let integrand = |theta: f64| {
            let (s, c) = theta.sin_cos();
            let s2 = s * s;
            let lambda = a + width * s2;
            // f_bulk(λ) dλ/dθ, with sin²θ cancelled against λ when λ− = 0.
            let weight = if a == 0.0 {
                width * c * c / (PI * alpha)
            } else {
                width * width * s2 * c * c / (PI * alpha * lambda)
            };
            g(lambda) * weight
        };
        quad::integrate(integrand, 0.0, theta_max, tol)
    }

    /// `∫ g(λ) f_bulk(λ) dλ` over the whole bulk.
    pub fn integrate_bulk<G: Fn(f64) -> f64>(&self, g: G, tol: f64) -> Result<f64> {
        self.integrate_bulk_to(g, 0.5 * PI, tol)
    }

    /// Bulk mass below `lambda` (atom excluded).
    pub fn bulk_cdf(&self, lambda: f64) -> f64 {
        let (a, b) = self.support();
        if lambda <= a {
            return 0.0;
        }
        if lambda >= b {
            return 1.0 - self.zero_mass;
        }
        let theta = ((lambda - a) / (b - a)).sqrt().asin();
        self.integrate_bulk_to(|_| 1.0, theta, CDF_TOL)
            .expect("bulk cdf integrand is smooth")
            .clamp(0.0, 1.0 - self.zero_mass)
    }

    /// Full CDF `P(λ̃ ≤ lambda)` including the atom at zero.
    pub fn cdf(&self, lambda: f64) -> f64 {
        let atom = if lambda >= 0.0 { self.zero_mass } else { 0.0 };
        atom + self.bulk_cdf(lambda)
    }

    /// Left limit `P(λ̃ < lambda)`.
    fn cdf_left(&self, lambda: f64) -> f64 {
        let atom = if lambda > 0.0 { self.zero_mass } else { 0.0 };
        atom + self.bulk_cdf(lambda)
    }

    /// Smallest `λ` with `cdf(λ) ≥ q`.
    pub fn quantile(&self, q: f64) -> f64 {
        if q <= self.zero_mass {
            return if self.zero_mass > 0.0 { 0.0 } else { self.lambda_minus };
        }
        if q >= 1.0 {
            return self.lambda_plus;
        }
        let (mut lo, mut hi) = self.support();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < q {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
        }
        hi
    }
}

pub fn mp_support(alpha: AspectRatio) -> (f64, f64) {
    MPLaw::new(alpha).support()
}

/// Bulk part of the Marchenko–Pastur density; 0 outside the open support.
pub fn mp_bulk_density(lambda: f64, alpha: AspectRatio) -> f64 {
    MPLaw::new(alpha).bulk_density(lambda)
}

pub fn mp_zero_mass(alpha: AspectRatio) -> f64 {
    MPLaw::new(alpha).zero_mass()
}

/// `S(z) = ∫ f_MP(λ) / (λ − z) dλ` for real `z` off the support, atom included.
pub fn stieltjes_numeric(z: f64, alpha: AspectRatio, quad_tol: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::argument(format!("z must be finite, got {z}")));
    }
    let law = MPLaw::new(alpha);
    let (a, b) = law.support();
    if z >= a && z <= b {
        return Err(Error::Domain(format!(
            "z = {z} lies inside the bulk support [{a}, {b}]"
        )));
    }
    if law.zero_mass() > 0.0 && z == 0.0 {
        return Err(Error::Domain(format!(
            "z = 0 coincides with the zero-mode atom for alpha = {}",
            alpha.get()
        )));
    }
    let bulk = law.integrate_bulk(|lambda| 1.0 / (lambda - z), quad_tol)?;
    let atom = if law.zero_mass() > 0.0 {
        law.zero_mass() / (0.0 - z)
    } else {
        0.0
    };
    Ok(bulk + atom)
}

/// Closed form `S(0) = 1/(1 − α)` on the bulk-only branch `α < 1`.
pub fn stieltjes_at_zero_closed(alpha: AspectRatio) -> Result<f64> {
    let a = alpha.get();
    if a >= 1.0 {
        return Err(Error::Domain(format!(
            "closed-form S(0) needs alpha < 1, got {a}; use the inverted ratio"
        )));
    }
    Ok(1.0 / (1.0 - a))
}

/// Sorted eigenvalues of a sampled covariance or density matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSpectrum {
    eigenvalues: Vec<f64>,
    n_samples: usize,
    n_features: usize,
}

impl EmpiricalSpectrum {
    /// Sorts `eigenvalues` ascending; requires one eigenvalue per feature.
    pub fn new(mut eigenvalues: Vec<f64>, n_samples: usize, n_features: usize) -> Result<Self> {
        if n_samples == 0 || n_features == 0 {
            return Err(Error::argument("spectrum dimensions must be at least 1"));
        }
        if eigenvalues.len() != n_features {
            return Err(Error::argument(format!(
                "expected {n_features} eigenvalues, got {}",
                eigenvalues.len()
            )));
        }
        if eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::argument("eigenvalues must be finite"));
        }
        eigenvalues.sort_by(f64::total_cmp);
        Ok(Self {
            eigenvalues,
            n_samples,
            n_features,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn alpha(&self) -> AspectRatio {
        AspectRatio::from_dims(self.n_samples, self.n_features).expect("dims validated")
    }

    pub fn count_above(&self, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|&&v| v > tol).count()
    }

    /// Number of exact zeros (eigenvalues clipped to zero).
    pub fn zero_count(&self) -> usize {
        self.eigenvalues.iter().filter(|&&v| v == 0.0).count()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.eigenvalues
    }
}

pub fn sample_wishart_spectrum(
    n_samples: usize,
    n_features: usize,
    rng_seed: u64,
) -> Result<EmpiricalSpectrum> {
    sample_wishart_spectrum_capped(n_samples, n_features, rng_seed, DEFAULT_ELEMENT_CAP)
}

/// Eigenvalues of `(1/N) XᵀX` for an `N × P` standard normal `X`.
///
/// Eigenvalues below `max(N, P) · eps · λ_max` are clipped to exactly zero.
pub fn sample_wishart_spectrum_capped(
    n_samples: usize,
    n_features: usize,
    rng_seed: u64,
    cap: usize,
) -> Result<EmpiricalSpectrum> {
    if n_samples == 0 || n_features == 0 {
        return Err(Error::argument("N and P must be at least 1"));
    }
    check_cap("wishart design", &[n_samples, n_features], cap)?;
    check_cap("wishart covariance", &[n_features, n_features], cap)?;
    let mut rng = rng_from_seed(rng_seed);
    let x = Array2::from_shape_simple_fn((n_samples, n_features), || {
        rng.sample::<f64, _>(StandardNormal)
    });
    let cov = x.t().dot(&x) / n_samples as f64;
    let mut eig = symmetric_eigenvalues(cov)?;
    clip_small(&mut eig, n_samples, n_features);
    EmpiricalSpectrum::new(eig, n_samples, n_features)
}

pub(crate) fn clip_small(eig: &mut [f64], rows: usize, cols: usize) {
    let largest = eig.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = rank_tolerance(rows, cols, largest);
    for v in eig.iter_mut() {
        if *v < tol {
            *v = 0.0;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralDistance {
    /// `Σ |empirical − law| · width` over the bulk histogram.
    pub l1_density: f64,
    /// Kolmogorov distance between empirical and law CDFs, atoms included.
    pub sup_cdf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub center: f64,
    pub empirical_density: f64,
    pub mp_density: f64,
}

/// Bulk histogram on `n_bins` uniform bins over `[0, 1.1 λ+]`.
///
/// Exact zeros are the atom and are not binned. The law's value per bin is its
/// bulk mass in the bin divided by the width.
pub fn histogram(spec: &EmpiricalSpectrum, law: &MPLaw, n_bins: usize) -> Result<Vec<HistogramBin>> {
    if n_bins < 2 {
        return Err(Error::argument(format!("need at least 2 bins, got {n_bins}")));
    }
    let upper = 1.1 * law.lambda_plus();
    let width = upper / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    for &v in spec.eigenvalues() {
        if v > 0.0 && v < upper {
            let k = ((v / width) as usize).min(n_bins - 1);
            counts[k] += 1;
        }
    }
    let total = spec.n_features() as f64;
    let mut prev = law.bulk_cdf(0.0);
    Ok(counts
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let hi = law.bulk_cdf((k + 1) as f64 * width);
            let mass = hi - prev;
            prev = hi;
            HistogramBin {
                center: (k as f64 + 0.5) * width,
                empirical_density: c as f64 / (total * width),
                mp_density: mass / width,
            }
        })
        .collect())
}

/// Kolmogorov distance between the spectrum's empirical CDF and the law's CDF.
pub fn sup_cdf_distance(spec: &EmpiricalSpectrum, law: &MPLaw) -> f64 {
    let e = spec.eigenvalues();
    let p = e.len() as f64;
    let mut worst = 0.0_f64;
    let mut i = 0;
    while i < e.len() {
        let x = e[i];
        let mut j = i;
        while j < e.len() && e[j] == x {
            j += 1;
        }
        let right = (law.cdf(x) - j as f64 / p).abs();
        let left = (law.cdf_left(x) - i as f64 / p).abs();
        worst = worst.max(right).max(left);
        i = j;
    }
    worst.min(1.0)
}

/// Compares a spectrum against `law`; the law's `α` must match the spectrum's `P/N`.
pub fn compare_empirical(spec: &EmpiricalSpectrum, law: &MPLaw, n_bins: usize) -> Result<SpectralDistance> {
    let want = spec.alpha().get();
    let have = law.alpha().get();
    if (want - have).abs() > 1e-9 * want.max(have) {
        return Err(Error::argument(format!(
            "law alpha {have} does not match spectrum P/N = {want}; use compare_empirical_unchecked to override"
        )));
    }
    compare_empirical_unchecked(spec, law, n_bins)
}

/// [`compare_empirical`] without the aspect-ratio consistency check.
pub fn compare_empirical_unchecked(
    spec: &EmpiricalSpectrum,
    law: &MPLaw,
    n_bins: usize,
) -> Result<SpectralDistance> {
    let bins = histogram(spec, law, n_bins)?;
    let width = 1.1 * law.lambda_plus() / n_bins as f64;
    let l1_density = bins
        .iter()
        .map(|b| (b.empirical_density - b.mp_density).abs() * width)
        .sum();
    Ok(SpectralDistance {
        l1_density,
        sup_cdf: sup_cdf_distance(spec, law),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ar(a: f64) -> AspectRatio {
        AspectRatio::new(a).unwrap()
    }

    #[test]
    fn aspect_ratio_rejects_bad_values() {
        for bad in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(AspectRatio::new(bad).is_err());
        }
        assert_eq!(AspectRatio::from_dims(400, 200).unwrap().get(), 0.5);
    }

    #[test]
    fn support_examples() {
        assert_eq!(mp_support(ar(1.0)), (0.0, 4.0));
        assert_eq!(mp_support(ar(0.25)), (0.25, 2.25));
        let (lo, hi) = mp_support(ar(1e-14));
        assert_abs_diff_eq!(lo, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(hi, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn bulk_density_examples() {
        assert_abs_diff_eq!(mp_bulk_density(1.0, ar(1.0)), 3f64.sqrt() / (2.0 * PI), epsilon = 1e-15);
        assert_abs_diff_eq!(mp_bulk_density(1.0, ar(1.0)), 0.275664, epsilon = 1e-6);
        assert_eq!(mp_bulk_density(5.0, ar(1.0)), 0.0);
        for a in [0.1, 0.5, 0.9] {
            let law = MPLaw::new(ar(a));
            assert_eq!(law.bulk_density(law.lambda_minus()), 0.0);
            assert_eq!(law.bulk_density(law.lambda_plus()), 0.0);
        }
        assert_eq!(mp_bulk_density(0.0, ar(1.0)), 0.0);
    }

    #[test]
    fn zero_mass_examples() {
        assert_eq!(mp_zero_mass(ar(2.0)), 0.5);
        assert_eq!(mp_zero_mass(ar(0.5)), 0.0);
        assert_eq!(mp_zero_mass(ar(1.0)), 0.0);
    }

    #[test]
    fn normalization_and_first_moment() {
        for a in [0.1, 0.5, 1.0, 2.0, 10.0] {
            let law = MPLaw::new(ar(a));
            let mass = law.integrate_bulk(|_| 1.0, 1e-12).unwrap();
            assert_abs_diff_eq!(mass + law.zero_mass(), 1.0, epsilon = 1e-6);
            let mean = law.integrate_bulk(|l| l, 1e-12).unwrap();
            assert_abs_diff_eq!(mean, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn stieltjes_examples() {
        assert_abs_diff_eq!(stieltjes_numeric(0.0, ar(0.5), 1e-10).unwrap(), 2.0, epsilon = 1e-8);
        assert_abs_diff_eq!(stieltjes_numeric(0.0, ar(0.9), 1e-10).unwrap(), 10.0, epsilon = 1e-8);
        let near_point_mass = stieltjes_numeric(-1.0, ar(1e-8), 1e-12).unwrap();
        assert_abs_diff_eq!(near_point_mass, 0.5, epsilon = 1e-4);
    }

    #[test]
    fn stieltjes_matches_closed_form() {
        for a in [0.1, 0.25, 0.5, 0.75, 0.9] {
            let numeric = stieltjes_numeric(0.0, ar(a), 1e-10).unwrap();
            let closed = stieltjes_at_zero_closed(ar(a)).unwrap();
            assert_abs_diff_eq!(numeric, closed, epsilon = 1e-4);
        }
    }

    #[test]
    fn stieltjes_with_atom_off_support() {
        // For α > 1 and z < 0 the atom contributes (1 − 1/α)/(−z); the closed form
        // of the MP Stieltjes transform gives the total value.
        let a = 2.0;
        let z = -0.5;
        let numeric = stieltjes_numeric(z, ar(a), 1e-12).unwrap();
        let closed = {
            // S(z) = (1 − α − z − sqrt((1 − α − z)² − 4αz)) / (2αz), branch with S → −1/z.
            let b = 1.0 - a - z;
            (b - (b * b - 4.0 * a * z).sqrt()) / (2.0 * a * z)
        };
        assert_abs_diff_eq!(numeric, closed, epsilon = 1e-9);
    }

    #[test]
    fn stieltjes_domain_errors() {
        assert!(matches!(stieltjes_numeric(1.0, ar(0.5), 1e-8), Err(Error::Domain(_))));
        assert!(matches!(stieltjes_numeric(0.0, ar(2.0), 1e-8), Err(Error::Domain(_))));
        assert!(matches!(stieltjes_numeric(0.0, ar(1.0), 1e-8), Err(Error::Domain(_))));
        assert!(stieltjes_numeric(f64::NAN, ar(0.5), 1e-8).is_err());
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(stieltjes_at_zero_closed(ar(0.5)).unwrap(), 2.0);
        assert_abs_diff_eq!(stieltjes_at_zero_closed(ar(1e-300)).unwrap(), 1.0);
        assert_abs_diff_eq!(stieltjes_at_zero_closed(ar(0.99)).unwrap(), 100.0, epsilon = 1e-10);
        assert!(stieltjes_at_zero_closed(ar(1.0)).is_err());
        assert!(stieltjes_at_zero_closed(ar(3.0)).is_err());
    }

    #[test]
    fn one_by_one_wishart_is_squared_entry() {
        let spec = sample_wishart_spectrum(1, 1, 99).unwrap();
        let x: f64 = rng_from_seed(99).sample(StandardNormal);
        assert_eq!(spec.eigenvalues(), &[x * x]);
    }

    #[test]
    fn wide_wishart_has_exact_zero_modes() {
        let spec = sample_wishart_spectrum(100, 200, 5).unwrap();
        assert_eq!(spec.eigenvalues().len(), 200);
        assert_eq!(spec.zero_count(), 100);
        assert_eq!(spec.count_above(0.0), 100);
        assert!(spec.eigenvalues().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn wishart_cap_is_enforced() {
        let err = sample_wishart_spectrum_capped(1000, 1000, 0, 10_000).unwrap_err();
        assert!(matches!(err, Error::Resource { .. }));
    }

    #[test]
    fn quantile_spectrum_is_within_one_over_p() {
        for (n, p) in [(400, 200), (200, 400), (300, 300)] {
            let law = MPLaw::new(AspectRatio::from_dims(n, p).unwrap());
            let eig = (0..p).map(|k| law.quantile((k as f64 + 0.5) / p as f64)).collect();
            let spec = EmpiricalSpectrum::new(eig, n, p).unwrap();
            let d = compare_empirical(&spec, &law, 20).unwrap();
            assert!(d.sup_cdf <= 1.0 / p as f64, "sup_cdf {} for ({n},{p})", d.sup_cdf);
        }
    }

    #[test]
    fn cdf_is_monotone_and_complete() {
        let law = MPLaw::new(ar(3.0));
        assert_eq!(law.cdf(-1e-12), 0.0);
        assert_abs_diff_eq!(law.cdf(0.0), 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(law.cdf(law.lambda_plus()), 1.0, epsilon = 1e-15);
        let mut prev = 0.0;
        for k in 0..=100 {
            let v = law.cdf(k as f64 * 0.1);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn compare_rejects_few_bins_and_mismatched_law() {
        let spec = sample_wishart_spectrum(40, 20, 1).unwrap();
        let law = MPLaw::new(ar(0.5));
        assert!(compare_empirical(&spec, &law, 1).is_err());
        assert!(compare_empirical(&spec, &MPLaw::new(ar(2.0)), 10).is_err());
        assert!(compare_empirical_unchecked(&spec, &MPLaw::new(ar(2.0)), 10).is_ok());
    }

    #[test]
    fn spectra_serialize_as_flat_floats() {
        let spec = EmpiricalSpectrum::new(vec![0.5, 0.25], 4, 2).unwrap();
        let json = serde_json::to_value(&spec).unwrap();
        assert_eq!(json["eigenvalues"], serde_json::json!([0.25, 0.5]));
    }
}
