//! Experiment runner behind the `bhdd` command-line tool.
//!
//! Every command writes one CSV data file and a `<out>.meta.json` sidecar, both
//! through a temporary file that is renamed into place on success.

mod config;
mod output;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

pub use crate::seed::derive_trial_seed;
pub use config::{Command, ExperimentConfig};
pub use output::{format_float, metadata_path};

use crate::pagecurve::{page_entropy_analytic, sample_random_bipartite_entropy, sweep_page_curve, finite_dims, PageMethod};
use crate::qregression::{quantum_double_descent_sweep, GenerationMode};
use crate::regression::{variance_monte_carlo, variance_theory};
use crate::spectra::{compare_empirical, histogram, sample_wishart_spectrum, AspectRatio, MPLaw};
use crate::stats::mean_and_std_error;
use config::Params;
use output::Table;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{operation} failed: {source}")]
    Numeric {
        operation: &'static str,
        #[source]
        source: crate::Error,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => 2,
            HarnessError::Numeric { .. } | HarnessError::Io { .. } => 1,
        }
    }
}

trait Context<T> {
    fn during(self, operation: &'static str) -> Result<T, HarnessError>;
}

impl<T> Context<T> for crate::Result<T> {
    fn during(self, operation: &'static str) -> Result<T, HarnessError> {
        self.map_err(|source| HarnessError::Numeric { operation, source })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub command: Command,
    pub master_seed: u64,
    pub version: String,
    /// UTC, RFC-3339.
    pub timestamp: String,
    pub config: BTreeMap<String, String>,
    /// Skipped rank-deficient trials, keyed by grid point.
    pub skipped: BTreeMap<String, usize>,
    pub summary: serde_json::Value,
    pub data_file: String,
}

/// Files produced by a successful run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub data_path: PathBuf,
    pub metadata_path: PathBuf,
    pub metadata: RunMetadata,
}

struct Computed {
    table: Table,
    skipped: BTreeMap<String, usize>,
    summary: serde_json::Value,
}

/// Validates the configuration, runs the experiment and writes both output files.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome, HarnessError> {
    let resolved = config.resolved();
    let params = Params::new(resolved.clone());
    let seed = config.master_seed;
    let computed = match config.command {
        Command::Mp => run_mp(&params, seed)?,
        Command::Page => run_page(&params, seed)?,
        Command::Descent => run_descent(&params, seed)?,
        Command::Quantum => run_quantum(&params, seed)?,
        Command::Figure1 => run_figure1(&params, seed)?,
    };

    let data_path = config.output_path.clone();
    let meta_path = metadata_path(&data_path);
    let metadata = RunMetadata {
        command: config.command,
        master_seed: seed,
        version: VERSION.to_string(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        config: resolved,
        skipped: computed.skipped,
        summary: computed.summary,
        data_file: data_path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
    };
    output::write_atomic(&data_path, computed.table.render().as_bytes())?;
    let mut json = serde_json::to_string_pretty(&metadata).expect("metadata serializes");
    json.push('\n');
    output::write_atomic(&meta_path, json.as_bytes())?;
    Ok(RunOutcome {
        data_path,
        metadata_path: meta_path,
        metadata,
    })
}

/// Builds a configuration from command-line pieces: config file first, then
/// `key=value` overrides, then the explicit `--seed` and `--out` flags.
pub fn config_from_args(
    command: &str,
    config_file: Option<&Path>,
    seed: Option<u64>,
    out: Option<&Path>,
    overrides: &[String],
) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = ExperimentConfig::new(command.parse()?);
    if let Some(path) = config_file {
        cfg.apply_file(path)?;
    }
    for o in overrides {
        cfg.set_assignment(o)?;
    }
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    if let Some(p) = out {
        cfg.output_path = p.to_path_buf();
    }
    Ok(cfg)
}

fn label(alpha: f64) -> String {
    format!("alpha={}", format_float(alpha))
}

fn run_mp(params: &Params, seed: u64) -> Result<Computed, HarnessError> {
    let n = params.count("n", 1)?;
    let p = params.count("p", 1)?;
    let trials = params.count("trials", 1)?;
    let bins = params.count("bins", 2)?;
    let alpha = AspectRatio::from_dims(n, p).during("aspect ratio")?;
    let law = MPLaw::new(alpha);

    let per_trial = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let spec = sample_wishart_spectrum(n, p, derive_trial_seed(seed, "mp", t)).during("sample_wishart_spectrum")?;
            let hist = histogram(&spec, &law, bins).during("histogram")?;
            let dist = compare_empirical(&spec, &law, bins).during("compare_empirical")?;
            Ok((hist, dist))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;

    let mut table = Table::new(&["lambda_bin_center", "empirical_density", "mp_density"]);
    for b in 0..bins {
        let center = per_trial[0].0[b].center;
        let emp = per_trial.iter().map(|(h, _)| h[b].empirical_density).sum::<f64>() / trials as f64;
        table.row(vec![format_float(center), format_float(emp), format_float(per_trial[0].0[b].mp_density)]);
    }
    let sup: Vec<f64> = per_trial.iter().map(|(_, d)| d.sup_cdf).collect();
    let l1: Vec<f64> = per_trial.iter().map(|(_, d)| d.l1_density).collect();
    let (sup_mean, sup_se) = mean_and_std_error(&sup);
    let (l1_mean, l1_se) = mean_and_std_error(&l1);
    Ok(Computed {
        table,
        skipped: BTreeMap::new(),
        summary: json!({
            "alpha": alpha.get(),
            "sup_cdf": sup_mean,
            "sup_cdf_std_error": finite_or_null(sup_se),
            "l1": l1_mean,
            "l1_std_error": finite_or_null(l1_se),
            "zero_mass": law.zero_mass(),
        }),
    })
}

fn finite_or_null(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        serde_json::Value::Null
    }
}

/// `steps` points spaced evenly in `ln α` from `alpha_min` to `alpha_max`.
pub fn log_spaced_grid(alpha_min: f64, alpha_max: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![alpha_min];
    }
    let (lo, hi) = (alpha_min.ln(), alpha_max.ln());
    (0..steps)
        .map(|k| match k {
            0 => alpha_min,
            k if k == steps - 1 => alpha_max,
            k => (lo + (hi - lo) * k as f64 / (steps - 1) as f64).exp(),
        })
        .collect()
}

fn run_page(params: &Params, seed: u64) -> Result<Computed, HarnessError> {
    let s_bh = params.positive("s_bh")?;
    let alpha_min = params.positive("alpha_min")?;
    let alpha_max = params.positive("alpha_max")?;
    let steps = params.count("steps", 1)?;
    let trials = params.count("trials", 0)?;
    let methods = params
        .list("methods")?
        .iter()
        .map(|m| m.parse::<PageMethod>().map_err(|e| HarnessError::Usage(format!("methods: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if methods.is_empty() {
        return Err(HarnessError::Usage("methods is empty".into()));
    }
    if alpha_max < alpha_min || (steps > 1 && alpha_max == alpha_min) {
        return Err(HarnessError::Usage("need alpha_min < alpha_max".into()));
    }
    if methods.contains(&PageMethod::MonteCarlo) && trials < 1 {
        return Err(HarnessError::Usage("monte_carlo needs trials >= 1".into()));
    }
    let grid = log_spaced_grid(alpha_min, alpha_max, steps);
    let curve = sweep_page_curve(s_bh, &grid, &methods, trials, seed).during("sweep_page_curve")?;

    let mut table = Table::new(&["alpha", "method", "s_r", "std_error"]);
    let mut dims = Vec::new();
    for p in &curve.points {
        table.row(vec![
            format_float(p.alpha),
            p.method.as_str().to_string(),
            format_float(p.s_r),
            p.std_error.map(format_float).unwrap_or_default(),
        ]);
        if let Some(d) = p.dims {
            dims.push(json!({"alpha": p.alpha, "dim_radiation": d.radiation, "dim_interior": d.interior}));
        }
    }
    Ok(Computed {
        table,
        skipped: BTreeMap::new(),
        summary: json!({ "units": "nats", "monte_carlo_dims": dims }),
    })
}

fn run_descent(params: &Params, seed: u64) -> Result<Computed, HarnessError> {
    let n = params.count("n", 1)?;
    let sigma = params.non_negative("sigma")?;
    let grid = params.alpha_grid("alphas")?;
    let trials = params.count("trials", 2)?;

    let estimates = grid
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            let p = (a * n as f64).round().max(1.0) as usize;
            variance_monte_carlo(n, p, sigma, trials, derive_trial_seed(seed, "descent", k as u64))
                .during("variance_monte_carlo")
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = Table::new(&["alpha", "mean_sq_error", "std_error", "theory", "skipped"]);
    let mut skipped = BTreeMap::new();
    let mut detail = Vec::new();
    for est in &estimates {
        let alpha = est.alpha.get();
        table.row(vec![
            format_float(alpha),
            format_float(est.mean_sq_error),
            format_float(est.std_error),
            format_float(variance_theory(est.alpha, sigma)),
            est.skipped.to_string(),
        ]);
        skipped.insert(label(alpha), est.skipped);
        detail.push(json!({
            "alpha": alpha,
            "n_features": est.n_features,
            "variance_component": finite_or_null(est.variance_component),
            "bias_component": finite_or_null(est.bias_component),
        }));
    }
    Ok(Computed {
        table,
        skipped,
        summary: json!({ "n_samples": n, "rows": detail }),
    })
}

fn run_quantum(params: &Params, seed: u64) -> Result<Computed, HarnessError> {
    let log_d = params.non_negative("interior_log_dim")?;
    let interior_dim = log_d.exp().round().max(1.0) as usize;
    let n = params.count("n", 1)?;
    let sigma = params.non_negative("sigma")?;
    let grid = params.alpha_grid("alphas")?;
    let mode: GenerationMode = params.parsed("mode")?;
    let trials = params.count("trials", 2)?;

    let rows = quantum_double_descent_sweep(interior_dim, n, &grid, sigma, trials, mode, seed)
        .during("quantum_double_descent_sweep")?;

    let mut table = Table::new(&["alpha", "mean_sq_error", "std_error", "theory", "recovery_rate"]);
    let mut skipped = BTreeMap::new();
    let mut detail = Vec::new();
    for r in &rows {
        table.row(vec![
            format_float(r.alpha),
            format_float(r.mean_sq_error),
            format_float(r.std_error),
            format_float(r.theory),
            format_float(r.recovery_rate),
        ]);
        skipped.insert(label(r.alpha), r.skipped);
        detail.push(json!({
            "alpha": r.alpha,
            "n_features": r.n_features,
            "variance_component": finite_or_null(r.variance_component),
            "bias_component": finite_or_null(r.bias_component),
        }));
    }
    Ok(Computed {
        table,
        skipped,
        summary: json!({
            "mode": mode.as_str(),
            "interior_dim": interior_dim,
            "n_labels": n,
            "rows": detail,
        }),
    })
}

/// Page curve and variance theory on one α grid, with optional Monte Carlo columns.
fn run_figure1(params: &Params, seed: u64) -> Result<Computed, HarnessError> {
    let s_bh = params.positive("s_bh")?;
    let grid = params.alpha_grid("alphas")?;
    let sigma = params.non_negative("sigma")?;
    let trials = params.count("trials", 0)?;
    let n = params.count("n", 1)?;
    if trials == 1 {
        return Err(HarnessError::Usage("trials must be 0 or at least 2".into()));
    }

    let mut headers = vec!["alpha", "page_curve_minus_S", "variance_theory"];
    if trials > 0 {
        headers.extend(["page_mc_minus_S", "page_mc_std_error", "variance_mc", "variance_mc_std_error"]);
    }
    let mut table = Table::new(&headers);
    let mut skipped = BTreeMap::new();
    let mut dims = Vec::new();
    for (k, &a) in grid.iter().enumerate() {
        let alpha = AspectRatio::new(a).during("aspect ratio")?;
        let mut row = vec![
            format_float(a),
            format_float(page_entropy_analytic(s_bh, alpha) - s_bh),
            format_float(variance_theory(alpha, sigma)),
        ];
        if trials > 0 {
            let d = finite_dims(s_bh, alpha);
            let page = sample_random_bipartite_entropy(
                d.radiation,
                d.interior,
                trials,
                derive_trial_seed(seed, "figure1_page", k as u64),
            )
            .during("sample_random_bipartite_entropy")?;
            let p = (a * n as f64).round().max(1.0) as usize;
            let var = variance_monte_carlo(n, p, sigma, trials, derive_trial_seed(seed, "figure1_variance", k as u64))
                .during("variance_monte_carlo")?;
            row.extend([
                format_float(page.mean - (d.interior as f64).ln()),
                format_float(page.std_error),
                format_float(var.variance_component),
                format_float(var.variance_std_error),
            ]);
            skipped.insert(label(a), var.skipped);
            dims.push(json!({"alpha": a, "dim_radiation": d.radiation, "dim_interior": d.interior, "n_features": p}));
        }
        table.row(row);
    }
    Ok(Computed {
        table,
        skipped,
        summary: json!({ "units": "nats", "monte_carlo": dims }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_are_exact() {
        let g = log_spaced_grid(0.25, 4.0, 5);
        assert_eq!(g.len(), 5);
        assert_eq!(g[0], 0.25);
        assert_eq!(g[4], 4.0);
        assert!((g[2] - 1.0).abs() < 1e-15);
        assert_eq!(log_spaced_grid(0.5, 0.5, 1), vec![0.5]);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(HarnessError::Usage("x".into()).exit_code(), 2);
        let e: crate::Result<()> = Err(crate::Error::argument("bad"));
        let h = e.during("histogram").unwrap_err();
        assert_eq!(h.exit_code(), 1);
        assert!(h.to_string().contains("histogram"));
    }
}
