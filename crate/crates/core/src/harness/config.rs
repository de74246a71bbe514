//! Flat `key=value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Mp,
    Page,
    Descent,
    Quantum,
    Figure1,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::Mp,
        Command::Page,
        Command::Descent,
        Command::Quantum,
        Command::Figure1,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Mp => "mp",
            Command::Page => "page",
            Command::Descent => "descent",
            Command::Quantum => "quantum",
            Command::Figure1 => "figure1",
        }
    }

    /// Keys the command accepts, with their defaults.
    pub fn defaults(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Command::Mp => &[("n", "1000"), ("p", "500"), ("trials", "1"), ("bins", "40")],
            Command::Page => &[
                ("s_bh", "3.4657359027997265"),
                ("alpha_min", "0.25"),
                ("alpha_max", "4"),
                ("steps", "9"),
                ("methods", "analytic,integral,monte_carlo"),
                ("trials", "200"),
            ],
            Command::Descent => &[
                ("n", "200"),
                ("sigma", "1"),
                ("alphas", "0.25,0.5,0.8,0.95,1.05,1.25,2,4"),
                ("trials", "50"),
            ],
            Command::Quantum => &[
                ("interior_log_dim", "1.3862943611198906"),
                ("n", "100"),
                ("sigma", "1"),
                ("alphas", "0.25,0.5,0.8,1.25,2,4"),
                ("mode", "centered"),
                ("trials", "20"),
            ],
            Command::Figure1 => &[
                ("s_bh", "3.4657359027997265"),
                ("alphas", "0.1,0.25,0.5,0.75,0.9,1,1.1,1.5,2,4,10"),
                ("sigma", "1"),
                ("trials", "0"),
                ("n", "200"),
            ],
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| {
                HarnessError::Usage(format!(
                    "unknown command {s:?}; expected one of mp, page, descent, quantum, figure1"
                ))
            })
    }
}

/// A fully specified run: command, parameters, master seed and output path.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub parameters: BTreeMap<String, String>,
    pub master_seed: u64,
    pub output_path: PathBuf,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            parameters: BTreeMap::new(),
            master_seed: 0,
            output_path: PathBuf::from(format!("{command}.csv")),
        }
    }

    /// Applies one `key=value` pair; `seed` and `out` set the seed and output path.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        let key = key.trim();
        let value = value.trim();
        match key {
            "seed" => {
                self.master_seed = value
                    .parse()
                    .map_err(|_| HarnessError::Usage(format!("seed must be a u64, got {value:?}")))?;
            }
            "out" => self.output_path = PathBuf::from(value),
            _ => {
                if !self.command.defaults().iter().any(|(k, _)| *k == key) {
                    return Err(HarnessError::Usage(format!(
                        "unknown key {key:?} for command {}",
                        self.command
                    )));
                }
                self.parameters.insert(key.to_string(), value.to_string());
            }
        }
        Ok(())
    }

    pub fn set_assignment(&mut self, assignment: &str) -> Result<(), HarnessError> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| HarnessError::Usage(format!("expected key=value, got {assignment:?}")))?;
        self.set(k, v)
    }

    /// Applies a config file: one `key=value` per line, `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), HarnessError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.set_assignment(line)
                .map_err(|e| HarnessError::Usage(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    /// Parameters with defaults filled in.
    pub fn resolved(&self) -> BTreeMap<String, String> {
        let mut out: BTreeMap<String, String> = self
            .command
            .defaults()
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        out.extend(self.parameters.clone());
        out
    }

    /// Config-file text that reproduces this run.
    pub fn echo(&self) -> String {
        let mut s = format!("# bhdd {}\nseed={}\n", self.command, self.master_seed);
        for (k, v) in self.resolved() {
            s.push_str(&format!("{k}={v}\n"));
        }
        s
    }
}

/// Typed read access to resolved parameters.
pub(crate) struct Params {
    map: BTreeMap<String, String>,
}

impl Params {
    pub(crate) fn new(map: BTreeMap<String, String>) -> Self {
        Self { map }
    }

    fn raw(&self, key: &str) -> Result<&str, HarnessError> {
        self.map
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| HarnessError::Usage(format!("missing required key {key:?}")))
    }

    fn parse<T: FromStr>(&self, key: &str, what: &str) -> Result<T, HarnessError> {
        let raw = self.raw(key)?;
        raw.parse()
            .map_err(|_| HarnessError::Usage(format!("{key} must be {what}, got {raw:?}")))
    }

    pub(crate) fn count(&self, key: &str, min: usize) -> Result<usize, HarnessError> {
        let v: usize = self.parse(key, "a non-negative integer")?;
        if v < min {
            return Err(HarnessError::Usage(format!("{key} must be at least {min}, got {v}")));
        }
        Ok(v)
    }

    pub(crate) fn real(&self, key: &str) -> Result<f64, HarnessError> {
        let v: f64 = self.parse(key, "a number")?;
        if !v.is_finite() {
            return Err(HarnessError::Usage(format!("{key} must be finite")));
        }
        Ok(v)
    }

    pub(crate) fn positive(&self, key: &str) -> Result<f64, HarnessError> {
        let v = self.real(key)?;
        if v <= 0.0 {
            return Err(HarnessError::Usage(format!("{key} must be positive, got {v}")));
        }
        Ok(v)
    }

    pub(crate) fn non_negative(&self, key: &str) -> Result<f64, HarnessError> {
        let v = self.real(key)?;
        if v < 0.0 {
            return Err(HarnessError::Usage(format!("{key} must be non-negative, got {v}")));
        }
        Ok(v)
    }

    pub(crate) fn list(&self, key: &str) -> Result<Vec<String>, HarnessError> {
        let items: Vec<String> = self
            .raw(key)?
            .split([',', ';'])
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect();
        Ok(items)
    }

    /// Strictly ascending list of positive reals.
    pub(crate) fn alpha_grid(&self, key: &str) -> Result<Vec<f64>, HarnessError> {
        let grid = self
            .list(key)?
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite() && *v > 0.0)
                    .ok_or_else(|| HarnessError::Usage(format!("{key}: {s:?} is not a positive number")))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if grid.is_empty() {
            return Err(HarnessError::Usage(format!("{key} is empty")));
        }
        if grid.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
            return Err(HarnessError::Usage(format!("{key} must be strictly ascending")));
        }
        Ok(grid)
    }

    pub(crate) fn parsed<T: FromStr>(&self, key: &str) -> Result<T, HarnessError>
    where
        T::Err: fmt::Display,
    {
        let raw = self.raw(key)?;
        raw.parse()
            .map_err(|e: T::Err| HarnessError::Usage(format!("{key}: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_commands() {
        for c in Command::ALL {
            assert_eq!(c.as_str().parse::<Command>().unwrap(), c);
        }
        assert!(matches!("train".parse::<Command>(), Err(HarnessError::Usage(_))));
    }

    #[test]
    fn file_then_overrides() {
        let mut cfg = ExperimentConfig::new(Command::Descent);
        cfg.apply_text("# comment\nn=50\nsigma = 0.5 # trailing\nseed=9\n\n").unwrap();
        cfg.set_assignment("n=80").unwrap();
        assert_eq!(cfg.master_seed, 9);
        let r = cfg.resolved();
        assert_eq!(r["n"], "80");
        assert_eq!(r["sigma"], "0.5");
        assert_eq!(r["trials"], "50");
    }

    #[test]
    fn rejects_unknown_keys_and_malformed_lines() {
        let mut cfg = ExperimentConfig::new(Command::Mp);
        assert!(cfg.set_assignment("sigma=1").is_err());
        assert!(cfg.apply_text("n 5").is_err());
        assert!(cfg.set("seed", "-1").is_err());
    }

    #[test]
    fn echo_round_trips() {
        let mut cfg = ExperimentConfig::new(Command::Quantum);
        cfg.master_seed = 77;
        cfg.set("mode", "gaussian_norms").unwrap();
        let mut again = ExperimentConfig::new(Command::Quantum);
        again.apply_text(&cfg.echo()).unwrap();
        assert_eq!(again.resolved(), cfg.resolved());
        assert_eq!(again.master_seed, 77);
    }

    #[test]
    fn typed_params_validate_ranges() {
        let mut m = BTreeMap::new();
        m.insert("n".to_string(), "0".to_string());
        m.insert("alphas".to_string(), "0.5,0.25".to_string());
        m.insert("sigma".to_string(), "-1".to_string());
        let p = Params::new(m);
        assert!(p.count("n", 1).is_err());
        assert!(p.alpha_grid("alphas").is_err());
        assert!(p.non_negative("sigma").is_err());
        assert!(p.real("missing").is_err());
    }
}
