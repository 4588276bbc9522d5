//! Run configuration: defaults, key=value config files, flag overrides and
//! the environment override for the sampling seed.

use std::path::{Path, PathBuf};

use vqivp::{Problem, ProblemKind};

/// Environment variable that overrides any configured `rng_seed`.
pub const SEED_ENV_VAR: &str = "VQIVP_RNG_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equation {
    Advection,
    Wave,
    Burgers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Classical,
    Svf,
    Sef,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct Settings {
    pub equation: Equation,
    pub method: Method,
    pub n_qubits: u32,
    /// Mode cutoff M; defaults to the per-equation policy when absent.
    pub modes: Option<usize>,
    pub cfl: f64,
    pub t_final: f64,
    pub v: f64,
    pub nu: f64,
    pub x0: f64,
    pub sigma: f64,
    pub shots: u64,
    pub rng_seed: u64,
    pub outdir: PathBuf,
    pub stride: usize,
    pub n_list: Vec<u32>,
    pub m_list: Vec<u32>,
    pub cfl_list: Vec<f64>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            equation: Equation::Advection,
            method: Method::Classical,
            n_qubits: 5,
            modes: None,
            cfl: 0.5,
            t_final: 1.0,
            v: 1.0,
            nu: 0.0125,
            x0: 0.5,
            sigma: 0.15,
            shots: 100_000_000,
            rng_seed: 42,
            outdir: PathBuf::from("."),
            stride: 1,
            n_list: vec![3, 4, 5, 6],
            m_list: vec![2, 3, 4, 5],
            cfl_list: vec![0.25, 0.5, 1.0],
        }
    }
}

impl Settings {
    pub fn problem(&self) -> Result<Problem, String> {
        let kind = match self.equation {
            Equation::Advection => ProblemKind::Advection { v: self.v },
            Equation::Wave => ProblemKind::Wave,
            Equation::Burgers => ProblemKind::Burgers { nu: self.nu },
        };
        Problem {
            kind,
            x0: 0.5,
            sigma: 0.15,
        }
        .with_initial(self.x0, self.sigma)
        .map_err(|e| e.to_string())
    }

    /// Mode cutoff for a given resolution, honoring an explicit override.
    pub fn modes_for(&self, problem: &Problem, n_qubits: u32) -> usize {
        self.modes
            .unwrap_or_else(|| problem.default_modes(n_qubits))
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let parse_f64 =
            |v: &str| -> Result<f64, String> { v.parse().map_err(|_| format!("bad number {v:?}")) };
        match key {
            "equation" => self.equation = parse_equation(value)?,
            "method" => self.method = parse_method(value)?,
            "n_qubits" => {
                self.n_qubits = value
                    .parse()
                    .map_err(|_| format!("bad integer {value:?}"))?
            }
            "modes" => {
                self.modes = Some(
                    value
                        .parse()
                        .map_err(|_| format!("bad integer {value:?}"))?,
                )
            }
            "cfl" => self.cfl = parse_f64(value)?,
            "t_final" => self.t_final = parse_f64(value)?,
            "v" => self.v = parse_f64(value)?,
            "nu" => self.nu = parse_f64(value)?,
            "x0" => self.x0 = parse_f64(value)?,
            "sigma" => self.sigma = parse_f64(value)?,
            "shots" => {
                self.shots = value
                    .parse()
                    .map_err(|_| format!("bad integer {value:?}"))?
            }
            "rng_seed" => {
                self.rng_seed = value
                    .parse()
                    .map_err(|_| format!("bad integer {value:?}"))?
            }
            "outdir" => self.outdir = PathBuf::from(value),
            "stride" => {
                self.stride = value
                    .parse()
                    .map_err(|_| format!("bad integer {value:?}"))?
            }
            "n_list" => {
                self.n_list = parse_list(value, |v| {
                    v.parse().map_err(|_| format!("bad integer {v:?}"))
                })?
            }
            "m_list" => {
                self.m_list = parse_list(value, |v| {
                    v.parse().map_err(|_| format!("bad integer {v:?}"))
                })?
            }
            "cfl_list" => self.cfl_list = parse_list(value, |v| parse_f64(v))?,
            other => return Err(format!("unknown configuration key {other:?}")),
        }
        Ok(())
    }

    /// Reads a plain-text config file of `key = value` lines; `#` starts a
    /// comment, blank lines are ignored.
    pub fn load_file(&mut self, path: &Path) -> Result<(), String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                format!("{}:{}: expected key = value", path.display(), lineno + 1)
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| format!("{}:{}: {e}", path.display(), lineno + 1))?;
        }
        Ok(())
    }

    /// Applies the seed override from the environment, if set.
    pub fn apply_env(&mut self) -> Result<(), String> {
        if let Ok(value) = std::env::var(SEED_ENV_VAR) {
            self.rng_seed = value.parse().map_err(|_| {
                format!("{SEED_ENV_VAR} must be an unsigned integer, got {value:?}")
            })?;
        }
        Ok(())
    }

    /// Cross-field validation mirroring the library preconditions, so bad
    /// configurations are rejected before any computation starts.
    pub fn validate(&self) -> Result<(), String> {
        vqivp::build_domain(self.n_qubits, 0.0, 1.0, self.cfl, self.t_final)
            .map_err(|e| e.to_string())?;
        let problem = self.problem()?;
        let modes = self.modes_for(&problem, self.n_qubits);
        let points = 1usize << self.n_qubits;
        if 2 * modes + 1 > points {
            return Err(format!(
                "mode overflow: 2M+1 = {} exceeds N = {points}",
                2 * modes + 1
            ));
        }
        if self.shots < 1 {
            return Err("shots must be at least 1".into());
        }
        if self.stride < 1 {
            return Err("stride must be at least 1".into());
        }
        Ok(())
    }
}

pub fn parse_equation(value: &str) -> Result<Equation, String> {
    match value {
        "advection" => Ok(Equation::Advection),
        "wave" => Ok(Equation::Wave),
        "burgers" => Ok(Equation::Burgers),
        other => Err(format!(
            "unknown equation {other:?} (expected advection, wave or burgers)"
        )),
    }
}

pub fn parse_method(value: &str) -> Result<Method, String> {
    match value {
        "classical" => Ok(Method::Classical),
        "svf" => Ok(Method::Svf),
        "sef" => Ok(Method::Sef),
        other => Err(format!(
            "unknown method {other:?} (expected classical, svf or sef)"
        )),
    }
}

fn parse_list<T>(value: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(parse)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        Settings::default().validate().unwrap();
    }

    #[test]
    fn unknown_key_is_rejected() {
        let mut s = Settings::default();
        assert!(s.set("qubits", "4").is_err());
    }

    #[test]
    fn list_parsing() {
        let mut s = Settings::default();
        s.set("n_list", "3, 4,5").unwrap();
        assert_eq!(s.n_list, vec![3, 4, 5]);
        s.set("cfl_list", "0.25,1.0").unwrap();
        assert_eq!(s.cfl_list, vec![0.25, 1.0]);
    }

    #[test]
    fn mode_overflow_detected() {
        let mut s = Settings::default();
        s.set("n_qubits", "3").unwrap();
        s.set("modes", "4").unwrap();
        assert!(s.validate().unwrap_err().contains("mode overflow"));
    }
}
