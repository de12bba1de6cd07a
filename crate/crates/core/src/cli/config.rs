use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::twist::{parse_params, MapParams};

/// Everything a command needs, merged from defaults, an optional key-value
/// file and command-line flags (in that order of precedence, flags last).
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub map: String,
    pub params: MapParams,
    pub grid: usize,
    pub tol: f64,
    pub c: f64,
    pub range: (f64, f64),
    /// Sample count for sweeps, step count for orbits; `None` picks the
    /// command's default.
    pub steps: Option<usize>,
    pub qmax: u64,
    pub theta: f64,
    pub rho: f64,
    /// Divides rotation numbers by this flow time in `alpha` output.
    pub per_time: Option<f64>,
    pub seed: u64,
    pub out: PathBuf,
    pub svg: Option<PathBuf>,
    pub csv: bool,
    /// Random pairs and points drawn by `verify`.
    pub pairs: usize,
    pub points: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            map: "pendulum".into(),
            params: MapParams::new(),
            grid: 512,
            tol: 1e-9,
            c: 0.0,
            range: (-2.0, 2.0),
            steps: None,
            qmax: 8,
            theta: 0.3,
            rho: 0.0,
            per_time: None,
            seed: 0,
            out: PathBuf::from("."),
            svg: None,
            csv: false,
            pairs: 100,
            points: 40,
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Key-value configuration file (`key = value` per line, `#` comments).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// integrable, pendulum, standard or conjugated.
    #[arg(long)]
    pub map: Option<String>,
    /// Map parameter, e.g. `--param t0=0.1` (repeatable).
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Interval `LO:HI`.
    #[arg(long, allow_hyphen_values = true)]
    pub range: Option<String>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub qmax: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    /// Also report `ρ / T0`, the rotation per unit time of a time-`T0` map.
    #[arg(long, value_name = "T0")]
    pub per_time: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for auxiliary output files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Also write CSV files next to the JSON output.
    #[arg(long)]
    pub csv: bool,
}

fn bad(key: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e: T::Err| bad(key, e.to_string()))
}

pub fn parse_range(value: &str) -> Result<(f64, f64)> {
    let (lo, hi) = value
        .split_once(':')
        .ok_or_else(|| bad("range", "expected LO:HI"))?;
    let (lo, hi) = (parse::<f64>("range", lo)?, parse::<f64>("range", hi)?);
    if !(lo < hi) {
        return Err(bad("range", "LO must be below HI"));
    }
    Ok((lo, hi))
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "map" => self.map = value.to_string(),
            "params" => self.params.extend(parse_params(value)?),
            "grid" => self.grid = parse(key, value)?,
            "tol" => self.tol = parse(key, value)?,
            "c" => self.c = parse(key, value)?,
            "range" => self.range = parse_range(value)?,
            "steps" => self.steps = Some(parse(key, value)?),
            "qmax" => self.qmax = parse(key, value)?,
            "theta" => self.theta = parse(key, value)?,
            "rho" => self.rho = parse(key, value)?,
            "per_time" => self.per_time = Some(parse(key, value)?),
            "seed" => self.seed = parse(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "svg" => self.svg = Some(PathBuf::from(value)),
            "csv" => self.csv = parse(key, value)?,
            "pairs" => self.pairs = parse(key, value)?,
            "points" => self.points = parse(key, value)?,
            k => match k.strip_prefix("param.") {
                Some(p) => {
                    self.params.insert(p.to_string(), value.to_string());
                }
                None => return Err(bad(k, "unknown configuration key")),
            },
        }
        Ok(())
    }

    /// Reads a flat `key = value` file.
    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(&format!("{}:{}", path.display(), n + 1), "expected key = value"))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn from_flags(flags: &Flags) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(path) = &flags.config {
            cfg.load_file(path)?;
        }
        if let Some(m) = &flags.map {
            cfg.map = m.clone();
        }
        for p in &flags.params {
            cfg.params.extend(parse_params(p)?);
        }
        macro_rules! take {
            ($($field:ident),*) => {$(
                if let Some(v) = flags.$field {
                    cfg.$field = v;
                }
            )*};
        }
        take!(c, grid, tol, qmax, theta, rho, seed);
        if let Some(r) = &flags.range {
            cfg.range = parse_range(r)?;
        }
        if flags.per_time.is_some() {
            cfg.per_time = flags.per_time;
        }
        if flags.steps.is_some() {
            cfg.steps = flags.steps;
        }
        if let Some(o) = &flags.out {
            cfg.out = o.clone();
        }
        if flags.svg.is_some() {
            cfg.svg = flags.svg.clone();
        }
        cfg.csv |= flags.csv;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid < 8 {
            return Err(bad("grid", "need at least 8 nodes"));
        }
        if !(self.tol > 0.0) {
            return Err(bad("tol", "must be positive"));
        }
        if self.per_time.is_some_and(|t| !(t > 0.0)) {
            return Err(bad("per_time", "must be positive"));
        }
        if self.qmax == 0 {
            return Err(bad("qmax", "must be at least 1"));
        }
        Ok(())
    }

    pub fn steps_or(&self, default: usize) -> usize {
        self.steps.unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "# pendulum run\nmap = pendulum\nparam.t0 = 0.05\ngrid = 256\nrange = -1:1\n").unwrap();
        let flags = Flags {
            config: Some(path),
            grid: Some(128),
            ..Flags::default()
        };
        let cfg = RunConfig::from_flags(&flags).unwrap();
        assert_eq!(cfg.grid, 128);
        assert_eq!(cfg.range, (-1.0, 1.0));
        assert_eq!(cfg.params["t0"], "0.05");
    }

    #[test]
    fn rejects_unknown_keys_and_bad_ranges() {
        let mut cfg = RunConfig::default();
        assert!(cfg.set("colour", "red").is_err());
        assert!(cfg.set("range", "1:0").is_err());
        assert!(cfg.set("grid", "many").is_err());
    }
}
