//! Run configuration: flat key-value config files plus flag overrides.
//!
//! The format is a diffable list of `key = value` lines with `#` comments;
//! no nesting. Grid construction places the anchor q = 1 exactly on the grid
//! whenever the interval straddles it.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::cartan::LieType;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub lie_type: LieType,
    pub q_min: f64,
    pub q_max: f64,
    pub grid_points: usize,
    pub lambda_max: u32,
    pub out_dir: PathBuf,
    pub formats: Vec<String>,
    pub seed: u64,
    /// Tolerance overrides by name (see [`crate::tol`]).
    pub tol_overrides: BTreeMap<String, f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            lie_type: LieType::A1,
            q_min: 0.5,
            q_max: 2.0,
            grid_points: 9,
            lambda_max: 3,
            out_dir: PathBuf::from("qdlab-out"),
            formats: vec!["json".into(), "csv".into()],
            seed: 1,
            tol_overrides: BTreeMap::new(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.q_min > 0.0) {
            return Err(Error::Config(format!("q_min must be positive, got {}", self.q_min)));
        }
        if self.q_max < self.q_min {
            return Err(Error::Config("q_max must be >= q_min".into()));
        }
        if self.grid_points == 0 {
            return Err(Error::Config("grid_points must be positive".into()));
        }
        if self.q_min < 1.0 && 1.0 < self.q_max && self.grid_points % 2 == 0 {
            return Err(Error::Config(
                "grid_points must be odd so the grid can contain q = 1".into(),
            ));
        }
        if self.lambda_max < 1 {
            return Err(Error::Config("lambda_max must be at least 1".into()));
        }
        for name in self.tol_overrides.keys() {
            if crate::tol::by_name(name).is_none() {
                return Err(Error::Config(format!("unknown tolerance name '{name}'")));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        make_grid(self.q_min, self.q_max, self.grid_points)
    }

    pub fn tolerance(&self, name: &str) -> f64 {
        self.tol_overrides
            .get(name)
            .copied()
            .or_else(|| crate::tol::by_name(name))
            .unwrap_or(0.0)
    }

    /// Parse a flat `key = value` file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("{}:{}: expected key = value", path.display(), lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply a single `key = value` assignment (file line or flag override).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("invalid {what}: '{value}'"));
        match key {
            "type" | "lie_type" => self.lie_type = value.parse()?,
            "q_min" => self.q_min = value.parse().map_err(|_| bad("q_min"))?,
            "q_max" => self.q_max = value.parse().map_err(|_| bad("q_max"))?,
            "grid_points" => self.grid_points = value.parse().map_err(|_| bad("grid_points"))?,
            "lambda_max" => self.lambda_max = value.parse().map_err(|_| bad("lambda_max"))?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "formats" => {
                self.formats = value
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
                for f in &self.formats {
                    if f != "json" && f != "csv" {
                        return Err(Error::Config(format!("unknown format '{f}'")));
                    }
                }
            }
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            other => {
                if let Some(name) = other.strip_prefix("tol.") {
                    let v: f64 = value.parse().map_err(|_| bad("tolerance"))?;
                    self.tol_overrides.insert(name.to_string(), v);
                } else {
                    return Err(Error::Config(format!("unknown key '{other}'")));
                }
            }
        }
        Ok(())
    }

    /// Echo in the flat file format (used in report metadata).
    pub fn echo_lines(&self) -> Vec<(String, String)> {
        let mut lines = vec![
            ("type".into(), self.lie_type.to_string()),
            ("q_min".into(), crate::report::fmt_f64(self.q_min)),
            ("q_max".into(), crate::report::fmt_f64(self.q_max)),
            ("grid_points".into(), self.grid_points.to_string()),
            ("lambda_max".into(), self.lambda_max.to_string()),
            ("formats".into(), self.formats.join(",")),
            ("seed".into(), self.seed.to_string()),
        ];
        for (k, v) in &self.tol_overrides {
            lines.push((format!("tol.{k}"), crate::report::fmt_f64(*v)));
        }
        lines
    }
}

/// Build a q-grid on `[a, b]` with `n` points, spaced uniformly in `ln q`
/// (the natural deformation parameter is a multiple of `ln q`, and log
/// spacing respects the `q ↔ 1/q` symmetry of the theory). When the interval
/// straddles 1 the two sides are log-spaced separately with 1 as an exact
/// shared point (requires odd `n`). Halving the step (`n → 2n−1`) inserts
/// log-midpoints.
pub fn make_grid(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if !(a > 0.0) || b < a || n == 0 {
        return Err(Error::Config(format!("invalid grid spec {a}:{b}:{n}")));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    let mut grid = Vec::with_capacity(n);
    if a < 1.0 && 1.0 < b {
        if n % 2 == 0 {
            return Err(Error::Config("grid straddling q = 1 needs an odd point count".into()));
        }
        let half = (n - 1) / 2;
        for k in 0..half {
            grid.push((a.ln() * (1.0 - k as f64 / half as f64)).exp());
        }
        grid.push(1.0);
        for k in 1..=half {
            grid.push((b.ln() * (k as f64 / half as f64)).exp());
        }
    } else {
        for k in 0..n {
            let t = k as f64 / (n - 1) as f64;
            grid.push((a.ln() * (1.0 - t) + b.ln() * t).exp());
        }
    }
    grid[0] = a;
    grid[n - 1] = b;
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_contains_exact_one() {
        let g = make_grid(0.5, 2.0, 9).unwrap();
        assert_eq!(g.len(), 9);
        assert!(g.contains(&1.0));
        assert_eq!(g[0], 0.5);
        assert_eq!(g[8], 2.0);
        for w in g.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn grid_halving_inserts_midpoints() {
        let coarse = make_grid(0.5, 2.0, 9).unwrap();
        let fine = make_grid(0.5, 2.0, 17).unwrap();
        for q in &coarse {
            assert!(fine.iter().any(|f| (f - q).abs() < 1e-15));
        }
    }

    #[test]
    fn config_parsing_and_validation() {
        let dir = std::env::temp_dir().join("qdlab-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        std::fs::write(
            &path,
            "# comment\ntype = A1\nq_min = 0.5\nq_max = 2.0\ngrid_points = 9\nlambda_max = 2\ntol.twist_i = 1e-7\n",
        )
        .unwrap();
        let cfg = RunConfig::from_file(&path).unwrap();
        assert_eq!(cfg.lambda_max, 2);
        assert_eq!(cfg.tolerance("twist_i"), 1e-7);
        assert_eq!(cfg.tolerance("twist_iii"), crate::tol::TWIST_III);

        let mut bad = cfg.clone();
        bad.q_min = 0.0;
        assert!(bad.validate().is_err());
        let mut even = cfg;
        even.grid_points = 8;
        assert!(even.validate().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut cfg = RunConfig::default();
        assert!(cfg.set("nonsense", "1").is_err());
        assert!(cfg.set("tol.not_a_tolerance", "1e-3").is_ok());
        assert!(cfg.validate().is_err());
    }
}
