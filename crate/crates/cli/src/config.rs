//! Run configuration: TOML file values, then command-line overrides.

use std::path::Path;

use assoc_heun::birthdeath::KolmogorovConfig;
use assoc_heun::heun::SeriesConfig;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Every key is optional in the file; missing keys take these defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Series tail bound, relative to the largest term at `r_max`.
    pub series_tol: f64,
    /// Quadrature tolerance: absolute for transforms, relative to the
    /// prefactor for closed forms.
    pub quad_tol: f64,
    /// Relative convergence of the continued fraction.
    pub cf_tol: f64,
    pub r_max: f64,
    pub n_trunc: usize,
    pub t_max: f64,
    /// Kolmogorov step; unset picks the stability-limited step.
    pub dt: Option<f64>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        let kolmogorov = KolmogorovConfig::default();
        RunConfig {
            series_tol: SeriesConfig::default().tol,
            quad_tol: 1e-10,
            cf_tol: 1e-13,
            r_max: SeriesConfig::default().r_max,
            n_trunc: kolmogorov.n_trunc,
            t_max: kolmogorov.t_max,
            dt: kolmogorov.dt,
            format: Format::Json,
        }
    }
}

/// Values given on the command line; `None` keeps the configured value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub series_tol: Option<f64>,
    pub quad_tol: Option<f64>,
    pub cf_tol: Option<f64>,
    pub r_max: Option<f64>,
    pub n_trunc: Option<usize>,
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, over: &Overrides) -> Result<Self, String> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| format!("cannot read config {}: {e}", p.display()))?;
                toml::from_str(&text).map_err(|e| format!("invalid config {}: {e}", p.display()))?
            }
            None => RunConfig::default(),
        };
        cfg.apply(over);
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, over: &Overrides) {
        if let Some(v) = over.series_tol {
            self.series_tol = v;
        }
        if let Some(v) = over.quad_tol {
            self.quad_tol = v;
        }
        if let Some(v) = over.cf_tol {
            self.cf_tol = v;
        }
        if let Some(v) = over.r_max {
            self.r_max = v;
        }
        if let Some(v) = over.n_trunc {
            self.n_trunc = v;
        }
        if let Some(v) = over.t_max {
            self.t_max = v;
        }
        if over.dt.is_some() {
            self.dt = over.dt;
        }
        if let Some(v) = over.format {
            self.format = v;
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [("series_tol", self.series_tol), ("quad_tol", self.quad_tol), ("cf_tol", self.cf_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.r_max > 0.0 && self.r_max < 1.0) {
            return Err(format!("r_max must lie in (0, 1), got {}", self.r_max));
        }
        if self.n_trunc == 0 {
            return Err("n_trunc must be at least 1".into());
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(format!("t_max must be positive, got {}", self.t_max));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt < self.t_max) {
                return Err(format!("dt must lie in (0, t_max), got {dt}"));
            }
        }
        Ok(())
    }

    pub fn series(&self) -> SeriesConfig {
        SeriesConfig {
            r_max: self.r_max,
            tol: self.series_tol,
            ..Default::default()
        }
    }

    pub fn kolmogorov(&self) -> KolmogorovConfig {
        KolmogorovConfig {
            n_trunc: self.n_trunc,
            t_max: self.t_max,
            dt: self.dt,
            ..Default::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg: RunConfig = toml::from_str("cf_tol = 1e-9\nformat = \"csv\"").unwrap();
        assert_eq!(cfg.cf_tol, 1e-9);
        assert_eq!(cfg.format, Format::Csv);
        assert_eq!(cfg.series_tol, RunConfig::default().series_tol);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(toml::from_str::<RunConfig>("tolerance = 1").is_err());
    }

    #[test]
    fn flags_override_file() {
        let mut cfg = RunConfig::default();
        cfg.apply(&Overrides {
            r_max: Some(0.5),
            dt: Some(1e-4),
            ..Default::default()
        });
        assert_eq!(cfg.r_max, 0.5);
        assert_eq!(cfg.dt, Some(1e-4));
        assert_eq!(cfg.n_trunc, 60);
    }

    #[test]
    fn invalid_values_rejected() {
        for cfg in [
            RunConfig { r_max: 1.0, ..Default::default() },
            RunConfig { quad_tol: 0.0, ..Default::default() },
            RunConfig { n_trunc: 0, ..Default::default() },
            RunConfig { dt: Some(20.0), ..Default::default() },
        ] {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }
}
