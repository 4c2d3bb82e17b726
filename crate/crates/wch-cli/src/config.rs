//! Run configuration: a flat key=value file with command-line overrides.

use std::fmt;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use wch_core::approx::TiltMode;
use wch_core::curve::period;

/// Largest admissible curvature scale; sweeps start here.
pub const EPS_MAX: f64 = 1.0 / 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TiltChoice {
    Zero,
    Leading,
}

impl TiltChoice {
    pub fn mode(self) -> TiltMode {
        match self {
            TiltChoice::Zero => TiltMode::Zero,
            TiltChoice::Leading => TiltMode::Leading,
        }
    }
}

impl fmt::Display for TiltChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TiltChoice::Zero => "zero",
            TiltChoice::Leading => "leading",
        })
    }
}

/// All knobs of a run. Defaults reproduce the measurements quoted in the
/// README; the verification suite is pinned to them.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Curvature scales to sweep (each in (0, 1/8]).
    pub eps_list: Vec<f64>,
    /// Curve / tilt-spectrum grid size (power of two).
    pub curve_n: usize,
    /// Layer ODE grid size (odd; the solver also uses the doubled grid).
    pub layer_n: usize,
    /// Half-width of the layer domain.
    pub layer_half_width: f64,
    /// Step of the transverse quadrature grid used by residual projections.
    pub tube_step: f64,
    /// Length of the quintic-coefficient recursion check.
    pub series_m: usize,
    /// Decay rate of the weighted sup norm (in (0, sqrt 2)).
    pub delta: f64,
    pub tilt: TiltChoice,
    pub out_dir: PathBuf,
    /// Seed for the randomized sample-point spot checks.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            eps_list: vec![1.0 / 8.0, 1.0 / 12.0, 1.0 / 16.0, 1.0 / 24.0, 1.0 / 32.0],
            curve_n: 512,
            layer_n: 4001,
            layer_half_width: 20.0,
            tube_step: 0.025,
            series_m: 60,
            delta: 1.0,
            tilt: TiltChoice::Leading,
            out_dir: PathBuf::from("out"),
            seed: 7,
        }
    }
}

impl RunConfig {
    /// Parse a flat key=value file ('#' comments, blank lines ignored) on
    /// top of the defaults.
    pub fn from_file(path: &std::path::Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("{}:{}: expected key=value", path.display(), lineno + 1))?;
            cfg.set(key.trim(), value.trim())
                .with_context(|| format!("{}:{}", path.display(), lineno + 1))?;
        }
        Ok(cfg)
    }

    /// Apply one key=value setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn list(value: &str) -> Result<Vec<f64>> {
            value
                .split(',')
                .map(|p| p.trim().parse::<f64>().map_err(Into::into))
                .collect()
        }
        match key {
            "eps" => self.eps_list = list(value)?,
            // Periods of the rescaled curve; eps = (curvature period)/T.
            "t_periods" => {
                let tbar = period();
                let mut eps = Vec::new();
                for t in list(value)? {
                    if t < tbar - 1e-9 {
                        bail!("t_periods entry {t} is below the curvature period {tbar:.10}");
                    }
                    eps.push(tbar / t);
                }
                self.eps_list = eps;
            }
            "curve_n" => self.curve_n = value.parse()?,
            "layer_n" => self.layer_n = value.parse()?,
            "layer_half_width" => self.layer_half_width = value.parse()?,
            "tube_step" => self.tube_step = value.parse()?,
            "series_m" => self.series_m = value.parse()?,
            "delta" => self.delta = value.parse()?,
            "tilt" => {
                self.tilt = match value {
                    "zero" => TiltChoice::Zero,
                    "leading" => TiltChoice::Leading,
                    other => bail!("tilt must be 'zero' or 'leading', got '{other}'"),
                }
            }
            "out_dir" => self.out_dir = PathBuf::from(value),
            "seed" => self.seed = value.parse()?,
            other => bail!("unknown config key '{other}'"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps_list.is_empty() {
            bail!("eps list is empty");
        }
        for &e in &self.eps_list {
            if !(e > 0.0) {
                bail!("eps must be positive, got {e}");
            }
            if e > EPS_MAX + 1e-12 {
                bail!("eps = {e} exceeds the admissible maximum 1/8");
            }
        }
        if !self.curve_n.is_power_of_two() || self.curve_n < 64 {
            bail!("curve_n must be a power of two >= 64, got {}", self.curve_n);
        }
        if self.layer_n % 2 == 0 || self.layer_n < 401 {
            bail!("layer_n must be odd and >= 401, got {}", self.layer_n);
        }
        if !(self.layer_half_width >= 10.0) {
            bail!("layer_half_width must be >= 10, got {}", self.layer_half_width);
        }
        if !(self.tube_step > 0.0 && self.tube_step <= 0.1) {
            bail!("tube_step must lie in (0, 0.1], got {}", self.tube_step);
        }
        if self.series_m < 2 || self.series_m > 100 {
            bail!("series_m must lie in [2, 100], got {}", self.series_m);
        }
        let s2 = std::f64::consts::SQRT_2;
        if !(self.delta > 0.0 && self.delta < s2) {
            bail!("delta must lie strictly between 0 and sqrt(2), got {}", self.delta);
        }
        Ok(())
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
    fn rejects_out_of_range_settings() {
        let mut c = RunConfig::default();
        c.set("eps", "0.2").unwrap();
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.set("delta", "1.4143").unwrap();
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.set("curve_n", "300").unwrap();
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        assert!(c.set("no_such_key", "1").is_err());
    }

    #[test]
    fn period_list_converts_and_rejects_short_periods() {
        let mut c = RunConfig::default();
        c.set("t_periods", "74.162987092054875").unwrap();
        assert!((c.eps_list[0] - 0.1).abs() < 1e-12);
        assert!(c.set("t_periods", "7.0").is_err());
    }
}
