//! Run configuration: one TOML file, flat sections, every key optional with
//! the bench calibration as default. Unknown keys are rejected so a typo
//! cannot silently fall back to a default.

use std::path::Path;

use serde::Deserialize;

use biphoton_core::detection::DetectorConfig;
use biphoton_core::lock::{DriftModel, Gains, LockConfig};
use biphoton_core::source::SourceConfig;

use crate::AppError;

/// `[lock]` section: loop gains and target plus the drift environment.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LockSection {
    pub kp: f64,
    pub ki: f64,
    pub target_phi_rad: f64,
    pub initial_mismatch_nm: f64,
    pub drift: DriftModel,
}

impl Default for LockSection {
    fn default() -> Self {
        let gains = Gains::default();
        LockSection {
            kp: gains.kp,
            ki: gains.ki,
            target_phi_rad: -std::f64::consts::FRAC_PI_2,
            initial_mismatch_nm: 0.0,
            drift: DriftModel::default(),
        }
    }
}

/// `[scan]` section: inclusive analyzer-angle grid in degrees.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    pub start_deg: f64,
    pub stop_deg: f64,
    pub count: usize,
}

impl Default for ScanSection {
    fn default() -> Self {
        ScanSection {
            start_deg: 0.0,
            stop_deg: 90.0,
            count: 37,
        }
    }
}

impl ScanSection {
    /// The inclusive angle grid, in degrees.
    pub fn angles_deg(&self) -> Vec<f64> {
        let span = self.stop_deg - self.start_deg;
        (0..self.count)
            .map(|i| self.start_deg + span * i as f64 / (self.count - 1) as f64)
            .collect()
    }
}

/// `[run]` section: counting/lock duration, loop step, and master seed.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub duration_s: f64,
    pub dt_s: f64,
    pub seed: u64,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            duration_s: 10.0,
            dt_s: 1e-3,
            seed: 42,
        }
    }
}

/// `[output]` section: where CSV/SVG artifacts land.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
    pub emit_svg: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: "out".into(),
            emit_svg: false,
        }
    }
}

/// The whole run file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub source: SourceConfig,
    pub detector: DetectorConfig,
    pub lock: LockSection,
    pub scan: ScanSection,
    pub run: RunSection,
    pub output: OutputSection,
}

impl RunConfig {
    /// Assembles the core lock configuration, wiring the wavelengths from
    /// the source section.
    pub fn lock_config(&self) -> LockConfig {
        LockConfig {
            lambda_p_nm: self.source.lambda_p_nm,
            lambda_s_nm: self.source.lambda_s_nm,
            target_phi_rad: self.lock.target_phi_rad,
            initial_mismatch_nm: self.lock.initial_mismatch_nm,
            gains: Gains {
                kp: self.lock.kp,
                ki: self.lock.ki,
            },
            drift: self.lock.drift,
        }
    }

    fn validate(&self) -> Result<(), AppError> {
        self.source.validate().map_err(config_err)?;
        self.detector.validate().map_err(config_err)?;
        self.lock.drift.validate().map_err(config_err)?;
        for (key, value) in [("lock.kp", self.lock.kp), ("lock.ki", self.lock.ki)] {
            if !value.is_finite() || value < 0.0 {
                return Err(AppError::Config(format!(
                    "{key} must be a nonnegative finite number, got {value}"
                )));
            }
        }
        if !self.lock.target_phi_rad.is_finite()
            || self.lock.target_phi_rad.abs() > std::f64::consts::PI
        {
            return Err(AppError::Config(format!(
                "lock.target_phi_rad must lie in [-pi, pi], got {}",
                self.lock.target_phi_rad
            )));
        }
        if self.scan.count < 2 {
            return Err(AppError::Config(format!(
                "scan.count must be at least 2, got {}",
                self.scan.count
            )));
        }
        for (key, value) in [
            ("scan.start_deg", self.scan.start_deg),
            ("scan.stop_deg", self.scan.stop_deg),
        ] {
            if !value.is_finite() {
                return Err(AppError::Config(format!("{key} must be finite, got {value}")));
            }
        }
        if self.scan.stop_deg <= self.scan.start_deg {
            return Err(AppError::Config(format!(
                "scan.stop_deg ({}) must exceed scan.start_deg ({})",
                self.scan.stop_deg, self.scan.start_deg
            )));
        }
        for (key, value) in [
            ("run.duration_s", self.run.duration_s),
            ("run.dt_s", self.run.dt_s),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(AppError::Config(format!(
                    "{key} must be positive, got {value}"
                )));
            }
        }
        if self.output.dir.is_empty() {
            return Err(AppError::Config("output.dir must not be empty".into()));
        }
        Ok(())
    }
}

fn config_err(e: biphoton_core::CoreError) -> AppError {
    AppError::Config(e.to_string())
}

/// Loads and validates a run file. An empty file yields the full default
/// (bench-calibration) configuration.
pub fn parse_config(path: &Path) -> Result<RunConfig, AppError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        AppError::Config(format!("cannot read config {}: {e}", path.display()))
    })?;
    let cfg: RunConfig = toml::from_str(&text).map_err(|e| {
        AppError::Config(format!("malformed config {}: {e}", path.display()))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_yields_bench_defaults() {
        let cfg: RunConfig = toml::from_str("").unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.source.lambda_p_nm, 532.0);
        assert_eq!(cfg.source.lambda_s_nm, 810.0);
        assert_eq!(cfg.source.lambda_i_nm, 1550.0);
        assert_eq!(cfg.source.bandwidth_i_nm, 0.8);
        assert_eq!(cfg.detector.eta_s, 0.6);
        assert_eq!(cfg.detector.eta_i, 0.18);
        assert_eq!(cfg.detector.gate_ns, 2.5);
        assert_eq!(cfg.source.pump_power_mw, 1.2);
        assert_eq!(cfg.scan.count, 37);
        assert_eq!(cfg.run.seed, 42);
    }

    #[test]
    fn section_overrides_apply() {
        let cfg: RunConfig = toml::from_str(
            "[source]\npump_power_mw = 0.6\n\n[run]\nseed = 7\n\n[output]\nemit_svg = true\n",
        )
        .unwrap();
        assert_eq!(cfg.source.pump_power_mw, 0.6);
        assert_eq!(cfg.run.seed, 7);
        assert!(cfg.output.emit_svg);
        assert_eq!(cfg.source.lambda_p_nm, 532.0, "untouched keys keep defaults");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = toml::from_str::<RunConfig>("[source]\nlambda_pump_nm = 532\n").unwrap_err();
        assert!(err.to_string().contains("lambda_pump_nm"));
    }

    #[test]
    fn validation_propagates_section_errors() {
        let cfg: RunConfig = toml::from_str("[source]\nlambda_s_nm = -810.0\n").unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(matches!(err, AppError::Config(ref m) if m.contains("lambda_s_nm")));

        let cfg: RunConfig = toml::from_str("[scan]\ncount = 1\n").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn angle_grid_is_inclusive_and_even() {
        let scan = ScanSection::default();
        let grid = scan.angles_deg();
        assert_eq!(grid.len(), 37);
        assert_eq!(grid[0], 0.0);
        assert_eq!(grid[36], 90.0);
        assert_eq!(grid[9], 22.5);
    }
}
