//! Run configuration shared by the CLI commands and written next to every
//! report.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::brown::GridBounds;
use crate::curve::{HilbertCurveMap, MAX_LEVEL};
use crate::decompose::DecompositionTolerances;
use crate::error::{Error, Result};
use crate::majorization::ConvexGauge;
use crate::matrix::ComplexMatrix;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "SPECTRAL_NEST_OUT";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct RunConfig {
    pub curve_level: u32,
    pub half_side_factor: f64,
    pub grid_resolution: usize,
    pub epsilon: f64,
    /// Gauges as `pow:p` / `logshift:s`.
    pub gauge_battery: Vec<String>,
    pub tolerances: DecompositionTolerances,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            curve_level: 16,
            half_side_factor: 1.25,
            grid_resolution: 201,
            epsilon: 1e-8,
            gauge_battery: ConvexGauge::default_battery().iter().map(|g| g.to_string()).collect(),
            tolerances: DecompositionTolerances::default(),
            output_dir: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_LEVEL).contains(&self.curve_level) {
            return Err(Error::param("curveLevel", format!("must lie in 1..={MAX_LEVEL}")));
        }
        if !(self.half_side_factor >= 1.0 && self.half_side_factor.is_finite()) {
            return Err(Error::param("halfSideFactor", "must be at least 1"));
        }
        if self.grid_resolution < 32 {
            return Err(Error::param("gridResolution", "must be at least 32"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::param("epsilon", "must be positive"));
        }
        self.gauges()?;
        let t = &self.tolerances;
        let all = [t.reconstruction, t.normality, t.spectrum, t.nilpotent_lower, t.nilpotent_radius];
        if all.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::param("tolerances", "must be nonnegative"));
        }
        Ok(())
    }

    pub fn gauges(&self) -> Result<Vec<ConvexGauge>> {
        self.gauge_battery.iter().map(|g| g.parse()).collect()
    }

    pub fn curve_for(&self, t: &ComplexMatrix) -> Result<HilbertCurveMap> {
        HilbertCurveMap::for_matrix(t, self.curve_level, self.half_side_factor)
    }

    pub fn grid_bounds_for(&self, t: &ComplexMatrix) -> GridBounds {
        GridBounds::default_for(t)
    }

    /// `output_dir`, else `$SPECTRAL_NEST_OUT`, else the working directory.
    pub fn resolve_output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Parse {
            context: path.display().to_string(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(c.curve_level, 16);
        assert_eq!(c.gauges().unwrap().len(), 6);
    }

    #[test]
    fn partial_json_fills_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"curveLevel": 8, "tolerances": {"spectrum": 1e-6}}"#).unwrap();
        assert_eq!(c.curve_level, 8);
        assert_eq!(c.grid_resolution, 201);
        assert_eq!(c.tolerances.spectrum, 1e-6);
        assert_eq!(c.tolerances.normality, 1e-10);
    }

    #[test]
    fn rejects_out_of_range() {
        for bad in [
            RunConfig { curve_level: 0, ..Default::default() },
            RunConfig { half_side_factor: 0.5, ..Default::default() },
            RunConfig { grid_resolution: 8, ..Default::default() },
            RunConfig { epsilon: 0.0, ..Default::default() },
            RunConfig { gauge_battery: vec!["pow:x".into()], ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
