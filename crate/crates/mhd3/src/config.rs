//! Scenario configuration: strict TOML schema with defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagnostics::SerrinConfig;
use crate::solver::{PhysicalConstants, SchemeConfig, SubstepScheme};
use crate::{Error, Result};

const TAU: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    TaylorGreen,
    AlignedMhdMode,
    VacuumBlob,
    RandomBandlimited,
    PureHeat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Amplitudes {
    pub u: f64,
    pub h: f64,
    pub theta: f64,
}

impl Default for Amplitudes {
    fn default() -> Self {
        Self {
            u: 0.1,
            h: 0.05,
            theta: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityProfile {
    Constant,
    Blob,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DensitySpec {
    pub profile: DensityProfile,
    /// Background density.
    pub base: f64,
    /// Blob depth in (0, base]; `contrast = base` carves a true vacuum region.
    pub contrast: f64,
}

impl Default for DensitySpec {
    fn default() -> Self {
        Self {
            profile: DensityProfile::Constant,
            base: 1.0,
            contrast: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsSpec {
    pub mu: f64,
    pub nu: f64,
    pub c_v: f64,
    pub kappa: f64,
}

impl Default for ConstantsSpec {
    fn default() -> Self {
        Self {
            mu: 0.01,
            nu: 0.05,
            c_v: 1.0,
            kappa: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeSpec {
    pub cfl_number: f64,
    /// `None` resolves to `1e-6 * max rho0`.
    pub density_floor: Option<f64>,
    pub dealias: bool,
    pub max_dt: f64,
    pub substep_scheme: SubstepScheme,
}

impl Default for SchemeSpec {
    fn default() -> Self {
        Self {
            cfl_number: 0.5,
            density_floor: None,
            dealias: true,
            max_dt: 1e-3,
            substep_scheme: SubstepScheme::Rk2Imex,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SerrinSpec {
    pub s: f64,
    pub r: f64,
    pub m0: Option<f64>,
}

impl Default for SerrinSpec {
    fn default() -> Self {
        Self {
            s: 4.0,
            r: 6.0,
            m0: None,
        }
    }
}

/// Fully resolved scenario description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub preset: Preset,
    pub n: usize,
    #[serde(default = "default_box_length")]
    pub box_length: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    /// Time between emitted ledger rows.
    #[serde(default = "default_cadence")]
    pub output_cadence: f64,
    /// Steps between checkpoints; 0 writes only the final checkpoint.
    #[serde(default)]
    pub checkpoint_interval: u64,
    /// Magnetic functional exponent.
    #[serde(default = "default_q")]
    pub q: f64,
    /// Bootstrap calibration constant.
    #[serde(default = "default_m")]
    pub m_calibration: f64,
    #[serde(default)]
    pub amplitudes: Amplitudes,
    #[serde(default)]
    pub density: DensitySpec,
    #[serde(default)]
    pub constants: ConstantsSpec,
    #[serde(default)]
    pub scheme: SchemeSpec,
    #[serde(default)]
    pub serrin: SerrinSpec,
}

fn default_box_length() -> f64 {
    TAU
}
fn default_seed() -> u64 {
    42
}
fn default_horizon() -> f64 {
    1.0
}
fn default_cadence() -> f64 {
    0.01
}
fn default_q() -> f64 {
    4.0
}
fn default_m() -> f64 {
    1.0
}

impl ScenarioSpec {
    pub fn minimal(preset: Preset, n: usize) -> Self {
        Self {
            preset,
            n,
            box_length: default_box_length(),
            seed: default_seed(),
            horizon: default_horizon(),
            output_cadence: default_cadence(),
            checkpoint_interval: 0,
            q: default_q(),
            m_calibration: default_m(),
            amplitudes: Amplitudes::default(),
            density: DensitySpec::default(),
            constants: ConstantsSpec::default(),
            scheme: SchemeSpec::default(),
            serrin: SerrinSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        crate::Grid::new(self.n, self.box_length)?;
        if !(self.horizon > 0.0) {
            return Err(Error::Config(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if !(self.output_cadence > 0.0) {
            return Err(Error::Config(format!(
                "output_cadence must be positive, got {}",
                self.output_cadence
            )));
        }
        if !(2.0..=12.0).contains(&self.q) {
            return Err(Error::Config(format!(
                "q must lie in [2, 12], got {}",
                self.q
            )));
        }
        if !(self.m_calibration > 0.0) {
            return Err(Error::Config(format!(
                "m_calibration must be positive, got {}",
                self.m_calibration
            )));
        }
        if !(self.density.base > 0.0) {
            return Err(Error::Config(format!(
                "density.base must be positive, got {}",
                self.density.base
            )));
        }
        if !(self.density.contrast >= 0.0 && self.density.contrast <= self.density.base) {
            return Err(Error::Config(format!(
                "density.contrast must lie in [0, base], got {}",
                self.density.contrast
            )));
        }
        for (name, v) in [("u", self.amplitudes.u), ("h", self.amplitudes.h)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Config(format!(
                    "amplitudes.{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if !(self.amplitudes.theta >= 0.0) || !self.amplitudes.theta.is_finite() {
            return Err(Error::Config(format!(
                "amplitudes.theta must be finite and >= 0, got {}",
                self.amplitudes.theta
            )));
        }
        self.physical_constants()?;
        let scheme = SchemeConfig {
            cfl_number: self.scheme.cfl_number,
            density_floor: self.scheme.density_floor.unwrap_or(0.0),
            dealias: self.scheme.dealias,
            max_dt: self.scheme.max_dt,
            substep_scheme: self.scheme.substep_scheme,
        };
        scheme.validate()?;
        if let Some(floor) = self.scheme.density_floor {
            if !(floor >= 0.0) {
                return Err(Error::Config(format!(
                    "scheme.density_floor must be >= 0, got {floor}"
                )));
            }
        }
        // the index constraint 2/s + 3/r <= 1 with r > 3
        self.serrin_config()
            .map_err(|e| Error::Config(format!("serrin: {e}")))?;
        Ok(())
    }

    pub fn physical_constants(&self) -> Result<PhysicalConstants> {
        PhysicalConstants::new(
            self.constants.mu,
            self.constants.nu,
            self.constants.c_v,
            self.constants.kappa,
        )
    }

    pub fn serrin_config(&self) -> Result<SerrinConfig> {
        SerrinConfig::new(self.serrin.s, self.serrin.r, self.serrin.m0)
    }

    /// Scheme config with the density floor resolved against `max rho0`.
    pub fn scheme_config(&self, max_rho0: f64) -> SchemeConfig {
        SchemeConfig {
            cfl_number: self.scheme.cfl_number,
            density_floor: self
                .scheme
                .density_floor
                .unwrap_or(1e-6 * max_rho0),
            dealias: self.scheme.dealias,
            max_dt: self.scheme.max_dt,
            substep_scheme: self.scheme.substep_scheme,
        }
    }
}

pub fn load_config(path: &Path) -> Result<ScenarioSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Config(format!("cannot read {}: {e}", path.display()))
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ScenarioSpec> {
    let spec: ScenarioSpec =
        toml::from_str(text).map_err(|e| Error::Config(format!("schema violation: {e}")))?;
    spec.validate()?;
    Ok(spec)
}

pub fn emit_config(spec: &ScenarioSpec) -> Result<String> {
    toml::to_string_pretty(spec).map_err(|e| Error::Config(format!("serialization: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let spec = parse_config("preset = \"pure_heat\"\nn = 32\n").unwrap();
        assert_eq!(spec.preset, Preset::PureHeat);
        assert_eq!(spec.n, 32);
        assert_eq!(spec.seed, 42);
        assert_eq!(spec.box_length, TAU);
        assert_eq!(spec.scheme.substep_scheme, SubstepScheme::Rk2Imex);
        assert!(spec.scheme.dealias);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = parse_config("preset = \"pure_heat\"\nn = 32\nbogus = 1\n");
        assert!(err.is_err());
        let err = parse_config("preset = \"pure_heat\"\nn = 32\n[scheme]\nwat = 2\n");
        assert!(err.is_err());
    }

    #[test]
    fn serrin_r_three_rejected() {
        let err = parse_config("preset = \"pure_heat\"\nn = 32\n[serrin]\nr = 3.0\n");
        match err {
            Err(Error::Config(msg)) => assert!(msg.contains("serrin")),
            other => panic!("expected index-constraint rejection, got {other:?}"),
        }
    }

    #[test]
    fn bad_grid_rejected() {
        assert!(parse_config("preset = \"pure_heat\"\nn = 12\n").is_err());
        assert!(parse_config("preset = \"pure_heat\"\nn = 32\nbox_length = -1.0\n").is_err());
    }

    #[test]
    fn round_trip_is_identity() {
        let mut spec = ScenarioSpec::minimal(Preset::TaylorGreen, 32);
        spec.seed = 7;
        spec.amplitudes.u = 0.25;
        spec.scheme.density_floor = Some(1e-4);
        spec.serrin.m0 = Some(3.0);
        let text = emit_config(&spec).unwrap();
        let back = parse_config(&text).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn contrast_above_base_rejected() {
        let text = "preset = \"vacuum_blob\"\nn = 32\n[density]\nprofile = \"blob\"\nbase = 1.0\ncontrast = 2.0\n";
        assert!(parse_config(text).is_err());
    }
}
