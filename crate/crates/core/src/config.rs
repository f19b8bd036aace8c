//! JSON configuration files.
//!
//! Every frequency-like entry is an object `{value, unit, two_pi?}` with
//! `unit` one of `"Hz"`, `"rad_s"` or `"omega_b"`. For `"Hz"`, `two_pi`
//! defaults to `true` (the value is multiplied by 2π); `two_pi: false` marks
//! the number as already angular. Unknown keys are rejected everywhere.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{
    DetuningConvention, DriveSpec, ParamError, PhysicalConstants, SphereSpec, SystemParams,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("field `{field}`: {source}")]
    Params {
        field: &'static str,
        source: ParamError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrequencyUnit {
    #[serde(rename = "Hz")]
    Hz,
    #[serde(rename = "rad_s")]
    RadPerSecond,
    #[serde(rename = "omega_b")]
    OmegaB,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFrequency {
    value: f64,
    unit: FrequencyUnit,
    two_pi: Option<bool>,
}

/// A frequency-like quantity as written in a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFrequency")]
pub struct Frequency {
    pub value: f64,
    pub unit: FrequencyUnit,
    pub two_pi: bool,
}

impl TryFrom<RawFrequency> for Frequency {
    type Error = String;

    fn try_from(raw: RawFrequency) -> Result<Self, String> {
        if !raw.value.is_finite() {
            return Err(format!("value must be finite, got {}", raw.value));
        }
        let two_pi = match (raw.unit, raw.two_pi) {
            (FrequencyUnit::Hz, flag) => flag.unwrap_or(true),
            (_, Some(true)) => {
                return Err("two_pi applies only to unit \"Hz\"".to_string());
            }
            (_, _) => false,
        };
        Ok(Frequency {
            value: raw.value,
            unit: raw.unit,
            two_pi,
        })
    }
}

impl Frequency {
    pub fn rad_s(value: f64) -> Self {
        Frequency {
            value,
            unit: FrequencyUnit::RadPerSecond,
            two_pi: false,
        }
    }

    pub fn hz(value: f64) -> Self {
        Frequency {
            value,
            unit: FrequencyUnit::Hz,
            two_pi: true,
        }
    }

    pub fn omega_b(value: f64) -> Self {
        Frequency {
            value,
            unit: FrequencyUnit::OmegaB,
            two_pi: false,
        }
    }

    /// Angular value in rad/s; `omega_b` is needed only for the `omega_b`
    /// unit.
    pub fn resolve(&self, omega_b: Option<f64>) -> Result<f64, String> {
        match self.unit {
            FrequencyUnit::Hz if self.two_pi => Ok(2.0 * PI * self.value),
            FrequencyUnit::Hz | FrequencyUnit::RadPerSecond => Ok(self.value),
            FrequencyUnit::OmegaB => omega_b
                .map(|w| self.value * w)
                .ok_or_else(|| "unit \"omega_b\" cannot be used for omega_b itself".to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    pub hbar: Option<f64>,
    pub c_vac: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereConfig {
    /// Spin density, m⁻³.
    pub rho: f64,
    /// Radius, m.
    pub radius: f64,
    /// Gyromagnetic ratio, per tesla.
    pub gamma_g: Frequency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub omega_c: Frequency,
    pub omega_b: Frequency,
    pub kappa_c: Frequency,
    pub kappa_m: Frequency,
    pub gamma_b: Frequency,
    #[serde(rename = "Gamma")]
    pub coupling: Frequency,
    pub g_mb: Frequency,
    /// Cavity detuning Δ_c; defaults to ω_b.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_c: Option<Frequency>,
    /// Magnon detuning Δ_m; defaults to ω_b.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_m: Option<Frequency>,
    #[serde(default = "default_true")]
    pub assume_sideband_resolved: bool,
    #[serde(default)]
    pub detuning_convention: DetuningConvention,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriveConfig {
    /// Drive field amplitude in tesla.
    Field {
        #[serde(rename = "H_d")]
        h_d: f64,
    },
    /// Drive power in watts.
    Power { power: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<ConstantsConfig>,
    pub sphere: SphereConfig,
    pub system: SystemConfig,
    pub drive: DriveConfig,
    /// Length of the moving medium, m. Required: there is no sensible
    /// default.
    pub medium_length: f64,
    /// Medium velocity in m/s for drag columns of σ sweeps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<f64>,
}

/// A config resolved into SI angular units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resolved {
    pub params: SystemParams,
    pub velocity: Option<f64>,
}

fn field_err(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field: field.to_string(),
        message: message.into(),
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let s = &self.system;
        let omega_b = s
            .omega_b
            .resolve(None)
            .map_err(|m| field_err("system.omega_b", m))?;
        let freq = |name: &str, f: &Frequency| {
            f.resolve(Some(omega_b))
                .map_err(|m| field_err(&format!("system.{name}"), m))
        };
        let omega_c = freq("omega_c", &s.omega_c)?;
        let delta_c = match &s.delta_c {
            Some(f) => freq("delta_c", f)?,
            None => omega_b,
        };
        let delta_m = match &s.delta_m {
            Some(f) => freq("delta_m", f)?,
            None => omega_b,
        };
        let omega_d = omega_c - delta_c;

        let defaults = PhysicalConstants::default();
        let constants = match &self.constants {
            Some(c) => PhysicalConstants {
                hbar: c.hbar.unwrap_or(defaults.hbar),
                c_vac: c.c_vac.unwrap_or(defaults.c_vac),
            },
            None => defaults,
        };

        let gamma_g = self
            .sphere
            .gamma_g
            .resolve(None)
            .map_err(|m| field_err("sphere.gamma_g", m))?;

        let drive = match self.drive {
            DriveConfig::Field { h_d } => DriveSpec::Field { h_d },
            DriveConfig::Power { power } => DriveSpec::Power { watts: power },
        };

        let params = SystemParams {
            omega_c,
            omega_m: omega_d + delta_m,
            omega_b,
            kappa_c: freq("kappa_c", &s.kappa_c)?,
            kappa_m: freq("kappa_m", &s.kappa_m)?,
            gamma_b: freq("gamma_b", &s.gamma_b)?,
            coupling: freq("Gamma", &s.coupling)?,
            g_mb: freq("g_mb", &s.g_mb)?,
            omega_d,
            drive,
            sphere: SphereSpec {
                rho: self.sphere.rho,
                radius: self.sphere.radius,
                gamma_g,
            },
            medium_length: self.medium_length,
            constants,
            assume_sideband_resolved: s.assume_sideband_resolved,
            detuning_convention: s.detuning_convention,
        };
        params.validate().map_err(|source| ConfigError::Params {
            field: param_field(&source),
            source,
        })?;
        if let Some(v) = self.velocity {
            if !v.is_finite() {
                return Err(field_err("velocity", format!("must be finite, got {v}")));
            }
        }
        Ok(Resolved {
            params,
            velocity: self.velocity,
        })
    }

    /// Config that resolves back to `params` bit for bit (all rates in
    /// rad/s).
    pub fn from_params(params: &SystemParams, velocity: Option<f64>) -> Self {
        let r = Frequency::rad_s;
        ConfigFile {
            constants: Some(ConstantsConfig {
                hbar: Some(params.constants.hbar),
                c_vac: Some(params.constants.c_vac),
            }),
            sphere: SphereConfig {
                rho: params.sphere.rho,
                radius: params.sphere.radius,
                gamma_g: r(params.sphere.gamma_g),
            },
            system: SystemConfig {
                omega_c: r(params.omega_c),
                omega_b: r(params.omega_b),
                kappa_c: r(params.kappa_c),
                kappa_m: r(params.kappa_m),
                gamma_b: r(params.gamma_b),
                coupling: r(params.coupling),
                g_mb: r(params.g_mb),
                delta_c: Some(r(params.delta_c())),
                delta_m: Some(r(params.delta_m())),
                assume_sideband_resolved: params.assume_sideband_resolved,
                detuning_convention: params.detuning_convention,
            },
            drive: match params.drive {
                DriveSpec::Field { h_d } => DriveConfig::Field { h_d },
                DriveSpec::Power { watts } => DriveConfig::Power { power: watts },
            },
            medium_length: params.medium_length,
            velocity,
        }
    }
}

fn param_field(e: &ParamError) -> &'static str {
    match e {
        ParamError::NotPositive { name, .. }
        | ParamError::Negative { name, .. }
        | ParamError::NotFinite { name, .. } => name,
        ParamError::SidebandNotResolved { .. } => "system.assume_sideband_resolved",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE: &str = include_str!("../../../configs/reference.json");

    #[test]
    fn reference_config_matches_builtin_parameters() {
        let r = ConfigFile::parse(REFERENCE).unwrap().resolve().unwrap();
        let want = SystemParams::reference(0.01);
        let p = r.params;
        let close = |a: f64, b: f64| (a - b).abs() <= 4.0 * f64::EPSILON * b.abs();
        assert!(close(p.omega_c, want.omega_c));
        assert!(close(p.omega_b, want.omega_b));
        assert!(close(p.kappa_c, want.kappa_c));
        assert!(close(p.kappa_m, want.kappa_m));
        assert!(close(p.gamma_b, want.gamma_b));
        assert!(close(p.coupling, want.coupling));
        assert!(close(p.g_mb, want.g_mb));
        assert!(close(p.sphere.gamma_g, want.sphere.gamma_g));
        // ω_c − ω_d cancels about five digits.
        assert!((p.delta_c() / want.omega_b - 1.0).abs() < 1e-12);
        assert!((p.delta_m() / want.omega_b - 1.0).abs() < 1e-12);
        assert_eq!(p.drive, want.drive);
        assert_eq!(p.sphere.rho, want.sphere.rho);
        assert_eq!(p.sphere.radius, want.sphere.radius);
    }

    #[test]
    fn hz_entries_read_back_exactly() {
        let r = ConfigFile::parse(REFERENCE).unwrap().resolve().unwrap().params;
        let back = |w: f64| w / (2.0 * PI);
        assert_eq!(back(r.omega_c), 10e9);
        assert_eq!(back(r.omega_b), 15e6);
        assert_eq!(back(r.kappa_c), 2.1e6);
        assert_eq!(back(r.kappa_m), 0.1e6);
        assert_eq!(back(r.coupling), 3.2e6);
        assert_eq!(back(r.g_mb), 0.3);
    }

    #[test]
    fn from_params_round_trips() {
        let mut p = SystemParams::reference(0.02);
        p.drive = DriveSpec::Power { watts: 6e-3 };
        p.detuning_convention = DetuningConvention::Bare;
        let cfg = ConfigFile::from_params(&p, Some(12.5));
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let r = ConfigFile::parse(&text).unwrap().resolve().unwrap();
        assert_eq!(r.velocity, Some(12.5));
        assert_eq!(r.params.omega_c, p.omega_c);
        assert_eq!(r.params.kappa_c, p.kappa_c);
        assert_eq!(r.params.coupling, p.coupling);
        assert_eq!(r.params.drive, p.drive);
        assert_eq!(r.params.detuning_convention, p.detuning_convention);
        assert!((r.params.omega_m - p.omega_m).abs() <= f64::EPSILON * p.omega_m);
    }

    #[test]
    fn omega_b_units() {
        let f = Frequency::omega_b(0.4);
        assert_eq!(f.resolve(Some(10.0)).unwrap(), 4.0);
        assert!(f.resolve(None).is_err());
        let mut cfg: serde_json::Value = serde_json::from_str(REFERENCE).unwrap();
        cfg["system"]["omega_b"] = serde_json::json!({"value": 1.0, "unit": "omega_b"});
        let err = ConfigFile::parse(&cfg.to_string()).unwrap().resolve().unwrap_err();
        assert!(err.to_string().contains("system.omega_b"), "{err}");
    }

    #[test]
    fn two_pi_flag() {
        let parse = |s: &str| serde_json::from_str::<Frequency>(s);
        assert_eq!(parse(r#"{"value":1,"unit":"Hz"}"#).unwrap().resolve(None).unwrap(), 2.0 * PI);
        assert_eq!(
            parse(r#"{"value":1,"unit":"Hz","two_pi":false}"#).unwrap().resolve(None).unwrap(),
            1.0
        );
        assert!(parse(r#"{"value":1,"unit":"rad_s","two_pi":true}"#).is_err());
        assert!(parse(r#"{"value":1,"unit":"GHz"}"#).is_err());
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let bad = REFERENCE.replacen("\"kappa_c\"", "\"kapa_c\"", 1);
        match ConfigFile::parse(&bad) {
            Err(ConfigError::Syntax { line, message, .. }) => {
                assert!(line > 1);
                assert!(message.contains("kapa_c"), "{message}");
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
        let extra = REFERENCE.replacen("{", "{\"colour\": 1,", 1);
        assert!(ConfigFile::parse(&extra).is_err());
    }

    #[test]
    fn medium_length_is_required() {
        let mut cfg: serde_json::Value = serde_json::from_str(REFERENCE).unwrap();
        cfg.as_object_mut().unwrap().remove("medium_length");
        let err = ConfigFile::parse(&cfg.to_string()).unwrap_err();
        assert!(err.to_string().contains("medium_length"), "{err}");
    }

    #[test]
    fn physics_errors_name_the_field() {
        let mut cfg: serde_json::Value = serde_json::from_str(REFERENCE).unwrap();
        cfg["system"]["kappa_m"]["value"] = serde_json::json!(-1.0);
        let err = ConfigFile::parse(&cfg.to_string()).unwrap().resolve().unwrap_err();
        assert!(matches!(err, ConfigError::Params { field: "kappa_m", .. }), "{err}");
    }

    #[test]
    fn power_drive() {
        let mut cfg: serde_json::Value = serde_json::from_str(REFERENCE).unwrap();
        cfg["drive"] = serde_json::json!({"mode": "power", "power": 0.015});
        let p = ConfigFile::parse(&cfg.to_string()).unwrap().resolve().unwrap().params;
        assert_eq!(p.drive, DriveSpec::Power { watts: 0.015 });
        cfg["drive"] = serde_json::json!({"mode": "power", "H_d": 0.015});
        assert!(ConfigFile::parse(&cfg.to_string()).is_err());
    }
}
