//! Physical parameters of the cavity–magnon–phonon system.
//!
//! Every rate and frequency is stored as an angular frequency in rad/s.
//! The frame rotates at the magnon drive frequency `omega_d`, so the
//! detunings are
//!
//! * cavity: `Δ_c = ω_c − ω_d`
//! * magnon (bare, before the magnetostrictive pull): `Δ_m⁰ = ω_m − ω_d`
//! * probe: `δ_p = ω_p − ω_d`, with `σ = δ_p − ω_b` measured from the
//!   phonon sideband.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum, m/s.
pub const C_VAC: f64 = 2.997_924_58e8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("`{name}` must be strictly positive, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("`{name}` must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("`{name}` must be finite, got {value}")]
    NotFinite { name: &'static str, value: f64 },
    #[error(
        "resolved-sideband regime requested but omega_b = {omega_b:.6e} rad/s does not exceed \
         kappa_c = {kappa_c:.6e} and kappa_m = {kappa_m:.6e}"
    )]
    SidebandNotResolved {
        omega_b: f64,
        kappa_c: f64,
        kappa_m: f64,
    },
}

fn positive(name: &'static str, value: f64) -> Result<(), ParamError> {
    if !value.is_finite() {
        return Err(ParamError::NotFinite { name, value });
    }
    if value <= 0.0 {
        return Err(ParamError::NotPositive { name, value });
    }
    Ok(())
}

fn non_negative(name: &'static str, value: f64) -> Result<(), ParamError> {
    if !value.is_finite() {
        return Err(ParamError::NotFinite { name, value });
    }
    if value < 0.0 {
        return Err(ParamError::Negative { name, value });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub c_vac: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            hbar: HBAR,
            c_vac: C_VAC,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<(), ParamError> {
        positive("hbar", self.hbar)?;
        positive("c_vac", self.c_vac)
    }
}

/// Geometry and spin content of the YIG sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereSpec {
    /// Spin density, m⁻³.
    pub rho: f64,
    /// Radius, m.
    pub radius: f64,
    /// Gyromagnetic ratio, rad·s⁻¹·T⁻¹.
    pub gamma_g: f64,
}

impl SphereSpec {
    pub fn validate(&self) -> Result<(), ParamError> {
        // Zero density is allowed: it describes an empty sphere and gives N = 0.
        non_negative("rho", self.rho)?;
        positive("radius", self.radius)?;
        positive("gamma_g", self.gamma_g)
    }

    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * PI * self.radius.powi(3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinCount {
    /// Number of spins `N = ρV`.
    pub n: f64,
    /// Total spin `S = 5N/2`.
    pub s: f64,
}

/// Spin count of the sphere.
///
/// Note: for ρ = 4.22×10²⁷ m⁻³ and a 125 μm radius this gives
/// S ≈ 8.6×10¹⁶, not the 7.07×10¹⁴ quoted in the literature for the
/// same sphere. The formula value is returned.
pub fn derive_spin_count(sphere: &SphereSpec) -> SpinCount {
    let n = sphere.rho * sphere.volume();
    SpinCount { n, s: 2.5 * n }
}

/// Magnon drive Rabi frequency from the drive field amplitude,
/// `ε_m = (√(5N)/4)·γ_g·H_d`.
pub fn rabi_from_field(sphere: &SphereSpec, h_d: f64) -> Result<f64, ParamError> {
    non_negative("H_d", h_d)?;
    let n = derive_spin_count(sphere).n;
    Ok((5.0 * n).sqrt() / 4.0 * sphere.gamma_g * h_d)
}

/// Magnon drive Rabi frequency from drive power using the input-output
/// relation `ε_m = √(2κ_m℘/(ħω_d))`.
pub fn rabi_from_power(
    power: f64,
    kappa_m: f64,
    omega_d: f64,
    constants: &PhysicalConstants,
) -> Result<f64, ParamError> {
    non_negative("power", power)?;
    positive("kappa_m", kappa_m)?;
    positive("omega_d", omega_d)?;
    Ok((2.0 * kappa_m * power / (constants.hbar * omega_d)).sqrt())
}

/// Inverse of [`rabi_from_power`].
pub fn power_for_rabi(
    epsilon_m: f64,
    kappa_m: f64,
    omega_d: f64,
    constants: &PhysicalConstants,
) -> Result<f64, ParamError> {
    non_negative("epsilon_m", epsilon_m)?;
    positive("kappa_m", kappa_m)?;
    positive("omega_d", omega_d)?;
    Ok(epsilon_m * epsilon_m * constants.hbar * omega_d / (2.0 * kappa_m))
}

/// How the magnon drive strength is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DriveSpec {
    /// Drive field amplitude `H_d` in tesla.
    Field { h_d: f64 },
    /// Drive power `℘` in watts.
    Power { watts: f64 },
}

impl DriveSpec {
    pub fn validate(&self) -> Result<(), ParamError> {
        match *self {
            DriveSpec::Field { h_d } => positive("H_d", h_d),
            DriveSpec::Power { watts } => non_negative("power", watts),
        }
    }
}

/// Which magnon detuning the configured `ω_m − ω_d` refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetuningConvention {
    /// `ω_m − ω_d` is the effective detuning Δ_m after the magnetostrictive
    /// pull; the bare magnon frequency is understood to be retuned so that
    /// the pulled detuning lands on the configured value.
    #[default]
    Effective,
    /// `ω_m − ω_d` is the bare detuning Δ_m⁰; the pull is solved
    /// self-consistently.
    Bare,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega_c: f64,
    pub omega_m: f64,
    pub omega_b: f64,
    pub kappa_c: f64,
    pub kappa_m: f64,
    pub gamma_b: f64,
    /// Magnon–photon coupling Γ.
    pub coupling: f64,
    /// Single-magnon magnomechanical coupling g_mb.
    pub g_mb: f64,
    pub omega_d: f64,
    pub drive: DriveSpec,
    pub sphere: SphereSpec,
    /// Length `l` of the moving medium, m.
    pub medium_length: f64,
    pub constants: PhysicalConstants,
    pub assume_sideband_resolved: bool,
    pub detuning_convention: DetuningConvention,
}

impl SystemParams {
    /// Parameter set used for the published spectra: ω_c = 2π×10 GHz,
    /// ω_b = 2π×15 MHz, κ_c = 2π×2.1 MHz, κ_m = 2π×0.1 MHz,
    /// Γ = 2π×3.2 MHz, γ_b = 10⁻⁵ω_b, g_mb = 2π×0.3 Hz, H_d = 1.3×10⁻⁴ T,
    /// γ_g = 2π×28 GHz/T, r = 125 μm, ρ = 4.22×10²⁷ m⁻³.
    ///
    /// The drive is tuned to the red sideband with Δ_c = Δ_m = ω_b. The
    /// medium length has no published value and must be supplied.
    pub fn reference(medium_length: f64) -> Self {
        let two_pi = 2.0 * PI;
        let omega_c = two_pi * 10e9;
        let omega_b = two_pi * 15e6;
        let omega_d = omega_c - omega_b;
        Self {
            omega_c,
            omega_m: omega_d + omega_b,
            omega_b,
            kappa_c: two_pi * 2.1e6,
            kappa_m: two_pi * 0.1e6,
            gamma_b: 1e-5 * omega_b,
            coupling: two_pi * 3.2e6,
            g_mb: two_pi * 0.3,
            omega_d,
            drive: DriveSpec::Field { h_d: 1.3e-4 },
            sphere: SphereSpec {
                rho: 4.22e27,
                radius: 125e-6,
                gamma_g: two_pi * 28e9,
            },
            medium_length,
            constants: PhysicalConstants::default(),
            assume_sideband_resolved: true,
            detuning_convention: DetuningConvention::Effective,
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        positive("omega_c", self.omega_c)?;
        positive("omega_m", self.omega_m)?;
        positive("omega_b", self.omega_b)?;
        positive("kappa_c", self.kappa_c)?;
        positive("kappa_m", self.kappa_m)?;
        positive("gamma_b", self.gamma_b)?;
        non_negative("Gamma", self.coupling)?;
        non_negative("g_mb", self.g_mb)?;
        positive("omega_d", self.omega_d)?;
        positive("medium_length", self.medium_length)?;
        self.drive.validate()?;
        self.sphere.validate()?;
        self.constants.validate()?;
        if self.assume_sideband_resolved
            && !(self.omega_b > self.kappa_m && self.omega_b > self.kappa_c)
        {
            return Err(ParamError::SidebandNotResolved {
                omega_b: self.omega_b,
                kappa_c: self.kappa_c,
                kappa_m: self.kappa_m,
            });
        }
        Ok(())
    }

    /// Δ_c = ω_c − ω_d.
    pub fn delta_c(&self) -> f64 {
        self.omega_c - self.omega_d
    }

    /// Configured magnon detuning ω_m − ω_d. Whether this is the bare or the
    /// pulled value depends on [`DetuningConvention`].
    pub fn delta_m(&self) -> f64 {
        self.omega_m - self.omega_d
    }

    /// Absolute probe frequency for an effective probe detuning σ.
    pub fn probe_frequency(&self, sigma: f64) -> f64 {
        self.omega_d + self.omega_b + sigma
    }

    pub fn spin_count(&self) -> SpinCount {
        derive_spin_count(&self.sphere)
    }

    /// Magnon drive Rabi frequency ε_m implied by the drive settings.
    pub fn epsilon_m(&self) -> Result<f64, ParamError> {
        match self.drive {
            DriveSpec::Field { h_d } => rabi_from_field(&self.sphere, h_d),
            DriveSpec::Power { watts } => {
                rabi_from_power(watts, self.kappa_m, self.omega_d, &self.constants)
            }
        }
    }
}
