//! Linear response to a weak cavity probe.
//!
//! Around the steady state the fluctuations obey
//!
//! ```text
//! δċ = −κ_c δc − iΓ δm + ε_p
//! δṁ = −κ_m δm − iΓ δc − i G_mb δb
//! δḃ = −γ_b δb − i G_mb* δm
//! ```
//!
//! with `G_mb = g_mb·m_s`. Keeping the component at the probe frequency,
//! `z₊` with `α_z = κ_z − iσ`, gives
//!
//! ```text
//! c₊ = (α_m α_b + |G_mb|²) ε_p / (α_c (α_m α_b + |G_mb|²) + Γ² α_b)
//! ```
//!
//! The output field `ε_T = 2κ_c c₊/ε_p` is used directly as the
//! susceptibility χ, so `n_r = 1 + 2πχ` and
//! `n_g = n_r + 2π ω_p dχ/dω_p`. With this normalization Re χ is the
//! absorption quadrature and Im χ the dispersion quadrature.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;
use crate::params::SystemParams;

const I: Complex64 = Complex64::new(0.0, 1.0);
/// Relative size below which the response denominator counts as a pole.
const POLE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResponseError {
    #[error("probe response is singular at sigma = {sigma:.6e} rad/s")]
    SingularResponse { sigma: f64 },
    #[error("refractive index magnitude {0:.3e} is too small to invert")]
    NonphysicalIndex(f64),
    #[error("probe amplitude must be positive, got {0}")]
    InvalidProbe(f64),
}

/// Which quadrature of `(n_g − 1/n_r)` sets the headline lateral drag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DragQuadrature {
    /// Im part: the dispersive quadrature under the χ = ε_T normalization.
    #[default]
    Dispersive,
    /// Re part.
    Real,
}

impl DragQuadrature {
    pub fn project(self, z: Complex64) -> f64 {
        match self {
            DragQuadrature::Dispersive => z.im,
            DragQuadrature::Real => z.re,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LightDrag {
    /// Headline lateral displacement Δx, m.
    pub displacement: f64,
    /// Full complex `(n_g − 1/n_r)·v·l/c`, for diagnostics.
    pub complex: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeResponse {
    /// Effective probe detuning σ = δ_p − ω_b, rad/s.
    pub sigma: f64,
    pub c_plus: Complex64,
    pub eps_t: Complex64,
    pub chi: Complex64,
    pub n_r: Complex64,
    pub n_g: Complex64,
    pub drag: Option<LightDrag>,
}

fn alphas(params: &SystemParams, sigma: f64) -> (Complex64, Complex64, Complex64) {
    (
        Complex64::new(params.kappa_c, -sigma),
        Complex64::new(params.kappa_m, -sigma),
        Complex64::new(params.gamma_b, -sigma),
    )
}

/// Numerator and denominator of `c₊/ε_p`.
fn fraction(params: &SystemParams, g_eff: Complex64, sigma: f64) -> (Complex64, Complex64, f64) {
    let (ac, am, ab) = alphas(params, sigma);
    let gamma2 = params.coupling * params.coupling;
    let num = am * ab + g_eff.norm_sqr();
    let lhs = ac * num;
    let rhs = gamma2 * ab;
    (num, lhs + rhs, lhs.norm() + rhs.norm())
}

fn check_pole(den: Complex64, scale: f64, sigma: f64) -> Result<(), ResponseError> {
    let mag = den.norm();
    if !mag.is_finite() || mag <= 1e-300 || mag <= POLE_TOLERANCE * scale {
        return Err(ResponseError::SingularResponse { sigma });
    }
    Ok(())
}

/// Intracavity probe sideband amplitude `c₊` from the closed-form solution.
pub fn probe_response_closed(
    params: &SystemParams,
    g_eff: Complex64,
    sigma: f64,
    eps_p: f64,
) -> Result<Complex64, ResponseError> {
    let (num, den, scale) = fraction(params, g_eff, sigma);
    check_pole(den, scale, sigma)?;
    Ok(num * eps_p / den)
}

/// The three coupled sideband equations over `(c₊, m₊, b₊)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSystem3 {
    pub matrix: [[Complex64; 3]; 3],
    pub drive: [Complex64; 3],
}

impl LinearSystem3 {
    pub fn new(params: &SystemParams, g_eff: Complex64, sigma: f64, eps_p: f64) -> Self {
        let (ac, am, ab) = alphas(params, sigma);
        let gamma = Complex64::new(params.coupling, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self {
            matrix: [
                [ac, I * gamma, zero],
                [I * gamma, am, I * g_eff],
                [zero, I * g_eff.conj(), ab],
            ],
            drive: [Complex64::new(eps_p, 0.0), zero, zero],
        }
    }

    pub fn solve(&self) -> Option<[Complex64; 3]> {
        linalg::solve(self.matrix, self.drive)
    }
}

/// `c₊` by direct solution of the sideband equations.
pub fn probe_response_matrix(
    params: &SystemParams,
    g_eff: Complex64,
    sigma: f64,
    eps_p: f64,
) -> Result<Complex64, ResponseError> {
    LinearSystem3::new(params, g_eff, sigma, eps_p)
        .solve()
        .map(|x| x[0])
        .filter(|c| c.re.is_finite() && c.im.is_finite())
        .ok_or(ResponseError::SingularResponse { sigma })
}

/// `ε_T = 2κ_c c₊/ε_p`.
pub fn output_amplitude(
    c_plus: Complex64,
    kappa_c: f64,
    eps_p: f64,
) -> Result<Complex64, ResponseError> {
    if !(eps_p > 0.0 && eps_p.is_finite()) {
        return Err(ResponseError::InvalidProbe(eps_p));
    }
    Ok(2.0 * kappa_c * c_plus / eps_p)
}

/// Susceptibility χ = ε_T at unit probe amplitude.
pub fn susceptibility(
    params: &SystemParams,
    g_eff: Complex64,
    sigma: f64,
) -> Result<Complex64, ResponseError> {
    let c_plus = probe_response_closed(params, g_eff, sigma, 1.0)?;
    Ok(2.0 * params.kappa_c * c_plus)
}

/// Analytic dχ/dσ.
///
/// Written as `χ = 2κ_c/E` with `E = α_c + Γ²α_b/N` and
/// `N = α_m α_b + |G|²` (never zero for real σ). Since `dα_z/dσ = −i`,
/// `dE/dσ = −i + iΓ²(α_b² − |G|²)/N²` and `dχ/dσ = −2κ_c E'/E²`.
pub fn susceptibility_derivative(
    params: &SystemParams,
    g_eff: Complex64,
    sigma: f64,
) -> Result<Complex64, ResponseError> {
    let (ac, _, ab) = alphas(params, sigma);
    let (num, den, scale) = fraction(params, g_eff, sigma);
    check_pole(den, scale, sigma)?;
    let gamma2 = params.coupling * params.coupling;
    let e = ac + gamma2 * ab / num;
    let de = -I + I * gamma2 * (ab * ab - g_eff.norm_sqr()) / (num * num);
    Ok(-2.0 * params.kappa_c * de / (e * e))
}

/// `n_r = 1 + 2πχ`.
pub fn refractive_index(chi: Complex64) -> Complex64 {
    1.0 + 2.0 * PI * chi
}

/// `n_g = n_r + 2π ω_probe dχ/dσ`, derivative taken analytically.
pub fn group_index(
    params: &SystemParams,
    g_eff: Complex64,
    sigma: f64,
    omega_probe: f64,
) -> Result<Complex64, ResponseError> {
    let chi = susceptibility(params, g_eff, sigma)?;
    let dchi = susceptibility_derivative(params, g_eff, sigma)?;
    Ok(refractive_index(chi) + 2.0 * PI * omega_probe * dchi)
}

/// Same as [`group_index`] with a central difference of step `h` (rad/s).
pub fn group_index_fd(
    params: &SystemParams,
    g_eff: Complex64,
    sigma: f64,
    omega_probe: f64,
    h: f64,
) -> Result<Complex64, ResponseError> {
    let chi = susceptibility(params, g_eff, sigma)?;
    let plus = susceptibility(params, g_eff, sigma + h)?;
    let minus = susceptibility(params, g_eff, sigma - h)?;
    let dchi = (plus - minus) / (2.0 * h);
    Ok(refractive_index(chi) + 2.0 * PI * omega_probe * dchi)
}

/// Lateral drag `Δx = (n_g − 1/n_r)·v·l/c`, projected on `quadrature`.
pub fn light_drag(
    n_r: Complex64,
    n_g: Complex64,
    velocity: f64,
    length: f64,
    c_vac: f64,
    quadrature: DragQuadrature,
) -> Result<LightDrag, ResponseError> {
    if n_r.norm() < 1e-12 {
        return Err(ResponseError::NonphysicalIndex(n_r.norm()));
    }
    let complex = (n_g - 1.0 / n_r) * (velocity * length / c_vac);
    Ok(LightDrag {
        displacement: quadrature.project(complex),
        complex,
    })
}

/// Full response record at one probe detuning.
///
/// `velocity` enables the drag entry; the medium length comes from
/// `params`.
pub fn probe_response(
    params: &SystemParams,
    g_eff: Complex64,
    sigma: f64,
    eps_p: f64,
    velocity: Option<f64>,
    quadrature: DragQuadrature,
) -> Result<ProbeResponse, ResponseError> {
    let c_plus = probe_response_closed(params, g_eff, sigma, eps_p)?;
    let eps_t = output_amplitude(c_plus, params.kappa_c, eps_p)?;
    let chi = eps_t;
    let n_r = refractive_index(chi);
    let dchi = susceptibility_derivative(params, g_eff, sigma)?;
    let n_g = n_r + 2.0 * PI * params.probe_frequency(sigma) * dchi;
    let drag = velocity
        .map(|v| {
            light_drag(
                n_r,
                n_g,
                v,
                params.medium_length,
                params.constants.c_vac,
                quadrature,
            )
        })
        .transpose()?;
    Ok(ProbeResponse {
        sigma,
        c_plus,
        eps_t,
        chi,
        n_r,
        n_g,
        drag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> SystemParams {
        SystemParams::reference(0.01)
    }

    fn zero() -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    #[test]
    fn bare_cavity_limit() {
        let mut p = params();
        p.coupling = 0.0;
        for sigma in [-3e6, 0.0, 1e7] {
            let c = probe_response_closed(&p, zero(), sigma, 2.5).unwrap();
            let want = 2.5 / Complex64::new(p.kappa_c, -sigma);
            assert!((c - want).norm() / want.norm() < 1e-15);
            let m = probe_response_matrix(&p, zero(), sigma, 2.5).unwrap();
            assert!((m - want).norm() / want.norm() < 1e-15);
        }
        let chi = susceptibility(&p, zero(), 0.0).unwrap();
        assert!((chi - 2.0).norm() < 1e-15);
    }

    #[test]
    fn transparency_floor_at_resonance() {
        let p = params();
        let chi = susceptibility(&p, zero(), 0.0).unwrap();
        let (kc, km, g) = (p.kappa_c, p.kappa_m, p.coupling);
        let want = 2.0 * kc * km / (kc * km + g * g);
        assert!((chi.re - want).abs() < 1e-12);
        assert!(chi.im.abs() < 1e-12);
        // Hand evaluation: 2·2.1·0.1/(2.1·0.1 + 3.2²) ≈ 0.04019
        assert!((chi.re - 0.042 / (0.21 + 10.24) * 10.0).abs() < 1e-12);
    }

    #[test]
    fn output_amplitude_values() {
        assert_eq!(output_amplitude(zero(), 3.0, 1.0).unwrap(), zero());
        let eps_p = 0.7;
        let kc = 3.0;
        let c = Complex64::new(eps_p / (2.0 * kc), 0.0);
        assert!((output_amplitude(c, kc, eps_p).unwrap() - 1.0).norm() < 1e-15);
        assert!(output_amplitude(c, kc, 0.0).is_err());
    }

    #[test]
    fn probe_amplitude_drops_out() {
        let p = params();
        let g = Complex64::new(3e5, -1e5);
        for sigma in [-2e6, 0.0, 5e6] {
            let a = probe_response(&p, g, sigma, 1.0, Some(100.0), DragQuadrature::Dispersive)
                .unwrap();
            let b = probe_response(&p, g, sigma, 2.0, Some(100.0), DragQuadrature::Dispersive)
                .unwrap();
            assert!((a.eps_t - b.eps_t).norm() <= 1e-15 * a.eps_t.norm());
            assert!((a.n_g - b.n_g).norm() <= 1e-15 * a.n_g.norm());
            let (da, db) = (a.drag.unwrap(), b.drag.unwrap());
            assert!((da.displacement - db.displacement).abs() <= 1e-15 * da.displacement.abs());
            assert!((b.c_plus - 2.0 * a.c_plus).norm() <= 1e-15 * b.c_plus.norm());
        }
    }

    #[test]
    fn refractive_index_values() {
        assert_eq!(refractive_index(zero()), Complex64::new(1.0, 0.0));
        assert_eq!(refractive_index(I), Complex64::new(1.0, 2.0 * PI));
    }

    #[test]
    fn group_index_single_mode() {
        let mut p = params();
        p.coupling = 0.0;
        let omega = p.probe_frequency(0.0);
        let ng = group_index(&p, zero(), 0.0, omega).unwrap();
        let want = Complex64::new(1.0 + 4.0 * PI, 2.0 * PI * omega * 2.0 / p.kappa_c);
        assert!((ng - want).norm() / want.norm() < 1e-14);
    }

    #[test]
    fn drag_trivial_cases() {
        let one = Complex64::new(1.0, 0.0);
        let d = light_drag(one, one, 300.0, 0.01, 3e8, DragQuadrature::Real).unwrap();
        assert_eq!(d.displacement, 0.0);
        let n_r = Complex64::new(1.2, 0.3);
        let n_g = Complex64::new(5.0, -40.0);
        let d = light_drag(n_r, n_g, 0.0, 0.01, 3e8, DragQuadrature::Dispersive).unwrap();
        assert_eq!(d.displacement, 0.0);
        assert!(matches!(
            light_drag(zero(), n_g, 1.0, 1.0, 3e8, DragQuadrature::Real),
            Err(ResponseError::NonphysicalIndex(_))
        ));
    }

    #[test]
    fn pole_is_reported() {
        // Undamped bare cavity on resonance.
        let mut p = params();
        p.coupling = 0.0;
        p.kappa_c = 0.0;
        assert_eq!(
            probe_response_closed(&p, zero(), 0.0, 1.0),
            Err(ResponseError::SingularResponse { sigma: 0.0 })
        );
        assert!(probe_response_matrix(&p, zero(), 0.0, 1.0).is_err());
    }
}
