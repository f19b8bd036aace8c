//! Self-consistent steady state of the driven magnon mode.
//!
//! With the probe off and all time derivatives zero, the mean-field
//! equations of motion read
//!
//! ```text
//! 0 = −(iΔ_c + κ_c) c − iΓ m
//! 0 = −(iΔ_m⁰ + κ_m) m − iΓ c − i g_mb m (b + b*) + ε_m
//! 0 = −(γ_b + iω_b) b − i g_mb |m|²
//! ```
//!
//! The phonon displacement pulls the magnon detuning to
//! `Δ_m = Δ_m⁰ + g_mb (b + b*) = Δ_m⁰ − K|m|²` with
//! `K = 2 g_mb² ω_b / (ω_b² + γ_b²)`. Eliminating `c` and `b` leaves
//! `x |ζ_c ζ_m(x) + Γ²|² = ε_m² |ζ_c|²` for `x = |m|²`, a real cubic.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cubic;
use crate::params::{DetuningConvention, SystemParams};

/// Normalized residual every returned state must satisfy.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;
/// Relative imaginary part above which a cubic root is treated as complex.
const IMAG_ROOT_TOLERANCE: f64 = 1e-8;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SteadyError {
    #[error("the steady-state cubic has no non-negative real root")]
    NoPhysicalRoot,
    #[error("steady-state residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },
    #[error("drive amplitude must be finite and non-negative, got {0}")]
    InvalidDrive(f64),
}

/// Which physical root to keep when the cubic is bistable.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchPolicy {
    /// Smallest |m_s|² (lower branch).
    #[default]
    Lowest,
    Highest,
    /// Root closest to the previous point's |m_s|². Falls back to the
    /// lowest root when there is no previous point.
    Continuation { previous: Option<f64> },
}

/// Position of the selected root among the physical roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Single,
    Lower,
    Middle,
    Upper,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Single => "single",
            Branch::Lower => "lower",
            Branch::Middle => "middle",
            Branch::Upper => "upper",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "single" => Branch::Single,
            "lower" => Branch::Lower,
            "middle" => Branch::Middle,
            "upper" => Branch::Upper,
            _ => return None,
        })
    }
}

/// Coefficients of `c3 x³ + c2 x² + c1 x + c0 = 0` in `x = |m_s|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicCoefficients {
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl CubicCoefficients {
    pub fn ascending(&self) -> [f64; 4] {
        [self.c0, self.c1, self.c2, self.c3]
    }

    /// `|f(x)| / Σ|terms|`.
    pub fn relative_residual(&self, x: f64) -> f64 {
        let (f, scale) = cubic::eval_with_scale(self.ascending(), x);
        if scale == 0.0 {
            0.0
        } else {
            f.abs() / scale
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub m_s: Complex64,
    pub c_s: Complex64,
    pub b_s: Complex64,
    /// Magnon detuning after the magnetostrictive pull, Δ_m.
    pub delta_m_eff: f64,
    /// Bare magnon detuning Δ_m⁰ the state solves the equations against.
    pub delta_m_bare: f64,
    /// All physical roots |m_s|², ascending.
    pub roots: Vec<f64>,
    /// Number of physical roots counted with multiplicity (1 or 3).
    pub root_count: usize,
    pub branch: Branch,
    /// Normalized stationary residual, see [`stationary_residual`].
    pub residual: f64,
}

impl SteadyState {
    /// Effective magnomechanical coupling `G_mb = g_mb·m_s`.
    pub fn g_eff(&self, params: &SystemParams) -> Complex64 {
        params.g_mb * self.m_s
    }

    /// Magnon number |m_s|².
    pub fn magnon_number(&self) -> f64 {
        self.m_s.norm_sqr()
    }
}

/// `K` in `Δ_m = Δ_m⁰ − K|m_s|²`.
pub fn pull_coefficient(params: &SystemParams) -> f64 {
    let (wb, gb, g) = (params.omega_b, params.gamma_b, params.g_mb);
    2.0 * g * g * wb / (wb * wb + gb * gb)
}

fn zeta_c(params: &SystemParams) -> Complex64 {
    Complex64::new(params.kappa_c, params.delta_c())
}

/// Magnon amplitude for a given effective magnon detuning.
fn magnon_amplitude(params: &SystemParams, epsilon_m: f64, delta_m: f64) -> Complex64 {
    let zc = zeta_c(params);
    let zm = Complex64::new(params.kappa_m, delta_m);
    epsilon_m * zc / (zc * zm + params.coupling * params.coupling)
}

/// Cubic in `x = |m_s|²` for the bare magnon detuning `ω_m − ω_d`.
///
/// Writing `D = ζ_c ζ_m + Γ²` and `A = κ_c κ_m + Γ²`,
/// `|D|² = |ζ_c|² Δ_m² − 2Δ_c Γ² Δ_m + A² + Δ_c² κ_m²`, which with
/// `Δ_m = Δ_m⁰ − K x` is quadratic in `x`.
pub fn steady_cubic_coefficients(params: &SystemParams, epsilon_m: f64) -> CubicCoefficients {
    let zc2 = zeta_c(params).norm_sqr();
    let dc = params.delta_c();
    let d0 = params.delta_m();
    let gamma2 = params.coupling * params.coupling;
    let a = params.kappa_c * params.kappa_m + gamma2;
    let p2 = zc2;
    let p1 = -2.0 * dc * gamma2;
    let p0 = a * a + dc * dc * params.kappa_m * params.kappa_m;
    let k = pull_coefficient(params);
    CubicCoefficients {
        c3: p2 * k * k,
        c2: -k * (2.0 * p2 * d0 + p1),
        c1: (p2 * d0 + p1) * d0 + p0,
        c0: -epsilon_m * epsilon_m * zc2,
    }
}

/// Physical (non-negative, real) roots of the cubic, ascending.
fn physical_roots(coeffs: &CubicCoefficients) -> Vec<f64> {
    let mut out: Vec<f64> = cubic::roots(coeffs.ascending())
        .into_iter()
        .filter(|z| z.re >= 0.0 && z.im.abs() <= IMAG_ROOT_TOLERANCE * z.re.abs())
        .map(|z| z.re)
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

fn select(roots: &[f64], policy: BranchPolicy) -> usize {
    match policy {
        BranchPolicy::Lowest | BranchPolicy::Continuation { previous: None } => 0,
        BranchPolicy::Highest => roots.len() - 1,
        BranchPolicy::Continuation {
            previous: Some(prev),
        } => roots
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - prev).abs().total_cmp(&(b.1 - prev).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0),
    }
}

fn branch_label(index: usize, count: usize) -> Branch {
    if count <= 1 {
        return Branch::Single;
    }
    match index {
        0 => Branch::Lower,
        i if i + 1 == count => Branch::Upper,
        _ => Branch::Middle,
    }
}

/// Assemble the three amplitudes from the magnon amplitude.
fn assemble(
    params: &SystemParams,
    m_s: Complex64,
    delta_m_bare: f64,
) -> (Complex64, Complex64, f64) {
    let g = params.g_mb;
    let b_s = -I * g * m_s.norm_sqr() / Complex64::new(params.gamma_b, params.omega_b);
    let c_s = -I * params.coupling * m_s / zeta_c(params);
    let delta_m_eff = delta_m_bare + 2.0 * g * b_s.re;
    (b_s, c_s, delta_m_eff)
}

/// Solve the steady state and select a root according to `policy`.
pub fn solve_steady(
    params: &SystemParams,
    epsilon_m: f64,
    policy: BranchPolicy,
) -> Result<SteadyState, SteadyError> {
    if !(epsilon_m.is_finite() && epsilon_m >= 0.0) {
        return Err(SteadyError::InvalidDrive(epsilon_m));
    }

    let (m_s, delta_m_bare, roots, root_count, branch) = match params.detuning_convention {
        DetuningConvention::Effective => {
            let m_s = magnon_amplitude(params, epsilon_m, params.delta_m());
            let bare = params.delta_m() + pull_coefficient(params) * m_s.norm_sqr();
            (m_s, bare, vec![m_s.norm_sqr()], 1, Branch::Single)
        }
        DetuningConvention::Bare => {
            let bare = params.delta_m();
            let roots = if epsilon_m == 0.0 {
                // x |D(x)|² = 0 and |D|² > 0, so zero is the only root.
                vec![0.0]
            } else {
                physical_roots(&steady_cubic_coefficients(params, epsilon_m))
            };
            if roots.is_empty() {
                return Err(SteadyError::NoPhysicalRoot);
            }
            let idx = select(&roots, policy);
            let x = roots[idx];
            let mut m_s = magnon_amplitude(params, epsilon_m, bare - pull_coefficient(params) * x);
            // Newton step on the scalar self-consistency x = |m(x)|²; the
            // polished root already satisfies it to rounding, so this only
            // removes the last-ulp mismatch between x and |m_s|².
            let x1 = m_s.norm_sqr();
            if x1 != x && x > 0.0 {
                m_s = magnon_amplitude(params, epsilon_m, bare - pull_coefficient(params) * x1);
            }
            let count = roots.len();
            let branch = branch_label(idx, count);
            (m_s, bare, roots, count, branch)
        }
    };

    let (b_s, c_s, delta_m_eff) = assemble(params, m_s, delta_m_bare);
    let mut state = SteadyState {
        m_s,
        c_s,
        b_s,
        delta_m_eff,
        delta_m_bare,
        roots,
        root_count,
        branch,
        residual: 0.0,
    };
    state.residual = stationary_residual(params, epsilon_m, &state);
    if state.residual >= RESIDUAL_TOLERANCE {
        return Err(SteadyError::ResidualTooLarge {
            residual: state.residual,
            tolerance: RESIDUAL_TOLERANCE,
        });
    }
    Ok(state)
}

fn normalized(terms: &[Complex64]) -> f64 {
    let sum: Complex64 = terms.iter().sum();
    let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        0.0
    } else {
        sum.norm() / scale
    }
}

/// Max over the three stationary equations of `|RHS| / max|term|`.
///
/// The magnon equation uses the state's own bare detuning, so states from
/// either detuning convention are checked against the equations they solve.
pub fn stationary_residual(params: &SystemParams, epsilon_m: f64, state: &SteadyState) -> f64 {
    let (m, c, b) = (state.m_s, state.c_s, state.b_s);
    let g = params.g_mb;
    let gamma = params.coupling;
    let cavity = [-zeta_c(params) * c, -I * gamma * m];
    let magnon = [
        -Complex64::new(params.kappa_m, state.delta_m_bare) * m,
        -I * gamma * c,
        -I * g * m * (2.0 * b.re),
        Complex64::new(epsilon_m, 0.0),
    ];
    let phonon = [
        -Complex64::new(params.gamma_b, params.omega_b) * b,
        -I * g * m.norm_sqr(),
    ];
    normalized(&cavity)
        .max(normalized(&magnon))
        .max(normalized(&phonon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::DriveSpec;

    fn reference_bare() -> SystemParams {
        let mut p = SystemParams::reference(0.01);
        p.detuning_convention = DetuningConvention::Bare;
        p
    }

    fn eps_for_power(p: &SystemParams, watts: f64) -> f64 {
        let mut q = *p;
        q.drive = DriveSpec::Power { watts };
        q.epsilon_m().unwrap()
    }

    #[test]
    fn no_pull_is_linear() {
        let mut p = reference_bare();
        p.g_mb = 0.0;
        let eps = 1e10;
        let c = steady_cubic_coefficients(&p, eps);
        assert_eq!((c.c3, c.c2), (0.0, 0.0));
        let zc = Complex64::new(p.kappa_c, p.delta_c());
        let zm = Complex64::new(p.kappa_m, p.delta_m());
        let expected = eps * eps * zc.norm_sqr() / (zc * zm + p.coupling * p.coupling).norm_sqr();
        assert!(((-c.c0 / c.c1 - expected) / expected).abs() < 1e-14);
    }

    #[test]
    fn zero_drive_gives_zero_state() {
        for conv in [DetuningConvention::Bare, DetuningConvention::Effective] {
            let mut p = SystemParams::reference(0.01);
            p.detuning_convention = conv;
            assert_eq!(steady_cubic_coefficients(&p, 0.0).c0, 0.0);
            let s = solve_steady(&p, 0.0, BranchPolicy::Lowest).unwrap();
            assert_eq!(s.m_s, Complex64::new(0.0, 0.0));
            assert_eq!(s.c_s, Complex64::new(0.0, 0.0));
            assert_eq!(s.b_s.norm(), 0.0);
            assert_eq!(s.root_count, 1);
            assert_eq!(s.residual, 0.0);
        }
    }

    #[test]
    fn decoupled_driven_magnon() {
        let mut p = reference_bare();
        p.g_mb = 0.0;
        p.coupling = 0.0;
        let eps = 3e12;
        let s = solve_steady(&p, eps, BranchPolicy::Lowest).unwrap();
        let expected = eps / Complex64::new(p.kappa_m, p.delta_m());
        assert!((s.m_s - expected).norm() / expected.norm() < 1e-14);
        assert_eq!(s.c_s.norm(), 0.0);
        assert_eq!(s.b_s.norm(), 0.0);
    }

    #[test]
    fn amplitudes_are_mutually_consistent() {
        let p = reference_bare();
        let eps = eps_for_power(&p, 15e-3);
        let s = solve_steady(&p, eps, BranchPolicy::Lowest).unwrap();
        let b = -I * p.g_mb * s.m_s.norm_sqr() / Complex64::new(p.gamma_b, p.omega_b);
        let c = -I * p.coupling * s.m_s / Complex64::new(p.kappa_c, p.delta_c());
        assert_eq!(s.b_s, b);
        assert_eq!(s.c_s, c);
        assert!(s.residual < RESIDUAL_TOLERANCE);
        let coeffs = steady_cubic_coefficients(&p, eps);
        assert!(coeffs.relative_residual(s.magnon_number()) < 1e-12);
    }

    #[test]
    fn zero_state_residual_is_one() {
        let p = reference_bare();
        let zero = SteadyState {
            m_s: Complex64::new(0.0, 0.0),
            c_s: Complex64::new(0.0, 0.0),
            b_s: Complex64::new(0.0, 0.0),
            delta_m_eff: p.delta_m(),
            delta_m_bare: p.delta_m(),
            roots: vec![0.0],
            root_count: 1,
            branch: Branch::Single,
            residual: 0.0,
        };
        assert_eq!(stationary_residual(&p, 1e12, &zero), 1.0);
    }

    #[test]
    fn perturbed_state_is_detected() {
        let p = reference_bare();
        let eps = eps_for_power(&p, 3e-3);
        let mut s = solve_steady(&p, eps, BranchPolicy::Lowest).unwrap();
        s.m_s *= 1.01;
        assert!(stationary_residual(&p, eps, &s) > 1e-4);
    }

    #[test]
    fn effective_convention_holds_pulled_detuning() {
        let p = SystemParams::reference(0.01);
        let eps = eps_for_power(&p, 15e-3);
        let s = solve_steady(&p, eps, BranchPolicy::Lowest).unwrap();
        assert!((s.delta_m_eff - p.delta_m()).abs() <= 1e-9 * p.omega_b);
        assert!(s.delta_m_bare > s.delta_m_eff);
        assert!(s.residual < RESIDUAL_TOLERANCE);
    }

    /// Strongly pulled parameters with three physical roots.
    fn bistable() -> (SystemParams, f64) {
        let mut p = reference_bare();
        p.coupling = 0.0;
        p.g_mb = 2.0e3;
        // Detuning from the bare magnon resonance in units of κ_m is large,
        // and the pull K·x sweeps Δ_m through zero within the drive range.
        let eps = 4.0e11;
        (p, eps)
    }

    #[test]
    fn bistable_root_bookkeeping() {
        let (p, eps) = bistable();
        let low = solve_steady(&p, eps, BranchPolicy::Lowest).unwrap();
        assert_eq!(low.root_count, 3, "roots {:?}", low.roots);
        assert_eq!(low.branch, Branch::Lower);
        let high = solve_steady(&p, eps, BranchPolicy::Highest).unwrap();
        assert_eq!(high.branch, Branch::Upper);
        assert!(high.magnon_number() > low.magnon_number());
        let mid = solve_steady(
            &p,
            eps,
            BranchPolicy::Continuation {
                previous: Some(low.roots[1]),
            },
        )
        .unwrap();
        assert_eq!(mid.branch, Branch::Middle);
        for s in [&low, &mid, &high] {
            assert!(s.residual < RESIDUAL_TOLERANCE, "{}", s.residual);
        }
    }

    #[test]
    fn invalid_drive_rejected() {
        let p = reference_bare();
        assert_eq!(
            solve_steady(&p, -1.0, BranchPolicy::Lowest),
            Err(SteadyError::InvalidDrive(-1.0))
        );
    }
}
