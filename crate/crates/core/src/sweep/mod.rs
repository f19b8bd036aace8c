//! Parameter sweeps over probe detuning, velocity, coupling or drive power.

mod features;
mod table_io;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{DriveSpec, ParamError, SystemParams};
use crate::response::{self, DragQuadrature, ResponseError};
use crate::steady::{self, Branch, BranchPolicy, SteadyError};

pub use features::{
    extract_features, window_width_trend, DragExtremum, FeatureError, FeatureReport, Luminality,
    Monotonicity, Peak, TrendParameter, WidthPoint, WidthTrend, Window,
};
pub use table_io::{read_csv, write_csv, write_gnuplot, Curve, TableIoError};

/// Probe amplitude used for sweeps; every reported quantity is independent
/// of it.
const PROBE_AMPLITUDE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// σ in units of ω_b.
    Sigma,
    /// Medium velocity in m/s.
    Velocity,
    /// Γ in units of ω_b.
    Coupling,
    /// Drive power in W.
    Power,
}

impl Axis {
    pub fn column_name(self) -> &'static str {
        match self {
            Axis::Sigma => "sigma",
            Axis::Velocity => "velocity",
            Axis::Coupling => "Gamma",
            Axis::Power => "power",
        }
    }

    pub fn from_column_name(s: &str) -> Option<Self> {
        Some(match s {
            "sigma" => Axis::Sigma,
            "velocity" => Axis::Velocity,
            "Gamma" => Axis::Coupling,
            "power" => Axis::Power,
            _ => return None,
        })
    }
}

/// A fixed parameter change applied to every sweep point, in axis-native
/// units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Override {
    /// Γ/ω_b.
    Coupling(f64),
    /// Drive power in W; switches the drive to power mode.
    Power(f64),
    /// σ/ω_b used when σ is not the swept axis.
    Sigma(f64),
    /// Medium velocity in m/s.
    Velocity(f64),
    /// Medium length in m.
    MediumLength(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: Axis,
    pub range: (f64, f64),
    pub samples: usize,
    pub base: SystemParams,
    pub overrides: Vec<Override>,
    pub branch: BranchPolicy,
    pub quadrature: DragQuadrature,
}

/// Everything needed to evaluate one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSetup {
    pub params: SystemParams,
    /// σ in rad/s.
    pub sigma: f64,
    pub velocity: Option<f64>,
}

impl SweepSpec {
    pub fn new(axis: Axis, range: (f64, f64), samples: usize, base: SystemParams) -> Self {
        Self {
            axis,
            range,
            samples,
            base,
            overrides: Vec::new(),
            branch: BranchPolicy::Lowest,
            quadrature: DragQuadrature::Dispersive,
        }
    }

    pub fn with_override(mut self, o: Override) -> Self {
        self.overrides.push(o);
        self
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let (lo, hi) = self.range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(SweepError::InvalidSpec(format!(
                "range must satisfy lo < hi, got [{lo}, {hi}]"
            )));
        }
        if self.samples < 2 {
            return Err(SweepError::InvalidSpec(format!(
                "samples must be at least 2, got {}",
                self.samples
            )));
        }
        self.fixed_setup().params.validate()?;
        Ok(())
    }

    /// Axis values; exactly `lo` and `hi` at the ends and mirror-symmetric
    /// when `lo = −hi`.
    pub fn grid(&self) -> Vec<f64> {
        let (lo, hi) = self.range;
        let n = self.samples;
        let center = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let denom = (n - 1) as f64;
        (0..n)
            .map(|i| match i {
                0 => lo,
                i if i == n - 1 => hi,
                i => center + half * ((2 * i) as f64 - denom) / denom,
            })
            .collect()
    }

    /// Parameters at one axis value: base, then overrides in order, then
    /// the axis value itself.
    pub fn point(&self, axis_value: f64) -> PointSetup {
        let mut setup = self.fixed_setup();
        let axis_override = match self.axis {
            Axis::Sigma => Override::Sigma(axis_value),
            Axis::Velocity => Override::Velocity(axis_value),
            Axis::Coupling => Override::Coupling(axis_value),
            Axis::Power => Override::Power(axis_value),
        };
        apply(&mut setup, axis_override);
        setup
    }

    /// Base with the overrides applied, before the axis value.
    fn fixed_setup(&self) -> PointSetup {
        let mut setup = PointSetup {
            params: self.base,
            sigma: 0.0,
            velocity: None,
        };
        for o in &self.overrides {
            apply(&mut setup, *o);
        }
        setup
    }

    /// Value of a family parameter at this spec (Γ/ω_b or power in W).
    pub fn parameter_value(&self, param: TrendParameter) -> Option<f64> {
        let setup = self.fixed_setup();
        let p = &setup.params;
        match param {
            TrendParameter::Coupling if self.axis != Axis::Coupling => {
                Some(p.coupling / p.omega_b)
            }
            TrendParameter::Power if self.axis != Axis::Power => match p.drive {
                DriveSpec::Power { watts } => Some(watts),
                DriveSpec::Field { .. } => None,
            },
            _ => None,
        }
    }
}

fn apply(setup: &mut PointSetup, o: Override) {
    let p = &mut setup.params;
    match o {
        Override::Coupling(g) => p.coupling = g * p.omega_b,
        Override::Power(w) => p.drive = DriveSpec::Power { watts: w },
        Override::Sigma(s) => setup.sigma = s * p.omega_b,
        Override::Velocity(v) => setup.velocity = Some(v),
        Override::MediumLength(l) => p.medium_length = l,
    }
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("{failed} of {total} sweep points failed")]
    TooManyFailures { failed: usize, total: usize },
}

/// Why a row carries no values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowFailure {
    InvalidParams,
    NoPhysicalRoot,
    ResidualTooLarge,
    Singular,
    NonphysicalIndex,
}

impl RowFailure {
    pub fn as_str(self) -> &'static str {
        match self {
            RowFailure::InvalidParams => "invalid_params",
            RowFailure::NoPhysicalRoot => "no_root",
            RowFailure::ResidualTooLarge => "residual",
            RowFailure::Singular => "singular",
            RowFailure::NonphysicalIndex => "nonphysical",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "invalid_params" => RowFailure::InvalidParams,
            "no_root" => RowFailure::NoPhysicalRoot,
            "residual" => RowFailure::ResidualTooLarge,
            "singular" => RowFailure::Singular,
            "nonphysical" => RowFailure::NonphysicalIndex,
            _ => return None,
        })
    }
}

impl From<SteadyError> for RowFailure {
    fn from(e: SteadyError) -> Self {
        match e {
            SteadyError::NoPhysicalRoot => RowFailure::NoPhysicalRoot,
            SteadyError::ResidualTooLarge { .. } => RowFailure::ResidualTooLarge,
            SteadyError::InvalidDrive(_) => RowFailure::InvalidParams,
        }
    }
}

impl From<ResponseError> for RowFailure {
    fn from(e: ResponseError) -> Self {
        match e {
            ResponseError::SingularResponse { .. } => RowFailure::Singular,
            ResponseError::NonphysicalIndex(_) => RowFailure::NonphysicalIndex,
            ResponseError::InvalidProbe(_) => RowFailure::InvalidParams,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RowValues {
    pub eps_t: Complex64,
    pub n_r: Complex64,
    pub n_g: Complex64,
    /// Δx in m, when a velocity is set.
    pub drag: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub axis_value: f64,
    pub branch: Option<Branch>,
    pub outcome: Result<RowValues, RowFailure>,
}

impl Row {
    pub fn values(&self) -> Option<&RowValues> {
        self.outcome.as_ref().ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub axis: Axis,
    pub rows: Vec<Row>,
}

impl SpectrumTable {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.is_err()).count()
    }
}

/// Evaluate one sweep point. Returns the row and the selected |m_s|² for
/// continuation.
pub fn evaluate_point(spec: &SweepSpec, axis_value: f64, branch: BranchPolicy) -> (Row, Option<f64>) {
    let setup = spec.point(axis_value);
    let failed = |f: RowFailure, branch| Row {
        axis_value,
        branch,
        outcome: Err(f),
    };
    if setup.params.validate().is_err() {
        return (failed(RowFailure::InvalidParams, None), None);
    }
    let Ok(eps_m) = setup.params.epsilon_m() else {
        return (failed(RowFailure::InvalidParams, None), None);
    };
    let state = match steady::solve_steady(&setup.params, eps_m, branch) {
        Ok(s) => s,
        Err(e) => return (failed(e.into(), None), None),
    };
    let g_eff = state.g_eff(&setup.params);
    let resp = response::probe_response(
        &setup.params,
        g_eff,
        setup.sigma,
        PROBE_AMPLITUDE,
        setup.velocity,
        spec.quadrature,
    );
    let row = match resp {
        Ok(r) => Row {
            axis_value,
            branch: Some(state.branch),
            outcome: Ok(RowValues {
                eps_t: r.eps_t,
                n_r: r.n_r,
                n_g: r.n_g,
                drag: r.drag.map(|d| d.displacement),
            }),
        },
        Err(e) => failed(e.into(), Some(state.branch)),
    };
    (row, Some(state.magnon_number()))
}

/// Run a sweep. Rows are evaluated in parallel unless the branch policy is
/// continuation, which walks the axis in order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SpectrumTable, SweepError> {
    spec.validate()?;
    let grid = spec.grid();
    let rows: Vec<Row> = match spec.branch {
        BranchPolicy::Continuation { previous } => {
            let mut prev = previous;
            grid.iter()
                .map(|&v| {
                    let (row, x) =
                        evaluate_point(spec, v, BranchPolicy::Continuation { previous: prev });
                    if x.is_some() {
                        prev = x;
                    }
                    row
                })
                .collect()
        }
        policy => grid
            .par_iter()
            .map(|&v| evaluate_point(spec, v, policy).0)
            .collect(),
    };
    let table = SpectrumTable {
        axis: spec.axis,
        rows,
    };
    let failed = table.failed_rows();
    if failed * 10 > table.rows.len() {
        return Err(SweepError::TooManyFailures {
            failed,
            total: table.rows.len(),
        });
    }
    Ok(table)
}
