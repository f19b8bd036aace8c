//! Run manifests written next to every sweep output.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use magnodrag::config::Resolved;
use magnodrag::presets::{self, Preset};
use magnodrag::steady::{self, BranchPolicy};
use magnodrag::sweep::{Axis, Curve, SweepSpec};
use magnodrag::SystemParams;

use crate::{CliError, SweepArgs};

pub struct ConfigDigest {
    pub path: String,
    pub sha256: String,
}

impl ConfigDigest {
    pub fn of(path: &Path, bytes: &[u8]) -> Self {
        ConfigDigest {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
        }
    }
}

/// Steady-state quantities at one parameter point.
#[derive(Serialize)]
pub struct Derived {
    pub spin_number: f64,
    pub total_spin: f64,
    pub epsilon_m: f64,
    /// m_s as [re, im].
    pub m_s: [f64; 2],
    pub magnon_number: f64,
    /// G_mb = g_mb·m_s as [re, im], rad/s.
    pub g_mb_eff: [f64; 2],
    pub delta_m_over_omega_b: f64,
    pub root_count: usize,
}

impl Derived {
    fn at(p: &SystemParams, policy: BranchPolicy) -> Result<Self, CliError> {
        let eps = p
            .epsilon_m()
            .map_err(|e| CliError::Usage(format!("drive: {e}")))?;
        let state = steady::solve_steady(p, eps, policy)?;
        let spins = p.spin_count();
        let g = state.g_eff(p);
        Ok(Derived {
            spin_number: spins.n,
            total_spin: spins.s,
            epsilon_m: eps,
            m_s: [state.m_s.re, state.m_s.im],
            magnon_number: state.magnon_number(),
            g_mb_eff: [g.re, g.im],
            delta_m_over_omega_b: state.delta_m_eff / p.omega_b,
            root_count: state.root_count,
        })
    }
}

#[derive(Serialize)]
pub struct CurveInfo {
    pub label: Option<String>,
    pub axis: Axis,
    pub range: (f64, f64),
    pub samples: usize,
    /// Only for σ and velocity axes, where the steady state is the same
    /// for every row.
    pub derived: Option<Derived>,
    pub failed_rows: usize,
}

#[derive(Serialize)]
pub struct Request {
    pub figure: Option<String>,
    pub description: Option<String>,
    pub branch: String,
    pub quadrature: String,
    /// Drag magnitudes rest on a medium length and velocity that have no
    /// published values.
    pub illustrative: bool,
    pub illustrative_length_m: Option<f64>,
    pub illustrative_velocity_m_s: Option<f64>,
}

#[derive(Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_path: String,
    pub config_sha256: String,
    pub params: SystemParams,
    pub velocity: Option<f64>,
    pub derived: Derived,
    pub request: Option<Request>,
    pub curves: Vec<CurveInfo>,
    pub timestamp_unix: u64,
}

impl RunManifest {
    pub fn new(
        resolved: &Resolved,
        digest: &ConfigDigest,
        sweep: Option<(&SweepArgs, Option<&Preset>)>,
        specs: &[(Option<String>, SweepSpec)],
    ) -> Result<Self, CliError> {
        let derived = Derived::at(&resolved.params, BranchPolicy::Lowest)?;
        let request = sweep.map(|(args, preset)| {
            let illustrative = preset.is_some_and(|p| p.illustrative);
            Request {
                figure: preset.map(|p| p.id.to_string()),
                description: preset.map(|p| p.description.clone()),
                branch: format!("{:?}", args.branch).to_lowercase(),
                quadrature: format!("{:?}", args.quadrature).to_lowercase(),
                illustrative,
                illustrative_length_m: preset.map(|_| presets::ILLUSTRATIVE_LENGTH),
                illustrative_velocity_m_s: preset.map(|_| presets::ILLUSTRATIVE_VELOCITY),
            }
        });
        let mut curves = Vec::with_capacity(specs.len());
        for (label, spec) in specs {
            let derived = match spec.axis {
                Axis::Sigma | Axis::Velocity => Some(Derived::at(
                    &spec.point(spec.range.0).params,
                    spec.branch,
                )?),
                _ => None,
            };
            curves.push(CurveInfo {
                label: label.clone(),
                axis: spec.axis,
                range: spec.range,
                samples: spec.samples,
                derived,
                failed_rows: 0,
            });
        }
        Ok(RunManifest {
            tool: "magnodrag",
            version: env!("CARGO_PKG_VERSION"),
            config_path: digest.path.clone(),
            config_sha256: digest.sha256.clone(),
            params: resolved.params,
            velocity: resolved.velocity,
            derived,
            request,
            curves,
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        })
    }

    pub fn with_failures(mut self, tables: &[Curve]) -> Self {
        for (info, c) in self.curves.iter_mut().zip(tables) {
            info.failed_rows = c.table.failed_rows();
        }
        self
    }
}
