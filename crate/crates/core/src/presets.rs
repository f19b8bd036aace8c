//! Figure-reproduction presets: the parameter families behind each
//! published spectrum panel, applied on top of a user-supplied base.

use serde::Serialize;

use crate::params::SystemParams;
use crate::sweep::{Axis, Override, SweepSpec};

pub const SIGMA_RANGE: (f64, f64) = (-0.5, 0.5);
pub const SIGMA_SAMPLES: usize = 4001;
pub const VELOCITY_RANGE: (f64, f64) = (-300.0, 300.0);
pub const VELOCITY_SAMPLES: usize = 121;
/// Medium velocity for drag columns of σ sweeps, m/s. Not published.
pub const ILLUSTRATIVE_VELOCITY: f64 = 300.0;
/// Medium length, m. Not published.
pub const ILLUSTRATIVE_LENGTH: f64 = 0.01;

pub const IDS: [&str; 18] = [
    "2a", "2b", "2c", "2d", "3a", "3b", "4a", "4b", "4c", "4d", "5a", "5b", "6a", "6b", "6c", "6d",
    "7a", "7b",
];

const COUPLINGS: [f64; 4] = [0.0, 0.1, 0.2, 0.4];
const POWERS: [f64; 4] = [0.0, 3e-3, 6e-3, 15e-3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Γ/ω_b varied with no magnomechanical drive.
    Coupling,
    /// Drive power varied at fixed Γ/ω_b.
    Power { coupling_milli: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub id: &'static str,
    pub description: String,
    pub axis: Axis,
    /// Column shown in the panel.
    pub column: &'static str,
    pub family: Family,
    /// Drag magnitudes depend on the illustrative l and v.
    pub illustrative: bool,
    pub curves: Vec<(String, SweepSpec)>,
}

fn panel(id: &str) -> Option<(usize, char)> {
    let mut ch = id.chars();
    let fig = ch.next()?.to_digit(10)? as usize;
    let p = ch.next()?;
    if ch.next().is_some() || !IDS.contains(&id) {
        return None;
    }
    Some((fig, p))
}

/// Build the preset `id` on top of `base`. The base's drive and coupling
/// are replaced by the family values; its medium length is replaced by the
/// illustrative one.
pub fn preset(id: &str, base: &SystemParams) -> Option<Preset> {
    let (fig, p) = panel(id)?;
    let id = *IDS.iter().find(|&&x| x == id)?;
    let drag_figure = fig % 2 == 1;
    let (axis, column) = match (drag_figure, p) {
        (false, 'a') => (Axis::Sigma, "ImNr"),
        (false, 'b') => (Axis::Sigma, "ReNr"),
        (false, 'c') => (Axis::Sigma, "ImNg"),
        (false, 'd') => (Axis::Sigma, "ReNg"),
        (true, 'a') => (Axis::Sigma, "DragM"),
        (true, 'b') => (Axis::Velocity, "DragM"),
        _ => return None,
    };
    let family = match fig {
        2 | 3 => Family::Coupling,
        4 | 5 => Family::Power { coupling_milli: 100 },
        _ => Family::Power { coupling_milli: 400 },
    };
    let (range, samples) = match axis {
        Axis::Velocity => (VELOCITY_RANGE, VELOCITY_SAMPLES),
        _ => (SIGMA_RANGE, SIGMA_SAMPLES),
    };
    let make = |overrides: &[Override]| {
        let mut spec = SweepSpec::new(axis, range, samples, *base)
            .with_override(Override::MediumLength(ILLUSTRATIVE_LENGTH));
        for o in overrides {
            spec = spec.with_override(*o);
        }
        match axis {
            Axis::Velocity => spec.with_override(Override::Sigma(0.0)),
            _ => spec.with_override(Override::Velocity(ILLUSTRATIVE_VELOCITY)),
        }
    };
    let curves: Vec<(String, SweepSpec)> = match family {
        Family::Coupling => COUPLINGS
            .iter()
            .map(|&g| {
                (
                    format!("Gamma={g}"),
                    make(&[Override::Coupling(g), Override::Power(0.0)]),
                )
            })
            .collect(),
        Family::Power { coupling_milli } => {
            let g = coupling_milli as f64 / 1000.0;
            POWERS
                .iter()
                .map(|&w| {
                    (
                        format!("power={}mW", w * 1e3),
                        make(&[Override::Coupling(g), Override::Power(w)]),
                    )
                })
                .collect()
        }
    };
    let what = match family {
        Family::Coupling => "Gamma/omega_b in {0, 0.1, 0.2, 0.4}, no magnomechanical drive".to_string(),
        Family::Power { coupling_milli } => format!(
            "Gamma/omega_b = {}, drive power in {{0, 3, 6, 15}} mW",
            coupling_milli as f64 / 1000.0
        ),
    };
    Some(Preset {
        id,
        description: format!("{column} vs {}; {what}", axis.column_name()),
        axis,
        column,
        family,
        illustrative: column == "DragM",
        curves,
    })
}
