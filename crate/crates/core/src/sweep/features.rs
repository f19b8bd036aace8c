//! Spectral features of σ sweeps: absorption peaks and transparency
//! windows of Re ε_T, the dispersion slope at resonance, and drag extrema.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{run_sweep, Axis, SpectrumTable, SweepError, SweepSpec};

/// Extrema whose prominence is below this fraction of the signal range
/// are ignored.
const PROMINENCE_FRACTION: f64 = 1e-6;
const MIN_ROWS: usize = 16;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("feature extraction needs a {expected} table, got {found:?}")]
    AxisMismatch { expected: &'static str, found: Axis },
    #[error("feature extraction needs at least {MIN_ROWS} rows, got {0}")]
    TooFewRows(usize),
    #[error("no transparency window found for {0}")]
    NoWindow(String),
    #[error("width trend needs at least two comparable specs: {0}")]
    TrendMismatch(String),
    #[error(transparent)]
    Sweep(#[from] SweepError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Luminality {
    Subluminal,
    Superluminal,
}

impl Luminality {
    fn from_slope(slope: f64) -> Option<Self> {
        if slope > 0.0 {
            Some(Luminality::Subluminal)
        } else if slope < 0.0 {
            Some(Luminality::Superluminal)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub position: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub center: f64,
    pub fwhm: f64,
    pub floor: f64,
    pub left_peak: f64,
    pub right_peak: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DragExtremum {
    pub position: f64,
    pub drag: f64,
}

/// Positions are in axis units (σ/ω_b or m/s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureReport {
    pub axis: Axis,
    pub windows: Vec<Window>,
    pub peaks: Vec<Peak>,
    /// d Im(n_r)/dσ at σ = 0 (per unit σ/ω_b).
    pub resonance_slope: Option<f64>,
    pub resonance_slope_sign: Option<i8>,
    pub luminality: Option<Luminality>,
    pub drag_extrema: Vec<DragExtremum>,
    /// dΔx/dv for velocity tables, m per m/s.
    pub drag_velocity_slope: Option<f64>,
    /// Largest |Im n_g| in the table.
    pub max_abs_im_group_index: Option<f64>,
}

/// Vertex of the parabola through three points.
fn vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let d0 = (y[1] - y[0]) / (x[1] - x[0]);
    let d1 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d1 - d0) / (x[2] - x[0]);
    if a == 0.0 || !a.is_finite() {
        return (x[1], y[1]);
    }
    let b = d0 - a * (x[0] + x[1]);
    let xv = (-b / (2.0 * a)).clamp(x[0], x[2]);
    let yv = y[0] + (xv - x[0]) * (d0 + a * (xv - x[1]));
    // Adding zero turns −0 into +0.
    (xv + 0.0, yv)
}

fn refine(x: &[f64], y: &[f64], i: usize) -> (f64, f64) {
    vertex([x[i - 1], x[i], x[i + 1]], [y[i - 1], y[i], y[i + 1]])
}

/// Interior local maxima of `y` with prominence above the threshold.
fn prominent_maxima(y: &[f64], threshold: f64) -> Vec<usize> {
    let n = y.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if y[i] > y[i - 1] {
            // Walk across a plateau.
            let mut j = i;
            while j + 1 < n && y[j + 1] == y[i] {
                j += 1;
            }
            if j + 1 < n && y[j + 1] < y[i] {
                let base = |range: &mut dyn Iterator<Item = usize>| {
                    let mut lowest = y[i];
                    for k in range {
                        if y[k] > y[i] {
                            break;
                        }
                        lowest = lowest.min(y[k]);
                    }
                    lowest
                };
                let left = base(&mut (0..i).rev());
                let right = base(&mut (j + 1..n));
                if y[i] - left.max(right) > threshold {
                    out.push((i + j) / 2);
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Crossing of `level` between samples `a` and `b` by linear interpolation.
fn crossing(x: &[f64], y: &[f64], a: usize, b: usize, level: f64) -> f64 {
    let t = (level - y[a]) / (y[b] - y[a]);
    x[a] + t * (x[b] - x[a])
}

fn segment_features(x: &[f64], y: &[f64], threshold: f64) -> (Vec<Peak>, Vec<Window>) {
    let peak_idx = prominent_maxima(y, threshold);
    let refined: Vec<(f64, f64)> = peak_idx.iter().map(|&i| refine(x, y, i)).collect();
    let peaks = refined
        .iter()
        .map(|&(position, height)| Peak { position, height })
        .collect();

    let mut windows = Vec::new();
    for (k, pair) in peak_idx.windows(2).enumerate() {
        let (p, q) = (pair[0], pair[1]);
        let floor_idx = (p + 1..q)
            .min_by(|&a, &b| y[a].total_cmp(&y[b]))
            .expect("distinct peaks enclose at least one sample");
        let (center, floor) = if floor_idx > p && floor_idx < q {
            refine(x, y, floor_idx)
        } else {
            (x[floor_idx], y[floor_idx])
        };
        let (left_peak, right_peak) = (refined[k].1, refined[k + 1].1);
        if left_peak.min(right_peak) - floor <= threshold {
            continue;
        }
        let level = floor + 0.5 * (left_peak.min(right_peak) - floor);
        let mut l = floor_idx;
        while l > p && y[l] < level {
            l -= 1;
        }
        let mut r = floor_idx;
        while r < q && y[r] < level {
            r += 1;
        }
        let xl = if l < floor_idx { crossing(x, y, l, l + 1, level) } else { x[l] };
        let xr = if r > floor_idx { crossing(x, y, r - 1, r, level) } else { x[r] };
        windows.push(Window {
            center,
            fwhm: xr - xl,
            floor,
            left_peak,
            right_peak,
        });
    }
    (peaks, windows)
}

/// Contiguous runs of successful rows as (axis, values) pairs.
fn segments(table: &SpectrumTable, pick: impl Fn(&super::RowValues) -> Option<f64>) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut out = Vec::new();
    let mut cur: (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
    for row in &table.rows {
        match row.values().and_then(&pick) {
            Some(v) => {
                cur.0.push(row.axis_value);
                cur.1.push(v);
            }
            None => {
                if !cur.0.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
        }
    }
    if !cur.0.is_empty() {
        out.push(cur);
    }
    out
}

fn threshold(segs: &[(Vec<f64>, Vec<f64>)]) -> f64 {
    let (lo, hi) = segs
        .iter()
        .flat_map(|s| s.1.iter())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi > lo {
        PROMINENCE_FRACTION * (hi - lo)
    } else {
        0.0
    }
}

fn drag_extrema(table: &SpectrumTable) -> Vec<DragExtremum> {
    let segs = segments(table, |v| v.drag);
    let thr = threshold(&segs);
    let mut out = Vec::new();
    for (x, y) in &segs {
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        let mut idx: Vec<(usize, bool)> = prominent_maxima(y, thr)
            .into_iter()
            .map(|i| (i, true))
            .chain(prominent_maxima(&neg, thr).into_iter().map(|i| (i, false)))
            .collect();
        idx.sort_unstable();
        for (i, _) in idx {
            let (position, drag) = refine(x, y, i);
            out.push(DragExtremum { position, drag });
        }
    }
    out
}

/// Slope of Im(n_r) at σ = 0 from the two rows nearest to it on either
/// side.
fn resonance_slope(table: &SpectrumTable) -> Option<f64> {
    let ok: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter_map(|r| r.values().map(|v| (r.axis_value, v.n_r.im)))
        .collect();
    let left = ok.iter().rev().find(|(s, _)| *s < 0.0)?;
    let right = ok.iter().find(|(s, _)| *s > 0.0)?;
    Some((right.1 - left.1) / (right.0 - left.0))
}

fn max_abs_im_ng(table: &SpectrumTable) -> Option<f64> {
    table
        .rows
        .iter()
        .filter_map(|r| r.values().map(|v| v.n_g.im.abs()))
        .reduce(f64::max)
}

/// Extract features from a σ table, or drag information from a velocity
/// table.
pub fn extract_features(table: &SpectrumTable) -> Result<FeatureReport, FeatureError> {
    match table.axis {
        Axis::Sigma => {}
        Axis::Velocity => {
            let drag: Vec<(f64, f64)> = table
                .rows
                .iter()
                .filter_map(|r| r.values().and_then(|v| v.drag).map(|d| (r.axis_value, d)))
                .collect();
            let slope = match (drag.first(), drag.last()) {
                (Some(a), Some(b)) if b.0 > a.0 => Some((b.1 - a.1) / (b.0 - a.0)),
                _ => None,
            };
            let mut extrema = Vec::new();
            if let (Some(lo), Some(hi)) = (
                drag.iter().min_by(|a, b| a.1.total_cmp(&b.1)),
                drag.iter().max_by(|a, b| a.1.total_cmp(&b.1)),
            ) {
                extrema.push(DragExtremum { position: lo.0, drag: lo.1 });
                extrema.push(DragExtremum { position: hi.0, drag: hi.1 });
            }
            return Ok(FeatureReport {
                axis: table.axis,
                windows: Vec::new(),
                peaks: Vec::new(),
                resonance_slope: None,
                resonance_slope_sign: None,
                // A positive drag-vs-velocity slope is subluminal.
                luminality: slope.and_then(Luminality::from_slope),
                drag_extrema: extrema,
                drag_velocity_slope: slope,
                max_abs_im_group_index: max_abs_im_ng(table),
            });
        }
        other => {
            return Err(FeatureError::AxisMismatch {
                expected: "sigma",
                found: other,
            })
        }
    }
    if table.rows.len() < MIN_ROWS {
        return Err(FeatureError::TooFewRows(table.rows.len()));
    }

    let segs = segments(table, |v| Some(v.eps_t.re));
    let thr = threshold(&segs);
    let mut peaks = Vec::new();
    let mut windows = Vec::new();
    for (x, y) in &segs {
        let (p, w) = segment_features(x, y, thr);
        peaks.extend(p);
        windows.extend(w);
    }
    let slope = resonance_slope(table);
    Ok(FeatureReport {
        axis: table.axis,
        windows,
        peaks,
        resonance_slope: slope,
        resonance_slope_sign: slope.map(|s| if s > 0.0 { 1 } else if s < 0.0 { -1 } else { 0 }),
        luminality: slope.and_then(Luminality::from_slope),
        drag_extrema: drag_extrema(table),
        drag_velocity_slope: None,
        max_abs_im_group_index: max_abs_im_ng(table),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendParameter {
    /// Γ/ω_b.
    Coupling,
    /// Drive power, W.
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    StrictlyIncreasing,
    StrictlyDecreasing,
    Constant,
    NonMonotone,
}

impl Monotonicity {
    pub fn of(values: &[f64]) -> Self {
        let pairs = || values.windows(2);
        if pairs().all(|w| w[1] > w[0]) {
            Monotonicity::StrictlyIncreasing
        } else if pairs().all(|w| w[1] < w[0]) {
            Monotonicity::StrictlyDecreasing
        } else if pairs().all(|w| w[1] == w[0]) {
            Monotonicity::Constant
        } else {
            Monotonicity::NonMonotone
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidthPoint {
    pub value: f64,
    /// Mean FWHM of the windows found at this parameter value.
    pub fwhm: f64,
    pub windows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthTrend {
    pub parameter: TrendParameter,
    pub points: Vec<WidthPoint>,
    pub verdict: Monotonicity,
}

/// Transparency-window width for each spec, in the order given.
pub fn window_width_trend(
    parameter: TrendParameter,
    specs: &[SweepSpec],
) -> Result<WidthTrend, FeatureError> {
    if specs.len() < 2 {
        return Err(FeatureError::TrendMismatch(format!("got {} spec(s)", specs.len())));
    }
    let first = &specs[0];
    if specs.iter().any(|s| {
        s.axis != Axis::Sigma || s.range != first.range || s.samples != first.samples
    }) {
        return Err(FeatureError::TrendMismatch(
            "specs must all be sigma sweeps over the same grid".into(),
        ));
    }
    let mut points = Vec::with_capacity(specs.len());
    for spec in specs {
        let value = spec.parameter_value(parameter).ok_or_else(|| {
            FeatureError::TrendMismatch(format!("spec does not fix {parameter:?}"))
        })?;
        let report = extract_features(&run_sweep(spec)?)?;
        if report.windows.is_empty() {
            return Err(FeatureError::NoWindow(format!("{parameter:?} = {value}")));
        }
        let fwhm =
            report.windows.iter().map(|w| w.fwhm).sum::<f64>() / report.windows.len() as f64;
        points.push(WidthPoint {
            value,
            fwhm,
            windows: report.windows.len(),
        });
    }
    let widths: Vec<f64> = points.iter().map(|p| p.fwhm).collect();
    Ok(WidthTrend {
        parameter,
        verdict: Monotonicity::of(&widths),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemParams;
    use crate::sweep::{Override, Row, RowFailure, RowValues};
    use num_complex::Complex64;

    fn synthetic(axis: Axis, xs: &[f64], f: impl Fn(f64) -> f64) -> SpectrumTable {
        SpectrumTable {
            axis,
            rows: xs
                .iter()
                .map(|&x| Row {
                    axis_value: x,
                    branch: None,
                    outcome: Ok(RowValues {
                        eps_t: Complex64::new(f(x), 0.0),
                        n_r: Complex64::new(1.0, x),
                        n_g: Complex64::new(1.0, 0.0),
                        drag: Some(3.0 * x),
                    }),
                })
                .collect(),
        }
    }

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn vertex_of_exact_parabola() {
        let (x, y) = vertex([0.0, 1.0, 3.0], [5.0, 2.0, 2.0]);
        // y = (x − 2)² + 1
        assert!((x - 2.0).abs() < 1e-14 && (y - 1.0).abs() < 1e-14);
    }

    #[test]
    fn monotone_table_has_no_features() {
        let t = synthetic(Axis::Sigma, &grid(101), |x| x * x * x + x);
        let r = extract_features(&t).unwrap();
        assert!(r.peaks.is_empty());
        assert!(r.windows.is_empty());
        assert_eq!(r.luminality, Some(Luminality::Subluminal));
    }

    #[test]
    fn two_lorentzians_make_one_window() {
        let lor = |x: f64, c: f64| 0.01 / ((x - c).powi(2) + 0.01);
        let t = synthetic(Axis::Sigma, &grid(2001), |x| lor(x, -0.5) + lor(x, 0.5));
        let r = extract_features(&t).unwrap();
        assert_eq!(r.peaks.len(), 2);
        assert_eq!(r.windows.len(), 1);
        let w = r.windows[0];
        assert!(w.center.abs() < 1e-12);
        assert!(w.floor < w.left_peak && w.floor < w.right_peak);
        assert!(w.fwhm > 0.0 && w.fwhm < 1.0);
    }

    #[test]
    fn known_fwhm_of_inverted_lorentzian() {
        // A Lorentzian dip flanked by narrow Gaussian bumps at ±0.8.
        let g: f64 = 0.05;
        let f = |x: f64| {
            let dip = 1.0 - g * g / (x * x + g * g);
            let bumps = 0.2 * (-(x - 0.8).powi(2) / 0.001).exp() + 0.2 * (-(x + 0.8).powi(2) / 0.001).exp();
            dip + bumps
        };
        let t = synthetic(Axis::Sigma, &grid(40001), f);
        let r = extract_features(&t).unwrap();
        assert_eq!(r.windows.len(), 1);
        // Half-level crossing by bisection on the exact shape.
        let w = r.windows[0];
        let level = w.floor + 0.5 * (w.left_peak.min(w.right_peak) - w.floor);
        let mut lo = 0.0;
        let mut hi = 0.5;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < level { lo = mid } else { hi = mid }
        }
        assert!((w.fwhm - 2.0 * lo).abs() < 1e-6, "{} vs {}", w.fwhm, 2.0 * lo);
    }

    #[test]
    fn gaps_split_segments() {
        let lor = |x: f64, c: f64| 0.01 / ((x - c).powi(2) + 0.01);
        let mut t = synthetic(Axis::Sigma, &grid(201), |x| lor(x, -0.5) + lor(x, 0.5));
        t.rows[100].outcome = Err(RowFailure::Singular);
        let r = extract_features(&t).unwrap();
        // The window floor sits in the gap, so no window spans it.
        assert_eq!(r.peaks.len(), 2);
        assert!(r.windows.is_empty());
    }

    #[test]
    fn axis_and_size_checks() {
        let t = synthetic(Axis::Power, &grid(50), |x| x);
        assert!(matches!(extract_features(&t), Err(FeatureError::AxisMismatch { .. })));
        let t = synthetic(Axis::Sigma, &grid(10), |x| x);
        assert!(matches!(extract_features(&t), Err(FeatureError::TooFewRows(10))));
    }

    #[test]
    fn velocity_table_reports_drag_only() {
        let t = synthetic(Axis::Velocity, &grid(21), |x| x);
        let r = extract_features(&t).unwrap();
        assert!(r.windows.is_empty());
        assert!((r.drag_velocity_slope.unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(r.luminality, Some(Luminality::Subluminal));
        assert_eq!(r.drag_extrema.len(), 2);
    }

    #[test]
    fn trend_with_identical_specs_is_constant() {
        let spec = SweepSpec::new(Axis::Sigma, (-0.5, 0.5), 801, SystemParams::reference(0.01))
            .with_override(Override::Power(0.0))
            .with_override(Override::Coupling(0.2));
        let trend = window_width_trend(TrendParameter::Coupling, &[spec.clone(), spec]).unwrap();
        assert_eq!(trend.verdict, Monotonicity::Constant);
        assert_eq!(trend.points[0].fwhm, trend.points[1].fwhm);
    }

    #[test]
    fn trend_needs_two_specs() {
        let spec = SweepSpec::new(Axis::Sigma, (-0.5, 0.5), 801, SystemParams::reference(0.01));
        assert!(window_width_trend(TrendParameter::Coupling, &[spec]).is_err());
    }

    #[test]
    fn monotonicity_verdicts() {
        assert_eq!(Monotonicity::of(&[1.0, 2.0, 3.0]), Monotonicity::StrictlyIncreasing);
        assert_eq!(Monotonicity::of(&[3.0, 2.0]), Monotonicity::StrictlyDecreasing);
        assert_eq!(Monotonicity::of(&[1.0, 3.0, 2.0]), Monotonicity::NonMonotone);
    }
}
