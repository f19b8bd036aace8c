use magnodrag::params::SystemParams;
use magnodrag::presets::{self, IDS};
use magnodrag::sweep::{
    extract_features, read_csv, run_sweep, write_csv, Axis, Curve, Override, SweepSpec,
};

fn spec(coupling: f64, watts: f64, samples: usize) -> SweepSpec {
    SweepSpec::new(Axis::Sigma, (-0.5, 0.5), samples, SystemParams::reference(0.01))
        .with_override(Override::Coupling(coupling))
        .with_override(Override::Power(watts))
}

#[test]
fn peak_counts_follow_the_couplings() {
    for gamma in [0.1, 0.2, 0.4] {
        let r = extract_features(&run_sweep(&spec(gamma, 0.0, 4001)).unwrap()).unwrap();
        assert_eq!((r.peaks.len(), r.windows.len()), (2, 1), "Gamma={gamma}");
        let w = r.windows[0];
        assert!(w.center.abs() < 1e-9);
        assert!(w.floor < w.left_peak && w.floor < w.right_peak);
        // Two symmetric peaks.
        assert!((r.peaks[0].position + r.peaks[1].position).abs() < 1e-9);
        for watts in [3e-3, 6e-3, 15e-3] {
            let r = extract_features(&run_sweep(&spec(gamma, watts, 4001)).unwrap()).unwrap();
            assert_eq!((r.peaks.len(), r.windows.len()), (3, 2), "Gamma={gamma}, P={watts}");
            for w in &r.windows {
                assert!(w.floor < w.left_peak && w.floor < w.right_peak);
            }
        }
    }
}

#[test]
fn features_are_grid_stable() {
    for (gamma, watts) in [(0.1, 0.0), (0.4, 0.0), (0.1, 15e-3), (0.4, 3e-3)] {
        let a = extract_features(&run_sweep(&spec(gamma, watts, 4001)).unwrap()).unwrap();
        let b = extract_features(&run_sweep(&spec(gamma, watts, 8001)).unwrap()).unwrap();
        assert_eq!(a.windows.len(), b.windows.len());
        for (wa, wb) in a.windows.iter().zip(&b.windows) {
            assert!((wa.fwhm - wb.fwhm).abs() < 0.01 * wb.fwhm, "{wa:?} vs {wb:?}");
            assert!((wa.center - wb.center).abs() < 0.01 * wb.fwhm.max(wb.center.abs()));
        }
    }
}

#[test]
fn bare_cavity_is_lorentzian() {
    let p = SystemParams::reference(0.01);
    let t = run_sweep(&spec(0.0, 0.0, 1001)).unwrap();
    let k = p.kappa_c / p.omega_b;
    for row in &t.rows {
        let s = row.axis_value;
        let want = 2.0 * k * k / (k * k + s * s);
        let got = row.values().unwrap().eps_t.re;
        assert!((got - want).abs() < 1e-13, "{s}: {got} vs {want}");
    }
}

#[test]
fn velocity_sweep_is_odd_and_affine() {
    let base = SystemParams::reference(0.01);
    for watts in [0.0, 3e-3] {
        let spec = SweepSpec::new(Axis::Velocity, (-300.0, 300.0), 61, base)
            .with_override(Override::Coupling(0.1))
            .with_override(Override::Power(watts));
        let t = run_sweep(&spec).unwrap();
        let n = t.rows.len();
        let drag = |i: usize| t.rows[i].values().unwrap().drag.unwrap();
        assert_eq!(drag(n / 2), 0.0);
        let slope = drag(n - 1) / 300.0;
        for i in 0..n {
            assert_eq!(drag(i), -drag(n - 1 - i));
            let want = slope * t.rows[i].axis_value;
            assert!((drag(i) - want).abs() <= 1e-12 * drag(n - 1).abs());
        }
    }
}

#[test]
fn preset_tables_round_trip_through_csv() {
    let base = SystemParams::reference(0.01);
    for id in ["2c", "5b", "6a"] {
        let p = presets::preset(id, &base).unwrap();
        let curves: Vec<Curve> = p
            .curves
            .iter()
            .map(|(label, spec)| {
                let mut spec = spec.clone();
                spec.samples = spec.samples.min(301);
                Curve { label: Some(label.clone()), table: run_sweep(&spec).unwrap() }
            })
            .collect();
        let mut buf = Vec::new();
        write_csv(&mut buf, &curves).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, curves, "{id}");
    }
    assert_eq!(IDS.len(), 18);
}

#[test]
fn sweeps_are_deterministic() {
    let s = spec(0.2, 6e-3, 2001);
    assert_eq!(run_sweep(&s).unwrap(), run_sweep(&s).unwrap());
}
