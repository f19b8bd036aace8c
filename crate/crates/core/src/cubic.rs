//! Real-coefficient cubic solved in closed form, with Newton polishing of
//! the real roots.

use num_complex::Complex64;

/// Roots of `c[3]·x³ + c[2]·x² + c[1]·x + c[0] = 0`.
///
/// Degenerate leading coefficients fall back to the quadratic or linear
/// formula. The real roots are polished against the original polynomial;
/// complex roots are returned unpolished.
pub fn roots(c: [f64; 4]) -> Vec<Complex64> {
    let [c0, c1, c2, c3] = c;
    let mut out = if c3 != 0.0 {
        cubic(c2 / c3, c1 / c3, c0 / c3)
    } else if c2 != 0.0 {
        quadratic(c1 / c2, c0 / c2)
    } else if c1 != 0.0 {
        vec![Complex64::new(-c0 / c1, 0.0)]
    } else {
        Vec::new()
    };
    for r in out.iter_mut().filter(|r| r.im == 0.0) {
        r.re = polish(c, r.re);
    }
    out
}

/// `c[3]·x³ + c[2]·x² + c[1]·x + c[0]` and the sum of the magnitudes of
/// its terms, for relative residual checks.
pub fn eval_with_scale(c: [f64; 4], x: f64) -> (f64, f64) {
    let terms = [c[0], c[1] * x, c[2] * x * x, c[3] * x * x * x];
    (terms.iter().sum(), terms.iter().map(|t| t.abs()).sum())
}

fn quadratic(b: f64, c: f64) -> Vec<Complex64> {
    // x² + b x + c
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        if q == 0.0 {
            return vec![Complex64::new(0.0, 0.0); 2];
        }
        vec![Complex64::new(q, 0.0), Complex64::new(c / q, 0.0)]
    } else {
        let im = 0.5 * (-disc).sqrt();
        vec![Complex64::new(-0.5 * b, im), Complex64::new(-0.5 * b, -im)]
    }
}

fn cubic(a: f64, b: f64, c: f64) -> Vec<Complex64> {
    // x³ + a x² + b x + c; rescale x = s·y so the coefficients are O(1).
    let s = [a.abs(), b.abs().sqrt(), c.abs().cbrt()]
        .into_iter()
        .fold(0.0_f64, f64::max);
    if s == 0.0 {
        return vec![Complex64::new(0.0, 0.0); 3];
    }
    let (a, b, c) = (a / s, b / (s * s), c / (s * s * s));

    // Depressed cubic y = t − a/3: t³ + p t + q = 0.
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let half_q = 0.5 * q;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;

    let ts: Vec<Complex64> = if disc > 0.0 {
        // One real root, complex pair.
        let sq = disc.sqrt();
        let u = (-half_q - half_q.signum() * sq).cbrt();
        let u = if half_q == 0.0 { sq.cbrt() } else { u };
        let v = if u != 0.0 { -third_p / u } else { 0.0 };
        let t1 = u + v;
        let re = -0.5 * t1;
        let im = 0.5 * 3f64.sqrt() * (u - v);
        vec![
            Complex64::new(t1, 0.0),
            Complex64::new(re, im),
            Complex64::new(re, -im),
        ]
    } else if third_p == 0.0 {
        vec![Complex64::new(0.0, 0.0); 3]
    } else {
        // Three real roots (trigonometric form).
        let m = 2.0 * (-third_p).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| {
                let phi = theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                Complex64::new(m * phi.cos(), 0.0)
            })
            .collect()
    };
    ts.into_iter().map(|t| (t - shift) * s).collect()
}

fn polish(c: [f64; 4], mut x: f64) -> f64 {
    for _ in 0..16 {
        let f = ((c[3] * x + c[2]) * x + c[1]) * x + c[0];
        let df = (3.0 * c[3] * x + 2.0 * c[2]) * x + c[1];
        if df == 0.0 || f == 0.0 {
            break;
        }
        let step = f / df;
        let next = x - step;
        if !next.is_finite() {
            break;
        }
        // Only accept steps that do not increase |f|.
        let f_next = ((c[3] * next + c[2]) * next + c[1]) * next + c[0];
        if f_next.abs() > f.abs() {
            break;
        }
        x = next;
        if step.abs() <= 1e-16 * x.abs() {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real_sorted(c: [f64; 4]) -> Vec<f64> {
        let mut r: Vec<f64> = roots(c)
            .into_iter()
            .filter(|z| z.im == 0.0)
            .map(|z| z.re)
            .collect();
        r.sort_by(f64::total_cmp);
        r
    }

    #[test]
    fn three_distinct_roots() {
        // (x-1)(x-2)(x-3) = x³ - 6x² + 11x - 6
        let r = real_sorted([-6.0, 11.0, -6.0, 1.0]);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-14, "{got} vs {want}");
        }
    }

    #[test]
    fn one_real_root() {
        // (x - 2)(x² + 1)
        let all = roots([-2.0, 1.0, -2.0, 1.0]);
        let r = real_sorted([-2.0, 1.0, -2.0, 1.0]);
        assert_eq!(r, vec![2.0]);
        let complex: Vec<_> = all.iter().filter(|z| z.im != 0.0).collect();
        assert_eq!(complex.len(), 2);
        for z in complex {
            assert!((z.re).abs() < 1e-14 && (z.im.abs() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn widely_separated_roots_keep_relative_accuracy() {
        // Roots 1e-3, 1e5, 1e9.
        let (a, b, c) = (1e-3, 1e5, 1e9);
        let coeffs = [-a * b * c, a * b + a * c + b * c, -(a + b + c), 1.0];
        let r = real_sorted(coeffs);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([a, b, c]) {
            assert!(((got - want) / want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn degenerate_orders() {
        assert_eq!(real_sorted([-4.0, 2.0, 0.0, 0.0]), vec![2.0]);
        let r = real_sorted([-4.0, 0.0, 1.0, 0.0]);
        assert_eq!(r, vec![-2.0, 2.0]);
        assert!(roots([1.0, 0.0, 0.0, 0.0]).is_empty());
    }

    #[test]
    fn zero_constant_term_has_zero_root() {
        // x (x² + 1)
        let r = real_sorted([0.0, 1.0, 0.0, 1.0]);
        assert_eq!(r.len(), 1);
        assert!(r[0].abs() < 1e-15);
    }

    #[test]
    fn triple_root() {
        // (x - 1)³
        let r = real_sorted([-1.0, 3.0, -3.0, 1.0]);
        assert!(!r.is_empty());
        for x in r {
            assert!((x - 1.0).abs() < 1e-5);
        }
    }
}
