//! Embedded Dormand–Prince 5(4) integrator for complex vector ODEs, with
//! outputs at prescribed times and integration in either time direction.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    /// Largest allowed |h|; `None` for unbounded.
    pub h_max: Option<f64>,
    pub max_steps: usize,
}

impl StepControl {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, h_max: None, max_steps: 50_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Work {
    k: [Vec<C64>; 7],
    tmp: Vec<C64>,
    y_new: Vec<C64>,
}

/// Integrates `y' = f(t, y)` from `(t0, y0)` and returns `y` at each of
/// `outputs`, which must be ordered in the direction of integration (all
/// `≥ t0` or all `≤ t0`).
pub fn integrate<F>(mut f: F, t0: f64, y0: &[C64], outputs: &[f64], ctl: &StepControl) -> Result<(Vec<Vec<C64>>, Stats)>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let n = y0.len();
    let mut stats = Stats::default();
    let mut result = Vec::with_capacity(outputs.len());
    let Some(&t_last) = outputs.last() else {
        return Ok((result, stats));
    };
    let dir = if t_last >= t0 { 1.0 } else { -1.0 };
    if outputs.windows(2).any(|w| (w[1] - w[0]) * dir < 0.0) || (outputs[0] - t0) * dir < 0.0 {
        return Err(Error::InvalidInput("output times must be monotone in the integration direction".into()));
    }

    let zeros = || vec![C64::new(0.0, 0.0); n];
    let mut w = Work {
        k: [zeros(), zeros(), zeros(), zeros(), zeros(), zeros(), zeros()],
        tmp: zeros(),
        y_new: zeros(),
    };
    let mut y = y0.to_vec();
    let mut t = t0;
    f(t, &y, &mut w.k[0]);
    stats.evaluations += 1;

    let mut h = initial_step(&mut f, t, &y, &w.k[0], dir, ctl, &mut stats) * dir;
    if let Some(hm) = ctl.h_max {
        h = h.signum() * h.abs().min(hm);
    }
    let mut err_prev: f64 = 1e-4;
    let mut steps = 0usize;

    for &t_out in outputs {
        while (t_out - t) * dir > 0.0 {
            steps += 1;
            if steps > ctl.max_steps {
                return Err(Error::StepSizeUnderflow { t, h });
            }
            let remaining = t_out - t;
            let clamped = remaining.abs() <= h.abs() * 1.000_000_1;
            let h_try = if clamped { remaining } else { h };
            if h_try.abs() < 1e-14 * t.abs().max(1.0) && !clamped {
                return Err(Error::StepSizeUnderflow { t, h: h_try });
            }
            let err = step(&mut f, t, &y, h_try, &mut w, ctl);
            stats.evaluations += 6;
            if err <= 1.0 {
                stats.accepted += 1;
                t = if clamped { t_out } else { t + h_try };
                std::mem::swap(&mut y, &mut w.y_new);
                w.k.swap(0, 6);
                let fac = 0.9 * err.max(1e-10).powf(-0.17) * err_prev.powf(0.04);
                let grow = fac.clamp(0.2, 5.0);
                // A clamped step says nothing about the natural step size.
                if !clamped {
                    h = h_try * grow;
                }
                err_prev = err.max(1e-4);
            } else {
                stats.rejected += 1;
                let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                h = h_try * fac;
            }
            if let Some(hm) = ctl.h_max {
                h = h.signum() * h.abs().min(hm);
            }
        }
        result.push(y.clone());
    }
    Ok((result, stats))
}

/// One DP5 step; leaves the 5th-order solution in `w.y_new`, `f(t+h, y_new)` in
/// `w.k[6]`, and returns the scaled RMS error estimate.
fn step<F>(f: &mut F, t: f64, y: &[C64], h: f64, w: &mut Work, ctl: &StepControl) -> f64
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let n = y.len();
    macro_rules! stage {
        ($out:expr, $c:expr, [$(($a:expr, $ki:expr)),*]) => {{
            for i in 0..n {
                let mut acc = y[i];
                $( acc += w.k[$ki][i] * (h * $a); )*
                w.tmp[i] = acc;
            }
            f(t + $c * h, &w.tmp, &mut w.k[$out]);
        }};
    }
    stage!(1, C2, [(A21, 0)]);
    stage!(2, C3, [(A31, 0), (A32, 1)]);
    stage!(3, C4, [(A41, 0), (A42, 1), (A43, 2)]);
    stage!(4, C5, [(A51, 0), (A52, 1), (A53, 2), (A54, 3)]);
    stage!(5, 1.0, [(A61, 0), (A62, 1), (A63, 2), (A64, 3), (A65, 4)]);
    for i in 0..n {
        w.y_new[i] = y[i]
            + (w.k[0][i] * A71 + w.k[2][i] * A73 + w.k[3][i] * A74 + w.k[4][i] * A75 + w.k[5][i] * A76) * h;
    }
    f(t + h, &w.y_new, &mut w.k[6]);

    let mut acc = 0.0;
    for i in 0..n {
        let e = (w.k[0][i] * E1 + w.k[2][i] * E3 + w.k[3][i] * E4 + w.k[4][i] * E5 + w.k[5][i] * E6 + w.k[6][i] * E7) * h;
        let sc = ctl.atol + ctl.rtol * y[i].norm().max(w.y_new[i].norm());
        acc += e.norm_sqr() / (sc * sc);
    }
    (acc / n as f64).sqrt()
}

fn initial_step<F>(f: &mut F, t: f64, y: &[C64], f0: &[C64], dir: f64, ctl: &StepControl, stats: &mut Stats) -> f64
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let n = y.len() as f64;
    let scale = |yi: &C64| ctl.atol + ctl.rtol * yi.norm();
    let d0 = (y.iter().map(|v| (v.norm() / scale(v)).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = (f0.iter().zip(y).map(|(v, yi)| (v.norm() / scale(yi)).powi(2)).sum::<f64>() / n).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<C64> = y.iter().zip(f0).map(|(a, b)| a + b * (h0 * dir)).collect();
    let mut f1 = vec![C64::new(0.0, 0.0); y.len()];
    f(t + h0 * dir, &y1, &mut f1);
    stats.evaluations += 1;
    let d2 = (f1.iter().zip(f0).zip(y).map(|((a, b), yi)| ((a - b).norm() / scale(yi)).powi(2)).sum::<f64>() / n)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth_and_rotation() {
        // y' = (0.3 + 2i) y
        let lam = C64::new(0.3, 2.0);
        let ctl = StepControl::new(1e-10, 1e-12);
        let outs = [0.5, 1.0, 3.0];
        let (ys, stats) = integrate(|_, y, dy| dy[0] = lam * y[0], 0.0, &[C64::new(1.0, 0.0)], &outs, &ctl).unwrap();
        for (t, y) in outs.iter().zip(&ys) {
            let e = (lam * *t).exp();
            assert!((y[0] - e).norm() < 1e-8 * e.norm(), "t={t}");
        }
        assert!(stats.accepted > 0);
    }

    #[test]
    fn backward_integration_recovers_initial_value() {
        let f = |t: f64, y: &[C64], dy: &mut [C64]| {
            dy[0] = C64::new(0.0, 1.0) * y[1] * t.cos();
            dy[1] = C64::new(0.0, 1.0) * y[0];
        };
        let ctl = StepControl::new(1e-11, 1e-13);
        let y0 = [C64::new(1.0, 0.0), C64::new(0.0, 0.5)];
        let (fw, _) = integrate(f, 0.0, &y0, &[4.0], &ctl).unwrap();
        let (bw, _) = integrate(f, 4.0, &fw[0], &[0.0], &ctl).unwrap();
        assert!((bw[0][0] - y0[0]).norm() < 1e-8);
        assert!((bw[0][1] - y0[1]).norm() < 1e-8);
    }

    #[test]
    fn output_at_start_time_is_initial_value() {
        let ctl = StepControl::new(1e-8, 1e-10);
        let (ys, _) = integrate(|_, y, dy| dy[0] = -y[0], 0.0, &[C64::new(2.0, 0.0)], &[0.0, 1.0], &ctl).unwrap();
        assert_eq!(ys[0][0], C64::new(2.0, 0.0));
    }

    #[test]
    fn rejects_non_monotone_outputs() {
        let ctl = StepControl::new(1e-8, 1e-10);
        assert!(integrate(|_, _, dy| dy[0] = C64::new(0.0, 0.0), 0.0, &[C64::new(1.0, 0.0)], &[1.0, 0.5], &ctl).is_err());
    }

    #[test]
    fn convergence_order() {
        // Harmonic oscillator; tightening tolerance shrinks the error.
        let f = |_: f64, y: &[C64], dy: &mut [C64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let y0 = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let err = |tol: f64| {
            let (ys, _) = integrate(f, 0.0, &y0, &[20.0], &StepControl::new(tol, tol * 1e-2)).unwrap();
            (ys[0][0].re - 20f64.cos()).abs()
        };
        let (e1, e2) = (err(1e-6), err(1e-9));
        assert!(e2 < e1 * 0.05, "{e1:e} {e2:e}");
        assert!(e2 < 1e-7);
    }
}
