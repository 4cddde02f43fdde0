//! Classical forced motion under the spin-dependent walking wave.
//!
//! In oscillator units (`s = ω₀t`, lengths in `x₀`) the equation of motion for the
//! rotating-frame amplitude `α = e^{iω₀t}(x + ip/Mω₀)/2x₀` is
//!
//! `dα/ds = i (Ω/ω₀) η e^{is} sin(kx − (ω/ω₀)s + φ_m)`, `kx = 2η Re(α e^{−is})`.
//!
//! LDR sign convention: with the counter-rotating term dropped and `η|α| → 0`,
//! the solution from `α = 0` is `α(t) = (ηΩ/2δ) e^{iχ_m} (1 − e^{−iδt})` with
//! `χ_m = φ_m − π/2`; [`ldr_trajectory`] implements exactly this.

use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{integrate, StepControl};
use crate::units::{DriveParams, Spin, UnitSystem, CA40_MASS};

/// Samples per LDR loop when sampling a trajectory.
pub const SAMPLES_PER_LOOP: usize = 1000;
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Sample times (s), increasing.
    pub times: Vec<f64>,
    /// Rotating-frame α at each sample.
    pub alphas: Vec<C64>,
    pub spin: Spin,
    /// LDR loop period 2π/|δ| of the drive that produced it (s).
    pub loop_period: f64,
}

impl Trajectory {
    pub fn max_abs(&self) -> f64 {
        self.alphas.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Largest |Δα| between consecutive samples.
    pub fn max_step(&self) -> f64 {
        self.alphas.windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, f64::max)
    }

    /// Dense enough that consecutive samples differ by < 5% of max|α|.
    pub fn is_well_sampled(&self) -> bool {
        let m = self.max_abs();
        m == 0.0 || self.max_step() < 0.05 * m
    }

    /// Linear interpolation of α at time `t` (clamped to the sampled span).
    pub fn alpha_at(&self, t: f64) -> C64 {
        let i = self.times.partition_point(|&x| x < t);
        if i == 0 {
            return self.alphas[0];
        }
        if i >= self.times.len() {
            return *self.alphas.last().unwrap();
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let u = (t - t0) / (t1 - t0);
        self.alphas[i - 1] * (1.0 - u) + self.alphas[i] * u
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMetrics {
    /// max |α| over the first loop.
    pub alpha_max: f64,
    /// Return time (s).
    pub t_r: f64,
    /// Fractional return time `t_r |δ| / 2π`.
    pub r: f64,
    /// LDR-equivalent maximum ηΩ/|δ|.
    pub alpha0: f64,
    /// |α(t_r)|
    pub alpha_at_return: f64,
    /// `R` outside (0, 1 + 1e-6].
    pub r_flagged: bool,
    /// `alpha_max > alpha0 + 1e-6`.
    pub excursion_flagged: bool,
}

/// Default uniform sample grid: [`SAMPLES_PER_LOOP`] per LDR loop, at least 200.
pub fn sample_times(t_end: f64, loop_period: f64) -> Vec<f64> {
    let n = if loop_period.is_finite() {
        ((t_end / loop_period) * SAMPLES_PER_LOOP as f64).ceil() as usize
    } else {
        2000
    }
    .max(200);
    (0..=n).map(|i| t_end * i as f64 / n as f64).collect()
}

/// Integrates the classical equation of motion from `alpha_init` up to `t_end` (s)
/// with relative tolerance `tol`.
pub fn integrate_classical(alpha_init: C64, spin: Spin, params: &DriveParams, t_end: f64, tol: f64) -> Result<Trajectory> {
    if !(tol > 0.0) || !(t_end > 0.0) {
        return Err(Error::InvalidInput("tol and t_end must be positive".into()));
    }
    let mut times = sample_times(t_end, params.loop_period());
    loop {
        let traj = integrate_on(alpha_init, spin, params, &times, tol)?;
        if traj.is_well_sampled() || times.len() > 1 << 22 {
            return Ok(traj);
        }
        let n = 2 * (times.len() - 1);
        times = (0..=n).map(|i| t_end * i as f64 / n as f64).collect();
    }
}

/// Same as [`integrate_classical`], sampled at caller-supplied times (first must be 0).
pub fn integrate_on(alpha_init: C64, spin: Spin, params: &DriveParams, times: &[f64], tol: f64) -> Result<Trajectory> {
    let u = &params.units;
    let omega_t = params.omega_rabi / u.omega0;
    let w_t = params.omega() / u.omega0;
    let eta = u.eta;
    let phi = params.phi(spin);
    let rhs = move |s: f64, y: &[C64], dy: &mut [C64]| {
        let rot = C64::from_polar(1.0, s);
        let kx = 2.0 * eta * (y[0] * rot.conj()).re;
        let force = (kx - w_t * s + phi).sin();
        dy[0] = C64::new(0.0, omega_t * eta * force) * rot;
    };
    let outs: Vec<f64> = times.iter().map(|t| u.to_dimless_time(*t)).collect();
    let ctl = StepControl::new(tol, tol * 1e-3);
    let (ys, _) = integrate(rhs, 0.0, &[alpha_init], &outs, &ctl)?;
    Ok(Trajectory {
        times: times.to_vec(),
        alphas: ys.into_iter().map(|y| y[0]).collect(),
        spin,
        loop_period: params.loop_period(),
    })
}

/// Analytic LDR solution from α(0) = 0 (see module docs for the phase convention).
/// On resonance the linear-growth limit is returned.
pub fn ldr_trajectory(params: &DriveParams, spin: Spin, t: f64) -> C64 {
    let eta_omega = params.units.eta * params.omega_rabi;
    let orient = C64::from_polar(1.0, params.phi(spin) - FRAC_PI_2);
    if params.delta == 0.0 {
        return C64::new(0.0, 0.5 * eta_omega * t) * orient;
    }
    let d = params.delta;
    orient * (eta_omega / (2.0 * d)) * (C64::new(1.0, 0.0) - C64::from_polar(1.0, -d * t))
}

/// Return time: minimum of |α| in the first dip below half the running maximum,
/// searched in `(0.3, 1.3)·2π/|δ|` and refined by a parabola through |α|².
pub fn return_time(traj: &Trajectory) -> Result<f64> {
    let period = traj.loop_period;
    if !period.is_finite() {
        return Err(Error::InvalidInput("return time needs a non-zero detuning".into()));
    }
    let (lo, hi) = (0.3 * period, 1.3 * period);
    let t = &traj.times;
    let a2: Vec<f64> = traj.alphas.iter().map(|a| a.norm_sqr()).collect();
    let end = t.partition_point(|&x| x <= hi);
    let start = t.partition_point(|&x| x <= lo);
    if start >= end {
        return Err(Error::InvalidInput("trajectory does not reach the return window".into()));
    }
    let max_abs = a2[..end].iter().copied().fold(0.0, f64::max).sqrt();
    let th2 = 0.25 * max_abs * max_abs;
    let Some(first) = (start..end).find(|&i| a2[i] < th2) else {
        let min_abs = a2[start..end].iter().copied().fold(f64::INFINITY, f64::min).sqrt();
        return Err(Error::NoReturn { min_abs, max_abs });
    };
    // Hysteresis against the ω₀-frequency ripple.
    let exit2 = 0.5625 * max_abs * max_abs;
    let mut last = first;
    while last + 1 < a2.len() && a2[last + 1] < exit2 {
        last += 1;
    }
    let imin = (first..=last).min_by(|&i, &j| a2[i].total_cmp(&a2[j])).unwrap();
    if imin == 0 || imin + 1 >= a2.len() {
        return Ok(t[imin]);
    }
    Ok(parabola_vertex((t[imin - 1], a2[imin - 1]), (t[imin], a2[imin]), (t[imin + 1], a2[imin + 1])))
}

fn parabola_vertex(p0: (f64, f64), p1: (f64, f64), p2: (f64, f64)) -> f64 {
    let (x0, y0) = p0;
    let (x1, y1) = p1;
    let (x2, y2) = p2;
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curv = (d12 - d01) / (x2 - x0);
    if curv <= 0.0 {
        return x1;
    }
    // y = y1 + d·(x−x1) + curv·(x−x1)(x−x_other) form; vertex of the Newton parabola.
    let v = 0.5 * (x0 + x1) - d01 / (2.0 * curv);
    v.clamp(x0, x2)
}

pub fn trajectory_metrics(traj: &Trajectory, params: &DriveParams) -> Result<TrajectoryMetrics> {
    let t_r = return_time(traj)?;
    let end = traj.times.partition_point(|&x| x <= t_r);
    let alpha_max = traj.alphas[..end.max(1)].iter().map(|a| a.norm()).fold(0.0, f64::max);
    let r = t_r * params.delta.abs() / TAU;
    let alpha0 = params.alpha0();
    let m = TrajectoryMetrics {
        alpha_max,
        t_r,
        r,
        alpha0,
        alpha_at_return: traj.alpha_at(t_r).norm(),
        r_flagged: !(r > 0.0 && r <= 1.0 + 1e-6),
        excursion_flagged: alpha_max > alpha0 + 1e-6,
    };
    if m.r_flagged {
        log::warn!("fractional return time R = {r:.4} outside (0, 1]");
    }
    if m.excursion_flagged {
        log::warn!("alpha_max = {alpha_max:.4} exceeds alpha0 = {alpha0:.4}");
    }
    Ok(m)
}

/// `Im ∮ α* dα` accumulated by the trapezoid rule; twice the signed area swept.
pub fn loop_phase(traj: &Trajectory) -> f64 {
    traj.alphas.windows(2).map(|w| (w[0].conj() * w[1]).im).sum()
}

/// Published cubic for the maximum excursion, `x = ηα₀`.
pub fn alpha_max_empirical(eta: f64, alpha0: f64) -> f64 {
    if alpha0 <= 1.0 {
        log::warn!("alpha_max_empirical: alpha0 = {alpha0} is outside the fitted range alpha0 > 1");
    }
    let x = eta * alpha0;
    PUBLISHED_CUBIC.iter().fold(0.0, |acc, c| acc * x + c) / eta
}

/// `[c3, c2, c1, c0]` of `η α_max = c3 x³ + c2 x² + c1 x + c0`.
pub const PUBLISHED_CUBIC: [f64; 4] = [0.076827, -0.45539, 1.1352, -0.011266];
pub const PUBLISHED_RETURN_SLOPE: f64 = 0.82;

/// `R = 1 − 0.82 (α₀ − α_max)/α₀`.
pub fn return_reduction_empirical(alpha0: f64, alpha_max: f64) -> f64 {
    1.0 - PUBLISHED_RETURN_SLOPE * (alpha0 - alpha_max) / alpha0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricsGrid {
    pub etas: Vec<f64>,
    pub alpha0s: Vec<f64>,
    /// Trap frequency (rad/s).
    pub omega0: f64,
    /// Detuning used for every grid point (rad/s); Ω is set from α₀.
    pub delta: f64,
    pub tol: f64,
}

impl Default for EmpiricsGrid {
    fn default() -> Self {
        Self {
            etas: vec![0.15, 0.2, 0.25, 0.3],
            alpha0s: (0..15).map(|i| 1.0 + 0.5 * i as f64).collect(),
            omega0: TAU * 536e3,
            delta: TAU * 5e3,
            tol: DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricsPoint {
    pub eta: f64,
    pub alpha0: f64,
    pub x: f64,
    pub alpha_max: f64,
    pub r: f64,
    pub t_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricsFit {
    pub points: Vec<EmpiricsPoint>,
    /// `(eta, alpha0, message)` for points that failed.
    pub failures: Vec<(f64, f64, String)>,
    /// `[c3, c2, c1, c0]` for `η α_max` against `x`.
    pub cubic: [f64; 4],
    /// Relative RMS of the fitted cubic's α_max predictions.
    pub cubic_rms: f64,
    /// Fit on even-indexed points, relative RMS on the odd ones.
    pub holdout_rms: f64,
    /// Least-squares slope of `1−R` against `(α₀−α_max)/α₀` (with intercept).
    pub slope: f64,
    pub intercept: f64,
    /// Proportionality constant of the same data fitted through the origin.
    pub slope_through_origin: f64,
    pub linear_rms: f64,
    /// Relative RMS of the published cubic against the simulations, `x ∈ [0.3, 1.8]`.
    pub published_cubic_rms: f64,
}

/// Simulates one grid point: returns its α_max and return time.
pub fn simulate_point(eta: f64, alpha0: f64, omega0: f64, delta: f64, tol: f64) -> Result<EmpiricsPoint> {
    let units = UnitSystem::for_ion(CA40_MASS, omega0, eta)?;
    let params = DriveParams { omega_rabi: alpha0 * delta.abs() / eta, delta, phi_up: 0.0, phi_down: 0.0, delta_pi: 0.0, units };
    let traj = integrate_classical(C64::new(0.0, 0.0), Spin::Up, &params, 1.3 * params.loop_period(), tol)?;
    let m = trajectory_metrics(&traj, &params)?;
    Ok(EmpiricsPoint { eta, alpha0, x: eta * alpha0, alpha_max: m.alpha_max, r: m.r, t_r: m.t_r })
}

/// Re-derives the cubic excursion law and the linear return-time law by
/// simulating every `(η, α₀)` grid point.
pub fn regenerate_empirics(grid: &EmpiricsGrid) -> Result<EmpiricsFit> {
    if grid.etas.is_empty() || grid.alpha0s.is_empty() {
        return Err(Error::InvalidInput("empty empirics grid".into()));
    }
    let jobs: Vec<(f64, f64)> = grid.etas.iter().flat_map(|&e| grid.alpha0s.iter().map(move |&a| (e, a))).collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(eta, a0)| (eta, a0, simulate_point(eta, a0, grid.omega0, grid.delta, grid.tol)))
        .collect();
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (eta, a0, r) in results {
        match r {
            Ok(p) => points.push(p),
            Err(e) => failures.push((eta, a0, e.to_string())),
        }
    }
    if !failures.is_empty() {
        log::warn!("{} of {} grid points failed and are excluded", failures.len(), jobs.len());
    }
    if points.len() < 6 {
        return Err(Error::InvalidInput(format!("only {} usable grid points", points.len())));
    }
    fit_empirics(points, failures)
}

pub fn fit_empirics(points: Vec<EmpiricsPoint>, failures: Vec<(f64, f64, String)>) -> Result<EmpiricsFit> {
    let cubic = fit_cubic(&points)?;
    let rel = |p: &EmpiricsPoint, c: &[f64; 4]| {
        let pred = c.iter().fold(0.0, |acc, k| acc * p.x + k) / p.eta;
        (pred - p.alpha_max) / p.alpha_max
    };
    let rms = |v: Vec<f64>| (v.iter().map(|e| e * e).sum::<f64>() / v.len().max(1) as f64).sqrt();
    let cubic_rms = rms(points.iter().map(|p| rel(p, &cubic)).collect());

    let train: Vec<_> = points.iter().step_by(2).copied().collect();
    let test: Vec<_> = points.iter().skip(1).step_by(2).copied().collect();
    let holdout_rms = match fit_cubic(&train) {
        Ok(c) if !test.is_empty() => rms(test.iter().map(|p| rel(p, &c)).collect()),
        _ => f64::NAN,
    };

    let fx: Vec<f64> = points.iter().map(|p| (p.alpha0 - p.alpha_max) / p.alpha0).collect();
    let fy: Vec<f64> = points.iter().map(|p| 1.0 - p.r).collect();
    let n = fx.len() as f64;
    let (mx, my) = (fx.iter().sum::<f64>() / n, fy.iter().sum::<f64>() / n);
    let sxy: f64 = fx.iter().zip(&fy).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = fx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_through_origin = fx.iter().zip(&fy).map(|(x, y)| x * y).sum::<f64>() / fx.iter().map(|x| x * x).sum::<f64>();
    let linear_rms = rms(fx.iter().zip(&fy).map(|(x, y)| y - (intercept + slope * x)).collect());

    let window: Vec<_> = points.iter().filter(|p| (0.3..=1.8).contains(&p.x)).collect();
    let published_cubic_rms = rms(window.iter().map(|p| rel(p, &PUBLISHED_CUBIC)).collect());

    Ok(EmpiricsFit {
        points,
        failures,
        cubic,
        cubic_rms,
        holdout_rms,
        slope,
        intercept,
        slope_through_origin,
        linear_rms,
        published_cubic_rms,
    })
}

fn fit_cubic(points: &[EmpiricsPoint]) -> Result<[f64; 4]> {
    if points.len() < 4 {
        return Err(Error::DegenerateDesign("cubic fit needs at least 4 points".into()));
    }
    let a = DMatrix::from_fn(points.len(), 4, |i, j| points[i].x.powi(3 - j as i32));
    let b = DVector::from_iterator(points.len(), points.iter().map(|p| p.eta * p.alpha_max));
    let sol = a.svd(true, true).solve(&b, 1e-12).map_err(|e| Error::DegenerateDesign(e.to_string()))?;
    Ok([sol[0], sol[1], sol[2], sol[3]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::khz_to_rad_s;
    use approx::assert_relative_eq;

    fn drive(omega0_khz: f64, eta: f64, omega_khz: f64, delta_khz: f64) -> DriveParams {
        let u = UnitSystem::ca40_khz(omega0_khz, eta).unwrap();
        DriveParams::from_khz(u, omega_khz, delta_khz, 0.3, -0.3, 0.0)
    }

    #[test]
    fn no_force_no_motion() {
        let p = drive(536.0, 0.244, 0.0, 3.4);
        let a0 = C64::new(0.4, -0.2);
        let tr = integrate_classical(a0, Spin::Up, &p, 100e-6, 1e-8).unwrap();
        assert!(tr.alphas.iter().all(|a| *a == a0));
    }

    #[test]
    fn ldr_circle_diameter_and_period() {
        let p = drive(4000.0, 0.005, 100.0, 10.0);
        let tr = integrate_classical(C64::new(0.0, 0.0), Spin::Up, &p, 100e-6, 1e-9).unwrap();
        let dia = 0.005 * 100.0 / 10.0;
        assert_relative_eq!(tr.max_abs(), dia, max_relative = 0.005);
        assert!(tr.alphas.last().unwrap().norm() < 0.005 * dia);
        assert_relative_eq!(return_time(&tr).unwrap(), 100e-6, max_relative = 0.005);
    }

    #[test]
    fn ldr_reference_examples() {
        let p = drive(536.0, 0.244, 139.0, 10.0);
        assert_eq!(ldr_trajectory(&p, Spin::Up, 0.0), C64::new(0.0, 0.0));
        assert!(ldr_trajectory(&p, Spin::Up, TAU / p.delta).norm() < 1e-12);
        let half = ldr_trajectory(&p, Spin::Up, std::f64::consts::PI / p.delta);
        assert_relative_eq!(half.norm(), 0.244 * 139.0 / 10.0, max_relative = 1e-12);
        assert!((half.norm() - 3.39).abs() < 0.005);
    }

    #[test]
    fn ldr_resonant_branch() {
        let mut p = drive(536.0, 0.244, 10.0, 1.0);
        p.delta = 0.0;
        let t = 3e-6;
        let a = ldr_trajectory(&p, Spin::Up, t);
        assert_relative_eq!(a.norm(), 0.5 * 0.244 * p.omega_rabi * t, max_relative = 1e-12);
        // Limit of the off-resonant formula.
        let mut q = p;
        q.delta = 1e-3;
        assert!((ldr_trajectory(&q, Spin::Up, t) - a).norm() < 1e-6 * a.norm());
    }

    #[test]
    fn numeric_converges_to_ldr_reference() {
        // η α₀ = 0.01, δ/ω₀ = 5e-4.
        let p = drive(2000.0, 0.01, 1.0, 1.0);
        for spin in [Spin::Up, Spin::Down] {
            let tr = integrate_classical(C64::new(0.0, 0.0), spin, &p, 1e-3, 1e-10).unwrap();
            let a0 = p.alpha0();
            let worst = tr
                .times
                .iter()
                .zip(&tr.alphas)
                .map(|(t, a)| (a - ldr_trajectory(&p, spin, *t)).norm())
                .fold(0.0, f64::max);
            assert!(worst < 1e-3 * a0, "{worst:e} vs {a0}");
        }
    }

    #[test]
    fn return_time_ldr_limit() {
        let p = drive(2000.0, 0.01, 3.0, 2.0);
        assert!(p.units.eta * p.alpha0() < 0.05);
        let tr = integrate_classical(C64::new(0.0, 0.0), Spin::Up, &p, 1.3 * p.loop_period(), 1e-9).unwrap();
        assert_relative_eq!(return_time(&tr).unwrap(), p.loop_period(), max_relative = 0.005);
    }

    #[test]
    fn no_return_detected() {
        let p = drive(536.0, 0.244, 0.0, 3.4);
        let tr = integrate_classical(C64::new(0.0, 0.0), Spin::Up, &p, 1.3 * p.loop_period(), 1e-8).unwrap();
        assert!(matches!(return_time(&tr), Err(Error::NoReturn { .. })));
        // Offset start: the orbit never comes near the origin.
        let tr = integrate_classical(C64::new(3.0, 0.0), Spin::Up, &p, 1.3 * p.loop_period(), 1e-8).unwrap();
        assert!(matches!(return_time(&tr), Err(Error::NoReturn { .. })));
    }

    #[test]
    fn loop_phase_of_ldr_circles() {
        // Radius 0.5 circle: η Ω/|δ| = 1.
        let p = drive(4000.0, 0.01, 100.0, 1.0);
        let period = p.loop_period();
        let one = integrate_classical(C64::new(0.0, 0.0), Spin::Up, &p, period, 1e-10).unwrap();
        let two = integrate_classical(C64::new(0.0, 0.0), Spin::Up, &p, 2.0 * period, 1e-10).unwrap();
        let l1 = loop_phase(&one);
        assert_relative_eq!(l1.abs(), std::f64::consts::FRAC_PI_2, max_relative = 0.01);
        assert_relative_eq!(loop_phase(&two), 2.0 * l1, max_relative = 0.01);

        let zero = integrate_classical(C64::new(0.0, 0.0), Spin::Up, &drive(536.0, 0.2, 0.0, 1.0), period, 1e-8).unwrap();
        assert_eq!(loop_phase(&zero), 0.0);
    }

    #[test]
    fn empirical_law_examples() {
        assert!((alpha_max_empirical(0.244, 6.8) - 3.97).abs() < 0.01);
        assert!((alpha_max_empirical(0.244, 2.4) - 2.10).abs() < 0.01);
        // Near-LDR: x = 0.2 gives ≈ 0.99 α₀.
        let eta = 0.1;
        assert_relative_eq!(alpha_max_empirical(eta, 2.0) / 2.0, 0.99, epsilon = 0.01);

        assert_eq!(return_reduction_empirical(3.0, 3.0), 1.0);
        let r3 = return_reduction_empirical(6.8, 4.0);
        assert!((r3 - 0.662).abs() < 0.001);
        assert!((r3 - 0.67).abs() < 0.01);
        let r1 = return_reduction_empirical(2.4, 2.1);
        assert!((r1 - 0.8975).abs() < 1e-4);
        let t_r = r1 * TAU / khz_to_rad_s(10.1);
        assert!((t_r * 1e6 - 88.9).abs() < 0.1);
    }

    #[test]
    fn detuning_sign_symmetry() {
        // Exact only in the rotating-wave limit; the counter-rotating residue scales as ηΩ/ω₀.
        let mut last = f64::INFINITY;
        for omega0_khz in [536.0, 5360.0] {
            let p = drive(omega0_khz, 0.244, 60.0, 5.0);
            let m = p.mirrored();
            let a = integrate_classical(C64::new(0.0, 0.0), Spin::Up, &p, 150e-6, 1e-10).unwrap();
            let b = integrate_on(C64::new(0.0, 0.0), Spin::Up, &m, &a.times, 1e-10).unwrap();
            let worst = a.alphas.iter().zip(&b.alphas).map(|(x, y)| (x.conj() - y).norm()).fold(0.0, f64::max);
            let scale = p.units.eta * p.omega_rabi / p.units.omega0;
            assert!(worst < 2.0 * scale, "{worst:e} vs {scale:e}");
            assert!(worst < last);
            last = worst;
        }
    }

    #[test]
    fn parabola_vertex_exact_for_quadratic() {
        let f = |x: f64| 2.0 * (x - 1.3) * (x - 1.3) + 0.1;
        let v = parabola_vertex((1.0, f(1.0)), (1.2, f(1.2)), (1.5, f(1.5)));
        assert_relative_eq!(v, 1.3, epsilon = 1e-12);
    }

    #[test]
    fn empty_grid_rejected() {
        let g = EmpiricsGrid { etas: vec![], ..Default::default() };
        assert!(regenerate_empirics(&g).is_err());
    }
}
