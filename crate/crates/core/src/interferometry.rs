//! Fringe signal model, fits of fringe scans and of their τ-dependence, and
//! inference of the drive parameters from the fitted curves.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::classical::{alpha_max_empirical, integrate_on, PUBLISHED_RETURN_SLOPE};
use crate::error::{Error, Result};
use crate::fock::{thermal_weights, MotionalState};
use crate::lsq::{levenberg_marquardt, LmOptions};
use crate::quantum::{evolve_cat_on, thermal_branch_overlap, PropagatorConfig};
use crate::units::{khz_to_rad_s, DriveParams, Spin, UnitSystem};

/// `P(↑) = (1 − Re[O e^{i(φ − Δ_π τ)}])/2` for the motional overlap `O`.
pub fn signal_probability(o: C64, phi: f64, delta_pi: f64, tau: f64) -> f64 {
    let p = 0.5 * (1.0 - (o * C64::from_polar(1.0, phi - delta_pi * tau)).re);
    p.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringePoint {
    pub phi: f64,
    pub p_hat: f64,
    pub shots: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeScan {
    pub tau: f64,
    pub points: Vec<FringePoint>,
}

impl FringeScan {
    pub fn validate(&self) -> Result<()> {
        for p in &self.points {
            if !(0.0..=1.0).contains(&p.p_hat) || p.shots == 0 {
                return Err(Error::InvalidInput(format!("bad fringe point {p:?}")));
            }
        }
        Ok(())
    }
}

/// Binomial shot-noise scan over `phi_grid`; identical for identical seeds.
pub fn synthesize_scan(o: C64, delta_pi: f64, tau: f64, phi_grid: &[f64], shots: u64, seed: u64) -> Result<FringeScan> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    synthesize_with(&mut rng, o, delta_pi, tau, phi_grid, shots)
}

/// One scan per `τ`; scan `i` draws from ChaCha stream `i` of `seed`.
pub fn synthesize_scans(overlaps: &[C64], delta_pi: f64, taus: &[f64], phi_grid: &[f64], shots: u64, seed: u64) -> Result<Vec<FringeScan>> {
    if overlaps.len() != taus.len() {
        return Err(Error::DimensionMismatch(overlaps.len(), taus.len()));
    }
    taus.iter()
        .zip(overlaps)
        .enumerate()
        .map(|(i, (&tau, &o))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            synthesize_with(&mut rng, o, delta_pi, tau, phi_grid, shots)
        })
        .collect()
}

fn synthesize_with(rng: &mut ChaCha8Rng, o: C64, delta_pi: f64, tau: f64, phi_grid: &[f64], shots: u64) -> Result<FringeScan> {
    if shots == 0 {
        return Err(Error::InvalidInput("shots must be >= 1".into()));
    }
    if o.norm() > 1.0 + 1e-9 {
        return Err(Error::InvalidInput(format!("|O| = {} exceeds 1", o.norm())));
    }
    let points = phi_grid
        .iter()
        .map(|&phi| {
            let p = signal_probability(o, phi, delta_pi, tau);
            let k = Binomial::new(shots, p).map_err(|e| Error::InvalidInput(e.to_string()))?.sample(rng);
            Ok(FringePoint { phi, p_hat: k as f64 / shots as f64, shots })
        })
        .collect::<Result<_>>()?;
    Ok(FringeScan { tau, points })
}

/// `p = ½(1 − A cos(φ − φ₀))` fitted to one scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinusoidFit {
    pub a: f64,
    pub phi0: f64,
    pub sigma_a: f64,
    /// Infinite when `A = 0`.
    pub sigma_phi0: f64,
    /// Fitted mean level (ideally ½).
    pub offset: f64,
    pub chi2: f64,
}

/// Weighted linear fit of `p̂` against `(1, cos φ, sin φ)`. Weights are binomial
/// variances of the fitted model (iterated), floored at `1/(2·shots)` in σ.
pub fn fit_sinusoid(scan: &FringeScan) -> Result<SinusoidFit> {
    scan.validate()?;
    let pts = &scan.points;
    let mut distinct: Vec<f64> = pts.iter().map(|p| p.phi.rem_euclid(TAU)).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    if distinct.len() < 3 {
        return Err(Error::DegenerateDesign(format!("{} distinct phases; need at least 3", distinct.len())));
    }
    let span = pts.iter().map(|p| p.phi).fold(f64::NEG_INFINITY, f64::max) - pts.iter().map(|p| p.phi).fold(f64::INFINITY, f64::min);
    if distinct.len() < 4 || span <= PI {
        log::warn!("fringe scan has {} distinct phases spanning {span:.2} rad; fit may be poorly conditioned", distinct.len());
    }

    let basis = |phi: f64| Vector3::new(1.0, phi.cos(), phi.sin());
    let solve = |w: &[f64]| -> Result<(Vector3<f64>, Matrix3<f64>)> {
        let mut xtx = Matrix3::zeros();
        let mut xty = Vector3::zeros();
        for (p, wi) in pts.iter().zip(w) {
            let b = basis(p.phi);
            xtx += b * b.transpose() * *wi;
            xty += b * (p.p_hat * wi);
        }
        let eig = xtx.symmetric_eigen();
        let (lo, hi) = eig.eigenvalues.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &e| (l.min(e), h.max(e)));
        if !(lo > 1e-10 * hi) {
            return Err(Error::DegenerateDesign("sinusoid design matrix is singular".into()));
        }
        let inv = xtx.try_inverse().ok_or_else(|| Error::DegenerateDesign("singular design".into()))?;
        Ok((inv * xty, inv))
    };
    let variance = |p: f64, shots: u64| {
        let floor = 1.0 / (2.0 * shots as f64);
        (p * (1.0 - p) / shots as f64).max(floor * floor)
    };

    let mut w = vec![1.0; pts.len()];
    let (mut c, mut cov) = solve(&w)?;
    for _ in 0..4 {
        for (wi, p) in w.iter_mut().zip(pts) {
            let m = (c.dot(&basis(p.phi))).clamp(0.0, 1.0);
            *wi = 1.0 / variance(m, p.shots);
        }
        (c, cov) = solve(&w)?;
    }
    let chi2 = pts.iter().zip(&w).map(|(p, wi)| (p.p_hat - c.dot(&basis(p.phi))).powi(2) * wi).sum();

    let (c1, c2) = (c[1], c[2]);
    let r2 = c1 * c1 + c2 * c2;
    let r = r2.sqrt();
    let (v11, v12, v22) = (cov[(1, 1)], cov[(1, 2)], cov[(2, 2)]);
    let (a, phi0, sigma_a, sigma_phi0) = if r < 1e-12 {
        (0.0, 0.0, 2.0 * (0.5 * (v11 + v22)).sqrt(), f64::INFINITY)
    } else {
        let sa = 2.0 * ((c1 * c1 * v11 + 2.0 * c1 * c2 * v12 + c2 * c2 * v22) / r2).sqrt();
        let sp = ((c2 * c2 * v11 - 2.0 * c1 * c2 * v12 + c1 * c1 * v22) / (r2 * r2)).sqrt();
        (2.0 * r, (-c2).atan2(-c1), sa, sp)
    };
    Ok(SinusoidFit { a, phi0, sigma_a, sigma_phi0, offset: c[0], chi2 })
}

/// `A(τ) = e^{−γτ} exp(−2D² sin²(πτ/t_r))`
pub fn amplitude_model(tau: f64, d: f64, t_r: f64, gamma: f64) -> f64 {
    (-gamma * tau - 2.0 * d * d * (PI * tau / t_r).sin().powi(2)).exp()
}

/// `φ₀(τ) = c + Δ_π τ + B² sin²(πτ/t_r)`
pub fn phase_model(tau: f64, constant: f64, delta_pi: f64, b: f64, t_r: f64) -> f64 {
    constant + delta_pi * tau + b * b * (PI * tau / t_r).sin().powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeFit {
    pub d: f64,
    pub t_r: f64,
    pub gamma: f64,
    pub sigma_d: f64,
    pub sigma_t_r: f64,
    pub sigma_gamma: f64,
    /// RMS of `A − model`.
    pub residual: f64,
    pub chi2: f64,
    pub converged: bool,
}

impl AmplitudeFit {
    /// Fixed parameters with no uncertainty information, e.g. tabulated values.
    pub fn from_values(d: f64, t_r: f64, gamma: f64) -> Self {
        let inf = f64::INFINITY;
        Self { d, t_r, gamma, sigma_d: inf, sigma_t_r: inf, sigma_gamma: inf, residual: 0.0, chi2: 0.0, converged: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseFit {
    pub constant: f64,
    pub delta_pi: f64,
    pub b: f64,
    pub t_r: f64,
    pub sigma_constant: f64,
    pub sigma_delta_pi: f64,
    pub sigma_b: f64,
    pub sigma_t_r: f64,
    pub residual: f64,
    pub chi2: f64,
    pub converged: bool,
    /// Some adjacent input phases differed by more than π.
    pub unwrap_ambiguous: bool,
}

impl PhaseFit {
    pub fn from_values(constant: f64, delta_pi: f64, b: f64, t_r: f64) -> Self {
        let inf = f64::INFINITY;
        Self {
            constant,
            delta_pi,
            b,
            t_r,
            sigma_constant: inf,
            sigma_delta_pi: inf,
            sigma_b: inf,
            sigma_t_r: inf,
            residual: 0.0,
            chi2: 0.0,
            converged: true,
            unwrap_ambiguous: false,
        }
    }
}

fn check_curve_input(points: &[(f64, f64)], sigmas: Option<&[f64]>) -> Result<Vec<f64>> {
    if points.len() < 6 {
        return Err(Error::InvalidInput(format!("curve fit needs at least 6 points (got {})", points.len())));
    }
    if points.iter().any(|(t, y)| !t.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidInput("non-finite curve point".into()));
    }
    match sigmas {
        Some(s) if s.len() != points.len() => Err(Error::DimensionMismatch(s.len(), points.len())),
        Some(s) if s.iter().any(|x| !(*x > 0.0)) => Err(Error::InvalidInput("sigmas must be positive".into())),
        Some(s) => Ok(s.to_vec()),
        None => Ok(vec![1.0; points.len()]),
    }
}

fn tau_span(points: &[(f64, f64)]) -> (f64, f64) {
    points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (t, _)| (lo.min(*t), hi.max(*t)))
}

/// Fits `A(τ)`; `sigmas` are per-point standard errors (unit weights if `None`).
/// Without `t_r_guess`, starts are seeded from the revival maximum and twice the
/// deepest minimum, plus a coarse grid, and the best fit is kept.
pub fn fit_amplitude_curve(points: &[(f64, f64)], sigmas: Option<&[f64]>, t_r_guess: Option<f64>) -> Result<AmplitudeFit> {
    let sig = check_curve_input(points, sigmas)?;
    let mut pts: Vec<(f64, f64, f64)> = points.iter().zip(&sig).map(|(&(t, a), &s)| (t, a, s)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (t_lo, t_hi) = tau_span(points);
    let span = t_hi - t_lo;
    if !(span > 0.0) {
        return Err(Error::DegenerateDesign("all τ values coincide".into()));
    }

    let mut candidates: Vec<f64> = Vec::new();
    if let Some(g) = t_r_guess {
        candidates.push(g);
    } else {
        let imin = (0..pts.len()).min_by(|&i, &j| pts[i].1.total_cmp(&pts[j].1)).unwrap();
        let t_min = pts[imin].0;
        if t_min > 0.0 {
            candidates.push(2.0 * t_min);
        }
        if let Some(imax) = (imin..pts.len()).max_by(|&i, &j| pts[i].1.total_cmp(&pts[j].1)) {
            if imax > imin {
                candidates.push(pts[imax].0);
            }
        }
        candidates.extend((0..8).map(|k| t_hi * (0.5 + 0.15 * k as f64)));
    }

    let residuals = |p: &[f64]| pts.iter().map(|(t, a, s)| (amplitude_model(*t, p[0], p[1], p[2]) - a) / s).collect::<Vec<_>>();
    let bounds = [(0.0, 50.0), (1e-3 * t_hi, 100.0 * t_hi), (0.0, 1e3 / span.max(1e-12))];
    let scales = [1.0, t_hi, 1.0 / t_hi];
    let mut best: Option<crate::lsq::LmResult> = None;
    for &tr0 in &candidates {
        let at = |t: f64| pts.iter().min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs())).unwrap().1;
        let a_rev = at(tr0);
        let gamma0 = if tr0 <= t_hi && a_rev > 0.0 { (-a_rev.ln() / tr0).max(0.0) } else { 0.0 };
        let a_half = at(0.5 * tr0).max(1e-6);
        let d0 = ((-a_half.ln() - 0.5 * gamma0 * tr0).max(0.02) / 2.0).sqrt();
        let res = levenberg_marquardt(residuals, &[d0, tr0, gamma0], &bounds, &scales, &LmOptions::default());
        if best.as_ref().is_none_or(|b| res.chi2 < b.chi2) {
            best = Some(res);
        }
    }
    let res = best.expect("at least one start");
    if !res.converged {
        log::warn!("amplitude fit did not converge; returning best-so-far");
    }
    let se = res.std_errors(pts.len());
    let p = &res.params;
    if span < 0.8 * p[1] {
        log::warn!("amplitude data span {:.3e} s covers less than 0.8 t_r", span);
    }
    let residual = (pts.iter().map(|(t, a, _)| (amplitude_model(*t, p[0], p[1], p[2]) - a).powi(2)).sum::<f64>() / pts.len() as f64).sqrt();
    Ok(AmplitudeFit {
        d: p[0],
        t_r: p[1],
        gamma: p[2],
        sigma_d: se[0],
        sigma_t_r: se[1],
        sigma_gamma: se[2],
        residual,
        chi2: res.chi2,
        converged: res.converged,
    })
}

/// Sequential nearest-branch unwrapping in input order. The flag reports any
/// raw adjacent gap above π (where the branch choice was not forced by the data).
pub fn unwrap_phases(phases: &[f64]) -> (Vec<f64>, bool) {
    let mut out = Vec::with_capacity(phases.len());
    let mut ambiguous = false;
    for (i, &ph) in phases.iter().enumerate() {
        if i == 0 {
            out.push(ph);
            continue;
        }
        let prev = out[i - 1];
        if (ph - phases[i - 1]).abs() > PI {
            ambiguous = true;
        }
        out.push(ph - TAU * ((ph - prev) / TAU).round());
    }
    (out, ambiguous)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseFitOptions {
    pub t_r_guess: Option<f64>,
    pub delta_pi_guess: Option<f64>,
}

/// Fits `φ₀(τ)`. Phases are unwrapped sequentially (and flagged if ambiguous);
/// each multistart then re-assigns points by `2πk` to the branch nearest its
/// current curve and refits until stable.
pub fn fit_phase_curve(points: &[(f64, f64)], sigmas: Option<&[f64]>, opts: &PhaseFitOptions) -> Result<PhaseFit> {
    let sig = check_curve_input(points, sigmas)?;
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].0.total_cmp(&points[b].0));
    let taus: Vec<f64> = order.iter().map(|&i| points[i].0).collect();
    let s: Vec<f64> = order.iter().map(|&i| sig[i]).collect();
    let raw: Vec<f64> = order.iter().map(|&i| points[i].1).collect();
    let (mut ys, unwrap_ambiguous) = unwrap_phases(&raw);
    if unwrap_ambiguous {
        log::warn!("phase unwrapping ambiguous: adjacent gap exceeds pi");
    }
    let (_, t_hi) = tau_span(points);
    if !(t_hi > taus[0]) {
        return Err(Error::DegenerateDesign("all τ values coincide".into()));
    }

    let fit_once = |ys: &[f64], starts: &[[f64; 4]]| {
        let residuals = |p: &[f64]| taus.iter().zip(ys).zip(&s).map(|((t, y), sg)| (phase_model(*t, p[0], p[1], p[2], p[3]) - y) / sg).collect::<Vec<_>>();
        let bounds = [(-1e6, 1e6), (-1e9, 1e9), (0.0, 100.0), (1e-3 * t_hi, 100.0 * t_hi)];
        let scales = [1.0, 1.0 / t_hi, 1.0, t_hi];
        starts
            .iter()
            .map(|p0| levenberg_marquardt(residuals, p0, &bounds, &scales, &LmOptions::default()))
            .min_by(|a, b| a.chi2.total_cmp(&b.chi2))
            .unwrap()
    };

    // Weighted straight line for the starting constant and slope.
    let w: Vec<f64> = s.iter().map(|x| 1.0 / (x * x)).collect();
    let sw: f64 = w.iter().sum();
    let mt = taus.iter().zip(&w).map(|(t, w)| t * w).sum::<f64>() / sw;
    let my = ys.iter().zip(&w).map(|(y, w)| y * w).sum::<f64>() / sw;
    let stt: f64 = taus.iter().zip(&w).map(|(t, w)| w * (t - mt).powi(2)).sum();
    let sty: f64 = taus.iter().zip(&ys).zip(&w).map(|((t, y), w)| w * (t - mt) * (y - my)).sum();
    let slope0 = opts.delta_pi_guess.unwrap_or(if stt > 0.0 { sty / stt } else { 0.0 });
    let trs: Vec<f64> = match opts.t_r_guess {
        Some(g) => vec![g],
        None => (0..6).map(|k| t_hi * (0.6 + 0.2 * k as f64)).collect(),
    };

    // Each start fits the unwrapped data and, separately, the data pulled onto
    // the branch nearest its own curve; fit and re-alignment then alternate
    // until no point changes branch.
    let align = |ys: &mut [f64], p: &[f64]| {
        let mut moved = false;
        for (t, y) in taus.iter().zip(ys.iter_mut()) {
            let k = ((*y - phase_model(*t, p[0], p[1], p[2], p[3])) / TAU).round();
            if k != 0.0 {
                *y -= TAU * k;
                moved = true;
            }
        }
        moved
    };
    let mut best: Option<(crate::lsq::LmResult, Vec<f64>)> = None;
    for &tr in &trs {
        for b in [0.5, 1.5, 2.5, 3.5, 4.5, 6.0] {
            let c0 = ys[0] - slope0 * taus[0] - b * b * (PI * taus[0] / tr).sin().powi(2);
            let p0 = [c0, slope0, b, tr];
            for pre_align in [false, true] {
                let mut y = ys.clone();
                if pre_align {
                    align(&mut y, &p0);
                }
                let mut res = fit_once(&y, &[p0]);
                for _ in 0..10 {
                    if !align(&mut y, &res.params) {
                        break;
                    }
                    let p = [res.params[0], res.params[1], res.params[2], res.params[3]];
                    res = fit_once(&y, &[p]);
                }
                if best.as_ref().is_none_or(|(r, _)| res.chi2 < r.chi2) {
                    best = Some((res, y));
                }
            }
        }
    }
    let (res, aligned) = best.expect("at least one start");
    ys = aligned;
    if !res.converged {
        log::warn!("phase fit did not converge; returning best-so-far");
    }
    let se = res.std_errors(taus.len());
    let p = &res.params;
    let residual = (taus.iter().zip(&ys).map(|(t, y)| (phase_model(*t, p[0], p[1], p[2], p[3]) - y).powi(2)).sum::<f64>() / taus.len() as f64).sqrt();
    Ok(PhaseFit {
        constant: p[0],
        delta_pi: p[1],
        b: p[2],
        t_r: p[3],
        sigma_constant: se[0],
        sigma_delta_pi: se[1],
        sigma_b: se[2],
        sigma_t_r: se[3],
        residual,
        chi2: res.chi2,
        converged: res.converged,
        unwrap_ambiguous,
    })
}

/// How the maximum branch separation is obtained at the inferred parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SeparationEngine {
    /// Branch centroids from the Schrödinger propagation.
    Quantum(PropagatorConfig),
    Classical,
    /// Do not simulate; `delta_alpha_max` is NaN.
    Skip,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InferenceOptions {
    /// Sign of δ, which the fringe data cannot resolve.
    pub detuning_sign: f64,
    /// Trap and Lamb-Dicke parameter for the inferred drive.
    pub units: UnitSystem,
    pub engine: SeparationEngine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InferredParameters {
    pub r_alpha0: f64,
    pub r: f64,
    pub alpha0: f64,
    pub alpha_max: f64,
    /// Signed detuning (rad/s).
    pub delta: f64,
    /// Return time used (s).
    pub t_r: f64,
    pub delta_alpha_max: f64,
    /// The LDR identities (α_max = α₀, R = 1) were used instead of the empirical laws.
    pub ldr: bool,
}

/// Below this `η·Rα₀` the excursion is treated as LDR.
pub const LDR_LIMIT: f64 = 0.05;

/// Solves `Rα₀ = (1 − s)α₀ + s·α_max(η, α₀)` for α₀ (`s` the return-law slope).
pub fn solve_alpha0(r_alpha0: f64, eta: f64) -> Result<f64> {
    let s = PUBLISHED_RETURN_SLOPE;
    let h = |a0: f64| (1.0 - s) * a0 + s * alpha_max_cubic(eta, a0) - r_alpha0;
    let mut lo = r_alpha0;
    let mut hi = r_alpha0.max(1e-3);
    while h(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e4 {
            return Err(Error::BracketFailure { lo: r_alpha0, hi });
        }
    }
    if h(lo) > 0.0 {
        return Err(Error::BracketFailure { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn alpha_max_cubic(eta: f64, alpha0: f64) -> f64 {
    let x = eta * alpha0;
    crate::classical::PUBLISHED_CUBIC.iter().fold(0.0, |acc, c| acc * x + c) / eta
}

/// Drive reconstructed from inferred values: `Ω = α₀|δ|/η`, phases `±Φ_w/2`.
pub fn inferred_drive(inf: &InferredParameters, phi_w: f64, delta_pi: f64, units: UnitSystem) -> DriveParams {
    DriveParams::symmetric(units, inf.alpha0 * inf.delta.abs() / units.eta, inf.delta, phi_w, delta_pi)
}

pub fn infer_parameters(amp: &AmplitudeFit, phase: &PhaseFit, phi_w: f64, nbar0: f64, opts: &InferenceOptions) -> Result<InferredParameters> {
    if !(phi_w > 0.0 && phi_w < PI) {
        return Err(Error::InvalidInput(format!("Phi_w = {phi_w} outside (0, pi)")));
    }
    if !(nbar0 >= 0.0) || opts.detuning_sign == 0.0 || !(amp.t_r > 0.0) {
        return Err(Error::InvalidInput("need nbar0 >= 0, non-zero detuning sign and t_r > 0".into()));
    }
    let joint = (amp.sigma_t_r.powi(2) + phase.sigma_t_r.powi(2)).sqrt();
    if (amp.t_r - phase.t_r).abs() > joint {
        log::warn!("amplitude and phase return times differ: {:.4e} vs {:.4e} s", amp.t_r, phase.t_r);
    }
    let t_r = if amp.sigma_t_r.is_finite() && phase.sigma_t_r.is_finite() && amp.sigma_t_r > 0.0 && phase.sigma_t_r > 0.0 {
        let (wa, wp) = (amp.sigma_t_r.powi(-2), phase.sigma_t_r.powi(-2));
        (wa * amp.t_r + wp * phase.t_r) / (wa + wp)
    } else {
        amp.t_r
    };
    let eta = opts.units.eta;
    let r_alpha0 = amp.d / ((2.0 * nbar0 + 1.0).sqrt() * (0.5 * phi_w).sin());
    let ldr = eta * r_alpha0 < LDR_LIMIT;
    let (alpha0, alpha_max) = if ldr {
        (r_alpha0, r_alpha0)
    } else {
        let a0 = solve_alpha0(r_alpha0, eta)?;
        (a0, alpha_max_empirical(eta, a0))
    };
    let r = r_alpha0 / alpha0;
    let delta = opts.detuning_sign.signum() * TAU * r / t_r;
    let mut inf = InferredParameters { r_alpha0, r, alpha0, alpha_max, delta, t_r, delta_alpha_max: f64::NAN, ldr };
    let params = inferred_drive(&inf, phi_w, phase.delta_pi, opts.units);
    inf.delta_alpha_max = match opts.engine {
        SeparationEngine::Skip => f64::NAN,
        SeparationEngine::Classical => classical_separation(&params, t_r)?,
        SeparationEngine::Quantum(cfg) => quantum_separation(&params, t_r, &cfg)?,
    };
    Ok(inf)
}

fn separation_grid(t_end: f64) -> Vec<f64> {
    let n = 400;
    (0..=n).map(|i| t_end * i as f64 / n as f64).collect()
}

/// max over `[0, t_end]` of `|α_↑ − α_↓|` from classical trajectories.
pub fn classical_separation(params: &DriveParams, t_end: f64) -> Result<f64> {
    let times = separation_grid(t_end);
    let z = C64::new(0.0, 0.0);
    let up = integrate_on(z, Spin::Up, params, &times, 1e-9)?;
    let down = integrate_on(z, Spin::Down, params, &times, 1e-9)?;
    Ok(up.alphas.iter().zip(&down.alphas).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
}

/// max over `[0, t_end]` of the quantum centroid separation, from the vacuum.
pub fn quantum_separation(params: &DriveParams, t_end: f64, cfg: &PropagatorConfig) -> Result<f64> {
    let ev = evolve_cat_on(&MotionalState::vacuum(cfg.n_max), params, &separation_grid(t_end), cfg)?;
    Ok(ev.separations().into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceBudget {
    pub gamma: f64,
    pub gamma_s: f64,
    pub gamma_m: f64,
    pub a: f64,
    /// `1/(2γ_m)`; meaningless when `flagged`.
    pub t2: f64,
    /// `γ_m < 0`: inputs are mutually inconsistent.
    pub flagged: bool,
}

/// `γ_m = γ − γ_s + ln(a)/t_r`, `T₂ = 1/(2γ_m)`.
pub fn decoherence_budget(gamma: f64, gamma_s: f64, a: f64, t_r: f64) -> Result<DecoherenceBudget> {
    if !(a > 0.0 && a <= 1.0) || !(t_r > 0.0) {
        return Err(Error::InvalidInput(format!("need 0 < a <= 1 and t_r > 0 (a = {a}, t_r = {t_r})")));
    }
    let gamma_m = gamma - gamma_s + a.ln() / t_r;
    let flagged = gamma_m < 0.0;
    if flagged {
        log::warn!("negative motional decoherence rate {gamma_m:.3e} 1/s");
    }
    Ok(DecoherenceBudget { gamma, gamma_s, gamma_m, a, t2: 1.0 / (2.0 * gamma_m), flagged })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatMetrics {
    pub nbar: f64,
    pub delta_alpha: f64,
    /// Wavepacket separation `2Δα·x₀` (m).
    pub x_s: f64,
}

pub fn cat_metrics(alpha_max: f64, delta_alpha_max: f64, units: &UnitSystem) -> Result<CatMetrics> {
    if !(alpha_max >= 0.0 && delta_alpha_max >= 0.0) {
        return Err(Error::InvalidInput("cat metrics need non-negative inputs".into()));
    }
    Ok(CatMetrics { nbar: alpha_max * alpha_max, delta_alpha: delta_alpha_max, x_s: 2.0 * delta_alpha_max * units.x0 })
}

/// One row of the published parameter table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub set: u8,
    pub d: f64,
    pub t_r_us: f64,
    pub gamma_per_ms: f64,
    pub b: f64,
    pub delta_pi_khz: f64,
    pub nbar0: f64,
    pub eta: f64,
    /// Carrier Rabi rate from flopping / from Δ_π (kHz).
    pub omega_c_khz: (f64, f64),
    /// Detuning as set / as inferred (kHz).
    pub delta_khz: (f64, f64),
    /// α₀ from the light field / as inferred.
    pub alpha0: (f64, f64),
    pub alpha_max: f64,
    pub delta_alpha_max: f64,
}

pub const PHI_W: f64 = 1.41;
/// Trap frequency at which η = 0.244.
pub const REFERENCE_TRAP_KHZ: f64 = 536.0;
pub const REFERENCE_ETA: f64 = 0.244;

pub const TABLE: [TableRow; 5] = [
    TableRow { set: 1, d: 1.45, t_r_us: 89.0, gamma_per_ms: 2.0, b: 2.15, delta_pi_khz: 4.48, nbar0: 0.07, eta: 0.244, omega_c_khz: (139.0, 145.0), delta_khz: (10.0, 10.1), alpha0: (2.2, 2.4), alpha_max: 2.1, delta_alpha_max: 2.7 },
    TableRow { set: 2, d: 2.27, t_r_us: 147.0, gamma_per_ms: 4.1, b: 3.24, delta_pi_khz: 4.49, nbar0: 0.07, eta: 0.244, omega_c_khz: (139.0, 145.0), delta_khz: (5.0, 5.3), alpha0: (4.5, 4.2), alpha_max: 3.1, delta_alpha_max: 4.0 },
    TableRow { set: 3, d: 3.12, t_r_us: 192.0, gamma_per_ms: 5.6, b: 4.27, delta_pi_khz: 4.46, nbar0: 0.07, eta: 0.244, omega_c_khz: (139.0, 145.0), delta_khz: (3.5, 3.4), alpha0: (6.4, 6.8), alpha_max: 4.0, delta_alpha_max: 5.1 },
    TableRow { set: 4, d: 1.50, t_r_us: 91.0, gamma_per_ms: 3.5, b: 2.03, delta_pi_khz: 7.36, nbar0: 0.04, eta: 0.199, omega_c_khz: (151.0, 185.0), delta_khz: (10.0, 10.2), alpha0: (2.0, 2.3), alpha_max: 2.1, delta_alpha_max: 2.7 },
    TableRow { set: 5, d: 1.88, t_r_us: 160.0, gamma_per_ms: 4.6, b: 2.72, delta_pi_khz: 4.27, nbar0: 0.02, eta: 0.245, omega_c_khz: (137.0, 142.0), delta_khz: (-5.5, -5.2), alpha0: (4.0, 3.4), alpha_max: 2.7, delta_alpha_max: 3.5 },
];

impl TableRow {
    pub fn get(set: u8) -> Result<&'static TableRow> {
        TABLE.iter().find(|r| r.set == set).ok_or_else(|| Error::InvalidInput(format!("no data set {set}")))
    }

    /// Ca-40 units with the trap frequency implied by η (`η ∝ ω₀^{-1/2}`).
    pub fn units(&self) -> Result<UnitSystem> {
        UnitSystem::ca40_khz(REFERENCE_TRAP_KHZ * (REFERENCE_ETA / self.eta).powi(2), self.eta)
    }

    pub fn amplitude_fit(&self) -> AmplitudeFit {
        AmplitudeFit::from_values(self.d, self.t_r_us * 1e-6, self.gamma_per_ms * 1e3)
    }

    pub fn phase_fit(&self) -> PhaseFit {
        PhaseFit::from_values(0.0, khz_to_rad_s(self.delta_pi_khz), self.b, self.t_r_us * 1e-6)
    }

    pub fn inference_options(&self, engine: SeparationEngine) -> Result<InferenceOptions> {
        Ok(InferenceOptions { detuning_sign: self.delta_khz.0.signum(), units: self.units()?, engine })
    }

    pub fn infer(&self, engine: SeparationEngine) -> Result<InferredParameters> {
        infer_parameters(&self.amplitude_fit(), &self.phase_fit(), PHI_W, self.nbar0, &self.inference_options(engine)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Force durations (s), increasing.
    pub taus: Vec<f64>,
    pub phi_grid: Vec<f64>,
    pub shots: u64,
    pub seed: u64,
    pub nbar0: f64,
    /// Applied as `e^{−γτ}` to the overlap (1/s).
    pub gamma: f64,
    /// Starting slope for the phase fit (rad/s); the fringe phase cannot be
    /// followed through the dead zone around `t_r/2`, so the branch count
    /// there is anchored on this value. `None` uses the drive's own Δ_π.
    pub delta_pi_prior: Option<f64>,
    pub propagator: PropagatorConfig,
}

impl PipelineConfig {
    /// 16 φ points, `per_loop` τ points per LDR loop up to `loops` loops, 500 shots.
    pub fn standard(params: &DriveParams, loops: f64, per_loop: usize, seed: u64) -> Self {
        let t_end = loops * params.loop_period();
        let n = (loops * per_loop as f64).round() as usize;
        Self {
            taus: (1..=n).map(|i| t_end * i as f64 / n as f64).collect(),
            phi_grid: (0..16).map(|i| TAU * i as f64 / 16.0).collect(),
            shots: 500,
            seed,
            nbar0: 0.0,
            gamma: 0.0,
            delta_pi_prior: None,
            propagator: PropagatorConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub tau: f64,
    /// Generating motional overlap including decay.
    pub overlap: (f64, f64),
    pub fit: SinusoidFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineResult {
    pub scans: Vec<ScanResult>,
    pub amplitude: AmplitudeFit,
    pub phase: PhaseFit,
    pub inferred: InferredParameters,
}

/// Motional overlaps `O(τ)` (without the `e^{iΔ_π τ}` spin phase), thermally
/// averaged over `nbar0`.
pub fn motional_overlaps(params: &DriveParams, taus: &[f64], nbar0: f64, cfg: &PropagatorConfig) -> Result<Vec<C64>> {
    let ens = thermal_weights(nbar0, 1e-9)?;
    let full = thermal_branch_overlap(&ens, params, taus, cfg)?;
    Ok(full.into_iter().zip(taus).map(|(o, t)| o * C64::from_polar(1.0, -params.delta_pi * t)).collect())
}

/// Synthetic data end to end: overlaps, shot-noise scans, sinusoid fits,
/// curve fits and inference. Scan `i` uses ChaCha stream `i` of `seed`.
pub fn run_pipeline(params: &DriveParams, pc: &PipelineConfig, engine: SeparationEngine) -> Result<PipelineResult> {
    let overlaps: Vec<C64> = motional_overlaps(params, &pc.taus, pc.nbar0, &pc.propagator)?
        .into_iter()
        .zip(&pc.taus)
        .map(|(o, &tau)| o * (-pc.gamma * tau).exp())
        .collect();
    let synth = synthesize_scans(&overlaps, params.delta_pi, &pc.taus, &pc.phi_grid, pc.shots, pc.seed)?;
    let opts = InferenceOptions { detuning_sign: params.delta.signum(), units: params.units, engine };
    let delta_pi_guess = pc.delta_pi_prior.unwrap_or(params.delta_pi);
    let an = analyze_scans(&synth, params.phi_w(), pc.nbar0, delta_pi_guess, &opts)?;
    let scans = synth
        .iter()
        .zip(&overlaps)
        .zip(an.fits)
        .map(|((scan, o), fit)| ScanResult { tau: scan.tau, overlap: (o.re, o.im), fit })
        .collect();
    Ok(PipelineResult { scans, amplitude: an.amplitude, phase: an.phase, inferred: an.inferred })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanAnalysis {
    /// One per input scan, in input order.
    pub fits: Vec<SinusoidFit>,
    pub amplitude: AmplitudeFit,
    pub phase: PhaseFit,
    pub inferred: InferredParameters,
}

/// Sinusoid fits per scan, then the amplitude and phase curves and inference.
/// Scans whose fringe phase is undetermined (σ_φ ≥ 1 rad) are left out of the
/// phase curve.
pub fn analyze_scans(scans: &[FringeScan], phi_w: f64, nbar0: f64, delta_pi_guess: f64, opts: &InferenceOptions) -> Result<ScanAnalysis> {
    let fits: Vec<SinusoidFit> = scans.iter().map(fit_sinusoid).collect::<Result<_>>()?;
    let shots = scans.iter().flat_map(|s| s.points.iter().map(|p| p.shots)).min().unwrap_or(1);
    let floor = 1.0 / (2.0 * shots as f64);
    let amp_pts: Vec<(f64, f64)> = scans.iter().zip(&fits).map(|(s, f)| (s.tau, f.a)).collect();
    let amp_sig: Vec<f64> = fits.iter().map(|f| f.sigma_a.max(floor)).collect();
    let amplitude = fit_amplitude_curve(&amp_pts, Some(&amp_sig), None)?;

    let usable: Vec<(f64, &SinusoidFit)> = scans.iter().zip(&fits).filter(|(_, f)| f.sigma_phi0.is_finite() && f.sigma_phi0 < 1.0).map(|(s, f)| (s.tau, f)).collect();
    let ph_pts: Vec<(f64, f64)> = usable.iter().map(|(t, f)| (*t, f.phi0)).collect();
    let ph_sig: Vec<f64> = usable.iter().map(|(_, f)| f.sigma_phi0).collect();
    let phase = fit_phase_curve(&ph_pts, Some(&ph_sig), &PhaseFitOptions { t_r_guess: Some(amplitude.t_r), delta_pi_guess: Some(delta_pi_guess) })?;

    let inferred = infer_parameters(&amplitude, &phase, phi_w, nbar0, opts)?;
    Ok(ScanAnalysis { fits, amplitude, phase, inferred })
}
