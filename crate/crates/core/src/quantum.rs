//! Schrödinger propagation of the motional state for each spin branch.
//!
//! States are kept in the oscillator interaction picture `ψ_I = e^{iω₀t a†a} ψ_lab`,
//! where `⟨a⟩` is directly the rotating-frame amplitude α. With `s = ω₀t`,
//!
//! `dψ_I/ds = −i (Ω/ω₀) P(s) [cos θ·C + sin θ·S] P(s)† ψ_I`, `P = e^{isa†a}`,
//! `θ = ωt − φ_m`.
//!
//! The spin-dependent `±Δ_π/2` shift only multiplies each branch by a scalar
//! phase (`e^{∓iΔ_π t/2}` for ↑/↓), which is added analytically.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::Trajectory;
use crate::error::{Error, Result};
use crate::fock::{inner, MotionalState, ThermalEnsemble};
use crate::ode::{integrate, Stats, StepControl};
use crate::operators::WalkingWaveOperator;
use crate::units::{DriveParams, Spin};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropagationMode {
    /// Full walking-wave operator, all orders in η and all sidebands.
    Exact,
    /// Carrier plus the first `order` motional sidebands (`order ≤ 3`).
    Sideband(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorConfig {
    pub n_max: usize,
    /// Relative step-control tolerance; the absolute tolerance is `1e-3·rel_tol`.
    pub rel_tol: f64,
    pub mode: PropagationMode,
    /// Output samples per LDR loop on default grids.
    pub samples_per_loop: usize,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        Self { n_max: 100, rel_tol: 1e-9, mode: PropagationMode::Exact, samples_per_loop: 400 }
    }
}

impl PropagatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_max < 2 {
            return Err(Error::InvalidInput("n_max must be at least 2".into()));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1e-2) {
            return Err(Error::InvalidInput(format!("rel_tol {} out of range", self.rel_tol)));
        }
        if let PropagationMode::Sideband(k) = self.mode {
            if k > 3 {
                return Err(Error::InvalidInput(format!("sideband order {k} > 3")));
            }
        }
        if self.samples_per_loop < 10 {
            return Err(Error::InvalidInput("samples_per_loop must be at least 10".into()));
        }
        Ok(())
    }

    /// Warns when `n_max < 4α₀²` for the drive's LDR excursion. Returns `true` if flagged.
    pub fn check_drive(&self, params: &DriveParams) -> bool {
        let a0 = params.alpha0();
        let flagged = a0.is_finite() && (self.n_max as f64) < 4.0 * a0 * a0;
        if flagged {
            log::warn!("n_max = {} is below 4*alpha0^2 = {:.0}; relying on the truncation guard", self.n_max, 4.0 * a0 * a0);
        }
        flagged
    }

    /// Uniform grid over `[0, t_end]` with `samples_per_loop` points per LDR loop.
    pub fn time_grid(&self, params: &DriveParams, t_end: f64) -> Vec<f64> {
        let per = params.loop_period();
        let n = if per.is_finite() { (t_end / per * self.samples_per_loop as f64).ceil() as usize } else { 1000 };
        let n = n.max(50);
        (0..=n).map(|i| t_end * i as f64 / n as f64).collect()
    }

    fn operator(&self, eta: f64) -> WalkingWaveOperator {
        match self.mode {
            PropagationMode::Exact => WalkingWaveOperator::exact(eta, self.n_max),
            PropagationMode::Sideband(k) => WalkingWaveOperator::sideband_truncated(eta, self.n_max, k),
        }
    }
}

/// Motional states of one branch at the requested times (interaction picture,
/// without the scalar Δ_π phase).
#[derive(Debug, Clone, PartialEq)]
pub struct BranchStates {
    pub times: Vec<f64>,
    /// Renormalized states.
    pub states: Vec<MotionalState>,
    /// Largest `|‖ψ‖² − 1|` seen before renormalization.
    pub norm_drift: f64,
    pub stats: Stats,
}

/// Propagates one branch from `t = 0` on the default grid up to `t_end`.
pub fn propagate_branch(
    psi0: &MotionalState,
    spin: Spin,
    params: &DriveParams,
    t_end: f64,
    cfg: &PropagatorConfig,
) -> Result<BranchStates> {
    propagate_between(psi0, 0.0, spin, params, &cfg.time_grid(params, t_end), cfg)
}

/// Propagates `psi` given at `t_start` to each of `times`, which must be ordered
/// away from `t_start` (either direction; backward runs undo forward ones).
pub fn propagate_between(
    psi: &MotionalState,
    t_start: f64,
    spin: Spin,
    params: &DriveParams,
    times: &[f64],
    cfg: &PropagatorConfig,
) -> Result<BranchStates> {
    cfg.validate()?;
    if psi.n_max() != cfg.n_max {
        return Err(Error::DimensionMismatch(psi.dim(), cfg.n_max + 1));
    }
    psi.check_truncation(Some(t_start))?;
    cfg.check_drive(params);

    let u = params.units;
    let op = cfg.operator(u.eta);
    let dim = op.dim();
    let omega_t = params.omega_rabi / u.omega0;
    let w_t = params.omega() / u.omega0;
    let phi = params.phi(spin);
    let mut scratch_in = vec![C64::new(0.0, 0.0); dim];
    let mut scratch_out = vec![C64::new(0.0, 0.0); dim];
    let rhs = move |s: f64, y: &[C64], dy: &mut [C64]| {
        let step = C64::from_polar(1.0, -s);
        let mut ph = C64::new(1.0, 0.0);
        for (u, v) in scratch_in.iter_mut().zip(y) {
            *u = v * ph;
            ph *= step;
        }
        let theta = w_t * s - phi;
        op.apply(theta.cos(), theta.sin(), &scratch_in, &mut scratch_out);
        let step = step.conj();
        let mut ph = C64::new(0.0, -omega_t);
        for (d, v) in dy.iter_mut().zip(&scratch_out) {
            *d = v * ph;
            ph *= step;
        }
    };
    let outs: Vec<f64> = times.iter().map(|&t| u.to_dimless_time(t)).collect();
    let ctl = StepControl::new(cfg.rel_tol, 1e-3 * cfg.rel_tol);
    let (ys, stats) = integrate(rhs, u.to_dimless_time(t_start), psi.amplitudes(), &outs, &ctl)?;

    let mut norm_drift = 0.0f64;
    let mut states = Vec::with_capacity(ys.len());
    for (y, &t) in ys.into_iter().zip(times) {
        let mut s = MotionalState::from_raw(y)?;
        norm_drift = norm_drift.max((s.norm_sqr() - 1.0).abs());
        s.normalize();
        s.check_truncation(Some(t))?;
        states.push(s);
    }
    Ok(BranchStates { times: times.to_vec(), states, norm_drift, stats })
}

/// Both spin branches of the cat on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchEvolution {
    pub times: Vec<f64>,
    pub up: Vec<MotionalState>,
    pub down: Vec<MotionalState>,
    /// `⟨ψ_↑|ψ_↓⟩` including the relative phase `e^{iΔ_π t}`.
    pub overlaps: Vec<C64>,
    pub centroids_up: Vec<C64>,
    pub centroids_down: Vec<C64>,
    pub loop_period: f64,
    pub norm_drift: f64,
}

impl BranchEvolution {
    /// Centroid separation `|α_↑ − α_↓|` per sample.
    pub fn separations(&self) -> Vec<f64> {
        self.centroids_up.iter().zip(&self.centroids_down).map(|(a, b)| (a - b).norm()).collect()
    }
}

pub fn evolve_cat(psi0: &MotionalState, params: &DriveParams, t_end: f64, cfg: &PropagatorConfig) -> Result<BranchEvolution> {
    evolve_cat_on(psi0, params, &cfg.time_grid(params, t_end), cfg)
}

/// As [`evolve_cat`] on caller-supplied times (non-decreasing, starting at or after 0).
pub fn evolve_cat_on(psi0: &MotionalState, params: &DriveParams, times: &[f64], cfg: &PropagatorConfig) -> Result<BranchEvolution> {
    let (up, down) = rayon::join(
        || propagate_between(psi0, 0.0, Spin::Up, params, times, cfg),
        || propagate_between(psi0, 0.0, Spin::Down, params, times, cfg),
    );
    let (up, down) = (up?, down?);
    let overlaps = times
        .iter()
        .zip(up.states.iter().zip(&down.states))
        .map(|(&t, (a, b))| inner(a.amplitudes(), b.amplitudes()) * C64::from_polar(1.0, params.delta_pi * t))
        .collect();
    Ok(BranchEvolution {
        times: times.to_vec(),
        centroids_up: up.states.iter().map(MotionalState::mean_a).collect(),
        centroids_down: down.states.iter().map(MotionalState::mean_a).collect(),
        up: up.states,
        down: down.states,
        overlaps,
        loop_period: params.loop_period(),
        norm_drift: up.norm_drift.max(down.norm_drift),
    })
}

/// Thermal average `Σ_n p_n ⟨ψ_↑⁽ⁿ⁾|ψ_↓⁽ⁿ⁾⟩` over initial Fock levels.
pub fn thermal_branch_overlap(
    ensemble: &ThermalEnsemble,
    params: &DriveParams,
    t_grid: &[f64],
    cfg: &PropagatorConfig,
) -> Result<Vec<C64>> {
    let per_level: Vec<Result<Vec<C64>>> = ensemble
        .levels()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(n, p)| {
            let psi0 = MotionalState::fock(n, cfg.n_max)?;
            let ev = evolve_cat_on(&psi0, params, t_grid, cfg)?;
            Ok(ev.overlaps.into_iter().map(|o| o * p).collect())
        })
        .collect();
    let mut total = vec![C64::new(0.0, 0.0); t_grid.len()];
    for level in per_level {
        for (acc, o) in total.iter_mut().zip(level?) {
            *acc += o;
        }
    }
    Ok(total)
}

/// Centroid paths `(↑, ↓)` as classical-style trajectories.
pub fn centroid_trajectory(ev: &BranchEvolution) -> (Trajectory, Trajectory) {
    let mk = |alphas: &[C64], spin| Trajectory { times: ev.times.clone(), alphas: alphas.to_vec(), spin, loop_period: ev.loop_period };
    (mk(&ev.centroids_up, Spin::Up), mk(&ev.centroids_down, Spin::Down))
}

/// Interaction-picture `H_I(t)/ℏ` (rad/s) for one branch, keeping `a^j`, `(a†)^j`
/// with `j ≤ order`; the scalar Δ_π shift is excluded.
pub fn sideband_truncated_hamiltonian(t: f64, params: &DriveParams, spin: Spin, order: usize, cfg: &PropagatorConfig) -> Result<DMatrix<C64>> {
    if order > 3 {
        return Err(Error::InvalidInput(format!("sideband order {order} > 3")));
    }
    let op = WalkingWaveOperator::sideband_truncated(params.units.eta, cfg.n_max, order);
    let theta = params.omega() * t - params.phi(spin);
    let real = op.dense(theta.cos(), theta.sin());
    let w0t = params.units.omega0 * t;
    Ok(DMatrix::from_fn(real.nrows(), real.ncols(), |m, n| {
        C64::from_polar(params.omega_rabi * real[(m, n)], (m as f64 - n as f64) * w0t)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::ldr_trajectory;
    use crate::fock::{coherent_state, overlap, thermal_weights};
    use crate::phase_space::squeezing_ratio;
    use crate::units::UnitSystem;

    fn small_cfg(n_max: usize) -> PropagatorConfig {
        PropagatorConfig { n_max, ..Default::default() }
    }

    fn ldr_drive() -> DriveParams {
        // η α₀ = 0.02, δ/ω₀ = 2.5e-4.
        let u = UnitSystem::ca40_khz(4000.0, 0.01).unwrap();
        DriveParams::from_khz(u, 2.0, 1.0, 0.4, -0.4, 0.0)
    }

    #[test]
    fn no_drive_leaves_state_alone() {
        let u = UnitSystem::ca40_khz(536.0, 0.244).unwrap();
        let p = DriveParams::from_khz(u, 0.0, 3.4, 0.7, -0.7, 2.0);
        let psi0 = coherent_state(C64::new(1.0, 0.5), 30).unwrap();
        let ev = evolve_cat(&psi0, &p, 50e-6, &small_cfg(30)).unwrap();
        for (t, (s, o)) in ev.times.iter().zip(ev.up.iter().zip(&ev.overlaps)) {
            assert!((overlap(s, &psi0).unwrap().norm() - 1.0).abs() < 1e-12);
            assert!((o - C64::from_polar(1.0, p.delta_pi * t)).norm() < 1e-12);
        }
    }

    #[test]
    fn ldr_centroid_follows_circle_and_stays_coherent() {
        let p = ldr_drive();
        let cfg = small_cfg(20);
        let br = propagate_branch(&MotionalState::vacuum(20), Spin::Up, &p, p.loop_period(), &cfg).unwrap();
        let a0 = p.alpha0();
        for (t, s) in br.times.iter().zip(&br.states) {
            let c = s.mean_a();
            assert!((c - ldr_trajectory(&p, Spin::Up, *t)).norm() < 1e-3 * a0);
            assert!((squeezing_ratio(s) - 1.0).abs() < 1e-3);
            let coh = coherent_state(c, 20).unwrap();
            assert!(overlap(&coh, s).unwrap().norm_sqr() > 0.9999);
        }
    }

    #[test]
    fn ldr_overlap_matches_coherent_closed_form() {
        let u = UnitSystem::ca40_khz(4000.0, 0.005).unwrap();
        let p = DriveParams::from_khz(u, 10.0, 1.0, 0.7, -0.7, 0.0);
        let cfg = small_cfg(30);
        let ev = evolve_cat(&MotionalState::vacuum(30), &p, p.loop_period(), &cfg).unwrap();
        for (t, o) in ev.times.iter().zip(&ev.overlaps) {
            let d = ldr_trajectory(&p, Spin::Up, *t) - ldr_trajectory(&p, Spin::Down, *t);
            assert!((o.norm() - (-0.5 * d.norm_sqr()).exp()).abs() < 2e-3, "t={t}");
        }
    }

    #[test]
    fn equal_phases_give_unit_overlap() {
        let u = UnitSystem::ca40_khz(536.0, 0.244).unwrap();
        let p = DriveParams::from_khz(u, 40.0, 8.0, 0.3, 0.3, 0.0);
        let ev = evolve_cat(&MotionalState::vacuum(40), &p, 60e-6, &small_cfg(40)).unwrap();
        assert!(ev.overlaps.iter().all(|o| (o.norm() - 1.0).abs() < 1e-9));
    }

    #[test]
    fn backward_run_restores_initial_state() {
        let u = UnitSystem::ca40_khz(536.0, 0.244).unwrap();
        let p = DriveParams::from_khz(u, 40.0, 8.0, 0.3, -0.3, 0.0);
        let cfg = small_cfg(40);
        let psi0 = MotionalState::vacuum(40);
        let fwd = propagate_between(&psi0, 0.0, Spin::Up, &p, &[40e-6], &cfg).unwrap();
        let back = propagate_between(&fwd.states[0], 40e-6, Spin::Up, &p, &[0.0], &cfg).unwrap();
        assert!(overlap(&back.states[0], &psi0).unwrap().norm_sqr() > 1.0 - 1e-6);
    }

    #[test]
    fn thermal_zero_matches_pure_vacuum() {
        let p = ldr_drive();
        let cfg = small_cfg(20);
        let grid = [0.0, 0.25e-3, 0.5e-3];
        let ens = thermal_weights(0.0, 1e-9).unwrap();
        let th = thermal_branch_overlap(&ens, &p, &grid, &cfg).unwrap();
        let pure = evolve_cat_on(&MotionalState::vacuum(20), &p, &grid, &cfg).unwrap();
        for (a, b) in th.iter().zip(&pure.overlaps) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn sideband_hamiltonian_is_hermitian_and_banded() {
        let u = UnitSystem::ca40_khz(536.0, 0.244).unwrap();
        let p = DriveParams::from_khz(u, 93.0, 3.4, 0.705, -0.705, 0.0);
        let cfg = small_cfg(20);
        let h = sideband_truncated_hamiltonian(3.7e-6, &p, Spin::Up, 2, &cfg).unwrap();
        assert!((&h - h.adjoint()).norm() < 1e-9 * h.norm());
        for r in 0..21usize {
            for c in 0..21usize {
                if r.abs_diff(c) > 2 {
                    assert_eq!(h[(r, c)], C64::new(0.0, 0.0));
                }
            }
        }
        assert!(sideband_truncated_hamiltonian(0.0, &p, Spin::Up, 4, &cfg).is_err());
    }

    #[test]
    fn carrier_only_at_vanishing_eta_is_scalar() {
        let u = UnitSystem::ca40_khz(536.0, 1e-9).unwrap();
        let p = DriveParams::from_khz(u, 93.0, 3.4, 0.705, -0.705, 0.0);
        let h = sideband_truncated_hamiltonian(1e-6, &p, Spin::Up, 0, &small_cfg(10)).unwrap();
        let d = h[(0, 0)];
        for r in 0..11 {
            for c in 0..11 {
                let want = if r == c { d } else { C64::new(0.0, 0.0) };
                assert!((h[(r, c)] - want).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn rejects_bad_config() {
        let p = ldr_drive();
        let psi = MotionalState::vacuum(20);
        let cfg = PropagatorConfig { mode: PropagationMode::Sideband(5), ..small_cfg(20) };
        assert!(propagate_branch(&psi, Spin::Up, &p, 1e-5, &cfg).is_err());
        assert!(matches!(propagate_branch(&psi, Spin::Up, &p, 1e-5, &small_cfg(30)), Err(Error::DimensionMismatch(..))));
    }
}
