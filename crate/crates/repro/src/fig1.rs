//! The reference tear-drop drive: trajectories, squeezing, Wigner snapshots and
//! the return overlap.

use catloop_core::classical::{integrate_classical, integrate_on, return_time, Trajectory, DEFAULT_TOL};
use catloop_core::fock::MotionalState;
use catloop_core::phase_space::{quadrature_moments, squeezing_ratio, wigner, PhaseSpaceGrid, WignerField};
use catloop_core::quantum::{centroid_trajectory, evolve_cat, evolve_cat_on, BranchEvolution, PropagatorConfig};
use catloop_core::units::{khz_to_rad_s, DriveParams, Spin, UnitSystem};
use catloop_core::{Result, C64};
use serde::{Deserialize, Serialize};

pub const TRAP_KHZ: f64 = 536.0;
pub const ETA: f64 = 0.244;
pub const OMEGA_KHZ: f64 = 93.0;
pub const DELTA_KHZ: f64 = 3.4;
pub const PHI_W: f64 = 1.41;
pub const T_END_US: f64 = 286.0;
pub const HALF_RETURN_US: f64 = 96.0;

pub fn drive() -> Result<DriveParams> {
    let u = UnitSystem::ca40_khz(TRAP_KHZ, ETA)?;
    Ok(DriveParams::symmetric(u, khz_to_rad_s(OMEGA_KHZ), khz_to_rad_s(DELTA_KHZ), PHI_W, 0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig1Options {
    pub propagator: PropagatorConfig,
    /// Wigner snapshot times (μs); empty to skip.
    pub wigner_times_us: Vec<f64>,
    pub wigner_points: usize,
    pub wigner_half_width: f64,
}

impl Default for Fig1Options {
    fn default() -> Self {
        Self {
            propagator: PropagatorConfig::default(),
            wigner_times_us: vec![0.0, HALF_RETURN_US, T_END_US],
            wigner_points: 81,
            wigner_half_width: 8.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig1Metrics {
    pub classical_t_r_us: f64,
    pub quantum_t_r_up_us: f64,
    pub quantum_t_r_down_us: f64,
    pub alpha_max: f64,
    /// `|α(t_r)| / max|α|` of the classical path.
    pub closure: f64,
    pub squeezing_half_return: f64,
    pub squeezing_peak: f64,
    pub squeezing_peak_us: f64,
    /// `|O(t_r)|` at the quantum return time.
    pub return_overlap: f64,
    pub norm_drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WignerSnapshot {
    pub t_us: f64,
    pub spin: Spin,
    pub field: WignerField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Bundle {
    pub params: DriveParams,
    pub metrics: Fig1Metrics,
    pub classical: [Trajectory; 2],
    pub evolution: BranchEvolution,
    /// Squeezing ratio of the ↑ and ↓ branches per evolution sample.
    pub squeezing: Vec<(f64, f64)>,
    pub wigner: Vec<WignerSnapshot>,
}

pub fn reproduce(opts: &Fig1Options) -> Result<Fig1Bundle> {
    let p = drive()?;
    let n = opts.propagator.n_max;
    let psi0 = MotionalState::vacuum(n);
    let ev = evolve_cat(&psi0, &p, T_END_US * 1e-6, &opts.propagator)?;

    let zero = C64::new(0.0, 0.0);
    let long = integrate_classical(zero, Spin::Up, &p, 1.3 * p.loop_period(), DEFAULT_TOL)?;
    let classical_t_r = return_time(&long)?;
    let alpha_max = long.alphas.iter().zip(&long.times).filter(|(_, t)| **t <= classical_t_r).map(|(a, _)| a.norm()).fold(0.0, f64::max);
    let closure = long.alpha_at(classical_t_r).norm() / alpha_max;
    let classical = [integrate_on(zero, Spin::Up, &p, &ev.times, DEFAULT_TOL)?, integrate_on(zero, Spin::Down, &p, &ev.times, DEFAULT_TOL)?];

    let (cu, cd) = centroid_trajectory(&ev);
    let (tu, td) = (return_time(&cu)?, return_time(&cd)?);
    let return_overlap = evolve_cat_on(&psi0, &p, &[0.0, tu], &opts.propagator)?.overlaps[1].norm();

    let squeezing: Vec<(f64, f64)> = ev.up.iter().zip(&ev.down).map(|(a, b)| (squeezing_ratio(a), squeezing_ratio(b))).collect();
    let (peak_i, peak) = squeezing.iter().enumerate().map(|(i, s)| (i, s.0)).fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    let half = evolve_cat_on(&psi0, &p, &[0.0, HALF_RETURN_US * 1e-6], &opts.propagator)?;

    let mut wig = Vec::new();
    if !opts.wigner_times_us.is_empty() {
        let mut times: Vec<f64> = opts.wigner_times_us.iter().map(|t| t * 1e-6).collect();
        times.sort_by(f64::total_cmp);
        let snap = evolve_cat_on(&psi0, &p, &times, &opts.propagator)?;
        for (i, &t) in times.iter().enumerate() {
            for (spin, s) in [(Spin::Up, &snap.up[i]), (Spin::Down, &snap.down[i])] {
                let m = quadrature_moments(s);
                let grid = PhaseSpaceGrid::centered(m.mean_x, m.mean_p, opts.wigner_half_width, opts.wigner_points);
                wig.push(WignerSnapshot { t_us: t * 1e6, spin, field: wigner(s, &grid)? });
            }
        }
    }

    let metrics = Fig1Metrics {
        classical_t_r_us: classical_t_r * 1e6,
        quantum_t_r_up_us: tu * 1e6,
        quantum_t_r_down_us: td * 1e6,
        alpha_max,
        closure,
        squeezing_half_return: squeezing_ratio(&half.up[1]),
        squeezing_peak: peak,
        squeezing_peak_us: ev.times[peak_i] * 1e6,
        return_overlap,
        norm_drift: ev.norm_drift,
    };
    Ok(Fig1Bundle { params: p, metrics, classical, evolution: ev, squeezing, wigner: wig })
}

/// Indices where the ↑-branch squeezing decreases on `(0, t_end)`.
pub fn squeezing_decreases(bundle: &Fig1Bundle, t_end: f64) -> Vec<usize> {
    let t = &bundle.evolution.times;
    (1..t.len()).filter(|&i| t[i] < t_end && t[i - 1] > 0.0 && bundle.squeezing[i].0 < bundle.squeezing[i - 1].0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drive_matches_reference_values() {
        let p = drive().unwrap();
        assert!((p.alpha0() - 0.244 * 93.0 / 3.4).abs() < 1e-12);
        assert!((p.loop_period() - 1.0 / 3.4e3).abs() < 1e-15);
        assert!((p.phi_w() - PHI_W).abs() < 1e-15);
    }

    #[test]
    fn vacuum_snapshot_at_zero() {
        let opts = Fig1Options { wigner_times_us: vec![0.0], propagator: PropagatorConfig { n_max: 100, samples_per_loop: 60, ..Default::default() }, ..Default::default() };
        let b = reproduce(&opts).unwrap();
        let w = &b.wigner[0].field;
        assert!((w.integral() - 1.0).abs() < 1e-3);
        assert!((w.moments().principal_variances().1 / w.moments().principal_variances().0 - 1.0).abs() < 1e-3);
        assert_eq!(b.squeezing.len(), b.evolution.times.len());
        assert!((b.squeezing[0].0 - 1.0).abs() < 1e-9);
    }
}
