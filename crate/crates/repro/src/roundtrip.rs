//! Synthetic round trips: drive → TDSE overlaps → shot-noise fringes → fits →
//! inferred drive.

use catloop_core::interferometry::{run_pipeline, InferredParameters, PipelineConfig, SeparationEngine, REFERENCE_ETA, REFERENCE_TRAP_KHZ};
use catloop_core::quantum::PropagatorConfig;
use catloop_core::units::{khz_to_rad_s, rad_s_to_khz, DriveParams, UnitSystem};
use catloop_core::Result;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Generator ranges spanning the published data sets.
pub const ALPHA0_RANGE: (f64, f64) = (2.2, 6.8);
pub const DELTA_KHZ_RANGE: (f64, f64) = (3.4, 10.2);
pub const ETA_RANGE: (f64, f64) = (0.2, 0.245);
pub const NBAR0_RANGE: (f64, f64) = (0.02, 0.07);
pub const DELTA_PI_KHZ_RANGE: (f64, f64) = (4.3, 7.4);
pub const GAMMA_PER_MS_RANGE: (f64, f64) = (2.0, 5.6);

pub const PHI_W: f64 = 1.41;
pub const LOOPS: f64 = 1.2;
pub const TAUS_PER_LOOP: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub alpha0: f64,
    /// Signed.
    pub delta_khz: f64,
    pub eta: f64,
    pub nbar0: f64,
    pub delta_pi_khz: f64,
    pub gamma_per_ms: f64,
}

impl Draw {
    pub fn drive(&self) -> Result<DriveParams> {
        let u = UnitSystem::ca40_khz(REFERENCE_TRAP_KHZ * (REFERENCE_ETA / self.eta).powi(2), self.eta)?;
        let delta = khz_to_rad_s(self.delta_khz);
        Ok(DriveParams::symmetric(u, self.alpha0 * delta.abs() / self.eta, delta, PHI_W, khz_to_rad_s(self.delta_pi_khz)))
    }
}

pub fn draw_parameters(seed: u64, n: usize) -> Vec<Draw> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = |r: (f64, f64)| rng.gen_range(r.0..=r.1);
    (0..n)
        .map(|_| {
            let alpha0 = u(ALPHA0_RANGE);
            let mag = u(DELTA_KHZ_RANGE);
            let sign = if u((0.0, 1.0)) < 0.5 { -1.0 } else { 1.0 };
            Draw {
                alpha0,
                delta_khz: sign * mag,
                eta: u(ETA_RANGE),
                nbar0: u(NBAR0_RANGE),
                delta_pi_khz: u(DELTA_PI_KHZ_RANGE),
                gamma_per_ms: u(GAMMA_PER_MS_RANGE),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTrip {
    pub draw: Draw,
    pub seed: u64,
    pub inferred: Option<InferredParameters>,
    pub error: Option<String>,
    pub alpha0_rel_err: f64,
    pub delta_rel_err: f64,
    /// `(t_r, σ)` from the amplitude and phase curves (s).
    pub t_r_amplitude: (f64, f64),
    pub t_r_phase: (f64, f64),
}

impl RoundTrip {
    pub fn within(&self, tol: f64) -> bool {
        self.alpha0_rel_err.abs() <= tol && self.delta_rel_err.abs() <= tol
    }

    /// Whether the two return-time estimates agree within their combined 1σ.
    pub fn return_times_agree(&self) -> bool {
        let (a, sa) = self.t_r_amplitude;
        let (b, sb) = self.t_r_phase;
        (a - b).abs() <= sa.hypot(sb)
    }
}

pub fn pipeline_config(draw: &Draw, params: &DriveParams, seed: u64, propagator: PropagatorConfig) -> PipelineConfig {
    let mut pc = PipelineConfig::standard(params, LOOPS, TAUS_PER_LOOP, seed);
    pc.nbar0 = draw.nbar0;
    pc.gamma = draw.gamma_per_ms * 1e3;
    pc.delta_pi_prior = Some(khz_to_rad_s(draw.delta_pi_khz));
    pc.propagator = propagator;
    pc
}

/// One synthetic round trip; failures are recorded, not propagated.
pub fn round_trip(draw: &Draw, seed: u64, propagator: PropagatorConfig) -> RoundTrip {
    let result = draw.drive().and_then(|p| run_pipeline(&p, &pipeline_config(draw, &p, seed, propagator), SeparationEngine::Skip));
    match result {
        Ok(res) => {
            let inf = res.inferred;
            RoundTrip {
                draw: *draw,
                seed,
                alpha0_rel_err: (inf.alpha0 - draw.alpha0) / draw.alpha0,
                delta_rel_err: (rad_s_to_khz(inf.delta) - draw.delta_khz) / draw.delta_khz,
                inferred: Some(inf),
                error: None,
                t_r_amplitude: (res.amplitude.t_r, res.amplitude.sigma_t_r),
                t_r_phase: (res.phase.t_r, res.phase.sigma_t_r),
            }
        }
        Err(e) => RoundTrip { draw: *draw, seed, inferred: None, error: Some(e.to_string()), alpha0_rel_err: f64::NAN, delta_rel_err: f64::NAN, t_r_amplitude: (f64::NAN, f64::NAN), t_r_phase: (f64::NAN, f64::NAN) },
    }
}
