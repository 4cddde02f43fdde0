//! TOML run configuration. Frequencies are in kHz (cycles), times in μs.

use std::path::Path;

use anyhow::{bail, Context};
use catloop_core::quantum::{PropagationMode, PropagatorConfig};
use catloop_core::units::{DriveParams, UnitSystem};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub trap: Trap,
    pub drive: Drive,
    #[serde(default)]
    pub sim: Sim,
    #[serde(default)]
    pub scan: Scan,
    #[serde(default)]
    pub outputs: Outputs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trap {
    #[serde(rename = "omega0_kHz")]
    pub omega0_khz: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Drive {
    #[serde(rename = "Omega_kHz")]
    pub omega_khz: f64,
    #[serde(rename = "delta_kHz")]
    pub delta_khz: f64,
    pub phi_up: f64,
    pub phi_down: f64,
    #[serde(rename = "Delta_pi_kHz", default)]
    pub delta_pi_khz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Sideband,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sim {
    pub n_max: usize,
    pub rel_tol: f64,
    pub mode: Mode,
    pub sideband_order: usize,
    /// Defaults to 1.3 LDR loops.
    pub t_end_us: Option<f64>,
    pub samples_per_loop: usize,
    pub nbar0: f64,
    pub wigner_times_us: Vec<f64>,
    pub wigner_points: usize,
    pub wigner_half_width: f64,
}

impl Default for Sim {
    fn default() -> Self {
        let p = PropagatorConfig::default();
        Self {
            n_max: p.n_max,
            rel_tol: p.rel_tol,
            mode: Mode::Exact,
            sideband_order: 3,
            t_end_us: None,
            samples_per_loop: p.samples_per_loop,
            nbar0: 0.0,
            wigner_times_us: Vec::new(),
            wigner_points: 81,
            wigner_half_width: 8.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scan {
    /// τ grid; defaults to `tau_count` points over (0, 1.2] LDR loops.
    pub tau_start_us: Option<f64>,
    pub tau_stop_us: Option<f64>,
    pub tau_count: usize,
    /// Equally spaced phases over [0, 2π).
    pub phi_count: usize,
    pub shots: u64,
    pub seed: u64,
    pub gamma_per_ms: f64,
}

impl Default for Scan {
    fn default() -> Self {
        Self { tau_start_us: None, tau_stop_us: None, tau_count: 30, phi_count: 16, shots: 500, seed: 1, gamma_per_ms: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    pub directory: String,
    pub formats: Vec<Format>,
}

impl Default for Outputs {
    fn default() -> Self {
        Self { directory: "catloop-out".into(), formats: vec![Format::Csv, Format::Summary] }
    }
}

pub fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

impl RunConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        if !(self.trap.omega0_khz > 0.0 && self.trap.eta > 0.0) {
            bail!("trap.omega0_kHz and trap.eta must be positive");
        }
        if !(self.drive.omega_khz >= 0.0) || !self.drive.delta_khz.is_finite() {
            bail!("drive.Omega_kHz must be >= 0 and drive.delta_kHz finite");
        }
        if self.sim.mode == Mode::Sideband && self.sim.sideband_order > 3 {
            bail!("sim.sideband_order must be at most 3");
        }
        if !(self.sim.nbar0 >= 0.0) || self.sim.t_end_us.is_some_and(|t| !(t > 0.0)) {
            bail!("sim.nbar0 must be >= 0 and sim.t_end_us > 0");
        }
        if self.scan.tau_count == 0 || self.scan.phi_count < 3 || self.scan.shots == 0 {
            bail!("scan needs tau_count >= 1, phi_count >= 3 and shots >= 1");
        }
        if self.outputs.formats.is_empty() {
            bail!("outputs.formats is empty");
        }
        self.propagator().validate().context("sim settings")?;
        Ok(())
    }

    pub fn units(&self) -> anyhow::Result<UnitSystem> {
        Ok(UnitSystem::ca40_khz(self.trap.omega0_khz, self.trap.eta)?)
    }

    pub fn params(&self) -> anyhow::Result<DriveParams> {
        let d = self.drive;
        Ok(DriveParams::from_khz(self.units()?, d.omega_khz, d.delta_khz, d.phi_up, d.phi_down, d.delta_pi_khz))
    }

    pub fn propagator(&self) -> PropagatorConfig {
        let mode = match self.sim.mode {
            Mode::Exact => PropagationMode::Exact,
            Mode::Sideband => PropagationMode::Sideband(self.sim.sideband_order),
        };
        PropagatorConfig { n_max: self.sim.n_max, rel_tol: self.sim.rel_tol, mode, samples_per_loop: self.sim.samples_per_loop }
    }

    /// Simulation end time (s).
    pub fn t_end(&self, params: &DriveParams) -> f64 {
        match self.sim.t_end_us {
            Some(t) => t / 1e6,
            None if params.loop_period().is_finite() => 1.3 * params.loop_period(),
            None => 300e-6,
        }
    }

    /// τ grid (s).
    pub fn taus(&self, params: &DriveParams) -> Vec<f64> {
        let n = self.scan.tau_count;
        let stop = self.scan.tau_stop_us.map(|t| t / 1e6).unwrap_or_else(|| {
            if params.loop_period().is_finite() { 1.2 * params.loop_period() } else { 300e-6 }
        });
        match self.scan.tau_start_us {
            Some(start) if n > 1 => (0..n).map(|i| start / 1e6 + (stop - start / 1e6) * i as f64 / (n - 1) as f64).collect(),
            Some(start) => vec![start / 1e6],
            None => (1..=n).map(|i| stop * i as f64 / n as f64).collect(),
        }
    }

    pub fn phis(&self) -> Vec<f64> {
        let n = self.scan.phi_count;
        (0..n).map(|i| std::f64::consts::TAU * i as f64 / n as f64).collect()
    }
}

/// Fitted columns for a custom `reproduce-table1` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FittedFile {
    pub fitted: Vec<FittedSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FittedSet {
    #[serde(rename = "D")]
    pub d: f64,
    pub t_r_us: f64,
    pub gamma_per_ms: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "Delta_pi_kHz")]
    pub delta_pi_khz: f64,
    pub nbar0: f64,
    pub eta: f64,
    pub detuning_sign: f64,
}

/// Grid for `sweep-empirics`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub grid: SweepGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub etas: Vec<f64>,
    pub alpha0s: Vec<f64>,
    #[serde(rename = "omega0_kHz", default = "default_sweep_trap")]
    pub omega0_khz: f64,
    #[serde(rename = "delta_kHz", default = "default_sweep_delta")]
    pub delta_khz: f64,
    #[serde(default = "default_sweep_tol")]
    pub tol: f64,
}

fn default_sweep_trap() -> f64 {
    536.0
}

fn default_sweep_delta() -> f64 {
    5.0
}

fn default_sweep_tol() -> f64 {
    catloop_core::classical::DEFAULT_TOL
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1: &str = r#"
[trap]
omega0_kHz = 536.0
eta = 0.244

[drive]
Omega_kHz = 93.0
delta_kHz = 3.4
phi_up = 0.705
phi_down = -0.705
"#;

    #[test]
    fn parses_minimal_config_with_defaults() {
        let c: RunConfig = toml::from_str(FIG1).unwrap();
        c.validate().unwrap();
        assert_eq!(c.sim.n_max, 100);
        assert_eq!(c.scan.phi_count, 16);
        let p = c.params().unwrap();
        assert!((p.loop_period() - 1.0 / 3.4e3).abs() < 1e-15);
        assert!((c.t_end(&p) - 1.3 / 3.4e3).abs() < 1e-15);
        let taus = c.taus(&p);
        assert_eq!(taus.len(), 30);
        assert!((taus[29] - 1.2 / 3.4e3).abs() < 1e-15);
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = format!("{FIG1}\n[sim]\nn_maxx = 3\n");
        assert!(toml::from_str::<RunConfig>(&text).is_err());
        let text = FIG1.replace("eta = 0.244", "eta = 0.244\nomega = 1.0");
        assert!(toml::from_str::<RunConfig>(&text).is_err());
    }

    #[test]
    fn echo_round_trips_exactly() {
        let c: RunConfig = toml::from_str(FIG1).unwrap();
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn explicit_tau_range() {
        let text = format!("{FIG1}\n[scan]\ntau_start_us = 10.0\ntau_stop_us = 100.0\ntau_count = 10\n");
        let c: RunConfig = toml::from_str(&text).unwrap();
        let taus = c.taus(&c.params().unwrap());
        assert_eq!(taus[0], 10e-6);
        assert!((taus[9] - 100e-6).abs() < 1e-18);
    }
}
