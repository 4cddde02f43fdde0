//! Physical parameters and their reduction to oscillator units.
//!
//! Internally time is measured in `1/ω₀` and lengths in `x₀ = (ħ/2Mω₀)^{1/2}`;
//! everything crossing the public boundary is in SI (rad/s, s, m).

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Mass of a ⁴⁰Ca⁺ ion (electron mass neglected).
pub const CA40_MASS: f64 = 39.962_590_863 * ATOMIC_MASS_UNIT;

/// Cycles-per-second in kHz to angular frequency.
pub fn khz_to_rad_s(f_khz: f64) -> f64 {
    TAU * 1e3 * f_khz
}

pub fn rad_s_to_khz(w: f64) -> f64 {
    w / (TAU * 1e3)
}

pub fn us(t_us: f64) -> f64 {
    t_us * 1e-6
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    /// Angular trap frequency (rad/s).
    pub omega0: f64,
    /// Ground-state length scale (m).
    pub x0: f64,
    /// Lamb-Dicke parameter `k x₀`.
    pub eta: f64,
    /// Walking-wave wavevector (1/m).
    pub k: f64,
}

impl UnitSystem {
    pub fn new(omega0: f64, x0: f64, k: f64) -> Result<Self> {
        let u = Self { omega0, x0, eta: k * x0, k };
        u.validate()?;
        Ok(u)
    }

    /// Builds the unit system for an ion of `mass` (kg) with a given Lamb-Dicke
    /// parameter; the mass only enters through `x₀`.
    pub fn for_ion(mass: f64, omega0: f64, eta: f64) -> Result<Self> {
        if !(mass > 0.0 && omega0 > 0.0) {
            return Err(Error::InvalidInput("mass and omega0 must be positive".into()));
        }
        let x0 = (HBAR / (2.0 * mass * omega0)).sqrt();
        Self::new(omega0, x0, eta / x0)
    }

    pub fn ca40_khz(omega0_khz: f64, eta: f64) -> Result<Self> {
        Self::for_ion(CA40_MASS, khz_to_rad_s(omega0_khz), eta)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 > 0.0 && self.x0 > 0.0 && self.eta > 0.0) {
            return Err(Error::InvalidInput(format!(
                "unit system needs omega0, x0, eta > 0 (got {}, {}, {})",
                self.omega0, self.x0, self.eta
            )));
        }
        if ((self.eta - self.k * self.x0) / self.eta).abs() > 1e-12 {
            return Err(Error::InvalidInput("eta must equal k*x0".into()));
        }
        Ok(())
    }

    /// Seconds to dimensionless time `ω₀ t`.
    pub fn to_dimless_time(&self, t: f64) -> f64 {
        t * self.omega0
    }

    pub fn from_dimless_time(&self, s: f64) -> f64 {
        s / self.omega0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    /// Sign of the `±Δ_π/2` light shift seen by this branch.
    pub fn sign(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Spin::Up => "up",
            Spin::Down => "down",
        }
    }
}

/// Walking-wave drive and trap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    /// Light-shift amplitude Ω (rad/s).
    pub omega_rabi: f64,
    /// Detuning `ω − ω₀` (rad/s, signed).
    pub delta: f64,
    pub phi_up: f64,
    pub phi_down: f64,
    /// Differential spin precession rate Δ_π (rad/s).
    pub delta_pi: f64,
    pub units: UnitSystem,
}

impl DriveParams {
    /// All frequencies in kHz (cycles), phases in rad.
    pub fn from_khz(
        units: UnitSystem,
        omega_khz: f64,
        delta_khz: f64,
        phi_up: f64,
        phi_down: f64,
        delta_pi_khz: f64,
    ) -> Self {
        let p = Self {
            omega_rabi: khz_to_rad_s(omega_khz),
            delta: khz_to_rad_s(delta_khz),
            phi_up,
            phi_down,
            delta_pi: khz_to_rad_s(delta_pi_khz),
            units,
        };
        p.check();
        p
    }

    /// Drive with the two walking-wave phases split symmetrically by `phi_w`.
    pub fn symmetric(units: UnitSystem, omega_rabi: f64, delta: f64, phi_w: f64, delta_pi: f64) -> Self {
        let p = Self {
            omega_rabi,
            delta,
            phi_up: 0.5 * phi_w,
            phi_down: -0.5 * phi_w,
            delta_pi,
            units,
        };
        p.check();
        p
    }

    /// Logs a warning when the near-resonance assumption `|δ| ≪ ω₀` is stretched.
    /// Returns `true` if the drive is flagged.
    pub fn check(&self) -> bool {
        let flagged = self.delta.abs() > 0.1 * self.units.omega0;
        if flagged {
            log::warn!(
                "|delta| = {:.3e} rad/s exceeds 0.1*omega0; LDR reference formulas assume |delta| << omega0",
                self.delta.abs()
            );
        }
        flagged
    }

    pub fn phi(&self, spin: Spin) -> f64 {
        match spin {
            Spin::Up => self.phi_up,
            Spin::Down => self.phi_down,
        }
    }

    /// Walking-wave angular frequency ω = ω₀ + δ.
    pub fn omega(&self) -> f64 {
        self.units.omega0 + self.delta
    }

    /// Angle between the two spin forces, canonicalized into [0, π].
    pub fn phi_w(&self) -> f64 {
        let d = (self.phi_up - self.phi_down).rem_euclid(TAU);
        if d > PI {
            TAU - d
        } else {
            d
        }
    }

    /// LDR-equivalent maximum excursion ηΩ/|δ|.
    pub fn alpha0(&self) -> f64 {
        self.units.eta * self.omega_rabi / self.delta.abs()
    }

    /// LDR loop period 2π/|δ| (s); infinite on resonance.
    pub fn loop_period(&self) -> f64 {
        TAU / self.delta.abs()
    }

    /// Mirror drive: negated detuning and phases. Maps trajectories α → α* in the
    /// rotating-wave limit; the counter-rotating residue is of order ηΩ/ω₀.
    pub fn mirrored(&self) -> Self {
        Self {
            delta: -self.delta,
            phi_up: -self.phi_up,
            phi_down: -self.phi_down,
            ..*self
        }
    }

    pub fn with_omega_rabi(&self, omega_rabi: f64) -> Self {
        Self { omega_rabi, ..*self }
    }
}
