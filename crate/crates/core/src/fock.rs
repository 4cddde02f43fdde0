//! States over a truncated Fock basis.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::special::ln_factorial;

/// Number of top Fock levels watched by the truncation guard.
pub const GUARD_LEVELS: usize = 10;
/// Maximum probability allowed in the guarded levels.
pub const GUARD_TAIL: f64 = 1e-6;

/// Motional state `Σ c_n |n⟩`, `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionalState {
    amplitudes: Vec<C64>,
}

impl MotionalState {
    /// Normalizes the amplitudes and applies the truncation guard.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let mut s = Self::from_raw(amplitudes)?;
        s.normalize();
        s.check_truncation(None)?;
        Ok(s)
    }

    /// Wraps amplitudes as-is (no normalization, no guard).
    pub fn from_raw(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidInput("empty amplitude vector".into()));
        }
        Ok(Self { amplitudes })
    }

    pub fn vacuum(n_max: usize) -> Self {
        Self::fock(0, n_max).expect("vacuum fits any basis")
    }

    pub fn fock(n: usize, n_max: usize) -> Result<Self> {
        if n > n_max {
            return Err(Error::InvalidInput(format!("Fock level {n} above n_max {n_max}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); n_max + 1];
        amps[n] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes: amps })
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn n_max(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            for c in &mut self.amplitudes {
                *c /= n;
            }
        }
    }

    /// Probability in the top [`GUARD_LEVELS`] levels.
    pub fn tail_weight(&self) -> f64 {
        let start = self.n_max().saturating_sub(GUARD_LEVELS) + 1;
        self.amplitudes.iter().skip(start).map(|c| c.norm_sqr()).sum()
    }

    pub fn is_valid(&self) -> bool {
        self.tail_weight() < GUARD_TAIL
    }

    pub fn check_truncation(&self, time: Option<f64>) -> Result<()> {
        let tail = self.tail_weight();
        if tail < GUARD_TAIL {
            Ok(())
        } else {
            Err(Error::TruncationOverflow { tail, n_max: self.n_max(), time })
        }
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    /// ⟨a†a⟩
    pub fn mean_number(&self) -> f64 {
        self.amplitudes.iter().enumerate().map(|(n, c)| n as f64 * c.norm_sqr()).sum()
    }

    /// ⟨a⟩, the phase-space centroid α.
    pub fn mean_a(&self) -> C64 {
        let c = &self.amplitudes;
        (1..c.len()).map(|n| c[n - 1].conj() * c[n] * (n as f64).sqrt()).sum()
    }

    /// ⟨a²⟩
    pub fn mean_a2(&self) -> C64 {
        let c = &self.amplitudes;
        (2..c.len())
            .map(|n| c[n - 2].conj() * c[n] * ((n * (n - 1)) as f64).sqrt())
            .sum()
    }

    /// Applies `e^{iθ a†a}`, a rigid rotation of phase space by `−θ`.
    pub fn rotated(&self, theta: f64) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(n, c)| c * C64::from_polar(1.0, theta * n as f64))
            .collect();
        Self { amplitudes }
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self { amplitudes: self.amplitudes.iter().map(|c| c * factor).collect() }
    }
}

/// Coherent state `|α⟩` truncated at `n_max`.
pub fn coherent_state(alpha: C64, n_max: usize) -> Result<MotionalState> {
    let r2 = alpha.norm_sqr();
    if r2 >= n_max as f64 / 4.0 {
        log::warn!("|alpha|^2 = {r2:.3} is not below n_max/4 = {}", n_max as f64 / 4.0);
    }
    let mut amps = vec![C64::new(0.0, 0.0); n_max + 1];
    if r2 == 0.0 {
        amps[0] = C64::new(1.0, 0.0);
    } else {
        let ln_r = alpha.norm().ln();
        let arg = alpha.arg();
        for (n, c) in amps.iter_mut().enumerate() {
            let nf = n as f64;
            let mag = (-0.5 * r2 + nf * ln_r - 0.5 * ln_factorial(n)).exp();
            *c = C64::from_polar(mag, nf * arg);
        }
    }
    MotionalState::new(amps)
}

/// `⟨s1|s2⟩`
pub fn overlap(s1: &MotionalState, s2: &MotionalState) -> Result<C64> {
    if s1.dim() != s2.dim() {
        return Err(Error::DimensionMismatch(s1.dim(), s2.dim()));
    }
    Ok(inner(s1.amplitudes(), s2.amplitudes()))
}

pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// The two motional branches of the spin-motion superposition, each with its
/// separately tracked scalar phase (the branch ket is `e^{i·phase}|ψ⟩`).
#[derive(Debug, Clone, PartialEq)]
pub struct SpinBranchPair {
    pub up: MotionalState,
    pub down: MotionalState,
    pub phase_up: f64,
    pub phase_down: f64,
}

impl SpinBranchPair {
    pub fn new(up: MotionalState, down: MotionalState, phase_up: f64, phase_down: f64) -> Result<Self> {
        if up.n_max() != down.n_max() {
            return Err(Error::DimensionMismatch(up.dim(), down.dim()));
        }
        Ok(Self { up, down, phase_up, phase_down })
    }

    /// Branch overlap including the relative scalar phase.
    pub fn overlap(&self) -> C64 {
        inner(self.up.amplitudes(), self.down.amplitudes())
            * C64::from_polar(1.0, self.phase_down - self.phase_up)
    }
}

/// Thermal occupation of the initial Fock levels, as a pure-state ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalEnsemble {
    pub nbar0: f64,
    pub weights: Vec<f64>,
}

impl ThermalEnsemble {
    pub fn levels(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights.iter().copied().enumerate()
    }
}

/// Geometric (thermal) weights `p_n = n̄ⁿ/(n̄+1)ⁿ⁺¹`, truncated once the
/// discarded tail falls below `tail_tol`, then renormalized.
pub fn thermal_weights(nbar0: f64, tail_tol: f64) -> Result<ThermalEnsemble> {
    if !(nbar0 >= 0.0) || !nbar0.is_finite() {
        return Err(Error::InvalidInput(format!("nbar0 must be >= 0 (got {nbar0})")));
    }
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(Error::InvalidInput(format!("tail_tol must lie in (0,1) (got {tail_tol})")));
    }
    let q = nbar0 / (nbar0 + 1.0);
    let mut weights = Vec::new();
    let mut p = 1.0 / (nbar0 + 1.0);
    // Tail beyond level L is q^(L+1).
    let mut tail = q;
    loop {
        weights.push(p);
        if tail < tail_tol {
            break;
        }
        p *= q;
        tail *= q;
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Ok(ThermalEnsemble { nbar0, weights })
}
