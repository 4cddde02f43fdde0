//! Quadrature moments, squeezing and Wigner functions.
//!
//! Convention used throughout the crate: `X = a + a†`, `P = −i(a − a†)`, so the
//! vacuum has unit variance in each quadrature and a coherent state `|α⟩` sits at
//! `(2 Re α, 2 Im α)`. Wigner functions are normalized as `∬ W dx dp = 1` in
//! these units (vacuum peak `1/2π`).

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::MotionalState;
use crate::special::{laguerre_all, ln_factorial};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureMoments {
    pub mean_x: f64,
    pub mean_p: f64,
    /// Symmetrized covariance `[[Vxx, Vxp], [Vxp, Vpp]]`.
    pub cov: [[f64; 2]; 2],
}

impl QuadratureMoments {
    /// Eigenvalues `(λ_min, λ_max)` of the covariance.
    pub fn principal_variances(&self) -> (f64, f64) {
        let [[a, b], [_, c]] = self.cov;
        let mid = 0.5 * (a + c);
        let half = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        (mid - half, mid + half)
    }

    /// Orientation of the major axis (rad, from the X axis).
    pub fn major_axis_angle(&self) -> f64 {
        let [[a, b], [_, c]] = self.cov;
        0.5 * (2.0 * b).atan2(a - c)
    }

    /// Gaussian-equivalent Mahalanobis radius of `(x, p)` from the centroid.
    pub fn mahalanobis(&self, x: f64, p: f64) -> f64 {
        let [[a, b], [_, c]] = self.cov;
        let det = a * c - b * b;
        let (dx, dp) = (x - self.mean_x, p - self.mean_p);
        ((c * dx * dx - 2.0 * b * dx * dp + a * dp * dp) / det).max(0.0).sqrt()
    }
}

pub fn quadrature_moments(s: &MotionalState) -> QuadratureMoments {
    let a = s.mean_a();
    let a2 = s.mean_a2();
    let n = s.mean_number();
    let mean_x = 2.0 * a.re;
    let mean_p = 2.0 * a.im;
    let xx = 2.0 * a2.re + 2.0 * n + 1.0;
    let pp = -2.0 * a2.re + 2.0 * n + 1.0;
    let xp = 2.0 * a2.im;
    let vxx = xx - mean_x * mean_x;
    let vpp = pp - mean_p * mean_p;
    let vxp = xp - mean_x * mean_p;
    QuadratureMoments { mean_x, mean_p, cov: [[vxx, vxp], [vxp, vpp]] }
}

/// Ratio of the principal axes of the uncertainty ellipse, `√(λ_max/λ_min)`.
pub fn squeezing_ratio(s: &MotionalState) -> f64 {
    let (lo, hi) = quadrature_moments(s).principal_variances();
    (hi / lo).sqrt()
}

/// Rectangular phase-space grid (axes need not be uniform).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceGrid {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhaseSpaceGrid {
    pub fn uniform(x_range: (f64, f64), p_range: (f64, f64), nx: usize, np: usize) -> Self {
        Self { x: linspace(x_range.0, x_range.1, nx), p: linspace(p_range.0, p_range.1, np) }
    }

    /// Square grid around `(cx, cp)`.
    pub fn centered(cx: f64, cp: f64, half_width: f64, n: usize) -> Self {
        Self::uniform((cx - half_width, cx + half_width), (cp - half_width, cp + half_width), n, n)
    }

    pub fn len(&self) -> usize {
        self.x.len() * self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub(crate) fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WignerField {
    pub grid: PhaseSpaceGrid,
    /// Row-major, `values[ix * p.len() + ip]`.
    pub values: Vec<f64>,
}

impl WignerField {
    pub fn at(&self, ix: usize, ip: usize) -> f64 {
        self.values[ix * self.grid.p.len() + ip]
    }

    /// Trapezoid-rule `∬ W dx dp`.
    pub fn integral(&self) -> f64 {
        let wx = trapezoid_weights(&self.grid.x);
        let wp = trapezoid_weights(&self.grid.p);
        let mut acc = 0.0;
        for (ix, a) in wx.iter().enumerate() {
            for (ip, b) in wp.iter().enumerate() {
                acc += a * b * self.at(ix, ip);
            }
        }
        acc
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Moments of `W` over the grid (trapezoid rule).
    pub fn moments(&self) -> QuadratureMoments {
        let wx = trapezoid_weights(&self.grid.x);
        let wp = trapezoid_weights(&self.grid.p);
        let (mut m0, mut mx, mut mp, mut mxx, mut mpp, mut mxp) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for (ix, (x, a)) in self.grid.x.iter().zip(&wx).enumerate() {
            for (ip, (p, b)) in self.grid.p.iter().zip(&wp).enumerate() {
                let w = a * b * self.at(ix, ip);
                m0 += w;
                mx += w * x;
                mp += w * p;
                mxx += w * x * x;
                mpp += w * p * p;
                mxp += w * x * p;
            }
        }
        let (ex, ep) = (mx / m0, mp / m0);
        let vxx = mxx / m0 - ex * ex;
        let vpp = mpp / m0 - ep * ep;
        let vxp = mxp / m0 - ex * ep;
        QuadratureMoments { mean_x: ex, mean_p: ep, cov: [[vxx, vxp], [vxp, vpp]] }
    }
}

fn trapezoid_weights(axis: &[f64]) -> Vec<f64> {
    let n = axis.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let h = axis[i + 1] - axis[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

/// Wigner function on `grid`, by the Fock-basis Laguerre sum at each point:
///
/// `W(x,p) = (1/2π) Σ_{m,n} c_m* c_n (−1)^n ⟨m|D(γ)|n⟩`, `γ = x + ip`.
pub fn wigner(s: &MotionalState, grid: &PhaseSpaceGrid) -> Result<WignerField> {
    if !s.is_valid() {
        return Err(Error::TruncationOverflow { tail: s.tail_weight(), n_max: s.n_max(), time: None });
    }
    // Trailing levels with negligible weight add nothing but cost.
    let c = s.amplitudes();
    let top = c.iter().rposition(|z| z.norm_sqr() > 1e-30).unwrap_or(0);
    let c = &c[..=top];
    let mut values = Vec::with_capacity(grid.len());
    for &x in &grid.x {
        for &p in &grid.p {
            values.push(wigner_point(c, x, p));
        }
    }
    Ok(WignerField { grid: grid.clone(), values })
}

fn wigner_point(c: &[C64], x: f64, p: f64) -> f64 {
    let n_top = c.len() - 1;
    let r2 = x * x + p * p;
    let gamma = C64::new(x, p);
    let ln_r = 0.5 * r2.ln();
    let arg = gamma.arg();
    let mut total = 0.0;
    for k in 0..=n_top {
        let lags = laguerre_all(n_top - k, k as f64, r2);
        let mut acc = C64::new(0.0, 0.0);
        for n in 0..=n_top - k {
            let m = n + k;
            let cc = c[m].conj() * c[n];
            if cc.norm_sqr() < 1e-40 {
                continue;
            }
            let ln_mag = if k == 0 {
                -0.5 * r2
            } else {
                k as f64 * ln_r + 0.5 * (ln_factorial(n) - ln_factorial(m)) - 0.5 * r2
            };
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            acc += cc * (sign * ln_mag.exp() * lags[n]);
        }
        let term = if k == 0 { acc.re } else { 2.0 * (acc * C64::from_polar(1.0, k as f64 * arg)).re };
        total += term;
    }
    total / (2.0 * PI)
}
