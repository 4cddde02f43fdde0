//! Walking-wave operators `e^{iη(a+a†)}`, `cos(η(a+a†))`, `sin(η(a+a†))` on a
//! truncated Fock basis, from the associated-Laguerre closed form (so the
//! retained block is exact rather than the exponential of a truncated matrix).

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::special::{laguerre_all, ln_factorial};

/// Entries below this magnitude are dropped from the banded propagation form.
const BAND_DROP: f64 = 1e-17;

/// Real magnitude-and-sign part of `⟨n|e^{iη(a+a†)}|n+k⟩ / i^k`.
fn displacement_real_part(eta: f64, n: usize, k: usize, lag: f64) -> f64 {
    if eta == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let ln_mag = -0.5 * eta * eta + k as f64 * eta.ln() + 0.5 * (ln_factorial(n) - ln_factorial(n + k));
    ln_mag.exp() * lag
}

fn i_pow(k: usize) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Real symmetric matrix `G` with `D = Σ i^{|m-n|} G_{mn} |m⟩⟨n|`.
fn displacement_envelope(eta: f64, n_max: usize) -> DMatrix<f64> {
    let dim = n_max + 1;
    let x = eta * eta;
    let mut g = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        let lags = laguerre_all(n_max - k, k as f64, x);
        for n in 0..dim - k {
            let v = displacement_real_part(eta, n, k, lags[n]);
            g[(n, n + k)] = v;
            g[(n + k, n)] = v;
        }
    }
    g
}

/// Matrix of `e^{iη(a+a†)}` for `n, m = 0..=n_max`:
/// `⟨n|D|n+k⟩ = e^{−η²/2}(iη)^k √(n!/(n+k)!) L_n^k(η²)`, symmetric in `(n, n+k)`.
pub fn displacement_matrix(eta: f64, n_max: usize) -> DMatrix<C64> {
    assert!(eta >= 0.0, "eta must be non-negative");
    let g = displacement_envelope(eta, n_max);
    DMatrix::from_fn(n_max + 1, n_max + 1, |r, c| i_pow(r.abs_diff(c)) * g[(r, c)])
}

/// `(C, S) = (cos(η(a+a†)), sin(η(a+a†)))`, i.e. `(D+D†)/2` and `(D−D†)/2i`.
/// Because `D` is symmetric, `C = Re D` and `S = Im D`, both real symmetric.
pub fn cos_sin_operators(eta: f64, n_max: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = displacement_matrix(eta, n_max);
    (d.map(|z| z.re), d.map(|z| z.im))
}

/// Annihilation operator on the truncated basis.
pub fn annihilation(n_max: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n_max + 1, n_max + 1, |r, c| if c == r + 1 { (c as f64).sqrt() } else { 0.0 })
}

/// Banded storage of `cos θ·C + sin θ·S` for fast repeated application.
///
/// `C` only has even offsets `m−n` and `S` only odd ones, so both live in a
/// single real matrix `G = C + S` and the parity of the offset selects the
/// `cos θ` or `sin θ` factor.
#[derive(Debug, Clone)]
pub struct WalkingWaveOperator {
    dim: usize,
    /// Per row: first column and the retained entries.
    rows: Vec<(usize, Vec<f64>)>,
    band: Option<usize>,
}

impl WalkingWaveOperator {
    /// Full operator (all orders in η, all sidebands).
    pub fn exact(eta: f64, n_max: usize) -> Self {
        Self::build(eta, n_max, None)
    }

    /// Keeps only `|m−n| ≤ order` (carrier plus `order` motional sidebands), with
    /// the coefficients still exact in η.
    pub fn sideband_truncated(eta: f64, n_max: usize, order: usize) -> Self {
        Self::build(eta, n_max, Some(order))
    }

    fn build(eta: f64, n_max: usize, band: Option<usize>) -> Self {
        let g = displacement_envelope(eta, n_max);
        let dim = n_max + 1;
        let mut rows = Vec::with_capacity(dim);
        for r in 0..dim {
            let keep = |c: usize| band.is_none_or(|b| r.abs_diff(c) <= b) && g[(r, c)].abs() > BAND_DROP;
            let lo = (0..dim).find(|&c| keep(c)).unwrap_or(r);
            let hi = (0..dim).rev().find(|&c| keep(c)).unwrap_or(r);
            let vals = (lo..=hi)
                .map(|c| if band.is_none_or(|b| r.abs_diff(c) <= b) { signed(&g, r, c) } else { 0.0 })
                .collect();
            rows.push((lo, vals));
        }
        Self { dim, rows, band }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn band(&self) -> Option<usize> {
        self.band
    }

    /// `out = (cos θ·C + sin θ·S)·v`
    pub fn apply(&self, cos_t: f64, sin_t: f64, v: &[C64], out: &mut [C64]) {
        for (r, (lo, vals)) in self.rows.iter().enumerate() {
            let mut even = C64::new(0.0, 0.0);
            let mut odd = C64::new(0.0, 0.0);
            for (j, g) in vals.iter().enumerate() {
                let c = lo + j;
                if (r ^ c) & 1 == 0 {
                    even += v[c] * *g;
                } else {
                    odd += v[c] * *g;
                }
            }
            out[r] = even * cos_t + odd * sin_t;
        }
    }

    /// Dense `cos θ·C + sin θ·S`.
    pub fn dense(&self, cos_t: f64, sin_t: f64) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, (lo, vals)) in self.rows.iter().enumerate() {
            for (j, g) in vals.iter().enumerate() {
                let c = lo + j;
                m[(r, c)] = if (r ^ c) & 1 == 0 { cos_t * g } else { sin_t * g };
            }
        }
        m
    }
}

/// Entry of `C + S` at `(r, c)`: `Re(i^k)·g` for even `k`, `Im(i^k)·g` for odd.
fn signed(g: &DMatrix<f64>, r: usize, c: usize) -> f64 {
    let ik = i_pow(r.abs_diff(c));
    (ik.re + ik.im) * g[(r, c)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::SymmetricEigen;

    /// `exp(iη(a+a†))` of the truncated position matrix, via eigendecomposition.
    fn expm_oracle(eta: f64, n_max: usize) -> DMatrix<C64> {
        let a = annihilation(n_max);
        let x = &a + a.transpose();
        let eig = SymmetricEigen::new(x);
        let v = eig.eigenvectors.map(|z| C64::new(z, 0.0));
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, eta * l)));
        &v * d * v.adjoint()
    }

    #[test]
    fn eta_zero_is_identity() {
        let d = displacement_matrix(0.0, 12);
        assert_eq!(d, DMatrix::identity(13, 13));
        let (c, s) = cos_sin_operators(0.0, 12);
        assert_eq!(c, DMatrix::identity(13, 13));
        assert_eq!(s, DMatrix::zeros(13, 13));
    }

    #[test]
    fn matches_matrix_exponential_oracle() {
        let eta = 0.244;
        let d = displacement_matrix(eta, 100);
        let oracle = expm_oracle(eta, 140);
        let e0 = (-0.5 * eta * eta).exp();
        assert_relative_eq!(d[(0, 0)].re, e0, epsilon = 1e-12);
        assert!((d[(0, 0)].re - 0.97067).abs() < 1e-5);
        assert_relative_eq!(d[(0, 1)].im, eta * e0, epsilon = 1e-12);
        assert!((d[(0, 1)].im - 0.23684).abs() < 1e-5);
        for r in 0..60 {
            for c in 0..60 {
                assert!((d[(r, c)] - oracle[(r, c)]).norm() < 1e-10, "({r},{c})");
            }
        }
    }

    #[test]
    fn unitary_on_interior_block() {
        let n_max = 100;
        let d = displacement_matrix(0.244, n_max);
        let dd = d.adjoint() * &d;
        let mut worst = 0.0f64;
        for r in 0..n_max - 20 {
            for c in 0..n_max - 20 {
                let id = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((dd[(r, c)] - id).norm());
            }
        }
        assert!(worst < 1e-9, "unitarity defect {worst:e}");
    }

    #[test]
    fn cos_sin_identity_and_hermiticity() {
        let (c, s) = cos_sin_operators(0.244, 100);
        assert_eq!(c, c.transpose());
        assert_eq!(s, s.transpose());
        assert!((c[(0, 0)] - 0.97067).abs() < 1e-5);
        assert!((s[(0, 1)] - 0.23684).abs() < 1e-5);
        let id = &c * &c + &s * &s;
        for r in 0..80 {
            for col in 0..80 {
                let e = if r == col { 1.0 } else { 0.0 };
                assert!((id[(r, col)] - e).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn banded_apply_matches_dense() {
        let (c, s) = cos_sin_operators(0.3, 40);
        let op = WalkingWaveOperator::exact(0.3, 40);
        let (ct, st) = (0.3f64.cos(), 0.3f64.sin());
        let dense = &c * ct + &s * st;
        assert!((op.dense(ct, st) - &dense).amax() < 1e-15);
        let v: Vec<C64> = (0..41).map(|k| C64::new((k as f64).sin(), (k as f64 * 0.7).cos())).collect();
        let mut out = vec![C64::new(0.0, 0.0); 41];
        op.apply(ct, st, &v, &mut out);
        for r in 0..41 {
            let e: C64 = (0..41).map(|k| v[k] * dense[(r, k)]).sum();
            assert!((out[r] - e).norm() < 1e-13);
        }
    }

    #[test]
    fn sideband_band_limit() {
        let op = WalkingWaveOperator::sideband_truncated(0.244, 30, 3);
        let m = op.dense(0.4, 0.9);
        for r in 0..31usize {
            for c in 0..31 {
                if r.abs_diff(c) > 3 {
                    assert_eq!(m[(r, c)], 0.0);
                }
            }
        }
        let full = WalkingWaveOperator::exact(0.244, 30).dense(0.4, 0.9);
        assert_relative_eq!(m[(5, 8)], full[(5, 8)]);
    }
}
