//! Box-constrained Levenberg–Marquardt with a finite-difference Jacobian.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Converged once `‖Δp‖ ≤ xtol·(‖p‖ + xtol)` (scaled parameters).
    pub xtol: f64,
    pub lambda0: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iter: 500, xtol: 1e-8, lambda0: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmResult {
    pub params: Vec<f64>,
    /// `(JᵀJ)⁻¹` at the solution, `None` if singular.
    pub covariance: Option<DMatrix<f64>>,
    /// Sum of squared residuals.
    pub chi2: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl LmResult {
    /// Standard errors scaled by `max(1, χ²/dof)`; infinite where undetermined.
    pub fn std_errors(&self, n_residuals: usize) -> Vec<f64> {
        let k = self.params.len();
        let dof = n_residuals.saturating_sub(k).max(1) as f64;
        let scale = (self.chi2 / dof).max(1.0);
        match &self.covariance {
            Some(c) => (0..k).map(|i| (c[(i, i)] * scale).max(0.0).sqrt()).collect(),
            None => vec![f64::INFINITY; k],
        }
    }
}

/// Minimizes `Σ r_i(p)²` for `p` inside `bounds`. `scales` gives the typical
/// magnitude of each parameter (used for differencing and the step test).
pub fn levenberg_marquardt<F>(residuals: F, p0: &[f64], bounds: &[(f64, f64)], scales: &[f64], opts: &LmOptions) -> LmResult
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let k = p0.len();
    assert_eq!(bounds.len(), k);
    assert_eq!(scales.len(), k);
    let clamp = |p: &mut [f64]| {
        for (x, (lo, hi)) in p.iter_mut().zip(bounds) {
            *x = x.clamp(*lo, *hi);
        }
    };
    let chi2_of = |r: &[f64]| {
        let s: f64 = r.iter().map(|x| x * x).sum();
        if s.is_finite() { s } else { f64::INFINITY }
    };

    let mut p = p0.to_vec();
    clamp(&mut p);
    let mut r = residuals(&p);
    let mut chi2 = chi2_of(&r);
    let mut lambda = opts.lambda0;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let j = jacobian(&residuals, &p, bounds, scales);
        let jt = j.transpose();
        let jtj = &jt * &j;
        let g = &jt * DVector::from_column_slice(&r);
        let mut improved = false;
        for _ in 0..40 {
            let mut a = jtj.clone();
            for i in 0..k {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-12 / (scales[i] * scales[i]));
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial: Vec<f64> = p.iter().zip(step.iter()).map(|(x, d)| x + d).collect();
            clamp(&mut trial);
            let rt = residuals(&trial);
            let ct = chi2_of(&rt);
            if ct <= chi2 {
                let dn: f64 = trial.iter().zip(&p).zip(scales).map(|((a, b), s)| ((a - b) / s).powi(2)).sum::<f64>().sqrt();
                let pn: f64 = p.iter().zip(scales).map(|(a, s)| (a / s).powi(2)).sum::<f64>().sqrt();
                let small = dn <= opts.xtol * (pn + opts.xtol) || ct == chi2;
                p = trial;
                r = rt;
                chi2 = ct;
                lambda = (lambda / 10.0).max(1e-15);
                improved = true;
                converged = small;
                break;
            }
            lambda *= 10.0;
            if lambda > 1e16 {
                break;
            }
        }
        if !improved {
            // No downhill step at any damping: stationary within numerical resolution.
            converged = true;
        }
        if converged {
            break;
        }
    }

    let j = jacobian(&residuals, &p, bounds, scales);
    let jtj = j.transpose() * &j;
    let covariance = invert_spd(&jtj);
    LmResult { params: p, covariance, chi2, iterations, converged }
}

fn jacobian<F>(residuals: &F, p: &[f64], bounds: &[(f64, f64)], scales: &[f64]) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let r0 = residuals(p);
    let m = r0.len();
    let mut j = DMatrix::zeros(m, p.len());
    for i in 0..p.len() {
        let h = 1e-6 * p[i].abs().max(scales[i]);
        let (lo, hi) = bounds[i];
        let mut plus = p.to_vec();
        let mut minus = p.to_vec();
        plus[i] = (p[i] + h).min(hi);
        minus[i] = (p[i] - h).max(lo);
        let span = plus[i] - minus[i];
        if span == 0.0 {
            continue;
        }
        let rp = residuals(&plus);
        let rm = residuals(&minus);
        for row in 0..m {
            j[(row, i)] = (rp[row] - rm[row]) / span;
        }
    }
    j
}

/// Inverse of a symmetric positive semi-definite matrix, or `None` when it is
/// numerically singular.
fn invert_spd(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    let d: Vec<f64> = (0..n).map(|i| a[(i, i)].sqrt()).collect();
    if d.iter().any(|x| !(*x > 0.0)) {
        return None;
    }
    let scaled = DMatrix::from_fn(n, n, |r, c| a[(r, c)] / (d[r] * d[c]));
    let eig = scaled.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    if eig.eigenvalues.iter().any(|&l| l <= 1e-13 * max) {
        return None;
    }
    let inv = scaled.cholesky()?.inverse();
    Some(DMatrix::from_fn(n, n, |r, c| inv[(r, c)] / (d[r] * d[c])))
}
