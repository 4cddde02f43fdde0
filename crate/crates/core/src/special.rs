//! Log-factorials and generalized Laguerre polynomials, stable for the
//! Fock-space sizes used here (n up to a few hundred).

use std::sync::OnceLock;

const LN_FACT_TABLE: usize = 1024;

fn ln_fact_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACT_TABLE);
        let mut acc = 0.0;
        t.push(0.0);
        for n in 1..LN_FACT_TABLE {
            acc += (n as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// `ln(n!)`.
pub fn ln_factorial(n: usize) -> f64 {
    let table = ln_fact_table();
    if n < table.len() {
        table[n]
    } else {
        // Stirling with two correction terms; only reached for very large n.
        let x = n as f64;
        x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x * x * x)
    }
}

/// Generalized Laguerre polynomial `L_n^{(k)}(x)` by the three-term recurrence.
pub fn laguerre(n: usize, k: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + k - x;
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + k - x) * cur - (jf + k) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// All `L_j^{(k)}(x)` for `j = 0..=n_max`, in one recurrence pass.
pub fn laguerre_all(n_max: usize, k: f64, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    if n_max == 0 {
        return out;
    }
    out.push(1.0 + k - x);
    for j in 1..n_max {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + k - x) * out[j] - (jf + k) * out[j - 1]) / (jf + 1.0);
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ln_factorial_small_values() {
        assert_eq!(ln_factorial(0), 0.0);
        assert_relative_eq!(ln_factorial(5), 120f64.ln(), epsilon = 1e-12);
        // 100! = 9.33262154439441e157
        assert_relative_eq!(ln_factorial(100), 9.33262154439441e157f64.ln(), max_relative = 1e-13);
    }

    #[test]
    fn stirling_branch_continuous() {
        let a = ln_factorial(LN_FACT_TABLE - 1) + (LN_FACT_TABLE as f64).ln();
        assert_relative_eq!(ln_factorial(LN_FACT_TABLE), a, max_relative = 1e-12);
    }

    #[test]
    fn laguerre_closed_forms() {
        let x = 0.37;
        assert_relative_eq!(laguerre(1, 0.0, x), 1.0 - x, epsilon = 1e-15);
        assert_relative_eq!(laguerre(2, 0.0, x), 0.5 * (x * x - 4.0 * x + 2.0), epsilon = 1e-15);
        // L_2^{(1)}(x) = (x^2 - 6x + 6)/2
        assert_relative_eq!(laguerre(2, 1.0, x), 0.5 * (x * x - 6.0 * x + 6.0), epsilon = 1e-14);
        // L_n^{(k)}(0) = C(n+k, n)
        assert_relative_eq!(laguerre(10, 3.0, 0.0), 286.0, epsilon = 1e-10);
    }

    #[test]
    fn laguerre_all_matches_single() {
        let all = laguerre_all(40, 2.0, 3.3);
        for (n, v) in all.iter().enumerate() {
            assert_relative_eq!(*v, laguerre(n, 2.0, 3.3), max_relative = 1e-12, epsilon = 1e-12);
        }
    }
}
