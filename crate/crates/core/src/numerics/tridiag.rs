use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex tridiagonal matrix, factored once and solved many times (Thomas algorithm).
///
/// `lower[i]` couples row `i` to column `i − 1` (`lower[0]` is ignored),
/// `upper[i]` couples row `i` to column `i + 1` (`upper[n − 1]` is ignored).
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    lower: Vec<Complex64>,
    upper: Vec<Complex64>,
    cprime: Vec<Complex64>,
    pivot_inv: Vec<Complex64>,
}

impl Tridiagonal {
    pub fn new(lower: Vec<Complex64>, diag: Vec<Complex64>, upper: Vec<Complex64>) -> Result<Self> {
        let n = diag.len();
        if lower.len() != n || upper.len() != n {
            return Err(Error::InvalidArgument(format!(
                "tridiagonal band lengths {} / {} / {} differ",
                lower.len(),
                n,
                upper.len()
            )));
        }
        let mut cprime = vec![Complex64::new(0.0, 0.0); n];
        let mut pivot_inv = vec![Complex64::new(0.0, 0.0); n];
        let scale = diag.iter().map(|d| d.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        for i in 0..n {
            let m = if i == 0 { diag[0] } else { diag[i] - lower[i] * cprime[i - 1] };
            if m.norm() <= 1e-300_f64.max(scale * 1e-15) || !m.is_finite() {
                return Err(Error::Singular(format!("zero pivot at row {i}")));
            }
            pivot_inv[i] = m.inv();
            cprime[i] = upper[i] * pivot_inv[i];
        }
        Ok(Self { lower, upper, cprime, pivot_inv })
    }

    pub fn len(&self) -> usize {
        self.pivot_inv.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pivot_inv.is_empty()
    }

    pub fn upper(&self) -> &[Complex64] {
        &self.upper
    }

    pub fn solve_in_place(&self, rhs: &mut [Complex64]) {
        let n = self.len();
        debug_assert_eq!(rhs.len(), n);
        if n == 0 {
            return;
        }
        rhs[0] *= self.pivot_inv[0];
        for i in 1..n {
            let prev = rhs[i - 1];
            rhs[i] = (rhs[i] - self.lower[i] * prev) * self.pivot_inv[i];
        }
        for i in (0..n - 1).rev() {
            let next = rhs[i + 1];
            rhs[i] -= self.cprime[i] * next;
        }
    }

    /// [`Tridiagonal::solve_in_place`] on several right-hand sides at once;
    /// the sweeps are interleaved so independent systems overlap.
    pub fn solve_many_in_place(&self, rhs: &mut [&mut [Complex64]]) {
        let n = self.len();
        debug_assert!(rhs.iter().all(|r| r.len() == n));
        if n == 0 {
            return;
        }
        for r in rhs.iter_mut() {
            r[0] *= self.pivot_inv[0];
        }
        for i in 1..n {
            let (l, p) = (self.lower[i], self.pivot_inv[i]);
            for r in rhs.iter_mut() {
                r[i] = (r[i] - l * r[i - 1]) * p;
            }
        }
        for i in (0..n - 1).rev() {
            let c = self.cprime[i];
            for r in rhs.iter_mut() {
                r[i] -= c * r[i + 1];
            }
        }
    }
}
