use num_complex::Complex64;

use super::Tridiagonal;

/// Clamped cubic spline through uniformly spaced complex samples `y_i = f(i·h)`.
///
/// End slopes come from fourth-order one-sided differences, which keeps the
/// interpolant fourth-order accurate up to the interval ends.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    h: f64,
    values: Vec<Complex64>,
    moments: Vec<Complex64>,
}

impl CubicSpline {
    /// Requires at least five samples.
    pub fn new(values: &[Complex64], h: f64) -> Self {
        let n = values.len();
        assert!(n >= 5, "cubic spline needs at least 5 samples, got {n}");
        let y = values;
        let s0 = (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]) / (12.0 * h);
        let sn = (25.0 * y[n - 1] - 48.0 * y[n - 2] + 36.0 * y[n - 3] - 16.0 * y[n - 4]
            + 3.0 * y[n - 5])
            / (12.0 * h);

        let one = Complex64::new(1.0, 0.0);
        let mut lower = vec![one; n];
        let mut upper = vec![one; n];
        let mut diag = vec![Complex64::new(4.0, 0.0); n];
        diag[0] = Complex64::new(2.0, 0.0);
        diag[n - 1] = Complex64::new(2.0, 0.0);
        lower[0] = Complex64::new(0.0, 0.0);
        upper[n - 1] = Complex64::new(0.0, 0.0);

        let mut rhs = vec![Complex64::new(0.0, 0.0); n];
        rhs[0] = 6.0 / h * ((y[1] - y[0]) / h - s0);
        rhs[n - 1] = 6.0 / h * (sn - (y[n - 1] - y[n - 2]) / h);
        for i in 1..n - 1 {
            rhs[i] = 6.0 / (h * h) * (y[i + 1] - 2.0 * y[i] + y[i - 1]);
        }
        let t = Tridiagonal::new(lower, diag, upper).expect("spline system is diagonally dominant");
        t.solve_in_place(&mut rhs);
        Self { h, values: y.to_vec(), moments: rhs }
    }

    /// Right end of the sampled interval.
    pub fn end(&self) -> f64 {
        self.h * (self.values.len() - 1) as f64
    }

    /// Evaluate at `x`; `None` outside `[0, end]`.
    pub fn eval(&self, x: f64) -> Option<Complex64> {
        let n = self.values.len();
        let end = self.end();
        if !(0.0..=end * (1.0 + 1e-14)).contains(&x) {
            return None;
        }
        let s = x / self.h;
        let mut i = s.floor() as usize;
        if i >= n - 1 {
            i = n - 2;
        }
        let t = x - i as f64 * self.h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.moments[i], self.moments[i + 1]);
        let h = self.h;
        let b = (y1 - y0) / h - h * (2.0 * m0 + m1) / 6.0;
        Some(y0 + t * (b + t * (0.5 * m0 + t * (m1 - m0) / (6.0 * h))))
    }
}
