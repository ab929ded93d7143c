//! Discrete functions on a truncated star graph and on the line split at the origin.
//!
//! Every edge of a [`StarGraphGrid`] is the interval `[0, L]` sampled at
//! `x_i = i·h`, `i = 0 … M−1`. Edge-summed integrals use the grid's
//! quadrature [`Rule`].

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance for vertex continuity when ingesting external samples.
pub const VERTEX_CONTINUITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rule {
    #[default]
    Trapezoid,
    /// Composite Simpson; needs an odd number of samples per edge.
    Simpson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarGraphGrid {
    n_edges: usize,
    n_points: usize,
    h: f64,
    rule: Rule,
}

impl StarGraphGrid {
    /// `n_points` samples per edge on `[0, length]`.
    pub fn new(n_edges: usize, length: f64, n_points: usize) -> Result<Self> {
        if n_edges == 0 {
            return Err(Error::InvalidGrid("need at least one edge".into()));
        }
        if n_points < 3 {
            return Err(Error::InvalidGrid(format!("need M >= 3 samples per edge, got {n_points}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("edge length must be positive, got {length}")));
        }
        Ok(Self { n_edges, n_points, h: length / (n_points - 1) as f64, rule: Rule::Trapezoid })
    }

    /// `n_points` samples spaced exactly `h` apart.
    pub fn uniform(n_edges: usize, n_points: usize, h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {h}")));
        }
        let mut g = Self::new(n_edges, h * (n_points.max(3) - 1) as f64, n_points)?;
        g.h = h;
        Ok(g)
    }

    /// Grid with spacing as close to `h` as possible such that `L = (M−1)·h`.
    pub fn with_spacing(n_edges: usize, length: f64, h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {h}")));
        }
        let intervals = (length / h).round().max(2.0) as usize;
        Self::new(n_edges, length, intervals + 1)
    }

    /// Same grid with a different quadrature rule.
    pub fn with_rule(mut self, rule: Rule) -> Result<Self> {
        if rule == Rule::Simpson && self.n_points.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "Simpson quadrature needs an odd number of samples, got {}",
                self.n_points
            )));
        }
        self.rule = rule;
        Ok(self)
    }

    /// Same spacing and length, different number of edges.
    pub fn with_edges(mut self, n_edges: usize) -> Self {
        self.n_edges = n_edges.max(1);
        self
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    pub fn length(&self) -> f64 {
        self.h * (self.n_points - 1) as f64
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    /// Quadrature weights for a single edge.
    pub fn weights(&self) -> Vec<f64> {
        let m = self.n_points;
        let h = self.h;
        let mut w = vec![0.0; m];
        match self.rule {
            Rule::Trapezoid => {
                w.iter_mut().for_each(|v| *v = h);
                w[0] = 0.5 * h;
                w[m - 1] = 0.5 * h;
            }
            Rule::Simpson => {
                for (i, v) in w.iter_mut().enumerate() {
                    *v = if i == 0 || i == m - 1 {
                        h / 3.0
                    } else if i % 2 == 1 {
                        4.0 * h / 3.0
                    } else {
                        2.0 * h / 3.0
                    };
                }
            }
        }
        w
    }

    /// `Σ_j ∫ f_j dx` for a real integrand given pointwise as `f(edge, index)`.
    pub fn integrate<F: Fn(usize, usize) -> f64>(&self, f: F) -> f64 {
        let w = self.weights();
        let mut total = 0.0;
        for j in 0..self.n_edges {
            let mut s = 0.0;
            for (i, wi) in w.iter().enumerate() {
                s += wi * f(j, i);
            }
            total += s;
        }
        total
    }
}

/// Complex samples on every edge of a grid, `N × M`, without any vertex constraint.
///
/// Used for derivative fields and as the storage of [`GraphField`] and [`LineField`].
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSamples {
    grid: StarGraphGrid,
    values: Vec<Complex64>,
}

impl EdgeSamples {
    pub fn zeros(grid: StarGraphGrid) -> Self {
        Self { grid, values: vec![Complex64::new(0.0, 0.0); grid.n_edges * grid.n_points] }
    }

    pub fn from_fn<F: FnMut(usize, f64) -> Complex64>(grid: StarGraphGrid, mut f: F) -> Self {
        let mut values = Vec::with_capacity(grid.n_edges * grid.n_points);
        for j in 0..grid.n_edges {
            for i in 0..grid.n_points {
                values.push(f(j, grid.x(i)));
            }
        }
        Self { grid, values }
    }

    pub fn from_flat(grid: StarGraphGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_edges * grid.n_points {
            return Err(Error::InvalidField(format!(
                "expected {} samples, got {}",
                grid.n_edges * grid.n_points,
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &StarGraphGrid {
        &self.grid
    }

    pub fn edge(&self, j: usize) -> &[Complex64] {
        let m = self.grid.n_points;
        &self.values[j * m..(j + 1) * m]
    }

    pub fn edge_mut(&mut self, j: usize) -> &mut [Complex64] {
        let m = self.grid.n_points;
        &mut self.values[j * m..(j + 1) * m]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Second-order finite-difference derivative along each edge.
    ///
    /// Central differences in the interior, one-sided three-point stencils at
    /// both ends of every edge.
    pub fn derivative(&self) -> EdgeSamples {
        let m = self.grid.n_points;
        let inv2h = 0.5 / self.grid.h;
        let mut out = EdgeSamples::zeros(self.grid);
        for j in 0..self.grid.n_edges {
            let u = self.edge(j);
            let d = out.edge_mut(j);
            if m == 2 {
                let s = (u[1] - u[0]) * (2.0 * inv2h);
                d[0] = s;
                d[1] = s;
                continue;
            }
            d[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) * inv2h;
            for i in 1..m - 1 {
                d[i] = (u[i + 1] - u[i - 1]) * inv2h;
            }
            d[m - 1] = (3.0 * u[m - 1] - 4.0 * u[m - 2] + u[m - 3]) * inv2h;
        }
        out
    }

    /// `Σ_j ∫ u_j dx`, real and imaginary parts integrated separately.
    pub fn integral(&self) -> Complex64 {
        let re = self.grid.integrate(|j, i| self.edge(j)[i].re);
        let im = self.grid.integrate(|j, i| self.edge(j)[i].im);
        Complex64::new(re, im)
    }

    /// `‖u‖_{L^q}^q`.
    pub fn lq_power(&self, q: f64) -> f64 {
        if q == 2.0 {
            self.grid.integrate(|j, i| self.edge(j)[i].norm_sqr())
        } else {
            self.grid.integrate(|j, i| self.edge(j)[i].norm().powf(q))
        }
    }

    pub fn lp_norm(&self, q: f64) -> Result<f64> {
        if !(q >= 1.0) {
            return Err(Error::InvalidArgument(format!("L^q norm needs q >= 1, got {q}")));
        }
        Ok(self.lq_power(q).powf(1.0 / q))
    }

    /// `∫ x² |u|² dx`.
    pub fn weighted_l2_x(&self) -> f64 {
        let g = self.grid;
        g.integrate(|j, i| {
            let x = g.x(i);
            x * x * self.edge(j)[i].norm_sqr()
        })
    }

    /// `‖u′‖₂²` via [`EdgeSamples::derivative`].
    pub fn kinetic(&self) -> f64 {
        self.derivative().lq_power(2.0)
    }

    /// `Im ∫ x ū ∂ₓu dx`.
    pub fn momentum_moment(&self) -> f64 {
        let d = self.derivative();
        let g = self.grid;
        g.integrate(|j, i| g.x(i) * (self.edge(j)[i].conj() * d.edge(j)[i]).im)
    }

    /// Largest modulus over all samples.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `∫_{x > x0} |u|² dx`.
    pub fn tail_mass(&self, x0: f64) -> f64 {
        let g = self.grid;
        g.integrate(|j, i| if g.x(i) > x0 { self.edge(j)[i].norm_sqr() } else { 0.0 })
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v * c).collect() }
    }

    /// `a·self + b·other`; grids must agree.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::InvalidField("fields live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(u, v)| a * u + b * v).collect();
        Ok(Self { grid: self.grid, values })
    }
}

/// A function on the star graph: samples on every edge with a single shared vertex value.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphField {
    samples: EdgeSamples,
}

impl GraphField {
    pub fn zeros(grid: StarGraphGrid) -> Self {
        Self { samples: EdgeSamples::zeros(grid) }
    }

    /// Same value on every edge at every point.
    pub fn constant(grid: StarGraphGrid, c: Complex64) -> Self {
        Self { samples: EdgeSamples::from_fn(grid, |_, _| c) }
    }

    /// Samples `f(edge, x)`; fails unless the edge values at `x = 0` agree.
    pub fn from_fn<F: FnMut(usize, f64) -> Complex64>(grid: StarGraphGrid, f: F) -> Result<Self> {
        Self::from_samples(EdgeSamples::from_fn(grid, f))
    }

    /// Edge-symmetric field `u_j(x) = f(x)` on every edge.
    pub fn symmetric<F: FnMut(f64) -> Complex64>(grid: StarGraphGrid, mut f: F) -> Self {
        let m = grid.n_points();
        let profile: Vec<Complex64> = (0..m).map(|i| f(grid.x(i))).collect();
        let mut samples = EdgeSamples::zeros(grid);
        for j in 0..grid.n_edges() {
            samples.edge_mut(j).copy_from_slice(&profile);
        }
        Self { samples }
    }

    /// Accepts samples whose vertex values agree to [`VERTEX_CONTINUITY_TOL`]
    /// (relative) and stores their mean as the shared vertex value.
    pub fn from_samples(mut samples: EdgeSamples) -> Result<Self> {
        if !samples.is_finite() {
            return Err(Error::InvalidField("non-finite sample".into()));
        }
        let n = samples.grid.n_edges;
        let vertex_vals: Vec<Complex64> = (0..n).map(|j| samples.edge(j)[0]).collect();
        let mean = vertex_vals.iter().sum::<Complex64>() / n as f64;
        let scale = vertex_vals.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
        for (j, v) in vertex_vals.iter().enumerate() {
            if (v - mean).norm() > VERTEX_CONTINUITY_TOL * scale {
                return Err(Error::InvalidField(format!(
                    "vertex continuity violated on edge {j}: {v} vs mean {mean}"
                )));
            }
        }
        for j in 0..n {
            samples.edge_mut(j)[0] = mean;
        }
        Ok(Self { samples })
    }

    pub fn grid(&self) -> &StarGraphGrid {
        &self.samples.grid
    }

    pub fn samples(&self) -> &EdgeSamples {
        &self.samples
    }

    pub fn into_samples(self) -> EdgeSamples {
        self.samples
    }

    pub fn edge(&self, j: usize) -> &[Complex64] {
        self.samples.edge(j)
    }

    pub fn vertex(&self) -> Complex64 {
        self.samples.edge(0)[0]
    }

    /// Apply `f` pointwise; `f` sees the same vertex value on every edge, so
    /// continuity is preserved.
    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        let mut s = self.samples.clone();
        s.values.iter_mut().for_each(|v| *v = f(*v));
        Self { samples: s }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { samples: self.samples.scaled(c) }
    }

    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        Ok(Self { samples: self.samples.combine(a, &other.samples, b)? })
    }

    pub fn derivative(&self) -> EdgeSamples {
        self.samples.derivative()
    }

    pub fn integral(&self) -> Complex64 {
        self.samples.integral()
    }

    pub fn lp_norm(&self, q: f64) -> Result<f64> {
        self.samples.lp_norm(q)
    }

    pub fn weighted_l2_x(&self) -> f64 {
        self.samples.weighted_l2_x()
    }

    pub fn mass(&self) -> f64 {
        self.samples.lq_power(2.0)
    }
}

/// A function on ℝ∖{0}, stored as two half-lines in `|x|`: index `i` of
/// [`LineField::right`] is `u(i·h)` and of [`LineField::left`] is `u(−i·h)`.
///
/// The one-sided traces `u(0+)` and `u(0−)` are independent.
#[derive(Debug, Clone, PartialEq)]
pub struct LineField {
    samples: EdgeSamples,
}

impl LineField {
    /// Half-line grid for a line field; the edge count of `grid` is ignored.
    pub fn zeros(grid: StarGraphGrid) -> Self {
        Self { samples: EdgeSamples::zeros(grid.with_edges(2)) }
    }

    /// `right(s) = u(s)`, `left(s) = u(−s)` for `s ≥ 0`.
    pub fn from_sides<R, L>(grid: StarGraphGrid, mut right: R, mut left: L) -> Self
    where
        R: FnMut(f64) -> Complex64,
        L: FnMut(f64) -> Complex64,
    {
        let grid = grid.with_edges(2);
        Self { samples: EdgeSamples::from_fn(grid, |j, s| if j == 0 { right(s) } else { left(s) }) }
    }

    pub fn from_samples(samples: EdgeSamples) -> Result<Self> {
        if samples.grid.n_edges != 2 {
            return Err(Error::InvalidField(format!(
                "line field needs exactly two half-lines, got {}",
                samples.grid.n_edges
            )));
        }
        if !samples.is_finite() {
            return Err(Error::InvalidField("non-finite sample".into()));
        }
        Ok(Self { samples })
    }

    pub fn grid(&self) -> &StarGraphGrid {
        &self.samples.grid
    }

    pub fn samples(&self) -> &EdgeSamples {
        &self.samples
    }

    pub fn into_samples(self) -> EdgeSamples {
        self.samples
    }

    pub fn right(&self) -> &[Complex64] {
        self.samples.edge(0)
    }

    pub fn left(&self) -> &[Complex64] {
        self.samples.edge(1)
    }

    pub fn trace_plus(&self) -> Complex64 {
        self.right()[0]
    }

    pub fn trace_minus(&self) -> Complex64 {
        self.left()[0]
    }

    /// `u(0+) − u(0−)`.
    pub fn jump(&self) -> Complex64 {
        self.trace_plus() - self.trace_minus()
    }

    /// One-sided second-order derivatives `(u′(0−), u′(0+))` in the `x` variable.
    pub fn one_sided_derivatives(&self) -> (Complex64, Complex64) {
        let d = self.samples.derivative();
        (-d.edge(1)[0], d.edge(0)[0])
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        let mut s = self.samples.clone();
        s.values.iter_mut().for_each(|v| *v = f(*v));
        Self { samples: s }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { samples: self.samples.scaled(c) }
    }

    pub fn mass(&self) -> f64 {
        self.samples.lq_power(2.0)
    }

    pub fn lp_norm(&self, q: f64) -> Result<f64> {
        self.samples.lp_norm(q)
    }

    pub fn weighted_l2_x(&self) -> f64 {
        self.samples.weighted_l2_x()
    }

    /// `Im ∫_ℝ x ū ∂ₓu dx`; the left half contributes with both signs flipped,
    /// which leaves the integrand unchanged in `|x|` form.
    pub fn momentum_moment(&self) -> f64 {
        self.samples.momentum_moment()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn constant_integrates_to_total_length() {
        let g = StarGraphGrid::new(3, 10.0, 101).unwrap();
        let f = GraphField::constant(g, c(1.0));
        assert!((f.integral().re - 30.0).abs() < 1e-12);
        let gs = g.with_rule(Rule::Simpson).unwrap();
        assert!((GraphField::constant(gs, c(1.0)).integral().re - 30.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_decay_integral() {
        let g = StarGraphGrid::with_spacing(1, 40.0, 1e-3).unwrap();
        let f = GraphField::symmetric(g, |x| c((-x).exp()));
        assert!((f.integral().re - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_field_everything_vanishes() {
        let g = StarGraphGrid::new(2, 5.0, 51).unwrap();
        let z = GraphField::zeros(g);
        assert_eq!(z.integral(), c(0.0));
        assert_eq!(z.lp_norm(3.0).unwrap(), 0.0);
        assert_eq!(z.weighted_l2_x(), 0.0);
    }

    #[test]
    fn lp_norm_constant_and_bad_exponent() {
        let g = StarGraphGrid::new(2, 5.0, 11).unwrap();
        let f = GraphField::constant(g, c(1.0));
        assert!((f.lp_norm(2.0).unwrap() - 10f64.sqrt()).abs() < 1e-12);
        assert!(matches!(f.lp_norm(0.5), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn weighted_second_moment_of_constant() {
        let g = StarGraphGrid::with_spacing(1, 3.0, 1e-4).unwrap();
        let f = GraphField::constant(g, c(1.0));
        // trapezoid error h²·(L)/6·... = 3e-8·... well inside 1e-7; Simpson is exact
        assert!((f.weighted_l2_x() - 9.0).abs() < 1e-7);
        let gs = StarGraphGrid::new(1, 3.0, 31).unwrap().with_rule(Rule::Simpson).unwrap();
        assert!((GraphField::constant(gs, c(1.0)).weighted_l2_x() - 9.0).abs() < 1e-10);
    }

    #[test]
    fn derivative_exact_for_quadratics() {
        let g = StarGraphGrid::new(1, 2.0, 21).unwrap();
        let lin = GraphField::symmetric(g, c);
        let d = lin.derivative();
        assert!(d.edge(0).iter().all(|v| (v - c(1.0)).norm() < 1e-12));
        let quad = GraphField::symmetric(g, |x| c(x * x));
        let dq = quad.derivative();
        for (i, v) in dq.edge(0).iter().enumerate() {
            assert!((v.re - 2.0 * g.x(i)).abs() < 1e-12);
        }
        let cst = GraphField::constant(g, c(4.0)).derivative();
        assert!(cst.edge(0).iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn derivative_of_sine_second_order() {
        let g = StarGraphGrid::with_spacing(1, 6.0, 1e-3).unwrap();
        let s = GraphField::symmetric(g, |x| c(x.sin()));
        let d = s.derivative();
        let err = d.edge(0).iter().enumerate().map(|(i, v)| (v.re - g.x(i).cos()).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "err {err}");
    }

    #[test]
    fn vertex_continuity_enforced() {
        let g = StarGraphGrid::new(3, 1.0, 11).unwrap();
        let bad = GraphField::from_fn(g, |j, x| c(j as f64 + x));
        assert!(matches!(bad, Err(Error::InvalidField(_))));
        let ok = GraphField::from_fn(g, |j, x| c(1.0 + j as f64 * x + 1e-13 * j as f64)).unwrap();
        let v = ok.vertex();
        for j in 0..3 {
            assert_eq!(ok.edge(j)[0], v);
        }
    }

    #[test]
    fn simpson_needs_odd_sample_count() {
        let g = StarGraphGrid::new(1, 1.0, 10).unwrap();
        assert!(g.with_rule(Rule::Simpson).is_err());
    }

    #[test]
    fn line_field_jump_and_derivatives() {
        let g = StarGraphGrid::new(1, 2.0, 201).unwrap();
        let f = LineField::from_sides(g, |s| c(1.0 + 2.0 * s), |s| c(-0.5 + 2.0 * s * 0.0 - 2.0 * s));
        assert!((f.jump() - c(1.5)).norm() < 1e-14);
        let (dm, dp) = f.one_sided_derivatives();
        assert!((dp - c(2.0)).norm() < 1e-12);
        // left(s) = −0.5 − 2s means u(x) = −0.5 + 2x for x < 0
        assert!((dm - c(2.0)).norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn quadrature_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, decay in 0.1f64..3.0, simpson in any::<bool>()) {
            let mut g = StarGraphGrid::new(3, 8.0, 161).unwrap();
            if simpson {
                g = g.with_rule(Rule::Simpson).unwrap();
            }
            let u = EdgeSamples::from_fn(g, |j, x| Complex64::new((-(decay + j as f64) * x).exp(), x.sin()));
            let v = EdgeSamples::from_fn(g, |_, x| Complex64::new(x.cos(), -(x * x)));
            let w = u.combine(Complex64::new(a, 0.0), &v, Complex64::new(b, 0.0)).unwrap();
            let lhs = w.integral();
            let rhs = u.integral() * a + v.integral() * b;
            prop_assert!((lhs - rhs).norm() < 1e-11 * (1.0 + a.abs() + b.abs()) * 100.0);
        }

        #[test]
        fn mass_scales_quadratically(re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let g = StarGraphGrid::new(2, 5.0, 51).unwrap();
            let u = EdgeSamples::from_fn(g, |j, x| Complex64::new((-x).exp(), j as f64 * x));
            let c = Complex64::new(re, im);
            let lhs = u.scaled(c).lq_power(2.0);
            prop_assert!((lhs - c.norm_sqr() * u.lq_power(2.0)).abs() < 1e-12 * (1.0 + lhs));
        }
    }
}
