//! Finite-difference Hamiltonian on the truncated graph and its implicit solve.
//!
//! The discrete energy `½Σ|u_{i+1} − u_i|²/h + (vertex term)` defines a
//! symmetric stiffness matrix `K`, and the trapezoid weights define a diagonal
//! mass matrix `W`. The semi-discrete flow is `iWu̇ = Ku − W|u|^{p−1}u`.
//! Unknowns are the shared vertex value(s) plus one chain of interior nodes per
//! edge; the chains only talk to each other through the vertex block, which is
//! eliminated by a Schur complement.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::StarGraphGrid;
use crate::numerics::Tridiagonal;

use super::OuterBc;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Junction {
    /// Continuity and `Σ u_j′(0) = α u(0)`.
    Delta { alpha: f64 },
    /// Two traces `u(0±)`, continuous derivative and `u(0+) − u(0−) = −γ u′(0)`.
    DeltaPrime { gamma: f64 },
}

#[derive(Debug, Clone)]
pub(crate) struct Lattice {
    pub n_edges: usize,
    pub m: usize,
    /// Chain nodes per edge: samples `1..=free`.
    pub free: usize,
    pub n_vertex: usize,
    vertex_of: Vec<usize>,
    w_vertex: [f64; 2],
    k_vertex: [[f64; 2]; 2],
    w_chain: Vec<f64>,
    k_chain: Vec<f64>,
    /// Off-diagonal entry `−1/h` of `K` along chains and into the vertex.
    off: f64,
}

impl Lattice {
    pub fn new(grid: &StarGraphGrid, junction: Junction, bc: OuterBc) -> Result<Self> {
        let (n, m, h) = (grid.n_edges(), grid.n_points(), grid.h());
        let free = match bc {
            OuterBc::Dirichlet => m - 2,
            OuterBc::Neumann => m - 1,
        };
        if free == 0 {
            return Err(Error::InvalidGrid("no interior nodes".into()));
        }
        let mut w_chain = vec![h; free];
        let mut k_chain = vec![2.0 / h; free];
        if bc == OuterBc::Neumann {
            w_chain[free - 1] = 0.5 * h;
            k_chain[free - 1] = 1.0 / h;
        }
        let (n_vertex, vertex_of, w_vertex, k_vertex) = match junction {
            Junction::Delta { alpha } => {
                (1, vec![0; n], [0.5 * h * n as f64, 0.0], [[n as f64 / h + alpha, 0.0], [0.0, 0.0]])
            }
            Junction::DeltaPrime { gamma } => {
                if n != 2 {
                    return Err(Error::InvalidGrid("the δ′ line needs exactly two half-lines".into()));
                }
                let g = 1.0 / gamma;
                (2, vec![0, 1], [0.5 * h, 0.5 * h], [[1.0 / h - g, g], [g, 1.0 / h - g]])
            }
        };
        Ok(Self { n_edges: n, m, free, n_vertex, vertex_of, w_vertex, k_vertex, w_chain, k_chain, off: -1.0 / h })
    }

    /// Vertex unknown `v` read from the sample layout.
    #[inline]
    fn vertex_value(&self, u: &[Complex64], v: usize) -> Complex64 {
        // star: all edges share sample 0; line: edge v owns vertex v
        u[v * self.m]
    }

    /// `rhs = (W − iθK + iθWΦ)u` in sample layout; `pot` is `Φ` in sample layout.
    pub fn explicit_half(&self, u: &[Complex64], theta: f64, pot: Option<&[f64]>, rhs: &mut [Complex64]) {
        let m = self.m;
        let it = Complex64::new(0.0, theta);
        let it_off = it * self.off;
        for v in 0..self.n_vertex {
            let uv = self.vertex_value(u, v);
            let phi = pot.map_or(0.0, |p| p[v * m]);
            let mut acc = self.w_vertex[v] * Complex64::new(1.0, theta * phi) * uv;
            for w in 0..self.n_vertex {
                acc -= it * self.k_vertex[v][w] * self.vertex_value(u, w);
            }
            for j in 0..self.n_edges {
                if self.vertex_of[j] == v {
                    acc -= it_off * u[j * m + 1];
                }
            }
            rhs[v * m] = acc;
        }
        for j in 0..self.n_edges {
            let base = j * m;
            let uj = &u[base..base + m];
            let rj = &mut rhs[base..base + m];
            let left0 = self.vertex_value(u, self.vertex_of[j]);
            match pot {
                None => {
                    for k in 0..self.free {
                        let i = k + 1;
                        let left = if k == 0 { left0 } else { uj[i - 1] };
                        let right = if i + 1 < m { uj[i + 1] } else { ZERO };
                        let d = Complex64::new(self.w_chain[k], -theta * self.k_chain[k]);
                        rj[i] = d * uj[i] - it_off * (left + right);
                    }
                }
                Some(p) => {
                    let pj = &p[base..base + m];
                    for k in 0..self.free {
                        let i = k + 1;
                        let left = if k == 0 { left0 } else { uj[i - 1] };
                        let right = if i + 1 < m { uj[i + 1] } else { ZERO };
                        let d = Complex64::new(
                            self.w_chain[k],
                            theta * (self.w_chain[k] * pj[i] - self.k_chain[k]),
                        );
                        rj[i] = d * uj[i] - it_off * (left + right);
                    }
                }
            }
        }
    }

    /// `K u` in sample layout (vertex rows at sample 0 of their edges).
    #[cfg(test)]
    pub fn apply_k(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; u.len()];
        // (W − iθK)u with θ = 1 and W dropped: −i K u
        let mut tmp = vec![ZERO; u.len()];
        self.explicit_half(u, 1.0, None, &mut tmp);
        let m = self.m;
        for v in 0..self.n_vertex {
            let uv = self.vertex_value(u, v);
            out[v * m] = (tmp[v * m] - self.w_vertex[v] * uv) * Complex64::new(0.0, 1.0);
        }
        for j in 0..self.n_edges {
            for k in 0..self.free {
                let i = j * m + k + 1;
                out[i] = (tmp[i] - self.w_chain[k] * u[i]) * Complex64::new(0.0, 1.0);
            }
        }
        out
    }

    /// Discrete mass `Σ W|u|²`.
    #[cfg(test)]
    pub fn mass(&self, u: &[Complex64]) -> f64 {
        let mut s = 0.0;
        for v in 0..self.n_vertex {
            s += self.w_vertex[v] * self.vertex_value(u, v).norm_sqr();
        }
        for j in 0..self.n_edges {
            for k in 0..self.free {
                s += self.w_chain[k] * u[j * self.m + k + 1].norm_sqr();
            }
        }
        s
    }
}

/// Factored `W + iθK − iθWΦ`.
#[derive(Debug, Clone)]
pub(crate) struct ImplicitSystem {
    /// One chain when all chains share a matrix, else one per edge.
    chains: Vec<Tridiagonal>,
    /// `A_j⁻¹ e₀` per stored chain.
    z: Vec<Vec<Complex64>>,
    coupling: Complex64,
    schur_inv: [[Complex64; 2]; 2],
}

impl ImplicitSystem {
    pub fn new(lat: &Lattice, theta: f64, pot: Option<&[f64]>) -> Result<Self> {
        let m = lat.m;
        let it = Complex64::new(0.0, theta);
        let coupling = it * lat.off;
        let n_chains = if pot.is_some() { lat.n_edges } else { 1 };
        let mut chains = Vec::with_capacity(n_chains);
        let mut z = Vec::with_capacity(n_chains);
        for j in 0..n_chains {
            let diag: Vec<Complex64> = (0..lat.free)
                .map(|k| {
                    let phi = pot.map_or(0.0, |p| p[j * m + k + 1]);
                    Complex64::new(lat.w_chain[k], theta * (lat.k_chain[k] - lat.w_chain[k] * phi))
                })
                .collect();
            let band = vec![coupling; lat.free];
            let t = Tridiagonal::new(band.clone(), diag, band)?;
            let mut e0 = vec![ZERO; lat.free];
            e0[0] = Complex64::new(1.0, 0.0);
            t.solve_in_place(&mut e0);
            chains.push(t);
            z.push(e0);
        }
        let mut s = [[ZERO; 2]; 2];
        for v in 0..lat.n_vertex {
            let phi = pot.map_or(0.0, |p| p[v * m]);
            for w in 0..lat.n_vertex {
                s[v][w] = it * lat.k_vertex[v][w];
            }
            s[v][v] += lat.w_vertex[v] * Complex64::new(1.0, -theta * phi);
        }
        for j in 0..lat.n_edges {
            let v = lat.vertex_of[j];
            s[v][v] -= coupling * coupling * z[j.min(n_chains - 1)][0];
        }
        let schur_inv = if lat.n_vertex == 1 {
            if s[0][0].norm() == 0.0 || !s[0][0].is_finite() {
                return Err(Error::Singular("vertex Schur complement vanishes".into()));
            }
            [[s[0][0].inv(), ZERO], [ZERO, ZERO]]
        } else {
            let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
            if det.norm() == 0.0 || !det.is_finite() {
                return Err(Error::Singular("vertex Schur complement is singular".into()));
            }
            let di = det.inv();
            [[s[1][1] * di, -s[0][1] * di], [-s[1][0] * di, s[0][0] * di]]
        };
        Ok(Self { chains, z, coupling, schur_inv })
    }

    /// Solve in place: on entry `u` holds the right-hand side in sample layout.
    pub fn solve(&self, lat: &Lattice, u: &mut [Complex64]) {
        let m = lat.m;
        let nc = self.chains.len();
        let mut rw = [ZERO; 2];
        for v in 0..lat.n_vertex {
            rw[v] = u[v * m];
        }
        if nc == 1 {
            let mut rows: Vec<&mut [Complex64]> =
                u.chunks_mut(m).map(|c| &mut c[1..1 + lat.free]).collect();
            self.chains[0].solve_many_in_place(&mut rows);
        } else {
            for j in 0..lat.n_edges {
                self.chains[j].solve_in_place(&mut u[j * m + 1..j * m + 1 + lat.free]);
            }
        }
        for j in 0..lat.n_edges {
            rw[lat.vertex_of[j]] -= self.coupling * u[j * m + 1];
        }
        let mut w = [ZERO; 2];
        for v in 0..lat.n_vertex {
            for k in 0..lat.n_vertex {
                w[v] += self.schur_inv[v][k] * rw[k];
            }
        }
        for j in 0..lat.n_edges {
            let wv = w[lat.vertex_of[j]];
            let zj = &self.z[j.min(nc - 1)];
            let cw = self.coupling * wv;
            let base = j * m;
            u[base] = wv;
            for (x, z) in u[base + 1..base + 1 + lat.free].iter_mut().zip(zj) {
                *x -= cw * z;
            }
            if lat.free + 1 < m {
                u[base + m - 1] = ZERO;
            }
        }
    }
}
