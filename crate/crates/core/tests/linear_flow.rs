//! Free Schrödinger flow through a transparent vertex (two edges, α = 0)
//! against the exact Gaussian wave packet.

use graphnls::evolution::{evolve, EvolutionConfig, Scheme};
use graphnls::functionals::DeltaModel;
use graphnls::{GraphField, StarGraphGrid};
use num_complex::Complex64;

const S: f64 = 1.0;
const X0: f64 = -3.0;
const K: f64 = 2.0;

/// Solution of `iu_t = −u_xx` with `u(x, 0) = exp(−(x−x₀)²/(2s) + ikx)`.
fn packet(x: f64, t: f64) -> Complex64 {
    let i = Complex64::i();
    let st = Complex64::new(S, 2.0 * t);
    let shift = x - X0 - 2.0 * K * t;
    (S / st).sqrt() * (-(shift * shift) / (2.0 * st) + i * (K * x - K * K * t)).exp()
}

/// Edge 0 is `x > 0`, edge 1 is `x < 0` read outwards.
fn on_line(g: StarGraphGrid, t: f64) -> GraphField {
    GraphField::from_fn(g, |j, s| if j == 0 { packet(s, t) } else { packet(-s, t) }).unwrap()
}

fn sup_error(h: f64, dt: f64, t_end: f64) -> f64 {
    let g = StarGraphGrid::with_spacing(2, 25.0, h).unwrap();
    let cfg = EvolutionConfig {
        dt,
        t_end,
        scheme: Scheme::CrankNicolsonRelaxed,
        nonlinear: false,
        monitor_stride: 1000,
        ..EvolutionConfig::default()
    };
    let out = evolve(&on_line(g, 0.0), &cfg, &DeltaModel::new(0.0, 3.0).unwrap(), 1.0).unwrap();
    assert!((out.final_time - t_end).abs() < 1e-12);
    let exact = on_line(g, t_end);
    out.final_state
        .samples()
        .as_slice()
        .iter()
        .zip(exact.samples().as_slice())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

#[test]
fn packet_crosses_the_vertex() {
    let err = sup_error(0.01, 1e-3, 1.5);
    assert!(err < 1e-3, "{err:e}");
}

#[test]
fn packet_error_is_second_order() {
    let coarse = sup_error(0.02, 2e-3, 1.5);
    let fine = sup_error(0.01, 1e-3, 1.5);
    let ratio = coarse / fine;
    assert!((3.5..4.5).contains(&ratio), "{coarse:e} / {fine:e} = {ratio}");
}
