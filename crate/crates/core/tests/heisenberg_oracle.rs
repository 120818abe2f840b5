//! Kernel route on the Heisenberg group against the closed form for a Gaussian.
//!
//! For `phi = exp(-|g - c|^2 / 2 s^2)` in exponential coordinates, with
//! `u = xi - xi1` and `v = (xi + xi1) / 2`,
//!
//!   K(lambda, xi1, xi) = 2 pi s^2 exp(-lambda^2 s^2 / 2) exp(i lambda t0)
//!                        exp(i lambda v y0) exp(-(u - x0)^2 / 2 s^2) exp(-lambda^2 v^2 s^2 / 2)
//!
//! and `||K(lambda)||_HS^2 = 4 pi^3 s^4 exp(-lambda^2 s^2) / |lambda|`
//! (derivation in docs/heisenberg_oracle.md).

use num_complex::Complex64;

use nilpw_core::functions::{FunctionFamily, SampledGroupFunction};
use nilpw_core::transform::{hs_norms, kernel_tensor, TransformOptions};
use nilpw_core::{get_group, Axis, GridSpec, RepFamily};

const S: f64 = 0.2;
const C: [f64; 3] = [0.1, -0.15, 0.2];

fn closed_form(lam: f64, xi1: f64, xi: f64) -> Complex64 {
    let (u, v) = (xi - xi1, 0.5 * (xi + xi1));
    let amp = 2.0
        * std::f64::consts::PI
        * S
        * S
        * (-lam * lam * S * S / 2.0).exp()
        * (-(u - C[0]).powi(2) / (2.0 * S * S)).exp()
        * (-lam * lam * v * v * S * S / 2.0).exp();
    Complex64::from_polar(amp, lam * C[2] + lam * v * C[1])
}

fn gaussian() -> SampledGroupFunction {
    let g = GridSpec::cube(3, 2.0, 65).unwrap();
    FunctionFamily::Gaussian {
        center: C.to_vec(),
        sigma: S,
        radius: vec![1.7; 3],
    }
    .sample(&g)
    .unwrap()
}

fn family(lambda: Axis) -> RepFamily {
    let b = get_group("heisenberg").unwrap();
    let lg = GridSpec::new_dual(vec![lambda]).unwrap();
    RepFamily::on_grid(b.algebra.clone(), &b.flag, b.dual_chart().unwrap(), &lg).unwrap()
}

#[test]
fn closed_form_frozen_values() {
    // evaluated independently in double precision
    let a = closed_form(2.0, 0.0, 0.0);
    assert!((a - Complex64::new(0.18858097711296032, 0.07973075830637612)).norm() < 1e-15);
    let b = closed_form(-3.0, 0.25, 0.5);
    assert!((b - Complex64::new(0.14035457981610877, -0.06458202772614692)).norm() < 1e-15);
}

#[test]
fn kernel_matches_closed_form_pointwise() {
    let phi = gaussian();
    let fam = family(Axis::from_range(-3.0, 2.0, 3));
    let x = GridSpec::cube(1, 1.0, 17).unwrap();
    let k = kernel_tensor(&phi, &fam, &x, &TransformOptions::default()).unwrap();
    for l in 0..fam.len() {
        let lam = fam.lambda(l)[0];
        let mut worst = 0.0_f64;
        let mut scale = 0.0_f64;
        for i in 0..x.len() {
            for j in 0..x.len() {
                let want = closed_form(lam, x.coords(i)[0], x.coords(j)[0]);
                worst = worst.max((k.at(l, i, j) - want).norm());
                scale = scale.max(want.norm());
            }
        }
        assert!(
            worst < 2e-3 * scale,
            "lambda {lam}: {worst:e} vs max {scale:e}"
        );
    }
}

#[test]
fn hs_norm_matches_closed_form() {
    let phi = gaussian();
    let fam = family(Axis::from_range(3.0, 4.0, 2));
    // v-width 1 / (lambda s) <= 1.7; the box holds > 3.5 widths
    let x = GridSpec::cube(1, 6.0, 193).unwrap();
    let (hs, _) = hs_norms(&[&phi], &fam, &x, &TransformOptions::default()).unwrap();
    for l in 0..fam.len() {
        let lam: f64 = fam.lambda(l)[0];
        let want =
            4.0 * std::f64::consts::PI.powi(3) * S.powi(4) * (-lam * lam * S * S).exp() / lam;
        let rel = (hs[0][l] - want).abs() / want;
        assert!(rel < 2e-3, "lambda {lam}: {} vs {want}: {rel:e}", hs[0][l]);
    }
    // frozen: lambda = 4
    assert!((hs[0][1] - 0.026158999666087587).abs() < 2e-3 * 0.026158999666087587);
}
