use num_complex::Complex64;
use proptest::prelude::*;

use nilpw_core::functions::{FunctionFamily, SampledGroupFunction};
use nilpw_core::interp::Interpolation;
use nilpw_core::transform::{
    convolve, direct_operators, hs_relative, kernel_tensor, TransformOptions,
};
use nilpw_core::{get_group, Axis, GridSpec, GroupElement, RepFamily};

fn heisenberg_family(lambda: Axis) -> RepFamily {
    let b = get_group("heisenberg").unwrap();
    let lg = GridSpec::new_dual(vec![lambda]).unwrap();
    RepFamily::on_grid(b.algebra.clone(), &b.flag, b.dual_chart().unwrap(), &lg).unwrap()
}

fn heisenberg_rep(lam: f64) -> nilpw_core::InducedRep {
    let fam = heisenberg_family(Axis::from_range(lam, lam + 1.0, 2));
    fam.rep(0).unwrap().clone()
}

fn gaussian(x: &GridSpec, c: f64) -> Vec<Complex64> {
    (0..x.len())
        .map(|i| Complex64::new((-(x.coords(i)[0] - c).powi(2) / 0.72).exp(), 0.0))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn real_functions_have_hermitian_kernels(index in 0u64..1000) {
        let g = GridSpec::cube(3, 2.0, 17).unwrap();
        let phi = FunctionFamily::random(11, index).sample(&g).unwrap();
        prop_assert!(phi.is_real());
        let fam = heisenberg_family(Axis::from_range(-2.0, 2.0, 5));
        let x = GridSpec::cube(1, 3.0, 17).unwrap();
        let k = kernel_tensor(&phi, &fam, &x, &TransformOptions::default()).unwrap();
        let nx = x.len();
        let scale = k.max_abs();
        for l in [0usize, 1] {
            let m = fam.len() - 1 - l;
            for i in 0..nx {
                for j in 0..nx {
                    prop_assert!((k.at(l, i, j) - k.at(m, i, j).conj()).norm() <= 1e-12 * scale);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn x_translation_shifts(lam in 0.5..4.0f64, shift in -1.0..1.0f64, c in -0.5..0.5f64) {
        let x = GridSpec::cube(1, 3.0, 129).unwrap();
        let rep = heisenberg_rep(lam);
        let f = gaussian(&x, c);
        let (out, _) = rep.act(&GroupElement::new(vec![shift, 0.0, 0.0]), &x, &f, Interpolation::Cubic).unwrap();
        for i in 0..x.len() {
            let xi = x.coords(i)[0];
            if (xi + shift).abs() < 2.9 {
                let want = (-(xi + shift - c).powi(2) / 0.72).exp();
                prop_assert!((out[i] - Complex64::new(want, 0.0)).norm() < 1e-5, "xi {xi}");
            }
        }
    }

    #[test]
    fn y_translation_multiplies(lam in 0.5..4.0f64, y in -1.0..1.0f64, c in -0.5..0.5f64) {
        let x = GridSpec::cube(1, 3.0, 65).unwrap();
        let rep = heisenberg_rep(lam);
        let f = gaussian(&x, c);
        let (out, outside) = rep.act(&GroupElement::new(vec![0.0, y, 0.0]), &x, &f, Interpolation::Cubic).unwrap();
        prop_assert_eq!(outside, 0);
        for i in 0..x.len() {
            let want = Complex64::from_polar(1.0, lam * x.coords(i)[0] * y) * f[i];
            prop_assert!((out[i] - want).norm() < 1e-12);
        }
    }
}

#[test]
fn convolution_maps_to_operator_product() {
    let b = get_group("heisenberg").unwrap();
    let g = GridSpec::cube(3, 1.75, 29).unwrap();
    let bump = |c: [f64; 3]| -> SampledGroupFunction {
        FunctionFamily::Bump {
            center: c.to_vec(),
            radius: vec![0.5; 3],
        }
        .sample(&g)
        .unwrap()
    };
    let (p1, p2) = (bump([0.1, -0.1, 0.0]), bump([-0.1, 0.0, 0.1]));
    let conv = convolve(&b.algebra, &p1, &p2, Interpolation::Cubic).unwrap();
    let fam = heisenberg_family(Axis::from_range(3.0, 4.0, 2));
    let x = GridSpec::cube(1, 4.0, 65).unwrap();
    let out = direct_operators(&[&p1, &p2, &conv], &fam, &x, &TransformOptions::default()).unwrap();
    for l in 0..fam.len() {
        let product = out.operators[0][l].then_after(&out.operators[1][l]);
        let err = hs_relative(&out.operators[2][l], &product);
        // the kernel decays in (x + x1) / 2 on a scale 1 / lambda, so the X box must cover it
        assert!(err < 2e-2, "lambda {:?}: {err:e}", fam.lambda(l));
        let swapped = out.operators[1][l].then_after(&out.operators[0][l]);
        assert!(hs_relative(&out.operators[2][l], &swapped) > 5.0 * err);
    }
}
