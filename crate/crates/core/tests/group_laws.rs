use std::sync::Arc;

use nalgebra::DMatrix;
use proptest::prelude::*;

use nilpw_core::catalog::PRESETS;
use nilpw_core::orbits::{check_polarization, pfaffian, vergne_polarization};
use nilpw_core::{get_group, GroupBundle, GroupElement, InducedRep, XPoint};

fn bundles() -> Vec<GroupBundle> {
    PRESETS.iter().map(|p| get_group(p).unwrap()).collect()
}

fn coords(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5..1.5f64, n)
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter()
        .zip(b)
        .all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs()))
}

/// Chart point with every coordinate at least 0.2 from 0.
fn generic_lambda(b: &GroupBundle, raw: &[f64]) -> Vec<f64> {
    let k = b.dual_chart().unwrap().k;
    raw[..k]
        .iter()
        .map(|v| v.signum() * (0.2 + v.abs()))
        .collect()
}

fn rep(b: &GroupBundle, lam: &[f64]) -> InducedRep {
    let l = b.dual_chart().unwrap().embed(lam).unwrap();
    InducedRep::from_functional(Arc::clone(&b.algebra), &l, &b.flag).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_law_is_associative_with_inverses(a in coords(4), c in coords(4), d in coords(4)) {
        for b in bundles() {
            let n = b.dim();
            let sc = &b.algebra;
            let (a, c, d) = (GroupElement::new(a[..n].to_vec()), GroupElement::new(c[..n].to_vec()), GroupElement::new(d[..n].to_vec()));
            let left = sc.group_mul(&sc.group_mul(&a, &c).unwrap(), &d).unwrap();
            let right = sc.group_mul(&a, &sc.group_mul(&c, &d).unwrap()).unwrap();
            prop_assert!(close(&left.exp_coords, &right.exp_coords, 1e-10), "{}", b.name);
            let e = sc.group_mul(&a, &sc.group_inv(&a).unwrap()).unwrap();
            prop_assert!(e.exp_coords.iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn factorization_round_trips(g in coords(4), raw in coords(2)) {
        for b in bundles() {
            let n = b.dim();
            let r = rep(&b, &generic_lambda(&b, &raw));
            let g = GroupElement::new(g[..n].to_vec());
            let f = r.factorize(&g).unwrap();
            let back = b.algebra.group_mul(&f.h_part, &r.section(&f.x_part).unwrap()).unwrap();
            prop_assert!(close(&back.exp_coords, &g.exp_coords, 1e-10), "{}", b.name);
        }
    }

    #[test]
    fn cocycle_identity_holds(g1 in coords(4), g2 in coords(4), x in coords(2), raw in coords(2)) {
        for b in bundles() {
            let n = b.dim();
            let r = rep(&b, &generic_lambda(&b, &raw));
            let x = XPoint::new(x[..r.x_dim()].to_vec());
            let (g1, g2) = (GroupElement::new(g1[..n].to_vec()), GroupElement::new(g2[..n].to_vec()));
            let g12 = b.algebra.group_mul(&g1, &g2).unwrap();
            let (a12, x12) = r.cocycle(&g12, &x).unwrap();
            let (a1, x1) = r.cocycle(&g1, &x).unwrap();
            let (a2, x2) = r.cocycle(&g2, &x1).unwrap();
            prop_assert!((a12 - a1 * a2).norm() < 1e-8, "{}", b.name);
            prop_assert!(close(&x12.coords, &x2.coords, 1e-10));
        }
    }

    #[test]
    fn coadjoint_is_a_left_action(g1 in coords(4), g2 in coords(4), l in coords(4)) {
        for b in bundles() {
            let n = b.dim();
            let sc = &b.algebra;
            let l = nilpw_core::LinearFunctional::new(l[..n].to_vec());
            let (g1, g2) = (GroupElement::new(g1[..n].to_vec()), GroupElement::new(g2[..n].to_vec()));
            let twice = sc.coadjoint_action(&g1, &sc.coadjoint_action(&g2, &l).unwrap()).unwrap();
            let once = sc.coadjoint_action(&sc.group_mul(&g1, &g2).unwrap(), &l).unwrap();
            prop_assert!(close(&twice.covector, &once.covector, 1e-10), "{}", b.name);
        }
    }

    #[test]
    fn polarizations_are_maximal_subordinate_subalgebras(raw in coords(2)) {
        for b in bundles() {
            let lam = generic_lambda(&b, &raw);
            let l = b.dual_chart().unwrap().embed(&lam).unwrap();
            let p = vergne_polarization(&b.algebra, &l, &b.flag).unwrap();
            prop_assert!(check_polarization(&b.algebra, &p).unwrap().passes(1e-10), "{} {lam:?}", b.name);
        }
    }

    #[test]
    fn pfaffian_squares_to_determinant(half in 1usize..5, entries in prop::collection::vec(-1.0..1.0f64, 28)) {
        let n = 2 * half;
        let mut m = DMatrix::zeros(n, n);
        let mut it = entries.iter();
        for i in 0..n {
            for j in i + 1..n {
                let v = *it.next().unwrap();
                m[(i, j)] = v;
                m[(j, i)] = -v;
            }
        }
        let pf = pfaffian(&m).unwrap();
        let det = m.clone().determinant();
        prop_assert!((pf * pf - det).abs() <= 1e-10 * det.abs().max(1e-12));
    }
}

#[test]
fn jacobi_identity_holds_for_every_preset() {
    for b in bundles() {
        assert!(b.algebra.jacobi_residual() < 1e-12, "{}", b.name);
    }
}
