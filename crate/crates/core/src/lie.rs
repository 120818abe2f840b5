//! Nilpotent Lie algebras given by structure constants, and the group law in
//! exponential coordinates.
//!
//! A group element is stored by its logarithm, so `GroupElement` and
//! `AlgebraElement` share a representation; the group product is the
//! Baker-Campbell-Hausdorff polynomial, which terminates for nilpotent
//! algebras. Terms are carried through commutator depth 4, which is exact for
//! every algebra of step at most 4.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Ring;
use crate::linalg::{echelon_basis, orthonormal_basis, span_residual};
use crate::orbits::LinearFunctional;

/// Largest supported algebra dimension (stack buffers in the hot group-law path).
pub const MAX_DIM: usize = 12;

/// Largest nilpotency step the truncated BCH series is exact for.
pub const MAX_STEP: usize = 4;

const ECHELON_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraElement {
    pub coords: Vec<f64>,
}

impl AlgebraElement {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            coords: vec![0.0; n],
        }
    }

    pub fn basis(n: usize, i: usize) -> Self {
        let mut coords = vec![0.0; n];
        coords[i] = 1.0;
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.coords.iter().map(|c| c * s).collect())
    }
}

/// The point `exp(sum coords[i] e_i)`; the coordinates are its logarithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    pub exp_coords: Vec<f64>,
}

impl GroupElement {
    pub fn new(exp_coords: Vec<f64>) -> Self {
        Self { exp_coords }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            exp_coords: vec![0.0; n],
        }
    }

    pub fn exp(a: &AlgebraElement) -> Self {
        Self::new(a.coords.clone())
    }

    pub fn log(&self) -> AlgebraElement {
        AlgebraElement::new(self.exp_coords.clone())
    }

    pub fn dim(&self) -> usize {
        self.exp_coords.len()
    }
}

/// Lower central series together with the refined full flag of ideals.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerCentralSeries {
    /// Bases of g, [g,g], [g,[g,g]], ... ; the trailing `{0}` is an empty basis.
    pub terms: Vec<Vec<Vec<f64>>>,
    /// `flag[j]` is the vector added at level j+1, so `g_j = span(flag[..j])`.
    pub flag: Vec<Vec<f64>>,
    pub step: usize,
}

#[derive(Debug, Clone)]
pub struct StructureConstants {
    name: String,
    dim: usize,
    /// c[(i*n + j)*n + k] = coefficient of e_k in [e_i, e_j]
    c: Vec<f64>,
    /// nonzero entries of `c`
    terms: Vec<(usize, usize, usize, f64)>,
    series: LowerCentralSeries,
}

impl StructureConstants {
    /// Builds and validates an algebra from the dense coefficient array.
    pub fn from_dense(name: impl Into<String>, dim: usize, c: Vec<f64>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidAlgebra(format!(
                "dimension {dim} outside 1..={MAX_DIM}"
            )));
        }
        if c.len() != dim * dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim * dim,
                found: c.len(),
            });
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidAlgebra("non-finite coefficient".into()));
        }
        let scale = c.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    let r = c[(i * dim + j) * dim + k] + c[(j * dim + i) * dim + k];
                    if r.abs() > 1e-12 * scale {
                        return Err(Error::InvalidAlgebra(format!(
                            "antisymmetry violated at ({i},{j},{k}): residual {r:.3e}"
                        )));
                    }
                }
            }
        }
        let terms = c
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(idx, &v)| (idx / (dim * dim), (idx / dim) % dim, idx % dim, v))
            .collect();
        let mut sc = Self {
            name: name.into(),
            dim,
            c,
            terms,
            series: LowerCentralSeries {
                terms: Vec::new(),
                flag: Vec::new(),
                step: 0,
            },
        };
        let jac = sc.jacobi_residual();
        if jac > 1e-9 * scale * scale {
            return Err(Error::InvalidAlgebra(format!(
                "Jacobi identity violated (residual {jac:.3e})"
            )));
        }
        sc.series = compute_lower_central_series(&sc)?;
        if sc.series.step > MAX_STEP {
            return Err(Error::UnsupportedStep(sc.series.step));
        }
        Ok(sc)
    }

    /// Builds an algebra from upper-triangular brackets `[e_i, e_j] = sum coeffs[k] e_k`, i < j.
    pub fn from_brackets(
        name: impl Into<String>,
        dim: usize,
        brackets: &[(usize, usize, Vec<f64>)],
    ) -> Result<Self> {
        let mut c = vec![0.0; dim * dim * dim];
        for (i, j, coeffs) in brackets {
            let (i, j) = (*i, *j);
            if i >= dim || j >= dim {
                return Err(Error::InvalidAlgebra(format!(
                    "bracket index ({i},{j}) out of range for dim {dim}"
                )));
            }
            if i >= j {
                return Err(Error::InvalidAlgebra(format!(
                    "bracket ({i},{j}) is not upper-triangular"
                )));
            }
            if coeffs.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: coeffs.len(),
                });
            }
            for (k, &v) in coeffs.iter().enumerate() {
                c[(i * dim + j) * dim + k] = v;
                c[(j * dim + i) * dim + k] = -v;
            }
        }
        Self::from_dense(name, dim, c)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn step(&self) -> usize {
        self.series.step
    }

    pub fn coefficient(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.dim + j) * self.dim + k]
    }

    pub fn lower_central_series(&self) -> &LowerCentralSeries {
        &self.series
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: len,
            });
        }
        Ok(())
    }

    /// `out = [a, b]`; `out` is overwritten.
    #[inline]
    pub fn bracket_into<T: Ring>(&self, a: &[T], b: &[T], out: &mut [T]) {
        for o in out.iter_mut() {
            *o = T::zero();
        }
        for &(i, j, k, v) in &self.terms {
            out[k] = out[k] + a[i] * b[j] * T::from_f64(v);
        }
    }

    pub fn bracket(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_dim(a.dim())?;
        self.check_dim(b.dim())?;
        let mut out = vec![0.0; self.dim];
        self.bracket_into(&a.coords, &b.coords, &mut out);
        Ok(AlgebraElement::new(out))
    }

    /// `out = log(exp a * exp b)` through commutator depth 4.
    #[inline]
    pub fn bch_into<T: Ring>(&self, a: &[T], b: &[T], out: &mut [T]) {
        let n = self.dim;
        let step = self.series.step;
        for k in 0..n {
            out[k] = a[k] + b[k];
        }
        if step < 2 {
            return;
        }
        let mut ab = [T::zero(); MAX_DIM];
        self.bracket_into(a, b, &mut ab[..n]);
        let half = T::from_f64(0.5);
        for k in 0..n {
            out[k] = out[k] + half * ab[k];
        }
        if step < 3 {
            return;
        }
        let mut aab = [T::zero(); MAX_DIM];
        let mut bab = [T::zero(); MAX_DIM];
        self.bracket_into(a, &ab[..n], &mut aab[..n]);
        self.bracket_into(b, &ab[..n], &mut bab[..n]);
        let twelfth = T::from_f64(1.0 / 12.0);
        for k in 0..n {
            out[k] = out[k] + twelfth * (aab[k] - bab[k]);
        }
        if step < 4 {
            return;
        }
        let mut baab = [T::zero(); MAX_DIM];
        self.bracket_into(b, &aab[..n], &mut baab[..n]);
        let c24 = T::from_f64(1.0 / 24.0);
        for k in 0..n {
            out[k] = out[k] - c24 * baab[k];
        }
    }

    pub fn bch_product(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_dim(a.dim())?;
        self.check_dim(b.dim())?;
        let mut out = vec![0.0; self.dim];
        self.bch_into(&a.coords, &b.coords, &mut out);
        Ok(AlgebraElement::new(out))
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::identity(self.dim)
    }

    pub fn group_mul(&self, g1: &GroupElement, g2: &GroupElement) -> Result<GroupElement> {
        self.check_dim(g1.dim())?;
        self.check_dim(g2.dim())?;
        let mut out = vec![0.0; self.dim];
        self.bch_into(&g1.exp_coords, &g2.exp_coords, &mut out);
        Ok(GroupElement::new(out))
    }

    pub fn group_inv(&self, g: &GroupElement) -> Result<GroupElement> {
        self.check_dim(g.dim())?;
        Ok(GroupElement::new(g.exp_coords.iter().map(|v| -v).collect()))
    }

    /// Matrix of `ad_a`: column j holds `[a, e_j]`.
    pub fn ad_matrix(&self, a: &AlgebraElement) -> Result<DMatrix<f64>> {
        self.check_dim(a.dim())?;
        let n = self.dim;
        let mut m = DMatrix::zeros(n, n);
        for &(i, j, k, v) in &self.terms {
            m[(k, j)] += a.coords[i] * v;
        }
        Ok(m)
    }

    /// `Ad(g) = exp(ad_A)`, a finite sum since `ad_A` is nilpotent.
    pub fn adjoint(&self, g: &GroupElement) -> Result<DMatrix<f64>> {
        let ad = self.ad_matrix(&g.log())?;
        let n = self.dim;
        let mut out = DMatrix::identity(n, n);
        let mut term = DMatrix::identity(n, n);
        for k in 1..=self.series.step {
            term = &term * &ad / k as f64;
            out += &term;
        }
        Ok(out)
    }

    /// `Ad*(g) l = l o Ad(g^-1)`, a left action.
    pub fn coadjoint_action(
        &self,
        g: &GroupElement,
        l: &LinearFunctional,
    ) -> Result<LinearFunctional> {
        self.check_dim(l.dim())?;
        let ad_inv = self.adjoint(&self.group_inv(g)?)?;
        let cov = ad_inv.transpose() * nalgebra::DVector::from_column_slice(&l.covector);
        Ok(LinearFunctional::new(cov.iter().copied().collect()))
    }

    /// Largest coordinate of `[e_i,[e_j,e_k]] + [e_j,[e_k,e_i]] + [e_k,[e_i,e_j]]` over all triples.
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        let e = |i: usize| {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            v
        };
        let mut t1 = vec![0.0; n];
        let mut t2 = vec![0.0; n];
        let mut acc = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    acc.iter_mut().for_each(|v| *v = 0.0);
                    for (x, y, z) in [(i, j, k), (j, k, i), (k, i, j)] {
                        self.bracket_into(&e(y), &e(z), &mut t1);
                        self.bracket_into(&e(x), &t1, &mut t2);
                        for (a, b) in acc.iter_mut().zip(&t2) {
                            *a += b;
                        }
                    }
                    worst = acc.iter().fold(worst, |m, v| m.max(v.abs()));
                }
            }
        }
        worst
    }

    /// Checks that `flag` is a full flag of ideals, returning the first violation.
    pub fn check_ideal_flag(&self, flag: &[Vec<f64>]) -> Result<()> {
        let n = self.dim;
        if flag.len() != n || flag.iter().any(|f| f.len() != n) {
            return Err(Error::InvalidInput(format!(
                "flag must list {n} vectors of length {n}"
            )));
        }
        let mut out = vec![0.0; n];
        for j in 0..n {
            let ortho = orthonormal_basis(&flag[..=j], 1e-10);
            if ortho.len() != j + 1 {
                return Err(Error::InvalidInput(format!(
                    "flag vectors are linearly dependent at level {}",
                    j + 1
                )));
            }
            for i in 0..n {
                let ei = AlgebraElement::basis(n, i);
                self.bracket_into(&ei.coords, &flag[j], &mut out);
                let r = span_residual(&out, &ortho);
                if r > 1e-10 {
                    return Err(Error::FlagNotIdeal {
                        basis: i,
                        flag_index: j,
                        residual: r,
                    });
                }
            }
        }
        Ok(())
    }
}

fn compute_lower_central_series(sc: &StructureConstants) -> Result<LowerCentralSeries> {
    let n = sc.dim;
    let identity: Vec<Vec<f64>> = (0..n).map(|i| AlgebraElement::basis(n, i).coords).collect();
    // echelon order (highest pivot first) so the flag refinement prefers later basis vectors
    let (top, _) = echelon_basis(&identity, n, ECHELON_TOL);
    let mut terms = vec![top];
    let mut out = vec![0.0; n];
    loop {
        let last = terms.last().expect("series starts with g");
        if last.is_empty() {
            break;
        }
        let mut gens = Vec::new();
        for i in 0..n {
            let ei = AlgebraElement::basis(n, i).coords;
            for v in last {
                sc.bracket_into(&ei, v, &mut out);
                gens.push(out.clone());
            }
        }
        let (next, _) = echelon_basis(&gens, n, ECHELON_TOL);
        if next.len() >= last.len() {
            return Err(Error::NotNilpotent {
                stalled_at: last.len(),
            });
        }
        terms.push(next);
    }
    let step = terms.len() - 1;

    // Refine to a full flag: walk from the deepest nonzero term outwards and add
    // echelon vectors (highest pivot first) that are new.
    let mut flag: Vec<Vec<f64>> = Vec::with_capacity(n);
    for level in terms.iter().rev() {
        for v in level {
            let ortho = orthonormal_basis(&flag, 1e-10);
            if span_residual(v, &ortho) > 1e-9 {
                flag.push(v.clone());
            }
        }
    }
    debug_assert_eq!(flag.len(), n);
    Ok(LowerCentralSeries { terms, flag, step })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::presets;

    #[test]
    fn heisenberg_bracket_and_product() {
        let h = presets::heisenberg();
        let x = AlgebraElement::basis(3, 0);
        let y = AlgebraElement::basis(3, 1);
        assert_eq!(h.bracket(&x, &y).unwrap().coords, vec![0.0, 0.0, 1.0]);
        assert_eq!(h.bracket(&x, &x).unwrap().coords, vec![0.0; 3]);
        let p = h
            .group_mul(&GroupElement::exp(&x), &GroupElement::exp(&y))
            .unwrap();
        assert_eq!(p.exp_coords, vec![1.0, 1.0, 0.5]);
    }

    #[test]
    fn engel_nested_bracket() {
        let e = presets::engel();
        let x1 = AlgebraElement::basis(4, 0);
        let x2 = AlgebraElement::basis(4, 1);
        let inner = e.bracket(&x1, &x2).unwrap();
        assert_eq!(
            e.bracket(&x1, &inner).unwrap().coords,
            vec![0.0, 0.0, 0.0, 1.0]
        );
    }

    #[test]
    fn heisenberg_bch_closed_form() {
        let h = presets::heisenberg();
        let a = AlgebraElement::new(vec![0.3, -1.2, 0.7]);
        let b = AlgebraElement::new(vec![-0.5, 0.4, 1.1]);
        let z = h.bch_product(&a, &b).unwrap();
        let t = 0.7 + 1.1 + (0.3 * 0.4 - (-1.2) * (-0.5)) / 2.0;
        assert!((z.coords[0] + 0.2).abs() < 1e-15);
        assert!((z.coords[1] + 0.8).abs() < 1e-15);
        assert!((z.coords[2] - t).abs() < 1e-15);
    }

    #[test]
    fn abelian_bch_is_sum() {
        let a2 = presets::abelian(2);
        let z = a2
            .bch_product(
                &AlgebraElement::new(vec![1.0, 2.0]),
                &AlgebraElement::new(vec![3.0, -4.0]),
            )
            .unwrap();
        assert_eq!(z.coords, vec![4.0, -2.0]);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let h = presets::heisenberg();
        let err = h
            .bracket(&AlgebraElement::zero(2), &AlgebraElement::zero(3))
            .unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                expected: 3,
                found: 2
            }
        ));
    }

    #[test]
    fn lower_central_series_of_presets() {
        let a = presets::abelian(2);
        assert_eq!(a.step(), 1);
        assert_eq!(a.lower_central_series().terms.len(), 2);

        let h = presets::heisenberg();
        let s = h.lower_central_series();
        assert_eq!(s.step, 2);
        assert_eq!(s.terms[1], vec![vec![0.0, 0.0, 1.0]]);
        assert!(s.terms[2].is_empty());
        assert_eq!(
            s.flag,
            vec![
                vec![0.0, 0.0, 1.0],
                vec![0.0, 1.0, 0.0],
                vec![1.0, 0.0, 0.0]
            ]
        );

        let e = presets::engel();
        let s = e.lower_central_series();
        assert_eq!(s.step, 3);
        assert_eq!(s.terms[1].len(), 2);
        assert_eq!(s.terms[2], vec![vec![0.0, 0.0, 0.0, 1.0]]);
        assert_eq!(s.flag[1], vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(s.flag[2], vec![0.0, 1.0, 0.0, 0.0]);
        h.check_ideal_flag(&h.lower_central_series().flag).unwrap();
        e.check_ideal_flag(&s.flag).unwrap();
    }

    #[test]
    fn rejects_non_nilpotent() {
        // [e0, e1] = e1 is solvable but not nilpotent.
        let err =
            StructureConstants::from_brackets("ax+b", 2, &[(0, 1, vec![0.0, 1.0])]).unwrap_err();
        assert!(matches!(err, Error::NotNilpotent { .. }));
    }

    #[test]
    fn rejects_jacobi_violation() {
        // [e0, [e1, e2]] + [e1, [e2, e0]] + [e2, [e0, e1]] = -e0
        let err = StructureConstants::from_brackets(
            "bad",
            3,
            &[(0, 1, vec![0.0, 1.0, 0.0]), (1, 2, vec![1.0, 0.0, 0.0])],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidAlgebra(_)), "{err}");
    }

    #[test]
    fn coadjoint_heisenberg_center_invariant() {
        let h = presets::heisenberg();
        let l = LinearFunctional::new(vec![0.0, 0.0, 1.5]);
        let g = GroupElement::new(vec![0.4, -0.9, 2.0]);
        let m = h.coadjoint_action(&g, &l).unwrap();
        assert!((m.covector[2] - 1.5).abs() < 1e-15);
        // (lambda*y, -lambda*x) sweep the plane
        assert!((m.covector[0] - 1.5 * -0.9).abs() < 1e-14);
        assert!((m.covector[1] + 1.5 * 0.4).abs() < 1e-14);
        let e = h.coadjoint_action(&h.identity(), &l).unwrap();
        assert_eq!(e, l);
    }

    #[test]
    fn coadjoint_abelian_trivial() {
        let a = presets::abelian(2);
        let l = LinearFunctional::new(vec![0.3, -2.0]);
        let m = a
            .coadjoint_action(&GroupElement::new(vec![5.0, 1.0]), &l)
            .unwrap();
        assert_eq!(m, l);
    }
}
