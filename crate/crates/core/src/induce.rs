//! Induced representations in the `L^2(X)` picture.
//!
//! `X = H\G` is coordinatized by the ordered complement `W_1..W_r`; the
//! section is `s(x) = exp(x_1 W_1) ... exp(x_r W_r)` and every `g` factors
//! uniquely as `g = h s(x)`. The action is
//! `[pi(g) f](x) = A(g, x) f(x g)` with `h s(x g) = s(x) g`, `A = pi_0(h)`.
//! By the cocycle identity `A(g1 g2, x) = A(g1, x) A(g2, x g1)`,
//! `act(g1) act(g2) = act(g1 g2)`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::interp::Interpolation;
use crate::interval::Ring;
use crate::lie::{GroupElement, StructureConstants, MAX_DIM};
use crate::orbits::{vergne_polarization, DualChart, LinearFunctional, Polarization};

/// Tolerance for `h in H` in `character`.
pub const SUBGROUP_TOL: f64 = 1e-8;
/// Residual allowed in the back-substitution of `factorize`.
pub const FACTORIZE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct XPoint {
    pub coords: Vec<f64>,
}

impl XPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    pub h_part: GroupElement,
    pub x_part: XPoint,
}

#[derive(Debug, Clone)]
pub struct InducedRep {
    algebra: Arc<StructureConstants>,
    polarization: Polarization,
}

impl InducedRep {
    pub fn new(algebra: Arc<StructureConstants>, polarization: Polarization) -> Result<Self> {
        let n = algebra.dim();
        if polarization.dim() + polarization.codim() != n || polarization.l.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: polarization.dim() + polarization.codim(),
            });
        }
        Ok(Self {
            algebra,
            polarization,
        })
    }

    /// Builds the Vergne polarization for `l` along `flag` and induces from it.
    pub fn from_functional(
        algebra: Arc<StructureConstants>,
        l: &LinearFunctional,
        flag: &[Vec<f64>],
    ) -> Result<Self> {
        let p = vergne_polarization(&algebra, l, flag)?;
        Self::new(algebra, p)
    }

    pub fn algebra(&self) -> &StructureConstants {
        &self.algebra
    }

    pub fn algebra_arc(&self) -> &Arc<StructureConstants> {
        &self.algebra
    }

    pub fn polarization(&self) -> &Polarization {
        &self.polarization
    }

    pub fn l(&self) -> &LinearFunctional {
        &self.polarization.l
    }

    pub fn x_dim(&self) -> usize {
        self.polarization.codim()
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    fn check_g(&self, g: &GroupElement) -> Result<()> {
        if g.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: g.dim(),
            });
        }
        Ok(())
    }

    fn check_x(&self, x: &XPoint) -> Result<()> {
        if x.coords.len() != self.x_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.x_dim(),
                found: x.coords.len(),
            });
        }
        Ok(())
    }

    /// `pi_0(h) = exp(i <l, log h>)`.
    pub fn character(&self, h: &GroupElement) -> Result<Complex64> {
        self.check_g(h)?;
        let n = self.dim();
        let mut ad = [0.0; MAX_DIM];
        self.polarization
            .adapted_coords(&h.exp_coords, &mut ad[..n]);
        let off = ad[self.polarization.dim()..n]
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        if off > SUBGROUP_TOL * (1.0 + crate::linalg::max_abs(&h.exp_coords)) {
            return Err(Error::NotInSubgroup { residual: off });
        }
        Ok(Complex64::from_polar(1.0, self.l().pair(&h.exp_coords)))
    }

    /// `out = s(x)`; generic so that boxes of `x` can be enclosed with intervals.
    #[inline]
    pub fn section_into<T: Ring>(&self, x: &[T], out: &mut [T]) {
        let n = self.dim();
        for o in out.iter_mut() {
            *o = T::zero();
        }
        let mut factor = [T::zero(); MAX_DIM];
        let mut tmp = [T::zero(); MAX_DIM];
        for (&xj, w) in x.iter().zip(&self.polarization.complement_basis) {
            for k in 0..n {
                factor[k] = xj * T::from_f64(w.coords[k]);
            }
            self.algebra
                .bch_into(&out[..n], &factor[..n], &mut tmp[..n]);
            out[..n].copy_from_slice(&tmp[..n]);
        }
    }

    pub fn section(&self, x: &XPoint) -> Result<GroupElement> {
        self.check_x(x)?;
        let mut out = vec![0.0; self.dim()];
        self.section_into(&x.coords, &mut out);
        Ok(GroupElement::new(out))
    }

    /// Solves `g = h s(x)`: writes `h` (exponential coordinates) and `x`.
    /// Returns the residual of `h` off the subalgebra.
    ///
    /// The last complement coordinate is a homomorphism to `R` on the
    /// subgroup reached so far, so it is read off and peeled from the right.
    #[inline]
    pub fn factorize_into(&self, g: &[f64], h_out: &mut [f64], x_out: &mut [f64]) -> f64 {
        let n = self.dim();
        let m = self.polarization.dim();
        let r = self.x_dim();
        let mut cur = [0.0; MAX_DIM];
        let mut ad = [0.0; MAX_DIM];
        let mut factor = [0.0; MAX_DIM];
        let mut tmp = [0.0; MAX_DIM];
        cur[..n].copy_from_slice(g);
        for j in (0..r).rev() {
            let row = self.polarization.adapted_row(m + j);
            let xj: f64 = row.iter().zip(&cur[..n]).map(|(a, b)| a * b).sum();
            x_out[j] = xj;
            let w = &self.polarization.complement_basis[j].coords;
            for k in 0..n {
                factor[k] = -xj * w[k];
            }
            self.algebra
                .bch_into(&cur[..n], &factor[..n], &mut tmp[..n]);
            cur[..n].copy_from_slice(&tmp[..n]);
        }
        h_out[..n].copy_from_slice(&cur[..n]);
        self.polarization.adapted_coords(&cur[..n], &mut ad[..n]);
        ad[m..n].iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    pub fn factorize(&self, g: &GroupElement) -> Result<Factorization> {
        self.check_g(g)?;
        let mut h = vec![0.0; self.dim()];
        let mut x = vec![0.0; self.x_dim()];
        let res = self.factorize_into(&g.exp_coords, &mut h, &mut x);
        if res > FACTORIZE_TOL * (1.0 + crate::linalg::max_abs(&g.exp_coords)) {
            return Err(Error::NotCoexponential { residual: res });
        }
        Ok(Factorization {
            h_part: GroupElement::new(h),
            x_part: XPoint::new(x),
        })
    }

    /// Phase `<l, log h>` and `x g` for `s(x) g = h s(x g)`.
    #[inline]
    pub fn cocycle_phase_into(&self, g: &[f64], x: &[f64], xg: &mut [f64]) -> f64 {
        let n = self.dim();
        let mut s = [0.0; MAX_DIM];
        let mut sg = [0.0; MAX_DIM];
        let mut h = [0.0; MAX_DIM];
        self.section_into(x, &mut s[..n]);
        self.algebra.bch_into(&s[..n], g, &mut sg[..n]);
        self.factorize_into(&sg[..n], &mut h[..n], xg);
        self.l().pair(&h[..n])
    }

    /// `(A(g, x), x g)`.
    pub fn cocycle(&self, g: &GroupElement, x: &XPoint) -> Result<(Complex64, XPoint)> {
        self.check_g(g)?;
        self.check_x(x)?;
        let sx = self.section(x)?;
        let sg = self.algebra.group_mul(&sx, g)?;
        let f = self.factorize(&sg)?;
        Ok((self.character(&f.h_part)?, f.x_part))
    }

    /// `[pi(g) f](x) = A(g, x) f(x g)` on the grid, with `f` interpolated and
    /// zero outside the box. Returns the result and the number of
    /// out-of-box reads.
    pub fn act(
        &self,
        g: &GroupElement,
        x_grid: &GridSpec,
        f: &[Complex64],
        interp: Interpolation,
    ) -> Result<(Vec<Complex64>, usize)> {
        self.check_g(g)?;
        self.check_grid(x_grid, f.len())?;
        let mut out = vec![Complex64::new(0.0, 0.0); f.len()];
        let mut xg = vec![0.0; self.x_dim()];
        let mut outside = 0;
        for (i, o) in out.iter_mut().enumerate() {
            let x = x_grid.coords(i);
            let phase = self.cocycle_phase_into(&g.exp_coords, &x, &mut xg);
            match interp.eval(x_grid, f, &xg) {
                Some(v) => *o = Complex64::from_polar(1.0, phase) * v,
                None => outside += 1,
            }
        }
        Ok((out, outside))
    }

    /// Matrix of `act(g)` on the grid (`out = M f`), row-major `N x N`.
    pub fn act_matrix(
        &self,
        g: &GroupElement,
        x_grid: &GridSpec,
        interp: Interpolation,
    ) -> Result<nalgebra::DMatrix<Complex64>> {
        self.check_g(g)?;
        let len = x_grid.len();
        self.check_grid(x_grid, len)?;
        let mut m = nalgebra::DMatrix::from_element(len, len, Complex64::new(0.0, 0.0));
        let mut xg = vec![0.0; self.x_dim()];
        let mut unit = vec![Complex64::new(0.0, 0.0); len];
        for i in 0..len {
            let x = x_grid.coords(i);
            let phase = self.cocycle_phase_into(&g.exp_coords, &x, &mut xg);
            let a = Complex64::from_polar(1.0, phase);
            // row i = interpolation weights at x g
            for j in 0..len {
                unit[j] = Complex64::new(1.0, 0.0);
                if let Some(v) = interp.eval(x_grid, &unit, &xg) {
                    m[(i, j)] = a * v;
                }
                unit[j] = Complex64::new(0.0, 0.0);
            }
        }
        Ok(m)
    }

    fn check_grid(&self, x_grid: &GridSpec, len: usize) -> Result<()> {
        if x_grid.ndim() != self.x_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.x_dim(),
                found: x_grid.ndim(),
            });
        }
        if len != x_grid.len() {
            return Err(Error::DimensionMismatch {
                expected: x_grid.len(),
                found: len,
            });
        }
        Ok(())
    }
}

/// Induced representations over the points of a chart, sharing one `(h, W)` geometry.
#[derive(Debug, Clone)]
pub struct RepFamily {
    chart: DualChart,
    lambdas: Vec<Vec<f64>>,
    /// `None` at non-generic points
    reps: Vec<Option<InducedRep>>,
    densities: Vec<f64>,
    geometry: InducedRep,
    grid: Option<GridSpec>,
}

impl RepFamily {
    /// Builds a representation at each chart point. Non-generic points are
    /// masked; all generic points must share the polarization.
    pub fn new(
        algebra: Arc<StructureConstants>,
        flag: &[Vec<f64>],
        chart: &DualChart,
        lambdas: Vec<Vec<f64>>,
    ) -> Result<Self> {
        chart.validate(algebra.dim())?;
        let mut reps = Vec::with_capacity(lambdas.len());
        let mut densities = Vec::with_capacity(lambdas.len());
        let mut geometry: Option<InducedRep> = None;
        for (idx, lam) in lambdas.iter().enumerate() {
            let d = crate::orbits::plancherel_density(&algebra, chart, lam)?;
            if !d.generic {
                reps.push(None);
                densities.push(0.0);
                continue;
            }
            let rep = InducedRep::from_functional(algebra.clone(), &chart.embed(lam)?, flag)?;
            match &geometry {
                Some(g0) if !g0.polarization.same_geometry(&rep.polarization) => {
                    return Err(Error::PolarizationVaries { index: idx });
                }
                Some(_) => {}
                None => geometry = Some(rep.clone()),
            }
            reps.push(Some(rep));
            densities.push(d.value);
        }
        let geometry = match geometry {
            Some(g) => g,
            None => {
                // every point is masked; use a generic probe for the geometry
                let probe: Vec<f64> = (0..chart.k).map(|i| 0.7 + 0.3 * i as f64).collect();
                InducedRep::from_functional(algebra.clone(), &chart.embed(&probe)?, flag)?
            }
        };
        Ok(Self {
            chart: chart.clone(),
            lambdas,
            reps,
            densities,
            geometry,
            grid: None,
        })
    }

    /// Family over every node of a lambda grid (row-major).
    pub fn on_grid(
        algebra: Arc<StructureConstants>,
        flag: &[Vec<f64>],
        chart: &DualChart,
        grid: &GridSpec,
    ) -> Result<Self> {
        if grid.ndim() != chart.k {
            return Err(Error::DimensionMismatch {
                expected: chart.k,
                found: grid.ndim(),
            });
        }
        let mut fam = Self::new(algebra, flag, chart, grid.all_coords())?;
        fam.grid = Some(grid.clone());
        Ok(fam)
    }

    /// Family restricted to some of its points (no lambda grid attached).
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            chart: self.chart.clone(),
            lambdas: indices.iter().map(|&i| self.lambdas[i].clone()).collect(),
            reps: indices.iter().map(|&i| self.reps[i].clone()).collect(),
            densities: indices.iter().map(|&i| self.densities[i]).collect(),
            geometry: self.geometry.clone(),
            grid: None,
        }
    }

    /// The lambda grid when the family was built with `on_grid`.
    pub fn lambda_grid(&self) -> Option<&GridSpec> {
        self.grid.as_ref()
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn lambda(&self, i: usize) -> &[f64] {
        &self.lambdas[i]
    }

    pub fn rep(&self, i: usize) -> Option<&InducedRep> {
        self.reps[i].as_ref()
    }

    pub fn is_generic(&self, i: usize) -> bool {
        self.reps[i].is_some()
    }

    pub fn density(&self, i: usize) -> f64 {
        self.densities[i]
    }

    pub fn chart(&self) -> &DualChart {
        &self.chart
    }

    /// Representation carrying the common `(h, W)`; its `l` is one of the family's.
    pub fn geometry(&self) -> &InducedRep {
        &self.geometry
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::presets;
    use std::f64::consts::PI;

    fn heis(lam: f64) -> InducedRep {
        let sc = Arc::new(presets::heisenberg());
        let flag = sc.lower_central_series().flag.clone();
        InducedRep::from_functional(sc, &LinearFunctional::new(vec![0.0, 0.0, lam]), &flag).unwrap()
    }

    #[test]
    fn character_examples() {
        let r = heis(2.0);
        assert_eq!(
            r.character(&GroupElement::identity(3)).unwrap(),
            Complex64::new(1.0, 0.0)
        );
        let c = r
            .character(&GroupElement::new(vec![0.0, 0.7, PI / 2.0]))
            .unwrap();
        assert!((c - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        let c = r
            .character(&GroupElement::new(vec![0.0, -1.0, 0.3]))
            .unwrap();
        assert!((c - Complex64::from_polar(1.0, 0.6)).norm() < 1e-15);
        assert!(matches!(
            r.character(&GroupElement::new(vec![0.1, 0.0, 0.0])),
            Err(Error::NotInSubgroup { .. })
        ));
    }

    #[test]
    fn heisenberg_factorization() {
        let r = heis(1.0);
        let (x, y, t) = (0.8, -1.3, 0.4);
        let f = r.factorize(&GroupElement::new(vec![x, y, t])).unwrap();
        assert!((f.x_part.coords[0] - x).abs() < 1e-15);
        let h = &f.h_part.exp_coords;
        assert!(h[0].abs() < 1e-15);
        assert!((h[1] - y).abs() < 1e-15);
        assert!((h[2] - (t + x * y / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn section_examples() {
        let r = heis(1.0);
        assert_eq!(
            r.section(&XPoint::new(vec![0.0])).unwrap().exp_coords,
            vec![0.0; 3]
        );
        assert_eq!(
            r.section(&XPoint::new(vec![1.5])).unwrap().exp_coords,
            vec![1.5, 0.0, 0.0]
        );
        let f = r
            .factorize(&r.section(&XPoint::new(vec![-0.4])).unwrap())
            .unwrap();
        assert_eq!(f.h_part.exp_coords, vec![0.0; 3]);
        assert_eq!(f.x_part.coords, vec![-0.4]);
    }

    #[test]
    fn heisenberg_cocycle_examples() {
        let lam = 1.7;
        let r = heis(lam);
        let x = XPoint::new(vec![0.6]);
        let (a, xg) = r
            .cocycle(&GroupElement::new(vec![0.0, 0.0, 0.9]), &x)
            .unwrap();
        assert!((a - Complex64::from_polar(1.0, lam * 0.9)).norm() < 1e-14);
        assert_eq!(xg, x);
        let (a, xg) = r
            .cocycle(&GroupElement::new(vec![0.0, 1.1, 0.0]), &x)
            .unwrap();
        assert!((a - Complex64::from_polar(1.0, lam * 0.6 * 1.1)).norm() < 1e-14);
        assert!((xg.coords[0] - 0.6).abs() < 1e-15);
        let (a, xg) = r.cocycle(&GroupElement::identity(3), &x).unwrap();
        assert_eq!(a, Complex64::new(1.0, 0.0));
        assert_eq!(xg, x);
    }

    #[test]
    fn act_identity_and_shift() {
        let r = heis(1.0);
        let grid = GridSpec::cube(1, 3.0, 61).unwrap();
        let f: Vec<Complex64> = grid
            .all_coords()
            .iter()
            .map(|c| Complex64::new((-c[0] * c[0]).exp(), 0.0))
            .collect();
        let (same, out) = r
            .act(&GroupElement::identity(3), &grid, &f, Interpolation::Cubic)
            .unwrap();
        assert_eq!(out, 0);
        assert!(same.iter().zip(&f).all(|(a, b)| (a - b).norm() < 1e-15));
        // shift by exactly two cells
        let h = grid.axes[0].spacing();
        let (shifted, _) = r
            .act(
                &GroupElement::new(vec![2.0 * h, 0.0, 0.0]),
                &grid,
                &f,
                Interpolation::Cubic,
            )
            .unwrap();
        for i in 0..59 {
            assert!((shifted[i] - f[i + 2]).norm() < 1e-14);
        }
        assert_eq!(shifted[60], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn abelian_act_is_character() {
        let sc = Arc::new(presets::abelian(2));
        let flag = sc.lower_central_series().flag.clone();
        let l = LinearFunctional::new(vec![0.5, -1.5]);
        let r = InducedRep::from_functional(sc, &l, &flag).unwrap();
        assert_eq!(r.x_dim(), 0);
        let g = GroupElement::new(vec![0.3, 0.2]);
        let (v, _) = r
            .act(
                &g,
                &GridSpec::point(),
                &[Complex64::new(2.0, 0.0)],
                Interpolation::Cubic,
            )
            .unwrap();
        let expect = Complex64::from_polar(2.0, 0.15 - 0.3);
        assert!((v[0] - expect).norm() < 1e-15);
    }

    #[test]
    fn engel_round_trip() {
        let sc = Arc::new(presets::engel());
        let flag = sc.lower_central_series().flag.clone();
        let r = InducedRep::from_functional(
            sc.clone(),
            &LinearFunctional::new(vec![0.0, 0.4, 0.0, 1.2]),
            &flag,
        )
        .unwrap();
        let g = GroupElement::new(vec![0.7, -1.1, 0.5, 1.9]);
        let f = r.factorize(&g).unwrap();
        let back = sc
            .group_mul(&f.h_part, &r.section(&f.x_part).unwrap())
            .unwrap();
        for (a, b) in back.exp_coords.iter().zip(&g.exp_coords) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn family_masks_origin() {
        let sc = Arc::new(presets::heisenberg());
        let flag = sc.lower_central_series().flag.clone();
        let chart = DualChart::new(vec![vec![0.0, 0.0, 1.0]], None);
        let fam =
            RepFamily::new(sc, &flag, &chart, vec![vec![-1.0], vec![0.0], vec![2.0]]).unwrap();
        assert!(fam.is_generic(0) && !fam.is_generic(1) && fam.is_generic(2));
        assert_eq!(fam.density(2), 2.0);
    }
}
