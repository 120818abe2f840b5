//! Co-adjoint orbit geometry: the skew form `B_l`, Pfaffians, Vergne
//! polarizations and the Plancherel density on a dual chart.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{AlgebraElement, StructureConstants};
use crate::linalg::{self, echelon_basis, null_space, orthonormal_basis, span_residual};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFunctional {
    pub covector: Vec<f64>,
}

impl LinearFunctional {
    pub fn new(covector: Vec<f64>) -> Self {
        Self { covector }
    }

    pub fn dim(&self) -> usize {
        self.covector.len()
    }

    /// `<l, A>`
    #[inline]
    pub fn pair(&self, a: &[f64]) -> f64 {
        linalg::dot(&self.covector, a)
    }
}

/// The skew form together with its numerical rank (the orbit dimension).
#[derive(Debug, Clone)]
pub struct SkewForm {
    pub matrix: DMatrix<f64>,
    pub rank: usize,
}

/// `B[i][j] = <l, [e_i, e_j]>`.
pub fn skew_form(sc: &StructureConstants, l: &LinearFunctional) -> Result<SkewForm> {
    let n = sc.dim();
    if l.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: l.dim(),
        });
    }
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = (0..n)
                .map(|k| l.covector[k] * sc.coefficient(i, j, k))
                .sum();
        }
    }
    let rank = linalg::rank(&b);
    Ok(SkewForm { matrix: b, rank })
}

fn skew_residual(b: &DMatrix<f64>) -> f64 {
    let mut r = 0.0_f64;
    for i in 0..b.nrows() {
        for j in 0..b.ncols() {
            r = r.max((b[(i, j)] + b[(j, i)]).abs());
        }
    }
    r
}

/// Pfaffian of a real skew-symmetric matrix.
///
/// Dimension up to 6 uses the recursive row expansion; larger matrices use
/// skew Gaussian elimination with pivoting. The result is cross-checked
/// against `det(B)`.
pub fn pfaffian(b: &DMatrix<f64>) -> Result<f64> {
    let n = b.nrows();
    if b.ncols() != n {
        return Err(Error::InvalidInput(format!(
            "pfaffian needs a square matrix, got {}x{}",
            n,
            b.ncols()
        )));
    }
    let scale = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let res = skew_residual(b);
    if res > 1e-12 * scale.max(1.0) {
        return Err(Error::NotSkew { residual: res });
    }
    if n % 2 == 1 {
        return Ok(0.0);
    }
    if n == 0 {
        return Ok(1.0);
    }
    let pf = if n <= 6 {
        let idx: Vec<usize> = (0..n).collect();
        pfaffian_expand(b, &idx)
    } else {
        pfaffian_elimination(b.clone())
    };
    let det = b.clone().determinant();
    let tol = 1e-8 * scale.powi(n as i32).max(f64::MIN_POSITIVE);
    if (pf * pf - det).abs() > tol.max(1e-8 * det.abs()) {
        return Err(Error::PfaffianMismatch {
            pf_sq: pf * pf,
            det,
        });
    }
    Ok(pf)
}

/// Expansion along the first remaining row: `Pf = sum_j (-1)^(j+1) a_{0j} Pf(A without 0,j)`.
fn pfaffian_expand(b: &DMatrix<f64>, idx: &[usize]) -> f64 {
    match idx.len() {
        0 => 1.0,
        2 => b[(idx[0], idx[1])],
        _ => {
            let first = idx[0];
            let mut sum = 0.0;
            let mut rest = Vec::with_capacity(idx.len() - 2);
            for (pos, &j) in idx.iter().enumerate().skip(1) {
                let a = b[(first, j)];
                if a == 0.0 {
                    continue;
                }
                rest.clear();
                rest.extend(idx.iter().skip(1).filter(|&&k| k != j));
                let sign = if pos % 2 == 1 { 1.0 } else { -1.0 };
                sum += sign * a * pfaffian_expand(b, &rest);
            }
            sum
        }
    }
}

/// Parlett-Reid style elimination (skew LTL^T with pivoting).
pub(crate) fn pfaffian_elimination(mut a: DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut pf = 1.0;
    let mut k = 0;
    while k + 1 < n {
        let (kp, _) = ((k + 1)..n)
            .map(|i| (i, a[(i, k)].abs()))
            .fold((k + 1, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            a.swap_columns(k + 1, kp);
            pf = -pf;
        }
        let piv = a[(k, k + 1)];
        if piv == 0.0 {
            return 0.0;
        }
        pf *= piv;
        if k + 2 < n {
            let tau: Vec<f64> = ((k + 2)..n).map(|i| a[(k, i)] / piv).collect();
            let col: Vec<f64> = ((k + 2)..n).map(|i| a[(i, k + 1)]).collect();
            for (ii, i) in ((k + 2)..n).enumerate() {
                for (jj, j) in ((k + 2)..n).enumerate() {
                    a[(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    pf
}

/// A polarizing subalgebra `h` for `l`, with an ordered coexponential complement.
#[derive(Debug, Clone)]
pub struct Polarization {
    pub basis: Vec<AlgebraElement>,
    pub complement_basis: Vec<AlgebraElement>,
    pub l: LinearFunctional,
    /// inverse of `[basis | complement]`, row-major n x n; maps exponential
    /// coordinates to (h-coordinates, complement coordinates)
    coords_inv: Vec<f64>,
}

impl Polarization {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn codim(&self) -> usize {
        self.complement_basis.len()
    }

    /// Coordinates of `v` in the basis `[h basis | complement]`.
    #[inline]
    pub fn adapted_coords(&self, v: &[f64], out: &mut [f64]) {
        let n = v.len();
        for (r, o) in out.iter_mut().enumerate().take(n) {
            let row = &self.coords_inv[r * n..(r + 1) * n];
            *o = linalg::dot(row, v);
        }
    }

    /// Rows of the adapted-coordinate map, for interval evaluation.
    pub fn adapted_row(&self, r: usize) -> &[f64] {
        let n = self.basis.len() + self.complement_basis.len();
        &self.coords_inv[r * n..(r + 1) * n]
    }

    /// `|det [basis | complement]|`, the Jacobian of `(a, x) -> exp(sum a_i b_i) s(x)`.
    pub fn volume_factor(&self) -> f64 {
        let n = self.basis.len() + self.complement_basis.len();
        let cols: Vec<f64> = self
            .basis
            .iter()
            .chain(&self.complement_basis)
            .flat_map(|v| v.coords.iter().copied())
            .collect();
        DMatrix::from_column_slice(n, n, &cols).determinant().abs()
    }

    /// Same subalgebra and complement as `other` (used to check a lambda family).
    pub fn same_geometry(&self, other: &Polarization) -> bool {
        let close = |a: &[AlgebraElement], b: &[AlgebraElement]| {
            a.len() == b.len()
                && a.iter().zip(b).all(|(x, y)| {
                    x.coords
                        .iter()
                        .zip(&y.coords)
                        .all(|(p, q)| (p - q).abs() < 1e-9)
                })
        };
        close(&self.basis, &other.basis) && close(&self.complement_basis, &other.complement_basis)
    }
}

/// Invariant residuals of a polarization.
#[derive(Debug, Clone, Copy)]
pub struct PolarizationCheck {
    pub subalgebra_residual: f64,
    pub subordinate_residual: f64,
    pub dimension_ok: bool,
}

impl PolarizationCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.subalgebra_residual < tol && self.subordinate_residual < tol && self.dimension_ok
    }
}

/// Checks the three polarization invariants: subalgebra, subordinate, maximal dimension.
pub fn check_polarization(sc: &StructureConstants, p: &Polarization) -> Result<PolarizationCheck> {
    let n = sc.dim();
    let ortho = orthonormal_basis(
        &p.basis.iter().map(|b| b.coords.clone()).collect::<Vec<_>>(),
        1e-10,
    );
    let mut sub = 0.0_f64;
    let mut ord = 0.0_f64;
    let mut br = vec![0.0; n];
    for a in &p.basis {
        for b in &p.basis {
            sc.bracket_into(&a.coords, &b.coords, &mut br);
            sub = sub.max(span_residual(&br, &ortho));
            ord = ord.max(p.l.pair(&br).abs());
        }
    }
    let form = skew_form(sc, &p.l)?;
    let dimension_ok = 2 * p.dim() + form.rank == 2 * n;
    Ok(PolarizationCheck {
        subalgebra_residual: sub,
        subordinate_residual: ord,
        dimension_ok,
    })
}

/// Vergne polarization `h = sum_j rad(B_l | g_j)` along a full flag of ideals.
///
/// The complement is made of the flag vectors `f_j` at which
/// `h + g_{j-1}` grows, in increasing `j`; with that ordering the factorization
/// `g = h s(x)` is solved by peeling the last factor first.
pub fn vergne_polarization(
    sc: &StructureConstants,
    l: &LinearFunctional,
    flag: &[Vec<f64>],
) -> Result<Polarization> {
    let n = sc.dim();
    sc.check_ideal_flag(flag)?;
    let form = skew_form(sc, l)?;
    let b = &form.matrix;

    let mut radical_vectors: Vec<Vec<f64>> = Vec::new();
    for j in 1..=n {
        let f = DMatrix::from_fn(n, j, |r, c| flag[c][r]);
        let restricted = f.transpose() * b * &f;
        for nv in null_space(&restricted) {
            let v = &f * nalgebra::DVector::from_vec(nv);
            radical_vectors.push(v.iter().copied().collect());
        }
    }
    let (h_basis, _) = echelon_basis(&radical_vectors, n, 1e-9);

    // complement: flag vectors that enlarge h + g_{j-1}
    let mut span_vecs = h_basis.clone();
    let mut complement = Vec::new();
    for fj in flag {
        let ortho = orthonormal_basis(&span_vecs, 1e-10);
        if span_residual(fj, &ortho) > 1e-9 {
            complement.push(fj.clone());
        }
        span_vecs.push(fj.clone());
    }
    if h_basis.len() + complement.len() != n {
        return Err(Error::Polarization(format!(
            "h (dim {}) and complement (dim {}) do not span g",
            h_basis.len(),
            complement.len()
        )));
    }

    let cols: Vec<f64> = h_basis
        .iter()
        .chain(&complement)
        .flat_map(|v| v.iter().copied())
        .collect();
    let m = DMatrix::from_column_slice(n, n, &cols);
    let inv = m
        .try_inverse()
        .ok_or_else(|| Error::Polarization("adapted basis is singular".into()))?;
    let coords_inv: Vec<f64> = (0..n)
        .flat_map(|r| (0..n).map(move |c| (r, c)))
        .map(|(r, c)| inv[(r, c)])
        .collect();

    let pol = Polarization {
        basis: h_basis.into_iter().map(AlgebraElement::new).collect(),
        complement_basis: complement.into_iter().map(AlgebraElement::new).collect(),
        l: l.clone(),
        coords_inv,
    };
    let check = check_polarization(sc, &pol)?;
    let scale = linalg::max_abs(&l.covector).max(1.0);
    if check.subalgebra_residual > 1e-10 * scale.max(1.0) {
        return Err(Error::Polarization(format!(
            "flag is not an ideal flag: h is not a subalgebra (residual {:.3e})",
            check.subalgebra_residual
        )));
    }
    if check.subordinate_residual > 1e-10 * scale {
        return Err(Error::Polarization(format!(
            "<l,[h,h]> residual {:.3e}",
            check.subordinate_residual
        )));
    }
    if !check.dimension_ok {
        return Err(Error::Polarization(format!(
            "dim h = {} but n - rank(B)/2 = {}",
            pol.dim(),
            n - form.rank / 2
        )));
    }
    Ok(pol)
}

/// Closed-form density recorded with a curated chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClosedFormDensity {
    /// `R = 1`
    Unit,
    /// `R = |lambda_i|`
    AbsCoordinate { index: usize },
}

impl ClosedFormDensity {
    pub fn eval(&self, lambda: &[f64]) -> f64 {
        match *self {
            ClosedFormDensity::Unit => 1.0,
            ClosedFormDensity::AbsCoordinate { index } => lambda[index].abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMode {
    Pfaffian,
}

/// Linear chart `lambda -> l(lambda) = sum_r lambda_r E_r` on the generic stratum of the dual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DualChart {
    pub k: usize,
    /// k rows of length n
    pub embed_matrix: Vec<Vec<f64>>,
    pub density_mode: DensityMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<ClosedFormDensity>,
}

impl DualChart {
    pub fn new(embed_matrix: Vec<Vec<f64>>, closed_form: Option<ClosedFormDensity>) -> Self {
        Self {
            k: embed_matrix.len(),
            embed_matrix,
            density_mode: DensityMode::Pfaffian,
            closed_form,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.embed_matrix.len() != self.k {
            return Err(Error::InvalidInput(format!(
                "chart declares k = {} but has {} embed rows",
                self.k,
                self.embed_matrix.len()
            )));
        }
        if let Some(row) = self.embed_matrix.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: row.len(),
            });
        }
        Ok(())
    }

    pub fn embed(&self, lambda: &[f64]) -> Result<LinearFunctional> {
        if lambda.len() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                found: lambda.len(),
            });
        }
        let n = self.embed_matrix.first().map_or(0, |r| r.len());
        let mut cov = vec![0.0; n];
        for (lr, row) in lambda.iter().zip(&self.embed_matrix) {
            for (c, e) in cov.iter_mut().zip(row) {
                *c += lr * e;
            }
        }
        Ok(LinearFunctional::new(cov))
    }
}

/// Density value with its genericity flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityValue {
    pub value: f64,
    pub generic: bool,
}

/// `R(lambda) = |Pf(B_l restricted to a coordinate complement of rad B_l)|`.
///
/// At points where the radical does not have dimension k the value is 0 and
/// `generic` is false.
pub fn plancherel_density(
    sc: &StructureConstants,
    chart: &DualChart,
    lambda: &[f64],
) -> Result<DensityValue> {
    let n = sc.dim();
    let l = chart.embed(lambda)?;
    let form = skew_form(sc, &l)?;
    let radical = null_space(&form.matrix);
    if radical.len() != chart.k {
        return Ok(DensityValue {
            value: 0.0,
            generic: false,
        });
    }
    // complement of the radical from coordinate vectors, in index order
    let mut span = radical.clone();
    let mut picked = Vec::new();
    for i in 0..n {
        let e = AlgebraElement::basis(n, i).coords;
        let ortho = orthonormal_basis(&span, 1e-10);
        if span_residual(&e, &ortho) > 1e-8 {
            picked.push(i);
            span.push(e);
        }
    }
    let sub = DMatrix::from_fn(picked.len(), picked.len(), |r, c| {
        form.matrix[(picked[r], picked[c])]
    });
    let pf = pfaffian(&sub)?;
    Ok(DensityValue {
        value: pf.abs(),
        generic: true,
    })
}

/// Largest orbit dimension over a few pseudo-random functionals.
pub fn max_orbit_dimension(sc: &StructureConstants) -> Result<usize> {
    let n = sc.dim();
    let mut best = 0;
    for s in 0..8u64 {
        let cov: Vec<f64> = (0..n)
            .map(|i| {
                let x = ((s * 7919 + i as u64 * 104729) % 1000) as f64 / 1000.0;
                0.3 + x
            })
            .collect();
        best = best.max(skew_form(sc, &LinearFunctional::new(cov))?.rank);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::presets;

    #[test]
    fn skew_form_examples() {
        let h = presets::heisenberg();
        let zero = skew_form(&h, &LinearFunctional::new(vec![0.0; 3])).unwrap();
        assert_eq!(zero.rank, 0);
        assert!(zero.matrix.iter().all(|&v| v == 0.0));

        let f = skew_form(&h, &LinearFunctional::new(vec![0.0, 0.0, 2.5])).unwrap();
        assert_eq!(f.matrix[(0, 1)], 2.5);
        assert_eq!(f.matrix[(1, 0)], -2.5);
        assert_eq!(f.rank, 2);
        for i in 0..3 {
            assert_eq!(f.matrix[(2, i)], 0.0);
            assert_eq!(f.matrix[(i, 2)], 0.0);
        }

        let a = presets::abelian(2);
        let f = skew_form(&a, &LinearFunctional::new(vec![1.0, -3.0])).unwrap();
        assert_eq!(f.rank, 0);
    }

    #[test]
    fn pfaffian_small_cases() {
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 1.7, -1.7, 0.0]);
        assert_eq!(pfaffian(&b).unwrap(), 1.7);
        let odd = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, -1.0, 0.0, 3.0, -2.0, -3.0, 0.0]);
        assert_eq!(pfaffian(&odd).unwrap(), 0.0);
        assert_eq!(pfaffian(&DMatrix::zeros(0, 0)).unwrap(), 1.0);
        // a01 a23 - a02 a13 + a03 a12
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 1.0, 2.0, 3.0, -1.0, 0.0, 4.0, 5.0, -2.0, -4.0, 0.0, 6.0, -3.0, -5.0, -6.0,
                0.0,
            ],
        );
        assert!((pfaffian(&m).unwrap() - (6.0 - 10.0 + 12.0)).abs() < 1e-12);
    }

    #[test]
    fn pfaffian_rejects_non_skew() {
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(pfaffian(&b), Err(Error::NotSkew { .. })));
    }

    #[test]
    fn elimination_matches_expansion() {
        let mut m = DMatrix::zeros(6, 6);
        let mut v = 0.37;
        for i in 0..6 {
            for j in (i + 1)..6 {
                v = (v * 3.7 + 0.11) % 2.0 - 1.0;
                m[(i, j)] = v;
                m[(j, i)] = -v;
            }
        }
        let idx: Vec<usize> = (0..6).collect();
        let a = pfaffian_expand(&m, &idx);
        let b = pfaffian_elimination(m.clone());
        assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn heisenberg_vergne() {
        let h = presets::heisenberg();
        let l = LinearFunctional::new(vec![0.0, 0.0, 1.3]);
        let p = vergne_polarization(&h, &l, &h.lower_central_series().flag).unwrap();
        assert_eq!(p.dim(), 2);
        let basis: Vec<_> = p.basis.iter().map(|b| b.coords.clone()).collect();
        assert_eq!(basis, vec![vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]]);
        assert_eq!(p.complement_basis[0].coords, vec![1.0, 0.0, 0.0]);
        assert_eq!(p.volume_factor(), 1.0);
    }

    #[test]
    fn abelian_vergne_is_everything() {
        let a = presets::abelian(2);
        let l = LinearFunctional::new(vec![0.4, 1.0]);
        let p = vergne_polarization(&a, &l, &a.lower_central_series().flag).unwrap();
        assert_eq!(p.dim(), 2);
        assert_eq!(p.codim(), 0);
    }

    #[test]
    fn engel_vergne() {
        let e = presets::engel();
        let l = LinearFunctional::new(vec![0.0, 0.8, 0.0, -1.9]);
        let p = vergne_polarization(&e, &l, &e.lower_central_series().flag).unwrap();
        assert_eq!(p.dim(), 3);
        let mut spanned: Vec<usize> = p
            .basis
            .iter()
            .map(|b| b.coords.iter().position(|&v| v != 0.0).unwrap())
            .collect();
        spanned.sort();
        assert_eq!(spanned, vec![1, 2, 3]);
        assert_eq!(p.complement_basis[0].coords, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn bad_flag_is_rejected() {
        let h = presets::heisenberg();
        let l = LinearFunctional::new(vec![0.0, 0.0, 1.0]);
        let flag = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let err = vergne_polarization(&h, &l, &flag).unwrap_err();
        assert!(
            matches!(
                err,
                Error::FlagNotIdeal {
                    basis: 1,
                    flag_index: 0,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn densities() {
        let h = presets::heisenberg();
        let chart = DualChart::new(vec![vec![0.0, 0.0, 1.0]], None);
        let d = plancherel_density(&h, &chart, &[-2.5]).unwrap();
        assert!(d.generic);
        assert!((d.value - 2.5).abs() < 1e-15);
        let d0 = plancherel_density(&h, &chart, &[0.0]).unwrap();
        assert!(!d0.generic);
        assert_eq!(d0.value, 0.0);

        let a = presets::abelian(1);
        let chart = DualChart::new(vec![vec![1.0]], None);
        assert_eq!(plancherel_density(&a, &chart, &[3.0]).unwrap().value, 1.0);

        let e = presets::engel();
        let chart = DualChart::new(
            vec![vec![0.0, 0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0, 0.0]],
            None,
        );
        let d = plancherel_density(&e, &chart, &[-0.7, 3.0]).unwrap();
        assert!((d.value - 0.7).abs() < 1e-15);
    }

    #[test]
    fn max_orbit_dims() {
        assert_eq!(max_orbit_dimension(&presets::heisenberg()).unwrap(), 2);
        assert_eq!(max_orbit_dimension(&presets::engel()).unwrap(), 2);
        assert_eq!(max_orbit_dimension(&presets::abelian(2)).unwrap(), 0);
    }
}
