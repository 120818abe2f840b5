//! Small dense linear-algebra helpers over coordinate vectors.

use nalgebra::DMatrix;

/// Relative singular-value threshold used for ranks and radicals.
pub const RANK_REL_TOL: f64 = 1e-8;

/// Reduced row-echelon basis of `span(vectors)`.
///
/// Pivot columns are searched from the highest coordinate index down, so a
/// subspace spanned by basis vectors comes back as exactly those basis
/// vectors. Rows are returned in the order their pivots were found
/// (descending pivot index) together with the pivot columns.
pub fn echelon_basis(vectors: &[Vec<f64>], n: usize, tol: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rows: Vec<Vec<f64>> = vectors.to_vec();
    let scale = rows
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return (Vec::new(), Vec::new());
    }
    let thresh = tol * scale;
    let mut pivots = Vec::new();
    let mut next = 0;
    for col in (0..n).rev() {
        if next == rows.len() {
            break;
        }
        let (best, best_val) = (next..rows.len())
            .map(|r| (r, rows[r][col].abs()))
            .fold((next, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best_val <= thresh {
            continue;
        }
        rows.swap(next, best);
        let p = rows[next][col];
        for v in rows[next].iter_mut() {
            *v /= p;
        }
        let pivot_row = rows[next].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == next {
                continue;
            }
            let f = row[col];
            if f != 0.0 {
                for (x, pv) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * pv;
                }
            }
        }
        pivots.push(col);
        next += 1;
    }
    rows.truncate(next);
    for row in rows.iter_mut() {
        for v in row.iter_mut() {
            if v.abs() <= thresh {
                *v = 0.0;
            }
        }
    }
    (rows, pivots)
}

/// Orthonormal basis (modified Gram-Schmidt, two passes) of `span(vectors)`.
pub fn orthonormal_basis(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        let norm0 = norm(&w);
        if norm0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &out {
                let d = dot(q, &w);
                for (x, qv) in w.iter_mut().zip(q) {
                    *x -= d * qv;
                }
            }
        }
        let nw = norm(&w);
        if nw > tol * norm0 {
            out.push(w.iter().map(|x| x / nw).collect());
        }
    }
    out
}

/// Euclidean distance from `v` to the span of an orthonormal set.
pub fn span_residual(v: &[f64], ortho: &[Vec<f64>]) -> f64 {
    let mut w = v.to_vec();
    for q in ortho {
        let d = dot(q, &w);
        for (x, qv) in w.iter_mut().zip(q) {
            *x -= d * qv;
        }
    }
    norm(&w)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Numerical rank with threshold `RANK_REL_TOL * sigma_max`.
pub fn rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let smax = sv.iter().copied().fold(0.0_f64, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_REL_TOL * smax).count()
}

/// Basis of the null space of a square matrix (columns of V with small singular values).
pub fn null_space(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let n = m.ncols();
    if n == 0 {
        return Vec::new();
    }
    let smax_abs = m.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if smax_abs == 0.0 {
        return (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
    }
    assert_eq!(m.nrows(), n, "null_space expects a square matrix");
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().copied().fold(0.0_f64, f64::max);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= RANK_REL_TOL * smax)
        .map(|(i, _)| v_t.row(i).iter().copied().collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echelon_recovers_coordinate_vectors() {
        let vs = vec![vec![0.0, 1.0, 1.0], vec![0.0, 1.0, -1.0]];
        let (b, piv) = echelon_basis(&vs, 3, 1e-12);
        assert_eq!(piv, vec![2, 1]);
        assert_eq!(b[0], vec![0.0, 0.0, 1.0]);
        assert_eq!(b[1], vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn echelon_of_zero_is_empty() {
        let (b, _) = echelon_basis(&[vec![0.0; 4]], 4, 1e-12);
        assert!(b.is_empty());
    }

    #[test]
    fn null_space_of_rank_one() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let ns = null_space(&m);
        assert_eq!(ns.len(), 1);
        assert!((ns[0][0] + ns[0][1]).abs() < 1e-12);
        assert_eq!(rank(&m), 1);
    }
}
