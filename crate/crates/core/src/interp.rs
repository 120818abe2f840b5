//! Separable interpolation of sampled functions with zero extension.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::grid::{Axis, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// 4-point Lagrange (nodes i-1..i+2), error O(h^4) away from the box faces
    #[default]
    Cubic,
    Linear,
}

/// Worst-case factor of the cubic Lagrange remainder: `max |(t+1)t(t-1)(t-2)| / 4! = 0.5625 / 24`.
pub const CUBIC_ERROR_CONSTANT: f64 = 0.5625 / 24.0;

/// One-dimensional stencil: first node index (may be negative) and weights.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    pub start: isize,
    pub len: usize,
    pub weights: [f64; 4],
}

#[inline]
pub fn cubic_weights(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

/// Cubic stencil on cell `i`. In the first and last cell the missing node is
/// the mirror image of its neighbour across the boundary node (`f_-1 = f_1`),
/// which makes the integral of the interpolant equal the trapezoid rule.
fn cubic_stencil(i: usize, t: f64, points: usize) -> Stencil {
    let w = cubic_weights(t);
    let last = points as isize - 1;
    let start = (i as isize - 1).max(0);
    let mut weights = [0.0; 4];
    let mut end = start;
    for (k, wk) in w.iter().enumerate() {
        let mut node = i as isize - 1 + k as isize;
        if node < 0 {
            node = -node;
        } else if node > last {
            node = 2 * last - node;
        }
        weights[(node - start) as usize] += wk;
        end = end.max(node);
    }
    Stencil {
        start,
        len: (end - start + 1) as usize,
        weights,
    }
}

impl Interpolation {
    /// Stencil for coordinate `x` on `axis`, or `None` outside `[lo, hi]`.
    #[inline]
    pub fn stencil(&self, axis: &Axis, x: f64) -> Option<Stencil> {
        let h = axis.spacing();
        let u = (x - axis.lo()) / h;
        let last = (axis.points - 1) as f64;
        if !(u >= -1e-9 && u <= last + 1e-9) {
            return None;
        }
        let mut u = u.clamp(0.0, last);
        // on a node up to roundoff: one tap
        let r = u.round();
        if (u - r).abs() < 1e-9 {
            u = r;
            if matches!(self, Interpolation::Cubic) {
                let mut weights = [0.0; 4];
                weights[0] = 1.0;
                return Some(Stencil {
                    start: r as isize,
                    len: 1,
                    weights,
                });
            }
        }
        let i = (u.floor() as usize).min(axis.points - 2);
        let t = u - i as f64;
        Some(match self {
            Interpolation::Cubic => cubic_stencil(i, t, axis.points),
            Interpolation::Linear => Stencil {
                start: i as isize,
                len: 2,
                weights: [1.0 - t, t, 0.0, 0.0],
            },
        })
    }

    /// Interpolates `values` sampled on `grid` at `p`; `None` when `p` is outside the box.
    pub fn eval(&self, grid: &GridSpec, values: &[Complex64], p: &[f64]) -> Option<Complex64> {
        let nd = grid.ndim();
        if nd == 0 {
            return Some(values[0]);
        }
        let mut stencils = [Stencil {
            start: 0,
            len: 0,
            weights: [0.0; 4],
        }; crate::lie::MAX_DIM];
        for d in 0..nd {
            stencils[d] = self.stencil(&grid.axes[d], p[d])?;
        }
        Some(eval_stencils(grid, values, &stencils[..nd]))
    }
}

impl Interpolation {
    /// Flat node indices and weights of the interpolant at `p`, in the order
    /// `eval_stencils` sums them; `false` when `p` is outside the box.
    pub fn taps(&self, grid: &GridSpec, p: &[f64], out: &mut Vec<(usize, f64)>) -> bool {
        out.clear();
        let nd = grid.ndim();
        if nd == 0 {
            out.push((0, 1.0));
            return true;
        }
        let mut stencils = [Stencil {
            start: 0,
            len: 0,
            weights: [0.0; 4],
        }; crate::lie::MAX_DIM];
        for d in 0..nd {
            match self.stencil(&grid.axes[d], p[d]) {
                Some(s) => stencils[d] = s,
                None => return false,
            }
        }
        let mut strides = [0usize; crate::lie::MAX_DIM];
        let mut s = 1;
        for d in (0..nd).rev() {
            strides[d] = s;
            s *= grid.axes[d].points;
        }
        let mut counter = [0usize; crate::lie::MAX_DIM];
        loop {
            let mut w = 1.0;
            let mut flat = 0usize;
            let mut inside = true;
            for d in 0..nd {
                let st = &stencils[d];
                let node = st.start + counter[d] as isize;
                let wd = st.weights[counter[d]];
                if node < 0 || node as usize >= grid.axes[d].points || wd == 0.0 {
                    inside = false;
                    break;
                }
                w *= wd;
                flat += node as usize * strides[d];
            }
            if inside {
                out.push((flat, w));
            }
            let mut d = nd;
            loop {
                if d == 0 {
                    return true;
                }
                d -= 1;
                counter[d] += 1;
                if counter[d] < stencils[d].len {
                    break;
                }
                counter[d] = 0;
            }
        }
    }
}

/// Tensor-product sum over per-axis stencils; nodes outside the grid read as 0.
pub fn eval_stencils(grid: &GridSpec, values: &[Complex64], stencils: &[Stencil]) -> Complex64 {
    let nd = stencils.len();
    let mut strides = [0usize; crate::lie::MAX_DIM];
    let mut s = 1;
    for d in (0..nd).rev() {
        strides[d] = s;
        s *= grid.axes[d].points;
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut counter = [0usize; crate::lie::MAX_DIM];
    loop {
        let mut w = 1.0;
        let mut flat = 0usize;
        let mut inside = true;
        for d in 0..nd {
            let st = &stencils[d];
            let node = st.start + counter[d] as isize;
            let wd = st.weights[counter[d]];
            if node < 0 || node as usize >= grid.axes[d].points || wd == 0.0 {
                inside = false;
                break;
            }
            w *= wd;
            flat += node as usize * strides[d];
        }
        if inside {
            acc += values[flat] * w;
        }
        // odometer
        let mut d = nd;
        loop {
            if d == 0 {
                return acc;
            }
            d -= 1;
            counter[d] += 1;
            if counter[d] < stencils[d].len {
                break;
            }
            counter[d] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_reproduces_cubics() {
        let grid = GridSpec::new(vec![Axis::new(0.0, 2.0, 9)]).unwrap();
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x - 0.25 * x * x * x;
        let vals: Vec<Complex64> = grid
            .all_coords()
            .iter()
            .map(|c| Complex64::new(f(c[0]), 0.0))
            .collect();
        for &x in &[-0.9, -0.3, 0.1, 0.77, 1.2] {
            let v = Interpolation::Cubic.eval(&grid, &vals, &[x]).unwrap();
            assert!((v.re - f(x)).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn boundary_cells_integrate_like_trapezoid() {
        // integral of the interpolant of each unit vector, by fine midpoint sums
        let axis = Axis::new(0.0, 1.0, 7);
        let grid = GridSpec::new(vec![axis]).unwrap();
        let fine = 6000;
        for j in 0..7 {
            let mut vals = vec![Complex64::new(0.0, 0.0); 7];
            vals[j] = Complex64::new(1.0, 0.0);
            let dx = 2.0 / fine as f64;
            let s: f64 = (0..fine)
                .map(|k| {
                    Interpolation::Cubic
                        .eval(&grid, &vals, &[-1.0 + (k as f64 + 0.5) * dx])
                        .unwrap()
                        .re
                        * dx
                })
                .sum();
            assert!((s - axis.weight(j)).abs() < 1e-6, "node {j}: {s}");
        }
    }

    #[test]
    fn weights_partition_unity() {
        for &t in &[0.0, 0.2, 0.5, 0.99] {
            let s: f64 = cubic_weights(t).iter().sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn outside_box_is_none_and_nodes_exact() {
        let grid = GridSpec::new(vec![Axis::new(0.0, 1.0, 5), Axis::new(0.0, 1.0, 5)]).unwrap();
        let vals: Vec<Complex64> = (0..25).map(|i| Complex64::new(i as f64, 0.0)).collect();
        assert!(Interpolation::Cubic
            .eval(&grid, &vals, &[1.2, 0.0])
            .is_none());
        let v = Interpolation::Cubic
            .eval(&grid, &vals, &[0.5, -0.5])
            .unwrap();
        assert!((v.re - 16.0).abs() < 1e-12);
        let corner = Interpolation::Cubic
            .eval(&grid, &vals, &[1.0, 1.0])
            .unwrap();
        assert!((corner.re - 24.0).abs() < 1e-12);
    }
}
