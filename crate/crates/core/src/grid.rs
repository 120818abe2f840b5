//! Uniform tensor-product grids.
//!
//! Samples are stored row-major with the last axis fastest. A grid with no
//! axes is a single point of weight 1 (the homogeneous space of an abelian
//! group is a point).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub center: f64,
    pub half_width: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(center: f64, half_width: f64, points: usize) -> Self {
        Self {
            center,
            half_width,
            points,
        }
    }

    /// Axis with `points` nodes from `lo` to `hi` inclusive.
    pub fn from_range(lo: f64, hi: f64, points: usize) -> Self {
        Self::new(0.5 * (lo + hi), 0.5 * (hi - lo), points)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    pub fn lo(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.center + self.half_width
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.lo() + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.node(i)).collect()
    }

    /// Trapezoid weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        let h = self.spacing();
        if i == 0 || i + 1 == self.points {
            0.5 * h
        } else {
            h
        }
    }

    fn validate(&self, require_odd: bool) -> Result<()> {
        if !(self.half_width > 0.0) || !self.center.is_finite() || !self.half_width.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "axis needs a finite positive half-width (got {})",
                self.half_width
            )));
        }
        if self.points < 2 || (require_odd && (self.points < 3 || self.points.is_multiple_of(2))) {
            return Err(Error::InvalidGrid(format!(
                "axis has {} points; {}",
                self.points,
                if require_odd {
                    "an odd count >= 3 is required"
                } else {
                    "at least 2 are required"
                }
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axes: Vec<Axis>,
}

impl GridSpec {
    /// Grid over a group or homogeneous space: every axis odd with at least 3 points.
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        for a in &axes {
            a.validate(true)?;
        }
        Ok(Self { axes })
    }

    /// Grid over a chart of the dual; even counts are allowed so that a
    /// symmetric grid can straddle a non-generic origin.
    pub fn new_dual(axes: Vec<Axis>) -> Result<Self> {
        for a in &axes {
            a.validate(false)?;
        }
        Ok(Self { axes })
    }

    pub fn point() -> Self {
        Self { axes: Vec::new() }
    }

    pub fn cube(n: usize, half_width: f64, points: usize) -> Result<Self> {
        Self::new(vec![Axis::new(0.0, half_width, points); n])
    }

    pub fn ndim(&self) -> usize {
        self.axes.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.points).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Multi-index of a flat index.
    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for (d, a) in self.axes.iter().enumerate().rev() {
            out[d] = flat % a.points;
            flat /= a.points;
        }
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for (a, &i) in self.axes.iter().zip(idx) {
            flat = flat * a.points + i;
        }
        flat
    }

    pub fn coords(&self, flat: usize) -> Vec<f64> {
        let mut idx = vec![0; self.ndim()];
        self.unravel(flat, &mut idx);
        idx.iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.node(i))
            .collect()
    }

    pub fn all_coords(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.coords(i)).collect()
    }

    /// Product trapezoid weight at a flat index.
    pub fn weight(&self, flat: usize) -> f64 {
        let mut idx = vec![0; self.ndim()];
        self.unravel(flat, &mut idx);
        idx.iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.weight(i))
            .product()
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.weight(i)).collect()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(&self.axes)
            .all(|(&x, a)| x >= a.lo() - 1e-12 && x <= a.hi() + 1e-12)
    }

    /// Whether a multi-index touches the outermost layer of the grid.
    pub fn on_boundary(&self, idx: &[usize]) -> bool {
        idx.iter()
            .zip(&self.axes)
            .any(|(&i, a)| i == 0 || i + 1 == a.points)
    }

    /// Index of `p` if it coincides with a node (to 1e-9 of a cell).
    pub fn locate(&self, p: &[f64]) -> Option<usize> {
        if p.len() != self.ndim() {
            return None;
        }
        let mut idx = Vec::with_capacity(p.len());
        for (&x, a) in p.iter().zip(&self.axes) {
            let t = (x - a.lo()) / a.spacing();
            let r = t.round();
            if (t - r).abs() > 1e-9 || r < 0.0 || r as usize >= a.points {
                return None;
            }
            idx.push(r as usize);
        }
        Some(self.ravel(&idx))
    }

    /// Halve every spacing, keeping the box.
    pub fn refined(&self) -> Self {
        Self {
            axes: self
                .axes
                .iter()
                .map(|a| Axis::new(a.center, a.half_width, 2 * a.points - 1))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_basics() {
        let a = Axis::new(0.0, 2.0, 5);
        assert_eq!(a.spacing(), 1.0);
        assert_eq!(a.nodes(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(a.weight(0), 0.5);
        assert_eq!(a.weight(2), 1.0);
    }

    #[test]
    fn even_points_rejected_for_group_grids() {
        assert!(GridSpec::new(vec![Axis::new(0.0, 1.0, 4)]).is_err());
        assert!(GridSpec::new_dual(vec![Axis::new(0.0, 1.0, 4)]).is_ok());
        assert!(GridSpec::new(vec![Axis::new(0.0, 0.0, 5)]).is_err());
    }

    #[test]
    fn ravel_roundtrip_and_locate() {
        let g = GridSpec::new(vec![Axis::new(0.0, 1.0, 3), Axis::new(1.0, 2.0, 5)]).unwrap();
        let mut idx = [0; 2];
        for f in 0..g.len() {
            g.unravel(f, &mut idx);
            assert_eq!(g.ravel(&idx), f);
            assert_eq!(g.locate(&g.coords(f)), Some(f));
        }
        assert_eq!(g.locate(&[0.5, 1.0]), None);
    }

    #[test]
    fn point_grid() {
        let p = GridSpec::point();
        assert_eq!(p.len(), 1);
        assert_eq!(p.weight(0), 1.0);
        assert_eq!(p.coords(0), Vec::<f64>::new());
    }
}
