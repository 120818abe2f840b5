//! Compactly supported test functions on a group, analytic and sampled.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::interp::Interpolation;

/// `exp(1 - 1/(1 - u^2))` on `|u| < 1`, zero outside; equals 1 at 0.
#[inline]
pub fn bump(u: f64) -> f64 {
    let s = 1.0 - u * u;
    if s <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / s).exp()
    }
}

/// Smooth cutoff: 1 on `|u| <= 1/2`, 0 on `|u| >= 1`.
#[inline]
pub fn cutoff(u: f64) -> f64 {
    let a = u.abs();
    if a <= 0.5 {
        return 1.0;
    }
    if a >= 1.0 {
        return 0.0;
    }
    let t = 2.0 * a - 1.0;
    let f = |t: f64| if t <= 0.0 { 0.0 } else { (-1.0 / t).exp() };
    1.0 - f(t) / (f(t) + f(1.0 - t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum TermShape {
    /// product of `bump((x_i - c_i) / r_i)`
    Bump,
    /// `exp(-|x - c|^2 / (2 sigma^2))` times product of `cutoff((x_i - c_i) / r_i)`
    CutGaussian { sigma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub shape: TermShape,
    pub center: Vec<f64>,
    pub radius: Vec<f64>,
    pub amplitude: f64,
}

impl Term {
    pub fn eval(&self, p: &[f64]) -> f64 {
        let mut v = self.amplitude;
        match self.shape {
            TermShape::Bump => {
                for ((x, c), r) in p.iter().zip(&self.center).zip(&self.radius) {
                    v *= bump((x - c) / r);
                    if v == 0.0 {
                        return 0.0;
                    }
                }
            }
            TermShape::CutGaussian { sigma } => {
                let mut r2 = 0.0;
                for ((x, c), r) in p.iter().zip(&self.center).zip(&self.radius) {
                    v *= cutoff((x - c) / r);
                    if v == 0.0 {
                        return 0.0;
                    }
                    r2 += (x - c) * (x - c);
                }
                v *= (-r2 / (2.0 * sigma * sigma)).exp();
            }
        }
        v
    }

    pub fn support(&self) -> Vec<(f64, f64)> {
        self.center
            .iter()
            .zip(&self.radius)
            .map(|(c, r)| (c - r, c + r))
            .collect()
    }
}

/// Finite sum of terms; real valued.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AnalyticFunction {
    pub terms: Vec<Term>,
}

impl AnalyticFunction {
    pub fn eval(&self, p: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.eval(p)).sum()
    }

    /// Bounding box of the supports, `None` for the zero function.
    pub fn support(&self, n: usize) -> Option<Vec<(f64, f64)>> {
        let mut out: Option<Vec<(f64, f64)>> = None;
        for t in &self.terms {
            let s = t.support();
            out = Some(match out {
                None => s,
                Some(o) => o
                    .iter()
                    .zip(&s)
                    .map(|(a, b)| (a.0.min(b.0), a.1.max(b.1)))
                    .collect(),
            });
        }
        out.inspect(|o| debug_assert_eq!(o.len(), n))
    }
}

/// Built-in test-function families. Random members are drawn from a ChaCha
/// stream selected by `(seed, index)`, so members are independent of the
/// order they are generated in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FunctionFamily {
    Zero,
    Bump {
        center: Vec<f64>,
        radius: Vec<f64>,
    },
    Gaussian {
        center: Vec<f64>,
        sigma: f64,
        radius: Vec<f64>,
    },
    RandomBumps {
        seed: u64,
        #[serde(default)]
        index: u64,
        #[serde(default = "default_terms")]
        terms: usize,
        /// centers within `spread * half_width` of the grid center
        #[serde(default = "default_spread")]
        spread: f64,
        /// radii drawn from this range, as fractions of the half-width
        #[serde(default = "default_radius")]
        radius: (f64, f64),
    },
}

fn default_terms() -> usize {
    3
}

fn default_spread() -> f64 {
    0.15
}

fn default_radius() -> (f64, f64) {
    (0.4, 0.6)
}

impl FunctionFamily {
    pub fn random(seed: u64, index: u64) -> Self {
        FunctionFamily::RandomBumps {
            seed,
            index,
            terms: default_terms(),
            spread: default_spread(),
            radius: default_radius(),
        }
    }

    /// Same family with another random index (no-op for deterministic families).
    pub fn with_index(&self, i: u64) -> Self {
        match self {
            FunctionFamily::RandomBumps {
                seed,
                terms,
                spread,
                radius,
                ..
            } => FunctionFamily::RandomBumps {
                seed: *seed,
                index: i,
                terms: *terms,
                spread: *spread,
                radius: *radius,
            },
            other => other.clone(),
        }
    }

    pub fn analytic(&self, grid: &GridSpec) -> Result<AnalyticFunction> {
        let n = grid.ndim();
        let check = |v: &[f64], what: &str| -> Result<()> {
            if v.len() != n {
                return Err(Error::InvalidInput(format!(
                    "{what} has {} entries, grid has {n} axes",
                    v.len()
                )));
            }
            Ok(())
        };
        Ok(match self {
            FunctionFamily::Zero => AnalyticFunction::default(),
            FunctionFamily::Bump { center, radius } => {
                check(center, "center")?;
                check(radius, "radius")?;
                AnalyticFunction {
                    terms: vec![Term {
                        shape: TermShape::Bump,
                        center: center.clone(),
                        radius: radius.clone(),
                        amplitude: 1.0,
                    }],
                }
            }
            FunctionFamily::Gaussian {
                center,
                sigma,
                radius,
            } => {
                check(center, "center")?;
                check(radius, "radius")?;
                AnalyticFunction {
                    terms: vec![Term {
                        shape: TermShape::CutGaussian { sigma: *sigma },
                        center: center.clone(),
                        radius: radius.clone(),
                        amplitude: 1.0,
                    }],
                }
            }
            FunctionFamily::RandomBumps {
                seed,
                index,
                terms,
                spread,
                radius,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(*index);
                let mut out = Vec::with_capacity(*terms);
                for _ in 0..*terms {
                    let mut center = Vec::with_capacity(n);
                    let mut rad = Vec::with_capacity(n);
                    for a in &grid.axes {
                        center
                            .push(a.center + spread * a.half_width * rng.random_range(-1.0..=1.0));
                        rad.push(a.half_width * rng.random_range(radius.0..=radius.1));
                    }
                    let mag: f64 = rng.random_range(0.5..1.5);
                    let amplitude = if rng.random_bool(0.5) { mag } else { -mag };
                    out.push(Term {
                        shape: TermShape::Bump,
                        center,
                        radius: rad,
                        amplitude,
                    });
                }
                AnalyticFunction { terms: out }
            }
        })
    }

    pub fn sample(&self, grid: &GridSpec) -> Result<SampledGroupFunction> {
        SampledGroupFunction::from_analytic(&self.analytic(grid)?, grid)
    }
}

/// A function on `G` sampled on a box grid, vanishing outside `support`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGroupFunction {
    grid: GridSpec,
    values: Vec<Complex64>,
    /// `None` for the zero function
    support: Option<Vec<(f64, f64)>>,
}

impl SampledGroupFunction {
    /// Validates that the support lies inside the box minus its boundary layer
    /// and that the boundary layer vanishes.
    pub fn new(
        grid: GridSpec,
        values: Vec<Complex64>,
        support: Option<Vec<(f64, f64)>>,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if let Some(v) = values
            .iter()
            .find(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::InvalidInput(format!("non-finite sample {v}")));
        }
        if let Some(s) = &support {
            if s.len() != grid.ndim() {
                return Err(Error::DimensionMismatch {
                    expected: grid.ndim(),
                    found: s.len(),
                });
            }
            for (d, ((lo, hi), a)) in s.iter().zip(&grid.axes).enumerate() {
                let h = a.spacing();
                if *lo < a.lo() + h * (1.0 - 1e-9) || *hi > a.hi() - h * (1.0 - 1e-9) || lo > hi {
                    return Err(Error::InvalidInput(format!(
                        "support [{lo}, {hi}] on axis {d} does not lie strictly inside the grid box [{}, {}] minus one cell",
                        a.lo(),
                        a.hi()
                    )));
                }
            }
        }
        let max = values.iter().fold(0.0_f64, |m, v| m.max(v.norm()));
        let mut idx = vec![0; grid.ndim()];
        for (i, v) in values.iter().enumerate() {
            grid.unravel(i, &mut idx);
            if grid.on_boundary(&idx) && v.norm() > 1e-12 * max {
                return Err(Error::InvalidInput(format!(
                    "sample {v} on the boundary layer at {:?}; the function must vanish there",
                    grid.coords(i)
                )));
            }
        }
        let support = if max == 0.0 { None } else { support };
        Ok(Self {
            grid,
            values,
            support,
        })
    }

    pub fn from_analytic(f: &AnalyticFunction, grid: &GridSpec) -> Result<Self> {
        let values = (0..grid.len())
            .map(|i| Complex64::new(f.eval(&grid.coords(i)), 0.0))
            .collect();
        Self::new(grid.clone(), values, f.support(grid.ndim()))
    }

    /// Zero function on a grid.
    pub fn zero(grid: &GridSpec) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            support: None,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn support(&self) -> Option<&[(f64, f64)]> {
        self.support.as_deref()
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_none()
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.norm()))
    }

    /// `||phi||^2` by the trapezoid rule on the grid.
    pub fn l2_norm_sq(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.norm_sqr() > 0.0)
            .map(|(i, v)| v.norm_sqr() * self.grid.weight(i))
            .sum()
    }

    #[inline]
    pub fn in_support(&self, p: &[f64]) -> bool {
        match &self.support {
            None => false,
            Some(s) => p.iter().zip(s).all(|(x, (lo, hi))| *x >= *lo && *x <= *hi),
        }
    }

    /// Interpolated value, 0 outside the declared support.
    #[inline]
    pub fn eval(&self, p: &[f64], interp: Interpolation) -> Complex64 {
        if !self.in_support(p) {
            return Complex64::new(0.0, 0.0);
        }
        interp
            .eval(&self.grid, &self.values, p)
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Writes `coord_0,..,coord_{n-1},re,im`, one row per grid node.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.grid.ndim();
        let header: Vec<String> = (0..n)
            .map(|d| format!("g{d} [exp coord]"))
            .chain(["re".to_string(), "im".to_string()])
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for (i, v) in self.values.iter().enumerate() {
            let c = self.grid.coords(i);
            let mut row: Vec<String> = c.iter().map(|x| format!("{x:e}")).collect();
            row.push(format!("{:e}", v.re));
            row.push(format!("{:e}", v.im));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Reads the layout of `write_csv`. Rows must sit on nodes of `grid`;
    /// missing nodes are 0. The support is the node hull of the nonzero samples
    /// widened by one cell.
    pub fn read_csv<R: BufRead>(r: R, grid: &GridSpec) -> Result<Self> {
        let n = grid.ndim();
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        let mut hull: Option<Vec<(f64, f64)>> = None;
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty()
                || lineno == 0
                    && line
                        .chars()
                        .any(|c| c.is_alphabetic() && c != 'e' && c != 'E')
            {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidInput(format!("line {}: {e}", lineno + 1)))?;
            if fields.len() != n + 2 {
                return Err(Error::InvalidInput(format!(
                    "line {}: expected {} columns, found {}",
                    lineno + 1,
                    n + 2,
                    fields.len()
                )));
            }
            let p = &fields[..n];
            let idx = grid.locate(p).ok_or_else(|| Error::OffGrid(p.to_vec()))?;
            let v = Complex64::new(fields[n], fields[n + 1]);
            values[idx] = v;
            if v.norm() > 0.0 {
                hull = Some(match hull {
                    None => p.iter().map(|&x| (x, x)).collect(),
                    Some(h) => h
                        .iter()
                        .zip(p)
                        .map(|((lo, hi), &x)| (lo.min(x), hi.max(x)))
                        .collect(),
                });
            }
        }
        let support = hull.map(|h| {
            h.iter()
                .zip(&grid.axes)
                .map(|((lo, hi), a)| {
                    let s = a.spacing();
                    ((lo - s).max(a.lo() + s), (hi + s).min(a.hi() - s))
                })
                .collect()
        });
        Self::new(grid.clone(), values, support)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_and_cutoff_shapes() {
        assert_eq!(bump(0.0), 1.0);
        assert_eq!(bump(1.0), 0.0);
        assert!(bump(0.5) > 0.0 && bump(0.5) < 1.0);
        assert_eq!(cutoff(0.3), 1.0);
        assert_eq!(cutoff(1.2), 0.0);
        assert!((cutoff(0.75) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn random_members_are_reproducible() {
        let grid = GridSpec::cube(3, 2.0, 9).unwrap();
        let a = FunctionFamily::random(7, 3).analytic(&grid).unwrap();
        let b = FunctionFamily::random(7, 3).analytic(&grid).unwrap();
        let c = FunctionFamily::random(7, 4).analytic(&grid).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let s = a.support(3).unwrap();
        assert!(s.iter().all(|(lo, hi)| *lo >= -1.5 && *hi <= 1.5));
    }

    #[test]
    fn support_must_fit() {
        let grid = GridSpec::cube(1, 1.0, 9).unwrap();
        let f = FunctionFamily::Bump {
            center: vec![0.0],
            radius: vec![1.0],
        };
        assert!(f.sample(&grid).is_err());
        let ok = FunctionFamily::Bump {
            center: vec![0.0],
            radius: vec![0.5],
        };
        assert!(ok.sample(&grid).is_ok());
    }

    #[test]
    fn csv_round_trip() {
        let grid = GridSpec::cube(2, 2.0, 9).unwrap();
        let f = FunctionFamily::random(1, 0).sample(&grid).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let g = SampledGroupFunction::read_csv(&buf[..], &grid).unwrap();
        assert_eq!(f.values(), g.values());
        assert!(!g.is_zero());
    }

    #[test]
    fn zero_function() {
        let grid = GridSpec::cube(2, 2.0, 9).unwrap();
        let z = FunctionFamily::Zero.sample(&grid).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.l2_norm_sq(), 0.0);
    }
}
