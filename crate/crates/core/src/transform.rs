//! Group Fourier transforms `phi^(pi) = int phi(g) pi(g) dg` as integral
//! operators on `L^2(X)`.
//!
//! Two routes are implemented. The direct route sums `phi(g) act(g)` over a
//! quadrature grid on `G`. The kernel route changes variables
//! `g = s(x1)^-1 h s(x)` and evaluates
//! `K(l, x1, x) = int_H phi(s(x1)^-1 h s(x)) exp(i <l, log h>) dh`, a classical
//! Fourier integral over `H`, so that `[phi^(pi) f](x1) = int K(l, x1, x) f(x) dx`.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chirpz::ChirpZ;
use crate::error::{Error, Result};
use crate::functions::SampledGroupFunction;
use crate::grid::{Axis, GridSpec};
use crate::induce::{InducedRep, RepFamily};
use crate::interp::Interpolation;
use crate::interval::{Interval, Ring};
use crate::lie::{StructureConstants, MAX_DIM};

type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);

/// Default relative vanishing threshold of `pw_scan`.
pub const DEFAULT_PW_EPSILON: f64 = 1e-8;
/// Tail-mass fraction above which `plancherel_check` warns.
pub const TAIL_WARNING: f64 = 0.01;
/// Width, in lambda cells, of the outer band whose mass stands in for the mass beyond the grid.
pub const TAIL_CELLS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMethod {
    /// pick per `(x1, x)` pair from an operation count
    #[default]
    Auto,
    /// direct sum over the nonzero slice samples
    Sparse,
    /// separable chirp-z transform over the full H-grid
    ChirpZ,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransformOptions {
    pub interpolation: Interpolation,
    /// refinement factor of the direct-route quadrature along the G axes that move `x g`
    pub refine: usize,
    pub kernel_method: KernelMethod,
}

impl Default for TransformOptions {
    fn default() -> Self {
        Self {
            interpolation: Interpolation::Cubic,
            refine: 4,
            kernel_method: KernelMethod::Auto,
        }
    }
}

/// Discretized operator: `(M f)_i = sum_j M_ij f_j`, quadrature weights of the
/// X-grid included in `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub lambda: Vec<f64>,
    pub x_grid: GridSpec,
    pub entries: DMatrix<C>,
}

impl OperatorMatrix {
    pub fn zeros(lambda: Vec<f64>, x_grid: &GridSpec) -> Self {
        let n = x_grid.len();
        Self {
            lambda,
            x_grid: x_grid.clone(),
            entries: DMatrix::from_element(n, n, ZERO),
        }
    }

    /// `||.||_HS^2` of the continuous operator: `sum |K_ij|^2 w_i w_j`.
    pub fn hs_norm_sq(&self) -> f64 {
        hs_sq(&self.entries, &self.x_grid.weights())
    }

    pub fn hs_norm(&self) -> f64 {
        self.hs_norm_sq().sqrt()
    }

    pub fn hs_distance(&self, other: &OperatorMatrix) -> f64 {
        hs_sq(&(&self.entries - &other.entries), &self.x_grid.weights()).sqrt()
    }

    /// `W^1/2 M W^-1/2`, the matrix in a basis orthonormal for the quadrature inner product.
    pub fn unitary_form(&self) -> DMatrix<C> {
        let w = self.x_grid.weights();
        DMatrix::from_fn(self.entries.nrows(), self.entries.ncols(), |i, j| {
            self.entries[(i, j)] * (w[i] / w[j]).sqrt()
        })
    }

    /// Operator product `self * other` (apply `other` first).
    pub fn then_after(&self, other: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix {
            lambda: self.lambda.clone(),
            x_grid: self.x_grid.clone(),
            entries: &self.entries * &other.entries,
        }
    }
}

fn hs_sq(m: &DMatrix<C>, w: &[f64]) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v != ZERO {
                s += v.norm_sqr() * w[i] / w[j];
            }
        }
    }
    s
}

/// `||a - b||_HS / ||a||_HS`.
pub fn hs_relative(a: &OperatorMatrix, b: &OperatorMatrix) -> f64 {
    a.hs_distance(b) / a.hs_norm()
}

/// `exp(i lambda . p)` for every point of a family, 0 at masked points.
#[derive(Debug, Clone)]
struct PhaseTable {
    k: usize,
    active: Vec<bool>,
    grid: Option<(Vec<f64>, Vec<f64>, Vec<usize>)>,
    list: Vec<Vec<f64>>,
}

impl PhaseTable {
    fn new(fam: &RepFamily) -> Self {
        let active = (0..fam.len()).map(|i| fam.is_generic(i)).collect();
        let grid = fam.lambda_grid().map(|g| {
            (
                g.axes.iter().map(|a| a.lo()).collect(),
                g.axes.iter().map(|a| a.spacing()).collect(),
                g.shape(),
            )
        });
        Self {
            k: fam.chart().k,
            active,
            grid,
            list: (0..fam.len()).map(|i| fam.lambda(i).to_vec()).collect(),
        }
    }

    fn len(&self) -> usize {
        self.active.len()
    }

    fn fill(&self, p: &[f64], out: &mut [C], buf: &mut Vec<C>) {
        match &self.grid {
            None => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = if self.active[i] {
                        let th: f64 = self.list[i].iter().zip(p).map(|(a, b)| a * b).sum();
                        C::from_polar(1.0, th)
                    } else {
                        ZERO
                    };
                }
            }
            Some((lo, step, shape)) => {
                buf.clear();
                for c in 0..self.k {
                    let dz = C::from_polar(1.0, p[c] * step[c]);
                    let mut z = ZERO;
                    for i in 0..shape[c] {
                        // re-anchor periodically to keep the recurrence drift at roundoff
                        z = if i % 16 == 0 {
                            C::from_polar(1.0, p[c] * (lo[c] + i as f64 * step[c]))
                        } else {
                            z * dz
                        };
                        buf.push(z);
                    }
                }
                if self.k == 1 {
                    for (i, o) in out.iter_mut().enumerate() {
                        *o = if self.active[i] { buf[i] } else { ZERO };
                    }
                    return;
                }
                let mut idx = [0usize; MAX_DIM];
                for (flat, o) in out.iter_mut().enumerate() {
                    let mut f = flat;
                    for c in (0..self.k).rev() {
                        idx[c] = f % shape[c];
                        f /= shape[c];
                    }
                    if !self.active[flat] {
                        *o = ZERO;
                        continue;
                    }
                    let mut v = C::new(1.0, 0.0);
                    let mut off = 0;
                    for c in 0..self.k {
                        v *= buf[off + idx[c]];
                        off += shape[c];
                    }
                    *o = v;
                }
            }
        }
    }
}

/// Interpolation entries `(flat index, weight)` of a point of `grid`; false outside the box.
fn stencil_entries(
    grid: &GridSpec,
    interp: Interpolation,
    p: &[f64],
    out: &mut Vec<(usize, f64)>,
) -> bool {
    out.clear();
    let nd = grid.ndim();
    if nd == 0 {
        out.push((0, 1.0));
        return true;
    }
    let mut st = [None; MAX_DIM];
    let mut edge = 1.0;
    for d in 0..nd {
        match interp.stencil(&grid.axes[d], p[d]) {
            Some(s) => st[d] = Some(s),
            None => return false,
        }
        // f jumps to 0 across the box face; a node sitting on the face takes the mean of both sides
        let a = &grid.axes[d];
        let tol = 1e-9 * a.spacing();
        if (p[d] - a.lo()).abs() <= tol || (p[d] - a.hi()).abs() <= tol {
            edge *= 0.5;
        }
    }
    let mut counter = [0usize; MAX_DIM];
    loop {
        let mut w = edge;
        let mut flat = 0usize;
        let mut ok = true;
        for d in 0..nd {
            let s = st[d].as_ref().expect("set above");
            let node = s.start + counter[d] as isize;
            let wd = s.weights[counter[d]];
            if node < 0 || node as usize >= grid.axes[d].points || wd == 0.0 {
                ok = false;
                break;
            }
            w *= wd;
            flat = flat * grid.axes[d].points + node as usize;
        }
        if ok {
            out.push((flat, w));
        }
        let mut d = nd;
        loop {
            if d == 0 {
                return true;
            }
            d -= 1;
            counter[d] += 1;
            if counter[d] < st[d].as_ref().expect("set above").len {
                break;
            }
            counter[d] = 0;
        }
    }
}

/// `p_c = <E_c, h>` for the chart rows `E`.
#[inline]
fn chart_coords(embed: &[Vec<f64>], h: &[f64], p: &mut [f64]) {
    for (pc, row) in p.iter_mut().zip(embed) {
        *pc = row.iter().zip(h).map(|(a, b)| a * b).sum();
    }
}

fn check_functions(
    phis: &[&SampledGroupFunction],
    fam: &RepFamily,
    x_grid: &GridSpec,
) -> Result<()> {
    let rep = fam.geometry();
    let first = phis
        .first()
        .ok_or_else(|| Error::InvalidInput("no test functions given".into()))?;
    if first.grid().ndim() != rep.dim() {
        return Err(Error::DimensionMismatch {
            expected: rep.dim(),
            found: first.grid().ndim(),
        });
    }
    if phis.iter().any(|p| p.grid() != first.grid()) {
        return Err(Error::InvalidInput(
            "test functions must share one G-grid".into(),
        ));
    }
    if x_grid.ndim() != rep.x_dim() {
        return Err(Error::DimensionMismatch {
            expected: rep.x_dim(),
            found: x_grid.ndim(),
        });
    }
    Ok(())
}

/// G axes along which `x g` moves, probed at a few points of the boxes.
pub fn x_sensitive_axes(rep: &InducedRep, g_grid: &GridSpec, x_grid: &GridSpec) -> Vec<bool> {
    let n = rep.dim();
    let r = rep.x_dim();
    let mut out = vec![false; n];
    if r == 0 {
        return out;
    }
    let mut xg0 = vec![0.0; r];
    let mut xg1 = vec![0.0; r];
    for (d, o) in out.iter_mut().enumerate() {
        for t in 0..4 {
            let frac = |i: usize| ((0.137 + 0.291 * t as f64 + 0.173 * i as f64) % 1.0) * 2.0 - 1.0;
            let x: Vec<f64> = x_grid
                .axes
                .iter()
                .enumerate()
                .map(|(i, a)| a.center + a.half_width * frac(i + 7))
                .collect();
            let mut g: Vec<f64> = g_grid
                .axes
                .iter()
                .enumerate()
                .map(|(i, a)| a.center + a.half_width * frac(i))
                .collect();
            rep.cocycle_phase_into(&g, &x, &mut xg0);
            g[d] += 0.37 * g_grid.axes[d].spacing();
            rep.cocycle_phase_into(&g, &x, &mut xg1);
            if xg0
                .iter()
                .zip(&xg1)
                .any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + a.abs()))
            {
                *o = true;
            }
        }
    }
    out
}

/// Direct-route operators for several functions at every point of a family.
#[derive(Debug, Clone)]
pub struct DirectOutput {
    /// `operators[b][i]` for function `b` and family point `i`
    pub operators: Vec<Vec<OperatorMatrix>>,
    /// reads of `f(x g)` that fell outside the X box (treated as 0)
    pub out_of_box: usize,
    pub quadrature_nodes: usize,
    pub quadrature_grid: GridSpec,
}

/// Row-wise evaluator of the direct route (rows are X-grid points).
pub struct DirectEngine<'a> {
    rep: &'a InducedRep,
    x_grid: GridSpec,
    embed: Vec<Vec<f64>>,
    table: PhaseTable,
    interp: Interpolation,
    nfun: usize,
    /// quadrature nodes with a nonzero value, `n` coordinates each
    nodes: Vec<f64>,
    /// weighted function values, `nfun` per node
    vals: Vec<C>,
    lambdas: Vec<Vec<f64>>,
    pub quadrature_grid: GridSpec,
}

impl<'a> DirectEngine<'a> {
    pub fn new(
        phis: &[&SampledGroupFunction],
        fam: &'a RepFamily,
        x_grid: &GridSpec,
        opts: &TransformOptions,
    ) -> Result<Self> {
        check_functions(phis, fam, x_grid)?;
        if opts.refine == 0 {
            return Err(Error::InvalidInput("refine must be at least 1".into()));
        }
        let rep = fam.geometry();
        let g_grid = phis[0].grid();
        let n = rep.dim();
        let sens = x_sensitive_axes(rep, g_grid, x_grid);
        let q = GridSpec {
            axes: g_grid
                .axes
                .iter()
                .zip(&sens)
                .map(|(a, &s)| {
                    if s {
                        Axis::new(a.center, a.half_width, (a.points - 1) * opts.refine + 1)
                    } else {
                        *a
                    }
                })
                .collect(),
        };
        let mut nodes = Vec::new();
        let mut vals = Vec::new();
        let mut idx = vec![0usize; n];
        let mut p = vec![0.0; n];
        let mut v = vec![ZERO; phis.len()];
        for flat in 0..q.len() {
            q.unravel(flat, &mut idx);
            for d in 0..n {
                p[d] = q.axes[d].node(idx[d]);
            }
            if !phis.iter().any(|f| f.in_support(&p)) {
                continue;
            }
            let w: f64 = (0..n).map(|d| q.axes[d].weight(idx[d])).product();
            let mut any = false;
            for (vb, f) in v.iter_mut().zip(phis) {
                *vb = f.eval(&p, opts.interpolation) * w;
                any |= *vb != ZERO;
            }
            if any {
                nodes.extend_from_slice(&p);
                vals.extend_from_slice(&v);
            }
        }
        Ok(Self {
            rep,
            x_grid: x_grid.clone(),
            embed: fam.chart().embed_matrix.clone(),
            table: PhaseTable::new(fam),
            interp: opts.interpolation,
            nfun: phis.len(),
            nodes,
            vals,
            lambdas: (0..fam.len()).map(|i| fam.lambda(i).to_vec()).collect(),
            quadrature_grid: q,
        })
    }

    pub fn rows(&self) -> usize {
        self.x_grid.len()
    }

    pub fn node_count(&self) -> usize {
        self.vals.len() / self.nfun.max(1)
    }

    /// Row `i` of every operator, laid out `[function][lambda][column]`, and
    /// the number of out-of-box reads.
    pub fn row(&self, i: usize) -> (Vec<C>, usize) {
        let n = self.rep.dim();
        let r = self.rep.x_dim();
        let k = self.embed.len();
        let nl = self.table.len();
        let nx = self.x_grid.len();
        let mut row = vec![ZERO; self.nfun * nl * nx];
        let x = self.x_grid.coords(i);
        let mut s = [0.0; MAX_DIM];
        self.rep.section_into(&x, &mut s[..n]);
        let mut sg = [0.0; MAX_DIM];
        let mut h = [0.0; MAX_DIM];
        let mut xg = [0.0; MAX_DIM];
        let mut pc = [0.0; MAX_DIM];
        let mut z = vec![ZERO; nl];
        let mut buf = Vec::new();
        let mut entries = Vec::with_capacity(16);
        let mut outside = 0;
        for (node, vals) in self
            .nodes
            .chunks_exact(n)
            .zip(self.vals.chunks_exact(self.nfun))
        {
            self.rep.algebra().bch_into(&s[..n], node, &mut sg[..n]);
            self.rep.factorize_into(&sg[..n], &mut h[..n], &mut xg[..r]);
            if !stencil_entries(&self.x_grid, self.interp, &xg[..r], &mut entries) {
                outside += 1;
                continue;
            }
            chart_coords(&self.embed, &h[..n], &mut pc[..k]);
            self.table.fill(&pc[..k], &mut z, &mut buf);
            for (b, vb) in vals.iter().enumerate() {
                if *vb == ZERO {
                    continue;
                }
                for (l, zl) in z.iter().enumerate() {
                    if *zl == ZERO {
                        continue;
                    }
                    let c = vb * zl;
                    let base = (b * nl + l) * nx;
                    for &(j, w) in &entries {
                        row[base + j] += c * w;
                    }
                }
            }
        }
        (row, outside)
    }

    /// Assembles operators from rows computed in X-grid order.
    pub fn assemble(&self, rows: &[Vec<C>]) -> Vec<Vec<OperatorMatrix>> {
        let nl = self.table.len();
        let nx = self.x_grid.len();
        (0..self.nfun)
            .map(|b| {
                (0..nl)
                    .map(|l| {
                        let mut m = OperatorMatrix::zeros(self.lambdas[l].clone(), &self.x_grid);
                        for (i, row) in rows.iter().enumerate() {
                            let base = (b * nl + l) * nx;
                            for j in 0..nx {
                                m.entries[(i, j)] = row[base + j];
                            }
                        }
                        m
                    })
                    .collect()
            })
            .collect()
    }
}

/// `phi^(pi_lambda)` by quadrature of `phi(g) act(g)` for every family point and function.
///
/// Axes of `G` along which `x g` moves are refined by `opts.refine` so that
/// the piecewise-polynomial interpolation kernel of `f(x g)` is integrated
/// accurately; the other axes use the grid of `phi`.
pub fn direct_operators(
    phis: &[&SampledGroupFunction],
    fam: &RepFamily,
    x_grid: &GridSpec,
    opts: &TransformOptions,
) -> Result<DirectOutput> {
    let engine = DirectEngine::new(phis, fam, x_grid, opts)?;
    let rows: Vec<(Vec<C>, usize)> = (0..engine.rows())
        .into_par_iter()
        .map(|i| engine.row(i))
        .collect();
    let out_of_box = rows.iter().map(|r| r.1).sum();
    let rows: Vec<Vec<C>> = rows.into_iter().map(|r| r.0).collect();
    Ok(DirectOutput {
        operators: engine.assemble(&rows),
        out_of_box,
        quadrature_nodes: engine.node_count(),
        quadrature_grid: engine.quadrature_grid.clone(),
    })
}

/// Direct route for one function.
pub fn group_fourier_direct(
    phi: &SampledGroupFunction,
    fam: &RepFamily,
    x_grid: &GridSpec,
    opts: &TransformOptions,
) -> Result<Vec<OperatorMatrix>> {
    Ok(direct_operators(&[phi], fam, x_grid, opts)?
        .operators
        .remove(0))
}

/// Sampling statistics of the kernel slices.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    /// slice points where `phi` was evaluated
    pub evaluated: u64,
    /// of those, points inside the support of some function
    pub in_support: u64,
    /// H-grid boxes discarded by interval enclosure
    pub pruned_boxes: u64,
    pub pairs_chirpz: u64,
    pub pairs_sparse: u64,
}

impl Coverage {
    pub fn add(&mut self, o: &Coverage) {
        self.evaluated += o.evaluated;
        self.in_support += o.in_support;
        self.pruned_boxes += o.pruned_boxes;
        self.pairs_chirpz += o.pairs_chirpz;
        self.pairs_sparse += o.pairs_sparse;
    }
}

/// One `x1` row of the kernel for every function: `[function][lambda][x]`.
#[derive(Debug, Clone)]
pub struct KernelRow {
    pub values: Vec<C>,
    pub coverage: Coverage,
}

struct AxisTransform {
    lambda_axis: usize,
    plan: ChirpZ,
    shift: Vec<C>,
}

/// Row-wise evaluator of the kernel route.
pub struct KernelEngine<'a> {
    rep: &'a InducedRep,
    phis: Vec<&'a SampledGroupFunction>,
    x_grid: GridSpec,
    embed: Vec<Vec<f64>>,
    table: PhaseTable,
    interp: Interpolation,
    method: KernelMethod,
    /// polarization basis, `m` rows of length `n`
    basis: Vec<Vec<f64>>,
    /// `pmat[c][j] = <E_c, b_j>`
    pmat: Vec<Vec<f64>>,
    pub h_grid: GridSpec,
    support: Option<Vec<(f64, f64)>>,
    /// `volume_factor * prod h_j`
    cell: f64,
    separable: Option<Vec<Option<AxisTransform>>>,
    lambda_shape: Vec<usize>,
}

impl<'a> KernelEngine<'a> {
    pub fn new(
        phis: &[&'a SampledGroupFunction],
        fam: &'a RepFamily,
        x_grid: &GridSpec,
        opts: &TransformOptions,
    ) -> Result<Self> {
        check_functions(phis, fam, x_grid)?;
        let rep = fam.geometry();
        let pol = rep.polarization();
        let n = rep.dim();
        let m = pol.dim();
        let g_grid = phis[0].grid();
        let basis: Vec<Vec<f64>> = pol.basis.iter().map(|b| b.coords.clone()).collect();
        let spacing: Vec<f64> = basis
            .iter()
            .map(|b| {
                let piv = (0..n)
                    .max_by(|&i, &j| b[i].abs().total_cmp(&b[j].abs()))
                    .expect("nonempty basis vector");
                g_grid.axes[piv].spacing()
            })
            .collect();
        let embed = fam.chart().embed_matrix.clone();
        let pmat: Vec<Vec<f64>> = embed
            .iter()
            .map(|e| {
                basis
                    .iter()
                    .map(|b| e.iter().zip(b).map(|(p, q)| p * q).sum())
                    .collect()
            })
            .collect();

        // union of supports
        let mut support: Option<Vec<(f64, f64)>> = None;
        for f in phis {
            if let Some(s) = f.support() {
                support = Some(match support {
                    None => s.to_vec(),
                    Some(u) => u
                        .iter()
                        .zip(s)
                        .map(|(a, b)| (a.0.min(b.0), a.1.max(b.1)))
                        .collect(),
                });
            }
        }

        // H-grid: enclose s(x1) g s(x)^-1 over the X box and the support
        let h_axes: Vec<Axis> = match &support {
            None => spacing.iter().map(|&h| Axis::new(0.0, h, 3)).collect(),
            Some(sup) => {
                let xbox: Vec<Interval> = x_grid
                    .axes
                    .iter()
                    .map(|a| Interval::new(a.lo(), a.hi()))
                    .collect();
                let gbox: Vec<Interval> =
                    sup.iter().map(|&(lo, hi)| Interval::new(lo, hi)).collect();
                let mut s = [Interval::zero(); MAX_DIM];
                rep.section_into(&xbox, &mut s[..n]);
                let mut t = [Interval::zero(); MAX_DIM];
                let mut hbox = [Interval::zero(); MAX_DIM];
                rep.algebra().bch_into(&s[..n], &gbox, &mut t[..n]);
                let sinv: Vec<Interval> = s[..n].iter().map(|&v| -v).collect();
                rep.algebra().bch_into(&t[..n], &sinv, &mut hbox[..n]);
                (0..m)
                    .map(|j| {
                        let row = pol.adapted_row(j);
                        let a = row
                            .iter()
                            .zip(&hbox[..n])
                            .fold(Interval::zero(), |acc, (&c, &v)| {
                                acc + Interval::point(c) * v
                            });
                        let reach = a.lo.abs().max(a.hi.abs());
                        let cells = (reach / spacing[j] - 1e-9).ceil().max(0.0) as usize + 1;
                        Axis::new(0.0, cells as f64 * spacing[j], 2 * cells + 1)
                    })
                    .collect()
            }
        };
        let h_grid = GridSpec { axes: h_axes };

        // aliasing
        for i in 0..fam.len() {
            if !fam.is_generic(i) {
                continue;
            }
            let lam = fam.lambda(i);
            for j in 0..m {
                let w: f64 = (0..lam.len()).map(|c| lam[c] * pmat[c][j]).sum();
                let nyq = crate::chirpz::nyquist(h_grid.axes[j].spacing());
                if w.abs() >= nyq {
                    return Err(Error::Aliasing {
                        axis: j,
                        frequency: w,
                        nyquist: nyq,
                    });
                }
            }
        }

        let lambda_shape = fam.lambda_grid().map(|g| g.shape()).unwrap_or_default();
        let separable = fam
            .lambda_grid()
            .and_then(|lg| separable_plan(&pmat, &h_grid, lg));
        if opts.kernel_method == KernelMethod::ChirpZ && separable.is_none() {
            return Err(Error::InvalidInput(
                "chirp-z kernel method needs a lambda grid whose phases separate along H axes"
                    .into(),
            ));
        }
        let cell = pol.volume_factor() * h_grid.axes.iter().map(|a| a.spacing()).product::<f64>();
        Ok(Self {
            rep,
            phis: phis.to_vec(),
            x_grid: x_grid.clone(),
            embed,
            table: PhaseTable::new(fam),
            interp: opts.interpolation,
            method: opts.kernel_method,
            basis,
            pmat,
            h_grid,
            support,
            cell,
            separable,
            lambda_shape,
        })
    }

    pub fn rows(&self) -> usize {
        self.x_grid.len()
    }

    pub fn lambda_count(&self) -> usize {
        self.table.len()
    }

    pub fn function_count(&self) -> usize {
        self.phis.len()
    }

    pub fn x_grid(&self) -> &GridSpec {
        &self.x_grid
    }

    /// Kernel row `K(., x1_i, .)` for every function.
    pub fn row(&self, i: usize) -> KernelRow {
        let n = self.rep.dim();
        let nl = self.table.len();
        let nx = self.x_grid.len();
        let nf = self.phis.len();
        let mut values = vec![ZERO; nf * nl * nx];
        let mut cov = Coverage::default();
        let Some(support) = &self.support else {
            return KernelRow {
                values,
                coverage: cov,
            };
        };
        let x1 = self.x_grid.coords(i);
        let mut s1inv = [0.0; MAX_DIM];
        self.rep.section_into(&x1, &mut s1inv[..n]);
        for v in s1inv[..n].iter_mut() {
            *v = -*v;
        }
        let mut sx = [0.0; MAX_DIM];
        let mut pts: Vec<usize> = Vec::new();
        let mut pvals: Vec<C> = Vec::new();
        let mut acc = vec![ZERO; nf * nl];
        let mut scratch = Scratch::default();
        for j in 0..nx {
            let x = self.x_grid.coords(j);
            self.rep.section_into(&x, &mut sx[..n]);
            pts.clear();
            pvals.clear();
            self.collect(
                &s1inv[..n],
                &sx[..n],
                support,
                &mut pts,
                &mut pvals,
                &mut cov,
            );
            if pts.is_empty() {
                continue;
            }
            self.transform(&pts, &pvals, &mut acc, &mut cov, &mut scratch);
            for b in 0..nf {
                for l in 0..nl {
                    values[(b * nl + l) * nx + j] = acc[b * nl + l] * self.cell;
                }
            }
        }
        KernelRow {
            values,
            coverage: cov,
        }
    }

    #[inline]
    fn node_a(&self, flat: usize, a: &mut [f64]) {
        let mut f = flat;
        for (d, ax) in self.h_grid.axes.iter().enumerate().rev() {
            a[d] = ax.node(f % ax.points);
            f /= ax.points;
        }
    }

    /// Collects nonzero slice samples `phi(s1inv h(a) sx)` over the H-grid,
    /// discarding index boxes whose interval image misses the support.
    fn collect(
        &self,
        s1inv: &[f64],
        sx: &[f64],
        support: &[(f64, f64)],
        pts: &mut Vec<usize>,
        pvals: &mut Vec<C>,
        cov: &mut Coverage,
    ) {
        let n = self.rep.dim();
        let m = self.basis.len();
        let sc: &StructureConstants = self.rep.algebra();
        let shape = self.h_grid.shape();
        let s1i: Vec<Interval> = s1inv.iter().map(|&v| Interval::point(v)).collect();
        let sxi: Vec<Interval> = sx.iter().map(|&v| Interval::point(v)).collect();
        let mut stack: Vec<[(usize, usize); MAX_DIM]> = Vec::new();
        let mut root = [(0usize, 0usize); MAX_DIM];
        for d in 0..m {
            root[d] = (0, shape[d] - 1);
        }
        stack.push(root);
        let mut hv = [Interval::zero(); MAX_DIM];
        let mut t = [Interval::zero(); MAX_DIM];
        let mut g = [Interval::zero(); MAX_DIM];
        let mut a = [0.0; MAX_DIM];
        let mut hp = [0.0; MAX_DIM];
        let mut tp = [0.0; MAX_DIM];
        let mut gp = [0.0; MAX_DIM];
        let mut taps: Vec<(usize, f64)> = Vec::with_capacity(64);
        let nf = self.phis.len();
        while let Some(bx) = stack.pop() {
            // enclosure of the image of the box
            for v in hv[..n].iter_mut() {
                *v = Interval::zero();
            }
            for j in 0..m {
                let ax = &self.h_grid.axes[j];
                let aj = Interval::new(ax.node(bx[j].0), ax.node(bx[j].1));
                for (k, v) in hv[..n].iter_mut().enumerate() {
                    let c = self.basis[j][k];
                    if c != 0.0 {
                        *v = *v + aj * Interval::point(c);
                    }
                }
            }
            sc.bch_into(&s1i, &hv[..n], &mut t[..n]);
            sc.bch_into(&t[..n], &sxi, &mut g[..n]);
            let hit = g[..n]
                .iter()
                .zip(support)
                .all(|(iv, &(lo, hi))| iv.hi >= lo && iv.lo <= hi);
            if !hit {
                cov.pruned_boxes += 1;
                continue;
            }
            let count: usize = (0..m).map(|j| bx[j].1 - bx[j].0 + 1).product();
            if count > 8 {
                let (dsplit, _) = (0..m)
                    .map(|j| (j, bx[j].1 - bx[j].0))
                    .max_by_key(|&(_, w)| w)
                    .expect("m >= 1");
                let mid = (bx[dsplit].0 + bx[dsplit].1) / 2;
                let mut lo = bx;
                let mut hi = bx;
                lo[dsplit].1 = mid;
                hi[dsplit].0 = mid + 1;
                stack.push(hi);
                stack.push(lo);
                continue;
            }
            // evaluate the points of the box in index order
            let mut idx = [0usize; MAX_DIM];
            for j in 0..m {
                idx[j] = bx[j].0;
            }
            loop {
                let mut flat = 0;
                for j in 0..m {
                    flat = flat * shape[j] + idx[j];
                    a[j] = self.h_grid.axes[j].node(idx[j]);
                }
                for v in hp[..n].iter_mut() {
                    *v = 0.0;
                }
                for j in 0..m {
                    for (k, v) in hp[..n].iter_mut().enumerate() {
                        *v += a[j] * self.basis[j][k];
                    }
                }
                sc.bch_into(s1inv, &hp[..n], &mut tp[..n]);
                sc.bch_into(&tp[..n], sx, &mut gp[..n]);
                cov.evaluated += 1;
                let start = pvals.len();
                let mut any = false;
                // the functions share one grid: interpolation taps are computed once
                let inside = self.phis.iter().any(|f| f.in_support(&gp[..n]))
                    && self.interp.taps(self.phis[0].grid(), &gp[..n], &mut taps);
                for f in &self.phis {
                    let v = if inside && f.in_support(&gp[..n]) {
                        let vals = f.values();
                        taps.iter().fold(ZERO, |acc, &(i, w)| acc + vals[i] * w)
                    } else {
                        ZERO
                    };
                    any |= v != ZERO;
                    pvals.push(v);
                }
                if any {
                    cov.in_support += 1;
                    pts.push(flat);
                } else {
                    pvals.truncate(start);
                }
                // odometer over the box
                let mut d = m;
                let mut done = true;
                while d > 0 {
                    d -= 1;
                    if idx[d] < bx[d].1 {
                        idx[d] += 1;
                        for e in (d + 1)..m {
                            idx[e] = bx[e].0;
                        }
                        done = false;
                        break;
                    }
                }
                if done {
                    break;
                }
            }
        }
        debug_assert_eq!(pvals.len(), pts.len() * nf);
    }

    fn transform(
        &self,
        pts: &[usize],
        pvals: &[C],
        acc: &mut [C],
        cov: &mut Coverage,
        scratch: &mut Scratch,
    ) {
        let nf = self.phis.len();
        let nl = self.table.len();
        let m = self.basis.len();
        let k = self.embed.len();
        let use_chirpz = match (self.method, &self.separable) {
            (KernelMethod::Sparse, _) | (_, None) => false,
            (KernelMethod::ChirpZ, Some(_)) => true,
            (KernelMethod::Auto, Some(_)) => {
                let sparse_cost = pts.len() * (nl + 8 * k);
                let size = self.h_grid.len();
                let dense_cost: usize = self
                    .h_grid
                    .axes
                    .iter()
                    .map(|a| {
                        let l = (2 * a.points).next_power_of_two();
                        size / a.points * (l * (l.trailing_zeros() as usize) * 3 + a.points)
                    })
                    .sum();
                dense_cost < sparse_cost
            }
        };
        for v in acc.iter_mut() {
            *v = ZERO;
        }
        if use_chirpz {
            cov.pairs_chirpz += 1;
            for b in 0..nf {
                scratch.grid.clear();
                scratch.grid.resize(self.h_grid.len(), ZERO);
                for (p, &flat) in pts.iter().enumerate() {
                    scratch.grid[flat] = pvals[p * nf + b];
                }
                let out = self.separable_transform(scratch);
                for l in 0..nl {
                    acc[b * nl + l] = if self.table.active[l] { out[l] } else { ZERO };
                }
            }
            return;
        }
        cov.pairs_sparse += 1;
        let mut a = [0.0; MAX_DIM];
        let mut pc = [0.0; MAX_DIM];
        scratch.z.resize(nl, ZERO);
        for (p, &flat) in pts.iter().enumerate() {
            self.node_a(flat, &mut a[..m]);
            for c in 0..k {
                pc[c] = (0..m).map(|j| self.pmat[c][j] * a[j]).sum();
            }
            self.table.fill(&pc[..k], &mut scratch.z, &mut scratch.buf);
            for b in 0..nf {
                let v = pvals[p * nf + b];
                if v == ZERO {
                    continue;
                }
                let row = &mut acc[b * nl..(b + 1) * nl];
                for (o, z) in row.iter_mut().zip(&scratch.z) {
                    *o += v * z;
                }
            }
        }
    }

    /// Separable Fourier sum of `scratch.grid` (H-grid layout) onto the lambda grid.
    fn separable_transform(&self, scratch: &mut Scratch) -> Vec<C> {
        let plans = self.separable.as_ref().expect("separable plan");
        let m = self.basis.len();
        let mut shape = self.h_grid.shape();
        let mut cur = std::mem::take(&mut scratch.grid);
        for j in 0..m {
            let outer: usize = shape[..j].iter().product();
            let inner: usize = shape[j + 1..].iter().product();
            let len = shape[j];
            let out_len = plans[j].as_ref().map_or(1, |p| p.plan.output_len());
            let mut next = vec![ZERO; outer * out_len * inner];
            scratch.col.resize(len, ZERO);
            scratch.colout.resize(out_len, ZERO);
            for o in 0..outer {
                for i in 0..inner {
                    let mut nonzero = false;
                    for t in 0..len {
                        let v = cur[(o * len + t) * inner + i];
                        nonzero |= v != ZERO;
                        scratch.col[t] = v;
                    }
                    if !nonzero {
                        continue;
                    }
                    match &plans[j] {
                        Some(p) => {
                            p.plan
                                .apply(&scratch.col, &mut scratch.colout, &mut scratch.fft);
                            for (q, s) in p.shift.iter().enumerate() {
                                next[(o * out_len + q) * inner + i] = scratch.colout[q] * s;
                            }
                        }
                        None => {
                            next[o * inner + i] = scratch.col.iter().sum();
                        }
                    }
                }
            }
            shape[j] = out_len;
            cur = next;
        }
        // reorder to lambda-grid order
        let kdim = self.lambda_shape.len();
        let total: usize = self.lambda_shape.iter().product();
        let mut out = vec![ZERO; total];
        let mut lidx = [0usize; MAX_DIM];
        for (flat, o) in out.iter_mut().enumerate() {
            let mut f = flat;
            for c in (0..kdim).rev() {
                lidx[c] = f % self.lambda_shape[c];
                f /= self.lambda_shape[c];
            }
            let mut pos = 0;
            for j in 0..m {
                let ij = plans[j].as_ref().map_or(0, |p| lidx[p.lambda_axis]);
                pos = pos * shape[j] + ij;
            }
            *o = cur[pos];
        }
        scratch.grid = Vec::new();
        out
    }

    /// Full tensor for function `b` from rows in X-grid order.
    pub fn tensor(&self, fam: &RepFamily, rows: &[KernelRow], b: usize) -> Result<KernelTensor> {
        let lambda_grid = fam
            .lambda_grid()
            .ok_or_else(|| Error::InvalidInput("kernel tensors need a lambda grid".into()))?
            .clone();
        let nl = self.table.len();
        let nx = self.x_grid.len();
        let mut values = vec![ZERO; nl * nx * nx];
        let mut coverage = Coverage::default();
        for (x1, row) in rows.iter().enumerate() {
            coverage.add(&row.coverage);
            for l in 0..nl {
                let src = &row.values[(b * nl + l) * nx..(b * nl + l + 1) * nx];
                values[(l * nx + x1) * nx..(l * nx + x1 + 1) * nx].copy_from_slice(src);
            }
        }
        Ok(KernelTensor {
            lambda_grid,
            x_grid: self.x_grid.clone(),
            values,
            generic: self.table.active.clone(),
            coverage,
        })
    }

    /// Per-function, per-lambda contribution of a row to `||K(lambda)||_HS^2`,
    /// laid out `[function][lambda]`, and the largest `|K|` in the row per function.
    pub fn row_hs(&self, i: usize, row: &KernelRow) -> (Vec<f64>, Vec<f64>) {
        let nl = self.table.len();
        let nx = self.x_grid.len();
        let w1 = self.x_grid.weight(i);
        let w = self.x_grid.weights();
        let mut out = vec![0.0; self.phis.len() * nl];
        let mut max = vec![0.0_f64; self.phis.len()];
        for (bl, o) in out.iter_mut().enumerate() {
            let vals = &row.values[bl * nx..(bl + 1) * nx];
            let mut s = 0.0;
            for (v, wx) in vals.iter().zip(&w) {
                s += v.norm_sqr() * wx;
                max[bl / nl] = max[bl / nl].max(v.norm());
            }
            *o = s * w1;
        }
        (out, max)
    }

    /// Like `row_hs`, restricted to entries with `x1` or `x` outside `inner`.
    pub fn row_edge(&self, i: usize, row: &KernelRow, inner: &[bool]) -> Vec<f64> {
        let nl = self.table.len();
        let nx = self.x_grid.len();
        let w1 = self.x_grid.weight(i);
        let w = self.x_grid.weights();
        (0..self.phis.len() * nl)
            .map(|bl| {
                let vals = &row.values[bl * nx..(bl + 1) * nx];
                let mut s = 0.0;
                for (j, (v, wx)) in vals.iter().zip(&w).enumerate() {
                    if !(inner[i] && inner[j]) {
                        s += v.norm_sqr() * wx;
                    }
                }
                s * w1
            })
            .collect()
    }
}

#[derive(Default)]
struct Scratch {
    grid: Vec<C>,
    col: Vec<C>,
    colout: Vec<C>,
    fft: Vec<C>,
    z: Vec<C>,
    buf: Vec<C>,
}

/// Per-H-axis chirp-z plans when every lambda axis drives at most one H axis and vice versa.
fn separable_plan(
    pmat: &[Vec<f64>],
    h_grid: &GridSpec,
    lambda_grid: &GridSpec,
) -> Option<Vec<Option<AxisTransform>>> {
    let m = h_grid.ndim();
    let k = pmat.len();
    let nz = |v: f64| v.abs() > 1e-14;
    let mut plans: Vec<Option<AxisTransform>> = (0..m).map(|_| None).collect();
    let mut used = vec![false; k];
    for j in 0..m {
        let rows: Vec<usize> = (0..k).filter(|&c| nz(pmat[c][j])).collect();
        if rows.len() > 1 {
            return None;
        }
        if let Some(&c) = rows.first() {
            if used[c] {
                return None;
            }
            used[c] = true;
            let ax = &h_grid.axes[j];
            let la = &lambda_grid.axes[c];
            let p = pmat[c][j];
            let (plan, shift) = ChirpZ::for_grid(
                ax.points,
                ax.lo(),
                ax.spacing(),
                la.points,
                p * la.lo(),
                p * la.spacing(),
            );
            plans[j] = Some(AxisTransform {
                lambda_axis: c,
                plan,
                shift,
            });
        }
    }
    Some(plans)
}

/// `K(lambda, x1, x)` on a lambda grid, laid out `[lambda][x1][x]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTensor {
    pub lambda_grid: GridSpec,
    pub x_grid: GridSpec,
    pub values: Vec<C>,
    /// false at masked (non-generic) lambda points, where the kernel is 0
    pub generic: Vec<bool>,
    pub coverage: Coverage,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct KernelSidecar {
    lambda_grid: GridSpec,
    x_grid: GridSpec,
    shape: [usize; 3],
    layout: String,
    generic: Vec<bool>,
}

const KERNEL_LAYOUT: &str =
    "row-major [lambda][x1][x]; complex as interleaved (re, im); little-endian f64";

impl KernelTensor {
    pub fn nx(&self) -> usize {
        self.x_grid.len()
    }

    #[inline]
    pub fn at(&self, l: usize, x1: usize, x: usize) -> C {
        let nx = self.nx();
        self.values[(l * nx + x1) * nx + x]
    }

    pub fn slice(&self, l: usize) -> &[C] {
        let nx = self.nx();
        &self.values[l * nx * nx..(l + 1) * nx * nx]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.norm()))
    }

    /// `||K(lambda_l)||_HS^2 = sum |K|^2 w_x1 w_x`.
    pub fn hs_norm_sq(&self, l: usize) -> f64 {
        let w = self.x_grid.weights();
        let nx = self.nx();
        let s = self.slice(l);
        let mut t = 0.0;
        for x1 in 0..nx {
            for x in 0..nx {
                t += s[x1 * nx + x].norm_sqr() * w[x1] * w[x];
            }
        }
        t
    }

    /// Operator at the `l`-th lambda node: `M[x1][x] = K(lambda, x1, x) w_x`.
    pub fn operator_at(&self, l: usize) -> OperatorMatrix {
        let nx = self.nx();
        let w = self.x_grid.weights();
        let s = self.slice(l);
        OperatorMatrix {
            lambda: self.lambda_grid.coords(l),
            x_grid: self.x_grid.clone(),
            entries: DMatrix::from_fn(nx, nx, |i, j| s[i * nx + j] * w[j]),
        }
    }

    /// `operator_from_kernel`: `lambda` must be a node of the lambda grid.
    pub fn operator(&self, lambda: &[f64]) -> Result<OperatorMatrix> {
        let l = self
            .lambda_grid
            .locate(lambda)
            .ok_or_else(|| Error::OffGrid(lambda.to_vec()))?;
        Ok(self.operator_at(l))
    }

    /// Writes the values as a flat binary file plus a JSON sidecar.
    pub fn write_binary(&self, bin: &Path, sidecar: &Path) -> Result<()> {
        let mut bytes = Vec::with_capacity(self.values.len() * 16);
        for v in &self.values {
            bytes.extend_from_slice(&v.re.to_le_bytes());
            bytes.extend_from_slice(&v.im.to_le_bytes());
        }
        std::fs::write(bin, bytes)?;
        let side = KernelSidecar {
            lambda_grid: self.lambda_grid.clone(),
            x_grid: self.x_grid.clone(),
            shape: [self.lambda_grid.len(), self.nx(), self.nx()],
            layout: KERNEL_LAYOUT.to_string(),
            generic: self.generic.clone(),
        };
        std::fs::write(sidecar, serde_json::to_string_pretty(&side)?)?;
        Ok(())
    }

    pub fn read_binary(bin: &Path, sidecar: &Path) -> Result<Self> {
        let side: KernelSidecar = serde_json::from_str(&std::fs::read_to_string(sidecar)?)?;
        let bytes = std::fs::read(bin)?;
        let count = side.shape.iter().product::<usize>();
        if bytes.len() != count * 16 {
            return Err(Error::InvalidInput(format!(
                "kernel file has {} bytes, sidecar shape needs {}",
                bytes.len(),
                count * 16
            )));
        }
        let f = |c: &[u8]| f64::from_le_bytes(c.try_into().expect("8 bytes"));
        let values = bytes
            .chunks_exact(16)
            .map(|c| C::new(f(&c[..8]), f(&c[8..])))
            .collect();
        Ok(Self {
            lambda_grid: side.lambda_grid,
            x_grid: side.x_grid,
            values,
            generic: side.generic,
            coverage: Coverage::default(),
        })
    }
}

/// Kernel tensors for several functions; rows evaluated in parallel.
pub fn kernel_tensors(
    phis: &[&SampledGroupFunction],
    fam: &RepFamily,
    x_grid: &GridSpec,
    opts: &TransformOptions,
) -> Result<Vec<KernelTensor>> {
    let engine = KernelEngine::new(phis, fam, x_grid, opts)?;
    let rows: Vec<KernelRow> = (0..engine.rows())
        .into_par_iter()
        .map(|i| engine.row(i))
        .collect();
    (0..phis.len())
        .map(|b| engine.tensor(fam, &rows, b))
        .collect()
}

/// `K(lambda, x1, x)` over the family's lambda grid.
pub fn kernel_tensor(
    phi: &SampledGroupFunction,
    fam: &RepFamily,
    x_grid: &GridSpec,
    opts: &TransformOptions,
) -> Result<KernelTensor> {
    Ok(kernel_tensors(&[phi], fam, x_grid, opts)?.remove(0))
}

/// `K(lambda_l, x1, x)` per function at one family point, laid out `[x1][x]`.
pub fn kernel_slice(
    phis: &[&SampledGroupFunction],
    fam: &RepFamily,
    l: usize,
    x_grid: &GridSpec,
    opts: &TransformOptions,
) -> Result<(Vec<Vec<C>>, Coverage)> {
    let sub = fam.subset(&[l]);
    let engine = KernelEngine::new(phis, &sub, x_grid, opts)?;
    let rows: Vec<KernelRow> = (0..engine.rows())
        .into_par_iter()
        .map(|i| engine.row(i))
        .collect();
    let nx = x_grid.len();
    let mut out = vec![vec![ZERO; nx * nx]; phis.len()];
    let mut coverage = Coverage::default();
    for (x1, row) in rows.iter().enumerate() {
        coverage.add(&row.coverage);
        for (b, o) in out.iter_mut().enumerate() {
            o[x1 * nx..(x1 + 1) * nx].copy_from_slice(&row.values[b * nx..(b + 1) * nx]);
        }
    }
    Ok((out, coverage))
}

/// `operator_from_kernel`.
pub fn operator_from_kernel(k: &KernelTensor, lambda: &[f64]) -> Result<OperatorMatrix> {
    k.operator(lambda)
}

/// HS-relative difference of the two routes at each lambda node (NaN where the direct operator is 0).
pub fn route_errors(direct: &[OperatorMatrix], kernel: &KernelTensor) -> Vec<f64> {
    direct
        .iter()
        .enumerate()
        .map(|(l, d)| {
            let k = kernel.operator_at(l);
            let nrm = d.hs_norm();
            if nrm == 0.0 {
                f64::NAN
            } else {
                d.hs_distance(&k) / nrm
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlancherelRow {
    pub lambda: Vec<f64>,
    pub hs_sq: f64,
    pub density: f64,
    pub weight: f64,
    pub generic: bool,
    pub x_half_width: Vec<f64>,
    pub edge_fraction: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlancherelReport {
    /// `||phi||^2_{L^2(G)}`
    pub norm_sq: f64,
    /// `int ||phi^(pi_lambda)||_HS^2 R(lambda) dlambda`
    pub transform_mass: f64,
    /// `norm_sq / transform_mass`; `None` when the transform mass vanishes
    pub ratio: Option<f64>,
    pub rows: Vec<PlancherelRow>,
    /// mass in the outer `TAIL_CELLS` cells of the lambda grid, relative to the total
    pub tail_fraction: f64,
    pub tail_warning: bool,
    /// lambda nodes whose X-window hit the size cap before the edge test passed
    pub unconverged: usize,
}

/// True when a node lies within `cells` cells of a face of the grid (cell `cells` counts half).
fn in_outer_band(grid: &GridSpec, idx: &[usize], cells: usize) -> bool {
    idx.iter()
        .zip(&grid.axes)
        .any(|(&i, a)| i < cells || i + cells >= a.points)
}

/// Assembles the Plancherel report of function `b` from per-node HS norms.
pub fn plancherel_report(
    norm_sq: f64,
    fam: &RepFamily,
    nodes: &[HsNode],
    b: usize,
) -> Result<PlancherelReport> {
    let grid = fam
        .lambda_grid()
        .ok_or_else(|| Error::InvalidInput("the Plancherel check needs a lambda grid".into()))?;
    let mut idx = vec![0; grid.ndim()];
    let mut rows = Vec::with_capacity(fam.len());
    let mut total = 0.0;
    let mut tail = 0.0;
    let mut unconverged = 0;
    for (i, node) in nodes.iter().enumerate() {
        let hs = node.hs_sq[b];
        let density = fam.density(i);
        let weight = grid.weight(i);
        let contrib = hs * density;
        total += contrib * weight;
        grid.unravel(i, &mut idx);
        if in_outer_band(grid, &idx, TAIL_CELLS) {
            tail += contrib * weight;
        }
        if !node.converged {
            unconverged += 1;
        }
        rows.push(PlancherelRow {
            lambda: fam.lambda(i).to_vec(),
            hs_sq: hs,
            density,
            weight,
            generic: fam.is_generic(i),
            x_half_width: node.half_width.clone(),
            edge_fraction: node.edge_fraction[b],
            converged: node.converged,
        });
    }
    let ratio = (total > 0.0).then(|| norm_sq / total);
    let tail_fraction = if total > 0.0 { tail / total } else { 0.0 };
    Ok(PlancherelReport {
        norm_sq,
        transform_mass: total,
        ratio,
        rows,
        tail_fraction,
        tail_warning: tail_fraction >= TAIL_WARNING,
        unconverged,
    })
}

/// Validates functions, X-grid and lambda family for the kernel route
/// (dimensions, support, H-grid Nyquist limit) without computing anything.
pub fn check_setup(
    phis: &[&SampledGroupFunction],
    fam: &RepFamily,
    x_grid: &GridSpec,
    opts: &TransformOptions,
) -> Result<()> {
    KernelEngine::new(phis, fam, x_grid, opts).map(|_| ())
}

/// Per-function `||phi^(pi_lambda)||_HS^2` at every lambda node on one fixed
/// X-grid, through the kernel route, and the largest `|K|` per function.
pub fn hs_norms(
    phis: &[&SampledGroupFunction],
    fam: &RepFamily,
    x_grid: &GridSpec,
    opts: &TransformOptions,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let engine = KernelEngine::new(phis, fam, x_grid, opts)?;
    let parts: Vec<(Vec<f64>, Vec<f64>)> = (0..engine.rows())
        .into_par_iter()
        .map(|i| {
            let row = engine.row(i);
            engine.row_hs(i, &row)
        })
        .collect();
    Ok(reduce_hs(&parts, phis.len(), fam.len()))
}

/// Sums row contributions in row order: `([function][lambda] HS^2, [function] max |K|)`.
pub fn reduce_hs(
    parts: &[(Vec<f64>, Vec<f64>)],
    nf: usize,
    nl: usize,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut hs = vec![vec![0.0; nl]; nf];
    let mut kmax = vec![0.0_f64; nf];
    for (p, m) in parts {
        for b in 0..nf {
            for l in 0..nl {
                hs[b][l] += p[b * nl + l];
            }
            kmax[b] = kmax[b].max(m[b]);
        }
    }
    (hs, kmax)
}

/// Growth policy of the X-window used for HS norms.
///
/// The kernel of `phi^(pi_lambda)` spreads over a region of X whose size
/// grows as `lambda` approaches the non-generic set, so one fixed X-box either
/// truncates small `|lambda|` or aliases large `|lambda|`. Each lambda node
/// therefore gets its own box, grown from the base X-grid at fixed spacing
/// until the HS mass in the outer band is below `edge_tol`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct XWindow {
    /// outer band, as a fraction of the half-width
    pub edge_band: f64,
    pub edge_tol: f64,
    pub growth: f64,
    /// cap on points per X axis; nodes that hit it are reported unconverged
    pub max_points: usize,
    /// the box never grows past the point where the phase frequency of `pi(g)`
    /// exceeds this fraction of the G-grid Nyquist limit on some axis
    pub nyquist_fraction: f64,
}

impl Default for XWindow {
    fn default() -> Self {
        Self {
            edge_band: 0.25,
            edge_tol: 1e-3,
            growth: 2.0,
            max_points: 2049,
            nyquist_fraction: 0.95,
        }
    }
}

/// HS norms at one lambda node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HsNode {
    /// per function
    pub hs_sq: Vec<f64>,
    /// per function, fraction of HS mass in the outer band of the final box
    pub edge_fraction: Vec<f64>,
    /// per function, largest `|K|`
    pub k_max: Vec<f64>,
    /// half-widths of the final X box
    pub half_width: Vec<f64>,
    pub converged: bool,
    /// growth was refused because a larger box would alias on the G grid
    #[serde(default)]
    pub bandwidth_limited: bool,
}

/// Largest `|d phase / d g_d|` of `pi(g)` at the identity over the X box,
/// sampled at the corners and midpoints of the box. A grid sum over `g` at
/// spacing `h_d` folds frequencies above `pi / h_d` back onto the kernel.
pub fn phase_bandwidth(rep: &InducedRep, x_grid: &GridSpec) -> Vec<f64> {
    let n = rep.dim();
    let r = x_grid.ndim();
    let total = 3usize.pow(r as u32);
    let mut out = vec![0.0_f64; n];
    let mut g = vec![0.0; n];
    let mut x = vec![0.0; r];
    let mut xg = vec![0.0; r];
    for k in 0..total {
        let mut rem = k;
        for (xi, a) in x.iter_mut().zip(&x_grid.axes) {
            *xi = a.lo() + 0.5 * (rem % 3) as f64 * (a.hi() - a.lo());
            rem /= 3;
        }
        for d in 0..n {
            let step = 1e-4;
            g[d] = step;
            let p = rep.cocycle_phase_into(&g, &x, &mut xg);
            g[d] = -step;
            let m = rep.cocycle_phase_into(&g, &x, &mut xg);
            g[d] = 0.0;
            out[d] = out[d].max(((p - m) / (2.0 * step)).abs());
        }
    }
    out
}

/// `||phi^(pi_lambda)||_HS^2` at family point `l` on a growing X-window.
pub fn hs_at_lambda(
    phis: &[&SampledGroupFunction],
    fam: &RepFamily,
    l: usize,
    base: &GridSpec,
    opts: &TransformOptions,
    win: &XWindow,
) -> Result<HsNode> {
    let nf = phis.len();
    if !fam.is_generic(l) {
        return Ok(HsNode {
            hs_sq: vec![0.0; nf],
            edge_fraction: vec![0.0; nf],
            k_max: vec![0.0; nf],
            half_width: base.axes.iter().map(|a| a.half_width).collect(),
            converged: true,
            bandwidth_limited: false,
        });
    }
    if win.growth <= 1.0 || !(0.0..1.0).contains(&win.edge_band) {
        return Err(Error::InvalidInput(
            "X-window growth must exceed 1 and the edge band lie in [0, 1)".into(),
        ));
    }
    let sub = fam.subset(&[l]);
    let rep = fam.rep(l).expect("generic node");
    let g_spacing: Vec<f64> = phis
        .first()
        .map(|f| f.grid().axes.iter().map(|a| a.spacing()).collect())
        .unwrap_or_default();
    let aliases = |grid: &GridSpec| {
        phase_bandwidth(rep, grid)
            .iter()
            .zip(&g_spacing)
            .any(|(w, h)| w * h > win.nyquist_fraction * PI)
    };
    let mut grid = base.clone();
    loop {
        let engine = KernelEngine::new(phis, &sub, &grid, opts)?;
        let inner: Vec<bool> = (0..grid.len())
            .map(|i| {
                let c = grid.coords(i);
                c.iter().zip(&grid.axes).all(|(x, a)| {
                    (x - a.center).abs() <= (1.0 - win.edge_band) * a.half_width + 1e-12
                })
            })
            .collect();
        let parts: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = (0..engine.rows())
            .into_par_iter()
            .map(|i| {
                let row = engine.row(i);
                let (hs, m) = engine.row_hs(i, &row);
                let edge = engine.row_edge(i, &row, &inner);
                (hs, edge, m)
            })
            .collect();
        let mut hs = vec![0.0; nf];
        let mut edge = vec![0.0; nf];
        let mut kmax = vec![0.0_f64; nf];
        for (h, e, m) in &parts {
            for b in 0..nf {
                hs[b] += h[b];
                edge[b] += e[b];
                kmax[b] = kmax[b].max(m[b]);
            }
        }
        let frac: Vec<f64> = hs
            .iter()
            .zip(&edge)
            .map(|(h, e)| if *h > 0.0 { e / h } else { 0.0 })
            .collect();
        let ok = frac.iter().all(|f| *f <= win.edge_tol);
        let at_cap = grid.axes.iter().any(|a| a.points >= win.max_points);
        let mut next = grown(&grid, win, 1.0);
        if aliases(&next) {
            // largest admissible box between the current one and the full step
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..12 {
                let mid = 0.5 * (lo + hi);
                if aliases(&grown(&grid, win, mid)) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            next = grown(&grid, win, lo);
        }
        let limited = !ok && !at_cap && next.len() <= grid.len();
        if ok || at_cap || limited {
            return Ok(HsNode {
                hs_sq: hs,
                edge_fraction: frac,
                k_max: kmax,
                half_width: grid.axes.iter().map(|a| a.half_width).collect(),
                converged: ok,
                bandwidth_limited: limited,
            });
        }
        grid = next;
    }
}

/// The box grown by a fraction `step` of the full growth factor, at fixed spacing.
fn grown(grid: &GridSpec, win: &XWindow, step: f64) -> GridSpec {
    GridSpec {
        axes: grid
            .axes
            .iter()
            .map(|a| {
                let h = a.spacing();
                let cells = ((a.half_width * (1.0 + step * (win.growth - 1.0)) / h).floor()
                    as usize)
                    .min((win.max_points - 1) / 2);
                Axis::new(a.center, cells as f64 * h, 2 * cells + 1)
            })
            .collect(),
    }
}

/// `hs_at_lambda` at every family point, in index order.
pub fn hs_sweep(
    phis: &[&SampledGroupFunction],
    fam: &RepFamily,
    base: &GridSpec,
    opts: &TransformOptions,
    win: &XWindow,
) -> Result<Vec<HsNode>> {
    (0..fam.len())
        .map(|l| hs_at_lambda(phis, fam, l, base, opts, win))
        .collect()
}

/// `||phi||^2 / int ||phi^(pi_lambda)||_HS^2 R(lambda) dlambda`, each lambda
/// node on its own X-window.
pub fn plancherel_check(
    phi: &SampledGroupFunction,
    fam: &RepFamily,
    base: &GridSpec,
    opts: &TransformOptions,
    win: &XWindow,
) -> Result<PlancherelReport> {
    let nodes = hs_sweep(&[phi], fam, base, opts, win)?;
    plancherel_report(phi.l2_norm_sq(), fam, &nodes, 0)
}

/// `plancherel_check` for several functions sharing one sweep; every node's
/// X-window grows until all of them have converged.
pub fn plancherel_checks(
    phis: &[&SampledGroupFunction],
    fam: &RepFamily,
    base: &GridSpec,
    opts: &TransformOptions,
    win: &XWindow,
) -> Result<Vec<PlancherelReport>> {
    let nodes = hs_sweep(phis, fam, base, opts, win)?;
    phis.iter()
        .enumerate()
        .map(|(b, phi)| plancherel_report(phi.l2_norm_sq(), fam, &nodes, b))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ZeroFunction,
    /// nonzero function, vanishing set of estimated measure 0
    Consistent,
    /// nonzero function whose kernel vanishes on a set of positive estimated measure
    Inconsistent,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::ZeroFunction => "zero function",
            Verdict::Consistent => "consistent with theorem at resolution h",
            Verdict::Inconsistent => "inconsistent with theorem at resolution h",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VanishingRow {
    pub lambda: Vec<f64>,
    pub hs: f64,
    pub below: bool,
    pub generic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VanishingReport {
    /// absolute threshold on `||K(lambda)||_HS`
    pub epsilon: f64,
    /// `max |K|` over the tensor
    pub k_max: f64,
    pub rows: Vec<VanishingRow>,
    /// R-weighted measure of vanishing nodes that have a vanishing grid neighbour
    pub vanishing_measure: f64,
    pub total_measure: f64,
    /// pairs of grid-adjacent vanishing nodes
    pub adjacent_pairs: usize,
    pub verdict: Verdict,
}

/// Vanishing set of `lambda -> ||K(lambda)||_HS` at threshold `eps_rel * max |K|`,
/// from the squared norms `hs`.
///
/// Isolated vanishing nodes count as measure zero; a node at exactly the
/// threshold counts as non-vanishing.
pub fn pw_scan_from_norms(
    phi_is_zero: bool,
    hs: &[f64],
    k_max: f64,
    fam: &RepFamily,
    eps_rel: f64,
) -> Result<VanishingReport> {
    let grid = fam
        .lambda_grid()
        .ok_or_else(|| Error::InvalidInput("the vanishing scan needs a lambda grid".into()))?;
    let epsilon = eps_rel * k_max;
    let zero_kernel = k_max == 0.0;
    let below: Vec<bool> = hs
        .iter()
        .enumerate()
        .map(|(i, &v)| fam.is_generic(i) && (zero_kernel || v.sqrt() < epsilon))
        .collect();
    let mut idx = vec![0; grid.ndim()];
    let mut total = 0.0;
    let mut measure = 0.0;
    let mut pairs = 0;
    for i in 0..hs.len() {
        let w = fam.density(i) * grid.weight(i);
        total += w;
        if !below[i] {
            continue;
        }
        grid.unravel(i, &mut idx);
        let mut has_neighbour = false;
        for d in 0..grid.ndim() {
            for delta in [-1isize, 1] {
                let j = idx[d] as isize + delta;
                if j < 0 || j as usize >= grid.axes[d].points {
                    continue;
                }
                let mut nb = idx.clone();
                nb[d] = j as usize;
                let f = grid.ravel(&nb);
                if below[f] {
                    has_neighbour = true;
                    if f > i {
                        pairs += 1;
                    }
                }
            }
        }
        if has_neighbour {
            measure += w;
        }
    }
    let verdict = if phi_is_zero && zero_kernel {
        Verdict::ZeroFunction
    } else if measure > 0.0 || zero_kernel {
        Verdict::Inconsistent
    } else {
        Verdict::Consistent
    };
    Ok(VanishingReport {
        epsilon,
        k_max,
        rows: hs
            .iter()
            .enumerate()
            .map(|(i, &v)| VanishingRow {
                lambda: fam.lambda(i).to_vec(),
                hs: v.sqrt(),
                below: below[i],
                generic: fam.is_generic(i),
            })
            .collect(),
        vanishing_measure: measure,
        total_measure: total,
        adjacent_pairs: pairs,
        verdict,
    })
}

/// `pw_scan` on a computed kernel tensor.
pub fn pw_scan(
    phi: &SampledGroupFunction,
    k: &KernelTensor,
    fam: &RepFamily,
    eps_rel: f64,
) -> Result<VanishingReport> {
    let hs: Vec<f64> = (0..k.lambda_grid.len()).map(|l| k.hs_norm_sq(l)).collect();
    pw_scan_from_norms(phi.is_zero(), &hs, k.max_abs(), fam, eps_rel)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub lambda: Vec<f64>,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub rank: usize,
    pub near_singular: bool,
}

/// Singular values of each operator in the quadrature-orthonormal basis.
pub fn invertibility_probe(ops: &[OperatorMatrix], tol: f64) -> Vec<ProbeRow> {
    ops.iter()
        .map(|op| {
            let sv = op.unitary_form().singular_values();
            let smax = sv.iter().copied().fold(0.0_f64, f64::max);
            let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
            let smin = if smin.is_finite() { smin } else { 0.0 };
            let rank = sv.iter().filter(|&&s| s > tol * smax).count();
            ProbeRow {
                lambda: op.lambda.clone(),
                sigma_min: smin,
                sigma_max: smax,
                rank,
                near_singular: smin <= tol * smax,
            }
        })
        .collect()
}

/// Trapezoid Fourier sums `sum phi(t_j) w_j exp(i lambda t_j)` of a function
/// on `R^1` at the nodes of a lambda axis, by chirp-z.
pub fn abelian_fft_oracle(phi: &SampledGroupFunction, lambda: &Axis) -> Result<Vec<C>> {
    let g = phi.grid();
    if g.ndim() != 1 {
        return Err(Error::InvalidInput(
            "the FFT oracle is for functions on R^1".into(),
        ));
    }
    let a = &g.axes[0];
    let w: Vec<f64> = (0..a.points).map(|i| a.weight(i)).collect();
    Ok(crate::chirpz::fourier_samples(
        phi.values(),
        &w,
        a.lo(),
        a.spacing(),
        lambda.lo(),
        lambda.spacing(),
        lambda.points,
    ))
}

/// Group convolution `(phi1 * phi2)(g) = int phi1(g') phi2(g'^-1 g) dg'` on the grid of `phi1`.
pub fn convolve(
    sc: &StructureConstants,
    phi1: &SampledGroupFunction,
    phi2: &SampledGroupFunction,
    interp: Interpolation,
) -> Result<SampledGroupFunction> {
    let grid = phi1.grid();
    let n = sc.dim();
    if grid.ndim() != n || phi2.grid().ndim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: grid.ndim(),
        });
    }
    let (Some(s1), Some(s2)) = (phi1.support(), phi2.support()) else {
        return Ok(SampledGroupFunction::zero(grid));
    };
    let b1: Vec<Interval> = s1.iter().map(|&(a, b)| Interval::new(a, b)).collect();
    let b2: Vec<Interval> = s2.iter().map(|&(a, b)| Interval::new(a, b)).collect();
    let mut prod = vec![Interval::zero(); n];
    sc.bch_into(&b1, &b2, &mut prod);
    let required: Vec<(f64, f64)> = prod.iter().map(|v| (v.lo, v.hi)).collect();
    let fits = required.iter().zip(&grid.axes).all(|(&(lo, hi), a)| {
        let h = a.spacing();
        lo >= a.lo() + h * (1.0 - 1e-9) && hi <= a.hi() - h * (1.0 - 1e-9)
    });
    if !fits {
        return Err(Error::SupportOverflow { required });
    }
    // nonzero nodes of phi1 with their weights
    let mut nodes: Vec<(Vec<f64>, C)> = Vec::new();
    for (i, v) in phi1.values().iter().enumerate() {
        if *v != ZERO {
            nodes.push((grid.coords(i), v * grid.weight(i)));
        }
    }
    let values: Vec<C> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let g = grid.coords(i);
            if !g
                .iter()
                .zip(&required)
                .all(|(x, (lo, hi))| x >= lo && x <= hi)
            {
                return ZERO;
            }
            let mut inv = [0.0; MAX_DIM];
            let mut arg = [0.0; MAX_DIM];
            let mut acc = ZERO;
            for (p, w) in &nodes {
                for k in 0..n {
                    inv[k] = -p[k];
                }
                sc.bch_into(&inv[..n], &g, &mut arg[..n]);
                let v = phi2.eval(&arg[..n], interp);
                if v != ZERO {
                    acc += w * v;
                }
            }
            acc
        })
        .collect();
    SampledGroupFunction::new(grid.clone(), values, Some(required))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::get_group;
    use crate::functions::FunctionFamily;

    fn family(name: &str, lambda: GridSpec) -> (crate::catalog::GroupBundle, RepFamily) {
        let b = get_group(name).unwrap();
        let fam = RepFamily::on_grid(b.algebra.clone(), &b.flag, b.dual_chart().unwrap(), &lambda)
            .unwrap();
        (b, fam)
    }

    #[test]
    fn zero_function_gives_zero_everything() {
        let lam = GridSpec::new_dual(vec![Axis::from_range(0.5, 2.0, 4)]).unwrap();
        let (_, fam) = family("heisenberg", lam);
        let g = GridSpec::cube(3, 2.0, 9).unwrap();
        let x = GridSpec::cube(1, 3.0, 13).unwrap();
        let z = SampledGroupFunction::zero(&g);
        let opts = TransformOptions::default();
        let d = group_fourier_direct(&z, &fam, &x, &opts).unwrap();
        assert!(d.iter().all(|m| m.hs_norm() == 0.0));
        let k = kernel_tensor(&z, &fam, &x, &opts).unwrap();
        assert_eq!(k.max_abs(), 0.0);
        let rep = pw_scan(&z, &k, &fam, DEFAULT_PW_EPSILON).unwrap();
        assert_eq!(rep.verdict, Verdict::ZeroFunction);
        assert!(rep.rows.iter().all(|r| r.below));
        let pr = plancherel_check(&z, &fam, &x, &opts, &XWindow::default()).unwrap();
        assert!(pr.ratio.is_none());
        let probe = invertibility_probe(&d, 1e-8);
        assert!(probe
            .iter()
            .all(|p| p.sigma_min == 0.0 && p.sigma_max == 0.0));
    }

    #[test]
    fn sparse_and_chirpz_kernels_agree() {
        let lam = GridSpec::new_dual(vec![Axis::from_range(-2.0, 2.0, 6)]).unwrap();
        let (_, fam) = family("heisenberg", lam);
        let g = GridSpec::cube(3, 2.0, 13).unwrap();
        let x = GridSpec::cube(1, 3.0, 9).unwrap();
        let phi = FunctionFamily::random(5, 0).sample(&g).unwrap();
        let mut opts = TransformOptions {
            kernel_method: KernelMethod::Sparse,
            ..Default::default()
        };
        let a = kernel_tensor(&phi, &fam, &x, &opts).unwrap();
        opts.kernel_method = KernelMethod::ChirpZ;
        let b = kernel_tensor(&phi, &fam, &x, &opts).unwrap();
        let scale = a.max_abs();
        assert!(scale > 0.0);
        for (p, q) in a.values.iter().zip(&b.values) {
            assert!((p - q).norm() < 1e-11 * scale);
        }
    }

    #[test]
    fn aliasing_is_reported() {
        let lam = GridSpec::new_dual(vec![Axis::from_range(1.0, 40.0, 4)]).unwrap();
        let (_, fam) = family("heisenberg", lam);
        let g = GridSpec::cube(3, 2.0, 9).unwrap();
        let phi = FunctionFamily::random(1, 0).sample(&g).unwrap();
        let err = kernel_tensor(
            &phi,
            &fam,
            &GridSpec::cube(1, 3.0, 9).unwrap(),
            &TransformOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Aliasing { .. }), "{err}");
    }

    #[test]
    fn operator_from_kernel_needs_a_node() {
        let lam = GridSpec::new_dual(vec![Axis::from_range(0.5, 2.0, 4)]).unwrap();
        let (_, fam) = family("heisenberg", lam);
        let g = GridSpec::cube(3, 2.0, 9).unwrap();
        let phi = FunctionFamily::random(1, 0).sample(&g).unwrap();
        let k = kernel_tensor(
            &phi,
            &fam,
            &GridSpec::cube(1, 3.0, 9).unwrap(),
            &TransformOptions::default(),
        )
        .unwrap();
        assert!(k.operator(&[1.0]).is_ok());
        assert!(matches!(k.operator(&[1.1]), Err(Error::OffGrid(_))));
    }

    #[test]
    fn kernel_binary_round_trip() {
        let lam = GridSpec::new_dual(vec![Axis::from_range(0.5, 2.0, 3)]).unwrap();
        let (_, fam) = family("heisenberg", lam);
        let g = GridSpec::cube(3, 2.0, 9).unwrap();
        let phi = FunctionFamily::random(2, 0).sample(&g).unwrap();
        let k = kernel_tensor(
            &phi,
            &fam,
            &GridSpec::cube(1, 3.0, 7).unwrap(),
            &TransformOptions::default(),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (b, s) = (dir.path().join("k.bin"), dir.path().join("k.json"));
        k.write_binary(&b, &s).unwrap();
        let back = KernelTensor::read_binary(&b, &s).unwrap();
        assert_eq!(back.values, k.values);
        assert_eq!(back.lambda_grid, k.lambda_grid);
    }

    #[test]
    fn convolution_support_overflow() {
        let b = get_group("heisenberg").unwrap();
        let g = GridSpec::cube(3, 2.0, 9).unwrap();
        let big = FunctionFamily::Bump {
            center: vec![0.0; 3],
            radius: vec![1.4; 3],
        }
        .sample(&g)
        .unwrap();
        let err = convolve(&b.algebra, &big, &big, Interpolation::Cubic).unwrap_err();
        assert!(matches!(err, Error::SupportOverflow { .. }));
    }
}
