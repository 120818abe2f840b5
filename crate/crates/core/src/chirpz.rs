//! Chirp-z transform (Bluestein): `X_k = sum_n x_n exp(i (alpha n + beta n k))`
//! for `k = 0..M`, any real `alpha`, `beta`, in `O((N + M) log(N + M))`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub struct ChirpZ {
    n: usize,
    m: usize,
    len: usize,
    pre: Vec<Complex64>,
    post: Vec<Complex64>,
    filter_hat: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for ChirpZ {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChirpZ")
            .field("n", &self.n)
            .field("m", &self.m)
            .field("len", &self.len)
            .finish()
    }
}

/// `exp(i beta j^2 / 2)`; phase error grows like `1e-16 * beta * j^2`.
fn chirp(beta: f64, j: i64) -> Complex64 {
    let jj = (j * j) as f64;
    Complex64::from_polar(1.0, 0.5 * beta * jj)
}

impl ChirpZ {
    pub fn new(n: usize, m: usize, alpha: f64, beta: f64) -> Self {
        let len = (n + m).saturating_sub(1).max(1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(len);
        let inv = planner.plan_fft_inverse(len);
        let pre: Vec<Complex64> = (0..n)
            .map(|j| Complex64::from_polar(1.0, alpha * j as f64) * chirp(beta, j as i64))
            .collect();
        let post: Vec<Complex64> = (0..m).map(|k| chirp(beta, k as i64)).collect();
        // filter c_d = exp(-i beta d^2 / 2), d = k - n in (-(n-1), m-1), stored circularly
        let mut filter = vec![Complex64::new(0.0, 0.0); len];
        for d in 0..m {
            filter[d] = chirp(beta, d as i64).conj();
        }
        for d in 1..n {
            filter[len - d] = chirp(beta, d as i64).conj();
        }
        fwd.process(&mut filter);
        Self {
            n,
            m,
            len,
            pre,
            post,
            filter_hat: filter,
            fwd,
            inv,
        }
    }

    /// Evaluates `sum_j x_j exp(i w (a0 + j h))` at `w = w0 + k dw`, `k = 0..m`.
    pub fn for_grid(
        n: usize,
        a0: f64,
        h: f64,
        m: usize,
        w0: f64,
        dw: f64,
    ) -> (Self, Vec<Complex64>) {
        let plan = Self::new(n, m, w0 * h, dw * h);
        let shift = (0..m)
            .map(|k| Complex64::from_polar(1.0, (w0 + k as f64 * dw) * a0))
            .collect();
        (plan, shift)
    }

    pub fn input_len(&self) -> usize {
        self.n
    }

    pub fn output_len(&self) -> usize {
        self.m
    }

    /// Transforms `x` (length `n`) into `out` (length `m`); `scratch` is resized as needed.
    pub fn apply(&self, x: &[Complex64], out: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        assert_eq!(x.len(), self.n);
        assert_eq!(out.len(), self.m);
        scratch.clear();
        scratch.resize(self.len, Complex64::new(0.0, 0.0));
        for (s, (v, p)) in scratch.iter_mut().zip(x.iter().zip(&self.pre)) {
            *s = v * p;
        }
        self.fwd.process(scratch);
        for (s, f) in scratch.iter_mut().zip(&self.filter_hat) {
            *s *= f;
        }
        self.inv.process(scratch);
        let scale = 1.0 / self.len as f64;
        for (k, o) in out.iter_mut().enumerate() {
            *o = scratch[k] * self.post[k] * scale;
        }
    }
}

/// Direct `O(N M)` evaluation of the same sum, used as a reference.
pub fn direct(x: &[Complex64], m: usize, alpha: f64, beta: f64) -> Vec<Complex64> {
    (0..m)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(j, v)| v * Complex64::from_polar(1.0, (alpha + beta * k as f64) * j as f64))
                .sum()
        })
        .collect()
}

/// `sum_j f_j w_j exp(i lambda x_j)` for a sampled 1-D function at `m` frequencies
/// `lambda_k = w0 + k dw`, through the chirp-z transform.
pub fn fourier_samples(
    values: &[Complex64],
    weights: &[f64],
    x0: f64,
    h: f64,
    w0: f64,
    dw: f64,
    m: usize,
) -> Vec<Complex64> {
    let x: Vec<Complex64> = values.iter().zip(weights).map(|(v, w)| v * *w).collect();
    let (plan, shift) = ChirpZ::for_grid(x.len(), x0, h, m, w0, dw);
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    let mut scratch = Vec::new();
    plan.apply(&x, &mut out, &mut scratch);
    for (o, s) in out.iter_mut().zip(shift) {
        *o *= s;
    }
    out
}

/// Nyquist frequency of a grid with spacing `h`.
pub fn nyquist(h: f64) -> f64 {
    PI / h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_sum() {
        let x: Vec<Complex64> = (0..37)
            .map(|j| Complex64::new((j as f64 * 0.37).sin(), (j as f64 * 0.11).cos()))
            .collect();
        for &(m, a, b) in &[
            (5, 0.3, 0.05),
            (64, -1.0, 0.013),
            (1, 0.0, 0.0),
            (50, 2.0, -0.2),
        ] {
            let plan = ChirpZ::new(x.len(), m, a, b);
            let mut out = vec![Complex64::new(0.0, 0.0); m];
            plan.apply(&x, &mut out, &mut Vec::new());
            let refv = direct(&x, m, a, b);
            for (p, q) in out.iter().zip(&refv) {
                assert!((p - q).norm() < 1e-11, "{p} vs {q}");
            }
        }
    }

    #[test]
    fn reduces_to_dft() {
        let n = 16;
        let x: Vec<Complex64> = (0..n).map(|j| Complex64::new(j as f64, 0.0)).collect();
        let plan = ChirpZ::new(n, n, 0.0, -2.0 * PI / n as f64);
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        plan.apply(&x, &mut out, &mut Vec::new());
        let mut fft = x.clone();
        FftPlanner::new().plan_fft_forward(n).process(&mut fft);
        for (p, q) in out.iter().zip(&fft) {
            assert!((p - q).norm() < 1e-10);
        }
    }
}
