//! The acceptance suite: one check per criterion, each with pinned
//! tolerances and a runtime budget. Used by `selftest` and the acceptance test.

use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nilpw_core::catalog::{oracle_representation, GroupBundle};
use nilpw_core::functions::{FunctionFamily, SampledGroupFunction};
use nilpw_core::interp::Interpolation;
use nilpw_core::orbits::{check_polarization, pfaffian, plancherel_density, vergne_polarization};
use nilpw_core::transform::{
    abelian_fft_oracle, direct_operators, hs_norms, hs_sweep, kernel_tensors, plancherel_report,
    pw_scan_from_norms, route_errors, TransformOptions, Verdict, XWindow, DEFAULT_PW_EPSILON,
};
use nilpw_core::{get_group, Axis, GridSpec, GroupElement, InducedRep, RepFamily};

use crate::config::{FunctionSource, RunConfig};
use crate::report::body_of;
use crate::run::{execute, Command, Outcome, RunOptions};

/// Seed of every random draw in the suite.
pub const SEED: u64 = 7;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub id: u32,
    pub name: &'static str,
    pub measured: String,
    pub passed: bool,
    pub seconds: f64,
    pub budget: Option<f64>,
}

impl CheckResult {
    pub fn line(&self) -> String {
        let budget = self
            .budget
            .map(|b| format!(" (budget {b:.0} s)"))
            .unwrap_or_default();
        format!(
            "{} criterion {} {}: {}; {:.1} s{}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.seconds,
            budget
        )
    }
}

fn finish(
    id: u32,
    name: &'static str,
    start: Instant,
    budget: Option<f64>,
    outcome: Result<(bool, String), String>,
) -> CheckResult {
    let seconds = start.elapsed().as_secs_f64();
    let (ok, measured) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    let in_budget = budget.is_none_or(|b| seconds < b);
    let measured = if in_budget {
        measured
    } else {
        format!("{measured}; over runtime budget")
    };
    CheckResult {
        id,
        name,
        measured,
        passed: ok && in_budget,
        seconds,
        budget,
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Sample standard deviation over mean.
pub fn relative_spread(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    var.sqrt() / mean.abs()
}

pub fn run_all(workers: usize) -> Vec<CheckResult> {
    vec![
        abelian_reduction(),
        route_equivalence(),
        representation_laws(),
        oracle_agreement(),
        plancherel_constancy(),
        paley_wiener(),
        algebra_layer(),
        engel_coverage(),
        determinism(workers.max(8)),
    ]
}

fn family(b: &GroupBundle, lambda: &GridSpec) -> nilpw_core::Result<RepFamily> {
    RepFamily::on_grid(Arc::clone(&b.algebra), &b.flag, b.dual_chart()?, lambda)
}

/// Abelian R^1: transform of a bump against the FFT of its samples.
pub fn abelian_reduction() -> CheckResult {
    let start = Instant::now();
    let out = (|| {
        let b = get_group("abelian1").map_err(err)?;
        let g = GridSpec::cube(1, 2.0, 257).map_err(err)?;
        let axis = Axis::new(0.0, 10.0, 33);
        let lam = GridSpec::new_dual(vec![axis]).map_err(err)?;
        let fam = family(&b, &lam).map_err(err)?;
        let phi = FunctionFamily::Bump {
            center: vec![0.0],
            radius: vec![1.0],
        }
        .sample(&g)
        .map_err(err)?;
        let ops = direct_operators(
            &[&phi],
            &fam,
            &GridSpec::point(),
            &TransformOptions::default(),
        )
        .map_err(err)?;
        let oracle = abelian_fft_oracle(&phi, &axis).map_err(err)?;
        let scale = oracle.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let worst = ops.operators[0]
            .iter()
            .zip(&oracle)
            .map(|(op, o)| (op.entries[(0, 0)] - o).norm() / o.norm().max(1e-3 * scale))
            .fold(0.0, f64::max);
        Ok((
            worst < 1e-6,
            format!("max relative error {worst:.2e} (< 1e-6) at 33 lambda points"),
        ))
    })();
    finish(1, "abelian reduction", start, Some(1.0), out)
}

/// Worst relative route error over the 8 lambda points, per seed.
pub fn route_error_per_seed(
    g_points: usize,
    x_points: usize,
    seeds: u64,
) -> Result<Vec<f64>, String> {
    let b = get_group("heisenberg").map_err(err)?;
    let g = GridSpec::cube(3, 2.0, g_points).map_err(err)?;
    let x = GridSpec::cube(1, 3.0, x_points).map_err(err)?;
    let lam = GridSpec::new_dual(vec![Axis::from_range(0.5, 4.0, 8)]).map_err(err)?;
    let fam = family(&b, &lam).map_err(err)?;
    let opts = TransformOptions::default();
    let phis: Vec<SampledGroupFunction> = (0..seeds)
        .map(|i| FunctionFamily::random(SEED, i).sample(&g))
        .collect::<nilpw_core::Result<_>>()
        .map_err(err)?;
    let refs: Vec<&SampledGroupFunction> = phis.iter().collect();
    let direct = direct_operators(&refs, &fam, &x, &opts).map_err(err)?;
    let kernels = kernel_tensors(&refs, &fam, &x, &opts).map_err(err)?;
    Ok(direct
        .operators
        .iter()
        .zip(&kernels)
        .map(|(d, k)| route_errors(d, k).into_iter().fold(0.0, f64::max))
        .collect())
}

/// Heisenberg: direct quadrature against the kernel route, and its convergence under halving h.
pub fn route_equivalence() -> CheckResult {
    let start = Instant::now();
    let out = (|| {
        let coarse = route_error_per_seed(33, 65, 5)?;
        let fine = route_error_per_seed(65, 129, 5)?;
        let ratios: Vec<f64> = coarse.iter().zip(&fine).map(|(c, f)| c / f).collect();
        let worst = coarse.iter().copied().fold(0.0, f64::max);
        let ok_err = worst < 5e-3;
        let ok_rate = ratios.iter().all(|r| (2.8..=5.2).contains(r));
        Ok((
            ok_err && ok_rate,
            format!(
                "max rel error {} (< 5e-3): {}; halving ratios {} (4 +- 30%): {}",
                fmt_list(&coarse),
                if ok_err { "ok" } else { "exceeded" },
                fmt_list(&ratios),
                if ok_rate { "ok" } else { "out of range" }
            ),
        ))
    })();
    finish(2, "route equivalence", start, Some(120.0), out)
}

fn fmt_list(v: &[f64]) -> String {
    let s: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", s.join(", "))
}

fn random_element(rng: &mut ChaCha8Rng, n: usize, r: f64) -> GroupElement {
    GroupElement::new((0..n).map(|_| rng.random_range(-r..=r)).collect())
}

fn heisenberg_rep(lam: f64) -> Result<InducedRep, String> {
    let b = get_group("heisenberg").map_err(err)?;
    let l = b.dual_chart().map_err(err)?.embed(&[lam]).map_err(err)?;
    InducedRep::from_functional(Arc::clone(&b.algebra), &l, &b.flag).map_err(err)
}

fn gaussian(x: f64, c: f64, s: f64) -> f64 {
    (-(x - c) * (x - c) / (2.0 * s * s)).exp()
}

fn quad_norm(v: &[Complex64], w: &[f64]) -> f64 {
    v.iter()
        .zip(w)
        .map(|(c, w)| c.norm_sqr() * w)
        .sum::<f64>()
        .sqrt()
}

/// Worst unitarity deviation `| ||M f|| / ||f|| - 1 |` and homomorphism defect
/// `||(M(g1) M(g2) - M(g1 g2)) f|| / ||f||` of `act` on `x` over 50 random
/// pairs, each with its own Gaussian `f` (width 0.6, centre in `[-0.5, 0.5]`).
pub fn representation_defects(x: &GridSpec) -> Result<(f64, f64), String> {
    let b = get_group("heisenberg").map_err(err)?;
    let w = x.weights();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    rng.set_stream(3);
    let interp = Interpolation::default();
    let mut unit = 0.0_f64;
    let mut hom = 0.0_f64;
    for _ in 0..50 {
        let lam = rng.random_range(0.5..=4.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let rep = heisenberg_rep(lam)?;
        let g1 = random_element(&mut rng, 3, 0.5);
        let g2 = random_element(&mut rng, 3, 0.5);
        let c = rng.random_range(-0.5..=0.5);
        let f: Vec<Complex64> = (0..x.len())
            .map(|i| Complex64::new(gaussian(x.coords(i)[0], c, 0.6), 0.0))
            .collect();
        let nf = quad_norm(&f, &w);
        let (f1, _) = rep.act(&g1, x, &f, interp).map_err(err)?;
        unit = unit.max((quad_norm(&f1, &w) / nf - 1.0).abs());
        let (f2, _) = rep.act(&g2, x, &f, interp).map_err(err)?;
        let (f12, _) = rep.act(&g1, x, &f2, interp).map_err(err)?;
        let g12 = b.algebra.group_mul(&g1, &g2).map_err(err)?;
        let (direct, _) = rep.act(&g12, x, &f, interp).map_err(err)?;
        let diff: Vec<Complex64> = f12.iter().zip(&direct).map(|(a, b)| a - b).collect();
        hom = hom.max(quad_norm(&diff, &w) / nf);
    }
    Ok((unit, hom))
}

/// Heisenberg: unitarity and the homomorphism law of `act` on smooth functions.
pub fn representation_laws() -> CheckResult {
    let start = Instant::now();
    let out = (|| {
        let x = get_group("heisenberg").map_err(err)?.reference_grids.x;
        let (unit, hom) = representation_defects(&x)?;
        Ok((
            unit < 1e-3 && hom < 1e-3,
            format!("unitarity deviation {unit:.2e}, homomorphism defect {hom:.2e} (both < 1e-3) over 50 pairs"),
        ))
    })();
    finish(3, "representation laws", start, Some(10.0), out)
}

/// `act` against the closed-form oracle on heisenberg and the abelian presets.
pub fn oracle_agreement() -> CheckResult {
    let start = Instant::now();
    let out = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        rng.set_stream(4);
        let interp = Interpolation::default();
        let sigma: f64 = 0.6;
        let b = get_group("heisenberg").map_err(err)?;
        let x = b.reference_grids.x.clone();
        let h = x.axes[0].spacing();
        // cubic Lagrange: |f - p| <= (9/16) h^4 max|f''''| / 4!, Gaussian max|f''''| = 3 / sigma^4
        let bound = 9.0 / 16.0 * h.powi(4) * 3.0 / sigma.powi(4) / 24.0;
        let mut worst = 0.0_f64;
        for _ in 0..100 {
            let lam = rng.random_range(-4.0..=4.0);
            let rep = heisenberg_rep(lam)?;
            let g = random_element(&mut rng, 3, 1.0);
            let c = rng.random_range(-1.0..=1.0);
            let f: Vec<Complex64> = (0..x.len())
                .map(|i| Complex64::new(gaussian(x.coords(i)[0], c, sigma), 0.0))
                .collect();
            let (got, _) = rep.act(&g, &x, &f, interp).map_err(err)?;
            let o = oracle_representation(&b, &[lam], &g).map_err(err)?;
            for (i, v) in got.iter().enumerate() {
                let xi = x.coords(i);
                // the full 4-point stencil must lie on grid nodes
                let moved = xi[0] + o.shift[0];
                if moved < x.axes[0].lo() + h || moved > x.axes[0].hi() - h {
                    continue;
                }
                let want = Complex64::from_polar(gaussian(moved, c, sigma), o.phase(&xi));
                worst = worst.max((v - want).norm());
            }
        }
        let mut abelian = 0.0_f64;
        for name in ["abelian1", "abelian2"] {
            let b = get_group(name).map_err(err)?;
            let n = b.dim();
            for _ in 0..100 {
                let lam: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..=10.0)).collect();
                let l = b.dual_chart().map_err(err)?.embed(&lam).map_err(err)?;
                let rep = InducedRep::from_functional(Arc::clone(&b.algebra), &l, &b.flag)
                    .map_err(err)?;
                let g = random_element(&mut rng, n, 2.0);
                let (got, _) = rep
                    .act(&g, &GridSpec::point(), &[Complex64::new(1.0, 0.0)], interp)
                    .map_err(err)?;
                let o = oracle_representation(&b, &lam, &g).map_err(err)?;
                abelian = abelian.max((got[0] - Complex64::from_polar(1.0, o.phase(&[]))).norm());
            }
        }
        Ok((
            worst < bound && worst < 1e-4 && abelian < 1e-12,
            format!(
                "heisenberg max error {worst:.2e} (interpolation bound {bound:.2e}, < 1e-4); abelian {abelian:.1e}"
            ),
        ))
    })();
    finish(4, "oracle agreement", start, Some(10.0), out)
}

/// X-window settings used for the Plancherel check.
pub fn plancherel_window() -> XWindow {
    XWindow {
        edge_tol: 3e-3,
        ..XWindow::default()
    }
}

/// Base X grid of the Plancherel check: the reference box at spacing 1/8.
pub fn plancherel_x_grid() -> GridSpec {
    GridSpec::cube(1, 3.0, 49).expect("static grid")
}

/// Heisenberg: `||phi||^2 / int ||phi^||^2 |lambda|` over 10 random bumps.
pub fn plancherel_constancy() -> CheckResult {
    let start = Instant::now();
    let out = (|| {
        let b = get_group("heisenberg").map_err(err)?;
        let g = b.reference_grids.group.clone();
        let fam = family(&b, &b.reference_grids.lambda).map_err(err)?;
        let phis: Vec<SampledGroupFunction> = (0..10)
            .map(|i| FunctionFamily::random(SEED, i).sample(&g))
            .collect::<nilpw_core::Result<_>>()
            .map_err(err)?;
        let refs: Vec<&SampledGroupFunction> = phis.iter().collect();
        let nodes = hs_sweep(
            &refs,
            &fam,
            &plancherel_x_grid(),
            &TransformOptions::default(),
            &plancherel_window(),
        )
        .map_err(err)?;
        let mut ratios = Vec::new();
        let mut warnings = 0;
        let mut unconverged = 0;
        for (i, phi) in refs.iter().enumerate() {
            let r = plancherel_report(phi.l2_norm_sq(), &fam, &nodes, i).map_err(err)?;
            ratios.push(r.ratio.ok_or("vanishing transform mass")?);
            warnings += r.tail_warning as usize;
            unconverged = unconverged.max(r.unconverged);
        }
        let spread = relative_spread(&ratios);
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        Ok((
            spread < 0.02 && warnings == 0,
            format!(
                "stdev/mean {spread:.2e} (< 2e-2), mean ratio {mean:.5} (1/(4 pi^2) = {:.5}), \
                 tail warnings {warnings} (0), unconverged nodes {unconverged}",
                1.0 / (4.0 * std::f64::consts::PI.powi(2))
            ),
        ))
    })();
    finish(5, "plancherel constancy", start, Some(300.0), out)
}

/// Vanishing scans of random nonzero bumps and of the zero function.
pub fn paley_wiener() -> CheckResult {
    let start = Instant::now();
    let out = (|| {
        let opts = TransformOptions::default();
        let mut pairs = 0;
        let mut measure = 0.0_f64;
        let mut zero_ok = true;
        for name in ["abelian1", "abelian2", "heisenberg"] {
            let b = get_group(name).map_err(err)?;
            let g = b.reference_grids.group.clone();
            let x = b.reference_grids.x.clone();
            let fam = family(&b, &b.reference_grids.lambda).map_err(err)?;
            let phis: Vec<SampledGroupFunction> = (0..20)
                .map(|i| FunctionFamily::random(SEED, 100 + i).sample(&g))
                .collect::<nilpw_core::Result<_>>()
                .map_err(err)?;
            let refs: Vec<&SampledGroupFunction> = phis.iter().collect();
            let (hs, kmax) = hs_norms(&refs, &fam, &x, &opts).map_err(err)?;
            for (b_i, phi) in phis.iter().enumerate() {
                let rep = pw_scan_from_norms(
                    phi.is_zero(),
                    &hs[b_i],
                    kmax[b_i],
                    &fam,
                    DEFAULT_PW_EPSILON,
                )
                .map_err(err)?;
                pairs += rep.adjacent_pairs;
                measure = measure.max(rep.vanishing_measure);
            }
            let zero = SampledGroupFunction::zero(&g);
            let (hs0, k0) = hs_norms(&[&zero], &fam, &x, &opts).map_err(err)?;
            let rep0 =
                pw_scan_from_norms(true, &hs0[0], k0[0], &fam, DEFAULT_PW_EPSILON).map_err(err)?;
            let generic = (0..fam.len()).filter(|&l| fam.is_generic(l)).count();
            zero_ok &= rep0.verdict == Verdict::ZeroFunction
                && rep0.rows.iter().filter(|r| r.below).count() == generic;
        }
        Ok((
            pairs == 0 && measure == 0.0 && zero_ok,
            format!(
                "60 nonzero bumps: vanishing measure {measure:e}, adjacent pairs {pairs} (0); zero function fully vanishing: {zero_ok}"
            ),
        ))
    })();
    finish(6, "paley-wiener contrapositive", start, Some(600.0), out)
}

fn random_skew(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.random_range(-1.0..=1.0);
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
    }
    m
}

/// BCH associativity, Jacobi identity, Pfaffian against determinant.
pub fn algebra_layer() -> CheckResult {
    let start = Instant::now();
    let out = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        rng.set_stream(7);
        let mut assoc = 0.0_f64;
        let mut jacobi = 0.0_f64;
        for name in nilpw_core::catalog::PRESETS {
            let b = get_group(name).map_err(err)?;
            let n = b.dim();
            jacobi = jacobi.max(b.algebra.jacobi_residual());
            for _ in 0..1000 {
                let a = random_element(&mut rng, n, 1.0);
                let c = random_element(&mut rng, n, 1.0);
                let d = random_element(&mut rng, n, 1.0);
                let left = b
                    .algebra
                    .group_mul(&b.algebra.group_mul(&a, &c).map_err(err)?, &d)
                    .map_err(err)?;
                let right = b
                    .algebra
                    .group_mul(&a, &b.algebra.group_mul(&c, &d).map_err(err)?)
                    .map_err(err)?;
                for (p, q) in left.exp_coords.iter().zip(&right.exp_coords) {
                    assoc = assoc.max((p - q).abs());
                }
            }
        }
        let mut pf_rel = 0.0_f64;
        for n in [4, 6] {
            for _ in 0..100 {
                let m = random_skew(&mut rng, n);
                let pf = pfaffian(&m).map_err(err)?;
                let det = m.clone().determinant();
                pf_rel = pf_rel.max((pf * pf - det).abs() / det.abs().max(f64::MIN_POSITIVE));
            }
        }
        Ok((
            assoc < 1e-10 && jacobi < 1e-12 && pf_rel < 1e-10,
            format!(
                "associativity defect {assoc:.1e} (< 1e-10), Jacobi residual {jacobi:.1e} (< 1e-12), \
                 Pf^2 vs det {pf_rel:.1e} (< 1e-10)"
            ),
        ))
    })();
    finish(7, "algebra layer", start, Some(5.0), out)
}

/// Engel: polarization invariants and the density against its closed form.
pub fn engel_coverage() -> CheckResult {
    let start = Instant::now();
    let out = (|| {
        let b = get_group("engel").map_err(err)?;
        let chart = b.dual_chart().map_err(err)?;
        let closed = chart.closed_form.ok_or("engel chart has no closed form")?;
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        rng.set_stream(8);
        let mut failures = 0;
        let mut worst_res = 0.0_f64;
        let mut dens = 0.0_f64;
        let mut tested = 0;
        while tested < 100 {
            let lam: [f64; 2] = [rng.random_range(-3.0..=3.0), rng.random_range(-3.0..=3.0)];
            if lam[0].abs() < 0.05 {
                continue;
            }
            tested += 1;
            let l = chart.embed(&lam).map_err(err)?;
            let p = vergne_polarization(&b.algebra, &l, &b.flag).map_err(err)?;
            let c = check_polarization(&b.algebra, &p).map_err(err)?;
            if !c.passes(1e-10) {
                failures += 1;
            }
            worst_res = worst_res
                .max(c.subalgebra_residual)
                .max(c.subordinate_residual);
            let d = plancherel_density(&b.algebra, chart, &lam).map_err(err)?;
            let want = closed.eval(&lam);
            dens = dens.max((d.value - want).abs() / want);
        }
        Ok((
            failures == 0 && dens < 1e-12,
            format!(
                "{failures} polarization failures in 100 (worst residual {worst_res:.1e}); \
                 density vs |lambda_1| relative {dens:.1e} (< 1e-12)"
            ),
        ))
    })();
    finish(8, "engel coverage", start, Some(5.0), out)
}

fn small_run_config(dir: &std::path::Path) -> RunConfig {
    let mut c = RunConfig::load(
        None,
        &[
            "group=heisenberg".into(),
            "grids.group.axes=[{\"center\":0,\"half_width\":2,\"points\":17},{\"center\":0,\"half_width\":2,\"points\":17},{\"center\":0,\"half_width\":2,\"points\":17}]".into(),
            "grids.x.axes.0.points=33".into(),
            "grids.lambda.axes.0.points=12".into(),
        ],
    )
    .expect("static config");
    c.function = FunctionSource::Family(FunctionFamily::random(SEED, 0));
    c.output = dir.to_path_buf();
    c
}

fn run_bodies(
    cfg: &RunConfig,
    opts: RunOptions,
    interrupt_after: Option<usize>,
) -> Result<Vec<String>, String> {
    let mut bodies = Vec::new();
    for (cmd, file) in [
        (Command::PwScan, "pw_scan.csv"),
        (Command::Kernel, "kernel.csv"),
    ] {
        if let Some(k) = interrupt_after {
            let partial = execute(
                cmd,
                cfg.clone(),
                RunOptions {
                    workers: 1,
                    max_slots: Some(k),
                },
            )
            .map_err(err)?;
            if !matches!(partial, Outcome::Partial { .. }) {
                return Err(format!("{} did not stop after {k} slots", cmd.name()));
            }
        }
        match execute(cmd, cfg.clone(), opts).map_err(err)? {
            Outcome::Done { .. } => {}
            Outcome::Partial { done, total } => {
                return Err(format!("{} stopped at {done}/{total}", cmd.name()))
            }
        }
        let text = std::fs::read_to_string(cfg.output.join(file)).map_err(err)?;
        bodies.push(body_of(&text));
    }
    Ok(bodies)
}

/// Byte-identical report bodies across repeated, multi-worker and resumed runs.
pub fn determinism(workers: usize) -> CheckResult {
    let start = Instant::now();
    let out = (|| {
        let root = tempfile::tempdir().map_err(err)?;
        let one = RunOptions {
            workers: 1,
            max_slots: None,
        };
        let many = RunOptions {
            workers,
            max_slots: None,
        };
        let a = run_bodies(&small_run_config(&root.path().join("a")), one, None)?;
        let b = run_bodies(&small_run_config(&root.path().join("b")), one, None)?;
        let c = run_bodies(&small_run_config(&root.path().join("c")), many, None)?;
        let d = run_bodies(&small_run_config(&root.path().join("d")), many, Some(5))?;
        let repeat = a == b;
        let threads = a == c;
        let resumed = a == d;
        Ok((
            repeat && threads && resumed,
            format!(
                "repeat identical: {repeat}; 1 vs {workers} workers identical: {threads}; \
                 interrupted at 5 slots + resumed identical: {resumed}"
            ),
        ))
    })();
    finish(9, "determinism and resumability", start, None, out)
}
