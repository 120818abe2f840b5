//! Subcommands. Lambda-parallel work goes through `SlotStore`, so every
//! report is assembled from per-slot results in slot order.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use nilpw_core::catalog::{OracleKind, PRESETS};
use nilpw_core::orbits::{max_orbit_dimension, ClosedFormDensity};
use nilpw_core::transform::{
    direct_operators, hs_at_lambda, invertibility_probe, kernel_slice, plancherel_report,
    pw_scan_from_norms, Coverage, HsNode, KernelTensor, OperatorMatrix, ProbeRow,
};
use nilpw_core::{get_group, GridSpec};

use crate::checks;
use crate::config::{RunConfig, Setup};
use crate::error::{CliError, CliResult};
use crate::report::{emit, num, CsvReport};
use crate::slots::{SlotRun, SlotStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Catalog,
    Fourier,
    Kernel,
    Plancherel,
    PwScan,
    ProbeInvert,
    Selftest,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Catalog => "catalog",
            Command::Fourier => "fourier",
            Command::Kernel => "kernel",
            Command::Plancherel => "plancherel",
            Command::PwScan => "pw-scan",
            Command::ProbeInvert => "probe-invert",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub workers: usize,
    /// stop after this many newly computed lambda slots (the rest resume later)
    pub max_slots: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            max_slots: None,
        }
    }
}

#[derive(Debug)]
pub enum Outcome {
    Done {
        files: Vec<PathBuf>,
        summary: String,
    },
    Partial {
        done: usize,
        total: usize,
    },
}

pub fn execute(cmd: Command, config: RunConfig, opts: RunOptions) -> CliResult<Outcome> {
    match cmd {
        Command::Catalog => catalog(&config.output),
        Command::Selftest => selftest(opts),
        _ => {
            let setup = Setup::new(config)?;
            std::fs::create_dir_all(&setup.config.output)?;
            match cmd {
                Command::Fourier => fourier(&setup, opts),
                Command::Kernel => kernel(&setup, opts),
                Command::Plancherel => plancherel(&setup, opts),
                Command::PwScan => pw_scan(&setup, opts),
                Command::ProbeInvert => probe(&setup, opts),
                Command::Catalog | Command::Selftest => unreachable!(),
            }
        }
    }
}

/// Column-major complex matrix, split so that JSON round-trips exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct MatrixSlot {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl MatrixSlot {
    fn from_entries(n: usize, v: impl IntoIterator<Item = Complex64>) -> Self {
        let (re, im) = v.into_iter().map(|c| (c.re, c.im)).unzip();
        Self { n, re, im }
    }

    fn from_op(op: &OperatorMatrix) -> Self {
        Self::from_entries(op.entries.nrows(), op.entries.iter().copied())
    }

    fn to_op(&self, lambda: Vec<f64>, x_grid: &GridSpec) -> OperatorMatrix {
        OperatorMatrix {
            lambda,
            x_grid: x_grid.clone(),
            entries: DMatrix::from_iterator(
                self.n,
                self.n,
                self.re
                    .iter()
                    .zip(&self.im)
                    .map(|(&r, &i)| Complex64::new(r, i)),
            ),
        }
    }
}

fn lambda_columns(k: usize) -> Vec<(String, String)> {
    (1..=k)
        .map(|i| (format!("lambda_{i}"), "1/coord".to_string()))
        .collect()
}

fn report(lambda_dim: usize, rest: &[(&str, &str)]) -> CsvReport {
    let mut r = CsvReport::new(rest);
    let mut cols = lambda_columns(lambda_dim);
    cols.append(&mut r.columns);
    r.columns = cols;
    r
}

fn lambda_cells(l: &[f64]) -> Vec<String> {
    l.iter().map(|&v| num(v)).collect()
}

fn header(r: &mut CsvReport, cmd: Command, setup: &Setup) {
    r.meta("command", cmd.name())
        .meta("group", &setup.bundle.name)
        .meta("config", setup.config.fingerprint());
}

fn slots(setup: &Setup, cmd: Command) -> CliResult<SlotStore> {
    SlotStore::open(
        &setup.config.output,
        cmd.name(),
        setup.config.fingerprint(),
        setup.family.len(),
    )
}

fn direct_at(setup: &Setup, l: usize) -> CliResult<OperatorMatrix> {
    let sub = setup.family.subset(&[l]);
    let out = direct_operators(
        &[&setup.functions[0]],
        &sub,
        &setup.x_grid,
        &setup.config.transform,
    )?;
    Ok(out.operators[0][0].clone())
}

fn fourier(setup: &Setup, opts: RunOptions) -> CliResult<Outcome> {
    let store = slots(setup, Command::Fourier)?;
    let ops: Vec<MatrixSlot> = match store.run(opts.workers, opts.max_slots, |l| {
        Ok(MatrixSlot::from_op(&direct_at(setup, l)?))
    })? {
        SlotRun::Complete(v) => v,
        SlotRun::Partial { done, total } => return Ok(Outcome::Partial { done, total }),
    };
    let k = setup.lambda_grid.ndim();
    let r_dim = setup.x_grid.ndim();
    let mut cols: Vec<(String, String)> = Vec::new();
    cols.push(("row".into(), "index".into()));
    cols.push(("col".into(), "index".into()));
    for i in 1..=r_dim {
        cols.push((format!("x1_{i}"), "coord".into()));
    }
    for i in 1..=r_dim {
        cols.push((format!("x_{i}"), "coord".into()));
    }
    cols.push(("re".into(), "-".into()));
    cols.push(("im".into(), "-".into()));
    let colrefs: Vec<(&str, &str)> = cols.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let mut r = report(k, &colrefs);
    header(&mut r, Command::Fourier, setup);
    r.meta(
        "layout",
        "entries M[row, col] of the operator acting on X-grid samples",
    );
    let xs = setup.x_grid.all_coords();
    for (l, m) in ops.iter().enumerate() {
        let lam = lambda_cells(setup.family.lambda(l));
        for i in 0..m.n {
            for j in 0..m.n {
                let mut row = lam.clone();
                row.push(i.to_string());
                row.push(j.to_string());
                row.extend(xs[i].iter().map(|&v| num(v)));
                row.extend(xs[j].iter().map(|&v| num(v)));
                row.push(num(m.re[j * m.n + i]));
                row.push(num(m.im[j * m.n + i]));
                r.push(row);
            }
        }
    }
    let path = setup.config.output.join("fourier.csv");
    r.write(&path)?;
    Ok(Outcome::Done {
        files: vec![path],
        summary: format!("{} operators of size {}", ops.len(), setup.x_grid.len()),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct KernelSlot {
    direct: MatrixSlot,
    kernel: MatrixSlot,
    coverage: Coverage,
}

fn kernel(setup: &Setup, opts: RunOptions) -> CliResult<Outcome> {
    let store = slots(setup, Command::Kernel)?;
    let nx = setup.x_grid.len();
    let slots: Vec<KernelSlot> = match store.run(opts.workers, opts.max_slots, |l| {
        let direct = MatrixSlot::from_op(&direct_at(setup, l)?);
        let (mut k, coverage) = kernel_slice(
            &[&setup.functions[0]],
            &setup.family,
            l,
            &setup.x_grid,
            &setup.config.transform,
        )?;
        // stored [x1][x] row-major = column-major of the transpose; keep as entries
        let vals = k.remove(0);
        let kernel =
            MatrixSlot::from_entries(nx, (0..nx * nx).map(|c| vals[(c % nx) * nx + c / nx]));
        Ok(KernelSlot {
            direct,
            kernel,
            coverage,
        })
    })? {
        SlotRun::Complete(v) => v,
        SlotRun::Partial { done, total } => return Ok(Outcome::Partial { done, total }),
    };
    let mut values = Vec::with_capacity(slots.len() * nx * nx);
    let mut coverage = Coverage::default();
    for s in &slots {
        coverage.add(&s.coverage);
        for x1 in 0..nx {
            for x in 0..nx {
                let c = x * nx + x1;
                values.push(Complex64::new(s.kernel.re[c], s.kernel.im[c]));
            }
        }
    }
    let tensor = KernelTensor {
        lambda_grid: setup.lambda_grid.clone(),
        x_grid: setup.x_grid.clone(),
        values,
        generic: (0..setup.family.len())
            .map(|l| setup.family.is_generic(l))
            .collect(),
        coverage,
    };
    let tol = setup.config.route_tol;
    let mut r = report(
        setup.lambda_grid.ndim(),
        &[
            ("hs_direct", "-"),
            ("hs_kernel", "-"),
            ("rel_error", "-"),
            ("within_tolerance", "bool"),
        ],
    );
    header(&mut r, Command::Kernel, setup);
    r.meta("tolerance", num(tol));
    r.meta("coverage_evaluated", coverage.evaluated);
    r.meta("coverage_in_support", coverage.in_support);
    let mut worst = 0.0_f64;
    for (l, s) in slots.iter().enumerate() {
        let lam = setup.family.lambda(l).to_vec();
        let d = s.direct.to_op(lam.clone(), &setup.x_grid);
        let k = tensor.operator_at(l);
        let hd = d.hs_norm();
        let err = if hd > 0.0 {
            d.hs_distance(&k) / hd
        } else {
            f64::NAN
        };
        if err.is_finite() {
            worst = worst.max(err);
        }
        let mut row = lambda_cells(&lam);
        row.extend([
            num(hd),
            num(k.hs_norm()),
            num(err),
            (err.is_nan() || err < tol).to_string(),
        ]);
        r.push(row);
    }
    let out = &setup.config.output;
    let path = out.join("kernel.csv");
    r.write(&path)?;
    let mut files = vec![path];
    if setup.config.dump_kernel {
        let bin = out.join("kernel.bin");
        let side = out.join("kernel.json");
        tensor.write_binary(&bin, &side)?;
        files.extend([bin, side]);
    }
    Ok(Outcome::Done {
        files,
        summary: format!("max route error {} (tolerance {})", num(worst), num(tol)),
    })
}

fn plancherel(setup: &Setup, opts: RunOptions) -> CliResult<Outcome> {
    let store = slots(setup, Command::Plancherel)?;
    let phis = setup.function_refs();
    let nodes: Vec<HsNode> = match store.run(opts.workers, opts.max_slots, |l| {
        Ok(hs_at_lambda(
            &phis,
            &setup.family,
            l,
            &setup.x_grid,
            &setup.config.transform,
            &setup.config.window,
        )?)
    })? {
        SlotRun::Complete(v) => v,
        SlotRun::Partial { done, total } => return Ok(Outcome::Partial { done, total }),
    };
    let reports = phis
        .iter()
        .enumerate()
        .map(|(b, phi)| plancherel_report(phi.l2_norm_sq(), &setup.family, &nodes, b))
        .collect::<nilpw_core::Result<Vec<_>>>()?;
    let ratios: Vec<f64> = reports.iter().filter_map(|r| r.ratio).collect();
    let spread = checks::relative_spread(&ratios);

    let mut r = CsvReport::new(&[
        ("function", "index"),
        ("norm_sq", "-"),
        ("transform_mass", "-"),
        ("ratio", "-"),
        ("tail_fraction", "-"),
        ("tail_warning", "bool"),
        ("unconverged_nodes", "count"),
    ]);
    header(&mut r, Command::Plancherel, setup);
    r.meta("ratio_stdev_over_mean", num(spread));
    for (b, p) in reports.iter().enumerate() {
        r.push(vec![
            b.to_string(),
            num(p.norm_sq),
            num(p.transform_mass),
            p.ratio.map(num).unwrap_or_else(|| "nan".into()),
            num(p.tail_fraction),
            p.tail_warning.to_string(),
            p.unconverged.to_string(),
        ]);
    }
    let out = &setup.config.output;
    let path = out.join("plancherel.csv");
    r.write(&path)?;

    let mut cols = vec![
        ("density".to_string(), "-".to_string()),
        ("weight".to_string(), "1/coord^k".to_string()),
        ("generic".to_string(), "bool".to_string()),
        ("converged".to_string(), "bool".to_string()),
    ];
    for i in 1..=setup.x_grid.ndim() {
        cols.push((format!("x_half_width_{i}"), "coord".into()));
    }
    for b in 0..phis.len() {
        cols.push((format!("hs_sq_{b}"), "-".into()));
    }
    let colrefs: Vec<(&str, &str)> = cols.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let mut n = report(setup.lambda_grid.ndim(), &colrefs);
    header(&mut n, Command::Plancherel, setup);
    for (l, node) in nodes.iter().enumerate() {
        let mut row = lambda_cells(setup.family.lambda(l));
        row.push(num(setup.family.density(l)));
        row.push(num(setup.lambda_grid.weight(l)));
        row.push(setup.family.is_generic(l).to_string());
        row.push(node.converged.to_string());
        row.extend(node.half_width.iter().map(|&v| num(v)));
        row.extend(node.hs_sq.iter().map(|&v| num(v)));
        n.push(row);
    }
    let npath = out.join("plancherel_nodes.csv");
    n.write(&npath)?;
    Ok(Outcome::Done {
        files: vec![path, npath],
        summary: format!(
            "{} functions, ratio stdev/mean {}, tail warnings {}",
            reports.len(),
            num(spread),
            reports.iter().filter(|r| r.tail_warning).count()
        ),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct NormSlot {
    hs_sq: f64,
    k_max: f64,
}

fn pw_scan(setup: &Setup, opts: RunOptions) -> CliResult<Outcome> {
    let store = slots(setup, Command::PwScan)?;
    let phi = &setup.functions[0];
    let norms: Vec<NormSlot> = match store.run(opts.workers, opts.max_slots, |l| {
        let (k, _) = kernel_slice(
            &[phi],
            &setup.family,
            l,
            &setup.x_grid,
            &setup.config.transform,
        )?;
        let w = setup.x_grid.weights();
        let nx = w.len();
        let mut hs_sq = 0.0;
        let mut k_max = 0.0_f64;
        for (c, v) in k[0].iter().enumerate() {
            hs_sq += v.norm_sqr() * w[c / nx] * w[c % nx];
            k_max = k_max.max(v.norm());
        }
        Ok(NormSlot { hs_sq, k_max })
    })? {
        SlotRun::Complete(v) => v,
        SlotRun::Partial { done, total } => return Ok(Outcome::Partial { done, total }),
    };
    let hs: Vec<f64> = norms.iter().map(|n| n.hs_sq).collect();
    let k_max = norms.iter().map(|n| n.k_max).fold(0.0, f64::max);
    let rep = pw_scan_from_norms(
        phi.is_zero(),
        &hs,
        k_max,
        &setup.family,
        setup.config.epsilon,
    )?;
    let mut r = report(
        setup.lambda_grid.ndim(),
        &[
            ("hs_norm", "-"),
            ("below_epsilon", "bool"),
            ("generic", "bool"),
        ],
    );
    header(&mut r, Command::PwScan, setup);
    r.meta("epsilon_relative", num(setup.config.epsilon));
    r.meta("epsilon", num(rep.epsilon));
    r.meta("k_max", num(rep.k_max));
    r.meta("vanishing_measure", num(rep.vanishing_measure));
    r.meta("adjacent_pairs", rep.adjacent_pairs);
    r.meta("verdict", rep.verdict.label());
    for row in &rep.rows {
        let mut cells = lambda_cells(&row.lambda);
        cells.extend([num(row.hs), row.below.to_string(), row.generic.to_string()]);
        r.push(cells);
    }
    let path = setup.config.output.join("pw_scan.csv");
    r.write(&path)?;
    Ok(Outcome::Done {
        files: vec![path],
        summary: format!(
            "verdict: {}; vanishing measure {}",
            rep.verdict.label(),
            num(rep.vanishing_measure)
        ),
    })
}

fn probe(setup: &Setup, opts: RunOptions) -> CliResult<Outcome> {
    let store = slots(setup, Command::ProbeInvert)?;
    let rows: Vec<ProbeRow> = match store.run(opts.workers, opts.max_slots, |l| {
        let op = direct_at(setup, l)?;
        Ok(invertibility_probe(&[op], setup.config.probe_tol).remove(0))
    })? {
        SlotRun::Complete(v) => v,
        SlotRun::Partial { done, total } => return Ok(Outcome::Partial { done, total }),
    };
    let mut r = report(
        setup.lambda_grid.ndim(),
        &[
            ("sigma_min", "-"),
            ("sigma_max", "-"),
            ("rank", "count"),
            ("near_singular", "bool"),
        ],
    );
    header(&mut r, Command::ProbeInvert, setup);
    r.meta(
        "note",
        "exploratory; singular values of a truncated discretization",
    );
    for p in &rows {
        let mut cells = lambda_cells(&p.lambda);
        cells.extend([
            num(p.sigma_min),
            num(p.sigma_max),
            p.rank.to_string(),
            p.near_singular.to_string(),
        ]);
        r.push(cells);
    }
    let path = setup.config.output.join("probe_invert.csv");
    r.write(&path)?;
    Ok(Outcome::Done {
        files: vec![path],
        summary: format!(
            "{} of {} lambda points near singular",
            rows.iter().filter(|p| p.near_singular).count(),
            rows.len()
        ),
    })
}

fn catalog(out: &Path) -> CliResult<Outcome> {
    let mut r = CsvReport::new(&[
        ("name", "-"),
        ("dim", "count"),
        ("step", "count"),
        ("max_orbit_dim", "count"),
        ("chart_dim", "count"),
        ("chart_embedding", "-"),
        ("density", "-"),
        ("oracle", "-"),
    ]);
    r.meta("command", "catalog");
    for name in PRESETS {
        let b = get_group(name)?;
        let chart = b.dual_chart()?;
        let embed: Vec<String> = chart
            .embed_matrix
            .iter()
            .map(|row| row.iter().map(|&v| num(v)).collect::<Vec<_>>().join(" "))
            .collect();
        r.push(vec![
            name.to_string(),
            b.dim().to_string(),
            b.algebra.step().to_string(),
            max_orbit_dimension(&b.algebra)?.to_string(),
            chart.embed_matrix.len().to_string(),
            embed.join("; "),
            chart
                .closed_form
                .as_ref()
                .map(|c| match c {
                    ClosedFormDensity::Unit => "1".to_string(),
                    ClosedFormDensity::AbsCoordinate { index } => format!("|lambda_{}|", index + 1),
                })
                .unwrap_or_else(|| "pfaffian".into()),
            match b.oracle {
                Some(OracleKind::Character) => "character",
                Some(OracleKind::Schrodinger) => "schrodinger",
                None => "none",
            }
            .to_string(),
        ]);
    }
    std::fs::create_dir_all(out)?;
    let path = out.join("catalog.csv");
    r.write(&path)?;
    emit(&r.body());
    Ok(Outcome::Done {
        files: vec![path],
        summary: format!("{} presets", PRESETS.len()),
    })
}

fn selftest(opts: RunOptions) -> CliResult<Outcome> {
    let results = checks::run_all(opts.workers);
    let failed = results.iter().filter(|r| !r.passed).count();
    for r in &results {
        emit(&format!("{}\n", r.line()));
    }
    if failed > 0 {
        return Err(CliError::ChecksFailed {
            failed,
            total: results.len(),
        });
    }
    Ok(Outcome::Done {
        files: Vec::new(),
        summary: format!("all {} checks passed", results.len()),
    })
}
