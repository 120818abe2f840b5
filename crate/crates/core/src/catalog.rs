//! Curated groups: structure constants, flags, dual charts, reference grids
//! and closed-form representation oracles. User groups load from JSON.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Axis, GridSpec};
use crate::lie::{GroupElement, StructureConstants};
use crate::orbits::{
    check_polarization, max_orbit_dimension, vergne_polarization, ClosedFormDensity, DualChart,
};

pub const PRESETS: [&str; 4] = ["abelian1", "abelian2", "heisenberg", "engel"];

pub mod presets {
    use crate::lie::StructureConstants;

    /// `R^n` with zero bracket.
    pub fn abelian(n: usize) -> StructureConstants {
        StructureConstants::from_brackets(format!("abelian{n}"), n, &[]).expect("abelian preset")
    }

    /// Basis X, Y, Z with `[X, Y] = Z`.
    pub fn heisenberg() -> StructureConstants {
        StructureConstants::from_brackets("heisenberg", 3, &[(0, 1, vec![0.0, 0.0, 1.0])])
            .expect("heisenberg preset")
    }

    /// Basis X1..X4 with `[X1, X2] = X3`, `[X1, X3] = X4`.
    pub fn engel() -> StructureConstants {
        StructureConstants::from_brackets(
            "engel",
            4,
            &[
                (0, 1, vec![0.0, 0.0, 1.0, 0.0]),
                (0, 2, vec![0.0, 0.0, 0.0, 1.0]),
            ],
        )
        .expect("engel preset")
    }
}

/// Default grids for experiments on a group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceGrids {
    pub group: GridSpec,
    pub x: GridSpec,
    pub lambda: GridSpec,
}

/// Which closed form describes `pi_lambda(g)` on `L^2(R^{n-m})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    /// `X` is a point and `pi_lambda(g) = exp(i <l(lambda), g>)`
    Character,
    /// `[pi(x', y', t') f](xi) = exp(i lambda (t' + x' y' / 2 + xi y')) f(xi + x')`
    Schrodinger,
}

/// `[pi(g) f](xi) = exp(i (phase_const + phase_linear . xi)) f(xi + shift)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleAction {
    pub shift: Vec<f64>,
    pub phase_const: f64,
    pub phase_linear: Vec<f64>,
}

impl OracleAction {
    pub fn phase(&self, xi: &[f64]) -> f64 {
        self.phase_const
            + self
                .phase_linear
                .iter()
                .zip(xi)
                .map(|(a, b)| a * b)
                .sum::<f64>()
    }
}

#[derive(Debug, Clone)]
pub struct GroupBundle {
    pub name: String,
    pub algebra: Arc<StructureConstants>,
    /// `flag[j]` spans `g_{j+1} / g_j`
    pub flag: Vec<Vec<f64>>,
    pub chart: Option<DualChart>,
    pub reference_grids: ReferenceGrids,
    pub oracle: Option<OracleKind>,
}

impl GroupBundle {
    /// Checks flag, chart and a polarization at a chart point; run for every bundle.
    pub fn validate(&self) -> Result<()> {
        let sc = &self.algebra;
        let n = sc.dim();
        if sc.jacobi_residual() > 1e-12 {
            return Err(Error::InvalidAlgebra(format!(
                "Jacobi residual {:.3e}",
                sc.jacobi_residual()
            )));
        }
        if self.flag.len() != n {
            return Err(Error::InvalidInput(format!(
                "flag has {} vectors, algebra dimension is {n}",
                self.flag.len()
            )));
        }
        sc.check_ideal_flag(&self.flag)?;
        if let Some(chart) = &self.chart {
            chart.validate(n)?;
            let orbit = max_orbit_dimension(sc)?;
            if chart.k + orbit != n {
                return Err(Error::InvalidInput(format!(
                    "chart has k = {} but n - max orbit dimension = {}",
                    chart.k,
                    n - orbit
                )));
            }
            let probe: Vec<f64> = (0..chart.k).map(|i| 0.7 + 0.3 * i as f64).collect();
            let l = chart.embed(&probe)?;
            let pol = vergne_polarization(sc, &l, &self.flag)?;
            if !check_polarization(sc, &pol)?.passes(1e-10) {
                return Err(Error::Polarization(
                    "polarization invariants fail at a chart point".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn dual_chart(&self) -> Result<&DualChart> {
        self.chart
            .as_ref()
            .ok_or_else(|| Error::NoChart(self.name.clone()))
    }

    /// Reads an algebra file and, optionally, a chart file.
    pub fn from_files(algebra: &Path, chart: Option<&Path>) -> Result<Self> {
        let file: AlgebraFile = serde_json::from_str(&std::fs::read_to_string(algebra)?)?;
        let chart = match chart {
            Some(p) => Some(serde_json::from_str::<DualChart>(
                &std::fs::read_to_string(p)?,
            )?),
            None => None,
        };
        file.into_bundle(chart)
    }
}

/// Algebra definition file: nonzero upper-triangular brackets, 0-based.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub name: String,
    pub dim: usize,
    pub brackets: Vec<(usize, usize, Vec<f64>)>,
    /// Optional full flag of ideals; the refined lower central series is used when absent.
    #[serde(default)]
    pub flag: Option<Vec<Vec<f64>>>,
}

impl AlgebraFile {
    pub fn into_bundle(self, chart: Option<DualChart>) -> Result<GroupBundle> {
        let sc = StructureConstants::from_brackets(self.name.clone(), self.dim, &self.brackets)?;
        let flag = match self.flag {
            Some(f) => {
                if let Some(v) = f.iter().find(|v| v.len() != self.dim) {
                    return Err(Error::DimensionMismatch {
                        expected: self.dim,
                        found: v.len(),
                    });
                }
                f
            }
            None => sc.lower_central_series().flag.clone(),
        };
        let n = self.dim;
        let k = chart.as_ref().map_or(n, |c| c.k);
        let bundle = GroupBundle {
            name: self.name,
            algebra: Arc::new(sc),
            flag,
            chart,
            reference_grids: default_grids(n, n.saturating_sub(k)),
            oracle: None,
        };
        bundle.validate()?;
        Ok(bundle)
    }
}

fn default_grids(n: usize, orbit_dim: usize) -> ReferenceGrids {
    let k = n - orbit_dim;
    ReferenceGrids {
        group: GridSpec::cube(n, 2.0, 33).expect("static grid"),
        x: GridSpec::cube(orbit_dim / 2, 3.0, 65).expect("static grid"),
        lambda: GridSpec::new_dual(vec![Axis::new(0.0, 6.0, 32); k]).expect("static grid"),
    }
}

/// Looks up a preset by name.
pub fn get_group(name: &str) -> Result<GroupBundle> {
    let bundle = match name {
        "abelian1" | "abelian2" => {
            let n = if name == "abelian1" { 1 } else { 2 };
            let embed = (0..n)
                .map(|r| (0..n).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
                .collect();
            let group = if n == 1 {
                GridSpec::cube(1, 2.0, 257)?
            } else {
                GridSpec::cube(2, 2.0, 65)?
            };
            let lambda = if n == 1 {
                GridSpec::new_dual(vec![Axis::new(0.0, 10.0, 33)])?
            } else {
                GridSpec::new_dual(vec![Axis::new(0.0, 6.0, 16); 2])?
            };
            build(
                presets::abelian(n),
                DualChart::new(embed, Some(ClosedFormDensity::Unit)),
                ReferenceGrids {
                    group,
                    x: GridSpec::point(),
                    lambda,
                },
                Some(OracleKind::Character),
            )
        }
        "heisenberg" => build(
            presets::heisenberg(),
            DualChart::new(
                vec![vec![0.0, 0.0, 1.0]],
                Some(ClosedFormDensity::AbsCoordinate { index: 0 }),
            ),
            default_grids(3, 2),
            Some(OracleKind::Schrodinger),
        ),
        "engel" => build(
            presets::engel(),
            DualChart::new(
                vec![vec![0.0, 0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0, 0.0]],
                Some(ClosedFormDensity::AbsCoordinate { index: 0 }),
            ),
            ReferenceGrids {
                group: GridSpec::cube(4, 2.0, 17)?,
                x: GridSpec::cube(1, 3.0, 33)?,
                lambda: GridSpec::new_dual(vec![
                    Axis::from_range(0.5, 3.0, 6),
                    Axis::from_range(-2.0, 2.0, 6),
                ])?,
            },
            None,
        ),
        _ => {
            return Err(Error::UnknownGroup {
                name: name.to_string(),
                available: PRESETS.join(", "),
            })
        }
    };
    bundle.validate()?;
    Ok(bundle)
}

fn build(
    sc: StructureConstants,
    chart: DualChart,
    reference_grids: ReferenceGrids,
    oracle: Option<OracleKind>,
) -> GroupBundle {
    GroupBundle {
        name: sc.name().to_string(),
        flag: sc.lower_central_series().flag.clone(),
        algebra: Arc::new(sc),
        chart: Some(chart),
        reference_grids,
        oracle,
    }
}

/// Closed form of `pi_lambda(g)`, derived by hand from this crate's section and
/// factorization conventions (see `docs/heisenberg_oracle.md`).
pub fn oracle_representation(
    bundle: &GroupBundle,
    lambda: &[f64],
    g: &GroupElement,
) -> Result<OracleAction> {
    let n = bundle.dim();
    if g.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g.dim(),
        });
    }
    match bundle.oracle {
        Some(OracleKind::Character) => {
            let l = bundle.dual_chart()?.embed(lambda)?;
            Ok(OracleAction {
                shift: Vec::new(),
                phase_const: l.pair(&g.exp_coords),
                phase_linear: Vec::new(),
            })
        }
        Some(OracleKind::Schrodinger) => {
            if lambda.len() != 1 {
                return Err(Error::DimensionMismatch {
                    expected: 1,
                    found: lambda.len(),
                });
            }
            let lam = lambda[0];
            let (x, y, t) = (g.exp_coords[0], g.exp_coords[1], g.exp_coords[2]);
            Ok(OracleAction {
                shift: vec![x],
                phase_const: lam * (t + 0.5 * x * y),
                phase_linear: vec![lam * y],
            })
        }
        None => Err(Error::NoOracle(bundle.name.clone())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_load_and_validate() {
        for name in PRESETS {
            let b = get_group(name).unwrap();
            b.validate().unwrap();
        }
    }

    #[test]
    fn preset_shapes() {
        let a = get_group("abelian1").unwrap();
        assert_eq!((a.dim(), a.dual_chart().unwrap().k), (1, 1));
        let h = get_group("heisenberg").unwrap();
        assert_eq!(
            (h.dim(), h.algebra.step(), h.dual_chart().unwrap().k),
            (3, 2, 1)
        );
        let e = get_group("engel").unwrap();
        assert_eq!(
            (e.dim(), e.algebra.step(), e.dual_chart().unwrap().k),
            (4, 3, 2)
        );
    }

    #[test]
    fn unknown_group_lists_presets() {
        let err = get_group("sl2").unwrap_err();
        assert!(err.to_string().contains("heisenberg"), "{err}");
    }

    #[test]
    fn engel_has_no_oracle() {
        let e = get_group("engel").unwrap();
        let g = e.algebra.identity();
        assert!(matches!(
            oracle_representation(&e, &[1.0, 0.0], &g),
            Err(Error::NoOracle(_))
        ));
    }

    #[test]
    fn algebra_file_round_trip() {
        let text = r#"{"name": "h3", "dim": 3, "brackets": [[0, 1, [0, 0, 1]]]}"#;
        let file: AlgebraFile = serde_json::from_str(text).unwrap();
        let chart: DualChart = serde_json::from_str(
            r#"{"k": 1, "embedMatrix": [[0, 0, 1]], "densityMode": "pfaffian"}"#,
        )
        .unwrap();
        let b = file.into_bundle(Some(chart)).unwrap();
        assert_eq!(b.algebra.step(), 2);
        assert!(b.oracle.is_none());
    }

    #[test]
    fn wrong_chart_dimension_is_rejected() {
        let file: AlgebraFile =
            serde_json::from_str(r#"{"name": "h3", "dim": 3, "brackets": [[0, 1, [0, 0, 1]]]}"#)
                .unwrap();
        let chart = DualChart::new(vec![vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]], None);
        assert!(file.into_bundle(Some(chart)).is_err());
    }
}
