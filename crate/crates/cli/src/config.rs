//! Run configuration: one JSON file, with leaves overridable by dotted path.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use nilpw_core::catalog::GroupBundle;
use nilpw_core::functions::{FunctionFamily, SampledGroupFunction};
use nilpw_core::transform::{TransformOptions, XWindow, DEFAULT_PW_EPSILON};
use nilpw_core::{get_group, GridSpec, RepFamily};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupSource {
    Preset(String),
    Files {
        algebra: PathBuf,
        #[serde(default)]
        chart: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionSource {
    Family(FunctionFamily),
    Csv { csv: PathBuf },
}

/// Grids; `null` means the group's reference grid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    pub group: Option<GridSpec>,
    pub x: Option<GridSpec>,
    pub lambda: Option<GridSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub group: GroupSource,
    /// The random family's `seed` is the only source of randomness in a run.
    pub function: FunctionSource,
    /// number of family members (consecutive indices) used by `plancherel`
    pub count: usize,
    pub grids: Grids,
    /// relative vanishing threshold for `pw-scan`
    pub epsilon: f64,
    /// relative singular-value cutoff for `probe-invert`
    pub probe_tol: f64,
    /// route-equivalence tolerance written into the `kernel` report
    pub route_tol: f64,
    /// dump the kernel tensor as binary + JSON sidecar
    pub dump_kernel: bool,
    pub output: PathBuf,
    pub transform: TransformOptions,
    pub window: XWindow,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            group: GroupSource::Preset("heisenberg".into()),
            function: FunctionSource::Family(FunctionFamily::random(7, 0)),
            count: 1,
            grids: Grids::default(),
            epsilon: DEFAULT_PW_EPSILON,
            probe_tol: 1e-10,
            route_tol: 5e-3,
            dump_kernel: true,
            output: PathBuf::from("out"),
            transform: TransformOptions::default(),
            window: XWindow::default(),
        }
    }
}

/// Parses `path.to.leaf=value`; the value is JSON if it parses, else a string.
pub fn parse_override(s: &str) -> CliResult<(Vec<String>, Value)> {
    let (path, raw) = s
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override '{s}' is not of the form path=value")))?;
    let path: Vec<String> = path.split('.').map(str::to_string).collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!(
            "override '{s}' has an empty path segment"
        )));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((path, value))
}

/// Sets a leaf; intermediate objects are created, array indices must exist.
pub fn set_path(root: &mut Value, path: &[String], value: Value) -> CliResult<()> {
    let mut cur = root;
    for (depth, key) in path.iter().enumerate() {
        let last = depth + 1 == path.len();
        if cur.is_null() {
            *cur = Value::Object(Default::default());
        }
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert(key.clone(), value);
                    return Ok(());
                }
                map.entry(key.clone()).or_insert(Value::Null)
            }
            Value::Array(items) => {
                let i: usize = key.parse().map_err(|_| {
                    CliError::Config(format!(
                        "'{}' indexes an array with '{key}'",
                        path.join(".")
                    ))
                })?;
                let len = items.len();
                let slot = items.get_mut(i).ok_or_else(|| {
                    CliError::Config(format!(
                        "'{}': index {i} out of range ({len})",
                        path.join(".")
                    ))
                })?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => {
                return Err(CliError::Config(format!(
                    "'{}': '{key}' is below a leaf",
                    path.join(".")
                )))
            }
        };
    }
    Ok(())
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl RunConfig {
    /// Defaults, then the file (if any), then the overrides in order. Null
    /// grids are filled from the group's reference grids before the overrides
    /// apply, so `grids.x.axes.0.points=129` works without spelling the grid out.
    pub fn load(file: Option<&Path>, overrides: &[String]) -> CliResult<Self> {
        let mut v = serde_json::to_value(RunConfig::default()).expect("default config serializes");
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let user: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            if !user.is_object() {
                return Err(CliError::Config(format!(
                    "{}: top level must be an object",
                    path.display()
                )));
            }
            merge(&mut v, user);
        }
        let parsed: Vec<(Vec<String>, Value)> = overrides
            .iter()
            .map(|s| parse_override(s))
            .collect::<CliResult<_>>()?;
        for (p, val) in parsed.iter().filter(|(p, _)| p[0] == "group") {
            set_path(&mut v, p, val.clone())?;
        }
        let group: GroupSource = serde_json::from_value(v["group"].clone())
            .map_err(|e| CliError::Config(format!("group: {e}")))?;
        let bundle = load_group(&group)?;
        for (key, grid) in [
            ("group", &bundle.reference_grids.group),
            ("x", &bundle.reference_grids.x),
            ("lambda", &bundle.reference_grids.lambda),
        ] {
            if v["grids"][key].is_null() {
                v["grids"][key] = serde_json::to_value(grid).expect("grid serializes");
            }
        }
        for (p, val) in parsed {
            set_path(&mut v, &p, val)?;
        }
        serde_json::from_value(v).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Canonical JSON of everything that affects results (not the output directory).
    pub fn fingerprint(&self) -> String {
        let mut c = self.clone();
        c.output = PathBuf::new();
        serde_json::to_string(&c).expect("config serializes")
    }
}

pub fn load_group(src: &GroupSource) -> CliResult<GroupBundle> {
    Ok(match src {
        GroupSource::Preset(name) => get_group(name)?,
        GroupSource::Files { algebra, chart } => {
            GroupBundle::from_files(algebra, chart.as_deref())?
        }
    })
}

/// Everything a subcommand needs, validated before any compute.
pub struct Setup {
    pub config: RunConfig,
    pub bundle: GroupBundle,
    pub g_grid: GridSpec,
    pub x_grid: GridSpec,
    pub lambda_grid: GridSpec,
    pub family: RepFamily,
    pub functions: Vec<SampledGroupFunction>,
}

impl Setup {
    pub fn new(config: RunConfig) -> CliResult<Self> {
        let bundle = load_group(&config.group)?;
        let g_grid = config.grids.group.clone().expect("filled at load");
        let x_grid = config.grids.x.clone().expect("filled at load");
        let lambda_grid = config.grids.lambda.clone().expect("filled at load");
        let g_grid = GridSpec::new(g_grid.axes)?;
        let x_grid = if x_grid.axes.is_empty() {
            x_grid
        } else {
            GridSpec::new(x_grid.axes)?
        };
        let lambda_grid = GridSpec::new_dual(lambda_grid.axes)?;
        if g_grid.ndim() != bundle.dim() {
            return Err(CliError::Config(format!(
                "grids.group has {} axes, the group has dimension {}",
                g_grid.ndim(),
                bundle.dim()
            )));
        }
        if !(config.epsilon > 0.0) {
            return Err(CliError::Config("epsilon must be positive".into()));
        }
        if config.count == 0 {
            return Err(CliError::Config("count must be at least 1".into()));
        }
        let family = RepFamily::on_grid(
            Arc::clone(&bundle.algebra),
            &bundle.flag,
            bundle.dual_chart()?,
            &lambda_grid,
        )?;
        let functions = match &config.function {
            FunctionSource::Family(f) => (0..config.count as u64)
                .map(|i| {
                    let member = if config.count > 1 {
                        f.with_index(first_index(f) + i)
                    } else {
                        f.clone()
                    };
                    member.sample(&g_grid)
                })
                .collect::<nilpw_core::Result<Vec<_>>>()?,
            FunctionSource::Csv { csv } => {
                let file = std::fs::File::open(csv)
                    .map_err(|e| CliError::Io(format!("{}: {e}", csv.display())))?;
                vec![SampledGroupFunction::read_csv(
                    std::io::BufReader::new(file),
                    &g_grid,
                )?]
            }
        };
        let refs: Vec<&SampledGroupFunction> = functions.iter().collect();
        nilpw_core::transform::check_setup(&refs, &family, &x_grid, &config.transform)?;
        Ok(Self {
            config,
            bundle,
            g_grid,
            x_grid,
            lambda_grid,
            family,
            functions,
        })
    }

    pub fn function_refs(&self) -> Vec<&SampledGroupFunction> {
        self.functions.iter().collect()
    }
}

fn first_index(f: &FunctionFamily) -> u64 {
    match f {
        FunctionFamily::RandomBumps { index, .. } => *index,
        _ => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_reach_leaves() {
        let c = RunConfig::load(
            None,
            &[
                "grids.x.axes.0.points=33".into(),
                "epsilon=1e-6".into(),
                "function.seed=11".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.grids.x.unwrap().axes[0].points, 33);
        assert_eq!(c.epsilon, 1e-6);
        match c.function {
            FunctionSource::Family(FunctionFamily::RandomBumps { seed, .. }) => {
                assert_eq!(seed, 11)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn group_override_changes_reference_grids() {
        let c = RunConfig::load(None, &["group=abelian1".into()]).unwrap();
        assert_eq!(c.grids.group.unwrap().axes[0].points, 257);
    }

    #[test]
    fn bad_overrides_are_config_errors() {
        assert!(matches!(
            parse_override("epsilon"),
            Err(CliError::Config(_))
        ));
        assert!(matches!(
            RunConfig::load(None, &["grids.x.axes.5.points=3".into()]),
            Err(CliError::Config(_))
        ));
        assert!(matches!(
            RunConfig::load(None, &["no_such_key=1".into()]),
            Err(CliError::Config(_))
        ));
    }
}
