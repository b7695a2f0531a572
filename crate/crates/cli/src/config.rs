use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use shiftspec::multidim::{ExclusionFamily, JointGrid, MultiIndexSeq};
use shiftspec::spaces::{ExponentRule, OrliczFunction};
use shiftspec::spectra::ImageGrid;
use shiftspec::verify::VerifyParams;
use shiftspec::{Domain, NormFamily, OperatorKind, OperatorSpec, SpaceSpec, WeightFamily, WeightKind};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Radius,
    Predict,
    Verify,
    Joint,
    ConjectureGap,
    Selftest,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Radius => "radius",
            Task::Predict => "predict",
            Task::Verify => "verify",
            Task::Joint => "joint",
            Task::ConjectureGap => "conjecture-gap",
            Task::Selftest => "selftest",
        }
    }
}

/// Norm part of a space; the weight lives next to it in [`SpaceConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum NormConfig {
    WeightedLp { p: f64 },
    Orlicz { k: OrliczFunction },
    VariableExponent { q: ExponentRule },
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig::WeightedLp { p: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub domain: Domain,
    /// Defaults to the constant weight.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightKind>,
    #[serde(default)]
    pub norm: NormConfig,
}

impl SpaceConfig {
    pub fn resolve(&self) -> Result<SpaceSpec, CliError> {
        let weight = || -> Result<WeightFamily, CliError> {
            let kind = self.weight.clone().unwrap_or(WeightKind::Constant);
            Ok(WeightFamily::new(kind, self.domain)?)
        };
        let norm = match &self.norm {
            NormConfig::WeightedLp { p } => NormFamily::WeightedLp { p: *p, weight: weight()? },
            NormConfig::Orlicz { k } => NormFamily::Orlicz {
                k: k.clone(),
                weight: weight()?,
            },
            NormConfig::VariableExponent { q } => {
                if self.weight.is_some() {
                    return Err(CliError::Config(
                        "variable-exponent spaces take no weight".into(),
                    ));
                }
                NormFamily::VariableExponent { q: q.clone() }
            }
        };
        Ok(SpaceSpec::new(self.domain, norm)?)
    }
}

/// Rectangle of λ values, `re_count × im_count`, imaginary part outermost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaGrid {
    pub re: [f64; 2],
    pub im: [f64; 2],
    pub re_count: usize,
    pub im_count: usize,
}

pub const MAX_GRID_POINTS: usize = 100_000;

impl LambdaGrid {
    pub fn points(&self) -> Result<Vec<Complex64>, CliError> {
        if self.re_count == 0 || self.im_count == 0 || self.re_count * self.im_count > MAX_GRID_POINTS {
            return Err(CliError::Config(format!(
                "lambda grid must have between 1 and {MAX_GRID_POINTS} points"
            )));
        }
        let axis = |r: [f64; 2], n: usize| -> Vec<f64> {
            if n == 1 {
                vec![r[0]]
            } else {
                (0..n).map(|i| r[0] + (r[1] - r[0]) * i as f64 / (n - 1) as f64).collect()
            }
        };
        let xs = axis(self.re, self.re_count);
        Ok(axis(self.im, self.im_count)
            .into_iter()
            .flat_map(|y| xs.iter().map(move |&x| Complex64::new(x, y)))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub horizon: usize,
    pub residual_ns: Vec<usize>,
    pub blowup_ns: Vec<usize>,
    pub transform_size: usize,
    pub multi_transform_size: usize,
    /// Membership tolerance against predicted regions.
    pub tol: f64,
    pub grid: ImageGrid,
    pub joint_grid: JointGrid,
    pub multi_residual_n: usize,
    pub boundary_samples: usize,
    pub residual_max: f64,
    pub in_region_samples: usize,
    pub monomial_degree: i64,
    pub random_count: usize,
    pub random_degree: i64,
}

impl Default for Params {
    fn default() -> Self {
        let v = VerifyParams::default();
        Params {
            horizon: v.horizon,
            residual_ns: v.residual_ns,
            blowup_ns: v.blowup_ns,
            transform_size: v.transform_size,
            multi_transform_size: 512,
            tol: v.tol,
            grid: ImageGrid {
                radial: 65,
                angular: 1024,
            },
            joint_grid: JointGrid::default(),
            multi_residual_n: 60,
            boundary_samples: 16,
            residual_max: 0.3,
            in_region_samples: 0,
            monomial_degree: 4,
            random_count: 64,
            random_degree: 2,
        }
    }
}

impl Params {
    pub fn verify_params(&self) -> VerifyParams {
        VerifyParams {
            residual_ns: self.residual_ns.clone(),
            blowup_ns: self.blowup_ns.clone(),
            transform_size: self.transform_size,
            horizon: self.horizon,
            tol: self.tol,
            grid: self.grid,
        }
    }

    pub fn exclusion(&self, seed: u64) -> ExclusionFamily {
        ExclusionFamily {
            monomial_degree: self.monomial_degree,
            random_count: self.random_count,
            random_degree: self.random_degree,
            seed,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |what: &str| Err(CliError::Config(format!("params: {what}")));
        if self.residual_ns.is_empty() || self.residual_ns.contains(&0) {
            return bad("residual_ns must be a nonempty list of positive sizes");
        }
        if self.blowup_ns.len() < 2 || self.blowup_ns.contains(&0) {
            return bad("blowup_ns needs at least two positive sizes");
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return bad("tol must be positive");
        }
        if self.grid.radial < 2 || self.grid.angular < 16 {
            return bad("grid needs radial >= 2 and angular >= 16");
        }
        if self.joint_grid.radial < 1 || self.joint_grid.angular < 4 {
            return bad("joint_grid needs radial >= 1 and angular >= 4");
        }
        if self.monomial_degree < 0 || self.random_degree < 0 {
            return bad("polynomial degrees must be nonnegative");
        }
        Ok(())
    }
}

/// Experiment description read from `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub spaces: Vec<SpaceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<MultiIndexSeq>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambdas: Vec<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_grid: Option<LambdaGrid>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Vec<Complex64>>,
    #[serde(default)]
    pub params: Params,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Library objects built from a validated config.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub space: Option<SpaceSpec>,
    pub spaces: Vec<SpaceSpec>,
    pub operator: Option<OperatorSpec>,
    pub symbol: Option<MultiIndexSeq>,
    pub lambdas: Vec<Complex64>,
    pub points: Vec<Vec<Complex64>>,
    pub params: Params,
    pub seed: Option<u64>,
}

fn require<T: Clone>(v: &Option<T>, what: &str, task: Task) -> Result<T, CliError> {
    v.clone()
        .ok_or_else(|| CliError::Config(format!("task {} needs `{what}`", task.name())))
}

impl Resolved {
    pub fn operator(&self) -> &OperatorSpec {
        self.operator.as_ref().expect("validated")
    }

    pub fn space(&self) -> &SpaceSpec {
        self.space.as_ref().expect("validated")
    }
}

/// Checks the fields a task needs and builds the library objects.
pub fn resolve(config: &ExperimentConfig, task: Task) -> Result<Resolved, CliError> {
    if let Some(t) = config.task {
        if t != task {
            return Err(CliError::Config(format!(
                "config is for task {} but {} was requested",
                t.name(),
                task.name()
            )));
        }
    }
    config.params.validate()?;
    let space = config.space.as_ref().map(SpaceConfig::resolve).transpose()?;
    let spaces = config.spaces.iter().map(SpaceConfig::resolve).collect::<Result<Vec<_>, _>>()?;
    let mut lambdas = config.lambdas.clone();
    if let Some(grid) = &config.lambda_grid {
        lambdas.extend(grid.points()?);
    }
    let operator = match (&config.operator, &space) {
        (Some(kind), Some(space)) => Some(OperatorSpec::new(kind.clone(), space.clone())?),
        _ => None,
    };
    let r = Resolved {
        space,
        spaces,
        operator,
        symbol: config.symbol.clone(),
        lambdas,
        points: config.points.clone(),
        params: config.params.clone(),
        seed: config.seed,
    };
    match task {
        Task::Radius => {
            require(&r.space, "space", task)?;
        }
        Task::Predict => {
            require(&r.space, "space", task)?;
            require(&config.operator, "operator", task)?;
        }
        Task::Verify | Task::ConjectureGap => {
            require(&r.space, "space", task)?;
            require(&config.operator, "operator", task)?;
            if r.lambdas.is_empty() {
                return Err(CliError::Config(format!(
                    "task {} needs `lambdas` or `lambda_grid`",
                    task.name()
                )));
            }
            if task == Task::ConjectureGap && r.space().domain != Domain::Unilateral {
                return Err(CliError::Config("conjecture-gap needs a unilateral space".into()));
            }
        }
        Task::Joint => {
            if r.spaces.len() < 2 {
                return Err(CliError::Config("task joint needs at least two `spaces`".into()));
            }
            let symbol = require(&r.symbol, "symbol", task)?;
            if symbol.k() != r.spaces.len() {
                return Err(CliError::Config(format!(
                    "symbol is {}-dimensional but {} spaces are given",
                    symbol.k(),
                    r.spaces.len()
                )));
            }
            if let Some(p) = r.points.iter().find(|p| p.len() != r.spaces.len()) {
                return Err(CliError::Config(format!("point {p:?} has the wrong dimension")));
            }
            let randomized = r.params.random_count > 0 && (!r.points.is_empty() || r.params.in_region_samples > 0);
            if (randomized || r.params.in_region_samples > 0) && r.seed.is_none() {
                return Err(CliError::Config(
                    "a seed is required for randomized exclusion tests and samples".into(),
                ));
            }
        }
        Task::Selftest => {}
    }
    Ok(r)
}
