//! Experiment configuration: JSON schema, defaults and model construction.

use beckner::operator_core::{diag, CMat, Superop, C64};
use beckner::semigroup::{alicki_decompose, build_from_jumps, depolarizing, random_dbc, DbcLindbladian, JumpTerm};
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Complex matrix as row-major nested arrays of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixJson(pub Vec<Vec<[f64; 2]>>);

impl MatrixJson {
    pub fn from_matrix(m: &CMat) -> Self {
        MatrixJson((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect())
    }

    pub fn to_matrix(&self, field: &str) -> Result<CMat, ConfigError> {
        let n = self.0.len();
        let m = self.0.first().map_or(0, Vec::len);
        if n == 0 || self.0.iter().any(|r| r.len() != m) {
            return Err(ConfigError::invalid(field, "matrix rows must be non-empty and of equal length"));
        }
        Ok(CMat::from_fn(n, m, |i, j| C64::new(self.0[i][j][0], self.0[i][j][1])))
    }
}

/// Reference state by its spectrum; `basis` columns are the eigenvectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SigmaSpec {
    #[serde(default)]
    pub eigenvalues: Vec<f64>,
    #[serde(default)]
    pub basis: Option<MatrixJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpSpec {
    #[serde(rename = "V")]
    pub v: MatrixJson,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Depolarizing { gamma: f64 },
    Jumps { list: Vec<JumpSpec> },
    RandomDbc { pairs: usize, diag: usize, seed: u64 },
    /// Explicit superoperator matrix acting on column-stacked operators.
    Matrix { generator: MatrixJson },
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec::Depolarizing { gamma: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Constants,
    Decay,
    Mixing,
    Transport,
    Ricci,
    Verify,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Constants => "constants",
            Task::Decay => "decay",
            Task::Mixing => "mixing",
            Task::Transport => "transport",
            Task::Ricci => "ricci",
            Task::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Slack allowance for hard closed-form relations.
    pub hard: f64,
    pub soft: f64,
    /// Relative discretization tolerance of the transport solver.
    pub transport: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { hard: 1e-4, soft: 1e-3, transport: 0.02 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seeds {
    pub constants: u64,
    pub states: u64,
    pub ricci: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds { constants: 7, states: 7, ricci: 7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsSettings {
    pub num_starts: usize,
    pub max_iters: usize,
}

impl Default for ConstantsSettings {
    fn default() -> Self {
        ConstantsSettings { num_starts: 16, max_iters: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecaySettings {
    /// Horizon in units of 1/λ.
    pub horizon: f64,
    pub points: usize,
}

impl Default for DecaySettings {
    fn default() -> Self {
        DecaySettings { horizon: 5.0, points: 21 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixingSettings {
    pub eps: Vec<f64>,
}

impl Default for MixingSettings {
    fn default() -> Self {
        MixingSettings { eps: vec![0.1, 0.01] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransportSettings {
    pub p: f64,
    pub steps: usize,
    pub tol: f64,
    pub pairs: usize,
}

impl Default for TransportSettings {
    fn default() -> Self {
        TransportSettings { p: 1.5, steps: 20, tol: 1e-7, pairs: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RicciSettings {
    pub p: Vec<f64>,
    pub samples: usize,
    /// Number of states fed to the inequality checks.
    pub states: usize,
    pub steps: usize,
}

impl Default for RicciSettings {
    fn default() -> Self {
        RicciSettings { p: vec![1.5, 2.0], samples: 16, states: 2, steps: 12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub constants: ConstantsSettings,
    pub decay: DecaySettings,
    pub mixing: MixingSettings,
    pub transport: TransportSettings,
    pub ricci: RicciSettings,
}

fn default_dimension() -> usize {
    2
}

fn default_p_grid() -> Vec<f64> {
    vec![1.05, 1.1, 1.25, 1.5, 1.75, 2.0]
}

fn default_q_grid() -> Vec<f64> {
    vec![1.25, 1.5, 1.75]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    #[serde(default)]
    pub sigma: SigmaSpec,
    #[serde(default)]
    pub generator: GeneratorSpec,
    #[serde(default = "default_p_grid")]
    pub p_grid: Vec<f64>,
    #[serde(default = "default_q_grid")]
    pub q_grid: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default)]
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub settings: Settings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dimension: default_dimension(),
            sigma: SigmaSpec::default(),
            generator: GeneratorSpec::default(),
            p_grid: default_p_grid(),
            q_grid: default_q_grid(),
            tolerances: Tolerances::default(),
            seeds: Seeds::default(),
            tasks: Vec::new(),
            settings: Settings::default(),
        }
    }
}

impl ExperimentConfig {
    /// Parse, fill derived defaults and validate.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let raw: ExperimentConfig = serde_json::from_str(text).map_err(ConfigError::from_json)?;
        raw.materialize()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is always serializable")
    }

    /// Fill the maximally mixed spectrum when none is given, then validate.
    pub fn materialize(mut self) -> Result<Self, ConfigError> {
        let d = self.dimension;
        if d == 0 {
            return Err(ConfigError::invalid("dimension", "must be at least 1"));
        }
        if self.sigma.eigenvalues.is_empty() {
            self.sigma.eigenvalues = vec![1.0 / d as f64; d];
        }
        if self.sigma.eigenvalues.len() != d {
            return Err(ConfigError::invalid("sigma.eigenvalues", format!("expected {d} values")));
        }
        if self.sigma.eigenvalues.iter().any(|v| v.is_nan() || *v <= 0.0) {
            return Err(ConfigError::invalid("sigma.eigenvalues", "must be strictly positive"));
        }
        let total: f64 = self.sigma.eigenvalues.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(ConfigError::invalid("sigma.eigenvalues", format!("must sum to 1, got {total}")));
        }
        if let Some(b) = &self.sigma.basis {
            let m = b.to_matrix("sigma.basis")?;
            if m.nrows() != d || m.ncols() != d {
                return Err(ConfigError::invalid("sigma.basis", format!("expected a {d}×{d} matrix")));
            }
        }
        for (field, grid, lo, hi) in [("p_grid", &self.p_grid, 1.0, 2.0), ("q_grid", &self.q_grid, 1.0, 2.0)] {
            if grid.iter().any(|p| !(*p > lo && *p <= hi)) {
                return Err(ConfigError::invalid(field, format!("entries must lie in ({lo}, {hi}]")));
            }
        }
        if self.q_grid.contains(&2.0) {
            return Err(ConfigError::invalid("q_grid", "entries must be below 2"));
        }
        let t = &self.settings.transport;
        if !(t.p > 1.0 && t.p <= 2.0) || t.steps < 2 {
            return Err(ConfigError::invalid("settings.transport", "need p ∈ (1, 2] and steps ≥ 2"));
        }
        if self.settings.ricci.p.iter().any(|p| !(*p > 1.0 && *p <= 2.0)) {
            return Err(ConfigError::invalid("settings.ricci.p", "entries must lie in (1, 2]"));
        }
        if self.settings.mixing.eps.iter().any(|e| !(*e > 0.0 && *e < 2.0)) {
            return Err(ConfigError::invalid("settings.mixing.eps", "entries must lie in (0, 2)"));
        }
        match &self.generator {
            GeneratorSpec::Depolarizing { gamma } if gamma.is_nan() || *gamma <= 0.0 => {
                return Err(ConfigError::invalid("generator.gamma", "must be positive"));
            }
            GeneratorSpec::Jumps { list } => {
                for (k, j) in list.iter().enumerate() {
                    let m = j.v.to_matrix(&format!("generator.list[{k}].V"))?;
                    if m.nrows() != d || m.ncols() != d {
                        return Err(ConfigError::invalid(format!("generator.list[{k}].V"), format!("expected {d}×{d}")));
                    }
                }
            }
            GeneratorSpec::Matrix { generator } => {
                let m = generator.to_matrix("generator.generator")?;
                if m.nrows() != d * d || m.ncols() != d * d {
                    return Err(ConfigError::invalid("generator.generator", format!("expected {0}×{0}", d * d)));
                }
            }
            _ => {}
        }
        self.tasks.sort();
        self.tasks.dedup();
        Ok(self)
    }

    pub fn sigma_matrix(&self) -> Result<CMat, ConfigError> {
        let s = diag(&self.sigma.eigenvalues);
        match &self.sigma.basis {
            None => Ok(s),
            Some(b) => {
                let u = b.to_matrix("sigma.basis")?;
                let defect = (u.adjoint() * &u - CMat::identity(self.dimension, self.dimension)).norm();
                if defect > 1e-9 {
                    return Err(ConfigError::invalid("sigma.basis", "must be unitary"));
                }
                Ok(&u * s * u.adjoint())
            }
        }
    }

    /// Construct the generator described by the config.
    pub fn build(&self) -> beckner::Result<DbcLindbladian> {
        let sigma = self.sigma_matrix().map_err(|e| beckner::Error::InvalidArgument(e.to_string()))?;
        match &self.generator {
            GeneratorSpec::Depolarizing { gamma } => depolarizing(&sigma, *gamma),
            GeneratorSpec::Jumps { list } => {
                let jumps = list
                    .iter()
                    .map(|j| JumpTerm { v: j.v.to_matrix("V").expect("validated"), omega: j.omega })
                    .collect::<Vec<_>>();
                build_from_jumps(&sigma, &jumps)
            }
            GeneratorSpec::RandomDbc { pairs, diag, seed } => random_dbc(&sigma, *pairs, *diag, *seed),
            GeneratorSpec::Matrix { generator } => {
                let g = Superop::new(self.dimension, generator.to_matrix("generator").expect("validated"));
                let jumps = alicki_decompose(&g, &sigma)?;
                build_from_jumps(&sigma, &jumps)
            }
        }
    }

    /// Analytic curvature γp/2 when the generator is depolarizing.
    pub fn analytic_kappa(&self, p: f64) -> Option<f64> {
        match self.generator {
            GeneratorSpec::Depolarizing { gamma } => Some(gamma * p / 2.0),
            _ => None,
        }
    }
}
