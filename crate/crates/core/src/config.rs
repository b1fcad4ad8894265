//! Experiment configuration files (TOML).
//!
//! Scalar parameters marked as grids accept either a number or a list; the
//! parameter points are the cartesian product of all grids.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::branching::ModelParams;
use crate::dist::{DistSpec, DEFAULT_TRUNCATION};
use crate::error::{Error, Result};
use crate::infection::{InfectionSpec, InfectiousPeriod};
use crate::netgen::GenSpec;
use crate::simulate::{Direction, EstimateSpec, MajorCutoff};

const HEADER_BEGIN: &str = "# --- config ---";
const HEADER_END: &str = "# --- end config ---";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    One(f64),
    Many(Vec<f64>),
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::One(x) => vec![*x],
            Grid::Many(xs) => xs.clone(),
        }
    }
}

impl Default for Grid {
    fn default() -> Self {
        Grid::One(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// Explicit household-size law, e.g. `"poisson_plus(2)"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub household: Option<DistSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global: Option<DistSpec>,
    /// Poisson template: `G ~ Poi(gamma - mu)`, `H ~ Poi+(mu)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Grid>,
    #[serde(default)]
    pub r: Grid,
    #[serde(default = "default_n_q")]
    pub n_q: usize,
    #[serde(default)]
    pub p_rw: Grid,
    #[serde(default = "default_truncation")]
    pub truncation: f64,
}

fn default_n_q() -> usize {
    10
}

fn default_truncation() -> f64 {
    DEFAULT_TRUNCATION
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            household: None,
            global: None,
            gamma: Some(10.0),
            mu: Some(Grid::One(2.0)),
            r: Grid::default(),
            n_q: default_n_q(),
            p_rw: Grid::default(),
            truncation: default_truncation(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfectionModel {
    #[default]
    Constant,
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfectionSection {
    #[serde(default)]
    pub model: InfectionModel,
    /// Marginal transmission probability; for the general model the rate is
    /// solved from it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_i: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<InfectiousPeriod>,
}

impl Default for InfectionSection {
    fn default() -> Self {
        Self {
            model: InfectionModel::Constant,
            p_i: Some(Grid::One(0.2)),
            lambda: None,
            period: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_n_sims")]
    pub n_sims: usize,
    #[serde(default)]
    pub cutoff: MajorCutoff,
    #[serde(default)]
    pub direction: Direction,
    #[serde(default)]
    pub seed: u64,
}

fn default_n() -> usize {
    10_000
}

fn default_n_sims() -> usize {
    1000
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            n: default_n(),
            n_sims: default_n_sims(),
            cutoff: MajorCutoff::default(),
            direction: Direction::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_dir() }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub infection: InfectionSection,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// One resolved parameter point.
#[derive(Debug, Clone)]
pub struct Point {
    pub mu: Option<f64>,
    pub r: f64,
    pub p_rw: f64,
    pub p_i: f64,
    pub params: ModelParams,
}

impl Point {
    pub fn gen_spec(&self, n: usize, seed: u64) -> GenSpec {
        GenSpec {
            n,
            household: self.params.household.clone(),
            global: self.params.global.clone(),
            r: self.r,
            n_q: self.params.n_q,
            seed,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration always serialises")
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        let explicit = m.household.is_some() || m.global.is_some();
        let template = m.gamma.is_some() || m.mu.is_some();
        match (explicit, template) {
            (true, true) => {
                return Err(Error::Config(
                    "give either household/global or gamma/mu in [model], not both".into(),
                ))
            }
            (false, false) => {
                return Err(Error::Config("[model] needs household and global, or gamma and mu".into()))
            }
            (true, false) if m.household.is_none() || m.global.is_none() => {
                return Err(Error::Config("[model] needs both household and global".into()))
            }
            (false, true) if m.gamma.is_none() || m.mu.is_none() => {
                return Err(Error::Config("[model] needs both gamma and mu".into()))
            }
            _ => {}
        }
        for (name, grid) in [("r", Some(&m.r)), ("p_rw", Some(&m.p_rw)), ("mu", m.mu.as_ref())] {
            if let Some(Grid::Many(xs)) = grid {
                if xs.is_empty() {
                    return Err(Error::Config(format!("grid `{name}` is empty")));
                }
            }
        }
        let inf = &self.infection;
        match inf.model {
            InfectionModel::Constant => {
                if inf.p_i.is_none() || inf.lambda.is_some() || inf.period.is_some() {
                    return Err(Error::Config("constant infection takes only `p_i`".into()));
                }
            }
            InfectionModel::General => {
                if inf.period.is_none() {
                    return Err(Error::Config("general infection needs `period`".into()));
                }
                if inf.p_i.is_some() == inf.lambda.is_some() {
                    return Err(Error::Config("general infection needs exactly one of `p_i`, `lambda`".into()));
                }
            }
        }
        if self.simulation.n == 0 || self.simulation.n_sims == 0 {
            return Err(Error::Config("simulation n and n_sims must be positive".into()));
        }
        Ok(())
    }

    fn infections(&self) -> Result<Vec<InfectionSpec>> {
        let inf = &self.infection;
        match inf.model {
            InfectionModel::Constant => inf
                .p_i
                .as_ref()
                .map(Grid::values)
                .unwrap_or_default()
                .into_iter()
                .map(InfectionSpec::constant)
                .collect(),
            InfectionModel::General => {
                let period = inf.period.ok_or_else(|| Error::Config("missing period".into()))?;
                match (&inf.p_i, inf.lambda) {
                    (Some(grid), _) => grid
                        .values()
                        .into_iter()
                        .map(|p| InfectionSpec::general(1.0, period)?.with_p_i(p))
                        .collect(),
                    (None, Some(lambda)) => Ok(vec![InfectionSpec::general(lambda, period)?]),
                    (None, None) => Err(Error::Config("missing p_i or lambda".into())),
                }
            }
        }
    }

    /// Cartesian product over `mu`, `p_rw`, infection and `r` (innermost).
    pub fn points(&self) -> Result<Vec<Point>> {
        self.validate()?;
        let m = &self.model;
        let mus: Vec<Option<f64>> = match &m.mu {
            Some(g) => g.values().into_iter().map(Some).collect(),
            None => vec![None],
        };
        let infections = self.infections()?;
        let mut out = Vec::new();
        for mu in &mus {
            let (household, global) = match (mu, m.gamma) {
                (Some(mu), Some(gamma)) => {
                    if !(0.0..gamma).contains(mu) {
                        return Err(Error::Config(format!("mu = {mu} must lie in [0, gamma = {gamma})")));
                    }
                    (
                        DistSpec::PoissonPlus { mean: *mu }.expand(m.truncation)?,
                        DistSpec::Poisson { mean: gamma - mu }.expand(m.truncation)?,
                    )
                }
                _ => (
                    m.household.as_ref().expect("validated").expand(m.truncation)?,
                    m.global.as_ref().expect("validated").expand(m.truncation)?,
                ),
            };
            for p_rw in m.p_rw.values() {
                for infection in &infections {
                    for r in m.r.values() {
                        let params = ModelParams {
                            household: household.clone(),
                            global: global.clone(),
                            r,
                            n_q: m.n_q,
                            p_rw,
                            infection: *infection,
                        };
                        params.validate()?;
                        out.push(Point {
                            mu: *mu,
                            r,
                            p_rw,
                            p_i: infection.p_i(),
                            params,
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn estimate_spec(&self, point: &Point, point_index: usize) -> EstimateSpec {
        let seed = crate::rng::derive_seed(self.simulation.seed, point_index as u64);
        EstimateSpec {
            network: point.gen_spec(self.simulation.n, seed),
            infection: point.params.infection,
            p_rw: point.p_rw,
            n_sims: self.simulation.n_sims,
            cutoff: self.simulation.cutoff,
            direction: self.simulation.direction,
            master_seed: seed,
        }
    }

    /// Comment block echoing the full resolved configuration. The output
    /// directory is left out so that reruns elsewhere match byte for byte.
    pub fn header(&self, command: &str) -> String {
        let mut out = format!(
            "# clustnet {} {command}\n# seed = {}\n{HEADER_BEGIN}\n",
            env!("CARGO_PKG_VERSION"),
            self.simulation.seed
        );
        let echoed = Self {
            output: OutputSection::default(),
            ..self.clone()
        };
        for line in echoed.to_toml().lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(HEADER_END);
        out.push('\n');
        out
    }

    /// Recovers the configuration echoed at the top of an output file.
    pub fn from_header(text: &str) -> Result<Self> {
        let mut body = String::new();
        let mut inside = false;
        for line in text.lines() {
            if line == HEADER_BEGIN {
                inside = true;
            } else if line == HEADER_END {
                return Self::from_toml(&body);
            } else if inside {
                body.push_str(line.strip_prefix("# ").unwrap_or(line.trim_start_matches('#')));
                body.push('\n');
            }
        }
        Err(Error::Config("no configuration header found".into()))
    }
}
