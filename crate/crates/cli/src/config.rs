//! JSON experiment configuration and its resolution into model objects.

use std::path::PathBuf;

use ncpm_core::games::{GameConfig, GameMode, Policy, QualityPreset};
use ncpm_core::generators::GraphSpec;
use ncpm_core::markov::SimulationModel;
use ncpm_core::{OpenMindedness, ProbabilityMatrix, ProductConversionGraph, SocialNetwork};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_HORIZON: usize = 50;
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;
pub const DEFAULT_OUT_DIR: &str = "out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    CompareMcNcpm,
    Asymptotics,
    Stability,
    Game,
}

/// Open-mindedness: explicit values or i.i.d. uniform draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlphaSpec {
    Explicit {
        values: Vec<f64>,
    },
    Uniform {
        lo: f64,
        hi: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

/// Initial adoption probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Explicit {
        rows: Vec<Vec<f64>>,
    },
    Uniform,
    /// Same row at every node.
    Consensus {
        row: Vec<f64>,
    },
    /// Rows drawn uniformly from the simplex.
    Random {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameModeSpec {
    SeedingQuality,
    /// Uses the top-level `delta` as the conversion matrix.
    SeedingOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetSpec {
    pub xi: Vec<f64>,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    pub mode: GameModeSpec,
    pub budgets: Vec<f64>,
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<PresetSpec>,
    /// One per company; all Nash when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policies: Option<Vec<Policy>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ExperimentKind>,
    pub graph: GraphSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<AlphaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<InitialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<SimulationModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Iteration cap for fixed-point solves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game: Option<GameSpec>,
}

/// Top-level fields that command-line flags replace.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub samples: Option<usize>,
    pub horizon: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::config(path, e.into_inner().to_string())
        })
    }

    pub fn apply(&mut self, o: &Overrides) {
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        if o.out_dir.is_some() {
            self.out_dir.clone_from(&o.out_dir);
        }
        if o.samples.is_some() {
            self.samples = o.samples;
        }
        if o.horizon.is_some() {
            self.horizon = o.horizon;
        }
    }

    /// Fills every default and every seed so the serialized config alone
    /// reproduces the run.
    pub fn resolve(mut self, kind: ExperimentKind) -> Result<Self, CliError> {
        match self.kind {
            Some(k) if k != kind => {
                return Err(CliError::config(
                    "kind",
                    format!("config is for {k:?} but the {kind:?} command was run"),
                ))
            }
            _ => self.kind = Some(kind),
        }
        let seed = *self.seed.get_or_insert(0);
        self.horizon.get_or_insert(DEFAULT_HORIZON);
        self.samples.get_or_insert(DEFAULT_SAMPLES);
        self.tol.get_or_insert(DEFAULT_TOL);
        if kind == ExperimentKind::Stability {
            self.max_iter.get_or_insert(DEFAULT_MAX_ITER);
        }
        self.out_dir.get_or_insert_with(|| PathBuf::from(DEFAULT_OUT_DIR));
        if kind == ExperimentKind::CompareMcNcpm {
            self.model.get_or_insert(SimulationModel::SocialSelf);
        }
        match &mut self.graph {
            GraphSpec::ErdosRenyi { seed: s, .. } | GraphSpec::PowerLaw { seed: s, .. } => {
                s.get_or_insert(seed);
            }
            _ => {}
        }
        if let Some(AlphaSpec::Uniform { seed: s, .. }) = &mut self.alpha {
            s.get_or_insert(seed.wrapping_add(1));
        }
        if kind != ExperimentKind::Stability {
            let p0 = self.p0.get_or_insert(if kind == ExperimentKind::Game {
                InitialSpec::Random { seed: None }
            } else {
                InitialSpec::Uniform
            });
            if let InitialSpec::Random { seed: s } = p0 {
                s.get_or_insert(seed.wrapping_add(2));
            }
        }
        if let Some(game) = &mut self.game {
            game.policies
                .get_or_insert_with(|| vec![Policy::Nash; game.budgets.len()]);
        }
        if self.samples == Some(0) {
            return Err(CliError::config("samples", "must be positive"));
        }
        if let Some(t) = self.tol {
            if t.is_nan() || t <= 0.0 {
                return Err(CliError::config("tol", "must be positive"));
            }
        }
        Ok(self)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn horizon(&self) -> usize {
        self.horizon.unwrap_or(DEFAULT_HORIZON)
    }

    pub fn samples(&self) -> usize {
        self.samples.unwrap_or(DEFAULT_SAMPLES)
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_TOL)
    }

    pub fn max_iter(&self) -> usize {
        self.max_iter.unwrap_or(DEFAULT_MAX_ITER)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }

    pub fn network(&self) -> Result<SocialNetwork, CliError> {
        self.graph
            .generate(self.seed())
            .map_err(|e| CliError::config("graph", e.to_string()))
    }

    pub fn open_mindedness(&self, n: usize) -> Result<OpenMindedness, CliError> {
        let values = match self.alpha.as_ref() {
            None => return Err(CliError::config("alpha", "missing field `alpha`")),
            Some(AlphaSpec::Explicit { values }) => values.clone(),
            Some(AlphaSpec::Uniform { lo, hi, seed }) => {
                if !(0.0 < *lo && lo < hi && *hi < 1.0) {
                    return Err(CliError::config(
                        "alpha",
                        format!("need 0 < lo < hi < 1, got lo = {lo}, hi = {hi}"),
                    ));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(self.seed()));
                (0..n).map(|_| rng.random_range(*lo..*hi)).collect()
            }
        };
        if values.len() != n {
            return Err(CliError::config(
                "alpha",
                format!("{} values for a graph with {n} nodes", values.len()),
            ));
        }
        OpenMindedness::new(values).map_err(|e| CliError::config("alpha", e.to_string()))
    }

    pub fn conversion(&self) -> Result<ProductConversionGraph, CliError> {
        let rows = self
            .delta
            .as_deref()
            .ok_or_else(|| CliError::config("delta", "missing field `delta`"))?;
        ProductConversionGraph::from_rows(rows).map_err(|e| CliError::config("delta", e.to_string()))
    }

    pub fn initial(&self, n: usize, r: usize) -> Result<ProbabilityMatrix, CliError> {
        let bad = |e: ncpm_core::Error| CliError::config("p0", e.to_string());
        let p0 = match self.p0.as_ref().unwrap_or(&InitialSpec::Uniform) {
            InitialSpec::Explicit { rows } => ProbabilityMatrix::from_rows(rows).map_err(bad)?,
            InitialSpec::Uniform => ProbabilityMatrix::uniform(n, r),
            InitialSpec::Consensus { row } => ProbabilityMatrix::consensus(n, row).map_err(bad)?,
            InitialSpec::Random { seed } => {
                ProbabilityMatrix::random(n, r, &mut ChaCha8Rng::seed_from_u64(seed.unwrap_or(self.seed())))
            }
        };
        if p0.n() != n || p0.r() != r {
            return Err(CliError::config(
                "p0",
                format!("shape {}x{} does not match {n} nodes and {r} products", p0.n(), p0.r()),
            ));
        }
        Ok(p0)
    }

    pub fn game_config(&self, net: SocialNetwork, alpha: OpenMindedness) -> Result<GameConfig, CliError> {
        let spec = self
            .game
            .as_ref()
            .ok_or_else(|| CliError::config("game", "missing field `game`"))?;
        let mode = match spec.mode {
            GameModeSpec::SeedingQuality => {
                let preset = spec
                    .preset
                    .as_ref()
                    .map(|p| QualityPreset::new(p.xi.clone(), p.u))
                    .transpose()
                    .map_err(|e| CliError::config("game.preset", e.to_string()))?;
                GameMode::SeedingQuality { preset }
            }
            GameModeSpec::SeedingOnly => GameMode::SeedingOnly {
                conversion: self.conversion()?,
            },
        };
        GameConfig::new(net, alpha, spec.budgets.clone(), spec.gamma, mode)
            .map_err(|e| CliError::config("game", e.to_string()))
    }

    pub fn policies(&self) -> Vec<Policy> {
        let game = self.game.as_ref();
        game.and_then(|g| g.policies.clone())
            .unwrap_or_else(|| vec![Policy::Nash; game.map_or(0, |g| g.budgets.len())])
    }
}
