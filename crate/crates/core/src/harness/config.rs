//! TOML experiment configuration.

use crate::barrier::SolverSettings;
use crate::error::{Error, Result};
use crate::games::{self, NormalFormGame};
use crate::metrics::Algorithm;
use crate::rates;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomBimatrixSpec {
    pub m: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingSpec {
    pub players: usize,
    pub actions: usize,
    pub seed: u64,
}

/// Exactly one of `builtin`, `file`, `random_bimatrix` or `ring`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    /// `"shapley-variant"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_bimatrix: Option<RandomBimatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ring: Option<RingSpec>,
    /// Divide all utilities by the largest absolute entry.
    #[serde(default)]
    pub normalize: bool,
}

impl GameSpec {
    pub fn builtin(name: &str) -> Self {
        GameSpec { builtin: Some(name.into()), ..Default::default() }
    }

    pub fn random_bimatrix(m: usize, seed: u64) -> Self {
        GameSpec { random_bimatrix: Some(RandomBimatrixSpec { m, seed }), ..Default::default() }
    }

    pub fn ring(players: usize, actions: usize, seed: u64) -> Self {
        GameSpec { ring: Some(RingSpec { players, actions, seed }), ..Default::default() }
    }

    pub fn normalized(mut self) -> Self {
        self.normalize = true;
        self
    }

    /// The game and a short identifier for the trace.
    pub fn resolve(&self) -> Result<(NormalFormGame, String)> {
        let given = [self.builtin.is_some(), self.file.is_some(), self.random_bimatrix.is_some(), self.ring.is_some()];
        if given.iter().filter(|g| **g).count() != 1 {
            return Err(Error::Config(
                "[game] needs exactly one of `builtin`, `file`, `random_bimatrix`, `ring`".into(),
            ));
        }
        let (game, id) = if let Some(name) = &self.builtin {
            match name.as_str() {
                "shapley-variant" => (games::shapley_variant(), format!("builtin:{name}")),
                other => return Err(Error::Config(format!("unknown builtin game {other:?}"))),
            }
        } else if let Some(path) = &self.file {
            (games::load_game(path)?, format!("file:{}", path.display()))
        } else if let Some(r) = &self.random_bimatrix {
            (games::random_bimatrix(r.m, r.seed)?, format!("random-bimatrix:m={},seed={}", r.m, r.seed))
        } else {
            let r = self.ring.as_ref().expect("one source is set");
            (games::ring_game(r.players, r.actions, r.seed)?, format!("ring:n={},m={},seed={}", r.players, r.actions, r.seed))
        };
        if self.normalize {
            Ok((game.normalized(), format!("{id},normalized")))
        } else {
            Ok((game, id))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RatePreset {
    /// `1/(128·(n−1)·max √m)`.
    #[serde(rename = "theory")]
    Theory,
    /// `1/(128·c·max √m)`.
    #[serde(rename = "large-game-aggregate")]
    LargeGameAggregate,
    /// `1/(128·√(cn)·max √m)`.
    #[serde(rename = "large-game-individual")]
    LargeGameIndividual,
    /// `1/162`.
    #[serde(rename = "bandit")]
    Bandit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaSpec {
    Preset(RatePreset),
    Value(f64),
}

impl EtaSpec {
    pub fn resolve(&self, game: &NormalFormGame) -> Result<f64> {
        let m_list = game.actions();
        let graph_c = || {
            game.graph()
                .map(|g| g.c())
                .ok_or_else(|| Error::Config("large-game rate presets need a game with an interaction graph".into()))
        };
        let eta = match self {
            EtaSpec::Value(v) => *v,
            EtaSpec::Preset(RatePreset::Theory) => {
                rates::theory_rate(game.num_players(), m_list).map_err(|e| Error::Config(e.to_string()))?
            }
            EtaSpec::Preset(RatePreset::LargeGameAggregate) => rates::large_game_aggregate_rate(graph_c()?, m_list),
            EtaSpec::Preset(RatePreset::LargeGameIndividual) => rates::large_game_individual_rate(graph_c()?, m_list),
            EtaSpec::Preset(RatePreset::Bandit) => rates::BANDIT_RATE,
        };
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Config(format!("learning rate must be positive, got {eta}")));
        }
        Ok(eta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdversaryKind {
    /// `u^(t) = +e_a` on odd rounds and `−e_a` on even rounds.
    #[serde(rename = "alternating-sign")]
    AlternatingSign,
}

/// Replaces the game feedback of every player by a fixed sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversarySpec {
    pub kind: AdversaryKind,
    #[serde(default)]
    pub action: usize,
}

impl AdversarySpec {
    pub fn utility(&self, m: usize, t: usize) -> Vec<f64> {
        let sign = if t % 2 == 1 { 1.0 } else { -1.0 };
        (0..m).map(|a| if a == self.action % m { sign } else { 0.0 }).collect()
    }
}

fn yes() -> bool {
    true
}

/// Which checkers `verify` attempts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckToggles {
    #[serde(default = "yes")]
    pub identities: bool,
    #[serde(default = "yes")]
    pub rvu_swap: bool,
    #[serde(default = "yes")]
    pub path_bound: bool,
    #[serde(default = "yes")]
    pub gamma_term: bool,
    #[serde(default = "yes")]
    pub mul_stability: bool,
    #[serde(default = "yes")]
    pub swap_bound: bool,
    #[serde(default = "yes")]
    pub large_game: bool,
    #[serde(default = "yes")]
    pub newton_decrement: bool,
}

impl Default for CheckToggles {
    fn default() -> Self {
        CheckToggles {
            identities: true,
            rvu_swap: true,
            path_bound: true,
            gamma_term: true,
            mul_stability: true,
            swap_bound: true,
            large_game: true,
            newton_decrement: true,
        }
    }
}

fn default_algorithm() -> Algorithm {
    Algorithm::BmOftrlLogbar
}

fn default_eta() -> EtaSpec {
    EtaSpec::Preset(RatePreset::Theory)
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub game: GameSpec,
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
    /// Algorithm of every player unless `algorithms` lists one per player.
    #[serde(default = "default_algorithm")]
    pub algorithm: Algorithm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithms: Option<Vec<Algorithm>>,
    #[serde(default = "default_eta")]
    pub eta: EtaSpec,
    /// Lets learners and checkers run outside their stated rate range.
    #[serde(default)]
    pub allow_rate_override: bool,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adversary: Option<AdversarySpec>,
    /// Multiplier on the robust learner's variation budget (1 = exact).
    #[serde(default = "one")]
    pub robust_threshold_scale: f64,
    #[serde(default)]
    pub checks: CheckToggles,
}

impl ExperimentConfig {
    pub fn new(game: GameSpec, horizon: usize, algorithm: Algorithm, eta: EtaSpec) -> Self {
        ExperimentConfig {
            game,
            horizon,
            seed: 0,
            algorithm,
            algorithms: None,
            eta,
            allow_rate_override: false,
            solver: SolverSettings::default(),
            output: None,
            adversary: None,
            robust_threshold_scale: 1.0,
            checks: CheckToggles::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.solver.validate()?;
        Ok(cfg)
    }

    /// Loads a config; a relative game `file` is taken relative to the config.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&std::fs::read_to_string(path)?)?;
        if let Some(f) = &cfg.game.file {
            if f.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.game.file = Some(base.join(f));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn player_algorithms(&self, n: usize) -> Result<Vec<Algorithm>> {
        match &self.algorithms {
            Some(list) if list.len() != n => {
                Err(Error::Config(format!("`algorithms` lists {} entries for {n} players", list.len())))
            }
            Some(list) => Ok(list.clone()),
            None => Ok(vec![self.algorithm; n]),
        }
    }
}
