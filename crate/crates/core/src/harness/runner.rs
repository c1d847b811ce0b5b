//! The synchronous simultaneous-move experiment loop.

use super::config::ExperimentConfig;
use crate::bandit::{BanditBm, BanditObservation};
use crate::barrier::Strategy;
use crate::bm::{BmMwu, BmOftrl};
use crate::error::{Error, Result};
use crate::games::{sample_action, NormalFormGame};
use crate::learners::{MwuState, RegretMinimizer};
use crate::metrics::{Algorithm, PlayerTrace, Trace, TraceMeta};
use crate::robust::RobustState;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

/// A finished run: the (resolved) configuration and the full trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub trace: Trace,
}

impl RunRecord {
    pub fn game(&self) -> Result<NormalFormGame> {
        self.config.game.resolve().map(|(g, _)| g)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: RunRecord = serde_json::from_str(text)?;
        r.trace.validate()?;
        Ok(r)
    }
}

enum Learner {
    BmOftrl(BmOftrl),
    BmMwu(BmMwu),
    Mwu(MwuState),
    Robust(Box<RobustState>),
    Bandit(BanditBm),
}

impl Learner {
    fn build(alg: Algorithm, m: usize, eta: f64, cfg: &ExperimentConfig, m_list: &[usize]) -> Result<Self> {
        Ok(match alg {
            Algorithm::BmOftrlLogbar => Learner::BmOftrl(BmOftrl::oftrl(m, eta, cfg.solver)?),
            Algorithm::BmMwu => Learner::BmMwu(BmMwu::mwu(m, eta)?),
            Algorithm::Mwu => Learner::Mwu(MwuState::new(m, eta, false)?),
            Algorithm::Robust => Learner::Robust(Box::new(
                RobustState::new(m, eta, cfg.solver, m_list.to_vec(), cfg.horizon)?
                    .with_threshold_scale(cfg.robust_threshold_scale)?,
            )),
            Algorithm::BanditBmOmd => Learner::Bandit(BanditBm::new(m, eta, cfg.solver, cfg.allow_rate_override)?),
        })
    }

    fn full_info(&mut self) -> Option<&mut dyn RegretMinimizer> {
        match self {
            Learner::BmOftrl(l) => Some(l),
            Learner::BmMwu(l) => Some(l),
            Learner::Mwu(l) => Some(l),
            Learner::Robust(l) => Some(l.as_mut()),
            Learner::Bandit(_) => None,
        }
    }

    fn next(&mut self) -> Result<Strategy> {
        match self {
            Learner::Bandit(l) => l.bandit_bm_next().map(|(x, _)| x),
            other => other.full_info().expect("full-information learner").next_strategy(),
        }
    }

    fn rows(&self) -> Option<Vec<Strategy>> {
        match self {
            Learner::BmOftrl(l) => Some(l.rows().to_vec()),
            Learner::BmMwu(l) => Some(l.rows().to_vec()),
            Learner::Mwu(_) => None,
            Learner::Robust(l) => Some(l.rows().to_vec()),
            Learner::Bandit(l) => Some(l.rows().to_vec()),
        }
    }

    /// Decrement of the last solve, for learners that run the Newton solver.
    fn decrement(&self) -> Option<f64> {
        match self {
            Learner::BmOftrl(l) => Some(l.last_decrement().unwrap_or(0.0)),
            Learner::Robust(l) => Some(l.last_decrement().unwrap_or(0.0)),
            Learner::Bandit(l) => Some(l.last_decrement().unwrap_or(0.0)),
            Learner::BmMwu(_) | Learner::Mwu(_) => None,
        }
    }
}

/// Independent per-player generators: player `i` uses the base stream
/// after `i + 1` jumps.
pub fn player_streams(seed: u64, n: usize) -> Vec<Xoshiro256PlusPlus> {
    let mut stream = Xoshiro256PlusPlus::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            stream.jump();
            stream.clone()
        })
        .collect()
}

/// Runs the configured experiment.
///
/// Round 0 exchanges the expected utilities at the uniform profile (skipped
/// for bandit players and in adversarial runs, where `u^(0) = 0`). Each
/// round `t = 1..=T` queries every player, evaluates all utilities at the
/// simultaneous profile, then delivers feedback; bandit players instead see
/// `u_i^(t)[a]` for an action `a` drawn from their own stream.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunRecord> {
    cfg.solver.validate()?;
    let (game, game_id) = cfg.game.resolve()?;
    let n = game.num_players();
    let m_list = game.actions().to_vec();
    let algorithms = cfg.player_algorithms(n)?;
    let eta = cfg.eta.resolve(&game)?;
    let mut learners = algorithms
        .iter()
        .zip(&m_list)
        .map(|(&alg, &m)| Learner::build(alg, m, eta, cfg, &m_list))
        .collect::<Result<Vec<_>>>()?;
    let mut rngs = player_streams(cfg.seed, n);
    let bandit = algorithms.contains(&Algorithm::BanditBmOmd);
    let adversarial = cfg.adversary.is_some();

    let uniform: Vec<Strategy> = m_list.iter().map(|&m| Strategy::uniform(m)).collect();
    let mut players = Vec::with_capacity(n);
    for (i, learner) in learners.iter_mut().enumerate() {
        let u0 = match (adversarial, learner.full_info()) {
            (false, Some(l)) => {
                let u0 = game.expected_utility_vector(i, &uniform)?;
                l.set_prediction(&u0)?;
                u0
            }
            _ => vec![0.0; m_list[i]],
        };
        let mut p = PlayerTrace::new(algorithms[i], eta, uniform[i].clone(), u0, learner.rows());
        if algorithms[i] == Algorithm::BanditBmOmd {
            p.played = Some(Vec::new());
        }
        players.push(p);
    }

    for t in 1..=cfg.horizon {
        let step = |e: Error| e.at_step(t);
        let profile = learners.iter_mut().map(Learner::next).collect::<Result<Vec<_>>>().map_err(step)?;
        let utilities = (0..n)
            .map(|i| match &cfg.adversary {
                Some(adv) => Ok(adv.utility(m_list[i], t)),
                None => game.expected_utility_vector(i, &profile),
            })
            .collect::<Result<Vec<_>>>()
            .map_err(step)?;
        for (i, learner) in learners.iter_mut().enumerate() {
            let u = &utilities[i];
            let p = &mut players[i];
            // rows and decrement of this round's play, before a robust switch
            if let (Some(rows), Some(r)) = (p.rows.as_mut(), learner.rows()) {
                rows.push(r);
            }
            let mut decrement = learner.decrement();
            match &mut *learner {
                Learner::Bandit(l) => {
                    let a = sample_action(&profile[i], &mut rngs[i]);
                    l.bandit_bm_observe(BanditObservation { played: a, value: u[a] }).map_err(step)?;
                    p.played.as_mut().expect("bandit record").push(a);
                    decrement = Some(l.last_decrement().unwrap_or(0.0));
                }
                other => other.full_info().expect("full-information learner").observe(u).map_err(step)?,
            }
            if let Some(d) = decrement {
                p.decrements.push(d);
            }
            if let Learner::Robust(l) = &*learner {
                p.switched_at = l.switched_at();
            }
            p.strategies.push(profile[i].clone());
            p.utilities.push(u.clone());
        }
    }
    let meta = TraceMeta {
        game: game_id,
        seed: cfg.seed,
        actions: m_list,
        bandit,
        adversarial,
        solver: cfg.solver,
        neighborhoods: game.graph().map(|g| g.neighborhoods().to_vec()),
    };
    Ok(RunRecord { config: cfg.clone(), trace: Trace { meta, players } })
}
