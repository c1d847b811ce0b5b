//! Regret accounting, equilibrium gaps, path lengths and runtime checkers for
//! the regret and stability inequalities satisfied by the BM learners.
//!
//! Index conventions: a trace of horizon `T` stores strategies and utilities
//! for `t = 0..=T`, where index 0 holds the initial (uniform) play and the
//! round-0 feedback. Regret sums run over `t = 1..=T`; path lengths and
//! utility variations pair step `t` with step `t − 1` for `t = 1..=T`.

use crate::barrier::{barrier_value_full, dual_local_norm, primal_local_norm, SolverSettings, Strategy};
use crate::error::{Error, Result};
use crate::games::{InteractionGraph, NormalFormGame};
use crate::rates;
use serde::{Deserialize, Serialize};

/// Additive slack per step granted to every inequality checker.
pub const SLACK_PER_STEP: f64 = 1e-6;

/// Utilities above this magnitude break the `‖u‖∞ ≤ 1` hypothesis.
const UTILITY_BOUND: f64 = 1.0 + 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "bm-oftrl-logbar")]
    BmOftrlLogbar,
    #[serde(rename = "bm-mwu")]
    BmMwu,
    #[serde(rename = "mwu")]
    Mwu,
    #[serde(rename = "robust")]
    Robust,
    #[serde(rename = "bandit-bm-omd")]
    BanditBmOmd,
}

impl Algorithm {
    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::BmOftrlLogbar => "bm-oftrl-logbar",
            Algorithm::BmMwu => "bm-mwu",
            Algorithm::Mwu => "mwu",
            Algorithm::Robust => "robust",
            Algorithm::BanditBmOmd => "bandit-bm-omd",
        }
    }

    pub fn parse(tag: &str) -> Result<Self> {
        Ok(match tag {
            "bm-oftrl-logbar" => Algorithm::BmOftrlLogbar,
            "bm-mwu" => Algorithm::BmMwu,
            "mwu" => Algorithm::Mwu,
            "robust" => Algorithm::Robust,
            "bandit-bm-omd" => Algorithm::BanditBmOmd,
            other => return Err(Error::Config(format!("unknown algorithm tag {other:?}"))),
        })
    }

    pub fn is_bm(self) -> bool {
        !matches!(self, Algorithm::Mwu)
    }
}

/// Run-level metadata stored with a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceMeta {
    pub game: String,
    pub seed: u64,
    pub actions: Vec<usize>,
    /// Bandit runs are refused by the full-information checkers.
    pub bandit: bool,
    /// Adversarial runs skip the round-0 exchange (`u^(0) = 0`).
    #[serde(default)]
    pub adversarial: bool,
    pub solver: SolverSettings,
    /// Neighborhoods of the interaction graph, if the game has one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neighborhoods: Option<Vec<Vec<usize>>>,
}

/// The history of one player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerTrace {
    pub algorithm: Algorithm,
    pub eta: f64,
    /// `x^(t)` for `t = 0..=T`.
    pub strategies: Vec<Strategy>,
    /// `u^(t)` for `t = 0..=T`.
    pub utilities: Vec<Vec<f64>>,
    /// Sub-learner strategies `x_a^(t)` for `t = 0..=T`, for BM players.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<Vec<Strategy>>>,
    /// Largest Newton decrement of each solved round `t = 1..=T`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub decrements: Vec<f64>,
    /// Sampled actions for `t = 1..=T` in bandit runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub played: Option<Vec<usize>>,
    /// Round at which a robust learner switched to its fallback.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub switched_at: Option<usize>,
}

impl PlayerTrace {
    pub fn new(algorithm: Algorithm, eta: f64, x0: Strategy, u0: Vec<f64>, rows0: Option<Vec<Strategy>>) -> Self {
        PlayerTrace {
            algorithm,
            eta,
            strategies: vec![x0],
            utilities: vec![u0],
            rows: rows0.map(|r| vec![r]),
            decrements: Vec::new(),
            played: None,
            switched_at: None,
        }
    }

    pub fn horizon(&self) -> usize {
        self.strategies.len().saturating_sub(1)
    }

    pub fn num_actions(&self) -> usize {
        self.strategies.first().map_or(0, Strategy::dim)
    }

    /// Utility seen by sub-learner `a` at step `t`: `x^(t)[a]·u^(t)`.
    pub fn scaled_utility(&self, a: usize, t: usize) -> Vec<f64> {
        let w = self.strategies[t].probs()[a];
        self.utilities[t].iter().map(|u| w * u).collect()
    }

    fn max_abs_utility(&self) -> f64 {
        self.utilities.iter().flatten().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    fn validate(&self, index: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::Input(format!("player {index}: {msg}")));
        let len = self.strategies.len();
        if len == 0 {
            return bad("no strategies recorded".into());
        }
        let m = self.num_actions();
        if self.utilities.len() != len {
            return bad(format!("{} utilities for {len} strategies", self.utilities.len()));
        }
        if self.strategies.iter().any(|x| x.dim() != m) || self.utilities.iter().any(|u| u.len() != m) {
            return bad("inconsistent action counts".into());
        }
        if self.utilities.iter().flatten().any(|v| !v.is_finite()) {
            return bad("non-finite utility".into());
        }
        // Strategies may have been deserialized without validation.
        for x in &self.strategies {
            Strategy::new(x.probs().to_vec())?;
        }
        if let Some(rows) = &self.rows {
            if rows.len() != len {
                return bad(format!("{} row sets for {len} strategies", rows.len()));
            }
            for r in rows.iter().flatten() {
                if r.dim() != m {
                    return bad("sub-learner row of wrong dimension".into());
                }
                Strategy::new(r.probs().to_vec())?;
            }
            if rows.iter().any(|r| r.len() != m) {
                return bad("wrong number of sub-learner rows".into());
            }
        }
        if !self.decrements.is_empty() && self.decrements.len() != len - 1 {
            return bad(format!("{} decrements for {} rounds", self.decrements.len(), len - 1));
        }
        if let Some(p) = &self.played {
            if p.len() != len - 1 || p.iter().any(|&a| a >= m) {
                return bad("malformed played-action record".into());
            }
        }
        Ok(())
    }
}

/// Full multi-player history of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trace {
    pub meta: TraceMeta,
    pub players: Vec<PlayerTrace>,
}

impl Trace {
    pub fn horizon(&self) -> usize {
        self.players.first().map_or(0, PlayerTrace::horizon)
    }

    pub fn num_players(&self) -> usize {
        self.players.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.players.len() != self.meta.actions.len() {
            return Err(Error::Input(format!(
                "{} players but {} action counts",
                self.players.len(),
                self.meta.actions.len()
            )));
        }
        let len = self.players.first().map_or(0, |p| p.strategies.len());
        for (i, p) in self.players.iter().enumerate() {
            p.validate(i)?;
            if p.strategies.len() != len {
                return Err(Error::Input(format!("player {i} has a different horizon")));
            }
            if p.num_actions() != self.meta.actions[i] {
                return Err(Error::Input(format!("player {i} has the wrong action count")));
            }
        }
        Ok(())
    }

    pub fn graph(&self) -> Result<Option<InteractionGraph>> {
        self.meta.neighborhoods.clone().map(InteractionGraph::new).transpose()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: Trace = serde_json::from_str(s)?;
        t.validate()?;
        Ok(t)
    }
}

/// Running totals from which external and swap regret are read off.
///
/// `cross[a][b] = Σ_t x^(t)[a]·u^(t)[b]`.
#[derive(Debug, Clone)]
pub struct RegretAccumulator {
    m: usize,
    cross: Vec<f64>,
    cumulative: Vec<f64>,
    realized: f64,
    steps: usize,
}

impl RegretAccumulator {
    pub fn new(m: usize) -> Self {
        RegretAccumulator { m, cross: vec![0.0; m * m], cumulative: vec![0.0; m], realized: 0.0, steps: 0 }
    }

    pub fn push(&mut self, x: &[f64], u: &[f64]) {
        debug_assert!(x.len() == self.m && u.len() == self.m);
        for a in 0..self.m {
            for b in 0..self.m {
                self.cross[a * self.m + b] += x[a] * u[b];
            }
            self.cumulative[a] += u[a];
        }
        self.realized += x.iter().zip(u).map(|(x, u)| x * u).sum::<f64>();
        self.steps += 1;
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn external_regret(&self) -> f64 {
        if self.steps == 0 {
            return 0.0;
        }
        self.cumulative.iter().copied().fold(f64::NEG_INFINITY, f64::max) - self.realized
    }

    pub fn swap_regret(&self) -> f64 {
        let m = self.m;
        (0..m)
            .map(|a| {
                let own = self.cross[a * m + a];
                (0..m).map(|b| self.cross[a * m + b] - own).fold(0.0, f64::max)
            })
            .sum()
    }
}

fn check_aligned(xs: &[Strategy], us: &[Vec<f64>]) -> bool {
    if xs.len() != us.len() {
        panic!("strategy and utility series have lengths {} and {}", xs.len(), us.len());
    }
    if xs.is_empty() {
        log::warn!("regret of an empty series is 0");
        return false;
    }
    true
}

fn accumulate(xs: &[Strategy], us: &[Vec<f64>]) -> RegretAccumulator {
    let mut acc = RegretAccumulator::new(xs[0].dim());
    for (x, u) in xs.iter().zip(us) {
        acc.push(x.probs(), u);
    }
    acc
}

/// `max_a Σ_t (u^(t)[a] − ⟨x^(t), u^(t)⟩)` over an aligned series.
pub fn external_regret(xs: &[Strategy], us: &[Vec<f64>]) -> f64 {
    if !check_aligned(xs, us) {
        return 0.0;
    }
    accumulate(xs, us).external_regret()
}

/// `Σ_a max_b Σ_t x^(t)[a]·(u^(t)[b] − u^(t)[a])` over an aligned series.
pub fn swap_regret(xs: &[Strategy], us: &[Vec<f64>]) -> f64 {
    if !check_aligned(xs, us) {
        return 0.0;
    }
    accumulate(xs, us).swap_regret()
}

/// `Σ_{t≥1} ‖x^(t) − x^(t−1)‖₁²` over a series starting at `t = 0`.
pub fn path_length_sq(xs: &[Strategy]) -> f64 {
    xs.windows(2).map(|w| w[1].l1_distance(&w[0]).powi(2)).sum()
}

fn path_length_terms(xs: &[Strategy]) -> impl Iterator<Item = f64> + '_ {
    xs.windows(2).map(|w| w[1].l1_distance(&w[0]).powi(2))
}

fn variation_terms(us: &[Vec<f64>]) -> impl Iterator<Item = f64> + '_ {
    us.windows(2).map(|w| w[1].iter().zip(&w[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max).powi(2))
}

fn sup_norm(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Correlated-equilibrium gap of the average play, per player.
///
/// For each player, the average correlated distribution prescribes action
/// `a` with weight `(1/T)Σ_t x^(t)[a]`; a deviation `a → b` gains
/// `(1/T)Σ_t x^(t)[a]·(u^(t)[b] − u^(t)[a])`, and the gap is the best total
/// gain over all swap functions.
pub fn ce_gap(trace: &Trace) -> Vec<f64> {
    let horizon = trace.horizon();
    trace
        .players
        .iter()
        .map(|p| {
            if horizon == 0 {
                return 0.0;
            }
            let m = p.num_actions();
            let scale = 1.0 / horizon as f64;
            let mut avg = vec![vec![0.0; m]; m];
            for t in 1..=horizon {
                let x = p.strategies[t].probs();
                let u = &p.utilities[t];
                for a in 0..m {
                    for b in 0..m {
                        avg[a][b] += x[a] * u[b];
                    }
                }
            }
            avg.iter()
                .enumerate()
                .map(|(a, row)| row.iter().map(|v| (v - row[a]) * scale).fold(0.0, f64::max))
                .sum()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerRegret {
    pub external_regret: f64,
    pub swap_regret: f64,
    pub path_len_sq: f64,
    pub ce_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub players: Vec<PlayerRegret>,
    pub max_swap_regret: f64,
    /// Nash gap of the joint play at `t = 1..=T`, when the game is supplied.
    pub nash_gap: Vec<f64>,
}

pub fn regret_report(trace: &Trace, game: Option<&NormalFormGame>) -> Result<RegretReport> {
    let gaps = ce_gap(trace);
    let players: Vec<PlayerRegret> = trace
        .players
        .iter()
        .zip(gaps)
        .map(|(p, ce_gap)| PlayerRegret {
            external_regret: external_regret(&p.strategies[1..], &p.utilities[1..]),
            swap_regret: swap_regret(&p.strategies[1..], &p.utilities[1..]),
            path_len_sq: path_length_sq(&p.strategies),
            ce_gap,
        })
        .collect();
    let max_swap_regret = players.iter().map(|p| p.swap_regret).fold(0.0, f64::max);
    let nash_gap = match game {
        Some(g) => (1..=trace.horizon())
            .map(|t| {
                let profile: Vec<Strategy> = trace.players.iter().map(|p| p.strategies[t].clone()).collect();
                g.nash_gap(&profile)
            })
            .collect::<Result<_>>()?,
        None => Vec::new(),
    };
    Ok(RegretReport { players, max_swap_regret, nash_gap })
}

/// Per-sub-learner external regrets of a BM player, each against its scaled
/// utilities `x^(t)[a]·u^(t)`.
pub fn sub_learner_regrets(p: &PlayerTrace) -> Result<Vec<f64>> {
    let rows = p.rows.as_ref().ok_or_else(|| Error::Precondition("trace has no sub-learner rows".into()))?;
    let m = p.num_actions();
    Ok((0..m)
        .map(|a| {
            let xs: Vec<Strategy> = rows[1..].iter().map(|r| r[a].clone()).collect();
            let us: Vec<Vec<f64>> = (1..=p.horizon()).map(|t| p.scaled_utility(a, t)).collect();
            external_regret(&xs, &us)
        })
        .collect())
}

/// `SwapReg(master) − Σ_a Reg_a`, zero up to the stationary-solve residual.
pub fn decomposition_residual(p: &PlayerTrace) -> Result<f64> {
    let sub: f64 = sub_learner_regrets(p)?.iter().sum();
    Ok(swap_regret(&p.strategies[1..], &p.utilities[1..]) - sub)
}

/// Outcome of one inequality checker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub checker: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub player: Option<usize>,
    /// Left-hand side at the final step.
    pub lhs: f64,
    /// Right-hand side at the final step.
    pub rhs: f64,
    /// Smallest `rhs + slack − lhs` over all evaluated steps.
    pub margin: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<usize>,
}

impl CheckReport {
    /// A single evaluation of `lhs ≤ rhs + slack`.
    pub fn scalar(checker: &str, player: Option<usize>, lhs: f64, rhs: f64, slack: f64) -> Self {
        let mut t = Tracker::new(checker, player);
        t.step(0, lhs, rhs, slack);
        let mut r = t.finish();
        r.first_violation = None;
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }
}

/// Evaluates an inequality at a sequence of steps.
struct Tracker {
    report: CheckReport,
    evaluated: bool,
}

impl Tracker {
    fn new(checker: &str, player: Option<usize>) -> Self {
        Tracker {
            report: CheckReport {
                checker: checker.to_string(),
                player,
                lhs: 0.0,
                rhs: 0.0,
                margin: 0.0,
                pass: true,
                first_violation: None,
            },
            evaluated: false,
        }
    }

    fn step(&mut self, t: usize, lhs: f64, rhs: f64, slack: f64) {
        let margin = rhs + slack - lhs;
        let r = &mut self.report;
        if !self.evaluated || margin < r.margin {
            r.margin = margin;
        }
        self.evaluated = true;
        r.lhs = lhs;
        r.rhs = rhs;
        if !(margin >= 0.0) && r.first_violation.is_none() {
            r.first_violation = Some(t);
            r.pass = false;
        }
    }

    fn finish(self) -> CheckReport {
        self.report
    }
}

fn refuse_bandit(p: &PlayerTrace) -> Result<()> {
    if p.algorithm == Algorithm::BanditBmOmd || p.played.is_some() {
        return Err(Error::Precondition("full-information checkers refuse bandit traces".into()));
    }
    Ok(())
}

fn refuse_bandit_trace(trace: &Trace) -> Result<()> {
    if trace.meta.bandit {
        return Err(Error::Precondition("full-information checkers refuse bandit traces".into()));
    }
    trace.players.iter().try_for_each(refuse_bandit)
}

fn require_bounded(p: &PlayerTrace, what: &str) -> Result<()> {
    let b = p.max_abs_utility();
    if b > UTILITY_BOUND {
        return Err(Error::Precondition(format!("{what} needs utilities in [-1, 1], found magnitude {b}")));
    }
    Ok(())
}

fn require_horizon(horizon: usize, what: &str) -> Result<()> {
    if horizon < 2 {
        return Err(Error::Precondition(format!("{what} is stated for T >= 2, got T = {horizon}")));
    }
    Ok(())
}

fn require_algorithm(p: &PlayerTrace, index: Option<usize>, what: &str) -> Result<()> {
    if p.algorithm != Algorithm::BmOftrlLogbar {
        let who = index.map_or(String::new(), |i| format!(" for player {i}"));
        return Err(Error::Config(format!("{what} applies to bm-oftrl-logbar, got {}{who}", p.algorithm.tag())));
    }
    Ok(())
}

fn require_rows(p: &PlayerTrace) -> Result<&[Vec<Strategy>]> {
    p.rows.as_deref().ok_or_else(|| Error::Config("BM trace without sub-learner rows".into()))
}

/// Swap-regret RVU bound, checked on every prefix `τ = 2..=T`:
/// `SwapReg^τ ≤ 2m²·log τ/η + 4η·Σ‖Δu‖∞² − Σ‖Δx‖₁²/(2048·m·η)`.
///
/// With `allow_override` the rate and utility-range hypotheses are not
/// enforced, so the inequality can be probed outside its stated range.
pub fn rvu_swap_check(p: &PlayerTrace, player: Option<usize>, allow_override: bool) -> Result<CheckReport> {
    refuse_bandit(p)?;
    let horizon = p.horizon();
    require_horizon(horizon, "the swap-regret RVU bound")?;
    let m = p.num_actions();
    let eta = p.eta;
    if !allow_override {
        require_algorithm(p, player, "the swap-regret RVU bound")?;
        let cap = rates::rvu_swap_max_rate(m);
        if !(eta > 0.0 && eta <= cap * (1.0 + 1e-12)) {
            return Err(Error::Precondition(format!("the swap-regret RVU bound needs 0 < eta <= {cap}, got {eta}")));
        }
        require_bounded(p, "the swap-regret RVU bound")?;
    }
    let mut acc = RegretAccumulator::new(m);
    let mut variation = 0.0;
    let mut path = 0.0;
    let mut tracker = Tracker::new("rvu_swap_check", player);
    for (t, (dv, dx)) in variation_terms(&p.utilities).zip(path_length_terms(&p.strategies)).enumerate() {
        let t = t + 1;
        acc.push(p.strategies[t].probs(), &p.utilities[t]);
        variation += dv;
        path += dx;
        if t >= 2 {
            let rhs = rates::rvu_swap_rhs(m, eta, t, variation, path);
            tracker.step(t, acc.swap_regret(), rhs, t as f64 * SLACK_PER_STEP);
        }
    }
    Ok(tracker.finish())
}

fn require_uniform_rate(trace: &Trace, want: f64, what: &str) -> Result<()> {
    for (i, p) in trace.players.iter().enumerate() {
        require_algorithm(p, Some(i), what)?;
        if !rates::same_rate(p.eta, want) {
            return Err(Error::Config(format!("{what} is stated at eta = {want}, player {i} used {}", p.eta)));
        }
        require_bounded(p, what)?;
    }
    Ok(())
}

/// `Σ_i Σ_t ‖Δx_i‖₁² ≤ 8192·max m·Σm²·log τ` at the self-play preset rate,
/// checked on every prefix `τ = 2..=T`.
pub fn path_bound_check(trace: &Trace) -> Result<CheckReport> {
    refuse_bandit_trace(trace)?;
    let horizon = trace.horizon();
    require_horizon(horizon, "the path-length bound")?;
    let m_list = &trace.meta.actions;
    let eta = rates::theory_rate(trace.num_players(), m_list).map_err(|e| Error::Config(e.to_string()))?;
    require_uniform_rate(trace, eta, "the path-length bound")?;
    let mut tracker = Tracker::new("path_bound_check", None);
    let mut lhs = 0.0;
    for t in 1..=horizon {
        lhs += trace.players.iter().map(|p| p.strategies[t].l1_distance(&p.strategies[t - 1]).powi(2)).sum::<f64>();
        if t >= 2 {
            tracker.step(t, lhs, rates::path_bound_rhs(m_list, t), t as f64 * SLACK_PER_STEP);
        }
    }
    Ok(tracker.finish())
}

/// Per-step check of `‖Δx‖₁² ≤ 64·m·Σ_a ‖Δx_a‖²_{x_a^(t−1)}` relating the
/// movement of the stationary distribution to that of the rows.
pub fn gamma_term_check(master_xs: &[Strategy], rows: &[Vec<Strategy>], eta: f64) -> Result<CheckReport> {
    if !(eta > 0.0 && eta <= 1.0 / 16.0) {
        return Err(Error::Precondition(format!("the gamma-term bound needs 0 < eta <= 1/16, got {eta}")));
    }
    if master_xs.len() != rows.len() {
        return Err(Error::Input(format!("{} strategies but {} row sets", master_xs.len(), rows.len())));
    }
    let mut tracker = Tracker::new("gamma_term_check", None);
    for t in 1..master_xs.len() {
        let m = master_xs[t].dim();
        let lhs = master_xs[t].l1_distance(&master_xs[t - 1]).powi(2);
        let mut local = 0.0;
        for (now, before) in rows[t].iter().zip(&rows[t - 1]) {
            let delta: Vec<f64> = now.probs().iter().zip(before.probs()).map(|(a, b)| a - b).collect();
            local += primal_local_norm(before, &delta)?.powi(2);
        }
        tracker.step(t, lhs, 64.0 * m as f64 * local, SLACK_PER_STEP);
    }
    Ok(tracker.finish())
}

/// Reports of the multiplicative-stability checker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MulStabilityReport {
    /// `sqrt(Σ_r (1 − x^(t)[r]/x^(t−1)[r])²) ≤ 6η‖u^(t−1)‖∞ + 2η‖u^(t−2)‖∞` for every learner, `t ≥ 2`.
    pub rows: CheckReport,
    /// `Σ_a μ_a^(t) ≤ 8η` for every `t ≥ 1`.
    pub aggregate: CheckReport,
    /// `μ_a^(t) = max_r |1 − x_a^(t)[r]/x_a^(t−1)[r]|`, indexed `[t − 1][a]`.
    pub mu: Vec<Vec<f64>>,
}

/// Multiplicative stability of log-barrier OFTRL iterates.
///
/// `rows[a][t]` is learner `a`'s strategy at `t = 0..=T` and `utils[a][t]`
/// the utility it received. The slack at each step is
/// `4·tolerance/min_r x^(t−1)[r]`.
pub fn mul_stability_check(
    rows: &[Vec<Strategy>],
    etas: &[f64],
    utils: &[Vec<Vec<f64>>],
    tolerance: f64,
) -> Result<MulStabilityReport> {
    let k = rows.len();
    if etas.len() != k || utils.len() != k {
        return Err(Error::Input(format!("{k} learners but {} rates and {} utility series", etas.len(), utils.len())));
    }
    for (a, &eta) in etas.iter().enumerate() {
        if !(eta > 0.0 && eta <= 1.0 / 16.0) {
            return Err(Error::Precondition(format!("multiplicative stability needs eta <= 1/16, learner {a} has {eta}")));
        }
    }
    if let Some(b) = utils.iter().flatten().map(|u| sup_norm(u)).find(|b| *b > UTILITY_BOUND) {
        return Err(Error::Precondition(format!("multiplicative stability needs |u| <= 1, found {b}")));
    }
    let len = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != len) || utils.iter().any(|u| u.len() != len) {
        return Err(Error::Input("learner series of different lengths".into()));
    }
    let eta_max = etas.iter().copied().fold(0.0, f64::max);
    let mut row_tracker = Tracker::new("mul_stability_check", None);
    let mut agg_tracker = Tracker::new("mul_stability_aggregate", None);
    let mut mu = Vec::with_capacity(len.saturating_sub(1));
    for t in 1..len {
        let mut mu_t = Vec::with_capacity(k);
        let mut worst: Option<(f64, f64, f64)> = None;
        let mut agg_slack = 0.0;
        for a in 0..k {
            let (now, before) = (rows[a][t].probs(), rows[a][t - 1].probs());
            let min = rows[a][t - 1].min_prob();
            if !(min > 0.0) {
                return Err(Error::Domain(format!("learner {a} left the interior at step {}", t - 1)));
            }
            let ratios: Vec<f64> = now.iter().zip(before).map(|(n, b)| 1.0 - n / b).collect();
            mu_t.push(ratios.iter().fold(0.0_f64, |acc, r| acc.max(r.abs())));
            let slack = 4.0 * tolerance / min;
            agg_slack += slack;
            if t >= 2 {
                let lhs = ratios.iter().map(|r| r * r).sum::<f64>().sqrt();
                let rhs = 6.0 * etas[a] * sup_norm(&utils[a][t - 1]) + 2.0 * etas[a] * sup_norm(&utils[a][t - 2]);
                if worst.is_none_or(|(l, r, s)| rhs + slack - lhs < r + s - l) {
                    worst = Some((lhs, rhs, slack));
                }
            }
        }
        if let Some((lhs, rhs, slack)) = worst {
            row_tracker.step(t, lhs, rhs, slack);
        }
        agg_tracker.step(t, mu_t.iter().sum(), 8.0 * eta_max, agg_slack);
        mu.push(mu_t);
    }
    Ok(MulStabilityReport { rows: row_tracker.finish(), aggregate: agg_tracker.finish(), mu })
}

/// Per-learner strategy series and the matching utility series.
pub type LearnerSeries = (Vec<Vec<Strategy>>, Vec<Vec<Vec<f64>>>);

/// Sub-learner rows and scaled utilities of a BM player, in the layout of
/// [`mul_stability_check`].
pub fn learner_series(p: &PlayerTrace) -> Result<LearnerSeries> {
    let rows = require_rows(p)?;
    let m = p.num_actions();
    let per_learner = (0..m).map(|a| rows.iter().map(|r| r[a].clone()).collect()).collect();
    let utils = (0..m).map(|a| (0..=p.horizon()).map(|t| p.scaled_utility(a, t)).collect()).collect();
    Ok((per_learner, utils))
}

/// Individual swap-regret bound at the self-play preset rate, checked on every
/// prefix: `SwapReg_i^τ ≤ 256·max√m·((n−1)m_i² + Σm²)·log τ`.
pub fn swap_bound_check(p: &PlayerTrace, player: Option<usize>, n: usize, m_list: &[usize]) -> Result<CheckReport> {
    refuse_bandit(p)?;
    let horizon = p.horizon();
    require_horizon(horizon, "the individual swap-regret bound")?;
    require_algorithm(p, player, "the individual swap-regret bound")?;
    let eta = rates::theory_rate(n, m_list).map_err(|e| Error::Config(e.to_string()))?;
    if !rates::same_rate(p.eta, eta) {
        return Err(Error::Config(format!("the individual swap-regret bound is stated at eta = {eta}, got {}", p.eta)));
    }
    require_bounded(p, "the individual swap-regret bound")?;
    let mi = p.num_actions();
    if !m_list.contains(&mi) {
        return Err(Error::Config(format!("player has {mi} actions, not among {m_list:?}")));
    }
    let mut acc = RegretAccumulator::new(mi);
    let mut tracker = Tracker::new("swap_bound_check", player);
    for t in 1..=horizon {
        acc.push(p.strategies[t].probs(), &p.utilities[t]);
        if t >= 2 {
            tracker.step(t, acc.swap_regret(), rates::swap_bound_rhs(mi, m_list, t), t as f64 * SLACK_PER_STEP);
        }
    }
    Ok(tracker.finish())
}

/// Which large-game bound a trace's rate selects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeGameReport {
    pub c: usize,
    /// `Σ_i SwapReg_i ≤ 256·c·max√m·Σm²·log T`, at `η = 1/(128·c·max√m)`.
    pub aggregate: Option<CheckReport>,
    /// Per-player bounds at `η = 1/(128·√(cn)·max√m)`.
    pub individual: Vec<CheckReport>,
}

impl LargeGameReport {
    pub fn pass(&self) -> bool {
        self.aggregate.iter().chain(&self.individual).all(|r| r.pass)
    }
}

/// Swap-regret bounds for games with a sparse interaction graph.
///
/// The aggregate bound is evaluated when every player used the aggregate
/// preset rate, the individual bounds when every player used the individual
/// preset rate (the two coincide when `c² = c·n`, in which case both run).
pub fn large_game_check(trace: &Trace, graph: &InteractionGraph) -> Result<LargeGameReport> {
    refuse_bandit_trace(trace)?;
    let n = trace.num_players();
    if graph.neighborhoods().len() != n {
        return Err(Error::Input(format!("graph has {} nodes for {n} players", graph.neighborhoods().len())));
    }
    let horizon = trace.horizon();
    require_horizon(horizon, "the large-game bounds")?;
    let m_list = &trace.meta.actions;
    let c = graph.c();
    let agg_rate = rates::large_game_aggregate_rate(c, m_list);
    let ind_rate = rates::large_game_individual_rate(c, m_list);
    let all_at = |r: f64| trace.players.iter().all(|p| rates::same_rate(p.eta, r));
    let (use_agg, use_ind) = (all_at(agg_rate), all_at(ind_rate));
    if !use_agg && !use_ind {
        return Err(Error::Config(format!(
            "the large-game bounds are stated at eta = {agg_rate} (aggregate) or {ind_rate} (individual)"
        )));
    }
    let want = if use_agg { agg_rate } else { ind_rate };
    require_uniform_rate(trace, want, "the large-game bounds")?;

    let mut accs: Vec<RegretAccumulator> = m_list.iter().map(|&m| RegretAccumulator::new(m)).collect();
    let mut agg = use_agg.then(|| Tracker::new("large_game_check_aggregate", None));
    let mut ind: Vec<Tracker> = if use_ind {
        (0..n).map(|i| Tracker::new("large_game_check_individual", Some(i))).collect()
    } else {
        Vec::new()
    };
    for t in 1..=horizon {
        for (acc, p) in accs.iter_mut().zip(&trace.players) {
            acc.push(p.strategies[t].probs(), &p.utilities[t]);
        }
        if t < 2 {
            continue;
        }
        let slack = t as f64 * SLACK_PER_STEP;
        if let Some(tr) = agg.as_mut() {
            let lhs: f64 = accs.iter().map(RegretAccumulator::swap_regret).sum();
            tr.step(t, lhs, rates::large_game_aggregate_rhs(c, m_list, t), n as f64 * slack);
        }
        for (i, tr) in ind.iter_mut().enumerate() {
            tr.step(t, accs[i].swap_regret(), rates::large_game_individual_rhs(m_list[i], c, m_list, t), slack);
        }
    }
    Ok(LargeGameReport {
        c,
        aggregate: agg.map(Tracker::finish),
        individual: ind.into_iter().map(Tracker::finish).collect(),
    })
}

/// `(1 − 1/T)·x + (1/T)·uniform`, an interior stand-in for a comparator.
pub fn pull_toward_uniform(x: &Strategy, horizon: usize) -> Strategy {
    let d = x.dim();
    let w = 1.0 / horizon.max(1) as f64;
    let probs = x.probs().iter().map(|p| (1.0 - w) * p + w / d as f64).collect();
    Strategy::new(probs).expect("convex combination of strategies")
}

/// RVU bound of log-barrier OFTRL against an interior comparator `x*`,
/// checked on every prefix:
/// `Reg^τ(x*) ≤ R(x*)/η + 2η·Σ‖u^(t) − u^(t−1)‖²_{*,x^(t)} − Σ‖x^(t) − x^(t−1)‖²_{x^(t−1)}/(16η)`.
pub fn oftrl_rvu_check(xs: &[Strategy], us: &[Vec<f64>], eta: f64, comparator: &Strategy) -> Result<CheckReport> {
    if !(eta > 0.0 && eta <= 1.0 / 16.0) {
        return Err(Error::Precondition(format!("the OFTRL RVU bound needs 0 < eta <= 1/16, got {eta}")));
    }
    if xs.len() != us.len() {
        return Err(Error::Input(format!("{} strategies but {} utilities", xs.len(), us.len())));
    }
    let r_star = barrier_value_full(comparator)?;
    let mut tracker = Tracker::new("oftrl_rvu_check", None);
    let (mut regret, mut dual, mut primal) = (0.0, 0.0, 0.0);
    for t in 1..xs.len() {
        let u = &us[t];
        regret += comparator.dot(u) - xs[t].dot(u);
        let du: Vec<f64> = u.iter().zip(&us[t - 1]).map(|(a, b)| a - b).collect();
        dual += dual_local_norm(&xs[t], &du)?.powi(2);
        let dx: Vec<f64> = xs[t].probs().iter().zip(xs[t - 1].probs()).map(|(a, b)| a - b).collect();
        primal += primal_local_norm(&xs[t - 1], &dx)?.powi(2);
        let rhs = r_star / eta + 2.0 * eta * dual - primal / (16.0 * eta);
        tracker.step(t, regret, rhs, t as f64 * SLACK_PER_STEP);
    }
    Ok(tracker.finish())
}
