//! Bandit-feedback learners: log-barrier optimistic mirror descent with
//! recency predictions and importance-weighted utility estimates, and its
//! BM wrapper in which every sub-learner conditions on the one sampled action.

use crate::barrier::{barrier_gradient, maximize_linear_minus_barrier, reduce_utility, ReducedPoint, SolverSettings, Strategy};
use crate::bm::{stationary_distribution, StochasticMatrix};
use crate::error::{Error, Result};
use crate::rates::BANDIT_RATE;

/// Smallest sampling probability accepted as an importance weight denominator.
pub const MIN_SAMPLING_PROB: f64 = 1e-12;

/// The scalar feedback of one bandit round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BanditObservation {
    pub played: usize,
    pub value: f64,
}

/// `û[a] = m[a] + 1{a = played}·(value − m[a])/p[played]`.
pub fn importance_estimate(sampling: &Strategy, prediction: &[f64], obs: BanditObservation) -> Result<Vec<f64>> {
    let d = prediction.len();
    if sampling.dim() != d || obs.played >= d {
        return Err(Error::Input(format!("played action {} out of range for {d} actions", obs.played)));
    }
    if !obs.value.is_finite() {
        return Err(Error::Input(format!("observed value {} is not finite", obs.value)));
    }
    let p = sampling.probs()[obs.played];
    if !(p >= MIN_SAMPLING_PROB) {
        return Err(Error::Domain(format!("importance weight overflow: sampling probability {p:e}")));
    }
    let mut est = prediction.to_vec();
    est[obs.played] += (obs.value - prediction[obs.played]) / p;
    Ok(est)
}

/// Optimistic mirror descent with the log-barrier on one simplex.
///
/// `x^(t) = argmax η⟨x, m^(t)⟩ − D_R(x, g^(t−1))` and
/// `g^(t) = argmax η⟨g, û^(t)⟩ − D_R(g, g^(t−1))`, where `m^(t)[a]` is the
/// value seen the last time `a` was played (0 if never).
#[derive(Debug, Clone)]
pub struct OmdState {
    g: ReducedPoint,
    x: ReducedPoint,
    rho: Vec<usize>,
    last_seen: Vec<f64>,
    eta: f64,
    settings: SolverSettings,
    t: usize,
    last_decrement: Option<f64>,
}

impl OmdState {
    /// Rates above `1/162` are refused unless `allow_override` is set.
    pub fn new(d: usize, eta: f64, settings: SolverSettings, allow_override: bool) -> Result<Self> {
        if d == 0 {
            return Err(Error::Input("learner needs at least one action".into()));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Input(format!("learning rate must be positive, got {eta}")));
        }
        if eta > BANDIT_RATE && !allow_override {
            return Err(Error::Precondition(format!("bandit OMD needs eta <= 1/162, got {eta}")));
        }
        settings.validate()?;
        Ok(OmdState {
            g: ReducedPoint::uniform(d),
            x: ReducedPoint::uniform(d),
            rho: vec![0; d],
            last_seen: vec![0.0; d],
            eta,
            settings,
            t: 0,
            last_decrement: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.rho.len()
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `m^(t)`, the prediction for the next round.
    pub fn prediction(&self) -> &[f64] {
        &self.last_seen
    }

    /// Last round at which each action was played (0 if never).
    pub fn rho(&self) -> &[usize] {
        &self.rho
    }

    pub fn current(&self) -> Strategy {
        self.x.to_strategy()
    }

    pub fn secondary(&self) -> Strategy {
        self.g.to_strategy()
    }

    pub fn last_decrement(&self) -> Option<f64> {
        self.last_decrement
    }

    /// `argmax η⟨y, v⟩ − D_R(y, g)` in reduced coordinates.
    fn prox(&mut self, v: &[f64]) -> Result<ReducedPoint> {
        let anchor = barrier_gradient(&self.g);
        let linear: Vec<f64> = reduce_utility(v).iter().zip(&anchor).map(|(v, a)| self.eta * v + a).collect();
        let solve = maximize_linear_minus_barrier(&linear, &self.g, &self.settings)?;
        self.last_decrement = Some(self.last_decrement.map_or(solve.decrement, |d| d.max(solve.decrement)));
        Ok(solve.point)
    }

    pub fn omd_next(&mut self) -> Result<Strategy> {
        self.t += 1;
        self.last_decrement = None;
        let m = self.last_seen.clone();
        self.x = self.prox(&m)?;
        Ok(self.x.to_strategy())
    }

    /// Update after sampling from this learner's own iterate.
    pub fn omd_observe(&mut self, obs: BanditObservation) -> Result<()> {
        let sampling = self.x.to_strategy();
        self.omd_observe_sampled(obs, &sampling)
    }

    /// Update when the played action was drawn from `sampling`, which then
    /// supplies the importance weight.
    pub fn omd_observe_sampled(&mut self, obs: BanditObservation, sampling: &Strategy) -> Result<()> {
        let est = importance_estimate(sampling, &self.last_seen, obs)?;
        self.g = self.prox(&est)?;
        self.rho[obs.played] = self.t;
        self.last_seen[obs.played] = obs.value;
        Ok(())
    }
}

/// The BM master over bandit OMD sub-learners.
#[derive(Debug, Clone)]
pub struct BanditBm {
    sub_learners: Vec<OmdState>,
    current: Strategy,
    rows: Vec<Strategy>,
}

impl BanditBm {
    pub fn new(m: usize, eta: f64, settings: SolverSettings, allow_override: bool) -> Result<Self> {
        let sub_learners = (0..m).map(|_| OmdState::new(m, eta, settings, allow_override)).collect::<Result<_>>()?;
        Ok(BanditBm { sub_learners, current: Strategy::uniform(m), rows: vec![Strategy::uniform(m); m] })
    }

    pub fn num_actions(&self) -> usize {
        self.sub_learners.len()
    }

    pub fn sub_learners(&self) -> &[OmdState] {
        &self.sub_learners
    }

    pub fn current(&self) -> &Strategy {
        &self.current
    }

    pub fn rows(&self) -> &[Strategy] {
        &self.rows
    }

    pub fn last_decrement(&self) -> Option<f64> {
        self.sub_learners.iter().filter_map(OmdState::last_decrement).reduce(f64::max)
    }

    pub fn bandit_bm_next(&mut self) -> Result<(Strategy, StochasticMatrix)> {
        let rows = self.sub_learners.iter_mut().map(OmdState::omd_next).collect::<Result<Vec<_>>>()?;
        let q = StochasticMatrix::from_strategies(&rows)?;
        let x = stationary_distribution(&q)?;
        self.rows = rows;
        self.current = x.clone();
        Ok((x, q))
    }

    /// Forwards `(played, x[a]·value)` to sub-learner `a`; the importance
    /// weight is the master's probability of the played action.
    pub fn bandit_bm_observe(&mut self, obs: BanditObservation) -> Result<()> {
        if !(obs.value.abs() <= 1.0) {
            return Err(Error::Input(format!("bandit value must lie in [-1, 1], got {}", obs.value)));
        }
        let x = self.current.clone();
        for (l, &w) in self.sub_learners.iter_mut().zip(x.probs()) {
            l.omd_observe_sampled(BanditObservation { played: obs.played, value: w * obs.value }, &x)?;
        }
        Ok(())
    }
}
