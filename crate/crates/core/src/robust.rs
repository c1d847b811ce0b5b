//! Adversarial-robustness wrapper around BM-OFTRL.
//!
//! The wrapper tracks `V_t = Σ_{τ≤t} ‖u^(τ) − u^(τ−1)‖∞²`. While `V_t` stays
//! within `8192·(n−1)·max m·Σm²·log t` it plays BM-OFTRL; the first time the
//! budget is exceeded (for `t ≥ 2`) the step is still delivered to BM-OFTRL,
//! after which a fresh BM-MWU at rate `sqrt(m·log m/T)` takes over for good.

use crate::barrier::{SolverSettings, Strategy};
use crate::bm::{BmMwu, BmOftrl};
use crate::error::{Error, Result};
use crate::learners::{fallback_rate, validate_utility, RegretMinimizer};
use crate::rates;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Optimistic,
    Fallback,
}

#[derive(Debug, Clone)]
pub struct RobustState {
    oftrl: BmOftrl,
    fallback: Option<BmMwu>,
    m_list: Vec<usize>,
    horizon: usize,
    variation_sum: f64,
    last_utility: Vec<f64>,
    t: usize,
    switched_at: Option<usize>,
    threshold_scale: f64,
}

impl RobustState {
    /// `m` is this player's action count, `m_list` the action counts of all
    /// players (including this one) and `horizon` the known `T`.
    pub fn new(m: usize, eta: f64, settings: SolverSettings, m_list: Vec<usize>, horizon: usize) -> Result<Self> {
        if m_list.len() < 2 {
            return Err(Error::Input("the variation budget needs n >= 2 players".into()));
        }
        if !m_list.contains(&m) {
            return Err(Error::Input(format!("action count {m} is not among {m_list:?}")));
        }
        Ok(RobustState {
            oftrl: BmOftrl::oftrl(m, eta, settings)?,
            fallback: None,
            m_list,
            horizon,
            variation_sum: 0.0,
            last_utility: vec![0.0; m],
            t: 0,
            switched_at: None,
            threshold_scale: 1.0,
        })
    }

    /// Multiplies the variation budget by `scale`. The default of 1 is the
    /// exact budget; smaller values let short runs exercise the switch.
    pub fn with_threshold_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Input(format!("threshold scale must be positive, got {scale}")));
        }
        self.threshold_scale = scale;
        Ok(self)
    }

    pub fn phase(&self) -> Phase {
        if self.fallback.is_some() {
            Phase::Fallback
        } else {
            Phase::Optimistic
        }
    }

    pub fn variation_sum(&self) -> f64 {
        self.variation_sum
    }

    /// Step at which the budget was first exceeded.
    pub fn switched_at(&self) -> Option<usize> {
        self.switched_at
    }

    pub fn threshold(&self, t: usize) -> f64 {
        self.threshold_scale * rates::variation_threshold(&self.m_list, t)
    }

    /// Rows of the inner learner currently in charge.
    pub fn rows(&self) -> &[Strategy] {
        match &self.fallback {
            Some(f) => f.rows(),
            None => self.oftrl.rows(),
        }
    }

    pub fn robust_next(&mut self) -> Result<Strategy> {
        self.t += 1;
        match &mut self.fallback {
            Some(f) => f.next_strategy(),
            None => self.oftrl.next_strategy(),
        }
    }

    pub fn robust_observe(&mut self, u: &[f64]) -> Result<()> {
        validate_utility(u, self.oftrl.num_actions())?;
        if let Some(v) = u.iter().find(|v| v.abs() > 1.0) {
            return Err(Error::Input(format!("the robustness wrapper needs |u| <= 1, got {v}")));
        }
        let diff = u.iter().zip(&self.last_utility).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        self.variation_sum += diff * diff;
        self.last_utility.copy_from_slice(u);
        if let Some(f) = &mut self.fallback {
            return f.observe(u);
        }
        self.oftrl.observe(u)?;
        if self.t >= 2 && self.variation_sum > self.threshold(self.t) {
            let m = self.oftrl.num_actions();
            log::info!("variation budget exceeded at t = {}; switching to BM-MWU", self.t);
            self.fallback = Some(BmMwu::mwu(m, fallback_rate(m, self.horizon))?);
            self.switched_at = Some(self.t);
        }
        Ok(())
    }
}

impl RegretMinimizer for RobustState {
    fn dim(&self) -> usize {
        self.oftrl.num_actions()
    }

    fn next_strategy(&mut self) -> Result<Strategy> {
        self.robust_next()
    }

    fn observe(&mut self, u: &[f64]) -> Result<()> {
        self.robust_observe(u)
    }

    /// Round-0 feedback: becomes `u^(0)` for the variation sum and the
    /// prediction of the optimistic learner.
    fn set_prediction(&mut self, m: &[f64]) -> Result<()> {
        validate_utility(m, self.dim())?;
        self.last_utility.copy_from_slice(m);
        match &mut self.fallback {
            Some(f) => f.set_prediction(m),
            None => self.oftrl.set_prediction(m),
        }
    }

    fn last_decrement(&self) -> Option<f64> {
        match &self.fallback {
            Some(_) => None,
            None => self.oftrl.last_decrement(),
        }
    }
}

/// Swap-regret guarantee of the wrapper against an arbitrary sequence:
/// the individual bound before the switch, 2 for the switching step, and
/// `2·sqrt(m·log m·T)` for the fallback.
pub fn robust_regret_bound(m: usize, m_list: &[usize], horizon: usize) -> f64 {
    let mf = m as f64;
    rates::swap_bound_rhs(m, m_list, horizon) + 2.0 + 2.0 * (mf * mf.ln() * horizon as f64).sqrt()
}

/// First `t ≥ 2` at which a variation of `per_step` per round exceeds the
/// budget, searched up to `limit`.
pub fn first_switch_step(m_list: &[usize], per_step: f64, limit: usize) -> Option<usize> {
    (2..=limit).find(|&t| per_step * t as f64 > rates::variation_threshold(m_list, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::swap_regret;

    fn alternating(m: usize, t: usize) -> Vec<f64> {
        let sign = if t % 2 == 1 { 1.0 } else { -1.0 };
        (0..m).map(|a| if a == 0 { sign } else { 0.0 }).collect()
    }

    #[test]
    fn fresh_state_is_uniform() {
        let mut r = RobustState::new(3, 0.01, SolverSettings::default(), vec![3, 3], 100).unwrap();
        let x = r.robust_next().unwrap();
        assert!(x.probs().iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-12));
        assert_eq!(r.phase(), Phase::Optimistic);
    }

    #[test]
    fn rejects_out_of_range_utilities() {
        let mut r = RobustState::new(2, 0.01, SolverSettings::default(), vec![2, 2], 10).unwrap();
        r.robust_next().unwrap();
        assert!(matches!(r.robust_observe(&[1.5, 0.0]), Err(Error::Input(_))));
        assert!(RobustState::new(2, 0.01, SolverSettings::default(), vec![2], 10).is_err());
    }

    #[test]
    fn no_check_at_first_step() {
        let mut r = RobustState::new(2, 0.01, SolverSettings::default(), vec![2, 2], 10)
            .unwrap()
            .with_threshold_scale(1e-12)
            .unwrap();
        r.robust_next().unwrap();
        r.robust_observe(&[1.0, -1.0]).unwrap();
        assert_eq!(r.phase(), Phase::Optimistic);
        r.robust_next().unwrap();
        r.robust_observe(&[-1.0, 1.0]).unwrap();
        assert_eq!(r.phase(), Phase::Fallback);
        assert_eq!(r.switched_at(), Some(2));
    }

    #[test]
    fn transparent_without_violation() {
        let eta = 0.01;
        let mut r = RobustState::new(3, eta, SolverSettings::default(), vec![3, 3], 200).unwrap();
        let mut plain = BmOftrl::oftrl(3, eta, SolverSettings::default()).unwrap();
        let u0 = [0.2, -0.1, 0.4];
        r.set_prediction(&u0).unwrap();
        plain.set_prediction(&u0).unwrap();
        for t in 0..200 {
            let x = r.next_strategy().unwrap();
            let y = plain.next_strategy().unwrap();
            assert_eq!(x, y);
            let u: Vec<f64> = (0..3).map(|a| ((t * 7 + a * 3) as f64 * 0.1).sin() * 0.01).collect();
            r.observe(&u).unwrap();
            plain.observe(&u).unwrap();
        }
        assert_eq!(r.phase(), Phase::Optimistic);
        assert!(r.variation_sum() <= r.threshold(200));
    }

    #[test]
    fn variation_sum_is_running_sum() {
        let mut r = RobustState::new(2, 0.01, SolverSettings::default(), vec![2, 2], 10).unwrap();
        let us = [[0.5, 0.0], [-0.5, 0.25], [0.0, 0.0]];
        let mut want = 0.0;
        let mut prev = [0.0, 0.0];
        for u in us {
            r.robust_next().unwrap();
            r.robust_observe(&u).unwrap();
            want += (u[0] - prev[0]).abs().max((u[1] - prev[1]).abs()).powi(2);
            prev = u;
            assert_eq!(r.variation_sum(), want);
        }
    }

    #[test]
    fn switch_step_for_alternating_adversary() {
        // ‖Δu‖∞² = 4 per round; the first crossing solves 4t > threshold(t)
        let t = first_switch_step(&[3, 3], 4.0, 3_000_000).unwrap();
        assert!(4.0 * t as f64 > rates::variation_threshold(&[3, 3], t));
        assert!(4.0 * (t - 1) as f64 <= rates::variation_threshold(&[3, 3], t - 1));
        assert!(t > 1_000_000);
        assert!(first_switch_step(&[3, 3], 4.0, 10_000).is_none());
    }

    #[test]
    fn scaled_budget_switches_and_stays_within_bound() {
        let (m, horizon) = (3, 5_000);
        let eta = rates::theory_rate(2, &[3, 3]).unwrap();
        let t_star = 2000;
        // scale so that the crossing happens at t_star
        let scale = 4.0 * t_star as f64 / rates::variation_threshold(&[3, 3], t_star) * 0.999;
        let mut r = RobustState::new(m, eta, SolverSettings::default(), vec![3, 3], horizon)
            .unwrap()
            .with_threshold_scale(scale)
            .unwrap();
        let mut xs = Vec::new();
        let mut us = Vec::new();
        let mut phases = Vec::new();
        for t in 1..=horizon {
            xs.push(r.next_strategy().unwrap());
            let u = alternating(m, t);
            r.observe(&u).unwrap();
            us.push(u);
            phases.push(r.phase());
        }
        let s = r.switched_at().unwrap();
        assert!(s.abs_diff(t_star) <= 2, "switched at {s}");
        // the phase never reverts
        assert!(phases.windows(2).all(|w| !(w[0] == Phase::Fallback && w[1] == Phase::Optimistic)));
        let sw = swap_regret(&xs, &us);
        assert!(sw <= 1.1 * robust_regret_bound(m, &[3, 3], horizon));
    }
}
