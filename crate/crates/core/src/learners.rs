//! External-regret minimizers over a single simplex.

use crate::barrier::{maximize_linear_minus_barrier, reduce_utility, ReducedPoint, SolverSettings, Strategy};
use crate::error::{Error, Result};

/// A full-information regret minimizer over `Δ^d`.
///
/// The protocol is `next_strategy`, then `observe` with the utility of that
/// round. `set_prediction` installs the round-0 feedback before the first move.
pub trait RegretMinimizer {
    fn dim(&self) -> usize;
    fn next_strategy(&mut self) -> Result<Strategy>;
    fn observe(&mut self, u: &[f64]) -> Result<()>;
    fn set_prediction(&mut self, m: &[f64]) -> Result<()>;
    /// Newton decrement of the last solve, for learners that solve one.
    fn last_decrement(&self) -> Option<f64> {
        None
    }
}

pub(crate) fn validate_utility(u: &[f64], d: usize) -> Result<()> {
    if u.len() != d {
        return Err(Error::Input(format!("utility has {} entries, expected {d}", u.len())));
    }
    if let Some(v) = u.iter().find(|v| !v.is_finite()) {
        return Err(Error::Input(format!("utility has a non-finite entry {v}")));
    }
    Ok(())
}

/// Optimistic FTRL with the log-barrier regularizer and prediction `m^(t) = u^(t-1)`.
#[derive(Debug, Clone)]
pub struct OftrlState {
    cumulative_utility: Vec<f64>,
    prediction: Vec<f64>,
    current: ReducedPoint,
    eta: f64,
    settings: SolverSettings,
    last_decrement: Option<f64>,
    last_iterations: usize,
}

impl OftrlState {
    pub fn new(d: usize, eta: f64, settings: SolverSettings) -> Result<Self> {
        if d == 0 {
            return Err(Error::Input("learner needs at least one action".into()));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Input(format!("learning rate must be positive, got {eta}")));
        }
        settings.validate()?;
        Ok(OftrlState {
            cumulative_utility: vec![0.0; d],
            prediction: vec![0.0; d],
            current: ReducedPoint::uniform(d),
            eta,
            settings,
            last_decrement: None,
            last_iterations: 0,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn cumulative_utility(&self) -> &[f64] {
        &self.cumulative_utility
    }

    pub fn prediction(&self) -> &[f64] {
        &self.prediction
    }

    /// The last emitted iterate (uniform before the first query).
    pub fn current(&self) -> Strategy {
        self.current.to_strategy()
    }

    pub fn last_iterations(&self) -> usize {
        self.last_iterations
    }

    /// Solves `argmax η⟨x, m + Σu⟩ − R(x)`, warm-started at the previous iterate.
    pub fn oftrl_next(&mut self) -> Result<Strategy> {
        let w: Vec<f64> = self
            .cumulative_utility
            .iter()
            .zip(&self.prediction)
            .map(|(s, m)| s + m)
            .collect();
        let linear: Vec<f64> = reduce_utility(&w).into_iter().map(|v| self.eta * v).collect();
        let solve = maximize_linear_minus_barrier(&linear, &self.current, &self.settings)?;
        self.last_decrement = Some(solve.decrement);
        self.last_iterations = solve.iterations;
        self.current = solve.point;
        Ok(self.current.to_strategy())
    }

    pub fn oftrl_observe(&mut self, u: &[f64]) -> Result<()> {
        validate_utility(u, self.cumulative_utility.len())?;
        for (s, v) in self.cumulative_utility.iter_mut().zip(u) {
            *s += v;
        }
        self.prediction.copy_from_slice(u);
        Ok(())
    }
}

impl RegretMinimizer for OftrlState {
    fn dim(&self) -> usize {
        self.cumulative_utility.len()
    }

    fn next_strategy(&mut self) -> Result<Strategy> {
        self.oftrl_next()
    }

    fn observe(&mut self, u: &[f64]) -> Result<()> {
        self.oftrl_observe(u)
    }

    fn set_prediction(&mut self, m: &[f64]) -> Result<()> {
        validate_utility(m, self.cumulative_utility.len())?;
        self.prediction.copy_from_slice(m);
        Ok(())
    }

    fn last_decrement(&self) -> Option<f64> {
        self.last_decrement
    }
}

/// Multiplicative weights: `x[a] ∝ exp(η·S[a])`, optionally with the last
/// utility added as a prediction.
#[derive(Debug, Clone)]
pub struct MwuState {
    cumulative_utility: Vec<f64>,
    prediction: Vec<f64>,
    eta: f64,
    optimistic: bool,
}

impl MwuState {
    pub fn new(d: usize, eta: f64, optimistic: bool) -> Result<Self> {
        if d == 0 {
            return Err(Error::Input("learner needs at least one action".into()));
        }
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::Input(format!("learning rate must be nonnegative, got {eta}")));
        }
        Ok(MwuState { cumulative_utility: vec![0.0; d], prediction: vec![0.0; d], eta, optimistic })
    }

    /// Plain MWU at the horizon-tuned rate `sqrt(d·log d / T)`.
    pub fn with_horizon(d: usize, horizon: usize) -> Result<Self> {
        Self::new(d, fallback_rate(d, horizon), false)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn cumulative_utility(&self) -> &[f64] {
        &self.cumulative_utility
    }

    pub fn mwu_next(&self) -> Strategy {
        let scores: Vec<f64> = if self.optimistic {
            self.cumulative_utility.iter().zip(&self.prediction).map(|(s, m)| self.eta * (s + m)).collect()
        } else {
            self.cumulative_utility.iter().map(|s| self.eta * s).collect()
        };
        softmax(&scores)
    }

    pub fn mwu_observe(&mut self, u: &[f64]) -> Result<()> {
        validate_utility(u, self.cumulative_utility.len())?;
        for (s, v) in self.cumulative_utility.iter_mut().zip(u) {
            *s += v;
        }
        self.prediction.copy_from_slice(u);
        Ok(())
    }
}

/// `sqrt(d·log d / T)`; zero for a single action or an empty horizon.
pub fn fallback_rate(d: usize, horizon: usize) -> f64 {
    if d < 2 || horizon == 0 {
        return 0.0;
    }
    let d = d as f64;
    (d * d.ln() / horizon as f64).sqrt()
}

fn softmax(scores: &[f64]) -> Strategy {
    let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = scores.iter().map(|s| (s - top).exp()).collect();
    Strategy::from_weights(weights).expect("max-shifted weights include a 1")
}

impl RegretMinimizer for MwuState {
    fn dim(&self) -> usize {
        self.cumulative_utility.len()
    }

    fn next_strategy(&mut self) -> Result<Strategy> {
        Ok(self.mwu_next())
    }

    fn observe(&mut self, u: &[f64]) -> Result<()> {
        self.mwu_observe(u)
    }

    fn set_prediction(&mut self, m: &[f64]) -> Result<()> {
        validate_utility(m, self.cumulative_utility.len())?;
        self.prediction.copy_from_slice(m);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Mass on the second of two actions at the maximizer of
    /// `c·x₁ + log x₁ + log(1 − x₁)`, i.e. the root in (0,1) of
    /// `c·z² − (c+2)·z + 1 = 0`.
    fn second_action_mass(c: f64) -> f64 {
        ((c + 2.0) - (c * c + 4.0).sqrt()) / (2.0 * c)
    }

    #[test]
    fn fresh_learner_is_uniform() {
        let mut l = OftrlState::new(4, 0.1, SolverSettings::default()).unwrap();
        let x = l.oftrl_next().unwrap();
        assert!(x.probs().iter().all(|p| (p - 0.25).abs() < 1e-12));
        assert_eq!(l.last_iterations(), 0);
    }

    #[test]
    fn constant_utilities_keep_uniform() {
        let mut l = OftrlState::new(3, 0.5, SolverSettings::default()).unwrap();
        for _ in 0..20 {
            let x = l.oftrl_next().unwrap();
            assert!(x.probs().iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-12));
            l.oftrl_observe(&[0.7, 0.7, 0.7]).unwrap();
        }
    }

    #[test]
    fn prediction_doubles_last_utility() {
        let mut l = OftrlState::new(2, 1.0, SolverSettings::default()).unwrap();
        l.oftrl_next().unwrap();
        l.oftrl_observe(&[1.0, 0.0]).unwrap();
        let x = l.oftrl_next().unwrap();
        let want = second_action_mass(2.0);
        assert!((want - (4.0 - 8f64.sqrt()) / 4.0).abs() < 1e-15);
        assert!((x.probs()[1] - want).abs() < 1e-10);
        assert!(l.last_decrement().unwrap() <= 1e-10);
    }

    #[test]
    fn observe_bookkeeping() {
        let mut l = OftrlState::new(3, 0.1, SolverSettings::default()).unwrap();
        l.oftrl_observe(&[0.5, -0.2, 0.1]).unwrap();
        l.oftrl_observe(&[0.1, 0.3, -0.4]).unwrap();
        let c = l.cumulative_utility();
        assert!((c[0] - 0.6).abs() < 1e-15 && (c[1] - 0.1).abs() < 1e-15 && (c[2] + 0.3).abs() < 1e-15);
        assert_eq!(l.prediction(), &[0.1, 0.3, -0.4]);
        let before = l.cumulative_utility().to_vec();
        l.oftrl_observe(&[0.0; 3]).unwrap();
        assert_eq!(l.cumulative_utility(), before.as_slice());
        assert_eq!(l.prediction(), &[0.0; 3]);
        assert!(matches!(l.oftrl_observe(&[f64::NAN, 0.0, 0.0]), Err(Error::Input(_))));
        assert!(matches!(l.oftrl_observe(&[f64::INFINITY, 0.0, 0.0]), Err(Error::Input(_))));
    }

    #[test]
    fn second_iterate_matches_independent_solve() {
        // Solve max η⟨x, u1 + u2⟩ ... for t = 3 with a grid-free 1-D bisection
        // in the two-action case.
        let eta = 0.3;
        let (u1, u2) = ([0.4, -0.6], [-0.2, 0.9]);
        let mut l = OftrlState::new(2, eta, SolverSettings::default()).unwrap();
        l.oftrl_next().unwrap();
        l.oftrl_observe(&u1).unwrap();
        l.oftrl_next().unwrap();
        l.oftrl_observe(&u2).unwrap();
        let x = l.oftrl_next().unwrap();
        let w: Vec<f64> = (0..2).map(|r| u1[r] + 2.0 * u2[r]).collect();
        let c = eta * (w[0] - w[1]);
        let (mut lo, mut hi) = (1e-15f64, 1.0 - 1e-15);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if c + 1.0 / mid - 1.0 / (1.0 - mid) > 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert!((x.probs()[0] - 0.5 * (lo + hi)).abs() < 1e-10);
    }

    #[test]
    fn translation_invariance() {
        let mut a = OftrlState::new(3, 0.2, SolverSettings::default()).unwrap();
        let mut b = OftrlState::new(3, 0.2, SolverSettings::default()).unwrap();
        let us = [[0.3, -0.5, 0.9], [-0.1, 0.2, 0.0], [0.8, 0.8, -0.3]];
        for (k, u) in us.iter().cycle().take(30).enumerate() {
            let xa = a.oftrl_next().unwrap();
            let xb = b.oftrl_next().unwrap();
            assert!(xa.l1_distance(&xb) < 1e-9, "step {k}");
            a.oftrl_observe(u).unwrap();
            let shifted: Vec<f64> = u.iter().map(|v| v + 0.37).collect();
            b.oftrl_observe(&shifted).unwrap();
        }
    }

    #[test]
    fn mwu_examples() {
        let mut l = MwuState::new(2, 1.0, false).unwrap();
        assert_eq!(l.mwu_next().probs(), &[0.5, 0.5]);
        l.mwu_observe(&[1.0, 0.0]).unwrap();
        let x = l.mwu_next();
        let e = std::f64::consts::E;
        assert!((x.probs()[0] - e / (e + 1.0)).abs() < 1e-12);
        assert!((x.probs()[0] - 0.731059).abs() < 1e-6);

        let mut shifted = MwuState::new(2, 1.0, false).unwrap();
        shifted.mwu_observe(&[101.0, 100.0]).unwrap();
        assert!(shifted.mwu_next().l1_distance(&x) < 1e-12);

        // huge scores do not overflow
        let mut big = MwuState::new(3, 10.0, false).unwrap();
        big.mwu_observe(&[1e5, 0.0, -1e5]).unwrap();
        let x = big.mwu_next();
        assert!((x.probs()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mwu_observe_bookkeeping() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64(5);
        let mut l = MwuState::new(4, 0.1, false).unwrap();
        l.mwu_observe(&[0.0; 4]).unwrap();
        assert_eq!(l.cumulative_utility(), &[0.0; 4]);
        let mut sums = [0.0; 4];
        let mut obs = Vec::new();
        for _ in 0..1000 {
            let u: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            l.mwu_observe(&u).unwrap();
            obs.push(u);
        }
        // independent summation in reverse order
        for u in obs.iter().rev() {
            for (s, v) in sums.iter_mut().zip(u) {
                *s += v;
            }
        }
        for (a, b) in l.cumulative_utility().iter().zip(sums) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(l.mwu_observe(&[f64::NAN, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn optimistic_mwu_adds_prediction() {
        let mut l = MwuState::new(2, 1.0, true).unwrap();
        l.mwu_observe(&[1.0, 0.0]).unwrap();
        let x = l.mwu_next();
        let e2 = (2.0f64).exp();
        assert!((x.probs()[0] - e2 / (e2 + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn fallback_rate_values() {
        assert!((fallback_rate(3, 10_000) - (3.0 * 3f64.ln() / 1e4).sqrt()).abs() < 1e-15);
        assert_eq!(fallback_rate(1, 100), 0.0);
    }
}
