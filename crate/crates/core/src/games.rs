//! Finite normal-form games and the expected-utility feedback oracle.
//!
//! Utility tensors are flat, row-major over joint action profiles with
//! player 0's action varying slowest.

use crate::barrier::Strategy;
use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormGame {
    actions: Vec<usize>,
    utilities: Vec<Vec<f64>>,
    graph: Option<InteractionGraph>,
}

/// Declared dependency structure: `u_i` depends only on the actions of
/// player `i` and of the players in `N_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionGraph {
    neighborhoods: Vec<Vec<usize>>,
    c: usize,
}

impl InteractionGraph {
    pub fn new(neighborhoods: Vec<Vec<usize>>) -> Result<Self> {
        let n = neighborhoods.len();
        let mut influence = vec![0usize; n];
        let mut cleaned = Vec::with_capacity(n);
        for (i, nb) in neighborhoods.into_iter().enumerate() {
            let mut nb = nb;
            nb.sort_unstable();
            nb.dedup();
            if let Some(&j) = nb.iter().find(|&&j| j >= n || j == i) {
                return Err(Error::Input(format!("neighborhood of player {i} contains invalid player {j}")));
            }
            for &j in &nb {
                influence[j] += 1;
            }
            cleaned.push(nb);
        }
        let c = cleaned.iter().map(Vec::len).chain(influence).max().unwrap_or(0);
        Ok(InteractionGraph { neighborhoods: cleaned, c })
    }

    pub fn neighborhoods(&self) -> &[Vec<usize>] {
        &self.neighborhoods
    }

    /// Smallest `c` with `|N_i| ≤ c` and `|{j : i ∈ N_j}| ≤ c` for all `i`.
    pub fn c(&self) -> usize {
        self.c
    }
}

impl NormalFormGame {
    pub fn new(actions: Vec<usize>, utilities: Vec<Vec<f64>>) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::Input("a game needs at least one player".into()));
        }
        if actions.contains(&0) {
            return Err(Error::Input("every player needs at least one action".into()));
        }
        if utilities.len() != actions.len() {
            return Err(Error::Input(format!(
                "{} utility tensors for {} players",
                utilities.len(),
                actions.len()
            )));
        }
        let profiles: usize = actions.iter().product();
        for (i, u) in utilities.iter().enumerate() {
            if u.len() != profiles {
                return Err(Error::Input(format!(
                    "utility tensor of player {i} has {} entries, expected {profiles}",
                    u.len()
                )));
            }
            if u.iter().any(|v| !v.is_finite()) {
                return Err(Error::Input(format!("utility tensor of player {i} is not finite")));
            }
        }
        Ok(NormalFormGame { actions, utilities, graph: None })
    }

    pub fn bimatrix(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Self> {
        let rows = a.len();
        let cols = a.first().map_or(0, Vec::len);
        if b.len() != rows || a.iter().chain(b).any(|r| r.len() != cols) {
            return Err(Error::Input("bimatrix payoffs must share one shape".into()));
        }
        Self::new(vec![rows, cols], vec![a.concat(), b.concat()])
    }

    /// Attaches an interaction graph after probing that it is respected.
    pub fn with_graph(mut self, graph: InteractionGraph) -> Result<Self> {
        if graph.neighborhoods.len() != self.num_players() {
            return Err(Error::Input("interaction graph size differs from the player count".into()));
        }
        self.validate_graph(&graph)?;
        self.graph = Some(graph);
        Ok(self)
    }

    pub fn num_players(&self) -> usize {
        self.actions.len()
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    pub fn utilities(&self) -> &[Vec<f64>] {
        &self.utilities
    }

    pub fn graph(&self) -> Option<&InteractionGraph> {
        self.graph.as_ref()
    }

    pub fn num_profiles(&self) -> usize {
        self.actions.iter().product()
    }

    pub fn profile_index(&self, profile: &[usize]) -> usize {
        profile.iter().zip(&self.actions).fold(0, |idx, (a, m)| idx * m + a)
    }

    pub fn utility(&self, player: usize, profile: &[usize]) -> f64 {
        self.utilities[player][self.profile_index(profile)]
    }

    pub fn max_abs_utility(&self) -> f64 {
        self.utilities.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_normalized(&self) -> bool {
        self.max_abs_utility() <= 1.0
    }

    /// The same game with every tensor divided by the largest absolute utility.
    pub fn normalized(&self) -> Self {
        let scale = self.max_abs_utility();
        if scale == 0.0 {
            return self.clone();
        }
        NormalFormGame {
            actions: self.actions.clone(),
            utilities: self.utilities.iter().map(|u| u.iter().map(|v| v / scale).collect()).collect(),
            graph: self.graph.clone(),
        }
    }

    fn check_strategies(&self, strategies: &[Strategy]) -> Result<()> {
        if strategies.len() != self.num_players() {
            return Err(Error::Input(format!(
                "{} strategies for {} players",
                strategies.len(),
                self.num_players()
            )));
        }
        for (i, (s, &m)) in strategies.iter().zip(&self.actions).enumerate() {
            if s.dim() != m {
                return Err(Error::Input(format!("player {i} strategy has {} actions, expected {m}", s.dim())));
            }
        }
        Ok(())
    }

    /// `u_i(a_i; x_{−i})` for every action `a_i`, by exact summation over the
    /// opponents' profiles (only over `N_i` when a graph is attached).
    pub fn expected_utility_vector(&self, player: usize, strategies: &[Strategy]) -> Result<Vec<f64>> {
        self.check_strategies(strategies)?;
        if player >= self.num_players() {
            return Err(Error::Input(format!("no player {player}")));
        }
        let relevant: Vec<usize> = match &self.graph {
            Some(g) => g.neighborhoods[player].clone(),
            None => (0..self.num_players()).filter(|&j| j != player).collect(),
        };
        let m_i = self.actions[player];
        let mut out = vec![0.0; m_i];
        let mut profile = vec![0usize; self.num_players()];
        let mut counter = vec![0usize; relevant.len()];
        loop {
            let mut weight = 1.0;
            for (&j, &a) in relevant.iter().zip(&counter) {
                profile[j] = a;
                weight *= strategies[j].probs()[a];
            }
            if weight != 0.0 {
                for (a_i, o) in out.iter_mut().enumerate() {
                    profile[player] = a_i;
                    *o += weight * self.utility(player, &profile);
                }
            }
            // mixed-radix increment, last relevant player fastest
            let mut k = relevant.len();
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                counter[k] += 1;
                if counter[k] < self.actions[relevant[k]] {
                    break;
                }
                counter[k] = 0;
            }
        }
    }

    /// Largest best-response improvement over all players.
    pub fn nash_gap(&self, strategies: &[Strategy]) -> Result<f64> {
        let mut gap = f64::NEG_INFINITY;
        for (i, x) in strategies.iter().enumerate() {
            let u = self.expected_utility_vector(i, strategies)?;
            let best = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            gap = gap.max(best - x.dot(&u));
        }
        Ok(gap.max(0.0))
    }

    fn validate_graph(&self, graph: &InteractionGraph) -> Result<()> {
        let n = self.num_players();
        let mut profile = vec![0usize; n];
        for idx in 0..self.num_profiles() {
            let mut rest = idx;
            for j in (0..n).rev() {
                profile[j] = rest % self.actions[j];
                rest /= self.actions[j];
            }
            for i in 0..n {
                let base = self.utility(i, &profile);
                for j in (0..n).filter(|&j| j != i && !graph.neighborhoods[i].contains(&j)) {
                    let keep = profile[j];
                    for alt in 0..self.actions[j] {
                        profile[j] = alt;
                        if self.utility(i, &profile) != base {
                            return Err(Error::Input(format!(
                                "utility of player {i} depends on player {j}, outside its declared neighborhood"
                            )));
                        }
                    }
                    profile[j] = keep;
                }
            }
        }
        Ok(())
    }
}

/// The general-sum 3×3 variant of Shapley's game, with raw payoffs in [0, 1.5].
pub fn shapley_variant() -> NormalFormGame {
    let a = vec![vec![0.0, 0.5, 1.5], vec![1.5, 0.0, 1.0], vec![0.5, 1.5, 0.0]];
    let b = vec![vec![0.0, 1.5, 1.0], vec![1.0, 0.0, 1.5], vec![1.5, 1.0, 0.0]];
    NormalFormGame::bimatrix(&a, &b).expect("fixed payoffs are well formed")
}

/// The known equilibrium `(x*, y*)` of [`shapley_variant`].
pub fn shapley_variant_equilibrium() -> [Strategy; 2] {
    [
        Strategy::new(vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]).unwrap(),
        Strategy::new(vec![0.25, 0.4, 0.35]).unwrap(),
    ]
}

/// Two `m×m` payoff matrices with i.i.d. Uniform[−1, 1] entries (player 0's
/// matrix first, row-major).
pub fn random_bimatrix(m: usize, seed: u64) -> Result<NormalFormGame> {
    if m < 2 {
        return Err(Error::Input(format!("random bimatrix needs m >= 2, got {m}")));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut draw = || -> Vec<Vec<f64>> {
        (0..m).map(|_| (0..m).map(|_| rng.random_range(-1.0..=1.0)).collect()).collect()
    };
    let a = draw();
    let b = draw();
    NormalFormGame::bimatrix(&a, &b)
}

/// `n` players on a cycle, each with `m` actions; `u_i` is a random table over
/// `(a_{i−1}, a_i, a_{i+1})`, so `N_i = {i−1, i+1}` and `c = 2`.
pub fn ring_game(n: usize, m: usize, seed: u64) -> Result<NormalFormGame> {
    if n < 3 || m < 1 {
        return Err(Error::Input("ring game needs n >= 3 and m >= 1".into()));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let tables: Vec<Vec<f64>> =
        (0..n).map(|_| (0..m * m * m).map(|_| rng.random_range(-1.0..=1.0)).collect()).collect();
    let actions = vec![m; n];
    let profiles = m.pow(n as u32);
    let mut utilities = vec![Vec::with_capacity(profiles); n];
    let mut profile = vec![0usize; n];
    for idx in 0..profiles {
        let mut rest = idx;
        for j in (0..n).rev() {
            profile[j] = rest % m;
            rest /= m;
        }
        for (i, u) in utilities.iter_mut().enumerate() {
            let left = profile[(i + n - 1) % n];
            let right = profile[(i + 1) % n];
            u.push(tables[i][(left * m + profile[i]) * m + right]);
        }
    }
    let graph = InteractionGraph::new((0..n).map(|i| vec![(i + n - 1) % n, (i + 1) % n]).collect())?;
    NormalFormGame::new(actions, utilities)?.with_graph(graph)
}

/// Independent categorical draws, one per player.
pub fn sample_profile<R: Rng + ?Sized>(strategies: &[Strategy], rng: &mut R) -> Vec<usize> {
    strategies.iter().map(|s| sample_action(s, rng)).collect()
}

pub fn sample_action<R: Rng + ?Sized>(strategy: &Strategy, rng: &mut R) -> usize {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    for (a, p) in strategy.probs().iter().enumerate() {
        acc += p;
        if r < acc {
            return a;
        }
    }
    // rounding left `r` above the total mass: take the last action with mass
    strategy.probs().iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// On-disk game description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub players: usize,
    pub actions: Vec<usize>,
    pub utilities: BTreeMap<String, Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neighborhoods: Option<BTreeMap<String, Vec<usize>>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub normalize: bool,
}

fn player_key(key: &str, n: usize) -> Result<usize> {
    let i: usize = key.parse().map_err(|_| Error::Parse(format!("player key {key:?} is not an index")))?;
    if i >= n {
        return Err(Error::Input(format!("player key {i} out of range for {n} players")));
    }
    Ok(i)
}

impl GameFile {
    pub fn from_game(game: &NormalFormGame) -> Self {
        GameFile {
            players: game.num_players(),
            actions: game.actions.clone(),
            utilities: game.utilities.iter().enumerate().map(|(i, u)| (i.to_string(), u.clone())).collect(),
            neighborhoods: game.graph.as_ref().map(|g| {
                g.neighborhoods.iter().enumerate().map(|(i, nb)| (i.to_string(), nb.clone())).collect()
            }),
            normalize: false,
        }
    }

    pub fn into_game(self) -> Result<NormalFormGame> {
        let n = self.players;
        if self.actions.len() != n {
            return Err(Error::Input(format!("`actions` lists {} players, `players` is {n}", self.actions.len())));
        }
        let mut utilities: Vec<Option<Vec<f64>>> = vec![None; n];
        for (key, u) in self.utilities {
            let i = player_key(&key, n)?;
            utilities[i] = Some(u);
        }
        let utilities = utilities
            .into_iter()
            .enumerate()
            .map(|(i, u)| u.ok_or_else(|| Error::Input(format!("missing utilities for player {i}"))))
            .collect::<Result<Vec<_>>>()?;
        let mut game = NormalFormGame::new(self.actions, utilities)?;
        if self.normalize {
            game = game.normalized();
        } else if !game.is_normalized() {
            return Err(Error::Input(format!(
                "utilities reach {} in absolute value; set `normalize: true` to rescale",
                game.max_abs_utility()
            )));
        }
        if let Some(nb) = self.neighborhoods {
            let mut lists = vec![Vec::new(); n];
            for (key, v) in nb {
                lists[player_key(&key, n)?] = v;
            }
            game = game.with_graph(InteractionGraph::new(lists)?)?;
        }
        Ok(game)
    }
}

pub fn load_game(path: &Path) -> Result<NormalFormGame> {
    let text = std::fs::read_to_string(path)?;
    let file: GameFile = serde_json::from_str(&text)?;
    file.into_game()
}

pub fn save_game(game: &NormalFormGame, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&GameFile::from_game(game))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn strat(v: &[f64]) -> Strategy {
        Strategy::new(v.to_vec()).unwrap()
    }

    #[test]
    fn bimatrix_feedback_is_matrix_vector_product() {
        let game = shapley_variant();
        let x = strat(&[0.2, 0.5, 0.3]);
        let y = strat(&[0.1, 0.6, 0.3]);
        let u0 = game.expected_utility_vector(0, &[x.clone(), y.clone()]).unwrap();
        let a = [[0.0, 0.5, 1.5], [1.5, 0.0, 1.0], [0.5, 1.5, 0.0]];
        for r in 0..3 {
            let ay: f64 = (0..3).map(|c| a[r][c] * y.probs()[c]).sum();
            assert!((u0[r] - ay).abs() < 1e-15);
        }
        // player 1's vector is Bᵀx
        let b = [[0.0, 1.5, 1.0], [1.0, 0.0, 1.5], [1.5, 1.0, 0.0]];
        let u1 = game.expected_utility_vector(1, &[x.clone(), y]).unwrap();
        for c in 0..3 {
            let btx: f64 = (0..3).map(|r| b[r][c] * x.probs()[r]).sum();
            assert!((u1[c] - btx).abs() < 1e-15);
        }
    }

    #[test]
    fn shapley_payoffs_and_equilibrium() {
        let g = shapley_variant();
        assert_eq!(g.utility(0, &[0, 2]), 1.5);
        assert_eq!(g.utility(1, &[2, 0]), 1.5);
        assert_ne!(g.utilities()[0], g.utilities()[1]);
        let eq = shapley_variant_equilibrium();
        assert!(g.nash_gap(&eq).unwrap() < 1e-9);
        assert!(g.normalized().nash_gap(&eq).unwrap() < 1e-9);
        assert!(!g.is_normalized());
        assert!(g.normalized().is_normalized());
    }

    #[test]
    fn uniform_play_in_shapley_has_positive_gap() {
        let g = shapley_variant();
        let s = [Strategy::uniform(3), Strategy::uniform(3)];
        // direct best responses: row sums of A are (2, 2.5, 2), column sums of B are all 2.5
        let a = [[0.0, 0.5, 1.5], [1.5, 0.0, 1.0], [0.5, 1.5, 0.0]];
        let b = [[0.0, 1.5, 1.0], [1.0, 0.0, 1.5], [1.5, 1.0, 0.0]];
        let row: Vec<f64> = (0..3).map(|r| a[r].iter().sum::<f64>() / 3.0).collect();
        let col: Vec<f64> = (0..3).map(|c| (0..3).map(|r| b[r][c]).sum::<f64>() / 3.0).collect();
        let gap_of = |u: &[f64]| u.iter().cloned().fold(f64::MIN, f64::max) - u.iter().sum::<f64>() / 3.0;
        let want = gap_of(&row).max(gap_of(&col));
        let gap = g.nash_gap(&s).unwrap();
        assert!(gap > 0.1);
        assert!((gap - want).abs() < 1e-12, "{gap} vs {want}");
        assert!((gap - 1.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn constant_game_feedback() {
        let g = NormalFormGame::new(vec![2, 3], vec![vec![0.4; 6], vec![0.4; 6]]).unwrap();
        let s = [strat(&[0.3, 0.7]), strat(&[0.2, 0.2, 0.6])];
        assert!(g.expected_utility_vector(0, &s).unwrap().iter().all(|v| (v - 0.4).abs() < 1e-15));
        assert!(g.expected_utility_vector(1, &s).unwrap().iter().all(|v| (v - 0.4).abs() < 1e-15));
    }

    #[test]
    fn three_player_feedback_matches_enumeration() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
        let utilities: Vec<Vec<f64>> = (0..3).map(|_| (0..8).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let g = NormalFormGame::new(vec![2, 2, 2], utilities.clone()).unwrap();
        let s: Vec<Strategy> = (0..3)
            .map(|_| {
                let p: f64 = rng.random_range(0.0..1.0);
                strat(&[p, 1.0 - p])
            })
            .collect();
        for i in 0..3 {
            let fast = g.expected_utility_vector(i, &s).unwrap();
            let mut slow = [0.0; 2];
            for a0 in 0..2 {
                for a1 in 0..2 {
                    for a2 in 0..2 {
                        let prof = [a0, a1, a2];
                        let w: f64 = (0..3).filter(|&j| j != i).map(|j| s[j].probs()[prof[j]]).product();
                        slow[prof[i]] += w * utilities[i][a0 * 4 + a1 * 2 + a2];
                    }
                }
            }
            for (a, b) in fast.iter().zip(slow) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn feedback_is_linear_in_opponents() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(8);
        let utilities: Vec<Vec<f64>> = (0..3).map(|_| (0..18).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let g = NormalFormGame::new(vec![3, 2, 3], utilities).unwrap();
        let y1 = strat(&[0.3, 0.7]);
        let y2 = strat(&[0.9, 0.1]);
        let z = strat(&[0.2, 0.5, 0.3]);
        let x = Strategy::uniform(3);
        let lam = 0.35;
        let mix = strat(&[lam * 0.3 + (1.0 - lam) * 0.9, lam * 0.7 + (1.0 - lam) * 0.1]);
        let u1 = g.expected_utility_vector(0, &[x.clone(), y1, z.clone()]).unwrap();
        let u2 = g.expected_utility_vector(0, &[x.clone(), y2, z.clone()]).unwrap();
        let um = g.expected_utility_vector(0, &[x, mix, z]).unwrap();
        for k in 0..3 {
            assert!((um[k] - (lam * u1[k] + (1.0 - lam) * u2[k])).abs() < 1e-14);
        }
    }

    #[test]
    fn dominant_profile_has_zero_gap() {
        // prisoner's-dilemma-like: action 1 strictly dominant for both
        let a = vec![vec![0.3, -1.0], vec![0.8, -0.5]];
        let b = vec![vec![0.3, 0.8], vec![-1.0, -0.5]];
        let g = NormalFormGame::bimatrix(&a, &b).unwrap();
        let s = [Strategy::point(2, 1), Strategy::point(2, 1)];
        assert_eq!(g.nash_gap(&s).unwrap(), 0.0);
    }

    #[test]
    fn random_bimatrix_properties() {
        let g1 = random_bimatrix(3, 42).unwrap();
        let g2 = random_bimatrix(3, 42).unwrap();
        assert_eq!(g1, g2);
        assert_ne!(g1, random_bimatrix(3, 43).unwrap());
        assert!(g1.is_normalized());
        assert!(random_bimatrix(1, 0).is_err());
        // Monte Carlo mean of 10^6 entries
        let mut total = 0.0;
        let mut count = 0usize;
        for seed in 0..(1_000_000 / 18 + 1) {
            for u in random_bimatrix(3, seed as u64).unwrap().utilities() {
                total += u.iter().sum::<f64>();
                count += u.len();
            }
        }
        assert!(count >= 1_000_000);
        assert!((total / count as f64).abs() < 0.01);
    }

    #[test]
    fn sampling() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(1);
        let pts = [Strategy::point(3, 2), Strategy::point(2, 0)];
        for _ in 0..100 {
            assert_eq!(sample_profile(&pts, &mut rng), vec![2, 0]);
        }
        let s = [strat(&[0.2, 0.5, 0.3]), strat(&[0.6, 0.4])];
        let mut a = Xoshiro256PlusPlus::seed_from_u64(9);
        let mut b = Xoshiro256PlusPlus::seed_from_u64(9);
        let seq_a: Vec<_> = (0..50).map(|_| sample_profile(&s, &mut a)).collect();
        let seq_b: Vec<_> = (0..50).map(|_| sample_profile(&s, &mut b)).collect();
        assert_eq!(seq_a, seq_b);

        let mut counts = [[0usize; 3]; 2];
        let draws = 100_000;
        for _ in 0..draws {
            let p = sample_profile(&s, &mut rng);
            counts[0][p[0]] += 1;
            counts[1][p[1]] += 1;
        }
        for (i, st) in s.iter().enumerate() {
            for (a, p) in st.probs().iter().enumerate() {
                assert!((counts[i][a] as f64 / draws as f64 - p).abs() < 0.01);
            }
        }
    }

    #[test]
    fn ring_game_graph() {
        let g = ring_game(4, 2, 7).unwrap();
        let graph = g.graph().unwrap();
        assert_eq!(graph.c(), 2);
        // graph-restricted feedback equals full enumeration
        let s: Vec<Strategy> = [0.3, 0.6, 0.1, 0.8].iter().map(|p| strat(&[*p, 1.0 - p])).collect();
        let plain = NormalFormGame::new(g.actions().to_vec(), g.utilities().to_vec()).unwrap();
        for i in 0..4 {
            let a = g.expected_utility_vector(i, &s).unwrap();
            let b = plain.expected_utility_vector(i, &s).unwrap();
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-14);
            }
        }
        // a wrong declaration is rejected
        let bad = InteractionGraph::new(vec![vec![1], vec![2], vec![3], vec![0]]).unwrap();
        assert!(plain.with_graph(bad).is_err());
    }

    #[test]
    fn game_file_round_trip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.json");
        let g = ring_game(3, 2, 1).unwrap();
        save_game(&g, &path).unwrap();
        assert_eq!(load_game(&path).unwrap(), g);

        let raw = GameFile::from_game(&shapley_variant());
        assert!(matches!(raw.clone().into_game(), Err(Error::Input(_))));
        let mut scaled = raw;
        scaled.normalize = true;
        assert_eq!(scaled.into_game().unwrap(), shapley_variant().normalized());

        let bad = r#"{"players": 1, "actions": [2], "utilities": {"0": [0.1, 0.2]}, "extra": 1}"#;
        assert!(serde_json::from_str::<GameFile>(bad).is_err());
        let missing = r#"{"players": 2, "actions": [1, 1], "utilities": {"0": [0.1]}}"#;
        let f: GameFile = serde_json::from_str(missing).unwrap();
        assert!(f.into_game().is_err());
    }
}
