//! The Blum–Mansour reduction from swap regret to external regret.
//!
//! One external-regret learner is kept per action. Their strategies are the
//! rows of a row-stochastic matrix `Q`; the master plays a stationary
//! distribution `x = Qᵀx` and forwards the utility `x[a]·u` to learner `a`.

use crate::barrier::{SolverSettings, Strategy};
use crate::error::{Error, Result};
use crate::learners::{validate_utility, MwuState, OftrlState, RegretMinimizer};
use nalgebra::{DMatrix, DVector};

/// Accepted `‖Qᵀx − x‖₁` for a stationary solve.
pub const STATIONARY_RESIDUAL: f64 = 1e-10;

/// A square row-stochastic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    rows: Vec<Vec<f64>>,
}

impl StochasticMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::Input("stochastic matrix must be non-empty".into()));
        }
        for (a, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Input(format!("row {a} has {} entries, expected {m}", row.len())));
            }
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::Input(format!("row {a} has negative or non-finite entries")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::Input(format!("row {a} sums to {s}")));
            }
        }
        Ok(StochasticMatrix { rows })
    }

    pub fn from_strategies(rows: &[Strategy]) -> Result<Self> {
        Self::new(rows.iter().map(|r| r.probs().to_vec()).collect())
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.rows.iter().flatten().all(|v| *v > 0.0)
    }

    /// `‖Qᵀx − x‖₁`.
    pub fn stationarity_residual(&self, x: &[f64]) -> f64 {
        let m = self.size();
        (0..m)
            .map(|b| {
                let qx: f64 = (0..m).map(|a| self.rows[a][b] * x[a]).sum();
                (qx - x[b]).abs()
            })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StationaryMethod {
    DirectSolve,
    MinimumNorm,
    PowerIteration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationarySolution {
    pub distribution: Strategy,
    pub residual: f64,
    pub method: StationaryMethod,
    /// False when the second eigenvalue modulus exceeds `1 − 1e-9`.
    pub ergodic: bool,
}

/// Stationary distribution of `q`; see [`stationary_solve`].
pub fn stationary_distribution(q: &StochasticMatrix) -> Result<Strategy> {
    stationary_solve(q).map(|s| s.distribution)
}

/// Solves `(Qᵀ − I)x = 0, Σx = 1`.
///
/// The square system with the last balance equation replaced by `Σx = 1` is
/// solved by LU with one step of iterative refinement. When it is singular or
/// fails the residual test, the minimum-norm least-squares solution of the
/// full augmented system is used, and power iteration on the lazy chain is
/// the last resort.
pub fn stationary_solve(q: &StochasticMatrix) -> Result<StationarySolution> {
    let m = q.size();
    if m == 1 {
        return Ok(StationarySolution {
            distribution: Strategy::uniform(1),
            residual: 0.0,
            method: StationaryMethod::DirectSolve,
            ergodic: true,
        });
    }
    let positive = q.is_strictly_positive();
    let ergodic = positive || second_eigenvalue_modulus(q) <= 1.0 - 1e-9;

    let accept = |x: Vec<f64>| -> Option<(Strategy, f64)> {
        if x.iter().any(|v| !v.is_finite() || *v < -1e-9) {
            return None;
        }
        let dist = Strategy::from_weights(x.into_iter().map(|v| v.max(0.0)).collect()).ok()?;
        let residual = q.stationarity_residual(dist.probs());
        (residual <= STATIONARY_RESIDUAL).then_some((dist, residual))
    };

    if let Some(x) = direct_solve(q) {
        if let Some((distribution, residual)) = accept(x) {
            return Ok(StationarySolution { distribution, residual, method: StationaryMethod::DirectSolve, ergodic });
        }
    }
    if let Some(x) = minimum_norm_solve(q) {
        if let Some((distribution, residual)) = accept(x) {
            return Ok(StationarySolution { distribution, residual, method: StationaryMethod::MinimumNorm, ergodic });
        }
    }
    if let Some((distribution, residual)) = accept(power_iteration(q)) {
        return Ok(StationarySolution { distribution, residual, method: StationaryMethod::PowerIteration, ergodic });
    }
    Err(Error::Numerical {
        message: "no stationary distribution met the residual threshold".into(),
        matrix: q.rows.clone(),
    })
}

fn direct_solve(q: &StochasticMatrix) -> Option<Vec<f64>> {
    let m = q.size();
    let a = DMatrix::from_fn(m, m, |i, j| {
        if i == m - 1 {
            1.0
        } else {
            q.rows[j][i] - if i == j { 1.0 } else { 0.0 }
        }
    });
    let mut b = DVector::zeros(m);
    b[m - 1] = 1.0;
    let lu = a.clone().lu();
    let mut x = lu.solve(&b)?;
    let r = &b - &a * &x;
    x += lu.solve(&r)?;
    Some(x.iter().copied().collect())
}

fn minimum_norm_solve(q: &StochasticMatrix) -> Option<Vec<f64>> {
    let m = q.size();
    let a = DMatrix::from_fn(m + 1, m, |i, j| {
        if i == m {
            1.0
        } else {
            q.rows[j][i] - if i == j { 1.0 } else { 0.0 }
        }
    });
    let mut b = DVector::zeros(m + 1);
    b[m] = 1.0;
    let x = a.svd(true, true).solve(&b, 1e-12).ok()?;
    Some(x.iter().copied().collect())
}

fn power_iteration(q: &StochasticMatrix) -> Vec<f64> {
    let m = q.size();
    let mut x = vec![1.0 / m as f64; m];
    let mut next = vec![0.0; m];
    for _ in 0..100_000 {
        for (b, n) in next.iter_mut().enumerate() {
            let qx: f64 = (0..m).map(|a| q.rows[a][b] * x[a]).sum();
            *n = 0.5 * (qx + x[b]);
        }
        std::mem::swap(&mut x, &mut next);
        if q.stationarity_residual(&x) <= 0.1 * STATIONARY_RESIDUAL {
            break;
        }
    }
    x
}

fn second_eigenvalue_modulus(q: &StochasticMatrix) -> f64 {
    let m = q.size();
    let mat = DMatrix::from_fn(m, m, |i, j| q.rows[i][j]);
    let mut moduli: Vec<f64> = mat.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    moduli.get(1).copied().unwrap_or(0.0)
}

/// Stationary distribution by the Markov chain tree theorem: `π[a]` is
/// proportional to the total weight of spanning trees directed into `a`.
/// Brute force over all parent assignments, so only for `m ≤ 6`.
pub fn mctt_stationary(q: &StochasticMatrix) -> Result<Strategy> {
    let m = q.size();
    if m > 6 {
        return Err(Error::Size(format!("tree enumeration supports m <= 6, got {m}")));
    }
    if !q.is_strictly_positive() {
        return Err(Error::Input("tree-theorem oracle expects a strictly positive matrix".into()));
    }
    let mut weights = vec![0.0; m];
    for (root, weight) in weights.iter_mut().enumerate() {
        let others: Vec<usize> = (0..m).filter(|&v| v != root).collect();
        let mut parent = vec![usize::MAX; m];
        *weight = enumerate_trees(q, root, &others, 0, &mut parent, 1.0);
    }
    Strategy::from_weights(weights)
}

fn enumerate_trees(
    q: &StochasticMatrix,
    root: usize,
    others: &[usize],
    depth: usize,
    parent: &mut [usize],
    product: f64,
) -> f64 {
    let m = q.size();
    if depth == others.len() {
        return if reaches_root(parent, root) { product } else { 0.0 };
    }
    let node = others[depth];
    let mut total = 0.0;
    for p in (0..m).filter(|&p| p != node) {
        parent[node] = p;
        total += enumerate_trees(q, root, others, depth + 1, parent, product * q.rows[node][p]);
    }
    parent[node] = usize::MAX;
    total
}

fn reaches_root(parent: &[usize], root: usize) -> bool {
    (0..parent.len()).filter(|&v| v != root).all(|start| {
        let mut v = start;
        for _ in 0..parent.len() {
            if v == root {
                return true;
            }
            v = parent[v];
        }
        v == root
    })
}

/// The BM master over sub-learners of type `L`.
#[derive(Debug, Clone)]
pub struct BmState<L> {
    sub_learners: Vec<L>,
    current: Strategy,
    rows: Vec<Strategy>,
}

pub type BmOftrl = BmState<OftrlState>;
pub type BmMwu = BmState<MwuState>;

impl<L: RegretMinimizer> BmState<L> {
    pub fn from_learners(sub_learners: Vec<L>) -> Result<Self> {
        let m = sub_learners.len();
        if m == 0 {
            return Err(Error::Input("BM needs at least one action".into()));
        }
        if let Some(l) = sub_learners.iter().find(|l| l.dim() != m) {
            return Err(Error::Input(format!("sub-learner has dimension {}, expected {m}", l.dim())));
        }
        Ok(BmState { sub_learners, current: Strategy::uniform(m), rows: vec![Strategy::uniform(m); m] })
    }

    pub fn num_actions(&self) -> usize {
        self.sub_learners.len()
    }

    pub fn sub_learners(&self) -> &[L] {
        &self.sub_learners
    }

    /// Last played strategy (uniform before the first round).
    pub fn current(&self) -> &Strategy {
        &self.current
    }

    /// Rows of the last assembled matrix.
    pub fn rows(&self) -> &[Strategy] {
        &self.rows
    }

    pub fn bm_next(&mut self) -> Result<(Strategy, StochasticMatrix)> {
        let rows = self
            .sub_learners
            .iter_mut()
            .map(|l| l.next_strategy())
            .collect::<Result<Vec<_>>>()?;
        let q = StochasticMatrix::from_strategies(&rows)?;
        let x = stationary_distribution(&q)?;
        self.rows = rows;
        self.current = x.clone();
        Ok((x, q))
    }

    /// Forwards `x[a]·u` to sub-learner `a`, with `x` the last played strategy.
    pub fn bm_observe(&mut self, u: &[f64]) -> Result<()> {
        validate_utility(u, self.num_actions())?;
        for (l, &w) in self.sub_learners.iter_mut().zip(self.current.probs()) {
            let scaled: Vec<f64> = u.iter().map(|v| w * v).collect();
            l.observe(&scaled)?;
        }
        Ok(())
    }
}

impl BmOftrl {
    pub fn oftrl(m: usize, eta: f64, settings: SolverSettings) -> Result<Self> {
        Self::from_learners((0..m).map(|_| OftrlState::new(m, eta, settings)).collect::<Result<_>>()?)
    }
}

impl BmMwu {
    pub fn mwu(m: usize, eta: f64) -> Result<Self> {
        Self::from_learners((0..m).map(|_| MwuState::new(m, eta, false)).collect::<Result<_>>()?)
    }
}

impl<L: RegretMinimizer> RegretMinimizer for BmState<L> {
    fn dim(&self) -> usize {
        self.num_actions()
    }

    fn next_strategy(&mut self) -> Result<Strategy> {
        self.bm_next().map(|(x, _)| x)
    }

    fn observe(&mut self, u: &[f64]) -> Result<()> {
        self.bm_observe(u)
    }

    /// Each sub-learner's prediction becomes `x[a]·m` with `x` the current play.
    fn set_prediction(&mut self, m: &[f64]) -> Result<()> {
        validate_utility(m, self.num_actions())?;
        for (l, &w) in self.sub_learners.iter_mut().zip(self.current.probs()) {
            let scaled: Vec<f64> = m.iter().map(|v| w * v).collect();
            l.set_prediction(&scaled)?;
        }
        Ok(())
    }

    fn last_decrement(&self) -> Option<f64> {
        self.sub_learners.iter().filter_map(|l| l.last_decrement()).reduce(f64::max)
    }
}
