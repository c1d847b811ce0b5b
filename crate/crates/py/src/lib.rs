//! Python bindings: strategies and barrier numerics, the stationary
//! distribution, games, the main learners, and the experiment harness.

use noswap_core::bandit::{BanditBm as CoreBanditBm, BanditObservation};
use noswap_core::barrier::{self as core_barrier, ReducedPoint, SolverSettings, Strategy};
use noswap_core::bm::{self as core_bm, BmOftrl as CoreBmOftrl, StochasticMatrix};
use noswap_core::games::{self as core_games, NormalFormGame};
use noswap_core::harness::{self, ExperimentConfig, RunRecord};
use noswap_core::learners::{OftrlState, RegretMinimizer};
use noswap_core::metrics;
use noswap_core::{rates, Error};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use std::path::PathBuf;

fn py_err(e: Error) -> PyErr {
    if e.is_input_error() || matches!(e, Error::Domain(_) | Error::Precondition(_)) {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for noswap_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn strategy(x: Vec<f64>) -> PyResult<Strategy> {
    Strategy::new(x).py()
}

fn strategies(xs: Vec<Vec<f64>>) -> PyResult<Vec<Strategy>> {
    xs.into_iter().map(strategy).collect()
}

fn reduced(x: Vec<f64>) -> PyResult<ReducedPoint> {
    strategy(x)?.to_reduced().py()
}

/// Normalized log-barrier `−Σ log x[r] − d log d` of a full strategy.
#[pyfunction]
fn barrier_value(x: Vec<f64>) -> PyResult<f64> {
    core_barrier::barrier_value_full(&strategy(x)?).py()
}

/// Reduced-coordinate gradient of the barrier.
#[pyfunction]
fn barrier_gradient(x: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(core_barrier::barrier_gradient(&reduced(x)?))
}

#[pyfunction]
fn barrier_hessian(x: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
    Ok(core_barrier::barrier_hessian(&reduced(x)?))
}

#[pyfunction]
fn hessian_inverse_apply(x: Vec<f64>, v: Vec<f64>) -> PyResult<Vec<f64>> {
    let x = reduced(x)?;
    if v.len() != x.dim() - 1 {
        return Err(PyValueError::new_err(format!("vector needs {} reduced coordinates", x.dim() - 1)));
    }
    Ok(core_barrier::hessian_inverse_apply(&x, &v))
}

#[pyfunction]
fn primal_local_norm(x: Vec<f64>, delta: Vec<f64>) -> PyResult<f64> {
    core_barrier::primal_local_norm(&strategy(x)?, &delta).py()
}

#[pyfunction]
fn dual_local_norm(x: Vec<f64>, u: Vec<f64>) -> PyResult<f64> {
    core_barrier::dual_local_norm(&strategy(x)?, &u).py()
}

/// `argmax ⟨y, w⟩ − R(y)` over the open simplex for a full utility `w`.
/// Returns `(y, iterations, decrement)`.
#[pyfunction]
#[pyo3(signature = (w, warm_start=None))]
fn argmax_linear_minus_barrier(w: Vec<f64>, warm_start: Option<Vec<f64>>) -> PyResult<(Vec<f64>, usize, f64)> {
    if w.is_empty() {
        return Err(PyValueError::new_err("utility must be non-empty"));
    }
    let start = match warm_start {
        Some(x) => reduced(x)?,
        None => ReducedPoint::uniform(w.len()),
    };
    if start.dim() != w.len() {
        return Err(PyValueError::new_err("warm start and utility differ in dimension"));
    }
    let s = core_barrier::maximize_linear_minus_barrier(
        &core_barrier::reduce_utility(&w),
        &start,
        &SolverSettings::default(),
    )
    .py()?;
    Ok((s.point.to_strategy().into_inner(), s.iterations, s.decrement))
}

/// Stationary distribution of a row-stochastic matrix.
#[pyfunction]
fn stationary_distribution(q: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    let q = StochasticMatrix::new(q).py()?;
    Ok(core_bm::stationary_distribution(&q).py()?.into_inner())
}

#[pyfunction]
fn swap_regret(xs: Vec<Vec<f64>>, us: Vec<Vec<f64>>) -> PyResult<f64> {
    check_series(&xs, &us)?;
    Ok(metrics::swap_regret(&strategies(xs)?, &us))
}

#[pyfunction]
fn external_regret(xs: Vec<Vec<f64>>, us: Vec<Vec<f64>>) -> PyResult<f64> {
    check_series(&xs, &us)?;
    Ok(metrics::external_regret(&strategies(xs)?, &us))
}

fn check_series(xs: &[Vec<f64>], us: &[Vec<f64>]) -> PyResult<()> {
    if xs.len() != us.len() || xs.iter().zip(us).any(|(x, u)| x.len() != u.len()) {
        return Err(PyValueError::new_err("strategies and utilities must have matching shapes"));
    }
    Ok(())
}

#[pyfunction]
fn theory_rate(n: usize, m_list: Vec<usize>) -> PyResult<f64> {
    rates::theory_rate(n, &m_list).py()
}

#[pyclass(module = "noswap", frozen)]
struct Game {
    inner: NormalFormGame,
}

#[pymethods]
impl Game {
    #[staticmethod]
    fn shapley_variant() -> Self {
        Game { inner: core_games::shapley_variant() }
    }

    #[staticmethod]
    fn random_bimatrix(m: usize, seed: u64) -> PyResult<Self> {
        Ok(Game { inner: core_games::random_bimatrix(m, seed).py()? })
    }

    #[staticmethod]
    fn ring(n: usize, m: usize, seed: u64) -> PyResult<Self> {
        Ok(Game { inner: core_games::ring_game(n, m, seed).py()? })
    }

    #[staticmethod]
    fn bimatrix(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Game { inner: NormalFormGame::bimatrix(&a, &b).py()? })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Game { inner: core_games::load_game(&path).py()? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        core_games::save_game(&self.inner, &path).py()
    }

    fn normalized(&self) -> Self {
        Game { inner: self.inner.normalized() }
    }

    #[getter]
    fn actions(&self) -> Vec<usize> {
        self.inner.actions().to_vec()
    }

    #[getter]
    fn num_players(&self) -> usize {
        self.inner.num_players()
    }

    fn expected_utility(&self, player: usize, profile: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        self.inner.expected_utility_vector(player, &strategies(profile)?).py()
    }

    fn nash_gap(&self, profile: Vec<Vec<f64>>) -> PyResult<f64> {
        self.inner.nash_gap(&strategies(profile)?).py()
    }
}

/// Log-barrier OFTRL on one simplex.
#[pyclass(module = "noswap")]
struct Oftrl {
    inner: OftrlState,
}

#[pymethods]
impl Oftrl {
    #[new]
    fn new(d: usize, eta: f64) -> PyResult<Self> {
        Ok(Oftrl { inner: OftrlState::new(d, eta, SolverSettings::default()).py()? })
    }

    fn next_strategy(&mut self) -> PyResult<Vec<f64>> {
        Ok(self.inner.next_strategy().py()?.into_inner())
    }

    fn observe(&mut self, u: Vec<f64>) -> PyResult<()> {
        self.inner.observe(&u).py()
    }

    fn set_prediction(&mut self, m: Vec<f64>) -> PyResult<()> {
        self.inner.set_prediction(&m).py()
    }
}

/// Swap-regret learner: BM reduction over log-barrier OFTRL.
#[pyclass(module = "noswap")]
struct BmOftrl {
    inner: CoreBmOftrl,
}

#[pymethods]
impl BmOftrl {
    #[new]
    fn new(m: usize, eta: f64) -> PyResult<Self> {
        Ok(BmOftrl { inner: CoreBmOftrl::oftrl(m, eta, SolverSettings::default()).py()? })
    }

    fn next_strategy(&mut self) -> PyResult<Vec<f64>> {
        Ok(self.inner.next_strategy().py()?.into_inner())
    }

    fn observe(&mut self, u: Vec<f64>) -> PyResult<()> {
        self.inner.observe(&u).py()
    }

    fn set_prediction(&mut self, m: Vec<f64>) -> PyResult<()> {
        self.inner.set_prediction(&m).py()
    }

    /// Sub-learner strategies of the last round (the rows of Q).
    #[getter]
    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows().iter().map(|r| r.probs().to_vec()).collect()
    }
}

/// Bandit-feedback swap-regret learner.
#[pyclass(module = "noswap")]
struct BanditBm {
    inner: CoreBanditBm,
}

#[pymethods]
impl BanditBm {
    #[new]
    #[pyo3(signature = (m, eta=rates::BANDIT_RATE))]
    fn new(m: usize, eta: f64) -> PyResult<Self> {
        Ok(BanditBm { inner: CoreBanditBm::new(m, eta, SolverSettings::default(), false).py()? })
    }

    fn next_strategy(&mut self) -> PyResult<Vec<f64>> {
        Ok(self.inner.bandit_bm_next().py()?.0.into_inner())
    }

    /// Feedback `value` for the action played this round.
    fn observe(&mut self, played: usize, value: f64) -> PyResult<()> {
        self.inner.bandit_bm_observe(BanditObservation { played, value }).py()
    }
}

/// A finished experiment.
#[pyclass(module = "noswap", frozen)]
struct Run {
    record: RunRecord,
}

#[pymethods]
impl Run {
    #[getter]
    fn horizon(&self) -> usize {
        self.record.trace.horizon()
    }

    #[getter]
    fn num_players(&self) -> usize {
        self.record.trace.num_players()
    }

    fn strategies(&self, player: usize) -> PyResult<Vec<Vec<f64>>> {
        let p = self.player(player)?;
        Ok(p.strategies.iter().map(|x| x.probs().to_vec()).collect())
    }

    fn utilities(&self, player: usize) -> PyResult<Vec<Vec<f64>>> {
        Ok(self.player(player)?.utilities.clone())
    }

    /// Cumulative swap regret at the final step, one entry per player.
    fn swap_regrets(&self) -> Vec<f64> {
        self.record.trace.players.iter().map(|p| metrics::swap_regret(&p.strategies[1..], &p.utilities[1..])).collect()
    }

    /// Runs `verify`; returns `(pass, [report JSON, ...])`.
    fn verify(&self) -> PyResult<(bool, Vec<String>)> {
        let r = harness::verify(&self.record).py()?;
        Ok((r.pass, r.checks.iter().map(|c| c.to_json()).collect()))
    }

    /// Writes the CSV and its `.trace.json` sidecar.
    fn write(&self, csv_path: PathBuf) -> PyResult<()> {
        harness::write_outputs(&self.record, &csv_path).py()
    }

    fn to_json(&self) -> PyResult<String> {
        self.record.to_json().py()
    }
}

impl Run {
    fn player(&self, i: usize) -> PyResult<&metrics::PlayerTrace> {
        self.record.trace.players.get(i).ok_or_else(|| PyValueError::new_err(format!("no player {i}")))
    }
}

/// Runs an experiment from a TOML configuration string.
#[pyfunction]
fn run_experiment(config_toml: &str) -> PyResult<Run> {
    let cfg = ExperimentConfig::from_toml(config_toml).py()?;
    Ok(Run { record: harness::run_experiment(&cfg).py()? })
}

/// Loads a run from a CSV written by `Run.write` (or its sidecar).
#[pyfunction]
fn load_run(path: PathBuf) -> PyResult<Run> {
    Ok(Run { record: harness::load_record(&path).py()? })
}

#[pymodule]
fn noswap(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(barrier_value, m)?)?;
    m.add_function(wrap_pyfunction!(barrier_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(barrier_hessian, m)?)?;
    m.add_function(wrap_pyfunction!(hessian_inverse_apply, m)?)?;
    m.add_function(wrap_pyfunction!(primal_local_norm, m)?)?;
    m.add_function(wrap_pyfunction!(dual_local_norm, m)?)?;
    m.add_function(wrap_pyfunction!(argmax_linear_minus_barrier, m)?)?;
    m.add_function(wrap_pyfunction!(stationary_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(swap_regret, m)?)?;
    m.add_function(wrap_pyfunction!(external_regret, m)?)?;
    m.add_function(wrap_pyfunction!(theory_rate, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(load_run, m)?)?;
    m.add_class::<Game>()?;
    m.add_class::<Oftrl>()?;
    m.add_class::<BmOftrl>()?;
    m.add_class::<BanditBm>()?;
    m.add_class::<Run>()?;
    Ok(())
}
