//! Log-barrier geometry on the probability simplex.
//!
//! The simplex `Δ^d` has empty interior in `R^d`, so everything here works in
//! *reduced coordinates*: a point is stored as its first `d - 1` coordinates and
//! the last one is implicit, `x[d] = 1 - Σ coords`. The regularizer is
//!
//! ```text
//! R(x) = -Σ_{r ≤ d} log x[r] - d·log d
//! ```
//!
//! shifted so that its minimum (attained at the uniform point) is zero. Its
//! Hessian in reduced coordinates is `diag(1/x[r]²) + (1/x[d]²)·𝟙𝟙ᵀ`, whose
//! inverse has the closed form used by [`hessian_inverse_apply`].

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Tolerance on `Σ probs = 1` accepted by [`Strategy::new`].
pub const SUM_TOLERANCE: f64 = 1e-12;

/// A mixed strategy: a full `d`-dimensional probability vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Strategy(Vec<f64>);

impl Strategy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Input("strategy must have at least one action".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Domain(format!("strategy has negative or non-finite entries: {probs:?}")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::Domain(format!("strategy sums to {sum}, not 1")));
        }
        Ok(Strategy(probs))
    }

    /// Normalizes a nonnegative vector into a strategy.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Domain(format!("weights must be finite and nonnegative: {weights:?}")));
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(Error::Domain("weights sum to zero".into()));
        }
        Ok(Strategy(weights.into_iter().map(|w| w / sum).collect()))
    }

    pub fn uniform(d: usize) -> Self {
        assert!(d > 0, "uniform strategy needs d >= 1");
        Strategy(vec![1.0 / d as f64; d])
    }

    pub fn point(d: usize, action: usize) -> Self {
        let mut p = vec![0.0; d];
        p[action] = 1.0;
        Strategy(p)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn min_prob(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|&p| p > 0.0)
    }

    /// Drops the last coordinate. Fails if the strategy touches the boundary.
    pub fn to_reduced(&self) -> Result<ReducedPoint> {
        ReducedPoint::new(self.0[..self.0.len() - 1].to_vec())
    }

    pub fn dot(&self, u: &[f64]) -> f64 {
        self.0.iter().zip(u).map(|(x, u)| x * u).sum()
    }

    pub fn l1_distance(&self, other: &Strategy) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum()
    }
}

impl AsRef<[f64]> for Strategy {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// A point of the relative interior of the simplex, in reduced coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedPoint {
    coords: Vec<f64>,
    last: f64,
}

impl ReducedPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let last = 1.0 - coords.iter().sum::<f64>();
        if !is_interior(&coords) {
            return Err(Error::Domain(format!(
                "point is not interior: coords {coords:?}, implicit last coordinate {last}"
            )));
        }
        Ok(ReducedPoint { coords, last })
    }

    pub fn uniform(d: usize) -> Self {
        assert!(d > 0, "simplex dimension must be at least 1");
        let c = 1.0 / d as f64;
        ReducedPoint::new(vec![c; d - 1]).expect("uniform point is interior")
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// The implicit coordinate `x[d] = 1 - Σ coords`.
    pub fn last(&self) -> f64 {
        self.last
    }

    /// Dimension `d` of the ambient simplex.
    pub fn dim(&self) -> usize {
        self.coords.len() + 1
    }

    pub fn to_strategy(&self) -> Strategy {
        let mut p = Vec::with_capacity(self.dim());
        p.extend_from_slice(&self.coords);
        p.push(self.last);
        Strategy(p)
    }

    fn full(&self) -> impl Iterator<Item = f64> + '_ {
        self.coords.iter().copied().chain(std::iter::once(self.last))
    }
}

fn is_interior(coords: &[f64]) -> bool {
    coords.iter().all(|&c| c > 0.0 && c.is_finite()) && 1.0 - coords.iter().sum::<f64>() > 0.0
}

/// Value, gradient and Hessian of the barrier at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Vec<Vec<f64>>,
}

impl BarrierEval {
    pub fn at(x: &ReducedPoint) -> Self {
        BarrierEval {
            value: barrier_value(x),
            gradient: barrier_gradient(x),
            hessian: barrier_hessian(x),
        }
    }
}

/// Settings of the damped Newton proximal solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    /// Stop once the Newton decrement is at most this.
    pub decrement_tolerance: f64,
    pub max_iterations: usize,
    /// Step shrink factor applied while a step leaves the interior.
    pub feasibility_backtrack_factor: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            decrement_tolerance: 1e-10,
            max_iterations: 500,
            feasibility_backtrack_factor: 0.5,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.decrement_tolerance > 0.0 && self.decrement_tolerance <= 0.25) {
            return Err(Error::Config(format!(
                "decrement tolerance must lie in (0, 1/4], got {}",
                self.decrement_tolerance
            )));
        }
        if !(self.feasibility_backtrack_factor > 0.0 && self.feasibility_backtrack_factor < 1.0) {
            return Err(Error::Config(format!(
                "backtrack factor must lie in (0, 1), got {}",
                self.feasibility_backtrack_factor
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

/// Normalized log-barrier value; zero at the uniform point.
pub fn barrier_value(x: &ReducedPoint) -> f64 {
    let d = x.dim() as f64;
    -x.full().map(f64::ln).sum::<f64>() - d * d.ln()
}

/// Normalized log-barrier of a full strategy. Fails on boundary points.
pub fn barrier_value_full(x: &Strategy) -> Result<f64> {
    if !x.is_interior() {
        return Err(Error::Domain("barrier is infinite on the boundary".into()));
    }
    let d = x.dim() as f64;
    Ok(-x.probs().iter().map(|p| p.ln()).sum::<f64>() - d * d.ln())
}

/// Reduced gradient: component `r` is `-1/x[r] + 1/x[d]`.
pub fn barrier_gradient(x: &ReducedPoint) -> Vec<f64> {
    let tail = 1.0 / x.last;
    x.coords.iter().map(|c| -1.0 / c + tail).collect()
}

pub fn barrier_hessian(x: &ReducedPoint) -> Vec<Vec<f64>> {
    let k = x.coords.len();
    let tail = 1.0 / (x.last * x.last);
    (0..k)
        .map(|r| {
            (0..k)
                .map(|s| if r == s { 1.0 / (x.coords[r] * x.coords[r]) + tail } else { tail })
                .collect()
        })
        .collect()
}

/// Applies the inverse Hessian via Sherman–Morrison:
/// `(∇²R)⁻¹ = diag(x̃) − x̃x̃ᵀ / Σ_{r≤d} x[r]²` with `x̃[r] = x[r]²`.
pub fn hessian_inverse_apply(x: &ReducedPoint, v: &[f64]) -> Vec<f64> {
    debug_assert_eq!(v.len(), x.coords.len());
    let sq_sum: f64 = x.full().map(|c| c * c).sum();
    let proj: f64 = x.coords.iter().zip(v).map(|(c, v)| c * c * v).sum();
    x.coords
        .iter()
        .zip(v)
        .map(|(c, v)| {
            let sq = c * c;
            sq * v - sq * proj / sq_sum
        })
        .collect()
}

fn check_positive(x: &Strategy, other_len: usize) -> Result<()> {
    if x.dim() != other_len {
        return Err(Error::Input(format!("dimension mismatch: {} vs {other_len}", x.dim())));
    }
    if !x.is_interior() {
        return Err(Error::Domain("local norms require a strictly positive strategy".into()));
    }
    Ok(())
}

/// `‖δ‖_x = sqrt(Σ (δ[r]/x[r])²)` for a full-dimensional difference `δ`.
pub fn primal_local_norm(x: &Strategy, delta: &[f64]) -> Result<f64> {
    check_positive(x, delta.len())?;
    Ok(x.probs().iter().zip(delta).map(|(x, d)| (d / x).powi(2)).sum::<f64>().sqrt())
}

/// `‖u‖_{*,x} = sqrt(Σ x[r]²(u[r] − c*)²)` with `c*` the weighted mean.
pub fn dual_local_norm(x: &Strategy, u: &[f64]) -> Result<f64> {
    check_positive(x, u.len())?;
    let weight: f64 = x.probs().iter().map(|p| p * p).sum();
    let center = x.probs().iter().zip(u).map(|(p, u)| p * p * u).sum::<f64>() / weight;
    Ok(x
        .probs()
        .iter()
        .zip(u)
        .map(|(p, u)| (p * (u - center)).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// `ω(s) = s − log(1 + s)`.
pub fn omega(s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("omega requires s >= 0, got {s}")));
    }
    Ok(s - s.ln_1p())
}

/// `sqrt(gradᵀ (∇²R(x))⁻¹ grad)`.
pub fn newton_decrement(x: &ReducedPoint, grad: &[f64]) -> f64 {
    let step = hessian_inverse_apply(x, grad);
    grad.iter().zip(&step).map(|(g, s)| g * s).sum::<f64>().max(0.0).sqrt()
}

/// `ũ[r] = w[r] − w[d]`: the linear term of a full-dimensional utility in
/// reduced coordinates (up to an additive constant).
pub fn reduce_utility(w: &[f64]) -> Vec<f64> {
    let (last, head) = w.split_last().expect("utility must be non-empty");
    head.iter().map(|v| v - last).collect()
}

/// Result of a damped Newton solve.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonSolve {
    pub point: ReducedPoint,
    pub iterations: usize,
    /// Newton decrement at `point`.
    pub decrement: f64,
}

/// Maximizes `⟨y, linear⟩ − R(y)` over the open simplex by damped Newton.
///
/// Each iteration moves by `Δ/(1 + λ)` with `Δ = −(∇²R)⁻¹∇F`, `F = R − ⟨·, linear⟩`,
/// and the step is shrunk until the trial point is strictly interior.
pub fn maximize_linear_minus_barrier(
    linear: &[f64],
    warm_start: &ReducedPoint,
    settings: &SolverSettings,
) -> Result<NewtonSolve> {
    if linear.len() != warm_start.coords.len() {
        return Err(Error::Input(format!(
            "linear term has {} coordinates, point has {}",
            linear.len(),
            warm_start.coords.len()
        )));
    }
    if linear.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("linear term is not finite".into()));
    }
    let mut y = warm_start.clone();
    let mut trial = Vec::with_capacity(linear.len());
    for iteration in 0..=settings.max_iterations {
        let grad: Vec<f64> = barrier_gradient(&y).iter().zip(linear).map(|(g, l)| g - l).collect();
        let newton = hessian_inverse_apply(&y, &grad);
        let lambda = grad.iter().zip(&newton).map(|(g, s)| g * s).sum::<f64>().max(0.0).sqrt();
        if !lambda.is_finite() {
            return Err(Error::Convergence { iterations: iteration, last_decrement: lambda });
        }
        if lambda <= settings.decrement_tolerance {
            return Ok(NewtonSolve { point: y, iterations: iteration, decrement: lambda });
        }
        if iteration == settings.max_iterations {
            return Err(Error::Convergence { iterations: iteration, last_decrement: lambda });
        }
        let mut step = 1.0 / (1.0 + lambda);
        loop {
            trial.clear();
            trial.extend(y.coords.iter().zip(&newton).map(|(c, s)| c - step * s));
            if is_interior(&trial) {
                break;
            }
            step *= settings.feasibility_backtrack_factor;
            if step < f64::MIN_POSITIVE {
                return Err(Error::Convergence { iterations: iteration, last_decrement: lambda });
            }
        }
        y = ReducedPoint::new(std::mem::take(&mut trial))?;
    }
    unreachable!("loop returns on its last iteration")
}

/// Maximizer of `η⟨x, w⟩ − R(x)` over the open simplex (`w` in reduced coordinates).
pub fn damped_newton_argmax(
    w: &[f64],
    eta: f64,
    warm_start: &ReducedPoint,
    settings: &SolverSettings,
) -> Result<NewtonSolve> {
    if !(eta > 0.0) {
        return Err(Error::Input(format!("learning rate must be positive, got {eta}")));
    }
    let linear: Vec<f64> = w.iter().map(|v| eta * v).collect();
    maximize_linear_minus_barrier(&linear, warm_start, settings)
}

/// Minkowski function `π(x_target; x_ref)`: the smallest `s ≥ 0` such that
/// `x_ref + (x_target − x_ref)/s` stays in the simplex.
pub fn minkowski(x_ref: &Strategy, x_target: &Strategy) -> Result<f64> {
    check_positive(x_ref, x_target.dim())?;
    Ok(x_ref
        .probs()
        .iter()
        .zip(x_target.probs())
        .map(|(r, t)| 1.0 - t / r)
        .fold(0.0, f64::max))
}

/// Checks `R(x_target) − R(x_ref) ≤ θ·log(1/(1 − π(x_target; x_ref)))` (slack 1e-9).
pub fn diameter_bound_check(x_ref: &Strategy, x_target: &Strategy, theta: f64) -> Result<bool> {
    let pi = minkowski(x_ref, x_target)?;
    if pi >= 1.0 {
        return Ok(true);
    }
    let lhs = barrier_value_full(x_target)? - barrier_value_full(x_ref)?;
    let rhs = -theta * (1.0 - pi).ln();
    Ok(lhs <= rhs + 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, proptest};
    use proptest::strategy::Strategy as _;

    fn rp(c: &[f64]) -> ReducedPoint {
        ReducedPoint::new(c.to_vec()).unwrap()
    }

    fn interior_point(d: usize) -> impl proptest::strategy::Strategy<Value = ReducedPoint> {
        proptest::collection::vec(0.05f64..1.0, d).prop_map(|w| {
            let s: f64 = w.iter().sum();
            let v: Vec<f64> = w.iter().map(|x| x / s).collect();
            ReducedPoint::new(v[..v.len() - 1].to_vec()).unwrap()
        })
    }

    use super::Strategy as Mixed;

    #[test]
    fn value_examples() {
        assert!(barrier_value(&rp(&[1.0 / 3.0, 1.0 / 3.0])).abs() < 1e-14);
        assert!(barrier_value(&rp(&[0.5])).abs() < 1e-14);
        let v = barrier_value(&rp(&[0.5, 0.25]));
        let expected = -(0.5f64).ln() - 2.0 * (0.25f64).ln() - 3.0 * 3f64.ln();
        assert!((v - expected).abs() < 1e-14);
        assert!((v - 0.1699).abs() < 1e-4);
    }

    #[test]
    fn gradient_and_hessian_examples() {
        let g = barrier_gradient(&ReducedPoint::uniform(3));
        assert!(g.iter().all(|v| v.abs() < 1e-12));
        let g = barrier_gradient(&rp(&[0.25]));
        assert!((g[0] + 8.0 / 3.0).abs() < 1e-12);

        let h = barrier_hessian(&ReducedPoint::uniform(3));
        for (row, want) in h.iter().zip([[18.0, 9.0], [9.0, 18.0]]) {
            for (a, b) in row.iter().zip(want) {
                assert!((a - b).abs() < 1e-10);
            }
        }
        assert!((barrier_hessian(&rp(&[0.5]))[0][0] - 8.0).abs() < 1e-12);
    }

    #[test]
    fn non_interior_is_a_domain_error() {
        assert!(matches!(ReducedPoint::new(vec![0.0, 0.5]), Err(Error::Domain(_))));
        assert!(matches!(ReducedPoint::new(vec![0.6, 0.4]), Err(Error::Domain(_))));
        assert!(matches!(ReducedPoint::new(vec![-0.1]), Err(Error::Domain(_))));
        let boundary = Mixed::new(vec![0.0, 1.0]).unwrap();
        assert!(primal_local_norm(&boundary, &[0.1, -0.1]).is_err());
        assert!(dual_local_norm(&boundary, &[0.1, -0.1]).is_err());
    }

    #[test]
    fn inverse_hessian_examples() {
        let x = ReducedPoint::uniform(3);
        let r = hessian_inverse_apply(&x, &[1.0, 0.0]);
        assert!((r[0] - 18.0 / 243.0).abs() < 1e-14);
        assert!((r[1] + 9.0 / 243.0).abs() < 1e-14);
        assert_eq!(hessian_inverse_apply(&x, &[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn local_norm_examples() {
        let x = Mixed::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(primal_local_norm(&x, &[0.0, 0.0]).unwrap(), 0.0);
        assert!((primal_local_norm(&x, &[0.1, -0.1]).unwrap() - 0.08f64.sqrt()).abs() < 1e-12);
        assert!(dual_local_norm(&x, &[0.3, 0.3]).unwrap().abs() < 1e-15);
        assert!((dual_local_norm(&x, &[1.0, -1.0]).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn omega_examples() {
        assert_eq!(omega(0.0).unwrap(), 0.0);
        assert!((omega(1.0).unwrap() - (1.0 - 2f64.ln())).abs() < 1e-15);
        let w = omega(0.5).unwrap();
        assert!((w - 0.094535).abs() < 1e-6);
        assert!(w >= 0.0625);
        assert!(omega(-1e-3).is_err());
        assert!(omega(f64::NAN).is_err());
    }

    #[test]
    fn decrement_examples() {
        let x = ReducedPoint::uniform(3);
        assert_eq!(newton_decrement(&x, &[0.0, 0.0]), 0.0);
        let l = newton_decrement(&x, &[1.0, 0.0]);
        assert!((l - (18.0f64 / 243.0).sqrt()).abs() < 1e-12);
        assert!((l - 0.272166).abs() < 1e-6);
        assert!((newton_decrement(&x, &[2.0, 0.0]) - 2.0 * l).abs() < 1e-14);
    }

    /// Root in (0, 1) of the first-order condition `c + 1/p − 1/(1−p) = 0`
    /// for the mass `p` on the first of two actions, found by bisection.
    fn two_action_oracle(c: f64) -> f64 {
        let (mut lo, mut hi) = (1e-15, 1.0 - 1e-15);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if c + 1.0 / mid - 1.0 / (1.0 - mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn solver_examples() {
        let s = SolverSettings::default();
        let out = damped_newton_argmax(&[0.0, 0.0], 1.0, &rp(&[0.2, 0.3]), &s).unwrap();
        for c in out.point.coords() {
            assert!((c - 1.0 / 3.0).abs() < 1e-10);
        }

        // η·ũ = 1: the other action keeps (3 − √5)/2.
        let out = damped_newton_argmax(&[1.0], 1.0, &ReducedPoint::uniform(2), &s).unwrap();
        let x = out.point.to_strategy();
        assert!((x.probs()[1] - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-10, "{x:?}");
        assert!((x.probs()[0] - two_action_oracle(1.0)).abs() < 1e-10);
        assert!(out.decrement <= s.decrement_tolerance);

        assert!(damped_newton_argmax(&[1.0], 0.0, &ReducedPoint::uniform(2), &s).is_err());
    }

    #[test]
    fn solver_reports_nonconvergence() {
        let s = SolverSettings { max_iterations: 1, ..Default::default() };
        let err = damped_newton_argmax(&[50.0, -20.0], 1.0, &ReducedPoint::uniform(3), &s).unwrap_err();
        match err {
            Error::Convergence { last_decrement, .. } => assert!(last_decrement > 1e-10),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn degenerate_single_action() {
        let x = ReducedPoint::uniform(1);
        assert_eq!(x.to_strategy().probs(), &[1.0]);
        assert_eq!(barrier_value(&x), 0.0);
        let out = maximize_linear_minus_barrier(&[], &x, &SolverSettings::default()).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(newton_decrement(&x, &[]), 0.0);
    }

    #[test]
    fn minkowski_examples() {
        let center = Mixed::uniform(3);
        assert_eq!(minkowski(&center, &center).unwrap(), 0.0);
        let target = Mixed::new(vec![0.7, 0.2, 0.1]).unwrap();
        let pi = minkowski(&center, &target).unwrap();
        assert!((pi - 0.7).abs() < 1e-12);

        // line search oracle: smallest s on a fine grid whose scaled point is feasible
        let feasible = |s: f64| {
            center
                .probs()
                .iter()
                .zip(target.probs())
                .all(|(c, t)| c + (t - c) / s >= -1e-12)
        };
        let s_grid = (1..=100_000).map(|k| k as f64 * 1e-5).find(|&s| feasible(s)).unwrap();
        assert!((s_grid - pi).abs() <= 1e-5);

        let boundary = Mixed::new(vec![0.5, 0.5, 0.0]).unwrap();
        assert_eq!(minkowski(&center, &boundary).unwrap(), 1.0);
    }

    #[test]
    fn diameter_examples() {
        let center = Mixed::uniform(3);
        assert!(diameter_bound_check(&center, &center, 3.0).unwrap());
        let target = Mixed::new(vec![0.7, 0.2, 0.1]).unwrap();
        let lhs = barrier_value_full(&target).unwrap();
        let rhs = 3.0 * (1.0f64 / 0.3).ln();
        assert!((rhs - 3.612).abs() < 1e-3);
        assert!(lhs <= rhs);
        assert!(diameter_bound_check(&center, &target, 3.0).unwrap());
        let boundary = Mixed::new(vec![0.5, 0.5, 0.0]).unwrap();
        assert!(diameter_bound_check(&center, &boundary, 3.0).unwrap());
    }

    #[test]
    fn diameter_random_sweep() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64(11);
        for k in 0..10_000 {
            let d = 2 + k % 7;
            let w: Vec<f64> = (0..d).map(|_| rng.random_range(1e-6..1.0)).collect();
            let target = Mixed::from_weights(w).unwrap();
            assert!(diameter_bound_check(&Mixed::uniform(d), &target, d as f64).unwrap());
        }
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1.0)
    }

    proptest! {
        #[test]
        fn gradient_matches_finite_differences(x in (2usize..7).prop_flat_map(interior_point)) {
            let g = barrier_gradient(&x);
            let h = 1e-6;
            for r in 0..g.len() {
                let mut plus = x.coords().to_vec();
                let mut minus = x.coords().to_vec();
                plus[r] += h;
                minus[r] -= h;
                let fd = (barrier_value(&rp(&plus)) - barrier_value(&rp(&minus))) / (2.0 * h);
                prop_assert!(rel_err(fd, g[r]) <= 1e-6, "r={} fd={} g={}", r, fd, g[r]);
            }
        }

        #[test]
        fn hessian_matches_gradient_jacobian(x in (2usize..7).prop_flat_map(interior_point)) {
            let hess = barrier_hessian(&x);
            let h = 1e-6;
            for s in 0..hess.len() {
                let mut plus = x.coords().to_vec();
                let mut minus = x.coords().to_vec();
                plus[s] += h;
                minus[s] -= h;
                let gp = barrier_gradient(&rp(&plus));
                let gm = barrier_gradient(&rp(&minus));
                for r in 0..hess.len() {
                    let fd = (gp[r] - gm[r]) / (2.0 * h);
                    prop_assert!(rel_err(fd, hess[r][s]) <= 1e-5);
                }
            }
        }

        #[test]
        fn sherman_morrison_inverts(
            x in (2usize..9).prop_flat_map(interior_point),
            seed in proptest::collection::vec(-10.0f64..10.0, 8),
        ) {
            let v = &seed[..x.coords().len()];
            let r = hessian_inverse_apply(&x, v);
            let h = barrier_hessian(&x);
            let vmax = v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
            for (row, vi) in h.iter().zip(v) {
                let back: f64 = row.iter().zip(&r).map(|(a, b)| a * b).sum();
                prop_assert!((back - vi).abs() <= 1e-10 * vmax.max(f64::MIN_POSITIVE));
            }
        }

        #[test]
        fn primal_norm_is_hessian_quadratic_form(
            x in (2usize..7).prop_flat_map(interior_point),
            seed in proptest::collection::vec(-1.0f64..1.0, 7),
        ) {
            let k = x.coords().len();
            let mut delta = seed[..k].to_vec();
            delta.push(-delta.iter().sum::<f64>());
            let h = barrier_hessian(&x);
            let quad: f64 = (0..k)
                .map(|r| (0..k).map(|s| delta[r] * h[r][s] * delta[s]).sum::<f64>())
                .sum();
            let n = primal_local_norm(&x.to_strategy(), &delta).unwrap();
            prop_assert!((n - quad.sqrt()).abs() <= 1e-10 * n.max(1.0));
        }

        #[test]
        fn dual_norm_is_min_over_shifts(
            x in (2usize..7).prop_flat_map(interior_point),
            seed in proptest::collection::vec(-1.0f64..1.0, 7),
        ) {
            let s = x.to_strategy();
            let u = &seed[..s.dim()];
            let obj = |c: f64| s.probs().iter().zip(u).map(|(p, u)| (p * (u - c)).powi(2)).sum::<f64>().sqrt();
            // golden-section search on [min u, max u]
            let (mut a, mut b) = (-1.0f64, 1.0f64);
            let g = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..200 {
                let c1 = b - g * (b - a);
                let c2 = a + g * (b - a);
                if obj(c1) < obj(c2) { b = c2 } else { a = c1 }
            }
            let oracle = obj(0.5 * (a + b));
            let n = dual_local_norm(&s, u).unwrap();
            prop_assert!((n - oracle).abs() <= 1e-9);
            // and it is the dual norm of the reduced utility
            let reduced = reduce_utility(u);
            prop_assert!((newton_decrement(&x, &reduced) - n).abs() <= 1e-9);
        }

        #[test]
        fn omega_lower_bounds(s in 0.0f64..1e6) {
            let w = omega(s).unwrap();
            prop_assert!(w >= s * s / (2.0 * (1.0 + s)) - 1e-12 * s.max(1.0));
            if s <= 1.0 {
                prop_assert!(w >= s * s / 4.0 - 1e-15);
            }
        }

        #[test]
        fn solver_contract_and_quadratic_growth(
            d in 2usize..12,
            seed in proptest::collection::vec(-30.0f64..30.0, 12),
            probe in proptest::collection::vec(0.01f64..1.0, 12),
        ) {
            let s = SolverSettings::default();
            let linear = &seed[..d - 1];
            let out = maximize_linear_minus_barrier(linear, &ReducedPoint::uniform(d), &s).unwrap();
            prop_assert!(out.decrement <= s.decrement_tolerance);
            let xs = out.point.clone();
            let f = |y: &ReducedPoint| barrier_value(y) - y.coords().iter().zip(linear).map(|(a, b)| a * b).sum::<f64>();
            let y = {
                let w = &probe[..d];
                let t: f64 = w.iter().sum();
                rp(&w[..d - 1].iter().map(|v| v / t).collect::<Vec<_>>())
            };
            let sx = xs.to_strategy();
            let sy = y.to_strategy();
            let delta: Vec<f64> = sy.probs().iter().zip(sx.probs()).map(|(a, b)| a - b).collect();
            let dist = primal_local_norm(&sx, &delta).unwrap();
            prop_assert!(f(&y) - f(&xs) >= omega(dist).unwrap() - 2.0 * s.decrement_tolerance - 1e-9 * f(&xs).abs().max(1.0));
        }

        #[test]
        fn warm_started_solves_are_fast(
            d in 2usize..=64,
            seed in proptest::collection::vec(-1.0f64..1.0, 64),
            bump in proptest::collection::vec(-0.1f64..0.1, 64),
        ) {
            let s = SolverSettings::default();
            let base: Vec<f64> = seed[..d - 1].iter().map(|v| 5.0 * v).collect();
            let start = maximize_linear_minus_barrier(&base, &ReducedPoint::uniform(d), &s).unwrap();
            let moved: Vec<f64> = base.iter().zip(&bump).map(|(a, b)| a + b).collect();
            let next = maximize_linear_minus_barrier(&moved, &start.point, &s).unwrap();
            prop_assert!(next.iterations <= 30, "took {} iterations", next.iterations);
            prop_assert!(next.decrement <= s.decrement_tolerance);
        }
    }
}
