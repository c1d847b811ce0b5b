//! Learning-rate presets and the closed-form right-hand sides of the regret
//! and path-length bounds.

use crate::error::{Error, Result};

/// Default learning rate of the bandit learners.
pub const BANDIT_RATE: f64 = 1.0 / 162.0;

fn max_sqrt(m_list: &[usize]) -> f64 {
    m_list.iter().map(|&m| (m as f64).sqrt()).fold(0.0, f64::max)
}

fn max_m(m_list: &[usize]) -> f64 {
    m_list.iter().copied().max().unwrap_or(0) as f64
}

fn sum_sq(m_list: &[usize]) -> f64 {
    m_list.iter().map(|&m| (m * m) as f64).sum()
}

/// `1/(128·(n−1)·max_j √m_j)`, the self-play preset.
pub fn theory_rate(n: usize, m_list: &[usize]) -> Result<f64> {
    if n < 2 {
        return Err(Error::Input(format!("the self-play preset needs n >= 2 players, got {n}")));
    }
    if m_list.len() != n {
        return Err(Error::Input(format!("{} action counts for {n} players", m_list.len())));
    }
    Ok(1.0 / (128.0 * (n - 1) as f64 * max_sqrt(m_list)))
}

/// Largest rate for which the swap-regret RVU bound is stated: `1/(128·√m)`.
pub fn rvu_swap_max_rate(m: usize) -> f64 {
    1.0 / (128.0 * (m as f64).sqrt())
}

/// `1/(128·c·max_j √m_j)` for games whose interaction graph has degree `c`.
pub fn large_game_aggregate_rate(c: usize, m_list: &[usize]) -> f64 {
    1.0 / (128.0 * c as f64 * max_sqrt(m_list))
}

/// `1/(128·√(c·n)·max_j √m_j)`.
pub fn large_game_individual_rate(c: usize, m_list: &[usize]) -> f64 {
    let n = m_list.len() as f64;
    1.0 / (128.0 * (c as f64 * n).sqrt() * max_sqrt(m_list))
}

/// `2m²·log T/η + 4η·variation − path/(2048·m·η)`.
pub fn rvu_swap_rhs(m: usize, eta: f64, horizon: usize, variation: f64, path: f64) -> f64 {
    let m = m as f64;
    2.0 * m * m * (horizon as f64).ln() / eta + 4.0 * eta * variation - path / (2048.0 * m * eta)
}

/// `8192·max_i m_i·Σ_i m_i²·log T`.
pub fn path_bound_rhs(m_list: &[usize], horizon: usize) -> f64 {
    8192.0 * max_m(m_list) * sum_sq(m_list) * (horizon as f64).ln()
}

/// `256·max_j √m_j·((n−1)·m_i² + Σ_j m_j²)·log T`.
pub fn swap_bound_rhs(m_i: usize, m_list: &[usize], horizon: usize) -> f64 {
    let n = m_list.len() as f64;
    let mi = m_i as f64;
    256.0 * max_sqrt(m_list) * ((n - 1.0) * mi * mi + sum_sq(m_list)) * (horizon as f64).ln()
}

/// `256·c·max_j √m_j·Σ_j m_j²·log T`.
pub fn large_game_aggregate_rhs(c: usize, m_list: &[usize], horizon: usize) -> f64 {
    256.0 * c as f64 * max_sqrt(m_list) * sum_sq(m_list) * (horizon as f64).ln()
}

/// `256·max_j √m_j·(√(cn)·m_i² + √(c/n)·Σ_j m_j²)·log T`.
pub fn large_game_individual_rhs(m_i: usize, c: usize, m_list: &[usize], horizon: usize) -> f64 {
    let n = m_list.len() as f64;
    let c = c as f64;
    let mi = m_i as f64;
    256.0 * max_sqrt(m_list) * ((c * n).sqrt() * mi * mi + (c / n).sqrt() * sum_sq(m_list)) * (horizon as f64).ln()
}

/// Variation budget of the robustness wrapper at step `t`:
/// `8192·(n−1)·max_j m_j·Σ_j m_j²·log t`.
pub fn variation_threshold(m_list: &[usize], t: usize) -> f64 {
    let n = m_list.len() as f64;
    8192.0 * (n - 1.0) * max_m(m_list) * sum_sq(m_list) * (t as f64).ln()
}

/// Whether two rates agree to a relative `1e-12`.
pub fn same_rate(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}
