//! Runs every applicable checker on a recorded run.

use super::output::{csv_rows, read_csv, CsvRow};
use super::runner::RunRecord;
use crate::error::{Error, Result};
use crate::metrics::{
    ce_gap, decomposition_residual, gamma_term_check, large_game_check, learner_series, mul_stability_check,
    path_bound_check, rvu_swap_check, swap_bound_check, swap_regret, Algorithm, CheckReport, RegretAccumulator,
};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Identity tolerances.
const DECOMPOSITION_TOL: f64 = 1e-9;
const CE_IDENTITY_TOL: f64 = 1e-12;
const NONNEGATIVITY_TOL: f64 = 1e-9;
const CSV_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckReport>,
    /// Checkers not run, with the reason.
    pub skipped: Vec<String>,
    pub warnings: Vec<String>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckReport> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn find(&self, checker: &str, player: Option<usize>) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.checker == checker && c.player == player)
    }
}

struct Bundle {
    checks: Vec<CheckReport>,
    skipped: Vec<String>,
}

impl Bundle {
    /// Records a checker result; hypothesis violations become skips.
    fn take(&mut self, name: &str, who: Option<usize>, r: Result<CheckReport>) -> Result<()> {
        match r {
            Ok(c) => self.checks.push(c),
            Err(e @ (Error::Precondition(_) | Error::Config(_))) => {
                let who = who.map_or(String::new(), |i| format!(" (player {i})"));
                self.skipped.push(format!("{name}{who}: {e}"));
            }
            Err(e) => return Err(e),
        }
        Ok(())
    }
}

/// Verifies a full-information run. Bandit runs are refused.
pub fn verify(record: &RunRecord) -> Result<VerifyReport> {
    let trace = &record.trace;
    trace.validate()?;
    if trace.meta.bandit {
        return Err(Error::Precondition("full-information checkers refuse bandit traces".into()));
    }
    let toggles = record.config.checks;
    let mut b = Bundle { checks: Vec::new(), skipped: Vec::new() };
    let mut warnings = Vec::new();
    let horizon = trace.horizon();
    if horizon == 0 {
        log::warn!("empty trace: every check passes vacuously");
        warnings.push("empty trace: every check passes vacuously".into());
        return Ok(VerifyReport { checks: Vec::new(), skipped: Vec::new(), warnings, pass: true });
    }

    if toggles.identities {
        let gaps = ce_gap(trace);
        for (i, p) in trace.players.iter().enumerate() {
            let mut acc = RegretAccumulator::new(p.num_actions());
            let mut worst = 0.0_f64;
            for t in 1..=horizon {
                acc.push(p.strategies[t].probs(), &p.utilities[t]);
                worst = worst.min(acc.swap_regret());
            }
            b.checks.push(CheckReport::scalar("swap_regret_nonnegative", Some(i), -worst, 0.0, NONNEGATIVITY_TOL));
            let sw = swap_regret(&p.strategies[1..], &p.utilities[1..]);
            let diff = (gaps[i] * horizon as f64 - sw).abs();
            b.checks.push(CheckReport::scalar("ce_gap_identity", Some(i), diff, 0.0, CE_IDENTITY_TOL * sw.abs().max(1.0)));
            if p.algorithm.is_bm() && p.rows.is_some() {
                let res = decomposition_residual(p)?.abs();
                b.checks.push(CheckReport::scalar("swap_decomposition", Some(i), res, 0.0, DECOMPOSITION_TOL));
            }
        }
    }

    let tolerance = trace.meta.solver.decrement_tolerance;
    for (i, p) in trace.players.iter().enumerate() {
        let who = Some(i);
        if p.algorithm != Algorithm::BmOftrlLogbar {
            b.skipped.push(format!("theorem checkers (player {i}): algorithm {} is not bm-oftrl-logbar", p.algorithm.tag()));
            continue;
        }
        if toggles.newton_decrement && !p.decrements.is_empty() {
            let worst = p.decrements.iter().copied().fold(0.0, f64::max);
            b.checks.push(CheckReport::scalar("newton_decrement", who, worst, tolerance, 0.0));
        }
        if toggles.rvu_swap {
            b.take("rvu_swap_check", who, rvu_swap_check(p, who, record.config.allow_rate_override))?;
        }
        if toggles.swap_bound {
            b.take("swap_bound_check", who, swap_bound_check(p, who, trace.num_players(), &trace.meta.actions))?;
        }
        if toggles.gamma_term {
            let r = match &p.rows {
                Some(rows) => gamma_term_check(&p.strategies, rows, p.eta),
                None => Err(Error::Config("no sub-learner rows".into())),
            };
            b.take("gamma_term_check", who, r.map(|mut c| {
                c.player = who;
                c
            }))?;
        }
        if toggles.mul_stability {
            let r = learner_series(p).and_then(|(rows, utils)| {
                mul_stability_check(&rows, &vec![p.eta; rows.len()], &utils, tolerance)
            });
            match r {
                Ok(mut m) => {
                    m.rows.player = who;
                    m.aggregate.player = who;
                    b.checks.push(m.rows);
                    b.checks.push(m.aggregate);
                }
                Err(e) => b.take("mul_stability_check", who, Err(e))?,
            }
        }
    }
    if toggles.path_bound {
        b.take("path_bound_check", None, path_bound_check(trace))?;
    }
    if toggles.large_game {
        match trace.graph()? {
            Some(graph) => match large_game_check(trace, &graph) {
                Ok(r) => b.checks.extend(r.aggregate.into_iter().chain(r.individual)),
                Err(e) => b.take("large_game_check", None, Err(e))?,
            },
            None => b.skipped.push("large_game_check: game has no interaction graph".into()),
        }
    }
    let pass = b.checks.iter().all(|c| c.pass);
    Ok(VerifyReport { checks: b.checks, skipped: b.skipped, warnings, pass })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= CSV_TOL * a.abs().max(b.abs()).max(1.0)
}

fn row_matches(a: &CsvRow, b: &CsvRow) -> bool {
    a.t == b.t
        && a.player == b.player
        && a.action_count == b.action_count
        && close(a.swap_regret_cum, b.swap_regret_cum)
        && close(a.external_regret_cum, b.external_regret_cum)
        && close(a.path_len_sq_cum, b.path_len_sq_cum)
        && close(a.nash_gap, b.nash_gap)
        && close(a.ce_gap, b.ce_gap)
        && a.x.len() == b.x.len()
        && a.x.iter().zip(&b.x).all(|(p, q)| close(*p, *q))
}

/// Compares a CSV file with the metrics recomputed from its trace. The
/// report's `lhs` is the number of mismatching rows and `first_violation`
/// the step of the first one.
pub fn csv_consistency(record: &RunRecord, csv_path: &Path) -> Result<CheckReport> {
    let game = record.game()?;
    let want = csv_rows(&record.trace, &game)?;
    let got = read_csv(csv_path)?;
    let mut bad = want.len().abs_diff(got.len());
    let mut first = (want.len() != got.len()).then(|| want.len().min(got.len()) / record.trace.num_players().max(1));
    for (w, g) in want.iter().zip(&got) {
        if !row_matches(w, g) {
            bad += 1;
            first = Some(first.map_or(w.t, |f| f.min(w.t)));
        }
    }
    let mut r = CheckReport::scalar("csv_consistency", None, bad as f64, 0.0, 0.0);
    r.first_violation = first;
    Ok(r)
}
