//! CSV trace emission.
//!
//! One row per `(t, player)` for `t = 0..=T`, with columns
//! `t, player, action_count, swap_regret_cum, external_regret_cum,
//! path_len_sq_cum, nash_gap, ce_gap, x0, …, x{M−1}` where `M` is the
//! largest action count; players with fewer actions leave the tail empty.

use super::runner::RunRecord;
use crate::error::{Error, Result};
use crate::games::NormalFormGame;
use crate::metrics::{RegretAccumulator, Trace};
use std::path::{Path, PathBuf};

pub const FIXED_COLUMNS: [&str; 8] = [
    "t",
    "player",
    "action_count",
    "swap_regret_cum",
    "external_regret_cum",
    "path_len_sq_cum",
    "nash_gap",
    "ce_gap",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub t: usize,
    pub player: usize,
    pub action_count: usize,
    pub swap_regret_cum: f64,
    pub external_regret_cum: f64,
    pub path_len_sq_cum: f64,
    pub nash_gap: f64,
    pub ce_gap: f64,
    pub x: Vec<f64>,
}

pub fn header(width: usize) -> Vec<String> {
    FIXED_COLUMNS.iter().map(|s| s.to_string()).chain((0..width).map(|k| format!("x{k}"))).collect()
}

/// Cumulative metrics at every step, computed from the trace.
pub fn csv_rows(trace: &Trace, game: &NormalFormGame) -> Result<Vec<CsvRow>> {
    let horizon = trace.horizon();
    let mut accs: Vec<RegretAccumulator> = trace.meta.actions.iter().map(|&m| RegretAccumulator::new(m)).collect();
    let mut paths = vec![0.0; trace.num_players()];
    let mut rows = Vec::with_capacity((horizon + 1) * trace.num_players());
    for t in 0..=horizon {
        let profile: Vec<_> = trace.players.iter().map(|p| p.strategies[t].clone()).collect();
        let nash_gap = game.nash_gap(&profile)?;
        for (i, p) in trace.players.iter().enumerate() {
            if t > 0 {
                accs[i].push(p.strategies[t].probs(), &p.utilities[t]);
                paths[i] += p.strategies[t].l1_distance(&p.strategies[t - 1]).powi(2);
            }
            let swap = accs[i].swap_regret();
            rows.push(CsvRow {
                t,
                player: i,
                action_count: p.num_actions(),
                swap_regret_cum: swap,
                external_regret_cum: accs[i].external_regret(),
                path_len_sq_cum: paths[i],
                nash_gap,
                ce_gap: if t == 0 { 0.0 } else { swap / t as f64 },
                x: p.strategies[t].probs().to_vec(),
            });
        }
    }
    Ok(rows)
}

pub fn write_csv(rows: &[CsvRow], path: &Path) -> Result<()> {
    let width = rows.iter().map(|r| r.x.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header(width))?;
    for r in rows {
        let mut rec = vec![
            r.t.to_string(),
            r.player.to_string(),
            r.action_count.to_string(),
            r.swap_regret_cum.to_string(),
            r.external_regret_cum.to_string(),
            r.path_len_sq_cum.to_string(),
            r.nash_gap.to_string(),
            r.ce_gap.to_string(),
        ];
        rec.extend(r.x.iter().map(f64::to_string));
        rec.resize(FIXED_COLUMNS.len() + width, String::new());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, k: usize, line: usize) -> Result<T> {
    let raw = rec.get(k).ok_or_else(|| Error::Parse(format!("line {line}: missing column {k}")))?;
    raw.parse().map_err(|_| Error::Parse(format!("line {line}: cannot parse {raw:?} in column {}", k + 1)))
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let head = r.headers()?.clone();
    for (k, name) in FIXED_COLUMNS.iter().enumerate() {
        if head.get(k) != Some(name) {
            return Err(Error::Parse(format!("column {} should be {name:?}", k + 1)));
        }
    }
    let width = head.len() - FIXED_COLUMNS.len();
    for k in 0..width {
        if head.get(FIXED_COLUMNS.len() + k) != Some(format!("x{k}").as_str()) {
            return Err(Error::Parse(format!("column {} should be \"x{k}\"", FIXED_COLUMNS.len() + k + 1)));
        }
    }
    let mut rows = Vec::new();
    for (n, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = n + 2;
        let action_count: usize = field(&rec, 2, line)?;
        if action_count > width {
            return Err(Error::Parse(format!("line {line}: {action_count} actions but {width} strategy columns")));
        }
        rows.push(CsvRow {
            t: field(&rec, 0, line)?,
            player: field(&rec, 1, line)?,
            action_count,
            swap_regret_cum: field(&rec, 3, line)?,
            external_regret_cum: field(&rec, 4, line)?,
            path_len_sq_cum: field(&rec, 5, line)?,
            nash_gap: field(&rec, 6, line)?,
            ce_gap: field(&rec, 7, line)?,
            x: (0..action_count).map(|k| field(&rec, FIXED_COLUMNS.len() + k, line)).collect::<Result<_>>()?,
        });
    }
    Ok(rows)
}

/// Where the full trace of a CSV is stored: `run.csv → run.trace.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("trace.json")
}

/// Writes the CSV and its trace sidecar.
pub fn write_outputs(record: &RunRecord, csv_path: &Path) -> Result<()> {
    let game = record.game()?;
    write_csv(&csv_rows(&record.trace, &game)?, csv_path)?;
    std::fs::write(sidecar_path(csv_path), record.to_json()?)?;
    Ok(())
}

/// Loads a run from either its CSV (through the sidecar) or the sidecar itself.
pub fn load_record(path: &Path) -> Result<RunRecord> {
    let json = if path.extension().is_some_and(|e| e == "json") { path.to_path_buf() } else { sidecar_path(path) };
    let text = std::fs::read_to_string(&json)
        .map_err(|e| Error::Input(format!("cannot read trace file {}: {e}", json.display())))?;
    RunRecord::from_json(&text)
}
