use clap::{Parser, Subcommand};
use noswap_core::games::{random_bimatrix, save_game};
use noswap_core::harness::{csv_consistency, load_record, run_experiment, verify, write_outputs, ExperimentConfig};
use noswap_core::metrics::regret_report;
use noswap_core::rates;
use noswap_core::{Error, Result};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Uncoupled no-swap-regret dynamics: run experiments and verify traces.
#[derive(Parser)]
#[command(name = "noswap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its CSV trace (plus a `.trace.json` sidecar).
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every applicable checker on a trace; prints one JSON line per check.
    Verify {
        /// The CSV written by `run` (its sidecar is read) or the sidecar itself.
        #[arg(long)]
        trace: PathBuf,
    },
    /// Write a game file.
    GenGame {
        /// Two values: `m=<k> seed=<s>`.
        #[arg(long, num_args = 2, value_names = ["m=K", "seed=S"], required = true)]
        random_bimatrix: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the learning-rate presets.
    Rates {
        #[arg(long)]
        players: usize,
        /// Comma-separated action counts, one per player.
        #[arg(long, value_delimiter = ',', required = true)]
        actions: Vec<usize>,
        /// Interaction-graph neighbourhood size, for the large-game presets.
        #[arg(long)]
        c: Option<usize>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(false)` means a checker failed.
fn dispatch(command: Command) -> Result<bool> {
    match command {
        Command::Run { config, out } => run(&config, out),
        Command::Verify { trace } => verify_trace(&trace),
        Command::GenGame { random_bimatrix: spec, out } => gen_game(&spec, &out),
        Command::Rates { players, actions, c } => print_rates(players, &actions, c),
    }
}

fn run(config: &Path, out: Option<PathBuf>) -> Result<bool> {
    let cfg = ExperimentConfig::load(config)?;
    let out = out
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| Error::Config("no output path: pass --out or set `output` in the config".into()))?;
    let record = run_experiment(&cfg)?;
    write_outputs(&record, &out)?;
    let report = regret_report(&record.trace, None)?;
    let players: Vec<_> = record
        .trace
        .players
        .iter()
        .zip(&report.players)
        .map(|(p, r)| {
            json!({
                "algorithm": p.algorithm.tag(),
                "eta": p.eta,
                "swap_regret": r.swap_regret,
                "external_regret": r.external_regret,
                "path_len_sq": r.path_len_sq,
                "switched_at": p.switched_at,
            })
        })
        .collect();
    let summary = json!({
        "game": record.trace.meta.game,
        "horizon": record.trace.horizon(),
        "csv": out,
        "players": players,
    });
    println!("{summary}");
    Ok(true)
}

fn verify_trace(path: &Path) -> Result<bool> {
    let record = load_record(path)?;
    let mut report = verify(&record)?;
    if path.extension().is_none_or(|e| e != "json") {
        let c = csv_consistency(&record, path)?;
        report.pass &= c.pass;
        report.checks.push(c);
    }
    for c in &report.checks {
        println!("{}", c.to_json());
    }
    for s in &report.skipped {
        eprintln!("skipped: {s}");
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let failed = report.failures().count();
    println!("{}", json!({ "pass": report.pass, "checks": report.checks.len(), "failed": failed }));
    Ok(report.pass)
}

fn gen_game(spec: &[String], out: &Path) -> Result<bool> {
    let (mut m, mut seed) = (None, None);
    for item in spec {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::Input(format!("expected key=value, got {item:?}")))?;
        let bad = || Error::Input(format!("cannot parse {value:?} for `{key}`"));
        match key {
            "m" => m = Some(value.parse::<usize>().map_err(|_| bad())?),
            "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad())?),
            other => return Err(Error::Input(format!("unknown key {other:?}; expected `m` and `seed`"))),
        }
    }
    let (Some(m), Some(seed)) = (m, seed) else {
        return Err(Error::Input("--random-bimatrix needs both m=<k> and seed=<s>".into()));
    };
    save_game(&random_bimatrix(m, seed)?, out)?;
    Ok(true)
}

fn print_rates(players: usize, actions: &[usize], c: Option<usize>) -> Result<bool> {
    if actions.len() != players {
        return Err(Error::Input(format!("--actions lists {} counts for {players} players", actions.len())));
    }
    if let Some(&m) = actions.iter().find(|&&m| m < 2) {
        return Err(Error::Input(format!("every player needs at least 2 actions, got {m}")));
    }
    let mut out = json!({
        "theory": rates::theory_rate(players, actions)?,
        "bandit": rates::BANDIT_RATE,
        "rvu_swap_max": actions.iter().map(|&m| rates::rvu_swap_max_rate(m)).collect::<Vec<_>>(),
    });
    if let Some(c) = c {
        if c == 0 || c > players {
            return Err(Error::Input(format!("c must lie in 1..={players}, got {c}")));
        }
        out["large_game_aggregate"] = json!(rates::large_game_aggregate_rate(c, actions));
        out["large_game_individual"] = json!(rates::large_game_individual_rate(c, actions));
    }
    println!("{out}");
    Ok(true)
}
