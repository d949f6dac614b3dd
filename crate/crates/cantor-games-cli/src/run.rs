//! The `run` subcommand: one match, transcript + report on disk.

use anyhow::{Context, Result};
use cantor_games::game::{run_match, Outcome, Transcript};
use std::path::Path;
use std::time::Instant;

use crate::config::RawConfig;
use crate::report::RunReport;
use crate::{log_line, strategy};

pub struct RunArtifacts {
    pub transcript: Transcript,
}

pub fn execute(raw: &RawConfig, out: &Path, max_moves: usize) -> Result<RunArtifacts> {
    let cfg = crate::config::game_config(raw)?;
    let mut alice = strategy::build_alice(raw, &cfg)?;
    let mut bob = strategy::build_bob(raw, &cfg)?;
    let (alice_name, bob_name) = (alice.name().to_string(), bob.name().to_string());

    let start = Instant::now();
    let transcript = run_match(&cfg, &mut *alice, &mut *bob, max_moves);
    let wall = start.elapsed();
    log_line(&format!(
        "{} vs {}: {} in {} moves ({} ms)",
        alice_name,
        bob_name,
        transcript.outcome,
        transcript.metrics.moves,
        wall.as_millis()
    ));

    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let tpath = out.join("transcript.ndjson");
    let file = std::fs::File::create(&tpath)
        .with_context(|| format!("creating {}", tpath.display()))?;
    transcript.write_ndjson(std::io::BufWriter::new(file))?;

    let rpath = out.join("report.csv");
    let file = std::fs::File::create(&rpath)
        .with_context(|| format!("creating {}", rpath.display()))?;
    RunReport { transcript: &transcript, alice: &alice_name, bob: &bob_name, wall }
        .write_csv(std::io::BufWriter::new(file))?;

    Ok(RunArtifacts { transcript })
}

/// 0 on a completed match, 3 on a rule violation, 4 on a falsification.
pub fn exit_code(outcome: &Outcome) -> u8 {
    match outcome {
        Outcome::BobWinsScriptExhausted
        | Outcome::AliceWins { .. }
        | Outcome::Undecided => 0,
        Outcome::RuleViolation { .. } => 3,
        Outcome::Falsification { .. } => 4,
    }
}

pub fn cmd_run(config: &Path, out: &Path, seed: Option<u64>, max_moves: usize) -> u8 {
    let raw = match RawConfig::load(config) {
        Ok(raw) => raw,
        Err(e) => {
            eprintln!("error: {e:#}");
            return 2;
        }
    };
    let raw = match seed {
        Some(s) => raw.with_value("seed", &s.to_string()),
        None => raw,
    };
    match execute(&raw, out, max_moves) {
        Ok(artifacts) => {
            let outcome = &artifacts.transcript.outcome;
            println!("{outcome}");
            if let cantor_games::game::Outcome::RuleViolation { actor, rule, .. } = outcome {
                eprintln!("rule violation by {actor}: {rule}");
            }
            if let cantor_games::game::Outcome::Falsification { what, .. } = outcome {
                eprintln!("falsification: {what}");
            }
            exit_code(outcome)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}
