//! The `verify` subcommand: re-checks an artifact on disk.
//!
//! The artifact kind is sniffed from the first line: `{` opens an NDJSON
//! transcript, a six-field whitespace header opens a design list, and a
//! comma-separated line opens a projective plane CSV.

use cantor_games::designs::{verify_item1, verify_item2_small, verify_plane_csv, DesignList};
use cantor_games::game::Transcript;
use std::io::BufReader;
use std::path::Path;

use crate::log_line;

pub fn cmd_verify(artifact: &Path) -> u8 {
    let text = match std::fs::read_to_string(artifact) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: reading {}: {e}", artifact.display());
            return 2;
        }
    };
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .unwrap_or("");

    if first.starts_with('{') {
        return verify_transcript(&text);
    }
    let fields = first.split_whitespace().count();
    if fields == 6 && !first.contains(',') {
        return verify_design(&text);
    }
    if first.contains(',') {
        return verify_plane(&text);
    }
    eprintln!("error: unrecognized artifact {}", artifact.display());
    2
}

fn verify_transcript(text: &str) -> u8 {
    let t = match Transcript::read_ndjson(BufReader::new(text.as_bytes())) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("verify failed: {e}");
            return 5;
        }
    };
    match t.verify() {
        Ok(()) => {
            println!("transcript ok: {} ({} moves)", t.outcome, t.metrics.moves);
            0
        }
        Err(e) => {
            eprintln!("verify failed: {e}");
            5
        }
    }
}

fn verify_design(text: &str) -> u8 {
    let d = match DesignList::read(BufReader::new(text.as_bytes())) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("verify failed: {e}");
            return 5;
        }
    };
    if let Err(e) = verify_item1(&d, 3) {
        eprintln!("verify failed: {e}");
        return 5;
    }
    if d.ell <= 20 && d.sets.len() <= 12 {
        match verify_item2_small(&d, 8) {
            Ok(best) => log_line(&format!("largest disjoint qualifying family: {best}")),
            Err(e) => {
                eprintln!("verify failed: {e}");
                return 5;
            }
        }
    }
    println!("design ok: ell = {}, {} sets", d.ell, d.sets.len());
    0
}

fn verify_plane(text: &str) -> u8 {
    match verify_plane_csv(BufReader::new(text.as_bytes())) {
        Ok(q) => {
            println!("plane ok: order {q}");
            0
        }
        Err(e) => {
            eprintln!("verify failed: {e}");
            5
        }
    }
}
