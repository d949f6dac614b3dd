//! The `sweep` subcommand: a cartesian grid of config overrides, one CSV
//! row per cell, deterministic row order regardless of parallelism.

use anyhow::{Context, Result};
use cantor_games::designs::{verify_item1, verify_item2_small};
use cantor_games::game::run_match;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use crate::config::RawConfig;
use crate::{log_line, strategy};

struct Cell {
    /// Grid values in grid-key order, for the row prefix.
    labels: Vec<String>,
    raw: RawConfig,
}

fn cells(raw: &RawConfig) -> Vec<Cell> {
    let keys: Vec<&String> = raw.grid.keys().collect();
    if keys.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Cell { labels: Vec::new(), raw: raw.clone() }];
    for key in &keys {
        let values = &raw.grid[*key];
        let mut next = Vec::with_capacity(out.len() * values.len());
        for cell in &out {
            for v in values {
                let mut labels = cell.labels.clone();
                labels.push(v.clone());
                next.push(Cell { labels, raw: cell.raw.with_value(key, v) });
            }
        }
        out = next;
    }
    out
}

fn match_row(cell: &Cell, max_moves: usize) -> String {
    let prefix = cell.labels.join(",");
    let cfg = match crate::config::game_config(&cell.raw) {
        Ok(cfg) => cfg,
        Err(e) => return format!("{prefix},error,,,,,\"{e}\""),
    };
    let (mut alice, mut bob) =
        match (strategy::build_alice(&cell.raw, &cfg), strategy::build_bob(&cell.raw, &cfg)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return format!("{prefix},error,,,,,\"{e}\""),
        };
    let start = Instant::now();
    let t = run_match(&cfg, &mut *alice, &mut *bob, max_moves);
    let wall = start.elapsed().as_millis();
    let min_growth = t
        .metrics
        .stages
        .iter()
        .map(|r| r.zone_b.checked_sub(&r.zone_a).expect("zone_a within zone_b"))
        .min()
        .map(|g| g.to_string())
        .unwrap_or_default();
    log_line(&format!("cell [{prefix}]: {}", t.outcome));
    format!(
        "{prefix},{},{},{},{},{},",
        t.outcome,
        t.metrics.moves,
        t.metrics.stages.len(),
        min_growth,
        wall
    )
}

fn design_row(cell: &Cell) -> String {
    let prefix = cell.labels.join(",");
    let cfg = match crate::config::game_config(&cell.raw) {
        Ok(cfg) => cfg,
        Err(e) => return format!("{prefix},error,,\"{e}\""),
    };
    let design = match strategy::build_design(&cell.raw, &cfg) {
        Ok(d) => d,
        Err(e) => return format!("{prefix},error,,\"{e}\""),
    };
    let depth: usize = cell
        .raw
        .get("depth")
        .and_then(|v| v.parse().ok())
        .unwrap_or(3);
    let item1 = verify_item1(&design, depth);
    let item2 = if design.ell <= 20 && design.sets.len() <= 12 {
        verify_item2_small(&design, 8).map(|_| ())
    } else {
        Ok(())
    };
    let pass = item1.is_ok() && item2.is_ok();
    let note = item1.err().map(|e| e.to_string()).or_else(|| item2.err().map(|e| e.to_string()));
    log_line(&format!("cell [{prefix}]: design pass = {pass}"));
    format!("{prefix},{pass},{},{}", design.ell, note.map(|n| format!("\"{n}\"")).unwrap_or_default())
}

pub fn cmd_sweep(config: &Path, out: &Path, jobs: Option<usize>, max_moves: usize) -> u8 {
    match sweep(config, out, jobs, max_moves) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

fn sweep(config: &Path, out: &Path, jobs: Option<usize>, max_moves: usize) -> Result<()> {
    let raw = RawConfig::load(config)?;
    let task = raw.get("task").unwrap_or("match").to_string();
    let grid_keys: Vec<String> = raw.grid.keys().cloned().collect();
    let cells = cells(&raw);

    let rows: Vec<String> = run_cells(&cells, jobs, |cell| match task.as_str() {
        "design" => design_row(cell),
        _ => match_row(cell, max_moves),
    });

    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join("sweep.csv");
    let mut w = std::io::BufWriter::new(
        std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?,
    );
    let header = if task == "design" {
        format!("{},pass,ell,note", grid_keys.join(","))
    } else {
        format!(
            "{},outcome,moves,stages,min_stage_growth,wall_ms,note",
            grid_keys.join(",")
        )
    };
    writeln!(w, "{header}")?;
    for row in &rows {
        writeln!(w, "{row}")?;
    }
    if task == "design" {
        let passed = rows.iter().filter(|r| r.split(',').any(|f| f == "true")).count();
        writeln!(w, "# pass-rate = {passed}/{}", rows.len())?;
        println!("pass-rate {passed}/{}", rows.len());
    }
    println!("{} cells -> {}", rows.len(), path.display());
    Ok(())
}

#[cfg(feature = "parallel")]
fn run_cells<F>(cells: &[Cell], jobs: Option<usize>, f: F) -> Vec<String>
where
    F: Fn(&Cell) -> String + Sync + Send,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .expect("thread pool");
    pool.install(|| cells.par_iter().map(f).collect())
}

#[cfg(not(feature = "parallel"))]
fn run_cells<F>(cells: &[Cell], _jobs: Option<usize>, f: F) -> Vec<String>
where
    F: Fn(&Cell) -> String + Sync + Send,
{
    cells.iter().map(f).collect()
}
