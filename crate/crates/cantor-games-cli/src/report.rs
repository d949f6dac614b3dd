//! The run report: a plot-ready CSV regenerable from the transcript.
//! `#`-prefixed lines echo the config, outcome and wall time; the table
//! has one row per adversary stage (or a single totals row).

use cantor_games::game::Transcript;
use std::io::Write;
use std::time::Duration;

pub struct RunReport<'a> {
    pub transcript: &'a Transcript,
    pub alice: &'a str,
    pub bob: &'a str,
    pub wall: Duration,
}

impl RunReport<'_> {
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        let cfg = &self.transcript.config;
        let m = &self.transcript.metrics;
        writeln!(w, "# mode = {}", crate::config::mode_name(cfg.mode))?;
        writeln!(w, "# alice = {}", self.alice)?;
        writeln!(w, "# bob = {}", self.bob)?;
        writeln!(w, "# d = {}", cfg.d)?;
        writeln!(w, "# delta = {}", cfg.delta)?;
        writeln!(w, "# s = {}", cfg.s)?;
        if let Some(n) = cfg.n {
            writeln!(w, "# n = {n}")?;
        }
        writeln!(w, "# seed = {}", cfg.seed)?;
        writeln!(w, "# outcome = {}", self.transcript.outcome)?;
        writeln!(w, "# moves = {}", m.moves)?;
        writeln!(w, "# ball-count-ok = {}", m.ball_count_ok)?;
        writeln!(w, "# wall-time-ms = {}", self.wall.as_millis())?;
        writeln!(w, "stage,zone_a,zone_b,active,blames,regions,friends,leaders,n_k")?;
        let regions = m.extras.get("regions-assigned").cloned().unwrap_or_default();
        if m.stages.is_empty() {
            writeln!(
                w,
                "0,,,,{},{},{},{},{}",
                m.blames, regions, m.friends, m.leaders, m.vertices_touched
            )?;
        }
        for row in &m.stages {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                row.stage,
                row.zone_a,
                row.zone_b,
                row.active,
                m.blames,
                regions,
                m.friends,
                m.leaders,
                m.vertices_touched
            )?;
        }
        Ok(())
    }
}
