//! Scripted adversaries driven by a weight schedule: a list of requests
//! with reveal indices, loaded from CSV. Used to replay hidden-order
//! weight functions as online request streams.

use crate::dyadic::Dyadic;
use crate::game::state::AllocationState;
use crate::game::{AliceStrategy, GameConfig, Request, Vertex};
use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduleEntry {
    pub vertices: Vec<Vertex>,
    pub weight: Dyadic,
    /// Position in the revealed order; ties keep file order.
    pub reveal: u64,
}

#[derive(Clone, Debug, Default)]
pub struct WeightSchedule {
    pub entries: Vec<ScheduleEntry>,
}

impl WeightSchedule {
    pub fn from_entries(mut entries: Vec<ScheduleEntry>) -> Self {
        entries.sort_by_key(|e| e.reveal);
        WeightSchedule { entries }
    }

    /// CSV rows of the form `v1,..,vk,weight,reveal` with weights written
    /// as `num/2^exp`. Blank lines and `#` comments are skipped.
    pub fn read_csv(reader: impl BufRead) -> Result<Self, String> {
        let mut entries = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| format!("line {}: {e}", lineno + 1))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() < 3 {
                return Err(format!("line {}: need vertices, weight, reveal", lineno + 1));
            }
            let (tail, verts) = fields.split_last().unwrap();
            let (weight, verts) = verts.split_last().unwrap();
            let vertices = verts
                .iter()
                .map(|v| v.parse::<Vertex>().map_err(|e| format!("line {}: {e}", lineno + 1)))
                .collect::<Result<Vec<_>, _>>()?;
            let weight: Dyadic = weight
                .parse()
                .map_err(|e| format!("line {}: {e}", lineno + 1))?;
            let reveal: u64 = tail
                .parse()
                .map_err(|e| format!("line {}: {e}", lineno + 1))?;
            entries.push(ScheduleEntry { vertices, weight, reveal });
        }
        Ok(Self::from_entries(entries))
    }

    pub fn write_csv(&self, mut writer: impl Write) -> std::io::Result<()> {
        for e in &self.entries {
            let verts: Vec<String> = e.vertices.iter().map(|v| v.to_string()).collect();
            writeln!(writer, "{},{},{}", verts.join(","), e.weight, e.reveal)?;
        }
        Ok(())
    }

    /// Per-vertex weight totals must stay within the budget d.
    pub fn check_budgets(&self, d: &Dyadic) -> Result<(), String> {
        let mut totals: BTreeMap<Vertex, Dyadic> = BTreeMap::new();
        for e in &self.entries {
            for &v in &e.vertices {
                let t = totals.entry(v).or_insert_with(Dyadic::zero);
                *t += &e.weight;
                if &*t > d {
                    return Err(format!("vertex {v} accumulates {t}, budget is {d}"));
                }
            }
        }
        Ok(())
    }

    /// Reads a schedule and rejects it up front if any vertex is
    /// over budget.
    pub fn load(path: &Path, d: &Dyadic) -> Result<Self, String> {
        let file = std::fs::File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let schedule = Self::read_csv(std::io::BufReader::new(file))?;
        schedule.check_budgets(d)?;
        Ok(schedule)
    }
}

pub struct ScheduleAdversary {
    schedule: WeightSchedule,
    cursor: usize,
    skipped: u64,
}

/// Replays a schedule in reveal order. Entries whose weight is not an
/// allowed request size (or exceeds delta) are skipped and counted.
pub fn schedule_adversary(schedule: WeightSchedule) -> ScheduleAdversary {
    ScheduleAdversary { schedule, cursor: 0, skipped: 0 }
}

impl AliceStrategy for ScheduleAdversary {
    fn name(&self) -> &'static str {
        "schedule"
    }

    fn next(&mut self, cfg: &GameConfig, _state: &AllocationState) -> Option<Request> {
        while self.cursor < self.schedule.entries.len() {
            let e = &self.schedule.entries[self.cursor];
            self.cursor += 1;
            if e.weight > cfg.delta || !cfg.allowed_sizes.contains(&e.weight) {
                self.skipped += 1;
                continue;
            }
            return Some(Request { vertices: e.vertices.clone(), size: e.weight.clone() });
        }
        None
    }

    fn finish(&self, metrics: &mut crate::game::Metrics) {
        metrics
            .extras
            .insert("schedule-skipped".into(), self.skipped.to_string());
    }
}
