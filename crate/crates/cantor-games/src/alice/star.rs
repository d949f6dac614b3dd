//! The stage-and-star adversary. The game is split into N = 1/d stages;
//! stage i issues requests of size ε_{i-1} and accounts dirt at the
//! coarser granularity ε_i, so each allocated interval poisons a 2/d
//! times larger cell. The everywhere-dirty zone grows by d per stage;
//! after stage N every size-d/2 interval is dirty for the surviving
//! lineage vertices and one final half-budget request cannot be served.
//!
//! The pool holds exactly 2/d lineage vertices. Each substage extends the
//! stage's rolling star by one edge per pool member (d/ε_{i-1} edges per
//! stage in total, so the center spends exactly d per stage), observes
//! where Bob put the intervals, and adds the best escaped ε_i-cell to the
//! zone. A pool member that appears in every substage spends exactly
//! d²/2 per stage, d/2 over the whole game, leaving room for the final
//! request.

use crate::dyadic::Dyadic;
use crate::game::state::AllocationState;
use crate::game::{AliceStrategy, GameConfig, Key, Metrics, Mode, Request, StageRow, Vertex};
use crate::interval::{CantorAddress, IntervalSet};
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub struct StarPlan {
    pub d: Dyadic,
    /// N = 1/d.
    pub stage_count: usize,
    /// ε_0 ..= ε_N with ε_N = d/2 and ε_{i-1}/ε_i = d/2.
    pub epsilons: Vec<Dyadic>,
}

impl StarPlan {
    pub fn new(d: &Dyadic) -> Result<Self, String> {
        let log = d.log2().ok_or_else(|| format!("d must be a power of two, got {d}"))?;
        if !(-6..=-1).contains(&log) {
            return Err(format!("d must be between 1/64 and 1/2, got {d}"));
        }
        let k = (-log) as u32;
        let n = 1usize << k;
        let epsilons = (0..=n)
            .map(|i| Dyadic::pow2_neg((k + 1) * (n - i + 1) as u32))
            .collect();
        Ok(StarPlan { d: d.clone(), stage_count: n, epsilons })
    }

    /// Request size of stage i (1-based): ε_{i-1}.
    pub fn request_size(&self, stage: usize) -> &Dyadic {
        &self.epsilons[stage - 1]
    }

    /// Dirt granularity of stage i: ε_i.
    pub fn cell_size(&self, stage: usize) -> &Dyadic {
        &self.epsilons[stage]
    }

    /// Leaves of the full stage-i star: d/ε_{i-1}.
    pub fn star_size(&self, stage: usize) -> u64 {
        let d = (-self.d.log2().unwrap()) as u32;
        let e = (-self.request_size(stage).log2().unwrap()) as u32;
        1u64 << (e - d)
    }

    /// Lineage vertices kept active: 2/d, the number of request slots in
    /// one dirt cell.
    pub fn pool_size(&self) -> usize {
        let k = (-self.d.log2().unwrap()) as u32;
        1usize << (k + 1)
    }

    /// Substages of stage i: d/ε_i.
    pub fn substage_count(&self, stage: usize) -> u64 {
        let d = (-self.d.log2().unwrap()) as u32;
        let e = (-self.cell_size(stage).log2().unwrap()) as u32;
        1u64 << (e - d)
    }

    /// d/2, the final request size.
    pub fn half_d(&self) -> &Dyadic {
        &self.epsilons[self.stage_count]
    }

    /// A config this adversary is legal under.
    pub fn game_config(&self, mode: Mode) -> GameConfig {
        GameConfig {
            mode,
            n: None,
            s: 2,
            d: self.d.clone(),
            delta: self.half_d().clone(),
            c: Dyadic::one(),
            allowed_sizes: self.epsilons.clone(),
            seed: 0,
        }
    }
}

enum Phase {
    /// Issuing one edge per pool member; `idx` is the next member.
    Star { idx: usize },
    /// No escape after a full round: probe with throwaway edges.
    Flush { tries: u32 },
    Final,
    Done,
}

struct Pending {
    leaf: Vertex,
    key: Key,
    /// Table entry before the request, to isolate the new interval.
    prior: IntervalSet,
}

pub struct StarAdversary {
    plan: StarPlan,
    bipartite: bool,
    stage: usize,
    zone_a: IntervalSet,
    zone_b: IntervalSet,
    pool: Vec<Vertex>,
    /// Cells dirty for each pool member.
    dirty: BTreeMap<Vertex, IntervalSet>,
    center: Option<Vertex>,
    escapes: Vec<(Vertex, CantorAddress)>,
    pending: Option<Pending>,
    phase: Phase,
    substages_this_stage: u64,
    passes: u64,
    next_left: Vertex,
    next_right: Vertex,
    rows: Vec<StageRow>,
    centers_used: u64,
    replacements: u64,
    stalled: bool,
}

/// Staged star adversary that wins the non-bipartite pair games.
pub fn star_adversary(d: &Dyadic) -> Result<StarAdversary, String> {
    StarAdversary::new(d, false)
}

/// The same adversary with star centers on the left part and the lineage
/// pool on the right.
pub fn bipartite_star_adversary(d: &Dyadic) -> Result<StarAdversary, String> {
    StarAdversary::new(d, true)
}

fn truncate(a: &CantorAddress, depth: usize) -> CantorAddress {
    if a.len() <= depth {
        a.clone()
    } else {
        CantorAddress::from_bools(a.bits()[..depth].to_vec())
    }
}

fn depth_of(size: &Dyadic) -> usize {
    (-size.log2().expect("plan sizes are powers of two")) as usize
}

impl StarAdversary {
    fn new(d: &Dyadic, bipartite: bool) -> Result<Self, String> {
        Ok(StarAdversary {
            plan: StarPlan::new(d)?,
            bipartite,
            stage: 1,
            zone_a: IntervalSet::empty(),
            zone_b: IntervalSet::empty(),
            pool: Vec::new(),
            dirty: BTreeMap::new(),
            center: None,
            escapes: Vec::new(),
            pending: None,
            phase: Phase::Star { idx: 0 },
            substages_this_stage: 0,
            passes: 0,
            next_left: 0,
            next_right: 0,
            rows: Vec::new(),
            centers_used: 0,
            replacements: 0,
            stalled: false,
        })
    }

    pub fn plan(&self) -> &StarPlan {
        &self.plan
    }

    pub fn pool(&self) -> &[Vertex] {
        &self.pool
    }

    pub fn dirty(&self, v: Vertex) -> Option<&IntervalSet> {
        self.dirty.get(&v)
    }

    pub fn stage_rows(&self) -> &[StageRow] {
        &self.rows
    }

    fn leaf_side(&self) -> u8 {
        if self.bipartite {
            1
        } else {
            0
        }
    }

    fn fresh_center(&mut self) -> Vertex {
        if self.bipartite {
            let v = self.next_left;
            self.next_left += 1;
            v
        } else {
            self.fresh_leaf()
        }
    }

    fn fresh_leaf(&mut self) -> Vertex {
        let v = self.next_right;
        self.next_right += 1;
        v
    }

    /// The rolling center carries one stage's star; a fresh one is taken
    /// whenever the budget would not cover the next edge. Reusing the
    /// center repeats keys across substages, which the demand rules
    /// allow: prefix-free grants are consumed per request, and the
    /// nu-against-total-weight demands treat a repeat as a weight
    /// increment on the pair.
    fn ensure_center(&mut self, cfg: &GameConfig, state: &AllocationState, e: &Dyadic) -> Vertex {
        if let Some(c) = self.center {
            if &state.budget(0, c) + e <= cfg.d {
                return c;
            }
        }
        let c = self.fresh_center();
        self.center = Some(c);
        self.centers_used += 1;
        c
    }

    fn request(&self, center: Vertex, leaf: Vertex, size: Dyadic) -> Request {
        Request { vertices: vec![center, leaf], size }
    }

    fn issue(
        &mut self,
        cfg: &GameConfig,
        state: &AllocationState,
        center: Vertex,
        leaf: Vertex,
        size: Dyadic,
    ) -> Request {
        let req = self.request(center, leaf, size);
        let key = req.key(cfg.mode);
        self.pending = Some(Pending { leaf, prior: state.table(&key), key });
        req
    }

    fn observe(&mut self, state: &AllocationState, p: Pending) {
        let fresh = state.table(&p.key).difference(&p.prior);
        if fresh.is_empty() {
            self.passes += 1;
            return;
        }
        let c_depth = depth_of(self.plan.cell_size(self.stage));
        for addr in fresh.addresses() {
            let cell = truncate(&addr, c_depth);
            let cset = IntervalSet::from_address(&cell);
            let d = self.dirty.entry(p.leaf).or_default();
            *d = d.union(&cset);
            if !self.zone_b.contains(&cell)
                && !self.escapes.iter().any(|(l, c)| *l == p.leaf && *c == cell)
            {
                self.escapes.push((p.leaf, cell));
            }
        }
    }

    /// The new zone cell: the earliest pool member's escape wins (it keeps
    /// the oldest lineage fully dirty), then the largest escape group,
    /// ties to the leftmost cell.
    fn choose_cell(&self) -> CantorAddress {
        for &v in &self.pool {
            if let Some((_, c)) = self.escapes.iter().find(|(l, _)| *l == v) {
                return c.clone();
            }
        }
        let mut groups: BTreeMap<Vec<bool>, (usize, CantorAddress)> = BTreeMap::new();
        for (_, c) in &self.escapes {
            let e = groups
                .entry(c.bits().to_vec())
                .or_insert_with(|| (0, c.clone()));
            e.0 += 1;
        }
        groups
            .into_iter()
            .max_by(|a, b| a.1 .0.cmp(&b.1 .0).then(b.0.cmp(&a.0)))
            .expect("called with escapes present")
            .1
             .1
    }

    fn wrap_up(&mut self) {
        self.substages_this_stage += 1;
        let cell = self.choose_cell();
        self.zone_b = self.zone_b.union(&IntervalSet::from_address(&cell));
        self.escapes.clear();

        let za = self.zone_a.measure();
        let zb = self.zone_b.measure();
        let grown = zb
            .checked_sub(&za)
            .map_or(false, |g| g >= self.plan.d);
        if grown {
            self.rows.push(StageRow {
                stage: self.stage,
                zone_a: za,
                zone_b: zb,
                active: self.pool.len() as u64,
            });
            self.stage += 1;
            self.substages_this_stage = 0;
            self.zone_a = self.zone_b.clone();
            self.center = None;
            if self.stage > self.plan.stage_count {
                self.phase = Phase::Final;
                return;
            }
        } else if self.substages_this_stage > 16 * self.plan.substage_count(self.stage) {
            // a rule-abiding Bob cannot stretch a stage this far
            self.stalled = true;
            self.phase = Phase::Done;
            return;
        }
        self.phase = Phase::Star { idx: 0 };
    }
}

impl AliceStrategy for StarAdversary {
    fn name(&self) -> &'static str {
        if self.bipartite {
            "bipartite-star-adversary"
        } else {
            "star-adversary"
        }
    }

    fn next(&mut self, cfg: &GameConfig, state: &AllocationState) -> Option<Request> {
        if let Some(p) = self.pending.take() {
            self.observe(state, p);
        }
        loop {
            match self.phase {
                Phase::Done => return None,
                Phase::Final => {
                    self.phase = Phase::Done;
                    let half = self.plan.half_d().clone();
                    let winner = self
                        .pool
                        .iter()
                        .copied()
                        .find(|&v| &state.budget(self.leaf_side(), v) + &half <= cfg.d);
                    let Some(v) = winner else {
                        self.stalled = true;
                        continue;
                    };
                    let partner = self.fresh_center();
                    return Some(self.request(partner, v, half));
                }
                Phase::Star { idx } => {
                    let e = self.plan.request_size(self.stage).clone();
                    if idx == 0 {
                        while self.pool.len() < self.plan.pool_size() {
                            let v = self.fresh_leaf();
                            self.pool.push(v);
                        }
                    }
                    if idx < self.pool.len() {
                        let mut v = self.pool[idx];
                        if &state.budget(self.leaf_side(), v) + &e > *self.plan.half_d() {
                            // lazily extend: a drained member is replaced by
                            // a fresh vertex, never reused
                            v = self.fresh_leaf();
                            self.dirty.remove(&self.pool[idx]);
                            self.pool[idx] = v;
                            self.replacements += 1;
                        }
                        let c = self.ensure_center(cfg, state, &e);
                        self.phase = Phase::Star { idx: idx + 1 };
                        return Some(self.issue(cfg, state, c, v, e));
                    }
                    if self.escapes.is_empty() {
                        self.phase = Phase::Flush { tries: 0 };
                    } else {
                        self.wrap_up();
                    }
                    continue;
                }
                Phase::Flush { tries } => {
                    if !self.escapes.is_empty() {
                        self.wrap_up();
                        continue;
                    }
                    if tries >= 64 {
                        self.stalled = true;
                        self.phase = Phase::Done;
                        continue;
                    }
                    self.phase = Phase::Flush { tries: tries + 1 };
                    let e = self.plan.request_size(self.stage).clone();
                    let c = self.fresh_center();
                    let probe = self.fresh_leaf();
                    return Some(self.issue(cfg, state, c, probe, e));
                }
            }
        }
    }

    fn finish(&self, metrics: &mut Metrics) {
        metrics.stages = self.rows.clone();
        metrics
            .extras
            .insert("centers-used".into(), self.centers_used.to_string());
        metrics
            .extras
            .insert("pool-replacements".into(), self.replacements.to_string());
        metrics.extras.insert("passes".into(), self.passes.to_string());
        if self.stalled {
            metrics.extras.insert("stalled".into(), "true".into());
        }
    }
}
