//! Block-and-blame strategies for the set game: one region per member
//! (or per group), leader declarations and friendship ledgers.

use crate::bob::blocks::{BlockSpace, RegionKind};
use crate::designs::{BlameEvent, DesignList};
use crate::dyadic::Dyadic;
use crate::game::state::AllocationState;
use crate::game::{BobMove, BobStrategy, GameConfig, Metrics, Request, StrategyEvent, Vertex};
use crate::interval::{find_free_interval, CantorAddress, IntervalSet};
use std::collections::{BTreeMap, BTreeSet};

/// A sorted, nonempty set of vertices owning a region together.
pub type Group = Vec<Vertex>;

#[derive(Clone, Debug)]
pub struct SetRegion {
    pub owner: Group,
    pub size: Dyadic,
    pub kind: RegionKind,
    pub design_index: usize,
    pub seq: u64,
    pub blocks: Vec<u64>,
}

/// Why a joint allocation attempt failed.
pub enum SetAllocFailure {
    /// Per-region counts of full common blocks, and the common count.
    Full { counts: Vec<u64>, common: u64 },
    Accounting { block: u64 },
}

/// Region bookkeeping for the set strategies. A block is full for a group
/// S' when the eps-neighborhood of the group's allocations covers at
/// least #S'/s of the block.
pub struct SetRegionTable {
    pub space: BlockSpace,
    s: u64,
    design: DesignList,
    next_set: usize,
    used: BTreeMap<Group, BTreeSet<u64>>,
    coverage: BTreeMap<(Group, Dyadic), IntervalSet>,
    full: BTreeMap<(Group, Dyadic), BTreeSet<u64>>,
    regions: Vec<SetRegion>,
    current: BTreeMap<(Group, Dyadic), usize>,
    extra: BTreeMap<(Group, Dyadic), usize>,
    next_seq: u64,
    pub blame_ledger: Vec<BlameEvent>,
    pub worst_selection: (u64, u64),
}

impl SetRegionTable {
    pub fn new(space: BlockSpace, s: u64, design: DesignList) -> Self {
        SetRegionTable {
            space,
            s,
            design,
            next_set: 0,
            used: BTreeMap::new(),
            coverage: BTreeMap::new(),
            full: BTreeMap::new(),
            regions: Vec::new(),
            current: BTreeMap::new(),
            extra: BTreeMap::new(),
            next_seq: 0,
            blame_ledger: Vec::new(),
            worst_selection: (0, 1),
        }
    }

    pub fn region(&self, idx: usize) -> &SetRegion {
        &self.regions[idx]
    }

    pub fn region_count(&self) -> usize {
        self.regions.len()
    }

    fn threshold_met(&self, covered: &Dyadic, group_len: u64) -> bool {
        // covered >= (#S'/s) * 2^-(block depth)
        let block = self.space.block(0).size();
        covered.scale_int(self.s) >= block.scale_int(group_len)
    }

    fn ensure_coverage(&mut self, state: &AllocationState, group: &Group, size: &Dyadic) {
        let key = (group.clone(), size.clone());
        if self.coverage.contains_key(&key) {
            return;
        }
        let mut occ = IntervalSet::empty();
        for &v in group {
            occ = occ.union(state.occupancy_ref(0, v));
        }
        let cov = occ.eps_neighborhood(size);
        let mut full = BTreeSet::new();
        if !cov.is_empty() {
            for i in 0..self.space.block_count() {
                let covered = cov.measure_within(&self.space.block(i));
                if self.threshold_met(&covered, group.len() as u64) {
                    full.insert(i);
                }
            }
        }
        self.coverage.insert(key.clone(), cov);
        self.full.insert(key, full);
    }

    fn create_region(
        &mut self,
        state: &AllocationState,
        group: &Group,
        size: &Dyadic,
        kind: RegionKind,
    ) -> Result<usize, String> {
        self.ensure_coverage(state, group, size);
        let set = self
            .design
            .sets
            .get(self.next_set)
            .ok_or("design list exhausted")?;
        let design_index = self.next_set;
        self.next_set += 1;
        let used = self.used.entry(group.clone()).or_default();
        let blocks: Vec<u64> = set.iter().copied().filter(|b| !used.contains(b)).collect();
        used.extend(blocks.iter().copied());
        let seq = self.next_seq;
        self.next_seq += 1;
        self.regions.push(SetRegion {
            owner: group.clone(),
            size: size.clone(),
            kind,
            design_index,
            seq,
            blocks,
        });
        Ok(self.regions.len() - 1)
    }

    fn full_count(&self, idx: usize) -> u64 {
        let r = &self.regions[idx];
        let full = &self.full[&(r.owner.clone(), r.size.clone())];
        r.blocks.iter().filter(|b| full.contains(b)).count() as u64
    }

    /// Current normal region of (group, size); replaced once 1/(2t) of
    /// its blocks are full, where t is the number of groups in play.
    pub fn select_normal(
        &mut self,
        state: &AllocationState,
        group: &Group,
        size: &Dyadic,
        t: u64,
    ) -> Result<usize, String> {
        let key = (group.clone(), size.clone());
        if let Some(&idx) = self.current.get(&key) {
            let full = self.full_count(idx);
            let total = self.regions[idx].blocks.len() as u64;
            if 2 * t * full < total {
                self.note_selection(full, total);
                return Ok(idx);
            }
        }
        let idx = self.create_region(state, group, size, RegionKind::Normal)?;
        self.note_selection(self.full_count(idx), self.regions[idx].blocks.len().max(1) as u64);
        self.current.insert(key, idx);
        Ok(idx)
    }

    pub fn select_extra(
        &mut self,
        state: &AllocationState,
        group: &Group,
        size: &Dyadic,
    ) -> Result<usize, String> {
        let key = (group.clone(), size.clone());
        if let Some(&idx) = self.extra.get(&key) {
            return Ok(idx);
        }
        let idx = self.create_region(state, group, size, RegionKind::Extra)?;
        self.extra.insert(key, idx);
        Ok(idx)
    }

    fn note_selection(&mut self, full: u64, total: u64) {
        let (wf, wt) = self.worst_selection;
        if full * wt > wf * total {
            self.worst_selection = (full, total);
        }
    }

    /// Allocates in a block common to all regions and full for none.
    pub fn try_allocate(
        &self,
        state: &AllocationState,
        size: &Dyadic,
        regions: &[usize],
    ) -> Result<CantorAddress, SetAllocFailure> {
        let mut common: BTreeSet<u64> = self.regions[regions[0]].blocks.iter().copied().collect();
        for &idx in &regions[1..] {
            let blocks: BTreeSet<u64> = self.regions[idx].blocks.iter().copied().collect();
            common = common.intersection(&blocks).copied().collect();
        }
        let fulls: Vec<&BTreeSet<u64>> = regions
            .iter()
            .map(|&idx| {
                let r = &self.regions[idx];
                &self.full[&(r.owner.clone(), r.size.clone())]
            })
            .collect();
        for &i in &common {
            if fulls.iter().any(|f| f.contains(&i)) {
                continue;
            }
            let block = IntervalSet::from_address(&self.space.block(i));
            let mut vertices: Vec<Vertex> = Vec::new();
            for &idx in regions {
                vertices.extend(&self.regions[idx].owner);
            }
            let obstacles: Vec<&IntervalSet> = vertices
                .iter()
                .map(|&v| state.occupancy_ref(0, v))
                .collect();
            match find_free_interval(&obstacles, size, &block) {
                Some(addr) => return Ok(addr),
                None => return Err(SetAllocFailure::Accounting { block: i }),
            }
        }
        let counts = regions
            .iter()
            .zip(&fulls)
            .map(|(_, f)| common.iter().filter(|i| f.contains(i)).count() as u64)
            .collect();
        Err(SetAllocFailure::Full { counts, common: common.len() as u64 })
    }

    /// Folds an allocation into every coverage set whose group meets the
    /// allocated vertices.
    pub fn note_allocation(&mut self, vertices: &[Vertex], addr: &CantorAddress) {
        let keys: Vec<(Group, Dyadic)> = self
            .coverage
            .keys()
            .filter(|(g, _)| g.iter().any(|v| vertices.contains(v)))
            .cloned()
            .collect();
        for key in keys {
            let depth = (-key.1.log2().unwrap()) as usize;
            let cell = if addr.len() >= depth {
                CantorAddress::from_bools(addr.bits()[..depth].to_vec())
            } else {
                addr.clone()
            };
            let cov = self.coverage.get_mut(&key).unwrap();
            *cov = cov.union(&IntervalSet::from_address(&cell));
            if let Some(block) = self.space.block_of(&cell) {
                let covered = self.coverage[&key].measure_within(&self.space.block(block));
                if self.threshold_met(&covered, key.0.len() as u64) {
                    self.full.get_mut(&key).unwrap().insert(block);
                }
            }
        }
    }

    pub fn blame(&mut self, idx: usize) {
        let r = self.regions[idx].clone();
        self.blame_ledger.push(BlameEvent {
            owner: r.owner[0],
            region: r.seq,
            design_index: r.design_index as u64,
        });
        if r.kind == RegionKind::Normal {
            self.current.remove(&(r.owner, r.size));
        }
    }

    pub fn write_metrics(&self, prefix: &str, metrics: &mut Metrics) {
        let (wf, wt) = self.worst_selection;
        metrics
            .extras
            .insert(format!("{prefix}worst-selection"), format!("{wf}/{wt}"));
        metrics
            .extras
            .insert(format!("{prefix}regions"), self.regions.len().to_string());
        metrics
            .extras
            .insert(format!("{prefix}blames"), self.blame_ledger.len().to_string());
    }
}

fn singleton(v: Vertex) -> Group {
    vec![v]
}

fn check_set_sizes(cfg: &GameConfig, ell: u64) -> Result<(), String> {
    let s = cfg.s as u64;
    let max = cfg.allowed_sizes.iter().max().unwrap();
    if max.scale_int(ell * s) > Dyadic::one() {
        return Err(format!("sizes must be at most 1/(ell*s) = 1/{}", ell * s));
    }
    Ok(())
}

pub struct SetLeaders {
    table: SetRegionTable,
    /// leaders[u] excuse future failures of sets containing u.
    leaders: BTreeMap<Vertex, BTreeSet<Vertex>>,
    declared: u64,
    bound: u64,
}

/// Leader strategy: allocate in a common block or blame one member and
/// declare the rest its leaders; a set containing a leader of one of its
/// members needs no allocation at all.
pub fn set_leaders(
    cfg: &GameConfig,
    design: DesignList,
    leader_bound: u64,
) -> Result<SetLeaders, String> {
    check_set_sizes(cfg, design.ell)?;
    let space = BlockSpace::new(CantorAddress::root(), design.ell)?;
    Ok(SetLeaders {
        table: SetRegionTable::new(space, cfg.s as u64, design),
        leaders: BTreeMap::new(),
        declared: 0,
        bound: leader_bound,
    })
}

impl SetLeaders {
    fn excused(&self, set: &[Vertex]) -> bool {
        set.iter().any(|u| {
            self.leaders
                .get(u)
                .map_or(false, |ls| set.iter().any(|w| w != u && ls.contains(w)))
        })
    }
}

impl BobStrategy for SetLeaders {
    fn name(&self) -> &'static str {
        "set-leaders"
    }

    fn respond(&mut self, cfg: &GameConfig, state: &AllocationState, req: &Request) -> BobMove {
        let key = req.key(cfg.mode);
        let set = key.vertices().to_vec();
        if self.excused(&set) {
            return BobMove::decline(vec![StrategyEvent::Excused {
                note: "a leader of a member is present".into(),
            }]);
        }
        let t = set.len() as u64;
        let mut regions = Vec::with_capacity(set.len());
        for &u in &set {
            match self.table.select_normal(state, &singleton(u), &req.size, t) {
                Ok(idx) => regions.push(idx),
                Err(e) => return BobMove::dead_end(false, e),
            }
        }
        match self.table.try_allocate(state, &req.size, &regions) {
            Ok(addr) => {
                self.table.note_allocation(&set, &addr);
                BobMove::grant(vec![(key, addr)])
            }
            Err(SetAllocFailure::Accounting { block }) => {
                BobMove::dead_end(false, format!("open block {block} had no free slot"))
            }
            Err(SetAllocFailure::Full { counts, common }) => {
                if common == 0 {
                    return BobMove::dead_end(false, "member regions share no block");
                }
                let worst = counts
                    .iter()
                    .enumerate()
                    .max_by_key(|(_, c)| **c)
                    .map(|(i, _)| i)
                    .unwrap();
                let blamed = set[worst];
                self.table.blame(regions[worst]);
                let leaders: Vec<Vertex> = set.iter().copied().filter(|&w| w != blamed).collect();
                self.declared += leaders.len() as u64;
                if self.declared > self.bound {
                    return BobMove::dead_end(
                        false,
                        format!("{} leader declarations exceed the bound {}", self.declared, self.bound),
                    );
                }
                self.leaders.entry(blamed).or_default().extend(&leaders);
                BobMove::decline(vec![
                    StrategyEvent::Blame { vertex: blamed },
                    StrategyEvent::Leaders { of: blamed, leaders },
                ])
            }
        }
    }

    fn may_decline(&self) -> bool {
        true
    }

    fn finish(&self, metrics: &mut Metrics) {
        self.table.write_metrics("", metrics);
        metrics
            .extras
            .insert("leader-declarations".into(), self.declared.to_string());
    }
}

pub struct SetFriends {
    table: SetRegionTable,
    coappearance: BTreeMap<(Vertex, Vertex), Dyadic>,
    friends: BTreeSet<(Vertex, Vertex)>,
    /// coappearance measure f at which a pair becomes friends, as a
    /// scale factor: friends once measure * scale >= 1.
    friend_scale: u64,
}

/// Friend threshold r^(2s) * 2s^3 from the default f = r^(-2s)/(2s^3).
pub fn default_friend_scale(r: u64, s: u64) -> u64 {
    r.pow(2 * s as u32) * 2 * s * s * s
}

/// Friendship strategy: requests whose set contains a friend pair are
/// excused; everything else is allocated, swapping blamed normal regions
/// for extras (at most s swaps). Extras must never attract blame.
pub fn set_friends(
    cfg: &GameConfig,
    design: DesignList,
    friend_scale: u64,
) -> Result<SetFriends, String> {
    check_set_sizes(cfg, design.ell)?;
    let space = BlockSpace::new(CantorAddress::root(), design.ell)?;
    Ok(SetFriends {
        table: SetRegionTable::new(space, cfg.s as u64, design),
        coappearance: BTreeMap::new(),
        friends: BTreeSet::new(),
        friend_scale,
    })
}

impl SetFriends {
    fn friend_pair(&self, set: &[Vertex]) -> Option<(Vertex, Vertex)> {
        for (i, &a) in set.iter().enumerate() {
            for &b in &set[i + 1..] {
                if self.friends.contains(&(a.min(b), a.max(b))) {
                    return Some((a.min(b), a.max(b)));
                }
            }
        }
        None
    }
}

impl BobStrategy for SetFriends {
    fn name(&self) -> &'static str {
        "set-friends"
    }

    fn respond(&mut self, cfg: &GameConfig, state: &AllocationState, req: &Request) -> BobMove {
        let key = req.key(cfg.mode);
        let set = key.vertices().to_vec();
        if let Some((a, b)) = self.friend_pair(&set) {
            return BobMove::decline(vec![StrategyEvent::Excused {
                note: format!("friends {a} and {b} are both present"),
            }]);
        }
        let mut events = Vec::new();
        for (i, &a) in set.iter().enumerate() {
            for &b in &set[i + 1..] {
                let pair = (a.min(b), a.max(b));
                let m = self.coappearance.entry(pair).or_insert_with(Dyadic::zero);
                *m += &req.size;
                if m.scale_int(self.friend_scale) >= Dyadic::one() && self.friends.insert(pair) {
                    events.push(StrategyEvent::Friends { a: pair.0, b: pair.1 });
                }
            }
        }
        let t = set.len() as u64;
        let mut regions = Vec::with_capacity(set.len());
        for &u in &set {
            match self.table.select_normal(state, &singleton(u), &req.size, t) {
                Ok(idx) => regions.push(idx),
                Err(e) => return BobMove::dead_end(false, e),
            }
        }
        for _swap in 0..=set.len() {
            match self.table.try_allocate(state, &req.size, &regions) {
                Ok(addr) => {
                    self.table.note_allocation(&set, &addr);
                    let mut mv = BobMove::grant(vec![(key, addr)]);
                    mv.events = events;
                    return mv;
                }
                Err(SetAllocFailure::Accounting { block }) => {
                    return BobMove::dead_end(false, format!("open block {block} had no free slot"))
                }
                Err(SetAllocFailure::Full { counts, common }) => {
                    if common == 0 {
                        return BobMove::dead_end(false, "member regions share no block");
                    }
                    let worst = counts
                        .iter()
                        .enumerate()
                        .max_by_key(|(_, c)| **c)
                        .map(|(i, _)| i)
                        .unwrap();
                    if self.table.region(regions[worst]).kind == RegionKind::Extra {
                        return BobMove::dead_end(false, "an extra region attracted blame");
                    }
                    self.table.blame(regions[worst]);
                    events.push(StrategyEvent::Blame { vertex: set[worst] });
                    match self.table.select_extra(state, &singleton(set[worst]), &req.size) {
                        Ok(idx) => regions[worst] = idx,
                        Err(e) => return BobMove::dead_end(false, e),
                    }
                }
            }
        }
        BobMove::dead_end(false, "allocation failed with every extra region in place")
    }

    fn may_decline(&self) -> bool {
        true
    }

    fn finish(&self, metrics: &mut Metrics) {
        self.table.write_metrics("", metrics);
        let mut per_vertex: BTreeMap<Vertex, u64> = BTreeMap::new();
        for &(a, b) in &self.friends {
            *per_vertex.entry(a).or_insert(0) += 1;
            *per_vertex.entry(b).or_insert(0) += 1;
        }
        let max = per_vertex.values().copied().max().unwrap_or(0);
        metrics.extras.insert("friend-pairs".into(), self.friends.len().to_string());
        metrics
            .extras
            .insert("max-friends-per-vertex".into(), max.to_string());
    }
}
