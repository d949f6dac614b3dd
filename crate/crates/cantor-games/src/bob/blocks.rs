//! Block-and-blame allocators for the pair game: regions carved from a
//! DesignList assign blocks to (vertex, size) labels; failed allocations
//! blame the endpoint whose blocks filled up.

use crate::designs::{BlameEvent, DesignList};
use crate::dyadic::Dyadic;
use crate::game::state::AllocationState;
use crate::game::{BobMove, BobStrategy, GameConfig, Metrics, Request, StrategyEvent, Vertex};
use crate::interval::{find_free_interval, CantorAddress, IntervalSet};
use std::collections::{BTreeMap, BTreeSet};

pub const DEFAULT_SIZE_FACTOR: u64 = 64;

/// The equal-block partition of a base interval into ell blocks.
#[derive(Clone, Debug)]
pub struct BlockSpace {
    base: CantorAddress,
    ell: u64,
    depth: u32,
}

impl BlockSpace {
    pub fn new(base: CantorAddress, ell: u64) -> Result<Self, String> {
        if !ell.is_power_of_two() {
            return Err(format!("block count {ell} is not a power of two"));
        }
        Ok(BlockSpace { base, ell, depth: ell.trailing_zeros() })
    }

    pub fn block(&self, i: u64) -> CantorAddress {
        let mut bits = self.base.bits().to_vec();
        bits.extend(CantorAddress::nth_cell(self.depth, i).bits());
        CantorAddress::from_bools(bits)
    }

    /// The block containing [addr]; `None` if [addr] leaves the base or is
    /// coarser than a block.
    pub fn block_of(&self, addr: &CantorAddress) -> Option<u64> {
        let need = self.base.len() + self.depth as usize;
        if addr.len() < need || !self.base.is_prefix_of(addr) {
            return None;
        }
        let mut i = 0u64;
        for &bit in &addr.bits()[self.base.len()..need] {
            i = i << 1 | bit as u64;
        }
        Some(i)
    }

    /// Half a block's measure: the pair fullness threshold.
    pub fn half_block(&self) -> Dyadic {
        Dyadic::pow2_neg(self.base.len() as u32 + self.depth + 1)
    }

    pub fn block_count(&self) -> u64 {
        self.ell
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RegionKind {
    Normal,
    Extra,
}

/// Why an allocation attempt between two regions failed.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AllocFailure {
    /// Every common block is full for one of the regions.
    Full { a_full: u64, b_full: u64, common: u64 },
    /// A block below both thresholds had no free slot: the fullness
    /// accounting itself is broken.
    Accounting { block: u64 },
}

#[derive(Clone, Debug)]
pub struct Region {
    pub owner: Vertex,
    pub size: Dyadic,
    pub kind: RegionKind,
    pub design_index: usize,
    pub seq: u64,
    /// Owned block indices: the fresh index set minus the owner's used
    /// blocks, in ascending order.
    pub blocks: Vec<u64>,
}

/// Regions, fullness accounting and the blame ledger shared by the
/// blaming strategies.
pub struct RegionTable {
    pub space: BlockSpace,
    design: DesignList,
    next_set: usize,
    used: BTreeMap<Vertex, BTreeSet<u64>>,
    /// eps-neighborhood of the owner's allocations, per (owner, eps).
    coverage: BTreeMap<(Vertex, Dyadic), IntervalSet>,
    full: BTreeMap<(Vertex, Dyadic), BTreeSet<u64>>,
    regions: Vec<Region>,
    current: BTreeMap<(Vertex, Dyadic), usize>,
    extra: BTreeMap<(Vertex, Dyadic), usize>,
    next_seq: BTreeMap<Vertex, u64>,
    pub blame_ledger: Vec<BlameEvent>,
    /// Worst full-block fraction ever accepted at a selection, as
    /// (full, total) with maximal full/total.
    pub worst_selection: (u64, u64),
    pub extra_allocated: BTreeMap<usize, Dyadic>,
}

impl RegionTable {
    pub fn new(space: BlockSpace, design: DesignList) -> Self {
        RegionTable {
            space,
            design,
            next_set: 0,
            used: BTreeMap::new(),
            coverage: BTreeMap::new(),
            full: BTreeMap::new(),
            regions: Vec::new(),
            current: BTreeMap::new(),
            extra: BTreeMap::new(),
            next_seq: BTreeMap::new(),
            blame_ledger: Vec::new(),
            worst_selection: (0, 1),
            extra_allocated: BTreeMap::new(),
        }
    }

    pub fn region(&self, idx: usize) -> &Region {
        &self.regions[idx]
    }

    fn ensure_coverage(&mut self, state: &AllocationState, v: Vertex, size: &Dyadic) {
        let key = (v, size.clone());
        if self.coverage.contains_key(&key) {
            return;
        }
        let cov = state.occupancy_ref(0, v).eps_neighborhood(size);
        let mut full = BTreeSet::new();
        if !cov.is_empty() {
            let half = self.space.half_block();
            for i in 0..self.space.block_count() {
                if cov.measure_within(&self.space.block(i)) >= half {
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
        v: Vertex,
        size: &Dyadic,
        kind: RegionKind,
    ) -> Result<usize, String> {
        self.ensure_coverage(state, v, size);
        let set = self
            .design
            .sets
            .get(self.next_set)
            .ok_or("design list exhausted")?;
        let design_index = self.next_set;
        self.next_set += 1;
        let used = self.used.entry(v).or_default();
        let blocks: Vec<u64> = set.iter().copied().filter(|b| !used.contains(b)).collect();
        used.extend(blocks.iter().copied());
        let seq = self.next_seq.entry(v).or_default();
        let region = Region { owner: v, size: size.clone(), kind, design_index, seq: *seq, blocks };
        *seq += 1;
        self.regions.push(region);
        Ok(self.regions.len() - 1)
    }

    fn full_count(&self, idx: usize) -> u64 {
        let r = &self.regions[idx];
        let full = &self.full[&(r.owner, r.size.clone())];
        r.blocks.iter().filter(|b| full.contains(b)).count() as u64
    }

    /// The current normal region for (v, size), replaced by a fresh one
    /// once a quarter of its blocks are full.
    pub fn select_normal(
        &mut self,
        state: &AllocationState,
        v: Vertex,
        size: &Dyadic,
    ) -> Result<usize, String> {
        let key = (v, size.clone());
        if let Some(&idx) = self.current.get(&key) {
            let full = self.full_count(idx);
            let total = self.regions[idx].blocks.len() as u64;
            if 4 * full < total {
                self.note_selection(full, total);
                return Ok(idx);
            }
        }
        let idx = self.create_region(state, v, size, RegionKind::Normal)?;
        self.note_selection(self.full_count(idx), self.regions[idx].blocks.len().max(1) as u64);
        self.current.insert(key, idx);
        Ok(idx)
    }

    /// The extra region for (v, size); created once, never replaced.
    pub fn select_extra(
        &mut self,
        state: &AllocationState,
        v: Vertex,
        size: &Dyadic,
    ) -> Result<usize, String> {
        let key = (v, size.clone());
        if let Some(&idx) = self.extra.get(&key) {
            return Ok(idx);
        }
        let idx = self.create_region(state, v, size, RegionKind::Extra)?;
        self.extra.insert(key, idx);
        Ok(idx)
    }

    fn note_selection(&mut self, full: u64, total: u64) {
        let (wf, wt) = self.worst_selection;
        if full * wt > wf * total {
            self.worst_selection = (full, total);
        }
    }

    /// Sorted intersection of the two regions' block lists.
    pub fn common_blocks(&self, a: usize, b: usize) -> Vec<u64> {
        let (x, y) = (&self.regions[a].blocks, &self.regions[b].blocks);
        let set: BTreeSet<u64> = x.iter().copied().collect();
        y.iter().copied().filter(|i| set.contains(i)).collect()
    }

    /// Attempts to allocate `size` in a common block not full for either
    /// region; on failure returns the per-region full counts over the
    /// common blocks.
    pub fn try_allocate(
        &self,
        state: &AllocationState,
        size: &Dyadic,
        a: usize,
        b: usize,
    ) -> Result<CantorAddress, AllocFailure> {
        let common = self.common_blocks(a, b);
        let ra = &self.regions[a];
        let rb = &self.regions[b];
        let full_a = &self.full[&(ra.owner, ra.size.clone())];
        let full_b = &self.full[&(rb.owner, rb.size.clone())];
        for &i in &common {
            if full_a.contains(&i) || full_b.contains(&i) {
                continue;
            }
            let block = IntervalSet::from_address(&self.space.block(i));
            let obstacles = [state.occupancy_ref(0, ra.owner), state.occupancy_ref(0, rb.owner)];
            match find_free_interval(&obstacles, size, &block) {
                Some(addr) => return Ok(addr),
                // a block below both fullness thresholds always has a free
                // aligned slot; reaching here falsifies the accounting
                None => return Err(AllocFailure::Accounting { block: i }),
            }
        }
        let a_full = common.iter().filter(|i| full_a.contains(i)).count() as u64;
        let b_full = common.iter().filter(|i| full_b.contains(i)).count() as u64;
        Err(AllocFailure::Full { a_full, b_full, common: common.len() as u64 })
    }

    /// Folds a fresh allocation into every coverage set of both vertices.
    pub fn note_allocation(&mut self, vertices: &[Vertex], addr: &CantorAddress) {
        let half = self.space.half_block();
        for &v in vertices {
            let sizes: Vec<Dyadic> = self
                .coverage
                .keys()
                .filter(|(u, _)| *u == v)
                .map(|(_, s)| s.clone())
                .collect();
            for size in sizes {
                let depth = (-size.log2().unwrap()) as usize;
                let cell = if addr.len() >= depth {
                    CantorAddress::from_bools(addr.bits()[..depth].to_vec())
                } else {
                    addr.clone()
                };
                let key = (v, size);
                let cov = self.coverage.get_mut(&key).unwrap();
                *cov = cov.union(&IntervalSet::from_address(&cell));
                if let Some(block) = self.space.block_of(&cell) {
                    if cov.measure_within(&self.space.block(block)) >= half {
                        self.full.get_mut(&key).unwrap().insert(block);
                    }
                }
            }
        }
    }

    /// Records a blame against the region and retires it if normal.
    pub fn blame(&mut self, idx: usize) {
        let r = self.regions[idx].clone();
        self.blame_ledger.push(BlameEvent {
            owner: r.owner,
            region: r.seq,
            design_index: r.design_index as u64,
        });
        if r.kind == RegionKind::Normal {
            self.current.remove(&(r.owner, r.size));
        }
    }

    pub fn write_metrics(&self, prefix: &str, metrics: &mut Metrics) {
        let mut per_owner: BTreeMap<Vertex, u64> = BTreeMap::new();
        for ev in &self.blame_ledger {
            *per_owner.entry(ev.owner).or_insert(0) += 1;
        }
        let max_blames = per_owner.values().copied().max().unwrap_or(0);
        metrics
            .extras
            .insert(format!("{prefix}max-blames-per-vertex"), max_blames.to_string());
        let extra_blames = self
            .blame_ledger
            .iter()
            .filter(|ev| self.regions[ev.design_index as usize].kind == RegionKind::Extra)
            .count();
        metrics
            .extras
            .insert(format!("{prefix}extra-blames"), extra_blames.to_string());
        let (wf, wt) = self.worst_selection;
        metrics
            .extras
            .insert(format!("{prefix}worst-selection"), format!("{wf}/{wt}"));
        metrics
            .extras
            .insert(format!("{prefix}regions"), self.regions.len().to_string());
        if let Some(max) = self.extra_allocated.values().max() {
            metrics
                .extras
                .insert(format!("{prefix}max-extra-measure"), max.to_string());
        }
    }
}

fn check_sizes(cfg: &GameConfig, ell: u64, size_factor: u64) -> Result<(), String> {
    let n = cfg.n.ok_or("block strategies need a finite universe")? as u64;
    let m = cfg.allowed_sizes.len() as u64;
    let max = cfg.allowed_sizes.iter().max().unwrap();
    if max.scale_int(2 * ell) > Dyadic::one() {
        return Err(format!("sizes must be at most 1/(2*{ell})"));
    }
    if max.scale_int(size_factor * m * m * m * n) > Dyadic::one() {
        return Err(format!("sizes must be at most 1/({size_factor}*m^3*n)"));
    }
    Ok(())
}

pub struct RegionBlockBlaming {
    table: RegionTable,
}

/// Blame-on-failure allocator: allocates in a common non-full block of
/// the two endpoint regions, otherwise blames the endpoint owning at
/// least half of the full common blocks and declines.
pub fn region_block_blaming(
    cfg: &GameConfig,
    design: DesignList,
    size_factor: u64,
) -> Result<RegionBlockBlaming, String> {
    check_sizes(cfg, design.ell, size_factor)?;
    let space = BlockSpace::new(CantorAddress::root(), design.ell)?;
    Ok(RegionBlockBlaming { table: RegionTable::new(space, design) })
}

impl BobStrategy for RegionBlockBlaming {
    fn name(&self) -> &'static str {
        "region-block-blaming"
    }

    fn respond(&mut self, cfg: &GameConfig, state: &AllocationState, req: &Request) -> BobMove {
        let key = req.key(cfg.mode);
        let [u, v] = key.vertices() else {
            return BobMove::dead_end(false, "pair strategy got a non-pair request");
        };
        let (ru, rv) = match (
            self.table.select_normal(state, *u, &req.size),
            self.table.select_normal(state, *v, &req.size),
        ) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return BobMove::dead_end(false, e),
        };
        match self.table.try_allocate(state, &req.size, ru, rv) {
            Ok(addr) => {
                self.table.note_allocation(&[*u, *v], &addr);
                BobMove::grant(vec![(key, addr)])
            }
            Err(AllocFailure::Accounting { block }) => {
                BobMove::dead_end(false, format!("open block {block} had no free slot"))
            }
            Err(AllocFailure::Full { a_full, b_full, common }) => {
                if common == 0 {
                    return BobMove::dead_end(false, "endpoint regions share no block");
                }
                // every common block is full for one endpoint, so one of
                // them owns at least half
                let blamed = if a_full >= b_full { ru } else { rv };
                let owner = self.table.region(blamed).owner;
                self.table.blame(blamed);
                BobMove::decline(vec![StrategyEvent::Blame { vertex: owner }])
            }
        }
    }

    fn may_decline(&self) -> bool {
        true
    }

    fn finish(&self, metrics: &mut Metrics) {
        self.table.write_metrics("", metrics);
    }
}

impl RegionBlockBlaming {
    pub fn ledger(&self) -> &[BlameEvent] {
        &self.table.blame_ledger
    }
}

pub struct BlamingWithExtras {
    table: RegionTable,
}

/// Never-declining variant: like `region_block_blaming` but every label
/// also holds an extra region; blamed normals are swapped for extras so
/// that every request is allocated in at most three steps.
pub fn blaming_with_extras(
    cfg: &GameConfig,
    design: DesignList,
    size_factor: u64,
) -> Result<BlamingWithExtras, String> {
    check_sizes(cfg, design.ell, size_factor)?;
    let space = BlockSpace::new(CantorAddress::root(), design.ell)?;
    Ok(BlamingWithExtras { table: RegionTable::new(space, design) })
}

/// Same allocator on a sub-interval; the composed strategy runs one copy
/// per half.
pub fn blaming_with_extras_within(
    base: CantorAddress,
    design: DesignList,
) -> Result<BlamingWithExtras, String> {
    let space = BlockSpace::new(base, design.ell)?;
    Ok(BlamingWithExtras { table: RegionTable::new(space, design) })
}

impl BlamingWithExtras {
    pub fn ledger(&self) -> &[BlameEvent] {
        &self.table.blame_ledger
    }

    fn grant(
        &mut self,
        key: crate::game::Key,
        vertices: [Vertex; 2],
        addr: CantorAddress,
        used: &[usize],
        events: Vec<StrategyEvent>,
    ) -> BobMove {
        self.table.note_allocation(&vertices, &addr);
        for &idx in used {
            if self.table.region(idx).kind == RegionKind::Extra {
                let m = self.table.extra_allocated.entry(idx).or_insert_with(Dyadic::zero);
                *m += &addr.size();
            }
        }
        let mut mv = BobMove::grant(vec![(key, addr)]);
        mv.events = events;
        mv
    }
}

impl BobStrategy for BlamingWithExtras {
    fn name(&self) -> &'static str {
        "blaming-with-extras"
    }

    fn respond(&mut self, cfg: &GameConfig, state: &AllocationState, req: &Request) -> BobMove {
        let key = req.key(cfg.mode);
        let [u, v] = key.vertices() else {
            return BobMove::dead_end(false, "pair strategy got a non-pair request");
        };
        let (u, v) = (*u, *v);
        let size = &req.size;
        let sel = |t: &mut RegionTable, s: &AllocationState| -> Result<[usize; 4], String> {
            Ok([
                t.select_normal(s, u, size)?,
                t.select_normal(s, v, size)?,
                t.select_extra(s, u, size)?,
                t.select_extra(s, v, size)?,
            ])
        };
        let [nu, nv, eu, ev] = match sel(&mut self.table, state) {
            Ok(r) => r,
            Err(e) => return BobMove::dead_end(false, e),
        };

        // step 1: both normal regions
        let (cu, cv, common) = match self.table.try_allocate(state, size, nu, nv) {
            Ok(addr) => return self.grant(key, [u, v], addr, &[nu, nv], Vec::new()),
            Err(AllocFailure::Full { a_full, b_full, common }) => (a_full, b_full, common),
            Err(AllocFailure::Accounting { block }) => {
                return BobMove::dead_end(false, format!("open block {block} had no free slot"))
            }
        };
        if common == 0 {
            return BobMove::dead_end(false, "endpoint regions share no block");
        }
        let (first, first_extra, other_normal, other_extra, other) = if cu >= cv {
            (u, eu, nv, ev, v)
        } else {
            (v, ev, nu, eu, u)
        };
        let blamed_region = if cu >= cv { nu } else { nv };
        self.table.blame(blamed_region);
        let mut events = vec![StrategyEvent::Blame { vertex: first }];

        // step 2: blamed endpoint swaps to its extra
        let (ce, cn, common2) = match self.table.try_allocate(state, size, first_extra, other_normal)
        {
            Ok(addr) => return self.grant(key, [u, v], addr, &[first_extra, other_normal], events),
            Err(AllocFailure::Full { a_full, b_full, common }) => (a_full, b_full, common),
            Err(AllocFailure::Accounting { block }) => {
                return BobMove::dead_end(false, format!("open block {block} had no free slot"))
            }
        };
        if 2 * cn < common2 && 2 * ce >= common2 {
            return BobMove::dead_end(false, "an extra region attracted blame");
        }
        self.table.blame(other_normal);
        events.push(StrategyEvent::Blame { vertex: other });

        // step 3: both extras
        match self.table.try_allocate(state, size, first_extra, other_extra) {
            Ok(addr) => self.grant(key, [u, v], addr, &[first_extra, other_extra], events),
            Err(_) => BobMove::dead_end(false, "third allocation step failed"),
        }
    }

    fn finish(&self, metrics: &mut Metrics) {
        self.table.write_metrics("", metrics);
    }
}

pub struct ComposedFull {
    boundary: Dyadic,
    small: BlamingWithExtras,
    large: BlamingWithExtras,
}

/// Two block-and-blame copies over the two halves of the space: one for
/// sizes below roughly n^-4, one for the larger sizes up to delta.
pub fn composed_full(
    cfg: &GameConfig,
    design_small: DesignList,
    design_large: DesignList,
) -> Result<ComposedFull, String> {
    let n = cfg.n.ok_or("the composed strategy needs a finite universe")?;
    // size band boundary: the power of two just below n^-4
    let log_n = 64 - u64::leading_zeros(n.max(2) as u64 - 1); // ceil(log2 n)
    let boundary = Dyadic::pow2_neg(4 * log_n);
    let zero = CantorAddress::from_bools(vec![false]);
    let one = CantorAddress::from_bools(vec![true]);
    let min_size = Dyadic::pow2_neg(n + 2);
    for s in &cfg.allowed_sizes {
        if *s < min_size {
            return Err(format!("size {s} below the 2^-(n+2) floor"));
        }
    }
    let small = blaming_with_extras_within(zero, design_small)?;
    let large = blaming_with_extras_within(one, design_large)?;
    Ok(ComposedFull { boundary, small, large })
}

impl ComposedFull {
    pub fn boundary(&self) -> &Dyadic {
        &self.boundary
    }
}

impl BobStrategy for ComposedFull {
    fn name(&self) -> &'static str {
        "composed-full"
    }

    fn respond(&mut self, cfg: &GameConfig, state: &AllocationState, req: &Request) -> BobMove {
        if req.size < self.boundary {
            self.small.respond(cfg, state, req)
        } else {
            self.large.respond(cfg, state, req)
        }
    }

    fn finish(&self, metrics: &mut Metrics) {
        self.small.table.write_metrics("small-", metrics);
        self.large.table.write_metrics("large-", metrics);
    }
}
