//! The group cascade for the set game: s substrategies over s equal
//! parts of the space. Substrategy t serves requests whose set is
//! currently split into t groups; failures and heavy coappearance merge
//! two groups and push the set down one level, until level 1 hands out
//! private blocks.

use crate::bob::blocks::{BlockSpace, RegionKind};
use crate::bob::set_blocks::{Group, SetAllocFailure, SetRegionTable};
use crate::designs::DesignList;
use crate::dyadic::Dyadic;
use crate::game::state::AllocationState;
use crate::game::{BobMove, BobStrategy, GameConfig, Metrics, Request, StrategyEvent, Vertex};
use crate::interval::{find_free_interval, CantorAddress, IntervalSet};
use std::collections::BTreeMap;

enum Level {
    /// Level 1: one private block per request.
    Private { space: BlockSpace, cursor: u64 },
    /// Levels 2..=s: block regions owned by groups.
    Blocks {
        table: SetRegionTable,
        coappearance: BTreeMap<(Group, Group), Dyadic>,
    },
}

pub struct SetGroups {
    levels: Vec<Level>,
    partitions: BTreeMap<Vec<Vertex>, Vec<Group>>,
    /// Groups merge once their coappearance measure times this reaches 1.
    merge_scale: u64,
    merges: u64,
}

/// Builds the cascade; `designs[t-1]` parameterizes substrategy t (the
/// level-1 entry only sets the private block count).
pub fn set_groups(
    cfg: &GameConfig,
    designs: Vec<DesignList>,
    merge_scale: u64,
) -> Result<SetGroups, String> {
    let s = cfg.s;
    if designs.len() != s {
        return Err(format!("need one design per level, got {} for s = {s}", designs.len()));
    }
    let part_depth = 32 - u32::leading_zeros(s.max(2) as u32 - 1); // ceil(log2 s)
    let max = cfg.allowed_sizes.iter().max().unwrap();
    let mut levels = Vec::with_capacity(s);
    for (i, design) in designs.into_iter().enumerate() {
        let base = CantorAddress::nth_cell(part_depth, i as u64);
        let space = BlockSpace::new(base, design.ell)?;
        let block = space.block(0).size();
        if max > &block {
            return Err(format!("sizes must fit a level-{} block of {block}", i + 1));
        }
        levels.push(if i == 0 {
            Level::Private { space, cursor: 0 }
        } else {
            Level::Blocks {
                table: SetRegionTable::new(space, s as u64, design),
                coappearance: BTreeMap::new(),
            }
        });
    }
    Ok(SetGroups { levels, partitions: BTreeMap::new(), merge_scale, merges: 0 })
}

fn merged(partition: &[Group], a: usize, b: usize) -> Vec<Group> {
    let mut out: Vec<Group> = Vec::new();
    let mut joint = partition[a].clone();
    joint.extend(partition[b].iter().copied());
    joint.sort_unstable();
    for (i, g) in partition.iter().enumerate() {
        if i != a && i != b {
            out.push(g.clone());
        }
    }
    out.push(joint);
    out.sort();
    out
}

impl SetGroups {
    pub fn partition(&self, set: &[Vertex]) -> Option<&Vec<Group>> {
        self.partitions.get(set)
    }

    fn level1(
        &mut self,
        state: &AllocationState,
        req: &Request,
        key: crate::game::Key,
        events: Vec<StrategyEvent>,
    ) -> BobMove {
        let Level::Private { space, cursor } = &mut self.levels[0] else { unreachable!() };
        if *cursor == space.block_count() {
            return BobMove::dead_end(false, "level-1 private blocks exhausted");
        }
        let block = IntervalSet::from_address(&space.block(*cursor));
        *cursor += 1;
        let obstacles: Vec<&IntervalSet> = req
            .vertices
            .iter()
            .map(|&v| state.occupancy_ref(0, v))
            .collect();
        match find_free_interval(&obstacles, &req.size, &block) {
            Some(addr) => {
                let mut mv = BobMove::grant(vec![(key, addr)]);
                mv.events = events;
                mv
            }
            None => BobMove::dead_end(false, "a private block was not actually free"),
        }
    }
}

impl BobStrategy for SetGroups {
    fn name(&self) -> &'static str {
        "set-groups"
    }

    fn respond(&mut self, cfg: &GameConfig, state: &AllocationState, req: &Request) -> BobMove {
        let key = req.key(cfg.mode);
        let set = key.vertices().to_vec();
        let mut partition = self
            .partitions
            .get(&set)
            .cloned()
            .unwrap_or_else(|| set.iter().map(|&v| vec![v]).collect());
        let mut events: Vec<StrategyEvent> = Vec::new();

        loop {
            let t = partition.len();
            if t == 1 {
                return self.level1(state, req, key, events);
            }
            let merge_scale = self.merge_scale;
            let Level::Blocks { table, coappearance } = &mut self.levels[t - 1] else {
                unreachable!()
            };

            // coappearance accounting; a heavy pair of groups merges
            let mut merge: Option<(usize, usize)> = None;
            'outer: for i in 0..t {
                for j in i + 1..t {
                    let pair = (partition[i].clone(), partition[j].clone());
                    let m = coappearance.entry(pair).or_insert_with(Dyadic::zero);
                    *m += &req.size;
                    if m.scale_int(merge_scale) >= Dyadic::one() {
                        merge = Some((i, j));
                        break 'outer;
                    }
                }
            }
            if let Some((i, j)) = merge {
                events.push(StrategyEvent::Friends {
                    a: partition[i][0],
                    b: partition[j][0],
                });
                partition = merged(&partition, i, j);
                self.partitions.insert(set.clone(), partition.clone());
                self.merges += 1;
                continue;
            }

            // allocation with extra swaps; a final failure merges the
            // blamed group into the next-fullest one and descends
            let mut regions = Vec::with_capacity(t);
            let mut ok = true;
            for g in &partition {
                match table.select_normal(state, g, &req.size, t as u64) {
                    Ok(idx) => regions.push(idx),
                    Err(e) => return BobMove::dead_end(false, e),
                }
            }
            let mut descend: Option<(usize, usize)> = None;
            while ok {
                match table.try_allocate(state, &req.size, &regions) {
                    Ok(addr) => {
                        table.note_allocation(&set, &addr);
                        let mut mv = BobMove::grant(vec![(key, addr)]);
                        mv.events = events;
                        return mv;
                    }
                    Err(SetAllocFailure::Accounting { block }) => {
                        return BobMove::dead_end(
                            false,
                            format!("open block {block} had no free slot"),
                        )
                    }
                    Err(SetAllocFailure::Full { counts, common }) => {
                        if common == 0 {
                            return BobMove::dead_end(false, "group regions share no block");
                        }
                        let mut order: Vec<usize> = (0..t).collect();
                        order.sort_by_key(|&i| std::cmp::Reverse(counts[i]));
                        let worst = order[0];
                        events.push(StrategyEvent::Blame { vertex: partition[worst][0] });
                        if table.region(regions[worst]).kind == RegionKind::Normal {
                            table.blame(regions[worst]);
                            match table.select_extra(state, &partition[worst], &req.size) {
                                Ok(idx) => regions[worst] = idx,
                                Err(e) => return BobMove::dead_end(false, e),
                            }
                        } else {
                            descend = Some((worst, order[1]));
                            ok = false;
                        }
                    }
                }
            }
            let (a, b) = descend.expect("loop exits only with a merge decision");
            partition = merged(&partition, a, b);
            self.partitions.insert(set.clone(), partition.clone());
            self.merges += 1;
        }
    }

    fn finish(&self, metrics: &mut Metrics) {
        metrics.extras.insert("merges".into(), self.merges.to_string());
        for (i, level) in self.levels.iter().enumerate() {
            match level {
                Level::Private { cursor, .. } => {
                    metrics
                        .extras
                        .insert("level1-private-blocks".into(), cursor.to_string());
                }
                Level::Blocks { table, .. } => {
                    table.write_metrics(&format!("level{}-", i + 1), metrics);
                }
            }
        }
    }
}
