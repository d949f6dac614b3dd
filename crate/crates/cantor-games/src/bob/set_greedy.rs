//! Greedy allocator for the set game: a slot disjoint from everything
//! allocated to any member of the requested set.

use crate::dyadic::Dyadic;
use crate::game::state::AllocationState;
use crate::game::{BobMove, BobStrategy, GameConfig, Request, Vertex};
use crate::interval::{find_free_interval, IntervalSet};
use std::collections::BTreeMap;

pub struct SetGreedyHypergraph {
    degree_cap: u64,
    degrees: BTreeMap<Vertex, u64>,
}

/// Greedy set coloring. With each vertex in fewer than 2^n requests and
/// slots of size at most 1/(s·2^n), a free slot always exists.
pub fn set_greedy_hypergraph(cfg: &GameConfig) -> Result<SetGreedyHypergraph, String> {
    let n = cfg.n.ok_or("the set greedy strategy needs a finite universe")?;
    let cap = 1u64
        .checked_shl(n)
        .ok_or("universe too large for the degree promise")?;
    let s = cfg.s as u64;
    for size in &cfg.allowed_sizes {
        // size <= 1/(s·2^n)
        if size.scale_int(s * cap) > Dyadic::one() {
            return Err(format!("slot size {size} above 1/(s*2^n)"));
        }
    }
    Ok(SetGreedyHypergraph { degree_cap: cap, degrees: BTreeMap::new() })
}

impl BobStrategy for SetGreedyHypergraph {
    fn name(&self) -> &'static str {
        "set-greedy-hypergraph"
    }

    fn respond(&mut self, cfg: &GameConfig, state: &AllocationState, req: &Request) -> BobMove {
        for &v in &req.vertices {
            let deg = self.degrees.entry(v).or_insert(0);
            *deg += 1;
            if *deg >= self.degree_cap {
                return BobMove::dead_end(
                    true,
                    format!("vertex {v} appears in {} requests, promise allows < {}", deg, self.degree_cap),
                );
            }
        }
        let key = req.key(cfg.mode);
        let obstacles: Vec<&IntervalSet> = key
            .slots(cfg.mode)
            .iter()
            .map(|&(side, v)| state.occupancy_ref(side, v))
            .collect();
        match find_free_interval(&obstacles, &req.size, &IntervalSet::full()) {
            Some(addr) => BobMove::grant(vec![(key, addr)]),
            None => BobMove::dead_end(false, "no free slot under the degree promise"),
        }
    }
}
