//! Allocation table, per-vertex occupancy and budgets.

use super::config::{GameConfig, Key, Mode, Request, Vertex, Violation};
use crate::dyadic::Dyadic;
use crate::interval::{CantorAddress, IntervalSet};
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub struct AllocationState {
    mode: Mode,
    table: BTreeMap<Key, IntervalSet>,
    /// Granted interval sizes per key, with a consumed flag; a granted
    /// interval satisfies at most one request in the prefix-free games.
    grants: BTreeMap<Key, Vec<(Dyadic, bool)>>,
    occupancy: BTreeMap<(u8, Vertex), IntervalSet>,
    budgets: BTreeMap<(u8, Vertex), Dyadic>,
    /// Accumulated request weight per key (the prefix-stable games compare
    /// nu of the table entry against c times this).
    weights: BTreeMap<Key, Dyadic>,
}

impl AllocationState {
    pub fn new(mode: Mode) -> Self {
        AllocationState {
            mode,
            table: BTreeMap::new(),
            grants: BTreeMap::new(),
            occupancy: BTreeMap::new(),
            budgets: BTreeMap::new(),
            weights: BTreeMap::new(),
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn table(&self, key: &Key) -> IntervalSet {
        self.table.get(key).cloned().unwrap_or_default()
    }

    pub fn keys(&self) -> impl Iterator<Item = &Key> {
        self.table.keys()
    }

    pub fn occupancy(&self, side: u8, v: Vertex) -> IntervalSet {
        self.occupancy.get(&(side, v)).cloned().unwrap_or_default()
    }

    pub fn occupancy_ref(&self, side: u8, v: Vertex) -> &IntervalSet {
        static EMPTY_SET: std::sync::OnceLock<IntervalSet> = std::sync::OnceLock::new();
        self.occupancy
            .get(&(side, v))
            .unwrap_or_else(|| EMPTY_SET.get_or_init(IntervalSet::empty))
    }

    pub fn budget(&self, side: u8, v: Vertex) -> Dyadic {
        self.budgets.get(&(side, v)).cloned().unwrap_or_else(Dyadic::zero)
    }

    pub fn weight(&self, key: &Key) -> Dyadic {
        self.weights.get(key).cloned().unwrap_or_else(Dyadic::zero)
    }

    /// Checks a request against the rules without changing any state.
    pub fn validate_request(&self, cfg: &GameConfig, r: &Request) -> Result<(), Violation> {
        if r.vertices.len() != cfg.s {
            return Err(Violation::Arity { expected: cfg.s });
        }
        let key = r.key(cfg.mode);
        let slots = key.slots(cfg.mode);
        // in the bipartite game the two namespaces are independent, so only
        // same-side duplicates are ill-formed
        for (i, a) in slots.iter().enumerate() {
            for b in &slots[i + 1..] {
                if a == b {
                    return Err(Violation::Arity { expected: cfg.s });
                }
            }
        }
        if let Some(n) = cfg.n {
            if n < 64 {
                for &v in &r.vertices {
                    if v >= 1u64 << n {
                        return Err(Violation::VertexOutOfRange { vertex: v });
                    }
                }
            }
        }
        if r.size > cfg.delta {
            return Err(Violation::SizeAboveDelta { size: r.size.clone() });
        }
        if !cfg.allowed_sizes.contains(&r.size) {
            return Err(Violation::SizeNotAllowed { size: r.size.clone() });
        }
        for (side, v) in slots {
            if &self.budget(side, v) + &r.size > cfg.d {
                return Err(Violation::Budget { vertex: v });
            }
        }
        Ok(())
    }

    /// Charges a validated request to the budgets and weights.
    pub fn charge_request(&mut self, cfg: &GameConfig, r: &Request) {
        let key = r.key(cfg.mode);
        for (side, v) in key.slots(cfg.mode) {
            let entry = self.budgets.entry((side, v)).or_insert_with(Dyadic::zero);
            *entry += &r.size;
        }
        let w = self.weights.entry(key).or_insert_with(Dyadic::zero);
        *w += &r.size;
    }

    /// Applies one of Bob's interval grants. The interval must be disjoint
    /// from everything already allocated at each vertex of the key.
    pub fn apply_reply(&mut self, key: &Key, a: &CantorAddress) -> Result<(), Violation> {
        let slots = key.slots(self.mode);
        for &(side, v) in &slots {
            if self.occupancy_ref(side, v).intersects(a) {
                return Err(Violation::Overlap { vertex: v });
            }
        }
        let entry = self.table.entry(key.clone()).or_default();
        *entry = entry.insert_disjoint(a).expect("occupancy covers the table entry");
        for (side, v) in slots {
            let occ = self.occupancy.entry((side, v)).or_default();
            *occ = occ.insert_disjoint(a).expect("checked above");
        }
        self.grants
            .entry(key.clone())
            .or_default()
            .push((a.size(), false));
        Ok(())
    }

    /// Consumes one granted, not yet consumed interval of size >= `size`
    /// on `key`; the smallest adequate one is taken.
    pub fn consume_grant(&mut self, key: &Key, size: &Dyadic) -> bool {
        let Some(grants) = self.grants.get_mut(key) else {
            return false;
        };
        let mut best: Option<usize> = None;
        for (i, (sz, used)) in grants.iter().enumerate() {
            if !*used && sz >= size {
                let better = match best {
                    None => true,
                    Some(j) => *sz < grants[j].0,
                };
                if better {
                    best = Some(i);
                }
            }
        }
        match best {
            Some(i) => {
                grants[i].1 = true;
                true
            }
            None => false,
        }
    }

    /// The ball-count invariant: for every vertex u and every j, the number
    /// of keys containing u whose table entry contains an interval of size
    /// 2^(-j) is at most c * 2^j.
    pub fn ball_count_check(&self, c: &Dyadic) -> Result<(), BallCountCounterexample> {
        let mut per_slot: BTreeMap<(u8, Vertex), Vec<u32>> = BTreeMap::new();
        for (key, set) in &self.table {
            let nu = set.nu();
            let Some(log) = nu.log2() else { continue };
            let depth = (-log) as u32;
            for slot in key.slots(self.mode) {
                per_slot.entry(slot).or_default().push(depth);
            }
        }
        for ((side, vertex), depths) in per_slot {
            let max_j = depths.iter().copied().max().unwrap_or(0);
            for j in 0..=max_j {
                let count = depths.iter().filter(|&&d| d <= j).count() as u64;
                if Dyadic::from_int(count) > c.shl(j) {
                    return Err(BallCountCounterexample { side, vertex, j, count });
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
#[error("ball count at vertex {vertex} (side {side}): {count} keys with nu >= 2^-{j}")]
pub struct BallCountCounterexample {
    pub side: u8,
    pub vertex: Vertex,
    pub j: u32,
    pub count: u64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::CantorAddress;

    fn addr(s: &str) -> CantorAddress {
        s.parse().unwrap()
    }

    fn dy(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    fn pair_cfg(d: &str, delta: &str) -> GameConfig {
        GameConfig::pair(
            Mode::PairPrefixFree,
            dy(d),
            dy(delta),
            vec![dy("1/2^1"), dy("1/2^2"), dy("1/2^3")],
        )
    }

    #[test]
    fn validate_request_examples() {
        let cfg = pair_cfg("1/2^1", "1/2^1");
        let state = AllocationState::new(cfg.mode);
        let ok = Request { vertices: vec![0, 1], size: dy("1/2^2") };
        assert_eq!(state.validate_request(&cfg, &ok), Ok(()));

        let mut spent = AllocationState::new(cfg.mode);
        spent.charge_request(&cfg, &Request { vertices: vec![0, 1], size: dy("1/2^1") });
        let over = Request { vertices: vec![0, 2], size: dy("1/2^2") };
        assert_eq!(
            spent.validate_request(&cfg, &over),
            Err(Violation::Budget { vertex: 0 })
        );

        let tight = pair_cfg("1/2^1", "1/2^3");
        assert_eq!(
            AllocationState::new(tight.mode).validate_request(&tight, &ok),
            Err(Violation::SizeAboveDelta { size: dy("1/2^2") })
        );
    }

    #[test]
    fn apply_reply_examples() {
        let mode = Mode::PairPrefixFree;
        let mut state = AllocationState::new(mode);
        let ab = Key::new(mode, vec![0, 1]);
        let ac = Key::new(mode, vec![0, 2]);
        state.apply_reply(&ab, &addr("01")).unwrap();
        assert_eq!(state.table(&ab).addresses(), vec![addr("01")]);
        assert_eq!(
            state.apply_reply(&ac, &addr("0")),
            Err(Violation::Overlap { vertex: 0 })
        );
        state.apply_reply(&ac, &addr("1")).unwrap();
    }

    #[test]
    fn bipartite_sides_are_independent() {
        let mode = Mode::PairBipartite;
        let mut state = AllocationState::new(mode);
        // vertex id 7 on the left and on the right are distinct slots
        let xy = Key::new(mode, vec![7, 9]);
        let yx = Key::new(mode, vec![9, 7]);
        state.apply_reply(&xy, &addr("0")).unwrap();
        state.apply_reply(&yx, &addr("0")).unwrap();
        // but the same left vertex may not be double-booked
        let xz = Key::new(mode, vec![7, 10]);
        assert_eq!(
            state.apply_reply(&xz, &addr("00")),
            Err(Violation::Overlap { vertex: 7 })
        );
    }

    #[test]
    fn ball_count_examples() {
        let mode = Mode::PairPrefixFree;
        let mut state = AllocationState::new(mode);
        for (i, a) in ["00", "01", "10"].iter().enumerate() {
            let key = Key::new(mode, vec![0, i as u64 + 1]);
            state.apply_reply(&key, &addr(a)).unwrap();
        }
        assert!(state.ball_count_check(&Dyadic::one()).is_ok());
    }

    #[test]
    fn ball_count_counterexample_on_invalid_state() {
        // five size-1/4 entries at one vertex cannot arise through
        // apply_reply; build the table bypassing occupancy checks
        let mode = Mode::PairPrefixFree;
        let mut state = AllocationState::new(mode);
        for i in 0..5u64 {
            let key = Key::new(mode, vec![0, i + 1]);
            state
                .table
                .insert(key, IntervalSet::from_address(&addr("00")));
        }
        let err = state.ball_count_check(&Dyadic::one()).unwrap_err();
        assert_eq!((err.vertex, err.j, err.count), (0, 2, 5));
    }

    #[test]
    fn grants_are_consumed_smallest_first() {
        let mode = Mode::PairPrefixFree;
        let mut state = AllocationState::new(mode);
        let ab = Key::new(mode, vec![0, 1]);
        state.apply_reply(&ab, &addr("0")).unwrap();
        state.apply_reply(&ab, &addr("10")).unwrap();
        assert!(state.consume_grant(&ab, &dy("1/2^2")));
        // the 1/4-demand took the 1/2... no: smallest adequate is 1/4
        assert!(state.consume_grant(&ab, &dy("1/2^1")));
        assert!(!state.consume_grant(&ab, &dy("1/2^1")));
    }
}
