//! Property tests for the interval-set algebra, checked against
//! independent brute-force oracles that work on plain address lists.

use cantor_games::{find_free_interval, max_free_interval_size, CantorAddress, Dyadic, IntervalSet};
use proptest::prelude::*;

fn addr_strategy(max_depth: usize) -> impl Strategy<Value = CantorAddress> {
    prop::collection::vec(any::<bool>(), 0..=max_depth).prop_map(CantorAddress::from_bools)
}

/// A valid interval set together with the raw addresses that built it.
fn set_strategy(max_depth: usize) -> impl Strategy<Value = (IntervalSet, Vec<CantorAddress>)> {
    prop::collection::vec(addr_strategy(max_depth), 0..12).prop_map(|addrs| {
        let mut s = IntervalSet::empty();
        let mut kept = Vec::new();
        for a in addrs {
            if let Ok(next) = s.insert_disjoint(&a) {
                s = next;
                kept.push(a);
            }
        }
        (s, kept)
    })
}

fn intervals_meet(a: &CantorAddress, b: &CantorAddress) -> bool {
    a.is_prefix_of(b) || b.is_prefix_of(a)
}

/// Brute-force oracle: largest interval disjoint from all of `occupied`,
/// found by enumerating every address up to one past the deepest occupier.
fn oracle_max_free(occupied: &[CantorAddress]) -> Dyadic {
    let depth = occupied.iter().map(|a| a.len()).max().unwrap_or(0) + 1;
    for d in 0..=depth {
        for i in 0..(1u64 << d) {
            let cell = CantorAddress::nth_cell(d as u32, i);
            if occupied.iter().all(|o| !intervals_meet(o, &cell)) {
                return Dyadic::pow2_neg(d as u32);
            }
        }
    }
    Dyadic::zero()
}

/// Is `cell` entirely covered by the union of the (disjoint) `within` cells?
/// Checked by enumerating every extension of `cell` down to the deepest cover.
fn oracle_covered(within: &[CantorAddress], cell: &CantorAddress) -> bool {
    let deepest = within.iter().map(|a| a.len()).max().unwrap_or(0);
    if deepest <= cell.len() {
        return within.iter().any(|w| w.is_prefix_of(cell));
    }
    let extra = deepest - cell.len();
    (0..(1u64 << extra)).all(|i| {
        let mut bits = cell.bits().to_vec();
        bits.extend((0..extra).rev().map(|b| (i >> b) & 1 == 1));
        let ext = CantorAddress::from_bools(bits);
        within.iter().any(|w| w.is_prefix_of(&ext))
    })
}

/// Brute-force oracle for the leftmost free slot of a given depth.
fn oracle_find_free(
    obstacles: &[Vec<CantorAddress>],
    depth: u32,
    within: &[CantorAddress],
) -> Option<CantorAddress> {
    for i in 0..(1u64 << depth) {
        let cell = CantorAddress::nth_cell(depth, i);
        let inside = oracle_covered(within, &cell);
        let blocked = obstacles
            .iter()
            .any(|obs| obs.iter().any(|o| intervals_meet(o, &cell)));
        if inside && !blocked {
            return Some(cell);
        }
    }
    None
}

// Regression: `within` built from two depth-4 siblings covers their parent
// cell, so a depth-3 slot must be found even though no single building
// address is that shallow.
#[test]
fn find_free_sees_cells_covered_by_a_union() {
    let addr = |s: &str| s.parse::<CantorAddress>().unwrap();
    let set = |addrs: &[&str]| {
        addrs.iter().fold(IntervalSet::empty(), |s, a| {
            s.insert_disjoint(&addr(a)).unwrap()
        })
    };
    let obstacle = set(&["00"]);
    let within = set(&["0101", "0100"]);
    let got = find_free_interval(&[&IntervalSet::empty(), &obstacle], &Dyadic::pow2_neg(3), &within);
    assert_eq!(got, Some(addr("010")));
    let want = oracle_find_free(
        &[vec![], vec![addr("00")]],
        3,
        &[addr("0101"), addr("0100")],
    );
    assert_eq!(got, want);
}

proptest! {
    #[test]
    fn measure_inclusion_exclusion((a, _) in set_strategy(6), (b, _) in set_strategy(6)) {
        let lhs = &a.union(&b).measure() + &a.intersection(&b).measure();
        let rhs = &a.measure() + &b.measure();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn insert_disjoint_measure_delta((s, _) in set_strategy(6), a in addr_strategy(6)) {
        if let Ok(next) = s.insert_disjoint(&a) {
            let expected = &s.measure() + &a.size();
            prop_assert_eq!(next.measure(), expected);
        } else {
            prop_assert!(s.intersects(&a));
        }
    }

    #[test]
    fn max_free_matches_enumeration_oracle((s, raw) in set_strategy(6)) {
        prop_assert_eq!(max_free_interval_size(&s), oracle_max_free(&raw));
    }

    #[test]
    fn find_free_matches_scan_oracle(
        (o1, raw1) in set_strategy(5),
        (o2, raw2) in set_strategy(5),
        (w, raww) in set_strategy(5),
        depth in 0u32..=6,
    ) {
        let size = Dyadic::pow2_neg(depth);
        let got = find_free_interval(&[&o1, &o2], &size, &w);
        let want = oracle_find_free(&[raw1, raw2], depth, &raww);
        prop_assert_eq!(got, want);
    }

    #[test]
    fn eps_neighborhood_contains_and_idempotent((s, _) in set_strategy(6), k in 0u32..=6) {
        let eps = Dyadic::pow2_neg(k);
        let hood = s.eps_neighborhood(&eps);
        prop_assert!(s.is_subset(&hood));
        prop_assert_eq!(hood.eps_neighborhood(&eps), hood.clone());
        // a union of size-eps cells: coarsening at eps changes nothing,
        // and every canonical address is at most k deep
        prop_assert!(hood.addresses().iter().all(|a| a.len() <= k as usize));
    }

    #[test]
    fn eps_neighborhood_monotone((a, _) in set_strategy(6), (b, _) in set_strategy(6), k in 1u32..=6) {
        let fine = Dyadic::pow2_neg(k);
        let coarse = Dyadic::pow2_neg(k - 1);
        let joined = a.union(&b);
        prop_assert!(a.eps_neighborhood(&fine).is_subset(&joined.eps_neighborhood(&fine)));
        prop_assert!(a.eps_neighborhood(&fine).is_subset(&a.eps_neighborhood(&coarse)));
    }

    #[test]
    fn set_algebra_consistency((a, _) in set_strategy(6), (b, _) in set_strategy(6)) {
        prop_assert_eq!(a.difference(&b), a.intersection(&b.complement()));
        prop_assert_eq!(a.union(&b).complement(), a.complement().intersection(&b.complement()));
        prop_assert!(a.intersection(&b).is_subset(&a));
    }

    #[test]
    fn carve_takes_exact_measure((s, _) in set_strategy(6), num in 0u64..64, exp in 0u32..=6) {
        let amount = Dyadic::from_ratio(num, exp);
        match s.carve(&amount) {
            Some(taken) => {
                prop_assert_eq!(taken.measure(), amount);
                prop_assert!(taken.is_subset(&s));
            }
            None => prop_assert!(s.measure() < amount),
        }
    }
}
