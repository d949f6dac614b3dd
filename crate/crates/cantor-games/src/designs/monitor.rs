//! Runtime monitor for the blame ledgers produced by the block strategies.
//!
//! Each blame event names a region. The regularity of the index lists
//! bounds how many times any single region can be blamed; exceeding the
//! bound on a realized ledger falsifies that regularity.

use std::collections::BTreeMap;

use crate::game::Vertex;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BlameEvent {
    /// Vertex whose region absorbed the blame.
    pub owner: Vertex,
    /// Which of the owner's regions, in allocation order.
    pub region: u64,
    /// Index of the design set that carved the blamed region's blocks.
    pub design_index: u64,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MonitorReport {
    pub bound: u64,
    pub max_blames: u64,
    pub regions_blamed: u64,
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
#[error("region {region} of vertex {owner} was blamed {count} times, above the bound {bound}")]
pub struct MonitorFalsification {
    pub owner: Vertex,
    pub region: u64,
    pub count: u64,
    pub bound: u64,
}

/// Checks that no region is blamed more than b·r times (pair game) or
/// b·s·r^(s-1) times (set game with s > 2).
pub fn runtime_item2_monitor(
    events: &[BlameEvent],
    r: u64,
    s: u64,
    b: u64,
) -> Result<MonitorReport, MonitorFalsification> {
    let bound = if s <= 2 { b * r } else { b * s * r.pow(s as u32 - 1) };
    let mut per_region: BTreeMap<(Vertex, u64), u64> = BTreeMap::new();
    for ev in events {
        *per_region.entry((ev.owner, ev.region)).or_insert(0) += 1;
    }
    let mut max_blames = 0;
    for (&(owner, region), &count) in &per_region {
        max_blames = max_blames.max(count);
        if count > bound {
            return Err(MonitorFalsification { owner, region, count, bound });
        }
    }
    Ok(MonitorReport { bound, max_blames, regions_blamed: per_region.len() as u64 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spread_blames_pass() {
        let events: Vec<BlameEvent> = (0..10)
            .map(|i| BlameEvent { owner: i % 3, region: i, design_index: i })
            .collect();
        let report = runtime_item2_monitor(&events, 4, 2, 8).unwrap();
        assert_eq!(report.max_blames, 1);
        assert_eq!(report.bound, 32);
    }

    #[test]
    fn piling_on_one_region_falsifies() {
        // r^2 + 1 = 17 blames on one region, against bound b·r = 8
        let events: Vec<BlameEvent> = (0..17)
            .map(|_| BlameEvent { owner: 0, region: 0, design_index: 3 })
            .collect();
        let err = runtime_item2_monitor(&events, 4, 2, 2).unwrap_err();
        assert_eq!(err.count, 17);
        assert_eq!(err.bound, 8);
    }
}
