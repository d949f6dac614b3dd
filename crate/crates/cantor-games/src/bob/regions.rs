//! Region allocators: a static pre-partition from per-size quotas, and
//! on-demand assignment of 2m equal regions.

use crate::bob::greedy::GreedyPairs;
use crate::dyadic::Dyadic;
use crate::game::{BobMove, BobStrategy, GameConfig, Metrics, Request};
use crate::game::state::AllocationState;
use crate::interval::{CantorAddress, IntervalSet};
use std::collections::BTreeMap;

pub struct StaticRegions {
    regions: BTreeMap<Dyadic, (IntervalSet, u64)>,
    greedy: GreedyPairs,
}

/// Pre-partitions the space into one region of size 2·eps·N per quota
/// entry (eps, N), N rounded up to a power of two, and plays greedy
/// inside each region. Requires sum(eps·N) <= d <= 1/4 after rounding.
pub fn static_regions(
    cfg: &GameConfig,
    quotas: &[(Dyadic, u64)],
) -> Result<StaticRegions, String> {
    let mut rounded: Vec<(Dyadic, u64)> = quotas
        .iter()
        .map(|(eps, n)| (eps.clone(), n.next_power_of_two()))
        .collect();
    let mut sum = Dyadic::zero();
    for (eps, n) in &rounded {
        sum += &eps.scale_int(*n);
    }
    if sum > cfg.d {
        return Err(format!("rounded quota mass {sum} exceeds d = {}", cfg.d));
    }
    // regions of size 2·eps·N must pack into the space
    if sum.scale_int(2) > Dyadic::one() {
        return Err(format!("regions of total measure 2*{sum} do not fit"));
    }
    // region sizes 2·eps·N are powers of two; packing them left to right
    // in descending order keeps every region aligned
    rounded.sort_by(|a, b| {
        let ka = a.0.scale_int(2 * a.1);
        let kb = b.0.scale_int(2 * b.1);
        kb.cmp(&ka)
    });
    let finest = rounded
        .iter()
        .map(|(eps, n)| depth_of(&eps.scale_int(2 * n)))
        .max()
        .unwrap_or(0);
    let mut offset_units = 0u64; // in units of 2^-finest
    let mut regions = BTreeMap::new();
    for (eps, n) in rounded {
        let size = eps.scale_int(2 * n);
        let depth = depth_of(&size);
        let units = 1u64 << (finest - depth);
        let addr = CantorAddress::nth_cell(depth, offset_units / units);
        offset_units += units;
        if regions.insert(eps.clone(), (IntervalSet::from_address(&addr), n)).is_some() {
            return Err(format!("duplicate quota entry for size {eps}"));
        }
    }
    Ok(StaticRegions { regions, greedy: crate::bob::greedy::greedy_pairs_within(IntervalSet::empty()) })
}

fn depth_of(size: &Dyadic) -> u32 {
    let log = size.log2().expect("region sizes are powers of two");
    assert!(log <= 0);
    (-log) as u32
}

impl BobStrategy for StaticRegions {
    fn name(&self) -> &'static str {
        "static-regions"
    }

    fn respond(&mut self, cfg: &GameConfig, state: &AllocationState, req: &Request) -> BobMove {
        let Some((region, quota)) = self.regions.get_mut(&req.size) else {
            return BobMove::dead_end(true, format!("no quota covers size {}", req.size));
        };
        if *quota == 0 {
            return BobMove::dead_end(true, format!("quota for size {} exhausted", req.size));
        }
        *quota -= 1;
        let region = region.clone();
        self.greedy.respond_within(cfg, state, req, &region)
    }
}

pub struct DynamicRegions {
    region_depth: u32,
    max_regions: u64,
    assigned: Vec<(Dyadic, IntervalSet)>,
    greedy: GreedyPairs,
}

/// Keeps 2m equal regions (m = number of allowed sizes) and assigns them
/// to request sizes on first need; greedy inside the assigned regions.
pub fn dynamic_regions(cfg: &GameConfig) -> Result<DynamicRegions, String> {
    if cfg.d > Dyadic::pow2_neg(2) {
        return Err("dynamic regions need d <= 1/4".into());
    }
    Ok(dynamic_regions_unchecked(cfg))
}

/// The same allocator fielded outside its d <= 1/4 precondition, for
/// matches against adversaries the contract excludes.
pub fn dynamic_regions_unchecked(cfg: &GameConfig) -> DynamicRegions {
    let m = cfg.allowed_sizes.len() as u64;
    let max_regions = 2 * m;
    let region_depth = 64 - (max_regions - 1).leading_zeros(); // ceil(log2(2m))
    DynamicRegions {
        region_depth,
        max_regions,
        assigned: Vec::new(),
        greedy: crate::bob::greedy::greedy_pairs_within(IntervalSet::empty()),
    }
}

impl BobStrategy for DynamicRegions {
    fn name(&self) -> &'static str {
        "dynamic-regions"
    }

    fn respond(&mut self, cfg: &GameConfig, state: &AllocationState, req: &Request) -> BobMove {
        for (size, region) in &self.assigned {
            if *size != req.size {
                continue;
            }
            let mv = self.greedy.respond_within(cfg, state, req, region);
            if !mv.allocations.is_empty() {
                return mv;
            }
        }
        if self.assigned.len() as u64 == self.max_regions {
            return BobMove::dead_end(
                true,
                format!("a region beyond the {} allowed would be needed", self.max_regions),
            );
        }
        let cell = CantorAddress::nth_cell(self.region_depth, self.assigned.len() as u64);
        let region = IntervalSet::from_address(&cell);
        self.assigned.push((req.size.clone(), region.clone()));
        let mv = self.greedy.respond_within(cfg, state, req, &region);
        if mv.allocations.is_empty() {
            return BobMove::dead_end(true, "request does not fit a fresh region".to_string());
        }
        mv
    }

    fn finish(&self, metrics: &mut Metrics) {
        metrics
            .extras
            .insert("regions-assigned".into(), self.assigned.len().to_string());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{run_match, Mode, Outcome, ScriptedAlice};

    fn dy(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn regions_have_the_stated_sizes() {
        let cfg = GameConfig::pair(
            Mode::PairPrefixFree,
            dy("1/2^1"),
            dy("1/2^3"),
            vec![dy("1/2^3"), dy("1/2^5")],
        );
        let bob = static_regions(&cfg, &[(dy("1/2^3"), 2), (dy("1/2^5"), 4)]).unwrap();
        // 2·(1/8)·2 = 1/2 and 2·(1/32)·4 = 1/4
        assert_eq!(bob.regions[&dy("1/2^3")].0.measure(), dy("1/2^1"));
        assert_eq!(bob.regions[&dy("1/2^5")].0.measure(), dy("1/2^2"));
        let inter = bob.regions[&dy("1/2^3")]
            .0
            .intersection(&bob.regions[&dy("1/2^5")].0);
        assert!(inter.is_empty());
    }

    #[test]
    fn rounding_is_rechecked() {
        let cfg = GameConfig::pair(
            Mode::PairPrefixFree,
            dy("1/2^2"),
            dy("1/2^3"),
            vec![dy("1/2^3")],
        );
        // N=3 rounds to 4: 4/8 = 1/2 > d = 1/4
        assert!(static_regions(&cfg, &[(dy("1/2^3"), 3)]).is_err());
        // N=2 stays: 2/8 = 1/4 <= d
        assert!(static_regions(&cfg, &[(dy("1/2^3"), 2)]).is_ok());
    }

    #[test]
    fn quota_breach_is_a_promise_violation() {
        let cfg = GameConfig::pair(
            Mode::PairPrefixFree,
            dy("1/2^2"),
            dy("1/2^4"),
            vec![dy("1/2^4")],
        );
        let mut bob = static_regions(&cfg, &[(dy("1/2^4"), 2)]).unwrap();
        let script: Vec<Request> = (1..=3)
            .map(|v| Request { vertices: vec![0, v], size: dy("1/2^4") })
            .collect();
        let mut alice = ScriptedAlice::new(script);
        let t = run_match(&cfg, &mut alice, &mut bob, 100);
        assert!(matches!(t.outcome, Outcome::RuleViolation { at_move: 5, .. }), "{:?}", t.outcome);
    }

    #[test]
    fn four_equal_regions_at_m2() {
        let cfg = GameConfig::pair(
            Mode::PairPrefixFree,
            dy("1/2^2"),
            dy("1/2^4"),
            vec![dy("1/2^4"), dy("1/2^5")],
        );
        let bob = dynamic_regions(&cfg).unwrap();
        assert_eq!(bob.max_regions, 4);
        assert_eq!(bob.region_depth, 2);
    }

    #[test]
    fn first_request_of_a_size_assigns_one_region() {
        let cfg = GameConfig::pair(
            Mode::PairPrefixFree,
            dy("1/2^2"),
            dy("1/2^4"),
            vec![dy("1/2^4"), dy("1/2^5")],
        );
        let mut bob = dynamic_regions(&cfg).unwrap();
        let mut alice = ScriptedAlice::new(vec![
            Request { vertices: vec![0, 1], size: dy("1/2^4") },
            Request { vertices: vec![2, 3], size: dy("1/2^4") },
        ]);
        let t = run_match(&cfg, &mut alice, &mut bob, 100);
        assert_eq!(t.outcome, Outcome::BobWinsScriptExhausted);
        assert_eq!(t.metrics.extras["regions-assigned"], "1");
    }

    #[test]
    fn flooding_one_size_stays_within_2m_regions() {
        // m=2, d=1/4: flood size 1/32 across many vertex pairs; the
        // variant-C constraint allows this and regions must suffice
        let cfg = GameConfig::pair(
            Mode::PairPrefixFree,
            dy("1/2^2"),
            dy("1/2^5"),
            vec![dy("1/2^5"), dy("1/2^6")],
        );
        let mut bob = dynamic_regions(&cfg).unwrap();
        let mut script = Vec::new();
        for i in 0..16u64 {
            script.push(Request { vertices: vec![2 * i, 2 * i + 1], size: dy("1/2^5") });
        }
        let mut alice = ScriptedAlice::new(script);
        let t = run_match(&cfg, &mut alice, &mut bob, 100);
        assert_eq!(t.outcome, Outcome::BobWinsScriptExhausted);
        assert!(t.metrics.extras["regions-assigned"].parse::<u64>().unwrap() <= 4);
    }
}
