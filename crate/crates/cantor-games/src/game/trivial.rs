//! The finitization allocator: connect every pair of n-bit strings with a
//! size-2^(-n-2) interval inside the half-space [1] up front, and route all
//! larger requests to an inner strategy that plays inside [0].

use super::config::{GameConfig, Key, Request};
use super::referee::{BobMove, BobStrategy};
use super::state::AllocationState;
use crate::dyadic::Dyadic;
use crate::interval::CantorAddress;

pub struct TrivialSmallAllocator {
    tiny: Dyadic,
    n: u32,
    inner: Option<Box<dyn BobStrategy>>,
}

/// Builds the allocator, checking that all distinct-per-pair reservations
/// fit in half of the space: C(2^n, 2) * 2^(-n-2) <= 1/2.
pub fn trivial_small_allocator(
    cfg: &GameConfig,
    inner: Option<Box<dyn BobStrategy>>,
) -> Result<TrivialSmallAllocator, String> {
    if !cfg.mode.is_pair() || cfg.mode.is_bipartite() {
        return Err("trivial small allocator plays the non-bipartite pair game".into());
    }
    let n = cfg.n.ok_or("trivial small allocator needs a finite universe")?;
    let vertices = 1u64 << n;
    let pairs = vertices * (vertices - 1) / 2;
    if pairs > 1u64 << (n + 1) {
        return Err(format!(
            "capacity: {pairs} pairs of size 2^-{} exceed half the space",
            n + 2
        ));
    }
    Ok(TrivialSmallAllocator { tiny: Dyadic::pow2_neg(n + 2), n, inner })
}

impl BobStrategy for TrivialSmallAllocator {
    fn name(&self) -> &'static str {
        "trivial-small"
    }

    fn setup(&mut self, cfg: &GameConfig) -> Vec<(Key, CantorAddress)> {
        let vertices = 1u64 << self.n;
        let mut out = Vec::new();
        let mut slot = 0u64;
        for u in 0..vertices {
            for v in u + 1..vertices {
                // slot i of size 2^(-n-2) inside [1]: "1" ++ (n+1)-bit index
                let mut bits = vec![true];
                bits.extend(CantorAddress::nth_cell(self.n + 1, slot).bits());
                out.push((Key::new(cfg.mode, vec![u, v]), CantorAddress::from_bools(bits)));
                slot += 1;
            }
        }
        if let Some(inner) = &mut self.inner {
            out.extend(inner.setup(cfg));
        }
        out
    }

    fn respond(&mut self, cfg: &GameConfig, state: &AllocationState, req: &Request) -> BobMove {
        if req.size == self.tiny {
            // already satisfied by the reservation made in setup
            return BobMove::grant(Vec::new());
        }
        match &mut self.inner {
            Some(inner) => inner.respond(cfg, state, req),
            None => BobMove::grant(Vec::new()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::config::Mode;
    use crate::game::referee::{run_match, ScriptedAlice};
    use crate::game::transcript::Outcome;

    fn dy(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    fn cfg_n2() -> GameConfig {
        let mut cfg = GameConfig::pair(
            Mode::PairPrefixFree,
            dy("1/2^1"),
            dy("1/2^1"),
            vec![dy("1/2^4"), dy("1/2^3")],
        );
        cfg.n = Some(2);
        cfg
    }

    #[test]
    fn n2_reserves_six_distinct_slots() {
        let cfg = cfg_n2();
        let mut bob = trivial_small_allocator(&cfg, None).unwrap();
        let grants = bob.setup(&cfg);
        assert_eq!(grants.len(), 6);
        let mut space = crate::interval::IntervalSet::empty();
        for (_, a) in &grants {
            assert_eq!(a.size(), dy("1/2^4"));
            assert!(a.bits()[0], "reservations live inside [1]");
            space = space.insert_disjoint(a).unwrap();
        }
        assert_eq!(space.measure(), dy("6/2^4"));
    }

    #[test]
    fn tiny_requests_are_answered_from_the_reserve() {
        let cfg = cfg_n2();
        let mut bob = trivial_small_allocator(&cfg, None).unwrap();
        let mut alice = ScriptedAlice::new(vec![
            Request { vertices: vec![0, 1], size: dy("1/2^4") },
            Request { vertices: vec![2, 3], size: dy("1/2^4") },
        ]);
        let t = run_match(&cfg, &mut alice, &mut bob, 100);
        assert_eq!(t.outcome, Outcome::BobWinsScriptExhausted);
    }

    #[test]
    fn capacity_error_at_n3() {
        let mut cfg = cfg_n2();
        cfg.n = Some(3);
        assert!(trivial_small_allocator(&cfg, None).is_err());
    }
}
