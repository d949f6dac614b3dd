//! Seeded random adversaries. Requests are drawn uniformly over the
//! allowed sizes and the vertex universe, pre-checked against the budget
//! rules so the stream stays legal for its whole length.

use crate::dyadic::Dyadic;
use crate::game::state::AllocationState;
use crate::game::{AliceStrategy, GameConfig, Key, Request, Vertex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RandomProfile {
    /// Uniform over sizes and vertices, subject only to the budget.
    Uniform,
    /// Additionally keeps sum_i size_i * max_v count_i(v) at most d, the
    /// variant-C discipline on per-size request multiplicities.
    VariantC,
}

impl std::str::FromStr for RandomProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(RandomProfile::Uniform),
            "variant-c" | "variantc" => Ok(RandomProfile::VariantC),
            other => Err(format!("unknown random profile {other:?}")),
        }
    }
}

pub struct RandomAdversary {
    rng: ChaCha8Rng,
    profile: RandomProfile,
    remaining: u64,
    rejected: u64,
    /// Per (size index, vertex) request counts, for the variant-C bound.
    counts: BTreeMap<(usize, Vertex), u64>,
    maxes: Vec<u64>,
}

pub fn random_adversary(seed: u64, profile: RandomProfile) -> RandomAdversary {
    RandomAdversary {
        rng: ChaCha8Rng::seed_from_u64(seed),
        profile,
        remaining: 10_000,
        rejected: 0,
        counts: BTreeMap::new(),
        maxes: Vec::new(),
    }
}

impl RandomAdversary {
    pub fn with_requests(mut self, requests: u64) -> Self {
        self.remaining = requests;
        self
    }

    fn universe(cfg: &GameConfig) -> u64 {
        match cfg.n {
            Some(n) if n < 63 => 1u64 << n,
            Some(_) => u64::MAX,
            // unbounded universe: keep the draw narrow so budgets matter
            None => 64,
        }
    }

    fn variant_c_admits(&self, cfg: &GameConfig, idx: usize, slots: &[(u8, Vertex)]) -> bool {
        let mut maxes = self.maxes.clone();
        maxes.resize(cfg.allowed_sizes.len(), 0);
        for &(_, v) in slots {
            let c = self.counts.get(&(idx, v)).copied().unwrap_or(0) + 1;
            maxes[idx] = maxes[idx].max(c);
        }
        let mut sum = Dyadic::zero();
        for (i, size) in cfg.allowed_sizes.iter().enumerate() {
            sum += &size.scale_int(maxes[i]);
        }
        sum <= cfg.d
    }
}

impl AliceStrategy for RandomAdversary {
    fn name(&self) -> &'static str {
        "random"
    }

    fn next(&mut self, cfg: &GameConfig, state: &AllocationState) -> Option<Request> {
        if self.remaining == 0 {
            return None;
        }
        let universe = Self::universe(cfg);
        'draws: for _ in 0..500 {
            let idx = self.rng.gen_range(0..cfg.allowed_sizes.len());
            let size = cfg.allowed_sizes[idx].clone();
            if size > cfg.delta {
                continue;
            }
            let mut vertices: Vec<Vertex> = Vec::with_capacity(cfg.s);
            while vertices.len() < cfg.s {
                let v = self.rng.gen_range(0..universe);
                if cfg.mode.is_bipartite() || !vertices.contains(&v) {
                    vertices.push(v);
                }
            }
            let key = Key::new(cfg.mode, vertices.clone());
            for &(side, v) in &key.slots(cfg.mode) {
                if &state.budget(side, v) + &size > cfg.d {
                    self.rejected += 1;
                    continue 'draws;
                }
            }
            if self.profile == RandomProfile::VariantC
                && !self.variant_c_admits(cfg, idx, &key.slots(cfg.mode))
            {
                self.rejected += 1;
                continue;
            }
            if self.profile == RandomProfile::VariantC {
                let mut maxes = std::mem::take(&mut self.maxes);
                maxes.resize(cfg.allowed_sizes.len(), 0);
                for (_, v) in key.slots(cfg.mode) {
                    let c = self.counts.entry((idx, v)).or_insert(0);
                    *c += 1;
                    maxes[idx] = maxes[idx].max(*c);
                }
                self.maxes = maxes;
            }
            self.remaining -= 1;
            return Some(Request { vertices, size });
        }
        // the budget (or variant-C) headroom is exhausted
        None
    }

    fn finish(&self, metrics: &mut crate::game::Metrics) {
        metrics
            .extras
            .insert("random-rejected".into(), self.rejected.to_string());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bob::greedy_pairs;
    use crate::game::{run_match, Mode, Outcome};

    fn dy(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    fn cfg() -> GameConfig {
        GameConfig {
            mode: Mode::PairPrefixFree,
            n: Some(6),
            s: 2,
            d: dy("1/2^1"),
            delta: dy("1/2^9"),
            c: Dyadic::one(),
            allowed_sizes: vec![dy("1/2^9"), dy("1/2^10"), dy("1/2^11")],
            seed: 0,
        }
    }

    fn stream(seed: u64, profile: RandomProfile, n: u64) -> Vec<Request> {
        let cfg = cfg();
        let mut alice = random_adversary(seed, profile).with_requests(n);
        let state = crate::game::state::AllocationState::new(cfg.mode);
        let mut out = Vec::new();
        while let Some(r) = alice.next(&cfg, &state) {
            out.push(r);
        }
        out
    }

    #[test]
    fn streams_are_seed_reproducible() {
        let a = stream(7, RandomProfile::Uniform, 200);
        let b = stream(7, RandomProfile::Uniform, 200);
        let c = stream(8, RandomProfile::Uniform, 200);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 200);
    }

    #[test]
    fn requests_stay_within_budget_against_greedy() {
        let cfg = cfg();
        let mut alice = random_adversary(3, RandomProfile::Uniform).with_requests(400);
        let mut bob = greedy_pairs(&cfg);
        let t = run_match(&cfg, &mut alice, &mut bob, 1_000);
        // a legal stream never loses by rule violation
        assert!(
            matches!(t.outcome, Outcome::BobWinsScriptExhausted | Outcome::AliceWins { .. }),
            "{:?}",
            t.outcome
        );
    }

    #[test]
    fn variant_c_respects_the_size_weighted_max_bound() {
        let cfg = cfg();
        let reqs = stream(11, RandomProfile::VariantC, 2_000);
        let mut counts: BTreeMap<(usize, Vertex), u64> = BTreeMap::new();
        let mut maxes = vec![0u64; cfg.allowed_sizes.len()];
        for r in &reqs {
            let idx = cfg.allowed_sizes.iter().position(|s| s == &r.size).unwrap();
            for &v in &r.vertices {
                let c = counts.entry((idx, v)).or_insert(0);
                *c += 1;
                maxes[idx] = maxes[idx].max(*c);
            }
        }
        let mut sum = Dyadic::zero();
        for (i, size) in cfg.allowed_sizes.iter().enumerate() {
            sum += &size.scale_int(maxes[i]);
        }
        assert!(sum <= cfg.d, "sum of size-weighted maxes is {sum}");
    }
}
