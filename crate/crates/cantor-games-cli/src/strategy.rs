//! Strategy construction from config keys.

use anyhow::{anyhow, bail, Result};
use cantor_games::alice::{
    bipartite_star_adversary, random_adversary, schedule_adversary, star_adversary,
    RandomProfile, WeightSchedule,
};
use cantor_games::bob::{
    blaming_with_extras, blaming_with_extras_within, default_friend_scale,
    dynamic_regions, dynamic_regions_unchecked, greedy_pairs, outside_contract,
    region_block_blaming, set_friends, set_greedy_hypergraph, set_groups, set_leaders,
    static_regions, DEFAULT_SIZE_FACTOR,
};
use cantor_games::designs::{design_length, gen_index_list, DesignList, Xi};
use cantor_games::game::{trivial_small_allocator, AliceStrategy, BobStrategy, GameConfig};
use cantor_games::Dyadic;
use std::path::Path;

use crate::config::RawConfig;

pub fn build_alice(raw: &RawConfig, cfg: &GameConfig) -> Result<Box<dyn AliceStrategy>> {
    match raw.require("alice")? {
        "star" => Ok(Box::new(star_adversary(&cfg.d).map_err(|e| anyhow!(e))?)),
        "bipartite-star" => {
            Ok(Box::new(bipartite_star_adversary(&cfg.d).map_err(|e| anyhow!(e))?))
        }
        "random" => {
            let profile: RandomProfile = raw
                .get("random-profile")
                .unwrap_or("uniform")
                .parse()
                .map_err(|e: String| anyhow!(e))?;
            let requests: u64 = raw.parsed("requests")?.unwrap_or(10_000);
            Ok(Box::new(random_adversary(cfg.seed, profile).with_requests(requests)))
        }
        "schedule" => {
            let path = raw.require("schedule")?;
            let schedule =
                WeightSchedule::load(Path::new(path), &cfg.d).map_err(|e| anyhow!(e))?;
            Ok(Box::new(schedule_adversary(schedule)))
        }
        other => bail!("unknown alice strategy {other:?}"),
    }
}

/// The design a block strategy plays with, from `design-*` keys with the
/// length rule as default.
pub fn build_design(raw: &RawConfig, cfg: &GameConfig) -> Result<DesignList> {
    let r: u64 = raw.parsed("design-r")?.unwrap_or(4);
    let n_sets: u64 = raw.parsed("design-n")?.unwrap_or(32);
    let xi: Xi = raw
        .get("xi")
        .unwrap_or("9/20")
        .parse()
        .map_err(|e: String| anyhow!(e))?;
    let s = cfg.s as u64;
    let ell: u64 = raw
        .parsed("design-ell")?
        .unwrap_or_else(|| design_length(16, r, n_sets, s));
    let seed: u64 = raw.parsed("design-seed")?.unwrap_or(cfg.seed);
    Ok(gen_index_list(ell, r, n_sets, xi, s, seed))
}

pub fn build_bob(raw: &RawConfig, cfg: &GameConfig) -> Result<Box<dyn BobStrategy>> {
    let size_factor: u64 = raw.parsed("size-factor")?.unwrap_or(DEFAULT_SIZE_FACTOR);
    let bob: Box<dyn BobStrategy> = match raw.require("bob")? {
        "greedy" => Box::new(greedy_pairs(cfg)),
        "trivial" => Box::new(trivial_small_allocator(cfg, None).map_err(|e| anyhow!(e))?),
        "dynamic-regions" => {
            if raw.get("outside-contract") == Some("true") {
                Box::new(dynamic_regions_unchecked(cfg))
            } else {
                Box::new(dynamic_regions(cfg).map_err(|e| anyhow!(e))?)
            }
        }
        "static-regions" => {
            let quotas = parse_quotas(raw.require("quotas")?)?;
            Box::new(static_regions(cfg, &quotas).map_err(|e| anyhow!(e))?)
        }
        "region-block-blaming" => {
            let design = build_design(raw, cfg)?;
            Box::new(region_block_blaming(cfg, design, size_factor).map_err(|e| anyhow!(e))?)
        }
        "blaming-with-extras" => {
            let design = build_design(raw, cfg)?;
            if raw.get("outside-contract") == Some("true") {
                // skip the size precondition along with the contract
                Box::new(
                    blaming_with_extras_within(cantor_games::CantorAddress::root(), design)
                        .map_err(|e| anyhow!(e))?,
                )
            } else {
                Box::new(blaming_with_extras(cfg, design, size_factor).map_err(|e| anyhow!(e))?)
            }
        }
        "set-greedy" => Box::new(set_greedy_hypergraph(cfg).map_err(|e| anyhow!(e))?),
        "set-leaders" => {
            let design = build_design(raw, cfg)?;
            let bound: u64 = raw.parsed("leader-bound")?.unwrap_or(8 * design.r);
            Box::new(set_leaders(cfg, design, bound).map_err(|e| anyhow!(e))?)
        }
        "set-friends" => {
            let design = build_design(raw, cfg)?;
            let scale: u64 = raw
                .parsed("friend-scale")?
                .unwrap_or_else(|| default_friend_scale(design.r, design.s));
            Box::new(set_friends(cfg, design, scale).map_err(|e| anyhow!(e))?)
        }
        "set-groups" => {
            let designs: Vec<DesignList> = (0..cfg.s)
                .map(|i| {
                    let seeded = raw.with_value(
                        "design-seed",
                        &(raw
                            .parsed::<u64>("design-seed")?
                            .unwrap_or(cfg.seed)
                            .wrapping_add(i as u64))
                        .to_string(),
                    );
                    build_design(&seeded, cfg)
                })
                .collect::<Result<_>>()?;
            let merge_scale: u64 = raw.parsed("merge-scale")?.unwrap_or(1 << 10);
            Box::new(set_groups(cfg, designs, merge_scale).map_err(|e| anyhow!(e))?)
        }
        other => bail!("unknown bob strategy {other:?}"),
    };
    // voids declines and dead ends, for out-of-contract matches
    if raw.get("outside-contract") == Some("true") {
        return Ok(Box::new(outside_contract(BoxedBob(bob))));
    }
    Ok(bob)
}

fn parse_quotas(s: &str) -> Result<Vec<(Dyadic, u64)>> {
    s.split(',')
        .map(|part| {
            let (eps, n) = part
                .trim()
                .split_once(':')
                .ok_or_else(|| anyhow!("quota {part:?}: expected size:count"))?;
            let eps: Dyadic = eps.trim().parse().map_err(|e| anyhow!("quota size: {e}"))?;
            let n: u64 = n.trim().parse().map_err(|e| anyhow!("quota count: {e}"))?;
            Ok((eps, n))
        })
        .collect()
}

/// Lets the contract adapter wrap a type-erased strategy.
pub struct BoxedBob(pub Box<dyn BobStrategy>);

impl BobStrategy for BoxedBob {
    fn name(&self) -> &'static str {
        self.0.name()
    }

    fn setup(
        &mut self,
        cfg: &GameConfig,
    ) -> Vec<(cantor_games::game::Key, cantor_games::CantorAddress)> {
        self.0.setup(cfg)
    }

    fn respond(
        &mut self,
        cfg: &GameConfig,
        state: &cantor_games::game::AllocationState,
        req: &cantor_games::game::Request,
    ) -> cantor_games::game::BobMove {
        self.0.respond(cfg, state, req)
    }

    fn may_decline(&self) -> bool {
        self.0.may_decline()
    }

    fn finish(&self, metrics: &mut cantor_games::game::Metrics) {
        self.0.finish(metrics)
    }
}
