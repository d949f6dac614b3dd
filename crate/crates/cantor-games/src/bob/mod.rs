//! Allocator-side strategies.

pub mod apriori;
pub mod blocks;
pub mod greedy;
pub mod groups;
pub mod outside;
pub mod regions;
pub mod set_blocks;
pub mod set_greedy;

pub use apriori::{apriori_allocator, AprioriAllocator};
pub use blocks::{
    blaming_with_extras, blaming_with_extras_within, composed_full, region_block_blaming,
    BlamingWithExtras, BlockSpace, ComposedFull, Region, RegionBlockBlaming, RegionKind,
    RegionTable, DEFAULT_SIZE_FACTOR,
};
pub use greedy::{greedy_pairs, greedy_pairs_within, GreedyPairs};
pub use groups::{set_groups, SetGroups};
pub use outside::{outside_contract, OutsideContract};
pub use regions::{
    dynamic_regions, dynamic_regions_unchecked, static_regions, DynamicRegions, StaticRegions,
};
pub use set_blocks::{
    default_friend_scale, set_friends, set_leaders, Group, SetFriends, SetLeaders, SetRegionTable,
};
pub use set_greedy::{set_greedy_hypergraph, SetGreedyHypergraph};
