//! Referee and state machine for the pairwise games, the bipartite
//! variant and the set game.

pub mod config;
pub mod referee;
pub mod state;
pub mod transcript;
pub mod trivial;

pub use config::{GameConfig, Key, Mode, Request, Vertex, Violation};
pub use referee::{
    run_match, AliceStrategy, BobMove, BobReplyKind, BobStrategy, ScriptedAlice, StrategyEvent,
};
pub use state::{AllocationState, BallCountCounterexample};
pub use transcript::{replay, Actor, Metrics, MoveKind, MoveRecord, Outcome, StageRow, Transcript};
pub use trivial::trivial_small_allocator;
