//! Requester-side strategies: the staged star adversary and the
//! scripted/random streams used for fuzzing allocators.

pub mod random;
pub mod schedule;
pub mod star;

pub use random::{random_adversary, RandomAdversary, RandomProfile};
pub use schedule::{schedule_adversary, ScheduleAdversary, ScheduleEntry, WeightSchedule};
pub use star::{bipartite_star_adversary, star_adversary, StarAdversary, StarPlan};
