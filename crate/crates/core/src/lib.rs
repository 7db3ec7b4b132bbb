//! Simulation, policy learning and playstyle mixing for a small tile
//! platformer.
//!
//! The usual flow is [`pipeline::build_dataset`] over a few levels, then
//! [`mixer`] to stitch stored policies together segment by segment.

pub mod abstraction;
pub mod action;
mod codec;
pub mod dataset;
pub mod level;
pub mod mixer;
pub mod model;
pub mod pipeline;
pub mod playstyle;
pub mod replay;
pub mod reward;
pub mod solver;
pub mod world;

pub use abstraction::{abstract_state, AbstractState, EnemySlot, Successor};
pub use action::{Action, ACTION_COUNT};
pub use dataset::{load_dataset, save_dataset, DatasetEntry, DatasetError, PolicyDataset, Provenance};
pub use level::{bundled_levels, load_level_dir, parse_level, Facing, Level, LevelDirError, LevelError, TileKind, TilePos};
pub use mixer::{
    auto_assign, extract_clip, run_mixed, run_mixed_with, segment_boundaries, segment_of, Assignment, AssignmentFile, Clip,
    MixError, Resolution, Segmentation,
};
pub use model::{exploration_bonus, explore, ExploreConfig, TransitionModel};
pub use pipeline::{build_dataset, BuildConfig, BuildError, ReportLine};
pub use playstyle::{characterize, characterize_trace, similarity, PlaystyleMetrics};
pub use replay::{record_episode, Replay, ReplayError, ReplayFile};
pub use reward::{builtin_reward_specs, parse_reward_spec, RewardSpec, RewardSpecError};
pub use solver::{value_iteration, Policy, SolverConfig};
pub use world::{apply_macro_action, Outcome, WorldState};
