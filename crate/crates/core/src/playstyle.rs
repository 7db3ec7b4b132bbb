//! Playstyle characterization and similarity search.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abstraction::{abstract_state, AbstractState};
use crate::action::{Action, ACTION_COUNT};
use crate::codec;
use crate::level::Level;
use crate::replay::{record_episode, Replay};
use crate::solver::Policy;
use crate::world::Outcome;

/// Runs per level used when characterizing a policy.
pub const DEFAULT_RUNS_PER_LEVEL: u32 = 10;
/// Episode length cap while characterizing (150 s of game time).
pub const CHARACTERIZE_MAX_TICKS: u32 = 3_600;

/// Display-only per-episode averages.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Aggregates {
    /// Ticks to reach the goal; episodes that never reach it count as the
    /// tick cap.
    pub mean_completion_ticks: f64,
    pub mean_coins: f64,
    pub mean_kills: f64,
    pub mean_jumps: f64,
    pub death_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaystyleMetrics {
    pub action_freq: [f64; ACTION_COUNT],
    #[serde(with = "codec::state_map")]
    pub state_visits: BTreeMap<AbstractState, f64>,
    pub aggregates: Aggregates,
}

impl PlaystyleMetrics {
    pub fn jump_frequency(&self) -> f64 {
        Action::ALL
            .iter()
            .filter(|a| a.is_jump())
            .map(|a| self.action_freq[a.index()])
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CharacterizeError {
    #[error("no levels to characterize on")]
    EmptyLevels,
    #[error("runs per level must be at least 1")]
    NoRuns,
    #[error("trace contains no completed action")]
    EmptyTrace,
}

/// Raw counts gathered from one or more episodes; merging is associative.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tally {
    pub actions: [u64; ACTION_COUNT],
    pub visits: BTreeMap<AbstractState, u64>,
    pub episodes: u64,
    pub completion_ticks: u64,
    pub coins: u64,
    pub kills: u64,
    pub jumps: u64,
    pub deaths: u64,
}

impl Tally {
    /// Counts one recorded episode. `tick_cap` is charged as the completion
    /// time of episodes that do not reach the goal.
    pub fn from_replay(replay: &Replay, level: &Level, tick_cap: u32) -> Tally {
        let mut t = Tally::default();
        for &(tick, action) in &replay.actions {
            t.actions[action.index()] += 1;
            let s = abstract_state(&replay.frames[tick as usize], level);
            *t.visits.entry(s).or_default() += 1;
            t.jumps += action.is_jump() as u64;
        }
        let last = replay.final_state();
        t.episodes = 1;
        t.completion_ticks = match last.outcome {
            Outcome::Won => last.tick as u64,
            _ => tick_cap.max(last.tick) as u64,
        };
        t.coins = last.coins() as u64;
        t.kills = last.kills() as u64;
        t.deaths = (last.outcome == Outcome::Dead) as u64;
        t
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.actions.iter_mut().zip(other.actions) {
            *a += b;
        }
        for (s, n) in other.visits {
            *self.visits.entry(s).or_default() += n;
        }
        self.episodes += other.episodes;
        self.completion_ticks += other.completion_ticks;
        self.coins += other.coins;
        self.kills += other.kills;
        self.jumps += other.jumps;
        self.deaths += other.deaths;
        self
    }

    pub fn into_metrics(self) -> Result<PlaystyleMetrics, CharacterizeError> {
        let total: u64 = self.actions.iter().sum();
        if total == 0 {
            return Err(CharacterizeError::EmptyTrace);
        }
        let action_freq = self.actions.map(|n| n as f64 / total as f64);
        let state_visits = self
            .visits
            .into_iter()
            .map(|(s, n)| (s, n as f64 / total as f64))
            .collect();
        let eps = self.episodes.max(1) as f64;
        Ok(PlaystyleMetrics {
            action_freq,
            state_visits,
            aggregates: Aggregates {
                mean_completion_ticks: self.completion_ticks as f64 / eps,
                mean_coins: self.coins as f64 / eps,
                mean_kills: self.kills as f64 / eps,
                mean_jumps: self.jumps as f64 / eps,
                death_rate: self.deaths as f64 / eps,
            },
        })
    }
}

/// Plays `policy` greedily from spawn.
pub fn run_policy(policy: &Policy, level: &Level, seed: u64, max_ticks: u32) -> Replay {
    record_episode(level, |w| policy.lookup(&abstract_state(w, level)), seed, max_ticks)
}

/// Runs `policy` `runs_per_level` times on every level (seeds `seed`,
/// `seed + 1`, ...) and summarizes what it did.
pub fn characterize(
    policy: &Policy,
    levels: &[Level],
    runs_per_level: u32,
    seed: u64,
) -> Result<PlaystyleMetrics, CharacterizeError> {
    if levels.is_empty() {
        return Err(CharacterizeError::EmptyLevels);
    }
    if runs_per_level == 0 {
        return Err(CharacterizeError::NoRuns);
    }
    let jobs: Vec<(&Level, u64)> = levels
        .iter()
        .flat_map(|l| (0..runs_per_level as u64).map(move |r| (l, seed + r)))
        .collect();
    let tallies: Vec<Tally> = jobs
        .par_iter()
        .map(|&(level, s)| {
            let replay = run_policy(policy, level, s, CHARACTERIZE_MAX_TICKS);
            Tally::from_replay(&replay, level, CHARACTERIZE_MAX_TICKS)
        })
        .collect();
    tallies
        .into_iter()
        .fold(Tally::default(), Tally::merge)
        .into_metrics()
}

/// Characterizes a single (typically human-played) trace.
pub fn characterize_trace(replay: &Replay, level: &Level) -> Result<PlaystyleMetrics, CharacterizeError> {
    if replay.actions.is_empty() {
        return Err(CharacterizeError::EmptyTrace);
    }
    let cap = replay.final_state().tick;
    Tally::from_replay(replay, level, cap).into_metrics()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityWeights {
    pub actions: f64,
    pub states: f64,
}

impl Default for SimilarityWeights {
    fn default() -> Self {
        Self {
            actions: 1.0,
            states: 1.0,
        }
    }
}

/// Mean squared error between action frequencies plus mean squared error
/// between state-visit frequencies over the union of both supports. Lower
/// means more alike.
pub fn similarity(m1: &PlaystyleMetrics, m2: &PlaystyleMetrics) -> f64 {
    weighted_similarity(m1, m2, SimilarityWeights::default())
}

pub fn weighted_similarity(m1: &PlaystyleMetrics, m2: &PlaystyleMetrics, w: SimilarityWeights) -> f64 {
    let mse_actions = m1
        .action_freq
        .iter()
        .zip(&m2.action_freq)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / ACTION_COUNT as f64;

    let union: BTreeSet<&AbstractState> = m1.state_visits.keys().chain(m2.state_visits.keys()).collect();
    let mse_states = if union.is_empty() {
        0.0
    } else {
        union
            .iter()
            .map(|s| {
                let a = m1.state_visits.get(s).copied().unwrap_or(0.0);
                let b = m2.state_visits.get(s).copied().unwrap_or(0.0);
                (a - b) * (a - b)
            })
            .sum::<f64>()
            / union.len() as f64
    };
    w.actions * mse_actions + w.states * mse_states
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("no dataset entries left after exclusion")]
    EmptyDatasetAfterExclusion,
}

/// Ranks `(name, metrics)` candidates by similarity to `query`, ties broken
/// by name, and returns the best `k` with their scores.
pub fn rank<'a>(
    candidates: impl IntoIterator<Item = (&'a str, &'a PlaystyleMetrics)>,
    query: &PlaystyleMetrics,
    k: usize,
    exclude: &BTreeSet<String>,
) -> Result<Vec<(String, f64)>, SearchError> {
    if k == 0 {
        return Err(SearchError::ZeroK);
    }
    let mut scored: Vec<(f64, &str)> = candidates
        .into_iter()
        .filter(|(name, _)| !exclude.contains(*name))
        .map(|(name, m)| (similarity(query, m), name))
        .collect();
    if scored.is_empty() {
        return Err(SearchError::EmptyDatasetAfterExclusion);
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    Ok(scored
        .into_iter()
        .take(k)
        .map(|(d, n)| (n.to_string(), d))
        .collect())
}
