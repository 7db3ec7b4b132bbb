//! Count-based transition model learned by bonus-driven exploration.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::abstraction::{abstract_state, AbstractState, Successor};
use crate::action::{Action, ACTION_COUNT};
use crate::level::Level;
use crate::world::{apply_macro_action, WorldState};

pub const MODEL_SCHEMA_VERSION: u32 = 1;

/// Visit counters `N[s]`, `N[s,a]` and `N[s,a,s']`. Absent keys mean zero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransitionModel {
    n_s: BTreeMap<AbstractState, u64>,
    n_sa: BTreeMap<(AbstractState, Action), u64>,
    n_sas: BTreeMap<(AbstractState, Action), BTreeMap<Successor, u64>>,
}

impl TransitionModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.n_s.is_empty()
    }

    pub fn state_count(&self, s: &AbstractState) -> u64 {
        self.n_s.get(s).copied().unwrap_or(0)
    }

    pub fn action_count(&self, s: &AbstractState, a: Action) -> u64 {
        self.n_sa.get(&(*s, a)).copied().unwrap_or(0)
    }

    pub fn transition_count(&self, s: &AbstractState, a: Action, s2: &Successor) -> u64 {
        self.n_sas
            .get(&(*s, a))
            .and_then(|m| m.get(s2))
            .copied()
            .unwrap_or(0)
    }

    /// Records one completed action.
    pub fn update(&mut self, s: AbstractState, a: Action, s2: Successor) {
        self.add(s, a, s2, 1);
    }

    fn add(&mut self, s: AbstractState, a: Action, s2: Successor, n: u64) {
        *self.n_s.entry(s).or_default() += n;
        *self.n_sa.entry((s, a)).or_default() += n;
        *self.n_sas.entry((s, a)).or_default().entry(s2).or_default() += n;
    }

    /// `N[s,a,s'] / N[s,a]`, or 0 for an untried pair.
    pub fn transition_prob(&self, s: &AbstractState, a: Action, s2: &Successor) -> f64 {
        let n = self.action_count(s, a);
        if n == 0 {
            return 0.0;
        }
        self.transition_count(s, a, s2) as f64 / n as f64
    }

    /// `sqrt(ln N[s] / N[s,a])`; untried actions get `+inf`.
    pub fn exploration_bonus(&self, s: &AbstractState, a: Action) -> f64 {
        exploration_bonus(self.state_count(s), self.action_count(s, a))
    }

    /// States with at least one recorded action, in canonical order.
    pub fn states(&self) -> impl Iterator<Item = &AbstractState> {
        self.n_s.keys()
    }

    pub fn num_states(&self) -> usize {
        self.n_s.len()
    }

    /// Actions tried in `s` along with their successor counts.
    pub fn outcomes(
        &self,
        s: &AbstractState,
    ) -> impl Iterator<Item = (Action, u64, &BTreeMap<Successor, u64>)> + '_ {
        let s = *s;
        Action::ALL.into_iter().filter_map(move |a| {
            let succ = self.n_sas.get(&(s, a))?;
            Some((a, self.action_count(&s, a), succ))
        })
    }

    pub fn total_updates(&self) -> u64 {
        self.n_s.values().sum()
    }

    /// Sums the counts of `other` into `self`.
    pub fn merge(&mut self, other: &TransitionModel) {
        for (&(s, a), succ) in &other.n_sas {
            for (&s2, &n) in succ {
                self.add(s, a, s2, n);
            }
        }
    }

    /// Checks `N[s] = sum_a N[s,a]` and `N[s,a] = sum_s' N[s,a,s']`.
    pub fn counts_consistent(&self) -> bool {
        let mut per_state: BTreeMap<AbstractState, u64> = BTreeMap::new();
        for (&(s, _), &n) in &self.n_sa {
            *per_state.entry(s).or_default() += n;
        }
        if per_state != self.n_s {
            return false;
        }
        self.n_sa.len() == self.n_sas.len()
            && self.n_sa.iter().all(|(k, &n)| {
                self.n_sas
                    .get(k)
                    .is_some_and(|m| m.values().sum::<u64>() == n)
            })
    }

    pub fn to_file(&self) -> ModelFile {
        let mut codes: Vec<u64> = Vec::new();
        let mut index: BTreeMap<u64, usize> = BTreeMap::new();
        let mut intern = |code: u64| {
            *index.entry(code).or_insert_with(|| {
                codes.push(code);
                codes.len() - 1
            })
        };
        let mut counts = Vec::new();
        for (&(s, a), succ) in &self.n_sas {
            let si = intern(s.encode());
            for (s2, &n) in succ {
                counts.push([si as u64, a.index() as u64, intern(s2.encode()) as u64, n]);
            }
        }
        ModelFile {
            schema_version: MODEL_SCHEMA_VERSION,
            states: codes,
            counts,
        }
    }

    pub fn from_file(file: &ModelFile) -> Result<TransitionModel, ModelFileError> {
        if file.schema_version != MODEL_SCHEMA_VERSION {
            return Err(ModelFileError::SchemaVersionMismatch(file.schema_version));
        }
        let decode = |i: u64| {
            file.states
                .get(i as usize)
                .and_then(|&c| Successor::decode(c))
                .ok_or(ModelFileError::BadStateIndex(i))
        };
        let mut model = TransitionModel::new();
        for &[si, ai, s2i, n] in &file.counts {
            let Successor::State(s) = decode(si)? else {
                return Err(ModelFileError::BadStateIndex(si));
            };
            let a = Action::from_index(ai as usize).ok_or(ModelFileError::BadAction(ai))?;
            model.add(s, a, decode(s2i)?, n);
        }
        Ok(model)
    }
}

/// Serialized model. `states` holds canonical state codes (see
/// [`AbstractState::encode`]; the two codes just past the state range mark
/// the won and dead outcomes) and `counts` rows are
/// `[state_index, action_index, successor_index, n]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: u32,
    pub states: Vec<u64>,
    pub counts: Vec<[u64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelFileError {
    #[error("model schema version {0} is not supported")]
    SchemaVersionMismatch(u32),
    #[error("state index {0} does not name a valid state")]
    BadStateIndex(u64),
    #[error("action index {0} out of range")]
    BadAction(u64),
}

pub fn exploration_bonus(n_s: u64, n_sa: u64) -> f64 {
    if n_sa == 0 {
        return f64::INFINITY;
    }
    if n_s <= 1 {
        return 0.0;
    }
    ((n_s as f64).ln() / n_sa as f64).sqrt()
}

/// Picks the action with the largest bonus, breaking ties uniformly.
pub fn select_exploration_action(
    model: &TransitionModel,
    s: &AbstractState,
    rng: &mut impl rand::Rng,
) -> Action {
    let bonuses: [f64; ACTION_COUNT] = Action::ALL.map(|a| model.exploration_bonus(s, a));
    let best = bonuses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<Action> = Action::ALL
        .into_iter()
        .zip(bonuses)
        .filter(|&(_, b)| b == best)
        .map(|(a, _)| a)
        .collect();
    *ties.choose(rng).expect("at least one action attains the max")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExploreConfig {
    /// Completed macro-actions to record.
    pub budget: u64,
    /// Episodes longer than this many ticks are restarted from spawn.
    pub episode_tick_limit: u32,
}

impl ExploreConfig {
    pub const DEFAULT_BUDGET: u64 = 200_000;

    pub fn with_budget(budget: u64) -> Self {
        Self {
            budget,
            episode_tick_limit: 4_800,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExploreError {
    #[error("exploration budget must be positive")]
    ZeroBudget,
}

/// Explores `level` from spawn, restarting on every terminal outcome, until
/// `budget` actions have completed.
pub fn explore(level: &Level, config: ExploreConfig, seed: u64) -> Result<TransitionModel, ExploreError> {
    if config.budget == 0 {
        return Err(ExploreError::ZeroBudget);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = TransitionModel::new();
    let mut world = WorldState::initial(level);
    let mut s = abstract_state(&world, level);
    for _ in 0..config.budget {
        let a = select_exploration_action(&model, &s, &mut rng);
        world = apply_macro_action(&world, level, a).expect("explore never acts on terminal states");
        let s2 = Successor::of(&world, level);
        model.update(s, a, s2);
        if world.is_terminal() || world.tick >= config.episode_tick_limit {
            world = WorldState::initial(level);
        }
        s = abstract_state(&world, level);
    }
    Ok(model)
}
