//! Flat value iteration over the learned model.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abstraction::{AbstractState, Successor};
use crate::action::Action;
use crate::codec;
use crate::model::TransitionModel;
use crate::reward::RewardSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub gamma: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gamma: 0.95,
            epsilon: 1e-6,
            max_iterations: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("transition model is empty")]
    EmptyModel,
    #[error("invalid solver config: {0}")]
    InvalidConfig(&'static str),
}

impl SolverConfig {
    // negated comparisons so that NaN is rejected too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(SolveError::InvalidConfig("gamma must lie in (0, 1)"));
        }
        if !(self.epsilon > 0.0) {
            return Err(SolveError::InvalidConfig("epsilon must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(SolveError::InvalidConfig("max_iterations must be positive"));
        }
        Ok(())
    }
}

/// Where probability mass goes after an action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    /// A state of the MDP, by index.
    State(usize),
    /// An absorbing outcome paying this reward on entry.
    Terminal(f64),
    /// A state outside the solved set; its value is taken as zero.
    Unvisited,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionModel {
    pub action: usize,
    pub reward: f64,
    pub next: Vec<(Target, f64)>,
}

/// A finite MDP in index form. `actions[s]` lists the actions available in
/// state `s` in ascending action index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TabularMdp {
    pub actions: Vec<Vec<ActionModel>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabularSolution {
    pub values: Vec<f64>,
    /// Index into `actions[s]` of the greedy choice.
    pub greedy: Vec<usize>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

impl TabularMdp {
    pub fn num_states(&self) -> usize {
        self.actions.len()
    }

    fn backup(&self, am: &ActionModel, values: &[f64], gamma: f64) -> f64 {
        am.reward
            + am
                .next
                .iter()
                .map(|&(t, p)| {
                    p * match t {
                        Target::State(j) => gamma * values[j],
                        Target::Terminal(r) => r,
                        Target::Unvisited => 0.0,
                    }
                })
                .sum::<f64>()
    }

    /// First action (in list order) attaining the maximal backup.
    pub fn greedy_choice(&self, s: usize, values: &[f64], gamma: f64) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, am) in self.actions[s].iter().enumerate() {
            let q = self.backup(am, values, gamma);
            if q > best.1 {
                best = (i, q);
            }
        }
        best
    }

    /// Synchronous value iteration from `V = 0`.
    pub fn solve(&self, config: &SolverConfig) -> TabularSolution {
        let n = self.num_states();
        let mut values = vec![0.0; n];
        let mut iterations = 0;
        let mut residual = f64::INFINITY;
        while iterations < config.max_iterations {
            let next: Vec<f64> = (0..n)
                .into_par_iter()
                .map(|s| self.greedy_choice(s, &values, config.gamma).1)
                .collect();
            residual = next
                .iter()
                .zip(&values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            values = next;
            iterations += 1;
            if residual < config.epsilon {
                break;
            }
        }
        let greedy = (0..n)
            .map(|s| self.greedy_choice(s, &values, config.gamma).0)
            .collect();
        TabularSolution {
            values,
            greedy,
            iterations,
            residual,
            converged: residual < config.epsilon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveMetadata {
    pub gamma: f64,
    pub epsilon: f64,
    pub iterations_used: usize,
    pub converged: bool,
}

/// Deterministic state-to-action map with a fallback for unseen states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub name: String,
    pub reward_spec_name: String,
    #[serde(rename = "entries", with = "codec::state_map")]
    pub table: BTreeMap<AbstractState, Action>,
    pub default_action: Action,
    #[serde(flatten)]
    pub metadata: SolveMetadata,
}

impl Policy {
    pub const DEFAULT_ACTION: Action = Action::WalkRight;

    pub fn lookup(&self, s: &AbstractState) -> Action {
        self.table.get(s).copied().unwrap_or(self.default_action)
    }

    /// A policy that plays `action` everywhere.
    pub fn constant(name: &str, action: Action) -> Policy {
        Policy {
            name: name.to_string(),
            reward_spec_name: String::new(),
            table: BTreeMap::new(),
            default_action: action,
            metadata: SolveMetadata {
                gamma: 0.0,
                epsilon: 0.0,
                iterations_used: 0,
                converged: true,
            },
        }
    }
}

/// The tabular MDP induced by a learned model and a reward spec, along with
/// the state ordering used to index it.
pub struct ModelMdp {
    pub states: Vec<AbstractState>,
    pub actions: Vec<Vec<Action>>,
    pub mdp: TabularMdp,
}

impl ModelMdp {
    pub fn build(model: &TransitionModel, spec: &RewardSpec) -> ModelMdp {
        let states: Vec<AbstractState> = model.states().copied().collect();
        let index: BTreeMap<AbstractState, usize> =
            states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let mut actions = Vec::with_capacity(states.len());
        let mut rows = Vec::with_capacity(states.len());
        for s in &states {
            let mut acts = Vec::new();
            let mut row = Vec::new();
            for (a, n, succ) in model.outcomes(s) {
                let next = succ
                    .iter()
                    .map(|(s2, &c)| {
                        let t = match s2 {
                            Successor::State(x) => index.get(x).map_or(Target::Unvisited, |&j| Target::State(j)),
                            Successor::Won => Target::Terminal(spec.terminal_rewards.won),
                            Successor::Dead => Target::Terminal(spec.terminal_rewards.dead),
                        };
                        (t, c as f64 / n as f64)
                    })
                    .collect();
                acts.push(a);
                row.push(ActionModel {
                    action: a.index(),
                    reward: spec.reward(s, a),
                    next,
                });
            }
            actions.push(acts);
            rows.push(row);
        }
        ModelMdp {
            states,
            actions,
            mdp: TabularMdp { actions: rows },
        }
    }
}

pub fn value_iteration(
    model: &TransitionModel,
    spec: &RewardSpec,
    config: &SolverConfig,
) -> Result<Policy, SolveError> {
    Ok(solve_with_values(model, spec, config)?.0)
}

/// Like [`value_iteration`] but also returns the final value of every
/// table state.
pub fn solve_with_values(
    model: &TransitionModel,
    spec: &RewardSpec,
    config: &SolverConfig,
) -> Result<(Policy, BTreeMap<AbstractState, f64>), SolveError> {
    config.validate()?;
    if model.is_empty() {
        return Err(SolveError::EmptyModel);
    }
    let built = ModelMdp::build(model, spec);
    let sol = built.mdp.solve(config);
    let table = built
        .states
        .iter()
        .zip(&sol.greedy)
        .enumerate()
        .map(|(i, (s, &g))| (*s, built.actions[i][g]))
        .collect();
    let values = built.states.iter().copied().zip(sol.values).collect();
    let policy = Policy {
        name: spec.name.clone(),
        reward_spec_name: spec.name.clone(),
        table,
        default_action: Policy::DEFAULT_ACTION,
        metadata: SolveMetadata {
            gamma: config.gamma,
            epsilon: config.epsilon,
            iterations_used: sol.iterations,
            converged: sol.converged,
        },
    };
    Ok((policy, values))
}
