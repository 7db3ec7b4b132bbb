//! The offline dataset build: explore, solve every reward spec, characterize.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{DatasetEntry, DatasetError, PolicyDataset, Provenance};
use crate::level::Level;
use crate::model::{explore, ExploreConfig, ExploreError, TransitionModel};
use crate::playstyle::{characterize, CharacterizeError, DEFAULT_RUNS_PER_LEVEL};
use crate::reward::RewardSpec;
use crate::solver::{value_iteration, SolveError, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildConfig {
    pub seed: u64,
    pub explore_budget: u64,
    pub runs_per_level: u32,
    pub solver: SolverConfig,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            seed: 0,
            explore_budget: ExploreConfig::DEFAULT_BUDGET,
            runs_per_level: DEFAULT_RUNS_PER_LEVEL,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error("no levels given")]
    NoLevels,
    #[error("no reward specs given")]
    NoSpecs,
    #[error("exploring `{level}`: {source}")]
    Explore { level: String, source: ExploreError },
    #[error("solving `{spec}`: {source}")]
    Solve { spec: String, source: SolveError },
    #[error("characterizing `{spec}`: {source}")]
    Characterize { spec: String, source: CharacterizeError },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// One line of the build report.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum ReportLine {
    Explore {
        level_id: String,
        seed: u64,
        states_visited: usize,
        updates: u64,
        millis: u128,
    },
    Model {
        states_visited: usize,
        updates: u64,
    },
    Solve {
        policy: String,
        iterations: usize,
        converged: bool,
        table_states: usize,
        millis: u128,
    },
    Characterize {
        policy: String,
        mean_completion_ticks: f64,
        coins: f64,
        kills: f64,
        jumps: f64,
        death_rate: f64,
    },
    Done {
        entries: usize,
        wall_millis: u128,
    },
}

/// Exploration seed for the `index`-th level.
pub fn level_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index as u64)
}

/// Explores every level and sums the counts into one model.
pub fn explore_levels(
    levels: &[Level],
    config: &BuildConfig,
    report: &mut Vec<ReportLine>,
) -> Result<TransitionModel, BuildError> {
    let explore_cfg = ExploreConfig::with_budget(config.explore_budget);
    let parts: Vec<_> = levels
        .par_iter()
        .enumerate()
        .map(|(i, level)| {
            let t = Instant::now();
            let seed = level_seed(config.seed, i);
            explore(level, explore_cfg, seed)
                .map(|m| (level.id.clone(), seed, m, t.elapsed().as_millis()))
                .map_err(|source| BuildError::Explore {
                    level: level.id.clone(),
                    source,
                })
        })
        .collect();
    let mut joint = TransitionModel::new();
    for part in parts {
        let (level_id, seed, model, millis) = part?;
        report.push(ReportLine::Explore {
            level_id,
            seed,
            states_visited: model.num_states(),
            updates: model.total_updates(),
            millis,
        });
        joint.merge(&model);
    }
    report.push(ReportLine::Model {
        states_visited: joint.num_states(),
        updates: joint.total_updates(),
    });
    Ok(joint)
}

/// Solves and characterizes every spec against an existing model.
pub fn solve_and_characterize(
    model: &TransitionModel,
    levels: &[Level],
    specs: &[RewardSpec],
    config: &BuildConfig,
    report: &mut Vec<ReportLine>,
) -> Result<Vec<DatasetEntry>, BuildError> {
    let solved: Vec<_> = specs
        .par_iter()
        .map(|spec| {
            let t = Instant::now();
            value_iteration(model, spec, &config.solver)
                .map(|p| (p, t.elapsed().as_millis()))
                .map_err(|source| BuildError::Solve {
                    spec: spec.name.clone(),
                    source,
                })
        })
        .collect();
    let mut entries = Vec::with_capacity(specs.len());
    for (spec, result) in specs.iter().zip(solved) {
        let (policy, millis) = result?;
        report.push(ReportLine::Solve {
            policy: spec.name.clone(),
            iterations: policy.metadata.iterations_used,
            converged: policy.metadata.converged,
            table_states: policy.table.len(),
            millis,
        });
        let metrics = characterize(&policy, levels, config.runs_per_level, config.seed).map_err(|source| {
            BuildError::Characterize {
                spec: spec.name.clone(),
                source,
            }
        })?;
        let a = &metrics.aggregates;
        report.push(ReportLine::Characterize {
            policy: spec.name.clone(),
            mean_completion_ticks: a.mean_completion_ticks,
            coins: a.mean_coins,
            kills: a.mean_kills,
            jumps: a.mean_jumps,
            death_rate: a.death_rate,
        });
        entries.push(DatasetEntry {
            display_name: spec.name.clone(),
            policy,
            metrics,
        });
    }
    Ok(entries)
}

/// The whole pipeline. The dataset depends only on the inputs and the seed;
/// the report also carries timings.
pub fn build_dataset(
    levels: &[Level],
    specs: &[RewardSpec],
    config: &BuildConfig,
) -> Result<(PolicyDataset, Vec<ReportLine>), BuildError> {
    if levels.is_empty() {
        return Err(BuildError::NoLevels);
    }
    if specs.is_empty() {
        return Err(BuildError::NoSpecs);
    }
    let start = Instant::now();
    let mut report = Vec::new();
    let model = explore_levels(levels, config, &mut report)?;
    let entries = solve_and_characterize(&model, levels, specs, config, &mut report)?;
    let dataset = PolicyDataset::new(
        Provenance {
            level_ids: levels.iter().map(|l| l.id.clone()).collect(),
            runs_per_level: config.runs_per_level,
            seed: config.seed,
            explore_budget: config.explore_budget,
        },
        entries,
    )?;
    report.push(ReportLine::Done {
        entries: dataset.len(),
        wall_millis: start.elapsed().as_millis(),
    });
    Ok((dataset, report))
}
