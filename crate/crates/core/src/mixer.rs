//! Level segmentation, per-segment policy assignment and clips.

use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::abstraction::abstract_state;
use crate::dataset::PolicyDataset;
use crate::level::Level;
use crate::replay::Replay;
use crate::solver::Policy;
use crate::world::{run_macro_action, WorldState, FRAMES_PER_SECOND, TILE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Resolution {
    Low,
    Medium,
    High,
}

impl Resolution {
    pub const ALL: [Resolution; 3] = [Resolution::Low, Resolution::Medium, Resolution::High];

    pub fn segment_count(self) -> usize {
        match self {
            Resolution::Low => 3,
            Resolution::Medium => 5,
            Resolution::High => 10,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Resolution::Low => "low",
            Resolution::Medium => "medium",
            Resolution::High => "high",
        }
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown resolution `{0}` (expected low, medium or high)")]
pub struct UnknownResolution(pub String);

impl FromStr for Resolution {
    type Err = UnknownResolution;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "low" | "3" => Ok(Resolution::Low),
            "medium" | "5" => Ok(Resolution::Medium),
            "high" | "10" => Ok(Resolution::High),
            _ => Err(UnknownResolution(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MixError {
    #[error("level is {width} columns wide, too narrow for {segments} segments")]
    LevelTooNarrow { width: usize, segments: usize },
    #[error("column {x} is outside the level")]
    OutOfBounds { x: i64 },
    #[error("the dataset is empty")]
    EmptyDataset,
    #[error("segment {0} has no assigned playstyle")]
    UnassignedSlot(usize),
    #[error("unknown playstyle `{0}`")]
    UnknownPolicyName(String),
    #[error("segment {0} is never visited")]
    SegmentNeverVisited(usize),
    #[error("segment index {index} out of range for {count} segments")]
    NoSuchSegment { index: usize, count: usize },
    #[error("expected {expected} slots, got {found}")]
    SlotCountMismatch { expected: usize, found: usize },
    #[error("assignment is for level `{found}`, not `{expected}`")]
    WrongLevel { expected: String, found: String },
}

/// Half-open column ranges covering the level left to right.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segmentation {
    pub level_id: String,
    pub resolution: Resolution,
    pub width: usize,
    pub boundaries: Vec<(usize, usize)>,
}

impl Segmentation {
    pub fn len(&self) -> usize {
        self.boundaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundaries.is_empty()
    }

    pub fn segment_of(&self, x: i64) -> Result<usize, MixError> {
        segment_of(x, self)
    }

    /// Segment of a world-space x, clamped to the level.
    fn segment_at(&self, world_x: i32) -> usize {
        let col = (world_x.div_euclid(TILE) as i64).clamp(0, self.width as i64 - 1);
        segment_of(col, self).expect("clamped column is inside the level")
    }
}

pub fn segment_boundaries(level: &Level, resolution: Resolution) -> Result<Segmentation, MixError> {
    let (w, k) = (level.width as usize, resolution.segment_count());
    if w < k {
        return Err(MixError::LevelTooNarrow { width: w, segments: k });
    }
    Ok(Segmentation {
        level_id: level.id.clone(),
        resolution,
        width: w,
        boundaries: (0..k).map(|i| (i * w / k, (i + 1) * w / k)).collect(),
    })
}

pub fn segment_of(x: i64, seg: &Segmentation) -> Result<usize, MixError> {
    if x < 0 || x >= seg.width as i64 {
        return Err(MixError::OutOfBounds { x });
    }
    let x = x as usize;
    Ok(seg.boundaries.partition_point(|&(_, end)| end <= x))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub segmentation: Segmentation,
    pub slots: Vec<Option<String>>,
}

impl Assignment {
    pub fn empty(segmentation: Segmentation) -> Assignment {
        let slots = vec![None; segmentation.len()];
        Assignment { segmentation, slots }
    }

    pub fn uniform(segmentation: Segmentation, name: &str) -> Assignment {
        let slots = vec![Some(name.to_string()); segmentation.len()];
        Assignment { segmentation, slots }
    }

    pub fn new(segmentation: Segmentation, slots: Vec<Option<String>>) -> Result<Assignment, MixError> {
        if slots.len() != segmentation.len() {
            return Err(MixError::SlotCountMismatch {
                expected: segmentation.len(),
                found: slots.len(),
            });
        }
        Ok(Assignment { segmentation, slots })
    }

    pub fn is_complete(&self) -> bool {
        self.slots.iter().all(Option::is_some)
    }

    /// Every assigned name must be in the dataset.
    pub fn check_names(&self, dataset: &PolicyDataset) -> Result<(), MixError> {
        for name in self.slots.iter().flatten() {
            if dataset.get(name).is_none() {
                return Err(MixError::UnknownPolicyName(name.clone()));
            }
        }
        Ok(())
    }
}

/// Fills empty slots. With some slots assigned, the assigned names are
/// repeated in segment order into the gaps; with none, one name is drawn
/// from the dataset and used everywhere.
pub fn auto_assign<R: Rng + ?Sized>(
    assignment: &Assignment,
    dataset: &PolicyDataset,
    rng: &mut R,
) -> Result<Assignment, MixError> {
    let names: Vec<&str> = dataset.names().collect();
    auto_assign_names(assignment, &names, rng)
}

pub fn auto_assign_names<R: Rng + ?Sized>(
    assignment: &Assignment,
    names: &[&str],
    rng: &mut R,
) -> Result<Assignment, MixError> {
    if names.is_empty() {
        return Err(MixError::EmptyDataset);
    }
    let chosen: Vec<String> = assignment.slots.iter().flatten().cloned().collect();
    let mut out = assignment.clone();
    if chosen.is_empty() {
        let pick = names.choose(rng).expect("names is nonempty");
        out.slots.iter_mut().for_each(|s| *s = Some(pick.to_string()));
        return Ok(out);
    }
    let mut cycle = chosen.iter().cycle();
    for slot in out.slots.iter_mut().filter(|s| s.is_none()) {
        *slot = cycle.next().cloned();
    }
    Ok(out)
}

/// Plays the level switching policy by segment at each action start.
pub fn run_mixed(
    level: &Level,
    assignment: &Assignment,
    dataset: &PolicyDataset,
    seed: u64,
    max_ticks: u32,
) -> Result<Replay, MixError> {
    run_mixed_with(level, assignment, |n| dataset.get(n).map(|e| &e.policy), seed, max_ticks)
}

pub fn run_mixed_with<'p>(
    level: &Level,
    assignment: &Assignment,
    policies: impl Fn(&str) -> Option<&'p Policy>,
    seed: u64,
    max_ticks: u32,
) -> Result<Replay, MixError> {
    assert!(max_ticks > 0, "max_ticks must be positive");
    let seg = &assignment.segmentation;
    if seg.level_id != level.id {
        return Err(MixError::WrongLevel {
            expected: level.id.clone(),
            found: seg.level_id.clone(),
        });
    }
    if assignment.slots.len() != seg.len() {
        return Err(MixError::SlotCountMismatch {
            expected: seg.len(),
            found: assignment.slots.len(),
        });
    }
    let mut resolved = Vec::with_capacity(seg.len());
    for (i, slot) in assignment.slots.iter().enumerate() {
        let name = slot.as_deref().ok_or(MixError::UnassignedSlot(i))?;
        resolved.push(policies(name).ok_or_else(|| MixError::UnknownPolicyName(name.to_string()))?);
    }

    let mut state = WorldState::initial(level);
    let mut frames = vec![state.clone()];
    let mut actions = Vec::new();
    let mut current = seg.segment_at(state.mario.x);
    let mut marks = vec![(0, current)];
    while !state.is_terminal() && state.tick < max_ticks {
        let policy = resolved[seg.segment_at(state.mario.x)];
        let action = policy.lookup(&abstract_state(&state, level));
        actions.push((state.tick, action));
        run_macro_action(&mut state, level, action, |s| {
            let here = seg.segment_at(s.mario.x);
            if here != current {
                current = here;
                marks.push((s.tick, here));
            }
            frames.push(s.clone());
        })
        .expect("state checked non-terminal");
    }
    Ok(Replay {
        level_id: level.id.clone(),
        seed,
        actions,
        frames,
        segment_marks: Some(marks),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clip {
    pub level_id: String,
    pub seed: u64,
    pub segment_index: usize,
    pub policy: Option<String>,
    pub start_tick: u32,
    pub frames: Vec<WorldState>,
    pub duration_seconds: f64,
}

/// The first contiguous run of frames with Mario inside the segment.
pub fn extract_clip(replay: &Replay, seg: &Segmentation, segment_index: usize) -> Result<Clip, MixError> {
    if segment_index >= seg.len() {
        return Err(MixError::NoSuchSegment {
            index: segment_index,
            count: seg.len(),
        });
    }
    let inside = |f: &WorldState| seg.segment_at(f.mario.x) == segment_index;
    let start = replay
        .frames
        .iter()
        .position(inside)
        .ok_or(MixError::SegmentNeverVisited(segment_index))?;
    let len = replay.frames[start..].iter().take_while(|f| inside(f)).count();
    let frames = replay.frames[start..start + len].to_vec();
    Ok(Clip {
        level_id: replay.level_id.clone(),
        seed: replay.seed,
        segment_index,
        policy: None,
        start_tick: frames[0].tick,
        duration_seconds: frames.len() as f64 / FRAMES_PER_SECOND as f64,
        frames,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentFile {
    pub level_id: String,
    pub resolution: Resolution,
    pub slots: Vec<Option<String>>,
}

impl AssignmentFile {
    pub fn from_assignment(a: &Assignment) -> AssignmentFile {
        AssignmentFile {
            level_id: a.segmentation.level_id.clone(),
            resolution: a.segmentation.resolution,
            slots: a.slots.clone(),
        }
    }

    pub fn into_assignment(self, level: &Level) -> Result<Assignment, MixError> {
        if self.level_id != level.id {
            return Err(MixError::WrongLevel {
                expected: level.id.clone(),
                found: self.level_id,
            });
        }
        Assignment::new(segment_boundaries(level, self.resolution)?, self.slots)
    }
}
