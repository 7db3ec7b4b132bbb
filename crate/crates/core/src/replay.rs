//! Episode recording and the replay file format.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::action::Action;
use crate::level::Level;
use crate::world::{run_macro_action, SimError, WorldState, FRAMES_PER_SECOND};

/// A recorded episode. `frames[i]` is the world at tick `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Replay {
    pub level_id: String,
    pub seed: u64,
    pub actions: Vec<(u32, Action)>,
    pub frames: Vec<WorldState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segment_marks: Option<Vec<(u32, usize)>>,
}

impl Replay {
    pub fn final_state(&self) -> &WorldState {
        self.frames.last().expect("replay always holds the initial frame")
    }

    pub fn duration_seconds(&self) -> f64 {
        self.frames.len() as f64 / FRAMES_PER_SECOND as f64
    }

    pub fn checksum(&self) -> u64 {
        frames_checksum(&self.frames)
    }
}

/// Runs `controller` from the level's spawn until the episode ends or the
/// tick counter reaches `max_ticks`. Actions always run to completion, so the
/// final tick may overshoot `max_ticks` by less than one action.
pub fn record_episode(
    level: &Level,
    mut controller: impl FnMut(&WorldState) -> Action,
    seed: u64,
    max_ticks: u32,
) -> Replay {
    assert!(max_ticks > 0, "max_ticks must be positive");
    let mut state = WorldState::initial(level);
    let mut frames = vec![state.clone()];
    let mut actions = Vec::new();
    while !state.is_terminal() && state.tick < max_ticks {
        let action = controller(&state);
        actions.push((state.tick, action));
        run_macro_action(&mut state, level, action, |s| frames.push(s.clone()))
            .expect("state checked non-terminal");
    }
    Replay {
        level_id: level.id.clone(),
        seed,
        actions,
        frames,
        segment_marks: None,
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("malformed replay file: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("replay is for level `{found}`, expected `{expected}`")]
    WrongLevel { expected: String, found: String },
    #[error("action {index} starts at tick {expected} but the simulation is at tick {actual}")]
    TickMismatch {
        index: usize,
        expected: u32,
        actual: u32,
    },
    #[error("action {index} was issued after the episode ended")]
    Simulation {
        index: usize,
        #[source]
        source: SimError,
    },
    #[error("bad checksum literal `{0}`")]
    BadChecksum(String),
    #[error("checksum mismatch: file says {stored:016x}, frames hash to {actual:016x}")]
    ChecksumMismatch { stored: u64, actual: u64 },
}

/// Re-simulates a list of timed actions from the level's initial state.
pub fn resimulate(level: &Level, actions: &[(u32, Action)]) -> Result<Vec<WorldState>, ReplayError> {
    let mut state = WorldState::initial(level);
    let mut frames = vec![state.clone()];
    for (index, &(tick, action)) in actions.iter().enumerate() {
        if tick != state.tick {
            return Err(ReplayError::TickMismatch {
                index,
                expected: tick,
                actual: state.tick,
            });
        }
        run_macro_action(&mut state, level, action, |s| frames.push(s.clone()))
            .map_err(|source| ReplayError::Simulation { index, source })?;
    }
    Ok(frames)
}

/// SHA-256 over the canonical JSON of every frame, truncated to 64 bits.
pub fn frames_checksum(frames: &[WorldState]) -> u64 {
    let mut hasher = Sha256::new();
    for f in frames {
        hasher.update(serde_json::to_vec(f).expect("world state serializes"));
        hasher.update(b"\n");
    }
    let digest = hasher.finalize();
    u64::from_be_bytes(digest[..8].try_into().unwrap())
}

/// On-disk form: frames are not stored, only regenerated and checked.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplayFile {
    pub level_id: String,
    pub seed: u64,
    pub actions: Vec<(u32, Action)>,
    #[serde(default)]
    pub segment_marks: Option<Vec<(u32, usize)>>,
    pub checksum: String,
}

impl ReplayFile {
    pub fn from_replay(replay: &Replay) -> ReplayFile {
        ReplayFile {
            level_id: replay.level_id.clone(),
            seed: replay.seed,
            actions: replay.actions.clone(),
            segment_marks: replay.segment_marks.clone(),
            checksum: format!("{:016x}", replay.checksum()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("replay file serializes")
    }

    pub fn from_json(text: &str) -> Result<ReplayFile, ReplayError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Rebuilds the frames against `level` and verifies the checksum.
    pub fn into_replay(self, level: &Level) -> Result<Replay, ReplayError> {
        if self.level_id != level.id {
            return Err(ReplayError::WrongLevel {
                expected: level.id.clone(),
                found: self.level_id,
            });
        }
        let stored = u64::from_str_radix(&self.checksum, 16)
            .map_err(|_| ReplayError::BadChecksum(self.checksum.clone()))?;
        let frames = resimulate(level, &self.actions)?;
        let actual = frames_checksum(&frames);
        if actual != stored {
            return Err(ReplayError::ChecksumMismatch { stored, actual });
        }
        Ok(Replay {
            level_id: self.level_id,
            seed: self.seed,
            actions: self.actions,
            frames,
            segment_marks: self.segment_marks,
        })
    }
}
