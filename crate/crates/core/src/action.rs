//! The macro-action alphabet.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Number of macro-actions available to the bot.
pub const ACTION_COUNT: usize = 10;

/// A temporally extended input. The declaration order is also the
/// tie-breaking order used by the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Action {
    WalkLeft,
    WalkRight,
    RunLeft,
    RunRight,
    JumpLeft,
    JumpRight,
    QuickJumpLeft,
    QuickJumpRight,
    NeutralJump,
    DoNothing,
}

/// Horizontal direction of an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Heading {
    Left,
    Right,
    Neutral,
}

impl Action {
    pub const ALL: [Action; ACTION_COUNT] = [
        Action::WalkLeft,
        Action::WalkRight,
        Action::RunLeft,
        Action::RunRight,
        Action::JumpLeft,
        Action::JumpRight,
        Action::QuickJumpLeft,
        Action::QuickJumpRight,
        Action::NeutralJump,
        Action::DoNothing,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Action> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::WalkLeft => "WalkLeft",
            Action::WalkRight => "WalkRight",
            Action::RunLeft => "RunLeft",
            Action::RunRight => "RunRight",
            Action::JumpLeft => "JumpLeft",
            Action::JumpRight => "JumpRight",
            Action::QuickJumpLeft => "QuickJumpLeft",
            Action::QuickJumpRight => "QuickJumpRight",
            Action::NeutralJump => "NeutralJump",
            Action::DoNothing => "DoNothing",
        }
    }

    pub fn heading(self) -> Heading {
        match self {
            Action::WalkLeft | Action::RunLeft | Action::JumpLeft | Action::QuickJumpLeft => {
                Heading::Left
            }
            Action::WalkRight | Action::RunRight | Action::JumpRight | Action::QuickJumpRight => {
                Heading::Right
            }
            Action::NeutralJump | Action::DoNothing => Heading::Neutral,
        }
    }

    pub fn is_jump(self) -> bool {
        matches!(
            self,
            Action::JumpLeft
                | Action::JumpRight
                | Action::QuickJumpLeft
                | Action::QuickJumpRight
                | Action::NeutralJump
        )
    }

    /// The same action with left and right swapped.
    pub fn mirrored(self) -> Action {
        match self {
            Action::WalkLeft => Action::WalkRight,
            Action::WalkRight => Action::WalkLeft,
            Action::RunLeft => Action::RunRight,
            Action::RunRight => Action::RunLeft,
            Action::JumpLeft => Action::JumpRight,
            Action::JumpRight => Action::JumpLeft,
            Action::QuickJumpLeft => Action::QuickJumpRight,
            Action::QuickJumpRight => Action::QuickJumpLeft,
            other => other,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown action `{0}`")]
pub struct UnknownAction(pub String);

impl FromStr for Action {
    type Err = UnknownAction;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|a| a.name() == s)
            .ok_or_else(|| UnknownAction(s.to_string()))
    }
}
