//! Line-oriented reward specification language.
//!
//! ```text
//! # comment
//! state terrain[4]=Coin +5
//! state enemy1.dx=4 -2
//! state cliff=true -1
//! action RunRight +1
//! terminal won 100
//! terminal dead -100
//! ```
//!
//! Selectors: `terrain[0..8]` (values `Empty`, `Solid`, `CoinBlock`, `Coin`),
//! `enemy1.present` / `enemy2.present` and `cliff` (`true`/`false`),
//! `enemy1.dx`, `enemy1.dy`, `enemy2.dx`, `enemy2.dy` (`0`..`6`).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::abstraction::{AbstractState, EnemySlot, BUCKET_MAX};
use crate::action::Action;
use crate::level::TileKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EnemyIndex {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Selector {
    Terrain(u8),
    EnemyPresent(EnemyIndex),
    EnemyDx(EnemyIndex),
    EnemyDy(EnemyIndex),
    Cliff,
}

impl Selector {
    fn parse(text: &str) -> Option<Selector> {
        if let Some(rest) = text.strip_prefix("terrain[") {
            let idx: u8 = rest.strip_suffix(']')?.parse().ok()?;
            return (idx < 9).then_some(Selector::Terrain(idx));
        }
        if text == "cliff" {
            return Some(Selector::Cliff);
        }
        let (slot, field) = text.split_once('.')?;
        let slot = match slot {
            "enemy1" => EnemyIndex::First,
            "enemy2" => EnemyIndex::Second,
            _ => return None,
        };
        match field {
            "present" => Some(Selector::EnemyPresent(slot)),
            "dx" => Some(Selector::EnemyDx(slot)),
            "dy" => Some(Selector::EnemyDy(slot)),
            _ => None,
        }
    }

    /// Parses a value in this selector's domain into its numeric form.
    fn parse_value(self, text: &str) -> Option<u8> {
        match self {
            Selector::Terrain(_) => TileKind::from_name(text).map(|t| t as u8),
            Selector::EnemyPresent(_) | Selector::Cliff => match text {
                "true" | "1" => Some(1),
                "false" | "0" => Some(0),
                _ => None,
            },
            Selector::EnemyDx(_) | Selector::EnemyDy(_) => {
                text.parse::<u8>().ok().filter(|v| *v <= BUCKET_MAX)
            }
        }
    }

    fn format_value(self, value: u8) -> String {
        match self {
            Selector::Terrain(_) => TileKind::from_digit(value as u64)
                .map(|t| t.name().to_string())
                .unwrap_or_else(|| value.to_string()),
            Selector::EnemyPresent(_) | Selector::Cliff => (value == 1).to_string(),
            Selector::EnemyDx(_) | Selector::EnemyDy(_) => value.to_string(),
        }
    }

    pub fn read(self, s: &AbstractState) -> u8 {
        let slot = |i: EnemyIndex| -> EnemySlot {
            match i {
                EnemyIndex::First => s.enemy1,
                EnemyIndex::Second => s.enemy2,
            }
        };
        match self {
            Selector::Terrain(i) => s.terrain[i as usize] as u8,
            Selector::EnemyPresent(i) => slot(i).present as u8,
            Selector::EnemyDx(i) => slot(i).dx,
            Selector::EnemyDy(i) => slot(i).dy,
            Selector::Cliff => s.cliff_ahead as u8,
        }
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let slot = |i: &EnemyIndex| match i {
            EnemyIndex::First => "enemy1",
            EnemyIndex::Second => "enemy2",
        };
        match self {
            Selector::Terrain(i) => write!(f, "terrain[{i}]"),
            Selector::EnemyPresent(i) => write!(f, "{}.present", slot(i)),
            Selector::EnemyDx(i) => write!(f, "{}.dx", slot(i)),
            Selector::EnemyDy(i) => write!(f, "{}.dy", slot(i)),
            Selector::Cliff => f.write_str("cliff"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateClause {
    pub selector: Selector,
    pub value: u8,
    pub reward: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TerminalRewards {
    pub won: f64,
    pub dead: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardSpec {
    pub name: String,
    pub state_clauses: Vec<StateClause>,
    pub action_clauses: Vec<(Action, f64)>,
    pub terminal_rewards: TerminalRewards,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RewardSpecError {
    #[error("line {line}: unknown variable `{name}`")]
    UnknownVariable { line: usize, name: String },
    #[error("line {line}: unknown action `{name}`")]
    UnknownAction { line: usize, name: String },
    #[error("line {line}: duplicate clause")]
    DuplicateClause { line: usize },
    #[error("line {0}: malformed clause")]
    MalformedLine(usize),
}

fn parse_number(text: &str) -> Option<f64> {
    text.parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn parse_reward_spec(name: &str, text: &str) -> Result<RewardSpec, RewardSpecError> {
    let mut spec = RewardSpec {
        name: name.to_string(),
        state_clauses: Vec::new(),
        action_clauses: Vec::new(),
        terminal_rewards: TerminalRewards::default(),
    };
    let mut seen_terminal = [false; 2];
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let words: Vec<&str> = content.split_whitespace().collect();
        let malformed = RewardSpecError::MalformedLine(line);
        match words.as_slice() {
            ["state", assignment, number] => {
                let (var, value) = assignment.split_once('=').ok_or(malformed.clone())?;
                let selector = Selector::parse(var).ok_or_else(|| RewardSpecError::UnknownVariable {
                    line,
                    name: var.to_string(),
                })?;
                let value = selector.parse_value(value).ok_or(malformed.clone())?;
                let reward = parse_number(number).ok_or(malformed)?;
                if spec
                    .state_clauses
                    .iter()
                    .any(|c| c.selector == selector && c.value == value)
                {
                    return Err(RewardSpecError::DuplicateClause { line });
                }
                spec.state_clauses.push(StateClause {
                    selector,
                    value,
                    reward,
                });
            }
            ["action", action, number] => {
                let action: Action = action.parse().map_err(|_| RewardSpecError::UnknownAction {
                    line,
                    name: action.to_string(),
                })?;
                let reward = parse_number(number).ok_or(malformed)?;
                if spec.action_clauses.iter().any(|(a, _)| *a == action) {
                    return Err(RewardSpecError::DuplicateClause { line });
                }
                spec.action_clauses.push((action, reward));
            }
            ["terminal", which, number] => {
                let reward = parse_number(number).ok_or(malformed.clone())?;
                let slot = match *which {
                    "won" => 0,
                    "dead" => 1,
                    _ => return Err(malformed),
                };
                if std::mem::replace(&mut seen_terminal[slot], true) {
                    return Err(RewardSpecError::DuplicateClause { line });
                }
                if slot == 0 {
                    spec.terminal_rewards.won = reward;
                } else {
                    spec.terminal_rewards.dead = reward;
                }
            }
            _ => return Err(malformed),
        }
    }
    Ok(spec)
}

impl RewardSpec {
    /// Immediate reward of taking `a` in `s`. Terminal rewards are not
    /// included; the solver credits them on entering the outcome.
    pub fn reward(&self, s: &AbstractState, a: Action) -> f64 {
        let state: f64 = self
            .state_clauses
            .iter()
            .filter(|c| c.selector.read(s) == c.value)
            .map(|c| c.reward)
            .sum();
        let action = self
            .action_clauses
            .iter()
            .find(|(x, _)| *x == a)
            .map_or(0.0, |(_, r)| *r);
        state + action
    }

    /// Multiplies every reward, terminal ones included, by `factor`.
    pub fn scaled(&self, factor: f64) -> RewardSpec {
        RewardSpec {
            name: self.name.clone(),
            state_clauses: self
                .state_clauses
                .iter()
                .map(|c| StateClause {
                    reward: c.reward * factor,
                    ..*c
                })
                .collect(),
            action_clauses: self
                .action_clauses
                .iter()
                .map(|&(a, r)| (a, r * factor))
                .collect(),
            terminal_rewards: TerminalRewards {
                won: self.terminal_rewards.won * factor,
                dead: self.terminal_rewards.dead * factor,
            },
        }
    }

    /// Renders the spec back into the DSL.
    pub fn to_dsl(&self) -> String {
        let mut out = String::new();
        for c in &self.state_clauses {
            out += &format!(
                "state {}={} {:+}\n",
                c.selector,
                c.selector.format_value(c.value),
                c.reward
            );
        }
        for (a, r) in &self.action_clauses {
            out += &format!("action {a} {r:+}\n");
        }
        out += &format!("terminal won {}\n", self.terminal_rewards.won);
        out += &format!("terminal dead {}\n", self.terminal_rewards.dead);
        out
    }
}

const BUILTIN_SOURCES: [(&str, &str); 11] = [
    ("Speedrunner", include_str!("../rewards/speedrunner.rf")),
    ("Stroller", include_str!("../rewards/stroller.rf")),
    ("CoinCollector", include_str!("../rewards/coin_collector.rf")),
    ("CoinIgnorer-Speed", include_str!("../rewards/coin_ignorer_speed.rf")),
    ("EnemyHunter", include_str!("../rewards/enemy_hunter.rf")),
    ("Pacifist", include_str!("../rewards/pacifist.rf")),
    ("Bunny", include_str!("../rewards/bunny.rf")),
    ("GroundHugger", include_str!("../rewards/ground_hugger.rf")),
    ("Hunter-Collector", include_str!("../rewards/hunter_collector.rf")),
    ("Cautious-Collector", include_str!("../rewards/cautious_collector.rf")),
    ("Bunny-Speedrunner", include_str!("../rewards/bunny_speedrunner.rf")),
];

/// The eleven bundled playstyle reward functions.
pub fn builtin_reward_specs() -> Vec<RewardSpec> {
    BUILTIN_SOURCES
        .iter()
        .map(|(name, text)| parse_reward_spec(name, text).expect("bundled reward specs parse"))
        .collect()
}

/// Source text of a bundled spec.
pub fn builtin_source(name: &str) -> Option<&'static str> {
    BUILTIN_SOURCES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
}

/// Per-action reward table for `s`, indexed by [`Action::index`].
pub fn reward_row(spec: &RewardSpec, s: &AbstractState) -> [f64; crate::ACTION_COUNT] {
    Action::ALL.map(|a| spec.reward(s, a))
}
