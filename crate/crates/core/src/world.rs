//! Fixed-point simulation.
//!
//! Positions are in 1/256 tile units with `y` growing downwards. Mario and
//! enemies are one tile square; `x`, `y` address the top-left corner of the
//! box. Nothing in here touches floating point.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::action::{Action, Heading};
use crate::level::{Facing, Level, TileKind, TilePos};

pub const TILE: i32 = 256;
pub const WALK_SPEED: i32 = 32;
pub const RUN_SPEED: i32 = 64;
pub const GRAVITY: i32 = 16;
pub const JUMP_IMPULSE: i32 = -160;
pub const QUICK_JUMP_IMPULSE: i32 = -112;
pub const TERMINAL_FALL_SPEED: i32 = 128;
pub const ENEMY_SPEED: i32 = 16;
pub const STOMP_BOUNCE: i32 = -96;
/// How far below an enemy's top edge Mario's feet may have been on the
/// previous frame and still count as landing on it.
const STOMP_TOLERANCE: i32 = 32;

/// Frames per second used to convert ticks into seconds.
pub const FRAMES_PER_SECOND: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Ongoing,
    Won,
    Dead,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mario {
    pub x: i32,
    pub y: i32,
    pub vx: i32,
    pub vy: i32,
    pub facing: Facing,
    pub alive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Enemy {
    pub x: i32,
    pub y: i32,
    pub vy: i32,
    pub facing: Facing,
    pub alive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WorldState {
    pub mario: Mario,
    pub enemies: Vec<Enemy>,
    pub collected_coins: BTreeSet<TilePos>,
    pub hit_coin_blocks: BTreeSet<TilePos>,
    pub tick: u32,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("action applied to a terminal state ({0:?})")]
    ActionOnTerminalState(Outcome),
}

/// Per-frame controller input derived from a macro-action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameInput {
    pub vx: i32,
    pub jump_impulse: Option<i32>,
}

/// Frame budget and input profile of a macro-action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionPlan {
    pub speed: i32,
    pub impulse: Option<i32>,
    pub max_frames: u32,
    pub until_landing: bool,
}

impl ActionPlan {
    pub fn of(action: Action) -> ActionPlan {
        let (speed, impulse, max_frames, until_landing) = match action {
            Action::WalkLeft | Action::WalkRight => (WALK_SPEED, None, 8, false),
            Action::RunLeft | Action::RunRight => (RUN_SPEED, None, 8, false),
            Action::JumpLeft | Action::JumpRight => (RUN_SPEED, Some(JUMP_IMPULSE), 24, true),
            Action::QuickJumpLeft | Action::QuickJumpRight => {
                (WALK_SPEED, Some(QUICK_JUMP_IMPULSE), 12, true)
            }
            Action::NeutralJump => (0, Some(JUMP_IMPULSE), 24, true),
            Action::DoNothing => (0, None, 4, false),
        };
        let signed = match action.heading() {
            Heading::Left => -speed,
            Heading::Right => speed,
            Heading::Neutral => 0,
        };
        ActionPlan {
            speed: signed,
            impulse,
            max_frames,
            until_landing,
        }
    }
}

impl WorldState {
    pub fn initial(level: &Level) -> WorldState {
        WorldState {
            mario: Mario {
                x: level.spawn.x * TILE,
                y: level.spawn.y * TILE,
                vx: 0,
                vy: 0,
                facing: Facing::Right,
                alive: true,
            },
            enemies: level
                .enemy_spawns
                .iter()
                .map(|e| Enemy {
                    x: e.pos.x * TILE,
                    y: e.pos.y * TILE,
                    vy: 0,
                    facing: e.facing,
                    alive: true,
                })
                .collect(),
            collected_coins: BTreeSet::new(),
            hit_coin_blocks: BTreeSet::new(),
            tick: 0,
            outcome: Outcome::Ongoing,
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.outcome != Outcome::Ongoing
    }

    /// The tile as it currently looks: collected coins are gone and spent
    /// coin blocks are plain solid blocks. Out-of-bounds reads are `Empty`.
    pub fn tile(&self, level: &Level, x: i32, y: i32) -> TileKind {
        let pos = TilePos::new(x, y);
        match level.static_tile(x, y) {
            TileKind::Coin if self.collected_coins.contains(&pos) => TileKind::Empty,
            TileKind::CoinBlock if self.hit_coin_blocks.contains(&pos) => TileKind::Solid,
            t => t,
        }
    }

    pub fn coins(&self) -> usize {
        self.collected_coins.len() + self.hit_coin_blocks.len()
    }

    pub fn kills(&self) -> usize {
        self.enemies.iter().filter(|e| !e.alive).count()
    }

    /// Mario's tile column (floor of the left edge).
    pub fn mario_column(&self) -> i32 {
        self.mario.x.div_euclid(TILE)
    }

    pub fn mario_on_ground(&self, level: &Level) -> bool {
        on_ground(level, self.mario.x, self.mario.y)
    }
}

/// Solidity for collision purposes: the left and right borders are walls,
/// everything above and below the grid is open.
fn blocks(level: &Level, x: i32, y: i32) -> bool {
    if x < 0 || x >= level.width {
        return true;
    }
    level.static_tile(x, y).is_solid()
}

fn span(lo: i32) -> (i32, i32) {
    (lo.div_euclid(TILE), (lo + TILE - 1).div_euclid(TILE))
}

fn on_ground(level: &Level, x: i32, y: i32) -> bool {
    if y.rem_euclid(TILE) != 0 {
        return false;
    }
    let below = y.div_euclid(TILE) + 1;
    let (c0, c1) = span(x);
    (c0..=c1).any(|c| c >= 0 && c < level.width && blocks(level, c, below))
}

/// Moves a box horizontally and pushes it out of walls. Returns true if it
/// hit one.
fn move_horizontal(level: &Level, x: &mut i32, y: i32, vx: i32) -> bool {
    if vx == 0 {
        return false;
    }
    *x += vx;
    let (r0, r1) = span(y);
    let lead = if vx > 0 {
        (*x + TILE - 1).div_euclid(TILE)
    } else {
        x.div_euclid(TILE)
    };
    if (r0..=r1).any(|r| blocks(level, lead, r)) {
        *x = if vx > 0 { lead * TILE - TILE } else { (lead + 1) * TILE };
        true
    } else {
        false
    }
}

/// Applies gravity and vertical motion. Returns the row of a ceiling hit, if
/// any.
fn move_vertical(level: &Level, x: i32, y: &mut i32, vy: &mut i32) -> Option<i32> {
    *vy = (*vy + GRAVITY).min(TERMINAL_FALL_SPEED);
    *y += *vy;
    let (c0, c1) = span(x);
    if *vy > 0 {
        let row = (*y + TILE - 1).div_euclid(TILE);
        if (c0..=c1).any(|c| blocks(level, c, row)) {
            *y = row * TILE - TILE;
            *vy = 0;
        }
        None
    } else if *vy < 0 {
        let row = y.div_euclid(TILE);
        if (c0..=c1).any(|c| blocks(level, c, row)) {
            *y = (row + 1) * TILE;
            *vy = 0;
            return Some(row);
        }
        None
    } else {
        None
    }
}

fn overlaps(ax: i32, ay: i32, bx: i32, by: i32) -> bool {
    (ax - bx).abs() < TILE && (ay - by).abs() < TILE
}

/// Advances the world by one frame. Terminal states are left untouched.
pub fn step_frame(state: &mut WorldState, level: &Level, input: FrameInput) {
    if state.is_terminal() {
        return;
    }
    let grounded = state.mario_on_ground(level);
    let m = &mut state.mario;
    m.vx = input.vx;
    if input.vx > 0 {
        m.facing = Facing::Right;
    } else if input.vx < 0 {
        m.facing = Facing::Left;
    }
    if let (Some(impulse), true) = (input.jump_impulse, grounded) {
        m.vy = impulse;
    }

    move_horizontal(level, &mut m.x, m.y, m.vx);
    let prev_y = m.y;
    if let Some(row) = move_vertical(level, m.x, &mut m.y, &mut m.vy) {
        let (c0, c1) = span(m.x);
        for c in c0..=c1 {
            if level.static_tile(c, row) == TileKind::CoinBlock {
                state.hit_coin_blocks.insert(TilePos::new(c, row));
            }
        }
    }

    let (mx, my) = (state.mario.x, state.mario.y);
    let (c0, c1) = span(mx);
    let (r0, r1) = span(my);
    for r in r0..=r1 {
        for c in c0..=c1 {
            if level.static_tile(c, r) == TileKind::Coin {
                state.collected_coins.insert(TilePos::new(c, r));
            }
        }
    }

    for e in state.enemies.iter_mut().filter(|e| e.alive) {
        step_enemy(level, e);
    }

    let descending = my > prev_y;
    for e in state.enemies.iter_mut().filter(|e| e.alive) {
        if !overlaps(state.mario.x, state.mario.y, e.x, e.y) {
            continue;
        }
        if descending && prev_y + TILE <= e.y + STOMP_TOLERANCE {
            e.alive = false;
            state.mario.vy = STOMP_BOUNCE;
        } else {
            state.mario.alive = false;
        }
    }

    state.tick += 1;
    if state.mario.y >= level.height * TILE {
        state.mario.alive = false;
    }
    if !state.mario.alive {
        state.outcome = Outcome::Dead;
    } else if state.mario.x >= level.goal_x * TILE {
        state.outcome = Outcome::Won;
    }
}

fn step_enemy(level: &Level, e: &mut Enemy) {
    let grounded = on_ground(level, e.x, e.y);
    let nx = e.x + e.facing.sign() * ENEMY_SPEED;
    let lead = match e.facing {
        Facing::Right => (nx + TILE - 1).div_euclid(TILE),
        Facing::Left => nx.div_euclid(TILE),
    };
    let (r0, r1) = span(e.y);
    let wall = (r0..=r1).any(|r| blocks(level, lead, r));
    let ledge = grounded && !blocks(level, lead, e.y.div_euclid(TILE) + 1);
    if wall || ledge {
        e.facing = e.facing.flipped();
    } else {
        e.x = nx;
    }
    move_vertical(level, e.x, &mut e.y, &mut e.vy);
}

/// Runs one macro-action, calling `on_frame` after every simulated frame.
pub fn run_macro_action(
    state: &mut WorldState,
    level: &Level,
    action: Action,
    mut on_frame: impl FnMut(&WorldState),
) -> Result<(), SimError> {
    if state.is_terminal() {
        return Err(SimError::ActionOnTerminalState(state.outcome));
    }
    let plan = ActionPlan::of(action);
    for frame in 0..plan.max_frames {
        let input = FrameInput {
            vx: plan.speed,
            jump_impulse: if frame == 0 { plan.impulse } else { None },
        };
        step_frame(state, level, input);
        on_frame(state);
        if state.is_terminal() {
            break;
        }
        if plan.until_landing && frame >= 1 && state.mario_on_ground(level) {
            break;
        }
    }
    Ok(())
}

pub fn apply_macro_action(
    state: &WorldState,
    level: &Level,
    action: Action,
) -> Result<WorldState, SimError> {
    let mut next = state.clone();
    run_macro_action(&mut next, level, action, |_| {})?;
    Ok(next)
}
