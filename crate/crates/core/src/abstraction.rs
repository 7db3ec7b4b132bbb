//! Discretized view of the world used as the MDP state.
//!
//! Terrain is a 3x3 window of tiles centered on the tile that holds Mario's
//! center (index `row * 3 + col`, row 0 above Mario, col 0 behind-left).
//! The two nearest living enemies within [`ENEMY_RADIUS_TILES`] are stored
//! as bucketed displacements, and a flag records whether a pit opens in the
//! two columns ahead of Mario.

use serde::{Deserialize, Serialize};

use crate::level::{Facing, Level, TileKind};
use crate::world::{WorldState, TILE};

pub const ENEMY_RADIUS_TILES: i64 = 6;
pub const BUCKET_MAX: u8 = 6;
const BUCKET_CENTER: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct EnemySlot {
    pub present: bool,
    pub dx: u8,
    pub dy: u8,
}

impl EnemySlot {
    pub const ABSENT: EnemySlot = EnemySlot {
        present: false,
        dx: 0,
        dy: 0,
    };

    pub fn at(dx: u8, dy: u8) -> EnemySlot {
        EnemySlot {
            present: true,
            dx,
            dy,
        }
    }

    fn code(self) -> u64 {
        if self.present {
            (1 << 6) | ((self.dx as u64) << 3) | self.dy as u64
        } else {
            0
        }
    }

    fn from_code(code: u64) -> Option<EnemySlot> {
        if code == 0 {
            return Some(EnemySlot::ABSENT);
        }
        let (dx, dy) = (((code >> 3) & 7) as u8, (code & 7) as u8);
        (code >> 6 == 1 && dx <= BUCKET_MAX && dy <= BUCKET_MAX).then_some(EnemySlot::at(dx, dy))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AbstractState {
    pub terrain: [TileKind; 9],
    pub enemy1: EnemySlot,
    pub enemy2: EnemySlot,
    pub cliff_ahead: bool,
}

/// Largest code an [`AbstractState`] can take, exclusive.
pub const STATE_CODE_LIMIT: u64 = 1 << 33;

impl AbstractState {
    pub const CENTER: usize = 4;

    /// Canonical integer: 18 bits of base-4 terrain digits (cell 0 most
    /// significant), 7 bits per enemy slot (`present`, 3-bit dx, 3-bit dy),
    /// then the cliff bit.
    pub fn encode(&self) -> u64 {
        let terrain = self.terrain.iter().fold(0u64, |acc, t| acc * 4 + t.digit());
        let mut code = terrain;
        code = (code << 7) | self.enemy1.code();
        code = (code << 7) | self.enemy2.code();
        (code << 1) | self.cliff_ahead as u64
    }

    pub fn decode(code: u64) -> Option<AbstractState> {
        if code >= STATE_CODE_LIMIT {
            return None;
        }
        let cliff_ahead = code & 1 == 1;
        let enemy2 = EnemySlot::from_code((code >> 1) & 0x7f)?;
        let enemy1 = EnemySlot::from_code((code >> 8) & 0x7f)?;
        if !enemy1.present && enemy2.present {
            return None;
        }
        let mut t = code >> 15;
        let mut terrain = [TileKind::Empty; 9];
        for cell in terrain.iter_mut().rev() {
            *cell = TileKind::from_digit(t % 4)?;
            t /= 4;
        }
        Some(AbstractState {
            terrain,
            enemy1,
            enemy2,
            cliff_ahead,
        })
    }
}

/// Rounds `num / TILE` to the nearest integer, halves away from zero.
fn round_tiles(num: i32) -> i32 {
    let half = TILE / 2;
    if num >= 0 {
        (num + half) / TILE
    } else {
        -((-num + half) / TILE)
    }
}

fn bucket(delta: i32) -> u8 {
    (round_tiles(delta).clamp(-BUCKET_CENTER, BUCKET_CENTER) + BUCKET_CENTER) as u8
}

/// Window cell contents; outside the grid, rows below the floor read as
/// solid and everything else as empty.
fn window_tile(state: &WorldState, level: &Level, x: i32, y: i32) -> TileKind {
    if y >= level.height {
        TileKind::Solid
    } else {
        state.tile(level, x, y)
    }
}

fn column_is_pit(state: &WorldState, level: &Level, col: i32, from_row: i32) -> bool {
    if col < 0 || col >= level.width {
        return false;
    }
    (from_row.max(0)..level.height).all(|r| !state.tile(level, col, r).is_solid())
}

pub fn abstract_state(state: &WorldState, level: &Level) -> AbstractState {
    let m = &state.mario;
    let cx = (m.x + TILE / 2).div_euclid(TILE);
    let cy = (m.y + TILE / 2).div_euclid(TILE);

    let mut terrain = [TileKind::Empty; 9];
    for (i, cell) in terrain.iter_mut().enumerate() {
        let dx = (i % 3) as i32 - 1;
        let dy = (i / 3) as i32 - 1;
        *cell = window_tile(state, level, cx + dx, cy + dy);
    }

    let radius = ENEMY_RADIUS_TILES * TILE as i64;
    let mut near: Vec<(i64, usize, i32, i32)> = state
        .enemies
        .iter()
        .enumerate()
        .filter(|(_, e)| e.alive)
        .filter_map(|(i, e)| {
            let dx = e.x - m.x;
            let dy = e.y - m.y;
            let d2 = dx as i64 * dx as i64 + dy as i64 * dy as i64;
            (d2 <= radius * radius).then_some((d2, i, dx, dy))
        })
        .collect();
    near.sort_unstable();
    let slot = |k: usize| {
        near.get(k)
            .map(|&(_, _, dx, dy)| EnemySlot::at(bucket(dx), bucket(dy)))
            .unwrap_or(EnemySlot::ABSENT)
    };

    let step = match m.facing {
        Facing::Right => 1,
        Facing::Left => -1,
    };
    let cliff_ahead = (1..=2).any(|k| column_is_pit(state, level, cx + step * k, cy + 1));

    AbstractState {
        terrain,
        enemy1: slot(0),
        enemy2: slot(1),
        cliff_ahead,
    }
}

/// Where a completed action led: another abstract state, or one of the two
/// absorbing outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Successor {
    State(AbstractState),
    Won,
    Dead,
}

pub const WON_CODE: u64 = STATE_CODE_LIMIT;
pub const DEAD_CODE: u64 = STATE_CODE_LIMIT + 1;

impl Successor {
    pub fn encode(&self) -> u64 {
        match self {
            Successor::State(s) => s.encode(),
            Successor::Won => WON_CODE,
            Successor::Dead => DEAD_CODE,
        }
    }

    pub fn decode(code: u64) -> Option<Successor> {
        match code {
            WON_CODE => Some(Successor::Won),
            DEAD_CODE => Some(Successor::Dead),
            c => AbstractState::decode(c).map(Successor::State),
        }
    }

    pub fn of(state: &WorldState, level: &Level) -> Successor {
        match state.outcome {
            crate::world::Outcome::Ongoing => Successor::State(abstract_state(state, level)),
            crate::world::Outcome::Won => Successor::Won,
            crate::world::Outcome::Dead => Successor::Dead,
        }
    }
}
