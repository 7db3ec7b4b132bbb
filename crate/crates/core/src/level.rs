//! ASCII level format.
//!
//! One character per tile, rows top to bottom:
//!
//! | char | meaning                           |
//! |------|-----------------------------------|
//! | `.`  | empty                             |
//! | `#`  | solid ground / wall               |
//! | `?`  | coin block (solid, pays on a hit) |
//! | `o`  | coin                              |
//! | `M`  | Mario spawn (empty tile)          |
//! | `e`  | enemy spawn (empty tile)          |
//! | `G`  | goal column marker (empty tile)   |

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TileKind {
    Empty,
    Solid,
    CoinBlock,
    Coin,
}

impl TileKind {
    pub const ALL: [TileKind; 4] = [
        TileKind::Empty,
        TileKind::Solid,
        TileKind::CoinBlock,
        TileKind::Coin,
    ];

    pub fn is_solid(self) -> bool {
        matches!(self, TileKind::Solid | TileKind::CoinBlock)
    }

    pub fn digit(self) -> u64 {
        self as u64
    }

    pub fn from_digit(d: u64) -> Option<TileKind> {
        Self::ALL.get(d as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            TileKind::Empty => "Empty",
            TileKind::Solid => "Solid",
            TileKind::CoinBlock => "CoinBlock",
            TileKind::Coin => "Coin",
        }
    }

    pub fn from_name(s: &str) -> Option<TileKind> {
        Self::ALL.iter().copied().find(|t| t.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Facing {
    Left,
    Right,
}

impl Facing {
    pub fn sign(self) -> i32 {
        match self {
            Facing::Left => -1,
            Facing::Right => 1,
        }
    }

    pub fn flipped(self) -> Facing {
        match self {
            Facing::Left => Facing::Right,
            Facing::Right => Facing::Left,
        }
    }
}

/// Integer tile coordinate; `y` grows downwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TilePos {
    pub x: i32,
    pub y: i32,
}

impl TilePos {
    pub fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnemySpawn {
    pub pos: TilePos,
    pub facing: Facing,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level {
    pub id: String,
    pub width: i32,
    pub height: i32,
    tiles: Vec<TileKind>,
    pub spawn: TilePos,
    pub goal_x: i32,
    pub enemy_spawns: Vec<EnemySpawn>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LevelError {
    #[error("level file is empty")]
    Empty,
    #[error("ragged grid: row {row} has {found} columns, expected {expected}")]
    RaggedGrid {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("unknown tile character {ch:?} at row {row}, column {col}")]
    UnknownTile { ch: char, row: usize, col: usize },
    #[error("level has no spawn marker `M`")]
    MissingSpawn,
    #[error("level has more than one spawn marker `M`")]
    DuplicateSpawn,
    #[error("level has no goal marker `G`")]
    MissingGoal,
    #[error("goal markers found in columns {0} and {1}")]
    ConflictingGoal(i32, i32),
    #[error("{what} at ({x}, {y}) is not standing on solid ground")]
    NotOnGround { what: &'static str, x: i32, y: i32 },
}

pub fn parse_level(id: &str, text: &str) -> Result<Level, LevelError> {
    let rows: Vec<&str> = text
        .split('\n')
        .map(|r| r.strip_suffix('\r').unwrap_or(r))
        .collect();
    // a single trailing newline is not an extra row
    let rows: &[&str] = match rows.split_last() {
        Some((&"", rest)) => rest,
        _ => &rows,
    };
    if rows.is_empty() || rows[0].is_empty() {
        return Err(LevelError::Empty);
    }
    let width = rows[0].chars().count();
    let mut tiles = Vec::with_capacity(width * rows.len());
    let mut spawn = None;
    let mut goal_x: Option<i32> = None;
    let mut enemy_spawns = Vec::new();

    for (row, line) in rows.iter().enumerate() {
        let found = line.chars().count();
        if found != width {
            return Err(LevelError::RaggedGrid {
                row,
                expected: width,
                found,
            });
        }
        for (col, ch) in line.chars().enumerate() {
            let pos = TilePos::new(col as i32, row as i32);
            let tile = match ch {
                '.' => TileKind::Empty,
                '#' => TileKind::Solid,
                '?' => TileKind::CoinBlock,
                'o' => TileKind::Coin,
                'M' => {
                    if spawn.replace(pos).is_some() {
                        return Err(LevelError::DuplicateSpawn);
                    }
                    TileKind::Empty
                }
                'e' => {
                    enemy_spawns.push(EnemySpawn {
                        pos,
                        facing: Facing::Left,
                    });
                    TileKind::Empty
                }
                'G' => {
                    match goal_x {
                        Some(g) if g != pos.x => return Err(LevelError::ConflictingGoal(g, pos.x)),
                        _ => goal_x = Some(pos.x),
                    }
                    TileKind::Empty
                }
                other => return Err(LevelError::UnknownTile { ch: other, row, col }),
            };
            tiles.push(tile);
        }
    }

    let level = Level {
        id: id.to_string(),
        width: width as i32,
        height: rows.len() as i32,
        tiles,
        spawn: spawn.ok_or(LevelError::MissingSpawn)?,
        goal_x: goal_x.ok_or(LevelError::MissingGoal)?,
        enemy_spawns,
    };
    level.check_grounded("spawn", level.spawn)?;
    for e in &level.enemy_spawns {
        level.check_grounded("enemy spawn", e.pos)?;
    }
    Ok(level)
}

#[derive(Debug, thiserror::Error)]
pub enum LevelDirError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: LevelError },
}

/// Loads every `*.txt` file in `dir`, sorted by file name. The level id is
/// the file stem.
pub fn load_level_dir(dir: &Path) -> Result<Vec<Level>, LevelDirError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| LevelDirError::Io { path, source }
    };
    let mut paths = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io(dir))? {
        let path = entry.map_err(io(dir))?.path();
        if path.extension().is_some_and(|e| e == "txt") && path.is_file() {
            paths.push(path);
        }
    }
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let text = std::fs::read_to_string(&path).map_err(io(&path))?;
            let id = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            parse_level(&id, &text).map_err(|source| LevelDirError::Parse { path, source })
        })
        .collect()
}

const BUNDLED: [(&str, &str); 3] = [
    ("meadow", include_str!("../levels/meadow.txt")),
    ("quarry", include_str!("../levels/quarry.txt")),
    ("fortress", include_str!("../levels/fortress.txt")),
];

/// The three levels shipped with the crate, 150 columns each.
pub fn bundled_levels() -> Vec<Level> {
    BUNDLED
        .iter()
        .map(|(id, text)| parse_level(id, text).expect("bundled levels parse"))
        .collect()
}

impl Level {
    fn check_grounded(&self, what: &'static str, pos: TilePos) -> Result<(), LevelError> {
        if self.static_tile(pos.x, pos.y + 1).is_solid() {
            Ok(())
        } else {
            Err(LevelError::NotOnGround {
                what,
                x: pos.x,
                y: pos.y,
            })
        }
    }

    pub fn in_bounds(&self, x: i32, y: i32) -> bool {
        x >= 0 && x < self.width && y >= 0 && y < self.height
    }

    /// The tile as authored. Out-of-bounds reads are `Empty`.
    pub fn static_tile(&self, x: i32, y: i32) -> TileKind {
        if self.in_bounds(x, y) {
            self.tiles[(y * self.width + x) as usize]
        } else {
            TileKind::Empty
        }
    }

    pub fn coin_count(&self) -> usize {
        self.tiles
            .iter()
            .filter(|t| matches!(t, TileKind::Coin | TileKind::CoinBlock))
            .count()
    }

    /// The level reflected left-to-right (`x -> width - 1 - x`).
    ///
    /// Enemy facings are flipped; the goal column is kept so the mirrored
    /// level stays a valid level.
    pub fn mirrored(&self) -> Level {
        let w = self.width;
        let mut tiles = Vec::with_capacity(self.tiles.len());
        for y in 0..self.height {
            for x in 0..w {
                tiles.push(self.static_tile(w - 1 - x, y));
            }
        }
        Level {
            id: format!("{}-mirrored", self.id),
            width: w,
            height: self.height,
            tiles,
            spawn: TilePos::new(w - 1 - self.spawn.x, self.spawn.y),
            goal_x: self.goal_x,
            enemy_spawns: self
                .enemy_spawns
                .iter()
                .map(|e| EnemySpawn {
                    pos: TilePos::new(w - 1 - e.pos.x, e.pos.y),
                    facing: e.facing.flipped(),
                })
                .collect(),
        }
    }

    /// ASCII rendering in the level-file format.
    pub fn to_ascii(&self) -> String {
        let mut out = String::with_capacity(((self.width + 1) * self.height) as usize);
        for y in 0..self.height {
            for x in 0..self.width {
                let pos = TilePos::new(x, y);
                let ch = if pos == self.spawn {
                    'M'
                } else if self.enemy_spawns.iter().any(|e| e.pos == pos) {
                    'e'
                } else {
                    match self.static_tile(x, y) {
                        TileKind::Empty if x == self.goal_x => 'G',
                        TileKind::Empty => '.',
                        TileKind::Solid => '#',
                        TileKind::CoinBlock => '?',
                        TileKind::Coin => 'o',
                    }
                };
                out.push(ch);
            }
            out.push('\n');
        }
        out
    }
}
