#![allow(dead_code)]

use mariomix_core::{parse_level, Level};
use proptest::prelude::*;

/// Text for a small random level: ground on the bottom two rows with pits,
/// optional walls, coins, coin blocks and enemies on the walking row.
pub fn level_text() -> impl Strategy<Value = String> {
    (16usize..40)
        .prop_flat_map(|w| (Just(w), proptest::collection::vec(0u8..12, w)))
        .prop_map(|(w, cells)| {
            let h = 8;
            let mut g = vec![vec!['.'; w]; h];
            for row in &mut g[6..] {
                row.fill('#');
            }
            for (x, &c) in cells.iter().enumerate() {
                if x < 3 || x >= w - 2 {
                    continue;
                }
                match c {
                    0 => {
                        g[6][x] = '.';
                        g[7][x] = '.';
                    }
                    1 => g[5][x] = '#',
                    2 | 3 => g[4][x] = 'o',
                    4 => g[3][x] = '?',
                    5 => g[5][x] = 'e',
                    _ => {}
                }
            }
            // enemies need ground under them
            let (top, bottom) = g.split_at_mut(6);
            for (c, under) in top[5].iter_mut().zip(&bottom[0]) {
                if *c == 'e' && *under != '#' {
                    *c = '.';
                }
            }
            g[5][1] = 'M';
            g[0][w - 1] = 'G';
            g.into_iter().map(|r| r.into_iter().collect::<String>() + "\n").collect()
        })
}

pub fn level() -> impl Strategy<Value = Level> {
    level_text().prop_map(|t| parse_level("prop", &t).expect("generated level parses"))
}

pub fn corridor(width: usize) -> Level {
    let text = format!(
        "{}G\n{}\n.M{}\n{}\n",
        ".".repeat(width - 1),
        ".".repeat(width),
        ".".repeat(width - 2),
        "#".repeat(width)
    );
    parse_level("corridor", &text).unwrap()
}
