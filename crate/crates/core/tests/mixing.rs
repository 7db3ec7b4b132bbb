mod common;

use mariomix_core::solver::Policy;
use mariomix_core::world::TILE;
use mariomix_core::*;

#[test]
fn each_segment_plays_its_own_policy() {
    let level = common::corridor(90);
    let seg = segment_boundaries(&level, Resolution::Low).unwrap();
    let plays = [Action::RunRight, Action::WalkRight, Action::QuickJumpRight];
    let policies: Vec<Policy> = plays.iter().map(|&a| Policy::constant(a.name(), a)).collect();
    let assignment = Assignment::new(
        seg.clone(),
        plays.iter().map(|a| Some(a.name().to_string())).collect(),
    )
    .unwrap();
    let replay = run_mixed_with(
        &level,
        &assignment,
        |n| policies.iter().find(|p| p.name == n),
        4,
        5_000,
    )
    .unwrap();
    assert_eq!(replay.final_state().outcome, Outcome::Won);

    // every action matches the segment Mario stood in when it started
    for &(tick, action) in &replay.actions {
        let x = replay.frames[tick as usize].mario.x.div_euclid(TILE);
        let s = segment_of(x as i64, &seg).unwrap();
        assert_eq!(action, plays[s], "tick {tick}");
    }

    // marks name the segment of every frame, in order, and visit all three
    let marks = replay.segment_marks.as_ref().unwrap();
    assert_eq!(marks.iter().map(|m| m.1).collect::<Vec<_>>(), vec![0, 1, 2]);
    for f in &replay.frames {
        let col = f.mario.x.div_euclid(TILE).clamp(0, level.width - 1);
        let expected = segment_of(col as i64, &seg).unwrap();
        let marked = marks.iter().rev().find(|m| m.0 <= f.tick).unwrap().1;
        assert_eq!(marked, expected, "tick {}", f.tick);
    }

    // clips of consecutive segments abut
    let clips: Vec<Clip> = (0..3).map(|i| extract_clip(&replay, &seg, i).unwrap()).collect();
    for pair in clips.windows(2) {
        assert_eq!(pair[0].start_tick + pair[0].frames.len() as u32, pair[1].start_tick);
    }
}

#[test]
fn mixing_is_deterministic() {
    let level = bundled_levels().remove(2);
    let seg = segment_boundaries(&level, Resolution::Medium).unwrap();
    let pool = [
        Policy::constant("a", Action::RunRight),
        Policy::constant("b", Action::JumpRight),
        Policy::constant("c", Action::WalkRight),
    ];
    let slots = ["a", "b", "c", "a", "b"].map(|s| Some(s.to_string())).to_vec();
    let assignment = Assignment::new(seg, slots).unwrap();
    let run = || run_mixed_with(&level, &assignment, |n| pool.iter().find(|p| p.name == n), 0, 3_600).unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    assert_eq!(a.checksum(), b.checksum());
}
