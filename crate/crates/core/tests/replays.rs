mod common;

use mariomix_core::replay::resimulate;
use mariomix_core::*;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_episode(level: &Level, seed: u64) -> Replay {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_ticks = rng.random_range(20..900);
    record_episode(level, |_| Action::ALL[rng.random_range(0..ACTION_COUNT)], seed, max_ticks)
}

#[test]
fn hundred_random_episodes_round_trip() {
    let mut levels = bundled_levels();
    let mut runner = TestRunner::deterministic();
    for _ in 0..7 {
        levels.push(common::level().new_tree(&mut runner).unwrap().current());
    }
    for seed in 0..100u64 {
        let level = &levels[seed as usize % levels.len()];
        let replay = random_episode(level, seed);
        assert_eq!(replay.frames.len() as u32, replay.final_state().tick + 1);

        let text = ReplayFile::from_replay(&replay).to_json();
        let back = ReplayFile::from_json(&text).unwrap().into_replay(level).unwrap();
        assert_eq!(back, replay, "seed {seed}");
        assert_eq!(back.checksum(), replay.checksum());
        assert_eq!(resimulate(level, &replay.actions).unwrap(), replay.frames);
    }
}

#[test]
fn any_edit_to_the_action_list_is_caught() {
    let level = &bundled_levels()[1];
    for seed in 0..20u64 {
        let replay = random_episode(level, seed);
        let mut file = ReplayFile::from_replay(&replay);
        let last = file.actions.len() - 1;
        let (tick, a) = file.actions[last];
        let other = Action::ALL[(a.index() + 1) % ACTION_COUNT];
        file.actions[last] = (tick, other);
        let err = file.into_replay(level).unwrap_err();
        assert!(
            matches!(err, ReplayError::ChecksumMismatch { .. }),
            "seed {seed}: {err}"
        );
    }
}

#[test]
fn wrong_level_is_rejected() {
    let levels = bundled_levels();
    let replay = random_episode(&levels[0], 1);
    let file = ReplayFile::from_replay(&replay);
    assert!(matches!(
        file.into_replay(&levels[2]),
        Err(ReplayError::WrongLevel { .. })
    ));
}
